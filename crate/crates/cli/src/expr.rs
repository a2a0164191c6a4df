//! Exact parser for piecewise-affine convex expressions such as
//! `max(x - w, x + w, x + z)` or `-x/2 + 3*y`.

use anyhow::{anyhow, bail, Result};
use horo_core::arith::{self, Q, QVec};
use horo_core::convexfn::{AffinePiece, MaxAffine};
use num_traits::{Signed, Zero};

const PIECE_LIMIT: usize = 4096;

/// Names of the coordinates in dimension `d`. `x1..xd` always work.
pub fn variable_names(d: usize) -> Vec<&'static str> {
    match d {
        1 => vec!["x"],
        2 => vec!["x", "y"],
        3 => vec!["x", "y", "z"],
        4 => vec!["x", "y", "w", "z"],
        _ => vec![],
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Num(Q),
    Ident(String),
    Sym(char),
}

fn tokenize(text: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            out.push(Token::Num(arith::parse_q(&s).map_err(|e| anyhow!("{e}"))?));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                i += 1;
            }
            out.push(Token::Ident(chars[start..i].iter().collect()));
        } else if "+-*/(),".contains(c) {
            out.push(Token::Sym(c));
            i += 1;
        } else {
            bail!("unexpected character {c:?} in function");
        }
    }
    Ok(out)
}

/// A max of affine pieces.
#[derive(Clone, Debug)]
struct Value(Vec<(QVec, Q)>);

impl Value {
    fn constant(&self) -> Option<&Q> {
        match self.0.as_slice() {
            [(g, b)] if arith::is_zero_vec(g) => Some(b),
            _ => None,
        }
    }

    fn scale(self, c: &Q) -> Result<Value> {
        if c.is_negative() && self.0.len() > 1 {
            bail!("a negative multiple of a max is not convex");
        }
        Ok(Value(self.0.into_iter().map(|(g, b)| (arith::scale(c, &g), c * b)).collect()))
    }

    fn add(self, other: Value) -> Result<Value> {
        if self.0.len() * other.0.len() > PIECE_LIMIT {
            bail!("expression expands to more than {PIECE_LIMIT} pieces");
        }
        let mut out = Vec::new();
        for (g1, b1) in &self.0 {
            for (g2, b2) in &other.0 {
                out.push((arith::add(g1, g2), b1 + b2));
            }
        }
        Ok(Value(out))
    }
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    names: &'a [&'a str],
    dim: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Token::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            bail!("expected {c:?} at token {}", self.pos)
        }
    }

    fn expr(&mut self) -> Result<Value> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = acc.add(self.term()?)?;
            } else if self.eat('-') {
                acc = acc.add(self.term()?.scale(&-Q::from_integer(1.into()))?)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Value> {
        let mut acc = self.factor()?;
        loop {
            if self.eat('*') {
                let rhs = self.factor()?;
                acc = match (acc.constant().cloned(), rhs.constant().cloned()) {
                    (Some(c), _) => rhs.scale(&c)?,
                    (_, Some(c)) => acc.scale(&c)?,
                    _ => bail!("products of non-constant terms are not piecewise affine"),
                };
            } else if self.eat('/') {
                let rhs = self.factor()?;
                let Some(c) = rhs.constant().filter(|c| !c.is_zero()).cloned() else {
                    bail!("can only divide by a nonzero constant");
                };
                acc = acc.scale(&c.recip())?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn factor(&mut self) -> Result<Value> {
        if self.eat('-') {
            return self.factor()?.scale(&-Q::from_integer(1.into()));
        }
        if self.eat('+') {
            return self.factor();
        }
        if self.eat('(') {
            let v = self.expr()?;
            self.expect(')')?;
            return Ok(v);
        }
        let zero = vec![Q::zero(); self.dim];
        match self.tokens.get(self.pos).cloned() {
            Some(Token::Num(x)) => {
                self.pos += 1;
                Ok(Value(vec![(zero, x)]))
            }
            Some(Token::Ident(name)) if name == "max" => {
                self.pos += 1;
                self.expect('(')?;
                let mut pieces = self.expr()?.0;
                while self.eat(',') {
                    pieces.extend(self.expr()?.0);
                }
                self.expect(')')?;
                Ok(Value(pieces))
            }
            Some(Token::Ident(name)) => {
                self.pos += 1;
                let index = self.variable(&name)?;
                let mut g = zero;
                g[index] = Q::from_integer(1.into());
                Ok(Value(vec![(g, Q::zero())]))
            }
            other => bail!("unexpected {other:?} in function"),
        }
    }

    fn variable(&self, name: &str) -> Result<usize> {
        if let Some(i) = self.names.iter().position(|n| *n == name) {
            return Ok(i);
        }
        if let Some(k) = name.strip_prefix('x').and_then(|s| s.parse::<usize>().ok()) {
            if (1..=self.dim).contains(&k) {
                return Ok(k - 1);
            }
        }
        bail!("unknown variable {name:?} in dimension {}", self.dim)
    }
}

/// Parses a convex piecewise-affine expression in `d` variables.
pub fn parse_function(text: &str, d: usize) -> Result<MaxAffine> {
    let names = variable_names(d);
    let mut parser = Parser { tokens: tokenize(text)?, pos: 0, names: &names, dim: d };
    let value = parser.expr()?;
    if parser.pos != parser.tokens.len() {
        bail!("trailing input after token {}", parser.pos);
    }
    let mut pieces: Vec<(QVec, Q)> = Vec::new();
    for piece in value.0 {
        if !pieces.contains(&piece) {
            pieces.push(piece);
        }
    }
    Ok(MaxAffine::new(pieces.into_iter().map(|(g, b)| AffinePiece::new(g, b)).collect())?)
}

/// `"1,-1/2,0.25"` as an exact vector.
pub fn parse_vector(text: &str) -> Result<QVec> {
    text.split(',')
        .map(|s| arith::parse_q(s.trim()).map_err(|e| anyhow!("bad coordinate {s:?}: {e}")))
        .collect()
}

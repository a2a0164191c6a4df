//! Double-description enumeration of the extreme rays of a pointed cone
//! `{x : A x >= 0}` in exact integer arithmetic.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::arith::{self, make_primitive, Q};
use crate::{Error, Result};

/// Fixed-width bitset over constraint indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) struct Bits(Vec<u64>);

impl Bits {
    pub fn new(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64).max(1)])
    }

    pub fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    pub fn and(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    pub fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_superset(&self, other: &Bits) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & b == *b)
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(w, &word)| {
            (0..64).filter(move |b| word >> b & 1 == 1).map(move |b| w * 64 + b)
        })
    }
}

struct Ray {
    coords: Vec<BigInt>,
    zeros: Bits,
}

fn eval(row: &[BigInt], x: &[BigInt]) -> BigInt {
    row.iter().zip(x).fold(BigInt::zero(), |acc, (a, b)| acc + a * b)
}

/// Extreme rays of `{x in R^n : row . x >= 0 for every row}`, each returned
/// as a primitive integer vector. Fails when the cone is not pointed.
pub(crate) fn extreme_rays(rows: &[Vec<BigInt>], n: usize) -> Result<Vec<Vec<BigInt>>> {
    let m = rows.len();
    let qrows: Vec<Vec<Q>> = rows
        .iter()
        .map(|r| r.iter().map(|x| Q::from_integer(x.clone())).collect())
        .collect();

    // Greedy choice of n independent rows to seed the iteration.
    let mut basis: Vec<usize> = Vec::with_capacity(n);
    let mut basis_rows: Vec<Vec<Q>> = Vec::with_capacity(n);
    for (i, r) in qrows.iter().enumerate() {
        if basis.len() == n {
            break;
        }
        basis_rows.push(r.clone());
        if arith::rank(&basis_rows, n) == basis_rows.len() {
            basis.push(i);
        } else {
            basis_rows.pop();
        }
    }
    if basis.len() < n {
        return Err(Error::Unbounded("cone has a nontrivial lineality space".into()));
    }

    // Columns of the inverse of the seed block are the initial rays.
    let mut rays: Vec<Ray> = Vec::new();
    for j in 0..n {
        let rhs: Vec<Q> = (0..n).map(|k| if k == j { arith::q(1) } else { arith::q(0) }).collect();
        let sol = arith::solve(&basis_rows, &rhs, n).expect("seed block is nonsingular");
        let coords = arith::primitive_integer(&sol);
        let mut zeros = Bits::new(m);
        for (k, &row) in basis.iter().enumerate() {
            if k != j {
                zeros.set(row);
            }
        }
        rays.push(Ray { coords, zeros });
    }

    let mut in_basis = vec![false; m];
    for &b in &basis {
        in_basis[b] = true;
    }

    for (i, row) in rows.iter().enumerate() {
        if in_basis[i] {
            continue;
        }
        let values: Vec<BigInt> = rays.iter().map(|r| eval(row, &r.coords)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&k| values[k].is_positive()).collect();
        let negs: Vec<usize> = (0..rays.len()).filter(|&k| values[k].is_negative()).collect();
        if negs.is_empty() {
            for (k, r) in rays.iter_mut().enumerate() {
                if values[k].is_zero() {
                    r.zeros.set(i);
                }
            }
            continue;
        }
        // Rays zero on each row, to restrict the adjacency test to rays
        // sharing the sparsest common row.
        let mut by_row: Vec<Vec<usize>> = vec![Vec::new(); m];
        for (k, r) in rays.iter().enumerate() {
            for j in r.zeros.ones() {
                by_row[j].push(k);
            }
        }
        let mut fresh: Vec<Ray> = Vec::new();
        for &a in &pos {
            for &b in &negs {
                let common = rays[a].zeros.and(&rays[b].zeros);
                if common.count() + 2 < n {
                    continue;
                }
                let others = |k: usize| k == a || k == b || !rays[k].zeros.is_superset(&common);
                let adjacent = match common.ones().min_by_key(|&j| by_row[j].len()) {
                    Some(j) => by_row[j].iter().all(|&k| others(k)),
                    None => (0..rays.len()).all(others),
                };
                if !adjacent {
                    continue;
                }
                let va = &values[a];
                let vb = -&values[b];
                let coords: Vec<BigInt> = rays[a]
                    .coords
                    .iter()
                    .zip(&rays[b].coords)
                    .map(|(x, y)| &vb * x + va * y)
                    .collect();
                let mut zeros = common;
                zeros.set(i);
                fresh.push(Ray { coords: make_primitive(coords), zeros });
            }
        }
        let mut kept: Vec<Ray> = Vec::with_capacity(rays.len() - negs.len() + fresh.len());
        for (k, mut r) in rays.into_iter().enumerate() {
            if values[k].is_negative() {
                continue;
            }
            if values[k].is_zero() {
                r.zeros.set(i);
            }
            kept.push(r);
        }
        kept.extend(fresh);
        rays = kept;
    }
    Ok(rays.into_iter().map(|r| r.coords).collect())
}

//! Dense two-phase simplex over exact rationals, Bland's rule.
//!
//! Problems are in standard form: minimise `c . x` subject to `A x = b`,
//! `x >= 0`. Sizes here are tiny (tens of rows and columns), so a plain
//! tableau is adequate.

use num_traits::{One, Signed, Zero};

use crate::arith::{self, Q, QVec};

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub x: QVec,
    pub value: Q,
    /// Multipliers `π` with `c_B = B^T π`; optimal for the dual
    /// `max b . π` s.t. `A^T π <= c`.
    pub duals: QVec,
    pub basis: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible,
    Unbounded,
}

struct Tableau {
    rows: Vec<QVec>,
    rhs: QVec,
    basis: Vec<usize>,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let inv = self.rows[r][c].recip();
        for x in self.rows[r].iter_mut() {
            *x *= &inv;
        }
        self.rhs[r] *= &inv;
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][c].is_zero() {
                continue;
            }
            let f = self.rows[i][c].clone();
            for j in 0..self.rows[i].len() {
                if !self.rows[r][j].is_zero() {
                    let delta = &f * &self.rows[r][j];
                    self.rows[i][j] -= delta;
                }
            }
            let delta = &f * &self.rhs[r];
            self.rhs[i] -= delta;
        }
        self.basis[r] = c;
    }

    /// Runs simplex on costs `cost` restricted to columns `allowed`.
    /// Returns false when unbounded.
    fn optimise(&mut self, cost: &[Q], allowed: &dyn Fn(usize) -> bool) -> bool {
        let ncols = cost.len();
        loop {
            // reduced costs: c_j - c_B . column_j
            let entering = (0..ncols).filter(|&j| allowed(j) && !self.basis.contains(&j)).find(|&j| {
                let mut rc = cost[j].clone();
                for (i, &b) in self.basis.iter().enumerate() {
                    if !self.rows[i][j].is_zero() {
                        rc -= &cost[b] * &self.rows[i][j];
                    }
                }
                rc.is_negative()
            });
            let Some(e) = entering else {
                return true;
            };
            let mut leave: Option<(usize, Q)> = None;
            for i in 0..self.rows.len() {
                if self.rows[i][e].is_positive() {
                    let ratio = &self.rhs[i] / &self.rows[i][e];
                    leave = match leave {
                        Some((li, lr)) if lr < ratio || (lr == ratio && self.basis[li] < self.basis[i]) => {
                            Some((li, lr))
                        }
                        _ => Some((i, ratio)),
                    };
                }
            }
            let Some((r, _)) = leave else {
                return false;
            };
            self.pivot(r, e);
        }
    }
}

pub fn minimize(c: &[Q], a: &[QVec], b: &[Q]) -> LpOutcome {
    let n = c.len();
    let m = a.len();
    assert_eq!(b.len(), m, "rhs length");
    assert!(a.iter().all(|r| r.len() == n), "row length");

    // Phase one: artificial columns n..n+m.
    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    for i in 0..m {
        let flip = b[i].is_negative();
        let mut row: QVec = a[i].iter().map(|x| if flip { -x } else { x.clone() }).collect();
        row.extend((0..m).map(|k| if k == i { Q::one() } else { Q::zero() }));
        rows.push(row);
        rhs.push(if flip { -&b[i] } else { b[i].clone() });
    }
    let mut t = Tableau { rows, rhs, basis: (n..n + m).collect() };
    let phase1: QVec = (0..n + m).map(|j| if j >= n { Q::one() } else { Q::zero() }).collect();
    t.optimise(&phase1, &|_| true);
    let infeasibility: Q = t
        .basis
        .iter()
        .zip(&t.rhs)
        .filter(|(&bcol, _)| bcol >= n)
        .fold(Q::zero(), |acc, (_, v)| acc + v);
    if infeasibility.is_positive() {
        return LpOutcome::Infeasible;
    }
    // Drive remaining artificials out; rows that cannot be pivoted are redundant.
    let mut redundant = vec![false; m];
    for r in 0..m {
        if t.basis[r] >= n {
            match (0..n).find(|&j| !t.rows[r][j].is_zero()) {
                Some(j) => t.pivot(r, j),
                None => redundant[r] = true,
            }
        }
    }
    let keep: Vec<usize> = (0..m).filter(|&r| !redundant[r]).collect();
    let mut t = Tableau {
        rows: keep.iter().map(|&r| t.rows[r][..n].to_vec()).collect(),
        rhs: keep.iter().map(|&r| t.rhs[r].clone()).collect(),
        basis: keep.iter().map(|&r| t.basis[r]).collect(),
    };
    if !t.optimise(c, &|_| true) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![Q::zero(); n];
    for (i, &bcol) in t.basis.iter().enumerate() {
        x[bcol] = t.rhs[i].clone();
    }
    let value = arith::dot(c, &x);

    // Duals from the original rows that survived: B^T π = c_B.
    let bt: Vec<QVec> = t
        .basis
        .iter()
        .map(|&col| keep.iter().map(|&r| a[r][col].clone()).collect())
        .collect();
    let cb: QVec = t.basis.iter().map(|&col| c[col].clone()).collect();
    let pi_kept = arith::solve(&bt, &cb, keep.len()).expect("optimal basis is nonsingular");
    let mut duals = vec![Q::zero(); m];
    for (k, &r) in keep.iter().enumerate() {
        duals[r] = pi_kept[k].clone();
    }
    LpOutcome::Optimal(LpSolution { x, value, duals, basis: t.basis })
}

//! Dense two-phase simplex over exact rationals with Bland's rule.
//!
//! Solves `min c·x` subject to `A x = b`, `x ≥ 0`. Sized for the small
//! transport problems of this crate (a few dozen variables); no attempt is
//! made at sparsity.

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::Q;

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub x: Vec<Q>,
    pub value: Q,
}

struct Tableau {
    rows: Vec<Vec<Q>>,
    /// Reduced costs, with `-objective` in the last slot.
    obj: Vec<Q>,
    basis: Vec<usize>,
}

impl Tableau {
    fn width(&self) -> usize {
        self.obj.len() - 1
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            *v /= &p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                *v -= &f * pv;
            }
        }
        if !self.obj[c].is_zero() {
            let f = self.obj[c].clone();
            for (v, pv) in self.obj.iter_mut().zip(&pivot_row) {
                *v -= &f * pv;
            }
        }
        self.basis[r] = c;
    }

    /// Runs simplex iterations on columns `< limit`; `Err` when unbounded.
    fn optimize(&mut self, limit: usize) -> Result<()> {
        loop {
            let Some(c) = (0..limit).find(|&j| self.obj[j].is_negative()) else {
                return Ok(());
            };
            let rhs = self.width();
            let mut best: Option<(Q, usize, usize)> = None;
            for (r, row) in self.rows.iter().enumerate() {
                if !row[c].is_positive() {
                    continue;
                }
                let ratio = &row[rhs] / &row[c];
                let better = match &best {
                    None => true,
                    Some((br, _, bb)) => ratio < *br || (ratio == *br && self.basis[r] < *bb),
                };
                if better {
                    best = Some((ratio, r, self.basis[r]));
                }
            }
            let Some((_, r, _)) = best else {
                return Err(Error::Numeric("linear program is unbounded".into()));
            };
            self.pivot(r, c);
        }
    }
}

/// `min c·x` s.t. `a x = b`, `x ≥ 0`.
pub fn minimize(c: &[Q], a: &[Vec<Q>], b: &[Q]) -> Result<LpSolution> {
    let n = c.len();
    let m = a.len();
    if b.len() != m || a.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidInput("constraint shapes disagree".into()));
    }
    // Columns: n structural, m artificial, 1 right-hand side.
    let mut rows = Vec::with_capacity(m);
    for (i, (row, bi)) in a.iter().zip(b).enumerate() {
        let flip = bi.is_negative();
        let mut t: Vec<Q> = row.iter().map(|v| if flip { -v } else { v.clone() }).collect();
        t.extend((0..m).map(|j| if j == i { Q::one() } else { Q::zero() }));
        t.push(if flip { -bi } else { bi.clone() });
        rows.push(t);
    }
    let mut obj = vec![Q::zero(); n + m + 1];
    for row in &rows {
        for j in 0..n {
            obj[j] -= &row[j];
        }
        obj[n + m] -= &row[n + m];
    }
    let mut t = Tableau { rows, obj, basis: (n..n + m).collect() };
    t.optimize(n + m)?;
    if !t.obj[n + m].is_zero() {
        return Err(Error::Numeric("linear program is infeasible".into()));
    }

    // Drive artificials out of the basis; rows that cannot be pivoted are redundant.
    let mut r = 0;
    while r < t.rows.len() {
        if t.basis[r] >= n {
            match (0..n).find(|&j| !t.rows[r][j].is_zero()) {
                Some(j) => t.pivot(r, j),
                None => {
                    t.rows.remove(r);
                    t.basis.remove(r);
                    continue;
                }
            }
        }
        r += 1;
    }
    for row in t.rows.iter_mut() {
        let rhs = row[n + m].clone();
        row.truncate(n);
        row.push(rhs);
    }
    let mut obj: Vec<Q> = c.to_vec();
    obj.push(Q::zero());
    for (row, &bv) in t.rows.iter().zip(&t.basis) {
        let cb = c[bv].clone();
        if cb.is_zero() {
            continue;
        }
        for (v, rv) in obj.iter_mut().zip(row) {
            *v -= &cb * rv;
        }
    }
    let mut t = Tableau { rows: t.rows, obj, basis: t.basis };
    t.optimize(n)?;

    let mut x = vec![Q::zero(); n];
    for (row, &bv) in t.rows.iter().zip(&t.basis) {
        x[bv] = row[n].clone();
    }
    let value = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    Ok(LpSolution { x, value })
}

//! Two-phase dense simplex for `min cᵀx  s.t.  A x = b, x ≥ 0`.
//!
//! Bland's rule is used for both the entering and the leaving variable, so
//! the method terminates on degenerate problems. Intended for the handful of
//! variables that arise from polytope norms in small dimensions.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Debug)]
pub struct LpSolution<T> {
    pub x: Vec<T>,
    pub objective: T,
}

struct Tableau<T> {
    rows: Vec<Vec<T>>,
    obj: Vec<T>,
    basis: Vec<usize>,
    width: usize,
}

impl<T: Scalar> Tableau<T> {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                let f = row[c];
                if f != T::zero() {
                    for (v, &pv) in row.iter_mut().zip(&pivot_row) {
                        *v -= f * pv;
                    }
                }
            }
        }
        let f = self.obj[c];
        if f != T::zero() {
            for (v, &pv) in self.obj.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
        }
        self.basis[r] = c;
    }

    /// Runs simplex iterations over the columns `allowed`.
    fn optimize(&mut self, allowed: usize, tol: T) -> Result<()> {
        let rhs = self.width;
        for _ in 0..10_000 {
            let Some(enter) = (0..allowed).find(|&j| self.obj[j] < -tol) else {
                return Ok(());
            };
            let mut leave: Option<(usize, T)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[enter] > tol {
                    let ratio = row[rhs] / row[enter];
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            if ratio < br - tol
                                || (ratio <= br + tol && self.basis[i] < self.basis[bi])
                            {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else {
                return Err(Error::Internal("linear program is unbounded".into()));
            };
            self.pivot(r, enter);
        }
        Err(Error::Internal("simplex iteration limit reached".into()))
    }
}

/// Solves `min cᵀx` subject to `A x = b`, `x ≥ 0`.
pub fn minimize<T: Scalar>(c: &[T], a: &[Vec<T>], b: &[T]) -> Result<LpSolution<T>> {
    let m = a.len();
    let n = c.len();
    if b.len() != m || a.iter().any(|row| row.len() != n) {
        return Err(Error::Structural("inconsistent linear program shape".into()));
    }
    let tol = T::solver_tolerance();
    let width = n + m;
    let mut rows = Vec::with_capacity(m);
    for (i, (row, &bi)) in a.iter().zip(b).enumerate() {
        let sign = if bi < T::zero() { -T::one() } else { T::one() };
        let mut r: Vec<T> = row.iter().map(|&v| v * sign).collect();
        r.extend((0..m).map(|k| if k == i { T::one() } else { T::zero() }));
        r.push(bi * sign);
        rows.push(r);
    }
    // Phase one: minimise the sum of artificials.
    let mut obj = vec![T::zero(); width + 1];
    for r in &rows {
        for j in 0..n {
            obj[j] -= r[j];
        }
        obj[width] -= r[width];
    }
    let mut t = Tableau {
        rows,
        obj,
        basis: (n..n + m).collect(),
        width,
    };
    t.optimize(width, tol)?;
    let scale = b.iter().fold(T::one(), |acc, v| acc.max(v.abs()));
    if -t.obj[width] > tol * scale * T::lit(100.0) {
        return Err(Error::Internal("linear program is infeasible".into()));
    }
    // Drive remaining artificials out of the basis where possible.
    for r in 0..m {
        if t.basis[r] >= n {
            if let Some(c) = (0..n).find(|&j| t.rows[r][j].abs() > tol) {
                t.pivot(r, c);
            }
        }
    }
    // Phase two.
    let mut obj = vec![T::zero(); width + 1];
    obj[..n].copy_from_slice(c);
    for (r, &bv) in t.basis.iter().enumerate() {
        let cb = if bv < n { c[bv] } else { T::zero() };
        if cb != T::zero() {
            for j in 0..=width {
                obj[j] -= cb * t.rows[r][j];
            }
        }
    }
    t.obj = obj;
    t.optimize(n, tol)?;
    let mut x = vec![T::zero(); n];
    for (r, &bv) in t.basis.iter().enumerate() {
        if bv < n {
            x[bv] = t.rows[r][width].max(T::zero());
        }
    }
    let objective = x.iter().zip(c).map(|(&xi, &ci)| xi * ci).sum();
    Ok(LpSolution { x, objective })
}

//! Dense linear algebra on tiny row-major matrices.

use crate::scalar::Scalar;

pub(crate) type Matrix<T> = Vec<Vec<T>>;

/// Lower-triangular `L` with `G = L Lᵀ`, or `None` when `G` is not positive definite.
pub(crate) fn cholesky<T: Scalar>(g: &Matrix<T>) -> Option<Matrix<T>> {
    let n = g.len();
    let mut l = vec![vec![T::zero(); n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = g[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if !(s > T::zero()) {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Some(l)
}

/// Solves `L y = b` for lower-triangular `L`.
pub(crate) fn forward_solve<T: Scalar>(l: &Matrix<T>, b: &[T]) -> Vec<T> {
    let n = l.len();
    let mut y = vec![T::zero(); n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i][k] * y[k];
        }
        y[i] = s / l[i][i];
    }
    y
}

/// Solves `Lᵀ x = y` for lower-triangular `L`.
pub(crate) fn backward_solve_transposed<T: Scalar>(l: &Matrix<T>, y: &[T]) -> Vec<T> {
    let n = l.len();
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[k][i] * x[k];
        }
        x[i] = s / l[i][i];
    }
    x
}

/// Inverse of an SPD matrix from its Cholesky factor, symmetrised.
pub(crate) fn spd_inverse<T: Scalar>(l: &Matrix<T>) -> Matrix<T> {
    let n = l.len();
    let mut inv = vec![vec![T::zero(); n]; n];
    for j in 0..n {
        let mut e = vec![T::zero(); n];
        e[j] = T::one();
        let col = backward_solve_transposed(l, &forward_solve(l, &e));
        for i in 0..n {
            inv[i][j] = col[i];
        }
    }
    let half = T::lit(0.5);
    for i in 0..n {
        for j in 0..i {
            let s = (inv[i][j] + inv[j][i]) * half;
            inv[i][j] = s;
            inv[j][i] = s;
        }
    }
    inv
}

/// Numerical rank by Gaussian elimination with partial pivoting.
pub(crate) fn rank<T: Scalar>(rows: &[Vec<T>], tol: T) -> usize {
    let mut a: Matrix<T> = rows.to_vec();
    let ncols = a.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..ncols {
        if r == a.len() {
            break;
        }
        let (piv, val) = (r..a.len())
            .map(|i| (i, a[i][c].abs()))
            .fold((r, T::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
        if val <= tol {
            continue;
        }
        a.swap(r, piv);
        for i in r + 1..a.len() {
            let f = a[i][c] / a[r][c];
            for k in c..ncols {
                let t = a[r][k];
                a[i][k] -= f * t;
            }
        }
        r += 1;
    }
    r
}

/// Solves the square system `A x = b`; `None` when `A` is (numerically) singular.
pub(crate) fn solve<T: Scalar>(a: &Matrix<T>, b: &[T], tol: T) -> Option<Vec<T>> {
    let n = a.len();
    let mut m: Matrix<T> = a
        .iter()
        .zip(b)
        .map(|(row, &bi)| {
            let mut r = row.clone();
            r.push(bi);
            r
        })
        .collect();
    for c in 0..n {
        let piv = (c..n).max_by(|&i, &j| {
            m[i][c]
                .abs()
                .partial_cmp(&m[j][c].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if m[piv][c].abs() <= tol {
            return None;
        }
        m.swap(c, piv);
        for i in 0..n {
            if i != c {
                let f = m[i][c] / m[c][c];
                if f != T::zero() {
                    for k in c..=n {
                        let t = m[c][k];
                        m[i][k] -= f * t;
                    }
                }
            }
        }
    }
    Some((0..n).map(|i| m[i][n] / m[i][i]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat_vec(m: &Matrix<f64>, v: &[f64]) -> Vec<f64> {
        m.iter().map(|row| crate::scalar::dot(row, v)).collect()
    }

    #[test]
    fn cholesky_roundtrip() {
        let g: Matrix<f64> = vec![vec![4.0, 2.0], vec![2.0, 3.0]];
        let l = cholesky(&g).unwrap();
        let inv = spd_inverse(&l);
        let prod = mat_vec(&g, &mat_vec(&inv, &[1.0, -2.0]));
        assert!((prod[0] - 1.0).abs() < 1e-12 && (prod[1] + 2.0).abs() < 1e-12);
        assert!(cholesky(&vec![vec![1.0f64, 2.0], vec![2.0, 1.0]]).is_none());
    }

    #[test]
    fn rank_and_solve() {
        assert_eq!(rank(&[vec![1.0f64, 2.0], vec![2.0, 4.0]], 1e-12), 1);
        assert_eq!(rank(&[vec![1.0f64, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]], 1e-12), 2);
        let x = solve(&vec![vec![2.0f64, 1.0], vec![1.0, 3.0]], &[3.0, 5.0], 1e-12).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-12 && (x[1] - 1.4).abs() < 1e-12);
    }
}

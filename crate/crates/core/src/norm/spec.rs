//! Norms on finite-dimensional coordinate spaces and their duals.

use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use super::linalg::{self, Matrix};
use super::simplex;
use crate::error::{invalid, Error, Result};
use crate::exponent::Exponent;
use crate::scalar::{dot, pow, Scalar};

/// The four norm families a fiber may carry.
#[derive(Clone, Debug, PartialEq)]
pub enum NormKind<T> {
    /// `‖v‖ = √(vᵀ G v)` for a symmetric positive-definite Gram matrix.
    InnerProduct { gram: Vec<Vec<T>> },
    /// `‖v‖ = ‖(d_1 v_1, …, d_n v_n)‖_r`.
    WeightedLp { exponent: Exponent<T>, weights: Vec<T> },
    /// `‖v‖ = max_i |⟨a_i, v⟩|` over a spanning, symmetric set of functionals.
    PolyhedralMax { functionals: Vec<Vec<T>> },
    /// Minkowski gauge of the convex hull of a spanning, symmetric vertex set.
    PolytopeGauge { vertices: Vec<Vec<T>> },
}

/// A norm on `ℝ^dimension`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "RawNorm<T>", into = "RawNorm<T>", bound = "T: Scalar")]
pub struct NormSpec<T: Scalar> {
    dimension: usize,
    kind: NormKind<T>,
    derived: Derived<T>,
    dual: OnceLock<Arc<NormSpec<T>>>,
}

#[derive(Clone, Debug)]
enum Derived<T> {
    Nothing,
    /// Cholesky factor of the Gram matrix.
    Cholesky(Matrix<T>),
    /// Facet normals `f` of the relevant polytope, normalised so the facet is
    /// `{⟨f, x⟩ = 1}`. For a gauge these are the facets of `conv(V)`; for a
    /// polyhedral max-norm they are the vertices of its unit ball.
    Facets(Vec<Vec<T>>),
}

impl<T: Scalar> PartialEq for NormSpec<T> {
    fn eq(&self, other: &Self) -> bool {
        self.dimension == other.dimension && self.kind == other.kind
    }
}

impl<T: Scalar> NormSpec<T> {
    pub fn new(dimension: usize, kind: NormKind<T>) -> Result<Self> {
        if dimension == 0 {
            return Err(invalid("norm", "dimension must be positive"));
        }
        let (kind, derived) = match kind {
            NormKind::InnerProduct { gram } => {
                check_matrix(&gram, dimension, "gram")?;
                let scale = gram
                    .iter()
                    .flatten()
                    .fold(T::zero(), |acc, v| acc.max(v.abs()));
                let tol = relative_tol::<T>() * scale.max(T::one());
                for i in 0..dimension {
                    for j in 0..i {
                        if (gram[i][j] - gram[j][i]).abs() > tol {
                            return Err(invalid("norm", "gram matrix is not symmetric"));
                        }
                    }
                }
                let l = linalg::cholesky(&gram)
                    .ok_or_else(|| invalid("norm", "gram matrix is not positive definite"))?;
                (NormKind::InnerProduct { gram }, Derived::Cholesky(l))
            }
            NormKind::WeightedLp { exponent, weights } => {
                if weights.len() != dimension {
                    return Err(invalid(
                        "norm",
                        format!("{} weights for dimension {dimension}", weights.len()),
                    ));
                }
                if weights.iter().any(|&d| !(d > T::zero()) || !d.is_finite()) {
                    return Err(invalid("norm", "lp weights must be positive and finite"));
                }
                (NormKind::WeightedLp { exponent, weights }, Derived::Nothing)
            }
            NormKind::PolyhedralMax { functionals } => {
                let functionals = symmetrize(functionals, dimension, "functional")?;
                if linalg::rank(&functionals, relative_tol::<T>()) < dimension {
                    return Err(invalid("norm", "functionals do not span the dual space"));
                }
                let facets = facets_of_hull(&functionals, dimension)?;
                (
                    NormKind::PolyhedralMax { functionals },
                    Derived::Facets(facets),
                )
            }
            NormKind::PolytopeGauge { vertices } => {
                let vertices = symmetrize(vertices, dimension, "vertex")?;
                if linalg::rank(&vertices, relative_tol::<T>()) < dimension {
                    return Err(invalid("norm", "vertices do not span the space"));
                }
                let facets = facets_of_hull(&vertices, dimension)?;
                (NormKind::PolytopeGauge { vertices }, Derived::Facets(facets))
            }
        };
        let spec = NormSpec {
            dimension,
            kind,
            derived,
            dual: OnceLock::new(),
        };
        #[cfg(debug_assertions)]
        spec.debug_self_test();
        Ok(spec)
    }

    pub fn inner_product(gram: Vec<Vec<T>>) -> Result<Self> {
        NormSpec::new(gram.len(), NormKind::InnerProduct { gram })
    }

    pub fn euclidean(dimension: usize) -> Self {
        let gram = (0..dimension)
            .map(|i| {
                (0..dimension)
                    .map(|j| if i == j { T::one() } else { T::zero() })
                    .collect()
            })
            .collect();
        NormSpec::inner_product(gram).expect("identity gram is valid")
    }

    pub fn weighted_lp(exponent: Exponent<T>, weights: Vec<T>) -> Result<Self> {
        NormSpec::new(weights.len(), NormKind::WeightedLp { exponent, weights })
    }

    /// Unweighted `ℓ^r` on `ℝ^dimension`.
    pub fn lp(exponent: Exponent<T>, dimension: usize) -> Self {
        NormSpec::weighted_lp(exponent, vec![T::one(); dimension]).expect("unit weights are valid")
    }

    pub fn polyhedral_max(functionals: Vec<Vec<T>>) -> Result<Self> {
        let d = functionals.first().map_or(0, Vec::len);
        NormSpec::new(d, NormKind::PolyhedralMax { functionals })
    }

    pub fn polytope_gauge(vertices: Vec<Vec<T>>) -> Result<Self> {
        let d = vertices.first().map_or(0, Vec::len);
        NormSpec::new(d, NormKind::PolytopeGauge { vertices })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn kind(&self) -> &NormKind<T> {
        &self.kind
    }

    pub fn is_inner_product(&self) -> bool {
        matches!(self.kind, NormKind::InnerProduct { .. })
    }

    /// Short human-readable description.
    pub fn label(&self) -> String {
        match &self.kind {
            NormKind::InnerProduct { .. } => format!("inner_product(d={})", self.dimension),
            NormKind::WeightedLp { exponent, .. } => {
                format!("weighted_lp(r={exponent},d={})", self.dimension)
            }
            NormKind::PolyhedralMax { functionals } => format!(
                "polyhedral_max(m={},d={})",
                functionals.len(),
                self.dimension
            ),
            NormKind::PolytopeGauge { vertices } => {
                format!("polytope_gauge(m={},d={})", vertices.len(), self.dimension)
            }
        }
    }

    fn check_len(&self, v: &[T]) -> Result<()> {
        if v.len() == self.dimension {
            Ok(())
        } else {
            Err(Error::Structural(format!(
                "vector of length {} for a norm of dimension {}",
                v.len(),
                self.dimension
            )))
        }
    }

    /// `‖v‖`.
    pub fn norm_eval(&self, v: &[T]) -> Result<T> {
        self.check_len(v)?;
        Ok(self.norm(v))
    }

    /// `‖v‖` without the length check.
    pub fn norm(&self, v: &[T]) -> T {
        match (&self.kind, &self.derived) {
            (NormKind::InnerProduct { .. }, Derived::Cholesky(l)) => {
                // |Lᵀv|, without allocating
                let n = v.len();
                let mut s = T::zero();
                for i in 0..n {
                    let mut c = T::zero();
                    for k in i..n {
                        c += l[k][i] * v[k];
                    }
                    s += c * c;
                }
                s.sqrt()
            }
            (NormKind::WeightedLp { exponent, weights }, _) => weighted_lp_norm(v, weights, exponent),
            (NormKind::PolyhedralMax { functionals }, _) => max_abs_pairing(functionals, v),
            (NormKind::PolytopeGauge { .. }, Derived::Facets(f)) => max_pairing(f, v),
            _ => unreachable!("derived data matches kind"),
        }
    }

    /// `‖ω‖_* = sup_{‖v‖ ≤ 1} ⟨ω, v⟩`.
    pub fn dual_norm_eval(&self, omega: &[T]) -> Result<T> {
        self.check_len(omega)?;
        Ok(self.dual_norm(omega))
    }

    pub fn dual_norm(&self, omega: &[T]) -> T {
        match (&self.kind, &self.derived) {
            (NormKind::InnerProduct { .. }, Derived::Cholesky(l)) => {
                euclid(&linalg::forward_solve(l, omega))
            }
            (NormKind::WeightedLp { exponent, weights }, _) => {
                let scaled: Vec<T> = omega.iter().zip(weights).map(|(&x, &d)| x / d).collect();
                lp_vec_norm(&scaled, &exponent.conjugate())
            }
            (NormKind::PolyhedralMax { .. }, Derived::Facets(f)) => max_pairing(f, omega),
            (NormKind::PolytopeGauge { vertices }, _) => max_abs_pairing(vertices, omega),
            _ => unreachable!("derived data matches kind"),
        }
    }

    /// The dual norm as a norm specification in its own right.
    pub fn dual_spec(&self) -> Arc<NormSpec<T>> {
        self.dual
            .get_or_init(|| {
                let kind = match (&self.kind, &self.derived) {
                    (NormKind::InnerProduct { .. }, Derived::Cholesky(l)) => {
                        NormKind::InnerProduct {
                            gram: linalg::spd_inverse(l),
                        }
                    }
                    (NormKind::WeightedLp { exponent, weights }, _) => NormKind::WeightedLp {
                        exponent: exponent.conjugate(),
                        weights: weights.iter().map(|&d| d.recip()).collect(),
                    },
                    (NormKind::PolyhedralMax { functionals }, _) => NormKind::PolytopeGauge {
                        vertices: functionals.clone(),
                    },
                    (NormKind::PolytopeGauge { vertices }, _) => NormKind::PolyhedralMax {
                        functionals: vertices.clone(),
                    },
                    _ => unreachable!("derived data matches kind"),
                };
                Arc::new(NormSpec::new(self.dimension, kind).expect("dual of a valid norm is valid"))
            })
            .clone()
    }

    /// A unit vector `v` with `⟨ω, v⟩ = ‖ω‖_*`; `None` for `ω = 0`.
    pub fn norming_vector(&self, omega: &[T]) -> Result<Option<Vec<T>>> {
        self.check_len(omega)?;
        if omega.iter().all(|&x| x == T::zero()) {
            return Ok(None);
        }
        let v = match (&self.kind, &self.derived) {
            (NormKind::InnerProduct { .. }, Derived::Cholesky(l)) => {
                let y = linalg::forward_solve(l, omega);
                let x = linalg::backward_solve_transposed(l, &y);
                let n = self.norm(&x);
                x.into_iter().map(|c| c / n).collect()
            }
            (NormKind::WeightedLp { exponent, weights }, _) => {
                let eta: Vec<T> = omega.iter().zip(weights).map(|(&x, &d)| x / d).collect();
                holder_maximizer(&eta, exponent)
                    .into_iter()
                    .zip(weights)
                    .map(|(u, &d)| u / d)
                    .collect()
            }
            (NormKind::PolyhedralMax { .. }, Derived::Facets(f)) => argmax_pairing(f, omega).clone(),
            (NormKind::PolytopeGauge { vertices }, _) => argmax_pairing(vertices, omega).clone(),
            _ => unreachable!("derived data matches kind"),
        };
        Ok(Some(v))
    }

    /// A covector `ω` with `‖ω‖_* = 1` and `⟨ω, v⟩ = ‖v‖`; `None` for `v = 0`.
    pub fn norming_covector(&self, v: &[T]) -> Result<Option<Vec<T>>> {
        self.dual_spec().norming_vector(v)
    }

    /// Evaluates a polytope norm without the precomputed facets. Gauges solve
    /// `min Σλ  s.t.  Σ λ_i V_i = v, λ ≥ 0`; a polyhedral max-norm is already
    /// an explicit maximum and is returned directly.
    pub fn norm_by_lp(&self, v: &[T]) -> Result<T> {
        self.check_len(v)?;
        match &self.kind {
            NormKind::PolytopeGauge { vertices } => gauge_lp(vertices, v),
            NormKind::PolyhedralMax { functionals } => Ok(max_abs_pairing(functionals, v)),
            _ => Err(Error::Domain(format!("{} is not a polytope norm", self.label()))),
        }
    }

    /// Dual norm of a polytope norm without the precomputed facets.
    pub fn dual_norm_by_lp(&self, omega: &[T]) -> Result<T> {
        self.check_len(omega)?;
        match &self.kind {
            NormKind::PolyhedralMax { functionals } => gauge_lp(functionals, omega),
            NormKind::PolytopeGauge { vertices } => Ok(max_abs_pairing(vertices, omega)),
            _ => Err(Error::Domain(format!("{} is not a polytope norm", self.label()))),
        }
    }

    fn facets(&self) -> &[Vec<T>] {
        match &self.derived {
            Derived::Facets(f) => f,
            _ => &[],
        }
    }

    /// Candidate directions that tend to sit on faces or vertices of the unit
    /// sphere: coordinate axes, pairwise diagonals and polytope vertices.
    pub fn structured_directions(&self) -> Vec<Vec<T>> {
        let mut dirs = coordinate_directions(self.dimension);
        match &self.kind {
            NormKind::PolytopeGauge { vertices } => dirs.extend(vertices.iter().cloned()),
            NormKind::PolyhedralMax { .. } => dirs.extend(self.facets().iter().cloned()),
            _ => {}
        }
        dirs
    }

    #[cfg(debug_assertions)]
    fn debug_self_test(&self) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
        let n = self.dimension;
        for _ in 0..4 {
            let x: Vec<T> = (0..n).map(|_| T::lit(rng.random_range(-1.0..1.0))).collect();
            let y: Vec<T> = (0..n).map(|_| T::lit(rng.random_range(-1.0..1.0))).collect();
            let s: Vec<T> = x.iter().zip(&y).map(|(&a, &b)| a + b).collect();
            let (nx, ny, ns) = (self.norm(&x), self.norm(&y), self.norm(&s));
            let tol = T::lit(1e-6) * (nx + ny + T::one());
            debug_assert!(ns <= nx + ny + tol, "triangle inequality fails for {}", self.label());
            let neg: Vec<T> = x.iter().map(|&a| -a * T::lit(2.5)).collect();
            debug_assert!(
                (self.norm(&neg) - T::lit(2.5) * nx).abs() <= tol,
                "homogeneity fails for {}",
                self.label()
            );
        }
    }
}

impl<T: Scalar> fmt::Display for NormSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

fn relative_tol<T: Scalar>() -> T {
    T::lit(1e-10).max(T::epsilon() * T::lit(256.0))
}

fn check_matrix<T: Scalar>(m: &[Vec<T>], n: usize, name: &str) -> Result<()> {
    if m.len() != n || m.iter().any(|r| r.len() != n) {
        return Err(invalid("norm", format!("{name} must be {n}x{n}")));
    }
    if m.iter().flatten().any(|v| !v.is_finite()) {
        return Err(invalid("norm", format!("{name} has non-finite entries")));
    }
    Ok(())
}

/// Adds `-a` for every `a`, dropping zero and duplicate entries.
fn symmetrize<T: Scalar>(list: Vec<Vec<T>>, n: usize, what: &str) -> Result<Vec<Vec<T>>> {
    let mut out: Vec<Vec<T>> = Vec::with_capacity(2 * list.len());
    for a in list {
        if a.len() != n {
            return Err(invalid("norm", format!("{what} of length {} in dimension {n}", a.len())));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(invalid("norm", format!("non-finite {what}")));
        }
        if a.iter().all(|&v| v == T::zero()) {
            continue;
        }
        let neg: Vec<T> = a.iter().map(|&v| -v).collect();
        for cand in [a, neg] {
            if !out.contains(&cand) {
                out.push(cand);
            }
        }
    }
    Ok(out)
}

/// Facet normals of the symmetric polytope `conv(points)`, which must span
/// `ℝ^n` so that the origin is interior.
fn facets_of_hull<T: Scalar>(points: &[Vec<T>], n: usize) -> Result<Vec<Vec<T>>> {
    let m = points.len();
    let mut combos = 1f64;
    for k in 0..n {
        combos *= (m - k) as f64 / (k + 1) as f64;
    }
    if combos > 250_000.0 {
        return Err(invalid(
            "norm",
            format!("polytope with {m} vertices in dimension {n} is too large"),
        ));
    }
    let scale = points
        .iter()
        .flatten()
        .fold(T::zero(), |acc, v| acc.max(v.abs()));
    let tol = relative_tol::<T>();
    let mut facets: Vec<Vec<T>> = Vec::new();
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        let rows: Matrix<T> = idx.iter().map(|&i| points[i].clone()).collect();
        if let Some(f) = linalg::solve(&rows, &vec![T::one(); n], tol * scale) {
            let ok = points
                .iter()
                .all(|p| dot(&f, p) <= T::one() + T::lit(1e-9).max(tol));
            if ok {
                let fscale = f.iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
                let dup = facets.iter().any(|g| {
                    g.iter()
                        .zip(&f)
                        .all(|(&a, &b)| (a - b).abs() <= T::lit(1e-9) * fscale.max(T::one()))
                });
                if !dup {
                    facets.push(f);
                }
            }
        }
        // next combination
        let mut i = n;
        loop {
            if i == 0 {
                return if facets.is_empty() {
                    Err(Error::Internal("polytope has no facets".into()))
                } else {
                    Ok(facets)
                };
            }
            i -= 1;
            if idx[i] < m - n + i {
                idx[i] += 1;
                for j in i + 1..n {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

fn euclid<T: Scalar>(v: &[T]) -> T {
    dot(v, v).sqrt()
}

fn max_abs_pairing<T: Scalar>(list: &[Vec<T>], v: &[T]) -> T {
    list.iter()
        .fold(T::zero(), |acc, a| acc.max(dot(a, v).abs()))
}

fn max_pairing<T: Scalar>(list: &[Vec<T>], v: &[T]) -> T {
    list.iter().fold(T::zero(), |acc, a| acc.max(dot(a, v)))
}

fn argmax_pairing<'a, T: Scalar>(list: &'a [Vec<T>], v: &[T]) -> &'a Vec<T> {
    let mut best = &list[0];
    let mut best_val = dot(best, v);
    for a in &list[1..] {
        let val = dot(a, v);
        if val > best_val {
            best = a;
            best_val = val;
        }
    }
    best
}

/// `‖(d_i x_i)‖_r`, as [`lp_vec_norm`] on the scaled vector.
fn weighted_lp_norm<T: Scalar>(x: &[T], d: &[T], r: &Exponent<T>) -> T {
    let m = x.iter().zip(d).fold(T::zero(), |acc, (&v, &w)| acc.max((v * w).abs()));
    match r.value() {
        None => m,
        Some(r) if r == T::one() => x.iter().zip(d).map(|(&v, &w)| (v * w).abs()).sum(),
        Some(_) if m == T::zero() => T::zero(),
        Some(r) => {
            let s: T = x.iter().zip(d).map(|(&v, &w)| pow((v * w).abs() / m, r)).sum();
            m * pow(s, r.recip())
        }
    }
}

/// `‖x‖_r` computed with max-scaling.
pub(crate) fn lp_vec_norm<T: Scalar>(x: &[T], r: &Exponent<T>) -> T {
    let m = x.iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
    match r.value() {
        None => m,
        Some(r) if r == T::one() => x.iter().map(|v| v.abs()).sum(),
        Some(_) if m == T::zero() => T::zero(),
        Some(r) => {
            let s: T = x.iter().map(|v| pow(v.abs() / m, r)).sum();
            m * pow(s, r.recip())
        }
    }
}

/// Unit vector of `ℓ^r` attaining `⟨η, u⟩ = ‖η‖_{r'}`.
fn holder_maximizer<T: Scalar>(eta: &[T], r: &Exponent<T>) -> Vec<T> {
    let n = eta.len();
    match r.value() {
        Some(rv) if rv == T::one() => {
            let k = (0..n)
                .fold(0, |best, i| if eta[i].abs() > eta[best].abs() { i } else { best });
            let mut u = vec![T::zero(); n];
            u[k] = eta[k].signum();
            u
        }
        None => eta
            .iter()
            .map(|&e| if e == T::zero() { T::zero() } else { e.signum() })
            .collect(),
        Some(_) => {
            let q = r.conjugate().as_scalar();
            let m = eta.iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
            let u: Vec<T> = eta
                .iter()
                .map(|&e| e.signum() * (e.abs() / m).powf(q - T::one()))
                .collect();
            let nu = lp_vec_norm(&u, r);
            u.into_iter().map(|c| c / nu).collect()
        }
    }
}

/// `±e_i` and `e_i ± e_j` for `i < j`.
pub fn coordinate_directions<T: Scalar>(n: usize) -> Vec<Vec<T>> {
    let unit = |i: usize, s: T| {
        let mut e = vec![T::zero(); n];
        e[i] = s;
        e
    };
    let mut out = Vec::new();
    for i in 0..n {
        out.push(unit(i, T::one()));
        out.push(unit(i, -T::one()));
    }
    for i in 0..n {
        for j in i + 1..n {
            for s in [T::one(), -T::one()] {
                let mut e = unit(i, T::one());
                e[j] = s;
                out.push(e.clone());
                out.push(e.into_iter().map(|c| -c).collect());
            }
        }
    }
    out
}

/// `min Σλ` subject to `Σ λ_i p_i = v`, `λ ≥ 0`.
fn gauge_lp<T: Scalar>(points: &[Vec<T>], v: &[T]) -> Result<T> {
    let n = v.len();
    let a: Matrix<T> = (0..n)
        .map(|r| points.iter().map(|p| p[r]).collect())
        .collect();
    let c = vec![T::one(); points.len()];
    simplex::minimize(&c, &a, v).map(|s| s.objective)
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "T: Scalar")]
enum RawNorm<T: Scalar> {
    InnerProduct {
        dimension: Option<usize>,
        gram: Vec<Vec<T>>,
    },
    WeightedLp {
        dimension: Option<usize>,
        exponent: Exponent<T>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<T>>,
    },
    PolyhedralMax {
        dimension: Option<usize>,
        functionals: Vec<Vec<T>>,
    },
    PolytopeGauge {
        dimension: Option<usize>,
        vertices: Vec<Vec<T>>,
    },
}

impl<T: Scalar> TryFrom<RawNorm<T>> for NormSpec<T> {
    type Error = Error;

    fn try_from(raw: RawNorm<T>) -> Result<Self> {
        let need = |d: Option<usize>| d.ok_or_else(|| invalid("norm", "fiber dimension required"));
        match raw {
            RawNorm::InnerProduct { dimension, gram } => {
                NormSpec::new(need(dimension)?, NormKind::InnerProduct { gram })
            }
            RawNorm::WeightedLp {
                dimension,
                exponent,
                weights,
            } => {
                let d = need(dimension)?;
                let weights = weights.unwrap_or_else(|| vec![T::one(); d]);
                NormSpec::new(d, NormKind::WeightedLp { exponent, weights })
            }
            RawNorm::PolyhedralMax {
                dimension,
                functionals,
            } => NormSpec::new(need(dimension)?, NormKind::PolyhedralMax { functionals }),
            RawNorm::PolytopeGauge {
                dimension,
                vertices,
            } => NormSpec::new(need(dimension)?, NormKind::PolytopeGauge { vertices }),
        }
    }
}

impl<T: Scalar> From<NormSpec<T>> for RawNorm<T> {
    fn from(spec: NormSpec<T>) -> Self {
        let dimension = Some(spec.dimension);
        match spec.kind {
            NormKind::InnerProduct { gram } => RawNorm::InnerProduct { dimension, gram },
            NormKind::WeightedLp { exponent, weights } => RawNorm::WeightedLp {
                dimension,
                exponent,
                weights: Some(weights),
            },
            NormKind::PolyhedralMax { functionals } => RawNorm::PolyhedralMax {
                dimension,
                functionals,
            },
            NormKind::PolytopeGauge { vertices } => RawNorm::PolytopeGauge {
                dimension,
                vertices,
            },
        }
    }
}

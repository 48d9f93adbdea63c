//! Derivative-free search over pairs of unit vectors: the modulus of
//! convexity, the parallelogram defect and sphere sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::spec::{coordinate_directions, NormSpec};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Anything that can evaluate a norm on `ℝ^dim`. Fiber norms implement it,
/// and so do section-space norms on flattened sections.
pub trait NormEvaluator<T: Scalar>: Sync {
    fn dim(&self) -> usize;

    /// `‖v‖` for `v.len() == dim()`.
    fn norm(&self, v: &[T]) -> T;

    /// Directions worth trying as starting points; they need not be unit.
    fn structured_directions(&self) -> Vec<Vec<T>> {
        coordinate_directions(self.dim())
    }
}

impl<T: Scalar> NormEvaluator<T> for NormSpec<T> {
    fn dim(&self) -> usize {
        self.dimension()
    }

    fn norm(&self, v: &[T]) -> T {
        NormSpec::norm(self, v)
    }

    fn structured_directions(&self) -> Vec<Vec<T>> {
        NormSpec::structured_directions(self)
    }
}

/// Effort settings for the multi-start search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerBudget {
    pub restarts: usize,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for OptimizerBudget {
    fn default() -> Self {
        OptimizerBudget {
            restarts: 64,
            iterations: 200,
            seed: 0,
        }
    }
}

impl OptimizerBudget {
    pub fn with_seed(self, seed: u64) -> Self {
        OptimizerBudget { seed, ..self }
    }
}

/// Mixes a seed with a tag so that independent streams do not overlap.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    // splitmix64 finaliser
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn gaussian<T: Scalar>(n: usize, rng: &mut impl Rng) -> Vec<T> {
    (0..n)
        .map(|_| T::lit(rng.sample::<f64, _>(StandardNormal)))
        .collect()
}

fn normalize<T: Scalar, E: NormEvaluator<T> + ?Sized>(e: &E, v: &[T]) -> Option<Vec<T>> {
    let n = e.norm(v);
    if n > T::zero() && n.is_finite() {
        Some(v.iter().map(|&x| x / n).collect())
    } else {
        None
    }
}

fn random_unit<T: Scalar, E: NormEvaluator<T> + ?Sized>(e: &E, rng: &mut impl Rng) -> Vec<T> {
    loop {
        if let Some(u) = normalize(e, &gaussian(e.dim(), rng)) {
            return u;
        }
    }
}

/// `count` deterministic pseudo-random unit vectors.
pub fn sphere_sample<T: Scalar, E: NormEvaluator<T> + ?Sized>(
    e: &E,
    count: usize,
    seed: u64,
) -> Vec<Vec<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_unit(e, &mut rng)).collect()
}

fn diff_norm<T: Scalar, E: NormEvaluator<T> + ?Sized>(e: &E, v: &[T], w: &[T]) -> T {
    let d: Vec<T> = v.iter().zip(w).map(|(&a, &b)| a - b).collect();
    e.norm(&d)
}

fn gap<T: Scalar, E: NormEvaluator<T> + ?Sized>(e: &E, v: &[T], w: &[T]) -> T {
    let s: Vec<T> = v.iter().zip(w).map(|(&a, &b)| (a + b) * T::lit(0.5)).collect();
    T::one() - e.norm(&s)
}

/// `‖v - w‖ ≥ ε` up to a few ulps. At `ε = 2` the constraint only holds on a
/// boundary set, and a pair that meets it exactly can lose that much when
/// rescaled. Near `ε = 2` the modulus can be as steep as a root, so the
/// slack must stay at rounding level.
fn feasible<T: Scalar>(dist: T, eps: T) -> bool {
    dist >= eps * (T::one() - T::lit(8.0) * T::epsilon())
}

/// Moves the unit vector `w` away from `v` along `normalize((1-s) w - s v)`
/// until `‖v - w‖ ≥ ε`. Returns `w` unchanged when already feasible.
fn repair<T: Scalar, E: NormEvaluator<T> + ?Sized>(e: &E, v: &[T], w: Vec<T>, eps: T) -> Vec<T> {
    let f0 = diff_norm(e, v, &w) - eps;
    if feasible(f0 + eps, eps) {
        return w;
    }
    let antipode: Vec<T> = v.iter().map(|&x| -x).collect();
    if diff_norm(e, v, &w) <= T::lit(1e-12) {
        return antipode;
    }
    let at = |s: T| -> Option<Vec<T>> {
        let mix: Vec<T> = w
            .iter()
            .zip(v)
            .map(|(&b, &a)| (T::one() - s) * b - s * a)
            .collect();
        normalize(e, &mix)
    };
    let (mut lo, mut flo) = (T::zero(), f0);
    let (mut hi, mut fhi) = (T::one(), T::lit(2.0) - eps);
    let mut hi_point = antipode;
    let mut side = 0i8;
    for _ in 0..80 {
        if hi - lo <= T::lit(1e-15) {
            break;
        }
        // Illinois variant of regula falsi, with bisection as a fallback.
        let mut s = lo - flo * (hi - lo) / (fhi - flo);
        if !(s > lo && s < hi) {
            s = (lo + hi) * T::lit(0.5);
        }
        let Some(p) = at(s) else {
            // the combination vanished; only possible at s = 1/2 with w = v
            lo = s;
            continue;
        };
        let fs = diff_norm(e, v, &p) - eps;
        if fs >= T::zero() {
            hi = s;
            fhi = fs;
            hi_point = p;
            if side == 1 {
                flo *= T::lit(0.5);
            }
            side = 1;
            if fs == T::zero() {
                break;
            }
        } else {
            lo = s;
            flo = fs;
            if side == -1 {
                fhi *= T::lit(0.5);
            }
            side = -1;
        }
    }
    hi_point
}

/// Result of one modulus-of-convexity search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ModulusEstimate<T> {
    pub epsilon: T,
    /// Best gap `1 - ‖(v + w)/2‖` found; an upper bound on `δ(ε)`.
    pub delta: T,
    pub witness: (Vec<T>, Vec<T>),
}

type Pair<T> = (Vec<T>, Vec<T>);

/// Shared pattern-search driver on `ℝ^{2n}`. `project` maps a raw point to a
/// feasible pair plus a penalty; `value` is the quantity to minimise.
struct Search<'a, T, P, V> {
    n: usize,
    project: &'a P,
    value: &'a V,
    iterations: usize,
    _t: std::marker::PhantomData<T>,
}

impl<T, P, V> Search<'_, T, P, V>
where
    T: Scalar,
    P: Fn(&[T]) -> Option<(Pair<T>, T)>,
    V: Fn(&Pair<T>) -> T,
{
    fn run(&self, start: &[T], seed: u64) -> Option<(T, Pair<T>)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (pair, pen) = (self.project)(start)?;
        let mut cur_val = (self.value)(&pair);
        let mut cur_score = cur_val + pen;
        let mut z: Vec<T> = pair.0.iter().chain(&pair.1).copied().collect();
        let mut best = (cur_val, pair);
        let mut h = T::lit(0.25);
        let mut trial = z.clone();
        let dim = 2 * self.n;
        let mut random_dirs = vec![vec![T::zero(); dim]; 2];
        for _ in 0..self.iterations {
            let mut improved = false;
            for d in &mut random_dirs {
                let g = gaussian::<T>(dim, &mut rng);
                let len = g.iter().map(|&x| x * x).sum::<T>().sqrt();
                for (di, gi) in d.iter_mut().zip(g) {
                    *di = gi / len;
                }
            }
            // coordinate moves first, then the two random directions
            'moves: for m in 0..dim + 2 {
                for sign in [T::one(), -T::one()] {
                    let step = sign * h;
                    if m < dim {
                        trial.copy_from_slice(&z);
                        trial[m] += step;
                    } else {
                        for (t, (&zi, &di)) in trial.iter_mut().zip(z.iter().zip(&random_dirs[m - dim])) {
                            *t = zi + step * di;
                        }
                    }
                    let Some((p, pen)) = (self.project)(&trial) else {
                        continue;
                    };
                    let val = (self.value)(&p);
                    let accept = val + pen < cur_score;
                    if val < best.0 {
                        best = (val, p.clone());
                    }
                    if accept {
                        cur_score = val + pen;
                        cur_val = val;
                        z.clear();
                        z.extend(p.0.iter().chain(&p.1));
                        improved = true;
                        break 'moves;
                    }
                }
            }
            if !improved {
                h *= T::lit(0.5);
                if h < T::lit(1e-10) {
                    break;
                }
            }
        }
        let _ = cur_val;
        Some(best)
    }
}

fn run_starts<T, P, V>(
    n: usize,
    starts: Vec<Vec<T>>,
    project: &P,
    value: &V,
    budget: &OptimizerBudget,
    stream: u64,
) -> Option<(T, Pair<T>)>
where
    T: Scalar,
    P: Fn(&[T]) -> Option<(Pair<T>, T)> + Sync,
    V: Fn(&Pair<T>) -> T + Sync,
{
    let search = Search {
        n,
        project,
        value,
        iterations: budget.iterations,
        _t: std::marker::PhantomData,
    };
    let results: Vec<Option<(T, Pair<T>)>> = starts
        .par_iter()
        .enumerate()
        .map(|(i, s)| search.run(s, derive_seed(budget.seed ^ stream, i as u64)))
        .collect();
    // first minimum in start order, independent of scheduling
    results.into_iter().flatten().fold(None, |acc, cur| match acc {
        Some(ref a) if !(cur.0 < a.0) => acc,
        _ => Some(cur),
    })
}

fn concat<T: Scalar>(v: &[T], w: &[T]) -> Vec<T> {
    v.iter().chain(w).copied().collect()
}

/// Normalised structured directions, subsampled deterministically when there
/// are many of them. Small budgets keep fewer, since every ordered pair is
/// scored.
fn structured_units<T: Scalar, E: NormEvaluator<T> + ?Sized>(
    e: &E,
    budget: &OptimizerBudget,
    rng: &mut impl Rng,
) -> Vec<Vec<T>> {
    let cap = (2 * budget.restarts).clamp(8, 48);
    let mut dirs: Vec<Vec<T>> = e
        .structured_directions()
        .iter()
        .filter_map(|d| normalize(e, d))
        .collect();
    while dirs.len() > cap {
        let k = rng.random_range(0..dirs.len());
        dirs.swap_remove(k);
    }
    dirs
}

/// Estimates `δ(ε) = inf {1 - ‖(v+w)/2‖ : ‖v‖ = ‖w‖ = 1, ‖v - w‖ ≥ ε}`.
pub fn modulus_of_convexity<T: Scalar, E: NormEvaluator<T> + ?Sized>(
    e: &E,
    eps: T,
    budget: &OptimizerBudget,
) -> Result<ModulusEstimate<T>> {
    modulus_of_convexity_from(e, eps, budget, &[])
}

/// As [`modulus_of_convexity`], with caller-supplied starting pairs added to
/// the generated ones.
pub fn modulus_of_convexity_from<T: Scalar, E: NormEvaluator<T> + ?Sized>(
    e: &E,
    eps: T,
    budget: &OptimizerBudget,
    extra_starts: &[(Vec<T>, Vec<T>)],
) -> Result<ModulusEstimate<T>> {
    if !(eps > T::zero() && eps <= T::lit(2.0)) {
        return Err(Error::Domain(format!("epsilon must lie in (0,2], got {eps}")));
    }
    let n = e.dim();
    if n == 0 {
        return Err(Error::Domain("modulus of a zero-dimensional space".into()));
    }
    if n == 1 {
        let u = normalize(e, &[T::one()]).expect("nonzero");
        let w = vec![-u[0]];
        return Ok(ModulusEstimate {
            epsilon: eps,
            delta: T::one(),
            witness: (u, w),
        });
    }
    let mu = T::lit(1e-2);
    let project = |z: &[T]| -> Option<(Pair<T>, T)> {
        let v = normalize(e, &z[..n])?;
        let w = normalize(e, &z[n..])?;
        let dist = diff_norm(e, &v, &w);
        let viol = if feasible(dist, eps) { T::zero() } else { eps - dist };
        let w = repair(e, &v, w, eps);
        Some(((v, w), mu * viol))
    };
    let value = |p: &Pair<T>| gap(e, &p.0, &p.1);

    let stream = eps.as_f64().to_bits();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(budget.seed, stream));
    let mut starts: Vec<Vec<T>> = extra_starts.iter().map(|(v, w)| concat(v, w)).collect();

    let dirs = structured_units(e, budget, &mut rng);
    let mut scored: Vec<(T, usize, usize)> = Vec::new();
    for (i, a) in dirs.iter().enumerate() {
        for (j, b) in dirs.iter().enumerate() {
            if i != j {
                let w = repair(e, a, b.clone(), eps);
                scored.push((gap(e, a, &w), i, j));
            }
        }
    }
    scored.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(std::cmp::Ordering::Equal));
    let structured = budget.restarts.div_ceil(2).min(scored.len());
    for &(_, i, j) in &scored[..structured] {
        starts.push(concat(&dirs[i], &dirs[j]));
    }
    while starts.len() < budget.restarts.max(1) + extra_starts.len() {
        let v = random_unit(e, &mut rng);
        let u = gaussian::<T>(n, &mut rng);
        let w: Vec<T> = v.iter().zip(&u).map(|(&a, &b)| a + eps * b).collect();
        starts.push(concat(&v, &w));
    }

    let (delta, witness) = run_starts(n, starts, &project, &value, budget, stream)
        .ok_or_else(|| Error::Internal("modulus search produced no feasible pair".into()))?;
    Ok(ModulusEstimate {
        epsilon: eps,
        delta: delta.max(T::zero()).min(T::one()),
        witness,
    })
}

/// `{0.1, 0.2, …, 2.0}`.
pub fn default_grid<T: Scalar>() -> Vec<T> {
    (1..=20).map(|k| T::lit(k as f64 / 10.0)).collect()
}

/// Modulus estimates over an increasing ε grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ModulusCurve<T> {
    pub label: String,
    pub epsilons: Vec<T>,
    /// Non-decreasing estimates after the isotonic clamp.
    pub deltas: Vec<T>,
    /// Estimates as returned by the optimizer.
    pub raw_deltas: Vec<T>,
    /// Pair attaining `deltas[i]`; feasible for `epsilons[i]` up to rounding.
    pub witnesses: Vec<(Vec<T>, Vec<T>)>,
    pub budget: OptimizerBudget,
}

impl<T: Scalar> ModulusCurve<T> {
    /// Assembles a curve from per-ε estimates. Since `δ` is non-decreasing,
    /// an estimate at a larger ε is also an upper bound at every smaller ε,
    /// so the clamp takes suffix minima and carries the witness along.
    pub fn from_estimates(
        label: impl Into<String>,
        estimates: Vec<ModulusEstimate<T>>,
        budget: OptimizerBudget,
    ) -> Self {
        let epsilons: Vec<T> = estimates.iter().map(|m| m.epsilon).collect();
        let raw_deltas: Vec<T> = estimates.iter().map(|m| m.delta).collect();
        let mut deltas = raw_deltas.clone();
        let mut witnesses: Vec<(Vec<T>, Vec<T>)> =
            estimates.into_iter().map(|m| m.witness).collect();
        for i in (0..deltas.len().saturating_sub(1)).rev() {
            if deltas[i + 1] < deltas[i] {
                deltas[i] = deltas[i + 1];
                witnesses[i] = witnesses[i + 1].clone();
            }
        }
        ModulusCurve {
            label: label.into(),
            epsilons,
            deltas,
            raw_deltas,
            witnesses,
            budget,
        }
    }

    pub fn len(&self) -> usize {
        self.epsilons.len()
    }

    pub fn is_empty(&self) -> bool {
        self.epsilons.is_empty()
    }
}

fn check_grid<T: Scalar>(grid: &[T]) -> Result<()> {
    for w in grid.windows(2) {
        if !(w[0] < w[1]) {
            return Err(Error::Domain("epsilon grid must be strictly increasing".into()));
        }
    }
    Ok(())
}

/// Runs [`modulus_of_convexity`] at every grid point.
pub fn modulus_curve<T: Scalar, E: NormEvaluator<T> + ?Sized>(
    e: &E,
    label: impl Into<String>,
    grid: &[T],
    budget: &OptimizerBudget,
) -> Result<ModulusCurve<T>> {
    check_grid(grid)?;
    let estimates = grid
        .iter()
        .map(|&eps| modulus_of_convexity(e, eps, budget))
        .collect::<Result<Vec<_>>>()?;
    Ok(ModulusCurve::from_estimates(label, estimates, *budget))
}

/// Lower estimate of `sup |‖v+w‖² + ‖v−w‖² − 4|` over unit pairs, with the
/// maximising pair.
pub fn parallelogram_defect<T: Scalar, E: NormEvaluator<T> + ?Sized>(
    e: &E,
    budget: &OptimizerBudget,
) -> (T, (Vec<T>, Vec<T>)) {
    let n = e.dim();
    if n == 0 {
        return (T::zero(), (Vec::new(), Vec::new()));
    }
    let defect = |v: &[T], w: &[T]| -> T {
        let s: Vec<T> = v.iter().zip(w).map(|(&a, &b)| a + b).collect();
        let d: Vec<T> = v.iter().zip(w).map(|(&a, &b)| a - b).collect();
        let (ns, nd) = (e.norm(&s), e.norm(&d));
        (ns * ns + nd * nd - T::lit(4.0)).abs()
    };
    let project = |z: &[T]| -> Option<(Pair<T>, T)> {
        Some(((normalize(e, &z[..n])?, normalize(e, &z[n..])?), T::zero()))
    };
    let value = |p: &Pair<T>| -defect(&p.0, &p.1);

    let stream = 0x9a7a_11e1;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(budget.seed, stream));
    let dirs = structured_units(e, budget, &mut rng);
    let mut scored: Vec<(T, usize, usize)> = Vec::new();
    for (i, a) in dirs.iter().enumerate() {
        for (j, b) in dirs.iter().enumerate().skip(i + 1) {
            scored.push((-defect(a, b), i, j));
        }
    }
    scored.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut starts: Vec<Vec<T>> = scored
        .iter()
        .take(budget.restarts.div_ceil(2))
        .map(|&(_, i, j)| concat(&dirs[i], &dirs[j]))
        .collect();
    while starts.len() < budget.restarts.max(1) {
        let v = random_unit(e, &mut rng);
        let w = random_unit(e, &mut rng);
        starts.push(concat(&v, &w));
    }
    match run_starts(n, starts, &project, &value, budget, stream) {
        Some((val, pair)) => (-val, pair),
        None => (T::zero(), (Vec::new(), Vec::new())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::Exponent;

    fn hilbert(eps: f64) -> f64 {
        1.0 - (1.0 - eps * eps / 4.0).sqrt()
    }

    #[test]
    fn euclidean_modulus_matches_closed_form() {
        let spec = NormSpec::<f64>::euclidean(2);
        let curve = modulus_curve(&spec, "e2", &default_grid(), &OptimizerBudget::default()).unwrap();
        for (e, d) in curve.epsilons.iter().zip(&curve.deltas) {
            assert!((d - hilbert(*e)).abs() < 1e-3, "eps {e}: {d} vs {}", hilbert(*e));
        }
        for ((v, w), e) in curve.witnesses.iter().zip(&curve.epsilons) {
            assert!((spec.norm(v) - 1.0).abs() < 1e-9);
            assert!((spec.norm(w) - 1.0).abs() < 1e-9);
            assert!(diff_norm(&spec, v, w) >= e - 1e-9);
        }
    }

    #[test]
    fn flat_norms_have_zero_modulus() {
        let l1 = NormSpec::<f64>::lp(Exponent::one(), 2);
        let linf = NormSpec::<f64>::lp(Exponent::Infinity, 2);
        for spec in [l1, linf] {
            for eps in default_grid::<f64>() {
                let m = modulus_of_convexity(&spec, eps, &OptimizerBudget::default()).unwrap();
                assert!(m.delta <= 1e-9, "{} eps {eps}: {}", spec.label(), m.delta);
            }
        }
    }

    #[test]
    fn dimension_one_convention() {
        let spec = NormSpec::<f64>::lp(Exponent::one(), 1);
        let m = modulus_of_convexity(&spec, 0.5, &OptimizerBudget::default()).unwrap();
        assert_eq!(m.delta, 1.0);
        assert!(modulus_of_convexity(&spec, 2.5, &OptimizerBudget::default()).is_err());
        assert!(modulus_of_convexity(&spec, 0.0, &OptimizerBudget::default()).is_err());
    }

    #[test]
    fn antipodal_epsilon() {
        let spec = NormSpec::<f64>::euclidean(2);
        let m = modulus_of_convexity(&spec, 2.0, &OptimizerBudget::default()).unwrap();
        assert!((m.delta - 1.0).abs() < 1e-3);
    }

    #[test]
    fn parallelogram_defects() {
        let b = OptimizerBudget::default();
        let g = NormSpec::inner_product(vec![vec![2.0, 0.3], vec![0.3, 1.0]]).unwrap();
        assert!(parallelogram_defect(&g, &b).0 <= 1e-9);
        let l1 = NormSpec::<f64>::lp(Exponent::one(), 2);
        assert!(parallelogram_defect(&l1, &b).0 >= 4.0 - 1e-9);
        let linf = NormSpec::polyhedral_max(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(parallelogram_defect(&linf, &b).0 >= 4.0 - 1e-9);
    }

    #[test]
    fn sphere_sample_is_deterministic_and_covers_the_circle() {
        let spec = NormSpec::<f64>::euclidean(2);
        let a = sphere_sample(&spec, 1000, 7);
        assert_eq!(a, sphere_sample(&spec, 1000, 7));
        let mut angles: Vec<f64> = a.iter().map(|v| v[1].atan2(v[0]).to_degrees()).collect();
        angles.sort_by(f64::total_cmp);
        let mut gap = 360.0 - (angles[angles.len() - 1] - angles[0]);
        for w in angles.windows(2) {
            gap = f64::max(gap, w[1] - w[0]);
        }
        assert!(gap < 5.0, "{gap}");
        assert!(a.iter().all(|v| (spec.norm(v) - 1.0).abs() < 1e-12));
    }

    #[test]
    fn clamp_keeps_raw_values() {
        let est = |e: f64, d: f64| ModulusEstimate {
            epsilon: e,
            delta: d,
            witness: (vec![e], vec![d]),
        };
        let c = ModulusCurve::from_estimates(
            "x",
            vec![est(0.1, 0.3), est(0.2, 0.1), est(0.3, 0.2)],
            OptimizerBudget::default(),
        );
        assert_eq!(c.deltas, vec![0.1, 0.1, 0.2]);
        assert_eq!(c.raw_deltas, vec![0.3, 0.1, 0.2]);
        assert_eq!(c.witnesses[0], (vec![0.2], vec![0.1]));
    }
}

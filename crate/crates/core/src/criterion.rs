//! Deciding whether a norm on sections comes from an `L^p` pointwise norm,
//! and recovering that pointwise norm.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bundle::{same_bundle, Bundle, Section};
use crate::error::{invalid, Error, Result};
use crate::exponent::Exponent;
use crate::measure::{AtomSubset, MeasureSpace, ScalarField};
use crate::sample::random_section;
use crate::scalar::Scalar;

/// Largest atom count for which every subset is enumerated in condition 2a.
pub const FULL_ENUMERATION_ATOMS: usize = 16;
/// Number of sampled subsets beyond that.
pub const SAMPLED_SUBSETS: usize = 1 << 12;
/// Largest atom count accepted by [`check_rn_inequality`].
pub const RN_MAX_ATOMS: usize = 20;

/// Catalogue of norms on sections, selectable from configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "T: Scalar")]
pub enum ModuleNormSpec<T: Scalar> {
    /// `‖v‖_{Γ_p}`.
    Induced { p: Exponent<T> },
    /// `max_x |v|(x)`.
    SupOverAtoms,
    /// `‖v‖_{Γ_p} + ‖v‖_{Γ_p′}`.
    Mixed { p: Exponent<T>, p_prime: Exponent<T> },
    /// `max(‖v‖_{Γ_p}, ‖v‖_{Γ_p′})`.
    Max { p: Exponent<T>, p_prime: Exponent<T> },
    /// `Σ c_i ‖v‖_{Γ_{p_i}}` or `max_i c_i ‖v‖_{Γ_{p_i}}` with `c_i > 0`.
    Composed { combine: Combine, terms: Vec<Term<T>> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Combine {
    Sum,
    Max,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Term<T: Scalar> {
    pub weight: T,
    pub p: Exponent<T>,
}

impl<T: Scalar> ModuleNormSpec<T> {
    fn eval(&self, v: &Section<T>) -> T {
        let abs = v.pointwise_norm();
        match self {
            ModuleNormSpec::Induced { p } => abs.lp_norm(p),
            ModuleNormSpec::SupOverAtoms => abs.lp_norm(&Exponent::Infinity),
            ModuleNormSpec::Mixed { p, p_prime } => abs.lp_norm(p) + abs.lp_norm(p_prime),
            ModuleNormSpec::Max { p, p_prime } => abs.lp_norm(p).max(abs.lp_norm(p_prime)),
            ModuleNormSpec::Composed { combine, terms } => {
                let vals = terms.iter().map(|t| t.weight * abs.lp_norm(&t.p));
                match combine {
                    Combine::Sum => vals.sum(),
                    Combine::Max => vals.fold(T::zero(), T::max),
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if let ModuleNormSpec::Composed { terms, .. } = self {
            if terms.is_empty() {
                return Err(invalid("module norm", "composed norm without terms"));
            }
            if terms.iter().any(|t| !(t.weight > T::zero()) || !t.weight.is_finite()) {
                return Err(invalid("module norm", "term weights must be positive"));
            }
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        match self {
            ModuleNormSpec::Induced { p } => format!("induced(p={p})"),
            ModuleNormSpec::SupOverAtoms => "sup_over_atoms".into(),
            ModuleNormSpec::Mixed { p, p_prime } => format!("mixed(p={p},p'={p_prime})"),
            ModuleNormSpec::Max { p, p_prime } => format!("max(p={p},p'={p_prime})"),
            ModuleNormSpec::Composed { combine, terms } => {
                let parts: Vec<String> = terms.iter().map(|t| format!("{}*G{}", t.weight, t.p)).collect();
                format!("{}({})", if *combine == Combine::Sum { "sum" } else { "max" }, parts.join(","))
            }
        }
    }
}

type NormFn<T> = Arc<dyn Fn(&Section<T>) -> T + Send + Sync>;

#[derive(Clone)]
enum Eval<T: Scalar> {
    Catalogue(ModuleNormSpec<T>),
    Function(NormFn<T>),
}

/// A black-box norm on the sections of a bundle.
#[derive(Clone)]
pub struct AbstractModuleNorm<T: Scalar> {
    bundle: Arc<Bundle<T>>,
    label: String,
    eval: Eval<T>,
}

impl<T: Scalar> fmt::Debug for AbstractModuleNorm<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AbstractModuleNorm").field("label", &self.label).finish()
    }
}

impl<T: Scalar> AbstractModuleNorm<T> {
    /// A catalogue norm, validated as a norm on random probes.
    pub fn from_spec(bundle: Arc<Bundle<T>>, spec: ModuleNormSpec<T>, seed: u64) -> Result<Self> {
        spec.validate()?;
        let norm = AbstractModuleNorm {
            bundle,
            label: spec.label(),
            eval: Eval::Catalogue(spec),
        };
        norm.validate(seed)?;
        Ok(norm)
    }

    /// A user-supplied norm. The function must be pure.
    pub fn from_fn(
        bundle: Arc<Bundle<T>>,
        label: impl Into<String>,
        f: impl Fn(&Section<T>) -> T + Send + Sync + 'static,
        seed: u64,
    ) -> Result<Self> {
        let norm = AbstractModuleNorm {
            bundle,
            label: label.into(),
            eval: Eval::Function(Arc::new(f)),
        };
        norm.validate(seed)?;
        Ok(norm)
    }

    pub fn induced(bundle: Arc<Bundle<T>>, p: Exponent<T>) -> Self {
        let spec = ModuleNormSpec::Induced { p };
        AbstractModuleNorm {
            bundle,
            label: spec.label(),
            eval: Eval::Catalogue(spec),
        }
    }

    pub fn bundle(&self) -> &Arc<Bundle<T>> {
        &self.bundle
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn norm(&self, v: &Section<T>) -> Result<T> {
        if !same_bundle(&self.bundle, v.bundle()) {
            return Err(Error::Structural("section of a different bundle".into()));
        }
        Ok(self.eval_unchecked(v))
    }

    fn eval_unchecked(&self, v: &Section<T>) -> T {
        match &self.eval {
            Eval::Catalogue(spec) => spec.eval(v),
            Eval::Function(f) => f(v),
        }
    }

    /// Homogeneity and the triangle inequality on random probes, to 1e-9.
    fn validate(&self, seed: u64) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tol = T::lit(1e-9);
        for _ in 0..16 {
            let v = random_section(&self.bundle, &mut rng);
            let w = random_section(&self.bundle, &mut rng);
            let c = T::lit(rng.random_range(-3.0..3.0));
            let (nv, nw) = (self.eval_unchecked(&v), self.eval_unchecked(&w));
            let scale = T::one() + nv + nw;
            if !(nv >= T::zero()) || !nv.is_finite() {
                return Err(invalid("module norm", format!("{}: negative or non-finite value", self.label)));
            }
            if (self.eval_unchecked(&v.scale(c)) - c.abs() * nv).abs() > tol * scale * (T::one() + c.abs()) {
                return Err(invalid("module norm", format!("{}: not absolutely homogeneous", self.label)));
            }
            let s = v.add(&w).expect("same bundle");
            if self.eval_unchecked(&s) > nv + nw + tol * scale {
                return Err(invalid("module norm", format!("{}: triangle inequality fails", self.label)));
            }
        }
        Ok(())
    }
}

/// Renders a subset as a string of `0`/`1` in atom order.
pub fn mask_string(subset: &AtomSubset) -> String {
    (0..subset.universe_size())
        .map(|x| if subset.contains(x) { '1' } else { '0' })
        .collect()
}

fn subsets_to_check(n: usize, seed: u64) -> Vec<AtomSubset> {
    if n <= FULL_ENUMERATION_ATOMS {
        (0..1u64 << n).map(|m| AtomSubset::from_mask(n, m)).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..SAMPLED_SUBSETS)
            .map(|_| AtomSubset::from_members((0..n).map(|_| rng.random_bool(0.5)).collect()))
            .collect()
    }
}

/// Worst subset for one probe.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct SubsetResidual<T> {
    pub probe: usize,
    pub subset: String,
    pub residual: T,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct Condition2aReport<T> {
    pub norm: String,
    pub p: String,
    pub subsets_per_probe: usize,
    pub exhaustive: bool,
    /// One row per probe: its worst subset.
    pub rows: Vec<SubsetResidual<T>>,
    pub max_residual: T,
    pub pass: bool,
    /// Probe index and subset attaining the maximum, when the check fails.
    pub witness: Option<SubsetResidual<T>>,
}

pub const CONDITION_2A_TOL: f64 = 1e-9;

/// `max |‖1_E v‖^p + ‖1_{X∖E} v‖^p − ‖v‖^p|` over probes and subsets.
pub fn check_condition_2a<T: Scalar>(
    norm: &AbstractModuleNorm<T>,
    p: &Exponent<T>,
    probes: &[Section<T>],
    seed: u64,
) -> Result<Condition2aReport<T>> {
    let pv = p
        .value()
        .ok_or_else(|| Error::Domain("condition 2a is stated for finite p".into()))?;
    if probes.is_empty() {
        return Err(Error::Domain("condition 2a needs at least one probe".into()));
    }
    for v in probes {
        norm.norm(v)?;
    }
    let n = norm.bundle().len();
    let subsets = subsets_to_check(n, seed);
    let rows: Vec<SubsetResidual<T>> = probes
        .par_iter()
        .enumerate()
        .map(|(i, v)| {
            let total = norm.eval_unchecked(v).powf(pv);
            let mut worst = (T::zero(), 0usize);
            for (k, e) in subsets.iter().enumerate() {
                let a = norm.eval_unchecked(&v.restrict(e)).powf(pv);
                let b = norm.eval_unchecked(&v.restrict(&e.complement())).powf(pv);
                let r = (a + b - total).abs();
                if r > worst.0 {
                    worst = (r, k);
                }
            }
            SubsetResidual {
                probe: i,
                subset: mask_string(&subsets[worst.1]),
                residual: worst.0,
            }
        })
        .collect();
    let worst = rows
        .iter()
        .fold(None::<&SubsetResidual<T>>, |acc, r| match acc {
            Some(a) if !(r.residual > a.residual) => Some(a),
            _ => Some(r),
        })
        .cloned()
        .expect("at least one probe");
    let pass = worst.residual <= T::lit(CONDITION_2A_TOL);
    Ok(Condition2aReport {
        norm: norm.label().to_string(),
        p: p.to_string(),
        subsets_per_probe: subsets.len(),
        exhaustive: n <= FULL_ENUMERATION_ATOMS,
        rows,
        max_residual: worst.residual,
        pass,
        witness: (!pass).then_some(worst),
    })
}

/// A bounded sequence of module functions converging to zero at every atom,
/// i.e. weak*-null in `L^∞(m)` on a finite atomic space.
pub struct NullSequence<T: Scalar> {
    pub name: String,
    space: Arc<MeasureSpace<T>>,
    term: Box<dyn Fn(u64) -> Vec<T> + Send + Sync>,
}

impl<T: Scalar> NullSequence<T> {
    /// Accepts the sequence only if it is bounded by 1 on sampled indices
    /// and its values at `horizon` are below `1e-6` in absolute value.
    pub fn checked(
        name: impl Into<String>,
        space: Arc<MeasureSpace<T>>,
        term: impl Fn(u64) -> Vec<T> + Send + Sync + 'static,
        horizon: u64,
    ) -> Result<Self> {
        let name = name.into();
        let mut probes: Vec<u64> = (1..=64).collect();
        let mut k = 128u64;
        while k < horizon {
            probes.push(k);
            probes.push(k + 1);
            k = k.saturating_mul(4);
        }
        for &n in &probes {
            let t = term(n);
            if t.len() != space.len() || t.iter().any(|v| !(v.abs() <= T::one())) {
                return Err(invalid("sequence", format!("{name}: term {n} is not bounded by 1")));
            }
        }
        for n in [horizon, horizon + 1] {
            if term(n).iter().any(|v| v.abs() > T::lit(1e-6)) {
                return Err(invalid("sequence", format!("{name}: not null at atoms by n = {n}")));
            }
        }
        Ok(NullSequence {
            name,
            space,
            term: Box::new(term),
        })
    }

    pub fn term(&self, n: u64) -> ScalarField<T> {
        ScalarField::new(self.space.clone(), (self.term)(n)).expect("length checked")
    }
}

pub const DEFAULT_HORIZON: u64 = 1_000_000_000;

/// The generator's catalogue of atomwise-null sequences.
pub fn null_sequences<T: Scalar>(space: &Arc<MeasureSpace<T>>, seed: u64, horizon: u64) -> Result<Vec<NullSequence<T>>> {
    let n = space.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let subset: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
    let ratios: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..0.95)).collect();
    let mut out = Vec::new();
    out.push(NullSequence::checked(
        "indicator_over_n",
        space.clone(),
        move |k| vec![T::lit(1.0 / k as f64); n],
        horizon,
    )?);
    out.push(NullSequence::checked(
        "alternating_on_subset",
        space.clone(),
        move |k| {
            let s = if k % 2 == 0 { 1.0 } else { -1.0 };
            subset
                .iter()
                .map(|&m| if m { T::lit(s / k as f64) } else { T::zero() })
                .collect()
        },
        horizon,
    )?);
    out.push(NullSequence::checked(
        "geometric",
        space.clone(),
        move |k| ratios.iter().map(|&r| T::lit(r.powf(k as f64))).collect(),
        horizon,
    )?);
    out.push(NullSequence::checked(
        "staggered_power",
        space.clone(),
        move |k| (0..n).map(|x| T::lit(((k + x as u64) as f64).powf(-1.5))).collect(),
        horizon,
    )?);
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct SequenceRow<T> {
    pub sequence: String,
    pub horizon: u64,
    /// `max over probes of ‖f_N · v‖`.
    pub value: T,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct Condition2bReport<T> {
    pub norm: String,
    pub rows: Vec<SequenceRow<T>>,
    pub max_value: T,
    pub pass: bool,
    pub note: String,
}

pub const CONDITION_2B_TOL: f64 = 1e-6;

/// Evaluates `‖f_N · v‖` at the horizon for every generated null sequence.
pub fn check_condition_2b<T: Scalar>(
    norm: &AbstractModuleNorm<T>,
    probes: &[Section<T>],
    seed: u64,
    horizon: u64,
) -> Result<Condition2bReport<T>> {
    for v in probes {
        norm.norm(v)?;
    }
    let seqs = null_sequences(norm.bundle().space(), seed, horizon)?;
    let mut rows = Vec::new();
    for s in &seqs {
        let f = s.term(horizon);
        let mut value = T::zero();
        for v in probes {
            value = value.max(norm.eval_unchecked(&v.module_action(&f)?));
        }
        rows.push(SequenceRow {
            sequence: s.name.clone(),
            horizon,
            value,
        });
    }
    let max_value = rows.iter().fold(T::zero(), |a, r| a.max(r.value));
    Ok(Condition2bReport {
        norm: norm.label().to_string(),
        rows,
        max_value,
        pass: max_value <= T::lit(CONDITION_2B_TOL),
        note: "on a finite atomic space a bounded weak*-null sequence converges at every atom, \
               and any norm is continuous in the finitely many coordinates, so 2b always holds"
            .into(),
    })
}

/// `μ_v(E) = ‖1_E · v‖^p`.
pub fn mu_v<T: Scalar>(norm: &AbstractModuleNorm<T>, p: T, v: &Section<T>, subset: &AtomSubset) -> Result<T> {
    Ok(norm.norm(&v.restrict(subset))?.powf(p))
}

/// `|v|(x) = (μ_v({x}) / m({x}))^{1/p}`. Refuses when condition 2a fails
/// on `v` itself.
pub fn reconstruct_pointwise_norm<T: Scalar>(
    norm: &AbstractModuleNorm<T>,
    p: &Exponent<T>,
    v: &Section<T>,
) -> Result<ScalarField<T>> {
    let report = check_condition_2a(norm, p, std::slice::from_ref(v), 0)?;
    if !report.pass {
        let w = report.witness.expect("failing report has a witness");
        return Err(Error::Refused(format!(
            "{} is not additive in the p-th power (μ_v not a measure): residual {} on subset {}",
            norm.label(),
            w.residual,
            w.subset
        )));
    }
    let pv = p.as_scalar();
    let n = norm.bundle().len();
    let weights = norm.bundle().space().weights();
    let values = (0..n)
        .map(|x| {
            let m = mu_v(norm, pv, v, &AtomSubset::singleton(n, x))?;
            Ok((m / weights[x]).powf(pv.recip()))
        })
        .collect::<Result<Vec<T>>>()?;
    ScalarField::new(norm.bundle().space().clone(), values)
}

/// Three densities against `m` and an exponent `α > 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasureTriple<T: Scalar> {
    pub space: Arc<MeasureSpace<T>>,
    pub densities: [Vec<T>; 3],
    pub alpha: T,
}

impl<T: Scalar> MeasureTriple<T> {
    pub fn new(space: Arc<MeasureSpace<T>>, densities: [Vec<T>; 3], alpha: T) -> Result<Self> {
        for d in &densities {
            if d.len() != space.len() {
                return Err(Error::Structural("density length differs from atom count".into()));
            }
            if d.iter().any(|&x| !(x >= T::zero()) || !x.is_finite()) {
                return Err(invalid("measure triple", "densities must be nonnegative and finite"));
            }
        }
        if !(alpha > T::zero()) || !alpha.is_finite() {
            return Err(invalid("measure triple", "alpha must be positive"));
        }
        Ok(MeasureTriple {
            space,
            densities,
            alpha,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct RnReport<T> {
    pub subsets: usize,
    pub set_level_holds: bool,
    pub density_level_holds: bool,
    /// Set level holds but the density level fails: must never happen.
    pub violation: bool,
    /// Smallest `μ_2(E)^α + μ_3(E)^α − μ_1(E)^α` over subsets.
    pub min_set_margin: T,
    pub min_density_margin: T,
    pub worst_subset: String,
    pub worst_atom: usize,
}

/// Subset sums `Σ_{x∈E} c_x` for every mask, built from two half tables
/// so each sum carries at most `n` rounding steps.
fn subset_sums<T: Scalar>(c: &[T]) -> impl Fn(u64) -> T + '_ {
    let n = c.len();
    let lo_bits = n / 2;
    let table = |vals: &[T]| -> Vec<T> {
        let mut t = vec![T::zero(); 1 << vals.len()];
        for m in 1..t.len() {
            let b = m.trailing_zeros() as usize;
            t[m] = t[m & (m - 1)] + vals[b];
        }
        t
    };
    let lo = table(&c[..lo_bits]);
    let hi = table(&c[lo_bits..]);
    move |m: u64| lo[(m & ((1 << lo_bits) - 1)) as usize] + hi[(m >> lo_bits) as usize]
}

const SET_LEVEL_SLACK: f64 = 1e-13;
const DENSITY_LEVEL_TOL: f64 = 1e-12;

/// Checks the set-level inequality `μ_1(E)^α ≤ μ_2(E)^α + μ_3(E)^α` on every
/// subset and the density-level one at every atom.
pub fn check_rn_inequality<T: Scalar>(triple: &MeasureTriple<T>) -> Result<RnReport<T>> {
    let n = triple.space.len();
    if n > RN_MAX_ATOMS {
        return Err(Error::Refused(format!(
            "{n} atoms: full subset enumeration is limited to {RN_MAX_ATOMS}"
        )));
    }
    let w = triple.space.weights();
    let a = triple.alpha;
    let masses: Vec<Vec<T>> = triple
        .densities
        .iter()
        .map(|d| d.iter().zip(w).map(|(&f, &m)| f * m).collect())
        .collect();
    let sums: Vec<_> = masses.iter().map(|m| subset_sums(m)).collect();
    let mut min_set = T::infinity();
    let mut worst_subset = 0u64;
    let mut set_ok = true;
    for m in 0..1u64 << n {
        let (l, r) = (sums[0](m).powf(a), sums[1](m).powf(a) + sums[2](m).powf(a));
        let margin = r - l;
        if margin < min_set {
            min_set = margin;
            worst_subset = m;
        }
        if l > r * (T::one() + T::lit(SET_LEVEL_SLACK)) {
            set_ok = false;
        }
    }
    let mut min_density = T::infinity();
    let mut worst_atom = 0;
    let mut density_ok = true;
    for x in 0..n {
        let d = |j: usize| triple.densities[j][x].powf(a);
        let (l, r) = (d(0), d(1) + d(2));
        if r - l < min_density {
            min_density = r - l;
            worst_atom = x;
        }
        if l > r * (T::one() + T::lit(DENSITY_LEVEL_TOL)) {
            density_ok = false;
        }
    }
    Ok(RnReport {
        subsets: 1 << n,
        set_level_holds: set_ok,
        density_level_holds: density_ok,
        violation: set_ok && !density_ok,
        min_set_margin: min_set,
        min_density_margin: min_density,
        worst_subset: mask_string(&AtomSubset::from_mask(n, worst_subset)),
        worst_atom,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norm::NormSpec;

    fn scalar_bundle(w: &[f64]) -> Arc<Bundle<f64>> {
        let s = MeasureSpace::from_weights(w.to_vec()).unwrap().into_shared();
        Bundle::constant(s, NormSpec::euclidean(1)).into_shared()
    }

    fn e(p: f64) -> Exponent<f64> {
        Exponent::finite(p).unwrap()
    }

    #[test]
    fn induced_norm_passes_2a() {
        let b = scalar_bundle(&[1.0, 2.0, 0.5]);
        let norm = AbstractModuleNorm::induced(b.clone(), e(2.0));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let probes: Vec<_> = (0..5).map(|_| random_section(&b, &mut rng)).collect();
        let r = check_condition_2a(&norm, &e(2.0), &probes, 0).unwrap();
        assert!(r.pass && r.max_residual <= 1e-12 && r.exhaustive);
        assert!(check_condition_2a(&norm, &Exponent::Infinity, &probes, 0).is_err());
    }

    #[test]
    fn sup_norm_fails_2a_with_witness() {
        let b = scalar_bundle(&[1.0, 1.0]);
        let norm = AbstractModuleNorm::from_spec(b.clone(), ModuleNormSpec::SupOverAtoms, 1).unwrap();
        let v = Section::new(b, vec![vec![1.0], vec![1.0]]).unwrap();
        let r = check_condition_2a(&norm, &e(2.0), &[v], 0).unwrap();
        assert!(!r.pass);
        assert!((r.max_residual - 1.0).abs() < 1e-12);
        let w = r.witness.unwrap();
        assert!(w.subset == "10" || w.subset == "01");
    }

    #[test]
    fn mixed_norm_residual_matches_arithmetic() {
        // |v| = [1,1], weights [1,1]: ‖v‖ = √2 + 2^{1/3}, one atom gives 2.
        let b = scalar_bundle(&[1.0, 1.0]);
        let spec = ModuleNormSpec::Mixed { p: e(2.0), p_prime: e(3.0) };
        let norm = AbstractModuleNorm::from_spec(b.clone(), spec, 1).unwrap();
        let v = Section::new(b, vec![vec![1.0], vec![-1.0]]).unwrap();
        let r = check_condition_2a(&norm, &e(2.0), &[v], 0).unwrap();
        let full = 2f64.sqrt() + 2f64.cbrt();
        let expected = (full * full - 8.0).abs();
        assert!(!r.pass && (r.max_residual - expected).abs() < 1e-12);
    }

    #[test]
    fn reconstruction_examples() {
        let b = scalar_bundle(&[1.0, 1.0]);
        let norm = AbstractModuleNorm::induced(b.clone(), e(2.0));
        let v = Section::new(b, vec![vec![3.0], vec![4.0]]).unwrap();
        let r = reconstruct_pointwise_norm(&norm, &e(2.0), &v).unwrap();
        assert!((r.values()[0] - 3.0).abs() < 1e-12 && (r.values()[1] - 4.0).abs() < 1e-12);

        let b = scalar_bundle(&[4.0, 1.0]);
        let norm = AbstractModuleNorm::induced(b.clone(), Exponent::one());
        let v = Section::new(b, vec![vec![1.0], vec![1.0]]).unwrap();
        assert_eq!(norm.norm(&v).unwrap(), 5.0);
        let r = reconstruct_pointwise_norm(&norm, &Exponent::one(), &v).unwrap();
        assert!((r.values()[0] - 1.0).abs() < 1e-12 && (r.values()[1] - 1.0).abs() < 1e-12);

        let s = MeasureSpace::from_weights(vec![1.0, 1.0]).unwrap().into_shared();
        let b = Bundle::new(
            s,
            vec![
                crate::bundle::Fiber::Normed(NormSpec::lp(Exponent::one(), 2)),
                crate::bundle::Fiber::Normed(NormSpec::lp(Exponent::Infinity, 2)),
            ],
        )
        .unwrap()
        .into_shared();
        let norm = AbstractModuleNorm::induced(b.clone(), e(3.0));
        let v = Section::new(b, vec![vec![1.0, -2.0], vec![1.0, -2.0]]).unwrap();
        let r = reconstruct_pointwise_norm(&norm, &e(3.0), &v).unwrap();
        assert!((r.values()[0] - 3.0).abs() < 1e-12 && (r.values()[1] - 2.0).abs() < 1e-12);

        let sup = AbstractModuleNorm::from_spec(v.bundle().clone(), ModuleNormSpec::SupOverAtoms, 0).unwrap();
        assert!(matches!(reconstruct_pointwise_norm(&sup, &e(3.0), &v), Err(Error::Refused(_))));
    }

    #[test]
    fn condition_2b_and_generator_contract() {
        let b = scalar_bundle(&[1.0, 2.0, 3.0]);
        let norm = AbstractModuleNorm::induced(b.clone(), e(2.0));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let probes: Vec<_> = (0..4).map(|_| random_section(&b, &mut rng)).collect();
        let r = check_condition_2b(&norm, &probes, 1, DEFAULT_HORIZON).unwrap();
        assert!(r.pass);
        let bad = NullSequence::checked(
            "unit_alternating",
            b.space().clone(),
            |k: u64| vec![if k % 2 == 0 { 1.0 } else { -1.0 }; 3],
            DEFAULT_HORIZON,
        );
        assert!(bad.is_err());
    }

    #[test]
    fn non_norms_are_rejected() {
        let b = scalar_bundle(&[1.0, 1.0]);
        let squared = |v: &Section<f64>| v.gamma_p_norm(&Exponent::finite(2.0).unwrap()).powi(2);
        assert!(AbstractModuleNorm::from_fn(b, "squared", squared, 0).is_err());
    }

    #[test]
    fn rn_examples() {
        let s = MeasureSpace::from_weights(vec![1.0, 1.0]).unwrap().into_shared();
        let t = MeasureTriple::new(s.clone(), [vec![4.0, 1.0], vec![1.0, 1.0], vec![1.0, 0.0]], 0.5).unwrap();
        let r = check_rn_inequality(&t).unwrap();
        assert!(r.set_level_holds && r.density_level_holds && !r.violation);
        assert_eq!(r.subsets, 4);

        let t = MeasureTriple::new(s.clone(), [vec![2.0, 3.0], vec![2.0, 3.0], vec![0.0, 0.0]], 1.7).unwrap();
        let r = check_rn_inequality(&t).unwrap();
        assert!(r.set_level_holds && r.density_level_holds && r.min_set_margin >= 0.0);

        let big = MeasureSpace::from_weights(vec![1.0; 21]).unwrap().into_shared();
        let z = vec![0.0; 21];
        let t = MeasureTriple::new(big, [z.clone(), z.clone(), z], 1.0).unwrap();
        assert!(check_rn_inequality(&t).is_err());
    }
}

//! Discrete Banach bundles and their section spaces.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exponent::Exponent;
use crate::measure::{same_space, AtomSubset, MeasureSpace, ModuleFunction, ScalarField};
use crate::norm::{
    coordinate_directions, modulus_curve, modulus_of_convexity, parallelogram_defect,
    ModulusCurve, ModulusEstimate, NormEvaluator, NormKind, NormSpec, OptimizerBudget,
};
use crate::scalar::{pow, Scalar};

/// The fiber over one atom: either `{0}` or `ℝ^d` with a norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFiber<T>", into = "RawFiber<T>", bound = "T: Scalar")]
pub enum Fiber<T: Scalar> {
    Zero,
    Normed(NormSpec<T>),
}

impl<T: Scalar> Fiber<T> {
    pub fn dimension(&self) -> usize {
        match self {
            Fiber::Zero => 0,
            Fiber::Normed(spec) => spec.dimension(),
        }
    }

    pub fn spec(&self) -> Option<&NormSpec<T>> {
        match self {
            Fiber::Zero => None,
            Fiber::Normed(spec) => Some(spec),
        }
    }

    /// `‖v‖` in this fiber; `0` on the zero fiber.
    pub fn norm(&self, v: &[T]) -> T {
        match self {
            Fiber::Zero => T::zero(),
            Fiber::Normed(spec) => spec.norm(v),
        }
    }

    pub fn dual_norm(&self, w: &[T]) -> T {
        match self {
            Fiber::Zero => T::zero(),
            Fiber::Normed(spec) => spec.dual_norm(w),
        }
    }

    /// The fiber `{ x ∈ ℝ^k : B x }` of an ambient norm restricted to the
    /// column span of `embedding` (an `N × k` matrix of full column rank),
    /// expressed in the coordinates `x`.
    pub fn embedded(ambient: &NormSpec<T>, embedding: &[Vec<T>]) -> Result<Self> {
        let n = ambient.dimension();
        if embedding.len() != n {
            return Err(invalid(
                "fiber",
                format!("embedding has {} rows, ambient dimension is {n}", embedding.len()),
            ));
        }
        let k = embedding.first().map_or(0, Vec::len);
        if embedding.iter().any(|r| r.len() != k) {
            return Err(invalid("fiber", "embedding rows have unequal lengths"));
        }
        if k == 0 {
            return Ok(Fiber::Zero);
        }
        let col = |j: usize| -> Vec<T> { embedding.iter().map(|r| r[j]).collect() };
        let cols: Vec<Vec<T>> = (0..k).map(col).collect();
        // Bᵀ a for an ambient functional a
        let pull = |a: &[T]| -> Vec<T> { cols.iter().map(|c| crate::scalar::dot(c, a)).collect() };
        let spec = match ambient.kind() {
            NormKind::InnerProduct { gram } => {
                let gb: Vec<Vec<T>> = cols
                    .iter()
                    .map(|c| (0..n).map(|i| crate::scalar::dot(&gram[i], c)).collect())
                    .collect();
                let g = (0..k)
                    .map(|i| (0..k).map(|j| crate::scalar::dot(&cols[i], &gb[j])).collect())
                    .collect();
                NormSpec::inner_product(g)?
            }
            NormKind::PolyhedralMax { functionals } => {
                NormSpec::polyhedral_max(functionals.iter().map(|a| pull(a)).collect())?
            }
            NormKind::WeightedLp { exponent, weights } => {
                let unit = |i: usize, s: T| {
                    let mut e = vec![T::zero(); n];
                    e[i] = s;
                    e
                };
                match exponent.value() {
                    None => NormSpec::polyhedral_max(
                        (0..n).map(|i| pull(&unit(i, weights[i]))).collect(),
                    )?,
                    Some(r) if r == T::lit(2.0) => {
                        let g = (0..k)
                            .map(|i| {
                                (0..k)
                                    .map(|j| {
                                        (0..n)
                                            .map(|t| weights[t] * weights[t] * cols[i][t] * cols[j][t])
                                            .sum()
                                    })
                                    .collect()
                            })
                            .collect();
                        NormSpec::inner_product(g)?
                    }
                    Some(r) if r == T::one() && n <= 12 => {
                        // ‖Bx‖₁ = max over sign patterns s of ⟨s∘d, Bx⟩
                        let funcs = (0..1u32 << n)
                            .map(|mask| {
                                let a: Vec<T> = (0..n)
                                    .map(|i| {
                                        if mask >> i & 1 == 1 {
                                            -weights[i]
                                        } else {
                                            weights[i]
                                        }
                                    })
                                    .collect();
                                pull(&a)
                            })
                            .collect();
                        NormSpec::polyhedral_max(funcs)?
                    }
                    _ => {
                        return Err(Error::Domain(format!(
                            "cannot restrict {} to a subspace exactly",
                            ambient.label()
                        )))
                    }
                }
            }
            NormKind::PolytopeGauge { .. } => {
                return Err(Error::Domain(
                    "cannot restrict a polytope gauge to a subspace exactly".into(),
                ))
            }
        };
        Ok(Fiber::Normed(spec))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
struct RawFiber<T: Scalar> {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dimension: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    norm: Option<NormSpec<T>>,
    /// Ambient embedding; normalised away on construction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    embedding: Option<Vec<Vec<T>>>,
}

impl<T: Scalar> TryFrom<RawFiber<T>> for Fiber<T> {
    type Error = Error;

    fn try_from(raw: RawFiber<T>) -> Result<Self> {
        let fiber = match (raw.norm, raw.embedding) {
            (None, _) => match raw.dimension {
                None => return Err(invalid("fiber", "fiber dimension required")),
                Some(0) => Fiber::Zero,
                Some(d) => {
                    return Err(invalid(
                        "fiber",
                        format!("fiber of dimension {d} needs a norm"),
                    ))
                }
            },
            (Some(spec), None) => Fiber::Normed(spec),
            (Some(spec), Some(b)) => Fiber::embedded(&spec, &b)?,
        };
        match raw.dimension {
            Some(d) if d != fiber.dimension() => Err(invalid(
                "fiber",
                format!("declared dimension {d}, norm has dimension {}", fiber.dimension()),
            )),
            _ => Ok(fiber),
        }
    }
}

impl<T: Scalar> From<Fiber<T>> for RawFiber<T> {
    fn from(f: Fiber<T>) -> Self {
        RawFiber {
            dimension: Some(f.dimension()),
            norm: match f {
                Fiber::Zero => None,
                Fiber::Normed(spec) => Some(spec),
            },
            embedding: None,
        }
    }
}

/// A Banach bundle over a finite atomic space: one fiber per atom.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBundle<T>", into = "RawBundle<T>", bound = "T: Scalar")]
pub struct Bundle<T: Scalar> {
    space: Arc<MeasureSpace<T>>,
    fibers: Vec<Fiber<T>>,
    offsets: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
struct RawBundle<T: Scalar> {
    space: MeasureSpace<T>,
    fibers: Vec<Fiber<T>>,
}

impl<T: Scalar> TryFrom<RawBundle<T>> for Bundle<T> {
    type Error = Error;

    fn try_from(raw: RawBundle<T>) -> Result<Self> {
        Bundle::new(Arc::new(raw.space), raw.fibers)
    }
}

impl<T: Scalar> From<Bundle<T>> for RawBundle<T> {
    fn from(b: Bundle<T>) -> Self {
        RawBundle {
            space: (*b.space).clone(),
            fibers: b.fibers,
        }
    }
}

impl<T: Scalar> Bundle<T> {
    pub fn new(space: Arc<MeasureSpace<T>>, fibers: Vec<Fiber<T>>) -> Result<Self> {
        if fibers.len() != space.len() {
            return Err(Error::Structural(format!(
                "{} fibers over a space of {} atoms",
                fibers.len(),
                space.len()
            )));
        }
        let mut offsets = Vec::with_capacity(fibers.len() + 1);
        offsets.push(0);
        for f in &fibers {
            offsets.push(offsets.last().copied().unwrap_or(0) + f.dimension());
        }
        Ok(Bundle {
            space,
            fibers,
            offsets,
        })
    }

    /// The constant bundle with fiber `spec` at every atom.
    pub fn constant(space: Arc<MeasureSpace<T>>, spec: NormSpec<T>) -> Self {
        let fibers = vec![Fiber::Normed(spec); space.len()];
        Bundle::new(space, fibers).expect("one fiber per atom")
    }

    pub fn space(&self) -> &Arc<MeasureSpace<T>> {
        &self.space
    }

    pub fn fibers(&self) -> &[Fiber<T>] {
        &self.fibers
    }

    pub fn fiber(&self, atom: usize) -> &Fiber<T> {
        &self.fibers[atom]
    }

    pub fn len(&self) -> usize {
        self.fibers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fibers.is_empty()
    }

    pub fn dimensions(&self) -> Vec<usize> {
        self.fibers.iter().map(Fiber::dimension).collect()
    }

    /// Dimension of the flattened section space.
    pub fn total_dimension(&self) -> usize {
        self.offsets[self.fibers.len()]
    }

    /// Range of atom `x` inside a flattened section.
    pub fn slot(&self, atom: usize) -> std::ops::Range<usize> {
        self.offsets[atom]..self.offsets[atom + 1]
    }

    /// Every fiber is `{0}`.
    pub fn is_degenerate(&self) -> bool {
        self.fibers.iter().all(|f| matches!(f, Fiber::Zero))
    }

    /// The same nonzero normed fiber at every atom.
    pub fn constant_fiber(&self) -> Option<&NormSpec<T>> {
        let first = self.fibers.first()?.spec()?;
        self.fibers
            .iter()
            .all(|f| f.spec() == Some(first))
            .then_some(first)
    }

    pub fn into_shared(self) -> Arc<Self> {
        Arc::new(self)
    }

    /// Indices of the first atom carrying each distinct fiber, and for every
    /// atom the index of its representative.
    fn distinct_fibers(&self) -> (Vec<usize>, Vec<usize>) {
        let mut reps: Vec<usize> = Vec::new();
        let mut rep_of = Vec::with_capacity(self.len());
        for (i, f) in self.fibers.iter().enumerate() {
            match reps.iter().position(|&r| self.fibers[r] == *f) {
                Some(k) => rep_of.push(k),
                None => {
                    rep_of.push(reps.len());
                    reps.push(i);
                }
            }
        }
        (reps, rep_of)
    }
}

pub(crate) fn same_bundle<T: Scalar>(a: &Arc<Bundle<T>>, b: &Arc<Bundle<T>>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

pub(crate) fn check_shapes<T: Scalar>(bundle: &Bundle<T>, vectors: &[Vec<T>], what: &str) -> Result<()> {
    if vectors.len() != bundle.len() {
        return Err(Error::Structural(format!(
            "{what} has {} entries over {} atoms",
            vectors.len(),
            bundle.len()
        )));
    }
    for (x, (v, f)) in vectors.iter().zip(bundle.fibers()).enumerate() {
        if v.len() != f.dimension() {
            return Err(Error::Structural(format!(
                "{what} at atom {x} has length {}, fiber dimension is {}",
                v.len(),
                f.dimension()
            )));
        }
    }
    if vectors.iter().flatten().any(|c| !c.is_finite()) {
        return Err(invalid("section", format!("{what} has non-finite entries")));
    }
    Ok(())
}

/// A measurable selector: one fiber vector per atom.
#[derive(Clone, Debug, PartialEq)]
pub struct Section<T: Scalar> {
    bundle: Arc<Bundle<T>>,
    vectors: Vec<Vec<T>>,
}

impl<T: Scalar> Section<T> {
    pub fn new(bundle: Arc<Bundle<T>>, vectors: Vec<Vec<T>>) -> Result<Self> {
        check_shapes(&bundle, &vectors, "section")?;
        Ok(Section { bundle, vectors })
    }

    pub fn zeros(bundle: Arc<Bundle<T>>) -> Self {
        let vectors = bundle.dimensions().into_iter().map(|d| vec![T::zero(); d]).collect();
        Section { bundle, vectors }
    }

    /// Rebuilds a section from its flattened coordinates.
    pub fn from_flat(bundle: Arc<Bundle<T>>, flat: &[T]) -> Result<Self> {
        if flat.len() != bundle.total_dimension() {
            return Err(Error::Structural(format!(
                "flat section of length {}, bundle has total dimension {}",
                flat.len(),
                bundle.total_dimension()
            )));
        }
        let vectors = (0..bundle.len()).map(|x| flat[bundle.slot(x)].to_vec()).collect();
        Section::new(bundle, vectors)
    }

    /// Reads `atom_id c_1 … c_d` lines (whitespace or comma separated; `#`
    /// starts a comment). Atoms not listed get the zero vector.
    pub fn from_columns(bundle: Arc<Bundle<T>>, text: &str) -> Result<Self> {
        let mut vectors: Vec<Vec<T>> =
            bundle.dimensions().into_iter().map(|d| vec![T::zero(); d]).collect();
        let mut seen = vec![false; bundle.len()];
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty());
            let id = fields.next().unwrap_or("");
            let x = bundle.space().index_of(id).ok_or_else(|| {
                invalid("section", format!("line {}: unknown atom {id:?}", lineno + 1))
            })?;
            if std::mem::replace(&mut seen[x], true) {
                return Err(invalid("section", format!("line {}: atom {id:?} repeated", lineno + 1)));
            }
            let coords = fields
                .map(|s| {
                    s.parse::<f64>().map(T::lit).map_err(|e| {
                        invalid("section", format!("line {}: {s:?}: {e}", lineno + 1))
                    })
                })
                .collect::<Result<Vec<T>>>()?;
            vectors[x] = coords;
        }
        Section::new(bundle, vectors)
    }

    pub fn bundle(&self) -> &Arc<Bundle<T>> {
        &self.bundle
    }

    pub fn vectors(&self) -> &[Vec<T>] {
        &self.vectors
    }

    pub fn vector(&self, atom: usize) -> &[T] {
        &self.vectors[atom]
    }

    pub fn flat(&self) -> Vec<T> {
        self.vectors.iter().flatten().copied().collect()
    }

    /// `|v|(x) = ‖v(x)‖_{E(x)}`.
    pub fn pointwise_norm(&self) -> ScalarField<T> {
        let values = self
            .vectors
            .iter()
            .zip(self.bundle.fibers())
            .map(|(v, f)| f.norm(v))
            .collect();
        ScalarField::new(self.bundle.space().clone(), values).expect("one value per atom")
    }

    /// `‖v‖_{Γ_p} = ‖|v|‖_{L^p(m)}`.
    pub fn gamma_p_norm(&self, p: &Exponent<T>) -> T {
        self.pointwise_norm().lp_norm(p)
    }

    /// `f · v`.
    pub fn module_action(&self, f: &ModuleFunction<T>) -> Result<Self> {
        if !same_space(f.space(), self.bundle.space()) {
            return Err(Error::Structural("function and section live on different spaces".into()));
        }
        let vectors = self
            .vectors
            .iter()
            .zip(f.values())
            .map(|(v, &c)| v.iter().map(|&x| c * x).collect())
            .collect();
        Ok(Section {
            bundle: self.bundle.clone(),
            vectors,
        })
    }

    /// `1_E · v`.
    pub fn restrict(&self, subset: &AtomSubset) -> Self {
        let vectors = self
            .vectors
            .iter()
            .enumerate()
            .map(|(x, v)| {
                if subset.contains(x) {
                    v.clone()
                } else {
                    vec![T::zero(); v.len()]
                }
            })
            .collect();
        Section {
            bundle: self.bundle.clone(),
            vectors,
        }
    }

    pub fn scale(&self, c: T) -> Self {
        Section {
            bundle: self.bundle.clone(),
            vectors: self
                .vectors
                .iter()
                .map(|v| v.iter().map(|&x| c * x).collect())
                .collect(),
        }
    }

    fn combine(&self, other: &Self, op: impl Fn(T, T) -> T) -> Result<Self> {
        if !same_bundle(&self.bundle, &other.bundle) {
            return Err(Error::Structural("sections of different bundles".into()));
        }
        let vectors = self
            .vectors
            .iter()
            .zip(&other.vectors)
            .map(|(a, b)| a.iter().zip(b).map(|(&x, &y)| op(x, y)).collect())
            .collect();
        Ok(Section {
            bundle: self.bundle.clone(),
            vectors,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, |x, y| x + y)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, |x, y| x - y)
    }

    /// `∫_E v dm = Σ_{x∈E} m({x}) v(x)`; requires one fiber dimension on `E`.
    pub fn bochner_integral(&self, subset: &AtomSubset) -> Result<Vec<T>> {
        if subset.universe_size() != self.bundle.len() {
            return Err(Error::Structural("subset of a different atom set".into()));
        }
        let mut dims = subset.iter().map(|x| self.vectors[x].len());
        let d = dims.next().unwrap_or(0);
        if dims.any(|e| e != d) {
            return Err(Error::Domain(
                "fiber dimension varies over the subset: the bundle is not constant there".into(),
            ));
        }
        let weights = self.bundle.space().weights();
        let mut out = vec![T::zero(); d];
        for x in subset.iter() {
            for (o, &c) in out.iter_mut().zip(&self.vectors[x]) {
                *o += weights[x] * c;
            }
        }
        Ok(out)
    }
}

/// The `Γ_p` norm as a norm on flattened sections.
pub struct GammaNorm<'a, T: Scalar> {
    bundle: &'a Bundle<T>,
    p: Exponent<T>,
}

impl<'a, T: Scalar> GammaNorm<'a, T> {
    pub fn new(bundle: &'a Bundle<T>, p: Exponent<T>) -> Self {
        GammaNorm { bundle, p }
    }

    /// Places a fiber vector at `atom` and zeros elsewhere.
    pub fn lift(&self, atom: usize, v: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.bundle.total_dimension()];
        out[self.bundle.slot(atom)].copy_from_slice(v);
        out
    }
}

impl<T: Scalar> NormEvaluator<T> for GammaNorm<'_, T> {
    fn dim(&self) -> usize {
        self.bundle.total_dimension()
    }

    fn norm(&self, v: &[T]) -> T {
        let weights = self.bundle.space().weights();
        let fibers = self.bundle.fibers();
        let at = |x: usize| fibers[x].norm(&v[self.bundle.slot(x)]);
        match self.p.value() {
            None => (0..fibers.len()).map(at).fold(T::zero(), T::max),
            Some(p) => {
                // running max-scaled sum: s·m^p = Σ w n^p
                let (mut m, mut s) = (T::zero(), T::zero());
                for (x, &w) in weights.iter().enumerate() {
                    let n = at(x);
                    if n > m {
                        s = s * pow(m / n, p) + w;
                        m = n;
                    } else if n > T::zero() {
                        s += w * pow(n / m, p);
                    }
                }
                if m == T::zero() {
                    T::zero()
                } else {
                    m * pow(s, p.recip())
                }
            }
        }
    }

    fn structured_directions(&self) -> Vec<Vec<T>> {
        let mut out = Vec::new();
        for (x, f) in self.bundle.fibers().iter().enumerate() {
            let dirs = match f {
                Fiber::Zero => continue,
                Fiber::Normed(spec) => spec.structured_directions(),
            };
            out.extend(dirs.iter().map(|d| self.lift(x, d)));
        }
        if out.is_empty() {
            out = coordinate_directions(self.dim());
        }
        out
    }
}

/// Per-atom modulus of convexity, with the optimizer's estimate at each
/// normed atom (`None` at zero fibers, whose value is the convention `1`).
pub fn pointwise_modulus_detailed<T: Scalar>(
    bundle: &Bundle<T>,
    eps: T,
    budget: &OptimizerBudget,
) -> Result<Vec<Option<ModulusEstimate<T>>>> {
    if !(eps > T::zero() && eps <= T::lit(2.0)) {
        return Err(Error::Domain(format!("epsilon must lie in (0,2], got {eps}")));
    }
    let (reps, rep_of) = bundle.distinct_fibers();
    let per_rep = reps
        .par_iter()
        .map(|&r| match bundle.fiber(r) {
            Fiber::Zero => Ok(None),
            Fiber::Normed(spec) => modulus_of_convexity(spec, eps, budget).map(Some),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(rep_of.into_iter().map(|k| per_rep[k].clone()).collect())
}

/// `x ↦ δ_{E(x)}(ε)`, with `1` on zero-dimensional fibers.
pub fn pointwise_modulus<T: Scalar>(
    bundle: &Bundle<T>,
    eps: T,
    budget: &OptimizerBudget,
) -> Result<ScalarField<T>> {
    let values = pointwise_modulus_detailed(bundle, eps, budget)?
        .into_iter()
        .map(|m| m.map_or(T::one(), |m| m.delta))
        .collect();
    ScalarField::new(bundle.space().clone(), values)
}

/// Per-atom clamped modulus curves (`None` at zero fibers).
pub fn fiber_curves<T: Scalar>(
    bundle: &Bundle<T>,
    grid: &[T],
    budget: &OptimizerBudget,
) -> Result<Vec<Option<ModulusCurve<T>>>> {
    let (reps, rep_of) = bundle.distinct_fibers();
    let per_rep = reps
        .par_iter()
        .map(|&r| match bundle.fiber(r) {
            Fiber::Zero => Ok(None),
            Fiber::Normed(spec) => modulus_curve(spec, spec.label(), grid, budget).map(Some),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(rep_of.into_iter().map(|k| per_rep[k].clone()).collect())
}

/// Fiber-level classification of a bundle.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct BundleClass<T> {
    pub is_hilbert: bool,
    pub is_uniformly_convex: bool,
    pub epsilons: Vec<T>,
    /// `ess inf_x δ_{E(x)}(ε)` per grid point.
    pub ess_inf_modulus: Vec<T>,
    /// Parallelogram defect of each fiber (`0` on zero fibers).
    pub fiber_defects: Vec<T>,
    /// Every fiber is zero-dimensional.
    pub degenerate: bool,
}

pub const HILBERT_DEFECT_TOL: f64 = 1e-9;
pub const UNIFORM_CONVEXITY_THRESHOLD: f64 = 1e-6;

pub fn fiber_defects<T: Scalar>(bundle: &Bundle<T>, budget: &OptimizerBudget) -> Vec<T> {
    let (reps, rep_of) = bundle.distinct_fibers();
    let per_rep: Vec<T> = reps
        .par_iter()
        .map(|&r| match bundle.fiber(r) {
            Fiber::Zero => T::zero(),
            Fiber::Normed(spec) => parallelogram_defect(spec, budget).0,
        })
        .collect();
    rep_of.into_iter().map(|k| per_rep[k]).collect()
}

/// Classifies the bundle as Hilbert and/or uniformly convex from its fibers.
pub fn classify_bundle<T: Scalar>(
    bundle: &Bundle<T>,
    grid: &[T],
    budget: &OptimizerBudget,
) -> Result<BundleClass<T>> {
    let fiber_defects = fiber_defects(bundle, budget);
    let degenerate = bundle.is_degenerate();
    let curves = fiber_curves(bundle, grid, budget)?;
    let ess_inf_modulus: Vec<T> = (0..grid.len())
        .map(|i| {
            curves
                .iter()
                .map(|c| c.as_ref().map_or(T::one(), |c| c.deltas[i]))
                .fold(T::one(), T::min)
        })
        .collect();
    Ok(BundleClass {
        is_hilbert: fiber_defects.iter().all(|&d| d <= T::lit(HILBERT_DEFECT_TOL)),
        is_uniformly_convex: ess_inf_modulus
            .iter()
            .all(|&d| d > T::lit(UNIFORM_CONVEXITY_THRESHOLD)),
        epsilons: grid.to_vec(),
        ess_inf_modulus,
        fiber_defects,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(w: &[f64]) -> Arc<MeasureSpace<f64>> {
        MeasureSpace::from_weights(w.to_vec()).unwrap().into_shared()
    }

    fn euclid_bundle(w: &[f64], d: usize) -> Arc<Bundle<f64>> {
        Bundle::constant(space(w), NormSpec::euclidean(d)).into_shared()
    }

    #[test]
    fn pointwise_and_gamma_examples() {
        let b = euclid_bundle(&[1.0, 1.0], 2);
        let v = Section::new(b.clone(), vec![vec![3.0, 4.0], vec![0.0, 0.0]]).unwrap();
        assert_eq!(v.pointwise_norm().values(), &[5.0, 0.0]);
        assert_eq!(v.gamma_p_norm(&Exponent::finite(2.0).unwrap()), 5.0);
        assert!(Section::new(b.clone(), vec![vec![1.0], vec![0.0, 0.0]]).is_err());

        let b = Bundle::constant(space(&[2.0, 0.5]), NormSpec::lp(Exponent::one(), 1)).into_shared();
        let v = Section::new(b, vec![vec![1.0], vec![-2.0]]).unwrap();
        assert_eq!(v.gamma_p_norm(&Exponent::one()), 3.0);
    }

    #[test]
    fn module_action_and_integral() {
        let b = euclid_bundle(&[1.0, 2.0], 2);
        let v = Section::new(b.clone(), vec![vec![3.0, 4.0], vec![1.0, 0.0]]).unwrap();
        let f = ScalarField::new(b.space().clone(), vec![0.0, 1.0]).unwrap();
        assert_eq!(v.module_action(&f).unwrap().vectors(), &[vec![0.0, 0.0], vec![1.0, 0.0]]);
        let e = Section::new(b.clone(), vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(e.bochner_integral(&AtomSubset::full(2)).unwrap(), vec![1.0, 2.0]);
        assert_eq!(e.bochner_integral(&AtomSubset::empty(2)).unwrap(), Vec::<f64>::new());
        let other = ScalarField::new(space(&[1.0, 3.0]), vec![1.0, 1.0]).unwrap();
        assert!(v.module_action(&other).is_err());
    }

    #[test]
    fn integral_requires_constant_dimension() {
        let s = space(&[1.0, 1.0]);
        let b = Bundle::new(
            s,
            vec![Fiber::Normed(NormSpec::euclidean(1)), Fiber::Normed(NormSpec::euclidean(2))],
        )
        .unwrap()
        .into_shared();
        let v = Section::zeros(b);
        assert!(matches!(v.bochner_integral(&AtomSubset::full(2)), Err(Error::Domain(_))));
    }

    #[test]
    fn pointwise_modulus_mixed_and_scalar() {
        let b = Bundle::new(
            space(&[1.0, 1.0]),
            vec![
                Fiber::Normed(NormSpec::euclidean(2)),
                Fiber::Normed(NormSpec::lp(Exponent::one(), 2)),
            ],
        )
        .unwrap();
        let m = pointwise_modulus(&b, 1.0, &OptimizerBudget::default()).unwrap();
        assert!((m.values()[0] - (1.0 - 0.75f64.sqrt())).abs() < 1e-3);
        assert!(m.values()[1] <= 1e-9);
        let one = Bundle::constant(space(&[1.0]), NormSpec::euclidean(1));
        assert_eq!(pointwise_modulus(&one, 1.0, &OptimizerBudget::default()).unwrap().values(), &[1.0]);
    }

    #[test]
    fn classification_examples() {
        let budget = OptimizerBudget::default();
        let grid = crate::norm::default_grid::<f64>();
        let b = Bundle::constant(space(&[1.0, 2.0]), NormSpec::euclidean(2));
        let c = classify_bundle(&b, &grid, &budget).unwrap();
        assert!(c.is_hilbert && c.is_uniformly_convex);

        let b = Bundle::new(
            space(&[1.0, 2.0]),
            vec![
                Fiber::Normed(NormSpec::euclidean(2)),
                Fiber::Normed(NormSpec::lp(Exponent::one(), 2)),
            ],
        )
        .unwrap();
        let c = classify_bundle(&b, &grid, &budget).unwrap();
        assert!(!c.is_hilbert && !c.is_uniformly_convex);
        assert!(c.ess_inf_modulus.iter().all(|&d| d <= 1e-9));

        let b = Bundle::constant(space(&[1.0]), NormSpec::lp(Exponent::finite(4.0).unwrap(), 2));
        let c = classify_bundle(&b, &grid, &budget).unwrap();
        assert!(!c.is_hilbert && c.is_uniformly_convex);
    }

    #[test]
    fn embedded_fibers_pull_back() {
        // the plane x + y + z = 0 … spanned by (1,-1,0) and (0,1,-1)
        let b = vec![vec![1.0, 0.0], vec![-1.0, 1.0], vec![0.0, -1.0]];
        let x = [0.3, -0.7];
        let amb = |x: &[f64]| vec![x[0], x[1] - x[0], -x[1]];
        for spec in [
            NormSpec::euclidean(3),
            NormSpec::lp(Exponent::one(), 3),
            NormSpec::lp(Exponent::Infinity, 3),
            NormSpec::polyhedral_max(vec![vec![1.0, 2.0, 0.0], vec![0.0, 1.0, 1.0], vec![1.0, 0.0, 0.0]])
                .unwrap(),
        ] {
            let f = Fiber::embedded(&spec, &b).unwrap();
            assert!((f.norm(&x) - spec.norm(&amb(&x))).abs() < 1e-12, "{}", spec.label());
        }
        assert!(Fiber::embedded(&NormSpec::lp(Exponent::finite(3.0).unwrap(), 3), &b).is_err());
    }

    #[test]
    fn columnar_ingest() {
        let b = euclid_bundle(&[1.0, 1.0, 1.0], 2);
        let v = Section::from_columns(b, "# id coords\nx0 1 2\nx2, 3.5, -1\n").unwrap();
        assert_eq!(v.vectors(), &[vec![1.0, 2.0], vec![0.0, 0.0], vec![3.5, -1.0]]);
    }

    #[test]
    fn bundle_toml_round_trip() {
        let text = r#"
            [space]
            atoms = ["a", "b", "c"]
            weights = [1.0, 0.5, 2.0]

            [[fibers]]
            dimension = 0

            [[fibers]]
            norm = { kind = "weighted_lp", dimension = 2, exponent = "3/2" }

            [[fibers]]
            norm = { kind = "inner_product", dimension = 3, gram = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]] }
            embedding = [[1.0], [1.0], [0.0]]
        "#;
        let b: Bundle<f64> = toml::from_str(text).unwrap();
        assert_eq!(b.dimensions(), vec![0, 2, 1]);
        let back: Bundle<f64> = toml::from_str(&toml::to_string(&b).unwrap()).unwrap();
        assert_eq!(back, b);
        let err = toml::from_str::<Bundle<f64>>(
            "[space]\natoms=[\"a\"]\nweights=[1.0]\n[[fibers]]\nnorm = { kind = \"inner_product\", gram = [[1.0]] }\n",
        )
        .unwrap_err();
        assert!(err.to_string().contains("fiber dimension required"), "{err}");
    }
}

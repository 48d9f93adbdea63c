//! Finite atomic measure spaces and the scalar function calculus on them.
//!
//! Every atom carries strictly positive mass, so "m-almost everywhere"
//! means "at every atom" throughout the crate.

use std::collections::HashSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exponent::Exponent;
use crate::scalar::Scalar;

/// A finite measure space: ordered atoms with positive finite masses.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpace<T>", into = "RawSpace<T>", bound = "T: Scalar")]
pub struct MeasureSpace<T> {
    atoms: Vec<String>,
    weights: Vec<T>,
}

#[derive(Clone, Serialize, Deserialize)]
struct RawSpace<T> {
    atoms: Vec<String>,
    weights: Vec<T>,
}

impl<T: Scalar> TryFrom<RawSpace<T>> for MeasureSpace<T> {
    type Error = Error;

    fn try_from(raw: RawSpace<T>) -> Result<Self> {
        MeasureSpace::new(raw.atoms, raw.weights)
    }
}

impl<T: Scalar> From<MeasureSpace<T>> for RawSpace<T> {
    fn from(s: MeasureSpace<T>) -> Self {
        RawSpace {
            atoms: s.atoms,
            weights: s.weights,
        }
    }
}

impl<T: Scalar> MeasureSpace<T> {
    pub fn new(atoms: Vec<String>, weights: Vec<T>) -> Result<Self> {
        if atoms.len() != weights.len() {
            return Err(invalid(
                "measure space",
                format!("{} atoms but {} weights", atoms.len(), weights.len()),
            ));
        }
        let mut seen = HashSet::new();
        for a in &atoms {
            if !seen.insert(a.as_str()) {
                return Err(invalid("measure space", format!("duplicate atom id {a:?}")));
            }
        }
        for (a, &w) in atoms.iter().zip(&weights) {
            if !(w > T::zero()) || !w.is_finite() {
                return Err(invalid(
                    "measure space",
                    format!("atom {a:?} has weight {w}; weights must be positive and finite"),
                ));
            }
        }
        let total: T = weights.iter().copied().sum();
        if !total.is_finite() {
            return Err(invalid("measure space", "total mass is not finite"));
        }
        Ok(MeasureSpace { atoms, weights })
    }

    /// Atoms named `x0, x1, ...` with the given weights.
    pub fn from_weights(weights: Vec<T>) -> Result<Self> {
        let atoms = (0..weights.len()).map(|i| format!("x{i}")).collect();
        MeasureSpace::new(atoms, weights)
    }

    pub fn atoms(&self) -> &[String] {
        &self.atoms
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> T {
        self.weights.iter().copied().sum()
    }

    pub fn index_of(&self, atom: &str) -> Option<usize> {
        self.atoms.iter().position(|a| a == atom)
    }

    /// Mass of a subset of atoms.
    pub fn measure(&self, subset: &AtomSubset) -> T {
        subset.iter().map(|i| self.weights[i]).sum()
    }

    pub fn into_shared(self) -> Arc<Self> {
        Arc::new(self)
    }
}

pub(crate) fn same_space<T: PartialEq>(a: &Arc<MeasureSpace<T>>, b: &Arc<MeasureSpace<T>>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// A subset of the atom set, stored as a membership mask.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AtomSubset {
    members: Vec<bool>,
}

impl AtomSubset {
    pub fn empty(n: usize) -> Self {
        AtomSubset {
            members: vec![false; n],
        }
    }

    pub fn full(n: usize) -> Self {
        AtomSubset {
            members: vec![true; n],
        }
    }

    pub fn singleton(n: usize, atom: usize) -> Self {
        let mut s = AtomSubset::empty(n);
        s.members[atom] = true;
        s
    }

    /// Subset whose members are the set bits of `mask` (atom `i` is bit `i`).
    pub fn from_mask(n: usize, mask: u64) -> Self {
        AtomSubset {
            members: (0..n).map(|i| i < 64 && mask >> i & 1 == 1).collect(),
        }
    }

    pub fn from_members(members: Vec<bool>) -> Self {
        AtomSubset { members }
    }

    pub fn from_indices(n: usize, indices: &[usize]) -> Self {
        let mut s = AtomSubset::empty(n);
        for &i in indices {
            s.members[i] = true;
        }
        s
    }

    pub fn mask(&self) -> u64 {
        self.members
            .iter()
            .enumerate()
            .filter(|(i, &m)| m && *i < 64)
            .fold(0, |acc, (i, _)| acc | 1 << i)
    }

    pub fn contains(&self, atom: usize) -> bool {
        self.members.get(atom).copied().unwrap_or(false)
    }

    pub fn complement(&self) -> Self {
        AtomSubset {
            members: self.members.iter().map(|m| !m).collect(),
        }
    }

    pub fn universe_size(&self) -> usize {
        self.members.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members
            .iter()
            .enumerate()
            .filter_map(|(i, &m)| m.then_some(i))
    }

    pub fn count(&self) -> usize {
        self.members.iter().filter(|&&m| m).count()
    }
}

/// A real function on the atoms: an element of `L^0(m)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField<T> {
    space: Arc<MeasureSpace<T>>,
    values: Vec<T>,
}

/// Functions acting on sections by pointwise multiplication.
pub type ModuleFunction<T> = ScalarField<T>;

impl<T: Scalar> ScalarField<T> {
    pub fn new(space: Arc<MeasureSpace<T>>, values: Vec<T>) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::Structural(format!(
                "field has {} values over a space of {} atoms",
                values.len(),
                space.len()
            )));
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(invalid("scalar field", "NaN value"));
        }
        Ok(ScalarField { space, values })
    }

    pub fn constant(space: Arc<MeasureSpace<T>>, c: T) -> Self {
        let values = vec![c; space.len()];
        ScalarField { space, values }
    }

    pub fn zeros(space: Arc<MeasureSpace<T>>) -> Self {
        Self::constant(space, T::zero())
    }

    /// Indicator function `1_E`.
    pub fn indicator(space: Arc<MeasureSpace<T>>, subset: &AtomSubset) -> Self {
        let values = (0..space.len())
            .map(|i| if subset.contains(i) { T::one() } else { T::zero() })
            .collect();
        ScalarField { space, values }
    }

    pub fn space(&self) -> &Arc<MeasureSpace<T>> {
        &self.space
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        ScalarField {
            space: self.space.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    fn check_space(&self, other: &ScalarField<T>) -> Result<()> {
        if same_space(&self.space, &other.space) {
            Ok(())
        } else {
            Err(Error::Structural("fields live on different spaces".into()))
        }
    }

    pub fn zip_with(&self, other: &ScalarField<T>, f: impl Fn(T, T) -> T) -> Result<Self> {
        self.check_space(other)?;
        Ok(ScalarField {
            space: self.space.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// `∫_E f dm`.
    pub fn integrate_over(&self, subset: &AtomSubset) -> T {
        subset
            .iter()
            .map(|i| self.space.weights()[i] * self.values[i])
            .sum()
    }

    /// `∫ f dm`.
    pub fn integral(&self) -> T {
        self.values
            .iter()
            .zip(self.space.weights())
            .map(|(&v, &w)| v * w)
            .sum()
    }

    /// `‖f‖_{L^p(m)}`.
    pub fn lp_norm(&self, p: &Exponent<T>) -> T {
        match p.value() {
            None => self
                .values
                .iter()
                .fold(T::zero(), |acc, v| acc.max(v.abs())),
            Some(p) if p == T::one() => self.map(|v| v.abs()).integral(),
            Some(p) => {
                let s: T = self
                    .values
                    .iter()
                    .zip(self.space.weights())
                    .map(|(&v, &w)| w * v.abs().powf(p))
                    .sum();
                s.powf(p.recip())
            }
        }
    }

    /// `(ess inf f, ess sup f)`.
    pub fn ess_extrema(&self) -> Result<(T, T)> {
        let mut it = self.values.iter().copied();
        let first = it.next().ok_or(Error::UndefinedExtremum)?;
        Ok(it.fold((first, first), |(lo, hi), v| (lo.min(v), hi.max(v))))
    }

    pub fn ess_inf(&self) -> Result<T> {
        self.ess_extrema().map(|e| e.0)
    }

    pub fn ess_sup(&self) -> Result<T> {
        self.ess_extrema().map(|e| e.1)
    }

    /// `∫ min{g, 1} dm'` for a nonnegative `g` and a probability `m'`
    /// equivalent to `m`.
    pub fn l0_distance(&self, reweighting: &ProbabilityReweighting<T>) -> Result<T> {
        if !same_space(&self.space, &reweighting.space) {
            return Err(Error::Structural(
                "reweighting lives on a different space".into(),
            ));
        }
        if let Some(v) = self.values.iter().find(|&&v| v < T::zero()) {
            return Err(Error::Domain(format!(
                "L0 distance needs a nonnegative field, found {v}"
            )));
        }
        Ok(self
            .values
            .iter()
            .zip(&reweighting.probabilities)
            .map(|(&g, &p)| p * g.min(T::one()))
            .sum())
    }
}

/// Lattice supremum `⋁ f_i` of a finite non-empty family.
pub fn lattice_sup<T: Scalar>(fields: &[ScalarField<T>]) -> Result<ScalarField<T>> {
    lattice_fold(fields, T::max)
}

/// Lattice infimum `⋀ f_i` of a finite non-empty family.
pub fn lattice_inf<T: Scalar>(fields: &[ScalarField<T>]) -> Result<ScalarField<T>> {
    lattice_fold(fields, T::min)
}

fn lattice_fold<T: Scalar>(
    fields: &[ScalarField<T>],
    op: impl Fn(T, T) -> T,
) -> Result<ScalarField<T>> {
    let (first, rest) = fields
        .split_first()
        .ok_or_else(|| Error::Domain("lattice extremum of an empty family".into()))?;
    rest.iter()
        .try_fold(first.clone(), |acc, f| acc.zip_with(f, &op))
}

/// A probability measure `m'` with `m ≪ m' ≪ m`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityReweighting<T> {
    space: Arc<MeasureSpace<T>>,
    probabilities: Vec<T>,
}

impl<T: Scalar> ProbabilityReweighting<T> {
    pub fn new(space: Arc<MeasureSpace<T>>, probabilities: Vec<T>) -> Result<Self> {
        if probabilities.len() != space.len() {
            return Err(Error::Structural(format!(
                "{} probabilities for {} atoms",
                probabilities.len(),
                space.len()
            )));
        }
        if probabilities.iter().any(|&p| !(p > T::zero())) {
            return Err(invalid(
                "reweighting",
                "every atom needs positive probability",
            ));
        }
        let total: T = probabilities.iter().copied().sum();
        let tol = T::lit(1e-12).max(T::epsilon() * T::lit(16.0));
        if (total - T::one()).abs() > tol {
            return Err(invalid("reweighting", format!("probabilities sum to {total}")));
        }
        Ok(ProbabilityReweighting {
            space,
            probabilities,
        })
    }

    /// The normalised base measure `m / m(X)`.
    pub fn normalized(space: Arc<MeasureSpace<T>>) -> Self {
        let total = space.total_mass();
        let probabilities = space.weights().iter().map(|&w| w / total).collect();
        ProbabilityReweighting {
            space,
            probabilities,
        }
    }

    pub fn probabilities(&self) -> &[T] {
        &self.probabilities
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(w: &[f64]) -> Arc<MeasureSpace<f64>> {
        MeasureSpace::from_weights(w.to_vec()).unwrap().into_shared()
    }

    fn field(w: &[f64], v: &[f64]) -> ScalarField<f64> {
        ScalarField::new(space(w), v.to_vec()).unwrap()
    }

    fn p(x: f64) -> Exponent<f64> {
        Exponent::finite(x).unwrap()
    }

    #[test]
    fn lp_norm_examples() {
        assert!((field(&[1.0, 1.0], &[3.0, 4.0]).lp_norm(&p(2.0)) - 5.0).abs() < 1e-12);
        assert!((field(&[1.0, 2.0, 3.0], &[2.0, 2.0, 2.0]).lp_norm(&p(1.0)) - 12.0).abs() < 1e-12);
        assert_eq!(field(&[1.0, 1.0], &[5.0, -12.0]).lp_norm(&Exponent::Infinity), 12.0);
    }

    #[test]
    fn zero_weight_rejected() {
        assert!(MeasureSpace::from_weights(vec![1.0, 0.0]).is_err());
        assert!(MeasureSpace::from_weights(vec![1.0, f64::INFINITY]).is_err());
        assert!(MeasureSpace::new(vec!["a".into(), "a".into()], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn length_mismatch_is_structural() {
        let err = ScalarField::new(space(&[1.0]), vec![1.0, 2.0]).unwrap_err();
        assert!(matches!(err, Error::Structural(_)));
    }

    #[test]
    fn ess_extrema_examples() {
        assert_eq!(field(&[1.0; 3], &[3.0, 1.0, 2.0]).ess_extrema().unwrap(), (1.0, 3.0));
        assert_eq!(field(&[5.0], &[-1.0]).ess_extrema().unwrap(), (-1.0, -1.0));
        assert_eq!(field(&[1.0, 2.0], &[0.0, 0.0]).ess_extrema().unwrap(), (0.0, 0.0));
        let empty = ScalarField::new(space(&[]), vec![]).unwrap();
        assert_eq!(empty.ess_extrema(), Err(Error::UndefinedExtremum));
    }

    #[test]
    fn lattice_sup_examples() {
        let s = space(&[1.0, 1.0]);
        let f = |v: &[f64]| ScalarField::new(s.clone(), v.to_vec()).unwrap();
        assert_eq!(lattice_sup(&[f(&[1.0, 4.0]), f(&[3.0, 2.0])]).unwrap().values(), &[3.0, 4.0]);
        assert_eq!(lattice_sup(&[f(&[0.0, 0.0])]).unwrap().values(), &[0.0, 0.0]);
        assert_eq!(
            lattice_sup(&[f(&[1.0, 2.0]), f(&[1.0, 2.0]), f(&[0.0, 5.0])])
                .unwrap()
                .values(),
            &[1.0, 5.0]
        );
        assert_eq!(lattice_inf(&[f(&[1.0, 4.0]), f(&[3.0, 2.0])]).unwrap().values(), &[1.0, 2.0]);
        let other = field(&[2.0, 1.0], &[0.0, 0.0]);
        assert!(matches!(
            lattice_sup(&[f(&[1.0, 1.0]), other]),
            Err(Error::Structural(_))
        ));
    }

    #[test]
    fn l0_distance_examples() {
        let s = space(&[1.0, 3.0]);
        let half = ProbabilityReweighting::new(s.clone(), vec![0.5, 0.5]).unwrap();
        let g = ScalarField::new(s.clone(), vec![2.0, 0.5]).unwrap();
        assert!((g.l0_distance(&half).unwrap() - 0.75).abs() < 1e-12);
        assert_eq!(ScalarField::zeros(s.clone()).l0_distance(&half).unwrap(), 0.0);
        let one = space(&[4.0]);
        let r = ProbabilityReweighting::new(one.clone(), vec![1.0]).unwrap();
        assert_eq!(ScalarField::new(one, vec![10.0]).unwrap().l0_distance(&r).unwrap(), 1.0);
        let neg = ScalarField::new(s, vec![-1.0, 0.0]).unwrap();
        assert!(matches!(neg.l0_distance(&half), Err(Error::Domain(_))));
    }

    #[test]
    fn reweighting_validation() {
        let s = space(&[1.0, 1.0]);
        assert!(ProbabilityReweighting::new(s.clone(), vec![1.0, 0.0]).is_err());
        assert!(ProbabilityReweighting::new(s.clone(), vec![0.6, 0.6]).is_err());
        let n = ProbabilityReweighting::normalized(space(&[1.0, 3.0]));
        assert_eq!(n.probabilities(), &[0.25, 0.75]);
    }

    #[test]
    fn subsets() {
        let e = AtomSubset::from_mask(4, 0b1010);
        assert_eq!(e.iter().collect::<Vec<_>>(), vec![1, 3]);
        assert_eq!(e.complement().mask(), 0b0101);
        assert_eq!(e.mask(), 0b1010);
        let f = field(&[1.0, 2.0, 3.0, 4.0], &[1.0; 4]);
        assert_eq!(f.integrate_over(&e), 6.0);
    }

    #[test]
    fn works_in_single_precision() {
        let s = MeasureSpace::<f32>::from_weights(vec![1.0, 1.0]).unwrap().into_shared();
        let f = ScalarField::new(s, vec![3.0f32, 4.0]).unwrap();
        assert!((f.lp_norm(&Exponent::finite(2.0f32).unwrap()) - 5.0).abs() < 1e-6);
    }
}

//! Dual sections, the pairings `I` and `θ`, operator norms and the
//! reflexivity diagram.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bundle::{check_shapes, same_bundle, Bundle, Fiber, Section};
use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::measure::ScalarField;
use crate::sample::{gaussian_vec, random_section};
use crate::scalar::{dot, Scalar};

/// One covector per atom: an element of `Γ_q(E′)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DualSection<T: Scalar> {
    bundle: Arc<Bundle<T>>,
    covectors: Vec<Vec<T>>,
}

impl<T: Scalar> DualSection<T> {
    pub fn new(bundle: Arc<Bundle<T>>, covectors: Vec<Vec<T>>) -> Result<Self> {
        check_shapes(&bundle, &covectors, "dual section")?;
        Ok(DualSection { bundle, covectors })
    }

    pub fn zeros(bundle: Arc<Bundle<T>>) -> Self {
        let covectors = bundle.dimensions().into_iter().map(|d| vec![T::zero(); d]).collect();
        DualSection { bundle, covectors }
    }

    pub fn bundle(&self) -> &Arc<Bundle<T>> {
        &self.bundle
    }

    pub fn covectors(&self) -> &[Vec<T>] {
        &self.covectors
    }

    pub fn scale(&self, c: T) -> Self {
        DualSection {
            bundle: self.bundle.clone(),
            covectors: self
                .covectors
                .iter()
                .map(|w| w.iter().map(|&x| c * x).collect())
                .collect(),
        }
    }

    /// `|ω|(x) = ‖ω(x)‖_{E(x)′}`.
    pub fn dual_pointwise_norm(&self) -> ScalarField<T> {
        let values = self
            .covectors
            .iter()
            .zip(self.bundle.fibers())
            .map(|(w, f)| f.dual_norm(w))
            .collect();
        ScalarField::new(self.bundle.space().clone(), values).expect("one value per atom")
    }

    /// `‖ω‖_{Γ_q(E′)}`.
    pub fn gamma_q_norm(&self, q: &Exponent<T>) -> T {
        self.dual_pointwise_norm().lp_norm(q)
    }
}

/// Serialized form shared by sections and dual sections.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SectionRecord<T: Scalar> {
    pub role: SectionRole,
    pub vectors: Vec<Vec<T>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SectionRole {
    Section,
    Dual,
}

impl<T: Scalar> SectionRecord<T> {
    pub fn into_section(self, bundle: Arc<Bundle<T>>) -> Result<Section<T>> {
        match self.role {
            SectionRole::Section => Section::new(bundle, self.vectors),
            SectionRole::Dual => Err(Error::Structural("expected a section, got a dual section".into())),
        }
    }

    pub fn into_dual(self, bundle: Arc<Bundle<T>>) -> Result<DualSection<T>> {
        match self.role {
            SectionRole::Dual => DualSection::new(bundle, self.vectors),
            SectionRole::Section => Err(Error::Structural("expected a dual section, got a section".into())),
        }
    }
}

impl<T: Scalar> From<&Section<T>> for SectionRecord<T> {
    fn from(v: &Section<T>) -> Self {
        SectionRecord {
            role: SectionRole::Section,
            vectors: v.vectors().to_vec(),
        }
    }
}

impl<T: Scalar> From<&DualSection<T>> for SectionRecord<T> {
    fn from(w: &DualSection<T>) -> Self {
        SectionRecord {
            role: SectionRole::Dual,
            vectors: w.covectors().to_vec(),
        }
    }
}

fn pairing_field<T: Scalar>(w: &DualSection<T>, v: &Section<T>) -> Result<ScalarField<T>> {
    if !same_bundle(w.bundle(), v.bundle()) {
        return Err(Error::Structural("section and dual section of different bundles".into()));
    }
    let values = w
        .covectors()
        .iter()
        .zip(v.vectors())
        .map(|(a, b)| dot(a, b))
        .collect();
    ScalarField::new(v.bundle().space().clone(), values)
}

/// `x ↦ ⟨ω(x), v(x)⟩`, the density of `I(ω)` applied to `v`.
pub fn apply_i<T: Scalar>(omega: &DualSection<T>, v: &Section<T>) -> Result<ScalarField<T>> {
    pairing_field(omega, v)
}

/// `x ↦ ⟨ω(x), v(x)⟩`, the density of `θ(v)` applied to `ω`.
pub fn apply_theta<T: Scalar>(v: &Section<T>, omega: &DualSection<T>) -> Result<ScalarField<T>> {
    pairing_field(omega, v)
}

/// `⟨J(v), ω⟩ = ∫ ⟨ω, v⟩ dm`.
pub fn james_pairing<T: Scalar>(v: &Section<T>, omega: &DualSection<T>) -> Result<T> {
    Ok(apply_i(omega, v)?.integral())
}

/// The unit vector of `Γ_p(E)` on which `I(ω)` attains its norm: at each
/// atom a norming vector of `ω(x)` scaled by `(|ω|(x) / ‖ω‖_q)^{q-1}`.
/// `None` when `ω = 0`.
pub fn holder_maximizer<T: Scalar>(omega: &DualSection<T>, p: &Exponent<T>) -> Result<Option<Section<T>>> {
    p.require_reflexive_range()?;
    let q = p.conjugate();
    let qv = q.as_scalar();
    let bundle = omega.bundle();
    let abs = omega.dual_pointwise_norm();
    let total = abs.lp_norm(&q);
    if total == T::zero() {
        return Ok(None);
    }
    let mut vectors = Vec::with_capacity(bundle.len());
    for ((w, f), &a) in omega.covectors().iter().zip(bundle.fibers()).zip(abs.values()) {
        let dir = match f {
            Fiber::Normed(spec) if a > T::zero() => spec.norming_vector(w)?,
            _ => None,
        };
        vectors.push(match dir {
            Some(u) => {
                let mag = (a / total).powf(qv - T::one());
                u.into_iter().map(|c| mag * c).collect()
            }
            None => vec![T::zero(); f.dimension()],
        });
    }
    Section::new(bundle.clone(), vectors).map(Some)
}

/// The dual section of `Γ_q(E′)` norm one on which `θ(v)` attains its norm.
pub fn theta_maximizer<T: Scalar>(v: &Section<T>, p: &Exponent<T>) -> Result<Option<DualSection<T>>> {
    let pv = p.require_reflexive_range()?;
    let bundle = v.bundle();
    let abs = v.pointwise_norm();
    let total = abs.lp_norm(p);
    if total == T::zero() {
        return Ok(None);
    }
    let mut covectors = Vec::with_capacity(bundle.len());
    for ((x, f), &a) in v.vectors().iter().zip(bundle.fibers()).zip(abs.values()) {
        let dir = match f {
            Fiber::Normed(spec) if a > T::zero() => spec.norming_covector(x)?,
            _ => None,
        };
        covectors.push(match dir {
            Some(c) => {
                let mag = (a / total).powf(pv - T::one());
                c.into_iter().map(|t| mag * t).collect()
            }
            None => vec![T::zero(); f.dimension()],
        });
    }
    DualSection::new(bundle.clone(), covectors).map(Some)
}

/// `sup { ∫⟨ω, v⟩ dm : ‖v‖_{Γ_p} ≤ 1 }`, evaluated at the Hölder maximizer.
pub fn operator_norm<T: Scalar>(omega: &DualSection<T>, p: &Exponent<T>) -> Result<T> {
    match holder_maximizer(omega, p)? {
        Some(v) => james_pairing(&v, omega),
        None => Ok(T::zero()),
    }
}

/// `sup { ∫⟨ω, v⟩ dm : ‖ω‖_{Γ_q} ≤ 1 }`, the norm of `θ(v)`.
pub fn theta_norm<T: Scalar>(v: &Section<T>, p: &Exponent<T>) -> Result<T> {
    match theta_maximizer(v, p)? {
        Some(w) => james_pairing(v, &w),
        None => Ok(T::zero()),
    }
}

/// Pointwise norm of `J(v)` in the bidual: at each atom the supremum of
/// `⟨c, v(x)⟩` over dual-unit covectors, attained at a norming covector.
pub fn bidual_pointwise_norm<T: Scalar>(v: &Section<T>) -> Result<ScalarField<T>> {
    let mut values = Vec::with_capacity(v.bundle().len());
    for (x, f) in v.vectors().iter().zip(v.bundle().fibers()) {
        let c = match f {
            Fiber::Normed(spec) => spec.norming_covector(x)?,
            Fiber::Zero => None,
        };
        values.push(c.map_or(T::zero(), |c| dot(&c, x)));
    }
    ScalarField::new(v.bundle().space().clone(), values)
}

/// Residuals of the reflexivity diagram over sampled `(v, T)` pairs.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct DiagramReport<T> {
    pub samples: usize,
    /// `max |⟨((I^{-1})^{ad} ∘ θ)(v), T⟩ − T(v)|`.
    pub max_diagram_residual: T,
    /// `max_x | |J(v)|(x) − |v|(x) |`.
    pub max_bidual_residual: T,
    /// Residual of the constant-bundle chain through `ι_B` and `j_B`, when
    /// the bundle is constant.
    pub constant_chain_residual: Option<T>,
    pub degenerate: bool,
}

/// Recovers `I^{-1}(T)` for a functional on flattened sections by probing
/// it on the basis sections `e_{x,i}`: `ω(x)_i = T(e_{x,i}) / m({x})`.
pub fn invert_i<T: Scalar>(bundle: &Arc<Bundle<T>>, functional: impl Fn(&Section<T>) -> T) -> DualSection<T> {
    let weights = bundle.space().weights();
    let n = bundle.total_dimension();
    let mut covectors: Vec<Vec<T>> = bundle.dimensions().into_iter().map(|d| vec![T::zero(); d]).collect();
    for x in 0..bundle.len() {
        for (i, k) in bundle.slot(x).enumerate() {
            let mut flat = vec![T::zero(); n];
            flat[k] = T::one();
            let e = Section::from_flat(bundle.clone(), &flat).expect("basis section");
            covectors[x][i] = functional(&e) / weights[x];
        }
    }
    DualSection::new(bundle.clone(), covectors).expect("shapes follow the bundle")
}

/// Samples sections `v` and functionals `T ∈ Γ_p(E)*` (random linear maps
/// on the flattened coordinates) and checks `J = (I^{-1})^{ad} ∘ θ` on each
/// pair, together with `|J(v)| = |v|`. For constant bundles the chain
/// `j = (ι_B^{-1})^{ad} ∘ ι_{B′} ∘ j_B` is checked as well.
pub fn check_reflexivity_diagram<T: Scalar>(
    bundle: &Arc<Bundle<T>>,
    p: &Exponent<T>,
    samples: usize,
    seed: u64,
) -> Result<DiagramReport<T>> {
    p.require_reflexive_range()?;
    let degenerate = bundle.is_degenerate();
    let mut report = DiagramReport {
        samples,
        max_diagram_residual: T::zero(),
        max_bidual_residual: T::zero(),
        constant_chain_residual: bundle.constant_fiber().map(|_| T::zero()),
        degenerate,
    };
    if degenerate {
        return Ok(report);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = bundle.total_dimension();
    for _ in 0..samples {
        let v = random_section(bundle, &mut rng);
        let t: Vec<T> = gaussian_vec(n, &mut rng);
        let functional = |s: &Section<T>| dot(&t, &s.flat());
        let tv = functional(&v);

        // θ(v) is a functional on Γ_q(E′); precomposing with I^{-1} gives
        // an element of the bidual of Γ_p(E).
        let omega = invert_i(bundle, functional);
        let theta_v = |w: &DualSection<T>| -> Result<T> { Ok(apply_theta(&v, w)?.integral()) };
        let lhs = theta_v(&omega)?;
        let scale = T::one().max(tv.abs());
        report.max_diagram_residual = report.max_diagram_residual.max((lhs - tv).abs() / scale);

        let abs = v.pointwise_norm();
        let bidual = bidual_pointwise_norm(&v)?;
        for (a, b) in abs.values().iter().zip(bidual.values()) {
            report.max_bidual_residual = report.max_bidual_residual.max((*a - *b).abs());
        }

        if let Some(spec) = bundle.constant_fiber() {
            // j_B sends v(x) to the functional c ↦ ⟨c, v(x)⟩ on B′.
            let j_b = |x: usize| {
                let vx = v.vector(x).to_vec();
                move |c: &[T]| dot(c, &vx)
            };
            // ι_{B′}(F)(ω) = ∫ F(x)(ω(x)) dm, then (ι_B^{-1})^{ad} evaluates
            // the result at ι_B^{-1}(T) = omega.
            let weights = bundle.space().weights();
            let chain: T = (0..bundle.len())
                .map(|x| weights[x] * j_b(x)(&omega.covectors()[x]))
                .sum();
            let mut r = (chain - tv).abs() / scale;
            // j_B is isometric: the B″ norm of j_B(v(x)) is the dual norm of
            // the dual norm.
            let dual = spec.dual_spec();
            for x in 0..bundle.len() {
                r = r.max((dual.dual_norm(v.vector(x)) - spec.norm(v.vector(x))).abs());
            }
            let prev = report.constant_chain_residual.unwrap_or(T::zero());
            report.constant_chain_residual = Some(prev.max(r));
        }
    }
    Ok(report)
}

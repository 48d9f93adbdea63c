//! Executable forms of the equivalence theorems, run over random instances
//! and reported as rows with witnesses.

mod convexity;
mod criterion;
mod duality;
mod hilbert;
mod recipe;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norm::{default_grid, OptimizerBudget};

pub use convexity::{suite_pointwise_equality, suite_uc_qualitative_lower, suite_uc_upper_bound};
pub use criterion::{random_measure_triple, suite_criterion, suite_rn};
pub use duality::suite_duality;
pub use hilbert::suite_hilbert_equivalence;
pub use recipe::{
    fiber_is_hilbert_by_kind, fiber_is_uniformly_convex_by_kind, instance_digest, InstanceRecipe,
    KindWeights,
};

/// The statements the suites exercise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremTag {
    /// Hilbert fibers if and only if `Γ_2` is Hilbert.
    HilbertBundles,
    /// `δ_M(ε) ≤ ess inf δ^pw_M(ε)`.
    ModulusUpperBound,
    /// Pointwise uniform convexity is equivalent to uniform convexity.
    PointwiseUniformConvexity,
    /// Uniformly convex fibers with positive essential infimum give a
    /// uniformly convex `Γ_p`.
    UniformlyConvexBundles,
    /// `δ_{E(x)}(ε) = δ^pw_{Γ_p(E)}(ε)(x)`.
    PointwiseModulusEquality,
    /// `Γ_q(E′)` is isometrically `Γ_p(E)*` through `I`.
    DualOfSectionSpace,
    /// `θ` is an isomorphism.
    ThetaIsomorphism,
    /// `Γ_p(E)` is reflexive.
    Reflexivity,
    /// `L^p(m; B)` reflexive if and only if `B` is.
    BochnerReflexivity,
    /// Set-level power inequality implies the density-level one.
    RadonNikodymInequality,
    /// Norms induced by a pointwise norm are exactly those satisfying 2a/2b.
    InducedNormCriterion,
}

impl TheoremTag {
    pub const ALL: [TheoremTag; 11] = [
        TheoremTag::HilbertBundles,
        TheoremTag::ModulusUpperBound,
        TheoremTag::PointwiseUniformConvexity,
        TheoremTag::UniformlyConvexBundles,
        TheoremTag::PointwiseModulusEquality,
        TheoremTag::DualOfSectionSpace,
        TheoremTag::ThetaIsomorphism,
        TheoremTag::Reflexivity,
        TheoremTag::BochnerReflexivity,
        TheoremTag::RadonNikodymInequality,
        TheoremTag::InducedNormCriterion,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TheoremTag::HilbertBundles => "hilbert_bundles",
            TheoremTag::ModulusUpperBound => "modulus_upper_bound",
            TheoremTag::PointwiseUniformConvexity => "pointwise_uniform_convexity",
            TheoremTag::UniformlyConvexBundles => "uniformly_convex_bundles",
            TheoremTag::PointwiseModulusEquality => "pointwise_modulus_equality",
            TheoremTag::DualOfSectionSpace => "dual_of_section_space",
            TheoremTag::ThetaIsomorphism => "theta_isomorphism",
            TheoremTag::Reflexivity => "reflexivity",
            TheoremTag::BochnerReflexivity => "bochner_reflexivity",
            TheoremTag::RadonNikodymInequality => "radon_nikodym_inequality",
            TheoremTag::InducedNormCriterion => "induced_norm_criterion",
        }
    }
}

impl fmt::Display for TheoremTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Outcome of one row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// A fixture that is supposed to fail did fail.
    ExpectedFail,
    /// Precondition not met; recorded, not checked.
    Excluded,
    /// Informational value, no assertion.
    Info,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::ExpectedFail => "XFAIL",
            Status::Excluded => "EXCLUDED",
            Status::Info => "INFO",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub instance: usize,
    pub digest: String,
    pub check: String,
    /// Parameters of the check, as `key=value` pairs joined by `;`.
    pub params: String,
    pub value: f64,
    pub bound: f64,
    pub status: Status,
}

/// Data needed to replay a failure or an expected failure.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub instance: usize,
    pub digest: String,
    pub check: String,
    pub data: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Pass,
    Fail,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TheoremReport {
    pub suite: String,
    pub tags: Vec<TheoremTag>,
    pub seed: u64,
    /// Hash of every instance digest in order.
    pub digest: String,
    pub instances: usize,
    pub rows: Vec<ReportRow>,
    pub witnesses: Vec<Witness>,
    pub notes: Vec<String>,
    /// No row made an assertion.
    pub vacuous: bool,
    pub verdict: Verdict,
}

/// Accumulates rows and witnesses, then settles the verdict.
pub(crate) struct ReportBuilder {
    suite: String,
    tags: Vec<TheoremTag>,
    seed: u64,
    digests: Vec<String>,
    rows: Vec<ReportRow>,
    witnesses: Vec<Witness>,
    notes: Vec<String>,
}

impl ReportBuilder {
    pub(crate) fn new(suite: &str, tags: &[TheoremTag], seed: u64) -> Self {
        ReportBuilder {
            suite: suite.into(),
            tags: tags.to_vec(),
            seed,
            digests: Vec::new(),
            rows: Vec::new(),
            witnesses: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub(crate) fn instance(&mut self, digest: &str) {
        self.digests.push(digest.to_string());
    }

    pub(crate) fn note(&mut self, note: impl Into<String>) {
        let note = note.into();
        if !self.notes.contains(&note) {
            self.notes.push(note);
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn row(
        &mut self,
        instance: usize,
        digest: &str,
        check: &str,
        params: String,
        value: f64,
        bound: f64,
        status: Status,
    ) {
        self.rows.push(ReportRow {
            instance,
            digest: digest.to_string(),
            check: check.to_string(),
            params,
            value,
            bound,
            status,
        });
    }

    /// Records `value <= bound` as a pass, otherwise a failure with witness.
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn check_le(
        &mut self,
        instance: usize,
        digest: &str,
        check: &str,
        params: String,
        value: f64,
        bound: f64,
        witness: impl FnOnce() -> String,
    ) -> bool {
        let ok = value <= bound;
        if !ok {
            self.witness(instance, digest, check, format!("{params};{}", witness()));
        }
        self.row(instance, digest, check, params, value, bound, if ok { Status::Pass } else { Status::Fail });
        ok
    }

    pub(crate) fn witness(&mut self, instance: usize, digest: &str, check: &str, data: String) {
        self.witnesses.push(Witness {
            instance,
            digest: digest.to_string(),
            check: check.to_string(),
            data,
        });
    }

    pub(crate) fn finish(mut self) -> TheoremReport {
        let digest = {
            use sha2::{Digest, Sha256};
            let mut h = Sha256::new();
            for d in &self.digests {
                h.update(d.as_bytes());
            }
            h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
        };
        let failing: Vec<usize> = self
            .rows
            .iter()
            .filter(|r| r.status == Status::Fail)
            .map(|r| r.instance)
            .collect();
        // Every failure must be replayable; a failure without witness is a
        // defect of the suite itself and is reported as such.
        for r in self.rows.iter().filter(|r| r.status == Status::Fail) {
            let has = self
                .witnesses
                .iter()
                .any(|w| w.instance == r.instance && w.check == r.check);
            if !has {
                self.notes.push(format!(
                    "internal: failing row {} on instance {} lacks a witness",
                    r.check, r.instance
                ));
            }
        }
        let vacuous = !self
            .rows
            .iter()
            .any(|r| matches!(r.status, Status::Pass | Status::Fail | Status::ExpectedFail));
        if vacuous {
            self.note("vacuous: no assertion was made (no applicable instances)");
        }
        let verdict = if failing.is_empty() { Verdict::Pass } else { Verdict::Fail };
        assert!(
            verdict == Verdict::Fail || self.rows.iter().all(|r| r.status != Status::Fail),
            "report assembled as PASS while holding a failing row"
        );
        TheoremReport {
            suite: self.suite,
            tags: self.tags,
            seed: self.seed,
            digest,
            instances: self.digests.len(),
            rows: self.rows,
            witnesses: self.witnesses,
            notes: self.notes,
            vacuous,
            verdict,
        }
    }
}

impl TheoremReport {
    pub fn count(&self, status: Status) -> usize {
        self.rows.iter().filter(|r| r.status == status).count()
    }

    /// Rows of one check.
    pub fn rows_for<'a>(&'a self, check: &'a str) -> impl Iterator<Item = &'a ReportRow> + 'a {
        self.rows.iter().filter(move |r| r.check == check)
    }

    /// Largest value among rows of one check that made an assertion.
    pub fn max_value(&self, check: &str) -> Option<f64> {
        self.rows_for(check)
            .filter(|r| matches!(r.status, Status::Pass | Status::Fail))
            .map(|r| r.value)
            .fold(None, |a, v| Some(a.map_or(v, |a: f64| a.max(v))))
    }
}

/// Settings shared by every suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub recipe: InstanceRecipe,
    pub grid: Vec<f64>,
    /// Budget for fiber-level searches.
    pub budget: OptimizerBudget,
    /// Budget for searches on the flattened section space.
    pub module_budget: OptimizerBudget,
    /// Random section pairs per instance and exponent.
    pub pairs: usize,
    /// Probe sections per instance and exponent in the criterion suite.
    pub probes: usize,
    /// `(v, T)` samples per instance and exponent in the reflexivity diagram.
    pub diagram_samples: usize,
    /// Measure triples in the Radon–Nikodým suite.
    pub rn_triples: usize,
    /// Inclusive atom range for measure triples.
    pub rn_atoms: [usize; 2],
    /// Index at which null sequences are evaluated.
    pub horizon: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            recipe: InstanceRecipe::default(),
            grid: default_grid(),
            budget: OptimizerBudget {
                restarts: 32,
                iterations: 120,
                seed: 0,
            },
            module_budget: OptimizerBudget {
                restarts: 4,
                iterations: 40,
                seed: 0,
            },
            pairs: 4,
            probes: 2,
            diagram_samples: 4,
            rn_triples: 2000,
            rn_atoms: [1, 10],
            horizon: crate::criterion::DEFAULT_HORIZON,
        }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        self.recipe.validate()?;
        if self.grid.is_empty() || self.grid.iter().any(|&e| !(e > 0.0 && e <= 2.0)) {
            return Err(Error::Domain("epsilon grid must be a nonempty subset of (0,2]".into()));
        }
        if self.grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Domain("epsilon grid must be strictly increasing".into()));
        }
        if self.rn_atoms[0] == 0 || self.rn_atoms[0] > self.rn_atoms[1] || self.rn_atoms[1] > crate::criterion::RN_MAX_ATOMS {
            return Err(Error::Domain(format!(
                "rn_atoms must be a range within 1..={}",
                crate::criterion::RN_MAX_ATOMS
            )));
        }
        Ok(())
    }

    /// Seeds every random stream from one value.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.recipe.seed = seed;
        self.budget.seed = seed;
        self.module_budget.seed = seed;
        self
    }
}

/// Selectable suites.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SuiteKind {
    #[serde(rename = "hilbert")]
    Hilbert,
    #[serde(rename = "uc-upper")]
    UcUpper,
    #[serde(rename = "uc-lower")]
    UcLower,
    #[serde(rename = "pointwise")]
    Pointwise,
    #[serde(rename = "duality")]
    Duality,
    #[serde(rename = "criterion")]
    Criterion,
    #[serde(rename = "rn")]
    Rn,
}

impl SuiteKind {
    pub const ALL: [SuiteKind; 7] = [
        SuiteKind::Hilbert,
        SuiteKind::UcUpper,
        SuiteKind::UcLower,
        SuiteKind::Pointwise,
        SuiteKind::Duality,
        SuiteKind::Criterion,
        SuiteKind::Rn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SuiteKind::Hilbert => "hilbert",
            SuiteKind::UcUpper => "uc-upper",
            SuiteKind::UcLower => "uc-lower",
            SuiteKind::Pointwise => "pointwise",
            SuiteKind::Duality => "duality",
            SuiteKind::Criterion => "criterion",
            SuiteKind::Rn => "rn",
        }
    }

    pub fn tags(self) -> &'static [TheoremTag] {
        use TheoremTag::*;
        match self {
            SuiteKind::Hilbert => &[HilbertBundles],
            SuiteKind::UcUpper => &[ModulusUpperBound, UniformlyConvexBundles],
            SuiteKind::UcLower => &[UniformlyConvexBundles, PointwiseUniformConvexity],
            SuiteKind::Pointwise => &[PointwiseModulusEquality],
            SuiteKind::Duality => &[DualOfSectionSpace, ThetaIsomorphism, Reflexivity, BochnerReflexivity],
            SuiteKind::Criterion => &[InducedNormCriterion],
            SuiteKind::Rn => &[RadonNikodymInequality],
        }
    }

    pub fn run(self, config: &SuiteConfig) -> Result<TheoremReport> {
        config.validate()?;
        Ok(match self {
            SuiteKind::Hilbert => suite_hilbert_equivalence(config),
            SuiteKind::UcUpper => suite_uc_upper_bound(config)?,
            SuiteKind::UcLower => suite_uc_qualitative_lower(config)?,
            SuiteKind::Pointwise => suite_pointwise_equality(config)?,
            SuiteKind::Duality => suite_duality(config)?,
            SuiteKind::Criterion => suite_criterion(config)?,
            SuiteKind::Rn => suite_rn(config)?,
        })
    }

    /// Comma-separated list of valid names, `all` included.
    pub fn valid_names() -> String {
        let mut names: Vec<&str> = SuiteKind::ALL.iter().map(|k| k.name()).collect();
        names.push("all");
        names.join(", ")
    }

    /// Parses one name; `all` expands to every suite.
    pub fn parse_list(name: &str) -> Result<Vec<SuiteKind>> {
        if name == "all" {
            return Ok(SuiteKind::ALL.to_vec());
        }
        name.parse().map(|k| vec![k])
    }
}

impl FromStr for SuiteKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SuiteKind::ALL
            .iter()
            .copied()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                Error::Domain(format!(
                    "unknown suite {s:?}; valid suites: {}",
                    SuiteKind::valid_names()
                ))
            })
    }
}

pub(crate) fn fmt_vecs(vs: &[Vec<f64>]) -> String {
    format!("{vs:?}").replace(' ', "")
}

//! The run configuration: one TOML file per run, plus command-line overrides.

use std::path::{Path, PathBuf};

use bundlelab::bundle::Bundle;
use bundlelab::criterion::{ModuleNormSpec, DEFAULT_HORIZON};
use bundlelab::duality::SectionRecord;
use bundlelab::suites::{InstanceRecipe, SuiteConfig};
use bundlelab::{Exponent, NormSpec, OptimizerBudget};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

/// Environment variable that overrides the output directory.
pub const OUT_ENV: &str = "BUNDLELAB_OUT";
pub const DEFAULT_OUT: &str = "bundlelab-out";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    List(Vec<f64>),
    /// `"a:b:step"`, both ends included.
    Range(String),
}

impl Grid {
    pub fn resolve(&self) -> Result<Vec<f64>, CliError> {
        let values = match self {
            Grid::List(v) => v.clone(),
            Grid::Range(s) => parse_range(s)?,
        };
        if values.is_empty() || values.iter().any(|&e| !(e > 0.0 && e <= 2.0)) {
            return Err(CliError::config(format!("grid: every epsilon must lie in (0,2], got {values:?}")));
        }
        if values.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(CliError::config("grid: epsilons must be strictly increasing"));
        }
        Ok(values)
    }
}

pub fn parse_range(s: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::config(format!("grid: expected \"a:b:step\", got {s:?}"));
    let parts: Vec<f64> = s
        .split(':')
        .map(|t| t.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_, _>>()?;
    let [a, b, step] = parts[..] else { return Err(bad()) };
    if !(step > 0.0) || !(b >= a) {
        return Err(bad());
    }
    let count = ((b - a) / step + 1e-9).floor() as usize;
    if count > 100_000 {
        return Err(CliError::config("grid: more than 100000 points"));
    }
    // rounding keeps 0.1 + 2·0.1 from printing as 0.30000000000000004
    Ok((0..=count)
        .map(|k| ((a + k as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

/// Where a command finds its bundle: inline, in a file, or from a recipe.
macro_rules! bundle_source_fields {
    ($name:ident { $($body:tt)* }) => {
        #[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
        #[serde(default, deny_unknown_fields)]
        pub struct $name {
            #[serde(skip_serializing_if = "Option::is_none")]
            pub bundle: Option<Bundle<f64>>,
            /// TOML file holding a bundle, relative to the config file.
            #[serde(skip_serializing_if = "Option::is_none")]
            pub bundle_file: Option<PathBuf>,
            #[serde(skip_serializing_if = "Option::is_none")]
            pub recipe: Option<InstanceRecipe>,
            /// Which recipe instance to use.
            pub instance: usize,
            $($body)*
        }

        impl $name {
            fn inline(&mut self, base: &Path) -> Result<(), CliError> {
                inline_bundle(&mut self.bundle, &mut self.bundle_file, base)
            }

            /// The bundle, with a recipe reseeded from the run seed.
            pub fn resolve_bundle(&self, seed: u64) -> Result<Option<Bundle<f64>>, CliError> {
                resolve_bundle(&self.bundle, &self.recipe, self.instance, seed)
            }
        }
    };
}

fn inline_bundle(bundle: &mut Option<Bundle<f64>>, file: &mut Option<PathBuf>, base: &Path) -> Result<(), CliError> {
    if let Some(path) = file.take() {
        let path = base.join(path);
        let text = read(&path)?;
        let b: Bundle<f64> = toml::from_str(&text).map_err(|e| CliError::parse(&path.display().to_string(), e))?;
        if bundle.replace(b).is_some() {
            return Err(CliError::config("give either bundle or bundle_file, not both"));
        }
    }
    Ok(())
}

fn resolve_bundle(
    bundle: &Option<Bundle<f64>>,
    recipe: &Option<InstanceRecipe>,
    instance: usize,
    seed: u64,
) -> Result<Option<Bundle<f64>>, CliError> {
    match (bundle, recipe) {
        (Some(_), Some(_)) => Err(CliError::config("give either a bundle or a recipe, not both")),
        (Some(b), None) => Ok(Some(b.clone())),
        (None, Some(r)) => {
            let mut r = r.clone();
            r.seed = seed;
            r.validate()?;
            Ok(Some(r.instance(instance)))
        }
        (None, None) => Ok(None),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

bundle_source_fields!(ModulusInput {
    /// A single norm; exclusive with a bundle.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norm: Option<NormSpec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// Also trace the modulus of `Γ_p` for a bundle.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<Exponent<f64>>,
});

impl Default for ModulusInput {
    fn default() -> Self {
        ModulusInput {
            bundle: None,
            bundle_file: None,
            recipe: None,
            instance: 0,
            norm: None,
            label: None,
            p: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteInput {
    /// Suite names, or `all`.
    pub suites: Vec<String>,
    pub settings: SuiteConfig,
}

impl Default for SuiteInput {
    fn default() -> Self {
        SuiteInput {
            suites: vec!["all".into()],
            settings: SuiteConfig::default(),
        }
    }
}

bundle_source_fields!(DualCheckInput {
    pub p: Exponent<f64>,
    /// Explicit sections and dual sections to check.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub sections: Vec<SectionRecord<f64>>,
    /// Sections as `atom c_1 … c_d` column text.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub section_columns: Vec<String>,
    /// Column files, relative to the config; inlined into `section_columns`.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub section_files: Vec<PathBuf>,
    /// Random `(v, ω)` pairs and diagram samples drawn in addition.
    pub samples: usize,
});

impl Default for DualCheckInput {
    fn default() -> Self {
        DualCheckInput {
            bundle: None,
            bundle_file: None,
            recipe: None,
            instance: 0,
            p: Exponent::finite(2.0).expect("2 is an exponent"),
            sections: Vec::new(),
            section_columns: Vec::new(),
            section_files: Vec::new(),
            samples: 100,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expectation {
    Induced,
    NotInduced,
}

bundle_source_fields!(CriterionInput {
    /// The norm under test.
    pub norm: ModuleNormSpec<f64>,
    pub p: Exponent<f64>,
    pub probes: usize,
    pub horizon: u64,
    /// Expected outcome; a mismatch is an unexpected failure.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expect: Option<Expectation>,
});

impl Default for CriterionInput {
    fn default() -> Self {
        let p = Exponent::finite(2.0).expect("2 is an exponent");
        CriterionInput {
            bundle: None,
            bundle_file: None,
            recipe: None,
            instance: 0,
            norm: ModuleNormSpec::Induced { p },
            p,
            probes: 8,
            horizon: DEFAULT_HORIZON,
            expect: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<Grid>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<OptimizerBudget>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub modulus: Option<ModulusInput>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suite: Option<SuiteInput>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dual_check: Option<DualCheckInput>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub criterion: Option<CriterionInput>,
}

impl RunConfig {
    /// Reads a config file and inlines every file it points to, so the
    /// result is self-contained.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = read(path)?;
        let mut config: RunConfig = toml::from_str(&text).map_err(|e| CliError::parse(&path.display().to_string(), e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let Some(m) = &mut config.modulus {
            m.inline(base)?;
        }
        if let Some(c) = &mut config.criterion {
            c.inline(base)?;
        }
        if let Some(d) = &mut config.dual_check {
            d.inline(base)?;
            for f in std::mem::take(&mut d.section_files) {
                d.section_columns.push(read(&base.join(f))?);
            }
        }
        Ok(config)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    /// The grid, resolved; the default grid when absent.
    pub fn grid(&self) -> Result<Vec<f64>, CliError> {
        match &self.grid {
            Some(g) => g.resolve(),
            None => Ok(bundlelab::norm::default_grid()),
        }
    }

    /// The config as it will be replayed: overrides applied, grid listed,
    /// output directory dropped.
    pub fn canonical(&self) -> Result<RunConfig, CliError> {
        let mut c = self.clone();
        c.seed = Some(self.seed());
        c.grid = Some(Grid::List(self.grid()?));
        c.budget = Some(OptimizerBudget {
            seed: self.seed(),
            ..self.budget.unwrap_or_default()
        });
        c.out = None;
        Ok(c)
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::config(format!("cannot serialize config: {e}")))
    }

    /// Short hash of the canonical TOML text.
    pub fn digest(&self) -> Result<String, CliError> {
        let text = self.canonical()?.to_toml()?;
        let h = Sha256::digest(text.as_bytes());
        Ok(h.iter().take(8).map(|b| format!("{b:02x}")).collect())
    }
}

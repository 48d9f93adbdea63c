//! The four commands. Each writes its tables into the output directory and
//! returns the exit status.

use std::sync::Arc;

use bundlelab::bundle::{fiber_curves, Bundle, GammaNorm, Section};
use bundlelab::criterion::{
    check_condition_2a, check_condition_2b, reconstruct_pointwise_norm, AbstractModuleNorm, CONDITION_2A_TOL,
    CONDITION_2B_TOL,
};
use bundlelab::duality::{
    bidual_pointwise_norm, check_reflexivity_diagram, holder_maximizer, james_pairing, operator_norm, theta_norm,
    DualSection, SectionRole,
};
use bundlelab::norm::{derive_seed, modulus_curve, ModulusCurve};
use bundlelab::sample::{random_dual_section, random_section};
use bundlelab::suites::{instance_digest, SuiteKind, TheoremReport, Verdict};
use bundlelab::{Exponent, OptimizerBudget};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::config::{Expectation, RunConfig};
use crate::output::{self, num, vector, OutDir, Table};
use crate::CliError;

/// Tolerance of the dual-check residuals.
pub const DUAL_CHECK_TOL: f64 = 1e-6;

/// What a command reports back.
#[derive(Debug, Default)]
pub struct Outcome {
    pub code: i32,
    /// Lines for standard output.
    pub lines: Vec<String>,
    pub reports: Vec<TheoremReport>,
}

fn short_hash(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().take(8).map(|b| format!("{b:02x}")).collect()
}

fn pass(ok: bool) -> String {
    if ok { "PASS" } else { "FAIL" }.into()
}

fn budget(config: &RunConfig) -> OptimizerBudget {
    OptimizerBudget {
        seed: config.seed(),
        ..config.budget.unwrap_or_default()
    }
}

const MODULUS_HEADER: &[&str] = &[
    "curve", "digest", "seed", "epsilon", "delta", "raw_delta", "witness_v", "witness_w",
];

fn push_curve(table: &mut Table, out: &mut OutDir, curve: &ModulusCurve<f64>, digest: &str, seed: u64) -> Result<(), CliError> {
    for i in 0..curve.epsilons.len() {
        let (v, w) = &curve.witnesses[i];
        table.push(vec![
            curve.label.clone(),
            digest.into(),
            seed.to_string(),
            num(curve.epsilons[i]),
            num(curve.deltas[i]),
            num(curve.raw_deltas[i]),
            vector(v),
            vector(w),
        ]);
    }
    out.write(
        &format!("modulus_{}.dat", output::file_stem(&curve.label)),
        &output::plot_data(&curve.epsilons, &curve.deltas),
    )?;
    Ok(())
}

/// The constant curve `δ ≡ 1` of a zero fiber, or any pointwise minimum.
fn synthetic_curve(label: String, epsilons: &[f64], deltas: Vec<f64>, budget: OptimizerBudget) -> ModulusCurve<f64> {
    ModulusCurve {
        label,
        epsilons: epsilons.to_vec(),
        raw_deltas: deltas.clone(),
        deltas,
        witnesses: vec![(Vec::new(), Vec::new()); epsilons.len()],
        budget,
    }
}

pub fn modulus(config: &RunConfig, out: &mut OutDir) -> Result<Outcome, CliError> {
    let input = config
        .modulus
        .as_ref()
        .ok_or_else(|| CliError::config("modulus: the config needs a [modulus] table"))?;
    let grid = config.grid()?;
    let budget = budget(config);
    let seed = config.seed();
    let mut table = Table::new(MODULUS_HEADER);
    let mut lines = Vec::new();
    match (&input.norm, input.resolve_bundle(seed)?) {
        (Some(_), Some(_)) => return Err(CliError::config("modulus: give either a norm or a bundle, not both")),
        (None, None) => return Err(CliError::config("modulus: give a norm, a bundle or a recipe")),
        (Some(spec), None) => {
            let label = input.label.clone().unwrap_or_else(|| spec.label());
            let digest = short_hash(toml::to_string(spec).unwrap_or_default().as_bytes());
            let curve = modulus_curve(spec, label, &grid, &budget)?;
            push_curve(&mut table, out, &curve, &digest, seed)?;
            lines.push(format!("{}: {} points", curve.label, grid.len()));
        }
        (None, Some(bundle)) => {
            let digest = instance_digest(&bundle);
            let curves = fiber_curves(&bundle, &grid, &budget)?;
            let mut ess_inf = vec![1.0; grid.len()];
            for (x, c) in curves.into_iter().enumerate() {
                let atom = &bundle.space().atoms()[x];
                let curve = match c {
                    Some(mut c) => {
                        c.label = format!("atom_{atom}");
                        c
                    }
                    None => synthetic_curve(format!("atom_{atom}"), &grid, vec![1.0; grid.len()], budget),
                };
                for (m, d) in ess_inf.iter_mut().zip(&curve.deltas) {
                    *m = f64::min(*m, *d);
                }
                push_curve(&mut table, out, &curve, &digest, seed)?;
            }
            push_curve(&mut table, out, &synthetic_curve("ess_inf".into(), &grid, ess_inf, budget), &digest, seed)?;
            if let Some(p) = input.p {
                if bundle.total_dimension() == 0 {
                    lines.push("every fiber is zero: Γ_p is the zero space, no curve traced".into());
                } else {
                    let gamma = GammaNorm::new(&bundle, p);
                    let curve = modulus_curve(&gamma, format!("gamma_p={p}"), &grid, &budget)?;
                    push_curve(&mut table, out, &curve, &digest, seed)?;
                }
            }
            lines.push(format!("bundle {digest}: {} atoms, {} points per curve", bundle.len(), grid.len()));
        }
    }
    out.write("modulus.csv", &table.render())?;
    Ok(Outcome {
        code: 0,
        lines,
        reports: Vec::new(),
    })
}

pub fn suite(config: &RunConfig, names: Option<&str>, out: &mut OutDir) -> Result<Outcome, CliError> {
    let input = config.suite.clone().unwrap_or_default();
    let mut settings = input.settings.with_seed(config.seed());
    if config.grid.is_some() {
        settings.grid = config.grid()?;
    }
    if let Some(b) = config.budget {
        settings.budget = OptimizerBudget { seed: config.seed(), ..b };
    }
    settings.validate()?;
    let requested: Vec<String> = match names {
        Some(list) => list.split(',').map(|s| s.trim().to_string()).collect(),
        None => input.suites.clone(),
    };
    let mut kinds: Vec<SuiteKind> = Vec::new();
    for name in &requested {
        let parsed = SuiteKind::parse_list(name).map_err(|_| {
            CliError::config(format!("unknown suite {name:?}; valid suites: {}", SuiteKind::valid_names()))
        })?;
        for k in parsed {
            if !kinds.contains(&k) {
                kinds.push(k);
            }
        }
    }
    if kinds.is_empty() {
        return Err(CliError::config(format!("no suite requested; valid suites: {}", SuiteKind::valid_names())));
    }
    let mut witnesses = Table::new(output::WITNESS_HEADER);
    let mut outcome = Outcome::default();
    for kind in kinds {
        let report = kind.run(&settings)?;
        out.write(&format!("suite_{}.csv", kind.name()), &output::suite_table(&report).render())?;
        output::witness_rows(&mut witnesses, &report, &report.witnesses);
        outcome.lines.push(format!(
            "{}: {} ({} rows, {} instances)",
            report.suite,
            if report.verdict == Verdict::Pass { "PASS" } else { "FAIL" },
            report.rows.len(),
            report.instances
        ));
        if report.verdict == Verdict::Fail {
            outcome.code = 1;
        }
        outcome.reports.push(report);
    }
    out.write("witnesses.csv", &witnesses.render())?;
    Ok(outcome)
}

const DUAL_HEADER: &[&str] = &["digest", "seed", "source", "index", "check", "value", "bound", "status"];

struct DualRows<'a> {
    table: Table,
    digest: &'a str,
    seed: u64,
    worst: f64,
}

impl DualRows<'_> {
    fn push(&mut self, source: &str, index: usize, check: &str, value: f64, bound: f64) {
        let ok = value <= bound;
        if !ok || value.is_nan() {
            self.worst = f64::max(self.worst, if value.is_nan() { f64::INFINITY } else { value });
        }
        self.table.push(vec![
            self.digest.into(),
            self.seed.to_string(),
            source.into(),
            index.to_string(),
            check.into(),
            num(value),
            num(bound),
            pass(ok),
        ]);
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / f64::max(1.0, b.abs())
}

/// `|‖I(ω)‖ − ‖ω‖_q|`, together with the unit norm of the maximizer.
fn isometry_i(omega: &DualSection<f64>, p: &Exponent<f64>) -> Result<f64, CliError> {
    let target = omega.gamma_q_norm(&p.conjugate());
    let mut r = rel(operator_norm(omega, p)?, target);
    if let Some(v) = holder_maximizer(omega, p)? {
        r = r.max((v.gamma_p_norm(p) - 1.0).abs());
    }
    Ok(r)
}

/// `max(0, ∫⟨ω, v⟩ − ‖ω‖_q ‖v‖_p)`, relative.
fn holder_excess(omega: &DualSection<f64>, v: &Section<f64>, p: &Exponent<f64>) -> Result<f64, CliError> {
    let bound = omega.gamma_q_norm(&p.conjugate()) * v.gamma_p_norm(p);
    Ok(f64::max(0.0, james_pairing(v, omega)? - bound) / f64::max(1.0, bound))
}

fn section_checks(rows: &mut DualRows, source: &str, k: usize, v: &Section<f64>, p: &Exponent<f64>) -> Result<(), CliError> {
    rows.push(source, k, "isometry_theta", rel(theta_norm(v, p)?, v.gamma_p_norm(p)), DUAL_CHECK_TOL);
    let abs = v.pointwise_norm();
    let bidual = bidual_pointwise_norm(v)?;
    let r = abs
        .values()
        .iter()
        .zip(bidual.values())
        .fold(0.0, |m, (a, b)| f64::max(m, (a - b).abs()));
    rows.push(source, k, "bidual_pointwise_norm", r, DUAL_CHECK_TOL);
    Ok(())
}

fn dual_checks(rows: &mut DualRows, source: &str, k: usize, w: &DualSection<f64>, p: &Exponent<f64>) -> Result<(), CliError> {
    rows.push(source, k, "isometry_i", isometry_i(w, p)?, DUAL_CHECK_TOL);
    if let Some(v) = holder_maximizer(w, p)? {
        let target = w.gamma_q_norm(&p.conjugate());
        rows.push(source, k, "holder_equality", rel(james_pairing(&v, w)?, target), DUAL_CHECK_TOL);
    }
    Ok(())
}

pub fn dual_check(config: &RunConfig, out: &mut OutDir) -> Result<Outcome, CliError> {
    let input = config
        .dual_check
        .as_ref()
        .ok_or_else(|| CliError::config("dual-check: the config needs a [dual_check] table"))?;
    let p = input.p;
    p.require_reflexive_range()?;
    let seed = config.seed();
    let bundle: Arc<Bundle<f64>> = input
        .resolve_bundle(seed)?
        .ok_or_else(|| CliError::config("dual-check: give a bundle or a recipe"))?
        .into_shared();
    let digest = instance_digest(&bundle);
    let mut rows = DualRows {
        table: Table::new(DUAL_HEADER),
        digest: &digest,
        seed,
        worst: 0.0,
    };
    for (k, record) in input.sections.iter().enumerate() {
        match record.role {
            SectionRole::Section => {
                let v = record.clone().into_section(bundle.clone())?;
                section_checks(&mut rows, "explicit", k, &v, &p)?;
            }
            SectionRole::Dual => {
                let w = record.clone().into_dual(bundle.clone())?;
                dual_checks(&mut rows, "explicit", k, &w, &p)?;
            }
        }
    }
    for (k, text) in input.section_columns.iter().enumerate() {
        let v = Section::from_columns(bundle.clone(), text)?;
        section_checks(&mut rows, "columns", k, &v, &p)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0xD0A1));
    if !bundle.is_degenerate() {
        for k in 0..input.samples {
            let v = random_section(&bundle, &mut rng);
            let w = random_dual_section(&bundle, &mut rng);
            section_checks(&mut rows, "sampled", k, &v, &p)?;
            dual_checks(&mut rows, "sampled", k, &w, &p)?;
            rows.push("sampled", k, "holder_inequality", holder_excess(&w, &v, &p)?, DUAL_CHECK_TOL);
        }
    }
    let diagram = check_reflexivity_diagram(&bundle, &p, input.samples, derive_seed(seed, 0xD1A6))?;
    rows.push("diagram", 0, "reflexivity_diagram", diagram.max_diagram_residual, DUAL_CHECK_TOL);
    rows.push("diagram", 0, "bidual_pointwise_norm", diagram.max_bidual_residual, DUAL_CHECK_TOL);
    if let Some(r) = diagram.constant_chain_residual {
        rows.push("diagram", 0, "constant_bundle_chain", r, DUAL_CHECK_TOL);
    }
    let worst = rows.worst;
    let count = rows.table.len();
    out.write("dual_check.csv", &rows.table.render())?;
    let mut lines = vec![format!("bundle {digest}, p = {p}: {count} residuals")];
    if bundle.is_degenerate() {
        lines.push("every fiber is zero: both sides are the zero space".into());
    }
    let code = if worst > 0.0 {
        lines.push(format!("residual {worst:e} exceeds tolerance {DUAL_CHECK_TOL:e}"));
        1
    } else {
        0
    };
    Ok(Outcome {
        code,
        lines,
        reports: Vec::new(),
    })
}

const CRITERION_HEADER: &[&str] = &[
    "digest", "seed", "norm", "p", "check", "probe", "subset", "value", "bound", "status",
];

pub fn criterion(config: &RunConfig, out: &mut OutDir) -> Result<Outcome, CliError> {
    let input = config
        .criterion
        .as_ref()
        .ok_or_else(|| CliError::config("criterion: the config needs a [criterion] table"))?;
    let seed = config.seed();
    let p = input.p;
    if p.value().is_none() {
        return Err(CliError::config("criterion: the exponent must be finite"));
    }
    if input.probes == 0 {
        return Err(CliError::config("criterion: probes must be positive"));
    }
    let bundle = input
        .resolve_bundle(seed)?
        .ok_or_else(|| CliError::config("criterion: give a bundle or a recipe"))?
        .into_shared();
    let digest = instance_digest(&bundle);
    let norm = AbstractModuleNorm::from_spec(bundle.clone(), input.norm.clone(), seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0xC417));
    let probes: Vec<Section<f64>> = (0..input.probes).map(|_| random_section(&bundle, &mut rng)).collect();

    let label = norm.label().to_string();
    let mut table = Table::new(CRITERION_HEADER);
    let mut row = |check: &str, probe: String, subset: String, value: f64, bound: f64, status: String| {
        table.push(vec![
            digest.clone(),
            seed.to_string(),
            label.clone(),
            p.to_string(),
            check.into(),
            probe,
            subset,
            num(value),
            num(bound),
            status,
        ]);
    };

    let a = check_condition_2a(&norm, &p, &probes, seed)?;
    for r in &a.rows {
        row("2a", r.probe.to_string(), r.subset.clone(), r.residual, CONDITION_2A_TOL, pass(r.residual <= CONDITION_2A_TOL));
    }
    let b = check_condition_2b(&norm, &probes, seed, input.horizon)?;
    for r in &b.rows {
        row(
            "2b",
            String::new(),
            format!("{}@{}", r.sequence, r.horizon),
            r.value,
            CONDITION_2B_TOL,
            pass(r.value <= CONDITION_2B_TOL),
        );
    }
    let induced = a.pass && b.pass;
    if a.pass {
        // the reconstructed pointwise norm must give back the norm itself
        for (k, v) in probes.iter().enumerate() {
            let rec = reconstruct_pointwise_norm(&norm, &p, v)?;
            let n = norm.norm(v)?;
            let r = rel(rec.lp_norm(&p), n);
            row("reconstruct", k.to_string(), String::new(), r, CONDITION_2A_TOL, pass(r <= CONDITION_2A_TOL));
            let drift = rec
                .values()
                .iter()
                .zip(v.pointwise_norm().values())
                .fold(0.0, |m, (x, y)| f64::max(m, (x - y).abs()));
            row("fiber_drift", k.to_string(), String::new(), drift, f64::NAN, "INFO".into());
        }
    }
    out.write("criterion.csv", &table.render())?;

    let mut lines = vec![format!(
        "{label} on bundle {digest}: {}",
        if induced { "induced by a bundle" } else { "not induced by any bundle" }
    )];
    if let Some(w) = &a.witness {
        lines.push(format!("2a fails at probe {} on subset {} (residual {:e})", w.probe, w.subset, w.residual));
    }
    let code = match input.expect {
        Some(Expectation::Induced) if !induced => 1,
        Some(Expectation::NotInduced) if induced => 1,
        _ => 0,
    };
    Ok(Outcome {
        code,
        lines,
        reports: Vec::new(),
    })
}

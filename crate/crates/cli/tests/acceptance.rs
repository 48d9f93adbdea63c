//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::fs;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use bundlelab::bundle::{Bundle, Section};
use bundlelab::criterion::{
    check_condition_2a, check_rn_inequality, reconstruct_pointwise_norm, AbstractModuleNorm, ModuleNormSpec,
};
use bundlelab::duality::{check_reflexivity_diagram, holder_maximizer, james_pairing, operator_norm};
use bundlelab::norm::{default_grid, derive_seed, modulus_curve};
use bundlelab::sample::{random_dual_section, random_section};
use bundlelab::suites::{
    random_measure_triple, suite_hilbert_equivalence, suite_uc_upper_bound, InstanceRecipe, Status, SuiteConfig,
    Verdict,
};
use bundlelab::{Exponent, MeasureSpace, NormSpec, OptimizerBudget};
use bundlelab_cli::Cli;
use clap::Parser;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn e(p: f64) -> Exponent<f64> {
    Exponent::finite(p).unwrap()
}

fn criterion_1() -> Outcome {
    let grid: Vec<f64> = default_grid();
    let mut worst: f64 = 0.0;
    let mut slowest: f64 = 0.0;
    for d in [2, 3] {
        let start = Instant::now();
        let curve = modulus_curve(&NormSpec::euclidean(d), "euclid", &grid, &OptimizerBudget::default()).unwrap();
        slowest = slowest.max(start.elapsed().as_secs_f64());
        for (eps, delta) in curve.epsilons.iter().zip(&curve.deltas) {
            worst = worst.max((delta - (1.0 - (1.0 - eps * eps / 4.0).sqrt())).abs());
        }
    }
    outcome(
        worst <= 1e-3 && slowest < 10.0,
        format!("max |delta - closed form| = {worst:.2e} (tol 1e-3), slowest spec {slowest:.2}s (limit 10s)"),
    )
}

fn criterion_2() -> Outcome {
    let grid: Vec<f64> = default_grid();
    let mut worst: f64 = 0.0;
    let mut witnesses_ok = true;
    for p in [Exponent::one(), Exponent::Infinity] {
        let spec = NormSpec::lp(p, 2);
        let curve = modulus_curve(&spec, "flat", &grid, &OptimizerBudget::default()).unwrap();
        for (k, delta) in curve.deltas.iter().enumerate() {
            worst = worst.max(*delta);
            let (v, w) = &curve.witnesses[k];
            let diff: Vec<f64> = v.iter().zip(w).map(|(a, b)| a - b).collect();
            witnesses_ok &= (spec.norm(v) - 1.0).abs() <= 1e-9
                && (spec.norm(w) - 1.0).abs() <= 1e-9
                && spec.norm(&diff) >= curve.epsilons[k] - 1e-9;
        }
    }
    outcome(
        worst <= 1e-9 && witnesses_ok,
        format!("max delta over l1, linf = {worst:.2e} (tol 1e-9), witness pairs feasible: {witnesses_ok}"),
    )
}

fn criterion_3() -> Outcome {
    let config = SuiteConfig {
        recipe: InstanceRecipe {
            seed: 3,
            instances: 220,
            ..InstanceRecipe::default()
        },
        ..SuiteConfig::default()
    };
    let report = suite_hilbert_equivalence(&config);
    let classified = report.rows_for("gamma2_parallelogram").count();
    let localized = report.rows_for("localized_witness").count();
    let min_localized = report
        .rows_for("localized_witness")
        .map(|r| r.value)
        .fold(f64::INFINITY, f64::min);
    let fails = report.count(Status::Fail);
    outcome(
        report.verdict == Verdict::Pass && fails == 0 && classified >= 200 && min_localized > 0.0,
        format!(
            "{classified} bundles classified, {fails} misclassifications, {localized} localized witnesses (min defect {min_localized:.2e})"
        ),
    )
}

fn criterion_4() -> Outcome {
    let config = SuiteConfig {
        recipe: InstanceRecipe {
            seed: 4,
            instances: 100,
            exponents: vec![e(1.5), e(2.0), e(3.0)],
            ..InstanceRecipe::default()
        },
        ..SuiteConfig::default()
    }
    .with_seed(4);
    let report = suite_uc_upper_bound(&config).unwrap();
    let rows: Vec<_> = report.rows_for("modulus_upper_bound").collect();
    let violations = rows.iter().filter(|r| r.status == Status::Fail).count();
    let worst = rows.iter().map(|r| r.value - r.bound).fold(f64::NEG_INFINITY, f64::max);
    outcome(
        violations == 0 && report.instances >= 100,
        format!(
            "{} (instance, p, eps) checks over {} instances, {violations} violations, max delta_G - (min_x delta_x + 2e-3) = {worst:.2e}",
            rows.len(),
            report.instances
        ),
    )
}

fn random_exponent(rng: &mut impl Rng) -> Exponent<f64> {
    match rng.random_range(0..4) {
        0 => e(1.5),
        1 => e(2.0),
        2 => e(3.0),
        _ => e(rng.random_range(1.1..6.0)),
    }
}

fn criterion_5() -> Outcome {
    let recipe = InstanceRecipe {
        seed: 5,
        instances: 1200,
        atoms: [1, 4],
        ..InstanceRecipe::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut triples, mut iso, mut holder_eq, mut holder_ineq) = (0usize, 0.0f64, 0.0f64, 0.0f64);
    for i in 0..recipe.instances {
        let bundle = recipe.instance(i).into_shared();
        if bundle.is_degenerate() {
            continue;
        }
        let p = random_exponent(&mut rng);
        let q = p.conjugate();
        let omega = random_dual_section(&bundle, &mut rng);
        let target = omega.gamma_q_norm(&q);
        iso = iso.max((operator_norm(&omega, &p).unwrap() - target).abs());
        match holder_maximizer(&omega, &p).unwrap() {
            Some(v) => {
                holder_eq = holder_eq.max((james_pairing(&v, &omega).unwrap() - target * v.gamma_p_norm(&p)).abs())
            }
            // sparse draws can zero every atom: the zero functional
            None => holder_eq = holder_eq.max(target),
        }
        // no section beats the closed form
        for _ in 0..16 {
            let u = random_section(&bundle, &mut rng);
            let excess = james_pairing(&u, &omega).unwrap() - target * u.gamma_p_norm(&p);
            holder_ineq = holder_ineq.max(excess / target.max(1.0));
        }
        triples += 1;
    }
    outcome(
        triples >= 1000 && iso <= 1e-6 && holder_eq <= 1e-9 && holder_ineq <= 1e-12,
        format!(
            "{triples} triples, max |opnorm - |omega|_q| = {iso:.2e} (tol 1e-6), Hölder equality residual {holder_eq:.2e} (tol 1e-9), max excess of random sections {holder_ineq:.2e}"
        ),
    )
}

fn constant_bundle(n: usize, spec: NormSpec<f64>, rng: &mut impl Rng) -> Arc<Bundle<f64>> {
    let weights: Vec<f64> = (0..n).map(|_| rng.random_range(0.25..2.0)).collect();
    let space = MeasureSpace::from_weights(weights).unwrap().into_shared();
    Bundle::constant(space, spec).into_shared()
}

fn criterion_6() -> Outcome {
    let recipe = InstanceRecipe {
        seed: 6,
        instances: 100,
        constant_fraction: 0.3,
        ..InstanceRecipe::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut bundles: Vec<Arc<Bundle<f64>>> = recipe.generate();
    for k in 0..20 {
        let spec = match k % 4 {
            0 => NormSpec::euclidean(2),
            1 => NormSpec::lp(e(3.0), 3),
            2 => NormSpec::lp(Exponent::one(), 2),
            _ => NormSpec::lp(Exponent::Infinity, 2),
        };
        bundles.push(constant_bundle(1 + k % 4, spec, &mut rng));
    }
    let (mut samples, mut constant_samples, mut diagram, mut bidual, mut chain) = (0, 0, 0.0f64, 0.0f64, 0.0f64);
    for (i, bundle) in bundles.iter().enumerate() {
        if bundle.is_degenerate() {
            continue;
        }
        let p = random_exponent(&mut rng);
        let r = check_reflexivity_diagram(bundle, &p, 10, derive_seed(6, i as u64)).unwrap();
        samples += r.samples;
        diagram = diagram.max(r.max_diagram_residual);
        bidual = bidual.max(r.max_bidual_residual);
        if let Some(c) = r.constant_chain_residual {
            constant_samples += r.samples;
            chain = chain.max(c);
        }
    }
    outcome(
        samples >= 1000 && constant_samples > 0 && diagram <= 1e-9 && bidual <= 1e-9 && chain <= 1e-9,
        format!(
            "{samples} (v, T) pairs ({constant_samples} on constant bundles), diagram residual {diagram:.2e}, bidual {bidual:.2e}, constant chain {chain:.2e} (tol 1e-9)"
        ),
    )
}

fn criterion_7() -> Outcome {
    let recipe = InstanceRecipe {
        seed: 7,
        instances: 600,
        atoms: [1, 5],
        ..InstanceRecipe::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut cases, mut worst) = (0usize, 0.0f64);
    let (mut applicable, mut fixture_misses, mut mismatch_misses, mut excluded) = (0usize, 0usize, 0usize, 0usize);
    for i in 0..recipe.instances {
        let bundle = recipe.instance(i).into_shared();
        if bundle.is_degenerate() {
            continue;
        }
        let p = [e(1.5), e(2.0), e(3.0)][i % 3];
        let p_prime = [e(3.0), e(3.0), e(1.5)][i % 3];
        let v: Section<f64> = random_section(&bundle, &mut rng);
        let induced = AbstractModuleNorm::induced(bundle.clone(), p);
        let abs = v.pointwise_norm();
        let rec = reconstruct_pointwise_norm(&induced, &p, &v).unwrap();
        for (a, r) in abs.values().iter().zip(rec.values()) {
            worst = worst.max((a - r).abs() / a.max(1.0));
        }
        cases += 1;

        let positive = abs.values().iter().filter(|&&a| a > 0.0).count();
        let mut distinct: Vec<f64> = abs.values().to_vec();
        distinct.sort_by(f64::total_cmp);
        distinct.dedup();
        if positive < 2 {
            // 2a holds for every exponent when at most one atom carries mass
            if distinct.len() >= 2 {
                excluded += 1;
            }
            continue;
        }
        applicable += 1;
        let probe = std::slice::from_ref(&v);
        let has_witness = |spec: ModuleNormSpec<f64>| {
            let norm = AbstractModuleNorm::from_spec(bundle.clone(), spec, 0).unwrap();
            let r = check_condition_2a(&norm, &p, probe, 0).unwrap();
            !r.pass && r.witness.is_some_and(|w| w.subset.contains('1') && w.subset.contains('0'))
        };
        if !has_witness(ModuleNormSpec::SupOverAtoms) || !has_witness(ModuleNormSpec::Mixed { p, p_prime }) {
            fixture_misses += 1;
        }
        let r = check_condition_2a(&induced, &p_prime, probe, 0).unwrap();
        if r.pass || r.witness.is_none() {
            mismatch_misses += 1;
        }
    }
    outcome(
        cases >= 500 && worst <= 1e-9 && fixture_misses == 0 && mismatch_misses == 0,
        format!(
            "{cases} round trips, max atomwise error {worst:.2e} (tol 1e-9); {applicable} probes with >= 2 charged atoms: \
             {fixture_misses} fixture misses, {mismatch_misses} mismatched-exponent misses; \
             {excluded} probes with unequal norms but a single charged atom excluded (2a holds there for every exponent)"
        ),
    )
}

fn criterion_8() -> Outcome {
    let (mut triples, mut violations, mut rejected, mut largest) = (0usize, 0usize, 0usize, 0usize);
    let mut seed = 0u64;
    let mut draw = |atoms: [usize; 2], count: usize| {
        let mut got = 0;
        while got < count {
            seed += 1;
            let Some((triple, r)) = random_measure_triple(derive_seed(8, seed), atoms) else {
                continue;
            };
            rejected += r;
            let report = check_rn_inequality(&triple).unwrap();
            violations += usize::from(report.violation);
            largest = largest.max(triple.space.len());
            got += 1;
        }
    };
    draw([1, 14], 9_990);
    draw([18, 20], 10);
    triples += 10_000;
    outcome(
        violations == 0,
        format!("{triples} triples (up to {largest} atoms, every subset enumerated), {violations} violations, {rejected} rejected draws"),
    )
}

fn criterion_9() -> Outcome {
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/suite_all.toml");
    let dirs = [TempDir::new().unwrap(), TempDir::new().unwrap()];
    let codes: Vec<i32> = dirs
        .iter()
        .map(|d| {
            let cli = Cli::try_parse_from([
                "bundlelab",
                "suite",
                "--config",
                config.to_str().unwrap(),
                "--out",
                d.path().to_str().unwrap(),
            ])
            .unwrap();
            bundlelab_cli::execute(&cli.command).map_or(2, |r| r.code)
        })
        .collect();
    let mut names: Vec<String> = fs::read_dir(dirs[0].path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".csv"))
        .collect();
    names.sort();
    let identical = names
        .iter()
        .all(|n| fs::read(dirs[0].path().join(n)).ok() == fs::read(dirs[1].path().join(n)).ok());
    outcome(
        codes == [0, 0] && names.len() >= 8 && identical,
        format!("{} CSV files compared across two runs, byte-identical: {identical}", names.len()),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("modulus oracle", criterion_1),
        ("flat-norm detection", criterion_2),
        ("Hilbert bundles", criterion_3),
        ("modulus upper bound", criterion_4),
        ("dual isometry", criterion_5),
        ("reflexivity diagram", criterion_6),
        ("pointwise norm round trip", criterion_7),
        ("Radon-Nikodym inequality", criterion_8),
        ("determinism", criterion_9),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = check();
        println!(
            "criterion {}: {} [{name}] {} ({:.1}s)",
            k + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            t.elapsed().as_secs_f64()
        );
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} of 9 criteria passed in {:.1}s", 9 - failed, start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}

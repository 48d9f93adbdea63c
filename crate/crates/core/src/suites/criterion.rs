//! The induced-norm criterion and the measure inequality behind it.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::{instance_digest, ReportBuilder, Status, SuiteConfig, TheoremReport, TheoremTag};
use crate::bundle::Section;
use crate::criterion::{
    check_condition_2a, check_condition_2b, check_rn_inequality, mu_v, reconstruct_pointwise_norm,
    AbstractModuleNorm, MeasureTriple, ModuleNormSpec, CONDITION_2A_TOL, CONDITION_2B_TOL,
};
use crate::error::Result;
use crate::exponent::Exponent;
use crate::measure::{AtomSubset, MeasureSpace};
use crate::norm::derive_seed;
use crate::sample::random_section;

pub const RECONSTRUCT_TOL: f64 = 1e-9;
/// Rejection attempts per measure triple before it is recorded as excluded.
const RN_ATTEMPTS: usize = 1000;

/// An exponent different from `p`, taken from the list when possible.
fn mismatched(p: &Exponent<f64>, list: &[Exponent<f64>]) -> Exponent<f64> {
    list.iter()
        .find(|e| e.value().is_some() && *e != p)
        .copied()
        .unwrap_or_else(|| Exponent::finite(p.as_scalar() + 1.0).expect("p + 1 > 1"))
}

fn positive_atoms(v: &Section<f64>) -> usize {
    v.pointwise_norm().values().iter().filter(|&&a| a > 0.0).count()
}

pub fn suite_criterion(config: &SuiteConfig) -> Result<TheoremReport> {
    let recipe = &config.recipe;
    let mut b = ReportBuilder::new("criterion", &[TheoremTag::InducedNormCriterion], recipe.seed);
    let mut excluded_mismatch = 0usize;
    for i in 0..recipe.instances {
        let bundle = recipe.instance(i).into_shared();
        let digest = instance_digest(&bundle);
        b.instance(&digest);
        for (k, p) in recipe.exponents.iter().enumerate() {
            let Some(pv) = p.value() else {
                b.row(i, &digest, "induced_2a", format!("p={p}"), 0.0, 0.0, Status::Excluded);
                continue;
            };
            let seed = derive_seed(recipe.seed, 0xc417_0000 ^ ((i as u64) << 8) ^ k as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let probes: Vec<Section<f64>> = (0..config.probes).map(|_| random_section(&bundle, &mut rng)).collect();
            let induced = AbstractModuleNorm::induced(bundle.clone(), *p);
            let p_prime = mismatched(p, &recipe.exponents);
            let fixtures = [
                AbstractModuleNorm::from_spec(bundle.clone(), ModuleNormSpec::SupOverAtoms, seed)?,
                AbstractModuleNorm::from_spec(bundle.clone(), ModuleNormSpec::Mixed { p: *p, p_prime }, seed)?,
            ];
            let max_norm = AbstractModuleNorm::from_spec(bundle.clone(), ModuleNormSpec::Max { p: *p, p_prime }, seed)?;

            for (j, v) in probes.iter().enumerate() {
                let params = format!("p={p};probe={j}");
                let probe = std::slice::from_ref(v);
                let rep = check_condition_2a(&induced, p, probe, seed)?;
                let witness = || format!("subset={}", rep.rows[0].subset);
                b.check_le(i, &digest, "induced_2a", params.clone(), rep.max_residual, CONDITION_2A_TOL, witness);

                let abs = v.pointwise_norm();
                let rec = reconstruct_pointwise_norm(&induced, p, v)?;
                let err = abs
                    .values()
                    .iter()
                    .zip(rec.values())
                    .map(|(a, r)| (a - r).abs() / a.max(1.0))
                    .fold(0.0, f64::max);
                b.check_le(i, &digest, "reconstruct", params.clone(), err, RECONSTRUCT_TOL, || {
                    format!("reconstructed={:?}", rec.values())
                });

                let n = bundle.len();
                let total = mu_v(&induced, pv, v, &AtomSubset::full(n))?;
                let integral = abs.map(|a| a.powf(pv)).integral();
                b.check_le(
                    i,
                    &digest,
                    "mu_v_integral",
                    params.clone(),
                    (total - integral).abs() / integral.max(1.0),
                    RECONSTRUCT_TOL,
                    || format!("mu={total:e};integral={integral:e}"),
                );

                // Norms that are not induced at exponent p must fail 2a as
                // soon as two atoms carry mass.
                let applicable = positive_atoms(v) >= 2;
                let expect_fail = |b: &mut ReportBuilder, check: &str, rep: crate::criterion::Condition2aReport<f64>| {
                    let params = format!("{params};norm={};tested_p={}", rep.norm, rep.p);
                    if !applicable {
                        b.row(i, &digest, check, params, rep.max_residual, CONDITION_2A_TOL, Status::Excluded);
                        return;
                    }
                    let subset = rep.rows[0].subset.clone();
                    if rep.pass {
                        b.witness(i, &digest, check, format!("{params};subset={subset};unexpected_pass"));
                        b.row(i, &digest, check, params, rep.max_residual, CONDITION_2A_TOL, Status::Fail);
                    } else {
                        b.witness(i, &digest, check, format!("{params};subset={subset}"));
                        b.row(i, &digest, check, params, rep.max_residual, CONDITION_2A_TOL, Status::ExpectedFail);
                    }
                };
                let rep = check_condition_2a(&induced, &p_prime, probe, seed)?;
                if !applicable {
                    excluded_mismatch += 1;
                }
                expect_fail(&mut b, "mismatched_exponent", rep);
                expect_fail(&mut b, "sup_over_atoms", check_condition_2a(&fixtures[0], p, probe, seed)?);
                expect_fail(&mut b, "mixed_exponents", check_condition_2a(&fixtures[1], p, probe, seed)?);
                let rep = check_condition_2a(&max_norm, p, probe, seed)?;
                b.row(i, &digest, "max_of_exponents", format!("{params};norm={}", rep.norm), rep.max_residual, CONDITION_2A_TOL, Status::Info);
            }

            let rep = check_condition_2b(&induced, &probes, seed, config.horizon)?;
            b.check_le(i, &digest, "induced_2b", format!("p={p};horizon={}", config.horizon), rep.max_value, CONDITION_2B_TOL, || {
                format!("{:?}", rep.rows.iter().map(|r| (&r.sequence, r.value)).collect::<Vec<_>>())
            });
        }
    }
    if excluded_mismatch > 0 {
        b.note(format!(
            "{excluded_mismatch} probes with fewer than two atoms of positive pointwise norm are excluded from the expected-failure checks: 2a then holds for every exponent"
        ));
    }
    b.note("condition 2b holds for every norm on a finite atomic space; the rows confirm the numerics only");
    Ok(b.finish())
}

/// Draws densities and `α` until the set-level inequality holds. Returns the
/// triple with the number of draws, or `None` after the attempt cap.
pub fn random_measure_triple(seed: u64, atoms: [usize; 2]) -> Option<(MeasureTriple<f64>, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(atoms[0]..=atoms[1]);
    let weights: Vec<f64> = (0..n).map(|_| rng.random_range(0.25..2.0)).collect();
    let space = Arc::new(MeasureSpace::from_weights(weights).expect("positive weights"));
    let strategy = rng.random_range(0..3u8);
    let density = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        (0..n)
            .map(|_| if rng.random_bool(0.1) { 0.0 } else { rng.random_range(0.0..3.0) })
            .collect()
    };
    for attempt in 1..=RN_ATTEMPTS {
        let (d, alpha) = match strategy {
            // μ_1 = c μ_2
            0 => {
                let d2 = density(&mut rng);
                let c = rng.random_range(0.0..=1.0);
                let d1 = d2.iter().map(|x| c * x).collect();
                ([d1, d2, density(&mut rng)], rng.random_range(0.05..3.0))
            }
            // μ_1 ≤ μ_2 + μ_3 with α ≤ 1, where t ↦ t^α is subadditive
            1 => {
                let (d2, d3) = (density(&mut rng), density(&mut rng));
                let d1 = d2.iter().zip(&d3).map(|(a, c)| rng.random_range(0.0..=1.0) * (a + c)).collect();
                ([d1, d2, d3], rng.random_range(0.05..=1.0))
            }
            _ => ([density(&mut rng), density(&mut rng), density(&mut rng)], rng.random_range(0.05..3.0)),
        };
        let triple = MeasureTriple::new(space.clone(), d, alpha).expect("valid densities");
        if check_rn_inequality(&triple).expect("atom count within limit").set_level_holds {
            return Some((triple, attempt));
        }
    }
    None
}

fn triple_digest(t: &MeasureTriple<f64>) -> String {
    let mut h = Sha256::new();
    h.update(format!("{:?};{:?};{:?}", t.space.weights(), t.densities, t.alpha));
    h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
}

pub fn suite_rn(config: &SuiteConfig) -> Result<TheoremReport> {
    let seed = config.recipe.seed;
    let mut b = ReportBuilder::new("rn", &[TheoremTag::RadonNikodymInequality], seed);
    let mut rejected = 0usize;
    for i in 0..config.rn_triples {
        let Some((t, attempts)) = random_measure_triple(derive_seed(seed, 0x7a1e_0000_0000 + i as u64), config.rn_atoms) else {
            b.instance("none");
            b.row(i, "none", "rn_inequality", "attempts=cap".into(), 0.0, 0.0, Status::Excluded);
            continue;
        };
        rejected += attempts - 1;
        let digest = triple_digest(&t);
        b.instance(&digest);
        let rep = check_rn_inequality(&t)?;
        let params = format!("atoms={};alpha={}", t.space.len(), t.alpha);
        let status = if rep.violation { Status::Fail } else { Status::Pass };
        if rep.violation {
            b.witness(i, &digest, "rn_inequality", format!("{params};atom={};densities={:?}", rep.worst_atom, t.densities));
        }
        b.row(i, &digest, "rn_inequality", params, -rep.min_density_margin, 0.0, status);
    }
    b.note(format!("{rejected} draws rejected because the set-level inequality failed"));
    b.note("value is minus the smallest density-level margin; violations are set-level passes with a density-level failure");
    Ok(b.finish())
}

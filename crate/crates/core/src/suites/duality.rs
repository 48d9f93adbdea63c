//! `Γ_q(E′)` as the dual of `Γ_p(E)`, `θ`, and the reflexivity diagram.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{fmt_vecs, instance_digest, ReportBuilder, Status, SuiteConfig, TheoremReport, TheoremTag};
use crate::duality::{check_reflexivity_diagram, holder_maximizer, james_pairing, operator_norm, theta_norm};
use crate::error::Result;
use crate::norm::derive_seed;
use crate::sample::{random_dual_section, random_section};

pub const OPERATOR_NORM_TOL: f64 = 1e-6;
pub const HOLDER_EQUALITY_TOL: f64 = 1e-9;
pub const DIAGRAM_TOL: f64 = 1e-9;

pub fn suite_duality(config: &SuiteConfig) -> Result<TheoremReport> {
    let recipe = &config.recipe;
    let mut b = ReportBuilder::new(
        "duality",
        &[
            TheoremTag::DualOfSectionSpace,
            TheoremTag::ThetaIsomorphism,
            TheoremTag::Reflexivity,
            TheoremTag::BochnerReflexivity,
        ],
        recipe.seed,
    );
    for i in 0..recipe.instances {
        let bundle = recipe.instance(i).into_shared();
        let digest = instance_digest(&bundle);
        b.instance(&digest);
        for (k, p) in recipe.exponents.iter().enumerate() {
            if !p.is_reflexive_range() {
                b.row(i, &digest, "operator_norm", format!("p={p}"), 0.0, 0.0, Status::Excluded);
                continue;
            }
            let q = p.conjugate();
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(recipe.seed, ((i as u64) << 8) | k as u64));
            for j in 0..config.pairs {
                let omega = random_dual_section(&bundle, &mut rng);
                let params = format!("p={p};draw={j}");
                let qn = omega.gamma_q_norm(&q);
                let op = operator_norm(&omega, p)?;
                let w = || format!("omega={}", fmt_vecs(omega.covectors()));
                b.check_le(i, &digest, "operator_norm", params.clone(), (op - qn).abs(), OPERATOR_NORM_TOL, w);

                // Equality in Hölder at the maximizer.
                let eq = match holder_maximizer(&omega, p)? {
                    Some(v) => {
                        let unit = (v.gamma_p_norm(p) - 1.0).abs();
                        let pair = (james_pairing(&v, &omega)? - qn).abs() / qn.max(1.0);
                        unit.max(pair)
                    }
                    None => 0.0,
                };
                b.check_le(i, &digest, "holder_equality", params.clone(), eq, HOLDER_EQUALITY_TOL, w);

                // Random sections never beat the operator norm.
                let mut ratio = 0.0_f64;
                for _ in 0..8 {
                    let v = random_section(&bundle, &mut rng);
                    let nv = v.gamma_p_norm(p);
                    if nv > 0.0 {
                        ratio = ratio.max(james_pairing(&v, &omega)?.abs() / nv);
                    }
                }
                b.check_le(i, &digest, "holder_inequality", params.clone(), ratio, op * (1.0 + 1e-12) + 1e-15, w);

                let v = random_section(&bundle, &mut rng);
                let tn = theta_norm(&v, p)?;
                let vn = v.gamma_p_norm(p);
                b.check_le(i, &digest, "theta_norm", params, (tn - vn).abs(), OPERATOR_NORM_TOL, || {
                    format!("v={}", fmt_vecs(v.vectors()))
                });
            }

            let seed = derive_seed(recipe.seed, 0xd1a9_0000 ^ ((i as u64) << 8) ^ k as u64);
            let report = check_reflexivity_diagram(&bundle, p, config.diagram_samples, seed)?;
            let params = format!("p={p};samples={}", config.diagram_samples);
            if report.degenerate {
                b.row(i, &digest, "reflexivity_diagram", params, 0.0, DIAGRAM_TOL, Status::Excluded);
                continue;
            }
            let replay = || format!("diagram_seed={seed}");
            b.check_le(i, &digest, "reflexivity_diagram", params.clone(), report.max_diagram_residual, DIAGRAM_TOL, replay);
            b.check_le(i, &digest, "bidual_pointwise_norm", params.clone(), report.max_bidual_residual, DIAGRAM_TOL, replay);
            if let Some(r) = report.constant_chain_residual {
                b.check_le(i, &digest, "constant_bundle_chain", params, r, DIAGRAM_TOL, replay);
            }
        }
    }
    b.note("finite-dimensional fibers are reflexive, so every constant bundle is expected to pass the Bochner chain");
    Ok(b.finish())
}

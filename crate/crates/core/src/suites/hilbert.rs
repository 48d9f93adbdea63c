//! `Γ_2(E)` is a Hilbert space exactly when every fiber is.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{fiber_is_hilbert_by_kind, fmt_vecs, instance_digest, ReportBuilder, Status, SuiteConfig, TheoremReport, TheoremTag};
use crate::bundle::{fiber_defects, GammaNorm, HILBERT_DEFECT_TOL};
use crate::exponent::Exponent;
use crate::norm::{derive_seed, parallelogram_defect, NormEvaluator};
use crate::sample::gaussian_vec;

/// Above this fiber defect the localized witness must be visibly positive.
const CLEAR_DEFECT: f64 = 1e-3;

/// Relative parallelogram residual of a pair in a normed space.
fn parallelogram_residual<E: NormEvaluator<f64> + ?Sized>(e: &E, u: &[f64], v: &[f64]) -> f64 {
    let s: Vec<f64> = u.iter().zip(v).map(|(a, b)| a + b).collect();
    let d: Vec<f64> = u.iter().zip(v).map(|(a, b)| a - b).collect();
    let (nu, nv) = (e.norm(u), e.norm(v));
    let scale = nu * nu + nv * nv;
    if scale == 0.0 {
        return 0.0;
    }
    let (ns, nd) = (e.norm(&s), e.norm(&d));
    (ns * ns + nd * nd - 2.0 * scale).abs() / scale
}

pub fn suite_hilbert_equivalence(config: &SuiteConfig) -> TheoremReport {
    let recipe = &config.recipe;
    let mut b = ReportBuilder::new("hilbert", &[TheoremTag::HilbertBundles], recipe.seed);
    let two = Exponent::finite(2.0).expect("2 is an exponent");
    let tol = HILBERT_DEFECT_TOL;
    for i in 0..recipe.instances {
        let bundle = recipe.instance(i);
        let digest = instance_digest(&bundle);
        b.instance(&digest);
        if bundle.is_degenerate() {
            b.row(i, &digest, "gamma2_parallelogram", "fibers=zero".into(), 0.0, tol, Status::Excluded);
            continue;
        }
        let budget = config.budget.with_seed(derive_seed(config.budget.seed, i as u64));
        let defects = fiber_defects(&bundle, &budget);
        let (worst, max_defect) = defects
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |a, (x, d)| if d > a.1 { (x, d) } else { a });

        // The kind of a fiber decides whether it is Hilbert; the numerical
        // defect has to agree with it.
        for (x, f) in bundle.fibers().iter().enumerate() {
            let predicted = fiber_is_hilbert_by_kind(f);
            let d = defects[x];
            let params = format!("atom={x};kind_hilbert={predicted}");
            let status = if predicted {
                if d <= tol { Status::Pass } else { Status::Fail }
            } else if d > CLEAR_DEFECT {
                Status::Pass
            } else if d > tol {
                Status::Info
            } else {
                Status::Fail
            };
            if status == Status::Fail {
                b.witness(i, &digest, "fiber_defect_kind", format!("{params};defect={d:e}"));
            }
            b.row(i, &digest, "fiber_defect_kind", params, d, tol, status);
        }

        let gamma = GammaNorm::new(&bundle, two);
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(recipe.seed, 0x4811_0000 + i as u64));
        let n = bundle.total_dimension();
        let mut residual = 0.0_f64;
        let mut pair = (Vec::new(), Vec::new());
        for _ in 0..config.pairs.max(1) * 4 {
            let u = gaussian_vec::<f64>(n, &mut rng);
            let v = gaussian_vec::<f64>(n, &mut rng);
            let r = parallelogram_residual(&gamma, &u, &v);
            if r > residual {
                residual = r;
                pair = (u, v);
            }
        }
        // Localized witness: the worst fiber pair placed at its atom.
        let localized = if max_defect > 0.0 {
            let fiber = bundle.fiber(worst).spec().expect("positive defect needs a normed fiber");
            let (_, (v, w)) = parallelogram_defect(fiber, &budget);
            let (lv, lw) = (gamma.lift(worst, &v), gamma.lift(worst, &w));
            let r = parallelogram_residual(&gamma, &lv, &lw);
            if r > residual {
                residual = r;
                pair = (lv.clone(), lw.clone());
            }
            // Unnormalized defect of the lifted pair: m({x}) times the fiber defect.
            let s: Vec<f64> = lv.iter().zip(&lw).map(|(a, c)| a + c).collect();
            let d: Vec<f64> = lv.iter().zip(&lw).map(|(a, c)| a - c).collect();
            let (ns, nd, nv, nw) = (gamma.norm(&s), gamma.norm(&d), gamma.norm(&lv), gamma.norm(&lw));
            Some((ns * ns + nd * nd - 2.0 * (nv * nv + nw * nw)).abs())
        } else {
            None
        };

        let fibers_hilbert = max_defect <= tol;
        let gamma_hilbert = residual <= tol;
        let params = format!("p=2;max_fiber_defect={max_defect:e}");
        let status = if fibers_hilbert == gamma_hilbert { Status::Pass } else { Status::Fail };
        if status == Status::Fail {
            b.witness(i, &digest, "gamma2_parallelogram", format!("{params};pair={}", fmt_vecs(&[pair.0.clone(), pair.1.clone()])));
        }
        b.row(i, &digest, "gamma2_parallelogram", params, residual, tol, status);

        if max_defect > CLEAR_DEFECT {
            let value = localized.unwrap_or(0.0);
            let params = format!("atom={worst};fiber_defect={max_defect:e}");
            let ok = value > 0.0;
            if ok {
                b.witness(i, &digest, "localized_witness", format!("{params};pair={}", fmt_vecs(&[pair.0, pair.1])));
            } else {
                b.witness(i, &digest, "localized_witness", format!("{params};integrated_defect=0"));
            }
            b.row(i, &digest, "localized_witness", params, value, 0.0, if ok { Status::Pass } else { Status::Fail });
        }
    }
    b.note("fiber Hilbert-ness is predicted from the norm kind and cross-checked against the optimized defect; defects in (1e-9, 1e-3] on non-Hilbert kinds are recorded as INFO");
    b.finish()
}

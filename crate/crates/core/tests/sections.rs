mod common;

use bundlelab::bundle::{pointwise_modulus, Bundle, Fiber, Section};
use bundlelab::measure::{lattice_inf, lattice_sup};
use bundlelab::norm::OptimizerBudget;
use bundlelab::sample::random_section;
use bundlelab::{AtomSubset, Exponent, NormSpec, ScalarField};
use common::{random_bundle, rng, space};
use proptest::prelude::*;
use rand::Rng;

fn exponents() -> Vec<Exponent<f64>> {
    vec![
        Exponent::one(),
        Exponent::rational(3, 2).unwrap(),
        Exponent::finite(2.0).unwrap(),
        Exponent::finite(3.0).unwrap(),
        Exponent::Infinity,
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn gamma_norm_is_a_norm(seed in any::<u64>(), c in -3.0f64..3.0) {
        let b = random_bundle(seed);
        let mut r = rng(seed ^ 1);
        let (u, v) = (random_section(&b, &mut r), random_section(&b, &mut r));
        for p in exponents() {
            let (nu, nv) = (u.gamma_p_norm(&p), v.gamma_p_norm(&p));
            prop_assert!(u.add(&v).unwrap().gamma_p_norm(&p) <= (nu + nv) * (1.0 + 1e-12) + 1e-15);
            prop_assert!((u.scale(c).gamma_p_norm(&p) - c.abs() * nu).abs() <= 1e-12 * (1.0 + nu * c.abs()));
        }
    }

    #[test]
    fn module_action_is_compatible(seed in any::<u64>()) {
        let b = random_bundle(seed);
        let mut r = rng(seed ^ 2);
        let v = random_section(&b, &mut r);
        let f = ScalarField::new(b.space().clone(), (0..b.len()).map(|_| r.random_range(-2.0..2.0)).collect()).unwrap();
        let g = ScalarField::new(b.space().clone(), (0..b.len()).map(|_| r.random_range(-2.0..2.0)).collect()).unwrap();
        let fv = v.module_action(&f).unwrap();
        // |f·v| = |f|·|v|
        for ((a, fx), vx) in fv.pointwise_norm().values().iter().zip(f.values()).zip(v.pointwise_norm().values()) {
            prop_assert!((a - fx.abs() * vx).abs() <= 1e-12 * (1.0 + a));
        }
        // (fg)·v = f·(g·v)
        let fg = f.zip_with(&g, |a, c| a * c).unwrap();
        let lhs = v.module_action(&fg).unwrap();
        let rhs = v.module_action(&g).unwrap().module_action(&f).unwrap();
        for (a, c) in lhs.flat().iter().zip(rhs.flat()) {
            prop_assert!((a - c).abs() <= 1e-12 * (1.0 + a.abs()));
        }
        // ‖f·v‖ ≤ ‖f‖_∞ ‖v‖
        for p in exponents() {
            let sup = f.ess_sup().unwrap().abs().max(f.ess_inf().unwrap().abs());
            prop_assert!(fv.gamma_p_norm(&p) <= sup * v.gamma_p_norm(&p) * (1.0 + 1e-12) + 1e-15);
        }
    }

    #[test]
    fn restriction_splits_the_pth_power(seed in any::<u64>(), mask in any::<u64>()) {
        let b = random_bundle(seed);
        let mut r = rng(seed ^ 3);
        let v = random_section(&b, &mut r);
        let e = AtomSubset::from_mask(b.len(), mask & ((1 << b.len()) - 1));
        for p in exponents() {
            let Some(pv) = p.value() else { continue };
            let a = v.restrict(&e).gamma_p_norm(&p).powf(pv);
            let c = v.restrict(&e.complement()).gamma_p_norm(&p).powf(pv);
            let t = v.gamma_p_norm(&p).powf(pv);
            prop_assert!((a + c - t).abs() <= 1e-12 * (1.0 + t));
        }
        // at p = ∞ the norm is the maximum of the two parts
        let inf = Exponent::Infinity;
        let m = v.restrict(&e).gamma_p_norm(&inf).max(v.restrict(&e.complement()).gamma_p_norm(&inf));
        prop_assert_eq!(m, v.gamma_p_norm(&inf));
    }

    #[test]
    fn lattice_operations(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.random_range(1..6);
        let s = space(&(0..n).map(|_| r.random_range(0.1..2.0)).collect::<Vec<_>>());
        let field = |r: &mut rand_chacha::ChaCha8Rng| ScalarField::new(s.clone(), (0..n).map(|_| r.random_range(-3.0..3.0)).collect()).unwrap();
        let (f, g, h) = (field(&mut r), field(&mut r), field(&mut r));
        let sup = lattice_sup(&[f.clone(), g.clone()]).unwrap();
        let inf = lattice_inf(&[f.clone(), g.clone()]).unwrap();
        // f ∨ g + f ∧ g = f + g
        for x in 0..n {
            prop_assert!((sup.values()[x] + inf.values()[x] - f.values()[x] - g.values()[x]).abs() <= 1e-12);
        }
        // associativity
        let left = lattice_sup(&[lattice_sup(&[f.clone(), g.clone()]).unwrap(), h.clone()]).unwrap();
        let right = lattice_sup(&[f.clone(), lattice_sup(&[g.clone(), h.clone()]).unwrap()]).unwrap();
        prop_assert_eq!(left.values(), right.values());
        prop_assert!(sup.ess_inf().unwrap() >= f.ess_inf().unwrap().max(g.ess_inf().unwrap()) - 1e-15);
    }

    #[test]
    fn bochner_integral_is_linear(seed in any::<u64>(), c in -2.0f64..2.0) {
        let mut r = rng(seed);
        let n = r.random_range(1..5);
        let d = r.random_range(1..4);
        let b = Bundle::constant(space(&(0..n).map(|_| r.random_range(0.1..2.0)).collect::<Vec<_>>()), NormSpec::euclidean(d)).into_shared();
        let (u, v) = (random_section(&b, &mut r), random_section(&b, &mut r));
        let full = AtomSubset::full(n);
        let lhs = u.scale(c).add(&v).unwrap().bochner_integral(&full).unwrap();
        let iu = u.bochner_integral(&full).unwrap();
        let iv = v.bochner_integral(&full).unwrap();
        for k in 0..d {
            prop_assert!((lhs[k] - (c * iu[k] + iv[k])).abs() <= 1e-12 * (1.0 + lhs[k].abs()));
        }
        // ‖∫v‖ ≤ ∫|v|
        let nv: f64 = iv.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!(nv <= v.pointwise_norm().integral() * (1.0 + 1e-12));
    }
}

#[test]
fn zero_fibers_read_as_one_in_the_pointwise_modulus() {
    let b = Bundle::new(space(&[1.0, 2.0]), vec![Fiber::Zero, Fiber::Normed(NormSpec::euclidean(2))]).unwrap();
    let m = pointwise_modulus(&b, 1.0, &OptimizerBudget::default()).unwrap();
    assert_eq!(m.values()[0], 1.0);
    assert!((m.values()[1] - (1.0 - 0.75f64.sqrt())).abs() < 1e-6);
}

#[test]
fn sections_reject_mismatched_shapes() {
    let b = Bundle::constant(space(&[1.0, 1.0]), NormSpec::euclidean(2)).into_shared();
    assert!(Section::new(b.clone(), vec![vec![1.0, 2.0]]).is_err());
    assert!(Section::from_flat(b.clone(), &[1.0, 2.0, 3.0]).is_err());
    let other = Bundle::constant(space(&[1.0, 3.0]), NormSpec::euclidean(2)).into_shared();
    let u = Section::zeros(b);
    let v = Section::zeros(other);
    assert!(u.add(&v).is_err());
}

#[test]
fn bundle_configuration_reports_missing_dimension() {
    let text = r#"
        [space]
        atoms = ["a"]
        weights = [1.0]
        [[fibers]]
        norm = { kind = "weighted_lp", exponent = "3/2" }
    "#;
    let err = toml::from_str::<Bundle<f64>>(text).unwrap_err().to_string();
    assert!(err.contains("fiber dimension required"), "{err}");
    let text = r#"
        [space]
        atoms = ["a", "b"]
        weights = [1.0, 0.5]
        [[fibers]]
        norm = { kind = "weighted_lp", dimension = 2, exponent = "3/2" }
        [[fibers]]
        dimension = 0
    "#;
    let b: Bundle<f64> = toml::from_str(text).unwrap();
    assert_eq!(b.dimensions(), vec![2, 0]);
}

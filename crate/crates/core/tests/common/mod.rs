#![allow(dead_code)]

use std::sync::Arc;

use bundlelab::bundle::{Bundle, Fiber};
use bundlelab::{Exponent, MeasureSpace, NormSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    bundlelab::sample::gaussian_vec(n, rng)
}

/// A random norm on ℝ^d of one of the four kinds.
pub fn random_spec(d: usize, rng: &mut ChaCha8Rng) -> NormSpec<f64> {
    match rng.random_range(0..4) {
        0 => {
            let a: Vec<Vec<f64>> = (0..d).map(|_| gaussian(d, rng)).collect();
            let g = (0..d)
                .map(|i| (0..d).map(|j| (0..d).map(|k| a[k][i] * a[k][j]).sum::<f64>() + if i == j { 0.3 } else { 0.0 }).collect())
                .collect();
            NormSpec::inner_product(g).unwrap()
        }
        1 => {
            let rs = [Exponent::one(), Exponent::rational(3, 2).unwrap(), Exponent::finite(2.0).unwrap(), Exponent::finite(4.0).unwrap(), Exponent::Infinity];
            let r = rs[rng.random_range(0..rs.len())];
            NormSpec::weighted_lp(r, (0..d).map(|_| rng.random_range(0.5..2.0)).collect()).unwrap()
        }
        k => loop {
            let pts: Vec<Vec<f64>> = (0..d + 2).map(|_| gaussian(d, rng)).collect();
            let s = if k == 2 { NormSpec::polyhedral_max(pts) } else { NormSpec::polytope_gauge(pts) };
            if let Ok(s) = s {
                break s;
            }
        },
    }
}

pub fn space(w: &[f64]) -> Arc<MeasureSpace<f64>> {
    MeasureSpace::from_weights(w.to_vec()).unwrap().into_shared()
}

/// A random bundle with 1..=4 atoms and fibers of dimension 1..=3.
pub fn random_bundle(seed: u64) -> Arc<Bundle<f64>> {
    let mut r = rng(seed);
    let n = r.random_range(1..=4);
    let w: Vec<f64> = (0..n).map(|_| r.random_range(0.2..2.0)).collect();
    let fibers = (0..n)
        .map(|_| {
            if r.random_bool(0.1) {
                Fiber::Zero
            } else {
                let d = r.random_range(1..=3);
                Fiber::Normed(random_spec(d, &mut r))
            }
        })
        .collect();
    Bundle::new(space(&w), fibers).unwrap().into_shared()
}

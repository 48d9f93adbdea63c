//! Seeded random draws shared by the checks and generators.

use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::bundle::{Bundle, Section};
use crate::duality::DualSection;
use crate::scalar::Scalar;

pub fn gaussian_vec<T: Scalar>(n: usize, rng: &mut impl Rng) -> Vec<T> {
    (0..n)
        .map(|_| T::lit(rng.sample::<f64, _>(StandardNormal)))
        .collect()
}

fn per_atom<T: Scalar>(bundle: &Bundle<T>, rng: &mut impl Rng) -> Vec<Vec<T>> {
    // Occasionally zero out an atom so that sparse sections get exercised.
    bundle
        .dimensions()
        .into_iter()
        .map(|d| {
            if rng.random_bool(0.1) {
                vec![T::zero(); d]
            } else {
                gaussian_vec(d, rng)
            }
        })
        .collect()
}

pub fn random_section<T: Scalar>(bundle: &Arc<Bundle<T>>, rng: &mut impl Rng) -> Section<T> {
    Section::new(bundle.clone(), per_atom(bundle, rng)).expect("shapes follow the bundle")
}

pub fn random_dual_section<T: Scalar>(bundle: &Arc<Bundle<T>>, rng: &mut impl Rng) -> DualSection<T> {
    DualSection::new(bundle.clone(), per_atom(bundle, rng)).expect("shapes follow the bundle")
}

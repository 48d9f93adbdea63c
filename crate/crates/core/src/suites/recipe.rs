//! Reproducible random instance generation.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bundle::{Bundle, Fiber};
use crate::error::{invalid, Result};
use crate::exponent::Exponent;
use crate::measure::MeasureSpace;
use crate::norm::{derive_seed, NormKind, NormSpec};
use crate::sample::gaussian_vec;

/// Relative frequencies of the fiber kinds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KindWeights {
    pub inner_product: f64,
    pub weighted_lp: f64,
    pub polyhedral_max: f64,
    pub polytope_gauge: f64,
    pub zero: f64,
}

impl Default for KindWeights {
    fn default() -> Self {
        KindWeights {
            inner_product: 3.0,
            weighted_lp: 3.0,
            polyhedral_max: 1.0,
            polytope_gauge: 1.0,
            zero: 0.3,
        }
    }
}

/// Everything needed to regenerate a family of random bundles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InstanceRecipe {
    pub seed: u64,
    pub instances: usize,
    /// Inclusive range of atom counts.
    pub atoms: [usize; 2],
    /// Inclusive range of fiber dimensions for normed fibers.
    pub dimensions: [usize; 2],
    /// Atom masses are drawn uniformly from this range.
    pub weights: [f64; 2],
    /// Section-space exponents `p`.
    pub exponents: Vec<Exponent<f64>>,
    /// Exponents `r` used by weighted `ℓ^r` fibers.
    pub lp_exponents: Vec<Exponent<f64>>,
    pub kinds: KindWeights,
    /// Probability that an instance is a constant bundle.
    pub constant_fraction: f64,
}

impl Default for InstanceRecipe {
    fn default() -> Self {
        let e = |x: f64| Exponent::finite(x).expect("valid exponent");
        InstanceRecipe {
            seed: 0,
            instances: 20,
            atoms: [1, 3],
            dimensions: [1, 3],
            weights: [0.25, 2.0],
            exponents: vec![Exponent::rational(3, 2).expect("3/2"), e(2.0), e(3.0)],
            lp_exponents: vec![Exponent::one(), Exponent::rational(3, 2).expect("3/2"), e(3.0), e(4.0), Exponent::Infinity],
            kinds: KindWeights::default(),
            constant_fraction: 0.25,
        }
    }
}

impl InstanceRecipe {
    pub fn validate(&self) -> Result<()> {
        let bad = |r: &str| Err(invalid("recipe", r.to_string()));
        if self.atoms[0] == 0 || self.atoms[0] > self.atoms[1] {
            return bad("atoms must be a nonempty range of positive counts");
        }
        if self.dimensions[0] == 0 || self.dimensions[0] > self.dimensions[1] || self.dimensions[1] > 6 {
            return bad("dimensions must be a range within 1..=6");
        }
        if !(self.weights[0] > 0.0 && self.weights[0] <= self.weights[1] && self.weights[1].is_finite()) {
            return bad("weights must be a positive finite range");
        }
        let k = &self.kinds;
        let ws = [k.inner_product, k.weighted_lp, k.polyhedral_max, k.polytope_gauge, k.zero];
        if ws.iter().any(|&w| !(w >= 0.0)) || ws.iter().sum::<f64>() <= 0.0 {
            return bad("kind weights must be nonnegative and not all zero");
        }
        if k.weighted_lp > 0.0 && self.lp_exponents.is_empty() {
            return bad("weighted_lp fibers need at least one lp exponent");
        }
        if !(0.0..=1.0).contains(&self.constant_fraction) {
            return bad("constant_fraction must lie in [0,1]");
        }
        Ok(())
    }

    /// Instance `i`; independent of how many instances are requested.
    pub fn instance(&self, i: usize) -> Bundle<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(self.seed, i as u64));
        let n = rng.random_range(self.atoms[0]..=self.atoms[1]);
        let weights = (0..n)
            .map(|_| {
                if self.weights[0] == self.weights[1] {
                    self.weights[0]
                } else {
                    rng.random_range(self.weights[0]..=self.weights[1])
                }
            })
            .collect();
        let space = Arc::new(MeasureSpace::from_weights(weights).expect("positive weights"));
        let k = &self.kinds;
        let normed = k.inner_product + k.weighted_lp + k.polyhedral_max + k.polytope_gauge;
        // a constant bundle needs a normed fiber to repeat
        let constant = rng.random_bool(self.constant_fraction) && normed > 0.0;
        let fibers = if constant {
            let f = loop {
                if let f @ Fiber::Normed(_) = self.random_fiber(&mut rng) {
                    break f;
                }
            };
            vec![f; n]
        } else {
            (0..n).map(|_| self.random_fiber(&mut rng)).collect()
        };
        Bundle::new(space, fibers).expect("one fiber per atom")
    }

    pub fn generate(&self) -> Vec<Arc<Bundle<f64>>> {
        (0..self.instances).map(|i| Arc::new(self.instance(i))).collect()
    }

    fn random_fiber(&self, rng: &mut ChaCha8Rng) -> Fiber<f64> {
        let k = &self.kinds;
        let table = [k.inner_product, k.weighted_lp, k.polyhedral_max, k.polytope_gauge, k.zero];
        let total: f64 = table.iter().sum();
        let mut u = rng.random_range(0.0..total);
        let mut choice = 0;
        for (i, w) in table.iter().enumerate() {
            if u < *w {
                choice = i;
                break;
            }
            u -= w;
            choice = i;
        }
        let d = rng.random_range(self.dimensions[0]..=self.dimensions[1]);
        let spec = match choice {
            0 => {
                let a: Vec<Vec<f64>> = (0..d).map(|_| gaussian_vec(d, rng)).collect();
                let g = (0..d)
                    .map(|i| {
                        (0..d)
                            .map(|j| {
                                let s: f64 = (0..d).map(|k| a[k][i] * a[k][j]).sum();
                                s + if i == j { 0.2 } else { 0.0 }
                            })
                            .collect()
                    })
                    .collect();
                NormSpec::inner_product(g).expect("shifted gram is SPD")
            }
            1 => {
                let r = self.lp_exponents[rng.random_range(0..self.lp_exponents.len())];
                let w = (0..d).map(|_| rng.random_range(0.5..2.0)).collect();
                NormSpec::weighted_lp(r, w).expect("positive weights")
            }
            2 | 3 => loop {
                let m = d + rng.random_range(0..=2);
                let pts: Vec<Vec<f64>> = (0..m).map(|_| gaussian_vec(d, rng)).collect();
                let spec = if choice == 2 {
                    NormSpec::polyhedral_max(pts)
                } else {
                    NormSpec::polytope_gauge(pts)
                };
                if let Ok(s) = spec {
                    break s;
                }
            },
            _ => return Fiber::Zero,
        };
        Fiber::Normed(spec)
    }
}

/// Short stable hash of a bundle's contents.
pub fn instance_digest(bundle: &Bundle<f64>) -> String {
    let mut h = Sha256::new();
    for (w, f) in bundle.space().weights().iter().zip(bundle.fibers()) {
        h.update(format!("{w:?};"));
        match f.spec() {
            None => h.update(b"zero;"),
            Some(spec) => h.update(format!("{}:{:?};", spec.dimension(), spec.kind())),
        }
    }
    let out = h.finalize();
    out.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// `true` when the fiber is an inner-product space: inner products,
/// `ℓ^2`-type weighted norms and every norm on a line.
pub fn fiber_is_hilbert_by_kind(f: &Fiber<f64>) -> bool {
    match f.spec() {
        None => true,
        Some(spec) if spec.dimension() == 1 => true,
        Some(spec) => match spec.kind() {
            NormKind::InnerProduct { .. } => true,
            NormKind::WeightedLp { exponent, .. } => exponent.value() == Some(2.0),
            _ => false,
        },
    }
}

/// `true` for fibers whose modulus is positive on `(0,2]`.
pub fn fiber_is_uniformly_convex_by_kind(f: &Fiber<f64>) -> bool {
    match f.spec() {
        None => true,
        Some(spec) if spec.dimension() == 1 => true,
        Some(spec) => match spec.kind() {
            NormKind::InnerProduct { .. } => true,
            NormKind::WeightedLp { exponent, .. } => exponent.is_reflexive_range(),
            _ => false,
        },
    }
}

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use we_kit::family::FamilyParams;
use we_kit::ode_q::{QSpec, Sign};

pub struct FamilySample {
    pub params: FamilyParams,
    pub spec: QSpec,
    pub ts: Vec<f64>,
}

/// Seeded QSpecs with `K > 0` and small oscillation amplitude, so that
/// `Q > 0` for `|t - gamma|` in `[1, 4]`, each with `n_t` sample points.
pub fn family_corpus(n_specs: usize, n_t: usize, seed: u64) -> Vec<FamilySample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_specs)
        .map(|i| {
            let eps = if i % 2 == 0 { Sign::Plus } else { Sign::Minus };
            let k = rng.random_range(2.0..6.0);
            let gamma = rng.random_range(-2.0..2.0);
            let mut a = rng.random_range(-0.3..0.3);
            let b = rng.random_range(-0.3..0.3);
            if i == 0 {
                a = 0.3;
            }
            let spec = QSpec::new(k, gamma, eps, a, if i == 0 { 0.0 } else { b });
            let theta = if rng.random_bool(0.5) { 1.0 } else { -1.0 } * rng.random_range(0.5..2.0);
            let p_abs = rng.random_range(0.5..2.0);
            let params = FamilyParams::from_qspec(spec, theta, p_abs).expect("valid params");
            let side = eps.value();
            let ts = (0..n_t)
                .map(|j| gamma + side * (1.0 + 3.0 * (j as f64 + 0.5) / n_t as f64))
                .collect();
            FamilySample { params, spec, ts }
        })
        .collect()
}

pub const PRODUCT_GRID: [f64; 7] = [-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0];

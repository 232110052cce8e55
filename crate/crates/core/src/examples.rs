//! Concrete curvature data: space forms, products of surfaces, the EPS
//! space and random algebraic curvature tensors.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::tensor::{ComplexStructure, CurvTensor, Metric, Orientation};

/// A curvature tensor at a point together with the data needed to test it.
#[derive(Debug, Clone, PartialEq)]
pub struct ExampleInstance {
    pub r: CurvTensor,
    pub g: Metric,
    pub j: Option<ComplexStructure>,
    pub orientation: Option<Orientation>,
    pub label: String,
    pub params: BTreeMap<String, f64>,
}

fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// Space form `R_ijkl = kappa (g_ik g_jl - g_il g_jk)` with `g = Id`.
pub fn constant_curvature(kappa: f64, n: usize) -> Result<ExampleInstance> {
    if n < 2 {
        return Err(Error::UnsupportedDimension { n, required: ">= 2" });
    }
    let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    let r = CurvTensor::from_fn(n, |i, j, k, l| kappa * (d(i, k) * d(j, l) - d(i, l) * d(j, k)));
    Ok(ExampleInstance {
        r,
        g: Metric::identity(n),
        j: None,
        orientation: None,
        label: "constant".into(),
        params: params(&[("kappa", kappa), ("n", n as f64)]),
    })
}

/// Riemannian product of two surfaces with Gaussian curvatures `k1`, `k2`.
pub fn product_surfaces(k1: f64, k2: f64) -> ExampleInstance {
    let mut r = CurvTensor::zeros(4);
    r.set_with_symmetries(0, 1, 0, 1, k1);
    r.set_with_symmetries(2, 3, 2, 3, k2);
    ExampleInstance {
        r,
        g: Metric::identity(4),
        j: Some(ComplexStructure::from_pairs(4, &[(0, 1), (2, 3)]).expect("valid pairs")),
        orientation: Some(Orientation::standard()),
        label: "product".into(),
        params: params(&[("k1", k1), ("k2", k2)]),
    }
}

/// Curvature of the EPS space in its left-invariant orthonormal frame.
pub fn eps_space(a: f64) -> Result<ExampleInstance> {
    if a == 0.0 || !a.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "EPS parameter a must be finite and nonzero, got {a}"
        )));
    }
    let a2 = a * a;
    let mut r = CurvTensor::zeros(4);
    for (i, j, v) in [
        (0, 1, -a2),
        (0, 2, -a2),
        (0, 3, -a2),
        (2, 3, -a2),
        (1, 2, a2),
        (1, 3, a2),
    ] {
        r.set_with_symmetries(i, j, i, j, v);
    }
    Ok(ExampleInstance {
        r,
        g: Metric::identity(4),
        j: None,
        orientation: None,
        label: "eps".into(),
        params: params(&[("a", a)]),
    })
}

/// Project an arbitrary rank-4 array onto the algebraic curvature tensors.
pub fn project_curvature(t: &CurvTensor) -> CurvTensor {
    let n = t.dim();
    let anti = CurvTensor::from_fn(n, |i, j, k, l| {
        0.25 * (t[[i, j, k, l]] - t[[j, i, k, l]] - t[[i, j, l, k]] + t[[j, i, l, k]])
    });
    let pair = CurvTensor::from_fn(n, |i, j, k, l| 0.5 * (anti[[i, j, k, l]] + anti[[k, l, i, j]]));
    CurvTensor::from_fn(n, |i, j, k, l| {
        let b = (pair[[i, j, k, l]] + pair[[i, k, l, j]] + pair[[i, l, j, k]]) / 3.0;
        pair[[i, j, k, l]] - b
    })
}

/// Seeded random algebraic curvature tensor with entries drawn uniformly from
/// `[-scale, scale]` before projection.
pub fn random_curvature(seed: u64, n: usize, scale: f64) -> CurvTensor {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw = CurvTensor::from_fn(n, |_, _, _, _| rng.random_range(-1.0..=1.0) * scale);
    project_curvature(&raw)
}

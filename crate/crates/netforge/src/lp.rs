//! Plain Monte Carlo estimate of the Lp distance between a network's
//! realization and a reference function over the uniform unit cube.

use crate::network::{Activation, Network};
use crate::sampler::GaussianSampler;
use crate::scalar::Scalar;
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpEstimate {
    pub value: f64,
    /// Delta-method standard error of `value`: the standard error of the
    /// mean of `|err|^p`, scaled by `d(value)/d(mean)`.
    pub stderr: f64,
}

/// Seeded quadrature points: `q` uniform draws over `[0, 1]^d`.
pub fn uniform_cube_points(seed: u64, d: usize, q: usize) -> Vec<Vec<f64>> {
    let sampler = GaussianSampler::new(seed);
    (0..q)
        .map(|k| (0..d).map(|i| sampler.uniform(1, k as u64, i as u64)).collect())
        .collect()
}

/// Monte Carlo Lp(uniform cube) error of `net` against `reference`.
pub fn lp_error_uniform_cube<F, R>(
    net: &Network<F>,
    act: &Activation<F>,
    reference: R,
    d: usize,
    p: f64,
    q: usize,
    seed: u64,
) -> LpEstimate
where
    F: Scalar,
    R: Fn(&[f64]) -> f64 + Sync,
{
    assert!(q >= 2, "need at least two quadrature points");
    assert!(p >= 1.0, "p must be at least 1");
    let points = uniform_cube_points(seed, d, q);
    let powered: Vec<f64> = points
        .par_iter()
        .map(|x| {
            let xs: Vec<F> = x.iter().map(|v| F::from_f64(*v)).collect();
            let y = net
                .realize(act, &xs)
                .expect("quadrature points match the input dim")[0]
                .into_f64();
            (y - reference(x)).abs().powf(p)
        })
        .collect();
    let mean = powered.iter().sum::<f64>() / q as f64;
    let var = powered.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (q as f64 - 1.0);
    let mean_se = (var / q as f64).sqrt();
    let value = mean.powf(1.0 / p);
    let stderr = if mean > 0.0 {
        mean.powf(1.0 / p - 1.0) * mean_se / p
    } else {
        0.0
    };
    LpEstimate { value, stderr }
}

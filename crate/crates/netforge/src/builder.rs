//! Compiles the Monte Carlo Euler scheme into a single ReLU network.
//!
//! Stages, bottom up:
//!  * step net — realizes `x ↦ z + x + (T/N)·drift(x)` by a skip
//!    connection around the scaled drift net, then a bias shift by the
//!    frozen increment `z`;
//!  * path net — the `N`-fold iteration of step nets for one frozen
//!    noise path, realizing the Euler trajectory endpoint as a function
//!    of the start point;
//!  * mean net — averages a payoff net over `M` input blocks;
//!  * solution net — feeds one payoff copy per path (composed through an
//!    identity block) into a weighted sum, realizing the frozen-noise
//!    Monte Carlo Euler estimate of the terminal functional.

use crate::calculus::{
    bias_net, compose, compose_via_identity, matrix_net, relu_identity, same_length_sum,
    scalar_mul, skip_compose, weighted_block_sum, CalculusError,
};
use crate::family::{ApproximationFamily, FamilyError};
use crate::matrix::Matrix;
use crate::network::{Layer, Network};
use crate::sampler::GaussianSampler;
use crate::scalar::Scalar;
use crate::scheduler::{choose_discretization, param_bound, SchemeConfig, SchedulerError};
use crate::sde::{brownian_increment, SdeProblem};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("increment list has {got} entries, expected {expected}")]
    IncrementCount { expected: usize, got: usize },
    #[error("increment {index} has length {got}, expected {expected}")]
    IncrementLength { index: usize, expected: usize, got: usize },
    #[error(transparent)]
    Calculus(#[from] CalculusError),
    #[error(transparent)]
    Scheduler(#[from] SchedulerError),
    #[error(transparent)]
    Family(#[from] FamilyError),
}

/// Exact ReLU net for `x ↦ Σ |x_i|`: per coordinate the two-channel
/// split, then a row of ones over all channels.
pub fn sum_abs_net<F: Scalar>(d: usize) -> Network<F> {
    assert!(d >= 1, "sum_abs_net needs d >= 1");
    let split = relu_identity::<F>(d).into_layers().swap_remove(0);
    let ones = Matrix::from_vec(1, 2 * d, vec![F::one(); 2 * d]);
    Network::new(vec![split, Layer::new(ones, vec![F::zero()])]).expect("chain is 2d wide")
}

/// Drift net realizing the zero map with the standard `(d, 2d, d)` shape.
pub fn zero_drift_net<F: Scalar>(d: usize) -> Network<F> {
    scalar_mul(F::zero(), &relu_identity(d))
}

/// Drift net realizing `x ↦ -x` exactly, shape `(d, 2d, d)`.
pub fn neg_identity_net<F: Scalar>(d: usize) -> Network<F> {
    let minus = Matrix::scaled_identity(d, -F::one());
    compose(&matrix_net(minus), &relu_identity(d)).expect("square shapes match")
}

/// One Euler step as a network: `x ↦ z + x + (T/N)·drift(x)`.
/// The dims depend only on the drift net, never on `z`.
pub fn build_step_net<F: Scalar>(
    drift_net: &Network<F>,
    steps: usize,
    horizon: F,
    z: &[F],
) -> Result<Network<F>, BuildError> {
    assert!(steps >= 1, "step net needs N >= 1");
    let d = drift_net.input_dim();
    let idnet = relu_identity(d);
    let scaled = scalar_mul(horizon / F::from_f64(steps as f64), drift_net);
    let body = skip_compose(&scaled, &idnet, &idnet)?;
    Ok(compose(&bias_net(z), &body)?)
}

/// The `N`-fold iteration of step nets over one frozen increment list.
/// Realizes the Euler endpoint as a function of the start point; dims
/// depend only on `(drift net, N)`, not on the increments.
pub fn build_path_net<F: Scalar>(
    drift_net: &Network<F>,
    steps: usize,
    horizon: F,
    increments: &[Vec<F>],
) -> Result<Network<F>, BuildError> {
    if increments.len() != steps {
        return Err(BuildError::IncrementCount { expected: steps, got: increments.len() });
    }
    let d = drift_net.input_dim();
    for (index, z) in increments.iter().enumerate() {
        if z.len() != d {
            return Err(BuildError::IncrementLength { index, expected: d, got: z.len() });
        }
    }
    let idnet = relu_identity(d);
    let scaled = scalar_mul(horizon / F::from_f64(steps as f64), drift_net);
    let mut path = idnet.clone();
    for z in increments {
        let stepped = skip_compose(&scaled, &path, &idnet)?;
        path = compose(&bias_net(z), &stepped)?;
    }
    Ok(path)
}

/// Empirical-mean net: consumes `M` stacked d-blocks and averages the
/// payoff net over them. `P <= M^2 · P(payoff)`.
pub fn build_mc_net<F: Scalar>(
    payoff_net: &Network<F>,
    samples: usize,
) -> Result<Network<F>, BuildError> {
    assert!(samples >= 1, "mean net needs M >= 1");
    let w = F::one() / F::from_f64(samples as f64);
    let weights = vec![w; samples];
    let nets = vec![payoff_net.clone(); samples];
    Ok(weighted_block_sum(&weights, &nets)?)
}

#[derive(Debug, Clone, Default)]
pub struct BuildOptions {
    /// Bypass the scheduler's step count (the sample count follows it
    /// unless overridden too).
    pub forced_steps: Option<usize>,
    /// Override the samples-per-build rule `M = N`.
    pub forced_samples: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Exponents {
    pub d: f64,
    pub eps: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BuildReport {
    pub d: usize,
    pub eps: f64,
    #[serde(rename = "N")]
    pub steps: usize,
    pub eps_inner: f64,
    pub seed: u64,
    pub param_count: usize,
    pub dims: Vec<usize>,
    /// Closed-form parameter bound at `(d, eps)` under the family's
    /// bound-reporting profile.
    pub bound: f64,
    pub exponents: Exponents,
}

/// Assembles the solution net from explicit per-path increment lists:
/// one path net per list, a payoff copy composed through an identity
/// block on top of each, and a `1/M`-weighted sum over the copies.
pub fn assemble_solution_net<F: Scalar>(
    payoff_net: &Network<F>,
    drift_net: &Network<F>,
    steps: usize,
    horizon: F,
    increments_per_path: &[Vec<Vec<F>>],
) -> Result<Network<F>, BuildError> {
    assert!(!increments_per_path.is_empty(), "need at least one path");
    let d = drift_net.input_dim();
    let idnet = relu_identity(d);
    let samples = increments_per_path.len();
    let weight = F::one() / F::from_f64(samples as f64);
    let mut summands = Vec::with_capacity(samples);
    for increments in increments_per_path {
        let path = build_path_net(drift_net, steps, horizon, increments)?;
        let scored = compose_via_identity(payoff_net, &path, &idnet)?;
        summands.push(scalar_mul(weight, &scored));
    }
    Ok(same_length_sum(&summands)?)
}

/// Compiles the full estimator network for a family at `(d, eps)`:
/// schedules `(N, eps_inner)`, draws `M = N` frozen noise paths from the
/// seeded sampler, and assembles the solution net. The report carries
/// the structural data plus the closed-form parameter bound of the
/// family's bound profile.
pub fn build_solution_net<F: Scalar>(
    family: &ApproximationFamily<F>,
    config: &SchemeConfig,
    d: usize,
    eps: f64,
    horizon: f64,
    seed: u64,
    options: &BuildOptions,
) -> Result<(Network<F>, BuildReport), BuildError> {
    let (scheduled_steps, eps_inner) = choose_discretization(config, d, eps)?;
    let steps = options.forced_steps.unwrap_or(scheduled_steps);
    let samples = options.forced_samples.unwrap_or(steps);
    let drift_net = family.drift_net(d, eps_inner)?;
    let payoff_net = family.payoff_net(d, eps_inner)?;

    let problem = family.net_backed_problem(d, horizon, eps_inner);
    let sampler = GaussianSampler::new(seed);
    let increments = draw_increments(&sampler, &problem, steps, samples);

    let net = assemble_solution_net(&payoff_net, &drift_net, steps, F::from_f64(horizon), &increments)?;

    let bound_cfg = family.bound_config();
    let (bound, (e_d, e_eps)) = param_bound(&bound_cfg, d, eps)?;
    let report = BuildReport {
        d,
        eps,
        steps,
        eps_inner,
        seed,
        param_count: net.param_count(),
        dims: net.dims().0.clone(),
        bound,
        exponents: Exponents { d: e_d, eps: e_eps },
    };
    Ok((net, report))
}

/// Frozen increments for paths `1..=M`, exactly as the simulator draws
/// them, so a build and a simulation with the same seed share noise.
pub fn draw_increments<F: Scalar>(
    sampler: &GaussianSampler,
    problem: &SdeProblem<F>,
    steps: usize,
    samples: usize,
) -> Vec<Vec<Vec<F>>> {
    (1..=samples)
        .map(|m| {
            (0..steps)
                .map(|n| {
                    brownian_increment(sampler, problem, steps, m, n)
                        .expect("step index is in range")
                })
                .collect()
        })
        .collect()
}

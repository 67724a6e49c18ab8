//! Monte Carlo Euler simulation of the driving SDEs.
//!
//! Dynamics: `X_t = x + ∫ drift(X_s) ds + A W_t` with a constant square
//! diffusion factor `A`. The discrete scheme over `N` steps of size `T/N`
//! is `Y_n = Z_{n-1} + Y_{n-1} + (T/N)·drift(Y_{n-1})` with increments
//! `Z_n = A·(W_{(n+1)T/N} - W_{nT/N})`, and the functional estimate is the
//! sample mean of the payoff over `M` independent paths.

use crate::matrix::Matrix;
use crate::network::{Activation, Network};
use crate::sampler::GaussianSampler;
use crate::scalar::Scalar;
use rayon::prelude::*;
use statrs::function::erf::erf;
use std::time::{Duration, Instant};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("step index {step} out of range 0..{steps}")]
    StepRange { step: usize, steps: usize },
    #[error("state length {got} does not match problem dimension {expected}")]
    StateLength { expected: usize, got: usize },
    #[error("unknown reference problem id {0:?}")]
    UnknownProblem(String),
}

/// Drift coefficient; bundled problems use the named variants, tests may
/// supply a network whose realization under ReLU is the drift.
#[derive(Debug, Clone)]
pub enum Drift<F> {
    Zero,
    NegIdentity,
    Net(Network<F>),
}

impl<F: Scalar> Drift<F> {
    pub fn eval(&self, y: &[F]) -> Vec<F> {
        match self {
            Drift::Zero => vec![F::zero(); y.len()],
            Drift::NegIdentity => y.iter().map(|v| -*v).collect(),
            Drift::Net(net) => net
                .realize(&Activation::Relu, y)
                .expect("drift net input length checked at problem construction"),
        }
    }
}

/// Terminal payoff; `SumAbs` is `x ↦ Σ |x_i|`.
#[derive(Debug, Clone)]
pub enum Payoff<F> {
    SumAbs,
    Net(Network<F>),
}

impl<F: Scalar> Payoff<F> {
    pub fn eval(&self, x: &[F]) -> F {
        match self {
            Payoff::SumAbs => x.iter().fold(F::zero(), |acc, v| acc + v.abs()),
            Payoff::Net(net) => net
                .realize(&Activation::Relu, x)
                .expect("payoff net input length checked at problem construction")[0],
        }
    }
}

#[derive(Debug, Clone)]
pub struct SdeProblem<F> {
    id: String,
    dim: usize,
    horizon: F,
    drift: Drift<F>,
    payoff: Payoff<F>,
    diffusion: Matrix<F>,
    lipschitz_kappa: F,
}

impl<F: Scalar> SdeProblem<F> {
    pub fn new(
        id: impl Into<String>,
        dim: usize,
        horizon: impl Into<f64>,
        drift: Drift<F>,
        payoff: Payoff<F>,
        diffusion: Matrix<F>,
        lipschitz_kappa: impl Into<f64>,
    ) -> Self {
        let horizon = F::from_f64(horizon.into());
        assert!(dim >= 1, "dimension must be positive");
        assert!(horizon > F::zero(), "horizon must be positive");
        assert_eq!(diffusion.rows(), dim, "diffusion factor must be d x d");
        assert_eq!(diffusion.cols(), dim, "diffusion factor must be d x d");
        if let Drift::Net(net) = &drift {
            assert_eq!(net.input_dim(), dim);
            assert_eq!(net.output_dim(), dim);
        }
        if let Payoff::Net(net) = &payoff {
            assert_eq!(net.input_dim(), dim);
            assert_eq!(net.output_dim(), 1);
        }
        SdeProblem {
            id: id.into(),
            dim,
            horizon,
            drift,
            payoff,
            diffusion,
            lipschitz_kappa: F::from_f64(lipschitz_kappa.into()),
        }
    }

    /// Zero drift, diffusion `√2·I`, payoff `Σ |x_i|`.
    pub fn heat_abs(d: usize, horizon: f64) -> Self {
        SdeProblem::new(
            "heat_abs",
            d,
            horizon,
            Drift::Zero,
            Payoff::SumAbs,
            Matrix::scaled_identity(d, F::from_f64(std::f64::consts::SQRT_2)),
            0.0,
        )
    }

    /// Drift `-y`, diffusion `√2·I`, payoff `Σ |x_i|`.
    pub fn ou_abs(d: usize, horizon: f64) -> Self {
        SdeProblem::new(
            "ou_abs",
            d,
            horizon,
            Drift::NegIdentity,
            Payoff::SumAbs,
            Matrix::scaled_identity(d, F::from_f64(std::f64::consts::SQRT_2)),
            1.0,
        )
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn horizon(&self) -> F {
        self.horizon
    }

    pub fn drift(&self) -> &Drift<F> {
        &self.drift
    }

    pub fn payoff(&self) -> &Payoff<F> {
        &self.payoff
    }

    pub fn diffusion(&self) -> &Matrix<F> {
        &self.diffusion
    }

    pub fn lipschitz_kappa(&self) -> F {
        self.lipschitz_kappa
    }

    /// Replace drift and payoff, keeping dynamics constants.
    pub fn with_coefficients(mut self, drift: Drift<F>, payoff: Payoff<F>) -> Self {
        self.drift = drift;
        self.payoff = payoff;
        self
    }
}

/// One frozen Brownian increment `A·√(T/N)·ξ(m, n)`.
pub fn brownian_increment<F: Scalar>(
    sampler: &GaussianSampler,
    problem: &SdeProblem<F>,
    steps: usize,
    path: usize,
    step: usize,
) -> Result<Vec<F>, SimError> {
    if step >= steps {
        return Err(SimError::StepRange { step, steps });
    }
    let d = problem.dim();
    let scale = (problem.horizon().into_f64() / steps as f64).sqrt();
    let xi: Vec<F> = (0..d)
        .map(|i| F::from_f64(scale * sampler.normal(path as u64, step as u64, i as u64)))
        .collect();
    Ok(problem.diffusion().matvec(&xi))
}

/// Discrete step map: `(z, y) ↦ z + y + (T/N)·drift(y)`.
pub fn euler_step<F: Scalar>(
    z: &[F],
    y: &[F],
    problem: &SdeProblem<F>,
    steps: usize,
) -> Result<Vec<F>, SimError> {
    let d = problem.dim();
    if z.len() != d {
        return Err(SimError::StateLength { expected: d, got: z.len() });
    }
    if y.len() != d {
        return Err(SimError::StateLength { expected: d, got: y.len() });
    }
    let h = problem.horizon() / F::from_f64(steps as f64);
    let drift = problem.drift().eval(y);
    Ok((0..d).map(|i| z[i] + y[i] + h * drift[i]).collect())
}

#[derive(Debug, Clone)]
pub struct EnsembleResult<F> {
    /// Terminal states, one per path, in path order.
    pub terminals: Vec<Vec<F>>,
    /// Sample mean of the payoff over the terminal states.
    pub functional: F,
    pub elapsed: Duration,
}

/// Runs `M` frozen-noise Euler paths from `x` and averages the payoff.
/// Paths are keyed 1..=M in the sampler, so results do not depend on `M`
/// for shared path indices nor on evaluation order.
pub fn simulate_ensemble<F: Scalar>(
    problem: &SdeProblem<F>,
    steps: usize,
    paths: usize,
    x: &[F],
    sampler: &GaussianSampler,
) -> Result<EnsembleResult<F>, SimError> {
    assert!(steps >= 1 && paths >= 1, "simulation needs N, M >= 1");
    let d = problem.dim();
    if x.len() != d {
        return Err(SimError::StateLength { expected: d, got: x.len() });
    }
    let start = Instant::now();
    let terminals: Vec<Vec<F>> = (1..=paths)
        .into_par_iter()
        .map(|m| {
            let mut y = x.to_vec();
            for n in 0..steps {
                let z = brownian_increment(sampler, problem, steps, m, n)
                    .expect("step index within range");
                y = euler_step(&z, &y, problem, steps).expect("state length preserved");
            }
            y
        })
        .collect();
    let sum = terminals
        .iter()
        .fold(F::zero(), |acc, t| acc + problem.payoff().eval(t));
    let functional = sum / F::from_f64(paths as f64);
    Ok(EnsembleResult { terminals, functional, elapsed: start.elapsed() })
}

/// Mean of `|mu + sigma·Z|` for standard normal `Z` (folded normal mean).
pub fn folded_normal_mean(mu: f64, sigma_sq: f64) -> f64 {
    if sigma_sq == 0.0 {
        return mu.abs();
    }
    let sigma = sigma_sq.sqrt();
    let scaled = mu / (sigma * std::f64::consts::SQRT_2);
    sigma * (2.0 / std::f64::consts::PI).sqrt() * (-mu * mu / (2.0 * sigma_sq)).exp()
        + mu * erf(scaled)
}

/// Closed-form value of `E[payoff(X_T)]` for the bundled problems:
/// per coordinate the terminal law is Gaussian, so the sum-of-absolute-
/// values payoff integrates to a sum of folded normal means.
pub fn reference_solution(
    problem_id: &str,
    d: usize,
    horizon: f64,
    x: &[f64],
) -> Result<f64, SimError> {
    assert_eq!(x.len(), d, "reference point must have length d");
    match problem_id {
        // X_T,i ~ N(x_i, 2T)
        "heat_abs" => Ok(x.iter().map(|&xi| folded_normal_mean(xi, 2.0 * horizon)).sum()),
        // X_T,i ~ N(x_i e^{-T}, 1 - e^{-2T})
        "ou_abs" => {
            let decay = (-horizon).exp();
            let var = 1.0 - (-2.0 * horizon).exp();
            Ok(x.iter().map(|&xi| folded_normal_mean(xi * decay, var)).sum())
        }
        other => Err(SimError::UnknownProblem(other.to_string())),
    }
}

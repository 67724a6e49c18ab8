//! Scheme configuration: how a target accuracy maps to a step/sample
//! count and an inner coefficient accuracy, and the closed-form bound on
//! the parameter count of the compiled network.

use crate::bounds::BoundParams;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SchedulerError {
    #[error("target accuracy eps = {0} must lie in (0, 1]")]
    EpsRange(f64),
    #[error("inner accuracy underflowed to zero (eps = {eps}, gamma·d^delta = {denom})")]
    EpsInnerUnderflow { eps: f64, denom: f64 },
    #[error("step count {0} exceeds the addressable range")]
    StepOverflow(f64),
}

/// Scheduler constants: the bound-parameter bundle plus the derived
/// accuracy-splitting constants `gamma` and `delta`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeConfig {
    pub params: BoundParams,
    pub gamma: f64,
    pub delta: f64,
}

impl SchemeConfig {
    /// Derives `gamma = 46 e^c c^2 (4 e^{c+1} c^3)^{2 theta}` and
    /// `delta = max{d5 + theta (d1 + d2), d4 + d6 + 2 theta (d1 + d2)}`
    /// from the parameter bundle.
    pub fn from_params(params: BoundParams) -> Self {
        let c = params.kappa;
        let theta = params.theta;
        let gamma = 46.0 * c.exp() * c * c * (4.0 * (c + 1.0).exp() * c.powi(3)).powf(2.0 * theta);
        let delta = Self::delta_of(&params);
        SchemeConfig { params, gamma, delta }
    }

    /// Caller-supplied `gamma`/`delta` overrides.
    pub fn with_constants(params: BoundParams, gamma: f64, delta: f64) -> Self {
        SchemeConfig { params, gamma, delta }
    }

    pub fn delta_of(params: &BoundParams) -> f64 {
        let inner = params.theta * (params.d1 + params.d2);
        (params.d5 + inner).max(params.d4 + params.d6 + 2.0 * inner)
    }

    /// Desk-scale scheduling profile: step counts follow the square-law
    /// shape `N = ceil((2 scale / eps)^2)` with no dimension dependence,
    /// and the inner accuracy is the target accuracy itself. The `scale`
    /// is deliberately allowed below 1 so sweeps stay buildable; bound
    /// reporting should use a validated profile instead.
    pub fn desk(scale: f64) -> Self {
        assert!(scale > 0.0, "desk scale must be positive");
        let params = BoundParams {
            kappa: scale,
            theta: 1.0,
            p: 2.0,
            e: 0.0,
            d0: 0.0,
            d1: 0.0,
            d2: 0.0,
            d3: 4.0,
            d4: 0.0,
            d5: 0.0,
            d6: 0.0,
            n0: 0.5,
            n1: 0.0,
            n2: 2.0,
        };
        SchemeConfig::with_constants(params, 1.0, 0.0)
    }
}

/// Picks the step count and inner accuracy for a target accuracy:
/// `N` is the smallest positive integer at or above
/// `(2 c d^{d0} / eps)^{1/n0}`, and the inner accuracy is
/// `eps / (gamma d^{delta})` clamped into `(0, 1]`.
#[allow(clippy::neg_cmp_op_on_partial_ord)] // negated form rejects NaN
pub fn choose_discretization(
    config: &SchemeConfig,
    d: usize,
    eps: f64,
) -> Result<(usize, f64), SchedulerError> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(SchedulerError::EpsRange(eps));
    }
    let p = &config.params;
    let threshold = (2.0 * p.kappa * (d as f64).powf(p.d0) / eps).powf(1.0 / p.n0);
    if !threshold.is_finite() || threshold >= 9.0e15 {
        return Err(SchedulerError::StepOverflow(threshold));
    }
    let steps = if threshold <= 1.0 { 1 } else { threshold.ceil() as usize };
    let denom = config.gamma * (d as f64).powf(config.delta);
    let eps_inner = eps / denom;
    if eps_inner == 0.0 || !eps_inner.is_finite() {
        return Err(SchedulerError::EpsInnerUnderflow { eps, denom });
    }
    Ok((steps, eps_inner.min(1.0)))
}

/// Closed-form bound on the parameter count of the compiled network:
/// `c · d^{E_d} · eps^{-E_eps}` with
/// `c = 3 c0^2 2^{n1+n2+1} (2 c0)^{(n1+n2+1)/n0} gamma^e`,
/// `E_d = d0 (n1+n2+1)/n0 + d3 + e·delta`, and
/// `E_eps = (n1+n2+1)/n0 + e`. Returns the value and `(E_d, E_eps)`.
#[allow(clippy::neg_cmp_op_on_partial_ord)] // negated form rejects NaN
pub fn param_bound(config: &SchemeConfig, d: usize, eps: f64) -> Result<(f64, (f64, f64)), SchedulerError> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(SchedulerError::EpsRange(eps));
    }
    let p = &config.params;
    let rate = (p.n1 + p.n2 + 1.0) / p.n0;
    let c = 3.0
        * p.kappa.powi(2)
        * 2f64.powf(p.n1 + p.n2 + 1.0)
        * (2.0 * p.kappa).powf(rate)
        * config.gamma.powf(p.e);
    let e_d = p.d0 * rate + p.d3 + p.e * config.delta;
    let e_eps = rate + p.e;
    let value = c * (d as f64).powf(e_d) * eps.powf(-e_eps);
    Ok((value, (e_d, e_eps)))
}

/// Per-instance form of the parameter bound, phrased in the actually
/// chosen step count: `3 c0^2 N^{n1+n2+1} d^{d3} eps_inner^{-e}`.
pub fn solution_param_bound_at(config: &SchemeConfig, d: usize, steps: usize, eps_inner: f64) -> f64 {
    let p = &config.params;
    3.0 * p.kappa.powi(2)
        * (steps as f64).powf(p.n1 + p.n2 + 1.0)
        * (d as f64).powf(p.d3)
        * eps_inner.powf(-p.e)
}

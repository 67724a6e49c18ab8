//! Coefficient-network families: for each dimension and inner accuracy
//! they hand out a payoff network `R^d -> R` and a drift network
//! `R^d -> R^d`, together with the declared growth constants under which
//! the compile-time guarantees hold.
//!
//! The bundled families represent their coefficients exactly with ReLU
//! blocks, so the inner accuracy influences only the scheduler.

use crate::builder::{neg_identity_net, sum_abs_net, zero_drift_net};
use crate::bounds::BoundParams;
use crate::network::Network;
use crate::scalar::Scalar;
use crate::scheduler::SchemeConfig;
use crate::sde::{Drift, Payoff, SdeProblem};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FamilyError {
    #[error("payoff net for d = {d} must map R^d to R; got {in_dim} -> {out_dim}")]
    PayoffShape { d: usize, in_dim: usize, out_dim: usize },
    #[error("drift net for d = {d} must map R^d to itself; got {in_dim} -> {out_dim}")]
    DriftShape { d: usize, in_dim: usize, out_dim: usize },
    #[error("{role} net for d = {d}, eps = {eps} has {count} parameters, above the declared cap {cap}")]
    ParamCap { role: &'static str, d: usize, eps: f64, count: usize, cap: f64 },
}

/// Declared constants of a family: growth/Lipschitz level `kappa`,
/// polynomial degree `theta`, parameter-cost exponents `d3` and `e`, and
/// the remaining dimension exponents entering the error bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyConstants {
    pub kappa: f64,
    pub theta: f64,
    pub e: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub d4: f64,
    pub d5: f64,
    pub d6: f64,
}

type NetFn<F> = Box<dyn Fn(usize, f64) -> Network<F> + Send + Sync>;

pub struct ApproximationFamily<F> {
    name: String,
    constants: FamilyConstants,
    diffusion_scale: f64,
    payoff: NetFn<F>,
    drift: NetFn<F>,
}

impl<F: Scalar> ApproximationFamily<F> {
    /// Registers a family and probes the declared parameter caps on a
    /// small dimension grid; every later fetch re-checks its own instance.
    pub fn new(
        name: impl Into<String>,
        constants: FamilyConstants,
        diffusion_scale: f64,
        payoff: NetFn<F>,
        drift: NetFn<F>,
    ) -> Result<Self, FamilyError> {
        Self::with_probe(name, constants, diffusion_scale, payoff, drift, &[1, 2, 4, 8])
    }

    /// Like [`Self::new`] with an explicit probe grid, for families that
    /// are only defined at specific dimensions.
    pub fn with_probe(
        name: impl Into<String>,
        constants: FamilyConstants,
        diffusion_scale: f64,
        payoff: NetFn<F>,
        drift: NetFn<F>,
        probe_dims: &[usize],
    ) -> Result<Self, FamilyError> {
        let family = ApproximationFamily {
            name: name.into(),
            constants,
            diffusion_scale,
            payoff,
            drift,
        };
        for &d in probe_dims {
            for eps in [1.0, 0.5, 0.25] {
                family.payoff_net(d, eps)?;
                family.drift_net(d, eps)?;
            }
        }
        Ok(family)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn constants(&self) -> &FamilyConstants {
        &self.constants
    }

    pub fn diffusion_scale(&self) -> f64 {
        self.diffusion_scale
    }

    /// Payoff network for `(d, eps)`; enforces the declared cap
    /// `P <= kappa d^{d3} eps^{-e}`.
    pub fn payoff_net(&self, d: usize, eps: f64) -> Result<Network<F>, FamilyError> {
        let net = (self.payoff)(d, eps);
        if net.input_dim() != d || net.output_dim() != 1 {
            return Err(FamilyError::PayoffShape {
                d,
                in_dim: net.input_dim(),
                out_dim: net.output_dim(),
            });
        }
        let cap = self.constants.kappa * (d as f64).powf(self.constants.d3) * eps.powf(-self.constants.e);
        if net.param_count() as f64 > cap {
            return Err(FamilyError::ParamCap {
                role: "payoff",
                d,
                eps,
                count: net.param_count(),
                cap,
            });
        }
        Ok(net)
    }

    /// Drift network for `(d, eps)`; enforces the declared cap
    /// `P <= kappa d^{d3/2} eps^{-e/2}`.
    pub fn drift_net(&self, d: usize, eps: f64) -> Result<Network<F>, FamilyError> {
        let net = (self.drift)(d, eps);
        if net.input_dim() != d || net.output_dim() != d {
            return Err(FamilyError::DriftShape {
                d,
                in_dim: net.input_dim(),
                out_dim: net.output_dim(),
            });
        }
        let cap = self.constants.kappa
            * (d as f64).powf(self.constants.d3 / 2.0)
            * eps.powf(-self.constants.e / 2.0);
        if net.param_count() as f64 > cap {
            return Err(FamilyError::ParamCap {
                role: "drift",
                d,
                eps,
                count: net.param_count(),
                cap,
            });
        }
        Ok(net)
    }

    /// Simulation problem with the same increments and net-backed
    /// coefficients, for emulation cross-checks.
    pub fn net_backed_problem(&self, d: usize, horizon: f64, eps_inner: f64) -> SdeProblem<F> {
        let drift = Drift::Net(self.drift_net(d, eps_inner).expect("registered family"));
        let payoff = Payoff::Net(self.payoff_net(d, eps_inner).expect("registered family"));
        SdeProblem::new(
            self.name.clone(),
            d,
            horizon,
            drift,
            payoff,
            crate::matrix::Matrix::scaled_identity(d, F::from_f64(self.diffusion_scale)),
            self.constants.kappa,
        )
    }

    /// Bound-reporting profile: the scheme-level constant bundle under
    /// which the parameter bound provably dominates this family's
    /// construction. The scheme constant is chosen to cover the identity
    /// block cost, the per-step parameter increment, and the payoff
    /// stage factor; the step exponents are the square-law instantiation.
    pub fn bound_config(&self) -> SchemeConfig {
        let c = &self.constants;
        let kappa = 2.0 * c.kappa * c.kappa + 27.0;
        let params = BoundParams {
            kappa,
            theta: c.theta,
            p: 2.0,
            e: c.e,
            d0: c.d6 + (c.d1 + c.d2) * (c.theta + 1.0),
            d1: c.d1,
            d2: c.d2,
            d3: c.d3.max(4.0),
            d4: c.d4,
            d5: c.d5,
            d6: c.d6,
            n0: 0.5,
            n1: 0.0,
            n2: 2.0,
        };
        SchemeConfig::from_params(params)
    }

    /// Exact ReLU family for the zero-drift absolute-value problem.
    pub fn heat_abs() -> Self {
        ApproximationFamily::new(
            "heat_abs",
            FamilyConstants {
                kappa: 7.0,
                theta: 1.0,
                e: 0.0,
                d1: 0.5,
                d2: 0.0,
                d3: 4.0,
                d4: 0.0,
                d5: 0.0,
                d6: 0.5,
            },
            std::f64::consts::SQRT_2,
            Box::new(|d, _| sum_abs_net(d)),
            Box::new(|d, _| zero_drift_net(d)),
        )
        .expect("bundled family satisfies its own caps")
    }

    /// Exact ReLU family for the mean-reverting absolute-value problem.
    pub fn ou_abs() -> Self {
        ApproximationFamily::new(
            "ou_abs",
            FamilyConstants {
                kappa: 7.0,
                theta: 1.0,
                e: 0.0,
                d1: 0.5,
                d2: 0.0,
                d3: 4.0,
                d4: 0.0,
                d5: 0.0,
                d6: 0.5,
            },
            std::f64::consts::SQRT_2,
            Box::new(|d, _| sum_abs_net(d)),
            Box::new(|d, _| neg_identity_net(d)),
        )
        .expect("bundled family satisfies its own caps")
    }

    pub fn bundled(name: &str) -> Option<Self> {
        match name {
            "heat_abs" => Some(Self::heat_abs()),
            "ou_abs" => Some(Self::ou_abs()),
            _ => None,
        }
    }
}

impl<F> std::fmt::Debug for ApproximationFamily<F> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ApproximationFamily")
            .field("name", &self.name)
            .field("constants", &self.constants)
            .field("diffusion_scale", &self.diffusion_scale)
            .finish()
    }
}

//! Closed-form error and moment bounds for the Monte Carlo Euler method.
//!
//! All functions are pure arithmetic on the supplied constants; nothing is
//! simulated here. `BoundParams` bundles the constants every bound is
//! phrased in.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum BoundError {
    #[error("parameter {name} = {value} outside its admissible range {range}")]
    Range { name: &'static str, value: f64, range: &'static str },
    #[error("step size h = {h} must lie in (0, T] with T = {t}")]
    StepSize { h: f64, t: f64 },
    #[error("sample count must be at least 1")]
    Samples,
}

/// Constant bundle parameterizing the bounds. `kappa` plays the role of
/// both the coefficient Lipschitz/growth constant and, at the scheme
/// level, the overall scheme constant; the two uses never mix within one
/// formula.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundParams {
    pub kappa: f64,
    pub theta: f64,
    pub p: f64,
    pub e: f64,
    pub d0: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub d4: f64,
    pub d5: f64,
    pub d6: f64,
    pub n0: f64,
    pub n1: f64,
    pub n2: f64,
}

impl BoundParams {
    /// Validates the declared ranges: `kappa, theta >= 1`, `p >= 2`,
    /// `e, d0..d6, n1, n2 >= 0`, `n0 > 0`. The negated comparisons also
    /// reject NaN.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<(), BoundError> {
        let nonneg: [(&'static str, f64); 10] = [
            ("e", self.e),
            ("d0", self.d0),
            ("d1", self.d1),
            ("d2", self.d2),
            ("d3", self.d3),
            ("d4", self.d4),
            ("d5", self.d5),
            ("d6", self.d6),
            ("n1", self.n1),
            ("n2", self.n2),
        ];
        if !(self.kappa >= 1.0) {
            return Err(BoundError::Range { name: "kappa", value: self.kappa, range: "[1, inf)" });
        }
        if !(self.theta >= 1.0) {
            return Err(BoundError::Range { name: "theta", value: self.theta, range: "[1, inf)" });
        }
        if !(self.p >= 2.0) {
            return Err(BoundError::Range { name: "p", value: self.p, range: "[2, inf)" });
        }
        if !(self.n0 > 0.0) {
            return Err(BoundError::Range { name: "n0", value: self.n0, range: "(0, inf)" });
        }
        for (name, value) in nonneg {
            if !(value >= 0.0) {
                return Err(BoundError::Range { name, value, range: "[0, inf)" });
            }
        }
        Ok(())
    }

    pub fn validated(self) -> Result<Self, BoundError> {
        self.validate()?;
        Ok(self)
    }
}

/// Discrete Gronwall bounds for `x_n <= alpha x_{n-1} + beta`:
/// the geometric-sum form and the coarser exponential form,
/// `(alpha^n x_0 + beta Σ_{k<n} alpha^k, alpha^n x_0 + beta e^alpha)`.
pub fn gronwall_bound(alpha: f64, beta: f64, x0: f64, n: u32) -> (f64, f64) {
    assert!(n >= 1, "gronwall bound needs n >= 1");
    let lead = alpha.powi(n as i32) * x0;
    let mut geom_sum = 0.0;
    let mut pow = 1.0;
    for _ in 0..n {
        geom_sum += pow;
        pow *= alpha;
    }
    (lead + beta * geom_sum, lead + beta * alpha.exp())
}

/// Lp a-priori bound `alpha^N x0_norm + e^alpha · beta · (gamma + z_sup)`
/// for recursions `|X_n| <= alpha |X_{n-1}| + beta (gamma + |Z_{n-1}|)`.
pub fn apriori_moment_bound(
    alpha: f64,
    beta: f64,
    gamma: f64,
    x0_norm: f64,
    z_sup: f64,
    steps: u32,
) -> f64 {
    assert!(steps >= 1, "a-priori bound needs N >= 1");
    alpha.powi(steps as i32) * x0_norm + alpha.exp() * beta * (gamma + z_sup)
}

/// Weak perturbation error of the piecewise-frozen Euler dynamics:
/// `sqrt(h/T) e^{l+3+2L1+(lL1+2L1+2)T} max{1,L0} ·
///  [ ||xi|| + 2 + max{1,||f1(0)||} max{1,T} + sqrt((2max{l,1}-1) tr(B*B) T) ]^{1+l}`.
#[allow(clippy::too_many_arguments, clippy::neg_cmp_op_on_partial_ord)]
pub fn euler_weak_bound(
    l0: f64,
    l1: f64,
    l: f64,
    t: f64,
    h: f64,
    trace_btb: f64,
    xi_norm: f64,
    f1_at_zero_norm: f64,
) -> Result<f64, BoundError> {
    if !(h > 0.0 && h <= t) {
        return Err(BoundError::StepSize { h, t });
    }
    let rate = (h / t).sqrt();
    let growth = (l + 3.0 + 2.0 * l1 + (l * l1 + 2.0 * l1 + 2.0) * t).exp();
    let base = xi_norm
        + 2.0
        + f1_at_zero_norm.max(1.0) * t.max(1.0)
        + ((2.0 * l.max(1.0) - 1.0) * trace_btb * t).sqrt();
    Ok(rate * growth * l0.max(1.0) * base.powf(1.0 + l))
}

/// Monte Carlo sampling error in Lp:
/// `2^{theta+2} p kappa (p theta + p + 1)^theta (kappa T + 1)^theta
///  e^{kappa theta T} (kappa^theta + 1) d^{d0 + d1 theta} M^{-1/2}`.
pub fn mc_error_bound(params: &BoundParams, d: usize, t: f64, samples: usize) -> Result<f64, BoundError> {
    if samples < 1 {
        return Err(BoundError::Samples);
    }
    let (kappa, theta, p) = (params.kappa, params.theta, params.p);
    let dd = d as f64;
    Ok(2f64.powf(theta + 2.0)
        * p
        * kappa
        * (p * theta + p + 1.0).powf(theta)
        * (kappa * t + 1.0).powf(theta)
        * (kappa * theta * t).exp()
        * (kappa.powf(theta) + 1.0)
        * dd.powf(params.d0 + params.d1 * theta)
        / (samples as f64).sqrt())
}

/// Combined weak-plus-sampling bound:
/// `2^{4theta+5} max{1,T}^{theta+1} iota^{2theta+3}
///  e^{6 iota + 5 iota^2 T} p (p theta + p + 1)^theta
///  d^{d0 + d1 (theta+1)} (sqrt(h/T) + M^{-1/2})` with
/// `iota = max{kappa, theta, 1}`.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn combined_weak_bound(
    params: &BoundParams,
    d: usize,
    t: f64,
    h: f64,
    samples: usize,
) -> Result<f64, BoundError> {
    if !(h > 0.0 && h <= t) {
        return Err(BoundError::StepSize { h, t });
    }
    if samples < 1 {
        return Err(BoundError::Samples);
    }
    let (kappa, theta, p) = (params.kappa, params.theta, params.p);
    let iota = kappa.max(theta).max(1.0);
    let dd = d as f64;
    Ok(2f64.powf(4.0 * theta + 5.0)
        * t.max(1.0).powf(theta + 1.0)
        * iota.powf(2.0 * theta + 3.0)
        * (6.0 * iota + 5.0 * iota * iota * t).exp()
        * p
        * (p * theta + p + 1.0).powf(theta)
        * dd.powf(params.d0 + params.d1 * (theta + 1.0))
        * ((h / t).sqrt() + 1.0 / (samples as f64).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn params(kappa: f64, theta: f64, p: f64) -> BoundParams {
        BoundParams {
            kappa,
            theta,
            p,
            e: 0.0,
            d0: 0.0,
            d1: 0.0,
            d2: 0.0,
            d3: 0.0,
            d4: 0.0,
            d5: 0.0,
            d6: 0.0,
            n0: 0.5,
            n1: 0.0,
            n2: 2.0,
        }
    }

    #[test]
    fn validate_enforces_ranges() {
        assert!(params(1.0, 1.0, 2.0).validate().is_ok());
        assert_eq!(
            params(0.5, 1.0, 2.0).validate().unwrap_err(),
            BoundError::Range { name: "kappa", value: 0.5, range: "[1, inf)" }
        );
        let mut bad = params(1.0, 1.0, 2.0);
        bad.n0 = 0.0;
        assert!(matches!(bad.validate().unwrap_err(), BoundError::Range { name: "n0", .. }));
    }

    #[test]
    fn gronwall_alpha_zero_returns_beta_twice() {
        let (geom, expo) = gronwall_bound(0.0, 3.0, 7.0, 2);
        assert_eq!(geom, 3.0);
        assert_eq!(expo, 3.0);
    }

    #[test]
    fn gronwall_hand_case() {
        // alpha = 2, beta = 1, x0 = 1, n = 3: 8 + (1 + 2 + 4) = 15
        let (geom, expo) = gronwall_bound(2.0, 1.0, 1.0, 3);
        assert_eq!(geom, 15.0);
        assert!((expo - (8.0 + 2f64.exp())).abs() < 1e-12);
        assert!(geom <= expo);
    }

    #[test]
    fn gronwall_recursion_saturates_geometric_form() {
        for &(alpha, beta, x0, n) in
            &[(0.5, 1.0, 2.0, 7u32), (1.0, 0.3, 0.0, 11), (2.5, 0.0, 4.0, 5), (1.2, 2.0, 1.0, 9)]
        {
            let mut x = x0;
            for _ in 0..n {
                x = alpha * x + beta;
            }
            let (geom, _) = gronwall_bound(alpha, beta, x0, n);
            assert!((x - geom).abs() <= 1e-12 * geom.abs().max(1.0), "{x} vs {geom}");
        }
    }

    #[test]
    fn apriori_beta_zero_is_pure_power() {
        let v = apriori_moment_bound(0.5, 0.0, 3.0, 8.0, 1.0, 3);
        assert_eq!(v, 1.0);
    }

    #[test]
    fn apriori_hand_case() {
        // alpha = beta = 1, gamma = 0, z_sup = 1: x0 + e
        let v = apriori_moment_bound(1.0, 1.0, 0.0, 2.0, 1.0, 17);
        assert!((v - (2.0 + 1f64.exp())).abs() < 1e-12);
    }

    #[test]
    fn apriori_dominates_simulated_recursion() {
        // |X_n| <= a|X_{n-1}| + b(g + |Z_{n-1}|) with |Z| <= zmax.
        // Parameters sit where the exponential form covers the geometric
        // sum (1 + a + a^2 <= e^a), so domination is exact, not slack.
        let (a, b, g, zmax, steps) = (2.0, 0.5, 0.25, 1.0, 3u32);
        let s = crate::sampler::GaussianSampler::new(3);
        let p = 4.0;
        let trials = 1000;
        let mut acc = 0.0;
        for m in 0..trials {
            let mut x: f64 = 1.0;
            for n in 0..steps {
                let z = s.normal(m, n as u64, 0).clamp(-zmax, zmax).abs();
                x = a * x + b * (g + z);
            }
            acc += x.powf(p);
        }
        let lp = (acc / trials as f64).powf(1.0 / p);
        let bound = apriori_moment_bound(a, b, g, 1.0, zmax, steps);
        assert!(lp <= bound, "{lp} > {bound}");
    }

    #[test]
    fn euler_weak_plug_in() {
        // h = T = 1, all structural constants zero:
        // exponent l+3+2L1+(lL1+2L1+2)T = 5, bracket = 0+2+1+0 = 3
        let v = euler_weak_bound(0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0).unwrap();
        assert!((v - 3.0 * 5f64.exp()).abs() < 1e-12 * v);
    }

    #[test]
    fn euler_weak_monotone_in_h() {
        let mut prev = 0.0;
        for k in 1..=8 {
            let h = k as f64 / 8.0;
            let v = euler_weak_bound(1.0, 1.0, 1.0, 1.0, h, 2.0, 0.5, 0.0).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn euler_weak_rejects_h_above_t() {
        assert_eq!(
            euler_weak_bound(1.0, 1.0, 1.0, 1.0, 1.5, 2.0, 0.5, 0.0).unwrap_err(),
            BoundError::StepSize { h: 1.5, t: 1.0 }
        );
    }

    #[test]
    fn mc_error_scales_as_inverse_sqrt_m() {
        let p = params(1.5, 2.0, 2.0);
        let a = mc_error_bound(&p, 3, 1.0, 100).unwrap();
        let b = mc_error_bound(&p, 3, 1.0, 400).unwrap();
        assert!((a / b - 2.0).abs() < 1e-12);
    }

    #[test]
    fn mc_error_plug_in() {
        // theta = p = 2, kappa = 1, T = 1, d = 1, M = 1:
        // 2^4 · 2 · 1 · 7^2 · 2^2 · e^2 · 2
        let p = params(1.0, 2.0, 2.0);
        let v = mc_error_bound(&p, 1, 1.0, 1).unwrap();
        let want = 16.0 * 2.0 * 49.0 * 4.0 * 2f64.exp() * 2.0;
        assert!((v - want).abs() < 1e-12 * want);
    }

    #[test]
    fn combined_plug_in() {
        // kappa = theta = 1, T = 1, p = 2, d = 1, h = T, M = 1:
        // 2^9 · e^11 · 2 · 5 · 2
        let p = params(1.0, 1.0, 2.0);
        let v = combined_weak_bound(&p, 1, 1.0, 1.0, 1).unwrap();
        let want = 512.0 * 11f64.exp() * 2.0 * 5.0 * 2.0;
        assert!((v - want).abs() < 1e-12 * want);
    }

    #[test]
    fn combined_is_const_times_rate_sum() {
        let p = params(2.0, 1.0, 2.0);
        let (t, d) = (2.0, 3);
        let c1 = combined_weak_bound(&p, d, t, t, 1).unwrap() / 2.0;
        for &(h, m) in &[(0.5, 4usize), (1.0, 16), (0.125, 100)] {
            let v = combined_weak_bound(&p, d, t, h, m).unwrap();
            let rate = (h / t).sqrt() + 1.0 / (m as f64).sqrt();
            assert!((v - c1 * rate).abs() < 1e-10 * v);
        }
    }

    #[test]
    fn combined_rejects_bad_inputs() {
        let p = params(1.0, 1.0, 2.0);
        assert!(matches!(
            combined_weak_bound(&p, 1, 1.0, 2.0, 1).unwrap_err(),
            BoundError::StepSize { .. }
        ));
        assert_eq!(combined_weak_bound(&p, 1, 1.0, 0.5, 0).unwrap_err(), BoundError::Samples);
    }
}

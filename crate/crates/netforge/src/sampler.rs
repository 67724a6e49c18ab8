//! Deterministic counter-based Gaussian source.
//!
//! Every variate is a pure function of `(seed, path, step, coordinate)`,
//! so path `m` is identical no matter how many paths are drawn or in what
//! order — parallel and sequential simulations agree bit for bit, and a
//! network built from frozen increments reproduces the exact simulation.
//!
//! Uniform bits come from chained splitmix64-style avalanches over the
//! key words; the Box–Muller transform maps two uniforms to a normal.

const GOLDEN: u64 = 0x9e3779b97f4a7c15;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

#[inline]
fn key(seed: u64, m: u64, n: u64, i: u64) -> u64 {
    let mut k = mix(seed ^ GOLDEN);
    k = mix(k.wrapping_add(m.wrapping_mul(0xa24baed4963ee407)));
    k = mix(k.wrapping_add(n.wrapping_mul(0x9fb21c651e98df25)));
    mix(k.wrapping_add(i.wrapping_mul(GOLDEN)))
}

/// Uniform in the open interval (0, 1); never returns 0, so `ln` is safe.
#[inline]
fn unit_open(bits: u64) -> f64 {
    ((bits >> 11) as f64 + 0.5) * (1.0 / 9007199254740992.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GaussianSampler {
    seed: u64,
}

impl GaussianSampler {
    pub fn new(seed: u64) -> Self {
        GaussianSampler { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Standard normal variate at index (path `m`, step `n`, coordinate `i`).
    pub fn normal(&self, m: u64, n: u64, i: u64) -> f64 {
        let k = key(self.seed, m, n, i);
        let u1 = unit_open(mix(k ^ 0x2545f4914f6cdd1d));
        let u2 = unit_open(mix(k ^ 0x6a09e667f3bcc909));
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    /// Uniform in [0, 1) on an independent stream, for quadrature points
    /// and other non-increment uses; `tag` separates streams.
    pub fn uniform(&self, tag: u64, n: u64, i: u64) -> f64 {
        let k = key(self.seed ^ 0x517cc1b727220a95, tag, n, i);
        (mix(k) >> 11) as f64 * (1.0 / 9007199254740992.0)
    }
}

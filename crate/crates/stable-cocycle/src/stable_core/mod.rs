//! α-stable laws S_α(σ, β, μ): characteristic function, sampling, CDF and
//! quantile by numerical inversion, parameter algebra and truncated moments.

mod dist;
mod moments;
mod sample;

use core::f64::consts::{FRAC_2_PI, FRAC_PI_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub use dist::{DistEval, NumericConfig};
pub use moments::{tail_is_heavy, MomentEstimate, MomentMethod, TailSampler};
pub use sample::{sample, sample_standard};

/// Parameters of an α-stable law in the standard (Samorodnitsky–Taqqu)
/// parametrization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableParams {
    pub alpha: f64,
    pub sigma: f64,
    pub beta: f64,
    pub mu: f64,
}

impl StableParams {
    /// Validates and builds a parameter set. At α = 2 the skewness is vacuous
    /// and is normalized to 0.
    pub fn new(alpha: f64, sigma: f64, beta: f64, mu: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(invalid!("alpha must lie in (0, 2], got {alpha}"));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(invalid!("sigma must be positive and finite, got {sigma}"));
        }
        if !(-1.0..=1.0).contains(&beta) {
            return Err(invalid!("beta must lie in [-1, 1], got {beta}"));
        }
        if !mu.is_finite() {
            return Err(invalid!("mu must be finite, got {mu}"));
        }
        let beta = if alpha == 2.0 { 0.0 } else { beta };
        Ok(Self { alpha, sigma, beta, mu })
    }

    /// S_α(σ, 0, 0).
    pub fn symmetric(alpha: f64, sigma: f64) -> Result<Self> {
        Self::new(alpha, sigma, 0.0, 0.0)
    }

    /// σ^α, the quantity that adds under independent summation.
    pub fn dispersion(&self) -> f64 {
        libm::pow(self.sigma, self.alpha)
    }

    /// Location of the standardized variable: X = σ Z + shift with Z ~ S_α(1, β, 0).
    pub(crate) fn shift(&self) -> f64 {
        if self.alpha == 1.0 {
            self.mu + FRAC_2_PI * self.beta * self.sigma * libm::log(self.sigma)
        } else {
            self.mu
        }
    }

    pub(crate) fn standardize(&self, x: f64) -> f64 {
        (x - self.shift()) / self.sigma
    }

    pub(crate) fn destandardize(&self, z: f64) -> f64 {
        self.sigma * z + self.shift()
    }

    /// The law of −Y.
    pub fn negated(&self) -> Self {
        Self { beta: -self.beta, mu: -self.mu, ..*self }
    }
}

/// Bounds of a truncation window `[lower, upper]`. Either side may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationWindow {
    pub lower: f64,
    pub upper: f64,
}

impl TruncationWindow {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if lower.is_nan() || upper.is_nan() || !(lower < upper) || lower == f64::INFINITY || upper == f64::NEG_INFINITY
        {
            return Err(invalid!("truncation window needs lower < upper, got [{lower}, {upper}]"));
        }
        Ok(Self { lower, upper })
    }

    /// `[K, +∞)`.
    pub fn above(k: f64) -> Result<Self> {
        Self::new(k, f64::INFINITY)
    }

    /// `(−∞, K]`.
    pub fn below(k: f64) -> Result<Self> {
        Self::new(f64::NEG_INFINITY, k)
    }

    pub fn contains(&self, y: f64) -> bool {
        y >= self.lower && y <= self.upper
    }
}

/// E[exp(iθY)] for Y ~ S_α(σ, β, μ).
pub fn cf(params: &StableParams, theta: f64) -> Complex64 {
    if theta == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let StableParams { alpha, sigma, beta, mu } = *params;
    let t = theta.abs();
    let sign = theta.signum();
    let (re, im) = if alpha == 1.0 {
        let s = sigma * t;
        (-s, -s * beta * FRAC_2_PI * sign * libm::log(t))
    } else {
        let s = libm::pow(sigma * t, alpha);
        (-s, s * beta * sign * libm::tan(FRAC_PI_2 * alpha))
    };
    Complex64::new(re, im + mu * theta).exp()
}

/// Parameters of aY + b.
pub fn scale_shift(params: &StableParams, a: f64, b: f64) -> Result<StableParams> {
    if !(a.is_finite() && a != 0.0) || !b.is_finite() {
        return Err(invalid!("scale must be finite and nonzero and shift finite, got a={a}, b={b}"));
    }
    let p = params;
    let beta = if a < 0.0 { -p.beta } else { p.beta };
    let mu = if p.alpha == 1.0 {
        if a < 0.0 && p.mu != 0.0 {
            return Err(Error::Unsupported(alloc::format!(
                "negative scaling of an alpha = 1 law with nonzero shift (mu = {})",
                p.mu
            )));
        }
        a * p.mu - FRAC_2_PI * a * libm::log(a.abs()) * p.sigma * p.beta + b
    } else {
        a * p.mu + b
    };
    StableParams::new(p.alpha, a.abs() * p.sigma, beta, mu)
}

/// Parameters of Y₁ + Y₂ for independent Y₁, Y₂ with the same α.
pub fn sum_independent(p1: &StableParams, p2: &StableParams) -> Result<StableParams> {
    if p1.alpha != p2.alpha {
        return Err(invalid!("cannot add stable laws with different alpha ({} and {})", p1.alpha, p2.alpha));
    }
    let (d1, d2) = (p1.dispersion(), p2.dispersion());
    let d = d1 + d2;
    let beta = (p1.beta * d1 + p2.beta * d2) / d;
    StableParams::new(p1.alpha, libm::pow(d, 1.0 / p1.alpha), beta.clamp(-1.0, 1.0), p1.mu + p2.mu)
}

#[cfg(test)]
mod tests;

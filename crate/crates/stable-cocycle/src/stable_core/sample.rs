//! Chambers–Mallows–Stuck sampler.

use core::f64::consts::{FRAC_2_PI, FRAC_PI_2, PI};

use rand::distr::Open01;
use rand::Rng;
use rand_distr::Exp1;

use super::StableParams;

/// The CMS map from an angle `v` ∈ (−π/2, π/2) and an exponential `w` to a
/// standard S_α(1, β, 0) variate.
#[inline]
pub(crate) fn cms(alpha: f64, beta: f64, v: f64, w: f64) -> f64 {
    if alpha == 1.0 {
        let t = FRAC_PI_2 + beta * v;
        return FRAC_2_PI * (t * libm::tan(v) - beta * libm::log(FRAC_PI_2 * w * libm::cos(v) / t));
    }
    let tan_pa = libm::tan(FRAC_PI_2 * alpha);
    let b = libm::atan(beta * tan_pa) / alpha;
    let s = libm::pow(1.0 + beta * beta * tan_pa * tan_pa, 1.0 / (2.0 * alpha));
    let avb = alpha * (v + b);
    s * libm::sin(avb) / libm::pow(libm::cos(v), 1.0 / alpha) * libm::pow(libm::cos(v - avb) / w, (1.0 - alpha) / alpha)
}

/// One draw of S_α(1, β, 0).
pub fn sample_standard<R: Rng + ?Sized>(alpha: f64, beta: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.sample(Open01);
    let w: f64 = rng.sample(Exp1);
    cms(alpha, beta, PI * (u - 0.5), w)
}

/// One draw of S_α(σ, β, μ); a deterministic function of the generator state.
pub fn sample<R: Rng + ?Sized>(params: &StableParams, rng: &mut R) -> f64 {
    params.destandardize(sample_standard(params.alpha, params.beta, rng))
}

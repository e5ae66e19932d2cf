//! CDF, survival function, density and quantile.
//!
//! The inversion integral of the characteristic function is evaluated after
//! rotating the contour onto the real segment (Zolotarev/Nolan form), which
//! leaves a bounded, monotone kernel on a finite interval. Far tails use the
//! convergent (α < 1) or asymptotic (α > 1) power series in z^{−α}.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use super::StableParams;
use crate::error::{invalid, Error, Result};
use crate::quad::{integrate, QuadConfig};

/// Tolerances of the numerical distribution functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumericConfig {
    /// Target absolute error of CDF values.
    pub abs_tol: f64,
    /// Relative accuracy of each inversion integral, so that far-tail
    /// probabilities keep their significant digits.
    pub rel_tol: f64,
    /// Standardized |z| beyond which the tail series replaces quadrature.
    pub tail_threshold: f64,
    /// Subdivision budget of one quadrature.
    pub max_intervals: usize,
}

impl Default for NumericConfig {
    fn default() -> Self {
        Self { abs_tol: 1e-9, rel_tol: 1e-11, tail_threshold: 1e4, max_intervals: 4000 }
    }
}

impl NumericConfig {
    fn quad(&self) -> QuadConfig {
        QuadConfig { rel_tol: self.rel_tol, abs_tol: self.abs_tol * 1e-6, max_intervals: self.max_intervals }
    }
}

/// CDF, survival function and density at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistEval {
    pub cdf: f64,
    pub sf: f64,
    pub pdf: f64,
}

impl DistEval {
    fn reflect(self) -> Self {
        Self { cdf: self.sf, sf: self.cdf, pdf: self.pdf }
    }
}

fn gaussian(z: f64) -> DistEval {
    // S_2(1, 0, 0) is N(0, 2).
    DistEval {
        cdf: 0.5 * libm::erfc(-z / 2.0),
        sf: 0.5 * libm::erfc(z / 2.0),
        pdf: libm::exp(-z * z / 4.0) / (2.0 * libm::sqrt(PI)),
    }
}

fn cauchy(z: f64) -> DistEval {
    let tail = libm::atan(1.0 / z.abs()) / PI;
    let (cdf, sf) = if z >= 0.0 { (1.0 - tail, tail) } else { (tail, 1.0 - tail) };
    DistEval { cdf, sf, pdf: 1.0 / (PI * (1.0 + z * z)) }
}

/// Kernel components at ln g: [e^{−g}, 1 − e^{−g}, g e^{−g}].
#[inline]
fn components(ln_g: f64) -> [f64; 3] {
    if ln_g.is_nan() {
        return [0.0, 0.0, 0.0];
    }
    if ln_g > 700.0 {
        return [0.0, 1.0, 0.0];
    }
    let g = libm::exp(ln_g);
    let e = libm::exp(-g);
    [e, -libm::expm1(-g), g * e]
}

/// Finds where a monotone `ln_g` on (0, upper) crosses zero, searching on a
/// log scale so crossings at 1e-200 are located as easily as ones near 1.
fn crossing<F: Fn(f64) -> f64>(ln_g: &F, upper: f64) -> Option<f64> {
    let lo_u = 1e-300_f64;
    let near_top = upper * (1.0 - 1e-15);
    let s_lo = ln_g(lo_u);
    let s_hi = ln_g(near_top);
    if s_lo.is_nan() || s_hi.is_nan() || (s_lo > 0.0) == (s_hi > 0.0) {
        return None;
    }
    let (mut a, mut b) = (libm::log(lo_u), libm::log(near_top));
    let rising = s_hi > 0.0;
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let v = ln_g(libm::exp(m));
        if (v > 0.0) == rising {
            b = m;
        } else {
            a = m;
        }
        if b - a < 1e-15 {
            break;
        }
    }
    Some(libm::exp(0.5 * (a + b)))
}

/// Breakpoints on [0, upper] clustered geometrically around `center`.
fn breakpoints(center: Option<f64>, upper: f64) -> Vec<f64> {
    let mut pts = Vec::with_capacity(48);
    pts.push(0.0);
    if let Some(c) = center {
        let mut below = Vec::new();
        let mut u = c / 64.0;
        while u < c {
            below.push(u);
            u *= 4.0;
        }
        pts.extend(below);
        pts.push(c);
        let mut u = c * 2.0;
        while u < upper {
            pts.push(u);
            u *= 4.0;
        }
        // Resolve the feature mirrored at the far end too.
        let gap = upper - c;
        if gap > 0.0 {
            let mut w = gap / 64.0;
            while w < gap / 2.0 {
                let p = upper - w;
                if p > c {
                    pts.push(p);
                }
                w *= 4.0;
            }
        }
    } else {
        pts.push(0.5 * upper);
    }
    pts.push(upper);
    pts.retain(|p| p.is_finite() && *p >= 0.0 && *p <= upper);
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    pts.dedup();
    pts
}

fn kernel_integrals<F: Fn(f64) -> f64>(ln_g: F, upper: f64, cfg: &NumericConfig) -> Result<[f64; 3]> {
    let c = crossing(&ln_g, upper);
    let pts = breakpoints(c, upper);
    integrate(|u| components(ln_g(u)), &pts, &cfg.quad())
}

/// Standard law, α ≠ 1, z > 0.
fn nolan(alpha: f64, beta: f64, z: f64, cfg: &NumericConfig) -> Result<DistEval> {
    let a0 = libm::atan(beta * libm::tan(FRAC_PI_2 * alpha));
    let theta0 = a0 / alpha;
    let upper = FRAC_PI_2 + theta0;
    if upper <= 1e-15 {
        // α < 1, β = −1: the law lives on (−∞, 0].
        return Ok(DistEval { cdf: 1.0, sf: 0.0, pdf: 0.0 });
    }
    let am1 = alpha - 1.0;
    let p = alpha / am1;
    let base = libm::log(libm::cos(a0)) / am1 + p * libm::log(z);
    let ln_g = |u: f64| {
        let s = libm::sin(u);
        let s1 = libm::sin(alpha * (upper - u));
        let c2 = libm::cos(alpha * (upper - u) - (FRAC_PI_2 - u));
        if s <= 0.0 || s1 <= 0.0 || c2 <= 0.0 {
            return f64::NAN;
        }
        let ls = libm::log(s);
        base + p * (ls - libm::log(s1)) + libm::log(c2) - ls
    };
    let [i0, i1, i2] = kernel_integrals(ln_g, upper, cfg)?;
    let lower_mass = (FRAC_PI_2 - theta0) / PI;
    let pdf = alpha / (PI * am1.abs() * z) * i2;
    Ok(if alpha < 1.0 {
        DistEval { cdf: lower_mass + i0 / PI, sf: i1 / PI, pdf }
    } else {
        DistEval { cdf: lower_mass + i1 / PI, sf: i0 / PI, pdf }
    })
}

/// Standard law, α = 1, β > 0, any z.
fn nolan_one(beta: f64, z: f64, cfg: &NumericConfig) -> Result<DistEval> {
    let shift = -PI * z / (2.0 * beta);
    let c0 = libm::log(2.0 / PI);
    let ln_g = |u: f64| {
        let s = libm::sin(u);
        let w = FRAC_PI_2 * (1.0 + beta) - beta * u;
        if s <= 0.0 || w <= 0.0 {
            return f64::NAN;
        }
        shift + c0 + libm::log(w) - libm::log(s) + w * (libm::cos(u) / s) / beta
    };
    let [i0, i1, i2] = kernel_integrals(ln_g, PI, cfg)?;
    Ok(DistEval { cdf: i0 / PI, sf: i1 / PI, pdf: i2 / (2.0 * beta) })
}

/// Survival function and density from the tail series, α ∉ {1, 2}, z > 0.
fn tail_series(alpha: f64, beta: f64, z: f64) -> (f64, f64) {
    let a = libm::atan(beta * libm::tan(FRAC_PI_2 * alpha));
    let ln_lambda = -libm::log(libm::cos(a));
    let psi = FRAC_PI_2 * alpha + a;
    let lz = libm::log(z);
    let (mut sf, mut pdf) = (0.0, 0.0);
    let mut prev = f64::INFINITY;
    for k in 1..=80 {
        let kf = k as f64;
        let lmag = kf * ln_lambda + libm::lgamma(kf * alpha) - libm::lgamma(kf + 1.0) - kf * alpha * lz;
        let mag = libm::exp(lmag);
        if alpha > 1.0 && mag > prev {
            break; // asymptotic series: stop at the smallest term
        }
        prev = mag;
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        let s = libm::sin(kf * psi);
        sf += sign * mag * s;
        // Γ(kα + 1) = kα Γ(kα); the density term carries one more 1/z.
        pdf += sign * mag * kf * alpha * s / z;
        if k > 2 && mag < 1e-18 * sf.abs().max(1e-300) {
            break;
        }
    }
    ((sf / PI).max(0.0), (pdf / PI).max(0.0))
}

/// CDF, survival function and density of S_α(1, β, 0) at z.
pub(crate) fn standard_eval(alpha: f64, beta: f64, z: f64, cfg: &NumericConfig) -> Result<DistEval> {
    if z.is_nan() {
        return Err(invalid!("cannot evaluate the distribution at NaN"));
    }
    if z.is_infinite() {
        let (cdf, sf) = if z > 0.0 { (1.0, 0.0) } else { (0.0, 1.0) };
        return Ok(DistEval { cdf, sf, pdf: 0.0 });
    }
    if alpha == 2.0 {
        return Ok(gaussian(z));
    }
    if alpha == 1.0 {
        if beta == 0.0 {
            return Ok(cauchy(z));
        }
        if beta < 0.0 {
            return standard_eval(alpha, -beta, -z, cfg).map(DistEval::reflect);
        }
        return nolan_one(beta, z, cfg);
    }
    if z < 0.0 {
        return standard_eval(alpha, -beta, -z, cfg).map(DistEval::reflect);
    }
    if z == 0.0 {
        let a0 = libm::atan(beta * libm::tan(FRAC_PI_2 * alpha));
        let theta0 = a0 / alpha;
        let zeta = -beta * libm::tan(FRAC_PI_2 * alpha);
        let cdf = (FRAC_PI_2 - theta0) / PI;
        let pdf = libm::tgamma(1.0 + 1.0 / alpha) * libm::cos(theta0)
            / (PI * libm::pow(1.0 + zeta * zeta, 1.0 / (2.0 * alpha)));
        return Ok(DistEval { cdf, sf: 1.0 - cdf, pdf: pdf.max(0.0) });
    }
    if z > cfg.tail_threshold {
        let (sf, pdf) = tail_series(alpha, beta, z);
        return Ok(DistEval { cdf: 1.0 - sf, sf, pdf });
    }
    let e = nolan(alpha, beta, z, cfg)?;
    Ok(DistEval { cdf: e.cdf.clamp(0.0, 1.0), sf: e.sf.clamp(0.0, 1.0), pdf: e.pdf.max(0.0) })
}

impl StableParams {
    /// CDF, survival function and density at x.
    pub fn eval(&self, x: f64, cfg: &NumericConfig) -> Result<DistEval> {
        let e = standard_eval(self.alpha, self.beta, self.standardize(x), cfg)?;
        Ok(DistEval { pdf: e.pdf / self.sigma, ..e })
    }

    pub fn cdf(&self, x: f64, cfg: &NumericConfig) -> Result<f64> {
        self.eval(x, cfg).map(|e| e.cdf)
    }

    /// P(Y > x), accurate in relative terms far into the right tail.
    pub fn sf(&self, x: f64, cfg: &NumericConfig) -> Result<f64> {
        self.eval(x, cfg).map(|e| e.sf)
    }

    pub fn pdf(&self, x: f64, cfg: &NumericConfig) -> Result<f64> {
        self.eval(x, cfg).map(|e| e.pdf)
    }

    /// Generalized inverse of the CDF.
    pub fn quantile(&self, p: f64, cfg: &NumericConfig) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(invalid!("quantile needs p in (0, 1), got {p}"));
        }
        let (alpha, beta) = (self.alpha, self.beta);
        // Work on the side with more significant digits.
        let lower_side = p <= 0.5;
        let target = if lower_side { p } else { 1.0 - p };
        let h = |z: f64| -> Result<f64> {
            let e = standard_eval(alpha, beta, z, cfg)?;
            Ok(if lower_side { e.cdf - target } else { target - e.sf })
        };
        let (mut lo, mut hi) = (-1.0_f64, 1.0_f64);
        let mut hlo = h(lo)?;
        let mut hhi = h(hi)?;
        let mut steps = 0;
        while hlo > 0.0 {
            hi = lo;
            hhi = hlo;
            lo *= 4.0;
            hlo = h(lo)?;
            steps += 1;
            if steps > 200 {
                return Err(Error::NonConvergence(alloc::format!("could not bracket the {p} quantile from below")));
            }
        }
        while hhi < 0.0 {
            lo = hi;
            hlo = hhi;
            hi *= 4.0;
            hhi = h(hi)?;
            steps += 1;
            if steps > 400 {
                return Err(Error::NonConvergence(alloc::format!("could not bracket the {p} quantile from above")));
            }
        }
        let z = crate::quad::brent(h, lo, hi, hlo, hhi, 1e-14, 200)?;
        Ok(self.destandardize(z))
    }
}

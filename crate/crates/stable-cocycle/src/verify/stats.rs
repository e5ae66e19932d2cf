//! Sample statistics: empirical CFs, KS, rank correlation, regression.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::quad::brent;
use crate::stable_core::{cf, StableParams};

/// `points` equally spaced values on [−half_width, half_width].
pub fn theta_grid(points: usize, half_width: f64) -> Vec<f64> {
    if points < 2 {
        return alloc::vec![0.0; points];
    }
    let h = 2.0 * half_width / (points - 1) as f64;
    (0..points).map(|i| -half_width + h * i as f64).collect()
}

/// The default grid: 41 points on [−2, 2].
pub fn default_grid() -> Vec<f64> {
    theta_grid(41, 2.0)
}

/// M^{−1} Σ exp(iθx).
pub fn ecf(samples: &[f64], theta: f64) -> Complex64 {
    let (mut re, mut im) = (0.0, 0.0);
    for x in samples {
        let (s, c) = libm::sincos(theta * x);
        re += c;
        im += s;
    }
    let m = samples.len() as f64;
    Complex64::new(re / m, im / m)
}

fn check(samples: &[f64], grid: &[f64]) -> Result<()> {
    if samples.is_empty() {
        return Err(invalid!("no samples"));
    }
    if grid.is_empty() {
        return Err(invalid!("empty theta grid"));
    }
    Ok(())
}

/// max_θ |ecf(θ) − cf(target, θ)|.
pub fn ecf_distance(samples: &[f64], target: &StableParams, grid: &[f64]) -> Result<f64> {
    check(samples, grid)?;
    Ok(grid.iter().map(|t| (ecf(samples, *t) - cf(target, *t)).norm()).fold(0.0, f64::max))
}

/// max_θ |ecf_a(θ) − ecf_b(θ)|.
pub fn ecf_distance_two_sample(a: &[f64], b: &[f64], grid: &[f64]) -> Result<f64> {
    check(a, grid)?;
    check(b, grid)?;
    Ok(grid.iter().map(|t| (ecf(a, *t) - ecf(b, *t)).norm()).fold(0.0, f64::max))
}

/// max_θ |Im ecf(θ)|.
pub fn ecf_imag_max(samples: &[f64], grid: &[f64]) -> Result<f64> {
    check(samples, grid)?;
    Ok(grid.iter().map(|t| ecf(samples, *t).im.abs()).fold(0.0, f64::max))
}

/// sup_x |F_M(x) − F(x)|. NaN samples are rejected.
pub fn ks_statistic<F>(samples: &[f64], mut cdf: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if samples.is_empty() {
        return Err(invalid!("no samples"));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(invalid!("NaN sample"));
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let m = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, x) in xs.iter().enumerate() {
        let f = cdf(*x)?;
        d = d.max(f - i as f64 / m).max((i + 1) as f64 / m - f);
    }
    Ok(d)
}

/// P(K > λ) for the Kolmogorov limit law.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    // Below 0.2 the series converges slowly and the value is 1 to 1e-10.
    if lambda < 0.2 {
        return 1.0;
    }
    let mut s = 0.0;
    for j in 1..=100 {
        let jf = j as f64;
        let t = libm::exp(-2.0 * jf * jf * lambda * lambda);
        s += if j % 2 == 1 { t } else { -t };
        if t < 1e-17 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// Critical value of the one-sample KS statistic at `level` (e.g. 0.99) for
/// m samples, with Stephens' finite-m correction.
pub fn ks_critical(m: usize, level: f64) -> Result<f64> {
    if m == 0 || !(level > 0.0 && level < 1.0) {
        return Err(invalid!("KS critical value needs m >= 1 and level in (0, 1)"));
    }
    let g = |l: f64| Ok(kolmogorov_sf(l) - (1.0 - level));
    let (a, b) = (0.3, 4.0);
    let lambda = brent(g, a, b, g(a)?, g(b)?, 1e-12, 200)?;
    let rm = libm::sqrt(m as f64);
    Ok(lambda / (rm + 0.12 + 0.11 / rm))
}

/// Average ranks (1-based), ties sharing their mean rank.
pub fn ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|a, b| x[*a].total_cmp(&x[*b]));
    let mut r = alloc::vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for t in &idx[i..=j] {
            r[*t] = avg;
        }
        i = j + 1;
    }
    r
}

/// Pearson correlation; 0 when either side is constant.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(invalid!("correlation needs two equal-length samples of size >= 2"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Ok(0.0);
    }
    Ok(sxy / libm::sqrt(sxx * syy))
}

/// Spearman's ρ.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(invalid!("samples differ in length"));
    }
    pearson(&ranks(x), &ranks(y))
}

/// Least-squares slope and intercept of y on x.
pub fn ols(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(invalid!("regression needs at least two points"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return Err(invalid!("regression on a single abscissa"));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Sample median and a distribution-free standard error taken from the
/// order statistics bracketing a 95% binomial interval.
pub fn median_with_se(x: &[f64]) -> Result<(f64, f64)> {
    if x.is_empty() {
        return Err(invalid!("no samples"));
    }
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len();
    let med = if m % 2 == 1 { v[m / 2] } else { 0.5 * (v[m / 2 - 1] + v[m / 2]) };
    let half = 1.96 * libm::sqrt(m as f64) / 2.0;
    let lo = libm::floor(m as f64 / 2.0 - half).max(0.0) as usize;
    let hi = (libm::ceil(m as f64 / 2.0 + half) as usize).min(m - 1);
    Ok((med, (v[hi] - v[lo]) / (2.0 * 1.96)))
}

/// Mean and standard error of the mean.
pub fn mean_with_se(x: &[f64]) -> Result<(f64, f64)> {
    if x.len() < 2 {
        return Err(invalid!("need at least two samples"));
    }
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let v = x.iter().map(|a| (a - m) * (a - m)).sum::<f64>() / (n - 1.0);
    Ok((m, libm::sqrt(v / n)))
}

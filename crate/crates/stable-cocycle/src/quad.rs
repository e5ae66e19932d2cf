//! Adaptive Gauss–Kronrod (7/15) quadrature for vector-valued integrands.
//!
//! The CDF, survival function and density of a stable law are three integrals
//! of the same kernel, so the integrator carries `N` components through one
//! subdivision and refines wherever any component is least accurate.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self { rel_tol: 1e-11, abs_tol: 1e-300, max_intervals: 4000 }
    }
}

#[derive(Clone, Copy)]
struct Piece<const N: usize> {
    a: f64,
    b: f64,
    val: [f64; N],
    err: [f64; N],
    frozen: bool,
}

fn gk15<const N: usize, F: FnMut(f64) -> [f64; N]>(f: &mut F, a: f64, b: f64) -> Piece<N> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut k = [0.0; N];
    let mut g = [0.0; N];
    let fc = f(c);
    for i in 0..N {
        k[i] = WGK[7] * fc[i];
        g[i] = WG[3] * fc[i];
    }
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        for i in 0..N {
            let s = f1[i] + f2[i];
            k[i] += WGK[j] * s;
            if j % 2 == 1 {
                g[i] += WG[j / 2] * s;
            }
        }
    }
    let mut val = [0.0; N];
    let mut err = [0.0; N];
    for i in 0..N {
        val[i] = k[i] * h;
        err[i] = ((k[i] - g[i]) * h).abs();
    }
    Piece { a, b, val, err, frozen: false }
}

/// Integrates `f` over the union of consecutive intervals given by sorted
/// `points` (at least two). Returns the integral of every component.
pub fn integrate<const N: usize, F>(mut f: F, points: &[f64], cfg: &QuadConfig) -> Result<[f64; N]>
where
    F: FnMut(f64) -> [f64; N],
{
    if points.len() < 2 {
        return Err(Error::InvalidParameter(format!("quadrature needs two points, got {}", points.len())));
    }
    let mut pieces: Vec<Piece<N>> = Vec::with_capacity(64);
    for w in points.windows(2) {
        if !(w[1] >= w[0]) || !w[0].is_finite() || !w[1].is_finite() {
            return Err(Error::InvalidParameter(format!(
                "quadrature breakpoints not sorted/finite: {} {}",
                w[0], w[1]
            )));
        }
        if w[1] > w[0] {
            pieces.push(gk15(&mut f, w[0], w[1]));
        }
    }
    if pieces.is_empty() {
        return Ok([0.0; N]);
    }
    loop {
        let mut total = [0.0; N];
        let mut errs = [0.0; N];
        for p in &pieces {
            for i in 0..N {
                total[i] += p.val[i];
                errs[i] += p.err[i];
            }
        }
        let tol: [f64; N] = core::array::from_fn(|i| (cfg.rel_tol * total[i].abs()).max(cfg.abs_tol));
        if (0..N).all(|i| errs[i] <= tol[i]) {
            return Ok(total);
        }
        // Refine the piece contributing the largest share of the worst component.
        let mut best: Option<(usize, f64)> = None;
        for (idx, p) in pieces.iter().enumerate() {
            if p.frozen {
                continue;
            }
            let score = (0..N).map(|i| p.err[i] / tol[i]).fold(0.0, f64::max);
            if best.map_or(true, |(_, s)| score > s) {
                best = Some((idx, score));
            }
        }
        let Some((idx, _)) = best else {
            // Every remaining piece is at floating-point resolution.
            let worst = (0..N).map(|i| errs[i] / tol[i]).fold(0.0, f64::max);
            if worst <= 1e3 {
                return Ok(total);
            }
            return Err(Error::NonConvergence(format!("intervals exhausted at resolution, error ratio {worst:e}")));
        };
        if pieces.len() >= cfg.max_intervals {
            return Err(Error::NonConvergence(format!(
                "{} intervals without meeting tolerance (errors {:?}, tolerances {:?})",
                pieces.len(),
                errs,
                tol
            )));
        }
        let p = pieces[idx];
        let m = 0.5 * (p.a + p.b);
        if !(m > p.a && m < p.b) || (p.b - p.a) <= 1e-14 * p.a.abs().max(p.b.abs()) {
            pieces[idx].frozen = true;
            continue;
        }
        pieces[idx] = gk15(&mut f, p.a, m);
        pieces.push(gk15(&mut f, m, p.b));
    }
}

/// Scalar convenience wrapper over `[a, b]`.
pub fn integrate1<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, cfg: &QuadConfig) -> Result<f64> {
    integrate(|x| [f(x)], &[a, b], cfg).map(|v| v[0])
}


/// Brent's root finder on a bracket `[a, b]` with `f(a)` and `f(b)` of
/// opposite sign. `rel_tol` is relative to max(1, |x|).
pub fn brent<F>(mut f: F, a: f64, b: f64, fa: f64, fb: f64, rel_tol: f64, max_iter: usize) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut b, mut fa, mut fb) = (a, b, fa, fb);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if (fa > 0.0) == (fb > 0.0) {
        return Err(Error::InvalidParameter(format!("root not bracketed: f({a}) = {fa}, f({b}) = {fb}")));
    }
    let (mut c, mut fc) = (b, fb);
    let (mut d, mut e) = (b - a, b - a);
    for _ in 0..max_iter {
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * rel_tol * b.abs().max(1.0);
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = d;
            }
        } else {
            d = m;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b)?;
    }
    Err(Error::NonConvergence(format!("root finder exceeded {max_iter} iterations near {b}")))
}

#[cfg(test)]
mod brent_tests {
    use super::*;

    #[test]
    fn finds_cube_root() {
        let f = |x: f64| Ok(x * x * x - 2.0);
        let r = brent(f, 0.0, 2.0, -2.0, 6.0, 1e-15, 100).unwrap();
        assert!((r - libm::cbrt(2.0)).abs() < 1e-14);
    }
}

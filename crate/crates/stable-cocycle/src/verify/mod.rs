//! Statistical checks of simulated paths against their stable limits.
//!
//! Every check returns [`TestResult`]s with `pass = statistic <= threshold`
//! and the threshold stored alongside. Randomness comes from substreams of
//! the seed passed in, so a result is a pure function of its inputs.

pub mod stats;
pub mod suite;

#[cfg(test)]
mod tests;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cocycle::{
    band_edges, birkhoff_block_sum_dense, birkhoff_brute_force, centering_bn, coboundary_brute_force,
    coboundary_sum_dense, phi_weights, Band, CocycleModel, Regime,
};
use crate::error::{invalid, Result};
use crate::process::{check_breakpoints, Ensemble, Executor};
use crate::rng::{stream_id, substream, tag};
use crate::stable_core::{
    sample, sample_standard, scale_shift, MomentMethod, NumericConfig, StableParams, TruncationWindow,
};
use crate::triangular_array::{dense_value, discretize, truncate, RowIndex};

pub use stats::{
    default_grid, ecf, ecf_distance, ecf_distance_two_sample, ecf_imag_max, kolmogorov_sf, ks_critical, ks_statistic,
    mean_with_se, median_with_se, ols, spearman, theta_grid,
};

/// Tags for the checks' own randomness.
mod vtag {
    pub const KS: u64 = 101;
    pub const EQUAL_DIST: u64 = 102;
    pub const APPENDIX: u64 = 103;
    pub const CALIBRATE: u64 = 104;
}

/// Conditions a result was computed under.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replicas: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    /// Reported quantities that do not enter the decision.
    #[serde(default)]
    pub values: BTreeMap<String, f64>,
}

impl Metadata {
    pub fn with_n(mut self, n: u64) -> Self {
        self.n = Some(n);
        self
    }
    pub fn with_replicas(mut self, m: usize) -> Self {
        self.replicas = Some(m as u64);
        self
    }
    pub fn with_alpha(mut self, a: f64) -> Self {
        self.alpha = Some(a);
        self
    }
    pub fn with_beta(mut self, b: f64) -> Self {
        self.beta = Some(b);
        self
    }
    pub fn with_seed(mut self, s: u64) -> Self {
        self.seed = Some(s);
        self
    }
    pub fn with_epsilon(mut self, e: f64) -> Self {
        self.epsilon = Some(e);
        self
    }
    pub fn tol(mut self, key: &str, v: f64) -> Self {
        self.tolerances.insert(key.to_string(), v);
        self
    }
    pub fn val(mut self, key: &str, v: f64) -> Self {
        self.values.insert(key.to_string(), v);
        self
    }
}

/// One point of a ladder statistic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendPoint {
    pub n: u64,
    pub value: f64,
    pub std_error: f64,
}

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub name: String,
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
    /// Reported only; never part of an overall verdict.
    pub diagnostic: bool,
    /// False when the check does not apply (it then passes vacuously).
    pub applicable: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub metadata: Metadata,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trend: Vec<TrendPoint>,
}

/// Stand-in for "no threshold" in diagnostics (JSON has no infinity).
pub const NO_THRESHOLD: f64 = f64::MAX;

impl TestResult {
    pub fn new(name: impl Into<String>, statistic: f64, threshold: f64, metadata: Metadata) -> Self {
        // Non-finite statistics fail and are stored as the largest float.
        let statistic = if statistic.is_nan() { f64::MAX } else { statistic.clamp(-f64::MAX, f64::MAX) };
        Self {
            name: name.into(),
            statistic,
            threshold,
            pass: statistic <= threshold,
            diagnostic: false,
            applicable: true,
            note: None,
            metadata,
            trend: Vec::new(),
        }
    }

    pub fn diagnostic(name: impl Into<String>, value: f64, metadata: Metadata) -> Self {
        let mut r = Self::new(name, value, NO_THRESHOLD, metadata);
        r.diagnostic = true;
        r.pass = true;
        r
    }

    pub fn not_applicable(name: impl Into<String>, note: &str, metadata: Metadata) -> Self {
        let mut r = Self::new(name, 0.0, 0.0, metadata);
        r.applicable = false;
        r.note = Some(note.to_string());
        r
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn with_trend(mut self, trend: Vec<TrendPoint>) -> Self {
        self.trend = trend;
        self
    }

    /// Whether this result counts toward an overall verdict and failed.
    pub fn gating_failure(&self) -> bool {
        !self.diagnostic && !self.pass
    }
}

/// Decision thresholds. Null thresholds scale as c/√M.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// One-sample empirical-CF distance: `ecf_coef / √M`.
    pub ecf_coef: f64,
    /// Two-sample empirical-CF distance: `two_sample_coef / √M`.
    pub two_sample_coef: f64,
    /// Allowed increase of a ladder CF distance per step: `trend_slack_coef / √M`.
    pub trend_slack_coef: f64,
    /// Absolute cap on the CF distance at the largest n.
    pub fclt_cap: f64,
    /// |Spearman ρ| bound: `spearman_coef / √M`.
    pub spearman_coef: f64,
    /// Allowed increase per ladder step, in standard errors.
    pub trend_se: f64,
    /// Tolerance on fitted log-log slopes.
    pub slope_tol: f64,
    /// Tolerance, in standard errors, for the σ-doubling ratio.
    pub sigma_se: f64,
    /// Tolerance, in standard errors, for quadrature vs Monte Carlo.
    pub oracle_se: f64,
    /// Confidence level of KS critical values.
    pub ks_level: f64,
    /// |cdf(quantile(q)) − q| bound.
    pub roundtrip_tol: f64,
    /// Relative tolerance of closed forms vs brute force.
    pub closed_form_rel: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            ecf_coef: 4.0,
            two_sample_coef: 8.0,
            trend_slack_coef: 2.0,
            fclt_cap: 0.05,
            spearman_coef: 3.0,
            trend_se: 2.0,
            slope_tol: 0.15,
            sigma_se: 3.0,
            oracle_se: 3.0,
            ks_level: 0.99,
            roundtrip_tol: 1e-6,
            closed_form_rel: 1e-12,
        }
    }
}

fn root(m: usize) -> f64 {
    libm::sqrt(m as f64)
}

/// Predicted law of W(1) for a regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitTarget {
    pub regime: Regime,
    pub alpha: f64,
    pub params: StableParams,
}

impl LimitTarget {
    /// Skewed regimes: S_α((ln 2)^{1/α}, β, 0). Symmetric: S_α((2 ln 2)^{1/α}, 0, 0).
    pub fn new(regime: Regime, alpha: f64) -> Result<Self> {
        regime.validate(alpha)?;
        let ln2 = core::f64::consts::LN_2;
        let params = match regime {
            Regime::Symmetric => StableParams::symmetric(alpha, libm::pow(2.0 * ln2, 1.0 / alpha))?,
            Regime::SkewedSub1 { beta } | Regime::SkewedSuper1 { beta } => {
                StableParams::new(alpha, libm::pow(ln2, 1.0 / alpha), beta, 0.0)?
            }
        };
        Ok(Self { regime, alpha, params })
    }
}

/// Σ_{k∈M} 1/k for the middle band of n, i.e. the exact dispersion of the
/// scaled X-level middle aggregate.
pub fn middle_dispersion(n: u64, alpha: f64) -> f64 {
    let (_, s, m) = band_edges(n, alpha);
    (s + 1..=m).map(|k| 1.0 / k as f64).sum()
}

/// Blocks a segment is split into when drawing X-level sums.
const EXACT_BLOCKS: u64 = 64;

/// Per-replica values of the scaled X-level middle aggregate
/// n^{−1/α} Σ_{k∈M} Σ_{j<⌊nt⌋} X_k(j) at each breakpoint t.
///
/// A sum of c i.i.d. S_α(σ_k, 1, 0) is exactly c^{1/α}σ_k times a standard
/// draw (α ≠ 1), so each segment is drawn as a sum over a few blocks.
pub fn exact_aggregate_marks<E: Executor>(
    n: u64,
    alpha: f64,
    breakpoints: &[f64],
    replicas: usize,
    seed: u64,
    exec: &E,
) -> Result<Vec<Vec<f64>>> {
    if alpha == 1.0 {
        return Err(invalid!("the exact aggregate needs alpha != 1"));
    }
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(invalid!("alpha must lie in (0, 2), got {alpha}"));
    }
    check_breakpoints(breakpoints)?;
    let (_, s, m) = band_edges(n, alpha);
    if m <= s {
        return Err(invalid!("the middle band of n = {n} at alpha = {alpha} is empty"));
    }
    let nf = n as f64;
    let mut idx: Vec<u64> = vec![0];
    idx.extend(breakpoints.iter().map(|t| (libm::floor(nf * t) as u64).min(n)));
    let inv = 1.0 / alpha;
    Ok(exec.map(replicas, |r| {
        let mut rng = substream(seed, &[tag::EXACT, r as u64]);
        let mut marks = Vec::with_capacity(breakpoints.len());
        let mut acc = 0.0;
        for w in idx.windows(2) {
            let c = w[1] - w[0];
            let blocks = c.min(EXACT_BLOCKS);
            for k in s + 1..=m {
                let sigma = libm::pow(k as f64, -inv);
                for b in 0..blocks {
                    let size = c / blocks + u64::from(b < c % blocks);
                    acc += libm::pow(size as f64 / nf, inv) * sigma * sample_standard(alpha, 1.0, &mut rng);
                }
            }
            marks.push(acc);
        }
        marks
    }))
}

/// The X-level middle aggregate against its exact law S_α(Σ_n, 1, 0),
/// Σ_n^α = Σ_{k∈M} 1/k.
pub fn exact_stability_check<E: Executor>(
    n: u64,
    alpha: f64,
    replicas: usize,
    seed: u64,
    th: &Thresholds,
    exec: &E,
) -> Result<TestResult> {
    let marks = exact_aggregate_marks(n, alpha, &[0.0, 1.0], replicas, seed, exec)?;
    let w1: Vec<f64> = marks.iter().map(|m| m[1]).collect();
    let disp = middle_dispersion(n, alpha);
    let target = StableParams::new(alpha, libm::pow(disp, 1.0 / alpha), 1.0, 0.0)?;
    let d = ecf_distance(&w1, &target, &default_grid())?;
    let meta = Metadata::default()
        .with_n(n)
        .with_replicas(replicas)
        .with_alpha(alpha)
        .with_beta(1.0)
        .with_seed(seed)
        .tol("ecf_coef", th.ecf_coef)
        .val("dispersion", disp)
        .val("ln2", core::f64::consts::LN_2);
    Ok(TestResult::new(format!("exact_stability/alpha={alpha}/n={n}"), d, th.ecf_coef / root(replicas), meta))
}

/// One rung of a ladder: n and the W(1) replicas.
#[derive(Debug, Clone, Copy)]
pub struct Rung<'a> {
    pub n: u64,
    pub samples: &'a [f64],
}

/// CF distance of W(1) to the limit along a ladder of n: a trend result
/// (the distance may rise by at most `trend_slack_coef/√M` per step) and a
/// cap result at the largest n.
pub fn fclt_marginal_test(
    label: &str,
    ladder: &[Rung<'_>],
    target: &LimitTarget,
    th: &Thresholds,
) -> Result<[TestResult; 2]> {
    if ladder.len() < 2 {
        return Err(invalid!("a ladder needs at least two rungs"));
    }
    let grid = default_grid();
    let mut trend = Vec::with_capacity(ladder.len());
    for r in ladder {
        let d = ecf_distance(r.samples, &target.params, &grid)?;
        trend.push(TrendPoint { n: r.n, value: d, std_error: 1.0 / root(r.samples.len()) });
    }
    let m = ladder.iter().map(|r| r.samples.len()).min().unwrap_or(0);
    let rise = trend.windows(2).map(|w| w[1].value - w[0].value).fold(f64::MIN, f64::max);
    let last = trend.last().expect("non-empty ladder");
    let base = Metadata::default()
        .with_replicas(m)
        .with_alpha(target.alpha)
        .with_beta(target.params.beta)
        .val("target_sigma", target.params.sigma);
    let t = TestResult::new(
        format!("fclt_trend/{label}"),
        rise,
        th.trend_slack_coef / root(m),
        base.clone().tol("trend_slack_coef", th.trend_slack_coef),
    )
    .with_trend(trend.clone());
    // −ln|ecf(1)| estimates σ^α of the largest rung.
    let top = ladder.last().expect("non-empty ladder").samples;
    let cap_meta = base
        .with_n(last.n)
        .tol("cap", th.fclt_cap)
        .val("dispersion_estimate", -libm::log(ecf(top, 1.0).norm()))
        .val("target_dispersion", target.params.dispersion());
    let c = TestResult::new(format!("fclt_cap/{label}"), last.value, th.fclt_cap, cap_meta).with_trend(trend);
    Ok([t, c])
}

/// Independence and self-similarity of increments.
///
/// `marks[r]` holds W(t_i) of replica r at the breakpoints. The rank
/// correlation of consecutive increments is bounded by `spearman_coef/√M`;
/// each increment over (s, t] is compared with S_α(σ Δ^{1/α}, β, 0),
/// Δ = (⌊nt⌋ − ⌊ns⌋)/n, at `self_similarity_threshold`.
pub fn increment_tests(
    label: &str,
    marks: &[Vec<f64>],
    n: u64,
    breakpoints: &[f64],
    target: &StableParams,
    self_similarity_threshold: f64,
    th: &Thresholds,
) -> Result<Vec<TestResult>> {
    check_breakpoints(breakpoints)?;
    let nf = n as f64;
    let idx: Vec<u64> = breakpoints.iter().map(|t| (libm::floor(nf * t) as u64).min(n)).collect();
    if idx.windows(2).any(|w| w[0] == w[1]) {
        return Err(invalid!("breakpoints collapse to one grid cell at n = {n}"));
    }
    if marks.is_empty() || marks.iter().any(|m| m.len() != breakpoints.len()) {
        return Err(invalid!("each replica needs one value per breakpoint"));
    }
    let m = marks.len();
    let incs: Vec<Vec<f64>> =
        (0..breakpoints.len() - 1).map(|i| marks.iter().map(|mk| mk[i + 1] - mk[i]).collect()).collect();
    let meta = Metadata::default().with_n(n).with_replicas(m).with_alpha(target.alpha).with_beta(target.beta);
    let mut out = Vec::new();
    let name = format!("increments_rank_correlation/{label}");
    if incs.len() < 2 {
        out.push(TestResult::not_applicable(name, "a single increment", meta.clone()));
    } else {
        let mut worst: f64 = 0.0;
        for w in incs.windows(2) {
            worst = worst.max(spearman(&w[0], &w[1])?.abs());
        }
        out.push(TestResult::new(
            name,
            worst,
            th.spearman_coef / root(m),
            meta.clone().tol("spearman_coef", th.spearman_coef),
        ));
    }
    let grid = default_grid();
    for (i, inc) in incs.iter().enumerate() {
        let delta = (idx[i + 1] - idx[i]) as f64 / nf;
        let law = scale_shift(target, libm::pow(delta, 1.0 / target.alpha), 0.0)?;
        let d = ecf_distance(inc, &law, &grid)?;
        out.push(TestResult::new(
            format!("increments_self_similarity/{label}/{i}"),
            d,
            self_similarity_threshold,
            meta.clone().val("delta", delta).val("s", breakpoints[i]).val("t", breakpoints[i + 1]),
        ));
    }
    Ok(out)
}

fn step_z(a: &TrendPoint, b: &TrendPoint) -> f64 {
    let diff = b.value - a.value;
    let se = libm::sqrt(a.std_error * a.std_error + b.std_error * b.std_error);
    if se > 0.0 {
        diff / se
    } else if diff > 0.0 {
        f64::MAX
    } else {
        0.0
    }
}

fn trend_result(name: String, trend: Vec<TrendPoint>, th: &Thresholds, meta: Metadata) -> TestResult {
    let worst = trend.windows(2).map(|w| step_z(&w[0], &w[1])).fold(f64::MIN, f64::max);
    TestResult::new(name, worst, th.trend_se, meta.tol("trend_se", th.trend_se)).with_trend(trend)
}

/// Median of ‖W^S‖_∞ and frequency of ‖W^L‖_∞ ≠ 0 along a ladder; each
/// must not rise by more than `trend_se` standard errors per step. The
/// statistic is the largest standardized rise.
pub fn band_vanishing_test(label: &str, ladder: &[&Ensemble], th: &Thresholds) -> Result<[TestResult; 2]> {
    if ladder.len() < 3 {
        return Err(invalid!("band vanishing needs a ladder of at least three n"));
    }
    let mut small = Vec::new();
    let mut large = Vec::new();
    for e in ladder {
        let sups: Vec<f64> = e.replicas.iter().map(|r| r.sup_small).collect();
        let (med, se) = median_with_se(&sups)?;
        small.push(TrendPoint { n: e.n, value: med, std_error: se });
        let m = e.replicas.len() as f64;
        let p = e.replicas.iter().filter(|r| r.large_nonzero).count() as f64 / m;
        large.push(TrendPoint { n: e.n, value: p, std_error: libm::sqrt(p * (1.0 - p) / m) });
    }
    let m = ladder.iter().map(|e| e.replicas.len()).min().unwrap_or(0);
    let meta = Metadata::default().with_replicas(m).with_alpha(ladder[0].alpha);
    Ok([
        trend_result(format!("band_small_median/{label}"), small, th, meta.clone()),
        trend_result(format!("band_large_frequency/{label}"), large, th, meta),
    ])
}

/// Both routes to the middle-band window sum n^{−1/α} Σ_{k∈M} a Σ_{j<n} Z_k(j):
/// the cocycle realization (table-driven sparse streams) and dense draws
/// of X_k pushed through truncation and discretization. Reports their
/// two-sample CF distance.
pub fn equal_distribution_test<E: Executor>(
    model: &CocycleModel,
    replicas: usize,
    seed: u64,
    th: &Thresholds,
    exec: &E,
) -> Result<TestResult> {
    let c = &model.config;
    let (n, alpha) = (c.n, c.alpha);
    let a = match c.regime {
        Regime::Symmetric => 1.0,
        Regime::SkewedSub1 { beta } | Regime::SkewedSuper1 { beta } => phi_weights(beta, alpha).0,
    };
    let rows = model.bands.rows(Band::Middle);
    let scale = libm::pow(n as f64, -1.0 / alpha);
    let route_seed = stream_id(&[seed, vtag::EQUAL_DIST]);
    let cocycle: Vec<Result<f64>> =
        exec.map(replicas, |r| Ok(model.realize(route_seed, r as u64)?.middle_direct_sum() * scale));
    let route_a = cocycle.into_iter().collect::<Result<Vec<f64>>>()?;
    let dense: Vec<Result<f64>> = exec.map(replicas, |r| {
        let mut rng = substream(route_seed, &[tag::DENSE, r as u64]);
        let mut s = 0.0;
        for k in rows.clone() {
            let row = RowIndex::new(k)?;
            for _ in 0..n {
                s += dense_value(row, alpha, &mut rng)?.value();
            }
        }
        Ok(a * s * scale)
    });
    let route_b = dense.into_iter().collect::<Result<Vec<f64>>>()?;
    let meta = Metadata::default()
        .with_n(n)
        .with_replicas(replicas)
        .with_alpha(alpha)
        .with_beta(c.regime.beta())
        .with_seed(seed)
        .tol("two_sample_coef", th.two_sample_coef)
        .val("middle_rows", rows.clone().count() as f64)
        .val("mean_cocycle", mean_with_se(&route_a).map(|x| x.0).unwrap_or(0.0))
        .val("mean_dense", mean_with_se(&route_b).map(|x| x.0).unwrap_or(0.0));
    let name = format!("equal_distribution/{}/alpha={alpha}/n={n}", c.regime.name());
    if rows.is_empty() {
        return Ok(TestResult::new(name, 0.0, th.two_sample_coef / root(replicas), meta).with_note("empty middle band"));
    }
    let d = ecf_distance_two_sample(&route_a, &route_b, &default_grid())?;
    Ok(TestResult::new(name, d, th.two_sample_coef / root(replicas), meta))
}

/// Each row term of B_n by quadrature against Monte Carlo (statistic: the
/// largest |difference| in standard errors), plus the rate ratio
/// B_n/(n (log₂ n)^{1−1/α}) as a diagnostic.
pub fn bn_oracle_test(
    n: u64,
    alpha: f64,
    samples: usize,
    seed: u64,
    th: &Thresholds,
    num: &NumericConfig,
) -> Result<[TestResult; 2]> {
    let q = centering_bn(n, alpha, MomentMethod::Quadrature, num)?;
    let mc = centering_bn(n, alpha, MomentMethod::MonteCarlo { samples, seed }, num)?;
    let mut meta = Metadata::default()
        .with_n(n)
        .with_alpha(alpha)
        .with_seed(seed)
        .with_replicas(samples)
        .tol("oracle_se", th.oracle_se)
        .val("bn", q.value);
    let mut worst: f64 = 0.0;
    for (a, b) in q.terms.iter().zip(&mc.terms) {
        let se = libm::sqrt(a.std_error * a.std_error + b.std_error * b.std_error);
        let z = if se > 0.0 { (a.expectation - b.expectation).abs() / se } else { f64::MAX };
        worst = worst.max(z);
        meta = meta
            .val(&format!("quadrature_k{}", a.k), a.expectation)
            .val(&format!("monte_carlo_k{}", b.k), b.expectation)
            .val(&format!("monte_carlo_se_k{}", b.k), b.std_error);
    }
    let oracle = TestResult::new(format!("bn_oracle/alpha={alpha}/n={n}"), worst, th.oracle_se, meta);
    let rate = TestResult::diagnostic(
        format!("bn_rate_ratio/alpha={alpha}/n={n}"),
        q.log_rate_ratio,
        Metadata::default().with_n(n).with_alpha(alpha).val("bn", q.value),
    );
    Ok([oracle, rate])
}

/// KS tests of the sampler: S_1(1, 0, 0) against the Cauchy CDF and
/// S_2(1, 0, 0) against N(0, 2).
pub fn sampler_ks_test(samples: usize, seed: u64, th: &Thresholds) -> Result<[TestResult; 2]> {
    let crit = ks_critical(samples, th.ks_level)?;
    let draw = |alpha: f64, t: u64| -> Result<Vec<f64>> {
        let p = StableParams::symmetric(alpha, 1.0)?;
        let mut rng = substream(seed, &[vtag::KS, t]);
        Ok((0..samples).map(|_| sample(&p, &mut rng)).collect())
    };
    let cauchy = draw(1.0, 1)?;
    let dc = ks_statistic(&cauchy, |x| Ok(0.5 + libm::atan(x) / core::f64::consts::PI))?;
    let gauss = draw(2.0, 2)?;
    let dg = ks_statistic(&gauss, |x| Ok(0.5 * (1.0 + libm::erf(x / 2.0))))?;
    let meta =
        |a: f64| Metadata::default().with_alpha(a).with_replicas(samples).with_seed(seed).tol("ks_level", th.ks_level);
    Ok([
        TestResult::new("sampler_ks/cauchy", dc, crit, meta(1.0)),
        TestResult::new("sampler_ks/gaussian", dg, crit, meta(2.0)),
    ])
}

/// max |cdf(quantile(q)) − q| over q ∈ {0.01, …, 0.99} and the given α, β.
pub fn quantile_roundtrip_test(
    alphas: &[f64],
    betas: &[f64],
    th: &Thresholds,
    num: &NumericConfig,
) -> Result<TestResult> {
    let mut worst: f64 = 0.0;
    let mut at = (0.0, 0.0, 0.0);
    for &a in alphas {
        for &b in betas {
            let p = StableParams::new(a, 1.0, b, 0.0)?;
            for i in 1..=99 {
                let q = i as f64 / 100.0;
                let x = p.quantile(q, num)?;
                let e = (p.cdf(x, num)? - q).abs();
                if e > worst {
                    worst = e;
                    at = (a, b, q);
                }
            }
        }
    }
    let meta = Metadata::default()
        .tol("roundtrip_tol", th.roundtrip_tol)
        .val("worst_alpha", at.0)
        .val("worst_beta", at.1)
        .val("worst_q", at.2);
    Ok(TestResult::new("quantile_roundtrip", worst, th.roundtrip_tol, meta))
}

/// Pathwise 0 ≤ Y − Z < 4^{−k} for Y = truncate(X_k), Z = discretize(Y).
/// Each row k = 1..=k_max gets `draws` draws of X_k and, since most of
/// those truncate to 0, `draws / 10` values of Y log-uniform on [2^k, 4^k]
/// plus both endpoints. The statistic counts violations.
pub fn truncation_bound_test<E: Executor>(
    alpha: f64,
    k_max: u32,
    draws: usize,
    seed: u64,
    exec: &E,
) -> Result<TestResult> {
    let per_row: Vec<Result<(u64, u64)>> = exec.map(k_max as usize, |i| {
        let k = RowIndex::new(i as u32 + 1)?;
        let law = k.law(alpha)?;
        let mut rng = substream(seed, &[tag::TRUNCATION, k.get() as u64]);
        let (mut bad, mut nonzero) = (0u64, 0u64);
        let mut check = |y: f64| -> Result<()> {
            let gap = y - discretize(y, k)?.value();
            if !(gap >= 0.0 && gap < k.step()) {
                bad += 1;
            }
            nonzero += u64::from(y != 0.0);
            Ok(())
        };
        for _ in 0..draws {
            check(truncate(sample(&law, &mut rng), k))?;
        }
        let (lo, hi) = (libm::log(k.lower()), libm::log(k.upper()));
        for _ in 0..draws / 10 {
            let y = libm::exp(rng.random_range(lo..hi)).clamp(k.lower(), k.upper());
            check(y)?;
        }
        check(k.lower())?;
        check(k.upper())?;
        Ok((bad, nonzero))
    });
    let mut meta = Metadata::default().with_alpha(alpha).with_replicas(draws).with_seed(seed);
    let mut bad = 0u64;
    for (i, r) in per_row.into_iter().enumerate() {
        let (b, nz) = r?;
        bad += b;
        meta = meta.val(&format!("nonzero_k{}", i + 1), nz as f64);
    }
    Ok(TestResult::new(format!("truncation_bound/alpha={alpha}"), bad as f64, 0.0, meta))
}

/// Closed-form block and coboundary sums against brute force on random
/// instances with n ≤ `max_n` and D ≤ `max_d`; every fourth instance has
/// n = D. The error is relative to the ℓ¹ norm of the values involved.
pub fn closed_form_test(instances: usize, max_n: u64, max_d: u64, seed: u64, th: &Thresholds) -> Result<TestResult> {
    let mut rng = substream(seed, &[tag::CLOSED_FORM]);
    let mut worst: f64 = 0.0;
    let mut boundary = 0u64;
    for i in 0..instances {
        let d = rng.random_range(1..=max_d);
        let n = if i % 4 == 0 && d <= max_n { d } else { rng.random_range(1..=max_n) };
        boundary += u64::from(n == d);
        let len = (n + d) as usize;
        let mut f = vec![0.0; len];
        for x in f.iter_mut() {
            if rng.random_bool(0.5) {
                let k = RowIndex::new(rng.random_range(1..=6))?;
                let y = rng.random_range(k.lower()..=k.upper());
                *x = discretize(y, k)?.value();
            }
        }
        let l1: f64 = f.iter().map(|x| x.abs()).sum::<f64>().max(f64::MIN_POSITIVE);
        let e1 = (birkhoff_block_sum_dense(&f, n, d)? - birkhoff_brute_force(&f, n, d)?).abs() / l1;
        let e2 = (coboundary_sum_dense(&f, n, d)? - coboundary_brute_force(&f, n, d)?).abs() / l1;
        worst = worst.max(e1).max(e2);
    }
    let meta = Metadata::default()
        .with_replicas(instances)
        .with_seed(seed)
        .tol("closed_form_rel", th.closed_form_rel)
        .val("boundary_instances", boundary as f64)
        .val("max_n", max_n as f64)
        .val("max_d", max_d as f64);
    Ok(TestResult::new("closed_form", worst, th.closed_form_rel, meta))
}

/// Grids and sizes for the moment-bound suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppendixConfig {
    pub alpha: f64,
    pub r_grid: Vec<f64>,
    pub k_grid: Vec<f64>,
    pub samples: usize,
    /// K and sample size of the σ-doubling check.
    pub doubling_k: f64,
    pub doubling_samples: usize,
    pub seed: u64,
}

impl AppendixConfig {
    /// r-grid {α/2, (α+2)/2, 2}, K = 10^3 … 10^8, doubling at K = 10^5.
    pub fn default_for(alpha: f64, seed: u64) -> Self {
        Self {
            alpha,
            r_grid: vec![alpha / 2.0, (alpha + 2.0) / 2.0, 2.0],
            k_grid: (0..6).map(|i| libm::pow(10.0, 3.0 + i as f64)).collect(),
            samples: 200_000,
            doubling_k: 1e5,
            doubling_samples: 1_000_000,
            seed,
        }
    }
}

/// A truncated quantity whose growth in K is bounded by a power of K.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Family {
    /// P(Y > K), exponent −α.
    Tail,
    /// E[Y^r 1{0 ≤ Y ≤ K}] for r > α, exponent r − α.
    Above(f64),
    /// E[Y^r 1{Y ≥ K}] for r < α, exponent r − α.
    Below(f64),
    /// E[Y² 1{0 ≤ Y ≤ K}], exponent 2 − α.
    Second,
}

impl Family {
    fn name(&self) -> String {
        match self {
            Family::Tail => "tail".to_string(),
            Family::Above(r) => format!("moment_above/r={r}"),
            Family::Below(r) => format!("moment_below/r={r}"),
            Family::Second => "second_moment".to_string(),
        }
    }

    fn order(&self) -> f64 {
        match self {
            Family::Tail => 0.0,
            Family::Above(r) | Family::Below(r) => *r,
            Family::Second => 2.0,
        }
    }

    fn exponent(&self, alpha: f64) -> f64 {
        self.order() - alpha
    }

    fn window(&self, k: f64) -> Result<TruncationWindow> {
        match self {
            Family::Tail | Family::Below(_) => TruncationWindow::above(k),
            Family::Above(_) | Family::Second => TruncationWindow::new(0.0, k),
        }
    }
}

/// Monte Carlo (importance-weighted) estimates of the four bound families
/// for Y ~ S_α(1, 1, 0) across the K-grid. Each family yields a slope result
/// (|fitted log-log slope − exponent| ≤ `slope_tol`) and a σ-doubling result
/// (the estimate at `doubling_k` with σ = 2 over σ = 1 against 2^α, in
/// standard errors). Orders equal to α are skipped as not applicable.
pub fn appendix_moment_suite(cfg: &AppendixConfig, th: &Thresholds, num: &NumericConfig) -> Result<Vec<TestResult>> {
    let alpha = cfg.alpha;
    if cfg.k_grid.len() < 5 {
        return Err(invalid!("the K-grid needs at least five points"));
    }
    if cfg.k_grid.iter().any(|k| !(*k > 0.0)) || cfg.k_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(invalid!("the K-grid must be positive and increasing"));
    }
    let mut families = vec![Family::Tail];
    let mut out = Vec::new();
    for &r in &cfg.r_grid {
        if r == 2.0 {
            continue;
        }
        if r > alpha {
            families.push(Family::Above(r));
        } else if r < alpha && r > 0.0 {
            families.push(Family::Below(r));
        } else {
            out.push(TestResult::not_applicable(
                format!("appendix/alpha={alpha}/r={r}"),
                "order equal to alpha or not positive",
                Metadata::default().with_alpha(alpha),
            ));
        }
    }
    families.push(Family::Second);
    let unit = StableParams::new(alpha, 1.0, 1.0, 0.0)?;
    let double = StableParams::new(alpha, 2.0, 1.0, 0.0)?;
    for (fi, fam) in families.iter().enumerate() {
        let seed = stream_id(&[cfg.seed, vtag::APPENDIX, fi as u64]);
        let method = MomentMethod::MonteCarlo { samples: cfg.samples, seed };
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        let mut meta = Metadata::default()
            .with_alpha(alpha)
            .with_beta(1.0)
            .with_seed(cfg.seed)
            .with_replicas(cfg.samples)
            .tol("slope_tol", th.slope_tol);
        for (i, k) in cfg.k_grid.iter().enumerate() {
            let est = unit.truncated_moment(fam.order(), &fam.window(*k)?, method, num)?;
            meta = meta.val(&format!("estimate_{i}"), est.value).val(&format!("se_{i}"), est.std_error);
            xs.push(libm::log(*k));
            ys.push(libm::log(est.value));
        }
        let exponent = fam.exponent(alpha);
        let stat = match ols(&xs, &ys) {
            Ok((slope, intercept)) if slope.is_finite() => {
                meta = meta.val("slope", slope).val("constant", libm::exp(intercept));
                (slope - exponent).abs()
            }
            _ => f64::NAN,
        };
        meta = meta.val("exponent", exponent);
        out.push(TestResult::new(format!("appendix_slope/alpha={alpha}/{}", fam.name()), stat, th.slope_tol, meta));

        let k = cfg.doubling_k;
        let dm = |t: u64| MomentMethod::MonteCarlo {
            samples: cfg.doubling_samples,
            seed: stream_id(&[cfg.seed, vtag::APPENDIX, fi as u64, t]),
        };
        let e1 = unit.truncated_moment(fam.order(), &fam.window(k)?, dm(1), num)?;
        let e2 = double.truncated_moment(fam.order(), &fam.window(k)?, dm(2), num)?;
        let ratio = e2.value / e1.value;
        let (r1, r2) = (e1.std_error / e1.value, e2.std_error / e2.value);
        let rel = libm::sqrt(r1 * r1 + r2 * r2);
        let want = libm::pow(2.0, alpha);
        let z = (ratio - want).abs() / (ratio.abs() * rel);
        let meta = Metadata::default()
            .with_alpha(alpha)
            .with_seed(cfg.seed)
            .with_replicas(cfg.doubling_samples)
            .tol("sigma_se", th.sigma_se)
            .val("k", k)
            .val("ratio", ratio)
            .val("expected", want);
        out.push(TestResult::new(format!("appendix_sigma/alpha={alpha}/{}", fam.name()), z, th.sigma_se, meta));
    }
    Ok(out)
}

/// The `quantile` of √M·(CF distance) over `trials` null samples of size M
/// drawn from `target`: the coefficient c of a threshold c/√M.
pub fn calibrate_ecf_coef<E: Executor>(
    target: &StableParams,
    m: usize,
    trials: usize,
    quantile: f64,
    seed: u64,
    exec: &E,
) -> Result<f64> {
    if trials == 0 || m == 0 || !(quantile > 0.0 && quantile < 1.0) {
        return Err(invalid!("calibration needs trials, samples and a quantile in (0, 1)"));
    }
    let grid = default_grid();
    let ds: Vec<Result<f64>> = exec.map(trials, |t| {
        let mut rng = substream(seed, &[vtag::CALIBRATE, t as u64]);
        let xs: Vec<f64> = (0..m).map(|_| sample(target, &mut rng)).collect();
        Ok(ecf_distance(&xs, target, &grid)? * root(m))
    });
    let mut ds = ds.into_iter().collect::<Result<Vec<f64>>>()?;
    ds.sort_by(f64::total_cmp);
    let i = (libm::ceil(quantile * trials as f64) as usize).clamp(1, trials) - 1;
    Ok(ds[i])
}

//! Observables over the full shift realization.
//!
//! Each row k of the array is an i.i.d. stream f_k(j) = Z_k(j), j ≥ 0, and
//! T acts by re-indexing. The three regimes combine the rows into
//!
//! - `SkewedSub1` (α < 1): h_k = a f_k − b g_k with g_k = f_k∘T^{d_k};
//! - `Symmetric` (1 ≤ α < 2): h_k = f_k − g_k;
//! - `SkewedSuper1` (1 < α < 2): H_k = a h_k − b ĥ_k with h_k = f_k − φ_k,
//!   φ_k = D_k^{−1} Σ_{j<D_k} f_k∘T^j and ĥ_k = h_k∘T^{d_k};
//!
//! where d_k = 4^{k²}, D_k = 4^{αk} rounded, and (a, b) are the Φ_β weights
//! (((1+β)/2)^{1/α}, ((1−β)/2)^{1/α}).
//!
//! A realization only materializes the windows a path of length n needs.
//! Shifted copies whose window does not overlap the original one are drawn
//! as fresh independent streams, which has the same joint law. The long
//! middle block inside φ_k is drawn as an aggregate.

mod birkhoff;
mod centering;

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::RangeInclusive;

use rand_distr::{Binomial, Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng::{substream, tag, StreamRng};
use crate::stable_core::NumericConfig;
use crate::triangular_array::{nonzero_prob, sample_stream, ArrayConfig, ArrayLaw, RowIndex, RowLaw, SparseStream};

pub use birkhoff::{
    birkhoff_block_sum, birkhoff_block_sum_dense, birkhoff_brute_force, coboundary_brute_force, coboundary_sum_dense,
    densify,
};
pub use centering::{centering_bn, BnTerm, CenteringReport};

/// Which observable is built.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Regime {
    SkewedSub1 { beta: f64 },
    Symmetric,
    SkewedSuper1 { beta: f64 },
}

impl Regime {
    pub fn name(&self) -> &'static str {
        match self {
            Regime::SkewedSub1 { .. } => "sub1",
            Regime::Symmetric => "sym",
            Regime::SkewedSuper1 { .. } => "super1",
        }
    }

    /// Skewness of the limit (0 for the symmetric regime).
    pub fn beta(&self) -> f64 {
        match *self {
            Regime::SkewedSub1 { beta } | Regime::SkewedSuper1 { beta } => beta,
            Regime::Symmetric => 0.0,
        }
    }

    pub fn validate(&self, alpha: f64) -> Result<()> {
        let beta = self.beta();
        if !(-1.0..=1.0).contains(&beta) {
            return Err(invalid!("beta must lie in [-1, 1], got {beta}"));
        }
        let ok = match self {
            Regime::SkewedSub1 { .. } => alpha > 0.0 && alpha < 1.0,
            Regime::Symmetric => (1.0..2.0).contains(&alpha),
            Regime::SkewedSuper1 { .. } => alpha > 1.0 && alpha < 2.0,
        };
        if !ok {
            let range = match self {
                Regime::SkewedSub1 { .. } => "(0, 1)",
                Regime::Symmetric => "[1, 2)",
                Regime::SkewedSuper1 { .. } => "(1, 2)",
            };
            return Err(invalid!("regime {} needs alpha in {range}, got {alpha}", self.name()));
        }
        Ok(())
    }
}

/// Φ_β weights (((1+β)/2)^{1/α}, ((1−β)/2)^{1/α}).
pub fn phi_weights(beta: f64, alpha: f64) -> (f64, f64) {
    (libm::pow((1.0 + beta) / 2.0, 1.0 / alpha), libm::pow((1.0 - beta) / 2.0, 1.0 / alpha))
}

/// Row bands. S = VerySmall ∪ LargeSmall.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Band {
    VerySmall,
    LargeSmall,
    Middle,
    Large,
}

impl Band {
    pub const ALL: [Band; 4] = [Band::VerySmall, Band::LargeSmall, Band::Middle, Band::Large];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Band::VerySmall => "VS",
            Band::LargeSmall => "LS",
            Band::Middle => "M",
            Band::Large => "L",
        }
    }
}

/// Band edges for a window length n.
///
/// S = [1, s_edge], M = (s_edge, m_edge], L = (m_edge, k_max], and
/// VS = [1, min(vs_edge, s_edge)] where vs_edge is the largest k with
/// d_k = 4^{k²} ≤ n.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandRange {
    pub n: u64,
    pub alpha: f64,
    pub vs_edge: u32,
    pub s_edge: u32,
    pub m_edge: u32,
    pub k_max: u32,
    pub epsilon: f64,
    /// n·Σ_{k>k_max} p_k, a bound on the chance that a dropped row matters.
    pub truncated_mass: f64,
}

impl BandRange {
    pub fn band_of(&self, k: u32) -> Option<Band> {
        if k == 0 || k > self.k_max {
            None
        } else if k <= self.s_edge {
            Some(if k <= self.vs_edge { Band::VerySmall } else { Band::LargeSmall })
        } else if k <= self.m_edge {
            Some(Band::Middle)
        } else {
            Some(Band::Large)
        }
    }

    /// Rows of a band (possibly empty).
    pub fn rows(&self, band: Band) -> RangeInclusive<u32> {
        let vs = self.vs_edge.min(self.s_edge);
        match band {
            Band::VerySmall => 1..=vs,
            Band::LargeSmall => vs + 1..=self.s_edge,
            Band::Middle => self.s_edge + 1..=self.m_edge,
            Band::Large => self.m_edge + 1..=self.k_max,
        }
    }
}

/// (vs_edge, s_edge, m_edge) for n and α.
pub fn band_edges(n: u64, alpha: f64) -> (u32, u32, u32) {
    let l = libm::log2(n as f64);
    let s = libm::floor(l / (2.0 * alpha)) as u32;
    let m = libm::floor(l / alpha) as u32;
    // 4^{k²} ≤ n  ⇔  2k² ≤ ⌊log₂ n⌋.
    let lf = n.max(1).ilog2();
    let mut vs = 0u32;
    while 2 * (vs + 1) * (vs + 1) <= lf {
        vs += 1;
    }
    (vs, s, m)
}

/// Band edges plus the truncation row k_max: the smallest K ≥ m_edge with
/// n·Σ_{k>K} p_k < ε.
pub fn band_ranges(n: u64, alpha: f64, epsilon: f64, num: &NumericConfig) -> Result<BandRange> {
    if n < 2 {
        return Err(invalid!("band ranges need n >= 2, got {n}"));
    }
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(invalid!("alpha must lie in (0, 2), got {alpha}"));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(invalid!("epsilon must lie in (0, 1), got {epsilon}"));
    }
    let (vs_edge, s_edge, m_edge) = band_edges(n, alpha);
    let nf = n as f64;
    // p_k decays like 2^{−αk}/k, so the neglected remainder beyond the last
    // computed row is below p·r/(1−r) with r = 2^{−α}.
    let ratio = libm::pow(2.0, -alpha);
    let mut probs = Vec::new();
    let mut k = 1u32;
    loop {
        let p = nonzero_prob(RowIndex::new(k)?, alpha, num)?;
        probs.push(p);
        if k > m_edge && nf * p * ratio / (1.0 - ratio) < epsilon * 1e-3 {
            break;
        }
        if k >= 400 {
            return Err(Error::ResourceLimit(alloc::format!("row probabilities decay too slowly at alpha = {alpha}")));
        }
        k += 1;
    }
    let last = *probs.last().unwrap_or(&0.0);
    let mut tail = last * ratio / (1.0 - ratio);
    let mut k_max = probs.len() as u32;
    // Walk down while dropping one more row keeps the mass below ε.
    while k_max > m_edge.max(1) {
        let p = probs[k_max as usize - 1];
        if nf * (tail + p) < epsilon {
            tail += p;
            k_max -= 1;
        } else {
            break;
        }
    }
    Ok(BandRange { n, alpha, vs_edge, s_edge, m_edge, k_max, epsilon, truncated_mass: nf * tail })
}

/// d_k = 4^{k²}, or `None` beyond u128.
pub fn coupling_shift(k: u32) -> Option<u128> {
    let e = 2u64 * k as u64 * k as u64;
    if e < 128 {
        Some(1u128 << e)
    } else {
        None
    }
}

/// Largest averaging length handled.
pub const MAX_AVERAGING_LENGTH: u64 = 1 << 62;

/// D_k = 4^{αk}, rounded to the nearest integer.
pub fn averaging_length(k: u32, alpha: f64) -> Result<u64> {
    let d = libm::round(libm::pow(4.0, alpha * k as f64));
    if !(d <= MAX_AVERAGING_LENGTH as f64) {
        return Err(Error::ResourceLimit(alloc::format!(
            "D_{k} = 4^({alpha}*{k}) exceeds 2^62; lower epsilon's row count or raise alpha"
        )));
    }
    Ok((d as u64).max(1))
}

/// Everything that fixes the law of a realization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CocycleConfig {
    pub regime: Regime,
    pub alpha: f64,
    pub n: u64,
    /// Extra positions realized past n, for shifted reads.
    pub lookahead: u64,
    pub epsilon: f64,
    pub array: ArrayConfig,
    pub numeric: NumericConfig,
    /// Middle blocks of φ_k with at most this many expected nonzero entries
    /// are drawn exactly; larger ones by a Gaussian with the exact mean and
    /// variance.
    pub aggregate_exact_max: f64,
    /// Keep the row streams in each sample (for dumps).
    pub keep_streams: bool,
}

impl CocycleConfig {
    pub fn new(regime: Regime, alpha: f64, n: u64) -> Result<Self> {
        let c = Self {
            regime,
            alpha,
            n,
            lookahead: 0,
            epsilon: 1e-3,
            array: ArrayConfig::default(),
            numeric: NumericConfig::default(),
            aggregate_exact_max: 4096.0,
            keep_streams: false,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        self.regime.validate(self.alpha)?;
        if self.n < 2 {
            return Err(invalid!("window length n must be at least 2, got {}", self.n));
        }
        if self.n.checked_add(self.lookahead).map_or(true, |l| l > 1 << 32) {
            return Err(Error::ResourceLimit(alloc::format!(
                "window n + lookahead = {} + {} is too long to materialize",
                self.n,
                self.lookahead
            )));
        }
        Ok(())
    }

    pub fn window_len(&self) -> u64 {
        self.n + self.lookahead
    }
}

#[derive(Debug, Clone, Copy)]
struct RowPlan {
    k: u32,
    band: Band,
    shift: Option<u128>,
    avg_len: u64,
}

/// Precomputed band edges and row laws for one configuration, shared by
/// all replicas.
#[derive(Debug, Clone)]
pub struct CocycleModel {
    pub config: CocycleConfig,
    pub bands: BandRange,
    pub law: ArrayLaw,
    plans: Vec<RowPlan>,
}

/// Labels of the streams kept in a sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StreamLabel {
    /// f_k on [offset, offset + len).
    F,
    /// g_k drawn as a fresh stream.
    G,
    /// f_k far block [D_k, D_k + n − 1).
    FFar,
    /// The independent copy behind ĥ_k.
    HatF,
    HatFFar,
}

/// A kept row stream. Positions are relative to `offset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamRecord {
    pub k: u32,
    pub label: StreamLabel,
    pub offset: u128,
    pub stream: SparseStream,
}

/// One realization of the observable on the window [0, n + lookahead),
/// stored as per-band values at every index.
#[derive(Debug, Clone)]
pub struct CocycleSample {
    pub n: u64,
    pub offset: u64,
    len: u64,
    bands: Arc<[Vec<f64>; 4]>,
    middle_direct: Arc<Vec<(u64, f64)>>,
    pub streams: Vec<StreamRecord>,
    /// Aggregated middle blocks of φ_k as (k, label of the near block, sum).
    pub aggregates: Vec<(u32, StreamLabel, f64)>,
}

impl CocycleSample {
    /// Realized window length.
    pub fn window_len(&self) -> u64 {
        self.len
    }

    /// Observable values of one band at indices offset..offset+n.
    pub fn band_values(&self, band: Band) -> &[f64] {
        let o = self.offset as usize;
        &self.bands[band.index()][o..o + self.n as usize]
    }

    /// Observable values at indices offset..offset+n.
    pub fn values(&self) -> Vec<f64> {
        let mut v = self.band_values(Band::VerySmall).to_vec();
        for b in [Band::LargeSmall, Band::Middle, Band::Large] {
            for (x, y) in v.iter_mut().zip(self.band_values(b)) {
                *x += *y;
            }
        }
        v
    }

    /// Koopman shift by s: the same realization read from offset + s.
    pub fn shift_apply(&self, s: u64) -> Result<Self> {
        let offset = self.offset.checked_add(s).ok_or(Error::WindowUnderrun {
            requested: self.offset as u128 + s as u128 + self.n as u128,
            available: self.len as u128,
        })?;
        if offset as u128 + self.n as u128 > self.len as u128 {
            return Err(Error::WindowUnderrun {
                requested: offset as u128 + self.n as u128,
                available: self.len as u128,
            });
        }
        Ok(Self { offset, ..self.clone() })
    }

    /// Σ of the observable (or one band) over relative indices [a, b),
    /// which may reach past n into the lookahead.
    pub fn range_sum(&self, band: Option<Band>, a: u64, b: u64) -> Result<f64> {
        let end = self.offset as u128 + b as u128;
        if end > self.len as u128 {
            return Err(Error::WindowUnderrun { requested: end, available: self.len as u128 });
        }
        let (lo, hi) = ((self.offset + a) as usize, (self.offset + b) as usize);
        if lo >= hi {
            return Ok(0.0);
        }
        Ok(match band {
            Some(bd) => self.bands[bd.index()][lo..hi].iter().sum(),
            None => Band::ALL.iter().map(|bd| self.bands[bd.index()][lo..hi].iter().sum::<f64>()).sum(),
        })
    }

    /// Σ over the window of the middle-band `a·f_k` terms alone, without the
    /// shifted or averaged parts.
    pub fn middle_direct_sum(&self) -> f64 {
        let (a, b) = (self.offset, self.offset + self.n);
        let lo = self.middle_direct.partition_point(|e| e.0 < a);
        let hi = self.middle_direct.partition_point(|e| e.0 < b);
        self.middle_direct[lo..hi].iter().map(|e| e.1).sum()
    }
}

/// Per-band accumulators during realization.
struct Accum {
    direct: [Vec<f64>; 4],
    delta: [Vec<f64>; 4],
    c0: [f64; 4],
    middle: Vec<(u64, f64)>,
    streams: Vec<StreamRecord>,
    aggregates: Vec<(u32, StreamLabel, f64)>,
    keep: bool,
}

impl Accum {
    fn new(len: usize, averaged: bool, keep: bool) -> Self {
        let dl = if averaged { len } else { 0 };
        Self {
            direct: [vec![0.0; len], vec![0.0; len], vec![0.0; len], vec![0.0; len]],
            delta: [vec![0.0; dl], vec![0.0; dl], vec![0.0; dl], vec![0.0; dl]],
            c0: [0.0; 4],
            middle: Vec::new(),
            streams: Vec::new(),
            aggregates: Vec::new(),
            keep,
        }
    }

    fn keep(&mut self, k: u32, label: StreamLabel, offset: u128, s: &SparseStream) {
        if self.keep {
            self.streams.push(StreamRecord { k, label, offset, stream: s.clone() });
        }
    }

    /// Adds w·f at positions [o, o + len) of `s`; records the middle-band
    /// direct part when `primary`.
    fn add_shifted(&mut self, b: Band, s: &SparseStream, o: u64, w: f64, primary: bool) {
        let len = self.direct[0].len() as u64;
        let bi = b.index();
        for e in &s.entries {
            if e.pos >= o && e.pos < o + len {
                let v = w * e.value.value();
                self.direct[bi][(e.pos - o) as usize] += v;
                if primary && b == Band::Middle {
                    self.middle.push((e.pos - o, v));
                }
            }
        }
    }

    /// Adds w·(f − φ) on [o, o + len) from a stream covering [o, o + len + D − 1).
    fn add_coboundary_dense(&mut self, b: Band, s: &SparseStream, o: u64, d: u64, w: f64, primary: bool) {
        let len = self.direct[0].len() as u64;
        let bi = b.index();
        let df = d as f64;
        for e in &s.entries {
            let (p, v) = (e.pos, w * e.value.value());
            if p < o {
                continue;
            }
            let r = p - o;
            if r < len {
                self.direct[bi][r as usize] += v;
                if primary && b == Band::Middle {
                    self.middle.push((r, v));
                }
            }
            if r < d {
                self.c0[bi] += v / df;
            }
            if r + 1 < len {
                self.delta[bi][(r + 1) as usize] -= v / df;
            }
            if r >= d && r - d + 1 < len {
                self.delta[bi][(r - d + 1) as usize] += v / df;
            }
        }
    }

    /// Adds w·(f − φ) on [0, len) when D ≥ len, from the near block [0, len),
    /// the far block [D, D + len − 1) and the aggregate of [len, D).
    fn add_coboundary_split(
        &mut self,
        b: Band,
        near: &SparseStream,
        far: &SparseStream,
        middle_sum: f64,
        d: u64,
        w: f64,
        primary: bool,
    ) {
        let len = self.direct[0].len() as u64;
        let bi = b.index();
        let df = d as f64;
        for e in &near.entries {
            let (r, v) = (e.pos, w * e.value.value());
            self.direct[bi][r as usize] += v;
            if primary && b == Band::Middle {
                self.middle.push((r, v));
            }
            self.c0[bi] += v / df;
            if r + 1 < len {
                self.delta[bi][(r + 1) as usize] -= v / df;
            }
        }
        self.c0[bi] += w * middle_sum / df;
        for e in &far.entries {
            if e.pos + 1 < len {
                self.delta[bi][(e.pos + 1) as usize] += w * e.value.value() / df;
            }
        }
    }

    fn finish(mut self, n: u64, averaged: bool) -> CocycleSample {
        if averaged {
            for bi in 0..4 {
                let mut phi = self.c0[bi];
                for (x, dl) in self.direct[bi].iter_mut().zip(&self.delta[bi]) {
                    phi += *dl;
                    *x -= phi;
                }
            }
        }
        self.middle.sort_by_key(|e| e.0);
        let len = self.direct[0].len() as u64;
        CocycleSample {
            n,
            offset: 0,
            len,
            bands: Arc::new(self.direct),
            middle_direct: Arc::new(self.middle),
            streams: self.streams,
            aggregates: self.aggregates,
        }
    }
}

/// Sum of m i.i.d. copies of Z_k: exact when few entries are expected,
/// Gaussian with the exact first two moments otherwise.
fn aggregate_sum(law: &RowLaw, m: u64, exact_max: f64, rng: &mut StreamRng) -> Result<f64> {
    if m == 0 || law.p <= 0.0 {
        return Ok(0.0);
    }
    let mf = m as f64;
    if mf * law.p <= exact_max {
        let count = Binomial::new(m, law.p.min(1.0)).map_err(|e| invalid!("binomial count: {e}"))?.sample(rng);
        Ok((0..count).map(|_| law.conditional_sample(rng).value()).sum())
    } else {
        let normal = Normal::new(mf * law.mean(), libm::sqrt(mf * law.variance()))
            .map_err(|e| invalid!("gaussian aggregate: {e}"))?;
        Ok(normal.sample(rng))
    }
}

const DENSE_WINDOW_LIMIT: u128 = 1 << 30;

impl CocycleModel {
    pub fn new(config: CocycleConfig) -> Result<Self> {
        config.validate()?;
        let bands = band_ranges(config.n, config.alpha, config.epsilon, &config.numeric)?;
        let law = ArrayLaw::new(config.alpha, bands.k_max, &config.array, &config.numeric)?;
        let averaged = matches!(config.regime, Regime::SkewedSuper1 { .. });
        let plans = (1..=bands.k_max)
            .map(|k| {
                Ok(RowPlan {
                    k,
                    band: bands.band_of(k).expect("row inside k_max"),
                    shift: coupling_shift(k),
                    avg_len: if averaged { averaging_length(k, config.alpha)? } else { 0 },
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { config, bands, law, plans })
    }

    /// Whether g_k is read from the same stream as f_k (d_k ≤ n, or the
    /// shifted window overlaps the realized one).
    pub fn literal_shift(&self, k: u32) -> bool {
        let len = self.config.window_len() as u128;
        coupling_shift(k).is_some_and(|d| d <= self.config.n as u128 || d < len)
    }

    /// The realization for `(seed, replica)`.
    pub fn realize(&self, seed: u64, replica: u64) -> Result<CocycleSample> {
        let c = &self.config;
        let len = c.window_len();
        let averaged = matches!(c.regime, Regime::SkewedSuper1 { .. });
        let mut acc = Accum::new(len as usize, averaged, c.keep_streams);
        let (a, b) = match c.regime {
            Regime::SkewedSub1 { beta } | Regime::SkewedSuper1 { beta } => phi_weights(beta, c.alpha),
            Regime::Symmetric => (1.0, 1.0),
        };
        for plan in &self.plans {
            let row = self.law.row(plan.k)?;
            let rng_for = |part: u64| substream(seed, &[tag::COCYCLE, replica, plan.k as u64, part]);
            if averaged {
                self.realize_averaged_row(&mut acc, row, plan, a, b, &rng_for)?;
            } else {
                self.realize_shift_row(&mut acc, row, plan, a, b, &rng_for)?;
            }
        }
        Ok(acc.finish(c.n, averaged))
    }

    fn realize_shift_row(
        &self,
        acc: &mut Accum,
        row: &RowLaw,
        plan: &RowPlan,
        a: f64,
        b: f64,
        rng_for: &dyn Fn(u64) -> StreamRng,
    ) -> Result<()> {
        let len = self.config.window_len();
        let k = plan.k;
        if b == 0.0 || a == 0.0 {
            // Only one of f, g enters; either is an i.i.d. stream on the window.
            let f = sample_stream(row, len, &mut rng_for(0));
            acc.keep(k, if b == 0.0 { StreamLabel::F } else { StreamLabel::G }, 0, &f);
            if b == 0.0 {
                acc.add_shifted(plan.band, &f, 0, a, true);
            } else {
                acc.add_shifted(plan.band, &f, 0, -b, false);
            }
            return Ok(());
        }
        if self.literal_shift(k) {
            let d = plan.shift.expect("literal shift has a finite d_k");
            let total = d + len as u128;
            let f = sample_stream(row, total as u64, &mut rng_for(0));
            acc.keep(k, StreamLabel::F, 0, &f);
            acc.add_shifted(plan.band, &f, 0, a, true);
            acc.add_shifted(plan.band, &f, d as u64, -b, false);
        } else {
            let f = sample_stream(row, len, &mut rng_for(0));
            let g = sample_stream(row, len, &mut rng_for(1));
            acc.keep(k, StreamLabel::F, 0, &f);
            acc.keep(k, StreamLabel::G, plan.shift.unwrap_or(u128::MAX), &g);
            acc.add_shifted(plan.band, &f, 0, a, true);
            acc.add_shifted(plan.band, &g, 0, -b, false);
        }
        Ok(())
    }

    fn realize_averaged_row(
        &self,
        acc: &mut Accum,
        row: &RowLaw,
        plan: &RowPlan,
        a: f64,
        b: f64,
        rng_for: &dyn Fn(u64) -> StreamRng,
    ) -> Result<()> {
        let len = self.config.window_len();
        let (k, d) = (plan.k, plan.avg_len);
        let need_hat = b > 0.0;
        let overlap = need_hat && plan.shift.is_some_and(|s| s < len as u128 + d as u128 - 1);
        if overlap {
            let s = plan.shift.expect("overlap implies finite d_k");
            let total = s + len as u128 + d as u128 - 1;
            if total > DENSE_WINDOW_LIMIT {
                return Err(Error::ResourceLimit(alloc::format!("row {k} needs a dense window of {total} positions")));
            }
            let f = sample_stream(row, total as u64, &mut rng_for(0));
            acc.keep(k, StreamLabel::F, 0, &f);
            if a > 0.0 {
                acc.add_coboundary_dense(plan.band, &f, 0, d, a, true);
            }
            acc.add_coboundary_dense(plan.band, &f, s as u64, d, -b, false);
            return Ok(());
        }
        if a > 0.0 {
            self.averaged_copy(acc, row, plan, a, true, 0, rng_for)?;
        }
        if need_hat {
            self.averaged_copy(acc, row, plan, -b, false, 4, rng_for)?;
        }
        Ok(())
    }

    /// One independent copy of w·(f_k − φ_k) on the window.
    #[allow(clippy::too_many_arguments)]
    fn averaged_copy(
        &self,
        acc: &mut Accum,
        row: &RowLaw,
        plan: &RowPlan,
        w: f64,
        primary: bool,
        part: u64,
        rng_for: &dyn Fn(u64) -> StreamRng,
    ) -> Result<()> {
        let len = self.config.window_len();
        let (k, d) = (plan.k, plan.avg_len);
        let (near_label, far_label) =
            if primary { (StreamLabel::F, StreamLabel::FFar) } else { (StreamLabel::HatF, StreamLabel::HatFFar) };
        if d < len {
            let f = sample_stream(row, len + d - 1, &mut rng_for(part));
            acc.keep(k, near_label, 0, &f);
            acc.add_coboundary_dense(plan.band, &f, 0, d, w, primary);
        } else {
            let near = sample_stream(row, len, &mut rng_for(part));
            let far = sample_stream(row, len - 1, &mut rng_for(part + 1));
            let middle = aggregate_sum(row, d - len, self.config.aggregate_exact_max, &mut rng_for(part + 2))?;
            acc.keep(k, near_label, 0, &near);
            acc.keep(k, far_label, d as u128, &far);
            if acc.keep {
                acc.aggregates.push((k, near_label, middle));
            }
            acc.add_coboundary_split(plan.band, &near, &far, middle, d, w, primary);
        }
        Ok(())
    }
}

/// Cumulative sums S_0 = 0, S_1, …, S_n of each band.
#[derive(Debug, Clone, PartialEq)]
pub struct BandSums {
    pub n: u64,
    pub cumulative: [Vec<f64>; 4],
}

impl BandSums {
    pub fn band(&self, band: Band) -> &[f64] {
        &self.cumulative[band.index()]
    }

    /// S-band sums (VS + LS).
    pub fn small(&self) -> Vec<f64> {
        self.band(Band::VerySmall).iter().zip(self.band(Band::LargeSmall)).map(|(x, y)| x + y).collect()
    }

    /// Total sums, defined as the sum of the band sums at each index.
    pub fn total(&self) -> Vec<f64> {
        let mut t = self.cumulative[0].clone();
        for c in &self.cumulative[1..] {
            for (x, y) in t.iter_mut().zip(c) {
                *x += *y;
            }
        }
        t
    }
}

/// Per-band partial sums of a sample over its window.
pub fn band_sums(sample: &CocycleSample) -> BandSums {
    let cumulative = Band::ALL.map(|b| {
        let vals = sample.band_values(b);
        let mut out = Vec::with_capacity(vals.len() + 1);
        let mut s = 0.0;
        out.push(0.0);
        for v in vals {
            s += *v;
            out.push(s);
        }
        out
    });
    BandSums { n: sample.n, cumulative }
}

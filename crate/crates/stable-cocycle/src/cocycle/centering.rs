//! The centering constants B_n = n Σ_k E[X_k 1{X_k ≤ 2^k}].

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::band_edges;
use crate::error::{invalid, Result};
use crate::rng::{stream_id, tag};
use crate::stable_core::{MomentMethod, NumericConfig, TruncationWindow};
use crate::triangular_array::RowIndex;

/// One row's contribution to B_n.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BnTerm {
    pub k: u32,
    /// E[X_k 1{X_k ≤ 2^k}].
    pub expectation: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CenteringReport {
    pub n: u64,
    pub alpha: f64,
    pub terms: Vec<BnTerm>,
    pub value: f64,
    /// B_n / (n (log₂ n)^{1−1/α}).
    pub log_rate_ratio: f64,
}

/// Rows entering B_n: ⌊log₂ n/(2α)⌋ (at least 1) through ⌊log₂ n/α⌋.
pub fn centering_rows(n: u64, alpha: f64) -> core::ops::RangeInclusive<u32> {
    let (_, s, m) = band_edges(n, alpha);
    s.max(1)..=m
}

/// B_n with each term by quadrature (or by `method`).
pub fn centering_bn(n: u64, alpha: f64, method: MomentMethod, num: &NumericConfig) -> Result<CenteringReport> {
    if !(alpha > 1.0 && alpha < 2.0) {
        return Err(invalid!("B_n is defined for alpha in (1, 2), got {alpha}"));
    }
    if n < 2 {
        return Err(invalid!("B_n needs n >= 2, got {n}"));
    }
    let mut terms = Vec::new();
    for k in centering_rows(n, alpha) {
        let row = RowIndex::new(k)?;
        let law = row.law(alpha)?;
        let method = match method {
            MomentMethod::MonteCarlo { samples, seed } => {
                MomentMethod::MonteCarlo { samples, seed: stream_id(&[seed, tag::BN, k as u64]) }
            }
            q => q,
        };
        let m = law.truncated_moment(1.0, &TruncationWindow::below(row.lower())?, method, num)?;
        terms.push(BnTerm { k, expectation: m.value, std_error: m.std_error });
    }
    let nf = n as f64;
    let value = nf * terms.iter().map(|t| t.expectation).sum::<f64>();
    let rate = nf * libm::pow(libm::log2(nf), 1.0 - 1.0 / alpha);
    Ok(CenteringReport { n, alpha, terms, value, log_rate_ratio: value / rate })
}

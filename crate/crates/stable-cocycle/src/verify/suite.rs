//! Runs a configured set of checks and collects their results in a fixed
//! order.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{
    appendix_moment_suite, band_vanishing_test, bn_oracle_test, closed_form_test, equal_distribution_test,
    exact_aggregate_marks, exact_stability_check, fclt_marginal_test, increment_tests, quantile_roundtrip_test,
    sampler_ks_test, truncation_bound_test, AppendixConfig, LimitTarget, Rung, TestResult, Thresholds,
};
use crate::cocycle::{CocycleConfig, CocycleModel, Regime};
use crate::error::{invalid, Result};
use crate::process::{ensemble_run, Ensemble, Executor};
use crate::rng::{stream_id, tag};
use crate::stable_core::NumericConfig;

/// Groups of checks, selectable one by one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuitePart {
    Sampler,
    Cdf,
    Exact,
    Array,
    ClosedForm,
    EqualDistribution,
    Bands,
    Fclt,
    Increments,
    Appendix,
    Centering,
}

impl SuitePart {
    pub const ALL: [SuitePart; 11] = [
        SuitePart::Sampler,
        SuitePart::Cdf,
        SuitePart::Exact,
        SuitePart::Array,
        SuitePart::ClosedForm,
        SuitePart::EqualDistribution,
        SuitePart::Bands,
        SuitePart::Fclt,
        SuitePart::Increments,
        SuitePart::Appendix,
        SuitePart::Centering,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SuitePart::Sampler => "sampler",
            SuitePart::Cdf => "cdf",
            SuitePart::Exact => "exact",
            SuitePart::Array => "array",
            SuitePart::ClosedForm => "closed_form",
            SuitePart::EqualDistribution => "equal_distribution",
            SuitePart::Bands => "bands",
            SuitePart::Fclt => "fclt",
            SuitePart::Increments => "increments",
            SuitePart::Appendix => "appendix",
            SuitePart::Centering => "centering",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|p| p.name() == s)
    }
}

/// A regime and tail index whose ensembles are simulated along the ladder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeSpec {
    pub regime: Regime,
    pub alpha: f64,
}

impl RegimeSpec {
    pub fn label(&self) -> String {
        format!("{}/alpha={}/beta={}", self.regime.name(), self.alpha, self.regime.beta())
    }
}

/// Everything a suite run depends on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub parts: Vec<SuitePart>,
    pub thresholds: Thresholds,
    pub epsilon: f64,
    pub ks_samples: usize,
    pub roundtrip_alphas: Vec<f64>,
    pub roundtrip_betas: Vec<f64>,
    pub exact_ns: Vec<u64>,
    pub exact_alphas: Vec<f64>,
    pub exact_replicas: usize,
    pub truncation_alphas: Vec<f64>,
    pub truncation_max_row: u32,
    pub truncation_draws: usize,
    pub closed_form_instances: usize,
    pub closed_form_max_n: u64,
    pub closed_form_max_d: u64,
    pub equal_dist_n: u64,
    pub equal_dist_replicas: usize,
    /// Regimes for the two-route check.
    pub equal_dist: Vec<RegimeSpec>,
    /// Regimes simulated along the ladder (band, FCLT and increment checks).
    pub regimes: Vec<RegimeSpec>,
    pub ladder: Vec<u64>,
    pub ladder_replicas: usize,
    pub breakpoints: Vec<f64>,
    pub appendix_alphas: Vec<f64>,
    pub appendix_samples: usize,
    pub bn_n: u64,
    pub bn_alphas: Vec<f64>,
    pub bn_samples: usize,
}

impl SuiteConfig {
    /// The full configuration behind the acceptance report.
    pub fn full(seed: u64) -> Self {
        Self {
            seed,
            parts: SuitePart::ALL.to_vec(),
            thresholds: Thresholds::default(),
            epsilon: 1e-3,
            ks_samples: 100_000,
            roundtrip_alphas: vec![0.5, 0.7, 1.0, 1.4, 1.9],
            roundtrip_betas: vec![-1.0, 0.0, 1.0],
            exact_ns: vec![1 << 12, 1 << 20],
            exact_alphas: vec![0.5, 1.4],
            exact_replicas: 10_000,
            truncation_alphas: vec![0.5, 0.7],
            truncation_max_row: 12,
            truncation_draws: 1_000_000,
            closed_form_instances: 1000,
            closed_form_max_n: 64,
            closed_form_max_d: 256,
            equal_dist_n: 1 << 10,
            equal_dist_replicas: 10_000,
            equal_dist: vec![
                RegimeSpec { regime: Regime::SkewedSub1 { beta: 1.0 }, alpha: 0.7 },
                RegimeSpec { regime: Regime::SkewedSuper1 { beta: 1.0 }, alpha: 1.4 },
            ],
            regimes: vec![
                RegimeSpec { regime: Regime::SkewedSub1 { beta: 1.0 }, alpha: 0.7 },
                RegimeSpec { regime: Regime::Symmetric, alpha: 1.4 },
                RegimeSpec { regime: Regime::SkewedSuper1 { beta: 1.0 }, alpha: 1.4 },
            ],
            ladder: vec![1 << 8, 1 << 12, 1 << 16],
            ladder_replicas: 4000,
            breakpoints: vec![0.0, 0.5, 1.0],
            appendix_alphas: vec![0.7, 1.4],
            appendix_samples: 200_000,
            bn_n: 1 << 12,
            bn_alphas: vec![1.4],
            bn_samples: 1_000_000,
        }
    }

    /// Checks for one regime: its ladder ensembles, the two-route check,
    /// the exact law (α ≠ 1), the moment suite and, for the skewed α > 1
    /// regime, the centering oracle.
    pub fn for_regime(spec: RegimeSpec, ladder: Vec<u64>, replicas: usize, seed: u64) -> Self {
        let mut c = Self::full(seed);
        let a = spec.alpha;
        c.parts = vec![
            SuitePart::Exact,
            SuitePart::EqualDistribution,
            SuitePart::Bands,
            SuitePart::Fclt,
            SuitePart::Increments,
            SuitePart::Appendix,
            SuitePart::Centering,
        ];
        c.regimes = vec![spec];
        c.equal_dist = vec![spec];
        c.ladder_replicas = replicas;
        c.equal_dist_replicas = replicas;
        c.exact_replicas = replicas;
        c.exact_ns = ladder.clone();
        c.ladder = ladder;
        c.exact_alphas = if a == 1.0 { vec![] } else { vec![a] };
        c.appendix_alphas = vec![a];
        c.bn_alphas = if matches!(spec.regime, Regime::SkewedSuper1 { .. }) { vec![a] } else { vec![] };
        c
    }

    pub fn validate(&self) -> Result<()> {
        for s in self.regimes.iter().chain(&self.equal_dist) {
            s.regime.validate(s.alpha)?;
        }
        let ladder_parts = [SuitePart::Bands, SuitePart::Fclt, SuitePart::Increments];
        if self.parts.iter().any(|p| ladder_parts.contains(p)) && !self.regimes.is_empty() {
            if self.ladder.len() < 2 {
                return Err(invalid!("the n-ladder needs at least two values"));
            }
            if self.ladder.windows(2).any(|w| w[0] >= w[1]) {
                return Err(invalid!("the n-ladder must be strictly increasing"));
            }
            if self.ladder_replicas < 2 {
                return Err(invalid!("ensembles need at least two replicas"));
            }
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(invalid!("epsilon must lie in (0, 1), got {}", self.epsilon));
        }
        Ok(())
    }

    fn has(&self, p: SuitePart) -> bool {
        self.parts.contains(&p)
    }
}

/// Seed of the ensemble for a regime at one rung.
pub fn ensemble_seed(seed: u64, spec: &RegimeSpec, n: u64) -> u64 {
    let code = match spec.regime {
        Regime::SkewedSub1 { .. } => 1,
        Regime::Symmetric => 2,
        Regime::SkewedSuper1 { .. } => 3,
    };
    stream_id(&[seed, tag::ENSEMBLE, code, spec.regime.beta().to_bits(), spec.alpha.to_bits(), n])
}

/// The ensemble for one regime and n under the suite's settings.
pub fn suite_ensemble<E: Executor>(
    cfg: &SuiteConfig,
    spec: &RegimeSpec,
    n: u64,
    keep_paths: bool,
    exec: &E,
) -> Result<Ensemble> {
    let mut cc = CocycleConfig::new(spec.regime, spec.alpha, n)?;
    cc.epsilon = cfg.epsilon;
    let model = CocycleModel::new(cc)?;
    ensemble_run(&model, cfg.ladder_replicas, ensemble_seed(cfg.seed, spec, n), &cfg.breakpoints, keep_paths, exec)
}

/// Runs the configured parts and returns their results in a fixed order.
/// `progress` is told the name of each part as it starts.
pub fn run_suite<E: Executor>(cfg: &SuiteConfig, exec: &E, mut progress: impl FnMut(&str)) -> Result<Vec<TestResult>> {
    cfg.validate()?;
    let th = &cfg.thresholds;
    let num = NumericConfig::default();
    let sub = |t: u64| stream_id(&[cfg.seed, t]);
    let mut out = Vec::new();

    if cfg.has(SuitePart::Sampler) {
        progress("sampler");
        out.extend(sampler_ks_test(cfg.ks_samples, sub(tag::SAMPLER), th)?);
    }
    if cfg.has(SuitePart::Cdf) {
        progress("cdf");
        out.push(quantile_roundtrip_test(&cfg.roundtrip_alphas, &cfg.roundtrip_betas, th, &num)?);
    }
    if cfg.has(SuitePart::Exact) {
        progress("exact");
        for &a in &cfg.exact_alphas {
            for &n in &cfg.exact_ns {
                let seed = stream_id(&[cfg.seed, tag::EXACT, a.to_bits(), n]);
                out.push(exact_stability_check(n, a, cfg.exact_replicas, seed, th, exec)?);
            }
        }
    }
    if cfg.has(SuitePart::Array) {
        progress("array");
        for &a in &cfg.truncation_alphas {
            let seed = stream_id(&[cfg.seed, tag::TRUNCATION, a.to_bits()]);
            out.push(truncation_bound_test(a, cfg.truncation_max_row, cfg.truncation_draws, seed, exec)?);
        }
    }
    if cfg.has(SuitePart::ClosedForm) {
        progress("closed_form");
        out.push(closed_form_test(
            cfg.closed_form_instances,
            cfg.closed_form_max_n,
            cfg.closed_form_max_d,
            sub(tag::CLOSED_FORM),
            th,
        )?);
    }
    if cfg.has(SuitePart::EqualDistribution) {
        progress("equal_distribution");
        for spec in &cfg.equal_dist {
            let mut cc = CocycleConfig::new(spec.regime, spec.alpha, cfg.equal_dist_n)?;
            cc.epsilon = cfg.epsilon;
            let model = CocycleModel::new(cc)?;
            let seed = stream_id(&[cfg.seed, tag::DENSE, spec.alpha.to_bits()]);
            let mut r = equal_distribution_test(&model, cfg.equal_dist_replicas, seed, th, exec)?;
            r.metadata.epsilon = Some(cfg.epsilon);
            out.push(r);
        }
    }
    let ladder_parts = [SuitePart::Bands, SuitePart::Fclt, SuitePart::Increments];
    if ladder_parts.iter().any(|p| cfg.has(*p)) {
        for spec in &cfg.regimes {
            let label = spec.label();
            let mut ensembles = Vec::with_capacity(cfg.ladder.len());
            for &n in &cfg.ladder {
                progress(&format!("ensemble {label} n={n}"));
                ensembles.push(suite_ensemble(cfg, spec, n, false, exec)?);
            }
            let target = LimitTarget::new(spec.regime, spec.alpha)?;
            if cfg.has(SuitePart::Bands) {
                let refs: Vec<&Ensemble> = ensembles.iter().collect();
                if refs.len() >= 3 {
                    for mut r in band_vanishing_test(&label, &refs, th)? {
                        r.metadata.beta = Some(spec.regime.beta());
                        r.metadata.seed = Some(cfg.seed);
                        r.metadata.epsilon = Some(cfg.epsilon);
                        out.push(r);
                    }
                } else {
                    out.push(TestResult::not_applicable(
                        format!("band_vanishing/{label}"),
                        "needs a ladder of at least three n",
                        super::Metadata::default().with_alpha(spec.alpha),
                    ));
                }
            }
            if cfg.has(SuitePart::Fclt) {
                let w1: Vec<Vec<f64>> = ensembles.iter().map(|e| e.w1()).collect();
                let rungs: Vec<Rung<'_>> =
                    ensembles.iter().zip(&w1).map(|(e, s)| Rung { n: e.n, samples: s }).collect();
                for mut r in fclt_marginal_test(&label, &rungs, &target, th)? {
                    r.metadata.seed = Some(cfg.seed);
                    r.metadata.epsilon = Some(cfg.epsilon);
                    out.push(r);
                }
            }
            if cfg.has(SuitePart::Increments) {
                let e = ensembles.last().expect("ladder is non-empty");
                let marks: Vec<Vec<f64>> = e.replicas.iter().map(|r| r.marks.clone()).collect();
                for mut r in increment_tests(&label, &marks, e.n, &cfg.breakpoints, &target.params, th.fclt_cap, th)? {
                    r.metadata.seed = Some(cfg.seed);
                    r.metadata.epsilon = Some(cfg.epsilon);
                    out.push(r);
                }
            }
        }
    }
    if cfg.has(SuitePart::Increments) {
        // The X-level aggregate has exactly stable independent increments.
        for &a in &cfg.exact_alphas {
            let n = *cfg.exact_ns.first().unwrap_or(&(1 << 12));
            let seed = stream_id(&[cfg.seed, tag::EXACT, a.to_bits(), n, 1]);
            let m = cfg.exact_replicas;
            let marks = exact_aggregate_marks(n, a, &cfg.breakpoints, m, seed, exec)?;
            let disp = super::middle_dispersion(n, a);
            let law = crate::stable_core::StableParams::new(a, libm::pow(disp, 1.0 / a), 1.0, 0.0)?;
            let thr = th.ecf_coef / libm::sqrt(m as f64);
            out.extend(increment_tests(
                &format!("x_level/alpha={a}/n={n}"),
                &marks,
                n,
                &cfg.breakpoints,
                &law,
                thr,
                th,
            )?);
        }
    }
    if cfg.has(SuitePart::Appendix) {
        progress("appendix");
        for &a in &cfg.appendix_alphas {
            let mut ac = AppendixConfig::default_for(a, stream_id(&[cfg.seed, tag::MOMENTS, a.to_bits()]));
            ac.samples = cfg.appendix_samples;
            out.extend(appendix_moment_suite(&ac, th, &num)?);
        }
    }
    if cfg.has(SuitePart::Centering) {
        progress("centering");
        for &a in &cfg.bn_alphas {
            let seed = stream_id(&[cfg.seed, tag::BN, a.to_bits()]);
            out.extend(bn_oracle_test(cfg.bn_n, a, cfg.bn_samples, seed, th, &num)?);
        }
    }
    Ok(out)
}

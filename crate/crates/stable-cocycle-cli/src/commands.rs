//! The subcommands, as library functions.

use std::fmt;
use std::io::Write as _;

use stable_cocycle::cocycle::{centering_bn, CocycleConfig, CocycleModel, Regime};
use stable_cocycle::process::ensemble_run;
use stable_cocycle::stable_core::{MomentMethod, NumericConfig, StableParams};
use stable_cocycle::verify::suite::{ensemble_seed, run_suite, SuiteConfig, SuitePart};
use stable_cocycle::verify::{calibrate_ecf_coef, median_with_se, Metadata, TestResult};

use crate::report::{self, Report};
use crate::{CliError, CliResult, RayonExecutor, RunConfig};

pub const DEFAULT_N: u64 = 1 << 16;
pub const DEFAULT_REPLICAS: usize = 1000;
pub const DEFAULT_APPENDIX_SAMPLES: usize = 200_000;
/// Breakpoints of the `mark_*` columns.
pub const BREAKPOINTS: [f64; 3] = [0.0, 0.5, 1.0];

fn executor(cfg: &RunConfig) -> CliResult<RayonExecutor> {
    RayonExecutor::new(cfg.threads).map_err(CliError::Runtime)
}

fn parse_parts(list: &str) -> CliResult<Vec<SuitePart>> {
    let mut parts = Vec::new();
    for s in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let p = SuitePart::parse(s).ok_or_else(|| {
            let known: Vec<&str> = SuitePart::ALL.iter().map(|p| p.name()).collect();
            CliError::config(format!("unknown suite part `{s}`; known: acceptance, {}", known.join(", ")))
        })?;
        if !parts.contains(&p) {
            parts.push(p);
        }
    }
    if parts.is_empty() {
        return Err(CliError::config("--suite is empty"));
    }
    parts.sort();
    Ok(parts)
}

/// The suite a `verify` run executes.
///
/// `--suite acceptance` is the full suite. A regime alone selects the checks
/// for that regime; a part list restricts either of them.
pub fn suite_config(cfg: &RunConfig) -> CliResult<SuiteConfig> {
    let spec = cfg.regime_spec()?;
    let mut sc = match (cfg.suite.as_deref(), spec) {
        (Some("acceptance" | "full"), _) => {
            let mut c = SuiteConfig::full(cfg.seed);
            if cfg.n_ladder.is_some() || cfg.n.is_some() {
                c.ladder = cfg.ladder()?;
            }
            if let Some(m) = cfg.replicas {
                c.ladder_replicas = m;
            }
            c
        }
        (list, Some(spec)) => {
            let mut c =
                SuiteConfig::for_regime(spec, cfg.ladder()?, cfg.replicas.unwrap_or(DEFAULT_REPLICAS), cfg.seed);
            if let Some(list) = list {
                c.parts = parse_parts(list)?;
            }
            c
        }
        (Some(list), None) => {
            let mut c = SuiteConfig::full(cfg.seed);
            c.parts = parse_parts(list)?;
            if let Some(a) = cfg.alpha {
                c.appendix_alphas = vec![a];
            }
            if cfg.n_ladder.is_some() || cfg.n.is_some() {
                c.ladder = cfg.ladder()?;
            }
            if let Some(m) = cfg.replicas {
                c.ladder_replicas = m;
            }
            c
        }
        (None, None) => return Err(CliError::config("verify needs --regime and --alpha, or --suite")),
    };
    sc.epsilon = cfg.epsilon;
    sc.thresholds = cfg.thresholds;
    sc.validate().map_err(|e| CliError::config(e.to_string()))?;
    Ok(sc)
}

fn run(command: &str, cfg: &RunConfig, sc: SuiteConfig, progress: impl FnMut(&str)) -> CliResult<Report> {
    let exec = executor(cfg)?;
    let results = run_suite(&sc, &exec, progress)?;
    Ok(Report::new(command, cfg.config_json()?, Some(sc), results))
}

/// Runs the selected suite.
pub fn verify(cfg: &RunConfig, progress: impl FnMut(&str)) -> CliResult<Report> {
    let sc = suite_config(cfg)?;
    run("verify", cfg, sc, progress)
}

/// The moment suite alone, at `--alpha`.
pub fn moments(cfg: &RunConfig, samples: Option<usize>, progress: impl FnMut(&str)) -> CliResult<Report> {
    let alpha = cfg.alpha.ok_or_else(|| CliError::config("moments needs --alpha"))?;
    let mut sc = SuiteConfig::full(cfg.seed);
    sc.parts = vec![SuitePart::Appendix];
    sc.appendix_alphas = vec![alpha];
    sc.appendix_samples = samples.unwrap_or(DEFAULT_APPENDIX_SAMPLES);
    sc.thresholds = cfg.thresholds;
    if sc.appendix_samples < 2 {
        return Err(CliError::config("--samples must be at least 2"));
    }
    run("moments", cfg, sc, progress)
}

/// Null calibration of the one-sample CF-distance coefficient for
/// S_α(1, β, 0) at M = `--replicas`. Passes when the configured `ecf_coef`
/// covers the requested quantile.
pub fn calibrate(cfg: &RunConfig, trials: usize, quantile: f64) -> CliResult<Report> {
    let alpha = cfg.alpha.ok_or_else(|| CliError::config("calibrate needs --alpha"))?;
    let beta = cfg.beta.unwrap_or(0.0);
    let m = cfg.replicas.unwrap_or(4000);
    let target = StableParams::new(alpha, 1.0, beta, 0.0).map_err(|e| CliError::config(e.to_string()))?;
    if trials == 0 || !(quantile > 0.0 && quantile < 1.0) {
        return Err(CliError::config("calibrate needs --trials >= 1 and --quantile in (0, 1)"));
    }
    let exec = executor(cfg)?;
    let coef = calibrate_ecf_coef(&target, m, trials, quantile, cfg.seed, &exec)?;
    let meta = Metadata::default()
        .with_alpha(alpha)
        .with_beta(beta)
        .with_replicas(m)
        .with_seed(cfg.seed)
        .val("trials", trials as f64)
        .val("quantile", quantile);
    let r =
        TestResult::new(format!("calibrated_ecf_coef/alpha={alpha}/beta={beta}"), coef, cfg.thresholds.ecf_coef, meta);
    Ok(Report::new("calibrate", cfg.config_json()?, None, vec![r]))
}

/// What `simulate` prints.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulateSummary {
    pub label: String,
    pub n: u64,
    pub replicas: usize,
    pub seed: u64,
    pub vs_edge: u32,
    pub s_edge: u32,
    pub m_edge: u32,
    pub k_max: u32,
    pub epsilon: f64,
    pub truncated_mass: f64,
    pub w1_median: f64,
    pub large_frequency: f64,
    /// (B_n, B_n / (n (log₂ n)^{1−1/α})) for the skewed α > 1 regime.
    pub bn: Option<(f64, f64)>,
}

impl fmt::Display for SimulateSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "regime       {}", self.label)?;
        writeln!(f, "n            {}", self.n)?;
        writeln!(f, "replicas     {}", self.replicas)?;
        writeln!(f, "seed         {}", self.seed)?;
        writeln!(
            f,
            "bands        VS 1..={}  LS {}..={}  M {}..={}  L {}..={}",
            self.vs_edge.min(self.s_edge),
            self.vs_edge.min(self.s_edge) + 1,
            self.s_edge,
            self.s_edge + 1,
            self.m_edge,
            self.m_edge + 1,
            self.k_max
        )?;
        writeln!(
            f,
            "k_max        {} (epsilon {}, truncated mass {:.3e})",
            self.k_max, self.epsilon, self.truncated_mass
        )?;
        writeln!(f, "median W(1)  {:.6}", self.w1_median)?;
        write!(f, "P(W^L != 0)  {:.4}", self.large_frequency)?;
        if let Some((b, ratio)) = self.bn {
            write!(f, "\nB_n          {b:.6e} (B_n / (n (log2 n)^(1-1/alpha)) = {ratio:.6})")?;
        }
        Ok(())
    }
}

/// Simulates M replicas, writes the ensemble CSV (to `--out` or stdout)
/// and, with `--paths-out`, the path CSV.
pub fn simulate(cfg: &RunConfig) -> CliResult<SimulateSummary> {
    let spec = cfg.require_regime("simulate")?;
    let n = cfg.n.unwrap_or(DEFAULT_N);
    let replicas = cfg.replicas.unwrap_or(DEFAULT_REPLICAS);
    let mut cc = CocycleConfig::new(spec.regime, spec.alpha, n).map_err(|e| CliError::config(e.to_string()))?;
    cc.epsilon = cfg.epsilon;
    let model = CocycleModel::new(cc).map_err(|e| CliError::config(e.to_string()))?;
    let exec = executor(cfg)?;
    let seed = ensemble_seed(cfg.seed, &spec, n);
    let ens = ensemble_run(&model, replicas, seed, &BREAKPOINTS, cfg.paths_out.is_some(), &exec)?;

    let config = cfg.config_json()?;
    let mut w = report::sink(cfg.out.as_deref())?;
    report::write_ensemble_csv(&mut w, &ens, cfg.seed, &config)?;
    w.flush()?;
    if let (Some(p), Some(paths)) = (&cfg.paths_out, &ens.paths) {
        let mut w = report::sink(Some(p))?;
        report::write_paths_csv(&mut w, paths, cfg.seed, &config)?;
        w.flush()?;
    }

    let bn = match spec.regime {
        Regime::SkewedSuper1 { .. } => {
            let r = centering_bn(n, spec.alpha, MomentMethod::Quadrature, &NumericConfig::default())?;
            Some((r.value, r.log_rate_ratio))
        }
        _ => None,
    };
    let b = &model.bands;
    let (w1_median, _) = median_with_se(&ens.w1())?;
    let large = ens.replicas.iter().filter(|r| r.large_nonzero).count() as f64 / replicas as f64;
    Ok(SimulateSummary {
        label: spec.label(),
        n,
        replicas,
        seed: cfg.seed,
        vs_edge: b.vs_edge,
        s_edge: b.s_edge,
        m_edge: b.m_edge,
        k_max: b.k_max,
        epsilon: b.epsilon,
        truncated_mass: b.truncated_mass,
        w1_median,
        large_frequency: large,
        bn,
    })
}

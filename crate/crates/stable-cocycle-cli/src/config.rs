//! Run configuration: an optional TOML file overridden by flags, validated
//! before any work starts.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use stable_cocycle::cocycle::Regime;
use stable_cocycle::verify::suite::RegimeSpec;
use stable_cocycle::verify::Thresholds;

use crate::{CliError, CliResult};

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_EPSILON: f64 = 1e-3;
pub const DEFAULT_LADDER: [u64; 3] = [1 << 8, 1 << 12, 1 << 16];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum RegimeName {
    Sub1,
    Sym,
    Super1,
}

/// Flags shared by every subcommand. Each one overrides the same key in
/// `--config`.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// TOML file with any of the keys below (kebab-case) plus a
    /// [thresholds] table.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub regime: Option<RegimeName>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Skewness; defaults to 1 for sub1 and super1, must be 0 for sym.
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub n: Option<u64>,
    /// Comma-separated, strictly increasing.
    #[arg(long, value_delimiter = ',')]
    pub n_ladder: Option<Vec<u64>>,
    #[arg(long)]
    pub replicas: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Truncation level for the top rows.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Worker threads (0 = one per core). Results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub paths_out: Option<PathBuf>,
    /// Per-rung ladder statistics as CSV (verify only).
    #[arg(long, value_name = "FILE")]
    pub trend_out: Option<PathBuf>,
    /// `acceptance`, or a comma-separated list of parts: sampler, cdf,
    /// exact, array, closed_form, equal_distribution, bands, fclt,
    /// increments, appendix, centering.
    #[arg(long)]
    pub suite: Option<String>,
    /// Threshold override, e.g. `fclt_cap=0.08`. Repeatable.
    #[arg(long = "threshold", value_name = "KEY=VALUE")]
    pub thresholds: Vec<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct ConfigFile {
    regime: Option<RegimeName>,
    alpha: Option<f64>,
    beta: Option<f64>,
    n: Option<u64>,
    n_ladder: Option<Vec<u64>>,
    replicas: Option<usize>,
    seed: Option<u64>,
    epsilon: Option<f64>,
    threads: Option<usize>,
    out: Option<PathBuf>,
    paths_out: Option<PathBuf>,
    trend_out: Option<PathBuf>,
    suite: Option<String>,
    #[serde(default)]
    thresholds: BTreeMap<String, f64>,
}

/// The resolved configuration. Serialized into every report; thread count
/// and output paths are left out so that reports compare byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub regime: Option<RegimeName>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub n: Option<u64>,
    pub n_ladder: Option<Vec<u64>>,
    pub replicas: Option<usize>,
    pub seed: u64,
    pub epsilon: f64,
    pub suite: Option<String>,
    pub thresholds: Thresholds,
    #[serde(skip)]
    pub threads: usize,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub paths_out: Option<PathBuf>,
    #[serde(skip)]
    pub trend_out: Option<PathBuf>,
}

fn read_file(path: &Path) -> CliResult<ConfigFile> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read config file {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::config(format!("config file {}: {e}", path.display())))
}

fn apply_thresholds(base: Thresholds, overrides: &BTreeMap<String, f64>) -> CliResult<Thresholds> {
    let mut v = serde_json::to_value(base)?;
    let map = v.as_object_mut().expect("thresholds serialize to an object");
    for (k, x) in overrides {
        if !map.contains_key(k) {
            let known: Vec<&str> = map.keys().map(|s| s.as_str()).collect();
            return Err(CliError::config(format!("unknown threshold `{k}`; known: {}", known.join(", "))));
        }
        if !x.is_finite() {
            return Err(CliError::config(format!("threshold `{k}` must be finite")));
        }
        map.insert(k.clone(), serde_json::json!(x));
    }
    Ok(serde_json::from_value(v)?)
}

fn parse_override(s: &str) -> CliResult<(String, f64)> {
    let (k, v) =
        s.split_once('=').ok_or_else(|| CliError::config(format!("--threshold expects KEY=VALUE, got `{s}`")))?;
    let x = v.trim().parse::<f64>().map_err(|_| CliError::config(format!("--threshold {k}: `{v}` is not a number")))?;
    Ok((k.trim().to_string(), x))
}

impl RunConfig {
    /// Merges the file (if any) with the flags and validates the result.
    pub fn resolve(args: &RunArgs) -> CliResult<Self> {
        let file = match &args.config {
            Some(p) => read_file(p)?,
            None => ConfigFile::default(),
        };
        let mut overrides = file.thresholds;
        for s in &args.thresholds {
            let (k, x) = parse_override(s)?;
            overrides.insert(k, x);
        }
        let cfg = RunConfig {
            regime: args.regime.or(file.regime),
            alpha: args.alpha.or(file.alpha),
            beta: args.beta.or(file.beta),
            n: args.n.or(file.n),
            n_ladder: args.n_ladder.clone().or(file.n_ladder),
            replicas: args.replicas.or(file.replicas),
            seed: args.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            epsilon: args.epsilon.or(file.epsilon).unwrap_or(DEFAULT_EPSILON),
            suite: args.suite.clone().or(file.suite),
            thresholds: apply_thresholds(Thresholds::default(), &overrides)?,
            threads: args.threads.or(file.threads).unwrap_or(0),
            out: args.out.clone().or(file.out),
            paths_out: args.paths_out.clone().or(file.paths_out),
            trend_out: args.trend_out.clone().or(file.trend_out),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> CliResult<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(CliError::config(format!("--epsilon must lie in (0, 1), got {}", self.epsilon)));
        }
        if self.replicas == Some(0) {
            return Err(CliError::config("--replicas must be at least 1"));
        }
        if self.n == Some(0) {
            return Err(CliError::config("--n must be at least 1"));
        }
        if let Some(a) = self.alpha {
            if !(a > 0.0 && a <= 2.0) {
                return Err(CliError::config(format!("--alpha must lie in (0, 2], got {a}")));
            }
        }
        if self.regime.is_some() {
            self.regime_spec()?;
        } else if self.beta.is_some() {
            return Err(CliError::config("--beta needs --regime"));
        }
        if self.n_ladder.is_some() {
            self.ladder()?;
        }
        Ok(())
    }

    /// The regime with its α and β, if a regime was given.
    pub fn regime_spec(&self) -> CliResult<Option<RegimeSpec>> {
        let Some(name) = self.regime else { return Ok(None) };
        let alpha = self.alpha.ok_or_else(|| CliError::config("--regime needs --alpha"))?;
        let regime = match name {
            RegimeName::Sub1 => Regime::SkewedSub1 { beta: self.beta.unwrap_or(1.0) },
            RegimeName::Super1 => Regime::SkewedSuper1 { beta: self.beta.unwrap_or(1.0) },
            RegimeName::Sym => {
                if let Some(b) = self.beta.filter(|b| *b != 0.0) {
                    return Err(CliError::config(format!("regime sym is symmetric; drop --beta {b}")));
                }
                Regime::Symmetric
            }
        };
        regime.validate(alpha).map_err(|e| {
            let hint = match name {
                RegimeName::Super1 if alpha == 1.0 => {
                    "; the skewed coboundary is undefined at alpha = 1, use sym for alpha = 1"
                }
                _ => "",
            };
            CliError::config(format!("{e}{hint}"))
        })?;
        Ok(Some(RegimeSpec { regime, alpha }))
    }

    /// The regime, which the caller requires.
    pub fn require_regime(&self, what: &str) -> CliResult<RegimeSpec> {
        self.regime_spec()?.ok_or_else(|| CliError::config(format!("{what} needs --regime and --alpha")))
    }

    /// The n-ladder: `--n-ladder`, else {n/256, n/16, n} from `--n`, else
    /// {2^8, 2^12, 2^16}.
    pub fn ladder(&self) -> CliResult<Vec<u64>> {
        let ladder = match (&self.n_ladder, self.n) {
            (Some(l), _) => l.clone(),
            (None, Some(n)) => {
                let mut l: Vec<u64> = [n >> 8, n >> 4, n].into_iter().filter(|x| *x >= 2).collect();
                l.dedup();
                l
            }
            (None, None) => DEFAULT_LADDER.to_vec(),
        };
        if ladder.len() < 2 {
            return Err(CliError::config("the n-ladder needs at least two values; pass --n-ladder"));
        }
        if ladder.windows(2).any(|w| w[0] >= w[1]) || ladder[0] == 0 {
            return Err(CliError::config(format!(
                "the n-ladder must be positive and strictly increasing, got {ladder:?}"
            )));
        }
        Ok(ladder)
    }

    pub fn config_json(&self) -> CliResult<serde_json::Value> {
        Ok(serde_json::to_value(self)?)
    }
}

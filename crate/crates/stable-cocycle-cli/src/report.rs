//! JSON reports and CSV dumps.
//!
//! CSV files start with `# ` comment lines carrying the artifact version,
//! the command, the seed and the configuration as JSON, followed by a
//! header row.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use stable_cocycle::process::{Ensemble, PathGrid};
use stable_cocycle::verify::suite::SuiteConfig;
use stable_cocycle::verify::TestResult;
use stable_cocycle::VERSION;

use crate::CliResult;

/// Bumped whenever a field of [`Report`] changes meaning or disappears.
pub const SCHEMA_VERSION: u32 = 1;

/// Most points written per path in the path CSV.
pub const PATH_POINTS: u64 = 1024;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub diagnostics: usize,
    pub not_applicable: usize,
    /// No gating failure.
    pub all_pass: bool,
}

impl Summary {
    pub fn of(results: &[TestResult]) -> Self {
        let mut s = Summary { total: results.len(), ..Default::default() };
        for r in results {
            if r.diagnostic {
                s.diagnostics += 1;
            } else if !r.applicable {
                s.not_applicable += 1;
            } else if r.pass {
                s.passed += 1;
            } else {
                s.failed += 1;
            }
        }
        s.all_pass = !results.iter().any(|r| r.gating_failure());
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub version: String,
    pub command: String,
    pub config: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suite: Option<SuiteConfig>,
    pub results: Vec<TestResult>,
    pub summary: Summary,
}

impl Report {
    pub fn new(command: &str, config: serde_json::Value, suite: Option<SuiteConfig>, results: Vec<TestResult>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            version: VERSION.to_string(),
            command: command.to_string(),
            config,
            suite,
            summary: Summary::of(&results),
            results,
        }
    }

    pub fn to_json(&self) -> CliResult<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn result(&self, name: &str) -> Option<&TestResult> {
        self.results.iter().find(|r| r.name == name)
    }
}

/// A file, or stdout when no path is given.
pub fn sink(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

pub fn write_json(report: &Report, path: Option<&Path>) -> CliResult<()> {
    let mut w = sink(path)?;
    w.write_all(report.to_json()?.as_bytes())?;
    w.flush()?;
    Ok(())
}

fn write_preamble(w: &mut dyn Write, command: &str, seed: u64, config: &serde_json::Value) -> CliResult<()> {
    writeln!(w, "# stable-cocycle {VERSION}")?;
    writeln!(w, "# command: {command}")?;
    writeln!(w, "# seed: {seed}")?;
    writeln!(w, "# config: {}", serde_json::to_string(config)?)?;
    Ok(())
}

/// Columns of the ensemble CSV.
pub const ENSEMBLE_COLUMNS: &str = "replica, w1, sup_total, sup_small, sup_vs, sup_ls, sup_middle, sup_large, \
l_nonzero, middle_direct, mark_0 .. mark_k";

/// One row per replica.
pub fn write_ensemble_csv(
    w: &mut dyn Write,
    ensemble: &Ensemble,
    seed: u64,
    config: &serde_json::Value,
) -> CliResult<()> {
    write_preamble(w, "simulate", seed, config)?;
    writeln!(w, "# breakpoints: {:?}", ensemble.breakpoints)?;
    let mut c = csv::Writer::from_writer(w);
    let mut head: Vec<String> = [
        "replica",
        "w1",
        "sup_total",
        "sup_small",
        "sup_vs",
        "sup_ls",
        "sup_middle",
        "sup_large",
        "l_nonzero",
        "middle_direct",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    head.extend((0..ensemble.breakpoints.len()).map(|i| format!("mark_{i}")));
    c.write_record(&head)?;
    for r in &ensemble.replicas {
        let mut row = vec![
            r.replica.to_string(),
            r.w1.to_string(),
            r.sup_total.to_string(),
            r.sup_small.to_string(),
            r.sup_vs.to_string(),
            r.sup_ls.to_string(),
            r.sup_middle.to_string(),
            r.sup_large.to_string(),
            u8::from(r.large_nonzero).to_string(),
            r.middle_direct.to_string(),
        ];
        row.extend(r.marks.iter().map(|m| m.to_string()));
        c.write_record(&row)?;
    }
    c.flush()?;
    Ok(())
}

/// Columns of the path CSV.
pub const PATH_COLUMNS: &str = "replica, j, t, value";

/// W_n(t) at t = j/n on every `⌈n/1024⌉`-th grid point plus t = 1.
pub fn write_paths_csv(w: &mut dyn Write, paths: &[PathGrid], seed: u64, config: &serde_json::Value) -> CliResult<()> {
    write_preamble(w, "simulate", seed, config)?;
    let mut c = csv::Writer::from_writer(w);
    c.write_record(["replica", "j", "t", "value"])?;
    for (r, p) in paths.iter().enumerate() {
        let n = p.n;
        let stride = n.div_ceil(PATH_POINTS).max(1);
        let mut js: Vec<u64> = (0..=n).step_by(stride as usize).collect();
        if js.last() != Some(&n) {
            js.push(n);
        }
        for j in js {
            let t = j as f64 / n as f64;
            c.write_record([r.to_string(), j.to_string(), t.to_string(), p.at(t).to_string()])?;
        }
    }
    c.flush()?;
    Ok(())
}

/// Columns of the trend CSV.
pub const TREND_COLUMNS: &str = "test, n, value, std_error";

/// Every ladder point of every result that carries one.
pub fn write_trend_csv(w: &mut dyn Write, report: &Report) -> CliResult<()> {
    let seed = report.config.get("seed").and_then(|s| s.as_u64()).unwrap_or_default();
    write_preamble(w, &report.command, seed, &report.config)?;
    let mut c = csv::Writer::from_writer(w);
    c.write_record(["test", "n", "value", "std_error"])?;
    for r in &report.results {
        for p in &r.trend {
            c.write_record([r.name.clone(), p.n.to_string(), p.value.to_string(), p.std_error.to_string()])?;
        }
    }
    c.flush()?;
    Ok(())
}

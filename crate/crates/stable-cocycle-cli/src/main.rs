use std::io::Write as _;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use stable_cocycle_cli::commands;
use stable_cocycle_cli::report::{self, Report};
use stable_cocycle_cli::{exit, CliResult, RunArgs, RunConfig};

const AFTER_HELP: &str = "\
Exit codes: 0 all checks pass, 1 a check failed, 2 configuration error, 3 runtime or numerical error.

CSV files begin with `# ` lines giving the version, command, seed and configuration (JSON), then a header row.
  simulate --out:       replica, w1, sup_total, sup_small, sup_vs, sup_ls, sup_middle, sup_large, l_nonzero,
                        middle_direct, mark_0 .. mark_k
                        (path functionals scaled by n^(-1/alpha); marks are W at t = 0, 0.5, 1;
                        l_nonzero is 1 when the large band moved the path)
  simulate --paths-out: replica, j, t, value (W at t = j/n, at most 1025 points per replica)
  verify --trend-out:   test, n, value, std_error (one row per ladder rung)";

#[derive(Parser)]
#[command(name = "stable-cocycle", version, about = "Simulate stable cocycles and check their partial-sum processes", after_help = AFTER_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate M replicas at one n; write path functionals as CSV.
    #[command(after_help = AFTER_HELP)]
    Simulate {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run a verification suite; write a JSON report.
    #[command(after_help = AFTER_HELP)]
    Verify {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run the truncated-moment suite at --alpha.
    #[command(after_help = AFTER_HELP)]
    Moments {
        #[command(flatten)]
        run: RunArgs,
        /// Monte Carlo draws per moment estimate.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Null quantile of √M times the CF distance for S_alpha(1, beta, 0).
    #[command(after_help = AFTER_HELP)]
    Calibrate {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 0.95)]
        quantile: f64,
    },
}

fn progress(start: Instant) -> impl FnMut(&str) {
    move |what| eprintln!("[{:8.1}s] {what}", start.elapsed().as_secs_f64())
}

fn finish(report: &Report, cfg: &RunConfig) -> CliResult<i32> {
    report::write_json(report, cfg.out.as_deref())?;
    if let Some(p) = &cfg.trend_out {
        let mut w = report::sink(Some(p))?;
        report::write_trend_csv(&mut w, report)?;
        w.flush()?;
    }
    for r in report.results.iter().filter(|r| r.gating_failure()) {
        eprintln!("FAIL {} (statistic {:.4e}, threshold {:.4e})", r.name, r.statistic, r.threshold);
    }
    let s = &report.summary;
    eprintln!(
        "{} checks: {} passed, {} failed, {} diagnostic, {} not applicable",
        s.total, s.passed, s.failed, s.diagnostics, s.not_applicable
    );
    Ok(if s.all_pass { exit::PASS } else { exit::FAIL })
}

fn dispatch(cli: Cli) -> CliResult<i32> {
    let start = Instant::now();
    match cli.command {
        Command::Simulate { run } => {
            let cfg = RunConfig::resolve(&run)?;
            let summary = commands::simulate(&cfg)?;
            if cfg.out.is_some() {
                println!("{summary}");
            } else {
                eprintln!("{summary}");
            }
            Ok(exit::PASS)
        }
        Command::Verify { run } => {
            let cfg = RunConfig::resolve(&run)?;
            let report = commands::verify(&cfg, progress(start))?;
            finish(&report, &cfg)
        }
        Command::Moments { run, samples } => {
            let cfg = RunConfig::resolve(&run)?;
            let report = commands::moments(&cfg, samples, progress(start))?;
            finish(&report, &cfg)
        }
        Command::Calibrate { run, trials, quantile } => {
            let cfg = RunConfig::resolve(&run)?;
            let report = commands::calibrate(&cfg, trials, quantile)?;
            finish(&report, &cfg)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match dispatch(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}

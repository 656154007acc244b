//! Command-line interface for the outer-function laboratory.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

use outerlab::commands::{eval_csv, eval_points, fit_profile, parse_profile_csv};
use outerlab::config::SuiteConfig;
use outerlab::error::{LabError, LabResult, EXIT_CONFIG, EXIT_OK};
use outerlab::points::parse_point;
use outerlab::report::{fmt_sig, profile_csv, report_json, summary_csv, Outcome, ProfileRow};
use outerlab::scenario::{measure_profile, run_scenario, run_suite, suite_exit_code};

#[derive(Parser)]
#[command(
    name = "outerlab",
    version,
    about = "Numerical laboratory for outer functions on the disc and the \
             unit ball: boundary smoothness measurements and exponent checks"
)]
struct Cli {
    /// Suite file, or builtin:default / builtin:negative-control.
    #[arg(long, global = true)]
    config: Option<String>,
    /// Overrides the suite seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for reports; stdout only when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Stdout format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Worker threads for suite runs; affects speed only, never results.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate the scenario's function at interior points.
    Eval {
        /// Scenario name; defaults to the first in the config.
        #[arg(long)]
        scenario: Option<String>,
        /// Points: comma-separated coordinates, each "a", "bi" or "a+bi".
        #[arg(required = true)]
        points: Vec<String>,
    },
    /// Measure one oscillation profile (radius, nu, standard error).
    Oscillation {
        #[arg(long)]
        scenario: Option<String>,
    },
    /// Fit a decay exponent to a stored profile CSV.
    Fit {
        #[arg(long)]
        input: PathBuf,
    },
    /// Run one scenario and report its verdict.
    Verify {
        #[arg(long)]
        scenario: Option<String>,
    },
    /// Run every scenario in the config.
    Suite,
    /// Run the kernel difference stability check scenario.
    KernelCheck {
        #[arg(long)]
        scenario: Option<String>,
    },
    /// Run the slice finiteness scan scenario.
    SliceCheck {
        #[arg(long)]
        scenario: Option<String>,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_CONFIG,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> LabResult<i32> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| LabError::runtime(format!("thread pool: {e}")))?;
    }
    let cfg = SuiteConfig::load(cli.config.as_deref())?;
    let seed = cli.seed.unwrap_or(cfg.suite.seed);

    match &cli.cmd {
        Cmd::Suite => {
            let outcomes = run_suite(&cfg, cli.seed);
            emit_suite(&cli, &cfg, &outcomes)?;
            Ok(suite_exit_code(&outcomes))
        }
        Cmd::Verify { scenario } => {
            let s = pick_scenario(&cfg, scenario.as_deref(), None)?;
            let report = run_scenario(s, seed, cfg.suite.tolerance)?;
            let outcome = [Outcome::Done(Box::new(report))];
            emit_suite(&cli, &cfg, &outcome)?;
            Ok(suite_exit_code(&outcome))
        }
        Cmd::KernelCheck { scenario } => {
            let s = pick_scenario(&cfg, scenario.as_deref(), Some("L2.2-kernel"))?;
            let report = run_scenario(s, seed, cfg.suite.tolerance)?;
            let outcome = [Outcome::Done(Box::new(report))];
            emit_suite(&cli, &cfg, &outcome)?;
            Ok(suite_exit_code(&outcome))
        }
        Cmd::SliceCheck { scenario } => {
            let s = pick_scenario(&cfg, scenario.as_deref(), Some("slice-B0"))?;
            let report = run_scenario(s, seed, cfg.suite.tolerance)?;
            let outcome = [Outcome::Done(Box::new(report))];
            emit_suite(&cli, &cfg, &outcome)?;
            Ok(suite_exit_code(&outcome))
        }
        Cmd::Oscillation { scenario } => {
            let s = pick_scenario(&cfg, scenario.as_deref(), None)?;
            let sampler = outerlab_core::sampler::Sampler::new(
                seed,
                outerlab::scenario::scenario_stream(&s.name),
            );
            let mut diag = outerlab::report::Diagnostics::default();
            let profile = measure_profile(s, &sampler, &mut diag)?;
            let rows: Vec<ProfileRow> = profile
                .iter()
                .map(|e| ProfileRow {
                    radius: e.radius,
                    nu: e.nu,
                    standard_error: e.standard_error,
                    sample_count: e.sample_count,
                    fallback_pivot: e.fallback,
                })
                .collect();
            let text = match cli.format {
                Format::Csv => profile_csv(&rows),
                Format::Json => serde_json::to_string_pretty(&rows)
                    .map_err(|e| LabError::runtime(e.to_string()))?,
            };
            write_or_print(&cli.out, &format!("{}-profile.csv", s.name), &text)?;
            Ok(EXIT_OK)
        }
        Cmd::Fit { input } => {
            let text = std::fs::read_to_string(input)
                .map_err(|e| LabError::config(format!("{}: {e}", input.display())))?;
            let rows = parse_profile_csv(&text)?;
            let (fit, fd) = fit_profile(&rows)?;
            let out = match cli.format {
                Format::Csv => format!(
                    "slope,intercept,r_squared,halfwidth,used_scales,dropped\n{},{},{},{},{},{}\n",
                    fmt_sig(fit.slope),
                    fmt_sig(fit.intercept),
                    fmt_sig(fit.r_squared),
                    fmt_sig(fit.confidence_halfwidth),
                    fd.used,
                    fd.dropped.len()
                ),
                Format::Json => serde_json::json!({
                    "slope": fit.slope,
                    "intercept": fit.intercept,
                    "r_squared": fit.r_squared,
                    "halfwidth": fit.confidence_halfwidth,
                    "used_scales": fd.used,
                    "dropped_scales": fd.dropped,
                })
                .to_string(),
            };
            print!("{out}");
            Ok(EXIT_OK)
        }
        Cmd::Eval { scenario, points } => {
            let s = pick_scenario(&cfg, scenario.as_deref(), None)?;
            let parsed: LabResult<Vec<Vec<outerlab_core::C64>>> = points
                .iter()
                .map(|p| parse_point(p, s.dimension))
                .collect();
            let rows = eval_points(s, seed, &parsed?)?;
            let text = match cli.format {
                Format::Csv => eval_csv(&rows),
                Format::Json => serde_json::to_string_pretty(&rows)
                    .map_err(|e| LabError::runtime(e.to_string()))?,
            };
            write_or_print(&cli.out, &format!("{}-eval.csv", s.name), &text)?;
            Ok(EXIT_OK)
        }
    }
}

/// Named scenario, or the first one (optionally the first with a tag).
fn pick_scenario<'a>(
    cfg: &'a SuiteConfig,
    name: Option<&str>,
    tag: Option<&str>,
) -> LabResult<&'a outerlab::config::Scenario> {
    if let Some(name) = name {
        return cfg.scenario(name);
    }
    let found = match tag {
        Some(t) => cfg.scenarios.iter().find(|s| s.tag.as_str() == t),
        None => cfg.scenarios.first(),
    };
    found.ok_or_else(|| {
        LabError::config(match tag {
            Some(t) => format!("config has no scenario with tag {t}"),
            None => "config has no scenarios".to_string(),
        })
    })
}

/// Suite/verify output: CSV summary or JSON report list on stdout, plus
/// one JSON report per scenario and the summary when --out is given.
fn emit_suite(cli: &Cli, cfg: &SuiteConfig, outcomes: &[Outcome]) -> LabResult<()> {
    let summary = summary_csv(outcomes);
    match cli.format {
        Format::Csv => print!("{summary}"),
        Format::Json => {
            let mut blobs = Vec::new();
            for oc in outcomes {
                match oc {
                    Outcome::Done(r) => blobs.push(serde_json::to_value(r.as_ref()).unwrap()),
                    Outcome::Failed(f) => blobs.push(serde_json::to_value(f).unwrap()),
                }
            }
            println!("{}", serde_json::to_string_pretty(&blobs).unwrap());
        }
    }
    if let Some(dir) = &cli.out {
        std::fs::create_dir_all(dir)?;
        write_file(&dir.join("summary.csv"), &summary)?;
        for oc in outcomes {
            if let Outcome::Done(r) = oc {
                write_file(
                    &dir.join(format!("{}.json", r.scenario.name)),
                    &report_json(r),
                )?;
            }
        }
        let _ = cfg; // config already echoed inside each report
    }
    Ok(())
}

fn write_or_print(out: &Option<PathBuf>, filename: &str, text: &str) -> LabResult<()> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            write_file(&dir.join(filename), text)
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_file(path: &Path, text: &str) -> LabResult<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(text.as_bytes())?;
    Ok(())
}

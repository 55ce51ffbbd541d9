use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use target_enclosing::io::{apply_overrides, load_scenario, write_metrics, write_trace, Override};
use target_enclosing::sim::{
    run_batch_with, run_scenario, sample_configs, BatchSummary, Perturbation, RunSummary,
    ScenarioConfig, Termination,
};
use target_enclosing::verify::Suite;
use target_enclosing::Error;

const OK: u8 = 0;
const CONFIG: u8 = 1;
const SAFETY: u8 = 2;

/// Barrier-Lyapunov target-enclosing guidance simulator.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one engagement and write its trace and metrics.
    ///
    /// Exit status: 0 on completion, 2 on a safety abort (partial outputs are
    /// written), 1 on a configuration error (nothing is written).
    Run {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Trace CSV [default: output.trace, else NAME.csv]
        #[arg(long)]
        out: Option<PathBuf>,
        /// Metrics JSON [default: output.metrics, else NAME.json]
        #[arg(long)]
        metrics: Option<PathBuf>,
    },
    /// Run a parameter grid or a Monte Carlo batch.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// `key=v1,v2,...`; repeat for a cartesian product.
        #[arg(long, conflicts_with = "mc", required_unless_present = "mc")]
        grid: Vec<String>,
        /// Number of Monte Carlo runs.
        #[arg(long)]
        mc: Option<usize>,
        /// Monte Carlo seed [default: the scenario's seed]
        #[arg(long, requires = "mc")]
        seed: Option<u64>,
        /// Initial-condition perturbation: none, barrier or geometry.
        #[arg(long, default_value = "none", requires = "mc")]
        perturb: String,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run verification suites and print one line per criterion.
    Verify {
        /// speed, barrier, bounds, lyapunov, allocation, equivalence or all.
        #[arg(long, default_value = "all")]
        suite: String,
    },
}

#[derive(Args)]
struct ScenarioArgs {
    /// Config file, or a bundled scenario name (st, cvt, mt).
    #[arg(long)]
    scenario: String,
    /// Override a config key, e.g. `--set guidance.k_1=0.016`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<Override>,
}

impl ScenarioArgs {
    fn load(&self) -> Result<ScenarioConfig, Error> {
        load_scenario(&self.scenario, &self.overrides)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.cmd {
        Cmd::Run {
            scenario,
            out,
            metrics,
        } => cmd_run(&scenario, out, metrics),
        Cmd::Sweep {
            scenario,
            grid,
            mc,
            seed,
            perturb,
            out,
        } => cmd_sweep(&scenario, &grid, mc, seed, &perturb, &out),
        Cmd::Verify { suite } => cmd_verify(&suite),
    };
    ExitCode::from(code)
}

fn fail(e: &Error) -> u8 {
    eprintln!("error: {e}");
    if e.is_safety() {
        SAFETY
    } else {
        CONFIG
    }
}

fn cmd_run(args: &ScenarioArgs, out: Option<PathBuf>, metrics: Option<PathBuf>) -> u8 {
    let cfg = match args.load() {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    let trace_path = out
        .or_else(|| cfg.output.trace.clone())
        .unwrap_or_else(|| format!("{}.csv", cfg.name).into());
    let metrics_path = metrics
        .or_else(|| cfg.output.metrics.clone())
        .unwrap_or_else(|| format!("{}.json", cfg.name).into());

    let outcome = match run_scenario(&cfg) {
        Ok(o) => o,
        Err(e) => return fail(&e),
    };
    if let Err(e) = write_trace(&outcome.trace, &trace_path)
        .and_then(|_| write_metrics(&outcome.metrics, &metrics_path))
    {
        eprintln!("error: {e}");
        return CONFIG;
    }
    match &outcome.termination {
        Termination::Completed => {
            println!(
                "{}: completed, {} records, final eps {:.4} m",
                cfg.name,
                outcome.trace.len(),
                outcome.metrics.final_epsilon
            );
            OK
        }
        Termination::Aborted(r) => {
            eprintln!(
                "{}: safety abort at t = {:.3} s: {}",
                cfg.name, r.t, r.error
            );
            SAFETY
        }
    }
}

#[derive(Serialize)]
struct SweepEntry<'a> {
    name: &'a str,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    settings: Vec<String>,
    #[serde(flatten)]
    run: &'a RunSummary,
}

#[derive(Serialize)]
struct SweepSummary<'a> {
    scenario: &'a str,
    summary: BatchSummary,
    runs: Vec<SweepEntry<'a>>,
}

/// Expands `key=v1,v2` specs into one settings list per grid point.
fn expand_grid(specs: &[String]) -> Result<Vec<Vec<String>>, Error> {
    let mut points = vec![Vec::new()];
    for spec in specs {
        let (key, values) = spec
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("grid `{spec}` is not of the form key=v1,v2")))?;
        let values: Vec<&str> = values
            .split(',')
            .map(str::trim)
            .filter(|v| !v.is_empty())
            .collect();
        if values.is_empty() {
            return Err(Error::Config(format!("grid `{spec}` has no values")));
        }
        points = points
            .into_iter()
            .flat_map(|p| {
                values.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push(format!("{key}={v}"));
                    q
                })
            })
            .collect();
    }
    Ok(points)
}

fn sweep_configs(
    template: &ScenarioConfig,
    grid: &[String],
    mc: Option<usize>,
    seed: Option<u64>,
    perturb: &str,
) -> Result<(Vec<ScenarioConfig>, Vec<Vec<String>>), Error> {
    if let Some(n) = mc {
        let mut template = template.clone();
        if let Some(s) = seed {
            template.seed = s;
        }
        let pert = Perturbation::by_name(perturb, &template).ok_or_else(|| {
            Error::Config(format!(
                "unknown perturbation `{perturb}` (none, barrier, geometry)"
            ))
        })?;
        let configs = sample_configs(&template, n, &pert)?;
        return Ok((configs, vec![Vec::new(); n]));
    }
    if grid.is_empty() {
        return Err(Error::Config("empty grid".into()));
    }
    let points = expand_grid(grid)?;
    let configs = points
        .iter()
        .enumerate()
        .map(|(i, settings)| {
            let overrides = settings
                .iter()
                .map(|s| s.parse())
                .collect::<Result<Vec<Override>, _>>()?;
            let mut cfg = apply_overrides(template, &overrides)?;
            cfg.name = format!("{}-{i:04}", template.name);
            Ok(cfg)
        })
        .collect::<Result<Vec<_>, Error>>()?;
    Ok((configs, points))
}

fn cmd_sweep(
    args: &ScenarioArgs,
    grid: &[String],
    mc: Option<usize>,
    seed: Option<u64>,
    perturb: &str,
    out: &Path,
) -> u8 {
    let prepared = args.load().and_then(|template| {
        let (configs, settings) = sweep_configs(&template, grid, mc, seed, perturb)?;
        if configs.is_empty() {
            return Err(Error::Config("sweep has no runs".into()));
        }
        for c in &configs {
            c.validate()
                .map_err(|e| Error::Config(format!("{}: {e}", c.name)))?;
        }
        Ok((template, configs, settings))
    });
    let (template, configs, settings) = match prepared {
        Ok(p) => p,
        Err(e) => return fail(&e),
    };
    if let Err(e) = std::fs::create_dir_all(out) {
        eprintln!("error: {}: {e}", out.display());
        return CONFIG;
    }

    let runs = run_batch_with(&configs, |cfg, outcome| {
        write_trace(&outcome.trace, out.join(format!("{}.csv", cfg.name)))?;
        write_metrics(&outcome.metrics, out.join(format!("{}.json", cfg.name)))
    });
    let summary = SweepSummary {
        scenario: &template.name,
        summary: BatchSummary::from_runs(&runs, template.guidance.desired_range),
        runs: runs
            .iter()
            .zip(&configs)
            .zip(settings)
            .map(|((run, cfg), settings)| SweepEntry {
                name: &cfg.name,
                settings,
                run,
            })
            .collect(),
    };
    let path = out.join("summary.json");
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    if let Err(e) = std::fs::write(&path, json + "\n") {
        eprintln!("error: {}: {e}", path.display());
        return CONFIG;
    }

    let s = &summary.summary;
    println!(
        "{} runs: {} converged, {} aborted, {} errors, {} barrier violations -> {}",
        s.runs,
        s.converged,
        s.aborted,
        s.config_errors,
        s.barrier_violations,
        path.display()
    );
    for r in runs
        .iter()
        .filter(|r| r.error.is_some() || r.abort.is_some())
    {
        let why = r
            .error
            .as_deref()
            .or(r.abort.as_deref())
            .unwrap_or_default();
        eprintln!("{}: {why}", configs[r.index].name);
    }
    if s.config_errors > 0 {
        CONFIG
    } else if s.aborted > 0 {
        SAFETY
    } else {
        OK
    }
}

fn cmd_verify(suite: &str) -> u8 {
    let suites: Vec<Suite> = if suite == "all" {
        Suite::ALL.to_vec()
    } else if let Some(s) = Suite::from_name(suite) {
        vec![s]
    } else {
        let names: Vec<&str> = Suite::ALL.iter().map(|s| s.name()).collect();
        eprintln!(
            "error: unknown suite `{suite}`; available: {}, all",
            names.join(", ")
        );
        return CONFIG;
    };
    let mut failed = Vec::new();
    for s in suites {
        match s.run() {
            Ok(results) => {
                for r in results {
                    println!("{r}");
                    if r.gating && !r.passed {
                        failed.push(r.name);
                    }
                }
            }
            Err(e) => {
                println!("FAIL {}: {e}", s.name());
                failed.push(s.name().to_owned());
            }
        }
    }
    if failed.is_empty() {
        OK
    } else {
        eprintln!("failed criteria: {}", failed.join("; "));
        1
    }
}

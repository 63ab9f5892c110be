//! `kdt`: run kinetic Delaunay simulations, oracle checks and experiments.
//!
//! Scenes and configs are JSON files with rationals written as `"num/den"`.
//! `KDT_PRECISION` overrides the root isolation precision in bits.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use kdt_core::experiments::{clarkson_shor_experiment, emit_plots, evaluate_scene, run_batch, RunConfig};
use kdt_core::motion::rational_serde;
use kdt_core::oracle::{census_to_jsonl, enumerate_events, DEFAULT_ORACLE_CAP};
use kdt_core::predicates::TupleCache;
use kdt_core::redblue::{build_slice, check_trichotomy, DEFAULT_C_II};
use kdt_core::{crossings, kinetic, Scene, Time};

#[derive(Parser)]
#[command(name = "kdt", version, about = "Exact kinetic Delaunay triangulation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a seeded batch from a JSON config and print the growth report.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Simulate a scene and print its event log as JSON-lines, then a summary line.
    Verify {
        #[arg(long)]
        scene: PathBuf,
        /// Cross-check against the census, static snapshots and crossing lemmas.
        #[arg(long)]
        oracle: bool,
        /// Write the event log here instead of stdout.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Print every cocircularity and collinearity of a scene with its level.
    Census {
        #[arg(long)]
        scene: PathBuf,
    },
    /// Certify an outcome of the red-blue trichotomy for one edge and interval.
    Trichotomy {
        #[arg(long)]
        scene: PathBuf,
        /// Point ids `p,q`.
        #[arg(long, value_parser = parse_edge)]
        edge: (u32, u32),
        #[arg(long, value_parser = parse_time)]
        t0: Time,
        #[arg(long, value_parser = parse_time)]
        t1: Time,
        #[arg(long, default_value_t = 13)]
        k: usize,
        #[arg(long, default_value_t = DEFAULT_C_II)]
        c_ii: f64,
        /// Also write the arrangement slice of the edge over the interval.
        #[arg(long)]
        slice: Option<PathBuf>,
    },
    /// Clarkson-Shor sampling: survival of shallow events in random subsets.
    Sample {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn parse_edge(s: &str) -> std::result::Result<(u32, u32), String> {
    let (a, b) = s.split_once(',').ok_or("expected p,q")?;
    let p = a.trim().parse().map_err(|_| format!("bad id {a}"))?;
    let q = b.trim().parse().map_err(|_| format!("bad id {b}"))?;
    Ok((p, q))
}

fn parse_time(s: &str) -> std::result::Result<Time, String> {
    rational_serde::parse(s).map_err(|e| e.to_string())
}

fn load_scene(path: &Path) -> Result<Scene> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Scene::from_json(&text)?)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let mut out = std::io::stdout().lock();
    match cli.command {
        Command::Run { config } => {
            let text = std::fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
            let config = RunConfig::from_json(&text)?;
            if let Some(bits) = config.precision {
                if std::env::var_os("KDT_PRECISION").is_none() {
                    std::env::set_var("KDT_PRECISION", bits.to_string());
                }
            }
            let batch = run_batch(&config)?;
            if let Some(dir) = &config.output_dir {
                emit_plots(&batch.report, dir)?;
            }
            writeln!(out, "{}", serde_json::to_string_pretty(&batch.report)?)?;
        }
        Command::Verify { scene, oracle, log } => {
            let scene = load_scene(&scene)?;
            let (events, _) = kinetic::run(&scene)?;
            let lines = events.to_jsonl()?;
            match &log {
                Some(path) => std::fs::write(path, lines)?,
                None => out.write_all(lines.as_bytes())?,
            }
            if !oracle {
                let counters = kdt_core::analysis::tally_log_only(&events, scene.len());
                writeln!(out, "{}", counters.to_flat_json())?;
                return Ok(ExitCode::SUCCESS);
            }
            if scene.len() > DEFAULT_ORACLE_CAP {
                bail!("oracle checks are limited to {DEFAULT_ORACLE_CAP} points");
            }
            let (counters, checks) = evaluate_scene(&scene, &[13], DEFAULT_ORACLE_CAP, 20)?;
            let checks = checks.expect("scene is under the oracle cap");
            let mut cache = TupleCache::new(&scene);
            let analysis = crossings::analyze_scene(&scene, &events, &mut cache)?;
            let summary = serde_json::json!({
                "counters": counters.to_flat_json(),
                "checks": checks,
                "crossings": analysis.records(),
            });
            writeln!(out, "{summary}")?;
            if !checks.all_pass() {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Census { scene } => {
            let scene = load_scene(&scene)?;
            let census = enumerate_events(&scene)?;
            out.write_all(census_to_jsonl(&census)?.as_bytes())?;
        }
        Command::Trichotomy { scene, edge, t0, t1, k, c_ii, slice } => {
            let scene = load_scene(&scene)?;
            let report = check_trichotomy(&scene, edge, &t0, &t1, k, c_ii)?;
            if let Some(path) = slice {
                let s = build_slice(&scene, edge, &t0, &t1, &[])?;
                std::fs::write(path, serde_json::to_string_pretty(&s.to_json())? + "\n")?;
            }
            writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
        }
        Command::Sample { scene, k, trials, seed } => {
            let scene = load_scene(&scene)?;
            let report = clarkson_shor_experiment(&scene, k, trials, seed)?;
            writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use coalform_core::presets::{self, ExperimentPreset};
use coalform_core::report::{self, SeededRun};
use coalform_core::sim::run_fixed_campaign_with;
use coalform_core::{generate_scenario, run_campaign, CampaignConfig, CampaignResult, GenerationConfig, Scenario, Solver};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "coalform", version, about = "UAV coalition formation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a random scenario as JSON.
    Generate {
        #[arg(long)]
        uavs: usize,
        #[arg(long)]
        tasks: usize,
        #[arg(long, default_value_t = 5)]
        resources: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a multi-mission campaign with one solver.
    Run {
        #[arg(long, conflicts_with = "scenario", required_unless_present = "scenario")]
        preset: Option<String>,
        /// Scenario JSON replayed in every mission.
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long, default_value = "moqga", value_parser = parse_solver)]
        solver: Solver,
        /// Defaults to the preset's mission count, or 30.
        #[arg(long)]
        missions: Option<usize>,
        /// Defaults to every seed of the preset, or 0.
        #[arg(long, value_delimiter = ',')]
        seed: Vec<u64>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run several solvers on one or more presets and tabulate the means.
    Compare {
        #[arg(long, value_delimiter = ',', required = true)]
        preset: Vec<String>,
        #[arg(long, value_delimiter = ',', value_parser = parse_solver)]
        solvers: Vec<Solver>,
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<u64>,
        #[arg(long)]
        missions: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Named experiment setups.
    Presets {
        #[command(subcommand)]
        action: PresetsAction,
    },
}

#[derive(Subcommand)]
enum PresetsAction {
    List,
}

fn parse_solver(name: &str) -> Result<Solver, String> {
    Solver::by_name(name).ok_or_else(|| format!("unknown solver {name:?}, expected one of {}", Solver::NAMES.join(", ")))
}

fn find_preset(name: &str) -> coalform_core::Result<ExperimentPreset> {
    presets::find(name).ok_or_else(|| coalform_core::Error::Config(format!("unknown preset {name:?}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let usage = err
                .downcast_ref::<coalform_core::Error>()
                .is_some_and(|e| !matches!(e, coalform_core::Error::Io(_)));
            ExitCode::from(if usage { 2 } else { 1 })
        }
    }
}

fn dispatch(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Generate { uavs, tasks, resources, seed, out } => generate(uavs, tasks, resources, seed, &out),
        Command::Run { preset, scenario, solver, missions, seed, out } => {
            run(preset.as_deref(), scenario.as_deref(), solver, missions, seed, &out)
        }
        Command::Compare { preset, solvers, seeds, missions, out } => compare(&preset, solvers, seeds, missions, &out),
        Command::Presets { action: PresetsAction::List } => {
            for p in presets::all() {
                println!("{:<20} {}", p.name, p.description);
            }
            Ok(())
        }
    }
}

fn generate(uavs: usize, tasks: usize, resources: usize, seed: u64, out: &Path) -> anyhow::Result<()> {
    let config = GenerationConfig {
        n_resources: resources,
        ..GenerationConfig::new(uavs, tasks)
    };
    let scenario = generate_scenario(&config, seed)?;
    fs::write(out, scenario.to_json()? + "\n").with_context(|| format!("writing {}", out.display()))?;
    println!("wrote {} UAVs and {} tasks to {}", uavs, tasks, out.display());
    Ok(())
}

fn create(dir: &Path, name: &str) -> anyhow::Result<BufWriter<File>> {
    let path = dir.join(name);
    let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn run(
    preset: Option<&str>,
    scenario: Option<&Path>,
    solver: Solver,
    missions: Option<usize>,
    seeds: Vec<u64>,
    out: &Path,
) -> anyhow::Result<()> {
    let (base, fixed, source, default_seeds) = match (preset, scenario) {
        (Some(name), _) => {
            let p = find_preset(name)?;
            let config = CampaignConfig {
                missions: missions.unwrap_or(p.missions),
                ..p.campaign(solver, p.seeds[0])
            };
            (config, None, json!({ "preset": name }), p.seeds)
        }
        (None, Some(path)) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let s = Scenario::from_json(&text)?;
            let gen = GenerationConfig::new(s.uavs.len(), s.tasks.len());
            let config = CampaignConfig::new(gen, solver, missions.unwrap_or(30), 0);
            (config, Some(s), json!({ "scenario": path.display().to_string() }), vec![0])
        }
        (None, None) => unreachable!("clap requires one of --preset and --scenario"),
    };
    let seeds = if seeds.is_empty() { default_seeds } else { seeds };
    // The recorded config carries the first seed; "seeds" lists them all.
    run_cells(base, fixed, source, seeds, out)
}

fn campaign(config: &CampaignConfig, fixed: Option<&Scenario>) -> coalform_core::Result<CampaignResult> {
    match fixed {
        Some(s) => run_fixed_campaign_with(config, s, |_| {}),
        None => run_campaign(config),
    }
}

#[derive(Serialize)]
struct RunRow<'a> {
    seed: u64,
    solver: &'a str,
    n_uavs: usize,
    n_tasks: usize,
    missions: usize,
    completed_pct: f64,
    mean_violations: f64,
}

fn run_cells(
    base: CampaignConfig,
    fixed: Option<Scenario>,
    source: Value,
    seeds: Vec<u64>,
    out: &Path,
) -> anyhow::Result<()> {
    let base = CampaignConfig {
        record_scatter: true,
        seed: seeds[0],
        ..base
    };
    base.validate()?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let results: Vec<CampaignResult> = seeds
        .par_iter()
        .map(|seed| campaign(&CampaignConfig { seed: *seed, ..base.clone() }, fixed.as_ref()))
        .collect::<coalform_core::Result<_>>()?;

    let mut meta = json!({
        "command": "run",
        "version": env!("CARGO_PKG_VERSION"),
        "seeds": seeds,
        "config": base,
    });
    meta.as_object_mut().unwrap().extend(source.as_object().unwrap().clone());
    if let Some(s) = &fixed {
        meta["scenario_seed"] = json!(s.seed);
    }
    let runs: Vec<SeededRun<'_>> = seeds
        .iter()
        .zip(&results)
        .map(|(seed, result)| SeededRun { seed: *seed, result })
        .collect();
    let rows = runs.iter().map(|r| RunRow {
        seed: r.seed,
        solver: &r.result.summary.solver,
        n_uavs: r.result.summary.n_uavs,
        n_tasks: r.result.summary.n_tasks,
        missions: r.result.summary.missions,
        completed_pct: r.result.summary.completed_pct,
        mean_violations: r.result.summary.mean_violations,
    });

    report::write_reports_jsonl(create(out, "reports.jsonl")?, &meta, &runs)?;
    report::write_csv(create(out, "aggregate.csv")?, &meta, rows)?;
    report::write_reputation_csv(create(out, "reputation.csv")?, &meta, &runs)?;
    report::write_scatter_csv(create(out, "scatter.csv")?, &meta, &runs)?;

    for r in &runs {
        let s = &r.result.summary;
        println!(
            "seed {:<4} {:<12} completed {:6.2}%  violations {:.3}",
            r.seed, s.solver, s.completed_pct, s.mean_violations
        );
    }
    Ok(())
}

#[derive(Serialize)]
struct CompareRow {
    preset: String,
    solver: String,
    n_uavs: usize,
    n_tasks: usize,
    missions: usize,
    seeds: usize,
    completed_pct: f64,
    mean_violations: f64,
}

fn compare(
    names: &[String],
    solvers: Vec<Solver>,
    seeds: Vec<u64>,
    missions: Option<usize>,
    out: &Path,
) -> anyhow::Result<()> {
    let presets: Vec<ExperimentPreset> = names.iter().map(|n| find_preset(n)).collect::<Result<_, _>>()?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;

    let mut cells = Vec::new();
    for p in &presets {
        let solvers = if solvers.is_empty() {
            p.solvers.iter().filter_map(|s| Solver::by_name(s)).collect()
        } else {
            solvers.clone()
        };
        let seeds = if seeds.is_empty() { p.seeds.clone() } else { seeds.clone() };
        for solver in solvers {
            for seed in &seeds {
                let config = CampaignConfig {
                    missions: missions.unwrap_or(p.missions),
                    ..p.campaign(solver.clone(), *seed)
                };
                config.validate()?;
                cells.push((p.name.clone(), config));
            }
        }
    }

    let results: Vec<CampaignResult> = cells
        .par_iter()
        .map(|(_, config)| run_campaign(config))
        .collect::<coalform_core::Result<_>>()?;

    let mut rows: Vec<CompareRow> = Vec::new();
    for ((preset, config), result) in cells.iter().zip(&results) {
        let s = &result.summary;
        let row = match rows.iter_mut().find(|r| &r.preset == preset && r.solver == s.solver) {
            Some(row) => row,
            None => {
                rows.push(CompareRow {
                    preset: preset.clone(),
                    solver: s.solver.clone(),
                    n_uavs: s.n_uavs,
                    n_tasks: s.n_tasks,
                    missions: config.missions,
                    seeds: 0,
                    completed_pct: 0.0,
                    mean_violations: 0.0,
                });
                rows.last_mut().unwrap()
            }
        };
        row.seeds += 1;
        row.completed_pct += s.completed_pct;
        row.mean_violations += s.mean_violations;
    }
    for row in &mut rows {
        row.completed_pct /= row.seeds as f64;
        row.mean_violations /= row.seeds as f64;
    }

    let per_seed = cells.iter().zip(&results).map(|((preset, config), result)| {
        let s = &result.summary;
        json!({
            "preset": preset,
            "solver": s.solver,
            "seed": config.seed,
            "completed_pct": s.completed_pct,
            "mean_violations": s.mean_violations,
        })
    });
    let meta = json!({
        "command": "compare",
        "version": env!("CARGO_PKG_VERSION"),
        "presets": presets,
        "seeds": seeds,
        "missions": missions,
    });
    report::write_csv(create(out, "aggregate.csv")?, &meta, &rows)?;
    let mut runs = create(out, "runs.jsonl")?;
    serde_json::to_writer(&mut runs, &json!({ "meta": meta }))?;
    for rec in per_seed {
        std::io::Write::write_all(&mut runs, b"\n")?;
        serde_json::to_writer(&mut runs, &rec)?;
    }
    std::io::Write::write_all(&mut runs, b"\n")?;

    for r in &rows {
        println!(
            "{:<20} {:<12} completed {:6.2}%  violations {:.3}  ({} seeds)",
            r.preset, r.solver, r.completed_pct, r.mean_violations, r.seeds
        );
    }
    Ok(())
}

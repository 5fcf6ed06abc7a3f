//! Command-line driver for XCS niche-tracking experiments.

mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{load, CliError, LoadedConfig};
use xcs::envs::{optimal_population, parse_grid, BooleanProblem, OraclePair};
use xcs::harness::{run_batch, run_single_with_timeline, AggregateStats};
use xcs::niche::format_timeline;
use xcs::{Classifier, Population};

#[derive(Parser)]
#[command(
    name = "xcs",
    version,
    about = "XCS classifier system with evolutionary niche tracking"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a batch experiment and write stats CSVs and population dumps.
    Run { config: PathBuf },
    /// Run one seeded experiment, exporting the niche timeline at every
    /// checkpoint.
    Niches {
        config: PathBuf,
        /// Record the full composition of every active niche.
        #[arg(long)]
        composition: bool,
    },
    /// Validation oracles.
    #[command(subcommand)]
    Oracle(OracleCommand),
    /// Align per-run stats CSVs into per-metric mean/std time series.
    Plotdata { stats_dir: PathBuf },
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Minimal accurate, maximally general population for a Boolean problem
    /// (e.g. MP6, maj4, multiplexer:11); writes a population dump and prints
    /// its size.
    OptimalPop {
        problem: String,
        /// Output file (defaults to `<problem>.oracle.pop`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Average optimal steps-to-goal of a grid map.
    GridSteps { map: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config } => cmd_run(&config),
        Command::Niches {
            config,
            composition,
        } => cmd_niches(&config, composition),
        Command::Oracle(OracleCommand::OptimalPop { problem, out }) => {
            cmd_oracle_optimal_pop(&problem, out)
        }
        Command::Oracle(OracleCommand::GridSteps { map }) => cmd_oracle_grid_steps(&map),
        Command::Plotdata { stats_dir } => cmd_plotdata(&stats_dir),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| runtime(format!("{}: {e}", path.display())))
}

fn write_manifest(dir: &Path, command: &str, loaded: &LoadedConfig) -> Result<(), CliError> {
    let manifest = format!(
        "tool = xcs {}\ncommand = {command}\nproblem = {}\nseed = {}\nruns = {}\n",
        env!("CARGO_PKG_VERSION"),
        loaded.experiment.label,
        loaded.experiment.base_seed,
        loaded.experiment.runs,
    );
    write_file(&dir.join("manifest.txt"), &manifest)?;
    write_file(&dir.join("config.conf"), &loaded.raw_text)
}

fn cmd_run(config_path: &Path) -> Result<(), CliError> {
    let loaded = load(config_path)?;
    let batch = run_batch(&loaded.experiment).map_err(runtime)?;
    let dir = &loaded.output_dir;
    fs::create_dir_all(dir).map_err(|e| runtime(format!("{}: {e}", dir.display())))?;
    write_manifest(dir, "run", &loaded)?;
    write_file(&dir.join("aggregate.csv"), &batch.aggregate.csv())?;
    for run in &batch.runs {
        write_file(
            &dir.join(format!("run_{}.csv", run.run_index)),
            &run.stats_csv(),
        )?;
    }
    let first = &batch.runs[0];
    write_file(&dir.join("pop_before_condensation.pop"), &first.dump_before)?;
    write_file(&dir.join("pop_after_condensation.pop"), &first.dump_after)?;
    println!("{}", AggregateStats::csv_header());
    println!("{}", batch.aggregate.csv_row());
    println!("wrote {}", dir.display());
    Ok(())
}

fn cmd_niches(config_path: &Path, composition: bool) -> Result<(), CliError> {
    let loaded = load(config_path)?;
    let (_, timeline) =
        run_single_with_timeline(&loaded.experiment, 0, composition).map_err(runtime)?;
    let dir = &loaded.output_dir;
    fs::create_dir_all(dir).map_err(|e| runtime(format!("{}: {e}", dir.display())))?;
    write_manifest(dir, "niches", &loaded)?;
    write_file(&dir.join("niche_timeline.txt"), &format_timeline(&timeline))?;
    println!(
        "wrote {} checkpoints to {}",
        timeline.len(),
        dir.join("niche_timeline.txt").display()
    );
    Ok(())
}

/// Accepts `MP6`, `maj4`, `multiplexer:11`, `majority:5` (case-insensitive).
fn parse_problem_spec(spec: &str) -> Result<BooleanProblem, CliError> {
    let lower = spec.to_lowercase();
    let make = |kind: &str, size: &str| -> Result<BooleanProblem, CliError> {
        let size: usize = size
            .parse()
            .map_err(|_| CliError::Config(format!("invalid problem size in `{spec}`")))?;
        match kind {
            "mp" | "multiplexer" => {
                BooleanProblem::multiplexer(size).map_err(|e| CliError::Config(e.to_string()))
            }
            "maj" | "majority" => {
                BooleanProblem::majority(size).map_err(|e| CliError::Config(e.to_string()))
            }
            _ => Err(CliError::Config(format!("unknown problem kind `{kind}`"))),
        }
    };
    if let Some((kind, size)) = lower.split_once(':') {
        return make(kind, size);
    }
    if let Some(size) = lower.strip_prefix("mp") {
        return make("mp", size);
    }
    if let Some(size) = lower.strip_prefix("maj") {
        return make("maj", size);
    }
    Err(CliError::Config(format!(
        "cannot parse problem `{spec}`; use MP<n>, MAJ<n>, multiplexer:<n>, or majority:<n>"
    )))
}

fn oracle_dump(problem: &BooleanProblem, pairs: &[OraclePair]) -> String {
    let mut population = Population::new();
    for pair in pairs {
        population.insert(Classifier {
            condition: pair.condition,
            action: pair.action,
            prediction: pair.payoff,
            error: 0.0,
            fitness: 1.0,
            experience: 0,
            ga_stamp: 0,
            action_set_size: 1.0,
            numerosity: 1,
            ats: 0,
            history: xcs::niche::StampHistory::new(),
        });
    }
    population.dump_string(problem.n_bits(), problem.num_actions())
}

fn cmd_oracle_optimal_pop(spec: &str, out: Option<PathBuf>) -> Result<(), CliError> {
    let problem = parse_problem_spec(spec)?;
    let pairs = optimal_population(&problem).map_err(runtime)?;
    let path = out
        .unwrap_or_else(|| PathBuf::from(format!("{}.oracle.pop", problem.label().to_lowercase())));
    write_file(&path, &oracle_dump(&problem, &pairs))?;
    println!("{}", pairs.len());
    Ok(())
}

fn cmd_oracle_grid_steps(map: &Path) -> Result<(), CliError> {
    let text =
        fs::read_to_string(map).map_err(|e| CliError::Config(format!("{}: {e}", map.display())))?;
    let grid = parse_grid(&text).map_err(|e| CliError::Config(format!("{}: {e}", map.display())))?;
    let steps = grid.optimal_steps().map_err(runtime)?;
    println!("{steps:?}");
    Ok(())
}

const STATS_HEADER: &str = "checkpoint,performance,error,pop_macro,can,man_mean,man_std";
const METRICS: [&str; 6] = [
    "performance",
    "error",
    "pop_macro",
    "can",
    "man_mean",
    "man_std",
];

fn cmd_plotdata(stats_dir: &Path) -> Result<(), CliError> {
    let mut files: Vec<PathBuf> = fs::read_dir(stats_dir)
        .map_err(|e| CliError::Config(format!("{}: {e}", stats_dir.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("run_") && n.ends_with(".csv"))
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::Config(format!(
            "{}: no run_*.csv files found",
            stats_dir.display()
        )));
    }

    let mut runs: Vec<Vec<(u64, [f64; 6])>> = Vec::new();
    for file in &files {
        let text =
            fs::read_to_string(file).map_err(|e| runtime(format!("{}: {e}", file.display())))?;
        let mut lines = text.lines();
        if lines.next() != Some(STATS_HEADER) {
            return Err(runtime(format!("{}: unexpected header", file.display())));
        }
        let mut rows = Vec::new();
        for line in lines {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 7 {
                return Err(runtime(format!(
                    "{}: malformed row `{line}`",
                    file.display()
                )));
            }
            let checkpoint: u64 = fields[0].parse().map_err(|_| {
                runtime(format!("{}: bad checkpoint `{}`", file.display(), fields[0]))
            })?;
            let mut values = [0.0; 6];
            for (i, v) in values.iter_mut().enumerate() {
                *v = fields[i + 1].parse().map_err(|_| {
                    runtime(format!("{}: bad value `{}`", file.display(), fields[i + 1]))
                })?;
            }
            rows.push((checkpoint, values));
        }
        runs.push(rows);
    }

    let grid: Vec<u64> = runs[0].iter().map(|(c, _)| *c).collect();
    let offending: Vec<String> = files
        .iter()
        .zip(&runs)
        .filter(|(_, rows)| rows.iter().map(|(c, _)| *c).collect::<Vec<u64>>() != grid)
        .map(|(file, _)| file.display().to_string())
        .collect();
    if !offending.is_empty() {
        return Err(runtime(format!(
            "checkpoint grids differ from {}: {}",
            files[0].display(),
            offending.join(", ")
        )));
    }

    for (m, metric) in METRICS.iter().enumerate() {
        let mut out = format!("checkpoint,{metric}_mean,{metric}_std\n");
        for (i, &checkpoint) in grid.iter().enumerate() {
            let values: Vec<f64> = runs.iter().map(|rows| rows[i].1[m]).collect();
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            let var =
                values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / values.len() as f64;
            out.push_str(&format!("{checkpoint},{mean},{}\n", var.sqrt()));
        }
        write_file(&stats_dir.join(format!("plot_{metric}.csv")), &out)?;
    }
    println!(
        "wrote {} plot_<metric>.csv files to {}",
        METRICS.len(),
        stats_dir.display()
    );
    Ok(())
}

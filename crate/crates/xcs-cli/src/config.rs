//! Flat key-value experiment config files.
//!
//! One `key = value` per line, `#` comments, unknown keys rejected, missing
//! keys take the documented defaults. `problem.map` paths resolve relative
//! to the config file, `output.dir` relative to the working directory.

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use xcs::envs::{parse_grid, BooleanProblem};
use xcs::harness::{ExperimentConfig, ExplorationMode, Problem};
use xcs::Parameters;

/// CLI failures, split by exit code: config errors exit 1, runtime errors 2.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

pub struct LoadedConfig {
    pub experiment: ExperimentConfig,
    pub output_dir: PathBuf,
    /// Original config text, copied into the output directory.
    pub raw_text: String,
}

pub fn load(path: &Path) -> Result<LoadedConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let config_dir = path.parent().unwrap_or(Path::new("."));
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "experiment".into());

    let mut seen: Vec<String> = Vec::new();
    let mut problem_kind: Option<String> = None;
    let mut problem_size: Option<usize> = None;
    let mut problem_map: Option<String> = None;
    let mut params = Parameters::default();
    let mut learning_problems = 10_000u64;
    let mut condensation_problems = 5_000u64;
    let mut runs = 20u64;
    let mut seed = 1u64;
    let mut checkpoint_interval = 500u64;
    let mut exploration = ExplorationMode::Explore;
    let mut output_dir: Option<PathBuf> = None;

    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {line_no}: expected `key = value`")))?;
        let key = key.trim();
        let value = value.trim();
        if seen.iter().any(|k| k == key) {
            return Err(CliError::Config(format!(
                "line {line_no}: duplicate key `{key}`"
            )));
        }
        seen.push(key.to_string());

        let bad = |what: &str| {
            CliError::Config(format!("line {line_no}: {key} = {value} is not a valid {what}"))
        };
        macro_rules! parse {
            ($what:literal) => {
                value.parse().map_err(|_| bad($what))?
            };
        }
        match key {
            "problem.kind" => problem_kind = Some(value.to_string()),
            "problem.size" => problem_size = Some(parse!("size")),
            "problem.map" => problem_map = Some(value.to_string()),
            "params.N" => params.population_limit = parse!("integer"),
            "params.beta" => params.learning_rate = parse!("number"),
            "params.alpha" => params.accuracy_falloff = parse!("number"),
            "params.epsilon0" => params.error_threshold = parse!("number"),
            "params.nu" => params.accuracy_exponent = parse!("number"),
            "params.gamma" => params.discount = parse!("number"),
            "params.theta_ga" => params.ga_threshold = parse!("number"),
            "params.chi" => params.crossover_prob = parse!("number"),
            "params.mu" => params.mutation_prob = parse!("number"),
            "params.theta_del" => params.deletion_threshold = parse!("integer"),
            "params.delta" => params.deletion_fitness_fraction = parse!("number"),
            "params.theta_sub" => params.subsumption_threshold = parse!("integer"),
            "params.P_hash" => params.wildcard_prob = parse!("number"),
            "params.p_I" => params.initial_prediction = parse!("number"),
            "params.epsilon_I" => params.initial_error = parse!("number"),
            "params.F_I" => params.initial_fitness = parse!("number"),
            "params.p_explore" => params.explore_prob = parse!("number"),
            "params.doGASubsumption" => params.ga_subsumption = parse!("boolean"),
            "params.doASSubsumption" => params.action_set_subsumption = parse!("boolean"),
            "params.useGradient" => params.gradient_descent = parse!("boolean"),
            "params.L_max" => params.history_limit = Some(parse!("integer")),
            "params.maxStepsPerEpisode" => params.max_steps_per_episode = parse!("integer"),
            "run.learningProblems" => learning_problems = parse!("integer"),
            "run.condensationProblems" => condensation_problems = parse!("integer"),
            "run.runs" => runs = parse!("integer"),
            "run.seed" => seed = parse!("integer"),
            "run.checkpointInterval" => checkpoint_interval = parse!("integer"),
            "run.explorationMode" => {
                exploration = match value {
                    "explore" => ExplorationMode::Explore,
                    "biased" => ExplorationMode::Biased,
                    _ => return Err(bad("exploration mode (explore or biased)")),
                }
            }
            "output.dir" => output_dir = Some(PathBuf::from(value)),
            _ => {
                return Err(CliError::Config(format!(
                    "line {line_no}: unknown key `{key}`"
                )))
            }
        }
    }

    let kind = problem_kind
        .ok_or_else(|| CliError::Config("missing required key `problem.kind`".into()))?;
    let (problem, label) = match kind.as_str() {
        "multiplexer" => {
            let size = problem_size
                .ok_or_else(|| CliError::Config("multiplexer requires `problem.size`".into()))?;
            let p = BooleanProblem::multiplexer(size)
                .map_err(|e| CliError::Config(e.to_string()))?;
            let label = p.label();
            (Problem::Boolean(p), label)
        }
        "majority" => {
            let size = problem_size
                .ok_or_else(|| CliError::Config("majority requires `problem.size`".into()))?;
            let p =
                BooleanProblem::majority(size).map_err(|e| CliError::Config(e.to_string()))?;
            let label = p.label();
            (Problem::Boolean(p), label)
        }
        "grid" => {
            let map = problem_map
                .ok_or_else(|| CliError::Config("grid requires `problem.map`".into()))?;
            let map_path = config_dir.join(&map);
            let map_text = fs::read_to_string(&map_path)
                .map_err(|e| CliError::Config(format!("{}: {e}", map_path.display())))?;
            let grid = parse_grid(&map_text)
                .map_err(|e| CliError::Config(format!("{}: {e}", map_path.display())))?;
            let label = map_path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "grid".into());
            (Problem::Grid(grid), label)
        }
        other => {
            return Err(CliError::Config(format!(
                "problem.kind must be multiplexer, majority, or grid, got `{other}`"
            )))
        }
    };

    let experiment = ExperimentConfig {
        problem,
        label,
        params,
        learning_problems,
        condensation_problems,
        runs,
        base_seed: seed,
        checkpoint_interval,
        exploration,
    };
    experiment
        .validate()
        .map_err(|e| CliError::Config(e.to_string()))?;

    Ok(LoadedConfig {
        experiment,
        output_dir: output_dir.unwrap_or_else(|| PathBuf::from("out").join(stem)),
        raw_text: text,
    })
}

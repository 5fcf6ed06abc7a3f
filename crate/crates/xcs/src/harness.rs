//! Experiment protocol: alternating learn/test problems, condensation
//! scheduling, checkpointed metrics, and seeded multi-run aggregation.
//!
//! Every learning problem is followed by a test problem. Learning problems
//! select actions randomly (or biased-randomly) and run updates and the GA;
//! test problems pick the best action with the GA off and feed the
//! performance metric. After the learning phase a condensation phase
//! continues the same alternation with crossover and mutation disabled.
//!
//! Run `i` of a batch is fully determined by `base_seed + i`; runs execute
//! in parallel and aggregation is a serial reduction in run order.

use std::collections::VecDeque;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::condition::Bitstring;
use crate::engine::{compute_target, ActionSet, SelectionMode, XcsEngine};
use crate::envs::{BooleanProblem, Grid};
use crate::error::{Error, Result};
use crate::niche::{can, man, timeline_checkpoint, NicheTimelineEntry};
use crate::params::Parameters;

/// Moving window of test problems feeding the performance metric.
pub const PERFORMANCE_WINDOW: usize = 50;

/// A benchmark problem: single-step Boolean oracle or multi-step grid.
#[derive(Clone, Debug)]
pub enum Problem {
    Boolean(BooleanProblem),
    Grid(Grid),
}

impl Problem {
    pub fn input_len(&self) -> usize {
        match self {
            Problem::Boolean(p) => p.n_bits(),
            Problem::Grid(g) => g.n_input_bits(),
        }
    }

    pub fn num_actions(&self) -> usize {
        match self {
            Problem::Boolean(p) => p.num_actions(),
            Problem::Grid(g) => g.num_actions(),
        }
    }
}

/// Action selection used during learning problems.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExplorationMode {
    /// Pure random action selection.
    Explore,
    /// Random with probability `p_explore`, best otherwise.
    Biased,
}

impl ExplorationMode {
    fn selection(self) -> SelectionMode {
        match self {
            ExplorationMode::Explore => SelectionMode::Explore,
            ExplorationMode::Biased => SelectionMode::Biased,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub problem: Problem,
    /// Row label for aggregate output, e.g. `MP6` or `W1`.
    pub label: String,
    pub params: Parameters,
    pub learning_problems: u64,
    pub condensation_problems: u64,
    pub runs: u64,
    pub base_seed: u64,
    pub checkpoint_interval: u64,
    pub exploration: ExplorationMode,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.runs < 1 {
            return Err(Error::InvalidParameter("run.runs must be at least 1".into()));
        }
        if self.checkpoint_interval < 1 {
            return Err(Error::InvalidParameter(
                "run.checkpointInterval must be at least 1".into(),
            ));
        }
        for (name, count) in [
            ("run.learningProblems", self.learning_problems),
            ("run.condensationProblems", self.condensation_problems),
        ] {
            if count % self.checkpoint_interval != 0 {
                return Err(Error::InvalidParameter(format!(
                    "{name} = {count} is not a multiple of checkpointInterval = {}",
                    self.checkpoint_interval
                )));
            }
        }
        Ok(())
    }
}

/// Metrics recorded at one checkpoint. `performance` is the fraction of
/// correct answers (single-step) or the mean steps to goal (multi-step)
/// over the recent test window; `system_error` is the mean absolute gap
/// between predicted and received payoff over the same window.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckpointStats {
    pub problems: u64,
    pub performance: f64,
    pub system_error: f64,
    pub pop_macro: usize,
    pub can_size: usize,
    pub man_mean: f64,
    pub man_std: f64,
}

/// Population and niche statistics at a phase boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseSummary {
    pub pop_macro: usize,
    pub can_size: usize,
    pub man_mean: f64,
    pub man_std: f64,
}

#[derive(Clone, Debug)]
pub struct RunStats {
    pub run_index: u64,
    pub checkpoints: Vec<CheckpointStats>,
    pub before_condensation: PhaseSummary,
    pub after_condensation: PhaseSummary,
    /// Per test problem: 1/0 correctness (single-step) or steps (multi-step).
    pub test_outcomes: Vec<f64>,
    /// Population dump at the end of the learning phase.
    pub dump_before: String,
    /// Population dump at the end of the condensation phase.
    pub dump_after: String,
}

impl RunStats {
    /// Per-run stats CSV: `checkpoint,performance,error,pop_macro,can,man_mean,man_std`.
    pub fn stats_csv(&self) -> String {
        let mut out = String::from("checkpoint,performance,error,pop_macro,can,man_mean,man_std\n");
        for c in &self.checkpoints {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                c.problems, c.performance, c.system_error, c.pop_macro, c.can_size, c.man_mean, c.man_std
            );
        }
        out
    }
}

/// Mean and population standard deviation over runs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self { mean: 0.0, std: 0.0 };
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / values.len() as f64;
        Self { mean, std: var.sqrt() }
    }
}

/// One table row: population size, CAN, and MAN before and after
/// condensation, aggregated over runs.
#[derive(Clone, Debug, PartialEq)]
pub struct AggregateStats {
    pub problem: String,
    pub population_limit: u32,
    pub learning_problems: u64,
    pub pop_bc: MeanStd,
    pub can_bc: MeanStd,
    pub man_bc: MeanStd,
    pub pop_ac: MeanStd,
    pub can_ac: MeanStd,
    pub man_ac: MeanStd,
}

impl AggregateStats {
    /// Aggregates run summaries; insensitive to the order of `runs`.
    pub fn from_runs(config: &ExperimentConfig, runs: &[RunStats]) -> Self {
        let mut ordered: Vec<&RunStats> = runs.iter().collect();
        ordered.sort_by_key(|r| r.run_index);
        let collect = |f: &dyn Fn(&RunStats) -> f64| -> Vec<f64> {
            ordered.iter().map(|r| f(r)).collect()
        };
        Self {
            problem: config.label.clone(),
            population_limit: config.params.population_limit,
            learning_problems: config.learning_problems,
            pop_bc: MeanStd::of(&collect(&|r| r.before_condensation.pop_macro as f64)),
            can_bc: MeanStd::of(&collect(&|r| r.before_condensation.can_size as f64)),
            man_bc: MeanStd::of(&collect(&|r| r.before_condensation.man_mean)),
            pop_ac: MeanStd::of(&collect(&|r| r.after_condensation.pop_macro as f64)),
            can_ac: MeanStd::of(&collect(&|r| r.after_condensation.can_size as f64)),
            man_ac: MeanStd::of(&collect(&|r| r.after_condensation.man_mean)),
        }
    }

    pub fn csv_header() -> &'static str {
        "problem,N,n_lp,pop_bc_mean,pop_bc_std,can_bc_mean,can_bc_std,man_bc_mean,man_bc_std,\
pop_ac_mean,pop_ac_std,can_ac_mean,can_ac_std,man_ac_mean,man_ac_std"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.problem,
            self.population_limit,
            self.learning_problems,
            self.pop_bc.mean,
            self.pop_bc.std,
            self.can_bc.mean,
            self.can_bc.std,
            self.man_bc.mean,
            self.man_bc.std,
            self.pop_ac.mean,
            self.pop_ac.std,
            self.can_ac.mean,
            self.can_ac.std,
            self.man_ac.mean,
            self.man_ac.std
        )
    }

    pub fn csv(&self) -> String {
        format!("{}\n{}\n", Self::csv_header(), self.csv_row())
    }
}

/// All per-run artifacts of a batch plus the aggregate row.
#[derive(Clone, Debug)]
pub struct BatchResult {
    pub runs: Vec<RunStats>,
    pub aggregate: AggregateStats,
}

/// Executes one seeded run: the learning phase, the before-condensation
/// summary, the condensation phase, and the after-condensation summary.
pub fn run_single(config: &ExperimentConfig, run_index: u64) -> Result<RunStats> {
    run_instrumented(config, run_index, None).map(|(stats, _)| stats)
}

/// As [`run_single`], additionally capturing a niche timeline entry at
/// every checkpoint (with composition snapshots if requested).
pub fn run_single_with_timeline(
    config: &ExperimentConfig,
    run_index: u64,
    composition: bool,
) -> Result<(RunStats, Vec<NicheTimelineEntry>)> {
    run_instrumented(config, run_index, Some(composition))
}

/// Runs the whole batch, in parallel, and aggregates. Any failed run aborts
/// the batch with its error and run index.
pub fn run_batch(config: &ExperimentConfig) -> Result<BatchResult> {
    config.validate()?;
    let results: Vec<Result<RunStats>> = (0..config.runs)
        .into_par_iter()
        .map(|i| {
            run_single(config, i).map_err(|e| Error::Experiment(format!("run {i}: {e}")))
        })
        .collect();
    let mut runs = results.into_iter().collect::<Result<Vec<_>>>()?;
    runs.sort_by_key(|r| r.run_index);
    let aggregate = AggregateStats::from_runs(config, &runs);
    Ok(BatchResult { runs, aggregate })
}

struct Recorder {
    interval: u64,
    problems: u64,
    performance: VecDeque<f64>,
    errors: VecDeque<f64>,
    outcomes: Vec<f64>,
    checkpoints: Vec<CheckpointStats>,
    timeline: Vec<NicheTimelineEntry>,
    composition: Option<bool>,
}

impl Recorder {
    fn new(interval: u64, composition: Option<bool>) -> Self {
        Self {
            interval,
            problems: 0,
            performance: VecDeque::with_capacity(PERFORMANCE_WINDOW),
            errors: VecDeque::with_capacity(PERFORMANCE_WINDOW),
            outcomes: Vec::new(),
            checkpoints: Vec::new(),
            timeline: Vec::new(),
            composition,
        }
    }

    fn record_test(&mut self, performance: f64, error: f64) {
        if self.performance.len() == PERFORMANCE_WINDOW {
            self.performance.pop_front();
            self.errors.pop_front();
        }
        self.performance.push_back(performance);
        self.errors.push_back(error);
        self.outcomes.push(performance);
    }

    fn after_problem(&mut self, engine: &XcsEngine) {
        self.problems += 1;
        if !self.problems.is_multiple_of(self.interval) {
            return;
        }
        let mean = |w: &VecDeque<f64>| {
            if w.is_empty() {
                0.0
            } else {
                w.iter().sum::<f64>() / w.len() as f64
            }
        };
        let summary = summarize(engine);
        self.checkpoints.push(CheckpointStats {
            problems: self.problems,
            performance: mean(&self.performance),
            system_error: mean(&self.errors),
            pop_macro: summary.pop_macro,
            can_size: summary.can_size,
            man_mean: summary.man_mean,
            man_std: summary.man_std,
        });
        if let Some(composition) = self.composition {
            self.timeline
                .push(timeline_checkpoint(engine.population(), engine.time(), composition));
        }
    }
}

fn summarize(engine: &XcsEngine) -> PhaseSummary {
    let population = engine.population();
    let (man_mean, man_std) = man(population).unwrap_or((0.0, 0.0));
    PhaseSummary {
        pop_macro: population.macro_count(),
        can_size: can(population).len(),
        man_mean,
        man_std,
    }
}

fn run_instrumented(
    config: &ExperimentConfig,
    run_index: u64,
    timeline: Option<bool>,
) -> Result<(RunStats, Vec<NicheTimelineEntry>)> {
    config.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(config.base_seed.wrapping_add(run_index));
    let input_len = config.problem.input_len();
    let num_actions = config.problem.num_actions();
    let mut engine = XcsEngine::new(input_len, num_actions, config.params.clone());
    let mut recorder = Recorder::new(config.checkpoint_interval, timeline);

    run_phase(&mut engine, config, config.learning_problems, &mut recorder, &mut rng)?;
    let before_condensation = summarize(&engine);
    let dump_before = engine.population().dump_string(input_len, num_actions);

    engine.enter_condensation();
    run_phase(&mut engine, config, config.condensation_problems, &mut recorder, &mut rng)?;
    let after_condensation = summarize(&engine);
    let dump_after = engine.population().dump_string(input_len, num_actions);

    Ok((
        RunStats {
            run_index,
            checkpoints: recorder.checkpoints,
            before_condensation,
            after_condensation,
            test_outcomes: recorder.outcomes,
            dump_before,
            dump_after,
        },
        recorder.timeline,
    ))
}

fn run_phase(
    engine: &mut XcsEngine,
    config: &ExperimentConfig,
    count: u64,
    recorder: &mut Recorder,
    rng: &mut ChaCha12Rng,
) -> Result<()> {
    let learn_mode = config.exploration.selection();
    for _ in 0..count {
        match &config.problem {
            Problem::Boolean(problem) => {
                boolean_learn_problem(engine, problem, learn_mode, rng)?;
                let (correct, error) = boolean_test_problem(engine, problem, rng)?;
                recorder.record_test(correct, error);
            }
            Problem::Grid(grid) => {
                multi_step_episode(engine, grid, EpisodeMode::Learn(learn_mode), rng)?;
                let outcome = multi_step_episode(engine, grid, EpisodeMode::Test, rng)?;
                recorder.record_test(f64::from(outcome.steps), outcome.mean_error);
            }
        }
        recorder.after_problem(engine);
    }
    Ok(())
}

fn boolean_learn_problem<R: Rng>(
    engine: &mut XcsEngine,
    problem: &BooleanProblem,
    mode: SelectionMode,
    rng: &mut R,
) -> Result<()> {
    let input = problem.random_input(rng);
    let decision = engine.decide(&input, mode, rng)?;
    let reward = problem.reward(&input, decision.action)?;
    engine.reinforce(&decision.action_set, reward, &input, rng);
    Ok(())
}

fn boolean_test_problem<R: Rng>(
    engine: &mut XcsEngine,
    problem: &BooleanProblem,
    rng: &mut R,
) -> Result<(f64, f64)> {
    let input = problem.random_input(rng);
    let decision = engine.decide(&input, SelectionMode::Exploit, rng)?;
    let reward = problem.reward(&input, decision.action)?;
    let predicted = decision
        .prediction_array
        .value(decision.action)
        .unwrap_or(0.0);
    let correct = if reward > 0.0 { 1.0 } else { 0.0 };
    Ok((correct, (reward - predicted).abs()))
}

/// How a multi-step episode drives the engine.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EpisodeMode {
    /// Updates and GA on; actions per the given selection mode.
    Learn(SelectionMode),
    /// Evaluation only: best actions, no updates, no GA.
    Test,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpisodeOutcome {
    pub steps: u32,
    pub reached_goal: bool,
    /// Mean absolute gap between chosen prediction and its backup target.
    pub mean_error: f64,
}

/// One episode from a random empty start: sense, match, select, act; the
/// previous action set is updated with the discounted best prediction of
/// the current state, the final one with the goal reward. Ends on the goal
/// or after `max_steps_per_episode` steps (truncation drops the pending
/// update).
pub fn multi_step_episode<R: Rng>(
    engine: &mut XcsEngine,
    grid: &Grid,
    mode: EpisodeMode,
    rng: &mut R,
) -> Result<EpisodeOutcome> {
    let max_steps = engine.params().max_steps_per_episode;
    let discount = engine.params().discount;
    let learning = matches!(mode, EpisodeMode::Learn(_));
    let selection = match mode {
        EpisodeMode::Learn(m) => m,
        EpisodeMode::Test => SelectionMode::Exploit,
    };
    let mut pos = grid.random_empty_cell(rng);
    let mut previous: Option<(ActionSet, f64, Bitstring, f64)> = None;
    let mut error_sum = 0.0;
    let mut error_count = 0u32;
    let mut steps = 0u32;
    loop {
        let input = grid.sense(pos)?;
        let decision = engine.decide(&input, selection, rng)?;
        let (next_pos, reward, done) = grid.act(pos, decision.action)?;
        steps += 1;
        let chosen_value = decision
            .prediction_array
            .value(decision.action)
            .unwrap_or(0.0);
        if let Some((prev_set, prev_reward, prev_input, prev_value)) = previous.take() {
            let target = compute_target(prev_reward, Some(&decision.prediction_array), discount);
            error_sum += (target - prev_value).abs();
            error_count += 1;
            if learning {
                engine.reinforce(&prev_set, target, &prev_input, rng);
            }
        }
        if done {
            error_sum += (reward - chosen_value).abs();
            error_count += 1;
            if learning {
                engine.reinforce(&decision.action_set, reward, &input, rng);
            }
            return Ok(EpisodeOutcome {
                steps,
                reached_goal: true,
                mean_error: error_sum / f64::from(error_count),
            });
        }
        if steps >= max_steps {
            let mean_error = if error_count == 0 {
                0.0
            } else {
                error_sum / f64::from(error_count)
            };
            return Ok(EpisodeOutcome {
                steps,
                reached_goal: false,
                mean_error,
            });
        }
        previous = Some((decision.action_set, reward, input, chosen_value));
        pos = next_pos;
    }
}

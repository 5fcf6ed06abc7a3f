//! The XCS performance and discovery loop: match-set construction,
//! prediction array, action selection, reinforcement updates, the
//! steady-state niched GA, deletion, and subsumption.
//!
//! Update formulas follow the standard algorithmic description of XCS:
//! MAM estimates (running mean over the first 1/beta updates, Widrow-Hoff
//! afterwards), accuracy-based fitness sharing inside the action set, and
//! the action-set-size-weighted deletion vote with a low-fitness penalty.

use rand::Rng;

use crate::classifier::Classifier;
use crate::condition::Bitstring;
use crate::error::{Error, Result};
use crate::niche::{stamp_action_set, StampHistory};
use crate::params::Parameters;
use crate::population::{ClassifierId, Population};

/// Classifiers matching the current input.
#[derive(Clone, Debug)]
pub struct MatchSet {
    pub members: Vec<ClassifierId>,
}

/// Match-set classifiers advocating the selected action.
#[derive(Clone, Debug)]
pub struct ActionSet {
    pub action: usize,
    pub members: Vec<ClassifierId>,
}

/// Fitness-weighted payoff estimate per action; `None` where no match-set
/// classifier advocates the action.
#[derive(Clone, Debug, PartialEq)]
pub struct PredictionArray {
    values: Vec<Option<f64>>,
}

impl PredictionArray {
    pub fn value(&self, action: usize) -> Option<f64> {
        self.values.get(action).copied().flatten()
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    pub fn num_actions(&self) -> usize {
        self.values.len()
    }

    pub fn present_actions(&self) -> impl Iterator<Item = usize> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_some())
            .map(|(a, _)| a)
    }

    /// Highest estimate among advocated actions.
    pub fn best_value(&self) -> Option<f64> {
        self.values
            .iter()
            .flatten()
            .copied()
            .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))))
    }
}

/// Action-selection policy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SelectionMode {
    /// Uniform over advocated actions.
    Explore,
    /// Highest prediction, uniform tie-break.
    Exploit,
    /// Random with probability `p_explore`, otherwise exploit.
    Biased,
}

/// Builds the match set for `input`, covering until every action is
/// advocated. Covering inserts a random matching classifier for a missing
/// action; if the insertion overflows the budget, deletion runs and the
/// match set is formed again from scratch.
pub fn generate_match_set<R: Rng>(
    population: &mut Population,
    input: &Bitstring,
    t: u64,
    num_actions: usize,
    params: &Parameters,
    rng: &mut R,
) -> MatchSet {
    loop {
        let members = population.matching(input);
        let mut advocated = vec![false; num_actions];
        for &id in &members {
            advocated[population.get(id).expect("match-set id is live").action] = true;
        }
        let missing: Vec<usize> = (0..num_actions).filter(|&a| !advocated[a]).collect();
        if missing.is_empty() {
            return MatchSet { members };
        }
        let action = missing[rng.random_range(0..missing.len())];
        population.insert(Classifier::covering(input, action, t, params, rng));
        delete_from_population(population, params, rng);
    }
}

/// Fitness-weighted average prediction per advocated action.
pub fn compute_prediction_array(
    population: &Population,
    match_set: &MatchSet,
    num_actions: usize,
) -> PredictionArray {
    let mut weighted = vec![0.0f64; num_actions];
    let mut weight = vec![0.0f64; num_actions];
    let mut plain = vec![0.0f64; num_actions];
    let mut advocates = vec![0u32; num_actions];
    for &id in &match_set.members {
        let cl = population.get(id).expect("match-set id is live");
        let w = cl.fitness * f64::from(cl.numerosity);
        weighted[cl.action] += cl.prediction * w;
        weight[cl.action] += w;
        plain[cl.action] += cl.prediction;
        advocates[cl.action] += 1;
    }
    let values = (0..num_actions)
        .map(|a| {
            if advocates[a] == 0 {
                None
            } else if weight[a] > 0.0 {
                Some(weighted[a] / weight[a])
            } else {
                // Fitness weights underflowed; fall back to the plain mean.
                Some(plain[a] / f64::from(advocates[a]))
            }
        })
        .collect();
    PredictionArray { values }
}

/// Picks an action from the prediction array according to `mode`.
pub fn select_action<R: Rng>(
    prediction_array: &PredictionArray,
    mode: SelectionMode,
    explore_prob: f64,
    rng: &mut R,
) -> Result<usize> {
    let present: Vec<usize> = prediction_array.present_actions().collect();
    if present.is_empty() {
        return Err(Error::EmptyPredictionArray);
    }
    let explore = |rng: &mut R| present[rng.random_range(0..present.len())];
    let exploit = |rng: &mut R| {
        let best = prediction_array.best_value().expect("present action exists");
        let ties: Vec<usize> = present
            .iter()
            .copied()
            .filter(|&a| prediction_array.value(a) == Some(best))
            .collect();
        ties[rng.random_range(0..ties.len())]
    };
    Ok(match mode {
        SelectionMode::Explore => explore(rng),
        SelectionMode::Exploit => exploit(rng),
        SelectionMode::Biased => {
            if rng.random::<f64>() < explore_prob {
                explore(rng)
            } else {
                exploit(rng)
            }
        }
    })
}

/// Filters the match set down to `action` and stamps the members with the
/// current time (updating `ats` and the stamp history).
pub fn generate_action_set(
    population: &mut Population,
    match_set: &MatchSet,
    action: usize,
    t: u64,
    params: &Parameters,
) -> Result<ActionSet> {
    let members: Vec<ClassifierId> = match_set
        .members
        .iter()
        .copied()
        .filter(|&id| population.get(id).is_some_and(|cl| cl.action == action))
        .collect();
    debug_assert!(!members.is_empty(), "selected action has no advocate");
    stamp_action_set(population, &members, t, params.stamp_capacity())?;
    Ok(ActionSet { action, members })
}

/// Reinforces an action set toward `target`.
///
/// Per member: experience, then error (against the old prediction), then
/// prediction, then action-set size, each by the MAM rule; finally shared
/// accuracy-based fitness. With gradient descent enabled the prediction
/// rate is scaled by the member's relative fitness share in the set.
pub fn update_action_set(
    population: &mut Population,
    set: &ActionSet,
    target: f64,
    params: &Parameters,
) {
    let live: Vec<ClassifierId> = set
        .members
        .iter()
        .copied()
        .filter(|&id| population.contains(id))
        .collect();
    if live.is_empty() {
        return;
    }
    let beta = params.learning_rate;
    let set_numerosity: f64 = live
        .iter()
        .map(|&id| f64::from(population.get(id).unwrap().numerosity))
        .sum();
    let fitness_total: f64 = live
        .iter()
        .map(|&id| {
            let cl = population.get(id).unwrap();
            cl.fitness * f64::from(cl.numerosity)
        })
        .sum();

    for &id in &live {
        let cl = population.get_mut(id).unwrap();
        cl.experience += 1;
        let rate = if (cl.experience as f64) * beta < 1.0 {
            1.0 / cl.experience as f64
        } else {
            beta
        };
        cl.error += rate * ((target - cl.prediction).abs() - cl.error);
        let prediction_rate = if params.gradient_descent && fitness_total > 0.0 {
            rate * cl.fitness * f64::from(cl.numerosity) / fitness_total
        } else {
            rate
        };
        cl.prediction += prediction_rate * (target - cl.prediction);
        cl.action_set_size += rate * (set_numerosity - cl.action_set_size);
    }

    let weighted_accuracy: Vec<f64> = live
        .iter()
        .map(|&id| {
            let cl = population.get(id).unwrap();
            classifier_accuracy(cl, params) * f64::from(cl.numerosity)
        })
        .collect();
    let accuracy_total: f64 = weighted_accuracy.iter().sum();
    for (&id, &weighted) in live.iter().zip(&weighted_accuracy) {
        let cl = population.get_mut(id).unwrap();
        cl.fitness += beta * (weighted / accuracy_total - cl.fitness);
    }
}

/// Accuracy kappa: 1 below the error threshold, a steep power falloff above.
pub fn classifier_accuracy(cl: &Classifier, params: &Parameters) -> f64 {
    if cl.error < params.error_threshold {
        1.0
    } else {
        params.accuracy_falloff
            * (cl.error / params.error_threshold).powf(-params.accuracy_exponent)
    }
}

/// Q-learning style backup: the immediate reward for single-step or
/// terminal transitions, otherwise the reward plus the discounted best
/// prediction of the successor state.
pub fn compute_target(reward: f64, next: Option<&PredictionArray>, discount: f64) -> f64 {
    match next.and_then(PredictionArray::best_value) {
        Some(best) => reward + discount * best,
        None => reward,
    }
}

/// Runs the steady-state GA on an action set if enough time has passed.
///
/// Two parents are drawn by fitness-proportionate roulette, cloned, crossed
/// over with probability chi (two-point, conditions only), and mutated
/// toward the triggering input. Offspring start with the parents' mean
/// prediction and error and a tenth of their mean fitness. With GA
/// subsumption an offspring covered by an accurate, experienced, more
/// general parent turns into a numerosity increment instead of an
/// insertion. Deletion restores the budget afterwards.
pub fn run_ga<R: Rng>(
    population: &mut Population,
    set: &ActionSet,
    input: &Bitstring,
    t: u64,
    params: &Parameters,
    rng: &mut R,
) {
    let live: Vec<ClassifierId> = set
        .members
        .iter()
        .copied()
        .filter(|&id| population.contains(id))
        .collect();
    if live.is_empty() {
        return;
    }
    let mut stamp_sum = 0.0;
    let mut numerosity_sum = 0.0;
    for &id in &live {
        let cl = population.get(id).unwrap();
        stamp_sum += cl.ga_stamp as f64 * f64::from(cl.numerosity);
        numerosity_sum += f64::from(cl.numerosity);
    }
    if t as f64 - stamp_sum / numerosity_sum <= params.ga_threshold {
        return;
    }
    for &id in &live {
        population.get_mut(id).unwrap().ga_stamp = t;
    }

    let parent_a = roulette_by_fitness(population, &live, rng);
    let parent_b = roulette_by_fitness(population, &live, rng);
    let mut child_a = offspring_of(population.get(parent_a).unwrap(), t);
    let mut child_b = offspring_of(population.get(parent_b).unwrap(), t);
    if rng.random::<f64>() < params.crossover_prob {
        crate::condition::TernaryCondition::two_point_crossover(
            &mut child_a.condition,
            &mut child_b.condition,
            rng,
        );
    }
    let (pa, pb) = (
        population.get(parent_a).unwrap(),
        population.get(parent_b).unwrap(),
    );
    let mean_prediction = (pa.prediction + pb.prediction) / 2.0;
    let mean_error = (pa.error + pb.error) / 2.0;
    let mean_fitness = (pa.fitness + pb.fitness) / 2.0;
    for child in [&mut child_a, &mut child_b] {
        child.prediction = mean_prediction;
        child.error = mean_error;
        child.fitness = 0.1 * mean_fitness;
    }

    for mut child in [child_a, child_b] {
        child.condition.mutate_toward(input, params.mutation_prob, rng);
        let absorbed = params.ga_subsumption
            && [parent_a, parent_b].into_iter().any(|pid| {
                let absorbs = population
                    .get(pid)
                    .is_some_and(|parent| does_subsume(parent, &child, params));
                if absorbs {
                    population.bump_numerosity(pid, 1);
                }
                absorbs
            });
        if !absorbed {
            population.insert(child);
        }
    }
    delete_from_population(population, params, rng);
}

fn offspring_of(parent: &Classifier, t: u64) -> Classifier {
    Classifier {
        condition: parent.condition,
        action: parent.action,
        prediction: parent.prediction,
        error: parent.error,
        fitness: parent.fitness,
        experience: 0,
        ga_stamp: t,
        action_set_size: parent.action_set_size,
        numerosity: 1,
        ats: 0,
        history: StampHistory::new(),
    }
}

fn roulette_by_fitness<R: Rng>(
    population: &Population,
    ids: &[ClassifierId],
    rng: &mut R,
) -> ClassifierId {
    let total: f64 = ids
        .iter()
        .map(|&id| population.get(id).unwrap().fitness)
        .sum();
    let mut point = rng.random::<f64>() * total;
    for &id in ids {
        point -= population.get(id).unwrap().fitness;
        if point <= 0.0 {
            return id;
        }
    }
    *ids.last().expect("roulette over non-empty set")
}

/// True if `subsumer` may absorb `candidate`: same action, experienced
/// beyond theta_sub, accurate, and strictly more general.
pub fn does_subsume(subsumer: &Classifier, candidate: &Classifier, params: &Parameters) -> bool {
    subsumer.action == candidate.action
        && could_subsume(subsumer, params)
        && subsumer
            .condition
            .is_more_general(&candidate.condition)
            .unwrap_or(false)
}

fn could_subsume(cl: &Classifier, params: &Parameters) -> bool {
    cl.experience > params.subsumption_threshold && cl.error < params.error_threshold
}

/// Removes micro rules by roulette until the numerosity budget holds.
///
/// The vote is `action_set_size * numerosity`, inflated by
/// `mean_fitness / (fitness / numerosity)` for experienced classifiers whose
/// per-micro fitness falls below `delta` times the population mean.
pub fn delete_from_population<R: Rng>(
    population: &mut Population,
    params: &Parameters,
    rng: &mut R,
) {
    while population.total_numerosity() > u64::from(params.population_limit) {
        let fitness_sum: f64 = population.iter().map(|(_, cl)| cl.fitness).sum();
        let mean_fitness = fitness_sum / population.total_numerosity() as f64;
        let votes: Vec<(ClassifierId, f64)> = population
            .iter()
            .map(|(id, cl)| (id, deletion_vote(cl, mean_fitness, params)))
            .collect();
        let total: f64 = votes.iter().map(|(_, v)| v).sum();
        let mut point = rng.random::<f64>() * total;
        let mut victim = votes.last().expect("population is over budget").0;
        for &(id, vote) in &votes {
            point -= vote;
            if point <= 0.0 {
                victim = id;
                break;
            }
        }
        population.decrement(victim);
    }
}

fn deletion_vote(cl: &Classifier, mean_fitness: f64, params: &Parameters) -> f64 {
    let mut vote = cl.action_set_size * f64::from(cl.numerosity);
    let per_micro = cl.fitness / f64::from(cl.numerosity);
    if cl.experience > params.deletion_threshold
        && per_micro < params.deletion_fitness_fraction * mean_fitness
    {
        vote *= mean_fitness / per_micro;
    }
    vote
}

/// Action-set subsumption: when enabled, the most general accurate
/// experienced member absorbs every member it is more general than.
/// Absorbed macroclassifiers leave the population; total numerosity is
/// conserved.
pub fn action_set_subsumption(population: &mut Population, set: &ActionSet, params: &Parameters) {
    if !params.action_set_subsumption {
        return;
    }
    let live: Vec<ClassifierId> = set
        .members
        .iter()
        .copied()
        .filter(|&id| population.contains(id))
        .collect();
    let mut best: Option<(u32, ClassifierId)> = None;
    for &id in &live {
        let cl = population.get(id).unwrap();
        if could_subsume(cl, params) {
            let wildcards = cl.condition.wildcard_count();
            if best.is_none_or(|(w, _)| wildcards > w) {
                best = Some((wildcards, id));
            }
        }
    }
    let Some((_, subsumer)) = best else {
        return;
    };
    for &id in &live {
        if id == subsumer || !population.contains(id) {
            continue;
        }
        let absorbs = {
            let general = population.get(subsumer).unwrap();
            let other = population.get(id).unwrap();
            general
                .condition
                .is_more_general(&other.condition)
                .unwrap_or(false)
        };
        if absorbs {
            let removed = population.remove(id).expect("id checked live");
            population.bump_numerosity(subsumer, removed.numerosity);
        }
    }
}

/// One XCS instance: population, parameters, and the action-set clock.
///
/// Single-threaded by design; run several instances in parallel for
/// batch experiments.
pub struct XcsEngine {
    population: Population,
    params: Parameters,
    input_len: usize,
    num_actions: usize,
    time: u64,
}

/// Outcome of one sense-match-select cycle.
pub struct Decision {
    pub action: usize,
    pub prediction_array: PredictionArray,
    pub action_set: ActionSet,
}

impl XcsEngine {
    pub fn new(input_len: usize, num_actions: usize, params: Parameters) -> Self {
        Self {
            population: Population::new(),
            params,
            input_len,
            num_actions,
            time: 0,
        }
    }

    pub fn population(&self) -> &Population {
        &self.population
    }

    pub fn population_mut(&mut self) -> &mut Population {
        &mut self.population
    }

    pub fn params(&self) -> &Parameters {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut Parameters {
        &mut self.params
    }

    /// Action-set formations so far; the unit of the ats/ts clock.
    pub fn time(&self) -> u64 {
        self.time
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn input_len(&self) -> usize {
        self.input_len
    }

    /// Switches the GA to condensation: crossover and mutation off, so
    /// offspring are exact parent copies that merge into existing
    /// numerosity and no new rule is created.
    pub fn enter_condensation(&mut self) {
        self.params.crossover_prob = 0.0;
        self.params.mutation_prob = 0.0;
    }

    /// One sense-match-select cycle: advances the clock, builds the match
    /// set (covering as needed), computes the prediction array, selects an
    /// action, and forms the stamped action set.
    pub fn decide<R: Rng>(
        &mut self,
        input: &Bitstring,
        mode: SelectionMode,
        rng: &mut R,
    ) -> Result<Decision> {
        debug_assert_eq!(input.len(), self.input_len);
        self.time += 1;
        let t = self.time;
        let match_set =
            generate_match_set(&mut self.population, input, t, self.num_actions, &self.params, rng);
        let prediction_array =
            compute_prediction_array(&self.population, &match_set, self.num_actions);
        let action = select_action(&prediction_array, mode, self.params.explore_prob, rng)?;
        let action_set = generate_action_set(&mut self.population, &match_set, action, t, &self.params)?;
        Ok(Decision {
            action,
            prediction_array,
            action_set,
        })
    }

    /// Reinforces an action set toward `target` and runs the GA for it.
    /// `context` is the input that formed the set (the niche the GA
    /// reproduces into).
    pub fn reinforce<R: Rng>(
        &mut self,
        set: &ActionSet,
        target: f64,
        context: &Bitstring,
        rng: &mut R,
    ) {
        update_action_set(&mut self.population, set, target, &self.params);
        action_set_subsumption(&mut self.population, set, &self.params);
        run_ga(&mut self.population, set, context, self.time, &self.params, rng);
    }
}

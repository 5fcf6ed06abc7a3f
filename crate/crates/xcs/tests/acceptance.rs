//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured values (run with `--nocapture` to see them on success).
//!
//! Criteria 2-5 run full 20-seed batches at the published problem scales;
//! per-problem settings beyond population size and learning-problem count
//! follow the conventional per-problem literature choices (see the shipped
//! config files).

use std::collections::BTreeSet;
use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use xcs::condition::{Bitstring, TernaryCondition};
use xcs::engine::{SelectionMode, XcsEngine};
use xcs::envs::{optimal_population, parse_grid, BooleanProblem};
use xcs::harness::{
    run_batch, run_single, BatchResult, ExperimentConfig, ExplorationMode, Problem,
};
use xcs::niche::{can, can_t, man, stamp_action_set, StampHistory};
use xcs::params::Parameters;
use xcs::population::Population;
use xcs::Classifier;

fn pass(criterion: &str, details: String) {
    println!("criterion {criterion}: PASS — {details}");
}

// ---------------------------------------------------------------------------
// Criterion 1 — optimal-population oracle sizes, zero tolerance.
// ---------------------------------------------------------------------------

#[test]
fn criterion_1_oracle_population_sizes() {
    let cases: [(&str, BooleanProblem, usize); 6] = [
        ("MP6", BooleanProblem::multiplexer(6).unwrap(), 16),
        ("MP11", BooleanProblem::multiplexer(11).unwrap(), 32),
        ("MAJ3", BooleanProblem::majority(3).unwrap(), 12),
        ("MAJ4", BooleanProblem::majority(4).unwrap(), 20),
        ("MAJ5", BooleanProblem::majority(5).unwrap(), 40),
        ("MAJ6", BooleanProblem::majority(6).unwrap(), 70),
    ];
    let mut sizes = Vec::new();
    for (name, problem, expected) in cases {
        let pairs = optimal_population(&problem).unwrap();
        assert_eq!(
            pairs.len(),
            expected,
            "criterion 1: FAIL — {name} oracle returned {} rules, expected {expected}",
            pairs.len()
        );
        sizes.push(format!("{name}={}", pairs.len()));
    }
    pass("1 (oracle |O|)", sizes.join(" "));
}

// ---------------------------------------------------------------------------
// Criterion 2 — MP6 end-to-end.
// ---------------------------------------------------------------------------

fn boolean_config(
    problem: BooleanProblem,
    n: u32,
    learning: u64,
    condensation: u64,
    tweak: impl Fn(&mut Parameters),
) -> ExperimentConfig {
    let mut params = Parameters::default();
    params.population_limit = n;
    tweak(&mut params);
    ExperimentConfig {
        label: problem.label(),
        problem: Problem::Boolean(problem),
        params,
        learning_problems: learning,
        condensation_problems: condensation,
        runs: 20,
        base_seed: 1,
        checkpoint_interval: 1000,
        exploration: ExplorationMode::Explore,
    }
}

fn final_window_mean(outcomes: &[f64], window: usize) -> f64 {
    let tail: Vec<f64> = outcomes.iter().rev().take(window).copied().collect();
    tail.iter().sum::<f64>() / tail.len() as f64
}

#[test]
fn criterion_2_mp6_end_to_end() {
    let config = boolean_config(
        BooleanProblem::multiplexer(6).unwrap(),
        400,
        10_000,
        10_000,
        |_| {},
    );
    let BatchResult { runs, aggregate } = run_batch(&config).unwrap();
    assert!(aggregate.pop_ac.mean <= aggregate.pop_bc.mean, "condensation must shrink |P|");
    let mut exact = 0;
    for run in &runs {
        let ac = &run.after_condensation;
        if ac.pop_macro == 16 && ac.can_size == 16 && (ac.man_mean - 16.0).abs() < 1e-9 {
            exact += 1;
            // Converged non-overlapping solution: MAN equals CAN exactly.
            assert!((ac.man_mean - ac.can_size as f64).abs() < 1e-9);
        }
        let perf = final_window_mean(&run.test_outcomes, 1000);
        assert_eq!(
            perf, 1.0,
            "criterion 2: FAIL — run {} exploit performance {perf} over final 1000 tests",
            run.run_index
        );
    }
    assert!(
        exact >= 18,
        "criterion 2: FAIL — only {exact}/20 runs reached |P|=|CAN|=MAN=16 exactly"
    );
    pass(
        "2 (MP6)",
        format!("{exact}/20 runs at |P|=|CAN|=MAN=16, exploit performance 100% in all runs"),
    );
}

// ---------------------------------------------------------------------------
// Criterion 3 — MP11 end-to-end.
// ---------------------------------------------------------------------------

#[test]
fn criterion_3_mp11_end_to_end() {
    let config = boolean_config(
        BooleanProblem::multiplexer(11).unwrap(),
        1000,
        20_000,
        20_000,
        |p| p.crossover_prob = 1.0,
    );
    let BatchResult { aggregate, .. } = run_batch(&config).unwrap();
    assert!(aggregate.pop_ac.mean <= aggregate.pop_bc.mean, "condensation must shrink |P|");
    let can = aggregate.can_ac;
    assert!(
        (can.mean - 32.0).abs() <= 0.5 && can.std <= 0.5,
        "criterion 3: FAIL — |CAN|_ac = {:.3} ± {:.3}, expected 32.0 with std <= 0.5",
        can.mean,
        can.std
    );
    pass(
        "3 (MP11)",
        format!("|CAN|_ac = {:.2} ± {:.2} over 20 runs", can.mean, can.std),
    );
}

// ---------------------------------------------------------------------------
// Criterion 4 — MAJ3 end-to-end.
// ---------------------------------------------------------------------------

#[test]
fn criterion_4_maj3_end_to_end() {
    let config = boolean_config(
        BooleanProblem::majority(3).unwrap(),
        500,
        10_000,
        10_000,
        |p| p.ga_subsumption = false,
    );
    let BatchResult { runs, aggregate } = run_batch(&config).unwrap();
    assert!(aggregate.pop_ac.mean <= aggregate.pop_bc.mean, "condensation must shrink |P|");
    let can = aggregate.can_ac;
    let man = aggregate.man_ac;
    assert!(
        (can.mean - 12.9).abs() <= 2.5,
        "criterion 4: FAIL — |CAN|_ac mean {:.3} outside 12.9 ± 2.5",
        can.mean
    );
    assert!(
        (man.mean - 15.9).abs() <= 5.0,
        "criterion 4: FAIL — |MAN|_ac mean {:.3} outside 15.9 ± 5.0",
        man.mean
    );
    let overlap_signature = runs
        .iter()
        .filter(|r| r.after_condensation.man_mean > r.after_condensation.can_size as f64)
        .count();
    assert!(
        overlap_signature >= 18,
        "criterion 4: FAIL — MAN > CAN in only {overlap_signature}/20 runs"
    );
    pass(
        "4 (MAJ3)",
        format!(
            "|CAN|_ac = {:.2} ± {:.2}, |MAN|_ac = {:.2} ± {:.2}, MAN > CAN in {overlap_signature}/20 runs",
            can.mean, can.std, man.mean, man.std
        ),
    );
}

// ---------------------------------------------------------------------------
// Criterion 5 — Woods1 multi-step.
// ---------------------------------------------------------------------------

#[test]
fn criterion_5_woods1_multi_step() {
    let text = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../maps/woods1.map"
    ))
    .unwrap();
    let grid = parse_grid(&text).unwrap();
    let optimal = grid.optimal_steps().unwrap();
    assert_eq!(optimal, 1.6875, "breadth-first oracle regression");

    let mut params = Parameters::default();
    params.population_limit = 800;
    let config = ExperimentConfig {
        problem: Problem::Grid(grid),
        label: "W1".into(),
        params,
        learning_problems: 5_000,
        condensation_problems: 2_500,
        runs: 20,
        base_seed: 1,
        checkpoint_interval: 500,
        exploration: ExplorationMode::Explore,
    };
    let BatchResult { runs, aggregate } = run_batch(&config).unwrap();
    assert!(aggregate.pop_ac.mean <= aggregate.pop_bc.mean, "condensation must shrink |P|");
    let pop = aggregate.pop_ac;
    let can = aggregate.can_ac;
    assert!(
        (pop.mean - 32.0).abs() <= 2.0,
        "criterion 5: FAIL — |P|_ac mean {:.3} outside 32 ± 2",
        pop.mean
    );
    assert!(
        (can.mean - 31.8).abs() <= 2.0,
        "criterion 5: FAIL — |CAN|_ac mean {:.3} outside 31.8 ± 2",
        can.mean
    );
    let mut worst: f64 = 0.0;
    for run in &runs {
        let steps = final_window_mean(&run.test_outcomes, 1000);
        let deviation = (steps - optimal).abs() / optimal;
        worst = worst.max(deviation);
        assert!(
            deviation <= 0.05,
            "criterion 5: FAIL — run {} exploit steps {steps:.4} deviates {:.1}% from optimal {optimal}",
            run.run_index,
            deviation * 100.0
        );
    }
    pass(
        "5 (Woods1)",
        format!(
            "|P|_ac = {:.2} ± {:.2}, |CAN|_ac = {:.2} ± {:.2}, exploit steps within {:.1}% of optimal {optimal}",
            pop.mean,
            pop.std,
            can.mean,
            can.std,
            worst * 100.0
        ),
    );
}

// ---------------------------------------------------------------------------
// Criterion 6 — the two-classifier overlapping-niche scenario.
// ---------------------------------------------------------------------------

#[test]
fn criterion_6_overlapping_pair_scenario() {
    let mut rng = ChaCha12Rng::seed_from_u64(0);
    let input: Bitstring = "000".parse().unwrap();
    let mut pop = Population::new();
    for (condition, stamps) in [("11#", vec![405u64, 400]), ("#11", vec![403, 400])] {
        let mut cl = Classifier::covering(&input, 1, 0, &Parameters::default(), &mut rng);
        cl.condition = condition.parse().unwrap();
        cl.experience = 10;
        cl.ats = stamps[0];
        cl.history = StampHistory::from_stamps(stamps).unwrap();
        pop.insert(cl);
    }
    let active = can(&pop);
    assert_eq!(active, BTreeSet::from([405, 403]), "criterion 6: FAIL — CAN");
    assert_eq!(
        can_t(&pop, 1),
        BTreeSet::from([400]),
        "criterion 6: FAIL — CAN_1"
    );
    let (mean, _) = man(&pop).unwrap();
    assert_eq!(mean, 1.5, "criterion 6: FAIL — MAN mean");
    pass(
        "6 (overlap scenario)",
        format!("|CAN| = {}, CAN_1 = {{400}}, MAN mean = {mean}", active.len()),
    );
}

// ---------------------------------------------------------------------------
// Criterion 7 — property suites.
// ---------------------------------------------------------------------------

/// Every condition of width `n`, as (care, value) mask pairs.
fn all_conditions(n: usize) -> Vec<TernaryCondition> {
    let full = (1u64 << n) - 1;
    let mut out = Vec::new();
    for care in 0..=full {
        let mut value = care;
        loop {
            out.push(TernaryCondition::from_masks(care, value, n).unwrap());
            if value == 0 {
                break;
            }
            value = (value - 1) & care;
        }
    }
    out
}

#[test]
fn criterion_7a_generality_implies_matching_exhaustive() {
    let mut pairs_checked = 0u64;
    for n in 1..=6usize {
        let conditions = all_conditions(n);
        for general in &conditions {
            for specific in &conditions {
                if !general.is_more_general(specific).unwrap() {
                    continue;
                }
                pairs_checked += 1;
                for bits in 0..(1u64 << n) {
                    let input = Bitstring::from_bits(bits, n).unwrap();
                    if specific.matches(&input).unwrap() {
                        assert!(
                            general.matches(&input).unwrap(),
                            "criterion 7: FAIL — {general} claims generality over {specific} but misses {input}"
                        );
                    }
                }
            }
        }
    }
    pass(
        "7a (generality/matching)",
        format!("exhaustive over widths 1..=6, {pairs_checked} ordered generality pairs"),
    );
}

#[test]
fn criterion_7b_budget_invariant_fuzzed() {
    let problem = BooleanProblem::majority(3).unwrap();
    let mut params = Parameters::default();
    params.population_limit = 40;
    let limit = u64::from(params.population_limit);
    let mut engine = XcsEngine::new(3, 2, params);
    let mut rng = ChaCha12Rng::seed_from_u64(2024);
    let mut cycles = 0u64;
    while cycles < 100_000 {
        let input = problem.random_input(&mut rng);
        let decision = engine.decide(&input, SelectionMode::Explore, &mut rng).unwrap();
        let reward = problem.reward(&input, decision.action).unwrap();
        engine.reinforce(&decision.action_set, reward, &input, &mut rng);
        cycles += 1;
        assert!(
            engine.population().total_numerosity() <= limit,
            "criterion 7: FAIL — budget exceeded after {cycles} GA/deletion cycles"
        );
    }
    pass(
        "7b (budget invariant)",
        format!("total numerosity <= N after each of {cycles} cycles"),
    );
}

#[test]
fn criterion_7c_stamp_history_fuzzed() {
    let mut rng = ChaCha12Rng::seed_from_u64(99);
    let input: Bitstring = "00000".parse().unwrap();
    let params = Parameters::default();
    let capacity = 7usize;
    let mut pop = Population::new();
    let ids: Vec<_> = (0..30u64)
        .map(|i| {
            let mut cl =
                Classifier::covering(&input, (i % 2) as usize, 0, &params, &mut rng);
            cl.condition = TernaryCondition::from_masks(0b11111, i, 5).unwrap();
            pop.insert(cl)
        })
        .collect();
    let mut t = 0u64;
    for _ in 0..10_000 {
        t += 1 + rng.random_range(0..3);
        let members: Vec<_> = ids
            .iter()
            .copied()
            .filter(|_| rng.random::<f64>() < 0.3)
            .collect();
        stamp_action_set(&mut pop, &members, t, capacity).unwrap();
        // An equal or older stamp must be rejected without mutating anything.
        if !members.is_empty() {
            assert!(stamp_action_set(&mut pop, &members, t, capacity).is_err());
        }
        for &id in &members {
            let cl = pop.get(id).unwrap();
            assert_eq!(cl.ats, t);
            assert_eq!(cl.history.newest(), Some(t));
        }
    }
    for &id in &ids {
        let cl = pop.get(id).unwrap();
        assert!(cl.history.len() <= capacity, "criterion 7: FAIL — history over capacity");
        let stamps: Vec<u64> = cl.history.iter().collect();
        for pair in stamps.windows(2) {
            assert!(
                pair[0] > pair[1],
                "criterion 7: FAIL — history not strictly decreasing: {stamps:?}"
            );
        }
        if let Some(front) = cl.history.newest() {
            assert_eq!(front, cl.ats);
        }
    }
    pass(
        "7c (stamp history)",
        "bounded, strictly decreasing, front = ats under 10000 fuzzed stampings".into(),
    );
}

#[test]
fn criterion_7d_determinism() {
    let config = boolean_config(
        BooleanProblem::multiplexer(6).unwrap(),
        150,
        1000,
        1000,
        |_| {},
    );
    let a = run_batch(&config).unwrap();
    let b = run_batch(&config).unwrap();
    for (ra, rb) in a.runs.iter().zip(&b.runs) {
        assert_eq!(ra.dump_before, rb.dump_before, "criterion 7: FAIL — dumps differ");
        assert_eq!(ra.dump_after, rb.dump_after, "criterion 7: FAIL — dumps differ");
        assert_eq!(ra.stats_csv(), rb.stats_csv(), "criterion 7: FAIL — stats differ");
    }
    assert_eq!(a.aggregate.csv(), b.aggregate.csv());
    pass(
        "7d (determinism)",
        "two identical seeded batches produced byte-identical dumps and CSVs".into(),
    );
}

#[test]
fn criterion_7e_condensation_monotonicity() {
    let problem = BooleanProblem::multiplexer(6).unwrap();
    let mut params = Parameters::default();
    params.population_limit = 400;
    let mut engine = XcsEngine::new(6, 2, params);
    let mut rng = ChaCha12Rng::seed_from_u64(7);
    for _ in 0..5000 {
        let input = problem.random_input(&mut rng);
        let decision = engine.decide(&input, SelectionMode::Explore, &mut rng).unwrap();
        let reward = problem.reward(&input, decision.action).unwrap();
        engine.reinforce(&decision.action_set, reward, &input, &mut rng);
    }
    engine.enter_condensation();
    for i in 0..20_000 {
        let input = problem.random_input(&mut rng);
        let decision = engine.decide(&input, SelectionMode::Explore, &mut rng).unwrap();
        let before = engine.population().macro_count();
        let reward = problem.reward(&input, decision.action).unwrap();
        engine.reinforce(&decision.action_set, reward, &input, &mut rng);
        let after = engine.population().macro_count();
        assert!(
            after <= before,
            "criterion 7: FAIL — condensation grew distinct rules {before} -> {after} at step {i}"
        );
    }
    pass(
        "7e (condensation monotonicity)",
        "distinct (condition, action) count never grew over 20000 condensation problems".into(),
    );
}

// ---------------------------------------------------------------------------
// Criterion 8 — configs shipped for the scales that are out of desk reach.
// ---------------------------------------------------------------------------

#[test]
fn criterion_8_full_scale_configs_are_shipped() {
    let configs = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs");
    let mut missing = Vec::new();
    for name in [
        "mp6.conf", "mp11.conf", "mp20.conf", "mp37.conf", "maj3.conf", "maj4.conf",
        "maj5.conf", "maj6.conf", "maj7.conf", "maj8.conf", "maj9.conf", "maj10.conf",
        "woods1.conf", "woods2.conf", "woods14.conf", "maze4.conf", "maze5.conf", "maze6.conf",
    ] {
        if !std::path::Path::new(configs).join(name).exists() {
            missing.push(name);
        }
    }
    assert!(
        missing.is_empty(),
        "criterion 8: FAIL — missing config files: {missing:?}"
    );
    pass(
        "8 (shipped configs)",
        "full-scale experiment configs present; acceptance rests on criteria 1-7".into(),
    );
}

// ---------------------------------------------------------------------------
// Supporting checks used by the criteria above.
// ---------------------------------------------------------------------------

/// MP-family final checkpoint: MAN equals CAN once converged and
/// non-overlapping; checked on a single small run so the property is
/// exercised outside the big batches too.
#[test]
fn converged_multiplexer_man_equals_can() {
    let config = boolean_config(
        BooleanProblem::multiplexer(6).unwrap(),
        400,
        10_000,
        10_000,
        |_| {},
    );
    let stats = run_single(&config, 3).unwrap();
    let ac = &stats.after_condensation;
    assert_eq!(ac.can_size, 16);
    assert!((ac.man_mean - ac.can_size as f64).abs() < 1e-9);
    assert_eq!(ac.man_std, 0.0);
}

/// The union of niche members over CAN covers every experienced classifier
/// whose history intersects CAN.
#[test]
fn niche_members_cover_all_active_histories() {
    let config = boolean_config(BooleanProblem::majority(3).unwrap(), 100, 1000, 0, |_| {});
    let stats = run_single(&config, 0).unwrap();
    let (pop, _, _) = Population::parse_dump(stats.dump_before.as_bytes()).unwrap();
    let active = can(&pop);
    let mut covered: HashMap<String, bool> = HashMap::new();
    for (_, cl) in pop.iter() {
        if cl.is_experienced() && cl.history.iter().any(|v| active.contains(&v)) {
            covered.insert(cl.dump_line(), false);
        }
    }
    for &ats in &active {
        for member in xcs::niche::niche_members(&pop, ats).members {
            for (_, cl) in pop.iter() {
                if cl.condition == member.condition && cl.action == member.action {
                    covered.insert(cl.dump_line(), true);
                }
            }
        }
    }
    assert!(
        covered.values().all(|&v| v),
        "a classifier with an active stamp is missing from every snapshot"
    );
}

//! Brute-force optimal-population oracle for small Boolean problems.
//!
//! A (condition, action) pair is accurate when the function is constant on
//! the condition's matched inputs (so the pair earns a constant reward), and
//! maximally general when no one-position generalization stays accurate.
//! The optimal population is a minimum-cardinality set of such pairs that
//! still maps every (input, action): essential conditions first, exact
//! set-cover search for whatever remains.

use std::collections::HashMap;

use crate::condition::{Bitstring, TernaryCondition};
use crate::envs::BooleanProblem;
use crate::error::{Error, Result};

/// Enumeration bound: 3^n conditions with up to 2^n matched inputs each.
pub const ORACLE_MAX_BITS: usize = 13;

/// One oracle rule with the constant payoff it maps.
#[derive(Clone, Debug, PartialEq)]
pub struct OraclePair {
    pub condition: TernaryCondition,
    pub action: usize,
    pub payoff: f64,
}

/// Raw condition as (care, value) masks with the constant function value on
/// its matched set.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
struct RawCondition {
    care: u64,
    value: u64,
}

fn truth_table(problem: &BooleanProblem) -> Result<Vec<bool>> {
    let n = problem.n_bits();
    let mut table = Vec::with_capacity(1 << n);
    for bits in 0..(1u64 << n) {
        table.push(problem.eval(&Bitstring::from_bits(bits, n)?)?);
    }
    Ok(table)
}

/// All conditions on which the function is constant, with that value.
fn accurate_conditions(n: usize, table: &[bool]) -> HashMap<RawCondition, bool> {
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut accurate = HashMap::new();
    for care in 0..=full {
        let wild = full & !care;
        // All value assignments of the cared positions (submasks of care).
        let mut value = care;
        loop {
            let first = table[(value) as usize];
            let mut constant = true;
            // All completions of the wildcard positions (submasks of wild).
            let mut filler = wild;
            loop {
                if table[(value | filler) as usize] != first {
                    constant = false;
                    break;
                }
                if filler == 0 {
                    break;
                }
                filler = (filler - 1) & wild;
            }
            if constant {
                accurate.insert(RawCondition { care, value }, first);
            }
            if value == 0 {
                break;
            }
            value = (value - 1) & care;
        }
    }
    accurate
}

/// Accurate conditions with no accurate one-position generalization,
/// partitioned by function value.
fn maximal_conditions(n: usize, accurate: &HashMap<RawCondition, bool>) -> Vec<(RawCondition, bool)> {
    let mut out: Vec<(RawCondition, bool)> = accurate
        .iter()
        .filter(|(cond, _)| {
            (0..n).all(|p| {
                let bit = 1u64 << p;
                if cond.care & bit == 0 {
                    return true;
                }
                let generalized = RawCondition {
                    care: cond.care & !bit,
                    value: cond.value & !bit,
                };
                !accurate.contains_key(&generalized)
            })
        })
        .map(|(cond, value)| (*cond, *value))
        .collect();
    out.sort_by_key(|(cond, _)| (cond.care, cond.value));
    out
}

/// Every accurate, maximally general (condition, action) pair — the full
/// antichain, including rules redundant for a complete map.
pub fn maximally_general_pairs(problem: &BooleanProblem) -> Result<Vec<OraclePair>> {
    let n = problem.n_bits();
    if n > ORACLE_MAX_BITS {
        return Err(Error::OracleSizeBound {
            got: n,
            max: ORACLE_MAX_BITS,
        });
    }
    let table = truth_table(problem)?;
    let accurate = accurate_conditions(n, &table);
    Ok(pairs_from(maximal_conditions(n, &accurate), n))
}

/// The optimal population: a minimum set of accurate, maximally general
/// pairs forming a complete (input, action) map. Its size is the minimum
/// number of niches needed to represent the optimal solution.
pub fn optimal_population(problem: &BooleanProblem) -> Result<Vec<OraclePair>> {
    let n = problem.n_bits();
    if n > ORACLE_MAX_BITS {
        return Err(Error::OracleSizeBound {
            got: n,
            max: ORACLE_MAX_BITS,
        });
    }
    let table = truth_table(problem)?;
    let accurate = accurate_conditions(n, &table);
    let maximal = maximal_conditions(n, &accurate);

    // Since every condition pairs with both actions, a minimum complete map
    // is twice a minimum cover of the inputs; the two polarities cover
    // disjoint input sets and reduce independently.
    let mut chosen = Vec::new();
    for polarity in [false, true] {
        let conditions: Vec<RawCondition> = maximal
            .iter()
            .filter(|(_, v)| *v == polarity)
            .map(|(c, _)| *c)
            .collect();
        let inputs: Vec<u64> = (0..(1u64 << n)).filter(|&i| table[i as usize] == polarity).collect();
        let cover = minimum_cover(&conditions, &inputs);
        chosen.extend(cover.into_iter().map(|c| (c, polarity)));
    }
    chosen.sort_by_key(|(cond, _)| (cond.care, cond.value));
    Ok(pairs_from(chosen, n))
}

fn pairs_from(conditions: Vec<(RawCondition, bool)>, n: usize) -> Vec<OraclePair> {
    let mut pairs = Vec::with_capacity(conditions.len() * 2);
    for (raw, value) in conditions {
        let condition = TernaryCondition::from_masks(raw.care, raw.value, n)
            .expect("width validated by caller");
        for action in 0..2usize {
            let payoff = if (action == 1) == value { 1000.0 } else { 0.0 };
            pairs.push(OraclePair {
                condition,
                action,
                payoff,
            });
        }
    }
    pairs.sort_by(|a, b| {
        a.condition
            .to_string()
            .cmp(&b.condition.to_string())
            .then(a.action.cmp(&b.action))
    });
    pairs
}

fn covers(cond: &RawCondition, input: u64) -> bool {
    (input ^ cond.value) & cond.care == 0
}

/// Minimum-cardinality subset of `conditions` covering all `inputs`:
/// essential conditions (sole coverer of some input) first, then exact
/// branch-and-bound on the residue.
fn minimum_cover(conditions: &[RawCondition], inputs: &[u64]) -> Vec<RawCondition> {
    let mut coverers: Vec<Vec<usize>> = inputs
        .iter()
        .map(|&input| {
            (0..conditions.len())
                .filter(|&c| covers(&conditions[c], input))
                .collect()
        })
        .collect();

    let mut selected = vec![false; conditions.len()];
    let mut uncovered: Vec<usize> = (0..inputs.len()).collect();
    loop {
        let essentials: Vec<usize> = uncovered
            .iter()
            .filter(|&&i| coverers[i].len() == 1)
            .map(|&i| coverers[i][0])
            .collect();
        if essentials.is_empty() {
            break;
        }
        for c in essentials {
            selected[c] = true;
        }
        uncovered.retain(|&i| !coverers[i].iter().any(|&c| selected[c]));
    }

    if !uncovered.is_empty() {
        // Exact search over the residue, branching on the input with the
        // fewest remaining coverers.
        for i in &uncovered {
            coverers[*i].retain(|&c| !selected[c]);
        }
        let residue: Vec<Vec<usize>> = uncovered.iter().map(|&i| coverers[i].clone()).collect();
        let mut best: Option<Vec<usize>> = None;
        let mut current = Vec::new();
        branch(&residue, &mut current, &mut best);
        for c in best.expect("maximal accurate conditions cover all inputs") {
            selected[c] = true;
        }
    }

    (0..conditions.len())
        .filter(|&c| selected[c])
        .map(|c| conditions[c])
        .collect()
}

fn branch(residue: &[Vec<usize>], current: &mut Vec<usize>, best: &mut Option<Vec<usize>>) {
    if best.as_ref().is_some_and(|b| current.len() >= b.len()) {
        return;
    }
    let next = residue
        .iter()
        .filter(|coverers| !coverers.iter().any(|c| current.contains(c)))
        .min_by_key(|coverers| coverers.len());
    let Some(choices) = next else {
        *best = Some(current.clone());
        return;
    };
    for &c in choices {
        current.push(c);
        branch(residue, current, best);
        current.pop();
    }
}

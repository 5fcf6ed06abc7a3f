//! Active-niche identification and tracking.
//!
//! Every time an action set forms, its members receive the current time as
//! their action-set stamp (`ats`) and the value is pushed onto a bounded
//! LIFO history. The distinct stamps of experienced classifiers identify the
//! currently active niches (CAN); position `t` of the histories yields the
//! active-niche snapshot `t` stamps back (CAN_t); averaging snapshot sizes
//! over the recorded history estimates the mean number of active niches
//! (MAN), which stays informative when classifiers overlap and share stamps.
//!
//! Classifiers with zero experience have never been reinforced in an action
//! set and are excluded from every statistic here.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt::Write as _;

use crate::condition::TernaryCondition;
use crate::envs::BooleanProblem;
use crate::error::{Error, Result};
use crate::population::{ClassifierId, Population};

/// Bounded LIFO of action-set stamps, newest first.
///
/// Strictly decreasing front to back: each pushed stamp exceeds all stored
/// ones, so position `t` always holds the stamp from `t` formations ago.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StampHistory {
    stamps: VecDeque<u64>,
}

impl StampHistory {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a history from newest-first values, validating strict decrease.
    pub fn from_stamps(values: Vec<u64>) -> Result<Self> {
        for pair in values.windows(2) {
            if pair[1] >= pair[0] {
                return Err(Error::NonMonotoneStamp {
                    t: pair[1],
                    ats: pair[0],
                });
            }
        }
        Ok(Self {
            stamps: values.into(),
        })
    }

    /// Pushes a new stamp to the front, evicting the oldest beyond `capacity`.
    pub fn push(&mut self, t: u64, capacity: usize) {
        debug_assert!(self.stamps.front().is_none_or(|&front| t > front));
        self.stamps.push_front(t);
        self.stamps.truncate(capacity);
    }

    /// Stamp recorded `index` formations ago (0 = newest).
    pub fn get(&self, index: usize) -> Option<u64> {
        self.stamps.get(index).copied()
    }

    pub fn newest(&self) -> Option<u64> {
        self.stamps.front().copied()
    }

    pub fn len(&self) -> usize {
        self.stamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stamps.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.stamps.iter().copied()
    }

    pub fn contains(&self, value: u64) -> bool {
        self.stamps.contains(&value)
    }
}

/// Stamps every member of an action set with the current time.
///
/// Sets each member's `ats` to `t` and pushes `t` onto its history,
/// truncated to `capacity`. The clock must be monotone: `t` has to exceed
/// every member's current stamp or no member is modified.
pub fn stamp_action_set(
    population: &mut Population,
    members: &[ClassifierId],
    t: u64,
    capacity: usize,
) -> Result<()> {
    for &id in members {
        if let Some(cl) = population.get(id) {
            if t <= cl.ats {
                return Err(Error::NonMonotoneStamp { t, ats: cl.ats });
            }
        }
    }
    for &id in members {
        if let Some(cl) = population.get_mut(id) {
            if cl.ats == t {
                // Duplicate id in `members`; already stamped by this call.
                continue;
            }
            cl.ats = t;
            cl.history.push(t, capacity);
        }
    }
    Ok(())
}

/// Currently active niches: distinct `ats` values of experienced classifiers.
pub fn can(population: &Population) -> BTreeSet<u64> {
    population
        .iter()
        .filter(|(_, cl)| cl.is_experienced())
        .map(|(_, cl)| cl.ats)
        .collect()
}

/// Active niches `index` stamp-formations ago: distinct history values at
/// position `index` over experienced classifiers whose history is long enough.
pub fn can_t(population: &Population, index: usize) -> BTreeSet<u64> {
    population
        .iter()
        .filter(|(_, cl)| cl.is_experienced())
        .filter_map(|(_, cl)| cl.history.get(index))
        .collect()
}

/// Mean and population standard deviation of `|can_t|` over the recorded
/// history, where the horizon is the longest history among experienced
/// classifiers. Shorter histories simply drop out of older snapshots, which
/// keeps the estimate defined during early learning and converges to the
/// fixed-horizon formula once all histories are full.
pub fn man(population: &Population) -> Result<(f64, f64)> {
    let horizon = population
        .iter()
        .filter(|(_, cl)| cl.is_experienced())
        .map(|(_, cl)| cl.history.len())
        .max()
        .unwrap_or(0);
    if horizon == 0 {
        return Err(Error::NoActiveNiches);
    }
    let sizes: Vec<f64> = (0..horizon)
        .map(|t| can_t(population, t).len() as f64)
        .collect();
    let mean = sizes.iter().sum::<f64>() / horizon as f64;
    let var = sizes.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / horizon as f64;
    Ok((mean, var.sqrt()))
}

/// One member of a niche-composition snapshot.
#[derive(Clone, Debug, PartialEq)]
pub struct NicheMember {
    pub condition: TernaryCondition,
    pub action: usize,
    pub prediction: f64,
    pub fitness: f64,
    pub numerosity: u32,
}

/// The classifiers whose histories contain one niche identifier.
#[derive(Clone, Debug, PartialEq)]
pub struct NicheSnapshot {
    pub ats_value: u64,
    pub members: Vec<NicheMember>,
    pub total_numerosity: u64,
}

/// Composition of the niche identified by `ats_value`: every experienced
/// classifier whose stamp history contains the value.
pub fn niche_members(population: &Population, ats_value: u64) -> NicheSnapshot {
    let mut members = Vec::new();
    let mut total = 0u64;
    for (_, cl) in population.iter() {
        if cl.is_experienced() && cl.history.contains(ats_value) {
            members.push(NicheMember {
                condition: cl.condition,
                action: cl.action,
                prediction: cl.prediction,
                fitness: cl.fitness,
                numerosity: cl.numerosity,
            });
            total += u64::from(cl.numerosity);
        }
    }
    NicheSnapshot {
        ats_value,
        members,
        total_numerosity: total,
    }
}

/// Niche statistics recorded at one checkpoint, optionally with the full
/// composition of every currently active niche.
#[derive(Clone, Debug, PartialEq)]
pub struct NicheTimelineEntry {
    pub checkpoint_time: u64,
    pub can_size: usize,
    pub man_mean: f64,
    pub man_std: f64,
    pub niches: Vec<NicheSnapshot>,
}

/// Captures niche statistics for the current population state.
///
/// With `export_composition` set, one snapshot per active niche is recorded,
/// sorted by stamp value. A population without experienced classifiers
/// yields zeros and no snapshots.
pub fn timeline_checkpoint(
    population: &Population,
    checkpoint_time: u64,
    export_composition: bool,
) -> NicheTimelineEntry {
    let active = can(population);
    let (man_mean, man_std) = man(population).unwrap_or((0.0, 0.0));
    let niches = if export_composition {
        active
            .iter()
            .map(|&ats| niche_members(population, ats))
            .collect()
    } else {
        Vec::new()
    };
    NicheTimelineEntry {
        checkpoint_time,
        can_size: active.len(),
        man_mean,
        man_std,
        niches,
    }
}

/// Serializes timeline entries as line-delimited text.
///
/// Schema: one `checkpoint` line per entry carrying time, CAN size, and MAN
/// mean/std, followed by a `niche` line per snapshot (stamp value, member
/// count, total numerosity) and one `member` line per classifier
/// (condition, action, prediction, fitness, numerosity).
pub fn format_timeline(entries: &[NicheTimelineEntry]) -> String {
    let mut out = String::new();
    for entry in entries {
        let _ = writeln!(
            out,
            "checkpoint t={} can={} man_mean={} man_std={} niches={}",
            entry.checkpoint_time,
            entry.can_size,
            entry.man_mean,
            entry.man_std,
            entry.niches.len()
        );
        for niche in &entry.niches {
            let _ = writeln!(
                out,
                "niche ats={} members={} num={}",
                niche.ats_value,
                niche.members.len(),
                niche.total_numerosity
            );
            for m in &niche.members {
                let _ = writeln!(
                    out,
                    "member {} {} {} {} {}",
                    m.condition, m.action, m.prediction, m.fitness, m.numerosity
                );
            }
        }
    }
    out
}

/// Exact number of distinct action-set events a Boolean problem can trigger
/// in this population: enumerates every (input, action) pair and counts the
/// distinct non-empty sets of experienced matching classifiers.
///
/// Combinatorial validation oracle for [`man`]; not part of the runtime path.
pub fn exact_active_niche_count(
    population: &Population,
    problem: &BooleanProblem,
) -> Result<usize> {
    let n = problem.n_bits();
    if n > 16 {
        return Err(Error::OracleSizeBound { got: n, max: 16 });
    }
    let mut distinct: HashSet<Vec<ClassifierId>> = HashSet::new();
    for value in 0..(1u64 << n) {
        let input = crate::condition::Bitstring::from_bits(value, n)?;
        for action in 0..problem.num_actions() {
            let set: Vec<ClassifierId> = population
                .iter()
                .filter(|(_, cl)| {
                    cl.is_experienced()
                        && cl.action == action
                        && cl.condition.matches(&input).unwrap_or(false)
                })
                .map(|(id, _)| id)
                .collect();
            if !set.is_empty() {
                distinct.insert(set);
            }
        }
    }
    Ok(distinct.len())
}

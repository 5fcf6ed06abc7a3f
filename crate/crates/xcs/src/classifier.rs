//! Macroclassifier records.

use rand::Rng;

use crate::condition::{Bitstring, TernaryCondition};
use crate::error::{Error, Result};
use crate::niche::StampHistory;
use crate::params::Parameters;

/// A macroclassifier: one (condition, action) rule plus bookkeeping
/// parameters, standing for `numerosity` identical micro rules.
#[derive(Clone, Debug, PartialEq)]
pub struct Classifier {
    pub condition: TernaryCondition,
    /// Advocated action in `[0, num_actions)`.
    pub action: usize,
    /// Payoff prediction (reward units).
    pub prediction: f64,
    /// Running estimate of the absolute prediction error (reward units).
    pub error: f64,
    /// Accuracy-based fitness in (0, 1].
    pub fitness: f64,
    /// Number of reinforcement updates received; zero means never updated,
    /// and such classifiers are excluded from all niche statistics.
    pub experience: u32,
    /// Last time the GA ran in an action set containing this classifier.
    pub ga_stamp: u64,
    /// Estimated action-set size in microclassifiers.
    pub action_set_size: f64,
    /// Micro rules this record stands for.
    pub numerosity: u32,
    /// Action-set time stamp: last time this classifier entered an action set.
    pub ats: u64,
    /// Recent action-set stamps, newest first, bounded by L_max.
    pub history: StampHistory,
}

impl Classifier {
    /// Creates a covering classifier for `input`: each condition position is
    /// `#` with probability `P_hash`, otherwise the input bit.
    pub fn covering<R: Rng>(
        input: &Bitstring,
        action: usize,
        t: u64,
        params: &Parameters,
        rng: &mut R,
    ) -> Self {
        Self {
            condition: TernaryCondition::covering(input, params.wildcard_prob, rng),
            action,
            prediction: params.initial_prediction,
            error: params.initial_error,
            fitness: params.initial_fitness,
            experience: 0,
            ga_stamp: t,
            action_set_size: 1.0,
            numerosity: 1,
            ats: 0,
            history: StampHistory::new(),
        }
    }

    pub fn is_experienced(&self) -> bool {
        self.experience > 0
    }

    /// One population-dump line:
    /// `condition action p epsilon F exp ts asSize num ats L=[v0,v1,...]`.
    pub fn dump_line(&self) -> String {
        let stamps: Vec<String> = self.history.iter().map(|v| v.to_string()).collect();
        format!(
            "{} {} {} {} {} {} {} {} {} {} L=[{}]",
            self.condition,
            self.action,
            self.prediction,
            self.error,
            self.fitness,
            self.experience,
            self.ga_stamp,
            self.action_set_size,
            self.numerosity,
            self.ats,
            stamps.join(",")
        )
    }

    /// Parses a dump line; `line_no` is only used in error messages.
    pub fn parse_dump_line(text: &str, line_no: usize) -> Result<Self> {
        let fail = |message: &str| Error::DumpParse {
            line: line_no,
            message: message.to_string(),
        };
        let fields: Vec<&str> = text.split_whitespace().collect();
        if fields.len() != 11 {
            return Err(fail(&format!("expected 11 fields, found {}", fields.len())));
        }
        let condition: TernaryCondition = fields[0].parse()?;
        let stamps_field = fields[10]
            .strip_prefix("L=[")
            .and_then(|rest| rest.strip_suffix(']'))
            .ok_or_else(|| fail("malformed stamp list, expected L=[...]"))?;
        let stamps: Vec<u64> = if stamps_field.is_empty() {
            Vec::new()
        } else {
            stamps_field
                .split(',')
                .map(|v| v.parse::<u64>().map_err(|e| fail(&e.to_string())))
                .collect::<Result<_>>()?
        };
        let parse_f64 = |s: &str| s.parse::<f64>().map_err(|e| fail(&e.to_string()));
        let parse_u64 = |s: &str| s.parse::<u64>().map_err(|e| fail(&e.to_string()));
        Ok(Self {
            condition,
            action: parse_u64(fields[1])? as usize,
            prediction: parse_f64(fields[2])?,
            error: parse_f64(fields[3])?,
            fitness: parse_f64(fields[4])?,
            experience: parse_u64(fields[5])? as u32,
            ga_stamp: parse_u64(fields[6])?,
            action_set_size: parse_f64(fields[7])?,
            numerosity: parse_u64(fields[8])? as u32,
            ats: parse_u64(fields[9])?,
            history: StampHistory::from_stamps(stamps)?,
        })
    }
}

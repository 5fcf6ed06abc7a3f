//! Global parameter set shared by the engine, niche tracking, and harness.

use crate::error::{Error, Result};

/// XCS learning parameters plus the niche-tracking additions.
///
/// Defaults follow the standard algorithmic description; every field can be
/// overridden from a config file because published experiments use
/// per-problem settings.
#[derive(Clone, Debug)]
pub struct Parameters {
    /// Maximum total numerosity of the population (N).
    pub population_limit: u32,
    /// Learning rate for prediction, error, set-size, and fitness updates (beta).
    pub learning_rate: f64,
    /// Accuracy falloff coefficient (alpha).
    pub accuracy_falloff: f64,
    /// Error below which a classifier counts as fully accurate (epsilon0).
    pub error_threshold: f64,
    /// Accuracy exponent (nu).
    pub accuracy_exponent: f64,
    /// Discount factor for multi-step payoff backup (gamma).
    pub discount: f64,
    /// Mean action-set formations between GA activations in a niche (theta_ga).
    pub ga_threshold: f64,
    /// Crossover probability (chi).
    pub crossover_prob: f64,
    /// Per-allele mutation probability (mu).
    pub mutation_prob: f64,
    /// Experience above which deletion may penalize low fitness (theta_del).
    pub deletion_threshold: u32,
    /// Fraction of mean fitness below which the deletion vote is inflated (delta).
    pub deletion_fitness_fraction: f64,
    /// Experience a subsumer must exceed (theta_sub).
    pub subsumption_threshold: u32,
    /// Probability of '#' per position during covering (P_hash).
    pub wildcard_prob: f64,
    /// Initial prediction of fresh classifiers (p_I).
    pub initial_prediction: f64,
    /// Initial prediction error (epsilon_I).
    pub initial_error: f64,
    /// Initial fitness (F_I).
    pub initial_fitness: f64,
    /// Probability of a random action under biased exploration (p_explore).
    pub explore_prob: f64,
    /// Offspring may be absorbed by an accurate, experienced, more general parent.
    pub ga_subsumption: bool,
    /// The most general accurate member of an action set absorbs the others.
    pub action_set_subsumption: bool,
    /// Scale prediction updates by relative fitness in the action set.
    pub gradient_descent: bool,
    /// Stamp-history bound (L_max); `None` derives ceil(0.10 * N).
    pub history_limit: Option<usize>,
    /// Step cap for multi-step episodes.
    pub max_steps_per_episode: u32,
}

impl Default for Parameters {
    fn default() -> Self {
        Self {
            population_limit: 400,
            learning_rate: 0.2,
            accuracy_falloff: 0.1,
            error_threshold: 10.0,
            accuracy_exponent: 5.0,
            discount: 0.71,
            ga_threshold: 25.0,
            crossover_prob: 0.8,
            mutation_prob: 0.04,
            deletion_threshold: 20,
            deletion_fitness_fraction: 0.1,
            subsumption_threshold: 20,
            wildcard_prob: 0.33,
            initial_prediction: 10.0,
            initial_error: 0.0,
            initial_fitness: 0.01,
            explore_prob: 0.5,
            ga_subsumption: true,
            action_set_subsumption: false,
            gradient_descent: false,
            history_limit: None,
            max_steps_per_episode: 100,
        }
    }
}

impl Parameters {
    /// Effective stamp-history bound: the override, or ceil(0.10 * N).
    pub fn stamp_capacity(&self) -> usize {
        self.history_limit
            .unwrap_or_else(|| (self.population_limit as usize).div_ceil(10))
    }

    pub fn validate(&self) -> Result<()> {
        if self.population_limit < 1 {
            return Err(Error::InvalidParameter("N must be at least 1".into()));
        }
        if self.error_threshold <= 0.0 {
            return Err(Error::InvalidParameter("epsilon0 must be positive".into()));
        }
        if self.stamp_capacity() < 1 {
            return Err(Error::InvalidParameter("L_max must be at least 1".into()));
        }
        for (name, value) in [
            ("beta", self.learning_rate),
            ("alpha", self.accuracy_falloff),
            ("gamma", self.discount),
            ("chi", self.crossover_prob),
            ("mu", self.mutation_prob),
            ("delta", self.deletion_fitness_fraction),
            ("P_hash", self.wildcard_prob),
            ("p_explore", self.explore_prob),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::InvalidParameter(format!(
                    "{name} = {value} is outside [0, 1]"
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stamp_capacity_is_ten_percent_of_limit() {
        let mut p = Parameters::default();
        p.population_limit = 400;
        assert_eq!(p.stamp_capacity(), 40);
        p.population_limit = 1;
        assert_eq!(p.stamp_capacity(), 1);
        p.population_limit = 501;
        assert_eq!(p.stamp_capacity(), 51);
        p.history_limit = Some(7);
        assert_eq!(p.stamp_capacity(), 7);
    }

    #[test]
    fn validate_rejects_out_of_range_rates() {
        let mut p = Parameters::default();
        p.crossover_prob = 1.2;
        assert!(p.validate().is_err());
        p.crossover_prob = 0.8;
        p.error_threshold = 0.0;
        assert!(p.validate().is_err());
    }
}

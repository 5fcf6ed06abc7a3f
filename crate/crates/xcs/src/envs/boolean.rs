//! Single-step Boolean benchmark problems.
//!
//! Both functions are posed as reinforcement problems: the system receives
//! an n-bit string, answers with a binary action, and earns 1000 reward when
//! the action equals the function value, 0 otherwise.

use rand::Rng;

use crate::condition::Bitstring;
use crate::error::{Error, Result};

/// Multiplexer value: the first k bits (k + 2^k = n) address one of the
/// remaining 2^k data bits, and the function returns that bit.
pub fn multiplexer_value(input: &Bitstring) -> Result<bool> {
    let k = multiplexer_address_bits(input.len()).ok_or_else(|| {
        Error::InvalidParameter(format!(
            "multiplexer input length {} is not k + 2^k",
            input.len()
        ))
    })?;
    let mut address = 0usize;
    for i in 0..k {
        address = address << 1 | usize::from(input.get(i));
    }
    Ok(input.get(k + address))
}

/// Majority-on value: 1 when more than half the bits are set, 0 otherwise
/// (an exact half on even lengths is not a majority).
pub fn majority_value(input: &Bitstring) -> Result<bool> {
    if input.is_empty() {
        return Err(Error::InvalidParameter(
            "majority input must be non-empty".into(),
        ));
    }
    Ok(2 * input.count_ones() as usize > input.len())
}

/// Address width k for a multiplexer of total size `n`, if `n = k + 2^k`.
pub fn multiplexer_address_bits(n: usize) -> Option<usize> {
    (1..=6).find(|k| k + (1usize << k) == n)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BooleanFunction {
    Multiplexer,
    MajorityOn,
}

/// A Boolean benchmark of fixed input width.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BooleanProblem {
    kind: BooleanFunction,
    n_bits: usize,
}

impl BooleanProblem {
    pub fn multiplexer(n_bits: usize) -> Result<Self> {
        if multiplexer_address_bits(n_bits).is_none() || n_bits > crate::condition::MAX_BITS {
            return Err(Error::InvalidParameter(format!(
                "multiplexer size must be k + 2^k (3, 6, 11, 20, 37), got {n_bits}"
            )));
        }
        Ok(Self {
            kind: BooleanFunction::Multiplexer,
            n_bits,
        })
    }

    pub fn majority(n_bits: usize) -> Result<Self> {
        if n_bits == 0 || n_bits > crate::condition::MAX_BITS {
            return Err(Error::InvalidParameter(format!(
                "majority size must be in 1..=64, got {n_bits}"
            )));
        }
        Ok(Self {
            kind: BooleanFunction::MajorityOn,
            n_bits,
        })
    }

    pub fn kind(&self) -> BooleanFunction {
        self.kind
    }

    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    pub fn num_actions(&self) -> usize {
        2
    }

    /// Conventional short name, e.g. `MP6` or `MAJ5`.
    pub fn label(&self) -> String {
        match self.kind {
            BooleanFunction::Multiplexer => format!("MP{}", self.n_bits),
            BooleanFunction::MajorityOn => format!("MAJ{}", self.n_bits),
        }
    }

    pub fn eval(&self, input: &Bitstring) -> Result<bool> {
        if input.len() != self.n_bits {
            return Err(Error::LengthMismatch {
                condition: self.n_bits,
                input: input.len(),
            });
        }
        match self.kind {
            BooleanFunction::Multiplexer => multiplexer_value(input),
            BooleanFunction::MajorityOn => majority_value(input),
        }
    }

    /// Reward for answering `action`: 1000 iff it equals the function value.
    pub fn reward(&self, input: &Bitstring, action: usize) -> Result<f64> {
        let value = self.eval(input)?;
        Ok(if (action == 1) == value { 1000.0 } else { 0.0 })
    }

    pub fn random_input<R: Rng>(&self, rng: &mut R) -> Bitstring {
        Bitstring::random(self.n_bits, rng).expect("validated width")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(s: &str) -> Bitstring {
        s.parse().unwrap()
    }

    #[test]
    fn multiplexer_worked_examples() {
        assert!(multiplexer_value(&bits("110001")).unwrap());
        assert!(!multiplexer_value(&bits("000111")).unwrap());
        assert!(!multiplexer_value(&bits("000000")).unwrap());
    }

    #[test]
    fn multiplexer_rejects_invalid_lengths() {
        assert!(multiplexer_value(&bits("10101")).is_err());
        assert!(BooleanProblem::multiplexer(7).is_err());
        assert!(BooleanProblem::multiplexer(11).is_ok());
    }

    #[test]
    fn majority_worked_examples() {
        assert!(majority_value(&bits("110")).unwrap());
        assert!(majority_value(&bits("011")).unwrap());
        assert!(!majority_value(&bits("000")).unwrap());
    }

    #[test]
    fn majority_even_tie_is_zero() {
        assert!(!majority_value(&bits("1100")).unwrap());
        assert!(majority_value(&bits("1101")).unwrap());
    }

    #[test]
    fn reward_is_1000_iff_action_matches() {
        let mp6 = BooleanProblem::multiplexer(6).unwrap();
        assert_eq!(mp6.reward(&bits("110001"), 1).unwrap(), 1000.0);
        assert_eq!(mp6.reward(&bits("110001"), 0).unwrap(), 0.0);
        let maj3 = BooleanProblem::majority(3).unwrap();
        assert_eq!(maj3.reward(&bits("000"), 0).unwrap(), 1000.0);
    }

    /// Naive reimplementations used as truth-table oracles.
    fn naive_multiplexer(input: &Bitstring) -> bool {
        let n = input.len();
        let k = (1..).find(|k| k + (1 << k) == n).unwrap();
        let address: String = (0..k)
            .map(|i| if input.get(i) { '1' } else { '0' })
            .collect();
        let index = usize::from_str_radix(&address, 2).unwrap();
        input.get(k + index)
    }

    fn naive_majority(input: &Bitstring) -> bool {
        let ones = (0..input.len()).filter(|&i| input.get(i)).count();
        let zeros = input.len() - ones;
        ones > zeros
    }

    #[test]
    fn multiplexer_agrees_with_truth_table_up_to_11_bits() {
        for n in [3usize, 6, 11] {
            for value in 0..(1u64 << n) {
                let input = Bitstring::from_bits(value, n).unwrap();
                assert_eq!(
                    multiplexer_value(&input).unwrap(),
                    naive_multiplexer(&input),
                    "MP{n} disagrees on {input}"
                );
            }
        }
    }

    #[test]
    fn majority_agrees_with_truth_table_up_to_11_bits() {
        for n in 1..=11usize {
            for value in 0..(1u64 << n) {
                let input = Bitstring::from_bits(value, n).unwrap();
                assert_eq!(
                    majority_value(&input).unwrap(),
                    naive_majority(&input),
                    "MAJ{n} disagrees on {input}"
                );
            }
        }
    }
}

//! Fixed-width binary inputs and ternary rule conditions.
//!
//! Conditions are strings over `{0, 1, #}` stored as a pair of bitmasks
//! (`care`, `value`) so that matching an input costs two word operations.
//! Position 0 is the leftmost character of the textual form.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};

/// Maximum supported input width in bits.
pub const MAX_BITS: usize = 64;

#[inline]
fn width_mask(len: usize) -> u64 {
    if len == 64 {
        u64::MAX
    } else {
        (1u64 << len) - 1
    }
}

/// A fixed-length binary string, at most [`MAX_BITS`] wide.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Bitstring {
    bits: u64,
    len: u8,
}

impl Bitstring {
    /// All-zero string of the given length.
    pub fn zeros(len: usize) -> Result<Self> {
        if len > MAX_BITS {
            return Err(Error::TooManyBits(len));
        }
        Ok(Self { bits: 0, len: len as u8 })
    }

    /// Builds a string from the low `len` bits of `bits`; bit `i` of `bits`
    /// is position `i` of the string.
    pub fn from_bits(bits: u64, len: usize) -> Result<Self> {
        if len > MAX_BITS {
            return Err(Error::TooManyBits(len));
        }
        Ok(Self {
            bits: bits & width_mask(len),
            len: len as u8,
        })
    }

    /// Uniformly random string of the given length.
    pub fn random<R: Rng>(len: usize, rng: &mut R) -> Result<Self> {
        Self::from_bits(rng.random::<u64>(), len)
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Bit at `position` (0 = leftmost character).
    pub fn get(&self, position: usize) -> bool {
        debug_assert!(position < self.len());
        self.bits >> position & 1 == 1
    }

    pub fn set(&mut self, position: usize, value: bool) {
        debug_assert!(position < self.len());
        if value {
            self.bits |= 1 << position;
        } else {
            self.bits &= !(1 << position);
        }
    }

    /// Raw bit word; bit `i` corresponds to position `i`.
    pub fn bits(&self) -> u64 {
        self.bits
    }

    /// Number of positions set to one.
    pub fn count_ones(&self) -> u32 {
        self.bits.count_ones()
    }
}

impl fmt::Display for Bitstring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len() {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Bitstring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bitstring({self})")
    }
}

impl FromStr for Bitstring {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut out = Bitstring::zeros(s.chars().count())?;
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => out.set(i, true),
                other => {
                    return Err(Error::InvalidSymbol {
                        symbol: other,
                        position: i,
                    })
                }
            }
        }
        Ok(out)
    }
}

/// A ternary condition over `{0, 1, #}`.
///
/// `care` has a bit set at every specified position; `value` holds the
/// required bit there. Length is immutable after creation.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct TernaryCondition {
    care: u64,
    value: u64,
    len: u8,
}

impl TernaryCondition {
    /// All-`#` condition of the given length.
    pub fn all_wildcards(len: usize) -> Result<Self> {
        if len > MAX_BITS {
            return Err(Error::TooManyBits(len));
        }
        Ok(Self { care: 0, value: 0, len: len as u8 })
    }

    /// Builds a condition from raw masks; `value` bits outside `care` are cleared.
    pub fn from_masks(care: u64, value: u64, len: usize) -> Result<Self> {
        if len > MAX_BITS {
            return Err(Error::TooManyBits(len));
        }
        let care = care & width_mask(len);
        Ok(Self {
            care,
            value: value & care,
            len: len as u8,
        })
    }

    /// Condition matching exactly `input` at every position.
    pub fn exact(input: &Bitstring) -> Self {
        Self {
            care: width_mask(input.len()),
            value: input.bits(),
            len: input.len() as u8,
        }
    }

    /// Condition for covering: each position is `#` with probability
    /// `wildcard_prob`, otherwise the input bit. Always matches `input`.
    pub fn covering<R: Rng>(input: &Bitstring, wildcard_prob: f64, rng: &mut R) -> Self {
        let mut cond = Self::exact(input);
        for i in 0..input.len() {
            if rng.random::<f64>() < wildcard_prob {
                cond.generalize(i);
            }
        }
        cond
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Symbol at `position`: `None` for `#`, `Some(bit)` otherwise.
    pub fn symbol(&self, position: usize) -> Option<bool> {
        debug_assert!(position < self.len());
        if self.care >> position & 1 == 1 {
            Some(self.value >> position & 1 == 1)
        } else {
            None
        }
    }

    /// Sets `position` to `#`.
    pub fn generalize(&mut self, position: usize) {
        debug_assert!(position < self.len());
        let bit = 1u64 << position;
        self.care &= !bit;
        self.value &= !bit;
    }

    /// Fixes `position` to `bit`.
    pub fn specialize(&mut self, position: usize, bit: bool) {
        debug_assert!(position < self.len());
        let mask = 1u64 << position;
        self.care |= mask;
        if bit {
            self.value |= mask;
        } else {
            self.value &= !mask;
        }
    }

    /// Number of `#` symbols.
    pub fn wildcard_count(&self) -> u32 {
        self.len as u32 - self.care.count_ones()
    }

    pub fn care_mask(&self) -> u64 {
        self.care
    }

    pub fn value_mask(&self) -> u64 {
        self.value
    }

    /// True iff every position is `#` or equals the input bit.
    pub fn matches(&self, input: &Bitstring) -> Result<bool> {
        if self.len() != input.len() {
            return Err(Error::LengthMismatch {
                condition: self.len(),
                input: input.len(),
            });
        }
        Ok((input.bits() ^ self.value) & self.care == 0)
    }

    /// True iff `self` has strictly more `#` symbols than `other` and at
    /// every position `self` is `#` or equal to `other`'s symbol.
    pub fn is_more_general(&self, other: &TernaryCondition) -> Result<bool> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                condition: self.len(),
                input: other.len(),
            });
        }
        let subset = self.care & !other.care == 0;
        let agree = (self.value ^ other.value) & self.care == 0;
        Ok(subset && agree && self.care != other.care)
    }

    /// Two-point crossover: swaps the symbols of `a` and `b` in a random
    /// index range `[x, y)` with `0 <= x <= y <= len`.
    pub fn two_point_crossover<R: Rng>(a: &mut Self, b: &mut Self, rng: &mut R) {
        debug_assert_eq!(a.len, b.len);
        let len = a.len();
        let mut x = rng.random_range(0..=len);
        let mut y = rng.random_range(0..=len);
        if x > y {
            std::mem::swap(&mut x, &mut y);
        }
        if x == y {
            return;
        }
        let span = width_mask(y - x) << x;
        let care_a = (a.care & !span) | (b.care & span);
        let care_b = (b.care & !span) | (a.care & span);
        let value_a = (a.value & !span) | (b.value & span);
        let value_b = (b.value & !span) | (a.value & span);
        a.care = care_a;
        a.value = value_a;
        b.care = care_b;
        b.value = value_b;
    }

    /// Niche mutation: with probability `rate` each position toggles
    /// between `#` and the corresponding bit of `input`, so the result
    /// still matches `input` wherever it matched before.
    pub fn mutate_toward<R: Rng>(&mut self, input: &Bitstring, rate: f64, rng: &mut R) {
        debug_assert_eq!(self.len(), input.len());
        for i in 0..self.len() {
            if rng.random::<f64>() < rate {
                if self.symbol(i).is_some() {
                    self.generalize(i);
                } else {
                    self.specialize(i, input.get(i));
                }
            }
        }
    }
}

impl fmt::Display for TernaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len() {
            f.write_str(match self.symbol(i) {
                None => "#",
                Some(true) => "1",
                Some(false) => "0",
            })?;
        }
        Ok(())
    }
}

impl fmt::Debug for TernaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TernaryCondition({self})")
    }
}

impl FromStr for TernaryCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut cond = TernaryCondition::all_wildcards(s.chars().count())?;
        for (i, c) in s.chars().enumerate() {
            match c {
                '#' => {}
                '0' => cond.specialize(i, false),
                '1' => cond.specialize(i, true),
                other => {
                    return Err(Error::InvalidSymbol {
                        symbol: other,
                        position: i,
                    })
                }
            }
        }
        Ok(cond)
    }
}

//! Macroclassifier population with stable identifiers.
//!
//! Two rules with identical (condition, action) are always merged through
//! numerosity, and the container keeps the total numerosity cached. Hash
//! maps only serve keyed lookups; every order-sensitive traversal runs over
//! the dense entry vector so results are deterministic for a given seed.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::classifier::Classifier;
use crate::condition::{Bitstring, TernaryCondition};
use crate::error::{Error, Result};

/// Stable handle to a macroclassifier; remains valid until the
/// macroclassifier is removed from the population.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClassifierId(u64);

type RuleKey = (TernaryCondition, usize);

#[derive(Clone, Debug, Default)]
pub struct Population {
    entries: Vec<(ClassifierId, Classifier)>,
    index: HashMap<ClassifierId, usize>,
    rules: HashMap<RuleKey, ClassifierId>,
    next_id: u64,
    total_numerosity: u64,
}

impl Population {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts a classifier, merging into an existing macroclassifier with
    /// the same (condition, action) if one exists. Returns the id of the
    /// record now holding the rule.
    pub fn insert(&mut self, classifier: Classifier) -> ClassifierId {
        let key = (classifier.condition, classifier.action);
        self.total_numerosity += u64::from(classifier.numerosity);
        if let Some(&id) = self.rules.get(&key) {
            let slot = self.index[&id];
            self.entries[slot].1.numerosity += classifier.numerosity;
            return id;
        }
        let id = ClassifierId(self.next_id);
        self.next_id += 1;
        self.index.insert(id, self.entries.len());
        self.rules.insert(key, id);
        self.entries.push((id, classifier));
        id
    }

    pub fn contains(&self, id: ClassifierId) -> bool {
        self.index.contains_key(&id)
    }

    pub fn get(&self, id: ClassifierId) -> Option<&Classifier> {
        self.index.get(&id).map(|&slot| &self.entries[slot].1)
    }

    /// Mutable access to a classifier. Numerosity must be changed through
    /// [`Population::insert`], [`Population::decrement`], or
    /// [`Population::bump_numerosity`] to keep the cached total consistent.
    pub fn get_mut(&mut self, id: ClassifierId) -> Option<&mut Classifier> {
        let slot = *self.index.get(&id)?;
        Some(&mut self.entries[slot].1)
    }

    /// Adds micro copies to an existing macroclassifier.
    pub fn bump_numerosity(&mut self, id: ClassifierId, count: u32) -> bool {
        let Some(&slot) = self.index.get(&id) else {
            return false;
        };
        self.entries[slot].1.numerosity += count;
        self.total_numerosity += u64::from(count);
        true
    }

    /// Removes one micro rule; the macroclassifier disappears when its
    /// numerosity reaches zero. Returns true if the record was removed.
    pub fn decrement(&mut self, id: ClassifierId) -> bool {
        let Some(&slot) = self.index.get(&id) else {
            return false;
        };
        self.total_numerosity -= 1;
        let cl = &mut self.entries[slot].1;
        if cl.numerosity > 1 {
            cl.numerosity -= 1;
            false
        } else {
            self.remove_slot(slot);
            true
        }
    }

    /// Removes an entire macroclassifier.
    pub fn remove(&mut self, id: ClassifierId) -> Option<Classifier> {
        let slot = *self.index.get(&id)?;
        self.total_numerosity -= u64::from(self.entries[slot].1.numerosity);
        Some(self.remove_slot(slot))
    }

    fn remove_slot(&mut self, slot: usize) -> Classifier {
        let (id, classifier) = self.entries.swap_remove(slot);
        self.index.remove(&id);
        self.rules.remove(&(classifier.condition, classifier.action));
        if slot < self.entries.len() {
            let moved = self.entries[slot].0;
            self.index.insert(moved, slot);
        }
        classifier
    }

    /// Iterates macroclassifiers in deterministic storage order.
    pub fn iter(&self) -> impl Iterator<Item = (ClassifierId, &Classifier)> {
        self.entries.iter().map(|(id, cl)| (*id, cl))
    }

    /// Number of macroclassifiers.
    pub fn macro_count(&self) -> usize {
        self.entries.len()
    }

    /// Total numerosity (micro rules).
    pub fn total_numerosity(&self) -> u64 {
        self.total_numerosity
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Ids of all classifiers whose condition matches `input`.
    pub fn matching(&self, input: &Bitstring) -> Vec<ClassifierId> {
        self.entries
            .iter()
            .filter(|(_, cl)| cl.condition.matches(input).unwrap_or(false))
            .map(|(id, _)| *id)
            .collect()
    }

    /// Writes the dump: a header line followed by one classifier per line.
    pub fn write_dump<W: Write>(
        &self,
        n_bits: usize,
        num_actions: usize,
        writer: &mut W,
    ) -> Result<()> {
        writeln!(writer, "# xcs-pop v1 n={n_bits} actions={num_actions}")?;
        for (_, cl) in self.iter() {
            writeln!(writer, "{}", cl.dump_line())?;
        }
        Ok(())
    }

    /// Convenience wrapper rendering the dump as a string.
    pub fn dump_string(&self, n_bits: usize, num_actions: usize) -> String {
        let mut buf = Vec::new();
        self.write_dump(n_bits, num_actions, &mut buf)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("dump is ASCII")
    }

    /// Parses a dump produced by [`Population::write_dump`]; returns the
    /// population together with the input width and action count from the
    /// header.
    pub fn parse_dump<R: BufRead>(reader: R) -> Result<(Self, usize, usize)> {
        let mut lines = reader.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::DumpParse {
            line: 1,
            message: "empty dump".into(),
        })?;
        let header = header?;
        let (n_bits, num_actions) = parse_dump_header(&header)?;
        let mut population = Population::new();
        for (i, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let classifier = Classifier::parse_dump_line(&line, i + 1)?;
            if classifier.condition.len() != n_bits {
                return Err(Error::DumpParse {
                    line: i + 1,
                    message: format!(
                        "condition width {} does not match header n={n_bits}",
                        classifier.condition.len()
                    ),
                });
            }
            population.insert(classifier);
        }
        Ok((population, n_bits, num_actions))
    }
}

fn parse_dump_header(header: &str) -> Result<(usize, usize)> {
    let fail = |message: String| Error::DumpParse { line: 1, message };
    let rest = header
        .strip_prefix("# xcs-pop v1 ")
        .ok_or_else(|| fail(format!("unrecognized header: {header}")))?;
    let mut n_bits = None;
    let mut actions = None;
    for token in rest.split_whitespace() {
        if let Some(v) = token.strip_prefix("n=") {
            n_bits = Some(v.parse::<usize>().map_err(|e| fail(e.to_string()))?);
        } else if let Some(v) = token.strip_prefix("actions=") {
            actions = Some(v.parse::<usize>().map_err(|e| fail(e.to_string()))?);
        } else {
            return Err(fail(format!("unexpected header token: {token}")));
        }
    }
    match (n_bits, actions) {
        (Some(n), Some(a)) => Ok((n, a)),
        _ => Err(fail("header must carry n= and actions=".into())),
    }
}

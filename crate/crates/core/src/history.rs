//! Realized game histories.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A realized history: a context sequence together with a label sequence
/// that is either the same length (a completed round) or one shorter (a
/// round awaiting its label).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prefix {
    contexts: Vec<usize>,
    labels: Vec<usize>,
}

impl Prefix {
    pub fn new(contexts: Vec<usize>, labels: Vec<usize>) -> Result<Prefix> {
        let c = contexts.len();
        let l = labels.len();
        if !(l == c || l + 1 == c) {
            return Err(Error::InvalidPrefix {
                contexts: c,
                labels: l,
            });
        }
        Ok(Prefix { contexts, labels })
    }

    pub fn empty() -> Prefix {
        Prefix {
            contexts: Vec::new(),
            labels: Vec::new(),
        }
    }

    pub fn contexts(&self) -> &[usize] {
        &self.contexts
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// True when every observed context has its label.
    pub fn balanced(&self) -> bool {
        self.contexts.len() == self.labels.len()
    }

    /// Number of completed rounds.
    pub fn rounds(&self) -> usize {
        self.labels.len()
    }

    /// Extends a balanced prefix by one completed round.
    pub fn extended(&self, context: usize, label: usize) -> Prefix {
        let mut p = self.clone();
        p.contexts.push(context);
        p.labels.push(label);
        p
    }

    /// Appends a label to a prefix holding one more context than labels.
    pub fn with_label(&self, label: usize) -> Prefix {
        debug_assert_eq!(self.contexts.len(), self.labels.len() + 1);
        let mut p = self.clone();
        p.labels.push(label);
        p
    }
}

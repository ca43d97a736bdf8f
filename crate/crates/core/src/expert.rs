//! Sequential experts: deterministic maps from a history and a fresh context
//! to a label distribution, and the likelihood they assign to realized
//! sequences.

use std::collections::HashMap;

use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::logval::LogValue;
use crate::tree::ContextTree;

/// A lookup-table expert: one distribution per reachable history, keyed by
/// the exact integer history (contexts so far, labels so far). Histories
/// deeper than `depth` are errors. Tables beyond depth ~12 get impractically
/// large; parametric families should go through a sup oracle instead.
#[derive(Clone, Debug)]
pub struct LookupExpert {
    depth: usize,
    table: HashMap<(Vec<usize>, Vec<usize>), Distribution>,
}

impl LookupExpert {
    pub fn new(
        depth: usize,
        table: HashMap<(Vec<usize>, Vec<usize>), Distribution>,
    ) -> LookupExpert {
        LookupExpert { depth, table }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn insert(&mut self, contexts: Vec<usize>, labels: Vec<usize>, dist: Distribution) {
        debug_assert_eq!(contexts.len(), labels.len() + 1);
        self.table.insert((contexts, labels), dist);
    }

    fn get(&self, contexts: &[usize], labels: &[usize]) -> Result<&Distribution> {
        self.table
            .get(&(contexts.to_vec(), labels.to_vec()))
            .ok_or_else(|| Error::MissingHistory {
                contexts: contexts.to_vec(),
                labels: labels.to_vec(),
            })
    }
}

/// A deterministic sequential expert.
#[derive(Clone, Debug)]
pub enum Expert {
    /// The same distribution at every round, regardless of history.
    Constant(Distribution),
    /// A non-sequential expert: the prediction depends only on the fresh
    /// context.
    PerContext(Vec<Distribution>),
    /// Per-round distributions ignoring both contexts and history; rounds
    /// past the table fall back to uniform.
    Product(Vec<Distribution>),
    /// Fully sequential expert backed by an explicit history table.
    Lookup(LookupExpert),
    /// Another expert with the smooth truncation map applied to every
    /// prediction.
    Truncated { inner: Box<Expert>, delta: f64 },
}

impl Expert {
    /// The expert committed to one label sequence: it predicts the sequence
    /// with certainty and plays uniform once the sequence is exhausted.
    pub fn point_mass(sequence: &[usize], k: usize) -> Expert {
        assert!(!sequence.is_empty(), "point-mass sequence must be nonempty");
        Expert::Product(
            sequence
                .iter()
                .map(|&y| Distribution::point_mass(k, y))
                .collect(),
        )
    }

    /// Constant binary expert parameterized by the probability of label 1.
    pub fn bernoulli(p1: f64) -> Result<Expert> {
        Ok(Expert::Constant(Distribution::bernoulli(p1)?))
    }

    /// Prediction at round `contexts.len()` given `labels` past labels;
    /// requires exactly one more context than labels.
    pub fn predict(&self, contexts: &[usize], labels: &[usize]) -> Result<Distribution> {
        debug_assert_eq!(contexts.len(), labels.len() + 1);
        match self {
            Expert::Constant(d) => Ok(d.clone()),
            Expert::PerContext(rows) => {
                let x = *contexts.last().expect("round context");
                rows.get(x).cloned().ok_or(Error::ContextOutOfRange {
                    context: x,
                    size: rows.len(),
                })
            }
            Expert::Product(rounds) => {
                let t = contexts.len();
                match rounds.get(t - 1) {
                    Some(d) => Ok(d.clone()),
                    None => Ok(Distribution::uniform(rounds[0].len())),
                }
            }
            Expert::Lookup(table) => {
                let t = contexts.len();
                if t > table.depth {
                    return Err(Error::MissingHistory {
                        contexts: contexts.to_vec(),
                        labels: labels.to_vec(),
                    });
                }
                table.get(contexts, labels).cloned()
            }
            Expert::Truncated { inner, delta } => {
                Ok(inner.predict(contexts, labels)?.smooth_truncate(*delta))
            }
        }
    }
}

/// Log-likelihood of a label sequence under an expert: the log of the product
/// over rounds of the probability the expert put on the realized label. The
/// empty sequence has likelihood 1; any zero factor makes the whole product
/// zero.
pub fn likelihood(expert: &Expert, contexts: &[usize], labels: &[usize]) -> Result<LogValue> {
    if contexts.len() != labels.len() {
        return Err(Error::LengthMismatch {
            contexts: contexts.len(),
            labels: labels.len(),
        });
    }
    let mut total = LogValue::ONE;
    for t in 1..=labels.len() {
        let dist = expert.predict(&contexts[..t], &labels[..t - 1])?;
        let y = labels[t - 1];
        if y >= dist.len() {
            return Err(Error::LabelOutOfRange {
                label: y,
                size: dist.len(),
            });
        }
        total *= dist.log_prob(y);
    }
    Ok(total)
}

/// Projects an expert onto a context tree: the induced context-free expert
/// answers each label history with the original expert's prediction at the
/// contexts the tree serves along that history. Materialized as a lookup
/// table of the tree's depth.
pub fn project_expert(expert: &Expert, tree: &ContextTree) -> Result<Expert> {
    let depth = tree.depth();
    let arity = tree.arity();
    let mut table = HashMap::new();
    let mut stack: Vec<Vec<usize>> = vec![Vec::new()];
    while let Some(prefix) = stack.pop() {
        if prefix.len() >= depth {
            continue;
        }
        let contexts = tree.contexts_along_with_next(&prefix);
        let dist = expert.predict(&contexts, &prefix)?;
        table.insert((vec![0; prefix.len() + 1], prefix.clone()), dist);
        for y in 0..arity {
            let mut next = prefix.clone();
            next.push(y);
            stack.push(next);
        }
    }
    Ok(Expert::Lookup(LookupExpert::new(depth, table)))
}

impl ContextTree {
    /// Contexts for rounds 1..=prefix.len()+1 along a label prefix: the full
    /// argument an expert sees when predicting the next label.
    pub fn contexts_along_with_next(&self, prefix: &[usize]) -> Vec<usize> {
        let mut contexts = self.contexts_along(prefix);
        contexts.push(self.context_for(prefix));
        contexts
    }
}

/// Log of the total likelihood an expert spreads over all label sequences
/// routed through a context tree. This is 0 (total mass 1) for every valid
/// expert and tree; the function recomputes it so tests can check the
/// contract.
pub fn verify_normalization(expert: &Expert, tree: &ContextTree) -> Result<LogValue> {
    let depth = tree.depth();
    let arity = tree.arity();
    let total_paths = (arity as u128).pow(depth as u32);
    let mut terms = Vec::with_capacity(total_paths as usize);
    for id in 0..total_paths as usize {
        let path = crate::tree::path_from_index(id, depth, arity);
        let contexts = tree.contexts_along(&path);
        terms.push(likelihood(expert, &contexts, &path)?);
    }
    Ok(LogValue::sum(&terms))
}

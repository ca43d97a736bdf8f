//! Multiary trees: the adversary's strategy objects.
//!
//! A Y-ary tree of depth T assigns a value to every label prefix of length
//! < T. Nodes are stored in a flat array, level by level, each level ordered
//! by the mixed-radix encoding of its label prefix (first label most
//! significant). For arity K >= 2 the node count is (K^T - 1)/(K - 1); for
//! K = 1 it is T.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Flat node count of a depth-`depth` tree of the given arity, with overflow
/// reported as `u128::MAX` so budget checks can reject it.
pub fn node_count(depth: usize, arity: usize) -> u128 {
    let mut total: u128 = 0;
    let mut level: u128 = 1;
    for _ in 0..depth {
        total = total.saturating_add(level);
        level = level.saturating_mul(arity as u128);
    }
    total
}

/// Mixed-radix encoding of a label prefix, first symbol most significant.
pub fn path_index(prefix: &[usize], arity: usize) -> usize {
    prefix.iter().fold(0, |acc, &y| acc * arity + y)
}

/// Inverse of `path_index` for full-length paths.
pub fn path_from_index(mut index: usize, len: usize, arity: usize) -> Vec<usize> {
    let mut path = vec![0; len];
    for slot in path.iter_mut().rev() {
        *slot = index % arity;
        index /= arity;
    }
    path
}

/// Flat-array position of the node a label prefix addresses, in the level-
/// by-level mixed-radix layout shared by all trees here.
pub fn flat_node_index(depth: usize, arity: usize, prefix: &[usize]) -> usize {
    debug_assert!(prefix.len() < depth || depth == 0);
    let offsets = level_offsets(depth, arity);
    offsets[prefix.len()] + path_index(prefix, arity)
}

fn level_offsets(depth: usize, arity: usize) -> Vec<usize> {
    let mut offsets = Vec::with_capacity(depth + 1);
    let mut total = 0usize;
    let mut level = 1usize;
    offsets.push(0);
    for _ in 0..depth {
        total += level;
        offsets.push(total);
        level *= arity;
    }
    offsets
}

/// A context-valued Y-ary tree: the adversary's context strategy. Node values
/// are context ids.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextTree {
    depth: usize,
    arity: usize,
    nodes: Vec<usize>,
}

impl ContextTree {
    /// Builds a tree from its flat node array (mixed-radix prefix order).
    pub fn new(depth: usize, arity: usize, nodes: Vec<usize>) -> Result<ContextTree> {
        assert!(arity >= 1, "tree arity must be positive");
        let expect = node_count(depth, arity);
        if expect > usize::MAX as u128 || nodes.len() != expect as usize {
            return Err(Error::Unsupported {
                required: format!("{expect} nodes for depth {depth}, arity {arity}"),
                got: format!("{} nodes", nodes.len()),
            });
        }
        Ok(ContextTree {
            depth,
            arity,
            nodes,
        })
    }

    /// The tree that plays the fixed sequence `contexts`, ignoring labels.
    pub fn constant(arity: usize, contexts: &[usize]) -> ContextTree {
        let depth = contexts.len();
        let offsets = level_offsets(depth, arity);
        let mut nodes = vec![0usize; offsets[depth]];
        for t in 1..=depth {
            for slot in nodes[offsets[t - 1]..offsets[t]].iter_mut() {
                *slot = contexts[t - 1];
            }
        }
        ContextTree {
            depth,
            arity,
            nodes,
        }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    /// Checks every node value against a context alphabet size.
    pub fn validate(&self, x_size: usize) -> Result<()> {
        for &x in &self.nodes {
            if x >= x_size {
                return Err(Error::ContextOutOfRange {
                    context: x,
                    size: x_size,
                });
            }
        }
        Ok(())
    }

    /// The context served at round `prefix.len() + 1` after observing the
    /// given label prefix.
    pub fn context_for(&self, prefix: &[usize]) -> usize {
        let t = prefix.len() + 1;
        debug_assert!(t <= self.depth);
        let offsets = level_offsets(self.depth, self.arity);
        self.nodes[offsets[t - 1] + path_index(prefix, self.arity)]
    }

    /// The full context sequence traced along a label path (uses prefixes of
    /// `path`, so `path.len()` must be at most the depth).
    pub fn contexts_along(&self, path: &[usize]) -> Vec<usize> {
        (0..path.len()).map(|t| self.context_for(&path[..t])).collect()
    }

    /// Enumerates every tree of the given shape with node values below
    /// `x_size`, in lexicographic order of the flat node array.
    pub fn all(depth: usize, arity: usize, x_size: usize) -> TreeIter {
        let n = node_count(depth, arity) as usize;
        TreeIter {
            depth,
            arity,
            x_size,
            current: Some(vec![0; n]),
        }
    }

    /// Number of trees `all` would yield, saturating at `u128::MAX`.
    pub fn count_all(depth: usize, arity: usize, x_size: usize) -> u128 {
        let n = node_count(depth, arity);
        if n > u32::MAX as u128 {
            return u128::MAX;
        }
        let mut total: u128 = 1;
        for _ in 0..n {
            total = total.saturating_mul(x_size as u128);
        }
        total
    }
}

/// Odometer over flat node arrays; yields trees in deterministic
/// lexicographic order so "first argmax" is well defined.
pub struct TreeIter {
    depth: usize,
    arity: usize,
    x_size: usize,
    current: Option<Vec<usize>>,
}

impl Iterator for TreeIter {
    type Item = ContextTree;

    fn next(&mut self) -> Option<ContextTree> {
        let nodes = self.current.take()?;
        let tree = ContextTree {
            depth: self.depth,
            arity: self.arity,
            nodes: nodes.clone(),
        };
        let mut next = nodes;
        let mut i = next.len();
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            next[i] += 1;
            if next[i] < self.x_size {
                self.current = Some(next);
                break;
            }
            next[i] = 0;
        }
        if self.x_size == 0 {
            self.current = None;
        }
        Some(tree)
    }
}

/// A real-valued Y-ary tree with entries clamped to [0, 1]; the shape covers
/// and witnesses live in.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RealTree {
    depth: usize,
    arity: usize,
    values: Vec<f64>,
}

impl RealTree {
    pub fn new(depth: usize, arity: usize, values: Vec<f64>) -> Result<RealTree> {
        let expect = node_count(depth, arity);
        if expect > usize::MAX as u128 || values.len() != expect as usize {
            return Err(Error::Unsupported {
                required: format!("{expect} values for depth {depth}, arity {arity}"),
                got: format!("{} values", values.len()),
            });
        }
        Ok(RealTree {
            depth,
            arity,
            values: values.into_iter().map(|v| v.clamp(0.0, 1.0)).collect(),
        })
    }

    /// A tree holding the same value at every node.
    pub fn constant(depth: usize, arity: usize, value: f64) -> RealTree {
        let n = node_count(depth, arity) as usize;
        RealTree {
            depth,
            arity,
            values: vec![value.clamp(0.0, 1.0); n],
        }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn value_for(&self, prefix: &[usize]) -> f64 {
        let t = prefix.len() + 1;
        debug_assert!(t <= self.depth);
        let offsets = level_offsets(self.depth, self.arity);
        self.values[offsets[t - 1] + path_index(prefix, self.arity)]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// History-dependent context filter: (past contexts, past labels) to the
/// allowed set for the next round.
pub type ConstraintFn = dyn Fn(&[usize], &[usize]) -> Vec<usize> + Send + Sync;

/// Restricts which contexts the adversary may play after a given history.
/// The per-round form ignores the history; the predicate form sees it.
#[derive(Clone)]
pub enum ContextConstraint {
    PerRound(Vec<Vec<usize>>),
    Predicate(Arc<ConstraintFn>),
}

impl fmt::Debug for ContextConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ContextConstraint::PerRound(rounds) => {
                f.debug_tuple("PerRound").field(rounds).finish()
            }
            ContextConstraint::Predicate(_) => f.write_str("Predicate(..)"),
        }
    }
}

impl ContextConstraint {
    /// Allowed contexts for the round following the given history. `None`
    /// constraints are handled by `allowed_contexts`.
    pub fn allowed(
        &self,
        past_contexts: &[usize],
        past_labels: &[usize],
        x_size: usize,
    ) -> Result<Vec<usize>> {
        let round = past_contexts.len() + 1;
        let mut out = match self {
            ContextConstraint::PerRound(rounds) => match rounds.get(round - 1) {
                Some(set) => set.clone(),
                None => (0..x_size).collect(),
            },
            ContextConstraint::Predicate(f) => f(past_contexts, past_labels),
        };
        out.retain(|&x| x < x_size);
        out.sort_unstable();
        out.dedup();
        if out.is_empty() {
            return Err(Error::EmptyConstraint { round });
        }
        Ok(out)
    }
}

/// Allowed contexts under an optional constraint; unconstrained means the
/// full alphabet.
pub fn allowed_contexts(
    constraint: Option<&ContextConstraint>,
    past_contexts: &[usize],
    past_labels: &[usize],
    x_size: usize,
) -> Result<Vec<usize>> {
    match constraint {
        None => Ok((0..x_size).collect()),
        Some(c) => c.allowed(past_contexts, past_labels, x_size),
    }
}

/// Whether a tree only plays allowed contexts at every node.
pub fn tree_is_consistent(
    tree: &ContextTree,
    constraint: Option<&ContextConstraint>,
    x_size: usize,
) -> Result<bool> {
    let constraint = match constraint {
        None => return Ok(true),
        Some(c) => c,
    };
    let mut stack: Vec<Vec<usize>> = vec![Vec::new()];
    while let Some(prefix) = stack.pop() {
        if prefix.len() >= tree.depth() {
            continue;
        }
        let past: Vec<usize> = tree.contexts_along(&prefix);
        let allowed = constraint.allowed(&past, &prefix, x_size)?;
        let x = tree.context_for(&prefix);
        if !allowed.contains(&x) {
            return Ok(false);
        }
        for y in 0..tree.arity() {
            let mut next = prefix.clone();
            next.push(y);
            stack.push(next);
        }
    }
    Ok(true)
}

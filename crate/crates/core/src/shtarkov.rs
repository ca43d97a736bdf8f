//! Shtarkov sums in every variant.
//!
//! The classical sum adds, over all length-T label sequences, the class's
//! supremum likelihood of the sequence; its log is the context-free minimax
//! regret. Conditioning on a fixed context sequence gives the fixed-design
//! variant; routing label sequences through a context tree gives the
//! contextual variant; conditioning on an observed prefix gives the
//! data-dependent variant the optimal forecaster normalizes. The worst case
//! over trees is computed twice here: by a backward recursion that maximizes
//! the context node by node, and by brute-force tree enumeration — the
//! node-wise decomposition is a theorem, so the agreement of the two is a
//! tested property, not an assumption.

use std::collections::HashMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::class::Problem;
use crate::error::{Error, Result};
use crate::history::Prefix;
use crate::logval::{Kahan, LogValue};
use crate::tree::{
    allowed_contexts, path_from_index, path_index, tree_is_consistent, ContextConstraint,
    ContextTree,
};

/// Memo for worst-case prefix values, keyed by the exact prefix.
pub type PrefixMemo = HashMap<(Vec<usize>, Vec<usize>), LogValue>;

/// Classical Shtarkov sum: context-free semantics (context id 0 every round,
/// whatever the nominal context alphabet).
pub fn contextfree(problem: &Problem, horizon: usize) -> Result<LogValue> {
    let tree = ContextTree::constant(problem.k(), &vec![0; horizon]);
    contextual(problem, &tree)
}

/// Shtarkov sum conditioned on a fixed context sequence.
pub fn conditional(problem: &Problem, contexts: &[usize]) -> Result<LogValue> {
    problem.check_sequences(contexts, &[])?;
    let tree = ContextTree::constant(problem.k(), contexts);
    contextual(problem, &tree)
}

/// Contextual Shtarkov sum on a context tree.
pub fn contextual(problem: &Problem, tree: &ContextTree) -> Result<LogValue> {
    prefix_sum(problem, tree, &Prefix::empty(), tree.depth())
}

/// Contextual Shtarkov sum with an observed prefix: sums over continuations
/// of the prefix routed through `tree`, whose depth must make up the horizon.
pub fn prefix_sum(
    problem: &Problem,
    tree: &ContextTree,
    prefix: &Prefix,
    horizon: usize,
) -> Result<LogValue> {
    if !prefix.balanced() {
        return Err(Error::InvalidPrefix {
            contexts: prefix.contexts().len(),
            labels: prefix.labels().len(),
        });
    }
    if tree.depth() + prefix.rounds() != horizon {
        return Err(Error::DepthMismatch {
            tree_depth: tree.depth(),
            prefix_len: prefix.rounds(),
            horizon,
        });
    }
    if tree.arity() != problem.k() {
        return Err(Error::Unsupported {
            required: format!("tree arity {}", problem.k()),
            got: format!("arity {}", tree.arity()),
        });
    }
    problem.check_sequences(prefix.contexts(), prefix.labels())?;
    tree.validate(problem.x_size())?;

    let k = problem.k();
    let rest = tree.depth();
    let total = (k as u128).pow(rest as u32) as usize;
    let mut terms = Vec::with_capacity(total);
    let mut contexts = prefix.contexts().to_vec();
    let mut labels = prefix.labels().to_vec();
    for id in 0..total {
        let path = path_from_index(id, rest, k);
        contexts.truncate(prefix.rounds());
        labels.truncate(prefix.rounds());
        contexts.extend(tree.contexts_along(&path));
        labels.extend_from_slice(&path);
        terms.push(problem.sup_value(&contexts, &labels)?);
    }
    Ok(LogValue::sum(&terms))
}

/// Worst case over context trees of the prefix Shtarkov sum, by backward
/// recursion: at each interior history the context is chosen to maximize the
/// sum over next labels of the child values, and leaves carry the class's
/// supremum likelihood. Distinct subtrees of a context tree are free
/// parameters, which is why per-node maximization realizes the supremum over
/// whole trees; `worst_case_bruteforce` checks that equivalence.
pub fn worst_case(
    problem: &Problem,
    horizon: usize,
    prefix: &Prefix,
    constraint: Option<&ContextConstraint>,
) -> Result<LogValue> {
    let mut memo = None;
    worst_case_inner(problem, horizon, prefix, constraint, &mut memo)
}

/// `worst_case` with an external memo so repeated calls against extensions of
/// the same history (as the round-wise forecaster makes) share work. The
/// cache has no observable effect on values.
pub fn worst_case_memoized(
    problem: &Problem,
    horizon: usize,
    prefix: &Prefix,
    constraint: Option<&ContextConstraint>,
    memo: &mut PrefixMemo,
) -> Result<LogValue> {
    let mut memo = Some(memo);
    worst_case_inner(problem, horizon, prefix, constraint, &mut memo)
}

fn worst_case_inner(
    problem: &Problem,
    horizon: usize,
    prefix: &Prefix,
    constraint: Option<&ContextConstraint>,
    memo: &mut Option<&mut PrefixMemo>,
) -> Result<LogValue> {
    if !prefix.balanced() {
        return Err(Error::InvalidPrefix {
            contexts: prefix.contexts().len(),
            labels: prefix.labels().len(),
        });
    }
    if prefix.rounds() > horizon {
        return Err(Error::DepthMismatch {
            tree_depth: 0,
            prefix_len: prefix.rounds(),
            horizon,
        });
    }
    problem.check_sequences(prefix.contexts(), prefix.labels())?;
    let mut xs = prefix.contexts().to_vec();
    let mut ys = prefix.labels().to_vec();
    wc_rec(problem, horizon, &mut xs, &mut ys, constraint, memo)
}

fn wc_rec(
    problem: &Problem,
    horizon: usize,
    xs: &mut Vec<usize>,
    ys: &mut Vec<usize>,
    constraint: Option<&ContextConstraint>,
    memo: &mut Option<&mut PrefixMemo>,
) -> Result<LogValue> {
    if ys.len() == horizon {
        return problem.sup_value(xs, ys);
    }
    if let Some(m) = memo.as_deref() {
        if let Some(v) = m.get(&(xs.clone(), ys.clone())) {
            return Ok(*v);
        }
    }
    let allowed = allowed_contexts(constraint, xs, ys, problem.x_size())?;
    let k = problem.k();
    let mut best: Option<LogValue> = None;
    for x in allowed {
        xs.push(x);
        let mut terms = Vec::with_capacity(k);
        for y in 0..k {
            ys.push(y);
            let v = wc_rec(problem, horizon, xs, ys, constraint, memo);
            ys.pop();
            terms.push(v?);
        }
        xs.pop();
        let value = LogValue::sum(&terms);
        if best.is_none_or(|b| value > b) {
            best = Some(value);
        }
    }
    let value = best.expect("allowed_contexts is nonempty");
    if let Some(m) = memo.as_deref_mut() {
        m.insert((xs.clone(), ys.clone()), value);
    }
    Ok(value)
}

/// Independent oracle for the worst case over trees: enumerates every
/// (consistent) context tree in lexicographic node order, evaluates the
/// contextual sum, and returns the max with the first attaining tree.
pub fn worst_case_bruteforce(
    problem: &Problem,
    horizon: usize,
    constraint: Option<&ContextConstraint>,
    budget: u64,
) -> Result<(LogValue, ContextTree)> {
    let k = problem.k();
    let x_size = problem.x_size();
    let total = ContextTree::count_all(horizon, k, x_size);
    if total > budget as u128 {
        return Err(Error::BudgetExceeded {
            needed: total,
            budget,
        });
    }

    // Sup likelihoods only depend on (label path, contexts along it); cache
    // them so the enumeration does not recompute per tree.
    let path_total = (k as u128).pow(horizon as u32) as usize;
    let paths: Vec<Vec<usize>> = (0..path_total)
        .map(|id| path_from_index(id, horizon, k))
        .collect();
    let mut cache: HashMap<(usize, usize), LogValue> = HashMap::new();

    let mut best: Option<(LogValue, ContextTree)> = None;
    for tree in ContextTree::all(horizon, k, x_size) {
        if !tree_is_consistent(&tree, constraint, x_size)? {
            continue;
        }
        let mut terms = Vec::with_capacity(path_total);
        for (id, path) in paths.iter().enumerate() {
            let contexts = tree.contexts_along(path);
            let key = (id, path_index(&contexts, x_size.max(1)));
            let v = match cache.get(&key) {
                Some(v) => *v,
                None => {
                    let v = problem.sup_value(&contexts, path)?;
                    cache.insert(key, v);
                    v
                }
            };
            terms.push(v);
        }
        let value = LogValue::sum(&terms);
        if best.as_ref().is_none_or(|(b, _)| value > *b) {
            best = Some((value, tree));
        }
    }
    best.ok_or(Error::EmptyConstraint { round: 1 })
}

/// Monte Carlo estimate of the linear-domain contextual Shtarkov sum.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
}

/// Draws label paths uniformly at random and averages
/// `K^T * sup_f L(f; path | tree(path))` in linear domain with compensated
/// summation. Each per-round factor has conditional mean 1 under uniform
/// labels, so the product is an unbiased estimate of the sum.
pub fn mc_estimate(
    problem: &Problem,
    tree: &ContextTree,
    samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    if samples == 0 {
        return Err(Error::Unsupported {
            required: "at least one sample".into(),
            got: "0".into(),
        });
    }
    if tree.arity() != problem.k() {
        return Err(Error::Unsupported {
            required: format!("tree arity {}", problem.k()),
            got: format!("arity {}", tree.arity()),
        });
    }
    tree.validate(problem.x_size())?;
    let k = problem.k();
    let depth = tree.depth();
    let log_scale = (k as f64).ln() * depth as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = Kahan::default();
    let mut sumsq = Kahan::default();
    let mut path = vec![0usize; depth];
    for _ in 0..samples {
        for slot in path.iter_mut() {
            *slot = rng.random_range(0..k);
        }
        let contexts = tree.contexts_along(&path);
        let sup = problem.sup_value(&contexts, &path)?;
        let value = if sup.is_zero() {
            0.0
        } else {
            (log_scale + sup.log()).exp()
        };
        sum.add(value);
        sumsq.add(value * value);
    }
    let n = samples as f64;
    let mean = sum.value() / n;
    let stderr = if samples > 1 {
        let var = ((sumsq.value() - n * mean * mean) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    Ok(McEstimate {
        estimate: mean,
        stderr,
    })
}

/// A finite class of sub-probability measures over a finite ground set.
#[derive(Clone, Debug)]
pub struct SubProbClass {
    ground: usize,
    members: Vec<Vec<f64>>,
}

impl SubProbClass {
    pub fn new(ground: usize, members: Vec<Vec<f64>>) -> Result<SubProbClass> {
        if members.is_empty() {
            return Err(Error::EmptyClass);
        }
        for (index, m) in members.iter().enumerate() {
            if m.len() != ground {
                return Err(Error::LengthMismatch {
                    contexts: ground,
                    labels: m.len(),
                });
            }
            let mut mass = Kahan::default();
            for &p in m {
                if !(0.0..=1.0 + 1e-12).contains(&p) {
                    return Err(Error::InvalidDistribution {
                        reason: format!("sub-probability entry {p} outside [0, 1]"),
                    });
                }
                mass.add(p);
            }
            if mass.value() > 1.0 + 1e-12 {
                return Err(Error::MassExceedsOne {
                    index,
                    mass: mass.value(),
                });
            }
        }
        Ok(SubProbClass { ground, members })
    }

    pub fn ground(&self) -> usize {
        self.ground
    }

    pub fn members(&self) -> &[Vec<f64>] {
        &self.members
    }
}

/// General Shtarkov sum of a sub-probability class: the log of the sum over
/// ground points of the pointwise supremum.
pub fn general_shtarkov(class: &SubProbClass) -> LogValue {
    let mut total = Kahan::default();
    for k in 0..class.ground {
        let sup = class
            .members
            .iter()
            .map(|m| m[k])
            .fold(0.0f64, f64::max);
        total.add(sup);
    }
    LogValue::from_linear(total.value())
}

/// Materializes the sub-probability class a finite expert class induces on
/// continuation paths through a tree (optionally after a prefix): member f's
/// mass on path y is its likelihood of (prefix, y) given (prefix contexts,
/// tree contexts). Total mass per member is the prefix likelihood, hence at
/// most 1.
pub fn induce_subprob(
    problem: &Problem,
    tree: &ContextTree,
    prefix: Option<&Prefix>,
) -> Result<SubProbClass> {
    let experts = problem.class.experts().ok_or_else(|| Error::Unsupported {
        required: "an explicit finite class".into(),
        got: "a sup oracle".into(),
    })?;
    let empty = Prefix::empty();
    let prefix = prefix.unwrap_or(&empty);
    if !prefix.balanced() {
        return Err(Error::InvalidPrefix {
            contexts: prefix.contexts().len(),
            labels: prefix.labels().len(),
        });
    }
    let k = problem.k();
    let rest = tree.depth();
    let total = (k as u128).pow(rest as u32) as usize;
    let mut members = Vec::with_capacity(experts.len());
    for expert in experts {
        let mut masses = Vec::with_capacity(total);
        for id in 0..total {
            let path = path_from_index(id, rest, k);
            let mut contexts = prefix.contexts().to_vec();
            let mut labels = prefix.labels().to_vec();
            contexts.extend(tree.contexts_along(&path));
            labels.extend_from_slice(&path);
            masses.push(crate::expert::likelihood(expert, &contexts, &labels)?.linear());
        }
        members.push(masses);
    }
    SubProbClass::new(total, members)
}

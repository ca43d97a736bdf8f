//! Exact extensive-form game values for the prediction game.
//!
//! The primal recursion walks the game tree directly: at each history the
//! adversary picks a context, the learner answers with a distribution, the
//! adversary picks a label. The learner's inner optimization
//! `inf_p max_y (-log p(y) + G(y))` has the closed form `log sum_y exp G(y)`
//! with the optimum at the normalized exponentials, which collapses the
//! alternation into a backward induction. Two independent oracles bound and
//! cross-check it: a simplex-lattice learner that replaces the closed form
//! with a brute-force minimum over gridded predictions (an upper bound
//! converging as the grid refines), and a dual path that evaluates the
//! swapped game — entropy plus expected score, maximized by the softmax of
//! the score — in linear-domain compensated arithmetic.

use serde::Serialize;

use crate::class::Problem;
use crate::error::{Error, Result};
use crate::history::Prefix;
use crate::logval::{Kahan, LogValue};
use crate::shtarkov;
use crate::tree::{
    allowed_contexts, flat_node_index, path_from_index, ContextConstraint, ContextTree,
};

/// The game values that are provably one number, computed separately.
#[derive(Clone, Debug, Serialize)]
pub struct GameValueReport {
    pub primal_value: f64,
    pub dual_value: f64,
    pub worstcase_shtarkov: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_value: Option<f64>,
    /// Maximum pairwise deviation among the entries actually computed.
    pub max_abs_gap: f64,
}

/// Closed form of the learner's inner optimization against continuation
/// values `g`: the log of the sum of exponentials, attained by predicting
/// the normalized exponentials. All-zero continuations mean every expert is
/// already ruled out and the node value stays zero (log -inf).
pub fn learner_response_value(continuations: &[LogValue]) -> LogValue {
    LogValue::sum(continuations)
}

/// The minimizing prediction of the inner optimization, or `None` in the
/// degenerate all-zero branch (where any strictly positive prediction does).
pub fn learner_response_distribution(continuations: &[LogValue]) -> Option<Vec<f64>> {
    let total = LogValue::sum(continuations);
    if total.is_zero() {
        return None;
    }
    Some(
        continuations
            .iter()
            .map(|g| (g.log() - total.log()).exp())
            .collect(),
    )
}

/// Exact minimax regret of the T-round game by backward induction.
pub fn minimax_regret_exact(
    problem: &Problem,
    horizon: usize,
    constraint: Option<&ContextConstraint>,
) -> Result<f64> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    Ok(primal_rec(problem, horizon, &mut xs, &mut ys, constraint)?.log())
}

fn primal_rec(
    problem: &Problem,
    horizon: usize,
    xs: &mut Vec<usize>,
    ys: &mut Vec<usize>,
    constraint: Option<&ContextConstraint>,
) -> Result<LogValue> {
    if ys.len() == horizon {
        // terminal payoff: the best expert's log-likelihood of the realized
        // sequence (the learner's losses were already folded in round by
        // round through the closed-form response)
        return problem.sup_value(xs, ys);
    }
    let allowed = allowed_contexts(constraint, xs, ys, problem.x_size())?;
    let k = problem.k();
    let mut best: Option<LogValue> = None;
    for x in allowed {
        xs.push(x);
        let mut continuations = Vec::with_capacity(k);
        for y in 0..k {
            ys.push(y);
            let g = primal_rec(problem, horizon, xs, ys, constraint);
            ys.pop();
            continuations.push(g?);
        }
        xs.pop();
        let value = learner_response_value(&continuations);
        if best.is_none_or(|b| value > b) {
            best = Some(value);
        }
    }
    Ok(best.expect("allowed_contexts is nonempty"))
}

/// Same backward induction with the learner restricted to the simplex
/// lattice of the given resolution: an independent upper bound on the exact
/// value that tightens as the resolution shrinks. The resolution must lie in
/// (0, 0.1] and is snapped to the nearest reciprocal integer 1/m.
pub fn minimax_regret_grid(
    problem: &Problem,
    horizon: usize,
    resolution: f64,
    constraint: Option<&ContextConstraint>,
    budget: u64,
) -> Result<f64> {
    if !(resolution > 0.0 && resolution <= 0.1) {
        return Err(Error::InvalidGridResolution(resolution));
    }
    let m = (1.0 / resolution).round() as u64;
    let k = problem.k();
    let lattice_size = compositions_count(m, k as u64);
    if lattice_size > budget as u128 {
        return Err(Error::BudgetExceeded {
            needed: lattice_size,
            budget,
        });
    }
    let lattice = enumerate_compositions(m, k);
    let neg_log: Vec<f64> = (0..=m)
        .map(|c| {
            if c == 0 {
                f64::INFINITY
            } else {
                -((c as f64 / m as f64).ln())
            }
        })
        .collect();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    grid_rec(
        problem, horizon, &mut xs, &mut ys, constraint, &lattice, &neg_log,
    )
}

fn compositions_count(m: u64, k: u64) -> u128 {
    // C(m + k - 1, k - 1), saturating
    let mut num: u128 = 1;
    for i in 0..(k - 1) {
        num = num.saturating_mul((m + i + 1) as u128);
        num /= (i + 1) as u128;
    }
    num
}

fn enumerate_compositions(m: u64, k: usize) -> Vec<Vec<u64>> {
    fn rec(remaining: u64, slots: usize, current: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if slots == 1 {
            current.push(remaining);
            out.push(current.clone());
            current.pop();
            return;
        }
        for c in 0..=remaining {
            current.push(c);
            rec(remaining - c, slots - 1, current, out);
            current.pop();
        }
    }
    let mut out = Vec::new();
    rec(m, k, &mut Vec::new(), &mut out);
    out
}

fn grid_rec(
    problem: &Problem,
    horizon: usize,
    xs: &mut Vec<usize>,
    ys: &mut Vec<usize>,
    constraint: Option<&ContextConstraint>,
    lattice: &[Vec<u64>],
    neg_log: &[f64],
) -> Result<f64> {
    if ys.len() == horizon {
        return Ok(problem.sup_value(xs, ys)?.log());
    }
    let allowed = allowed_contexts(constraint, xs, ys, problem.x_size())?;
    let k = problem.k();
    let mut best: Option<f64> = None;
    for x in allowed {
        xs.push(x);
        let mut continuations = Vec::with_capacity(k);
        for y in 0..k {
            ys.push(y);
            let g = grid_rec(problem, horizon, xs, ys, constraint, lattice, neg_log);
            ys.pop();
            continuations.push(g?);
        }
        xs.pop();
        let mut node = f64::INFINITY;
        for point in lattice {
            let mut worst = f64::NEG_INFINITY;
            for (y, &g) in continuations.iter().enumerate() {
                // a dead continuation never hurts the learner, whatever mass
                // the lattice point wastes on it
                let term = if g == f64::NEG_INFINITY {
                    f64::NEG_INFINITY
                } else {
                    neg_log[point[y] as usize] + g
                };
                if term > worst {
                    worst = term;
                }
            }
            if worst < node {
                node = worst;
            }
        }
        if node == f64::INFINITY {
            node = f64::NEG_INFINITY;
        }
        if best.is_none_or(|b| node > b) {
            best = Some(node);
        }
    }
    Ok(best.expect("allowed_contexts is nonempty"))
}

/// The swapped game solved on the adversary's side.
#[derive(Clone, Debug, Serialize)]
pub struct DualGameReport {
    pub value: f64,
    pub optimal_tree: ContextTree,
    /// The maximizing distribution over label paths (softmax of the sup
    /// log-likelihood scores on the optimal tree), in mixed-radix path order.
    pub path_distribution: Vec<f64>,
    pub entropy: f64,
    pub expected_score: f64,
}

struct DualChoice {
    x: usize,
    children: Vec<Option<DualChoice>>,
}

/// Value of the swapped game: over context trees and path distributions,
/// maximize entropy plus expected sup log-likelihood. For a fixed tree the
/// inner maximum is the log of the linear-domain sum of path scores, so the
/// whole computation runs as a linear-domain compensated recursion — an
/// arithmetic-independent cross-check of the log-domain worst-case sum.
pub fn dual_game_value(
    problem: &Problem,
    horizon: usize,
    constraint: Option<&ContextConstraint>,
) -> Result<DualGameReport> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let (linear, choice) = dual_rec(problem, horizon, &mut xs, &mut ys, constraint)?;
    let value = linear.ln();

    // materialize the argmax tree
    let k = problem.k();
    let n = crate::tree::node_count(horizon, k) as usize;
    let mut nodes = vec![0usize; n];
    if let Some(root) = &choice {
        let mut prefix = Vec::new();
        fill_tree(root, &mut prefix, &mut nodes, horizon, k);
    }
    let optimal_tree = ContextTree::new(horizon, k, nodes)?;

    // softmax of the per-path scores on the optimal tree
    let total_paths = (k as u128).pow(horizon as u32) as usize;
    let mut scores = Vec::with_capacity(total_paths);
    let mut z = Kahan::default();
    for id in 0..total_paths {
        let path = path_from_index(id, horizon, k);
        let contexts = optimal_tree.contexts_along(&path);
        let s = problem.sup_value(&contexts, &path)?;
        z.add(s.linear());
        scores.push(s);
    }
    let z = z.value();
    let path_distribution: Vec<f64> = scores.iter().map(|s| s.linear() / z).collect();
    let mut entropy = 0.0;
    let mut expected_score = 0.0;
    for (p, s) in path_distribution.iter().zip(&scores) {
        if *p > 0.0 {
            entropy -= p * p.ln();
            expected_score += p * s.log();
        }
    }
    Ok(DualGameReport {
        value,
        optimal_tree,
        path_distribution,
        entropy,
        expected_score,
    })
}

fn dual_rec(
    problem: &Problem,
    horizon: usize,
    xs: &mut Vec<usize>,
    ys: &mut Vec<usize>,
    constraint: Option<&ContextConstraint>,
) -> Result<(f64, Option<DualChoice>)> {
    if ys.len() == horizon {
        return Ok((problem.sup_value(xs, ys)?.linear(), None));
    }
    let allowed = allowed_contexts(constraint, xs, ys, problem.x_size())?;
    let k = problem.k();
    let mut best: Option<(f64, DualChoice)> = None;
    for x in allowed {
        xs.push(x);
        let mut total = Kahan::default();
        let mut children = Vec::with_capacity(k);
        let mut failed = None;
        for y in 0..k {
            ys.push(y);
            match dual_rec(problem, horizon, xs, ys, constraint) {
                Ok((v, c)) => {
                    total.add(v);
                    children.push(c);
                }
                Err(e) => {
                    failed = Some(e);
                }
            }
            ys.pop();
            if failed.is_some() {
                break;
            }
        }
        xs.pop();
        if let Some(e) = failed {
            return Err(e);
        }
        let value = total.value();
        if best.as_ref().is_none_or(|(b, _)| value > *b) {
            best = Some((value, DualChoice { x, children }));
        }
    }
    let (value, choice) = best.expect("allowed_contexts is nonempty");
    Ok((value, Some(choice)))
}

fn fill_tree(
    choice: &DualChoice,
    prefix: &mut Vec<usize>,
    nodes: &mut [usize],
    depth: usize,
    arity: usize,
) {
    nodes[flat_node_index(depth, arity, prefix)] = choice.x;
    if prefix.len() + 1 < depth {
        for (y, child) in choice.children.iter().enumerate() {
            if let Some(child) = child {
                prefix.push(y);
                fill_tree(child, prefix, nodes, depth, arity);
                prefix.pop();
            }
        }
    }
}

/// Fixed-design value: the maximum over full context sequences of the
/// conditional Shtarkov log-sum, with the first attaining sequence.
pub fn fixed_design_value(
    problem: &Problem,
    horizon: usize,
    budget: u64,
) -> Result<(f64, Vec<usize>)> {
    let x_size = problem.x_size();
    let total = (x_size as u128).saturating_pow(horizon as u32);
    if total > budget as u128 {
        return Err(Error::BudgetExceeded {
            needed: total,
            budget,
        });
    }
    let mut best: Option<(f64, Vec<usize>)> = None;
    for id in 0..total as usize {
        let seq = path_from_index(id, horizon, x_size);
        let v = shtarkov::conditional(problem, &seq)?.log();
        if best.as_ref().is_none_or(|(b, _)| v > *b) {
            best = Some((v, seq));
        }
    }
    Ok(best.expect("at least one context sequence"))
}

/// Computes the primal, dual, and worst-case tree-sum values (optionally the
/// lattice upper bound) and their maximum pairwise deviation.
pub fn solve(
    problem: &Problem,
    horizon: usize,
    grid_resolution: Option<f64>,
    constraint: Option<&ContextConstraint>,
    grid_budget: u64,
) -> Result<GameValueReport> {
    let primal_value = minimax_regret_exact(problem, horizon, constraint)?;
    let dual_value = dual_game_value(problem, horizon, constraint)?.value;
    let worstcase_shtarkov =
        shtarkov::worst_case(problem, horizon, &Prefix::empty(), constraint)?.log();
    let grid_value = match grid_resolution {
        Some(h) => Some(minimax_regret_grid(
            problem, horizon, h, constraint, grid_budget,
        )?),
        None => None,
    };
    let mut entries = vec![primal_value, dual_value, worstcase_shtarkov];
    if let Some(g) = grid_value {
        entries.push(g);
    }
    let mut max_abs_gap: f64 = 0.0;
    for i in 0..entries.len() {
        for j in i + 1..entries.len() {
            let gap = if entries[i] == entries[j] {
                0.0 // covers the pair of -inf values
            } else {
                (entries[i] - entries[j]).abs()
            };
            max_abs_gap = max_abs_gap.max(gap);
        }
    }
    Ok(GameValueReport {
        primal_value,
        dual_value,
        worstcase_shtarkov,
        grid_value,
        max_abs_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::class::{FullBernoulliOracle, HypothesisClass};
    use crate::expert::Expert;
    use std::sync::Arc;

    fn bernoulli_full() -> Problem {
        Problem::context_free(2, HypothesisClass::oracle(Arc::new(FullBernoulliOracle)))
            .unwrap()
    }

    #[test]
    fn singleton_game_is_free() {
        let problem = Problem::context_free(
            2,
            HypothesisClass::explicit(vec![Expert::bernoulli(0.35).unwrap()]).unwrap(),
        )
        .unwrap();
        let report = solve(&problem, 3, None, None, 1 << 20).unwrap();
        assert!(report.primal_value.abs() < 1e-12);
        assert!(report.dual_value.abs() < 1e-12);
        assert!(report.worstcase_shtarkov.abs() < 1e-12);
        assert!(report.max_abs_gap < 1e-12);
        // the dual's maximizing path distribution is the expert's own
        let dual = dual_game_value(&problem, 2, None).unwrap();
        let expect = [0.65 * 0.65, 0.65 * 0.35, 0.35 * 0.65, 0.35 * 0.35];
        for (p, e) in dual.path_distribution.iter().zip(expect) {
            assert!((p - e).abs() < 1e-12);
        }
    }

    #[test]
    fn bernoulli_values() {
        let problem = bernoulli_full();
        let v1 = minimax_regret_exact(&problem, 1, None).unwrap();
        assert!((v1 - 2.0f64.ln()).abs() < 1e-12);
        let v2 = minimax_regret_exact(&problem, 2, None).unwrap();
        assert!((v2 - 2.5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn dual_point_mass_class_is_uniform_over_matches() {
        let class = HypothesisClass::explicit(vec![
            Expert::point_mass(&[0, 0], 2),
            Expert::point_mass(&[1, 0], 2),
            Expert::point_mass(&[1, 1], 2),
        ])
        .unwrap();
        let problem = Problem::context_free(2, class).unwrap();
        let dual = dual_game_value(&problem, 2, None).unwrap();
        assert!((dual.value - 3.0f64.ln()).abs() < 1e-12);
        let expect = [1.0 / 3.0, 0.0, 1.0 / 3.0, 1.0 / 3.0];
        for (p, e) in dual.path_distribution.iter().zip(expect) {
            assert!((p - e).abs() < 1e-12);
        }
        assert!((dual.entropy - 3.0f64.ln()).abs() < 1e-12);
        assert!(dual.expected_score.abs() < 1e-12);
    }

    #[test]
    fn dual_bernoulli_softmax() {
        let dual = dual_game_value(&bernoulli_full(), 2, None).unwrap();
        let expect = [0.4, 0.1, 0.1, 0.4];
        for (p, e) in dual.path_distribution.iter().zip(expect) {
            assert!((p - e).abs() < 1e-12);
        }
        assert!((dual.entropy + dual.expected_score - dual.value).abs() < 1e-12);
    }

    #[test]
    fn grid_learner_upper_bounds_and_converges() {
        let problem = bernoulli_full();
        let exact = minimax_regret_exact(&problem, 1, None).unwrap();
        let grid = minimax_regret_grid(&problem, 1, 1e-3, None, 1 << 20).unwrap();
        assert!(grid >= exact - 1e-12);
        assert!((grid - 2.0f64.ln()).abs() < 5e-4);
        // three point masses over three labels: optimum is uniform, off-grid
        let class = HypothesisClass::explicit(vec![
            Expert::point_mass(&[0], 3),
            Expert::point_mass(&[1], 3),
            Expert::point_mass(&[2], 3),
        ])
        .unwrap();
        let problem3 = Problem::context_free(3, class).unwrap();
        let exact3 = minimax_regret_exact(&problem3, 1, None).unwrap();
        assert!((exact3 - 3.0f64.ln()).abs() < 1e-12);
        let grid3 = minimax_regret_grid(&problem3, 1, 1e-2, None, 1 << 20).unwrap();
        assert!(grid3 >= exact3 - 1e-12);
        assert!((grid3 - 3.0f64.ln()).abs() < 2e-2);
    }

    #[test]
    fn grid_resolution_validation() {
        let problem = bernoulli_full();
        assert!(matches!(
            minimax_regret_grid(&problem, 1, 0.2, None, 1 << 20),
            Err(Error::InvalidGridResolution(_))
        ));
        assert!(matches!(
            minimax_regret_grid(&problem, 1, 1e-3, None, 10),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn three_way_equality_on_a_sequential_class() {
        // a deliberately lopsided explicit class with a sequential member
        let mut table = std::collections::HashMap::new();
        for (ctx, lab, p) in [
            (vec![0], vec![], 0.3),
            (vec![0, 0], vec![0], 0.8),
            (vec![0, 0], vec![1], 0.2),
        ] {
            table.insert(
                (ctx, lab),
                crate::dist::Distribution::bernoulli(p).unwrap(),
            );
        }
        let seq = Expert::Lookup(crate::expert::LookupExpert::new(2, table));
        let class =
            HypothesisClass::explicit(vec![seq, Expert::bernoulli(0.9).unwrap()]).unwrap();
        let problem = Problem::context_free(2, class).unwrap();
        let report = solve(&problem, 2, None, None, 1 << 20).unwrap();
        assert!(report.max_abs_gap < 1e-12, "gap {}", report.max_abs_gap);
        let (bf, _) =
            shtarkov::worst_case_bruteforce(&problem, 2, None, 1 << 20).unwrap();
        assert!((bf.log() - report.worstcase_shtarkov).abs() < 1e-12);
    }

    #[test]
    fn fixed_design_maximizes_conditional_sums() {
        let f0 = Expert::PerContext(vec![
            crate::dist::Distribution::bernoulli(0.1).unwrap(),
            crate::dist::Distribution::bernoulli(0.5).unwrap(),
        ]);
        let f1 = Expert::PerContext(vec![
            crate::dist::Distribution::bernoulli(0.9).unwrap(),
            crate::dist::Distribution::bernoulli(0.5).unwrap(),
        ]);
        let problem = Problem::new(
            crate::alphabet::LabelAlphabet::new(2).unwrap(),
            crate::alphabet::ContextAlphabet::new(2).unwrap(),
            HypothesisClass::explicit(vec![f0, f1]).unwrap(),
        );
        let (value, seq) = fixed_design_value(&problem, 2, 1 << 20).unwrap();
        // context 0 separates the experts; context 1 makes them identical
        assert_eq!(seq, vec![0, 0]);
        let direct = shtarkov::conditional(&problem, &[0, 0]).unwrap().log();
        assert!((value - direct).abs() < 1e-12);
        // fixed design never exceeds the adversarial tree value
        let wc = shtarkov::worst_case(&problem, 2, &Prefix::empty(), None)
            .unwrap()
            .log();
        assert!(value <= wc + 1e-12);
    }
}

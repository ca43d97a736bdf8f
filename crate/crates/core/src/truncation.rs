//! The smooth truncation map and its quantitative effects on losses,
//! likelihoods, and game values.
//!
//! Truncation at level delta mixes a distribution toward uniform:
//! q(y) = (p(y) + delta) / (1 + K*delta). It pushes every coordinate into
//! [delta/(1+K*delta), (1+delta)/(1+K*delta)], costs at most log(1+K*delta)
//! extra loss per round, inflates any T-round likelihood by at most
//! delta*(2^T - 1), and therefore moves regrets and worst-case tree sums by
//! amounts that vanish as delta drops to zero.

use serde::Serialize;

use crate::class::{HypothesisClass, Problem};
use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::expert::{likelihood, Expert};
use crate::game;
use crate::history::Prefix;
use crate::logval::LogValue;
use crate::shtarkov;
use crate::tree::ContextConstraint;

/// A truncation level, constrained to the open interval (0, 1/2).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TruncationLevel(f64);

impl TruncationLevel {
    pub fn new(delta: f64) -> Result<TruncationLevel> {
        if !(delta > 0.0 && delta < 0.5) {
            return Err(Error::InvalidTruncation(delta));
        }
        Ok(TruncationLevel(delta))
    }

    pub fn get(&self) -> f64 {
        self.0
    }
}

/// Log-spaced default grid exhibiting the delta -> 0 limit.
pub const DEFAULT_DELTA_GRID: [f64; 5] = [0.1, 0.03, 0.01, 0.003, 0.001];

pub fn truncate_dist(p: &Distribution, level: TruncationLevel) -> Distribution {
    p.smooth_truncate(level.get())
}

/// Inverse of the truncation map on its image; the result is a valid
/// distribution exactly when `q` lies in the image box.
pub fn truncate_dist_inverse(q: &Distribution, level: TruncationLevel) -> Result<Distribution> {
    let delta = level.get();
    let k = q.len() as f64;
    Distribution::new(
        q.probs()
            .iter()
            .map(|&v| v * (1.0 + k * delta) - delta)
            .collect(),
    )
}

/// Coordinate bounds of the truncation image over `k` labels.
pub fn image_box(k: usize, level: TruncationLevel) -> (f64, f64) {
    let delta = level.get();
    let denom = 1.0 + k as f64 * delta;
    (delta / denom, (1.0 + delta) / denom)
}

/// Applies truncation to every expert of an explicit class.
pub fn truncate_class(class: &HypothesisClass, level: TruncationLevel) -> Result<HypothesisClass> {
    let experts = class.experts().ok_or_else(|| Error::Unsupported {
        required: "an explicit finite class".into(),
        got: "a sup oracle".into(),
    })?;
    HypothesisClass::explicit(
        experts
            .iter()
            .map(|f| Expert::Truncated {
                inner: Box::new(f.clone()),
                delta: level.get(),
            })
            .collect(),
    )
}

fn truncate_problem(problem: &Problem, level: TruncationLevel) -> Result<Problem> {
    Ok(Problem::new(
        problem.labels,
        problem.contexts.clone(),
        truncate_class(&problem.class, level)?,
    ))
}

/// Change in log loss from truncating the prediction:
/// loss(truncate(p), y) - loss(p, y). At most log(1 + K*delta); negative
/// infinity when truncation rescues a zero-probability label.
pub fn loss_gap(p: &Distribution, label: usize, level: TruncationLevel) -> f64 {
    let before = p.prob(label);
    let after = truncate_dist(p, level).prob(label);
    if before == 0.0 {
        return f64::NEG_INFINITY;
    }
    -(after.ln()) - -(before.ln())
}

/// Linear-domain likelihood inflation from truncating an expert:
/// L(truncated f) - L(f) over the given history. Bounded by
/// delta * (2^T - 1); often negative.
pub fn likelihood_gap(
    expert: &Expert,
    contexts: &[usize],
    labels: &[usize],
    level: TruncationLevel,
) -> Result<f64> {
    let truncated = Expert::Truncated {
        inner: Box::new(expert.clone()),
        delta: level.get(),
    };
    let before = likelihood(expert, contexts, labels)?.linear();
    let after = likelihood(&truncated, contexts, labels)?.linear();
    Ok(after - before)
}

/// The horizon constant bounding likelihood inflation: sum of the binomial
/// coefficients C(T, 1..=T), i.e. 2^T - 1.
pub fn likelihood_gap_constant(horizon: usize) -> Result<u64> {
    if horizon >= 62 {
        return Err(Error::HorizonTooLarge {
            horizon,
            reason: "2^T - 1 would overflow the inflation bound".into(),
        });
    }
    Ok((1u64 << horizon) - 1)
}

/// One row of the truncation report: how far the truncated-class game value
/// and worst-case tree sum sit from the originals at one level.
#[derive(Clone, Debug, Serialize)]
pub struct RegretGapEntry {
    pub delta: f64,
    pub regret_original: f64,
    pub regret_truncated: f64,
    /// Slack in `regret(F) <= regret(truncated F) + T log(1 + K delta)`.
    pub regret_slack: f64,
    pub regret_holds: bool,
    pub shtarkov_original: f64,
    pub shtarkov_truncated: f64,
    /// Slack in `log Sh(truncated F) <= log(Sh(F) + delta (2^T-1) K^T)`.
    pub shtarkov_slack: f64,
    pub shtarkov_holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RegretGapReport {
    pub horizon: usize,
    pub entries: Vec<RegretGapEntry>,
    pub all_hold: bool,
}

/// Compares exact game values and worst-case tree sums of a class and its
/// truncations over a grid of levels.
pub fn truncated_regret_gap_check(
    problem: &Problem,
    horizon: usize,
    deltas: &[f64],
    constraint: Option<&ContextConstraint>,
) -> Result<RegretGapReport> {
    let regret_original = game::minimax_regret_exact(problem, horizon, constraint)?;
    let shtarkov_original =
        shtarkov::worst_case(problem, horizon, &Prefix::empty(), constraint)?;
    let k = problem.k() as f64;
    let m_t = likelihood_gap_constant(horizon)? as f64;
    let mut entries = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let level = TruncationLevel::new(delta)?;
        let truncated = truncate_problem(problem, level)?;
        let regret_truncated = game::minimax_regret_exact(&truncated, horizon, constraint)?;
        let shtarkov_truncated =
            shtarkov::worst_case(&truncated, horizon, &Prefix::empty(), constraint)?;
        let per_round = (1.0 + k * delta).ln();
        let regret_slack =
            regret_truncated + horizon as f64 * per_round - regret_original;
        let inflated = LogValue::from_linear(
            shtarkov_original.linear() + delta * m_t * k.powi(horizon as i32),
        );
        let shtarkov_slack = inflated.log() - shtarkov_truncated.log();
        entries.push(RegretGapEntry {
            delta,
            regret_original,
            regret_truncated,
            regret_slack,
            regret_holds: regret_slack >= -1e-9,
            shtarkov_original: shtarkov_original.log(),
            shtarkov_truncated: shtarkov_truncated.log(),
            shtarkov_slack,
            shtarkov_holds: shtarkov_slack >= -1e-9,
        });
    }
    let all_hold = entries.iter().all(|e| e.regret_holds && e.shtarkov_holds);
    Ok(RegretGapReport {
        horizon,
        entries,
        all_hold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn level(d: f64) -> TruncationLevel {
        TruncationLevel::new(d).unwrap()
    }

    #[test]
    fn level_bounds_are_open() {
        assert!(TruncationLevel::new(0.0).is_err());
        assert!(TruncationLevel::new(0.5).is_err());
        assert!(TruncationLevel::new(-0.1).is_err());
        assert!(TruncationLevel::new(0.499).is_ok());
    }

    #[test]
    fn truncation_values() {
        let p = Distribution::new(vec![1.0, 0.0, 0.0]).unwrap();
        let q = truncate_dist(&p, level(0.2));
        let expect = [0.75, 0.125, 0.125];
        for (a, b) in q.probs().iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        let (lo, hi) = image_box(3, level(0.2));
        for &v in q.probs() {
            assert!(v >= lo - 1e-15 && v <= hi + 1e-15);
        }
    }

    #[test]
    fn inverse_round_trips_on_the_image() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let k = rng.random_range(2..=4);
            let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..1.0)).collect();
            let total: f64 = raw.iter().sum();
            let p = Distribution::new(raw.iter().map(|v| v / total).collect()).unwrap();
            let lv = level(rng.random_range(0.01..0.49));
            let q = truncate_dist(&p, lv);
            let back = truncate_dist_inverse(&q, lv).unwrap();
            for (a, b) in back.probs().iter().zip(p.probs()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn loss_gap_cases() {
        // truncation rescues a dead label
        let p = Distribution::point_mass(2, 0);
        assert_eq!(loss_gap(&p, 1, level(0.1)), f64::NEG_INFINITY);
        // uniform is a fixed point
        let u = Distribution::uniform(3);
        assert!(loss_gap(&u, 2, level(0.2)).abs() < 1e-15);
        // generic case stays below the per-round bound
        let p = Distribution::bernoulli(0.1).unwrap();
        let g = loss_gap(&p, 1, level(0.1));
        assert!(g <= 1.2f64.ln() + 1e-15);
    }

    #[test]
    fn loss_gap_bound_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for k in 2..=4usize {
            for _ in 0..2000 {
                let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..1.0)).collect();
                let total: f64 = raw.iter().sum();
                let p = Distribution::new(raw.iter().map(|v| v / total).collect()).unwrap();
                let d = rng.random_range(1e-4..0.4999);
                let y = rng.random_range(0..k);
                let gap = loss_gap(&p, y, level(d));
                let bound = (1.0 + k as f64 * d).ln();
                assert!(gap <= bound + 1e-12);
                assert!(bound <= k as f64 * d + 1e-12);
            }
        }
    }

    #[test]
    fn likelihood_gap_constant_values() {
        assert_eq!(likelihood_gap_constant(3).unwrap(), 7);
        assert_eq!(likelihood_gap_constant(1).unwrap(), 1);
        assert!(likelihood_gap_constant(62).is_err());
        assert_eq!(likelihood_gap_constant(61).unwrap(), (1u64 << 61) - 1);
    }

    #[test]
    fn likelihood_gap_cases() {
        // deterministic expert on its own path: truncation only loses mass
        let f = Expert::point_mass(&[1, 1], 2);
        let g = likelihood_gap(&f, &[0, 0], &[1, 1], level(0.1)).unwrap();
        let expect = (1.1f64 / 1.2).powi(2) - 1.0;
        assert!((g - expect).abs() < 1e-15);
        assert!(g <= 0.1 * 3.0);
        // uniform expert is untouched
        let u = Expert::Constant(Distribution::uniform(2));
        let g = likelihood_gap(&u, &[0, 0, 0], &[1, 0, 1], level(0.05)).unwrap();
        assert!(g.abs() < 1e-15);
    }

    #[test]
    fn truncated_class_predicts_truncated_distributions() {
        let class = HypothesisClass::explicit(vec![
            Expert::bernoulli(0.0).unwrap(),
            Expert::bernoulli(1.0).unwrap(),
        ])
        .unwrap();
        let truncated = truncate_class(&class, level(0.1)).unwrap();
        let experts = truncated.experts().unwrap();
        let d = experts[0].predict(&[0], &[]).unwrap();
        assert!((d.prob(1) - 1.0 / 12.0).abs() < 1e-15);
        assert!((d.prob(0) - 11.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn regret_gaps_shrink_toward_zero() {
        let class = HypothesisClass::explicit(vec![
            Expert::bernoulli(0.0).unwrap(),
            Expert::bernoulli(1.0).unwrap(),
        ])
        .unwrap();
        let problem = Problem::context_free(2, class).unwrap();
        let report =
            truncated_regret_gap_check(&problem, 2, &[0.1, 0.01, 0.001], None).unwrap();
        assert!(report.all_hold);
        for pair in report.entries.windows(2) {
            assert!(pair[1].regret_slack <= pair[0].regret_slack + 1e-12);
            assert!(pair[1].shtarkov_slack <= pair[0].shtarkov_slack + 1e-12);
        }
        let last = report.entries.last().unwrap();
        assert!(last.regret_slack < 0.01);
        assert!(last.regret_slack >= -1e-9);
    }
}

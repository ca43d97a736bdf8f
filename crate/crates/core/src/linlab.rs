//! Linear and absolute-linear binary classes on finite designs.
//!
//! The linear class maps a context vector x to the Bernoulli parameter
//! (<w, x> + 1)/2 with w in the unit ball; the absolute-linear class maps it
//! to |<w, x>|. On an orthonormal design the linear class's supremum
//! likelihood has a closed form: writing the effective coordinate of round t
//! as u_t = (2 y_t - 1) <w, x_t>, the objective sum_t log((1 + u_t)/2) under
//! sum u_t^2 <= 1 is maximized at u_t = 1/sqrt(T), independent of the
//! labels. The conditional Shtarkov log-sum on that design is therefore
//! T log(1 + 1/sqrt(T)), which stays above sqrt(T)/4 at every horizon.

use std::sync::Arc;

use serde::Serialize;

use crate::alphabet::{ContextAlphabet, LabelAlphabet};
use crate::class::{HypothesisClass, Problem, SupOracle};
use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::expert::Expert;
use crate::logval::LogValue;

pub const NORM_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LinearVariant {
    /// x -> (<w, x> + 1) / 2
    Lin,
    /// x -> |<w, x>|
    AbsLin,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Validates a design: consistent dimension, norms at most 1.
pub fn validate_design(design: &[Vec<f64>]) -> Result<usize> {
    if design.is_empty() {
        return Err(Error::Unsupported {
            required: "a nonempty design".into(),
            got: "0 points".into(),
        });
    }
    let dim = design[0].len();
    for (i, v) in design.iter().enumerate() {
        if v.len() != dim {
            return Err(Error::LengthMismatch {
                contexts: dim,
                labels: v.len(),
            });
        }
        if norm(v) > 1.0 + NORM_TOL {
            return Err(Error::InvalidDistribution {
                reason: format!("design point {i} has norm {} > 1", norm(v)),
            });
        }
    }
    Ok(dim)
}

/// The first `horizon` standard basis vectors of R^dim.
pub fn orthonormal_design(horizon: usize, dim: usize) -> Result<Vec<Vec<f64>>> {
    if dim < horizon {
        return Err(Error::DimensionTooSmall { horizon, dim });
    }
    Ok((0..horizon)
        .map(|t| {
            let mut v = vec![0.0; dim];
            v[t] = 1.0;
            v
        })
        .collect())
}

/// Pairwise orthonormality check (unit norms, zero dot products).
pub fn is_orthonormal(design: &[Vec<f64>]) -> bool {
    for (i, a) in design.iter().enumerate() {
        if (norm(a) - 1.0).abs() > 1e-9 {
            return false;
        }
        for b in design.iter().skip(i + 1) {
            if dot(a, b).abs() > 1e-9 {
                return false;
            }
        }
    }
    true
}

/// Bernoulli parameter of the linear expert with weights `w` at `x`.
pub fn lin_eval(w: &[f64], x: &[f64]) -> f64 {
    ((dot(w, x) + 1.0) / 2.0).clamp(0.0, 1.0)
}

/// Value of the absolute-linear expert with weights `w` at `x`.
pub fn abslin_eval(w: &[f64], x: &[f64]) -> f64 {
    dot(w, x).abs()
}

/// Supremum log-likelihood of the linear class over one round per design
/// point. On an orthonormal design this is the closed form
/// T log((1 + 1/sqrt(T)) / 2), independent of the labels; otherwise the
/// projected-gradient maximizer is used and `exact` is false.
pub fn lin_sup_log_likelihood(design: &[Vec<f64>], labels: &[usize]) -> Result<(LogValue, bool)> {
    validate_design(design)?;
    if design.len() != labels.len() {
        return Err(Error::LengthMismatch {
            contexts: design.len(),
            labels: labels.len(),
        });
    }
    for &y in labels {
        if y > 1 {
            return Err(Error::LabelOutOfRange { label: y, size: 2 });
        }
    }
    if labels.is_empty() {
        return Ok((LogValue::ONE, true));
    }
    if is_orthonormal(design) {
        let t = design.len() as f64;
        let value = t * (((1.0 + 1.0 / t.sqrt()) / 2.0).ln());
        Ok((LogValue::from_log(value), true))
    } else {
        let (value, _) = lin_sup_numeric(design, labels);
        Ok((value, false))
    }
}

/// Projected-gradient maximizer of the linear class's log-likelihood over the
/// unit ball: 500 iterations, step 0.1/sqrt(iter), deterministic start at the
/// normalized label-reflection point. The objective is concave in the
/// effective coordinates, so the stationary point it settles on is global.
pub fn lin_sup_numeric(design: &[Vec<f64>], labels: &[usize]) -> (LogValue, Vec<f64>) {
    let dim = design[0].len();
    let t = design.len();
    let signs: Vec<f64> = labels.iter().map(|&y| 2.0 * y as f64 - 1.0).collect();

    let objective = |w: &[f64]| -> f64 {
        let mut total = 0.0;
        for i in 0..t {
            let p = (signs[i] * dot(w, &design[i]) + 1.0) / 2.0;
            if p <= 0.0 {
                return f64::NEG_INFINITY;
            }
            total += p.ln();
        }
        total
    };

    // start at the reflection witness sum_t (2y_t - 1) x_t / sqrt(T),
    // renormalized into the ball for non-orthonormal designs
    let mut w = vec![0.0; dim];
    for i in 0..t {
        for d in 0..dim {
            w[d] += signs[i] * design[i][d] / (t as f64).sqrt();
        }
    }
    let n = norm(&w);
    if n > 1.0 {
        for v in w.iter_mut() {
            *v /= n;
        }
    }

    let mut best = objective(&w);
    for iter in 1..=500usize {
        let mut grad = vec![0.0; dim];
        for i in 0..t {
            let p = (signs[i] * dot(&w, &design[i]) + 1.0) / 2.0;
            if p <= 0.0 {
                continue;
            }
            let coeff = signs[i] / (2.0 * p);
            for d in 0..dim {
                grad[d] += coeff * design[i][d];
            }
        }
        let mut step = 0.1 / (iter as f64).sqrt();
        loop {
            let mut cand: Vec<f64> = w
                .iter()
                .zip(&grad)
                .map(|(wi, gi)| wi + step * gi)
                .collect();
            let n = norm(&cand);
            if n > 1.0 {
                for v in cand.iter_mut() {
                    *v /= n;
                }
            }
            let val = objective(&cand);
            if val.is_finite() && val >= best {
                w = cand;
                best = val;
                break;
            }
            step /= 2.0;
            if step < 1e-12 {
                break;
            }
        }
        if best.is_finite() && iter > 1 && step < 1e-12 {
            break;
        }
    }
    (LogValue::from_log(best), w)
}

/// Sup oracle for the linear class over a fixed design: context ids index
/// design points. Exact when the contexts visited are distinct points of an
/// orthonormal design; numerical (projected gradient) otherwise.
#[derive(Debug)]
pub struct LinOracle {
    design: Vec<Vec<f64>>,
}

impl LinOracle {
    pub fn new(design: Vec<Vec<f64>>) -> Result<LinOracle> {
        validate_design(&design)?;
        Ok(LinOracle { design })
    }
}

impl SupOracle for LinOracle {
    fn sup_log_likelihood(&self, contexts: &[usize], labels: &[usize]) -> Result<LogValue> {
        if contexts.len() != labels.len() {
            return Err(Error::LengthMismatch {
                contexts: contexts.len(),
                labels: labels.len(),
            });
        }
        let mut effective = Vec::with_capacity(contexts.len());
        for &c in contexts {
            let x = self.design.get(c).ok_or(Error::ContextOutOfRange {
                context: c,
                size: self.design.len(),
            })?;
            effective.push(x.clone());
        }
        Ok(lin_sup_log_likelihood(&effective, labels)?.0)
    }

    fn name(&self) -> &str {
        "linear"
    }
}

/// The conditional Shtarkov log-sum of the linear class on the orthonormal
/// design, against the closed-form floor `T log(1 + 1/sqrt(T))` and the
/// headline floor `sqrt(T)/4`.
#[derive(Clone, Debug, Serialize)]
pub struct LowerBoundReport {
    pub horizon: usize,
    pub dim: usize,
    pub conditional_shtarkov_log: f64,
    pub closed_form: f64,
    pub quarter_sqrt_t: f64,
    pub bounds_hold: bool,
}

/// Enumerates all 2^T label paths on the orthonormal design and sums the
/// per-path supremum likelihoods.
pub fn lin_lower_bound_experiment(
    horizon: usize,
    dim: usize,
    budget: u64,
) -> Result<LowerBoundReport> {
    let design = orthonormal_design(horizon, dim)?;
    let paths = 1u128
        .checked_shl(horizon as u32)
        .unwrap_or(u128::MAX);
    if paths > budget as u128 {
        return Err(Error::BudgetExceeded {
            needed: paths,
            budget,
        });
    }
    let mut terms = Vec::with_capacity(paths as usize);
    let mut labels = vec![0usize; horizon];
    for id in 0..paths as usize {
        for (t, slot) in labels.iter_mut().enumerate() {
            *slot = (id >> (horizon - 1 - t)) & 1;
        }
        let (v, exact) = lin_sup_log_likelihood(&design, &labels)?;
        debug_assert!(exact);
        terms.push(v);
    }
    let conditional = LogValue::sum(&terms).log();
    let t = horizon as f64;
    let closed_form = t * ((1.0 + 1.0 / t.sqrt()).ln());
    let quarter = t.sqrt() / 4.0;
    let bounds_hold = conditional >= closed_form - 1e-9 && closed_form >= quarter - 1e-12;
    Ok(LowerBoundReport {
        horizon,
        dim,
        conditional_shtarkov_log: conditional,
        closed_form,
        quarter_sqrt_t: quarter,
        bounds_hold,
    })
}

/// Grid of weight vectors on the unit ball: per-coordinate linspace over
/// [-1, 1] filtered to the ball, in lexicographic order.
pub fn ball_grid(dim: usize, per_dim: usize) -> Vec<Vec<f64>> {
    assert!(per_dim >= 2);
    let coords: Vec<f64> = (0..per_dim)
        .map(|i| -1.0 + 2.0 * i as f64 / (per_dim - 1) as f64)
        .collect();
    let mut out = Vec::new();
    let mut idx = vec![0usize; dim];
    loop {
        let w: Vec<f64> = idx.iter().map(|&i| coords[i]).collect();
        if norm(&w) <= 1.0 + NORM_TOL {
            out.push(w);
        }
        let mut d = dim;
        loop {
            if d == 0 {
                return out;
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] < per_dim {
                break;
            }
            idx[d] = 0;
        }
    }
}

/// Finite surrogate of a linear or absolute-linear class: one non-sequential
/// expert per grid weight vector, over contexts indexing the design points.
pub fn grid_class(
    variant: LinearVariant,
    design: &[Vec<f64>],
    per_dim: usize,
) -> Result<Problem> {
    let dim = validate_design(design)?;
    let experts: Vec<Expert> = ball_grid(dim, per_dim)
        .into_iter()
        .map(|w| {
            let rows: Result<Vec<Distribution>> = design
                .iter()
                .map(|x| {
                    let p1 = match variant {
                        LinearVariant::Lin => lin_eval(&w, x),
                        LinearVariant::AbsLin => abslin_eval(&w, x),
                    };
                    Distribution::bernoulli(p1)
                })
                .collect();
            Ok(Expert::PerContext(rows?))
        })
        .collect::<Result<_>>()?;
    Ok(Problem::new(
        LabelAlphabet::new(2)?,
        ContextAlphabet::new(design.len())?,
        HypothesisClass::explicit(experts)?,
    ))
}

/// The linear-class problem backed by the sup oracle.
pub fn oracle_problem(design: Vec<Vec<f64>>) -> Result<Problem> {
    let n = design.len();
    Ok(Problem::new(
        LabelAlphabet::new(2)?,
        ContextAlphabet::new(n)?,
        HypothesisClass::oracle(Arc::new(LinOracle::new(design)?)),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthonormal_design_shapes() {
        let d = orthonormal_design(3, 5).unwrap();
        assert_eq!(d.len(), 3);
        assert!(is_orthonormal(&d));
        for (i, a) in d.iter().enumerate() {
            for (j, b) in d.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot(a, b) - expect).abs() < 1e-15);
            }
        }
        assert!(matches!(
            orthonormal_design(4, 3),
            Err(Error::DimensionTooSmall { .. })
        ));
    }

    #[test]
    fn closed_form_values() {
        let d1 = orthonormal_design(1, 1).unwrap();
        let (v, exact) = lin_sup_log_likelihood(&d1, &[1]).unwrap();
        assert!(exact);
        assert!(v.log().abs() < 1e-12); // w = x_1 predicts the label outright

        let d4 = orthonormal_design(4, 4).unwrap();
        let (v, _) = lin_sup_log_likelihood(&d4, &[0, 1, 1, 0]).unwrap();
        assert!((v.log() - 4.0 * 0.75f64.ln()).abs() < 1e-12);
        assert!((v.log() + 1.1507282897097862).abs() < 1e-9);

        // label-flip invariance
        let (v2, _) = lin_sup_log_likelihood(&d4, &[1, 0, 0, 1]).unwrap();
        assert_eq!(v.log(), v2.log());
    }

    #[test]
    fn closed_form_agrees_with_projected_gradient() {
        for t in [1usize, 2, 3, 5, 8] {
            let design = orthonormal_design(t, t).unwrap();
            let labels: Vec<usize> = (0..t).map(|i| i % 2).collect();
            let (exact, _) = lin_sup_log_likelihood(&design, &labels).unwrap();
            let (numeric, w) = lin_sup_numeric(&design, &labels);
            assert!(
                (exact.log() - numeric.log()).abs() < 1e-8,
                "T={t}: {} vs {}",
                exact.log(),
                numeric.log()
            );
            assert!(norm(&w) <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn non_orthonormal_design_falls_back_to_numeric() {
        let design = vec![vec![1.0, 0.0], vec![0.8, 0.6]];
        let (_, exact) = lin_sup_log_likelihood(&design, &[1, 1]).unwrap();
        assert!(!exact);
    }

    #[test]
    fn lower_bound_chain() {
        for t in [1usize, 2, 4, 8] {
            let report = lin_lower_bound_experiment(t, t, 1 << 20).unwrap();
            assert!(report.bounds_hold, "horizon {t}");
            assert!(
                (report.conditional_shtarkov_log - report.closed_form).abs() < 1e-9,
                "horizon {t}: {} vs {}",
                report.conditional_shtarkov_log,
                report.closed_form
            );
        }
        let r4 = lin_lower_bound_experiment(4, 4, 1 << 20).unwrap();
        assert!((r4.closed_form - 1.6218604324326575).abs() < 1e-9);
        assert!((r4.quarter_sqrt_t - 0.5).abs() < 1e-15);
    }

    #[test]
    fn scalar_bound_holds_across_horizons() {
        for t in 1..=64usize {
            let tf = t as f64;
            assert!(tf * (1.0 + 1.0 / tf.sqrt()).ln() >= tf.sqrt() / 4.0);
        }
    }

    #[test]
    fn abslin_evaluation() {
        assert_eq!(abslin_eval(&[0.0, 0.0], &[1.0, 0.0]), 0.0);
        assert_eq!(abslin_eval(&[1.0, 0.0], &[1.0, 0.0]), 1.0);
        assert!((abslin_eval(&[-0.5, 0.5], &[1.0, 0.0]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn grid_classes_share_design_shape() {
        let design = orthonormal_design(2, 2).unwrap();
        let lin = grid_class(LinearVariant::Lin, &design, 5).unwrap();
        let abs = grid_class(LinearVariant::AbsLin, &design, 5).unwrap();
        assert_eq!(lin.class.len(), abs.class.len());
        assert_eq!(lin.x_size(), 2);
    }
}

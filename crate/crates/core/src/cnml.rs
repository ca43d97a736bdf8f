//! The minimax optimal forecaster and a harness to play it (and baselines)
//! against arbitrary adversaries.
//!
//! At each round the forecaster scores every candidate label by the worst
//! case, over context trees for the remaining rounds, of the prefix Shtarkov
//! sum with that label appended, and predicts the normalized scores. When all
//! scores vanish every expert is already infinitely behind and the prediction
//! falls back to uniform — any strictly positive choice is minimax optimal
//! there, and uniform keeps runs deterministic.

use std::cell::RefCell;
use std::rc::Rc;

use serde::Serialize;

use crate::class::Problem;
use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::expert::{likelihood, Expert};
use crate::history::Prefix;
use crate::logval::LogValue;
use crate::shtarkov::{self, PrefixMemo};
use crate::tree::{allowed_contexts, path_from_index, ContextConstraint};
use crate::truncation::{self, TruncationLevel};

/// One round of the normalized worst-case prefix-sum forecaster. The prefix
/// must hold the fresh context: t contexts against t-1 labels.
pub fn cnml_predict(
    problem: &Problem,
    horizon: usize,
    prefix: &Prefix,
    constraint: Option<&ContextConstraint>,
    memo: &mut PrefixMemo,
) -> Result<Distribution> {
    let t = prefix.contexts().len();
    if t != prefix.labels().len() + 1 {
        return Err(Error::InvalidPrefix {
            contexts: t,
            labels: prefix.labels().len(),
        });
    }
    if t > horizon {
        return Err(Error::DepthMismatch {
            tree_depth: 0,
            prefix_len: t,
            horizon,
        });
    }
    let k = problem.k();
    let mut scores = Vec::with_capacity(k);
    for y in 0..k {
        let extended = prefix.with_label(y);
        scores.push(shtarkov::worst_case_memoized(
            problem, horizon, &extended, constraint, memo,
        )?);
    }
    let total = LogValue::sum(&scores);
    if total.is_zero() {
        return Ok(Distribution::uniform(k));
    }
    let probs: Vec<f64> = scores
        .iter()
        .map(|s| {
            if s.is_zero() {
                0.0
            } else {
                (s.log() - total.log()).exp()
            }
        })
        .collect();
    Distribution::new(normalize(probs))
}

// exact normalization so downstream validation never trips on rounding
fn normalize(mut probs: Vec<f64>) -> Vec<f64> {
    let total: f64 = probs.iter().sum();
    if total > 0.0 {
        for p in probs.iter_mut() {
            *p /= total;
        }
    }
    probs
}

/// The context-free normalized-maximum-likelihood distribution over full
/// label sequences, in mixed-radix path order.
pub fn nml_distribution(problem: &Problem, horizon: usize) -> Result<Vec<f64>> {
    let k = problem.k();
    let total_paths = (k as u128).pow(horizon as u32) as usize;
    let mut sups = Vec::with_capacity(total_paths);
    for id in 0..total_paths {
        let path = path_from_index(id, horizon, k);
        sups.push(problem.sup_value(&vec![0; horizon], &path)?);
    }
    let z = LogValue::sum(&sups);
    if z.is_zero() {
        return Err(Error::EmptySupport);
    }
    Ok(normalize(
        sups.iter()
            .map(|s| if s.is_zero() { 0.0 } else { (s.log() - z.log()).exp() })
            .collect(),
    ))
}

/// The minimax response once the context sequence is known in advance: the
/// normalized-maximum-likelihood distribution of the class projected onto
/// that sequence.
pub fn fixed_design_nml(problem: &Problem, contexts: &[usize]) -> Result<Vec<f64>> {
    problem.check_sequences(contexts, &[])?;
    let k = problem.k();
    let horizon = contexts.len();
    let total_paths = (k as u128).pow(horizon as u32) as usize;
    let mut sups = Vec::with_capacity(total_paths);
    for id in 0..total_paths {
        let path = path_from_index(id, horizon, k);
        sups.push(problem.sup_value(contexts, &path)?);
    }
    let z = LogValue::sum(&sups);
    if z.is_zero() {
        return Err(Error::EmptySupport);
    }
    Ok(normalize(
        sups.iter()
            .map(|s| if s.is_zero() { 0.0 } else { (s.log() - z.log()).exp() })
            .collect(),
    ))
}

/// A stateful per-game policy: observe a context, emit a distribution,
/// observe the revealed label.
pub trait Forecaster {
    fn name(&self) -> String;
    fn predict(&mut self, context: usize) -> Result<Distribution>;
    fn observe(&mut self, label: usize) -> Result<()>;
}

/// The shipped forecasters.
#[derive(Clone, Debug, PartialEq)]
pub enum ForecasterKind {
    /// The minimax optimal forecaster.
    Cnml,
    /// Uniform prediction every round.
    Uniform,
    /// Bayes predictive mixture over an explicit class with uniform prior.
    Bayes,
    /// Bayes mixture over the smooth-truncated class.
    TruncatedBayes { delta: f64 },
    /// Copies one member of an explicit class.
    Follow { index: usize },
}

/// Builds fresh single-game forecaster instances. Instances made by the same
/// factory share the worst-case prefix cache, which has no observable effect
/// beyond speed.
pub struct ForecasterFactory {
    problem: Problem,
    horizon: usize,
    constraint: Option<ContextConstraint>,
    kind: ForecasterKind,
    cache: Rc<RefCell<PrefixMemo>>,
    bayes_experts: Vec<Expert>,
}

impl ForecasterFactory {
    pub fn new(
        problem: &Problem,
        horizon: usize,
        constraint: Option<&ContextConstraint>,
        kind: ForecasterKind,
    ) -> Result<ForecasterFactory> {
        let bayes_experts = match &kind {
            ForecasterKind::Bayes | ForecasterKind::Follow { .. } => problem
                .class
                .experts()
                .ok_or_else(|| Error::Unsupported {
                    required: "an explicit finite class".into(),
                    got: "a sup oracle".into(),
                })?
                .to_vec(),
            ForecasterKind::TruncatedBayes { delta } => {
                let level = TruncationLevel::new(*delta)?;
                let truncated = truncation::truncate_class(&problem.class, level)?;
                truncated.experts().expect("truncated class is explicit").to_vec()
            }
            _ => Vec::new(),
        };
        if let ForecasterKind::Follow { index } = kind {
            if index >= bayes_experts.len() {
                return Err(Error::Unsupported {
                    required: format!("expert index below {}", bayes_experts.len()),
                    got: format!("{index}"),
                });
            }
        }
        Ok(ForecasterFactory {
            problem: problem.clone(),
            horizon,
            constraint: constraint.cloned(),
            kind,
            cache: Rc::new(RefCell::new(PrefixMemo::new())),
            bayes_experts,
        })
    }

    pub fn name(&self) -> String {
        match &self.kind {
            ForecasterKind::Cnml => "cnml".into(),
            ForecasterKind::Uniform => "uniform".into(),
            ForecasterKind::Bayes => "bayes".into(),
            ForecasterKind::TruncatedBayes { delta } => format!("bayes_truncated({delta})"),
            ForecasterKind::Follow { index } => format!("follow({index})"),
        }
    }

    pub fn fresh(&self) -> Box<dyn Forecaster> {
        match &self.kind {
            ForecasterKind::Cnml => Box::new(CnmlForecaster {
                problem: self.problem.clone(),
                horizon: self.horizon,
                constraint: self.constraint.clone(),
                cache: Rc::clone(&self.cache),
                contexts: Vec::new(),
                labels: Vec::new(),
            }),
            ForecasterKind::Uniform => Box::new(UniformForecaster {
                k: self.problem.k(),
            }),
            ForecasterKind::Bayes | ForecasterKind::TruncatedBayes { .. } => {
                Box::new(BayesMixtureForecaster {
                    experts: self.bayes_experts.clone(),
                    k: self.problem.k(),
                    contexts: Vec::new(),
                    labels: Vec::new(),
                })
            }
            ForecasterKind::Follow { index } => Box::new(FollowExpertForecaster {
                expert: self.bayes_experts[*index].clone(),
                contexts: Vec::new(),
                labels: Vec::new(),
            }),
        }
    }
}

struct CnmlForecaster {
    problem: Problem,
    horizon: usize,
    constraint: Option<ContextConstraint>,
    cache: Rc<RefCell<PrefixMemo>>,
    contexts: Vec<usize>,
    labels: Vec<usize>,
}

impl Forecaster for CnmlForecaster {
    fn name(&self) -> String {
        "cnml".into()
    }

    fn predict(&mut self, context: usize) -> Result<Distribution> {
        self.contexts.push(context);
        let prefix = Prefix::new(self.contexts.clone(), self.labels.clone())?;
        let mut memo = self.cache.borrow_mut();
        cnml_predict(
            &self.problem,
            self.horizon,
            &prefix,
            self.constraint.as_ref(),
            &mut memo,
        )
    }

    fn observe(&mut self, label: usize) -> Result<()> {
        self.problem.labels.check(label)?;
        self.labels.push(label);
        Ok(())
    }
}

struct UniformForecaster {
    k: usize,
}

impl Forecaster for UniformForecaster {
    fn name(&self) -> String {
        "uniform".into()
    }

    fn predict(&mut self, _context: usize) -> Result<Distribution> {
        Ok(Distribution::uniform(self.k))
    }

    fn observe(&mut self, _label: usize) -> Result<()> {
        Ok(())
    }
}

struct BayesMixtureForecaster {
    experts: Vec<Expert>,
    k: usize,
    contexts: Vec<usize>,
    labels: Vec<usize>,
}

impl Forecaster for BayesMixtureForecaster {
    fn name(&self) -> String {
        "bayes".into()
    }

    fn predict(&mut self, context: usize) -> Result<Distribution> {
        self.contexts.push(context);
        let t = self.contexts.len();
        // posterior weights are likelihoods of the seen rounds
        let mut log_weights = Vec::with_capacity(self.experts.len());
        for f in &self.experts {
            log_weights.push(likelihood(f, &self.contexts[..t - 1], &self.labels)?);
        }
        let total = LogValue::sum(&log_weights);
        if total.is_zero() {
            return Ok(Distribution::uniform(self.k));
        }
        let mut probs = vec![0.0; self.k];
        for (f, w) in self.experts.iter().zip(&log_weights) {
            if w.is_zero() {
                continue;
            }
            let weight = (w.log() - total.log()).exp();
            let d = f.predict(&self.contexts, &self.labels)?;
            for (p, q) in probs.iter_mut().zip(d.probs()) {
                *p += weight * q;
            }
        }
        Distribution::new(normalize(probs))
    }

    fn observe(&mut self, label: usize) -> Result<()> {
        self.labels.push(label);
        Ok(())
    }
}

struct FollowExpertForecaster {
    expert: Expert,
    contexts: Vec<usize>,
    labels: Vec<usize>,
}

impl Forecaster for FollowExpertForecaster {
    fn name(&self) -> String {
        "follow".into()
    }

    fn predict(&mut self, context: usize) -> Result<Distribution> {
        self.contexts.push(context);
        self.expert.predict(&self.contexts, &self.labels)
    }

    fn observe(&mut self, label: usize) -> Result<()> {
        self.labels.push(label);
        Ok(())
    }
}

/// The adversary side of the protocol. The interaction order per round is
/// context, then the learner's distribution, then the label — so the label
/// may depend on the emitted prediction but the context may not.
pub trait Adversary {
    fn next_context(&mut self, contexts: &[usize], labels: &[usize]) -> Result<usize>;
    fn next_label(
        &mut self,
        contexts: &[usize],
        labels: &[usize],
        prediction: &Distribution,
    ) -> Result<usize>;
}

/// Plays back a fixed (contexts, labels) pair.
pub struct SequenceAdversary {
    pub contexts: Vec<usize>,
    pub labels: Vec<usize>,
}

impl Adversary for SequenceAdversary {
    fn next_context(&mut self, contexts: &[usize], _labels: &[usize]) -> Result<usize> {
        Ok(self.contexts[contexts.len()])
    }

    fn next_label(
        &mut self,
        _contexts: &[usize],
        labels: &[usize],
        _prediction: &Distribution,
    ) -> Result<usize> {
        Ok(self.labels[labels.len()])
    }
}

/// A full game record. Losses are log losses and may be infinite when a
/// forecaster put zero mass on a revealed label. When every expert's loss is
/// infinite the regret is reported as negative infinity: the comparator class
/// is ruled out and any learner wins the comparison outright.
#[derive(Clone, Debug, Serialize)]
pub struct Transcript {
    pub forecaster: String,
    pub contexts: Vec<usize>,
    pub predictions: Vec<Distribution>,
    pub labels: Vec<usize>,
    pub round_losses: Vec<f64>,
    pub learner_loss: f64,
    pub best_expert_loss: f64,
    pub regret: f64,
}

impl Transcript {
    /// Recomputes all derived fields from scratch and checks them against the
    /// incrementally tallied ones.
    pub fn consistent_within(&self, problem: &Problem, tol: f64) -> Result<bool> {
        let mut total = 0.0f64;
        for (t, &y) in self.labels.iter().enumerate() {
            let p = self.predictions[t].prob(y);
            total += -p.ln();
        }
        let sup = problem.sup_value(&self.contexts, &self.labels)?;
        let best = -sup.log();
        let regret = regret_from(total, best);
        let close = |a: f64, b: f64| a == b || (a - b).abs() <= tol;
        Ok(close(total, self.learner_loss)
            && close(best, self.best_expert_loss)
            && close(regret, self.regret))
    }
}

fn regret_from(learner_loss: f64, best_expert_loss: f64) -> f64 {
    if best_expert_loss == f64::INFINITY {
        f64::NEG_INFINITY
    } else {
        learner_loss - best_expert_loss
    }
}

/// Runs the T-round protocol and records everything.
pub fn play_game(
    forecaster: &mut dyn Forecaster,
    adversary: &mut dyn Adversary,
    problem: &Problem,
    horizon: usize,
) -> Result<Transcript> {
    let mut contexts = Vec::with_capacity(horizon);
    let mut labels = Vec::with_capacity(horizon);
    let mut predictions = Vec::with_capacity(horizon);
    let mut round_losses = Vec::with_capacity(horizon);
    let mut learner_loss = 0.0f64;
    for _ in 0..horizon {
        let x = adversary.next_context(&contexts, &labels)?;
        problem.contexts.check(x)?;
        contexts.push(x);
        let p = forecaster.predict(x)?;
        if p.len() != problem.k() {
            return Err(Error::InvalidDistribution {
                reason: format!("forecaster emitted {} probabilities for {} labels", p.len(), problem.k()),
            });
        }
        let y = adversary.next_label(&contexts, &labels, &p)?;
        problem.labels.check(y)?;
        forecaster.observe(y)?;
        let loss = -p.prob(y).ln();
        round_losses.push(loss);
        learner_loss += loss;
        predictions.push(p);
        labels.push(y);
    }
    let best_expert_loss = -problem.sup_value(&contexts, &labels)?.log();
    let regret = regret_from(learner_loss, best_expert_loss);
    Ok(Transcript {
        forecaster: forecaster.name(),
        contexts,
        predictions,
        labels,
        round_losses,
        learner_loss,
        best_expert_loss,
        regret,
    })
}

/// Maximum realized regret of a deterministic forecaster over every
/// constraint-consistent (context, label) sequence — for a deterministic
/// learner this exhausts adaptive adversaries — with the first attaining
/// sequence.
#[derive(Clone, Debug, Serialize)]
pub struct WorstRegret {
    pub value: f64,
    pub contexts: Vec<usize>,
    pub labels: Vec<usize>,
}

pub fn exhaustive_worst_regret(
    factory: &ForecasterFactory,
    budget: u64,
) -> Result<WorstRegret> {
    let problem = &factory.problem;
    let horizon = factory.horizon;
    let total = ((problem.x_size() as u128).saturating_mul(problem.k() as u128))
        .saturating_pow(horizon as u32);
    if total > budget as u128 {
        return Err(Error::BudgetExceeded {
            needed: total,
            budget,
        });
    }
    let mut best: Option<WorstRegret> = None;
    let mut xs = Vec::with_capacity(horizon);
    let mut ys = Vec::with_capacity(horizon);
    dfs_sequences(factory, problem, horizon, &mut xs, &mut ys, &mut best)?;
    best.ok_or(Error::EmptyConstraint { round: 1 })
}

fn dfs_sequences(
    factory: &ForecasterFactory,
    problem: &Problem,
    horizon: usize,
    xs: &mut Vec<usize>,
    ys: &mut Vec<usize>,
    best: &mut Option<WorstRegret>,
) -> Result<()> {
    if ys.len() == horizon {
        let mut forecaster = factory.fresh();
        let mut adversary = SequenceAdversary {
            contexts: xs.clone(),
            labels: ys.clone(),
        };
        let transcript = play_game(&mut *forecaster, &mut adversary, problem, horizon)?;
        if best.as_ref().is_none_or(|b| transcript.regret > b.value) {
            *best = Some(WorstRegret {
                value: transcript.regret,
                contexts: xs.clone(),
                labels: ys.clone(),
            });
        }
        return Ok(());
    }
    let allowed = allowed_contexts(factory.constraint.as_ref(), xs, ys, problem.x_size())?;
    for x in allowed {
        xs.push(x);
        for y in 0..problem.k() {
            ys.push(y);
            let r = dfs_sequences(factory, problem, horizon, xs, ys, best);
            ys.pop();
            r?;
        }
        xs.pop();
    }
    Ok(())
}

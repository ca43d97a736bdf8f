//! Hypothesis classes: finite expert lists, or sup oracles for parametric
//! families whose supremum likelihood has a closed form.

use std::fmt;
use std::sync::Arc;

use crate::alphabet::{ContextAlphabet, LabelAlphabet};
use crate::error::{Error, Result};
use crate::expert::{likelihood, Expert};
use crate::logval::LogValue;

/// Supplies `sup_f log L(f; labels | contexts)` for a family too large to
/// enumerate. Values are logs of likelihoods, hence never positive.
pub trait SupOracle: Send + Sync {
    fn sup_log_likelihood(&self, contexts: &[usize], labels: &[usize]) -> Result<LogValue>;

    /// A maximizing expert, when the family can exhibit one.
    fn witness(&self, _contexts: &[usize], _labels: &[usize]) -> Option<Expert> {
        None
    }

    fn name(&self) -> &str;
}

/// Either an explicit finite list of experts or a sup oracle.
#[derive(Clone)]
pub enum HypothesisClass {
    Explicit(Vec<Expert>),
    Oracle(Arc<dyn SupOracle>),
}

impl fmt::Debug for HypothesisClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HypothesisClass::Explicit(experts) => {
                write!(f, "Explicit({} experts)", experts.len())
            }
            HypothesisClass::Oracle(o) => write!(f, "Oracle({})", o.name()),
        }
    }
}

impl HypothesisClass {
    pub fn explicit(experts: Vec<Expert>) -> Result<HypothesisClass> {
        if experts.is_empty() {
            return Err(Error::EmptyClass);
        }
        Ok(HypothesisClass::Explicit(experts))
    }

    pub fn oracle(oracle: Arc<dyn SupOracle>) -> HypothesisClass {
        HypothesisClass::Oracle(oracle)
    }

    pub fn experts(&self) -> Option<&[Expert]> {
        match self {
            HypothesisClass::Explicit(e) => Some(e),
            HypothesisClass::Oracle(_) => None,
        }
    }

    pub fn len(&self) -> Option<usize> {
        self.experts().map(|e| e.len())
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, HypothesisClass::Explicit(e) if e.is_empty())
    }
}

/// The member (or oracle-produced expert) attaining a supremum likelihood.
#[derive(Clone, Debug)]
pub enum SupWitness {
    Member(usize),
    Oracle(Expert),
}

/// A hypothesis class together with its alphabets: the object every sum and
/// game in this crate is computed against.
#[derive(Clone, Debug)]
pub struct Problem {
    pub labels: LabelAlphabet,
    pub contexts: ContextAlphabet,
    pub class: HypothesisClass,
}

impl Problem {
    pub fn new(
        labels: LabelAlphabet,
        contexts: ContextAlphabet,
        class: HypothesisClass,
    ) -> Problem {
        Problem {
            labels,
            contexts,
            class,
        }
    }

    /// Context-free problem over `k` labels.
    pub fn context_free(k: usize, class: HypothesisClass) -> Result<Problem> {
        Ok(Problem {
            labels: LabelAlphabet::new(k)?,
            contexts: ContextAlphabet::new(1)?,
            class,
        })
    }

    pub fn k(&self) -> usize {
        self.labels.size()
    }

    pub fn x_size(&self) -> usize {
        self.contexts.size()
    }

    /// Validates a context/label pair against the alphabets.
    pub fn check_sequences(&self, contexts: &[usize], labels: &[usize]) -> Result<()> {
        for &x in contexts {
            self.contexts.check(x)?;
        }
        for &y in labels {
            self.labels.check(y)?;
        }
        Ok(())
    }

    /// sup over the class of the log-likelihood of `labels` given `contexts`,
    /// with the attaining witness when available. Explicit-class ties break
    /// toward the lowest expert index.
    pub fn sup_log_likelihood(
        &self,
        contexts: &[usize],
        labels: &[usize],
    ) -> Result<(LogValue, Option<SupWitness>)> {
        match &self.class {
            HypothesisClass::Explicit(experts) => {
                let mut best = LogValue::ZERO;
                let mut best_idx: Option<usize> = None;
                for (i, f) in experts.iter().enumerate() {
                    let v = likelihood(f, contexts, labels)?;
                    if best_idx.is_none() || v > best {
                        best = v;
                        best_idx = Some(i);
                    }
                }
                Ok((best, best_idx.map(SupWitness::Member)))
            }
            HypothesisClass::Oracle(oracle) => {
                let v = oracle.sup_log_likelihood(contexts, labels)?;
                debug_assert!(
                    v.log() <= 1e-12,
                    "oracle returned a likelihood above 1: {}",
                    v.log()
                );
                let witness = oracle.witness(contexts, labels).map(SupWitness::Oracle);
                Ok((v, witness))
            }
        }
    }

    /// Like `sup_log_likelihood` but without the witness.
    pub fn sup_value(&self, contexts: &[usize], labels: &[usize]) -> Result<LogValue> {
        Ok(self.sup_log_likelihood(contexts, labels)?.0)
    }
}

/// The full binary constant class: every predictor that plays a fixed
/// Bernoulli parameter each round. The supremum likelihood of a sequence
/// with counts (n0, n1) is attained at p = n1 / (n0 + n1).
#[derive(Debug)]
pub struct FullBernoulliOracle;

impl FullBernoulliOracle {
    /// Closed-form sup over p of p^n1 (1-p)^n0, in log domain.
    pub fn closed_form(n0: u32, n1: u32) -> LogValue {
        let d = (n0 + n1) as f64;
        let mut log = 0.0;
        if n0 > 0 {
            log += n0 as f64 * ((n0 as f64 / d).ln());
        }
        if n1 > 0 {
            log += n1 as f64 * ((n1 as f64 / d).ln());
        }
        LogValue::from_log(log)
    }
}

impl SupOracle for FullBernoulliOracle {
    fn sup_log_likelihood(&self, contexts: &[usize], labels: &[usize]) -> Result<LogValue> {
        if contexts.len() != labels.len() {
            return Err(Error::LengthMismatch {
                contexts: contexts.len(),
                labels: labels.len(),
            });
        }
        let mut n1 = 0u32;
        for &y in labels {
            if y > 1 {
                return Err(Error::LabelOutOfRange { label: y, size: 2 });
            }
            n1 += (y == 1) as u32;
        }
        let n0 = labels.len() as u32 - n1;
        Ok(FullBernoulliOracle::closed_form(n0, n1))
    }

    fn witness(&self, _contexts: &[usize], labels: &[usize]) -> Option<Expert> {
        let n1 = labels.iter().filter(|&&y| y == 1).count() as f64;
        let p = if labels.is_empty() {
            0.5
        } else {
            n1 / labels.len() as f64
        };
        Expert::bernoulli(p).ok()
    }

    fn name(&self) -> &str {
        "bernoulli_full"
    }
}

/// Iterative grid-refinement maximizer of p^n1 (1-p)^n0 over [0, 1]: an
/// independent check of the closed form. Returns (log value, argmax).
pub fn bernoulli_grid_sup(n0: u32, n1: u32, rounds: usize) -> (LogValue, f64) {
    let score = |p: f64| -> f64 {
        let mut s = 0.0;
        if n1 > 0 {
            s += n1 as f64 * p.ln();
        }
        if n0 > 0 {
            s += n0 as f64 * (1.0 - p).ln();
        }
        s
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut best_p = 0.5;
    for _ in 0..rounds {
        let step = (hi - lo) / 100.0;
        let mut best = f64::NEG_INFINITY;
        for i in 0..=100 {
            let p = lo + step * i as f64;
            let s = score(p);
            if s > best {
                best = s;
                best_p = p;
            }
        }
        lo = (best_p - step).max(0.0);
        hi = (best_p + step).min(1.0);
    }
    (LogValue::from_log(score(best_p)), best_p)
}

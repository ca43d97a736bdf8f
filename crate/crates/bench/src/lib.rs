//! Shared instance builders for the benchmarks.

use std::sync::Arc;

use shtarkov_lab::class::FullBernoulliOracle;
use shtarkov_lab::suite::{random_instances, SuiteConfig, SuiteInstance};
use shtarkov_lab::{HypothesisClass, Problem};

/// The full constant-Bernoulli family behind its closed-form sup oracle.
pub fn bernoulli_problem() -> Problem {
    Problem::context_free(2, HypothesisClass::oracle(Arc::new(FullBernoulliOracle))).unwrap()
}

/// A fixed seeded batch of desk-scale explicit classes.
pub fn desk_instances(count: usize) -> Vec<SuiteInstance> {
    random_instances(&SuiteConfig::desk(count, true, 0xbe_c4))
}

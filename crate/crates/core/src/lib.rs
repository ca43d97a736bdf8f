//! Exact computation for minimax sequential probability assignment under
//! logarithmic loss.
//!
//! The library revolves around one quantity: the Shtarkov sum of a hypothesis
//! class — the sum over label sequences of the class's supremum likelihood —
//! and its contextual generalizations, where label sequences are routed
//! through a context tree. The worst-case log contextual Shtarkov sum is the
//! minimax regret of the prediction game, and normalizing prefix-conditioned
//! sums yields the minimax optimal forecaster (cNML).
//!
//! Everything is computed exactly on finite instances, with independent
//! brute-force oracles alongside each optimized recursion so the structural
//! identities between game values and tree sums can be checked numerically.

pub mod alphabet;
pub mod class;
pub mod classpec;
pub mod cnml;
pub mod covers;
pub mod dist;
pub mod error;
pub mod expert;
pub mod game;
pub mod history;
pub mod linlab;
pub mod logval;
pub mod shtarkov;
pub mod suite;
pub mod truncation;
pub mod tree;
pub mod verify;

pub use alphabet::{ContextAlphabet, LabelAlphabet};
pub use class::{HypothesisClass, Problem, SupOracle, SupWitness};
pub use dist::Distribution;
pub use error::{Error, Result};
pub use expert::Expert;
pub use history::Prefix;
pub use logval::LogValue;
pub use tree::{ContextConstraint, ContextTree, RealTree};

//! Input file loading: class specs, trees, prefixes, constraints, and
//! adversary sequences. Everything is JSON.

use std::fs;
use std::path::Path;

use serde::Deserialize;
use shtarkov_lab::{classpec, ContextConstraint, ContextTree, Error, Prefix, Problem, Result};

pub fn load_spec(path: &Path) -> Result<Problem> {
    let doc = fs::read_to_string(path).map_err(|e| Error::ClassSpec {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    classpec::parse_class_spec(&doc)
}

/// Tree files are a bare JSON array of context ids in mixed-radix prefix
/// order; depth and arity come from the horizon and the class spec.
pub fn load_tree(path: &Path, depth: usize, arity: usize, x_size: usize) -> Result<ContextTree> {
    let doc = fs::read_to_string(path).map_err(|e| Error::ClassSpec {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let nodes: Vec<usize> = serde_json::from_str(&doc)?;
    let tree = ContextTree::new(depth, arity, nodes)?;
    tree.validate(x_size)?;
    Ok(tree)
}

#[derive(Deserialize)]
struct RawSequencePair {
    contexts: Vec<usize>,
    labels: Vec<usize>,
}

/// Prefix files (and adversary sequence files) are
/// `{"contexts": [...], "labels": [...]}`.
pub fn load_prefix(path: &Path) -> Result<Prefix> {
    let doc = fs::read_to_string(path).map_err(|e| Error::ClassSpec {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let raw: RawSequencePair = serde_json::from_str(&doc)?;
    Prefix::new(raw.contexts, raw.labels)
}

pub fn load_sequence(path: &Path) -> Result<(Vec<usize>, Vec<usize>)> {
    let doc = fs::read_to_string(path).map_err(|e| Error::ClassSpec {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let raw: RawSequencePair = serde_json::from_str(&doc)?;
    Ok((raw.contexts, raw.labels))
}

#[derive(Deserialize)]
struct RawConstraint {
    per_round: Vec<Vec<usize>>,
}

/// Constraint files are `{"per_round": [[allowed at round 1], ...]}`; rounds
/// past the listed ones are unconstrained.
pub fn load_constraint(path: &Path) -> Result<ContextConstraint> {
    let doc = fs::read_to_string(path).map_err(|e| Error::ClassSpec {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let raw: RawConstraint = serde_json::from_str(&doc)?;
    Ok(ContextConstraint::PerRound(raw.per_round))
}

/// Comma-separated unsigned integer list, e.g. `0,1,0`.
pub fn parse_id_list(s: &str) -> std::result::Result<Vec<usize>, String> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| p.trim().parse::<usize>().map_err(|e| e.to_string()))
        .collect()
}

/// Comma-separated float list, e.g. `0.1,0.03,0.01`.
pub fn parse_float_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| p.trim().parse::<f64>().map_err(|e| e.to_string()))
        .collect()
}

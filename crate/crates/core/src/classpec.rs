//! JSON class-spec documents: the single interchange format every command
//! consumes.
//!
//! ```json
//! {"labels": 2, "contexts": 1, "class": {"kind": "bernoulli_full"}}
//! ```
//!
//! Kinds: `explicit` (experts listed with per-history probability vectors),
//! `bernoulli_full` (the full constant-Bernoulli family as a sup oracle),
//! `bernoulli_grid` (constant-Bernoulli classes on an evenly spaced
//! parameter grid), `pointmass` (one deterministic expert per listed label
//! sequence), `linear` and `abs_linear` (classes on a finite design of unit
//! vectors; `linear` without a grid becomes a sup oracle, with `grid_per_dim`
//! both become finite surrogates with weights on a ball grid).

use std::collections::HashMap;
use std::sync::Arc;

use serde::Deserialize;

use crate::alphabet::{ContextAlphabet, LabelAlphabet};
use crate::class::{FullBernoulliOracle, HypothesisClass, Problem};
use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::expert::{Expert, LookupExpert};
use crate::linlab;

#[derive(Deserialize)]
struct RawSpec {
    labels: usize,
    contexts: usize,
    #[serde(default)]
    context_names: Option<Vec<String>>,
    class: RawClass,
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum RawClass {
    Explicit {
        experts: Vec<RawExpert>,
    },
    BernoulliFull {},
    BernoulliGrid {
        points: usize,
    },
    Pointmass {
        sequences: Vec<Vec<usize>>,
    },
    Linear {
        design: Vec<Vec<f64>>,
        #[serde(default)]
        grid_per_dim: Option<usize>,
    },
    AbsLinear {
        design: Vec<Vec<f64>>,
        grid_per_dim: usize,
    },
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum RawExpert {
    Constant {
        probs: Vec<f64>,
    },
    PerContext {
        rows: Vec<Vec<f64>>,
    },
    Product {
        rounds: Vec<Vec<f64>>,
    },
    Lookup {
        depth: usize,
        entries: Vec<RawLookupEntry>,
    },
}

#[derive(Deserialize)]
struct RawLookupEntry {
    contexts: Vec<usize>,
    labels: Vec<usize>,
    probs: Vec<f64>,
}

fn dist_at(path: &str, probs: Vec<f64>, k: usize) -> Result<Distribution> {
    if probs.len() != k {
        return Err(Error::ClassSpec {
            path: path.into(),
            message: format!("{} probabilities for {k} labels", probs.len()),
        });
    }
    Distribution::new(probs).map_err(|e| Error::ClassSpec {
        path: path.into(),
        message: e.to_string(),
    })
}

fn build_expert(path: &str, raw: RawExpert, k: usize, x_size: usize) -> Result<Expert> {
    match raw {
        RawExpert::Constant { probs } => Ok(Expert::Constant(dist_at(
            &format!("{path}.probs"),
            probs,
            k,
        )?)),
        RawExpert::PerContext { rows } => {
            if rows.len() != x_size {
                return Err(Error::ClassSpec {
                    path: format!("{path}.rows"),
                    message: format!("{} rows for {x_size} contexts", rows.len()),
                });
            }
            let rows = rows
                .into_iter()
                .enumerate()
                .map(|(i, probs)| dist_at(&format!("{path}.rows[{i}]"), probs, k))
                .collect::<Result<Vec<_>>>()?;
            Ok(Expert::PerContext(rows))
        }
        RawExpert::Product { rounds } => {
            if rounds.is_empty() {
                return Err(Error::ClassSpec {
                    path: format!("{path}.rounds"),
                    message: "at least one round is required".into(),
                });
            }
            let rounds = rounds
                .into_iter()
                .enumerate()
                .map(|(i, probs)| dist_at(&format!("{path}.rounds[{i}]"), probs, k))
                .collect::<Result<Vec<_>>>()?;
            Ok(Expert::Product(rounds))
        }
        RawExpert::Lookup { depth, entries } => {
            let mut table = HashMap::new();
            for (i, entry) in entries.into_iter().enumerate() {
                let epath = format!("{path}.entries[{i}]");
                if entry.contexts.len() != entry.labels.len() + 1 {
                    return Err(Error::ClassSpec {
                        path: epath,
                        message: format!(
                            "history needs one more context than labels, got {} contexts and {} labels",
                            entry.contexts.len(),
                            entry.labels.len()
                        ),
                    });
                }
                if entry.contexts.len() > depth {
                    return Err(Error::ClassSpec {
                        path: epath,
                        message: format!("history deeper than declared depth {depth}"),
                    });
                }
                for &x in &entry.contexts {
                    if x >= x_size {
                        return Err(Error::ClassSpec {
                            path: epath,
                            message: format!("context {x} out of range for {x_size} contexts"),
                        });
                    }
                }
                for &y in &entry.labels {
                    if y >= k {
                        return Err(Error::ClassSpec {
                            path: epath,
                            message: format!("label {y} out of range for {k} labels"),
                        });
                    }
                }
                let dist = dist_at(&format!("{epath}.probs"), entry.probs, k)?;
                table.insert((entry.contexts, entry.labels), dist);
            }
            Ok(Expert::Lookup(LookupExpert::new(depth, table)))
        }
    }
}

/// Parses and fully validates a class-spec document.
pub fn parse_class_spec(document: &str) -> Result<Problem> {
    let raw: RawSpec = serde_json::from_str(document)?;
    let labels = LabelAlphabet::new(raw.labels).map_err(|e| Error::ClassSpec {
        path: "labels".into(),
        message: e.to_string(),
    })?;
    let contexts = match raw.context_names {
        Some(names) => {
            ContextAlphabet::with_names(raw.contexts, names).map_err(|e| Error::ClassSpec {
                path: "context_names".into(),
                message: e.to_string(),
            })?
        }
        None => ContextAlphabet::new(raw.contexts).map_err(|e| Error::ClassSpec {
            path: "contexts".into(),
            message: e.to_string(),
        })?,
    };
    let k = labels.size();
    let x_size = contexts.size();

    let class = match raw.class {
        RawClass::Explicit { experts } => {
            if experts.is_empty() {
                return Err(Error::ClassSpec {
                    path: "class.experts".into(),
                    message: "at least one expert is required".into(),
                });
            }
            let experts = experts
                .into_iter()
                .enumerate()
                .map(|(i, e)| build_expert(&format!("class.experts[{i}]"), e, k, x_size))
                .collect::<Result<Vec<_>>>()?;
            HypothesisClass::explicit(experts)?
        }
        RawClass::BernoulliFull {} => {
            if k != 2 {
                return Err(Error::ClassSpec {
                    path: "class".into(),
                    message: format!("bernoulli_full needs 2 labels, got {k}"),
                });
            }
            HypothesisClass::oracle(Arc::new(FullBernoulliOracle))
        }
        RawClass::BernoulliGrid { points } => {
            if k != 2 {
                return Err(Error::ClassSpec {
                    path: "class".into(),
                    message: format!("bernoulli_grid needs 2 labels, got {k}"),
                });
            }
            if points < 2 {
                return Err(Error::ClassSpec {
                    path: "class.points".into(),
                    message: "at least 2 grid points are required".into(),
                });
            }
            let experts = (0..points)
                .map(|i| Expert::bernoulli(i as f64 / (points - 1) as f64))
                .collect::<Result<Vec<_>>>()?;
            HypothesisClass::explicit(experts)?
        }
        RawClass::Pointmass { sequences } => {
            if sequences.is_empty() {
                return Err(Error::ClassSpec {
                    path: "class.sequences".into(),
                    message: "at least one sequence is required".into(),
                });
            }
            let mut experts = Vec::with_capacity(sequences.len());
            for (i, seq) in sequences.iter().enumerate() {
                if seq.is_empty() {
                    return Err(Error::ClassSpec {
                        path: format!("class.sequences[{i}]"),
                        message: "sequences must be nonempty".into(),
                    });
                }
                for &y in seq {
                    if y >= k {
                        return Err(Error::ClassSpec {
                            path: format!("class.sequences[{i}]"),
                            message: format!("label {y} out of range for {k} labels"),
                        });
                    }
                }
                experts.push(Expert::point_mass(seq, k));
            }
            HypothesisClass::explicit(experts)?
        }
        RawClass::Linear {
            design,
            grid_per_dim,
        } => {
            if k != 2 {
                return Err(Error::ClassSpec {
                    path: "class".into(),
                    message: format!("linear needs 2 labels, got {k}"),
                });
            }
            if design.len() != x_size {
                return Err(Error::ClassSpec {
                    path: "class.design".into(),
                    message: format!("{} design points for {x_size} contexts", design.len()),
                });
            }
            match grid_per_dim {
                None => {
                    linlab::oracle_problem(design)
                        .map_err(spec_err("class.design"))?
                        .class
                }
                Some(g) => {
                    linlab::grid_class(linlab::LinearVariant::Lin, &design, g)
                        .map_err(spec_err("class.design"))?
                        .class
                }
            }
        }
        RawClass::AbsLinear {
            design,
            grid_per_dim,
        } => {
            if k != 2 {
                return Err(Error::ClassSpec {
                    path: "class".into(),
                    message: format!("abs_linear needs 2 labels, got {k}"),
                });
            }
            if design.len() != x_size {
                return Err(Error::ClassSpec {
                    path: "class.design".into(),
                    message: format!("{} design points for {x_size} contexts", design.len()),
                });
            }
            linlab::grid_class(linlab::LinearVariant::AbsLin, &design, grid_per_dim)
                .map_err(spec_err("class.design"))?
                .class
        }
    };
    Ok(Problem::new(labels, contexts, class))
}

fn spec_err(path: &'static str) -> impl Fn(Error) -> Error {
    move |e| Error::ClassSpec {
        path: path.into(),
        message: e.to_string(),
    }
}

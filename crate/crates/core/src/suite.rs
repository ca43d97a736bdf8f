//! Seeded random instances for the cross-module equality and inequality
//! suites. Everything is driven by a counter-mode RNG so a (config, seed)
//! pair always produces the same instances.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::alphabet::{ContextAlphabet, LabelAlphabet};
use crate::class::{HypothesisClass, Problem};
use crate::dist::Distribution;
use crate::expert::{Expert, LookupExpert};

#[derive(Clone, Copy, Debug)]
pub struct SuiteConfig {
    pub count: usize,
    pub max_contexts: usize,
    pub max_labels: usize,
    pub max_horizon: usize,
    /// Restrict to strictly positive experts (every prediction interior).
    pub strictly_positive: bool,
    pub seed: u64,
}

impl SuiteConfig {
    /// The desk-scale suite the equality checks run on.
    pub fn desk(count: usize, strictly_positive: bool, seed: u64) -> SuiteConfig {
        SuiteConfig {
            count,
            max_contexts: 2,
            max_labels: 3,
            max_horizon: 3,
            strictly_positive,
            seed,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SuiteInstance {
    pub problem: Problem,
    pub horizon: usize,
}

fn random_distribution(rng: &mut ChaCha8Rng, k: usize, strictly_positive: bool) -> Distribution {
    if !strictly_positive && rng.random_range(0..4) == 0 {
        return Distribution::point_mass(k, rng.random_range(0..k));
    }
    let floor = if strictly_positive { 0.05 } else { 0.0 };
    let raw: Vec<f64> = (0..k).map(|_| floor + rng.random_range(0.0..1.0)).collect();
    let total: f64 = raw.iter().sum();
    Distribution::new(raw.iter().map(|v| v / total).collect()).expect("normalized")
}

fn random_expert(
    rng: &mut ChaCha8Rng,
    x_size: usize,
    k: usize,
    horizon: usize,
    strictly_positive: bool,
) -> Expert {
    match rng.random_range(0..4) {
        0 => Expert::Constant(random_distribution(rng, k, strictly_positive)),
        1 => Expert::PerContext(
            (0..x_size)
                .map(|_| random_distribution(rng, k, strictly_positive))
                .collect(),
        ),
        2 => Expert::Product(
            (0..horizon.max(1))
                .map(|_| random_distribution(rng, k, strictly_positive))
                .collect(),
        ),
        _ => {
            // a full history table up to the horizon
            let mut table = std::collections::HashMap::new();
            let mut stack: Vec<(Vec<usize>, Vec<usize>)> = vec![(Vec::new(), Vec::new())];
            while let Some((ctxs, labs)) = stack.pop() {
                if ctxs.len() >= horizon {
                    continue;
                }
                for x in 0..x_size {
                    let mut c = ctxs.clone();
                    c.push(x);
                    table.insert(
                        (c.clone(), labs.clone()),
                        random_distribution(rng, k, strictly_positive),
                    );
                    for y in 0..k {
                        let mut l = labs.clone();
                        l.push(y);
                        stack.push((c.clone(), l));
                    }
                }
            }
            Expert::Lookup(LookupExpert::new(horizon, table))
        }
    }
}

/// Draws `config.count` random problems with horizons.
pub fn random_instances(config: &SuiteConfig) -> Vec<SuiteInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    (0..config.count)
        .map(|_| {
            let x_size = rng.random_range(1..=config.max_contexts);
            let k = rng.random_range(2..=config.max_labels);
            let horizon = rng.random_range(1..=config.max_horizon);
            let n_experts = rng.random_range(1..=3);
            let experts: Vec<Expert> = (0..n_experts)
                .map(|_| random_expert(&mut rng, x_size, k, horizon, config.strictly_positive))
                .collect();
            SuiteInstance {
                problem: Problem::new(
                    LabelAlphabet::new(k).expect("k >= 2"),
                    ContextAlphabet::new(x_size).expect("x >= 1"),
                    HypothesisClass::explicit(experts).expect("nonempty"),
                ),
                horizon,
            }
        })
        .collect()
}

/// Distinct full-length point-mass sequences: the classes that meet the
/// finite-class regret bound with equality.
pub fn point_mass_instance(k: usize, horizon: usize, members: usize) -> SuiteInstance {
    let total = (k as u128).pow(horizon as u32);
    assert!((members as u128) <= total, "not enough distinct sequences");
    let experts: Vec<Expert> = (0..members)
        .map(|i| {
            let path = crate::tree::path_from_index(i, horizon, k);
            Expert::point_mass(&path, k)
        })
        .collect();
    SuiteInstance {
        problem: Problem::context_free(k, HypothesisClass::explicit(experts).expect("nonempty"))
            .expect("valid"),
        horizon,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_are_deterministic() {
        let a = random_instances(&SuiteConfig::desk(10, true, 3));
        let b = random_instances(&SuiteConfig::desk(10, true, 3));
        assert_eq!(a.len(), 10);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.horizon, y.horizon);
            assert_eq!(x.problem.k(), y.problem.k());
            // spot-check behavioral equality on a short history
            let ha = x.problem.sup_value(&[0], &[0]).unwrap();
            let hb = y.problem.sup_value(&[0], &[0]).unwrap();
            assert_eq!(ha.log(), hb.log());
        }
    }

    #[test]
    fn strictly_positive_suites_have_interior_predictions() {
        for inst in random_instances(&SuiteConfig::desk(20, true, 9)) {
            let experts = inst.problem.class.experts().unwrap();
            for f in experts {
                let d = f.predict(&[0], &[]).unwrap();
                assert!(d.strictly_positive());
            }
        }
    }

    #[test]
    fn point_mass_instances_are_distinct() {
        let inst = point_mass_instance(2, 3, 4);
        assert_eq!(inst.problem.class.len(), Some(4));
        let v = crate::shtarkov::contextfree(&inst.problem, 3).unwrap();
        assert!((v.log() - 4.0f64.ln()).abs() < 1e-12);
    }
}

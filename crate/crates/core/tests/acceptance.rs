//! Acceptance suite: the cross-module identities and bounds the library is
//! contracted to reproduce, each as one test printing a pass line with its
//! measured slack. Run with `cargo test --test acceptance -- --nocapture`
//! to see the lines.

use std::time::Instant;

use shtarkov_lab::class::FullBernoulliOracle;
use shtarkov_lab::cnml::{self, ForecasterFactory, ForecasterKind};
use shtarkov_lab::covers;
use shtarkov_lab::expert::{self, Expert};
use shtarkov_lab::shtarkov;
use shtarkov_lab::suite::{self, SuiteConfig};
use shtarkov_lab::truncation::{self, TruncationLevel};
use shtarkov_lab::verify::{self, VerifyConfig};
use shtarkov_lab::{game, ContextTree, Distribution, HypothesisClass, Prefix, Problem};

const SUITE_SEED: u64 = 20240; // pinned: the acceptance suite is one fixed draw
const EQUALITY_TOL: f64 = 1e-9;

fn bernoulli_full() -> Problem {
    Problem::context_free(
        2,
        HypothesisClass::oracle(std::sync::Arc::new(FullBernoulliOracle)),
    )
    .unwrap()
}

fn positive_suite() -> Vec<suite::SuiteInstance> {
    suite::random_instances(&SuiteConfig::desk(200, true, SUITE_SEED))
}

#[test]
fn criterion_01_game_values_equal_worst_case_tree_sums() {
    let start = Instant::now();
    let instances = positive_suite();
    assert!(instances.len() >= 200);
    let mut max_gap = 0.0f64;
    for inst in &instances {
        let wc = shtarkov::worst_case(&inst.problem, inst.horizon, &Prefix::empty(), None)
            .unwrap()
            .log();
        let primal = game::minimax_regret_exact(&inst.problem, inst.horizon, None).unwrap();
        let dual = game::dual_game_value(&inst.problem, inst.horizon, None)
            .unwrap()
            .value;
        let (bf, _) =
            shtarkov::worst_case_bruteforce(&inst.problem, inst.horizon, None, 1_000_000)
                .unwrap();
        max_gap = max_gap
            .max((primal - wc).abs())
            .max((dual - wc).abs())
            .max((bf.log() - wc).abs());
    }
    let elapsed = start.elapsed();
    assert!(max_gap <= EQUALITY_TOL, "max gap {max_gap:.3e}");
    assert!(
        elapsed.as_secs_f64() < 60.0,
        "suite took {:.1}s",
        elapsed.as_secs_f64()
    );
    println!(
        "ACCEPTANCE 01 game values equal worst-case tree sums: PASS ({} classes, max gap {max_gap:.3e}, {:.1}s)",
        instances.len(),
        elapsed.as_secs_f64()
    );
}

#[test]
fn criterion_02_cnml_is_minimax_optimal_and_dominant() {
    let instances = positive_suite();
    let mut max_gap = 0.0f64;
    let mut min_margin = f64::INFINITY;
    for inst in &instances {
        let exact = game::minimax_regret_exact(&inst.problem, inst.horizon, None).unwrap();
        let cnml_factory =
            ForecasterFactory::new(&inst.problem, inst.horizon, None, ForecasterKind::Cnml)
                .unwrap();
        let base = cnml::exhaustive_worst_regret(&cnml_factory, 1_000_000)
            .unwrap()
            .value;
        max_gap = max_gap.max((base - exact).abs());
        for kind in [
            ForecasterKind::Uniform,
            ForecasterKind::Bayes,
            ForecasterKind::TruncatedBayes { delta: 0.01 },
        ] {
            let alt = ForecasterFactory::new(&inst.problem, inst.horizon, None, kind).unwrap();
            let worst = cnml::exhaustive_worst_regret(&alt, 1_000_000).unwrap().value;
            min_margin = min_margin.min(worst - base);
        }
    }
    assert!(max_gap <= EQUALITY_TOL, "max optimality gap {max_gap:.3e}");
    assert!(
        min_margin >= -EQUALITY_TOL,
        "a baseline beat the minimax forecaster by {:.3e}",
        -min_margin
    );
    println!(
        "ACCEPTANCE 02 cnml minimax optimality and dominance: PASS (max gap {max_gap:.3e}, min baseline margin {min_margin:.3e})"
    );
}

#[test]
fn criterion_03_grid_oracle_sandwich() {
    let problem = bernoulli_full();
    let exact1 = game::minimax_regret_exact(&problem, 1, None).unwrap();
    let grid1 = game::minimax_regret_grid(&problem, 1, 1e-3, None, 1 << 21).unwrap();
    assert!((grid1 - 2.0f64.ln()).abs() <= 5e-4, "grid value {grid1}");
    assert!(grid1 >= exact1 - 1e-12);

    let exact2 = game::minimax_regret_exact(&problem, 2, None).unwrap();
    assert!(
        (exact2 - 2.5f64.ln()).abs() <= EQUALITY_TOL,
        "exact T=2 value {exact2}"
    );

    // the lattice upper bound tightens as the resolution halves
    for horizon in [1usize, 2] {
        let exact = game::minimax_regret_exact(&problem, horizon, None).unwrap();
        let mut last_gap = f64::INFINITY;
        for h in [1e-1, 5e-2, 1e-2, 1e-3] {
            let grid = game::minimax_regret_grid(&problem, horizon, h, None, 1 << 21).unwrap();
            let gap = grid - exact;
            assert!(gap >= -1e-12, "grid below exact at h={h}");
            assert!(gap <= last_gap + 1e-12, "gap grew at h={h}");
            last_gap = gap;
        }
    }
    println!(
        "ACCEPTANCE 03 lattice-learner sandwich: PASS (T=1 at 1e-3 within {:.1e} of log 2, T=2 exact gap {:.1e})",
        (grid1 - 2.0f64.ln()).abs(),
        (exact2 - 2.5f64.ln()).abs()
    );
}

#[test]
fn criterion_04_path_likelihoods_normalize_on_every_tree() {
    let mut max_dev = 0.0f64;
    let mut trees = 0usize;
    for x_size in 1..=3usize {
        for k in 2..=3usize {
            for t in 1..=4usize {
                let experts = kind_zoo(x_size, k, t);
                for tree in tree_suite(x_size, k, t) {
                    for f in &experts {
                        let v = expert::verify_normalization(f, &tree).unwrap();
                        max_dev = max_dev.max(v.log().abs());
                    }
                    trees += 1;
                }
            }
        }
    }
    assert!(max_dev <= 1e-12, "max |log total mass| {max_dev:.3e}");
    println!(
        "ACCEPTANCE 04 tree-path likelihood normalization: PASS ({trees} trees, max deviation {max_dev:.3e})"
    );
}

#[test]
fn criterion_05_finite_class_bound_with_point_mass_equality() {
    let instances = positive_suite();
    let mut max_excess = f64::NEG_INFINITY;
    for inst in &instances {
        let size = inst.problem.class.len().unwrap() as f64;
        let factory =
            ForecasterFactory::new(&inst.problem, inst.horizon, None, ForecasterKind::Cnml)
                .unwrap();
        let worst = cnml::exhaustive_worst_regret(&factory, 1_000_000).unwrap().value;
        max_excess = max_excess.max(worst - size.ln());
    }
    assert!(max_excess <= EQUALITY_TOL, "excess {max_excess:.3e}");

    let mut max_eq_gap = 0.0f64;
    for (k, t, members) in [(2usize, 2usize, 2usize), (2, 3, 4), (3, 2, 5)] {
        let inst = suite::point_mass_instance(k, t, members);
        let factory =
            ForecasterFactory::new(&inst.problem, inst.horizon, None, ForecasterKind::Cnml)
                .unwrap();
        let worst = cnml::exhaustive_worst_regret(&factory, 1_000_000).unwrap().value;
        max_eq_gap = max_eq_gap.max((worst - (members as f64).ln()).abs());
    }
    assert!(max_eq_gap <= EQUALITY_TOL, "equality gap {max_eq_gap:.3e}");
    println!(
        "ACCEPTANCE 05 finite-class log bound: PASS (max excess {max_excess:.3e}, point-mass equality gap {max_eq_gap:.3e})"
    );
}

#[test]
fn criterion_06_entropy_bounds_dominate_exact_regret() {
    let alpha_grid = [0.02, 0.05, 0.1, 0.2, 0.3, 0.45];
    let budget = 1 << 22;
    let mut min_slack = f64::INFINITY;
    let mut ordered = true;
    for problem in binary_instances() {
        let report =
            covers::entropy_regret_bounds(&problem, 2, &alpha_grid, budget).unwrap();
        let exact = report.exact_regret.unwrap();
        for e in &report.entries {
            min_slack = min_slack.min(e.entropy_bound - exact);
            ordered &= e.entropy_bound <= e.global_entropy_bound + 1e-12;
        }
    }
    let c = covers::scaled_entropy_constant();
    assert!(min_slack >= -EQUALITY_TOL, "a bound fell below the exact value");
    assert!(ordered, "tree bound exceeded the global-cover bound");
    assert!(c > 3.0 && c < 4.0 && (c - 3.2230).abs() <= 1e-4, "c = {c}");
    println!(
        "ACCEPTANCE 06 entropy bound dominance and constant: PASS (min slack {min_slack:.3e}, c = {c:.6})"
    );
}

#[test]
fn criterion_07_linear_class_lower_bound() {
    let mut max_gap = 0.0f64;
    for t in [1usize, 2, 4, 8] {
        let report = linlab_report(t);
        max_gap = max_gap.max((report.conditional_shtarkov_log - report.closed_form).abs());
        assert!(report.bounds_hold, "floor chain failed at T={t}");
    }
    let start = Instant::now();
    let r16 = linlab_report(16);
    let elapsed = start.elapsed();
    max_gap = max_gap.max((r16.conditional_shtarkov_log - r16.closed_form).abs());
    assert!(r16.bounds_hold);
    assert!(max_gap <= EQUALITY_TOL, "max closed-form gap {max_gap:.3e}");
    assert!(elapsed.as_secs_f64() < 5.0, "T=16 took {:.2}s", elapsed.as_secs_f64());
    for t in 1..=64usize {
        let tf = t as f64;
        assert!(tf * (1.0 + 1.0 / tf.sqrt()).ln() >= tf.sqrt() / 4.0, "floor failed at T={t}");
    }
    println!(
        "ACCEPTANCE 07 linear-class lower bound: PASS (max gap {max_gap:.3e}, T=16 in {:.2}s)",
        elapsed.as_secs_f64()
    );
}

fn linlab_report(t: usize) -> shtarkov_lab::linlab::LowerBoundReport {
    shtarkov_lab::linlab::lin_lower_bound_experiment(t, t, 1 << 20).unwrap()
}

#[test]
fn criterion_08_truncation_lemmas() {
    use rand::Rng;
    use rand::SeedableRng;
    // per-round loss gap bound on random triples
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(SUITE_SEED);
    for k in 2..=4usize {
        for _ in 0..10_000 {
            let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..1.0)).collect();
            let total: f64 = raw.iter().sum();
            let p = Distribution::new(raw.iter().map(|v| v / total).collect()).unwrap();
            let d = rng.random_range(1e-4..0.4999);
            let y = rng.random_range(0..k);
            let gap = truncation::loss_gap(&p, y, TruncationLevel::new(d).unwrap());
            assert!(gap <= (1.0 + k as f64 * d).ln() + 1e-12);
        }
    }

    // likelihood inflation bound on suite experts, all histories, all levels
    let sample = suite::random_instances(&SuiteConfig::desk(50, false, SUITE_SEED ^ 0xbeef));
    let mut max_excess = f64::NEG_INFINITY;
    for inst in &sample {
        let m = truncation::likelihood_gap_constant(inst.horizon).unwrap() as f64;
        let k = inst.problem.k();
        let x = inst.problem.x_size();
        for &delta in &truncation::DEFAULT_DELTA_GRID {
            let level = TruncationLevel::new(delta).unwrap();
            for f in inst.problem.class.experts().unwrap() {
                for id in 0..((x * k).pow(inst.horizon as u32)) {
                    let mut rest = id;
                    let mut ctxs = Vec::new();
                    let mut labs = Vec::new();
                    for _ in 0..inst.horizon {
                        ctxs.push(rest % x);
                        rest /= x;
                        labs.push(rest % k);
                        rest /= k;
                    }
                    let gap = truncation::likelihood_gap(f, &ctxs, &labs, level).unwrap();
                    max_excess = max_excess.max(gap - delta * m);
                }
            }
        }
    }
    assert!(max_excess <= 1e-12, "inflation excess {max_excess:.3e}");

    // regret inequality with monotone convergence on the canonical pair
    let mut all_hold = true;
    for inst in sample.iter().take(25) {
        let report = truncation::truncated_regret_gap_check(
            &inst.problem,
            inst.horizon,
            &truncation::DEFAULT_DELTA_GRID,
            None,
        )
        .unwrap();
        all_hold &= report.all_hold;
    }
    assert!(all_hold, "a truncated-class regret inequality failed");
    let zero_one = Problem::context_free(
        2,
        HypothesisClass::explicit(vec![
            Expert::bernoulli(0.0).unwrap(),
            Expert::bernoulli(1.0).unwrap(),
        ])
        .unwrap(),
    )
    .unwrap();
    let report = truncation::truncated_regret_gap_check(
        &zero_one,
        2,
        &truncation::DEFAULT_DELTA_GRID,
        None,
    )
    .unwrap();
    assert!(report.all_hold);
    for pair in report.entries.windows(2) {
        assert!(pair[1].regret_slack <= pair[0].regret_slack + 1e-12);
        assert!(pair[1].shtarkov_slack <= pair[0].shtarkov_slack + 1e-12);
    }
    println!(
        "ACCEPTANCE 08 truncation lemmas: PASS (max inflation excess {max_excess:.3e}, slacks monotone)"
    );
}

#[test]
fn criterion_09_cover_relations() {
    let budget = 1 << 22;
    let mut ordered = true;
    let mut induced_ok = true;
    let mut floor_ok = true;
    for problem in binary_instances() {
        let class = covers::BinaryClass::from_problem(&problem).unwrap();
        let report = covers::entropy_regret_bounds(
            &problem,
            2,
            &[0.05, 0.1, 0.2, 0.3, 0.45],
            budget,
        )
        .unwrap();
        for e in &report.entries {
            ordered &= e.seq_entropy <= e.global_entropy + 1e-12;
            floor_ok &= e.seq_entropy >= e.fat_entropy_floor - 1e-12;
        }
        for alpha in [0.1, 0.3] {
            let (_, cover) = covers::global_entropy(&class, alpha, 2, budget).unwrap();
            for tree in ContextTree::all(2, 2, class.x_size()) {
                let induced = covers::induce_tree_cover(&cover, &tree);
                induced_ok &= covers::is_sequential_cover(&induced, &class, &tree, alpha).ok;
            }
        }
    }
    assert!(ordered, "sequential entropy exceeded global entropy");
    assert!(induced_ok, "an induced tree cover failed validation");
    assert!(floor_ok, "the fat-dimension floor failed");

    let pair = covers::BinaryClass::new(1, vec![vec![0.0], vec![1.0]]).unwrap();
    let fat = covers::fat_shattering_dim(&pair, 0.5, 3, budget).unwrap();
    let cover = covers::min_sequential_cover(&pair, &ContextTree::constant(2, &[0, 0]), 0.3, budget)
        .unwrap();
    assert_eq!(fat, 1);
    assert_eq!(cover.size, 2);
    println!(
        "ACCEPTANCE 09 cover relations: PASS (entropy order, induced covers, fat floor; pair class fat(0.5)={fat}, cover size {})",
        cover.size
    );
}

#[test]
fn criterion_10_mc_subprobability_and_nml_reduction() {
    // Monte Carlo consistency at scale
    let problem = bernoulli_full();
    let tree = ContextTree::constant(2, &[0, 0]);
    let mut mean = 0.0f64;
    let mut var_sum = 0.0f64;
    let runs = 200usize;
    for run in 0..runs {
        let est = shtarkov::mc_estimate(&problem, &tree, 100_000, SUITE_SEED + run as u64)
            .unwrap();
        mean += est.estimate;
        var_sum += est.stderr * est.stderr;
    }
    mean /= runs as f64;
    let combined = var_sum.sqrt() / runs as f64;
    let dev = (mean - 2.5).abs();
    assert!(dev <= 4.0 * combined, "MC mean {mean} vs 2.5, dev {dev:.2e} > {:.2e}", 4.0 * combined);

    // induced sub-probability classes reproduce the tree sums exactly
    let sample = suite::random_instances(&SuiteConfig::desk(60, false, SUITE_SEED ^ 0x51));
    let mut max_gap = 0.0f64;
    for inst in &sample {
        let k = inst.problem.k();
        let x = inst.problem.x_size();
        let n = shtarkov_lab::tree::node_count(inst.horizon, k) as usize;
        let nodes: Vec<usize> = (0..n).map(|i| i % x).collect();
        let tree = ContextTree::new(inst.horizon, k, nodes).unwrap();
        let induced = shtarkov::induce_subprob(&inst.problem, &tree, None).unwrap();
        let a = shtarkov::general_shtarkov(&induced).log();
        let b = shtarkov::contextual(&inst.problem, &tree).unwrap().log();
        if a != b {
            max_gap = max_gap.max((a - b).abs());
        }
        if inst.horizon >= 2 {
            let prefix = Prefix::new(vec![0], vec![1 % k]).unwrap();
            let stub = ContextTree::constant(k, &vec![0; inst.horizon - 1]);
            let induced =
                shtarkov::induce_subprob(&inst.problem, &stub, Some(&prefix)).unwrap();
            let a = shtarkov::general_shtarkov(&induced).log();
            let b = shtarkov::prefix_sum(&inst.problem, &stub, &prefix, inst.horizon)
                .unwrap()
                .log();
            if a != b {
                max_gap = max_gap.max((a - b).abs());
            }
        }
    }
    assert!(max_gap <= 1e-12, "sub-probability gap {max_gap:.3e}");

    // the forecaster's round products reproduce the context-free joint mass
    let mut max_mass_gap = 0.0f64;
    for inst in suite::random_instances(&SuiteConfig::desk(40, true, SUITE_SEED ^ 0x99))
        .iter()
        .filter(|i| i.problem.x_size() == 1)
    {
        let nml = cnml::nml_distribution(&inst.problem, inst.horizon).unwrap();
        let factory =
            ForecasterFactory::new(&inst.problem, inst.horizon, None, ForecasterKind::Cnml)
                .unwrap();
        for (id, mass_expect) in nml.iter().enumerate() {
            let path = shtarkov_lab::tree::path_from_index(id, inst.horizon, inst.problem.k());
            let mut f = factory.fresh();
            let mut mass = 1.0f64;
            for &y in &path {
                mass *= f.predict(0).unwrap().prob(y);
                f.observe(y).unwrap();
            }
            max_mass_gap = max_mass_gap.max((mass - mass_expect).abs());
        }
    }
    assert!(max_mass_gap <= 1e-12, "reduction gap {max_mass_gap:.3e}");
    println!(
        "ACCEPTANCE 10 sampling, sub-probability, and reduction: PASS (MC dev {dev:.2e} within 4 stderr, sums within {max_gap:.1e}, reduction within {max_mass_gap:.1e})"
    );
}

#[test]
fn criterion_11_verify_is_deterministic_and_fast() {
    let config = VerifyConfig::default();
    let start = Instant::now();
    let a = verify::run(&config);
    let first = start.elapsed();
    let b = verify::run(&config);
    let ja = serde_json::to_string_pretty(&a).unwrap();
    let jb = serde_json::to_string_pretty(&b).unwrap();
    assert_eq!(ja, jb, "verify reports differ across identical runs");
    assert_eq!(a.failed, 0, "verify failures: {ja}");
    assert_eq!(a.skipped, 0, "verify skipped checks: {ja}");
    assert!(
        first.as_secs_f64() < 150.0,
        "full verify took {:.1}s",
        first.as_secs_f64()
    );
    println!(
        "ACCEPTANCE 11 verify determinism: PASS (byte-identical reports, {} checks in {:.1}s)",
        a.checks.len(),
        first.as_secs_f64()
    );
}

/// One expert of every kind for the normalization sweep.
fn kind_zoo(x_size: usize, k: usize, t: usize) -> Vec<Expert> {
    let dist = |offset: usize| {
        let raw: Vec<f64> = (0..k).map(|y| 1.0 + ((y + offset) % k) as f64).collect();
        let total: f64 = raw.iter().sum();
        Distribution::new(raw.iter().map(|v| v / total).collect()).unwrap()
    };
    let mut table = std::collections::HashMap::new();
    let mut stack: Vec<(Vec<usize>, Vec<usize>)> = vec![(Vec::new(), Vec::new())];
    while let Some((ctxs, labs)) = stack.pop() {
        if ctxs.len() >= t {
            continue;
        }
        for x in 0..x_size {
            let mut c = ctxs.clone();
            c.push(x);
            table.insert(
                (c.clone(), labs.clone()),
                dist(c.len() + 2 * x + labs.iter().sum::<usize>()),
            );
            for y in 0..k {
                let mut l = labs.clone();
                l.push(y);
                stack.push((c.clone(), l));
            }
        }
    }
    vec![
        Expert::Constant(Distribution::uniform(k)),
        Expert::Constant(dist(1)),
        Expert::PerContext((0..x_size).map(dist).collect()),
        Expert::Product((0..t).map(dist).collect()),
        Expert::point_mass(&vec![k - 1; t], k),
        Expert::Lookup(expert::LookupExpert::new(t, table)),
        Expert::Truncated {
            inner: Box::new(Expert::point_mass(&vec![0; t], k)),
            delta: 0.2,
        },
    ]
}

/// Every tree when the shape is small; all constant trees plus seeded random
/// trees otherwise.
fn tree_suite(x_size: usize, k: usize, t: usize) -> Vec<ContextTree> {
    if ContextTree::count_all(t, k, x_size) <= 2048 {
        return ContextTree::all(t, k, x_size).collect();
    }
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng =
        rand_chacha::ChaCha8Rng::seed_from_u64(SUITE_SEED ^ ((x_size * 64 + k * 8 + t) as u64));
    let n = shtarkov_lab::tree::node_count(t, k) as usize;
    let mut trees: Vec<ContextTree> = (0..x_size)
        .map(|x| ContextTree::constant(k, &vec![x; t]))
        .collect();
    for _ in 0..50 {
        let nodes: Vec<usize> = (0..n).map(|_| rng.random_range(0..x_size)).collect();
        trees.push(ContextTree::new(t, k, nodes).unwrap());
    }
    trees
}

/// Binary non-sequential problems for the cover criteria.
fn binary_instances() -> Vec<Problem> {
    let mk = |rows: Vec<Vec<f64>>| -> Problem {
        let x_size = rows[0].len();
        let experts: Vec<Expert> = rows
            .into_iter()
            .map(|row| {
                Expert::PerContext(
                    row.into_iter()
                        .map(|p| Distribution::bernoulli(p).unwrap())
                        .collect(),
                )
            })
            .collect();
        Problem::new(
            shtarkov_lab::LabelAlphabet::new(2).unwrap(),
            shtarkov_lab::ContextAlphabet::new(x_size).unwrap(),
            HypothesisClass::explicit(experts).unwrap(),
        )
    };
    vec![
        mk(vec![vec![0.2], vec![0.8]]),
        mk(vec![vec![0.0], vec![1.0]]),
        mk(vec![vec![0.5, 0.1], vec![0.5, 0.9]]),
        mk(vec![vec![0.3, 0.7], vec![0.6, 0.2], vec![0.9, 0.9]]),
    ]
}

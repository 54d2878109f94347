//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::process::Command;
use std::time::{Duration, Instant};

use polarity_core::baselines::{mv_both, mv_inter_tool, Predictions};
use polarity_core::harness::{evaluate, generate, gold_labels, motivating_example, ClusterSize, GenSpec};
use polarity_core::kb::{
    Atom, ClusterId, Dataset, Document, DocumentId, FactSet, Label, Literal, Polarity, PolarityOrder, Provenance, ToolId,
};
use polarity_core::mln::{
    exact_cll, exact_marginals, ground, learner_gradient, mcsat_marginals, Expectations, GroundNetwork, SamplerConfig, TrainingAssignment,
    WeightVector,
};
use polarity_core::resolve::{resolve, step1_infer, ResolveConfig};
use polarity_core::rules::{generate_default_rules, parse_rules};
use polarity_core::saturation::{derive_inconsistencies, instantiate, saturate};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

fn correct(ds: &Dataset, preds: &Predictions) -> usize {
    let gold = gold_labels(ds).expect("fixture has gold");
    gold.iter().filter(|(d, g)| preds.get(*d) == Some(*g)).count()
}

fn fixture_config(seed: u64) -> ResolveConfig {
    let mut cfg = ResolveConfig::default();
    cfg.sampler.seed = seed;
    cfg
}

fn step1_fixture() -> Outcome {
    let ds = motivating_example();
    let rules = generate_default_rules(ds.tools(), 1.0).unwrap();
    let start = Instant::now();
    let mut hits = 0;
    let mut scores = Vec::new();
    for seed in 0..10 {
        let s1 = step1_infer(&ds.without_gold(), &rules, &fixture_config(seed)).unwrap();
        let k = correct(&ds, &s1.argmax);
        scores.push(k);
        hits += usize::from(k >= 8);
    }
    let t = start.elapsed();
    outcome(
        hits >= 8 && t < Duration::from_secs(10),
        format!("{hits}/10 seeds with >= 8/9 correct (per seed {scores:?}), {:.2} s", secs(t)),
    )
}

fn step2_fixture() -> Outcome {
    let ds = motivating_example();
    let rules = generate_default_rules(ds.tools(), 1.0).unwrap();
    let start = Instant::now();
    let mut hits = 0;
    let mut scores = Vec::new();
    for seed in 0..10 {
        let res = resolve(&ds.without_gold(), &rules, &fixture_config(seed)).unwrap();
        let k = correct(&ds, &res.predictions());
        scores.push(k);
        hits += usize::from(k == 9);
    }
    let t = start.elapsed();
    outcome(
        hits >= 7 && t < Duration::from_secs(10),
        format!("{hits}/10 seeds with 9/9 correct (per seed {scores:?}), {:.2} s", secs(t)),
    )
}

fn baseline_reproduction() -> Outcome {
    let start = Instant::now();
    let ds = motivating_example();
    let order = PolarityOrder::default();
    let p = mv_both(&ds, &order).unwrap();
    let clusters = ds.group_by_cluster();
    let negative = ["A2", "A3"]
        .iter()
        .all(|c| clusters[&ClusterId::new(*c).unwrap()].iter().all(|d| p[d] == Polarity::Negative));
    let acc = evaluate(&ds, &p).unwrap();
    let repeat = mv_both(&ds, &order).unwrap() == p;
    let t = start.elapsed();
    outcome(
        negative && acc == 5.0 / 9.0 && repeat && t < Duration::from_secs(1),
        format!(
            "A2/A3 negative: {negative}, accuracy {acc:.4}, deterministic: {repeat}, {:.3} s",
            secs(t)
        ),
    )
}

/// Generated dataset of at most four documents under the default rules with
/// weights drawn from [-1, 2.5].
fn random_instance(seed: u64) -> (GroundNetwork, WeightVector) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_tools = rng.gen_range(1..=3);
    let accs: Vec<f64> = (0..n_tools).map(|_| rng.gen_range(0.3..1.0)).collect();
    let size_max = rng.gen_range(1..=3);
    let n_clusters = rng.gen_range(1..=(4 / size_max));
    let ds = generate(&GenSpec::new(n_clusters, ClusterSize::Range(1, size_max), &accs, rng.gen())).unwrap();
    let rules = generate_default_rules(ds.tools(), 1.0).unwrap();
    let net = ground(&rules, &instantiate(&ds), &ds.without_gold()).unwrap();
    let mut w = WeightVector::new();
    for (name, _) in net.initial_weights().iter() {
        w.set(name, rng.gen_range(-1.0..2.5));
    }
    (net, w)
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    let mut max_atoms = 0;
    for i in 0..20 {
        let (net, w) = random_instance(1000 + i);
        max_atoms = max_atoms.max(net.num_query_atoms());
        let exact = exact_marginals(&net, &w).unwrap();
        let cfg = SamplerConfig {
            seed: i,
            num_samples: 20_000,
            chains: 3,
            ..Default::default()
        };
        let d = exact.linf_distance(&mcsat_marginals(&net, &w, &cfg).unwrap());
        worst = worst.max(d);
        failures += usize::from(d > 0.03);
    }
    let t = start.elapsed();
    outcome(
        failures == 0 && max_atoms <= 12 && t < Duration::from_secs(60),
        format!(
            "worst L-inf {worst:.4} over 20 instances (<= {max_atoms} atoms), {failures} over 0.03, {:.2} s",
            secs(t)
        ),
    )
}

fn random_training(net: &GroundNetwork, rng: &mut ChaCha8Rng) -> TrainingAssignment {
    let mut values = vec![None; net.num_query_atoms()];
    for d in 0..net.documents().len() {
        let p = Polarity::ALL[rng.gen_range(0..3)];
        match rng.gen_range(0..3) {
            0 => {}
            1 => {
                for q in Polarity::ALL {
                    values[net.atom_index(d, q)] = Some(q == p);
                }
            }
            _ => values[net.atom_index(d, p)] = Some(false),
        }
    }
    TrainingAssignment::new(values)
}

fn gradient_check() -> Outcome {
    let start = Instant::now();
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for i in 0..10 {
        let (net, w) = random_instance(2000 + i);
        let training = random_training(&net, &mut ChaCha8Rng::seed_from_u64(i));
        let g = learner_gradient(&net, &w, &training, &Expectations::Exact { cap: 12 }).unwrap();
        for (k, name) in g.rules.iter().enumerate() {
            let at = |x: f64| {
                let mut v = w.clone();
                v.set(name.clone(), x);
                exact_cll(&net, &v, &training).unwrap()
            };
            let base = w.get(name).unwrap();
            let fd = -(at(base + h) - at(base - h)) / (2.0 * h);
            // gradients of exactly zero need a floor
            let rel = (fd - g.gradient[k]).abs() / g.gradient[k].abs().max(fd.abs()).max(1e-3);
            worst = worst.max(rel);
            checked += 1;
        }
    }
    let t = start.elapsed();
    outcome(
        worst <= 1e-5 && t < Duration::from_secs(10),
        format!("{checked} rule gradients, worst relative error {worst:.2e}, {:.2} s", secs(t)),
    )
}

fn closed_form() -> Outcome {
    let start = Instant::now();
    let mut worst_exact: f64 = 0.0;
    let mut worst_sampled: f64 = 0.0;
    for w in [0.0f64, 1.0, 3.0] {
        let d = DocumentId::new("d").unwrap();
        let ds = Dataset::new(
            vec![Document::new(d.clone(), ClusterId::new("c").unwrap())],
            vec![Label::new(d, ToolId::new("t").unwrap(), Polarity::Positive)],
        )
        .unwrap();
        let rules = parse_rules(&format!("{w}: Label(t, +, ?d) -> IsPositive(?d)\n")).unwrap();
        let net = ground(&rules, &instantiate(&ds), &ds).unwrap();
        let want = w.exp() / (w.exp() + 2.0);
        let exact = exact_marginals(&net, &net.initial_weights()).unwrap().atom(0);
        let cfg = SamplerConfig {
            seed: 5,
            num_samples: 20_000,
            ..Default::default()
        };
        let sampled = mcsat_marginals(&net, &net.initial_weights(), &cfg).unwrap().atom(0);
        worst_exact = worst_exact.max((exact - want).abs());
        worst_sampled = worst_sampled.max((sampled - want).abs());
    }
    let t = start.elapsed();
    outcome(
        worst_exact <= 1e-9 && worst_sampled <= 0.02,
        format!("exact error {worst_exact:.1e}, sampled error {worst_sampled:.4}, {:.2} s", secs(t)),
    )
}

#[derive(Debug, Clone)]
struct FactCase {
    ds: Dataset,
    extra: Vec<Literal>,
    shuffle: u64,
}

fn fact_case() -> impl Strategy<Value = FactCase> {
    let polarity = || prop_oneof![Just(Polarity::Positive), Just(Polarity::Negative), Just(Polarity::Neutral)];
    (1usize..=8, 1usize..=3)
        .prop_flat_map(move |(n_docs, n_tools)| {
            (
                proptest::collection::vec(0usize..4, n_docs),
                proptest::collection::vec(proptest::option::weighted(0.7, polarity()), n_docs * n_tools),
                proptest::collection::vec((0..n_docs, polarity(), any::<bool>()), 0..4),
                any::<u64>(),
                Just(n_tools),
            )
        })
        .prop_map(|(clusters, labels, extra, shuffle, n_tools)| {
            let doc = |i: usize| DocumentId::new(format!("d{i}")).unwrap();
            let docs = clusters
                .iter()
                .enumerate()
                .map(|(i, c)| Document::new(doc(i), ClusterId::new(format!("c{c}")).unwrap()))
                .collect();
            let tools: Vec<ToolId> = (0..n_tools).map(|t| ToolId::new(format!("t{t}")).unwrap()).collect();
            let labels = labels
                .iter()
                .enumerate()
                .filter_map(|(k, p)| p.map(|p| Label::new(doc(k / n_tools), tools[k % n_tools].clone(), p)))
                .collect();
            let extra = extra
                .into_iter()
                .map(|(d, p, pos)| Literal {
                    atom: Atom::polarity_of(p, doc(d)),
                    positive: pos,
                })
                .collect();
            FactCase {
                ds: Dataset::with_tools(docs, tools, labels).unwrap(),
                extra,
                shuffle,
            }
        })
}

fn facts_in_order(c: &FactCase, shuffled: bool) -> FactSet {
    let mut lits: Vec<Literal> = instantiate(&c.ds).literals().cloned().chain(c.extra.iter().cloned()).collect();
    if shuffled {
        lits.shuffle(&mut ChaCha8Rng::seed_from_u64(c.shuffle));
    }
    let mut fs = FactSet::new();
    for l in lits {
        fs.add_literal(l, Provenance::Inferred);
    }
    fs
}

fn check_saturation(c: FactCase) -> Result<(), TestCaseError> {
    let fs = facts_in_order(&c, false);
    let sat = saturate(&fs);
    prop_assert_eq!(saturate(&sat), sat.clone(), "idempotence");
    let derived = derive_inconsistencies(&sat);
    prop_assert_eq!(derive_inconsistencies(&derived), derived.clone(), "idempotence of derivation");
    prop_assert!(fs.literals().all(|l| sat.contains(l)), "monotonicity");
    prop_assert!(sat.literals().all(|l| derived.contains(l)), "monotonicity of derivation");
    for docs in c.ds.group_by_cluster().values() {
        for p in Polarity::ALL {
            let has = |d: &DocumentId| sat.contains(&Literal::pos(Atom::polarity_of(p, d.clone())));
            prop_assert!(docs.iter().all(has) || !docs.iter().any(has), "cluster closure");
        }
    }
    let other = facts_in_order(&c, true);
    prop_assert_eq!(saturate(&other), sat, "order independence");
    prop_assert_eq!(
        derive_inconsistencies(&saturate(&other)),
        derived,
        "order independence of derivation"
    );
    Ok(())
}

fn saturation_properties() -> Outcome {
    let start = Instant::now();
    let mut runner = TestRunner::new(Config {
        cases: 1000,
        failure_persistence: None,
        ..Config::default()
    });
    let result = runner.run(&fact_case(), check_saturation);
    let t = start.elapsed();
    let detail = match &result {
        Ok(()) => format!("1000 random fact sets, {:.2} s", secs(t)),
        Err(e) => format!("{e}"),
    };
    outcome(result.is_ok() && t < Duration::from_secs(30), detail)
}

fn outperformance() -> Outcome {
    let start = Instant::now();
    let mut at_least = 0;
    let mut strictly = 0;
    let mut rows = Vec::new();
    for seed in 0..10 {
        let ds = generate(&GenSpec::new(100, ClusterSize::Fixed(4), &[0.8, 0.6, 0.4], seed)).unwrap();
        let rules = generate_default_rules(ds.tools(), 1.0).unwrap();
        let res = resolve(&ds.without_gold(), &rules, &fixture_config(seed)).unwrap();
        let pipeline = evaluate(&ds, &res.predictions()).unwrap();
        let mv = evaluate(&ds, &mv_inter_tool(&ds, &PolarityOrder::default()).unwrap()).unwrap();
        at_least += usize::from(pipeline >= mv);
        strictly += usize::from(pipeline > mv);
        rows.push(format!("{pipeline:.3}/{mv:.3}"));
    }
    let t = start.elapsed();
    outcome(
        at_least >= 8 && strictly >= 5 && t < Duration::from_secs(300),
        format!(
            "pipeline >= inter-tool MV in {at_least}/10, > in {strictly}/10 [{}], {:.2} s",
            rows.join(" "),
            secs(t)
        ),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let fixtures = std::path::PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures");
    let gen = Command::new(env!("CARGO_BIN_EXE_polarity"))
        .args([
            "gen",
            "--clusters",
            "15",
            "--cluster-size",
            "2-5",
            "--accuracies",
            "0.8,0.6,0.4",
            "--seed",
            "9",
            "--out",
        ])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(gen.success());
    let inputs = [
        (fixtures.join("motivating_docs.csv"), fixtures.join("motivating_labels.csv")),
        (dir.path().join("docs.csv"), dir.path().join("labels.csv")),
    ];
    let mut same = true;
    let mut bytes = 0;
    for (docs, labels) in &inputs {
        let run = || {
            let out = Command::new(env!("CARGO_BIN_EXE_polarity"))
                .args(["resolve", "--seed", "7", "--oracle-cap", "9", "--docs"])
                .arg(docs)
                .arg("--labels")
                .arg(labels)
                .output()
                .unwrap();
            assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
            out.stdout
        };
        let (a, b) = (run(), run());
        bytes += a.len();
        same &= a == b;
    }
    outcome(same, format!("two inputs, byte-identical: {same} ({bytes} bytes per pass)"))
}

fn scale() -> Outcome {
    let ds = generate(&GenSpec::new(125, ClusterSize::Fixed(4), &[0.8, 0.7, 0.6, 0.5, 0.4], 11)).unwrap();
    let rules = generate_default_rules(ds.tools(), 1.0).unwrap();
    let start = Instant::now();
    let res = resolve(&ds.without_gold(), &rules, &ResolveConfig::default()).unwrap();
    let t = start.elapsed();
    let acc = evaluate(&ds, &res.predictions()).unwrap();
    outcome(
        t <= Duration::from_secs(60) && res.per_doc.len() == 500,
        format!(
            "{} documents x {} tools in {:.2} s, accuracy {acc:.3}",
            ds.documents().len(),
            ds.tools().len(),
            secs(t)
        ),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("motivating example, step 1", step1_fixture),
        ("motivating example, step 2", step2_fixture),
        ("majority-vote baseline reproduction", baseline_reproduction),
        ("MC-SAT vs exact oracle", oracle_equivalence),
        ("learner gradient vs finite differences", gradient_check),
        ("single-document closed form", closed_form),
        ("saturation properties", saturation_properties),
        ("outperformance on generated data", outperformance),
        ("report determinism", determinism),
        ("scale sanity", scale),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        failed += usize::from(!o.pass);
        println!("[{}] {:>2}. {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

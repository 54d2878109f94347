mod common;

use common::{random_instance, random_training};
use polarity_core::kb::{ClusterId, Dataset, Document, Label, Polarity, ToolId};
use polarity_core::mln::{
    exact_cll, exact_marginals, ground, infer_marginals, learner_gradient, mcsat_marginals, Expectations, SamplerConfig, WeightVector,
};
use polarity_core::rules::parse_rules;
use polarity_core::saturation::instantiate;

fn one_doc_net(w: f64) -> polarity_core::mln::GroundNetwork {
    let ds = Dataset::new(
        vec![Document::new(common::id("d"), ClusterId::new("c").unwrap())],
        vec![Label::new(common::id("d"), ToolId::new("t").unwrap(), Polarity::Positive)],
    )
    .unwrap();
    let rules = parse_rules(&format!("{w}: Label(t, +, ?d) -> IsPositive(?d)\n")).unwrap();
    ground(&rules, &instantiate(&ds), &ds).unwrap()
}

fn sampler(seed: u64, n: usize) -> SamplerConfig {
    SamplerConfig {
        seed,
        num_samples: n,
        ..Default::default()
    }
}

#[test]
fn closed_form_single_document() {
    for w in [0.0, 1.0, 3.0] {
        let net = one_doc_net(w);
        let want = w.exp() / (w.exp() + 2.0);
        let exact = exact_marginals(&net, &net.initial_weights()).unwrap();
        assert!((exact.atom(0) - want).abs() < 1e-9);
        let sampled = mcsat_marginals(&net, &net.initial_weights(), &sampler(11, 20_000)).unwrap();
        assert!((sampled.atom(0) - want).abs() < 0.02, "w={w}: {} vs {want}", sampled.atom(0));
    }
}

#[test]
fn mcsat_agrees_with_enumeration_on_small_instances() {
    for seed in 0..6 {
        let inst = random_instance(seed, 4);
        let exact = exact_marginals(&inst.net, &inst.weights).unwrap();
        let sampled = mcsat_marginals(&inst.net, &inst.weights, &sampler(seed, 20_000)).unwrap();
        let d = exact.linf_distance(&sampled);
        assert!(d <= 0.03, "seed {seed}: L-inf {d}");
    }
}

#[test]
fn component_split_matches_joint_enumeration() {
    for seed in 0..10 {
        let inst = random_instance(seed, 4);
        let joint = exact_marginals(&inst.net, &inst.weights).unwrap();
        let split = infer_marginals(&inst.net, &inst.weights, 12, &SamplerConfig::default()).unwrap();
        assert!(joint.linf_distance(&split) < 1e-12, "seed {seed}");
    }
}

#[test]
fn gradient_matches_central_differences() {
    let h = 1e-5;
    for seed in 0..10 {
        let inst = random_instance(100 + seed, 4);
        let training = random_training(&inst.net, seed);
        let g = learner_gradient(&inst.net, &inst.weights, &training, &Expectations::Exact { cap: 12 }).unwrap();
        for (k, name) in g.rules.iter().enumerate() {
            let base = inst.weights.get(name).unwrap();
            let at = |x: f64| {
                let mut w = inst.weights.clone();
                w.set(name.clone(), x);
                exact_cll(&inst.net, &w, &training).unwrap()
            };
            let fd = (at(base + h) - at(base - h)) / (2.0 * h);
            // the gradient is of the negative log-likelihood
            let err = (-fd - g.gradient[k]).abs();
            assert!(
                err <= 1e-5 * g.gradient[k].abs().max(1e-3),
                "seed {seed} {name}: {} vs {}",
                g.gradient[k],
                -fd
            );
        }
    }
}

#[test]
fn gradient_ignores_constant_offsets() {
    // a rule whose groundings all hold trivially adds the same amount to
    // every world
    let (inst, name) = (0..50)
        .find_map(|seed| {
            let inst = random_instance(seed, 4);
            let name = inst
                .net
                .initial_weights()
                .iter()
                .map(|(n, _)| n.to_string())
                .find(|n| inst.net.rule_clauses(n).is_some_and(|c| c.is_empty()))?;
            Some((inst, name))
        })
        .expect("some instance has an ungrounded rule");
    let training = random_training(&inst.net, 7);
    let exact = Expectations::Exact { cap: 12 };
    let g = learner_gradient(&inst.net, &inst.weights, &training, &exact).unwrap();
    let mut shifted: WeightVector = inst.weights.clone();
    shifted.set(name, 5.0);
    let g2 = learner_gradient(&inst.net, &shifted, &training, &exact).unwrap();
    for (a, b) in g.gradient.iter().zip(&g2.gradient) {
        assert!((a - b).abs() < 1e-9);
    }
}

#[test]
fn exact_marginals_are_distributions() {
    for seed in 0..10 {
        let inst = random_instance(200 + seed, 4);
        let m = exact_marginals(&inst.net, &inst.weights).unwrap();
        for (_, row) in m.iter() {
            assert!(row.iter().all(|p| (0.0..=1.0).contains(p)));
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn monotone_in_clause_weight() {
    let mut last = 0.0;
    for w in [-2.0, -0.5, 0.0, 0.5, 1.0, 2.0, 4.0] {
        let net = one_doc_net(w);
        let p = exact_marginals(&net, &net.initial_weights()).unwrap().atom(0);
        assert!(p > last);
        last = p;
    }
}

mod common;

use polarity_core::baselines::mv_both;
use polarity_core::harness::io::format_dataset;
use polarity_core::harness::report::{baseline_report, resolve_report};
use polarity_core::harness::{
    generate, load_dataset, motivating_example, parse_dataset, tool_accuracy, write_dataset, ClusterSize, GenSpec, RunConfig,
};
use polarity_core::kb::{Atom, Literal};
use polarity_core::resolve::resolve;
use polarity_core::rules::generate_default_rules;
use polarity_core::saturation::{derive_inconsistencies, instantiate, measure_inconsistency, saturate};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_data_survives_csv(
        clusters in 1usize..12,
        lo in 1usize..4,
        extra in 0usize..3,
        accs in proptest::collection::vec(0.0f64..=1.0, 1..4),
        seed in any::<u64>(),
    ) {
        let ds = generate(&GenSpec::new(clusters, ClusterSize::Range(lo, lo + extra), &accs, seed)).unwrap();
        let (docs, labels) = format_dataset(&ds).unwrap();
        prop_assert_eq!(parse_dataset(&docs, &labels).unwrap(), ds);
    }
}

#[test]
fn round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let ds = generate(&GenSpec::new(20, ClusterSize::Range(1, 5), &[0.9, 0.5, 0.2], 4)).unwrap();
    let (d, l) = (dir.path().join("docs.csv"), dir.path().join("labels.csv"));
    write_dataset(&ds, &d, &l).unwrap();
    assert_eq!(load_dataset(&d, &l).unwrap(), ds);
}

#[test]
fn chance_level_tools_concentrate() {
    // 1000 documents; 6 standard deviations of a Binomial(1000, 1/3)
    // proportion is about 0.09, the window is a little narrower
    let third = 1.0 / 3.0;
    for seed in 0..5 {
        let ds = generate(&GenSpec::new(250, ClusterSize::Fixed(4), &[third, third, third], seed)).unwrap();
        assert_eq!(ds.documents().len(), 1000);
        for t in ds.tools() {
            let a = tool_accuracy(&ds, t).unwrap();
            assert!((0.28..=0.39).contains(&a), "seed {seed} {t}: {a}");
        }
    }
}

#[test]
fn three_by_three_spec() {
    let ds = generate(&GenSpec::new(3, ClusterSize::Fixed(3), &[0.7], 1)).unwrap();
    assert_eq!(ds.documents().len(), 9);
    let fs = instantiate(&ds);
    let same_as = fs.literals().filter(|l| matches!(l.atom, Atom::SameAs(..))).count();
    assert_eq!(same_as, 9, "three pairs in each of three clusters");
}

#[test]
fn perfect_tools_produce_no_inconsistency() {
    let ds = generate(&GenSpec::new(30, ClusterSize::Range(1, 4), &[1.0, 1.0, 1.0], 8)).unwrap();
    let fs = derive_inconsistencies(&saturate(&instantiate(&ds)));
    let r = measure_inconsistency(&ds, &fs);
    assert_eq!((r.in_tool_violations, r.inter_tool_violations, r.conflicted_atoms), (0, 0, 0));
    assert!(!fs.literals().any(|l: &Literal| l.positive && fs.contains(&l.negated())));
}

#[test]
fn reports_are_stable() {
    let ds = motivating_example();
    let cfg = RunConfig::default();
    let rules = generate_default_rules(ds.tools(), cfg.init_weight).unwrap();
    let res = resolve(&ds.without_gold(), &rules, &cfg.resolve_config()).unwrap();
    let a = resolve_report(&ds, &res, &cfg, false);
    let again = resolve(&ds.without_gold(), &rules, &cfg.resolve_config()).unwrap();
    assert_eq!(a.to_json(), resolve_report(&ds, &again, &cfg, false).to_json());
    assert!(!a.to_json().contains("timings"));
    assert!(resolve_report(&ds, &res, &cfg, true).to_json().contains("ground_ms"));

    let json: serde_json::Value = serde_json::from_str(&a.to_json()).unwrap();
    assert_eq!(json["documents"].as_array().unwrap().len(), 9);
    assert_eq!(json["inconsistency"]["after"]["in_tool_violations"], 0);
    assert!(json["accuracy"]["tools"]["tb"].is_number());

    let both = mv_both(&ds, &cfg.tie_break).unwrap();
    let b = baseline_report(&ds, &both, &cfg);
    assert_eq!(b.accuracy.predictions, Some(5.0 / 9.0));
    assert!(b.to_text().contains("accuracy predictions: 0.5556"));
}

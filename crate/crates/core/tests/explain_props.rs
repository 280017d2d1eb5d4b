mod common;

use common::*;
use instgov::exec::Execution;
use instgov::explain::{apply_edit, explain_counterfactual_with, explain_factual, render, TemplateSet};
use instgov::shacl::validate;
use instgov::sim::synth;
use proptest::prelude::*;

#[test]
fn counterfactual_cost_matches_exhaustive_search() {
    let mut rng = synth::rng(0xcf);
    let mut restored = 0;
    for case in 0..120 {
        let c = random_cf_case(&mut rng);
        let optimum = oracle_cf_cost(&c);
        for (_, cf) in explain_case(&c) {
            assert_eq!(cf.restored, optimum.is_some(), "case {case}: {:?}", c.spec.props[0]);
            if let Some(cost) = optimum {
                restored += 1;
                assert_eq!(cf.cost, cost, "case {case}: {:?}", c.spec.props[0]);
                let after = apply_edit(&c.graph, &cf.edit);
                assert!(oracle_validate(&after, std::slice::from_ref(&c.spec)).is_empty(), "case {case}");
            }
            assert!(cf.cost <= c.budget);
        }
    }
    assert!(restored > 60, "only {restored} restorable instances");
}

#[test]
fn parallel_search_agrees() {
    let mut rng = synth::rng(11);
    for _ in 0..20 {
        let c = random_cf_case(&mut rng);
        let shapes = compile_specs(std::slice::from_ref(&c.spec));
        let report = validate(&c.graph, &shapes).unwrap();
        for f in explain_factual(&report, &c.graph, &ex("Agent"), 1).unwrap() {
            let a = explain_counterfactual_with(Execution::Sequential, &c.graph, &shapes, &f, c.budget).unwrap();
            let b = explain_counterfactual_with(Execution::Parallel, &c.graph, &shapes, &f, c.budget).unwrap();
            assert_eq!(a, b);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    /// Every factual explanation points at triples of the agent graph and
    /// maps back to exactly one report result.
    #[test]
    fn factual_explanations_are_sound(seed in any::<u64>()) {
        let mut rng = synth::rng(seed);
        let specs = random_specs(&mut rng, 4, 5, 3);
        let shapes = compile_specs(&specs);
        let g = random_graph(&mut rng, 25, 5, 3);
        let report = validate(&g, &shapes).unwrap();
        let facts = explain_factual(&report, &g, &ex("Agent"), 3).unwrap();
        prop_assert_eq!(facts.len(), report.violation_count());
        for f in &facts {
            prop_assert!(f.offending.iter().all(|t| g.contains(t)));
            prop_assert!(report.results.iter().any(|r| r.focus == f.focus && r.path == f.path && r.kind == f.kind && r.offending_triples == f.offending));
        }
        let ids: std::collections::BTreeSet<_> = facts.iter().map(|f| &f.violation_id).collect();
        prop_assert_eq!(ids.len(), facts.len());
    }

    /// A restoring edit has least cost: no cheaper edit restores, and it
    /// never introduces results for the norm elsewhere.
    #[test]
    fn counterfactuals_are_minimal(seed in any::<u64>()) {
        let mut rng = synth::rng(seed);
        let c = random_cf_case(&mut rng);
        let optimum = oracle_cf_cost(&c);
        let shapes = compile_specs(std::slice::from_ref(&c.spec));
        let before = validate(&c.graph, &shapes).unwrap();
        for (f, cf) in explain_case(&c) {
            prop_assert_eq!(cf.restored, optimum.is_some());
            if cf.restored {
                prop_assert_eq!(Some(cf.cost), optimum);
                let after = validate(&apply_edit(&c.graph, &cf.edit), &shapes).unwrap();
                for r in &after.results {
                    prop_assert!(before.results.contains(r) && !(r.focus == f.focus && r.path == f.path));
                }
            }
        }
    }

    #[test]
    fn rendering_is_deterministic(seed in any::<u64>()) {
        let mut rng = synth::rng(seed);
        let c = random_cf_case(&mut rng);
        let templates = TemplateSet::builtin();
        for (f, cf) in explain_case(&c) {
            let a = render(&f, &cf, &(), &templates).unwrap();
            let b = render(&f.clone(), &cf.clone(), &(), &templates).unwrap();
            prop_assert!(a.text.contains(f.norm_id.as_str()) || a.text.contains(f.norm_id.local_name()));
            prop_assert_eq!(a, b);
        }
    }
}

mod common;

use common::*;
use instgov::audit::AuditKind;
use instgov::exec::Execution;
use instgov::sim::{run, run_with, synth, Scenario};
use proptest::prelude::*;

#[test]
fn contract17_end_to_end() {
    let sc = Scenario::load(&fixtures().join("contract17.toml")).unwrap();
    let out = run(&sc).unwrap();
    let a = &out.ticks[0].agents[0];
    assert_eq!(a.state_before.local_name(), "Active");
    assert_eq!(a.state.local_name(), "Warning");
    assert_eq!(a.violations.len(), 1);
    assert!(!a.verdict.as_ref().unwrap().compliant);
    assert_eq!(a.penalty, int(4));
    let e = &out.explanations[0];
    assert!(e.text.contains("Contract-17"));
    assert!(e.text.contains("LegalConstraint-12"));
    assert!(e.counterfactual.restored);
    assert_eq!(e.counterfactual.cost, 1);
    assert!(out.log.verify().valid);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn runs_are_deterministic(seed in any::<u64>()) {
        let sc = load_scenario(&random_scenario(&mut synth::rng(seed), 3, 4));
        let a = run_with(Execution::Sequential, &sc).unwrap();
        let b = run_with(Execution::Parallel, &sc).unwrap();
        let c = run(&sc).unwrap();
        prop_assert_eq!(a.log.to_bytes(), b.log.to_bytes());
        prop_assert_eq!(a.log.to_bytes(), c.log.to_bytes());
        prop_assert_eq!(serde_json::to_string(&a.ticks).unwrap(), serde_json::to_string(&b.ticks).unwrap());
        prop_assert_eq!(a.summary(), b.summary());
    }

    /// Every violation, verdict, explanation and applied transition in the
    /// tick reports appears once in the audit log, and the log verifies.
    #[test]
    fn audit_log_is_complete(seed in any::<u64>()) {
        let sc = load_scenario(&random_scenario(&mut synth::rng(seed), 3, 5));
        let out = run(&sc).unwrap();
        let agents = out.ticks.iter().flat_map(|t| &t.agents);
        let (mut violations, mut verdicts, mut transitions, mut decisions) = (0, 0, 0, 0);
        for a in agents {
            violations += a.violations.len();
            verdicts += usize::from(a.verdict.is_some() || a.blocked);
            transitions += a.transitions.len();
            decisions += usize::from(a.decision.is_some());
            prop_assert!(a.failure.is_none(), "{:?}", a.failure);
        }
        prop_assert_eq!(verdicts, decisions);
        prop_assert_eq!(out.log.count(AuditKind::Violation), violations);
        prop_assert_eq!(out.log.count(AuditKind::Explanation), violations);
        prop_assert_eq!(out.explanations.len(), violations);
        prop_assert_eq!(out.log.count(AuditKind::Verdict), verdicts);
        prop_assert_eq!(out.log.count(AuditKind::Transition), transitions);
        prop_assert_eq!(out.log.count(AuditKind::Enrollment), 3);
        let history: usize = out.states.values().map(|s| s.history.len()).sum();
        prop_assert_eq!(history, transitions);
        for s in out.states.values() {
            prop_assert!(s.replays(&sc.governance));
        }
        prop_assert!(out.log.verify().valid);
        let times: Vec<u64> = out.log.entries().iter().map(|e| e.time).collect();
        prop_assert!(times.windows(2).all(|w| w[0] <= w[1]));
    }

    /// Blocked decisions happen only in states that withhold the relation.
    #[test]
    fn blocking_follows_restrictions(seed in any::<u64>()) {
        let sc = load_scenario(&random_scenario(&mut synth::rng(seed), 2, 6));
        let out = run(&sc).unwrap();
        for a in out.ticks.iter().flat_map(|t| &t.agents) {
            let restricted = a.decision.as_ref().is_some_and(|d| {
                sc.governance.restrictions.get(&a.state_before).is_some_and(|r| r.contains(&d.relation))
            });
            prop_assert_eq!(a.blocked, restricted);
            if a.blocked {
                prop_assert!(a.verdict.is_none() && a.state == a.state_before);
            }
        }
    }
}

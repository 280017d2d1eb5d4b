use super::*;
use crate::manifest::{compile_to_shapes, materialize_conditions, parse_manifest};
use crate::rdf::parse_turtle;
use crate::rdf::vocab::EX;
use crate::shacl::{parse_shapes, validate, Shape};

const MANIFEST: &str = r#"
version 1
signal :Violation
statement ex:LegalConstraint-12
  family local-law
  attribute ex:EmploymentContract
  deontic must-not
  aim ?c ex:employmentType ex:FullTime
  condition ?c ex:employee ?p
  condition ?p ex:age ?a filter ?a < 18
  or-else :Violation
  remedy ex:PartTime
  message "prohibition of full-time employment of minors"
end
"#;

const DATA: &str = r#"
ex:AgentA ex:concludes ex:Contract-17 .
ex:Contract-17 a ex:EmploymentContract ; ex:employee ex:MinorSubject ; ex:employmentType ex:FullTime .
ex:MinorSubject ex:age 16 .
"#;

fn ex(l: &str) -> String {
    format!("{EX}{l}")
}

struct Case {
    manifest: crate::manifest::Manifest,
    shapes: Vec<Shape>,
    graph: Graph,
}

fn contract17() -> Case {
    let manifest = parse_manifest(MANIFEST).unwrap();
    let shapes = compile_to_shapes(&manifest).unwrap();
    let graph = materialize_conditions(&manifest, &parse_turtle(DATA).unwrap()).unwrap();
    Case { manifest, shapes, graph }
}

#[test]
fn factual_for_contract17() {
    let c = contract17();
    let report = validate(&c.graph, &c.shapes).unwrap();
    let agent = Iri::new(ex("AgentA"));
    let mut f = explain_factual(&report, &c.graph, &agent, 1).unwrap();
    assert_eq!(f.len(), 1);
    attach_evidence(&mut f, &c.manifest, &c.graph);
    let e = &f[0];
    assert_eq!(e.norm_id, Iri::new(ex("LegalConstraint-12")));
    assert!(e.violation_id.starts_with("V-") && e.violation_id.len() == 14);
    assert!(e.offending.contains(&Triple::iris(&ex("Contract-17"), &ex("employmentType"), &ex("FullTime"))));
    assert!(e.evidence.contains(&Triple::new(Term::iri(ex("MinorSubject")), Iri::new(ex("age")), Term::integer(16)).unwrap()));
    assert_eq!(e.decision.len(), 1);
}

#[test]
fn conforming_report_explains_nothing() {
    let c = contract17();
    let g = parse_turtle(&DATA.replace("ex:age 16", "ex:age 30")).unwrap();
    let g = materialize_conditions(&c.manifest, &g).unwrap();
    let report = validate(&g, &c.shapes).unwrap();
    assert!(explain_factual(&report, &g, &Iri::new(ex("A")), 0).unwrap().is_empty());
}

#[test]
fn mismatched_graph_is_error() {
    let c = contract17();
    let report = validate(&c.graph, &c.shapes).unwrap();
    let r = explain_factual(&report, &Graph::new(), &Iri::new(ex("A")), 0);
    assert!(matches!(r, Err(ExplainError::ReportMismatch(_))));
}

#[test]
fn two_violations_have_distinct_ids() {
    let c = contract17();
    let more = format!("{DATA} ex:Contract-18 a ex:EmploymentContract ; ex:employee ex:MinorSubject ; ex:employmentType ex:FullTime .");
    let g = materialize_conditions(&c.manifest, &parse_turtle(&more).unwrap()).unwrap();
    let report = validate(&g, &c.shapes).unwrap();
    let f = explain_factual(&report, &g, &Iri::new(ex("A")), 3).unwrap();
    assert_eq!(f.len(), 2);
    assert_ne!(f[0].violation_id, f[1].violation_id);
}

#[test]
fn counterfactual_prefers_substitution() {
    let c = contract17();
    let report = validate(&c.graph, &c.shapes).unwrap();
    let f = explain_factual(&report, &c.graph, &Iri::new(ex("AgentA")), 1).unwrap();
    let cf = explain_counterfactual(&c.graph, &c.shapes, &f[0], 3).unwrap();
    assert!(cf.restored);
    assert_eq!(cf.cost, 1);
    assert_eq!(
        cf.edit.substitutions,
        vec![(
            Triple::iris(&ex("Contract-17"), &ex("employmentType"), &ex("FullTime")),
            Triple::iris(&ex("Contract-17"), &ex("employmentType"), &ex("PartTime"))
        )]
    );
    assert!(validate(&apply_edit(&c.graph, &cf.edit), &c.shapes).unwrap().conforms);
}

fn shapes(src: &str) -> Vec<Shape> {
    parse_shapes(&parse_turtle(src).unwrap()).unwrap()
}

#[test]
fn max_count_zero_forces_removals() {
    let s = shapes(
        "ex:S a sh:NodeShape ; sh:targetClass ex:Minor ; inst:normFamily inst:LocalLaw ; sh:property _:p .
         _:p sh:path ex:signs ; sh:maxCount 0 .",
    );
    let g = parse_turtle("ex:m a ex:Minor ; ex:signs ex:c1 , ex:c2 .").unwrap();
    let report = validate(&g, &s).unwrap();
    let f = explain_factual(&report, &g, &Iri::new(ex("A")), 0).unwrap();
    let cf = explain_counterfactual(&g, &s, &f[0], 3).unwrap();
    assert!(cf.restored);
    assert_eq!(cf.cost, f[0].offending.len());
    assert!(cf.edit.additions.is_empty() && cf.edit.substitutions.is_empty());
    let short = explain_counterfactual(&g, &s, &f[0], 1).unwrap();
    assert!(!short.restored);
    assert_eq!(short.remaining, 1);
}

#[test]
fn min_count_uses_vocabulary_or_fails() {
    let s = shapes(
        "ex:S a sh:NodeShape ; sh:targetClass ex:Deal ; inst:normFamily inst:LocalLaw ; sh:property _:p .
         _:p sh:path ex:counterparty ; sh:minCount 1 .",
    );
    let g = parse_turtle("ex:d a ex:Deal .").unwrap();
    let report = validate(&g, &s).unwrap();
    let f = explain_factual(&report, &g, &Iri::new(ex("A")), 0).unwrap();
    let cf = explain_counterfactual(&g, &s, &f[0], 2).unwrap();
    assert!(cf.restored);
    assert_eq!(cf.edit.additions.len(), 1);

    let typed = shapes(
        "ex:S a sh:NodeShape ; sh:targetClass ex:Deal ; inst:normFamily inst:LocalLaw ; sh:property _:p .
         _:p sh:path ex:amount ; sh:minCount 1 ; sh:datatype xsd:integer .",
    );
    let report = validate(&g, &typed).unwrap();
    let f = explain_factual(&report, &g, &Iri::new(ex("A")), 0).unwrap();
    assert!(matches!(explain_counterfactual(&g, &typed, &f[0], 2), Err(ExplainError::EmptyRepairVocabulary { .. })));
    assert!(matches!(explain_counterfactual(&g, &typed, &f[0], 0), Err(ExplainError::ZeroBudget)));
}

#[test]
fn render_contract17() {
    let c = contract17();
    let report = validate(&c.graph, &c.shapes).unwrap();
    let agent = Iri::new(ex("AgentA"));
    let mut f = explain_factual(&report, &c.graph, &agent, 1).unwrap();
    attach_evidence(&mut f, &c.manifest, &c.graph);
    let cf = explain_counterfactual(&c.graph, &c.shapes, &f[0], 3).unwrap();
    let names: BTreeMap<Iri, String> = [(agent.clone(), "Agent A".to_string())].into_iter().collect();
    let r = render(&f[0], &cf, &names, &TemplateSet::builtin()).unwrap();
    for needle in ["Agent A", agent.as_str(), "step 1", "Contract-17", "LegalConstraint-12", "MinorSubject' (age 16)", "'PartTime' in place of 'FullTime'"] {
        assert!(r.text.contains(needle), "missing {needle:?} in {}", r.text);
    }
    assert_eq!(r, render(&f[0], &cf, &names, &TemplateSet::builtin()).unwrap());
    assert_eq!(r.slots.len(), SLOTS.len());
    assert!(matches!(render(&f[0], &cf, &names, &TemplateSet::empty()), Err(ExplainError::MissingTemplate(_))));
}

#[test]
fn render_removal_form() {
    let s = shapes(
        "ex:S a sh:NodeShape ; sh:targetClass ex:Minor ; inst:normFamily inst:LocalLaw ; sh:property _:p .
         _:p sh:path ex:signs ; sh:maxCount 0 .",
    );
    let g = parse_turtle("ex:m a ex:Minor ; ex:signs ex:c1 .").unwrap();
    let report = validate(&g, &s).unwrap();
    let f = explain_factual(&report, &g, &Iri::new(ex("A")), 2).unwrap();
    let cf = explain_counterfactual(&g, &s, &f[0], 2).unwrap();
    let r = render(&f[0], &cf, &(), &TemplateSet::builtin()).unwrap();
    assert!(r.text.contains("Retracting an unlawful action"), "{}", r.text);
}

#[test]
fn templates_reject_unknown_slots() {
    let mut t = TemplateSet::empty();
    assert!(matches!(t.insert(ConstraintKind::In, "{agent} did {what}"), Err(ExplainError::UnknownSlot { .. })));
    t.insert(ConstraintKind::In, "{agent}|{step}").unwrap();
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("pattern.txt"), "custom {norm}").unwrap();
    let loaded = TemplateSet::load_dir(dir.path()).unwrap();
    assert_eq!(loaded.get(ConstraintKind::Pattern), Some("custom {norm}"));
    assert!(loaded.get(ConstraintKind::MinCount).is_some());
}

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use super::{group_by_subject, quoted, CounterfactualExplanation, ExplainError, FactualExplanation};
use crate::rdf::{Iri, Term, Triple};
use crate::shacl::ConstraintKind;

pub const SLOTS: [&str; 5] = ["agent", "step", "norm", "facts", "remedy"];

/// Resolves agent ids to human-readable names.
pub trait AgentNames {
    fn name_of(&self, agent: &Iri) -> Option<String>;
}

impl AgentNames for BTreeMap<Iri, String> {
    fn name_of(&self, agent: &Iri) -> Option<String> {
        self.get(agent).cloned()
    }
}

impl AgentNames for () {
    fn name_of(&self, _: &Iri) -> Option<String> {
        None
    }
}

const VIOLATES: &str = "At decision step {step}, {agent} {facts}. This violates {norm}. {remedy}\n";
const OMITS: &str = "At decision step {step}, {agent} {facts}. This omits an assertion required by {norm}. {remedy}\n";

/// One template per constraint kind, keyed by kind.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TemplateSet {
    templates: BTreeMap<ConstraintKind, String>,
}

fn check_slots(name: &str, text: &str) -> Result<(), ExplainError> {
    let mut rest = text;
    while let Some(open) = rest.find('{') {
        let after = &rest[open + 1..];
        let close = after.find('}').ok_or_else(|| ExplainError::UnknownSlot { template: name.into(), slot: after.into() })?;
        let slot = &after[..close];
        if !SLOTS.contains(&slot) {
            return Err(ExplainError::UnknownSlot { template: name.into(), slot: slot.into() });
        }
        rest = &after[close + 1..];
    }
    Ok(())
}

impl TemplateSet {
    pub fn empty() -> Self {
        TemplateSet { templates: BTreeMap::new() }
    }

    pub fn builtin() -> Self {
        let templates = ConstraintKind::ALL
            .iter()
            .map(|k| {
                let t = match k {
                    ConstraintKind::MinCount | ConstraintKind::HasValue => OMITS,
                    _ => VIOLATES,
                };
                (*k, t.to_string())
            })
            .collect();
        TemplateSet { templates }
    }

    pub fn insert(&mut self, kind: ConstraintKind, text: &str) -> Result<(), ExplainError> {
        check_slots(kind.id(), text)?;
        self.templates.insert(kind, text.to_string());
        Ok(())
    }

    /// Built-in templates overridden by any `<kind>.txt` in `dir`, e.g.
    /// `forbidden-value.txt`.
    pub fn load_dir(dir: &Path) -> Result<Self, ExplainError> {
        let mut set = TemplateSet::builtin();
        for k in ConstraintKind::ALL {
            let p = dir.join(format!("{}.txt", k.id()));
            if p.exists() {
                set.insert(k, &std::fs::read_to_string(p)?)?;
            }
        }
        Ok(set)
    }

    pub fn get(&self, kind: ConstraintKind) -> Option<&str> {
        self.templates.get(&kind).map(String::as_str)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RenderedExplanation {
    pub text: String,
    pub slots: BTreeMap<String, String>,
    pub template_id: String,
}

fn value(t: &Term) -> String {
    match t {
        Term::Literal(l) => l.lexical().to_string(),
        other => quoted(other),
    }
}

fn phrase(t: &Triple) -> String {
    format!("{} of {} is {}", t.predicate().local_name(), quoted(t.subject()), value(t.object()))
}

fn join(parts: &[String]) -> String {
    match parts {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} and {last}", init.join(", ")),
    }
}

fn facts(f: &FactualExplanation) -> String {
    let focus = quoted(&f.focus);
    let verbs: Vec<String> = f.decision.iter().map(|t| t.predicate().local_name().to_string()).collect();
    let mut out = if verbs.is_empty() { format!("acted on {focus}") } else { format!("{} {focus}", join(&verbs)) };

    let agent = Term::Iri(f.agent.clone());
    let related: Vec<String> = group_by_subject(&f.evidence)
        .into_iter()
        .filter(|(s, _)| **s != f.focus && **s != agent)
        .map(|(s, ts)| {
            let attrs: Vec<String> = ts
                .iter()
                .filter(|t| t.object().is_literal())
                .map(|t| format!("{} {}", t.predicate().local_name(), value(t.object())))
                .collect();
            if attrs.is_empty() {
                quoted(s)
            } else {
                format!("{} ({})", quoted(s), attrs.join(", "))
            }
        })
        .collect();
    if !related.is_empty() {
        out.push_str(" with ");
        out.push_str(&join(&related));
    }

    let detail = match f.kind {
        ConstraintKind::MinCount => format!("no {} is asserted for {focus}", f.path.predicate.local_name()),
        ConstraintKind::HasValue => format!("{focus} lacks the required {} value", f.path.predicate.local_name()),
        _ => join(&f.offending.iter().map(phrase).collect::<Vec<_>>()),
    };
    out.push_str(", where ");
    out.push_str(&detail);
    out
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(first) => first.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

fn remedy(c: &CounterfactualExplanation) -> String {
    if !c.restored || c.edit.is_empty() {
        return if c.restored {
            "No change is needed to restore compliance.".into()
        } else {
            "No edit within the search budget restores compliance.".into()
        };
    }
    let mut parts = Vec::new();
    for (old, new) in &c.edit.substitutions {
        parts.push(format!(
            "assigning {} in place of {} as {} of {}",
            value(new.object()),
            value(old.object()),
            new.predicate().local_name(),
            quoted(new.subject())
        ));
    }
    for t in &c.edit.additions {
        parts.push(format!("adding the missing legally required assertion ({})", phrase(t)));
    }
    for t in &c.edit.removals {
        parts.push(format!("retracting an unlawful action ({})", phrase(t)));
    }
    format!("{} would restore compliance.", capitalize(&join(&parts)))
}

fn norm_slot(f: &FactualExplanation) -> String {
    let name = format!("'{}'", f.norm_id.local_name());
    if f.message.is_empty() {
        format!("{name} [{}]", f.norm_id)
    } else {
        format!("{name} ({}) [{}]", f.message, f.norm_id)
    }
}

fn substitute(template: &str, slots: &BTreeMap<String, String>) -> String {
    let mut out = String::with_capacity(template.len() * 2);
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        match after.find('}').and_then(|close| Some((close, slots.get(&after[..close])?))) {
            Some((close, v)) => {
                out.push_str(v);
                rest = &after[close + 1..];
            }
            None => {
                out.push('{');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}

/// Fills the template for the violated constraint kind. Output is a pure
/// function of the inputs.
pub fn render(
    f: &FactualExplanation,
    c: &CounterfactualExplanation,
    names: &dyn AgentNames,
    templates: &TemplateSet,
) -> Result<RenderedExplanation, ExplainError> {
    let template = templates.get(f.kind).ok_or(ExplainError::MissingTemplate(f.kind))?;
    let agent = match names.name_of(&f.agent) {
        Some(n) => format!("{n} ({})", f.agent),
        None => f.agent.to_string(),
    };
    let slots: BTreeMap<String, String> = [
        ("agent", agent),
        ("step", f.step.to_string()),
        ("norm", norm_slot(f)),
        ("facts", facts(f)),
        ("remedy", remedy(c)),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    let text = substitute(template, &slots);
    Ok(RenderedExplanation { text, slots, template_id: f.kind.id().to_string() })
}

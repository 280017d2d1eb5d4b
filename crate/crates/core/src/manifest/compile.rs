use std::collections::BTreeMap;

use super::{AdicoStatement, Deontic, Manifest, ManifestError, MaskMode, MaskSpec};
use crate::rdf::vocab::{inst, rdf_type};
use crate::rdf::{match_patterns, Graph, Iri, PatternTerm, Term, Triple, TriplePattern};
use crate::shacl::{Checks, PropertyConstraint, PropertyPath, Shape, Target};

/// The class materialized for nodes that satisfy a statement's attribute and
/// conditions: `inst:Condition_<local name of the statement id>`.
pub fn condition_class(stmt: &AdicoStatement) -> Iri {
    Iri::new(inst(&format!("Condition_{}", stmt.id.local_name())))
}

fn uses_condition_class(s: &AdicoStatement) -> bool {
    match s.deontic {
        Deontic::MustNot => true,
        Deontic::Must => !s.conditions.is_empty(),
        Deontic::May => false,
    }
}

fn uncompilable(s: &AdicoStatement, reason: &str) -> ManifestError {
    ManifestError::Uncompilable { statement: s.id.clone(), reason: reason.to_string() }
}

fn check_compilable(s: &AdicoStatement) -> Result<(), ManifestError> {
    let aim = &s.aim;
    if aim.bound_positions() == 0 {
        return Err(uncompilable(s, "aim pattern has no bound positions"));
    }
    if aim.predicate.as_const().is_none() {
        return Err(uncompilable(s, "aim predicate must be bound"));
    }
    let Some(focus) = s.focus_var() else {
        return Err(uncompilable(s, "aim subject must be a variable"));
    };
    if aim.filter.is_some() {
        return Err(uncompilable(s, "filters on the aim are not supported"));
    }
    if let PatternTerm::Var(o) = &aim.object {
        if o == focus {
            return Err(uncompilable(s, "aim object repeats the subject variable"));
        }
        let constrained = s.conditions.iter().any(|c| c.variables().contains(o.as_str()) || c.filter.as_ref().is_some_and(|f| &f.var == o));
        if constrained {
            return Err(uncompilable(s, "conditions may not constrain the aim object"));
        }
    }
    Ok(())
}

fn check_collisions(m: &Manifest) -> Result<(), ManifestError> {
    let mut seen: BTreeMap<Iri, &Iri> = BTreeMap::new();
    for s in m.statements.iter().filter(|s| uses_condition_class(s)) {
        if let Some(prev) = seen.insert(condition_class(s), &s.id) {
            return Err(ManifestError::ConditionClassCollision { a: prev.clone(), b: s.id.clone() });
        }
    }
    Ok(())
}

fn shape_id(s: &AdicoStatement, suffix: &str) -> Iri {
    Iri::new(format!("{}-{suffix}", s.id))
}

fn constant_object(s: &AdicoStatement) -> Option<&Term> {
    s.aim.object.as_const()
}

fn aim_path(s: &AdicoStatement) -> PropertyPath {
    PropertyPath::forward(s.aim.predicate.as_const().and_then(Term::as_iri).expect("checked compilable").clone())
}

fn statement_shapes(s: &AdicoStatement) -> Vec<Shape> {
    match s.deontic {
        Deontic::May => Vec::new(),
        Deontic::MustNot => {
            let class = condition_class(s);
            let mut checks = Checks { repair_values: s.remedy.clone(), ..Checks::default() };
            match constant_object(s) {
                Some(o) => checks.forbidden_value = Some(o.clone()),
                None => checks.max_count = Some(0),
            }
            let prohibition = Shape::new(shape_id(s, "prohibition"), Target::Class(class.clone()), s.family, s.id.clone())
                .with_constraint(PropertyConstraint { path: aim_path(s), checks })
                .with_message(&s.message);
            let integrity = Shape::new(shape_id(s, "condition"), Target::Class(class), s.family, s.id.clone())
                .with_constraint(PropertyConstraint {
                    path: PropertyPath::forward(Iri::new(rdf_type())),
                    checks: Checks { has_value: Some(Term::Iri(s.attribute.clone())), ..Checks::default() },
                })
                .with_message(&s.message);
            vec![prohibition, integrity]
        }
        Deontic::Must => {
            let target = if s.conditions.is_empty() { s.attribute.clone() } else { condition_class(s) };
            let checks = Checks {
                min_count: Some(1),
                has_value: constant_object(s).cloned(),
                repair_values: s.remedy.clone(),
                ..Checks::default()
            };
            vec![Shape::new(shape_id(s, "requirement"), Target::Class(target), s.family, s.id.clone())
                .with_constraint(PropertyConstraint { path: aim_path(s), checks })
                .with_message(&s.message)]
        }
    }
}

/// Compiles every statement to shapes whose norm id is the statement id.
/// Prohibitions target the materialized condition class, so validate the
/// output of [`materialize_conditions`].
pub fn compile_to_shapes(m: &Manifest) -> Result<Vec<Shape>, ManifestError> {
    check_collisions(m)?;
    let mut out = Vec::new();
    for s in &m.statements {
        if s.deontic != Deontic::May {
            check_compilable(s)?;
        }
        out.extend(statement_shapes(s));
    }
    Ok(out)
}

fn bindings(g: &Graph, patterns: &[TriplePattern]) -> Vec<crate::rdf::Binding> {
    match_patterns(g, patterns).expect("filter variables are checked when the manifest is read")
}

/// Adds `(focus rdf:type inst:Condition_<s>)` for every node satisfying a
/// statement's attribute and conditions in `data`.
pub fn materialize_conditions(m: &Manifest, data: &Graph) -> Result<Graph, ManifestError> {
    check_collisions(m)?;
    let mut out = data.clone();
    let ty = Iri::new(rdf_type());
    for s in m.statements.iter().filter(|s| uses_condition_class(s)) {
        check_compilable(s)?;
        let focus = s.focus_var().expect("checked compilable");
        let class = Term::Iri(condition_class(s));
        for b in bindings(data, &s.guard_patterns()) {
            if let Some(node) = b.get(focus) {
                if let Ok(t) = Triple::new(node.clone(), ty.clone(), class.clone()) {
                    out.insert(t);
                }
            }
        }
    }
    Ok(out)
}

fn ground(aim: &TriplePattern, bs: &[crate::rdf::Binding]) -> Graph {
    bs.iter().filter_map(|b| aim.instantiate(b)).collect()
}

/// Instantiates each `must` and `must-not` statement against `world`.
///
/// A forbid mask holds the aim instances present in `world` under the
/// statement's attribute and conditions. A permit mask holds the required
/// instances: one per qualifying node when the aim is fully determined by
/// its subject, otherwise the aim instances present in `world`.
pub fn compile_to_masks(m: &Manifest, world: &Graph) -> Vec<(MaskSpec, Graph)> {
    let mut out = Vec::new();
    for s in &m.statements {
        let mode = match s.deontic {
            Deontic::May => continue,
            Deontic::Must => MaskMode::Permit,
            Deontic::MustNot => MaskMode::Forbid,
        };
        let guard = s.guard_patterns();
        let mut pattern = guard.clone();
        pattern.push(s.aim.clone());
        let determined = s.aim.predicate.as_const().is_some() && s.aim.object.as_const().is_some();
        let mask = if mode == MaskMode::Permit && determined {
            ground(&s.aim, &bindings(world, &guard))
        } else {
            ground(&s.aim, &bindings(world, &pattern))
        };
        out.push((MaskSpec { statement_id: s.id.clone(), mode, pattern }, mask));
    }
    out
}

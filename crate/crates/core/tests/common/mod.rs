//! Independent oracles and seeded corpora shared by the integration suites.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::path::PathBuf;

use instgov::audit::AuditLog;
use instgov::game::NormalFormGame;
use instgov::rdf::vocab::{inst, rdf, xsd, EX};
use instgov::rdf::{parse_turtle, Graph, Iri, Term, Triple};
use instgov::shacl::{parse_shapes, Direction, Shape, ValidationReport};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::Rng;
use sha2::{Digest, Sha256};

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixtures().join(name)).unwrap()
}

pub fn ex(l: &str) -> Iri {
    Iri::new(format!("{EX}{l}"))
}

// ---------------------------------------------------------------- validator

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Val {
    Node(usize),
    Int(i64),
    Str(&'static str),
}

impl Val {
    pub fn term(&self) -> Term {
        match self {
            Val::Node(i) => Term::Iri(ex(&format!("n{i}"))),
            Val::Int(n) => Term::integer(*n),
            Val::Str(s) => Term::string(s),
        }
    }

    fn ttl(&self) -> String {
        match self {
            Val::Node(i) => format!("ex:n{i}"),
            Val::Int(n) => n.to_string(),
            Val::Str(s) => format!("\"{s}\""),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct PropSpec {
    pub pred: usize,
    pub inverse: bool,
    pub min: Option<usize>,
    pub max: Option<usize>,
    pub datatype_int: bool,
    pub class: Option<usize>,
    pub node_kind_iri: Option<bool>,
    pub min_incl: Option<i64>,
    pub max_incl: Option<i64>,
    pub in_list: Option<Vec<Val>>,
    pub has_value: Option<Val>,
    pub pattern: bool,
    pub forbidden: Option<Val>,
    pub repair: Vec<Val>,
}

#[derive(Clone, Debug)]
pub struct ShapeSpec {
    pub idx: usize,
    pub classes: Vec<usize>,
    pub nodes: Vec<usize>,
    pub props: Vec<PropSpec>,
    pub norm: usize,
}

impl ShapeSpec {
    pub fn id(&self) -> Iri {
        ex(&format!("Shape{}", self.idx))
    }

    pub fn norm_id(&self) -> Iri {
        ex(&format!("Norm{}", self.norm))
    }

    pub fn ttl(&self) -> String {
        let mut s = format!("ex:Shape{} a sh:NodeShape ; inst:normFamily inst:LocalLaw ; inst:normId ex:Norm{}", self.idx, self.norm);
        for c in &self.classes {
            s += &format!(" ; sh:targetClass ex:C{c}");
        }
        for n in &self.nodes {
            s += &format!(" ; sh:targetNode ex:n{n}");
        }
        let names: Vec<String> = (0..self.props.len()).map(|j| format!("_:s{}p{j}", self.idx)).collect();
        if !names.is_empty() {
            s += &format!(" ; sh:property {}", names.join(" , "));
        }
        s += " .\n";
        for (p, name) in self.props.iter().zip(&names) {
            if p.inverse {
                s += &format!("{name} sh:path {name}i . {name}i sh:inversePath ex:p{} .\n", p.pred);
            } else {
                s += &format!("{name} sh:path ex:p{} .\n", p.pred);
            }
            let mut parts = Vec::new();
            if let Some(n) = p.min {
                parts.push(format!("sh:minCount {n}"));
            }
            if let Some(n) = p.max {
                parts.push(format!("sh:maxCount {n}"));
            }
            if p.datatype_int {
                parts.push("sh:datatype xsd:integer".into());
            }
            if let Some(c) = p.class {
                parts.push(format!("sh:class ex:C{c}"));
            }
            if let Some(iri) = p.node_kind_iri {
                parts.push(format!("sh:nodeKind {}", if iri { "sh:IRI" } else { "sh:Literal" }));
            }
            if let Some(n) = p.min_incl {
                parts.push(format!("sh:minInclusive {n}"));
            }
            if let Some(n) = p.max_incl {
                parts.push(format!("sh:maxInclusive {n}"));
            }
            if let Some(list) = &p.in_list {
                parts.push(format!("sh:in ( {} )", list.iter().map(Val::ttl).collect::<Vec<_>>().join(" ")));
            }
            if let Some(v) = &p.has_value {
                parts.push(format!("sh:hasValue {}", v.ttl()));
            }
            if p.pattern {
                parts.push("sh:pattern \"^[A-Z]\"".into());
            }
            if let Some(v) = &p.forbidden {
                parts.push(format!("inst:forbiddenValue {}", v.ttl()));
            }
            for v in &p.repair {
                parts.push(format!("inst:repairValue {}", v.ttl()));
            }
            if !parts.is_empty() {
                s += &format!("{name} {} .\n", parts.join(" ; "));
            }
        }
        s
    }
}

pub fn compile_specs(specs: &[ShapeSpec]) -> Vec<Shape> {
    let text: String = specs.iter().map(ShapeSpec::ttl).collect();
    parse_shapes(&parse_turtle(&text).unwrap()).unwrap()
}

/// (focus, predicate, inverse, kind, value, offending triples, shape, norm)
pub type Row = (Term, Iri, bool, String, Option<Term>, BTreeSet<Triple>, Iri, Iri);

pub fn rows_of(report: &ValidationReport) -> Vec<Row> {
    let mut v: Vec<Row> = report
        .results
        .iter()
        .map(|r| {
            (
                r.focus.clone(),
                r.path.predicate.clone(),
                r.path.direction == Direction::Inverse,
                r.kind.id().to_string(),
                r.offending_value.clone(),
                r.offending_triples.clone(),
                r.source_shape.clone(),
                r.norm_id.clone(),
            )
        })
        .collect();
    v.sort();
    v
}

fn int_of(t: &Term) -> Option<i64> {
    let l = t.as_literal()?;
    (l.datatype().as_str() == xsd("integer")).then(|| l.lexical().parse().ok()).flatten()
}

/// Straight-line evaluation of the spec over the raw triple list.
pub fn oracle_validate(g: &Graph, specs: &[ShapeSpec]) -> Vec<Row> {
    let triples: Vec<&Triple> = g.iter().collect();
    let ty = rdf("type");
    let mut rows = Vec::new();
    for s in specs {
        let mut foci: BTreeSet<Term> = BTreeSet::new();
        for c in &s.classes {
            let class = ex(&format!("C{c}"));
            for t in &triples {
                if t.predicate().as_str() == ty && t.object().as_iri() == Some(&class) {
                    foci.insert(t.subject().clone());
                }
            }
        }
        for n in &s.nodes {
            let node = Term::Iri(ex(&format!("n{n}")));
            let mentioned = triples.iter().any(|t| t.subject() == &node || t.object() == &node || Some(t.predicate()) == node.as_iri());
            if mentioned {
                foci.insert(node);
            }
        }
        for f in &foci {
            let mut anchors: BTreeSet<Triple> = triples
                .iter()
                .filter(|t| {
                    t.subject() == f && t.predicate().as_str() == ty && s.classes.iter().any(|c| t.object().as_iri() == Some(&ex(&format!("C{c}"))))
                })
                .map(|t| (*t).clone())
                .collect();
            if anchors.is_empty() {
                anchors = triples.iter().filter(|t| t.subject() == f || t.object() == f || Some(t.predicate()) == f.as_iri()).map(|t| (*t).clone()).collect();
            }
            for p in &s.props {
                let pred = ex(&format!("p{}", p.pred));
                let values: Vec<(Term, Triple)> = triples
                    .iter()
                    .filter(|t| t.predicate() == &pred && if p.inverse { t.object() == f } else { t.subject() == f })
                    .map(|t| (if p.inverse { t.subject().clone() } else { t.object().clone() }, (*t).clone()))
                    .collect();
                let mut emit = |kind: &str, value: Option<Term>, ts: BTreeSet<Triple>| {
                    rows.push((f.clone(), pred.clone(), p.inverse, kind.to_string(), value, ts, s.id(), s.norm_id()));
                };
                if p.min.is_some_and(|n| values.len() < n) {
                    emit("min-count", None, anchors.clone());
                }
                if p.max.is_some_and(|n| values.len() > n) {
                    emit("max-count", None, values.iter().map(|(_, t)| t.clone()).collect());
                }
                if let Some(hv) = &p.has_value {
                    if !values.iter().any(|(v, _)| v == &hv.term()) {
                        emit("has-value", None, anchors.clone());
                    }
                }
                for (v, t) in &values {
                    let one = BTreeSet::from([t.clone()]);
                    if p.datatype_int && int_of(v).is_none() {
                        emit("datatype", Some(v.clone()), one.clone());
                    }
                    if let Some(c) = p.class {
                        let typed = v.is_iri()
                            && triples.iter().any(|t| t.subject() == v && t.predicate().as_str() == ty && t.object().as_iri() == Some(&ex(&format!("C{c}"))));
                        if !typed {
                            emit("class", Some(v.clone()), one.clone());
                        }
                    }
                    if let Some(iri) = p.node_kind_iri {
                        if (iri && !v.is_iri()) || (!iri && !v.is_literal()) {
                            emit("node-kind", Some(v.clone()), one.clone());
                        }
                    }
                    if let Some(lo) = p.min_incl {
                        if !int_of(v).is_some_and(|n| n >= lo) {
                            emit("min-inclusive", Some(v.clone()), one.clone());
                        }
                    }
                    if let Some(hi) = p.max_incl {
                        if !int_of(v).is_some_and(|n| n <= hi) {
                            emit("max-inclusive", Some(v.clone()), one.clone());
                        }
                    }
                    if let Some(list) = &p.in_list {
                        if !list.iter().any(|x| &x.term() == v) {
                            emit("in", Some(v.clone()), one.clone());
                        }
                    }
                    if p.pattern {
                        let text = match v {
                            Term::Iri(i) => Some(i.as_str().to_string()),
                            Term::Literal(l) => Some(l.lexical().to_string()),
                            Term::Blank(_) => None,
                        };
                        if !text.is_some_and(|s| s.starts_with(|c: char| c.is_ascii_uppercase())) {
                            emit("pattern", Some(v.clone()), one.clone());
                        }
                    }
                    if let Some(fv) = &p.forbidden {
                        if &fv.term() == v {
                            emit("forbidden-value", Some(v.clone()), one.clone());
                        }
                    }
                }
            }
        }
    }
    rows.sort();
    rows.dedup();
    rows
}

const STRS: [&str; 3] = ["B", "a", "Zed"];

pub fn random_val(rng: &mut impl Rng, nodes: usize) -> Val {
    match rng.gen_range(0..3) {
        0 => Val::Node(rng.gen_range(0..nodes)),
        1 => Val::Int(rng.gen_range(0..10)),
        _ => Val::Str(STRS.choose(rng).unwrap()),
    }
}

pub fn random_graph(rng: &mut impl Rng, max_triples: usize, nodes: usize, preds: usize) -> Graph {
    let mut g = Graph::new();
    let target = rng.gen_range(1..=max_triples);
    while g.len() < target {
        let s = Term::Iri(ex(&format!("n{}", rng.gen_range(0..nodes))));
        let t = if rng.gen_bool(0.3) {
            Triple::new(s, Iri::new(rdf("type")), Term::Iri(ex(&format!("C{}", rng.gen_range(0..2))))).unwrap()
        } else {
            Triple::new(s, ex(&format!("p{}", rng.gen_range(0..preds))), random_val(rng, nodes).term()).unwrap()
        };
        g.insert(t);
    }
    g
}

pub fn random_prop(rng: &mut impl Rng, nodes: usize, preds: usize) -> PropSpec {
    let mut p = PropSpec { pred: rng.gen_range(0..preds), inverse: rng.gen_bool(0.2), ..Default::default() };
    let picks = rng.gen_range(1..=3);
    for _ in 0..picks {
        match rng.gen_range(0..11) {
            0 => p.min = Some(rng.gen_range(0..3)),
            1 => p.max = Some(rng.gen_range(0..3)),
            2 => p.datatype_int = true,
            3 => p.class = Some(rng.gen_range(0..2)),
            4 => p.node_kind_iri = Some(rng.gen_bool(0.5)),
            5 => p.min_incl = Some(rng.gen_range(0..10)),
            6 => p.max_incl = Some(rng.gen_range(0..10)),
            7 => p.in_list = Some((0..rng.gen_range(1..4)).map(|_| random_val(rng, nodes)).collect()),
            8 => p.has_value = Some(random_val(rng, nodes)),
            9 => p.pattern = true,
            _ => p.forbidden = Some(random_val(rng, nodes)),
        }
    }
    if let (Some(lo), Some(hi)) = (p.min, p.max) {
        if lo > hi {
            p.max = Some(lo);
        }
    }
    p
}

pub fn random_specs(rng: &mut impl Rng, max_shapes: usize, nodes: usize, preds: usize) -> Vec<ShapeSpec> {
    (0..rng.gen_range(1..=max_shapes))
        .map(|idx| {
            let mut classes = Vec::new();
            let mut tnodes = Vec::new();
            if rng.gen_bool(0.8) {
                classes.push(rng.gen_range(0..2));
            }
            if classes.is_empty() || rng.gen_bool(0.2) {
                tnodes.push(rng.gen_range(0..nodes));
            }
            ShapeSpec { idx, classes, nodes: tnodes, props: (0..rng.gen_range(1..=2)).map(|_| random_prop(rng, nodes, preds)).collect(), norm: idx % 3 }
        })
        .collect()
}

// ----------------------------------------------------------- counterfactual

pub struct CfCase {
    pub graph: Graph,
    pub spec: ShapeSpec,
    pub budget: usize,
}

pub fn focus() -> Term {
    Term::Iri(ex("n0"))
}

/// One focus `ex:n0 a ex:C0`, one constraint on `ex:p0`, noise elsewhere,
/// at most 12 triples, with at least one violation.
pub fn random_cf_case(rng: &mut impl Rng) -> CfCase {
    loop {
        let pool = |rng: &mut dyn rand::RngCore| -> Val {
            match rng.gen_range(0..2) {
                0 => Val::Node(rng.gen_range(1..5)),
                _ => Val::Int(rng.gen_range(0..8)),
            }
        };
        let mut p = PropSpec { pred: 0, ..Default::default() };
        match rng.gen_range(0..7) {
            0 => p.in_list = Some((0..2).map(|_| pool(rng)).collect()),
            1 => {
                p.forbidden = Some(pool(rng));
                p.repair = vec![pool(rng)];
            }
            2 => p.max = Some(rng.gen_range(0..3)),
            3 => {
                p.min = Some(rng.gen_range(1..3));
                p.in_list = Some((0..3).map(|_| pool(rng)).collect());
            }
            4 => p.has_value = Some(pool(rng)),
            5 => {
                p.min_incl = Some(rng.gen_range(0..4));
                p.max_incl = Some(rng.gen_range(4..8));
            }
            _ => p.datatype_int = true,
        }
        let spec = ShapeSpec { idx: 0, classes: vec![0], nodes: vec![], props: vec![p], norm: 0 };
        let mut g = Graph::new();
        g.insert(Triple::new(focus(), Iri::new(rdf("type")), Term::Iri(ex("C0"))).unwrap());
        for _ in 0..rng.gen_range(0..4) {
            g.insert(Triple::new(focus(), ex("p0"), pool(rng).term()).unwrap());
        }
        let target = rng.gen_range(4..=12);
        while g.len() < target {
            let s = Term::Iri(ex(&format!("n{}", rng.gen_range(1..5))));
            g.insert(Triple::new(s, ex(&format!("p{}", rng.gen_range(0..3))), pool(rng).term()).unwrap());
        }
        if !oracle_validate(&g, std::slice::from_ref(&spec)).is_empty() {
            return CfCase { graph: g, spec, budget: rng.gen_range(1..=3) };
        }
    }
}

/// Candidate values the constraint itself names; a required untyped path
/// with none falls back to the placeholder.
pub fn oracle_vocab(p: &PropSpec) -> BTreeSet<Term> {
    let mut v: BTreeSet<Term> = BTreeSet::new();
    v.extend(p.in_list.iter().flatten().map(Val::term));
    v.extend(p.has_value.iter().map(Val::term));
    v.extend(p.min_incl.map(Term::integer));
    v.extend(p.max_incl.map(Term::integer));
    v.extend(p.repair.iter().map(Val::term));
    let typed = p.datatype_int || p.class.is_some() || p.node_kind_iri.is_some() || p.pattern || p.in_list.is_some();
    if v.is_empty() && p.min.is_some_and(|n| n > 0) && !typed {
        v.insert(Term::iri(inst("Placeholder")));
    }
    v
}

fn subsets<T: Clone>(items: &[T]) -> Vec<Vec<T>> {
    (0..1u32 << items.len()).map(|m| items.iter().enumerate().filter(|(i, _)| m >> i & 1 == 1).map(|(_, t)| t.clone()).collect()).collect()
}

/// Least `max(|R|, |A|)` over removals `R` of focus values and additions `A`
/// from the vocabulary that leave no violation, within `budget`.
pub fn oracle_cf_cost(c: &CfCase) -> Option<usize> {
    let p = &c.spec.props[0];
    let existing: Vec<Triple> = c.graph.iter().filter(|t| t.subject() == &focus() && t.predicate() == &ex("p0")).cloned().collect();
    let fresh: Vec<Triple> =
        oracle_vocab(p).into_iter().filter_map(|v| Triple::new(focus(), ex("p0"), v).ok()).filter(|t| !c.graph.contains(t)).collect();
    let mut best: Option<usize> = None;
    for r in subsets(&existing) {
        for a in subsets(&fresh) {
            let cost = r.len().max(a.len());
            if cost > c.budget || best.is_some_and(|b| b <= cost) {
                continue;
            }
            let mut g = c.graph.clone();
            for t in &r {
                g.remove(t);
            }
            for t in &a {
                g.insert(t.clone());
            }
            if oracle_validate(&g, std::slice::from_ref(&c.spec)).is_empty() {
                best = Some(cost);
            }
        }
    }
    best
}

// --------------------------------------------------------------------- game

/// Profiles where no player has a strictly better unilateral deviation,
/// by enumerating every profile and every deviation.
pub fn nash_oracle(g: &NormalFormGame) -> Vec<Vec<usize>> {
    let sizes: Vec<usize> = g.actions.iter().map(Vec::len).collect();
    let mut profiles: Vec<Vec<usize>> = vec![vec![]];
    for &n in &sizes {
        profiles = profiles.into_iter().flat_map(|p| (0..n).map(move |a| [p.clone(), vec![a]].concat())).collect();
    }
    let table: HashMap<Vec<usize>, Vec<BigRational>> = profiles.iter().map(|p| (p.clone(), g.payoff_row(p))).collect();
    profiles
        .into_iter()
        .filter(|p| {
            (0..sizes.len()).all(|i| {
                let mine = &table[p][i];
                (0..sizes[i]).all(|b| {
                    let mut q = p.clone();
                    q[i] = b;
                    &table[&q][i] <= mine
                })
            })
        })
        .collect()
}

trait PayoffRow {
    fn payoff_row(&self, p: &[usize]) -> Vec<BigRational>;
}

impl PayoffRow for NormalFormGame {
    fn payoff_row(&self, p: &[usize]) -> Vec<BigRational> {
        (0..self.players.len()).map(|i| self.payoff(p, i).clone()).collect()
    }
}

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

// ---------------------------------------------------------------------- iou

pub fn iou_oracle(a: &BTreeSet<Triple>, b: &BTreeSet<Triple>) -> Option<BigRational> {
    let sa: HashSet<String> = a.iter().map(|t| t.to_string()).collect();
    let sb: HashSet<String> = b.iter().map(|t| t.to_string()).collect();
    let inter = sa.intersection(&sb).count();
    let union = sa.union(&sb).count();
    (union > 0).then(|| BigRational::new(BigInt::from(inter), BigInt::from(union)))
}

// --------------------------------------------------------------- audit

/// Recomputes every entry hash from scratch over the documented layout.
pub fn rehash_chain(log: &AuditLog) -> Vec<[u8; 32]> {
    let mut prev = [0u8; 32];
    let mut out = Vec::new();
    for (seq, e) in log.entries().iter().enumerate() {
        let mut h = Sha256::new();
        h.update((seq as u64).to_be_bytes());
        h.update(e.time.to_be_bytes());
        h.update((e.agent.as_str().len() as u32).to_be_bytes());
        h.update(e.agent.as_str().as_bytes());
        h.update((e.kind.id().len() as u32).to_be_bytes());
        h.update(e.kind.id().as_bytes());
        h.update(Sha256::digest(&e.payload));
        h.update(prev);
        prev = h.finalize().into();
        out.push(prev);
    }
    out
}

// ---------------------------------------------------------- governance

/// Transition table read straight off the triples, keyed by local names.
pub fn oracle_delta(g: &Graph) -> BTreeMap<(String, String), String> {
    let local = |t: &Term| t.display_name();
    type Slots = (Option<String>, Option<String>, Option<String>);
    let mut parts: BTreeMap<Term, Slots> = BTreeMap::new();
    for t in g.iter() {
        let slot = parts.entry(t.subject().clone()).or_default();
        match t.predicate().as_str() {
            p if p == inst("fromState") => slot.0 = Some(local(t.object())),
            p if p == inst("onSignal") => slot.1 = Some(local(t.object())),
            p if p == inst("toState") => slot.2 = Some(local(t.object())),
            _ => {}
        }
    }
    parts.into_values().filter_map(|(f, s, t)| Some(((f?, s?), t?))).collect()
}

pub fn oracle_fold(delta: &BTreeMap<(String, String), String>, initial: &str, signals: &[String]) -> String {
    let mut q = initial.to_string();
    for s in signals {
        if let Some(next) = delta.get(&(q.clone(), s.clone())) {
            q = next.clone();
        }
    }
    q
}

/// Runs the factual and counterfactual explainers on every violation of a case.
pub fn explain_case(
    c: &CfCase,
) -> Vec<(instgov::explain::FactualExplanation, instgov::explain::CounterfactualExplanation)> {
    let shapes = compile_specs(std::slice::from_ref(&c.spec));
    let report = instgov::shacl::validate(&c.graph, &shapes).unwrap();
    let facts = instgov::explain::explain_factual(&report, &c.graph, &ex("Agent"), 1).unwrap();
    facts
        .into_iter()
        .map(|f| {
            let cf = instgov::explain::explain_counterfactual(&c.graph, &shapes, &f, c.budget).unwrap();
            (f, cf)
        })
        .collect()
}

pub const GAME_FIXTURES: [&str; 4] = ["pd.game", "chicken.game", "commons.game", "market.game"];

pub fn fixture_game(name: &str) -> NormalFormGame {
    instgov::game::parse_game(&fixture_text(name)).unwrap().game
}

/// At `sigma* + 1` on every singly-compliant player the compliant action is
/// strictly dominant and some all-compliant profile is a pure equilibrium;
/// at `sigma* - 1`, where non-negative, it is not dominant.
pub fn check_sanction_threshold(g: &NormalFormGame) -> Result<(), String> {
    use instgov::game::{min_dominating_sanction, pure_nash, transform, SanctionProfile};
    let one = int(1);
    let single: Vec<usize> = (0..g.players.len()).filter(|&i| g.compliant[i].iter().filter(|&&c| c).count() == 1).collect();
    let mut above = SanctionProfile::zero(g);
    for &i in &single {
        let star = min_dominating_sanction(g, i).map_err(|e| e.to_string())?;
        above.add_uniform(g, i, &(&star + &one));
        let c = g.compliant[i].iter().position(|&c| c).unwrap();
        let below = &star - &one;
        if below >= int(0) {
            let g2 = transform(g, &SanctionProfile::uniform(g, i, &below)).map_err(|e| e.to_string())?;
            if g2.strictly_dominant(i) == Some(c) {
                return Err(format!("{} dominant at sigma*-1 = {below}", g.players[i]));
            }
        }
    }
    let g2 = transform(g, &above).map_err(|e| e.to_string())?;
    for &i in &single {
        let c = g.compliant[i].iter().position(|&c| c).unwrap();
        if g2.strictly_dominant(i) != Some(c) {
            return Err(format!("{} not dominant at sigma*+1", g.players[i]));
        }
    }
    let eq = pure_nash(&g2);
    if !eq.pure_nash.iter().any(|p| p.iter().enumerate().all(|(i, &a)| g.compliant[i][a])) {
        return Err("no all-compliant equilibrium at sigma*+1".into());
    }
    Ok(())
}

/// Flips bit `bit` of the serialized log and returns (mutated entry, first
/// broken entry reported by verification).
pub fn flip_and_verify(bytes: &[u8], offsets: &[usize], bit: usize) -> (u64, Option<u64>) {
    let mut b = bytes.to_vec();
    b[bit / 8] ^= 1 << (bit % 8);
    let byte = bit / 8;
    let mutated = offsets.iter().rposition(|&o| o <= byte).unwrap_or(0) as u64;
    (mutated, instgov::audit::verify_bytes(&b).first_broken)
}

/// A scenario text over the labour manifest and the escalation table, with
/// `agents` agents each deciding on a random contract at random ticks.
pub fn random_scenario(rng: &mut impl Rng, agents: usize, ticks: u64) -> String {
    let mut s = format!("manifest = \"labour.adico\"\ngovernance = \"escalation.ttl\"\nticks = {ticks}\nseed = {}\n\n[sanctions]\n\"ex:LegalConstraint-12\" = \"{}/2\"\n", rng.gen::<u32>(), rng.gen_range(1..9));
    for a in 0..agents {
        s += &format!("\n[[agents]]\nid = \"ex:Agent{a}\"\ncontroller = \"ex:Org{}\"\nname = \"Agent {a}\"\n", a % 2);
        for t in 1..=ticks {
            if rng.gen_bool(0.7) {
                let ty = if rng.gen_bool(0.5) { "FullTime" } else { "PartTime" };
                let age = rng.gen_range(14..40);
                s += &format!(
                    "\n[[agents.decisions]]\ntick = {t}\nrelation = \"ex:concludes\"\nobject = \"ex:C-{a}-{t}\"\ncontext = \"\"\"\nex:C-{a}-{t} a ex:EmploymentContract ; ex:employee ex:P-{a}-{t} ; ex:employmentType ex:{ty} .\nex:P-{a}-{t} ex:age {age} .\n\"\"\"\n"
                );
            }
        }
    }
    s
}

pub fn load_scenario(text: &str) -> instgov::sim::Scenario {
    instgov::sim::Scenario::from_toml(text, &fixtures()).unwrap()
}

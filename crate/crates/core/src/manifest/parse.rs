use std::collections::{BTreeMap, BTreeSet};

use super::{AdicoStatement, Deontic, Manifest, ManifestError};
use crate::rdf::{parse_term, parse_terms, CmpOp, Filter, Graph, Iri, PatternTerm, Term, TriplePattern};
use crate::shacl::NormFamily;

#[derive(Default)]
struct Draft {
    id: Option<Iri>,
    family: Option<NormFamily>,
    attribute: Option<Iri>,
    deontic: Option<Deontic>,
    aim: Option<TriplePattern>,
    conditions: Vec<TriplePattern>,
    or_else: Vec<Iri>,
    remedy: Vec<Term>,
    message: Option<String>,
}

struct Reader {
    prefixes: BTreeMap<String, String>,
    line: usize,
}

impl Reader {
    fn syntax(&self, message: impl Into<String>) -> ManifestError {
        ManifestError::Syntax { line: self.line, message: message.into() }
    }

    fn term(&self, text: &str) -> Result<Term, ManifestError> {
        parse_term(text, &self.prefixes).map_err(|source| ManifestError::Rdf { line: self.line, source })
    }

    fn iri(&self, text: &str) -> Result<Iri, ManifestError> {
        match self.term(text)? {
            Term::Iri(i) => Ok(i),
            other => Err(self.syntax(format!("expected an IRI, found {other}"))),
        }
    }

    fn terms(&self, text: &str, vars: bool) -> Result<Vec<PatternTerm>, ManifestError> {
        parse_terms(text, &self.prefixes, vars).map_err(|source| ManifestError::Rdf { line: self.line, source })
    }

    /// `s p o [filter ?v op value]`
    fn pattern(&self, text: &str) -> Result<TriplePattern, ManifestError> {
        let (triple, filter) = match split_word(text, "filter") {
            Some((a, b)) => (a, Some(b)),
            None => (text, None),
        };
        let parts = self.terms(triple, true)?;
        let [s, p, o]: [PatternTerm; 3] =
            parts.try_into().map_err(|v: Vec<_>| self.syntax(format!("pattern needs 3 terms, found {}", v.len())))?;
        if let PatternTerm::Const(Term::Literal(l)) = &s {
            return Err(self.syntax(format!("literal subject \"{}\" in pattern", l.lexical())));
        }
        if matches!(&p, PatternTerm::Const(t) if !t.is_iri()) {
            return Err(self.syntax("pattern predicate must be an IRI or variable"));
        }
        let mut pat = TriplePattern::new(s, p, o);
        if let Some(f) = filter {
            let mut words = f.trim().splitn(3, char::is_whitespace);
            let var = words.next().and_then(|v| v.strip_prefix('?')).ok_or_else(|| self.syntax("filter needs a ?variable"))?;
            let op = words.next().and_then(CmpOp::parse).ok_or_else(|| self.syntax("filter needs a comparison operator"))?;
            let value = self.term(words.next().ok_or_else(|| self.syntax("filter needs a value"))?.trim())?;
            pat = pat.with_filter(Filter::new(var, op, value));
        }
        Ok(pat)
    }
}

/// Splits at the first whitespace-delimited occurrence of `word` outside a
/// quoted string.
fn split_word<'a>(text: &'a str, word: &str) -> Option<(&'a str, &'a str)> {
    let mut in_str = false;
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' if in_str => i += 1,
            b'"' => in_str = !in_str,
            _ if !in_str
                && text[i..].starts_with(word)
                && (i == 0 || bytes[i - 1].is_ascii_whitespace())
                && text[i + word.len()..].starts_with(char::is_whitespace) =>
            {
                return Some((&text[..i], &text[i + word.len()..]));
            }
            _ => {}
        }
        i += 1;
    }
    None
}

fn finish(d: Draft) -> Result<AdicoStatement, ManifestError> {
    let id = d.id.expect("draft always has an id");
    let missing = |field| ManifestError::MissingField { statement: id.clone(), field };
    if d.or_else.len() > 1 {
        return Err(ManifestError::OrElse { statement: id.clone(), detail: "more than one or-else signal".into() });
    }
    let stmt = AdicoStatement {
        family: d.family.ok_or_else(|| missing("family"))?,
        attribute: d.attribute.ok_or_else(|| missing("attribute"))?,
        deontic: d.deontic.ok_or_else(|| missing("deontic"))?,
        aim: d.aim.ok_or_else(|| missing("aim"))?,
        conditions: d.conditions,
        or_else: d.or_else.into_iter().next(),
        remedy: d.remedy,
        message: d.message.unwrap_or_default(),
        id,
    };
    check_filters(&stmt)?;
    Ok(stmt)
}

fn check_filters(s: &AdicoStatement) -> Result<(), ManifestError> {
    let mut vars: BTreeSet<&str> = s.aim.variables();
    for c in &s.conditions {
        vars.extend(c.variables());
    }
    for p in std::iter::once(&s.aim).chain(&s.conditions) {
        if let Some(f) = &p.filter {
            if !vars.contains(f.var.as_str()) {
                return Err(ManifestError::Uncompilable {
                    statement: s.id.clone(),
                    reason: format!("filter on ?{} which no pattern binds", f.var),
                });
            }
        }
    }
    Ok(())
}

/// Reads the line-oriented manifest format described at the module level.
pub fn parse_manifest(text: &str) -> Result<Manifest, ManifestError> {
    let mut r = Reader { prefixes: Graph::new().prefixes().clone(), line: 0 };
    let mut version = None;
    let mut signals = BTreeSet::new();
    let mut statements = Vec::new();
    let mut current: Option<Draft> = None;

    for (idx, raw) in text.lines().enumerate() {
        r.line = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, rest) = match line.split_once(char::is_whitespace) {
            Some((k, v)) => (k, v.trim()),
            None => (line, ""),
        };

        if let Some(d) = current.as_mut() {
            match key {
                "end" => {
                    statements.push(finish(current.take().expect("inside a block"))?);
                }
                "family" => {
                    d.family = Some(NormFamily::from_keyword(rest).ok_or_else(|| r.syntax(format!("unknown family `{rest}`")))?)
                }
                "attribute" => d.attribute = Some(r.iri(rest)?),
                "deontic" => {
                    d.deontic = Some(
                        Deontic::from_keyword(rest)
                            .ok_or_else(|| ManifestError::UnknownDeontic { line: r.line, value: rest.to_string() })?,
                    )
                }
                "aim" => {
                    if d.aim.is_some() {
                        return Err(r.syntax("statement has more than one aim"));
                    }
                    d.aim = Some(r.pattern(rest)?);
                }
                "condition" => d.conditions.push(r.pattern(rest)?),
                "or-else" => d.or_else.push(r.iri(rest)?),
                "remedy" => {
                    for t in r.terms(rest, false)? {
                        d.remedy.push(t.as_const().cloned().expect("variables disabled"));
                    }
                }
                "message" => match r.term(rest)? {
                    Term::Literal(l) => d.message = Some(l.lexical().to_string()),
                    _ => return Err(r.syntax("message must be a string")),
                },
                "statement" => return Err(r.syntax("missing `end` before next statement")),
                other => return Err(r.syntax(format!("unknown statement field `{other}`"))),
            }
            continue;
        }

        match key {
            "version" => {
                if version.is_some() {
                    return Err(r.syntax("duplicate version header"));
                }
                version = Some(rest.parse::<u64>().map_err(|_| r.syntax(format!("bad version `{rest}`")))?);
            }
            "prefix" => {
                let (name, iri) = rest.split_once(char::is_whitespace).ok_or_else(|| r.syntax("prefix needs a name and an IRI"))?;
                let name = name.strip_suffix(':').ok_or_else(|| r.syntax("prefix name must end with `:`"))?;
                let iri = iri.trim();
                let iri = iri
                    .strip_prefix('<')
                    .and_then(|i| i.strip_suffix('>'))
                    .ok_or_else(|| r.syntax("prefix IRI must be in angle brackets"))?;
                r.prefixes.insert(name.to_string(), iri.to_string());
            }
            "signal" => {
                for t in r.terms(rest, false)? {
                    match t {
                        PatternTerm::Const(Term::Iri(i)) => {
                            signals.insert(i);
                        }
                        other => return Err(r.syntax(format!("signal must be an IRI, found {other}"))),
                    }
                }
            }
            "statement" => {
                if version.is_none() {
                    return Err(ManifestError::MissingVersion);
                }
                current = Some(Draft { id: Some(r.iri(rest)?), ..Draft::default() });
            }
            other => return Err(r.syntax(format!("unknown directive `{other}`"))),
        }
    }
    if current.is_some() {
        return Err(r.syntax("unterminated statement block"));
    }
    let version = version.ok_or(ManifestError::MissingVersion)?;
    let mut m = Manifest::new(version, signals, statements)?;
    m.prefixes = r.prefixes;
    Ok(m)
}

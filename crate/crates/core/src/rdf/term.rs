//! Canonical RDF terms.
//!
//! Every string that enters a term is NFC-normalized, and literals of the
//! numeric and boolean datatypes are rewritten to their canonical lexical
//! form on construction. Derived equality and ordering therefore compare
//! numeric literals by value within one datatype (`"016"^^xsd:integer` equals
//! `16`) but never across datatypes.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Serialize, Serializer};
use unicode_normalization::UnicodeNormalization;

use super::vocab::{RDF_LANG_STRING, XSD_BOOLEAN, XSD_DECIMAL, XSD_INTEGER, XSD_STRING};
use super::RdfError;

fn nfc(s: &str) -> String {
    s.nfc().collect()
}

/// An absolute IRI.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Iri(String);

impl Iri {
    pub fn new(value: impl AsRef<str>) -> Self {
        Iri(nfc(value.as_ref()))
    }

    /// Like [`Iri::new`] but rejects strings without a scheme or with
    /// characters that cannot appear inside `<...>`.
    pub fn parse(value: &str) -> Result<Self, RdfError> {
        if is_absolute_iri(value) {
            Ok(Iri::new(value))
        } else {
            Err(RdfError::MalformedIri(value.to_string()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The fragment after the last `#`, `/` or `:`.
    pub fn local_name(&self) -> &str {
        let s = self.0.as_str();
        match s.rfind(['#', '/', ':']) {
            Some(i) if i + 1 < s.len() => &s[i + 1..],
            _ => s,
        }
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Iri {
    fn from(s: &str) -> Self {
        Iri::new(s)
    }
}

impl From<String> for Iri {
    fn from(s: String) -> Self {
        Iri::new(s)
    }
}

pub(crate) fn is_absolute_iri(s: &str) -> bool {
    let Some(colon) = s.find(':') else {
        return false;
    };
    let scheme = &s[..colon];
    let mut chars = scheme.chars();
    let scheme_ok = matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'));
    scheme_ok
        && !s.chars().any(|c| {
            c.is_whitespace() || c.is_control() || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\')
        })
}

/// Literal payload. `datatype` is always present; simple literals carry
/// `xsd:string`, language-tagged ones `rdf:langString`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    lexical: String,
    datatype: Iri,
    language: Option<String>,
}

impl Literal {
    pub fn string(value: impl AsRef<str>) -> Self {
        Literal { lexical: nfc(value.as_ref()), datatype: Iri::new(XSD_STRING), language: None }
    }

    pub fn lang(value: impl AsRef<str>, tag: &str) -> Self {
        Literal {
            lexical: nfc(value.as_ref()),
            datatype: Iri::new(RDF_LANG_STRING),
            language: Some(tag.to_ascii_lowercase()),
        }
    }

    pub fn integer(value: impl Into<BigInt>) -> Self {
        Literal { lexical: value.into().to_string(), datatype: Iri::new(XSD_INTEGER), language: None }
    }

    pub fn boolean(value: bool) -> Self {
        Literal { lexical: value.to_string(), datatype: Iri::new(XSD_BOOLEAN), language: None }
    }

    /// Builds a typed literal, canonicalizing integer, decimal and boolean
    /// lexical forms and rejecting malformed ones.
    pub fn typed(lexical: &str, datatype: Iri) -> Result<Self, RdfError> {
        let lexical = nfc(lexical);
        let canonical = match datatype.as_str() {
            XSD_INTEGER => canonical_integer(&lexical),
            XSD_DECIMAL => canonical_decimal(&lexical),
            XSD_BOOLEAN => match lexical.as_str() {
                "true" | "1" => Some("true".to_string()),
                "false" | "0" => Some("false".to_string()),
                _ => None,
            },
            RDF_LANG_STRING => None,
            _ => Some(lexical.clone()),
        };
        match canonical {
            Some(lexical) => Ok(Literal { lexical, datatype, language: None }),
            None => Err(RdfError::MalformedLiteral(format!("\"{lexical}\"^^<{datatype}>"))),
        }
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn datatype(&self) -> &Iri {
        &self.datatype
    }

    pub fn language(&self) -> Option<&str> {
        self.language.as_deref()
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self.datatype.as_str(), XSD_INTEGER | XSD_DECIMAL)
    }

    /// Exact value of an integer or decimal literal.
    pub fn numeric_value(&self) -> Option<BigRational> {
        match self.datatype.as_str() {
            XSD_INTEGER => self.lexical.parse::<BigInt>().ok().map(BigRational::from_integer),
            XSD_DECIMAL => parse_decimal(&self.lexical),
            _ => None,
        }
    }
}

fn canonical_integer(s: &str) -> Option<String> {
    let digits = s.strip_prefix(['+', '-']).unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.trim_start_matches('+').parse::<BigInt>().ok().map(|v| v.to_string())
}

fn canonical_decimal(s: &str) -> Option<String> {
    let (negative, body) = match s.as_bytes().first() {
        Some(b'-') => (true, &s[1..]),
        Some(b'+') => (false, &s[1..]),
        _ => (false, s),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.bytes().all(|b| b.is_ascii_digit()) || !frac.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let int = int.trim_start_matches('0');
    let frac = frac.trim_end_matches('0');
    let int = if int.is_empty() { "0" } else { int };
    let frac = if frac.is_empty() { "0" } else { frac };
    let zero = int == "0" && frac == "0";
    let sign = if negative && !zero { "-" } else { "" };
    Some(format!("{sign}{int}.{frac}"))
}

fn parse_decimal(s: &str) -> Option<BigRational> {
    let (negative, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    let digits: BigInt = format!("{int}{frac}").parse().ok()?;
    let scale = BigInt::from(10u32).pow(frac.len() as u32);
    let v = BigRational::new(digits, scale);
    Some(if negative { -v } else { v })
}

/// Blank-node label, compared by label within a store.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BlankNode(String);

impl BlankNode {
    pub fn new(label: impl AsRef<str>) -> Self {
        BlankNode(nfc(label.as_ref()))
    }

    pub fn label(&self) -> &str {
        &self.0
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Iri(Iri),
    Blank(BlankNode),
    Literal(Literal),
}

impl Term {
    pub fn iri(value: impl AsRef<str>) -> Self {
        Term::Iri(Iri::new(value))
    }

    pub fn blank(label: impl AsRef<str>) -> Self {
        Term::Blank(BlankNode::new(label))
    }

    pub fn string(value: impl AsRef<str>) -> Self {
        Term::Literal(Literal::string(value))
    }

    pub fn integer(value: impl Into<BigInt>) -> Self {
        Term::Literal(Literal::integer(value))
    }

    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            Term::Iri(iri) => Some(iri),
            _ => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Term::Literal(l) => Some(l),
            _ => None,
        }
    }

    pub fn is_iri(&self) -> bool {
        matches!(self, Term::Iri(_))
    }

    pub fn is_blank(&self) -> bool {
        matches!(self, Term::Blank(_))
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, Term::Literal(_))
    }

    pub fn numeric_value(&self) -> Option<BigRational> {
        self.as_literal().and_then(Literal::numeric_value)
    }

    /// Short human-readable form: IRI local names, bare literal text.
    pub fn display_name(&self) -> String {
        match self {
            Term::Iri(iri) => iri.local_name().to_string(),
            Term::Blank(b) => format!("_:{}", b.label()),
            Term::Literal(l) => l.lexical().to_string(),
        }
    }

    /// Minimal term under the derived ordering; used for range scans.
    pub(crate) fn min_value() -> Term {
        Term::Iri(Iri(String::new()))
    }
}

impl From<Iri> for Term {
    fn from(iri: Iri) -> Self {
        Term::Iri(iri)
    }
}

impl From<Literal> for Term {
    fn from(l: Literal) -> Self {
        Term::Literal(l)
    }
}

pub(crate) fn escape_string(s: &str, out: &mut String) {
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if c.is_control() => out.push_str(&format!("\\u{:04X}", c as u32)),
            c => out.push(c),
        }
    }
}

/// N-Triples rendering.
impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(iri) => write!(f, "<{iri}>"),
            Term::Blank(b) => write!(f, "_:{}", b.label()),
            Term::Literal(l) => {
                let mut s = String::from("\"");
                escape_string(l.lexical(), &mut s);
                s.push('"');
                if let Some(lang) = l.language() {
                    s.push('@');
                    s.push_str(lang);
                } else if l.datatype().as_str() != XSD_STRING {
                    s.push_str(&format!("^^<{}>", l.datatype()));
                }
                f.write_str(&s)
            }
        }
    }
}

impl Serialize for Term {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl Serialize for Iri {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

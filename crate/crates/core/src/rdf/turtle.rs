//! Turtle subset: `@prefix`/`PREFIX`, `<iri>`, prefixed names, `a`, `;` and
//! `,` continuation, string/integer/decimal/boolean literals, `^^` datatypes,
//! `@lang` tags, `#` comments, `_:label` blank nodes and `( ... )`
//! collections. Anonymous `[ ... ]` property lists and `@base` are rejected.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::graph::{Graph, Triple};
use super::pattern::PatternTerm;
use super::term::{escape_string, Iri, Literal, Term};
use super::vocab::{rdf, RDF, XSD_DECIMAL, XSD_INTEGER, XSD_STRING};
use super::RdfError;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    IriRef(String),
    PName(String, String),
    Blank(String),
    Var(String),
    Str(String),
    Integer(String),
    Decimal(String),
    LangTag(String),
    AtPrefix,
    SparqlPrefix,
    A,
    True,
    False,
    Dot,
    Semicolon,
    Comma,
    LParen,
    RParen,
    Caret2,
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

struct Lexer<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
    _src: &'a str,
}

fn is_pn_chars(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '-' || c == '\u{b7}'
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { chars: src.chars().collect(), pos: 0, line: 1, col: 1, _src: src }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, off: usize) -> Option<char> {
        self.chars.get(self.pos + off).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.pos).copied()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn err(&self, line: usize, col: usize, message: impl Into<String>) -> RdfError {
        RdfError::Syntax { line, col, message: message.into() }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == '#' {
                while let Some(c) = self.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
            } else {
                break;
            }
        }
    }

    fn tokens(mut self) -> Result<Vec<Spanned>, RdfError> {
        let mut out = Vec::new();
        loop {
            self.skip_ws();
            let (line, col) = (self.line, self.col);
            let Some(c) = self.peek() else { break };
            let tok = match c {
                '<' => self.iri_ref()?,
                '"' | '\'' => self.string(c)?,
                '_' if self.peek_at(1) == Some(':') => {
                    self.bump();
                    self.bump();
                    let label = self.name_chars();
                    if label.is_empty() {
                        return Err(self.err(line, col, "empty blank node label"));
                    }
                    Tok::Blank(label)
                }
                '?' => {
                    self.bump();
                    let name = self.name_chars();
                    if name.is_empty() {
                        return Err(self.err(line, col, "empty variable name"));
                    }
                    Tok::Var(name)
                }
                '@' => {
                    self.bump();
                    let mut word = String::new();
                    while let Some(c) = self.peek() {
                        if c.is_ascii_alphanumeric() || c == '-' {
                            word.push(c);
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    match word.as_str() {
                        "prefix" => Tok::AtPrefix,
                        "base" => return Err(self.err(line, col, "@base is not supported")),
                        "" => return Err(self.err(line, col, "empty language tag")),
                        _ => Tok::LangTag(word),
                    }
                }
                '.' if !matches!(self.peek_at(1), Some(d) if d.is_ascii_digit()) => {
                    self.bump();
                    Tok::Dot
                }
                ';' => {
                    self.bump();
                    Tok::Semicolon
                }
                ',' => {
                    self.bump();
                    Tok::Comma
                }
                '(' => {
                    self.bump();
                    Tok::LParen
                }
                ')' => {
                    self.bump();
                    Tok::RParen
                }
                '[' | ']' => return Err(self.err(line, col, "anonymous blank nodes `[ ... ]` are not supported")),
                '^' => {
                    self.bump();
                    if self.bump() != Some('^') {
                        return Err(self.err(line, col, "expected `^^`"));
                    }
                    Tok::Caret2
                }
                c if c.is_ascii_digit() || c == '+' || c == '-' || c == '.' => self.number(line, col)?,
                c if c.is_alphabetic() || c == ':' => self.name(line, col)?,
                other => return Err(self.err(line, col, format!("unexpected character `{other}`"))),
            };
            out.push(Spanned { tok, line, col });
        }
        Ok(out)
    }

    fn name_chars(&mut self) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if is_pn_chars(c) || c == '.' {
                // A trailing dot terminates the statement rather than the name.
                if c == '.' && !matches!(self.peek_at(1), Some(n) if is_pn_chars(n) || n == '.') {
                    break;
                }
                s.push(c);
                self.bump();
            } else {
                break;
            }
        }
        s
    }

    fn name(&mut self, line: usize, col: usize) -> Result<Tok, RdfError> {
        let prefix = if self.peek() == Some(':') { String::new() } else { self.name_chars() };
        if self.peek() == Some(':') {
            self.bump();
            let local = self.name_chars();
            return Ok(Tok::PName(prefix, local));
        }
        match prefix.as_str() {
            "a" => Ok(Tok::A),
            "true" => Ok(Tok::True),
            "false" => Ok(Tok::False),
            w if w.eq_ignore_ascii_case("prefix") => Ok(Tok::SparqlPrefix),
            w if w.eq_ignore_ascii_case("base") => Err(self.err(line, col, "BASE is not supported")),
            w => Err(self.err(line, col, format!("unexpected bare word `{w}`"))),
        }
    }

    fn iri_ref(&mut self) -> Result<Tok, RdfError> {
        let (line, col) = (self.line, self.col);
        self.bump();
        let mut s = String::new();
        loop {
            match self.bump() {
                Some('>') => break,
                Some('\\') => s.push(self.unicode_escape(line, col)?),
                Some('\n') => return Err(self.err(line, col, "unterminated IRI")),
                Some(c) => s.push(c),
                None => return Err(self.err(line, col, "unterminated IRI")),
            }
        }
        Ok(Tok::IriRef(s))
    }

    fn unicode_escape(&mut self, line: usize, col: usize) -> Result<char, RdfError> {
        let width = match self.bump() {
            Some('u') => 4,
            Some('U') => 8,
            _ => return Err(self.err(line, col, "invalid escape in IRI")),
        };
        self.hex_char(width, line, col)
    }

    fn hex_char(&mut self, width: usize, line: usize, col: usize) -> Result<char, RdfError> {
        let mut hex = String::new();
        for _ in 0..width {
            match self.bump() {
                Some(c) if c.is_ascii_hexdigit() => hex.push(c),
                _ => return Err(self.err(line, col, "invalid unicode escape")),
            }
        }
        u32::from_str_radix(&hex, 16)
            .ok()
            .and_then(char::from_u32)
            .ok_or_else(|| self.err(line, col, "invalid unicode code point"))
    }

    fn string(&mut self, quote: char) -> Result<Tok, RdfError> {
        let (line, col) = (self.line, self.col);
        let long = self.peek_at(1) == Some(quote) && self.peek_at(2) == Some(quote);
        let open = if long { 3 } else { 1 };
        for _ in 0..open {
            self.bump();
        }
        if !long && self.peek() == Some(quote) {
            self.bump();
            return Ok(Tok::Str(String::new()));
        }
        let mut s = String::new();
        loop {
            let Some(c) = self.bump() else {
                return Err(self.err(line, col, "unterminated string literal"));
            };
            match c {
                c if c == quote => {
                    if !long {
                        break;
                    }
                    if self.peek() == Some(quote) && self.peek_at(1) == Some(quote) {
                        self.bump();
                        self.bump();
                        break;
                    }
                    s.push(c);
                }
                '\\' => {
                    let e = self.bump();
                    s.push(match e {
                        Some('t') => '\t',
                        Some('b') => '\u{8}',
                        Some('n') => '\n',
                        Some('r') => '\r',
                        Some('f') => '\u{c}',
                        Some('"') => '"',
                        Some('\'') => '\'',
                        Some('\\') => '\\',
                        Some('u') => self.hex_char(4, line, col)?,
                        Some('U') => self.hex_char(8, line, col)?,
                        _ => return Err(self.err(line, col, "invalid string escape")),
                    });
                }
                '\n' if !long => return Err(self.err(line, col, "newline in short string literal")),
                c => s.push(c),
            }
        }
        Ok(Tok::Str(s))
    }

    fn number(&mut self, line: usize, col: usize) -> Result<Tok, RdfError> {
        let mut s = String::new();
        if let Some(c @ ('+' | '-')) = self.peek() {
            s.push(c);
            self.bump();
        }
        while let Some(c) = self.peek().filter(char::is_ascii_digit) {
            s.push(c);
            self.bump();
        }
        let mut decimal = false;
        if self.peek() == Some('.') && matches!(self.peek_at(1), Some(d) if d.is_ascii_digit()) {
            decimal = true;
            s.push('.');
            self.bump();
            while let Some(c) = self.peek().filter(char::is_ascii_digit) {
                s.push(c);
                self.bump();
            }
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            return Err(self.err(line, col, "double literals are not supported"));
        }
        if !s.bytes().any(|b| b.is_ascii_digit()) {
            return Err(self.err(line, col, format!("malformed number `{s}`")));
        }
        Ok(if decimal { Tok::Decimal(s) } else { Tok::Integer(s) })
    }
}

const COLLECTION_MARK: char = '\u{1}';

struct Parser<'p> {
    toks: Vec<Spanned>,
    pos: usize,
    prefixes: &'p mut BTreeMap<String, String>,
    triples: Vec<Triple>,
    user_labels: BTreeSet<String>,
    fresh: usize,
    allow_vars: bool,
}

impl<'p> Parser<'p> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn here(&self) -> (usize, usize) {
        match self.toks.get(self.pos).or(self.toks.last()) {
            Some(s) => (s.line, s.col),
            None => (1, 1),
        }
    }

    fn err(&self, message: impl Into<String>) -> RdfError {
        let (line, col) = self.here();
        RdfError::Syntax { line, col, message: message.into() }
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|s| s.tok.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), RdfError> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected {what}")))
        }
    }

    fn document(&mut self) -> Result<(), RdfError> {
        while let Some(tok) = self.peek() {
            match tok {
                Tok::AtPrefix => {
                    self.pos += 1;
                    self.prefix_decl()?;
                    self.expect(Tok::Dot, "`.` after @prefix")?;
                }
                Tok::SparqlPrefix => {
                    self.pos += 1;
                    self.prefix_decl()?;
                }
                _ => {
                    self.triples_stmt()?;
                    self.expect(Tok::Dot, "`.` at end of statement")?;
                }
            }
        }
        Ok(())
    }

    fn prefix_decl(&mut self) -> Result<(), RdfError> {
        let name = match self.next() {
            Some(Tok::PName(p, l)) if l.is_empty() => p,
            _ => {
                self.pos -= 1;
                return Err(self.err("expected prefix name ending in `:`"));
            }
        };
        let iri = match self.next() {
            Some(Tok::IriRef(i)) => i,
            _ => {
                self.pos -= 1;
                return Err(self.err("expected <iri> in prefix declaration"));
            }
        };
        let iri = Iri::parse(&iri)?;
        self.prefixes.insert(name, iri.as_str().to_string());
        Ok(())
    }

    fn triples_stmt(&mut self) -> Result<(), RdfError> {
        let subject = self.term_position(false)?;
        if subject.is_literal() {
            return Err(self.err("literal in subject position"));
        }
        loop {
            let predicate = self.verb()?;
            loop {
                let object = self.term_position(true)?;
                self.triples.push(Triple::new(subject.clone(), predicate.clone(), object)?);
                if self.peek() == Some(&Tok::Comma) {
                    self.pos += 1;
                } else {
                    break;
                }
            }
            if self.peek() == Some(&Tok::Semicolon) {
                while self.peek() == Some(&Tok::Semicolon) {
                    self.pos += 1;
                }
                if matches!(self.peek(), Some(Tok::Dot) | None) {
                    break;
                }
            } else {
                break;
            }
        }
        Ok(())
    }

    fn verb(&mut self) -> Result<Iri, RdfError> {
        match self.peek() {
            Some(Tok::A) => {
                self.pos += 1;
                Ok(Iri::new(rdf("type")))
            }
            Some(Tok::IriRef(_)) | Some(Tok::PName(..)) => match self.term_position(false)? {
                Term::Iri(i) => Ok(i),
                _ => unreachable!(),
            },
            _ => Err(self.err("expected predicate IRI")),
        }
    }

    fn resolve(&self, prefix: &str, local: &str) -> Result<Iri, RdfError> {
        match self.prefixes.get(prefix) {
            Some(base) => Ok(Iri::new(format!("{base}{local}"))),
            None => {
                let (line, col) = self.here();
                Err(RdfError::UnknownPrefix { prefix: prefix.to_string(), line, col })
            }
        }
    }

    fn iri_term(&mut self) -> Result<Iri, RdfError> {
        match self.next() {
            Some(Tok::IriRef(i)) => {
                self.pos -= 1;
                let iri = Iri::parse(&i)?;
                self.pos += 1;
                Ok(iri)
            }
            Some(Tok::PName(p, l)) => {
                self.pos -= 1;
                let iri = self.resolve(&p, &l)?;
                self.pos += 1;
                Ok(iri)
            }
            _ => {
                self.pos -= 1;
                Err(self.err("expected IRI"))
            }
        }
    }

    fn term_position(&mut self, object: bool) -> Result<Term, RdfError> {
        match self.peek().cloned() {
            Some(Tok::IriRef(_)) | Some(Tok::PName(..)) => Ok(Term::Iri(self.iri_term()?)),
            Some(Tok::Blank(label)) => {
                self.pos += 1;
                self.user_labels.insert(label.clone());
                Ok(Term::blank(label))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                self.collection()
            }
            Some(Tok::Str(_)) | Some(Tok::Integer(_)) | Some(Tok::Decimal(_)) | Some(Tok::True) | Some(Tok::False)
                if object =>
            {
                self.literal()
            }
            Some(Tok::Var(_)) => Err(self.err("variables are not allowed here")),
            _ => Err(self.err(if object { "expected object term" } else { "expected subject term" })),
        }
    }

    fn literal(&mut self) -> Result<Term, RdfError> {
        let tok = self.next();
        let lit = match tok {
            Some(Tok::Str(s)) => match self.peek().cloned() {
                Some(Tok::LangTag(tag)) => {
                    self.pos += 1;
                    Literal::lang(s, &tag)
                }
                Some(Tok::Caret2) => {
                    self.pos += 1;
                    let dt = self.iri_term()?;
                    if dt.as_str() == XSD_STRING {
                        Literal::string(s)
                    } else {
                        Literal::typed(&s, dt)?
                    }
                }
                _ => Literal::string(s),
            },
            Some(Tok::Integer(s)) => Literal::typed(&s, Iri::new(XSD_INTEGER))?,
            Some(Tok::Decimal(s)) => Literal::typed(&s, Iri::new(XSD_DECIMAL))?,
            Some(Tok::True) => Literal::boolean(true),
            Some(Tok::False) => Literal::boolean(false),
            _ => {
                self.pos -= 1;
                return Err(self.err("expected literal"));
            }
        };
        Ok(Term::Literal(lit))
    }

    fn collection(&mut self) -> Result<Term, RdfError> {
        let mut items = Vec::new();
        while self.peek() != Some(&Tok::RParen) {
            if self.peek().is_none() {
                return Err(self.err("unterminated collection"));
            }
            items.push(self.term_position(true)?);
        }
        self.pos += 1;
        if items.is_empty() {
            return Ok(Term::iri(rdf("nil")));
        }
        let nodes: Vec<Term> = (0..items.len())
            .map(|_| {
                self.fresh += 1;
                Term::blank(format!("{COLLECTION_MARK}{}", self.fresh))
            })
            .collect();
        for (i, item) in items.into_iter().enumerate() {
            self.triples.push(Triple::new(nodes[i].clone(), Iri::new(rdf("first")), item)?);
            let rest = nodes.get(i + 1).cloned().unwrap_or_else(|| Term::iri(rdf("nil")));
            self.triples.push(Triple::new(nodes[i].clone(), Iri::new(rdf("rest")), rest)?);
        }
        Ok(nodes[0].clone())
    }

    /// Gives collection nodes `genidN` labels that avoid every user label.
    fn finish(self) -> Vec<Triple> {
        if self.fresh == 0 {
            return self.triples;
        }
        let mut names: HashMap<String, String> = HashMap::new();
        let mut n = 0usize;
        let mut rename = |t: &Term| -> Term {
            match t {
                Term::Blank(b) if b.label().starts_with(COLLECTION_MARK) => {
                    let label = names
                        .entry(b.label().to_string())
                        .or_insert_with(|| loop {
                            let cand = format!("genid{n}");
                            n += 1;
                            if !self.user_labels.contains(&cand) {
                                break cand;
                            }
                        })
                        .clone();
                    Term::blank(label)
                }
                other => other.clone(),
            }
        };
        self.triples
            .iter()
            .map(|t| {
                let s = rename(t.subject());
                let o = rename(t.object());
                Triple::new(s, t.predicate().clone(), o).expect("renaming preserves well-formedness")
            })
            .collect()
    }
}

/// Parses a Turtle-subset document. Reserved prefixes are pre-bound; any
/// declared in the document are added to the returned graph's prefix map.
pub fn parse_turtle(text: &str) -> Result<Graph, RdfError> {
    let mut graph = Graph::new();
    let mut prefixes = graph.prefixes().clone();
    let triples = {
        let toks = Lexer::new(text).tokens()?;
        let mut parser = Parser {
            toks,
            pos: 0,
            prefixes: &mut prefixes,
            triples: Vec::new(),
            user_labels: BTreeSet::new(),
            fresh: 0,
            allow_vars: false,
        };
        parser.document()?;
        parser.finish()
    };
    graph.set_prefixes(prefixes);
    graph.extend(triples);
    Ok(graph)
}

/// Reads a whitespace-separated run of terms, optionally allowing `?vars`.
/// Shared by the manifest and scenario readers.
pub fn parse_terms(
    text: &str,
    prefixes: &BTreeMap<String, String>,
    allow_vars: bool,
) -> Result<Vec<PatternTerm>, RdfError> {
    let toks = Lexer::new(text).tokens()?;
    let mut scratch = prefixes.clone();
    let mut parser = Parser {
        toks,
        pos: 0,
        prefixes: &mut scratch,
        triples: Vec::new(),
        user_labels: BTreeSet::new(),
        fresh: 0,
        allow_vars,
    };
    let mut out = Vec::new();
    while let Some(tok) = parser.peek().cloned() {
        match tok {
            Tok::Var(v) if parser.allow_vars => {
                parser.pos += 1;
                out.push(PatternTerm::Var(v));
            }
            Tok::A => {
                parser.pos += 1;
                out.push(PatternTerm::Const(Term::iri(rdf("type"))));
            }
            Tok::LParen => return Err(parser.err("collections are not allowed in term lists")),
            _ => out.push(PatternTerm::Const(parser.term_position(true)?)),
        }
    }
    Ok(out)
}

/// Parses exactly one constant term.
pub fn parse_term(text: &str, prefixes: &BTreeMap<String, String>) -> Result<Term, RdfError> {
    let mut terms = parse_terms(text, prefixes, false)?;
    match (terms.pop(), terms.is_empty()) {
        (Some(PatternTerm::Const(t)), true) => Ok(t),
        _ => Err(RdfError::Syntax { line: 1, col: 1, message: format!("expected exactly one term in `{text}`") }),
    }
}

fn valid_local(local: &str) -> bool {
    let mut chars = local.chars();
    let Some(first) = chars.next() else { return false };
    (first.is_ascii_alphanumeric() || first == '_')
        && local.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
        && !local.ends_with('.')
}

fn valid_blank_label(label: &str) -> bool {
    valid_local(label)
}

struct Writer<'g> {
    // (base, name), longest base first, named prefixes before the empty one.
    bases: Vec<(&'g str, &'g str)>,
}

impl<'g> Writer<'g> {
    fn new(prefixes: &'g BTreeMap<String, String>) -> Self {
        let mut bases: Vec<(&str, &str)> = prefixes.iter().map(|(k, v)| (v.as_str(), k.as_str())).collect();
        bases.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then(a.1.is_empty().cmp(&b.1.is_empty())).then(a.1.cmp(b.1)));
        Writer { bases }
    }

    fn iri(&self, iri: &Iri, out: &mut String) {
        let s = iri.as_str();
        for (base, name) in &self.bases {
            if let Some(local) = s.strip_prefix(base) {
                if valid_local(local) {
                    out.push_str(name);
                    out.push(':');
                    out.push_str(local);
                    return;
                }
            }
        }
        out.push('<');
        for c in s.chars() {
            match c {
                '>' | '\\' | '<' | '"' | '{' | '}' | '|' | '^' | '`' => out.push_str(&format!("\\u{:04X}", c as u32)),
                c if c.is_whitespace() || c.is_control() => out.push_str(&format!("\\u{:04X}", c as u32)),
                c => out.push(c),
            }
        }
        out.push('>');
    }

    fn term(&self, term: &Term, out: &mut String) {
        match term {
            Term::Iri(iri) => self.iri(iri, out),
            Term::Blank(b) => {
                out.push_str("_:");
                if valid_blank_label(b.label()) {
                    out.push_str(b.label());
                } else {
                    out.push_str(&format!("b{}", hex::encode(b.label().as_bytes())));
                }
            }
            Term::Literal(l) => {
                out.push('"');
                escape_string(l.lexical(), out);
                out.push('"');
                if let Some(lang) = l.language() {
                    out.push('@');
                    out.push_str(lang);
                } else if l.datatype().as_str() != XSD_STRING {
                    out.push_str("^^");
                    self.iri(l.datatype(), out);
                }
            }
        }
    }
}

/// Deterministic Turtle rendering: prefix declarations sorted by name, then
/// one block per subject in canonical order with predicates grouped by `;`
/// and objects by `,`.
pub fn serialize_turtle(graph: &Graph) -> String {
    let w = Writer::new(graph.prefixes());
    let mut out = String::new();
    for (name, base) in graph.prefixes() {
        out.push_str(&format!("@prefix {name}: <{base}> .\n"));
    }
    let rdf_type = format!("{RDF}type");
    let mut current_subject: Option<&Term> = None;
    let mut current_predicate: Option<&Iri> = None;
    for t in graph.iter() {
        if current_subject != Some(t.subject()) {
            if current_subject.is_some() {
                out.push_str(" .\n");
            }
            out.push('\n');
            w.term(t.subject(), &mut out);
            out.push(' ');
            current_subject = Some(t.subject());
            current_predicate = None;
        }
        if current_predicate == Some(t.predicate()) {
            out.push_str(" , ");
        } else {
            if current_predicate.is_some() {
                out.push_str(" ;\n    ");
            }
            if t.predicate().as_str() == rdf_type {
                out.push('a');
            } else {
                w.iri(t.predicate(), &mut out);
            }
            out.push(' ');
            current_predicate = Some(t.predicate());
        }
        w.term(t.object(), &mut out);
    }
    if current_subject.is_some() {
        out.push_str(" .\n");
    }
    out
}

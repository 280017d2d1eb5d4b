//! Namespace IRIs and the handful of well-known terms the engine refers to.

pub const RDF: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
pub const RDFS: &str = "http://www.w3.org/2000/01/rdf-schema#";
pub const XSD: &str = "http://www.w3.org/2001/XMLSchema#";
pub const SH: &str = "http://www.w3.org/ns/shacl#";
pub const INST: &str = "https://w3id.org/instgov#";
pub const EX: &str = "http://example.org/";

/// Prefixes bound in every fresh graph. The empty prefix maps to `inst:`.
pub const RESERVED_PREFIXES: &[(&str, &str)] = &[
    ("", INST),
    ("ex", EX),
    ("inst", INST),
    ("rdf", RDF),
    ("rdfs", RDFS),
    ("sh", SH),
    ("xsd", XSD),
];

pub fn rdf(local: &str) -> String {
    format!("{RDF}{local}")
}

pub fn xsd(local: &str) -> String {
    format!("{XSD}{local}")
}

pub fn sh(local: &str) -> String {
    format!("{SH}{local}")
}

pub fn inst(local: &str) -> String {
    format!("{INST}{local}")
}

pub fn rdf_type() -> String {
    rdf("type")
}

pub(crate) const XSD_STRING: &str = "http://www.w3.org/2001/XMLSchema#string";
pub(crate) const XSD_INTEGER: &str = "http://www.w3.org/2001/XMLSchema#integer";
pub(crate) const XSD_DECIMAL: &str = "http://www.w3.org/2001/XMLSchema#decimal";
pub(crate) const XSD_BOOLEAN: &str = "http://www.w3.org/2001/XMLSchema#boolean";
pub(crate) const RDF_LANG_STRING: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#langString";

//! Ex-ante institutional compliance engine for multi-agent systems.
//!
//! Governance rules are written as institutional statements, compiled into
//! shapes and triple masks, and checked against each agent's RDF-modelled
//! decision before it takes effect. Violations drive a per-agent
//! institutional state machine, produce factual and minimal counterfactual
//! explanations, and land in a hash-chained audit log.

pub mod audit;
pub mod compliance;
pub mod exec;
pub mod explain;
pub mod game;
pub mod governance;
pub mod identity;
pub mod manifest;
pub mod ratio;
pub mod rdf;
pub mod shacl;
pub mod sim;

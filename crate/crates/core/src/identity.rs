//! Soulbound agent identities: each agent id is bound once to an accountable
//! controller, can be revoked, and can never be re-issued.

use std::collections::BTreeMap;

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::audit::{AuditError, AuditKind, AuditLog};
use crate::explain::AgentNames;
use crate::rdf::Iri;

#[derive(Debug, Error)]
pub enum IdentityError {
    #[error("agent {agent} is already bound to {controller}")]
    Duplicate { agent: Iri, controller: Iri },
    #[error("agent {0} was revoked and cannot be enrolled again")]
    Revoked(Iri),
    #[error("agent {0} is not enrolled")]
    Unknown(Iri),
    #[error(transparent)]
    Audit(#[from] AuditError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AgentIdentity {
    pub agent: Iri,
    pub controller: Iri,
    pub issued_at: u64,
    pub attributes: BTreeMap<String, String>,
    pub revoked: bool,
    /// Lowercase hex SHA-256 of (agent, controller, issued-at).
    pub binding_digest: String,
}

pub fn binding_digest(agent: &Iri, controller: &Iri, issued_at: u64) -> String {
    let mut h = Sha256::new();
    for s in [agent.as_str(), controller.as_str()] {
        h.update((s.len() as u32).to_be_bytes());
        h.update(s.as_bytes());
    }
    h.update(issued_at.to_be_bytes());
    hex::encode(h.finalize())
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IdentityRegistry {
    identities: BTreeMap<Iri, AgentIdentity>,
}

impl IdentityRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, agent: &Iri) -> Option<&AgentIdentity> {
        self.identities.get(agent)
    }

    pub fn iter(&self) -> impl Iterator<Item = &AgentIdentity> {
        self.identities.values()
    }

    pub fn is_active(&self, agent: &Iri) -> bool {
        self.get(agent).is_some_and(|i| !i.revoked)
    }

    pub fn enroll(&mut self, log: &mut AuditLog, agent: Iri, controller: Iri, t: u64) -> Result<&AgentIdentity, IdentityError> {
        self.enroll_with(log, agent, controller, t, BTreeMap::new())
    }

    pub fn enroll_with(
        &mut self,
        log: &mut AuditLog,
        agent: Iri,
        controller: Iri,
        t: u64,
        attributes: BTreeMap<String, String>,
    ) -> Result<&AgentIdentity, IdentityError> {
        if let Some(existing) = self.identities.get(&agent) {
            return Err(if existing.revoked {
                IdentityError::Revoked(agent)
            } else {
                IdentityError::Duplicate { agent, controller: existing.controller.clone() }
            });
        }
        let digest = binding_digest(&agent, &controller, t);
        let payload = format!("enroll agent={agent} controller={controller} issued-at={t} binding={digest}\n");
        log.append(AuditKind::Enrollment, &agent, t, payload)?;
        let id = AgentIdentity { agent: agent.clone(), controller, issued_at: t, attributes, revoked: false, binding_digest: digest };
        Ok(self.identities.entry(agent).or_insert(id))
    }

    /// Revocation is permanent; revoking twice is a no-op that logs nothing.
    pub fn revoke(&mut self, log: &mut AuditLog, agent: &Iri, t: u64, reason: &str) -> Result<(), IdentityError> {
        let id = self.identities.get_mut(agent).ok_or_else(|| IdentityError::Unknown(agent.clone()))?;
        if id.revoked {
            return Ok(());
        }
        log.append(AuditKind::Revocation, agent, t, format!("revoke agent={agent} reason={reason}\n"))?;
        id.revoked = true;
        Ok(())
    }
}

impl AgentNames for IdentityRegistry {
    fn name_of(&self, agent: &Iri) -> Option<String> {
        self.get(agent)?.attributes.get("name").cloned()
    }
}

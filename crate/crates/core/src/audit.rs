//! Append-only, SHA-256 hash-chained audit log.
//!
//! Each entry hashes, in order:
//!
//! | field          | encoding                          |
//! |----------------|-----------------------------------|
//! | seq            | u64 big-endian                    |
//! | time step      | u64 big-endian                    |
//! | agent id       | u32 big-endian length, UTF-8      |
//! | kind           | u32 big-endian length, ASCII id   |
//! | payload digest | 32 bytes, SHA-256 of the payload  |
//! | prev hash      | 32 bytes, all zero for seq 0      |
//!
//! The file form is the magic `IGAUDIT1` followed by one record per entry:
//! seq, time, agent and kind as above, then the payload (u32 length and
//! bytes), payload digest, prev hash and entry hash. Truncating the tail
//! leaves a valid prefix; only a separately kept head hash detects it.

use std::fmt;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::rdf::Iri;

pub const MAGIC: &[u8; 8] = b"IGAUDIT1";
pub const ZERO_HASH: [u8; 32] = [0; 32];

pub type Hash = [u8; 32];

#[derive(Debug, Error)]
pub enum AuditError {
    #[error("time step {got} precedes the last entry's step {last}")]
    TimeRegression { last: u64, got: u64 },
    #[error("malformed log at entry {seq}: {reason}")]
    Malformed { seq: u64, reason: String },
    #[error("log does not verify; first broken entry is {0}")]
    Broken(u64),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AuditKind {
    Enrollment,
    Revocation,
    Violation,
    Transition,
    Explanation,
    Verdict,
    Vote,
    ManifestChange,
    Failure,
}

impl AuditKind {
    pub const ALL: [AuditKind; 9] = [
        AuditKind::Enrollment,
        AuditKind::Revocation,
        AuditKind::Violation,
        AuditKind::Transition,
        AuditKind::Explanation,
        AuditKind::Verdict,
        AuditKind::Vote,
        AuditKind::ManifestChange,
        AuditKind::Failure,
    ];

    pub fn id(self) -> &'static str {
        match self {
            AuditKind::Enrollment => "enrollment",
            AuditKind::Revocation => "revocation",
            AuditKind::Violation => "violation",
            AuditKind::Transition => "transition",
            AuditKind::Explanation => "explanation",
            AuditKind::Verdict => "verdict",
            AuditKind::Vote => "vote",
            AuditKind::ManifestChange => "manifest-change",
            AuditKind::Failure => "failure",
        }
    }

    pub fn from_id(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.id() == s)
    }
}

impl fmt::Display for AuditKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuditEntry {
    pub seq: u64,
    pub time: u64,
    pub agent: Iri,
    pub kind: AuditKind,
    pub payload: Vec<u8>,
    pub payload_digest: Hash,
    pub prev_hash: Hash,
    pub entry_hash: Hash,
}

fn put_str(buf: &mut Vec<u8>, s: &str) {
    buf.extend_from_slice(&(s.len() as u32).to_be_bytes());
    buf.extend_from_slice(s.as_bytes());
}

/// Entry hash over the layout in the module docs.
pub fn entry_hash(seq: u64, time: u64, agent: &str, kind: &str, payload_digest: &Hash, prev: &Hash) -> Hash {
    let mut buf = Vec::with_capacity(96 + agent.len() + kind.len());
    buf.extend_from_slice(&seq.to_be_bytes());
    buf.extend_from_slice(&time.to_be_bytes());
    put_str(&mut buf, agent);
    put_str(&mut buf, kind);
    buf.extend_from_slice(payload_digest);
    buf.extend_from_slice(prev);
    Sha256::digest(&buf).into()
}

pub fn payload_digest(payload: &[u8]) -> Hash {
    Sha256::digest(payload).into()
}

impl AuditEntry {
    pub fn recompute(&self) -> Hash {
        entry_hash(self.seq, self.time, self.agent.as_str(), self.kind.id(), &self.payload_digest, &self.prev_hash)
    }

    pub fn payload_text(&self) -> String {
        String::from_utf8_lossy(&self.payload).into_owned()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verification {
    pub valid: bool,
    pub first_broken: Option<u64>,
    /// Entries read before the first break (all of them when valid).
    pub verified: u64,
    /// Hash of the last verified entry, or all zero.
    #[serde(serialize_with = "hex_hash")]
    pub head: Hash,
}

fn hex_hash<S: serde::Serializer>(h: &Hash, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&hex::encode(h))
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AuditLog {
    entries: Vec<AuditEntry>,
}

impl AuditLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[AuditEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn head(&self) -> Hash {
        self.entries.last().map_or(ZERO_HASH, |e| e.entry_hash)
    }

    pub fn head_hex(&self) -> String {
        hex::encode(self.head())
    }

    pub fn count(&self, kind: AuditKind) -> usize {
        self.entries.iter().filter(|e| e.kind == kind).count()
    }

    pub fn append(&mut self, kind: AuditKind, agent: &Iri, time: u64, payload: impl Into<Vec<u8>>) -> Result<&AuditEntry, AuditError> {
        if let Some(last) = self.entries.last() {
            if time < last.time {
                return Err(AuditError::TimeRegression { last: last.time, got: time });
            }
        }
        let payload = payload.into();
        let seq = self.entries.len() as u64;
        let prev_hash = self.head();
        let payload_digest = payload_digest(&payload);
        let entry_hash = entry_hash(seq, time, agent.as_str(), kind.id(), &payload_digest, &prev_hash);
        self.entries.push(AuditEntry { seq, time, agent: agent.clone(), kind, payload, payload_digest, prev_hash, entry_hash });
        Ok(self.entries.last().expect("just pushed"))
    }

    /// Checks every entry's payload digest, hash and link, in order.
    pub fn verify(&self) -> Verification {
        verify_entries(&self.entries, None)
    }

    /// A copy holding only the first `n` entries.
    pub fn prefix(&self, n: usize) -> AuditLog {
        AuditLog { entries: self.entries[..n.min(self.entries.len())].to_vec() }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = MAGIC.to_vec();
        for e in &self.entries {
            out.extend_from_slice(&e.seq.to_be_bytes());
            out.extend_from_slice(&e.time.to_be_bytes());
            put_str(&mut out, e.agent.as_str());
            put_str(&mut out, e.kind.id());
            out.extend_from_slice(&(e.payload.len() as u32).to_be_bytes());
            out.extend_from_slice(&e.payload);
            out.extend_from_slice(&e.payload_digest);
            out.extend_from_slice(&e.prev_hash);
            out.extend_from_slice(&e.entry_hash);
        }
        out
    }

    /// Byte offset at which each record starts in [`AuditLog::to_bytes`].
    pub fn record_offsets(&self) -> Vec<usize> {
        let mut at = MAGIC.len();
        self.entries
            .iter()
            .map(|e| {
                let start = at;
                at += 8 + 8 + 4 + e.agent.as_str().len() + 4 + e.kind.id().len() + 4 + e.payload.len() + 96;
                start
            })
            .collect()
    }

    /// Strict decode: fails on any malformed record or broken link.
    pub fn from_bytes(bytes: &[u8]) -> Result<AuditLog, AuditError> {
        let (entries, err) = decode(bytes);
        if let Some((seq, reason)) = err {
            return Err(AuditError::Malformed { seq, reason });
        }
        let log = AuditLog { entries };
        match log.verify().first_broken {
            Some(k) => Err(AuditError::Broken(k)),
            None => Ok(log),
        }
    }

    pub fn write_to(&self, path: &Path) -> Result<(), AuditError> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn read_from(path: &Path) -> Result<AuditLog, AuditError> {
        AuditLog::from_bytes(&std::fs::read(path)?)
    }
}

fn verify_entries(entries: &[AuditEntry], decode_break: Option<u64>) -> Verification {
    let mut prev = ZERO_HASH;
    let mut last_time = 0;
    for (i, e) in entries.iter().enumerate() {
        let ok = e.seq == i as u64
            && e.prev_hash == prev
            && e.time >= last_time
            && payload_digest(&e.payload) == e.payload_digest
            && e.recompute() == e.entry_hash;
        if !ok {
            return Verification { valid: false, first_broken: Some(i as u64), verified: i as u64, head: prev };
        }
        prev = e.entry_hash;
        last_time = e.time;
    }
    let n = entries.len() as u64;
    Verification { valid: decode_break.is_none(), first_broken: decode_break, verified: n, head: prev }
}

/// Verifies a serialized log. A record that cannot be decoded counts as
/// broken at its position.
pub fn verify_bytes(bytes: &[u8]) -> Verification {
    let (entries, err) = decode(bytes);
    verify_entries(&entries, err.map(|(seq, _)| seq))
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], String> {
        if self.bytes.len() - self.at < n {
            return Err(format!("needs {n} bytes at offset {}", self.at));
        }
        let s = &self.bytes[self.at..self.at + n];
        self.at += n;
        Ok(s)
    }

    fn u64(&mut self) -> Result<u64, String> {
        Ok(u64::from_be_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn u32(&mut self) -> Result<usize, String> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().expect("4 bytes")) as usize)
    }

    fn hash(&mut self) -> Result<Hash, String> {
        Ok(self.take(32)?.try_into().expect("32 bytes"))
    }

    fn string(&mut self) -> Result<String, String> {
        let n = self.u32()?;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|e| e.to_string())
    }

    fn entry(&mut self) -> Result<AuditEntry, String> {
        let seq = self.u64()?;
        let time = self.u64()?;
        let agent = Iri::new(self.string()?);
        let kind_id = self.string()?;
        let kind = AuditKind::from_id(&kind_id).ok_or_else(|| format!("unknown kind {kind_id:?}"))?;
        let n = self.u32()?;
        let payload = self.take(n)?.to_vec();
        Ok(AuditEntry { seq, time, agent, kind, payload, payload_digest: self.hash()?, prev_hash: self.hash()?, entry_hash: self.hash()? })
    }
}

fn decode(bytes: &[u8]) -> (Vec<AuditEntry>, Option<(u64, String)>) {
    if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
        return (Vec::new(), Some((0, "bad magic".into())));
    }
    let mut r = Reader { bytes, at: MAGIC.len() };
    let mut out = Vec::new();
    while r.at < bytes.len() {
        match r.entry() {
            Ok(e) => out.push(e),
            Err(reason) => return (out.clone(), Some((out.len() as u64, reason))),
        }
    }
    (out, None)
}

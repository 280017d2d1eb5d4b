use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use super::SimError;
use crate::rdf::{Graph, Iri};
use crate::ratio;
use crate::shacl::{validate, Shape};

pub struct Voter<'a> {
    pub agent: Iri,
    pub shapes: &'a [Shape],
    /// Why the agent may not vote, if it may not.
    pub excluded: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Ballot {
    pub agent: Iri,
    pub yes: bool,
    /// Violations the outcome raises under the voter's own norms.
    pub violations: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VoteOutcome {
    pub label: String,
    pub ballots: Vec<Ballot>,
    pub excluded: Vec<(Iri, String)>,
    pub yes: usize,
    pub eligible: usize,
    #[serde(serialize_with = "ratio::serialize")]
    pub quorum: BigRational,
    #[serde(serialize_with = "ratio::serialize")]
    pub yes_fraction: BigRational,
    pub accepted: bool,
}

impl VoteOutcome {
    pub fn tally(&self) -> String {
        format!("{}-{}", self.yes, self.eligible - self.yes)
    }
}

/// Each eligible voter approves iff `outcome` conforms to its own shapes;
/// accepted iff `yes / eligible >= quorum`, compared exactly.
pub fn collective_vote(label: &str, voters: &[Voter<'_>], outcome: &Graph, quorum: &BigRational) -> Result<VoteOutcome, SimError> {
    let mut ballots = Vec::new();
    let mut excluded = Vec::new();
    for v in voters {
        match &v.excluded {
            Some(why) => excluded.push((v.agent.clone(), why.clone())),
            None => {
                let report = validate(outcome, v.shapes)?;
                ballots.push(Ballot { agent: v.agent.clone(), yes: report.conforms, violations: report.violation_count() });
            }
        }
    }
    if ballots.is_empty() {
        return Err(SimError::NoEligibleVoters);
    }
    let yes = ballots.iter().filter(|b| b.yes).count();
    let eligible = ballots.len();
    let yes_fraction = BigRational::new(BigInt::from(yes), BigInt::from(eligible));
    Ok(VoteOutcome {
        label: label.into(),
        accepted: &yes_fraction >= quorum,
        ballots,
        excluded,
        yes,
        eligible,
        quorum: quorum.clone(),
        yes_fraction,
    })
}

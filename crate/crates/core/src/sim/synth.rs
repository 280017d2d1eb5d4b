//! Seeded fixture generators for property tests, acceptance runs and
//! benchmarks. Nothing in the governed pipeline draws randomness.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::audit::{AuditKind, AuditLog};
use crate::game::{NormalFormGame, SanctionProfile};
use crate::governance::GovernanceGraph;
use crate::rdf::vocab::EX;
use crate::rdf::{Graph, Iri, Term, Triple};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n / d` with `n` in `-lim..=lim` and `d` in `1..=4`.
pub fn rational(rng: &mut impl Rng, lim: i64) -> BigRational {
    BigRational::new(BigInt::from(rng.gen_range(-lim..=lim)), BigInt::from(rng.gen_range(1..=4)))
}

/// Up to `max_players` players with 2 to `max_actions` actions each, one
/// compliant action per player.
pub fn random_game(rng: &mut impl Rng, max_players: usize, max_actions: usize) -> NormalFormGame {
    let n = rng.gen_range(1..=max_players.max(1));
    let players: Vec<String> = (0..n).map(|i| format!("P{i}")).collect();
    let actions: Vec<Vec<String>> = (0..n).map(|_| (0..rng.gen_range(2..=max_actions.max(2))).map(|a| format!("a{a}")).collect()).collect();
    let compliant: Vec<Vec<bool>> = actions
        .iter()
        .map(|acts| {
            let c = rng.gen_range(0..acts.len());
            (0..acts.len()).map(|a| a == c).collect()
        })
        .collect();
    let profiles: usize = actions.iter().map(Vec::len).product();
    let payoffs = (0..profiles).map(|_| (0..n).map(|_| rational(rng, 10)).collect()).collect();
    NormalFormGame::new(players, actions, compliant, payoffs).expect("generated game is well formed")
}

/// Non-negative sanctions on violating actions only.
pub fn random_sanction(rng: &mut impl Rng, g: &NormalFormGame) -> SanctionProfile {
    let mut s = SanctionProfile::zero(g);
    for idx in 0..g.profile_count() {
        let p = g.profile(idx);
        for (i, &a) in p.iter().enumerate() {
            if !g.compliant[i][a] && rng.gen_bool(0.7) {
                s.values[idx][i] = rational(rng, 8).abs();
            }
        }
    }
    s
}

fn ex(local: String) -> Term {
    Term::iri(format!("{EX}{local}"))
}

/// `n` draws from a vocabulary of `vocab` subjects, 3 predicates and `vocab`
/// objects; duplicates collapse, so the set may be smaller.
pub fn random_triples(rng: &mut impl Rng, n: usize, vocab: usize) -> BTreeSet<Triple> {
    (0..n)
        .map(|_| {
            let s = ex(format!("s{}", rng.gen_range(0..vocab)));
            let p = Iri::new(format!("{EX}p{}", rng.gen_range(0..3)));
            let o = if rng.gen_bool(0.3) { Term::integer(rng.gen_range(0..20)) } else { ex(format!("o{}", rng.gen_range(0..vocab))) };
            Triple::new(s, p, o).expect("IRI subject")
        })
        .collect()
}

/// A log of `n` entries with random kinds, agents and payloads and
/// non-decreasing time steps.
pub fn random_log(rng: &mut impl Rng, n: usize) -> AuditLog {
    let mut log = AuditLog::new();
    let mut t = 0;
    for i in 0..n {
        t += rng.gen_range(0..2);
        let kind = *AuditKind::ALL.choose(rng).expect("kinds");
        let agent = Iri::new(format!("{EX}Agent{}", rng.gen_range(0..5)));
        let len = rng.gen_range(0..48);
        let mut payload: Vec<u8> = (0..len).map(|_| rng.gen()).collect();
        payload.extend_from_slice(format!("#{i}").as_bytes());
        log.append(kind, &agent, t, payload).expect("time never regresses");
    }
    log
}

pub fn random_signals(rng: &mut impl Rng, gg: &GovernanceGraph, len: usize) -> Vec<Iri> {
    let signals: Vec<&Iri> = gg.signals.iter().collect();
    (0..len).map(|_| (*signals.choose(rng).expect("at least one signal")).clone()).collect()
}

/// `n` employment contracts, each with an employee of random age and a
/// random employment type.
pub fn contract_world(rng: &mut impl Rng, n: usize) -> Graph {
    let mut g = Graph::new();
    let iri = |s: &str| Iri::new(format!("{EX}{s}"));
    for i in 0..n {
        let c = ex(format!("Contract-{i}"));
        let p = ex(format!("Person-{i}"));
        let ty = if rng.gen_bool(0.5) { "FullTime" } else { "PartTime" };
        g.insert(Triple::new(c.clone(), Iri::new(crate::rdf::vocab::rdf_type()), ex("EmploymentContract".into())).expect("iri"));
        g.insert(Triple::new(c.clone(), iri("employee"), p.clone()).expect("iri"));
        g.insert(Triple::new(c, iri("employmentType"), ex(ty.into())).expect("iri"));
        g.insert(Triple::new(p, iri("age"), Term::integer(rng.gen_range(14..70))).expect("iri"));
    }
    g
}

//! Finite normal-form games with exact rational payoffs, sanction transforms
//! `U - S`, pure Nash equilibria and strict dominance.
//!
//! Fixture format, one directive per line:
//!
//! ```text
//! players A B
//! actions A comply defect
//! actions B comply defect
//! compliant A comply
//! compliant B comply
//! payoff comply comply : 3 3
//! payoff comply defect : 0 5
//! payoff defect comply : 5 0
//! payoff defect defect : 1 1
//! sanction A defect * = 4 ex:NoDefection
//! ```
//!
//! A `sanction` line names the sanctioned player, one action or `*` per
//! player, the magnitude, and optionally the statement it enforces.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::exec::{self, Execution};
use crate::ratio::parse_rational;
use crate::rdf::{parse_term, Graph, Iri, Term};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GameError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("game needs at least one player, each with at least one action")]
    Empty,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("player {0} has no compliant action")]
    NoCompliantAction(String),
    #[error("player {player} has {count} compliant actions; exactly one is required")]
    NotSingleCompliant { player: String, count: usize },
    #[error("sanction on compliant action {action} of {player}")]
    SanctionOnCompliant { player: String, action: String },
    #[error("negative sanction {0}")]
    NegativeSanction(String),
    #[error("unknown player {0}")]
    UnknownPlayer(String),
    #[error("unknown action {action} for {player}")]
    UnknownAction { player: String, action: String },
    #[error("no payoff for profile {0}")]
    MissingPayoff(String),
    #[error("duplicate payoff for profile {0}")]
    DuplicatePayoff(String),
}

pub type Profile = Vec<usize>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalFormGame {
    pub players: Vec<String>,
    pub actions: Vec<Vec<String>>,
    /// Row-major over profiles, last player fastest; one payoff per player.
    pub payoffs: Vec<Vec<BigRational>>,
    pub compliant: Vec<Vec<bool>>,
    /// Set on games produced by [`transform`].
    pub transformed: bool,
}

impl NormalFormGame {
    pub fn new(
        players: Vec<String>,
        actions: Vec<Vec<String>>,
        compliant: Vec<Vec<bool>>,
        payoffs: Vec<Vec<BigRational>>,
    ) -> Result<Self, GameError> {
        if players.is_empty() || actions.iter().any(Vec::is_empty) {
            return Err(GameError::Empty);
        }
        if actions.len() != players.len() || compliant.len() != players.len() {
            return Err(GameError::DimensionMismatch("actions and labels must cover every player".into()));
        }
        for (i, (a, c)) in actions.iter().zip(&compliant).enumerate() {
            if a.len() != c.len() {
                return Err(GameError::DimensionMismatch(format!("labels for {} do not match its actions", players[i])));
            }
            if !c.iter().any(|&b| b) {
                return Err(GameError::NoCompliantAction(players[i].clone()));
            }
        }
        let g = NormalFormGame { players, actions, payoffs, compliant, transformed: false };
        if g.payoffs.len() != g.profile_count() || g.payoffs.iter().any(|p| p.len() != g.players.len()) {
            return Err(GameError::DimensionMismatch(format!("expected {} payoff rows of {} entries", g.profile_count(), g.players.len())));
        }
        Ok(g)
    }

    pub fn profile_count(&self) -> usize {
        self.actions.iter().map(Vec::len).product()
    }

    pub fn index(&self, profile: &[usize]) -> usize {
        profile.iter().zip(&self.actions).fold(0, |acc, (&a, acts)| acc * acts.len() + a)
    }

    pub fn profile(&self, mut index: usize) -> Profile {
        let mut out = vec![0; self.players.len()];
        for (i, acts) in self.actions.iter().enumerate().rev() {
            out[i] = index % acts.len();
            index /= acts.len();
        }
        out
    }

    pub fn payoff(&self, profile: &[usize], player: usize) -> &BigRational {
        &self.payoffs[self.index(profile)][player]
    }

    pub fn profile_names(&self, profile: &[usize]) -> Vec<&str> {
        profile.iter().enumerate().map(|(i, &a)| self.actions[i][a].as_str()).collect()
    }

    /// The all-compliant profiles.
    pub fn compliant_profiles(&self) -> Vec<Profile> {
        (0..self.profile_count())
            .map(|i| self.profile(i))
            .filter(|p| p.iter().enumerate().all(|(i, &a)| self.compliant[i][a]))
            .collect()
    }

    fn player_index(&self, name: &str) -> Result<usize, GameError> {
        self.players.iter().position(|p| p == name).ok_or_else(|| GameError::UnknownPlayer(name.into()))
    }

    fn action_index(&self, player: usize, name: &str) -> Result<usize, GameError> {
        self.actions[player]
            .iter()
            .position(|a| a == name)
            .ok_or_else(|| GameError::UnknownAction { player: self.players[player].clone(), action: name.into() })
    }

    /// `a` strictly beats `b` for `player` against every opponent profile.
    pub fn strictly_dominates(&self, player: usize, a: usize, b: usize) -> bool {
        (0..self.profile_count()).map(|i| self.profile(i)).filter(|p| p[player] == a).all(|mut p| {
            let ua = self.payoff(&p, player).clone();
            p[player] = b;
            &ua > self.payoff(&p, player)
        })
    }

    pub fn strictly_dominant(&self, player: usize) -> Option<usize> {
        let n = self.actions[player].len();
        (0..n).find(|&a| (0..n).filter(|&b| b != a).all(|b| self.strictly_dominates(player, a, b)))
    }

    /// No player gains strictly by a unilateral deviation.
    pub fn is_pure_nash(&self, profile: &[usize]) -> bool {
        (0..self.players.len()).all(|i| {
            let current = self.payoff(profile, i);
            let mut p = profile.to_vec();
            (0..self.actions[i].len()).all(|b| {
                p[i] = b;
                self.payoff(&p, i) <= current
            })
        })
    }
}

/// Per-profile, per-player non-negative penalties.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SanctionProfile {
    pub values: Vec<Vec<BigRational>>,
    /// Statement enforced by each sanctioned (player, action).
    pub binding: BTreeMap<(usize, usize), Iri>,
}

impl SanctionProfile {
    pub fn zero(g: &NormalFormGame) -> Self {
        SanctionProfile { values: vec![vec![BigRational::zero(); g.players.len()]; g.profile_count()], binding: BTreeMap::new() }
    }

    /// `sigma` on every profile where `player` takes a violating action.
    pub fn uniform(g: &NormalFormGame, player: usize, sigma: &BigRational) -> Self {
        let mut s = SanctionProfile::zero(g);
        s.add_uniform(g, player, sigma);
        s
    }

    pub fn add_uniform(&mut self, g: &NormalFormGame, player: usize, sigma: &BigRational) {
        for idx in 0..g.profile_count() {
            let p = g.profile(idx);
            if !g.compliant[player][p[player]] {
                self.values[idx][player] += sigma;
            }
        }
    }

    pub fn check(&self, g: &NormalFormGame) -> Result<(), GameError> {
        if self.values.len() != g.profile_count() || self.values.iter().any(|v| v.len() != g.players.len()) {
            return Err(GameError::DimensionMismatch("sanction table does not match the game".into()));
        }
        for (idx, row) in self.values.iter().enumerate() {
            let p = g.profile(idx);
            for (i, v) in row.iter().enumerate() {
                if v.is_negative() {
                    return Err(GameError::NegativeSanction(v.to_string()));
                }
                if !v.is_zero() && g.compliant[i][p[i]] {
                    return Err(GameError::SanctionOnCompliant { player: g.players[i].clone(), action: g.actions[i][p[i]].clone() });
                }
            }
        }
        Ok(())
    }
}

/// `G' = (N, A, U - S)`.
pub fn transform(g: &NormalFormGame, s: &SanctionProfile) -> Result<NormalFormGame, GameError> {
    s.check(g)?;
    let payoffs = g.payoffs.iter().zip(&s.values).map(|(u, s)| u.iter().zip(s).map(|(a, b)| a - b).collect()).collect();
    Ok(NormalFormGame { payoffs, transformed: true, ..g.clone() })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EquilibriumReport {
    pub pure_nash: Vec<Profile>,
    pub dominant: Vec<Option<usize>>,
    pub transformed: bool,
}

impl EquilibriumReport {
    pub fn describe(&self, g: &NormalFormGame) -> String {
        let mut out = String::new();
        let tag = if self.transformed { "G'" } else { "G" };
        for p in &self.pure_nash {
            out.push_str(&format!("{tag} nash ({})\n", g.profile_names(p).join(", ")));
        }
        for (i, d) in self.dominant.iter().enumerate() {
            let a = d.map_or("-", |a| g.actions[i][a].as_str());
            out.push_str(&format!("{tag} dominant {} {a}\n", g.players[i]));
        }
        out
    }
}

pub fn pure_nash(g: &NormalFormGame) -> EquilibriumReport {
    pure_nash_with(Execution::default(), g)
}

/// Exhaustive check of every profile.
pub fn pure_nash_with(exec: Execution, g: &NormalFormGame) -> EquilibriumReport {
    let flags = exec::map_range(exec, g.profile_count(), |i| g.is_pure_nash(&g.profile(i)));
    let pure_nash = flags.iter().enumerate().filter(|(_, &ok)| ok).map(|(i, _)| g.profile(i)).collect();
    let dominant = (0..g.players.len()).map(|i| g.strictly_dominant(i)).collect();
    EquilibriumReport { pure_nash, dominant, transformed: g.transformed }
}

/// Least uniform sanction on `player`'s violating actions above which its
/// compliant action strictly dominates: the largest payoff gain of any
/// violating action over the compliant one, or zero.
pub fn min_dominating_sanction(g: &NormalFormGame, player: usize) -> Result<BigRational, GameError> {
    let compliant: Vec<usize> = (0..g.actions[player].len()).filter(|&a| g.compliant[player][a]).collect();
    let [c] = compliant.as_slice() else {
        return Err(GameError::NotSingleCompliant { player: g.players[player].clone(), count: compliant.len() });
    };
    let mut best = BigRational::zero();
    for idx in 0..g.profile_count() {
        let mut p = g.profile(idx);
        if p[player] == *c {
            continue;
        }
        let deviant = g.payoff(&p, player).clone();
        p[player] = *c;
        let gap = deviant - g.payoff(&p, player);
        if gap > best {
            best = gap;
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameFixture {
    pub game: NormalFormGame,
    pub sanctions: SanctionProfile,
}

impl fmt::Display for NormalFormGame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "players {}", self.players.join(" "))?;
        for (i, p) in self.players.iter().enumerate() {
            writeln!(f, "actions {p} {}", self.actions[i].join(" "))?;
        }
        for (i, p) in self.players.iter().enumerate() {
            let c: Vec<&str> = self.actions[i].iter().zip(&self.compliant[i]).filter(|(_, &c)| c).map(|(a, _)| a.as_str()).collect();
            writeln!(f, "compliant {p} {}", c.join(" "))?;
        }
        for idx in 0..self.profile_count() {
            let p = self.profile(idx);
            let vals: Vec<String> = self.payoffs[idx].iter().map(ToString::to_string).collect();
            writeln!(f, "payoff {} : {}", self.profile_names(&p).join(" "), vals.join(" "))?;
        }
        Ok(())
    }
}

/// Reads the fixture format described at the module level.
pub fn parse_game(text: &str) -> Result<GameFixture, GameError> {
    let mut players: Vec<String> = Vec::new();
    let mut actions: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut compliant: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut rows: Vec<(usize, Vec<String>, Vec<BigRational>)> = Vec::new();
    let mut sanction_lines: Vec<(usize, Vec<String>)> = Vec::new();
    let syntax = |line: usize, m: &str| GameError::Syntax { line, message: m.into() };
    let rational = |line: usize, s: &str| parse_rational(s).ok_or_else(|| syntax(line, &format!("bad rational `{s}`")));

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        let words: Vec<&str> = l.split_whitespace().collect();
        match words[0] {
            "players" => players = words[1..].iter().map(|s| s.to_string()).collect(),
            "actions" | "compliant" if words.len() >= 3 => {
                let map = if words[0] == "actions" { &mut actions } else { &mut compliant };
                map.insert(words[1].to_string(), words[2..].iter().map(|s| s.to_string()).collect());
            }
            "payoff" => {
                let colon = words.iter().position(|w| *w == ":").ok_or_else(|| syntax(line, "payoff needs `:`"))?;
                let vals = words[colon + 1..].iter().map(|w| rational(line, w)).collect::<Result<Vec<_>, _>>()?;
                rows.push((line, words[1..colon].iter().map(|s| s.to_string()).collect(), vals));
            }
            "sanction" => sanction_lines.push((line, words[1..].iter().map(|s| s.to_string()).collect())),
            other => return Err(syntax(line, &format!("unknown directive `{other}`"))),
        }
    }

    let mut action_lists = Vec::new();
    let mut labels = Vec::new();
    for p in &players {
        let acts = actions.get(p).cloned().ok_or_else(|| GameError::DimensionMismatch(format!("no actions for {p}")))?;
        let comp = compliant.get(p).cloned().unwrap_or_default();
        for c in &comp {
            if !acts.contains(c) {
                return Err(GameError::UnknownAction { player: p.clone(), action: c.clone() });
            }
        }
        labels.push(acts.iter().map(|a| comp.contains(a)).collect());
        action_lists.push(acts);
    }
    if let Some(extra) = actions.keys().chain(compliant.keys()).find(|k| !players.contains(k)) {
        return Err(GameError::UnknownPlayer(extra.clone()));
    }
    let n: usize = action_lists.iter().map(Vec::len).product();
    let width = players.len();
    let mut probe = NormalFormGame::new(players, action_lists, labels, vec![vec![BigRational::zero(); width]; n.max(1)])?;
    let mut payoffs: Vec<Option<Vec<BigRational>>> = vec![None; probe.profile_count()];
    for (line, names, vals) in rows {
        if names.len() != width || vals.len() != width {
            return Err(syntax(line, &format!("payoff rows need {width} actions and {width} values")));
        }
        let profile = names.iter().enumerate().map(|(i, a)| probe.action_index(i, a)).collect::<Result<Vec<_>, _>>()?;
        let slot = &mut payoffs[probe.index(&profile)];
        if slot.is_some() {
            return Err(GameError::DuplicatePayoff(names.join(" ")));
        }
        *slot = Some(vals);
    }
    let mut full = Vec::with_capacity(payoffs.len());
    for (idx, p) in payoffs.into_iter().enumerate() {
        match p {
            Some(v) => full.push(v),
            None => return Err(GameError::MissingPayoff(probe.profile_names(&probe.profile(idx)).join(" "))),
        }
    }
    probe.payoffs = full;
    let game = probe;

    let mut sanctions = SanctionProfile::zero(&game);
    let prefixes = Graph::new().prefixes().clone();
    for (line, words) in sanction_lines {
        let eq = words.iter().position(|w| w == "=").ok_or_else(|| syntax(line, "sanction needs `=`"))?;
        if eq < 1 || eq != width + 1 || words.len() < eq + 2 {
            return Err(syntax(line, "sanction needs a player, one action or `*` per player, `=` and a value"));
        }
        let player = game.player_index(&words[0])?;
        let pattern: Vec<Option<usize>> = words[1..eq]
            .iter()
            .enumerate()
            .map(|(i, w)| if w == "*" { Ok(None) } else { game.action_index(i, w).map(Some) })
            .collect::<Result<_, _>>()?;
        let value = rational(line, &words[eq + 1])?;
        let statement = match words.get(eq + 2) {
            Some(w) => match parse_term(w, &prefixes) {
                Ok(Term::Iri(i)) => Some(i),
                _ => return Err(syntax(line, &format!("bad statement id `{w}`"))),
            },
            None => None,
        };
        for idx in 0..game.profile_count() {
            let p = game.profile(idx);
            if pattern.iter().zip(&p).all(|(want, &a)| want.is_none_or(|w| w == a)) {
                if game.compliant[player][p[player]] {
                    if pattern[player].is_some() {
                        return Err(GameError::SanctionOnCompliant {
                            player: game.players[player].clone(),
                            action: game.actions[player][p[player]].clone(),
                        });
                    }
                    continue;
                }
                sanctions.values[idx][player] += &value;
                if let Some(st) = &statement {
                    sanctions.binding.insert((player, p[player]), st.clone());
                }
            }
        }
    }
    sanctions.check(&game)?;
    Ok(GameFixture { game, sanctions })
}

//! Solution-concept verdicts over an [`AgentGame`].
//!
//! Every rejected action carries a [`Refutation`] that can be re-checked
//! against the table with [`verify_refutation`].

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{AgentGame, MixedAction};
use crate::scalar::{ext_min, Extended, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Concept {
    LossAverse,
    LossAverseStar,
    SafetyLevel,
    IndividuallyRational,
    WeaklyDominant,
    StrictlyDominated,
    Leximin,
    MultiLeximin,
    MinMaxRegret,
}

impl Concept {
    pub const ALL: [Concept; 9] = [
        Concept::LossAverse,
        Concept::LossAverseStar,
        Concept::SafetyLevel,
        Concept::IndividuallyRational,
        Concept::WeaklyDominant,
        Concept::StrictlyDominated,
        Concept::Leximin,
        Concept::MultiLeximin,
        Concept::MinMaxRegret,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Concept::LossAverse => "loss-averse",
            Concept::LossAverseStar => "loss-averse-star",
            Concept::SafetyLevel => "safety-level",
            Concept::IndividuallyRational => "individually-rational",
            Concept::WeaklyDominant => "weakly-dominant",
            Concept::StrictlyDominated => "strictly-dominated",
            Concept::Leximin => "leximin",
            Concept::MultiLeximin => "multi-leximin",
            Concept::MinMaxRegret => "min-max-regret",
        }
    }
}

impl fmt::Display for Concept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Concept {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim();
        Concept::ALL
            .into_iter()
            .find(|c| c.name() == key || (key == "loss-averse*" && *c == Concept::LossAverseStar))
            .ok_or_else(|| Error::Parse(format!("unknown concept `{s}`")))
    }
}

/// Evidence that `action` fails a concept.
///
/// How `action_value` and `competitor_value` relate depends on the concept;
/// see [`verify_refutation`]. For most concepts the violation is
/// `action_value < competitor_value`; for min-max regret it is `>`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Refutation<T> {
    pub action: String,
    pub competitor: Option<String>,
    pub states: Vec<String>,
    pub action_value: Extended<T>,
    pub competitor_value: Extended<T>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConceptVerdict<T> {
    pub concept: Concept,
    pub satisfying_actions: Vec<String>,
    pub witnesses: Vec<Refutation<T>>,
}

impl<T> ConceptVerdict<T> {
    pub fn contains(&self, action: &str) -> bool {
        self.satisfying_actions.iter().any(|a| a == action)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairCheck<T> {
    pub holds: bool,
    pub witness: Option<Refutation<T>>,
}

/// First index attaining the minimum of `row` over `indices`.
fn argmin<'a, T: Ord>(row: &'a [T], indices: impl IntoIterator<Item = usize>) -> Option<(usize, &'a T)> {
    let mut best: Option<(usize, &T)> = None;
    for s in indices {
        match best {
            Some((_, v)) if row[s] >= *v => {}
            _ => best = Some((s, &row[s])),
        }
    }
    best
}

fn ext_of<T: Clone>(x: Option<(usize, &T)>) -> Extended<T> {
    x.map_or(Extended::PosInf, |(_, v)| Extended::Finite(v.clone()))
}

fn state_labels<T: Scalar>(game: &AgentGame<T>, picks: &[Option<(usize, &T)>]) -> Vec<String> {
    picks
        .iter()
        .flatten()
        .map(|(s, _)| game.states()[*s].clone())
        .collect()
}

fn pair_loss_averse<T: Scalar>(game: &AgentGame<T>, a: usize, b: usize) -> Option<Refutation<T>> {
    let diff = game.difference_indices(a, b);
    if diff.is_empty() {
        return None;
    }
    let own = argmin(game.row(a), diff.iter().copied());
    let rival = argmin(game.row(b), diff.iter().copied());
    let (own_v, rival_v) = (ext_of(own), ext_of(rival));
    (own_v < rival_v).then(|| Refutation {
        action: game.actions()[a].clone(),
        competitor: Some(game.actions()[b].clone()),
        states: state_labels(game, &[own, rival]),
        action_value: own_v,
        competitor_value: rival_v,
    })
}

fn strictly_worse_states<T: Scalar>(game: &AgentGame<T>, a: usize, b: usize) -> Vec<usize> {
    let (ra, rb) = (game.row(a), game.row(b));
    (0..game.state_count()).filter(|&s| ra[s] < rb[s]).collect()
}

fn pair_loss_averse_star<T: Scalar>(game: &AgentGame<T>, a: usize, b: usize) -> Option<Refutation<T>> {
    let own = argmin(game.row(a), strictly_worse_states(game, a, b));
    let rival = argmin(game.row(b), strictly_worse_states(game, b, a));
    let (own_v, rival_v) = (ext_of(own), ext_of(rival));
    (own_v < rival_v).then(|| Refutation {
        action: game.actions()[a].clone(),
        competitor: Some(game.actions()[b].clone()),
        states: state_labels(game, &[own, rival]),
        action_value: own_v,
        competitor_value: rival_v,
    })
}

/// Tests the loss-aversion inequality of `a` against `a2`.
///
/// An empty difference set counts as satisfied (both minima are `+inf`).
pub fn is_loss_averse_vs<T: Scalar>(game: &AgentGame<T>, a: &str, a2: &str) -> Result<PairCheck<T>> {
    let i = game.action_index(a)?;
    let j = game.action_index(a2)?;
    let witness = pair_loss_averse(game, i, j);
    Ok(PairCheck {
        holds: witness.is_none(),
        witness,
    })
}

fn pairwise_verdict<T: Scalar>(
    game: &AgentGame<T>,
    concept: Concept,
    check: impl Fn(&AgentGame<T>, usize, usize) -> Option<Refutation<T>>,
) -> ConceptVerdict<T> {
    let mut satisfying = Vec::new();
    let mut witnesses = Vec::new();
    for a in 0..game.action_count() {
        match (0..game.action_count()).filter(|&b| b != a).find_map(|b| check(game, a, b)) {
            Some(w) => witnesses.push(w),
            None => satisfying.push(game.actions()[a].clone()),
        }
    }
    ConceptVerdict {
        concept,
        satisfying_actions: satisfying,
        witnesses,
    }
}

/// Worst-case utility of each action.
pub fn action_minima<T: Scalar>(game: &AgentGame<T>) -> Vec<(usize, T)> {
    game.rows()
        .map(|row| {
            let (s, v) = argmin(row, 0..row.len()).expect("games have at least one state");
            (s, v.clone())
        })
        .collect()
}

/// `max_a min_s u(a, s)`.
pub fn safety_level<T: Scalar>(game: &AgentGame<T>) -> T {
    action_minima(game)
        .into_iter()
        .map(|(_, v)| v)
        .max()
        .expect("games have at least one action")
}

fn safety_verdict<T: Scalar>(game: &AgentGame<T>) -> ConceptVerdict<T> {
    let minima = action_minima(game);
    let level = safety_level(game);
    let champion = minima.iter().position(|(_, v)| *v == level).unwrap();
    let mut satisfying = Vec::new();
    let mut witnesses = Vec::new();
    for (a, (s, v)) in minima.iter().enumerate() {
        if *v == level {
            satisfying.push(game.actions()[a].clone());
        } else {
            witnesses.push(Refutation {
                action: game.actions()[a].clone(),
                competitor: Some(game.actions()[champion].clone()),
                states: vec![game.states()[*s].clone(), game.states()[minima[champion].0].clone()],
                action_value: Extended::Finite(v.clone()),
                competitor_value: Extended::Finite(level.clone()),
            });
        }
    }
    ConceptVerdict {
        concept: Concept::SafetyLevel,
        satisfying_actions: satisfying,
        witnesses,
    }
}

fn ir_verdict<T: Scalar>(game: &AgentGame<T>) -> ConceptVerdict<T> {
    let mut satisfying = Vec::new();
    let mut witnesses = Vec::new();
    for (a, row) in game.rows().enumerate() {
        match row.iter().position(|u| u.is_negative()) {
            None => satisfying.push(game.actions()[a].clone()),
            Some(s) => witnesses.push(Refutation {
                action: game.actions()[a].clone(),
                competitor: None,
                states: vec![game.states()[s].clone()],
                action_value: Extended::Finite(row[s].clone()),
                competitor_value: Extended::Finite(T::zero()),
            }),
        }
    }
    ConceptVerdict {
        concept: Concept::IndividuallyRational,
        satisfying_actions: satisfying,
        witnesses,
    }
}

fn dominance_verdict<T: Scalar>(game: &AgentGame<T>) -> ConceptVerdict<T> {
    pairwise_verdict(game, Concept::WeaklyDominant, |g, a, b| {
        let (ra, rb) = (g.row(a), g.row(b));
        (0..g.state_count()).find(|&s| rb[s] > ra[s]).map(|s| Refutation {
            action: g.actions()[a].clone(),
            competitor: Some(g.actions()[b].clone()),
            states: vec![g.states()[s].clone()],
            action_value: Extended::Finite(ra[s].clone()),
            competitor_value: Extended::Finite(rb[s].clone()),
        })
    })
}

fn dominates_strictly<T: Scalar>(game: &AgentGame<T>, by: usize, a: usize) -> bool {
    let (rb, ra) = (game.row(by), game.row(a));
    rb.iter().zip(ra).all(|(x, y)| x >= y) && rb.iter().zip(ra).any(|(x, y)| x > y)
}

fn strictly_dominated_verdict<T: Scalar>(game: &AgentGame<T>) -> ConceptVerdict<T> {
    let mut satisfying = Vec::new();
    let mut witnesses = Vec::new();
    for a in 0..game.action_count() {
        let dominated = (0..game.action_count()).any(|b| b != a && dominates_strictly(game, b, a));
        if dominated {
            satisfying.push(game.actions()[a].clone());
            continue;
        }
        // One record per competitor: a state where `a` beats it, or none when rows coincide.
        for b in (0..game.action_count()).filter(|&b| b != a) {
            let (ra, rb) = (game.row(a), game.row(b));
            let record = match (0..game.state_count()).find(|&s| ra[s] > rb[s]) {
                Some(s) => Refutation {
                    action: game.actions()[a].clone(),
                    competitor: Some(game.actions()[b].clone()),
                    states: vec![game.states()[s].clone()],
                    action_value: Extended::Finite(ra[s].clone()),
                    competitor_value: Extended::Finite(rb[s].clone()),
                },
                None => Refutation {
                    action: game.actions()[a].clone(),
                    competitor: Some(game.actions()[b].clone()),
                    states: vec![],
                    action_value: Extended::PosInf,
                    competitor_value: Extended::PosInf,
                },
            };
            witnesses.push(record);
        }
    }
    ConceptVerdict {
        concept: Concept::StrictlyDominated,
        satisfying_actions: satisfying,
        witnesses,
    }
}

/// Sorted outcome list of an action: distinct values, or one entry per state.
pub fn outcome_profile<T: Scalar>(row: &[T], multiset: bool) -> Vec<T> {
    let mut values = row.to_vec();
    values.sort();
    if !multiset {
        values.dedup();
    }
    values
}

/// Lexicographic comparison where a list that runs out compares as `+inf`.
fn lex_cmp<T: Ord>(x: &[T], y: &[T]) -> (Ordering, usize) {
    let mut k = 0;
    loop {
        match (x.get(k), y.get(k)) {
            (None, None) => return (Ordering::Equal, k),
            (None, Some(_)) => return (Ordering::Greater, k),
            (Some(_), None) => return (Ordering::Less, k),
            (Some(a), Some(b)) => match a.cmp(b) {
                Ordering::Equal => k += 1,
                other => return (other, k),
            },
        }
    }
}

fn leximin_verdict<T: Scalar>(game: &AgentGame<T>, multiset: bool) -> ConceptVerdict<T> {
    let concept = if multiset { Concept::MultiLeximin } else { Concept::Leximin };
    let profiles: Vec<Vec<T>> = game.rows().map(|r| outcome_profile(r, multiset)).collect();
    let mut best = 0;
    for a in 1..profiles.len() {
        if lex_cmp(&profiles[a], &profiles[best]).0 == Ordering::Greater {
            best = a;
        }
    }
    let mut satisfying = Vec::new();
    let mut witnesses = Vec::new();
    for (a, profile) in profiles.iter().enumerate() {
        let (ord, k) = lex_cmp(profile, &profiles[best]);
        if ord == Ordering::Equal {
            satisfying.push(game.actions()[a].clone());
            continue;
        }
        let action_value = profile.get(k).cloned().map_or(Extended::PosInf, Extended::Finite);
        let competitor_value = profiles[best].get(k).cloned().map_or(Extended::PosInf, Extended::Finite);
        let mut states = Vec::new();
        if let Extended::Finite(v) = &action_value {
            let s = game.row(a).iter().position(|u| u == v).unwrap();
            states.push(game.states()[s].clone());
        }
        witnesses.push(Refutation {
            action: game.actions()[a].clone(),
            competitor: Some(game.actions()[best].clone()),
            states,
            action_value,
            competitor_value,
        });
    }
    ConceptVerdict {
        concept,
        satisfying_actions: satisfying,
        witnesses,
    }
}

fn column_maxima<T: Scalar>(game: &AgentGame<T>) -> Vec<T> {
    (0..game.state_count())
        .map(|s| {
            (0..game.action_count())
                .map(|a| game.at(a, s).clone())
                .max()
                .unwrap()
        })
        .collect()
}

/// Worst-case regret per action, with the first state attaining it.
fn regret_profile<T: Scalar>(game: &AgentGame<T>) -> Vec<(usize, T)> {
    let best = column_maxima(game);
    game.rows()
        .map(|row| {
            let mut worst = (0, best[0].clone() - row[0].clone());
            for s in 1..row.len() {
                let r = best[s].clone() - row[s].clone();
                if r > worst.1 {
                    worst = (s, r);
                }
            }
            worst
        })
        .collect()
}

pub fn max_regret<T: Scalar>(game: &AgentGame<T>, action: &str) -> Result<T> {
    let a = game.action_index(action)?;
    Ok(regret_profile(game).swap_remove(a).1)
}

fn regret_verdict<T: Scalar>(game: &AgentGame<T>) -> ConceptVerdict<T> {
    let regrets = regret_profile(game);
    let least = regrets.iter().map(|(_, r)| r.clone()).min().unwrap();
    let champion = regrets.iter().position(|(_, r)| *r == least).unwrap();
    let mut satisfying = Vec::new();
    let mut witnesses = Vec::new();
    for (a, (s, r)) in regrets.iter().enumerate() {
        if *r == least {
            satisfying.push(game.actions()[a].clone());
        } else {
            witnesses.push(Refutation {
                action: game.actions()[a].clone(),
                competitor: Some(game.actions()[champion].clone()),
                states: vec![game.states()[*s].clone()],
                action_value: Extended::Finite(r.clone()),
                competitor_value: Extended::Finite(least.clone()),
            });
        }
    }
    ConceptVerdict {
        concept: Concept::MinMaxRegret,
        satisfying_actions: satisfying,
        witnesses,
    }
}

/// Computes the verdict for one concept.
pub fn evaluate<T: Scalar>(game: &AgentGame<T>, concept: Concept) -> ConceptVerdict<T> {
    match concept {
        Concept::LossAverse => pairwise_verdict(game, concept, pair_loss_averse),
        Concept::LossAverseStar => pairwise_verdict(game, concept, pair_loss_averse_star),
        Concept::SafetyLevel => safety_verdict(game),
        Concept::IndividuallyRational => ir_verdict(game),
        Concept::WeaklyDominant => dominance_verdict(game),
        Concept::StrictlyDominated => strictly_dominated_verdict(game),
        Concept::Leximin => leximin_verdict(game, false),
        Concept::MultiLeximin => leximin_verdict(game, true),
        Concept::MinMaxRegret => regret_verdict(game),
    }
}

pub fn loss_averse_actions<T: Scalar>(game: &AgentGame<T>) -> Vec<String> {
    evaluate(game, Concept::LossAverse).satisfying_actions
}

pub fn loss_averse_star_actions<T: Scalar>(game: &AgentGame<T>) -> Vec<String> {
    evaluate(game, Concept::LossAverseStar).satisfying_actions
}

pub fn safety_level_actions<T: Scalar>(game: &AgentGame<T>) -> Vec<String> {
    evaluate(game, Concept::SafetyLevel).satisfying_actions
}

pub fn individually_rational_actions<T: Scalar>(game: &AgentGame<T>) -> Vec<String> {
    evaluate(game, Concept::IndividuallyRational).satisfying_actions
}

pub fn weakly_dominant_actions<T: Scalar>(game: &AgentGame<T>) -> Vec<String> {
    evaluate(game, Concept::WeaklyDominant).satisfying_actions
}

pub fn strictly_dominated_actions<T: Scalar>(game: &AgentGame<T>) -> Vec<String> {
    evaluate(game, Concept::StrictlyDominated).satisfying_actions
}

pub fn leximin_actions<T: Scalar>(game: &AgentGame<T>) -> Vec<String> {
    evaluate(game, Concept::Leximin).satisfying_actions
}

pub fn multi_leximin_actions<T: Scalar>(game: &AgentGame<T>) -> Vec<String> {
    evaluate(game, Concept::MultiLeximin).satisfying_actions
}

pub fn min_max_regret_actions<T: Scalar>(game: &AgentGame<T>) -> Vec<String> {
    evaluate(game, Concept::MinMaxRegret).satisfying_actions
}

fn finite<T: Clone>(x: &Extended<T>) -> Option<T> {
    x.finite().cloned()
}

/// Re-derives a refutation from the utility table alone.
///
/// Returns `true` only if the record describes a genuine violation of
/// `concept` by `r.action`.
pub fn verify_refutation<T: Scalar>(game: &AgentGame<T>, concept: Concept, r: &Refutation<T>) -> bool {
    let Ok(a) = game.action_index(&r.action) else {
        return false;
    };
    let competitor = match &r.competitor {
        Some(label) => match game.action_index(label) {
            Ok(b) => Some(b),
            Err(_) => return false,
        },
        None => None,
    };
    let state = |k: usize| r.states.get(k).and_then(|l| game.state_index(l).ok());
    match concept {
        Concept::LossAverse | Concept::LossAverseStar => {
            let Some(b) = competitor else { return false };
            let (own_set, rival_set) = if concept == Concept::LossAverse {
                let d = game.difference_indices(a, b);
                (d.clone(), d)
            } else {
                (strictly_worse_states(game, a, b), strictly_worse_states(game, b, a))
            };
            let own = ext_min(own_set.iter().map(|&s| game.at(a, s).clone()));
            let rival = ext_min(rival_set.iter().map(|&s| game.at(b, s).clone()));
            !own_set.is_empty() && own == r.action_value && rival == r.competitor_value && own < rival
        }
        Concept::SafetyLevel => {
            let own = ext_min(game.row(a).iter().cloned());
            let Some(b) = competitor else { return false };
            let rival = ext_min(game.row(b).iter().cloned());
            own == r.action_value && rival == r.competitor_value && own < rival
        }
        Concept::IndividuallyRational => match state(0) {
            Some(s) => game.at(a, s).is_negative() && finite(&r.action_value).as_ref() == Some(game.at(a, s)),
            None => false,
        },
        Concept::WeaklyDominant => match (competitor, state(0)) {
            (Some(b), Some(s)) => game.at(b, s) > game.at(a, s),
            _ => false,
        },
        Concept::StrictlyDominated => {
            // Valid when the named competitor does not strictly dominate `a`.
            match competitor {
                Some(b) => match state(0) {
                    Some(s) => game.at(a, s) > game.at(b, s),
                    None => game.row(a) == game.row(b),
                },
                None => false,
            }
        }
        Concept::Leximin | Concept::MultiLeximin => {
            let Some(b) = competitor else { return false };
            let multiset = concept == Concept::MultiLeximin;
            let (x, y) = (outcome_profile(game.row(a), multiset), outcome_profile(game.row(b), multiset));
            let (ord, k) = lex_cmp(&x, &y);
            let at = |p: &Vec<T>| p.get(k).cloned().map_or(Extended::PosInf, Extended::Finite);
            ord == Ordering::Less && at(&x) == r.action_value && at(&y) == r.competitor_value
        }
        Concept::MinMaxRegret => {
            let Some(b) = competitor else { return false };
            let regrets = regret_profile(game);
            Extended::Finite(regrets[a].1.clone()) == r.action_value
                && Extended::Finite(regrets[b].1.clone()) == r.competitor_value
                && regrets[a].1 > regrets[b].1
        }
    }
}

/// Inclusions between concept sets that hold on every finite game.
pub const REQUIRED_INCLUSIONS: [(Concept, Concept); 6] = [
    (Concept::WeaklyDominant, Concept::LossAverse),
    (Concept::LossAverse, Concept::SafetyLevel),
    (Concept::MultiLeximin, Concept::LossAverse),
    (Concept::MultiLeximin, Concept::SafetyLevel),
    (Concept::Leximin, Concept::SafetyLevel),
    (Concept::WeaklyDominant, Concept::MinMaxRegret),
];

/// Inclusions that may fail; reported for information only.
pub const UNRELATED_PAIRS: [(Concept, Concept); 4] = [
    (Concept::Leximin, Concept::LossAverse),
    (Concept::LossAverse, Concept::MultiLeximin),
    (Concept::WeaklyDominant, Concept::Leximin),
    (Concept::MinMaxRegret, Concept::SafetyLevel),
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InclusionCheck {
    pub subset: Concept,
    pub superset: Concept,
    pub required: bool,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HierarchyReport<T> {
    pub verdicts: Vec<ConceptVerdict<T>>,
    pub inclusions: Vec<InclusionCheck>,
}

impl<T> HierarchyReport<T> {
    pub fn set(&self, concept: Concept) -> &[String] {
        &self
            .verdicts
            .iter()
            .find(|v| v.concept == concept)
            .expect("report covers every concept")
            .satisfying_actions
    }

    pub fn inclusion(&self, subset: Concept, superset: Concept) -> Option<&InclusionCheck> {
        self.inclusions
            .iter()
            .find(|c| c.subset == subset && c.superset == superset)
    }

    pub fn violations(&self) -> impl Iterator<Item = &InclusionCheck> {
        self.inclusions.iter().filter(|c| c.required && !c.holds)
    }
}

/// All concept sets plus every hierarchy inclusion, checked on this instance.
///
/// A failed required inclusion is an engine bug and surfaces as
/// [`Error::Consistency`].
pub fn hierarchy_report<T: Scalar>(game: &AgentGame<T>) -> Result<HierarchyReport<T>> {
    let verdicts: Vec<_> = Concept::ALL.iter().map(|&c| evaluate(game, c)).collect();
    let set = |c: Concept| &verdicts.iter().find(|v| v.concept == c).unwrap().satisfying_actions;
    let check = |sub: Concept, sup: Concept, required: bool| InclusionCheck {
        subset: sub,
        superset: sup,
        required,
        holds: set(sub).iter().all(|a| set(sup).contains(a)),
    };
    let inclusions: Vec<_> = REQUIRED_INCLUSIONS
        .iter()
        .map(|&(a, b)| check(a, b, true))
        .chain(UNRELATED_PAIRS.iter().map(|&(a, b)| check(a, b, false)))
        .collect();
    let report = HierarchyReport { verdicts, inclusions };
    if let Some(bad) = report.violations().next() {
        return Err(Error::Consistency(format!(
            "{} {:?} is not contained in {} {:?} on game `{}`",
            bad.subset,
            report.set(bad.subset),
            bad.superset,
            report.set(bad.superset),
            game.type_label()
        )));
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Mixed actions
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MixedSafetyVerdict<T> {
    pub candidate: MixedAction<T>,
    /// Worst-case expected utility of the candidate.
    pub guaranteed: T,
    pub worst_state: String,
    /// Mixed max-min value of the game.
    pub value: T,
    pub is_safety_level: bool,
}

/// Solves `m x = rhs` exactly; `None` when singular.
fn solve_linear<T: Scalar>(mut m: Vec<Vec<T>>, mut rhs: Vec<T>) -> Option<Vec<T>> {
    let n = rhs.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let factor = m[r][col].clone() / m[col][col].clone();
                for c in col..n {
                    let delta = factor.clone() * m[col][c].clone();
                    m[r][c] = m[r][c].clone() - delta;
                }
                let delta = factor * rhs[col].clone();
                rhs[r] = rhs[r].clone() - delta;
            }
        }
    }
    Some((0..n).map(|i| rhs[i].clone() / m[i][i].clone()).collect())
}

fn binomial(n: usize, k: usize) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn subsets_of_size(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut current, &mut out);
    out
}

/// Worst-case expected utility of dense weights, with the first worst state.
fn guarantee<T: Scalar>(game: &AgentGame<T>, weights: &[T]) -> (usize, T) {
    let mut worst = (0, game.mixed_utility_at(weights, 0));
    for s in 1..game.state_count() {
        let u = game.mixed_utility_at(weights, s);
        if u < worst.1 {
            worst = (s, u);
        }
    }
    worst
}

/// Mixed max-min value and an optimal mixture, by exact support enumeration.
///
/// Every vertex of the max-min linear program is the solution of a square
/// equalization system on some action support and equally many states, so
/// enumerating those systems finds the optimum. Pure actions come first, so
/// ties resolve toward the simplest support.
pub fn mixed_safety_value<T: Scalar>(game: &AgentGame<T>) -> Result<(T, MixedAction<T>)> {
    let (na, ns) = (game.action_count(), game.state_count());
    let systems: u128 = (1..=na.min(ns)).map(|k| binomial(na, k) * binomial(ns, k)).sum();
    if systems > 200_000 {
        return Err(Error::Capacity(format!(
            "mixed max-min needs {systems} support systems (limit 200000)"
        )));
    }
    let mut best: Option<(T, Vec<T>)> = None;
    for k in 1..=na.min(ns) {
        let col_sets = subsets_of_size(ns, k);
        for support in subsets_of_size(na, k) {
            for cols in &col_sets {
                // unknowns: p_r for r in support, then v
                let mut m = Vec::with_capacity(k + 1);
                for &c in cols {
                    let mut row: Vec<T> = support.iter().map(|&r| game.at(r, c).clone()).collect();
                    row.push(-T::one());
                    m.push(row);
                }
                let mut last = vec![T::one(); k];
                last.push(T::zero());
                m.push(last);
                let mut rhs = vec![T::zero(); k];
                rhs.push(T::one());
                let Some(sol) = solve_linear(m, rhs) else { continue };
                if sol[..k].iter().any(|p| p.is_negative()) {
                    continue;
                }
                let mut weights = vec![T::zero(); na];
                for (i, &r) in support.iter().enumerate() {
                    weights[r] = sol[i].clone();
                }
                let (_, g) = guarantee(game, &weights);
                if best.as_ref().map_or(true, |(v, _)| g > *v) {
                    best = Some((g, weights));
                }
            }
        }
    }
    let (value, weights) = best.expect("pure supports always yield a feasible system");
    Ok((value, MixedAction::from_weights(game, &weights)?))
}

/// Checks which candidate mixtures guarantee the mixed max-min value.
pub fn mixed_safety_level_actions<T: Scalar>(
    game: &AgentGame<T>,
    candidates: &[MixedAction<T>],
) -> Result<Vec<MixedSafetyVerdict<T>>> {
    let (value, _) = mixed_safety_value(game)?;
    candidates
        .iter()
        .map(|c| {
            let w = c.weights(game)?;
            let (s, g) = guarantee(game, &w);
            Ok(MixedSafetyVerdict {
                candidate: c.clone(),
                is_safety_level: g >= value,
                guaranteed: g,
                worst_state: game.states()[s].clone(),
                value: value.clone(),
            })
        })
        .collect()
}

/// Closed-form mixed safety-level strategy of a 2x2 game.
///
/// Considers both pure actions and the interior equalizing mixture (when it
/// exists) and returns the one with the best guarantee, preferring pure
/// actions on ties.
pub fn mixed_safety_level_solve_2x2<T: Scalar>(game: &AgentGame<T>) -> Result<MixedAction<T>> {
    if game.action_count() != 2 || game.state_count() != 2 {
        return Err(Error::Shape(format!(
            "2x2 solver needs 2 actions and 2 states, got {}x{}",
            game.action_count(),
            game.state_count()
        )));
    }
    let u = |a: usize, s: usize| game.at(a, s).clone();
    let mut options = vec![vec![T::one(), T::zero()], vec![T::zero(), T::one()]];
    // p*u(a,A) + (1-p)*u(b,A) = p*u(a,B) + (1-p)*u(b,B)
    let denom = u(0, 0) - u(1, 0) - u(0, 1) + u(1, 1);
    if !denom.is_zero() {
        let p = (u(1, 1) - u(1, 0)) / denom;
        if p.is_positive() && p < T::one() {
            options.push(vec![p.clone(), T::one() - p]);
        }
    }
    let mut best = options[0].clone();
    let mut best_g = guarantee(game, &best).1;
    for w in options.into_iter().skip(1) {
        let g = guarantee(game, &w).1;
        if g > best_g {
            best_g = g;
            best = w;
        }
    }
    MixedAction::from_weights(game, &best)
}

/// Human-readable `label:p,...` rendering of a mixture.
pub fn describe_mixture<T: Scalar>(m: &MixedAction<T>) -> String {
    m.probabilities()
        .iter()
        .map(|(a, p)| format!("{a}:{p}"))
        .collect::<Vec<_>>()
        .join(",")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MixedFalsification<T> {
    /// Some deviation violates the loss-aversion inequality.
    Falsified(Refutation<T>),
    /// No supplied deviation refutes the candidate. Not a proof: the
    /// deviation space is a continuum.
    SurvivedFamily { deviations_checked: usize },
}

impl<T> MixedFalsification<T> {
    pub fn is_falsified(&self) -> bool {
        matches!(self, MixedFalsification::Falsified(_))
    }
}

/// Searches `deviations` for a mixture that refutes `candidate`.
pub fn mixed_loss_averse_falsify<T: Scalar>(
    game: &AgentGame<T>,
    candidate: &MixedAction<T>,
    deviations: &[MixedAction<T>],
) -> Result<MixedFalsification<T>> {
    if deviations.is_empty() {
        return Err(Error::Parameter("deviation family is empty".into()));
    }
    let w = candidate.weights(game)?;
    let own: Vec<T> = (0..game.state_count()).map(|s| game.mixed_utility_at(&w, s)).collect();
    for dev in deviations {
        let dw = dev.weights(game)?;
        let rival: Vec<T> = (0..game.state_count()).map(|s| game.mixed_utility_at(&dw, s)).collect();
        let diff: Vec<usize> = (0..own.len()).filter(|&s| own[s] != rival[s]).collect();
        let o = argmin(&own, diff.iter().copied());
        let r = argmin(&rival, diff.iter().copied());
        let (ov, rv) = (ext_of(o), ext_of(r));
        if ov < rv {
            return Ok(MixedFalsification::Falsified(Refutation {
                action: describe_mixture(candidate),
                competitor: Some(describe_mixture(dev)),
                states: state_labels(game, &[o, r]),
                action_value: ov,
                competitor_value: rv,
            }));
        }
    }
    Ok(MixedFalsification::SurvivedFamily {
        deviations_checked: deviations.len(),
    })
}

/// All mixtures over the game's actions whose probabilities are multiples of `1/denominator`.
pub fn mixture_grid<T: Scalar>(game: &AgentGame<T>, denominator: u32) -> Vec<MixedAction<T>> {
    let n = game.action_count();
    let mut out = Vec::new();
    let mut counts = vec![0u32; n];
    fn rec<T: Scalar>(
        i: usize,
        left: u32,
        denom: u32,
        counts: &mut Vec<u32>,
        game: &AgentGame<T>,
        out: &mut Vec<MixedAction<T>>,
    ) {
        if i + 1 == counts.len() {
            counts[i] = left;
            let d = T::from_int(denom as i64);
            let w: Vec<T> = counts.iter().map(|&c| T::from_int(c as i64) / d.clone()).collect();
            out.push(MixedAction::from_weights(game, &w).expect("grid weights sum to one"));
            return;
        }
        for c in (0..=left).rev() {
            counts[i] = c;
            rec(i + 1, left - c, denom, counts, game, out);
        }
    }
    rec(0, denominator, denominator, &mut counts, game, &mut out);
    out
}

// ---------------------------------------------------------------------------
// Randomized nature states
// ---------------------------------------------------------------------------

/// Synthetic nature states mixing `bar_state` (probability eps) with a
/// safety-forcing `floor_state` (probability 1 - eps).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MixtureAugmentation<T> {
    bar_state: String,
    floor_state: String,
    epsilons: Vec<T>,
}

impl<T: Scalar> MixtureAugmentation<T> {
    pub fn new(
        game: &AgentGame<T>,
        bar_state: impl Into<String>,
        floor_state: impl Into<String>,
        epsilons: Vec<T>,
    ) -> Result<Self> {
        let aug = Self {
            bar_state: bar_state.into(),
            floor_state: floor_state.into(),
            epsilons,
        };
        aug.validate(game)?;
        Ok(aug)
    }

    pub fn bar_state(&self) -> &str {
        &self.bar_state
    }

    pub fn floor_state(&self) -> &str {
        &self.floor_state
    }

    pub fn epsilons(&self) -> &[T] {
        &self.epsilons
    }

    fn validate(&self, game: &AgentGame<T>) -> Result<()> {
        game.state_index(&self.bar_state)?;
        let floor = game.state_index(&self.floor_state)?;
        let level = safety_level(game);
        if let Some(a) = (0..game.action_count()).find(|&a| *game.at(a, floor) > level) {
            return Err(Error::InvalidGame(format!(
                "floor state `{}` gives action `{}` utility {} above the safety level {}",
                self.floor_state,
                game.actions()[a],
                game.at(a, floor),
                level
            )));
        }
        if let Some(e) = self
            .epsilons
            .iter()
            .find(|e| !e.is_positive() || **e >= T::one())
        {
            return Err(Error::Parameter(format!("mixing weight {e} must lie strictly inside (0,1)")));
        }
        Ok(())
    }
}

/// Appends one synthetic state per epsilon:
/// `u(a, mix_eps) = eps * u(a, bar) + (1 - eps) * u(a, floor)`.
pub fn augment_with_mixed_nature<T: Scalar>(
    game: &AgentGame<T>,
    aug: &MixtureAugmentation<T>,
) -> Result<AgentGame<T>> {
    aug.validate(game)?;
    let bar = game.state_index(&aug.bar_state)?;
    let floor = game.state_index(&aug.floor_state)?;
    let extra = aug
        .epsilons
        .iter()
        .map(|eps| {
            let column = (0..game.action_count())
                .map(|a| eps.clone() * game.at(a, bar).clone() + (T::one() - eps.clone()) * game.at(a, floor).clone())
                .collect();
            (format!("mix({},{},{})", aug.bar_state, aug.floor_state, eps), column)
        })
        .collect();
    game.with_extra_states(extra)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat, Exact};

    fn table(actions: &[&str], states: &[&str], rows: &[&[i64]]) -> AgentGame<Exact> {
        AgentGame::from_fn("t", actions, states, |a, s| int(rows[a][s])).unwrap()
    }

    fn leximin_proof() -> AgentGame<Exact> {
        table(&["a", "b"], &["opp-a", "opp-b"], &[&[5, 0], &[0, 10]])
    }

    fn minmaxreg_safety() -> AgentGame<Exact> {
        table(&["a", "b"], &["A", "B"], &[&[0, 0], &[-1, 100]])
    }

    fn dominant_leximin() -> AgentGame<Exact> {
        table(&["a", "b"], &["A", "B", "C"], &[&[0, 1, 5], &[0, 0, 3]])
    }

    fn constant() -> AgentGame<Exact> {
        table(&["x", "y", "z"], &["s", "t"], &[&[2, 2], &[2, 2], &[2, 2]])
    }

    #[test]
    fn pairwise_loss_aversion() {
        let g = leximin_proof();
        assert!(is_loss_averse_vs(&g, "a", "b").unwrap().holds);
        assert!(is_loss_averse_vs(&g, "b", "a").unwrap().holds);
        let g = minmaxreg_safety();
        assert!(is_loss_averse_vs(&g, "a", "b").unwrap().holds);
        let fail = is_loss_averse_vs(&g, "b", "a").unwrap();
        let w = fail.witness.unwrap();
        assert_eq!(w.action_value, Extended::Finite(int(-1)));
        assert_eq!(w.competitor_value, Extended::Finite(int(0)));
        assert!(is_loss_averse_vs(&constant(), "x", "y").unwrap().holds);
        assert!(is_loss_averse_vs(&g, "a", "nope").is_err());
    }

    #[test]
    fn named_sets() {
        assert_eq!(loss_averse_actions(&leximin_proof()), vec!["a", "b"]);
        assert_eq!(loss_averse_actions(&minmaxreg_safety()), vec!["a"]);
        assert_eq!(safety_level(&minmaxreg_safety()), int(0));
        assert_eq!(safety_level_actions(&minmaxreg_safety()), vec!["a"]);
        assert_eq!(safety_level_actions(&constant()), vec!["x", "y", "z"]);
        assert_eq!(individually_rational_actions(&minmaxreg_safety()), vec!["a"]);
        assert_eq!(individually_rational_actions(&leximin_proof()), vec!["a", "b"]);
        assert_eq!(weakly_dominant_actions(&dominant_leximin()), vec!["a"]);
        assert_eq!(weakly_dominant_actions(&constant()), vec!["x", "y", "z"]);
        assert!(strictly_dominated_actions(&constant()).is_empty());
        assert_eq!(strictly_dominated_actions(&dominant_leximin()), vec!["b"]);
        assert_eq!(multi_leximin_actions(&leximin_proof()), vec!["b"]);
        assert_eq!(leximin_actions(&dominant_leximin()), vec!["b"]);
        assert_eq!(max_regret(&minmaxreg_safety(), "a").unwrap(), int(100));
        assert_eq!(max_regret(&minmaxreg_safety(), "b").unwrap(), int(1));
        assert_eq!(min_max_regret_actions(&minmaxreg_safety()), vec!["b"]);
        assert_eq!(min_max_regret_actions(&dominant_leximin()), vec!["a"]);
    }

    #[test]
    fn loss_averse_star_rejects_dominated_and_keeps_twins() {
        assert_eq!(loss_averse_star_actions(&dominant_leximin()), vec!["a"]);
        assert_eq!(loss_averse_star_actions(&constant()), vec!["x", "y", "z"]);
    }

    #[test]
    fn every_witness_verifies() {
        for g in [leximin_proof(), minmaxreg_safety(), dominant_leximin(), constant()] {
            for c in Concept::ALL {
                let v = evaluate(&g, c);
                for w in &v.witnesses {
                    assert!(verify_refutation(&g, c, w), "{c} witness {w:?}");
                }
            }
        }
    }

    #[test]
    fn tampered_witness_fails_verification() {
        let g = minmaxreg_safety();
        let mut w = evaluate(&g, Concept::LossAverse).witnesses.remove(0);
        w.competitor_value = Extended::Finite(int(-5));
        assert!(!verify_refutation(&g, Concept::LossAverse, &w));
    }

    #[test]
    fn hierarchy_on_curated_games() {
        let r = hierarchy_report(&leximin_proof()).unwrap();
        assert_eq!(r.set(Concept::MultiLeximin), ["b"]);
        assert!(!r.inclusion(Concept::LossAverse, Concept::MultiLeximin).unwrap().holds);
        let r = hierarchy_report(&minmaxreg_safety()).unwrap();
        assert!(!r.inclusion(Concept::MinMaxRegret, Concept::SafetyLevel).unwrap().holds);
        let r = hierarchy_report(&dominant_leximin()).unwrap();
        assert!(!r.inclusion(Concept::WeaklyDominant, Concept::Leximin).unwrap().holds);
    }

    #[test]
    fn two_by_two_safety_solver() {
        let g = table(&["a", "b"], &["A", "B"], &[&[1, 0], &[0, 3]]);
        let m = mixed_safety_level_solve_2x2(&g).unwrap();
        assert_eq!(m.probability("a"), rat(3, 4));
        assert_eq!(m.probability("b"), rat(1, 4));
        let pennies = table(&["h", "t"], &["H", "T"], &[&[1, -1], &[-1, 1]]);
        let m = mixed_safety_level_solve_2x2(&pennies).unwrap();
        assert_eq!(m.probability("h"), rat(1, 2));
        let dom = table(&["a", "b"], &["A", "B"], &[&[2, 3], &[1, 0]]);
        assert_eq!(mixed_safety_level_solve_2x2(&dom).unwrap(), MixedAction::pure("a"));
        assert!(matches!(mixed_safety_level_solve_2x2(&dominant_leximin()), Err(Error::Shape(_))));
    }

    #[test]
    fn support_enumeration_matches_closed_form() {
        let g = table(&["a", "b"], &["A", "B"], &[&[1, 0], &[0, 3]]);
        let (value, mix) = mixed_safety_value(&g).unwrap();
        assert_eq!(value, rat(3, 4));
        assert_eq!(mix, mixed_safety_level_solve_2x2(&g).unwrap());
        let verdicts = mixed_safety_level_actions(&g, &[mix, MixedAction::pure("a")]).unwrap();
        assert!(verdicts[0].is_safety_level);
        assert!(!verdicts[1].is_safety_level);
    }

    #[test]
    fn falsification_harness() {
        let g = leximin_proof();
        let a = MixedAction::pure("a");
        let out = mixed_loss_averse_falsify(&g, &a, &[a.clone()]).unwrap();
        assert_eq!(out, MixedFalsification::SurvivedFamily { deviations_checked: 1 });
        assert!(mixed_loss_averse_falsify(&g, &a, &[]).is_err());
        assert_eq!(mixture_grid(&g, 10).len(), 11);
    }

    #[test]
    fn augmentation() {
        let g = table(&["a", "b", "c"], &["A", "B", "C"], &[&[3, 1, 0], &[0, 4, 0], &[2, 2, -1]]);
        let aug = MixtureAugmentation::new(&g, "A", "C", vec![rat(1, 10), rat(1, 100)]).unwrap();
        let big = augment_with_mixed_nature(&g, &aug).unwrap();
        assert_eq!(big.state_count(), 5);
        assert_eq!(big.utility("a", "mix(A,C,1/10)").unwrap(), rat(3, 10));
        assert_eq!(loss_averse_actions(&big), vec!["a"]);
        assert_eq!(safety_level_actions(&big), vec!["a", "b"]);
        let empty = MixtureAugmentation::new(&g, "A", "C", vec![]).unwrap();
        assert_eq!(augment_with_mixed_nature(&g, &empty).unwrap(), g);
        assert!(MixtureAugmentation::new(&g, "A", "C", vec![int(1)]).is_err());
        assert!(MixtureAugmentation::new(&g, "A", "B", vec![rat(1, 2)]).is_err());
    }
}

//! Slow, literal reimplementations used to cross-check the engines.
//!
//! Nothing here calls into `concepts` or the `vcg` search; only the data types
//! are shared.

use std::cmp::Ordering;

use crate::concepts::Concept;
use crate::error::{Error, Result};
use crate::game::AgentGame;
use crate::scalar::Exact;
use crate::vcg::{Bundle, CombBid};

/// Elementary-step ceiling for any oracle call.
pub const ORACLE_BUDGET: u128 = 10_000_000;

fn guard(steps: u128) -> Result<()> {
    if steps > ORACLE_BUDGET {
        return Err(Error::Capacity(format!("oracle needs {steps} steps, budget is {ORACLE_BUDGET}")));
    }
    Ok(())
}

fn cells(game: &AgentGame<Exact>, a: usize) -> Vec<Exact> {
    (0..game.state_count()).map(|s| game.at(a, s).clone()).collect()
}

/// `None` stands for `+inf`.
fn min_over(values: &[Exact], keep: impl Fn(usize) -> bool) -> Option<Exact> {
    let mut out: Option<Exact> = None;
    for (s, v) in values.iter().enumerate() {
        if keep(s) {
            out = match out {
                Some(m) if m <= *v => Some(m),
                _ => Some(v.clone()),
            };
        }
    }
    out
}

/// `x < y` with `None` as `+inf`.
fn less(x: &Option<Exact>, y: &Option<Exact>) -> bool {
    match (x, y) {
        (Some(a), Some(b)) => a < b,
        (Some(_), None) => true,
        _ => false,
    }
}

fn labels(game: &AgentGame<Exact>, keep: impl Fn(usize) -> bool) -> Vec<String> {
    (0..game.action_count()).filter(|&a| keep(a)).map(|a| game.actions()[a].clone()).collect()
}

pub fn naive_loss_averse(game: &AgentGame<Exact>) -> Result<Vec<String>> {
    let (n, k) = (game.action_count(), game.state_count());
    guard((n * n * k) as u128)?;
    Ok(labels(game, |a| {
        let ua = cells(game, a);
        (0..n).all(|b| {
            let ub = cells(game, b);
            let mine = min_over(&ua, |s| ua[s] != ub[s]);
            let theirs = min_over(&ub, |s| ua[s] != ub[s]);
            !less(&mine, &theirs)
        })
    }))
}

pub fn naive_loss_averse_star(game: &AgentGame<Exact>) -> Result<Vec<String>> {
    let (n, k) = (game.action_count(), game.state_count());
    guard((n * n * k) as u128)?;
    Ok(labels(game, |a| {
        let ua = cells(game, a);
        (0..n).all(|b| {
            let ub = cells(game, b);
            let mine = min_over(&ua, |s| ua[s] < ub[s]);
            let theirs = min_over(&ub, |s| ub[s] < ua[s]);
            !less(&mine, &theirs)
        })
    }))
}

pub fn naive_safety_level(game: &AgentGame<Exact>) -> Result<Vec<String>> {
    guard((game.action_count() * game.state_count()) as u128)?;
    let mins: Vec<Exact> = (0..game.action_count())
        .map(|a| min_over(&cells(game, a), |_| true).expect("games have states"))
        .collect();
    let best = mins.iter().max().expect("games have actions").clone();
    Ok(labels(game, |a| mins[a] == best))
}

pub fn naive_individually_rational(game: &AgentGame<Exact>) -> Result<Vec<String>> {
    let zero = Exact::from_integer(0.into());
    Ok(labels(game, |a| cells(game, a).iter().all(|x| *x >= zero)))
}

pub fn naive_weakly_dominant(game: &AgentGame<Exact>) -> Result<Vec<String>> {
    let n = game.action_count();
    guard((n * n * game.state_count()) as u128)?;
    Ok(labels(game, |a| {
        (0..n).all(|b| (0..game.state_count()).all(|s| game.at(a, s) >= game.at(b, s)))
    }))
}

/// Some other action is never worse and sometimes better.
pub fn naive_strictly_dominated(game: &AgentGame<Exact>) -> Result<Vec<String>> {
    let n = game.action_count();
    guard((n * n * game.state_count()) as u128)?;
    Ok(labels(game, |a| {
        (0..n).any(|b| {
            let states = 0..game.state_count();
            states.clone().all(|s| game.at(b, s) >= game.at(a, s)) && states.into_iter().any(|s| game.at(b, s) > game.at(a, s))
        })
    }))
}

/// Lexicographic comparison where running out of entries beats any number.
fn lex(x: &[Exact], y: &[Exact]) -> Ordering {
    match (x.split_first(), y.split_first()) {
        (None, None) => Ordering::Equal,
        (None, Some(_)) => Ordering::Greater,
        (Some(_), None) => Ordering::Less,
        (Some((a, xs)), Some((b, ys))) => match a.cmp(b) {
            Ordering::Equal => lex(xs, ys),
            other => other,
        },
    }
}

pub fn naive_leximin(game: &AgentGame<Exact>, multiset: bool) -> Result<Vec<String>> {
    let n = game.action_count();
    guard((n * n * game.state_count()) as u128)?;
    let outcomes: Vec<Vec<Exact>> = (0..n)
        .map(|a| {
            let mut v = cells(game, a);
            v.sort();
            if !multiset {
                v.dedup();
            }
            v
        })
        .collect();
    Ok(labels(game, |a| (0..n).all(|b| lex(&outcomes[a], &outcomes[b]) != Ordering::Less)))
}

pub fn naive_min_max_regret(game: &AgentGame<Exact>) -> Result<Vec<String>> {
    let (n, k) = (game.action_count(), game.state_count());
    guard((n * n * k) as u128)?;
    let regret = |a: usize| -> Exact {
        let mut worst = Exact::from_integer(0.into());
        for s in 0..k {
            for b in 0..n {
                let r = game.at(b, s) - game.at(a, s);
                if r > worst {
                    worst = r;
                }
            }
        }
        worst
    };
    let regrets: Vec<Exact> = (0..n).map(regret).collect();
    let best = regrets.iter().min().expect("games have actions").clone();
    Ok(labels(game, |a| regrets[a] == best))
}

pub fn naive_evaluate(game: &AgentGame<Exact>, concept: Concept) -> Result<Vec<String>> {
    match concept {
        Concept::LossAverse => naive_loss_averse(game),
        Concept::LossAverseStar => naive_loss_averse_star(game),
        Concept::SafetyLevel => naive_safety_level(game),
        Concept::IndividuallyRational => naive_individually_rational(game),
        Concept::WeaklyDominant => naive_weakly_dominant(game),
        Concept::StrictlyDominated => naive_strictly_dominated(game),
        Concept::Leximin => naive_leximin(game, false),
        Concept::MultiLeximin => naive_leximin(game, true),
        Concept::MinMaxRegret => naive_min_max_regret(game),
    }
}

/// Maximum declared welfare over every item-to-bid assignment, with the first
/// maximizing assignment in odometer order (item 0 varies fastest).
pub fn naive_winner_determination(bids: &[&CombBid], item_count: usize) -> Result<(Exact, Vec<usize>)> {
    if bids.is_empty() {
        return Err(Error::Parameter("winner determination needs at least one bid".into()));
    }
    let n = bids.len() as u128;
    let total = n.checked_pow(item_count as u32).unwrap_or(u128::MAX);
    guard(total.saturating_mul(item_count as u128 + 1))?;
    let mut assignment = vec![0usize; item_count];
    let mut best: Option<(Exact, Vec<usize>)> = None;
    loop {
        let mut bundles = vec![0 as Bundle; bids.len()];
        for (item, &who) in assignment.iter().enumerate() {
            bundles[who] |= 1 << item;
        }
        let welfare: Exact = bids.iter().zip(&bundles).map(|(b, &s)| b.value(s).clone()).sum();
        if best.as_ref().map_or(true, |(w, _)| welfare > *w) {
            best = Some((welfare, assignment.clone()));
        }
        let mut i = 0;
        while i < item_count {
            assignment[i] += 1;
            if assignment[i] < bids.len() {
                break;
            }
            assignment[i] = 0;
            i += 1;
        }
        if i == item_count {
            return Ok(best.expect("at least one assignment"));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concepts::evaluate;
    use crate::curated::{curated_game, CURATED_GAMES};
    use crate::scalar::{int, rat};
    use crate::vcg::{build_example_e1, BundleValues};

    #[test]
    fn curated_agreement() {
        for name in CURATED_GAMES {
            let g = curated_game(name).unwrap();
            for c in Concept::ALL {
                assert_eq!(naive_evaluate(&g, c).unwrap(), evaluate(&g, c).satisfying_actions, "{name} {c}");
            }
        }
        let lp = curated_game("leximin-proof-game").unwrap();
        assert_eq!(naive_loss_averse(&lp).unwrap(), ["a", "b"]);
        assert_eq!(naive_leximin(&curated_game("dominant-leximin").unwrap(), false).unwrap(), ["b"]);
    }

    #[test]
    fn winner_determination() {
        let e = rat(1, 10);
        let ex = build_example_e1(&e).unwrap();
        let mut bids: Vec<CombBid> = ex.attack.clone();
        bids.extend(ex.valuations().into_iter().skip(1));
        let refs: Vec<&CombBid> = bids.iter().collect();
        assert_eq!(naive_winner_determination(&refs, 4).unwrap().0, int(40));
        let vals = ex.valuations();
        let truthful: Vec<&CombBid> = vals.iter().collect();
        assert_eq!(naive_winner_determination(&truthful, 4).unwrap().0, int(18) + &e * int(6));
        let one = BundleValues::additive(&[int(1), int(0), int(2)]).unwrap();
        assert_eq!(naive_winner_determination(&[&one], 3).unwrap(), (int(3), vec![0, 0, 0]));
    }
}

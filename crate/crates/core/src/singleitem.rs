//! Single-item auctions: discrete first-price, continuous first-price and all-pay.
//!
//! Nature is summarized by the highest competing bid, or by [`NO_BID`] when
//! nobody else bids. Bids and states are labelled by their rational value
//! (`"9/10"`).

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::game::AgentGame;
use crate::scalar::{ceil_to_grid, floor_to_grid, int, Exact};

/// Label of the nature state in which no competing bid is submitted.
pub const NO_BID: &str = "none";

fn check_epsilon(epsilon: &Exact) -> Result<()> {
    if !epsilon.is_positive() {
        return Err(Error::Parameter(format!("grid step epsilon = {epsilon} must be positive")));
    }
    Ok(())
}

fn check_value(value: &Exact) -> Result<()> {
    if value.is_negative() {
        return Err(Error::Parameter(format!("value {value} must be non-negative")));
    }
    Ok(())
}

/// Largest multiple of `epsilon` not exceeding `value`.
pub fn eps_net(value: &Exact, epsilon: &Exact) -> Result<Exact> {
    check_epsilon(epsilon)?;
    check_value(value)?;
    Ok(floor_to_grid(value, epsilon))
}

/// `{0, step, 2 step, ..., top}` for `top` on the grid.
fn grid_up_to(top: &Exact, step: &Exact) -> Vec<Exact> {
    let mut out = Vec::new();
    let mut x = Exact::zero();
    while x <= *top {
        out.push(x.clone());
        x += step;
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DfpaSpec {
    value: Exact,
    epsilon: Exact,
    nature_bid_cap: Exact,
}

impl DfpaSpec {
    pub fn new(value: Exact, epsilon: Exact, nature_bid_cap: Exact) -> Result<Self> {
        check_epsilon(&epsilon)?;
        check_value(&value)?;
        if nature_bid_cap < &value + &epsilon {
            return Err(Error::Parameter(format!(
                "nature bid cap {nature_bid_cap} must be at least value + epsilon = {}",
                &value + &epsilon
            )));
        }
        Ok(Self {
            value,
            epsilon,
            nature_bid_cap,
        })
    }

    /// Cap defaults to `value + 2 epsilon`, rounded up to the grid.
    pub fn with_default_cap(value: Exact, epsilon: Exact) -> Result<Self> {
        check_epsilon(&epsilon)?;
        let cap = ceil_to_grid(&(&value + &epsilon * int(2)), &epsilon);
        Self::new(value, epsilon, cap)
    }

    pub fn value(&self) -> &Exact {
        &self.value
    }

    pub fn epsilon(&self) -> &Exact {
        &self.epsilon
    }

    pub fn nature_bid_cap(&self) -> &Exact {
        &self.nature_bid_cap
    }

    pub fn bids(&self) -> Vec<Exact> {
        grid_up_to(&floor_to_grid(&self.value, &self.epsilon), &self.epsilon)
    }

    pub fn nature_bids(&self) -> Vec<Exact> {
        grid_up_to(&self.nature_bid_cap, &self.epsilon)
    }

    /// Nature states: no competing bid, then every grid bid up to the cap.
    pub fn nature_states(&self) -> Vec<Option<Exact>> {
        std::iter::once(None)
            .chain(self.nature_bids().into_iter().map(Some))
            .collect()
    }

    fn game(&self, label: &str, utility: impl Fn(&Exact, Option<&Exact>) -> Exact) -> AgentGame<Exact> {
        let bids = self.bids();
        let states = self.nature_states();
        let rows = bids
            .iter()
            .map(|b| states.iter().map(|s| utility(b, s.as_ref())).collect())
            .collect();
        AgentGame::new(
            format!("{label}(v={},eps={})", self.value, self.epsilon),
            bids.iter().map(ToString::to_string).collect(),
            states
                .iter()
                .map(|s| s.as_ref().map_or_else(|| NO_BID.to_string(), ToString::to_string))
                .collect(),
            rows,
        )
        .expect("grid labels are distinct")
    }
}

fn wins(bid: &Exact, top_other: Option<&Exact>) -> bool {
    top_other.map_or(true, |s| bid > s)
}

/// Winner pays her bid; ties go to nature.
pub fn first_price_utility(value: &Exact, bid: &Exact, top_other: Option<&Exact>) -> Exact {
    if wins(bid, top_other) {
        value - bid
    } else {
        Exact::zero()
    }
}

/// Everyone pays her bid; ties go to nature.
pub fn all_pay_utility(value: &Exact, bid: &Exact, top_other: Option<&Exact>) -> Exact {
    if wins(bid, top_other) {
        value - bid
    } else {
        -bid.clone()
    }
}

pub fn dfpa_game(spec: &DfpaSpec) -> AgentGame<Exact> {
    spec.game("dfpa", |b, s| first_price_utility(&spec.value, b, s))
}

pub fn dfpa_loss_averse_bid(value: &Exact, epsilon: &Exact) -> Result<Exact> {
    let net = eps_net(value, epsilon)?;
    Ok(if net != *value || net.is_zero() {
        net
    } else {
        net - epsilon
    })
}

pub fn dfpa_min_max_regret_bid(value: &Exact, epsilon: &Exact) -> Result<Exact> {
    check_value(value)?;
    eps_net(&(value / int(2)), epsilon)
}

/// All-pay game on the same grids as [`dfpa_game`].
pub fn all_pay_game(spec: &DfpaSpec) -> AgentGame<Exact> {
    spec.game("all-pay", |b, s| all_pay_utility(&spec.value, b, s))
}

pub fn all_pay_loss_averse_bid(_value: &Exact) -> Exact {
    Exact::zero()
}

/// A deviation and nature state showing `bid` is not loss-averse in the
/// continuous first-price auction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FpaWitness {
    pub value: Exact,
    pub bid: Exact,
    pub deviation: Exact,
    pub state: Exact,
    /// Minimum of `bid` over the difference set, realized at `state`.
    pub bid_min: Exact,
    /// Minimum of `deviation` over the difference set.
    pub deviation_min: Exact,
}

/// Minimum of `u(x, .)` over the states where bids `x` and `y` differ, in
/// the continuous first-price auction with competing bids in `[0, value]`.
///
/// Below `min(x, y)` both win at different prices. Between the two bids only
/// the higher one wins, which differs from losing unless it pays `value`.
pub fn fpa_min_over_difference(value: &Exact, x: &Exact, y: &Exact) -> Option<Exact> {
    if x == y {
        return None;
    }
    let (lo, hi) = if x < y { (x, y) } else { (y, x) };
    let mut mins = Vec::new();
    if lo.is_positive() {
        mins.push(value - x);
    }
    if hi != value {
        mins.push(if x == hi { value - x } else { Exact::zero() });
    }
    mins.into_iter().min()
}

impl FpaWitness {
    /// Re-derives both minima from the first-price utility.
    pub fn verify(&self) -> bool {
        let (v, b, d, s) = (&self.value, &self.bid, &self.deviation, &self.state);
        let in_difference_set = !s.is_negative()
            && s <= v
            && first_price_utility(v, b, Some(s)) != first_price_utility(v, d, Some(s));
        in_difference_set
            && first_price_utility(v, b, Some(s)) == self.bid_min
            && fpa_min_over_difference(v, b, d).as_ref() == Some(&self.bid_min)
            && fpa_min_over_difference(v, d, b).as_ref() == Some(&self.deviation_min)
            && self.bid_min < self.deviation_min
    }
}

pub fn fpa_no_loss_averse_witness(value: &Exact, bid: &Exact) -> Result<FpaWitness> {
    if !value.is_positive() {
        return Err(Error::Parameter(format!(
            "value {value} must be positive; with value 0 the only bid is 0"
        )));
    }
    if bid.is_negative() || bid > value {
        return Err(Error::Parameter(format!("bid {bid} must lie in [0, {value}]")));
    }
    let (deviation, state) = if bid < value {
        let d = (bid + value) / int(2);
        let s = (bid + &d) / int(2);
        (d, s)
    } else {
        (value / int(2), Exact::zero())
    };
    let witness = FpaWitness {
        value: value.clone(),
        bid: bid.clone(),
        bid_min: first_price_utility(value, bid, Some(&state)),
        deviation_min: value - &deviation,
        deviation,
        state,
    };
    debug_assert!(witness.verify());
    Ok(witness)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RevenueFloor {
    pub floor: Exact,
    pub realized: Exact,
    pub winner: usize,
    pub bids: Vec<Exact>,
}

/// Revenue bound `max v - epsilon` when every bidder plays her loss-averse
/// bid, checked against a simulated auction (ties to the lowest index).
pub fn dfpa_revenue_floor(values: &[Exact], epsilon: &Exact) -> Result<RevenueFloor> {
    if values.is_empty() {
        return Err(Error::Parameter("need at least one bidder".into()));
    }
    let bids = values
        .iter()
        .map(|v| dfpa_loss_averse_bid(v, epsilon))
        .collect::<Result<Vec<_>>>()?;
    let mut winner = 0;
    for (i, b) in bids.iter().enumerate() {
        if *b > bids[winner] {
            winner = i;
        }
    }
    let floor = values.iter().max().unwrap() - epsilon;
    let realized = bids[winner].clone();
    if realized < floor {
        return Err(Error::Consistency(format!(
            "realized revenue {realized} is below the floor {floor}"
        )));
    }
    Ok(RevenueFloor {
        floor,
        realized,
        winner,
        bids,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concepts::{
        individually_rational_actions, leximin_actions, loss_averse_actions, min_max_regret_actions,
        multi_leximin_actions, safety_level_actions,
    };
    use crate::scalar::rat;

    #[test]
    fn eps_net_cases() {
        assert_eq!(eps_net(&int(1), &rat(3, 10)).unwrap(), rat(9, 10));
        assert_eq!(eps_net(&int(0), &rat(1, 7)).unwrap(), int(0));
        assert_eq!(eps_net(&int(1), &rat(1, 4)).unwrap(), int(1));
        assert!(matches!(eps_net(&int(1), &int(0)), Err(Error::Parameter(_))));
    }

    #[test]
    fn dfpa_game_shape() {
        let spec = DfpaSpec::new(int(1), rat(3, 10), rat(3, 2)).unwrap();
        let g = dfpa_game(&spec);
        assert_eq!((g.action_count(), g.state_count()), (4, 7));
        assert_eq!(g.utility("0", NO_BID).unwrap(), int(1));
        assert_eq!(g.utility("9/10", "3/5").unwrap(), rat(1, 10));
        assert_eq!(g.utility("3/5", "3/5").unwrap(), int(0));
        assert_eq!(loss_averse_actions(&g), ["9/10"]);
        assert_eq!(min_max_regret_actions(&g), ["3/10"]);
        assert_eq!(leximin_actions(&g), ["0"]);
        assert_eq!(multi_leximin_actions(&g), ["9/10"]);
        assert_eq!(safety_level_actions(&g).len(), 4);
        assert!(DfpaSpec::new(int(1), rat(3, 10), int(1)).is_err());
        assert_eq!(DfpaSpec::with_default_cap(int(1), rat(3, 10)).unwrap().nature_bid_cap(), &rat(9, 5));
    }

    #[test]
    fn verdicts_ignore_larger_caps() {
        for (v, e) in [(int(1), rat(3, 10)), (rat(2, 3), rat(1, 6)), (int(0), rat(1, 4))] {
            let base = dfpa_game(&DfpaSpec::with_default_cap(v.clone(), e.clone()).unwrap());
            for extra in 1..=4 {
                let cap = &v + &e * int(2 + extra);
                let g = dfpa_game(&DfpaSpec::new(v.clone(), e.clone(), cap).unwrap());
                assert_eq!(loss_averse_actions(&g), loss_averse_actions(&base));
                assert_eq!(min_max_regret_actions(&g), min_max_regret_actions(&base));
                assert_eq!(multi_leximin_actions(&g), multi_leximin_actions(&base));
            }
        }
    }

    #[test]
    fn closed_forms() {
        assert_eq!(dfpa_loss_averse_bid(&int(1), &rat(3, 10)).unwrap(), rat(9, 10));
        assert_eq!(dfpa_loss_averse_bid(&int(0), &rat(1, 4)).unwrap(), int(0));
        assert_eq!(dfpa_loss_averse_bid(&int(1), &rat(1, 4)).unwrap(), rat(3, 4));
        assert_eq!(dfpa_min_max_regret_bid(&int(1), &rat(3, 10)).unwrap(), rat(3, 10));
        assert_eq!(dfpa_min_max_regret_bid(&int(2), &rat(3, 10)).unwrap(), rat(9, 10));
        assert_eq!(dfpa_min_max_regret_bid(&int(0), &rat(3, 10)).unwrap(), int(0));
    }

    #[test]
    fn fpa_witnesses() {
        let w = fpa_no_loss_averse_witness(&int(1), &rat(1, 2)).unwrap();
        assert_eq!((w.deviation.clone(), w.state.clone()), (rat(3, 4), rat(5, 8)));
        assert_eq!((w.bid_min.clone(), w.deviation_min.clone()), (int(0), rat(1, 4)));
        let w = fpa_no_loss_averse_witness(&int(1), &int(1)).unwrap();
        assert_eq!((w.deviation.clone(), w.state.clone()), (rat(1, 2), int(0)));
        assert!(w.verify());
        let w = fpa_no_loss_averse_witness(&int(1), &int(0)).unwrap();
        assert_eq!((w.deviation.clone(), w.state.clone(), w.deviation_min.clone()), (rat(1, 2), rat(1, 4), rat(1, 2)));
        assert!(fpa_no_loss_averse_witness(&int(0), &int(0)).is_err());
        let mut bad = w;
        bad.deviation_min = int(0);
        assert!(!bad.verify());
    }

    #[test]
    fn all_pay() {
        let spec = DfpaSpec::new(int(1), rat(1, 4), rat(3, 2)).unwrap();
        let g = all_pay_game(&spec);
        assert_eq!(loss_averse_actions(&g), ["0"]);
        assert_eq!(individually_rational_actions(&g), ["0"]);
        assert_eq!(all_pay_loss_averse_bid(&int(5)), int(0));
    }

    #[test]
    fn revenue_floor() {
        let r = dfpa_revenue_floor(&[int(1), rat(7, 10)], &rat(3, 10)).unwrap();
        assert_eq!((r.floor, r.realized), (rat(7, 10), rat(9, 10)));
        let r = dfpa_revenue_floor(&[int(0)], &rat(3, 10)).unwrap();
        assert_eq!((r.floor, r.realized), (rat(-3, 10), int(0)));
        let r = dfpa_revenue_floor(&[int(1), int(1)], &rat(1, 4)).unwrap();
        assert_eq!((r.realized, r.winner), (rat(3, 4), 0));
    }
}

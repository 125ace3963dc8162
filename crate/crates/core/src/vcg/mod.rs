//! Discrete VCG combinatorial auctions with Sybil (false-name) bids.
//!
//! Items are indexed `0..m` with `m <= 8`; a bundle is a bit mask. Agent 0 of
//! a profile list is, by convention, the agent whose strategy is under study.

mod attack;
mod enumerate;
mod examples;
mod instance;
mod wd;

pub use attack::{
    best_partition_value, classify_attack, exact_bidding_optimal, overbidding_adversary, truth_loss_averse_witnesses,
    underbidding_adversary, utility_against, AdversaryShape, AttackClass, AttackKind, OverbiddingCertificate,
    TruthCase, TruthCertificate, UnderbiddingCertificate, WelfareChain,
};
pub use enumerate::{
    enumerate_attacks, enumerate_instances, enumerate_valuations, nature_family, random_instance, EnumerationSpec,
    ENUMERATION_BUDGET,
};
pub use examples::{
    build_example_e1, build_example_e2, example_e1_report, ExampleE1, ExampleE1Report, ExampleE2, XosValuation,
};
pub use instance::{outcome_csv, outcome_to_json, AgentEntry, VcgInstance, INSTANCE_SCHEMA, OUTCOME_SCHEMA};
pub use wd::{optimal_welfare, run_vcg, vcg_payments, winner_determination, Allocation, PaymentRule, VcgOutcome};

use std::fmt;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::{factorial, on_grid, Exact};

/// Subset of items as a bit mask.
pub type Bundle = u16;

pub const MAX_ITEMS: usize = 8;

/// Exhaustive-search budget for `bids^items`.
pub const SEARCH_BUDGET: u128 = 10_000_000;

pub fn full_bundle(item_count: usize) -> Bundle {
    ((1u32 << item_count) - 1) as Bundle
}

pub fn bundle_size(b: Bundle) -> usize {
    b.count_ones() as usize
}

/// Every subset of `set`, including the empty set and `set` itself.
pub fn subsets(set: Bundle) -> impl Iterator<Item = Bundle> {
    let mut next = Some(set);
    std::iter::from_fn(move || {
        let current = next?;
        next = if current == 0 { None } else { Some((current - 1) & set) };
        Some(current)
    })
}

/// `{a,c}`-style rendering with items named `a`, `b`, ...
pub fn bundle_label(b: Bundle) -> String {
    let names: Vec<String> = (0..16)
        .filter(|i| b & (1 << i) != 0)
        .map(|i| ((b'a' + i as u8) as char).to_string())
        .collect();
    format!("{{{}}}", names.join(","))
}

/// A value for every bundle of `m` items, with the empty bundle worth 0.
///
/// Used for both true valuations and bids; they differ only in the grid their
/// entries must lie on.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BundleValues {
    item_count: usize,
    values: Vec<Exact>,
}

pub type CombValuation = BundleValues;
pub type CombBid = BundleValues;

impl fmt::Debug for BundleValues {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let entries: Vec<String> = (1..self.values.len())
            .map(|s| format!("{}={}", bundle_label(s as Bundle), self.values[s]))
            .collect();
        write!(f, "[{}]", entries.join(" "))
    }
}

pub fn check_item_count(item_count: usize) -> Result<()> {
    if item_count == 0 || item_count > MAX_ITEMS {
        return Err(Error::Capacity(format!(
            "item count {item_count} outside the supported range 1..={MAX_ITEMS}"
        )));
    }
    Ok(())
}

impl BundleValues {
    /// `values[mask]` for every mask; `values[0]` must be 0.
    pub fn new(item_count: usize, values: Vec<Exact>) -> Result<Self> {
        check_item_count(item_count)?;
        if values.len() != 1 << item_count {
            return Err(Error::Shape(format!(
                "{} items need {} bundle values, got {}",
                item_count,
                1 << item_count,
                values.len()
            )));
        }
        if !values[0].is_zero() {
            return Err(Error::Parameter(format!("empty bundle must be worth 0, got {}", values[0])));
        }
        if let Some(v) = values.iter().find(|v| v.is_negative()) {
            return Err(Error::Parameter(format!("bundle values must be non-negative, got {v}")));
        }
        Ok(Self { item_count, values })
    }

    pub fn from_fn(item_count: usize, f: impl Fn(Bundle) -> Exact) -> Result<Self> {
        check_item_count(item_count)?;
        let values = (0..1u32 << item_count)
            .map(|s| if s == 0 { Exact::zero() } else { f(s as Bundle) })
            .collect();
        Self::new(item_count, values)
    }

    pub fn additive(per_item: &[Exact]) -> Result<Self> {
        Self::from_fn(per_item.len(), |s| {
            (0..per_item.len())
                .filter(|i| s & (1 << i) != 0)
                .map(|i| per_item[i].clone())
                .sum()
        })
    }

    pub fn zero(item_count: usize) -> Result<Self> {
        Self::from_fn(item_count, |_| Exact::zero())
    }

    pub fn item_count(&self) -> usize {
        self.item_count
    }

    pub fn value(&self, bundle: Bundle) -> &Exact {
        &self.values[bundle as usize]
    }

    pub fn values(&self) -> &[Exact] {
        &self.values
    }

    pub fn is_additive(&self) -> bool {
        (1..self.values.len()).all(|s| {
            let s = s as Bundle;
            let sum: Exact = (0..self.item_count)
                .filter(|i| s & (1 << i) != 0)
                .map(|i| self.values[1 << i].clone())
                .sum();
            sum == self.values[s as usize]
        })
    }

    pub fn on_grid(&self, step: &Exact) -> bool {
        self.values.iter().all(|v| on_grid(v, step))
    }
}

/// Step of the valuation grid is `epsilon`; bids use `epsilon / (2 m!)`.
pub fn bid_grid_step(epsilon: &Exact, item_count: usize) -> Exact {
    epsilon / (factorial(item_count) * Exact::from_integer(2.into()))
}

/// True valuation plus the bids an agent submits (one bid when truthful).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SybilProfile {
    pub valuation: CombValuation,
    pub bids: Vec<CombBid>,
}

impl SybilProfile {
    pub fn new(valuation: CombValuation, bids: Vec<CombBid>) -> Result<Self> {
        if bids.is_empty() {
            return Err(Error::Parameter("a Sybil profile needs at least one bid".into()));
        }
        if let Some(b) = bids.iter().find(|b| b.item_count() != valuation.item_count()) {
            return Err(Error::Shape(format!(
                "bid over {} items does not match valuation over {}",
                b.item_count(),
                valuation.item_count()
            )));
        }
        Ok(Self { valuation, bids })
    }

    pub fn truthful(valuation: CombValuation) -> Self {
        Self {
            bids: vec![valuation.clone()],
            valuation,
        }
    }

    /// A single bidder whose bid is also her valuation; used for nature.
    pub fn nature(bid: CombBid) -> Self {
        Self::truthful(bid)
    }

    pub fn is_truthful(&self) -> bool {
        self.bids.len() == 1 && self.bids[0] == self.valuation
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    #[test]
    fn subset_iteration() {
        let all: Vec<Bundle> = subsets(0b101).collect();
        assert_eq!(all, vec![0b101, 0b100, 0b001, 0]);
        assert_eq!(subsets(0).count(), 1);
        assert_eq!(bundle_label(0b101), "{a,c}");
    }

    #[test]
    fn bundle_values() {
        let v = BundleValues::additive(&[int(1), int(2)]).unwrap();
        assert_eq!(v.value(0b11), &int(3));
        assert!(v.is_additive());
        assert!(BundleValues::new(2, vec![int(0); 3]).is_err());
        assert!(BundleValues::new(1, vec![int(1), int(1)]).is_err());
        assert!(BundleValues::new(1, vec![int(0), int(-1)]).is_err());
        assert!(matches!(BundleValues::zero(9), Err(Error::Capacity(_))));
        assert_eq!(bid_grid_step(&int(1), 3), rat(1, 12));
        assert!(v.on_grid(&int(1)));
    }

    #[test]
    fn profiles() {
        let v = BundleValues::additive(&[int(1)]).unwrap();
        assert!(SybilProfile::truthful(v.clone()).is_truthful());
        assert!(SybilProfile::new(v.clone(), vec![]).is_err());
        let w = BundleValues::additive(&[int(1), int(1)]).unwrap();
        assert!(matches!(SybilProfile::new(v, vec![w]), Err(Error::Shape(_))));
    }
}

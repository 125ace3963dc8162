//! Winner determination, payments and full mechanism runs.

use std::cmp::Ordering;

use num_traits::Zero;

use super::{bundle_size, check_item_count, full_bundle, subsets, Bundle, CombBid, SybilProfile, SEARCH_BUDGET};
use crate::error::{Error, Result};
use crate::scalar::Exact;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PaymentRule {
    /// `SW - W*(M \ own bundle)`, the optimum over all bids on the items left.
    PaperLiteral,
    /// Externality form `W*_{-j}(M) - (SW - b_j(own bundle))`.
    ClarkePivot,
}

impl std::str::FromStr for PaymentRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" | "paper-literal" => Ok(PaymentRule::PaperLiteral),
            "clarke" | "clarke-pivot" => Ok(PaymentRule::ClarkePivot),
            _ => Err(Error::Parse(format!("unknown payment rule `{s}` (expected paper or clarke)"))),
        }
    }
}

impl std::fmt::Display for PaymentRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PaymentRule::PaperLiteral => "paper",
            PaymentRule::ClarkePivot => "clarke",
        })
    }
}

/// Partition of the items among a flat list of bids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Allocation {
    item_count: usize,
    assignment: Vec<usize>,
    bundles: Vec<Bundle>,
}

impl Allocation {
    fn from_bundles(item_count: usize, bundles: Vec<Bundle>) -> Self {
        let assignment = (0..item_count)
            .map(|g| bundles.iter().position(|b| b & (1 << g) != 0).unwrap_or(usize::MAX))
            .collect();
        Self {
            item_count,
            assignment,
            bundles,
        }
    }

    pub fn item_count(&self) -> usize {
        self.item_count
    }

    /// Bid index receiving each item.
    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn bundle(&self, bid: usize) -> Bundle {
        self.bundles[bid]
    }

    pub fn bundles(&self) -> &[Bundle] {
        &self.bundles
    }

    pub fn observed_welfare(&self, bids: &[&CombBid]) -> Exact {
        bids.iter()
            .zip(&self.bundles)
            .map(|(b, s)| b.value(*s).clone())
            .sum()
    }

    /// Bundle sizes in descending order; larger is preferred on ties.
    fn size_profile(&self) -> Vec<usize> {
        let mut sizes: Vec<usize> = self.bundles.iter().map(|b| bundle_size(*b)).collect();
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        sizes
    }
}

fn check_budget(bid_count: usize, item_count: usize) -> Result<()> {
    check_item_count(item_count)?;
    let size = (bid_count as u128).pow(item_count as u32);
    if size > SEARCH_BUDGET {
        return Err(Error::Capacity(format!(
            "{bid_count} bids over {item_count} items span {size} assignments (limit {SEARCH_BUDGET})"
        )));
    }
    Ok(())
}

/// `table[k][S]`: best value of giving all of `S` to bids `k..`; `None` when infeasible.
fn suffix_table(bids: &[&CombBid], item_count: usize) -> Vec<Vec<Option<Exact>>> {
    let width = 1usize << item_count;
    let n = bids.len();
    let mut table = vec![vec![None; width]; n + 1];
    table[n][0] = Some(Exact::zero());
    for k in (0..n).rev() {
        for s in 0..width {
            let mut best: Option<Exact> = None;
            for t in subsets(s as Bundle) {
                if let Some(rest) = &table[k + 1][s & !(t as usize)] {
                    let v = bids[k].value(t) + rest;
                    if best.as_ref().map_or(true, |b| v > *b) {
                        best = Some(v);
                    }
                }
            }
            table[k][s] = best;
        }
    }
    table
}

/// Best observed welfare of allocating exactly `items` among `bids`.
///
/// With no bids at all the items stay with the auctioneer and the value is 0.
pub fn optimal_welfare(bids: &[&CombBid], items: Bundle, item_count: usize) -> Result<Exact> {
    if bids.is_empty() {
        return Ok(Exact::zero());
    }
    check_budget(bids.len(), item_count)?;
    let table = suffix_table(bids, item_count);
    Ok(table[0][items as usize].clone().expect("the first bid can absorb any bundle"))
}

struct Search<'a> {
    bids: &'a [&'a CombBid],
    table: &'a [Vec<Option<Exact>>],
    item_count: usize,
    current: Vec<Bundle>,
    best: Option<Allocation>,
}

impl Search<'_> {
    fn run(&mut self, k: usize, remaining: Bundle) {
        if k == self.bids.len() {
            let candidate = Allocation::from_bundles(self.item_count, self.current.clone());
            let better = match &self.best {
                None => true,
                Some(best) => match candidate.size_profile().cmp(&best.size_profile()) {
                    Ordering::Greater => true,
                    Ordering::Less => false,
                    Ordering::Equal => candidate.assignment < best.assignment,
                },
            };
            if better {
                self.best = Some(candidate);
            }
            return;
        }
        let target = self.table[k][remaining as usize].clone().expect("only feasible states are visited");
        for t in subsets(remaining) {
            if let Some(rest) = &self.table[k + 1][(remaining & !t) as usize] {
                if self.bids[k].value(t) + rest == target {
                    self.current[k] = t;
                    self.run(k + 1, remaining & !t);
                }
            }
        }
        self.current[k] = 0;
    }
}

/// Optimal value of every item set among `bids` (`result[S]`).
pub(crate) fn subset_optima(bids: &[&CombBid], item_count: usize) -> Result<Vec<Exact>> {
    check_budget(bids.len(), item_count)?;
    Ok(suffix_table(bids, item_count)
        .swap_remove(0)
        .into_iter()
        .map(|v| v.expect("the first bid can absorb any bundle"))
        .collect())
}

/// Tie-broken optimal partition of `items` among `bids`, one bundle per bid.
pub(crate) fn best_partition(bids: &[&CombBid], items: Bundle, item_count: usize) -> Result<Vec<Bundle>> {
    if bids.is_empty() {
        return Err(Error::Parameter("winner determination needs at least one bid".into()));
    }
    check_budget(bids.len(), item_count)?;
    if let Some(b) = bids.iter().find(|b| b.item_count() != item_count) {
        return Err(Error::Shape(format!("bid over {} items in a {item_count}-item auction", b.item_count())));
    }
    let table = suffix_table(bids, item_count);
    let mut search = Search {
        bids,
        table: &table,
        item_count,
        current: vec![0; bids.len()],
        best: None,
    };
    search.run(0, items);
    Ok(search.best.expect("some optimal partition exists").bundles)
}

/// Welfare-maximizing partition of all items among `bids`.
///
/// Among optimal partitions the one whose bundle sizes, sorted descending, are
/// lexicographically largest wins; remaining ties go to the lexicographically
/// smallest item-to-bid assignment.
pub fn winner_determination(bids: &[&CombBid], item_count: usize) -> Result<Allocation> {
    let bundles = best_partition(bids, full_bundle(item_count), item_count)?;
    Ok(Allocation::from_bundles(item_count, bundles))
}

/// Per-bid payments for an allocation that must be optimal for `bids`.
pub fn vcg_payments(bids: &[&CombBid], allocation: &Allocation, rule: PaymentRule) -> Result<Vec<Exact>> {
    let m = allocation.item_count();
    if allocation.bundles().len() != bids.len() {
        return Err(Error::Shape(format!(
            "allocation covers {} bids, {} submitted",
            allocation.bundles().len(),
            bids.len()
        )));
    }
    check_budget(bids.len(), m)?;
    let table = suffix_table(bids, m);
    let welfare = allocation.observed_welfare(bids);
    let optimum = table[0][full_bundle(m) as usize].clone().unwrap();
    if welfare != optimum {
        return Err(Error::Consistency(format!(
            "allocation welfare {welfare} is not the optimum {optimum} for these bids"
        )));
    }
    let payments = (0..bids.len())
        .map(|j| match rule {
            PaymentRule::PaperLiteral => {
                let rest = full_bundle(m) & !allocation.bundle(j);
                &welfare - table[0][rest as usize].as_ref().unwrap()
            }
            PaymentRule::ClarkePivot => {
                let others: Vec<&CombBid> = bids.iter().enumerate().filter(|(i, _)| *i != j).map(|(_, b)| *b).collect();
                let without = optimal_welfare(&others, full_bundle(m), m).expect("budget already checked");
                without - (&welfare - bids[j].value(allocation.bundle(j)))
            }
        })
        .collect();
    Ok(payments)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VcgOutcome {
    pub rule: PaymentRule,
    pub allocation: Allocation,
    /// `(agent, sybil)` for each flat bid index.
    pub owners: Vec<(usize, usize)>,
    /// `payments[agent][sybil]`.
    pub payments: Vec<Vec<Exact>>,
    pub observed_welfare: Exact,
    pub real_welfare: Exact,
    pub agent_bundles: Vec<Bundle>,
    pub utilities: Vec<Exact>,
}

impl VcgOutcome {
    pub fn sybil_bundle(&self, agent: usize, sybil: usize) -> Bundle {
        let flat = self.owners.iter().position(|o| *o == (agent, sybil)).expect("known bidder");
        self.allocation.bundle(flat)
    }

    pub fn total_payment(&self, agent: usize) -> Exact {
        self.payments[agent].iter().cloned().sum()
    }
}

/// Flattens every agent's bids, allocates, charges and evaluates true utilities.
pub fn run_vcg(profiles: &[SybilProfile], item_count: usize, rule: PaymentRule) -> Result<VcgOutcome> {
    if let Some(p) = profiles.iter().find(|p| p.valuation.item_count() != item_count) {
        return Err(Error::Shape(format!(
            "valuation over {} items in a {item_count}-item auction",
            p.valuation.item_count()
        )));
    }
    let mut owners = Vec::new();
    let mut bids = Vec::new();
    for (i, p) in profiles.iter().enumerate() {
        for (j, b) in p.bids.iter().enumerate() {
            owners.push((i, j));
            bids.push(b);
        }
    }
    let allocation = winner_determination(&bids, item_count)?;
    let flat_payments = vcg_payments(&bids, &allocation, rule)?;
    let mut payments: Vec<Vec<Exact>> = profiles.iter().map(|p| vec![Exact::zero(); p.bids.len()]).collect();
    let mut agent_bundles = vec![0 as Bundle; profiles.len()];
    for (flat, &(i, j)) in owners.iter().enumerate() {
        payments[i][j] = flat_payments[flat].clone();
        agent_bundles[i] |= allocation.bundle(flat);
    }
    let real_welfare = profiles
        .iter()
        .zip(&agent_bundles)
        .map(|(p, s)| p.valuation.value(*s).clone())
        .sum();
    let utilities = profiles
        .iter()
        .enumerate()
        .map(|(i, p)| p.valuation.value(agent_bundles[i]) - payments[i].iter().cloned().sum::<Exact>())
        .collect();
    Ok(VcgOutcome {
        rule,
        observed_welfare: allocation.observed_welfare(&bids),
        allocation,
        owners,
        payments,
        real_welfare,
        agent_bundles,
        utilities,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;
    use crate::vcg::BundleValues;

    fn additive(v: &[i64]) -> CombBid {
        BundleValues::additive(&v.iter().map(|x| int(*x)).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn single_bidder_takes_everything() {
        let b = additive(&[0, 0, 0]);
        let a = winner_determination(&[&b], 3).unwrap();
        assert_eq!(a.bundle(0), 0b111);
        let p = vcg_payments(&[&b], &a, PaymentRule::ClarkePivot).unwrap();
        assert_eq!(p, vec![int(0)]);
    }

    #[test]
    fn disjoint_single_minded_bidders_pay_nothing() {
        let x = BundleValues::from_fn(2, |s| if s & 1 != 0 { int(3) } else { int(0) }).unwrap();
        let y = BundleValues::from_fn(2, |s| if s & 2 != 0 { int(5) } else { int(0) }).unwrap();
        let out = run_vcg(
            &[SybilProfile::truthful(x), SybilProfile::truthful(y)],
            2,
            PaymentRule::ClarkePivot,
        )
        .unwrap();
        assert_eq!(out.agent_bundles, vec![0b01, 0b10]);
        assert_eq!(out.payments, vec![vec![int(0)], vec![int(0)]]);
        assert_eq!(out.real_welfare, int(8));
    }

    #[test]
    fn ties_prefer_larger_bundles_then_low_indices() {
        // Both bids value everything at 0: one bid takes all items.
        let z = additive(&[0, 0]);
        let a = winner_determination(&[&z, &z], 2).unwrap();
        assert_eq!(a.bundles(), &[0b11, 0]);
        // Splitting and bundling tie at 2; the bundle wins.
        let whole = BundleValues::from_fn(2, |s| if s == 0b11 { int(2) } else { int(0) }).unwrap();
        let split = additive(&[1, 1]);
        let a = winner_determination(&[&split, &whole], 2).unwrap();
        assert_eq!(a.size_profile(), vec![2, 0]);
        assert_eq!(a.assignment(), &[0, 0]);
    }

    #[test]
    fn second_price_on_one_item() {
        let x = additive(&[5]);
        let y = additive(&[3]);
        let out = run_vcg(
            &[SybilProfile::truthful(x.clone()), SybilProfile::truthful(y.clone())],
            1,
            PaymentRule::ClarkePivot,
        )
        .unwrap();
        assert_eq!(out.payments[0], vec![int(3)]);
        assert_eq!(out.utilities, vec![int(2), int(0)]);
        let out = run_vcg(&[SybilProfile::truthful(x), SybilProfile::truthful(y)], 1, PaymentRule::PaperLiteral).unwrap();
        assert_eq!(out.payments[0], vec![int(5)]);
    }

    #[test]
    fn stale_allocation_rejected() {
        let x = additive(&[5]);
        let y = additive(&[3]);
        let a = winner_determination(&[&x, &y], 1).unwrap();
        let swapped = winner_determination(&[&y, &x], 1).unwrap();
        assert_ne!(a, swapped);
        assert!(matches!(
            vcg_payments(&[&x, &y], &swapped, PaymentRule::ClarkePivot),
            Err(Error::Consistency(_))
        ));
    }

    #[test]
    fn budget_guard() {
        let b = additive(&[0; 8]);
        let bids: Vec<&CombBid> = std::iter::repeat(&b).take(8).collect();
        assert!(matches!(winner_determination(&bids, 8), Err(Error::Capacity(_))));
        assert_eq!(optimal_welfare(&[], 0b1, 1).unwrap(), int(0));
    }
}

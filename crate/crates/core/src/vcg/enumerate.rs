//! Deterministic enumeration of small valuations, Sybil attacks and nature states.

use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::attack::{classify_attack, AttackKind};
use super::{check_item_count, full_bundle, BundleValues, CombBid, CombValuation};
use crate::error::{Error, Result};
use crate::scalar::{int, Exact};

/// Upper bound on the number of objects any single enumeration may produce.
pub const ENUMERATION_BUDGET: u128 = 200_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnumerationSpec {
    pub item_count: usize,
    pub max_agents: usize,
    pub value_cap: Exact,
    pub epsilon: Exact,
    pub max_sybils: usize,
    /// Grid for enumerated Sybil bids; defaults to `epsilon`.
    pub bid_step: Exact,
}

impl EnumerationSpec {
    pub fn new(item_count: usize, max_agents: usize, value_cap: Exact, epsilon: Exact, max_sybils: usize) -> Result<Self> {
        check_item_count(item_count)?;
        if item_count > 3 || max_agents == 0 || max_agents > 3 || max_sybils == 0 || max_sybils > 2 {
            return Err(Error::Capacity(format!(
                "enumeration supports m <= 3, 1..=3 agents and 1..=2 Sybils (got m={item_count}, agents={max_agents}, sybils={max_sybils})"
            )));
        }
        if !epsilon.is_positive() || value_cap.is_negative() {
            return Err(Error::Parameter("epsilon must be positive and the value cap non-negative".into()));
        }
        Ok(Self {
            item_count,
            max_agents,
            value_cap,
            bid_step: epsilon.clone(),
            epsilon,
            max_sybils,
        })
    }

    pub fn with_bid_step(mut self, step: Exact) -> Result<Self> {
        if !step.is_positive() {
            return Err(Error::Parameter(format!("bid step {step} must be positive")));
        }
        self.bid_step = step;
        Ok(self)
    }

    fn levels(&self, step: &Exact) -> Vec<Exact> {
        let top = (&self.value_cap / step).floor().to_integer().to_u64().unwrap_or(0);
        (0..=top).map(|k| step * int(k as i64)).collect()
    }
}

fn count_tables(levels: usize, item_count: usize) -> u128 {
    (levels as u128).saturating_pow((1u32 << item_count) - 1)
}

/// Every bundle table with entries drawn from `levels`, in odometer order.
fn all_tables(item_count: usize, levels: &[Exact]) -> Result<Vec<BundleValues>> {
    let cells = (1usize << item_count) - 1;
    let total = count_tables(levels.len(), item_count);
    if total > ENUMERATION_BUDGET {
        return Err(Error::Capacity(format!(
            "{total} bundle tables exceed the enumeration budget {ENUMERATION_BUDGET}"
        )));
    }
    let mut digits = vec![0usize; cells];
    let mut out = Vec::with_capacity(total as usize);
    loop {
        let mut values = vec![Exact::zero()];
        values.extend(digits.iter().map(|&d| levels[d].clone()));
        out.push(BundleValues::new(item_count, values)?);
        let mut k = 0;
        while k < cells {
            digits[k] += 1;
            if digits[k] < levels.len() {
                break;
            }
            digits[k] = 0;
            k += 1;
        }
        if k == cells {
            return Ok(out);
        }
    }
}

/// All valuations on the `epsilon` grid with entries up to the cap.
pub fn enumerate_valuations(spec: &EnumerationSpec) -> Result<Vec<CombValuation>> {
    all_tables(spec.item_count, &spec.levels(&spec.epsilon))
}

/// Every multiset of 1..=max_sybils bids on the bid grid up to the cap.
pub fn enumerate_attacks(spec: &EnumerationSpec) -> Result<Vec<Vec<CombBid>>> {
    let bids = all_tables(spec.item_count, &spec.levels(&spec.bid_step))?;
    let n = bids.len() as u128;
    let total = if spec.max_sybils == 1 { n } else { n + n * (n + 1) / 2 };
    if total > ENUMERATION_BUDGET {
        return Err(Error::Capacity(format!(
            "{total} attack vectors exceed the enumeration budget {ENUMERATION_BUDGET}"
        )));
    }
    let mut out: Vec<Vec<CombBid>> = bids.iter().map(|b| vec![b.clone()]).collect();
    if spec.max_sybils >= 2 {
        for i in 0..bids.len() {
            for j in i..bids.len() {
                out.push(vec![bids[i].clone(), bids[j].clone()]);
            }
        }
    }
    Ok(out)
}

/// `(valuation, attack)` pairs, optionally restricted to one attack class.
pub fn enumerate_instances(
    spec: &EnumerationSpec,
    filter: Option<AttackKind>,
) -> Result<Vec<(CombValuation, Vec<CombBid>)>> {
    let valuations = enumerate_valuations(spec)?;
    let attacks = enumerate_attacks(spec)?;
    let mut out = Vec::new();
    for v in &valuations {
        for a in &attacks {
            if filter.map_or(true, |k| classify_attack(v, a).map(|c| c.kind == k).unwrap_or(false)) {
                out.push((v.clone(), a.clone()));
            }
        }
    }
    Ok(out)
}

/// Single-bidder nature states: additive bids on the `epsilon/2` grid up to
/// `cap + epsilon`, single-minded bids for each bundle on the same grid, and,
/// when small enough, every bundle table on the `epsilon` grid up to that bound.
pub fn nature_family(item_count: usize, epsilon: &Exact, cap: &Exact) -> Result<Vec<CombBid>> {
    check_item_count(item_count)?;
    if !epsilon.is_positive() {
        return Err(Error::Parameter(format!("epsilon {epsilon} must be positive")));
    }
    let top = cap + epsilon;
    let half = epsilon / int(2);
    let fine = levels_up_to(&top, &half);
    let mut out = Vec::new();
    let additive_count = (fine.len() as u128).saturating_pow(item_count as u32);
    if additive_count > ENUMERATION_BUDGET {
        return Err(Error::Capacity(format!("{additive_count} additive nature states exceed the budget")));
    }
    let mut digits = vec![0usize; item_count];
    loop {
        let per_item: Vec<Exact> = digits.iter().map(|&d| fine[d].clone()).collect();
        out.push(BundleValues::additive(&per_item)?);
        let mut k = 0;
        while k < item_count {
            digits[k] += 1;
            if digits[k] < fine.len() {
                break;
            }
            digits[k] = 0;
            k += 1;
        }
        if k == item_count {
            break;
        }
    }
    for set in 1..=full_bundle(item_count) {
        if set.count_ones() < 2 {
            continue;
        }
        for x in fine.iter().skip(1) {
            out.push(BundleValues::from_fn(item_count, |t| {
                if t & set == set {
                    x.clone()
                } else {
                    Exact::zero()
                }
            })?);
        }
    }
    let coarse = levels_up_to(&top, epsilon);
    if count_tables(coarse.len(), item_count) <= 5_000 {
        for b in all_tables(item_count, &coarse)? {
            if !out.contains(&b) {
                out.push(b);
            }
        }
    }
    Ok(out)
}

fn levels_up_to(top: &Exact, step: &Exact) -> Vec<Exact> {
    let n = (top / step).floor().to_integer().to_u64().unwrap_or(0);
    (0..=n).map(|k| step * int(k as i64)).collect()
}

/// `max_agents` random valuations on the `epsilon` grid, reproducible from `seed`.
pub fn random_instance(spec: &EnumerationSpec, seed: u64) -> Result<Vec<CombValuation>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let levels = spec.levels(&spec.epsilon);
    (0..spec.max_agents)
        .map(|_| {
            let values: Vec<Exact> = (0..1usize << spec.item_count)
                .map(|s| if s == 0 { Exact::zero() } else { levels[rng.gen_range(0..levels.len())].clone() })
                .collect();
            BundleValues::new(spec.item_count, values)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(m: usize, cap: i64, sybils: usize) -> EnumerationSpec {
        EnumerationSpec::new(m, 2, int(cap), int(1), sybils).unwrap()
    }

    #[test]
    fn single_item_lattice() {
        let s = spec(1, 2, 1);
        let attacks = enumerate_attacks(&s).unwrap();
        let values: Vec<Exact> = attacks.iter().map(|a| a[0].value(1).clone()).collect();
        assert_eq!(values, vec![int(0), int(1), int(2)]);
        assert_eq!(enumerate_valuations(&s).unwrap().len(), 3);
    }

    #[test]
    fn two_item_counts() {
        let s = spec(2, 2, 2);
        assert_eq!(enumerate_valuations(&s).unwrap().len(), 27);
        assert_eq!(enumerate_attacks(&s).unwrap().len(), 27 + 27 * 28 / 2);
    }

    #[test]
    fn exact_decompositions_regression() {
        let s = spec(2, 2, 2);
        let v = BundleValues::additive(&[int(1), int(1)]).unwrap();
        let exact_pairs = enumerate_attacks(&s)
            .unwrap()
            .into_iter()
            .filter(|a| a.len() == 2 && classify_attack(&v, a).unwrap().kind == AttackKind::ExactBidding)
            .count();
        assert_eq!(exact_pairs, EXACT_PAIRS_M2);
    }

    const EXACT_PAIRS_M2: usize = 38;

    #[test]
    fn budget_and_ranges() {
        assert!(matches!(EnumerationSpec::new(4, 2, int(1), int(1), 1), Err(Error::Capacity(_))));
        let big = spec(3, 5, 2);
        assert!(matches!(enumerate_valuations(&big), Err(Error::Capacity(_))));
    }

    #[test]
    fn deterministic() {
        let s = spec(2, 2, 2);
        assert_eq!(enumerate_instances(&s, Some(AttackKind::Underbidding)).unwrap().len(),
            enumerate_instances(&s, Some(AttackKind::Underbidding)).unwrap().len());
        assert_eq!(random_instance(&s, 7).unwrap(), random_instance(&s, 7).unwrap());
        let fam = nature_family(2, &int(1), &int(2)).unwrap();
        assert_eq!(fam, nature_family(2, &int(1), &int(2)).unwrap());
        assert!(fam.len() > 49);
    }
}

//! Sybil attack classification and the adversaries that refute non-exact attacks.

use num_traits::{Signed, Zero};

use super::wd::{run_vcg, subset_optima, winner_determination, PaymentRule};
use super::{bid_grid_step, bundle_size, full_bundle, subsets, Bundle, BundleValues, CombBid, CombValuation, SybilProfile};
use crate::error::{Error, Result};
use crate::scalar::{floor_to_grid, int, Exact, Extended};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AttackKind {
    Overbidding,
    Underbidding,
    ExactBidding,
}

impl std::fmt::Display for AttackKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AttackKind::Overbidding => "overbidding",
            AttackKind::Underbidding => "underbidding",
            AttackKind::ExactBidding => "exact-bidding",
        })
    }
}

/// Classification of a bid vector against a valuation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AttackClass {
    pub kind: AttackKind,
    /// First violating bundle in mask order; `None` for exact bidding.
    pub witness: Option<Bundle>,
    /// `best[S]`: the Sybil bids' optimal split of `S`.
    pub best: Vec<Exact>,
    pub overbid_sets: Vec<Bundle>,
    pub underbid_sets: Vec<Bundle>,
}

impl AttackClass {
    pub fn best_of(&self, set: Bundle) -> &Exact {
        &self.best[set as usize]
    }
}

fn refs(bids: &[CombBid]) -> Vec<&CombBid> {
    bids.iter().collect()
}

fn check_shape(v: &CombValuation, bids: &[CombBid]) -> Result<()> {
    if bids.is_empty() {
        return Err(Error::Parameter("attack needs at least one bid".into()));
    }
    if let Some(b) = bids.iter().find(|b| b.item_count() != v.item_count()) {
        return Err(Error::Shape(format!(
            "bid over {} items against a valuation over {}",
            b.item_count(),
            v.item_count()
        )));
    }
    Ok(())
}

/// Best total the Sybil bids declare for exactly `set`.
pub fn best_partition_value(bids: &[CombBid], set: Bundle) -> Result<Exact> {
    let m = bids.first().ok_or_else(|| Error::Parameter("no bids".into()))?.item_count();
    Ok(subset_optima(&refs(bids), m)?.swap_remove(set as usize))
}

/// Overbidding if some bundle is declared above its value; otherwise
/// underbidding if some bundle is declared below it; otherwise exact.
pub fn classify_attack(v: &CombValuation, bids: &[CombBid]) -> Result<AttackClass> {
    check_shape(v, bids)?;
    let best = subset_optima(&refs(bids), v.item_count())?;
    let sets = 1..=full_bundle(v.item_count());
    let overbid_sets: Vec<Bundle> = sets.clone().filter(|&s| best[s as usize] > *v.value(s)).collect();
    let underbid_sets: Vec<Bundle> = sets.filter(|&s| best[s as usize] < *v.value(s)).collect();
    let (kind, witness) = if let Some(&s) = overbid_sets.first() {
        (AttackKind::Overbidding, Some(s))
    } else if let Some(&s) = underbid_sets.first() {
        (AttackKind::Underbidding, Some(s))
    } else {
        (AttackKind::ExactBidding, None)
    };
    Ok(AttackClass {
        kind,
        witness,
        best,
        overbid_sets,
        underbid_sets,
    })
}

/// Shape of a constructed single-bidder nature state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AdversaryShape {
    /// `b_bar` on each item outside `S`, `b_tilde / |S|` on each item of `S`, summed.
    Additive,
    /// `b_bar` on each item outside `S`, plus `b_tilde` only for bundles containing all of `S`.
    Bundled,
}

fn adversary_bid(m: usize, set: Bundle, b_bar: &Exact, b_tilde: &Exact, shape: AdversaryShape) -> CombBid {
    let share = b_tilde / int(bundle_size(set) as i64);
    BundleValues::from_fn(m, |t| {
        let outside = b_bar * int(bundle_size(t & !set) as i64);
        let inside = match shape {
            AdversaryShape::Additive => &share * int(bundle_size(t & set) as i64),
            AdversaryShape::Bundled if t & set == set => b_tilde.clone(),
            AdversaryShape::Bundled => Exact::zero(),
        };
        outside + inside
    })
    .expect("constructed values are non-negative")
}

/// Every bid-grid point strictly inside `(lo, hi)`, nearest the midpoint first;
/// just the exact midpoint when the gap holds no grid point.
pub(crate) fn grid_points_between(lo: &Exact, hi: &Exact, step: &Exact) -> Vec<Exact> {
    let mid = (lo + hi) / int(2);
    let mut points = Vec::new();
    let mut x = floor_to_grid(lo, step) + step;
    while &x < hi {
        if &x > lo {
            points.push(x.clone());
        }
        x += step;
    }
    if points.is_empty() {
        return vec![mid];
    }
    points.sort_by(|a, b| (a - &mid).abs().cmp(&(b - &mid).abs()).then(a.cmp(b)));
    points
}

/// A value exceeding every `b_j(S') + v(S')` by `epsilon`.
fn dominating_price(v: &CombValuation, bids: &[CombBid], epsilon: &Exact) -> Exact {
    let m = v.item_count();
    let top = bids
        .iter()
        .flat_map(|b| (0..=full_bundle(m)).map(move |s| b.value(s) + v.value(s)))
        .max()
        .unwrap_or_else(Exact::zero);
    top + epsilon
}

fn utility_vs(profile: &SybilProfile, nature: &CombBid, rule: PaymentRule) -> Result<Exact> {
    let out = run_vcg(
        &[profile.clone(), SybilProfile::nature(nature.clone())],
        profile.valuation.item_count(),
        rule,
    )?;
    Ok(out.utilities[0].clone())
}

/// Utility of `profile` against a single nature bidder.
pub fn utility_against(profile: &SybilProfile, nature: &CombBid, rule: PaymentRule) -> Result<Exact> {
    utility_vs(profile, nature, rule)
}

fn check_epsilon(epsilon: &Exact) -> Result<()> {
    if !epsilon.is_positive() {
        return Err(Error::Parameter(format!("epsilon {epsilon} must be positive")));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OverbiddingCertificate {
    pub set: Bundle,
    pub b_bar: Exact,
    pub b_tilde: Exact,
    pub shape: AdversaryShape,
    pub nature: CombBid,
    pub attack_utility: Exact,
    pub truth_utility: Exact,
}

impl OverbiddingCertificate {
    pub fn holds(&self) -> bool {
        self.attack_utility.is_negative() && !self.truth_utility.is_negative()
    }
}

/// Nature bid under which an overbidding attack loses money while truth does not.
///
/// Tries each overbid bundle in mask order and each grid value of `b_tilde`
/// strictly between its value and the Sybils' declared total, nearest the
/// midpoint first, with the additive construction before the bundled one.
/// Every candidate is certified by running the mechanism.
pub fn overbidding_adversary(
    v: &CombValuation,
    bids: &[CombBid],
    epsilon: &Exact,
    rule: PaymentRule,
) -> Result<OverbiddingCertificate> {
    check_epsilon(epsilon)?;
    let class = classify_attack(v, bids)?;
    if class.kind != AttackKind::Overbidding {
        return Err(Error::Classification(format!("attack is {}, not overbidding", class.kind)));
    }
    let m = v.item_count();
    let step = bid_grid_step(epsilon, m);
    let b_bar = dominating_price(v, bids, epsilon);
    let attack = SybilProfile::new(v.clone(), bids.to_vec())?;
    let truth = SybilProfile::truthful(v.clone());
    let candidates = class.overbid_sets.iter().flat_map(|&set| {
        grid_points_between(v.value(set), class.best_of(set), &step)
            .into_iter()
            .map(move |t| (set, t))
    });
    for (set, b_tilde) in candidates {
        for shape in [AdversaryShape::Additive, AdversaryShape::Bundled] {
            let nature = adversary_bid(m, set, &b_bar, &b_tilde, shape);
            let cert = OverbiddingCertificate {
                set,
                b_bar: b_bar.clone(),
                b_tilde: b_tilde.clone(),
                shape,
                attack_utility: utility_vs(&attack, &nature, rule)?,
                truth_utility: utility_vs(&truth, &nature, rule)?,
                nature,
            };
            if cert.holds() {
                return Ok(cert);
            }
        }
    }
    Err(Error::Consistency(format!(
        "no constructed nature state makes overbidding attack {bids:?} lose money against valuation {v:?}"
    )))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnderbiddingCertificate {
    pub set: Bundle,
    pub b_tilde: Exact,
    pub shape: AdversaryShape,
    pub nature: CombBid,
    pub attack_utility: Exact,
    pub truth_utility: Exact,
    pub grid_step: Exact,
    pub family_size: usize,
    /// Least truthful utility over family states where the two strategies differ.
    pub difference_min_truth: Extended<Exact>,
    /// Family indices where the attack earns more than 0 while truth earns 0.
    pub reversals: Vec<usize>,
}

impl UnderbiddingCertificate {
    pub fn witness_holds(&self) -> bool {
        self.attack_utility.is_zero() && self.truth_utility.is_positive()
    }

    pub fn holds(&self) -> bool {
        self.witness_holds() && self.reversals.is_empty() && self.difference_min_truth >= Extended::Finite(self.grid_step.clone())
    }
}

/// Nature bid giving an underbidding attack 0 while truth earns a positive
/// amount, plus a scan of `family` for the reverse pattern.
pub fn underbidding_adversary(
    v: &CombValuation,
    bids: &[CombBid],
    epsilon: &Exact,
    rule: PaymentRule,
    family: &[CombBid],
) -> Result<UnderbiddingCertificate> {
    check_epsilon(epsilon)?;
    let class = classify_attack(v, bids)?;
    if class.kind != AttackKind::Underbidding {
        return Err(Error::Classification(format!("attack is {}, not underbidding", class.kind)));
    }
    let m = v.item_count();
    let step = bid_grid_step(epsilon, m);
    let b_bar = dominating_price(v, bids, epsilon);
    let attack = SybilProfile::new(v.clone(), bids.to_vec())?;
    let truth = SybilProfile::truthful(v.clone());

    let mut found = None;
    'sets: for &set in &class.underbid_sets {
        let mut candidates = Vec::new();
        for t in grid_points_between(class.best_of(set), v.value(set), &step) {
            candidates.push((t.clone(), AdversaryShape::Additive));
            candidates.push((t, AdversaryShape::Bundled));
        }
        let sub_max = subsets(set).filter(|&r| r != 0).map(|r| class.best_of(r).clone()).max().unwrap();
        if sub_max < *v.value(set) {
            for t in grid_points_between(&sub_max, v.value(set), &step) {
                candidates.push((t, AdversaryShape::Bundled));
            }
        }
        for (b_tilde, shape) in candidates {
            let nature = adversary_bid(m, set, &b_bar, &b_tilde, shape);
            let ua = utility_vs(&attack, &nature, rule)?;
            let ut = utility_vs(&truth, &nature, rule)?;
            if ua.is_zero() && ut.is_positive() {
                found = Some((set, b_tilde, shape, nature, ua, ut));
                break 'sets;
            }
        }
    }
    let Some((set, b_tilde, shape, nature, attack_utility, truth_utility)) = found else {
        return Err(Error::Consistency(format!(
            "no constructed nature state separates underbidding attack {bids:?} from truth for valuation {v:?}"
        )));
    };

    let mut difference_min_truth = Extended::PosInf;
    let mut reversals = Vec::new();
    for (k, state) in family.iter().enumerate() {
        let ua = utility_vs(&attack, state, rule)?;
        let ut = utility_vs(&truth, state, rule)?;
        if ua != ut {
            difference_min_truth = difference_min_truth.min(Extended::Finite(ut.clone()));
        }
        if ua.is_positive() && ut.is_zero() {
            reversals.push(k);
        }
    }
    Ok(UnderbiddingCertificate {
        set,
        b_tilde,
        shape,
        nature,
        attack_utility,
        truth_utility,
        grid_step: step,
        family_size: family.len(),
        difference_min_truth,
        reversals,
    })
}

/// `SW_T^Real <= SW_T^Obs <= SW_F^Obs <= SW_F^Real` for truthful (T) and attack (F) outcomes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WelfareChain {
    pub truthful_real: Exact,
    pub truthful_observed: Exact,
    pub attack_observed: Exact,
    pub attack_real: Exact,
}

impl WelfareChain {
    pub fn holds(&self) -> bool {
        self.truthful_real <= self.truthful_observed
            && self.truthful_observed <= self.attack_observed
            && self.attack_observed <= self.attack_real
            && self.attack_real == self.truthful_real
    }
}

/// Welfare chain for profiles in which every agent's bids are exact.
pub fn exact_bidding_optimal(profiles: &[SybilProfile], item_count: usize) -> Result<WelfareChain> {
    for (i, p) in profiles.iter().enumerate() {
        let class = classify_attack(&p.valuation, &p.bids)?;
        if class.kind != AttackKind::ExactBidding {
            return Err(Error::Classification(format!("agent {i} is {}, not exact-bidding", class.kind)));
        }
    }
    let truthful: Vec<&CombBid> = profiles.iter().map(|p| &p.valuation).collect();
    let alloc_t = winner_determination(&truthful, item_count)?;
    let truthful_observed = alloc_t.observed_welfare(&truthful);
    let truthful_real = truthful_observed.clone();

    let mut flat = Vec::new();
    let mut owner = Vec::new();
    for (i, p) in profiles.iter().enumerate() {
        for b in &p.bids {
            flat.push(b);
            owner.push(i);
        }
    }
    let alloc_f = winner_determination(&flat, item_count)?;
    let attack_observed = alloc_f.observed_welfare(&flat);
    let mut won = vec![0 as Bundle; profiles.len()];
    for (k, &i) in owner.iter().enumerate() {
        won[i] |= alloc_f.bundle(k);
    }
    let attack_real = profiles.iter().zip(&won).map(|(p, s)| p.valuation.value(*s).clone()).sum();
    Ok(WelfareChain {
        truthful_real,
        truthful_observed,
        attack_observed,
        attack_real,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TruthCase {
    /// Some bundle is declared below value by every single Sybil bid, and its
    /// value exceeds that of each part of the Sybils' best split.
    PositiveGap {
        set: Bundle,
        parts: Vec<Bundle>,
        nature: CombBid,
        attack_utility: Exact,
        truth_utility: Exact,
        expected_gap: Exact,
    },
    /// No positive-gap bundle separates the two; truth weakly dominates on the family.
    Dominated { states_checked: usize, single_bid_chain_holds: bool },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruthCertificate {
    pub case: TruthCase,
}

/// Upward-monotone extension: each bundle is worth the most valuable listed part it contains.
fn monotone_cover(v: &CombValuation, parts: &[Bundle]) -> CombBid {
    BundleValues::from_fn(v.item_count(), |t| {
        parts
            .iter()
            .filter(|&&p| p & t == p)
            .map(|&p| v.value(p).clone())
            .max()
            .unwrap_or_else(Exact::zero)
    })
    .expect("valuation entries are non-negative")
}

/// Every split of `set` among the bids, with at least two nonempty parts,
/// whose declared values sum to `target`. Parts are listed in bid order.
fn exact_splits(bids: &[CombBid], set: Bundle, target: &Exact) -> Vec<Vec<Bundle>> {
    let items: Vec<usize> = (0..16).filter(|i| set & (1 << i) != 0).collect();
    let n = bids.len();
    let mut out: Vec<Vec<Bundle>> = Vec::new();
    let mut owner = vec![0usize; items.len()];
    loop {
        let mut parts = vec![0 as Bundle; n];
        for (k, &i) in items.iter().enumerate() {
            parts[owner[k]] |= 1 << i;
        }
        let total: Exact = bids.iter().zip(&parts).map(|(b, &p)| b.value(p).clone()).sum();
        let nonempty: Vec<Bundle> = parts.into_iter().filter(|&p| p != 0).collect();
        if nonempty.len() >= 2 && total == *target && !out.contains(&nonempty) {
            out.push(nonempty);
        }
        let mut k = 0;
        while k < owner.len() {
            owner[k] += 1;
            if owner[k] < n {
                break;
            }
            owner[k] = 0;
            k += 1;
        }
        if k == owner.len() {
            return out;
        }
    }
}

/// Evidence that truth is loss-averse relative to an exact-bidding attack.
pub fn truth_loss_averse_witnesses(
    v: &CombValuation,
    bids: &[CombBid],
    rule: PaymentRule,
    family: &[CombBid],
) -> Result<TruthCertificate> {
    let class = classify_attack(v, bids)?;
    if class.kind != AttackKind::ExactBidding {
        return Err(Error::Classification(format!("attack is {}, not exact-bidding", class.kind)));
    }
    let m = v.item_count();
    let attack = SybilProfile::new(v.clone(), bids.to_vec())?;
    let truth = SybilProfile::truthful(v.clone());
    for set in (1..=full_bundle(m)).filter(|&s| bids.iter().all(|b| b.value(s) < v.value(s))) {
        for parts in exact_splits(bids, set, v.value(set)) {
            let top = parts.iter().map(|&p| v.value(p).clone()).max().unwrap_or_else(Exact::zero);
            let expected_gap = v.value(set) - top;
            if !expected_gap.is_positive() {
                continue;
            }
            let nature = monotone_cover(v, &parts);
            let attack_utility = utility_vs(&attack, &nature, rule)?;
            let truth_utility = utility_vs(&truth, &nature, rule)?;
            if attack_utility.is_zero() && truth_utility.is_positive() {
                return Ok(TruthCertificate {
                    case: TruthCase::PositiveGap {
                        expected_gap,
                        set,
                        parts,
                        nature,
                        attack_utility,
                        truth_utility,
                    },
                });
            }
        }
    }
    let mut chain = true;
    for state in family {
        let ua = utility_vs(&attack, state, rule)?;
        let ut = utility_vs(&truth, state, rule)?;
        if ua > ut {
            return Err(Error::Consistency(format!(
                "exact attack {bids:?} beats truth ({ua} > {ut}) against nature {state:?}"
            )));
        }
        let single = bids
            .iter()
            .map(|b| utility_vs(&SybilProfile::new(v.clone(), vec![b.clone()])?, state, rule))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .max()
            .unwrap();
        chain &= ua <= single && single <= ut;
    }
    Ok(TruthCertificate {
        case: TruthCase::Dominated {
            states_checked: family.len(),
            single_bid_chain_holds: chain,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn additive(v: &[i64]) -> CombBid {
        BundleValues::additive(&v.iter().map(|x| int(*x)).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn classification() {
        let v = additive(&[1, 2]);
        assert_eq!(classify_attack(&v, &[v.clone()]).unwrap().kind, AttackKind::ExactBidding);
        let split = [additive(&[1, 0]), additive(&[0, 2])];
        assert_eq!(classify_attack(&v, &split).unwrap().kind, AttackKind::ExactBidding);
        let over = classify_attack(&v, &[additive(&[2, 2])]).unwrap();
        assert_eq!((over.kind, over.witness), (AttackKind::Overbidding, Some(0b01)));
        let under = classify_attack(&v, &[additive(&[1, 1])]).unwrap();
        assert_eq!((under.kind, under.witness), (AttackKind::Underbidding, Some(0b10)));
        assert!(matches!(classify_attack(&v, &[additive(&[1])]), Err(Error::Shape(_))));
    }

    #[test]
    fn grid_snapping() {
        assert_eq!(grid_points_between(&int(1), &int(2), &rat(1, 2)), vec![rat(3, 2)]);
        assert_eq!(grid_points_between(&int(1), &int(2), &int(1)), vec![rat(3, 2)]);
        assert_eq!(grid_points_between(&int(0), &int(1), &rat(1, 3)), vec![rat(1, 3), rat(2, 3)]);
        assert_eq!(grid_points_between(&int(0), &int(2), &rat(1, 2)), vec![int(1), rat(1, 2), rat(3, 2)]);
    }

    #[test]
    fn one_item_overbid() {
        let v = additive(&[1]);
        let cert = overbidding_adversary(&v, &[additive(&[3])], &int(1), PaymentRule::ClarkePivot).unwrap();
        assert_eq!(cert.b_tilde, int(2));
        assert_eq!(cert.attack_utility, int(1) - int(2));
        assert!(cert.holds());
        assert!(matches!(
            overbidding_adversary(&v, &[v.clone()], &int(1), PaymentRule::ClarkePivot),
            Err(Error::Classification(_))
        ));
    }

    #[test]
    fn one_item_underbid() {
        let v = additive(&[2]);
        let cert = underbidding_adversary(&v, &[additive(&[1])], &int(1), PaymentRule::ClarkePivot, &[]).unwrap();
        assert!(cert.b_tilde > int(1) && cert.b_tilde < int(2));
        assert_eq!(cert.attack_utility, int(0));
        assert_eq!(cert.truth_utility, int(2) - cert.b_tilde.clone());
        assert!(matches!(
            underbidding_adversary(&v, &[v.clone()], &int(1), PaymentRule::ClarkePivot, &[]),
            Err(Error::Classification(_))
        ));
    }

    #[test]
    fn non_monotone_overbid_needs_bundled_adversary() {
        let v = BundleValues::new(2, vec![int(0), int(2), int(0), int(0)]).unwrap();
        let b = BundleValues::new(2, vec![int(0), int(1), int(0), int(1)]).unwrap();
        let cert = overbidding_adversary(&v, &[b], &int(1), PaymentRule::ClarkePivot).unwrap();
        assert_eq!(cert.shape, AdversaryShape::Bundled);
        assert!(cert.holds());
    }

    #[test]
    fn exact_bidding_chain_and_truth_witness() {
        let v = additive(&[1, 2]);
        let split = vec![additive(&[1, 0]), additive(&[0, 2])];
        let other = additive(&[2, 1]);
        let chain = exact_bidding_optimal(
            &[
                SybilProfile::new(v.clone(), split.clone()).unwrap(),
                SybilProfile::truthful(other),
            ],
            2,
        )
        .unwrap();
        assert!(chain.holds());
        assert_eq!(chain.attack_real, int(4));
        let cert = truth_loss_averse_witnesses(&v, &split, PaymentRule::ClarkePivot, &[]).unwrap();
        match cert.case {
            TruthCase::PositiveGap {
                set,
                truth_utility,
                expected_gap,
                ..
            } => {
                assert_eq!(set, 0b11);
                assert_eq!(truth_utility, expected_gap);
                assert_eq!(expected_gap, int(1));
            }
            other => panic!("expected a positive gap, got {other:?}"),
        }
        let twice = vec![v.clone(), v.clone()];
        let cert = truth_loss_averse_witnesses(&v, &twice, PaymentRule::ClarkePivot, &[additive(&[1, 1])]).unwrap();
        assert!(matches!(cert.case, TruthCase::Dominated { states_checked: 1, .. }));
    }

    #[test]
    fn positive_gap_searches_every_exact_split() {
        // {a}{b,c} and {a,c}{b} both reach v(abc) = 4; only the first separates.
        let b1 = BundleValues::from_fn(3, |s| if s & 1 != 0 { int(2) } else { int(0) }).unwrap();
        let b2 = BundleValues::from_fn(3, |s| match s & 0b110 {
            0b010 | 0b110 => int(2),
            0b100 => int(1),
            _ => int(0),
        })
        .unwrap();
        let v = BundleValues::from_fn(3, |s| b1.value(s) + b2.value(s)).unwrap();
        let cert = truth_loss_averse_witnesses(&v, &[b1, b2], PaymentRule::ClarkePivot, &[]).unwrap();
        match cert.case {
            TruthCase::PositiveGap { parts, attack_utility, .. } => {
                assert_eq!(parts, vec![0b001, 0b110]);
                assert!(attack_utility.is_zero());
            }
            other => panic!("expected a positive gap, got {other:?}"),
        }
    }
}

//! XOS valuations and the two worked combinatorial-auction instances.

use num_traits::{Signed, Zero};

use super::wd::{run_vcg, PaymentRule, VcgOutcome};
use super::{full_bundle, BundleValues, CombBid, CombValuation, SybilProfile};
use crate::error::{Error, Result};
use crate::scalar::{int, Exact};

/// Maximum over additive clauses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct XosValuation {
    clauses: Vec<Vec<Exact>>,
}

impl XosValuation {
    pub fn new(clauses: Vec<Vec<Exact>>) -> Result<Self> {
        let m = clauses
            .first()
            .ok_or_else(|| Error::Parameter("an XOS valuation needs at least one clause".into()))?
            .len();
        if clauses.iter().any(|c| c.len() != m) {
            return Err(Error::Shape("XOS clauses must all cover the same items".into()));
        }
        if clauses.iter().flatten().any(|x| x.is_negative()) {
            return Err(Error::Parameter("XOS clause values must be non-negative".into()));
        }
        Ok(Self { clauses })
    }

    pub fn clauses(&self) -> &[Vec<Exact>] {
        &self.clauses
    }

    pub fn to_valuation(&self) -> Result<CombValuation> {
        let m = self.clauses[0].len();
        BundleValues::from_fn(m, |s| {
            self.clauses
                .iter()
                .map(|c| (0..m).filter(|i| s & (1 << i) != 0).map(|i| c[i].clone()).sum::<Exact>())
                .max()
                .unwrap_or_else(Exact::zero)
        })
    }
}

fn row(xs: [Exact; 4]) -> Vec<Exact> {
    xs.to_vec()
}

/// Four items, three XOS bidders; bidder A (index 0) splits into two additive bids.
#[derive(Clone, Debug)]
pub struct ExampleE1 {
    pub epsilon: Exact,
    pub bidders: Vec<(String, XosValuation)>,
    pub attack: Vec<CombBid>,
}

impl ExampleE1 {
    pub fn valuations(&self) -> Vec<CombValuation> {
        self.bidders
            .iter()
            .map(|(_, x)| x.to_valuation().expect("validated clauses"))
            .collect()
    }

    pub fn truthful_profiles(&self) -> Vec<SybilProfile> {
        self.valuations().into_iter().map(SybilProfile::truthful).collect()
    }

    pub fn attack_profiles(&self) -> Vec<SybilProfile> {
        let mut profiles = self.truthful_profiles();
        profiles[0].bids = self.attack.clone();
        profiles
    }
}

pub fn build_example_e1(epsilon: &Exact) -> Result<ExampleE1> {
    if !epsilon.is_positive() {
        return Err(Error::Parameter(format!("epsilon {epsilon} must be positive")));
    }
    let e = epsilon.clone();
    let z = Exact::zero;
    let nine = || int(9);
    let three_e = &e * int(3);
    let a = XosValuation::new(vec![row([z(), z(), three_e.clone(), three_e])])?;
    let b = XosValuation::new(vec![
        row([nine(), z(), z(), z()]),
        row([z(), nine(), z(), z()]),
        row([e.clone(), e.clone(), nine(), z()]),
    ])?;
    let c = XosValuation::new(vec![
        row([nine(), z(), z(), z()]),
        row([z(), nine(), z(), z()]),
        row([e.clone(), e.clone(), z(), nine()]),
    ])?;
    let attack = vec![
        BundleValues::additive(&[int(10), int(10), z(), z()])?,
        BundleValues::additive(&[z(), z(), int(10), int(10)])?,
    ];
    Ok(ExampleE1 {
        epsilon: e,
        bidders: vec![("A".into(), a), ("B".into(), b), ("C".into(), c)],
        attack,
    })
}

/// Example E.1 evaluated under both payment rules, with every mismatch
/// against the commonly quoted figures listed in `flags`.
#[derive(Clone, Debug)]
pub struct ExampleE1Report {
    pub epsilon: Exact,
    pub truthful: VcgOutcome,
    pub attack_clarke: VcgOutcome,
    pub attack_literal: VcgOutcome,
    /// Quoted optimum `18 + 2 eps`.
    pub quoted_optimum: Exact,
    /// Quoted per-Sybil payment `2 eps`.
    pub quoted_payment: Exact,
    pub flags: Vec<String>,
}

pub fn example_e1_report(epsilon: &Exact) -> Result<ExampleE1Report> {
    let ex = build_example_e1(epsilon)?;
    let truthful = run_vcg(&ex.truthful_profiles(), 4, PaymentRule::ClarkePivot)?;
    let attack_clarke = run_vcg(&ex.attack_profiles(), 4, PaymentRule::ClarkePivot)?;
    let attack_literal = run_vcg(&ex.attack_profiles(), 4, PaymentRule::PaperLiteral)?;
    let quoted_optimum = int(18) + epsilon * int(2);
    let quoted_payment = epsilon * int(2);
    let mut flags = Vec::new();
    if truthful.observed_welfare != quoted_optimum {
        flags.push(format!(
            "optimum-discrepancy: quoted {quoted_optimum}, exhaustive search gives {}",
            truthful.observed_welfare
        ));
    }
    for out in [&attack_clarke, &attack_literal] {
        if out.payments[0].iter().any(|p| *p != quoted_payment) {
            let paid: Vec<String> = out.payments[0].iter().map(ToString::to_string).collect();
            flags.push(format!(
                "payment-discrepancy ({}): quoted {quoted_payment} per Sybil, computed [{}]",
                out.rule,
                paid.join(", ")
            ));
        }
    }
    Ok(ExampleE1Report {
        epsilon: epsilon.clone(),
        truthful,
        attack_clarke,
        attack_literal,
        quoted_optimum,
        quoted_payment,
        flags,
    })
}

/// Three items, one agent whose three additive bids underbid, and the nature
/// bid against which the attack strictly beats truth.
#[derive(Clone, Debug)]
pub struct ExampleE2 {
    pub epsilon: Exact,
    pub valuation: CombValuation,
    pub attack: Vec<CombBid>,
    pub nature: CombBid,
}

impl ExampleE2 {
    pub fn truthful_profile(&self) -> SybilProfile {
        SybilProfile::truthful(self.valuation.clone())
    }

    pub fn attack_profile(&self) -> SybilProfile {
        SybilProfile::new(self.valuation.clone(), self.attack.clone()).expect("shapes agree")
    }
}

pub fn build_example_e2(epsilon: &Exact) -> Result<ExampleE2> {
    if !epsilon.is_positive() || *epsilon >= int(1) {
        return Err(Error::Parameter(format!("epsilon {epsilon} must lie in (0, 1)")));
    }
    let e = epsilon.clone();
    const A: u16 = 0b001;
    const B: u16 = 0b010;
    const C: u16 = 0b100;
    let valuation = BundleValues::from_fn(3, |s| match s {
        A | B | C => int(1),
        0b011 => int(2),
        0b101 | 0b110 => int(1) + &e,
        _ => int(2) + &e,
    })?;
    debug_assert_eq!(full_bundle(3), 0b111);
    let z = Exact::zero;
    let attack = vec![
        BundleValues::additive(&[int(1), z(), z()])?,
        BundleValues::additive(&[z(), int(1), z()])?,
        BundleValues::additive(&[z(), z(), e.clone()])?,
    ];
    let nature = BundleValues::from_fn(3, |s| {
        let pair = if s & 0b011 == 0b011 { int(2) - &e } else { Exact::zero() };
        let c = if s & C != 0 { int(1000) } else { Exact::zero() };
        pair + c
    })?;
    Ok(ExampleE2 {
        epsilon: e,
        valuation,
        attack,
        nature,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;
    use crate::vcg::{run_vcg, PaymentRule};

    #[test]
    fn xos_expansion() {
        let e = rat(1, 10);
        let ex = build_example_e1(&e).unwrap();
        let b = ex.bidders[1].1.to_valuation().unwrap();
        assert_eq!(b.value(0b0101), &(int(9) + &e));
        let single = XosValuation::new(vec![vec![int(1), int(2)]]).unwrap().to_valuation().unwrap();
        assert_eq!(single, BundleValues::additive(&[int(1), int(2)]).unwrap());
        assert!(XosValuation::new(vec![]).is_err());
    }

    #[test]
    fn e1_attack_collapses_welfare() {
        let e = rat(1, 10);
        let ex = build_example_e1(&e).unwrap();
        let out = run_vcg(&ex.attack_profiles(), 4, PaymentRule::ClarkePivot).unwrap();
        assert_eq!(out.observed_welfare, int(40));
        assert_eq!(out.real_welfare, &e * int(6));
        assert_eq!(out.sybil_bundle(0, 0), 0b0011);
        assert_eq!(out.sybil_bundle(0, 1), 0b1100);
        let truthful = run_vcg(&ex.truthful_profiles(), 4, PaymentRule::ClarkePivot).unwrap();
        assert_eq!(truthful.observed_welfare, int(18) + &e * int(6));
    }

    #[test]
    fn e1_report_flags() {
        let e = rat(1, 100);
        let r = example_e1_report(&e).unwrap();
        assert_eq!(r.truthful.observed_welfare, int(18) + &e * int(6));
        assert_eq!(r.attack_clarke.payments[0], vec![int(18), int(18)]);
        assert_eq!(r.attack_literal.payments[0], vec![int(20), int(20)]);
        assert_eq!(r.flags.len(), 3);
    }

    #[test]
    fn e2_nature_state() {
        let e = rat(1, 10);
        let ex = build_example_e2(&e).unwrap();
        let rule = PaymentRule::ClarkePivot;
        let nature = SybilProfile::nature(ex.nature.clone());
        let truth = run_vcg(&[ex.truthful_profile(), nature.clone()], 3, rule).unwrap();
        let attack = run_vcg(&[ex.attack_profile(), nature], 3, rule).unwrap();
        assert_eq!(truth.utilities[0], e);
        assert_eq!(attack.utilities[0], &e * int(2));
    }
}

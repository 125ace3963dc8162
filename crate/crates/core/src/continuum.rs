//! Games whose nature states form a finite union of points and intervals.
//!
//! Utilities are affine in the state parameter on each region, so minima are
//! evaluated as infima over (possibly open) intervals instead of by sampling.

use crate::concepts::{Concept, ConceptVerdict, Refutation};
use crate::error::{Error, Result};
use crate::game::AgentGame;
use crate::scalar::{int, Exact, Extended};
use num_traits::{One, Signed, Zero};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Region {
    Point(Exact),
    Interval {
        lo: Exact,
        lo_closed: bool,
        hi: Exact,
        hi_closed: bool,
    },
}

impl Region {
    pub fn open_closed(lo: Exact, hi: Exact) -> Self {
        Region::Interval {
            lo,
            lo_closed: false,
            hi,
            hi_closed: true,
        }
    }

    fn bounds(&self) -> Span {
        match self {
            Region::Point(x) => Span {
                lo: x.clone(),
                lo_closed: true,
                hi: x.clone(),
                hi_closed: true,
            },
            Region::Interval {
                lo,
                lo_closed,
                hi,
                hi_closed,
            } => Span {
                lo: lo.clone(),
                lo_closed: *lo_closed,
                hi: hi.clone(),
                hi_closed: *hi_closed,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Span {
    lo: Exact,
    lo_closed: bool,
    hi: Exact,
    hi_closed: bool,
}

impl Span {
    fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !(self.lo_closed && self.hi_closed))
    }
}

/// `constant + slope * f` on a region parameterized by `f`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Affine {
    pub constant: Exact,
    pub slope: Exact,
}

impl Affine {
    pub fn constant(c: Exact) -> Self {
        Self {
            constant: c,
            slope: Exact::zero(),
        }
    }

    pub fn identity() -> Self {
        Self {
            constant: Exact::zero(),
            slope: Exact::one(),
        }
    }

    pub fn eval(&self, f: &Exact) -> Exact {
        &self.constant + &self.slope * f
    }

    fn minus(&self, other: &Affine) -> Affine {
        Affine {
            constant: &self.constant - &other.constant,
            slope: &self.slope - &other.slope,
        }
    }

    /// Infimum over a nonempty span; affine functions are monotone.
    fn infimum(&self, span: &Span) -> Exact {
        let (a, b) = (self.eval(&span.lo), self.eval(&span.hi));
        a.min(b)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContinuumGame {
    actions: Vec<String>,
    regions: Vec<(String, Region)>,
    utility: Vec<Vec<Affine>>,
}

impl ContinuumGame {
    pub fn new(actions: Vec<String>, regions: Vec<(String, Region)>, utility: Vec<Vec<Affine>>) -> Result<Self> {
        if actions.is_empty() || regions.is_empty() {
            return Err(Error::InvalidGame("continuum game needs actions and regions".into()));
        }
        if utility.len() != actions.len() || utility.iter().any(|r| r.len() != regions.len()) {
            return Err(Error::Shape("utility must have one affine piece per action and region".into()));
        }
        if let Some((label, _)) = regions.iter().find(|(_, r)| r.bounds().is_empty()) {
            return Err(Error::InvalidGame(format!("region `{label}` is empty")));
        }
        Ok(Self {
            actions,
            regions,
            utility,
        })
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    /// Sub-spans where `a` differs from `b` (or is strictly below it), tagged by region.
    fn pieces(&self, a: usize, b: usize, strict_below: bool) -> Vec<(usize, Span)> {
        let mut out = Vec::new();
        for (k, (_, region)) in self.regions.iter().enumerate() {
            let span = region.bounds();
            let d = self.utility[a][k].minus(&self.utility[b][k]);
            if d.slope.is_zero() {
                let keep = if strict_below { d.constant.is_negative() } else { !d.constant.is_zero() };
                if keep {
                    out.push((k, span));
                }
                continue;
            }
            let root = -(&d.constant) / &d.slope;
            // d < 0 on the side of `root` opposite to the slope sign
            let below = Span {
                lo: span.lo.clone(),
                lo_closed: span.lo_closed,
                hi: root.clone().min(span.hi.clone()),
                hi_closed: if root < span.hi { false } else { span.hi_closed },
            };
            let above = Span {
                lo: root.clone().max(span.lo.clone()),
                lo_closed: if root > span.lo { false } else { span.lo_closed },
                hi: span.hi.clone(),
                hi_closed: span.hi_closed,
            };
            let parts = if strict_below {
                if d.slope.is_positive() {
                    vec![below]
                } else {
                    vec![above]
                }
            } else {
                vec![below, above]
            };
            out.extend(parts.into_iter().filter(|s| !s.is_empty()).map(|s| (k, s)));
        }
        out
    }

    fn inf_over(&self, action: usize, pieces: &[(usize, Span)]) -> Option<(usize, Exact)> {
        pieces
            .iter()
            .map(|(k, s)| (*k, self.utility[action][*k].infimum(s)))
            .fold(None, |best, (k, v)| match best {
                Some((_, ref bv)) if *bv <= v => best,
                _ => Some((k, v)),
            })
    }

    fn check(&self, a: usize, b: usize, star: bool) -> Option<Refutation<Exact>> {
        let (own_pieces, rival_pieces) = if star {
            (self.pieces(a, b, true), self.pieces(b, a, true))
        } else {
            let d = self.pieces(a, b, false);
            (d.clone(), d)
        };
        if !star && own_pieces.is_empty() {
            return None;
        }
        let own = self.inf_over(a, &own_pieces);
        let rival = self.inf_over(b, &rival_pieces);
        let ext = |x: &Option<(usize, Exact)>| x.as_ref().map_or(Extended::PosInf, |(_, v)| Extended::Finite(v.clone()));
        let (ov, rv) = (ext(&own), ext(&rival));
        (ov < rv).then(|| Refutation {
            action: self.actions[a].clone(),
            competitor: Some(self.actions[b].clone()),
            states: [own, rival]
                .iter()
                .flatten()
                .map(|(k, _)| self.regions[*k].0.clone())
                .collect(),
            action_value: ov,
            competitor_value: rv,
        })
    }

    /// Loss-aversion verdicts with minima read as infima over each region.
    pub fn evaluate(&self, concept: Concept) -> Result<ConceptVerdict<Exact>> {
        let star = match concept {
            Concept::LossAverse => false,
            Concept::LossAverseStar => true,
            other => {
                return Err(Error::Parameter(format!(
                    "continuum evaluation supports loss-averse and loss-averse-star, not {other}"
                )))
            }
        };
        let n = self.actions.len();
        let mut satisfying = Vec::new();
        let mut witnesses = Vec::new();
        for a in 0..n {
            match (0..n).filter(|&b| b != a).find_map(|b| self.check(a, b, star)) {
                Some(w) => witnesses.push(w),
                None => satisfying.push(self.actions[a].clone()),
            }
        }
        Ok(ConceptVerdict {
            concept,
            satisfying_actions: satisfying,
            witnesses,
        })
    }

    /// Finite game sampling every interval at multiples of `step` inside it.
    pub fn discretize(&self, step: &Exact) -> Result<AgentGame<Exact>> {
        if !step.is_positive() {
            return Err(Error::Parameter(format!("grid step {step} must be positive")));
        }
        let mut samples: Vec<(String, usize, Exact)> = Vec::new();
        for (k, (label, region)) in self.regions.iter().enumerate() {
            match region {
                Region::Point(x) => samples.push((label.clone(), k, x.clone())),
                Region::Interval { .. } => {
                    let span = region.bounds();
                    let mut x = (&span.lo / step).ceil() * step;
                    while x <= span.hi {
                        let inside = (x > span.lo || span.lo_closed) && (x < span.hi || span.hi_closed);
                        if inside {
                            samples.push((x.to_string(), k, x.clone()));
                        }
                        x += step;
                    }
                }
            }
        }
        let labels: Vec<String> = samples.iter().map(|(l, _, _)| l.clone()).collect();
        let utility = self
            .utility
            .iter()
            .map(|row| samples.iter().map(|(_, k, x)| row[*k].eval(x)).collect())
            .collect();
        AgentGame::new("continuum-grid", self.actions.clone(), labels, utility)
    }
}

/// Aim big (`B`) or small (`S`) against a small prize `f` in (0,1] or the big prize 1000.
pub fn aim_big() -> ContinuumGame {
    ContinuumGame::new(
        vec!["B".into(), "S".into()],
        vec![
            ("small".into(), Region::open_closed(int(0), int(1))),
            ("1000".into(), Region::Point(int(1000))),
        ],
        vec![
            vec![Affine::constant(int(0)), Affine::constant(int(1000))],
            vec![Affine::identity(), Affine::constant(int(1))],
        ],
    )
    .expect("aim-big is well formed")
}

/// The aim-big game with small prizes restricted to `{delta, 2 delta, ..., 1}`.
pub fn aim_big_grid(delta: &Exact) -> Result<AgentGame<Exact>> {
    if !delta.is_positive() || !(Exact::one() / delta).is_integer() {
        return Err(Error::Parameter(format!("grid step {delta} must divide 1")));
    }
    aim_big().discretize(delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concepts::{evaluate, strictly_dominated_actions};
    use crate::scalar::rat;

    #[test]
    fn closed_form_verdicts() {
        let g = aim_big();
        assert_eq!(g.evaluate(Concept::LossAverse).unwrap().satisfying_actions, ["B", "S"]);
        let star = g.evaluate(Concept::LossAverseStar).unwrap();
        assert_eq!(star.satisfying_actions, ["S"]);
        assert_eq!(star.witnesses[0].action_value, Extended::Finite(int(0)));
        assert_eq!(star.witnesses[0].competitor_value, Extended::Finite(int(1)));
        assert!(g.evaluate(Concept::Leximin).is_err());
    }

    #[test]
    fn grid_changes_plain_verdict_only() {
        let grid = aim_big_grid(&rat(1, 10)).unwrap();
        assert_eq!(grid.state_count(), 11);
        assert_eq!(grid.utility("S", "1/10").unwrap(), rat(1, 10));
        assert_eq!(evaluate(&grid, Concept::LossAverse).satisfying_actions, ["S"]);
        assert_eq!(evaluate(&grid, Concept::LossAverseStar).satisfying_actions, ["S"]);
        assert!(strictly_dominated_actions(&grid).is_empty());
        assert!(aim_big_grid(&rat(3, 10)).is_err());
    }

    #[test]
    fn strict_pieces_respect_open_endpoints() {
        // u(x, f) = f, u(y, f) = 1/2 on [0, 1]: x is strictly worse on [0, 1/2).
        let g = ContinuumGame::new(
            vec!["x".into(), "y".into()],
            vec![(
                "unit".into(),
                Region::Interval {
                    lo: int(0),
                    lo_closed: true,
                    hi: int(1),
                    hi_closed: true,
                },
            )],
            vec![vec![Affine::identity()], vec![Affine::constant(rat(1, 2))]],
        )
        .unwrap();
        let below = g.pieces(0, 1, true);
        assert_eq!(below.len(), 1);
        assert_eq!(below[0].1.hi, rat(1, 2));
        assert!(!below[0].1.hi_closed);
        assert_eq!(g.evaluate(Concept::LossAverseStar).unwrap().satisfying_actions, ["y"]);
    }
}

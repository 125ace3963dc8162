//! Facility location under the mean rule, and positional scoring rule voting.

use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::concepts::{max_regret, min_max_regret_actions};
use crate::error::{Error, Result};
use crate::game::{AgentGame, MixedAction};
use crate::scalar::{int, on_grid, rat, Exact};

fn check_theta(theta: &Exact) -> Result<()> {
    if theta.is_negative() || *theta > Exact::one() {
        return Err(Error::Parameter(format!("type {theta} outside [0, 1]")));
    }
    Ok(())
}

fn check_agents(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::Parameter(format!("need at least 2 agents, got {n}")));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FacilitySpec {
    pub agent_count: usize,
    pub theta: Exact,
    /// Step of both the report grid on `[0, 1]` and the others-sum grid on `[0, n-1]`.
    pub delta: Exact,
}

impl FacilitySpec {
    pub fn new(agent_count: usize, theta: Exact, delta: Exact) -> Result<Self> {
        check_agents(agent_count)?;
        check_theta(&theta)?;
        if !delta.is_positive() || !on_grid(&Exact::one(), &delta) {
            return Err(Error::Parameter(format!("grid step {delta} must be positive and divide 1")));
        }
        Ok(Self {
            agent_count,
            theta,
            delta,
        })
    }
}

/// `n theta - (n-1)/2` on the middle band, rounded to the nearer endpoint outside it.
pub fn facility_loss_averse_report(theta: &Exact, n: usize) -> Result<Exact> {
    check_theta(theta)?;
    check_agents(n)?;
    let half = rat(1, 2);
    let band = Exact::one() / int(2 * n as i64);
    Ok(if *theta < &half - &band {
        Exact::zero()
    } else if *theta > &half + &band {
        Exact::one()
    } else {
        theta * int(n as i64) - rat(n as i64 - 1, 2)
    })
}

fn steps(top: &Exact, step: &Exact) -> Vec<Exact> {
    let k = (top / step).to_integer().to_u64().expect("grid size fits");
    (0..=k).map(|i| step * int(i as i64)).collect()
}

/// Reports on the `delta` grid against the sum of the others' reports.
pub fn facility_game(spec: &FacilitySpec) -> Result<AgentGame<Exact>> {
    let n = spec.agent_count;
    let reports = steps(&Exact::one(), &spec.delta);
    let sums = steps(&int(n as i64 - 1), &spec.delta);
    let nn = int(n as i64);
    let rows = reports
        .iter()
        .map(|r| sums.iter().map(|s| -(&spec.theta - (r + s) / &nn).abs()).collect())
        .collect();
    AgentGame::new(
        format!("facility(n={n},theta={})", spec.theta),
        reports.iter().map(ToString::to_string).collect(),
        sums.iter().map(ToString::to_string).collect(),
        rows,
    )
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FacilityWelfareLoss {
    pub agent_count: usize,
    pub theta: Exact,
    pub reports: Vec<Exact>,
    pub facility: Exact,
    pub optimal_cost: Exact,
    pub realized_cost: Exact,
    pub loss: Exact,
}

/// All agents at `1/2 - 1/(2n)` play the loss-averse report.
pub fn facility_welfare_loss_demo(n: usize) -> Result<FacilityWelfareLoss> {
    check_agents(n)?;
    let theta = rat(1, 2) - rat(1, 2 * n as i64);
    let report = facility_loss_averse_report(&theta, n)?;
    let reports = vec![report; n];
    let facility = reports.iter().sum::<Exact>() / int(n as i64);
    let realized_cost: Exact = (0..n).map(|_| (&theta - &facility).abs()).sum();
    let optimal_cost = Exact::zero();
    Ok(FacilityWelfareLoss {
        agent_count: n,
        loss: &realized_cost - &optimal_cost,
        theta,
        reports,
        facility,
        optimal_cost,
        realized_cost,
    })
}

/// Positional scoring rule from one voter's perspective.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PsrSpec {
    pub name: String,
    pub ballots: Vec<Vec<u32>>,
    /// `f[0] = 1 > f[1] > ... > f[n-1] = 0`.
    pub utilities: Vec<Exact>,
    /// Largest aggregate score any candidate can have from the other voters.
    pub tally_cap: u32,
}

/// Largest state space a voting game may have.
pub const PSR_STATE_BUDGET: u64 = 100_000;

fn check_utilities(f: &[Exact]) -> Result<()> {
    if f.len() < 2 {
        return Err(Error::Parameter("need at least two candidates".into()));
    }
    if !f[0].is_one() || !f[f.len() - 1].is_zero() || f.windows(2).any(|w| w[0] <= w[1]) {
        return Err(Error::Parameter(
            "cardinal utilities must fall strictly from 1 to 0".into(),
        ));
    }
    Ok(())
}

impl PsrSpec {
    /// `tally_cap` defaults to twice the largest permissible score.
    pub fn new(name: impl Into<String>, ballots: Vec<Vec<u32>>, utilities: Vec<Exact>, tally_cap: Option<u32>) -> Result<Self> {
        check_utilities(&utilities)?;
        let n = utilities.len();
        if ballots.is_empty() || ballots.iter().any(|b| b.len() != n) {
            return Err(Error::Shape(format!("ballots must be nonempty score vectors of length {n}")));
        }
        let top = ballots.iter().flatten().copied().max().unwrap_or(0);
        Ok(Self {
            name: name.into(),
            ballots,
            utilities,
            tally_cap: tally_cap.unwrap_or(2 * top.max(1)),
        })
    }

    /// All `2^n` approval ballots.
    pub fn approval(utilities: Vec<Exact>, tally_cap: Option<u32>) -> Result<Self> {
        let n = utilities.len();
        if n > 16 {
            return Err(Error::Capacity(format!("{n} candidates is too many to enumerate approval ballots")));
        }
        let ballots = (0..1u32 << n)
            .map(|mask| (0..n).map(|i| (mask >> (n - 1 - i)) & 1).collect())
            .collect();
        Self::new("approval", ballots, utilities, tally_cap)
    }

    /// The `n` unit vectors.
    pub fn plurality(utilities: Vec<Exact>, tally_cap: Option<u32>) -> Result<Self> {
        let n = utilities.len();
        let ballots = (0..n).map(|j| unit(n, j)).collect();
        Self::new("plurality", ballots, utilities, tally_cap)
    }

    pub fn candidate_count(&self) -> usize {
        self.utilities.len()
    }

    pub fn max_score(&self) -> u32 {
        self.ballots.iter().flatten().copied().max().unwrap_or(0)
    }

    /// Non-fatal notes about the state space.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.tally_cap < self.max_score() {
            out.push(format!(
                "tally cap {} is below the largest ballot score {}; pivotal states may be missing",
                self.tally_cap,
                self.max_score()
            ));
        }
        out
    }
}

fn unit(n: usize, j: usize) -> Vec<u32> {
    (0..n).map(|i| u32::from(i == j)).collect()
}

/// `(1,0,1)`-style label.
pub fn vector_label(v: &[u32]) -> String {
    let parts: Vec<String> = v.iter().map(u32::to_string).collect();
    format!("({})", parts.join(","))
}

/// Highest total wins; ties go to the highest index.
pub fn psr_winner(tally: &[u32], ballot: &[u32]) -> usize {
    let totals: Vec<u32> = tally.iter().zip(ballot).map(|(t, b)| t + b).collect();
    let best = *totals.iter().max().expect("at least one candidate");
    totals.iter().rposition(|&t| t == best).unwrap()
}

pub fn psr_game(spec: &PsrSpec) -> Result<AgentGame<Exact>> {
    let n = spec.candidate_count();
    let side = spec.tally_cap as u64 + 1;
    let count = side.checked_pow(n as u32).filter(|&c| c <= PSR_STATE_BUDGET);
    let Some(count) = count else {
        return Err(Error::Capacity(format!(
            "{side}^{n} tally states exceed the budget {PSR_STATE_BUDGET}"
        )));
    };
    let states: Vec<Vec<u32>> = (0..count)
        .map(|mut k| {
            let mut v = vec![0u32; n];
            for slot in v.iter_mut().rev() {
                *slot = (k % side) as u32;
                k /= side;
            }
            v
        })
        .collect();
    let rows = spec
        .ballots
        .iter()
        .map(|b| states.iter().map(|t| spec.utilities[psr_winner(t, b)].clone()).collect())
        .collect();
    AgentGame::new(
        format!("psr:{}", spec.name),
        spec.ballots.iter().map(|b| vector_label(b)).collect(),
        states.iter().map(|t| vector_label(t)).collect(),
        rows,
    )
}

/// Ballots whose image `(v_1 - v_n, ..., v_{n-1} - v_n)` is Pareto-undominated.
pub fn voting_pareto_frontier(spec: &PsrSpec) -> Vec<Vec<u32>> {
    let image = |b: &[u32]| -> Vec<i64> {
        let last = i64::from(*b.last().unwrap());
        b[..b.len() - 1].iter().map(|&x| i64::from(x) - last).collect()
    };
    let images: Vec<Vec<i64>> = spec.ballots.iter().map(|b| image(b)).collect();
    let dominated = |i: usize| {
        images.iter().any(|other| {
            other.iter().zip(&images[i]).all(|(o, x)| o >= x) && other != &images[i]
        })
    };
    (0..spec.ballots.len())
        .filter(|&i| !dominated(i))
        .map(|i| spec.ballots[i].clone())
        .collect()
}

/// Vote for `c_j` with probability proportional to `1/f_j`, never for the last candidate.
pub fn plurality_mixed_loss_averse(utilities: &[Exact]) -> Result<MixedAction<Exact>> {
    let n = utilities.len();
    if n < 2 {
        return Err(Error::Parameter("need at least two candidates".into()));
    }
    if let Some(j) = utilities[..n - 1].iter().position(|f| !f.is_positive()) {
        return Err(Error::Parameter(format!(
            "utility of candidate {} must be positive to weight by its inverse",
            j + 1
        )));
    }
    let weights: Vec<Exact> = utilities[..n - 1].iter().map(|f| f.recip()).collect();
    let total: Exact = weights.iter().sum();
    MixedAction::new(
        (0..n).map(|j| {
            let p = if j + 1 < n { &weights[j] / &total } else { Exact::zero() };
            (vector_label(&unit(n, j)), p)
        }),
    )
}

/// `N_f`: the sum of `1/f_j` over all but the last candidate.
pub fn plurality_normalizer(utilities: &[Exact]) -> Exact {
    utilities[..utilities.len() - 1].iter().map(|f| f.recip()).sum()
}

/// Others' tally in which `c_j` and `c_n` are tied at 1 and everyone else has 0.
pub fn pivotal_state(n: usize, j: usize) -> String {
    let mut t = vec![0u32; n];
    t[j] = 1;
    t[n - 1] = 1;
    vector_label(&t)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegretChoice {
    pub ballot: String,
    pub max_regret: Exact,
    pub minimizers: Vec<String>,
}

/// Truthful plurality ballot and its max regret, cross-checked with the regret engine.
pub fn plurality_min_max_regret(utilities: &[Exact]) -> Result<RegretChoice> {
    let spec = PsrSpec::plurality(utilities.to_vec(), None)?;
    let game = psr_game(&spec)?;
    let ballot = vector_label(&unit(utilities.len(), 0));
    let minimizers = min_max_regret_actions(&game);
    if !minimizers.contains(&ballot) {
        return Err(Error::Consistency(format!(
            "truthful ballot {ballot} is not a regret minimizer ({minimizers:?})"
        )));
    }
    Ok(RegretChoice {
        max_regret: max_regret(&game, &ballot)?,
        ballot,
        minimizers,
    })
}

/// Smallest `k` whose top-`k` approval ballot minimizes max regret among top-`k` ballots.
pub fn approval_min_max_regret_top_k(utilities: &[Exact]) -> Result<(usize, Exact)> {
    let spec = PsrSpec::approval(utilities.to_vec(), None)?;
    let game = psr_game(&spec)?;
    let n = utilities.len();
    let mut best: Option<(usize, Exact)> = None;
    for k in 1..n {
        let ballot: Vec<u32> = (0..n).map(|i| u32::from(i < k)).collect();
        let r = max_regret(&game, &vector_label(&ballot))?;
        if best.as_ref().map_or(true, |(_, b)| r < *b) {
            best = Some((k, r));
        }
    }
    best.ok_or_else(|| Error::Parameter("need at least two candidates".into()))
}

/// Approval ballot approving everyone but the last candidate.
pub fn approval_all_but_worst(n: usize) -> String {
    vector_label(&(0..n).map(|i| u32::from(i + 1 < n)).collect::<Vec<_>>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concepts::{loss_averse_actions, mixed_loss_averse_falsify, safety_level_actions};

    #[test]
    fn facility_closed_form() {
        assert_eq!(facility_loss_averse_report(&rat(1, 2), 4).unwrap(), rat(1, 2));
        assert_eq!(facility_loss_averse_report(&rat(3, 5), 3).unwrap(), rat(4, 5));
        assert_eq!(facility_loss_averse_report(&rat(1, 5), 3).unwrap(), int(0));
        assert_eq!(facility_loss_averse_report(&rat(9, 10), 3).unwrap(), int(1));
        assert!(facility_loss_averse_report(&rat(3, 2), 3).is_err());
    }

    #[test]
    fn facility_game_matches_closed_form() {
        let spec = FacilitySpec::new(3, rat(3, 5), rat(1, 30)).unwrap();
        let g = facility_game(&spec).unwrap();
        assert_eq!(g.states().first().unwrap(), "0");
        assert_eq!(g.states().last().unwrap(), "2");
        assert_eq!(safety_level_actions(&g), vec!["4/5".to_string()]);
        assert_eq!(loss_averse_actions(&g), vec!["4/5".to_string()]);
        let half = facility_game(&FacilitySpec::new(4, rat(1, 2), rat(1, 10)).unwrap()).unwrap();
        assert!(safety_level_actions(&half).contains(&"1/2".to_string()));
        assert!(FacilitySpec::new(3, rat(1, 2), rat(2, 5)).is_err());
    }

    #[test]
    fn welfare_loss() {
        assert_eq!(facility_welfare_loss_demo(2).unwrap().loss, rat(1, 2));
        let ten = facility_welfare_loss_demo(10).unwrap();
        assert_eq!(ten.loss, rat(9, 2));
        assert_eq!(ten.facility, int(0));
    }

    #[test]
    fn plurality_state_evaluation() {
        assert_eq!(psr_winner(&[1, 0, 1], &[1, 0, 0]), 0);
        assert_eq!(psr_winner(&[1, 0, 1], &[0, 1, 0]), 2);
        let f = vec![int(1), rat(1, 2), int(0)];
        let g = psr_game(&PsrSpec::plurality(f, Some(2)).unwrap()).unwrap();
        assert_eq!(g.utility("(1,0,0)", "(1,0,1)").unwrap(), int(1));
        for b in g.actions() {
            assert_eq!(g.utility(b, "(2,0,0)").unwrap(), int(1));
        }
    }

    #[test]
    fn approval_three() {
        let f = vec![int(1), rat(1, 2), int(0)];
        let spec = PsrSpec::approval(f.clone(), None).unwrap();
        let g = psr_game(&spec).unwrap();
        assert_eq!(loss_averse_actions(&g), vec!["(1,1,0)".to_string()]);
        assert_eq!(voting_pareto_frontier(&spec), vec![vec![1, 1, 0]]);
        let p = PsrSpec::plurality(f, None).unwrap();
        assert_eq!(voting_pareto_frontier(&p), vec![vec![1, 0, 0], vec![0, 1, 0]]);
        let single = PsrSpec::new("one", vec![vec![0, 1, 0]], vec![int(1), rat(1, 2), int(0)], None).unwrap();
        assert_eq!(voting_pareto_frontier(&single), vec![vec![0, 1, 0]]);
        assert!(PsrSpec::new("low", vec![vec![3, 0, 0]], vec![int(1), rat(1, 2), int(0)], Some(1))
            .unwrap()
            .warnings()
            .len()
            == 1);
    }

    #[test]
    fn plurality_mixture() {
        let f = vec![int(1), rat(1, 2), rat(1, 4), int(0)];
        let m = plurality_mixed_loss_averse(&f).unwrap();
        assert_eq!(m.probability("(1,0,0,0)"), rat(1, 7));
        assert_eq!(m.probability("(0,0,1,0)"), rat(4, 7));
        assert_eq!(m.probability("(0,0,0,1)"), int(0));
        let two = plurality_mixed_loss_averse(&[int(1), int(0)]).unwrap();
        assert_eq!(two.probability("(1,0)"), int(1));
        let g = psr_game(&PsrSpec::plurality(f.clone(), None).unwrap()).unwrap();
        let w = m.weights(&g).unwrap();
        for j in 0..3 {
            let s = g.state_index(&pivotal_state(4, j)).unwrap();
            assert_eq!(g.mixed_utility_at(&w, s), plurality_normalizer(&f).recip());
        }
        let tilted = MixedAction::new([
            ("(1,0,0,0)".to_string(), rat(2, 7)),
            ("(0,1,0,0)".to_string(), rat(1, 7)),
            ("(0,0,1,0)".to_string(), rat(4, 7)),
        ])
        .unwrap();
        assert!(mixed_loss_averse_falsify(&g, &tilted, &[m]).unwrap().is_falsified());
        assert!(plurality_mixed_loss_averse(&[int(1), int(0), int(0)]).is_err());
    }

    #[test]
    fn regret() {
        let f = vec![int(1), rat(1, 2), rat(1, 4), int(0)];
        let r = plurality_min_max_regret(&f).unwrap();
        assert_eq!(r.ballot, "(1,0,0,0)");
        assert_eq!(r.max_regret, rat(1, 2));
        assert_eq!(approval_min_max_regret_top_k(&[int(1), int(0)]).unwrap().0, 1);
    }
}

//! The end-to-end verification battery: thirteen numbered checks, each
//! reproducing a closed form or running a property over many instances.
//!
//! Checks report failures instead of panicking, so a single run always
//! produces the full table.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::concepts::{
    augment_with_mixed_nature, evaluate, hierarchy_report, loss_averse_actions, loss_averse_star_actions,
    min_max_regret_actions, mixed_loss_averse_falsify, mixed_safety_level_solve_2x2, multi_leximin_actions,
    safety_level, safety_level_actions, strictly_dominated_actions, Concept, MixtureAugmentation,
};
use crate::continuum::{aim_big, aim_big_grid};
use crate::curated::{curated_game, CURATED_GAMES};
use crate::error::{Error, Result};
use crate::game::{AgentGame, MixedAction};
use crate::mechanisms::{
    approval_min_max_regret_top_k, facility_game, facility_loss_averse_report, facility_welfare_loss_demo,
    pivotal_state, plurality_min_max_regret, plurality_mixed_loss_averse, plurality_normalizer, psr_game,
    vector_label, voting_pareto_frontier, FacilitySpec, PsrSpec,
};
use crate::oracle::{naive_evaluate, naive_winner_determination};
use crate::scalar::{int, rat, Exact};
use crate::singleitem::{
    dfpa_game, dfpa_loss_averse_bid, dfpa_min_max_regret_bid, eps_net, fpa_no_loss_averse_witness, DfpaSpec,
};
use crate::vcg::{
    build_example_e2, classify_attack, enumerate_attacks, enumerate_valuations, example_e1_report,
    exact_bidding_optimal, full_bundle, nature_family, overbidding_adversary, random_instance, subsets,
    truth_loss_averse_witnesses, underbidding_adversary, utility_against, winner_determination, AttackKind,
    BundleValues, CombBid, CombValuation, EnumerationSpec, PaymentRule, SybilProfile,
};

/// How many random instances each check draws.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Budget {
    Tiny,
    Default,
}

impl Budget {
    fn count(self, default: usize) -> usize {
        match self {
            Budget::Default => default,
            Budget::Tiny => (default / 10).max(5),
        }
    }
}

impl FromStr for Budget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tiny" => Ok(Budget::Tiny),
            "default" => Ok(Budget::Default),
            _ => Err(Error::Parameter(format!("unknown budget `{s}`; expected tiny or default"))),
        }
    }
}

impl fmt::Display for Budget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Budget::Tiny => "tiny",
            Budget::Default => "default",
        })
    }
}

/// `(id, key, one-line description)` for every check.
pub const CRITERIA: [(u8, &str, &str); 13] = [
    (1, "dfpa-closed-form", "discrete first-price: the loss-averse bid is unique and matches the closed form"),
    (2, "fpa-no-loss-averse", "continuous first-price: every bid is refuted by a verified witness"),
    (3, "hierarchy", "inclusions hold on random games; curated games separate the concepts"),
    (4, "multi-leximin-exists", "multi-leximin is nonempty on random games"),
    (5, "dfpa-min-max-regret", "discrete first-price: min-max regret bid is the grid floor of v/2"),
    (6, "mixed-nature-collapse", "mixed nature states make loss-averse equal safety level"),
    (7, "aim-big-refinement", "aim-big verdicts; strictly dominated actions are never loss-averse*"),
    (8, "vcg-sybil-claims", "VCG Sybil attacks: over/underbidding adversaries, exact-bidding welfare and truth"),
    (9, "vcg-example-e1", "four-item XOS example: welfare collapse and regression values"),
    (10, "vcg-example-e2", "three-item underbidding example"),
    (11, "facility-location", "facility location closed form and welfare loss"),
    (12, "voting", "scoring rules: Pareto frontier, plurality mixture and regret"),
    (13, "oracle-equivalence", "engines agree with the naive oracles"),
];

#[derive(Clone, Debug)]
pub struct CriterionResult {
    pub id: u8,
    pub key: &'static str,
    pub passed: bool,
    pub detail: Vec<String>,
    pub elapsed: Duration,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{:>2}] {:<22} {} ({:.2?})",
            self.id,
            self.key,
            if self.passed { "PASS" } else { "FAIL" },
            self.elapsed
        )
    }
}

/// Accumulates facts and failures for one check.
#[derive(Default)]
struct Log {
    lines: Vec<String>,
    failures: usize,
}

impl Log {
    fn note(&mut self, line: impl Into<String>) {
        self.lines.push(line.into());
    }

    /// Records a failure; only the first few are spelled out.
    fn fail(&mut self, line: impl Into<String>) {
        self.failures += 1;
        if self.failures <= 5 {
            self.lines.push(format!("FAIL {}", line.into()));
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.fail(what());
        }
    }

    fn finish(mut self) -> (bool, Vec<String>) {
        if self.failures > 5 {
            self.lines.push(format!("... {} failures in total", self.failures));
        }
        (self.failures == 0, self.lines)
    }
}

pub fn run_criterion(id: u8, budget: Budget, seed: u64) -> Result<CriterionResult> {
    let &(_, key, _) = CRITERIA
        .iter()
        .find(|c| c.0 == id)
        .ok_or_else(|| Error::Parameter(format!("no check numbered {id}; valid ids are 1..=13")))?;
    let start = Instant::now();
    let mut log = Log::default();
    let run = match id {
        1 => dfpa_closed_form(&mut log),
        2 => fpa_witnesses(&mut log),
        3 => hierarchy(&mut log, budget, seed),
        4 => multi_leximin(&mut log, budget, seed),
        5 => dfpa_regret(&mut log),
        6 => mixed_collapse(&mut log, seed),
        7 => aim_big_check(&mut log, budget, seed),
        8 => vcg_claims(&mut log, budget, seed),
        9 => example_e1(&mut log),
        10 => example_e2(&mut log),
        11 => facility(&mut log),
        12 => voting(&mut log, seed),
        _ => oracle_equivalence(&mut log, budget, seed),
    };
    if let Err(e) = run {
        log.fail(format!("aborted: {e}"));
    }
    let (passed, detail) = log.finish();
    Ok(CriterionResult {
        id,
        key,
        passed,
        detail,
        elapsed: start.elapsed(),
    })
}

pub fn run_battery(budget: Budget, seed: u64) -> Vec<CriterionResult> {
    CRITERIA
        .iter()
        .map(|c| run_criterion(c.0, budget, seed).expect("registered id"))
        .collect()
}

// ---------------------------------------------------------------------------
// Instance generators
// ---------------------------------------------------------------------------

/// Up to 6 actions and 6 states with half-integer utilities in `[-5, 5]`.
pub fn random_game(rng: &mut impl Rng) -> AgentGame<Exact> {
    let actions: Vec<String> = (0..rng.gen_range(1..=6)).map(|i| format!("a{i}")).collect();
    let states: Vec<String> = (0..rng.gen_range(1..=6)).map(|i| format!("s{i}")).collect();
    let rows = actions
        .iter()
        .map(|_| states.iter().map(|_| rat(rng.gen_range(-10..=10), 2)).collect())
        .collect();
    AgentGame::new("random", actions, states, rows).expect("well-formed random game")
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ stream)
}

fn random_games(seed: u64, stream: u64, count: usize) -> Vec<AgentGame<Exact>> {
    let mut rng = rng_for(seed, stream);
    (0..count).map(|_| random_game(&mut rng)).collect()
}

fn dfpa_grid() -> Vec<(Exact, Exact)> {
    let values = [
        int(0),
        rat(1, 7),
        rat(1, 4),
        rat(1, 3),
        rat(1, 2),
        rat(2, 3),
        int(1),
        rat(6, 5),
        rat(3, 2),
        rat(7, 4),
        int(2),
        rat(5, 2),
    ];
    let epsilons = [rat(1, 10), rat(1, 5), rat(1, 4), rat(1, 3)];
    values
        .iter()
        .flat_map(|v| epsilons.iter().map(move |e| (v.clone(), e.clone())))
        .collect()
}

fn dfpa_for(v: &Exact, e: &Exact) -> Result<AgentGame<Exact>> {
    Ok(dfpa_game(&DfpaSpec::with_default_cap(v.clone(), e.clone())?))
}

/// Random game plus a column giving every action its own minimum, so the
/// column forces safety-level actions down to exactly the safety level.
fn with_floor(game: &AgentGame<Exact>) -> Result<AgentGame<Exact>> {
    let floor = (0..game.action_count())
        .map(|a| game.row(a).iter().min().expect("games have states").clone())
        .collect();
    game.with_extra_states(vec![("floor".into(), floor)])
}

fn augmented(game: &AgentGame<Exact>, epsilons: &[Exact]) -> Result<AgentGame<Exact>> {
    let base = with_floor(game)?;
    let mut out = base.clone();
    for bar in game.states() {
        let aug = MixtureAugmentation::new(&base, bar.clone(), "floor", epsilons.to_vec())?;
        let extra = augment_with_mixed_nature(&base, &aug)?;
        let cols: Vec<(String, Vec<Exact>)> = (base.state_count()..extra.state_count())
            .map(|s| {
                (
                    extra.states()[s].clone(),
                    (0..extra.action_count()).map(|a| extra.at(a, s).clone()).collect(),
                )
            })
            .collect();
        out = out.with_extra_states(cols)?;
    }
    Ok(out)
}

fn facility_pairs() -> Vec<(usize, Exact)> {
    (2..=5).flat_map(|n| (0..=20).map(move |i| (n, rat(i, 20)))).collect()
}

fn voting_utilities() -> Vec<Vec<Exact>> {
    vec![
        vec![int(1), int(0)],
        vec![int(1), rat(1, 2), int(0)],
        vec![int(1), rat(1, 5), int(0)],
        vec![int(1), rat(2, 3), rat(1, 3), int(0)],
        vec![int(1), rat(9, 10), rat(1, 10), int(0)],
    ]
}

fn voting_specs() -> Result<Vec<PsrSpec>> {
    let mut out = Vec::new();
    for f in voting_utilities() {
        out.push(PsrSpec::approval(f.clone(), None)?);
        out.push(PsrSpec::plurality(f, None)?);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// 1-7: solution concepts
// ---------------------------------------------------------------------------

fn dfpa_closed_form(log: &mut Log) -> Result<()> {
    let grid = dfpa_grid();
    let mut cases = [0usize; 3];
    for (v, e) in &grid {
        let bid = dfpa_loss_averse_bid(v, e)?;
        let net = eps_net(v, e)?;
        cases[if v.is_zero() {
            0
        } else if net == *v {
            1
        } else {
            2
        }] += 1;
        let got = loss_averse_actions(&dfpa_for(v, e)?);
        log.check(got == [bid.to_string()], || format!("v={v} eps={e}: expected {{{bid}}}, got {got:?}"));
    }
    log.note(format!(
        "{} (v, eps) pairs: {} with v=0, {} with v on the grid, {} off the grid",
        grid.len(),
        cases[0],
        cases[1],
        cases[2]
    ));
    log.check(cases.iter().all(|&c| c > 0), || "grid misses a case".into());
    Ok(())
}

fn fpa_witnesses(log: &mut Log) -> Result<()> {
    let v = int(1);
    for k in 0..100 {
        let bid = rat(k, 99);
        let w = fpa_no_loss_averse_witness(&v, &bid)?;
        log.check(w.verify(), || format!("witness for bid {bid} does not verify: {w:?}"));
    }
    log.note("100 bids k/99 on [0, 1], every witness re-verified");
    Ok(())
}

fn hierarchy(log: &mut Log, budget: Budget, seed: u64) -> Result<()> {
    let games = random_games(seed, 3, budget.count(1000));
    for (i, g) in games.iter().enumerate() {
        if let Err(e) = hierarchy_report(g) {
            log.fail(format!("random game {i}: {e}"));
        }
    }
    log.note(format!("{} random games, inclusions checked", games.len()));

    let la = |g: &AgentGame<Exact>, c: Concept| evaluate(g, c).satisfying_actions;
    let dfpa = curated_game("dfpa-example")?;
    let lex = la(&dfpa, Concept::Leximin);
    let la_dfpa = la(&dfpa, Concept::LossAverse);
    log.check(lex.iter().any(|a| !la_dfpa.contains(a)), || {
        format!("dfpa-example: leximin {lex:?} inside loss-averse {la_dfpa:?}")
    });
    log.note(format!("leximin {lex:?} not inside loss-averse {la_dfpa:?} (dfpa-example)"));

    let lp = curated_game("leximin-proof-game")?;
    let (a, b) = (la(&lp, Concept::LossAverse), la(&lp, Concept::MultiLeximin));
    log.check(a == ["a", "b"] && b == ["b"], || format!("leximin-proof-game: {a:?} / {b:?}"));
    log.note(format!("loss-averse {a:?} not inside multi-leximin {b:?} (leximin-proof-game)"));

    let dl = curated_game("dominant-leximin")?;
    let (a, b) = (la(&dl, Concept::WeaklyDominant), la(&dl, Concept::Leximin));
    log.check(a == ["a"] && b == ["b"], || format!("dominant-leximin: {a:?} / {b:?}"));
    log.note(format!("weakly dominant {a:?} not inside leximin {b:?} (dominant-leximin)"));

    let mr = curated_game("minmaxreg-safety")?;
    let (a, b) = (la(&mr, Concept::MinMaxRegret), la(&mr, Concept::SafetyLevel));
    log.check(a == ["b"] && b == ["a"], || format!("minmaxreg-safety: {a:?} / {b:?}"));
    log.note(format!("min-max regret {a:?} not inside safety level {b:?} (minmaxreg-safety)"));

    let sw = curated_game("safety-wrong-monotone")?;
    let mixed = mixed_safety_level_solve_2x2(&sw)?;
    let pure = safety_level_actions(&sw);
    let expected = MixedAction::new([("a".to_string(), rat(3, 4)), ("b".to_string(), rat(1, 4))])?;
    log.check(mixed == expected && pure == ["a", "b"], || {
        format!("safety-wrong-monotone: mixed {mixed:?}, pure {pure:?}")
    });
    log.note(format!(
        "pure safety level {pure:?} at 0, mixed safety level a:3/4 b:1/4 at {} (safety-wrong-monotone)",
        sw.mixed_utility(&mixed, "A")?
    ));
    Ok(())
}

fn multi_leximin(log: &mut Log, budget: Budget, seed: u64) -> Result<()> {
    let games = random_games(seed, 3, budget.count(1000));
    for (i, g) in games.iter().enumerate() {
        log.check(!multi_leximin_actions(g).is_empty(), || format!("random game {i} has none"));
    }
    log.note(format!("{} random games", games.len()));
    Ok(())
}

fn dfpa_regret(log: &mut Log) -> Result<()> {
    let grid = dfpa_grid();
    let mut ties = 0;
    for (v, e) in &grid {
        let half = v / int(2);
        let expected = eps_net(&half, e)?;
        log.check(dfpa_min_max_regret_bid(v, e)? == expected, || format!("closed form v={v} eps={e}"));
        let got = min_max_regret_actions(&dfpa_for(v, e)?);
        // max{b, v - b - eps} also ties at v/2 - eps when v/2 is itself a bid
        let mut characterized = vec![expected.clone()];
        if expected == half && half.is_positive() {
            characterized.insert(0, &half - e);
            ties += 1;
        }
        let characterized: Vec<String> = characterized.iter().map(ToString::to_string).collect();
        log.check(got == characterized, || {
            format!("v={v} eps={e}: expected {characterized:?}, got {got:?}")
        });
        log.check(got == [expected.to_string()], || {
            format!("v={v} eps={e}: min-max regret set {got:?} is not the singleton {{{expected}}}")
        });
    }
    log.note(format!(
        "{} (v, eps) pairs; grid floor of v/2 always minimizes max regret; {ties} pairs with v/2 on the grid tie it with v/2 - eps",
        grid.len()
    ));
    Ok(())
}

fn mixed_collapse(log: &mut Log, seed: u64) -> Result<()> {
    let games = random_games(seed, 6, 20);
    let eps = [rat(1, 10), rat(1, 100)];
    let (mut already, mut collapsed) = (0, 0);
    let mut worst_gap = Exact::zero();
    for (i, g) in games.iter().enumerate() {
        let floor = with_floor(g)?;
        let safety = safety_level_actions(&floor);
        if loss_averse_actions(&floor) == safety {
            already += 1;
        }
        let aug = augmented(g, &eps)?;
        let la = loss_averse_actions(&aug);
        if la == safety {
            collapsed += 1;
        } else {
            log.fail(format!("game {i}: loss-averse {la:?} vs safety level {safety:?}"));
        }
        worst_gap = worst_gap.max(limit_gap(&aug, &safety, &safety_level(&floor)));
    }
    log.note(format!(
        "{collapsed}/20 collapse with eps in {{1/10, 1/100}}; {already}/20 already had loss-averse = safety level before augmentation"
    ));
    log.note(format!(
        "largest gap between a safety-level action's difference-set minimum and the safety level: {worst_gap}; it scales with eps and vanishes only in the limit"
    ));
    Ok(())
}

/// Largest `min_D(a, a') u(a) - L` over pairs of safety-level actions.
fn limit_gap(game: &AgentGame<Exact>, safety: &[String], level: &Exact) -> Exact {
    let idx: Vec<usize> = safety.iter().map(|a| game.action_index(a).expect("known action")).collect();
    let mut gap = Exact::zero();
    for &a in &idx {
        for &b in &idx {
            let d = game.difference_indices(a, b);
            if let Some(m) = d.iter().map(|&s| game.at(a, s)).min() {
                gap = gap.max(m - level);
            }
        }
    }
    gap
}

fn aim_big_check(log: &mut Log, budget: Budget, seed: u64) -> Result<()> {
    let g = aim_big();
    let la = g.evaluate(Concept::LossAverse)?.satisfying_actions;
    let star = g.evaluate(Concept::LossAverseStar)?.satisfying_actions;
    log.check(la == ["B", "S"] && star == ["S"], || format!("aim-big: {la:?} / {star:?}"));
    log.note(format!("aim-big: loss-averse {la:?}, loss-averse* {star:?}"));
    let grid = aim_big_grid(&rat(1, 10))?;
    log.check(strictly_dominated_actions(&grid).is_empty(), || "aim-big grid has a dominated action".into());
    let games = random_games(seed, 7, budget.count(200));
    for (i, g) in games.iter().enumerate() {
        let star = loss_averse_star_actions(g);
        let dominated = strictly_dominated_actions(g);
        log.check(dominated.iter().all(|a| !star.contains(a)), || {
            format!("random game {i}: dominated {dominated:?} meets loss-averse* {star:?}")
        });
    }
    log.note(format!("{} random games", games.len()));
    Ok(())
}

// ---------------------------------------------------------------------------
// 8-10: VCG
// ---------------------------------------------------------------------------

const RULE: PaymentRule = PaymentRule::ClarkePivot;

fn describe(v: &CombValuation, bids: &[CombBid]) -> String {
    let bids: Vec<String> = bids.iter().map(|b| format!("{b:?}")).collect();
    format!("v={v:?} attack=[{}]", bids.join(", "))
}

#[derive(Default)]
struct ClaimTally {
    over: (usize, usize),
    under: (usize, usize),
    exact: (usize, usize),
    reversals: usize,
    /// Failures in which the valuation and every bid are monotone.
    monotone_failures: usize,
}

impl ClaimTally {
    fn line(&self, label: &str) -> String {
        format!(
            "{label}: overbidding {}/{} certified, underbidding {}/{} certified ({} family reversals), exact-bidding {}/{} truth witnesses; {} failures have a monotone valuation and monotone bids",
            self.over.0 - self.over.1,
            self.over.0,
            self.under.0 - self.under.1,
            self.under.0,
            self.reversals,
            self.exact.0 - self.exact.1,
            self.exact.0,
            self.monotone_failures
        )
    }
}

/// Claims 1, 2 and 4 for one agent against single-bidder nature states.
fn check_attack(
    log: &mut Log,
    tally: &mut ClaimTally,
    v: &CombValuation,
    bids: &[CombBid],
    epsilon: &Exact,
    family: &[CombBid],
) -> Result<()> {
    let failures = tally.over.1 + tally.under.1 + tally.exact.1;
    match classify_attack(v, bids)?.kind {
        AttackKind::Overbidding => {
            tally.over.0 += 1;
            if let Err(e) = overbidding_adversary(v, bids, epsilon, RULE) {
                tally.over.1 += 1;
                log.fail(format!("overbidding {}: {e}", describe(v, bids)));
            }
        }
        AttackKind::Underbidding => {
            tally.under.0 += 1;
            match underbidding_adversary(v, bids, epsilon, RULE, family) {
                Ok(c) => {
                    tally.reversals += c.reversals.len();
                    if !c.holds() {
                        tally.under.1 += 1;
                        log.fail(format!("underbidding {}: certificate {c:?}", describe(v, bids)));
                    }
                }
                Err(e) => {
                    tally.under.1 += 1;
                    log.fail(format!("underbidding {}: {e}", describe(v, bids)));
                }
            }
        }
        AttackKind::ExactBidding => {
            tally.exact.0 += 1;
            if let Err(e) = truth_loss_averse_witnesses(v, bids, RULE, family) {
                tally.exact.1 += 1;
                log.fail(format!("exact-bidding {}: {e}", describe(v, bids)));
            }
        }
    }
    if tally.over.1 + tally.under.1 + tally.exact.1 > failures && is_monotone(v) && bids.iter().all(is_monotone) {
        tally.monotone_failures += 1;
    }
    Ok(())
}

fn check_welfare(log: &mut Log, profiles: &[SybilProfile], m: usize) -> Result<bool> {
    let chain = exact_bidding_optimal(profiles, m)?;
    if !chain.holds() {
        let agents: Vec<String> = profiles.iter().map(|p| describe(&p.valuation, &p.bids)).collect();
        log.fail(format!("welfare chain {chain:?} for {}", agents.join("; ")));
    }
    Ok(chain.holds())
}

fn is_monotone(v: &CombValuation) -> bool {
    (0..=full_bundle(v.item_count())).all(|s| subsets(s).all(|r| v.value(r) <= v.value(s)))
}

/// `max_{R subset S} w(R)`.
fn monotone(w: &CombValuation) -> CombValuation {
    BundleValues::from_fn(w.item_count(), |s| subsets(s).map(|r| w.value(r).clone()).max().unwrap())
        .expect("non-negative entries")
}

/// `w(S & part)`.
fn restricted(w: &CombValuation, part: u16) -> CombBid {
    BundleValues::from_fn(w.item_count(), |s| w.value(s & part).clone()).expect("non-negative entries")
}

/// A valuation separable across a random split of the items, and the two
/// Sybil bids that each report one side of it.
fn separable_exact(rng: &mut ChaCha8Rng, spec: &EnumerationSpec) -> Result<(CombValuation, Vec<CombBid>)> {
    let m = spec.item_count;
    let part = rng.gen_range(1..full_bundle(m));
    let w1 = monotone(&random_instance(spec, rng.gen())?[0]);
    let w2 = monotone(&random_instance(spec, rng.gen())?[0]);
    let (b1, b2) = (restricted(&w1, part), restricted(&w2, full_bundle(m) & !part));
    let v = BundleValues::from_fn(m, |s| b1.value(s) + b2.value(s))?;
    Ok((v, vec![b1, b2]))
}

fn random_bid(rng: &mut ChaCha8Rng, spec: &EnumerationSpec) -> Result<CombBid> {
    Ok(random_instance(spec, rng.gen())?.swap_remove(0))
}

fn vcg_claims(log: &mut Log, budget: Budget, seed: u64) -> Result<()> {
    let (eps, cap) = (int(1), int(2));
    for m in 1..=2usize {
        let sybils = if budget == Budget::Tiny && m == 2 { 1 } else { 2 };
        let spec = EnumerationSpec::new(m, 3, cap.clone(), eps.clone(), sybils)?;
        let family = nature_family(m, &eps, &cap)?;
        let valuations = enumerate_valuations(&spec)?;
        let attacks = enumerate_attacks(&spec)?;
        let mut tally = ClaimTally::default();
        let mut exact = Vec::new();
        let mut ir_failures = 0;
        for v in &valuations {
            let truth = SybilProfile::truthful(v.clone());
            for state in &family {
                if utility_against(&truth, state, RULE)?.is_negative() {
                    ir_failures += 1;
                }
            }
            for a in &attacks {
                check_attack(log, &mut tally, v, a, &eps, &family)?;
                if classify_attack(v, a)?.kind == AttackKind::ExactBidding {
                    exact.push(SybilProfile::new(v.clone(), a.clone())?);
                }
            }
        }
        log.check(ir_failures == 0, || format!("m={m}: truth has negative utility in {ir_failures} states"));
        log.note(tally.line(&format!(
            "m={m} exhaustive ({} valuations x {} attacks, {} nature states)",
            valuations.len(),
            attacks.len(),
            family.len()
        )));

        let mut pairs = 0;
        let mut bad = 0;
        let pair_limit = if budget == Budget::Tiny { 50 } else { exact.len() };
        for p in exact.iter().take(pair_limit) {
            for q in &exact {
                pairs += 1;
                bad += usize::from(!check_welfare(log, &[p.clone(), q.clone()], m)?);
            }
        }
        let mut rng = rng_for(seed, 80 + m as u64);
        let triples = budget.count(2000);
        for _ in 0..triples {
            let pick = |rng: &mut ChaCha8Rng| exact[rng.gen_range(0..exact.len())].clone();
            let profiles = [pick(&mut rng), pick(&mut rng), pick(&mut rng)];
            bad += usize::from(!check_welfare(log, &profiles, m)?);
        }
        log.note(format!(
            "m={m} exact-bidding welfare: {pairs} two-agent profiles, {triples} sampled three-agent profiles, {bad} below the truthful optimum"
        ));
    }

    let spec = EnumerationSpec::new(3, 3, cap.clone(), eps.clone(), 2)?;
    let family = nature_family(3, &eps, &cap)?;
    let mut rng = rng_for(seed, 83);
    let mut tally = ClaimTally::default();
    let count = budget.count(500);
    let mut bad = 0;
    for _ in 0..count {
        let v = random_bid(&mut rng, &spec)?;
        let attack = if rng.gen_bool(0.5) {
            vec![random_bid(&mut rng, &spec)?]
        } else {
            vec![random_bid(&mut rng, &spec)?, random_bid(&mut rng, &spec)?]
        };
        check_attack(log, &mut tally, &v, &attack, &eps, &family)?;
        let agents: Vec<(CombValuation, Vec<CombBid>)> =
            (0..3).map(|_| separable_exact(&mut rng, &spec)).collect::<Result<_>>()?;
        check_attack(log, &mut tally, &agents[0].0, &agents[0].1, &eps, &family)?;
        let profiles: Vec<SybilProfile> =
            agents.into_iter().map(|(v, b)| SybilProfile::new(v, b)).collect::<Result<_>>()?;
        bad += usize::from(!check_welfare(log, &profiles, 3)?);
    }
    log.note(tally.line(&format!("m=3 random ({count} seeded instances, {} nature states)", family.len())));
    log.note(format!("m=3 exact-bidding welfare: {count} three-agent profiles, {bad} below the truthful optimum"));
    Ok(())
}

fn example_e1(log: &mut Log) -> Result<()> {
    for e in [rat(1, 10), rat(1, 100)] {
        let r = example_e1_report(&e)?;
        let six = &e * int(6);
        for out in [&r.attack_clarke, &r.attack_literal] {
            log.check(out.sybil_bundle(0, 0) == 0b0011 && out.sybil_bundle(0, 1) == 0b1100, || {
                format!("eps={e} {}: attack allocation {:?}", out.rule, out.allocation)
            });
            log.check(out.real_welfare == six && out.observed_welfare == int(40), || {
                format!("eps={e} {}: welfare {} / {}", out.rule, out.observed_welfare, out.real_welfare)
            });
        }
        let vals = crate::vcg::build_example_e1(&e)?.valuations();
        let refs: Vec<&CombBid> = vals.iter().collect();
        let (oracle_opt, _) = naive_winner_determination(&refs, 4)?;
        log.check(r.truthful.observed_welfare == oracle_opt && oracle_opt == int(18) + &six, || {
            format!("eps={e}: truthful optimum {} vs oracle {oracle_opt}", r.truthful.observed_welfare)
        });
        log.check(r.truthful.agent_bundles == [0b1100, 0b0001, 0b0010], || {
            format!("eps={e}: truthful bundles {:?}", r.truthful.agent_bundles)
        });
        log.check(r.attack_clarke.payments[0] == [int(18), int(18)], || {
            format!("eps={e}: clarke payments {:?}", r.attack_clarke.payments[0])
        });
        log.check(r.attack_clarke.utilities[0] == &six - int(36), || format!("eps={e}: clarke utility"));
        log.check(r.attack_literal.payments[0] == [int(20), int(20)], || {
            format!("eps={e}: literal payments {:?}", r.attack_literal.payments[0])
        });
        log.check(r.attack_literal.utilities[0] == &six - int(40), || format!("eps={e}: literal utility"));
        log.check(r.truthful.payments[0] == [&e * int(2)], || format!("eps={e}: truthful payment"));
        log.check(r.truthful.utilities == [&e * int(4), int(9), int(9)], || {
            format!("eps={e}: truthful utilities {:?}", r.truthful.utilities)
        });
        log.check(r.flags.len() == 3, || format!("eps={e}: flags {:?}", r.flags));
        log.note(format!(
            "eps={e}: attack welfare 40 observed, {six} real; truthful optimum {}; flags: {}",
            r.truthful.observed_welfare,
            r.flags.join("; ")
        ));
    }
    Ok(())
}

fn example_e2(log: &mut Log) -> Result<()> {
    let e = rat(1, 10);
    let ex = build_example_e2(&e)?;
    let ut = utility_against(&ex.truthful_profile(), &ex.nature, RULE)?;
    let ua = utility_against(&ex.attack_profile(), &ex.nature, RULE)?;
    let kind = classify_attack(&ex.valuation, &ex.attack)?.kind;
    log.check(ut == e && ua == &e * int(2), || format!("utilities truth {ut}, attack {ua}"));
    log.check(kind == AttackKind::Underbidding, || format!("classified as {kind}"));
    log.note(format!("eps={e}: truth {ut}, attack {ua}, attack is {kind}"));
    Ok(())
}

// ---------------------------------------------------------------------------
// 11-13: mechanisms and oracles
// ---------------------------------------------------------------------------

fn facility(log: &mut Log) -> Result<()> {
    let pairs = facility_pairs();
    let mut singleton = 0;
    for (n, theta) in &pairs {
        let report = facility_loss_averse_report(theta, *n)?.to_string();
        let g = facility_game(&FacilitySpec::new(*n, theta.clone(), rat(1, 20))?)?;
        let (la, safety) = (loss_averse_actions(&g), safety_level_actions(&g));
        singleton += usize::from(safety.len() == 1);
        log.check(la == [report.clone()] && safety.contains(&report), || {
            format!("n={n} theta={theta}: closed form {report}, loss-averse {la:?}, safety {safety:?}")
        });
    }
    log.note(format!(
        "{} (theta, n) pairs on the 1/20 grid; safety level is a singleton in {singleton}",
        pairs.len()
    ));
    for n in 2..=10usize {
        let d = facility_welfare_loss_demo(n)?;
        let expected = (rat(1, 2) - rat(1, 2 * n as i64)) * int(n as i64);
        log.check(d.loss == expected, || format!("n={n}: loss {} vs {expected}", d.loss));
    }
    log.note("welfare loss (1/2 - 1/(2n)) n for n = 2..10");
    Ok(())
}

fn voting(log: &mut Log, seed: u64) -> Result<()> {
    for spec in voting_specs()? {
        let la = loss_averse_actions(&psr_game(&spec)?);
        let frontier: Vec<String> = voting_pareto_frontier(&spec).iter().map(|b| vector_label(b)).collect();
        let mut sorted = la.clone();
        sorted.sort();
        let mut f_sorted = frontier.clone();
        f_sorted.sort();
        log.check(sorted == f_sorted, || {
            format!("{} {:?}: loss-averse {la:?} vs frontier {frontier:?}", spec.name, spec.utilities)
        });
    }
    log.note(format!("{} approval and plurality specs, n in 2..=4", voting_specs()?.len()));

    let mut rng = rng_for(seed, 12);
    let mut perturbed = 0;
    let mixed_cases: Vec<Vec<Exact>> = voting_utilities().into_iter().filter(|f| f.len() > 2).collect();
    let cases = mixed_cases.len();
    for (idx, f) in mixed_cases.into_iter().enumerate() {
        let quota = 50 / cases + usize::from(idx < 50 % cases);
        let n = f.len();
        let g = psr_game(&PsrSpec::plurality(f.clone(), None)?)?;
        let p = plurality_mixed_loss_averse(&f)?;
        let w = p.weights(&g)?;
        let target = plurality_normalizer(&f).recip();
        for j in 0..n - 1 {
            let s = g.state_index(&pivotal_state(n, j))?;
            let u = g.mixed_utility_at(&w, s);
            log.check(u == target, || format!("{f:?}: pivotal state {j} gives {u}, expected {target}"));
        }
        let ballots: Vec<String> = (0..n).map(|j| vector_label(&unit(n, j))).collect();
        let mut made = 0;
        while made < quota {
            let (from, to) = (rng.gen_range(0..n), rng.gen_range(0..n - 1));
            if from == to {
                continue;
            }
            let have = p.probability(&ballots[from]);
            if have.is_zero() {
                continue;
            }
            let shift = &have * rat(rng.gen_range(1..=9), 10);
            let q = MixedAction::new(ballots.iter().enumerate().map(|(k, b)| {
                let mut x = p.probability(b);
                if k == from {
                    x -= &shift;
                }
                if k == to {
                    x += &shift;
                }
                (b.clone(), x)
            }))?;
            made += 1;
            perturbed += 1;
            log.check(mixed_loss_averse_falsify(&g, &q, &[p.clone()])?.is_falsified(), || {
                format!("{f:?}: perturbed mixture {q:?} not falsified")
            });
        }
        let r = plurality_min_max_regret(&f)?;
        log.check(r.ballot == ballots[0], || format!("{f:?}: regret ballot {}", r.ballot));
    }
    log.check(perturbed == 50, || format!("only {perturbed} perturbations generated"));
    log.note(format!("plurality mixture equalizes at 1/N_f; {perturbed} perturbed mixtures falsified"));

    let f = [int(1), rat(9, 10), rat(1, 10), int(0)];
    let (k, regret) = approval_min_max_regret_top_k(&f)?;
    log.check(k == APPROVAL_TOP_K.0 && regret == rat(APPROVAL_TOP_K.1, APPROVAL_TOP_K.2), || {
        format!("approval top-k for (1, 9/10, 1/10, 0): k={k}, regret {regret}")
    });
    log.note(format!("approval min-max regret over top-k ballots for (1, 9/10, 1/10, 0): k={k}, regret {regret}"));
    Ok(())
}

/// Regression value: `(k, regret numerator, regret denominator)`.
const APPROVAL_TOP_K: (usize, i64, i64) = (2, 1, 10);

fn unit(n: usize, j: usize) -> Vec<u32> {
    (0..n).map(|i| u32::from(i == j)).collect()
}

fn oracle_equivalence(log: &mut Log, budget: Budget, seed: u64) -> Result<()> {
    let mut games: Vec<AgentGame<Exact>> = Vec::new();
    games.extend(random_games(seed, 3, budget.count(1000)));
    games.extend(random_games(seed, 7, budget.count(200)));
    for g in random_games(seed, 6, 20) {
        games.push(augmented(&g, &[rat(1, 10), rat(1, 100)])?);
    }
    for name in CURATED_GAMES {
        games.push(curated_game(name)?);
    }
    for (v, e) in dfpa_grid() {
        games.push(dfpa_for(&v, &e)?);
    }
    for (n, theta) in facility_pairs() {
        games.push(facility_game(&FacilitySpec::new(n, theta, rat(1, 20))?)?);
    }
    for spec in voting_specs()? {
        games.push(psr_game(&spec)?);
    }
    let mut compared = 0;
    for g in &games {
        for c in Concept::ALL {
            match naive_evaluate(g, c) {
                Ok(naive) => {
                    compared += 1;
                    let engine = evaluate(g, c).satisfying_actions;
                    log.check(engine == naive, || {
                        format!("{} {c}: engine {engine:?}, oracle {naive:?}", g.type_label())
                    });
                }
                Err(Error::Capacity(_)) => {}
                Err(e) => return Err(e),
            }
        }
    }
    log.note(format!("{} games, {compared} concept evaluations compared", games.len()));

    let mut bid_sets: Vec<(Vec<CombBid>, usize)> = Vec::new();
    for e in [rat(1, 10), rat(1, 100)] {
        let ex = crate::vcg::build_example_e1(&e)?;
        bid_sets.push((ex.valuations(), 4));
        let mut attack = ex.attack.clone();
        attack.extend(ex.valuations().into_iter().skip(1));
        bid_sets.push((attack, 4));
    }
    let e2 = build_example_e2(&rat(1, 10))?;
    let mut b = e2.attack.clone();
    b.push(e2.nature.clone());
    bid_sets.push((b, 3));
    bid_sets.push((vec![e2.valuation.clone(), e2.nature.clone()], 3));
    for m in 1..=2usize {
        let spec = EnumerationSpec::new(m, 3, int(2), int(1), 2)?;
        let family = nature_family(m, &int(1), &int(2))?;
        let valuations = enumerate_valuations(&spec)?;
        let attacks = enumerate_attacks(&spec)?;
        let stride = if budget == Budget::Tiny { 97 } else { 1 };
        let mut k = 0usize;
        for v in &valuations {
            for a in attacks.iter().step_by(stride) {
                let mut bids = a.clone();
                bids.push(family[k % family.len()].clone());
                bids.push(v.clone());
                k += 1;
                bid_sets.push((bids, m));
            }
        }
    }
    let spec = EnumerationSpec::new(3, 3, int(2), int(1), 2)?;
    for s in 0..budget.count(500) as u64 {
        bid_sets.push((random_instance(&spec, seed ^ (s << 8))?, 3));
    }
    let mut checked = 0;
    for (bids, m) in &bid_sets {
        if (bids.len() as u128).pow(*m as u32) > 1_000_000 {
            continue;
        }
        let refs: Vec<&CombBid> = bids.iter().collect();
        let (best, _) = naive_winner_determination(&refs, *m)?;
        let engine = winner_determination(&refs, *m)?.observed_welfare(&refs);
        checked += 1;
        log.check(engine == best, || format!("m={m} bids {bids:?}: engine {engine}, oracle {best}"));
    }
    log.note(format!("{checked} winner-determination instances compared"));
    Ok(())
}

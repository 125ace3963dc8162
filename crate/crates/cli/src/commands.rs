//! One function per analysis; each returns a [`Report`].

use loss_aversion::concepts::{
    evaluate, hierarchy_report, min_max_regret_actions, safety_level_actions, Concept, ConceptVerdict,
};
use loss_aversion::format::{game_to_json, mixed_to_json, verdicts_to_json};
use loss_aversion::mechanisms::{
    approval_min_max_regret_top_k, facility_game, facility_loss_averse_report, facility_welfare_loss_demo,
    plurality_min_max_regret, plurality_mixed_loss_averse, plurality_normalizer, psr_game, vector_label,
    voting_pareto_frontier, FacilitySpec, PsrSpec,
};
use loss_aversion::singleitem::{
    all_pay_game, all_pay_loss_averse_bid, dfpa_game, dfpa_loss_averse_bid, dfpa_min_max_regret_bid,
    dfpa_revenue_floor, fpa_no_loss_averse_witness, DfpaSpec,
};
use loss_aversion::vcg::{
    classify_attack, enumerate_instances, example_e1_report, full_bundle, nature_family,
    outcome_to_json, overbidding_adversary, run_vcg, subsets, truth_loss_averse_witnesses,
    underbidding_adversary, AttackKind, Bundle, CombBid, CombValuation, EnumerationSpec, PaymentRule, TruthCase,
    VcgInstance,
};
use loss_aversion::battery::{run_battery, Budget, CRITERIA};
use loss_aversion::{AgentGame, Error, Exact, Result};

use crate::report::{Report, Table};

/// Exit status for a failed check, matching consistency errors.
pub const FAILED: i32 = 5;

fn list(items: &[String]) -> String {
    format!("{{{}}}", items.join(", "))
}

fn attach_game(report: &mut Report, game: &AgentGame<Exact>) {
    let text = game_to_json(game);
    report.embed("game", &text);
    report.artifacts.push(("game.json".into(), text));
}

fn verdict_tables(report: &mut Report, verdicts: &[ConceptVerdict<Exact>]) {
    let mut sets = Table::new("verdicts", &["concept", "actions", "refuted"]);
    let mut wit = Table::new(
        "witnesses",
        &["concept", "action", "competitor", "states", "action_value", "competitor_value"],
    )
    .exact(&["action_value", "competitor_value"]);
    for v in verdicts {
        sets.row([v.concept.to_string(), list(&v.satisfying_actions), v.witnesses.len().to_string()]);
        for w in &v.witnesses {
            wit.row([
                v.concept.to_string(),
                w.action.clone(),
                w.competitor.clone().unwrap_or_default(),
                w.states.join(" "),
                w.action_value.to_string(),
                w.competitor_value.to_string(),
            ]);
        }
    }
    report.tables.push(sets);
    if !wit.rows.is_empty() {
        report.tables.push(wit);
    }
    report.embed("verdicts", &verdicts_to_json(verdicts));
}

pub fn analyze(game: &AgentGame<Exact>, concepts: &[Concept], hierarchy: bool) -> Result<Report> {
    let mut r = Report::new("analyze");
    r.put("type_label", game.type_label());
    let verdicts: Vec<_> = concepts.iter().map(|&c| evaluate(game, c)).collect();
    verdict_tables(&mut r, &verdicts);
    if hierarchy {
        let h = hierarchy_report(game)?;
        let mut t = Table::new("inclusions", &["subset", "superset", "required", "holds"]);
        for c in &h.inclusions {
            t.row([c.subset.to_string(), c.superset.to_string(), c.required.to_string(), c.holds.to_string()]);
        }
        r.put(
            "inclusions",
            h.inclusions
                .iter()
                .map(|c| {
                    serde_json::json!({
                        "subset": c.subset.name(), "superset": c.superset.name(),
                        "required": c.required, "holds": c.holds,
                    })
                })
                .collect::<Vec<_>>(),
        );
        r.tables.push(t);
    }
    attach_game(&mut r, game);
    Ok(r)
}

fn dfpa_spec(value: &Exact, epsilon: &Exact, cap: Option<&Exact>) -> Result<DfpaSpec> {
    match cap {
        Some(c) => DfpaSpec::new(value.clone(), epsilon.clone(), c.clone()),
        None => DfpaSpec::with_default_cap(value.clone(), epsilon.clone()),
    }
}

fn quantity_table(rows: &[(&str, String)]) -> Table {
    let mut t = Table::new("result", &["quantity", "value"]).exact(&["value"]);
    for (k, v) in rows {
        t.row([k.to_string(), v.clone()]);
    }
    t
}

pub fn dfpa(value: &Exact, epsilon: &Exact, cap: Option<&Exact>) -> Result<Report> {
    let spec = dfpa_spec(value, epsilon, cap)?;
    let game = dfpa_game(&spec);
    let la = dfpa_loss_averse_bid(value, epsilon)?;
    let mmr = dfpa_min_max_regret_bid(value, epsilon)?;
    let la_set = evaluate(&game, Concept::LossAverse);
    let mmr_set = evaluate(&game, Concept::MinMaxRegret);
    if la_set.satisfying_actions != [la.to_string()] {
        return Err(Error::Consistency(format!(
            "closed-form loss-averse bid {la} but the engine finds {:?} on {}",
            la_set.satisfying_actions,
            game_to_json(&game)
        )));
    }
    let mut r = Report::new("auction dfpa");
    r.tables.push(quantity_table(&[
        ("value", value.to_string()),
        ("epsilon", epsilon.to_string()),
        ("nature_bid_cap", spec.nature_bid_cap().to_string()),
        ("loss_averse_bid", la.to_string()),
        ("min_max_regret_bid", mmr.to_string()),
    ]));
    r.put("value", value.to_string());
    r.put("epsilon", epsilon.to_string());
    r.put("loss_averse_bid", la.to_string());
    r.put("min_max_regret_bid", mmr.to_string());
    if !mmr_set.contains(&mmr.to_string()) {
        r.notes.push(format!(
            "closed-form regret bid {mmr} is not among the engine's minimizers {}",
            list(&mmr_set.satisfying_actions)
        ));
    }
    verdict_tables(&mut r, &[la_set, mmr_set]);
    attach_game(&mut r, &game);
    Ok(r)
}

pub fn all_pay(value: &Exact, epsilon: &Exact, cap: Option<&Exact>) -> Result<Report> {
    let spec = dfpa_spec(value, epsilon, cap)?;
    let game = all_pay_game(&spec);
    let bid = all_pay_loss_averse_bid(value);
    let la_set = evaluate(&game, Concept::LossAverse);
    if la_set.satisfying_actions != [bid.to_string()] {
        return Err(Error::Consistency(format!(
            "closed-form all-pay bid {bid} but the engine finds {:?} on {}",
            la_set.satisfying_actions,
            game_to_json(&game)
        )));
    }
    let mut r = Report::new("auction allpay");
    r.tables.push(quantity_table(&[
        ("value", value.to_string()),
        ("epsilon", epsilon.to_string()),
        ("loss_averse_bid", bid.to_string()),
    ]));
    r.put("loss_averse_bid", bid.to_string());
    verdict_tables(&mut r, &[la_set]);
    attach_game(&mut r, &game);
    Ok(r)
}

pub fn fpa_witness(value: &Exact, bid: &Exact) -> Result<Report> {
    let w = fpa_no_loss_averse_witness(value, bid)?;
    if !w.verify() {
        return Err(Error::Consistency(format!("witness does not re-verify: {w:?}")));
    }
    let mut r = Report::new("auction fpa-witness");
    let rows = [
        ("value", w.value.to_string()),
        ("bid", w.bid.to_string()),
        ("deviation", w.deviation.to_string()),
        ("state", w.state.to_string()),
        ("bid_min", w.bid_min.to_string()),
        ("deviation_min", w.deviation_min.to_string()),
    ];
    for (k, v) in &rows {
        r.put(k, v.clone());
    }
    r.put("verified", true);
    r.tables.push(quantity_table(&rows));
    Ok(r)
}

pub fn revenue(values: &[Exact], epsilon: &Exact) -> Result<Report> {
    let f = dfpa_revenue_floor(values, epsilon)?;
    let mut r = Report::new("auction revenue");
    let mut t = Table::new("bids", &["bidder", "value", "loss_averse_bid"]).exact(&["value", "loss_averse_bid"]);
    for (i, (v, b)) in values.iter().zip(&f.bids).enumerate() {
        t.row([i.to_string(), v.to_string(), b.to_string()]);
    }
    r.tables.push(t);
    r.tables.push(quantity_table(&[
        ("winner", f.winner.to_string()),
        ("revenue", f.realized.to_string()),
        ("floor", f.floor.to_string()),
    ]));
    r.put("bids", f.bids.iter().map(ToString::to_string).collect::<Vec<_>>());
    r.put("winner", f.winner);
    r.put("revenue", f.realized.to_string());
    r.put("floor", f.floor.to_string());
    if f.realized < f.floor {
        r.status = FAILED;
        r.notes.push(format!("revenue {} is below the floor {}", f.realized, f.floor));
    }
    Ok(r)
}

fn braces(inst: &VcgInstance, b: Bundle) -> String {
    let names: Vec<&str> = (0..inst.item_count())
        .filter(|i| b & (1 << i) != 0)
        .map(|i| inst.items[i].as_str())
        .collect();
    format!("{{{}}}", names.join(","))
}

pub fn vcg_run(inst: &VcgInstance, rule: PaymentRule, flags: &[String]) -> Result<Report> {
    let out = run_vcg(&inst.profiles(), inst.item_count(), rule)?;
    let mut r = Report::new("vcg run");
    let mut bidders = Table::new("bidders", &["bidder", "bundle", "bid", "payment"]).exact(&["bid", "payment"]);
    for &(i, j) in &out.owners {
        let a = &inst.agents[i];
        let label = if a.bids.len() > 1 { format!("{}{}", a.name, j + 1) } else { a.name.clone() };
        let b = out.sybil_bundle(i, j);
        bidders.row([label, braces(inst, b), a.bids[j].value(b).to_string(), out.payments[i][j].to_string()]);
    }
    let mut agents = Table::new("agents", &["agent", "bundle", "value", "payment", "utility"]).exact(&["value", "payment", "utility"]);
    for (i, a) in inst.agents.iter().enumerate() {
        let b = out.agent_bundles[i];
        agents.row([
            a.name.clone(),
            braces(inst, b),
            a.valuation.value(b).to_string(),
            out.total_payment(i).to_string(),
            out.utilities[i].to_string(),
        ]);
    }
    r.tables.push(bidders);
    r.tables.push(agents);
    r.tables.push(quantity_table(&[
        ("rule", rule.to_string()),
        ("observed_welfare", out.observed_welfare.to_string()),
        ("real_welfare", out.real_welfare.to_string()),
    ]));
    r.embed("outcome", &outcome_to_json(inst, &out));
    let text = inst.to_json();
    r.embed("instance", &text);
    r.artifacts.push(("instance.json".into(), text));
    if !flags.is_empty() {
        r.put("flags", flags.to_vec());
        r.notes.extend(flags.iter().cloned());
    }
    Ok(r)
}

/// Discrepancy flags for the four-item example at `epsilon`.
pub fn e1_flags(epsilon: &Exact) -> Result<Vec<String>> {
    Ok(example_e1_report(epsilon)?.flags)
}

fn bundles(inst: &VcgInstance, sets: &[Bundle]) -> String {
    sets.iter().map(|&b| braces(inst, b)).collect::<Vec<_>>().join(" ")
}

pub fn vcg_classify(inst: &VcgInstance) -> Result<Report> {
    let mut r = Report::new("vcg classify");
    let mut t = Table::new("agents", &["agent", "sybils", "kind", "witness", "overbid", "underbid"]);
    let mut docs = Vec::new();
    for a in &inst.agents {
        let c = classify_attack(&a.valuation, &a.bids)?;
        let witness = c.witness.map(|b| braces(inst, b)).unwrap_or_default();
        t.row([
            a.name.clone(),
            a.bids.len().to_string(),
            c.kind.to_string(),
            witness.clone(),
            bundles(inst, &c.overbid_sets),
            bundles(inst, &c.underbid_sets),
        ]);
        docs.push(serde_json::json!({
            "agent": a.name,
            "sybils": a.bids.len(),
            "kind": c.kind.to_string(),
            "witness": witness,
            "overbid": c.overbid_sets.iter().map(|&b| braces(inst, b)).collect::<Vec<_>>(),
            "underbid": c.underbid_sets.iter().map(|&b| braces(inst, b)).collect::<Vec<_>>(),
        }));
    }
    r.tables.push(t);
    r.put("agents", docs);
    Ok(r)
}

fn table_values(inst: &VcgInstance, bid: &CombBid) -> String {
    (1..=full_bundle(inst.item_count()))
        .map(|b| format!("{}={}", braces(inst, b), bid.value(b)))
        .collect::<Vec<_>>()
        .join(" ")
}

fn default_cap(v: &CombValuation) -> Exact {
    v.values().iter().max().cloned().unwrap_or_default()
}

/// Certificate for one agent's bids against a single nature bidder.
pub fn vcg_adversary(inst: &VcgInstance, agent: &str, rule: PaymentRule, cap: Option<&Exact>) -> Result<Report> {
    let a = inst
        .agents
        .iter()
        .find(|a| a.name == agent)
        .ok_or_else(|| Error::Parameter(format!("no agent named `{agent}`")))?;
    let m = inst.item_count();
    let eps = &inst.epsilon;
    let cap = cap.cloned().unwrap_or_else(|| default_cap(&a.valuation));
    let class = classify_attack(&a.valuation, &a.bids)?;
    let mut r = Report::new("vcg adversary");
    let mut rows: Vec<(&str, String)> = vec![
        ("agent", a.name.clone()),
        ("kind", class.kind.to_string()),
        ("rule", rule.to_string()),
    ];
    let holds;
    match class.kind {
        AttackKind::Overbidding => {
            let c = overbidding_adversary(&a.valuation, &a.bids, eps, rule)?;
            holds = c.holds();
            rows.extend([
                ("set", braces(inst, c.set)),
                ("b_bar", c.b_bar.to_string()),
                ("b_tilde", c.b_tilde.to_string()),
                ("shape", format!("{:?}", c.shape).to_lowercase()),
                ("nature_bid", table_values(inst, &c.nature)),
                ("attack_utility", c.attack_utility.to_string()),
                ("truth_utility", c.truth_utility.to_string()),
            ]);
        }
        AttackKind::Underbidding => {
            let family = nature_family(m, eps, &cap)?;
            let c = underbidding_adversary(&a.valuation, &a.bids, eps, rule, &family)?;
            holds = c.holds();
            rows.extend([
                ("set", braces(inst, c.set)),
                ("b_tilde", c.b_tilde.to_string()),
                ("shape", format!("{:?}", c.shape).to_lowercase()),
                ("nature_bid", table_values(inst, &c.nature)),
                ("attack_utility", c.attack_utility.to_string()),
                ("truth_utility", c.truth_utility.to_string()),
                ("family_size", c.family_size.to_string()),
                ("difference_min_truth", c.difference_min_truth.to_string()),
                ("reversals", c.reversals.len().to_string()),
            ]);
        }
        AttackKind::ExactBidding => {
            let family = nature_family(m, eps, &cap)?;
            match truth_loss_averse_witnesses(&a.valuation, &a.bids, rule, &family)?.case {
                TruthCase::PositiveGap {
                    set,
                    parts,
                    nature,
                    attack_utility,
                    truth_utility,
                    expected_gap,
                } => {
                    holds = attack_utility < truth_utility;
                    rows.extend([
                        ("case", "positive-gap".to_string()),
                        ("set", braces(inst, set)),
                        ("parts", bundles(inst, &parts)),
                        ("nature_bid", table_values(inst, &nature)),
                        ("attack_utility", attack_utility.to_string()),
                        ("truth_utility", truth_utility.to_string()),
                        ("expected_gap", expected_gap.to_string()),
                    ]);
                }
                TruthCase::Dominated {
                    states_checked,
                    single_bid_chain_holds,
                } => {
                    holds = single_bid_chain_holds;
                    rows.extend([
                        ("case", "dominated".to_string()),
                        ("states_checked", states_checked.to_string()),
                        ("single_bid_chain_holds", single_bid_chain_holds.to_string()),
                    ]);
                }
            }
        }
    }
    rows.push(("holds", holds.to_string()));
    for (k, v) in &rows {
        r.put(k, v.clone());
    }
    r.put("holds", holds);
    r.tables.push(quantity_table(&rows));
    if !holds {
        r.status = FAILED;
        r.notes.push("certificate does not hold".into());
    }
    Ok(r)
}

fn is_monotone(v: &CombValuation) -> bool {
    (0..=full_bundle(v.item_count())).all(|s| subsets(s).all(|t| v.value(t) <= v.value(s)))
}

fn describe(v: &CombValuation, bids: &[CombBid]) -> String {
    let show = |b: &CombBid| b.values().iter().map(ToString::to_string).collect::<Vec<_>>().join(",");
    let bids: Vec<String> = bids.iter().map(|b| format!("[{}]", show(b))).collect();
    format!("v=[{}] bids={}", show(v), bids.join(" "))
}

pub struct TheoremParams {
    pub items: usize,
    pub epsilon: Exact,
    pub cap: Exact,
    pub sybils: usize,
    pub rule: PaymentRule,
    pub monotone_only: bool,
}

/// Every single-agent attack on the enumeration grid, checked against its certificate.
pub fn vcg_verify_theorem(p: &TheoremParams) -> Result<Report> {
    let spec = EnumerationSpec::new(p.items, 1, p.cap.clone(), p.epsilon.clone(), p.sybils)?;
    let family = nature_family(p.items, &p.epsilon, &p.cap)?;
    let mut counts = [(AttackKind::Overbidding, 0usize, 0usize), (AttackKind::Underbidding, 0, 0), (AttackKind::ExactBidding, 0, 0)];
    let mut failures = Vec::new();
    for (v, bids) in enumerate_instances(&spec, None)? {
        if p.monotone_only && !(is_monotone(&v) && bids.iter().all(is_monotone)) {
            continue;
        }
        let kind = classify_attack(&v, &bids)?.kind;
        let outcome: std::result::Result<(), String> = match kind {
            AttackKind::Overbidding => match overbidding_adversary(&v, &bids, &p.epsilon, p.rule) {
                Ok(c) if c.holds() => Ok(()),
                Ok(c) => Err(format!("{c:?}")),
                Err(e) => Err(e.to_string()),
            },
            AttackKind::Underbidding => match underbidding_adversary(&v, &bids, &p.epsilon, p.rule, &family) {
                Ok(c) if c.holds() => Ok(()),
                Ok(c) => Err(format!("{c:?}")),
                Err(e) => Err(e.to_string()),
            },
            AttackKind::ExactBidding => truth_loss_averse_witnesses(&v, &bids, p.rule, &family)
                .map(|_| ())
                .map_err(|e| e.to_string()),
        };
        let slot = counts.iter_mut().find(|c| c.0 == kind).expect("every kind counted");
        slot.1 += 1;
        if let Err(why) = outcome {
            slot.2 += 1;
            failures.push(format!("{kind} {}: {why}", describe(&v, &bids)));
        }
    }
    let mut r = Report::new("vcg verify-theorem");
    let mut t = Table::new("claims", &["kind", "checked", "failed"]);
    for (k, n, f) in &counts {
        t.row([k.to_string(), n.to_string(), f.to_string()]);
    }
    r.tables.push(t);
    r.put("items", p.items);
    r.put("epsilon", p.epsilon.to_string());
    r.put("value_cap", p.cap.to_string());
    r.put("max_sybils", p.sybils);
    r.put("rule", p.rule.to_string());
    r.put("monotone_only", p.monotone_only);
    r.put("nature_states", family.len());
    r.put(
        "claims",
        counts
            .iter()
            .map(|(k, n, f)| serde_json::json!({"kind": k.to_string(), "checked": n, "failed": f}))
            .collect::<Vec<_>>(),
    );
    r.put("failures", failures.clone());
    if !failures.is_empty() {
        r.status = FAILED;
        let mut ft = Table::new("failures", &["witness"]);
        for f in &failures {
            ft.row([f]);
        }
        r.tables.push(ft);
    }
    Ok(r)
}

pub fn facility(n: usize, theta: &Exact, delta: &Exact, welfare_loss: bool) -> Result<Report> {
    let spec = FacilitySpec::new(n, theta.clone(), delta.clone())?;
    let game = facility_game(&spec)?;
    let closed = facility_loss_averse_report(theta, n)?;
    let la = evaluate(&game, Concept::LossAverse);
    let safety = safety_level_actions(&game);
    let mut r = Report::new("facility");
    r.tables.push(quantity_table(&[
        ("agents", n.to_string()),
        ("theta", theta.to_string()),
        ("grid_step", delta.to_string()),
        ("loss_averse_report", closed.to_string()),
        ("safety_level_reports", list(&safety)),
    ]));
    r.put("loss_averse_report", closed.to_string());
    r.put("safety_level_reports", safety);
    if loss_aversion::scalar::on_grid(&closed, delta) && !la.contains(&closed.to_string()) {
        return Err(Error::Consistency(format!(
            "closed-form report {closed} is not loss-averse on the grid; engine finds {:?} on {}",
            la.satisfying_actions,
            game_to_json(&game)
        )));
    }
    verdict_tables(&mut r, &[la]);
    if welfare_loss {
        let d = facility_welfare_loss_demo(n)?;
        let mut t = Table::new("welfare-loss", &["quantity", "value"]).exact(&["value"]);
        t.row(["theta".to_string(), d.theta.to_string()]);
        t.row(["report".to_string(), d.reports[0].to_string()]);
        t.row(["facility".to_string(), d.facility.to_string()]);
        t.row(["optimal_cost".to_string(), d.optimal_cost.to_string()]);
        t.row(["realized_cost".to_string(), d.realized_cost.to_string()]);
        t.row(["loss".to_string(), d.loss.to_string()]);
        r.tables.push(t);
        r.put(
            "welfare_loss",
            serde_json::json!({
                "theta": d.theta.to_string(), "report": d.reports[0].to_string(),
                "facility": d.facility.to_string(), "optimal_cost": d.optimal_cost.to_string(),
                "realized_cost": d.realized_cost.to_string(), "loss": d.loss.to_string(),
            }),
        );
    }
    attach_game(&mut r, &game);
    Ok(r)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VotingRule {
    Approval,
    Plurality,
}

pub fn voting(rule: VotingRule, utilities: &[Exact], tally_cap: Option<u32>) -> Result<Report> {
    let spec = match rule {
        VotingRule::Approval => PsrSpec::approval(utilities.to_vec(), tally_cap)?,
        VotingRule::Plurality => PsrSpec::plurality(utilities.to_vec(), tally_cap)?,
    };
    let game = psr_game(&spec)?;
    let la = evaluate(&game, Concept::LossAverse);
    let frontier: Vec<String> = voting_pareto_frontier(&spec).iter().map(|b| vector_label(b)).collect();
    let mut r = Report::new("voting");
    r.notes.extend(spec.warnings());
    let mmr = min_max_regret_actions(&game);
    let mut rows = vec![
        ("rule", spec.name.clone()),
        ("utilities", utilities.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")),
        ("tally_cap", spec.tally_cap.to_string()),
        ("pareto_frontier", list(&frontier)),
        ("min_max_regret_ballots", list(&mmr)),
    ];
    let mut missing: Vec<String> = la.satisfying_actions.iter().filter(|a| !frontier.contains(a)).cloned().collect();
    missing.sort();
    if !missing.is_empty() {
        r.notes.push(format!("loss-averse ballots off the frontier: {}", list(&missing)));
    }
    match rule {
        VotingRule::Plurality => {
            let regret = plurality_min_max_regret(utilities)?;
            rows.push(("truthful_ballot", regret.ballot.clone()));
            rows.push(("truthful_max_regret", regret.max_regret.to_string()));
            if let Ok(mix) = plurality_mixed_loss_averse(utilities) {
                rows.push(("mixed_normalizer", plurality_normalizer(utilities).to_string()));
                r.embed("mixed_loss_averse", &mixed_to_json(&mix));
            }
        }
        VotingRule::Approval => {
            let (k, regret) = approval_min_max_regret_top_k(utilities)?;
            rows.push(("top_k", k.to_string()));
            rows.push(("top_k_max_regret", regret.to_string()));
        }
    }
    for (k, v) in &rows {
        r.put(k, v.clone());
    }
    r.put("pareto_frontier", frontier.clone());
    r.put("min_max_regret_ballots", mmr);
    r.tables.push(quantity_table(&rows));
    verdict_tables(&mut r, &[la]);
    attach_game(&mut r, &game);
    Ok(r)
}

pub fn verify_all(budget: Budget, seed: u64) -> Report {
    let results = run_battery(budget, seed);
    let mut r = Report::new("verify-all");
    let mut t = Table::new("checks", &["id", "key", "result"]);
    let mut d = Table::new("detail", &["id", "line"]);
    let mut docs = Vec::new();
    for c in &results {
        let verdict = if c.passed { "PASS" } else { "FAIL" };
        t.row([c.id.to_string(), c.key.to_string(), verdict.to_string()]);
        for line in &c.detail {
            d.row([c.id.to_string(), line.clone()]);
        }
        let about = CRITERIA.iter().find(|k| k.0 == c.id).map_or("", |k| k.2);
        docs.push(serde_json::json!({
            "id": c.id, "key": c.key, "about": about, "passed": c.passed, "detail": c.detail,
        }));
    }
    let failed = results.iter().filter(|c| !c.passed).count();
    r.tables.push(t);
    r.tables.push(d);
    r.put("budget", budget.to_string());
    r.put("seed", seed);
    r.put("checks", docs);
    r.put("failed", failed);
    if failed > 0 {
        r.status = FAILED;
        r.notes.push(format!("{failed} of {} checks failed", results.len()));
    }
    r
}


//! Scenario files: one analysis with its parameters, runnable with `lossav run`.

use loss_aversion::battery::Budget;
use loss_aversion::concepts::Concept;
use loss_aversion::vcg::{PaymentRule, VcgInstance};
use loss_aversion::{Error, Exact};
use serde::Deserialize;
use serde_json::Value;

use crate::commands::{self, TheoremParams, VotingRule};
use crate::inputs::{self, CliResult};
use crate::report::Report;

pub const SCENARIO_SCHEMA: &str = "lossav/scenario";

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    schema: String,
    version: u32,
    analysis: Analysis,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum Analysis {
    Analyze {
        game: Option<Value>,
        curated: Option<String>,
        concepts: Option<Vec<String>>,
        #[serde(default)]
        hierarchy: bool,
    },
    Dfpa {
        value: String,
        epsilon: String,
        cap: Option<String>,
    },
    AllPay {
        value: String,
        epsilon: String,
        cap: Option<String>,
    },
    FpaWitness {
        value: String,
        bid: String,
    },
    Revenue {
        values: Vec<String>,
        epsilon: String,
    },
    VcgRun {
        instance: Option<Value>,
        curated: Option<String>,
        epsilon: Option<String>,
        payment_rule: Option<String>,
        #[serde(default)]
        truthful: bool,
    },
    VcgClassify {
        instance: Option<Value>,
        curated: Option<String>,
        epsilon: Option<String>,
    },
    VcgVerifyTheorem {
        items: usize,
        epsilon: String,
        cap: String,
        sybils: usize,
        payment_rule: Option<String>,
        #[serde(default)]
        monotone_only: bool,
    },
    Facility {
        agents: usize,
        theta: String,
        delta: Option<String>,
        #[serde(default)]
        welfare_loss: bool,
    },
    Voting {
        rule: VotingRule,
        utilities: Vec<String>,
        tally_cap: Option<u32>,
    },
    VerifyAll {
        budget: Option<String>,
        seed: Option<u64>,
    },
}

fn num(text: &str) -> CliResult<Exact> {
    Ok(loss_aversion::scalar::parse_exact(text)?)
}

fn opt_num(text: Option<&String>) -> CliResult<Option<Exact>> {
    text.map(|t| num(t)).transpose()
}

fn rule(text: Option<&String>) -> CliResult<PaymentRule> {
    Ok(text.map_or(Ok(PaymentRule::ClarkePivot), |t| t.parse())?)
}

fn instance(doc: Option<&Value>, curated: Option<&String>, epsilon: Option<&String>) -> CliResult<VcgInstance> {
    match (doc, curated) {
        (Some(d), None) => Ok(VcgInstance::from_json(&d.to_string())?),
        (None, Some(n)) => inputs::curated_instance(n, &opt_num(epsilon)?.unwrap_or_else(inputs::default_epsilon)),
        _ => Err(Error::Parameter("scenario needs exactly one of `instance` or `curated`".into()).into()),
    }
}

pub fn run(text: &str) -> CliResult<Report> {
    let doc: ScenarioDoc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if doc.schema != SCENARIO_SCHEMA || doc.version != 1 {
        return Err(Error::Parse(format!(
            "expected {SCENARIO_SCHEMA} version 1, found {} version {}",
            doc.schema, doc.version
        ))
        .into());
    }
    let report = match &doc.analysis {
        Analysis::Analyze {
            game,
            curated,
            concepts,
            hierarchy,
        } => {
            let g = match (game, curated) {
                (Some(d), None) => inputs::parse_game(&d.to_string())?,
                (None, Some(n)) => inputs::curated(n)?,
                _ => return Err(Error::Parameter("scenario needs exactly one of `game` or `curated`".into()).into()),
            };
            let cs: Vec<Concept> = match concepts {
                Some(list) => list.iter().map(|c| c.parse()).collect::<Result<_, _>>()?,
                None => Concept::ALL.to_vec(),
            };
            commands::analyze(&g, &cs, *hierarchy)?
        }
        Analysis::Dfpa { value, epsilon, cap } => commands::dfpa(&num(value)?, &num(epsilon)?, opt_num(cap.as_ref())?.as_ref())?,
        Analysis::AllPay { value, epsilon, cap } => {
            commands::all_pay(&num(value)?, &num(epsilon)?, opt_num(cap.as_ref())?.as_ref())?
        }
        Analysis::FpaWitness { value, bid } => commands::fpa_witness(&num(value)?, &num(bid)?)?,
        Analysis::Revenue { values, epsilon } => {
            let vs = values.iter().map(|v| num(v)).collect::<CliResult<Vec<_>>>()?;
            commands::revenue(&vs, &num(epsilon)?)?
        }
        Analysis::VcgRun {
            instance: d,
            curated,
            epsilon,
            payment_rule,
            truthful,
        } => {
            let mut inst = instance(d.as_ref(), curated.as_ref(), epsilon.as_ref())?;
            if *truthful {
                inst = inst.truthful();
            }
            let flags = if curated.as_deref() == Some("example-e1") && !truthful {
                commands::e1_flags(&inst.epsilon)?
            } else {
                Vec::new()
            };
            commands::vcg_run(&inst, rule(payment_rule.as_ref())?, &flags)?
        }
        Analysis::VcgClassify {
            instance: d,
            curated,
            epsilon,
        } => commands::vcg_classify(&instance(d.as_ref(), curated.as_ref(), epsilon.as_ref())?)?,
        Analysis::VcgVerifyTheorem {
            items,
            epsilon,
            cap,
            sybils,
            payment_rule,
            monotone_only,
        } => commands::vcg_verify_theorem(&TheoremParams {
            items: *items,
            epsilon: num(epsilon)?,
            cap: num(cap)?,
            sybils: *sybils,
            rule: rule(payment_rule.as_ref())?,
            monotone_only: *monotone_only,
        })?,
        Analysis::Facility {
            agents,
            theta,
            delta,
            welfare_loss,
        } => {
            let delta = opt_num(delta.as_ref())?.unwrap_or_else(crate::default_facility_step);
            commands::facility(*agents, &num(theta)?, &delta, *welfare_loss)?
        }
        Analysis::Voting {
            rule: r,
            utilities,
            tally_cap,
        } => {
            let fs = utilities.iter().map(|v| num(v)).collect::<CliResult<Vec<_>>>()?;
            commands::voting(*r, &fs, *tally_cap)?
        }
        Analysis::VerifyAll { budget, seed } => {
            let b: Budget = budget.as_deref().unwrap_or("tiny").parse()?;
            commands::verify_all(b, seed.unwrap_or(crate::DEFAULT_SEED))
        }
    };
    Ok(report)
}

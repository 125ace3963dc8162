//! JSON instance files and outcome reports for the combinatorial auction.

use serde::{Deserialize, Serialize};

use super::examples::XosValuation;
use super::wd::{PaymentRule, VcgOutcome};
use super::{bid_grid_step, Bundle, BundleValues, CombBid, CombValuation, SybilProfile, MAX_ITEMS};
use crate::error::{Error, Result};
use crate::scalar::{parse_exact, Exact};

pub const INSTANCE_SCHEMA: &str = "lossav/vcg-instance";
pub const OUTCOME_SCHEMA: &str = "lossav/vcg-outcome";

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
enum ValuesDoc {
    /// One value per bundle mask, `table[0]` being the empty bundle.
    Table(Vec<String>),
    Additive(Vec<String>),
    Xos(Vec<Vec<String>>),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AgentDoc {
    name: String,
    valuation: ValuesDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bids: Option<Vec<ValuesDoc>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    schema: String,
    version: u32,
    items: Vec<String>,
    epsilon: String,
    agents: Vec<AgentDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AgentEntry {
    pub name: String,
    pub valuation: CombValuation,
    pub bids: Vec<CombBid>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VcgInstance {
    pub items: Vec<String>,
    pub epsilon: Exact,
    pub agents: Vec<AgentEntry>,
}

fn parse_all(xs: &[String]) -> Result<Vec<Exact>> {
    xs.iter().map(|x| parse_exact(x)).collect()
}

fn values_from_doc(doc: &ValuesDoc, m: usize) -> Result<BundleValues> {
    let out = match doc {
        ValuesDoc::Table(xs) => BundleValues::new(m, parse_all(xs)?)?,
        ValuesDoc::Additive(xs) => BundleValues::additive(&parse_all(xs)?)?,
        ValuesDoc::Xos(clauses) => {
            XosValuation::new(clauses.iter().map(|c| parse_all(c)).collect::<Result<_>>()?)?.to_valuation()?
        }
    };
    if out.item_count() != m {
        return Err(Error::Shape(format!("values over {} items, instance has {m}", out.item_count())));
    }
    Ok(out)
}

fn table_doc(v: &BundleValues) -> ValuesDoc {
    ValuesDoc::Table(v.values().iter().map(ToString::to_string).collect())
}

impl VcgInstance {
    /// Checks item names, grids and shapes. Agents without bids bid truthfully.
    pub fn new(items: Vec<String>, epsilon: Exact, agents: Vec<AgentEntry>) -> Result<Self> {
        let m = items.len();
        if m == 0 || m > MAX_ITEMS {
            return Err(Error::Capacity(format!("item count {m} outside 1..={MAX_ITEMS}")));
        }
        let mut sorted = items.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != m {
            return Err(Error::Parameter("item names must be unique".into()));
        }
        if epsilon <= Exact::from_integer(0.into()) {
            return Err(Error::Parameter(format!("epsilon {epsilon} must be positive")));
        }
        if agents.is_empty() {
            return Err(Error::Parameter("an instance needs at least one agent".into()));
        }
        let step = bid_grid_step(&epsilon, m);
        for a in &agents {
            if a.valuation.item_count() != m {
                return Err(Error::Shape(format!("agent {} valuation has the wrong item count", a.name)));
            }
            if !a.valuation.on_grid(&epsilon) {
                return Err(Error::Parameter(format!("agent {} valuation is off the {epsilon} grid", a.name)));
            }
            if a.bids.is_empty() {
                return Err(Error::Parameter(format!("agent {} has no bids", a.name)));
            }
            for b in &a.bids {
                if b.item_count() != m {
                    return Err(Error::Shape(format!("agent {} bid has the wrong item count", a.name)));
                }
                if !b.on_grid(&step) {
                    return Err(Error::Parameter(format!("agent {} bid is off the {step} bid grid", a.name)));
                }
            }
        }
        Ok(Self { items, epsilon, agents })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: InstanceDoc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if doc.schema != INSTANCE_SCHEMA || doc.version != 1 {
            return Err(Error::Parse(format!("expected {INSTANCE_SCHEMA} version 1, found {} version {}", doc.schema, doc.version)));
        }
        let m = doc.items.len();
        if m == 0 || m > MAX_ITEMS {
            return Err(Error::Capacity(format!("item count {m} outside 1..={MAX_ITEMS}")));
        }
        let agents = doc
            .agents
            .iter()
            .map(|a| {
                let valuation = values_from_doc(&a.valuation, m)?;
                let bids = match &a.bids {
                    Some(bs) => bs.iter().map(|b| values_from_doc(b, m)).collect::<Result<_>>()?,
                    None => vec![valuation.clone()],
                };
                Ok(AgentEntry {
                    name: a.name.clone(),
                    valuation,
                    bids,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(doc.items, parse_exact(&doc.epsilon)?, agents)
    }

    pub fn to_json(&self) -> String {
        let doc = InstanceDoc {
            schema: INSTANCE_SCHEMA.into(),
            version: 1,
            items: self.items.clone(),
            epsilon: self.epsilon.to_string(),
            agents: self
                .agents
                .iter()
                .map(|a| AgentDoc {
                    name: a.name.clone(),
                    valuation: table_doc(&a.valuation),
                    bids: Some(a.bids.iter().map(table_doc).collect()),
                })
                .collect(),
        };
        let mut out = serde_json::to_string_pretty(&doc).expect("plain data");
        out.push('\n');
        out
    }

    pub fn item_count(&self) -> usize {
        self.items.len()
    }

    pub fn profiles(&self) -> Vec<SybilProfile> {
        self.agents
            .iter()
            .map(|a| SybilProfile {
                valuation: a.valuation.clone(),
                bids: a.bids.clone(),
            })
            .collect()
    }

    /// Every agent bidding its valuation.
    pub fn truthful(&self) -> Self {
        let mut out = self.clone();
        for a in &mut out.agents {
            a.bids = vec![a.valuation.clone()];
        }
        out
    }

    /// Item names of a bundle, space separated.
    pub fn bundle_names(&self, b: Bundle) -> String {
        self.items
            .iter()
            .enumerate()
            .filter(|(i, _)| b & (1 << i) != 0)
            .map(|(_, n)| n.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

#[derive(Serialize)]
struct SybilLine {
    agent: String,
    sybil: usize,
    bundle: Vec<String>,
    bid: String,
    payment: String,
}

#[derive(Serialize)]
struct AgentLine {
    agent: String,
    bundle: Vec<String>,
    value: String,
    payment: String,
    utility: String,
}

#[derive(Serialize)]
struct OutcomeDoc {
    schema: &'static str,
    version: u32,
    rule: String,
    sybils: Vec<SybilLine>,
    agents: Vec<AgentLine>,
    observed_welfare: String,
    real_welfare: String,
}

fn names(instance: &VcgInstance, b: Bundle) -> Vec<String> {
    (0..instance.items.len())
        .filter(|i| b & (1 << i) != 0)
        .map(|i| instance.items[i].clone())
        .collect()
}

pub fn outcome_to_json(instance: &VcgInstance, outcome: &VcgOutcome) -> String {
    let rule: PaymentRule = outcome.rule;
    let sybils = outcome
        .owners
        .iter()
        .map(|&(i, j)| {
            let b = outcome.sybil_bundle(i, j);
            SybilLine {
                agent: instance.agents[i].name.clone(),
                sybil: j,
                bundle: names(instance, b),
                bid: instance.agents[i].bids[j].value(b).to_string(),
                payment: outcome.payments[i][j].to_string(),
            }
        })
        .collect();
    let agents = instance
        .agents
        .iter()
        .enumerate()
        .map(|(i, a)| AgentLine {
            agent: a.name.clone(),
            bundle: names(instance, outcome.agent_bundles[i]),
            value: a.valuation.value(outcome.agent_bundles[i]).to_string(),
            payment: outcome.total_payment(i).to_string(),
            utility: outcome.utilities[i].to_string(),
        })
        .collect();
    let mut out = serde_json::to_string_pretty(&OutcomeDoc {
        schema: OUTCOME_SCHEMA,
        version: 1,
        rule: rule.to_string(),
        sybils,
        agents,
        observed_welfare: outcome.observed_welfare.to_string(),
        real_welfare: outcome.real_welfare.to_string(),
    })
    .expect("plain data");
    out.push('\n');
    out
}

/// One record per line: `record,agent,sybil,bundle,amount`.
pub fn outcome_csv(instance: &VcgInstance, outcome: &VcgOutcome) -> String {
    let mut out = String::from("record,agent,sybil,bundle,amount\n");
    for &(i, j) in &outcome.owners {
        let name = &instance.agents[i].name;
        let bundle = instance.bundle_names(outcome.sybil_bundle(i, j));
        out.push_str(&format!("payment,{name},{j},{bundle},{}\n", outcome.payments[i][j]));
    }
    for (i, a) in instance.agents.iter().enumerate() {
        let bundle = instance.bundle_names(outcome.agent_bundles[i]);
        out.push_str(&format!("utility,{},,{bundle},{}\n", a.name, outcome.utilities[i]));
    }
    out.push_str(&format!("observed-welfare,,,,{}\n", outcome.observed_welfare));
    out.push_str(&format!("real-welfare,,,,{}\n", outcome.real_welfare));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};
    use crate::vcg::run_vcg;

    const SAMPLE: &str = r#"{
  "schema": "lossav/vcg-instance",
  "version": 1,
  "items": ["x", "y"],
  "epsilon": "1/2",
  "agents": [
    {"name": "A", "valuation": {"additive": ["1", "3/2"]}, "bids": [{"additive": ["1", "0"]}, {"table": ["0", "0", "3/2", "3/2"]}]},
    {"name": "B", "valuation": {"xos": [["2", "0"], ["0", "2"]]}}
  ]
}"#;

    #[test]
    fn parse_and_round_trip() {
        let inst = VcgInstance::from_json(SAMPLE).unwrap();
        assert_eq!(inst.agents[1].valuation.value(0b11), &int(2));
        assert_eq!(inst.agents[1].bids.len(), 1);
        let again = VcgInstance::from_json(&inst.to_json()).unwrap();
        assert_eq!(again, inst);
        assert_eq!(inst.to_json(), again.to_json());
    }

    #[test]
    fn grid_validation() {
        let off = SAMPLE.replace("\"3/2\"]}, \"bids\"", "\"7/5\"]}, \"bids\"");
        assert!(matches!(VcgInstance::from_json(&off), Err(Error::Parameter(_))));
        let bid_off = SAMPLE.replace("[\"1\", \"0\"]", "[\"1/9\", \"0\"]");
        assert!(matches!(VcgInstance::from_json(&bid_off), Err(Error::Parameter(_))));
        assert!(matches!(VcgInstance::from_json("{"), Err(Error::Parse(_))));
        let e = rat(1, 2);
        assert!(bid_grid_step(&e, 2) == rat(1, 8));
    }

    #[test]
    fn reports() {
        let inst = VcgInstance::from_json(SAMPLE).unwrap();
        let out = run_vcg(&inst.profiles(), 2, PaymentRule::ClarkePivot).unwrap();
        let json = outcome_to_json(&inst, &out);
        assert!(json.contains(OUTCOME_SCHEMA));
        let csv = outcome_csv(&inst, &out);
        assert!(csv.starts_with("record,agent,sybil,bundle,amount\n"));
        assert_eq!(csv.lines().count(), 1 + 3 + 2 + 2);
    }
}

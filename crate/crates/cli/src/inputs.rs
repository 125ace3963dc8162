//! Reading games and VCG instances from files or curated names.

use std::path::Path;

use loss_aversion::curated::{curated_game, CURATED_AUCTIONS, CURATED_GAMES};
use loss_aversion::format::{game_from_json, game_to_json, GAME_SCHEMA};
use loss_aversion::scalar::{parse_exact, rat};
use loss_aversion::vcg::{build_example_e1, build_example_e2, AgentEntry, VcgInstance, INSTANCE_SCHEMA};
use loss_aversion::{AgentGame, Error, Exact};

/// Default epsilon for curated auctions.
pub fn default_epsilon() -> Exact {
    rat(1, 10)
}

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) => e.exit_code(),
            CliError::Io(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))
}

/// The `schema` field of a JSON document.
pub fn schema_of(text: &str) -> CliResult<String> {
    let v: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    v.get("schema")
        .and_then(|s| s.as_str())
        .map(str::to_string)
        .ok_or_else(|| Error::Parse("document has no `schema` field".into()).into())
}

pub fn parse_game(text: &str) -> CliResult<AgentGame<Exact>> {
    Ok(game_from_json(text)?)
}

fn unknown(name: &str) -> Error {
    Error::Parameter(format!(
        "unknown curated name `{name}`; games: {}; auctions: {}",
        CURATED_GAMES.join(", "),
        CURATED_AUCTIONS.join(", ")
    ))
}

pub fn curated(name: &str) -> CliResult<AgentGame<Exact>> {
    if CURATED_AUCTIONS.contains(&name) {
        return Err(Error::Parameter(format!("`{name}` is a VCG instance; use the vcg commands")).into());
    }
    if !CURATED_GAMES.contains(&name) {
        return Err(unknown(name).into());
    }
    Ok(curated_game(name)?)
}

pub fn game(file: Option<&Path>, name: Option<&str>) -> CliResult<AgentGame<Exact>> {
    match (file, name) {
        (Some(p), None) => parse_game(&read(p)?),
        (None, Some(n)) => curated(n),
        _ => Err(Error::Parameter("give exactly one of a game file or --curated NAME".into()).into()),
    }
}

/// A curated auction as an instance: the attacking agent first, with its Sybil bids.
pub fn curated_instance(name: &str, epsilon: &Exact) -> CliResult<VcgInstance> {
    let items = |n: &[&str]| n.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    let inst = match name {
        "example-e1" => {
            let ex = build_example_e1(epsilon)?;
            let vals = ex.valuations();
            let agents = ex
                .bidders
                .iter()
                .zip(vals)
                .enumerate()
                .map(|(i, ((name, _), v))| AgentEntry {
                    name: name.clone(),
                    bids: if i == 0 { ex.attack.clone() } else { vec![v.clone()] },
                    valuation: v,
                })
                .collect();
            VcgInstance::new(items(&["a", "b", "c", "d"]), epsilon.clone(), agents)?
        }
        "example-e2" => {
            let ex = build_example_e2(epsilon)?;
            let agents = vec![
                AgentEntry {
                    name: "A".into(),
                    valuation: ex.valuation.clone(),
                    bids: ex.attack.clone(),
                },
                AgentEntry {
                    name: "N".into(),
                    valuation: ex.nature.clone(),
                    bids: vec![ex.nature.clone()],
                },
            ];
            VcgInstance::new(items(&["a", "b", "c"]), epsilon.clone(), agents)?
        }
        _ => return Err(unknown(name).into()),
    };
    Ok(inst)
}

pub fn instance(file: Option<&Path>, name: Option<&str>, epsilon: Option<&Exact>) -> CliResult<VcgInstance> {
    match (file, name) {
        (Some(p), None) => {
            if epsilon.is_some() {
                return Err(Error::Parameter("--epsilon applies to curated instances only".into()).into());
            }
            Ok(VcgInstance::from_json(&read(p)?)?)
        }
        (None, Some(n)) => curated_instance(n, epsilon.unwrap_or(&default_epsilon())),
        _ => Err(Error::Parameter("give exactly one of an instance file or --curated NAME".into()).into()),
    }
}

/// Canonical re-serialization of a game or instance document.
pub fn canonical(text: &str) -> CliResult<String> {
    let schema = schema_of(text)?;
    if schema == GAME_SCHEMA {
        Ok(game_to_json(&parse_game(text)?))
    } else if schema == INSTANCE_SCHEMA {
        Ok(VcgInstance::from_json(text)?.to_json())
    } else {
        Err(Error::Parse(format!("cannot export schema `{schema}`")).into())
    }
}

pub fn exact(text: &str) -> Result<Exact, String> {
    parse_exact(text).map_err(|e| e.to_string())
}

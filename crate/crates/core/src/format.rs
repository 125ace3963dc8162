//! Canonical JSON documents for games and verdicts.
//!
//! Rationals are always strings (`"3/10"`, `"-2"`), never JSON numbers, so a
//! document round-trips bit-exactly. Output is pretty-printed with a trailing
//! newline; `to_json(from_json(doc))` reproduces any canonical `doc`.

use serde::{Deserialize, Serialize};

use crate::concepts::{Concept, ConceptVerdict, Refutation};
use crate::error::{Error, Result};
use crate::game::{AgentGame, MixedAction};
use crate::scalar::{Extended, Scalar};

pub const GAME_SCHEMA: &str = "lossav/game";
pub const VERDICT_SCHEMA: &str = "lossav/verdict";
pub const MIXED_SCHEMA: &str = "lossav/mixed";
pub const VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GameDoc {
    schema: String,
    version: u32,
    type_label: String,
    actions: Vec<String>,
    states: Vec<String>,
    utility: Vec<Vec<String>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WitnessDoc {
    action: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    competitor: Option<String>,
    states: Vec<String>,
    action_value: String,
    competitor_value: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VerdictDoc {
    schema: String,
    version: u32,
    concept: Concept,
    satisfying_actions: Vec<String>,
    witnesses: Vec<WitnessDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MixedDoc {
    schema: String,
    version: u32,
    probabilities: Vec<(String, String)>,
}

fn check_header(schema: &str, version: u32, expected: &str) -> Result<()> {
    if schema != expected {
        return Err(Error::Parse(format!("expected schema `{expected}`, found `{schema}`")));
    }
    if version != VERSION {
        return Err(Error::Parse(format!("unsupported {schema} version {version}")));
    }
    Ok(())
}

fn render<S: Serialize>(doc: &S) -> String {
    let mut out = serde_json::to_string_pretty(doc).expect("documents are plain data");
    out.push('\n');
    out
}

fn parse_doc<'a, D: Deserialize<'a>>(text: &'a str) -> Result<D> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn game_to_json<T: Scalar>(game: &AgentGame<T>) -> String {
    render(&GameDoc {
        schema: GAME_SCHEMA.into(),
        version: VERSION,
        type_label: game.type_label().into(),
        actions: game.actions().to_vec(),
        states: game.states().to_vec(),
        utility: game
            .rows()
            .map(|row| row.iter().map(ToString::to_string).collect())
            .collect(),
    })
}

pub fn game_from_json<T: Scalar>(text: &str) -> Result<AgentGame<T>> {
    let doc: GameDoc = parse_doc(text)?;
    check_header(&doc.schema, doc.version, GAME_SCHEMA)?;
    let rows = doc
        .utility
        .iter()
        .map(|row| row.iter().map(|x| T::parse_exact(x)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    AgentGame::new(doc.type_label, doc.actions, doc.states, rows)
}

fn witness_doc<T: Scalar>(w: &Refutation<T>) -> WitnessDoc {
    WitnessDoc {
        action: w.action.clone(),
        competitor: w.competitor.clone(),
        states: w.states.clone(),
        action_value: w.action_value.to_string(),
        competitor_value: w.competitor_value.to_string(),
    }
}

pub fn verdict_to_json<T: Scalar>(verdict: &ConceptVerdict<T>) -> String {
    render(&VerdictDoc {
        schema: VERDICT_SCHEMA.into(),
        version: VERSION,
        concept: verdict.concept,
        satisfying_actions: verdict.satisfying_actions.clone(),
        witnesses: verdict.witnesses.iter().map(witness_doc).collect(),
    })
}

pub fn verdict_from_json<T: Scalar>(text: &str) -> Result<ConceptVerdict<T>> {
    let doc: VerdictDoc = parse_doc(text)?;
    check_header(&doc.schema, doc.version, VERDICT_SCHEMA)?;
    let witnesses = doc
        .witnesses
        .into_iter()
        .map(|w| {
            Ok(Refutation {
                action: w.action,
                competitor: w.competitor,
                states: w.states,
                action_value: w.action_value.parse::<Extended<T>>()?,
                competitor_value: w.competitor_value.parse::<Extended<T>>()?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConceptVerdict {
        concept: doc.concept,
        satisfying_actions: doc.satisfying_actions,
        witnesses,
    })
}

/// Several verdicts as one JSON array, in the given order.
pub fn verdicts_to_json<T: Scalar>(verdicts: &[ConceptVerdict<T>]) -> String {
    let docs: Vec<VerdictDoc> = verdicts
        .iter()
        .map(|v| VerdictDoc {
            schema: VERDICT_SCHEMA.into(),
            version: VERSION,
            concept: v.concept,
            satisfying_actions: v.satisfying_actions.clone(),
            witnesses: v.witnesses.iter().map(witness_doc).collect(),
        })
        .collect();
    render(&docs)
}

pub fn mixed_to_json<T: Scalar>(mixed: &MixedAction<T>) -> String {
    render(&MixedDoc {
        schema: MIXED_SCHEMA.into(),
        version: VERSION,
        probabilities: mixed
            .probabilities()
            .iter()
            .map(|(a, p)| (a.clone(), p.to_string()))
            .collect(),
    })
}

pub fn mixed_from_json<T: Scalar>(text: &str) -> Result<MixedAction<T>> {
    let doc: MixedDoc = parse_doc(text)?;
    check_header(&doc.schema, doc.version, MIXED_SCHEMA)?;
    let entries = doc
        .probabilities
        .into_iter()
        .map(|(a, p)| Ok((a, T::parse_exact(&p)?)))
        .collect::<Result<Vec<_>>>()?;
    MixedAction::new(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concepts::{evaluate, Concept};
    use crate::scalar::{int, rat, Exact};

    fn sample() -> AgentGame<Exact> {
        AgentGame::from_fn("t", &["a", "b"], &["A", "B"], |a, s| rat((a * 3 + s) as i64 - 2, 10)).unwrap()
    }

    #[test]
    fn game_round_trip_is_byte_exact() {
        let text = game_to_json(&sample());
        assert!(text.contains("\"-1/5\""));
        let back: AgentGame<Exact> = game_from_json(&text).unwrap();
        assert_eq!(back, sample());
        assert_eq!(game_to_json(&back), text);
    }

    #[test]
    fn rejects_bad_documents() {
        let text = game_to_json(&sample());
        let numbers = text.replace("\"-1/5\"", "-0.2");
        assert!(matches!(game_from_json::<Exact>(&numbers), Err(Error::Parse(_))));
        let extra = text.replacen("{", "{\n  \"extra\": 1,", 1);
        assert!(matches!(game_from_json::<Exact>(&extra), Err(Error::Parse(_))));
        let wrong = text.replace(GAME_SCHEMA, VERDICT_SCHEMA);
        assert!(game_from_json::<Exact>(&wrong).is_err());
        let dup = text.replace("\"b\"", "\"a\"");
        assert!(matches!(game_from_json::<Exact>(&dup), Err(Error::InvalidGame(_))));
    }

    #[test]
    fn verdict_round_trip() {
        let g = AgentGame::from_fn("m", &["a", "b"], &["A", "B"], |a, s| int([[0, 0], [-1, 100]][a][s])).unwrap();
        for c in Concept::ALL {
            let v = evaluate(&g, c);
            let text = verdict_to_json(&v);
            let back: ConceptVerdict<Exact> = verdict_from_json(&text).unwrap();
            assert_eq!(back, v);
            assert_eq!(verdict_to_json(&back), text);
        }
        assert!(verdicts_to_json(&[evaluate(&g, Concept::LossAverse)]).starts_with('['));
    }

    #[test]
    fn mixed_round_trip() {
        let m: MixedAction<Exact> = MixedAction::new([("a".to_string(), rat(3, 4)), ("b".to_string(), rat(1, 4))]).unwrap();
        let text = mixed_to_json(&m);
        assert_eq!(mixed_from_json::<Exact>(&text).unwrap(), m);
    }
}

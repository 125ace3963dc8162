//! Small named games that separate the solution concepts.

use crate::continuum::aim_big_grid;
use crate::error::{Error, Result};
use crate::game::AgentGame;
use crate::scalar::{int, rat, Exact};
use crate::singleitem::{dfpa_game, DfpaSpec};

/// Names accepted by [`curated_game`].
pub const CURATED_GAMES: [&str; 6] = [
    "aim-big",
    "leximin-proof-game",
    "dominant-leximin",
    "minmaxreg-safety",
    "safety-wrong-monotone",
    "dfpa-example",
];

/// Named VCG instances; built by the `vcg` module rather than as games.
pub const CURATED_AUCTIONS: [&str; 2] = ["example-e1", "example-e2"];

fn table(label: &str, actions: &[&str], states: &[&str], rows: &[&[i64]]) -> AgentGame<Exact> {
    AgentGame::from_fn(label, actions, states, |a, s| int(rows[a][s])).expect("curated tables are well formed")
}

pub fn curated_game(name: &str) -> Result<AgentGame<Exact>> {
    Ok(match name {
        "aim-big" => aim_big_grid(&rat(1, 10))?,
        "leximin-proof-game" => table(name, &["a", "b"], &["a", "b"], &[&[5, 0], &[0, 10]]),
        "dominant-leximin" => table(name, &["a", "b"], &["A", "B", "C"], &[&[0, 1, 5], &[0, 0, 3]]),
        "minmaxreg-safety" => table(name, &["a", "b"], &["A", "B"], &[&[0, 0], &[-1, 100]]),
        "safety-wrong-monotone" => table(name, &["a", "b"], &["A", "B"], &[&[1, 0], &[0, 3]]),
        "dfpa-example" => dfpa_game(&DfpaSpec::with_default_cap(int(1), rat(3, 10))?),
        _ => {
            return Err(Error::Parameter(format!(
                "unknown curated game `{name}`; known: {}",
                CURATED_GAMES.join(", ")
            )))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::{game_from_json, game_to_json};

    #[test]
    fn registry_builds_and_round_trips() {
        for name in CURATED_GAMES {
            let g = curated_game(name).unwrap();
            let text = game_to_json(&g);
            assert_eq!(game_to_json(&game_from_json::<Exact>(&text).unwrap()), text);
        }
        assert!(curated_game("nope").is_err());
    }
}

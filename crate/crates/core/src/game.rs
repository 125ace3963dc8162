//! Finite single-agent-versus-nature decision problems.

use std::collections::{BTreeMap, HashSet};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A finite decision problem: one agent's pure actions against opaque nature
/// states, with a complete utility table.
///
/// Immutable after construction.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AgentGame<T> {
    type_label: String,
    actions: Vec<String>,
    states: Vec<String>,
    // row-major, actions x states
    utility: Vec<T>,
}

fn check_unique(labels: &[String], what: &str) -> Result<()> {
    if labels.is_empty() {
        return Err(Error::InvalidGame(format!("{what} list is empty")));
    }
    let mut seen = HashSet::new();
    for label in labels {
        if !seen.insert(label.as_str()) {
            return Err(Error::InvalidGame(format!("duplicate {what} label `{label}`")));
        }
    }
    Ok(())
}

impl<T: Scalar> AgentGame<T> {
    pub fn new(
        type_label: impl Into<String>,
        actions: Vec<String>,
        states: Vec<String>,
        rows: Vec<Vec<T>>,
    ) -> Result<Self> {
        check_unique(&actions, "action")?;
        check_unique(&states, "nature-state")?;
        if rows.len() != actions.len() {
            return Err(Error::InvalidGame(format!(
                "utility table has {} rows for {} actions",
                rows.len(),
                actions.len()
            )));
        }
        let mut utility = Vec::with_capacity(actions.len() * states.len());
        for (row, action) in rows.into_iter().zip(&actions) {
            if row.len() != states.len() {
                return Err(Error::InvalidGame(format!(
                    "row for action `{action}` has {} entries for {} states",
                    row.len(),
                    states.len()
                )));
            }
            utility.extend(row);
        }
        Ok(Self {
            type_label: type_label.into(),
            actions,
            states,
            utility,
        })
    }

    /// Builds a game from string-slice labels and a utility function over indices.
    pub fn from_fn(
        type_label: impl Into<String>,
        actions: &[&str],
        states: &[&str],
        mut f: impl FnMut(usize, usize) -> T,
    ) -> Result<Self> {
        let rows = (0..actions.len())
            .map(|a| (0..states.len()).map(|s| f(a, s)).collect())
            .collect();
        Self::new(
            type_label,
            actions.iter().map(|s| s.to_string()).collect(),
            states.iter().map(|s| s.to_string()).collect(),
            rows,
        )
    }

    pub fn type_label(&self) -> &str {
        &self.type_label
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn action_count(&self) -> usize {
        self.actions.len()
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn action_index(&self, label: &str) -> Result<usize> {
        self.actions
            .iter()
            .position(|a| a == label)
            .ok_or_else(|| Error::UnknownAction(label.to_string()))
    }

    pub fn state_index(&self, label: &str) -> Result<usize> {
        self.states
            .iter()
            .position(|s| s == label)
            .ok_or_else(|| Error::UnknownState(label.to_string()))
    }

    /// Table entry by index. Panics on out-of-range indices.
    #[inline]
    pub fn at(&self, action: usize, state: usize) -> &T {
        &self.utility[action * self.states.len() + state]
    }

    pub fn row(&self, action: usize) -> &[T] {
        let n = self.states.len();
        &self.utility[action * n..(action + 1) * n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.utility.chunks(self.states.len())
    }

    pub fn utility(&self, action: &str, state: &str) -> Result<T> {
        let a = self.action_index(action)?;
        let s = self.state_index(state)?;
        Ok(self.at(a, s).clone())
    }

    /// States where the two actions' utilities differ, in state order.
    pub fn difference_set(&self, a: &str, a2: &str) -> Result<Vec<String>> {
        let i = self.action_index(a)?;
        let j = self.action_index(a2)?;
        Ok(self
            .difference_indices(i, j)
            .into_iter()
            .map(|s| self.states[s].clone())
            .collect())
    }

    pub fn difference_indices(&self, a: usize, a2: usize) -> Vec<usize> {
        let (r1, r2) = (self.row(a), self.row(a2));
        (0..self.states.len()).filter(|&s| r1[s] != r2[s]).collect()
    }

    pub fn mixed_utility(&self, mixed: &MixedAction<T>, state: &str) -> Result<T> {
        let s = self.state_index(state)?;
        let weights = mixed.weights(self)?;
        Ok(self.mixed_utility_at(&weights, s))
    }

    /// Expected utility of a dense weight vector (indexed like `actions`) at a state index.
    pub fn mixed_utility_at(&self, weights: &[T], state: usize) -> T {
        weights
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.is_zero())
            .fold(T::zero(), |acc, (a, p)| acc + p.clone() * self.at(a, state).clone())
    }

    /// Applies `u -> scale * u + shift` to every entry.
    pub fn affine_transform(&self, scale: &T, shift: &T) -> Self {
        Self {
            type_label: self.type_label.clone(),
            actions: self.actions.clone(),
            states: self.states.clone(),
            utility: self
                .utility
                .iter()
                .map(|u| scale.clone() * u.clone() + shift.clone())
                .collect(),
        }
    }

    /// Same game with extra nature states appended.
    pub fn with_extra_states(&self, extra: Vec<(String, Vec<T>)>) -> Result<Self> {
        let mut states = self.states.clone();
        let mut columns: Vec<Vec<T>> = self.rows().map(|r| r.to_vec()).collect();
        for (label, column) in extra {
            if column.len() != self.actions.len() {
                return Err(Error::Shape(format!(
                    "extra state `{label}` has {} entries for {} actions",
                    column.len(),
                    self.actions.len()
                )));
            }
            states.push(label);
            for (row, u) in columns.iter_mut().zip(column) {
                row.push(u);
            }
        }
        Self::new(self.type_label.clone(), self.actions.clone(), states, columns)
    }
}

/// A probability distribution over a game's pure actions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MixedAction<T> {
    probabilities: BTreeMap<String, T>,
}

impl<T: Scalar> MixedAction<T> {
    /// Validates non-negativity and that the total is exactly one.
    pub fn new(probabilities: impl IntoIterator<Item = (String, T)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (label, p) in probabilities {
            if p.is_negative() {
                return Err(Error::InvalidMixture(format!("negative probability {p} on `{label}`")));
            }
            if map.insert(label.clone(), p).is_some() {
                return Err(Error::InvalidMixture(format!("action `{label}` listed twice")));
            }
        }
        let total = map.values().fold(T::zero(), |acc, p| acc + p.clone());
        if !total.is_one() {
            return Err(Error::InvalidMixture(format!("probabilities sum to {total}, not 1")));
        }
        map.retain(|_, p| !p.is_zero());
        Ok(Self { probabilities: map })
    }

    pub fn pure(label: impl Into<String>) -> Self {
        let mut probabilities = BTreeMap::new();
        probabilities.insert(label.into(), T::one());
        Self { probabilities }
    }

    /// Mixture from a dense weight vector aligned with `game.actions()`.
    pub fn from_weights(game: &AgentGame<T>, weights: &[T]) -> Result<Self> {
        if weights.len() != game.action_count() {
            return Err(Error::Shape(format!(
                "{} weights for {} actions",
                weights.len(),
                game.action_count()
            )));
        }
        Self::new(game.actions().iter().cloned().zip(weights.iter().cloned()))
    }

    pub fn probabilities(&self) -> &BTreeMap<String, T> {
        &self.probabilities
    }

    pub fn probability(&self, label: &str) -> T {
        self.probabilities.get(label).cloned().unwrap_or_else(T::zero)
    }

    /// Dense weights aligned with `game.actions()`; fails if the support leaves the game.
    pub fn weights(&self, game: &AgentGame<T>) -> Result<Vec<T>> {
        let mut w = vec![T::zero(); game.action_count()];
        for (label, p) in &self.probabilities {
            let a = game
                .action_index(label)
                .map_err(|_| Error::InvalidMixture(format!("support action `{label}` not in game")))?;
            w[a] = p.clone();
        }
        Ok(w)
    }

    /// `lambda * self + (1 - lambda) * other`.
    pub fn convex_combination(&self, other: &Self, lambda: &T) -> Result<Self> {
        let one_minus = T::one() - lambda.clone();
        let mut labels: Vec<&String> = self.probabilities.keys().chain(other.probabilities.keys()).collect();
        labels.sort();
        labels.dedup();
        Self::new(labels.into_iter().map(|l| {
            (
                l.clone(),
                lambda.clone() * self.probability(l) + one_minus.clone() * other.probability(l),
            )
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat, Exact};

    fn leximin_proof_game() -> AgentGame<Exact> {
        AgentGame::new(
            "player-1",
            vec!["a".into(), "b".into()],
            vec!["opp-a".into(), "opp-b".into()],
            vec![vec![int(5), int(0)], vec![int(0), int(10)]],
        )
        .unwrap()
    }

    fn dominant_leximin_game() -> AgentGame<Exact> {
        AgentGame::from_fn("player-1", &["a", "b"], &["A", "B", "C"], |a, s| {
            int([[0, 1, 5], [0, 0, 3]][a][s])
        })
        .unwrap()
    }

    fn safety_wrong_monotone() -> AgentGame<Exact> {
        AgentGame::from_fn("player-1", &["a", "b"], &["A", "B"], |a, s| int([[1, 0], [0, 3]][a][s]))
            .unwrap()
    }

    #[test]
    fn utility_lookup() {
        let g = leximin_proof_game();
        assert_eq!(g.utility("a", "opp-a").unwrap(), int(5));
        assert_eq!(g.utility("a", "opp-a").unwrap(), g.utility("a", "opp-a").unwrap());
        assert_eq!(dominant_leximin_game().utility("b", "C").unwrap(), int(3));
    }

    #[test]
    fn lookup_errors_name_the_label() {
        let g = leximin_proof_game();
        assert_eq!(g.utility("z", "opp-a"), Err(Error::UnknownAction("z".into())));
        assert_eq!(g.utility("a", "nowhere"), Err(Error::UnknownState("nowhere".into())));
        assert!(g.difference_set("a", "q").is_err());
    }

    #[test]
    fn construction_rejects_bad_tables() {
        let err = AgentGame::<Exact>::new("t", vec![], vec!["s".into()], vec![]).unwrap_err();
        assert!(matches!(err, Error::InvalidGame(_)));
        let err = AgentGame::new("t", vec!["a".into(), "a".into()], vec!["s".into()], vec![vec![int(0)], vec![int(0)]])
            .unwrap_err();
        assert!(matches!(err, Error::InvalidGame(_)));
        let err = AgentGame::new("t", vec!["a".into()], vec!["s".into(), "r".into()], vec![vec![int(0)]]).unwrap_err();
        assert!(matches!(err, Error::InvalidGame(_)));
    }

    #[test]
    fn difference_sets() {
        let g = leximin_proof_game();
        assert!(g.difference_set("a", "a").unwrap().is_empty());
        assert_eq!(g.difference_set("a", "b").unwrap(), vec!["opp-a", "opp-b"]);
        assert_eq!(dominant_leximin_game().difference_set("a", "b").unwrap(), vec!["B", "C"]);
    }

    #[test]
    fn mixed_utilities() {
        let g = safety_wrong_monotone();
        let m = MixedAction::new([("a".to_string(), rat(3, 4)), ("b".to_string(), rat(1, 4))]).unwrap();
        assert_eq!(g.mixed_utility(&m, "A").unwrap(), rat(3, 4));
        assert_eq!(g.mixed_utility(&m, "B").unwrap(), rat(3, 4));
        let pure = MixedAction::pure("a");
        assert_eq!(g.mixed_utility(&pure, "A").unwrap(), g.utility("a", "A").unwrap());
    }

    #[test]
    fn mixture_validation() {
        let bad_sum = MixedAction::new([("a".to_string(), rat(1, 2))]);
        assert!(matches!(bad_sum, Err(Error::InvalidMixture(_))));
        let negative = MixedAction::new([("a".to_string(), rat(3, 2)), ("b".to_string(), rat(-1, 2))]);
        assert!(matches!(negative, Err(Error::InvalidMixture(_))));
        let outside: MixedAction<Exact> = MixedAction::pure("zz");
        assert!(matches!(
            safety_wrong_monotone().mixed_utility(&outside, "A"),
            Err(Error::InvalidMixture(_))
        ));
    }
}

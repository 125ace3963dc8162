//! Exact analysis of loss-averse decision making under strategic uncertainty.
//!
//! The crate evaluates solution concepts on finite agent games, and builds
//! those games from single-item auctions, VCG with Sybil bids, facility
//! location and positional-scoring voting.

pub mod battery;
pub mod concepts;
pub mod continuum;
pub mod curated;
pub mod error;
pub mod format;
pub mod game;
pub mod mechanisms;
pub mod oracle;
pub mod scalar;
pub mod singleitem;
pub mod vcg;

pub use concepts::{evaluate, Concept, ConceptVerdict, Refutation};
pub use error::{Error, Result};
pub use game::{AgentGame, MixedAction};
pub use scalar::{Exact, Extended, Scalar};

pub type Game = AgentGame<Exact>;
pub type Mixed = MixedAction<Exact>;
pub type Verdict = ConceptVerdict<Exact>;

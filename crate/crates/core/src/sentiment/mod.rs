//! Rule-based lexicon sentiment scoring.
//!
//! Each token is looked up in a [`Lexicon`]; lexicon hits are then adjusted
//! by degree adverbs, negations, ALL-CAPS emphasis and "but" clause weighting
//! before being summed and squashed into a compound score in (−1, 1).
//! Everything here is pure and the types are immutable once built, so texts
//! can be scored from multiple threads against a shared lexicon.

mod lexicon;
mod rules;
mod score;

pub use lexicon::{load_lexicon, Lexicon};
pub use rules::RuleConstants;
pub use score::{adjusted_valences, normalize_compound, score_text, tokenize, SentimentScore};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SentimentError {
    #[error("lexicon line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("lexicon line {line}: cannot parse valence {value:?}")]
    BadValence { line: usize, value: String },
    #[error("lexicon token must be non-empty")]
    EmptyToken,
    #[error("valence for {token:?} is not finite")]
    NonFiniteValence { token: String },
    #[error("normalization constant must be positive, got {0}")]
    NonPositiveAlpha(f64),
    #[error("rule constants must be finite")]
    NonFiniteRule,
    #[error("reading lexicon: {0}")]
    Io(String),
}

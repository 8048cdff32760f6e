//! Rule constants and the closed word lists the rules key on.

use serde::{Deserialize, Serialize};

use super::SentimentError;

/// Numeric constants of the valence-adjustment rules.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuleConstants {
    /// Normalization constant of the compound squashing function.
    pub alpha: f64,
    /// Added (boosters) or subtracted (dampeners) by a degree adverb within
    /// three tokens before a lexicon word.
    pub booster_increment: f64,
    /// Multiplier applied when a negation precedes a lexicon word.
    pub negation_factor: f64,
    /// Emphasis for an ALL-CAPS lexicon word in mixed-case text.
    pub caps_boost: f64,
    /// Per-`!` emphasis added to the valence sum.
    pub exclamation_increment: f64,
    pub max_exclamations: u32,
    /// Weight on valences before the first "but".
    pub but_pre_weight: f64,
    /// Weight on valences after the first "but".
    pub but_post_weight: f64,
}

impl Default for RuleConstants {
    fn default() -> Self {
        Self {
            alpha: 15.0,
            booster_increment: 0.293,
            negation_factor: -0.74,
            caps_boost: 0.733,
            exclamation_increment: 0.292,
            max_exclamations: 3,
            but_pre_weight: 0.5,
            but_post_weight: 1.5,
        }
    }
}

impl RuleConstants {
    /// Rules that leave every lexicon valence untouched: increments are zero
    /// and multiplicative weights are one. Scoring then reduces to the
    /// normalized plain lexicon sum.
    pub fn identity(alpha: f64) -> Self {
        Self {
            alpha,
            booster_increment: 0.0,
            negation_factor: 1.0,
            caps_boost: 0.0,
            exclamation_increment: 0.0,
            max_exclamations: 0,
            but_pre_weight: 1.0,
            but_post_weight: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), SentimentError> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(SentimentError::NonPositiveAlpha(self.alpha));
        }
        let weights = [
            self.booster_increment,
            self.negation_factor,
            self.caps_boost,
            self.exclamation_increment,
            self.but_pre_weight,
            self.but_post_weight,
        ];
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(SentimentError::NonFiniteRule);
        }
        Ok(())
    }
}

/// Distance decay for degree adverbs one, two and three tokens back.
pub(crate) const BOOSTER_DECAY: [f64; 3] = [1.0, 0.95, 0.9];

pub(crate) const NEGATIONS: &[&str] = &[
    "aint", "arent", "cannot", "cant", "couldnt", "darent", "didnt", "doesnt", "ain't", "aren't",
    "can't", "couldn't", "daren't", "didn't", "doesn't", "dont", "hadnt", "hasnt", "havent",
    "isnt", "mightnt", "mustnt", "neither", "don't", "hadn't", "hasn't", "haven't", "isn't",
    "mightn't", "mustn't", "neednt", "needn't", "never", "none", "nope", "nor", "not", "nothing",
    "nowhere", "oughtnt", "shant", "shouldnt", "uhuh", "wasnt", "werent", "oughtn't", "shan't",
    "shouldn't", "uh-uh", "wasn't", "weren't", "without", "wont", "wouldnt", "won't", "wouldn't",
    "rarely", "seldom", "despite",
];

pub(crate) const BOOSTERS: &[&str] = &[
    "absolutely", "amazingly", "awfully", "completely", "considerable", "considerably",
    "decidedly", "deeply", "effing", "enormous", "enormously", "entirely", "especially",
    "exceptional", "exceptionally", "extreme", "extremely", "fabulously", "flipping", "flippin",
    "frackin", "fracking", "fricking", "frickin", "frigging", "friggin", "fully", "fuckin",
    "fucking", "fuggin", "fugging", "greatly", "hella", "highly", "hugely", "incredible",
    "incredibly", "intensely", "major", "majorly", "more", "most", "particularly", "purely",
    "quite", "really", "remarkably", "so", "substantially", "thoroughly", "total", "totally",
    "tremendous", "tremendously", "uber", "unbelievably", "unusually", "utter", "utterly", "very",
];

pub(crate) const DAMPENERS: &[&str] = &[
    "almost", "barely", "hardly", "kinda", "kindof", "kind-of", "less", "little", "marginal",
    "marginally", "occasional", "occasionally", "partly", "scarce", "scarcely", "slight",
    "slightly", "somewhat", "sorta", "sortof", "sort-of",
];

pub(crate) fn is_negation(lower: &str) -> bool {
    NEGATIONS.contains(&lower) || lower.contains("n't")
}

/// +1 for boosters, −1 for dampeners, 0 otherwise.
pub(crate) fn degree_sign(lower: &str) -> f64 {
    if BOOSTERS.contains(&lower) {
        1.0
    } else if DAMPENERS.contains(&lower) {
        -1.0
    } else {
        0.0
    }
}

use serde::{Deserialize, Serialize};

use super::lexicon::Lexicon;
use super::rules::{degree_sign, is_negation, RuleConstants, BOOSTER_DECAY};
use super::SentimentError;

/// Negative/neutral/positive proportions plus the normalized compound score.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SentimentScore {
    pub neg: f64,
    pub neu: f64,
    pub pos: f64,
    pub compound: f64,
}

/// `s / sqrt(s² + alpha)`.
pub fn normalize_compound(valence_sum: f64, alpha: f64) -> Result<f64, SentimentError> {
    if alpha.is_nan() || alpha <= 0.0 {
        return Err(SentimentError::NonPositiveAlpha(alpha));
    }
    Ok(squash(valence_sum, alpha))
}

#[inline]
fn squash(sum: f64, alpha: f64) -> f64 {
    if sum == 0.0 {
        return 0.0;
    }
    sum / (sum * sum + alpha).sqrt()
}

fn is_strippable(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(c, '“' | '”' | '‘' | '’' | '…' | '–' | '—' | '«' | '»' | '¡' | '¿')
}

/// Whitespace split with leading/trailing punctuation removed. Tokens made of
/// punctuation only (emoticons such as `:)`) are kept verbatim. Emoji are
/// never stripped.
pub fn tokenize(text: &str) -> Vec<&str> {
    text.split_whitespace()
        .map(|raw| {
            let stripped = raw.trim_matches(is_strippable);
            if stripped.is_empty() {
                raw
            } else {
                stripped
            }
        })
        .collect()
}

fn is_all_caps(token: &str) -> bool {
    token.chars().any(char::is_uppercase) && !token.chars().any(char::is_lowercase)
}

/// Per-token valences after the booster, negation, caps and "but" rules.
pub fn adjusted_valences(text: &str, lexicon: &Lexicon, rules: &RuleConstants) -> Vec<f64> {
    let tokens = tokenize(text);
    let lower: Vec<String> = tokens.iter().map(|t| t.to_lowercase()).collect();
    let n_caps = tokens.iter().filter(|t| is_all_caps(t)).count();
    let caps_differential = n_caps > 0 && n_caps < tokens.len();

    let mut valences = Vec::with_capacity(tokens.len());
    for (i, word) in lower.iter().enumerate() {
        if degree_sign(word) != 0.0 {
            valences.push(0.0);
            continue;
        }
        let Some(base) = lexicon.get(word) else {
            valences.push(0.0);
            continue;
        };
        let mut v = base;
        if caps_differential && is_all_caps(tokens[i]) && v != 0.0 {
            v += rules.caps_boost.copysign(v);
        }
        for (back, decay) in BOOSTER_DECAY.iter().enumerate() {
            let dist = back + 1;
            if i < dist {
                break;
            }
            let prev = &lower[i - dist];
            if lexicon.contains(prev) {
                continue;
            }
            let sign = degree_sign(prev);
            if sign != 0.0 {
                let mut scalar = sign * rules.booster_increment;
                if v < 0.0 {
                    scalar = -scalar;
                }
                if caps_differential && is_all_caps(tokens[i - dist]) {
                    scalar += if v > 0.0 { rules.caps_boost } else { -rules.caps_boost };
                }
                v += scalar * decay;
            }
            if is_negation(prev) {
                v *= rules.negation_factor;
            }
        }
        valences.push(v);
    }

    if let Some(pivot) = lower.iter().position(|w| w == "but") {
        for (i, v) in valences.iter_mut().enumerate() {
            if i < pivot {
                *v *= rules.but_pre_weight;
            } else if i > pivot {
                *v *= rules.but_post_weight;
            }
        }
    }
    valences
}

/// Scores `text`. `rules` must pass [`RuleConstants::validate`].
///
/// Text without tokens scores all zeros. Otherwise the proportions are the
/// positive valence sum, the absolute negative valence sum and the count of
/// zero-valence tokens, each over their total.
pub fn score_text(text: &str, lexicon: &Lexicon, rules: &RuleConstants) -> SentimentScore {
    debug_assert!(rules.validate().is_ok());
    let valences = adjusted_valences(text, lexicon, rules);
    if valences.is_empty() {
        return SentimentScore::default();
    }

    let mut sum: f64 = valences.iter().sum();
    let marks = text.chars().filter(|&c| c == '!').count().min(rules.max_exclamations as usize);
    let emphasis = marks as f64 * rules.exclamation_increment;
    if sum > 0.0 {
        sum += emphasis;
    } else if sum < 0.0 {
        sum -= emphasis;
    }

    let (mut pos, mut neg, mut neu) = (0.0, 0.0, 0.0);
    for &v in &valences {
        if v > 0.0 {
            pos += v;
        } else if v < 0.0 {
            neg -= v;
        } else {
            neu += 1.0;
        }
    }
    let total = pos + neg + neu;
    SentimentScore {
        neg: neg / total,
        neu: neu / total,
        pos: pos / total,
        compound: squash(sum, rules.alpha),
    }
}

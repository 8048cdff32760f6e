//! Token → valence lexicon and its TSV loader.

use std::collections::HashMap;
use std::io::BufRead;

use super::SentimentError;

const DEFAULT_LEXICON: &str = include_str!("../../assets/lexicon.tsv");

/// Lowercase token → valence map.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Lexicon {
    entries: HashMap<String, f64>,
}

impl Lexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// The lexicon shipped with the crate (`assets/lexicon.tsv`).
    pub fn bundled() -> Self {
        load_lexicon(DEFAULT_LEXICON.as_bytes()).expect("bundled lexicon is well-formed")
    }

    /// Inserts or overwrites an entry. The token is lowercased.
    pub fn insert(&mut self, token: &str, valence: f64) -> Result<(), SentimentError> {
        let token = token.trim();
        if token.is_empty() {
            return Err(SentimentError::EmptyToken);
        }
        if !valence.is_finite() {
            return Err(SentimentError::NonFiniteValence {
                token: token.to_string(),
            });
        }
        self.entries.insert(token.to_lowercase(), valence);
        Ok(())
    }

    /// Valence of an already-lowercased token.
    pub fn get(&self, token: &str) -> Option<f64> {
        self.entries.get(token).copied()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.entries.contains_key(token)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

impl<S: AsRef<str>> FromIterator<(S, f64)> for Lexicon {
    fn from_iter<I: IntoIterator<Item = (S, f64)>>(iter: I) -> Self {
        let mut lex = Lexicon::new();
        for (token, valence) in iter {
            lex.insert(token.as_ref(), valence)
                .expect("lexicon entries must have a non-empty token and finite valence");
        }
        lex
    }
}

/// Reads `token<TAB>valence` lines. Blank lines and lines starting with `#`
/// are skipped; columns after the second are ignored so raw rating files
/// with extra statistics load unchanged. Later duplicates win.
pub fn load_lexicon<R: BufRead>(source: R) -> Result<Lexicon, SentimentError> {
    let mut lex = Lexicon::new();
    for (idx, line) in source.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| SentimentError::Io(e.to_string()))?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split('\t');
        let token = fields.next().unwrap_or_default();
        let Some(raw) = fields.next() else {
            return Err(SentimentError::Malformed {
                line: line_no,
                reason: "expected token<TAB>valence".into(),
            });
        };
        if token.trim().is_empty() {
            return Err(SentimentError::Malformed {
                line: line_no,
                reason: "empty token".into(),
            });
        }
        let valence: f64 = raw.trim().parse().map_err(|_| SentimentError::BadValence {
            line: line_no,
            value: raw.to_string(),
        })?;
        if !valence.is_finite() {
            return Err(SentimentError::BadValence {
                line: line_no,
                value: raw.to_string(),
            });
        }
        lex.entries.insert(token.trim().to_lowercase(), valence);
    }
    Ok(lex)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_two_entries() {
        let lex = load_lexicon("good\t1.9\nbad\t-2.5".as_bytes()).unwrap();
        assert_eq!(lex.len(), 2);
        assert_eq!(lex.get("good"), Some(1.9));
        assert_eq!(lex.get("bad"), Some(-2.5));
    }

    #[test]
    fn empty_stream() {
        assert!(load_lexicon("".as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn last_duplicate_wins() {
        let lex = load_lexicon("good\t1.9\ngood\t2.0".as_bytes()).unwrap();
        assert_eq!(lex.len(), 1);
        assert_eq!(lex.get("good"), Some(2.0));
    }

    #[test]
    fn comments_and_extra_columns() {
        let src = "# header\n\nGreat\t3.1\t0.7\t[3, 3]\n";
        let lex = load_lexicon(src.as_bytes()).unwrap();
        assert_eq!(lex.get("great"), Some(3.1));
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let err = load_lexicon("good\t1.9\nbroken line\n".as_bytes()).unwrap_err();
        assert!(matches!(err, SentimentError::Malformed { line: 2, .. }), "{err:?}");
    }

    #[test]
    fn bad_valence() {
        let err = load_lexicon("good\tlots".as_bytes()).unwrap_err();
        assert!(matches!(err, SentimentError::BadValence { line: 1, .. }));
        let err = load_lexicon("good\tNaN".as_bytes()).unwrap_err();
        assert!(matches!(err, SentimentError::BadValence { line: 1, .. }));
    }

    #[test]
    fn bundled_lexicon_loads() {
        let lex = Lexicon::bundled();
        assert!(lex.len() > 7000);
        assert_eq!(lex.get("good"), Some(1.9));
        assert!(lex.get("😊").unwrap() > 0.0);
        assert!(lex.iter().all(|(k, v)| !k.is_empty() && v.is_finite()));
    }
}

//! Scored sentences: tokens plus per-token supertag and dependency-head
//! log-probability matrices, and the candidate pruning used by the parser.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::category::{parse_category, Category, RuleSet};

/// Tolerance for "log probabilities are nonpositive" validation.
pub const LOG_PROB_TOLERANCE: f64 = 1e-6;

/// One sentence with its category vocabulary and score matrices.
///
/// `tag_log_prob` is `M x |T|` (natural log), `dep_log_prob` is `M x (M+1)`
/// with column 0 the virtual root and column `t+1` token `t`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScoredSentence {
    pub tokens: Vec<String>,
    pub pos: Option<Vec<String>>,
    pub categories: Vec<Category>,
    pub tag_log_prob: Vec<Vec<f64>>,
    pub dep_log_prob: Vec<Vec<f64>>,
}

#[derive(Debug, Error)]
pub enum SentenceError {
    #[error("sentence {sentence}: {message}")]
    Invalid { sentence: usize, message: String },
    #[error("sentence {sentence}, row {row}: {message}")]
    InvalidRow {
        sentence: usize,
        row: usize,
        message: String,
    },
    #[error("sentence {sentence}: bad category {text:?}: {source}")]
    BadCategory {
        sentence: usize,
        text: String,
        source: crate::category::CategoryParseError,
    },
}

impl ScoredSentence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Checks dimensions and entry ranges; `index` is used in error messages.
    pub fn validate(&self, index: usize) -> Result<(), SentenceError> {
        let m = self.tokens.len();
        let t = self.categories.len();
        let fail = |message: String| SentenceError::Invalid {
            sentence: index,
            message,
        };
        if m == 0 {
            return Err(fail("sentence has no tokens".into()));
        }
        if t == 0 {
            return Err(fail("empty category vocabulary".into()));
        }
        if let Some(pos) = &self.pos {
            if pos.len() != m {
                return Err(fail(format!("{} POS tags for {m} tokens", pos.len())));
            }
        }
        if self.tag_log_prob.len() != m {
            return Err(fail(format!(
                "tag matrix has {} rows, expected {m}",
                self.tag_log_prob.len()
            )));
        }
        if self.dep_log_prob.len() != m {
            return Err(fail(format!(
                "dep matrix has {} rows, expected {m}",
                self.dep_log_prob.len()
            )));
        }
        for (row, r) in self.tag_log_prob.iter().enumerate() {
            check_row(index, row, r, t, "tag")?;
        }
        for (row, r) in self.dep_log_prob.iter().enumerate() {
            check_row(index, row, r, m + 1, "dep")?;
        }
        Ok(())
    }
}

fn check_row(
    sentence: usize,
    row: usize,
    r: &[f64],
    width: usize,
    what: &str,
) -> Result<(), SentenceError> {
    let fail = |message: String| SentenceError::InvalidRow {
        sentence,
        row,
        message,
    };
    if r.len() != width {
        return Err(fail(format!(
            "{what} row has {} entries, expected {width}",
            r.len()
        )));
    }
    if r.iter().any(|v| v.is_nan() || *v > LOG_PROB_TOLERANCE) {
        return Err(fail(format!("{what} row has an entry above 0")));
    }
    if r.iter().all(|v| *v == f64::NEG_INFINITY) {
        return Err(fail(format!("{what} row is all -inf")));
    }
    Ok(())
}

/// On-disk form of a sentence; categories are category strings and rows may
/// be linear probabilities (`"prob_domain": "linear"`).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SentenceFile {
    pub tokens: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pos: Option<Vec<String>>,
    pub categories: Vec<String>,
    pub tag_log_prob: Vec<Vec<f64>>,
    pub dep_log_prob: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prob_domain: Option<String>,
}

impl SentenceFile {
    pub fn into_sentence(self, index: usize) -> Result<ScoredSentence, SentenceError> {
        let categories = self
            .categories
            .iter()
            .map(|s| {
                parse_category(s).map_err(|source| SentenceError::BadCategory {
                    sentence: index,
                    text: s.clone(),
                    source,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let linear = match self.prob_domain.as_deref() {
            None | Some("log") => false,
            Some("linear") => true,
            Some(other) => {
                return Err(SentenceError::Invalid {
                    sentence: index,
                    message: format!("unknown prob_domain {other:?}"),
                })
            }
        };
        let to_log = |m: Vec<Vec<f64>>| {
            if linear {
                m.into_iter()
                    .map(|row| row.into_iter().map(|p| p.ln()).collect())
                    .collect()
            } else {
                m
            }
        };
        let s = ScoredSentence {
            tokens: self.tokens,
            pos: self.pos,
            categories,
            tag_log_prob: to_log(self.tag_log_prob),
            dep_log_prob: to_log(self.dep_log_prob),
        };
        s.validate(index)?;
        Ok(s)
    }
}

/// Parser configuration: supertag pruning and the oracle length cap.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ParseConfig {
    /// Keep categories with tag probability >= beta * row maximum.
    pub beta: f64,
    /// Hard cap on candidates per token, best-first.
    pub max_categories: usize,
    /// Maximum sentence length accepted by the exhaustive oracle.
    pub oracle_limit: usize,
    /// Combinatory rule inventory used by both decoders.
    #[serde(default)]
    pub rules: RuleSet,
}

impl Default for ParseConfig {
    fn default() -> Self {
        ParseConfig {
            beta: 1e-5,
            max_categories: 50,
            oracle_limit: 8,
            rules: RuleSet::default(),
        }
    }
}

impl ParseConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(format!("beta must be in (0, 1], got {}", self.beta));
        }
        if self.max_categories == 0 {
            return Err("max_categories must be >= 1".into());
        }
        Ok(())
    }

    /// The pruned candidate category indices for each token, from the
    /// unpenalized tag scores, sorted by vocabulary index.
    pub fn candidates(&self, s: &ScoredSentence) -> Vec<Vec<usize>> {
        let log_beta = self.beta.ln();
        s.tag_log_prob
            .iter()
            .map(|row| {
                let best = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let mut kept: Vec<usize> = (0..row.len())
                    .filter(|&c| row[c] >= best + log_beta && row[c] > f64::NEG_INFINITY)
                    .collect();
                if kept.len() > self.max_categories {
                    // best-first cap, ties to the lower index
                    kept.sort_by(|&a, &b| {
                        row[b].partial_cmp(&row[a]).unwrap().then(a.cmp(&b))
                    });
                    kept.truncate(self.max_categories);
                }
                kept.sort_unstable();
                kept
            })
            .collect()
    }
}

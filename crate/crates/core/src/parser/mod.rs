//! Sentence-level decoding: an agenda-based A* decoder and an exhaustive
//! CKY oracle over the factored tag + dependency model, both with optional
//! per-position per-category additive penalties.
//!
//! Both decoders share the scoring definition ([`crate::derivation::tree_score`])
//! and the canonical tie-break key ([`crate::derivation::TieKey`]), and are
//! required to return identical derivations on every instance.

mod astar;
mod cky;

pub use astar::parse_astar;
pub use cky::{parse_exhaustive, parse_exhaustive_with_candidates};

use std::collections::HashMap;

use thiserror::Error;

use crate::category::Category;
use crate::sentence::ScoredSentence;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("no complete derivation exists for the {length}-token sentence under the rule set")]
    NoParse { length: usize },
    #[error("sentence length {length} exceeds the oracle limit {limit}")]
    OracleLimit { length: usize, limit: usize },
    #[error("invalid span [{i}, {j}) for sentence of length {length}")]
    InvalidSpan { i: usize, j: usize, length: usize },
    #[error("token {token} has no candidate categories after pruning")]
    NoCandidates { token: usize },
    #[error("penalty matrix shape does not match the sentence")]
    BadPenalties,
}

/// Admissible upper bound on the completion score outside `[i, j)`: for each
/// outside token, the best penalized tag score plus the best dependency
/// score, maximized over the full vocabulary.
pub fn heuristic_outside(
    s: &ScoredSentence,
    penalties: Option<&[Vec<f64>]>,
    i: usize,
    j: usize,
) -> Result<f64, ParseError> {
    let m = s.len();
    if i >= j || j > m {
        return Err(ParseError::InvalidSpan { i, j, length: m });
    }
    let mut bound = 0.0;
    for k in (0..i).chain(j..m) {
        let best_tag = (0..s.categories.len())
            .map(|c| s.tag_log_prob[k][c] - penalties.map_or(0.0, |p| p[k][c]))
            .fold(f64::NEG_INFINITY, f64::max);
        let best_dep = s.dep_log_prob[k]
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        bound += best_tag + best_dep;
    }
    Ok(bound)
}

fn check_penalties(
    s: &ScoredSentence,
    penalties: Option<&[Vec<f64>]>,
) -> Result<(), ParseError> {
    if let Some(p) = penalties {
        if p.len() != s.len() || p.iter().any(|r| r.len() != s.categories.len()) {
            return Err(ParseError::BadPenalties);
        }
    }
    Ok(())
}

/// Interns categories to small ids; sentence vocabulary entries keep their
/// vocabulary index as id.
pub(crate) struct CatInterner {
    map: HashMap<Category, u32>,
    cats: Vec<Category>,
}

impl CatInterner {
    pub fn for_sentence(s: &ScoredSentence) -> CatInterner {
        let mut it = CatInterner {
            map: HashMap::new(),
            cats: Vec::new(),
        };
        for c in &s.categories {
            let id = it.cats.len() as u32;
            it.cats.push(c.clone());
            it.map.entry(c.clone()).or_insert(id);
        }
        it
    }

    pub fn intern(&mut self, c: &Category) -> u32 {
        if let Some(&id) = self.map.get(c) {
            return id;
        }
        let id = self.cats.len() as u32;
        self.cats.push(c.clone());
        self.map.insert(c.clone(), id);
        id
    }

    pub fn get(&self, id: u32) -> &Category {
        &self.cats[id as usize]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::category::parse_category;

    fn two_token() -> ScoredSentence {
        ScoredSentence {
            tokens: vec!["a".into(), "b".into()],
            pos: None,
            categories: vec![
                parse_category("N/N").unwrap(),
                parse_category("N").unwrap(),
            ],
            tag_log_prob: vec![vec![-0.7, -1.0], vec![-0.1, -0.9]],
            dep_log_prob: vec![vec![-0.5, -1.0, -0.8], vec![-0.3, -0.6, -1.2]],
        }
    }

    #[test]
    fn full_span_bound_is_zero() {
        let s = two_token();
        assert_eq!(heuristic_outside(&s, None, 0, 2).unwrap(), 0.0);
    }

    #[test]
    fn single_outside_token() {
        let s = two_token();
        // token 1: best tag -0.1, best dep -0.3
        let got = heuristic_outside(&s, None, 0, 1).unwrap();
        assert!((got - (-0.4)).abs() < 1e-12);
    }

    #[test]
    fn penalties_enter_the_bound() {
        let s = two_token();
        let pen = vec![vec![0.0, 0.0], vec![1.0, 0.0]];
        let got = heuristic_outside(&s, Some(&pen), 0, 1).unwrap();
        // token 1: max(-0.1 - 1.0, -0.9) = -0.9, dep -0.3
        assert!((got - (-1.2)).abs() < 1e-12);
    }

    #[test]
    fn invalid_span_rejected() {
        let s = two_token();
        assert!(heuristic_outside(&s, None, 1, 1).is_err());
        assert!(heuristic_outside(&s, None, 0, 3).is_err());
    }
}

//! CCG derivations over a scored sentence, their score function, and the
//! canonical tie-break key shared by both decoders.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::category::{Category, Combinator, HeadSide};
use crate::sentence::ScoredSentence;

/// A node in a binary derivation tree. Token indices are 0-based.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum DerivationNode {
    Leaf {
        index: usize,
        cat_index: usize,
        category: Category,
    },
    Unary {
        category: Category,
        rule: String,
        child: Box<DerivationNode>,
    },
    Binary {
        category: Category,
        rule: Combinator,
        head_side: HeadSide,
        left: Box<DerivationNode>,
        right: Box<DerivationNode>,
    },
}

impl DerivationNode {
    pub fn category(&self) -> &Category {
        match self {
            DerivationNode::Leaf { category, .. }
            | DerivationNode::Unary { category, .. }
            | DerivationNode::Binary { category, .. } => category,
        }
    }

    pub fn span(&self) -> (usize, usize) {
        match self {
            DerivationNode::Leaf { index, .. } => (*index, *index + 1),
            DerivationNode::Unary { child, .. } => child.span(),
            DerivationNode::Binary { left, right, .. } => (left.span().0, right.span().1),
        }
    }

    /// Head token index of this constituent.
    pub fn head_token(&self) -> usize {
        match self {
            DerivationNode::Leaf { index, .. } => *index,
            DerivationNode::Unary { child, .. } => child.head_token(),
            DerivationNode::Binary {
                head_side,
                left,
                right,
                ..
            } => match head_side {
                HeadSide::Left => left.head_token(),
                HeadSide::Right => right.head_token(),
            },
        }
    }
}

/// A complete derivation: the tree plus the flat `(c, h)` view and score.
///
/// `heads[i]` is a dependency column index: 0 for the virtual root,
/// `t + 1` for head token `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Derivation {
    pub root: DerivationNode,
    pub leaf_cats: Vec<usize>,
    pub heads: Vec<usize>,
    pub score: f64,
}

#[derive(Debug, Error)]
pub enum ScoreError {
    #[error("derivation covers {got} tokens but sentence has {want}")]
    LengthMismatch { got: usize, want: usize },
}

impl Derivation {
    /// Builds the flat view from a tree rooted at the virtual root.
    /// The score field is left at 0; use [`tree_score`] to fill it.
    pub fn from_root(root: DerivationNode) -> Derivation {
        let (i, j) = root.span();
        debug_assert_eq!(i, 0);
        let m = j;
        let mut leaf_cats = vec![0usize; m];
        let mut heads = vec![0usize; m];
        collect(&root, &mut leaf_cats, &mut heads);
        heads[root.head_token()] = 0;
        Derivation {
            root,
            leaf_cats,
            heads,
            score: 0.0,
        }
    }

    /// Category assigned to token `i`.
    pub fn category_of(&self, i: usize) -> &Category {
        leaf_at(&self.root, i).expect("token in range")
    }

    /// Bracketed tree text, e.g. `(NP (NP/N no) (N man))`.
    pub fn bracketed(&self, tokens: &[String]) -> String {
        let mut out = String::new();
        bracket(&self.root, tokens, &mut out);
        out
    }
}

fn collect(node: &DerivationNode, leaf_cats: &mut [usize], heads: &mut [usize]) {
    match node {
        DerivationNode::Leaf {
            index, cat_index, ..
        } => leaf_cats[*index] = *cat_index,
        DerivationNode::Unary { child, .. } => collect(child, leaf_cats, heads),
        DerivationNode::Binary {
            head_side,
            left,
            right,
            ..
        } => {
            collect(left, leaf_cats, heads);
            collect(right, leaf_cats, heads);
            let (head, dependent) = match head_side {
                HeadSide::Left => (left, right),
                HeadSide::Right => (right, left),
            };
            heads[dependent.head_token()] = head.head_token() + 1;
        }
    }
}

fn leaf_at(node: &DerivationNode, i: usize) -> Option<&Category> {
    match node {
        DerivationNode::Leaf {
            index, category, ..
        } => (*index == i).then_some(category),
        DerivationNode::Unary { child, .. } => leaf_at(child, i),
        DerivationNode::Binary { left, right, .. } => {
            if i < left.span().1 {
                leaf_at(left, i)
            } else {
                leaf_at(right, i)
            }
        }
    }
}

fn bracket(node: &DerivationNode, tokens: &[String], out: &mut String) {
    match node {
        DerivationNode::Leaf {
            index, category, ..
        } => {
            out.push('(');
            out.push_str(&category.to_string());
            out.push(' ');
            out.push_str(&tokens[*index]);
            out.push(')');
        }
        DerivationNode::Unary {
            category, child, ..
        } => {
            out.push('(');
            out.push_str(&category.to_string());
            out.push(' ');
            bracket(child, tokens, out);
            out.push(')');
        }
        DerivationNode::Binary {
            category,
            left,
            right,
            ..
        } => {
            out.push('(');
            out.push_str(&category.to_string());
            out.push(' ');
            bracket(left, tokens, out);
            out.push(' ');
            bracket(right, tokens, out);
            out.push(')');
        }
    }
}

/// The penalized log score of a derivation: tag terms, then dependency
/// terms, then minus the per-token category penalties. Both decoders and
/// every test compute scores through this single summation order.
pub fn tree_score(
    d: &Derivation,
    s: &ScoredSentence,
    penalties: Option<&[Vec<f64>]>,
) -> Result<f64, ScoreError> {
    let m = s.len();
    if d.leaf_cats.len() != m || d.heads.len() != m {
        return Err(ScoreError::LengthMismatch {
            got: d.leaf_cats.len(),
            want: m,
        });
    }
    let mut score = 0.0;
    for i in 0..m {
        score += s.tag_log_prob[i][d.leaf_cats[i]];
    }
    for i in 0..m {
        score += s.dep_log_prob[i][d.heads[i]];
    }
    if let Some(pen) = penalties {
        for i in 0..m {
            score -= pen[i][d.leaf_cats[i]];
        }
    }
    Ok(score)
}

/// Canonical tie-break key of a (partial) derivation: per-token category
/// vocabulary indices first, then a fixed-width preorder structure code.
/// Smaller keys are canonical.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct TieKey {
    pub leaf: Vec<u32>,
    pub nodes: Vec<u32>,
}

impl TieKey {
    pub fn leaf_key(cat_index: usize) -> TieKey {
        TieKey {
            leaf: vec![cat_index as u32],
            // one slot per constituent for the unary-rule code (0 = none)
            nodes: vec![0],
        }
    }

    /// Key of a binary parent; `split_offset` is `split - i`.
    pub fn binary(
        left: &TieKey,
        right: &TieKey,
        split_offset: usize,
        rule_code: u32,
    ) -> TieKey {
        let mut leaf = Vec::with_capacity(left.leaf.len() + right.leaf.len());
        leaf.extend_from_slice(&left.leaf);
        leaf.extend_from_slice(&right.leaf);
        let mut nodes = Vec::with_capacity(3 + left.nodes.len() + right.nodes.len());
        nodes.push(split_offset as u32);
        nodes.push(rule_code);
        nodes.push(0);
        nodes.extend_from_slice(&left.nodes);
        nodes.extend_from_slice(&right.nodes);
        TieKey { leaf, nodes }
    }

    /// Marks this constituent as rewritten by unary rule `code` (1-based).
    /// The slot index is 0 for a leaf and 2 for a binary node.
    pub fn with_unary(&self, code: u32) -> TieKey {
        let mut k = self.clone();
        let slot = if self.leaf.len() == 1 { 0 } else { 2 };
        debug_assert_eq!(k.nodes[slot], 0);
        k.nodes[slot] = code;
        k
    }
}

/// Computes the canonical key of a finished derivation tree, for checking
/// decoder agreement. Unary codes are positions in `unary_labels`.
pub fn derivation_key(node: &DerivationNode, unary_labels: &[String]) -> TieKey {
    match node {
        DerivationNode::Leaf { cat_index, .. } => TieKey::leaf_key(*cat_index),
        DerivationNode::Unary { rule, child, .. } => {
            let code = unary_labels
                .iter()
                .position(|l| l == rule)
                .map(|p| p as u32 + 1)
                .unwrap_or(u32::MAX);
            derivation_key(child, unary_labels).with_unary(code)
        }
        DerivationNode::Binary {
            rule, left, right, ..
        } => {
            let (i, _) = left.span();
            let split = right.span().0;
            TieKey::binary(
                &derivation_key(left, unary_labels),
                &derivation_key(right, unary_labels),
                split - i,
                rule.code(),
            )
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::category::parse_category;

    fn leaf(i: usize, c: usize, cat: &str) -> DerivationNode {
        DerivationNode::Leaf {
            index: i,
            cat_index: c,
            category: parse_category(cat).unwrap(),
        }
    }

    fn toy() -> (Derivation, ScoredSentence) {
        // "a b" with a = N/N, b = N; forward application, head right
        let root = DerivationNode::Binary {
            category: parse_category("N").unwrap(),
            rule: Combinator::ForwardApplication,
            head_side: HeadSide::Right,
            left: Box::new(leaf(0, 0, "N/N")),
            right: Box::new(leaf(1, 1, "N")),
        };
        let d = Derivation::from_root(root);
        let s = ScoredSentence {
            tokens: vec!["a".into(), "b".into()],
            pos: None,
            categories: vec![
                parse_category("N/N").unwrap(),
                parse_category("N").unwrap(),
            ],
            tag_log_prob: vec![vec![-0.1, -2.0], vec![-3.0, -0.2]],
            dep_log_prob: vec![vec![-1.0, -1.0, -0.5], vec![-0.3, -1.5, -2.0]],
        };
        (d, s)
    }

    #[test]
    fn flat_view_and_heads() {
        let (d, _) = toy();
        assert_eq!(d.leaf_cats, vec![0, 1]);
        // token 0 headed by token 1 (column 2); token 1 is the root
        assert_eq!(d.heads, vec![2, 0]);
    }

    #[test]
    fn single_leaf_score() {
        let s = ScoredSentence {
            tokens: vec!["w".into()],
            pos: None,
            categories: vec![parse_category("N").unwrap()],
            tag_log_prob: vec![vec![-0.1]],
            dep_log_prob: vec![vec![-0.2, -1.0]],
        };
        let d = Derivation::from_root(leaf(0, 0, "N"));
        let got = tree_score(&d, &s, None).unwrap();
        assert_eq!(got, -0.1 + -0.2);
        let pen = vec![vec![0.5]];
        let got = tree_score(&d, &s, Some(&pen)).unwrap();
        assert!((got - (-0.8)).abs() < 1e-15);
    }

    #[test]
    fn hand_summed_score() {
        let (d, s) = toy();
        let want = (-0.1 + -0.2) + (-0.5 + -0.3);
        assert_eq!(tree_score(&d, &s, None).unwrap(), want);
    }

    #[test]
    fn penalty_linearity() {
        let (d, s) = toy();
        let p1 = vec![vec![0.3, 0.0], vec![0.0, 0.1]];
        let p2 = vec![vec![0.2, 0.0], vec![0.0, 0.4]];
        let sum: Vec<Vec<f64>> = p1
            .iter()
            .zip(&p2)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
            .collect();
        let lhs = tree_score(&d, &s, Some(&sum)).unwrap();
        let rhs = tree_score(&d, &s, Some(&p1)).unwrap()
            - p2[0][d.leaf_cats[0]]
            - p2[1][d.leaf_cats[1]];
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn length_mismatch_rejected() {
        let (d, mut s) = toy();
        s.tokens.push("c".into());
        s.tag_log_prob.push(vec![-0.5, -0.5]);
        s.dep_log_prob = vec![vec![-0.5; 4]; 3];
        assert!(tree_score(&d, &s, None).is_err());
    }

    #[test]
    fn keys_order_leaf_cats_first() {
        let a = TieKey::binary(&TieKey::leaf_key(0), &TieKey::leaf_key(2), 1, 1);
        let b = TieKey::binary(&TieKey::leaf_key(1), &TieKey::leaf_key(0), 1, 1);
        assert!(a < b);
    }

    #[test]
    fn bracketed_text() {
        let (d, s) = toy();
        assert_eq!(d.bracketed(&s.tokens), "(N (N/N a) (N b))");
    }
}

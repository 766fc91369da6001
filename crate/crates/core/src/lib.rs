//! Document-level CCG parsing toolkit: per-sentence A* decoding under a
//! factored tag + dependency model, a cross-sentence consistency MRF with
//! exact MAP decoding, and a dual-decomposition solver that drives both to
//! agreement, plus λ-term composition over the resulting derivations.

pub mod category;
pub mod derivation;
pub mod dual;
pub mod mrf;
pub mod parser;
pub mod pipeline;
pub mod semantics;
pub mod sentence;

pub use category::{
    apply_unary, combine, parse_category, render_category, Category, Combinator, HeadSide,
    RuleSet, UnaryRule,
};
pub use derivation::{tree_score, Derivation, DerivationNode};
pub use dual::{joint_bruteforce, solve_joint, DualConfig, JointResult};
pub use mrf::{
    build_graph, decode_mrf, pair_potential, Assignment, ConsistencyGraph,
    ConsistencyPotentials, ContextStrategy, Document, GraphOptions, Role, WordRef,
};
pub use parser::{heuristic_outside, parse_astar, parse_exhaustive, ParseError};
pub use semantics::{
    assign_lexical_terms, beta_reduce, compose_semantics, extract_pred_args, parse_term,
    render_formula, render_term, LambdaTerm, PredArgStructure, TemplateSet,
};
pub use sentence::{ParseConfig, ScoredSentence, SentenceFile};

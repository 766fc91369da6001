//! Dual decomposition coupling the per-sentence parsers and the consistency
//! MRF under the agreement constraint z_{s,t} = c_{s,t} (Algorithm 1), plus
//! an exact constrained brute-force oracle.
//!
//! Multipliers are stored as exact rationals so the per-word zero-sum
//! invariant holds to the bit; the subproblems consume an `f64` view.

use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::derivation::{tree_score, Derivation};
use crate::mrf::{
    decode_mrf, pair_potential, Assignment, ConsistencyGraph, ConsistencyPotentials, GraphError,
    Multipliers, WordRef,
};
use crate::parser::{parse_astar, parse_exhaustive_with_candidates, ParseError};
use crate::sentence::ParseConfig;
use crate::Document;

/// Step-size schedule for the subgradient updates.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DualConfig {
    /// Initial step size, 0 < α0 ≤ 1.
    pub alpha0: f64,
    /// Iteration cap K.
    pub max_iterations: usize,
    /// Multiplicative decay applied to α after every update.
    pub decay: f64,
}

impl Default for DualConfig {
    fn default() -> Self {
        DualConfig {
            alpha0: 0.0002,
            max_iterations: 500,
            decay: 0.9,
        }
    }
}

#[derive(Debug, Error)]
pub enum DualError {
    #[error("invalid dual configuration: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("brute-force tuple count {size} exceeds the limit {limit}")]
    LimitExceeded { size: usize, limit: usize },
    #[error("no word-node category tuple admits a parse of every sentence")]
    Infeasible,
}

impl DualConfig {
    pub fn validate(&self) -> Result<(), DualError> {
        if !(self.alpha0 > 0.0 && self.alpha0 <= 1.0) {
            return Err(DualError::BadConfig(format!(
                "alpha0 must be in (0, 1], got {}",
                self.alpha0
            )));
        }
        if self.max_iterations < 1 {
            return Err(DualError::BadConfig("max_iterations must be >= 1".into()));
        }
        if !(self.decay > 0.0 && self.decay <= 1.0) {
            return Err(DualError::BadConfig(format!(
                "decay must be in (0, 1], got {}",
                self.decay
            )));
        }
        Ok(())
    }
}

/// The multiplier state. `u` is sparse over J = word nodes × their pruned
/// candidate sets and kept as exact rationals; α is tracked in `f64` and
/// converted exactly at each update.
#[derive(Clone, Debug)]
pub struct DualState {
    pub u: HashMap<(WordRef, usize), BigRational>,
    pub iteration: usize,
    pub alpha: f64,
}

impl DualState {
    pub fn new(alpha0: f64) -> Self {
        DualState {
            u: HashMap::new(),
            iteration: 1,
            alpha: alpha0,
        }
    }

    /// `f64` view of the multipliers for the subproblems.
    pub fn as_f64(&self) -> Multipliers {
        self.u
            .iter()
            .map(|(k, v)| (*k, v.to_f64().expect("finite rational")))
            .collect()
    }

    /// Σ_c u_{w,c} for one word node; exactly zero by construction.
    pub fn word_sum(&self, w: WordRef) -> BigRational {
        self.u
            .iter()
            .filter(|((uw, _), _)| *uw == w)
            .map(|(_, v)| v.clone())
            .fold(BigRational::zero(), |a, b| a + b)
    }
}

/// One subgradient step: for each word node and candidate, add
/// α(1(c_w = c) − 1(z_w = c)), then decay α.
///
/// This is subgradient descent on the convex dual: the MRF maximizes g + u
/// and the parser maximizes P − u, so the dual's subgradient in u_{w,c} is
/// 1(z_w = c) − 1(c_w = c) and the step goes against it, pulling each
/// subproblem toward the other's choice.
pub fn update_multipliers(
    state: &mut DualState,
    graph: &ConsistencyGraph,
    candidates: &[Vec<Vec<usize>>],
    z: &Assignment,
    parser_labels: &HashMap<WordRef, usize>,
    cfg: &DualConfig,
) {
    let alpha = BigRational::from_float(state.alpha).expect("finite alpha");
    for w in graph.word_nodes() {
        let z_c = z.word_labels[&w].0;
        let y_c = parser_labels[&w];
        for &c in &candidates[w.sentence][w.token] {
            let mut delta = BigRational::zero();
            if c == y_c {
                delta += &alpha;
            }
            if c == z_c {
                delta -= &alpha;
            }
            if !delta.is_zero() {
                let slot = state
                    .u
                    .entry((w, c))
                    .or_insert_with(BigRational::zero);
                *slot += delta;
            }
        }
    }
    if cfg!(debug_assertions) {
        for w in graph.word_nodes() {
            debug_assert!(state.word_sum(w).is_zero(), "multiplier zero-sum broken");
        }
    }
    state.alpha *= cfg.decay;
    state.iteration += 1;
}

/// Per-iteration solver trace record.
#[derive(Clone, Debug, Serialize)]
pub struct TraceEntry {
    pub k: usize,
    pub dual: f64,
    pub disagreements: usize,
    pub alpha: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct JointResult {
    pub derivations: Vec<Derivation>,
    pub assignment: Assignment,
    pub converged: bool,
    pub iterations: usize,
    pub trace: Vec<TraceEntry>,
    /// log P(Y|X) + g(z) of the returned iterate (no multiplier terms).
    pub primal: f64,
}

fn penalties_for(
    doc: &Document,
    state: &DualState,
) -> Vec<Vec<Vec<f64>>> {
    let mut out: Vec<Vec<Vec<f64>>> = doc
        .sentences
        .iter()
        .map(|s| vec![vec![0.0; s.categories.len()]; s.len()])
        .collect();
    for ((w, c), v) in &state.u {
        out[w.sentence][w.token][*c] = v.to_f64().expect("finite rational");
    }
    out
}

fn parser_word_labels(
    graph: &ConsistencyGraph,
    derivations: &[Derivation],
) -> HashMap<WordRef, usize> {
    graph
        .word_nodes()
        .map(|w| (w, derivations[w.sentence].leaf_cats[w.token]))
        .collect()
}

fn unpenalized_score(doc: &Document, derivations: &[Derivation]) -> f64 {
    derivations
        .iter()
        .zip(&doc.sentences)
        .map(|(d, s)| tree_score(d, s, None).expect("derivation fits its sentence"))
        .sum()
}

/// Algorithm 1: alternate the multiplier-adjusted MRF decode and the
/// penalty-adjusted per-sentence parses until the two label the word nodes
/// identically, or the iteration cap is reached (then the final iterate is
/// returned unadjudicated with `converged = false`).
pub fn solve_joint(
    doc: &Document,
    graph: &ConsistencyGraph,
    potentials: &ConsistencyPotentials,
    parse_cfg: &ParseConfig,
    dual_cfg: &DualConfig,
) -> Result<JointResult, DualError> {
    dual_cfg.validate()?;
    let candidates = doc.candidates(parse_cfg);
    let mut state = DualState::new(dual_cfg.alpha0);
    let mut trace = Vec::new();

    for k in 1..=dual_cfg.max_iterations {
        let u_view = state.as_f64();
        let z = decode_mrf(graph, doc, &candidates, potentials, Some(&u_view))?;

        let penalties = penalties_for(doc, &state);
        let mut derivations = Vec::with_capacity(doc.sentences.len());
        for (s, pen) in doc.sentences.iter().zip(&penalties) {
            derivations.push(parse_astar(s, parse_cfg, Some(pen))?);
        }

        let labels = parser_word_labels(graph, &derivations);
        let disagreements = graph
            .word_nodes()
            .filter(|w| {
                let s = &doc.sentences[w.sentence];
                s.categories[z.word_labels[w].0] != s.categories[labels[w]]
            })
            .count();
        let dual = z.score + derivations.iter().map(|d| d.score).sum::<f64>();
        trace.push(TraceEntry {
            k,
            dual,
            disagreements,
            alpha: state.alpha,
        });

        if disagreements == 0 || k == dual_cfg.max_iterations {
            let primal = z.g_score + unpenalized_score(doc, &derivations);
            return Ok(JointResult {
                derivations,
                assignment: z,
                converged: disagreements == 0,
                iterations: k,
                trace,
                primal,
            });
        }
        update_multipliers(&mut state, graph, &candidates, &z, &labels, dual_cfg);
    }
    unreachable!("the loop returns at k == max_iterations");
}

/// Exact constrained optimum of log P(Y|X) + g(z) with z_w = c_w enforced:
/// enumerates every word-node category tuple, parses each sentence with the
/// tuple's tokens pinned, and picks the best feasible total. Errors if the
/// tuple count exceeds `limit` or no tuple is feasible.
pub fn joint_bruteforce(
    doc: &Document,
    graph: &ConsistencyGraph,
    potentials: &ConsistencyPotentials,
    parse_cfg: &ParseConfig,
    limit: usize,
) -> Result<(Vec<Derivation>, Assignment, f64), DualError> {
    for (i, s) in doc.sentences.iter().enumerate() {
        if s.len() > parse_cfg.oracle_limit {
            return Err(ParseError::OracleLimit {
                length: doc.sentences[i].len(),
                limit: parse_cfg.oracle_limit,
            }
            .into());
        }
    }
    let candidates = doc.candidates(parse_cfg);
    let words: Vec<WordRef> = graph.word_nodes().collect();
    let domain = doc.label_domain();

    let mut size: usize = 1;
    for w in &words {
        size = size.saturating_mul(candidates[w.sentence][w.token].len());
    }
    if size > limit {
        return Err(DualError::LimitExceeded { size, limit });
    }

    // sentences untouched by the graph parse once, outside the tuple loop
    let mut fixed: HashMap<usize, Derivation> = HashMap::new();
    for (i, s) in doc.sentences.iter().enumerate() {
        if !words.iter().any(|w| w.sentence == i) {
            fixed.insert(
                i,
                parse_exhaustive_with_candidates(s, parse_cfg, None, &candidates[i])?,
            );
        }
    }

    let mut best: Option<(f64, Vec<Derivation>, Assignment)> = None;
    let mut idx = vec![0usize; words.len()];
    loop {
        let tuple: Vec<usize> = words
            .iter()
            .zip(&idx)
            .map(|(w, &i)| candidates[w.sentence][w.token][i])
            .collect();

        if let Some(candidate) = evaluate_tuple(
            doc, graph, potentials, parse_cfg, &candidates, &words, &tuple, &fixed, &domain,
        )? {
            let (score, _, _) = &candidate;
            if best.as_ref().is_none_or(|(b, _, _)| *score > *b) {
                best = Some(candidate);
            }
        }

        // advance the odometer, last word fastest
        let mut k = words.len();
        loop {
            if k == 0 {
                break;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < candidates[words[k].sentence][words[k].token].len() {
                break;
            }
            idx[k] = 0;
        }
        if idx.iter().all(|&v| v == 0) {
            break;
        }
    }

    let (score, derivations, assignment) = best.ok_or(DualError::Infeasible)?;
    Ok((derivations, assignment, score))
}

#[allow(clippy::too_many_arguments)]
fn evaluate_tuple(
    doc: &Document,
    graph: &ConsistencyGraph,
    potentials: &ConsistencyPotentials,
    parse_cfg: &ParseConfig,
    candidates: &[Vec<Vec<usize>>],
    words: &[WordRef],
    tuple: &[usize],
    fixed: &HashMap<usize, Derivation>,
    domain: &[crate::Category],
) -> Result<Option<(f64, Vec<Derivation>, Assignment)>, DualError> {
    // parse each touched sentence with the tuple's tokens pinned
    let mut derivations: Vec<Option<Derivation>> = vec![None; doc.sentences.len()];
    for (i, d) in fixed {
        derivations[*i] = Some(d.clone());
    }
    for (i, s) in doc.sentences.iter().enumerate() {
        if derivations[i].is_some() {
            continue;
        }
        let mut pinned = candidates[i].clone();
        for (w, &c) in words.iter().zip(tuple) {
            if w.sentence == i {
                pinned[w.token] = vec![c];
            }
        }
        match parse_exhaustive_with_candidates(s, parse_cfg, None, &pinned) {
            Ok(d) => derivations[i] = Some(d),
            Err(ParseError::NoParse { .. }) => return Ok(None),
            Err(e) => return Err(e.into()),
        }
    }
    let derivations: Vec<Derivation> = derivations.into_iter().map(Option::unwrap).collect();

    // g(z) with the word labels fixed: per clique, the best context label
    let mut assignment = Assignment::empty();
    for ctx in &graph.contexts {
        let mut best: Option<(f64, Option<crate::Category>)> = None;
        for zc in domain.iter().map(Some).chain(std::iter::once(None)) {
            let mut total = 0.0;
            for &w in &ctx.members {
                let c = tuple[words.iter().position(|x| *x == w).expect("member")];
                let cat = &doc.sentences[w.sentence].categories[c];
                total += doc.sentences[w.sentence].tag_log_prob[w.token][c]
                    + pair_potential(cat, zc, potentials);
            }
            if best.as_ref().is_none_or(|(b, _)| total > *b) {
                best = Some((total, zc.cloned()));
            }
        }
        let (total, zc) = best.expect("domain nonempty");
        assignment.g_score += total;
        assignment.context_labels.push(zc);
        for &w in &ctx.members {
            let c = tuple[words.iter().position(|x| *x == w).expect("member")];
            let cat = doc.sentences[w.sentence].categories[c].clone();
            assignment.word_labels.insert(w, (c, cat));
        }
    }
    assignment.score = assignment.g_score;

    let score = assignment.g_score + unpenalized_score(doc, &derivations);
    Ok(Some((score, derivations, assignment)))
}

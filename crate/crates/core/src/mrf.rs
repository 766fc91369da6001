//! Cross-sentence consistency model: the context/word-node graph, its pair
//! potentials, and exact MAP decoding with optional multiplier-adjusted
//! unaries, plus a full-enumeration oracle.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::category::{parse_category, unify, Binding, Category};
use crate::sentence::{ParseConfig, ScoredSentence};

/// Whether a sentence is a premise (T) or hypothesis (H).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    #[serde(rename = "T")]
    Premise,
    #[serde(rename = "H")]
    Hypothesis,
}

/// An ordered set of scored sentences with their entailment roles.
#[derive(Clone, Debug)]
pub struct Document {
    pub sentences: Vec<ScoredSentence>,
    pub roles: Vec<Role>,
}

impl Document {
    pub fn validate(&self) -> Result<(), crate::sentence::SentenceError> {
        for (i, s) in self.sentences.iter().enumerate() {
            s.validate(i)?;
        }
        Ok(())
    }

    /// Pruned candidate sets for every token of every sentence.
    pub fn candidates(&self, cfg: &ParseConfig) -> Vec<Vec<Vec<usize>>> {
        self.sentences.iter().map(|s| cfg.candidates(s)).collect()
    }

    /// Context label domain: every distinct category in any sentence's
    /// vocabulary, in first-occurrence order.
    pub fn label_domain(&self) -> Vec<Category> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for s in &self.sentences {
            for c in &s.categories {
                if seen.insert(c.clone()) {
                    out.push(c.clone());
                }
            }
        }
        out
    }
}

/// A word occurrence: sentence index and token index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct WordRef {
    pub sentence: usize,
    pub token: usize,
}

impl WordRef {
    pub fn new(sentence: usize, token: usize) -> Self {
        WordRef { sentence, token }
    }
}

/// One context node and the word occurrences instantiating it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContextNode {
    pub key: String,
    pub members: Vec<WordRef>,
}

/// A star forest of context cliques; every word node belongs to exactly one.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyGraph {
    pub contexts: Vec<ContextNode>,
}

impl ConsistencyGraph {
    pub fn is_empty(&self) -> bool {
        self.contexts.is_empty()
    }

    pub fn word_nodes(&self) -> impl Iterator<Item = WordRef> + '_ {
        self.contexts.iter().flat_map(|c| c.members.iter().copied())
    }
}

/// How context keys are derived from the document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum ContextStrategy {
    /// A context per lowercased surface form shared by T and H.
    #[serde(rename = "surface-unigram")]
    SurfaceUnigram,
    /// A context per POS-tag pattern match; the word node is the first
    /// token of the match and the key is the matched surface span.
    #[serde(rename = "pos-pattern")]
    PosPattern { patterns: Vec<Vec<String>> },
}

/// POS patterns for the bigram-based strategy described for Japanese:
/// a noun, or a verb followed by an adverb. The rule's other reading
/// (noun-or-verb followed by an adverb) is `[["N","ADV"], ["V","ADV"]]`.
pub fn japanese_pos_preset() -> Vec<Vec<String>> {
    vec![vec!["N".into()], vec!["V".into(), "ADV".into()]]
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct GraphOptions {
    #[serde(default)]
    pub stopwords: HashSet<String>,
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("pos-pattern strategy requires POS tags on sentence {sentence}")]
    MissingPos { sentence: usize },
    #[error("word node ({sentence}, {token}) appears in more than one context")]
    NotAStarForest { sentence: usize, token: usize },
    #[error("word node ({sentence}, {token}) is out of range")]
    BadWordRef { sentence: usize, token: usize },
    #[error("brute-force enumeration size {size} exceeds the limit {limit}")]
    LimitExceeded { size: usize, limit: usize },
}

/// Builds the consistency graph. A context survives only with two or more
/// member occurrences drawn from both a T-role and an H-role sentence;
/// occurrences matching several keys go to the first key in document order.
pub fn build_graph(
    doc: &Document,
    strategy: &ContextStrategy,
    options: &GraphOptions,
) -> Result<ConsistencyGraph, GraphError> {
    // key -> occurrences, keys in first-occurrence document order
    let mut order: Vec<String> = Vec::new();
    let mut occurrences: HashMap<String, Vec<WordRef>> = HashMap::new();
    let mut add = |key: String, w: WordRef| {
        let entry = occurrences.entry(key.clone()).or_insert_with(|| {
            order.push(key);
            Vec::new()
        });
        entry.push(w);
    };

    match strategy {
        ContextStrategy::SurfaceUnigram => {
            for (si, s) in doc.sentences.iter().enumerate() {
                for (ti, tok) in s.tokens.iter().enumerate() {
                    let key = tok.to_lowercase();
                    if options.stopwords.contains(&key) {
                        continue;
                    }
                    add(key, WordRef::new(si, ti));
                }
            }
        }
        ContextStrategy::PosPattern { patterns } => {
            for (si, s) in doc.sentences.iter().enumerate() {
                let pos = s
                    .pos
                    .as_ref()
                    .ok_or(GraphError::MissingPos { sentence: si })?;
                for ti in 0..s.tokens.len() {
                    for pattern in patterns {
                        if pattern.is_empty() || ti + pattern.len() > s.tokens.len() {
                            continue;
                        }
                        if pattern.iter().enumerate().all(|(k, p)| &pos[ti + k] == p) {
                            let key = s.tokens[ti..ti + pattern.len()]
                                .iter()
                                .map(|t| t.to_lowercase())
                                .collect::<Vec<_>>()
                                .join(" ");
                            if !options.stopwords.contains(&key) {
                                add(key, WordRef::new(si, ti));
                            }
                        }
                    }
                }
            }
        }
    }

    let mut claimed: HashSet<WordRef> = HashSet::new();
    let mut contexts = Vec::new();
    for key in order {
        let members: Vec<WordRef> = occurrences[&key]
            .iter()
            .copied()
            .filter(|w| !claimed.contains(w))
            .collect();
        let has_t = members
            .iter()
            .any(|w| doc.roles[w.sentence] == Role::Premise);
        let has_h = members
            .iter()
            .any(|w| doc.roles[w.sentence] == Role::Hypothesis);
        if members.len() >= 2 && has_t && has_h {
            claimed.extend(members.iter().copied());
            contexts.push(ContextNode { key, members });
        }
    }
    Ok(ConsistencyGraph { contexts })
}

/// The δ scores and the category-pair equivalence table.
#[derive(Clone, Debug, Serialize)]
pub struct ConsistencyPotentials {
    delta1: f64,
    delta2: f64,
    delta3: f64,
    equivalences: Vec<(Category, Category)>,
}

#[derive(Debug, Error)]
#[error("potentials must satisfy delta1 >= delta2 >= delta3, got ({0}, {1}, {2})")]
pub struct PotentialsError(f64, f64, f64);

impl ConsistencyPotentials {
    pub fn new(
        delta1: f64,
        delta2: f64,
        delta3: f64,
        equivalences: Vec<(Category, Category)>,
    ) -> Result<Self, PotentialsError> {
        if !(delta1 >= delta2 && delta2 >= delta3) {
            return Err(PotentialsError(delta1, delta2, delta3));
        }
        Ok(ConsistencyPotentials {
            delta1,
            delta2,
            delta3,
            equivalences,
        })
    }

    pub fn deltas(&self) -> (f64, f64, f64) {
        (self.delta1, self.delta2, self.delta3)
    }

    pub fn equivalences(&self) -> &[(Category, Category)] {
        &self.equivalences
    }

    /// The four default English equivalence pairs: present-participle
    /// noun modifier vs. verb tense, nominal modifier vs. noun, and the
    /// transitive/intransitive pairs for any shared feature.
    pub fn default_equivalences() -> Vec<(Category, Category)> {
        [
            ("N/N", "S[ng]\\NP"),
            ("N/N", "N"),
            ("(S[X]\\NP)/NP", "S[X]\\NP"),
            ("(S[X]\\NP)/PP", "S[X]\\NP"),
        ]
        .iter()
        .map(|(a, b)| (parse_category(a).unwrap(), parse_category(b).unwrap()))
        .collect()
    }
}

impl Default for ConsistencyPotentials {
    fn default() -> Self {
        ConsistencyPotentials::new(0.9, 0.1, 0.0, Self::default_equivalences()).unwrap()
    }
}

fn matches_equivalence(zw: &Category, zc: &Category, pair: &(Category, Category)) -> bool {
    let ordered = |a: &Category, b: &Category| {
        let mut binding = Binding::default();
        unify(a, zw, &mut binding) && unify(b, zc, &mut binding)
    };
    ordered(&pair.0, &pair.1) || ordered(&pair.1, &pair.0)
}

/// The edge potential between a word label and a context label
/// (`None` is the NULL context label).
pub fn pair_potential(
    zw: &Category,
    zc: Option<&Category>,
    p: &ConsistencyPotentials,
) -> f64 {
    match zc {
        Some(zc) => {
            if zw == zc || p.equivalences.iter().any(|pr| matches_equivalence(zw, zc, pr)) {
                p.delta1
            } else if zw.simplify() == zc.simplify() {
                p.delta2
            } else {
                0.0
            }
        }
        None => p.delta3,
    }
}

/// Lagrangian multipliers added to the word unaries, keyed by word node and
/// vocabulary index within that word's sentence.
pub type Multipliers = HashMap<(WordRef, usize), f64>;

/// A MAP label assignment: `score` includes the multiplier terms,
/// `g_score` is the plain consistency objective.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Assignment {
    #[serde(serialize_with = "ser_word_labels")]
    pub word_labels: BTreeMap<WordRef, (usize, Category)>,
    /// Chosen label per context, `None` for NULL; parallel to the graph.
    pub context_labels: Vec<Option<Category>>,
    pub score: f64,
    pub g_score: f64,
}

fn ser_word_labels<S: serde::Serializer>(
    labels: &BTreeMap<WordRef, (usize, Category)>,
    ser: S,
) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = ser.serialize_seq(Some(labels.len()))?;
    for (w, (index, category)) in labels {
        seq.serialize_element(&serde_json::json!({
            "sentence": w.sentence,
            "token": w.token,
            "index": index,
            "category": category.to_string(),
        }))?;
    }
    seq.end()
}

impl Assignment {
    pub fn empty() -> Assignment {
        Assignment {
            word_labels: BTreeMap::new(),
            context_labels: Vec::new(),
            score: 0.0,
            g_score: 0.0,
        }
    }
}

fn check_graph(
    graph: &ConsistencyGraph,
    doc: &Document,
    candidates: &[Vec<Vec<usize>>],
) -> Result<(), GraphError> {
    let mut seen = HashSet::new();
    for ctx in &graph.contexts {
        for w in &ctx.members {
            if w.sentence >= doc.sentences.len()
                || w.token >= doc.sentences[w.sentence].len()
                || candidates[w.sentence][w.token].is_empty()
            {
                return Err(GraphError::BadWordRef {
                    sentence: w.sentence,
                    token: w.token,
                });
            }
            if !seen.insert(*w) {
                return Err(GraphError::NotAStarForest {
                    sentence: w.sentence,
                    token: w.token,
                });
            }
        }
    }
    Ok(())
}

fn word_term(
    doc: &Document,
    multipliers: Option<&Multipliers>,
    w: WordRef,
    c: usize,
    zc: Option<&Category>,
    p: &ConsistencyPotentials,
) -> f64 {
    let cat = &doc.sentences[w.sentence].categories[c];
    doc.sentences[w.sentence].tag_log_prob[w.token][c]
        + multipliers.map_or(0.0, |u| *u.get(&(w, c)).unwrap_or(&0.0))
        + pair_potential(cat, zc, p)
}

/// Exact MAP decoding. Each clique is solved by scanning every context
/// label (NULL last): given the context label the word nodes decouple and
/// each independently maximizes its unary + pair + multiplier score.
/// Ties pick the lowest label index.
pub fn decode_mrf(
    graph: &ConsistencyGraph,
    doc: &Document,
    candidates: &[Vec<Vec<usize>>],
    p: &ConsistencyPotentials,
    multipliers: Option<&Multipliers>,
) -> Result<Assignment, GraphError> {
    check_graph(graph, doc, candidates)?;
    let domain = doc.label_domain();
    let mut out = Assignment::empty();

    for ctx in &graph.contexts {
        let mut best: Option<(f64, Option<Category>, Vec<usize>)> = None;
        for zc in domain.iter().map(Some).chain(std::iter::once(None)) {
            let mut total = 0.0;
            let mut labels = Vec::with_capacity(ctx.members.len());
            for &w in &ctx.members {
                let mut wbest: Option<(f64, usize)> = None;
                for &c in &candidates[w.sentence][w.token] {
                    let v = word_term(doc, multipliers, w, c, zc, p);
                    if wbest.is_none_or(|(bv, _)| v > bv) {
                        wbest = Some((v, c));
                    }
                }
                let (v, c) = wbest.expect("candidates nonempty");
                total += v;
                labels.push(c);
            }
            if best.as_ref().is_none_or(|(bv, _, _)| total > *bv) {
                best = Some((total, zc.cloned(), labels));
            }
        }
        let (total, zc, labels) = best.expect("domain nonempty");
        out.score += total;
        for (&w, &c) in ctx.members.iter().zip(&labels) {
            let cat = doc.sentences[w.sentence].categories[c].clone();
            out.g_score += doc.sentences[w.sentence].tag_log_prob[w.token][c]
                + pair_potential(&cat, zc.as_ref(), p);
            out.word_labels.insert(w, (c, cat));
        }
        out.context_labels.push(zc);
    }
    Ok(out)
}

/// Full-enumeration oracle: every clique's joint label space (context label
/// times the word-label tuple) is enumerated exhaustively. Same tie-break
/// as [`decode_mrf`]; errors if the evaluation count exceeds `limit`.
pub fn decode_mrf_bruteforce(
    graph: &ConsistencyGraph,
    doc: &Document,
    candidates: &[Vec<Vec<usize>>],
    p: &ConsistencyPotentials,
    multipliers: Option<&Multipliers>,
    limit: usize,
) -> Result<Assignment, GraphError> {
    check_graph(graph, doc, candidates)?;
    let domain = doc.label_domain();

    let mut size: usize = 0;
    for ctx in &graph.contexts {
        let mut clique = domain.len() + 1;
        for w in &ctx.members {
            clique = clique.saturating_mul(candidates[w.sentence][w.token].len());
        }
        size = size.saturating_add(clique);
    }
    if size > limit {
        return Err(GraphError::LimitExceeded { size, limit });
    }

    let mut out = Assignment::empty();
    for ctx in &graph.contexts {
        let mut best: Option<(f64, Option<Category>, Vec<usize>)> = None;
        for zc in domain.iter().map(Some).chain(std::iter::once(None)) {
            // odometer over word label tuples, last word fastest
            let sizes: Vec<usize> = ctx
                .members
                .iter()
                .map(|w| candidates[w.sentence][w.token].len())
                .collect();
            let mut idx = vec![0usize; ctx.members.len()];
            loop {
                let mut total = 0.0;
                let mut labels = Vec::with_capacity(ctx.members.len());
                for (k, &w) in ctx.members.iter().enumerate() {
                    let c = candidates[w.sentence][w.token][idx[k]];
                    total += word_term(doc, multipliers, w, c, zc, p);
                    labels.push(c);
                }
                if best.as_ref().is_none_or(|(bv, _, _)| total > *bv) {
                    best = Some((total, zc.cloned(), labels));
                }
                // advance
                let mut k = ctx.members.len();
                loop {
                    if k == 0 {
                        break;
                    }
                    k -= 1;
                    idx[k] += 1;
                    if idx[k] < sizes[k] {
                        break;
                    }
                    idx[k] = 0;
                }
                if idx.iter().all(|&v| v == 0) {
                    break;
                }
            }
        }
        let (total, zc, labels) = best.expect("domain nonempty");
        out.score += total;
        for (&w, &c) in ctx.members.iter().zip(&labels) {
            let cat = doc.sentences[w.sentence].categories[c].clone();
            out.g_score += doc.sentences[w.sentence].tag_log_prob[w.token][c]
                + pair_potential(&cat, zc.as_ref(), p);
            out.word_labels.insert(w, (c, cat));
        }
        out.context_labels.push(zc);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cat(s: &str) -> Category {
        parse_category(s).unwrap()
    }

    fn sent(tokens: &[&str], vocab: &[&str], tag: Vec<Vec<f64>>) -> ScoredSentence {
        let m = tokens.len();
        ScoredSentence {
            tokens: tokens.iter().map(|t| t.to_string()).collect(),
            pos: None,
            categories: vocab.iter().map(|c| cat(c)).collect(),
            tag_log_prob: tag,
            dep_log_prob: vec![vec![-1.0; m + 1]; m],
        }
    }

    fn example_doc() -> Document {
        let vocab = &["N", "N/N", "S[ng]\\NP"];
        let t = sent(
            &["a", "man", "is", "exercising"],
            vocab,
            vec![vec![-1.0; 3]; 4],
        );
        let h = sent(
            &["there", "is", "no", "man", "exercising"],
            vocab,
            vec![vec![-1.0; 3]; 5],
        );
        Document {
            sentences: vec![t, h],
            roles: vec![Role::Premise, Role::Hypothesis],
        }
    }

    #[test]
    fn surface_unigram_contexts() {
        let doc = example_doc();
        let g = build_graph(&doc, &ContextStrategy::SurfaceUnigram, &GraphOptions::default())
            .unwrap();
        let got: Vec<(&str, Vec<WordRef>)> = g
            .contexts
            .iter()
            .map(|c| (c.key.as_str(), c.members.clone()))
            .collect();
        assert_eq!(
            got,
            vec![
                (
                    "man",
                    vec![WordRef::new(0, 1), WordRef::new(1, 3)]
                ),
                ("is", vec![WordRef::new(0, 2), WordRef::new(1, 1)]),
                (
                    "exercising",
                    vec![WordRef::new(0, 3), WordRef::new(1, 4)]
                ),
            ]
        );
    }

    #[test]
    fn no_shared_surface_no_contexts() {
        let vocab = &["N"];
        let doc = Document {
            sentences: vec![
                sent(&["cat"], vocab, vec![vec![-0.1]]),
                sent(&["dog"], vocab, vec![vec![-0.1]]),
            ],
            roles: vec![Role::Premise, Role::Hypothesis],
        };
        let g = build_graph(&doc, &ContextStrategy::SurfaceUnigram, &GraphOptions::default())
            .unwrap();
        assert!(g.is_empty());
    }

    #[test]
    fn both_roles_required() {
        let vocab = &["N"];
        let doc = Document {
            sentences: vec![
                sent(&["man", "man"], vocab, vec![vec![-0.1], vec![-0.1]]),
                sent(&["dog"], vocab, vec![vec![-0.1]]),
            ],
            roles: vec![Role::Premise, Role::Hypothesis],
        };
        let g = build_graph(&doc, &ContextStrategy::SurfaceUnigram, &GraphOptions::default())
            .unwrap();
        assert!(g.is_empty());
    }

    #[test]
    fn stopwords_are_skipped() {
        let doc = example_doc();
        let mut options = GraphOptions::default();
        options.stopwords.insert("is".into());
        let g = build_graph(&doc, &ContextStrategy::SurfaceUnigram, &options).unwrap();
        assert!(g.contexts.iter().all(|c| c.key != "is"));
    }

    #[test]
    fn pos_pattern_requires_tags() {
        let doc = example_doc();
        let strategy = ContextStrategy::PosPattern {
            patterns: japanese_pos_preset(),
        };
        assert!(matches!(
            build_graph(&doc, &strategy, &GraphOptions::default()),
            Err(GraphError::MissingPos { sentence: 0 })
        ));
    }

    #[test]
    fn pos_pattern_first_key_wins() {
        let vocab = &["N"];
        let mut s1 = sent(&["run", "fast"], vocab, vec![vec![-0.1]; 2]);
        s1.pos = Some(vec!["V".into(), "ADV".into()]);
        let mut s2 = sent(&["run", "fast"], vocab, vec![vec![-0.1]; 2]);
        s2.pos = Some(vec!["V".into(), "ADV".into()]);
        let doc = Document {
            sentences: vec![s1, s2],
            roles: vec![Role::Premise, Role::Hypothesis],
        };
        // both patterns match token 0 of each sentence; the unigram "run"
        // pattern comes first so it claims the word nodes
        let strategy = ContextStrategy::PosPattern {
            patterns: vec![vec!["V".into()], vec!["V".into(), "ADV".into()]],
        };
        let g = build_graph(&doc, &strategy, &GraphOptions::default()).unwrap();
        assert_eq!(g.contexts.len(), 1);
        assert_eq!(g.contexts[0].key, "run");
        assert_eq!(g.contexts[0].members.len(), 2);
    }

    #[test]
    fn pair_potential_cases() {
        let p = ConsistencyPotentials::default();
        assert_eq!(pair_potential(&cat("N"), Some(&cat("N")), &p), 0.9);
        assert_eq!(
            pair_potential(&cat("S[dcl]\\NP"), Some(&cat("S[ng]\\NP")), &p),
            0.1
        );
        assert_eq!(
            pair_potential(&cat("N/N"), Some(&cat("S[ng]\\NP")), &p),
            0.9
        );
        assert_eq!(pair_potential(&cat("NP"), None, &p), 0.0);
        assert_eq!(pair_potential(&cat("NP"), Some(&cat("N")), &p), 0.0);
    }

    #[test]
    fn equivalences_are_symmetric_and_feature_bound() {
        let p = ConsistencyPotentials::default();
        let a = cat("(S[dcl]\\NP)/NP");
        let b = cat("S[dcl]\\NP");
        assert_eq!(pair_potential(&a, Some(&b), &p), 0.9);
        assert_eq!(pair_potential(&b, Some(&a), &p), 0.9);
        // shared variable: features must agree, and simpl equality needs
        // the same skeleton, so a feature-mismatched pair scores nothing
        let c = cat("S[ng]\\NP");
        assert_eq!(pair_potential(&a, Some(&c), &p), 0.0);
    }

    #[test]
    fn delta_ordering_enforced() {
        assert!(ConsistencyPotentials::new(0.1, 0.9, 0.0, vec![]).is_err());
        assert!(ConsistencyPotentials::new(0.9, 0.1, 0.0, vec![]).is_ok());
    }

    #[test]
    fn empty_graph_decodes_to_empty() {
        let doc = example_doc();
        let cands = doc.candidates(&ParseConfig::default());
        let g = ConsistencyGraph::default();
        let a = decode_mrf(&g, &doc, &cands, &ConsistencyPotentials::default(), None).unwrap();
        assert_eq!(a, Assignment::empty());
    }

    #[test]
    fn agreeing_words_pull_context() {
        // one clique, two words, both prefer N; delta1 rewards agreement
        let vocab = &["N", "NP", "S[ng]\\NP"];
        let doc = Document {
            sentences: vec![
                sent(&["man"], vocab, vec![vec![-0.1, -0.5, -3.0]]),
                sent(&["man"], vocab, vec![vec![-0.2, -0.4, -3.0]]),
            ],
            roles: vec![Role::Premise, Role::Hypothesis],
        };
        let g = build_graph(&doc, &ContextStrategy::SurfaceUnigram, &GraphOptions::default())
            .unwrap();
        let p = ConsistencyPotentials::new(0.9, 0.1, 0.0, vec![]).unwrap();
        let cands = doc.candidates(&ParseConfig::default());
        let a = decode_mrf(&g, &doc, &cands, &p, None).unwrap();
        assert_eq!(a.context_labels, vec![Some(cat("N"))]);
        assert_eq!(a.word_labels[&WordRef::new(0, 0)].1, cat("N"));
        assert_eq!(a.word_labels[&WordRef::new(1, 0)].1, cat("N"));
        assert!((a.score - (-0.1 - 0.2 + 1.8)).abs() < 1e-12);
        assert_eq!(a.score, a.g_score);
    }

    #[test]
    fn strong_disagreement_turns_off_clique() {
        // the words insist on incompatible categories, and NULL's two
        // delta3 payoffs beat the single delta1 any concrete label earns
        let vocab = &["N", "S[ng]\\NP"];
        let doc = Document {
            sentences: vec![
                sent(&["run"], vocab, vec![vec![-0.1, -9.0]]),
                sent(&["run"], vocab, vec![vec![-9.0, -0.1]]),
            ],
            roles: vec![Role::Premise, Role::Hypothesis],
        };
        let g = build_graph(&doc, &ContextStrategy::SurfaceUnigram, &GraphOptions::default())
            .unwrap();
        let p = ConsistencyPotentials::new(0.3, 0.2, 0.2, vec![]).unwrap();
        let cands = doc.candidates(&ParseConfig::default());
        let a = decode_mrf(&g, &doc, &cands, &p, None).unwrap();
        assert_eq!(a.context_labels, vec![None]);
        assert_eq!(a.word_labels[&WordRef::new(0, 0)].1, cat("N"));
        assert_eq!(a.word_labels[&WordRef::new(1, 0)].1, cat("S[ng]\\NP"));
        let b = decode_mrf_bruteforce(&g, &doc, &cands, &p, None, 1_000_000).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn multipliers_shift_single_word() {
        let vocab = &["N", "NP"];
        let doc = Document {
            sentences: vec![sent(&["w"], vocab, vec![vec![-0.1, -0.5]])],
            roles: vec![Role::Premise],
        };
        let g = ConsistencyGraph {
            contexts: vec![ContextNode {
                key: "w".into(),
                members: vec![WordRef::new(0, 0)],
            }],
        };
        let p = ConsistencyPotentials::new(0.0, 0.0, 0.0, vec![]).unwrap();
        let cands = doc.candidates(&ParseConfig::default());
        let mut u = Multipliers::new();
        u.insert((WordRef::new(0, 0), 1), 1.0);
        let a = decode_mrf(&g, &doc, &cands, &p, Some(&u)).unwrap();
        assert_eq!(a.word_labels[&WordRef::new(0, 0)].1, cat("NP"));
        // score carries the multiplier, g_score does not
        assert!((a.score - 0.5).abs() < 1e-12);
        assert!((a.g_score - (-0.5)).abs() < 1e-12);
    }

    #[test]
    fn all_zero_potentials_tie_break() {
        let vocab = &["N", "NP"];
        let doc = Document {
            sentences: vec![
                sent(&["w"], vocab, vec![vec![-0.1, -0.1]]),
                sent(&["w"], vocab, vec![vec![-0.1, -0.1]]),
            ],
            roles: vec![Role::Premise, Role::Hypothesis],
        };
        let g = build_graph(&doc, &ContextStrategy::SurfaceUnigram, &GraphOptions::default())
            .unwrap();
        let p = ConsistencyPotentials::new(0.0, 0.0, 0.0, vec![]).unwrap();
        let cands = doc.candidates(&ParseConfig::default());
        let a = decode_mrf(&g, &doc, &cands, &p, None).unwrap();
        // everything ties: lowest vocabulary index everywhere
        assert_eq!(a.context_labels, vec![Some(cat("N"))]);
        assert!(a.word_labels.values().all(|(c, _)| *c == 0));
        let b = decode_mrf_bruteforce(&g, &doc, &cands, &p, None, 1_000_000).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn non_star_graph_rejected() {
        let vocab = &["N"];
        let doc = Document {
            sentences: vec![sent(&["w"], vocab, vec![vec![-0.1]])],
            roles: vec![Role::Premise],
        };
        let w = WordRef::new(0, 0);
        let g = ConsistencyGraph {
            contexts: vec![
                ContextNode {
                    key: "a".into(),
                    members: vec![w],
                },
                ContextNode {
                    key: "b".into(),
                    members: vec![w],
                },
            ],
        };
        let cands = doc.candidates(&ParseConfig::default());
        assert!(matches!(
            decode_mrf(&g, &doc, &cands, &ConsistencyPotentials::default(), None),
            Err(GraphError::NotAStarForest { .. })
        ));
    }

    #[test]
    fn bruteforce_limit() {
        let vocab = &["N", "NP"];
        let doc = Document {
            sentences: vec![
                sent(&["w"], vocab, vec![vec![-0.1, -0.2]]),
                sent(&["w"], vocab, vec![vec![-0.1, -0.2]]),
            ],
            roles: vec![Role::Premise, Role::Hypothesis],
        };
        let g = build_graph(&doc, &ContextStrategy::SurfaceUnigram, &GraphOptions::default())
            .unwrap();
        let cands = doc.candidates(&ParseConfig::default());
        assert!(matches!(
            decode_mrf_bruteforce(&g, &doc, &cands, &ConsistencyPotentials::default(), None, 2),
            Err(GraphError::LimitExceeded { .. })
        ));
    }
}

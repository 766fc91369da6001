//! Document-level runs: ingestion, baseline vs. joint decoding, semantic
//! composition, metrics, and the δ grid search. Everything here is
//! deterministic: identical inputs and config produce byte-identical
//! outputs, traces included.

use std::io::Write as _;
use std::process::{Command, Stdio};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::category::Category;
use crate::derivation::Derivation;
use crate::dual::{solve_joint, DualConfig, DualError, JointResult, TraceEntry};
use crate::mrf::{
    build_graph, Assignment, ConsistencyGraph, ConsistencyPotentials, ContextStrategy,
    Document, GraphError, GraphOptions, PotentialsError, Role,
};
use crate::parser::{parse_astar, ParseError};
use crate::semantics::{
    assign_lexical_terms, compose_semantics, render_formula, SemanticsError, TemplateSet,
};
use crate::sentence::{ParseConfig, SentenceError, SentenceFile};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Sentence(#[from] SentenceError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Dual(#[from] DualError),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("scorer command failed: {0}")]
    Scorer(String),
}

impl From<PotentialsError> for PipelineError {
    fn from(e: PotentialsError) -> Self {
        PipelineError::Config(e.to_string())
    }
}

impl PipelineError {
    /// Stable exit codes: 2 config/validation, 3 no parse, 4 template gap.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_)
            | PipelineError::Sentence(_)
            | PipelineError::Json(_) => 2,
            PipelineError::Parse(e) | PipelineError::Dual(DualError::Parse(e)) => match e {
                ParseError::NoParse { .. } | ParseError::NoCandidates { .. } => 3,
                _ => 1,
            },
            PipelineError::Semantics(
                SemanticsError::TemplateGap { .. } | SemanticsError::MissingShift { .. },
            ) => 4,
            _ => 1,
        }
    }
}

/// δ values plus the equivalence-pair table in config form.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PotentialsConfig {
    pub delta1: f64,
    pub delta2: f64,
    pub delta3: f64,
    /// `None` means the built-in English pair table; `[]` disables pairs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equivalences: Option<Vec<(Category, Category)>>,
}

impl Default for PotentialsConfig {
    fn default() -> Self {
        PotentialsConfig {
            delta1: 0.9,
            delta2: 0.1,
            delta3: 0.0,
            equivalences: None,
        }
    }
}

impl PotentialsConfig {
    pub fn build(&self) -> Result<ConsistencyPotentials, PipelineError> {
        let pairs = self
            .equivalences
            .clone()
            .unwrap_or_else(ConsistencyPotentials::default_equivalences);
        Ok(ConsistencyPotentials::new(
            self.delta1,
            self.delta2,
            self.delta3,
            pairs,
        )?)
    }
}

fn default_strategy() -> ContextStrategy {
    ContextStrategy::SurfaceUnigram
}

fn default_true() -> bool {
    true
}

/// Full run configuration; every field has a default and the whole struct
/// round-trips through JSON.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub strategy: ContextStrategy,
    pub graph: GraphOptions,
    pub potentials: PotentialsConfig,
    pub parse: ParseConfig,
    pub dual: DualConfig,
    /// Path to a template-set JSON file; `None` uses the built-in set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub templates: Option<String>,
    /// When false, the consistency graph is left empty and joint output
    /// reduces to the baseline parses.
    #[serde(default = "default_true")]
    pub mrf_enabled: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            strategy: default_strategy(),
            graph: GraphOptions::default(),
            potentials: PotentialsConfig::default(),
            parse: ParseConfig::default(),
            dual: DualConfig::default(),
            templates: None,
            mrf_enabled: true,
        }
    }
}

/// A validated configuration with the templates loaded.
pub struct ResolvedConfig {
    pub strategy: ContextStrategy,
    pub graph: GraphOptions,
    pub potentials: ConsistencyPotentials,
    pub parse: ParseConfig,
    pub dual: DualConfig,
    pub templates: TemplateSet,
    pub mrf_enabled: bool,
}

impl RunConfig {
    pub fn from_json(json: &str) -> Result<RunConfig, PipelineError> {
        Ok(serde_json::from_str(json)?)
    }

    pub fn resolve(&self) -> Result<ResolvedConfig, PipelineError> {
        self.parse.validate().map_err(PipelineError::Config)?;
        self.dual
            .validate()
            .map_err(|e| PipelineError::Config(e.to_string()))?;
        let templates = match &self.templates {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    PipelineError::Config(format!("cannot read template file {path:?}: {e}"))
                })?;
                TemplateSet::from_json(&text)
                    .map_err(|e| PipelineError::Config(format!("template file {path:?}: {e}")))?
            }
            None => TemplateSet::default(),
        };
        Ok(ResolvedConfig {
            strategy: self.strategy.clone(),
            graph: self.graph.clone(),
            potentials: self.potentials.build()?,
            parse: self.parse.clone(),
            dual: self.dual.clone(),
            templates,
            mrf_enabled: self.mrf_enabled,
        })
    }
}

/// On-disk document: sentences with entailment roles.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DocumentFile {
    pub sentences: Vec<DocumentSentenceFile>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DocumentSentenceFile {
    pub role: Role,
    #[serde(flatten)]
    pub sentence: SentenceFile,
}

impl DocumentFile {
    pub fn from_json(json: &str) -> Result<DocumentFile, PipelineError> {
        Ok(serde_json::from_str(json)?)
    }

    pub fn into_document(self) -> Result<Document, PipelineError> {
        let mut sentences = Vec::with_capacity(self.sentences.len());
        let mut roles = Vec::with_capacity(self.sentences.len());
        for (i, s) in self.sentences.into_iter().enumerate() {
            roles.push(s.role);
            sentences.push(s.sentence.into_sentence(i)?);
        }
        Ok(Document { sentences, roles })
    }
}

/// Per-document run metrics.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Metrics {
    pub converged: bool,
    pub iterations: usize,
    /// Disagreeing word nodes at the first dual iteration.
    pub initial_disagreements: usize,
    /// Fraction of within-clique word-node pairs whose final categories are
    /// identical; `None` when the graph has no pairs.
    pub consistency_rate: Option<f64>,
    /// Tokens whose joint category differs from the baseline parse.
    pub category_changes: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct DerivationOutput {
    pub bracketed: String,
    pub categories: Vec<Category>,
    pub heads: Vec<usize>,
    pub score: f64,
}

impl DerivationOutput {
    fn new(d: &Derivation, tokens: &[String], categories: &[Category]) -> Self {
        DerivationOutput {
            bracketed: d.bracketed(tokens),
            categories: d.leaf_cats.iter().map(|&c| categories[c].clone()).collect(),
            heads: d.heads.clone(),
            score: d.score,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SentenceOutput {
    pub role: Role,
    pub tokens: Vec<String>,
    pub baseline: DerivationOutput,
    pub joint: DerivationOutput,
    pub baseline_formula: String,
    pub joint_formula: String,
}

#[derive(Serialize)]
pub struct DocumentOutput {
    pub sentences: Vec<SentenceOutput>,
    pub graph: ConsistencyGraph,
    pub assignment: Assignment,
    pub converged: bool,
    pub iterations: usize,
    pub trace: Vec<TraceEntry>,
    /// Combined objective of the returned solution: the unpenalized MRF
    /// score plus the unpenalized parse scores.
    pub primal: f64,
    pub metrics: Metrics,
}

fn consistency_rate(
    graph: &ConsistencyGraph,
    doc: &Document,
    derivations: &[Derivation],
) -> Option<f64> {
    let mut pairs = 0usize;
    let mut agree = 0usize;
    for ctx in &graph.contexts {
        for (i, a) in ctx.members.iter().enumerate() {
            for b in &ctx.members[i + 1..] {
                pairs += 1;
                let ca = &doc.sentences[a.sentence].categories
                    [derivations[a.sentence].leaf_cats[a.token]];
                let cb = &doc.sentences[b.sentence].categories
                    [derivations[b.sentence].leaf_cats[b.token]];
                if ca == cb {
                    agree += 1;
                }
            }
        }
    }
    (pairs > 0).then(|| agree as f64 / pairs as f64)
}

fn formula_for(
    d: &Derivation,
    s: &crate::sentence::ScoredSentence,
    templates: &TemplateSet,
) -> Result<String, PipelineError> {
    let terms = assign_lexical_terms(d, s, templates)?;
    let t = compose_semantics(d, &terms, templates)?;
    Ok(render_formula(&t))
}

/// Runs one document end to end: baseline parses, the joint solve, both
/// formulas per sentence, and metrics.
pub fn run_document(
    doc: &Document,
    cfg: &ResolvedConfig,
) -> Result<DocumentOutput, PipelineError> {
    doc.validate()?;
    let graph = if cfg.mrf_enabled {
        build_graph(doc, &cfg.strategy, &cfg.graph)?
    } else {
        ConsistencyGraph::default()
    };

    let mut baseline = Vec::with_capacity(doc.sentences.len());
    for s in &doc.sentences {
        baseline.push(parse_astar(s, &cfg.parse, None)?);
    }

    let joint: JointResult = solve_joint(doc, &graph, &cfg.potentials, &cfg.parse, &cfg.dual)?;

    let mut sentences = Vec::with_capacity(doc.sentences.len());
    let mut category_changes = 0usize;
    for (i, s) in doc.sentences.iter().enumerate() {
        let b = &baseline[i];
        let j = &joint.derivations[i];
        category_changes += b
            .leaf_cats
            .iter()
            .zip(&j.leaf_cats)
            .filter(|(x, y)| s.categories[**x] != s.categories[**y])
            .count();
        sentences.push(SentenceOutput {
            role: doc.roles[i],
            tokens: s.tokens.clone(),
            baseline: DerivationOutput::new(b, &s.tokens, &s.categories),
            joint: DerivationOutput::new(j, &s.tokens, &s.categories),
            baseline_formula: formula_for(b, s, &cfg.templates)?,
            joint_formula: formula_for(j, s, &cfg.templates)?,
        });
    }

    let metrics = Metrics {
        converged: joint.converged,
        iterations: joint.iterations,
        initial_disagreements: joint.trace.first().map_or(0, |t| t.disagreements),
        consistency_rate: consistency_rate(&graph, doc, &joint.derivations),
        category_changes,
    };

    Ok(DocumentOutput {
        sentences,
        graph,
        assignment: joint.assignment,
        converged: joint.converged,
        iterations: joint.iterations,
        trace: joint.trace,
        primal: joint.primal,
        metrics,
    })
}

// ---------------------------------------------------------------------------
// Grid search

/// All ordered triples (δ1, δ2, δ3) from {0.0, 0.1, …, 0.9} with
/// δ1 ≥ δ2 ≥ δ3 — 220 of them.
pub fn delta_grid() -> Vec<(f64, f64, f64)> {
    let mut out = Vec::new();
    for a in 0..10u32 {
        for b in 0..=a {
            for c in 0..=b {
                out.push((a as f64 / 10.0, b as f64 / 10.0, c as f64 / 10.0));
            }
        }
    }
    out
}

/// Document-level objective for ranking δ triples.
pub enum Scorer {
    /// Mean consistency rate over documents that have clique pairs.
    ConsistencyRate,
    /// Shell command fed the per-document Metrics JSON array on stdin;
    /// must print a single float on stdout.
    Command(String),
}

impl Scorer {
    fn score(&self, metrics: &[Metrics]) -> Result<f64, PipelineError> {
        match self {
            Scorer::ConsistencyRate => {
                let rates: Vec<f64> =
                    metrics.iter().filter_map(|m| m.consistency_rate).collect();
                if rates.is_empty() {
                    Ok(0.0)
                } else {
                    Ok(rates.iter().sum::<f64>() / rates.len() as f64)
                }
            }
            Scorer::Command(cmd) => {
                let mut child = Command::new("sh")
                    .arg("-c")
                    .arg(cmd)
                    .stdin(Stdio::piped())
                    .stdout(Stdio::piped())
                    .spawn()
                    .map_err(|e| PipelineError::Scorer(format!("{cmd}: {e}")))?;
                let payload = serde_json::to_vec(metrics)?;
                child
                    .stdin
                    .as_mut()
                    .expect("piped stdin")
                    .write_all(&payload)?;
                let out = child
                    .wait_with_output()
                    .map_err(|e| PipelineError::Scorer(format!("{cmd}: {e}")))?;
                if !out.status.success() {
                    return Err(PipelineError::Scorer(format!(
                        "{cmd}: exit status {}",
                        out.status
                    )));
                }
                String::from_utf8_lossy(&out.stdout)
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| PipelineError::Scorer(format!("{cmd}: bad output: {e}")))
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GridEntry {
    pub deltas: (f64, f64, f64),
    pub score: f64,
}

/// Evaluates every grid triple on the dev documents and returns them ranked
/// by score (descending; enumeration order breaks ties).
pub fn grid_search_deltas(
    docs: &[Document],
    cfg: &ResolvedConfig,
    scorer: &Scorer,
) -> Result<Vec<GridEntry>, PipelineError> {
    if docs.is_empty() {
        return Err(PipelineError::Config("grid search needs documents".into()));
    }
    let mut ranked = Vec::new();
    for (d1, d2, d3) in delta_grid() {
        let potentials = ConsistencyPotentials::new(
            d1,
            d2,
            d3,
            cfg.potentials.equivalences().to_vec(),
        )?;
        let mut metrics = Vec::with_capacity(docs.len());
        for doc in docs {
            let graph = if cfg.mrf_enabled {
                build_graph(doc, &cfg.strategy, &cfg.graph)?
            } else {
                ConsistencyGraph::default()
            };
            let joint = solve_joint(doc, &graph, &potentials, &cfg.parse, &cfg.dual)?;
            metrics.push(Metrics {
                converged: joint.converged,
                iterations: joint.iterations,
                initial_disagreements: joint.trace.first().map_or(0, |t| t.disagreements),
                consistency_rate: consistency_rate(&graph, doc, &joint.derivations),
                category_changes: 0,
            });
        }
        ranked.push(GridEntry {
            deltas: (d1, d2, d3),
            score: scorer.score(&metrics)?,
        });
    }
    ranked.sort_by(|a, b| b.score.partial_cmp(&a.score).unwrap());
    Ok(ranked)
}

/// Aggregates per-document metrics into a fixed-format report.
pub fn report_metrics(metrics: &[Metrics]) -> String {
    let n = metrics.len();
    let converged = metrics.iter().filter(|m| m.converged).count();
    let mean_iter = if n == 0 {
        0.0
    } else {
        metrics.iter().map(|m| m.iterations as f64).sum::<f64>() / n as f64
    };
    let rates: Vec<f64> = metrics.iter().filter_map(|m| m.consistency_rate).collect();
    let changes: usize = metrics.iter().map(|m| m.category_changes).sum();
    let mut out = String::new();
    out.push_str(&format!("documents: {n}\n"));
    out.push_str(&format!(
        "converged: {converged}/{n} ({:.4})\n",
        if n == 0 { 0.0 } else { converged as f64 / n as f64 }
    ));
    out.push_str(&format!("mean iterations: {mean_iter:.2}\n"));
    match rates.is_empty() {
        true => out.push_str("consistency rate: n/a (no clique pairs)\n"),
        false => out.push_str(&format!(
            "consistency rate: {:.4} (over {} documents with clique pairs)\n",
            rates.iter().sum::<f64>() / rates.len() as f64,
            rates.len()
        )),
    }
    out.push_str(&format!("category changes vs. baseline: {changes}\n"));
    out
}

/// The shipped motivating-example document and its config (see the fixture
/// files for the margin derivation).
pub fn motivating_example() -> Result<(Document, RunConfig), PipelineError> {
    let doc = DocumentFile::from_json(include_str!("../tests/fixtures/exercising-doc.json"))?
        .into_document()?;
    let cfg = RunConfig::from_json(include_str!("../tests/fixtures/exercising-config.json"))?;
    Ok((doc, cfg))
}

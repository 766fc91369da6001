//! `doccg` — document-level CCG parsing with cross-sentence consistency.
//!
//! Subcommands: `parse` one document, `batch` a set of documents,
//! `grid-search` the δ triples, `validate` input files.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use doccg::mrf::ContextStrategy;
use doccg::pipeline::{
    grid_search_deltas, report_metrics, run_document, DocumentFile, Metrics, PipelineError,
    RunConfig, Scorer,
};

#[derive(Parser)]
#[command(name = "doccg", version, about = "Document-level CCG parsing toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// Run configuration JSON file; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Supertag pruning ratio β.
    #[arg(long)]
    beta: Option<f64>,
    /// Candidate cap per token.
    #[arg(long)]
    max_categories: Option<usize>,
    /// Length cap for the exhaustive oracle.
    #[arg(long)]
    oracle_limit: Option<usize>,
    /// Consistency potentials δ1 δ2 δ3.
    #[arg(long)]
    delta1: Option<f64>,
    #[arg(long)]
    delta2: Option<f64>,
    #[arg(long)]
    delta3: Option<f64>,
    /// Initial dual step size α0.
    #[arg(long)]
    alpha0: Option<f64>,
    /// Dual iteration cap K.
    #[arg(long)]
    max_iterations: Option<usize>,
    /// Per-iteration step-size decay.
    #[arg(long)]
    decay: Option<f64>,
    /// Context strategy: "surface-unigram" or "pos-pattern".
    #[arg(long)]
    strategy: Option<String>,
    /// POS patterns for pos-pattern, e.g. '[["N"],["V","ADV"]]'.
    #[arg(long)]
    patterns: Option<String>,
    /// Comma-separated stopword list for context keys.
    #[arg(long)]
    stopwords: Option<String>,
    /// Semantic template JSON file.
    #[arg(long)]
    templates: Option<PathBuf>,
    /// Disable the consistency MRF (baseline parsing only).
    #[arg(long)]
    no_mrf: bool,
}

impl ConfigArgs {
    fn build(&self) -> Result<RunConfig, PipelineError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_json(&std::fs::read_to_string(path)?)?,
            None => RunConfig::default(),
        };
        if let Some(v) = self.beta {
            cfg.parse.beta = v;
        }
        if let Some(v) = self.max_categories {
            cfg.parse.max_categories = v;
        }
        if let Some(v) = self.oracle_limit {
            cfg.parse.oracle_limit = v;
        }
        if let Some(v) = self.delta1 {
            cfg.potentials.delta1 = v;
        }
        if let Some(v) = self.delta2 {
            cfg.potentials.delta2 = v;
        }
        if let Some(v) = self.delta3 {
            cfg.potentials.delta3 = v;
        }
        if let Some(v) = self.alpha0 {
            cfg.dual.alpha0 = v;
        }
        if let Some(v) = self.max_iterations {
            cfg.dual.max_iterations = v;
        }
        if let Some(v) = self.decay {
            cfg.dual.decay = v;
        }
        match self.strategy.as_deref() {
            None => {}
            Some("surface-unigram") => cfg.strategy = ContextStrategy::SurfaceUnigram,
            Some("pos-pattern") => {
                let patterns = match &self.patterns {
                    Some(p) => serde_json::from_str(p)?,
                    None => doccg::mrf::japanese_pos_preset(),
                };
                cfg.strategy = ContextStrategy::PosPattern { patterns };
            }
            Some(other) => {
                return Err(PipelineError::Config(format!(
                    "unknown strategy {other:?}"
                )))
            }
        }
        if let Some(s) = &self.stopwords {
            cfg.graph.stopwords = s.split(',').map(|w| w.trim().to_lowercase()).collect();
        }
        if let Some(t) = &self.templates {
            cfg.templates = Some(t.display().to_string());
        }
        if self.no_mrf {
            cfg.mrf_enabled = false;
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one document: baseline and joint parses, formulas, metrics.
    Parse {
        /// Document JSON file.
        document: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
        /// Write the JSON output here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Also print human-readable derivations and formulas to stderr.
        #[arg(long)]
        trees: bool,
    },
    /// Run several documents and write outputs plus an aggregate report.
    Batch {
        /// Document JSON files.
        documents: Vec<PathBuf>,
        #[command(flatten)]
        config: ConfigArgs,
        /// Output directory (one JSON per input, plus report.txt).
        #[arg(long)]
        output: PathBuf,
    },
    /// Rank all 220 ordered δ triples on a dev set.
    GridSearch {
        /// Dev-set document JSON files.
        documents: Vec<PathBuf>,
        #[command(flatten)]
        config: ConfigArgs,
        /// External scorer command (reads metrics JSON on stdin, prints a
        /// float). Default scorer is the mean consistency rate.
        #[arg(long)]
        scorer_cmd: Option<String>,
        /// Print only the best N triples (default: all 220).
        #[arg(long)]
        top: Option<usize>,
    },
    /// Validate document files against the schema without decoding.
    Validate {
        /// Document JSON files.
        documents: Vec<PathBuf>,
    },
}

fn verbose() -> bool {
    std::env::var("DOCCG_VERBOSE").is_ok_and(|v| !v.is_empty() && v != "0")
}

fn load_document(path: &Path) -> Result<doccg::Document, PipelineError> {
    DocumentFile::from_json(&std::fs::read_to_string(path)?)?.into_document()
}

fn run(cli: Cli) -> Result<(), PipelineError> {
    match cli.command {
        Cmd::Parse {
            document,
            config,
            output,
            trees,
        } => {
            let cfg = config.build()?.resolve()?;
            let doc = load_document(&document)?;
            let out = run_document(&doc, &cfg)?;
            if trees {
                for s in &out.sentences {
                    eprintln!("[{:?}] {}", s.role, s.tokens.join(" "));
                    eprintln!("  baseline: {}", s.baseline.bracketed);
                    eprintln!("  joint:    {}", s.joint.bracketed);
                    eprintln!("  baseline formula: {}", s.baseline_formula);
                    eprintln!("  joint formula:    {}", s.joint_formula);
                }
            }
            let json = serde_json::to_string_pretty(&out)?;
            match output {
                Some(path) => std::fs::write(path, json + "\n")?,
                None => println!("{json}"),
            }
            if verbose() {
                eprintln!(
                    "converged={} iterations={} changes={}",
                    out.converged, out.iterations, out.metrics.category_changes
                );
            }
            Ok(())
        }
        Cmd::Batch {
            documents,
            config,
            output,
        } => {
            if documents.is_empty() {
                return Err(PipelineError::Config("no documents given".into()));
            }
            let cfg = config.build()?.resolve()?;
            std::fs::create_dir_all(&output)?;
            let mut metrics: Vec<Metrics> = Vec::new();
            for path in &documents {
                let doc = load_document(path)?;
                let out = run_document(&doc, &cfg)?;
                let stem = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "document".into());
                let target = output.join(format!("{stem}.out.json"));
                std::fs::write(&target, serde_json::to_string_pretty(&out)? + "\n")?;
                if verbose() {
                    eprintln!("{} -> {}", path.display(), target.display());
                }
                metrics.push(out.metrics);
            }
            let report = report_metrics(&metrics);
            std::fs::write(output.join("report.txt"), &report)?;
            print!("{report}");
            Ok(())
        }
        Cmd::GridSearch {
            documents,
            config,
            scorer_cmd,
            top,
        } => {
            let cfg = config.build()?.resolve()?;
            let docs = documents
                .iter()
                .map(|p| load_document(p))
                .collect::<Result<Vec<_>, _>>()?;
            let scorer = match scorer_cmd {
                Some(cmd) => Scorer::Command(cmd),
                None => Scorer::ConsistencyRate,
            };
            let ranked = grid_search_deltas(&docs, &cfg, &scorer)?;
            let take = top.unwrap_or(ranked.len());
            for e in ranked.iter().take(take) {
                println!(
                    "{:.1} {:.1} {:.1}  {:.6}",
                    e.deltas.0, e.deltas.1, e.deltas.2, e.score
                );
            }
            Ok(())
        }
        Cmd::Validate { documents } => {
            if documents.is_empty() {
                return Err(PipelineError::Config("no documents given".into()));
            }
            for path in &documents {
                let doc = load_document(path)?;
                println!("{}: ok ({} sentences)", path.display(), doc.sentences.len());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

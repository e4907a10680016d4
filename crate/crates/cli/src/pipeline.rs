//! End-to-end run: ingest, dictionary, match, queue, report.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use log::{info, warn};
use namelink_core::dictionary::{Dictionary, DictionaryBuilder, DictionaryEdit, DictionaryError, Strategy};
use namelink_core::matching::{MatchDecision, MatchEngine, MatchError};
use namelink_core::metrics::{parse_expert_labels, ExpertLabels, MetricsError};
use namelink_core::parse::NameParser;
use namelink_core::phonetic::CodeTable;
use namelink_core::record::DatasetRecord;

use crate::config::{ConfigError, PipelineConfig};
use crate::ingest::{ingest, read_pairs, read_utf8, IngestError};
use crate::review::{build_queue, ReviewError, ReviewQueueItem, ReviewState};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("dictionary {0} does not exist and no training pairs are configured")]
    DictionaryMissing(PathBuf),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Dictionary(#[from] DictionaryError),
    #[error(transparent)]
    Match(#[from] MatchError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Review(#[from] ReviewError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {reason}")]
    BadResults {
        path: PathBuf,
        line: usize,
        reason: String,
    },
}

impl PipelineError {
    /// True when the fault lies in the configuration rather than the data.
    pub fn is_config(&self) -> bool {
        matches!(self, PipelineError::Config(_) | PipelineError::DictionaryMissing(_))
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn write_file(path: &Path, contents: &[u8]) -> Result<(), PipelineError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let mut f = std::fs::File::create(path).map_err(io_err(path))?;
    f.write_all(contents).map_err(io_err(path))
}

/// One JSON object per line, in the order given.
pub fn results_jsonl(decisions: &[MatchDecision]) -> String {
    let mut out = String::new();
    for d in decisions {
        out.push_str(&serde_json::to_string(d).expect("decision serializes"));
        out.push('\n');
    }
    out
}

pub fn read_results(path: &Path) -> Result<Vec<MatchDecision>, PipelineError> {
    let text = read_utf8(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| {
            serde_json::from_str(l).map_err(|e| PipelineError::BadResults {
                path: path.to_path_buf(),
                line: n + 1,
                reason: e.to_string(),
            })
        })
        .collect()
}

pub fn read_labels(path: &Path) -> Result<ExpertLabels, PipelineError> {
    Ok(parse_expert_labels(&read_utf8(path)?)?)
}

/// Loads the configured dictionary, or builds one from training pairs.
/// The second value is true when the dictionary was built.
pub fn load_dictionary(
    config: &PipelineConfig,
    parser: &NameParser,
    codes: Arc<CodeTable>,
) -> Result<(Dictionary, bool), PipelineError> {
    let d = &config.dictionary;
    if let Some(path) = d.path.as_ref().filter(|p| p.exists()) {
        return Ok((Dictionary::load(path, codes)?, false));
    }
    let Some(training) = &d.training else {
        return Err(PipelineError::DictionaryMissing(d.path.clone().unwrap_or_default()));
    };
    let strategy: Strategy = d
        .strategy
        .parse()
        .map_err(|e: DictionaryError| ConfigError::Invalid(e.to_string()))?;
    let pairs = read_pairs(training)?;
    let edits = match &d.edits {
        Some(p) => DictionaryEdit::parse_list(&read_utf8(p)?)?,
        None => Vec::new(),
    };
    let (report, warnings) = DictionaryBuilder::new(parser, codes).build_with(strategy, &pairs, &edits);
    for w in warnings {
        warn!("dictionary edit: {w:?}");
    }
    info!(
        "built dictionary of {} entries from {} pairs ({} skipped)",
        report.dictionary.len(),
        report.pairs_used,
        report.pairs_skipped
    );
    Ok((report.dictionary, true))
}

#[derive(Debug, Clone)]
pub struct PipelineOutputs {
    pub results: PathBuf,
    pub report: PathBuf,
    pub queue: PathBuf,
    pub decisions: Vec<MatchDecision>,
    pub queue_items: Vec<ReviewQueueItem>,
    pub warnings: Vec<String>,
}

/// Matched records, with the source and destination rosters they came from.
pub struct Matched {
    pub sources: Vec<DatasetRecord>,
    pub destinations: Vec<DatasetRecord>,
    pub decisions: Vec<MatchDecision>,
    pub warnings: Vec<String>,
}

pub fn match_datasets(config: &PipelineConfig, parser: &NameParser, dict: &Dictionary) -> Result<Matched, PipelineError> {
    let src = ingest(&config.source)?;
    let dst = ingest(&config.destination)?;
    let mut warnings = src.warnings;
    warnings.extend(dst.warnings);
    if src.records.is_empty() {
        let msg = format!("source dataset {} has no records", config.source.path.display());
        warn!("{msg}");
        warnings.push(msg);
    }
    let run = MatchEngine::new(dict, parser, config.match_options()).run(&src.records, &dst.records)?;
    for (id, reason) in &run.skipped {
        warnings.push(format!("record {id:?} not matched: {reason}"));
    }
    Ok(Matched {
        sources: src.records,
        destinations: dst.records,
        decisions: run.decisions,
        warnings,
    })
}

/// Writes `results.jsonl`, `queue.json` and `report.json` (plus
/// `dictionary.tsv` when the dictionary was built) into the output
/// directory. Identical inputs give byte-identical files.
pub fn run_pipeline(config: &PipelineConfig) -> Result<PipelineOutputs, PipelineError> {
    let parser = NameParser::default();
    let codes = Arc::new(CodeTable::default());
    let (dict, built) = load_dictionary(config, &parser, codes)?;
    let out = &config.output.dir;
    if built {
        write_file(&out.join("dictionary.tsv"), dict.to_tsv().as_bytes())?;
    }
    let matched = match_datasets(config, &parser, &dict)?;
    let queue_items = build_queue(
        &matched.decisions,
        &matched.sources,
        &matched.destinations,
        &parser,
        (config.source.name_order, config.destination.name_order),
    );
    let labels = match &config.review.expert_labels {
        Some(p) => read_labels(p)?,
        None => ExpertLabels::new(),
    };
    let state = ReviewState::new(queue_items.clone(), matched.decisions.clone(), labels);
    let metrics = state.metrics()?;

    let results = out.join("results.jsonl");
    let queue = out.join("queue.json");
    let report = out.join("report.json");
    write_file(&results, results_jsonl(&matched.decisions).as_bytes())?;
    write_file(&queue, &serde_json::to_vec_pretty(&queue_items).expect("queue serializes"))?;
    write_file(&report, &serde_json::to_vec_pretty(&metrics).expect("report serializes"))?;
    Ok(PipelineOutputs {
        results,
        report,
        queue,
        decisions: matched.decisions,
        queue_items,
        warnings: matched.warnings,
    })
}

/// Review state for a finished run, with the journal replayed.
pub fn open_review(config: &PipelineConfig) -> Result<ReviewState, PipelineError> {
    let out = &config.output.dir;
    let decisions = read_results(&out.join("results.jsonl"))?;
    let queue_path = out.join("queue.json");
    let queue: Vec<ReviewQueueItem> =
        serde_json::from_str(&read_utf8(&queue_path)?).map_err(|e| PipelineError::BadResults {
            path: queue_path.clone(),
            line: e.line(),
            reason: e.to_string(),
        })?;
    let labels = match &config.review.expert_labels {
        Some(p) => read_labels(p)?,
        None => ExpertLabels::new(),
    };
    Ok(ReviewState::new(queue, decisions, labels).with_journal(&config.journal_path())?)
}

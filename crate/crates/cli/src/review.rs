//! Clerical review queue. Decisions are appended to a JSON-lines journal
//! before they touch memory, so replaying the journal over the queue
//! rebuilds the same state after a restart.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};

use namelink_core::matching::{MatchDecision, Outcome};
use namelink_core::metrics::{build_matrix, ExpertLabels, MetricsError, MetricsReport};
use namelink_core::parse::{NameOrder, NameParser};
use namelink_core::record::DatasetRecord;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ReviewError {
    #[error("no review item {0:?}")]
    NotFound(String),
    #[error("review item {0:?} is already decided")]
    AlreadyDecided(String),
    #[error("malformed decision: {0}")]
    Malformed(String),
    #[error("journal {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("journal line {line}: {reason}")]
    Journal { line: usize, reason: String },
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReviewStatus {
    Pending,
    Accepted,
    Rejected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateView {
    pub dest_id: String,
    pub dest_name: String,
    pub dest_tokens: Vec<String>,
    pub wat: f64,
    pub at: f64,
    pub edit_distance: usize,
    pub relax_level: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReviewQueueItem {
    /// Equal to the source record id: one item per source.
    pub id: String,
    pub source_name: String,
    pub source_tokens: Vec<String>,
    pub candidates: Vec<CandidateView>,
    pub status: ReviewStatus,
    pub accepted: Vec<String>,
    pub decided_by: Option<String>,
    pub decided_at: Option<String>,
}

impl ReviewQueueItem {
    /// Number of destinations the machine proposed.
    pub fn multiplicity(&self) -> usize {
        self.candidates.len()
    }
}

fn tokens(parser: &NameParser, r: &DatasetRecord, order: NameOrder) -> Vec<String> {
    parser
        .parse(&r.full_name, order)
        .map(|p| p.canonicals().iter().map(|s| s.to_string()).collect())
        .unwrap_or_default()
}

/// One pending item for every `Possible` decision.
pub fn build_queue(
    decisions: &[MatchDecision],
    sources: &[DatasetRecord],
    dests: &[DatasetRecord],
    parser: &NameParser,
    orders: (NameOrder, NameOrder),
) -> Vec<ReviewQueueItem> {
    let src: BTreeMap<&str, &DatasetRecord> = sources.iter().map(|r| (r.id.as_str(), r)).collect();
    let dst: BTreeMap<&str, &DatasetRecord> = dests.iter().map(|r| (r.id.as_str(), r)).collect();
    decisions
        .iter()
        .filter(|d| d.outcome == Outcome::Possible)
        .filter_map(|d| {
            let s = src.get(d.source_id.as_str())?;
            Some(ReviewQueueItem {
                id: d.source_id.clone(),
                source_name: s.full_name.text().to_string(),
                source_tokens: tokens(parser, s, orders.0),
                candidates: d
                    .candidates
                    .iter()
                    .map(|c| {
                        let r = dst.get(c.dest_id.as_str());
                        CandidateView {
                            dest_id: c.dest_id.clone(),
                            dest_name: r.map(|r| r.full_name.text().to_string()).unwrap_or_default(),
                            dest_tokens: r.map(|r| tokens(parser, r, orders.1)).unwrap_or_default(),
                            wat: c.wat,
                            at: c.at,
                            edit_distance: c.edit_distance,
                            relax_level: c.relax_level,
                        }
                    })
                    .collect(),
                status: ReviewStatus::Pending,
                accepted: Vec::new(),
                decided_by: None,
                decided_at: None,
            })
        })
        .collect()
}

/// Body of a decision request: `{"accept": [ids]}` or `{"reject": true}`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecisionRequest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accept: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reject: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decided_by: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decision {
    Accept(BTreeSet<String>),
    Reject,
}

impl DecisionRequest {
    pub fn accept(ids: &[&str]) -> Self {
        Self {
            accept: Some(ids.iter().map(|s| s.to_string()).collect()),
            ..Self::default()
        }
    }

    pub fn reject() -> Self {
        Self {
            reject: Some(true),
            ..Self::default()
        }
    }

    fn decision(&self) -> Result<Decision, ReviewError> {
        match (&self.accept, self.reject) {
            (Some(ids), None | Some(false)) if !ids.is_empty() => {
                let set: BTreeSet<String> = ids.iter().cloned().collect();
                if set.len() != ids.len() {
                    return Err(ReviewError::Malformed("accepted ids repeat".into()));
                }
                Ok(Decision::Accept(set))
            }
            (Some(_), None | Some(false)) => Err(ReviewError::Malformed("accept list is empty".into())),
            (None, Some(true)) => Ok(Decision::Reject),
            (None, Some(false)) | (None, None) => {
                Err(ReviewError::Malformed("expected \"accept\" or \"reject\": true".into()))
            }
            (Some(_), Some(true)) => Err(ReviewError::Malformed("both accept and reject given".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JournalEntry {
    pub item_id: String,
    pub request: DecisionRequest,
    pub decided_at: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Page {
    pub total: usize,
    pub offset: usize,
    pub limit: usize,
    pub items: Vec<ReviewQueueItem>,
}

/// Metrics over the sources whose expert label is known so far.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReviewMetrics {
    pub sources: usize,
    pub labelled: usize,
    pub unreviewed: usize,
    pub pending: usize,
    /// Pending items by machine multiplicity.
    pub pending_by_multiplicity: BTreeMap<usize, usize>,
    pub report: Option<MetricsReport>,
}

#[derive(Debug, Clone)]
pub struct ReviewState {
    items: BTreeMap<String, ReviewQueueItem>,
    machine: Vec<MatchDecision>,
    base_labels: ExpertLabels,
    journal: Option<PathBuf>,
}

impl ReviewState {
    pub fn new(items: Vec<ReviewQueueItem>, machine: Vec<MatchDecision>, base_labels: ExpertLabels) -> Self {
        Self {
            items: items.into_iter().map(|i| (i.id.clone(), i)).collect(),
            machine,
            base_labels,
            journal: None,
        }
    }

    /// Replays `path` if it exists and appends later decisions to it.
    pub fn with_journal(mut self, path: &Path) -> Result<Self, ReviewError> {
        match std::fs::read_to_string(path) {
            Ok(text) => {
                for (n, line) in text.lines().enumerate() {
                    if line.trim().is_empty() {
                        continue;
                    }
                    let journal_err = |reason: String| ReviewError::Journal { line: n + 1, reason };
                    let entry: JournalEntry =
                        serde_json::from_str(line).map_err(|e| journal_err(e.to_string()))?;
                    self.apply(&entry).map_err(|e| journal_err(e.to_string()))?;
                }
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
            Err(source) => {
                return Err(ReviewError::Io {
                    path: path.to_path_buf(),
                    source,
                })
            }
        }
        self.journal = Some(path.to_path_buf());
        Ok(self)
    }

    pub fn get(&self, id: &str) -> Option<&ReviewQueueItem> {
        self.items.get(id)
    }

    pub fn items(&self) -> impl Iterator<Item = &ReviewQueueItem> {
        self.items.values()
    }

    pub fn list(&self, status: Option<ReviewStatus>, offset: usize, limit: usize) -> Page {
        let matching: Vec<&ReviewQueueItem> = self
            .items
            .values()
            .filter(|i| status.is_none_or(|s| i.status == s))
            .collect();
        Page {
            total: matching.len(),
            offset,
            limit,
            items: matching.into_iter().skip(offset).take(limit).cloned().collect(),
        }
    }

    fn check(&self, entry: &JournalEntry) -> Result<Decision, ReviewError> {
        let item = self
            .items
            .get(&entry.item_id)
            .ok_or_else(|| ReviewError::NotFound(entry.item_id.clone()))?;
        let decision = entry.request.decision()?;
        if item.status != ReviewStatus::Pending {
            return Err(ReviewError::AlreadyDecided(entry.item_id.clone()));
        }
        if let Decision::Accept(ids) = &decision {
            if let Some(unknown) = ids.iter().find(|id| !item.candidates.iter().any(|c| &c.dest_id == *id)) {
                return Err(ReviewError::Malformed(format!("{unknown:?} is not a candidate")));
            }
        }
        Ok(decision)
    }

    fn apply(&mut self, entry: &JournalEntry) -> Result<(), ReviewError> {
        let decision = self.check(entry)?;
        let item = self.items.get_mut(&entry.item_id).expect("checked");
        match decision {
            Decision::Accept(ids) => {
                item.status = ReviewStatus::Accepted;
                item.accepted = ids.into_iter().collect();
            }
            Decision::Reject => item.status = ReviewStatus::Rejected,
        }
        item.decided_by = entry.request.decided_by.clone();
        item.decided_at = Some(entry.decided_at.clone());
        Ok(())
    }

    /// Validates, journals, then applies one decision.
    pub fn decide(&mut self, id: &str, request: DecisionRequest, now: String) -> Result<&ReviewQueueItem, ReviewError> {
        let entry = JournalEntry {
            item_id: id.to_string(),
            request,
            decided_at: now,
        };
        self.check(&entry)?;
        if let Some(path) = &self.journal {
            let io = |source| ReviewError::Io {
                path: path.clone(),
                source,
            };
            let mut line = serde_json::to_string(&entry).expect("journal entry serializes");
            line.push('\n');
            let mut file = OpenOptions::new().create(true).append(true).open(path).map_err(io)?;
            file.write_all(line.as_bytes()).map_err(io)?;
            file.sync_data().map_err(io)?;
        }
        self.apply(&entry)?;
        Ok(&self.items[id])
    }

    /// Expert labels known so far: the preloaded ones, overridden by
    /// review decisions.
    pub fn labels(&self) -> ExpertLabels {
        let mut labels = self.base_labels.clone();
        for item in self.items.values() {
            match item.status {
                ReviewStatus::Pending => {}
                ReviewStatus::Accepted => {
                    labels.insert(item.id.clone(), item.accepted.iter().cloned().collect());
                }
                ReviewStatus::Rejected => {
                    labels.insert(item.id.clone(), BTreeSet::new());
                }
            }
        }
        labels
    }

    pub fn metrics(&self) -> Result<ReviewMetrics, ReviewError> {
        let labels = self.labels();
        let labelled: Vec<MatchDecision> = self
            .machine
            .iter()
            .filter(|d| labels.contains_key(&d.source_id))
            .cloned()
            .collect();
        let used: ExpertLabels = labelled
            .iter()
            .map(|d| (d.source_id.clone(), labels[&d.source_id].clone()))
            .collect();
        let report = if labelled.is_empty() {
            None
        } else {
            Some(build_matrix(&labelled, &used)?.report()?)
        };
        let mut pending_by_multiplicity = BTreeMap::new();
        let mut pending = 0;
        for item in self.items.values().filter(|i| i.status == ReviewStatus::Pending) {
            pending += 1;
            *pending_by_multiplicity.entry(item.multiplicity()).or_insert(0) += 1;
        }
        Ok(ReviewMetrics {
            sources: self.machine.len(),
            labelled: labelled.len(),
            unreviewed: self.machine.len() - labelled.len(),
            pending,
            pending_by_multiplicity,
            report,
        })
    }
}

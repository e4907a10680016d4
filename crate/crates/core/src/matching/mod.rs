//! Candidate generation, comparison, scoring and classification.

pub mod blocking;
pub mod engine;
pub mod pattern;
pub mod relax;
pub mod similarity;

pub use blocking::{block, BlockIndex};
pub use engine::{classify, CandidatePair, MatchDecision, MatchEngine, MatchOptions, Outcome, Thresholds};
pub use pattern::{build_pattern, match_pattern, verify_reverse, PatternSlot, SearchPattern, TokenAlternatives};
pub use relax::{relax, RelaxOrder, RelaxedQuery};
pub use similarity::{atomic_token, levenshtein, sim, weighted_atomic_token};

#[derive(Debug, thiserror::Error)]
pub enum MatchError {
    #[error("blocking field {field:?} missing from {dataset} record {record:?}")]
    UnknownBlockField {
        field: String,
        dataset: String,
        record: String,
    },
    #[error("no token of {0:?} is in the dictionary")]
    NoResolvableTokens(String),
    #[error("no relaxation level left")]
    ExhaustedRelaxation,
    #[error("duplicate record id {0:?}")]
    DuplicateId(String),
}

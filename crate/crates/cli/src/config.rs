//! Pipeline configuration, read from TOML.
//!
//! ```toml
//! [source]
//! path = "scholars.csv"
//! id_column = "id"
//! name_column = "author"
//! block_columns = ["governorate"]
//! name_order = "last_name_first"
//!
//! [destination]
//! path = "staff.tsv"
//! id_column = "EMP_ID"
//! name_column = "FULL_NAME_AR"
//! block_columns = ["governorate"]
//!
//! [dictionary]
//! path = "names.tsv"            # loaded if present
//! training = "pairs.csv"        # otherwise built from these pairs
//! strategy = "combined"
//!
//! [matching]
//! block = ["governorate"]
//! match_threshold = 0.85
//! floor = 0.4
//! max_edit_distance = 2
//! relax_order = "paper_order"
//!
//! [output]
//! dir = "out"
//!
//! [review]
//! port = 8080
//! ```
//!
//! Relative paths are resolved against the directory holding the file.

use std::path::{Path, PathBuf};

use namelink_core::matching::{MatchOptions, RelaxOrder, Thresholds};
use namelink_core::normalize::Script;
use namelink_core::parse::NameOrder;
use serde::Deserialize;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Syntax(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetDescriptor {
    pub path: PathBuf,
    #[serde(default = "default_id")]
    pub id_column: String,
    #[serde(default = "default_name")]
    pub name_column: String,
    /// Columns copied into the blocking fields under their own names.
    #[serde(default)]
    pub block_columns: Vec<String>,
    /// Rows whose name is in another script are skipped.
    #[serde(default)]
    pub script: Option<Script>,
    #[serde(default)]
    pub name_order: NameOrder,
    /// Field delimiter; defaults to tab for `.tsv` files, comma otherwise.
    #[serde(default)]
    pub delimiter: Option<char>,
}

fn default_id() -> String {
    "id".into()
}

fn default_name() -> String {
    "name".into()
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DictionaryConfig {
    pub path: Option<PathBuf>,
    /// `arabic,latin` CSV of known name pairs.
    pub training: Option<PathBuf>,
    #[serde(default = "default_strategy")]
    pub strategy: String,
    /// Expert edit list applied on top of a built dictionary.
    pub edits: Option<PathBuf>,
}

fn default_strategy() -> String {
    "combined".into()
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MatchingConfig {
    pub block: Vec<String>,
    pub match_threshold: f64,
    pub floor: f64,
    pub max_edit_distance: usize,
    pub relax_order: RelaxOrder,
}

impl Default for MatchingConfig {
    fn default() -> Self {
        let t = Thresholds::default();
        Self {
            block: Vec::new(),
            match_threshold: t.match_threshold,
            floor: t.floor,
            max_edit_distance: t.max_edit_distance,
            relax_order: RelaxOrder::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReviewConfig {
    pub port: u16,
    /// Decision journal; defaults to `journal.jsonl` in the output directory.
    pub journal: Option<PathBuf>,
    /// `source_id,dest_ids` CSV of labels known before review.
    pub expert_labels: Option<PathBuf>,
}

impl Default for ReviewConfig {
    fn default() -> Self {
        Self {
            port: 8080,
            journal: None,
            expert_labels: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub source: DatasetDescriptor,
    pub destination: DatasetDescriptor,
    pub dictionary: DictionaryConfig,
    #[serde(default)]
    pub matching: MatchingConfig,
    pub output: OutputConfig,
    #[serde(default)]
    pub review: ReviewConfig,
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

impl PipelineConfig {
    pub fn parse(text: &str, base: &Path) -> Result<Self, ConfigError> {
        let mut config: PipelineConfig = toml::from_str(text)?;
        resolve(base, &mut config.source.path);
        resolve(base, &mut config.destination.path);
        resolve(base, &mut config.output.dir);
        for p in [
            &mut config.dictionary.path,
            &mut config.dictionary.training,
            &mut config.dictionary.edits,
            &mut config.review.journal,
            &mut config.review.expert_labels,
        ]
        .into_iter()
        .flatten()
        {
            resolve(base, p);
        }
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let m = &self.matching;
        for (name, v) in [("match_threshold", m.match_threshold), ("floor", m.floor)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(ConfigError::Invalid(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        if m.floor > m.match_threshold {
            return Err(ConfigError::Invalid("floor exceeds match_threshold".into()));
        }
        for field in &m.block {
            for (label, d) in [("source", &self.source), ("destination", &self.destination)] {
                if !d.block_columns.contains(field) {
                    return Err(ConfigError::Invalid(format!(
                        "blocking field {field:?} is not among the {label} block_columns"
                    )));
                }
            }
        }
        if self.dictionary.path.is_none() && self.dictionary.training.is_none() {
            return Err(ConfigError::Invalid(
                "dictionary needs a path or a training file".into(),
            ));
        }
        Ok(())
    }

    pub fn match_options(&self) -> MatchOptions {
        MatchOptions {
            thresholds: Thresholds {
                match_threshold: self.matching.match_threshold,
                floor: self.matching.floor,
                max_edit_distance: self.matching.max_edit_distance,
            },
            relax_order: self.matching.relax_order,
            block_fields: self.matching.block.clone(),
            source_order: self.source.name_order,
            dest_order: self.destination.name_order,
        }
    }

    pub fn journal_path(&self) -> PathBuf {
        self.review
            .journal
            .clone()
            .unwrap_or_else(|| self.output.dir.join("journal.jsonl"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[source]
path = "src.csv"
block_columns = ["governorate"]
[destination]
path = "/data/dst.tsv"
block_columns = ["governorate"]
[dictionary]
training = "pairs.csv"
[matching]
block = ["governorate"]
relax_order = "last_name_first"
[output]
dir = "out"
"#;

    #[test]
    fn parses_and_resolves_paths() {
        let c = PipelineConfig::parse(MINIMAL, Path::new("/work")).unwrap();
        assert_eq!(c.source.path, Path::new("/work/src.csv"));
        assert_eq!(c.destination.path, Path::new("/data/dst.tsv"));
        assert_eq!(c.journal_path(), Path::new("/work/out/journal.jsonl"));
        assert_eq!(c.matching.relax_order, RelaxOrder::LastNameFirst);
        assert_eq!(c.match_options().thresholds, Thresholds::default());
        assert_eq!(c.review.port, 8080);
    }

    #[test]
    fn rejects_bad_values() {
        let bad = MINIMAL.replace("relax_order = \"last_name_first\"", "floor = 1.5");
        assert!(matches!(PipelineConfig::parse(&bad, Path::new(".")), Err(ConfigError::Invalid(_))));
        let bad = MINIMAL.replace("block = [\"governorate\"]", "block = [\"university\"]");
        assert!(PipelineConfig::parse(&bad, Path::new(".")).is_err());
        let bad = MINIMAL.replace("[output]", "[output]\ncolour = 1");
        assert!(matches!(PipelineConfig::parse(&bad, Path::new(".")), Err(ConfigError::Syntax(_))));
    }
}

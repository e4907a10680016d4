//! Tabular input: CSV or TSV with a header row, UTF-8.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use log::warn;
use namelink_core::normalize::RawName;
use namelink_core::record::DatasetRecord;

use crate::config::DatasetDescriptor;

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path} is not valid UTF-8 (first bad byte at offset {offset})")]
    Encoding { path: PathBuf, offset: usize },
    #[error("{path} has no column {column:?}")]
    MissingColumn { path: PathBuf, column: String },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Ingested {
    pub records: Vec<DatasetRecord>,
    /// One line-numbered message per skipped row.
    pub warnings: Vec<String>,
}

pub fn read_utf8(path: &Path) -> Result<String, IngestError> {
    let bytes = std::fs::read(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    String::from_utf8(bytes).map_err(|e| IngestError::Encoding {
        path: path.to_path_buf(),
        offset: e.utf8_error().valid_up_to(),
    })
}

fn delimiter_for(path: &Path, explicit: Option<char>) -> u8 {
    match explicit {
        Some(c) => c as u8,
        None if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("tsv")) => b'\t',
        None => b',',
    }
}

fn reader(text: &str, delimiter: u8) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .flexible(true)
        .from_reader(text.as_bytes())
}

pub fn ingest(d: &DatasetDescriptor) -> Result<Ingested, IngestError> {
    let text = read_utf8(&d.path)?;
    ingest_str(&text, d)
}

/// Parses already-loaded text as described by `d`. Rows with a missing id
/// or name, a duplicate id, the wrong field count or a name in the wrong
/// script are skipped with a warning.
pub fn ingest_str(text: &str, d: &DatasetDescriptor) -> Result<Ingested, IngestError> {
    let csv_err = |source| IngestError::Csv {
        path: d.path.clone(),
        source,
    };
    let mut rdr = reader(text, delimiter_for(&d.path, d.delimiter));
    let headers = rdr.headers().map_err(csv_err)?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| IngestError::MissingColumn {
                path: d.path.clone(),
                column: name.to_string(),
            })
    };
    let id_col = column(&d.id_column)?;
    let name_col = column(&d.name_column)?;
    let block_cols = d
        .block_columns
        .iter()
        .map(|c| column(c).map(|i| (c.clone(), i)))
        .collect::<Result<Vec<_>, _>>()?;

    let mut out = Ingested::default();
    let mut seen = HashSet::new();
    for row in rdr.records() {
        let row = row.map_err(csv_err)?;
        let line = row.position().map_or(0, |p| p.line());
        let mut skip = |reason: String| {
            let msg = format!("{}:{line}: {reason}", d.path.display());
            warn!("{msg}");
            out.warnings.push(msg);
        };
        if row.len() != headers.len() {
            skip(format!("expected {} fields, found {}", headers.len(), row.len()));
            continue;
        }
        let id = row[id_col].trim();
        let name = row[name_col].trim();
        if id.is_empty() {
            skip("missing id".into());
            continue;
        }
        if name.is_empty() {
            skip(format!("record {id:?} has no name"));
            continue;
        }
        if !seen.insert(id.to_string()) {
            skip(format!("duplicate id {id:?}"));
            continue;
        }
        let raw = RawName::new(name);
        if let Some(expected) = d.script {
            if raw.script() != expected {
                skip(format!("record {id:?} is not {expected:?} script"));
                continue;
            }
        }
        let mut record = DatasetRecord {
            id: id.to_string(),
            full_name: raw,
            block_fields: Default::default(),
            extra: Default::default(),
        };
        for (field, i) in &block_cols {
            record.block_fields.insert(field.clone(), row[*i].trim().to_string());
        }
        for (i, h) in headers.iter().enumerate() {
            if i != id_col && i != name_col && !block_cols.iter().any(|(_, b)| *b == i) {
                record.extra.insert(h.trim().to_string(), row[i].to_string());
            }
        }
        out.records.push(record);
    }
    Ok(out)
}

/// `arabic,latin` name pairs with a header row.
pub fn read_pairs(path: &Path) -> Result<Vec<(String, String)>, IngestError> {
    let text = read_utf8(path)?;
    let csv_err = |source| IngestError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut rdr = reader(&text, delimiter_for(path, None));
    let mut pairs = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(csv_err)?;
        match (row.get(0), row.get(1)) {
            (Some(a), Some(l)) if !a.trim().is_empty() && !l.trim().is_empty() => {
                pairs.push((a.trim().to_string(), l.trim().to_string()))
            }
            _ => warn!(
                "{}:{}: skipping incomplete name pair",
                path.display(),
                row.position().map_or(0, |p| p.line())
            ),
        }
    }
    Ok(pairs)
}

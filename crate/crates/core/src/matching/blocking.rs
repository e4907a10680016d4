use std::collections::HashMap;

use super::MatchError;
use crate::record::DatasetRecord;

/// Destination records grouped by their values on the blocking fields.
/// Pairs that disagree on any field are never compared.
#[derive(Debug, Clone)]
pub struct BlockIndex {
    fields: Vec<String>,
    groups: HashMap<Vec<String>, Vec<usize>>,
    all: Vec<usize>,
}

fn key(record: &DatasetRecord, fields: &[String], dataset: &str) -> Result<Vec<String>, MatchError> {
    fields
        .iter()
        .map(|f| {
            record
                .block_fields
                .get(f)
                .cloned()
                .ok_or_else(|| MatchError::UnknownBlockField {
                    field: f.clone(),
                    dataset: dataset.to_string(),
                    record: record.id.clone(),
                })
        })
        .collect()
}

impl BlockIndex {
    pub fn build(dst: &[DatasetRecord], fields: &[String]) -> Result<Self, MatchError> {
        let mut groups: HashMap<Vec<String>, Vec<usize>> = HashMap::new();
        for (i, r) in dst.iter().enumerate() {
            groups.entry(key(r, fields, "destination")?).or_default().push(i);
        }
        Ok(Self {
            fields: fields.to_vec(),
            groups,
            all: (0..dst.len()).collect(),
        })
    }

    /// Indices of destination records in the same block as `src`.
    pub fn candidates(&self, src: &DatasetRecord) -> Result<&[usize], MatchError> {
        if self.fields.is_empty() {
            return Ok(&self.all);
        }
        let k = key(src, &self.fields, "source")?;
        Ok(self.groups.get(&k).map(Vec::as_slice).unwrap_or(&[]))
    }
}

/// All (source id, destination id) pairs that agree on every blocking field.
/// An empty field list yields the full cross join.
pub fn block(
    src: &[DatasetRecord],
    dst: &[DatasetRecord],
    fields: &[String],
) -> Result<Vec<(String, String)>, MatchError> {
    let index = BlockIndex::build(dst, fields)?;
    let mut pairs = Vec::new();
    for s in src {
        for &d in index.candidates(s)? {
            pairs.push((s.id.clone(), dst[d].id.clone()));
        }
    }
    Ok(pairs)
}

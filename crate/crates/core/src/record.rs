use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::normalize::RawName;
use crate::parse::ParsedName;

/// One row of an input dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub id: String,
    pub full_name: RawName,
    /// Fields usable as blocking conditions, e.g. governorate.
    pub block_fields: BTreeMap<String, String>,
    pub extra: BTreeMap<String, String>,
}

impl DatasetRecord {
    pub fn new(id: impl Into<String>, name: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            full_name: RawName::new(name),
            block_fields: BTreeMap::new(),
            extra: BTreeMap::new(),
        }
    }

    pub fn with_field(mut self, field: &str, value: &str) -> Self {
        self.block_fields.insert(field.to_string(), value.to_string());
        self
    }
}

/// A record together with its parsed name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreparedRecord {
    pub record: DatasetRecord,
    pub parsed: ParsedName,
}

impl PreparedRecord {
    pub fn id(&self) -> &str {
        &self.record.id
    }
}

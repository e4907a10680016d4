//! Bidirectional Arabic/Latin name-token dictionary.
//!
//! Entries come from one of four strategies: positional alignment of
//! paired full names, alignment filtered by a plain Soundex join, alignment
//! filtered by the combined Soundex join, and expert edits on top of any of
//! those.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::normalize::RawName;
use crate::parse::{NameOrder, NameParser, NameToken};
use crate::phonetic::{
    combined_soundex, combined_soundex_variants, soundex, soundex_variants, CodeTable,
    CombinedSoundexCode, PhoneticError,
};

const TSV_HEADER: &str = "# arabic\tlatin\tarabic_code\tlatin_code\tprovenance\tverified";

#[derive(Debug, Error)]
pub enum DictionaryError {
    #[error("dictionary line {line}: {message}")]
    BadLine { line: usize, message: String },
    #[error("unknown strategy {0:?}")]
    UnknownStrategy(String),
    #[error(transparent)]
    Phonetic(#[from] PhoneticError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    SourceExtracted,
    SoundexJoin,
    CombinedSoundexJoin,
    ExpertVerified,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::SourceExtracted => "source",
            Provenance::SoundexJoin => "soundex",
            Provenance::CombinedSoundexJoin => "combined",
            Provenance::ExpertVerified => "expert",
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Provenance {
    type Err = DictionaryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "source" => Provenance::SourceExtracted,
            "soundex" => Provenance::SoundexJoin,
            "combined" => Provenance::CombinedSoundexJoin,
            "expert" => Provenance::ExpertVerified,
            other => return Err(DictionaryError::UnknownStrategy(other.to_string())),
        })
    }
}

/// Dictionary building strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Source,
    Soundex,
    Combined,
    Verified,
}

impl FromStr for Strategy {
    type Err = DictionaryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "source" => Strategy::Source,
            "soundex" => Strategy::Soundex,
            "combined" => Strategy::Combined,
            "verified" => Strategy::Verified,
            other => return Err(DictionaryError::UnknownStrategy(other.to_string())),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DictionaryEntry {
    pub arabic: String,
    pub latin: String,
    pub arabic_code: CombinedSoundexCode,
    pub latin_code: CombinedSoundexCode,
    pub provenance: Provenance,
    pub verified: bool,
}

#[derive(Debug, Clone)]
pub struct Dictionary {
    entries: BTreeMap<(String, String), DictionaryEntry>,
    by_arabic: BTreeMap<String, BTreeSet<String>>,
    by_latin: BTreeMap<String, BTreeSet<String>>,
    codes: Arc<CodeTable>,
}

impl PartialEq for Dictionary {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

impl Dictionary {
    pub fn new(codes: Arc<CodeTable>) -> Self {
        Self {
            entries: BTreeMap::new(),
            by_arabic: BTreeMap::new(),
            by_latin: BTreeMap::new(),
            codes,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = &DictionaryEntry> {
        self.entries.values()
    }

    pub fn get(&self, arabic: &str, latin: &str) -> Option<&DictionaryEntry> {
        self.entries.get(&(arabic.to_string(), latin.to_string()))
    }

    pub fn contains(&self, arabic: &str, latin: &str) -> bool {
        self.get(arabic, latin).is_some()
    }

    pub fn code_table(&self) -> &CodeTable {
        &self.codes
    }

    pub fn latin_keys(&self) -> impl Iterator<Item = &str> {
        self.by_latin.keys().map(String::as_str)
    }

    /// Inserts unless the pair is already present. Returns whether it was new.
    pub fn insert(&mut self, entry: DictionaryEntry) -> bool {
        let key = (entry.arabic.clone(), entry.latin.clone());
        if self.entries.contains_key(&key) {
            return false;
        }
        self.by_arabic
            .entry(entry.arabic.clone())
            .or_default()
            .insert(entry.latin.clone());
        self.by_latin
            .entry(entry.latin.clone())
            .or_default()
            .insert(entry.arabic.clone());
        self.entries.insert(key, entry);
        true
    }

    pub fn remove(&mut self, arabic: &str, latin: &str) -> Option<DictionaryEntry> {
        let entry = self.entries.remove(&(arabic.to_string(), latin.to_string()))?;
        for (index, key, value) in [
            (&mut self.by_arabic, arabic, latin),
            (&mut self.by_latin, latin, arabic),
        ] {
            if let Some(set) = index.get_mut(key) {
                set.remove(value);
                if set.is_empty() {
                    index.remove(key);
                }
            }
        }
        Some(entry)
    }

    /// Arabic counterparts of a Latin token. A single letter returns every
    /// known Arabic token whose first letter can be romanized as it.
    pub fn lookup_latin(&self, latin: &str) -> BTreeSet<String> {
        let mut chars = latin.chars();
        if let (Some(c), None) = (chars.next(), chars.next()) {
            if c.is_ascii_alphabetic() {
                let letters = self.codes.arabic_letters_for(c);
                return self
                    .by_arabic
                    .keys()
                    .filter(|a| a.chars().next().is_some_and(|f| letters.contains(&f)))
                    .cloned()
                    .collect();
            }
        }
        self.by_latin.get(latin).cloned().unwrap_or_default()
    }

    pub fn lookup_arabic(&self, arabic: &str) -> BTreeSet<String> {
        self.by_arabic.get(arabic).cloned().unwrap_or_default()
    }

    /// Both indexes are exact projections of the entry set.
    pub fn is_consistent(&self) -> bool {
        let mut by_arabic: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        let mut by_latin: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for (a, l) in self.entries.keys() {
            by_arabic.entry(a.clone()).or_default().insert(l.clone());
            by_latin.entry(l.clone()).or_default().insert(a.clone());
        }
        by_arabic == self.by_arabic && by_latin == self.by_latin
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from(TSV_HEADER);
        out.push('\n');
        for e in self.entries.values() {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\n",
                e.arabic, e.latin, e.arabic_code, e.latin_code, e.provenance, e.verified
            ));
        }
        out
    }

    pub fn from_tsv(text: &str, codes: Arc<CodeTable>) -> Result<Self, DictionaryError> {
        let mut dict = Dictionary::new(codes);
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |message: String| DictionaryError::BadLine {
                line: idx + 1,
                message,
            };
            let fields: Vec<&str> = line.split('\t').collect();
            let [arabic, latin, ac, lc, prov, verified] = fields[..] else {
                return Err(bad(format!("expected 6 fields, found {}", fields.len())));
            };
            let verified = match verified {
                "true" => true,
                "false" => false,
                other => return Err(bad(format!("verified must be true/false, got {other:?}"))),
            };
            let entry = DictionaryEntry {
                arabic: arabic.to_string(),
                latin: latin.to_string(),
                arabic_code: ac.parse().map_err(|e: PhoneticError| bad(e.to_string()))?,
                latin_code: lc.parse().map_err(|e: PhoneticError| bad(e.to_string()))?,
                provenance: prov.parse().map_err(|e: DictionaryError| bad(e.to_string()))?,
                verified,
            };
            if !dict.insert(entry) {
                return Err(bad(format!("duplicate pair ({arabic}, {latin})")));
            }
        }
        Ok(dict)
    }

    pub fn load(path: &Path, codes: Arc<CodeTable>) -> Result<Self, DictionaryError> {
        Self::from_tsv(&std::fs::read_to_string(path)?, codes)
    }

    pub fn save(&self, path: &Path) -> Result<(), DictionaryError> {
        std::fs::write(path, self.to_tsv())?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EditOp {
    Add,
    Remove,
    Verify,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DictionaryEdit {
    pub op: EditOp,
    pub arabic: String,
    pub latin: String,
}

impl DictionaryEdit {
    /// Parses `op<TAB>arabic<TAB>latin` lines.
    pub fn parse_list(text: &str) -> Result<Vec<DictionaryEdit>, DictionaryError> {
        let mut edits = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |message: String| DictionaryError::BadLine {
                line: idx + 1,
                message,
            };
            let fields: Vec<&str> = line.split('\t').collect();
            let [op, arabic, latin] = fields[..] else {
                return Err(bad("expected op<TAB>arabic<TAB>latin".into()));
            };
            let op = match op {
                "add" => EditOp::Add,
                "remove" => EditOp::Remove,
                "verify" => EditOp::Verify,
                other => return Err(bad(format!("unknown edit {other:?}"))),
            };
            edits.push(DictionaryEdit {
                op,
                arabic: arabic.to_string(),
                latin: latin.to_string(),
            });
        }
        Ok(edits)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EditWarning {
    RemoveMissingEntry { arabic: String, latin: String },
    VerifyMissingEntry { arabic: String, latin: String },
    Unparseable { arabic: String, latin: String },
}

#[derive(Debug, Clone)]
pub struct BuildReport {
    pub dictionary: Dictionary,
    pub pairs_used: usize,
    pub pairs_skipped: usize,
}

/// Builds dictionaries from paired full names.
#[derive(Debug, Clone)]
pub struct DictionaryBuilder<'a> {
    parser: &'a NameParser,
    codes: Arc<CodeTable>,
}

type Aligned = Vec<(NameToken, NameToken)>;

impl<'a> DictionaryBuilder<'a> {
    pub fn new(parser: &'a NameParser, codes: Arc<CodeTable>) -> Self {
        Self { parser, codes }
    }

    /// Token pairs of one (Arabic, Latin) full-name pair, or `None` when the
    /// names do not parse or their token counts differ after merging.
    fn align(&self, arabic: &str, latin: &str) -> Option<Aligned> {
        let ar = self
            .parser
            .parse(&RawName::new(arabic), NameOrder::FirstNameFirst)
            .ok()?;
        let la = self
            .parser
            .parse(&RawName::new(latin), NameOrder::FirstNameFirst)
            .ok()?;
        if ar.script() != crate::normalize::Script::Arabic
            || la.script() != crate::normalize::Script::Latin
        {
            return None;
        }
        if ar.len() != la.len() {
            log::warn!("skipping pair ({arabic:?}, {latin:?}): {} vs {} tokens", ar.len(), la.len());
            return None;
        }
        Some(ar.tokens.into_iter().zip(la.tokens).collect())
    }

    fn entry(
        &self,
        ar: &NameToken,
        la: &NameToken,
        provenance: Provenance,
    ) -> Result<DictionaryEntry, PhoneticError> {
        let (arabic_code, latin_code) = match provenance {
            Provenance::SoundexJoin => (
                CombinedSoundexCode::simple(soundex(&ar.canonical, &self.codes)?),
                CombinedSoundexCode::simple(soundex(&la.canonical, &self.codes)?),
            ),
            _ => (
                combined_soundex(ar, &self.parser.table, &self.codes)?,
                combined_soundex(la, &self.parser.table, &self.codes)?,
            ),
        };
        Ok(DictionaryEntry {
            arabic: ar.canonical.clone(),
            latin: la.canonical.clone(),
            arabic_code,
            latin_code,
            provenance,
            verified: provenance == Provenance::ExpertVerified,
        })
    }

    fn join_accepts(&self, ar: &NameToken, la: &NameToken, provenance: Provenance) -> bool {
        let accepted = match provenance {
            Provenance::SourceExtracted | Provenance::ExpertVerified => Ok(true),
            Provenance::SoundexJoin => soundex(&la.canonical, &self.codes).and_then(|code| {
                Ok(soundex_variants(&ar.canonical, &self.codes)?.contains(&code))
            }),
            Provenance::CombinedSoundexJoin => {
                combined_soundex(la, &self.parser.table, &self.codes).and_then(|code| {
                    Ok(combined_soundex_variants(ar, &self.parser.table, &self.codes)?
                        .contains(&code))
                })
            }
        };
        accepted.unwrap_or(false)
    }

    fn build(&self, pairs: &[(String, String)], provenance: Provenance) -> BuildReport {
        let mut dictionary = Dictionary::new(self.codes.clone());
        let mut used = 0;
        let mut skipped = 0;
        for (arabic, latin) in pairs {
            let Some(aligned) = self.align(arabic, latin) else {
                skipped += 1;
                continue;
            };
            used += 1;
            for (ar, la) in &aligned {
                // initials are resolved through the romanization table instead
                if la.initial().is_some() || !self.join_accepts(ar, la, provenance) {
                    continue;
                }
                match self.entry(ar, la, provenance) {
                    Ok(e) => {
                        dictionary.insert(e);
                    }
                    Err(err) => log::warn!("cannot code ({}, {}): {err}", ar.canonical, la.canonical),
                }
            }
        }
        if skipped > 0 {
            log::warn!("{skipped} of {} name pairs skipped", pairs.len());
        }
        BuildReport {
            dictionary,
            pairs_used: used,
            pairs_skipped: skipped,
        }
    }

    pub fn build_source_extracted(&self, pairs: &[(String, String)]) -> BuildReport {
        self.build(pairs, Provenance::SourceExtracted)
    }

    pub fn build_soundex_join(&self, pairs: &[(String, String)]) -> BuildReport {
        self.build(pairs, Provenance::SoundexJoin)
    }

    pub fn build_combined_soundex_join(&self, pairs: &[(String, String)]) -> BuildReport {
        self.build(pairs, Provenance::CombinedSoundexJoin)
    }

    /// `Verified` builds the combined join and then applies `edits`.
    pub fn build_with(
        &self,
        strategy: Strategy,
        pairs: &[(String, String)],
        edits: &[DictionaryEdit],
    ) -> (BuildReport, Vec<EditWarning>) {
        let mut report = match strategy {
            Strategy::Source => self.build_source_extracted(pairs),
            Strategy::Soundex => self.build_soundex_join(pairs),
            Strategy::Combined | Strategy::Verified => self.build_combined_soundex_join(pairs),
        };
        let mut warnings = Vec::new();
        if strategy == Strategy::Verified || !edits.is_empty() {
            let (dict, w) = self.apply_expert_edits(&report.dictionary, edits);
            report.dictionary = dict;
            warnings = w;
        }
        (report, warnings)
    }

    fn canonical_token(&self, text: &str) -> Option<NameToken> {
        let parsed = self
            .parser
            .parse(&RawName::new(text), NameOrder::FirstNameFirst)
            .ok()?;
        if parsed.len() == 1 {
            return parsed.tokens.into_iter().next();
        }
        let joined = parsed.canonical_text();
        Some(NameToken {
            surface: joined.clone(),
            canonical: joined,
            is_compound: true,
        })
    }

    /// Applies expert edits in order to a copy of `dict`.
    pub fn apply_expert_edits(
        &self,
        dict: &Dictionary,
        edits: &[DictionaryEdit],
    ) -> (Dictionary, Vec<EditWarning>) {
        let mut out = dict.clone();
        let mut warnings = Vec::new();
        for edit in edits {
            let (Some(ar), Some(la)) = (
                self.canonical_token(&edit.arabic),
                self.canonical_token(&edit.latin),
            ) else {
                warnings.push(EditWarning::Unparseable {
                    arabic: edit.arabic.clone(),
                    latin: edit.latin.clone(),
                });
                continue;
            };
            let (a, l) = (ar.canonical.clone(), la.canonical.clone());
            match edit.op {
                EditOp::Add => {
                    out.remove(&a, &l);
                    match self.entry(&ar, &la, Provenance::ExpertVerified) {
                        Ok(e) => {
                            out.insert(e);
                        }
                        Err(_) => warnings.push(EditWarning::Unparseable {
                            arabic: a,
                            latin: l,
                        }),
                    }
                }
                EditOp::Remove => {
                    if out.remove(&a, &l).is_none() {
                        log::warn!("expert removal of missing entry ({a}, {l})");
                        warnings.push(EditWarning::RemoveMissingEntry {
                            arabic: a,
                            latin: l,
                        });
                    }
                }
                EditOp::Verify => match out.entries.get_mut(&(a.clone(), l.clone())) {
                    Some(e) => {
                        e.verified = true;
                        e.provenance = Provenance::ExpertVerified;
                    }
                    None => warnings.push(EditWarning::VerifyMissingEntry {
                        arabic: a,
                        latin: l,
                    }),
                },
            }
        }
        (out, warnings)
    }
}

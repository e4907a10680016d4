//! Splitting, reordering and compound-name merging.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::normalize::{self, ArabicFolding, NormalizeError, NormalizedName, RawName, Script};

const DEFAULT_PREFIXES: &str = include_str!("../data/prefixes.tsv");

/// Canonical forms of bare definite articles.
const ARTICLE_CANONICALS: &[&str] = &["el", "\u{0627}\u{0644}"];

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("name has no tokens")]
    EmptyName,
    #[error(transparent)]
    Normalize(#[from] NormalizeError),
    #[error("prefix table line {line}: {message}")]
    BadPrefixLine { line: usize, message: String },
    #[error("reading prefix table: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseWarning {
    /// The name ends in a prefix with nothing left to attach it to.
    DanglingPrefix(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NameOrder {
    #[default]
    FirstNameFirst,
    LastNameFirst,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NameToken {
    pub surface: String,
    pub canonical: String,
    pub is_compound: bool,
}

impl NameToken {
    pub fn simple(text: &str) -> Self {
        Self {
            surface: text.to_string(),
            canonical: text.to_string(),
            is_compound: text.contains(' '),
        }
    }

    fn compound(surface: String, canonical: String) -> Self {
        let is_compound = surface.contains(' ');
        Self {
            surface,
            canonical,
            is_compound,
        }
    }

    /// A one-letter Latin token such as the `a` of "A. M. Aly".
    pub fn initial(&self) -> Option<char> {
        let mut chars = self.surface.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) if c.is_ascii_lowercase() => Some(c),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedName {
    pub tokens: Vec<NameToken>,
    pub original: NormalizedName,
}

impl ParsedName {
    pub fn script(&self) -> Script {
        self.original.script()
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn canonicals(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.canonical.as_str()).collect()
    }

    pub fn surfaces(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.surface.as_str()).collect()
    }

    pub fn canonical_text(&self) -> String {
        self.canonicals().join(" ")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AffixKind {
    Prefix,
    Postfix,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Affix {
    words: Vec<String>,
    canonical: String,
}

/// Known name prefixes ("Abd El", "Abou") and postfixes ("El Din") with
/// the canonical spelling each variant unifies to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrefixTable {
    prefixes: Vec<Affix>,
    postfixes: Vec<Affix>,
    canonical_map: BTreeMap<String, String>,
}

impl Default for PrefixTable {
    fn default() -> Self {
        Self::parse(DEFAULT_PREFIXES).expect("bundled prefix table is valid")
    }
}

impl PrefixTable {
    /// Parses `variant<TAB>canonical<TAB>{prefix|postfix}` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut table = PrefixTable {
            prefixes: Vec::new(),
            postfixes: Vec::new(),
            canonical_map: BTreeMap::new(),
        };
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let bad = |message: &str| ParseError::BadPrefixLine {
                line: idx + 1,
                message: message.to_string(),
            };
            if fields.len() != 3 {
                return Err(bad("expected three tab-separated fields"));
            }
            let kind = match fields[2].trim() {
                "prefix" => AffixKind::Prefix,
                "postfix" => AffixKind::Postfix,
                other => return Err(bad(&format!("unknown kind {other:?}"))),
            };
            let variant = clean_affix(fields[0]);
            let canonical = clean_affix(fields[1]);
            if variant.is_empty() || canonical.is_empty() {
                return Err(bad("empty variant or canonical"));
            }
            table.insert(&variant, &canonical, kind);
        }
        Ok(table)
    }

    pub fn load(path: &Path) -> Result<Self, ParseError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn insert(&mut self, variant: &str, canonical: &str, kind: AffixKind) {
        let affix = Affix {
            words: variant.split(' ').map(str::to_string).collect(),
            canonical: canonical.to_string(),
        };
        let list = match kind {
            AffixKind::Prefix => &mut self.prefixes,
            AffixKind::Postfix => &mut self.postfixes,
        };
        list.retain(|a| a.words != affix.words);
        list.push(affix);
        // longest first, so the first hit is the greedy-longest match
        list.sort_by(|a, b| b.words.len().cmp(&a.words.len()).then(a.words.cmp(&b.words)));
        self.canonical_map.insert(variant.to_string(), canonical.to_string());
    }

    pub fn prefixes(&self) -> impl Iterator<Item = &str> + '_ {
        self.prefixes.iter().map(|a| a.canonical.as_str())
    }

    pub fn prefix_variants(&self) -> Vec<String> {
        self.prefixes.iter().map(|a| a.words.join(" ")).collect()
    }

    pub fn postfix_variants(&self) -> Vec<String> {
        self.postfixes.iter().map(|a| a.words.join(" ")).collect()
    }

    pub fn canonical(&self, variant: &str) -> Option<&str> {
        self.canonical_map.get(variant).map(String::as_str)
    }

    pub fn is_article(&self, canonical: &str) -> bool {
        ARTICLE_CANONICALS.contains(&canonical)
    }

    fn match_at<'a>(list: &'a [Affix], words: &[&str]) -> Option<&'a Affix> {
        list.iter().find(|a| {
            a.words.len() <= words.len() && a.words.iter().zip(words).all(|(w, t)| w == t)
        })
    }

    fn prefix_at(&self, words: &[&str], merge_articles: bool) -> Option<&Affix> {
        Self::match_at(&self.prefixes, words)
            .filter(|a| merge_articles || !self.is_article(&a.canonical))
    }

    fn postfix_at(&self, words: &[&str]) -> Option<&Affix> {
        Self::match_at(&self.postfixes, words)
    }

    /// Splits a canonical compound into (prefix group, head) or
    /// (head, postfix group). `None` for simple names.
    pub fn split_compound<'a>(&self, canonical: &'a str) -> Option<CompoundParts<'a>> {
        let words: Vec<&str> = canonical.split(' ').collect();
        if words.len() < 2 {
            return None;
        }
        // Longest prefix chain that leaves at least one head word.
        let mut used = 0;
        while used < words.len() - 1 {
            match Self::match_at(&self.prefixes, &words[used..words.len() - 1]) {
                Some(a) => used += a.words.len(),
                None => break,
            }
        }
        if used > 0 {
            let cut = byte_offset(canonical, used);
            return Some(CompoundParts::Prefixed {
                prefix: &canonical[..cut - 1],
                head: &canonical[cut..],
            });
        }
        for start in 1..words.len() {
            if let Some(a) = Self::match_at(&self.postfixes, &words[start..]) {
                if start + a.words.len() == words.len() {
                    let cut = byte_offset(canonical, start);
                    return Some(CompoundParts::Postfixed {
                        head: &canonical[..cut - 1],
                        postfix: &canonical[cut..],
                    });
                }
            }
        }
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompoundParts<'a> {
    Prefixed { prefix: &'a str, head: &'a str },
    Postfixed { head: &'a str, postfix: &'a str },
}

/// Byte offset of the `n`th space-separated word.
fn byte_offset(s: &str, n: usize) -> usize {
    s.split(' ').take(n).map(|w| w.len() + 1).sum()
}

fn clean_affix(s: &str) -> String {
    s.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn split(name: &NormalizedName) -> Result<ParsedName, ParseError> {
    let tokens: Vec<NameToken> = name.text().split_whitespace().map(NameToken::simple).collect();
    if tokens.is_empty() {
        return Err(ParseError::EmptyName);
    }
    Ok(ParsedName {
        tokens,
        original: name.clone(),
    })
}

/// Moves a leading surname (with any article/prefix it carries) to the end.
pub fn reorder(parsed: &ParsedName, order: NameOrder, table: &PrefixTable) -> ParsedName {
    match order {
        NameOrder::FirstNameFirst => parsed.clone(),
        NameOrder::LastNameFirst => {
            let words: Vec<&str> = parsed.surfaces();
            if words.len() < 2 {
                return parsed.clone();
            }
            let mut end = 0;
            while end < words.len() - 1 {
                match table.prefix_at(&words[end..words.len() - 1], true) {
                    Some(a) => end += a.words.len(),
                    None => break,
                }
            }
            // surname = prefixes + one head word, but never the whole name
            let end = (end + 1).min(words.len() - 1);
            let surname = merge_surface(&parsed.tokens[..end], table);
            let mut tokens: Vec<NameToken> = parsed.tokens[end..].to_vec();
            tokens.push(surname);
            ParsedName {
                tokens,
                original: parsed.original.clone(),
            }
        }
    }
}

/// Inverse of a `LastNameFirst` reorder: brings the trailing surname back to the front.
pub fn unreorder(parsed: &ParsedName) -> ParsedName {
    let mut tokens = parsed.tokens.clone();
    if let Some(last) = tokens.pop() {
        tokens.insert(0, last);
    }
    ParsedName {
        tokens,
        original: parsed.original.clone(),
    }
}

fn merge_surface(tokens: &[NameToken], table: &PrefixTable) -> NameToken {
    if tokens.len() == 1 {
        return tokens[0].clone();
    }
    let surface = tokens.iter().map(|t| t.surface.as_str()).collect::<Vec<_>>().join(" ");
    let canonical = canonicalize_words(&surface, table);
    NameToken::compound(surface, canonical)
}

/// Canonical spelling of a space-separated word group, unifying known prefix/postfix variants.
fn canonicalize_words(surface: &str, table: &PrefixTable) -> String {
    let words: Vec<&str> = surface.split(' ').collect();
    let mut out: Vec<String> = Vec::new();
    let mut i = 0;
    while i < words.len() {
        let rest = &words[i..];
        if rest.len() > 1 {
            if let Some(a) = table.prefix_at(rest, true) {
                if a.words.len() < rest.len() {
                    out.push(a.canonical.clone());
                    i += a.words.len();
                    continue;
                }
            }
        }
        if i > 0 {
            if let Some(a) = table.postfix_at(rest) {
                out.push(a.canonical.clone());
                i += a.words.len();
                continue;
            }
        }
        out.push(words[i].to_string());
        i += 1;
    }
    out.join(" ")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct MergeOptions {
    /// Whether bare articles ("al", "el") merge with the following token.
    pub merge_bare_articles: bool,
}

impl Default for MergeOptions {
    fn default() -> Self {
        Self {
            merge_bare_articles: true,
        }
    }
}

/// Merges prefix runs with their head token and head tokens with trailing
/// postfixes, e.g. `[abd, el, rahman]` into one `abdel rahman` token.
pub fn merge_compounds(
    parsed: &ParsedName,
    table: &PrefixTable,
    opts: MergeOptions,
) -> (ParsedName, Vec<ParseWarning>) {
    let words: Vec<&str> = parsed.surfaces();
    let mut warnings = Vec::new();
    let mut tokens = Vec::with_capacity(parsed.tokens.len());
    let mut i = 0;
    while i < words.len() {
        let mut j = i;
        let mut canon: Vec<String> = Vec::new();
        while j < words.len() {
            match table.prefix_at(&words[j..], opts.merge_bare_articles) {
                Some(a) if !parsed.tokens[j].is_compound => {
                    canon.push(a.canonical.clone());
                    j += a.words.len();
                }
                _ => break,
            }
        }
        if j >= words.len() && j > i {
            // prefixes with nothing after them stay as they were
            let dangling = words[i..].join(" ");
            log::warn!("dangling prefix {dangling:?} in {:?}", parsed.original.text());
            warnings.push(ParseWarning::DanglingPrefix(dangling));
            tokens.extend(parsed.tokens[i..].iter().cloned());
            break;
        }
        let head = &parsed.tokens[j];
        canon.push(head.canonical.clone());
        j += 1;
        if let Some(a) = table.postfix_at(&words[j..]) {
            canon.push(a.canonical.clone());
            j += a.words.len();
        }
        if j - i == 1 {
            tokens.push(head.clone());
        } else {
            let surface = words[i..j].join(" ");
            tokens.push(NameToken::compound(surface, canon.join(" ")));
        }
        i = j;
    }
    (
        ParsedName {
            tokens,
            original: parsed.original.clone(),
        },
        warnings,
    )
}

/// Full name parsing: normalize, split, reorder, merge compounds.
#[derive(Debug, Clone, Default)]
pub struct NameParser {
    pub table: PrefixTable,
    pub folding: ArabicFolding,
    pub merge: MergeOptions,
}

impl NameParser {
    pub fn new(table: PrefixTable) -> Self {
        Self {
            table,
            ..Default::default()
        }
    }

    /// A comma in Latin text marks "Surname, Given" order and overrides `order`.
    pub fn parse(&self, raw: &RawName, order: NameOrder) -> Result<ParsedName, ParseError> {
        if raw.script() == Script::Latin {
            if let Some((surname, given)) = raw.text().split_once(',') {
                return self.parse_comma_form(raw, surname, given);
            }
        }
        let normalized = normalize::normalize(raw, &self.folding)?;
        let parsed = split(&normalized)?;
        let reordered = reorder(&parsed, order, &self.table);
        let (merged, _) = merge_compounds(&reordered, &self.table, self.merge);
        Ok(merged)
    }

    fn parse_comma_form(
        &self,
        raw: &RawName,
        surname: &str,
        given: &str,
    ) -> Result<ParsedName, ParseError> {
        let normalized = normalize::normalize_latin(raw)?;
        let surname = normalize::normalize_latin(&RawName::new(surname))?;
        let given = normalize::normalize_latin(&RawName::new(given))?;
        let given_tokens = if given.is_empty() {
            Vec::new()
        } else {
            let (merged, _) = merge_compounds(&split(&given)?, &self.table, self.merge);
            merged.tokens
        };
        let mut tokens = given_tokens;
        if !surname.is_empty() {
            let words: Vec<NameToken> =
                surname.text().split(' ').map(NameToken::simple).collect();
            tokens.push(merge_surface(&words, &self.table));
        }
        if tokens.is_empty() {
            return Err(ParseError::EmptyName);
        }
        Ok(ParsedName {
            tokens,
            original: normalized,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normalize::{normalize_arabic, normalize_latin};
    use proptest::prelude::*;

    fn latin(s: &str) -> ParsedName {
        split(&normalize_latin(&RawName::new(s)).unwrap()).unwrap()
    }

    fn merged(s: &str) -> ParsedName {
        merge_compounds(&latin(s), &PrefixTable::default(), MergeOptions::default()).0
    }

    #[test]
    fn split_examples() {
        let ar = split(&normalize_arabic(&RawName::new("سالي صلاح عنتر قاسم")).unwrap()).unwrap();
        assert_eq!(ar.surfaces(), vec!["سالي", "صلاح", "عنتر", "قاسم"]);
        assert_eq!(latin("ali").surfaces(), vec!["ali"]);
        assert_eq!(latin("abdel rahman mohamad").surfaces(), vec!["abdel", "rahman", "mohamad"]);
    }

    #[test]
    fn split_empty_is_error() {
        let empty = normalize_latin(&RawName::new(" - ")).unwrap();
        assert!(matches!(split(&empty), Err(ParseError::EmptyName)));
    }

    #[test]
    fn reorder_examples() {
        let table = PrefixTable::default();
        let r = reorder(&latin("wadie bassem s"), NameOrder::LastNameFirst, &table);
        assert_eq!(r.surfaces(), vec!["bassem", "s", "wadie"]);
        let r = reorder(&latin("ali hassan"), NameOrder::FirstNameFirst, &table);
        assert_eq!(r.surfaces(), vec!["ali", "hassan"]);
        let r = reorder(&latin("el baz mahmoud abdo"), NameOrder::LastNameFirst, &table);
        assert_eq!(r.surfaces(), vec!["mahmoud", "abdo", "el baz"]);
        assert!(r.tokens[2].is_compound);
    }

    #[test]
    fn merge_examples() {
        let m = merged("abdel rahman mohamad");
        assert_eq!(m.surfaces(), vec!["abdel rahman", "mohamad"]);
        let m = merged("abd el rahman");
        assert_eq!(m.canonicals(), vec!["abdel rahman"]);
        let m = merged("hossam el din");
        assert_eq!(m.surfaces(), vec!["hossam el din"]);
        let m = merged("mohamed abdel fattah salama");
        assert_eq!(m.canonicals(), vec!["mohamed", "abdel fattah", "salama"]);
    }

    #[test]
    fn abdel_rahman_variants_share_canonical() {
        for v in ["abdel rahman", "abd el rahman", "abdul rahman", "abd al rahman", "abdol rahman"] {
            assert_eq!(merged(v).canonicals(), vec!["abdel rahman"], "{v}");
        }
    }

    #[test]
    fn greedy_longest_prefix() {
        assert_eq!(merged("abou el hassan").canonicals(), vec!["abul hassan"]);
        assert_eq!(merged("abou hassan").canonicals(), vec!["abu hassan"]);
    }

    #[test]
    fn bare_articles_follow_flag() {
        let table = PrefixTable::default();
        let parsed = latin("mohamed el sayed");
        let (on, _) = merge_compounds(&parsed, &table, MergeOptions { merge_bare_articles: true });
        assert_eq!(on.surfaces(), vec!["mohamed", "el sayed"]);
        let (off, _) = merge_compounds(&parsed, &table, MergeOptions { merge_bare_articles: false });
        assert_eq!(off.surfaces(), vec!["mohamed", "el", "sayed"]);
    }

    #[test]
    fn dangling_prefix_warns_and_keeps_token() {
        let (m, warnings) = merge_compounds(&latin("mohamed abd"), &PrefixTable::default(), MergeOptions::default());
        assert_eq!(m.surfaces(), vec!["mohamed", "abd"]);
        assert_eq!(warnings, vec![ParseWarning::DanglingPrefix("abd".into())]);
    }

    #[test]
    fn arabic_compounds_merge() {
        let parser = NameParser::default();
        let p = parser.parse(&RawName::new("محمد عبد الفتاح سلامة"), NameOrder::FirstNameFirst).unwrap();
        assert_eq!(p.canonicals(), vec!["محمد", "عبد الفتاح", "سلامه"]);
        let p = parser.parse(&RawName::new("حسام الدين علي"), NameOrder::FirstNameFirst).unwrap();
        assert_eq!(p.canonicals(), vec!["حسام الدين", "علي"]);
    }

    #[test]
    fn comma_marks_surname_first() {
        let parser = NameParser::default();
        let p = parser.parse(&RawName::new("Wadie, Bassem S"), NameOrder::FirstNameFirst).unwrap();
        assert_eq!(p.surfaces(), vec!["bassem", "s", "wadie"]);
        let p = parser.parse(&RawName::new("El-Baz, Mahmoud Abdo"), NameOrder::FirstNameFirst).unwrap();
        assert_eq!(p.surfaces(), vec!["mahmoud", "abdo", "el baz"]);
        let p = parser.parse(&RawName::new("Abdul-Kader, A. M"), NameOrder::FirstNameFirst).unwrap();
        assert_eq!(p.surfaces(), vec!["a", "m", "abdul kader"]);
        assert_eq!(p.tokens[2].canonical, "abdel kader");
    }

    #[test]
    fn split_compound_parts() {
        let t = PrefixTable::default();
        assert_eq!(
            t.split_compound("abdel aziz"),
            Some(CompoundParts::Prefixed { prefix: "abdel", head: "aziz" })
        );
        assert_eq!(
            t.split_compound("hossam el din"),
            Some(CompoundParts::Postfixed { head: "hossam", postfix: "el din" })
        );
        assert_eq!(t.split_compound("mohamed"), None);
    }

    #[test]
    fn table_file_format() {
        let t = PrefixTable::parse("# c\nabdu\tabdel\tprefix\nel din\tel din\tpostfix\n").unwrap();
        assert_eq!(t.canonical("abdu"), Some("abdel"));
        assert!(PrefixTable::parse("abd\tabdel\n").is_err());
        assert!(PrefixTable::parse("abd\tabdel\tsuffix\n").is_err());
        let d = PrefixTable::default();
        for v in ["abd", "abd al", "abd el", "abdel", "abdol", "abdul", "abo", "abo el", "aboel", "abou", "abou el", "abu", "al", "el", "عبد", "ابو", "ال"] {
            assert!(d.prefix_variants().contains(&v.to_string()), "{v}");
        }
        for v in ["el din", "el deen", "allah"] {
            assert!(d.postfix_variants().contains(&v.to_string()), "{v}");
        }
    }

    fn word() -> impl Strategy<Value = String> {
        prop_oneof![
            Just("abd".to_string()),
            Just("el".to_string()),
            Just("abou".to_string()),
            Just("din".to_string()),
            Just("allah".to_string()),
            "[a-z]{1,6}",
        ]
    }

    proptest! {
        #[test]
        fn merge_never_adds_tokens(words in proptest::collection::vec(word(), 1..8)) {
            let p = latin(&words.join(" "));
            let (m, _) = merge_compounds(&p, &PrefixTable::default(), MergeOptions::default());
            prop_assert!(m.len() <= p.len());
            prop_assert_eq!(m.surfaces().join(" "), p.surfaces().join(" "));
            for t in &m.tokens {
                prop_assert!(!t.surface.is_empty());
                prop_assert_eq!(t.is_compound, t.surface.contains(' '));
            }
        }

        #[test]
        fn unreorder_restores_order(words in proptest::collection::vec(word(), 1..6)) {
            let table = PrefixTable::default();
            let p = latin(&words.join(" "));
            let back = unreorder(&reorder(&p, NameOrder::LastNameFirst, &table));
            prop_assert_eq!(back.surfaces().join(" "), p.surfaces().join(" "));
        }
    }
}

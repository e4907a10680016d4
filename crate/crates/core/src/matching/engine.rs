//! Per-source matching: blocked candidates, relaxed patterns, reverse
//! verification, scoring and M/U/P classification.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::blocking::BlockIndex;
use super::pattern::{resolve_slots, verified_alignment, PatternSlot, SearchPattern, TokenAlternatives};
use super::relax::{relax, RelaxOrder};
use super::similarity::{atomic_token, levenshtein, sim, weighted_atomic_token};
use super::MatchError;
use crate::dictionary::Dictionary;
use crate::normalize::Script;
use crate::parse::{NameOrder, NameParser, ParsedName};
use crate::record::{DatasetRecord, PreparedRecord};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    /// A single candidate at or above this WAT is a match.
    pub match_threshold: f64,
    /// Candidates below this WAT are discarded.
    pub floor: f64,
    /// Edit distance allowed on the first name in the last relaxation step.
    pub max_edit_distance: usize,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            match_threshold: 0.85,
            floor: 0.4,
            max_edit_distance: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidatePair {
    #[serde(skip)]
    pub source_id: String,
    pub dest_id: String,
    pub wat: f64,
    pub at: f64,
    pub edit_distance: usize,
    pub relax_level: u8,
    #[serde(skip)]
    pub verified: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Match,
    NonMatch,
    Possible,
}

/// Classification of one source record. A `Match` carries exactly one
/// candidate, a `Possible` one or more ranked candidates, a `NonMatch` none.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchDecision {
    pub source_id: String,
    pub outcome: Outcome,
    pub candidates: Vec<CandidatePair>,
}

impl MatchDecision {
    pub fn matched(&self) -> Option<&str> {
        match self.outcome {
            Outcome::Match => self.candidates.first().map(|c| c.dest_id.as_str()),
            _ => None,
        }
    }

    pub fn dest_ids(&self) -> Vec<&str> {
        self.candidates.iter().map(|c| c.dest_id.as_str()).collect()
    }
}

/// Higher WAT first, then smaller edit distance, then destination id.
fn rank(a: &CandidatePair, b: &CandidatePair) -> Ordering {
    b.wat
        .total_cmp(&a.wat)
        .then(a.edit_distance.cmp(&b.edit_distance))
        .then_with(|| a.dest_id.cmp(&b.dest_id))
}

pub fn classify(source_id: &str, candidates: Vec<CandidatePair>, t: &Thresholds) -> MatchDecision {
    let mut kept: Vec<CandidatePair> = candidates
        .into_iter()
        .filter(|c| c.verified && c.wat >= t.floor)
        .collect();
    kept.sort_by(rank);
    let outcome = match kept.as_slice() {
        [] => Outcome::NonMatch,
        [only] if only.wat >= t.match_threshold => Outcome::Match,
        _ => Outcome::Possible,
    };
    MatchDecision {
        source_id: source_id.to_string(),
        outcome,
        candidates: kept,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MatchOptions {
    pub thresholds: Thresholds,
    pub relax_order: RelaxOrder,
    pub block_fields: Vec<String>,
    pub source_order: NameOrder,
    pub dest_order: NameOrder,
}

impl Default for MatchOptions {
    fn default() -> Self {
        Self {
            thresholds: Thresholds::default(),
            relax_order: RelaxOrder::default(),
            block_fields: Vec::new(),
            source_order: NameOrder::FirstNameFirst,
            dest_order: NameOrder::FirstNameFirst,
        }
    }
}

/// Decisions for every source record, sorted by source id, plus the
/// records whose names could not be parsed.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchRun {
    pub decisions: Vec<MatchDecision>,
    pub skipped: Vec<(String, String)>,
}

/// Parsed records plus the ids that failed to parse, with the reason.
pub type Prepared = (Vec<PreparedRecord>, Vec<(String, String)>);

pub struct MatchEngine<'a> {
    pub dict: &'a Dictionary,
    pub parser: &'a NameParser,
    pub options: MatchOptions,
}

impl<'a> MatchEngine<'a> {
    pub fn new(dict: &'a Dictionary, parser: &'a NameParser, options: MatchOptions) -> Self {
        Self {
            dict,
            parser,
            options,
        }
    }

    /// Parses every record. Unparseable ones come back as (id, reason).
    pub fn prepare(&self, records: &[DatasetRecord], order: NameOrder) -> Result<Prepared, MatchError> {
        let mut seen = HashSet::new();
        let mut prepared = Vec::with_capacity(records.len());
        let mut skipped = Vec::new();
        for r in records {
            if !seen.insert(r.id.as_str()) {
                return Err(MatchError::DuplicateId(r.id.clone()));
            }
            match self.parser.parse(&r.full_name, order) {
                Ok(parsed) => prepared.push(PreparedRecord {
                    record: r.clone(),
                    parsed,
                }),
                Err(e) => {
                    warn!("record {:?} skipped: {e}", r.id);
                    skipped.push((r.id.clone(), e.to_string()));
                }
            }
        }
        Ok((prepared, skipped))
    }

    /// Matches every source against the destinations in its block. Sources
    /// whose names fail to parse are reported as non-matches.
    pub fn run(&self, src: &[DatasetRecord], dst: &[DatasetRecord]) -> Result<MatchRun, MatchError> {
        let (sources, mut skipped) = self.prepare(src, self.options.source_order)?;
        let (dests, dest_skipped) = self.prepare(dst, self.options.dest_order)?;
        skipped.extend(dest_skipped);
        let dest_records: Vec<DatasetRecord> = dests.iter().map(|d| d.record.clone()).collect();
        let index = BlockIndex::build(&dest_records, &self.options.block_fields)?;

        let mut decisions = sources
            .par_iter()
            .map(|s| {
                let block: Vec<&PreparedRecord> =
                    index.candidates(&s.record)?.iter().map(|&i| &dests[i]).collect();
                Ok(self.match_one(s, &block))
            })
            .collect::<Result<Vec<_>, MatchError>>()?;
        let parsed_ids: HashSet<&str> = sources.iter().map(|s| s.id()).collect();
        for r in src.iter().filter(|r| !parsed_ids.contains(r.id.as_str())) {
            decisions.push(classify(&r.id, Vec::new(), &self.options.thresholds));
        }
        decisions.sort_by(|a, b| a.source_id.cmp(&b.source_id));
        Ok(MatchRun { decisions, skipped })
    }

    /// Tries the relaxation levels in the configured order and classifies
    /// the first non-empty verified candidate set.
    pub fn match_one(&self, source: &PreparedRecord, block: &[&PreparedRecord]) -> MatchDecision {
        for level in self.options.relax_order.levels() {
            let found = self.candidates_at_level(source, block, level);
            if !found.is_empty() {
                return classify(
                    source.id(),
                    found.into_values().collect(),
                    &self.options.thresholds,
                );
            }
        }
        classify(source.id(), Vec::new(), &self.options.thresholds)
    }

    /// Verified, scored candidates from all queries of one relaxation level,
    /// keyed by destination id.
    pub fn candidates_at_level(
        &self,
        source: &PreparedRecord,
        block: &[&PreparedRecord],
        level: u8,
    ) -> BTreeMap<String, CandidatePair> {
        let mut found: BTreeMap<String, CandidatePair> = BTreeMap::new();
        let base = resolve_slots(&source.parsed, self.dict);
        let Ok(queries) = relax(&source.parsed, level) else {
            return found;
        };
        for query in queries {
            let mut slots: Vec<PatternSlot> =
                query.token_indices.iter().map(|&i| base[i].clone()).collect();
            if query.fuzzy_first {
                if let Some(first) = slots.first_mut() {
                    first.alternatives = self.fuzzy(&source.parsed, first);
                }
            }
            let pattern = SearchPattern {
                slots,
                relax_level: level,
            };
            if !pattern.is_matchable() {
                continue;
            }
            for dest in block {
                let Some(positions) = verified_alignment(&pattern, &dest.parsed, self.dict) else {
                    continue;
                };
                let cand = self.score(source, &base, &pattern, &positions, dest, level);
                match found.get(dest.id()) {
                    Some(existing) if existing.wat >= cand.wat => {}
                    _ => {
                        found.insert(dest.id().to_string(), cand);
                    }
                }
            }
        }
        found
    }

    /// Edit-distance tolerant version of a first-name slot.
    fn fuzzy(&self, source: &ParsedName, slot: &PatternSlot) -> TokenAlternatives {
        let d_max = self.options.thresholds.max_edit_distance;
        let token = &source.tokens[slot.source_index].canonical;
        match (&slot.alternatives, source.script()) {
            (TokenAlternatives::Initial { .. }, _) => slot.alternatives.clone(),
            (_, Script::Latin) => TokenAlternatives::Exact(
                self.dict
                    .latin_keys()
                    .filter(|k| levenshtein(k, token) <= d_max)
                    .flat_map(|k| self.dict.lookup_latin(k))
                    .collect(),
            ),
            _ => TokenAlternatives::Near {
                token: token.clone(),
                max_distance: d_max,
            },
        }
    }

    /// Scores a verified alignment. Source tokens are first brought into
    /// the destination's script: aligned tokens take the destination token
    /// they matched (an initial only its first letter), the others their
    /// closest dictionary alternative.
    fn score(
        &self,
        source: &PreparedRecord,
        base: &[PatternSlot],
        pattern: &SearchPattern,
        positions: &[usize],
        dest: &PreparedRecord,
        level: u8,
    ) -> CandidatePair {
        let dest_tokens: Vec<String> = dest.parsed.canonicals().iter().map(|s| s.to_string()).collect();
        let mut mapped: Vec<Option<String>> = vec![None; source.parsed.len()];
        for (slot, &pos) in pattern.slots.iter().zip(positions) {
            let hit = &dest_tokens[pos];
            mapped[slot.source_index] = Some(match &slot.alternatives {
                TokenAlternatives::Initial { .. } => hit.chars().take(1).collect(),
                TokenAlternatives::Near { token, .. } => token.clone(),
                TokenAlternatives::Exact(_) => hit.clone(),
            });
        }
        let s1: Vec<String> = mapped
            .into_iter()
            .enumerate()
            .map(|(i, m)| m.unwrap_or_else(|| self.closest_form(&source.parsed, &base[i], &dest_tokens)))
            .collect();
        CandidatePair {
            source_id: source.id().to_string(),
            dest_id: dest.id().to_string(),
            wat: weighted_atomic_token(&s1, &dest_tokens),
            at: atomic_token(&s1, &dest_tokens),
            edit_distance: levenshtein(&s1.join(" "), &dest_tokens.join(" ")),
            relax_level: level,
            verified: true,
        }
    }

    fn closest_form(&self, source: &ParsedName, slot: &PatternSlot, dest: &[String]) -> String {
        let forms: Vec<String> = match &slot.alternatives {
            TokenAlternatives::Exact(set) if !set.is_empty() => set.iter().cloned().collect(),
            TokenAlternatives::Initial { first_letters, .. } => {
                first_letters.iter().map(|c| c.to_string()).collect()
            }
            _ => vec![source.tokens[slot.source_index].canonical.clone()],
        };
        let best_sim = |f: &String| dest.iter().map(|d| sim(f, d)).fold(0.0, f64::max);
        let mut best = forms[0].clone();
        let mut best_score = best_sim(&best);
        for f in &forms[1..] {
            let s = best_sim(f);
            if s > best_score {
                best = f.clone();
                best_score = s;
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dictionary::DictionaryBuilder;
    use crate::phonetic::CodeTable;
    use std::sync::Arc;

    fn cand(dest: &str, wat: f64, ed: usize) -> CandidatePair {
        CandidatePair {
            source_id: "s".into(),
            dest_id: dest.into(),
            wat,
            at: wat,
            edit_distance: ed,
            relax_level: 0,
            verified: true,
        }
    }

    #[test]
    fn classify_examples() {
        let t = Thresholds::default();
        let d = classify("s", vec![cand("d1", 0.95, 0)], &t);
        assert_eq!(d.outcome, Outcome::Match);
        assert_eq!(d.matched(), Some("d1"));

        let d = classify("s", vec![cand("b2", 0.7, 0), cand("b3", 0.5, 0), cand("b1", 0.9, 0)], &t);
        assert_eq!(d.outcome, Outcome::Possible);
        assert_eq!(d.dest_ids(), vec!["b1", "b2", "b3"]);

        assert_eq!(classify("s", vec![], &t).outcome, Outcome::NonMatch);
        // a single weak candidate is still only possible
        assert_eq!(classify("s", vec![cand("d", 0.6, 0)], &t).outcome, Outcome::Possible);
        // below the floor
        assert_eq!(classify("s", vec![cand("d", 0.3, 0)], &t).outcome, Outcome::NonMatch);
    }

    #[test]
    fn ties_break_on_distance_then_id() {
        let t = Thresholds::default();
        let d = classify("s", vec![cand("z", 0.7, 1), cand("b", 0.7, 3), cand("a", 0.7, 3)], &t);
        assert_eq!(d.dest_ids(), vec!["z", "a", "b"]);
    }

    fn dictionary(parser: &NameParser) -> Dictionary {
        let pairs: Vec<(String, String)> = [
            ("محمد علي حسن سلامة", "mohamed ali hassan salama"),
            ("احمد فاروق سلامة", "ahmed farouk salama"),
            ("ايمان حسن", "eman hassan"),
        ]
        .iter()
        .map(|(a, l)| (a.to_string(), l.to_string()))
        .collect();
        DictionaryBuilder::new(parser, Arc::new(CodeTable::default()))
            .build_source_extracted(&pairs)
            .dictionary
    }

    fn run(src: &[DatasetRecord], dst: &[DatasetRecord]) -> Vec<MatchDecision> {
        let parser = NameParser::default();
        let dict = dictionary(&parser);
        MatchEngine::new(&dict, &parser, MatchOptions::default())
            .run(src, dst)
            .unwrap()
            .decisions
    }

    #[test]
    fn exact_cross_script_match() {
        let d = run(
            &[DatasetRecord::new("s1", "Mohamed Ali Hassan Salama")],
            &[
                DatasetRecord::new("d1", "محمد علي حسن سلامة"),
                DatasetRecord::new("d2", "احمد فاروق سلامة"),
            ],
        );
        assert_eq!(d[0].outcome, Outcome::Match);
        assert_eq!(d[0].matched(), Some("d1"));
        assert_eq!(d[0].candidates[0].relax_level, 0);
        assert_eq!(d[0].candidates[0].wat, 1.0);
    }

    #[test]
    fn missing_middle_name_found_by_relaxation() {
        let d = run(
            &[DatasetRecord::new("s1", "Mohamed Ali Hassan Salama")],
            &[DatasetRecord::new("d1", "محمد حسن سلامة")],
        );
        assert_ne!(d[0].outcome, Outcome::NonMatch);
        assert_eq!(d[0].candidates[0].relax_level, 1);
    }

    #[test]
    fn typo_in_first_name_found_last() {
        let d = run(
            &[DatasetRecord::new("s1", "Mohamad Salama")],
            &[DatasetRecord::new("d1", "محمد سلامة")],
        );
        assert_eq!(d[0].candidates[0].relax_level, 3);
        let d = run(
            &[DatasetRecord::new("s1", "Mohamad Salama")],
            &[DatasetRecord::new("d1", "خالد سلامة")],
        );
        assert_eq!(d[0].outcome, Outcome::NonMatch);
    }

    #[test]
    fn initial_does_not_match_eman() {
        let d = run(
            &[DatasetRecord::new("s1", "A Hassan")],
            &[DatasetRecord::new("d1", "ايمان حسن"), DatasetRecord::new("d2", "احمد حسن")],
        );
        assert_eq!(d[0].dest_ids(), vec!["d2"]);
    }

    #[test]
    fn arabic_to_arabic() {
        let d = run(
            &[DatasetRecord::new("s1", "أحمد فاروق سلامة")],
            &[DatasetRecord::new("d1", "احمد فاروق سلامه"), DatasetRecord::new("d2", "احمد سلامه")],
        );
        assert_eq!(d[0].matched(), Some("d1"));
    }

    #[test]
    fn results_are_sorted_and_cover_unparseable_sources() {
        let d = run(
            &[DatasetRecord::new("s2", "Ahmed Farouk Salama"), DatasetRecord::new("s1", "12 34")],
            &[DatasetRecord::new("d1", "احمد فاروق سلامة")],
        );
        assert_eq!(d.iter().map(|x| x.source_id.as_str()).collect::<Vec<_>>(), vec!["s1", "s2"]);
        assert_eq!(d[0].outcome, Outcome::NonMatch);
        assert_eq!(d[1].matched(), Some("d1"));
    }

    #[test]
    fn duplicate_ids_rejected() {
        let parser = NameParser::default();
        let dict = dictionary(&parser);
        let engine = MatchEngine::new(&dict, &parser, MatchOptions::default());
        let recs = [DatasetRecord::new("x", "ali"), DatasetRecord::new("x", "omar")];
        assert!(matches!(engine.run(&recs, &[]), Err(MatchError::DuplicateId(_))));
    }

    const POOL: [&str; 6] = ["محمد", "علي", "حسن", "سلامه", "احمد", "عمر"];

    fn name_from(idx: &[usize]) -> String {
        idx.iter().map(|&i| POOL[i]).collect::<Vec<_>>().join(" ")
    }

    proptest::proptest! {
        #[test]
        fn relaxation_never_loses_full_query_candidates(
            src in proptest::collection::vec(0usize..6, 1..5),
            dests in proptest::collection::vec(proptest::collection::vec(0usize..6, 1..6), 1..8),
        ) {
            let parser = NameParser::default();
            let dict = dictionary(&parser);
            let engine = MatchEngine::new(&dict, &parser, MatchOptions::default());
            let (s, _) = engine.prepare(&[DatasetRecord::new("s", name_from(&src))], NameOrder::FirstNameFirst).unwrap();
            let records: Vec<DatasetRecord> = dests
                .iter()
                .enumerate()
                .map(|(i, d)| DatasetRecord::new(format!("d{i}"), name_from(d)))
                .collect();
            let (d, _) = engine.prepare(&records, NameOrder::FirstNameFirst).unwrap();
            let block: Vec<&PreparedRecord> = d.iter().collect();
            let full: Vec<String> = engine.candidates_at_level(&s[0], &block, 0).into_keys().collect();
            for level in 1..=3u8 {
                if relax(&s[0].parsed, level).unwrap().is_empty() {
                    continue;
                }
                let relaxed = engine.candidates_at_level(&s[0], &block, level);
                for id in &full {
                    proptest::prop_assert!(relaxed.contains_key(id), "level {level} lost {id}");
                }
            }
        }
    }
}

//! Ordered wildcard search patterns: the in-memory form of
//! `LIKE '%tok1%tok2%...%'` over whole name tokens.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::similarity::levenshtein;
use super::MatchError;
use crate::dictionary::Dictionary;
use crate::normalize::Script;
use crate::parse::ParsedName;

/// What a destination token must look like to satisfy one pattern slot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum TokenAlternatives {
    /// Token equals one of these canonical forms.
    Exact(BTreeSet<String>),
    /// A Latin initial: token starts with an Arabic letter romanizable as `letter`.
    Initial {
        letter: char,
        first_letters: BTreeSet<char>,
    },
    /// Token within `max_distance` edits of `token`.
    Near { token: String, max_distance: usize },
}

impl TokenAlternatives {
    pub fn accepts(&self, dest_token: &str) -> bool {
        match self {
            TokenAlternatives::Exact(set) => set.contains(dest_token),
            TokenAlternatives::Initial { first_letters, .. } => dest_token
                .chars()
                .next()
                .is_some_and(|c| first_letters.contains(&c)),
            TokenAlternatives::Near {
                token,
                max_distance,
            } => levenshtein(token, dest_token) <= *max_distance,
        }
    }

    /// An exact slot with no alternatives can never match.
    pub fn is_unresolved(&self) -> bool {
        matches!(self, TokenAlternatives::Exact(s) if s.is_empty())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternSlot {
    /// Position of the source token this slot came from.
    pub source_index: usize,
    pub alternatives: TokenAlternatives,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchPattern {
    pub slots: Vec<PatternSlot>,
    pub relax_level: u8,
}

impl SearchPattern {
    pub fn is_matchable(&self) -> bool {
        !self.slots.is_empty() && !self.slots.iter().any(|s| s.alternatives.is_unresolved())
    }

    pub fn select(&self, indices: &[usize], relax_level: u8) -> SearchPattern {
        SearchPattern {
            slots: indices.iter().map(|&i| self.slots[i].clone()).collect(),
            relax_level,
        }
    }
}

/// Slot alternatives for every source token, resolved or not.
pub(crate) fn resolve_slots(source: &ParsedName, dict: &Dictionary) -> Vec<PatternSlot> {
    source
        .tokens
        .iter()
        .enumerate()
        .map(|(i, tok)| {
            let alternatives = match source.script() {
                Script::Latin => match tok.initial() {
                    Some(letter) => TokenAlternatives::Initial {
                        letter,
                        first_letters: dict.code_table().arabic_letters_for(letter),
                    },
                    None => TokenAlternatives::Exact(dict.lookup_latin(&tok.canonical)),
                },
                _ => TokenAlternatives::Exact(BTreeSet::from([tok.canonical.clone()])),
            };
            PatternSlot {
                source_index: i,
                alternatives,
            }
        })
        .collect()
}

/// Pattern for a parsed source name. Latin tokens are translated through
/// the dictionary; Arabic tokens stand for themselves.
pub fn build_pattern(
    source: &ParsedName,
    dict: &Dictionary,
    relax_level: u8,
) -> Result<SearchPattern, MatchError> {
    let slots = resolve_slots(source, dict);
    if slots.iter().all(|s| s.alternatives.is_unresolved()) {
        return Err(MatchError::NoResolvableTokens(source.original.text().to_string()));
    }
    Ok(SearchPattern { slots, relax_level })
}

/// Leftmost positions in `dest` satisfying the slots in order, where each
/// slot additionally has to pass `extra`.
pub(crate) fn align_with(
    pattern: &SearchPattern,
    dest: &ParsedName,
    extra: impl Fn(&PatternSlot, &str) -> bool,
) -> Option<Vec<usize>> {
    let mut positions = Vec::with_capacity(pattern.slots.len());
    let mut next = 0;
    for slot in &pattern.slots {
        let found = (next..dest.tokens.len()).find(|&i| {
            let tok = dest.tokens[i].canonical.as_str();
            slot.alternatives.accepts(tok) && extra(slot, tok)
        })?;
        positions.push(found);
        next = found + 1;
    }
    Some(positions)
}

pub fn align(pattern: &SearchPattern, dest: &ParsedName) -> Option<Vec<usize>> {
    align_with(pattern, dest, |_, _| true)
}

/// True iff the slots can be found in `dest` in order, with any number of
/// other tokens before, between or after them.
pub fn match_pattern(pattern: &SearchPattern, dest: &ParsedName) -> bool {
    !pattern.slots.is_empty() && align(pattern, dest).is_some()
}

/// Whether an Arabic token matched by a Latin initial really transliterates
/// to something starting with that letter. Tokens unknown to the dictionary
/// keep the romanization-table judgement.
pub fn initial_confirmed(dict: &Dictionary, letter: char, arabic_token: &str) -> bool {
    let latins = dict.lookup_arabic(arabic_token);
    latins.is_empty() || latins.iter().any(|l| l.starts_with(letter))
}

/// Reverse dictionary check for initial-letter slots: some in-order
/// alignment must exist whose initials all survive `initial_confirmed`.
/// Patterns without initials (e.g. Arabic to Arabic) pass trivially.
pub fn verify_reverse(pattern: &SearchPattern, dest: &ParsedName, dict: &Dictionary) -> bool {
    verified_alignment(pattern, dest, dict).is_some()
}

pub fn verified_alignment(
    pattern: &SearchPattern,
    dest: &ParsedName,
    dict: &Dictionary,
) -> Option<Vec<usize>> {
    align_with(pattern, dest, |slot, tok| match &slot.alternatives {
        TokenAlternatives::Initial { letter, .. } => initial_confirmed(dict, *letter, tok),
        _ => true,
    })
}

//! Iterative relaxation of search conditions for sources that found nothing.

use serde::{Deserialize, Serialize};

use super::MatchError;
use crate::parse::ParsedName;

/// Order in which the relaxation levels are tried after the full query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelaxOrder {
    /// Drop a middle name, then the last name, then fuzzy first name.
    #[default]
    PaperOrder,
    /// Drop the last name before trying middle names.
    LastNameFirst,
}

impl RelaxOrder {
    pub fn levels(self) -> [u8; 4] {
        match self {
            RelaxOrder::PaperOrder => [0, 1, 2, 3],
            RelaxOrder::LastNameFirst => [0, 2, 1, 3],
        }
    }
}

pub const MAX_RELAX_LEVEL: u8 = 3;

/// A reduced query: which source tokens to keep, and whether the first
/// one is matched with edit-distance tolerance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelaxedQuery {
    pub token_indices: Vec<usize>,
    pub fuzzy_first: bool,
}

impl RelaxedQuery {
    pub fn apply(&self, source: &ParsedName) -> ParsedName {
        ParsedName {
            tokens: self
                .token_indices
                .iter()
                .map(|&i| source.tokens[i].clone())
                .collect(),
            original: source.original.clone(),
        }
    }
}

/// Queries for one relaxation level:
///
/// - 0: every token;
/// - 1: each way of dropping a single middle token (first and last kept);
/// - 2: all but the last token;
/// - 3: first token with edit-distance tolerance, plus the last token.
pub fn relax(source: &ParsedName, level: u8) -> Result<Vec<RelaxedQuery>, MatchError> {
    let n = source.len();
    let exact = |token_indices: Vec<usize>| RelaxedQuery {
        token_indices,
        fuzzy_first: false,
    };
    Ok(match level {
        0 => vec![exact((0..n).collect())],
        1 if n >= 3 => (1..n - 1)
            .map(|drop| exact((0..n).filter(|&i| i != drop).collect()))
            .collect(),
        1 => Vec::new(),
        2 if n >= 2 => vec![exact((0..n - 1).collect())],
        2 => Vec::new(),
        3 => vec![RelaxedQuery {
            token_indices: if n >= 2 { vec![0, n - 1] } else { vec![0] },
            fuzzy_first: true,
        }],
        _ => return Err(MatchError::ExhaustedRelaxation),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normalize::{normalize_latin, RawName};
    use crate::parse::split;

    fn name(s: &str) -> ParsedName {
        split(&normalize_latin(&RawName::new(s)).unwrap()).unwrap()
    }

    fn surfaces(queries: &[RelaxedQuery], source: &ParsedName) -> Vec<Vec<String>> {
        queries
            .iter()
            .map(|q| q.apply(source).surfaces().iter().map(|s| s.to_string()).collect())
            .collect()
    }

    #[test]
    fn middle_drops() {
        let s = name("a b c d");
        assert_eq!(
            surfaces(&relax(&s, 1).unwrap(), &s),
            vec![vec!["a", "c", "d"], vec!["a", "b", "d"]]
        );
    }

    #[test]
    fn short_names() {
        let s = name("a b");
        assert!(relax(&s, 1).unwrap().is_empty());
        assert_eq!(surfaces(&relax(&s, 2).unwrap(), &s), vec![vec!["a"]]);
        let one = name("a");
        assert!(relax(&one, 2).unwrap().is_empty());
        assert_eq!(relax(&one, 3).unwrap()[0].token_indices, vec![0]);
    }

    #[test]
    fn levels_and_exhaustion() {
        let s = name("a b c");
        assert_eq!(relax(&s, 0).unwrap()[0].token_indices, vec![0, 1, 2]);
        let last = relax(&s, 3).unwrap();
        assert_eq!(last, vec![RelaxedQuery { token_indices: vec![0, 2], fuzzy_first: true }]);
        assert!(matches!(relax(&s, 4), Err(MatchError::ExhaustedRelaxation)));
        assert_eq!(RelaxOrder::LastNameFirst.levels(), [0, 2, 1, 3]);
    }
}

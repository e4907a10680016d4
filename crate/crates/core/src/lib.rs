//! Cross-script personal-name record linkage between Arabic names and
//! their Latin transliterations.

pub mod normalize;
pub mod parse;
pub mod phonetic;
pub mod dictionary;
pub mod fixtures;
pub mod matching;
pub mod metrics;
pub mod record;

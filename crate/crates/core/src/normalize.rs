//! Character-level cleaning of Arabic and Latin name strings.
//!
//! Both scripts collapse typographic variants onto one spelling so that
//! later stages can compare names with plain string equality:
//!
//! - Latin: accents folded, separators (`-`, `_`, `,`, `.`, `/`) turned
//!   into spaces, digits dropped, lowercased.
//! - Arabic: alef/hamza carriers unified, alef maqsura to yaa, taa
//!   marbouta to haa, tashkeel and tatweel removed, word-final hamza after
//!   a long vowel dropped.

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Script {
    Arabic,
    Latin,
    Mixed,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NormalizeError {
    #[error("name {text:?} contains non-Latin character {ch:?}")]
    NonLatinContent { text: String, ch: char },
    #[error("name {text:?} contains non-Arabic character {ch:?}")]
    NonArabicContent { text: String, ch: char },
    #[error("name {0:?} mixes Arabic and Latin letters")]
    MixedScript(String),
}

/// A name exactly as it appeared in the source data.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawName {
    text: String,
    script: Script,
}

impl RawName {
    pub fn new(text: impl Into<String>) -> Self {
        let text = text.into();
        let script = detect_script(&text);
        Self { text, script }
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn script(&self) -> Script {
        self.script
    }
}

/// A cleaned name. Never `Script::Mixed`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NormalizedName {
    text: String,
    script: Script,
}

impl NormalizedName {
    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn script(&self) -> Script {
        self.script
    }

    pub fn is_empty(&self) -> bool {
        self.text.is_empty()
    }

    pub(crate) fn from_parts(text: String, script: Script) -> Self {
        debug_assert!(script != Script::Mixed);
        Self { text, script }
    }
}

/// What a word-final hamza after a long vowel becomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FinalHamza {
    #[default]
    Drop,
    /// Rewrite as yaa; merged into a preceding yaa.
    FoldToYeh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ArabicFolding {
    /// Replacement for waw-with-hamza (ؤ). The character table unifies it
    /// with alef; `'و'` gives the more common treatment.
    pub waw_hamza: char,
    pub final_hamza: FinalHamza,
}

impl Default for ArabicFolding {
    fn default() -> Self {
        Self {
            waw_hamza: ALEF,
            final_hamza: FinalHamza::Drop,
        }
    }
}

const ALEF: char = '\u{0627}';
const YEH: char = '\u{064A}';
const WAW: char = '\u{0648}';
const HEH: char = '\u{0647}';
const HAMZA: char = '\u{0621}';

pub fn is_arabic_char(c: char) -> bool {
    matches!(c as u32,
        0x0600..=0x06FF | 0x0750..=0x077F | 0x08A0..=0x08FF | 0xFB50..=0xFDFF | 0xFE70..=0xFEFF)
}

pub fn is_latin_letter(c: char) -> bool {
    c.is_alphabetic()
        && matches!(c as u32,
            0x0041..=0x005A | 0x0061..=0x007A | 0x00C0..=0x024F | 0x1E00..=0x1EFF | 0xFF21..=0xFF3A | 0xFF41..=0xFF5A)
}

pub fn detect_script(text: &str) -> Script {
    let arabic = text.chars().any(is_arabic_char);
    let latin = text.chars().any(is_latin_letter);
    match (arabic, latin) {
        (true, false) => Script::Arabic,
        (false, true) => Script::Latin,
        _ => Script::Mixed,
    }
}

/// Normalizes either script, dispatching on the detected script.
pub fn normalize(raw: &RawName, folding: &ArabicFolding) -> Result<NormalizedName, NormalizeError> {
    match raw.script {
        Script::Latin => normalize_latin(raw),
        Script::Arabic => normalize_arabic_with(raw, folding),
        Script::Mixed => {
            // Strings with no letters at all (digits, punctuation) normalize to empty.
            if !raw.text.chars().any(|c| is_arabic_char(c) || c.is_alphabetic()) {
                Ok(NormalizedName::from_parts(String::new(), Script::Latin))
            } else {
                Err(NormalizeError::MixedScript(raw.text.clone()))
            }
        }
    }
}

fn is_separator(c: char) -> bool {
    c.is_whitespace()
        || matches!(c, '-' | '_' | ',' | '.' | '/' | '\\' | ';' | ':' | '(' | ')' | '"' | '|' | '+' | '&')
        || matches!(c, '\u{2010}'..='\u{2015}' | '\u{060C}' | '\u{061B}' | '\u{061F}' | '\u{06D4}')
}

fn is_apostrophe(c: char) -> bool {
    matches!(c, '\'' | '`' | '\u{2018}' | '\u{2019}' | '\u{02BC}' | '\u{02BF}' | '\u{02BE}')
}

fn is_digit(c: char) -> bool {
    c.is_ascii_digit() || matches!(c, '\u{0660}'..='\u{0669}' | '\u{06F0}'..='\u{06F9}')
}

/// Collapses whitespace runs into single spaces and trims.
fn squeeze(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

pub fn normalize_latin(raw: &RawName) -> Result<NormalizedName, NormalizeError> {
    let mut out = String::with_capacity(raw.text.len());
    for c in raw.text.nfkd() {
        if ('\u{0300}'..='\u{036F}').contains(&c) || is_apostrophe(c) || is_digit(c) {
            continue;
        }
        if is_separator(c) {
            out.push(' ');
            continue;
        }
        if c.is_ascii_alphabetic() {
            out.push(c.to_ascii_lowercase());
            continue;
        }
        let folded = match c.to_lowercase().next().unwrap_or(c) {
            'ß' => "ss",
            'æ' => "ae",
            'œ' => "oe",
            'ø' => "o",
            'đ' | 'ð' => "d",
            'ł' => "l",
            'þ' => "th",
            'ı' => "i",
            _ => {
                return Err(NormalizeError::NonLatinContent {
                    text: raw.text.clone(),
                    ch: c,
                })
            }
        };
        out.push_str(folded);
    }
    Ok(NormalizedName::from_parts(squeeze(&out), Script::Latin))
}

pub fn normalize_arabic(raw: &RawName) -> Result<NormalizedName, NormalizeError> {
    normalize_arabic_with(raw, &ArabicFolding::default())
}

fn is_arabic_mark(c: char) -> bool {
    matches!(c, '\u{0610}'..='\u{061A}' | '\u{064B}'..='\u{065F}' | '\u{0670}' | '\u{06D6}'..='\u{06ED}' | '\u{0640}')
}

pub fn normalize_arabic_with(
    raw: &RawName,
    folding: &ArabicFolding,
) -> Result<NormalizedName, NormalizeError> {
    if let Some(ch) = raw.text.chars().find(|&c| is_latin_letter(c)) {
        return Err(NormalizeError::NonArabicContent {
            text: raw.text.clone(),
            ch,
        });
    }
    let mut folded = String::with_capacity(raw.text.len());
    // NFKC composes decomposed hamza/madda sequences and maps presentation
    // forms onto base letters, so the table below sees one codepoint each.
    for c in raw.text.nfkc() {
        if is_arabic_mark(c) || is_digit(c) {
            continue;
        }
        if is_separator(c) {
            folded.push(' ');
            continue;
        }
        let mapped = match c {
            '\u{0623}' | '\u{0625}' | '\u{0622}' | '\u{0671}' | '\u{0672}' | '\u{0673}' => ALEF,
            '\u{0624}' => folding.waw_hamza,
            '\u{0626}' | '\u{0649}' | '\u{06CC}' | '\u{06D0}' => YEH,
            '\u{0629}' => HEH,
            '\u{06A9}' => '\u{0643}',
            '\u{06C0}' | '\u{06C1}' => HEH,
            c if is_arabic_char(c) => c,
            c if c.is_alphabetic() => {
                return Err(NormalizeError::NonArabicContent {
                    text: raw.text.clone(),
                    ch: c,
                })
            }
            _ => continue,
        };
        folded.push(mapped);
    }
    let words: Vec<String> = folded
        .split_whitespace()
        .map(|w| fold_final_hamza(w, folding.final_hamza))
        .filter(|w| !w.is_empty())
        .collect();
    Ok(NormalizedName::from_parts(words.join(" "), Script::Arabic))
}

fn fold_final_hamza(word: &str, mode: FinalHamza) -> String {
    let mut chars: Vec<char> = word.chars().collect();
    if chars.len() >= 2 && chars[chars.len() - 1] == HAMZA {
        let before = chars[chars.len() - 2];
        if matches!(before, ALEF | WAW | YEH) {
            chars.pop();
            if mode == FinalHamza::FoldToYeh && before != YEH {
                chars.push(YEH);
            }
        }
    }
    chars.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn latin(s: &str) -> String {
        normalize_latin(&RawName::new(s)).unwrap().text().to_string()
    }

    fn arabic(s: &str) -> String {
        normalize_arabic(&RawName::new(s)).unwrap().text().to_string()
    }

    #[test]
    fn latin_examples() {
        assert_eq!(latin("Mohamed, Abd El-Fattah"), "mohamed abd el fattah");
        assert_eq!(latin("Mohamed Abd El Fattah"), "mohamed abd el fattah");
        assert_eq!(latin("ali"), "ali");
        assert_eq!(latin("Wadie,  Bassem S"), "wadie bassem s");
        assert_eq!(latin("Abdul-Kader, A. M"), "abdul kader a m");
        assert_eq!(latin("  Hany_A/M.  "), "hany a m");
    }

    #[test]
    fn latin_folds_accents_and_drops_digits() {
        assert_eq!(latin("Émad 2nd"), "emad nd");
        assert_eq!(latin("O'Neil"), "oneil");
    }

    #[test]
    fn latin_rejects_arabic() {
        let err = normalize_latin(&RawName::new("ali \u{0645}")).unwrap_err();
        assert!(matches!(err, NormalizeError::NonLatinContent { .. }));
    }

    #[test]
    fn arabic_examples() {
        assert_eq!(arabic("أحمد"), "احمد");
        assert_eq!(arabic("فاطمة"), "فاطمه");
        assert_eq!(arabic("منى"), "مني");
        assert_eq!(arabic("إيمان"), "ايمان");
        assert_eq!(arabic("فؤاد"), "فااد");
        assert_eq!(arabic("آلاء"), arabic("الاء"));
        assert_eq!(arabic("هانىء"), "هاني");
        assert_eq!(arabic("عُمَر"), "عمر");
        assert_eq!(arabic("سالي  صلاح،عنتر"), "سالي صلاح عنتر");
    }

    #[test]
    fn arabic_table_one_variant_pairs_collapse() {
        let pairs = [
            ("أحمد", "احمد"),
            ("إيمان", "ايمان"),
            ("فؤاد", "فواد"),
            ("منى", "مني"),
            ("هاني", "هانى"),
            ("آلاء", "الاء"),
            ("فاطمة", "فاطمه"),
            ("عُمَر", "عمر"),
            ("هاني", "هانىء"),
        ];
        let folding = ArabicFolding {
            waw_hamza: WAW,
            ..Default::default()
        };
        for (a, b) in pairs {
            let fa = normalize_arabic_with(&RawName::new(a), &folding).unwrap();
            let fb = normalize_arabic_with(&RawName::new(b), &folding).unwrap();
            assert_eq!(fa, fb, "{a} vs {b}");
        }
    }

    #[test]
    fn decomposed_and_presentation_forms_fold_identically() {
        // alef + combining hamza above, and the isolated presentation form of alef-hamza
        assert_eq!(arabic("\u{0627}\u{0654}حمد"), "احمد");
        assert_eq!(arabic("\u{FE83}حمد"), "احمد");
        assert_eq!(arabic("\u{FEE3}\u{FEA4}\u{FEE4}\u{FEAA}"), "محمد");
    }

    #[test]
    fn final_hamza_fold_to_yeh() {
        let folding = ArabicFolding {
            final_hamza: FinalHamza::FoldToYeh,
            ..Default::default()
        };
        let n = normalize_arabic_with(&RawName::new("علاء"), &folding).unwrap();
        assert_eq!(n.text(), "علاي");
        let n = normalize_arabic_with(&RawName::new("هانىء"), &folding).unwrap();
        assert_eq!(n.text(), "هاني");
    }

    #[test]
    fn arabic_rejects_latin() {
        let err = normalize_arabic(&RawName::new("محمد ali")).unwrap_err();
        assert!(matches!(err, NormalizeError::NonArabicContent { .. }));
    }

    #[test]
    fn script_detection() {
        assert_eq!(RawName::new("محمد").script(), Script::Arabic);
        assert_eq!(RawName::new("Ali, A.").script(), Script::Latin);
        assert_eq!(RawName::new("محمد ali").script(), Script::Mixed);
        assert_eq!(RawName::new("123").script(), Script::Mixed);
    }

    const ARABIC_ALPHABET: &str = "اأإآؤئءبتثجحخدذرزسشصضطظعغفقكلمنهوىيةَُِّْ ،";
    const LATIN_ALPHABET: &str = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZéÉ -_,./'0123456789";

    fn from_alphabet(alphabet: &'static str) -> impl Strategy<Value = String> {
        let chars: Vec<char> = alphabet.chars().collect();
        proptest::collection::vec(proptest::sample::select(chars), 0..24)
            .prop_map(|v| v.into_iter().collect())
    }

    proptest! {
        #[test]
        fn arabic_idempotent_and_closed(s in from_alphabet(ARABIC_ALPHABET)) {
            let once = normalize_arabic(&RawName::new(s.clone())).unwrap();
            let twice = normalize_arabic(&RawName::new(once.text())).unwrap();
            prop_assert_eq!(&once, &twice);
            for c in once.text().chars() {
                prop_assert!(!"أإآؤىة".contains(c));
                prop_assert!(!is_arabic_mark(c));
            }
            prop_assert!(!once.text().contains("  "));
            prop_assert_eq!(once.text().trim(), once.text());
        }

        #[test]
        fn latin_idempotent_and_closed(s in from_alphabet(LATIN_ALPHABET)) {
            let once = normalize_latin(&RawName::new(s.clone())).unwrap();
            let twice = normalize_latin(&RawName::new(once.text())).unwrap();
            prop_assert_eq!(&once, &twice);
            prop_assert!(once.text().chars().all(|c| c.is_ascii_lowercase() || c == ' '));
            prop_assert!(!once.text().contains("  "));
            prop_assert_eq!(once.script(), Script::Latin);
        }
    }
}

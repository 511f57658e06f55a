//! Text cleaning: boilerplate stripping, transliteration, whitespace and
//! quote normalization, emoji removal, short-response rejection, and AI-tell
//! detection.
//!
//! The full pipeline runs in a fixed order so composition is deterministic:
//! emoji removal, then transliteration, then boilerplate stripping, then
//! whitespace normalization, then the length check. All functions here are
//! pure and safe to call from any number of threads.

mod translit;

use serde::{Deserialize, Serialize};
use std::io;
use std::path::Path;

pub use translit::{is_emoji, transliterate_char, Mapping};

/// Minimum accepted document length, in words.
pub const MIN_WORDS: usize = 50;

/// Leading phrases that mark a generation's first paragraph as assistant
/// boilerplate. Matching is case-sensitive after trimming leading
/// whitespace; the apostrophe variant covers raw generations where curly
/// quotes have not been straightened yet.
pub const BOILERPLATE_PREFIXES: &[&str] = &[
    "Sure",
    "Here is a",
    "Title:",
    "Abstract:",
    "I have:",
    "I'm happy to help",
    "I\u{2019}m happy to help",
];

/// Default tell lexicon: stock phrases that LLM output overuses.
pub const DEFAULT_TELLS: &[&str] = &[
    "delve",
    "it is important to note",
    "as an AI language model",
    "in conclusion",
    "I hope this helps",
];

/// Why a generation was rejected by the cleaning pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    TooShort,
    EmptyAfterStrip,
}

/// One tell-phrase occurrence. `position` is a character offset into the
/// text that was scanned.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TellHit {
    pub phrase: String,
    pub position: usize,
}

/// What the cleaning pipeline did to one document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizationReport {
    pub stripped_boilerplate: bool,
    /// Characters removed end to end (input chars minus output chars,
    /// floored at zero since a few mappings expand).
    pub removed_char_count: usize,
    pub rejected: Option<RejectReason>,
    /// Tells found in the normalized output text.
    pub tells_found: Vec<TellHit>,
}

/// Remove the first paragraph when it starts with assistant boilerplate.
///
/// The first paragraph is the text up to the first blank line (the whole
/// text when there is none). Matching trims leading whitespace and is
/// case-sensitive; nothing beyond the first paragraph is ever touched.
pub fn strip_boilerplate(text: &str) -> (String, bool) {
    let trimmed = text.trim_start();
    let starts_with_boilerplate = BOILERPLATE_PREFIXES.iter().any(|p| trimmed.starts_with(p));
    if !starts_with_boilerplate {
        return (text.to_string(), false);
    }
    // End of first paragraph: the first line whose content is blank.
    let mut cut = text.len();
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        if offset > 0 && line.trim().is_empty() {
            cut = offset;
            break;
        }
        offset += line.len();
    }
    if cut == text.len() {
        // No blank line: the whole text is the boilerplate paragraph.
        return (String::new(), true);
    }
    (text[cut..].trim_start().to_string(), true)
}

/// Remove emoji, transliterate to ASCII, and normalize whitespace.
///
/// Output contains only ASCII, with single spaces inside lines, single
/// newlines between adjacent lines, and exactly one blank line between
/// paragraphs. Idempotent.
pub fn normalize(text: &str) -> String {
    let ascii = transliterate(&remove_emoji(text));
    normalize_whitespace(&ascii)
}

fn remove_emoji(text: &str) -> String {
    text.chars().filter(|&c| !is_emoji(c)).collect()
}

fn transliterate(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match transliterate_char(c) {
            Mapping::Keep => out.push(c),
            Mapping::Ascii(s) => out.push_str(s),
            Mapping::Unmapped => {}
        }
    }
    out
}

fn normalize_whitespace(text: &str) -> String {
    // Unify line endings and horizontal whitespace, drop other controls.
    let mut unified = String::with_capacity(text.len());
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '\r' => {
                if chars.peek() == Some(&'\n') {
                    chars.next();
                }
                unified.push('\n');
            }
            '\t' | '\u{000B}' | '\u{000C}' => unified.push(' '),
            c if c.is_ascii_control() && c != '\n' => {}
            c => unified.push(c),
        }
    }

    // Collapse spaces within lines, blank-line runs to one paragraph break.
    let mut out = String::with_capacity(unified.len());
    let mut pending_break: Option<&str> = None;
    for line in unified.split('\n') {
        let mut compact = String::with_capacity(line.len());
        for word in line.split_whitespace() {
            if !compact.is_empty() {
                compact.push(' ');
            }
            compact.push_str(word);
        }
        if compact.is_empty() {
            if !out.is_empty() {
                pending_break = Some("\n\n");
            }
            continue;
        }
        if let Some(brk) = pending_break.take() {
            out.push_str(brk);
        }
        out.push_str(&compact);
        pending_break = Some("\n");
    }
    out
}

/// Count words: maximal runs of non-whitespace in the normalized text.
pub fn word_count(text: &str) -> usize {
    normalize(text).split_whitespace().count()
}

/// True when the text must be rejected for being under `min_words` words.
pub fn reject_short(text: &str, min_words: usize) -> bool {
    word_count(text) < min_words
}

/// A set of tell phrases, loadable from a plain-text file.
#[derive(Debug, Clone)]
pub struct TellLexicon {
    phrases: Vec<String>,
}

impl Default for TellLexicon {
    fn default() -> Self {
        TellLexicon {
            phrases: DEFAULT_TELLS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl TellLexicon {
    pub fn new(phrases: impl IntoIterator<Item = String>) -> Self {
        TellLexicon {
            phrases: phrases.into_iter().collect(),
        }
    }

    /// Load one phrase per line; blank lines are skipped.
    pub fn from_file(path: impl AsRef<Path>) -> io::Result<Self> {
        let raw = std::fs::read_to_string(path)?;
        Ok(TellLexicon {
            phrases: raw
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(str::to_string)
                .collect(),
        })
    }

    pub fn phrases(&self) -> &[String] {
        &self.phrases
    }
}

/// Find case-insensitive whole-word occurrences of the lexicon's phrases.
///
/// A match must not be flanked by alphanumeric characters, so "delve"
/// does not fire inside "Delvey". Positions are character offsets into the
/// input.
pub fn find_tells(text: &str, lexicon: &TellLexicon) -> Vec<TellHit> {
    let chars: Vec<char> = text.chars().map(|c| c.to_ascii_lowercase()).collect();
    let mut hits = Vec::new();
    for phrase in lexicon.phrases() {
        let needle: Vec<char> = phrase.chars().map(|c| c.to_ascii_lowercase()).collect();
        if needle.is_empty() || needle.len() > chars.len() {
            continue;
        }
        for start in 0..=chars.len() - needle.len() {
            if chars[start..start + needle.len()] != needle[..] {
                continue;
            }
            let before_ok = start == 0 || !chars[start - 1].is_alphanumeric();
            let end = start + needle.len();
            let after_ok = end == chars.len() || !chars[end].is_alphanumeric();
            if before_ok && after_ok {
                hits.push(TellHit {
                    phrase: phrase.clone(),
                    position: start,
                });
            }
        }
    }
    hits.sort_by(|a, b| a.position.cmp(&b.position).then(a.phrase.cmp(&b.phrase)));
    hits
}

/// Run the full cleaning pipeline on a raw generation.
///
/// Order is fixed: emoji removal, transliteration, boilerplate stripping,
/// whitespace normalization, then the `min_words` check. Returns the
/// normalized text together with a report; rejected inputs still return
/// their cleaned form for logging.
pub fn clean(text: &str, min_words: usize, lexicon: &TellLexicon) -> (String, NormalizationReport) {
    let input_chars = text.chars().count();
    let ascii = transliterate(&remove_emoji(text));
    let (stripped, did_strip) = strip_boilerplate(&ascii);
    let normalized = normalize_whitespace(&stripped);

    let rejected = if normalized.is_empty() && did_strip {
        Some(RejectReason::EmptyAfterStrip)
    } else if normalized.split_whitespace().count() < min_words {
        Some(RejectReason::TooShort)
    } else {
        None
    };

    let report = NormalizationReport {
        stripped_boilerplate: did_strip,
        removed_char_count: input_chars.saturating_sub(normalized.chars().count()),
        rejected,
        tells_found: find_tells(&normalized, lexicon),
    };
    (normalized, report)
}

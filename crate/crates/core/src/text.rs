//! Text normalization and tokenization shared by every module.
//!
//! All lexicon strings (actor mentions, roles, states, predicate labels) go
//! through [`normalize_mention`]; questions go through
//! [`normalize_question`], which keeps the trailing question mark.

use std::collections::BTreeSet;

use unicode_normalization::UnicodeNormalization;

use crate::error::EmptyMention;

/// Sentinel used for negative samples and unattributed slots.
pub const NONE: &str = "none";

const STOPWORDS: &[&str] = &[
    "a", "about", "after", "all", "also", "an", "and", "any", "are", "as", "at", "be", "been",
    "before", "being", "but", "by", "can", "could", "did", "do", "does", "for", "from", "had",
    "has", "have", "he", "her", "his", "how", "i", "if", "in", "into", "is", "it", "its", "of",
    "on", "or", "our", "she", "so", "such", "than", "that", "the", "their", "them", "then",
    "there", "these", "they", "this", "those", "to", "under", "up", "was", "we", "were", "what",
    "when", "where", "which", "while", "who", "whom", "why", "will", "with", "within", "would",
    "you",
];

pub fn is_stopword(token: &str) -> bool {
    STOPWORDS.binary_search(&token).is_ok()
}

fn fold(raw: &str) -> String {
    let lowered = raw.nfc().collect::<String>().to_lowercase();
    lowered.nfc().collect()
}

fn collapse_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn is_edge_junk(c: char) -> bool {
    !c.is_alphanumeric()
}

/// Lowercase, NFC-compose, strip leading/trailing punctuation and collapse
/// internal whitespace. Idempotent.
pub fn normalize_mention(raw: &str) -> Result<String, EmptyMention> {
    let folded = fold(raw);
    let trimmed = folded.trim_matches(is_edge_junk);
    let out = collapse_whitespace(trimmed);
    if out.is_empty() {
        Err(EmptyMention { raw: raw.to_string() })
    } else {
        Ok(out)
    }
}

/// Normalizes a question: same folding as mentions, but the result always
/// ends in a single `?`.
pub fn normalize_question(raw: &str) -> Result<String, EmptyMention> {
    let body = normalize_mention(raw)?;
    Ok(format!("{body}?"))
}

/// Normalizes an edge qualifier such as `[in downtown area]`. Empty input
/// and the `none` sentinel become `None`.
pub fn normalize_attributes(raw: Option<&str>) -> Option<String> {
    let raw = raw?;
    match normalize_mention(raw) {
        Ok(s) if s != NONE => Some(s),
        _ => None,
    }
}

/// Lowercased alphanumeric tokens in order of appearance.
pub fn tokens(text: &str) -> Vec<String> {
    fold(text)
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

/// Distinct non-stopword tokens.
pub fn content_tokens(text: &str) -> BTreeSet<String> {
    tokens(text).into_iter().filter(|t| !is_stopword(t)).collect()
}

/// Light plural folding: `officers` -> `officer`, but `address` stays.
pub fn stem(token: &str) -> String {
    if token.len() > 3 && token.ends_with('s') && !token.ends_with("ss") {
        token[..token.len() - 1].to_string()
    } else {
        token.to_string()
    }
}

pub fn stemmed_content_tokens(text: &str) -> BTreeSet<String> {
    content_tokens(text).iter().map(|t| stem(t)).collect()
}

/// Hex SHA-256 of the whitespace-collapsed, case-folded context.
pub fn context_hash(context: &str) -> String {
    use sha2::{Digest, Sha256};
    let key = collapse_whitespace(&fold(context));
    hex::encode(Sha256::digest(key.as_bytes()))
}

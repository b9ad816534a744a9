//! Lexical baselines: word overlap between the TODO and the code change
//! (TCO), between the TODO and the commit message (TMO), their disjunction
//! (TCMO), and a TF-IDF cosine checker against the added lines (IRSC).

mod tfidf;

use std::collections::BTreeSet;
use std::sync::LazyLock;

use crate::corpus::TripleSample;
use crate::diff::{COMMIT_ID_PLACEHOLDER, ISSUE_ID_PLACEHOLDER};
use crate::Status;

pub use tfidf::{irsc, IrscModel, TfIdfVector, DEFAULT_IRSC_THRESHOLD};

/// English function words ignored by the overlap baselines.
pub const STOPWORDS_TXT: &str = include_str!("stopwords.txt");

static STOPWORDS: LazyLock<BTreeSet<&'static str>> = LazyLock::new(|| {
    STOPWORDS_TXT
        .lines()
        .map(str::trim)
        .filter(|w| !w.is_empty())
        .collect()
});

pub fn is_stopword(word: &str) -> bool {
    STOPWORDS.contains(word)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OverlapConfig {
    pub stem: bool,
}

impl Default for OverlapConfig {
    fn default() -> Self {
        OverlapConfig { stem: true }
    }
}

/// Split one alphanumeric run on camel-case humps: `parseHTTPHeader` →
/// `parse`, `HTTP`, `Header`.
fn split_camel(word: &str) -> Vec<&str> {
    let chars: Vec<(usize, char)> = word.char_indices().collect();
    let mut parts = Vec::new();
    let mut start = 0;
    for i in 1..chars.len() {
        let (pos, c) = chars[i];
        let prev = chars[i - 1].1;
        let next_lower = chars.get(i + 1).is_some_and(|(_, n)| n.is_lowercase());
        let boundary = c.is_uppercase()
            && (prev.is_lowercase()
                || prev.is_ascii_digit()
                || (prev.is_uppercase() && next_lower));
        if boundary {
            parts.push(&word[start..pos]);
            start = pos;
        }
    }
    parts.push(&word[start..]);
    parts
}

/// Strip `ing`, `ed` or a plural `s` when at least three characters remain.
pub fn light_stem(word: &str) -> String {
    let n = word.chars().count();
    for suffix in ["ing", "ed"] {
        if word.ends_with(suffix) && n - suffix.len() >= 3 {
            return word[..word.len() - suffix.len()].to_string();
        }
    }
    if word.ends_with('s') && !word.ends_with("ss") && n > 3 {
        return word[..word.len() - 1].to_string();
    }
    word.to_string()
}

/// Word tokens in order, with repetition. Shared by the overlap sets and the
/// TF-IDF term counts.
pub fn word_tokens(text: &str, config: OverlapConfig) -> Vec<String> {
    let cleaned = text
        .replace(COMMIT_ID_PLACEHOLDER, " ")
        .replace(ISSUE_ID_PLACEHOLDER, " ");
    let mut out = Vec::new();
    for run in cleaned.split(|c: char| !c.is_alphanumeric()) {
        for part in split_camel(run) {
            let word = part.to_lowercase();
            if word.chars().count() < 2
                || word.chars().all(|c| c.is_ascii_digit())
                || word == "todo"
                || is_stopword(&word)
            {
                continue;
            }
            let word = if config.stem { light_stem(&word) } else { word };
            if word != "todo" && !is_stopword(&word) {
                out.push(word);
            }
        }
    }
    out
}

pub type TokenSet = BTreeSet<String>;

pub fn overlap_tokens(text: &str, config: OverlapConfig) -> TokenSet {
    word_tokens(text, config).into_iter().collect()
}

fn overlaps(a: &str, b: &str, config: OverlapConfig) -> Status {
    let left = overlap_tokens(a, config);
    let right = overlap_tokens(b, config);
    Status::from_resolved(!left.is_disjoint(&right))
}

/// TODO ↔ code change overlap.
pub fn tco(sample: &TripleSample, config: OverlapConfig) -> Status {
    overlaps(&sample.todo_comment, &sample.code_change, config)
}

/// TODO ↔ commit message overlap.
pub fn tmo(sample: &TripleSample, config: OverlapConfig) -> Status {
    overlaps(&sample.todo_comment, &sample.commit_msg, config)
}

pub fn tcmo(sample: &TripleSample, config: OverlapConfig) -> Status {
    Status::from_resolved(tco(sample, config).is_resolved() || tmo(sample, config).is_resolved())
}

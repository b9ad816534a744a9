use std::collections::HashMap;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const PAD: usize = 0;
pub const UNK: usize = 1;
pub const CLS: usize = 2;
const SPECIALS: [&str; 3] = ["<pad>", "<unk>", "<cls>"];

static TOKEN: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"<commit_id>|<issue_id>|[\p{L}\p{N}]+|[^\s\p{L}\p{N}]").unwrap());

/// Lowercased word and punctuation tokens; id placeholders stay whole.
pub fn tokenize(text: &str) -> Vec<String> {
    let lower = text.to_lowercase();
    TOKEN
        .find_iter(&lower)
        .map(|m| m.as_str().to_string())
        .collect()
}

/// Token ↔ index map. Index 0 is padding, 1 unknown, 2 the class token.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "VocabRepr", into = "VocabRepr")]
pub struct Vocab {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
    min_freq: usize,
}

#[derive(Serialize, Deserialize)]
struct VocabRepr {
    min_freq: usize,
    tokens: Vec<String>,
}

impl From<VocabRepr> for Vocab {
    fn from(r: VocabRepr) -> Self {
        let index = r
            .tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Vocab {
            tokens: r.tokens,
            index,
            min_freq: r.min_freq,
        }
    }
}

impl From<Vocab> for VocabRepr {
    fn from(v: Vocab) -> Self {
        VocabRepr {
            min_freq: v.min_freq,
            tokens: v.tokens,
        }
    }
}

impl Vocab {
    /// Tokens seen at least `min_freq` times, in order of first occurrence.
    pub fn build<'a, I>(docs: I, min_freq: usize) -> Result<Self>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut counts: HashMap<String, usize> = HashMap::new();
        let mut order: Vec<String> = Vec::new();
        let mut n_docs = 0;
        for doc in docs {
            n_docs += 1;
            for tok in tokenize(doc) {
                let c = counts.entry(tok.clone()).or_insert(0);
                if *c == 0 {
                    order.push(tok);
                }
                *c += 1;
            }
        }
        if n_docs == 0 {
            return Err(Error::EmptyCorpus);
        }
        let mut tokens: Vec<String> = SPECIALS.iter().map(|s| s.to_string()).collect();
        tokens.extend(
            order
                .into_iter()
                .filter(|t| counts[t] >= min_freq && !SPECIALS.contains(&t.as_str())),
        );
        Ok(VocabRepr { min_freq, tokens }.into())
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn min_freq(&self) -> usize {
        self.min_freq
    }

    pub fn id(&self, token: &str) -> usize {
        self.index.get(token).copied().unwrap_or(UNK)
    }

    pub fn token(&self, id: usize) -> Option<&str> {
        self.tokens.get(id).map(String::as_str)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    /// Token ids of `text`, keeping the first `max_len`.
    pub fn encode(&self, text: &str, max_len: usize) -> Vec<usize> {
        tokenize(text)
            .iter()
            .take(max_len)
            .map(|t| self.id(t))
            .collect()
    }
}

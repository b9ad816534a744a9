//! Generated triples with a known decision rule, for smoke tests and demos.
//!
//! Positives carry a resolution word in each of the three fields; negatives
//! carry a pending word instead. Both share the same filler vocabulary.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Label, TodoLineKind, TripleSample};
use crate::diff::normalize_message;

pub const RESOLUTION_WORDS: &[&str] = &["implement", "handle", "support", "validate", "cleanup"];
pub const PENDING_WORDS: &[&str] = &["refactor", "rename", "reformat", "bump", "restyle"];
pub const FILLER_WORDS: &[&str] = &[
    "cache", "parser", "config", "request", "buffer", "index", "session", "token", "worker",
    "record", "client", "schema", "loader", "queue", "entry", "result",
];

/// The generator's decision rule: positive iff the TODO names a resolution word.
pub fn planted_label(todo_comment: &str) -> Label {
    let lower = todo_comment.to_lowercase();
    let hit = lower
        .split(|c: char| !c.is_alphanumeric())
        .any(|w| RESOLUTION_WORDS.contains(&w));
    if hit {
        Label::Positive
    } else {
        Label::Negative
    }
}

/// `n` samples alternating positive/negative, deterministic in `seed`.
pub fn synthetic_corpus(n: usize, seed: u64) -> Vec<TripleSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| synthetic_sample(i, i % 2 == 0, &mut rng))
        .collect()
}

fn synthetic_sample<R: Rng>(i: usize, positive: bool, rng: &mut R) -> TripleSample {
    let words = if positive {
        RESOLUTION_WORDS
    } else {
        PENDING_WORDS
    };
    let n_extra = rng.random_range(0..3);
    let mut pick = |set: &[&'static str]| *set.choose(rng).expect("non-empty word set");
    let (a, b, c) = (pick(FILLER_WORDS), pick(FILLER_WORDS), pick(FILLER_WORDS));
    let (w1, w2, w3) = (pick(words), pick(words), pick(words));
    let mut code = format!("-    {a} = none\n+    {a}_{b} = {w1}_{a}({c})");
    for _ in 0..n_extra {
        let d = pick(FILLER_WORDS);
        code.push_str(&format!("\n+    {d} = {d}.get({b})"));
    }
    let (label, kind) = if positive {
        (Label::Positive, TodoLineKind::Removed)
    } else {
        (Label::Negative, TodoLineKind::Context)
    };
    TripleSample {
        repo: "synthetic".into(),
        commit_id: format!("{i:07x}"),
        todo_comment: format!("todo: {w2} {a} {b}"),
        code_change: code,
        commit_msg: normalize_message(&format!("{w3} {c} {b} in {a}")).into_string(),
        label,
        todo_line_kind: kind,
    }
}

//! Turning mined commits into labeled triples, and the corpus file format.
//!
//! A corpus file holds one JSON object per line with the fields `repo`,
//! `commit_id`, `todo_comment`, `code_change`, `commit_msg`, `label` and
//! `todo_line_kind`, in that order. JSON string escaping keeps every record on
//! a single line.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diff::{
    normalize_diff, normalize_message, parse_unified_diff, LineKind, NormalizedMessage, RawCommit,
};
use crate::error::{Error, Result};
use crate::todo::{
    associate, carve_code_change, extract_comments, find_todos, single_todo_filter, CodeChange,
    Language, TodoComment,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Positive,
    Negative,
}

impl Label {
    pub fn is_positive(self) -> bool {
        matches!(self, Label::Positive)
    }
}

/// Where the TODO sat in the diff; determines the label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TodoLineKind {
    Removed,
    Context,
}

impl TodoLineKind {
    pub fn label(self) -> Label {
        match self {
            TodoLineKind::Removed => Label::Positive,
            TodoLineKind::Context => Label::Negative,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripleSample {
    pub repo: String,
    pub commit_id: String,
    pub todo_comment: String,
    pub code_change: String,
    pub commit_msg: String,
    pub label: Label,
    pub todo_line_kind: TodoLineKind,
}

impl TripleSample {
    /// Added lines of the code change, markers stripped.
    pub fn lines_added(&self) -> String {
        self.code_change
            .lines()
            .filter_map(|l| l.strip_prefix('+'))
            .collect::<Vec<_>>()
            .join("\n")
    }

    fn check(&self) -> std::result::Result<(), String> {
        if self.label != self.todo_line_kind.label() {
            return Err(format!(
                "label {:?} contradicts todo_line_kind {:?}",
                self.label, self.todo_line_kind
            ));
        }
        for (name, value) in [
            ("todo_comment", &self.todo_comment),
            ("code_change", &self.code_change),
            ("commit_msg", &self.commit_msg),
        ] {
            if value.is_empty() {
                return Err(format!("`{name}` is empty"));
            }
        }
        Ok(())
    }
}

/// Map a TODO's line kind to its label. `None` means the triple is ignored:
/// an added TODO is being introduced, not resolved.
pub fn label_for_kind(kind: LineKind) -> Option<TodoLineKind> {
    match kind {
        LineKind::Removed => Some(TodoLineKind::Removed),
        LineKind::Context => Some(TodoLineKind::Context),
        LineKind::Added => None,
    }
}

/// Build the labeled sample, or `None` for ignored placements.
pub fn label_triple(
    todo: &TodoComment,
    code_change: &CodeChange,
    message: &NormalizedMessage,
    repo: &str,
    commit_id: &str,
) -> Option<TripleSample> {
    let kind = label_for_kind(todo.kind())?;
    Some(TripleSample {
        repo: repo.to_string(),
        commit_id: commit_id.to_string(),
        todo_comment: todo.text.clone(),
        code_change: code_change.rendered.clone(),
        commit_msg: message.as_str().to_string(),
        label: kind.label(),
        todo_line_kind: kind,
    })
}

pub fn is_todo_commit(commit: &RawCommit) -> bool {
    commit.diff_text.to_lowercase().contains("todo")
}

pub fn identify_todo_commits<I>(commits: I) -> impl Iterator<Item = RawCommit>
where
    I: IntoIterator<Item = RawCommit>,
{
    commits.into_iter().filter(is_todo_commit)
}

/// Why a commit produced no sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DropReason {
    NoTodoInDiff,
    MalformedDiff,
    TooLarge,
    NoTodoComment,
    MultipleTodos,
    NotAssociated,
    AddedTodo,
    EmptyCodeChange,
    EmptyMessage,
}

impl DropReason {
    pub const ALL: [DropReason; 9] = [
        DropReason::NoTodoInDiff,
        DropReason::MalformedDiff,
        DropReason::TooLarge,
        DropReason::NoTodoComment,
        DropReason::MultipleTodos,
        DropReason::NotAssociated,
        DropReason::AddedTodo,
        DropReason::EmptyCodeChange,
        DropReason::EmptyMessage,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DropReason::NoTodoInDiff => "no-todo-in-diff",
            DropReason::MalformedDiff => "malformed-diff",
            DropReason::TooLarge => "diff-too-large",
            DropReason::NoTodoComment => "no-todo-comment",
            DropReason::MultipleTodos => "multiple-todos",
            DropReason::NotAssociated => "not-associated",
            DropReason::AddedTodo => "added-todo",
            DropReason::EmptyCodeChange => "empty-code-change",
            DropReason::EmptyMessage => "empty-message",
        }
    }
}

/// A TODO that survived extraction, filtering and association.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub todo: TodoComment,
    /// Path of the file holding the TODO.
    pub path: String,
    pub code_change: CodeChange,
    pub message: NormalizedMessage,
}

/// Run normalization, extraction, the single-TODO filter, association and
/// carving on one commit.
pub fn extract_candidate(
    commit: &RawCommit,
    language: Language,
    context_lines: usize,
) -> std::result::Result<Candidate, DropReason> {
    if !is_todo_commit(commit) {
        return Err(DropReason::NoTodoInDiff);
    }
    let doc = match parse_unified_diff(&commit.diff_text) {
        Ok(doc) => doc,
        Err(e) => {
            log::debug!("{}: {e}", commit.commit_id);
            return Err(DropReason::MalformedDiff);
        }
    };
    let doc = normalize_diff(doc).map_err(|_| DropReason::TooLarge)?;
    let comments = extract_comments(&doc, language);
    let todos = find_todos(&comments, language);
    let todo = match todos.len() {
        0 => return Err(DropReason::NoTodoComment),
        1 => single_todo_filter(todos).expect("one todo"),
        _ => return Err(DropReason::MultipleTodos),
    };
    if !associate(&todo, &doc, context_lines) {
        return Err(DropReason::NotAssociated);
    }
    let code_change = carve_code_change(&doc, &todo);
    if code_change.is_empty() {
        return Err(DropReason::EmptyCodeChange);
    }
    let message = normalize_message(&commit.message);
    if message.is_empty() {
        return Err(DropReason::EmptyMessage);
    }
    let path = doc
        .file_of(&todo.line)
        .map(|f| f.path().to_string())
        .unwrap_or_default();
    Ok(Candidate {
        todo,
        path,
        code_change,
        message,
    })
}

pub fn sample_from_commit(
    commit: &RawCommit,
    language: Language,
    context_lines: usize,
) -> std::result::Result<TripleSample, DropReason> {
    let c = extract_candidate(commit, language, context_lines)?;
    label_triple(
        &c.todo,
        &c.code_change,
        &c.message,
        &commit.repo,
        &commit.commit_id,
    )
    .ok_or(DropReason::AddedTodo)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DropCounts(std::collections::BTreeMap<DropReason, usize>);

impl DropCounts {
    pub fn record(&mut self, reason: DropReason) {
        *self.0.entry(reason).or_default() += 1;
    }

    pub fn get(&self, reason: DropReason) -> usize {
        self.0.get(&reason).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.0.values().sum()
    }
}

#[derive(Debug, Clone, Default)]
pub struct BuildOutcome {
    pub samples: Vec<TripleSample>,
    pub todo_commits: usize,
    pub drops: DropCounts,
}

/// Build samples from a commit batch. Commits are processed in parallel;
/// output order follows input order.
pub fn build_samples(
    commits: &[RawCommit],
    language: Language,
    context_lines: usize,
) -> BuildOutcome {
    let results: Vec<_> = commits
        .par_iter()
        .map(|c| sample_from_commit(c, language, context_lines))
        .collect();
    let mut out = BuildOutcome::default();
    for result in results {
        match result {
            Ok(sample) => {
                out.todo_commits += 1;
                out.samples.push(sample);
            }
            Err(DropReason::NoTodoInDiff) => out.drops.record(DropReason::NoTodoInDiff),
            Err(reason) => {
                out.todo_commits += 1;
                out.drops.record(reason);
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetSplit {
    pub train: Vec<TripleSample>,
    pub val: Vec<TripleSample>,
    pub test: Vec<TripleSample>,
    pub seed: u64,
}

pub const MIN_SPLIT_SIZE: usize = 10;

/// Sizes of the validation and test chunks: 10% each, rounded half down so
/// the remainder lands in train.
pub fn holdout_size(n: usize) -> usize {
    (n + 4) / 10
}

/// Seeded shuffle followed by an 80/10/10 cut.
pub fn split_dataset(samples: &[TripleSample], seed: u64) -> Result<DatasetSplit> {
    let n = samples.len();
    if n < MIN_SPLIT_SIZE {
        return Err(Error::TooFewSamples(n));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let holdout = holdout_size(n);
    let n_train = n - 2 * holdout;
    let pick = |idx: &[usize]| idx.iter().map(|&i| samples[i].clone()).collect::<Vec<_>>();
    Ok(DatasetSplit {
        train: pick(&order[..n_train]),
        val: pick(&order[n_train..n_train + holdout]),
        test: pick(&order[n_train + holdout..]),
        seed,
    })
}

pub fn write_corpus(samples: &[TripleSample], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for s in samples {
        let line = serde_json::to_string(s).expect("sample serializes");
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn parse_corpus<R: BufRead>(reader: R, origin: &Path) -> Result<Vec<TripleSample>> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(origin, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let violation = |reason: String| Error::SchemaViolation {
            line_no: idx + 1,
            reason,
        };
        let sample: TripleSample =
            serde_json::from_str(&line).map_err(|e| violation(e.to_string()))?;
        sample.check().map_err(violation)?;
        out.push(sample);
    }
    Ok(out)
}

pub fn read_corpus(path: &Path) -> Result<Vec<TripleSample>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_corpus(BufReader::new(file), path)
}

/// Seeded draw of `n_pos` positives and `n_neg` negatives for manual label
/// auditing, positives first.
pub fn sample_for_manual_check(
    samples: &[TripleSample],
    n_pos: usize,
    n_neg: usize,
    seed: u64,
) -> Result<Vec<TripleSample>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n_pos + n_neg);
    for (label, wanted) in [(Label::Positive, n_pos), (Label::Negative, n_neg)] {
        let pool: Vec<&TripleSample> = samples.iter().filter(|s| s.label == label).collect();
        if pool.len() < wanted {
            return Err(Error::Insufficient {
                label,
                requested: wanted,
                available: pool.len(),
            });
        }
        out.extend(pool.choose_multiple(&mut rng, wanted).map(|s| (*s).clone()));
    }
    Ok(out)
}

/// Plain-text review sheet, one block per sample with a blank verdict field.
pub fn render_manual_check(samples: &[TripleSample]) -> String {
    let mut out = String::new();
    for (i, s) in samples.iter().enumerate() {
        out.push_str(&format!(
            "=== sample {} ({}:{}) auto-label: {:?}\n",
            i + 1,
            s.repo,
            s.commit_id,
            s.label
        ));
        out.push_str(&format!("todo_comment: {}\n", s.todo_comment));
        out.push_str(&format!("commit_msg:   {}\n", s.commit_msg));
        out.push_str("code_change:\n");
        for line in s.code_change.lines() {
            out.push_str("    ");
            out.push_str(line);
            out.push('\n');
        }
        out.push_str("verdict (resolved/unresolved): \n\n");
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CorpusStats {
    pub todo_commits: usize,
    pub positives: usize,
    pub negatives: usize,
    pub train: usize,
    pub val: usize,
    pub test: usize,
}

impl CorpusStats {
    pub fn from_samples(samples: &[TripleSample], todo_commits: usize) -> Self {
        let positives = samples.iter().filter(|s| s.label.is_positive()).count();
        let n = samples.len();
        let (train, holdout) = if n >= MIN_SPLIT_SIZE {
            let h = holdout_size(n);
            (n - 2 * h, h)
        } else {
            (n, 0)
        };
        CorpusStats {
            todo_commits,
            positives,
            negatives: n - positives,
            train,
            val: holdout,
            test: holdout,
        }
    }
}

impl fmt::Display for CorpusStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# TODO Commits      {}", self.todo_commits)?;
        writeln!(f, "# Positive samples  {}", self.positives)?;
        writeln!(f, "# Negative samples  {}", self.negatives)?;
        writeln!(f, "# Train Set         {}", self.train)?;
        writeln!(f, "# Val Set           {}", self.val)?;
        write!(f, "# Test Set          {}", self.test)
    }
}

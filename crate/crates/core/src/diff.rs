//! Unified diff parsing and normalization.
//!
//! The parser accepts the text `git log -p` / `git show` produce: optional
//! `diff --git` headers, `---`/`+++` file headers, `@@` hunk headers and hunk
//! bodies. Everything outside hunk bodies is treated as metadata and never
//! shows up as a [`DiffLine`].

use std::sync::LazyLock;

use regex::{Captures, Regex};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Diffs larger than this many bytes (2^20) are dropped from the corpus.
pub const MAX_DIFF_BYTES: usize = 1 << 20;

pub const COMMIT_ID_PLACEHOLDER: &str = "<commit_id>";
pub const ISSUE_ID_PLACEHOLDER: &str = "<issue_id>";

static HUNK_HEADER: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^@@ -(\d+)(?:,(\d+))? \+(\d+)(?:,(\d+))? @@").unwrap());
static HEX_RUN: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\b[0-9a-f]{7,40}\b").unwrap());
static ISSUE_REF: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"#[0-9]+\b").unwrap());

/// One revision as produced by the miner.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawCommit {
    pub repo: String,
    pub commit_id: String,
    pub message: String,
    pub diff_text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LineKind {
    Added,
    Removed,
    Context,
}

impl LineKind {
    pub fn marker(self) -> char {
        match self {
            LineKind::Added => '+',
            LineKind::Removed => '-',
            LineKind::Context => ' ',
        }
    }

    pub fn is_change(self) -> bool {
        !matches!(self, LineKind::Context)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiffLine {
    pub kind: LineKind,
    /// Line content with the diff marker stripped.
    pub text: String,
    pub file_index: usize,
    /// Ordinal of the hunk across the whole document.
    pub hunk_index: usize,
    /// Ordinal of the line inside its hunk.
    pub position: usize,
    /// Line number in the pre-image, for removed and context lines.
    pub old_line: Option<usize>,
    /// Line number in the post-image, for added and context lines.
    pub new_line: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FileHeader {
    pub old_path: String,
    pub new_path: String,
}

impl FileHeader {
    /// The path that best names the file: the post-image unless it was deleted.
    pub fn path(&self) -> &str {
        if self.new_path.is_empty() || self.new_path == "/dev/null" {
            &self.old_path
        } else {
            &self.new_path
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DiffDocument {
    pub lines: Vec<DiffLine>,
    /// Byte length of the diff text before any normalization.
    pub byte_size: usize,
    pub files: Vec<FileHeader>,
}

impl DiffDocument {
    pub fn file_of(&self, line: &DiffLine) -> Option<&FileHeader> {
        self.files.get(line.file_index)
    }
}

/// Signal that a diff exceeded [`MAX_DIFF_BYTES`] and should be dropped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rejected {
    pub byte_size: usize,
}

/// Lowercased first sentence of a commit message with ids replaced.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NormalizedMessage(String);

impl NormalizedMessage {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_string(self) -> String {
        self.0
    }
}

impl std::fmt::Display for NormalizedMessage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

struct HunkCursor {
    old_remaining: usize,
    new_remaining: usize,
    old_next: usize,
    new_next: usize,
    position: usize,
}

struct FileCursor {
    saw_old_header: bool,
    has_hunks: bool,
}

fn strip_path(raw: &str) -> String {
    let raw = raw.split('\t').next().unwrap_or(raw).trim_end();
    let raw = raw.trim_matches('"');
    raw.strip_prefix("a/")
        .or_else(|| raw.strip_prefix("b/"))
        .unwrap_or(raw)
        .to_string()
}

fn parse_git_header(rest: &str) -> FileHeader {
    // "a/old b/new"; ambiguous with spaces in paths, the ---/+++ headers win later.
    match rest.find(" b/") {
        Some(split) => FileHeader {
            old_path: strip_path(&rest[..split]),
            new_path: strip_path(&rest[split + 1..]),
        },
        None => FileHeader::default(),
    }
}

/// Parse unified diff text into line-tagged form.
pub fn parse_unified_diff(diff_text: &str) -> Result<DiffDocument> {
    let mut doc = DiffDocument {
        byte_size: diff_text.len(),
        ..Default::default()
    };
    let mut file: Option<FileCursor> = None;
    let mut hunk: Option<HunkCursor> = None;
    let mut hunk_count = 0usize;

    for (idx, raw) in diff_text.split_terminator('\n').enumerate() {
        let line_no = idx + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);

        if let Some(h) = hunk.as_mut() {
            let malformed = |reason: &str| Error::MalformedDiff {
                line_no,
                reason: reason.to_string(),
            };
            let (kind, body) = match line.chars().next() {
                Some('+') => (LineKind::Added, &line[1..]),
                Some('-') => (LineKind::Removed, &line[1..]),
                Some(' ') => (LineKind::Context, &line[1..]),
                Some('\\') => continue,
                _ => return Err(malformed("hunk body line without a +/-/space marker")),
            };
            let (old_line, new_line) = match kind {
                LineKind::Added => {
                    if h.new_remaining == 0 {
                        return Err(malformed("more added lines than the hunk header declares"));
                    }
                    h.new_remaining -= 1;
                    h.new_next += 1;
                    (None, Some(h.new_next - 1))
                }
                LineKind::Removed => {
                    if h.old_remaining == 0 {
                        return Err(malformed(
                            "more removed lines than the hunk header declares",
                        ));
                    }
                    h.old_remaining -= 1;
                    h.old_next += 1;
                    (Some(h.old_next - 1), None)
                }
                LineKind::Context => {
                    if h.old_remaining == 0 || h.new_remaining == 0 {
                        return Err(malformed(
                            "more context lines than the hunk header declares",
                        ));
                    }
                    h.old_remaining -= 1;
                    h.new_remaining -= 1;
                    h.old_next += 1;
                    h.new_next += 1;
                    (Some(h.old_next - 1), Some(h.new_next - 1))
                }
            };
            doc.lines.push(DiffLine {
                kind,
                text: body.to_string(),
                file_index: doc.files.len() - 1,
                hunk_index: hunk_count - 1,
                position: h.position,
                old_line,
                new_line,
            });
            h.position += 1;
            if h.old_remaining == 0 && h.new_remaining == 0 {
                hunk = None;
            }
            continue;
        }

        if let Some(rest) = line.strip_prefix("diff --git ") {
            doc.files.push(parse_git_header(rest));
            file = Some(FileCursor {
                saw_old_header: false,
                has_hunks: false,
            });
        } else if let Some(rest) = line.strip_prefix("--- ") {
            let reuse = matches!(&file, Some(f) if !f.saw_old_header && !f.has_hunks);
            if !reuse {
                doc.files.push(FileHeader::default());
            }
            doc.files.last_mut().unwrap().old_path = strip_path(rest);
            file = Some(FileCursor {
                saw_old_header: true,
                has_hunks: false,
            });
        } else if let Some(rest) = line.strip_prefix("+++ ") {
            if file.is_none() {
                doc.files.push(FileHeader::default());
                file = Some(FileCursor {
                    saw_old_header: false,
                    has_hunks: false,
                });
            }
            doc.files.last_mut().unwrap().new_path = strip_path(rest);
        } else if let Some(caps) = HUNK_HEADER.captures(line) {
            let num = |i: usize, default: usize| {
                caps.get(i)
                    .map(|m| m.as_str().parse::<usize>().unwrap_or(default))
                    .unwrap_or(default)
            };
            match file.as_mut() {
                Some(f) => f.has_hunks = true,
                None => {
                    doc.files.push(FileHeader::default());
                    file = Some(FileCursor {
                        saw_old_header: false,
                        has_hunks: true,
                    });
                }
            }
            hunk_count += 1;
            let cursor = HunkCursor {
                old_next: num(1, 0),
                old_remaining: num(2, 1),
                new_next: num(3, 0),
                new_remaining: num(4, 1),
                position: 0,
            };
            if cursor.old_remaining > 0 || cursor.new_remaining > 0 {
                hunk = Some(cursor);
            }
        }
        // Anything else outside a hunk (index lines, modes, binary notices,
        // commit preamble) is metadata.
    }

    if let Some(h) = hunk {
        return Err(Error::MalformedDiff {
            line_no: diff_text.split_terminator('\n').count(),
            reason: format!(
                "hunk ended {} old / {} new lines short",
                h.old_remaining, h.new_remaining
            ),
        });
    }
    Ok(doc)
}

fn replace_commit_ids(text: &str) -> String {
    HEX_RUN
        .replace_all(text, |caps: &Captures| {
            let run = &caps[0];
            if run.bytes().any(|b| b.is_ascii_digit()) {
                COMMIT_ID_PLACEHOLDER.to_string()
            } else {
                run.to_string()
            }
        })
        .into_owned()
}

/// Lowercase every line and replace commit hashes; reject oversized diffs.
pub fn normalize_diff(doc: DiffDocument) -> std::result::Result<DiffDocument, Rejected> {
    if doc.byte_size > MAX_DIFF_BYTES {
        return Err(Rejected {
            byte_size: doc.byte_size,
        });
    }
    let mut doc = doc;
    for line in &mut doc.lines {
        line.text = normalize_text(&line.text);
    }
    Ok(doc)
}

/// The per-line transformation applied by [`normalize_diff`].
pub fn normalize_text(text: &str) -> String {
    replace_commit_ids(&text.to_lowercase())
}

fn first_sentence(text: &str) -> &str {
    let newline = text.find('\n');
    let bytes = text.as_bytes();
    let period = text.char_indices().find_map(|(i, c)| {
        (c == '.' && bytes.get(i + 1).is_none_or(|b| b.is_ascii_whitespace())).then_some(i + 1)
    });
    match (newline, period) {
        (Some(n), Some(p)) if p <= n => &text[..p],
        (Some(n), _) => &text[..n],
        (None, Some(p)) => &text[..p],
        (None, None) => text,
    }
}

pub fn normalize_message(message: &str) -> NormalizedMessage {
    let lowered = message.to_lowercase();
    let sentence = first_sentence(lowered.trim_start());
    let with_issues = ISSUE_REF.replace_all(sentence, ISSUE_ID_PLACEHOLDER);
    NormalizedMessage(replace_commit_ids(&with_issues).trim().to_string())
}

/// Split lines into (added, removed, equal).
pub fn line_scopes(doc: &DiffDocument) -> (Vec<&DiffLine>, Vec<&DiffLine>, Vec<&DiffLine>) {
    let mut added = Vec::new();
    let mut removed = Vec::new();
    let mut equal = Vec::new();
    for line in &doc.lines {
        match line.kind {
            LineKind::Added => added.push(line),
            LineKind::Removed => removed.push(line),
            LineKind::Context => equal.push(line),
        }
    }
    (added, removed, equal)
}

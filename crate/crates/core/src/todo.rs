//! Comment extraction and TODO identification over diff lines.
//!
//! Comments are found with a small per-line lexer that tracks string-literal
//! state, so `"#"` or `"//"` inside quotes never starts a comment. Block
//! comments are handled line by line: diffs routinely cut them in half.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::diff::{DiffDocument, DiffLine, LineKind};

/// Default association window, matching `git diff -U3`.
pub const DEFAULT_CONTEXT_LINES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    Python,
    Java,
}

impl Language {
    pub fn extensions(self) -> &'static [&'static str] {
        match self {
            Language::Python => &["py", "pyw", "pyi"],
            Language::Java => &["java"],
        }
    }

    /// Whether a file at `path` is written in this language. Paths without
    /// headers (bare hunks) are accepted.
    pub fn applies_to(self, path: &str) -> bool {
        if path.is_empty() {
            return true;
        }
        let lower = path.to_ascii_lowercase();
        match lower.rsplit_once('.') {
            Some((_, ext)) => self.extensions().contains(&ext),
            None => false,
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Language::Python => "python",
            Language::Java => "java",
        })
    }
}

impl FromStr for Language {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "python" | "py" => Ok(Language::Python),
            "java" => Ok(Language::Java),
            other => Err(format!("unsupported language `{other}`")),
        }
    }
}

/// A comment found on one diff line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Comment {
    pub line: DiffLine,
    /// Index of `line` within the document.
    pub line_index: usize,
    /// Comment body with delimiters removed and whitespace trimmed.
    pub text: String,
    /// Byte offset of the opening delimiter in the line text.
    pub delimiter_start: usize,
}

impl Comment {
    /// Code preceding the comment on the same line.
    pub fn code_prefix(&self) -> &str {
        self.line.text[..self.delimiter_start].trim_end()
    }

    pub fn is_comment_only(&self) -> bool {
        self.code_prefix().trim().is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TodoComment {
    pub text: String,
    pub line: DiffLine,
    pub line_index: usize,
    pub delimiter_start: usize,
    pub language: Language,
}

impl TodoComment {
    pub fn kind(&self) -> LineKind {
        self.line.kind
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeChange {
    pub lines: Vec<DiffLine>,
    /// One line per diff line, prefixed with its `+`/`-`/space marker.
    pub rendered: String,
}

impl CodeChange {
    pub fn is_empty(&self) -> bool {
        self.rendered.trim().is_empty()
    }
}

/// (delimiter start, body start, body end) spans of comments in one line.
type Span = (usize, usize, usize);

fn scan_python(text: &str) -> Vec<Span> {
    let bytes = text.as_bytes();
    let mut i = 0;
    let mut quote: Option<(u8, bool)> = None;
    while i < bytes.len() {
        let b = bytes[i];
        match quote {
            Some((q, triple)) => {
                if b == b'\\' {
                    i += 2;
                    continue;
                }
                if b == q {
                    if !triple {
                        quote = None;
                    } else if bytes[i..].starts_with(&[q, q, q]) {
                        quote = None;
                        i += 3;
                        continue;
                    }
                }
            }
            None => match b {
                b'#' => return vec![(i, i + 1, bytes.len())],
                b'"' | b'\'' => {
                    let triple = bytes[i..].starts_with(&[b, b, b]);
                    quote = Some((b, triple));
                    if triple {
                        i += 3;
                        continue;
                    }
                }
                _ => {}
            },
        }
        i += 1;
    }
    Vec::new()
}

fn scan_java(text: &str) -> Vec<Span> {
    let bytes = text.as_bytes();
    let trimmed_start = text.len() - text.trim_start().len();
    // Continuation line of a block comment: " * TODO ..." or " */".
    if bytes.get(trimmed_start) == Some(&b'*') && bytes.get(trimmed_start + 1) != Some(&b'=') {
        return vec![(trimmed_start, trimmed_start, bytes.len())];
    }
    let mut spans = Vec::new();
    let mut i = 0;
    let mut quote: Option<(u8, bool)> = None;
    while i < bytes.len() {
        let b = bytes[i];
        match quote {
            Some((q, triple)) => {
                if b == b'\\' {
                    i += 2;
                    continue;
                }
                if b == q {
                    if !triple {
                        quote = None;
                    } else if bytes[i..].starts_with(b"\"\"\"") {
                        quote = None;
                        i += 3;
                        continue;
                    }
                }
            }
            None => {
                if bytes[i..].starts_with(b"//") {
                    spans.push((i, i + 2, bytes.len()));
                    return spans;
                }
                if bytes[i..].starts_with(b"/*") {
                    match text[i + 2..].find("*/") {
                        Some(rel) => {
                            let end = i + 2 + rel;
                            spans.push((i, i + 2, end));
                            i = end + 2;
                            continue;
                        }
                        None => {
                            spans.push((i, i + 2, bytes.len()));
                            return spans;
                        }
                    }
                }
                if b == b'"' || b == b'\'' {
                    let triple = b == b'"' && bytes[i..].starts_with(b"\"\"\"");
                    quote = Some((b, triple));
                    if triple {
                        i += 3;
                        continue;
                    }
                }
            }
        }
        i += 1;
    }
    spans
}

fn clean_body(body: &str, language: Language) -> String {
    let body = body.trim();
    let body = match language {
        Language::Python => body.trim_start_matches('#'),
        Language::Java => {
            let body = body.strip_suffix("*/").unwrap_or(body);
            body.trim_start_matches('*').trim_start_matches('/')
        }
    };
    body.trim().to_string()
}

/// Comments found on a single line of source text.
pub fn comments_in_line(text: &str, language: Language) -> Vec<(usize, String)> {
    let spans = match language {
        Language::Python => scan_python(text),
        Language::Java => scan_java(text),
    };
    spans
        .into_iter()
        .map(|(start, body_start, body_end)| {
            (start, clean_body(&text[body_start..body_end], language))
        })
        .filter(|(_, body)| !body.is_empty())
        .collect()
}

/// Comments on every line of `doc` that belongs to a `language` source file.
pub fn extract_comments(doc: &DiffDocument, language: Language) -> Vec<Comment> {
    let mut out = Vec::new();
    for (line_index, line) in doc.lines.iter().enumerate() {
        let path = doc.file_of(line).map(|f| f.path()).unwrap_or("");
        if !language.applies_to(path) {
            continue;
        }
        for (delimiter_start, text) in comments_in_line(&line.text, language) {
            out.push(Comment {
                line: line.clone(),
                line_index,
                text,
                delimiter_start,
            });
        }
    }
    out
}

/// True when `text` holds "todo" bounded by non-alphanumerics, ignoring case.
pub fn contains_todo_token(text: &str) -> bool {
    let lower = text.to_lowercase();
    let bytes = lower.as_bytes();
    lower.match_indices("todo").any(|(i, _)| {
        let before = i.checked_sub(1).map(|j| bytes[j]);
        let after = bytes.get(i + 4).copied();
        !before.is_some_and(|b| b.is_ascii_alphanumeric())
            && !after.is_some_and(|b| b.is_ascii_alphanumeric())
    })
}

pub fn find_todos(comments: &[Comment], language: Language) -> Vec<TodoComment> {
    comments
        .iter()
        .filter(|c| contains_todo_token(&c.text))
        .map(|c| TodoComment {
            text: c.text.clone(),
            line: c.line.clone(),
            line_index: c.line_index,
            delimiter_start: c.delimiter_start,
            language,
        })
        .collect()
}

/// The TODO of a diff iff it is the only one; multi-TODO diffs are usually
/// comment edits and carry no resolution signal.
pub fn single_todo_filter(mut todos: Vec<TodoComment>) -> Option<TodoComment> {
    if todos.len() == 1 {
        todos.pop()
    } else {
        None
    }
}

/// Whether some added or removed line sits within `context_lines` positions
/// of the TODO line inside the same hunk.
pub fn associate(todo: &TodoComment, doc: &DiffDocument, context_lines: usize) -> bool {
    let anchor = &todo.line;
    doc.lines.iter().enumerate().any(|(i, line)| {
        i != todo.line_index
            && line.kind.is_change()
            && line.file_index == anchor.file_index
            && line.hunk_index == anchor.hunk_index
            && line.position.abs_diff(anchor.position) <= context_lines
    })
}

/// Every diff line except the TODO itself. A comment-only TODO line is
/// dropped; a TODO trailing code keeps the code part.
pub fn carve_code_change(doc: &DiffDocument, todo: &TodoComment) -> CodeChange {
    let mut lines = Vec::with_capacity(doc.lines.len());
    for (i, line) in doc.lines.iter().enumerate() {
        if i != todo.line_index {
            lines.push(line.clone());
            continue;
        }
        let prefix = line.text[..todo.delimiter_start].trim_end();
        if !prefix.trim().is_empty() {
            let mut kept = line.clone();
            kept.text = prefix.to_string();
            lines.push(kept);
        }
    }
    let rendered = lines
        .iter()
        .map(|l| format!("{}{}", l.kind.marker(), l.text))
        .collect::<Vec<_>>()
        .join("\n");
    CodeChange { lines, rendered }
}

//! Finds TODOs that a model judges resolved by some commit but that were
//! left in place.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{extract_candidate, label_triple, Candidate};
use crate::diff::{normalize_diff, normalize_text, parse_unified_diff, LineKind, RawCommit};
use crate::error::{Error, Result};
use crate::git::Git;
use crate::model::{ExternalVectors, Model};
use crate::todo::{comments_in_line, contains_todo_token, extract_comments, Language};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    /// Still present at HEAD.
    PotentialObsolete,
    /// Deleted by a commit after the one that resolved it.
    IntermediateObsolete,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanFinding {
    pub path: String,
    /// Line at HEAD; absent once the comment is gone.
    pub line: Option<usize>,
    pub todo: String,
    pub resolving_commit: String,
    pub score: f64,
    pub classification: Classification,
    /// Commit that deleted the comment, when found.
    pub removed_in: Option<String>,
}

#[derive(Debug, Clone)]
pub struct ScanOptions {
    pub languages: Vec<Language>,
    pub context_lines: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            languages: vec![Language::Python, Language::Java],
            context_lines: crate::todo::DEFAULT_CONTEXT_LINES,
        }
    }
}

/// Collapses whitespace runs to one space and trims.
pub fn squash_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn language_of(path: &str, languages: &[Language]) -> Option<Language> {
    languages
        .iter()
        .copied()
        .find(|l| !path.is_empty() && l.applies_to(path))
}

struct Hit {
    commit_index: usize,
    commit_id: String,
    candidate: Candidate,
    score: f64,
}

pub fn scan(
    git: &Git,
    repo: &Path,
    model: &Model,
    vectors: Option<&ExternalVectors>,
    options: &ScanOptions,
) -> Result<Vec<ScanFinding>> {
    let commits = git.mine_commits(repo)?;
    let head = head_todos(git, repo, &options.languages)?;
    scan_history(&commits, &head, model, vectors, options)
}

/// HEAD comments containing a TODO, keyed by squashed normalized text.
pub fn head_todos(
    git: &Git,
    repo: &Path,
    languages: &[Language],
) -> Result<HashMap<String, Vec<(String, usize)>>> {
    let mut out: HashMap<String, Vec<(String, usize)>> = HashMap::new();
    for hit in git.head_todo_lines(repo)? {
        let Some(lang) = language_of(&hit.path, languages) else {
            continue;
        };
        for (_, text) in comments_in_line(&normalize_text(&hit.text), lang) {
            if contains_todo_token(&text) {
                out.entry(squash_whitespace(&text))
                    .or_default()
                    .push((hit.path.clone(), hit.line));
            }
        }
    }
    Ok(out)
}

/// Scores every context-line TODO of `commits` (oldest first) and classifies
/// those predicted resolved against the HEAD comments in `head`.
pub fn scan_history(
    commits: &[RawCommit],
    head: &HashMap<String, Vec<(String, usize)>>,
    model: &Model,
    vectors: Option<&ExternalVectors>,
    options: &ScanOptions,
) -> Result<Vec<ScanFinding>> {
    let per_commit: Vec<Result<Vec<Hit>>> = commits
        .par_iter()
        .enumerate()
        .map(|(i, commit)| {
            let mut hits = Vec::new();
            for &lang in &options.languages {
                let Ok(c) = extract_candidate(commit, lang, options.context_lines) else {
                    continue;
                };
                if c.todo.kind() != LineKind::Context {
                    continue;
                }
                let sample = label_triple(
                    &c.todo,
                    &c.code_change,
                    &c.message,
                    &commit.repo,
                    &commit.commit_id,
                )
                .expect("context TODOs are labeled");
                let p = model.predict(&sample, vectors)?;
                if p.status.is_resolved() {
                    hits.push(Hit {
                        commit_index: i,
                        commit_id: commit.commit_id.clone(),
                        candidate: c,
                        score: p.score,
                    });
                }
            }
            Ok(hits)
        })
        .collect();

    // Earliest resolving commit per (path, text).
    let mut earliest: BTreeMap<(String, String), Hit> = BTreeMap::new();
    for hits in per_commit {
        for hit in hits? {
            let key = (
                hit.candidate.path.clone(),
                squash_whitespace(&hit.candidate.todo.text),
            );
            earliest.entry(key).or_insert(hit);
        }
    }

    let mut findings = Vec::new();
    for ((path, text), hit) in earliest {
        let at_head = head.get(&text).and_then(|locs| {
            locs.iter()
                .find(|(p, _)| *p == path)
                .or_else(|| locs.first())
        });
        let finding = match at_head {
            Some((head_path, line)) => ScanFinding {
                path: head_path.clone(),
                line: Some(*line),
                todo: hit.candidate.todo.text.clone(),
                resolving_commit: hit.commit_id.clone(),
                score: hit.score,
                classification: Classification::PotentialObsolete,
                removed_in: None,
            },
            None => ScanFinding {
                path: path.clone(),
                line: None,
                todo: hit.candidate.todo.text.clone(),
                resolving_commit: hit.commit_id.clone(),
                score: hit.score,
                classification: Classification::IntermediateObsolete,
                removed_in: find_removal(
                    &commits[hit.commit_index + 1..],
                    &text,
                    hit.candidate.todo.language,
                ),
            },
        };
        findings.push(finding);
    }
    findings.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.path.cmp(&b.path))
            .then_with(|| a.todo.cmp(&b.todo))
    });
    Ok(findings)
}

/// First commit in `later` whose diff deletes a comment with this text.
fn find_removal(later: &[RawCommit], squashed: &str, language: Language) -> Option<String> {
    later.iter().find_map(|commit| {
        let doc = parse_unified_diff(&commit.diff_text).ok()?;
        let doc = normalize_diff(doc).ok()?;
        let removed = extract_comments(&doc, language)
            .into_iter()
            .any(|c| c.line.kind == LineKind::Removed && squash_whitespace(&c.text) == squashed);
        removed.then(|| commit.commit_id.clone())
    })
}

pub fn write_report<W: Write>(findings: &[ScanFinding], mut out: W) -> std::io::Result<()> {
    for f in findings {
        serde_json::to_writer(&mut out, f)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn write_report_file(findings: &[ScanFinding], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_report(findings, BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

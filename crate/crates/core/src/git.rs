//! Commit mining through the `git` command line.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};

use crate::diff::{parse_unified_diff, RawCommit};
use crate::error::{Error, Result};

/// Arguments of the history dump. Each commit is `\0<hash>\0<body>\0<patch>`.
const LOG_ARGS: &[&str] = &[
    "log",
    "-p",
    "--no-color",
    "--no-renames",
    "--no-ext-diff",
    "-U3",
    "--reverse",
    "--format=%x00%H%x00%B%x00",
];

/// Handle on a `git` executable.
#[derive(Debug, Clone)]
pub struct Git {
    program: OsString,
}

impl Default for Git {
    fn default() -> Self {
        Git {
            program: "git".into(),
        }
    }
}

/// One line of a file at HEAD whose text mentions a TODO.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeadLine {
    pub path: String,
    pub line: usize,
    pub text: String,
}

impl Git {
    pub fn with_program(program: impl Into<OsString>) -> Self {
        Git {
            program: program.into(),
        }
    }

    fn command(&self, repo: &Path) -> Command {
        let mut cmd = Command::new(&self.program);
        cmd.arg("-C")
            .arg(repo)
            .env("LC_ALL", "C")
            .env("GIT_PAGER", "cat")
            .env_remove("GIT_DIR")
            .env_remove("GIT_WORK_TREE")
            .stdin(Stdio::null());
        cmd
    }

    fn spawn_error(&self, e: std::io::Error) -> Error {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::GitUnavailable
        } else {
            Error::Git(e.to_string())
        }
    }

    fn run(&self, repo: &Path, args: &[&str]) -> Result<std::process::Output> {
        self.command(repo)
            .args(args)
            .output()
            .map_err(|e| self.spawn_error(e))
    }

    /// Fails with `GitUnavailable` or `NotARepository` as appropriate.
    pub fn check_repository(&self, repo: &Path) -> Result<()> {
        if !repo.is_dir() {
            return Err(Error::NotARepository(repo.to_path_buf()));
        }
        let out = self.run(repo, &["rev-parse", "--git-dir"])?;
        if out.status.success() {
            Ok(())
        } else {
            Err(Error::NotARepository(repo.to_path_buf()))
        }
    }

    fn has_head(&self, repo: &Path) -> Result<bool> {
        Ok(self
            .run(repo, &["rev-parse", "--verify", "--quiet", "HEAD"])?
            .status
            .success())
    }

    pub fn commit_count(&self, repo: &Path) -> Result<usize> {
        self.check_repository(repo)?;
        if !self.has_head(repo)? {
            return Ok(0);
        }
        let out = self.run(repo, &["rev-list", "--count", "HEAD"])?;
        if !out.status.success() {
            return Err(Error::Git(
                String::from_utf8_lossy(&out.stderr).trim().to_string(),
            ));
        }
        String::from_utf8_lossy(&out.stdout)
            .trim()
            .parse()
            .map_err(|e| Error::Git(format!("unexpected rev-list output: {e}")))
    }

    /// Streams the history oldest first, calling `sink` per commit. Commits
    /// whose patch does not parse are logged and skipped. Returns the number
    /// of commits passed to `sink`.
    pub fn for_each_commit<F>(&self, repo: &Path, mut sink: F) -> Result<usize>
    where
        F: FnMut(RawCommit) -> Result<()>,
    {
        self.check_repository(repo)?;
        if !self.has_head(repo)? {
            return Ok(0);
        }
        let name = repo_name(repo);
        let mut child = self
            .command(repo)
            .args(LOG_ARGS)
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| self.spawn_error(e))?;
        let mut stderr = child.stderr.take().expect("piped stderr");
        let stderr_reader = std::thread::spawn(move || {
            let mut buf = String::new();
            let _ = stderr.read_to_string(&mut buf);
            buf
        });
        let mut reader = BufReader::new(child.stdout.take().expect("piped stdout"));

        let mut count = 0;
        let mut field = Vec::new();
        let mut read_field = |reader: &mut BufReader<_>| -> Result<Option<String>> {
            field.clear();
            let n = reader
                .read_until(0, &mut field)
                .map_err(|e| Error::Git(e.to_string()))?;
            if n == 0 {
                return Ok(None);
            }
            if field.last() == Some(&0) {
                field.pop();
            }
            Ok(Some(String::from_utf8_lossy(&field).into_owned()))
        };

        let mut result = Ok(());
        // Output starts with a separator.
        read_field(&mut reader)?;
        while let Some(hash) = read_field(&mut reader)? {
            let body = read_field(&mut reader)?.unwrap_or_default();
            let patch = read_field(&mut reader)?.unwrap_or_default();
            let commit = RawCommit {
                repo: name.clone(),
                commit_id: hash.trim().to_string(),
                message: body.trim_end().to_string(),
                diff_text: clean_patch(&patch),
            };
            if let Err(e) = parse_unified_diff(&commit.diff_text) {
                log::warn!("skipping commit {}: {e}", commit.commit_id);
                continue;
            }
            if let Err(e) = sink(commit) {
                result = Err(e);
                break;
            }
            count += 1;
        }
        drop(reader);
        let status = child.wait().map_err(|e| Error::Git(e.to_string()))?;
        let stderr = stderr_reader.join().unwrap_or_default();
        result?;
        if !status.success() {
            return Err(Error::Git(stderr.trim().to_string()));
        }
        Ok(count)
    }

    pub fn mine_commits(&self, repo: &Path) -> Result<Vec<RawCommit>> {
        let mut out = Vec::new();
        self.for_each_commit(repo, |c| {
            out.push(c);
            Ok(())
        })?;
        Ok(out)
    }

    /// Writes every commit of `repo` to `out` as JSON lines.
    pub fn mine(&self, repo: &Path, out: &Path) -> Result<usize> {
        let file = File::create(out).map_err(|e| Error::io(out, e))?;
        let mut w = BufWriter::new(file);
        let n = self.for_each_commit(repo, |c| {
            serde_json::to_writer(&mut w, &c).map_err(|e| Error::io(out, e.into()))?;
            w.write_all(b"\n").map_err(|e| Error::io(out, e))
        })?;
        w.flush().map_err(|e| Error::io(out, e))?;
        Ok(n)
    }

    /// Lines at HEAD containing "todo" in any case, from text files.
    pub fn head_todo_lines(&self, repo: &Path) -> Result<Vec<HeadLine>> {
        self.check_repository(repo)?;
        if !self.has_head(repo)? {
            return Ok(Vec::new());
        }
        let out = self.run(
            repo,
            &[
                "grep",
                "-z",
                "-n",
                "-I",
                "-i",
                "--no-color",
                "-e",
                "todo",
                "HEAD",
            ],
        )?;
        match out.status.code() {
            Some(0) => {}
            Some(1) => return Ok(Vec::new()),
            _ => {
                return Err(Error::Git(
                    String::from_utf8_lossy(&out.stderr).trim().to_string(),
                ))
            }
        }
        Ok(parse_grep_output(&String::from_utf8_lossy(&out.stdout)))
    }
}

/// `HEAD:<path>\0<line>\0<text>` records, one per line.
fn parse_grep_output(out: &str) -> Vec<HeadLine> {
    out.split_terminator('\n')
        .filter_map(|rec| {
            let mut parts = rec.splitn(3, '\0');
            let loc = parts.next()?;
            let line = parts.next()?.parse().ok()?;
            let text = parts.next()?.to_string();
            let path = loc.strip_prefix("HEAD:").unwrap_or(loc).to_string();
            Some(HeadLine { path, line, text })
        })
        .collect()
}

fn clean_patch(patch: &str) -> String {
    let body = patch.trim_start_matches('\n').trim_end_matches('\n');
    if body.is_empty() {
        String::new()
    } else {
        format!("{body}\n")
    }
}

pub fn repo_name(repo: &Path) -> String {
    let path: PathBuf = repo.canonicalize().unwrap_or_else(|_| repo.to_path_buf());
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

pub fn read_raw_commits(path: &Path) -> Result<Vec<RawCommit>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let commit = serde_json::from_str(&line).map_err(|e| Error::SchemaViolation {
            line_no: i + 1,
            reason: e.to_string(),
        })?;
        out.push(commit);
    }
    Ok(out)
}

pub fn write_raw_commits(commits: &[RawCommit], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for c in commits {
        serde_json::to_writer(&mut w, c).map_err(|e| Error::io(path, e.into()))?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

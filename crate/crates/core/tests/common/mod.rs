#![allow(dead_code)]

use std::fs;
use std::path::PathBuf;
use std::process::Command;

/// Throwaway git repository with deterministic authorship and dates.
pub struct FixtureRepo {
    _dir: tempfile::TempDir,
    pub path: PathBuf,
    commits: usize,
    pub hashes: Vec<String>,
}

impl FixtureRepo {
    pub fn init() -> Self {
        let dir = tempfile::tempdir().expect("tempdir");
        let path = dir.path().join("fixture-repo");
        fs::create_dir(&path).unwrap();
        let repo = FixtureRepo {
            _dir: dir,
            path,
            commits: 0,
            hashes: Vec::new(),
        };
        repo.git(&["init", "-q"]);
        repo.git(&["config", "user.name", "Fixture Author"]);
        repo.git(&["config", "user.email", "fixture@example.com"]);
        repo.git(&["config", "core.autocrlf", "false"]);
        repo.git(&["config", "commit.gpgsign", "false"]);
        repo
    }

    pub fn git(&self, args: &[&str]) -> String {
        let date = format!("2021-01-01T00:{:02}:00+0000", self.commits % 60);
        let out = Command::new("git")
            .arg("-C")
            .arg(&self.path)
            .args(args)
            .env("GIT_AUTHOR_NAME", "Fixture Author")
            .env("GIT_AUTHOR_EMAIL", "fixture@example.com")
            .env("GIT_COMMITTER_NAME", "Fixture Author")
            .env("GIT_COMMITTER_EMAIL", "fixture@example.com")
            .env("GIT_AUTHOR_DATE", &date)
            .env("GIT_COMMITTER_DATE", &date)
            .env("GIT_CONFIG_NOSYSTEM", "1")
            .env("HOME", self.path.parent().unwrap())
            .output()
            .expect("git runs");
        assert!(
            out.status.success(),
            "git {args:?} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        String::from_utf8_lossy(&out.stdout).into_owned()
    }

    pub fn write(&self, rel: &str, content: &str) {
        let p = self.path.join(rel);
        if let Some(parent) = p.parent() {
            fs::create_dir_all(parent).unwrap();
        }
        fs::write(p, content).unwrap();
    }

    pub fn write_bytes(&self, rel: &str, content: &[u8]) {
        fs::write(self.path.join(rel), content).unwrap();
    }

    pub fn remove(&self, rel: &str) {
        fs::remove_file(self.path.join(rel)).unwrap();
    }

    /// Stages everything and commits; returns the new hash.
    pub fn commit(&mut self, message: &str) -> String {
        self.git(&["add", "-A"]);
        self.git(&["commit", "-q", "--allow-empty", "-m", message]);
        self.commits += 1;
        let hash = self.git(&["rev-parse", "HEAD"]).trim().to_string();
        self.hashes.push(hash.clone());
        hash
    }

    /// Snapshot of the working tree and refs, to prove commands are read-only.
    pub fn fingerprint(&self) -> String {
        let mut s = self.git(&["rev-parse", "HEAD"]);
        s += &self.git(&["status", "--porcelain", "--untracked-files=all"]);
        s += &self.git(&["for-each-ref"]);
        s
    }
}

/// Ten commits on Python files: three resolved TODOs, two unresolved
/// TODOs next to changes, and five commits that yield no sample.
pub fn python_history() -> FixtureRepo {
    let mut r = FixtureRepo::init();

    // 1: no TODO anywhere.
    r.write("util.py", "def load(path):\n    return open(path).read()\n");
    r.commit("Initial commit");

    // 2: TODO introduced together with code.
    r.write(
        "config.py",
        "import json\n\n\ndef parse(text):\n    # TODO: validate the schema\n    return json.loads(text)\n",
    );
    r.commit("Add config parser");

    // 3: TODO deleted while the code is changed.
    r.write(
        "config.py",
        "import json\n\n\ndef parse(text):\n    data = json.loads(text)\n    check_schema(data)\n    return data\n",
    );
    r.commit("Validate schema in parser. Closes #12");

    // 4: another TODO introduced.
    r.write(
        "util.py",
        "_cache = {}\n\n\ndef load(path):\n    # TODO: evict old entries\n    if path not in _cache:\n        _cache[path] = open(path).read()\n    return _cache[path]\n",
    );
    r.commit("Cache loaded files");

    // 5: code next to the TODO changes, TODO stays.
    r.write(
        "util.py",
        "_cache = {}\n\n\ndef load(path):\n    # TODO: evict old entries\n    if path not in _cache:\n        _cache[path] = open(path, encoding=\"utf-8\").read()\n    return _cache[path]\n",
    );
    r.commit("Read files as UTF-8");

    // 6: a new file with two TODOs.
    r.write("server.py", SERVER_V1);
    r.commit("Add server skeleton");

    // 7: the TODO alone is deleted.
    r.write(
        "util.py",
        "_cache = {}\n\n\ndef load(path):\n    if path not in _cache:\n        _cache[path] = open(path, encoding=\"utf-8\").read()\n    return _cache[path]\n",
    );
    r.commit("Drop stale note");

    // 8: first server TODO resolved.
    r.write("server.py", SERVER_V2);
    r.commit("Support IPv6 hosts (#7)");

    // 9: change beside the second server TODO.
    r.write("server.py", SERVER_V3);
    r.commit("Tune listen backlog\n\nThe default queue is too short under load.");

    // 10: second server TODO resolved.
    r.write("server.py", SERVER_V4);
    r.commit("Handle shutdown signals, follow-up to 1a2b3c4d");
    r
}

const SERVER_V1: &str = "import socket

# TODO: support ipv6
HOST = \"127.0.0.1\"
PORT = 8080


def serve():
    sock = socket.socket()
    sock.bind((HOST, PORT))
    # TODO: handle shutdown signals
    sock.listen()
    return sock
";

const SERVER_V2: &str = "import socket

HOST = \"::1\"
PORT = 8080


def serve():
    sock = socket.socket()
    sock.bind((HOST, PORT))
    # TODO: handle shutdown signals
    sock.listen()
    return sock
";

const SERVER_V3: &str = "import socket

HOST = \"::1\"
PORT = 8080


def serve():
    sock = socket.socket()
    sock.bind((HOST, PORT))
    # TODO: handle shutdown signals
    sock.listen(16)
    return sock
";

const SERVER_V4: &str = "import socket

HOST = \"::1\"
PORT = 8080


def serve():
    sock = socket.socket()
    sock.bind((HOST, PORT))
    install_handlers(sock)
    sock.listen(16)
    return sock
";

/// History for the scan: one TODO resolved but left in place, one resolved
/// and deleted later, one unresolved.
pub fn scan_history() -> FixtureRepo {
    let mut r = FixtureRepo::init();
    r.write("worker.py", WORKER_V1);
    r.write("client.py", CLIENT_V1);
    r.commit("Add worker and client");

    r.write("worker.py", WORKER_V2);
    r.commit("Implement cache support in worker");

    r.write("worker.py", WORKER_V3);
    r.commit("Validate queue record handling");

    r.write("client.py", CLIENT_V2);
    r.commit("Rename session buffer");

    r.write("worker.py", WORKER_V4);
    r.commit("Remove obsolete notes");
    r
}

const WORKER_V1: &str = "import queue


def fetch(key):
    # TODO: handle cache entry
    value = load(key)
    return value


def consume(q):
    item = q.get()
    # TODO: validate queue record
    store(item)
    return item
";

const WORKER_V2: &str = "import queue


def fetch(key):
    # TODO: handle cache entry
    value = handle_cache(key)
    return value


def consume(q):
    item = q.get()
    # TODO: validate queue record
    store(item)
    return item
";

const WORKER_V3: &str = "import queue


def fetch(key):
    # TODO: handle cache entry
    value = handle_cache(key)
    return value


def consume(q):
    item = q.get()
    # TODO: validate queue record
    validate_record(item)
    return item
";

const WORKER_V4: &str = "import queue


def fetch(key):
    # TODO: handle cache entry
    value = handle_cache(key)
    return value


def consume(q):
    item = q.get()
    validate_record(item)
    return item
";

const CLIENT_V1: &str = "def connect(session):
    # TODO: refactor session token
    buf = session.buffer
    return buf
";

const CLIENT_V2: &str = "def connect(session):
    # TODO: refactor session token
    session_buffer = session.buffer
    return session_buffer
";

/// A crafted diff from `tests/fixtures/labeling_cases.txt`.
pub struct LabelCase {
    pub name: String,
    pub language: stale_todo::todo::Language,
    pub commit: stale_todo::diff::RawCommit,
}

/// Parses the case file. `@@ N` opens a hunk at line N whose header counts
/// are computed from the body; `@@ -a,b +c,d @@` is copied verbatim;
/// `repeat K LINE` repeats a body line K times; `file: P` opens a file.
pub fn labeling_cases() -> Vec<LabelCase> {
    let text = include_str!("../fixtures/labeling_cases.txt");
    let mut cases = Vec::new();
    for block in text.split("=== ").filter(|b| !b.trim().is_empty()) {
        let mut lines = block.lines();
        let name = lines.next().unwrap().trim().to_string();
        let mut language = None;
        let mut message = String::new();
        let mut diff = String::new();
        let mut hunk: Option<(usize, Vec<String>)> = None;

        fn flush(diff: &mut String, hunk: &mut Option<(usize, Vec<String>)>) {
            if let Some((start, body)) = hunk.take() {
                let old = body.iter().filter(|l| !l.starts_with('+')).count();
                let new = body.iter().filter(|l| !l.starts_with('-')).count();
                diff.push_str(&format!("@@ -{start},{old} +{start},{new} @@\n"));
                for l in body {
                    diff.push_str(&l);
                    diff.push('\n');
                }
            }
        }

        for line in lines {
            if let Some(l) = line.strip_prefix("lang: ") {
                language = Some(l.trim().parse().unwrap());
            } else if let Some(m) = line.strip_prefix("msg:") {
                message = m.trim().to_string();
            } else if let Some(p) = line.strip_prefix("file: ") {
                flush(&mut diff, &mut hunk);
                diff.push_str(&format!("diff --git a/{p} b/{p}\n--- a/{p}\n+++ b/{p}\n"));
            } else if line.starts_with("@@ -") {
                flush(&mut diff, &mut hunk);
                diff.push_str(line);
                diff.push('\n');
            } else if let Some(n) = line.strip_prefix("@@ ") {
                flush(&mut diff, &mut hunk);
                hunk = Some((n.trim().parse().unwrap(), Vec::new()));
            } else if let Some(rest) = line.strip_prefix("repeat ") {
                let (k, text) = rest.split_once(' ').unwrap();
                let (_, body) = hunk.as_mut().unwrap();
                body.extend(std::iter::repeat_n(text.to_string(), k.parse().unwrap()));
            } else if let Some((_, body)) = hunk.as_mut() {
                body.push(if line.is_empty() {
                    " ".to_string()
                } else {
                    line.to_string()
                });
            } else {
                diff.push_str(line);
                diff.push('\n');
            }
        }
        flush(&mut diff, &mut hunk);
        cases.push(LabelCase {
            commit: stale_todo::diff::RawCommit {
                repo: "cases".into(),
                commit_id: name.clone(),
                message,
                diff_text: diff,
            },
            name,
            language: language.expect("lang line"),
        });
    }
    cases
}

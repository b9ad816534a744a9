// Scan a repository for TODOs that a commit resolved without deleting.
//
// `cargo run --release --example scan_repo`

use std::path::Path;
use std::process::Command;

use stale_todo::corpus::split_dataset;
use stale_todo::git::Git;
use stale_todo::model::{train, TrainConfig};
use stale_todo::scan::{scan, write_report, ScanOptions};
use stale_todo::synthetic::synthetic_corpus;

fn git(repo: &Path, args: &[&str]) {
    let ok = Command::new("git")
        .arg("-C")
        .arg(repo)
        .args(args)
        .env("GIT_AUTHOR_NAME", "Demo")
        .env("GIT_AUTHOR_EMAIL", "demo@example.com")
        .env("GIT_COMMITTER_NAME", "Demo")
        .env("GIT_COMMITTER_EMAIL", "demo@example.com")
        .status()
        .expect("git is installed")
        .success();
    assert!(ok, "git {args:?}");
}

fn commit(repo: &Path, content: &str, message: &str) {
    std::fs::write(repo.join("store.py"), content).unwrap();
    git(repo, &["add", "-A"]);
    git(repo, &["commit", "-q", "-m", message]);
}

pub fn run_example() -> stale_todo::Result<String> {
    let dir = tempfile::tempdir().unwrap();
    let repo = dir.path().join("store");
    std::fs::create_dir(&repo).unwrap();
    git(&repo, &["init", "-q"]);
    commit(
        &repo,
        "def put(record):\n    # TODO: validate record schema\n    db.insert(record)\n",
        "Add store",
    );
    commit(
        &repo,
        "def put(record):\n    # TODO: validate record schema\n    validate_schema(record)\n    db.insert(record)\n",
        "Validate record schema before insert",
    );

    let split = split_dataset(&synthetic_corpus(200, 3), 0)?;
    let cfg = TrainConfig {
        max_epochs: 100,
        ..TrainConfig::default()
    };
    let model = train(&split, &cfg, None)?.model;

    let findings = scan(
        &Git::default(),
        &repo,
        &model,
        None,
        &ScanOptions::default(),
    )?;
    let mut report = Vec::new();
    write_report(&findings, &mut report).expect("in-memory write");
    Ok(format!(
        "{} finding(s)\n{}",
        findings.len(),
        String::from_utf8_lossy(&report)
    ))
}

fn main() -> stale_todo::Result<()> {
    print!("{}", run_example()?);
    Ok(())
}

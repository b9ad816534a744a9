// Mine a small throwaway repository and turn its history into a labeled
// corpus.
//
// `cargo run --example build_corpus`

use std::path::Path;
use std::process::Command;

use stale_todo::commands::{self, BuildArgs};
use stale_todo::todo::Language;

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

fn commit(repo: &Path, file: &str, content: &str, message: &str) {
    std::fs::write(repo.join(file), content).unwrap();
    git(repo, &["add", "-A"]);
    git(repo, &["commit", "-q", "-m", message]);
}

pub fn run_example() -> stale_todo::Result<String> {
    let dir = tempfile::tempdir().unwrap();
    let repo = dir.path().join("demo");
    std::fs::create_dir(&repo).unwrap();
    git(&repo, &["init", "-q"]);
    commit(
        &repo,
        "app.py",
        "def run():\n    # TODO: log failures\n    work()\n",
        "Add app",
    );
    commit(
        &repo,
        "app.py",
        "def run():\n    try:\n        work()\n    except Exception as e:\n        log.error(e)\n",
        "Log failures in run",
    );
    commit(
        &repo,
        "app.py",
        "def run():\n    # TODO: add metrics\n    try:\n        work()\n    except Exception as e:\n        log.error(e)\n",
        "Note metrics",
    );
    commit(
        &repo,
        "app.py",
        "def run():\n    # TODO: add metrics\n    try:\n        work(retries=2)\n    except Exception as e:\n        log.error(e)\n",
        "Retry work twice",
    );

    let mined = dir.path().join("commits.jsonl");
    let corpus = dir.path().join("corpus.jsonl");
    let n = commands::mine(&repo, &mined)?;
    let report = commands::build(&BuildArgs {
        input: mined,
        output: corpus,
        language: Language::Python,
        seed: 0,
        manual_check: None,
    })?;
    let mut out = format!("mined {n} commits\n{}\n", report.stats);
    for s in &report.outcome.samples {
        out.push_str(&format!(
            "{:?}: {} | {}\n",
            s.label, s.todo_comment, s.commit_msg
        ));
    }
    Ok(out)
}

fn main() -> stale_todo::Result<()> {
    print!("{}", run_example()?);
    Ok(())
}

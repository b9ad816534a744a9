//! Acceptance checks. Each test prints one `PASS`/`FAIL` line straight to
//! the process stdout, so `cargo test --test acceptance` shows the verdicts
//! even without `--nocapture`.

mod common;

use std::collections::{BTreeSet, HashMap};
use std::io::Write;
use std::panic::{catch_unwind, resume_unwind, UnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stale_todo::baselines::{irsc, tcmo, tco, tmo, IrscModel, OverlapConfig};
use stale_todo::commands::{self, BuildArgs};
use stale_todo::corpus::{
    read_corpus, sample_from_commit, split_dataset, Label, TodoLineKind, TripleSample,
};
use stale_todo::git::Git;
use stale_todo::metrics::{metrics, Confusion, Fraction};
use stale_todo::model::{
    loss, train, Backend, ComponentMask, Mlp, Model, ModelConfig, TrainConfig, Vocab, DROPOUT_RATE,
};
use stale_todo::scan::{scan, Classification, ScanOptions};
use stale_todo::synthetic::{planted_label, synthetic_corpus};
use stale_todo::todo::{Language, DEFAULT_CONTEXT_LINES};
use stale_todo::Status;

/// Runs `body`, prints the verdict line, and re-raises a failure.
fn criterion<F: FnOnce() + UnwindSafe>(id: u8, title: &str, budget: Duration, body: F) {
    let start = Instant::now();
    let outcome = catch_unwind(body);
    let elapsed = start.elapsed();
    let within = elapsed <= budget;
    let verdict = if outcome.is_ok() && within {
        "PASS"
    } else {
        "FAIL"
    };
    let line = format!(
        "acceptance {id}: {verdict}  {title}  ({:.2}s, budget {}s)\n",
        elapsed.as_secs_f64(),
        budget.as_secs()
    );
    let _ = std::io::stdout().lock().write_all(line.as_bytes());
    if let Err(e) = outcome {
        resume_unwind(e);
    }
    assert!(within, "criterion {id} took {elapsed:?}, budget {budget:?}");
}

fn info(text: &str) {
    let _ = std::io::stdout()
        .lock()
        .write_all(format!("    {text}\n").as_bytes());
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}

// ---------------------------------------------------------------------------
// 1. Metric fidelity

/// Whether `num/den` shown as a percentage with one decimal reads `tenths/10`,
/// rounding half up: (2t-1)/2000 <= num/den < (2t+1)/2000.
fn rounds_to(num: u64, den: u64, tenths: u64) -> bool {
    den > 0
        && (2 * tenths).saturating_sub(1) * den <= 2000 * num
        && 2000 * num < (2 * tenths + 1) * den
}

/// Every integer `x >= 0` with `tp/(tp+x)` rounding to `tenths`.
fn complements(tp: u64, tenths: u64) -> Vec<u64> {
    if tenths == 0 || tp == 0 {
        return Vec::new();
    }
    let hi = (tp as f64 * 1000.0 / (tenths as f64 - 0.5)) as u64 + 2;
    let lo = (tp as f64 * 1000.0 / (tenths as f64 + 0.5)) as u64;
    (lo.saturating_sub(2)..=hi)
        .filter(|&d| d >= tp && rounds_to(tp, d, tenths))
        .map(|d| d - tp)
        .collect()
}

/// Confusion matrices on `n` samples whose rounded accuracy, precision and
/// recall match the reported row, and whose exact F1 lies within 0.05
/// percentage points of the reported F1.
fn consistent_confusions(n: u64, acc: u64, p: u64, r: u64, f1: u64) -> Vec<Confusion> {
    let mut out = Vec::new();
    for tp in 1..=n {
        for fp in complements(tp, p) {
            for fn_ in complements(tp, r) {
                let Some(tn) = n.checked_sub(tp + fp + fn_) else {
                    continue;
                };
                if !rounds_to(tp + tn, n, acc) {
                    continue;
                }
                // |2tp/(2tp+fp+fn) - f1/1000| <= 0.0005, kept in integers.
                let den = 2 * tp + fp + fn_;
                let lhs = (2 * tp * 20000).abs_diff(f1 * 20 * den);
                if lhs <= den * 10 {
                    out.push(Confusion { tp, tn, fp, fn_ });
                }
            }
        }
    }
    out
}

fn tenths(f: Fraction) -> u64 {
    f.percent_tenths()
}

#[test]
fn criterion_1_metric_fidelity() {
    criterion(
        1,
        "metric fidelity on the two reported rows",
        Duration::from_secs(5),
        || {
            // (dataset, test size, accuracy, precision, recall, F1) in tenths of a percent.
            let rows = [
                ("python", 7417u64, 847u64, 826u64, 868u64, 847u64),
                ("java", 6629, 850, 862, 844, 853),
            ];
            for (name, n, acc, p, r, f1) in rows {
                let naive = 2.0 * (p as f64 / 10.0) * (r as f64 / 10.0) / ((p + r) as f64 / 10.0);
                info(&format!(
                "{name}: harmonic mean of the rounded precision and recall = {naive:.3}% (reported {:.1}%)",
                f1 as f64 / 10.0
            ));
                let found = consistent_confusions(n, acc, p, r, f1);
                assert!(
                    !found.is_empty(),
                    "{name}: no confusion matrix reproduces the row"
                );
                for c in &found {
                    let m = metrics(c).unwrap();
                    assert_eq!(m.confusion.total(), n);
                    assert_eq!(tenths(m.accuracy), acc, "{name} {c:?}");
                    assert_eq!(tenths(m.precision.unwrap()), p, "{name} {c:?}");
                    assert_eq!(tenths(m.recall.unwrap()), r, "{name} {c:?}");
                    let exact = m.f1.unwrap().value() * 100.0;
                    assert!(
                        (exact - f1 as f64 / 10.0).abs() <= 0.05 + 1e-12,
                        "{name} {c:?}: {exact}"
                    );
                    assert_eq!(tenths(m.f1.unwrap()), f1, "{name} {c:?}");
                }
                let c = found[0];
                let m = metrics(&c).unwrap();
                info(&format!(
                "{name}: {} consistent matrices, e.g. tp={} fp={} fn={} tn={} -> acc {} p {} r {} F1 {} (exact {:.4}%)",
                found.len(),
                c.tp,
                c.fp,
                c.fn_,
                c.tn,
                m.accuracy.percent_string(),
                m.precision.unwrap().percent_string(),
                m.recall.unwrap().percent_string(),
                m.f1.unwrap().percent_string(),
                m.f1.unwrap().value() * 100.0
            ));
            }
        },
    );
}

// ---------------------------------------------------------------------------
// 2. Gradient correctness

fn random_text<R: Rng>(rng: &mut R, words: &[&str], len: usize) -> String {
    (0..len)
        .map(|_| *words.choose(rng).unwrap())
        .collect::<Vec<_>>()
        .join(" ")
}

const WORDS: &[&str] = &[
    "cache", "load", "x", "=", "(", ")", "todo", ":", "fix", "parser", "add", "handle", "+", "-",
    "queue", "retry", "error",
];

/// Full model: embeddings, concatenation and MLP, evaluation mode.
fn check_model_instance(seed: u64) -> Option<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let masks = ["cc,td,msg", "cc,td", "td,msg", "cc", "td"];
    let mask: ComponentMask = masks.choose(&mut rng).unwrap().parse().unwrap();
    let mut cfg = ModelConfig::new(Backend::Internal, mask);
    cfg.dim = rng.random_range(2..=6);
    cfg.hidden = (0..3).map(|_| rng.random_range(2..=6)).collect();
    let vocab = Vocab::build([WORDS.join(" ").as_str()], 1).unwrap();
    let mut m = Model::init(cfg, vocab, &mut rng).unwrap();
    for l in &mut m.mlp.layers {
        l.bias
            .iter_mut()
            .for_each(|b| *b = rng.random_range(-0.3..0.3));
    }
    for e in &mut m.encoders {
        e.data
            .iter_mut()
            .for_each(|v| *v = rng.random_range(-1.0..1.0));
    }
    let label = if rng.random_bool(0.5) {
        Label::Positive
    } else {
        Label::Negative
    };
    let s = TripleSample {
        repo: "r".into(),
        commit_id: "c".into(),
        todo_comment: format!("todo: {}", random_text(&mut rng, WORDS, 3)),
        code_change: format!("+ {}", random_text(&mut rng, WORDS, 6)),
        commit_msg: random_text(&mut rng, WORDS, 4),
        label,
        todo_line_kind: match label {
            Label::Positive => TodoLineKind::Removed,
            Label::Negative => TodoLineKind::Context,
        },
    };
    let inputs = m.inputs(&s, None).unwrap();
    let cache = m.mlp.forward_with_masks(&m.encode(&inputs), None).unwrap();
    let n = cache.pre.len();
    if cache.pre[..n - 1].iter().flatten().any(|z| z.abs() < 1e-3) {
        return None;
    }
    let mut g = m.zero_grads();
    m.accumulate_gradient(&inputs, label, false, &mut rng, 1.0, &mut g)
        .unwrap();
    let y = if label.is_positive() { 1.0 } else { 0.0 };
    let h = 1e-5;
    let mut checked = 0;
    for t in 0..g.len() {
        for k in 0..g[t].len() {
            let mut p = m.clone();
            p.tensors_mut()[t][k] += h;
            let mut q = m.clone();
            q.tensors_mut()[t][k] -= h;
            let numeric = (loss(p.score_inputs(&inputs).unwrap(), y)
                - loss(q.score_inputs(&inputs).unwrap(), y))
                / (2.0 * h);
            assert!(
                rel_err(g[t][k], numeric) < 1e-4,
                "seed {seed} tensor {t}[{k}]: analytic {} numeric {numeric}",
                g[t][k]
            );
            checked += 1;
        }
    }
    Some(checked)
}

/// MLP alone with a fixed dropout mask, including the input gradient.
fn check_mlp_instance(seed: u64) -> Option<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let input = rng.random_range(2..=8);
    let hidden: Vec<usize> = (0..3).map(|_| rng.random_range(2..=8)).collect();
    let mut mlp = Mlp::new(input, &hidden, DROPOUT_RATE, &mut rng);
    for l in &mut mlp.layers {
        l.bias
            .iter_mut()
            .for_each(|b| *b = rng.random_range(-0.5..0.5));
    }
    let x: Vec<f64> = (0..input).map(|_| rng.random_range(-1.0..1.0)).collect();
    let y = f64::from(rng.random_range(0..2u8));
    let masks = mlp.sample_masks(&mut rng);
    let cache = mlp.forward_with_masks(&x, Some(masks.clone())).unwrap();
    let n = cache.pre.len();
    if cache.pre[..n - 1].iter().flatten().any(|z| z.abs() < 1e-3) {
        return None;
    }
    let mut grads = mlp.zero_grads();
    let dx = mlp.backward(&cache, y, 1.0, &mut grads);
    let eval = |m: &Mlp, x: &[f64]| {
        loss(
            m.forward_with_masks(x, Some(masks.clone())).unwrap().score,
            y,
        )
    };
    let h = 1e-5;
    let mut checked = 0;
    for t in 0..grads.len() {
        for k in 0..grads[t].len() {
            let mut p = mlp.clone();
            p.tensors_mut()[t][k] += h;
            let mut q = mlp.clone();
            q.tensors_mut()[t][k] -= h;
            let numeric = (eval(&p, &x) - eval(&q, &x)) / (2.0 * h);
            assert!(
                rel_err(grads[t][k], numeric) < 1e-4,
                "seed {seed} tensor {t}[{k}]"
            );
            checked += 1;
        }
    }
    for i in 0..input {
        let mut xp = x.clone();
        xp[i] += h;
        let mut xm = x.clone();
        xm[i] -= h;
        let numeric = (eval(&mlp, &xp) - eval(&mlp, &xm)) / (2.0 * h);
        assert!(rel_err(dx[i], numeric) < 1e-4, "seed {seed} input {i}");
        checked += 1;
    }
    Some(checked)
}

#[test]
fn criterion_2_gradient_correctness() {
    criterion(
        2,
        "analytic gradients match central differences",
        Duration::from_secs(30),
        || {
            for (name, check) in [
                ("model", check_model_instance as fn(u64) -> Option<usize>),
                ("mlp with dropout", check_mlp_instance),
            ] {
                let (mut instances, mut params, mut seed) = (0, 0, 0);
                while instances < 25 {
                    seed += 1;
                    if let Some(n) = check(seed) {
                        instances += 1;
                        params += n;
                    }
                }
                info(&format!(
                    "{name}: {instances} instances, {params} partial derivatives"
                ));
            }
        },
    );
}

// ---------------------------------------------------------------------------
// 3. Learning sanity

fn accuracy(model: &Model, samples: &[TripleSample]) -> f64 {
    let right = samples
        .iter()
        .filter(|s| model.predict(s, None).unwrap().status.is_resolved() == s.label.is_positive())
        .count();
    right as f64 / samples.len() as f64
}

#[test]
fn criterion_3_learning_sanity() {
    criterion(
        3,
        "separable corpus is learned, seed-deterministic",
        Duration::from_secs(120),
        || {
            let corpus = synthetic_corpus(200, 3);
            assert!(corpus
                .iter()
                .all(|s| planted_label(&s.todo_comment) == s.label));
            let split = split_dataset(&corpus, 0).unwrap();
            let cfg = TrainConfig {
                max_epochs: 200,
                ..TrainConfig::default()
            };
            let a = train(&split, &cfg, None).unwrap();
            let b = train(&split, &cfg, None).unwrap();
            assert_eq!(a.model, b.model, "same seed, different model");
            assert_eq!(a.history, b.history);

            let (train_acc, test_acc) = (
                accuracy(&a.model, &split.train),
                accuracy(&a.model, &split.test),
            );
            info(&format!(
                "train accuracy {train_acc:.4}, held-out accuracy {test_acc:.4}, {} validations",
                a.history.validations.len()
            ));
            assert!(train_acc >= 0.99, "train accuracy {train_acc}");
            assert!(test_acc >= 0.90, "held-out accuracy {test_acc}");
        },
    );
}

// ---------------------------------------------------------------------------
// 4. Baseline truth table

const BASELINE_WORDS: &[&str] = &[
    "cache",
    "caches",
    "caching",
    "parser",
    "retry",
    "retries",
    "the",
    "a",
    "of",
    "error",
    "errors",
    "load",
    "loaded",
    "handle",
    "timeout",
    "queue",
    "fix",
    "fixed",
    "<issue_id>",
    "todo",
];

fn random_sample<R: Rng>(rng: &mut R) -> TripleSample {
    let mut text = |lo: usize, hi: usize| {
        let n = rng.random_range(lo..=hi);
        random_text(rng, BASELINE_WORDS, n)
    };
    let todo = format!("todo: {}", text(0, 4));
    let code = format!("- {}\n+ {}\n  {}", text(0, 3), text(0, 5), text(0, 3));
    let msg = text(1, 5);
    TripleSample {
        repo: "r".into(),
        commit_id: "c".into(),
        todo_comment: todo,
        code_change: code,
        commit_msg: msg,
        label: Label::Negative,
        todo_line_kind: TodoLineKind::Context,
    }
}

#[test]
fn criterion_4_baseline_truth_table() {
    criterion(
        4,
        "tcmo equals tco or tmo; IRSC monotone in threshold",
        Duration::from_secs(10),
        || {
            let mut rng = ChaCha8Rng::seed_from_u64(4);
            let mut counts = HashMap::new();
            for i in 0..10_000 {
                let s = random_sample(&mut rng);
                let cfg = OverlapConfig { stem: i % 2 == 0 };
                let (a, b, c) = (tco(&s, cfg), tmo(&s, cfg), tcmo(&s, cfg));
                let expected = Status::from_resolved(a.is_resolved() || b.is_resolved());
                assert_eq!(c, expected, "violation on {s:?}");
                *counts.entry((a, b)).or_insert(0usize) += 1;
            }
            assert_eq!(
                counts.len(),
                4,
                "every truth-table row is exercised: {counts:?}"
            );

            let samples: Vec<TripleSample> = (0..1000).map(|_| random_sample(&mut rng)).collect();
            let cfg = OverlapConfig::default();
            let background = IrscModel::from_samples(&samples, cfg);
            let grid: Vec<f64> = (0..=40).map(|i| i as f64 / 40.0).collect();
            let mut ever_resolved = 0;
            for s in &samples {
                let added = s.lines_added();
                let resolved: Vec<bool> = grid
                    .iter()
                    .map(|&t| irsc(s, &added, t, &background).is_resolved())
                    .collect();
                assert!(
                    resolved.windows(2).all(|w| w[0] || !w[1]),
                    "resolved at a higher threshold only: {s:?}"
                );
                ever_resolved += usize::from(resolved[1]);
            }
            info(&format!(
                "IRSC resolved {ever_resolved}/1000 samples at threshold 0.025"
            ));
        },
    );
}

// ---------------------------------------------------------------------------
// 5. Labeling rules

#[test]
fn criterion_5_labeling_rules() {
    criterion(
        5,
        "30 crafted diffs label as the golden file says",
        Duration::from_secs(5),
        || {
            let golden: HashMap<String, serde_json::Value> = include_str!("golden/labeling.jsonl")
                .lines()
                .map(|l| {
                    let v: serde_json::Value = serde_json::from_str(l).unwrap();
                    (v["case"].as_str().unwrap().to_string(), v)
                })
                .collect();
            let cases = common::labeling_cases();
            assert_eq!(cases.len(), 30);
            assert_eq!(golden.len(), 30);
            let mut kinds = BTreeSet::new();
            for case in &cases {
                let want = &golden[&case.name];
                let expect = want["expect"].as_str().unwrap();
                match sample_from_commit(&case.commit, case.language, DEFAULT_CONTEXT_LINES) {
                    Ok(s) => {
                        let label = match s.label {
                            Label::Positive => "positive",
                            Label::Negative => "negative",
                        };
                        assert_eq!(label, expect, "{}", case.name);
                        assert_eq!(
                            s.todo_comment,
                            want["todo"].as_str().unwrap(),
                            "{}",
                            case.name
                        );
                        if let Some(msg) = want["msg"].as_str() {
                            assert_eq!(s.commit_msg, msg, "{}", case.name);
                        }
                        assert_eq!(s.label, s.todo_line_kind.label());
                        kinds.insert(label.to_string());
                    }
                    Err(reason) => {
                        assert_eq!(reason.name(), expect, "{}", case.name);
                        kinds.insert(expect.to_string());
                    }
                }
            }
            info(&format!(
                "outcomes covered: {}",
                kinds.into_iter().collect::<Vec<_>>().join(", ")
            ));
        },
    );
}

// ---------------------------------------------------------------------------
// 6. Pipeline end to end

#[test]
fn criterion_6_pipeline_end_to_end() {
    criterion(
        6,
        "mine and build reproduce the golden fixture corpus",
        Duration::from_secs(30),
        || {
            let repo = common::python_history();
            let dir = tempfile::tempdir().unwrap();
            let mined = dir.path().join("commits.jsonl");
            let corpus = dir.path().join("corpus.jsonl");

            let n = commands::mine(&repo.path, &mined).unwrap();
            let rev_list = Command::new("git")
                .arg("-C")
                .arg(&repo.path)
                .args(["rev-list", "--count", "HEAD"])
                .output()
                .unwrap();
            let expected: usize = String::from_utf8_lossy(&rev_list.stdout)
                .trim()
                .parse()
                .unwrap();
            assert_eq!(n, expected);
            assert_eq!(n, 10);
            assert_eq!(Git::default().commit_count(&repo.path).unwrap(), 10);

            let report = commands::build(&BuildArgs {
                input: mined.clone(),
                output: corpus.clone(),
                language: Language::Python,
                seed: 0,
                manual_check: None,
            })
            .unwrap();

            let golden: Vec<serde_json::Value> = include_str!("golden/fixture_corpus.jsonl")
                .lines()
                .map(|l| serde_json::from_str(l).unwrap())
                .collect();
            assert_eq!(golden.len(), 10);
            let commits = stale_todo::git::read_raw_commits(&mined).unwrap();
            let mut expected_samples = Vec::new();
            for want in &golden {
                let ordinal = want["commit"].as_u64().unwrap() as usize;
                let commit = &commits[ordinal - 1];
                assert_eq!(commit.commit_id, repo.hashes[ordinal - 1]);
                let got = sample_from_commit(commit, Language::Python, DEFAULT_CONTEXT_LINES);
                if let Some(reason) = want["dropped"].as_str() {
                    assert_eq!(
                        got.map_err(|r| r.name()).err(),
                        Some(reason),
                        "commit {ordinal}"
                    );
                    continue;
                }
                let s = got.unwrap_or_else(|r| panic!("commit {ordinal} dropped: {}", r.name()));
                let w = &want["sample"];
                assert_eq!(s.repo, "fixture-repo");
                assert_eq!(s.commit_id, repo.hashes[ordinal - 1]);
                assert_eq!(
                    s.todo_comment,
                    w["todo_comment"].as_str().unwrap(),
                    "commit {ordinal}"
                );
                assert_eq!(
                    s.code_change,
                    w["code_change"].as_str().unwrap(),
                    "commit {ordinal}"
                );
                assert_eq!(
                    s.commit_msg,
                    w["commit_msg"].as_str().unwrap(),
                    "commit {ordinal}"
                );
                assert_eq!(serde_json::json!(s.label), w["label"], "commit {ordinal}");
                assert_eq!(
                    serde_json::json!(s.todo_line_kind),
                    w["todo_line_kind"],
                    "commit {ordinal}"
                );
                expected_samples.push(s);
            }

            let written = read_corpus(&corpus).unwrap();
            assert_eq!(written, expected_samples);
            assert_eq!(report.outcome.samples, expected_samples);
            assert_eq!(report.outcome.todo_commits, 9);
            assert_eq!(report.stats.positives + report.stats.negatives, 5);
            assert_eq!(report.stats.positives, 3);
            assert_eq!(report.outcome.drops.total(), 5);
            info(&format!(
                "{n} commits, {} TODO commits, {} samples ({} positive)",
                report.outcome.todo_commits,
                written.len(),
                report.stats.positives
            ));
        },
    );
}

// ---------------------------------------------------------------------------
// 7. Split invariants

#[test]
fn criterion_7_split_invariants() {
    criterion(
        7,
        "splits are disjoint, exhaustive, 80/10/10 and seeded",
        Duration::from_secs(10),
        || {
            let pool: Vec<TripleSample> = (0..1000)
                .map(|i| TripleSample {
                    repo: "r".into(),
                    commit_id: format!("{i}"),
                    todo_comment: "todo: x".into(),
                    code_change: "+ x".into(),
                    commit_msg: "m".into(),
                    label: if i % 3 == 0 {
                        Label::Positive
                    } else {
                        Label::Negative
                    },
                    todo_line_kind: if i % 3 == 0 {
                        TodoLineKind::Removed
                    } else {
                        TodoLineKind::Context
                    },
                })
                .collect();
            for n in 10..=1000 {
                let samples = &pool[..n];
                let seed = n as u64 * 7;
                let s = split_dataset(samples, seed).unwrap();
                let ids = |v: &[TripleSample]| {
                    v.iter()
                        .map(|s| s.commit_id.clone())
                        .collect::<BTreeSet<_>>()
                };
                let (tr, va, te) = (ids(&s.train), ids(&s.val), ids(&s.test));
                assert_eq!(tr.len() + va.len() + te.len(), n, "n={n}: duplicates");
                assert!(
                    tr.is_disjoint(&va) && tr.is_disjoint(&te) && va.is_disjoint(&te),
                    "n={n}"
                );
                let all: BTreeSet<_> = tr.union(&va).chain(&te).cloned().collect();
                assert_eq!(all, ids(samples), "n={n}: not exhaustive");
                let nf = n as f64;
                for (part, ratio) in [
                    (s.train.len(), 0.8),
                    (s.val.len(), 0.1),
                    (s.test.len(), 0.1),
                ] {
                    assert!(
                        (part as f64 - ratio * nf).abs() <= 1.0,
                        "n={n}: {part} vs {ratio}"
                    );
                }
                assert_eq!(
                    split_dataset(samples, seed).unwrap(),
                    s,
                    "n={n}: not deterministic"
                );
            }
            assert!(split_dataset(&pool[..9], 0).is_err());
        },
    );
}

// ---------------------------------------------------------------------------
// 8. Scan correctness

#[test]
fn criterion_8_scan() {
    criterion(
        8,
        "scan finds one potential and one intermediate obsolete TODO",
        Duration::from_secs(30),
        || {
            let repo = common::scan_history();
            let before = repo.fingerprint();
            let corpus = synthetic_corpus(200, 3);
            let split = split_dataset(&corpus, 0).unwrap();
            let cfg = TrainConfig {
                max_epochs: 200,
                ..TrainConfig::default()
            };
            let model = train(&split, &cfg, None).unwrap().model;

            let findings = scan(
                &Git::default(),
                &repo.path,
                &model,
                None,
                &ScanOptions::default(),
            )
            .unwrap();
            for f in &findings {
                info(&format!(
                    "{:?} {} {:?} \"{}\" score {:.3}",
                    f.classification, f.path, f.line, f.todo, f.score
                ));
            }
            assert_eq!(findings.len(), 2, "{findings:#?}");
            let potential: Vec<_> = findings
                .iter()
                .filter(|f| f.classification == Classification::PotentialObsolete)
                .collect();
            let intermediate: Vec<_> = findings
                .iter()
                .filter(|f| f.classification == Classification::IntermediateObsolete)
                .collect();
            assert_eq!(potential.len(), 1);
            assert_eq!(intermediate.len(), 1);

            let p = potential[0];
            assert_eq!(p.path, "worker.py");
            assert_eq!(p.line, Some(5));
            assert_eq!(p.todo, "todo: handle cache entry");
            assert_eq!(p.resolving_commit, repo.hashes[1]);
            assert_eq!(p.removed_in, None);

            let i = intermediate[0];
            assert_eq!(i.path, "worker.py");
            assert_eq!(i.line, None);
            assert_eq!(i.todo, "todo: validate queue record");
            assert_eq!(i.resolving_commit, repo.hashes[2]);
            assert_eq!(i.removed_in.as_deref(), Some(repo.hashes[4].as_str()));

            assert!(findings.windows(2).all(|w| w[0].score >= w[1].score));
            assert_eq!(repo.fingerprint(), before, "scan modified the repository");
        },
    );
}

// ---------------------------------------------------------------------------
// 9. Component masking

#[test]
fn criterion_9_message_mask() {
    criterion(
        9,
        "with the message masked, messages cannot move a score",
        Duration::from_secs(30),
        || {
            let corpus = synthetic_corpus(200, 9);
            let split = split_dataset(&corpus, 1).unwrap();
            let cfg = TrainConfig {
                max_epochs: 20,
                mask: "cc,td".parse().unwrap(),
                seed: 1,
                ..TrainConfig::default()
            };
            let model = train(&split, &cfg, None).unwrap().model;
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            let mut changed = 0;
            for s in &split.test {
                let before = model.score(s, None).unwrap();
                for _ in 0..5 {
                    let mut m = s.clone();
                    let len = rng.random_range(1..12);
                    m.commit_msg = random_text(&mut rng, BASELINE_WORDS, len);
                    changed += usize::from(m.commit_msg != s.commit_msg);
                    let after = model.score(&m, None).unwrap();
                    assert_eq!(
                        before.to_bits(),
                        after.to_bits(),
                        "score moved for {}",
                        s.commit_id
                    );
                }
            }
            assert!(changed > 0);

            // Training is equally blind to messages.
            let mut scrambled = split.clone();
            for s in scrambled.train.iter_mut().chain(&mut scrambled.val) {
                s.commit_msg = random_text(&mut rng, BASELINE_WORDS, 6);
            }
            let again = train(&scrambled, &cfg, None).unwrap().model;
            assert_eq!(again.mlp, model.mlp);
            assert_eq!(again.encoders, model.encoders);
            info(&format!(
                "{} test samples, {changed} message mutations, all scores bitwise equal",
                split.test.len()
            ));
        },
    );
}

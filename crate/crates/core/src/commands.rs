//! Command implementations behind the `stale-todo` binary.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::baselines::{irsc, tcmo, tco, tmo, IrscModel, OverlapConfig, DEFAULT_IRSC_THRESHOLD};
use crate::corpus::{
    build_samples, read_corpus, render_manual_check, sample_for_manual_check, split_dataset,
    write_corpus, BuildOutcome, CorpusStats, DatasetSplit, DropReason, TripleSample,
};
use crate::error::{Error, Result};
use crate::git::{read_raw_commits, Git};
use crate::metrics::{evaluate, MetricReport, ReportTable};
use crate::model::{load_model, save_model, train, ExternalVectors, TrainConfig, TrainOutcome};
use crate::scan::{scan, write_report_file, ScanFinding, ScanOptions};
use crate::todo::{Language, DEFAULT_CONTEXT_LINES};

pub fn mine(repo: &Path, out: &Path) -> Result<usize> {
    Git::default().mine(repo, out)
}

#[derive(Debug, Clone)]
pub struct BuildArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    pub language: Language,
    pub seed: u64,
    /// Positives and negatives to draw for a manual-check report.
    pub manual_check: Option<(usize, usize)>,
}

#[derive(Debug, Clone)]
pub struct BuildReport {
    pub stats: CorpusStats,
    pub outcome: BuildOutcome,
    pub stats_path: PathBuf,
}

/// `<out>.stats.txt` next to the corpus.
pub fn stats_path(corpus: &Path) -> PathBuf {
    let mut name = corpus.as_os_str().to_owned();
    name.push(".stats.txt");
    PathBuf::from(name)
}

pub fn build(args: &BuildArgs) -> Result<BuildReport> {
    let commits = read_raw_commits(&args.input)?;
    let outcome = build_samples(&commits, args.language, DEFAULT_CONTEXT_LINES);
    write_corpus(&outcome.samples, &args.output)?;
    let mut stats = CorpusStats::from_samples(&outcome.samples, outcome.todo_commits);
    if let Ok(split) = split_dataset(&outcome.samples, args.seed) {
        stats.train = split.train.len();
        stats.val = split.val.len();
        stats.test = split.test.len();
    }
    let mut text = format!("{stats}\n");
    writeln!(text, "commits read: {}", commits.len()).unwrap();
    for reason in DropReason::ALL {
        writeln!(
            text,
            "dropped {}: {}",
            reason.name(),
            outcome.drops.get(reason)
        )
        .unwrap();
    }
    let stats_path = stats_path(&args.output);
    fs::write(&stats_path, text).map_err(|e| Error::io(&stats_path, e))?;
    if let Some((n_pos, n_neg)) = args.manual_check {
        let picked = sample_for_manual_check(&outcome.samples, n_pos, n_neg, args.seed)?;
        let mut path = args.output.as_os_str().to_owned();
        path.push(".manual-check.txt");
        fs::write(&path, render_manual_check(&picked)).map_err(|e| Error::io(&path, e))?;
    }
    Ok(BuildReport {
        stats,
        outcome,
        stats_path,
    })
}

fn load_vectors(path: Option<&Path>) -> Result<Option<ExternalVectors>> {
    path.map(ExternalVectors::load).transpose()
}

fn load_split(corpus: &Path, seed: u64) -> Result<DatasetSplit> {
    let samples = read_corpus(corpus)?;
    if samples.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    split_dataset(&samples, seed)
}

pub fn train_model(
    corpus: &Path,
    out: &Path,
    config: &TrainConfig,
    vectors: Option<&Path>,
) -> Result<TrainOutcome> {
    let split = load_split(corpus, config.seed)?;
    let vectors = load_vectors(vectors)?;
    let outcome = train(&split, config, vectors.as_ref())?;
    save_model(&outcome.model, out)?;
    Ok(outcome)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IrscMode {
    Fixed(f64),
    /// Pick the threshold with the best validation F1 on a 0.05 grid.
    Sweep,
}

#[derive(Debug, Clone)]
pub struct EvalArgs {
    pub corpus: PathBuf,
    pub model: Option<PathBuf>,
    pub vectors: Option<PathBuf>,
    pub baselines: bool,
    pub irsc: IrscMode,
    pub stem: bool,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct EvalOutput {
    pub reports: Vec<MetricReport>,
    /// (threshold, validation report) per swept threshold.
    pub sweep: Vec<(f64, MetricReport)>,
    pub irsc_threshold: Option<f64>,
}

impl EvalOutput {
    pub fn render(&self) -> String {
        let mut s = ReportTable(&self.reports).to_string();
        if let Some(t) = self.irsc_threshold {
            writeln!(s, "IRSC threshold: {t:.2}").unwrap();
        }
        if !self.sweep.is_empty() {
            writeln!(s, "\nIRSC validation sweep").unwrap();
            for (t, r) in &self.sweep {
                writeln!(s, "{t:.2}  {}", r.row()[1..].join("  ")).unwrap();
            }
        }
        s
    }
}

pub fn sweep_thresholds() -> Vec<f64> {
    (0..=20).map(|i| i as f64 * 0.05).collect()
}

pub fn eval(args: &EvalArgs) -> Result<EvalOutput> {
    let split = load_split(&args.corpus, args.seed)?;
    eval_split(&split, args, &dataset_name(&args.corpus))
}

fn dataset_name(corpus: &Path) -> String {
    corpus
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "corpus".into())
}

pub fn eval_split(split: &DatasetSplit, args: &EvalArgs, dataset: &str) -> Result<EvalOutput> {
    if args.model.is_none() && !args.baselines {
        return Err(Error::InvalidArgument(
            "nothing to evaluate: pass --model and/or --baselines".into(),
        ));
    }
    let mut out = EvalOutput {
        reports: Vec::new(),
        sweep: Vec::new(),
        irsc_threshold: None,
    };
    if args.baselines {
        let cfg = OverlapConfig { stem: args.stem };
        let test = &split.test;
        out.reports
            .push(evaluate("TCO", dataset, test, |s| Ok(tco(s, cfg)))?);
        out.reports
            .push(evaluate("TMO", dataset, test, |s| Ok(tmo(s, cfg)))?);
        out.reports
            .push(evaluate("TCMO", dataset, test, |s| Ok(tcmo(s, cfg)))?);

        let background = IrscModel::from_samples(&split.train, cfg);
        let run = |samples: &[TripleSample], t: f64| {
            evaluate("IRSC", dataset, samples, |s| {
                Ok(irsc(s, &s.lines_added(), t, &background))
            })
        };
        let threshold = match args.irsc {
            IrscMode::Fixed(t) => t,
            IrscMode::Sweep => {
                let mut best: Option<(f64, f64)> = None;
                for t in sweep_thresholds() {
                    let r = run(&split.val, t)?;
                    let f1 = r.metrics.f1.map(|f| f.value()).unwrap_or(0.0);
                    if best.is_none_or(|(_, b)| f1 > b) {
                        best = Some((t, f1));
                    }
                    out.sweep.push((t, r));
                }
                best.map(|(t, _)| t).unwrap_or(DEFAULT_IRSC_THRESHOLD)
            }
        };
        out.irsc_threshold = Some(threshold);
        out.reports.push(run(test, threshold)?);
    }
    if let Some(path) = &args.model {
        let model = load_model(path)?;
        let vectors = load_vectors(args.vectors.as_deref())?;
        out.reports
            .push(evaluate("Model", dataset, &split.test, |s| {
                Ok(model.predict(s, vectors.as_ref())?.status)
            })?);
    }
    Ok(out)
}

pub fn scan_repo(
    repo: &Path,
    model: &Path,
    vectors: Option<&Path>,
    report: Option<&Path>,
) -> Result<Vec<ScanFinding>> {
    let model = load_model(model)?;
    let vectors = load_vectors(vectors)?;
    let findings = scan(
        &Git::default(),
        repo,
        &model,
        vectors.as_ref(),
        &ScanOptions::default(),
    )?;
    if let Some(path) = report {
        write_report_file(&findings, path)?;
    }
    Ok(findings)
}

/// One-line JSON rendering of an error for the binary's stderr.
pub fn error_record(err: &Error) -> String {
    let kind = match err {
        Error::MalformedDiff { .. } => "malformed_diff",
        Error::TooFewSamples(_) => "too_few_samples",
        Error::Io { .. } => "io",
        Error::SchemaViolation { .. } => "schema_violation",
        Error::Insufficient { .. } => "insufficient",
        Error::EmptyCorpus => "empty_corpus",
        Error::MissingExternalVector(_) => "missing_external_vector",
        Error::ShapeMismatch { .. } => "shape_mismatch",
        Error::Diverged { .. } => "diverged",
        Error::LengthMismatch { .. } => "length_mismatch",
        Error::EmptyEvaluation => "empty_evaluation",
        Error::GitUnavailable => "git_unavailable",
        Error::NotARepository(_) => "not_a_repository",
        Error::Git(_) => "git",
        Error::InvalidArgument(_) => "invalid_argument",
    };
    serde_json::json!({ "error": kind, "message": err.to_string() }).to_string()
}

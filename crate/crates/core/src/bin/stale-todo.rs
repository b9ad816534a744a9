use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use stale_todo::commands::{self, BuildArgs, EvalArgs, IrscMode};
use stale_todo::model::{Backend, ComponentMask, TrainConfig};
use stale_todo::todo::Language;
use stale_todo::{baselines::DEFAULT_IRSC_THRESHOLD, Error, Result};

#[derive(Parser)]
#[command(
    name = "stale-todo",
    version,
    about = "Find TODO comments that were resolved but never removed"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Dump a repository's history as JSON-lines commits.
    Mine {
        #[arg(long)]
        repo: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Turn mined commits into a labeled corpus plus statistics.
    Build {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        lang: Language,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write POS,NEG randomly drawn samples for manual review.
        #[arg(long, value_name = "POS,NEG", value_parser = parse_pair)]
        manual_check: Option<(usize, usize)>,
    },
    /// Train the classifier on the train split of a corpus.
    Train {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "cc,td,msg")]
        mask: ComponentMask,
        #[arg(long, default_value = "internal")]
        backend: Backend,
        #[arg(long)]
        vectors: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        epochs: usize,
        #[arg(long, default_value_t = 128)]
        dim: usize,
        #[arg(long, default_value_t = 32)]
        batch_size: usize,
        #[arg(long, default_value_t = 0.001)]
        lr: f64,
        #[arg(long, default_value_t = 1000)]
        validate_every: usize,
        #[arg(long, default_value_t = 2)]
        min_freq: usize,
    },
    /// Report accuracy, precision, recall and F1 on the test split.
    Eval {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        vectors: Option<PathBuf>,
        #[arg(long)]
        baselines: bool,
        #[arg(long, conflicts_with = "irsc_sweep")]
        irsc_threshold: Option<f64>,
        #[arg(long)]
        irsc_sweep: bool,
        /// Disable suffix stripping in the overlap baselines.
        #[arg(long)]
        no_stem: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write one JSON record per method here.
        #[arg(long)]
        records: Option<PathBuf>,
    },
    /// Report TODOs in a repository that the model considers resolved.
    Scan {
        #[arg(long)]
        repo: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        vectors: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn parse_pair(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or("expected POS,NEG")?;
    let parse = |x: &str| x.trim().parse::<usize>().map_err(|e| e.to_string());
    Ok((parse(a)?, parse(b)?))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Cmd::Mine { repo, out } => {
            let n = commands::mine(&repo, &out)?;
            println!("mined {n} commits into {}", out.display());
        }
        Cmd::Build {
            input,
            out,
            lang,
            seed,
            manual_check,
        } => {
            let report = commands::build(&BuildArgs {
                input,
                output: out.clone(),
                language: lang,
                seed,
                manual_check,
            })?;
            println!("{}", report.stats);
            println!(
                "wrote {} samples to {} (stats: {})",
                report.outcome.samples.len(),
                out.display(),
                report.stats_path.display()
            );
        }
        Cmd::Train {
            corpus,
            out,
            mask,
            backend,
            vectors,
            seed,
            epochs,
            dim,
            batch_size,
            lr,
            validate_every,
            min_freq,
        } => {
            let config = TrainConfig {
                batch_size,
                learning_rate: lr,
                validate_every,
                max_epochs: epochs,
                seed,
                mask,
                backend,
                dim,
                min_freq,
                ..TrainConfig::default()
            };
            let outcome = commands::train_model(&corpus, &out, &config, vectors.as_deref())?;
            let h = &outcome.history;
            if let Some(best) = h.best.map(|i| &h.validations[i]) {
                println!(
                    "best validation F1 {:.4} (accuracy {:.4}) at batch {}",
                    best.f1, best.accuracy, best.batch
                );
            }
            println!("saved model to {}", out.display());
        }
        Cmd::Eval {
            corpus,
            model,
            vectors,
            baselines,
            irsc_threshold,
            irsc_sweep,
            no_stem,
            seed,
            records,
        } => {
            let irsc = if irsc_sweep {
                IrscMode::Sweep
            } else {
                IrscMode::Fixed(irsc_threshold.unwrap_or(DEFAULT_IRSC_THRESHOLD))
            };
            let out = commands::eval(&EvalArgs {
                corpus,
                model,
                vectors,
                baselines,
                irsc,
                stem: !no_stem,
                seed,
            })?;
            print!("{}", out.render());
            if let Some(path) = records {
                let text: String = out.reports.iter().map(|r| r.to_record() + "\n").collect();
                std::fs::write(&path, text).map_err(|e| Error::Io { path, source: e })?;
            }
        }
        Cmd::Scan {
            repo,
            model,
            vectors,
            report,
        } => {
            let findings =
                commands::scan_repo(&repo, &model, vectors.as_deref(), report.as_deref())?;
            if report.is_none() {
                let stdout = std::io::stdout();
                stale_todo::scan::write_report(&findings, stdout.lock()).map_err(|e| {
                    Error::Io {
                        path: "<stdout>".into(),
                        source: e,
                    }
                })?;
            } else {
                eprintln!("{} findings", findings.len());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = writeln!(std::io::stderr(), "{}", commands::error_record(&e));
            ExitCode::FAILURE
        }
    }
}

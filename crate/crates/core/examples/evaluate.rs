// Metrics from a confusion matrix, then a full evaluation of a trained
// model next to the baselines, with an IRSC threshold sweep.
//
// `cargo run --release --example evaluate`

use stale_todo::commands::{eval_split, EvalArgs, IrscMode};
use stale_todo::corpus::split_dataset;
use stale_todo::metrics::{metrics, Confusion};
use stale_todo::model::{save_model, train, TrainConfig};
use stale_todo::synthetic::synthetic_corpus;

pub fn run_example() -> stale_todo::Result<String> {
    let c = Confusion {
        tp: 3122,
        fp: 656,
        fn_: 476,
        tn: 3163,
    };
    let m = metrics(&c)?;
    let mut out = format!(
        "{c:?}\naccuracy {} precision {} recall {} F1 {}\n\n",
        m.accuracy.percent_string(),
        m.precision.unwrap().percent_string(),
        m.recall.unwrap().percent_string(),
        m.f1.unwrap().percent_string()
    );

    let split = split_dataset(&synthetic_corpus(300, 8), 0)?;
    let cfg = TrainConfig {
        max_epochs: 30,
        ..TrainConfig::default()
    };
    let model = train(&split, &cfg, None)?.model;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    save_model(&model, &path)?;

    let args = EvalArgs {
        corpus: dir.path().join("unused.jsonl"),
        model: Some(path),
        vectors: None,
        baselines: true,
        irsc: IrscMode::Sweep,
        stem: true,
        seed: 0,
    };
    out.push_str(&eval_split(&split, &args, "synthetic")?.render());
    Ok(out)
}

fn main() -> stale_todo::Result<()> {
    print!("{}", run_example()?);
    Ok(())
}

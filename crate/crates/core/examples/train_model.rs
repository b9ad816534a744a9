// Train the classifier on a generated corpus, save it and load it back.
//
// `cargo run --release --example train_model`

use stale_todo::corpus::split_dataset;
use stale_todo::model::{load_model, save_model, train, TrainConfig};
use stale_todo::synthetic::synthetic_corpus;

pub fn run_example() -> stale_todo::Result<String> {
    let split = split_dataset(&synthetic_corpus(200, 5), 0)?;
    let cfg = TrainConfig {
        max_epochs: 40,
        validate_every: 50,
        ..TrainConfig::default()
    };
    let outcome = train(&split, &cfg, None)?;
    let mut out = String::new();
    for (epoch, loss) in outcome.history.epoch_loss.iter().enumerate().step_by(10) {
        out.push_str(&format!("epoch {epoch:>3}  loss {loss:.4}\n"));
    }
    if let Some(best) = outcome
        .history
        .best
        .map(|i| &outcome.history.validations[i])
    {
        out.push_str(&format!(
            "best validation F1 {:.3} at batch {}\n",
            best.f1, best.batch
        ));
    }

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    save_model(&outcome.model, &path)?;
    let loaded = load_model(&path)?;
    let s = &split.test[0];
    out.push_str(&format!(
        "\"{}\" -> {:?} (score {:.3}, reloaded model agrees: {})\n",
        s.todo_comment,
        loaded.predict(s, None)?.status,
        loaded.score(s, None)?,
        loaded.score(s, None)? == outcome.model.score(s, None)?
    ));
    Ok(out)
}

fn main() -> stale_todo::Result<()> {
    print!("{}", run_example()?);
    Ok(())
}

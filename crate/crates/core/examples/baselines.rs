// The four non-learned baselines on a generated corpus.
//
// `cargo run --example baselines`

use stale_todo::baselines::{irsc, tcmo, tco, tmo, IrscModel, OverlapConfig};
use stale_todo::corpus::split_dataset;
use stale_todo::metrics::{evaluate, ReportTable};
use stale_todo::synthetic::synthetic_corpus;

pub fn run_example() -> stale_todo::Result<String> {
    let split = split_dataset(&synthetic_corpus(400, 11), 0)?;
    let cfg = OverlapConfig::default();
    let background = IrscModel::from_samples(&split.train, cfg);
    let test = &split.test;
    let reports = vec![
        evaluate("TCO", "synthetic", test, |s| Ok(tco(s, cfg)))?,
        evaluate("TMO", "synthetic", test, |s| Ok(tmo(s, cfg)))?,
        evaluate("TCMO", "synthetic", test, |s| Ok(tcmo(s, cfg)))?,
        evaluate("IRSC", "synthetic", test, |s| {
            Ok(irsc(s, &s.lines_added(), 0.3, &background))
        })?,
    ];
    let sim = background.similarity("todo: handle cache entry", "value = handle_cache(key)");
    Ok(format!(
        "{}\ncosine example: {sim:.3}\n",
        ReportTable(&reports)
    ))
}

fn main() -> stale_todo::Result<()> {
    print!("{}", run_example()?);
    Ok(())
}

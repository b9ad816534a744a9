//! Confusion counts, accuracy/precision/recall/F1 and report rendering.
//!
//! Metrics are kept as exact fractions of counts so percentages can be
//! rounded half-up without floating-point drift. Undefined ratios (0/0)
//! render as `n/a`.

use std::fmt;

use serde::Serialize;

use crate::corpus::{Label, TripleSample};
use crate::error::{Error, Result};
use crate::Status;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fraction {
    pub num: u64,
    pub den: u64,
}

impl Fraction {
    /// `None` when the denominator is zero.
    pub fn new(num: u64, den: u64) -> Option<Self> {
        (den > 0).then_some(Fraction { num, den })
    }

    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Percentage in tenths of a point, rounded half up (847 ≙ 84.7%).
    pub fn percent_tenths(self) -> u64 {
        (self.num * 2000 + self.den) / (2 * self.den)
    }

    pub fn percent_string(self) -> String {
        let t = self.percent_tenths();
        format!("{}.{}%", t / 10, t % 10)
    }
}

fn render(metric: Option<Fraction>) -> String {
    metric.map_or_else(|| "n/a".to_string(), Fraction::percent_string)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Confusion {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl Confusion {
    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }

    pub fn record(&mut self, predicted: Status, actual: Label) {
        match (predicted.is_resolved(), actual.is_positive()) {
            (true, true) => self.tp += 1,
            (false, false) => self.tn += 1,
            (true, false) => self.fp += 1,
            (false, true) => self.fn_ += 1,
        }
    }
}

/// Resolved is the positive class.
pub fn confusion(predictions: &[Status], labels: &[Label]) -> Result<Confusion> {
    if predictions.len() != labels.len() {
        return Err(Error::LengthMismatch {
            predictions: predictions.len(),
            labels: labels.len(),
        });
    }
    let mut c = Confusion::default();
    for (&p, &l) in predictions.iter().zip(labels) {
        c.record(p, l);
    }
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Metrics {
    pub confusion: Confusion,
    pub accuracy: Fraction,
    pub precision: Option<Fraction>,
    pub recall: Option<Fraction>,
    pub f1: Option<Fraction>,
}

pub fn metrics(c: &Confusion) -> Result<Metrics> {
    let total = c.total();
    if total == 0 {
        return Err(Error::EmptyEvaluation);
    }
    let precision = Fraction::new(c.tp, c.tp + c.fp);
    let recall = Fraction::new(c.tp, c.tp + c.fn_);
    // 2PR/(P+R) with P = tp/(tp+fp), R = tp/(tp+fn) reduces to 2tp/(2tp+fp+fn).
    let f1 = match (precision, recall) {
        (Some(_), Some(_)) if c.tp > 0 => Fraction::new(2 * c.tp, 2 * c.tp + c.fp + c.fn_),
        _ => None,
    };
    Ok(Metrics {
        confusion: *c,
        accuracy: Fraction {
            num: c.tp + c.tn,
            den: total,
        },
        precision,
        recall,
        f1,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub method: String,
    pub dataset: String,
    pub metrics: Metrics,
}

#[derive(Serialize)]
struct ReportRecord<'a> {
    method: &'a str,
    dataset: &'a str,
    accuracy: f64,
    precision: Option<f64>,
    recall: Option<f64>,
    f1: Option<f64>,
    #[serde(flatten)]
    confusion: Confusion,
}

impl MetricReport {
    /// One newline-free JSON record.
    pub fn to_record(&self) -> String {
        let m = &self.metrics;
        serde_json::to_string(&ReportRecord {
            method: &self.method,
            dataset: &self.dataset,
            accuracy: m.accuracy.value(),
            precision: m.precision.map(Fraction::value),
            recall: m.recall.map(Fraction::value),
            f1: m.f1.map(Fraction::value),
            confusion: m.confusion,
        })
        .expect("report serializes")
    }

    pub fn row(&self) -> [String; 5] {
        let m = &self.metrics;
        [
            self.method.clone(),
            m.accuracy.percent_string(),
            render(m.precision),
            render(m.recall),
            render(m.f1),
        ]
    }
}

/// Apply `method` to every test sample and score it against the labels.
pub fn evaluate<F>(
    method: &str,
    dataset: &str,
    test: &[TripleSample],
    mut predict: F,
) -> Result<MetricReport>
where
    F: FnMut(&TripleSample) -> Result<Status>,
{
    if test.is_empty() {
        return Err(Error::EmptyEvaluation);
    }
    let mut c = Confusion::default();
    for sample in test {
        c.record(predict(sample)?, sample.label);
    }
    Ok(MetricReport {
        method: method.to_string(),
        dataset: dataset.to_string(),
        metrics: metrics(&c)?,
    })
}

/// Fixed-width table with the columns Measure, Accuracy, Precision, Recall, F1.
pub struct ReportTable<'a>(pub &'a [MetricReport]);

impl fmt::Display for ReportTable<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let header = ["Measure", "Accuracy", "Precision", "Recall", "F1"].map(String::from);
        let rows: Vec<[String; 5]> = std::iter::once(header)
            .chain(self.0.iter().map(MetricReport::row))
            .collect();
        let width = rows.iter().map(|r| r[0].chars().count()).max().unwrap_or(0);
        for (i, row) in rows.iter().enumerate() {
            write!(f, "{:<width$}", row[0])?;
            for cell in &row[1..] {
                write!(f, " | {cell:>9}")?;
            }
            writeln!(f)?;
            if i == 0 {
                writeln!(f, "{}", "-".repeat(width + 4 * 12))?;
            }
        }
        Ok(())
    }
}

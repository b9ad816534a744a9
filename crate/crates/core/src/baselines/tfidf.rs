use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{word_tokens, OverlapConfig};
use crate::corpus::TripleSample;
use crate::Status;

pub const DEFAULT_IRSC_THRESHOLD: f64 = 0.3;

/// Sparse TF-IDF weights keyed by term.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TfIdfVector {
    pub weights: BTreeMap<String, f64>,
}

impl TfIdfVector {
    pub fn norm(&self) -> f64 {
        self.weights.values().map(|w| w * w).sum::<f64>().sqrt()
    }

    /// Cosine similarity; zero when either vector is zero.
    pub fn cosine(&self, other: &TfIdfVector) -> f64 {
        let denom = self.norm() * other.norm();
        if denom == 0.0 {
            return 0.0;
        }
        let dot: f64 = self
            .weights
            .iter()
            .filter_map(|(t, w)| other.weights.get(t).map(|v| w * v))
            .sum();
        (dot / denom).clamp(0.0, 1.0)
    }
}

/// Document frequencies of a background collection. Each comparison adds its
/// two documents to this collection before computing idf.
#[derive(Debug, Clone, Default)]
pub struct IrscModel {
    doc_freq: HashMap<String, usize>,
    n_docs: usize,
    config: OverlapConfig,
}

impl IrscModel {
    pub fn new<'a, I>(background: I, config: OverlapConfig) -> Self
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut model = IrscModel {
            config,
            ..Default::default()
        };
        for doc in background {
            model.n_docs += 1;
            let terms: BTreeSet<String> = word_tokens(doc, config).into_iter().collect();
            for t in terms {
                *model.doc_freq.entry(t).or_default() += 1;
            }
        }
        model
    }

    /// Background of every TODO comment and added-lines block in `samples`.
    pub fn from_samples(samples: &[TripleSample], config: OverlapConfig) -> Self {
        let added: Vec<String> = samples.iter().map(TripleSample::lines_added).collect();
        let docs = samples
            .iter()
            .map(|s| s.todo_comment.as_str())
            .chain(added.iter().map(String::as_str));
        Self::new(docs, config)
    }

    pub fn background_size(&self) -> usize {
        self.n_docs
    }

    /// TF-IDF vectors of `a` and `b` over background ∪ {a, b}, with raw term
    /// counts and smoothed idf `ln((1 + N) / (1 + df)) + 1`.
    pub fn vectorize_pair(&self, a: &str, b: &str) -> (TfIdfVector, TfIdfVector) {
        let ta = word_tokens(a, self.config);
        let tb = word_tokens(b, self.config);
        let set_a: BTreeSet<&String> = ta.iter().collect();
        let set_b: BTreeSet<&String> = tb.iter().collect();
        let n = (self.n_docs + 2) as f64;
        let idf = |t: &String| {
            let df = self.doc_freq.get(t).copied().unwrap_or(0)
                + usize::from(set_a.contains(t))
                + usize::from(set_b.contains(t));
            ((1.0 + n) / (1.0 + df as f64)).ln() + 1.0
        };
        let weigh = |terms: &[String]| {
            let mut counts: BTreeMap<String, f64> = BTreeMap::new();
            for t in terms {
                *counts.entry(t.clone()).or_default() += 1.0;
            }
            for (t, w) in counts.iter_mut() {
                *w *= idf(t);
            }
            TfIdfVector { weights: counts }
        };
        (weigh(&ta), weigh(&tb))
    }

    pub fn similarity(&self, a: &str, b: &str) -> f64 {
        let (va, vb) = self.vectorize_pair(a, b);
        va.cosine(&vb)
    }
}

/// Resolved iff cos(tfidf(todo), tfidf(lines_added)) ≥ threshold.
pub fn irsc(sample: &TripleSample, lines_added: &str, threshold: f64, model: &IrscModel) -> Status {
    Status::from_resolved(model.similarity(&sample.todo_comment, lines_added) >= threshold)
}

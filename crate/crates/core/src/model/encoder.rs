use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::vocab::PAD;
use crate::error::{Error, Result};

/// Width of externally produced sentence vectors.
pub const EXTERNAL_DIM: usize = 768;
pub const EMBEDDING_INIT_RANGE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Internal,
    External,
}

impl std::str::FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "internal" => Ok(Backend::Internal),
            "external" => Ok(Backend::External),
            other => Err(Error::InvalidArgument(format!("unknown backend `{other}`"))),
        }
    }
}

/// A |V| × D lookup table, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    pub rows: usize,
    pub dim: usize,
    pub data: Vec<f64>,
}

impl Embedding {
    pub fn zeros(rows: usize, dim: usize) -> Self {
        Embedding {
            rows,
            dim,
            data: vec![0.0; rows * dim],
        }
    }

    pub fn random<R: Rng>(rows: usize, dim: usize, rng: &mut R) -> Self {
        let data = (0..rows * dim)
            .map(|_| rng.random_range(-EMBEDDING_INIT_RANGE..=EMBEDDING_INIT_RANGE))
            .collect();
        Embedding { rows, dim, data }
    }

    pub fn row(&self, id: usize) -> &[f64] {
        &self.data[id * self.dim..(id + 1) * self.dim]
    }

    /// Mean of the rows of non-PAD ids; the zero vector when none remain.
    pub fn encode(&self, ids: &[usize]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        let mut n = 0usize;
        for &id in ids.iter().filter(|&&id| id != PAD) {
            n += 1;
            for (o, v) in out.iter_mut().zip(self.row(id)) {
                *o += v;
            }
        }
        if n > 0 {
            let inv = 1.0 / n as f64;
            out.iter_mut().for_each(|o| *o *= inv);
        }
        out
    }

    /// Scatter `grad_out` (∂L/∂h) back onto the rows used by `encode(ids)`.
    pub fn accumulate_grad(&self, ids: &[usize], grad_out: &[f64], grad: &mut [f64]) {
        let used: Vec<usize> = ids.iter().copied().filter(|&id| id != PAD).collect();
        if used.is_empty() {
            return;
        }
        let inv = 1.0 / used.len() as f64;
        for id in used {
            let row = &mut grad[id * self.dim..(id + 1) * self.dim];
            for (g, d) in row.iter_mut().zip(grad_out) {
                *g += d * inv;
            }
        }
    }
}

/// Lowercase hex SHA-256 of the exact text.
pub fn text_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Precomputed sentence vectors keyed by [`text_hash`].
#[derive(Debug, Clone, Default)]
pub struct ExternalVectors {
    vectors: HashMap<String, Vec<f64>>,
}

impl ExternalVectors {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, text: &str, vector: Vec<f64>) -> Result<()> {
        if vector.len() != EXTERNAL_DIM {
            return Err(Error::ShapeMismatch {
                expected: EXTERNAL_DIM,
                actual: vector.len(),
            });
        }
        self.vectors.insert(text_hash(text), vector);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, text: &str) -> Result<&[f64]> {
        let hash = text_hash(text);
        match self.vectors.get(&hash) {
            Some(v) => Ok(v),
            None => Err(Error::MissingExternalVector(hash)),
        }
    }

    /// Records of the form `hash v1 v2 ... v768`, one per line.
    pub fn parse<R: BufRead>(reader: R, origin: &Path) -> Result<Self> {
        let mut vectors = HashMap::new();
        for (i, line) in reader.lines().enumerate() {
            let line_no = i + 1;
            let line = line.map_err(|e| Error::io(origin, e))?;
            let mut fields = line.split_whitespace();
            let Some(hash) = fields.next() else { continue };
            if hash.len() != 64 || !hash.bytes().all(|b| b.is_ascii_hexdigit()) {
                return Err(Error::SchemaViolation {
                    line_no,
                    reason: format!("`{hash}` is not a hex digest"),
                });
            }
            let values = fields
                .map(|f| f.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::SchemaViolation {
                    line_no,
                    reason: e.to_string(),
                })?;
            if values.len() != EXTERNAL_DIM {
                return Err(Error::SchemaViolation {
                    line_no,
                    reason: format!("expected {EXTERNAL_DIM} values, found {}", values.len()),
                });
            }
            if values.iter().any(|v| !v.is_finite()) {
                return Err(Error::SchemaViolation {
                    line_no,
                    reason: "non-finite value".into(),
                });
            }
            vectors.insert(hash.to_ascii_lowercase(), values);
        }
        Ok(ExternalVectors { vectors })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::parse(BufReader::new(file), path)
    }

    pub fn write<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        let mut keys: Vec<&String> = self.vectors.keys().collect();
        keys.sort();
        for k in keys {
            write!(out, "{k}")?;
            for v in &self.vectors[k] {
                write!(out, " {v}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use super::{Backend, Model};
use crate::error::{Error, Result};

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Writes `model` as JSON; floats round-trip exactly.
pub fn save_model(model: &Model, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    serde_json::to_writer(&mut out, model).map_err(|e| Error::io(path, e.into()))?;
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<Model> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let model: Model =
        serde_json::from_reader(BufReader::new(file)).map_err(|e| Error::SchemaViolation {
            line_no: e.line(),
            reason: e.to_string(),
        })?;
    check(&model)?;
    Ok(model)
}

fn check(model: &Model) -> Result<()> {
    if model.format_version != MODEL_FORMAT_VERSION {
        return Err(Error::SchemaViolation {
            line_no: 1,
            reason: format!("unsupported model format {}", model.format_version),
        });
    }
    let cfg = &model.config;
    let shape = |expected: usize, actual: usize| {
        if expected == actual {
            Ok(())
        } else {
            Err(Error::ShapeMismatch { expected, actual })
        }
    };
    let n_tables = match cfg.backend {
        Backend::Internal => cfg.mask.components().len(),
        Backend::External => 0,
    };
    shape(n_tables, model.encoders.len())?;
    for e in &model.encoders {
        shape(model.vocab.len(), e.rows)?;
        shape(cfg.dim, e.dim)?;
        shape(e.rows * e.dim, e.data.len())?;
    }
    let mut width = cfg.input_width();
    shape(cfg.hidden.len() + 1, model.mlp.layers.len())?;
    for l in &model.mlp.layers {
        shape(width, l.input)?;
        shape(l.input * l.output, l.weights.len())?;
        shape(l.output, l.bias.len())?;
        width = l.output;
    }
    shape(1, width)
}

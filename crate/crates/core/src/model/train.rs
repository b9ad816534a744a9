use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    clip_gradients, default_hidden, Adam, Backend, ComponentMask, ExternalVectors, Inputs, Model,
    ModelConfig, DEFAULT_CLIP_NORM, DROPOUT_RATE, INTERNAL_DIM,
};
use crate::corpus::{DatasetSplit, TripleSample};
use crate::error::{Error, Result};
use crate::metrics::{confusion, metrics};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub learning_rate: f64,
    pub grad_clip_norm: f64,
    pub validate_every: usize,
    pub max_epochs: usize,
    pub seed: u64,
    pub mask: ComponentMask,
    pub backend: Backend,
    /// Embedding width of the internal backend.
    pub dim: usize,
    /// Hidden widths; derived from the input width when `None`.
    pub hidden: Option<Vec<usize>>,
    pub min_freq: usize,
    pub dropout: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 32,
            learning_rate: 0.001,
            grad_clip_norm: DEFAULT_CLIP_NORM,
            validate_every: 1000,
            max_epochs: 10,
            seed: 0,
            mask: ComponentMask::default(),
            backend: Backend::Internal,
            dim: INTERNAL_DIM,
            hidden: None,
            min_freq: 2,
            dropout: DROPOUT_RATE,
        }
    }
}

impl TrainConfig {
    pub fn model_config(&self) -> ModelConfig {
        let mut cfg = ModelConfig::new(self.backend, self.mask);
        if self.backend == Backend::Internal {
            cfg.dim = self.dim;
        }
        cfg.hidden = self
            .hidden
            .clone()
            .unwrap_or_else(|| default_hidden(cfg.dim));
        cfg.dropout = self.dropout;
        cfg
    }

    fn validate(&self) -> Result<()> {
        if self.mask.is_empty() {
            return Err(Error::InvalidArgument("component mask is empty".into()));
        }
        if self.batch_size == 0 || self.validate_every == 0 {
            return Err(Error::InvalidArgument(
                "batch_size and validate_every must be positive".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::InvalidArgument(format!(
                "dropout {} not in [0, 1)",
                self.dropout
            )));
        }
        if self.backend == Backend::Internal && self.dim == 0 {
            return Err(Error::InvalidArgument(
                "embedding width must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Validation {
    pub batch: usize,
    pub epoch: usize,
    /// F1 on the validation set; an undefined F1 counts as zero.
    pub f1: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    /// Mean training loss per epoch.
    pub epoch_loss: Vec<f64>,
    pub validations: Vec<Validation>,
    /// Index into `validations` of the retained checkpoint.
    pub best: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: Model,
    pub history: TrainHistory,
}

pub fn train(
    split: &DatasetSplit,
    config: &TrainConfig,
    vectors: Option<&ExternalVectors>,
) -> Result<TrainOutcome> {
    train_on(&split.train, &split.val, config, vectors)
}

/// Minibatch Adam on `train`, keeping the parameters with the best
/// validation F1 (earliest wins ties).
pub fn train_on(
    train: &[TripleSample],
    val: &[TripleSample],
    config: &TrainConfig,
    vectors: Option<&ExternalVectors>,
) -> Result<TrainOutcome> {
    config.validate()?;
    if train.is_empty() || val.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let model_config = config.model_config();
    let comps = model_config.mask.components();
    let vocab = match model_config.backend {
        Backend::Internal => {
            let docs = train
                .iter()
                .flat_map(|s| comps.iter().map(move |c| c.text(s)));
            super::Vocab::build(docs, config.min_freq)?
        }
        Backend::External => super::Vocab::build([""], 1)?,
    };
    if model_config.backend == Backend::External && vectors.is_none() {
        return Err(Error::InvalidArgument(
            "external backend needs a vectors file".into(),
        ));
    }
    let mut model = Model::init(model_config, vocab, &mut rng)?;
    model.trained_with = Some(config.clone());
    let initial = model.clone();

    let train_inputs: Vec<Inputs> = train
        .iter()
        .map(|s| model.inputs(s, vectors))
        .collect::<Result<_>>()?;
    let val_inputs: Vec<Inputs> = val
        .iter()
        .map(|s| model.inputs(s, vectors))
        .collect::<Result<_>>()?;
    let val_labels: Vec<_> = val.iter().map(|s| s.label).collect();

    let shapes: Vec<usize> = model.zero_grads().iter().map(Vec::len).collect();
    let mut adam = Adam::new(config.learning_rate, &shapes);
    let mut history = TrainHistory::default();
    let mut best: Option<(f64, Model)> = None;
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut batches = 0usize;

    let validate = |model: &Model, batch: usize, epoch: usize| -> Result<Validation> {
        let preds = val_inputs
            .iter()
            .map(|x| Ok(super::Prediction::from_score(model.score_inputs(x)?).status))
            .collect::<Result<Vec<_>>>()?;
        let m = metrics(&confusion(&preds, &val_labels)?)?;
        Ok(Validation {
            batch,
            epoch,
            f1: m.f1.map(|f| f.value()).unwrap_or(0.0),
            accuracy: m.accuracy.value(),
        })
    };

    for epoch in 0..config.max_epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(config.batch_size) {
            let scale = 1.0 / chunk.len() as f64;
            let mut grads = model.zero_grads();
            let mut batch_loss = 0.0;
            for &i in chunk {
                batch_loss += model.accumulate_gradient(
                    &train_inputs[i],
                    train[i].label,
                    true,
                    &mut rng,
                    scale,
                    &mut grads,
                )?;
            }
            batches += 1;
            if !batch_loss.is_finite() || grads.iter().flatten().any(|g| !g.is_finite()) {
                let last = best.map(|(_, m)| m).unwrap_or(initial);
                return Err(Error::Diverged {
                    batch: batches,
                    last_checkpoint: Box::new(last),
                });
            }
            epoch_loss += batch_loss;
            clip_gradients(&mut grads, config.grad_clip_norm);
            adam.step(&mut model.tensors_mut(), &grads);

            if batches.is_multiple_of(config.validate_every) {
                let v = validate(&model, batches, epoch)?;
                record(&mut history, &mut best, v, &model);
            }
        }
        history.epoch_loss.push(epoch_loss / train.len() as f64);
    }
    if !batches.is_multiple_of(config.validate_every) || batches == 0 {
        let v = validate(&model, batches, config.max_epochs.saturating_sub(1))?;
        record(&mut history, &mut best, v, &model);
    }
    let model = best.map(|(_, m)| m).unwrap_or(model);
    Ok(TrainOutcome { model, history })
}

fn record(
    history: &mut TrainHistory,
    best: &mut Option<(f64, Model)>,
    v: Validation,
    model: &Model,
) {
    if best.as_ref().is_none_or(|(f1, _)| v.f1 > *f1) {
        *best = Some((v.f1, model.clone()));
        history.best = Some(history.validations.len());
    }
    history.validations.push(v);
}

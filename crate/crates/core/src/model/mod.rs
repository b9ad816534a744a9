//! Three-encoder classifier over ⟨code change, TODO comment, commit message⟩.
//!
//! Each enabled component is encoded to a vector, the vectors are
//! concatenated and a ReLU MLP with a sigmoid output gives P(Resolved).

mod encoder;
mod mlp;
mod optim;
mod persist;
mod train;
mod vocab;

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use encoder::{text_hash, Backend, Embedding, ExternalVectors, EXTERNAL_DIM};
pub use mlp::{loss, sigmoid, Dense, ForwardCache, Mlp, DROPOUT_RATE, LOSS_EPSILON};
pub use optim::{clip_gradients, global_norm, Adam, DEFAULT_CLIP_NORM};
pub use persist::{load_model, save_model, MODEL_FORMAT_VERSION};
pub use train::{train, train_on, TrainConfig, TrainHistory, TrainOutcome, Validation};
pub use vocab::{tokenize, Vocab, CLS, PAD, UNK};

use crate::corpus::{Label, TripleSample};
use crate::error::{Error, Result};
use crate::Status;

pub const INTERNAL_DIM: usize = 128;
pub const DECISION_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    CodeChange,
    Todo,
    Message,
}

impl Component {
    pub const ALL: [Component; 3] = [Component::CodeChange, Component::Todo, Component::Message];

    pub fn key(self) -> &'static str {
        match self {
            Component::CodeChange => "cc",
            Component::Todo => "td",
            Component::Message => "msg",
        }
    }

    pub fn text(self, sample: &TripleSample) -> &str {
        match self {
            Component::CodeChange => &sample.code_change,
            Component::Todo => &sample.todo_comment,
            Component::Message => sample.commit_msg.as_str(),
        }
    }
}

/// Subset of components fed to the classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentMask {
    pub cc: bool,
    pub td: bool,
    pub msg: bool,
}

impl Default for ComponentMask {
    fn default() -> Self {
        ComponentMask {
            cc: true,
            td: true,
            msg: true,
        }
    }
}

impl ComponentMask {
    pub fn new(components: &[Component]) -> Result<Self> {
        let mask = ComponentMask {
            cc: components.contains(&Component::CodeChange),
            td: components.contains(&Component::Todo),
            msg: components.contains(&Component::Message),
        };
        if mask.is_empty() {
            return Err(Error::InvalidArgument("component mask is empty".into()));
        }
        Ok(mask)
    }

    pub fn is_empty(&self) -> bool {
        !(self.cc || self.td || self.msg)
    }

    pub fn contains(&self, c: Component) -> bool {
        match c {
            Component::CodeChange => self.cc,
            Component::Todo => self.td,
            Component::Message => self.msg,
        }
    }

    pub fn components(&self) -> Vec<Component> {
        Component::ALL
            .into_iter()
            .filter(|c| self.contains(*c))
            .collect()
    }
}

impl std::str::FromStr for ComponentMask {
    type Err = Error;

    /// Comma-separated subset of `cc`, `td`, `msg`.
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = Vec::new();
        for key in s.split(',').map(str::trim).filter(|k| !k.is_empty()) {
            let c = Component::ALL
                .into_iter()
                .find(|c| c.key().eq_ignore_ascii_case(key))
                .ok_or_else(|| Error::InvalidArgument(format!("unknown component `{key}`")))?;
            parts.push(c);
        }
        ComponentMask::new(&parts)
    }
}

impl fmt::Display for ComponentMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let keys: Vec<&str> = self.components().into_iter().map(Component::key).collect();
        f.write_str(&keys.join(","))
    }
}

/// Architecture of a model; fixed once trained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub backend: Backend,
    pub dim: usize,
    pub mask: ComponentMask,
    pub hidden: Vec<usize>,
    pub dropout: f64,
    pub max_code_tokens: usize,
    pub max_todo_tokens: usize,
    pub max_msg_tokens: usize,
}

impl ModelConfig {
    pub fn new(backend: Backend, mask: ComponentMask) -> Self {
        let dim = match backend {
            Backend::Internal => INTERNAL_DIM,
            Backend::External => EXTERNAL_DIM,
        };
        ModelConfig {
            backend,
            dim,
            mask,
            hidden: default_hidden(dim),
            dropout: DROPOUT_RATE,
            max_code_tokens: 200,
            max_todo_tokens: 30,
            max_msg_tokens: 30,
        }
    }

    pub fn max_tokens(&self, c: Component) -> usize {
        match c {
            Component::CodeChange => self.max_code_tokens,
            Component::Todo => self.max_todo_tokens,
            Component::Message => self.max_msg_tokens,
        }
    }

    pub fn input_width(&self) -> usize {
        self.mask.components().len() * self.dim
    }
}

/// Three halving hidden layers: 256/128/64 for 768-wide inputs, D/2 onward otherwise.
pub fn default_hidden(dim: usize) -> Vec<usize> {
    let first = if dim >= EXTERNAL_DIM {
        256
    } else {
        (dim / 2).max(1)
    };
    vec![first, (first / 2).max(1), (first / 4).max(1)]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub score: f64,
    pub status: Status,
}

impl Prediction {
    pub fn from_score(score: f64) -> Self {
        Prediction {
            score,
            status: Status::from_resolved(score >= DECISION_THRESHOLD),
        }
    }
}

/// Encoder input of one sample: token ids for the lookup tables, or the
/// already concatenated external vectors.
#[derive(Debug, Clone, PartialEq)]
pub enum Inputs {
    Ids(Vec<Vec<usize>>),
    Vectors(Vec<f64>),
}

/// Trained parameters plus everything needed to apply them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub format_version: u32,
    pub config: ModelConfig,
    pub vocab: Vocab,
    /// One lookup table per enabled component, in [`Component::ALL`] order.
    /// Empty for the external backend.
    pub encoders: Vec<Embedding>,
    pub mlp: Mlp,
    pub trained_with: Option<TrainConfig>,
}

impl Model {
    pub fn init<R: Rng>(config: ModelConfig, vocab: Vocab, rng: &mut R) -> Result<Self> {
        if config.mask.is_empty() {
            return Err(Error::InvalidArgument("component mask is empty".into()));
        }
        if config.backend == Backend::External && config.dim != EXTERNAL_DIM {
            return Err(Error::ShapeMismatch {
                expected: EXTERNAL_DIM,
                actual: config.dim,
            });
        }
        let encoders = match config.backend {
            Backend::Internal => config
                .mask
                .components()
                .iter()
                .map(|_| Embedding::random(vocab.len(), config.dim, rng))
                .collect(),
            Backend::External => Vec::new(),
        };
        let mlp = Mlp::new(config.input_width(), &config.hidden, config.dropout, rng);
        Ok(Model {
            format_version: MODEL_FORMAT_VERSION,
            config,
            vocab,
            encoders,
            mlp,
            trained_with: None,
        })
    }

    /// Reads only the enabled components of `sample`.
    pub fn inputs(
        &self,
        sample: &TripleSample,
        vectors: Option<&ExternalVectors>,
    ) -> Result<Inputs> {
        let comps = self.config.mask.components();
        match self.config.backend {
            Backend::Internal => Ok(Inputs::Ids(
                comps
                    .iter()
                    .map(|&c| self.vocab.encode(c.text(sample), self.config.max_tokens(c)))
                    .collect(),
            )),
            Backend::External => {
                let vectors = vectors.ok_or_else(|| {
                    Error::InvalidArgument("external backend needs a vectors file".into())
                })?;
                let mut out = Vec::with_capacity(self.config.input_width());
                for c in comps {
                    out.extend_from_slice(vectors.get(c.text(sample))?);
                }
                Ok(Inputs::Vectors(out))
            }
        }
    }

    /// z1: the concatenated component encodings.
    pub fn encode(&self, inputs: &Inputs) -> Vec<f64> {
        match inputs {
            Inputs::Ids(ids) => self
                .encoders
                .iter()
                .zip(ids)
                .flat_map(|(e, ids)| e.encode(ids))
                .collect(),
            Inputs::Vectors(v) => v.clone(),
        }
    }

    pub fn score_inputs(&self, inputs: &Inputs) -> Result<f64> {
        self.mlp.score(&self.encode(inputs))
    }

    pub fn score(&self, sample: &TripleSample, vectors: Option<&ExternalVectors>) -> Result<f64> {
        self.score_inputs(&self.inputs(sample, vectors)?)
    }

    pub fn predict(
        &self,
        sample: &TripleSample,
        vectors: Option<&ExternalVectors>,
    ) -> Result<Prediction> {
        Ok(Prediction::from_score(self.score(sample, vectors)?))
    }

    /// Trainable tensors: lookup tables, then MLP weights and biases.
    pub fn tensors_mut(&mut self) -> Vec<&mut Vec<f64>> {
        let mut out: Vec<&mut Vec<f64>> = self.encoders.iter_mut().map(|e| &mut e.data).collect();
        out.extend(self.mlp.tensors_mut());
        out
    }

    pub fn zero_grads(&self) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = self
            .encoders
            .iter()
            .map(|e| vec![0.0; e.data.len()])
            .collect();
        out.extend(self.mlp.zero_grads());
        out
    }

    /// Adds `scale · ∇loss` of one sample into `grads` and returns its loss.
    pub fn accumulate_gradient<R: Rng>(
        &self,
        inputs: &Inputs,
        label: Label,
        train_mode: bool,
        rng: &mut R,
        scale: f64,
        grads: &mut [Vec<f64>],
    ) -> Result<f64> {
        let y = if label.is_positive() { 1.0 } else { 0.0 };
        let cache = self.mlp.forward(&self.encode(inputs), train_mode, rng)?;
        let n_enc = self.encoders.len();
        let (enc_grads, mlp_grads) = grads.split_at_mut(n_enc);
        let dz1 = self.mlp.backward(&cache, y, scale, mlp_grads);
        if let Inputs::Ids(ids) = inputs {
            let d = self.config.dim;
            for (k, (table, ids)) in self.encoders.iter().zip(ids).enumerate() {
                table.accumulate_grad(ids, &dz1[k * d..(k + 1) * d], &mut enc_grads[k]);
            }
        }
        Ok(loss(cache.score, y))
    }
}

//! Detect obsolete TODO comments from version-control history.
//!
//! The crate mines `git log -p` output into ⟨code change, TODO comment,
//! commit message⟩ triples, labels them from where the TODO sits in the diff
//! (removed ⇒ resolved, unchanged context ⇒ unresolved), trains a
//! three-encoder classifier with an MLP fusion head, compares it against
//! lexical baselines and scans live repositories for TODOs that were resolved
//! but never deleted.
//!
//! Each capability has a runnable program under `examples/`.

pub mod baselines;
pub mod commands;
pub mod corpus;
pub mod diff;
pub mod error;
pub mod git;
pub mod metrics;
pub mod model;
pub mod scan;
pub mod synthetic;
pub mod todo;

pub use error::{Error, Result};

use serde::{Deserialize, Serialize};

/// Binary status of a TODO with respect to a commit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Resolved,
    Unresolved,
}

impl Status {
    pub fn from_resolved(resolved: bool) -> Self {
        if resolved {
            Status::Resolved
        } else {
            Status::Unresolved
        }
    }

    pub fn is_resolved(self) -> bool {
        matches!(self, Status::Resolved)
    }
}

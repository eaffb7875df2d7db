//! Corpus I/O: M2 files, encoder input formatting, training-pair emission
//! and run manifests.

mod m2;
mod manifest;
mod pairs;
mod shuffle;

pub use m2::{parse_m2, write_m2, write_sentence, AnnotatedSentence, M2Reader};
pub use manifest::{file_digest, InputDigest, Manifest};
pub use pairs::{
    emit_pairs, format_model_input, parse_model_input, EmittedPairs, Strategy, TargetKind,
    TrainingPair,
};
pub use shuffle::{permutation, Mcg64};

use thiserror::Error;

use crate::align::AlignError;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("block starting at line {line}: {source}")]
    UnsortedEdits { line: usize, source: AlignError },
    #[error("not a model input: {0}")]
    ModelInput(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CorpusError {
    pub(crate) fn format(line: usize, message: impl Into<String>) -> Self {
        CorpusError::Format {
            line,
            message: message.into(),
        }
    }

    /// 1-based line number for parse failures.
    pub fn line(&self) -> Option<usize> {
        match self {
            CorpusError::Format { line, .. } | CorpusError::UnsortedEdits { line, .. } => {
                Some(*line)
            }
            _ => None,
        }
    }
}

//! Fine-grained factuality annotations for abstractive summarization.
//!
//! The crate covers the whole pipeline around dependency-arc factuality:
//!
//! * [`data`]: documents, parses, label sets and their JSONL form
//! * [`derive`]: conversions between word, arc and sentence labels
//! * [`entc`] and [`genc`]: synthetic training data
//! * [`models`]: sentence-level and arc-level classifiers over a pluggable encoder
//! * [`eval`]: metrics, dataset splits and checkpoint curves
//! * [`masked`]: factuality masks for summarization training targets

pub mod data;
pub mod derive;
pub mod entc;
pub mod error;
pub mod eval;
pub mod genc;
pub mod masked;
pub mod models;
pub mod providers;
pub mod rng;
#[doc(hidden)]
pub mod testing;

pub use error::{Error, Result};

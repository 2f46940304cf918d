//! Domain types, validation and storage for documents, parses and labels.

pub mod conll;
pub mod edit;
pub mod jsonl;
mod types;

pub use conll::{ingest_parse, read_conll, ConllRow};
pub use jsonl::{from_json_line, load_examples, save_examples, to_json_line, LoadReport};
pub use types::*;

//! Line-delimited JSON storage for [`AnnotatedExample`]s.
//!
//! Field order in [`Record`] is alphabetical so that serialization is a pure
//! function of the example: identical inputs produce identical bytes.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::types::*;
use crate::error::{Error, Result};

type WireArc = (usize, usize, String);

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TagRecord {
    cat: String,
    end: usize,
    orient: String,
    start: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Record {
    arc_labels: Option<Vec<u8>>,
    arcs: Vec<WireArc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    doc_arcs: Option<Vec<WireArc>>,
    doc_tokens: Vec<String>,
    #[serde(default)]
    error_tags: Option<Vec<TagRecord>>,
    id: String,
    #[serde(default)]
    meta: BTreeMap<String, String>,
    #[serde(default = "default_repr")]
    parse_repr: String,
    #[serde(default = "default_provenance")]
    provenance: String,
    #[serde(default)]
    sent_label: u8,
    sum_tokens: Vec<String>,
    #[serde(default)]
    word_mask: Option<Vec<u8>>,
}

fn default_repr() -> String {
    "basic".into()
}

fn default_provenance() -> String {
    "human".into()
}

fn wire_arcs(arcs: &[Arc]) -> Vec<WireArc> {
    arcs.iter().map(|a| (a.head, a.child, a.relation.clone())).collect()
}

fn domain_arcs(arcs: Vec<WireArc>) -> Vec<Arc> {
    arcs.into_iter().map(|(h, c, r)| Arc::new(h, c, r)).collect()
}

fn flag(value: u8, field: &str) -> Result<bool> {
    match value {
        0 => Ok(false),
        1 => Ok(true),
        other => Err(Error::validation(field, format!("expected 0 or 1, got {other}"))),
    }
}

impl From<&AnnotatedExample> for Record {
    fn from(ex: &AnnotatedExample) -> Self {
        let mut meta = ex.document.meta.clone();
        if ex.document.id != ex.summary.id {
            meta.insert("doc_id".into(), ex.document.id.clone());
        }
        Record {
            arc_labels: ex
                .labels
                .arc_labels
                .as_ref()
                .map(|ls| ls.iter().map(|l| l.to_wire()).collect()),
            arcs: wire_arcs(ex.summary.parse.arcs()),
            doc_arcs: ex.document.dependencies.as_deref().map(wire_arcs),
            doc_tokens: ex.document.tokens.clone(),
            error_tags: ex.error_tags.as_ref().map(|tags| {
                tags.iter()
                    .map(|t| TagRecord {
                        cat: t.category.as_str().into(),
                        end: t.end,
                        orient: t.orientation.as_str().into(),
                        start: t.start,
                    })
                    .collect()
            }),
            id: ex.summary.id.clone(),
            meta,
            parse_repr: ex.summary.parse.representation().as_str().into(),
            provenance: ex.labels.provenance.as_str().into(),
            sent_label: ex.labels.sentence_label.to_wire(),
            sum_tokens: ex.summary.tokens.clone(),
            word_mask: ex
                .labels
                .word_mask
                .as_ref()
                .map(|m| m.iter().map(|&w| w as u8).collect()),
        }
    }
}

impl TryFrom<Record> for AnnotatedExample {
    type Error = Error;

    fn try_from(rec: Record) -> Result<Self> {
        let repr = ParseRepr::parse(&rec.parse_repr)?;
        let parse = DependencyParse::new(domain_arcs(rec.arcs), rec.sum_tokens.len(), repr)?;
        let summary = SummarySentence::new(rec.id.clone(), rec.sum_tokens, parse)?;

        let mut meta = rec.meta;
        let doc_id = meta.remove("doc_id").unwrap_or_else(|| rec.id.clone());
        let text = rec.doc_tokens.join(" ");
        let document = Document {
            id: doc_id,
            text,
            tokens: rec.doc_tokens,
            meta,
            dependencies: rec.doc_arcs.map(domain_arcs),
        };

        let word_mask = rec
            .word_mask
            .map(|m| m.into_iter().map(|v| flag(v, "word_mask")).collect::<Result<Vec<_>>>())
            .transpose()?;
        let arc_labels = rec
            .arc_labels
            .map(|ls| {
                ls.into_iter()
                    .map(|v| Label::from_wire(v, "arc_labels"))
                    .collect::<Result<Vec<_>>>()
            })
            .transpose()?;
        let labels = FactLabelSet {
            sentence_label: Label::from_wire(rec.sent_label, "sent_label")?,
            word_mask,
            arc_labels,
            provenance: Provenance::parse(&rec.provenance)?,
        };
        let error_tags = rec
            .error_tags
            .map(|tags| {
                tags.into_iter()
                    .map(|t| {
                        Ok(ErrorTag {
                            category: ErrorCategory::parse(&t.cat)?,
                            orientation: Orientation::parse(&t.orient)?,
                            start: t.start,
                            end: t.end,
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .transpose()?;

        let ex = AnnotatedExample {
            document,
            summary,
            labels,
            error_tags,
        };
        ex.validate()?;
        Ok(ex)
    }
}

/// Serialize one example as a single JSON line (no trailing newline).
pub fn to_json_line(example: &AnnotatedExample) -> String {
    serde_json::to_string(&Record::from(example)).expect("record serialization is infallible")
}

/// Parse and validate one JSON line.
pub fn from_json_line(line: &str, line_no: usize) -> Result<AnnotatedExample> {
    let rec: Record = serde_json::from_str(line).map_err(|e| Error::parse(line_no, e.to_string()))?;
    AnnotatedExample::try_from(rec)
}

/// Outcome of [`load_examples`].
#[derive(Debug, Clone, Default)]
pub struct LoadReport {
    pub examples: Vec<AnnotatedExample>,
    /// Lines dropped in lenient mode.
    pub skipped: usize,
}

/// Load examples from a JSONL file.
///
/// Strict mode aborts on the first malformed or invalid line. Lenient mode skips
/// such lines and counts them. Blank lines are ignored in both modes.
pub fn load_examples(path: impl AsRef<Path>, strict: bool) -> Result<LoadReport> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut report = LoadReport::default();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        match from_json_line(&line, idx + 1) {
            Ok(ex) => report.examples.push(ex),
            Err(e) if strict => {
                return Err(match e {
                    Error::Validation { field, message } => Error::Validation {
                        field,
                        message: format!("line {}: {message}", idx + 1),
                    },
                    other => other,
                })
            }
            Err(e) => {
                log::warn!("{}:{}: skipping line: {e}", path.display(), idx + 1);
                report.skipped += 1;
            }
        }
    }
    Ok(report)
}

/// Write examples as JSONL, one per line. Returns the number written.
pub fn save_examples(examples: &[AnnotatedExample], path: impl AsRef<Path>) -> Result<usize> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for ex in examples {
        writeln!(out, "{}", to_json_line(ex)).map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))?;
    Ok(examples.len())
}

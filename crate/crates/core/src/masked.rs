//! Factuality masks for summarization targets and the masked likelihood
//! objective: tokens a factuality model flags contribute nothing to training.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::AnnotatedExample;
use crate::error::{Error, Result};
use crate::models::{localize_at, ArcScorer};

/// Where a mask came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskProvenance {
    pub model: String,
    pub kind: String,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaskedTarget {
    pub id: String,
    pub doc_id: String,
    pub tokens: Vec<String>,
    /// `true` = train on this token (judged factual).
    pub mask: Vec<bool>,
    pub provenance: MaskProvenance,
}

/// Mask every reference summary: a token is kept unless an arc touching it is
/// flagged non-factual at `threshold`.
pub fn derive_masks(
    scorer: &dyn ArcScorer,
    corpus: &[AnnotatedExample],
    threshold: f64,
    provenance: &MaskProvenance,
) -> Result<Vec<MaskedTarget>> {
    corpus
        .iter()
        .map(|ex| {
            if ex.summary.parse.token_count() != ex.summary.tokens.len() {
                return Err(Error::validation("arcs", format!("{}: parse and tokens disagree", ex.id())));
            }
            let (_, flagged) = localize_at(scorer, &ex.document, &ex.summary, threshold)?;
            Ok(MaskedTarget {
                id: ex.summary.id.clone(),
                doc_id: ex.document.id.clone(),
                tokens: ex.summary.tokens.clone(),
                mask: flagged.iter().map(|&f| !f).collect(),
                provenance: MaskProvenance {
                    threshold,
                    ..provenance.clone()
                },
            })
        })
        .collect()
}

/// Fraction of all target tokens that are masked out, pooled over the corpus.
pub fn masked_fraction(targets: &[MaskedTarget]) -> f64 {
    let total: usize = targets.iter().map(|t| t.mask.len()).sum();
    let masked: usize = targets.iter().map(|t| t.mask.iter().filter(|&&m| !m).count()).sum();
    masked as f64 / total as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// Plain sum over kept tokens.
    #[default]
    Sum,
    /// Sum divided by the number of kept tokens.
    MeanKept,
}

impl std::str::FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sum" => Ok(Normalization::Sum),
            "mean" => Ok(Normalization::MeanKept),
            other => Err(Error::validation("normalization", format!("expected sum or mean, got `{other}`"))),
        }
    }
}

/// `-sum_i M_i log p_i`, with the gradient with respect to each log-prob.
/// Masked-out positions contribute exactly zero to both.
pub fn masked_nll_grad(log_probs: &[f64], mask: &[bool], norm: Normalization) -> Result<(f64, Vec<f64>)> {
    if log_probs.len() != mask.len() {
        return Err(Error::validation(
            "mask",
            format!("{} log-probs for {} mask entries", log_probs.len(), mask.len()),
        ));
    }
    if let Some(bad) = log_probs.iter().find(|&&lp| !(lp <= 0.0)) {
        return Err(Error::validation("log_probs", format!("{bad} is not a log-probability")));
    }
    let kept = mask.iter().filter(|&&m| m).count();
    let scale = match norm {
        Normalization::Sum => 1.0,
        Normalization::MeanKept if kept > 0 => 1.0 / kept as f64,
        Normalization::MeanKept => 0.0,
    };
    let mut loss = 0.0;
    let mut grad = vec![0.0; mask.len()];
    for (i, (&lp, &m)) in log_probs.iter().zip(mask).enumerate() {
        if m {
            loss -= lp;
            grad[i] = -scale;
        }
    }
    Ok((loss * scale, grad))
}

pub fn masked_nll(log_probs: &[f64], mask: &[bool]) -> Result<f64> {
    Ok(masked_nll_grad(log_probs, mask, Normalization::Sum)?.0)
}

/// Masked NLL over many targets, counting targets whose mask keeps nothing.
#[derive(Debug, Clone, Default)]
pub struct MaskedObjective {
    pub normalization: Normalization,
    pub empty_masks: usize,
}

impl MaskedObjective {
    pub fn loss(&mut self, log_probs: &[f64], mask: &[bool]) -> Result<f64> {
        if !mask.iter().any(|&m| m) {
            self.empty_masks += 1;
            log::warn!("target with an all-zero mask contributes nothing");
        }
        Ok(masked_nll_grad(log_probs, mask, self.normalization)?.0)
    }
}

#[derive(Serialize, Deserialize)]
struct MaskRecord {
    doc_id: String,
    id: String,
    mask_provenance: BTreeMap<String, serde_json::Value>,
    sum_tokens: Vec<String>,
    train_mask: Vec<u8>,
}

fn to_record(t: &MaskedTarget) -> MaskRecord {
    let mut prov = BTreeMap::new();
    prov.insert("kind".to_string(), serde_json::Value::from(t.provenance.kind.clone()));
    prov.insert("model".to_string(), serde_json::Value::from(t.provenance.model.clone()));
    prov.insert("threshold".to_string(), serde_json::Value::from(t.provenance.threshold));
    MaskRecord {
        doc_id: t.doc_id.clone(),
        id: t.id.clone(),
        mask_provenance: prov,
        sum_tokens: t.tokens.clone(),
        train_mask: t.mask.iter().map(|&m| m as u8).collect(),
    }
}

/// One JSON object per line: id, doc_id, sum_tokens, train_mask (1 = train),
/// mask_provenance.
pub fn export_masked_corpus(targets: &[MaskedTarget], path: impl AsRef<Path>) -> Result<usize> {
    let path = path.as_ref();
    let mut out = String::new();
    for t in targets {
        out.push_str(&serde_json::to_string(&to_record(t)).expect("record serializes"));
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))?;
    Ok(targets.len())
}

pub fn load_masked_corpus(path: impl AsRef<Path>) -> Result<Vec<MaskedTarget>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let r: MaskRecord = serde_json::from_str(&line).map_err(|e| Error::parse(i + 1, e.to_string()))?;
        if r.train_mask.len() != r.sum_tokens.len() || r.train_mask.iter().any(|&m| m > 1) {
            return Err(Error::parse(i + 1, "train_mask must be 0/1 per summary token"));
        }
        let get = |k: &str| r.mask_provenance.get(k);
        out.push(MaskedTarget {
            id: r.id,
            doc_id: r.doc_id,
            tokens: r.sum_tokens,
            mask: r.train_mask.iter().map(|&m| m == 1).collect(),
            provenance: MaskProvenance {
                model: get("model").and_then(|v| v.as_str()).unwrap_or_default().to_string(),
                kind: get("kind").and_then(|v| v.as_str()).unwrap_or_default().to_string(),
                threshold: get("threshold").and_then(|v| v.as_f64()).unwrap_or(f64::NAN),
            },
        });
    }
    Ok(out)
}

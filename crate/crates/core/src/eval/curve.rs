use crate::data::{AnnotatedExample, Label};
use crate::error::{Error, Result};
use crate::models::{Checkpoint, FactualityModel};

use super::metrics::{balanced_accuracy, Metric, Undefined};
use super::tsv;

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub step: usize,
    pub set: String,
    /// `None` when the set has a single gold class.
    pub balanced_accuracy: Option<f64>,
}

/// Evaluate every checkpoint on every named set.
pub fn eval_curve(checkpoints: &[Checkpoint], sets: &[(String, Vec<AnnotatedExample>)]) -> Result<Vec<CurveRow>> {
    if checkpoints.is_empty() || sets.is_empty() {
        return Err(Error::validation("curve", "need at least one checkpoint and one evaluation set"));
    }
    let mut rows = Vec::with_capacity(checkpoints.len() * sets.len());
    for ckpt in checkpoints {
        let model = FactualityModel::from_state(&ckpt.state)?;
        for (name, set) in sets {
            let gold: Vec<Label> = set.iter().map(|e| e.labels.sentence_label).collect();
            let pred = set
                .iter()
                .map(|e| model.predict_sentence(&e.document, &e.summary).map(|p| p.label))
                .collect::<Result<Vec<_>>>()?;
            let value = match balanced_accuracy(&gold, &pred) {
                Ok(v) => Some(v),
                Err(Error::UndefinedMetric(_)) => None,
                Err(e) => return Err(e),
            };
            rows.push(CurveRow {
                step: ckpt.step,
                set: name.clone(),
                balanced_accuracy: value,
            });
        }
    }
    Ok(rows)
}

pub fn curve_tsv(rows: &[CurveRow]) -> String {
    tsv(
        &["step", "set", "balanced_accuracy"],
        rows.iter().map(|r| {
            vec![
                r.step.to_string(),
                r.set.clone(),
                Metric(r.balanced_accuracy, Undefined::Marker).to_string(),
            ]
        }),
    )
}

//! Metrics and experiment protocols.

mod curve;
mod metrics;
mod split;

pub use curve::{curve_tsv, eval_curve, CurveRow};
pub use metrics::{
    balanced_accuracy, error_rates, is_punctuation, localization_prf, without_punctuation, Averaging, ErrorRates,
    Metric, Prf, Undefined,
};
pub use split::{split_by_generation_model, SplitMode, DEFAULT_CAP};

/// Tab-separated table with a header row and a trailing newline.
pub fn tsv<I>(header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut out = header.join("\t");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join("\t"));
        out.push('\n');
    }
    out
}

/// Fixed 4-decimal rendering used in every table.
pub fn fmt4(x: f64) -> String {
    format!("{x:.4}")
}

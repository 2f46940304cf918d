//! Conversions between word-, arc- and sentence-level factuality labels, and
//! error-taxonomy statistics.

use std::collections::{BTreeMap, BTreeSet};

use crate::data::{AnnotatedExample, DependencyParse, ErrorCategory, Label, Orientation, Provenance};
use crate::error::{Error, Result};

/// An arc is non-factual iff its head or child word is highlighted.
pub fn words_to_arcs(parse: &DependencyParse, word_mask: &[bool]) -> Result<Vec<Label>> {
    if word_mask.len() != parse.token_count() {
        return Err(Error::validation(
            "word_mask",
            format!("length {} but parse has {} tokens", word_mask.len(), parse.token_count()),
        ));
    }
    Ok(parse
        .arcs()
        .iter()
        .map(|a| Label::from_nonfactual(word_mask[a.head] || word_mask[a.child]))
        .collect())
}

/// A word is non-factual iff some incident arc is non-factual.
///
/// This is an approximation: words touched by no arc are always factual.
pub fn arcs_to_words(parse: &DependencyParse, arc_labels: &[Label]) -> Result<Vec<bool>> {
    if arc_labels.len() != parse.len() {
        return Err(Error::validation(
            "arc_labels",
            format!("{} labels for {} arcs", arc_labels.len(), parse.len()),
        ));
    }
    let mut mask = vec![false; parse.token_count()];
    for (arc, label) in parse.arcs().iter().zip(arc_labels) {
        if label.is_nonfactual() {
            mask[arc.head] = true;
            mask[arc.child] = true;
        }
    }
    Ok(mask)
}

/// Like [`arcs_to_words`], but refuses generation-centric labels unless forced,
/// since their arc labels do not correspond to highlighted words.
pub fn arcs_to_words_checked(
    parse: &DependencyParse,
    arc_labels: &[Label],
    provenance: Provenance,
    force: bool,
) -> Result<Vec<bool>> {
    if provenance == Provenance::GenC && !force {
        return Err(Error::validation(
            "provenance",
            "word masks are not derived from generation-centric arc labels without force",
        ));
    }
    arcs_to_words(parse, arc_labels)
}

/// A sentence is non-factual iff any arc is.
pub fn arcs_to_sentence(arc_labels: &[Label]) -> Result<Label> {
    if arc_labels.is_empty() {
        return Err(Error::validation("arc_labels", "no arcs to aggregate"));
    }
    Ok(Label::from_nonfactual(arc_labels.iter().any(|l| l.is_nonfactual())))
}

/// Sentence label from arcs, treating an arc-less (single-token) summary as
/// factual. The flag reports whether that default was applied.
pub fn arcs_to_sentence_or_default(arc_labels: &[Label]) -> (Label, bool) {
    match arcs_to_sentence(arc_labels) {
        Ok(label) => (label, false),
        Err(_) => (Label::Factual, true),
    }
}

/// A sentence is non-factual iff any word is highlighted.
pub fn words_to_sentence(word_mask: &[bool]) -> Result<Label> {
    if word_mask.is_empty() {
        return Err(Error::validation("word_mask", "empty mask"));
    }
    Ok(Label::from_nonfactual(word_mask.iter().any(|&w| w)))
}

/// Per-(category, orientation) fractions of examples exhibiting a tag type.
#[derive(Debug, Clone, PartialEq)]
pub struct TaxonomyDistribution {
    /// Number of examples counted.
    pub total: usize,
    /// Examples whose sentence label is non-factual.
    pub erroneous: usize,
    /// Examples exhibiting each type. Repeated tags within an example count once.
    pub counts: BTreeMap<(ErrorCategory, Orientation), usize>,
}

impl TaxonomyDistribution {
    /// Fraction over all examples; zero for an empty corpus.
    pub fn fraction_of_all(&self, category: ErrorCategory, orientation: Orientation) -> f64 {
        ratio(self.count(category, orientation), self.total)
    }

    /// Fraction over non-factual examples only; `None` if there are none.
    pub fn fraction_of_erroneous(&self, category: ErrorCategory, orientation: Orientation) -> Option<f64> {
        (self.erroneous > 0).then(|| ratio(self.count(category, orientation), self.erroneous))
    }

    pub fn count(&self, category: ErrorCategory, orientation: Orientation) -> usize {
        self.counts.get(&(category, orientation)).copied().unwrap_or(0)
    }

    /// All valid (category, orientation) cells in a fixed order.
    pub fn cells() -> Vec<(ErrorCategory, Orientation)> {
        let mut cells = Vec::new();
        for cat in ErrorCategory::ALL {
            if cat == ErrorCategory::Other {
                cells.push((cat, Orientation::NotApplicable));
            } else {
                cells.push((cat, Orientation::Intrinsic));
                cells.push((cat, Orientation::Extrinsic));
            }
        }
        cells
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn taxonomy_distribution(examples: &[AnnotatedExample]) -> TaxonomyDistribution {
    let mut counts = BTreeMap::new();
    for ex in examples {
        let kinds: BTreeSet<_> = ex
            .error_tags
            .iter()
            .flatten()
            .map(|t| (t.category, t.orientation))
            .collect();
        for kind in kinds {
            *counts.entry(kind).or_insert(0) += 1;
        }
    }
    TaxonomyDistribution {
        total: examples.len(),
        erroneous: examples
            .iter()
            .filter(|e| e.labels.sentence_label.is_nonfactual())
            .count(),
        counts,
    }
}

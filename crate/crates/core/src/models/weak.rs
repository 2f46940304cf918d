use std::collections::HashSet;

use crate::data::{AnnotatedExample, Document, Label};
use crate::error::{Error, Result};

use super::encoder::{adjacent_pairs, unordered};

/// Arc partition for sentence-supervised training: arcs in `factual` must be
/// factual; when `requires_error` is set at least one arc in `free` must not be.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeakConstraintSet {
    arcs: usize,
    pub factual: Vec<usize>,
    pub free: Vec<usize>,
    pub requires_error: bool,
}

impl WeakConstraintSet {
    pub fn new(arcs: usize, mut factual: Vec<usize>, requires_error: bool) -> Result<Self> {
        factual.sort_unstable();
        factual.dedup();
        if let Some(&bad) = factual.iter().find(|&&a| a >= arcs) {
            return Err(Error::validation("constraints", format!("arc {bad} out of range for {arcs} arcs")));
        }
        let in_f: HashSet<usize> = factual.iter().copied().collect();
        let free = (0..arcs).filter(|a| !in_f.contains(a)).collect();
        Ok(WeakConstraintSet {
            arcs,
            factual,
            free,
            requires_error,
        })
    }

    pub fn arc_count(&self) -> usize {
        self.arcs
    }

    pub fn is_feasible(&self) -> bool {
        !(self.requires_error && self.free.is_empty())
    }
}

/// Unordered, lowercased word pairs linked in the source. Uses the document's
/// dependencies when present, adjacent tokens otherwise.
pub fn source_pairs(document: &Document) -> HashSet<(String, String)> {
    match &document.dependencies {
        Some(arcs) => arcs
            .iter()
            .map(|a| unordered(&document.tokens[a.head], &document.tokens[a.child]))
            .collect(),
        None => adjacent_pairs(&document.tokens),
    }
}

/// Factual summaries constrain every arc to be factual. For non-factual ones,
/// arcs whose word pair also occurs linked in the source are constrained to be
/// factual and the rest are free.
pub fn build_weak_constraints(example: &AnnotatedExample) -> Result<WeakConstraintSet> {
    let parse = &example.summary.parse;
    let n = parse.len();
    match example.labels.sentence_label {
        Label::Factual => WeakConstraintSet::new(n, (0..n).collect(), false),
        Label::NonFactual => {
            let pairs = source_pairs(&example.document);
            let tokens = &example.summary.tokens;
            let factual = parse
                .arcs()
                .iter()
                .enumerate()
                .filter(|(_, a)| pairs.contains(&unordered(&tokens[a.head], &tokens[a.child])))
                .map(|(i, _)| i)
                .collect();
            let set = WeakConstraintSet::new(n, factual, true)?;
            if !set.is_feasible() {
                return Err(Error::Infeasible(format!(
                    "{}: non-factual but every arc occurs in the source",
                    example.id()
                )));
            }
            Ok(set)
        }
    }
}

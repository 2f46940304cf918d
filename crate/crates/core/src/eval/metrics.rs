use std::fmt;

use crate::data::{AnnotatedExample, Label};
use crate::error::{Error, Result};
use crate::models::{localize, ArcScorer};

/// Mean of per-class recalls. Undefined unless both classes occur in `gold`.
pub fn balanced_accuracy(gold: &[Label], pred: &[Label]) -> Result<f64> {
    if gold.len() != pred.len() {
        return Err(Error::validation("pred", format!("{} predictions for {} gold labels", pred.len(), gold.len())));
    }
    if gold.is_empty() {
        return Err(Error::validation("gold", "no labels"));
    }
    let mut recalls = Vec::with_capacity(2);
    for class in [Label::Factual, Label::NonFactual] {
        let total = gold.iter().filter(|&&g| g == class).count();
        if total == 0 {
            return Err(Error::UndefinedMetric(format!("gold has no {class} examples")));
        }
        let hit = gold.iter().zip(pred).filter(|&(&g, &p)| g == class && p == class).count();
        recalls.push(hit as f64 / total as f64);
    }
    Ok(recalls.iter().sum::<f64>() / 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Averaging {
    /// Pool every unit in the corpus.
    #[default]
    Micro,
    /// Average per-example scores over examples where they are defined.
    Macro,
}

impl std::str::FromStr for Averaging {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "micro" => Ok(Averaging::Micro),
            "macro" => Ok(Averaging::Macro),
            other => Err(Error::validation("averaging", format!("expected micro or macro, got `{other}`"))),
        }
    }
}

/// Precision, recall and F1 of the non-factual class. `None` marks an
/// undefined value (no predicted or no gold positives).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Prf {
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl Prf {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let precision = (tp + fp > 0).then(|| tp as f64 / (tp + fp) as f64);
        let recall = (tp + fn_ > 0).then(|| tp as f64 / (tp + fn_) as f64);
        Prf {
            precision,
            recall,
            f1: f1(precision, recall),
            tp,
            fp,
            fn_,
        }
    }
}

fn f1(p: Option<f64>, r: Option<f64>) -> Option<f64> {
    match (p, r) {
        (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
        (Some(_), Some(_)) => Some(0.0),
        _ => None,
    }
}

/// How undefined values are reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Undefined {
    #[default]
    Marker,
    Zero,
}

impl std::str::FromStr for Undefined {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "marker" => Ok(Undefined::Marker),
            "zero" => Ok(Undefined::Zero),
            other => Err(Error::validation("undefined", format!("expected marker or zero, got `{other}`"))),
        }
    }
}

/// A metric value formatted to 4 decimals, or `undefined`.
pub struct Metric(pub Option<f64>, pub Undefined);

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.0, self.1) {
            (Some(v), _) => write!(f, "{v:.4}"),
            (None, Undefined::Zero) => write!(f, "{:.4}", 0.0),
            (None, Undefined::Marker) => write!(f, "undefined"),
        }
    }
}

/// Localization P/R/F1 over aligned unit sequences (arcs or words), where
/// `true` marks a non-factual unit.
pub fn localization_prf(gold: &[Vec<bool>], pred: &[Vec<bool>], averaging: Averaging) -> Result<Prf> {
    if gold.len() != pred.len() {
        return Err(Error::validation("pred", format!("{} predicted sequences for {} gold", pred.len(), gold.len())));
    }
    let mut per_example = Vec::with_capacity(gold.len());
    for (i, (g, p)) in gold.iter().zip(pred).enumerate() {
        if g.len() != p.len() {
            return Err(Error::validation(
                "pred",
                format!("example {i}: {} predicted units for {} gold", p.len(), g.len()),
            ));
        }
        let mut c = (0, 0, 0);
        for (&gu, &pu) in g.iter().zip(p) {
            match (gu, pu) {
                (true, true) => c.0 += 1,
                (false, true) => c.1 += 1,
                (true, false) => c.2 += 1,
                (false, false) => {}
            }
        }
        per_example.push(c);
    }
    let (tp, fp, fn_) = per_example
        .iter()
        .fold((0, 0, 0), |a, c| (a.0 + c.0, a.1 + c.1, a.2 + c.2));
    match averaging {
        Averaging::Micro => Ok(Prf::from_counts(tp, fp, fn_)),
        Averaging::Macro => {
            let scores: Vec<Prf> = per_example.iter().map(|&(a, b, c)| Prf::from_counts(a, b, c)).collect();
            let mean = |get: fn(&Prf) -> Option<f64>| {
                let vals: Vec<f64> = scores.iter().filter_map(get).collect();
                (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
            };
            Ok(Prf {
                precision: mean(|s| s.precision),
                recall: mean(|s| s.recall),
                f1: mean(|s| s.f1),
                tp,
                fp,
                fn_,
            })
        }
    }
}

pub fn is_punctuation(token: &str) -> bool {
    !token.is_empty()
        && token
            .chars()
            .all(|c| c.is_ascii_punctuation() || matches!(c, '“' | '”' | '‘' | '’' | '–' | '—' | '…'))
}

/// Drop punctuation tokens from a word-level label sequence.
pub fn without_punctuation(tokens: &[String], mask: &[bool]) -> Vec<bool> {
    tokens
        .iter()
        .zip(mask)
        .filter(|(t, _)| !is_punctuation(t))
        .map(|(_, &m)| m)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ErrorRates {
    pub words: usize,
    pub flagged_words: usize,
    pub sentences: usize,
    pub flagged_sentences: usize,
}

impl ErrorRates {
    pub fn word_rate(&self) -> f64 {
        self.flagged_words as f64 / self.words as f64
    }

    pub fn sentence_rate(&self) -> f64 {
        self.flagged_sentences as f64 / self.sentences as f64
    }
}

/// Fraction of summary words and of summaries judged non-factual. Every token
/// counts in the word denominator, including tokens no arc touches.
pub fn error_rates(scorer: &dyn ArcScorer, corpus: &[AnnotatedExample]) -> Result<ErrorRates> {
    if corpus.is_empty() {
        return Err(Error::validation("corpus", "no summaries"));
    }
    let mut r = ErrorRates::default();
    for ex in corpus {
        let (arcs, mask) = localize(scorer, &ex.document, &ex.summary)?;
        r.words += mask.len();
        r.flagged_words += mask.iter().filter(|&&m| m).count();
        r.sentences += 1;
        if arcs.iter().any(|l| l.is_nonfactual()) {
            r.flagged_sentences += 1;
        }
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Document, SummarySentence};
    use crate::testing::{chain, masked_example, parse, toks};
    use Label::{Factual as F, NonFactual as N};

    #[test]
    fn balanced_accuracy_values() {
        assert_eq!(balanced_accuracy(&[F, N], &[F, N]).unwrap(), 1.0);
        assert_eq!(balanced_accuracy(&[F, F, F, N], &[F; 4]).unwrap(), 0.5);
        assert_eq!(balanced_accuracy(&[F, F, N, N], &[F, N, N, N]).unwrap(), 0.75);
        assert!(matches!(balanced_accuracy(&[F, F], &[F, F]), Err(Error::UndefinedMetric(_))));
        assert!(balanced_accuracy(&[F], &[F, N]).is_err());
    }

    #[test]
    fn prf_values() {
        let gold = vec![vec![true, true, false]];
        assert_eq!(
            localization_prf(&gold, &gold, Averaging::Micro).unwrap(),
            Prf::from_counts(2, 0, 0)
        );
        let p = localization_prf(&gold, &[vec![false, true, true]], Averaging::Micro).unwrap();
        assert_eq!((p.precision, p.recall, p.f1), (Some(0.5), Some(0.5), Some(0.5)));
        let none = localization_prf(&gold, &[vec![false; 3]], Averaging::Micro).unwrap();
        assert_eq!((none.precision, none.recall, none.f1), (None, Some(0.0), None));
        assert_eq!(Metric(none.precision, Undefined::Marker).to_string(), "undefined");
        assert_eq!(Metric(none.precision, Undefined::Zero).to_string(), "0.0000");
    }

    #[test]
    fn macro_differs_from_micro() {
        let gold = vec![vec![true, false], vec![true, true, true, true]];
        let pred = vec![vec![true, false], vec![true, false, false, false]];
        let micro = localization_prf(&gold, &pred, Averaging::Micro).unwrap();
        let mac = localization_prf(&gold, &pred, Averaging::Macro).unwrap();
        assert_eq!(micro.recall, Some(0.4));
        assert_eq!(mac.recall, Some(0.625));
    }

    #[test]
    fn punctuation_filter() {
        let t = toks("he left , “ quickly ” .");
        let m = vec![false, true, true, false, true, false, false];
        assert_eq!(without_punctuation(&t, &m), vec![false, true, true]);
    }

    struct FlagWords(Vec<&'static str>);

    impl ArcScorer for FlagWords {
        fn arc_nonfactual_probs(&self, _: &Document, s: &SummarySentence) -> Result<Vec<f64>> {
            Ok(s.parse
                .arcs()
                .iter()
                .map(|a| {
                    let hit = self.0.contains(&s.tokens[a.head].as_str()) && self.0.contains(&s.tokens[a.child].as_str());
                    if hit { 1.0 } else { 0.0 }
                })
                .collect())
        }

        fn threshold(&self) -> f64 {
            0.5
        }
    }

    #[test]
    fn error_rate_values() {
        let corpus = vec![
            masked_example("1", "a b c d e", toks("a b c d e"), chain(5), vec![false; 5]),
            masked_example("2", "a b c d e", toks("v w x y z"), chain(5), vec![false; 5]),
        ];
        let none = error_rates(&FlagWords(vec![]), &corpus).unwrap();
        assert_eq!((none.word_rate(), none.sentence_rate()), (0.0, 0.0));
        // flagging arc (y, z) marks two words of ten
        let one = error_rates(&FlagWords(vec!["y", "z"]), &corpus).unwrap();
        assert_eq!((one.word_rate(), one.sentence_rate()), (0.2, 0.5));
        assert!(error_rates(&FlagWords(vec![]), &[]).is_err());
    }

    #[test]
    fn word_rate_is_micro() {
        // one token of a 1-token summary cannot be flagged; one of a 3-token one is
        let all = FlagWords(vec!["a", "b", "c", "d"]);
        let corpus = vec![
            masked_example("1", "q", toks("d"), parse(1, &[]), vec![false]),
            masked_example("2", "q", toks("a b c"), parse(3, &[(1, 0, "x")]), vec![false; 3]),
        ];
        let r = error_rates(&all, &corpus).unwrap();
        assert_eq!(r.word_rate(), 0.5);
        let macro_rate = (0.0 + 2.0 / 3.0) / 2.0;
        assert!(r.word_rate() != macro_rate);
        assert_eq!(r.sentence_rate(), 0.5);
    }
}

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::data::AnnotatedExample;
use crate::error::{Error, Result};
use crate::rng::child_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitMode {
    /// Train on the other models plus a capped sample of the held-out one.
    AllModels,
    /// Train on the other models only.
    OtherModels,
}

impl FromStr for SplitMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" | "all-models" => Ok(SplitMode::AllModels),
            "others" | "other-models" => Ok(SplitMode::OtherModels),
            other => Err(Error::validation("mode", format!("unknown split mode `{other}`"))),
        }
    }
}

impl fmt::Display for SplitMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SplitMode::AllModels => "all",
            SplitMode::OtherModels => "others",
        })
    }
}

pub const DEFAULT_CAP: usize = 200;

/// Hold out one generation model. The test set is always drawn from the
/// held-out model; in all-models mode, `min(cap, available)` of its examples,
/// chosen by `seed`, move to train. Input order is kept within each side.
pub fn split_by_generation_model(
    examples: &[AnnotatedExample],
    held_out: &str,
    mode: SplitMode,
    cap: usize,
    seed: u64,
) -> Result<(Vec<AnnotatedExample>, Vec<AnnotatedExample>)> {
    let mut known = BTreeSet::new();
    for ex in examples {
        match ex.document.generation_model() {
            Some(m) => {
                known.insert(m);
            }
            None => return Err(Error::validation("meta.model", format!("{} has no generation model", ex.id()))),
        }
    }
    if !known.contains(held_out) {
        return Err(Error::validation(
            "model",
            format!("unknown model `{held_out}` (known: {})", known.into_iter().collect::<Vec<_>>().join(", ")),
        ));
    }
    let is_held = |e: &AnnotatedExample| e.document.generation_model() == Some(held_out);
    let held: Vec<usize> = (0..examples.len()).filter(|&i| is_held(&examples[i])).collect();
    let moved: BTreeSet<usize> = match mode {
        SplitMode::OtherModels => BTreeSet::new(),
        SplitMode::AllModels => {
            let mut ranked: Vec<(u64, usize)> = held
                .iter()
                .map(|&i| (child_seed(seed, &["split", examples[i].id(), &i.to_string()]), i))
                .collect();
            ranked.sort_unstable();
            ranked.into_iter().take(cap).map(|(_, i)| i).collect()
        }
    };
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (i, ex) in examples.iter().enumerate() {
        if !is_held(ex) || moved.contains(&i) {
            train.push(ex.clone());
        } else {
            test.push(ex.clone());
        }
    }
    if mode == SplitMode::OtherModels && train.is_empty() {
        return Err(Error::validation("model", "no other generation models to train on"));
    }
    if test.is_empty() {
        log::warn!("held-out model `{held_out}` has no test examples left");
    }
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{FactLabelSet, Label, Provenance};
    use crate::testing::{chain, example, toks};

    fn corpus(models: &[(&str, usize)]) -> Vec<AnnotatedExample> {
        let mut out = Vec::new();
        for (m, n) in models {
            for i in 0..*n {
                let mut e = example(
                    &format!("{m}-{i}"),
                    "a b",
                    toks("a b"),
                    chain(2),
                    FactLabelSet::sentence_only(Label::Factual, Provenance::Human),
                );
                e.document.meta.insert("model".into(), m.to_string());
                out.push(e);
            }
        }
        out
    }

    #[test]
    fn other_models_excludes_held_out() {
        let c = corpus(&[("bart", 5), ("pegasus", 4)]);
        let (train, test) = split_by_generation_model(&c, "bart", SplitMode::OtherModels, 200, 1).unwrap();
        assert!(train.iter().all(|e| e.document.generation_model() != Some("bart")));
        assert_eq!((train.len(), test.len()), (4, 5));
    }

    #[test]
    fn all_models_moves_capped_sample() {
        let c = corpus(&[("bart", 300), ("pegasus", 50)]);
        let (train, test) = split_by_generation_model(&c, "bart", SplitMode::AllModels, 200, 1).unwrap();
        let held_in_train = train.iter().filter(|e| e.document.generation_model() == Some("bart")).count();
        assert_eq!(held_in_train, 200);
        assert_eq!(test.len(), 100);
        let train_ids: BTreeSet<&str> = train.iter().map(|e| e.id()).collect();
        assert!(test.iter().all(|e| !train_ids.contains(e.id())));
        let small = corpus(&[("bart", 30), ("pegasus", 5)]);
        let (train, _) = split_by_generation_model(&small, "bart", SplitMode::AllModels, 200, 1).unwrap();
        assert_eq!(train.len(), 35);
    }

    #[test]
    fn errors() {
        let c = corpus(&[("bart", 3)]);
        assert!(split_by_generation_model(&c, "t5", SplitMode::OtherModels, 200, 1).is_err());
        assert!(split_by_generation_model(&c, "bart", SplitMode::OtherModels, 200, 1).is_err());
        assert_eq!("all".parse::<SplitMode>().unwrap(), SplitMode::AllModels);
        assert!("some".parse::<SplitMode>().is_err());
    }
}

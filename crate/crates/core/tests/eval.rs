use std::collections::BTreeSet;

use factspan::data::{FactLabelSet, Label, Provenance};
use factspan::eval::{balanced_accuracy, error_rates, localization_prf, split_by_generation_model, Averaging, SplitMode};
use factspan::models::{EncoderSpec, FactualityModel, ModelKind};
use factspan::testing::{chain, example, toks, toy_corpus};
use proptest::prelude::*;

fn labels(bits: &[bool]) -> Vec<Label> {
    bits.iter().map(|&b| Label::from_nonfactual(b)).collect()
}

fn two_class(n: usize) -> impl Strategy<Value = Vec<bool>> {
    prop::collection::vec(any::<bool>(), n).prop_filter("both classes", |v| v.contains(&true) && v.contains(&false))
}

proptest! {
    #[test]
    fn relabeling_both_sides_preserves_balanced_accuracy((gold, pred) in (2usize..20).prop_flat_map(|n| (two_class(n), prop::collection::vec(any::<bool>(), n)))) {
        let a = balanced_accuracy(&labels(&gold), &labels(&pred)).unwrap();
        let flip = |v: &[bool]| v.iter().map(|b| !b).collect::<Vec<_>>();
        let b = balanced_accuracy(&labels(&flip(&gold)), &labels(&flip(&pred))).unwrap();
        prop_assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn constant_predictors_score_one_half(gold in (2usize..30).prop_flat_map(two_class), constant in any::<bool>()) {
        let pred = vec![Label::from_nonfactual(constant); gold.len()];
        prop_assert_eq!(balanced_accuracy(&labels(&gold), &pred).unwrap(), 0.5);
    }

    #[test]
    fn f1_is_the_harmonic_mean(pairs in prop::collection::vec(prop::collection::vec((any::<bool>(), any::<bool>()), 0..6), 1..5)) {
        let gold: Vec<Vec<bool>> = pairs.iter().map(|v| v.iter().map(|p| p.0).collect()).collect();
        let pred: Vec<Vec<bool>> = pairs.iter().map(|v| v.iter().map(|p| p.1).collect()).collect();
        let prf = localization_prf(&gold, &pred, Averaging::Micro).unwrap();
        if let (Some(p), Some(r)) = (prf.precision, prf.recall) {
            let f = prf.f1.unwrap();
            if p + r > 0.0 {
                prop_assert!((f - 2.0 * p * r / (p + r)).abs() < 1e-12);
            } else {
                prop_assert_eq!(f, 0.0);
            }
        }
    }

    #[test]
    fn splits_are_disjoint(assign in prop::collection::vec(0usize..3, 2..40), held in 0usize..3, all in any::<bool>(), cap in 0usize..10, seed in any::<u64>()) {
        let corpus: Vec<_> = assign
            .iter()
            .enumerate()
            .map(|(i, m)| {
                let mut ex = example(&format!("e{i}"), "a b", toks("a b"), chain(2), FactLabelSet::sentence_only(Label::Factual, Provenance::Human));
                ex.document.meta.insert("model".into(), format!("m{m}"));
                ex
            })
            .collect();
        let mode = if all { SplitMode::AllModels } else { SplitMode::OtherModels };
        match split_by_generation_model(&corpus, &format!("m{held}"), mode, cap, seed) {
            Ok((train, test)) => {
                let ids: BTreeSet<&str> = train.iter().map(|e| e.id()).collect();
                prop_assert!(test.iter().all(|e| !ids.contains(e.id())));
                prop_assert_eq!(train.len() + test.len(), corpus.len());
            }
            Err(_) => {
                let present = assign.contains(&held);
                let others = assign.iter().any(|&m| m != held);
                prop_assert!(!present || (!all && !others));
            }
        }
    }
}

#[test]
fn word_error_rate_is_bounded() {
    let corpus = toy_corpus(20, 4);
    for seed in 0..5 {
        let model = FactualityModel::initialize(ModelKind::Dae, &EncoderSpec::default(), None, seed).unwrap();
        let r = error_rates(&model, &corpus).unwrap();
        assert!(r.word_rate() <= 1.0 && r.sentence_rate() <= 1.0);
        assert_eq!(r.sentences, 20);
    }
}

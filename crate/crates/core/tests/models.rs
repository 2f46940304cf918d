use factspan::data::{Arc, DependencyParse, Label, ParseRepr, SummarySentence};
use factspan::models::{
    build_weak_constraints, gradient_check, EncoderSpec, FactualityModel, ModelKind, Target,
};
use factspan::rng::child_rng;
use factspan::testing::toy_corpus;
use proptest::prelude::*;

fn small_spec() -> EncoderSpec {
    EncoderSpec::Mock {
        dim: 8,
        buckets: 16,
        max_seq: 512,
    }
}

fn kind_strategy() -> impl Strategy<Value = ModelKind> {
    prop::sample::select(vec![ModelKind::Sent, ModelKind::Dae, ModelKind::DaeWeak])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn analytic_gradients_match_finite_differences(kind in kind_strategy(), seed in any::<u64>(), hidden in prop::option::of(2usize..5)) {
        let ex = toy_corpus(1, seed).remove(0);
        let mut model = FactualityModel::initialize(kind, &small_spec(), hidden, seed).unwrap();
        let target = match kind {
            ModelKind::Sent => Target::Sentence(ex.labels.sentence_label),
            ModelKind::Dae => Target::Arcs(ex.labels.arc_labels.clone().unwrap()),
            ModelKind::DaeWeak => Target::Weak(build_weak_constraints(&ex).unwrap()),
        };
        let mut rng = child_rng(seed, &["fd"]);
        let check = gradient_check(&mut model, &ex.document, &ex.summary, &target, 1e-5, 20, &mut rng).unwrap();
        prop_assert!(check.relative_error < 1e-4, "{}", check.relative_error);
    }

    #[test]
    fn raising_the_threshold_never_adds_errors(kind in kind_strategy(), seed in any::<u64>(), t1 in 0.01f64..0.99, t2 in 0.01f64..0.99) {
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let model = FactualityModel::initialize(kind, &small_spec(), None, seed).unwrap();
        for ex in toy_corpus(5, seed) {
            let at_lo = model.predict_sentence_at(&ex.document, &ex.summary, lo).unwrap();
            let at_hi = model.predict_sentence_at(&ex.document, &ex.summary, hi).unwrap();
            prop_assert!(!(at_lo.label == Label::Factual && at_hi.label == Label::NonFactual));
        }
    }

    #[test]
    fn arc_scores_follow_arc_order(seed in any::<u64>(), rotate in 0usize..8) {
        let ex = toy_corpus(1, seed).remove(0);
        let model = FactualityModel::initialize(ModelKind::Dae, &small_spec(), Some(3), seed).unwrap();
        let arcs = ex.summary.parse.arcs().to_vec();
        let k = rotate % arcs.len();
        let mut permuted: Vec<Arc> = arcs.clone();
        permuted.rotate_left(k);
        let parse = DependencyParse::new(permuted, ex.summary.len(), ParseRepr::Basic).unwrap();
        let summary = SummarySentence::new("p", ex.summary.tokens.clone(), parse).unwrap();
        let mut base = model.predict_arcs(&ex.document, &ex.summary).unwrap();
        let moved = model.predict_arcs(&ex.document, &summary).unwrap();
        base.rotate_left(k);
        prop_assert_eq!(base, moved);
    }
}

#[test]
fn saved_models_predict_identically() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    let model = FactualityModel::initialize(ModelKind::DaeWeak, &small_spec(), Some(4), 21).unwrap();
    model.save(&path).unwrap();
    let loaded = FactualityModel::load(&path).unwrap();
    for ex in toy_corpus(6, 2) {
        assert_eq!(
            model.predict_arcs(&ex.document, &ex.summary).unwrap(),
            loaded.predict_arcs(&ex.document, &ex.summary).unwrap()
        );
    }
    assert_eq!(model.threshold(), loaded.threshold());
    assert_eq!(model.kind(), loaded.kind());
}

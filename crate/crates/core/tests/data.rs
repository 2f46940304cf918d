mod common;

use std::io::Write;

use factspan::data::{
    from_json_line, load_examples, save_examples, to_json_line, AnnotatedExample, FactLabelSet, Label, Provenance,
};
use factspan::derive::words_to_arcs;
use factspan::testing::{claim_corpus, example, toks};
use factspan::Error;
use proptest::prelude::*;

fn words(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("t{i}")).collect()
}

/// Label sets drawn without regard to the invariants, so some are invalid.
fn arbitrary_example() -> impl Strategy<Value = AnnotatedExample> {
    (common::tree_and_mask(6), any::<bool>(), any::<bool>(), any::<bool>(), any::<u64>()).prop_map(
        |((parse, mask), sentence, with_mask, with_arcs, noise)| {
            let n = parse.token_count();
            let arcs = words_to_arcs(&parse, &mask).unwrap();
            let arcs = if noise % 3 == 0 { arcs.iter().map(|l| l.flip()).collect() } else { arcs };
            let labels = FactLabelSet {
                sentence_label: Label::from_nonfactual(sentence),
                word_mask: with_mask.then_some(mask),
                arc_labels: with_arcs.then_some(arcs),
                provenance: Provenance::Human,
            };
            let mut ex = example("x", "t0 t1 t2 t3 t4 t5 t6", words(n), parse, FactLabelSet::sentence_only(Label::Factual, Provenance::Human));
            ex.labels = labels;
            ex
        },
    )
}

proptest! {
    #[test]
    fn strict_acceptance_implies_invariants(ex in arbitrary_example()) {
        let line = to_json_line(&ex);
        match from_json_line(&line, 1) {
            Ok(loaded) => {
                prop_assert!(loaded.labels.validate(&loaded.summary.parse).is_ok());
                prop_assert_eq!(loaded, ex);
            }
            Err(_) => prop_assert!(ex.validate().is_err()),
        }
    }

    #[test]
    fn valid_examples_round_trip_through_files(seed in any::<u64>(), n in 0usize..12) {
        let corpus = claim_corpus(n, seed);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.jsonl");
        prop_assert_eq!(save_examples(&corpus, &path).unwrap(), n);
        let loaded = load_examples(&path, true).unwrap();
        prop_assert_eq!(loaded.skipped, 0);
        prop_assert_eq!(&loaded.examples, &corpus);
        let again = dir.path().join("d.jsonl");
        save_examples(&loaded.examples, &again).unwrap();
        prop_assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&again).unwrap());
    }
}

#[test]
fn serialization_is_a_function_of_contents() {
    let a = claim_corpus(3, 9);
    let b = claim_corpus(3, 9);
    let lines = |v: &[AnnotatedExample]| v.iter().map(to_json_line).collect::<Vec<_>>();
    assert_eq!(lines(&a), lines(&b));
    assert_eq!(lines(&a), lines(&a.clone()));
}

#[test]
fn strict_and_lenient_loading() {
    let good = to_json_line(&claim_corpus(1, 1)[0]);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mixed.jsonl");
    let mut f = std::fs::File::create(&path).unwrap();
    writeln!(f, "{good}\n\n{{not json\n{good}").unwrap();
    drop(f);
    match load_examples(&path, true) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("expected a parse error, got {other:?}"),
    }
    let lenient = load_examples(&path, false).unwrap();
    assert_eq!((lenient.examples.len(), lenient.skipped), (2, 1));
}

#[test]
fn invalid_mask_is_rejected_with_line() {
    let mut ex = example(
        "m",
        "a b c",
        toks("a b"),
        factspan::testing::chain(2),
        FactLabelSet::sentence_only(Label::Factual, Provenance::Human),
    );
    ex.labels.word_mask = Some(vec![true, false]);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.jsonl");
    std::fs::write(&path, to_json_line(&ex) + "\n").unwrap();
    let err = load_examples(&path, true).unwrap_err().to_string();
    assert!(err.contains("word_mask") && err.contains("line 1"), "{err}");
}

#[test]
fn missing_file_is_io_error() {
    assert!(matches!(load_examples("/nonexistent/x.jsonl", true), Err(Error::Io { .. })));
}

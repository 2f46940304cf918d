mod common;

use factspan::data::Label;
use factspan::derive::{arcs_to_sentence_or_default, arcs_to_words, words_to_arcs, words_to_sentence};
use proptest::prelude::*;

proptest! {
    #[test]
    fn consistency_chain((parse, mask) in common::tree_and_mask(8)) {
        let incident = parse.incident_tokens();
        let restricted: Vec<bool> = mask.iter().zip(&incident).map(|(&m, &i)| m && i).collect();
        let arcs = words_to_arcs(&parse, &mask).unwrap();
        let (from_arcs, defaulted) = arcs_to_sentence_or_default(&arcs);
        prop_assert_eq!(from_arcs, words_to_sentence(&restricted).unwrap());
        prop_assert_eq!(defaulted, parse.is_empty());
    }

    #[test]
    fn round_trip_inflates((parse, mask) in common::tree_and_mask(8)) {
        let incident = parse.incident_tokens();
        let back = arcs_to_words(&parse, &words_to_arcs(&parse, &mask).unwrap()).unwrap();
        for w in 0..mask.len() {
            if mask[w] && incident[w] {
                prop_assert!(back[w]);
            }
        }
    }

    #[test]
    fn highlighting_more_never_clears_an_arc((parse, mask) in common::tree_and_mask(8), extra in any::<prop::sample::Index>()) {
        let before = words_to_arcs(&parse, &mask).unwrap();
        let mut more = mask.clone();
        more[extra.index(mask.len())] = true;
        let after = words_to_arcs(&parse, &more).unwrap();
        for (b, a) in before.iter().zip(&after) {
            prop_assert!(!(b.is_nonfactual() && *a == Label::Factual));
        }
    }
}

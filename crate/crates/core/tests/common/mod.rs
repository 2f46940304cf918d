#![allow(dead_code)]

use factspan::data::{Arc, DependencyParse, ParseRepr};
use proptest::prelude::*;

/// A tree over `n` tokens: after rotating indices by `shift`, token `i > 0`
/// attaches to an earlier token chosen by `picks[i]`.
pub fn tree(n: usize, picks: &[u32], shift: usize) -> DependencyParse {
    let at = |i: usize| (i + shift) % n;
    let arcs = (1..n)
        .map(|i| Arc::new(at(picks[i] as usize % i), at(i), if picks[i] % 2 == 0 { "nsubj" } else { "obj" }))
        .collect();
    DependencyParse::new(arcs, n, ParseRepr::Basic).expect("generated tree")
}

/// `(parse, mask)` over 1..=max tokens.
pub fn tree_and_mask(max: usize) -> impl Strategy<Value = (DependencyParse, Vec<bool>)> {
    (1..=max).prop_flat_map(|n| {
        (
            prop::collection::vec(any::<u32>(), n),
            0..n,
            prop::collection::vec(any::<bool>(), n),
        )
            .prop_map(move |(picks, shift, mask)| (tree(n, &picks, shift), mask))
    })
}

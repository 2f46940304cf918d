//! Small fixture builders shared by unit tests, integration tests and the
//! acceptance suite.

use crate::data::{AnnotatedExample, Arc, DependencyParse, Document, ErrorTag, FactLabelSet, Label, ParseRepr, Provenance, SummarySentence};

pub fn toks(s: &str) -> Vec<String> {
    s.split_whitespace().map(String::from).collect()
}

/// A parse from `(head, child, relation)` triples; basic if it forms a tree,
/// collapsed otherwise.
pub fn parse(n: usize, arcs: &[(usize, usize, &str)]) -> DependencyParse {
    let arcs: Vec<Arc> = arcs.iter().map(|&(h, c, r)| Arc::new(h, c, r)).collect();
    DependencyParse::new(arcs.clone(), n, ParseRepr::Basic)
        .or_else(|_| DependencyParse::new(arcs, n, ParseRepr::Collapsed))
        .expect("fixture parse")
}

/// A left-to-right chain parse: token `i` heads token `i + 1`.
pub fn chain(n: usize) -> DependencyParse {
    let arcs = (1..n).map(|i| Arc::new(i - 1, i, "dep")).collect();
    DependencyParse::new(arcs, n, ParseRepr::Basic).expect("chain parse")
}

pub fn example(id: &str, doc: &str, tokens: Vec<String>, parse: DependencyParse, labels: FactLabelSet) -> AnnotatedExample {
    AnnotatedExample {
        document: Document::from_tokens(id, toks(doc)).expect("fixture document"),
        summary: SummarySentence::new(id, tokens, parse).expect("fixture summary"),
        labels,
        error_tags: None,
    }
}

/// Example with a word mask; sentence label and arc labels are derived.
pub fn masked_example(id: &str, doc: &str, tokens: Vec<String>, parse: DependencyParse, mask: Vec<bool>) -> AnnotatedExample {
    let arc_labels = crate::derive::words_to_arcs(&parse, &mask).expect("mask length");
    let labels = FactLabelSet {
        sentence_label: Label::from_nonfactual(mask.iter().any(|&m| m)),
        word_mask: Some(mask),
        arc_labels: Some(arc_labels),
        provenance: Provenance::Human,
    };
    example(id, doc, tokens, parse, labels)
}

pub fn example_with_tags(tags: Option<Vec<ErrorTag>>, label: Label) -> AnnotatedExample {
    let mut ex = example(
        "t",
        "a b c",
        toks("a b"),
        chain(2),
        FactLabelSet::sentence_only(label, Provenance::Human),
    );
    ex.error_tags = tags;
    ex
}

/// Toy arc-factuality corpus. Each document is a random word sequence; each
/// summary is a contiguous span of it, parsed as a left-to-right chain. Half
/// the summaries have one word replaced so that neither adjacent pair occurs
/// in the document. An arc is non-factual iff its word pair is not adjacent in
/// the document, so word masks, arc labels and the weak constraints agree.
pub fn toy_corpus(n: usize, seed: u64) -> Vec<AnnotatedExample> {
    use rand::seq::SliceRandom;
    use rand::Rng;

    use crate::models::adjacent_pairs;

    let vocab: Vec<String> = (0..80).map(|i| format!("w{i}")).collect();
    (0..n)
        .map(|i| {
            let id = format!("toy{i}");
            let mut rng = crate::rng::child_rng(seed, &["toy", &id]);
            let doc: Vec<String> = (0..30).map(|_| vocab.choose(&mut rng).unwrap().clone()).collect();
            let len = rng.gen_range(5..=8);
            let start = rng.gen_range(0..=doc.len() - len);
            let mut tokens = doc[start..start + len].to_vec();
            let mut mask = vec![false; len];
            if i % 2 == 1 {
                let pairs = adjacent_pairs(&doc);
                let k = rng.gen_range(0..len);
                let fresh = |w: &String| {
                    let bad = |j: usize| pairs.contains(&crate::models::unordered_pair(w, &tokens[j]));
                    (k == 0 || !bad(k - 1)) && (k + 1 == len || !bad(k + 1)) && *w != tokens[k]
                };
                let choices: Vec<&String> = vocab.iter().filter(|w| fresh(w)).collect();
                tokens[k] = (*choices.choose(&mut rng).unwrap()).clone();
                mask[k] = true;
            }
            let mut ex = masked_example(&id, &doc.join(" "), tokens, chain(len), mask);
            ex.labels.provenance = Provenance::EntC;
            ex
        })
        .collect()
}

const FIRST: [&str; 8] = ["John", "Maria", "Ahmed", "Chen", "Olga", "Pedro", "Fatima", "Liam"];
const LAST: [&str; 8] = ["Smith", "Garcia", "Khan", "Wei", "Petrova", "Silva", "Diallo", "Murphy"];
const CITIES: [&str; 8] = ["Paris", "London", "Berlin", "Lagos", "Lima", "Oslo", "Delhi", "Dublin"];
const PRONOUNS: [&str; 3] = ["He", "She", "They"];

type Template = (&'static str, &'static [(usize, usize, &'static str)]);

const TEMPLATES: [Template; 4] = [
    (
        "{F} {L} said {N} people were injured in {C} .",
        &[
            (1, 0, "compound"),
            (2, 1, "nsubj"),
            (4, 3, "nummod"),
            (6, 4, "nsubj:pass"),
            (6, 5, "aux:pass"),
            (2, 6, "ccomp"),
            (8, 7, "case"),
            (6, 8, "obl"),
            (2, 9, "punct"),
        ],
    ),
    (
        "{P} visited {C} with {N} colleagues .",
        &[(1, 0, "nsubj"), (1, 2, "obj"), (5, 3, "case"), (5, 4, "nummod"), (1, 5, "obl"), (1, 6, "punct")],
    ),
    (
        "{F} {L} hired {N} workers in {C} .",
        &[
            (1, 0, "compound"),
            (2, 1, "nsubj"),
            (4, 3, "nummod"),
            (2, 4, "obj"),
            (6, 5, "case"),
            (2, 6, "obl"),
            (2, 7, "punct"),
        ],
    ),
    (
        "{C} has {N} new schools , {P} said .",
        &[
            (1, 0, "nsubj"),
            (4, 2, "nummod"),
            (4, 3, "amod"),
            (1, 4, "obj"),
            (7, 5, "punct"),
            (7, 6, "nsubj"),
            (1, 7, "parataxis"),
            (1, 8, "punct"),
        ],
    ),
];

/// Templated news claims, each supported by its document, which also mentions
/// a second person, city and number so every corruption has a substitute.
/// Labels are sentence-level factual, as claims fed to the generators are.
pub fn claim_corpus(n: usize, seed: u64) -> Vec<AnnotatedExample> {
    use rand::seq::SliceRandom;
    use rand::Rng;

    (0..n)
        .map(|i| {
            let id = format!("claim{i}");
            let mut rng = crate::rng::child_rng(seed, &["claims", &id]);
            let mut pick2 = |pool: &[&'static str]| {
                let two: Vec<&str> = pool.choose_multiple(&mut rng, 2).copied().collect();
                (two[0], two[1])
            };
            let (f, f2) = pick2(&FIRST);
            let (l, l2) = pick2(&LAST);
            let (c, c2) = pick2(&CITIES);
            let (p, p2) = pick2(&PRONOUNS);
            let num = rng.gen_range(2..60);
            let num2 = num + rng.gen_range(1..30);
            let (template, arcs) = TEMPLATES[i % TEMPLATES.len()];
            let fill = |s: &str| {
                s.replace("{F}", f)
                    .replace("{L}", l)
                    .replace("{C}", c)
                    .replace("{P}", p)
                    .replace("{N}", &num.to_string())
            };
            let claim = fill(template);
            let doc = format!(
                "{claim} Earlier , {f2} {l2} met {num2} students from {c2} . {p2} said the visit went well ."
            );
            let tokens = toks(&claim);
            let n_tokens = tokens.len();
            example(
                &id,
                &doc,
                tokens,
                parse(n_tokens, arcs),
                FactLabelSet::sentence_only(Label::Factual, Provenance::Human),
            )
        })
        .collect()
}

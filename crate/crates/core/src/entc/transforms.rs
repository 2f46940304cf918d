//! Rule-based corruptions of a claim with exact error-span bookkeeping.
//!
//! Each corruption replaces one source range by a new range. The error span is
//! the new range, except for negation removal where it is the word preceding
//! the removed token.

use rand::seq::SliceRandom;
use rand::Rng;

use super::tagger::{integer_value, render_integer, title_case, PronounClass, SpanTagger, TypedSpan};
use crate::data::edit;
use crate::data::DependencyParse;
use crate::error::{Error, Result};

/// How a corruption changes token positions, for carrying the parse across it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseOp {
    /// `old_len` tokens at `start` became `new_len` tokens; extra tokens attach with `rel`.
    Splice {
        start: usize,
        old_len: usize,
        new_len: usize,
        rel: String,
    },
    /// One token inserted at `at`, attached to the head of `anchor` (or to `anchor` if it is a root).
    Insert { at: usize, anchor: usize, rel: String },
    /// One token removed at `at`.
    Delete { at: usize },
}

impl ParseOp {
    pub fn project(&self, parse: &DependencyParse) -> Result<DependencyParse> {
        match self {
            ParseOp::Splice {
                start,
                old_len,
                new_len,
                rel,
            } => edit::splice(parse, *start, *old_len, *new_len, rel),
            ParseOp::Insert { at, anchor, rel } => {
                let head = parse
                    .arcs()
                    .iter()
                    .find(|a| a.child == *anchor)
                    .map(|a| a.head)
                    .unwrap_or(*anchor);
                edit::insert(parse, *at, 1, head, rel)
            }
            ParseOp::Delete { at } => edit::delete_span(parse, *at, 1),
        }
    }
}

/// Result of one corruption.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corruption {
    pub tokens: Vec<String>,
    /// Error span `[start, end)` in the new tokens.
    pub span: (usize, usize),
    /// Range of the source tokens that was rewritten.
    pub source_span: (usize, usize),
    pub op: ParseOp,
}

impl Corruption {
    pub fn word_mask(&self) -> Vec<bool> {
        (0..self.tokens.len())
            .map(|i| (self.span.0..self.span.1).contains(&i))
            .collect()
    }
}

fn lower_eq(a: &[String], b: &[String]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_lowercase() == y.to_lowercase())
}

/// Replace `tokens[start..end]` by `replacement`, trimming tokens shared at
/// either end so the error span covers only what changed.
fn replace_range(tokens: &[String], start: usize, end: usize, mut replacement: Vec<String>, rel: &str) -> Corruption {
    let (mut s, mut e) = (start, end);
    while e - s > 1 && replacement.len() > 1 && tokens[s] == replacement[0] {
        replacement.remove(0);
        s += 1;
    }
    while e - s > 1 && replacement.len() > 1 && tokens[e - 1] == *replacement.last().unwrap() {
        replacement.pop();
        e -= 1;
    }
    if s == 0 && tokens[0].chars().next().is_some_and(char::is_uppercase) {
        replacement[0] = title_case(&replacement[0]);
    }
    let new_len = replacement.len();
    let mut out = Vec::with_capacity(tokens.len() - (e - s) + new_len);
    out.extend_from_slice(&tokens[..s]);
    out.extend(replacement);
    out.extend_from_slice(&tokens[e..]);
    Corruption {
        tokens: out,
        span: (s, s + new_len),
        source_span: (s, e),
        op: ParseOp::Splice {
            start: s,
            old_len: e - s,
            new_len,
            rel: rel.to_string(),
        },
    }
}

/// Distinct document surfaces per entity type, in order of first appearance.
fn distinct_surfaces<'a>(tokens: &'a [String], spans: &'a [TypedSpan], label: &str) -> Vec<&'a [String]> {
    let mut out: Vec<&[String]> = Vec::new();
    for span in spans.iter().filter(|s| s.label == label) {
        let surface = span.surface(tokens);
        if !out.iter().any(|s| lower_eq(s, surface)) {
            out.push(surface);
        }
    }
    out
}

/// Replace one claim entity by a same-type document entity with a different surface.
pub fn apply_entity_swap<R: Rng>(
    claim: &[String],
    claim_entities: &[TypedSpan],
    doc: &[String],
    doc_entities: &[TypedSpan],
    rng: &mut R,
) -> Option<Corruption> {
    let mut candidates = Vec::new();
    for ce in claim_entities {
        let surface = ce.surface(claim);
        for repl in distinct_surfaces(doc, doc_entities, &ce.label) {
            if !lower_eq(repl, surface) {
                candidates.push((ce, repl));
            }
        }
    }
    let (ce, repl) = candidates.choose(rng)?;
    Some(replace_range(claim, ce.start, ce.end, repl.to_vec(), "compound"))
}

fn same_number(a: &str, b: &str) -> bool {
    match (integer_value(a), integer_value(b)) {
        (Some(x), Some(y)) => x == y,
        _ => a.to_lowercase() == b.to_lowercase(),
    }
}

/// Replace one claim number by a different document number or, failing that,
/// by an integer perturbed by ±1..±10 (kept positive).
pub fn apply_number_swap<R: Rng>(
    claim: &[String],
    claim_numbers: &[TypedSpan],
    doc: &[String],
    doc_numbers: &[TypedSpan],
    rng: &mut R,
) -> Option<Corruption> {
    if claim_numbers.is_empty() {
        return None;
    }
    let mut candidates = Vec::new();
    for cn in claim_numbers {
        let surface = cn.surface(claim);
        let mut seen: Vec<&[String]> = Vec::new();
        for dn in doc_numbers {
            let repl = dn.surface(doc);
            let differs = surface.len() != repl.len()
                || surface.iter().zip(repl).any(|(a, b)| !same_number(a, b));
            if differs && !seen.iter().any(|s| lower_eq(s, repl)) {
                seen.push(repl);
                candidates.push((cn, repl.to_vec()));
            }
        }
    }
    if let Some((cn, repl)) = candidates.choose(rng) {
        return Some(replace_range(claim, cn.start, cn.end, repl.clone(), "compound"));
    }
    let integers: Vec<(&TypedSpan, i64)> = claim_numbers
        .iter()
        .filter(|s| s.end - s.start == 1)
        .filter_map(|s| integer_value(&claim[s.start]).map(|v| (s, v)))
        .collect();
    let &(span, value) = integers.choose(rng)?;
    let choices = perturbation_candidates(value);
    let &new_value = choices.choose(rng)?;
    let rendered = render_integer(new_value, &claim[span.start]);
    Some(replace_range(claim, span.start, span.end, vec![rendered], "compound"))
}

/// Values reachable by a ±1..±10 perturbation that stay at least 1.
pub fn perturbation_candidates(value: i64) -> Vec<i64> {
    (1..=10)
        .flat_map(|k| [value - k, value + k])
        .filter(|v| *v >= 1)
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect()
}

/// Replace one pronoun by a different member of its grammatical class.
pub fn apply_pronoun_swap<R: Rng>(
    claim: &[String],
    pronouns: &[(usize, PronounClass)],
    tagger: &dyn SpanTagger,
    rng: &mut R,
) -> Option<Corruption> {
    let mut candidates = Vec::new();
    for &(pos, class) in pronouns {
        let original = claim[pos].to_lowercase();
        for m in tagger.pronoun_class_members(class) {
            if *m != original {
                candidates.push((pos, m.clone()));
            }
        }
    }
    let (pos, repl) = candidates.choose(rng)?;
    let repl = if claim[*pos].chars().next().is_some_and(char::is_uppercase) {
        title_case(repl)
    } else {
        repl.clone()
    };
    Some(replace_range(claim, *pos, pos + 1, vec![repl], "dep"))
}

pub const AUXILIARIES: [&str; 22] = [
    "is", "are", "was", "were", "am", "be", "been", "has", "have", "had", "will", "would", "can", "could", "should",
    "shall", "may", "might", "must", "do", "does", "did",
];

const NEGATIONS: [&str; 2] = ["not", "n't"];

fn is_aux(token: &str) -> bool {
    AUXILIARIES.contains(&token.to_lowercase().as_str())
}

fn is_negation(token: &str) -> bool {
    NEGATIONS.contains(&token.to_lowercase().as_str())
}

#[derive(Debug, Clone, Copy)]
enum NegationSite {
    InsertAfter(usize),
    Remove(usize),
    DoSupport(usize),
}

/// Insert "not" after an auxiliary, or remove an existing negation.
///
/// With `do_support`, a sentence without auxiliaries whose root looks like an
/// inflected verb ("-ed"/"-s") is rewritten as "did/does not <stem>".
pub fn apply_negation<R: Rng>(
    claim: &[String],
    parse: Option<&DependencyParse>,
    do_support: bool,
    rng: &mut R,
) -> Option<Corruption> {
    let mut sites = Vec::new();
    for i in 0..claim.len() {
        if is_aux(&claim[i]) {
            let next_neg = claim.get(i + 1).is_some_and(|t| is_negation(t));
            let prev_aux = i > 0 && is_aux(&claim[i - 1]);
            if !next_neg && !prev_aux {
                sites.push(NegationSite::InsertAfter(i));
            }
        } else if is_negation(&claim[i]) && i > 0 {
            sites.push(NegationSite::Remove(i));
        }
    }
    if sites.is_empty() && do_support {
        if let Some(root) = parse.and_then(DependencyParse::root) {
            let tok = &claim[root];
            let alphabetic = tok.chars().all(|c| c.is_ascii_lowercase());
            if alphabetic && tok.len() > 3 && (tok.ends_with("ed") || tok.ends_with('s')) {
                sites.push(NegationSite::DoSupport(root));
            }
        }
    }
    let site = *sites.choose(rng)?;
    Some(match site {
        NegationSite::InsertAfter(i) => {
            let mut tokens = claim.to_vec();
            tokens.insert(i + 1, "not".to_string());
            Corruption {
                tokens,
                span: (i + 1, i + 2),
                source_span: (i + 1, i + 1),
                op: ParseOp::Insert {
                    at: i + 1,
                    anchor: i,
                    rel: "neg".into(),
                },
            }
        }
        NegationSite::Remove(i) => {
            let mut tokens = claim.to_vec();
            tokens.remove(i);
            Corruption {
                tokens,
                span: (i - 1, i),
                source_span: (i - 1, i + 1),
                op: ParseOp::Delete { at: i },
            }
        }
        NegationSite::DoSupport(r) => {
            let verb = &claim[r];
            let (aux, stem) = if let Some(stem) = verb.strip_suffix("ed") {
                ("did", stem)
            } else {
                ("does", verb.strip_suffix('s').unwrap_or(verb))
            };
            replace_range(claim, r, r + 1, vec![aux.into(), "not".into(), stem.into()], "aux")
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseMode {
    #[default]
    Both,
    DuplicateOnly,
    DeleteOnly,
}

impl std::str::FromStr for NoiseMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "both" => Ok(NoiseMode::Both),
            "duplicate" => Ok(NoiseMode::DuplicateOnly),
            "delete" => Ok(NoiseMode::DeleteOnly),
            other => Err(Error::validation("noise_mode", format!("unknown noise mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum NoiseOp {
    Keep,
    Duplicate,
    Delete,
}

/// Output of [`apply_noise`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Noise {
    pub tokens: Vec<String>,
    /// Positions (in the new tokens) of inserted duplicates.
    pub duplicated: Vec<usize>,
    /// Positions (in the source tokens) that were deleted.
    pub deleted: Vec<usize>,
    /// New position of each source token, `None` if deleted.
    pub index_map: Vec<Option<usize>>,
    ops: Vec<NoiseOp>,
}

impl Noise {
    /// Carry a source parse across the noise edits.
    pub fn project(&self, parse: &DependencyParse) -> Result<DependencyParse> {
        let mut p = parse.clone();
        for (i, op) in self.ops.iter().enumerate().rev() {
            p = match op {
                NoiseOp::Keep => continue,
                NoiseOp::Duplicate => edit::insert(&p, i + 1, 1, i, "dep")?,
                NoiseOp::Delete => edit::delete_span(&p, i, 1)?,
            };
        }
        Ok(p)
    }

    /// Carry a per-token mask across the edits; duplicates are unmarked.
    pub fn carry_mask(&self, mask: &[bool]) -> Vec<bool> {
        let mut out = vec![false; self.tokens.len()];
        for (src, new) in self.index_map.iter().enumerate() {
            if let Some(j) = new {
                out[*j] = mask[src];
            }
        }
        out
    }
}

/// Independently duplicate or delete each token with probability `rate`.
///
/// Tokens flagged in `protected` are never deleted, and at least one token
/// always survives. Every token consumes the same random draws whatever the
/// outcome, so results depend only on the seed, length and rate.
pub fn apply_noise<R: Rng>(
    claim: &[String],
    rng: &mut R,
    rate: f64,
    mode: NoiseMode,
    protected: &[bool],
) -> Result<Noise> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::validation("noise_rate", format!("{rate} outside [0, 1]")));
    }
    let mut ops: Vec<NoiseOp> = claim
        .iter()
        .enumerate()
        .map(|(i, _)| {
            let hit = rng.gen::<f64>() < rate;
            let dup = rng.gen_bool(0.5);
            let op = match (hit, mode) {
                (false, _) => NoiseOp::Keep,
                (true, NoiseMode::DuplicateOnly) => NoiseOp::Duplicate,
                (true, NoiseMode::DeleteOnly) => NoiseOp::Delete,
                (true, NoiseMode::Both) if dup => NoiseOp::Duplicate,
                (true, NoiseMode::Both) => NoiseOp::Delete,
            };
            if op == NoiseOp::Delete && protected.get(i).copied().unwrap_or(false) {
                NoiseOp::Keep
            } else {
                op
            }
        })
        .collect();
    if ops.iter().all(|op| *op == NoiseOp::Delete) {
        if let Some(last) = ops.last_mut() {
            *last = NoiseOp::Keep;
        }
    }
    let mut tokens = Vec::with_capacity(claim.len() * 2);
    let mut duplicated = Vec::new();
    let mut deleted = Vec::new();
    let mut index_map = Vec::with_capacity(claim.len());
    for (i, (tok, op)) in claim.iter().zip(&ops).enumerate() {
        match op {
            NoiseOp::Keep => {
                index_map.push(Some(tokens.len()));
                tokens.push(tok.clone());
            }
            NoiseOp::Duplicate => {
                index_map.push(Some(tokens.len()));
                tokens.push(tok.clone());
                duplicated.push(tokens.len());
                tokens.push(tok.clone());
            }
            NoiseOp::Delete => {
                index_map.push(None);
                deleted.push(i);
            }
        }
    }
    Ok(Noise {
        tokens,
        duplicated,
        deleted,
        index_map,
        ops,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entc::tagger::{LexiconTagger, PronounTable};
    use crate::rng::child_rng;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    fn diff_matches(src: &[String], c: &Corruption) {
        let (s, se) = c.source_span;
        let (_, ne) = c.span;
        assert_eq!(src[..s], c.tokens[..s]);
        assert_eq!(src[se..], c.tokens[ne..]);
        assert_ne!(src[s..se], c.tokens[s..ne]);
    }

    #[test]
    fn entity_swap_person() {
        let claim = toks("Yesterday Smith resigned");
        let doc = toks("Jones said Smith resigned");
        let ce = [TypedSpan::new(1, 2, "PERSON")];
        let de = [TypedSpan::new(0, 1, "PERSON"), TypedSpan::new(2, 3, "PERSON")];
        let c = apply_entity_swap(&claim, &ce, &doc, &de, &mut child_rng(1, &[])).unwrap();
        assert_eq!(c.tokens, toks("Yesterday Jones resigned"));
        assert_eq!(c.span, (1, 2));
        diff_matches(&claim, &c);
    }

    #[test]
    fn entity_swap_needs_distinct_same_type() {
        let claim = toks("Yesterday Smith resigned");
        let doc = toks("Smith said SMITH resigned in Paris");
        let ce = [TypedSpan::new(1, 2, "PERSON")];
        let de = [
            TypedSpan::new(0, 1, "PERSON"),
            TypedSpan::new(2, 3, "PERSON"),
            TypedSpan::new(5, 6, "GPE"),
        ];
        assert!(apply_entity_swap(&claim, &ce, &doc, &de, &mut child_rng(1, &[])).is_none());
    }

    #[test]
    fn multi_token_entity_swap_keeps_alignment() {
        let claim = toks("He flew to New York on Monday");
        let doc = toks("Flights from Los Angeles resumed");
        let ce = [TypedSpan::new(3, 5, "GPE")];
        let de = [TypedSpan::new(2, 4, "GPE")];
        let c = apply_entity_swap(&claim, &ce, &doc, &de, &mut child_rng(1, &[])).unwrap();
        assert_eq!(c.tokens, toks("He flew to Los Angeles on Monday"));
        assert_eq!(c.span, (3, 5));
        assert_eq!(c.tokens.len(), claim.len());
        assert_eq!(c.tokens[5..], claim[5..]);
    }

    #[test]
    fn entity_swap_trims_shared_tokens() {
        let claim = toks("He flew to New York today");
        let doc = toks("New Jersey");
        let c = apply_entity_swap(
            &claim,
            &[TypedSpan::new(3, 5, "GPE")],
            &doc,
            &[TypedSpan::new(0, 2, "GPE")],
            &mut child_rng(1, &[]),
        )
        .unwrap();
        assert_eq!(c.span, (4, 5));
        diff_matches(&claim, &c);
    }

    #[test]
    fn number_swap_from_document() {
        let claim = toks("seven games were postponed");
        let doc = toks("nine games were postponed after seven arrests");
        let cn = [TypedSpan::new(0, 1, "NUM")];
        let dn = [TypedSpan::new(0, 1, "NUM"), TypedSpan::new(5, 6, "NUM")];
        let c = apply_number_swap(&claim, &cn, &doc, &dn, &mut child_rng(3, &[])).unwrap();
        assert_eq!(c.tokens, toks("nine games were postponed"));
    }

    #[test]
    fn number_swap_skips_same_value() {
        let claim = toks("7 games");
        let doc = toks("seven games");
        let c = apply_number_swap(
            &claim,
            &[TypedSpan::new(0, 1, "NUM")],
            &doc,
            &[TypedSpan::new(0, 1, "NUM")],
            &mut child_rng(3, &[]),
        )
        .unwrap();
        // falls back to perturbation
        assert_ne!(integer_value(&c.tokens[0]), Some(7));
    }

    #[test]
    fn number_swap_without_numbers() {
        assert!(apply_number_swap(&toks("no digits"), &[], &toks("9"), &[TypedSpan::new(0, 1, "NUM")], &mut child_rng(1, &[])).is_none());
    }

    #[test]
    fn perturbation_fallback_covers_range_uniformly() {
        let expected: Vec<i64> = (1..=17).filter(|v| *v != 7).collect();
        assert_eq!(perturbation_candidates(7), expected);
        let mut seen = std::collections::BTreeMap::new();
        for seed in 0..3200u64 {
            let c = apply_number_swap(&toks("7 games"), &[TypedSpan::new(0, 1, "NUM")], &toks("games"), &[], &mut child_rng(seed, &[]))
                .unwrap();
            *seen.entry(c.tokens[0].parse::<i64>().unwrap()).or_insert(0) += 1;
        }
        assert_eq!(seen.keys().copied().collect::<Vec<_>>(), expected);
        // 3200 draws over 16 values: 200 expected each
        for count in seen.values() {
            assert!((130..=270).contains(count), "{seen:?}");
        }
        // fixed seed is reproducible
        let a = apply_number_swap(&toks("7"), &[TypedSpan::new(0, 1, "NUM")], &[], &[], &mut child_rng(5, &[])).unwrap();
        let b = apply_number_swap(&toks("7"), &[TypedSpan::new(0, 1, "NUM")], &[], &[], &mut child_rng(5, &[])).unwrap();
        assert_eq!(a, b);
    }

    fn two_way_tagger() -> LexiconTagger {
        LexiconTagger::new().with_pronouns(PronounTable::new(&[
            (PronounClass::Subject, &["he", "she"]),
            (PronounClass::Object, &["him", "her"]),
        ]))
    }

    #[test]
    fn pronoun_swap_subject_keeps_case() {
        let tagger = two_way_tagger();
        let claim = toks("She arrived");
        let c = apply_pronoun_swap(&claim, &[(0, PronounClass::Subject)], &tagger, &mut child_rng(0, &[])).unwrap();
        assert_eq!(c.tokens, toks("He arrived"));
    }

    #[test]
    fn pronoun_swap_object_position() {
        let tagger = two_way_tagger();
        let claim = toks("He told him");
        let c = apply_pronoun_swap(&claim, &[(2, PronounClass::Object)], &tagger, &mut child_rng(0, &[])).unwrap();
        assert_eq!(c.tokens, toks("He told her"));
        assert_eq!(c.span, (2, 3));
        // default table: any other object pronoun
        let tagger = LexiconTagger::new();
        let c = apply_pronoun_swap(&claim, &[(2, PronounClass::Object)], &tagger, &mut child_rng(0, &[])).unwrap();
        assert!(["her", "them"].contains(&c.tokens[2].as_str()));
    }

    #[test]
    fn pronoun_swap_none_cases() {
        let tagger = LexiconTagger::new()
            .with_pronouns(PronounTable::new(&[(PronounClass::Reflexive, &["itself"])]));
        assert!(apply_pronoun_swap(&toks("it hurt itself"), &[(2, PronounClass::Reflexive)], &tagger, &mut child_rng(0, &[])).is_none());
        assert!(apply_pronoun_swap(&toks("dogs bark"), &[], &tagger, &mut child_rng(0, &[])).is_none());
    }

    #[test]
    fn negation_insert_and_remove() {
        let claim = toks("has created");
        let c = apply_negation(&claim, None, false, &mut child_rng(0, &[])).unwrap();
        assert_eq!(c.tokens, toks("has not created"));
        assert_eq!(c.span, (1, 2));
        diff_matches(&claim, &c);

        let claim = toks("is not running");
        let c = apply_negation(&claim, None, false, &mut child_rng(0, &[])).unwrap();
        assert_eq!(c.tokens, toks("is running"));
        assert_eq!(c.span, (0, 1));
        diff_matches(&claim, &c);

        assert!(apply_negation(&toks("a red necklace"), None, false, &mut child_rng(0, &[])).is_none());
    }

    #[test]
    fn negation_after_first_auxiliary_only() {
        let c = apply_negation(&toks("he has been seen"), None, false, &mut child_rng(0, &[])).unwrap();
        assert_eq!(c.tokens, toks("he has not been seen"));
    }

    #[test]
    fn do_support_behind_flag() {
        use crate::data::{Arc, ParseRepr};
        let claim = toks("police arrested fans");
        let parse =
            DependencyParse::new(vec![Arc::new(1, 0, "nsubj"), Arc::new(1, 2, "obj")], 3, ParseRepr::Basic).unwrap();
        assert!(apply_negation(&claim, Some(&parse), false, &mut child_rng(0, &[])).is_none());
        let c = apply_negation(&claim, Some(&parse), true, &mut child_rng(0, &[])).unwrap();
        assert_eq!(c.tokens, toks("police did not arrest fans"));
        assert_eq!(c.span, (1, 4));
        let projected = c.op.project(&parse).unwrap();
        assert_eq!(projected.token_count(), 5);
        assert_eq!(projected.root(), Some(3));
    }

    #[test]
    fn noise_identity_at_rate_zero() {
        let claim = toks("a b c d");
        let n = apply_noise(&claim, &mut child_rng(0, &[]), 0.0, NoiseMode::Both, &[]).unwrap();
        assert_eq!(n.tokens, claim);
        assert!(n.duplicated.is_empty() && n.deleted.is_empty());
    }

    #[test]
    fn noise_duplicates_everything_at_rate_one() {
        let claim = toks("a b c");
        let n = apply_noise(&claim, &mut child_rng(0, &[]), 1.0, NoiseMode::DuplicateOnly, &[]).unwrap();
        assert_eq!(n.tokens, toks("a a b b c c"));
        assert_eq!(n.duplicated, vec![1, 3, 5]);
    }

    #[test]
    fn noise_is_seed_deterministic_and_projects_parse() {
        use crate::data::{Arc, ParseRepr};
        let claim: Vec<String> = (0..20).map(|i| format!("w{i}")).collect();
        let a = apply_noise(&claim, &mut child_rng(9, &["n"]), 0.05, NoiseMode::Both, &[]).unwrap();
        let b = apply_noise(&claim, &mut child_rng(9, &["n"]), 0.05, NoiseMode::Both, &[]).unwrap();
        assert_eq!(a, b);
        let parse =
            DependencyParse::new((0..19).map(|i| Arc::new(i + 1, i, "dep")).collect(), 20, ParseRepr::Basic).unwrap();
        let heavy = apply_noise(&claim, &mut child_rng(9, &["n"]), 0.5, NoiseMode::Both, &[]).unwrap();
        let projected = heavy.project(&parse).unwrap();
        assert_eq!(projected.token_count(), heavy.tokens.len());
    }

    #[test]
    fn noise_never_deletes_protected_or_everything() {
        let claim = toks("a b c");
        let n = apply_noise(&claim, &mut child_rng(0, &[]), 1.0, NoiseMode::DeleteOnly, &[false, true, false]).unwrap();
        assert_eq!(n.tokens, toks("b"));
        assert_eq!(n.carry_mask(&[false, true, false]), vec![true]);
        let n = apply_noise(&claim, &mut child_rng(0, &[]), 1.0, NoiseMode::DeleteOnly, &[]).unwrap();
        assert_eq!(n.tokens.len(), 1);
    }
}

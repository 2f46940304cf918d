//! Entity-centric synthetic data: rule-based corruptions of claims with known
//! error spans, plus label-preserving paraphrase and noise augmentation.

mod tagger;
mod transforms;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

pub use tagger::*;
pub use transforms::*;

use crate::data::{AnnotatedExample, DependencyParse, FactLabelSet, Label, Provenance, SummarySentence};
use crate::derive::words_to_arcs;
use crate::error::{Error, Result};
use crate::providers::{ParaphraseProvider, ParserProvider};
use crate::rng::{child_rng, child_seed};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TransformKind {
    Paraphrase,
    EntitySwap,
    NumberSwap,
    PronounSwap,
    SentenceNegation,
    NoiseInjection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarity {
    Positive,
    Negative,
    LabelPreserving,
}

impl TransformKind {
    pub const ALL: [TransformKind; 6] = [
        TransformKind::Paraphrase,
        TransformKind::EntitySwap,
        TransformKind::NumberSwap,
        TransformKind::PronounSwap,
        TransformKind::SentenceNegation,
        TransformKind::NoiseInjection,
    ];

    pub const NEGATIVE: [TransformKind; 4] = [
        TransformKind::EntitySwap,
        TransformKind::NumberSwap,
        TransformKind::PronounSwap,
        TransformKind::SentenceNegation,
    ];

    pub fn polarity(self) -> Polarity {
        match self {
            TransformKind::Paraphrase => Polarity::Positive,
            TransformKind::NoiseInjection => Polarity::LabelPreserving,
            _ => Polarity::Negative,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TransformKind::Paraphrase => "paraphrase",
            TransformKind::EntitySwap => "entity",
            TransformKind::NumberSwap => "number",
            TransformKind::PronounSwap => "pronoun",
            TransformKind::SentenceNegation => "negation",
            TransformKind::NoiseInjection => "noise",
        }
    }
}

impl fmt::Display for TransformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TransformKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TransformKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::validation("transforms", format!("unknown transformation `{s}`")))
    }
}

/// Parse a comma-separated transformation list such as `entity,number,noise`.
pub fn parse_transforms(list: &str) -> Result<BTreeSet<TransformKind>> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(TransformKind::from_str)
        .collect()
}

#[derive(Debug, Clone)]
pub struct EntcConfig {
    pub transforms: BTreeSet<TransformKind>,
    /// Cap on negatives per claim; `0` keeps every applicable transformation.
    pub per_claim: usize,
    pub noise_rate: f64,
    pub noise_mode: NoiseMode,
    /// Target positive:negative ratio after generation; `None` keeps everything.
    pub pos_neg_ratio: Option<(usize, usize)>,
    /// Negate auxiliary-free main verbs via "did/does not".
    pub do_support: bool,
}

impl Default for EntcConfig {
    fn default() -> Self {
        EntcConfig {
            transforms: TransformKind::ALL.into_iter().collect(),
            per_claim: 0,
            noise_rate: 0.05,
            noise_mode: NoiseMode::Both,
            pos_neg_ratio: Some((1, 1)),
            do_support: false,
        }
    }
}

impl EntcConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=0.2).contains(&self.noise_rate) {
            return Err(Error::validation("noise_rate", format!("{} outside [0, 0.2]", self.noise_rate)));
        }
        if let Some((p, n)) = self.pos_neg_ratio {
            if p == 0 || n == 0 {
                return Err(Error::validation("pos_neg_ratio", "ratio terms must be positive"));
            }
        }
        Ok(())
    }

    fn enabled(&self, kind: TransformKind) -> bool {
        self.transforms.contains(&kind)
    }
}

/// Generated examples plus per-transformation bookkeeping.
#[derive(Debug, Clone, Default)]
pub struct EntcOutput {
    pub examples: Vec<AnnotatedExample>,
    /// Emitted examples per transformation (`original` for untouched claims).
    pub emitted: BTreeMap<String, usize>,
    /// Claims where an enabled transformation had no applicable site.
    pub skipped: BTreeMap<String, usize>,
    /// Examples removed to reach the configured class ratio.
    pub dropped_for_balance: usize,
}

impl EntcOutput {
    pub fn positives(&self) -> usize {
        self.examples
            .iter()
            .filter(|e| e.labels.sentence_label == Label::Factual)
            .count()
    }

    pub fn negatives(&self) -> usize {
        self.examples.len() - self.positives()
    }
}

/// External collaborators of the generator.
pub struct EntcProviders<'a> {
    pub tagger: &'a dyn SpanTagger,
    pub paraphraser: Option<&'a dyn ParaphraseProvider>,
    /// When present, corrupted claims are re-parsed instead of projecting the source parse.
    pub parser: Option<&'a dyn ParserProvider>,
}

struct Variant {
    suffix: String,
    kind: Option<TransformKind>,
    tokens: Vec<String>,
    parse: DependencyParse,
    mask: Vec<bool>,
    meta: BTreeMap<String, String>,
}

fn label_variant(base: &AnnotatedExample, v: Variant) -> Result<AnnotatedExample> {
    let id = format!("{}/{}", base.summary.id, v.suffix);
    let summary = SummarySentence::new(id, v.tokens, v.parse)?;
    let arc_labels = words_to_arcs(&summary.parse, &v.mask)?;
    let sentence_label = Label::from_nonfactual(v.mask.iter().any(|&w| w));
    let mut document = base.document.clone();
    document.meta.extend(v.meta);
    document.meta.insert("source_id".into(), base.summary.id.clone());
    document.meta.insert(
        "transform".into(),
        v.kind.map(TransformKind::as_str).unwrap_or("original").into(),
    );
    let ex = AnnotatedExample {
        document,
        summary,
        labels: FactLabelSet {
            sentence_label,
            word_mask: Some(v.mask),
            arc_labels: Some(arc_labels),
            provenance: Provenance::EntC,
        },
        error_tags: None,
    };
    ex.validate()?;
    Ok(ex)
}

fn span_meta(c: &Corruption) -> BTreeMap<String, String> {
    BTreeMap::from([
        ("err_start".to_string(), c.span.0.to_string()),
        ("err_end".to_string(), c.span.1.to_string()),
        ("src_start".to_string(), c.source_span.0.to_string()),
        ("src_end".to_string(), c.source_span.1.to_string()),
    ])
}

fn join_positions(positions: &[usize]) -> String {
    positions.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

/// Generate entity-centric examples for every claim.
///
/// Each claim's output depends only on `(claim, config, seed)`: the random
/// stream for every transformation is derived from the seed, the claim id and
/// the transformation name, so corpus order does not matter.
pub fn generate_entc(
    corpus: &[AnnotatedExample],
    config: &EntcConfig,
    providers: &EntcProviders<'_>,
    seed: u64,
) -> Result<EntcOutput> {
    config.validate()?;
    let mut out = EntcOutput::default();
    for claim in corpus {
        let variants = claim_variants(claim, config, providers, seed, &mut out.skipped)?;
        for v in variants {
            *out.emitted
                .entry(v.kind.map(|k| k.as_str()).unwrap_or("original").to_string())
                .or_insert(0) += 1;
            out.examples.push(label_variant(claim, v)?);
        }
    }
    if let Some(ratio) = config.pos_neg_ratio {
        out.dropped_for_balance = rebalance(&mut out.examples, ratio, seed);
    }
    Ok(out)
}

fn reparse_or(providers: &EntcProviders<'_>, tokens: &[String], projected: impl FnOnce() -> Result<DependencyParse>) -> Result<DependencyParse> {
    match providers.parser {
        Some(parser) => parser.parse(tokens),
        None => projected(),
    }
}

fn claim_variants(
    claim: &AnnotatedExample,
    config: &EntcConfig,
    providers: &EntcProviders<'_>,
    seed: u64,
    skipped: &mut BTreeMap<String, usize>,
) -> Result<Vec<Variant>> {
    let id = claim.summary.id.as_str();
    let tokens = &claim.summary.tokens;
    let parse = &claim.summary.parse;
    let mut skip = |kind: TransformKind| {
        log::debug!("claim {id}: no site for {kind}");
        *skipped.entry(kind.as_str().to_string()).or_insert(0) += 1;
    };

    let mut positives = vec![Variant {
        suffix: "orig".into(),
        kind: None,
        tokens: tokens.clone(),
        parse: parse.clone(),
        mask: vec![false; tokens.len()],
        meta: BTreeMap::new(),
    }];

    if config.enabled(TransformKind::Paraphrase) {
        if let Some(provider) = providers.paraphraser {
            match provider.paraphrase(&claim.summary, 1)? {
                Some(p) => {
                    let para_parse = match p.parse {
                        Some(pp) => pp,
                        None => reparse_or(providers, &p.tokens, || {
                            Err(Error::Provider("paraphrase without parse and no parser configured".into()))
                        })?,
                    };
                    positives.push(Variant {
                        suffix: "paraphrase".into(),
                        kind: Some(TransformKind::Paraphrase),
                        mask: vec![false; p.tokens.len()],
                        tokens: p.tokens,
                        parse: para_parse,
                        meta: BTreeMap::new(),
                    });
                }
                None => skip(TransformKind::Paraphrase),
            }
        }
    }

    let claim_tags = providers.tagger.tag(tokens);
    let doc_tags = providers.tagger.tag(&claim.document.tokens);
    let doc = &claim.document.tokens;
    let mut negatives = Vec::new();
    for kind in TransformKind::NEGATIVE {
        if !config.enabled(kind) {
            continue;
        }
        let mut rng = child_rng(seed, &[id, kind.as_str()]);
        let corruption = match kind {
            TransformKind::EntitySwap => {
                apply_entity_swap(tokens, &claim_tags.entities, doc, &doc_tags.entities, &mut rng)
            }
            TransformKind::NumberSwap => {
                apply_number_swap(tokens, &claim_tags.numbers, doc, &doc_tags.numbers, &mut rng)
            }
            TransformKind::PronounSwap => {
                apply_pronoun_swap(tokens, &claim_tags.pronouns, providers.tagger, &mut rng)
            }
            TransformKind::SentenceNegation => apply_negation(tokens, Some(parse), config.do_support, &mut rng),
            _ => unreachable!("only negative kinds"),
        };
        let Some(c) = corruption else {
            skip(kind);
            continue;
        };
        let new_parse = reparse_or(providers, &c.tokens, || c.op.project(parse))?;
        negatives.push(Variant {
            suffix: kind.as_str().into(),
            kind: Some(kind),
            mask: c.word_mask(),
            meta: span_meta(&c),
            tokens: c.tokens,
            parse: new_parse,
        });
    }
    if config.per_claim > 0 && negatives.len() > config.per_claim {
        // keep a seeded subset, in canonical kind order
        let mut ranked: Vec<(u64, usize)> = negatives
            .iter()
            .enumerate()
            .map(|(i, v)| (child_seed(seed, &[id, &v.suffix, "cap"]), i))
            .collect();
        ranked.sort_unstable();
        let keep: BTreeSet<usize> = ranked.iter().take(config.per_claim).map(|&(_, i)| i).collect();
        negatives = negatives
            .into_iter()
            .enumerate()
            .filter_map(|(i, v)| keep.contains(&i).then_some(v))
            .collect();
    }

    let mut variants = positives;
    variants.extend(negatives);

    if config.enabled(TransformKind::NoiseInjection) {
        let mut noisy = Vec::new();
        for v in &variants {
            let mut rng = child_rng(seed, &[id, &v.suffix, "noise"]);
            let noise = apply_noise(&v.tokens, &mut rng, config.noise_rate, config.noise_mode, &v.mask)?;
            let new_parse = reparse_or(providers, &noise.tokens, || noise.project(&v.parse))?;
            let mut meta = v.meta.clone();
            meta.retain(|k, _| k == "src_start" || k == "src_end");
            meta.insert(
                "base_transform".into(),
                v.kind.map(TransformKind::as_str).unwrap_or("original").into(),
            );
            meta.insert("noise_dup".into(), join_positions(&noise.duplicated));
            meta.insert("noise_del".into(), join_positions(&noise.deleted));
            noisy.push(Variant {
                suffix: format!("{}+noise", v.suffix),
                kind: Some(TransformKind::NoiseInjection),
                mask: noise.carry_mask(&v.mask),
                tokens: noise.tokens,
                parse: new_parse,
                meta,
            });
        }
        variants.extend(noisy);
    }
    Ok(variants)
}

/// Subsample the majority class toward `pos:neg`. Which examples survive
/// depends only on their ids and the seed. Returns the number removed.
fn rebalance(examples: &mut Vec<AnnotatedExample>, (pos, neg): (usize, usize), seed: u64) -> usize {
    let n_pos = examples
        .iter()
        .filter(|e| e.labels.sentence_label == Label::Factual)
        .count();
    let n_neg = examples.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        log::warn!("class ratio not enforced: one class is empty ({n_pos} positive, {n_neg} negative)");
        return 0;
    }
    let (drop_label, keep) = if n_pos * neg > n_neg * pos {
        (Label::Factual, (n_neg * pos).div_ceil(neg))
    } else {
        (Label::NonFactual, (n_pos * neg).div_ceil(pos))
    };
    let mut ranked: Vec<(u64, usize)> = examples
        .iter()
        .enumerate()
        .filter(|(_, e)| e.labels.sentence_label == drop_label)
        .map(|(i, e)| (child_seed(seed, &[e.id(), "balance"]), i))
        .collect();
    ranked.sort_unstable();
    let dropped: BTreeSet<usize> = ranked.iter().skip(keep).map(|&(_, i)| i).collect();
    let mut idx = 0;
    examples.retain(|_| {
        let keep = !dropped.contains(&idx);
        idx += 1;
        keep
    });
    dropped.len()
}

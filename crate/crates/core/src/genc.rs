//! Generation-centric synthetic data: low-ranked paraphrases of gold summaries
//! labeled per dependency arc against the gold parse.

use std::collections::{BTreeMap, HashSet};

use crate::data::{AnnotatedExample, DependencyParse, FactLabelSet, Label, Provenance, SummarySentence};
use crate::derive::arcs_to_sentence_or_default;
use crate::error::{Error, Result};
use crate::providers::{ParaphraseProvider, ParserProvider};

pub const DEFAULT_RANK: usize = 10;

/// A paraphrase arc is factual iff both endpoints align to gold tokens and the
/// gold parse has an arc between those tokens, in the same direction, with the
/// same relation label.
pub fn label_genc_arcs(
    gold_parse: &DependencyParse,
    gold_tokens: &[String],
    para_parse: &DependencyParse,
    para_tokens: &[String],
    alignment: &[Option<usize>],
) -> Result<Vec<Label>> {
    if gold_parse.token_count() != gold_tokens.len() {
        return Err(Error::validation("arcs", "gold parse does not cover the gold tokens"));
    }
    if para_parse.token_count() != para_tokens.len() {
        return Err(Error::validation("arcs", "paraphrase parse does not cover the paraphrase tokens"));
    }
    if alignment.len() != para_tokens.len() {
        return Err(Error::validation(
            "alignment",
            format!("{} entries for {} paraphrase tokens", alignment.len(), para_tokens.len()),
        ));
    }
    if let Some(bad) = alignment.iter().flatten().find(|&&g| g >= gold_tokens.len()) {
        return Err(Error::validation(
            "alignment",
            format!("gold index {bad} out of range for {} tokens", gold_tokens.len()),
        ));
    }
    let gold: HashSet<(usize, usize, &str)> = gold_parse
        .arcs()
        .iter()
        .map(|a| (a.head, a.child, a.relation.as_str()))
        .collect();
    Ok(para_parse
        .arcs()
        .iter()
        .map(|a| {
            let supported = match (alignment[a.head], alignment[a.child]) {
                (Some(h), Some(c)) => gold.contains(&(h, c, a.relation.as_str())),
                _ => false,
            };
            Label::from_nonfactual(!supported)
        })
        .collect())
}

#[derive(Debug, Clone, Default)]
pub struct GencOutput {
    pub examples: Vec<AnnotatedExample>,
    /// Gold summaries with no paraphrase at the requested rank.
    pub skipped: usize,
    /// Single-token paraphrases labeled factual by convention.
    pub defaulted: usize,
}

impl GencOutput {
    /// Realized (factual, non-factual) counts among paraphrase examples.
    pub fn paraphrase_balance(&self) -> (usize, usize) {
        let paras = self
            .examples
            .iter()
            .filter(|e| e.document.meta.get("genc_role").map(String::as_str) == Some("paraphrase"));
        let (mut pos, mut neg) = (0, 0);
        for e in paras {
            if e.labels.sentence_label.is_nonfactual() {
                neg += 1;
            } else {
                pos += 1;
            }
        }
        (pos, neg)
    }
}

fn genc_example(
    base: &AnnotatedExample,
    id: String,
    tokens: Vec<String>,
    parse: DependencyParse,
    arc_labels: Vec<Label>,
    sentence_label: Label,
    meta: BTreeMap<String, String>,
) -> Result<AnnotatedExample> {
    let mut document = base.document.clone();
    document.meta.extend(meta);
    document.meta.insert("source_id".into(), base.summary.id.clone());
    let ex = AnnotatedExample {
        document,
        summary: SummarySentence::new(id, tokens, parse)?,
        labels: FactLabelSet {
            sentence_label,
            word_mask: None,
            arc_labels: Some(arc_labels),
            provenance: Provenance::GenC,
        },
        error_tags: None,
    };
    ex.validate()?;
    Ok(ex)
}

/// Emit each gold summary as a factual example plus its rank-`rank`
/// paraphrase labeled by [`label_genc_arcs`]. Output order follows input order.
pub fn generate_genc(
    corpus: &[AnnotatedExample],
    provider: &dyn ParaphraseProvider,
    rank: usize,
    parser: Option<&dyn ParserProvider>,
) -> Result<GencOutput> {
    if rank == 0 {
        return Err(Error::validation("rank", "rank is 1-based"));
    }
    let mut out = GencOutput::default();
    for gold in corpus {
        let id = gold.summary.id.as_str();
        let gold_arcs = vec![Label::Factual; gold.summary.parse.len()];
        out.examples.push(genc_example(
            gold,
            format!("{id}/gold"),
            gold.summary.tokens.clone(),
            gold.summary.parse.clone(),
            gold_arcs,
            Label::Factual,
            BTreeMap::from([("genc_role".to_string(), "gold".to_string())]),
        )?);

        let Some(para) = provider.paraphrase(&gold.summary, rank)? else {
            log::info!("no rank-{rank} paraphrase for {id}; skipped");
            out.skipped += 1;
            continue;
        };
        let parse = match (para.parse, parser) {
            (_, Some(p)) => p.parse(&para.tokens)?,
            (Some(parse), None) => parse,
            (None, None) => {
                return Err(Error::Provider(format!(
                    "paraphrase of {id} has no parse and no parser is configured"
                )))
            }
        };
        let labels = label_genc_arcs(
            &gold.summary.parse,
            &gold.summary.tokens,
            &parse,
            &para.tokens,
            &para.alignment,
        )?;
        let (sentence, defaulted) = arcs_to_sentence_or_default(&labels);
        let mut meta = BTreeMap::from([
            ("genc_role".to_string(), "paraphrase".to_string()),
            ("rank".to_string(), rank.to_string()),
        ]);
        if defaulted {
            out.defaulted += 1;
            meta.insert("sentence_label_default".into(), "true".into());
        }
        out.examples.push(genc_example(
            gold,
            format!("{id}/rank{rank}"),
            para.tokens,
            parse,
            labels,
            sentence,
            meta,
        )?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::ParseRepr;
    use crate::providers::Paraphrase;
    use crate::testing::{parse, toks};

    use Label::{Factual as F, NonFactual as N};

    fn dog_cat() -> (Vec<String>, DependencyParse) {
        (
            toks("the dog chased the cat"),
            parse(5, &[(1, 0, "det"), (2, 1, "nsubj"), (4, 3, "det"), (2, 4, "obj")]),
        )
    }

    #[test]
    fn identity_paraphrase_is_factual() {
        let (t, p) = dog_cat();
        let align: Vec<_> = (0..t.len()).map(Some).collect();
        assert_eq!(label_genc_arcs(&p, &t, &p, &t, &align).unwrap(), vec![F; 4]);
    }

    #[test]
    fn role_swap_breaks_subject_and_object() {
        let (gt, gp) = dog_cat();
        let pt = toks("the cat chased the dog");
        let pp = gp.clone();
        // each determiner aligns with the one attached to the same noun
        let align = vec![Some(3), Some(4), Some(2), Some(0), Some(1)];
        let labels = label_genc_arcs(&gp, &gt, &pp, &pt, &align).unwrap();
        assert_eq!(labels, vec![F, N, F, N]);
    }

    #[test]
    fn unaligned_child_is_nonfactual() {
        let gt = toks("she created jewelry");
        let gp = parse(3, &[(1, 0, "nsubj"), (1, 2, "obj")]);
        let pt = toks("she created a necklace");
        let pp = parse(4, &[(1, 0, "nsubj"), (3, 2, "det"), (1, 3, "obj")]);
        let align = vec![Some(0), Some(1), None, None];
        let labels = label_genc_arcs(&gp, &gt, &pp, &pt, &align).unwrap();
        assert_eq!(labels, vec![F, N, N]);
        assert_eq!(crate::derive::arcs_to_sentence(&labels).unwrap(), N);
    }

    #[test]
    fn relation_must_match() {
        let gt = toks("dogs bark");
        let gp = parse(2, &[(1, 0, "nsubj")]);
        let pp = parse(2, &[(1, 0, "obj")]);
        let labels = label_genc_arcs(&gp, &gt, &pp, &gt, &[Some(0), Some(1)]).unwrap();
        assert_eq!(labels, vec![N]);
    }

    #[test]
    fn alignment_out_of_range() {
        let gt = toks("dogs bark");
        let gp = parse(2, &[(1, 0, "nsubj")]);
        let err = label_genc_arcs(&gp, &gt, &gp, &gt, &[Some(0), Some(7)]).unwrap_err();
        assert!(err.to_string().contains("alignment"));
    }

    struct Fixed(Option<Paraphrase>);

    impl ParaphraseProvider for Fixed {
        fn paraphrase(&self, _: &SummarySentence, _: usize) -> Result<Option<Paraphrase>> {
            Ok(self.0.clone())
        }
    }

    fn gold_example() -> AnnotatedExample {
        let (t, p) = dog_cat();
        crate::testing::example("g1", "the dog chased the cat in the park", t, p, FactLabelSet::sentence_only(F, Provenance::Human))
    }

    #[test]
    fn generate_emits_gold_and_paraphrase() {
        let (_, gp) = dog_cat();
        let provider = Fixed(Some(Paraphrase {
            tokens: toks("the cat chased the dog"),
            alignment: vec![Some(3), Some(4), Some(2), Some(0), Some(1)],
            parse: Some(gp),
        }));
        let out = generate_genc(&[gold_example()], &provider, 10, None).unwrap();
        assert_eq!(out.examples.len(), 2);
        let gold = &out.examples[0];
        assert_eq!(gold.labels.sentence_label, F);
        assert!(gold.labels.arc_labels.as_ref().unwrap().iter().all(|l| *l == F));
        let para = &out.examples[1];
        assert_eq!(para.summary.id, "g1/rank10");
        assert_eq!(para.labels.sentence_label, N);
        assert!(para.labels.word_mask.is_none());
        assert_eq!(para.labels.provenance, Provenance::GenC);
        assert_eq!(out.paraphrase_balance(), (0, 1));
    }

    #[test]
    fn missing_rank_is_skipped() {
        let out = generate_genc(&[gold_example()], &Fixed(None), 10, None).unwrap();
        assert_eq!(out.examples.len(), 1);
        assert_eq!(out.skipped, 1);
        assert!(generate_genc(&[], &Fixed(None), 10, None).unwrap().examples.is_empty());
    }

    #[test]
    fn single_token_paraphrase_defaults_to_factual() {
        let provider = Fixed(Some(Paraphrase {
            tokens: toks("dog"),
            alignment: vec![Some(1)],
            parse: Some(DependencyParse::new(vec![], 1, ParseRepr::Basic).unwrap()),
        }));
        let out = generate_genc(&[gold_example()], &provider, 10, None).unwrap();
        assert_eq!(out.defaulted, 1);
        assert_eq!(out.examples[1].labels.sentence_label, F);
    }
}

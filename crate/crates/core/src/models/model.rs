use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::{AnnotatedExample, Document, Label, SummarySentence};
use crate::derive::arcs_to_words;
use crate::error::{Error, Result};
use crate::rng::child_seed;

use super::encoder::{EncoderProvider, EncoderSpec};
use super::head::ClassifierHead;
use super::loss::{dae_loss_grad, dae_weak_loss_grad, sent_loss_grad};
use super::weak::{build_weak_constraints, WeakConstraintSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Sent,
    Dae,
    DaeWeak,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Sent => "sent",
            ModelKind::Dae => "dae",
            ModelKind::DaeWeak => "dae-weak",
        }
    }

    pub fn is_arc_level(self) -> bool {
        self != ModelKind::Sent
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sent" => Ok(ModelKind::Sent),
            "dae" => Ok(ModelKind::Dae),
            "dae-weak" | "dae_weak" => Ok(ModelKind::DaeWeak),
            other => Err(Error::validation("kind", format!("unknown model kind `{other}`"))),
        }
    }
}

/// Supervision for one example, matched to a model kind.
#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    Sentence(Label),
    Arcs(Vec<Label>),
    Weak(WeakConstraintSet),
}

impl Target {
    /// Extract the supervision `kind` needs. DAE requires arc labels; the
    /// weak constraints may be infeasible, which is reported as such.
    pub fn for_example(kind: ModelKind, example: &AnnotatedExample) -> Result<Target> {
        match kind {
            ModelKind::Sent => Ok(Target::Sentence(example.labels.sentence_label)),
            ModelKind::Dae => example
                .labels
                .arc_labels
                .clone()
                .map(Target::Arcs)
                .ok_or_else(|| Error::validation("arc_labels", format!("{} has no arc labels", example.id()))),
            ModelKind::DaeWeak => build_weak_constraints(example).map(Target::Weak),
        }
    }
}

/// Per-arc P(NonFactual) and a decision threshold. Implemented by arc-level
/// models and by adapters that project sentence scores onto arcs.
pub trait ArcScorer {
    fn arc_nonfactual_probs(&self, document: &Document, summary: &SummarySentence) -> Result<Vec<f64>>;

    fn threshold(&self) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SentencePrediction {
    pub label: Label,
    /// P(NonFactual) of the sentence, or the maximum over arcs.
    pub score: f64,
}

/// Everything needed to rebuild a model; what checkpoints store.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelState {
    pub kind: ModelKind,
    pub encoder: EncoderSpec,
    pub encoder_params: Vec<f64>,
    pub head: ClassifierHead,
    pub threshold: f64,
}

pub struct FactualityModel {
    kind: ModelKind,
    encoder: Box<dyn EncoderProvider>,
    head: ClassifierHead,
    threshold: f64,
}

impl fmt::Debug for FactualityModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FactualityModel")
            .field("kind", &self.kind)
            .field("encoder", &self.encoder.spec())
            .field("threshold", &self.threshold)
            .finish_non_exhaustive()
    }
}

pub const DEFAULT_THRESHOLD: f64 = 0.5;

impl FactualityModel {
    pub fn initialize(kind: ModelKind, encoder: &EncoderSpec, hidden: Option<usize>, seed: u64) -> Result<Self> {
        let init = child_seed(seed, &["init"]);
        let encoder = encoder.build(init)?;
        let input = match kind {
            ModelKind::Sent => encoder.dim(),
            _ => 2 * encoder.dim(),
        };
        let head = ClassifierHead::new(input, hidden, init)?;
        Ok(FactualityModel {
            kind,
            encoder,
            head,
            threshold: DEFAULT_THRESHOLD,
        })
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn set_threshold(&mut self, threshold: f64) -> Result<()> {
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(Error::validation("threshold", format!("{threshold} outside (0, 1)")));
        }
        self.threshold = threshold;
        Ok(())
    }

    pub fn head(&self) -> &ClassifierHead {
        &self.head
    }

    pub fn encoder(&self) -> &dyn EncoderProvider {
        self.encoder.as_ref()
    }

    pub fn head_param_count(&self) -> usize {
        self.head.params.len()
    }

    /// All trainable parameters: head first, then encoder.
    pub fn params(&self) -> Vec<f64> {
        let mut p = self.head.params.clone();
        p.extend_from_slice(self.encoder.params());
        p
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        let h = self.head.params.len();
        let e = self.encoder.params().len();
        if params.len() != h + e {
            return Err(Error::validation("params", format!("expected {} values, got {}", h + e, params.len())));
        }
        self.head.params.copy_from_slice(&params[..h]);
        self.encoder.params_mut().copy_from_slice(&params[h..]);
        Ok(())
    }

    pub fn state(&self) -> ModelState {
        ModelState {
            kind: self.kind,
            encoder: self.encoder.spec(),
            encoder_params: self.encoder.params().to_vec(),
            head: self.head.clone(),
            threshold: self.threshold,
        }
    }

    pub fn from_state(state: &ModelState) -> Result<Self> {
        let mut encoder = state.encoder.build(0)?;
        if encoder.params().len() != state.encoder_params.len() {
            return Err(Error::validation("encoder_params", "parameter count does not match the encoder"));
        }
        encoder.params_mut().copy_from_slice(&state.encoder_params);
        let mut model = FactualityModel {
            kind: state.kind,
            encoder,
            head: state.head.clone(),
            threshold: DEFAULT_THRESHOLD,
        };
        model.set_threshold(state.threshold)?;
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let json = serde_json::to_string(&self.state()).expect("model state serializes");
        std::fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let state: ModelState = serde_json::from_str(&text).map_err(|e| Error::parse(e.line(), e.to_string()))?;
        Self::from_state(&state)
    }

    /// P(Factual) for each arc of the summary.
    pub fn arc_factual_probs(&self, document: &Document, summary: &SummarySentence) -> Result<Vec<f64>> {
        self.require_arc_level()?;
        if summary.parse.is_empty() {
            return Ok(Vec::new());
        }
        let enc = self.encoder.encode(&document.tokens, &summary.tokens)?;
        summary
            .parse
            .arcs()
            .iter()
            .map(|a| self.head.prob_factual(&concat(&enc.tokens[a.head], &enc.tokens[a.child])))
            .collect()
    }

    /// Sentence-model P(Factual) from the pooled vector.
    pub fn sentence_factual_prob(&self, document: &Document, summary: &SummarySentence) -> Result<f64> {
        if self.kind != ModelKind::Sent {
            return Err(Error::validation("kind", "pooled scoring needs a sentence model"));
        }
        let enc = self.encoder.encode(&document.tokens, &summary.tokens)?;
        self.head.prob_factual(&enc.pooled)
    }

    /// Independent per-arc P(NonFactual).
    pub fn predict_arcs(&self, document: &Document, summary: &SummarySentence) -> Result<Vec<f64>> {
        Ok(self
            .arc_factual_probs(document, summary)?
            .into_iter()
            .map(|p| 1.0 - p)
            .collect())
    }

    pub fn predict_sentence(&self, document: &Document, summary: &SummarySentence) -> Result<SentencePrediction> {
        self.predict_sentence_at(document, summary, self.threshold)
    }

    pub fn predict_sentence_at(
        &self,
        document: &Document,
        summary: &SummarySentence,
        threshold: f64,
    ) -> Result<SentencePrediction> {
        let score = match self.kind {
            ModelKind::Sent => 1.0 - self.sentence_factual_prob(document, summary)?,
            _ => self.predict_arcs(document, summary)?.into_iter().fold(0.0, f64::max),
        };
        Ok(SentencePrediction {
            label: Label::from_nonfactual(score > threshold),
            score,
        })
    }

    fn require_arc_level(&self) -> Result<()> {
        if self.kind.is_arc_level() {
            Ok(())
        } else {
            Err(Error::validation("kind", "arc predictions need a dae or dae-weak model"))
        }
    }

    /// Loss of one example and its gradient over [`params`](Self::params).
    /// With `encoder_grad` unset the encoder part of the gradient stays zero.
    pub fn loss_and_grad(
        &self,
        document: &Document,
        summary: &SummarySentence,
        target: &Target,
        encoder_grad: bool,
    ) -> Result<(f64, Vec<f64>)> {
        let h = self.head.params.len();
        let mut grad = vec![0.0; h + self.encoder.params().len()];
        let enc = self.encoder.encode(&document.tokens, &summary.tokens)?;
        let d = self.encoder.dim();
        let mut grad_pooled = vec![0.0; d];
        let mut grad_tokens = vec![vec![0.0; d]; summary.tokens.len()];
        let loss = match (self.kind, target) {
            (ModelKind::Sent, Target::Sentence(label)) => {
                let cache = self.head.forward(&enc.pooled)?;
                let (loss, dp) = sent_loss_grad(cache.probs[0], *label)?;
                grad_pooled = self.head.backward(&enc.pooled, &cache, dp, &mut grad[..h]);
                loss
            }
            (ModelKind::Dae, Target::Arcs(_)) | (ModelKind::DaeWeak, Target::Weak(_)) => {
                let arcs = summary.parse.arcs();
                let inputs: Vec<Vec<f64>> = arcs
                    .iter()
                    .map(|a| concat(&enc.tokens[a.head], &enc.tokens[a.child]))
                    .collect();
                let caches = inputs
                    .iter()
                    .map(|x| self.head.forward(x))
                    .collect::<Result<Vec<_>>>()?;
                let probs: Vec<f64> = caches.iter().map(|c| c.probs[0]).collect();
                let (loss, dps) = match target {
                    Target::Arcs(labels) => dae_loss_grad(&probs, labels)?,
                    Target::Weak(c) => dae_weak_loss_grad(&probs, c)?,
                    Target::Sentence(_) => unreachable!(),
                };
                for ((arc, x), (cache, dp)) in arcs.iter().zip(&inputs).zip(caches.iter().zip(&dps)) {
                    if *dp == 0.0 {
                        continue;
                    }
                    let dx = self.head.backward(x, cache, *dp, &mut grad[..h]);
                    for r in 0..d {
                        grad_tokens[arc.head][r] += dx[r];
                        grad_tokens[arc.child][r] += dx[d + r];
                    }
                }
                loss
            }
            (kind, _) => {
                return Err(Error::validation("target", format!("supervision does not match a {kind} model")));
            }
        };
        if encoder_grad {
            self.encoder
                .backward(&document.tokens, &summary.tokens, &grad_pooled, &grad_tokens, &mut grad[h..])?;
        }
        Ok((loss, grad))
    }

    pub fn loss(&self, document: &Document, summary: &SummarySentence, target: &Target) -> Result<f64> {
        Ok(self.loss_and_grad(document, summary, target, false)?.0)
    }
}

impl ArcScorer for FactualityModel {
    fn arc_nonfactual_probs(&self, document: &Document, summary: &SummarySentence) -> Result<Vec<f64>> {
        self.predict_arcs(document, summary)
    }

    fn threshold(&self) -> f64 {
        self.threshold
    }
}

/// Scores every arc with the sentence model's P(NonFactual): the only
/// localization a sentence-level classifier can offer.
pub struct SentenceBroadcast<'a>(pub &'a FactualityModel);

impl ArcScorer for SentenceBroadcast<'_> {
    fn arc_nonfactual_probs(&self, document: &Document, summary: &SummarySentence) -> Result<Vec<f64>> {
        let p = 1.0 - self.0.sentence_factual_prob(document, summary)?;
        Ok(vec![p; summary.parse.len()])
    }

    fn threshold(&self) -> f64 {
        self.0.threshold
    }
}

/// Arc decisions at `threshold` (strictly above means non-factual) and the
/// word mask they imply.
pub fn localize_at(
    scorer: &dyn ArcScorer,
    document: &Document,
    summary: &SummarySentence,
    threshold: f64,
) -> Result<(Vec<Label>, Vec<bool>)> {
    let labels: Vec<Label> = scorer
        .arc_nonfactual_probs(document, summary)?
        .into_iter()
        .map(|p| Label::from_nonfactual(p > threshold))
        .collect();
    let mask = arcs_to_words(&summary.parse, &labels)?;
    Ok((labels, mask))
}

pub fn localize(scorer: &dyn ArcScorer, document: &Document, summary: &SummarySentence) -> Result<(Vec<Label>, Vec<bool>)> {
    localize_at(scorer, document, summary, scorer.threshold())
}

fn concat(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut v = Vec::with_capacity(a.len() + b.len());
    v.extend_from_slice(a);
    v.extend_from_slice(b);
    v
}

use rand::seq::SliceRandom;

use crate::data::{AnnotatedExample, Label};
use crate::error::{Error, Result};
use crate::eval::balanced_accuracy;
use crate::rng::{child_rng, child_seed};

use super::encoder::EncoderSpec;
use super::model::{FactualityModel, ModelKind, ModelState, Target};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub lr: f64,
    pub batch: usize,
    pub epochs: usize,
    /// Stop after this many optimizer steps, if reached before the last epoch ends.
    pub max_steps: Option<usize>,
    pub eval_every: usize,
    pub freeze_encoder: bool,
    pub hidden: Option<usize>,
    pub grad_clip: f64,
    pub weight_decay: f64,
    pub warmup_steps: usize,
    pub threshold: f64,
    pub encoder: EncoderSpec,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lr: 2e-5,
            batch: 8,
            epochs: 3,
            max_steps: None,
            eval_every: 100,
            freeze_encoder: false,
            hidden: None,
            grad_clip: 1.0,
            weight_decay: 0.0,
            warmup_steps: 0,
            threshold: 0.5,
            encoder: EncoderSpec::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, message: &str| Err(Error::validation(key, message));
        if !(self.lr > 0.0) {
            return bad("lr", "must be positive");
        }
        if self.batch == 0 {
            return bad("batch", "must be positive");
        }
        if self.eval_every == 0 {
            return bad("eval_every", "must be positive");
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return bad("threshold", "must lie in (0, 1)");
        }
        if !(self.grad_clip > 0.0) {
            return bad("grad_clip", "must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Checkpoint {
    pub step: usize,
    pub dev_balanced_accuracy: f64,
    pub state: ModelState,
}

#[derive(Debug)]
pub struct TrainOutcome {
    /// The checkpoint with the best dev balanced accuracy (earliest on ties).
    pub model: FactualityModel,
    pub best_step: usize,
    pub checkpoints: Vec<Checkpoint>,
    pub steps: usize,
    /// Weakly supervised examples whose constraints cannot be satisfied.
    pub dropped_infeasible: usize,
    /// Examples without arcs, which carry no arc-level signal.
    pub skipped_arcless: usize,
}

impl TrainOutcome {
    pub fn best_dev(&self) -> f64 {
        self.checkpoints
            .iter()
            .find(|c| c.step == self.best_step)
            .map(|c| c.dev_balanced_accuracy)
            .unwrap_or(f64::NAN)
    }

    /// `(step, dev balanced accuracy)` for every evaluated checkpoint.
    pub fn curve(&self) -> Vec<(usize, f64)> {
        self.checkpoints
            .iter()
            .map(|c| (c.step, c.dev_balanced_accuracy))
            .collect()
    }
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    const B1: f64 = 0.9;
    const B2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(n: usize) -> Self {
        Adam {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64, weight_decay: f64, limit: usize) {
        self.t += 1;
        let c1 = 1.0 - Self::B1.powi(self.t);
        let c2 = 1.0 - Self::B2.powi(self.t);
        for i in 0..limit {
            let g = grad[i];
            self.m[i] = Self::B1 * self.m[i] + (1.0 - Self::B1) * g;
            self.v[i] = Self::B2 * self.v[i] + (1.0 - Self::B2) * g * g;
            let update = (self.m[i] / c1) / ((self.v[i] / c2).sqrt() + Self::EPS);
            params[i] -= lr * (update + weight_decay * params[i]);
        }
    }
}

fn scheduled_lr(config: &TrainConfig, step: usize, total: usize) -> f64 {
    let warm = config.warmup_steps;
    if step < warm {
        return config.lr * (step + 1) as f64 / warm as f64;
    }
    let remaining = total.saturating_sub(step) as f64;
    let span = total.saturating_sub(warm).max(1) as f64;
    config.lr * remaining / span
}

/// Sentence-level balanced accuracy of `model` on `dev`.
pub fn dev_balanced_accuracy(model: &FactualityModel, dev: &[AnnotatedExample]) -> Result<f64> {
    let gold: Vec<Label> = dev.iter().map(|e| e.labels.sentence_label).collect();
    let pred = dev
        .iter()
        .map(|e| model.predict_sentence(&e.document, &e.summary).map(|p| p.label))
        .collect::<Result<Vec<_>>>()?;
    balanced_accuracy(&gold, &pred)
}

/// Train a fresh model of `kind`. The initialization, example order and every
/// other random choice derive from `seed`.
pub fn train(
    kind: ModelKind,
    train_set: &[AnnotatedExample],
    dev: &[AnnotatedExample],
    config: &TrainConfig,
    seed: u64,
) -> Result<TrainOutcome> {
    config.validate()?;
    let mut model = FactualityModel::initialize(kind, &config.encoder, config.hidden, seed)?;
    model.set_threshold(config.threshold)?;
    train_from(model, train_set, dev, config, seed)
}

/// Continue training an existing model.
pub fn train_from(
    mut model: FactualityModel,
    train_set: &[AnnotatedExample],
    dev: &[AnnotatedExample],
    config: &TrainConfig,
    seed: u64,
) -> Result<TrainOutcome> {
    config.validate()?;
    let kind = model.kind();
    if dev.is_empty() {
        return Err(Error::validation("dev", "dev set is empty"));
    }
    let dev_classes: std::collections::BTreeSet<Label> = dev.iter().map(|e| e.labels.sentence_label).collect();
    if dev_classes.len() < 2 {
        return Err(Error::UndefinedMetric(
            "dev set has a single class; balanced accuracy cannot select checkpoints".into(),
        ));
    }

    let mut items = Vec::new();
    let mut dropped_infeasible = 0;
    let mut skipped_arcless = 0;
    for ex in train_set {
        if kind.is_arc_level() && ex.summary.parse.is_empty() {
            skipped_arcless += 1;
            continue;
        }
        match Target::for_example(kind, ex) {
            Ok(t) => items.push((ex, t)),
            Err(Error::Infeasible(msg)) => {
                log::debug!("dropping {msg}");
                dropped_infeasible += 1;
            }
            Err(e) => return Err(e),
        }
    }
    if dropped_infeasible > 0 {
        log::warn!("dropped {dropped_infeasible} examples with infeasible weak constraints");
    }

    let per_epoch = items.len().div_ceil(config.batch);
    let mut total = per_epoch * config.epochs;
    if let Some(max) = config.max_steps {
        total = total.min(max);
    }

    let mut checkpoints = Vec::new();
    let mut evaluate = |model: &FactualityModel, step: usize| -> Result<()> {
        let metric = dev_balanced_accuracy(model, dev)?;
        log::info!("step {step}: dev balanced accuracy {metric:.4}");
        checkpoints.push(Checkpoint {
            step,
            dev_balanced_accuracy: metric,
            state: model.state(),
        });
        Ok(())
    };
    evaluate(&model, 0)?;

    let head_len = model.head_param_count();
    let mut params = model.params();
    let limit = if config.freeze_encoder { head_len } else { params.len() };
    let mut adam = Adam::new(params.len());
    let mut step = 0;
    let mut order: Vec<usize> = (0..items.len()).collect();
    'epochs: for epoch in 0..config.epochs {
        order.sort_unstable();
        order.shuffle(&mut child_rng(seed, &["shuffle", &epoch.to_string()]));
        for batch in order.chunks(config.batch) {
            if step >= total {
                break 'epochs;
            }
            let mut grad = vec![0.0; params.len()];
            for &i in batch {
                let (ex, target) = &items[i];
                let (_, g) = model.loss_and_grad(&ex.document, &ex.summary, target, !config.freeze_encoder)?;
                for (acc, x) in grad.iter_mut().zip(g) {
                    *acc += x;
                }
            }
            let scale = 1.0 / batch.len() as f64;
            grad.iter_mut().for_each(|g| *g *= scale);
            let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            if norm > config.grad_clip {
                let s = config.grad_clip / norm;
                grad.iter_mut().for_each(|g| *g *= s);
            }
            adam.step(&mut params, &grad, scheduled_lr(config, step, total), config.weight_decay, limit);
            model.set_params(&params)?;
            step += 1;
            if step % config.eval_every == 0 && step < total {
                evaluate(&model, step)?;
            }
        }
    }
    if step > 0 {
        evaluate(&model, step)?;
    }

    let best = checkpoints
        .iter()
        .fold(None::<&Checkpoint>, |best, c| match best {
            Some(b) if b.dev_balanced_accuracy >= c.dev_balanced_accuracy => Some(b),
            _ => Some(c),
        })
        .expect("step 0 is always evaluated");
    let best_step = best.step;
    let model = FactualityModel::from_state(&best.state)?;
    Ok(TrainOutcome {
        model,
        best_step,
        checkpoints,
        steps: step,
        dropped_infeasible,
        skipped_arcless,
    })
}

/// Train `runs` independently seeded models; returns every outcome and the
/// mean best dev balanced accuracy.
pub fn train_averaged(
    kind: ModelKind,
    train_set: &[AnnotatedExample],
    dev: &[AnnotatedExample],
    config: &TrainConfig,
    seed: u64,
    runs: usize,
) -> Result<(Vec<TrainOutcome>, f64)> {
    if runs == 0 {
        return Err(Error::validation("seeds", "at least one run is required"));
    }
    let outcomes = (0..runs)
        .map(|r| {
            let run_seed = if r == 0 { seed } else { child_seed(seed, &["run", &r.to_string()]) };
            train(kind, train_set, dev, config, run_seed)
        })
        .collect::<Result<Vec<_>>>()?;
    let mean = outcomes.iter().map(TrainOutcome::best_dev).sum::<f64>() / runs as f64;
    Ok((outcomes, mean))
}

//! Factuality classifiers over a pluggable encoder: a sentence-level model,
//! an arc-level model trained on arc labels, and an arc-level model trained
//! from sentence labels through a marginal-likelihood objective.

mod encoder;
mod gradcheck;
mod head;
mod loss;
mod model;
mod train;
mod weak;

pub use encoder::{
    adjacent_pairs, truncate_document, unordered as unordered_pair, CommandEncoder, EncoderProvider, EncoderSpec, Encoding, MockEncoder,
    DEFAULT_BUCKETS, DEFAULT_DIM, DEFAULT_MAX_SEQ,
};
pub use gradcheck::{gradient_check, GradCheck};
pub use head::{softmax2, ClassifierHead, HeadCache};
pub use loss::{
    dae_loss, dae_loss_grad, dae_weak_loss, dae_weak_loss_grad, log1mexp, sent_loss, sent_loss_grad, CLAMP_EPS,
};
pub use model::{
    localize, localize_at, ArcScorer, FactualityModel, ModelKind, ModelState, SentenceBroadcast, SentencePrediction,
    Target, DEFAULT_THRESHOLD,
};
pub use train::{dev_balanced_accuracy, train, train_averaged, train_from, Checkpoint, TrainConfig, TrainOutcome};
pub use weak::{build_weak_constraints, source_pairs, WeakConstraintSet};

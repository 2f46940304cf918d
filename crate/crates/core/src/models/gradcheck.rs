use rand::Rng;

use crate::data::{Document, SummarySentence};
use crate::error::Result;

use super::model::{FactualityModel, Target};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheck {
    /// `|analytic - numeric| / max(|analytic| + |numeric|, 1e-12)`, norm-wise.
    pub relative_error: f64,
    pub checked: usize,
}

/// Compare analytic gradients with central finite differences.
///
/// Checks every head parameter, every encoder parameter with a nonzero
/// analytic gradient (capped at `max_encoder` by random sampling) and a few
/// zero-gradient encoder parameters, which must also come out numerically zero.
pub fn gradient_check<R: Rng>(
    model: &mut FactualityModel,
    document: &Document,
    summary: &SummarySentence,
    target: &Target,
    step: f64,
    max_encoder: usize,
    rng: &mut R,
) -> Result<GradCheck> {
    let (_, analytic) = model.loss_and_grad(document, summary, target, true)?;
    let head = model.head_param_count();
    let mut idx: Vec<usize> = (0..head).collect();
    let (active, inactive): (Vec<usize>, Vec<usize>) = (head..analytic.len()).partition(|&i| analytic[i] != 0.0);
    idx.extend(sample(&active, max_encoder, rng));
    idx.extend(sample(&inactive, 5, rng));

    let base = model.params();
    let mut params = base.clone();
    let (mut diff, mut scale) = (0.0, 0.0);
    for &i in &idx {
        params[i] = base[i] + step;
        model.set_params(&params)?;
        let plus = model.loss(document, summary, target)?;
        params[i] = base[i] - step;
        model.set_params(&params)?;
        let minus = model.loss(document, summary, target)?;
        params[i] = base[i];
        let numeric = (plus - minus) / (2.0 * step);
        diff += (analytic[i] - numeric).powi(2);
        scale += analytic[i].powi(2) + numeric.powi(2);
    }
    model.set_params(&base)?;
    let relative_error = diff.sqrt() / scale.sqrt().max(1e-12);
    Ok(GradCheck {
        relative_error,
        checked: idx.len(),
    })
}

fn sample<R: Rng>(pool: &[usize], k: usize, rng: &mut R) -> Vec<usize> {
    rand::seq::index::sample(rng, pool.len(), k.min(pool.len()))
        .into_iter()
        .map(|i| pool[i])
        .collect()
}

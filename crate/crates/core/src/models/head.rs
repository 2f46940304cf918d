use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::child_rng;

/// Two-way classifier: affine map (optionally through one tanh hidden layer)
/// followed by softmax. Output index 0 is `Factual`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierHead {
    pub input: usize,
    pub hidden: Option<usize>,
    /// Layout: `[W1 (h x in), b1 (h)]` when hidden, then `[W (2 x h|in), b (2)]`.
    pub params: Vec<f64>,
}

/// Intermediate values of a forward pass, reused by `backward`.
#[derive(Debug, Clone)]
pub struct HeadCache {
    hidden: Option<Vec<f64>>,
    pub logits: [f64; 2],
    pub probs: [f64; 2],
}

pub fn softmax2(z: [f64; 2]) -> [f64; 2] {
    let m = z[0].max(z[1]);
    let e0 = (z[0] - m).exp();
    let e1 = (z[1] - m).exp();
    let s = e0 + e1;
    [e0 / s, e1 / s]
}

impl ClassifierHead {
    pub fn new(input: usize, hidden: Option<usize>, seed: u64) -> Result<Self> {
        if input == 0 || hidden == Some(0) {
            return Err(Error::validation("head", "layer sizes must be positive"));
        }
        let mut rng = child_rng(seed, &["head"]);
        let mut params = Vec::new();
        let out_in = match hidden {
            Some(h) => {
                let normal = Normal::new(0.0, 1.0 / (input as f64).sqrt()).expect("valid normal");
                params.extend((0..h * input).map(|_| normal.sample(&mut rng)));
                params.extend(std::iter::repeat_n(0.0, h));
                h
            }
            None => input,
        };
        let normal = Normal::new(0.0, 0.1).expect("valid normal");
        params.extend((0..2 * out_in).map(|_| normal.sample(&mut rng)));
        params.extend([0.0, 0.0]);
        Ok(ClassifierHead { input, hidden, params })
    }

    fn out_in(&self) -> usize {
        self.hidden.unwrap_or(self.input)
    }

    fn out_offset(&self) -> usize {
        self.hidden.map_or(0, |h| h * self.input + h)
    }

    pub fn forward(&self, x: &[f64]) -> Result<HeadCache> {
        if x.len() != self.input {
            return Err(Error::validation(
                "head",
                format!("expected {} inputs, got {}", self.input, x.len()),
            ));
        }
        let hidden = self.hidden.map(|h| {
            let w = &self.params[..h * self.input];
            let b = &self.params[h * self.input..h * self.input + h];
            (0..h)
                .map(|r| (dot(&w[r * self.input..(r + 1) * self.input], x) + b[r]).tanh())
                .collect::<Vec<_>>()
        });
        let z_in = hidden.as_deref().unwrap_or(x);
        let k = self.out_in();
        let off = self.out_offset();
        let w = &self.params[off..off + 2 * k];
        let b = &self.params[off + 2 * k..off + 2 * k + 2];
        let logits = [dot(&w[..k], z_in) + b[0], dot(&w[k..], z_in) + b[1]];
        Ok(HeadCache {
            hidden,
            logits,
            probs: softmax2(logits),
        })
    }

    /// P(Factual) for one input.
    pub fn prob_factual(&self, x: &[f64]) -> Result<f64> {
        Ok(self.forward(x)?.probs[0])
    }

    /// Backpropagate d(loss)/d(P(Factual)). Parameter gradients are added to
    /// `grad`; the input gradient is returned.
    pub fn backward(&self, x: &[f64], cache: &HeadCache, dloss_dp: f64, grad: &mut [f64]) -> Vec<f64> {
        let p = cache.probs[0];
        // P(Factual) = sigmoid(z0 - z1)
        let dz0 = dloss_dp * p * (1.0 - p);
        let dz = [dz0, -dz0];
        let k = self.out_in();
        let off = self.out_offset();
        let z_in = cache.hidden.as_deref().unwrap_or(x);
        for c in 0..2 {
            for j in 0..k {
                grad[off + c * k + j] += dz[c] * z_in[j];
            }
            grad[off + 2 * k + c] += dz[c];
        }
        let w = &self.params[off..off + 2 * k];
        let dz_in: Vec<f64> = (0..k).map(|j| dz[0] * w[j] + dz[1] * w[k + j]).collect();
        match (self.hidden, &cache.hidden) {
            (Some(h), Some(hv)) => {
                let w1 = &self.params[..h * self.input];
                let mut dx = vec![0.0; self.input];
                for r in 0..h {
                    let da = dz_in[r] * (1.0 - hv[r] * hv[r]);
                    for j in 0..self.input {
                        grad[r * self.input + j] += da * x[j];
                        dx[j] += da * w1[r * self.input + j];
                    }
                    grad[h * self.input + r] += da;
                }
                dx
            }
            _ => dz_in,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

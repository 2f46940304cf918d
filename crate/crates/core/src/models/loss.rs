//! Training objectives over per-unit P(Factual). Every log argument is clamped
//! to `[CLAMP_EPS, 1 - CLAMP_EPS]`; gradients are zero where the clamp is active.

use crate::data::Label;
use crate::error::{Error, Result};

use super::weak::WeakConstraintSet;

pub const CLAMP_EPS: f64 = 1e-7;

fn clamp(p: f64) -> f64 {
    p.clamp(CLAMP_EPS, 1.0 - CLAMP_EPS)
}

fn clamped(p: f64) -> bool {
    !(CLAMP_EPS..=1.0 - CLAMP_EPS).contains(&p)
}

fn check_probs(probs: &[f64]) -> Result<()> {
    match probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        Some(p) => Err(Error::validation("probs", format!("{p} is not a probability"))),
        None => Ok(()),
    }
}

/// `ln(1 - exp(x))` for `x < 0`, accurate at both ends.
pub fn log1mexp(x: f64) -> f64 {
    if x > -std::f64::consts::LN_2 {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

/// NLL of one label given P(Factual), and its derivative in `p`.
fn nll(p: f64, gold: Label) -> (f64, f64) {
    let q = clamp(p);
    let live = !clamped(p);
    match gold {
        Label::Factual => (-q.ln(), if live { -1.0 / q } else { 0.0 }),
        Label::NonFactual => (-(1.0 - q).ln(), if live { 1.0 / (1.0 - q) } else { 0.0 }),
    }
}

/// Mean arc NLL and its gradient with respect to each P(Factual).
pub fn dae_loss_grad(probs: &[f64], labels: &[Label]) -> Result<(f64, Vec<f64>)> {
    if probs.len() != labels.len() {
        return Err(Error::validation(
            "arc_labels",
            format!("{} probabilities for {} labels", probs.len(), labels.len()),
        ));
    }
    if probs.is_empty() {
        return Err(Error::validation("arc_labels", "no arcs"));
    }
    check_probs(probs)?;
    let n = probs.len() as f64;
    let mut loss = 0.0;
    let mut grad = Vec::with_capacity(probs.len());
    for (&p, &y) in probs.iter().zip(labels) {
        let (l, g) = nll(p, y);
        loss += l;
        grad.push(g / n);
    }
    Ok((loss / n, grad))
}

pub fn dae_loss(probs: &[f64], labels: &[Label]) -> Result<f64> {
    Ok(dae_loss_grad(probs, labels)?.0)
}

/// Negative marginal log-likelihood of all labelings consistent with the
/// constraints: every arc in `F` factual and, for a non-factual sentence, at
/// least one free arc non-factual.
pub fn dae_weak_loss_grad(probs: &[f64], constraints: &WeakConstraintSet) -> Result<(f64, Vec<f64>)> {
    if probs.len() != constraints.arc_count() {
        return Err(Error::validation(
            "probs",
            format!("{} probabilities for {} arcs", probs.len(), constraints.arc_count()),
        ));
    }
    check_probs(probs)?;
    let mut grad = vec![0.0; probs.len()];
    let mut loss = 0.0;
    for &a in &constraints.factual {
        let (l, g) = nll(probs[a], Label::Factual);
        loss += l;
        grad[a] = g;
    }
    if constraints.requires_error {
        if constraints.free.is_empty() {
            return Err(Error::Infeasible(
                "non-factual sentence whose arcs all occur in the source".into(),
            ));
        }
        // S = sum of log p over free arcs; term = -log(1 - exp(S))
        let s: f64 = constraints.free.iter().map(|&a| clamp(probs[a]).ln()).sum();
        loss -= log1mexp(s);
        // d/dp_a = exp(S) / (1 - exp(S)) / p_a = 1 / (expm1(-S) p_a)
        let ratio = 1.0 / (-s).exp_m1();
        for &a in &constraints.free {
            if !clamped(probs[a]) {
                grad[a] = ratio / clamp(probs[a]);
            }
        }
    }
    Ok((loss, grad))
}

pub fn dae_weak_loss(probs: &[f64], constraints: &WeakConstraintSet) -> Result<f64> {
    Ok(dae_weak_loss_grad(probs, constraints)?.0)
}

/// Sentence NLL and its derivative with respect to P(Factual).
pub fn sent_loss_grad(prob_factual: f64, gold: Label) -> Result<(f64, f64)> {
    check_probs(&[prob_factual])?;
    Ok(nll(prob_factual, gold))
}

pub fn sent_loss(prob_factual: f64, gold: Label) -> Result<f64> {
    Ok(sent_loss_grad(prob_factual, gold)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use Label::{Factual as F, NonFactual as N};

    fn weak(n: usize, factual: &[usize], requires_error: bool) -> WeakConstraintSet {
        WeakConstraintSet::new(n, factual.to_vec(), requires_error).unwrap()
    }

    #[test]
    fn dae_loss_values() {
        assert!(dae_loss(&[1.0, 1.0], &[F, F]).unwrap() < 1e-6);
        assert!((dae_loss(&[0.5], &[F]).unwrap() - 2f64.ln()).abs() < 1e-12);
        let expected = -(0.9f64.ln() + 0.8f64.ln()) / 2.0;
        assert!((dae_loss(&[0.9, 0.2], &[F, N]).unwrap() - expected).abs() < 1e-12);
        assert!(dae_loss(&[0.5], &[F, F]).is_err());
        assert!(dae_loss(&[1.5], &[F]).is_err());
    }

    #[test]
    fn dae_weak_loss_values() {
        assert!(dae_weak_loss(&[1.0, 1.0, 1.0], &weak(3, &[0, 1, 2], false)).unwrap() < 1e-6);
        let one_free = dae_weak_loss(&[0.5], &weak(1, &[], true)).unwrap();
        assert!((one_free - 2f64.ln()).abs() < 1e-12);
        let mixed = dae_weak_loss(&[0.8, 0.6], &weak(2, &[0], true)).unwrap();
        assert!((mixed - (-(0.8f64.ln()) - 0.4f64.ln())).abs() < 1e-12);
        let err = dae_weak_loss(&[0.5, 0.5], &weak(2, &[0, 1], true)).unwrap_err();
        assert!(matches!(err, Error::Infeasible(_)));
    }

    #[test]
    fn weak_free_product_does_not_underflow() {
        let probs = vec![0.999_999; 2000];
        let loss = dae_weak_loss(&probs, &weak(2000, &[], true)).unwrap();
        assert!(loss.is_finite());
        let small = vec![1e-3; 200];
        assert!(dae_weak_loss(&small, &weak(200, &[], true)).unwrap().abs() < 1e-12);
    }

    #[test]
    fn sent_loss_values() {
        assert!(sent_loss(1.0, F).unwrap() < 1e-6);
        assert!((sent_loss(0.5, F).unwrap() - 2f64.ln()).abs() < 1e-12);
        assert!((sent_loss(0.5, N).unwrap() - 2f64.ln()).abs() < 1e-12);
        assert!((sent_loss(0.25, N).unwrap() + 0.75f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn log1mexp_matches_naive_in_safe_range() {
        for x in [-0.01, -0.5, -1.0, -5.0] {
            let naive = (1.0 - f64::exp(x)).ln();
            assert!((log1mexp(x) - naive).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn weak_reduces_to_all_factual_dae(probs in proptest::collection::vec(0.01f64..0.99, 1..8)) {
            let n = probs.len();
            let all: Vec<usize> = (0..n).collect();
            let w = dae_weak_loss(&probs, &weak(n, &all, false)).unwrap();
            let sum_nll: f64 = probs.iter().map(|p| -p.ln()).sum();
            let d = dae_loss(&probs, &vec![F; n]).unwrap() * n as f64;
            prop_assert!((w - sum_nll).abs() < 1e-9);
            prop_assert!((w - d).abs() < 1e-9);
        }

        #[test]
        fn weak_monotonicity(
            probs in proptest::collection::vec(0.05f64..0.9, 2..7),
            split in 0usize..7,
            which in 0usize..7,
        ) {
            let n = probs.len();
            let k = split % n;
            let factual: Vec<usize> = (0..k).collect();
            let c = weak(n, &factual, true);
            let a = which % n;
            let base = dae_weak_loss(&probs, &c).unwrap();
            let mut up = probs.clone();
            up[a] += 0.05;
            let moved = dae_weak_loss(&up, &c).unwrap();
            if a < k {
                prop_assert!(moved < base);
            } else {
                prop_assert!(moved > base);
            }
        }
    }
}

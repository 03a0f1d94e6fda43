//! Decoders, losses and evaluation metrics.

use crate::error::{Error, Result};
use crate::manifold::{sq_lorentz_distance, HyperPoint};
use crate::real::Real;

/// Probabilities are kept this far from 0 and 1 inside the log-loss.
pub const PROB_CLAMP: f64 = 1e-7;

/// `1/(e^{(d² − r)/t} + 1)`, written as `sigmoid((r − d²)/t)`.
pub fn fermi_dirac<S: Real>(sq_dist: S, r: f64, t: f64) -> S {
    ((-sq_dist + r) / t).sigmoid()
}

/// Edge probability from the squared Lorentzian distance of two embeddings.
pub fn fermi_dirac_score(u: &HyperPoint, v: &HyperPoint, r: f64, t: f64) -> f64 {
    assert!(t > 0.0, "temperature must be positive");
    fermi_dirac(sq_lorentz_distance(u, v), r, t)
}

/// `−ln p` for positives and `−ln(1 − p)` for negatives, with `p` clamped
/// to `[1e−7, 1 − 1e−7]`.
pub fn binary_cross_entropy<S: Real>(p: S, positive: bool) -> S {
    let p = p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
    if positive {
        -p.ln()
    } else {
        -((-p + 1.0).ln())
    }
}

/// `logsumexp(logits) − logits[label]`.
pub fn softmax_cross_entropy<S: Real>(logits: &[S], label: usize) -> S {
    assert!(label < logits.len(), "label {label} out of range for {} classes", logits.len());
    let mx = logits
        .iter()
        .map(|l| l.value())
        .fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<S> = logits.iter().map(|&l| (l - mx).exp()).collect();
    S::sum(&exps).ln() + mx - logits[label]
}

/// Mann-Whitney area under the ROC curve; tied scores earn half credit.
pub fn evaluate_auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    assert_eq!(scores.len(), labels.len(), "one label per score");
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::UndefinedMetric(
            "AUC needs both positive and negative examples".into(),
        ));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::NonFinite);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // average 1-based ranks over tie groups
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        let avg_rank = (i + 1 + j) as f64 / 2.0;
        rank_sum_pos += avg_rank * order[i..j].iter().filter(|&&k| labels[k]).count() as f64;
        i = j;
    }
    let np = n_pos as f64;
    Ok((rank_sum_pos - np * (np + 1.0) / 2.0) / (np * n_neg as f64))
}

pub fn accuracy(predicted: &[usize], labels: &[usize], nodes: &[usize]) -> Result<f64> {
    if nodes.is_empty() {
        return Err(Error::UndefinedMetric("accuracy over no nodes".into()));
    }
    let hits = nodes.iter().filter(|&&i| predicted[i] == labels[i]).count();
    Ok(hits as f64 / nodes.len() as f64)
}

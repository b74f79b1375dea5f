//! Evaluation metrics: rank-based AUC, confusion-matrix rates, MSPE.

use serde::Serialize;

use crate::error::{Error, Result};

/// Area under the ROC curve by the Mann-Whitney rank formulation with
/// midranks for ties. `scores` are class-1-ness scores (higher means more
/// likely class 1); `truth` holds labels in {0, 1}.
pub fn auc(scores: &[f64], truth: &[u8]) -> Result<f64> {
    if scores.is_empty() || scores.len() != truth.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} scores vs {} labels",
            scores.len(),
            truth.len()
        )));
    }
    let n1 = truth.iter().filter(|&&t| t == 1).count();
    let n0 = truth.len() - n1;
    if n0 == 0 || n1 == 0 {
        return Err(Error::SingleClass("AUC needs both classes".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).expect("non-NaN scores"));
    // midranks over tied groups
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let midrank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            if truth[idx] == 1 {
                rank_sum_pos += midrank;
            }
        }
        i = j + 1;
    }
    Ok((rank_sum_pos - n1 as f64 * (n1 as f64 + 1.0) / 2.0) / (n0 as f64 * n1 as f64))
}

/// Fraction of matching labels.
pub fn accuracy(predicted: &[u8], truth: &[u8]) -> Result<f64> {
    check_same_len(predicted, truth)?;
    let hits = predicted.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / truth.len() as f64)
}

/// Recall of class 1.
pub fn sensitivity(predicted: &[u8], truth: &[u8]) -> Result<f64> {
    check_same_len(predicted, truth)?;
    let pos = truth.iter().filter(|&&t| t == 1).count();
    if pos == 0 {
        return Err(Error::SingleClass("sensitivity needs class-1 instances".into()));
    }
    let tp = predicted.iter().zip(truth).filter(|(&p, &t)| t == 1 && p == 1).count();
    Ok(tp as f64 / pos as f64)
}

/// Recall of class 0.
pub fn specificity(predicted: &[u8], truth: &[u8]) -> Result<f64> {
    check_same_len(predicted, truth)?;
    let neg = truth.iter().filter(|&&t| t == 0).count();
    if neg == 0 {
        return Err(Error::SingleClass("specificity needs class-0 instances".into()));
    }
    let tn = predicted.iter().zip(truth).filter(|(&p, &t)| t == 0 && p == 0).count();
    Ok(tn as f64 / neg as f64)
}

/// Mean squared prediction error over a validation set.
pub fn mspe(predicted: &[f64], truth: &[f64]) -> Result<f64> {
    if predicted.is_empty() || predicted.len() != truth.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} predictions vs {} responses",
            predicted.len(),
            truth.len()
        )));
    }
    let s: f64 = predicted.iter().zip(truth).map(|(p, t)| (p - t) * (p - t)).sum();
    Ok(s / truth.len() as f64)
}

fn check_same_len(predicted: &[u8], truth: &[u8]) -> Result<()> {
    if predicted.is_empty() || predicted.len() != truth.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} predictions vs {} labels",
            predicted.len(),
            truth.len()
        )));
    }
    Ok(())
}

/// Flat classification report for JSON emission.
#[derive(Debug, Clone, Serialize)]
pub struct ClassificationMetrics {
    pub auc: f64,
    pub accuracy: f64,
    pub sensitivity: f64,
    pub specificity: f64,
}

impl ClassificationMetrics {
    pub fn compute(scores: &[f64], predicted: &[u8], truth: &[u8]) -> Result<Self> {
        Ok(ClassificationMetrics {
            auc: auc(scores, truth)?,
            accuracy: accuracy(predicted, truth)?,
            sensitivity: sensitivity(predicted, truth)?,
            specificity: specificity(predicted, truth)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn auc_hand_case() {
        // brute force over the 4 (pos, neg) pairs gives 3 concordant of 4
        let truth = [1u8, 1, 0, 0];
        let scores = [0.9, 0.4, 0.6, 0.1];
        assert_relative_eq!(auc(&scores, &truth).unwrap(), 0.75, epsilon = 1e-15);
    }

    #[test]
    fn auc_perfect_and_ties() {
        let truth = [0u8, 0, 1, 1];
        assert_relative_eq!(auc(&[0.1, 0.2, 0.8, 0.9], &truth).unwrap(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(auc(&[0.5, 0.5, 0.5, 0.5], &truth).unwrap(), 0.5, epsilon = 1e-15);
        assert!(matches!(auc(&[0.1, 0.2], &[1, 1]), Err(Error::SingleClass(_))));
    }

    #[test]
    fn confusion_rates() {
        let truth = [1u8, 1, 0, 0, 1];
        let pred = [1u8, 0, 0, 1, 1];
        assert_relative_eq!(accuracy(&pred, &truth).unwrap(), 0.6);
        assert_relative_eq!(sensitivity(&pred, &truth).unwrap(), 2.0 / 3.0);
        assert_relative_eq!(specificity(&pred, &truth).unwrap(), 0.5);
    }

    #[test]
    fn mspe_divisor_is_validation_size() {
        let v = mspe(&[1.0, 2.0, 3.0, 4.0], &[1.0, 2.0, 3.0, 2.0]).unwrap();
        assert_relative_eq!(v, 1.0);
    }
}

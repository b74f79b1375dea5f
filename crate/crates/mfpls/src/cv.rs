//! Cross-validated selection of the number of PLS components.

use rayon::prelude::*;

use crate::classify::encode;
use crate::error::{Error, Result};
use crate::fdata::FunctionalSample;
use crate::metrics;
use crate::pls::MfplsModel;
use crate::rng::{purpose, substream};

/// Tolerance within which a smaller component count is preferred.
pub const CV_TIE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CvCriterion {
    /// Mean squared error on the held-out fold (regression; minimized).
    Mse,
    /// Area under the ROC curve on the held-out fold (classification;
    /// maximized). The response must hold 0/1 labels; folds are stratified
    /// by class and the training labels are re-encoded per fold.
    Auc,
}

#[derive(Debug, Clone)]
pub struct CvConfig {
    pub h_grid: Vec<usize>,
    pub k_folds: usize,
    pub criterion: CvCriterion,
    pub seed: u64,
}

/// Per-candidate mean criterion and the selected component count.
/// `chosen_h` is 0 when no fold produced a usable fit.
#[derive(Debug, Clone)]
pub struct CvReport {
    /// (candidate h, mean criterion across folds); None when every fold
    /// failed to produce a value for that candidate.
    pub per_h: Vec<(usize, Option<f64>)>,
    pub chosen_h: usize,
    pub seed: u64,
}

/// Round-robin fold assignment of a shuffled index list.
fn deal_folds(order: &[usize], k: usize, fold_of: &mut [usize]) {
    for (pos, &idx) in order.iter().enumerate() {
        fold_of[idx] = pos % k;
    }
}

/// Fold id per observation; plain shuffle.
pub fn plain_folds(n: usize, k: usize, seed: u64) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut rng = substream(seed, 0, purpose::CV_FOLDS);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut fold_of = vec![0; n];
    deal_folds(&order, k, &mut fold_of);
    fold_of
}

/// Fold id per observation; classes shuffled and dealt separately so every
/// fold sees both classes in proportion.
pub fn stratified_folds(labels: &[u8], k: usize, seed: u64) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut rng = substream(seed, 0, purpose::CV_FOLDS);
    let mut fold_of = vec![0; labels.len()];
    for class in [0u8, 1u8] {
        let mut order: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        order.shuffle(&mut rng);
        deal_folds(&order, k, &mut fold_of);
    }
    fold_of
}

/// K-fold cross-validation over a grid of component counts. One model per
/// fold is fitted at the largest candidate; smaller candidates are evaluated
/// as truncations of it. Deterministic given the seed; folds may evaluate
/// concurrently and are reduced in fold order.
pub fn cross_validate(sample: &FunctionalSample, y: &[f64], cfg: &CvConfig) -> Result<CvReport> {
    let n = sample.n();
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!("{} observations vs {} responses", n, y.len())));
    }
    if cfg.k_folds < 2 {
        return Err(Error::Validation("k_folds must be at least 2".into()));
    }
    if n < cfg.k_folds {
        return Err(Error::InsufficientData(format!(
            "n = {n} smaller than k_folds = {}",
            cfg.k_folds
        )));
    }
    if cfg.h_grid.is_empty() || cfg.h_grid.contains(&0) {
        return Err(Error::Validation("h_grid must hold positive candidates".into()));
    }
    let labels: Option<Vec<u8>> = match cfg.criterion {
        CvCriterion::Auc => {
            let l = y
                .iter()
                .map(|&v| {
                    if v == 0.0 {
                        Ok(0u8)
                    } else if v == 1.0 {
                        Ok(1u8)
                    } else {
                        Err(Error::Validation(format!("AUC criterion needs 0/1 labels, got {v}")))
                    }
                })
                .collect::<Result<Vec<u8>>>()?;
            Some(l)
        }
        CvCriterion::Mse => None,
    };
    let fold_of = match &labels {
        Some(l) => stratified_folds(l, cfg.k_folds, cfg.seed),
        None => plain_folds(n, cfg.k_folds, cfg.seed),
    };
    let h_star = *cfg.h_grid.iter().max().unwrap();

    let fold_values: Vec<Vec<Option<f64>>> = (0..cfg.k_folds)
        .into_par_iter()
        .map(|fold| evaluate_fold(sample, y, labels.as_deref(), &fold_of, fold, h_star, cfg))
        .collect();

    // Reduce in fold order.
    let mut per_h = Vec::with_capacity(cfg.h_grid.len());
    for (hi, &h) in cfg.h_grid.iter().enumerate() {
        let vals: Vec<f64> = fold_values.iter().filter_map(|f| f[hi]).collect();
        let mean = if vals.is_empty() {
            None
        } else {
            Some(vals.iter().sum::<f64>() / vals.len() as f64)
        };
        per_h.push((h, mean));
    }

    let chosen_h = choose(&per_h, cfg.criterion);
    Ok(CvReport { per_h, chosen_h, seed: cfg.seed })
}

fn evaluate_fold(
    sample: &FunctionalSample,
    y: &[f64],
    labels: Option<&[u8]>,
    fold_of: &[usize],
    fold: usize,
    h_star: usize,
    cfg: &CvConfig,
) -> Vec<Option<f64>> {
    let n = sample.n();
    let train: Vec<usize> = (0..n).filter(|&i| fold_of[i] != fold).collect();
    let val: Vec<usize> = (0..n).filter(|&i| fold_of[i] == fold).collect();
    let none = vec![None; cfg.h_grid.len()];
    if val.is_empty() || train.len() < 2 {
        return none;
    }
    let train_sample = sample.subset(&train);
    let val_sample = sample.subset(&val);
    let train_y: Vec<f64> = train.iter().map(|&i| y[i]).collect();

    // For AUC the fold model regresses on the fold's own encoded labels.
    let fit_y: Vec<f64> = match labels {
        Some(l) => {
            let train_l: Vec<u8> = train.iter().map(|&i| l[i]).collect();
            match encode(&train_l) {
                Ok((enc, _)) => enc,
                Err(_) => return none,
            }
        }
        None => train_y.clone(),
    };

    let model = match MfplsModel::fit(&train_sample, &fit_y, h_star) {
        Ok(m) => m,
        Err(_) => return none,
    };

    // Distinct effective truncations, evaluated once each.
    let h_effs: Vec<usize> = cfg.h_grid.iter().map(|&h| h.min(model.n_components)).collect();
    let mut unique: Vec<usize> = h_effs.clone();
    unique.sort_unstable();
    unique.dedup();
    let preds = match model.predict_grid(&val_sample, &unique) {
        Ok(p) => p,
        Err(_) => return none,
    };
    let pred_of = |h_eff: usize| -> &Vec<f64> {
        let pos = unique.binary_search(&h_eff).unwrap();
        &preds[pos]
    };

    let mut out = Vec::with_capacity(cfg.h_grid.len());
    for &h_eff in &h_effs {
        let p = pred_of(h_eff);
        let value = match labels {
            None => {
                let val_y: Vec<f64> = val.iter().map(|&i| y[i]).collect();
                metrics::mspe(p, &val_y).ok()
            }
            Some(l) => {
                let val_l: Vec<u8> = val.iter().map(|&i| l[i]).collect();
                // higher Gamma means class 0; class-1-ness is -Gamma
                let scores: Vec<f64> = p.iter().map(|&g| -g).collect();
                metrics::auc(&scores, &val_l).ok()
            }
        };
        out.push(value);
    }
    out
}

fn choose(per_h: &[(usize, Option<f64>)], criterion: CvCriterion) -> usize {
    let best = per_h.iter().filter_map(|&(_, v)| v).fold(None, |acc: Option<f64>, v| {
        Some(match (acc, criterion) {
            (None, _) => v,
            (Some(a), CvCriterion::Mse) => a.min(v),
            (Some(a), CvCriterion::Auc) => a.max(v),
        })
    });
    let Some(best) = best else { return 0 };
    for &(h, v) in per_h {
        if let Some(v) = v {
            let within = match criterion {
                CvCriterion::Mse => v <= best + CV_TIE_TOL,
                CvCriterion::Auc => v >= best - CV_TIE_TOL,
            };
            if within {
                return h;
            }
        }
    }
    0
}

/// Cross-validate, then refit on the full data at the selected component
/// count. Errors with `ZeroCovariance` when no fold produced a usable fit.
pub fn fit_with_cv(
    sample: &FunctionalSample,
    y: &[f64],
    cfg: &CvConfig,
) -> Result<(MfplsModel, CvReport)> {
    let report = cross_validate(sample, y, cfg)?;
    if report.chosen_h == 0 {
        return Err(Error::ZeroCovariance("cross-validation found no usable component".into()));
    }
    let mut model = MfplsModel::fit(sample, y, report.chosen_h)?;
    model.cv_seed = Some(cfg.seed);
    Ok((model, report))
}

//! Binary PLS discriminant analysis: class-prior encoding of the label,
//! MFPLS regression on the encoded response, classification by the sign of
//! the resulting Fisher score.

use serde::{Deserialize, Serialize};

use crate::cv::{cross_validate, CvConfig, CvCriterion};
use crate::error::{Error, Result};
use crate::fdata::FunctionObject;
use crate::fdata::FunctionalSample;
use crate::pls::MfplsModel;

/// Two-point recoding of a binary label with class-prior-dependent values,
/// so the encoded response has zero training mean.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ClassEncoding {
    /// Training proportion of class 1.
    pub pi1: f64,
    /// Encoded value for class 0: sqrt(pi1 / pi0) (positive).
    pub value_for_0: f64,
    /// Encoded value for class 1: -sqrt(pi0 / pi1) (negative).
    pub value_for_1: f64,
}

/// Encode 0/1 labels. Both classes must be present.
pub fn encode(labels: &[u8]) -> Result<(Vec<f64>, ClassEncoding)> {
    if labels.is_empty() {
        return Err(Error::InsufficientData("no labels".into()));
    }
    if labels.iter().any(|&l| l > 1) {
        return Err(Error::Validation("labels must be 0 or 1".into()));
    }
    let n1 = labels.iter().filter(|&&l| l == 1).count();
    let n0 = labels.len() - n1;
    if n0 == 0 || n1 == 0 {
        return Err(Error::SingleClass("encoding needs both classes".into()));
    }
    let pi1 = n1 as f64 / labels.len() as f64;
    let pi0 = 1.0 - pi1;
    let enc = ClassEncoding {
        pi1,
        value_for_0: (pi1 / pi0).sqrt(),
        value_for_1: -(pi0 / pi1).sqrt(),
    };
    let y = labels
        .iter()
        .map(|&l| if l == 0 { enc.value_for_0 } else { enc.value_for_1 })
        .collect();
    Ok((y, enc))
}

/// Fitted discriminant: the Fisher score is
/// `Gamma(X) = alpha + <<X, beta>>`, with class 0 predicted when
/// `Gamma > 0` and class 1 otherwise.
#[derive(Debug, Clone)]
pub struct DiscriminantModel {
    pub beta: FunctionObject,
    pub alpha: f64,
    pub n_components: usize,
    pub encoding: ClassEncoding,
    /// Fold-shuffle seed when the component count came from cross-validation.
    pub cv_seed: Option<u64>,
}

/// How the number of PLS components of a discriminant fit is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComponentsSpec {
    Fixed(usize),
    /// Stratified k-fold cross-validation maximizing AUC over 1..=h_max.
    Cv { k_folds: usize, h_max: usize, seed: u64 },
}

/// Fit a PLS discriminant model on binary labels.
pub fn fit_plsda(sample: &FunctionalSample, labels: &[u8], spec: ComponentsSpec) -> Result<DiscriminantModel> {
    if sample.n() != labels.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} observations vs {} labels",
            sample.n(),
            labels.len()
        )));
    }
    if sample.n() < 4 {
        return Err(Error::InsufficientData("PLS-DA needs at least 4 observations".into()));
    }
    let (encoded, encoding) = encode(labels)?;
    let (model, cv_seed) = match spec {
        ComponentsSpec::Fixed(h) => (MfplsModel::fit(sample, &encoded, h)?, None),
        ComponentsSpec::Cv { k_folds, h_max, seed } => {
            let y_as_labels: Vec<f64> = labels.iter().map(|&l| l as f64).collect();
            let cfg = CvConfig {
                h_grid: (1..=h_max.max(1)).collect(),
                k_folds,
                criterion: CvCriterion::Auc,
                seed,
            };
            let report = cross_validate(sample, &y_as_labels, &cfg)?;
            if report.chosen_h == 0 {
                return Err(Error::ZeroCovariance(
                    "cross-validation found no usable component".into(),
                ));
            }
            (MfplsModel::fit(sample, &encoded, report.chosen_h)?, Some(seed))
        }
    };
    Ok(DiscriminantModel {
        beta: model.beta.clone(),
        alpha: model.intercept,
        n_components: model.n_components,
        encoding,
        cv_seed,
    })
}

/// Fisher scores of a sample under the model.
pub fn score(model: &DiscriminantModel, sample: &FunctionalSample) -> Result<Vec<f64>> {
    if !sample.bases_match_object(&model.beta) {
        return Err(Error::BasisMismatch("sample bases differ from the model's".into()));
    }
    let metrics = sample.metrics()?;
    let ip = sample.inner_products_with(&metrics, &model.beta)?;
    Ok(ip.iter().map(|&v| v + model.alpha).collect())
}

/// The classification rule: class 0 when the score is strictly positive.
pub fn classify_scores(scores: &[f64]) -> Vec<u8> {
    scores.iter().map(|&g| if g > 0.0 { 0 } else { 1 }).collect()
}

/// Scores and predicted classes in one pass.
pub fn predict(model: &DiscriminantModel, sample: &FunctionalSample) -> Result<(Vec<f64>, Vec<u8>)> {
    let s = score(model, sample)?;
    let c = classify_scores(&s);
    Ok((s, c))
}

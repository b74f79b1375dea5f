//! Replication runner: generates data, fits the requested methods, and
//! aggregates metrics across replications.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{BasisSystem, SamplingGrid};
use crate::classify::{fit_plsda, ComponentsSpec};
use crate::cv::{fit_with_cv, CvConfig, CvCriterion};
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::fdata::{FunctionObject, FunctionalSample, RawObservations, Smoother};
use crate::metrics;
use crate::rng::derive_seed;
use crate::tree::{fit_tmfpls, predict_tree, GroupStructure, NodeComponents, TreeConfig};

use super::setting1::{gen_setting1, Setting1Config};
use super::setting2::{gen_setting2, Setting2Config};
use super::setting3::{gen_setting3_with, Setting3Config, Setting3Context};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Mfpls,
    /// Single-dimension variant, 0-based dimension index.
    MfplsDim(usize),
    TmfplsH1,
    TmfplsHcv,
}

impl Method {
    pub fn parse(s: &str) -> Result<Method> {
        let s = s.trim();
        match s {
            "mfpls" => Ok(Method::Mfpls),
            "tmfpls_h1" => Ok(Method::TmfplsH1),
            "tmfpls_hcv" => Ok(Method::TmfplsHcv),
            _ => {
                if let Some(num) = s.strip_prefix("mfpls_dim") {
                    let j: usize = num
                        .parse()
                        .map_err(|_| Error::Validation(format!("unknown method '{s}'")))?;
                    if j == 0 {
                        return Err(Error::Validation("dimensions are numbered from 1".into()));
                    }
                    Ok(Method::MfplsDim(j - 1))
                } else {
                    Err(Error::Validation(format!("unknown method '{s}'")))
                }
            }
        }
    }

    pub fn name(&self) -> String {
        match self {
            Method::Mfpls => "mfpls".into(),
            Method::MfplsDim(j) => format!("mfpls_dim{}", j + 1),
            Method::TmfplsH1 => "tmfpls_h1".into(),
            Method::TmfplsHcv => "tmfpls_hcv".into(),
        }
    }

    fn is_tree(&self) -> bool {
        matches!(self, Method::TmfplsH1 | Method::TmfplsHcv)
    }
}

#[derive(Debug, Clone)]
pub enum ExperimentSetting {
    One(Setting1Config),
    Two(Setting2Config),
    Three(Setting3Config),
}

impl ExperimentSetting {
    pub fn label(&self) -> &'static str {
        match self {
            ExperimentSetting::One(_) => "1",
            ExperimentSetting::Two(_) => "2",
            ExperimentSetting::Three(_) => "3",
        }
    }

    pub fn param(&self) -> String {
        match self {
            ExperimentSetting::One(c) => format!("snr={}", c.snr),
            ExperimentSetting::Two(c) => format!("scenario={}", c.scenario),
            ExperimentSetting::Three(c) => format!("snr={}", c.snr),
        }
    }

    pub fn replications(&self) -> usize {
        match self {
            ExperimentSetting::One(c) => c.replications,
            ExperimentSetting::Two(c) => c.replications,
            ExperimentSetting::Three(c) => c.replications,
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            ExperimentSetting::One(c) => c.seed,
            ExperimentSetting::Two(c) => c.seed,
            ExperimentSetting::Three(c) => c.seed,
        }
    }

    pub fn is_classification(&self) -> bool {
        !matches!(self, ExperimentSetting::One(_))
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub setting: ExperimentSetting,
    pub methods: Vec<Method>,
    pub cv_folds: usize,
    pub h_max: usize,
    /// Evaluate the first replication's coefficient functions on the
    /// sampling grid for plotting.
    pub dump_beta: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultRow {
    pub setting: String,
    pub param: String,
    pub method: String,
    pub metric: String,
    pub mean: f64,
    pub std: f64,
    pub replications: usize,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct TimingRow {
    pub method: String,
    pub mean_seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BetaDumpPoint {
    pub dim: usize,
    pub x1: f64,
    pub x2: Option<f64>,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub rows: Vec<ResultRow>,
    pub timings: Vec<TimingRow>,
    /// (method name, coefficient-function values on the sampling grid)
    pub beta_dumps: Vec<(String, Vec<BetaDumpPoint>)>,
    /// Replication-level failures; recorded, never fatal for the batch.
    pub failures: Vec<String>,
}

/// Smoothing bases of a setting's dimensions.
fn setting_bases(setting: &ExperimentSetting) -> Result<Vec<BasisSystem>> {
    match setting {
        ExperimentSetting::One(c) => {
            let b = BasisSystem::bspline(Domain::interval(0.0, 1.0)?, 3, c.basis_size)?;
            Ok(vec![b.clone(), b.clone(), b])
        }
        ExperimentSetting::Two(c) => {
            let b = BasisSystem::bspline(Domain::interval(0.0, 1.0)?, 3, c.basis_size)?;
            Ok(vec![b.clone(), b])
        }
        ExperimentSetting::Three(_) => {
            let curve = BasisSystem::bspline(Domain::interval(0.0, 50.0)?, 3, 20)?;
            let image = BasisSystem::tensor_bspline(Domain::rectangle(0.0, 1.0, 0.0, 1.0)?, 2, 2, 2, 2)?;
            Ok(vec![curve, image])
        }
    }
}

struct RepData {
    sample: FunctionalSample,
    y: Vec<f64>,
    labels: Vec<u8>,
}

struct MethodOutcome {
    metrics: Vec<(&'static str, f64)>,
    seconds: f64,
    beta: Option<FunctionObject>,
}

fn contiguous_split(n: usize, train_fraction: f64) -> (Vec<usize>, Vec<usize>) {
    let n_train = ((n as f64) * train_fraction).round() as usize;
    ((0..n_train).collect(), (n_train..n).collect())
}

#[allow(clippy::too_many_arguments)]
fn run_method_regression(
    method: Method,
    train: &FunctionalSample,
    train_y: &[f64],
    val: &FunctionalSample,
    val_y: &[f64],
    cv_folds: usize,
    h_max: usize,
    rep_seed: u64,
) -> Result<MethodOutcome> {
    let (train_m, val_m) = match method {
        Method::Mfpls => (train.clone(), val.clone()),
        Method::MfplsDim(j) => (train.restrict_dims(&[j])?, val.restrict_dims(&[j])?),
        _ => return Err(Error::Validation("tree methods need a classification setting".into())),
    };
    let started = Instant::now();
    let cfg = CvConfig {
        h_grid: (1..=h_max).collect(),
        k_folds: cv_folds,
        criterion: CvCriterion::Mse,
        seed: rep_seed,
    };
    let (model, _report) = fit_with_cv(&train_m, train_y, &cfg)?;
    let seconds = started.elapsed().as_secs_f64();
    let preds = model.predict(&val_m)?;
    let mspe = metrics::mspe(&preds, val_y)?;
    Ok(MethodOutcome { metrics: vec![("mspe", mspe)], seconds, beta: Some(model.beta.clone()) })
}

#[allow(clippy::too_many_arguments)]
fn run_method_classification(
    method: Method,
    train: &FunctionalSample,
    train_labels: &[u8],
    val: &FunctionalSample,
    val_labels: &[u8],
    cv_folds: usize,
    h_max: usize,
    rep_seed: u64,
) -> Result<MethodOutcome> {
    let started;
    let (scores_class1, predicted, beta, seconds) = if method.is_tree() {
        let groups = GroupStructure::default_for(train.d());
        let components = match method {
            Method::TmfplsH1 => NodeComponents::Fixed(1),
            _ => NodeComponents::Cv { k_folds: cv_folds },
        };
        let config = TreeConfig {
            components,
            h_max,
            seed: rep_seed,
            ..TreeConfig::default()
        };
        started = Instant::now();
        let (tree, _m_hat) = fit_tmfpls(train, train_labels, &groups, &config)?;
        let seconds = started.elapsed().as_secs_f64();
        let (classes, scores) = predict_tree(&tree, val)?;
        (scores, classes, None, seconds)
    } else {
        let (train_m, val_m) = match method {
            Method::Mfpls => (train.clone(), val.clone()),
            Method::MfplsDim(j) => (train.restrict_dims(&[j])?, val.restrict_dims(&[j])?),
            _ => unreachable!(),
        };
        started = Instant::now();
        let model = fit_plsda(
            &train_m,
            train_labels,
            ComponentsSpec::Cv { k_folds: cv_folds, h_max, seed: rep_seed },
        )?;
        let seconds = started.elapsed().as_secs_f64();
        let (gamma, classes) = crate::classify::predict(&model, &val_m)?;
        let class1: Vec<f64> = gamma.iter().map(|&g| -g).collect();
        (class1, classes, Some(model.beta.clone()), seconds)
    };
    let auc = metrics::auc(&scores_class1, val_labels)?;
    let accuracy = metrics::accuracy(&predicted, val_labels)?;
    let sensitivity = metrics::sensitivity(&predicted, val_labels)?;
    let specificity = metrics::specificity(&predicted, val_labels)?;
    Ok(MethodOutcome {
        metrics: vec![
            ("auc", auc),
            ("sensitivity", sensitivity),
            ("specificity", specificity),
            ("accuracy", accuracy),
        ],
        seconds,
        beta,
    })
}

/// The sampled points of the setting's dimensions, used for coefficient
/// dumps.
fn dump_grids(raw: &RawObservations) -> Vec<SamplingGrid> {
    raw.dims.iter().map(|d| d.grid.clone()).collect()
}

fn beta_dump(beta: &FunctionObject, grids: &[SamplingGrid]) -> Result<Vec<BetaDumpPoint>> {
    let mut out = Vec::new();
    for (j, grid) in grids.iter().enumerate().take(beta.dims.len()) {
        let vals = beta.evaluate_dim(j, grid)?;
        match grid {
            SamplingGrid::OneD(pts) => {
                for (&t, &v) in pts.iter().zip(&vals) {
                    out.push(BetaDumpPoint { dim: j + 1, x1: t, x2: None, value: v });
                }
            }
            SamplingGrid::TwoD(pts) => {
                for (&(u, w), &v) in pts.iter().zip(&vals) {
                    out.push(BetaDumpPoint { dim: j + 1, x1: u, x2: Some(w), value: v });
                }
            }
        }
    }
    Ok(out)
}

/// Generate the raw data of one replication of any setting.
pub fn generate_replication(
    setting: &ExperimentSetting,
    ctx3: Option<&Setting3Context>,
    rep: u64,
) -> Result<(RawObservations, Vec<f64>, Vec<u8>)> {
    match setting {
        ExperimentSetting::One(c) => {
            let r = gen_setting1(c, rep)?;
            Ok((r.raw, r.y, Vec::new()))
        }
        ExperimentSetting::Two(c) => {
            let r = gen_setting2(c, rep)?;
            let y: Vec<f64> = r.labels.iter().map(|&l| l as f64).collect();
            Ok((r.raw, y, r.labels))
        }
        ExperimentSetting::Three(c) => {
            let ctx_local;
            let ctx = match ctx3 {
                Some(c) => c,
                None => {
                    ctx_local = Setting3Context::new(c)?;
                    &ctx_local
                }
            };
            let r = gen_setting3_with(c, ctx, rep)?;
            let y: Vec<f64> = r.labels.iter().map(|&l| l as f64).collect();
            Ok((r.raw, y, r.labels))
        }
    }
}

/// Run every requested method over the configured replications.
/// Replications are independent (their randomness comes from per-index
/// substreams) and may execute concurrently; outputs are reduced in
/// replication order, so results do not depend on scheduling.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let setting = &cfg.setting;
    let classification = setting.is_classification();
    for m in &cfg.methods {
        if m.is_tree() && !classification {
            return Err(Error::Validation(format!(
                "method {} requires a classification setting",
                m.name()
            )));
        }
    }
    let bases = setting_bases(setting)?;
    let d = bases.len();
    for m in &cfg.methods {
        if let Method::MfplsDim(j) = m {
            if *j >= d {
                return Err(Error::Validation(format!(
                    "method {} references a missing dimension",
                    m.name()
                )));
            }
        }
    }
    let ctx3 = match setting {
        ExperimentSetting::Three(c) => Some(Setting3Context::new(c)?),
        _ => None,
    };
    let reps = setting.replications();
    let seed = setting.seed();

    // Smoothers depend only on the fixed sampling grids; build them once
    // from replication 0's grid layout.
    let (raw0, _, _) = generate_replication(setting, ctx3.as_ref(), 0)?;
    let smoothers: Vec<Smoother> = raw0
        .dims
        .iter()
        .zip(&bases)
        .map(|(rd, b)| Smoother::new(b, &rd.grid))
        .collect::<Result<_>>()?;
    let grids = dump_grids(&raw0);
    drop(raw0);

    type RepOutcome = Vec<(String, MethodOutcome)>;
    let outcomes: Vec<std::result::Result<RepOutcome, String>> = (0..reps as u64)
        .into_par_iter()
        .map(|rep| -> std::result::Result<RepOutcome, String> {
            let run = || -> Result<RepOutcome> {
                let (raw, y, labels) = generate_replication(setting, ctx3.as_ref(), rep)?;
                let dims = raw
                    .dims
                    .iter()
                    .zip(&smoothers)
                    .map(|(rd, s)| s.apply(&rd.values))
                    .collect::<Result<Vec<_>>>()?;
                let sample = FunctionalSample::new(dims)?;
                let frac = match setting {
                    ExperimentSetting::One(c) => c.train_fraction,
                    ExperimentSetting::Two(c) => c.train_fraction,
                    ExperimentSetting::Three(c) => c.train_fraction,
                };
                let (train_rows, val_rows) = contiguous_split(sample.n(), frac);
                let data = RepData { sample, y, labels };
                let train = data.sample.subset(&train_rows);
                let val = data.sample.subset(&val_rows);
                let rep_seed = derive_seed(seed, rep);
                let mut per_method = Vec::with_capacity(cfg.methods.len());
                for m in &cfg.methods {
                    let outcome = if classification {
                        let train_l: Vec<u8> = train_rows.iter().map(|&i| data.labels[i]).collect();
                        let val_l: Vec<u8> = val_rows.iter().map(|&i| data.labels[i]).collect();
                        run_method_classification(
                            *m, &train, &train_l, &val, &val_l, cfg.cv_folds, cfg.h_max, rep_seed,
                        )?
                    } else {
                        let train_y: Vec<f64> = train_rows.iter().map(|&i| data.y[i]).collect();
                        let val_y: Vec<f64> = val_rows.iter().map(|&i| data.y[i]).collect();
                        run_method_regression(
                            *m, &train, &train_y, &val, &val_y, cfg.cv_folds, cfg.h_max, rep_seed,
                        )?
                    };
                    per_method.push((m.name(), outcome));
                }
                Ok(per_method)
            };
            run().map_err(|e| format!("replication {rep}: {e}"))
        })
        .collect();

    let mut failures = Vec::new();
    let mut ok: Vec<RepOutcome> = Vec::with_capacity(reps);
    for o in outcomes {
        match o {
            Ok(v) => ok.push(v),
            Err(msg) => failures.push(msg),
        }
    }
    if ok.is_empty() {
        return Err(Error::InsufficientData(format!(
            "every replication failed; first failure: {}",
            failures.first().cloned().unwrap_or_default()
        )));
    }

    let mut rows = Vec::new();
    let mut timings = Vec::new();
    for (mi, m) in cfg.methods.iter().enumerate() {
        let name = m.name();
        let metric_names: Vec<&'static str> = ok[0][mi].1.metrics.iter().map(|&(n, _)| n).collect();
        for (metric_idx, metric) in metric_names.iter().enumerate() {
            let values: Vec<f64> = ok.iter().map(|rep| rep[mi].1.metrics[metric_idx].1).collect();
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            let std = if values.len() > 1 {
                (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (values.len() - 1) as f64)
                    .sqrt()
            } else {
                0.0
            };
            rows.push(ResultRow {
                setting: setting.label().into(),
                param: setting.param(),
                method: name.clone(),
                metric: (*metric).to_string(),
                mean,
                std,
                replications: ok.len(),
                seed,
            });
        }
        let secs: Vec<f64> = ok.iter().map(|rep| rep[mi].1.seconds).collect();
        timings.push(TimingRow { method: name.clone(), mean_seconds: secs.iter().sum::<f64>() / secs.len() as f64 });
    }

    let mut beta_dumps = Vec::new();
    if cfg.dump_beta {
        for (mi, m) in cfg.methods.iter().enumerate() {
            if let Some(beta) = &ok[0][mi].1.beta {
                beta_dumps.push((m.name(), beta_dump(beta, &grids)?));
            }
        }
    }

    Ok(ExperimentResult { rows, timings, beta_dumps, failures })
}

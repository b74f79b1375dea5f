//! Command implementations behind the CLI binary. Kept in the library so
//! in-process runs and the binary share one code path.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::basis::BasisSystem;
use crate::classify::{fit_plsda, ComponentsSpec};
use crate::cv::{cross_validate, fit_with_cv, CvConfig, CvCriterion};
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::fdata::{smooth, FunctionalSample, RawObservations};
use crate::io::csv as iocsv;
use crate::io::csv::ResponseKind;
use crate::io::model_json as mj;
use crate::metrics::{self, ClassificationMetrics};
use crate::pls::MfplsModel;
use crate::sim::run::{
    run_experiment, BetaDumpPoint, ExperimentConfig, ExperimentSetting, Method, ResultRow, TimingRow,
};
use crate::sim::setting1::{Setting1Config, SNR_GRID as SNR_GRID_1};
use crate::sim::setting2::Setting2Config;
use crate::sim::setting3::{Setting3Config, SNR_GRID as SNR_GRID_3};
use crate::sim::run::generate_replication;
use crate::tree::{fit_tmfpls, predict_tree, render_text, GroupStructure, NodeComponents, TreeConfig};

/// Flat `key = value` configuration file; '#' starts a comment. Flags given
/// on the command line override file entries.
pub fn parse_config_file(path: &Path) -> Result<HashMap<String, String>> {
    let text = std::fs::read_to_string(path)?;
    let mut map = HashMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::Validation(format!(
                "{}: line {}: expected 'key = value'",
                path.display(),
                lineno + 1
            )));
        };
        map.insert(k.trim().replace('-', "_"), v.trim().to_string());
    }
    Ok(map)
}

/// Per-dimension basis request: "20" is a 1-D quadratic B-spline basis of
/// that size; "AxB" is a 2-D tensor basis with A x B functions. Orders cap
/// at quadratic and drop to the basis size when it is smaller.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisSpec {
    OneD(usize),
    TwoD(usize, usize),
}

impl BasisSpec {
    pub fn parse(s: &str) -> Result<BasisSpec> {
        let s = s.trim();
        if let Some((a, b)) = s.split_once('x') {
            let mu: usize = a.trim().parse().map_err(|_| bad_basis(s))?;
            let mv: usize = b.trim().parse().map_err(|_| bad_basis(s))?;
            if mu < 2 || mv < 2 {
                return Err(Error::Validation(format!(
                    "tensor basis '{s}' needs at least 2 functions per axis"
                )));
            }
            Ok(BasisSpec::TwoD(mu, mv))
        } else {
            let m: usize = s.parse().map_err(|_| bad_basis(s))?;
            if m == 0 {
                return Err(Error::Validation("basis size must be positive".into()));
            }
            Ok(BasisSpec::OneD(m))
        }
    }

    pub fn parse_list(s: &str) -> Result<Vec<BasisSpec>> {
        s.split(',').map(BasisSpec::parse).collect()
    }

    pub fn is_two_d(&self) -> bool {
        matches!(self, BasisSpec::TwoD(..))
    }
}

fn bad_basis(s: &str) -> Error {
    Error::Validation(format!("basis spec '{s}' is neither an integer nor 'AxB'"))
}

/// Build the basis for one dimension from its sampled grid extent.
pub fn build_basis(spec: BasisSpec, raw: &crate::fdata::RawDim) -> Result<BasisSystem> {
    match (spec, &raw.grid) {
        (BasisSpec::OneD(m), crate::basis::SamplingGrid::OneD(pts)) => {
            let (lo, hi) = extent(pts)?;
            let order = 3.min(m);
            BasisSystem::bspline(Domain::interval(lo, hi)?, order, m)
        }
        (BasisSpec::TwoD(mu, mv), crate::basis::SamplingGrid::TwoD(pts)) => {
            let (ulo, uhi) = extent(&pts.iter().map(|p| p.0).collect::<Vec<_>>())?;
            let (vlo, vhi) = extent(&pts.iter().map(|p| p.1).collect::<Vec<_>>())?;
            let order_u = 3.min(mu);
            let order_v = 3.min(mv);
            BasisSystem::tensor_bspline(Domain::rectangle(ulo, uhi, vlo, vhi)?, order_u, mu, order_v, mv)
        }
        _ => Err(Error::Validation(
            "basis spec dimensionality does not match the data file layout".into(),
        )),
    }
}

fn extent(pts: &[f64]) -> Result<(f64, f64)> {
    let lo = pts.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = pts.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() || !hi.is_finite() || lo >= hi {
        return Err(Error::Validation("grid must span an interval of positive length".into()));
    }
    Ok((lo, hi))
}

/// How many components a model-fitting command uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComponentsArg {
    Fixed(usize),
    Cv { k_folds: usize },
}

impl ComponentsArg {
    pub fn parse(s: &str) -> Result<ComponentsArg> {
        let s = s.trim();
        if let Some(k) = s.strip_prefix("cv:") {
            let k_folds: usize = k
                .parse()
                .map_err(|_| Error::Validation(format!("bad components spec '{s}'")))?;
            Ok(ComponentsArg::Cv { k_folds })
        } else {
            let h: usize = s
                .parse()
                .map_err(|_| Error::Validation(format!("bad components spec '{s}'")))?;
            if h == 0 {
                return Err(Error::Validation("component count must be at least 1".into()));
            }
            Ok(ComponentsArg::Fixed(h))
        }
    }
}

/// Groups are given 1-based, ';' between groups, ',' within: "1;2;1,2".
pub fn parse_groups(s: &str, d: usize) -> Result<GroupStructure> {
    let mut groups = Vec::new();
    for part in s.split(';') {
        let mut g = Vec::new();
        for tok in part.split(',') {
            let idx: usize = tok
                .trim()
                .parse()
                .map_err(|_| Error::Validation(format!("bad group spec '{s}'")))?;
            if idx == 0 {
                return Err(Error::Validation("dimensions are numbered from 1".into()));
            }
            g.push(idx - 1);
        }
        groups.push(g);
    }
    let gs = GroupStructure::new(groups)?;
    gs.validate_against(d)?;
    Ok(gs)
}

// ---------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct FitArgs {
    pub data: Vec<PathBuf>,
    pub response: PathBuf,
    pub basis: Vec<BasisSpec>,
    pub components: ComponentsArg,
    pub h_max: usize,
    pub seed: u64,
    pub out: PathBuf,
}

#[derive(Debug, Serialize)]
struct RegressionTrainingMetrics {
    mspe: f64,
    n_components: usize,
}

#[derive(Debug, Serialize)]
struct ClassificationTrainingMetrics {
    auc: f64,
    accuracy: f64,
    sensitivity: f64,
    specificity: f64,
    n_components: usize,
}

fn load_sample(
    data: &[PathBuf],
    basis: &[BasisSpec],
    response: &Path,
) -> Result<(FunctionalSample, Vec<f64>, ResponseKind, RawObservations)> {
    if data.len() != basis.len() {
        return Err(Error::Validation(format!(
            "{} data files but {} basis specs",
            data.len(),
            basis.len()
        )));
    }
    let two_d: Vec<bool> = basis.iter().map(|b| b.is_two_d()).collect();
    let (raw, y, kind) = iocsv::read_dataset(data, &two_d, response)?;
    let bases = raw
        .dims
        .iter()
        .zip(basis)
        .map(|(rd, &spec)| build_basis(spec, rd))
        .collect::<Result<Vec<_>>>()?;
    let sample = smooth(&raw, &bases)?;
    Ok((sample, y, kind, raw))
}

pub fn cmd_fit(args: &FitArgs) -> Result<()> {
    let (sample, y, kind, raw) = load_sample(&args.data, &args.basis, &args.response)?;
    std::fs::create_dir_all(&args.out)?;
    match kind {
        ResponseKind::Regression => {
            let model = match args.components {
                ComponentsArg::Fixed(h) => MfplsModel::fit(&sample, &y, h)?,
                ComponentsArg::Cv { k_folds } => {
                    let cfg = CvConfig {
                        h_grid: (1..=args.h_max).collect(),
                        k_folds,
                        criterion: CvCriterion::Mse,
                        seed: args.seed,
                    };
                    fit_with_cv(&sample, &y, &cfg)?.0
                }
            };
            let preds = model.predict(&sample)?;
            let tm = RegressionTrainingMetrics {
                mspe: metrics::mspe(&preds, &y)?,
                n_components: model.n_components,
            };
            mj::write_json(&args.out.join("model.json"), &mj::model_to_doc(&model))?;
            mj::write_json(&args.out.join("training_metrics.json"), &tm)?;
            write_beta_csv(&args.out.join("beta.csv"), &model.beta, &raw)?;
            println!("fitted mfpls regression: {} components, training mspe {:.6}", tm.n_components, tm.mspe);
        }
        ResponseKind::Classification => {
            let labels: Vec<u8> = y.iter().map(|&v| v as u8).collect();
            let spec = match args.components {
                ComponentsArg::Fixed(h) => ComponentsSpec::Fixed(h),
                ComponentsArg::Cv { k_folds } => {
                    ComponentsSpec::Cv { k_folds, h_max: args.h_max, seed: args.seed }
                }
            };
            let model = fit_plsda(&sample, &labels, spec)?;
            let (gamma, classes) = crate::classify::predict(&model, &sample)?;
            let class1: Vec<f64> = gamma.iter().map(|&g| -g).collect();
            let cm = ClassificationMetrics::compute(&class1, &classes, &labels)?;
            let tm = ClassificationTrainingMetrics {
                auc: cm.auc,
                accuracy: cm.accuracy,
                sensitivity: cm.sensitivity,
                specificity: cm.specificity,
                n_components: model.n_components,
            };
            mj::write_json(&args.out.join("model.json"), &mj::discriminant_to_doc(&model))?;
            mj::write_json(&args.out.join("training_metrics.json"), &tm)?;
            write_beta_csv(&args.out.join("beta.csv"), &model.beta, &raw)?;
            println!(
                "fitted mfpls discriminant: {} components, training auc {:.4}",
                tm.n_components, tm.auc
            );
        }
    }
    Ok(())
}

fn write_beta_csv(path: &Path, beta: &crate::fdata::FunctionObject, raw: &RawObservations) -> Result<()> {
    let mut points: Vec<BetaDumpPoint> = Vec::new();
    for (j, rd) in raw.dims.iter().enumerate().take(beta.dims.len()) {
        let vals = beta.evaluate_dim(j, &rd.grid)?;
        match &rd.grid {
            crate::basis::SamplingGrid::OneD(pts) => {
                for (&t, &v) in pts.iter().zip(&vals) {
                    points.push(BetaDumpPoint { dim: j + 1, x1: t, x2: None, value: v });
                }
            }
            crate::basis::SamplingGrid::TwoD(pts) => {
                for (&(u, w), &v) in pts.iter().zip(&vals) {
                    points.push(BetaDumpPoint { dim: j + 1, x1: u, x2: Some(w), value: v });
                }
            }
        }
    }
    iocsv::write_beta_dump(path, &points)
}

// ---------------------------------------------------------------------
// predict
// ---------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct PredictArgs {
    pub model: PathBuf,
    pub data: Vec<PathBuf>,
    pub response: Option<PathBuf>,
    pub out: PathBuf,
}

pub fn cmd_predict(args: &PredictArgs) -> Result<()> {
    let doc: mj::AnyModelDoc = mj::read_json(&args.model)?;
    std::fs::create_dir_all(&args.out)?;
    match doc {
        mj::AnyModelDoc::Regression(doc) => {
            let model = mj::model_from_doc(doc)?;
            let sample = smooth_onto(&args.data, &model.bases)?;
            let preds = model.predict(&sample)?;
            iocsv::write_regression_predictions(&args.out.join("predictions.csv"), &preds)?;
            if let Some(resp) = &args.response {
                let (truth, kind) = iocsv::read_response(resp)?;
                if kind != ResponseKind::Regression {
                    return Err(Error::Validation("regression model but label response".into()));
                }
                let m = RegressionTrainingMetrics {
                    mspe: metrics::mspe(&preds, &truth)?,
                    n_components: model.n_components,
                };
                mj::write_json(&args.out.join("metrics.json"), &m)?;
            }
            println!("wrote {} predictions", preds.len());
        }
        mj::AnyModelDoc::Discriminant(doc) => {
            let model = mj::discriminant_from_doc(doc)?;
            let bases: Vec<BasisSystem> = model.beta.dims.iter().map(|d| d.basis.clone()).collect();
            let sample = smooth_onto(&args.data, &bases)?;
            let (gamma, classes) = crate::classify::predict(&model, &sample)?;
            iocsv::write_classification_predictions(&args.out.join("predictions.csv"), &gamma, &classes)?;
            if let Some(resp) = &args.response {
                let (truth, kind) = iocsv::read_response(resp)?;
                if kind != ResponseKind::Classification {
                    return Err(Error::Validation("discriminant model but numeric response".into()));
                }
                let labels: Vec<u8> = truth.iter().map(|&v| v as u8).collect();
                let class1: Vec<f64> = gamma.iter().map(|&g| -g).collect();
                let cm = ClassificationMetrics::compute(&class1, &classes, &labels)?;
                mj::write_json(&args.out.join("metrics.json"), &cm)?;
            }
            println!("wrote {} predictions", classes.len());
        }
    }
    Ok(())
}

fn smooth_onto(data: &[PathBuf], bases: &[BasisSystem]) -> Result<FunctionalSample> {
    if data.len() != bases.len() {
        return Err(Error::Validation(format!(
            "{} data files but the model has {} dimensions",
            data.len(),
            bases.len()
        )));
    }
    let two_d: Vec<bool> = bases.iter().map(|b| b.domain.ndim() == 2).collect();
    let dims = data
        .iter()
        .zip(&two_d)
        .map(|(p, &t)| iocsv::read_raw_dim(p, t))
        .collect::<Result<Vec<_>>>()?;
    let raw = RawObservations::new(dims)?;
    smooth(&raw, bases)
}

// ---------------------------------------------------------------------
// cv
// ---------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct CvArgs {
    pub data: Vec<PathBuf>,
    pub response: PathBuf,
    pub basis: Vec<BasisSpec>,
    pub k_folds: usize,
    pub h_max: usize,
    pub seed: u64,
    pub out: PathBuf,
}

#[derive(Debug, Serialize)]
struct CvDoc {
    criterion: String,
    k_folds: usize,
    seed: u64,
    chosen_h: usize,
    per_h: Vec<CvRowDoc>,
}

#[derive(Debug, Serialize)]
struct CvRowDoc {
    h: usize,
    criterion: Option<f64>,
}

pub fn cmd_cv(args: &CvArgs) -> Result<()> {
    let (sample, y, kind, _raw) = load_sample(&args.data, &args.basis, &args.response)?;
    let criterion = match kind {
        ResponseKind::Regression => CvCriterion::Mse,
        ResponseKind::Classification => CvCriterion::Auc,
    };
    let cfg = CvConfig {
        h_grid: (1..=args.h_max).collect(),
        k_folds: args.k_folds,
        criterion,
        seed: args.seed,
    };
    let report = cross_validate(&sample, &y, &cfg)?;
    std::fs::create_dir_all(&args.out)?;
    let doc = CvDoc {
        criterion: match criterion {
            CvCriterion::Mse => "mse".into(),
            CvCriterion::Auc => "auc".into(),
        },
        k_folds: args.k_folds,
        seed: args.seed,
        chosen_h: report.chosen_h,
        per_h: report
            .per_h
            .iter()
            .map(|&(h, criterion)| CvRowDoc { h, criterion })
            .collect(),
    };
    mj::write_json(&args.out.join("cv.json"), &doc)?;
    println!("criterion {}  folds {}  seed {}", doc.criterion, doc.k_folds, doc.seed);
    for row in &doc.per_h {
        match row.criterion {
            Some(v) => println!("  h = {:>3}  {:<10.6}", row.h, v),
            None => println!("  h = {:>3}  (no usable folds)", row.h),
        }
    }
    println!("chosen h = {}", doc.chosen_h);
    Ok(())
}

// ---------------------------------------------------------------------
// tree
// ---------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct TreeArgs {
    pub data: Vec<PathBuf>,
    pub response: PathBuf,
    pub basis: Vec<BasisSpec>,
    pub groups: Option<String>,
    pub components: ComponentsArg,
    pub purity: f64,
    pub max_depth: usize,
    pub min_node_size: usize,
    pub h_max: usize,
    pub seed: u64,
    pub out: PathBuf,
}

#[derive(Debug, Serialize)]
struct TreeTrainingMetrics {
    auc: f64,
    accuracy: f64,
    sensitivity: f64,
    specificity: f64,
    estimated_depth: usize,
}

pub fn cmd_tree(args: &TreeArgs) -> Result<()> {
    let (sample, y, kind, _raw) = load_sample(&args.data, &args.basis, &args.response)?;
    if kind != ResponseKind::Classification {
        return Err(Error::Validation("tree training needs a label response".into()));
    }
    let labels: Vec<u8> = y.iter().map(|&v| v as u8).collect();
    let groups = match &args.groups {
        Some(spec) => parse_groups(spec, sample.d())?,
        None => GroupStructure::default_for(sample.d()),
    };
    let components = match args.components {
        ComponentsArg::Fixed(h) => NodeComponents::Fixed(h),
        ComponentsArg::Cv { k_folds } => NodeComponents::Cv { k_folds },
    };
    let config = TreeConfig {
        purity_threshold: args.purity,
        max_depth: args.max_depth,
        min_node_size: args.min_node_size,
        components,
        h_max: args.h_max,
        seed: args.seed,
    };
    let (tree, m_hat) = fit_tmfpls(&sample, &labels, &groups, &config)?;
    let (classes, scores) = predict_tree(&tree, &sample)?;
    let cm = ClassificationMetrics::compute(&scores, &classes, &labels)?;
    let tm = TreeTrainingMetrics {
        auc: cm.auc,
        accuracy: cm.accuracy,
        sensitivity: cm.sensitivity,
        specificity: cm.specificity,
        estimated_depth: m_hat,
    };
    std::fs::create_dir_all(&args.out)?;
    mj::write_json(&args.out.join("tree.json"), &mj::tree_to_doc(&tree))?;
    std::fs::write(args.out.join("tree.txt"), render_text(&tree))?;
    mj::write_json(&args.out.join("training_metrics.json"), &tm)?;
    println!("estimated depth {m_hat}; grown depth {}; training accuracy {:.4}", tree.depth, tm.accuracy);
    Ok(())
}

// ---------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct SimulateArgs {
    pub setting: u8,
    pub scenario: u8,
    pub snr: Option<Vec<f64>>,
    pub reps: usize,
    pub seed: u64,
    pub methods: Option<Vec<String>>,
    pub train_frac: Option<f64>,
    pub n: Option<usize>,
    pub cv_folds: usize,
    pub h_max: usize,
    pub out: Option<PathBuf>,
    pub export_data: bool,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ResultsDoc {
    pub rows: Vec<ResultRow>,
}

fn default_methods(setting: u8) -> Vec<Method> {
    match setting {
        1 => vec![Method::Mfpls],
        2 => vec![Method::Mfpls, Method::TmfplsHcv],
        _ => vec![Method::Mfpls, Method::MfplsDim(0), Method::MfplsDim(1)],
    }
}

fn settings_for(args: &SimulateArgs) -> Result<Vec<ExperimentSetting>> {
    let mut out = Vec::new();
    match args.setting {
        1 => {
            let snrs = args.snr.clone().unwrap_or_else(|| SNR_GRID_1.to_vec());
            for snr in snrs {
                let mut c = Setting1Config {
                    snr,
                    replications: args.reps,
                    seed: args.seed,
                    ..Default::default()
                };
                if let Some(f) = args.train_frac {
                    c.train_fraction = f;
                }
                if let Some(n) = args.n {
                    c.n = n;
                }
                out.push(ExperimentSetting::One(c));
            }
        }
        2 => {
            let mut c = Setting2Config {
                scenario: args.scenario,
                replications: args.reps,
                seed: args.seed,
                ..Default::default()
            };
            if let Some(f) = args.train_frac {
                c.train_fraction = f;
            }
            if let Some(n) = args.n {
                c.n = n;
            }
            out.push(ExperimentSetting::Two(c));
        }
        3 => {
            let snrs = args.snr.clone().unwrap_or_else(|| SNR_GRID_3.to_vec());
            for snr in snrs {
                let mut c = Setting3Config {
                    snr,
                    replications: args.reps,
                    seed: args.seed,
                    ..Default::default()
                };
                if let Some(f) = args.train_frac {
                    c.train_fraction = f;
                }
                if let Some(n) = args.n {
                    c.n = n;
                }
                out.push(ExperimentSetting::Three(c));
            }
        }
        other => return Err(Error::Validation(format!("setting must be 1, 2 or 3, got {other}"))),
    }
    Ok(out)
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let methods: Vec<Method> = match &args.methods {
        Some(list) => list.iter().map(|s| Method::parse(s)).collect::<Result<_>>()?,
        None => default_methods(args.setting),
    };
    let settings = settings_for(args)?;
    let mut all_rows: Vec<ResultRow> = Vec::new();
    let mut all_beta: Vec<(String, String, Vec<BetaDumpPoint>)> = Vec::new();
    for setting in &settings {
        let cfg = ExperimentConfig {
            setting: setting.clone(),
            methods: methods.clone(),
            cv_folds: args.cv_folds,
            h_max: args.h_max,
            dump_beta: args.out.is_some(),
        };
        let result = run_experiment(&cfg)?;
        print_table(&result.rows, Some(&result.timings));
        for f in &result.failures {
            eprintln!("warning: {f}");
        }
        for (method, points) in result.beta_dumps {
            all_beta.push((setting.param().replace('=', "_"), method, points));
        }
        all_rows.extend(result.rows);
    }
    if let Some(out) = &args.out {
        std::fs::create_dir_all(out)?;
        iocsv::write_results_csv(&out.join("results.csv"), &all_rows)?;
        mj::write_json(&out.join("results.json"), &ResultsDoc { rows: all_rows })?;
        for (param, method, points) in &all_beta {
            iocsv::write_beta_dump(&out.join(format!("beta_{param}_{method}.csv")), points)?;
        }
        if args.export_data {
            export_replication_data(&settings[0], out)?;
        }
    }
    Ok(())
}

/// Write replication 0 of a setting as CSV dataset files (train and test
/// splits), exercising the generic ingestion path.
pub fn export_replication_data(setting: &ExperimentSetting, out: &Path) -> Result<()> {
    let (raw, y, labels) = generate_replication(setting, None, 0)?;
    let frac = match setting {
        ExperimentSetting::One(c) => c.train_fraction,
        ExperimentSetting::Two(c) => c.train_fraction,
        ExperimentSetting::Three(c) => c.train_fraction,
    };
    let n = raw.n();
    let n_train = ((n as f64) * frac).round() as usize;
    let train_rows: Vec<usize> = (0..n_train).collect();
    let test_rows: Vec<usize> = (n_train..n).collect();
    let classification = setting.is_classification();
    for (j, _) in raw.dims.iter().enumerate() {
        let train = raw.subset(&train_rows);
        let test = raw.subset(&test_rows);
        iocsv::write_raw_dim(&out.join(format!("rep0_dim{}_train.csv", j + 1)), &train.dims[j])?;
        iocsv::write_raw_dim(&out.join(format!("rep0_dim{}_test.csv", j + 1)), &test.dims[j])?;
    }
    let (kind, values): (ResponseKind, Vec<f64>) = if classification {
        (ResponseKind::Classification, labels.iter().map(|&l| l as f64).collect())
    } else {
        (ResponseKind::Regression, y)
    };
    let train_y: Vec<f64> = train_rows.iter().map(|&i| values[i]).collect();
    let test_y: Vec<f64> = test_rows.iter().map(|&i| values[i]).collect();
    iocsv::write_response(&out.join("rep0_response_train.csv"), &train_y, kind)?;
    iocsv::write_response(&out.join("rep0_response_test.csv"), &test_y, kind)?;
    Ok(())
}

// ---------------------------------------------------------------------
// report
// ---------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct ReportArgs {
    pub results: PathBuf,
    pub out: Option<PathBuf>,
}

pub fn cmd_report(args: &ReportArgs) -> Result<()> {
    let doc: ResultsDoc = mj::read_json(&args.results)?;
    print_table(&doc.rows, None);
    if let Some(out) = &args.out {
        std::fs::create_dir_all(out)?;
        iocsv::write_results_csv(&out.join("results.csv"), &doc.rows)?;
    }
    Ok(())
}

/// Render result rows as one aligned block per (setting, param): method
/// rows, one `mean(std)` column per metric.
pub fn print_table(rows: &[ResultRow], timings: Option<&[TimingRow]>) {
    let mut blocks: Vec<(String, String)> = Vec::new();
    for r in rows {
        let key = (r.setting.clone(), r.param.clone());
        if !blocks.iter().any(|b| b.0 == key.0 && b.1 == key.1) {
            blocks.push(key);
        }
    }
    for (setting, param) in blocks {
        let block: Vec<&ResultRow> = rows
            .iter()
            .filter(|r| r.setting == setting && r.param == param)
            .collect();
        let reps = block.first().map(|r| r.replications).unwrap_or(0);
        let seed = block.first().map(|r| r.seed).unwrap_or(0);
        println!("Setting {setting} ({param}) - {reps} replications, seed {seed}");
        let mut methods: Vec<&str> = Vec::new();
        let mut metrics_order: Vec<&str> = Vec::new();
        for r in &block {
            if !methods.contains(&r.method.as_str()) {
                methods.push(&r.method);
            }
            if !metrics_order.contains(&r.metric.as_str()) {
                metrics_order.push(&r.metric);
            }
        }
        print!("{:<14}", "method");
        for m in &metrics_order {
            print!("{m:<16}");
        }
        if timings.is_some() {
            print!("time/fit (s)");
        }
        println!();
        for method in &methods {
            print!("{method:<14}");
            for metric in &metrics_order {
                let cell = block
                    .iter()
                    .find(|r| &r.method == method && &r.metric == metric)
                    .map(|r| format!("{:.2}({:.2})", r.mean, r.std))
                    .unwrap_or_default();
                print!("{cell:<16}");
            }
            if let Some(ts) = timings {
                if let Some(t) = ts.iter().find(|t| &t.method == method) {
                    print!("{:.3}", t.mean_seconds);
                }
            }
            println!();
        }
        println!();
    }
}

//! C ABI for the mfpls library.
//!
//! All entry points are panic-safe, return [`MfplsStatus`] codes (or null
//! pointers on failure) and record a thread-local error message
//! retrievable via [`mfpls_last_error_message`]. Handles are opaque;
//! every `*_new`/`*_fit`/`*_from_json` result must be released with the
//! matching `*_free`.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use mfpls::app::{build_basis, BasisSpec};
use mfpls::basis::SamplingGrid;
use mfpls::classify::{fit_plsda, ComponentsSpec, DiscriminantModel};
use mfpls::cv::{fit_with_cv, CvConfig, CvCriterion};
use mfpls::error::Error;
use mfpls::fdata::{smooth, FunctionalSample, RawDim, RawObservations};
use mfpls::io::model_json as mj;
use mfpls::pls::MfplsModel;
use nalgebra::DMatrix;

/// Stable status codes mirroring the library's error taxonomy.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MfplsStatus {
    Ok = 0,
    NonSpdGram = 1,
    RankDeficient = 2,
    BasisMismatch = 3,
    DimensionMismatch = 4,
    ZeroCovariance = 5,
    DegenerateComponent = 6,
    SingularSystem = 7,
    InsufficientData = 8,
    SingleClass = 9,
    EmptyNode = 10,
    SingularCovariance = 11,
    Validation = 12,
    Io = 13,
    Csv = 14,
    Json = 15,
    NullPointer = 16,
    Utf8 = 17,
    Panic = 18,
}

fn status_of(e: &Error) -> MfplsStatus {
    match e.code() {
        "NonSpdGram" => MfplsStatus::NonSpdGram,
        "RankDeficient" => MfplsStatus::RankDeficient,
        "BasisMismatch" => MfplsStatus::BasisMismatch,
        "DimensionMismatch" => MfplsStatus::DimensionMismatch,
        "ZeroCovariance" => MfplsStatus::ZeroCovariance,
        "DegenerateComponent" => MfplsStatus::DegenerateComponent,
        "SingularSystem" => MfplsStatus::SingularSystem,
        "InsufficientData" => MfplsStatus::InsufficientData,
        "SingleClass" => MfplsStatus::SingleClass,
        "EmptyNode" => MfplsStatus::EmptyNode,
        "SingularCovariance" => MfplsStatus::SingularCovariance,
        "Validation" => MfplsStatus::Validation,
        "Io" => MfplsStatus::Io,
        "Csv" => MfplsStatus::Csv,
        _ => MfplsStatus::Json,
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg).unwrap_or_else(|_| CString::new("invalid error message").unwrap());
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(e: &Error) -> MfplsStatus {
    set_error(e.to_string());
    status_of(e)
}

/// Run a fallible body behind a panic guard.
fn guarded<F: FnOnce() -> MfplsStatus>(f: F) -> MfplsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic".into());
            MfplsStatus::Panic
        }
    }
}

/// Message of the most recent error on this thread, or null when none.
/// The pointer stays valid until the next failing call on the thread.
#[no_mangle]
pub extern "C" fn mfpls_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn mfpls_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr() as *const c_char
}

/// In-memory dataset under construction: one call per functional dimension.
pub struct MfplsDataset {
    dims: Vec<RawDim>,
}

/// A fitted regression model.
pub struct MfplsRegression {
    model: MfplsModel,
}

/// A fitted binary discriminant model.
pub struct MfplsClassifier {
    model: DiscriminantModel,
}

/// Create an empty dataset builder.
#[no_mangle]
pub extern "C" fn mfpls_dataset_new() -> *mut MfplsDataset {
    Box::into_raw(Box::new(MfplsDataset { dims: Vec::new() }))
}

/// Release a dataset.
///
/// # Safety
/// `ds` must be a pointer returned by [`mfpls_dataset_new`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mfpls_dataset_free(ds: *mut MfplsDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Append a curve dimension: `grid` holds `grid_len` sampling points and
/// `values` holds `n_obs * grid_len` observations, row-major.
///
/// # Safety
/// `ds` must be a live dataset handle; `grid` and `values` must point to
/// readable arrays of the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn mfpls_dataset_add_curve_dim(
    ds: *mut MfplsDataset,
    grid: *const f64,
    grid_len: usize,
    values: *const f64,
    n_obs: usize,
) -> MfplsStatus {
    guarded(|| {
        if ds.is_null() || grid.is_null() || values.is_null() {
            set_error("null pointer".into());
            return MfplsStatus::NullPointer;
        }
        let ds = &mut *ds;
        let grid = slice::from_raw_parts(grid, grid_len).to_vec();
        let vals = slice::from_raw_parts(values, n_obs * grid_len);
        let matrix = DMatrix::from_fn(n_obs, grid_len, |i, j| vals[i * grid_len + j]);
        ds.dims.push(RawDim { grid: SamplingGrid::OneD(grid), values: matrix });
        MfplsStatus::Ok
    })
}

/// Append an image dimension: `u`/`v` hold the coordinates of `n_points`
/// pixels and `values` holds `n_obs * n_points` observations, row-major.
///
/// # Safety
/// `ds` must be a live dataset handle; `u`, `v` and `values` must point to
/// readable arrays of the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn mfpls_dataset_add_image_dim(
    ds: *mut MfplsDataset,
    u: *const f64,
    v: *const f64,
    n_points: usize,
    values: *const f64,
    n_obs: usize,
) -> MfplsStatus {
    guarded(|| {
        if ds.is_null() || u.is_null() || v.is_null() || values.is_null() {
            set_error("null pointer".into());
            return MfplsStatus::NullPointer;
        }
        let ds = &mut *ds;
        let us = slice::from_raw_parts(u, n_points);
        let vs = slice::from_raw_parts(v, n_points);
        let pts: Vec<(f64, f64)> = us.iter().cloned().zip(vs.iter().cloned()).collect();
        let vals = slice::from_raw_parts(values, n_obs * n_points);
        let matrix = DMatrix::from_fn(n_obs, n_points, |i, j| vals[i * n_points + j]);
        ds.dims.push(RawDim { grid: SamplingGrid::TwoD(pts), values: matrix });
        MfplsStatus::Ok
    })
}

/// Number of observations currently in the dataset (0 when empty).
///
/// # Safety
/// `ds` must be a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn mfpls_dataset_n_obs(ds: *const MfplsDataset) -> usize {
    if ds.is_null() {
        return 0;
    }
    (*ds).dims.first().map_or(0, |d| d.values.nrows())
}

unsafe fn smooth_dataset(
    ds: *const MfplsDataset,
    basis_u: *const usize,
    basis_v: *const usize,
) -> Result<FunctionalSample, Error> {
    let ds = &*ds;
    if ds.dims.is_empty() {
        return Err(Error::Validation("dataset has no dimensions".into()));
    }
    let d = ds.dims.len();
    let bu = slice::from_raw_parts(basis_u, d);
    let bv = slice::from_raw_parts(basis_v, d);
    let raw = RawObservations::new(ds.dims.clone())?;
    let bases = raw
        .dims
        .iter()
        .zip(bu.iter().zip(bv))
        .map(|(rd, (&mu, &mv))| {
            let spec = if mv == 0 { BasisSpec::OneD(mu) } else { BasisSpec::TwoD(mu, mv) };
            build_basis(spec, rd)
        })
        .collect::<Result<Vec<_>, _>>()?;
    smooth(&raw, &bases)
}

unsafe fn smooth_onto_bases(
    ds: *const MfplsDataset,
    bases: &[mfpls::basis::BasisSystem],
) -> Result<FunctionalSample, Error> {
    let ds = &*ds;
    let raw = RawObservations::new(ds.dims.clone())?;
    smooth(&raw, bases)
}

/// Fit a regression model. `basis_u[j]`/`basis_v[j]` give the per-dimension
/// basis sizes (`basis_v[j] = 0` marks a curve dimension). `n_components`
/// of 0 requests cross-validated selection with `cv_folds` folds over
/// `1..=h_max`.
///
/// # Safety
/// `ds` must be a live dataset handle with `n` observations; `y` must hold
/// `n` readable values; `basis_u`/`basis_v` must hold one entry per
/// dimension; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mfpls_fit_regression(
    ds: *const MfplsDataset,
    y: *const f64,
    n: usize,
    basis_u: *const usize,
    basis_v: *const usize,
    n_components: usize,
    cv_folds: usize,
    h_max: usize,
    seed: u64,
    out: *mut *mut MfplsRegression,
) -> MfplsStatus {
    guarded(|| {
        if ds.is_null() || y.is_null() || basis_u.is_null() || basis_v.is_null() || out.is_null() {
            set_error("null pointer".into());
            return MfplsStatus::NullPointer;
        }
        let sample = match smooth_dataset(ds, basis_u, basis_v) {
            Ok(s) => s,
            Err(e) => return fail(&e),
        };
        let y = slice::from_raw_parts(y, n);
        let result = if n_components == 0 {
            let cfg = CvConfig {
                h_grid: (1..=h_max.max(1)).collect(),
                k_folds: cv_folds,
                criterion: CvCriterion::Mse,
                seed,
            };
            fit_with_cv(&sample, y, &cfg).map(|(m, _)| m)
        } else {
            MfplsModel::fit(&sample, y, n_components)
        };
        match result {
            Ok(model) => {
                *out = Box::into_raw(Box::new(MfplsRegression { model }));
                MfplsStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Release a regression model.
///
/// # Safety
/// `m` must come from a successful fit or JSON load, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mfpls_regression_free(m: *mut MfplsRegression) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Number of PLS components of a fitted regression model.
///
/// # Safety
/// `m` must be a live regression handle.
#[no_mangle]
pub unsafe extern "C" fn mfpls_regression_n_components(m: *const MfplsRegression) -> usize {
    if m.is_null() {
        return 0;
    }
    (*m).model.n_components
}

/// Predict responses for a dataset with the same dimension layout as the
/// training data. `out` receives one value per observation.
///
/// # Safety
/// `m` and `ds` must be live handles; `out` must hold `out_len` writable
/// slots with `out_len` equal to the dataset's observation count.
#[no_mangle]
pub unsafe extern "C" fn mfpls_regression_predict(
    m: *const MfplsRegression,
    ds: *const MfplsDataset,
    out: *mut f64,
    out_len: usize,
) -> MfplsStatus {
    guarded(|| {
        if m.is_null() || ds.is_null() || out.is_null() {
            set_error("null pointer".into());
            return MfplsStatus::NullPointer;
        }
        let model = &(*m).model;
        let sample = match smooth_onto_bases(ds, &model.bases) {
            Ok(s) => s,
            Err(e) => return fail(&e),
        };
        if sample.n() != out_len {
            set_error(format!("output length {} but {} observations", out_len, sample.n()));
            return MfplsStatus::DimensionMismatch;
        }
        match model.predict(&sample) {
            Ok(preds) => {
                let dst = slice::from_raw_parts_mut(out, out_len);
                dst.copy_from_slice(&preds);
                MfplsStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Serialize a regression model to JSON. Free the string with
/// [`mfpls_string_free`]. Returns null on failure.
///
/// # Safety
/// `m` must be a live regression handle.
#[no_mangle]
pub unsafe extern "C" fn mfpls_regression_to_json(m: *const MfplsRegression) -> *mut c_char {
    if m.is_null() {
        set_error("null pointer".into());
        return ptr::null_mut();
    }
    let doc = mj::model_to_doc(&(*m).model);
    match serde_json::to_string_pretty(&doc) {
        Ok(s) => CString::new(s).map_or(ptr::null_mut(), CString::into_raw),
        Err(e) => {
            set_error(e.to_string());
            ptr::null_mut()
        }
    }
}

/// Load a regression model from JSON. Returns null on failure.
///
/// # Safety
/// `json` must be a NUL-terminated UTF-8 string.
#[no_mangle]
pub unsafe extern "C" fn mfpls_regression_from_json(json: *const c_char) -> *mut MfplsRegression {
    if json.is_null() {
        set_error("null pointer".into());
        return ptr::null_mut();
    }
    let Ok(text) = CStr::from_ptr(json).to_str() else {
        set_error("invalid UTF-8".into());
        return ptr::null_mut();
    };
    let doc: mj::RegressionModelDoc = match serde_json::from_str(text) {
        Ok(d) => d,
        Err(e) => {
            set_error(e.to_string());
            return ptr::null_mut();
        }
    };
    match mj::model_from_doc(doc) {
        Ok(model) => Box::into_raw(Box::new(MfplsRegression { model })),
        Err(e) => {
            fail(&e);
            ptr::null_mut()
        }
    }
}

/// Fit a binary discriminant model; `labels` hold 0/1 values. The
/// component arguments behave as in [`mfpls_fit_regression`] (0 selects by
/// stratified cross-validation on AUC).
///
/// # Safety
/// As for [`mfpls_fit_regression`], with `labels` holding `n` readable
/// bytes.
#[no_mangle]
pub unsafe extern "C" fn mfpls_fit_classifier(
    ds: *const MfplsDataset,
    labels: *const u8,
    n: usize,
    basis_u: *const usize,
    basis_v: *const usize,
    n_components: usize,
    cv_folds: usize,
    h_max: usize,
    seed: u64,
    out: *mut *mut MfplsClassifier,
) -> MfplsStatus {
    guarded(|| {
        if ds.is_null() || labels.is_null() || basis_u.is_null() || basis_v.is_null() || out.is_null() {
            set_error("null pointer".into());
            return MfplsStatus::NullPointer;
        }
        let sample = match smooth_dataset(ds, basis_u, basis_v) {
            Ok(s) => s,
            Err(e) => return fail(&e),
        };
        let labels = slice::from_raw_parts(labels, n);
        let spec = if n_components == 0 {
            ComponentsSpec::Cv { k_folds: cv_folds, h_max: h_max.max(1), seed }
        } else {
            ComponentsSpec::Fixed(n_components)
        };
        match fit_plsda(&sample, labels, spec) {
            Ok(model) => {
                *out = Box::into_raw(Box::new(MfplsClassifier { model }));
                MfplsStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Release a classifier.
///
/// # Safety
/// `m` must come from a successful fit or JSON load, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mfpls_classifier_free(m: *mut MfplsClassifier) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Discriminant scores (positive favours class 0) and hard class
/// predictions. Either output pointer may be null to skip it.
///
/// # Safety
/// `m` and `ds` must be live handles; non-null outputs must hold `out_len`
/// writable slots, with `out_len` equal to the observation count.
#[no_mangle]
pub unsafe extern "C" fn mfpls_classifier_predict(
    m: *const MfplsClassifier,
    ds: *const MfplsDataset,
    scores_out: *mut f64,
    classes_out: *mut u8,
    out_len: usize,
) -> MfplsStatus {
    guarded(|| {
        if m.is_null() || ds.is_null() {
            set_error("null pointer".into());
            return MfplsStatus::NullPointer;
        }
        let model = &(*m).model;
        let bases: Vec<mfpls::basis::BasisSystem> =
            model.beta.dims.iter().map(|d| d.basis.clone()).collect();
        let sample = match smooth_onto_bases(ds, &bases) {
            Ok(s) => s,
            Err(e) => return fail(&e),
        };
        if sample.n() != out_len {
            set_error(format!("output length {} but {} observations", out_len, sample.n()));
            return MfplsStatus::DimensionMismatch;
        }
        match mfpls::classify::predict(model, &sample) {
            Ok((scores, classes)) => {
                if !scores_out.is_null() {
                    slice::from_raw_parts_mut(scores_out, out_len).copy_from_slice(&scores);
                }
                if !classes_out.is_null() {
                    slice::from_raw_parts_mut(classes_out, out_len).copy_from_slice(&classes);
                }
                MfplsStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Serialize a classifier to JSON. Free with [`mfpls_string_free`].
///
/// # Safety
/// `m` must be a live classifier handle.
#[no_mangle]
pub unsafe extern "C" fn mfpls_classifier_to_json(m: *const MfplsClassifier) -> *mut c_char {
    if m.is_null() {
        set_error("null pointer".into());
        return ptr::null_mut();
    }
    let doc = mj::discriminant_to_doc(&(*m).model);
    match serde_json::to_string_pretty(&doc) {
        Ok(s) => CString::new(s).map_or(ptr::null_mut(), CString::into_raw),
        Err(e) => {
            set_error(e.to_string());
            ptr::null_mut()
        }
    }
}

/// Load a classifier from JSON. Returns null on failure.
///
/// # Safety
/// `json` must be a NUL-terminated UTF-8 string.
#[no_mangle]
pub unsafe extern "C" fn mfpls_classifier_from_json(json: *const c_char) -> *mut MfplsClassifier {
    if json.is_null() {
        set_error("null pointer".into());
        return ptr::null_mut();
    }
    let Ok(text) = CStr::from_ptr(json).to_str() else {
        set_error("invalid UTF-8".into());
        return ptr::null_mut();
    };
    let doc: mj::DiscriminantModelDoc = match serde_json::from_str(text) {
        Ok(d) => d,
        Err(e) => {
            set_error(e.to_string());
            return ptr::null_mut();
        }
    };
    match mj::discriminant_from_doc(doc) {
        Ok(model) => Box::into_raw(Box::new(MfplsClassifier { model })),
        Err(e) => {
            fail(&e);
            ptr::null_mut()
        }
    }
}

/// Release a string returned by a `*_to_json` function.
///
/// # Safety
/// `s` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn mfpls_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

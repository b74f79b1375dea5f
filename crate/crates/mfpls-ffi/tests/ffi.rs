//! Exercise the C ABI end to end from Rust, and syntax-check the generated
//! header with a C compiler when one is available.

use std::ffi::CStr;

use mfpls_ffi::*;

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// A small curve+image dataset whose label depends on both dimensions.
fn build_dataset(n: usize, shift: f64) -> (*mut MfplsDataset, Vec<u8>, Vec<f64>) {
    let grid = linspace(0.0, 1.0, 40);
    let pixels = 8usize;
    let axis = linspace(0.0, 1.0, pixels);
    let mut u = Vec::new();
    let mut v = Vec::new();
    for &b in &axis {
        for &a in &axis {
            u.push(a);
            v.push(b);
        }
    }
    let mut rng = mfpls::rng::substream(2025, 0, 0);
    use rand::Rng;
    let labels: Vec<u8> = (0..n).map(|i| (i % 2) as u8).collect();
    let mut curve_vals = Vec::with_capacity(n * grid.len());
    let mut image_vals = Vec::with_capacity(n * u.len());
    for i in 0..n {
        let bump = if labels[i] == 1 { shift } else { 0.0 };
        for &t in &grid {
            curve_vals.push(bump * (std::f64::consts::PI * t).sin() + 0.1 * (rng.gen::<f64>() - 0.5));
        }
        for k in 0..u.len() {
            image_vals.push(bump * u[k] * v[k] + 0.1 * (rng.gen::<f64>() - 0.5));
        }
    }
    let y: Vec<f64> = (0..n)
        .map(|i| labels[i] as f64 * 2.0 + 0.05 * (rng.gen::<f64>() - 0.5))
        .collect();

    let ds = mfpls_dataset_new();
    unsafe {
        assert_eq!(
            mfpls_dataset_add_curve_dim(ds, grid.as_ptr(), grid.len(), curve_vals.as_ptr(), n),
            MfplsStatus::Ok
        );
        assert_eq!(
            mfpls_dataset_add_image_dim(ds, u.as_ptr(), v.as_ptr(), u.len(), image_vals.as_ptr(), n),
            MfplsStatus::Ok
        );
        assert_eq!(mfpls_dataset_n_obs(ds), n);
    }
    (ds, labels, y)
}

#[test]
fn regression_fit_predict_and_json_round_trip() {
    let n = 40;
    let (ds, _, y) = build_dataset(n, 1.5);
    unsafe {
        let basis_u = [8usize, 2];
        let basis_v = [0usize, 2];
        let mut model: *mut MfplsRegression = std::ptr::null_mut();
        let status = mfpls_fit_regression(
            ds,
            y.as_ptr(),
            n,
            basis_u.as_ptr(),
            basis_v.as_ptr(),
            0, // cross-validated
            5,
            6,
            7,
            &mut model,
        );
        assert_eq!(status, MfplsStatus::Ok, "{:?}", last_error());
        assert!(mfpls_regression_n_components(model) >= 1);

        let mut preds = vec![0.0; n];
        let status = mfpls_regression_predict(model, ds, preds.as_mut_ptr(), n);
        assert_eq!(status, MfplsStatus::Ok);
        // round trip through JSON preserves predictions bit for bit
        let json = mfpls_regression_to_json(model);
        assert!(!json.is_null());
        let reloaded = mfpls_regression_from_json(json);
        assert!(!reloaded.is_null());
        let mut preds2 = vec![0.0; n];
        assert_eq!(mfpls_regression_predict(reloaded, ds, preds2.as_mut_ptr(), n), MfplsStatus::Ok);
        for (a, b) in preds.iter().zip(&preds2) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        mfpls_string_free(json);
        mfpls_regression_free(reloaded);
        mfpls_regression_free(model);
        mfpls_dataset_free(ds);
    }
}

#[test]
fn classifier_fit_predict_and_errors() {
    let n = 60;
    let (ds, labels, _) = build_dataset(n, 2.5);
    unsafe {
        let basis_u = [8usize, 2];
        let basis_v = [0usize, 2];
        let mut model: *mut MfplsClassifier = std::ptr::null_mut();
        let status = mfpls_fit_classifier(
            ds,
            labels.as_ptr(),
            n,
            basis_u.as_ptr(),
            basis_v.as_ptr(),
            2,
            5,
            6,
            3,
            &mut model,
        );
        assert_eq!(status, MfplsStatus::Ok, "{:?}", last_error());
        let mut scores = vec![0.0; n];
        let mut classes = vec![0u8; n];
        assert_eq!(
            mfpls_classifier_predict(model, ds, scores.as_mut_ptr(), classes.as_mut_ptr(), n),
            MfplsStatus::Ok
        );
        let hits = classes.iter().zip(&labels).filter(|(a, b)| a == b).count();
        assert!(hits as f64 / n as f64 > 0.9, "accuracy {}", hits as f64 / n as f64);

        // single-class labels produce the matching status code
        let ones = vec![1u8; n];
        let mut m2: *mut MfplsClassifier = std::ptr::null_mut();
        let status = mfpls_fit_classifier(
            ds,
            ones.as_ptr(),
            n,
            basis_u.as_ptr(),
            basis_v.as_ptr(),
            1,
            5,
            6,
            3,
            &mut m2,
        );
        assert_eq!(status, MfplsStatus::SingleClass);
        assert!(!mfpls_last_error_message().is_null());

        // output pointers may be null to skip either output
        assert_eq!(
            mfpls_classifier_predict(model, ds, std::ptr::null_mut(), std::ptr::null_mut(), n),
            MfplsStatus::Ok
        );
        // a null dataset is rejected, never dereferenced
        assert_eq!(
            mfpls_fit_classifier(
                std::ptr::null(),
                labels.as_ptr(),
                n,
                basis_u.as_ptr(),
                basis_v.as_ptr(),
                1,
                5,
                6,
                3,
                &mut m2
            ),
            MfplsStatus::NullPointer
        );
        mfpls_classifier_free(model);
        mfpls_dataset_free(ds);
    }
}

#[test]
fn version_is_exposed() {
    let v = mfpls_version();
    assert!(!v.is_null());
    let s = unsafe { CStr::from_ptr(v) }.to_str().unwrap();
    assert!(!s.is_empty());
}

#[test]
fn generated_header_compiles_as_c() {
    let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("include/mfpls.h");
    assert!(header.exists(), "cbindgen header missing at {}", header.display());
    let text = std::fs::read_to_string(&header).unwrap();
    for symbol in [
        "mfpls_dataset_new",
        "mfpls_fit_regression",
        "mfpls_classifier_predict",
        "mfpls_last_error_message",
        "MfplsStatus",
    ] {
        assert!(text.contains(symbol), "header lacks {symbol}");
    }
    // syntax-check with the system C compiler when present
    let probe = std::process::Command::new("cc").arg("--version").output();
    if probe.is_ok() {
        let dir = std::env::temp_dir().join("mfpls_header_check");
        std::fs::create_dir_all(&dir).unwrap();
        let main_c = dir.join("check.c");
        std::fs::write(&main_c, "#include \"mfpls.h\"\nint main(void) { return 0; }\n").unwrap();
        let out = std::process::Command::new("cc")
            .arg("-fsyntax-only")
            .arg("-I")
            .arg(header.parent().unwrap())
            .arg(&main_c)
            .output()
            .unwrap();
        assert!(
            out.status.success(),
            "header does not compile: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

fn last_error() -> String {
    let p = mfpls_last_error_message();
    if p.is_null() {
        return String::new();
    }
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

use std::ffi::{CStr, CString};
use std::ptr;

use hps_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(hps_last_error_message()) }.to_string_lossy().into_owned()
}

fn ring(size: usize) -> Vec<u8> {
    let c = size as f64 / 2.0;
    (0..size * size)
        .map(|i| {
            let (x, y) = ((i % size) as f64, (i / size) as f64);
            let d = ((x - c).powi(2) + (y - c).powi(2)).sqrt();
            if (size as f64 * 0.25..size as f64 * 0.35).contains(&d) {
                255
            } else {
                0
            }
        })
        .collect()
}

const CASE: &str = r#"{"provenance":"t","entities":[{"id":"a","kind":"glyph"},{"id":"b","kind":"glyph"}],
  "facts":[{"functor":"above","args":["a","b"]},{"functor":"cause","args":[{"functor":"above","args":["a","b"]},{"functor":"big","args":["a"]}]}]}"#;

#[test]
fn case_json_round_trip_and_self_match() {
    unsafe {
        let json = CString::new(CASE).unwrap();
        let mut case = ptr::null_mut();
        assert_eq!(hps_case_from_json(json.as_ptr(), &mut case), HpsStatus::Ok);
        assert!(!case.is_null());
        assert_eq!(hps_case_fact_count(case), 2);

        let mut text = ptr::null_mut();
        assert_eq!(hps_case_to_json(case, &mut text), HpsStatus::Ok);
        let mut again = ptr::null_mut();
        assert_eq!(hps_case_from_json(text, &mut again), HpsStatus::Ok);
        hps_string_free(text);

        let mut score = -1.0;
        assert_eq!(hps_match_score(case, again, &mut score), HpsStatus::Ok);
        assert!((score - 1.0).abs() < 1e-12);
        hps_case_free(case);
        hps_case_free(again);
    }
}

#[test]
fn errors_map_to_status_codes() {
    unsafe {
        let mut case = ptr::null_mut();
        let bad = CString::new("{not json").unwrap();
        assert_eq!(hps_case_from_json(bad.as_ptr(), &mut case), HpsStatus::DataFormat);
        assert!(case.is_null());
        assert!(!last_error().is_empty());
        assert_eq!(hps_case_from_json(ptr::null(), &mut case), HpsStatus::InvalidArgument);
        assert!(last_error().contains("null"));
        let mut score = 0.0;
        assert_eq!(hps_match_score(ptr::null(), ptr::null(), &mut score), HpsStatus::InvalidArgument);
        hps_case_free(ptr::null_mut());
        hps_string_free(ptr::null_mut());
        hps_pools_free(ptr::null_mut());
    }
}

#[test]
fn encode_and_classify_through_pools() {
    let dir = tempfile::tempdir().unwrap();
    let size = 40;
    let img = ring(size);
    unsafe {
        let mut case = ptr::null_mut();
        assert_eq!(hps_encode_gray(img.as_ptr(), size, size, &mut case), HpsStatus::Ok);
        assert!(hps_case_fact_count(case) > 0);
        hps_case_free(case);

        // Train a one-concept model and classify the same image.
        let sample = hps_core::dataset::Sample {
            image: hps_core::raster::GrayImage::new(size, size, img.clone()).unwrap(),
            label: "ring".into(),
        };
        let cfg = hps_core::harness::ExperimentConfig::default();
        let out = hps_core::harness::run_on_samples(std::slice::from_ref(&sample), &[], &cfg).unwrap();
        out.model.save_dir(dir.path()).unwrap();

        let path = CString::new(dir.path().to_str().unwrap()).unwrap();
        let mut pools = ptr::null_mut();
        assert_eq!(hps_pools_load_dir(path.as_ptr(), ptr::null(), &mut pools), HpsStatus::Ok);
        let mut label = ptr::null_mut();
        assert_eq!(hps_pools_classify(pools, img.as_ptr(), size, size, &mut label), HpsStatus::Ok);
        assert_eq!(CStr::from_ptr(label).to_str().unwrap(), "ring");
        hps_string_free(label);
        assert_eq!(
            hps_pools_classify(pools, ptr::null(), size, size, &mut label),
            HpsStatus::InvalidArgument
        );
        hps_pools_free(pools);

        let missing = CString::new("/nonexistent/pools").unwrap();
        assert_eq!(hps_pools_load_dir(missing.as_ptr(), ptr::null(), &mut pools), HpsStatus::DataFormat);
    }
}

#[test]
fn header_declares_the_api_and_compiles_as_c() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/hps.h")).unwrap();
    for name in [
        "hps_last_error_message",
        "hps_string_free",
        "hps_case_from_json",
        "hps_case_to_json",
        "hps_case_free",
        "hps_match_score",
        "hps_encode_gray",
        "hps_pools_load_dir",
        "hps_pools_classify",
        "hps_pools_free",
        "HPS_STATUS_NO_CLASSIFICATION = 4",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
    // Syntax-check the header with the system C compiler when one exists.
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"hps.h\"\nint main(void) { HpsCase *c = 0; return (int)hps_case_fact_count(c); }\n",
    )
    .unwrap();
    let status = std::process::Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I", concat!(env!("CARGO_MANIFEST_DIR"), "/include")])
        .arg(&src)
        .status();
    if let Ok(status) = status {
        assert!(status.success(), "header does not compile as C99");
    }
}

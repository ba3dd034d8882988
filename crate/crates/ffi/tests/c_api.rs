use std::ffi::{CStr, CString};
use std::path::Path;
use std::ptr;

use causal_refine::io;
use causal_refine::synth::{generate, SyntheticSpec};
use causal_refine_ffi::*;

fn cstr(p: &Path) -> CString {
    CString::new(p.to_str().unwrap()).unwrap()
}

fn last_error() -> String {
    let p = cr_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned()
}

#[test]
fn pipeline_through_the_c_abi() {
    let dir = tempfile::tempdir().unwrap();
    let data = generate(&SyntheticSpec {
        n_train: 3000,
        ..SyntheticSpec::default()
    })
    .unwrap();
    let csv = dir.path().join("train.csv");
    let tiers = dir.path().join("tiers.json");
    io::save_dataset(&csv, &data.train).unwrap();
    io::save_tiers(&tiers, data.train.schema()).unwrap();

    unsafe {
        let mut ds = ptr::null_mut();
        assert_eq!(
            cr_dataset_load(cstr(&csv).as_ptr(), cstr(&tiers).as_ptr(), &mut ds),
            CrStatus::Ok
        );
        let (mut rows, mut cols) = (0, 0);
        assert_eq!(cr_dataset_shape(ds, &mut rows, &mut cols), CrStatus::Ok);
        assert_eq!((rows, cols), (3000, 13));

        let mut g = ptr::null_mut();
        assert_eq!(cr_discover(ds, 0.05, 3, false, false, &mut g), CrStatus::Ok);
        let mut dag = false;
        assert_eq!(cr_graph_is_dag(g, &mut dag), CrStatus::Ok);
        assert!(dag);

        let mut json = ptr::null_mut();
        assert_eq!(cr_graph_to_json(g, &mut json), CrStatus::Ok);
        let mut g2 = ptr::null_mut();
        assert_eq!(cr_graph_from_json(json, &mut g2), CrStatus::Ok);
        let (mut e1, mut e2) = (0, 0);
        cr_graph_n_edges(g, &mut e1);
        cr_graph_n_edges(g2, &mut e2);
        assert_eq!(e1, e2);
        assert!(e1 > 0);
        cr_string_free(json);

        let mut dot = ptr::null_mut();
        assert_eq!(cr_graph_to_dot(g, &mut dot), CrStatus::Ok);
        assert!(CStr::from_ptr(dot).to_str().unwrap().starts_with("digraph"));
        cr_string_free(dot);

        let mut cpts = ptr::null_mut();
        assert_eq!(cr_fit_cpts(ds, g, 1.0, &mut cpts), CrStatus::Ok);
        let mut cj = ptr::null_mut();
        assert_eq!(cr_cpts_to_json(cpts, &mut cj), CrStatus::Ok);
        cr_string_free(cj);

        let init = data.base_beliefs[0].values().to_vec();
        let mut out = vec![0.0; 13];
        assert_eq!(
            cr_refine(g, cpts, init.as_ptr(), 13, 0.0, 20, out.as_mut_ptr()),
            CrStatus::Ok
        );
        let clipped: Vec<f64> = init
            .iter()
            .map(|&v| causal_refine::model::clip(v))
            .collect();
        assert_eq!(out, clipped);
        assert_eq!(
            cr_refine(g, cpts, init.as_ptr(), 12, 0.01, 20, out.as_mut_ptr()),
            CrStatus::SchemaMismatch
        );
        assert!(last_error().starts_with("error[SchemaMismatch]"));
        assert_eq!(
            cr_refine(g, cpts, init.as_ptr(), 13, 1.5, 20, out.as_mut_ptr()),
            CrStatus::InvalidArgument
        );

        cr_cpts_free(cpts);
        cr_graph_free(g2);
        cr_graph_free(g);
        cr_dataset_free(ds);
    }
}

#[test]
fn selection_and_scoring() {
    let values = [0.95, 0.5, 0.49, 0.05];
    let mut idx = [usize::MAX; 4];
    let mut len = 0;
    unsafe {
        assert_eq!(
            cr_select_labels(values.as_ptr(), 4, 0.1, idx.as_mut_ptr(), &mut len),
            CrStatus::Ok
        );
        assert_eq!(&idx[..len], &[0]);
        assert_eq!(
            cr_select_labels(values.as_ptr(), 4, 0.0, idx.as_mut_ptr(), &mut len),
            CrStatus::InvalidArgument
        );

        let (p, t) = ([0usize, 1, 2, 3, 9], [0usize, 1, 2, 3, 4, 5]);
        let mut f = 0.0;
        assert_eq!(
            cr_f_measure(p.as_ptr(), 5, t.as_ptr(), 6, &mut f),
            CrStatus::Ok
        );
        assert_eq!(f, 8.0 / 11.0);
        assert_eq!(
            cr_f_measure(ptr::null(), 0, ptr::null(), 0, &mut f),
            CrStatus::Ok
        );
        assert_eq!(f, 1.0);
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    unsafe {
        let mut ds = ptr::null_mut();
        let missing = CString::new("/nonexistent/data.csv").unwrap();
        assert_eq!(
            cr_dataset_load(missing.as_ptr(), missing.as_ptr(), &mut ds),
            CrStatus::Io
        );
        assert!(ds.is_null());
        assert!(last_error().contains("/nonexistent"));

        assert_eq!(
            cr_dataset_load(ptr::null(), missing.as_ptr(), &mut ds),
            CrStatus::NullPointer
        );
        let mut dag = false;
        assert_eq!(
            cr_graph_is_dag(ptr::null(), &mut dag),
            CrStatus::NullPointer
        );

        let mut g = ptr::null_mut();
        let bad = CString::new("{not json").unwrap();
        assert_eq!(cr_graph_from_json(bad.as_ptr(), &mut g), CrStatus::Parse);

        let mut f = 0.0;
        assert_eq!(
            cr_f_measure(ptr::null(), 0, ptr::null(), 0, &mut f),
            CrStatus::Ok
        );
        assert!(cr_last_error_message().is_null());

        cr_graph_free(ptr::null_mut());
        cr_dataset_free(ptr::null_mut());
        cr_cpts_free(ptr::null_mut());
        cr_string_free(ptr::null_mut());
    }
}

#[test]
fn header_declares_the_api_and_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/causal_refine.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in [
        "cr_dataset_load",
        "cr_discover",
        "cr_graph_to_json",
        "cr_graph_to_dot",
        "cr_graph_is_dag",
        "cr_fit_cpts",
        "cr_refine",
        "cr_select_labels",
        "cr_f_measure",
        "cr_last_error_message",
        "CR_STATUS_NOT_FULLY_ORIENTED",
    ] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let Ok(status) = std::process::Command::new("cc")
        .args(["-std=c99", "-fsyntax-only", "-x", "c"])
        .arg(&header)
        .status()
    else {
        eprintln!("no C compiler; syntax check skipped");
        return;
    };
    assert!(status.success());
}

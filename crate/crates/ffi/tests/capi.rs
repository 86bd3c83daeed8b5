use std::ffi::{CStr, CString};
use std::ptr;

use ricsim::nn::{persist, ModelConfig, RecurrentModel};
use ricsim::sim::{run, HoMode, RunOptions, Scenario};
use ricsim_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(ricsim_last_error()) }.to_str().unwrap().to_owned()
}

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

const SCENARIO: &str = r#"{"duration_ms": 30000, "seed": 4}"#;

#[test]
fn run_matches_the_library() {
    let mut h = ptr::null_mut();
    let st = unsafe { ricsim_run_scenario(c(SCENARIO).as_ptr(), c("oracle").as_ptr(), ptr::null(), &mut h) };
    assert_eq!(st, RicsimStatus::Ok, "{}", last_error());
    let direct = run(&Scenario::from_json(SCENARIO).unwrap(), &RunOptions { mode: HoMode::Oracle, model: None }).unwrap();

    let json = unsafe { CStr::from_ptr(ricsim_run_aggregates_json(h)) }.to_str().unwrap().to_owned();
    assert_eq!(json, direct.metrics.aggregates_json());
    let mut v = 0.0;
    assert_eq!(unsafe { ricsim_run_metric(h, c("mean_delay_ms").as_ptr(), &mut v) }, RicsimStatus::Ok);
    assert_eq!(v, direct.metrics.aggregates.mean_delay_ms);
    assert_eq!(unsafe { ricsim_run_handover_count(h) }, direct.handovers.len() as u64);

    assert_eq!(unsafe { ricsim_run_metric(h, c("bogus").as_ptr(), &mut v) }, RicsimStatus::UnknownMetric);
    assert!(last_error().contains("bogus"));
    unsafe { ricsim_run_free(h) };
}

#[test]
fn bad_inputs_map_to_status_codes() {
    let mut h = ptr::null_mut();
    let st = unsafe { ricsim_run_scenario(c(r#"{"duration_ms": 0}"#).as_ptr(), c("default").as_ptr(), ptr::null(), &mut h) };
    assert_eq!(st, RicsimStatus::Config);
    assert!(!last_error().is_empty());
    assert!(h.is_null());

    let st = unsafe { ricsim_run_scenario(c(SCENARIO).as_ptr(), c("lstm").as_ptr(), ptr::null(), &mut h) };
    assert_eq!(st, RicsimStatus::Model);

    let st = unsafe { ricsim_run_scenario(c(SCENARIO).as_ptr(), c("psychic").as_ptr(), ptr::null(), &mut h) };
    assert_eq!(st, RicsimStatus::Config);

    let st = unsafe { ricsim_run_scenario(ptr::null(), c("default").as_ptr(), ptr::null(), &mut h) };
    assert_eq!(st, RicsimStatus::NullArgument);

    let bad = [0xffu8, 0xfe, 0];
    let st = unsafe { ricsim_run_scenario(bad.as_ptr().cast(), c("default").as_ptr(), ptr::null(), &mut h) };
    assert_eq!(st, RicsimStatus::InvalidUtf8);

    // success clears the message
    let mut f = 0.0;
    let mut p = 0.0;
    let a = [1.0, 2.0, 3.0];
    assert_eq!(unsafe { ricsim_anova(a.as_ptr(), 3, a.as_ptr(), 3, &mut f, &mut p) }, RicsimStatus::Ok);
    assert_eq!(last_error(), "");

    // null handles are harmless
    unsafe {
        ricsim_run_free(ptr::null_mut());
        ricsim_model_free(ptr::null_mut());
        ricsim_string_free(ptr::null_mut());
        ricsim_bytes_free(ptr::null_mut(), 0);
        assert!(ricsim_run_aggregates_json(ptr::null()).is_null());
        assert_eq!(ricsim_run_handover_count(ptr::null()), 0);
        assert_eq!(ricsim_model_lookback(ptr::null()), 0);
    }
}

#[test]
fn e2_round_trip_through_json() {
    let json = r#"{"RicControlRequest":{"node_id":2,"ue_id":7,"control":{"target_cell":3,"ttt_ms":2000}}}"#;
    let mut bytes = ptr::null_mut();
    let mut len = 0;
    assert_eq!(unsafe { ricsim_e2_encode(c(json).as_ptr(), &mut bytes, &mut len) }, RicsimStatus::Ok, "{}", last_error());
    let wire = unsafe { std::slice::from_raw_parts(bytes, len) }.to_vec();
    assert_eq!(wire[8..], [0, 0, 0, 2, 0, 0, 0, 7, 0, 0, 0, 3, 0, 0, 0x07, 0xD0]);

    let mut out = ptr::null_mut();
    assert_eq!(unsafe { ricsim_e2_decode(bytes, len, &mut out) }, RicsimStatus::Ok);
    let back = unsafe { CStr::from_ptr(out) }.to_str().unwrap().to_owned();
    assert_eq!(back, json);
    unsafe {
        ricsim_string_free(out);
        ricsim_bytes_free(bytes, len);
    }

    assert_eq!(unsafe { ricsim_e2_decode(wire.as_ptr(), 5, &mut out) }, RicsimStatus::Codec);
    assert_eq!(unsafe { ricsim_e2_encode(c("{}").as_ptr(), &mut bytes, &mut len) }, RicsimStatus::Codec);
}

#[test]
fn anova_matches_the_hand_example() {
    let a = [1.0, 2.0, 3.0];
    let b = [2.0, 3.0, 4.0];
    let (mut f, mut p) = (0.0, 0.0);
    assert_eq!(unsafe { ricsim_anova(a.as_ptr(), 3, b.as_ptr(), 3, &mut f, &mut p) }, RicsimStatus::Ok);
    assert!((f - 1.5).abs() < 1e-12);
    assert!(p > 0.0 && p < 1.0);
    assert_eq!(unsafe { ricsim_anova(a.as_ptr(), 1, b.as_ptr(), 3, &mut f, &mut p) }, RicsimStatus::Stats);
    assert_eq!(unsafe { ricsim_anova(ptr::null(), 3, b.as_ptr(), 3, &mut f, &mut p) }, RicsimStatus::NullArgument);
}

#[test]
fn model_load_and_predict() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    let model = RecurrentModel::new(ModelConfig { units: vec![4], lookback: 5, ..ModelConfig::gru() }).unwrap();
    persist::save(&model, &path).unwrap();

    let mut h = ptr::null_mut();
    assert_eq!(unsafe { ricsim_model_load(c(path.to_str().unwrap()).as_ptr(), &mut h) }, RicsimStatus::Ok);
    assert_eq!(unsafe { ricsim_model_lookback(h) }, 5);
    let w = [-90.0, -91.0, -92.0, -91.5, -90.5];
    let mut y = 0.0;
    assert_eq!(unsafe { ricsim_model_predict(h, w.as_ptr(), w.len(), &mut y) }, RicsimStatus::Ok);
    assert_eq!(y, model.predict_dbm(&w).unwrap());
    assert_eq!(unsafe { ricsim_model_predict(h, w.as_ptr(), 3, &mut y) }, RicsimStatus::Model);

    // a model handle drives the learned modes
    let mut r = ptr::null_mut();
    let st = unsafe { ricsim_run_scenario(c(r#"{"duration_ms": 20000}"#).as_ptr(), c("gru").as_ptr(), h, &mut r) };
    assert_eq!(st, RicsimStatus::Ok, "{}", last_error());
    unsafe {
        ricsim_run_free(r);
        ricsim_model_free(h);
    }

    let missing = dir.path().join("none.json");
    assert_eq!(unsafe { ricsim_model_load(c(missing.to_str().unwrap()).as_ptr(), &mut h) }, RicsimStatus::Model);
}

#[test]
fn header_declares_the_api() {
    let header = include_str!("../include/ricsim.h");
    for sym in [
        "typedef struct RicsimRun RicsimRun",
        "typedef struct RicsimModel RicsimModel",
        "RICSIM_STATUS_OK = 0",
        "ricsim_last_error",
        "ricsim_run_scenario",
        "ricsim_run_metric",
        "ricsim_run_free",
        "ricsim_model_load",
        "ricsim_model_predict",
        "ricsim_e2_encode",
        "ricsim_e2_decode",
        "ricsim_bytes_free",
        "ricsim_string_free",
        "ricsim_anova",
    ] {
        assert!(header.contains(sym), "{sym}");
    }
}

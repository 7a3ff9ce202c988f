use std::ffi::{c_char, CStr, CString};
use std::ptr;

use toponame_ffi::*;

const TRIANGLE_TAIL: &str = r#"{
  "id": "tri", "type": "other",
  "nodes": [
    {"id": 1, "x": 0, "y": 0, "z": 0},
    {"id": 2, "x": 1, "y": 0, "z": 0},
    {"id": 3, "x": 0, "y": 1, "z": 0},
    {"id": 4, "x": -1, "y": 0, "z": 0}
  ],
  "edges": [{"u": 1, "v": 2}, {"u": 2, "v": 3}, {"u": 3, "v": 1}, {"u": 1, "v": 4}]
}"#;

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

unsafe fn take(s: *mut c_char) -> String {
    let out = CStr::from_ptr(s).to_str().unwrap().to_owned();
    tn_string_free(s);
    out
}

unsafe fn last_error() -> String {
    CStr::from_ptr(tn_last_error_message()).to_string_lossy().into_owned()
}

unsafe fn parsed(name: &str) -> *mut TnReduced {
    let mut g = ptr::null_mut();
    let mut pos = 0usize;
    assert_eq!(tn_parse_name(cstr(name).as_ptr(), &mut g, &mut pos), TnStatus::Ok);
    g
}

#[test]
fn skeleton_reduce_and_name() {
    unsafe {
        let mut sk = ptr::null_mut();
        assert_eq!(tn_skeleton_from_json(cstr(TRIANGLE_TAIL).as_ptr(), &mut sk), TnStatus::Ok);
        let mut red = ptr::null_mut();
        assert_eq!(tn_reduce(sk, 0.0, false, true, true, &mut red), TnStatus::Ok);

        let (mut n, mut e, mut c) = (0usize, 0usize, 0usize);
        assert_eq!(tn_reduced_counts(red, &mut n, &mut e, &mut c), TnStatus::Ok);
        assert_eq!(c, 1);
        assert_eq!(e, n);

        let mut name = ptr::null_mut();
        assert_eq!(tn_name(red, TnObjectType::FromGraph, &mut name), TnStatus::Ok);
        assert_eq!(take(name), "1-monocyclotrioid");

        tn_reduced_free(red);
        tn_skeleton_free(sk);
    }
}

#[test]
fn json_round_trip() {
    unsafe {
        let g = parsed("2-monotriito");
        let mut json = ptr::null_mut();
        assert_eq!(tn_reduced_to_json(g, &mut json), TnStatus::Ok);
        let text = take(json);
        let mut back = ptr::null_mut();
        assert_eq!(tn_reduced_from_json(cstr(&text).as_ptr(), &mut back), TnStatus::Ok);
        let mut name = ptr::null_mut();
        assert_eq!(tn_name(back, TnObjectType::Mito, &mut name), TnStatus::Ok);
        assert_eq!(take(name), "2-monotriito");
        tn_reduced_free(back);
        tn_reduced_free(g);
    }
}

#[test]
fn parse_error_reports_position() {
    unsafe {
        let mut g = ptr::null_mut();
        let mut pos = usize::MAX;
        let st = tn_parse_name(cstr("9-monotriito").as_ptr(), &mut g, &mut pos);
        assert_eq!(st, TnStatus::ParseError);
        assert!(g.is_null());
        assert_eq!(pos, 0);
        assert!(!last_error().is_empty());
    }
}

#[test]
fn spectrum_cosine_triangle_vs_path() {
    unsafe {
        let k3 = parsed("cyclotriito");
        let p3 = parsed("triito");
        let mut cos = 0.0;
        assert_eq!(tn_spectrum_cosine(k3, p3, &mut cos), TnStatus::Ok);
        assert!((cos - 0.894427191).abs() < 1e-6, "{cos}");
        tn_reduced_free(k3);
        tn_reduced_free(p3);
    }
}

#[test]
fn model_similarity_of_identical_graphs_is_zero() {
    let model = toponame::embed::EmbedModel::new(toponame::embed::Hyper::default());
    let json = toponame::embed::save_model(&model);
    unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(tn_model_from_json(cstr(&json).as_ptr(), &mut m), TnStatus::Ok);
        let a = parsed("bicyclo[1.1.0]tetrito");
        let b = parsed("bicyclo[1.1.0]tetrito");
        let mut s = f64::NAN;
        assert_eq!(tn_graph_similarity(m, a, b, &mut s), TnStatus::Ok);
        assert!(s.abs() < 1e-9);
        tn_reduced_free(a);
        tn_reduced_free(b);
        tn_model_free(m);
    }
}

#[test]
fn null_and_bad_input() {
    unsafe {
        let mut sk = ptr::null_mut();
        assert_eq!(tn_skeleton_from_json(ptr::null(), &mut sk), TnStatus::NullArgument);
        assert_eq!(tn_skeleton_from_json(cstr("{").as_ptr(), &mut sk), TnStatus::InvalidGraph);
        assert_eq!(tn_reduced_counts(ptr::null(), ptr::null_mut(), ptr::null_mut(), ptr::null_mut()), TnStatus::NullArgument);
        let bad = [0xffu8, 0];
        assert_eq!(tn_reduced_from_json(bad.as_ptr() as *const c_char, &mut ptr::null_mut()), TnStatus::InvalidUtf8);
        tn_skeleton_free(ptr::null_mut());
        tn_string_free(ptr::null_mut());
    }
}

#[test]
fn negative_tau_rejected() {
    unsafe {
        let mut sk = ptr::null_mut();
        assert_eq!(tn_skeleton_from_json(cstr(TRIANGLE_TAIL).as_ptr(), &mut sk), TnStatus::Ok);
        let mut red = ptr::null_mut();
        assert_eq!(tn_reduce(sk, -1.0, false, true, true, &mut red), TnStatus::InvalidArgument);
        assert!(last_error().contains("tau"));
        tn_skeleton_free(sk);
    }
}

#[test]
fn header_declares_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/toponame.h")).unwrap();
    for sym in ["tn_parse_name", "tn_reduce", "tn_name", "tn_graph_similarity", "TN_STATUS_PARSE_ERROR", "typedef struct TnReduced"] {
        assert!(header.contains(sym), "{sym}");
    }
}

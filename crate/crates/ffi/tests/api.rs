use std::ffi::{c_char, CStr, CString};
use std::fs;
use std::ptr;

use evoforge_ffi::*;

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = evo_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn parse(text: &str) -> *mut EvoExpr {
    let mut e = ptr::null_mut();
    assert_eq!(unsafe { evo_expr_parse(cstr(text).as_ptr(), &mut e) }, EvoStatus::Ok);
    e
}

#[test]
fn expression_round_trip() {
    let e = parse("cap-(item)");
    let mut text: *mut c_char = ptr::null_mut();
    let mut size = 0usize;
    unsafe {
        assert_eq!(evo_expr_print(e, &mut text), EvoStatus::Ok);
        assert_eq!(CStr::from_ptr(text).to_str().unwrap(), "cap - item");
        evo_string_free(text);
        assert_eq!(evo_expr_complexity(e, &mut size), EvoStatus::Ok);
        evo_expr_free(e);
    }
    assert_eq!(size, 3);
}

#[test]
fn parse_errors_set_message() {
    let mut e = ptr::null_mut();
    assert_eq!(unsafe { evo_expr_parse(cstr("max(1,").as_ptr(), &mut e) }, EvoStatus::ParseError);
    assert!(e.is_null());
    assert!(!last_error().is_empty());
    assert_eq!(unsafe { evo_expr_parse(ptr::null(), &mut e) }, EvoStatus::NullPointer);
    assert!(last_error().contains("text"));
}

#[test]
fn eval_binds_names() {
    let e = parse("cap - item");
    let names = [cstr("item"), cstr("cap")];
    let name_ptrs: Vec<*const c_char> = names.iter().map(|n| n.as_ptr()).collect();
    let values = [3.0, 10.0];
    let mut v = 0.0;
    unsafe {
        assert_eq!(evo_expr_eval(e, name_ptrs.as_ptr(), values.as_ptr(), 2, &mut v), EvoStatus::Ok);
        assert_eq!(v, 7.0);
        assert_eq!(evo_expr_eval(e, name_ptrs.as_ptr(), values.as_ptr(), 1, &mut v), EvoStatus::InvalidArgument);
        evo_expr_free(e);
    }
    let e = parse("log(item - item)");
    unsafe {
        assert_eq!(evo_expr_eval(e, name_ptrs.as_ptr(), values.as_ptr(), 2, &mut v), EvoStatus::DomainError);
        evo_expr_free(e);
    }
}

#[test]
fn bin_packing() {
    let items = [5.0, 5.0, 4.0, 3.0, 3.0];
    let mut inst = ptr::null_mut();
    let (mut bins, mut lb) = (0usize, 0usize);
    let e = parse("-index");
    unsafe {
        assert_eq!(evo_bpp_new(10.0, items.as_ptr(), items.len(), &mut inst), EvoStatus::Ok);
        assert_eq!(evo_bpp_pack(inst, e, &mut bins), EvoStatus::Ok);
        assert_eq!(evo_bpp_lower_bound(inst, &mut lb), EvoStatus::Ok);
        assert_eq!((bins, lb), (2, 2));
        let broken = parse("item / (cap - cap)");
        assert_eq!(evo_bpp_pack(inst, broken, &mut bins), EvoStatus::DomainError);
        evo_expr_free(broken);
        evo_bpp_free(inst);
        evo_expr_free(e);
        let mut bad = ptr::null_mut();
        assert_eq!(evo_bpp_new(10.0, [11.0].as_ptr(), 1, &mut bad), EvoStatus::InvalidArgument);
    }
}

#[test]
fn tsp_lengths() {
    let xy = [0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 0.0];
    let mut inst = ptr::null_mut();
    let mut len = 0.0;
    unsafe {
        assert_eq!(evo_tsp_new(xy.as_ptr(), 4, &mut inst), EvoStatus::Ok);
        assert_eq!(evo_tsp_tour_length(inst, [0usize, 1, 2, 3].as_ptr(), 4, &mut len), EvoStatus::Ok);
        assert_eq!(len, 4.0);
        assert_eq!(evo_tsp_tour_length(inst, [0usize, 1, 1, 3].as_ptr(), 4, &mut len), EvoStatus::InvalidArgument);
        evo_tsp_free(inst);
    }
}

#[test]
fn loading_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let tsp = dir.path().join("t.json");
    fs::write(&tsp, r#"{"name": "t", "points": [[0,0],[3,0],[3,4]]}"#).unwrap();
    let mut t = ptr::null_mut();
    let mut b = ptr::null_mut();
    let mut len = 0.0;
    unsafe {
        assert_eq!(evo_tsp_load(cstr(tsp.to_str().unwrap()).as_ptr(), &mut t), EvoStatus::Ok);
        assert_eq!(evo_tsp_tour_length(t, [0usize, 1, 2].as_ptr(), 3, &mut len), EvoStatus::Ok);
        evo_tsp_free(t);
        assert_eq!(evo_bpp_load(cstr("/nonexistent/x.json").as_ptr(), &mut b), EvoStatus::IoError);
    }
    assert_eq!(len, 12.0);
}

#[test]
fn run_from_config() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("sq.json"), r#"{"name": "sq", "points": [[0,0],[0,1],[1,1],[1,0]]}"#).unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(
        &cfg,
        r#"{"config_version": 1, "problem": {"instance": "sq.json"},
            "run": {"mode": "solution_search", "generations": 3, "population_size": 4}}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let mut json: *mut c_char = ptr::null_mut();
    let status = unsafe {
        evo_run_config(cstr(cfg.to_str().unwrap()).as_ptr(), cstr(out.to_str().unwrap()).as_ptr(), &mut json)
    };
    assert_eq!(status, EvoStatus::Ok, "{}", last_error());
    let text = unsafe { CStr::from_ptr(json) }.to_string_lossy().into_owned();
    unsafe { evo_string_free(json) };
    assert!(text.contains("\"best_cost\": 4.0"), "{text}");
    assert!(out.join("run.jsonl").exists());

    let missing = dir.path().join("missing.json");
    let status = unsafe { evo_run_config(cstr(missing.to_str().unwrap()).as_ptr(), ptr::null(), &mut json) };
    assert_eq!(status, EvoStatus::InvalidArgument);
}

#[test]
fn null_frees_are_harmless() {
    unsafe {
        evo_expr_free(ptr::null_mut());
        evo_bpp_free(ptr::null_mut());
        evo_tsp_free(ptr::null_mut());
        evo_string_free(ptr::null_mut());
    }
    assert!(!evo_version().is_null());
}

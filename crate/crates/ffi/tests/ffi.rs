use std::ffi::CStr;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use nilcircle_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 256];
    unsafe {
        nc_last_error_message(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

#[test]
fn element_round_trip() {
    unsafe {
        let (mut a, mut b, mut p) = (ptr::null_mut(), ptr::null_mut(), ptr::null_mut());
        assert_eq!(nc_element_new(2, [1i64, 2, 3].as_ptr(), 3, &mut a), NcStatus::Ok);
        assert_eq!(nc_element_new(2, [-1i64, 0, 5].as_ptr(), 3, &mut b), NcStatus::Ok);
        assert_eq!(nc_element_multiply(a, b, &mut p), NcStatus::Ok);
        assert_eq!(nc_element_len(p), 3);
        let mut c = [0i64; 3];
        assert_eq!(nc_element_coords(p, c.as_mut_ptr(), 3), NcStatus::Ok);
        // central coordinate: 3 + 5 + x_2 * y_1 = 8 + 2 * (-1)
        assert_eq!(c, [0, 2, 6]);
        let mut inv = ptr::null_mut();
        assert_eq!(nc_element_inverse(p, &mut inv), NcStatus::Ok);
        let mut e = ptr::null_mut();
        assert_eq!(nc_element_multiply(p, inv, &mut e), NcStatus::Ok);
        assert_eq!(nc_element_coords(e, c.as_mut_ptr(), 3), NcStatus::Ok);
        assert_eq!(c, [0, 0, 0]);
        assert_eq!(nc_element_coords(e, c.as_mut_ptr(), 2), NcStatus::BufferTooSmall);
        for h in [a, b, p, inv, e] {
            nc_element_free(h);
        }
        nc_element_free(ptr::null_mut());
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut a = ptr::null_mut();
        assert_eq!(nc_element_new(2, [1i64, 2].as_ptr(), 2, &mut a), NcStatus::InvalidArgument);
        assert!(a.is_null());
        assert!(last_error().contains("expected 3 coordinates"));
        assert_eq!(nc_element_new(2, ptr::null(), 3, &mut a), NcStatus::NullPointer);
        let mut v = 0.0;
        assert_eq!(nc_variation([0.0, 1.0].as_ptr(), 2, 0.5, &mut v), NcStatus::InvalidArgument);
        let mut re = 0.0;
        let mut im = 0.0;
        let big = [1i64, 1, 1];
        assert_eq!(nc_nil_gauss_sum(2, big.as_ptr(), 3, 1_000_003, 3, false, true, &mut re, &mut im), NcStatus::Infeasible);
    }
}

#[test]
fn sums_and_variation() {
    unsafe {
        let (mut re, mut im) = (0.0, 0.0);
        assert_eq!(nc_gauss_sum([0i64, 1].as_ptr(), 2, 3, &mut re, &mut im), NcStatus::Ok);
        assert!(((re * re + im * im).sqrt() - 3f64.powf(-0.5)).abs() < 1e-12);
        let a = [1i64, 1, 0];
        let (mut r1, mut i1, mut r2, mut i2) = (0.0, 0.0, 0.0, 0.0);
        assert_eq!(nc_nil_gauss_sum(2, a.as_ptr(), 3, 3, 2, false, false, &mut r1, &mut i1), NcStatus::Ok);
        assert_eq!(nc_nil_gauss_sum(2, a.as_ptr(), 3, 3, 2, false, true, &mut r2, &mut i2), NcStatus::Ok);
        assert!((r1 - r2).abs() < 1e-12 && (i1 - i2).abs() < 1e-12);
        let mut v = 0.0;
        assert_eq!(nc_variation([0.0, 1.0, 0.0].as_ptr(), 3, 2.0, &mut v), NcStatus::Ok);
        assert!((v - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(nc_variation([0.0, 1.0, 0.0].as_ptr(), 3, f64::INFINITY, &mut v), NcStatus::Ok);
        assert_eq!(v, 1.0);
        let mut count = 0u64;
        assert_eq!(nc_ball_count(2, 1, [1.0; 3].as_ptr(), [0.0; 3].as_ptr(), 3, 2.0, &mut count), NcStatus::Ok);
        assert_eq!(count, 315);
    }
}

#[test]
fn systems() {
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(nc_system_cyclic(5, &mut s), NcStatus::Ok);
        assert_eq!(nc_system_len(s), 5);
        let f = [1.0, 0.0, 0.0, 0.0, 0.0];
        let mut out = [0.0; 5];
        assert_eq!(nc_system_average(s, f.as_ptr(), 5, 2, out.as_mut_ptr()), NcStatus::Ok);
        assert!((out[0] - 0.2).abs() < 1e-15);
        assert_eq!(nc_system_average(s, f.as_ptr(), 4, 2, out.as_mut_ptr()), NcStatus::InvalidArgument);
        nc_system_free(s);

        let mut h = ptr::null_mut();
        assert_eq!(nc_system_heisenberg_quotient(2, 3, &mut h), NcStatus::Ok);
        assert_eq!(nc_system_len(h), 27);
        assert_eq!(nc_system_arity(h), 2);
        let mut holds = false;
        assert_eq!(nc_system_commutator_check(h, [1i64, 1].as_ptr(), [1i64, 0].as_ptr(), 2, &mut holds), NcStatus::Ok);
        assert!(holds);
        nc_system_free(h);
        assert_eq!(nc_system_len(ptr::null()), 0);
    }
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(nc_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/nilcircle.h")).unwrap();
    for name in [
        "nc_element_new",
        "nc_element_free",
        "nc_gauss_sum",
        "nc_nil_gauss_sum",
        "nc_variation",
        "nc_ball_count",
        "nc_system_heisenberg_quotient",
        "nc_system_commutator_check",
        "nc_last_error_message",
        "typedef struct NcElement NcElement",
        "NC_STATUS_INFEASIBLE = 2",
    ] {
        assert!(header.contains(name), "{name} missing from the header");
    }
}

/// Compiles and runs a C program against the static library when a C compiler is present.
#[test]
fn c_smoke_program() {
    let exe = std::env::current_exe().unwrap();
    let profile_dir: PathBuf = exe.parent().and_then(|p| p.parent()).unwrap().to_path_buf();
    let lib = profile_dir.join("libnilcircle_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no static library at {} or no C compiler", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("smoke");
    let manifest = env!("CARGO_MANIFEST_DIR");
    let status = Command::new("cc")
        .arg(format!("{manifest}/tests/c/smoke.c"))
        .arg(format!("-I{manifest}/include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("product 0 2 6"), "{text}");
    assert!(text.contains("gauss 0.577350269"), "{text}");
    assert!(text.contains("error invalid parameter"), "{text}");
}

use std::ffi::{c_char, CStr, CString};
use std::ptr;

use spinmetro_ffi::*;

fn named(twice_s: u32, tag: &str) -> *mut SmState {
    let t = CString::new(tag).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { sm_state_named(twice_s, t.as_ptr(), &mut out) }, SmStatus::Ok);
    assert!(!out.is_null());
    out
}

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 256];
    unsafe {
        sm_last_error_message(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

#[test]
fn named_state_r_vector() {
    let st = named(4, "tetrahedron");
    let mut r = [0.0; 5];
    assert_eq!(unsafe { sm_r_vector(st, r.as_mut_ptr(), 5) }, SmStatus::Ok);
    assert!((r[0] - 0.2).abs() < 1e-14);
    assert!(r[1].abs() < 1e-14 && r[2].abs() < 1e-14);
    let mut order = 0;
    assert_eq!(unsafe { sm_anticoherence_order(st, 1e-10, &mut order) }, SmStatus::Ok);
    assert_eq!(order, 2);
    let (mut ts, mut dim) = (0, 0);
    assert_eq!(unsafe { sm_state_spin(st, &mut ts, &mut dim) }, SmStatus::Ok);
    assert_eq!((ts, dim), (4, 5));
    unsafe { sm_state_free(st) };
}

#[test]
fn pure_from_arrays_and_json_round_trip() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let re = [h, 0.0, h];
    let mut st = ptr::null_mut();
    assert_eq!(unsafe { sm_state_pure(2, re.as_ptr(), ptr::null(), 3, &mut st) }, SmStatus::Ok);
    let mut needed = 0;
    assert_eq!(
        unsafe { sm_state_to_json(st, ptr::null_mut(), 0, &mut needed) },
        SmStatus::Buffer
    );
    let mut buf = vec![0 as c_char; needed + 1];
    assert_eq!(
        unsafe { sm_state_to_json(st, buf.as_mut_ptr(), buf.len(), &mut needed) },
        SmStatus::Ok
    );
    let mut back = ptr::null_mut();
    assert_eq!(unsafe { sm_state_from_json(buf.as_ptr(), &mut back) }, SmStatus::Ok);
    let (mut a, mut b) = ([0.0; 3], [0.0; 3]);
    unsafe {
        sm_r_vector(st, a.as_mut_ptr(), 3);
        sm_r_vector(back, b.as_mut_ptr(), 3);
        sm_state_free(st);
        sm_state_free(back);
    }
    assert_eq!(a, b);
}

#[test]
fn mixed_state_and_purity() {
    let n = 3;
    let mut re = vec![0.0; n * n];
    for i in 0..n {
        re[i * n + i] = 1.0 / 3.0;
    }
    let mut st = ptr::null_mut();
    assert_eq!(
        unsafe { sm_state_mixed(2, re.as_ptr(), ptr::null(), 9, &mut st) },
        SmStatus::Ok
    );
    let mut p = 0.0;
    let mut pure = 1;
    unsafe {
        assert_eq!(sm_purity(st, &mut p), SmStatus::Ok);
        assert_eq!(sm_state_is_pure(st, &mut pure), SmStatus::Ok);
    }
    assert!((p - 1.0 / 3.0).abs() < 1e-14);
    assert_eq!(pure, 0);
    // pure-only operations refuse a density matrix
    let mut order = 0;
    assert_eq!(unsafe { sm_anticoherence_order(st, 1e-10, &mut order) }, SmStatus::Unsupported);
    assert_eq!(
        unsafe { sm_state_mixed(2, re.as_ptr(), ptr::null(), 4, &mut st) },
        SmStatus::Dimension
    );
    unsafe { sm_state_free(st) };
}

#[test]
fn error_codes_and_messages() {
    let mut out = ptr::null_mut();
    let tag = CString::new("ghz").unwrap();
    assert_eq!(unsafe { sm_state_named(4, ptr::null(), &mut out) }, SmStatus::Null);
    assert!(last_error().contains("null"));
    assert_eq!(unsafe { sm_state_named(4, tag.as_ptr(), ptr::null_mut()) }, SmStatus::Null);
    assert_eq!(
        unsafe { sm_state_named(sm_max_twice_s() + 1, tag.as_ptr(), &mut out) },
        SmStatus::SpinTooLarge
    );
    assert!(last_error().contains("exceeds"));
    let bad = [0.0, 0.0];
    assert_eq!(unsafe { sm_state_pure(1, bad.as_ptr(), ptr::null(), 2, &mut out) }, SmStatus::Domain);
    assert!(out.is_null());

    let st = named(2, "ghz");
    let fam = CString::new("warp").unwrap();
    let mut f = 0.0;
    assert_eq!(unsafe { sm_avg_fidelity(st, fam.as_ptr(), 0.1, &mut f) }, SmStatus::Parse);
    // success clears the message
    let fam = CString::new("rotation").unwrap();
    assert_eq!(unsafe { sm_avg_fidelity(st, fam.as_ptr(), 0.1, &mut f) }, SmStatus::Ok);
    assert_eq!(unsafe { sm_last_error_message(ptr::null_mut(), 0) }, 0);
    unsafe { sm_state_free(st) };
    unsafe { sm_state_free(ptr::null_mut()) };
}

#[test]
fn descend_reaches_anticoherent_state() {
    let mut st = ptr::null_mut();
    assert_eq!(unsafe { sm_state_random_pure(4, 3, &mut st) }, SmStatus::Ok);
    let mut fin = ptr::null_mut();
    let (mut c, mut conv) = (1.0, 0);
    assert_eq!(
        unsafe { sm_descend(st, 1, 0, 1e-12, 20_000, &mut fin, &mut c, &mut conv) },
        SmStatus::Ok
    );
    assert!(c < 1e-8, "c1 = {c}");
    let mut order = 0;
    assert_eq!(unsafe { sm_anticoherence_order(fin, 1e-6, &mut order) }, SmStatus::Ok);
    assert!(order >= 1);
    unsafe {
        sm_state_free(st);
        sm_state_free(fin);
    }
}

#[test]
fn majorana_of_dicke_and_wigner_symbols() {
    let st = named(3, "coherent");
    let (mut th, mut ph) = ([1.0; 3], [0.0; 3]);
    assert_eq!(
        unsafe { sm_majorana(st, th.as_mut_ptr(), ph.as_mut_ptr(), 3) },
        SmStatus::Ok
    );
    assert!(th.iter().all(|t| t.abs() < 1e-12));
    assert_eq!(
        unsafe { sm_majorana(st, th.as_mut_ptr(), ph.as_mut_ptr(), 2) },
        SmStatus::Dimension
    );
    unsafe { sm_state_free(st) };

    let mut cg = 0.0;
    assert_eq!(unsafe { sm_clebsch_gordan(2, 2, 2, -2, 0, 0, &mut cg) }, SmStatus::Ok);
    assert!((cg - 1.0 / 3f64.sqrt()).abs() < 1e-14);
    assert_eq!(unsafe { sm_clebsch_gordan(2, 1, 2, -1, 0, 0, &mut cg) }, SmStatus::Domain);
    let mut w = 0.0;
    let j = [1u32, 1, 0, 1, 1, 0];
    assert_eq!(unsafe { sm_six_j(j.as_ptr(), &mut w) }, SmStatus::Ok);
    // {a b 0; b a 0} with a = b = 1/2 is −1/2
    assert!((w + 0.5).abs() < 1e-14);
}

#[test]
fn header_lists_every_entry_point() {
    let header = include_str!("../include/spinmetro.h");
    for f in [
        "sm_last_error_message",
        "sm_state_named",
        "sm_state_pure",
        "sm_state_mixed",
        "sm_state_free",
        "sm_r_vector",
        "sm_avg_fidelity",
        "sm_descend",
        "sm_majorana",
        "sm_clebsch_gordan",
        "sm_six_j",
        "typedef struct SmState SmState",
    ] {
        assert!(header.contains(f), "{f} missing from header");
    }
}

/// Compiles and runs a C program against the static library when a C
/// compiler is available.
#[test]
fn c_program_links_and_runs() {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if std::process::Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("no C compiler, skipping");
        return;
    }
    let exe = std::env::current_exe().unwrap();
    // target/<profile>/deps/<test> -> target/<profile>
    let profile_dir = exe.parent().unwrap().parent().unwrap();
    let lib = profile_dir.join("libspinmetro_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built, skipping", lib.display());
        return;
    }
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR"));
    let out = std::env::temp_dir().join(format!("spinmetro_smoke_{}", std::process::id()));
    let status = std::process::Command::new(&cc)
        .arg(dir.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(dir.join("include"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let run = std::process::Command::new(&out).output().unwrap();
    let _ = std::fs::remove_file(&out);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "ok");
}

use std::ffi::{CStr, CString};
use std::ptr;

use underlap_ffi::*;

fn density(json: &str) -> *mut UnlDensity {
    let c = CString::new(json).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { unl_density_from_json(c.as_ptr(), &mut out) }, UnlStatus::Ok);
    assert!(!out.is_null());
    out
}

fn last_error() -> String {
    let p = unl_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn normal(mean: f64) -> *mut UnlDensity {
    density(&format!(r#"{{"kind":"gaussian","mean":[{mean}],"cov":[[1.0]]}}"#))
}

// Φ(1) to double precision.
const PHI_1: f64 = 0.841_344_746_068_542_9;

#[test]
fn gaussian_pair_estimate_matches_closed_form() {
    let g = [normal(0.0), normal(2.0)];
    let handles: Vec<*const UnlDensity> = g.iter().map(|p| *p as *const _).collect();
    let mut est = UnlEstimateC::default();
    assert_eq!(unsafe { unl_estimate(handles.as_ptr(), 2, 200_000, 11, &mut est) }, UnlStatus::Ok);
    assert_eq!((est.k, est.m), (2, 200_000));
    assert!((est.value - 2.0 * PHI_1).abs() < 4.0 * est.variance_bound.sqrt());
    assert!(est.weight_max <= 2.0 + 1e-12);
    for p in g {
        unsafe { unl_density_free(p) };
    }
}

#[test]
fn exact_discrete_value() {
    let a = density(r#"{"kind":"catprod","probs":[[0.5,0.5]]}"#);
    let b = density(r#"{"kind":"catprod","probs":[[0.9,0.1]]}"#);
    let handles = [a as *const UnlDensity, b as *const UnlDensity];
    let mut v = 0.0;
    assert_eq!(unsafe { unl_exact(handles.as_ptr(), 2, &mut v) }, UnlStatus::Ok);
    // Σ max(p, q) = 0.9 + 0.5.
    assert!((v - 1.4).abs() < 1e-12);
    unsafe {
        unl_density_free(a);
        unl_density_free(b);
    }
}

#[test]
fn log_density_and_dims() {
    let d = normal(1.0);
    let (mut pc, mut pd) = (0usize, 0usize);
    assert_eq!(unsafe { unl_density_dims(d, &mut pc, &mut pd) }, UnlStatus::Ok);
    assert_eq!((pc, pd), (1, 0));
    let x = [1.0];
    let mut lp = 0.0;
    assert_eq!(unsafe { unl_density_log_density(d, x.as_ptr(), 1, ptr::null(), 0, &mut lp) }, UnlStatus::Ok);
    assert!((lp + 0.5 * (2.0 * std::f64::consts::PI).ln()).abs() < 1e-12);
    assert_eq!(unsafe { unl_density_log_density(d, x.as_ptr(), 2, ptr::null(), 0, &mut lp) }, UnlStatus::Shape);
    unsafe { unl_density_free(d) };
}

#[test]
fn sampling_is_seeded() {
    let d = density(
        r#"{"kind":"mixed","continuous":{"mean":[0.0,0.0],"cov":[[1.0,0.0],[0.0,1.0]]},"discrete":{"probs":[[0.2,0.8]]}}"#,
    );
    let run = || {
        let mut c = vec![0.0; 20];
        let mut k = vec![0usize; 10];
        assert_eq!(unsafe { unl_density_sample(d, 10, 5, c.as_mut_ptr(), k.as_mut_ptr()) }, UnlStatus::Ok);
        (c, k)
    };
    let (c1, k1) = run();
    let (c2, k2) = run();
    assert_eq!(c1, c2);
    assert_eq!(k1, k2);
    assert!(k1.iter().all(|&v| v < 2));
    unsafe { unl_density_free(d) };
}

#[test]
fn errors_are_reported() {
    let mut out = ptr::null_mut();
    let bad = CString::new("{\"kind\":\"gaussian\"}").unwrap();
    assert_eq!(unsafe { unl_density_from_json(bad.as_ptr(), &mut out) }, UnlStatus::InvalidJson);
    assert!(out.is_null());
    assert!(!last_error().is_empty());

    let not_psd = CString::new(r#"{"kind":"gaussian","mean":[0.0],"cov":[[-1.0]]}"#).unwrap();
    let status = unsafe { unl_density_from_json(not_psd.as_ptr(), &mut out) };
    assert_eq!(status, UnlStatus::InvalidJson);

    assert_eq!(unsafe { unl_density_from_json(ptr::null(), &mut out) }, UnlStatus::NullPointer);
    assert!(last_error().contains("null"));

    let mut est = UnlEstimateC::default();
    let handles = [ptr::null::<UnlDensity>(), ptr::null()];
    assert_eq!(unsafe { unl_estimate(handles.as_ptr(), 2, 10, 0, &mut est) }, UnlStatus::NullPointer);

    let g = normal(0.0);
    let one = [g as *const UnlDensity];
    assert_eq!(unsafe { unl_estimate(one.as_ptr(), 1, 0, 0, &mut est) }, UnlStatus::InvalidArgument);
    unsafe { unl_density_free(g) };

    let mut v = 0.0;
    assert_eq!(unsafe { unl_variance_bound(3, 3.5, 10, &mut v) }, UnlStatus::InvalidArgument);
    unsafe { unl_density_free(ptr::null_mut()) };
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(unl_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn c_program_links_against_header() {
    let Some(cc) = ["cc", "gcc", "clang"].into_iter().find(|c| std::process::Command::new(c).arg("--version").output().is_ok()) else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let manifest = std::path::Path::new(env!("CARGO_MANIFEST_DIR"));
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|d| d.parent()).unwrap();
    let lib = profile_dir.join("libunderlap_ffi.a");
    if !lib.exists() {
        eprintln!("static library not built at {}; skipping", lib.display());
        return;
    }
    let out = std::path::PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("smoke");
    let status = std::process::Command::new(cc)
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let run = std::process::Command::new(&out).output().unwrap();
    assert!(run.status.success(), "C smoke test exited with {:?}", run.status.code());
}

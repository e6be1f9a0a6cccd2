use std::ffi::CStr;
use std::process::Command;
use std::ptr;

use zirho_ffi::*;

fn zip(lambda: f64, p: f64) -> *mut ZirhoMargin {
    let mut m = ptr::null_mut();
    assert_eq!(
        unsafe { zirho_margin_zip(lambda, p, 1e-12, &mut m) },
        ZirhoStatus::Ok
    );
    assert!(!m.is_null());
    m
}

fn last_error() -> String {
    let mut buf = [0 as std::ffi::c_char; 256];
    unsafe {
        zirho_last_error(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

#[test]
fn exact_rho_matches_library() {
    let (f, g) = (zip(2.0, 0.2), zip(8.0, 0.8));
    let mut j = ptr::null_mut();
    unsafe {
        assert_eq!(
            zirho_joint_new(f, g, ZirhoCopula::Frechet, 0.5, &mut j),
            ZirhoStatus::Ok
        );
        let (mut rho, mut via_decomposition) = (f64::NAN, f64::NAN);
        assert_eq!(zirho_spearman_exact(j, &mut rho), ZirhoStatus::Ok);
        assert_eq!(
            zirho_decomposition_eval(j, &mut via_decomposition),
            ZirhoStatus::Ok
        );
        assert!((rho - via_decomposition).abs() < 1e-12);

        let fm = zirho::build_margin(&zirho::ZeroInflatedMarginSpec::zip(2.0, 0.2), 1e-12).unwrap();
        let gm = zirho::build_margin(&zirho::ZeroInflatedMarginSpec::zip(8.0, 0.8), 1e-12).unwrap();
        let direct = zirho::spearman_exact(
            &zirho::joint_pmf(&fm, &gm, zirho::CopulaSpec::Frechet { alpha: 0.5 }).unwrap(),
        );
        assert_eq!(rho, direct);

        zirho_joint_free(j);
        zirho_margin_free(f);
        zirho_margin_free(g);
    }
}

#[test]
fn bounds_methods_agree() {
    let (f, g) = (zip(2.0, 0.2), zip(2.0, 0.2));
    let (mut closed, mut oracle) = (ZirhoBounds::default(), ZirhoBounds::default());
    unsafe {
        assert_eq!(
            zirho_bounds(f, g, ZirhoBoundsMethod::ClosedForm, &mut closed),
            ZirhoStatus::Ok
        );
        assert_eq!(
            zirho_bounds(f, g, ZirhoBoundsMethod::Oracle, &mut oracle),
            ZirhoStatus::Ok
        );
        zirho_margin_free(f);
        zirho_margin_free(g);
    }
    assert!((closed.rho_min - oracle.rho_min).abs() < 1e-9);
    assert!((closed.rho_max - oracle.rho_max).abs() < 1e-9);
    assert!((closed.rho_max - 0.947).abs() < 0.005);
}

#[test]
fn explicit_pmf_margin() {
    let support = [0u64, 1, 4];
    let probs = [0.5, 0.25, 0.25];
    let mut m = ptr::null_mut();
    let mut zero = 0.0;
    unsafe {
        assert_eq!(
            zirho_margin_from_pmf(support.as_ptr(), probs.as_ptr(), 3, &mut m),
            ZirhoStatus::Ok
        );
        assert_eq!(zirho_margin_mass_at_zero(m, &mut zero), ZirhoStatus::Ok);
        zirho_margin_free(m);
    }
    assert_eq!(zero, 0.5);
}

#[test]
fn estimate_round_trip() {
    let xs = [0u64, 1, 2, 3, 0, 5, 2, 0];
    let ys = [0u64, 2, 1, 4, 3, 0, 2, 0];
    let mut s = ptr::null_mut();
    let mut est = ZirhoEstimate::default();
    unsafe {
        assert_eq!(
            zirho_sample_new(xs.as_ptr(), ys.as_ptr(), xs.len(), &mut s),
            ZirhoStatus::Ok
        );
        assert_eq!(zirho_estimate(s, &mut est), ZirhoStatus::Ok);
        zirho_sample_free(s);
    }
    let pairs = xs.iter().copied().zip(ys.iter().copied()).collect();
    let direct = zirho::estimate_rho_a(&zirho::PairedSample::new(pairs).unwrap()).unwrap();
    assert_eq!(est.rho_a, direct.rho_a);
    assert_eq!((est.n11, est.n10, est.n01, est.n00), (4, 1, 1, 2));
}

#[test]
fn error_codes_and_messages() {
    let mut m = ptr::null_mut();
    unsafe {
        assert_eq!(
            zirho_margin_zip(2.0, 1.5, 1e-12, &mut m),
            ZirhoStatus::InvalidSpec
        );
        assert!(m.is_null());
        assert!(last_error().contains("1.5"), "{}", last_error());

        assert_eq!(
            zirho_margin_zip(2.0, 0.2, 1e-12, ptr::null_mut()),
            ZirhoStatus::NullPointer
        );
        assert!(last_error().starts_with("null pointer"));

        let mut rho = 0.0;
        assert_eq!(
            zirho_spearman_exact(ptr::null(), &mut rho),
            ZirhoStatus::NullPointer
        );

        let one = [1u64];
        let mut s = ptr::null_mut();
        assert_eq!(
            zirho_sample_new(one.as_ptr(), one.as_ptr(), 1, &mut s),
            ZirhoStatus::Ok
        );
        let mut est = ZirhoEstimate::default();
        assert_eq!(zirho_estimate(s, &mut est), ZirhoStatus::InsufficientData);
        zirho_sample_free(s);

        let needed = zirho_last_error(ptr::null_mut(), 0);
        assert!(needed > 0);
    }
}

#[test]
fn free_accepts_null() {
    unsafe {
        zirho_margin_free(ptr::null_mut());
        zirho_joint_free(ptr::null_mut());
        zirho_sample_free(ptr::null_mut());
    }
}

#[test]
fn header_compiles_as_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/zirho.h");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        format!(
            "#include \"{header}\"\n\
             int main(void) {{\n\
               ZirhoMargin *f = 0; ZirhoJoint *j = 0; double rho = 0;\n\
               ZirhoStatus st = zirho_margin_zip(2.0, 0.2, 1e-12, &f);\n\
               st = zirho_joint_new(f, f, ZIRHO_COPULA_UPPER_BOUND_M, 0.0, &j);\n\
               st = zirho_spearman_exact(j, &rho);\n\
               ZirhoBounds b; st = zirho_bounds(f, f, ZIRHO_BOUNDS_METHOD_ORACLE, &b);\n\
               zirho_joint_free(j); zirho_margin_free(f);\n\
               return st == ZIRHO_STATUS_OK ? 0 : 1;\n\
             }}\n"
        ),
    )
    .unwrap();
    let status = Command::new(std::env::var("CC").unwrap_or_else(|_| "cc".into()))
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only"])
        .arg(&src)
        .status()
        .expect("a C compiler is required to check the header");
    assert!(status.success());
}

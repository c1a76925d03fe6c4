use std::ffi::{CStr, CString};
use std::ptr;

use dualband_ffi::*;

fn cs(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = dualband_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

fn space(theta: &str, phi: &str, psi: &str) -> *mut DbSpace {
    let mut sp = ptr::null_mut();
    let st = unsafe { dualband_space_new(cs(theta).as_ptr(), cs(phi).as_ptr(), cs(psi).as_ptr(), &mut sp) };
    assert_eq!(st, DbStatus::DbOk);
    sp
}

#[test]
fn matrix_of_shift_on_nilpotent_space() {
    let sp = space("mono(2)", "1", "mono(3)");
    let mut d = 0usize;
    assert_eq!(unsafe { dualband_space_dim(sp, &mut d) }, DbStatus::DbOk);
    assert_eq!(d, 4);
    let mut need = 0usize;
    let st = unsafe { dualband_operator_matrix(sp, cs("z").as_ptr(), ptr::null_mut(), 0, &mut need) };
    assert_eq!(st, DbStatus::DbBufferTooSmall);
    assert_eq!(need, 32);
    let mut buf = vec![0.0; need];
    let st = unsafe { dualband_operator_matrix(sp, cs("z").as_ptr(), buf.as_mut_ptr(), buf.len(), &mut need) };
    assert_eq!(st, DbStatus::DbOk);
    // T_z is nilpotent: its square vanishes.
    let m = |r: usize, c: usize| num_complex::Complex64::new(buf[2 * (r * 4 + c)], buf[2 * (r * 4 + c) + 1]);
    for r in 0..4 {
        for c in 0..4 {
            let s: num_complex::Complex64 = (0..4).map(|k| m(r, k) * m(k, c)).sum();
            assert!(s.norm() < 1e-12);
        }
    }
    unsafe { dualband_space_free(sp) };
}

#[test]
fn spectrum_determinant_and_resolvent_on_twist() {
    let sp = space("mono(2)", "1", "rat([-0.5, 0, 0, 0, 1], [1, 0, 0, 0, -0.5], -2)");
    let mut ev = [DbEigenvalue::default(); 8];
    let mut n = 0usize;
    assert_eq!(unsafe { dualband_point_spectrum(sp, ev.as_mut_ptr(), ev.len(), &mut n) }, DbStatus::DbOk);
    assert_eq!(n, 4);
    for e in &ev[..n] {
        let l = num_complex::Complex64::new(e.re, e.im);
        assert!((l.powi(4) + 0.375).norm() < 1e-12);
        assert_eq!(e.ker_dim, 1);
    }
    let mut small = [DbEigenvalue::default(); 2];
    assert_eq!(unsafe { dualband_point_spectrum(sp, small.as_mut_ptr(), 2, &mut n) }, DbStatus::DbBufferTooSmall);
    assert_eq!(n, 4);

    let mut det = [0.0; 2];
    assert_eq!(unsafe { dualband_determinant(sp, 0.0, 0.0, det.as_mut_ptr()) }, DbStatus::DbOk);
    assert!((det[0] - 0.375).abs() < 1e-14 && det[1].abs() < 1e-14);
    assert_eq!(unsafe { dualband_determinant(sp, 2.0, 0.0, det.as_mut_ptr()) }, DbStatus::DbOk);
    assert!((det[0] - 1.0234375).abs() < 1e-14);

    let h = [1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.5, 0.0];
    let mut f = [0.0; 8];
    let mut rel = 1.0;
    let st = unsafe { dualband_resolvent(sp, 0.3, 0.0, h.as_ptr(), f.as_mut_ptr(), 4, &mut rel) };
    assert_eq!(st, DbStatus::DbOk, "{}", last_error());
    assert!(rel < 1e-6);
    let root = num_complex::Complex64::new(0.375f64.powf(0.25), 0.0) * num_complex::Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
    let st = unsafe { dualband_resolvent(sp, root.re, root.im, h.as_ptr(), f.as_mut_ptr(), 4, &mut rel) };
    assert_eq!(st, DbStatus::DbInputError);
    assert!(last_error().contains("eigenvalue"));
    unsafe { dualband_space_free(sp) };
}

#[test]
fn errors_are_reported() {
    let mut sp = ptr::null_mut();
    let st = unsafe { dualband_space_new(cs("mono(2)").as_ptr(), cs("1").as_ptr(), cs("mono(2)").as_ptr(), &mut sp) };
    assert_eq!(st, DbStatus::DbInputError);
    assert!(last_error().contains("degenerate"));
    assert!(sp.is_null());
    let st = unsafe { dualband_space_new(cs("mono(2").as_ptr(), cs("1").as_ptr(), cs("z").as_ptr(), &mut sp) };
    assert_eq!(st, DbStatus::DbParseError);
    assert!(last_error().contains("column"));
    let st = unsafe { dualband_space_new(ptr::null(), cs("1").as_ptr(), cs("z").as_ptr(), &mut sp) };
    assert_eq!(st, DbStatus::DbNullPointer);
    let bad = [0xffu8, 0];
    let st = unsafe { dualband_space_new(bad.as_ptr().cast(), cs("1").as_ptr(), cs("z").as_ptr(), &mut sp) };
    assert_eq!(st, DbStatus::DbInvalidUtf8);
    let mut d = 0usize;
    assert_eq!(unsafe { dualband_space_dim(ptr::null(), &mut d) }, DbStatus::DbNullPointer);
    // A successful call clears the message.
    let ok = space("mono(2)", "1", "mono(3)");
    assert!(dualband_last_error().is_null());
    let mut norm = 0.0;
    let st = unsafe { dualband_hankel_norm(ok, cs("2").as_ptr(), &mut norm) };
    assert_eq!(st, DbStatus::DbInputError);
    assert!(last_error().contains("analyticity"));
    unsafe { dualband_space_free(ok) };
    unsafe { dualband_space_free(ptr::null_mut()) };
}

#[test]
fn free_symbol_space_and_norm() {
    let mut sp = ptr::null_mut();
    let st = unsafe { dualband_space_free_symbol(cs("blaschke([-0.4])").as_ptr(), cs("2.5").as_ptr(), cs("2.5").as_ptr(), &mut sp) };
    assert_eq!(st, DbStatus::DbOk);
    let mut d = 0usize;
    assert_eq!(unsafe { dualband_space_dim(sp, &mut d) }, DbStatus::DbOk);
    assert_eq!(d, 2);
    unsafe { dualband_space_free(sp) };
    let nil = space("mono(2)", "1", "mono(3)");
    let mut norm = 0.0;
    assert_eq!(unsafe { dualband_hankel_norm(nil, cs("mono(3)").as_ptr(), &mut norm) }, DbStatus::DbOk);
    assert!((norm - 1.0).abs() < 1e-12);
    unsafe { dualband_space_free(nil) };
}

#[test]
fn scenario_round_trip() {
    let src = "name = ffi\ntasks = validate,norm\n[space]\ntheta = mono(2)\nphi = 1\npsi = mono(3)\n[symbol]\ng = mono(3)\n";
    let mut out = ptr::null_mut();
    let mut code = -1;
    assert_eq!(unsafe { dualband_run_scenario(cs(src).as_ptr(), &mut out, &mut code) }, DbStatus::DbOk);
    assert_eq!(code, 0);
    let json = unsafe { CStr::from_ptr(out) }.to_str().unwrap().to_string();
    unsafe { dualband_string_free(out) };
    assert!(json.contains("\"schema\": 1") && !json.contains("timings"));
    let st = unsafe { dualband_run_scenario(cs("name = x\n[bogus]\n").as_ptr(), &mut out, &mut code) };
    assert_eq!(st, DbStatus::DbParseError);
    assert!(last_error().contains("line 2"));
}

#[test]
fn errors_are_per_thread() {
    let mut sp = ptr::null_mut();
    let st = unsafe { dualband_space_new(cs("mono(2)").as_ptr(), cs("1").as_ptr(), cs("mono(2)").as_ptr(), &mut sp) };
    assert_eq!(st, DbStatus::DbInputError);
    std::thread::spawn(|| assert!(dualband_last_error().is_null())).join().unwrap();
    assert!(!dualband_last_error().is_null());
}

use std::ffi::{CStr, CString};
use std::ptr;

use dihedral_cutoff_ffi::*;

fn sample(n: u64, k: usize, seed: u64) -> *mut DcGeneratorSet {
    let mut gs = ptr::null_mut();
    assert_eq!(unsafe { dc_gens_sample(n, k, seed, true, 1000, &mut gs) }, DcStatus::Ok);
    assert!(!gs.is_null());
    gs
}

fn last_error() -> String {
    let p = dc_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn evolve_matches_library() {
    let gs = sample(101, 6, 4);
    let mut d = ptr::null_mut();
    assert_eq!(unsafe { dc_evolve(gs, 3.0, 0.0, 0, &mut d) }, DcStatus::Ok);
    let mut len = 0usize;
    assert_eq!(unsafe { dc_dist_len(d, &mut len) }, DcStatus::Ok);
    assert_eq!(len, 202);
    let mut probs = vec![0.0; len];
    assert_eq!(unsafe { dc_dist_copy_probs(d, probs.as_mut_ptr(), len) }, DcStatus::Ok);
    assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);

    let (mut tv, mut coll) = (0.0, 0.0);
    assert_eq!(unsafe { dc_dist_tv(d, &mut tv) }, DcStatus::Ok);
    assert_eq!(unsafe { dc_dist_collision(d, &mut coll) }, DcStatus::Ok);
    let u = 1.0 / 202.0;
    let tv_direct = 0.5 * probs.iter().map(|p| (p - u).abs()).sum::<f64>();
    assert!((tv - tv_direct).abs() < 1e-12);
    assert!(coll >= 4.0 * tv * tv - 1e-12);

    let mut json_len = 0usize;
    assert_eq!(unsafe { dc_gens_to_json(gs, ptr::null_mut(), 0, &mut json_len) }, DcStatus::BufferTooSmall);
    let mut buf = vec![0 as std::ffi::c_char; json_len + 1];
    assert_eq!(unsafe { dc_gens_to_json(gs, buf.as_mut_ptr(), buf.len(), &mut json_len) }, DcStatus::Ok);
    let mut gs2 = ptr::null_mut();
    assert_eq!(unsafe { dc_gens_from_json(buf.as_ptr(), &mut gs2) }, DcStatus::Ok);
    let mut d2 = ptr::null_mut();
    assert_eq!(unsafe { dc_evolve(gs2, 3.0, 0.0, 0, &mut d2) }, DcStatus::Ok);
    let mut tv2 = 0.0;
    assert_eq!(unsafe { dc_dist_tv(d2, &mut tv2) }, DcStatus::Ok);
    assert_eq!(tv, tv2);

    let (mut n, mut k, mut k_s) = (0u64, 0usize, 0usize);
    assert_eq!(unsafe { dc_gens_info(gs2, &mut n, &mut k, &mut k_s) }, DcStatus::Ok);
    assert_eq!((n, k), (101, 6));
    assert!((1..6).contains(&k_s));

    unsafe {
        dc_dist_free(d);
        dc_dist_free(d2);
        dc_gens_free(gs);
        dc_gens_free(gs2);
    }
}

#[test]
fn errors_carry_status_and_message() {
    let mut gs = ptr::null_mut();
    assert_eq!(unsafe { dc_gens_sample(1, 3, 0, false, 1, &mut gs) }, DcStatus::Domain);
    assert!(gs.is_null());
    assert!(!last_error().is_empty());

    let bad = CString::new("{not json").unwrap();
    assert_eq!(unsafe { dc_gens_from_json(bad.as_ptr(), &mut gs) }, DcStatus::Parse);

    assert_eq!(unsafe { dc_gens_from_json(ptr::null(), &mut gs) }, DcStatus::NullPointer);
    assert!(last_error().contains("null"));

    let g = sample(101, 6, 1);
    let mut d = ptr::null_mut();
    assert_eq!(unsafe { dc_evolve(g, 100.0, 0.0, 5, &mut d) }, DcStatus::StepBudget);
    assert_eq!(unsafe { dc_evolve(g, 1.0, 0.5, 0, &mut d) }, DcStatus::Domain);
    assert_eq!(unsafe { dc_evolve(g, 1.0, 0.0, 0, &mut d) }, DcStatus::Ok);
    assert!(dc_last_error().is_null());
    let mut small = [0.0; 4];
    assert_eq!(unsafe { dc_dist_copy_probs(d, small.as_mut_ptr(), 4) }, DcStatus::BufferTooSmall);

    let mut x = 0.0;
    assert_eq!(unsafe { dc_srw_entropy(-1.0, &mut x) }, DcStatus::InvalidArgument);
    assert_eq!(unsafe { dc_cutoff_time(0, 202, &mut x, ptr::null_mut()) }, DcStatus::Domain);
    unsafe {
        dc_dist_free(d);
        dc_gens_free(g);
        dc_gens_free(ptr::null_mut());
        dc_dist_free(ptr::null_mut());
    }
}

#[test]
fn scalar_functions() {
    let mut t0 = 0.0;
    let mut regime = DcRegime::Large;
    assert_eq!(unsafe { dc_cutoff_time(4, 202, &mut t0, &mut regime) }, DcStatus::Ok);
    assert_eq!(regime, DcRegime::Small);
    assert_eq!(t0, dihedral_cutoff::entropy::cutoff_time(4, 202).unwrap().t0);

    let mut h = 0.0;
    assert_eq!(unsafe { dc_srw_entropy(5.0, &mut h) }, DcStatus::Ok);
    let mut t = 0.0;
    assert_eq!(unsafe { dc_entropic_time(1, h, 1e-10, &mut t) }, DcStatus::Ok);
    assert!((t - 5.0).abs() < 1e-6);

    let v = unsafe { CStr::from_ptr(dc_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

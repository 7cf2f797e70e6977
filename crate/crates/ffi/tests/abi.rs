use access_time_ffi::*;
use std::ffi::{CStr, CString};
use std::ptr;

fn chain(spec: &str) -> *mut AtChain {
    let spec = CString::new(spec).unwrap();
    let mut handle = ptr::null_mut();
    assert_eq!(unsafe { at_chain_new(spec.as_ptr(), &mut handle) }, AtStatus::AtOk);
    assert!(!handle.is_null());
    handle
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(at_last_error_message()) }.to_str().unwrap().to_string()
}

fn dirac(len: usize, at: usize) -> Vec<f64> {
    let mut w = vec![0.0; len];
    w[at] = 1.0;
    w
}

#[test]
fn path_access_time_and_matrix() {
    let c = chain(r#"{"family":"path","n":10}"#);
    assert_eq!(unsafe { at_chain_size(c) }, 11);
    let (mu, nu) = (dirac(11, 0), dirac(11, 10));
    let mut value = 0.0;
    let mut argmax = usize::MAX;
    let status = unsafe { at_access_time(c, mu.as_ptr(), nu.as_ptr(), 11, &mut value, &mut argmax) };
    assert_eq!(status, AtStatus::AtOk);
    assert!((value - 100.0).abs() < 1e-9);
    assert_eq!(argmax, 10);

    let mut hits = vec![0.0; 121];
    assert_eq!(unsafe { at_hitting_matrix(c, hits.as_mut_ptr(), hits.len()) }, AtStatus::AtOk);
    assert!((hits[10] - 100.0).abs() < 1e-9);
    assert_eq!(hits[0], 0.0);

    let mut short = vec![0.0; 10];
    assert_eq!(unsafe { at_hitting_matrix(c, short.as_mut_ptr(), short.len()) }, AtStatus::AtBufferTooSmall);
    assert!(last_error().contains("121"));

    let (mut max, mut i, mut j) = (0.0, 0, 0);
    assert_eq!(unsafe { at_max_hitting(c, &mut max, &mut i, &mut j) }, AtStatus::AtOk);
    assert!((max - 100.0).abs() < 1e-9);
    assert_eq!((i, j), (0, 10));
    unsafe { at_chain_free(c) };
}

#[test]
fn shorthand_distributions() {
    let c = chain(r#"{"family":"complete","n":3}"#);
    let (mu, nu) = (CString::new("uniform").unwrap(), CString::new("dirac:2").unwrap());
    let mut value = 0.0;
    assert_eq!(unsafe { at_access_time_spec(c, mu.as_ptr(), nu.as_ptr(), &mut value) }, AtStatus::AtOk);
    assert!((value - 2.25).abs() < 1e-10);

    let mut tav = 0.0;
    assert_eq!(unsafe { at_tav(c, &mut tav) }, AtStatus::AtOk);
    assert!((tav - 2.25).abs() < 1e-10);

    let mut pi = [0.0; 4];
    assert_eq!(unsafe { at_stationary(c, pi.as_mut_ptr(), 4) }, AtStatus::AtOk);
    assert!(pi.iter().all(|p| (p - 0.25).abs() < 1e-14));

    let bad = CString::new("dirac:7").unwrap();
    assert_eq!(
        unsafe { at_access_time_spec(c, bad.as_ptr(), nu.as_ptr(), &mut value) },
        AtStatus::AtInvalidDistribution
    );
    unsafe { at_chain_free(c) };
}

#[test]
fn family_report_flags_birth_death_erratum() {
    let c = chain(r#"{"family":"birth_death","n":10,"p":0.3}"#);
    let (mu, nu) = (dirac(11, 8), dirac(11, 1));
    let mut r = AtFamilyReport::default();
    assert_eq!(unsafe { at_family_report(c, mu.as_ptr(), nu.as_ptr(), 11, &mut r) }, AtStatus::AtOk);
    assert_eq!(r.erratum_flag, 1);
    assert!((r.solver_value - 12.0 * 7.0 / 0.6).abs() < 1e-9);
    assert!((r.mirror_corrected - r.solver_value).abs() < 1e-9);
    unsafe { at_chain_free(c) };

    let c = chain(r#"{"family":"star","n":4}"#);
    let (mu, nu) = (dirac(5, 0), dirac(5, 1));
    assert_eq!(unsafe { at_family_report(c, mu.as_ptr(), nu.as_ptr(), 5, &mut r) }, AtStatus::AtOk);
    assert_eq!(r.erratum_flag, -1);
    assert!(r.mirror_corrected.is_nan());
    assert!((r.exact - 7.0).abs() < 1e-12);
    unsafe { at_chain_free(c) };

    let c = chain(r#"{"family":"hypercube","n":3}"#);
    let u = [1.0; 8];
    assert_eq!(unsafe { at_family_report(c, u.as_ptr(), u.as_ptr(), 8, &mut r) }, AtStatus::AtUnsupported);
    unsafe { at_chain_free(c) };
}

#[test]
fn simulation_is_reproducible() {
    let c = chain(r#"{"family":"complete","n":3}"#);
    let (mu, nu) = (dirac(4, 0), vec![1.0; 4]);
    let mut a = AtSimSummary::default();
    let mut b = AtSimSummary::default();
    for out in [&mut a, &mut b] {
        assert_eq!(unsafe { at_simulate(c, mu.as_ptr(), nu.as_ptr(), 4, 20_000, 9, out) }, AtStatus::AtOk);
    }
    assert_eq!(a.mean_t, b.mean_t);
    assert_eq!(a.within_band, 1);
    assert!((a.theoretical_mean - 2.25).abs() < 1e-12);
    assert!((a.access_time - 0.75).abs() < 1e-12);
    assert_eq!(unsafe { at_simulate(c, mu.as_ptr(), nu.as_ptr(), 4, 10, 9, &mut a) }, AtStatus::AtInvalidArgument);
    unsafe { at_chain_free(c) };
}

#[test]
fn error_codes() {
    let mut handle = ptr::null_mut();
    let cases = [
        (r#"{"family":"path"}"#, AtStatus::AtInvalidSpec),
        (r#"{"family":"winning_streak","n":41}"#, AtStatus::AtInvalidSpec),
        (r#"{"family":"graph","n":4,"edges":[[0,1],[2,3]]}"#, AtStatus::AtReducible),
        ("not json", AtStatus::AtInvalidSpec),
    ];
    for (spec, want) in cases {
        let s = CString::new(spec).unwrap();
        assert_eq!(unsafe { at_chain_new(s.as_ptr(), &mut handle) }, want, "{spec}");
        assert!(handle.is_null());
        assert!(!last_error().is_empty());
    }
    assert_eq!(unsafe { at_chain_new(ptr::null(), &mut handle) }, AtStatus::AtInvalidArgument);
    assert_eq!(unsafe { at_chain_size(ptr::null()) }, 0);
    unsafe { at_chain_free(ptr::null_mut()) };

    let c = chain(r#"{"family":"path","n":3}"#);
    let mut value = 0.0;
    let w = [1.0; 3];
    assert_eq!(
        unsafe { at_access_time(c, w.as_ptr(), w.as_ptr(), 3, &mut value, ptr::null_mut()) },
        AtStatus::AtDimensionMismatch
    );
    let neg = [1.0, -1.0, 1.0, 1.0];
    let ok = [1.0; 4];
    assert_eq!(
        unsafe { at_access_time(c, neg.as_ptr(), ok.as_ptr(), 4, &mut value, ptr::null_mut()) },
        AtStatus::AtInvalidDistribution
    );
    assert_eq!(
        unsafe { at_access_time(c, ok.as_ptr(), ok.as_ptr(), 4, ptr::null_mut(), ptr::null_mut()) },
        AtStatus::AtInvalidArgument
    );
    assert_eq!(unsafe { at_access_time(c, ok.as_ptr(), ok.as_ptr(), 4, &mut value, ptr::null_mut()) }, AtStatus::AtOk);
    assert!(last_error().is_empty());
    unsafe { at_chain_free(c) };
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(at_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

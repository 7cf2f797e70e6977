//! C ABI for the access-time library.
//!
//! Chains are built from the same JSON specs as the command line and handed
//! out as opaque `AtChain` pointers; the hitting-time matrix is solved once,
//! when the handle is created. Every fallible call returns an [`AtStatus`];
//! on failure, [`at_last_error_message`] describes the error on the calling
//! thread. Distributions are passed as `len` doubles and are renormalized.

#![deny(unsafe_op_in_unsafe_fn)]

use access_time::dist::{build_distribution, DistSpec};
use access_time::family::{has_closed_form, FamilyModel};
use access_time::hitting::SolvedChain;
use access_time::sim::{simulate_rule_solved, StoppingRule};
use access_time::{build_chain, ChainSpec, Error, ProbabilityVector};
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AtStatus {
    AtOk = 0,
    /// Null pointer, invalid UTF-8 or out-of-range argument.
    AtInvalidArgument = 1,
    AtInvalidSpec = 2,
    AtInvalidDistribution = 3,
    AtDimensionMismatch = 4,
    AtReducible = 5,
    AtSingular = 6,
    /// Operation not defined for this chain (no closed form, not
    /// reversible, asymmetric hitting times, too large, ...).
    AtUnsupported = 7,
    /// Output buffer shorter than required.
    AtBufferTooSmall = 8,
    /// Internal panic; the handle should not be reused.
    AtPanic = 9,
}

/// A chain together with its solved hitting times.
pub struct AtChain {
    spec: ChainSpec,
    inner: Inner,
}

enum Inner {
    Family(Box<FamilyModel>),
    Plain(Box<SolvedChain>),
}

impl AtChain {
    fn solved(&self) -> &SolvedChain {
        match &self.inner {
            Inner::Family(m) => m.solved(),
            Inner::Plain(s) => s,
        }
    }
}

/// Closed-form report for a family chain. `erratum_flag` is -1 when not
/// applicable (families other than birth-death), and `mirror_corrected` is
/// NaN in that case.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct AtFamilyReport {
    pub exact: f64,
    pub lower: f64,
    pub upper: f64,
    pub solver_value: f64,
    pub discrepancy: f64,
    pub erratum_flag: i32,
    pub mirror_corrected: f64,
}

/// Summary of a Monte Carlo run of the independent-target stopping rule.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct AtSimSummary {
    pub samples: usize,
    pub mean_t: f64,
    pub standard_error: f64,
    pub tv_to_target: f64,
    pub theoretical_mean: f64,
    pub access_time: f64,
    /// 1 when the mean lies within four standard errors of the theory.
    pub within_band: i32,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> AtStatus {
    match e {
        Error::InvalidSpec(_) | Error::NotStochastic { .. } => AtStatus::AtInvalidSpec,
        Error::InvalidDistribution(_) => AtStatus::AtInvalidDistribution,
        Error::DimensionMismatch { .. } => AtStatus::AtDimensionMismatch,
        Error::Reducible(_) => AtStatus::AtReducible,
        Error::Singular(_) => AtStatus::AtSingular,
        Error::InvalidArgument(_) | Error::Io(_) => AtStatus::AtInvalidArgument,
        Error::NotReversible(_)
        | Error::AsymmetricHitting(_)
        | Error::TooLarge { .. }
        | Error::NonIntegerLabels
        | Error::Unsupported(_) => AtStatus::AtUnsupported,
    }
}

/// Failure carried out of a guarded body.
struct Fail(AtStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn invalid(msg: &str) -> Fail {
    Fail(AtStatus::AtInvalidArgument, msg.to_string())
}

/// Runs `body`, converting errors and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), Fail>) -> AtStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error("");
            AtStatus::AtOk
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            AtStatus::AtPanic
        }
    }
}

unsafe fn chain_ref<'a>(chain: *const AtChain) -> Result<&'a AtChain, Fail> {
    // SAFETY: the caller passes null or a live handle from `at_chain_new`.
    unsafe { chain.as_ref() }.ok_or_else(|| invalid("chain handle is null"))
}

unsafe fn str_arg<'a>(s: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if s.is_null() {
        return Err(invalid(&format!("{what} is null")));
    }
    // SAFETY: the caller passes a NUL-terminated string.
    unsafe { CStr::from_ptr(s) }
        .to_str()
        .map_err(|_| invalid(&format!("{what} is not valid UTF-8")))
}

unsafe fn dist_arg(w: *const f64, len: usize, what: &str) -> Result<ProbabilityVector, Fail> {
    if w.is_null() {
        return Err(invalid(&format!("{what} is null")));
    }
    // SAFETY: the caller passes `len` readable doubles.
    let slice = unsafe { std::slice::from_raw_parts(w, len) };
    Ok(ProbabilityVector::new(slice.to_vec())?)
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    // SAFETY: the caller passes null or a writable pointer.
    unsafe { p.as_mut() }.ok_or_else(|| invalid(&format!("{what} is null")))
}

unsafe fn out_slice<'a>(p: *mut f64, len: usize, need: usize) -> Result<&'a mut [f64], Fail> {
    if p.is_null() {
        return Err(invalid("output buffer is null"));
    }
    if len < need {
        return Err(Fail(
            AtStatus::AtBufferTooSmall,
            format!("output buffer holds {len} values, {need} needed"),
        ));
    }
    // SAFETY: the caller passes `len >= need` writable doubles.
    Ok(unsafe { std::slice::from_raw_parts_mut(p, need) })
}

/// Builds and solves a chain from a JSON spec such as
/// `{"family":"path","n":10}`. On success `*out` owns a handle to be
/// released with [`at_chain_free`].
///
/// # Safety
/// `spec_json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn at_chain_new(spec_json: *const c_char, out: *mut *mut AtChain) -> AtStatus {
    guard(|| {
        let out = unsafe { out_ref(out, "out") }?;
        *out = std::ptr::null_mut();
        let text = unsafe { str_arg(spec_json, "spec_json") }?;
        let spec: ChainSpec =
            serde_json::from_str(text).map_err(|e| Fail(AtStatus::AtInvalidSpec, format!("invalid chain spec: {e}")))?;
        spec.validate()?;
        let inner = if has_closed_form(&spec) {
            Inner::Family(Box::new(FamilyModel::new(spec.clone())?))
        } else {
            Inner::Plain(Box::new(SolvedChain::new(build_chain(&spec)?)?))
        };
        *out = Box::into_raw(Box::new(AtChain { spec, inner }));
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `chain` must be null or a handle from [`at_chain_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn at_chain_free(chain: *mut AtChain) {
    if !chain.is_null() {
        // SAFETY: ownership returns from the caller.
        drop(unsafe { Box::from_raw(chain) });
    }
}

/// Number of states, or 0 for a null handle.
///
/// # Safety
/// `chain` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn at_chain_size(chain: *const AtChain) -> usize {
    // SAFETY: forwarded from the caller.
    unsafe { chain.as_ref() }.map_or(0, |c| c.solved().size())
}

/// `H(mu, nu)` for weight vectors of length `len`. `argmax_target` may be
/// null; otherwise it receives the smallest maximizing target index.
///
/// # Safety
/// `mu` and `nu` must point to `len` doubles; `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn at_access_time(
    chain: *const AtChain,
    mu: *const f64,
    nu: *const f64,
    len: usize,
    value: *mut f64,
    argmax_target: *mut usize,
) -> AtStatus {
    guard(|| {
        let chain = unsafe { chain_ref(chain) }?;
        let (mu, nu) = unsafe { (dist_arg(mu, len, "mu")?, dist_arg(nu, len, "nu")?) };
        let value = unsafe { out_ref(value, "value") }?;
        let r = chain.solved().access(&mu, &nu)?;
        *value = r.value;
        if let Some(a) = unsafe { argmax_target.as_mut() } {
            *a = r.argmax_target;
        }
        Ok(())
    })
}

/// `H(mu, nu)` for distributions in the command-line shorthand
/// (`dirac:K`, `uniform`, `binomial:P`, `stationary`, or JSON).
///
/// # Safety
/// `mu_spec` and `nu_spec` must be NUL-terminated; `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn at_access_time_spec(
    chain: *const AtChain,
    mu_spec: *const c_char,
    nu_spec: *const c_char,
    value: *mut f64,
) -> AtStatus {
    guard(|| {
        let chain = unsafe { chain_ref(chain) }?;
        let (mu_s, nu_s) = unsafe { (str_arg(mu_spec, "mu_spec")?, str_arg(nu_spec, "nu_spec")?) };
        let value = unsafe { out_ref(value, "value") }?;
        let solved = chain.solved();
        let mu = build_distribution(&DistSpec::parse(mu_s)?, &solved.chain)?;
        let nu = build_distribution(&DistSpec::parse(nu_s)?, &solved.chain)?;
        *value = solved.access(&mu, &nu)?.value;
        Ok(())
    })
}

/// Writes the `N x N` mean hitting-time matrix in row-major order: entry
/// `i * N + j` is `E_i[tau_j]`.
///
/// # Safety
/// `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn at_hitting_matrix(chain: *const AtChain, out: *mut f64, len: usize) -> AtStatus {
    guard(|| {
        let chain = unsafe { chain_ref(chain) }?;
        let hits = &chain.solved().hits;
        let n = hits.size();
        let out = unsafe { out_slice(out, len, n * n) }?;
        for i in 0..n {
            out[i * n..(i + 1) * n].copy_from_slice(hits.matrix().row(i));
        }
        Ok(())
    })
}

/// Writes the stationary distribution.
///
/// # Safety
/// `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn at_stationary(chain: *const AtChain, out: *mut f64, len: usize) -> AtStatus {
    guard(|| {
        let chain = unsafe { chain_ref(chain) }?;
        let pi = chain.solved().stationary.weights();
        unsafe { out_slice(out, len, pi.len()) }?.copy_from_slice(pi);
        Ok(())
    })
}

/// Largest mean hitting time and the pair attaining it. `from` and `to`
/// may be null.
///
/// # Safety
/// `value` must be writable; `from` and `to` null or writable.
#[no_mangle]
pub unsafe extern "C" fn at_max_hitting(
    chain: *const AtChain,
    value: *mut f64,
    from: *mut usize,
    to: *mut usize,
) -> AtStatus {
    guard(|| {
        let chain = unsafe { chain_ref(chain) }?;
        let value = unsafe { out_ref(value, "value") }?;
        let (max, (i, j)) = chain.solved().max_hitting();
        *value = max;
        if let Some(f) = unsafe { from.as_mut() } {
            *f = i;
        }
        if let Some(t) = unsafe { to.as_mut() } {
            *t = j;
        }
        Ok(())
    })
}

/// `t_av = sum_{i,j} pi_i pi_j E_i[tau_j]`.
///
/// # Safety
/// `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn at_tav(chain: *const AtChain, value: *mut f64) -> AtStatus {
    guard(|| {
        let chain = unsafe { chain_ref(chain) }?;
        *unsafe { out_ref(value, "value") }? = chain.solved().tav();
        Ok(())
    })
}

/// Closed form, bounds and solver cross-check for a family chain.
/// Returns `AtUnsupported` for families without a closed form.
///
/// # Safety
/// `mu` and `nu` must point to `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn at_family_report(
    chain: *const AtChain,
    mu: *const f64,
    nu: *const f64,
    len: usize,
    out: *mut AtFamilyReport,
) -> AtStatus {
    guard(|| {
        let chain = unsafe { chain_ref(chain) }?;
        let (mu, nu) = unsafe { (dist_arg(mu, len, "mu")?, dist_arg(nu, len, "nu")?) };
        let out = unsafe { out_ref(out, "out") }?;
        let Inner::Family(model) = &chain.inner else {
            return Err(Fail(
                AtStatus::AtUnsupported,
                format!("family {} has no closed form", chain.spec.family_name()),
            ));
        };
        let r = model.report(&mu, &nu)?;
        *out = AtFamilyReport {
            exact: r.exact,
            lower: r.lower,
            upper: r.upper,
            solver_value: r.solver_value,
            discrepancy: r.discrepancy,
            erratum_flag: r.erratum_flag.map_or(-1, i32::from),
            mirror_corrected: r.mirror_corrected.unwrap_or(f64::NAN),
        };
        Ok(())
    })
}

/// Simulates the independent-target stopping rule from `mu` to `nu`
/// (at least 1000 samples). Reproducible for a fixed `seed`.
///
/// # Safety
/// `mu` and `nu` must point to `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn at_simulate(
    chain: *const AtChain,
    mu: *const f64,
    nu: *const f64,
    len: usize,
    samples: usize,
    seed: u64,
    out: *mut AtSimSummary,
) -> AtStatus {
    guard(|| {
        let chain = unsafe { chain_ref(chain) }?;
        let (mu, nu) = unsafe { (dist_arg(mu, len, "mu")?, dist_arg(nu, len, "nu")?) };
        let out = unsafe { out_ref(out, "out") }?;
        let r = simulate_rule_solved(chain.solved(), &mu, &nu, StoppingRule::IndependentTarget, samples, seed)?;
        *out = AtSimSummary {
            samples: r.samples,
            mean_t: r.mean_t,
            standard_error: r.stderr,
            tv_to_target: r.tv_to_target,
            theoretical_mean: r.theoretical_mean,
            access_time: r.access_time,
            within_band: i32::from(r.within_band),
        };
        Ok(())
    })
}

/// Message for the last failed call on this thread, or an empty string.
/// Valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn at_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn at_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

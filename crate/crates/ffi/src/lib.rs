//! C ABI over `dihedral-cutoff`.
//!
//! Every function returns a [`DcStatus`]; results go through out-pointers.
//! On failure the thread-local message is readable with [`dc_last_error`].
//! Handles are opaque and owned by the caller until passed to their `_free`.

#![deny(unsafe_op_in_unsafe_fn)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use dihedral_cutoff::entropy::{cutoff_time, entropic_time, srw_entropy, Regime};
use dihedral_cutoff::exact::spectral::{DEFAULT_STEP_BUDGET, DEFAULT_TOL};
use dihedral_cutoff::exact::{collision_exact, step_measure, tv_exact, DistVector, EvolveOptions, Evolver};
use dihedral_cutoff::group::{sample_balanced_generator_set, sample_generator_set};
use dihedral_cutoff::rng::stream;
use dihedral_cutoff::{Error, GeneratorSet, GroupParams};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    ScaleGuard = 4,
    StepBudget = 5,
    InvalidDistribution = 6,
    NonMonotone = 7,
    NonConvergence = 8,
    Parse = 9,
    Io = 10,
    BufferTooSmall = 11,
    Panic = 12,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DcRegime {
    Small = 0,
    Comparable = 1,
    Large = 2,
}

/// A generator set together with its group.
pub struct DcGeneratorSet {
    params: GroupParams,
    gens: GeneratorSet,
}

/// A probability vector on D_n in flat-index order.
pub struct DcDist {
    dist: DistVector,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> DcStatus {
    match e {
        Error::Domain(_) => DcStatus::Domain,
        Error::ScaleGuard { .. } => DcStatus::ScaleGuard,
        Error::StepBudget { .. } => DcStatus::StepBudget,
        Error::InvalidDistribution(_) => DcStatus::InvalidDistribution,
        Error::NonMonotone { .. } => DcStatus::NonMonotone,
        Error::NonConvergence(_) | Error::MissingGrid(_) => DcStatus::NonConvergence,
        Error::Io { .. } => DcStatus::Io,
        Error::Json(_) | Error::Parse(_) => DcStatus::Parse,
    }
}

fn fail(status: DcStatus, msg: impl Into<String>) -> DcStatus {
    set_error(msg.into());
    status
}

/// Runs `f`, mapping library errors and panics to a status.
fn guard(f: impl FnOnce() -> Result<(), DcStatus>) -> DcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            DcStatus::Ok
        }
        Ok(Err(s)) => s,
        Err(_) => fail(DcStatus::Panic, "internal panic"),
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, DcStatus>;
}

impl<T> OrStatus<T> for dihedral_cutoff::Result<T> {
    fn or_status(self) -> Result<T, DcStatus> {
        self.map_err(|e| fail(status_of(&e), e.to_string()))
    }
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), DcStatus> {
    if p.is_null() {
        Err(fail(DcStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

/// Message for the last failed call on this thread, or NULL. Valid until the
/// next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn dc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Draws k uniform generators of D_n from `seed`. With `balanced` nonzero,
/// resamples up to `max_tries` times until the reflection share is balanced.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dc_gens_sample(
    n: u64,
    k: usize,
    seed: u64,
    balanced: bool,
    max_tries: usize,
    out: *mut *mut DcGeneratorSet,
) -> DcStatus {
    guard(|| {
        non_null(out, "out")?;
        let params = GroupParams::new(n).or_status()?;
        let mut rng = stream(seed, 0);
        let gens = if balanced {
            sample_balanced_generator_set(&params, k, &mut rng, max_tries).or_status()?.0
        } else {
            sample_generator_set(&params, k, &mut rng).or_status()?
        };
        let h = Box::new(DcGeneratorSet {
            params,
            gens: gens.with_seed(seed),
        });
        unsafe { *out = Box::into_raw(h) };
        Ok(())
    })
}

/// Parses a generator set from its JSON form.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dc_gens_from_json(json: *const c_char, out: *mut *mut DcGeneratorSet) -> DcStatus {
    guard(|| {
        non_null(json, "json")?;
        non_null(out, "out")?;
        let text = unsafe { CStr::from_ptr(json) }
            .to_str()
            .map_err(|_| fail(DcStatus::Parse, "json is not UTF-8"))?;
        let (params, gens) = GeneratorSet::from_json(text).or_status()?;
        unsafe { *out = Box::into_raw(Box::new(DcGeneratorSet { params, gens })) };
        Ok(())
    })
}

/// Writes the JSON form into `buf` (NUL-terminated). `*len` receives the
/// byte length without the NUL; `BufferTooSmall` when `cap <= *len`.
///
/// # Safety
/// `gs` must come from this library; `buf` must hold `cap` bytes (may be
/// NULL when `cap` is 0); `len` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dc_gens_to_json(
    gs: *const DcGeneratorSet,
    buf: *mut c_char,
    cap: usize,
    len: *mut usize,
) -> DcStatus {
    guard(|| {
        non_null(gs, "gs")?;
        non_null(len, "len")?;
        let text = unsafe { &*gs }.gens.to_json();
        unsafe { *len = text.len() };
        if cap <= text.len() {
            return Err(fail(DcStatus::BufferTooSmall, format!("need {} bytes", text.len() + 1)));
        }
        non_null(buf, "buf")?;
        unsafe {
            std::ptr::copy_nonoverlapping(text.as_ptr(), buf.cast::<u8>(), text.len());
            *buf.add(text.len()) = 0;
        }
        Ok(())
    })
}

/// # Safety
/// `gs` must come from this library; out-pointers valid for writes or NULL.
#[no_mangle]
pub unsafe extern "C" fn dc_gens_info(
    gs: *const DcGeneratorSet,
    n: *mut u64,
    k: *mut usize,
    k_s: *mut usize,
) -> DcStatus {
    guard(|| {
        non_null(gs, "gs")?;
        let gs = unsafe { &*gs };
        unsafe {
            if !n.is_null() {
                *n = gs.params.n();
            }
            if !k.is_null() {
                *k = gs.gens.k();
            }
            if !k_s.is_null() {
                *k_s = gs.gens.k_s();
            }
        }
        Ok(())
    })
}

/// # Safety
/// `gs` must come from this library and not be used afterwards. NULL is a no-op.
#[no_mangle]
pub unsafe extern "C" fn dc_gens_free(gs: *mut DcGeneratorSet) {
    if !gs.is_null() {
        drop(unsafe { Box::from_raw(gs) });
    }
}

/// Law of the continuous-time walk from the identity at time `t`.
/// `tol <= 0` and `step_budget == 0` select the defaults.
///
/// # Safety
/// `gs` must come from this library and `out` be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dc_evolve(
    gs: *const DcGeneratorSet,
    t: f64,
    tol: f64,
    step_budget: u64,
    out: *mut *mut DcDist,
) -> DcStatus {
    guard(|| {
        non_null(gs, "gs")?;
        non_null(out, "out")?;
        let gs = unsafe { &*gs };
        let opts = EvolveOptions {
            tol: if tol > 0.0 { tol } else { DEFAULT_TOL },
            step_budget: if step_budget > 0 { step_budget } else { DEFAULT_STEP_BUDGET },
        };
        opts.check().or_status()?;
        let p = &gs.params;
        let ev = Evolver::new(&DistVector::identity(p), &step_measure(&gs.gens, p), p);
        let dist = ev.evolve(t, opts).or_status()?.dist;
        unsafe { *out = Box::into_raw(Box::new(DcDist { dist })) };
        Ok(())
    })
}

/// Total variation distance to uniform.
///
/// # Safety
/// `d` must come from this library and `out` be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dc_dist_tv(d: *const DcDist, out: *mut f64) -> DcStatus {
    guard(|| {
        non_null(d, "dist")?;
        non_null(out, "out")?;
        unsafe { *out = tv_exact(&(*d).dist) };
        Ok(())
    })
}

/// `|G| · Σ f² − 1`.
///
/// # Safety
/// `d` must come from this library and `out` be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dc_dist_collision(d: *const DcDist, out: *mut f64) -> DcStatus {
    guard(|| {
        non_null(d, "dist")?;
        non_null(out, "out")?;
        unsafe { *out = collision_exact(&(*d).dist) };
        Ok(())
    })
}

/// Number of entries, 2n.
///
/// # Safety
/// `d` must come from this library and `out` be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dc_dist_len(d: *const DcDist, out: *mut usize) -> DcStatus {
    guard(|| {
        non_null(d, "dist")?;
        non_null(out, "out")?;
        unsafe { *out = (*d).dist.len() };
        Ok(())
    })
}

/// Copies the probabilities, rotations then reflections.
///
/// # Safety
/// `d` must come from this library and `buf` hold `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn dc_dist_copy_probs(d: *const DcDist, buf: *mut f64, cap: usize) -> DcStatus {
    guard(|| {
        non_null(d, "dist")?;
        let probs = unsafe { (*d).dist.probs() };
        if cap < probs.len() {
            return Err(fail(DcStatus::BufferTooSmall, format!("need {} doubles", probs.len())));
        }
        non_null(buf, "buf")?;
        unsafe { std::ptr::copy_nonoverlapping(probs.as_ptr(), buf, probs.len()) };
        Ok(())
    })
}

/// # Safety
/// `d` must come from this library and not be used afterwards. NULL is a no-op.
#[no_mangle]
pub unsafe extern "C" fn dc_dist_free(d: *mut DcDist) {
    if !d.is_null() {
        drop(unsafe { Box::from_raw(d) });
    }
}

/// Cutoff time t₀ for k generators of a group of order `group_size`.
///
/// # Safety
/// `t0` must be valid for writes; `regime` valid for writes or NULL.
#[no_mangle]
pub unsafe extern "C" fn dc_cutoff_time(k: u64, group_size: u64, t0: *mut f64, regime: *mut DcRegime) -> DcStatus {
    guard(|| {
        non_null(t0, "t0")?;
        let ct = cutoff_time(k, group_size).or_status()?;
        unsafe {
            *t0 = ct.t0;
            if !regime.is_null() {
                *regime = match ct.regime {
                    Regime::Small => DcRegime::Small,
                    Regime::Comparable => DcRegime::Comparable,
                    Regime::Large => DcRegime::Large,
                };
            }
        }
        Ok(())
    })
}

/// Solves `k · h(t/k) = log_n` (natural log) for t.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dc_entropic_time(k: u64, log_n: f64, tol: f64, out: *mut f64) -> DcStatus {
    guard(|| {
        non_null(out, "out")?;
        unsafe { *out = entropic_time(k, log_n, tol).or_status()? };
        Ok(())
    })
}

/// Entropy in nats of the rate-1 simple random walk on ℤ at time `s`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dc_srw_entropy(s: f64, out: *mut f64) -> DcStatus {
    guard(|| {
        non_null(out, "out")?;
        if !(s >= 0.0 && s.is_finite()) {
            return Err(fail(DcStatus::InvalidArgument, format!("s must be finite and >= 0, got {s}")));
        }
        unsafe { *out = srw_entropy(s).value };
        Ok(())
    })
}

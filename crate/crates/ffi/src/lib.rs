//! C ABI over the spinmetro library.
//!
//! States live behind the opaque [`SmState`] handle. Every entry point
//! returns an [`SmStatus`]; on failure a message is kept per thread and can be
//! copied out with [`sm_last_error_message`]. Panics are caught at the
//! boundary and reported as `SM_STATUS_PANIC`.
//!
//! Spins are passed as 2s. Arrays of complex numbers are passed as separate
//! real and imaginary arrays.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use spinmetro::descent::{descend, DescentConfig, Direction};
use spinmetro::metrology::{avg_fidelity, Family};
use spinmetro::states::{
    anticoherence_order, majorana_constellation, named_state, r_vector, random_pure, AnyState, DensityLike,
    MixedState, NamedState, PureState,
};
use spinmetro::wigner::{clebsch_gordan, six_j, Spin};
use spinmetro::{io, CMat, CVec, Error, C64};

/// Status codes returned by every function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SmStatus {
    Ok = 0,
    /// a required pointer argument was null
    Null = 1,
    Domain = 2,
    SpinTooLarge = 3,
    Dimension = 4,
    Unsupported = 5,
    Numerical = 6,
    Io = 7,
    Parse = 8,
    /// output buffer too small; the required length is reported
    Buffer = 9,
    Panic = 10,
}

/// Opaque state handle. Create with `sm_state_*`, release with `sm_state_free`.
pub struct SmState {
    inner: AnyState,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> SmStatus {
    match e {
        Error::Domain(_) => SmStatus::Domain,
        Error::SpinTooLarge { .. } => SmStatus::SpinTooLarge,
        Error::Dimension { .. } => SmStatus::Dimension,
        Error::Unsupported(_) => SmStatus::Unsupported,
        Error::Numerical(_) => SmStatus::Numerical,
        Error::Io(_) => SmStatus::Io,
        Error::Parse(_) => SmStatus::Parse,
    }
}

struct Fail(SmStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Fail {
        Fail(status_of(&e), e.to_string())
    }
}

type FfiResult = std::result::Result<(), Fail>;

fn null(what: &str) -> Fail {
    Fail(SmStatus::Null, format!("null pointer: {what}"))
}

fn guard(f: impl FnOnce() -> FfiResult) -> SmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            SmStatus::Ok
        }
        Ok(Err(Fail(code, msg))) => {
            set_error(msg);
            code
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            SmStatus::Panic
        }
    }
}

unsafe fn state_ref<'a>(p: *const SmState) -> Result<&'a AnyState, Fail> {
    p.as_ref().map(|s| &s.inner).ok_or_else(|| null("state"))
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(SmStatus::Parse, format!("{what} is not valid UTF-8")))
}

unsafe fn complex_arg(re: *const f64, im: *const f64, n: usize) -> Result<Vec<C64>, Fail> {
    if n == 0 {
        return Ok(Vec::new());
    }
    if re.is_null() {
        return Err(null("re"));
    }
    let re = std::slice::from_raw_parts(re, n);
    // a null imaginary part means a real array
    let im = if im.is_null() { None } else { Some(std::slice::from_raw_parts(im, n)) };
    Ok((0..n).map(|i| C64::new(re[i], im.map_or(0.0, |v| v[i]))).collect())
}

fn pure_of(state: &AnyState) -> Result<&PureState, Fail> {
    state
        .as_pure()
        .ok_or_else(|| Fail(SmStatus::Unsupported, "operation needs a pure state".into()))
}

fn boxed(out: &mut *mut SmState, inner: AnyState) {
    *out = Box::into_raw(Box::new(SmState { inner }));
}

/// Copies the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length excluding the NUL.
/// `buf` may be null to query the length.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn sm_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr(), buf as *mut u8, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Largest supported 2s.
#[no_mangle]
pub extern "C" fn sm_max_twice_s() -> u32 {
    spinmetro::wigner::max_two_s()
}

/// Named benchmark state ("coherent", "ghz", "w", "tetrahedron", "prism",
/// "bipyramid", "psi32", "pyramid", or "maximally-mixed").
///
/// # Safety
/// `tag` must be a NUL-terminated string, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sm_state_named(twice_s: u32, tag: *const c_char, out: *mut *mut SmState) -> SmStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let tag = str_arg(tag, "tag")?;
        let s = Spin::supported(twice_s)?;
        let t = tag.trim().to_ascii_lowercase();
        let inner = if t == "maximally-mixed" || t == "mm" {
            AnyState::Mixed(MixedState::maximally_mixed(s)?)
        } else {
            AnyState::Pure(named_state(NamedState::parse(&t)?, s)?)
        };
        boxed(out, inner);
        Ok(())
    })
}

/// Pure state from 2s+1 amplitudes ordered m = s, s−1, …, −s. `im` may be
/// null for real amplitudes. The vector is normalized; a zero vector is a
/// domain error.
///
/// # Safety
/// `re` (and `im` if non-null) must point to `n` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sm_state_pure(
    twice_s: u32,
    re: *const f64,
    im: *const f64,
    n: usize,
    out: *mut *mut SmState,
) -> SmStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let s = Spin::supported(twice_s)?;
        let amps = complex_arg(re, im, n)?;
        let psi = PureState::new(s, CVec::from_vec(amps))?;
        boxed(out, AnyState::Pure(psi));
        Ok(())
    })
}

/// Density matrix from n×n row-major entries, n = 2s+1.
///
/// # Safety
/// `re` (and `im` if non-null) must point to `n_entries` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sm_state_mixed(
    twice_s: u32,
    re: *const f64,
    im: *const f64,
    n_entries: usize,
    out: *mut *mut SmState,
) -> SmStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let s = Spin::supported(twice_s)?;
        let n = s.dim();
        if n_entries != n * n {
            return Err(Error::Dimension {
                expected: n * n,
                got: n_entries,
            }
            .into());
        }
        let z = complex_arg(re, im, n_entries)?;
        let m = CMat::from_row_slice(n, n, &z);
        boxed(out, AnyState::Mixed(MixedState::new(s, m)?));
        Ok(())
    })
}

/// Haar-random pure state from a seed.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sm_state_random_pure(twice_s: u32, seed: u64, out: *mut *mut SmState) -> SmStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let s = Spin::supported(twice_s)?;
        boxed(out, AnyState::Pure(random_pure(s, seed)?));
        Ok(())
    })
}

/// Parses a JSON state file body.
///
/// # Safety
/// `json` must be a NUL-terminated string, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sm_state_from_json(json: *const c_char, out: *mut *mut SmState) -> SmStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let text = str_arg(json, "json")?;
        boxed(out, io::state_from_json(text)?);
        Ok(())
    })
}

/// Writes the JSON form of a state into `buf` (NUL-terminated). `needed`
/// receives the length excluding the NUL; if `len` is too small nothing is
/// written and `SM_STATUS_BUFFER` is returned.
///
/// # Safety
/// `state` must be a live handle; `buf` null or `len` writable bytes; `needed` valid.
#[no_mangle]
pub unsafe extern "C" fn sm_state_to_json(
    state: *const SmState,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> SmStatus {
    guard(|| {
        let st = state_ref(state)?;
        let needed = out_ref(needed, "needed")?;
        let text = io::state_to_json(st)?;
        *needed = text.len();
        if buf.is_null() || len <= text.len() {
            return Err(Fail(SmStatus::Buffer, format!("buffer needs {} bytes", text.len() + 1)));
        }
        std::ptr::copy_nonoverlapping(text.as_ptr(), buf as *mut u8, text.len());
        *buf.add(text.len()) = 0;
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `state` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sm_state_free(state: *mut SmState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Spin 2s and Hilbert space dimension of a state; either output may be null.
///
/// # Safety
/// `state` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sm_state_spin(state: *const SmState, twice_s: *mut u32, dim: *mut usize) -> SmStatus {
    guard(|| {
        let st = state_ref(state)?;
        if let Some(t) = twice_s.as_mut() {
            *t = st.spin().twice_s();
        }
        if let Some(d) = dim.as_mut() {
            *d = st.spin().dim();
        }
        Ok(())
    })
}

/// 1 for a pure state handle, 0 for a density matrix.
///
/// # Safety
/// `state` must be a live handle, `is_pure` valid.
#[no_mangle]
pub unsafe extern "C" fn sm_state_is_pure(state: *const SmState, is_pure: *mut i32) -> SmStatus {
    guard(|| {
        let st = state_ref(state)?;
        *out_ref(is_pure, "is_pure")? = st.as_pure().is_some() as i32;
        Ok(())
    })
}

/// Tr ρ².
///
/// # Safety
/// `state` must be a live handle, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn sm_purity(state: *const SmState, out: *mut f64) -> SmStatus {
    guard(|| {
        let st = state_ref(state)?;
        *out_ref(out, "out")? = st.purity();
        Ok(())
    })
}

/// Shell weights r_0..r_{2s}; `len` must be at least 2s+1.
///
/// # Safety
/// `state` must be a live handle, `out` `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn sm_r_vector(state: *const SmState, out: *mut f64, len: usize) -> SmStatus {
    guard(|| {
        let st = state_ref(state)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let r = r_vector(st)?.r;
        if len < r.len() {
            return Err(Error::Dimension {
                expected: r.len(),
                got: len,
            }
            .into());
        }
        std::ptr::copy_nonoverlapping(r.as_ptr(), out, r.len());
        Ok(())
    })
}

/// Largest t with vanishing coherences r_1..r_t (within `tol`); pure states only.
///
/// # Safety
/// `state` must be a live handle, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn sm_anticoherence_order(state: *const SmState, tol: f64, out: *mut u32) -> SmStatus {
    guard(|| {
        let st = state_ref(state)?;
        let out = out_ref(out, "out")?;
        *out = anticoherence_order(pure_of(st)?, tol)?;
        Ok(())
    })
}

/// SU(2)-averaged fidelity under a transform family ("rotation",
/// "squeezing", "squeezing-k") at angle `eta` in radians.
///
/// # Safety
/// `state` must be a live handle, `family` NUL-terminated, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn sm_avg_fidelity(
    state: *const SmState,
    family: *const c_char,
    eta: f64,
    out: *mut f64,
) -> SmStatus {
    guard(|| {
        let st = state_ref(state)?;
        let out = out_ref(out, "out")?;
        let fam = Family::parse(str_arg(family, "family")?)?;
        let v = fam.transform(st.spin(), eta)?;
        *out = avg_fidelity(st, &v)?;
        Ok(())
    })
}

/// Gradient flow of the cumulative coherence c_t from a pure state.
/// `backward` nonzero ascends instead of descending. The final state is
/// returned as a new handle; `final_c` and `converged` may be null.
///
/// # Safety
/// `state` must be a live handle, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn sm_descend(
    state: *const SmState,
    t: u32,
    backward: i32,
    tol: f64,
    max_steps: usize,
    out: *mut *mut SmState,
    final_c: *mut f64,
    converged: *mut i32,
) -> SmStatus {
    guard(|| {
        let st = state_ref(state)?;
        let out = out_ref(out, "out")?;
        let cfg = DescentConfig {
            t,
            tol,
            max_steps,
            direction: if backward != 0 { Direction::Backward } else { Direction::Forward },
            sample_every: max_steps.max(1),
            ..DescentConfig::default()
        };
        let trace = descend(pure_of(st)?, &cfg)?;
        if let Some(c) = final_c.as_mut() {
            *c = trace.final_coherence();
        }
        if let Some(c) = converged.as_mut() {
            *c = trace.converged as i32;
        }
        boxed(out, AnyState::Pure(trace.final_state().clone()));
        Ok(())
    })
}

/// Majorana constellation of a pure state: 2s stars as polar and azimuthal
/// angles. `len` must be at least 2s.
///
/// # Safety
/// `state` must be a live handle, `theta` and `phi` `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn sm_majorana(state: *const SmState, theta: *mut f64, phi: *mut f64, len: usize) -> SmStatus {
    guard(|| {
        let st = state_ref(state)?;
        if theta.is_null() || phi.is_null() {
            return Err(null("theta/phi"));
        }
        let c = majorana_constellation(pure_of(st)?)?;
        if len < c.stars.len() {
            return Err(Error::Dimension {
                expected: c.stars.len(),
                got: len,
            }
            .into());
        }
        for (i, s) in c.stars.iter().enumerate() {
            *theta.add(i) = s.theta;
            *phi.add(i) = s.phi;
        }
        Ok(())
    })
}

/// Clebsch-Gordan coefficient ⟨j1 m1; j2 m2 | j m⟩, all labels doubled.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sm_clebsch_gordan(
    twice_j1: u32,
    twice_m1: i32,
    twice_j2: u32,
    twice_m2: i32,
    twice_j: u32,
    twice_m: i32,
    out: *mut f64,
) -> SmStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = clebsch_gordan(
            Spin::new(twice_j1),
            twice_m1,
            Spin::new(twice_j2),
            twice_m2,
            Spin::new(twice_j),
            twice_m,
        )?;
        Ok(())
    })
}

/// Wigner 6j symbol {j1 j2 j3; j4 j5 j6} from six doubled labels.
///
/// # Safety
/// `twice_j` must point to 6 values, `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sm_six_j(twice_j: *const u32, out: *mut f64) -> SmStatus {
    guard(|| {
        if twice_j.is_null() {
            return Err(null("twice_j"));
        }
        let out = out_ref(out, "out")?;
        let j = std::slice::from_raw_parts(twice_j, 6);
        *out = six_j([0, 1, 2, 3, 4, 5].map(|i| Spin::new(j[i])));
        Ok(())
    })
}

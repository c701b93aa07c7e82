//! C ABI over the `karlin` crate.
//!
//! Handles are opaque pointers created by `*_new` functions and released by
//! the matching `*_free`. Every function returns a [`KarlinStatus`]; on
//! failure [`karlin_last_error_message`] describes the error of the most
//! recent call on the same thread. Panics never cross the boundary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use karlin::kernels::{chol_psd, cov_matrix_at, min_eig, sample_gp, CovMatrix, KernelSpec};
use karlin::montecarlo::{run_replicas, McConfig, McMode};
use karlin::poisson::{exact_cov, Component};
use karlin::rng::replica_rng;
use karlin::urn::{PathGrid, Process, SignMode};
use karlin::{KarlinError, WeightSequence};

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KarlinStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    NotPsd = 3,
    Numerical = 4,
    Overflow = 5,
    InvalidArgument = 6,
    Panic = 99,
}

/// Kernel families accepted by [`karlin_kernel_eval`] and [`karlin_cov_matrix_new`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KarlinKernelFamily {
    LimitZ1 = 0,
    LimitZ2 = 1,
    LimitZ = 2,
    LimitU1 = 3,
    LimitU2 = 4,
    LimitU = 5,
    Fbm = 6,
    Bifbm = 7,
    TimeChangedBm = 8,
}

/// Poissonized components for [`karlin_exact_cov`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KarlinComponent {
    Z1 = 0,
    Z2 = 1,
    U1 = 2,
    U2 = 3,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KarlinUrnMode {
    Discrete = 0,
    Poissonized = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KarlinSignMode {
    Random = 0,
    AllOnes = 1,
}

/// Number of processes written per replica by [`karlin_simulate`], in the
/// order Z*, U*, Z, U, Z1, Z2, U1, U2.
pub const KARLIN_NUM_PROCESSES: usize = 8;

/// Weight sequence handle.
pub struct KarlinWeights(WeightSequence);

/// Covariance matrix handle, optionally factored.
pub struct KarlinCovMatrix(CovMatrix);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &KarlinError) -> KarlinStatus {
    match e {
        KarlinError::Domain(_) | KarlinError::ZeroSigma(_) => KarlinStatus::Domain,
        KarlinError::InvalidGrid(_) | KarlinError::LengthMismatch { .. } | KarlinError::TooFewSamples { .. } => {
            KarlinStatus::InvalidArgument
        }
        KarlinError::NotPsd { .. } => KarlinStatus::NotPsd,
        KarlinError::Overflow(_) => KarlinStatus::Overflow,
        KarlinError::Quadrature(_) | KarlinError::Io(_) => KarlinStatus::Numerical,
    }
}

struct Fail(KarlinStatus, String);

impl From<KarlinError> for Fail {
    fn from(e: KarlinError) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(KarlinStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> KarlinStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            KarlinStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            KarlinStatus::Panic
        }
    }
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a>(p: *mut f64, len: usize, what: &str) -> Result<&'a mut [f64], Fail> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

fn kernel(family: KarlinKernelFamily, alpha: f64, hurst: f64, k: f64) -> Result<KernelSpec, Fail> {
    let spec = match family {
        KarlinKernelFamily::LimitZ1 => KernelSpec::LimitZ1 { alpha },
        KarlinKernelFamily::LimitZ2 => KernelSpec::LimitZ2 { alpha },
        KarlinKernelFamily::LimitZ => KernelSpec::LimitZ { alpha },
        KarlinKernelFamily::LimitU1 => KernelSpec::LimitU1 { alpha },
        KarlinKernelFamily::LimitU2 => KernelSpec::LimitU2 { alpha },
        KarlinKernelFamily::LimitU => KernelSpec::LimitU { alpha },
        KarlinKernelFamily::Fbm => KernelSpec::Fbm { hurst },
        KarlinKernelFamily::Bifbm => KernelSpec::BiFbm { hurst, k },
        KarlinKernelFamily::TimeChangedBm => KernelSpec::TimeChangedBm { alpha },
    };
    spec.validate()?;
    Ok(spec)
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn karlin_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn karlin_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Create the weight sequence `p_k = k^{-1/alpha} / zeta(1/alpha)`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn karlin_weights_new(alpha: f64, tail_tol: f64, out: *mut *mut KarlinWeights) -> KarlinStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let ws = karlin::make_weights(alpha, tail_tol)?;
        *out = Box::into_raw(Box::new(KarlinWeights(ws)));
        Ok(())
    })
}

/// Release a weight handle. Null is ignored.
///
/// # Safety
/// `w` must be null or a handle from [`karlin_weights_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn karlin_weights_free(w: *mut KarlinWeights) {
    if !w.is_null() {
        drop(Box::from_raw(w));
    }
}

unsafe fn weights<'a>(w: *const KarlinWeights) -> Result<&'a WeightSequence, Fail> {
    w.as_ref().map(|h| &h.0).ok_or_else(|| null("weights"))
}

/// `p_k` for `k >= 1`.
///
/// # Safety
/// `w` must be a live weight handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn karlin_weights_p(w: *const KarlinWeights, k: u64, out: *mut f64) -> KarlinStatus {
    guard(|| {
        let v = weights(w)?.weight(k)?;
        *out_ref(out, "out")? = v;
        Ok(())
    })
}

/// `nu(t) = #{k : p_k >= 1/t}`.
///
/// # Safety
/// `w` must be a live weight handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn karlin_weights_nu(w: *const KarlinWeights, t: f64, out: *mut u64) -> KarlinStatus {
    guard(|| {
        if !(t >= 0.0) {
            return Err(Fail(KarlinStatus::Domain, format!("t must be >= 0, got {t}")));
        }
        let v = weights(w)?.nu_count(t);
        *out_ref(out, "out")? = v;
        Ok(())
    })
}

/// `V(t) = sum_k (1 - exp(-p_k t))`.
///
/// # Safety
/// `w` must be a live weight handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn karlin_weights_big_v(w: *const KarlinWeights, t: f64, out: *mut f64) -> KarlinStatus {
    guard(|| {
        if !(t >= 0.0) {
            return Err(Fail(KarlinStatus::Domain, format!("t must be >= 0, got {t}")));
        }
        let v = weights(w)?.big_v(t);
        *out_ref(out, "out")? = v;
        Ok(())
    })
}

/// Normalization `sigma_n^2 = nu(n)`.
///
/// # Safety
/// `w` must be a live weight handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn karlin_weights_sigma2(w: *const KarlinWeights, n: f64, out: *mut f64) -> KarlinStatus {
    guard(|| {
        if !(n >= 0.0) {
            return Err(Fail(KarlinStatus::Domain, format!("n must be >= 0, got {n}")));
        }
        let v = weights(w)?.sigma2(n);
        *out_ref(out, "out")? = v;
        Ok(())
    })
}

/// `Gamma(1 - alpha)` for `alpha` in (0,1).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn karlin_gamma_one_minus_alpha(alpha: f64, out: *mut f64) -> KarlinStatus {
    guard(|| {
        let v = karlin::gamma_one_minus_alpha(alpha)?;
        *out_ref(out, "out")? = v;
        Ok(())
    })
}

/// Evaluate a covariance kernel at `(s, t)`. Unused parameters are ignored:
/// limit kernels read `alpha`, fBm reads `hurst`, bifractional reads `hurst` and `k`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn karlin_kernel_eval(
    family: KarlinKernelFamily,
    alpha: f64,
    hurst: f64,
    k: f64,
    s: f64,
    t: f64,
    out: *mut f64,
) -> KarlinStatus {
    guard(|| {
        let spec = kernel(family, alpha, hurst, k)?;
        let v = karlin::kernels::kernel_eval(&spec, s, t)?;
        *out_ref(out, "out")? = v;
        Ok(())
    })
}

/// Exact covariance of a Poissonized component at rate `n`, unnormalized.
///
/// # Safety
/// `w` must be a live weight handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn karlin_exact_cov(
    w: *const KarlinWeights,
    component: KarlinComponent,
    n: f64,
    s: f64,
    t: f64,
    out: *mut f64,
) -> KarlinStatus {
    guard(|| {
        let which = match component {
            KarlinComponent::Z1 => Component::Z1,
            KarlinComponent::Z2 => Component::Z2,
            KarlinComponent::U1 => Component::U1,
            KarlinComponent::U2 => Component::U2,
        };
        let v = exact_cov(which, weights(w)?, n, s, t)?;
        *out_ref(out, "out")? = v;
        Ok(())
    })
}

/// Simulate `replicas` independent replicas on the grid `times[0..len]`
/// (starting at 0, strictly increasing, at most 1).
///
/// `out` receives `replicas * KARLIN_NUM_PROCESSES * len` values laid out
/// as `[replica][process][time]`. With `normalize != 0` paths are divided
/// by `sigma_n`. Results depend only on the arguments, not on `workers`
/// (0 selects the default).
///
/// # Safety
/// `times` must point to `len` readable doubles and `out` to `out_len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn karlin_simulate(
    mode: KarlinUrnMode,
    alpha: f64,
    n: u64,
    times: *const f64,
    len: usize,
    replicas: usize,
    seed: u64,
    signs: KarlinSignMode,
    normalize: i32,
    workers: usize,
    out: *mut f64,
    out_len: usize,
) -> KarlinStatus {
    guard(|| {
        let grid = PathGrid::new(slice(times, len, "times")?.to_vec())?;
        let needed = replicas
            .checked_mul(KARLIN_NUM_PROCESSES * len)
            .ok_or_else(|| Fail(KarlinStatus::Overflow, "output size overflows".into()))?;
        if out_len != needed {
            return Err(Fail(KarlinStatus::InvalidArgument, format!("out_len must be {needed}, got {out_len}")));
        }
        let out = slice_mut(out, out_len, "out")?;
        let mode = match mode {
            KarlinUrnMode::Discrete => McMode::Discrete,
            KarlinUrnMode::Poissonized => McMode::Poissonized,
        };
        let mut cfg = McConfig::new(mode, alpha, n, grid, replicas, seed);
        cfg.sign_mode = match signs {
            KarlinSignMode::Random => SignMode::RandomRademacher,
            KarlinSignMode::AllOnes => SignMode::AllOnes,
        };
        cfg.processes = Process::ALL.to_vec();
        cfg.normalize = normalize != 0;
        cfg.parallel_workers = (workers > 0).then_some(workers);
        let set = run_replicas(&cfg)?;
        for (dst, row) in out.chunks_exact_mut(KARLIN_NUM_PROCESSES * len).zip(&set.values) {
            dst.copy_from_slice(row);
        }
        Ok(())
    })
}

/// Covariance matrix of a kernel on `times[0..len]` (any nonnegative points).
///
/// # Safety
/// `times` must point to `len` readable doubles and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn karlin_cov_matrix_new(
    family: KarlinKernelFamily,
    alpha: f64,
    hurst: f64,
    k: f64,
    times: *const f64,
    len: usize,
    out: *mut *mut KarlinCovMatrix,
) -> KarlinStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let spec = kernel(family, alpha, hurst, k)?;
        let t = slice(times, len, "times")?;
        if t.is_empty() {
            return Err(Fail(KarlinStatus::InvalidArgument, "times is empty".into()));
        }
        let cov = cov_matrix_at(&spec, t)?;
        *out = Box::into_raw(Box::new(KarlinCovMatrix(cov)));
        Ok(())
    })
}

/// Release a matrix handle. Null is ignored.
///
/// # Safety
/// `m` must be null or a handle from [`karlin_cov_matrix_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn karlin_cov_matrix_free(m: *mut KarlinCovMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Smallest eigenvalue of the matrix.
///
/// # Safety
/// `m` must be a live matrix handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn karlin_cov_matrix_min_eig(m: *const KarlinCovMatrix, out: *mut f64) -> KarlinStatus {
    guard(|| {
        let m = m.as_ref().ok_or_else(|| null("matrix"))?;
        *out_ref(out, "out")? = min_eig(&m.0);
        Ok(())
    })
}

/// Cholesky-factor the matrix in place, adding diagonal jitter if needed.
/// Returns `KARLIN_STATUS_NOT_PSD` when the jitter cap is exceeded.
///
/// # Safety
/// `m` must be a live matrix handle; `jitter_used` may be null.
#[no_mangle]
pub unsafe extern "C" fn karlin_cov_matrix_factor(m: *mut KarlinCovMatrix, jitter_used: *mut f64) -> KarlinStatus {
    guard(|| {
        let m = m.as_mut().ok_or_else(|| null("matrix"))?;
        m.0 = chol_psd(&m.0)?;
        if let Some(j) = jitter_used.as_mut() {
            *j = m.0.jitter_used();
        }
        Ok(())
    })
}

/// Draw path `index` of stream `seed` from a factored matrix into `out[0..len]`.
///
/// # Safety
/// `m` must be a live matrix handle and `out` point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn karlin_cov_matrix_sample(
    m: *const KarlinCovMatrix,
    seed: u64,
    index: u64,
    out: *mut f64,
    len: usize,
) -> KarlinStatus {
    guard(|| {
        let m = m.as_ref().ok_or_else(|| null("matrix"))?;
        if len != m.0.dim() {
            return Err(Fail(KarlinStatus::InvalidArgument, format!("len must be {}, got {len}", m.0.dim())));
        }
        let path = sample_gp(&m.0, &mut replica_rng(seed, index))?;
        slice_mut(out, len, "out")?.copy_from_slice(&path);
        Ok(())
    })
}

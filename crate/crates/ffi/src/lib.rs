//! C interface to the fracbm library.
//!
//! The unit of work is an opaque [`FbEngine`] handle holding one
//! (grid, Hurst exponent) pair and its kernel tables; creating the engine
//! pays the table cost once and every call against it reuses them. Path
//! buffers are caller-allocated flat arrays of `n + 1` doubles (node 0
//! included). Every function returns a status code, writes results only
//! through its out pointers, and never unwinds across the boundary.
//!
//! Engines are immutable after creation and safe to share across threads.

use fracbm::{
    density_for_drifted_path_with, fou_mle_with, norros_constants, sample_fbm, sample_fou, Error,
    FouParams, RngSeed, SampledPath, TimeGrid, Transformer,
};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Success.
pub const FB_OK: i32 = 0;
/// A required pointer argument was null.
pub const FB_ERR_NULL_ARG: i32 = 1;
/// A parameter is outside its domain or violates a precondition
/// (Hurst exponent outside (0,1), path not starting at the stated level).
pub const FB_ERR_INVALID_PARAM: i32 = 2;
/// A numerical failure inside the library (failed factorization,
/// non-finite input or intermediate).
pub const FB_ERR_NUMERICAL: i32 = 3;
/// A buffer length does not match the engine's node count.
pub const FB_ERR_SIZE_MISMATCH: i32 = 4;
/// The input carries no signal for the question asked of it
/// (zero Fisher information in the estimator).
pub const FB_ERR_DEGENERATE: i32 = 5;

/// Opaque simulation, transform, and inference engine for one uniform grid
/// and one Hurst exponent.
pub struct FbEngine {
    transformer: Transformer,
}

impl FbEngine {
    fn grid(&self) -> TimeGrid {
        *self.transformer.grid()
    }

    fn hurst(&self) -> f64 {
        self.transformer.hurst().h()
    }

    fn nodes(&self) -> usize {
        self.grid().n() + 1
    }
}

fn status(e: &Error) -> i32 {
    match e {
        Error::Domain(_) | Error::Precondition(_) | Error::InputFormat(_) => FB_ERR_INVALID_PARAM,
        Error::Size(_) => FB_ERR_SIZE_MISMATCH,
        Error::Degenerate(_) => FB_ERR_DEGENERATE,
        _ => FB_ERR_NUMERICAL,
    }
}

unsafe fn write_f64(ptr: *mut f64, v: f64) {
    if !ptr.is_null() {
        *ptr = v;
    }
}

unsafe fn write_i32(ptr: *mut i32, v: i32) {
    if !ptr.is_null() {
        *ptr = v;
    }
}

unsafe fn copy_values(ptr: *mut f64, values: &[f64]) {
    if !ptr.is_null() {
        std::ptr::copy_nonoverlapping(values.as_ptr(), ptr, values.len());
    }
}

/// Create an engine for an `n`-cell uniform grid on [0, `horizon`] at Hurst
/// exponent `hurst` in (0, 1), and store the handle in `*out`. On failure
/// `*out` is left untouched.
///
/// # Safety
/// `out` must be null or valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn fb_engine_new(
    n: usize,
    horizon: f64,
    hurst: f64,
    out: *mut *mut FbEngine,
) -> i32 {
    if out.is_null() {
        return FB_ERR_NULL_ARG;
    }
    let made = catch_unwind(|| -> Result<FbEngine, Error> {
        let grid = TimeGrid::new(n, horizon)?;
        Ok(FbEngine {
            transformer: Transformer::new(grid, hurst)?,
        })
    });
    match made {
        Ok(Ok(engine)) => {
            *out = Box::into_raw(Box::new(engine));
            FB_OK
        }
        Ok(Err(e)) => status(&e),
        Err(_) => FB_ERR_NUMERICAL,
    }
}

/// Destroy an engine created by `fb_engine_new`. A null handle is a no-op.
///
/// # Safety
/// `engine` must be null or a handle from `fb_engine_new` not yet freed;
/// the handle must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fb_engine_free(engine: *mut FbEngine) {
    if !engine.is_null() {
        drop(Box::from_raw(engine));
    }
}

/// Number of values in every path buffer for this engine (`n + 1`), or 0
/// for a null handle.
///
/// # Safety
/// `engine` must be null or a live handle from `fb_engine_new`.
#[no_mangle]
pub unsafe extern "C" fn fb_engine_nodes(engine: *const FbEngine) -> usize {
    engine.as_ref().map_or(0, |e| e.nodes())
}

/// Norros constants (c_H, c_1, c_2) at the given Hurst exponent; each out
/// pointer may be null to skip that value. All three are 1 at H = 1/2.
///
/// # Safety
/// Each non-null out pointer must be valid for writing one double.
#[no_mangle]
pub unsafe extern "C" fn fb_norros_constants(
    hurst: f64,
    c_h: *mut f64,
    c_1: *mut f64,
    c_2: *mut f64,
) -> i32 {
    match catch_unwind(|| norros_constants(hurst)) {
        Ok(Ok((a, b, c))) => {
            write_f64(c_h, a);
            write_f64(c_1, b);
            write_f64(c_2, c);
            FB_OK
        }
        Ok(Err(e)) => status(&e),
        Err(_) => FB_ERR_NUMERICAL,
    }
}

/// Sample one exact fractional Brownian motion path into `out[0..len]`.
/// `len` must equal `fb_engine_nodes(engine)`; (seed, stream) pairs are
/// reproducible and distinct streams are independent.
///
/// # Safety
/// `engine` must be null or a live handle; `out` must be null or valid for
/// writing `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn fb_sample_fbm(
    engine: *const FbEngine,
    seed: u64,
    stream: u64,
    out: *mut f64,
    len: usize,
) -> i32 {
    let Some(e) = engine.as_ref() else {
        return FB_ERR_NULL_ARG;
    };
    if out.is_null() {
        return FB_ERR_NULL_ARG;
    }
    if len != e.nodes() {
        return FB_ERR_SIZE_MISMATCH;
    }
    let (grid, h) = (e.grid(), e.hurst());
    match catch_unwind(|| sample_fbm(grid, h, RngSeed::new(seed, stream))) {
        Ok(Ok(path)) => {
            copy_values(out, path.values());
            FB_OK
        }
        Ok(Err(err)) => status(&err),
        Err(_) => FB_ERR_NUMERICAL,
    }
}

/// Sample one fractional Ornstein-Uhlenbeck path, Euler scheme driven by an
/// exact fBm increment stream, for dX = rho (m - X) dt + dW^H with
/// X_0 = x0. Buffer rules match `fb_sample_fbm`.
///
/// # Safety
/// `engine` must be null or a live handle; `out` must be null or valid for
/// writing `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn fb_sample_fou(
    engine: *const FbEngine,
    seed: u64,
    stream: u64,
    rho: f64,
    m: f64,
    x0: f64,
    out: *mut f64,
    len: usize,
) -> i32 {
    let Some(e) = engine.as_ref() else {
        return FB_ERR_NULL_ARG;
    };
    if out.is_null() {
        return FB_ERR_NULL_ARG;
    }
    if len != e.nodes() {
        return FB_ERR_SIZE_MISMATCH;
    }
    let (grid, h) = (e.grid(), e.hurst());
    match catch_unwind(|| {
        let params = FouParams::new(rho, m, x0)?;
        sample_fou(grid, h, RngSeed::new(seed, stream), &params)
    }) {
        Ok(Ok(path)) => {
            copy_values(out, path.values());
            FB_OK
        }
        Ok(Err(err)) => status(&err),
        Err(_) => FB_ERR_NUMERICAL,
    }
}

/// Forward transform of an fBm path `w` (starting at 0) into the kernel
/// integral Y, the fundamental martingale M, and the innovation Brownian
/// motion B. Each of `y`, `m`, `b` may be null to skip that output; non-null
/// buffers receive `len` values.
///
/// # Safety
/// `engine` must be null or a live handle; `w` must be null or valid for
/// reading `len` doubles; each non-null out buffer must be valid for
/// writing `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn fb_forward(
    engine: *const FbEngine,
    w: *const f64,
    len: usize,
    y: *mut f64,
    m: *mut f64,
    b: *mut f64,
) -> i32 {
    let Some(e) = engine.as_ref() else {
        return FB_ERR_NULL_ARG;
    };
    if w.is_null() {
        return FB_ERR_NULL_ARG;
    }
    if len != e.nodes() {
        return FB_ERR_SIZE_MISMATCH;
    }
    let values = std::slice::from_raw_parts(w, len).to_vec();
    let run = catch_unwind(AssertUnwindSafe(|| {
        let path = SampledPath::new(e.grid(), values)?;
        e.transformer.forward(&path)
    }));
    match run {
        Ok(Ok(bundle)) => {
            copy_values(y, bundle.y.values());
            copy_values(m, bundle.m.values());
            copy_values(b, bundle.b.values());
            FB_OK
        }
        Ok(Err(err)) => status(&err),
        Err(_) => FB_ERR_NUMERICAL,
    }
}

/// Reconstruct the fBm path from an innovation Brownian path `b` (starting
/// at 0), writing `len` values into `out`.
///
/// # Safety
/// `engine` must be null or a live handle; `b` must be null or valid for
/// reading `len` doubles; `out` must be null or valid for writing `len`
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn fb_reconstruct(
    engine: *const FbEngine,
    b: *const f64,
    len: usize,
    out: *mut f64,
) -> i32 {
    let Some(e) = engine.as_ref() else {
        return FB_ERR_NULL_ARG;
    };
    if b.is_null() || out.is_null() {
        return FB_ERR_NULL_ARG;
    }
    if len != e.nodes() {
        return FB_ERR_SIZE_MISMATCH;
    }
    let values = std::slice::from_raw_parts(b, len).to_vec();
    let run = catch_unwind(AssertUnwindSafe(|| {
        let path = SampledPath::new(e.grid(), values)?;
        e.transformer.reconstruct(&path)
    }));
    match run {
        Ok(Ok(w)) => {
            copy_values(out, w.values());
            FB_OK
        }
        Ok(Err(err)) => status(&err),
        Err(_) => FB_ERR_NUMERICAL,
    }
}

/// Girsanov log likelihood ratio of the observed path `x` (with X_0 = x0)
/// under the drift rho (m - X_t) dt against the driftless model; rho = 0
/// evaluates the zero drift. Scalar out pointers may be null; `singular`
/// receives 1 when the integrand diverges at t = 0.
///
/// # Safety
/// `engine` must be null or a live handle; `x` must be null or valid for
/// reading `len` doubles; each non-null scalar out pointer must be valid
/// for one write.
#[no_mangle]
pub unsafe extern "C" fn fb_log_density(
    engine: *const FbEngine,
    x: *const f64,
    len: usize,
    rho: f64,
    m: f64,
    x0: f64,
    log_density: *mut f64,
    ito_sum: *mut f64,
    l2_norm_sq: *mut f64,
    singular: *mut i32,
) -> i32 {
    let Some(e) = engine.as_ref() else {
        return FB_ERR_NULL_ARG;
    };
    if x.is_null() {
        return FB_ERR_NULL_ARG;
    }
    if len != e.nodes() {
        return FB_ERR_SIZE_MISMATCH;
    }
    let values = std::slice::from_raw_parts(x, len).to_vec();
    let run = catch_unwind(AssertUnwindSafe(|| {
        let path = SampledPath::new(e.grid(), values)?;
        density_for_drifted_path_with(&e.transformer, &path, |v| rho * (m - v), x0)
    }));
    match run {
        Ok(Ok(report)) => {
            write_f64(log_density, report.log_density);
            write_f64(ito_sum, report.ito_sum);
            write_f64(l2_norm_sq, report.l2_norm_sq);
            write_i32(singular, report.singular as i32);
            FB_OK
        }
        Ok(Err(err)) => status(&err),
        Err(_) => FB_ERR_NUMERICAL,
    }
}

/// Closed-form MLE of the mean-reversion speed rho from one observed fOU
/// path `x` with known mean `m` and starting level `x0`. Scalar out
/// pointers may be null. Returns `FB_ERR_DEGENERATE` when the path carries
/// no information about rho.
///
/// # Safety
/// `engine` must be null or a live handle; `x` must be null or valid for
/// reading `len` doubles; each non-null scalar out pointer must be valid
/// for one write.
#[no_mangle]
pub unsafe extern "C" fn fb_fou_mle(
    engine: *const FbEngine,
    x: *const f64,
    len: usize,
    m: f64,
    x0: f64,
    rho_hat: *mut f64,
    score: *mut f64,
    information: *mut f64,
    log_lik: *mut f64,
) -> i32 {
    let Some(e) = engine.as_ref() else {
        return FB_ERR_NULL_ARG;
    };
    if x.is_null() {
        return FB_ERR_NULL_ARG;
    }
    if len != e.nodes() {
        return FB_ERR_SIZE_MISMATCH;
    }
    let values = std::slice::from_raw_parts(x, len).to_vec();
    let run = catch_unwind(AssertUnwindSafe(|| {
        let path = SampledPath::new(e.grid(), values)?;
        fou_mle_with(&e.transformer, &path, m, x0)
    }));
    match run {
        Ok(Ok(report)) => {
            write_f64(rho_hat, report.rho_hat);
            write_f64(score, report.score);
            write_f64(information, report.information);
            write_f64(log_lik, report.log_lik_at_hat);
            FB_OK
        }
        Ok(Err(err)) => status(&err),
        Err(_) => FB_ERR_NUMERICAL,
    }
}

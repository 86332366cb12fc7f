//! C ABI for the rsp-bench library.
//!
//! Conventions:
//! * every fallible call returns an [`RspbStatus`]; `RSPB_STATUS_OK` is zero;
//! * results come back through out-pointers;
//! * `RspbEnsemble`, `RspbBenchmark`, and `RspbSource` are opaque handles
//!   created and released by the matching `_free` functions;
//! * on failure, `rspb_last_error()` returns a thread-local message valid
//!   until the next failing call on the same thread.
//!
//! Complex matrices cross the boundary as row-major `[re, im]` doubles:
//! 8 values for a one-qubit density matrix, 32 for a two-qubit one.

use rsp_bench::classical::{
    exact_threshold, heuristic_threshold, upper_bound, BenchmarkResult, BoundKind,
};
use rsp_bench::continuum::{
    cap_upper_bound, voronoi_lower_bound, Quadrature, SphericalPartitionSpec,
};
use rsp_bench::ensembles::{load_ensemble, platonic_ensemble, save_ensemble, PlatonicSolid,
    TargetEnsemble, IDENTITY_ORIENTATION};
use rsp_bench::matrix::{C64, Mat2, Mat4};
use rsp_bench::protocol::{run_experiment_grid, GridOptions, SimMode, SourceModel};
use rsp_bench::qstate::{fidelity, shannon_cost, BlochVector, QubitDensity, TwoQubitDensity};
use rsp_bench::report::auto_threshold;
use rsp_bench::RspError;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RspbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidInput = 3,
    MalformedFile = 4,
    ProbabilitySum = 5,
    NormTooLarge = 6,
    TooLarge = 7,
    UniformRequired = 8,
    Unsupported = 9,
    Io = 10,
    Internal = 11,
    Panic = 12,
}

fn status_of(err: &RspError) -> RspbStatus {
    match err {
        RspError::MalformedEnsemble(_) | RspError::Json(_) => RspbStatus::MalformedFile,
        RspError::ProbabilitySum(_) => RspbStatus::ProbabilitySum,
        RspError::NormTooLarge(_) | RspError::BlochNormTooLarge(_) => RspbStatus::NormTooLarge,
        RspError::TooLargeForExact { .. } => RspbStatus::TooLarge,
        RspError::UniformRequired => RspbStatus::UniformRequired,
        RspError::UnsupportedCbits(_) => RspbStatus::Unsupported,
        RspError::Io(_) => RspbStatus::Io,
        RspError::InternalInconsistency(_) => RspbStatus::Internal,
        _ => RspbStatus::InvalidInput,
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn fail(status: RspbStatus, message: &str) -> RspbStatus {
    let owned = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(owned));
    status
}

fn fail_err(err: &RspError) -> RspbStatus {
    fail(status_of(err), &err.to_string())
}

/// Message for the most recent failure on this thread, or null.
#[no_mangle]
pub extern "C" fn rspb_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow().as_ref().map_or(std::ptr::null(), |msg| msg.as_ptr())
    })
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn rspb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

fn guarded(f: impl FnOnce() -> RspbStatus) -> RspbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(RspbStatus::Panic, "panic inside rsp-bench"),
    }
}

/// # Safety
/// `ptr` must be non-null and point to a NUL-terminated string.
unsafe fn parse_str<'a>(ptr: *const c_char) -> Result<&'a str, RspbStatus> {
    if ptr.is_null() {
        return Err(fail(RspbStatus::NullPointer, "null string pointer"));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| fail(RspbStatus::InvalidUtf8, "string is not valid UTF-8"))
}

fn write_out<T>(out: *mut T, value: T) -> RspbStatus {
    if out.is_null() {
        return fail(RspbStatus::NullPointer, "null out pointer");
    }
    unsafe { out.write(value) };
    RspbStatus::Ok
}

/// Opaque handle to a target ensemble.
pub struct RspbEnsemble {
    inner: TargetEnsemble,
}

/// Opaque handle to a benchmark result.
pub struct RspbBenchmark {
    inner: BenchmarkResult,
}

/// Opaque handle to a two-qubit source model.
pub struct RspbSource {
    inner: SourceModel,
}

/// Build the uniform vertex ensemble of a Platonic solid ("tetrahedron",
/// "octahedron", "cube", "icosahedron", "dodecahedron") at the given Bloch
/// radius.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rspb_ensemble_platonic(
    name: *const c_char,
    radius: f64,
    out: *mut *mut RspbEnsemble,
) -> RspbStatus {
    guarded(|| {
        let name = match parse_str(name) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let Some(solid) = PlatonicSolid::from_name(name) else {
            return fail(RspbStatus::InvalidInput, &format!("unknown solid '{name}'"));
        };
        match platonic_ensemble(solid, radius, &IDENTITY_ORIENTATION) {
            Ok(e) => write_out(out, Box::into_raw(Box::new(RspbEnsemble { inner: e }))),
            Err(err) => fail_err(&err),
        }
    })
}

/// Load an ensemble document (JSON) from a path.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rspb_ensemble_load(
    path: *const c_char,
    out: *mut *mut RspbEnsemble,
) -> RspbStatus {
    guarded(|| {
        let path = match parse_str(path) {
            Ok(s) => s,
            Err(status) => return status,
        };
        match load_ensemble(Path::new(path)) {
            Ok(e) => write_out(out, Box::into_raw(Box::new(RspbEnsemble { inner: e }))),
            Err(err) => fail_err(&err),
        }
    })
}

/// Write an ensemble document (JSON) to a path.
///
/// # Safety
/// `ensemble` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn rspb_ensemble_save(
    ensemble: *const RspbEnsemble,
    path: *const c_char,
) -> RspbStatus {
    guarded(|| {
        let Some(e) = ensemble.as_ref() else {
            return fail(RspbStatus::NullPointer, "null ensemble");
        };
        let path = match parse_str(path) {
            Ok(s) => s,
            Err(status) => return status,
        };
        match save_ensemble(&e.inner, Path::new(path)) {
            Ok(()) => RspbStatus::Ok,
            Err(err) => fail_err(&err),
        }
    })
}

/// Number of states in the ensemble.
///
/// # Safety
/// `ensemble` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rspb_ensemble_size(
    ensemble: *const RspbEnsemble,
    out: *mut u64,
) -> RspbStatus {
    guarded(|| {
        let Some(e) = ensemble.as_ref() else {
            return fail(RspbStatus::NullPointer, "null ensemble");
        };
        write_out(out, e.inner.len() as u64)
    })
}

/// Common Bloch radius of the ensemble; writes −1 when radii differ.
///
/// # Safety
/// `ensemble` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rspb_ensemble_common_radius(
    ensemble: *const RspbEnsemble,
    out: *mut f64,
) -> RspbStatus {
    guarded(|| {
        let Some(e) = ensemble.as_ref() else {
            return fail(RspbStatus::NullPointer, "null ensemble");
        };
        write_out(out, e.inner.common_radius().unwrap_or(-1.0))
    })
}

/// Release an ensemble handle (null is ignored).
///
/// # Safety
/// `ensemble` must have come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn rspb_ensemble_free(ensemble: *mut RspbEnsemble) {
    if !ensemble.is_null() {
        drop(Box::from_raw(ensemble));
    }
}

/// Threshold computation mode.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RspbBenchMode {
    Auto = 0,
    Exact = 1,
    Upper = 2,
    Heuristic = 3,
}

/// Meaning of a benchmark value.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RspbBoundKind {
    Exact = 0,
    UpperBound = 1,
    HeuristicLower = 2,
}

/// Compute a classical threshold (or bound) for the ensemble.
///
/// # Safety
/// `ensemble` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rspb_benchmark_run(
    ensemble: *const RspbEnsemble,
    cbits: u32,
    mode: RspbBenchMode,
    restarts: u64,
    seed: u64,
    out: *mut *mut RspbBenchmark,
) -> RspbStatus {
    guarded(|| {
        let Some(e) = ensemble.as_ref() else {
            return fail(RspbStatus::NullPointer, "null ensemble");
        };
        let restarts = restarts as usize;
        let computed = match mode {
            RspbBenchMode::Auto => auto_threshold(&e.inner, cbits, restarts, seed),
            RspbBenchMode::Exact => exact_threshold(&e.inner, cbits),
            RspbBenchMode::Upper => upper_bound(&e.inner, cbits),
            RspbBenchMode::Heuristic => heuristic_threshold(&e.inner, cbits, restarts, seed),
        };
        match computed {
            Ok(result) => write_out(out, Box::into_raw(Box::new(RspbBenchmark { inner: result }))),
            Err(err) => fail_err(&err),
        }
    })
}

/// Fidelity value of a benchmark result.
///
/// # Safety
/// `benchmark` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rspb_benchmark_value(
    benchmark: *const RspbBenchmark,
    out: *mut f64,
) -> RspbStatus {
    guarded(|| {
        let Some(b) = benchmark.as_ref() else {
            return fail(RspbStatus::NullPointer, "null benchmark");
        };
        write_out(out, b.inner.value)
    })
}

/// Kind of a benchmark result.
///
/// # Safety
/// `benchmark` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rspb_benchmark_kind(
    benchmark: *const RspbBenchmark,
    out: *mut RspbBoundKind,
) -> RspbStatus {
    guarded(|| {
        let Some(b) = benchmark.as_ref() else {
            return fail(RspbStatus::NullPointer, "null benchmark");
        };
        let kind = match b.inner.kind {
            BoundKind::Exact => RspbBoundKind::Exact,
            BoundKind::UpperBound => RspbBoundKind::UpperBound,
            BoundKind::HeuristicLower => RspbBoundKind::HeuristicLower,
        };
        write_out(out, kind)
    })
}

/// Whether the value is certified optimal.
///
/// # Safety
/// `benchmark` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rspb_benchmark_certified(
    benchmark: *const RspbBenchmark,
    out: *mut bool,
) -> RspbStatus {
    guarded(|| {
        let Some(b) = benchmark.as_ref() else {
            return fail(RspbStatus::NullPointer, "null benchmark");
        };
        write_out(out, b.inner.certified)
    })
}

/// Length of the witness assignment (0 when absent).
///
/// # Safety
/// `benchmark` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rspb_benchmark_witness_len(
    benchmark: *const RspbBenchmark,
    out: *mut u64,
) -> RspbStatus {
    guarded(|| {
        let Some(b) = benchmark.as_ref() else {
            return fail(RspbStatus::NullPointer, "null benchmark");
        };
        let len = b.inner.witness.as_ref().map_or(0, |w| w.assignment().len());
        write_out(out, len as u64)
    })
}

/// Copy the witness message assignment into `buffer` (capacity in entries).
///
/// # Safety
/// `benchmark` must be a live handle; `buffer` must point to at least
/// `capacity` writable u64 entries.
#[no_mangle]
pub unsafe extern "C" fn rspb_benchmark_witness_copy(
    benchmark: *const RspbBenchmark,
    buffer: *mut u64,
    capacity: u64,
) -> RspbStatus {
    guarded(|| {
        let Some(b) = benchmark.as_ref() else {
            return fail(RspbStatus::NullPointer, "null benchmark");
        };
        let Some(witness) = b.inner.witness.as_ref() else {
            return fail(RspbStatus::InvalidInput, "benchmark carries no witness");
        };
        let assignment = witness.assignment();
        if buffer.is_null() {
            return fail(RspbStatus::NullPointer, "null buffer");
        }
        if (capacity as usize) < assignment.len() {
            return fail(RspbStatus::InvalidInput, "buffer too small for witness");
        }
        for (i, &k) in assignment.iter().enumerate() {
            buffer.add(i).write(k as u64);
        }
        RspbStatus::Ok
    })
}

/// Release a benchmark handle (null is ignored).
///
/// # Safety
/// `benchmark` must have come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn rspb_benchmark_free(benchmark: *mut RspbBenchmark) {
    if !benchmark.is_null() {
        drop(Box::from_raw(benchmark));
    }
}

/// Cap upper bound 1 − 2^{−(c+1)} on the all-pure-states threshold.
#[no_mangle]
pub extern "C" fn rspb_cap_upper_bound(cbits: u32) -> f64 {
    cap_upper_bound(cbits)
}

unsafe fn seeds_from(xyz: *const f64, count: u64) -> Result<Vec<BlochVector>, RspbStatus> {
    if xyz.is_null() {
        return Err(fail(RspbStatus::NullPointer, "null seed array"));
    }
    let raw = std::slice::from_raw_parts(xyz, count as usize * 3);
    Ok(raw.chunks_exact(3).map(|v| BlochVector::new(v[0], v[1], v[2])).collect())
}

/// Voronoi lower bound for the uniform pure-state ensemble on a
/// latitude-longitude grid. `seeds_xyz` holds 3·n_seeds doubles.
///
/// # Safety
/// `seeds_xyz` must point to 3·n_seeds readable doubles; `out_value` must
/// be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rspb_voronoi_lower_bound_grid(
    seeds_xyz: *const f64,
    n_seeds: u64,
    rows: u64,
    cols: u64,
    out_value: *mut f64,
) -> RspbStatus {
    guarded(|| {
        let seeds = match seeds_from(seeds_xyz, n_seeds) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let quadrature = Quadrature::LatLongGrid { rows: rows as usize, cols: cols as usize };
        match SphericalPartitionSpec::new(seeds, quadrature).and_then(|s| voronoi_lower_bound(&s))
        {
            Ok(bound) => write_out(out_value, bound.value),
            Err(err) => fail_err(&err),
        }
    })
}

/// Monte Carlo variant of [`rspb_voronoi_lower_bound_grid`]; also reports
/// the batch standard error.
///
/// # Safety
/// `seeds_xyz` must point to 3·n_seeds readable doubles; the out pointers
/// must be valid.
#[no_mangle]
pub unsafe extern "C" fn rspb_voronoi_lower_bound_mc(
    seeds_xyz: *const f64,
    n_seeds: u64,
    samples: u64,
    seed: u64,
    out_value: *mut f64,
    out_stderr: *mut f64,
) -> RspbStatus {
    guarded(|| {
        let seeds = match seeds_from(seeds_xyz, n_seeds) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let quadrature = Quadrature::MonteCarlo { samples: samples as usize, seed };
        match SphericalPartitionSpec::new(seeds, quadrature).and_then(|s| voronoi_lower_bound(&s))
        {
            Ok(bound) => {
                let status = write_out(out_value, bound.value);
                if status != RspbStatus::Ok {
                    return status;
                }
                write_out(out_stderr, bound.stderr)
            }
            Err(err) => fail_err(&err),
        }
    })
}

/// Shannon cost H(r) in cbits of preparing a radius-r state.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rspb_shannon_cost(r: f64, out: *mut f64) -> RspbStatus {
    guarded(|| {
        if !(0.0..=1.0).contains(&r) {
            return fail(RspbStatus::InvalidInput, &format!("radius {r} outside [0, 1]"));
        }
        write_out(out, shannon_cost(r))
    })
}

unsafe fn qubit_from(values: *const f64) -> Result<QubitDensity, RspbStatus> {
    if values.is_null() {
        return Err(fail(RspbStatus::NullPointer, "null matrix pointer"));
    }
    let raw = std::slice::from_raw_parts(values, 8);
    let m = Mat2::new([
        [C64::new(raw[0], raw[1]), C64::new(raw[2], raw[3])],
        [C64::new(raw[4], raw[5]), C64::new(raw[6], raw[7])],
    ]);
    QubitDensity::from_matrix(m).map_err(|err| fail_err(&err))
}

/// Uhlmann fidelity of two one-qubit density matrices given as row-major
/// `[re, im]` pairs (8 doubles each).
///
/// # Safety
/// `a` and `b` must each point to 8 readable doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rspb_qubit_fidelity(
    a: *const f64,
    b: *const f64,
    out: *mut f64,
) -> RspbStatus {
    guarded(|| {
        let rho = match qubit_from(a) {
            Ok(r) => r,
            Err(status) => return status,
        };
        let tau = match qubit_from(b) {
            Ok(t) => t,
            Err(status) => return status,
        };
        write_out(out, fidelity(&rho, &tau))
    })
}

/// Noiseless |Φ+⟩ source.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rspb_source_ideal(out: *mut *mut RspbSource) -> RspbStatus {
    guarded(|| write_out(out, Box::into_raw(Box::new(RspbSource { inner: SourceModel::IdealPhiPlus }))))
}

/// Werner source v|Φ+⟩⟨Φ+| + (1−v)𝟙/4.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rspb_source_werner(v: f64, out: *mut *mut RspbSource) -> RspbStatus {
    guarded(|| {
        if !(0.0..=1.0).contains(&v) {
            return fail(RspbStatus::InvalidInput, &format!("visibility {v} outside [0, 1]"));
        }
        write_out(out, Box::into_raw(Box::new(RspbSource { inner: SourceModel::Werner(v) })))
    })
}

/// Explicit two-qubit source from 16 row-major `[re, im]` pairs (32
/// doubles, Alice first).
///
/// # Safety
/// `elements` must point to 32 readable doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rspb_source_explicit(
    elements: *const f64,
    out: *mut *mut RspbSource,
) -> RspbStatus {
    guarded(|| {
        if elements.is_null() {
            return fail(RspbStatus::NullPointer, "null matrix pointer");
        }
        let raw = std::slice::from_raw_parts(elements, 32);
        let mut m = Mat4::zero();
        for idx in 0..16 {
            m.set(idx / 4, idx % 4, C64::new(raw[2 * idx], raw[2 * idx + 1]));
        }
        match TwoQubitDensity::from_matrix(m) {
            Ok(rho) => write_out(
                out,
                Box::into_raw(Box::new(RspbSource { inner: SourceModel::Explicit(rho) })),
            ),
            Err(err) => fail_err(&err),
        }
    })
}

/// Release a source handle (null is ignored).
///
/// # Safety
/// `source` must have come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn rspb_source_free(source: *mut RspbSource) {
    if !source.is_null() {
        drop(Box::from_raw(source));
    }
}

/// Simulate the protocol over every ensemble state and report the mean
/// fidelity against the targets with its standard error. With
/// `sampled = false` the result is the analytic expected-mode value and the
/// shot counts are ignored.
///
/// # Safety
/// `source` and `ensemble` must be live handles; the out pointers must be
/// valid.
#[no_mangle]
pub unsafe extern "C" fn rspb_simulate_grid(
    source: *const RspbSource,
    ensemble: *const RspbEnsemble,
    sampled: bool,
    shots: u64,
    tomography_shots: u64,
    seed: u64,
    out_mean: *mut f64,
    out_stderr: *mut f64,
) -> RspbStatus {
    guarded(|| {
        let Some(src) = source.as_ref() else {
            return fail(RspbStatus::NullPointer, "null source");
        };
        let Some(e) = ensemble.as_ref() else {
            return fail(RspbStatus::NullPointer, "null ensemble");
        };
        let opts = GridOptions {
            mode: if sampled { SimMode::Sampled } else { SimMode::Expected },
            shots,
            tomography_shots,
            seed,
        };
        match run_experiment_grid(&src.inner, &e.inner, &opts) {
            Ok(outcome) => {
                let status = write_out(out_mean, outcome.mean_fidelity_vs_target);
                if status != RspbStatus::Ok {
                    return status;
                }
                write_out(out_stderr, outcome.stderr_vs_target)
            }
            Err(err) => fail_err(&err),
        }
    })
}

//! C ABI over the encoder/decoder and the headline measurement formulas.
//!
//! Every entry point returns a [`sparsecc_status`]; results travel through
//! out pointers supplied by the caller. Handles are opaque, allocated by the
//! `_new` constructors, and must be released exactly once with the matching
//! `_free`. Distinct handles may be used concurrently; a single handle must
//! not be mutated from two threads.

#![allow(non_camel_case_types)]

use std::os::raw::c_char;

use sparsecc::analysis::{measurements_alpha0, ComplexityQuery};
use sparsecc::codec::{decode_min, encode, DesignParams, Measurements, Signal};
use sparsecc::ratio_cdf::{cdf_ratio, QuadratureSpec};
use sparsecc::Error;

/// Result discriminant shared by every ABI function.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum sparsecc_status {
    SPARSECC_OK = 0,
    SPARSECC_NULL_ARGUMENT = 1,
    SPARSECC_INVALID_ARGUMENT = 2,
    SPARSECC_NUMERICAL = 3,
    SPARSECC_BUFFER_TOO_SMALL = 4,
}

use sparsecc_status::*;

/// Opaque encoding design: dimensions, stability index, sampling rate, seed.
pub struct sparsecc_design {
    params: DesignParams,
}

/// Opaque sparse nonnegative signal.
pub struct sparsecc_signal {
    inner: Signal,
}

fn status_of(err: &Error) -> sparsecc_status {
    match err {
        Error::InvalidParameter { .. }
        | Error::DimensionMismatch { .. }
        | Error::ConfigParse { .. }
        | Error::TextFormat { .. } => SPARSECC_INVALID_ARGUMENT,
        Error::SamplingOverflow { .. } | Error::Numerical { .. } => SPARSECC_NUMERICAL,
    }
}

/// Creates an encoding design. On success writes a handle to `out`; release
/// it with [`sparsecc_design_free`].
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn sparsecc_design_new(
    n: usize,
    m: usize,
    alpha: f64,
    gamma: f64,
    master_seed: u64,
    out: *mut *mut sparsecc_design,
) -> sparsecc_status {
    if out.is_null() {
        return SPARSECC_NULL_ARGUMENT;
    }
    let params = DesignParams { n, m, alpha, gamma, master_seed };
    if let Err(err) = params.validate() {
        return status_of(&err);
    }
    *out = Box::into_raw(Box::new(sparsecc_design { params }));
    SPARSECC_OK
}

/// Releases a design handle. Passing null is a no-op.
///
/// # Safety
/// `design` must be null or a pointer returned by [`sparsecc_design_new`]
/// that has not been freed already.
#[no_mangle]
pub unsafe extern "C" fn sparsecc_design_free(design: *mut sparsecc_design) {
    if !design.is_null() {
        drop(Box::from_raw(design));
    }
}

/// Creates a sparse signal from parallel arrays of `len` coordinate indices
/// and strictly positive values. On success writes a handle to `out`;
/// release it with [`sparsecc_signal_free`].
///
/// # Safety
/// `indices` and `values` must point to `len` readable elements (they may be
/// null only when `len` is zero), and `out` must be valid for one pointer.
#[no_mangle]
pub unsafe extern "C" fn sparsecc_signal_new(
    n: usize,
    indices: *const usize,
    values: *const f64,
    len: usize,
    out: *mut *mut sparsecc_signal,
) -> sparsecc_status {
    if out.is_null() || (len > 0 && (indices.is_null() || values.is_null())) {
        return SPARSECC_NULL_ARGUMENT;
    }
    let entries: Vec<(usize, f64)> = if len == 0 {
        Vec::new()
    } else {
        let idx = std::slice::from_raw_parts(indices, len);
        let val = std::slice::from_raw_parts(values, len);
        idx.iter().copied().zip(val.iter().copied()).collect()
    };
    match Signal::new(n, entries) {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(sparsecc_signal { inner }));
            SPARSECC_OK
        }
        Err(err) => status_of(&err),
    }
}

/// Releases a signal handle. Passing null is a no-op.
///
/// # Safety
/// `signal` must be null or a pointer returned by [`sparsecc_signal_new`]
/// that has not been freed already.
#[no_mangle]
pub unsafe extern "C" fn sparsecc_signal_free(signal: *mut sparsecc_signal) {
    if !signal.is_null() {
        drop(Box::from_raw(signal));
    }
}

/// Encodes `signal` under `design`, writing the design's `m` measurement
/// values into `out_values`. `out_len` is the capacity of `out_values`;
/// fails with `SPARSECC_BUFFER_TOO_SMALL` when it is less than `m`.
///
/// # Safety
/// `design` and `signal` must be live handles and `out_values` must point to
/// `out_len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn sparsecc_encode(
    design: *const sparsecc_design,
    signal: *const sparsecc_signal,
    out_values: *mut f64,
    out_len: usize,
) -> sparsecc_status {
    let (Some(design), Some(signal)) = (design.as_ref(), signal.as_ref()) else {
        return SPARSECC_NULL_ARGUMENT;
    };
    if out_values.is_null() {
        return SPARSECC_NULL_ARGUMENT;
    }
    if out_len < design.params.m {
        return SPARSECC_BUFFER_TOO_SMALL;
    }
    match encode(&signal.inner, &design.params) {
        Ok(measurements) => {
            let dst = std::slice::from_raw_parts_mut(out_values, design.params.m);
            dst.copy_from_slice(measurements.values());
            SPARSECC_OK
        }
        Err(err) => status_of(&err),
    }
}

/// Decodes `len` measurement values under `design`. Writes the design's `n`
/// estimates into `out_values` and coverage flags (1 covered, 0 uncovered)
/// into `out_covered`; both buffers hold `out_len` elements and must fit `n`.
///
/// # Safety
/// `design` must be a live handle, `values` must point to `len` readable
/// doubles, and `out_values` / `out_covered` must each point to `out_len`
/// writable elements.
#[no_mangle]
pub unsafe extern "C" fn sparsecc_decode(
    design: *const sparsecc_design,
    values: *const f64,
    len: usize,
    out_values: *mut f64,
    out_covered: *mut u8,
    out_len: usize,
) -> sparsecc_status {
    let Some(design) = design.as_ref() else {
        return SPARSECC_NULL_ARGUMENT;
    };
    if values.is_null() || out_values.is_null() || out_covered.is_null() {
        return SPARSECC_NULL_ARGUMENT;
    }
    if out_len < design.params.n {
        return SPARSECC_BUFFER_TOO_SMALL;
    }
    let measurements = match Measurements::new(std::slice::from_raw_parts(values, len).to_vec()) {
        Ok(m) => m,
        Err(err) => return status_of(&err),
    };
    match decode_min(&measurements, &design.params) {
        Ok(estimate) => {
            let n = design.params.n;
            std::slice::from_raw_parts_mut(out_values, n).copy_from_slice(estimate.values());
            let covered = std::slice::from_raw_parts_mut(out_covered, n);
            for (dst, &flag) in covered.iter_mut().zip(estimate.covered()) {
                *dst = u8::from(flag);
            }
            SPARSECC_OK
        }
        Err(err) => status_of(&err),
    }
}

/// Evaluates the decodability CDF `F_alpha(t)` by Gauss-Legendre quadrature
/// with `nodes` points per axis and writes it to `out`.
///
/// # Safety
/// `out` must be a valid pointer to one writable double.
#[no_mangle]
pub unsafe extern "C" fn sparsecc_cdf_ratio(
    alpha: f64,
    t: f64,
    nodes: usize,
    out: *mut f64,
) -> sparsecc_status {
    if out.is_null() {
        return SPARSECC_NULL_ARGUMENT;
    }
    let spec = match QuadratureSpec::new(nodes) {
        Ok(spec) => spec,
        Err(err) => return status_of(&err),
    };
    match cdf_ratio(alpha, t, spec) {
        Ok(value) => {
            *out = value;
            SPARSECC_OK
        }
        Err(err) => status_of(&err),
    }
}

/// Measurement count sufficient in the small-stability regime: writes the
/// integer count `M = ceil(coefficient * ln(n/delta))` and the coefficient.
///
/// # Safety
/// `out_m` and `out_coefficient` must each be valid pointers to writable
/// storage (either may be null to skip that output).
#[no_mangle]
pub unsafe extern "C" fn sparsecc_measurements_alpha0(
    k: usize,
    n: usize,
    delta: f64,
    gamma: f64,
    out_m: *mut u64,
    out_coefficient: *mut f64,
) -> sparsecc_status {
    match measurements_alpha0(ComplexityQuery { k, n, delta, gamma }) {
        Ok((result, _approx)) => {
            if let Some(slot) = out_m.as_mut() {
                *slot = result.m_exact;
            }
            if let Some(slot) = out_coefficient.as_mut() {
                *slot = result.coefficient;
            }
            SPARSECC_OK
        }
        Err(err) => status_of(&err),
    }
}

/// Returns a static, NUL-terminated description of a status code.
#[no_mangle]
pub extern "C" fn sparsecc_status_describe(status: sparsecc_status) -> *const c_char {
    let text: &'static [u8] = match status {
        SPARSECC_OK => b"ok\0",
        SPARSECC_NULL_ARGUMENT => b"a required pointer argument was null\0",
        SPARSECC_INVALID_ARGUMENT => b"an argument was out of range or inconsistent\0",
        SPARSECC_NUMERICAL => b"a numerical guard tripped during evaluation\0",
        SPARSECC_BUFFER_TOO_SMALL => b"the output buffer cannot hold the result\0",
    };
    text.as_ptr().cast()
}

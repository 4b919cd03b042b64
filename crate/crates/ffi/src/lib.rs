//! C interface to `fedfuse`.
//!
//! Every fallible function returns an [`FfStatus`]. On failure a message is
//! kept per thread and can be read with [`ff_last_error`]. Objects are
//! opaque handles created by `*_new`/`*_load` functions and released with the
//! matching `*_free`. Panics never cross the boundary; they are reported as
//! [`FfStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::slice;

use fedfuse::federation::{fed_avg, ClientUpdate};
use fedfuse::fusion::{
    belief, combine_all, decide_max_belief, mass_from_probs, plausibility, FrameOfDiscernment, MassFunction, Subset,
};
use fedfuse::latency::{load_pipeline_file, total_time, Micros};
use fedfuse::metrics::binary_metrics;
use fedfuse::nn::{forward, read_checkpoint, Activation, LayerShape, MlpSpec, WeightVector};
use fedfuse::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Shape = 4,
    Data = 5,
    Divergence = 6,
    Protocol = 7,
    Evidence = 8,
    TotalConflict = 9,
    Parse = 10,
    Io = 11,
    Panic = 12,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FfActivation {
    Relu = 0,
    Tanh = 1,
}

/// Bits of [`FfBinaryMetrics::degenerate`]: the metric had a zero
/// denominator and was reported as 0.
pub const FF_DEGENERATE_PRECISION: u32 = 1;
pub const FF_DEGENERATE_RECALL: u32 = 2;
pub const FF_DEGENERATE_F1: u32 = 4;
pub const FF_DEGENERATE_SPECIFICITY: u32 = 8;
pub const FF_DEGENERATE_MCC: u32 = 16;

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct FfBinaryMetrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub specificity: f64,
    pub mcc: f64,
    pub degenerate: u32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct FfLatency {
    pub total_ms: f64,
    pub preprocessing_ms: f64,
    pub processing_ms: f64,
    pub fusion_ms: f64,
    pub other_ms: f64,
}

/// Frame of discernment: an ordered list of hypothesis labels.
pub struct FfFrame {
    inner: FrameOfDiscernment,
}

/// Mass function over a frame.
pub struct FfMass {
    inner: MassFunction,
}

/// Trained classifier loaded from a checkpoint.
pub struct FfModel {
    spec: MlpSpec,
    weights: WeightVector,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> FfStatus {
    match e {
        Error::Config(_) => FfStatus::Config,
        Error::Shape(_) => FfStatus::Shape,
        Error::Data(_) => FfStatus::Data,
        Error::Divergence { .. } => FfStatus::Divergence,
        Error::Client { source, .. } => status_of(source),
        Error::Protocol(_) => FfStatus::Protocol,
        Error::Evidence(_) => FfStatus::Evidence,
        Error::TotalConflict { .. } => FfStatus::TotalConflict,
        Error::Parse { .. } => FfStatus::Parse,
        Error::Io { .. } => FfStatus::Io,
    }
}

struct Fail(FfStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(FfStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Fail {
    Fail(FfStatus::InvalidArgument, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> FfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            FfStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            FfStatus::Panic
        }
    }
}

unsafe fn slice_arg<'a, T>(p: *const T, n: usize, what: &str) -> Result<&'a [T], Fail> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, n))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not valid UTF-8")))
}

fn into_handle<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

/// Message describing the last failure on this thread, or an empty string.
/// The pointer stays valid until the next call into this library on the
/// same thread.
#[no_mangle]
pub extern "C" fn ff_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ff_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `labels` must point to `n` NUL-terminated strings and `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn ff_frame_new(labels: *const *const c_char, n: usize, out: *mut *mut FfFrame) -> FfStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let names = slice_arg(labels, n, "labels")?
            .iter()
            .map(|&p| str_arg(p, "label").map(str::to_owned))
            .collect::<Result<Vec<_>, _>>()?;
        *out = into_handle(FfFrame {
            inner: FrameOfDiscernment::new(names)?,
        });
        Ok(())
    })
}

/// # Safety
/// `frame` must be null or a handle from [`ff_frame_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ff_frame_free(frame: *mut FfFrame) {
    if !frame.is_null() {
        drop(Box::from_raw(frame));
    }
}

/// Builds a mass function from `n` (subset, mass) pairs. Subsets are
/// bitmasks over the frame: bit `i` set means hypothesis `i` is included.
///
/// # Safety
/// `subsets` and `masses` must each point to `n` readable values.
#[no_mangle]
pub unsafe extern "C" fn ff_mass_new(
    frame: *const FfFrame,
    subsets: *const u32,
    masses: *const f64,
    n: usize,
    out: *mut *mut FfMass,
) -> FfStatus {
    guard(|| {
        let frame = ref_arg(frame, "frame")?;
        let out = out_arg(out, "out")?;
        let sets = slice_arg(subsets, n, "subsets")?;
        let values = slice_arg(masses, n, "masses")?;
        let entries = sets.iter().zip(values).map(|(&s, &v)| (Subset(s), v));
        *out = into_handle(FfMass {
            inner: MassFunction::new(frame.inner.clone(), entries)?,
        });
        Ok(())
    })
}

/// Bayesian mass function from a probability vector (one entry per
/// hypothesis), normalized.
///
/// # Safety
/// `probs` must point to `n` readable values.
#[no_mangle]
pub unsafe extern "C" fn ff_mass_from_probs(
    frame: *const FfFrame,
    probs: *const f64,
    n: usize,
    out: *mut *mut FfMass,
) -> FfStatus {
    guard(|| {
        let frame = ref_arg(frame, "frame")?;
        let out = out_arg(out, "out")?;
        let probs = slice_arg(probs, n, "probs")?;
        *out = into_handle(FfMass {
            inner: mass_from_probs(&frame.inner, probs)?,
        });
        Ok(())
    })
}

/// # Safety
/// `mass` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ff_mass_free(mass: *mut FfMass) {
    if !mass.is_null() {
        drop(Box::from_raw(mass));
    }
}

/// Mass, belief and plausibility of `subset`.
///
/// # Safety
/// `mass` must be a live handle; the outputs must be writable or null.
#[no_mangle]
pub unsafe extern "C" fn ff_mass_query(
    mass: *const FfMass,
    subset: u32,
    mass_out: *mut f64,
    belief_out: *mut f64,
    plausibility_out: *mut f64,
) -> FfStatus {
    guard(|| {
        let m = &ref_arg(mass, "mass")?.inner;
        let set = Subset(subset);
        if !m.frame().contains_subset(set) {
            return Err(invalid(format!("subset {subset:#x} is outside the frame")));
        }
        if let Some(o) = mass_out.as_mut() {
            *o = m.mass(set);
        }
        if let Some(o) = belief_out.as_mut() {
            *o = belief(m, set);
        }
        if let Some(o) = plausibility_out.as_mut() {
            *o = plausibility(m, set);
        }
        Ok(())
    })
}

/// Combines `n >= 1` mass functions with Dempster's rule, folding left to
/// right. `conflict` receives the cumulative conflict and may be null.
///
/// # Safety
/// `masses` must point to `n` live handles.
#[no_mangle]
pub unsafe extern "C" fn ff_combine(
    masses: *const *const FfMass,
    n: usize,
    out: *mut *mut FfMass,
    conflict: *mut f64,
) -> FfStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let inputs = slice_arg(masses, n, "masses")?
            .iter()
            .map(|&p| ref_arg(p, "mass").map(|m| m.inner.clone()))
            .collect::<Result<Vec<_>, _>>()?;
        let r = combine_all(&inputs)?;
        if let Some(k) = conflict.as_mut() {
            *k = r.conflict;
        }
        *out = into_handle(FfMass { inner: r.combined });
        Ok(())
    })
}

/// Max-belief singleton decision; ties go to the lowest index.
///
/// # Safety
/// `mass` must be a live handle; `class_index` writable; `belief_out`
/// writable or null.
#[no_mangle]
pub unsafe extern "C" fn ff_decide(mass: *const FfMass, class_index: *mut usize, belief_out: *mut f64) -> FfStatus {
    guard(|| {
        let m = &ref_arg(mass, "mass")?.inner;
        let idx = out_arg(class_index, "class_index")?;
        let d = decide_max_belief(&fedfuse::fusion::CombinationResult {
            combined: m.clone(),
            conflict: 0.0,
        });
        *idx = d.class_index;
        if let Some(b) = belief_out.as_mut() {
            *b = d.belief;
        }
        Ok(())
    })
}

/// Sample-weighted average of `clients` parameter vectors of length `len`.
/// `weights[k]` points to client k's parameters and `samples[k]` is its
/// sample count. The result is written to `out` (length `len`).
///
/// # Safety
/// `weights` must hold `clients` pointers to `len` readable values each,
/// `samples` must hold `clients` values and `out` must have room for `len`.
#[no_mangle]
pub unsafe extern "C" fn ff_fed_avg(
    weights: *const *const f64,
    samples: *const usize,
    clients: usize,
    len: usize,
    out: *mut f64,
) -> FfStatus {
    guard(|| {
        if len == 0 {
            return Err(invalid("parameter vectors are empty"));
        }
        let rows = slice_arg(weights, clients, "weights")?;
        let counts = slice_arg(samples, clients, "samples")?;
        let shape = vec![LayerShape { rows: 1, cols: len - 1 }];
        let updates = rows
            .iter()
            .zip(counts)
            .enumerate()
            .map(|(k, (&p, &d))| {
                let values = slice_arg(p, len, "weights row")?.to_vec();
                Ok(ClientUpdate {
                    client_id: k as u32,
                    weights: WeightVector::new(values, shape.clone())?,
                    samples: d,
                })
            })
            .collect::<Result<Vec<_>, Fail>>()?;
        let avg = fed_avg(&updates)?;
        if out.is_null() {
            return Err(null("out"));
        }
        slice::from_raw_parts_mut(out, len).copy_from_slice(avg.values());
        Ok(())
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ff_binary_metrics(tp: u64, fp: u64, fn_: u64, tn: u64, out: *mut FfBinaryMetrics) -> FfStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let m = binary_metrics(tp, fp, fn_, tn)?;
        let degenerate = m
            .degenerate
            .iter()
            .map(|&name| match name {
                "precision" => FF_DEGENERATE_PRECISION,
                "recall" => FF_DEGENERATE_RECALL,
                "f1" => FF_DEGENERATE_F1,
                "specificity" => FF_DEGENERATE_SPECIFICITY,
                "mcc" => FF_DEGENERATE_MCC,
                _ => 0,
            })
            .fold(0, |a, b| a | b);
        *out = FfBinaryMetrics {
            accuracy: m.accuracy,
            precision: m.precision,
            recall: m.recall,
            f1: m.f1,
            specificity: m.specificity,
            mcc: m.mcc,
            degenerate,
        };
        Ok(())
    })
}

/// Time in milliseconds to move `size_mbits` over a `bw_mbits` Mbit/s link,
/// rounded to whole microseconds.
///
/// # Safety
/// `out_ms` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ff_transfer_ms(size_mbits: f64, bw_mbits: f64, out_ms: *mut f64) -> FfStatus {
    guard(|| {
        let out = out_arg(out_ms, "out_ms")?;
        if !(size_mbits >= 0.0 && size_mbits.is_finite()) {
            return Err(invalid(format!("size {size_mbits} must be finite and non-negative")));
        }
        if !(bw_mbits > 0.0 && bw_mbits.is_finite()) {
            return Err(invalid(format!("bandwidth {bw_mbits} must be positive")));
        }
        *out = Micros::transfer(size_mbits, bw_mbits).as_ms();
        Ok(())
    })
}

/// Loads a pipeline description file and computes its response times.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ff_pipeline_latency(path: *const c_char, out: *mut FfLatency) -> FfStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let out = out_arg(out, "out")?;
        let file = load_pipeline_file(Path::new(path))?;
        let b = total_time(&file.pipeline, &file.links)?;
        *out = FfLatency {
            total_ms: b.total.as_ms(),
            preprocessing_ms: b.stages.preprocessing.as_ms(),
            processing_ms: b.stages.processing.as_ms(),
            fusion_ms: b.stages.fusion.as_ms(),
            other_ms: b.stages.other.as_ms(),
        };
        Ok(())
    })
}

/// Loads a checkpoint for the architecture given by `layer_widths` (input
/// dimension, hidden widths..., class count) and `activation`.
///
/// # Safety
/// `path` must be a NUL-terminated string, `layer_widths` must point to
/// `n_widths` values and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ff_model_load(
    path: *const c_char,
    layer_widths: *const usize,
    n_widths: usize,
    activation: FfActivation,
    out: *mut *mut FfModel,
) -> FfStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let out = out_arg(out, "out")?;
        let widths = slice_arg(layer_widths, n_widths, "layer_widths")?.to_vec();
        let act = match activation {
            FfActivation::Relu => Activation::Relu,
            FfActivation::Tanh => Activation::Tanh,
        };
        let spec = MlpSpec::new(widths, act, 0)?;
        let weights = read_checkpoint(Path::new(path))?;
        if !weights.matches(&spec) {
            return Err(Fail(
                FfStatus::Shape,
                format!("{path} does not match the requested architecture"),
            ));
        }
        *out = into_handle(FfModel { spec, weights });
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ff_model_free(model: *mut FfModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Input dimension and class count of a loaded model.
///
/// # Safety
/// `model` must be a live handle; outputs writable or null.
#[no_mangle]
pub unsafe extern "C" fn ff_model_dims(model: *const FfModel, input_dim: *mut usize, classes: *mut usize) -> FfStatus {
    guard(|| {
        let m = ref_arg(model, "model")?;
        if let Some(d) = input_dim.as_mut() {
            *d = m.spec.input_dim();
        }
        if let Some(c) = classes.as_mut() {
            *c = m.spec.num_classes();
        }
        Ok(())
    })
}

/// Class probabilities for one input vector.
///
/// # Safety
/// `x` must point to `dim` values and `probs` must have room for `classes`.
#[no_mangle]
pub unsafe extern "C" fn ff_model_predict(
    model: *const FfModel,
    x: *const f64,
    dim: usize,
    probs: *mut f64,
    classes: usize,
) -> FfStatus {
    guard(|| {
        let m = ref_arg(model, "model")?;
        if classes != m.spec.num_classes() {
            return Err(invalid(format!(
                "output has room for {classes} classes, model has {}",
                m.spec.num_classes()
            )));
        }
        let x = slice_arg(x, dim, "x")?;
        let p = forward(&m.weights, &m.spec, x)?;
        if probs.is_null() {
            return Err(null("probs"));
        }
        slice::from_raw_parts_mut(probs, classes).copy_from_slice(&p);
        Ok(())
    })
}

//! C interface to `zirho`.
//!
//! Objects cross the boundary as opaque handles created by `zirho_*_new`
//! style constructors and released with the matching `*_free`. Every
//! fallible call returns a [`ZirhoStatus`]; on failure the message is kept
//! per thread and can be copied out with [`zirho_last_error`].

use std::cell::RefCell;
use std::ffi::c_char;
use std::panic::{catch_unwind, UnwindSafe};
use std::ptr;

use zirho::{
    bounds_closed_form, bounds_oracle, build_margin, decompose, estimate_rho_a, joint_pmf,
    rho_from_decomposition, spearman_exact, CopulaSpec, DiscretePmf, Error, JointPmf, PairedSample,
    ZeroInflatedMarginSpec,
};

/// Status codes. `ZIRHO_STATUS_OK` is zero; everything else is an error.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZirhoStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidSpec = 2,
    InvalidInput = 3,
    InsufficientData = 4,
    Degenerate = 5,
    TruncationTooCoarse = 6,
    Internal = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZirhoCopula {
    Frechet = 0,
    UpperBoundM = 1,
    LowerBoundW = 2,
    Independence = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZirhoBoundsMethod {
    ClosedForm = 0,
    Oracle = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ZirhoBounds {
    pub rho_min: f64,
    pub rho_max: f64,
    pub rho_s11_max: f64,
    pub rho_s11_min: f64,
    pub zero_mass_x: f64,
    pub zero_mass_y: f64,
}

/// Estimator output. `degenerate` counts components that were replaced by 0.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ZirhoEstimate {
    pub rho_a: f64,
    pub p00: f64,
    pub p01: f64,
    pub p10: f64,
    pub p11: f64,
    pub rho_s11: f64,
    pub rho_s10: f64,
    pub rho_s01: f64,
    pub rho_s00: f64,
    pub n11: usize,
    pub n10: usize,
    pub n01: usize,
    pub n00: usize,
    pub degenerate: usize,
}

/// Opaque discrete margin.
pub struct ZirhoMargin(DiscretePmf);

/// Opaque joint pmf.
pub struct ZirhoJoint(JointPmf);

/// Opaque paired sample.
pub struct ZirhoSample(PairedSample);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> ZirhoStatus {
    match e {
        Error::InvalidSpec(_) => ZirhoStatus::InvalidSpec,
        Error::InvalidInput(_) | Error::Csv(_) | Error::Io { .. } => ZirhoStatus::InvalidInput,
        Error::InsufficientData { .. } => ZirhoStatus::InsufficientData,
        Error::DegenerateStatistic(_) | Error::DegenerateConditioning(_) => ZirhoStatus::Degenerate,
        Error::TruncationTooCoarse(_) => ZirhoStatus::TruncationTooCoarse,
        Error::InternalConsistency(_) => ZirhoStatus::Internal,
    }
}

/// Runs `f`, recording any error or panic for `zirho_last_error`.
fn guard<F>(f: F) -> ZirhoStatus
where
    F: FnOnce() -> Result<(), ZirhoFailure> + UnwindSafe,
{
    match catch_unwind(f) {
        Ok(Ok(())) => ZirhoStatus::Ok,
        Ok(Err(ZirhoFailure::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            ZirhoStatus::NullPointer
        }
        Ok(Err(ZirhoFailure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("panic inside zirho".into());
            ZirhoStatus::Panic
        }
    }
}

enum ZirhoFailure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for ZirhoFailure {
    fn from(e: Error) -> Self {
        ZirhoFailure::Lib(e)
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, ZirhoFailure> {
    p.as_ref().ok_or(ZirhoFailure::Null(what))
}

unsafe fn slice<'a, T>(
    p: *const T,
    len: usize,
    what: &'static str,
) -> Result<&'a [T], ZirhoFailure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(ZirhoFailure::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn write<T>(out: *mut T, value: T, what: &'static str) -> Result<(), ZirhoFailure> {
    if out.is_null() {
        return Err(ZirhoFailure::Null(what));
    }
    out.write(value);
    Ok(())
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length in bytes.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn zirho_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Zero-inflated Poisson margin truncated at tail mass `eps`.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn zirho_margin_zip(
    lambda: f64,
    p: f64,
    eps: f64,
    out: *mut *mut ZirhoMargin,
) -> ZirhoStatus {
    guard(|| {
        let m = build_margin(&ZeroInflatedMarginSpec::zip(lambda, p), eps)?;
        write(out, Box::into_raw(Box::new(ZirhoMargin(m))), "out")
    })
}

/// Margin from an explicit pmf with strictly increasing support.
///
/// # Safety
/// `support` and `probs` must point to `len` readable elements; `out` must
/// be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn zirho_margin_from_pmf(
    support: *const u64,
    probs: *const f64,
    len: usize,
    out: *mut *mut ZirhoMargin,
) -> ZirhoStatus {
    guard(|| {
        let s = slice(support, len, "support")?;
        let p = slice(probs, len, "probs")?;
        let m = DiscretePmf::new(s.to_vec(), p.to_vec())?;
        write(out, Box::into_raw(Box::new(ZirhoMargin(m))), "out")
    })
}

/// Total probability at zero.
///
/// # Safety
/// `m` must be a live margin handle or null.
#[no_mangle]
pub unsafe extern "C" fn zirho_margin_mass_at_zero(
    m: *const ZirhoMargin,
    out: *mut f64,
) -> ZirhoStatus {
    guard(|| {
        let m = deref(m, "margin")?;
        write(out, m.0.mass_at_zero(), "out")
    })
}

/// # Safety
/// `m` must be null or a handle from a margin constructor, freed once.
#[no_mangle]
pub unsafe extern "C" fn zirho_margin_free(m: *mut ZirhoMargin) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Joint pmf of two margins under a copula. `alpha` is read only for
/// `Frechet`.
///
/// # Safety
/// `f`, `g` must be live margin handles; `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn zirho_joint_new(
    f: *const ZirhoMargin,
    g: *const ZirhoMargin,
    copula: ZirhoCopula,
    alpha: f64,
    out: *mut *mut ZirhoJoint,
) -> ZirhoStatus {
    guard(|| {
        let f = deref(f, "margin x")?;
        let g = deref(g, "margin y")?;
        let c = match copula {
            ZirhoCopula::Frechet => CopulaSpec::Frechet { alpha },
            ZirhoCopula::UpperBoundM => CopulaSpec::UpperBoundM,
            ZirhoCopula::LowerBoundW => CopulaSpec::LowerBoundW,
            ZirhoCopula::Independence => CopulaSpec::Independence,
        };
        let j = joint_pmf(&f.0, &g.0, c)?;
        write(out, Box::into_raw(Box::new(ZirhoJoint(j))), "out")
    })
}

/// # Safety
/// `j` must be null or a handle from `zirho_joint_new`, freed once.
#[no_mangle]
pub unsafe extern "C" fn zirho_joint_free(j: *mut ZirhoJoint) {
    if !j.is_null() {
        drop(Box::from_raw(j));
    }
}

/// Exact rho of a joint pmf.
///
/// # Safety
/// `j` must be a live joint handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn zirho_spearman_exact(j: *const ZirhoJoint, out: *mut f64) -> ZirhoStatus {
    guard(|| {
        let j = deref(j, "joint")?;
        write(out, spearman_exact(&j.0), "out")
    })
}

/// Rho reassembled from the zero-inflation decomposition.
///
/// # Safety
/// `j` must be a live joint handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn zirho_decomposition_eval(
    j: *const ZirhoJoint,
    out: *mut f64,
) -> ZirhoStatus {
    guard(|| {
        let j = deref(j, "joint")?;
        write(out, rho_from_decomposition(&decompose(&j.0)), "out")
    })
}

/// Attainable bounds of rho for two margins.
///
/// # Safety
/// `f`, `g` must be live margin handles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn zirho_bounds(
    f: *const ZirhoMargin,
    g: *const ZirhoMargin,
    method: ZirhoBoundsMethod,
    out: *mut ZirhoBounds,
) -> ZirhoStatus {
    guard(|| {
        let f = deref(f, "margin x")?;
        let g = deref(g, "margin y")?;
        let b = match method {
            ZirhoBoundsMethod::ClosedForm => bounds_closed_form(&f.0, &g.0)?,
            ZirhoBoundsMethod::Oracle => bounds_oracle(&f.0, &g.0)?,
        };
        write(
            out,
            ZirhoBounds {
                rho_min: b.rho_min,
                rho_max: b.rho_max,
                rho_s11_max: b.rho_s11_max,
                rho_s11_min: b.rho_s11_min,
                zero_mass_x: b.zero_mass_x,
                zero_mass_y: b.zero_mass_y,
            },
            "out",
        )
    })
}

/// Paired sample from two coordinate arrays of equal length.
///
/// # Safety
/// `xs`, `ys` must point to `len` readable elements; `out` a valid handle
/// slot.
#[no_mangle]
pub unsafe extern "C" fn zirho_sample_new(
    xs: *const u64,
    ys: *const u64,
    len: usize,
    out: *mut *mut ZirhoSample,
) -> ZirhoStatus {
    guard(|| {
        let xs = slice(xs, len, "xs")?;
        let ys = slice(ys, len, "ys")?;
        let s = PairedSample::new(xs.iter().copied().zip(ys.iter().copied()).collect())?;
        write(out, Box::into_raw(Box::new(ZirhoSample(s))), "out")
    })
}

/// # Safety
/// `s` must be null or a handle from `zirho_sample_new`, freed once.
#[no_mangle]
pub unsafe extern "C" fn zirho_sample_free(s: *mut ZirhoSample) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Decomposition estimator on a sample.
///
/// # Safety
/// `s` must be a live sample handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn zirho_estimate(
    s: *const ZirhoSample,
    out: *mut ZirhoEstimate,
) -> ZirhoStatus {
    guard(|| {
        let s = deref(s, "sample")?;
        let e = estimate_rho_a(&s.0)?;
        let c = &e.components;
        write(
            out,
            ZirhoEstimate {
                rho_a: e.rho_a,
                p00: c.p00,
                p01: c.p01,
                p10: c.p10,
                p11: c.p11,
                rho_s11: c.rho_s11,
                rho_s10: c.rho_s10,
                rho_s01: c.rho_s01,
                rho_s00: c.rho_s00,
                n11: e.n11,
                n10: e.n10,
                n01: e.n01,
                n00: e.n00,
                degenerate: e.degenerate_flags.len(),
            },
            "out",
        )
    })
}

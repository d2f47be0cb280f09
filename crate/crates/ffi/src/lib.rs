//! C interface to the scattering engine.
//!
//! Every fallible call returns an [`XsStatus`]; on failure the message is
//! available from [`xs_last_error_message`] on the same thread. Strings
//! returned through `char **` must be released with [`xs_string_free`].
//! Angles are in radians.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use xferscat::amplitudes::{diffraction_orders, scatter, Side};
use xferscat::born::born_2d;
use xferscat::cli::{run_experiment, Experiment};
use xferscat::config::RunConfig;
use xferscat::dynamics2d::delta_transfer_matrix;
use xferscat::engine::EngineOptions;
use xferscat::grid::CombLattice;
use xferscat::potentials::Potential2D;
use xferscat::{Error, C64};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    DistributionalVariant = 3,
    CombRequiresLattice = 4,
    GrazingIncidence = 5,
    SingularOperator = 6,
    NoConvergence = 7,
    DimensionMismatch = 8,
    GridMismatch = 9,
    UnsupportedFamily = 10,
    Io = 11,
    Json = 12,
    InvalidUtf8 = 13,
    BufferTooSmall = 14,
    Panic = 15,
}

impl From<&Error> for XsStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::DistributionalVariant => XsStatus::DistributionalVariant,
            Error::CombRequiresLattice => XsStatus::CombRequiresLattice,
            Error::GrazingIncidence(_) => XsStatus::GrazingIncidence,
            Error::SingularOperator(_) => XsStatus::SingularOperator,
            Error::NoConvergence { .. } => XsStatus::NoConvergence,
            Error::DimensionMismatch => XsStatus::DimensionMismatch,
            Error::GridMismatch => XsStatus::GridMismatch,
            Error::InvalidParameter(_) => XsStatus::InvalidParameter,
            Error::UnsupportedFamily(_) => XsStatus::UnsupportedFamily,
            Error::Io(_) => XsStatus::Io,
            Error::Json(_) => XsStatus::Json,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XsSide {
    Left = 0,
    Right = 1,
}

impl From<XsSide> for Side {
    fn from(s: XsSide) -> Self {
        match s {
            XsSide::Left => Side::Left,
            XsSide::Right => Side::Right,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct XsComplex {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for XsComplex {
    fn from(z: C64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

/// `slices = 0` selects the automatic initial count.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XsEngineOptions {
    pub nodes: usize,
    pub slices: usize,
    pub tol: f64,
    pub max_doublings: u32,
}

/// Opaque handle to a 2D potential.
pub struct XsPotential2D {
    inner: Potential2D,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(status: XsStatus, msg: impl Into<String>) -> XsStatus {
    set_error(msg.into());
    status
}

/// Runs `f`, recording errors and converting panics.
fn guard(f: impl FnOnce() -> Result<(), XsStatus>) -> XsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => XsStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(XsStatus::Panic, "internal panic"),
    }
}

fn engine(e: Error) -> XsStatus {
    fail((&e).into(), format!("{}: {e}", e.name()))
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, XsStatus> {
    if p.is_null() {
        return Err(fail(XsStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(XsStatus::InvalidUtf8, "string argument is not UTF-8"))
}

unsafe fn potential<'a>(p: *const XsPotential2D) -> Result<&'a Potential2D, XsStatus> {
    p.as_ref().map(|h| &h.inner).ok_or_else(|| fail(XsStatus::NullPointer, "null potential handle"))
}

fn null_out() -> XsStatus {
    fail(XsStatus::NullPointer, "null output pointer")
}

/// Engine and report schema versions; static storage, never freed.
#[no_mangle]
pub extern "C" fn xs_version() -> *const c_char {
    concat!("engine ", env!("CARGO_PKG_VERSION"), ", report schema 1\0").as_ptr().cast()
}

/// Message of the last failed call on this thread; valid until the next
/// call into the library from this thread.
#[no_mangle]
pub extern "C" fn xs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn xs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a potential from its JSON form.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn xs_potential2d_from_json(json: *const c_char, out: *mut *mut XsPotential2D) -> XsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null_out());
        }
        *out = ptr::null_mut();
        let text = str_arg(json)?;
        let inner: Potential2D = serde_json::from_str(text).map_err(|e| engine(e.into()))?;
        inner.validate().map_err(engine)?;
        *out = Box::into_raw(Box::new(XsPotential2D { inner }));
        Ok(())
    })
}

/// # Safety
/// `p` must be null or a handle from [`xs_potential2d_from_json`], freed once.
#[no_mangle]
pub unsafe extern "C" fn xs_potential2d_free(p: *mut XsPotential2D) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// `ṽ(x, Ky)`.
///
/// # Safety
/// `p` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn xs_potential2d_fourier_y(
    p: *const XsPotential2D,
    x: f64,
    ky: f64,
    out: *mut XsComplex,
) -> XsStatus {
    guard(|| {
        let v = potential(p)?;
        let out = out.as_mut().ok_or_else(null_out)?;
        *out = v.fourier_y(x, ky).map_err(engine)?.into();
        Ok(())
    })
}

/// Scattering amplitudes at `n` output angles, written to `out_f[0..n]`.
/// A null `opts` uses 64 nodes and the default tolerance.
///
/// # Safety
/// `thetas` and `out_f` must point to `n` elements; `opts` may be null.
#[no_mangle]
pub unsafe extern "C" fn xs_amplitude(
    p: *const XsPotential2D,
    k: f64,
    side: XsSide,
    theta0: f64,
    thetas: *const f64,
    n: usize,
    opts: *const XsEngineOptions,
    out_f: *mut XsComplex,
) -> XsStatus {
    guard(|| {
        let v = potential(p)?;
        if n == 0 {
            return Err(fail(XsStatus::InvalidParameter, "no output angles"));
        }
        if thetas.is_null() || out_f.is_null() {
            return Err(null_out());
        }
        let thetas = std::slice::from_raw_parts(thetas, n);
        let (nodes, eo) = match opts.as_ref() {
            Some(o) => (
                o.nodes,
                EngineOptions {
                    slices: (o.slices > 0).then_some(o.slices),
                    tol: o.tol,
                    max_doublings: o.max_doublings,
                },
            ),
            None => (64, EngineOptions::default()),
        };
        let tables = scatter(v, k, theta0, thetas, &[side.into()], nodes, &eo).map_err(engine)?;
        let out = std::slice::from_raw_parts_mut(out_f, n);
        for (o, r) in out.iter_mut().zip(&tables[0].rows) {
            *o = r.f.into();
        }
        Ok(())
    })
}

/// First Born amplitude.
///
/// # Safety
/// `p` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn xs_born_2d(
    p: *const XsPotential2D,
    k: f64,
    side: XsSide,
    theta0: f64,
    theta: f64,
    out: *mut XsComplex,
) -> XsStatus {
    guard(|| {
        let v = potential(p)?;
        let out = out.as_mut().ok_or_else(null_out)?;
        *out = born_2d(v, k, theta0, theta, side.into()).map_err(engine)?.f.into();
        Ok(())
    })
}

/// Diffraction orders of a δ-comb. `*count` receives the number of orders;
/// when it exceeds `capacity` nothing else is written and
/// `BufferTooSmall` is returned.
///
/// # Safety
/// `orders`, `r`, `t` must point to `capacity` elements; `count` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn xs_comb_orders(
    p: *const XsPotential2D,
    k: f64,
    theta0: f64,
    side: XsSide,
    capacity: usize,
    orders: *mut i64,
    r: *mut XsComplex,
    t: *mut XsComplex,
    count: *mut usize,
) -> XsStatus {
    guard(|| {
        let v = potential(p)?;
        let count = count.as_mut().ok_or_else(null_out)?;
        let Potential2D::DeltaComb { lattice_frequency, .. } = v else {
            return Err(fail(XsStatus::UnsupportedFamily, "xs_comb_orders takes a DeltaComb"));
        };
        let lat = CombLattice::new(k, k * theta0.sin(), *lattice_frequency).map_err(engine)?;
        let tm = delta_transfer_matrix(v, &lat).map_err(engine)?;
        let table = diffraction_orders(&tm, side.into()).map_err(engine)?;
        *count = table.rows.len();
        if table.rows.len() > capacity {
            return Err(fail(XsStatus::BufferTooSmall, format!("{} orders do not fit", table.rows.len())));
        }
        if orders.is_null() || r.is_null() || t.is_null() {
            return Err(null_out());
        }
        for (i, row) in table.rows.iter().enumerate() {
            *orders.add(i) = row.n;
            *r.add(i) = row.r.into();
            *t.add(i) = row.t.into();
        }
        Ok(())
    })
}

/// Runs `experiment` (`invisibility`, `equivalence`, `comb` or `3d`) on a
/// run configuration in the CLI's JSON format. Relative potential paths
/// resolve against the working directory. `*pass` is 1 when the report
/// passes.
///
/// # Safety
/// String arguments must be NUL-terminated; `report` and `pass` writable.
#[no_mangle]
pub unsafe extern "C" fn xs_run_experiment_json(
    config_json: *const c_char,
    experiment: *const c_char,
    report: *mut *mut c_char,
    pass: *mut i32,
) -> XsStatus {
    guard(|| {
        if report.is_null() || pass.is_null() {
            return Err(null_out());
        }
        *report = ptr::null_mut();
        let cfg = RunConfig::from_json(str_arg(config_json)?, Path::new(".")).map_err(engine)?;
        let which: Experiment = str_arg(experiment)?.parse().map_err(engine)?;
        let rep = run_experiment(&cfg, which).map_err(engine)?;
        *pass = i32::from(rep.pass);
        *report = CString::new(rep.to_json()).expect("JSON has no NUL").into_raw();
        Ok(())
    })
}

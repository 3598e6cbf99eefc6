//! C ABI over `gapdecomp`.
//!
//! Every entry point returns a [`GdStatus`]; on failure a message for the
//! calling thread is available from [`gd_last_error`]. Objects cross the
//! boundary as opaque handles and are released with their `_free`
//! function; strings returned through `char **` out-parameters are
//! released with [`gd_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use gapdecomp::cli::{self, OutputFormat, Report, RunConfig};
use gapdecomp::dataio::DesignMatrix;
use gapdecomp::decomp::oaxaca_blinder;
use gapdecomp::probit::{fit, FitOptions, FittedProbit};
use gapdecomp::{Error, ErrorKind};

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GdStatus {
    Ok = 0,
    InvalidArgument = 1,
    ConfigError = 2,
    DataError = 3,
    EstimationError = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GdFormat {
    Text = 0,
    Csv = 1,
    Json = 2,
}

/// Headline numbers of one decomposition. Absent standard errors are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GdDecompositionSummary {
    pub total_gap: f64,
    pub total_gap_se: f64,
    pub explained_total: f64,
    pub explained_total_se: f64,
    pub unexplained_total: f64,
    pub n_reference: usize,
    pub n_comparison: usize,
    pub n_blocks: usize,
}

/// Output of a configured run (opaque).
pub struct GdReport(Report);

/// A fitted probit model (opaque).
pub struct GdProbit(FittedProbit);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

enum Failure {
    Invalid(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Outcome = Result<(), Failure>;

fn guard(f: impl FnOnce() -> Outcome) -> GdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            GdStatus::Ok
        }
        Ok(Err(Failure::Invalid(msg))) => {
            set_error(format!("invalid argument: {msg}"));
            GdStatus::InvalidArgument
        }
        Ok(Err(Failure::Lib(err))) => {
            set_error(cli::error_message(&err));
            match err.kind() {
                ErrorKind::Config => GdStatus::ConfigError,
                ErrorKind::Data => GdStatus::DataError,
                ErrorKind::Estimation => GdStatus::EstimationError,
            }
        }
        Err(payload) => {
            let what = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown".into());
            set_error(format!("panic: {what}"));
            GdStatus::Panic
        }
    }
}

fn invalid<T>(msg: &str) -> Result<T, Failure> {
    Err(Failure::Invalid(msg.to_owned()))
}

unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return invalid(&format!("{what} is NULL"));
    }
    CStr::from_ptr(s).to_str().map_err(|_| Failure::Invalid(format!("{what} is not UTF-8")))
}

unsafe fn read_slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return invalid(&format!("{what} is NULL"));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn write_out<T>(out: *mut T, value: T) {
    ptr::write(out, value);
}

fn to_c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s).map(CString::into_raw).map_err(|_| Failure::Invalid("output contains NUL".into()))
}

/// Message of the last failed call on this thread, or NULL after a
/// successful call. Valid until the next call into the library.
#[no_mangle]
pub extern "C" fn gd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be NULL or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

unsafe fn parse_config(config_toml: *const c_char, base_dir: *const c_char) -> Result<RunConfig, Failure> {
    let text = read_str(config_toml, "config")?;
    let mut cfg = RunConfig::parse(text)?;
    if !base_dir.is_null() && cfg.data.is_relative() {
        cfg.data = Path::new(read_str(base_dir, "base_dir")?).join(&cfg.data);
    }
    Ok(cfg)
}

/// Runs the configuration given as TOML text. Relative data paths resolve
/// against `base_dir` (may be NULL for the working directory).
///
/// # Safety
/// `config_toml` must be a NUL-terminated string, `base_dir` NULL or a
/// NUL-terminated string, and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gd_run(
    config_toml: *const c_char,
    base_dir: *const c_char,
    out: *mut *mut GdReport,
) -> GdStatus {
    guard(|| {
        if out.is_null() {
            return invalid("out is NULL");
        }
        let cfg = parse_config(config_toml, base_dir)?;
        let report = cli::run(&cfg)?;
        write_out(out, Box::into_raw(Box::new(GdReport(report))));
        Ok(())
    })
}

/// Dry-run checks. Writes the number of problems to `count` and, when
/// `diagnostics_json` is not NULL, a JSON array describing them.
///
/// # Safety
/// String arguments as for [`gd_run`]; `count` must be valid and
/// `diagnostics_json` NULL or valid.
#[no_mangle]
pub unsafe extern "C" fn gd_validate(
    config_toml: *const c_char,
    base_dir: *const c_char,
    count: *mut usize,
    diagnostics_json: *mut *mut c_char,
) -> GdStatus {
    guard(|| {
        if count.is_null() {
            return invalid("count is NULL");
        }
        let cfg = parse_config(config_toml, base_dir)?;
        let diags = cli::validate(&cfg);
        write_out(count, diags.len());
        if !diagnostics_json.is_null() {
            let json = serde_json::to_string(&diags).expect("diagnostics serialize");
            write_out(diagnostics_json, to_c_string(json)?);
        }
        Ok(())
    })
}

/// Renders the report as text, CSV or JSON into a new string.
///
/// # Safety
/// `report` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gd_report_render(report: *const GdReport, format: GdFormat, out: *mut *mut c_char) -> GdStatus {
    guard(|| {
        let Some(r) = report.as_ref() else { return invalid("report is NULL") };
        if out.is_null() {
            return invalid("out is NULL");
        }
        let format = match format {
            GdFormat::Text => OutputFormat::Text,
            GdFormat::Csv => OutputFormat::Csv,
            GdFormat::Json => OutputFormat::Json,
        };
        write_out(out, to_c_string(r.0.render(format))?);
        Ok(())
    })
}

/// Number of decompositions (outcomes times comparison groups).
///
/// # Safety
/// `report` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gd_report_decomposition_count(report: *const GdReport) -> usize {
    report.as_ref().map_or(0, |r| r.0.decompositions.len())
}

/// # Safety
/// `report` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gd_report_decomposition(
    report: *const GdReport,
    index: usize,
    out: *mut GdDecompositionSummary,
) -> GdStatus {
    guard(|| {
        let Some(r) = report.as_ref() else { return invalid("report is NULL") };
        if out.is_null() {
            return invalid("out is NULL");
        }
        let Some(d) = r.0.decompositions.get(index) else { return invalid("index out of range") };
        write_out(
            out,
            GdDecompositionSummary {
                total_gap: d.total_gap,
                total_gap_se: d.total_gap_se.unwrap_or(f64::NAN),
                explained_total: d.explained_total,
                explained_total_se: d.explained_total_se.unwrap_or(f64::NAN),
                unexplained_total: d.unexplained_total,
                n_reference: d.n_reference,
                n_comparison: d.n_comparison,
                n_blocks: d.contributions.len(),
            },
        );
        Ok(())
    })
}

/// # Safety
/// `report` must be NULL or a handle from [`gd_run`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gd_report_free(report: *mut GdReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

fn with_intercept(x: &[f64], n: usize, k: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n * (k + 1));
    for row in x.chunks(k.max(1)).take(n) {
        out.push(1.0);
        out.extend_from_slice(&row[..k]);
    }
    if k == 0 {
        out.resize(n, 1.0);
    }
    out
}

unsafe fn design(x: *const f64, n: usize, k: usize, y: &[f64], w: *const f64) -> Result<DesignMatrix, Failure> {
    let xs = read_slice(x, n * k, "x")?;
    let w = if w.is_null() { vec![1.0; n] } else { read_slice(w, n, "w")?.to_vec() };
    Ok(DesignMatrix::from_numeric(with_intercept(xs, n, k), k + 1, y.to_vec(), w)?)
}

/// Fits a weighted probit by maximum likelihood. `x` is row-major `n x k`
/// without an intercept (one is added as the first coefficient); `y` holds
/// 0/1 outcomes; `w` may be NULL for unit weights.
///
/// # Safety
/// `x` must point to `n * k` doubles, `y` and (non-NULL) `w` to `n`
/// doubles, and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn gd_probit_fit(
    x: *const f64,
    n: usize,
    k: usize,
    y: *const f64,
    w: *const f64,
    out: *mut *mut GdProbit,
) -> GdStatus {
    guard(|| {
        if out.is_null() {
            return invalid("out is NULL");
        }
        if n == 0 {
            return invalid("no observations");
        }
        let ys = read_slice(y, n, "y")?;
        if ys.iter().any(|&v| v != 0.0 && v != 1.0) {
            return invalid("y must be 0 or 1");
        }
        let dm = design(x, n, k, ys, w)?;
        let model = fit(&dm, &FitOptions::default())?;
        write_out(out, Box::into_raw(Box::new(GdProbit(model))));
        Ok(())
    })
}

/// Number of coefficients (`k + 1`).
///
/// # Safety
/// `model` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gd_probit_len(model: *const GdProbit) -> usize {
    model.as_ref().map_or(0, |m| m.0.beta.len())
}

/// Copies coefficients and robust standard errors (either may be NULL)
/// into arrays of `len` doubles; `len` must equal [`gd_probit_len`].
///
/// # Safety
/// `model` must be a live handle; non-NULL arrays must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn gd_probit_coefficients(
    model: *const GdProbit,
    beta: *mut f64,
    robust_se: *mut f64,
    len: usize,
) -> GdStatus {
    guard(|| {
        let Some(m) = model.as_ref() else { return invalid("model is NULL") };
        if len != m.0.beta.len() {
            return invalid("len does not match the number of coefficients");
        }
        if !beta.is_null() {
            std::slice::from_raw_parts_mut(beta, len).copy_from_slice(&m.0.beta);
        }
        if !robust_se.is_null() {
            std::slice::from_raw_parts_mut(robust_se, len).copy_from_slice(&m.0.robust_se());
        }
        Ok(())
    })
}

/// Log-likelihood at the estimate; NaN for a NULL handle.
///
/// # Safety
/// `model` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gd_probit_loglik(model: *const GdProbit) -> f64 {
    model.as_ref().map_or(f64::NAN, |m| m.0.loglik)
}

/// # Safety
/// `model` must be NULL or a handle from [`gd_probit_fit`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gd_probit_free(model: *mut GdProbit) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Two-fold linear decomposition of the gap between groups `a` and `d`.
/// `xa` (`na x k`) and `xd` (`nd x k`) are row-major without intercept;
/// `beta_a` and `beta_d` hold `k + 1` coefficients, intercept first;
/// weights may be NULL. Per-column terms (`k + 1` each) are written when
/// the corresponding pointer is not NULL.
///
/// # Safety
/// Arrays must have the sizes stated above; `explained` and `unexplained`
/// must be valid.
#[no_mangle]
pub unsafe extern "C" fn gd_oaxaca_blinder(
    xa: *const f64,
    wa: *const f64,
    na: usize,
    xd: *const f64,
    wd: *const f64,
    nd: usize,
    k: usize,
    beta_a: *const f64,
    beta_d: *const f64,
    explained: *mut f64,
    unexplained: *mut f64,
    explained_by_column: *mut f64,
    unexplained_by_column: *mut f64,
) -> GdStatus {
    guard(|| {
        if explained.is_null() || unexplained.is_null() {
            return invalid("explained/unexplained is NULL");
        }
        if na == 0 || nd == 0 {
            return invalid("empty group");
        }
        let ba = read_slice(beta_a, k + 1, "beta_a")?;
        let bd = read_slice(beta_d, k + 1, "beta_d")?;
        let dm_a = design(xa, na, k, &vec![0.0; na], wa)?;
        let dm_d = design(xd, nd, k, &vec![0.0; nd], wd)?;
        let r = oaxaca_blinder(&dm_a, &dm_d, ba, bd)?;
        write_out(explained, r.explained);
        write_out(unexplained, r.unexplained);
        if !explained_by_column.is_null() {
            std::slice::from_raw_parts_mut(explained_by_column, k + 1).copy_from_slice(&r.explained_by_column);
        }
        if !unexplained_by_column.is_null() {
            std::slice::from_raw_parts_mut(unexplained_by_column, k + 1).copy_from_slice(&r.unexplained_by_column);
        }
        Ok(())
    })
}

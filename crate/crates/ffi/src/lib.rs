//! C ABI over `aqf`.
//!
//! Every fallible function returns an [`AqfStatus`]. On failure the message
//! is available from [`aqf_last_error_message`] on the same thread until the
//! next failing call. Objects are opaque handles released with their
//! `_free` function; passing NULL to a `_free` function is a no-op.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use aqf::aqi::{AqiError, AqiMode, BreakpointTable, Category, Pollutant};
use aqf::metrics::{regression_metrics, MetricsError};
use aqf::nn::{load_model, predict_with, BiLstmNetwork, NnError};
use aqf::stats::{adf_test, StatsError, Verdict};
use aqf::timeseries::{clean, parse_csv, FrameError, ObservationFrame};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AqfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    /// Malformed CSV, model file or breakpoint table.
    Parse = 4,
    /// Cleaning or analysis left too little data.
    InsufficientData = 5,
    /// Non-finite values or a singular regression.
    Numeric = 6,
    Panic = 99,
}

/// Parsed or cleaned observations.
pub struct AqfFrame(ObservationFrame);

/// A trained forecaster with its scaler.
pub struct AqfModel(BiLstmNetwork);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct AqfCleanReport {
    pub input_rows: usize,
    pub kept: usize,
    pub missing: usize,
    pub out_of_range: usize,
    pub duplicate: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct AqfAqi {
    pub sub_index_pm25: i32,
    pub sub_index_pm10: i32,
    pub composite: i32,
    /// 0 = PM2.5, 1 = PM10.
    pub dominant: i32,
    /// 0 Good, 1 Moderate, 2 Unhealthy for Sensitive Groups, 3 Unhealthy,
    /// 4 Very Unhealthy, 5 Hazardous.
    pub category: i32,
    pub above_scale: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct AqfAdfResult {
    pub statistic: f64,
    pub p_value: f64,
    pub lags_used: usize,
    pub n_obs: usize,
    pub stationary: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct AqfMetrics {
    pub mse: f64,
    pub rmse: f64,
    pub mae: f64,
    /// NaN when the truths are constant.
    pub r2: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("no interior NUL");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(AqfStatus, String);

impl From<FrameError> for Failure {
    fn from(e: FrameError) -> Self {
        let status = match e {
            FrameError::AllRowsDropped | FrameError::EmptyInput => AqfStatus::InsufficientData,
            _ => AqfStatus::Parse,
        };
        Failure(status, e.to_string())
    }
}

impl From<NnError> for Failure {
    fn from(e: NnError) -> Self {
        let status = match &e {
            NnError::Io(_) => AqfStatus::Io,
            NnError::CorruptFile(_) | NnError::VersionMismatch { .. } => AqfStatus::Parse,
            NnError::InsufficientHistory { .. } | NnError::EmptyDataset => AqfStatus::InsufficientData,
            NnError::NonFiniteValue | NnError::NonFiniteLoss { .. } => AqfStatus::Numeric,
            _ => AqfStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

impl From<StatsError> for Failure {
    fn from(e: StatsError) -> Self {
        let status = match e {
            StatsError::SingularRegression | StatsError::ConstantSeries => AqfStatus::Numeric,
            StatsError::UnknownColumn(_) => AqfStatus::InvalidArgument,
            _ => AqfStatus::InsufficientData,
        };
        Failure(status, e.to_string())
    }
}

impl From<AqiError> for Failure {
    fn from(e: AqiError) -> Self {
        let status = match e {
            AqiError::Io(_) => AqfStatus::Io,
            AqiError::InvalidTable(_) => AqfStatus::Parse,
            _ => AqfStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

impl From<MetricsError> for Failure {
    fn from(e: MetricsError) -> Self {
        Failure(AqfStatus::InvalidArgument, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(AqfStatus::NullPointer, format!("{what} is NULL"))
}

/// Runs `body`, converting errors and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> AqfStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => AqfStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            AqfStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(AqfStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

unsafe fn slice_arg<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn aqf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failure on this thread, or NULL. The pointer stays
/// valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn aqf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses CSV text into a new frame.
///
/// # Safety
/// `csv` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aqf_frame_from_csv(csv: *const c_char, out: *mut *mut AqfFrame) -> AqfStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let frame = parse_csv(str_arg(csv, "csv")?)?;
        *out = Box::into_raw(Box::new(AqfFrame(frame)));
        Ok(())
    })
}

/// Reads and parses a CSV file into a new frame.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aqf_frame_from_path(path: *const c_char, out: *mut *mut AqfFrame) -> AqfStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let path = str_arg(path, "path")?;
        let text = std::fs::read_to_string(path).map_err(|e| Failure(AqfStatus::Io, format!("{path}: {e}")))?;
        *out = Box::into_raw(Box::new(AqfFrame(parse_csv(&text)?)));
        Ok(())
    })
}

/// Cleans `frame` into a new frame. `report` may be NULL.
///
/// # Safety
/// `frame` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aqf_frame_clean(
    frame: *const AqfFrame,
    out: *mut *mut AqfFrame,
    report: *mut AqfCleanReport,
) -> AqfStatus {
    guard(|| {
        let frame = frame.as_ref().ok_or_else(|| null("frame"))?;
        let out = out_arg(out, "out")?;
        let (cleaned, r) = clean(&frame.0)?;
        if let Some(report) = report.as_mut() {
            *report = AqfCleanReport {
                input_rows: r.input_rows,
                kept: r.kept,
                missing: r.missing,
                out_of_range: r.out_of_range,
                duplicate: r.duplicate,
            };
        }
        *out = Box::into_raw(Box::new(AqfFrame(cleaned)));
        Ok(())
    })
}

/// Number of rows, or 0 for NULL.
///
/// # Safety
/// `frame` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn aqf_frame_len(frame: *const AqfFrame) -> usize {
    frame.as_ref().map_or(0, |f| f.0.len())
}

/// Copies column `name` into `out`, which must hold `aqf_frame_len` values.
///
/// # Safety
/// `frame` must be a live handle, `name` NUL-terminated, and `out` must
/// point to `capacity` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn aqf_frame_column(
    frame: *const AqfFrame,
    name: *const c_char,
    out: *mut f64,
    capacity: usize,
) -> AqfStatus {
    guard(|| {
        let frame = frame.as_ref().ok_or_else(|| null("frame"))?;
        let name = str_arg(name, "name")?;
        let column = frame
            .0
            .column_by_name(name)
            .ok_or_else(|| Failure(AqfStatus::InvalidArgument, format!("unknown column `{name}`")))?;
        if capacity < column.len() {
            return Err(Failure(
                AqfStatus::InvalidArgument,
                format!("buffer holds {capacity} values, column has {}", column.len()),
            ));
        }
        if !column.is_empty() {
            if out.is_null() {
                return Err(null("out"));
            }
            std::slice::from_raw_parts_mut(out, column.len()).copy_from_slice(column);
        }
        Ok(())
    })
}

/// # Safety
/// `frame` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn aqf_frame_free(frame: *mut AqfFrame) {
    if !frame.is_null() {
        drop(Box::from_raw(frame));
    }
}

/// Loads a model file.
///
/// # Safety
/// `path` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aqf_model_load(path: *const c_char, out: *mut *mut AqfModel) -> AqfStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let net = load_model(Path::new(str_arg(path, "path")?))?;
        *out = Box::into_raw(Box::new(AqfModel(net)));
        Ok(())
    })
}

/// Rows of history a forecast needs, or 0 for NULL.
///
/// # Safety
/// `model` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn aqf_model_lookback(model: *const AqfModel) -> usize {
    model.as_ref().map_or(0, |m| m.0.lookback())
}

/// Forecasts `steps` hours past the end of `frame`. Each output array must
/// hold `steps` values; `aqi` may be NULL. `trailing_24h` selects the AQI
/// basis (trailing 24-hour mean, otherwise the hourly value).
///
/// # Safety
/// `model` and `frame` must be live handles; non-NULL output pointers must
/// point to `steps` writable elements.
#[no_mangle]
pub unsafe extern "C" fn aqf_model_forecast(
    model: *const AqfModel,
    frame: *const AqfFrame,
    steps: usize,
    trailing_24h: bool,
    pm25: *mut f64,
    pm10: *mut f64,
    aqi: *mut i32,
) -> AqfStatus {
    guard(|| {
        let model = model.as_ref().ok_or_else(|| null("model"))?;
        let frame = frame.as_ref().ok_or_else(|| null("frame"))?;
        if steps == 0 {
            return Ok(());
        }
        if pm25.is_null() || pm10.is_null() {
            return Err(null("pm25/pm10"));
        }
        let mode = if trailing_24h {
            AqiMode::Trailing24h
        } else {
            AqiMode::Instant
        };
        let forecasts = predict_with(&model.0, &frame.0, steps, &BreakpointTable::default(), mode)?;
        for (k, f) in forecasts.iter().enumerate() {
            *pm25.add(k) = f.pm25;
            *pm10.add(k) = f.pm10;
            if !aqi.is_null() {
                *aqi.add(k) = f.aqi.composite as i32;
            }
        }
        Ok(())
    })
}

/// # Safety
/// `model` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn aqf_model_free(model: *mut AqfModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

fn category_code(c: Category) -> i32 {
    match c {
        Category::Good => 0,
        Category::Moderate => 1,
        Category::UnhealthySensitive => 2,
        Category::Unhealthy => 3,
        Category::VeryUnhealthy => 4,
        Category::Hazardous => 5,
    }
}

/// Composite AQI on the bundled EPA table, concentrations in µg/m³.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aqf_aqi_composite(pm25: f64, pm10: f64, out: *mut AqfAqi) -> AqfStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let r = aqf::aqi::composite_aqi(pm25, pm10)?;
        *out = AqfAqi {
            sub_index_pm25: r.sub_index_pm25 as i32,
            sub_index_pm10: r.sub_index_pm10 as i32,
            composite: r.composite as i32,
            dominant: if r.dominant == Pollutant::Pm25 { 0 } else { 1 },
            category: category_code(r.category),
            above_scale: r.above_scale,
        };
        Ok(())
    })
}

/// Augmented Dickey-Fuller test with a constant and AIC lag selection.
/// A negative `max_lag` selects the default maximum lag.
///
/// # Safety
/// `series` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aqf_adf_test(
    series: *const f64,
    len: usize,
    max_lag: i64,
    threshold: f64,
    out: *mut AqfAdfResult,
) -> AqfStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let series = slice_arg(series, len, "series")?;
        let max_lag = usize::try_from(max_lag).ok();
        let r = adf_test(series, max_lag, threshold)?;
        *out = AqfAdfResult {
            statistic: r.statistic,
            p_value: r.p_value,
            lags_used: r.lags_used,
            n_obs: r.n_obs,
            stationary: r.verdict == Verdict::Stationary,
        };
        Ok(())
    })
}

/// MSE, RMSE, MAE and R² of `predictions` against `truths`.
///
/// # Safety
/// Both arrays must hold `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aqf_evaluate(
    predictions: *const f64,
    truths: *const f64,
    len: usize,
    out: *mut AqfMetrics,
) -> AqfStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let m = regression_metrics(
            slice_arg(predictions, len, "predictions")?,
            slice_arg(truths, len, "truths")?,
        )?;
        *out = AqfMetrics {
            mse: m.mse,
            rmse: m.rmse,
            mae: m.mae,
            r2: m.r2,
        };
        Ok(())
    })
}

//! C ABI over the `nfx` measurement library.
//!
//! Conventions: every fallible call returns an [`NfxStatus`] and writes its
//! result through an out-pointer; non-zero statuses leave a thread-local
//! message retrievable via [`nfx_last_error`]. Handles returned through
//! out-pointers are owned by the caller and must be released with the
//! matching `*_free` function exactly once. Strings cross the boundary as
//! NUL-terminated UTF-8.
//!
//! The companion header `include/nfx.h` is generated from this file at
//! build time.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fmt::Display;
use std::str::FromStr;

use chrono::Datelike;
use nfx::ingest::IngestError;
use nfx::{
    aggregate, classify_series, generate, parse_series, pearson, render_stemplot, AssetConfig,
    AssetSeries, DailyNfx, GrowthLaw, MagnitudeRule, NfxClass, ParseOptions, ProxyPair,
    StemPlotSpec, SynthSpec,
};

/// Status of a call. Anything but `Ok` leaves a message for
/// [`nfx_last_error`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NfxStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// An argument failed validation (unknown token, out-of-range index,
    /// rejected synthesis parameters).
    InvalidArg = 2,
    /// A string argument was not valid UTF-8.
    Utf8 = 3,
    /// The operating system reported an I/O failure.
    Io = 4,
    /// Input text could not be parsed into series data.
    Parse = 5,
    /// The measurement could not be produced from otherwise valid input.
    Compute = 6,
}

/// Classification of one day.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NfxDayClass {
    Positive = 0,
    Reverse = 1,
    NoEffect = 2,
    Undefined = 3,
}

/// One classified day, flattened for C consumption. `delta_v`/`delta_u` are
/// NaN on undefined days.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct NfxDay {
    pub year: i32,
    pub month: u32,
    pub day: u32,
    pub delta_v: f64,
    pub delta_u: f64,
    pub class: NfxDayClass,
}

/// Aggregate measurements for one asset and proxy pair. Relative strengths
/// are NaN when no day carried the corresponding effect.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct NfxAggregateRow {
    pub total_days: u64,
    pub undefined_days: u64,
    pub pos_days: u64,
    pub rev_days: u64,
    pub pos_strength_sum: f64,
    pub rev_strength_sum: f64,
    pub pos_prevalence: f64,
    pub rev_prevalence: f64,
    pub pos_relative_strength: f64,
    pub rev_relative_strength: f64,
}

/// Opaque daily series handle.
pub struct NfxSeries(AssetSeries);

/// Opaque classified-days handle.
pub struct NfxDays(Vec<DailyNfx>);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn fail(status: NfxStatus, message: impl Display) -> NfxStatus {
    let text = message.to_string().replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(text).ok();
    });
    status
}

/// Read a required C string argument.
///
/// # Safety
/// `ptr` must be null or point to a NUL-terminated string.
unsafe fn required_str<'a>(ptr: *const c_char, name: &str) -> Result<&'a str, NfxStatus> {
    if ptr.is_null() {
        return Err(fail(NfxStatus::NullPointer, format!("{name} is null")));
    }
    unsafe { CStr::from_ptr(ptr) }
        .to_str()
        .map_err(|e| fail(NfxStatus::Utf8, format!("{name}: {e}")))
}

fn parse_token<T: FromStr>(text: &str, name: &str) -> Result<T, NfxStatus>
where
    T::Err: Display,
{
    text.parse()
        .map_err(|e| fail(NfxStatus::InvalidArg, format!("{name}: {e}")))
}

fn write_out<T>(out: *mut T, value: T, name: &str) -> NfxStatus {
    if out.is_null() {
        return fail(NfxStatus::NullPointer, format!("{name} is null"));
    }
    unsafe { out.write(value) };
    NfxStatus::Ok
}

/// `Io` if an `std::io::Error` sits anywhere in the cause chain (missing
/// file, read fault), `Parse` otherwise. The CSV reader wraps open failures
/// in its own error type, so matching the top-level variant is not enough.
fn ingest_status(e: &IngestError) -> NfxStatus {
    let mut source = std::error::Error::source(e);
    while let Some(inner) = source {
        if inner.is::<std::io::Error>() {
            return NfxStatus::Io;
        }
        source = inner.source();
    }
    NfxStatus::Parse
}

/// Last error message raised on this thread, or null if none. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn nfx_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(std::ptr::null(), |s| s.as_ptr())
    })
}

/// Load a daily series from a metrics CSV file (`time` column plus any of
/// PriceUSD, TxTfrValAdjUSD, AdrBalCnt, AdrActCnt, 6MAdrActCnt). The whole
/// file range is kept. `fill_gaps` inserts all-missing rows for interior
/// date gaps instead of failing.
///
/// # Safety
/// `path` and `asset_id` point to NUL-terminated strings; `out` points to
/// writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn nfx_series_load_csv(
    path: *const c_char,
    asset_id: *const c_char,
    fill_gaps: bool,
    out: *mut *mut NfxSeries,
) -> NfxStatus {
    let (path, asset_id) = match (|| {
        Ok((
            unsafe { required_str(path, "path") }?,
            unsafe { required_str(asset_id, "asset_id") }?,
        ))
    })() {
        Ok(args) => args,
        Err(status) => return status,
    };
    let config = AssetConfig {
        asset_id: asset_id.to_string(),
        source_path: path.into(),
        start_date: chrono::NaiveDate::MIN,
        end_date: None,
        events_path: None,
    };
    match parse_series(&config.source_path, &config, &ParseOptions { fill_gaps }) {
        Ok(series) => write_out(out, Box::into_raw(Box::new(NfxSeries(series))), "out"),
        Err(e) => fail(ingest_status(&e), e),
    }
}

/// Generate a synthetic daily series. `law` is one of
/// linear | nlogn | metcalfe | exponential | noise.
///
/// # Safety
/// `law` points to a NUL-terminated string; `out` points to writable storage
/// for one pointer.
#[no_mangle]
pub unsafe extern "C" fn nfx_series_synth(
    law: *const c_char,
    days: u32,
    u0: f64,
    growth: f64,
    noise_sigma: f64,
    seed: u64,
    out: *mut *mut NfxSeries,
) -> NfxStatus {
    let law: GrowthLaw = match unsafe { required_str(law, "law") }
        .and_then(|text| parse_token(text, "law"))
    {
        Ok(law) => law,
        Err(status) => return status,
    };
    let spec = SynthSpec {
        law,
        days,
        u0,
        growth,
        noise_sigma,
        seed,
    };
    match generate(&spec) {
        Ok(series) => write_out(out, Box::into_raw(Box::new(NfxSeries(series))), "out"),
        Err(e) => fail(NfxStatus::InvalidArg, e),
    }
}

/// Number of days in the series; 0 for null.
///
/// # Safety
/// `series` is null or a live series handle.
#[no_mangle]
pub unsafe extern "C" fn nfx_series_len(series: *const NfxSeries) -> usize {
    if series.is_null() {
        return 0;
    }
    unsafe { &(*series).0 }.len()
}

/// Release a series handle. Null is a no-op.
///
/// # Safety
/// `series` must have come from this library and not been freed before.
#[no_mangle]
pub unsafe extern "C" fn nfx_series_free(series: *mut NfxSeries) {
    if !series.is_null() {
        drop(unsafe { Box::from_raw(series) });
    }
}

/// Classify every consecutive day pair of `series` under a proxy pair given
/// as a value:user token (price|txval, balcnt|act6m), e.g. "price:balcnt".
///
/// # Safety
/// `series` is a live series handle; `pair` points to a NUL-terminated
/// string; `out` points to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn nfx_classify(
    series: *const NfxSeries,
    pair: *const c_char,
    out: *mut *mut NfxDays,
) -> NfxStatus {
    if series.is_null() {
        return fail(NfxStatus::NullPointer, "series is null");
    }
    let pair: ProxyPair = match unsafe { required_str(pair, "pair") }
        .and_then(|text| parse_token(text, "pair"))
    {
        Ok(pair) => pair,
        Err(status) => return status,
    };
    match classify_series(unsafe { &(*series).0 }, pair) {
        Ok(days) => write_out(out, Box::into_raw(Box::new(NfxDays(days))), "out"),
        Err(e) => fail(NfxStatus::Compute, e),
    }
}

/// Number of classified days; 0 for null.
///
/// # Safety
/// `days` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nfx_days_len(days: *const NfxDays) -> usize {
    if days.is_null() {
        return 0;
    }
    unsafe { &(*days).0 }.len()
}

/// Copy the classified day at `index` into `*out`.
///
/// # Safety
/// `days` is a live handle; `out` points to writable storage for one
/// `NfxDay`.
#[no_mangle]
pub unsafe extern "C" fn nfx_days_get(
    days: *const NfxDays,
    index: usize,
    out: *mut NfxDay,
) -> NfxStatus {
    if days.is_null() {
        return fail(NfxStatus::NullPointer, "days is null");
    }
    let list = unsafe { &(*days).0 };
    let Some(day) = list.get(index) else {
        return fail(
            NfxStatus::InvalidArg,
            format!("index {index} out of range for {} days", list.len()),
        );
    };
    let class = match day.class {
        NfxClass::Positive => NfxDayClass::Positive,
        NfxClass::Reverse => NfxDayClass::Reverse,
        NfxClass::None => NfxDayClass::NoEffect,
        NfxClass::Undefined => NfxDayClass::Undefined,
    };
    write_out(
        out,
        NfxDay {
            year: day.date.year(),
            month: day.date.month(),
            day: day.date.day(),
            delta_v: day.delta_v,
            delta_u: day.delta_u,
            class,
        },
        "out",
    )
}

/// Release a classified-days handle. Null is a no-op.
///
/// # Safety
/// `days` must have come from this library and not been freed before.
#[no_mangle]
pub unsafe extern "C" fn nfx_days_free(days: *mut NfxDays) {
    if !days.is_null() {
        drop(unsafe { Box::from_raw(days) });
    }
}

/// Aggregate classified days into summary measurements. `pair` is the
/// value:user token the days were classified under; `magnitude_rule` is
/// abs-delta-v or abs-excess. Absent relative strengths come back as NaN.
///
/// # Safety
/// `days` is a live handle; the string arguments point to NUL-terminated
/// strings; `out` points to writable storage for one row.
#[no_mangle]
pub unsafe extern "C" fn nfx_aggregate(
    days: *const NfxDays,
    asset_id: *const c_char,
    pair: *const c_char,
    magnitude_rule: *const c_char,
    out: *mut NfxAggregateRow,
) -> NfxStatus {
    if days.is_null() {
        return fail(NfxStatus::NullPointer, "days is null");
    }
    let parsed = (|| {
        let asset_id = unsafe { required_str(asset_id, "asset_id") }?;
        let pair: ProxyPair =
            unsafe { required_str(pair, "pair") }.and_then(|t| parse_token(t, "pair"))?;
        let rule: MagnitudeRule = unsafe { required_str(magnitude_rule, "magnitude_rule") }
            .and_then(|t| parse_token(t, "magnitude_rule"))?;
        Ok((asset_id, pair, rule))
    })();
    let (asset_id, pair, rule) = match parsed {
        Ok(args) => args,
        Err(status) => return status,
    };
    match aggregate(asset_id, pair, unsafe { &(*days).0 }, rule) {
        Ok(agg) => write_out(
            out,
            NfxAggregateRow {
                total_days: agg.total_days,
                undefined_days: agg.undefined_days,
                pos_days: agg.pos_days,
                rev_days: agg.rev_days,
                pos_strength_sum: agg.pos_strength_sum,
                rev_strength_sum: agg.rev_strength_sum,
                pos_prevalence: agg.pos_prevalence,
                rev_prevalence: agg.rev_prevalence,
                pos_relative_strength: agg.pos_relative_strength.unwrap_or(f64::NAN),
                rev_relative_strength: agg.rev_relative_strength.unwrap_or(f64::NAN),
            },
            "out",
        ),
        Err(e) => fail(NfxStatus::Compute, e),
    }
}

/// Pearson correlation of two equal-length arrays.
///
/// # Safety
/// `x` and `y` point to `len` readable doubles each; `out` points to
/// writable storage for one double.
#[no_mangle]
pub unsafe extern "C" fn nfx_pearson(
    x: *const f64,
    y: *const f64,
    len: usize,
    out: *mut f64,
) -> NfxStatus {
    if x.is_null() || y.is_null() {
        return fail(NfxStatus::NullPointer, "x or y is null");
    }
    let x = unsafe { std::slice::from_raw_parts(x, len) };
    let y = unsafe { std::slice::from_raw_parts(y, len) };
    match pearson(x, y) {
        Ok(r) => write_out(out, r, "out"),
        Err(e) => fail(NfxStatus::Compute, e),
    }
}

/// Render classified days as a stem-plot SVG document. `title` may be null
/// for no title. The returned string must be released with
/// [`nfx_string_free`].
///
/// # Safety
/// `days` is a live handle; `title` is null or a NUL-terminated string;
/// `out` points to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn nfx_render_stemplot(
    days: *const NfxDays,
    title: *const c_char,
    out: *mut *mut c_char,
) -> NfxStatus {
    if days.is_null() {
        return fail(NfxStatus::NullPointer, "days is null");
    }
    let title = if title.is_null() {
        ""
    } else {
        match unsafe { required_str(title, "title") } {
            Ok(t) => t,
            Err(status) => return status,
        }
    };
    let spec = StemPlotSpec {
        title: title.to_string(),
        ..StemPlotSpec::default()
    };
    match render_stemplot(unsafe { &(*days).0 }, &spec) {
        Ok(svg) => {
            let text = CString::new(svg).expect("SVG output contains no NUL byte");
            write_out(out, text.into_raw(), "out")
        }
        Err(e) => fail(NfxStatus::Compute, e),
    }
}

/// Release a string returned by this library. Null is a no-op.
///
/// # Safety
/// `s` must have come from this library and not been freed before.
#[no_mangle]
pub unsafe extern "C" fn nfx_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

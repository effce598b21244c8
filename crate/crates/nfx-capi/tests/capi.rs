//! Exercises the C ABI from Rust exactly as a foreign caller would: through
//! raw pointers, C strings, and status codes.

use std::ffi::{c_char, CStr, CString};
use std::io::Write as _;
use std::ptr;

use nfx_capi::{
    nfx_aggregate, nfx_classify, nfx_days_free, nfx_days_get, nfx_days_len, nfx_last_error,
    nfx_pearson, nfx_render_stemplot, nfx_series_free, nfx_series_len, nfx_series_load_csv,
    nfx_series_synth, nfx_string_free, NfxAggregateRow, NfxDay, NfxDayClass, NfxDays, NfxSeries,
    NfxStatus,
};

fn c(text: &str) -> CString {
    CString::new(text).unwrap()
}

fn last_error() -> String {
    let ptr = nfx_last_error();
    assert!(!ptr.is_null(), "a failing call should leave a message");
    unsafe { CStr::from_ptr(ptr) }.to_str().unwrap().to_string()
}

fn synth_series(law: &str, days: u32, sigma: f64, seed: u64) -> *mut NfxSeries {
    let law = c(law);
    let mut series: *mut NfxSeries = ptr::null_mut();
    let status = unsafe {
        nfx_series_synth(law.as_ptr(), days, 1.0e5, 1.01, sigma, seed, &mut series)
    };
    assert_eq!(status, NfxStatus::Ok, "{}", last_error_or_blank());
    assert!(!series.is_null());
    series
}

fn last_error_or_blank() -> String {
    let ptr = nfx_last_error();
    if ptr.is_null() {
        String::new()
    } else {
        unsafe { CStr::from_ptr(ptr) }.to_str().unwrap().to_string()
    }
}

#[test]
fn synth_classify_aggregate_round_trip() {
    let series = synth_series("metcalfe", 365, 0.0, 1);
    assert_eq!(unsafe { nfx_series_len(series) }, 365);

    let pair = c("price:balcnt");
    let mut days: *mut NfxDays = ptr::null_mut();
    let status = unsafe { nfx_classify(series, pair.as_ptr(), &mut days) };
    assert_eq!(status, NfxStatus::Ok);
    assert_eq!(unsafe { nfx_days_len(days) }, 364);

    // A noiseless quadratic-law series grows value strictly faster than
    // users every single day.
    let mut first = NfxDay {
        year: 0,
        month: 0,
        day: 0,
        delta_v: 0.0,
        delta_u: 0.0,
        class: NfxDayClass::Undefined,
    };
    let day_count = unsafe { nfx_days_len(days) };
    for index in 0..day_count {
        let status = unsafe { nfx_days_get(days, index, &mut first) };
        assert_eq!(status, NfxStatus::Ok);
        assert_eq!(first.class, NfxDayClass::Positive, "day {index}");
        assert!(first.delta_v > first.delta_u && first.delta_u >= 0.0);
    }
    assert_eq!((first.year, first.month), (2016, 12));

    let asset = c("SYNTH");
    let rule = c("abs-delta-v");
    let mut row = NfxAggregateRow {
        total_days: 0,
        undefined_days: 0,
        pos_days: 0,
        rev_days: 0,
        pos_strength_sum: 0.0,
        rev_strength_sum: 0.0,
        pos_prevalence: 0.0,
        rev_prevalence: 0.0,
        pos_relative_strength: 0.0,
        rev_relative_strength: 0.0,
    };
    let status = unsafe {
        nfx_aggregate(days, asset.as_ptr(), pair.as_ptr(), rule.as_ptr(), &mut row)
    };
    assert_eq!(status, NfxStatus::Ok);
    assert_eq!(row.total_days, 364);
    assert_eq!(row.undefined_days, 0);
    assert_eq!(row.pos_days, 364);
    assert_eq!(row.rev_days, 0);
    assert!((row.pos_prevalence - 1.0).abs() < 1e-12);
    assert!(row.pos_relative_strength.is_finite());
    // No reverse day: the relative strength slot is the NaN sentinel.
    assert!(row.rev_relative_strength.is_nan());
    assert_eq!(row.rev_strength_sum, 0.0);

    // The same computation through the library directly must agree.
    let direct = {
        let spec = nfx::SynthSpec {
            law: "metcalfe".parse().unwrap(),
            days: 365,
            u0: 1.0e5,
            growth: 1.01,
            noise_sigma: 0.0,
            seed: 1,
        };
        let series = nfx::generate(&spec).unwrap();
        let classified =
            nfx::classify_series(&series, "price:balcnt".parse().unwrap()).unwrap();
        nfx::aggregate(
            "SYNTH",
            "price:balcnt".parse().unwrap(),
            &classified,
            nfx::MagnitudeRule::AbsDeltaV,
        )
        .unwrap()
    };
    assert_eq!(row.pos_strength_sum, direct.pos_strength_sum);
    assert_eq!(
        row.pos_relative_strength,
        direct.pos_relative_strength.unwrap()
    );

    unsafe {
        nfx_days_free(days);
        nfx_series_free(series);
    }
}

#[test]
fn render_returns_an_svg_document() {
    let series = synth_series("metcalfe", 90, 0.05, 7);
    let pair = c("txval:act6m");
    let mut days: *mut NfxDays = ptr::null_mut();
    assert_eq!(
        unsafe { nfx_classify(series, pair.as_ptr(), &mut days) },
        NfxStatus::Ok
    );

    let title = c("SYNTH txval:act6m");
    let mut svg: *mut c_char = ptr::null_mut();
    let status = unsafe { nfx_render_stemplot(days, title.as_ptr(), &mut svg) };
    assert_eq!(status, NfxStatus::Ok);
    let text = unsafe { CStr::from_ptr(svg) }.to_str().unwrap().to_string();
    assert!(text.starts_with("<svg"), "got: {}", &text[..40.min(text.len())]);
    assert!(text.ends_with("</svg>\n") || text.ends_with("</svg>"));
    assert!(text.contains("SYNTH txval:act6m"));

    // A null title is accepted and simply renders no title.
    let mut untitled: *mut c_char = ptr::null_mut();
    let status = unsafe { nfx_render_stemplot(days, ptr::null(), &mut untitled) };
    assert_eq!(status, NfxStatus::Ok);
    assert!(!unsafe { CStr::from_ptr(untitled) }
        .to_str()
        .unwrap()
        .contains("SYNTH"));

    unsafe {
        nfx_string_free(svg);
        nfx_string_free(untitled);
        nfx_days_free(days);
        nfx_series_free(series);
    }
}

#[test]
fn load_csv_round_trips_a_file() {
    let mut file = tempfile::Builder::new().suffix(".csv").tempfile().unwrap();
    writeln!(file, "time,PriceUSD,AdrBalCnt").unwrap();
    writeln!(file, "2020-01-01,10.0,100").unwrap();
    writeln!(file, "2020-01-02,11.0,105").unwrap();
    writeln!(file, "2020-01-03,12.5,111").unwrap();
    file.flush().unwrap();

    let path = c(file.path().to_str().unwrap());
    let asset = c("TEST");
    let mut series: *mut NfxSeries = ptr::null_mut();
    let status =
        unsafe { nfx_series_load_csv(path.as_ptr(), asset.as_ptr(), false, &mut series) };
    assert_eq!(status, NfxStatus::Ok, "{}", last_error_or_blank());
    assert_eq!(unsafe { nfx_series_len(series) }, 3);

    let pair = c("price:balcnt");
    let mut days: *mut NfxDays = ptr::null_mut();
    assert_eq!(
        unsafe { nfx_classify(series, pair.as_ptr(), &mut days) },
        NfxStatus::Ok
    );
    assert_eq!(unsafe { nfx_days_len(days) }, 2);
    let mut day = NfxDay {
        year: 0,
        month: 0,
        day: 0,
        delta_v: 0.0,
        delta_u: 0.0,
        class: NfxDayClass::Undefined,
    };
    assert_eq!(unsafe { nfx_days_get(days, 0, &mut day) }, NfxStatus::Ok);
    assert_eq!((day.year, day.month, day.day), (2020, 1, 2));
    assert!((day.delta_v - (11.0f64 / 10.0).ln()).abs() < 1e-15);
    assert!((day.delta_u - (105.0f64 / 100.0).ln()).abs() < 1e-15);
    assert_eq!(day.class, NfxDayClass::Positive);

    unsafe {
        nfx_days_free(days);
        nfx_series_free(series);
    }
}

#[test]
fn missing_file_reports_io_with_path() {
    let path = c("/nonexistent/definitely_missing.csv");
    let asset = c("GHOST");
    let mut series: *mut NfxSeries = ptr::null_mut();
    let status =
        unsafe { nfx_series_load_csv(path.as_ptr(), asset.as_ptr(), false, &mut series) };
    assert_eq!(status, NfxStatus::Io);
    assert!(series.is_null());
    assert!(last_error().contains("definitely_missing.csv"));
}

#[test]
fn null_and_invalid_arguments_are_rejected() {
    // Null required string.
    let mut series: *mut NfxSeries = ptr::null_mut();
    let status = unsafe {
        nfx_series_synth(ptr::null(), 10, 1.0, 1.0, 0.0, 0, &mut series)
    };
    assert_eq!(status, NfxStatus::NullPointer);
    assert!(last_error().contains("law"));

    // Unknown law token.
    let bad_law = c("cubic");
    let status = unsafe {
        nfx_series_synth(bad_law.as_ptr(), 10, 1.0, 1.0, 0.0, 0, &mut series)
    };
    assert_eq!(status, NfxStatus::InvalidArg);
    assert!(last_error().contains("cubic"));

    // Rejected synthesis parameters (no days to generate).
    let law = c("linear");
    let status = unsafe {
        nfx_series_synth(law.as_ptr(), 0, 1.0, 1.0, 0.0, 0, &mut series)
    };
    assert_eq!(status, NfxStatus::InvalidArg);

    // Invalid UTF-8 in a string argument.
    let invalid = [0xffu8, 0xfe, 0x00];
    let status = unsafe {
        nfx_series_synth(
            invalid.as_ptr().cast::<c_char>(),
            10,
            1.0,
            1.0,
            0.0,
            0,
            &mut series,
        )
    };
    assert_eq!(status, NfxStatus::Utf8);

    // Null series into classify.
    let pair = c("price:balcnt");
    let mut days: *mut NfxDays = ptr::null_mut();
    let status = unsafe { nfx_classify(ptr::null(), pair.as_ptr(), &mut days) };
    assert_eq!(status, NfxStatus::NullPointer);

    // Malformed pair token.
    let series = synth_series("linear", 10, 0.0, 0);
    let bad_pair = c("price-balcnt");
    let status = unsafe { nfx_classify(series, bad_pair.as_ptr(), &mut days) };
    assert_eq!(status, NfxStatus::InvalidArg);
    assert!(last_error().contains("price-balcnt"));

    // Null out-pointer.
    let status = unsafe { nfx_classify(series, pair.as_ptr(), ptr::null_mut()) };
    assert_eq!(status, NfxStatus::NullPointer);
    assert!(last_error().contains("out"));

    // Out-of-range index.
    assert_eq!(
        unsafe { nfx_classify(series, pair.as_ptr(), &mut days) },
        NfxStatus::Ok
    );
    let mut day = NfxDay {
        year: 0,
        month: 0,
        day: 0,
        delta_v: 0.0,
        delta_u: 0.0,
        class: NfxDayClass::Undefined,
    };
    let status = unsafe { nfx_days_get(days, 9, &mut day) };
    assert_eq!(status, NfxStatus::InvalidArg);
    assert!(last_error().contains("out of range"));

    // Unknown magnitude rule.
    let asset = c("SYNTH");
    let bad_rule = c("squared");
    let mut row = std::mem::MaybeUninit::<NfxAggregateRow>::uninit();
    let status = unsafe {
        nfx_aggregate(
            days,
            asset.as_ptr(),
            pair.as_ptr(),
            bad_rule.as_ptr(),
            row.as_mut_ptr(),
        )
    };
    assert_eq!(status, NfxStatus::InvalidArg);
    assert!(last_error().contains("squared"));

    unsafe {
        nfx_days_free(days);
        nfx_series_free(series);
    }

    // Free functions tolerate null.
    unsafe {
        nfx_series_free(ptr::null_mut());
        nfx_days_free(ptr::null_mut());
        nfx_string_free(ptr::null_mut());
    }
    assert_eq!(unsafe { nfx_series_len(ptr::null()) }, 0);
    assert_eq!(unsafe { nfx_days_len(ptr::null()) }, 0);
}

#[test]
fn pearson_matches_the_library_and_flags_degenerate_input() {
    let x: Vec<f64> = (0..50).map(|i| i as f64).collect();
    let y: Vec<f64> = x.iter().map(|v| 3.0 * v + 2.0 + (v * 0.7).sin()).collect();
    let mut r = 0.0f64;
    let status = unsafe { nfx_pearson(x.as_ptr(), y.as_ptr(), x.len(), &mut r) };
    assert_eq!(status, NfxStatus::Ok);
    assert_eq!(r, nfx::pearson(&x, &y).unwrap());

    let flat = vec![4.0f64; 50];
    let status = unsafe { nfx_pearson(x.as_ptr(), flat.as_ptr(), 50, &mut r) };
    assert_eq!(status, NfxStatus::Compute);

    let status = unsafe { nfx_pearson(ptr::null(), y.as_ptr(), 50, &mut r) };
    assert_eq!(status, NfxStatus::NullPointer);
}

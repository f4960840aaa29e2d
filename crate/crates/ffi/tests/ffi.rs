use std::ffi::{CStr, CString};
use std::ptr;

use aqf::nn::{save_model, BiLstmNetwork, NetworkConfig};
use aqf::preprocess::training_windows;
use aqf::synth::{synth_generate, SynthSpec};
use aqf_ffi::*;

const CSV: &str = "date,wd,ws,temp,rh,rfall,pm25,pm10
2018-10-05 18:00:00,180,0.3,24.5,94,0,5,22
2018-10-05 19:00:00,190,0.4,24.4,,0,6,25
2018-10-05 17:00:00,170,0.2,24.6,93,0,7,30
";

fn last_error() -> String {
    let p = aqf_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn version_is_package_version() {
    let v = unsafe { CStr::from_ptr(aqf_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn frame_parse_clean_and_copy_column() {
    let text = CString::new(CSV).unwrap();
    let mut raw = ptr::null_mut();
    assert_eq!(unsafe { aqf_frame_from_csv(text.as_ptr(), &mut raw) }, AqfStatus::Ok);
    assert_eq!(unsafe { aqf_frame_len(raw) }, 3);

    let mut cleaned = ptr::null_mut();
    let mut report = AqfCleanReport::default();
    assert_eq!(
        unsafe { aqf_frame_clean(raw, &mut cleaned, &mut report) },
        AqfStatus::Ok
    );
    assert_eq!((report.input_rows, report.kept, report.missing), (3, 2, 1));

    let name = CString::new("pm10").unwrap();
    let mut buf = [0.0; 2];
    assert_eq!(
        unsafe { aqf_frame_column(cleaned, name.as_ptr(), buf.as_mut_ptr(), 2) },
        AqfStatus::Ok
    );
    assert_eq!(buf, [30.0, 22.0]);
    assert_eq!(
        unsafe { aqf_frame_column(cleaned, name.as_ptr(), buf.as_mut_ptr(), 1) },
        AqfStatus::InvalidArgument
    );

    unsafe {
        aqf_frame_free(raw);
        aqf_frame_free(cleaned);
        aqf_frame_free(ptr::null_mut());
    }
}

#[test]
fn parse_errors_set_message() {
    let text = CString::new("date,wd\n2018-01-01 00:00:00,1\n").unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { aqf_frame_from_csv(text.as_ptr(), &mut out) }, AqfStatus::Parse);
    assert!(out.is_null());
    assert!(last_error().contains("ws"), "{}", last_error());
}

#[test]
fn null_arguments_are_rejected() {
    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { aqf_frame_from_csv(ptr::null(), &mut out) },
        AqfStatus::NullPointer
    );
    assert_eq!(
        unsafe { aqf_aqi_composite(5.0, 22.0, ptr::null_mut()) },
        AqfStatus::NullPointer
    );
    assert_eq!(unsafe { aqf_frame_len(ptr::null()) }, 0);
}

#[test]
fn missing_file_is_io_error() {
    let path = CString::new("/nonexistent/obs.csv").unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { aqf_frame_from_path(path.as_ptr(), &mut out) }, AqfStatus::Io);
    let mut model = ptr::null_mut();
    assert_eq!(unsafe { aqf_model_load(path.as_ptr(), &mut model) }, AqfStatus::Io);
}

#[test]
fn aqi_composite() {
    let mut r = AqfAqi::default();
    assert_eq!(unsafe { aqf_aqi_composite(5.0, 22.0, &mut r) }, AqfStatus::Ok);
    assert_eq!(
        (r.sub_index_pm25, r.sub_index_pm10, r.composite, r.dominant, r.category),
        (21, 20, 21, 0, 0)
    );
    assert_eq!(unsafe { aqf_aqi_composite(75.0, 197.0, &mut r) }, AqfStatus::Ok);
    assert_eq!((r.composite, r.category), (161, 3));
    assert_eq!(
        unsafe { aqf_aqi_composite(-1.0, 0.0, &mut r) },
        AqfStatus::InvalidArgument
    );
}

#[test]
fn adf_and_metrics() {
    let walk: Vec<f64> = (0..200)
        .map(|i| ((i * 7919) % 101) as f64)
        .scan(0.0, |s, v| {
            *s += v - 50.0;
            Some(*s)
        })
        .collect();
    let mut auto = AqfAdfResult::default();
    assert_eq!(
        unsafe { aqf_adf_test(walk.as_ptr(), walk.len(), -1, 0.05, &mut auto) },
        AqfStatus::Ok
    );
    let direct = aqf::stats::adf_test(&walk, None, 0.05).unwrap();
    assert_eq!(auto.statistic, direct.statistic);
    assert_eq!(auto.lags_used, direct.lags_used);

    let constant = [1.0; 50];
    let mut r = AqfAdfResult::default();
    assert_eq!(
        unsafe { aqf_adf_test(constant.as_ptr(), 50, -1, 0.05, &mut r) },
        AqfStatus::Numeric
    );

    let mut m = AqfMetrics::default();
    let (p, t) = ([1.0, 2.0, 4.0], [1.0, 2.0, 3.0]);
    assert_eq!(
        unsafe { aqf_evaluate(p.as_ptr(), t.as_ptr(), 3, &mut m) },
        AqfStatus::Ok
    );
    assert!((m.mse - 1.0 / 3.0).abs() < 1e-12 && (m.r2 - 0.5).abs() < 1e-12);
    assert_eq!(
        unsafe { aqf_evaluate(p.as_ptr(), t.as_ptr(), 0, &mut m) },
        AqfStatus::InvalidArgument
    );
}

#[test]
fn model_forecast_matches_library() {
    let frame = synth_generate(&SynthSpec {
        rows: 200,
        ..Default::default()
    })
    .unwrap();
    let features: Vec<String> = ["temp", "rh", "pm25", "pm10"].iter().map(|s| s.to_string()).collect();
    let (scaler, _) = training_windows(&frame, &features, 6, 0.8).unwrap();
    let net = BiLstmNetwork::new(NetworkConfig::standard(6, features), 3)
        .unwrap()
        .with_scaler(scaler);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    save_model(&net, &path).unwrap();

    let cpath = CString::new(path.to_str().unwrap()).unwrap();
    let mut model = ptr::null_mut();
    assert_eq!(unsafe { aqf_model_load(cpath.as_ptr(), &mut model) }, AqfStatus::Ok);
    assert_eq!(unsafe { aqf_model_lookback(model) }, 6);

    let text = CString::new(frame.to_csv()).unwrap();
    let mut handle = ptr::null_mut();
    assert_eq!(unsafe { aqf_frame_from_csv(text.as_ptr(), &mut handle) }, AqfStatus::Ok);
    let (mut pm25, mut pm10, mut aqi) = ([0.0; 3], [0.0; 3], [0i32; 3]);
    let status = unsafe {
        aqf_model_forecast(
            model,
            handle,
            3,
            true,
            pm25.as_mut_ptr(),
            pm10.as_mut_ptr(),
            aqi.as_mut_ptr(),
        )
    };
    assert_eq!(status, AqfStatus::Ok);

    let expected = aqf::nn::predict(&net, &frame, 3).unwrap();
    for k in 0..3 {
        assert_eq!(pm25[k], expected[k].pm25);
        assert_eq!(pm10[k], expected[k].pm10);
        assert_eq!(aqi[k] as i64, expected[k].aqi.composite);
    }

    let short = CString::new(frame.slice(0..3).to_csv()).unwrap();
    let mut short_handle = ptr::null_mut();
    assert_eq!(
        unsafe { aqf_frame_from_csv(short.as_ptr(), &mut short_handle) },
        AqfStatus::Ok
    );
    let status = unsafe {
        aqf_model_forecast(
            model,
            short_handle,
            3,
            true,
            pm25.as_mut_ptr(),
            pm10.as_mut_ptr(),
            ptr::null_mut(),
        )
    };
    assert_eq!(status, AqfStatus::InsufficientData);

    unsafe {
        aqf_frame_free(handle);
        aqf_frame_free(short_handle);
        aqf_model_free(model);
    }
}

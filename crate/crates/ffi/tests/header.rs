//! The generated header must compile as C and declare every exported symbol.

use std::path::Path;
use std::process::Command;

const HEADER: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/include/aqf.h");

#[test]
fn declares_exports() {
    let text = std::fs::read_to_string(HEADER).unwrap();
    for symbol in [
        "aqf_version",
        "aqf_last_error_message",
        "aqf_frame_from_csv",
        "aqf_frame_from_path",
        "aqf_frame_clean",
        "aqf_frame_len",
        "aqf_frame_column",
        "aqf_frame_free",
        "aqf_model_load",
        "aqf_model_lookback",
        "aqf_model_forecast",
        "aqf_model_free",
        "aqf_aqi_composite",
        "aqf_adf_test",
        "aqf_evaluate",
        "AQF_STATUS_OK",
        "typedef struct AqfFrame AqfFrame",
    ] {
        assert!(text.contains(symbol), "header lacks {symbol}");
    }
}

#[test]
fn compiles_as_c() {
    let Ok(cc) = which_cc() else { return };
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use_header.c");
    std::fs::write(
        &src,
        "#include \"aqf.h\"\nint main(void) { AqfAqi r; return aqf_aqi_composite(5.0, 22.0, &r); }\n",
    )
    .unwrap();
    let include = Path::new(HEADER).parent().unwrap();
    let status = Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(include)
        .arg(&src)
        .status()
        .unwrap();
    assert!(status.success());
}

fn which_cc() -> Result<&'static str, ()> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| Command::new(c).arg("--version").output().is_ok())
        .ok_or(())
}

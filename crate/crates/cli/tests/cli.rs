//! End-to-end tests of the `fracdim` binary: exit codes, output formats,
//! config handling, and stdout determinism.

use std::path::Path;
use std::process::{Command, Output};

fn fracdim(args: &[&str], dir: &Path, envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fracdim"));
    cmd.args(args).current_dir(dir);
    cmd.env_remove("FRACDIM_CONFIG");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn generate(dir: &Path, args: &[&str]) {
    let out = fracdim(args, dir, &[]);
    assert!(out.status.success(), "{}", stderr(&out));
}

#[test]
fn unknown_flag_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = fracdim(
        &["compute", "x.pbm", "--definitely-not-a-flag"],
        dir.path(),
        &[],
    );
    assert_eq!(out.status.code(), Some(64));
}

#[test]
fn conflicting_normalization_flags_are_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = fracdim(
        &["compute", "x.pbm", "--c", "1.5", "--calibrated"],
        dir.path(),
        &[],
    );
    assert_eq!(out.status.code(), Some(64));
}

#[test]
fn missing_input_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = fracdim(&["compute", "nope.pbm"], dir.path(), &[]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn malformed_file_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.pbm"), b"P9\nnot an image").unwrap();
    let out = fracdim(&["compute", "bad.pbm"], dir.path(), &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("parse error"), "{}", stderr(&out));
}

#[test]
fn blank_image_is_degenerate_with_empty_object_message() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("blank.pbm"),
        b"P1\n4 4\n0 0 0 0\n0 0 0 0\n0 0 0 0\n0 0 0 0\n",
    )
    .unwrap();
    let out = fracdim(
        &["compute", "blank.pbm", "--method", "hfd"],
        dir.path(),
        &[],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("empty object"), "{}", stderr(&out));
}

#[test]
fn generate_writes_expected_triangle() {
    let dir = tempfile::tempdir().unwrap();
    let out = fracdim(
        &[
            "generate",
            "sierpinski-triangle",
            "--order",
            "3",
            "--out",
            "t.pbm",
        ],
        dir.path(),
        &[],
    );
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["schema_version"], 1);
    assert_eq!(json["width"], 8);
    assert_eq!(json["height"], 8);
    assert_eq!(json["object_pixels"], 27);

    let bytes = std::fs::read(dir.path().join("t.pbm")).unwrap();
    assert!(bytes.starts_with(b"P4"));
}

#[test]
fn compute_json_has_documented_shape() {
    let dir = tempfile::tempdir().unwrap();
    generate(
        dir.path(),
        &[
            "generate",
            "sierpinski-triangle",
            "--order",
            "5",
            "--out",
            "t.pbm",
        ],
    );
    let out = fracdim(&["compute", "t.pbm", "--method", "hfd"], dir.path(), &[]);
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["schema_version"], 1);
    assert_eq!(json["method"], "hfd");
    assert!((json["value"].as_f64().unwrap() - 1.585).abs() < 1e-3);
    for key in [
        "value",
        "raw_value",
        "c",
        "slope",
        "intercept",
        "scale_table",
        "preprocessing",
        "seed",
        "flags",
    ] {
        assert!(json.get(key).is_some(), "missing key {key}");
    }
    assert_eq!(json["scale_table"].as_array().unwrap().len(), 6);
}

#[test]
fn compute_csv_format() {
    let dir = tempfile::tempdir().unwrap();
    generate(
        dir.path(),
        &[
            "generate",
            "sierpinski-triangle",
            "--order",
            "4",
            "--out",
            "t.pbm",
        ],
    );
    let out = fracdim(
        &[
            "compute", "t.pbm", "--method", "mhfd", "--mode", "expected", "--format", "csv",
        ],
        dir.path(),
        &[],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "method,value,raw_value,c,slope,intercept,residual_sum_squares,points_used,model,mode,seed,trials,value_stddev,preprocessing,flags"
    );
    let row = lines.next().unwrap();
    assert!(row.starts_with("mhfd,"));
    assert!(lines.next().is_none());
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    generate(
        dir.path(),
        &[
            "generate",
            "sierpinski-triangle",
            "--order",
            "6",
            "--out",
            "t.pbm",
        ],
    );
    let args = [
        "compute", "t.pbm", "--method", "mhfd", "--seed", "7", "--trials", "3",
    ];
    let a = fracdim(&args, dir.path(), &[]);
    let b = fracdim(&args, dir.path(), &[]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn stochastic_output_invariant_to_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    generate(
        dir.path(),
        &[
            "generate",
            "sierpinski-triangle",
            "--order",
            "7",
            "--out",
            "t.pbm",
        ],
    );
    let args = [
        "compute", "t.pbm", "--method", "mhfd", "--seed", "5", "--trials", "4",
    ];
    let single = fracdim(&args, dir.path(), &[("RAYON_NUM_THREADS", "1")]);
    let many = fracdim(&args, dir.path(), &[("RAYON_NUM_THREADS", "8")]);
    assert!(single.status.success());
    assert_eq!(single.stdout, many.stdout);
}

#[test]
fn plot_data_has_exact_header_and_triangle_law() {
    let dir = tempfile::tempdir().unwrap();
    generate(
        dir.path(),
        &[
            "generate",
            "sierpinski-triangle",
            "--order",
            "4",
            "--out",
            "t.pbm",
        ],
    );
    let out = fracdim(&["plot-data", "t.pbm", "--method", "hfd"], dir.path(), &[]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "s,box_size,inv_box_size,count,log_inv_box_size,log_count,weight,model_fit_y"
    );
    // Header plus scales s = 0..=4.
    assert_eq!(lines.len(), 6);
    for (i, expected) in [81.0, 27.0, 9.0, 3.0, 1.0].iter().enumerate() {
        let fields: Vec<&str> = lines[i + 1].split(',').collect();
        assert_eq!(fields[0], i.to_string());
        assert_eq!(fields[3].parse::<f64>().unwrap(), *expected);
        assert!(!fields[7].is_empty(), "fit column empty on row {i}");
    }
}

#[test]
fn plot_data_on_saturated_image_prints_table_and_exits_degenerate() {
    let dir = tempfile::tempdir().unwrap();
    generate(
        dir.path(),
        &[
            "generate",
            "primitive",
            "--kind",
            "filled-rect",
            "--size",
            "8",
            "--out",
            "ones.pbm",
        ],
    );
    let out = fracdim(
        &[
            "plot-data",
            "ones.pbm",
            "--method",
            "mhfd",
            "--mode",
            "expected",
        ],
        dir.path(),
        &[],
    );
    assert_eq!(out.status.code(), Some(2));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    // Header plus scales s = 0..=4; every count zero, fit columns blank.
    assert_eq!(lines.len(), 6);
    for row in &lines[1..] {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields[3], "0");
        assert_eq!(fields[5], "");
        assert_eq!(fields[6], "");
        assert_eq!(fields[7], "");
    }
    assert!(
        stderr(&out).contains("all scales filtered"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn calibrate_then_calibrated_compute_closes_on_target() {
    let dir = tempfile::tempdir().unwrap();
    generate(
        dir.path(),
        &[
            "generate",
            "sierpinski-triangle",
            "--order",
            "7",
            "--out",
            "t7.pbm",
        ],
    );
    let out = fracdim(&["calibrate", "--order", "7"], dir.path(), &[]);
    assert!(out.status.success(), "{}", stderr(&out));
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let c = json["normalization_c"].as_f64().unwrap();
    assert!(c > 0.0);
    assert!(dir.path().join("fracdim.conf").exists());

    let out = fracdim(
        &[
            "compute",
            "t7.pbm",
            "--method",
            "mhfd",
            "--mode",
            "expected",
            "--preprocess",
            "edge",
            "--calibrated",
        ],
        dir.path(),
        &[],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let value = json["value"].as_f64().unwrap();
    let target = 3f64.ln() / 2f64.ln();
    assert!((value - target).abs() < 1e-9, "value {value}");
    assert_eq!(json["c"].as_f64().unwrap(), c);
}

#[test]
fn config_env_var_sets_path() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("alt.conf");
    let out = fracdim(
        &["calibrate", "--order", "6"],
        dir.path(),
        &[("FRACDIM_CONFIG", conf.to_str().unwrap())],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(conf.exists());
    assert!(!dir.path().join("fracdim.conf").exists());
    let text = std::fs::read_to_string(&conf).unwrap();
    assert!(text.starts_with("normalization_c = "), "{text}");
}

#[test]
fn calibrated_without_config_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    generate(
        dir.path(),
        &[
            "generate",
            "sierpinski-triangle",
            "--order",
            "4",
            "--out",
            "t.pbm",
        ],
    );
    let out = fracdim(
        &["compute", "t.pbm", "--method", "mhfd", "--calibrated"],
        dir.path(),
        &[],
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn eval_reports_per_method_separability() {
    let dir = tempfile::tempdir().unwrap();
    generate(
        dir.path(),
        &[
            "generate",
            "sierpinski-triangle",
            "--order",
            "5",
            "--out",
            "a1.pbm",
        ],
    );
    generate(
        dir.path(),
        &[
            "generate",
            "sierpinski-triangle",
            "--order",
            "6",
            "--out",
            "a2.pbm",
        ],
    );
    generate(
        dir.path(),
        &[
            "generate",
            "salt-pepper",
            "--width",
            "64",
            "--height",
            "64",
            "--density",
            "0.4",
            "--seed",
            "1",
            "--out",
            "b1.pbm",
        ],
    );
    generate(
        dir.path(),
        &[
            "generate",
            "salt-pepper",
            "--width",
            "64",
            "--height",
            "64",
            "--density",
            "0.5",
            "--seed",
            "2",
            "--out",
            "b2.pbm",
        ],
    );
    std::fs::write(
        dir.path().join("manifest.json"),
        r#"{"classes": {
            "fractal": [{"path": "a1.pbm"}, {"path": "a2.pbm"}],
            "noise": [{"path": "b1.pbm"}, {"path": "b2.pbm"}]
        }}"#,
    )
    .unwrap();

    let out = fracdim(&["eval", "--manifest", "manifest.json"], dir.path(), &[]);
    assert!(out.status.success(), "{}", stderr(&out));
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["schema_version"], 1);
    for method in ["hfd", "mhfd"] {
        for key in ["intra", "inter", "ratio"] {
            assert!(
                json[method].get(key).is_some(),
                "missing {method}.{key} in {json}"
            );
        }
    }
    assert_eq!(json["images"].as_array().unwrap().len(), 4);

    let out = fracdim(
        &["eval", "--manifest", "manifest.json", "--format", "csv"],
        dir.path(),
        &[],
    );
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("class,path,hfd,mhfd\n"));

    // Single-class manifest is a validation failure.
    std::fs::write(
        dir.path().join("single.json"),
        r#"{"classes": {"only": [{"path": "a1.pbm"}, {"path": "a2.pbm"}]}}"#,
    )
    .unwrap();
    let out = fracdim(&["eval", "--manifest", "single.json"], dir.path(), &[]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn invert_flag_flips_polarity() {
    let dir = tempfile::tempdir().unwrap();
    // A blank page becomes a full page under inversion.
    std::fs::write(dir.path().join("blank.pbm"), b"P1\n8 8\n0 0 0 0 0 0 0 0\n0 0 0 0 0 0 0 0\n0 0 0 0 0 0 0 0\n0 0 0 0 0 0 0 0\n0 0 0 0 0 0 0 0\n0 0 0 0 0 0 0 0\n0 0 0 0 0 0 0 0\n0 0 0 0 0 0 0 0\n").unwrap();
    let out = fracdim(
        &["compute", "blank.pbm", "--method", "hfd", "--invert"],
        dir.path(),
        &[],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!((json["value"].as_f64().unwrap() - 2.0).abs() < 1e-9);
}

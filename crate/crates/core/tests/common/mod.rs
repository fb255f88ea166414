//! Helpers shared by the CLI tests and the acceptance harness.
#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use laglead::cli::run;
use laglead::model::{eval_compensator, gain_phase, Compensator};
use serde_json::json;
use tempfile::TempDir;

pub fn golden(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name);
    fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn exec(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(
        std::iter::once("laglead").chain(args.iter().copied()),
        &mut out,
        &mut err,
    );
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

pub fn comp(num: &[f64], den: &[f64]) -> Compensator {
    Compensator::from_coeffs(num, den).unwrap()
}

pub fn requirement(c: &Compensator, omega: f64) -> serde_json::Value {
    let (g, p) = gain_phase(eval_compensator(c, omega).unwrap()).unwrap();
    json!({ "omega": omega, "gain": g, "phase_rad": p })
}

pub fn write_spec(dir: &TempDir, name: &str, spec: serde_json::Value) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, serde_json::to_string_pretty(&spec).unwrap()).unwrap();
    path
}

/// Every spec file used by the exit-code table, keyed by case name.
pub fn spec_files(dir: &TempDir) -> Vec<(&'static str, PathBuf)> {
    let c = comp(&[3.0, 2.0], &[7.0, 12.0]);
    let other = comp(&[1.0, 5.0], &[4.0, 3.0]);
    // Right-half-plane pole: (s + 1)(s + 2) / ((s - 1)(s + 3)).
    let unstable = comp(&[3.0, 2.0], &[2.0, -3.0]);
    vec![
        (
            "design_unique_stable",
            write_spec(
                dir,
                "unique.json",
                json!({
                    "requirements": [requirement(&c, 1.0), requirement(&c, 2.0)]
                }),
            ),
        ),
        (
            "design_unique_unstable",
            write_spec(
                dir,
                "unstable.json",
                json!({
                    "requirements": [requirement(&unstable, 0.5), requirement(&unstable, 3.0)]
                }),
            ),
        ),
        (
            "design_identity_order_1",
            write_spec(
                dir,
                "identity.json",
                json!({
                    "order": 1,
                    "requirements": [{ "omega": 1.0, "gain": 1.0, "phase_deg": 0.0 }]
                }),
            ),
        ),
        (
            "design_overdetermined",
            write_spec(
                dir,
                "over.json",
                json!({
                    "order": 2,
                    "requirements": [
                        requirement(&c, 1.0),
                        requirement(&c, 2.0),
                        requirement(&other, 3.0)
                    ]
                }),
            ),
        ),
        (
            "design_underdetermined",
            write_spec(
                dir,
                "under.json",
                json!({
                    "order": 2,
                    "requirements": [requirement(&c, 1.0)]
                }),
            ),
        ),
        (
            "design_bad_field",
            write_spec(
                dir,
                "bad.json",
                json!({
                    "requirements": [{ "omega": 1.0, "gain": 1.0, "phase": 0.0 }]
                }),
            ),
        ),
        (
            "design_two_gains",
            write_spec(
                dir,
                "two_gains.json",
                json!({
                    "requirements": [{ "omega": 1.0, "gain": 1.0, "gain_db": 0.0, "phase_deg": 0.0 }]
                }),
            ),
        ),
    ]
}

pub fn exit_code_table() -> String {
    let dir = TempDir::new().unwrap();
    let specs = spec_files(&dir);
    let spec = |name: &str| {
        specs
            .iter()
            .find(|(n, _)| *n == name)
            .unwrap()
            .1
            .to_str()
            .unwrap()
            .to_string()
    };
    let missing = dir.path().join("missing.json");
    let cases: Vec<(&str, Vec<String>)> = vec![
        (
            "design_unique_stable",
            vec!["design".into(), spec("design_unique_stable")],
        ),
        (
            "design_unique_unstable",
            vec!["design".into(), spec("design_unique_unstable")],
        ),
        (
            "design_identity_order_1",
            vec!["design".into(), spec("design_identity_order_1")],
        ),
        (
            "design_overdetermined",
            vec!["design".into(), spec("design_overdetermined")],
        ),
        (
            "design_underdetermined",
            vec!["design".into(), spec("design_underdetermined")],
        ),
        (
            "design_bad_field",
            vec!["design".into(), spec("design_bad_field")],
        ),
        (
            "design_two_gains",
            vec!["design".into(), spec("design_two_gains")],
        ),
        (
            "design_missing_file",
            vec!["design".into(), missing.to_str().unwrap().into()],
        ),
        (
            "factor_real",
            "factor --num 3 2 --den 7 12"
                .split(' ')
                .map(String::from)
                .collect(),
        ),
        (
            "factor_complex",
            "factor --num 2 5 --den 3 2"
                .split(' ')
                .map(String::from)
                .collect(),
        ),
        (
            "factor_unity",
            "factor --num 5 --den 5"
                .split(' ')
                .map(String::from)
                .collect(),
        ),
        (
            "factor_length_mismatch",
            "factor --num 1 2 --den 3"
                .split(' ')
                .map(String::from)
                .collect(),
        ),
        (
            "bode_identity",
            "bode --num 5 --den 5 --points 3"
                .split(' ')
                .map(String::from)
                .collect(),
        ),
        (
            "bode_bad_range",
            "bode --num 1 --den 2 --omega-min 10 --omega-max 1"
                .split(' ')
                .map(String::from)
                .collect(),
        ),
        (
            "verify_true",
            vec![
                "verify".into(),
                spec("design_unique_stable"),
                "--num".into(),
                "3".into(),
                "2".into(),
                "--den".into(),
                "7".into(),
                "12".into(),
            ],
        ),
        (
            "verify_wrong",
            vec![
                "verify".into(),
                spec("design_unique_stable"),
                "--num".into(),
                "3".into(),
                "2".into(),
                "--den".into(),
                "7".into(),
                "13".into(),
            ],
        ),
        ("unknown_subcommand", vec!["plot".into()]),
    ];
    let mut table = String::new();
    for (name, args) in cases {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let (code, _, _) = exec(&args);
        table.push_str(&format!("{name} {code}\n"));
    }
    table
}

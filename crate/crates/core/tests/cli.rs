//! End-to-end tests of the `fracbm` binary: flag surface, file formats,
//! exit codes, and byte determinism.

use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracbm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

fn parse_csv(text: &str) -> Vec<(f64, f64)> {
    text.lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let mut f = l.split(',');
            (
                f.next().unwrap().parse().unwrap(),
                f.next().unwrap().parse().unwrap(),
            )
        })
        .collect()
}

fn json(text: &str) -> serde_json::Value {
    serde_json::from_str(text).unwrap()
}

#[test]
fn simulate_writes_the_documented_format() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let res = run(&[
        "simulate",
        "--model",
        "fbm",
        "--hurst",
        "0.5",
        "--n",
        "4",
        "--horizon",
        "1",
        "--seed",
        "7",
        "--paths",
        "1",
        "--out",
        out,
    ]);
    assert_eq!(
        code(&res),
        0,
        "stderr: {}",
        String::from_utf8_lossy(&res.stderr)
    );
    let summary = stdout(&res);
    assert_eq!(
        summary.lines().count(),
        1,
        "one-line summary, got {summary:?}"
    );

    let rows = parse_csv(&read(&dir.path().join("path_0000.csv")));
    assert_eq!(rows.len(), 5);
    for (i, (t, _)) in rows.iter().enumerate() {
        assert_eq!(*t, i as f64 * 0.25);
    }
    assert_eq!(rows[0].1, 0.0);

    let report = json(&read(&dir.path().join("report.json")));
    assert_eq!(report["command"], "simulate");
    assert_eq!(report["params"]["seed"], 7);
    assert_eq!(report["params"]["hurst"], 0.5);
    assert_eq!(report["results"]["files"][0], "path_0000.csv");
    assert!(report["version"].is_string());
}

#[test]
fn simulate_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let args = [
        "simulate",
        "--model",
        "fou",
        "--rho",
        "0.5",
        "--hurst",
        "0.3",
        "--n",
        "64",
        "--horizon",
        "2",
        "--seed",
        "42",
        "--paths",
        "2",
        "--out",
        out,
    ];
    assert_eq!(code(&run(&args)), 0);
    let first_path = std::fs::read(dir.path().join("path_0001.csv")).unwrap();
    let first_report = std::fs::read(dir.path().join("report.json")).unwrap();
    assert_eq!(code(&run(&args)), 0);
    assert_eq!(
        std::fs::read(dir.path().join("path_0001.csv")).unwrap(),
        first_path
    );
    assert_eq!(
        std::fs::read(dir.path().join("report.json")).unwrap(),
        first_report
    );
}

#[test]
fn fou_at_zero_reversion_is_fbm_plus_offset() {
    let fbm_dir = tempfile::tempdir().unwrap();
    let fou_dir = tempfile::tempdir().unwrap();
    let common = [
        "--hurst",
        "0.7",
        "--n",
        "32",
        "--horizon",
        "1",
        "--seed",
        "9",
        "--paths",
        "1",
    ];
    let mut fbm_args = vec!["simulate", "--model", "fbm"];
    fbm_args.extend_from_slice(&common);
    fbm_args.extend_from_slice(&["--out", fbm_dir.path().to_str().unwrap()]);
    let mut fou_args = vec!["simulate", "--model", "fou", "--rho", "0", "--x0", "2.5"];
    fou_args.extend_from_slice(&common);
    fou_args.extend_from_slice(&["--out", fou_dir.path().to_str().unwrap()]);
    assert_eq!(code(&run(&fbm_args)), 0);
    assert_eq!(code(&run(&fou_args)), 0);
    let w = parse_csv(&read(&fbm_dir.path().join("path_0000.csv")));
    let x = parse_csv(&read(&fou_dir.path().join("path_0000.csv")));
    for ((_, wi), (_, xi)) in w.iter().zip(&x) {
        assert!((wi + 2.5 - xi).abs() < 1e-12);
    }
}

#[test]
fn transform_is_the_identity_at_half() {
    let sim = tempfile::tempdir().unwrap();
    let tr = tempfile::tempdir().unwrap();
    assert_eq!(
        code(&run(&[
            "simulate",
            "--model",
            "fbm",
            "--hurst",
            "0.5",
            "--n",
            "64",
            "--horizon",
            "1",
            "--seed",
            "3",
            "--paths",
            "1",
            "--out",
            sim.path().to_str().unwrap(),
        ])),
        0
    );
    let input = sim.path().join("path_0000.csv");
    assert_eq!(
        code(&run(&[
            "transform",
            "--in",
            input.to_str().unwrap(),
            "--hurst",
            "0.5",
            "--emit",
            "Y,M,B,recon",
            "--out",
            tr.path().to_str().unwrap(),
        ])),
        0
    );
    let w = parse_csv(&read(&input));
    for name in ["y.csv", "m.csv", "b.csv", "recon.csv"] {
        let other = parse_csv(&read(&tr.path().join(name)));
        for ((_, a), (_, b)) in w.iter().zip(&other) {
            assert!((a - b).abs() < 1e-12, "{name} deviates at H = 1/2");
        }
    }
    let report = json(&read(&tr.path().join("report.json")));
    assert!(report["results"]["roundTripL2RelError"].as_f64().unwrap() < 1e-10);
}

#[test]
fn transform_report_carries_the_qv_and_round_trip_gates() {
    let sim = tempfile::tempdir().unwrap();
    let tr = tempfile::tempdir().unwrap();
    assert_eq!(
        code(&run(&[
            "simulate",
            "--model",
            "fbm",
            "--hurst",
            "0.3",
            "--n",
            "1024",
            "--horizon",
            "1",
            "--seed",
            "11",
            "--paths",
            "1",
            "--out",
            sim.path().to_str().unwrap(),
        ])),
        0
    );
    let input = sim.path().join("path_0000.csv");
    assert_eq!(
        code(&run(&[
            "transform",
            "--in",
            input.to_str().unwrap(),
            "--hurst",
            "0.3",
            "--emit",
            "recon",
            "--out",
            tr.path().to_str().unwrap(),
        ])),
        0
    );
    let report = json(&read(&tr.path().join("report.json")));
    let results = &report["results"];
    let qv = results["qvRealized"].as_f64().unwrap();
    let qv_theory = results["qvTheoretical"].as_f64().unwrap();
    let qv_rel = results["qvRelError"].as_f64().unwrap();
    assert!(qv > 0.0 && qv_theory > 0.0);
    assert!((qv / qv_theory - 1.0).abs() - qv_rel < 1e-15);
    // Single-path concentration at this seed; the values are deterministic.
    assert!(qv_rel < 0.15, "qv rel error {qv_rel}");
    assert!(results["roundTripL2RelError"].as_f64().unwrap() < 0.05);
    // M was not emitted but its QV is still reported.
    assert!(!tr.path().join("m.csv").exists());
}

#[test]
fn density_zero_drift_is_exactly_zero_and_deterministic() {
    let sim = tempfile::tempdir().unwrap();
    assert_eq!(
        code(&run(&[
            "simulate",
            "--model",
            "fbm",
            "--hurst",
            "0.3",
            "--n",
            "128",
            "--horizon",
            "1",
            "--seed",
            "3",
            "--paths",
            "1",
            "--out",
            sim.path().to_str().unwrap(),
        ])),
        0
    );
    let input = sim.path().join("path_0000.csv");
    let args = [
        "density",
        "--in",
        input.to_str().unwrap(),
        "--hurst",
        "0.3",
        "--drift",
        "zero",
    ];
    let first = run(&args);
    assert_eq!(code(&first), 0);
    let report = json(&stdout(&first));
    assert_eq!(report["results"]["logDensity"], 0.0);
    assert_eq!(report["results"]["itoSum"], 0.0);
    assert_eq!(report["results"]["singularFlag"], false);
    let second = run(&args);
    assert_eq!(
        first.stdout, second.stdout,
        "identical invocations must print identical JSON"
    );
}

#[test]
fn density_favors_the_generating_model_in_the_majority_of_seeds() {
    let mut positive = 0;
    for seed in 1..=10u32 {
        let sim = tempfile::tempdir().unwrap();
        assert_eq!(
            code(&run(&[
                "simulate",
                "--model",
                "fou",
                "--rho",
                "0.8",
                "--mean",
                "0",
                "--x0",
                "1",
                "--hurst",
                "0.5",
                "--n",
                "256",
                "--horizon",
                "5",
                "--seed",
                &seed.to_string(),
                "--paths",
                "1",
                "--out",
                sim.path().to_str().unwrap(),
            ])),
            0
        );
        let input = sim.path().join("path_0000.csv");
        let res = run(&[
            "density",
            "--in",
            input.to_str().unwrap(),
            "--hurst",
            "0.5",
            "--drift",
            "fou:0.8,0",
            "--x0",
            "1",
        ]);
        assert_eq!(code(&res), 0);
        let report = json(&stdout(&res));
        if report["results"]["logDensity"].as_f64().unwrap() > 0.0 {
            positive += 1;
        }
    }
    assert!(
        positive >= 6,
        "only {positive}/10 seeds favored the true model"
    );
}

#[test]
fn mle_exits_five_on_a_constant_path() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("const.csv");
    let mut text = String::from("t,value\n");
    for i in 0..=16 {
        text.push_str(&format!("{},3\n", i as f64 / 16.0));
    }
    std::fs::write(&input, text).unwrap();
    let res = run(&[
        "mle",
        "--in",
        input.to_str().unwrap(),
        "--hurst",
        "0.5",
        "--mean",
        "3",
        "--x0",
        "3",
    ]);
    assert_eq!(code(&res), 5);
    assert!(
        String::from_utf8_lossy(&res.stderr).contains("degenerate"),
        "stderr names the degenerate input"
    );
}

#[test]
fn mle_recovers_the_reversion_speed_from_one_long_path() {
    let sim = tempfile::tempdir().unwrap();
    assert_eq!(
        code(&run(&[
            "simulate",
            "--model",
            "fou",
            "--rho",
            "1",
            "--mean",
            "0",
            "--x0",
            "1",
            "--hurst",
            "0.5",
            "--n",
            "2048",
            "--horizon",
            "10",
            "--seed",
            "5",
            "--paths",
            "1",
            "--out",
            sim.path().to_str().unwrap(),
        ])),
        0
    );
    let input = sim.path().join("path_0000.csv");
    let out = sim.path().join("mle.json");
    let res = run(&[
        "mle",
        "--in",
        input.to_str().unwrap(),
        "--hurst",
        "0.5",
        "--mean",
        "0",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&res), 0);
    assert_eq!(
        stdout(&res).lines().count(),
        1,
        "file output leaves a one-line summary"
    );
    let report = json(&read(&out));
    let rho_hat = report["results"]["rhoHat"].as_f64().unwrap();
    assert!((rho_hat - 1.0).abs() < 0.5, "rhoHat {rho_hat}");
    assert!(report["results"]["information"].as_f64().unwrap() > 0.0);
    // x0 was defaulted from the path and echoed back.
    assert_eq!(report["params"]["x0"], 1.0);
}

#[test]
fn verify_constants_passes_and_writes_its_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("verify.json");
    let res = run(&[
        "verify",
        "--suite",
        "constants",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&res), 0);
    let text = stdout(&res);
    assert!(text.contains("PASS constants/degeneracy-at-half"));
    assert!(text.lines().last().unwrap().contains("3/3 checks passed"));
    let report = json(&read(&out));
    assert_eq!(report["results"]["passed"], 3);
    assert_eq!(report["results"]["failed"], 0);
    assert_eq!(report["results"]["checks"].as_array().unwrap().len(), 3);
}

#[test]
fn verify_fraccalc_fast_exits_zero() {
    let res = run(&["verify", "--suite", "fraccalc", "--seed", "7", "--fast"]);
    assert_eq!(code(&res), 0, "stdout: {}", stdout(&res));
    assert!(stdout(&res).contains("4/4 checks passed"));
}

#[test]
fn usage_errors_exit_two() {
    let cases: &[&[&str]] = &[
        // Hurst outside the CLI range.
        &[
            "simulate",
            "--model",
            "fbm",
            "--hurst",
            "1.2",
            "--n",
            "4",
            "--horizon",
            "1",
            "--seed",
            "1",
            "--out",
            "/tmp/x",
        ],
        // fBm with an Ornstein-Uhlenbeck flag.
        &[
            "simulate",
            "--model",
            "fbm",
            "--rho",
            "1",
            "--hurst",
            "0.5",
            "--n",
            "4",
            "--horizon",
            "1",
            "--seed",
            "1",
            "--out",
            "/tmp/x",
        ],
        // fOU without --rho.
        &[
            "simulate",
            "--model",
            "fou",
            "--hurst",
            "0.5",
            "--n",
            "4",
            "--horizon",
            "1",
            "--seed",
            "1",
            "--out",
            "/tmp/x",
        ],
        // Unknown model.
        &[
            "simulate",
            "--model",
            "brownian",
            "--hurst",
            "0.5",
            "--n",
            "4",
            "--horizon",
            "1",
            "--seed",
            "1",
            "--out",
            "/tmp/x",
        ],
        // Zero cells.
        &[
            "simulate",
            "--model",
            "fbm",
            "--hurst",
            "0.5",
            "--n",
            "0",
            "--horizon",
            "1",
            "--seed",
            "1",
            "--out",
            "/tmp/x",
        ],
        // Malformed drift spec.
        &[
            "density",
            "--in",
            "/tmp/x.csv",
            "--hurst",
            "0.5",
            "--drift",
            "fou:1",
        ],
        // Unknown emit token.
        &[
            "transform",
            "--in",
            "/tmp/x.csv",
            "--hurst",
            "0.5",
            "--emit",
            "Y,W",
            "--out",
            "/tmp/x",
        ],
        // Unknown suite.
        &["verify", "--suite", "everything"],
        // Missing required flag.
        &[
            "simulate",
            "--model",
            "fbm",
            "--hurst",
            "0.5",
            "--n",
            "4",
            "--horizon",
            "1",
            "--out",
            "/tmp/x",
        ],
    ];
    for args in cases {
        let res = run(args);
        assert_eq!(code(&res), 2, "args {args:?} should be a usage error");
    }
}

#[test]
fn malformed_path_files_exit_four() {
    let dir = tempfile::tempdir().unwrap();
    let cases: &[(&str, &str)] = &[
        ("bad_header.csv", "time,value\n0,0\n1,1\n"),
        ("bad_start.csv", "t,value\n0.5,0\n1,1\n"),
        ("bad_spacing.csv", "t,value\n0,0\n0.6,1\n1,2\n"),
        ("bad_field.csv", "t,value\n0,0\n0.5,abc\n1,2\n"),
    ];
    for (name, text) in cases {
        let input = dir.path().join(name);
        std::fs::write(&input, text).unwrap();
        for cmd in [
            vec![
                "transform",
                "--in",
                input.to_str().unwrap(),
                "--hurst",
                "0.5",
                "--out",
                "/tmp/x",
            ],
            vec![
                "density",
                "--in",
                input.to_str().unwrap(),
                "--hurst",
                "0.5",
                "--drift",
                "zero",
            ],
            vec![
                "mle",
                "--in",
                input.to_str().unwrap(),
                "--hurst",
                "0.5",
                "--mean",
                "0",
            ],
        ] {
            let res = run(&cmd);
            assert_eq!(code(&res), 4, "{name} under {:?} should exit 4", cmd[0]);
        }
    }
}

#[test]
fn help_exits_zero() {
    let res = run(&["--help"]);
    assert_eq!(code(&res), 0);
    assert!(stdout(&res).contains("simulate"));
}

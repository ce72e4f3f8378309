use std::collections::HashMap;
use std::process::Command;

use pauli_qfi::correlations::{discord_protocol, is_separable_ppt, rho_final_two_qubit, PPT_TOL};
use pauli_qfi::protocol::{evaluate, gain, ProtocolPoint};
use pauli_qfi_cli::{run, CSV_HEADER};

fn run_capture(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("pauli-qfi").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn fields(line: &str) -> HashMap<String, String> {
    line.split_whitespace()
        .filter_map(|kv| kv.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

fn parse_csv(text: &str) -> Vec<HashMap<String, String>> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    lines
        .map(|l| {
            header
                .iter()
                .map(|h| h.to_string())
                .zip(l.split(',').map(String::from))
                .collect()
        })
        .collect()
}

fn num(row: &HashMap<String, String>, key: &str) -> Option<f64> {
    let v = &row[key];
    (!v.is_empty()).then(|| v.parse().unwrap())
}

#[test]
fn binary_qfi_reports_two_qubit_minimum_gain() {
    let out = Command::new(env!("CARGO_BIN_EXE_pauli-qfi"))
        .args([
            "qfi", "--n", "2", "--m", "1", "--r", "0.5", "--lambda", "0.5",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let f = fields(std::str::from_utf8(&out.stdout).unwrap());
    let g: f64 = f["gain"].parse().unwrap();
    assert!((g - 1.6).abs() < 1e-12);
    for key in ["H_ind", "H_corr", "bound"] {
        assert!(f.contains_key(key), "missing {key}");
    }
}

#[test]
fn binary_rejects_out_of_range_lambda() {
    let out = Command::new(env!("CARGO_BIN_EXE_pauli-qfi"))
        .args(["qfi", "--r", "0.5", "--lambda", "1.5"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("lambda") && err.contains("<= 1"), "{err}");
}

#[test]
fn qfi_output_matches_library() {
    let (code, out, _) = run_capture(&[
        "qfi", "--n", "3", "--m", "2", "--r", "0.3", "--lambda", "0.2",
    ]);
    assert_eq!(code, 0);
    let f = fields(&out);
    let eval = evaluate(&ProtocolPoint::new(3, 2, 0.3, 0.2).unwrap()).unwrap();
    let close = |k: &str, v: f64| {
        let parsed: f64 = f[k].parse().unwrap();
        assert!(
            (parsed - v).abs() <= 1e-11 * v.abs(),
            "{k}: {parsed} vs {v}"
        );
    };
    close("H_ind", eval.h_ind);
    close("H_corr", eval.h_corr);
    close("gain", eval.gain.unwrap());
    close("bound", eval.bound.unwrap());
}

#[test]
fn qfi_domain_errors() {
    assert_eq!(
        run_capture(&["qfi", "--n", "2", "--m", "3", "--r", "0.5", "--lambda", "0.2"]).0,
        2
    );
    assert_eq!(run_capture(&["qfi", "--r", "1.0", "--lambda", "0.2"]).0, 2);
    let (code, out, _) = run_capture(&["qfi", "--r", "0", "--lambda", "0.2"]);
    assert_eq!(code, 0);
    assert_eq!(fields(&out)["gain"], "undefined");
    assert_eq!(run_capture(&["bogus"]).0, 2);
}

#[test]
fn default_sweep_round_trips() {
    let (code, out, _) = run_capture(&["sweep"]);
    assert_eq!(code, 0);
    assert!(!out.contains('\r'));
    assert_eq!(out.lines().next(), Some(CSV_HEADER));
    let rows = parse_csv(&out);
    assert_eq!(rows.len(), 91 * 51);

    let mut prev = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for row in &rows {
        let (n, m) = (
            row["n"].parse::<usize>().unwrap(),
            row["m"].parse::<usize>().unwrap(),
        );
        assert_eq!((n, m), (2, 1));
        let (r, l) = (num(row, "r").unwrap(), num(row, "lambda").unwrap());
        assert!((l, r) > prev, "ordering at lambda={l} r={r}");
        prev = (l, r);

        if let (Some(hc), Some(hi), Some(g)) =
            (num(row, "H_corr"), num(row, "H_ind"), num(row, "gain"))
        {
            assert!(
                (hc / hi - g).abs() <= 1e-9 * g,
                "gain column at lambda={l} r={r}"
            );
            assert!(g > 1.0, "single-use two-qubit gain exceeds one");
        }
        if r > 0.0 && r < 1.0 {
            let p = ProtocolPoint::new(2, 1, r, l).unwrap();
            let eval = evaluate(&p).unwrap();
            assert!((num(row, "H_corr").unwrap() - eval.h_corr).abs() <= 1e-9 * eval.h_corr);
            assert!(
                (num(row, "gain").unwrap() - gain(&p).unwrap()).abs() <= 1e-9 * eval.gain.unwrap()
            );
            let q = discord_protocol(r, l, 1).unwrap().q;
            assert!((num(row, "discord").unwrap() - q).abs() <= 1e-9 * q.abs() + 1e-15);
            let ppt = is_separable_ppt(&rho_final_two_qubit(r, l, 1).unwrap(), PPT_TOL).unwrap();
            let e = ppt.min_eigenvalue;
            assert!((num(row, "min_pt_eig").unwrap() - e).abs() <= 1e-9 * e.abs() + 1e-15);
            assert_eq!(row["separable"], ppt.separable.to_string());
        }
        if r == 0.0 {
            assert!(row["gain"].is_empty());
        }
        if r == 1.0 {
            assert!(
                row["H_corr"].is_empty() && row["gain"].is_empty() && row["separable"].is_empty()
            );
        }
    }
}

#[test]
fn two_use_sweep_has_gain_on_both_sides_of_one() {
    let (code, out, _) = run_capture(&["sweep", "--n", "2", "--m", "2"]);
    assert_eq!(code, 0);
    let gains: Vec<f64> = parse_csv(&out)
        .iter()
        .filter_map(|r| num(r, "gain"))
        .collect();
    assert!(gains.iter().any(|&g| g > 1.0));
    assert!(gains.iter().any(|&g| g < 1.0));
}

#[test]
fn larger_registers_leave_two_qubit_columns_empty() {
    let (code, out, _) = run_capture(&[
        "sweep",
        "--n",
        "4",
        "--m",
        "3",
        "--lambda-min",
        "0.0005",
        "--lambda-max",
        "0.9995",
        "--lambda-step",
        "0.111",
        "--r-step",
        "0.25",
    ]);
    assert_eq!(code, 0);
    let rows = parse_csv(&out);
    assert_eq!(rows.len(), 10 * 5);
    for row in &rows {
        assert!(
            row["discord"].is_empty()
                && row["min_pt_eig"].is_empty()
                && row["separable"].is_empty()
        );
    }
}

#[test]
fn degenerate_range_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.csv");
    let (code, _, _) = run_capture(&[
        "sweep",
        "--lambda-min",
        "0.6",
        "--lambda-max",
        "0.5",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert_eq!(
        std::fs::read_to_string(&path).unwrap(),
        format!("{CSV_HEADER}\n")
    );
}

#[test]
fn unwritable_output_is_an_io_failure() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing").join("x.csv");
    let (code, _, err) =
        run_capture(&["sweep", "--r-step", "0.5", "--out", path.to_str().unwrap()]);
    assert_eq!(code, 1, "{err}");
    assert_eq!(run_capture(&["sweep", "--r-step", "0"]).0, 2);
}

#[test]
fn verify_suites() {
    let (code, out, _) = run_capture(&["verify", "--suite", "stationary"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("PASS stationary"), "{out}");
    let inner = out.split('[').nth(1).unwrap().split(']').next().unwrap();
    let roots: Vec<f64> = inner.split(", ").map(|x| x.parse().unwrap()).collect();
    assert_eq!(roots.len(), 4);
    for (root, expected) in roots.iter().zip([0.66, 0.83, 0.48, 0.76]) {
        assert!((root - expected).abs() <= 0.005, "{root} vs {expected}");
    }
    let (code, out, _) = run_capture(&["verify", "--suite", "oracle", "--n-max", "5"]);
    assert_eq!(code, 0, "{out}");
    assert_eq!(run_capture(&["verify", "--suite", "nope"]).0, 2);
}

#[test]
fn full_verify_passes() {
    let (code, out, _) = run_capture(&["verify"]);
    assert_eq!(code, 0, "{out}");
    assert_eq!(out.lines().count(), 9);
    assert!(out.lines().all(|l| l.starts_with("PASS ")));
}

#[test]
fn mc_files_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = |p: &std::path::Path| {
        vec![
            "mc", "--r", "0.7", "--lambda", "0.2", "--shots", "2000", "--trials", "30", "--seed",
            "11", "--out",
        ]
        .into_iter()
        .map(String::from)
        .chain([p.to_str().unwrap().to_string()])
        .collect::<Vec<_>>()
    };
    let (ca, sa, _) = run_capture(&args(&a).iter().map(String::as_str).collect::<Vec<_>>());
    let (cb, sb, _) = run_capture(&args(&b).iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!((ca, cb), (0, 0));
    assert_eq!(sa, sb);
    let fa = std::fs::read(&a).unwrap();
    assert_eq!(fa, std::fs::read(&b).unwrap());
    assert_eq!(String::from_utf8(fa).unwrap().lines().count(), 31);
}

#[test]
fn mc_symmetric_point_mean() {
    let (code, csv, summary) = run_capture(&[
        "mc", "--r", "0.6", "--lambda", "0.5", "--shots", "10000", "--trials", "50",
    ]);
    assert_eq!(code, 0);
    assert!(csv.starts_with("trial,lambda_hat\n"));
    let f = fields(&summary);
    let mean: f64 = f["mean"].parse().unwrap();
    let crb: f64 = f["crb"].parse().unwrap();
    assert!((mean - 0.5).abs() < 4.0 * (crb / 50.0).sqrt());
}

#[test]
fn mc_variance_matches_cramer_rao() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mc.csv");
    let (code, summary, _) = run_capture(&[
        "mc",
        "--r",
        "0.8",
        "--lambda",
        "0.3",
        "--shots",
        "100000",
        "--trials",
        "200",
        "--seed",
        "7",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let ratio: f64 = fields(&summary)["ratio"].parse().unwrap();
    println!("variance / CRB = {ratio}");
    assert!((0.9..=1.1).contains(&ratio), "{ratio}");
}

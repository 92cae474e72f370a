use std::path::{Path, PathBuf};
use std::process::Command as Process;

use locopath::sim::{gen_dataset, Covariance, SimDesign};
use locopath::{BootstrapConfig, Dataset, Exponent, Hypothesis, NormSpec, ScreeningRule};
use locopath_cli::{
    execute, importance, ingest_csv, main_with_args, parse_args, parse_hypothesis, screening, test, write_csv, Command,
    CliError, Format, PermConfig,
};

fn sample(n: usize, p: usize, seed: u64) -> Dataset {
    let d = SimDesign::leading(n, p, 3, 1.0, Covariance::Identity, 1, seed);
    gen_dataset(&d, 0).unwrap()
}

fn sample_file(dir: &Path, n: usize, p: usize, seed: u64) -> PathBuf {
    let path = dir.join(format!("data_{n}_{p}_{seed}.csv"));
    write_csv(&sample(n, p, seed), "y", &path).unwrap();
    path
}

fn args(list: &[&str]) -> Vec<String> {
    std::iter::once("locopath").chain(list.iter().copied()).map(String::from).collect()
}

#[test]
fn test_command_parses_to_a_single_coefficient_config() {
    let cfg = parse_args(args(&[
        "test", "--null", "1=0", "--s", "1", "--t", "1", "--B", "500", "--alpha", "0.05", "--seed", "7", "data.csv",
        "--response", "y",
    ]))
    .unwrap();
    match cfg.command {
        Command::Test { data, spec, boot, hypothesis } => {
            assert_eq!(data.input, PathBuf::from("data.csv"));
            assert_eq!(data.response, "y");
            assert_eq!(spec, NormSpec::L11);
            assert_eq!((boot.b, boot.alpha, boot.seed), (500, 0.05, 7));
            assert_eq!(hypothesis, Hypothesis::single_zero(0));
        }
        other => panic!("unexpected {other:?}"),
    }
    assert_eq!(cfg.format, Format::Json);
}

#[test]
fn simultaneous_hypothesis_syntax() {
    let h = parse_hypothesis("1=1,11=0,12=0").unwrap();
    assert_eq!(h.constrained(), &[0, 10, 11]);
    assert_eq!(h.values(), &[1.0, 0.0, 0.0]);
    for bad in ["", "1", "0=1", "a=1", "1=b", "1=0,1=2", "1=inf"] {
        assert!(matches!(parse_hypothesis(bad), Err(CliError::Usage(_))), "{bad:?}");
    }
}

#[test]
fn usage_errors_exit_with_two() {
    let cases: [&[&str]; 6] = [
        &["screen", "--s", "3", "x.csv"],
        &["test", "--null", "1=0"],
        &["importance", "x.csv", "--bogus"],
        &["test", "--null", "1=", "x.csv"],
        &["screen", "x.csv", "--topk", "0"],
        &["test", "--null", "1=0", "x.csv", "--alpha", "1.5"],
    ];
    for case in cases {
        let err = parse_args(args(case)).unwrap_err();
        assert_eq!(err.exit_code(), 2, "{case:?}");
        assert_eq!(main_with_args(args(case)), 2);
    }
    let cfg = parse_args(args(&["screen", "x.csv", "--s", "inf", "--t", "2"])).unwrap();
    match cfg.command {
        Command::Screen { spec, rule, .. } => {
            assert_eq!(spec, NormSpec::new(Exponent::Inf, Exponent::Two));
            assert_eq!(rule, ScreeningRule::Threshold(0.0));
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn data_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.csv");
    assert_eq!(main_with_args(args(&["screen", missing.to_str().unwrap()])), 1);
    let file = sample_file(dir.path(), 20, 4, 1);
    assert_eq!(main_with_args(args(&["test", "--null", "9=0", file.to_str().unwrap(), "--B", "5"])), 1);
    assert_eq!(main_with_args(args(&["screen", file.to_str().unwrap(), "--response", "z"])), 1);
}

#[test]
fn csv_ingestion() {
    let dir = tempfile::tempdir().unwrap();
    let three = dir.path().join("three.csv");
    std::fs::write(&three, "a,y,b\n1,2,3\n4,5,6\n7,8,9.5\n").unwrap();
    let d = ingest_csv(&three, "y").unwrap();
    assert_eq!(d.p(), 2);
    assert_eq!(d.names(), &["a".to_string(), "b".to_string()]);
    assert_eq!(d.x().row(2).to_vec(), vec![7.0, 9.5]);
    assert_eq!(d.y().to_vec(), vec![2.0, 5.0, 8.0]);

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "a,b,y\n1,2,3\n1,2,3\n1,2,3\n1,2,3\n1,oops,3\n").unwrap();
    let msg = ingest_csv(&bad, "y").unwrap_err().to_string();
    assert!(msg.contains("row 5"), "{msg}");

    let one = dir.path().join("one.csv");
    std::fs::write(&one, "a,y\n1,2\n").unwrap();
    assert!(ingest_csv(&one, "y").is_err());
    assert!(ingest_csv(&three, "missing").is_err());
}

#[test]
fn csv_round_trip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let data = sample(30, 7, 3);
    let path = dir.path().join("rt.csv");
    write_csv(&data, "y", &path).unwrap();
    let back = ingest_csv(&path, "y").unwrap();
    assert_eq!(back, data);
}

#[test]
fn screen_keeps_k() {
    let dir = tempfile::tempdir().unwrap();
    let file = sample_file(dir.path(), 60, 80, 4);
    let cfg = parse_args(args(&["screen", "--topk", "59", "--s", "1", "--t", "1", file.to_str().unwrap()])).unwrap();
    let out: serde_json::Value = serde_json::from_str(&execute(&cfg).unwrap()).unwrap();
    assert_eq!(out["kept_count"], 59);
    assert_eq!(out["kept"].as_array().unwrap().len(), 59);
}

#[test]
fn outputs_equal_direct_library_calls() {
    let dir = tempfile::tempdir().unwrap();
    let file = sample_file(dir.path(), 40, 10, 5);
    let f = file.to_str().unwrap();
    let data = ingest_csv(&file, "y").unwrap();
    let boot = BootstrapConfig { b: 30, seed: 11, store_replicates: false, ..BootstrapConfig::default() };

    let cfg = parse_args(args(&["importance", f, "--B", "30", "--seed", "11", "--pvalues", "--perm", "10"])).unwrap();
    let direct = importance(&data, NormSpec::L11, &boot, true, Some(&PermConfig { m: 10, level: 0.95 })).unwrap();
    assert_eq!(execute(&cfg).unwrap(), serde_json::to_string_pretty(&direct).unwrap() + "\n");
    let lib = locopath::normalized_importance(&data, NormSpec::L11).unwrap();
    for row in &direct.rows {
        assert_eq!(row.raw, lib.raw[row.index - 1]);
    }
    let percents: Vec<f64> = direct.rows.iter().map(|r| r.percent).collect();
    assert!(percents.windows(2).all(|w| w[0] >= w[1]));

    let cfg = parse_args(args(&["test", f, "--null", "1=1,4=0", "--B", "30", "--seed", "11", "--s", "2", "--t", "2"]))
        .unwrap();
    let h = Hypothesis::new(vec![0, 3], vec![1.0, 0.0]).unwrap();
    let direct = test(&data, &h, NormSpec::L22, &boot).unwrap();
    assert_eq!(execute(&cfg).unwrap(), serde_json::to_string_pretty(&direct).unwrap() + "\n");
    let lib = locopath::bootstrap_test(&data, &h, NormSpec::L22, &boot).unwrap();
    assert_eq!(direct.outcome, lib);

    let cfg = parse_args(args(&["screen", f, "--threshold", "0.5", "--s", "inf", "--t", "inf"])).unwrap();
    let direct = screening(&data, NormSpec::LINF, ScreeningRule::Threshold(0.5)).unwrap();
    assert_eq!(execute(&cfg).unwrap(), serde_json::to_string_pretty(&direct).unwrap() + "\n");
}

#[test]
fn text_tables_round_percent_to_one_decimal() {
    let dir = tempfile::tempdir().unwrap();
    let file = sample_file(dir.path(), 40, 6, 6);
    let cfg = parse_args(args(&["importance", file.to_str().unwrap(), "--format", "text"])).unwrap();
    let text = execute(&cfg).unwrap();
    let header = text.lines().nth(1).unwrap();
    assert!(header.starts_with("name") && header.contains("percent") && header.contains("pvalue"));
    let first = text.lines().nth(2).unwrap();
    let pct = first.split_whitespace().nth(2).unwrap();
    assert_eq!(pct.split('.').nth(1).unwrap().len(), 1, "{first}");
}

#[test]
fn output_file_and_simulation_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim.json");
    let records = dir.path().join("records.csv");
    let cells = dir.path().join("cells.csv");
    let code = main_with_args(args(&[
        "simulate", "--experiment", "screening", "--n", "20", "--p", "30", "--beta", "3,3,3", "--reps", "5",
        "--seed", "2", "-o", out.to_str().unwrap(), "--records", records.to_str().unwrap(), "--cells",
        cells.to_str().unwrap(),
    ]));
    assert_eq!(code, 0);
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(json["result"]["cells"].as_array().unwrap().len(), 2);
    assert_eq!(std::fs::read_to_string(&records).unwrap().lines().count(), 11);
    assert_eq!(std::fs::read_to_string(&cells).unwrap().lines().count(), 3);
}

fn run_binary(argv: &[&str], threads: &str) -> (i32, String) {
    let out = Process::new(env!("CARGO_BIN_EXE_locopath"))
        .args(argv)
        .env("RAYON_NUM_THREADS", threads)
        .output()
        .unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap())
}

#[test]
fn binary_output_is_independent_of_threads() {
    let dir = tempfile::tempdir().unwrap();
    let file = sample_file(dir.path(), 30, 40, 7);
    let f = file.to_str().unwrap();
    let runs: [&[&str]; 3] = [
        &["importance", f, "--perm", "5", "--seed", "3"],
        &["test", f, "--null", "2=0", "--B", "20", "--seed", "3"],
        &["simulate", "--experiment", "size", "--n", "30", "--p", "10", "--reps", "4", "--B", "20", "--seed", "3"],
    ];
    for argv in runs {
        let (c1, a) = run_binary(argv, "1");
        let (c2, b) = run_binary(argv, "3");
        let (c3, c) = run_binary(argv, "1");
        assert_eq!((c1, c2, c3), (0, 0, 0));
        assert!(!a.is_empty());
        assert_eq!(a, b, "{argv:?}");
        assert_eq!(a, c);
    }
}

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn steinlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_steinlab"))
        .args(args)
        .output()
        .expect("spawn steinlab")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn norm_value(args: &[&str]) -> f64 {
    let o = steinlab(args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    v["value"].as_f64().unwrap()
}

#[test]
fn gaussian_l2_norm() {
    let v = norm_value(&[
        "norm", "--gen", "gauss", "--sigma", "1", "--extent", "32", "--count", "1024", "--norm", "lp", "--p", "2",
    ]);
    assert!((v - std::f64::consts::PI.powf(0.25)).abs() <= 1e-9, "{v}");
}

#[test]
fn norms_of_simple_functions() {
    let zero = ["norm", "--gen", "zero", "--norm", "lorentz", "--p", "2", "--q", "1"];
    assert_eq!(norm_value(&zero), 0.0);
    let gauss = [
        "norm", "--gen", "gauss", "--sigma", "1", "--norm", "lorentz", "--p", "2", "--q", "2",
    ];
    assert!((norm_value(&gauss) - std::f64::consts::PI.powf(0.25)).abs() <= 1e-9);
    let boxed = [
        "norm", "--gen", "box", "--dim", "2", "--extent", "8", "--count", "32", "--norm", "frak", "--p", "1.5", "--q",
        "2",
    ];
    assert!(norm_value(&boxed) > 0.0);
    let mixed = [
        "norm", "--gen", "gauss", "--dim", "2", "--extent", "8", "--count", "32", "--norm", "mixed", "--p", "2,3",
    ];
    assert!(norm_value(&mixed).is_finite());
}

#[test]
fn bad_parameters_exit_with_two() {
    for args in [
        &["norm", "--gen", "gauss", "--norm", "lp", "--p", "0"][..],
        &["norm", "--gen", "gauss", "--norm", "lorentz", "--p", "inf", "--q", "1"],
        &["norm", "--gen", "wavelet", "--norm", "lp", "--p", "2"],
        &["sharpness", "--r-min", "8", "--r-max", "10"],
        &["maximal", "--gen", "gauss", "--t", "1000"],
    ] {
        assert_eq!(steinlab(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn malformed_corpus_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("corpus.json");
    fs::write(
        &path,
        r#"[{"schema_version": 1, "generator": "gaussian", "sigma": NaN, "grid": {"extent": [8], "count": [32]}}]"#,
    )
    .unwrap();
    let o = steinlab(&["verify", "--suite", "exact", "--corpus", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    fs::write(&path, "not json").unwrap();
    let o = steinlab(&["norm", "--corpus", path.to_str().unwrap(), "--norm", "lp", "--p", "2"]);
    assert_eq!(o.status.code(), Some(2));
}

fn small_corpus(dir: &Path) -> String {
    let path = dir.join("corpus.json");
    fs::write(
        &path,
        r#"[
  {"schema_version": 1, "id": "g", "generator": "gaussian", "sigma": 1, "grid": {"extent": [16], "count": [128]}},
  {"schema_version": 1, "id": "s", "generator": "random_step", "seed": 3, "density": 0.5, "spread": 8, "grid": {"extent": [4, 4], "count": [8, 8]}}
]"#,
    )
    .unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn verify_writes_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = small_corpus(dir.path());
    let out = dir.path().join("report.csv");
    let o = steinlab(&[
        "verify",
        "--suite",
        "exact",
        "--corpus",
        &corpus,
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    let header: Value = serde_json::from_str(lines.next().unwrap()).unwrap();
    assert_eq!(header["suite"], "exact");
    assert!(lines
        .next()
        .unwrap()
        .starts_with("test_id,n,p,q,r,seed,lhs,rhs,ratio,mode,status"));
    assert!(lines.all(|l| !l.contains(",fail,")));
}

#[test]
fn baseline_bootstrap_then_compare() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = small_corpus(dir.path());
    let base = dir.path().join("nested/base.csv");
    let args = [
        "verify",
        "--suite",
        "stein",
        "--corpus",
        &corpus,
        "--baseline",
        base.to_str().unwrap(),
    ];
    let o = steinlab(&args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(base.exists());
    let first = fs::read_to_string(&base).unwrap();
    assert_eq!(steinlab(&args).status.code(), Some(0));
    assert_eq!(fs::read_to_string(&base).unwrap(), first);

    // a baseline that is far too tight is a regression
    let tight: String = first
        .lines()
        .enumerate()
        .map(|(i, l)| match (i, l.rsplit_once(',')) {
            (i, Some((key, _))) if i > 1 => format!("{key},1e-9\n"),
            _ => format!("{l}\n"),
        })
        .collect();
    fs::write(&base, tight).unwrap();
    assert_eq!(steinlab(&args).status.code(), Some(1));
    let mut update = args.to_vec();
    update.push("--update-baseline");
    assert_eq!(steinlab(&update).status.code(), Some(0));
    assert_eq!(fs::read_to_string(&base).unwrap(), first);
}

#[test]
fn sharpness_growth() {
    let o = steinlab(&["sharpness", "--n", "2", "--r-min", "1", "--r-max", "24"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    let header: Value = serde_json::from_str(lines.next().unwrap()).unwrap();
    assert_eq!(lines.next().unwrap(), "r,b,block_term,lp_block,lp_conj_block");
    for line in lines {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cols[1], (cols[0] + 1.0).sqrt());
    }
    assert!(header["slope"].as_f64().unwrap() > 0.0);

    let fit: Value = {
        let o = steinlab(&["sharpness", "--n", "2", "--r-min", "8", "--r-max", "24"]);
        serde_json::from_str(stdout(&o).lines().next().unwrap()).unwrap()
    };
    let slope = fit["slope"].as_f64().unwrap();
    assert!((0.4..=0.6).contains(&slope), "{slope}");

    let one: Value = {
        let o = steinlab(&["sharpness", "--n", "1", "--r-min", "8", "--r-max", "24"]);
        serde_json::from_str(stdout(&o).lines().next().unwrap()).unwrap()
    };
    assert!(one["slope"].as_f64().unwrap().abs() < 1e-12);
}

#[test]
fn transforms_and_maximal_print_csv() {
    let o = steinlab(&["fourier", "--gen", "gauss", "--extent", "16", "--count", "64"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let header: Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert!(header["plancherel_defect"].as_f64().unwrap() < 1e-12);
    assert_eq!(text.lines().nth(1).unwrap(), "x1,re,im");
    assert_eq!(text.lines().count(), 2 + 128);

    let o = steinlab(&[
        "maximal", "--gen", "box", "--dim", "2", "--extent", "4", "--count", "8", "--t", "0,0",
    ]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["value"].as_f64().unwrap(), 1.0);

    let o = steinlab(&[
        "rearrange",
        "--gen",
        "step",
        "--extent",
        "4",
        "--count",
        "16",
        "--seed",
        "7",
    ]);
    assert!(o.status.success());
    assert!(stdout(&o).lines().any(|l| l.starts_with("t_lo,t_hi,value")));
}

#[test]
fn output_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = small_corpus(dir.path());
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = steinlab(&[
            "verify",
            "--suite",
            "all",
            "--corpus",
            &corpus,
            "-o",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.code().is_some_and(|c| c <= 1));
        fs::read(out).unwrap()
    };
    assert_eq!(run("a.csv"), run("b.csv"));
    let single = dir.path().join("c.csv");
    let o = Command::new(env!("CARGO_BIN_EXE_steinlab"))
        .args([
            "--threads",
            "1",
            "verify",
            "--suite",
            "all",
            "--corpus",
            &corpus,
            "-o",
            single.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(o.status.code().is_some_and(|c| c <= 1));
    assert_eq!(fs::read(single).unwrap(), run("d.csv"));
}

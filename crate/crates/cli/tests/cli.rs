use std::path::Path;
use std::process::{Command, Output};

use lowrank::io::Manifest;
use lowrank::linalg::singular_values;
use lowrank::oracle::laplace_bie_matrix;

fn lowrank(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lowrank")).args(args).output().expect("spawn lowrank")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field(out: &str, key: &str) -> String {
    out.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}: ")))
        .unwrap_or_else(|| panic!("no `{key}` in output:\n{out}"))
        .to_string()
}

#[test]
fn exact_rank_svd_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f");
    let o = lowrank(&[
        "svd", "--synthetic", "exact_rank:5", "--m", "40", "--n", "30", "--rank", "5", "--oversample", "5", "--seed",
        "1", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = Manifest::read(&out).unwrap();
    assert_eq!(m.kind, "svd");
    assert_eq!(m.run.seed, Some(1));
    assert!(m.run.est_error.unwrap() <= 1e-10);
    let (_, f) = lowrank::io::read_factors::<f64>(&out).unwrap();
    assert_eq!(f.rank(), 5);
}

#[test]
fn same_seed_same_output() {
    let args = ["range", "--synthetic", "exp:0.7", "--m", "30", "--n", "30", "--rank", "4", "--seed", "9"];
    assert_eq!(stdout(&lowrank(&args)), stdout(&lowrank(&args)));
}

#[test]
fn missing_seed_is_printed() {
    let o = lowrank(&["range", "--synthetic", "exp:0.7", "--m", "20", "--n", "20", "--rank", "3"]);
    assert!(o.status.success());
    field(&stdout(&o), "seed").parse::<u64>().unwrap();
}

fn write(path: &Path, s: &str) {
    std::fs::write(path, s).unwrap();
}

#[test]
fn nystrom_rejects_indefinite_input() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("a.mtx");
    write(&p, "%%MatrixMarket matrix array real symmetric\n2 2\n1\n3\n1\n");
    let o = lowrank(&["eig", "--input", p.to_str().unwrap(), "--rank", "1", "--oversample", "1", "--method", "nystrom", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not PSD"));
}

#[test]
fn exit_codes() {
    let o = lowrank(&["svd", "--synthetic", "exp:0.5", "--rank", "200", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = lowrank(&["svd", "--input", "/nonexistent/a.mtx", "--rank", "2", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(3));
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.mtx");
    write(&p, "%%MatrixMarkt matrix array real general\n1 1\n1\n");
    let o = lowrank(&["svd", "--input", p.to_str().unwrap(), "--rank", "1", "--oversample", "0", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1"));
    let o = lowrank(&["svd", "--synthetic", "exp:0.5", "--rank", "2", "--adaptive", "--tol", "1e-3"]);
    assert_eq!(o.status.code(), Some(2));
}

/// Overshoot allowed over the smallest rank meeting the tolerance.
const ADAPTIVE_RANK_SLACK: usize = 15;

#[test]
fn adaptive_rank_near_minimal() {
    let o = lowrank(&["svd", "--synthetic", "laplace:200", "--adaptive", "--tol", "1e-8", "--seed", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rank: usize = field(&stdout(&o), "rank").parse().unwrap();
    let a = laplace_bie_matrix::<f64>(200).unwrap();
    let s = singular_values(&a).unwrap();
    let minimal = s.iter().position(|&x| x <= 1e-8).unwrap();
    assert!(rank >= minimal && rank <= minimal + ADAPTIVE_RANK_SLACK, "rank {rank}, minimal {minimal}");
}

#[test]
fn error_curve_rows() {
    let o = lowrank(&["experiment", "--mode", "error-curve", "--synthetic", "laplace:100", "--max-ell", "60", "--seed", "4"]);
    assert!(o.status.success());
    let mut rd = csv::Reader::from_reader(o.stdout.as_slice());
    assert_eq!(rd.headers().unwrap(), vec!["ell", "sigma_opt", "err_actual", "err_estimate"]);
    let rows: Vec<Vec<f64>> =
        rd.records().map(|r| r.unwrap().iter().map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 60);
    for w in rows.windows(2) {
        assert!(w[1][2] <= w[0][2] * (1.0 + 1e-10) + 1e-14, "error grew at ell = {}", w[1][0]);
    }
    let covered = rows.iter().filter(|r| r[3] >= r[2]).count();
    assert!(covered as f64 >= 0.99 * rows.len() as f64);
    assert!(rows.iter().all(|r| r[2] >= r[1] * (1.0 - 1e-8)));
}

#[test]
fn bench_is_reproducible() {
    let args = ["bench", "--sizes", "64,128", "--ells", "8,16,32", "--seed", "5", "--no-full-svd"];
    let read = |o: Output| -> Vec<Vec<String>> {
        assert!(o.status.success());
        csv::Reader::from_reader(o.stdout.as_slice())
            .records()
            .map(|r| r.unwrap().iter().take(5).map(String::from).collect())
            .collect()
    };
    let a = read(lowrank(&args));
    assert_eq!(a.len(), 6);
    assert_eq!(a, read(lowrank(&args)));
    let ratio = |r: &Vec<String>| r[4].parse::<f64>().unwrap();
    assert!(ratio(&a[0]) < ratio(&a[1]) && ratio(&a[1]) < ratio(&a[2]));
}

#[test]
fn single_pass_and_eig_methods() {
    for extra in [&["--single-pass"][..], &["--method", "row"], &["--method", "nystrom"], &[]] {
        let mut args = vec!["eig", "--synthetic", "exact_rank:6", "--n", "40", "--rank", "6", "--seed", "6"];
        args.extend_from_slice(extra);
        let o = lowrank(&args);
        assert!(o.status.success(), "{extra:?}: {}", String::from_utf8_lossy(&o.stderr));
        let r: f64 = field(&stdout(&o), "residual").parse().unwrap();
        assert!(r < 1e-8, "{extra:?}: residual {r}");
    }
    let o = lowrank(&["svd", "--synthetic", "exact_rank:6", "--m", "50", "--n", "40", "--rank", "6", "--single-pass", "--seed", "6"]);
    let r: f64 = field(&stdout(&o), "residual").parse().unwrap();
    assert!(r < 1e-8);
}

#[test]
fn structured_and_id_runs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("id");
    let o = lowrank(&[
        "id", "--synthetic", "exact_rank:4", "--m", "30", "--n", "30", "--rank", "4", "--seed", "7", "--format", "mm",
        "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(Manifest::read(&out).unwrap().kind, "id");
    let o = lowrank(&["range", "--synthetic", "exact_rank:4", "--m", "30", "--n", "32", "--rank", "4", "--sketch", "gsrft", "--seed", "7"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r: f64 = field(&stdout(&o), "residual").parse().unwrap();
    assert!(r < 1e-10);
}

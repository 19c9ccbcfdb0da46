use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;
use vdc_core::data_io::{load_ground_truth, load_labels, save_csv, save_fvecs, save_labels};
use vdc_core::metrics::{evaluate, NoisePolicy};
use vdc_core::synth;

fn vdc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vdc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok_json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "exit {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is json")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

struct Fixture {
    dir: TempDir,
}

impl Fixture {
    fn new() -> Self {
        Self {
            dir: TempDir::new().unwrap(),
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn blobs(&self) -> (PathBuf, PathBuf) {
        let (ds, truth) = synth::two_blobs(400, 10.0, 17);
        let data = self.path("blobs.csv");
        let labels = self.path("blobs.truth");
        save_csv(&ds, &data).unwrap();
        let t: Vec<i32> = truth.labels().iter().map(|&l| l as i32).collect();
        save_labels(&t, &labels).unwrap();
        (data, labels)
    }

    fn unit_vectors(&self, n: usize) -> PathBuf {
        let (ds, _) = synth::clustered_unit_vectors(n, 32, 5, 0.5, 8);
        let data = self.path("vectors.fvecs");
        save_fvecs(&ds, &data).unwrap();
        data
    }
}

/// Minimal schema check shared by every command that emits a run report.
fn check_report(r: &Value, command: &str) {
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["command"], command);
    assert!(r["parameters"].is_object());
    let ds = &r["dataset"];
    assert!(ds["n"].is_u64() && ds["d"].is_u64());
    assert!(ds["metric"].is_string());
    let hash = ds["sha256"].as_str().unwrap();
    assert_eq!(hash.len(), 64);
    assert!(hash.chars().all(|c| c.is_ascii_hexdigit()));
    for stage in ["index", "find_knn", "build_graph", "propagation"] {
        let t = r["timings_ms"][stage]
            .as_f64()
            .unwrap_or_else(|| panic!("timing {stage}"));
        assert!(t >= 0.0);
    }
    assert!(r["scores"].is_null() || r["scores"]["ami"].is_f64());
    assert!(r["clusters"].is_null() || r["clusters"].is_u64());
    assert!(r["noise"].is_null() || r["noise"].is_u64());
    assert!(r["seeds"].is_object());
}

#[test]
fn missing_input_is_usage_error() {
    let out = vdc(&["index", "--out", "/dev/null"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--input"));
}

#[test]
fn zero_k_is_usage_error() {
    let f = Fixture::new();
    let (data, _) = f.blobs();
    let out = vdc(&[
        "cluster",
        "--input",
        s(&data),
        "--k",
        "0",
        "--out",
        s(&f.path("x")),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sigma_with_cosine_is_usage_error() {
    let f = Fixture::new();
    let data = f.unit_vectors(200);
    let out = vdc(&[
        "index",
        "--input",
        s(&data),
        "--metric",
        "cosine",
        "--sigma",
        "1.0",
        "--out",
        s(&f.path("i")),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unreadable_input_is_runtime_error() {
    let f = Fixture::new();
    let out = vdc(&[
        "cluster",
        "--input",
        s(&f.path("nope.csv")),
        "--out",
        s(&f.path("x")),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn index_is_deterministic() {
    let f = Fixture::new();
    let data = f.unit_vectors(1000);
    let mut files = Vec::new();
    for (i, threads) in ["1", "3"].into_iter().enumerate() {
        let out_path = f.path(&format!("idx{i}"));
        let out = vdc(&[
            "index",
            "--threads",
            threads,
            "--input",
            s(&data),
            "--metric",
            "cosine",
            "--D",
            "64",
            "--s",
            "10",
            "--m",
            "30",
            "--seed",
            "4",
            "--out",
            s(&out_path),
        ]);
        let r = ok_json(&out);
        check_report(&r, "index");
        assert!(r["index_stats"]["non_empty"].as_u64().unwrap() > 0);
        files.push(fs::read(&out_path).unwrap());
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn eval_identical_and_relabeled() {
    let f = Fixture::new();
    let (_, truth) = f.blobs();
    let r = ok_json(&vdc(&["eval", "--pred", s(&truth), "--truth", s(&truth)]));
    for key in ["ami", "nmi", "ari"] {
        assert_eq!(r[key], 1.0, "{key}");
    }

    let pred: Vec<i32> = (0..400).map(|i| [5, 2, 9][i % 3]).collect();
    let shuffled: Vec<i32> = pred
        .iter()
        .map(|&l| [0, 0, 7, 0, 0, 3, 0, 0, 0, 11][l as usize])
        .collect();
    let (a, b) = (f.path("a"), f.path("b"));
    save_labels(&pred, &a).unwrap();
    save_labels(&shuffled, &b).unwrap();
    let ra = ok_json(&vdc(&["eval", "--pred", s(&a), "--truth", s(&truth)]));
    let rb = ok_json(&vdc(&["eval", "--pred", s(&b), "--truth", s(&truth)]));
    assert_eq!(ra, rb);

    let lib = evaluate(
        &pred,
        load_ground_truth(&truth).unwrap().labels(),
        NoisePolicy::OwnCluster,
    )
    .unwrap();
    assert_eq!(ra["ami"].as_f64().unwrap(), lib.ami);
    assert_eq!(ra["nmi"].as_f64().unwrap(), lib.nmi);
    assert_eq!(ra["ari"].as_f64().unwrap(), lib.ari);
    assert_eq!(ra["clusters_pred"], 3);
}

#[test]
fn eval_length_mismatch() {
    let f = Fixture::new();
    let (_, truth) = f.blobs();
    let short = f.path("short");
    save_labels(&[0, 1, 0], &short).unwrap();
    let out = vdc(&["eval", "--pred", s(&short), "--truth", s(&truth)]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains('3') && err.contains("400"), "{err}");
}

#[test]
fn cluster_blobs_exact_dnp() {
    let f = Fixture::new();
    let (data, truth) = f.blobs();
    let labels = f.path("labels");
    let graph = f.path("graph");
    let r = ok_json(&vdc(&[
        "cluster",
        "--input",
        s(&data),
        "--backend",
        "exact",
        "--k",
        "10",
        "--algo",
        "dnp",
        "--out",
        s(&labels),
        "--truth",
        s(&truth),
        "--dump-graph",
        s(&graph),
    ]));
    check_report(&r, "cluster");
    assert_eq!(r["clusters"], 2);
    assert_eq!(r["scores"]["ari"], 1.0);
    assert_eq!(load_labels(&labels).unwrap().len(), 400);
    assert!(fs::read_to_string(&graph).unwrap().lines().count() >= 400 * 10 / 2);
}

#[test]
fn cluster_reports_k_prime_and_warns_on_mutual() {
    let f = Fixture::new();
    let (data, _) = f.blobs();
    let out = vdc(&[
        "cluster",
        "--input",
        s(&data),
        "--k",
        "100",
        "--c",
        "5",
        "--graph",
        "mutual",
        "--out",
        s(&f.path("l")),
    ]);
    let r = ok_json(&out);
    assert_eq!(r["parameters"]["k_prime"], 20);
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}

#[test]
fn cluster_pipeline_deterministic_across_threads() {
    let f = Fixture::new();
    let data = f.unit_vectors(1500);
    let idx = f.path("idx");
    ok_json(&vdc(&[
        "index",
        "--input",
        s(&data),
        "--metric",
        "cosine",
        "--D",
        "64",
        "--s",
        "10",
        "--m",
        "40",
        "--seed",
        "2",
        "--out",
        s(&idx),
    ]));
    let mut outputs = Vec::new();
    for (i, threads) in ["1", "4"].into_iter().enumerate() {
        for algo in ["dnp", "lpa", "louvain"] {
            let labels = f.path(&format!("{algo}{i}"));
            let r = ok_json(&vdc(&[
                "cluster",
                "--threads",
                threads,
                "--input",
                s(&data),
                "--metric",
                "cosine",
                "--backend",
                "ceos",
                "--index",
                s(&idx),
                "--k",
                "10",
                "--algo",
                algo,
                "--seed",
                "1",
                "--out",
                s(&labels),
            ]));
            check_report(&r, "cluster");
            outputs.push(fs::read(&labels).unwrap());
        }
    }
    assert_eq!(outputs[..3], outputs[3..]);
}

#[test]
fn cluster_ceos_l2_with_kernel_features() {
    let f = Fixture::new();
    let (data, truth) = f.blobs();
    let r = ok_json(&vdc(&[
        "cluster",
        "--input",
        s(&data),
        "--backend",
        "ceos",
        "--dprime",
        "64",
        "--D",
        "64",
        "--s",
        "10",
        "--m",
        "40",
        "--out",
        s(&f.path("l")),
        "--truth",
        s(&truth),
    ]));
    check_report(&r, "cluster");
    assert!(r["parameters"]["sigma"].as_f64().unwrap() > 0.0);
    assert!(r["scores"]["ari"].as_f64().unwrap() > 0.9);
}

#[test]
fn bench_sweep_recall_is_monotone_in_s() {
    let f = Fixture::new();
    let data = f.unit_vectors(5000);
    let r = ok_json(&vdc(&[
        "bench",
        "--input",
        s(&data),
        "--metric",
        "cosine",
        "--D",
        "128",
        "--m",
        "50",
        "--sweep",
        "s=10,20",
        "--oracle",
        "--oracle-queries",
        "500",
    ]));
    check_report(&r, "bench");
    let rows = r["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    let recall: Vec<f64> = rows
        .iter()
        .map(|row| row["recall"].as_f64().unwrap())
        .collect();
    assert!(recall[1] >= recall[0], "{recall:?}");
    assert!(recall[0] > 0.01);
}

#[test]
fn bench_k_prime_sweep_scores_each_row() {
    let f = Fixture::new();
    let (ds, truth) = synth::clustered_unit_vectors(1000, 16, 3, 0.3, 5);
    let data = f.path("v.fvecs");
    save_fvecs(&ds, &data).unwrap();
    let t: Vec<i32> = truth.labels().iter().map(|&l| l as i32).collect();
    let tp = f.path("t");
    save_labels(&t, &tp).unwrap();
    let out = vdc(&[
        "bench",
        "--input",
        s(&data),
        "--metric",
        "cosine",
        "--D",
        "64",
        "--k",
        "25",
        "--sweep",
        "kp=10,15,20,25",
        "--algo",
        "dnp",
        "--truth",
        s(&tp),
        "--csv",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 5);
    let header: Vec<&str> = lines[0].split(',').collect();
    let kp_col = header.iter().position(|&c| c == "k_prime").unwrap();
    let ami_col = header.iter().position(|&c| c == "ami").unwrap();
    for (line, kp) in lines[1..].iter().zip([10, 15, 20, 25]) {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells[kp_col], kp.to_string());
        assert!(cells[ami_col].parse::<f64>().is_ok());
    }
}

#[test]
fn bench_rejects_bad_sweeps() {
    let f = Fixture::new();
    let data = f.unit_vectors(100);
    for sweep in ["", "s=", "x=1", "s=1;s=2"] {
        let out = vdc(&[
            "bench",
            "--input",
            s(&data),
            "--metric",
            "cosine",
            "--sweep",
            sweep,
        ]);
        assert_eq!(out.status.code(), Some(2), "{sweep:?}");
    }
}

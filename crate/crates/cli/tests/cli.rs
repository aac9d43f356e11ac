use std::process::{Command, Output};

use neighborly_cli::Document;
use neighborly_core::bounds::BoundCertificate;
use neighborly_core::config_rank::{Configuration, GenericitySummary, TauReport};
use neighborly_core::moment::{SupportCertificate, SweepSummary};
use neighborly_core::sw_classes::{PairingReport, R2ModelCheck};
use serde::de::DeserializeOwned;
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_neighborly"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> (i32, Document) {
    let out = run(args);
    let doc = serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{args:?}: {e}\n{}", String::from_utf8_lossy(&out.stderr)));
    (code(&out), doc)
}

fn results<T: DeserializeOwned>(doc: &Document) -> Vec<T> {
    doc.results
        .iter()
        .map(|v| serde_json::from_value(v.clone()).unwrap())
        .collect()
}

/// parse(serialize(x)) == x for every result entry.
fn assert_round_trip<T: DeserializeOwned + serde::Serialize + PartialEq + std::fmt::Debug>(
    v: &Value,
) {
    let x: T = serde_json::from_value(v.clone()).unwrap();
    let back: T = serde_json::from_str(&serde_json::to_string(&x).unwrap()).unwrap();
    assert_eq!(back, x);
    assert_eq!(&serde_json::to_value(&x).unwrap(), v);
}

#[test]
fn bounds_markdown_row_for_k1() {
    let out = run(&[
        "bounds",
        "--k",
        "1..4",
        "--r",
        "1..4",
        "--manifold",
        "euclidean",
        "--format",
        "markdown",
    ]);
    assert_eq!(code(&out), 0);
    assert!(
        stdout(&out).lines().any(|l| l == "| 1 | 2 | 4 | 6 | 8 |"),
        "{}",
        stdout(&out)
    );
}

#[test]
fn bounds_single_entry() {
    let (c, doc) = json(&["bounds", "--k", "4", "--r", "4"]);
    assert_eq!(c, 0);
    assert_eq!(doc.command, "bounds");
    let certs: Vec<BoundCertificate> = results(&doc);
    assert_eq!(certs.len(), 1);
    assert_eq!(certs[0].strict_lower_bound, Some(28));
    let out = run(&["bounds", "--k", "4", "--r", "4", "--format", "csv"]);
    assert!(stdout(&out).lines().nth(1).unwrap().contains(",28,29,"));
}

#[test]
fn bounds_rejects_bad_input() {
    assert_eq!(code(&run(&["bounds", "--k", "0", "--r", "1"])), 2);
    assert_eq!(code(&run(&["bounds", "--k", "3..1", "--r", "1"])), 2);
    assert_eq!(code(&run(&["bounds", "--k", "x", "--r", "1"])), 2);
    assert_eq!(
        code(&run(&[
            "bounds",
            "--k",
            "1",
            "--r",
            "1",
            "--manifold",
            "sphere"
        ])),
        2
    );
}

#[test]
fn bounds_with_pairing_flags_vanishing() {
    let (c, doc) = json(&[
        "bounds",
        "--k",
        "4",
        "--r",
        "2",
        "--manifold",
        "projective",
        "--with-pairing",
    ]);
    assert_eq!(c, 0);
    let certs: Vec<BoundCertificate> = results(&doc);
    assert_eq!(certs[0].implied_min_dimension, Some(15));
    assert_eq!(certs[0].pairing_supports, Some(false));
    assert!(doc.findings.iter().any(|f| f.kind == "pairing-vanishes"));
}

#[test]
fn theorem2_base_case() {
    let (c, doc) = json(&["verify-theorem2", "--k", "4", "--r", "1"]);
    assert_eq!(c, 0);
    let reps: Vec<PairingReport> = results(&doc);
    assert!(reps[0].value && reps[0].agrees);
    assert!(doc.findings.iter().all(|f| f.kind != "pairing-vanishes"));
}

#[test]
fn theorem2_zero_is_reported() {
    let (c, doc) = json(&["verify-theorem2", "--k", "2", "--r", "2"]);
    assert_eq!(c, 0);
    let reps: Vec<PairingReport> = results(&doc);
    assert!(!reps[0].value && reps[0].agrees);
    assert!(doc
        .findings
        .iter()
        .any(|f| f.kind == "pairing-vanishes" && f.subject == "k=2 r=2"));
}

#[test]
fn theorem2_skips_r_above_k() {
    let (c, doc) = json(&["verify-theorem2", "--k", "2", "--r", "3"]);
    assert_eq!(c, 0);
    assert!(doc.results.is_empty());
    assert!(doc.findings.iter().any(|f| f.kind == "skipped"));
    assert_eq!(code(&run(&["verify-theorem2", "--k", "0", "--r", "1"])), 2);
}

#[test]
fn r2_model() {
    let (c, doc) = json(&["verify-r2-model", "--k", "2..256"]);
    assert_eq!(c, 0);
    let checks: Vec<R2ModelCheck> = results(&doc);
    assert!(checks
        .iter()
        .filter(|c| c.k.is_power_of_two())
        .all(|c| c.power_identity && c.top_pairing));
    let (c, doc) = json(&["verify-r2-model", "--k", "6"]);
    assert_eq!(c, 0);
    assert!(!results::<R2ModelCheck>(&doc)[0].power_identity);
    assert_eq!(code(&run(&["verify-r2-model", "--k", "4..2"])), 2);
    assert_eq!(code(&run(&["verify-r2-model", "--k", "1"])), 2);
}

#[test]
fn moment_equispaced_triple() {
    let (c, doc) = json(&["moment", "--r", "3", "--angles", "0,2.0944,4.1888"]);
    assert_eq!(c, 0);
    for v in &doc.results {
        assert_eq!(v["certificate"]["pass"], Value::Bool(true));
        assert_round_trip::<SupportCertificate>(&v["certificate"]);
    }
}

#[test]
fn moment_sweep() {
    let (c, doc) = json(&[
        "moment", "--r", "4", "--sweep", "--trials", "100", "--delta", "1e-3", "--seed", "7",
    ]);
    assert_eq!(c, 0);
    let s: Vec<SweepSummary> = results(&doc);
    assert_eq!(s[0].passes, 100);
    let (c, doc) = json(&[
        "moment", "--r", "4", "--sweep", "--trials", "40", "--delta", "0.5", "--seed", "7",
    ]);
    assert_eq!(c, 1);
    let s: Vec<SweepSummary> = results(&doc);
    assert!(!s[0].failures.is_empty());
    assert_round_trip::<SweepSummary>(&doc.results[0]);
}

#[test]
fn moment_rejects_bad_input() {
    assert_eq!(code(&run(&["moment", "--r", "2", "--angles", "0,0"])), 2);
    assert_eq!(code(&run(&["moment", "--r", "3", "--angles", "0,1"])), 2);
    assert_eq!(
        code(&run(&[
            "moment", "--r", "2", "--angles", "0,1", "--grid", "10"
        ])),
        2
    );
    assert_eq!(code(&run(&["moment"])), 2);
}

#[test]
fn moment_negative_angles_parse() {
    let (c, _) = json(&["moment", "--angles", "-1.5,0.25,2"]);
    assert_eq!(c, 0);
}

#[test]
fn rank_two_points() {
    let (c, doc) = json(&["rank", "--moment", "--r", "2", "--angles", "0,1.5708"]);
    assert_eq!(c, 0);
    let t: Vec<TauReport> = results(&doc);
    assert_eq!((t[0].rank, t[0].required), (3, 3));
    assert_round_trip::<TauReport>(&doc.results[0]);
}

#[test]
fn rank_sample_and_errors() {
    let (c, doc) = json(&[
        "rank", "--moment", "--r", "4", "--trials", "50", "--seed", "3",
    ]);
    assert_eq!(c, 0);
    let s: Vec<GenericitySummary> = results(&doc);
    assert_eq!(s[0].fraction_full_rank, 1.0);
    assert!(s[0].evidence.contains("Monte-Carlo"));
    assert_round_trip::<GenericitySummary>(&doc.results[0]);
    assert_eq!(code(&run(&["rank", "--r", "2"])), 2);
    assert_eq!(
        code(&run(&["rank", "--moment", "--r", "2", "--angles", "1,1"])),
        2
    );
}

#[test]
fn lr_config_tree_and_composite() {
    let (c, doc) = json(&[
        "lr-config",
        "--k",
        "2",
        "--s",
        "2",
        "--epsilon",
        "0.4",
        "--seed",
        "1",
    ]);
    assert_eq!(c, 0);
    let cfg: Vec<Configuration> = results(&doc);
    assert_eq!(cfg[0].points.len(), 4);
    assert_eq!(cfg[0].labels.as_ref().unwrap().len(), 4);
    assert!(cfg[0].min_distance > 0.0);
    assert_round_trip::<Configuration>(&doc.results[0]);

    let (c, doc) = json(&["lr-config", "--k", "2", "--r", "3"]);
    assert_eq!(c, 0);
    let cfg: Vec<Configuration> = results(&doc);
    assert_eq!(cfg[0].points.len(), 3);
    assert_eq!(cfg[0].points[2], vec![3.0, 0.0]);

    assert_eq!(
        code(&run(&[
            "lr-config",
            "--k",
            "2",
            "--s",
            "2",
            "--epsilon",
            "0.7"
        ])),
        2
    );
    assert_eq!(code(&run(&["lr-config", "--k", "1", "--s", "1"])), 2);
    assert_eq!(code(&run(&["lr-config", "--k", "2"])), 2);
}

#[test]
fn identical_config_gives_identical_bytes() {
    for args in [
        &[
            "moment", "--r", "5", "--sweep", "--trials", "20", "--seed", "11",
        ][..],
        &[
            "rank", "--moment", "--r", "3", "--trials", "30", "--seed", "2",
        ][..],
        &["lr-config", "--k", "3", "--s", "3", "--seed", "9"][..],
        &[
            "bounds",
            "--k",
            "1..8",
            "--r",
            "1..8",
            "--manifold",
            "projective",
        ][..],
    ] {
        let a = run(args);
        let b = run(args);
        assert_eq!(code(&a), 0);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn out_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("table.csv");
    let out = run(&[
        "bounds",
        "--k",
        "2",
        "--r",
        "2",
        "--format",
        "csv",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("k,r,manifold"));
}

#[test]
fn document_round_trips() {
    let (_, doc) = json(&["verify-theorem2", "--k", "1..4", "--r", "1..4"]);
    let back: Document = serde_json::from_str(&serde_json::to_string(&doc).unwrap()).unwrap();
    assert_eq!(back, doc);
    for v in &doc.results {
        assert_round_trip::<PairingReport>(v);
    }
    let (_, doc) = json(&[
        "bounds",
        "--k",
        "1..8",
        "--r",
        "1..4",
        "--manifold",
        "projective",
        "--with-pairing",
    ]);
    for v in &doc.results {
        assert_round_trip::<BoundCertificate>(v);
    }
}

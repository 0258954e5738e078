use std::path::Path;
use std::process::{Command, Output};

use inflacert_cli::certfile::CertificateFile;

fn inflacert(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_inflacert"))
        .args(args)
        .current_dir(dir)
        .env_remove("INFLACERT_MODE")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn margin_line(o: &Output) -> String {
    stdout(o)
        .lines()
        .find_map(|l| l.strip_prefix("margin ").map(str::to_owned))
        .expect("margin printed")
}

#[test]
fn certify_headline_then_verify_and_export() {
    let dir = tempfile::tempdir().unwrap();
    let out = inflacert(dir.path(), &["certify", "--u", "0.8090", "--F", "qplus-vertex", "--t", "-1", "-o", "c.json"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let file = CertificateFile::read(&dir.path().join("c.json")).unwrap();
    assert_eq!(file.provenance.mode, "float");
    let stored: f64 = file.margin.parse().unwrap();
    assert!(stored > 0.0);

    let v = inflacert(dir.path(), &["verify", "-i", "c.json"]);
    assert_eq!(v.status.code(), Some(0));
    let recomputed: f64 = margin_line(&v).parse().unwrap();
    assert!((recomputed - stored).abs() <= 1e-12);

    // far enough from the certification point to fail
    let v = inflacert(dir.path(), &["verify", "-i", "c.json", "--u", "0.8095", "--F", "qplus-vertex"]);
    assert_eq!(v.status.code(), Some(1));

    let e = inflacert(dir.path(), &["export-ineq", "-i", "c.json", "-o", "ineq.txt"]);
    assert_eq!(e.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("ineq.txt")).unwrap();
    assert!(text.contains("L(q) =") && text.contains("R(q) = max of"));
}

#[test]
fn exact_certificate_is_all_rational() {
    let dir = tempfile::tempdir().unwrap();
    let out = inflacert(dir.path(), &["certify", "--u", "55/73", "--exact", "--F", "qplus-vertex", "--t", "-1", "-o", "e.json"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let file = CertificateFile::read(&dir.path().join("e.json")).unwrap();
    assert_eq!(file.provenance.mode, "exact");
    assert_eq!(file.provenance.u_exact.as_deref(), Some("55/73"));
    let is_fraction = |s: &str| {
        let (p, q) = s.split_once('/').expect("p/q");
        p.trim_start_matches('-').chars().all(|c| c.is_ascii_digit()) && q.chars().all(|c| c.is_ascii_digit())
    };
    assert!(file.rows.iter().all(|r| is_fraction(&r.y)));
    assert!(is_fraction(&file.margin));
    assert!(file.to_certificate::<inflacert::Rational>().is_ok());

    let v = inflacert(dir.path(), &["verify", "-i", "e.json"]);
    assert_eq!(v.status.code(), Some(0));
    assert!(margin_line(&v).starts_with(&file.margin));

    let e = inflacert(dir.path(), &["export-ineq", "-i", "e.json"]);
    assert_eq!(e.status.code(), Some(0));
    let text = stdout(&e);
    assert!(text.contains('/'));
    assert!(!text.contains("e-"), "exact export must not contain floats");
}

#[test]
fn degenerate_point_is_lp_feasible() {
    let dir = tempfile::tempdir().unwrap();
    let out = inflacert(dir.path(), &["certify", "--u", "0.7071067", "--F", "0,0,0,0", "--t", "+1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("LP FEASIBLE"));
    assert!(!dir.path().join("certificate.json").exists());
}

#[test]
fn sweep_in_the_feasible_region_loses_coverage() {
    let dir = tempfile::tempdir().unwrap();
    let out = inflacert(dir.path(), &["sweep", "--from", "0.86", "--to", "0.88", "-o", "report"]);
    assert_eq!(out.status.code(), Some(3));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["reached_stop"], false);
}

#[test]
fn short_sweep_writes_checksummed_segments() {
    let dir = tempfile::tempdir().unwrap();
    let out = inflacert(dir.path(), &["sweep", "--from", "0.800", "--to", "0.8005", "-o", "report"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["reached_stop"], true);
    let segments = manifest["segments"].as_array().unwrap();
    assert!(!segments.is_empty());
    for s in segments {
        let f = CertificateFile::read(&dir.path().join("report").join(s["file"].as_str().unwrap())).unwrap();
        assert_eq!(f.checksum, s["checksum"].as_str().unwrap());
    }
}

#[test]
fn polytope_empty_and_single_vertex() {
    let dir = tempfile::tempdir().unwrap();
    let out = inflacert(dir.path(), &["polytope", "--u", "0.95", "--vertices"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("empty"));
    assert!(!stdout(&out).lines().any(|l| l.starts_with("vertex,")));

    let out = inflacert(dir.path(), &["polytope", "--u", "0.7071068", "--vertices", "-o", "p.csv"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("p.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some(inflacert_cli::POLYTOPE_HEADER));
    let vertices: Vec<&str> = csv.lines().filter(|l| l.starts_with("vertex,")).collect();
    assert_eq!(vertices, ["vertex,0,,0.0,0.0,0.0,0.0,,,"]);
    assert_eq!(csv.lines().filter(|l| l.starts_with("halfspace,")).count(), 16);
}

#[test]
fn slice_is_a_closed_quadrilateral() {
    let dir = tempfile::tempdir().unwrap();
    let out = inflacert(dir.path(), &["polytope", "--u", "0.8090", "--project-f2f3"]);
    assert_eq!(out.status.code(), Some(0));
    let slice: Vec<String> = stdout(&out).lines().filter(|l| l.starts_with("slice,")).map(str::to_owned).collect();
    assert_eq!(slice.len(), 5);
    let tail = |l: &str| l.rsplitn(3, ',').take(2).collect::<Vec<_>>().join(",");
    assert_eq!(tail(&slice[0]), tail(&slice[4]));
}

#[test]
fn tampered_file_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = inflacert(dir.path(), &["certify", "--u", "0.8090", "--F", "qplus-vertex", "--t", "-1", "-o", "c.json"]);
    assert_eq!(out.status.code(), Some(0));
    let path = dir.path().join("c.json");
    let text = std::fs::read_to_string(&path).unwrap();
    let file = CertificateFile::parse(&text).unwrap();
    assert_eq!(CertificateFile::parse(&file.to_json()).unwrap(), file);

    let mut tampered = file.clone();
    tampered.rows[0].y = "2.0".into();
    std::fs::write(&path, tampered.to_json()).unwrap();
    let v = inflacert(dir.path(), &["verify", "-i", "c.json"]);
    assert_eq!(v.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&v.stderr).contains("checksum"));
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(inflacert(dir.path(), &["certify", "--u", "0.8"]).status.code(), Some(2));
    let out = inflacert(dir.path(), &["certify", "--u", "0.5", "--F", "qplus-vertex", "--t", "-1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = inflacert(dir.path(), &["certify", "--u", "0.809", "--exact", "--F", "qplus-vertex", "--t", "-1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn mode_override() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_inflacert"))
        .args(["certify", "--u", "55/73", "--F", "qplus-vertex", "--t", "-1", "-o", "f.json"])
        .current_dir(dir.path())
        .env("INFLACERT_MODE", "float")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let file = CertificateFile::read(&dir.path().join("f.json")).unwrap();
    assert_eq!(file.provenance.mode, "float");
}

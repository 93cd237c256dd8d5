use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn pbe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pbe"))
        .args(args)
        .env_remove("PBE_LOG_PRECISION_CAP")
        .output()
        .expect("spawn pbe")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn thales() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data/thales.geo")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("pbe-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn geom_thales_proves_and_verifies() {
    let dir = scratch("thales");
    let cert = dir.join("cert.json");
    let out = pbe(&["geom", thales().to_str().unwrap(), "--out", cert.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("verdict: PROVED"));

    let out = pbe(&["verify", cert.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("VALID"));
}

#[test]
fn tampered_certificate_is_rejected() {
    let dir = scratch("tamper");
    let cert = dir.join("cert.json");
    assert_eq!(
        pbe(&["geom", thales().to_str().unwrap(), "--out", cert.to_str().unwrap()]).status.code(),
        Some(0)
    );
    let text = std::fs::read_to_string(&cert).unwrap();
    let mut json: serde_json::Value = serde_json::from_str(&text).unwrap();
    json["witness"]["free"][0] = serde_json::Value::String("1/3".into());
    std::fs::write(&cert, json.to_string()).unwrap();

    let out = pbe(&["verify", cert.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).starts_with("INVALID"));
}

#[test]
fn certificates_are_deterministic() {
    let dir = scratch("det");
    let a = dir.join("a.json");
    let b = dir.join("b.json");
    for p in [&a, &b] {
        let out = pbe(&["geom", thales().to_str().unwrap(), "--procedure", "dimension", "--out", p.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn kronecker_disproves_nonzero_polynomial() {
    let out = pbe(&["kronecker", "14*x^2+4*x+4"]);
    assert_eq!(out.status.code(), Some(0));
    let s = stdout(&out);
    assert!(s.contains("g_kr(100)"), "{s}");
    assert!(s.contains("140404"), "{s}");
    assert!(s.contains("verdict: DISPROVED"), "{s}");
}

#[test]
fn kronecker_proves_zero_polynomial() {
    let out = pbe(&["kronecker", "(x+y)^2 - x^2 - 2*x*y - y^2"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("verdict: PROVED"));
}

#[test]
fn system_json_round_trips_through_subcommands() {
    let dir = scratch("sys");
    let sys = dir.join("sys.json");
    let out = pbe(&["geom", thales().to_str().unwrap(), "--system-out", sys.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let s = sys.to_str().unwrap();

    let out = pbe(&["dichotomy", s]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("verdict: CASE1"));

    let out = pbe(&["bounds", s]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("log eps"));

    let out = pbe(&["nss-bounds", s, "--variant", "general"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn starved_precision_is_inconclusive() {
    let out = pbe(&["geom", thales().to_str().unwrap(), "--precision", "8", "--escalations", "0"]);
    let s = stdout(&out);
    assert_eq!(out.status.code(), Some(2), "{s}");
    assert!(s.contains("verdict: INCONCLUSIVE"), "{s}");
}

#[test]
fn bad_input_exits_with_error() {
    let dir = scratch("bad");
    let prog = dir.join("bad.geo");
    std::fs::write(&prog, "point A\ngoal on_circle(A, B)\n").unwrap();
    let out = pbe(&["geom", prog.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));

    let out = pbe(&["certify", "/nonexistent/system.json"]);
    assert_eq!(out.status.code(), Some(1));
}

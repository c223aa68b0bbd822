use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn hsflow(args: &[&str], out: Option<&Path>) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_hsflow"));
    c.args(args);
    if let Some(o) = out {
        c.arg("--out").arg(o);
    }
    c.output().unwrap()
}

fn code(args: &[&str]) -> i32 {
    hsflow(args, None).status.code().unwrap()
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&["--help"]), 0);
    assert_eq!(code(&["--version"]), 0);
    assert_eq!(code(&["cones", "--help"]), 0);
}

#[test]
fn passing_suite_exits_zero() {
    let o = hsflow(&["verify-soliton", "--p", "2", "--q", "1"], None);
    assert_eq!(o.status.code(), Some(0));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.lines().last().unwrap() == "verdict: pass", "{stdout}");
}

#[test]
fn failing_tolerance_exits_one() {
    // no distinct pair of cones is 10 apart
    assert_eq!(code(&["cones", "--p", "3", "--q", "2", "--tol-distinct", "10"]), 1);
}

#[test]
fn empty_level_set_is_inconclusive() {
    assert_eq!(code(&["lambda", "--lambdas", "1,1", "--level", "-1"]), 2);
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(code(&[]), 64);
    assert_eq!(code(&["frobnicate"]), 64);
    assert_eq!(code(&["cones", "--p", "3"]), 64);
    assert_eq!(code(&["cones", "--p", "4", "--q", "2"]), 64);
    assert_eq!(code(&["cones", "--p", "2", "--q", "3"]), 64);
    assert_eq!(code(&["lambda", "--lambdas", "0,1"]), 64);
    assert_eq!(code(&["sweep", "--pairs", "3-2"]), 64);
    let o = hsflow(&["theorem", "--which", "1.2", "--p", "2", "--q", "1"], None);
    assert_eq!(o.status.code(), Some(64));
    assert!(String::from_utf8(o.stderr).unwrap().contains("q > 1"));
}

#[test]
fn report_and_series_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let o = hsflow(&["brakke", "--p", "3", "--q", "2", "--which", "1.2"], Some(dir.path()));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let json: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("brakke_1.2_p3_q2.json")).unwrap()).unwrap();
    assert_eq!(json["verdict"], "pass");
    assert!(!json["cells"].as_array().unwrap().is_empty());
    let mut limits = 0;
    for e in fs::read_dir(dir.path()).unwrap() {
        let name = e.unwrap().file_name().to_string_lossy().into_owned();
        if name.starts_with("limit_") {
            let text = fs::read_to_string(dir.path().join(&name)).unwrap();
            assert!(!text.contains('\r'));
            // header and t₀·2⁻ᵏ for k = 0…10
            assert_eq!(text.lines().count(), 12, "{name}");
            assert_eq!(text.lines().next().unwrap(), "t,delta,error");
            limits += 1;
        }
    }
    assert!(limits > 0);
}

#[test]
fn reruns_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["verify-immersion", "--p", "5", "--q", "3", "--grid", "8"];
    hsflow(&args, Some(a.path()));
    hsflow(&args, Some(b.path()));
    let read = |d: &Path| fs::read(d.join("verify-immersion_p5_q3.json")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
}

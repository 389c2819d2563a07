use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cli(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_taylor-nets")).args(args).current_dir(dir).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("good.net"), "(net (ports (a ax) (b ax)) (wires) (axioms (a b)) (cuts) (boxes))").unwrap();
    fs::write(dir.path().join("bad.net"), "(net (ports (a bot) (t tensor)) (wires (a -> t :left)) (axioms) (cuts) (boxes))").unwrap();
    fs::write(dir.path().join("broken.net"), "(net (ports (a wobble)))").unwrap();
    assert_eq!(code(&cli(&["validate", "good.net"], dir.path())), 0);
    assert_eq!(code(&cli(&["validate", "bad.net"], dir.path())), 1);
    assert_eq!(code(&cli(&["validate", "broken.net"], dir.path())), 2);
    assert_eq!(code(&cli(&["validate", "missing.net"], dir.path())), 2);
}

#[test]
fn expand_rebuild_and_compare() {
    let dir = tempfile::tempdir().unwrap();
    let mut built = 0;
    for seed in ["5", "17", "23", "42"] {
        let out = cli(&["gen", "--depth", "2", "--boxes", "3", "--cosize", "3", "--seed", seed], dir.path());
        assert_eq!(code(&out), 0);
        fs::write(dir.path().join("original.net"), stdout(&out)).unwrap();
        assert_eq!(code(&cli(&["expand", "original.net", "--uniform", "1", "-o", "t1.net"], dir.path())), 0);
        let k = cli(&["expand", "original.net", "--k", "7", "--seed", "1", "-o", "t0.net"], dir.path());
        if code(&k) == 2 {
            continue;
        }
        assert_eq!(code(&cli(&["rebuild", "t0.net", "t1.net", "-o", "out.net"], dir.path())), 0);
        let iso = cli(&["iso", "out.net", "original.net", "--fix-conclusions"], dir.path());
        assert_eq!(code(&iso), 0, "seed {seed}: {}", stdout(&iso));
        built += 1;
    }
    assert!(built >= 2);
}

#[test]
fn iso_reports_a_negative_verdict() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("a.net"), "(net (ports (a one)) (wires) (axioms) (cuts) (boxes))").unwrap();
    fs::write(dir.path().join("b.net"), "(net (ports (a bot)) (wires) (axioms) (cuts) (boxes))").unwrap();
    let out = cli(&["iso", "a.net", "b.net"], dir.path());
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("not isomorphic"));
}

#[test]
fn experiment_prints_a_signed_point() {
    let dir = tempfile::tempdir().unwrap();
    let text = "(net (ports (o bang)) (wires) (axioms) (cuts)
      (boxes (box o (net (ports (u one)) (wires) (axioms) (cuts) (boxes)) (doors (u -> o)))))";
    fs::write(dir.path().join("r.net"), text).unwrap();
    let out = cli(&["experiment", "r.net", "--k", "3", "--seed", "0"], dir.path());
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).trim(), "(point (o (+ [(+ *) (+ *) (+ *)])))");
}

#[test]
fn roundtrip_reports_its_count() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli(&["roundtrip", "--trials", "50", "--seed", "7"], dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).starts_with("50/50 ≡"), "{}", stdout(&out));
}

use std::path::Path;
use std::process::{Command, Output};

fn hardgraph(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hardgraph"))
        .args(args)
        .current_dir(cwd)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn sample_build_generate_check_bench() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();

    let o = hardgraph(&["sample", "--n", "6", "--m", "8", "--seed", "3", "--out", "s"], d);
    assert!(o.status.success());
    let xor = d.join("s/xor-n6-m8-s3-t0.xor");
    assert!(std::fs::read_to_string(&xor).unwrap().starts_with("p cnf 6 8\n"));

    // 4m + 2n + 3(n - 1) vertices.
    let o = hardgraph(&["build", xor.to_str().unwrap(), "--format", "dimacs"], d);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with(&format!("p edge {} ", 4 * 8 + 2 * 6 + 3 * 5)));

    let o = hardgraph(
        &["generate", "--n", "12", "--ratio", "2", "--seed", "5", "--count", "3", "--no-gauss-filter", "--out", "b"],
        d,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = hardgraph(&["check", "b"], d);
    assert!(o.status.success(), "{}", stdout(&o));

    let o = hardgraph(&["bench", "b", "--timeout", "10", "--solver", "bliss=./no-such-bliss", "--out", "r"], d);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(d.join("r/results.csv")).unwrap();
    assert!(csv.starts_with("instance,n_vars,m,vertices,solver,time,status,nodes\n"));
    assert!(csv.contains(",bliss,0.000000,ERROR,"));
    assert!(d.join("r/internal.dat").exists());
    assert!(d.join("r/growth.txt").exists());
}

#[test]
fn generate_is_repeatable() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &'static str| ["generate", "--n", "10", "--ratio", "2", "--seed", "9", "--count", "4", "--no-gauss-filter", "--out", out];
    assert!(hardgraph(&args("a"), dir.path()).status.success());
    assert!(hardgraph(&args("b"), dir.path()).status.success());
    let index_a = std::fs::read(dir.path().join("a/index.toml")).unwrap();
    let index_b = std::fs::read(dir.path().join("b/index.toml")).unwrap();
    assert_eq!(index_a, index_b);
}

#[test]
fn tampered_batch_fails_check() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = hardgraph(&["generate", "--n", "10", "--ratio", "2", "--seed", "2", "--no-gauss-filter", "--out", "b"], d);
    assert!(o.status.success());
    let xor = std::fs::read_dir(d.join("b/instances"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.extension().is_some_and(|e| e == "xor"))
        .expect("one accepted instance");
    let text = std::fs::read_to_string(&xor).unwrap();
    std::fs::write(&xor, text.replacen(" 0\n", " 0\nc tampered\n", 1)).unwrap();
    let o = hardgraph(&["check", "b"], d);
    assert!(!o.status.success());
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn rejects_bad_arguments() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(hardgraph(&["generate", "--n", "3", "--m", "1", "--out", "x"], dir.path()).status.code(), Some(2));
    assert!(!hardgraph(&["generate", "--n", "8", "--m", "10", "--ratio", "2", "--out", "x"], dir.path()).status.success());
    assert!(!hardgraph(&["bench", "nothing", "--solver", "mystery"], dir.path()).status.success());
}

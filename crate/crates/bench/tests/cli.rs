use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_parex-bench"))
}

#[test]
fn unknown_problem_exits_with_one() {
    let out = bin().args(["reference", "--problem", "nope"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bad_thread_env_exits_with_one() {
    let out = bin()
        .args(["bench", "--problem", "rober"])
        .env("PAREX_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn reference_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("orego.json");
    let status = bin()
        .args(["reference", "--problem", "orego", "--out"])
        .arg(&path)
        .status()
        .unwrap();
    assert!(status.success());
    let r: parex_bench::ReferenceSolution = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(r.problem, "orego");
    assert_eq!(r.state.len(), 3);
}

#[test]
fn config_file_drives_bench() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bench.toml");
    let out = dir.path().join("out");
    std::fs::write(
        &cfg,
        format!(
            "problem = \"rober\"\nalgs = [\"implicit_euler\"]\nrepeats = 1\nwarmup = 0\nthreads = 2\nout = {:?}\n",
            out.to_str().unwrap()
        ),
    )
    .unwrap();
    let status = bin().arg("--config").arg(&cfg).arg("bench").status().unwrap();
    assert!(status.success());
    let points = parex_bench::read_csv(&out.join("rober.csv")).unwrap();
    // three tolerances, serial and threaded
    assert_eq!(points.len(), 6);
    assert!(out.join("rober.svg").exists());
}

//! End-to-end checks of the command-line surface: exit codes, output
//! determinism, and the witness -> certify -> verify pipeline.

use std::fs;
use std::path::PathBuf;
use std::process::Command;

fn cache_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli-cache")
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli-scratch");
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_covercert"))
        .args(args)
        .env("COVERCERT_CACHE", cache_dir())
        .output()
        .expect("spawn covercert");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn usage_errors_exit_64() {
    let (code, _, _) = run(&[]);
    assert_eq!(code, 64);
    let (code, _, _) = run(&["frobnicate"]);
    assert_eq!(code, 64);
    let (code, _, _) = run(&["tables"]);
    assert_eq!(code, 64);
    let (code, _, _) = run(&["witness"]);
    assert_eq!(code, 64);
    let (code, _, _) = run(&["witness", "--r", "1", "--kind", "both"]);
    assert_eq!(code, 64);
}

#[test]
fn computational_failures_name_the_error() {
    let (code, _, err) = run(&["witness", "--r", "4", "--a", "3", "--kind", "sierpinski"]);
    assert_eq!(code, 1);
    assert!(err.contains("HypothesisFailed"), "stderr: {err}");
}

#[test]
fn same_argv_same_bytes() {
    let (c1, out1, _) = run(&["tables", "g"]);
    let (c2, out2, _) = run(&["tables", "g"]);
    assert_eq!(c1, 0);
    assert_eq!(c2, 0);
    assert_eq!(out1, out2);

    let (c1, w1, _) = run(&["witness", "--r", "2", "--seed", "0"]);
    let (c2, w2, _) = run(&["witness", "--r", "2", "--seed", "0"]);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(w1, w2);
}

#[test]
fn witness_verify_pipeline() {
    let cert = scratch("r1.cert");
    let (code, _, _) = run(&[
        "witness",
        "--r",
        "1",
        "--kind",
        "sierpinski",
        "--out",
        cert.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let (code, out, _) = run(&["verify", "--in", cert.to_str().unwrap()]);
    assert_eq!(code, 0, "verify output:\n{out}");
    assert!(out.contains("verdict: VERIFIED"));
}

#[test]
fn certify_pipeline_and_malformed_exit() {
    let wit = scratch("r3.wit");
    let (code, _, _) = run(&[
        "witness",
        "--r",
        "3",
        "--emit",
        "witness",
        "--out",
        wit.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let cert = scratch("r3.cert");
    let (code, _, _) = run(&[
        "certify",
        "--in",
        wit.to_str().unwrap(),
        "--out",
        cert.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let (code, _, _) = run(&["verify", "--in", cert.to_str().unwrap()]);
    assert_eq!(code, 0);

    // truncating the certificate must exit 2
    let text = fs::read_to_string(&cert).unwrap();
    let cut = scratch("r3-cut.cert");
    fs::write(&cut, &text[..text.len() - 25]).unwrap();
    let (code, _, _) = run(&["verify", "--in", cut.to_str().unwrap()]);
    assert_eq!(code, 2);

    // tampering k must exit 1
    let bad = scratch("r3-bad.cert");
    let tampered = text.replace("\nk 1", "\nk 2");
    assert_ne!(tampered, text);
    fs::write(&bad, tampered).unwrap();
    let (code, out, _) = run(&["verify", "--in", bad.to_str().unwrap()]);
    assert_eq!(code, 1, "verify output:\n{out}");
    assert!(out.contains("verdict: REFUTED"));
}

#[test]
fn exceptional_r_fails_with_named_error() {
    // 2564 = 4 * 641: neither digit is witnessed and the pair has no
    // product witness, and it is too large for the eleven-prime route
    let (code, _, err) = run(&["witness", "--r", "2564"]);
    assert_eq!(code, 1);
    assert!(err.contains("ConditionUnsatisfied"), "stderr: {err}");
}

#[test]
fn every_subcommand_has_help() {
    for cmd in [
        "tables",
        "density",
        "witness",
        "certify",
        "verify",
        "covering",
        "zsigmondy",
    ] {
        let (code, out, _) = run(&[cmd, "--help"]);
        assert_eq!(code, 0, "{cmd} --help");
        assert!(out.contains(cmd), "{cmd} help names itself");
    }
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("commands:"));
}

#[test]
fn zsigmondy_output() {
    let (code, out, _) = run(&["zsigmondy", "--a", "2", "--b", "1", "--n", "6"]);
    assert_eq!(code, 0);
    assert_eq!(out, "exception\n");
    let (code, out, _) = run(&["zsigmondy", "--a", "2", "--b", "1", "--n", "32"]);
    assert_eq!(code, 0);
    assert_eq!(out, "primitive 65537\n");
}

#[test]
fn covering_files_round_trip_through_cli() {
    let cov = scratch("tau6.cov");
    let (code, _, _) = run(&[
        "covering",
        "standard",
        "--tau",
        "6",
        "--out",
        cov.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let (code, out, _) = run(&[
        "covering",
        "verify",
        "--in",
        cov.to_str().unwrap(),
        "--m",
        "1",
    ]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("covers true"));
    assert!(out.contains("primitive true"));

    // a covering that is not one
    let halfcov = scratch("half.cov");
    fs::write(&halfcov, "covercert-covering v1 a=2 b=1 m=1\n0 2 3\n").unwrap();
    let (code, out, _) = run(&[
        "covering",
        "verify",
        "--in",
        halfcov.to_str().unwrap(),
        "--m",
        "1",
    ]);
    assert_eq!(code, 1);
    assert!(out.contains("covers false"));
}

#[test]
fn both_kinds_over_a_partitioned_covering() {
    // two disjoint 1-coverings for a = 104 (a+1 = 3*5*7, a^2+1 = 29*373),
    // written as blank-line separated groups
    let cov = scratch("disjoint104.cov");
    fs::write(
        &cov,
        "covercert-covering v1 a=104 b=1 m=2\n0 2 3\n1 2 5\n\n1 2 7\n0 4 29\n2 4 373\n",
    )
    .unwrap();
    let (code, out, _) = run(&[
        "covering",
        "verify",
        "--in",
        cov.to_str().unwrap(),
        "--m",
        "2",
    ]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("min-multiplicity 2"));
    assert!(out.contains("primitive true"));

    let cert = scratch("both104.cert");
    let (code, _, err) = run(&[
        "witness",
        "--covering",
        cov.to_str().unwrap(),
        "--kind",
        "both",
        "--out",
        cert.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "witness: {err}");
    let text = fs::read_to_string(&cert).unwrap();
    assert!(
        text.contains(" +\n") && text.contains(" -\n"),
        "both signs expected"
    );
    let (code, out, _) = run(&["verify", "--in", cert.to_str().unwrap()]);
    assert_eq!(code, 0, "verify: {out}");
}

#[test]
fn jobs_flag_does_not_change_output() {
    let (c1, out1, _) = run(&["tables", "tenprimes", "--jobs", "1"]);
    let (c2, out2, _) = run(&["tables", "tenprimes", "--jobs", "2", "--recompute"]);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(out1, out2);
}

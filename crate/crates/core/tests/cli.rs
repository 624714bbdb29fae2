use std::fs;
use std::process::Command;

use multigila::generators;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_multigila"));
    c.env_remove("MULTIGILA_WORKERS");
    c
}

#[test]
fn empty_input_fails() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("empty.txt");
    fs::write(&input, "").unwrap();
    let out = bin().arg("layout").arg(&input).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn missing_input_fails() {
    let out = bin().args(["layout", "/nonexistent/graph.txt"]).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn flags_override_config_file_which_overrides_env() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    fs::write(&conf, "# test\nseed = 9\nworkers = 3\n[layout]\nmass_repulsion = off\nideal_length = 2\n").unwrap();
    let out = bin()
        .env("MULTIGILA_WORKERS", "5")
        .args(["layout", "g.txt", "--print-config", "--seed", "4", "--config"])
        .arg(&conf)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("seed = 4\n"), "{text}");
    assert!(text.contains("workers = 3\n"));
    assert!(text.contains("mass_repulsion = off\n"));
    assert!(text.contains("ideal_length = 2\n"));
    assert!(text.contains("input = g.txt\n"));

    let out = bin().env("MULTIGILA_WORKERS", "5").args(["layout", "--print-config"]).output().unwrap();
    assert!(String::from_utf8(out.stdout).unwrap().contains("workers = 5\n"));
}

#[test]
fn printed_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let first = bin().args(["layout", "--print-config", "--sun-probability", "0.3", "--coarsen-threshold", "12"]).output().unwrap();
    let conf = dir.path().join("printed.conf");
    fs::write(&conf, &first.stdout).unwrap();
    let second = bin().args(["layout", "--print-config", "--config"]).arg(&conf).output().unwrap();
    assert!(second.status.success());
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn invalid_values_are_rejected() {
    for args in [
        vec!["--sun-probability", "0"],
        vec!["--workers", "0"],
        vec!["--mass-repulsion", "maybe"],
        vec!["--coarsen-threshold", "1"],
    ] {
        let out = bin().args(["layout", "--print-config"]).args(&args).output().unwrap();
        assert!(!out.status.success(), "{args:?}");
    }
}

#[test]
fn writes_all_artifacts_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("g.txt");
    fs::write(&input, generators::sierpinski(3).to_edge_list()).unwrap();
    let run = |name: &str, workers: &str| {
        let coords = dir.path().join(format!("{name}.coords"));
        let out = bin()
            .arg("layout")
            .arg(&input)
            .arg("--coords")
            .arg(&coords)
            .arg("--svg")
            .arg(dir.path().join(format!("{name}.svg")))
            .arg("--report")
            .arg(dir.path().join(format!("{name}.json")))
            .args(["--workers", workers, "--seed", "3", "--partitions", "2"])
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        assert!(String::from_utf8_lossy(&out.stdout).contains("cre"));
        fs::read(coords).unwrap()
    };
    let a = run("a", "1");
    let b = run("b", "4");
    assert_eq!(a, b);
    assert!(dir.path().join("a.svg").exists() && dir.path().join("a.json").exists());
}

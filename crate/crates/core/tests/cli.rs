//! Command-line contract: exit codes, outputs and manifests.

use std::path::Path;
use std::process::{Command, Output};

fn nclab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nclab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).trim().to_string()
}

#[test]
fn moments_prints_the_dichotomy() {
    let tmp = tempfile::tempdir().unwrap();
    let free = nclab(
        &[
            "moments",
            "--pattern",
            "Q0,Q1,Q0,Q1",
            "--statistics",
            "boltzmann",
        ],
        tmp.path(),
    );
    assert_eq!(free.status.code(), Some(0));
    assert_eq!(stdout(&free), "0.0");
    let bose = nclab(
        &[
            "moments",
            "--pattern",
            "Q0,Q1,Q0,Q1",
            "--statistics",
            "bose",
        ],
        tmp.path(),
    );
    assert_eq!(bose.status.code(), Some(0));
    assert_eq!(stdout(&bose), "1.0");
    assert!(tmp.path().join("run.json").exists());
    assert!(tmp.path().join("moments.json").exists());
}

#[test]
fn out_of_range_mode_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = nclab(
        &["moments", "--pattern", "Q0,Q9", "--modes", "2"],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("mode 9"));
}

#[test]
fn usage_errors_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    for args in [
        &["frobnicate"][..],
        &["moments", "--pattern", "X0"],
        &["moments", "--pattern", "Q0", "--statistics", "fermi"],
        &["wigner", "--n", "1"],
        &["quench", "--spec", "1,0.5"],
        &["chsh", "--backend", "classical", "--samples", "10"],
        &["limit", "--lambdas", "0.2,0.3"],
        &["moments", "--pattern", "Q0", "--workers", "0"],
    ] {
        assert_eq!(nclab(args, tmp.path()).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn capacity_refusals_exit_three() {
    let tmp = tempfile::tempdir().unwrap();
    for args in [
        &[
            "fock",
            "--pattern",
            "Q0,Q1",
            "--modes",
            "6",
            "--max-len",
            "6",
        ][..],
        &["partition", "--n-spins", "13"],
        &["wigner", "--max-degree", "9", "--n", "8"],
        &["chsh-search", "--resolution", "10"],
    ] {
        assert_eq!(nclab(args, tmp.path()).status.code(), Some(3), "{args:?}");
    }
}

#[test]
fn unwritable_output_directory_exits_three() {
    let tmp = tempfile::tempdir().unwrap();
    let blocker = tmp.path().join("file");
    std::fs::write(&blocker, b"x").unwrap();
    let o = nclab(&["moments", "--pattern", "Q0,Q0"], &blocker.join("sub"));
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn help_exits_zero() {
    let o = Command::new(env!("CARGO_BIN_EXE_nclab"))
        .arg("--help")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    for sub in [
        "moments",
        "fock",
        "limit",
        "wigner",
        "quench",
        "partition",
        "chsh",
        "chsh-search",
    ] {
        assert!(text.contains(sub), "{sub} missing from help");
    }
}

#[test]
fn csv_layouts() {
    let tmp = tempfile::tempdir().unwrap();
    let w = tmp.path().join("w");
    assert!(nclab(
        &["wigner", "--n", "16", "--samples", "4", "--max-degree", "4"],
        &w
    )
    .status
    .success());
    let text = std::fs::read_to_string(w.join("freeness.csv")).unwrap();
    assert!(text.starts_with("pattern,estimate,stderr,prediction,zscore\n"));
    assert!(!text.contains('\r'));

    let p = tmp.path().join("p");
    assert!(nclab(
        &[
            "partition",
            "--n-spins",
            "3",
            "--draws",
            "200",
            "--betas",
            "1,0,0.5"
        ],
        &p
    )
    .status
    .success());
    let text = std::fs::read_to_string(p.join("partition.csv")).unwrap();
    let betas: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(betas, vec![0.0, 0.5, 1.0]);
    // nine significant digits in CSV, seventeen in JSON
    let row = text.lines().nth(3).unwrap();
    assert_eq!(row.split(',').next().unwrap(), "1.00000000e0");
    let json = std::fs::read_to_string(p.join("partition.json")).unwrap();
    assert!(json.contains("\"beta\": 5.0000000000000000e-1"));
}

#[test]
fn config_file_and_flag_precedence() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"pattern": "Q0,Q0,Q0,Q0", "statistics": "bose"}"#).unwrap();
    let cfg_arg = cfg.to_str().unwrap();
    let o = nclab(&["moments", "--config", cfg_arg], &tmp.path().join("a"));
    assert_eq!(stdout(&o), "3.0");
    let o = nclab(
        &["moments", "--config", cfg_arg, "--statistics", "boltzmann"],
        &tmp.path().join("b"),
    );
    assert_eq!(stdout(&o), "2.0");

    std::fs::write(&cfg, r#"{"pattern": "Q0", "unknown-key": 1}"#).unwrap();
    assert_eq!(
        nclab(&["moments", "--config", cfg_arg], tmp.path())
            .status
            .code(),
        Some(2)
    );
    std::fs::write(&cfg, "not json").unwrap();
    assert_eq!(
        nclab(&["moments", "--config", cfg_arg], tmp.path())
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn manifest_reruns_the_command() {
    let tmp = tempfile::tempdir().unwrap();
    let first = tmp.path().join("first");
    let args = [
        "quench",
        "--p",
        "3",
        "--spec",
        "uniform",
        "--spec",
        "axis2",
        "--n",
        "24",
        "--samples",
        "3",
    ];
    assert!(nclab(&args, &first).status.success());
    let manifest = first.join("run.json");
    let text = std::fs::read_to_string(&manifest).unwrap();
    assert!(text.contains("\"subcommand\": \"quench\""));
    assert!(text.contains("\"version\""));
    let second = tmp.path().join("second");
    let o = nclab(&["quench", "--config", manifest.to_str().unwrap()], &second);
    assert!(o.status.success());
    for file in ["run.json", "quench.json"] {
        assert_eq!(
            std::fs::read(first.join(file)).unwrap(),
            std::fs::read(second.join(file)).unwrap(),
            "{file}"
        );
    }
    // a manifest for another subcommand is refused
    let o = nclab(
        &["wigner", "--config", manifest.to_str().unwrap()],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn output_directory_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_nclab"))
        .args(["moments", "--pattern", "Q0,Q0"])
        .env("NCLAB_OUT_DIR", tmp.path().join("env"))
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(tmp.path().join("env/run.json").exists());
}

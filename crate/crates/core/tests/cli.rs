use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use specsense::harness::read_results;

fn specsense(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_specsense"))
        .args(args)
        .current_dir(dir)
        .env_remove("SPECSENSE_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn help_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = specsense(&["--help"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("estimate-noise"));
}

#[test]
fn bad_pfa_exits_two_and_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let o = specsense(&["sweep-snr", "--pfa", "1.5"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("pfa"), "{}", stderr(&o));
    assert!(!dir.path().join("results_static.csv").exists());
}

#[test]
fn unwritable_output_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = specsense(
        &[
            "sweep-snr",
            "--trials",
            "20",
            "--snr-min",
            "0",
            "--snr-max",
            "0",
            "--out",
            "missing/dir/r.csv",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).contains("missing/dir"));
}

#[test]
fn sense_prints_one_line() {
    let dir = tempfile::tempdir().unwrap();
    let o = specsense(&["sense", "--snr", "0"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 1);
    for key in ["statistic=", "threshold=", "sigma_hat2=", "verdict=present"] {
        assert!(text.contains(key), "{key} missing from {text}");
    }
}

#[test]
fn sweep_snr_writes_both_curves_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "sweep-snr",
        "--trials",
        "200",
        "--snr-min",
        "-6",
        "--snr-max",
        "0",
        "--snr-step",
        "2",
        "--plot",
    ];
    let o = specsense(&args, dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let first = fs::read(dir.path().join("results_dynamic.csv")).unwrap();
    let stat = read_results(&dir.path().join("results_static.csv")).unwrap();
    assert_eq!(stat.rows.len(), 4);
    let svg = fs::read_to_string(dir.path().join("results.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 2);

    let o = specsense(&args, dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(fs::read(dir.path().join("results_dynamic.csv")).unwrap(), first);
}

#[test]
fn sweep_factor_writes_four_curves() {
    let dir = tempfile::tempdir().unwrap();
    let o = specsense(
        &[
            "sweep-factor",
            "--trials",
            "200",
            "--snr-min",
            "-4",
            "--snr-max",
            "4",
            "--snr-step",
            "4",
            "--out",
            "f.csv",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for f in ["1", "1.5", "2", "2.5"] {
        let r = read_results(&dir.path().join(format!("f_factor{f}.csv"))).unwrap();
        assert_eq!(r.rows.len(), 3);
    }
}

#[test]
fn config_file_and_env_seed_precedence() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("exp.conf"), "# small run\ntrials = 100\nseed = 3\n").unwrap();
    let run = |extra: &[&str], env_seed: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_specsense"));
        cmd.args(["sense", "--snr", "-8"]).args(extra).current_dir(dir.path());
        match env_seed {
            Some(s) => cmd.env("SPECSENSE_SEED", s),
            None => cmd.env_remove("SPECSENSE_SEED"),
        };
        stdout(&cmd.output().unwrap())
    };
    let seed3 = run(&["--seed", "3"], None);
    assert_eq!(run(&["--config", "exp.conf"], Some("9")), seed3);
    assert_eq!(run(&[], Some("3")), seed3);
    assert_ne!(run(&["--config", "exp.conf", "--seed", "4"], None), seed3);

    fs::write(dir.path().join("bad.conf"), "colour = blue\n").unwrap();
    let o = specsense(&["sense", "--config", "bad.conf"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("colour"));
}

use std::path::Path;
use std::process::{Command, Output};

use crossing::annealed::annealed_speed_mc;
use crossing::WalkParams;

fn crossing(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crossing")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).display().to_string()
}

#[test]
fn help_lists_subcommands() {
    let o = crossing(&["--help"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for cmd in ["sweep", "validate", "quenched", "annealed-exact", "annealed-mc", "lyapunov", "sample-paths"] {
        assert!(text.contains(cmd), "{cmd} missing");
    }
    for flag in ["--p", "--M", "--y", "--n", "--seed", "--threads", "--out", "--format", "--config"] {
        assert!(text.contains(flag), "{flag} missing");
    }
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(crossing(&["--bogus"]).status.code(), Some(2));
    assert_eq!(crossing(&["validate", "nope"]).status.code(), Some(2));
    assert_eq!(crossing(&["quenched", "--p", "1.5"]).status.code(), Some(2));
    assert_eq!(crossing(&["annealed-exact", "--format", "svg"]).status.code(), Some(2));
    assert_eq!(crossing(&["sweep", "--methods", "nope"]).status.code(), Some(2));
    let o = crossing(&["sweep", "--methods", "closed-form", "--out", "/nonexistent/dir/out.csv"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn validation_exit_code_follows_report() {
    let o = crossing(&["validate", "closed-forms"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("suite passed"));
    let o = crossing(&["validate", "sandwiches"]);
    let passed = stdout(&o).contains("suite passed");
    assert_eq!(o.status.code(), Some(if passed { 0 } else { 1 }));
    assert!(stdout(&o).contains("measured"));
}

#[test]
fn validation_json() {
    let o = crossing(&["validate", "annealed-formula", "--format", "json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v[0]["suite"], "annealed-formula");
    assert!(v[0]["criteria"][0]["checks"].as_array().unwrap().len() >= 2);
}

#[test]
fn single_cell_sweep_matches_library() {
    let o = crossing(&[
        "sweep",
        "--p",
        "0.4",
        "--M",
        "1.5",
        "--methods",
        "importance-mc",
        "--y",
        "10",
        "--n",
        "4000",
        "--seed",
        "7",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    let row = text.lines().nth(1).unwrap();
    let e = annealed_speed_mc(&WalkParams::new(0.4, 1.5).unwrap(), 10, 4000, 7).unwrap();
    assert_eq!(row, e.estimate.csv_row());
}

#[test]
fn sweep_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &str, threads: &str| {
        vec![
            "sweep",
            "--p-grid",
            "0.3,0.6",
            "--M-grid",
            "0.5,2",
            "--methods",
            "iid-mc,exact-enumeration,closed-form",
            "--y",
            "10",
            "--n",
            "2000",
            "--seed",
            "3",
            "--threads",
            threads,
            "--out",
            out,
        ]
        .into_iter()
        .map(String::from)
        .collect::<Vec<_>>()
    };
    let a = path(dir.path(), "a.csv");
    let b = path(dir.path(), "b.csv");
    for (out, t) in [(&a, "1"), (&b, "2")] {
        let argv = args(out, t);
        let o = crossing(&argv.iter().map(String::as_str).collect::<Vec<_>>());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    assert_eq!(String::from_utf8(ta).unwrap().lines().count(), 13);
}

#[test]
fn interrupted_sweep_resumes() {
    let dir = tempfile::tempdir().unwrap();
    let full = path(dir.path(), "full.csv");
    let part = path(dir.path(), "part.csv");
    let grid =
        ["sweep", "--p-grid", "0.3,0.5", "--M-grid", "1,2", "--methods", "closed-form,exact-enumeration", "--y", "9"];
    let run = |out: &str, extra: &[&str]| {
        let mut v: Vec<&str> = grid.to_vec();
        v.extend_from_slice(&["--out", out]);
        v.extend_from_slice(extra);
        crossing(&v)
    };
    assert!(run(&full, &[]).status.success());

    // a failing cell leaves a marker after the completed rows
    let mut v: Vec<&str> = grid.to_vec();
    v[8] = "40";
    v.extend_from_slice(&["--out", &part]);
    let o = crossing(&v);
    assert_eq!(o.status.code(), Some(1));
    let text = std::fs::read_to_string(&part).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().last().unwrap().starts_with("# incomplete"));

    let full_text = std::fs::read_to_string(&full).unwrap();
    let head: Vec<&str> = full_text.lines().take(4).collect();
    std::fs::write(&part, format!("{}\n# incomplete: interrupted\n", head.join("\n"))).unwrap();
    assert!(run(&part, &["--resume"]).status.success());
    assert_eq!(std::fs::read(&part).unwrap(), std::fs::read(&full).unwrap());
    assert_eq!(run(&full, &["--resume"]).status.code(), Some(2));
}

#[test]
fn svg_is_derived_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    let svg = path(dir.path(), "curves.svg");
    let o = crossing(&[
        "sweep",
        "--p-grid",
        "0.3",
        "--M-grid",
        "0.5,1,2",
        "--methods",
        "iid-mc,exact-enumeration",
        "--y",
        "10",
        "--n",
        "2000",
        "--format",
        "svg",
        "--out",
        &svg,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg") && text.contains("sqrt(2pM)"));
    let csv = std::fs::read_to_string(dir.path().join("curves.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7);
    assert!(String::from_utf8_lossy(&o.stderr).contains("note:"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = path(dir.path(), "run.conf");
    std::fs::write(&cfg, "p = 0.3\nM = 2\nmethods = closed-form\n").unwrap();
    let o = crossing(&["sweep", "--config", &cfg]);
    assert!(o.status.success());
    assert!(stdout(&o).lines().nth(1).unwrap().starts_with("closed-form,0.3,2,"));
    let o = crossing(&["sweep", "--config", &cfg, "--p", "0.6"]);
    assert!(stdout(&o).lines().nth(1).unwrap().starts_with("closed-form,0.6,2,"));
    std::fs::write(&cfg, "colour = red\n").unwrap();
    assert_eq!(crossing(&["sweep", "--config", &cfg]).status.code(), Some(2));
}

#[test]
fn single_runs() {
    let o = crossing(&["quenched", "--p", "0.5", "--M", "2", "--n", "500"]);
    assert!(o.status.success());
    assert!(stdout(&o).lines().nth(1).unwrap().starts_with("iid-mc,0.5,2,"));

    let o = crossing(&["annealed-exact", "--p", "0.4", "--M", "1", "--y", "5"]);
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("gaps,weight,t_cond"));
    assert_eq!(text.lines().count(), 1 + 16);

    let o = crossing(&["annealed-mc", "--p", "0.4", "--M", "1", "--y", "8", "--n", "2000", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["t_ann"].as_f64().unwrap() >= 8.0);

    let o = crossing(&["lyapunov", "--p", "0.5", "--M", "1", "--n", "5000", "--lambda", "0.2"]);
    assert!(stdout(&o).starts_with("p,M,lambda,y,exponent,seed\n0.5,1,0.2,5000,"));
}

#[test]
fn path_dump() {
    let dir = tempfile::tempdir().unwrap();
    let env = path(dir.path(), "env.txt");
    std::fs::write(&env, "0 4 0 0 1 0 0\n").unwrap();
    let o = crossing(&["sample-paths", "--env", &env, "--n", "3", "--seed", "5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let paths: Vec<&str> = text.split("\n\n").collect();
    assert_eq!(paths.len(), 3);
    for p in paths {
        let sites: Vec<i64> = p.lines().map(|l| l.parse().unwrap()).collect();
        assert_eq!(sites[0], 0);
        assert_eq!(*sites.last().unwrap(), 4);
    }
}

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_gapclique"));
    cmd.env_remove("GAPCLIQUE_OUT_DIR");
    cmd
}

fn run<S: AsRef<std::ffi::OsStr>>(dir: &Path, args: &[S]) -> Output {
    bin().current_dir(dir).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// gen-vecsum, check-map and reduce at the default tiny parameters.
fn prepare(dir: &Path, out: &str, extra: &[&str]) {
    let with = |args: &[&str]| -> Vec<String> {
        args.iter()
            .chain(&["--out-dir", out])
            .chain(extra)
            .map(|s| s.to_string())
            .collect()
    };
    assert_eq!(code(&run(dir, &with(&["gen-vecsum", "--seed", "7"]))), 0);
    let inst = format!("{out}/instance.json");
    assert_eq!(
        code(&run(dir, &with(&["check-map", "--seed", "7", "--instance", &inst]))),
        0
    );
    let map = format!("{out}/map.json");
    let r = run(
        dir,
        &with(&["reduce", "--seed", "7", "--instance", &inst, "--map", &map]),
    );
    assert_eq!(code(&r), 0, "{}", stderr(&r));
}

#[test]
fn full_pipeline_succeeds() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    prepare(d, "o", &[]);
    let base = [
        "--seed",
        "7",
        "--out-dir",
        "o",
        "--instance",
        "o/instance.json",
        "--map",
        "o/map.json",
    ];
    let r = run(d, &[&["verify-complete"], &base[..]].concat());
    assert_eq!(code(&r), 0, "{}", stderr(&r));
    let cert = json(&d.join("o/complete.json"));
    assert_eq!(cert["payload"]["is_clique"], true);
    assert_eq!(cert["payload"]["clique_size"], 4);
    assert_eq!(cert["seed"], 7);
    assert_eq!(cert["config_hash"].as_str().unwrap().len(), 64);

    assert_eq!(
        code(&run(
            d,
            &["solve", "--seed", "7", "--out-dir", "o", "--graph", "o/graph.json"]
        )),
        0
    );
    let solved = json(&d.join("o/solve.json"));
    assert_eq!(solved["payload"]["exact"]["optimal"], true);
    assert!(solved["payload"]["exact"]["size"].as_u64().unwrap() >= 4);

    let r = run(d, &[&["extract", "--clique", "o/solve.json"], &base[..]].concat());
    assert_eq!(code(&r), 0, "{}", stderr(&r));
    let report = json(&d.join("o/extract.json"));
    assert_eq!(report["payload"]["verdict"]["verdict"], "witness");
}

#[test]
fn export_writes_readable_dimacs() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    prepare(d, "o", &[]);
    assert_eq!(
        code(&run(d, &["export", "--out-dir", "o", "--graph", "o/graph.json"])),
        0
    );
    let text = std::fs::read_to_string(d.join("o/graph.dimacs")).unwrap();
    assert!(text.starts_with("c gapclique seed=0 config_hash="));
    assert!(text.contains("p edge 40 "));
    let r = run(
        d,
        &[
            "solve",
            "--out-dir",
            "o",
            "--graph",
            "o/graph.dimacs",
            "--output",
            "dimacs-solve.json",
        ],
    );
    assert_eq!(code(&r), 0, "{}", stderr(&r));
    let a = json(&d.join("o/dimacs-solve.json"));
    assert_eq!(a["payload"]["n"], 40);
    assert_eq!(a["payload"]["exact"]["labels"], Value::Null);
}

#[test]
fn vertex_cap_refusal_reports_exact_count() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    prepare(d, "o", &[]);
    let r = run(
        d,
        &[
            "reduce",
            "--out-dir",
            "o",
            "--instance",
            "o/instance.json",
            "--map",
            "o/map.json",
            "--vertex-cap",
            "39",
        ],
    );
    assert_eq!(code(&r), 2);
    assert!(stderr(&r).contains("|V| = 40"), "{}", stderr(&r));
}

#[test]
fn same_seed_gives_identical_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    prepare(d, "a", &["--q", "3", "--ell", "1"]);
    prepare(d, "b", &["--q", "3", "--ell", "1"]);
    for name in ["instance.json", "map.json", "graph.json"] {
        let a = std::fs::read(d.join("a").join(name)).unwrap();
        let b = std::fs::read(d.join("b").join(name)).unwrap();
        assert_eq!(a, b, "{name} differs");
    }
    run(d, &["gen-vecsum", "--seed", "8", "--out-dir", "c"]);
    assert_ne!(
        std::fs::read(d.join("a/instance.json")).unwrap(),
        std::fs::read(d.join("c/instance.json")).unwrap()
    );
}

#[test]
fn flags_override_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    std::fs::write(
        d.join("cfg.json"),
        r#"{"seed": 3, "q": 3, "m": 2, "out_dir": "fromfile"}"#,
    )
    .unwrap();
    assert_eq!(code(&run(d, &["gen-vecsum", "--config", "cfg.json"])), 0);
    let from_file = json(&d.join("fromfile/instance.json"));
    assert_eq!(from_file["seed"], 3);
    assert_eq!(from_file["payload"]["q"], 3);
    assert_eq!(from_file["payload"]["m"], 2);

    assert_eq!(
        code(&run(
            d,
            &["gen-vecsum", "--config", "cfg.json", "--q", "5", "--out-dir", "flags"]
        )),
        0
    );
    let overridden = json(&d.join("flags/instance.json"));
    assert_eq!(overridden["payload"]["q"], 5);
    assert_eq!(overridden["payload"]["m"], 2);
    assert_ne!(overridden["config_hash"], from_file["config_hash"]);

    std::fs::write(d.join("bad.json"), r#"{"seed": 3, "colour": "red"}"#).unwrap();
    assert_eq!(code(&run(d, &["gen-vecsum", "--config", "bad.json"])), 4);
}

#[test]
fn output_directory_comes_from_the_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let r = bin()
        .current_dir(d)
        .env("GAPCLIQUE_OUT_DIR", "envdir")
        .args(["gen-vecsum"])
        .output()
        .unwrap();
    assert_eq!(code(&r), 0);
    assert!(d.join("envdir/instance.json").exists());
    let r = bin()
        .current_dir(d)
        .env("GAPCLIQUE_OUT_DIR", "envdir")
        .args(["gen-vecsum", "--out-dir", "flagdir"])
        .output()
        .unwrap();
    assert_eq!(code(&r), 0);
    assert!(d.join("flagdir/instance.json").exists());
}

#[test]
fn output_names_cannot_escape_the_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    for name in ["../escape.json", "sub/x.json", "..", ""] {
        let r = run(d, &["gen-vecsum", "--out-dir", "o", "--output", name]);
        assert_eq!(code(&r), 1, "{name}");
    }
    assert!(!d.join("escape.json").exists());
}

#[test]
fn exit_codes_distinguish_failures() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let r = run(d, &["check-map", "--out-dir", "o", "--instance", "missing.json"]);
    assert_eq!(code(&r), 4);

    assert_eq!(code(&run(d, &["gen-vecsum", "--out-dir", "o", "--n", "6"])), 0);
    // the first single-coordinate map sampled for seed 0 leaves an image at zero
    let r = run(
        d,
        &[
            "check-map",
            "--out-dir",
            "o",
            "--instance",
            "o/instance.json",
            "--ell",
            "1",
            "--map-attempts",
            "1",
            "--n",
            "6",
        ],
    );
    assert_eq!(code(&r), 3, "{}", stderr(&r));
    assert_eq!(json(&d.join("o/map.json"))["payload"]["good"], false);

    assert_eq!(code(&run(d, &["gen-vecsum", "--paper-faithful", "--q", "5"])), 1);
    assert_eq!(code(&run(d, &["gen-vecsum", "--m", "0"])), 1);
    assert_eq!(code(&run(d, &["no-such-command"])), 1);
    assert_eq!(code(&run(d, &["--help"])), 0);
}

#[test]
fn paper_faithful_reduction_is_refused_with_its_size() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let pf = ["--paper-faithful", "--k", "1", "--n", "3", "--m", "2", "--out-dir", "o"];
    assert_eq!(code(&run(d, &[&["gen-vecsum"], &pf[..]].concat())), 0);
    assert_eq!(json(&d.join("o/instance.json"))["payload"]["q"], 4099);
    let r = run(d, &[&["check-map", "--instance", "o/instance.json"], &pf[..]].concat());
    assert_eq!(code(&r), 0, "{}", stderr(&r));
    let r = run(
        d,
        &[
            &["reduce", "--instance", "o/instance.json", "--map", "o/map.json"],
            &pf[..],
        ]
        .concat(),
    );
    assert_eq!(code(&r), 2);
    // (Q^2 - Q) X^2 + Q X with Q = 4099, X = 4099^2
    let q: u128 = 4099;
    let x = q * q;
    let count = (q * q - q) * x * x + q * x;
    assert!(stderr(&r).contains(&format!("|V| = {count}")), "{}", stderr(&r));
}

#[test]
fn experiment_suites_write_json_lines() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let r = run(
        d,
        &[
            "experiment",
            "--suite",
            "completeness",
            "--q",
            "2",
            "--k",
            "2",
            "--ell",
            "1",
            "--trials",
            "3",
            "--out-dir",
            "o",
        ],
    );
    assert_eq!(code(&r), 0, "{}", stderr(&r));
    let text = std::fs::read_to_string(d.join("o/completeness.jsonl")).unwrap();
    let lines: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines[0]["kind"], "header");
    assert_eq!(lines.len(), 4);
    assert!(lines[1..]
        .iter()
        .all(|r| r["status"] == "pass" && r["measured"]["clique_size"] == 256));

    let r = run(
        d,
        &[
            "experiment",
            "--suite",
            "lintest",
            "--q",
            "3",
            "--trials",
            "5",
            "--out-dir",
            "o",
        ],
    );
    assert_eq!(code(&r), 0, "{}", stderr(&r));

    let r = run(
        d,
        &["experiment", "--suite", "soundness", "--trials", "2", "--out-dir", "o"],
    );
    assert_eq!(code(&r), 0, "{}", stderr(&r));

    let r = run(
        d,
        &[
            "experiment",
            "--suite",
            "props",
            "--q",
            "5",
            "--m",
            "2",
            "--n",
            "6",
            "--ells",
            "1,6",
            "--trials",
            "30",
            "--out-dir",
            "o",
        ],
    );
    let text = std::fs::read_to_string(d.join("o/props.jsonl")).unwrap();
    let rows: Vec<Value> = text.lines().skip(1).map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(rows[0]["status"], "report-only");
    assert!(rows[0]["measured"]["either"]["rate"].as_f64().unwrap() > 0.5);
    let trend_ok = rows[2]["status"] == "pass";
    assert_eq!(code(&r), if trend_ok { 0 } else { 3 });
}

#[test]
fn lintest_decodes_linear_tables_to_their_coefficients() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let args = [
        "lintest",
        "--kind",
        "linear",
        "--q",
        "5",
        "--dim",
        "2",
        "--out-dir",
        "o",
    ];
    let r = run(d, &[&args[..], &["--delta", "1/2", "--c-list", "1/3"]].concat());
    assert_eq!(code(&r), 0, "{}", stderr(&r));
    let report = json(&d.join("o/lintest.json"));
    assert_eq!(report["payload"]["pass_probability"]["value"], "1/1");
    assert_eq!(report["payload"]["decoded"].as_array().unwrap().len(), 1);
    assert_eq!(code(&run(d, &[&args[..], &["--delta", "0"]].concat())), 1);
    assert_eq!(code(&run(d, &[&args[..], &["--c-list", "x"]].concat())), 1);
}

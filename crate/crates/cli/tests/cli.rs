use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn spectregap(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spectregap"))
        .args(args)
        .current_dir(dir)
        .env_remove("SPECTREGAP_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn gen_then_analyze_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let g = spectregap(
        &[
            "gen", "--family", "rogue", "--n", "9", "--mode", "rational", "-o", "a9.json",
        ],
        dir.path(),
    );
    assert_eq!(g.status.code(), Some(0));
    assert!(dir.path().join("a9.json").exists());

    let a = spectregap(&["analyze", "--bounds", "a9.json"], dir.path());
    assert_eq!(
        a.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&a.stderr)
    );
    let v: Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(v["n"], 9);
    assert_eq!(v["mod_lambda_m"], 0.0);
    assert!((v["phi"]["upper"].as_f64().unwrap() - 0.2625).abs() < 1e-12);
    for r in v["records"].as_array().unwrap() {
        assert_eq!(r["pass"], true, "{r}");
    }
}

#[test]
fn analyze_outputs() {
    let dir = tempfile::tempdir().unwrap();
    spectregap(
        &["gen", "--family", "cycle", "--n", "5", "-o", "c5.mtx"],
        dir.path(),
    );

    let s = spectregap(&["analyze", "--spectrum", "c5.mtx"], dir.path());
    assert_eq!(s.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&s)).unwrap();
    assert_eq!(v["nontrivial_eigs"].as_array().unwrap().len(), 4);
    assert_eq!(v["lambda2"].as_array().unwrap().len(), 2);

    let p = spectregap(&["analyze", "--phi", "c5.mtx"], dir.path());
    let v: Value = serde_json::from_str(&stdout(&p)).unwrap();
    assert!((v["phi"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert_eq!(v["method"], "brute_force");
    assert!(v["argmin_cut"]["members"].is_u64());

    let val = spectregap(&["analyze", "--validate", "c5.mtx"], dir.path());
    let v: Value = serde_json::from_str(&stdout(&val)).unwrap();
    assert_eq!(v["doubly_stochastic_ok"], true);
    assert_eq!(v["lazy_ok"], false);
}

#[test]
fn mix_reports() {
    let dir = tempfile::tempdir().unwrap();
    spectregap(
        &["gen", "--family", "uniform", "--n", "4", "-o", "j.json"],
        dir.path(),
    );

    let m = spectregap(&["mix", "j.json", "--eps", "0.25"], dir.path());
    assert_eq!(m.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&m)).unwrap();
    assert_eq!(v["tau"]["steps"], 1);

    let c = spectregap(&["mix", "j.json", "--continuous"], dir.path());
    assert_eq!(c.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&c)).unwrap();
    assert!(v["t"].as_f64().unwrap() > 0.0);

    let pairs: Vec<String> = (0..4)
        .flat_map(|a| {
            (0..4)
                .filter(move |&b| b != a)
                .map(move |b| format!("\"{a},{b}\": [[{a}, {b}]]"))
        })
        .collect();
    std::fs::write(
        dir.path().join("paths.json"),
        format!("{{\"paths\": {{{}}}}}", pairs.join(", ")),
    )
    .unwrap();
    let p = spectregap(&["mix", "j.json", "--paths", "paths.json"], dir.path());
    assert_eq!(
        p.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&p.stderr)
    );
    let v: Value = serde_json::from_str(&stdout(&p)).unwrap();
    assert!(v["rho"].as_f64().unwrap().is_finite());

    let partial = r#"{"paths": {"0,1": [[0, 1]]}}"#;
    std::fs::write(dir.path().join("partial.json"), partial).unwrap();
    let o = spectregap(&["mix", "j.json", "--paths", "partial.json"], dir.path());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["rho"].is_null());
}

#[test]
fn sweep_gamma_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = spectregap(&["sweep", "--gamma", "--n-list", "4,9,16"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,witness,inv_sqrt_n,inv_35n");
    assert_eq!(lines.len(), 4);
    assert!(lines[2].starts_with("9,0.2625,"));
}

#[test]
fn verify_prints_every_criterion_and_flags_the_failure() {
    let dir = tempfile::tempdir().unwrap();
    let o = spectregap(&["verify", "--quick"], dir.path());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 13);
    for id in 1..=12 {
        assert!(text.contains(&format!("PASS [c{id:02}]")), "{text}");
    }
    assert!(text.contains("FAIL [c13]"));
    assert_eq!(o.status.code(), Some(2));

    let one = spectregap(&["verify", "--quick", "--only", "1,3"], dir.path());
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(stdout(&one).lines().count(), 2);
}

#[test]
fn usage_and_domain_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 6] = [
        &[
            "gen", "--family", "rogue", "--n", "10", "--mode", "rational",
        ],
        &["gen", "--family", "kv", "--p", "9"],
        &["gen", "--family", "rogue"],
        &["analyze", "--bounds", "missing.json"],
        &["frobnicate"],
        &["verify", "--only", "14"],
    ];
    for args in cases {
        let o = spectregap(args, dir.path());
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn output_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let run = |seed: &str, out: &str| {
        let o = spectregap(
            &[
                "--seed", seed, "gen", "--family", "random", "--n", "6", "-o", out,
            ],
            dir.path(),
        );
        assert_eq!(o.status.code(), Some(0));
        std::fs::read(dir.path().join(out)).unwrap()
    };
    assert_eq!(run("11", "a.json"), run("11", "b.json"));
    assert_ne!(run("11", "a.json"), run("12", "c.json"));

    let env = Command::new(env!("CARGO_BIN_EXE_spectregap"))
        .args(["gen", "--family", "random", "--n", "6", "-o", "d.json"])
        .current_dir(dir.path())
        .env("SPECTREGAP_SEED", "11")
        .output()
        .unwrap();
    assert_eq!(env.status.code(), Some(0));
    assert_eq!(
        std::fs::read(dir.path().join("d.json")).unwrap(),
        run("11", "a.json")
    );

    let t1 = stdout(&spectregap(
        &[
            "--threads",
            "1",
            "sweep",
            "--n-list",
            "4,9,25",
            "--format",
            "json",
        ],
        dir.path(),
    ));
    let t4 = stdout(&spectregap(
        &[
            "--threads",
            "4",
            "sweep",
            "--n-list",
            "4,9,25",
            "--format",
            "json",
        ],
        dir.path(),
    ));
    assert_eq!(t1, t4);
}

#[test]
fn show_config_reflects_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let o = spectregap(&["--show-config", "--phi-n-limit", "12"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["phi_n_limit"], 12);
    assert_eq!(v["bound_slack"], 1e-9);
}

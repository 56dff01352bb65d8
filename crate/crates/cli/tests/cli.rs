use std::process::{Command, Output};

fn pplab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pplab"))
        .args(args)
        .env("PPLAB_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn value_after(text: &str, key: &str) -> f64 {
    let line = text
        .lines()
        .find(|l| l.starts_with(key))
        .unwrap_or_else(|| panic!("no '{key}' line in:\n{text}"));
    line.split('=').nth(1).unwrap().split_whitespace().next().unwrap().parse().unwrap()
}

#[test]
fn bounds_example() {
    let out = pplab(&["bounds", "--gamma", "0.9", "--T", "100", "--v", "0.5", "--r", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(value_after(&text, "T_gamma "), 10.0);
    assert_eq!(value_after(&text, "C_gamma "), 4.5);
    let prop1 = value_after(&text, "monotone lower bound");
    assert!((prop1 - 2.3717).abs() < 1e-4, "{prop1}");
}

#[test]
fn bounds_json_and_rstar() {
    let out = pplab(&[
        "bounds", "--gamma", "0.7", "--T", "100", "--v", "1", "--r", "3", "--gamma0", "0.75",
        "--json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let j: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(j["r_star"], 17);
    assert!((j["r_bar_star"].as_f64().unwrap() - 16.556).abs() < 1e-3);
    assert!(j["bound_thm1"].as_f64().unwrap() > 0.0);
}

#[test]
fn verify_dp_oracle_passes() {
    let out = pplab(&["verify", "dp-oracle", "--cases", "100"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).lines().any(|l| l.starts_with("PASS")));
    assert!(!stdout(&out).contains("FAIL"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(pplab(&["bounds", "--bogus"]).status.code(), Some(2));
    assert_eq!(pplab(&["verify", "no-such-suite"]).status.code(), Some(2));
    let bad = pplab(&["bounds", "--gamma", "1.2", "--T", "10", "--v", "0.5"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("invalid parameter"));
    let sweep = pplab(&["sweep"]);
    assert_eq!(sweep.status.code(), Some(2));
}

#[test]
fn simulate_truthful_fast_search() {
    let out = pplab(&[
        "simulate", "--seller", "fast-search", "--gamma", "0.9", "--v", "0.3", "--T", "256",
        "--buyer", "truthful", "--json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let j: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(j["buyer"], "truthful");
    assert_eq!(j["lie_count"], 0);
    // (v + 1) times the phase bound for T = 256 (K = 4).
    assert!(j["regret"].as_f64().unwrap() <= 1.3 * 4.0);
}

#[test]
fn simulate_dp_matches_brute_force() {
    let base = ["simulate", "--seller", "pfs", "--r", "2", "--gamma", "0.8", "--v", "0.7", "--T", "10", "--json"];
    let run = |buyer: &str| {
        let mut args = base.to_vec();
        args.extend(["--buyer", buyer]);
        let out = pplab(&args);
        assert_eq!(out.status.code(), Some(0));
        serde_json::from_slice::<serde_json::Value>(&out.stdout).unwrap()["surplus"]
            .as_f64()
            .unwrap()
    };
    assert!((run("dp") - run("brute")).abs() < 1e-9);
}

#[test]
fn sweep_writes_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.json");
    std::fs::write(
        &config,
        r#"{
            "version": 1,
            "sellers": [{"kind": "fast-search"}, {"kind": "pfs", "r": {"policy": "fixed", "value": 2}}],
            "buyer": {"kind": "truthful"},
            "horizons": [64, 16],
            "gamma": 0.8,
            "v": 0.6
        }"#,
    )
    .unwrap();
    let csv = dir.path().join("rows.csv");
    let svg = dir.path().join("plot.svg");
    let out = pplab(&[
        "sweep",
        "--config",
        config.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
        "--svg",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = pplab_core::harness::read_csv(&csv).unwrap();
    let keys: Vec<_> = rows.iter().map(|r| (r.seller.as_str(), r.horizon)).collect();
    assert_eq!(keys, [("fast-search", 16), ("fast-search", 64), ("pfs", 16), ("pfs", 64)]);
    let text = std::fs::read_to_string(&svg).unwrap();
    assert!(text.contains("<svg") && text.trim_end().ends_with("</svg>"));
}

#[test]
fn sweep_to_stdout_is_deterministic() {
    let args = ["sweep", "--figure", "--T", "50,120", "--gamma", "0.8", "--v", "0.6"];
    let a = pplab(&args);
    let b = pplab(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).starts_with("seller,buyer,semantics,T,"));
    assert_eq!(stdout(&a).lines().count(), 5);
}

#[test]
fn bad_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.json");
    std::fs::write(&config, r#"{"version": 1, "surprise": true}"#).unwrap();
    let out = pplab(&["sweep", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn tree_dot_export() {
    let out = pplab(&["tree", "--seller", "pfs", "--r", "2", "--depth", "3", "--nodes", "--format", "dot"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("digraph"), "{text}");
}

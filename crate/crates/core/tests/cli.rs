//! The command-line front end, through the library entry point and the binary.

use std::process::Command;

use wdm_epon::cli;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wdm-epon"))
}

fn write_config(dir: &tempfile::TempDir, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const SMALL: &str = "scenario = small\nN = 4\nonu_delays = 10us, 60us, 120us, 200us\nd_max = 16000\ntotal_load = 0.5\n";

#[test]
fn analyze_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = write_config(&dir, "ok.conf", SMALL);
    let out = bin().args(["analyze", "--config"]).arg(&ok).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("predicted capacity"));

    let out = bin().args(["analyze", "--config"]).arg(&ok).args(["--loads", "0.5,0.99"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stdout).unwrap().contains("ONU"));

    let bad = write_config(&dir, "bad.conf", "N = 4\nwat = 3\n");
    assert_eq!(bin().args(["analyze", "--config"]).arg(&bad).status().unwrap().code(), Some(1));
    assert_eq!(bin().args(["analyze"]).status().unwrap().code(), Some(1));
    assert_eq!(bin().args(["frobnicate"]).status().unwrap().code(), Some(1));
}

#[test]
fn analyze_reference_preset() {
    let mut out = Vec::new();
    let args = cli::NetworkArgs {
        config: None,
        preset: Some("fig7".into()),
        scheduler: None,
        loads: vec![0.8],
    };
    assert_eq!(cli::cmd_analyze(&args, &mut out).unwrap(), 0);
    let text = String::from_utf8(out).unwrap();
    assert!(text.contains("predicted capacity 0.8830"), "{text}");
}

#[test]
fn simulate_twice_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "s.conf", SMALL);
    let go = |tag: &str| {
        let csv = dir.path().join(format!("{tag}.csv"));
        let trace = dir.path().join(format!("{tag}.trace"));
        let st = bin()
            .args(["simulate", "--seed", "7", "--duration-s", "0.05", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&csv)
            .arg("--trace")
            .arg(&trace)
            .status()
            .unwrap();
        assert_eq!(st.code(), Some(0));
        (std::fs::read(csv).unwrap(), std::fs::read(trace).unwrap())
    };
    let a = go("a");
    let b = go("b");
    assert_eq!(a, b);
    let csv = String::from_utf8(a.0).unwrap();
    assert!(csv.starts_with("scenario,scheduler,L,seed,"));
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn zero_load_run_is_pure_polling() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "z.conf", &SMALL.replace("total_load = 0.5", "total_load = 0"));
    let out = bin().args(["simulate", "--duration-s", "0.05", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let csv = String::from_utf8(out.stdout).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    // mean cycle is the switchover, 4 REPORT slots
    let cycle: f64 = row[7].parse().unwrap();
    assert!((cycle - 4.0 * 2.12).abs() < 1e-3, "{cycle}");
}

#[test]
fn single_saturated_onu_carries_its_grant_share() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &dir,
        "one.conf",
        "N = 1\nonu_delays = 50us\nd_max = 16000\ntotal_load = 1.5\n",
    );
    let out = bin().args(["simulate", "--duration-s", "0.5", "--config"]).arg(&cfg).output().unwrap();
    let csv = String::from_utf8(out.stdout).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    let carried: f64 = row[10].parse().unwrap();
    let expect = 16_000.0 / 18_120.0;
    assert!((carried - expect).abs() < 2e-3, "{carried} vs {expect}");
    assert_eq!(row[11], "false");
}

#[test]
fn sweep_overrides_and_orders_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let st = bin()
        .args([
            "sweep", "--preset", "fig5", "--loads", "0.2,0.4", "--scheduler", "gate_single,report_driven",
            "--replications", "2", "--duration-s", "0.05", "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    let text = std::fs::read_to_string(out).unwrap();
    let rows: Vec<Vec<String>> = text.lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect();
    assert_eq!(rows.len(), 8);
    let keys: Vec<(String, String, String)> = rows.iter().map(|r| (r[4].clone(), r[1].clone(), r[3].clone())).collect();
    assert_eq!(keys[0], ("0.200000".into(), "gate_single".into(), "1".into()));
    assert_eq!(keys[1], ("0.200000".into(), "gate_single".into(), "2".into()));
    assert_eq!(keys[2], ("0.200000".into(), "report_driven".into(), "1".into()));
    assert_eq!(keys[7], ("0.400000".into(), "report_driven".into(), "2".into()));
    // GATE-driven rows carry predictions computed from the simulated config
    assert!(!rows[0][12].is_empty() && rows[2][12].is_empty());

    let st = bin().args(["sweep", "--preset", "fig5", "--loads", "0.4,0.2"]).status().unwrap();
    assert_eq!(st.code(), Some(1));
    let st = bin().args(["sweep", "--preset", "nope"]).status().unwrap();
    assert_eq!(st.code(), Some(1));
}

//! End-to-end checks of the CLI surface: subcommands, flags, exit codes,
//! and artifact emission.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_coofdma"))
}

fn repo(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .join(rel)
}

fn temp_out(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("coofdma_cli_{tag}_{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn airtime_he_mu_with_override_is_176_us() {
    let out = bin()
        .args([
            "airtime",
            "--kind",
            "he-mu",
            "--payload-bytes",
            "500",
            "--ru",
            "106",
            "--mcs",
            "7",
            "--n-sym",
            "9",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(
        text.contains("total: 176.000 us (9 data symbols)"),
        "{text}"
    );
    for field in [
        "L-STF", "L-LTF", "L-SIG", "RL-SIG", "HE-SIG-A", "HE-SIG-B", "HE-STF", "HE-LTF", "Data",
    ] {
        assert!(text.contains(field), "missing {field} in {text}");
    }
    assert!(text.contains("per-tone power boost"), "{text}");
}

#[test]
fn airtime_he_mu_standard_formula_is_162_4_us() {
    let out = bin()
        .args([
            "airtime",
            "--kind",
            "he-mu",
            "--payload-bytes",
            "500",
            "--ru",
            "106",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(stdout(&out).contains("total: 162.400 us (8 data symbols)"));
}

#[test]
fn airtime_legacy_rts_is_52_us() {
    let out = bin()
        .args([
            "airtime",
            "--kind",
            "legacy",
            "--payload-bytes",
            "20",
            "--rate",
            "6",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(stdout(&out).contains("total: 52.000 us"));
}

#[test]
fn power_combines_table_rows() {
    let out = bin()
        .args(["power", "--combine", "-18.05,-17.92"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(stdout(&out).contains("combined_burst_power_dbm: -14.97"));
}

#[test]
fn power_combines_evm_and_noise() {
    let out = bin()
        .args(["power", "--tx-evm-db", "-35", "--snr-db", "38"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(stdout(&out).contains("combined_evm_db: -33.23"));
}

#[test]
fn run_fig1_exits_zero_and_writes_artifacts() {
    let dir = temp_out("fig1");
    let out = bin()
        .args(["run", "--scenario"])
        .arg(repo("scenarios/fig1_hidden_ap.toml"))
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("result: PASS (9/9 checks)"), "{text}");
    for f in [
        "fig1_hidden_ap_summary.txt",
        "fig1_hidden_ap_rtscts_packets.csv",
        "fig1_hidden_ap_co_ofdma_packets.csv",
        "fig1_hidden_ap_co_ofdma_standard_packets.csv",
        "fig1_hidden_ap_co_ofdma_triggers.csv",
    ] {
        assert!(dir.join(f).exists(), "missing {f}");
    }
}

#[test]
fn run_with_plots_writes_svgs() {
    let dir = temp_out("plots");
    let out = bin()
        .args(["run", "--scenario"])
        .arg(repo("scenarios/fig1_hidden_ap.toml"))
        .arg("--out")
        .arg(&dir)
        .arg("--plots")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.join("fig1_hidden_ap_rtscts_schedule.svg").exists());
    assert!(dir.join("fig1_hidden_ap_co_ofdma_schedule.svg").exists());
    let svg = std::fs::read_to_string(dir.join("fig1_hidden_ap_co_ofdma_schedule.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    assert!(svg.contains("CO_OFDMA"));
}

#[test]
fn failing_check_yields_exit_code_one() {
    let dir = temp_out("fail");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("wrong.toml");
    let base = std::fs::read_to_string(repo("scenarios/fig1_hidden_ap.toml")).unwrap();
    std::fs::write(
        &path,
        base.replace(
            "rtscts_completion_us = 532.0",
            "rtscts_completion_us = 500.0",
        ),
    )
    .unwrap();
    let out = bin()
        .args(["run", "--scenario"])
        .arg(&path)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("FAIL rtscts_completion_us"));
}

#[test]
fn invalid_scenario_yields_exit_code_two() {
    let dir = temp_out("invalid");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("broken.toml");
    std::fs::write(&path, "seed = 1\nsim_duration_s = 1.0\nnot_a_key = true\n").unwrap();
    let out = bin()
        .args(["run", "--scenario"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn seed_flag_overrides_the_scenario_seed() {
    let dir = temp_out("seed");
    let out = bin()
        .args(["run", "--scenario"])
        .arg(repo("scenarios/trigger_rtt.toml"))
        .arg("--out")
        .arg(&dir)
        .args(["--seed", "99"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stdout(&out));
    assert!(stdout(&out).contains("seed: 99"));
}

#[test]
fn override_flag_reaches_the_joint_frame() {
    let dir = temp_out("override");
    // Without the override the scenario pins completion to the 9-symbol
    // frame; forcing n_sym=10 must break that exact check.
    let out = bin()
        .args(["run", "--scenario"])
        .arg(repo("scenarios/fig1_hidden_ap.toml"))
        .arg("--out")
        .arg(&dir)
        .args(["--override", "n_sym=10"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("FAIL co_ofdma_completion_us"));
    assert!(stdout(&out).contains("225.600"), "{}", stdout(&out));
}

#[test]
fn cfo_sim_subcommand_writes_series() {
    let dir = temp_out("cfo");
    let out = bin()
        .args(["cfo-sim", "--scenario"])
        .arg(repo("scenarios/cfo_loop.toml"))
        .arg("--out")
        .arg(&dir)
        .arg("--plots")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stdout(&out));
    assert!(dir.join("cfo_loop_cfo_ap1.csv").exists());
    assert!(dir.join("cfo_loop_cfo_ap2.csv").exists());
    assert!(dir.join("cfo_loop_cfo_diff.csv").exists());
    assert!(dir.join("cfo_loop_cfo.svg").exists());
    let csv = std::fs::read_to_string(dir.join("cfo_loop_cfo_ap1.csv")).unwrap();
    assert!(csv.starts_with("time_s,true_offset_hz,est_hz,tuning_word,tuned\n"));
}

#[test]
fn trigger_stats_subcommand_reports_the_mean() {
    let dir = temp_out("trig");
    let out = bin()
        .args(["trigger-stats", "--scenario"])
        .arg(repo("scenarios/trigger_rtt.toml"))
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stdout(&out));
    assert!(stdout(&out).contains("rtt_mean_ns:"));
    assert!(dir.join("trigger_rtt_triggers.csv").exists());
}

#[test]
fn sweep_writes_per_point_outputs_and_index() {
    let dir = temp_out("sweep");
    let out = bin()
        .args(["sweep", "--scenario"])
        .arg(repo("scenarios/cfo_loop.toml"))
        .arg("--out")
        .arg(&dir)
        .args(["--vary", "clock.deadband_counts=1,2"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stdout(&out));
    let sweep_dir = dir.join("sweep_cfo_loop");
    let index = std::fs::read_to_string(sweep_dir.join("index.csv")).unwrap();
    assert!(index.starts_with("point,params,seed,checks_passed\n"));
    assert_eq!(index.lines().count(), 3);
    assert!(index.contains("clock.deadband_counts=1"));
    assert!(sweep_dir
        .join("point_0000")
        .join("cfo_loop_p0_summary.txt")
        .exists());
    assert!(sweep_dir
        .join("point_0001")
        .join("cfo_loop_p1_summary.txt")
        .exists());
}

fn out_dir_env_fallback(dir: &Path) -> Output {
    bin()
        .args(["run", "--scenario"])
        .arg(repo("scenarios/trigger_rtt.toml"))
        .env("COOFDMA_OUT_DIR", dir)
        .output()
        .unwrap()
}

#[test]
fn env_var_sets_the_default_output_directory() {
    let dir = temp_out("envvar");
    let out = out_dir_env_fallback(&dir);
    assert!(out.status.success(), "{}", stdout(&out));
    assert!(dir.join("trigger_rtt_summary.txt").exists());
}

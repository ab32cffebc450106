//! Batch CLI for the coordinated-OFDMA simulator: scenario runs, airtime
//! breakdowns, power combination arithmetic, CFO loop simulation, trigger
//! statistics, and cartesian parameter sweeps.

mod plot;

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use coofdma_core::mac::SchemeKind;
use coofdma_core::phy::{self, McsEntry, PpduKind, RuSize};
use coofdma_core::runner::{self, RunReport};
use coofdma_core::scenario::{Scenario, ScenarioFile};
use coofdma_core::sim::mix64;

/// Default output directory when neither --out nor COOFDMA_OUT_DIR is set.
const DEFAULT_OUT: &str = "out";

#[derive(Parser)]
#[command(
    name = "coofdma",
    version,
    about = "Deterministic simulator for multi-AP coordinated OFDMA over a fiber backhaul"
)]
struct Cli {
    #[command(subcommand)]
    command: Commands,
}

#[derive(Subcommand)]
enum Commands {
    /// Execute a scenario file (MAC schemes, CFO loop, trigger stats as declared)
    Run(ScenarioArgs),
    /// Print the per-field duration breakdown of one PPDU
    Airtime(AirtimeArgs),
    /// Combine transmit powers or EVM/noise contributions
    Power(PowerArgs),
    /// Run only the oscillator tuning loop of a scenario
    CfoSim(ScenarioArgs),
    /// Run only the fiber trigger round-trip statistics of a scenario
    TriggerStats(ScenarioArgs),
    /// Cartesian parameter sweep over a base scenario
    Sweep(SweepArgs),
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario file (TOML)
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory (default: $COOFDMA_OUT_DIR or ./out)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the scenario seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override a scenario knob, e.g. --override n_sym=9
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Also write SVG plots (CFO traces, frame schedule)
    #[arg(long)]
    plots: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AirtimeKind {
    Legacy,
    HeSu,
    HeMu,
}

#[derive(Args)]
struct AirtimeArgs {
    #[arg(long, value_enum)]
    kind: AirtimeKind,
    #[arg(long)]
    payload_bytes: u64,
    /// HE MCS index (0..=11)
    #[arg(long, default_value_t = 7)]
    mcs: u8,
    /// RU width in tones (26, 52, 106, 242)
    #[arg(long, default_value_t = 242)]
    ru: u64,
    #[arg(long, default_value_t = 1)]
    n_ss: u64,
    #[arg(long, default_value_t = 1)]
    sig_b_syms: u64,
    /// Force the data symbol count instead of deriving it
    #[arg(long)]
    n_sym: Option<u64>,
    /// Legacy rate in Mbps (6, 9, 12, 18, 24, 36, 48, 54)
    #[arg(long, default_value_t = 6)]
    rate: u32,
}

#[derive(Args)]
#[command(
    after_help = "EVM values are negative dB (error power relative to signal power); \
more negative is better. Error powers add linearly, so a 3 dB SNR boost buys \
less than 3 dB of received EVM once transmitter noise dominates."
)]
struct PowerArgs {
    /// Per-transmitter burst powers in dBm to sum incoherently
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    combine: Option<Vec<f64>>,
    /// Transmitter EVM floor in dB (negative)
    #[arg(long, allow_negative_numbers = true)]
    tx_evm_db: Option<f64>,
    /// Post-boost channel SNR in dB
    #[arg(long, allow_negative_numbers = true)]
    snr_db: Option<f64>,
}

#[derive(Args)]
struct SweepArgs {
    /// Base scenario file (TOML)
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory (default: $COOFDMA_OUT_DIR or ./out)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Sweep axis, e.g. --vary mac.cw_min=15,31,63 (repeatable; cartesian)
    #[arg(long = "vary", value_name = "KEY=V1,V2,...", required = true)]
    vary: Vec<String>,
    /// Master seed overriding the scenario seed; per-point seeds derive from it
    #[arg(long)]
    seed: Option<u64>,
}

fn out_dir(explicit: &Option<PathBuf>) -> PathBuf {
    explicit
        .clone()
        .or_else(|| std::env::var_os("COOFDMA_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

/// Apply one `key=value` override to a scenario file.
fn apply_override(file: &mut ScenarioFile, key: &str, value: &str) -> Result<()> {
    fn p<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        value
            .parse()
            .map_err(|e| anyhow::anyhow!("override {key}={value}: {e}"))
    }
    match key {
        "n_sym" | "overrides.n_sym" => file.overrides.n_sym = Some(p(key, value)?),
        "backoff" | "overrides.backoff" => file.overrides.backoff = Some(p(key, value)?),
        "seed" => file.seed = p(key, value)?,
        "sim_duration_s" => file.sim_duration_s = p(key, value)?,
        "mac.cw_min" => file.mac.cw_min = p(key, value)?,
        "mac.cw_max" => file.mac.cw_max = p(key, value)?,
        "mac.retry_limit" => file.mac.retry_limit = p(key, value)?,
        "mac.deterministic_backoff" => file.mac.deterministic_backoff = p(key, value)?,
        "mac.cs_required" => file.mac.cs_required = p(key, value)?,
        "mac.ack_enabled" => file.mac.ack_enabled = p(key, value)?,
        "backhaul.one_way_base_ns" => file.backhaul.one_way_base_ns = p(key, value)?,
        "backhaul.jitter_cycles_max" => file.backhaul.jitter_cycles_max = p(key, value)?,
        "clock.drift_ppm_per_min" => file.clock.drift_ppm_per_min = p(key, value)?,
        "clock.deadband_counts" => file.clock.deadband_counts = p(key, value)?,
        "clock.period_s" => file.clock.period_s = p(key, value)?,
        "clock.tuning_enabled" => file.clock.tuning_enabled = p(key, value)?,
        "trigger.trials" => file.trigger.trials = p(key, value)?,
        "traffic.payload_bytes" => {
            let bytes = p(key, value)?;
            for t in &mut file.traffic {
                t.payload_bytes = bytes;
            }
        }
        other => bail!("unknown override key '{other}'"),
    }
    Ok(())
}

fn load_scenario(args: &ScenarioArgs) -> Result<Scenario> {
    let base = Scenario::load(&args.scenario)?;
    let mut file = base.file.clone();
    if let Some(seed) = args.seed {
        file.seed = seed;
    }
    for ov in &args.overrides {
        let (key, value) = ov
            .split_once('=')
            .with_context(|| format!("override '{ov}' is not KEY=VALUE"))?;
        apply_override(&mut file, key.trim(), value.trim())?;
    }
    Ok(Scenario::from_file(&base.name, file)?)
}

fn finish_report(report: &RunReport, dir: &Path) -> Result<i32> {
    let written = report.write_files(dir)?;
    print!("{}", report.summary);
    for path in &written {
        println!("wrote {}", path.display());
    }
    Ok(if report.all_checks_passed() { 0 } else { 1 })
}

fn write_plot(dir: &Path, name: &str, svg: String) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, svg).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(path)
}

fn emit_mac_plots(scenario: &Scenario, dir: &Path) -> Result<()> {
    let Some(scheme) = scenario.file.scheme else {
        return Ok(());
    };
    for kind in scheme.kinds() {
        let n_sym = match kind {
            SchemeKind::CoOfdma => scenario.file.overrides.n_sym,
            SchemeKind::Rtscts => None,
        };
        let metrics = coofdma_core::mac::World::run(scenario.world_config(kind, n_sym)?)?;
        let svg = plot::schedule_svg(
            &scenario.nodes,
            &metrics.frames,
            &format!("{} / {}", scenario.name, kind.label()),
        );
        let path = write_plot(
            dir,
            &format!("{}_{}_schedule.svg", scenario.name, kind.label()),
            svg,
        )?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn emit_cfo_plot(scenario: &Scenario, dir: &Path) -> Result<()> {
    let sim = runner::simulate_cfo(scenario)?;
    let series: Vec<(String, Vec<coofdma_core::report::CfoRow>)> =
        sim.ap_names.into_iter().zip(sim.series).collect();
    let svg = plot::cfo_svg(&series, &format!("{} / residual CFO", scenario.name));
    let path = write_plot(dir, &format!("{}_cfo.svg", scenario.name), svg)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_run(args: ScenarioArgs) -> Result<i32> {
    let scenario = load_scenario(&args)?;
    let dir = out_dir(&args.out);
    let report = runner::run(&scenario)?;
    if args.plots {
        emit_mac_plots(&scenario, &dir)?;
        let c = &scenario.file.checks;
        if c.max_steady_state_diff_hz.is_some()
            || c.max_exceedance_hz.is_some()
            || c.diverges_beyond_hz.is_some()
        {
            emit_cfo_plot(&scenario, &dir)?;
        }
    }
    finish_report(&report, &dir)
}

fn cmd_cfo_sim(args: ScenarioArgs) -> Result<i32> {
    let scenario = load_scenario(&args)?;
    let dir = out_dir(&args.out);
    let report = runner::run_cfo(&scenario)?;
    if args.plots {
        emit_cfo_plot(&scenario, &dir)?;
    }
    finish_report(&report, &dir)
}

fn cmd_trigger_stats(args: ScenarioArgs) -> Result<i32> {
    let scenario = load_scenario(&args)?;
    let dir = out_dir(&args.out);
    let report = runner::run_trigger_stats(&scenario)?;
    finish_report(&report, &dir)
}

fn cmd_airtime(args: AirtimeArgs) -> Result<i32> {
    let (kind, n_sym, total) = match args.kind {
        AirtimeKind::Legacy => {
            let total = phy::legacy_duration(args.payload_bytes, args.rate)?;
            let n_sym = (total.as_ns() - phy::LEGACY_PREAMBLE_NS) / phy::LEGACY_SYM_NS;
            (
                PpduKind::Legacy {
                    rate_mbps: args.rate,
                },
                n_sym,
                total,
            )
        }
        AirtimeKind::HeSu | AirtimeKind::HeMu => {
            let ru = RuSize::from_tones(args.ru).with_context(|| {
                format!("RU must be one of 26/52/106/242 tones, got {}", args.ru)
            })?;
            let mcs = McsEntry::from_index(args.mcs)?;
            let derived = phy::he_n_sym(args.payload_bytes, ru, mcs, args.n_ss);
            let n_sym = args.n_sym.unwrap_or(derived);
            if args.kind == AirtimeKind::HeSu {
                (PpduKind::HeSu, n_sym, phy::he_su_duration(n_sym))
            } else {
                (
                    PpduKind::HeMu {
                        sig_b_syms: args.sig_b_syms,
                    },
                    n_sym,
                    phy::he_mu_duration(n_sym, args.sig_b_syms),
                )
            }
        }
    };

    println!("{:<10} {:>10} {:>13}", "field", "start_us", "duration_us");
    for span in phy::field_breakdown(kind, n_sym) {
        println!(
            "{:<10} {:>10.3} {:>13.3}",
            span.name,
            span.start.as_us_f64(),
            span.duration.as_us_f64()
        );
    }
    println!("total: {:.3} us ({n_sym} data symbols)", total.as_us_f64());
    if matches!(args.kind, AirtimeKind::HeSu | AirtimeKind::HeMu) && args.ru != 242 {
        let ru = RuSize::from_tones(args.ru).expect("validated above");
        println!(
            "per-tone power boost on a {}-tone RU: +{:.3} dB",
            args.ru,
            phy::ru_power_scale_db(ru, phy::CHANNEL_TOTAL_TONES)
        );
    }
    Ok(0)
}

fn cmd_power(args: PowerArgs) -> Result<i32> {
    let mut did_something = false;
    if let Some(dbm) = &args.combine {
        if dbm.is_empty() {
            bail!("--combine needs at least one dBm value");
        }
        let joint = phy::combined_burst_power_dbm(dbm);
        println!("combined_burst_power_dbm: {joint:.3}");
        did_something = true;
    }
    if let (Some(tx), Some(snr)) = (args.tx_evm_db, args.snr_db) {
        let evm = phy::combined_evm_db(tx, snr);
        println!("combined_evm_db: {evm:.3}");
        did_something = true;
    } else if args.tx_evm_db.is_some() || args.snr_db.is_some() {
        bail!("--tx-evm-db and --snr-db must be given together");
    }
    if !did_something {
        bail!("nothing to compute: pass --combine and/or --tx-evm-db with --snr-db");
    }
    Ok(0)
}

/// One sweep axis: key and its candidate values.
struct Axis {
    key: String,
    values: Vec<String>,
}

fn parse_axes(vary: &[String]) -> Result<Vec<Axis>> {
    vary.iter()
        .map(|v| {
            let (key, values) = v
                .split_once('=')
                .with_context(|| format!("--vary '{v}' is not KEY=V1,V2,..."))?;
            let values: Vec<String> = values.split(',').map(|s| s.trim().to_string()).collect();
            if values.is_empty() || values.iter().any(String::is_empty) {
                bail!("--vary '{v}' has an empty value");
            }
            Ok(Axis {
                key: key.trim().to_string(),
                values,
            })
        })
        .collect()
}

fn cartesian(axes: &[Axis]) -> Vec<Vec<(String, String)>> {
    let mut points: Vec<Vec<(String, String)>> = vec![Vec::new()];
    for axis in axes {
        let mut next = Vec::with_capacity(points.len() * axis.values.len());
        for point in &points {
            for value in &axis.values {
                let mut p = point.clone();
                p.push((axis.key.clone(), value.clone()));
                next.push(p);
            }
        }
        points = next;
    }
    points
}

fn cmd_sweep(args: SweepArgs) -> Result<i32> {
    let base = Scenario::load(&args.scenario)?;
    let master_seed = args.seed.unwrap_or(base.file.seed);
    let axes = parse_axes(&args.vary)?;
    let points = cartesian(&axes);
    let dir = out_dir(&args.out).join(format!("sweep_{}", base.name));
    std::fs::create_dir_all(&dir)?;

    let results: Vec<Result<(usize, String, bool)>> = points
        .par_iter()
        .enumerate()
        .map(|(idx, assignments)| {
            let mut file = base.file.clone();
            for (key, value) in assignments {
                apply_override(&mut file, key, value)?;
            }
            // Per-point seed derived from the master seed and point index.
            file.seed = mix64(master_seed ^ mix64(idx as u64 + 1));
            let label = assignments
                .iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect::<Vec<_>>()
                .join(";");
            let scenario = Scenario::from_file(&format!("{}_p{idx}", base.name), file)?;
            let report = runner::run(&scenario)?;
            report.write_files(&dir.join(format!("point_{idx:04}")))?;
            Ok((idx, label, report.all_checks_passed()))
        })
        .collect();

    let mut rows: Vec<(usize, String, bool)> = Vec::new();
    for r in results {
        rows.push(r?);
    }
    rows.sort_by_key(|(idx, _, _)| *idx);

    let mut index = String::from("point,params,seed,checks_passed\n");
    for (idx, label, passed) in &rows {
        index.push_str(&format!(
            "{idx},{label},{},{}\n",
            mix64(master_seed ^ mix64(*idx as u64 + 1)),
            u8::from(*passed)
        ));
    }
    let index_path = dir.join("index.csv");
    std::fs::write(&index_path, index)?;
    println!("swept {} points", rows.len());
    println!("wrote {}", index_path.display());
    Ok(if rows.iter().all(|(_, _, p)| *p) {
        0
    } else {
        1
    })
}

fn main() {
    let cli = Cli::parse();
    let code = match cli.command {
        Commands::Run(args) => cmd_run(args),
        Commands::Airtime(args) => cmd_airtime(args),
        Commands::Power(args) => cmd_power(args),
        Commands::CfoSim(args) => cmd_cfo_sim(args),
        Commands::TriggerStats(args) => cmd_trigger_stats(args),
        Commands::Sweep(args) => cmd_sweep(args),
    };
    match code {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(2);
        }
    }
}

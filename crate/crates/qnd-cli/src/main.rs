//! `qnd` — noise-disturbance analysis of quantum instruments.
//!
//! Subcommands:
//! * `analyze` — run the full pipeline on instrument/observable files and
//!   write an analysis report (exit 0 iff every applicable check passes);
//! * `verify`  — mass-check the tradeoff relations on random instruments
//!   (exit 0 iff zero violations);
//! * `sweep`   — trace a parametrised instrument family into a CSV
//!   noise-disturbance frontier.
//!
//! `QND_THREADS` caps the worker threads used by `verify` and `sweep`.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use qnd_core::disturbance::optimize_disturbance;
use qnd_core::msd;
use qnd_core::noise;
use qnd_core::report::{analyze, AnalysisReport, AnalyzeOptions, CheckStatus};
use qnd_core::schema;
use qnd_core::verify::{aggregate, verify_trial, VerifySummary};
use qnd_core::zoo;

#[derive(Parser)]
#[command(
    name = "qnd",
    version,
    about = "Noise and disturbance of quantum measurements"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Family {
    /// Two-outcome qubit measurement of Pauli X with tunable strength,
    /// disturbance taken against Pauli Z.
    WeakMeasurement,
}

#[derive(Subcommand)]
enum Command {
    /// Analyse one instrument against an observable pair.
    Analyze {
        /// Instrument file (qnd/1 JSON).
        #[arg(long)]
        instrument: PathBuf,
        /// Observable measured for noise (qnd/1 JSON).
        #[arg(long = "obs-x")]
        obs_x: PathBuf,
        /// Observable whose disturbance is bracketed (qnd/1 JSON).
        #[arg(long = "obs-z")]
        obs_z: PathBuf,
        /// Random restarts for the disturbance upper bound.
        #[arg(long, default_value_t = 32)]
        restarts: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Report destination (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Mass-check the tradeoff relations on random instruments.
    Verify {
        /// Hilbert-space dimension (2, 3, or 4).
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Outcomes per instrument (defaults to the dimension).
        #[arg(long)]
        outcomes: Option<usize>,
        /// Kraus operators per outcome.
        #[arg(long = "kraus-per-outcome", default_value_t = 1)]
        kraus_per_outcome: usize,
        /// Where to write the JSON summary (stdout summary always printed).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep a parametrised instrument family into a CSV frontier.
    Sweep {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long, default_value_t = 0.0)]
        from: f64,
        #[arg(long, default_value_t = 1.0)]
        to: f64,
        #[arg(long, default_value_t = 21)]
        steps: usize,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 32)]
        restarts: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Analyze {
            instrument,
            obs_x,
            obs_z,
            restarts,
            seed,
            out,
            format,
        } => cmd_analyze(
            &instrument,
            &obs_x,
            &obs_z,
            restarts,
            seed,
            out.as_deref(),
            format,
        ),
        Command::Verify {
            dim,
            trials,
            seed,
            outcomes,
            kraus_per_outcome,
            out,
        } => cmd_verify(
            dim,
            trials,
            seed,
            outcomes,
            kraus_per_outcome,
            out.as_deref(),
        ),
        Command::Sweep {
            family,
            from,
            to,
            steps,
            out,
            restarts,
            seed,
        } => cmd_sweep(family, from, to, steps, &out, restarts, seed),
    }
}

fn read_file(path: &Path, what: &str) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{what} '{}': {e}", path.display()))
}

fn write_file(path: &Path, contents: &str) -> Result<(), String> {
    std::fs::write(path, contents).map_err(|e| format!("writing '{}': {e}", path.display()))
}

/// 17 significant digits: enough to round-trip any f64.
fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn cmd_analyze(
    instrument: &Path,
    obs_x: &Path,
    obs_z: &Path,
    restarts: u32,
    seed: u64,
    out: Option<&Path>,
    format: Format,
) -> Result<ExitCode, String> {
    let inst = schema::parse_instrument(&read_file(instrument, "instrument file")?)
        .map_err(|e| format!("instrument '{}': {e}", instrument.display()))?;
    let x = schema::parse_observable(&read_file(obs_x, "observable file")?)
        .map_err(|e| format!("observable '{}': {e}", obs_x.display()))?;
    let z = schema::parse_observable(&read_file(obs_z, "observable file")?)
        .map_err(|e| format!("observable '{}': {e}", obs_z.display()))?;

    let instrument_id = instrument
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "instrument".into());
    let opts = AnalyzeOptions {
        restarts,
        seed,
        instrument_id,
    };
    let report = analyze(&inst, &x, &z, &opts).map_err(|e| e.to_string())?;

    let rendered = match format {
        Format::Json => report.to_json(),
        Format::Csv => report_to_csv(&report),
    };
    match out {
        Some(path) => write_file(path, &rendered)?,
        None => println!("{}", rendered.trim_end_matches('\n')),
    }

    let failed: Vec<&str> = report
        .checks
        .iter()
        .filter(|c| c.status == CheckStatus::Fail)
        .map(|c| c.name.as_str())
        .collect();
    if failed.is_empty() {
        eprintln!("all {} checks passed", report.checks.len());
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("FAILED checks: {}", failed.join(", "));
        Ok(ExitCode::from(1))
    }
}

/// Flat `key,value` rendering of a report.
fn report_to_csv(report: &AnalysisReport) -> String {
    let mut rows = vec![
        ("instrument_id".to_string(), report.instrument_id.clone()),
        ("dim_in".to_string(), report.dim_in.to_string()),
        ("dim_out".to_string(), report.dim_out.to_string()),
        ("n_outcomes".to_string(), report.n_outcomes.to_string()),
        ("c".to_string(), fmt17(report.c)),
        ("noise_x".to_string(), fmt17(report.noise_x)),
        ("noise_z".to_string(), fmt17(report.noise_z)),
        (
            "disturbance_lower".to_string(),
            fmt17(report.disturbance_lower),
        ),
        (
            "disturbance_upper".to_string(),
            fmt17(report.disturbance_upper),
        ),
        ("p_e_map".to_string(), fmt17(report.p_e_map)),
        ("fano_upper".to_string(), fmt17(report.fano_upper)),
    ];
    if let Some(m) = &report.msd {
        rows.push(("msd.v_n".to_string(), fmt17(m.v_n)));
        rows.push(("msd.v_d".to_string(), fmt17(m.v_d)));
        rows.push(("msd.s_x".to_string(), fmt17(m.s_x)));
        rows.push(("msd.s_z".to_string(), fmt17(m.s_z)));
        rows.push(("msd.lhs".to_string(), fmt17(m.lhs)));
        rows.push(("msd.rhs".to_string(), fmt17(m.rhs)));
    }
    for check in &report.checks {
        let status = match check.status {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "fail",
            CheckStatus::Skipped => "skipped",
        };
        rows.push((format!("check.{}.status", check.name), status.to_string()));
        if let Some(m) = check.margin {
            rows.push((format!("check.{}.margin", check.name), fmt17(m)));
        }
    }
    let mut csv = String::from("key,value\n");
    for (k, v) in rows {
        csv.push_str(&format!("{k},{v}\n"));
    }
    csv
}

fn thread_pool() -> Result<rayon::ThreadPool, String> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("QND_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| format!("QND_THREADS must be a positive integer, got '{v}'"))?;
        if n == 0 {
            return Err("QND_THREADS must be at least 1".into());
        }
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| e.to_string())
}

fn cmd_verify(
    dim: usize,
    trials: usize,
    seed: u64,
    outcomes: Option<usize>,
    kraus_per_outcome: usize,
    out: Option<&Path>,
) -> Result<ExitCode, String> {
    if !(2..=4).contains(&dim) {
        return Err(format!("verify supports dim 2..4, got {dim}"));
    }
    if trials == 0 {
        return Err("verify needs at least one trial".into());
    }
    let outcomes = outcomes.unwrap_or(dim);
    let pool = thread_pool()?;
    // Per-trial seeds are seed + index, so results are schedule-independent.
    let results: Result<Vec<_>, _> = pool.install(|| {
        (0..trials)
            .into_par_iter()
            .map(|i| {
                verify_trial(
                    dim,
                    outcomes,
                    kraus_per_outcome,
                    seed.wrapping_add(i as u64),
                )
            })
            .collect()
    });
    let results = results.map_err(|e| e.to_string())?;
    let summary = aggregate(dim, outcomes, kraus_per_outcome, seed, &results);
    print_verify_summary(&summary);
    if let Some(path) = out {
        write_file(path, &summary.to_json())?;
    }
    if summary.violations == 0 {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(1))
    }
}

fn print_verify_summary(summary: &VerifySummary) {
    println!(
        "verify dim={} outcomes={} kraus_per_outcome={} trials={} seed={}",
        summary.dim, summary.outcomes, summary.kraus_per_outcome, summary.trials, summary.base_seed
    );
    for check in &summary.checks {
        println!(
            "  {:<28} min_margin={:>24} tightest_seed={:<20} violations={}",
            check.name,
            fmt17(check.min_margin),
            check.argmin_seed,
            check.violations
        );
    }
    println!("violations: {}", summary.violations);
}

fn cmd_sweep(
    family: Family,
    from: f64,
    to: f64,
    steps: usize,
    out: &Path,
    restarts: u32,
    seed: u64,
) -> Result<ExitCode, String> {
    if steps == 0 {
        return Err("sweep needs at least one step".into());
    }
    let Family::WeakMeasurement = family;
    if !(0.0..=1.0).contains(&from) || !(0.0..=1.0).contains(&to) {
        return Err("weak-measurement strength range must lie in [0, 1]".into());
    }
    let params: Vec<f64> = (0..steps)
        .map(|i| {
            if steps == 1 {
                from
            } else {
                from + (to - from) * i as f64 / (steps - 1) as f64
            }
        })
        .collect();

    let pool = thread_pool()?;
    let rows: Result<Vec<String>, String> = pool.install(|| {
        params
            .par_iter()
            .enumerate()
            .map(|(i, &p)| sweep_row(p, restarts, seed.wrapping_add(i as u64)))
            .collect()
    });
    let rows = rows?;

    let mut csv =
        String::from("param,noise_x,disturbance_lower,disturbance_upper,v_n,v_d,bound_margin\n");
    for row in rows {
        csv.push_str(&row);
        csv.push('\n');
    }
    write_file(out, &csv)?;
    eprintln!("wrote {} rows to {}", steps, out.display());
    Ok(ExitCode::SUCCESS)
}

fn sweep_row(strength: f64, restarts: u32, seed: u64) -> Result<String, String> {
    let (x, z) = zoo::pauli_xz_pair();
    let inst = zoo::weak_measurement(&x, strength).map_err(|e| e.to_string())?;
    let noise_x = noise::noise(&inst, &x).map_err(|e| e.to_string())?;
    let bracket = optimize_disturbance(&inst, &z, restarts, seed).map_err(|e| e.to_string())?;
    let table = noise::noise_table(&inst, &x).map_err(|e| e.to_string())?;
    let f = msd::map_guess(&table, x.eigenvalues()).map_err(|e| e.to_string())?;
    let v_n = msd::v_noise(&table, &f, x.eigenvalues()).map_err(|e| e.to_string())?;
    let v_d = msd::v_disturbance(&inst, &z, None).map_err(|e| e.to_string())?;
    let c = noise::overlap_constant(&x, &z).map_err(|e| e.to_string())?;
    let bound_margin = noise_x + bracket.lower() + c.log2();
    Ok([
        fmt17(strength),
        fmt17(noise_x),
        fmt17(bracket.lower()),
        fmt17(bracket.upper()),
        fmt17(v_n),
        fmt17(v_d),
        fmt17(bound_margin),
    ]
    .join(","))
}

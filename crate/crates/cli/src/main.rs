//! `glassbench` — command-line front end for the spin-glass dynamics harness.
//!
//! Subcommands:
//!
//! * `sweep`   — run a size/parameter grid from a JSON config and write
//!   `results.csv`, `fits.csv`, and `manifest.json` into an output directory.
//! * `trace`   — run a single trajectory with full per-step recording and
//!   write it as CSV.
//! * `density` — tabulate the draw density `f_t(x)` on a grid for a list of
//!   schedule steps.
//! * `oracle`  — exact enumeration results (ground state, local-minimum
//!   census) for a small system, as JSON.
//! * `fit`     — re-fit scaling exponents from an existing `results.csv`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use chrono::{SecondsFormat, Utc};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use glassbench_core::{
    derive_seed, enumerate_local_minima, exact_ground_state, fit_rows, fits_csv,
    h_n_monotonicity_notes, results_csv, run_experiment, run_trajectory, CouplingMatrix,
    ExperimentConfig, Protocol, RecordMode, ResultRow, ScheduleState, SpinConfiguration,
    StreamRole, TrajectoryParams, Variant,
};
use glassbench_core::oracle::CENSUS_LIMIT;
use glassbench_core::rng::{Stream, GAUSSIAN_METHOD_ID, RNG_METHOD_ID};
use glassbench_core::VERSION;

/// Environment variable that overrides the config file's master seed.
const SEED_ENV: &str = "GLASSBENCH_SEED";

#[derive(Parser)]
#[command(name = "glassbench", version = VERSION, about = "Single-flip dynamics on fully connected spin glasses")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment grid from a JSON config.
    Sweep(SweepArgs),
    /// Record one trajectory step by step.
    Trace(TraceArgs),
    /// Tabulate the draw density at chosen schedule steps.
    Density(DensityArgs),
    /// Exact ground state (and minima census for small N) of one disorder sample.
    Oracle(OracleArgs),
    /// Re-fit exponents from an existing results.csv.
    Fit(FitArgs),
}

#[derive(Args)]
struct SweepArgs {
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for results.csv, fits.csv, and manifest.json.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    workers: Option<usize>,
    /// Overrides the master seed from the config file or GLASSBENCH_SEED.
    #[arg(long)]
    master_seed: Option<u64>,
    /// Overrides the number of disorder realizations.
    #[arg(long)]
    nreal: Option<u64>,
}

#[derive(Args)]
struct TraceArgs {
    /// Algorithm variant: alg0, alg1, alg2, or alg3.
    #[arg(long)]
    variant: Variant,
    /// System size.
    #[arg(long)]
    n: usize,
    /// Initial negative-lobe rate lambda1(0).
    #[arg(long)]
    lambda1: f64,
    /// Annealing factor in (0, 1).
    #[arg(long, default_value_t = 0.98)]
    k: f64,
    /// Regime-switch threshold.
    #[arg(long, default_value_t = 1000.0)]
    m: f64,
    /// Tail-stop threshold.
    #[arg(long, default_value_t = 1e-4)]
    epsilon: f64,
    /// Hard cap on schedule steps.
    #[arg(long, default_value_t = 1_000_000)]
    max_steps: u64,
    /// Master seed; the disorder sample and the trajectory stream both
    /// derive from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path.
    #[arg(long, default_value = "trace.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct DensityArgs {
    /// Algorithm variant: alg0, alg1, alg2, or alg3.
    #[arg(long)]
    variant: Variant,
    /// Initial negative-lobe rate lambda1(0).
    #[arg(long)]
    lambda1: f64,
    /// Annealing factor in (0, 1).
    #[arg(long, default_value_t = 0.98)]
    k: f64,
    /// Regime-switch threshold.
    #[arg(long, default_value_t = 1000.0)]
    m: f64,
    /// Schedule steps to evaluate, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    t: Vec<u64>,
    /// Number of evenly spaced grid points.
    #[arg(long, default_value_t = 4801)]
    grid: usize,
    /// Lower end of the x grid.
    #[arg(long, default_value_t = -12.0, allow_hyphen_values = true)]
    x_min: f64,
    /// Upper end of the x grid.
    #[arg(long, default_value_t = 12.0, allow_hyphen_values = true)]
    x_max: f64,
    /// Output CSV path.
    #[arg(long, default_value = "density.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct OracleArgs {
    /// System size (exact enumeration; at most 24 spins).
    #[arg(long)]
    n: usize,
    /// Coupling seed, or the master seed when --realization is given.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Derive the coupling seed from --seed for this realization index, the
    /// same way a sweep does.
    #[arg(long)]
    realization: Option<u64>,
    /// Output path; "-" writes to stdout.
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Args)]
struct FitArgs {
    /// Existing results.csv to fit.
    #[arg(long)]
    results: PathBuf,
    /// Output path; "-" writes to stdout.
    #[arg(long, default_value = "-")]
    out: String,
}

/// Everything a finished sweep reports besides the two CSVs: the resolved
/// configuration it actually ran, version and RNG identifiers for
/// reproducibility, timing, and per-point caveats.
#[derive(Serialize)]
struct RunManifest {
    tool_version: String,
    rng_method_id: String,
    gaussian_method_id: String,
    started: String,
    finished: String,
    /// Worker count requested on the command line; null means the default
    /// (available parallelism). Results do not depend on it.
    workers: Option<usize>,
    config_echo: ExperimentConfig,
    outputs: ManifestOutputs,
    /// Grid points where some realization's time budget ran out before a
    /// single restart finished.
    low_coverage_points: Vec<String>,
    notes: Vec<String>,
}

#[derive(Serialize)]
struct ManifestOutputs {
    results: String,
    fits: String,
}

#[derive(Serialize)]
struct OracleReport {
    n: usize,
    seed: u64,
    coupling_seed: u64,
    ground_energy: f64,
    ground_energy_per_spin: f64,
    ground_spins: Vec<i8>,
    /// One-flip-stable configuration count; null when N is too large to
    /// enumerate them all.
    #[serde(skip_serializing_if = "Option::is_none")]
    local_minima_count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ground_degeneracy: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Sweep(args) => run_sweep(args),
        Command::Trace(args) => run_trace(args),
        Command::Density(args) => run_density(args),
        Command::Oracle(args) => run_oracle(args),
        Command::Fit(args) => run_fit(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn now_stamp() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

fn read_to_string(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

fn write_file(path: &Path, contents: &str) -> Result<(), String> {
    fs::write(path, contents).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

/// Writes to the given path, or to stdout when the path is `-`.
fn write_file_or_stdout(path: &str, contents: &str) -> Result<(), String> {
    if path == "-" {
        print!("{contents}");
        Ok(())
    } else {
        write_file(Path::new(path), contents)
    }
}

fn run_sweep(args: &SweepArgs) -> Result<(), String> {
    let text = read_to_string(&args.config)?;
    let mut cfg: ExperimentConfig =
        serde_json::from_str(&text).map_err(|e| format!("invalid config: {e}"))?;

    // Seed precedence: --master-seed beats GLASSBENCH_SEED beats the file.
    if let Ok(v) = std::env::var(SEED_ENV) {
        cfg.master_seed = v
            .parse::<u64>()
            .map_err(|_| format!("{SEED_ENV} must be an unsigned integer, got `{v}`"))?;
    }
    if let Some(seed) = args.master_seed {
        cfg.master_seed = seed;
    }
    if let Some(nreal) = args.nreal {
        cfg.nreal = nreal;
    }

    let cfg = cfg.resolved().map_err(|e| format!("invalid config: {e}"))?;

    let started = now_stamp();
    let rows = run_experiment(&cfg, args.workers).map_err(|e| e.to_string())?;
    let fits = fit_rows(&rows);
    let finished = now_stamp();

    // Render every output before touching the filesystem so a failure cannot
    // leave a partial set behind.
    let results_text = results_csv(&rows);
    let fits_text = fits_csv(&fits);

    let mut notes = h_n_monotonicity_notes(&rows);
    if cfg.params_grid.iter().any(|p| p.variant == Variant::Alg3) {
        notes.push(
            "alg3 keeps the negative-lobe rate reached at the regime switch for the rest of the run"
                .to_string(),
        );
    }
    let low_coverage_points = rows
        .iter()
        .filter(|r| r.low_coverage)
        .map(|r| {
            format!(
                "{} N={} lambda1_0={} k={}",
                r.algorithm, r.n, r.lambda1_0, r.k
            )
        })
        .collect();

    let results_path = args.out.join("results.csv");
    let fits_path = args.out.join("fits.csv");
    let manifest_path = args.out.join("manifest.json");

    let manifest = RunManifest {
        tool_version: VERSION.to_string(),
        rng_method_id: RNG_METHOD_ID.to_string(),
        gaussian_method_id: GAUSSIAN_METHOD_ID.to_string(),
        started,
        finished,
        workers: args.workers,
        config_echo: cfg,
        outputs: ManifestOutputs {
            results: results_path.display().to_string(),
            fits: fits_path.display().to_string(),
        },
        low_coverage_points,
        notes,
    };
    let mut manifest_text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| format!("cannot serialize manifest: {e}"))?;
    manifest_text.push('\n');

    fs::create_dir_all(&args.out)
        .map_err(|e| format!("cannot create {}: {e}", args.out.display()))?;
    write_file(&results_path, &results_text)?;
    write_file(&fits_path, &fits_text)?;
    write_file(&manifest_path, &manifest_text)?;

    println!(
        "wrote {} ({} rows), {} ({} fits), {}",
        results_path.display(),
        rows.len(),
        fits_path.display(),
        fits.len(),
        manifest_path.display()
    );
    Ok(())
}

fn run_trace(args: &TraceArgs) -> Result<(), String> {
    let params = TrajectoryParams::new(args.variant, args.lambda1, args.k)
        .with_m(args.m)
        .with_epsilon(args.epsilon)
        .with_max_steps(args.max_steps)
        .with_record_mode(RecordMode::Full);

    let coupling_seed = derive_seed(args.seed, 0, 0, StreamRole::Disorder);
    let j = CouplingMatrix::generate(args.n, coupling_seed).map_err(|e| e.to_string())?;
    let mut stream = Stream::from_seed(derive_seed(args.seed, 0, 0, StreamRole::Trajectory));
    let sigma0 = SpinConfiguration::random(args.n, &mut stream).map_err(|e| e.to_string())?;
    let trajectory =
        run_trajectory(&j, &sigma0, &params, &mut stream).map_err(|e| e.to_string())?;

    // Replays the schedule in lockstep with the recorded steps so each row
    // can report the positive-lobe rate in force when its draw happened.
    let mut sched = ScheduleState::init(args.variant, args.lambda1, args.k, args.m)
        .map_err(|e| e.to_string())?;
    let exact_scale = 2.0 / (args.n as f64).sqrt();
    let mut out = String::from("step,site,D,delta_paper,delta_exact,energy,regime,lambda2_t\n");
    for step in &trajectory.steps {
        debug_assert_eq!(step.regime, sched.regime());
        let lambda2 = match sched.lambda_pos() {
            Some(rate) => rate.to_string(),
            None => String::new(),
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            step.t,
            step.site,
            step.draw,
            step.delta,
            exact_scale * step.delta,
            step.energy,
            step.regime,
            lambda2
        )
        .expect("string write cannot fail");
        if args.variant != Variant::Alg0 {
            sched.advance();
        }
    }
    write_file(&args.out, &out)?;
    println!(
        "wrote {} ({} flips, final energy {:.6}, {})",
        args.out.display(),
        trajectory.flips,
        trajectory.final_energy,
        trajectory.termination
    );
    Ok(())
}

fn run_density(args: &DensityArgs) -> Result<(), String> {
    if args.grid < 2 {
        return Err("invalid parameter `grid`: need at least 2 points".to_string());
    }
    if !(args.x_min < args.x_max) {
        return Err("invalid parameter `x-min`/`x-max`: need x-min < x-max".to_string());
    }
    if args.t.is_empty() {
        return Err("invalid parameter `t`: need at least one step".to_string());
    }
    let mut out = String::from("t,x,f\n");
    for &t in &args.t {
        let state = ScheduleState::at_step(args.variant, args.lambda1, args.k, args.m, t)
            .map_err(|e| e.to_string())?;
        let density = state.density();
        for i in 0..args.grid {
            let frac = i as f64 / (args.grid - 1) as f64;
            let x = args.x_min + (args.x_max - args.x_min) * frac;
            // The density can jump at zero. Tabulating the midpoint of the
            // two one-sided limits there keeps naive trapezoid sums over the
            // table accurate; either limit alone biases them by O(step).
            let f = if x == 0.0 {
                0.5 * (density.value(0.0) + density.value(f64::MIN_POSITIVE))
            } else {
                density.value(x)
            };
            writeln!(out, "{},{},{}", t, x, f).expect("string write cannot fail");
        }
    }
    write_file(&args.out, &out)?;
    println!(
        "wrote {} ({} steps x {} points)",
        args.out.display(),
        args.t.len(),
        args.grid
    );
    Ok(())
}

fn run_oracle(args: &OracleArgs) -> Result<(), String> {
    let coupling_seed = match args.realization {
        Some(r) => derive_seed(args.seed, r, 0, StreamRole::Disorder),
        None => args.seed,
    };
    let j = CouplingMatrix::generate(args.n, coupling_seed).map_err(|e| e.to_string())?;
    let (ground, ground_energy) = exact_ground_state(&j).map_err(|e| e.to_string())?;

    let (local_minima_count, ground_degeneracy) = if args.n <= CENSUS_LIMIT {
        let census = enumerate_local_minima(&j).map_err(|e| e.to_string())?;
        (Some(census.count()), Some(census.ground_configs().len()))
    } else {
        (None, None)
    };

    let report = OracleReport {
        n: args.n,
        seed: args.seed,
        coupling_seed,
        ground_energy,
        ground_energy_per_spin: ground_energy / args.n as f64,
        ground_spins: ground.spins().to_vec(),
        local_minima_count,
        ground_degeneracy,
    };
    let mut text = serde_json::to_string_pretty(&report)
        .map_err(|e| format!("cannot serialize report: {e}"))?;
    text.push('\n');
    write_file_or_stdout(&args.out, &text)
}

fn run_fit(args: &FitArgs) -> Result<(), String> {
    let text = read_to_string(&args.results)?;
    let rows = parse_results_csv(&text)?;
    let fits = fit_rows(&rows);
    write_file_or_stdout(&args.out, &fits_csv(&fits))
}

fn parse_results_csv(text: &str) -> Result<Vec<ResultRow>, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("results file is empty")?;
    if header != glassbench_core::harness::RESULTS_HEADER {
        return Err(format!(
            "unexpected results header `{header}` (expected `{}`)",
            glassbench_core::harness::RESULTS_HEADER
        ));
    }
    let mut rows = Vec::new();
    for (idx, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let lineno = idx + 2;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 16 {
            return Err(format!(
                "line {lineno}: expected 16 fields, got {}",
                fields.len()
            ));
        }
        let parse_f64 = |pos: usize, name: &str| -> Result<f64, String> {
            fields[pos]
                .parse::<f64>()
                .map_err(|_| format!("line {lineno}: bad {name} `{}`", fields[pos]))
        };
        let parse_u64 = |pos: usize, name: &str| -> Result<u64, String> {
            fields[pos]
                .parse::<u64>()
                .map_err(|_| format!("line {lineno}: bad {name} `{}`", fields[pos]))
        };
        let algorithm = Variant::from_str(fields[0])
            .map_err(|e| format!("line {lineno}: {e}"))?;
        let protocol = match fields[6] {
            "fixed_restarts" => Protocol::FixedRestarts,
            "fixed_budget" => Protocol::FixedBudget,
            other => return Err(format!("line {lineno}: unknown protocol `{other}`")),
        };
        rows.push(ResultRow {
            algorithm,
            n: parse_u64(1, "N")? as usize,
            lambda1_0: parse_f64(2, "lambda1_0")?,
            k: parse_f64(3, "k")?,
            m: parse_f64(4, "m")?,
            epsilon: parse_f64(5, "epsilon")?,
            protocol,
            nreal: parse_u64(7, "nreal")?,
            restarts: parse_f64(8, "restarts")?,
            tau_mean: parse_f64(9, "tau_mean")?,
            tau_stderr: parse_f64(10, "tau_stderr")?,
            h_n_mean: parse_f64(11, "h_n_mean")?,
            h_n_stderr: parse_f64(12, "h_n_stderr")?,
            trajectories: parse_u64(13, "trajectories")?,
            step_limit_count: parse_u64(14, "step_limit_count")?,
            master_seed: parse_u64(15, "master_seed")?,
            low_coverage: false,
        });
    }
    Ok(rows)
}

//! `nlwave` — drive the nonlinear acoustics solver laboratory.
//!
//! Subcommands:
//!   simulate   run one model and emit pressure/energy CSVs
//!   sweep-tau  run the relaxation-time sweep against the τ = 0 baseline
//!   verify     run the built-in verification suites
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure
//! (degeneracy, non-convergence, factorization), 4 verification failure.

use clap::{Args, Parser, Subcommand};
use nlwave_core::error::Error;
use nlwave_core::experiment::{csv, run_simulation, sweep_tau, verify, SimConfig, SweepConfig};
use std::path::{Path, PathBuf};

/// Environment variable providing the default output directory.
const OUT_ENV: &str = "NLWAVE_OUT";

#[derive(Parser)]
#[command(
    name = "nlwave",
    about = "1D nonlinear acoustics: Westervelt, Kuznetsov and JMGT wave equations",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigSource {
    /// TOML configuration file.
    #[arg(long, value_name = "FILE", conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in preset: `paper-fig1` (pressure snapshots) or `paper-fig2`
    /// (relaxation-time sweep).
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    /// Override the relaxation time of a preset (seconds; presets only).
    #[arg(long, value_name = "SECONDS", requires = "preset")]
    tau: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write snapshot/energy CSV files.
    Simulate {
        #[command(flatten)]
        source: ConfigSource,
        /// Output directory (default: $NLWAVE_OUT or ./out).
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Run the τ sweep and write the error table CSV.
    SweepTau {
        #[command(flatten)]
        source: ConfigSource,
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
        /// Concurrent member runs (output order is τ-descending regardless).
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Run verification suites (all by default).
    Verify {
        /// One of: spline, oracle, newmark, energy, determinism, manufactured.
        #[arg(long, value_name = "NAME")]
        suite: Option<String>,
    },
}

fn load_config(source: &ConfigSource) -> Result<SimConfig, Error> {
    match (&source.config, &source.preset) {
        (Some(path), None) => {
            if source.tau.is_some() {
                return Err(Error::Config(
                    "--tau only applies to presets; set tau in the config file".into(),
                ));
            }
            SimConfig::from_file(path)
        }
        (None, Some(name)) => match name.as_str() {
            "paper-fig1" => SimConfig::paper_fig1_preset(source.tau.unwrap_or(0.0)),
            "paper-fig2" => {
                let cfg = SimConfig::paper_fig2_preset();
                if source.tau.is_some() {
                    return Err(Error::Config(
                        "paper-fig2 sweeps tau; --tau does not apply".into(),
                    ));
                }
                Ok(cfg)
            }
            other => Err(Error::Config(format!(
                "unknown preset '{other}' (available: paper-fig1, paper-fig2)"
            ))),
        },
        (None, None) => Err(Error::Config(
            "provide --config FILE or --preset NAME".into(),
        )),
        (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
    }
}

fn out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn ensure_dir(dir: &Path) -> Result<(), Error> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

fn cmd_simulate(source: ConfigSource, out: Option<PathBuf>) -> Result<(), Error> {
    let config = load_config(&source)?;
    let dir = out_dir(out);
    ensure_dir(&dir)?;

    let output = run_simulation(&config)?;
    let (xs, ps) = output.final_pressure()?;
    csv::snapshot_to_file(&dir.join("snapshot_final.csv"), &xs, &ps)?;
    csv::energy_to_file(&dir.join("energy.csv"), &output.energy)?;
    for (i, &t) in config.output.snapshot_times.iter().enumerate() {
        let idx = output.snapshot_index_near(t);
        let state = &output.trajectory.states[idx];
        let (xs, ps) = nlwave_core::diagnostics::pressure_samples(
            state,
            &output.basis,
            &output.ops,
            output.rho0,
        )?;
        csv::snapshot_to_file(&dir.join(format!("snapshot_t{i}.csv")), &xs, &ps)?;
    }

    let (peak, peak_x) = xs
        .iter()
        .zip(&ps)
        .fold((f64::NEG_INFINITY, 0.0), |(pv, px), (x, p)| {
            if *p > pv {
                (*p, *x)
            } else {
                (pv, px)
            }
        });
    let total_iters: usize = output.trajectory.fp_iterations.iter().sum();
    println!(
        "model {:?}, tau = {:.6e} s: {} steps to T = {:.6e} s",
        config.model, config.tau, config.time.n_steps, config.time.final_time
    );
    println!(
        "peak pressure {:.4} MPa at x = {:.4} m; min alpha {:.4}, min gamma {:.4e}",
        peak / 1e6,
        peak_x,
        output.degeneracy.min_alpha,
        output.degeneracy.min_gamma
    );
    println!(
        "fixed-point iterations: total {}, mean {:.2} per step",
        total_iters,
        total_iters as f64 / config.time.n_steps as f64
    );
    println!("wrote {}", dir.join("snapshot_final.csv").display());
    println!("wrote {}", dir.join("energy.csv").display());
    Ok(())
}

fn cmd_sweep(source: ConfigSource, out: Option<PathBuf>, jobs: usize) -> Result<(), Error> {
    let config = load_config(&source)?;
    let sweep = SweepConfig::from_sim_config(config)?;
    let dir = out_dir(out);
    ensure_dir(&dir)?;
    let result = sweep_tau(&sweep, jobs.max(1))?;
    csv::sweep_to_file(&dir.join("sweep.csv"), &result.rows)?;
    println!(
        "baseline {:?}; {} members",
        result.baseline_model,
        result.rows.len()
    );
    println!("tau_s,error_ch1,error_xbarw");
    for r in &result.rows {
        println!(
            "{},{},{}",
            csv::format_g17(r.tau),
            csv::format_g17(r.error_ch1),
            csv::format_g17(r.error_xbar_w)
        );
    }
    println!("wrote {}", dir.join("sweep.csv").display());
    Ok(())
}

fn cmd_verify(suite: Option<String>) -> Result<bool, Error> {
    let results = verify::run_suite(suite.as_deref())?;
    let mut all_passed = true;
    for r in &results {
        println!(
            "[{}] {}: {} — {}",
            r.suite,
            r.name,
            if r.passed { "PASS" } else { "FAIL" },
            r.detail
        );
        all_passed &= r.passed;
    }
    println!(
        "{}/{} checks passed",
        results.iter().filter(|r| r.passed).count(),
        results.len()
    );
    Ok(all_passed)
}

fn main() {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate { source, out } => cmd_simulate(source, out).map(|()| 0),
        Command::SweepTau { source, out, jobs } => cmd_sweep(source, out, jobs).map(|()| 0),
        Command::Verify { suite } => cmd_verify(suite).map(|ok| if ok { 0 } else { 4 }),
    };
    match outcome {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}

use std::path::PathBuf;

use anyhow::Context;
use clap::Parser;
use powergame::config::{FileConfig, OUT_DIR_ENV};
use powergame::output::{write_sweep, write_trace};
use powergame::sweep::{check_q_span, q_ratios};
use powergame::{io, run_convergence_trace, run_convergence_trace_on, run_load_sweep, TraceSpec};
use powergame_core::ReceiverKind;

/// Power control and receiver selection game in multi-hop DS-CDMA networks.
///
/// Without --trace, runs the load sweep over every load, receiver and q and,
/// when the q grid spans two decades, the q-ratio table. With --trace, runs
/// one dynamics trace instead.
#[derive(Debug, Parser)]
#[command(version, about)]
struct Cli {
    /// TOML file with any of the options below; flags override it.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Loads β = K/N, comma-separated.
    #[arg(long, value_delimiter = ',', value_name = "BETAS")]
    load_grid: Option<Vec<f64>>,
    /// Operating powers q in watts, comma-separated.
    #[arg(long, value_delimiter = ',', value_name = "WATTS")]
    q_grid: Option<Vec<f64>>,
    /// Receivers among MF, DE, MMSE, comma-separated.
    #[arg(long, value_delimiter = ',', value_name = "KINDS")]
    receivers: Option<Vec<ReceiverKind>>,
    #[arg(long)]
    realizations: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Processing gain N.
    #[arg(long)]
    n: Option<usize>,
    /// Output directory [env: POWERGAME_OUT_DIR, default: results].
    #[arg(long, value_name = "DIR")]
    out_dir: Option<PathBuf>,
    /// Trace one run: K,receiver,q,seed (e.g. 16,MF,0.01,7).
    #[arg(long, value_name = "K,RX,Q,SEED")]
    trace: Option<TraceSpec>,
    /// Realization JSON to trace instead of generating one from the seed.
    #[arg(long, value_name = "FILE")]
    replay: Option<PathBuf>,
    /// Relative power change that ends the dynamics.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Maximum transmit power, W.
    #[arg(long)]
    pmax: Option<f64>,
}

impl Cli {
    fn flags(&self) -> FileConfig {
        FileConfig {
            load_grid: self.load_grid.clone(),
            q_grid: self.q_grid.clone(),
            receivers: self.receivers.clone(),
            realizations: self.realizations,
            seed: self.seed,
            n: self.n,
            out_dir: self.out_dir.clone(),
            trace: self.trace,
            replay: self.replay.clone(),
            tol: self.tol,
            max_iter: self.max_iter,
            pmax: self.pmax,
        }
    }
}

fn main() -> anyhow::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();

    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let env_out_dir = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from);
    let settings = cli.flags().over(file).resolve(env_out_dir)?;
    let spec = &settings.spec;
    std::fs::create_dir_all(&spec.out_dir)
        .with_context(|| format!("creating {}", spec.out_dir.display()))?;
    let config_path = spec.out_dir.join("run_config.toml");
    std::fs::write(&config_path, settings.to_file_config().to_toml())
        .with_context(|| format!("writing {}", config_path.display()))?;

    let written = if let Some(trace_spec) = &settings.trace {
        let trace = match &settings.replay {
            Some(path) => run_convergence_trace_on(trace_spec, spec, io::load_realization(path)?)?,
            None => run_convergence_trace(trace_spec, spec)?,
        };
        let r = &trace.report;
        log::info!(
            "trace {trace_spec}: converged={} after {} iterations, residual {:e}, mean-utility peak at t={}",
            r.converged,
            r.iterations,
            r.fixed_point_residual,
            trace.peak_iteration()
        );
        write_trace(&spec.out_dir, &trace)?
    } else {
        let sweep = run_load_sweep(spec)?;
        let ratios = match check_q_span(spec) {
            Ok(()) => Some(q_ratios(&sweep)),
            Err(e) => {
                log::info!("skipping q-ratio table: {e}");
                None
            }
        };
        let excluded: usize = sweep.rows.iter().map(|r| r.excluded).sum();
        if excluded > 0 {
            log::warn!("{excluded} runs did not converge and were left out of the means");
        }
        write_sweep(&spec.out_dir, &sweep, ratios.as_deref())?
    };
    for path in std::iter::once(&config_path).chain(&written) {
        println!("{}", path.display());
    }
    Ok(())
}

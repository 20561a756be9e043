//! Load and q sweeps over seeded realizations.

use powergame_core::dynamics::mean;
use powergame_core::{run_best_response_dynamics, Game, ReceiverKind, ReceiverPolicy, Realization};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::spec::ExperimentSpec;

/// Outcome of one dynamics run: one realization, receiver and q.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub beta: f64,
    pub users: usize,
    pub receiver: ReceiverKind,
    pub q: f64,
    pub realization: usize,
    /// Rebuilds the realization with `Realization::generate(users, N, seed, σ²)`.
    pub seed: u64,
    pub converged: bool,
    pub iterations: usize,
    pub fixed_point_residual: f64,
    pub power_limited: bool,
    pub clamped_users: usize,
    pub mean_utility: f64,
    pub min_utility: f64,
    pub mean_power: f64,
    pub mean_sinr: f64,
    /// Whether scaling every power by 0.99 helped all users; empty if not converged.
    pub pareto_all_improved: Option<bool>,
}

/// Mean utility for one (load, receiver, q) cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub beta: f64,
    pub users: usize,
    pub receiver: ReceiverKind,
    pub q: f64,
    /// Mean over converged realizations of the per-realization user mean.
    pub mean_utility: f64,
    pub std_error: f64,
    /// Realizations that entered the mean.
    pub realizations: usize,
    /// Realizations left out because dynamics did not converge.
    pub excluded: usize,
    /// Base seed of the experiment.
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// Ordered by load, receiver, q.
    pub rows: Vec<SweepRow>,
    /// Ordered by load, receiver, q, realization.
    pub runs: Vec<RunRecord>,
}

impl SweepResult {
    pub fn row(&self, beta: f64, receiver: ReceiverKind, q: f64) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|row| row.beta == beta && row.receiver == receiver && row.q == q)
    }
}

/// Utility change between neighbouring q values at fixed load and receiver.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QSweepRow {
    pub beta: f64,
    pub users: usize,
    pub receiver: ReceiverKind,
    pub q: f64,
    pub mean_utility: f64,
    /// `q / q_prev`; empty on the first q of a series.
    pub q_ratio: Option<f64>,
    /// `u(q_prev) / u(q)`; empty on the first q of a series.
    pub utility_ratio: Option<f64>,
    pub seed: u64,
}

pub fn run_one(
    spec: &ExperimentSpec,
    realization: &Realization,
    kind: ReceiverKind,
    q: f64,
) -> Result<powergame_core::EquilibriumReport> {
    let users = realization.scenario.users();
    let config = spec.game_config(users, q);
    let game = Game::new(&realization.scenario, &realization.codes, &config)?;
    Ok(run_best_response_dynamics(
        &game,
        ReceiverPolicy::Fixed(kind),
        &spec.dynamics_options(),
    )?)
}

struct Job {
    beta: f64,
    users: usize,
    realization: usize,
}

/// Runs every (load, receiver, q, realization) combination.
///
/// Realizations run in parallel. Output order and values do not depend on
/// the number of worker threads.
pub fn run_load_sweep(spec: &ExperimentSpec) -> Result<SweepResult> {
    spec.validate()?;
    let jobs: Vec<Job> = spec
        .load_grid
        .iter()
        .flat_map(|&beta| {
            let users = spec.users_for_load(beta);
            (0..spec.realizations).map(move |realization| Job {
                beta,
                users,
                realization,
            })
        })
        .collect();

    // Per job: results indexed by receiver position then q position.
    let per_job: Vec<Vec<Vec<RunRecord>>> = jobs
        .par_iter()
        .map(|job| run_job(spec, job))
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    let mut runs = Vec::with_capacity(per_job.len() * spec.receivers.len() * spec.q_grid.len());
    for (li, &beta) in spec.load_grid.iter().enumerate() {
        let block = &per_job[li * spec.realizations..(li + 1) * spec.realizations];
        let kinds = spec.receivers_for_load(beta);
        for ri in 0..kinds.len() {
            for qi in 0..spec.q_grid.len() {
                let cell: Vec<&RunRecord> = block.iter().map(|job| &job[ri][qi]).collect();
                rows.push(aggregate(spec, &cell));
                runs.extend(cell.into_iter().cloned());
            }
        }
    }
    log::info!("load sweep: {} cells, {} runs", rows.len(), runs.len());
    Ok(SweepResult { rows, runs })
}

fn run_job(spec: &ExperimentSpec, job: &Job) -> Result<Vec<Vec<RunRecord>>> {
    let seed = spec.realization_seed(job.users, job.realization);
    let realization = Realization::generate(job.users, spec.n, seed, spec.noise_power)?;
    spec.receivers_for_load(job.beta)
        .into_iter()
        .map(|kind| {
            spec.q_grid
                .iter()
                .map(|&q| {
                    let report = run_one(spec, &realization, kind, q)?;
                    let last = report.last();
                    if !report.converged {
                        log::debug!(
                            "K={} {kind} q={q} seed={seed}: no convergence after {} iterations (residual {:e})",
                            job.users,
                            report.iterations,
                            report.fixed_point_residual
                        );
                    }
                    Ok(RunRecord {
                        beta: job.beta,
                        users: job.users,
                        receiver: kind,
                        q,
                        realization: job.realization,
                        seed,
                        converged: report.converged,
                        iterations: report.iterations,
                        fixed_point_residual: report.fixed_point_residual,
                        power_limited: report.power_limited,
                        clamped_users: report.clamped_users,
                        mean_utility: mean(&last.utility),
                        min_utility: last.utility.iter().copied().fold(f64::INFINITY, f64::min),
                        mean_power: mean(&last.profile.powers),
                        mean_sinr: mean(&last.sinr),
                        pareto_all_improved: report.pareto_probe.as_ref().map(|p| p.all_improved),
                    })
                })
                .collect()
        })
        .collect()
}

fn aggregate(spec: &ExperimentSpec, cell: &[&RunRecord]) -> SweepRow {
    let first = cell[0];
    let used: Vec<f64> = cell.iter().filter(|r| r.converged).map(|r| r.mean_utility).collect();
    let n = used.len();
    let mean_utility = if n > 0 { mean(&used) } else { f64::NAN };
    let std_error = if n > 1 {
        let var = used.iter().map(|u| (u - mean_utility).powi(2)).sum::<f64>() / (n - 1) as f64;
        (var / n as f64).sqrt()
    } else {
        f64::NAN
    };
    SweepRow {
        beta: first.beta,
        users: first.users,
        receiver: first.receiver,
        q: first.q,
        mean_utility,
        std_error,
        realizations: n,
        excluded: cell.len() - n,
        seed: spec.seed,
    }
}

/// Utility ratios between consecutive q values of a finished sweep.
pub fn q_ratios(sweep: &SweepResult) -> Vec<QSweepRow> {
    let mut out: Vec<QSweepRow> = Vec::with_capacity(sweep.rows.len());
    for row in &sweep.rows {
        let prev = out
            .last()
            .filter(|p| p.beta == row.beta && p.receiver == row.receiver);
        let (q_ratio, utility_ratio) = match prev {
            Some(p) => (Some(row.q / p.q), Some(p.mean_utility / row.mean_utility)),
            None => (None, None),
        };
        out.push(QSweepRow {
            beta: row.beta,
            users: row.users,
            receiver: row.receiver,
            q: row.q,
            mean_utility: row.mean_utility,
            q_ratio,
            utility_ratio,
            seed: row.seed,
        });
    }
    out
}

/// Load sweep followed by [`q_ratios`]. The q grid must span at least two
/// decades.
pub fn run_q_sweep(spec: &ExperimentSpec) -> Result<(SweepResult, Vec<QSweepRow>)> {
    check_q_span(spec)?;
    let sweep = run_load_sweep(spec)?;
    let ratios = q_ratios(&sweep);
    Ok((sweep, ratios))
}

pub fn check_q_span(spec: &ExperimentSpec) -> Result<()> {
    let lo = spec.q_grid.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = spec.q_grid.iter().copied().fold(0.0, f64::max);
    if lo > 0.0 && hi / lo >= 100.0 {
        Ok(())
    } else {
        Err(Error::InvalidSpec("q grid must span at least two decades".into()))
    }
}

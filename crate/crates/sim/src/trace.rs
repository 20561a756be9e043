//! Per-iteration traces of a single dynamics run.

use powergame_core::dynamics::mean;
use powergame_core::{EquilibriumReport, ReceiverKind, Realization};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::spec::{ExperimentSpec, TraceSpec};
use crate::sweep::run_one;

/// One user at one iteration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub t: usize,
    pub k: usize,
    pub receiver: ReceiverKind,
    pub power: f64,
    pub sinr: f64,
    pub utility: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct Trace {
    pub spec: TraceSpec,
    pub realization: Realization,
    pub report: EquilibriumReport,
}

impl Trace {
    /// One row per (t, k), ordered by t then k.
    pub fn rows(&self) -> Vec<TraceRow> {
        self.report
            .trajectory
            .iter()
            .flat_map(|rec| {
                (0..rec.profile.powers.len()).map(move |k| TraceRow {
                    t: rec.t,
                    k,
                    receiver: rec.profile.receivers[k],
                    power: rec.profile.powers[k],
                    sinr: rec.sinr[k],
                    utility: rec.utility[k],
                    seed: self.spec.seed,
                })
            })
            .collect()
    }

    /// Across-user mean utility at each iteration.
    pub fn mean_utility(&self) -> Vec<f64> {
        self.report.trajectory.iter().map(|rec| mean(&rec.utility)).collect()
    }

    /// Iteration with the highest across-user mean utility; the earliest on ties.
    pub fn peak_iteration(&self) -> usize {
        let means = self.mean_utility();
        let mut best = 0;
        for (t, &u) in means.iter().enumerate() {
            if u > means[best] {
                best = t;
            }
        }
        best
    }
}

/// Generates the realization for `trace.seed` and runs dynamics on it.
pub fn run_convergence_trace(trace: &TraceSpec, spec: &ExperimentSpec) -> Result<Trace> {
    let realization = Realization::generate(trace.users, spec.n, trace.seed, spec.noise_power)?;
    run_convergence_trace_on(trace, spec, realization)
}

/// Runs a trace on a given (for example, loaded) realization.
pub fn run_convergence_trace_on(
    trace: &TraceSpec,
    spec: &ExperimentSpec,
    realization: Realization,
) -> Result<Trace> {
    if realization.scenario.users() != trace.users {
        return Err(Error::InvalidSpec(format!(
            "trace asks for K = {} but the realization has {} users",
            trace.users,
            realization.scenario.users()
        )));
    }
    if realization.codes.chips() != spec.n {
        return Err(Error::InvalidSpec(format!(
            "realization uses N = {} but the experiment sets N = {}",
            realization.codes.chips(),
            spec.n
        )));
    }
    let report = run_one(spec, &realization, trace.receiver, trace.q)?;
    Ok(Trace {
        spec: *trace,
        realization,
        report,
    })
}

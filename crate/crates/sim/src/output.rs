//! CSV tables and plot data.
//!
//! Every table has a header row. Floats are written in shortest round-trip
//! form, so parsing a file gives back the exact values. Plot files are plain
//! `x,y,series` tables.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{io_error, Result};
use crate::io::save_realization;
use crate::sweep::{QSweepRow, SweepResult};
use crate::trace::Trace;

pub const LOAD_SWEEP_FILE: &str = "load_sweep.csv";
pub const RUNS_FILE: &str = "runs.csv";
pub const Q_SWEEP_FILE: &str = "q_sweep.csv";
pub const LOAD_PLOT_FILE: &str = "load_sweep_plot.csv";
pub const Q_PLOT_FILE: &str = "q_sweep_plot.csv";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotPoint {
    pub x: f64,
    pub y: f64,
    pub series: String,
}

pub fn write_csv_to<W: Write, T: Serialize>(out: W, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn csv_string<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv_to(&mut buf, rows)?;
    Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let file = fs::File::create(path).map_err(io_error(path))?;
    write_csv_to(std::io::BufWriter::new(file), rows)
}

/// Mean utility against load, one series per receiver and q.
pub fn load_plot(sweep: &SweepResult) -> Vec<PlotPoint> {
    // Rows come ordered by load; regroup them by series, keeping first-seen order.
    let mut series: Vec<String> = Vec::new();
    let mut points: Vec<Vec<PlotPoint>> = Vec::new();
    for r in &sweep.rows {
        let name = format!("{} q={}", r.receiver, r.q);
        let i = match series.iter().position(|s| *s == name) {
            Some(i) => i,
            None => {
                series.push(name.clone());
                points.push(Vec::new());
                series.len() - 1
            }
        };
        points[i].push(PlotPoint {
            x: r.beta,
            y: r.mean_utility,
            series: name,
        });
    }
    points.into_iter().flatten().collect()
}

/// Mean utility against q, one series per receiver and load.
pub fn q_plot(sweep: &SweepResult) -> Vec<PlotPoint> {
    sweep
        .rows
        .iter()
        .map(|r| PlotPoint {
            x: r.q,
            y: r.mean_utility,
            series: format!("{} beta={}", r.receiver, r.beta),
        })
        .collect()
}

/// Per-user utility and power against iteration, plus the across-user mean
/// utility.
pub fn trace_plots(trace: &Trace) -> (Vec<PlotPoint>, Vec<PlotPoint>) {
    let mut utility = Vec::new();
    let mut power = Vec::new();
    for row in trace.rows() {
        let series = format!("user {}", row.k);
        utility.push(PlotPoint {
            x: row.t as f64,
            y: row.utility,
            series: series.clone(),
        });
        power.push(PlotPoint {
            x: row.t as f64,
            y: row.power,
            series,
        });
    }
    for (t, u) in trace.mean_utility().into_iter().enumerate() {
        utility.push(PlotPoint {
            x: t as f64,
            y: u,
            series: "mean".into(),
        });
    }
    (utility, power)
}

pub fn write_sweep(dir: &Path, sweep: &SweepResult, ratios: Option<&[QSweepRow]>) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(io_error(dir))?;
    let mut written = Vec::new();
    let mut emit = |name: &str, f: &dyn Fn(&Path) -> Result<()>| -> Result<()> {
        let path = dir.join(name);
        f(&path)?;
        written.push(path);
        Ok(())
    };
    emit(LOAD_SWEEP_FILE, &|p| write_csv(p, &sweep.rows))?;
    emit(RUNS_FILE, &|p| write_csv(p, &sweep.runs))?;
    emit(LOAD_PLOT_FILE, &|p| write_csv(p, &load_plot(sweep)))?;
    if let Some(ratios) = ratios {
        emit(Q_SWEEP_FILE, &|p| write_csv(p, ratios))?;
        emit(Q_PLOT_FILE, &|p| write_csv(p, &q_plot(sweep)))?;
    }
    Ok(written)
}

/// File stem shared by the outputs of one trace.
pub fn trace_stem(trace: &Trace) -> String {
    let s = &trace.spec;
    format!("trace_K{}_{}_q{}_seed{}", s.users, s.receiver, s.q, s.seed)
}

/// Writes the (t, k) table, plot data and the realization used, so the run
/// can be replayed from the files alone.
pub fn write_trace(dir: &Path, trace: &Trace) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(io_error(dir))?;
    let stem = trace_stem(trace);
    let (utility, power) = trace_plots(trace);
    let paths = [
        dir.join(format!("{stem}.csv")),
        dir.join(format!("{stem}_utility_plot.csv")),
        dir.join(format!("{stem}_power_plot.csv")),
        dir.join(format!("{stem}_realization.json")),
    ];
    write_csv(&paths[0], &trace.rows())?;
    write_csv(&paths[1], &utility)?;
    write_csv(&paths[2], &power)?;
    save_realization(&paths[3], &trace.realization)?;
    Ok(paths.to_vec())
}

//! CSV writers. All files are UTF-8 with a header row; floats use the shortest
//! decimal that parses back to the same `f64`.
//!
//! Every file starts with the grid columns of its subcommand (none for `run`,
//! `alpha` for `ablate-alpha`, `prior,delta` for `ablate-prior`), followed by:
//!
//! * `traces.csv`: `replication,round,policy,chosen_arm,cumulative_regret,time_avg_regret`
//! * `curves.csv`: `policy,round,mean_time_avg_regret,variance_time_avg_regret`
//! * `finals.csv`: `replication,policy,final_cumulative_regret,final_time_avg_regret`
//! * `summary.csv`: `policy,replications,final_time_avg_regret_mean,final_time_avg_regret_variance`
//!
//! Rounds count from 1, arms and replications from 0. Variances divide by the number
//! of replications.

use alphats_core::BatchResult;
use std::io::Write;

pub const TRACE_COLUMNS: [&str; 6] = [
    "replication",
    "round",
    "policy",
    "chosen_arm",
    "cumulative_regret",
    "time_avg_regret",
];
pub const CURVE_COLUMNS: [&str; 4] = [
    "policy",
    "round",
    "mean_time_avg_regret",
    "variance_time_avg_regret",
];
pub const FINAL_COLUMNS: [&str; 4] = [
    "replication",
    "policy",
    "final_cumulative_regret",
    "final_time_avg_regret",
];
pub const SUMMARY_COLUMNS: [&str; 4] = [
    "policy",
    "replications",
    "final_time_avg_regret_mean",
    "final_time_avg_regret_variance",
];

/// One batch together with the values of its grid columns.
pub struct Group<'a> {
    pub keys: Vec<String>,
    pub batch: &'a BatchResult,
}

/// Formats an `f64` as the shortest round-trip decimal.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

fn header(grid: &[&str], columns: &[&str]) -> Vec<String> {
    grid.iter().chain(columns).map(|s| s.to_string()).collect()
}

pub fn write_traces<W: Write>(out: W, grid: &[&str], groups: &[Group]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header(grid, &TRACE_COLUMNS))?;
    let mut row: Vec<String> = Vec::with_capacity(grid.len() + TRACE_COLUMNS.len());
    for g in groups {
        for rep in &g.batch.replications {
            for (agg, trace) in g.batch.policies.iter().zip(&rep.traces) {
                for (t, ((arm, cum), avg)) in trace
                    .choices
                    .iter()
                    .zip(&trace.cumulative_regret)
                    .zip(&trace.time_avg)
                    .enumerate()
                {
                    row.clear();
                    row.extend(g.keys.iter().cloned());
                    row.push(rep.index.to_string());
                    row.push((t + 1).to_string());
                    row.push(agg.label.clone());
                    row.push(arm.to_string());
                    row.push(fmt_f64(*cum));
                    row.push(fmt_f64(*avg));
                    w.write_record(&row)?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_curves<W: Write>(out: W, grid: &[&str], groups: &[Group]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header(grid, &CURVE_COLUMNS))?;
    for g in groups {
        for agg in &g.batch.policies {
            for (t, (m, v)) in agg.mean_trace.iter().zip(&agg.variance_trace).enumerate() {
                let mut row = g.keys.clone();
                row.extend([agg.label.clone(), (t + 1).to_string(), fmt_f64(*m), fmt_f64(*v)]);
                w.write_record(&row)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_finals<W: Write>(out: W, grid: &[&str], groups: &[Group]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header(grid, &FINAL_COLUMNS))?;
    for g in groups {
        for rep in &g.batch.replications {
            for (agg, trace) in g.batch.policies.iter().zip(&rep.traces) {
                let mut row = g.keys.clone();
                row.extend([
                    rep.index.to_string(),
                    agg.label.clone(),
                    fmt_f64(trace.final_cumulative()),
                    fmt_f64(trace.final_time_avg()),
                ]);
                w.write_record(&row)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary<W: Write>(out: W, grid: &[&str], groups: &[Group]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header(grid, &SUMMARY_COLUMNS))?;
    for g in groups {
        for agg in &g.batch.policies {
            let mut row = g.keys.clone();
            row.extend([
                agg.label.clone(),
                agg.finals.len().to_string(),
                fmt_f64(agg.final_mean),
                fmt_f64(agg.final_variance),
            ]);
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

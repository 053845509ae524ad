//! Plot-ready CSV emission. Floats print in Rust's shortest round-trip
//! form, so identical runs produce byte-identical files. Action indices
//! are 1-based here, matching every external interface.

use std::io::{self, Write};

use crate::metrics::{d_partials, lambda_schedule};
use crate::types::{RngSeed, RunTrace};

use super::cumulative_regret;

/// One line of the summary-level schema:
/// `T,mean_regret,stderr,bound_cor1,bound_cor2_shape,D,Lambda,lambda_sum,C`.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub horizon: usize,
    pub mean_regret: f64,
    pub stderr: f64,
    pub bound_cor1: f64,
    pub bound_cor2_shape: f64,
    pub d: f64,
    pub lambda: f64,
    pub lambda_sum: f64,
    pub corruption: f64,
}

pub const SUMMARY_HEADER: &str =
    "T,mean_regret,stderr,bound_cor1,bound_cor2_shape,D,Lambda,lambda_sum,C";

pub fn write_summary_csv<W: Write>(mut w: W, rows: &[SummaryRow]) -> io::Result<()> {
    writeln!(w, "{SUMMARY_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            r.horizon,
            r.mean_regret,
            r.stderr,
            r.bound_cor1,
            r.bound_cor2_shape,
            r.d,
            r.lambda,
            r.lambda_sum,
            r.corruption
        )?;
    }
    Ok(())
}

/// Sweep rows prepend `param,value` to the summary schema and append a
/// `status` column (`ok`, or the error text in quotes).
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub param: String,
    pub value: f64,
    pub summary: Option<SummaryRow>,
    pub error: Option<String>,
}

pub fn write_sweep_csv<W: Write>(mut w: W, rows: &[SweepRow]) -> io::Result<()> {
    writeln!(w, "param,value,{SUMMARY_HEADER},status")?;
    for r in rows {
        match (&r.summary, &r.error) {
            (Some(s), None) => writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},ok",
                r.param,
                r.value,
                s.horizon,
                s.mean_regret,
                s.stderr,
                s.bound_cor1,
                s.bound_cor2_shape,
                s.d,
                s.lambda,
                s.lambda_sum,
                s.corruption
            )?,
            (_, Some(e)) => writeln!(
                w,
                "{},{},,,,,,,,,,\"{}\"",
                r.param,
                r.value,
                e.replace('"', "'")
            )?,
            (None, None) => unreachable!("sweep row without result or error"),
        }
    }
    Ok(())
}

/// Round-level schema: `t,seed,action,true_loss,cum_regret,lambda_t,
/// D_partial`, one row per (seed, round), seeds outer. `true_loss` is the
/// loss of the action actually played; `lambda_t` and `D_partial` are
/// commitment-level quantities shared by every seed.
pub fn write_round_csv<W: Write>(
    mut w: W,
    traces: &[RunTrace],
    seeds: &[RngSeed],
    comparator: usize,
) -> io::Result<()> {
    writeln!(w, "t,seed,action,true_loss,cum_regret,lambda_t,D_partial")?;
    let Some(first) = traces.first() else {
        return Ok(());
    };
    let commitment = &first.commitment;
    let lambda = lambda_schedule(commitment);
    let d_cum = d_partials(commitment);
    for (trace, seed) in traces.iter().zip(seeds) {
        let cum = cumulative_regret(trace, comparator);
        for t in 1..=trace.horizon() {
            let action = trace.actions[t - 1];
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                t,
                seed.0,
                action + 1,
                commitment.true_loss(t)[action],
                cum[t - 1],
                lambda[t - 1],
                d_cum[t - 1]
            )?;
        }
    }
    Ok(())
}

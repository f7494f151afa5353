//! Verification suites. Each suite is a list of independent jobs; jobs run
//! in parallel and their rows are concatenated in job order.

pub mod atoms;
pub mod equivalence;
pub mod geometry;
pub mod kernels;
pub mod measures;
pub mod spaces;
pub mod weak;

use rayon::prelude::*;

use crate::error::Result;
use crate::report::ReportRow;

pub type Job<'a> = Box<dyn Fn() -> Result<Vec<ReportRow>> + Send + Sync + 'a>;

pub fn run_jobs(jobs: Vec<Job<'_>>) -> Result<Vec<ReportRow>> {
    let parts: Vec<Vec<ReportRow>> = jobs.par_iter().map(|job| job()).collect::<Result<_>>()?;
    Ok(parts.into_iter().flatten().collect())
}

/// Row for `value <= bound`.
pub(crate) fn at_most(experiment: &str, params: String, value: f64, bound: f64) -> ReportRow {
    ReportRow::new(experiment, params)
        .lhs(value, 0.0)
        .rhs(bound, 0.0)
        .with_ratio()
        .pass(value <= bound)
}

/// Row for an estimate within `k` combined standard errors of a target.
pub(crate) fn within_sigma(
    experiment: &str,
    params: String,
    est: (f64, f64),
    target: (f64, f64),
    k: f64,
) -> ReportRow {
    let band = k * est.1.hypot(target.1);
    ReportRow::new(experiment, params)
        .lhs(est.0, est.1)
        .rhs(target.0, target.1)
        .with_ratio()
        .pass((est.0 - target.0).abs() <= band)
}

/// max/min of positive values.
pub(crate) fn spread(values: &[f64]) -> (f64, f64) {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    (max, min)
}

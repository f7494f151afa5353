//! Automorphism identities and metric properties.

use bergman_core::geometry::{bergman_metric, moebius_apply, noniso_metric_d, pseudo_metric_rho};
use bergman_core::measure::sampling::sphere_direction;
use bergman_core::rng::{derive_seed, NodeStreams};
use bergman_core::{Automorphism, BallPoint, CVec, Complex64};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{at_most, run_jobs, Job};
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::report::{Params, ReportRow};

/// Point with uniform direction and modulus uniform in `[0, max)`.
pub fn random_point(n: usize, max: f64, rng: &mut ChaCha8Rng) -> BallPoint {
    let dir = sphere_direction(n, rng);
    BallPoint::from_cvec(dir.scale(max * rng.random::<f64>())).expect("modulus below one")
}

fn points(n: usize, count: usize, per: usize, max: f64, seed: u64) -> Vec<Vec<BallPoint>> {
    let streams = NodeStreams::new(seed);
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = streams.node(i as u64);
            (0..per).map(|_| random_point(n, max, &mut rng)).collect()
        })
        .collect()
}

fn max_of(xs: impl ParallelIterator<Item = f64>) -> f64 {
    xs.reduce(|| 0.0, f64::max)
}

pub fn automorphisms(cfg: &ExperimentConfig, n: usize) -> Result<Vec<ReportRow>> {
    let count = cfg.trials_or(1000);
    let sample = points(n, count, 2, 0.99, derive_seed(cfg.seed, n as u64));
    let params = Params::new().with("n", n).with("pairs", count).with("max_modulus", 0.99).build();
    let at_origin = max_of(sample.par_iter().map(|zw| {
        let phi = Automorphism::new(zw[0]);
        (*moebius_apply(&phi, &BallPoint::origin(n)).coords() - *zw[0].coords()).norm()
    }));
    let at_base = max_of(sample.par_iter().map(|zw| moebius_apply(&Automorphism::new(zw[0]), &zw[0]).norm()));
    let involution = max_of(sample.par_iter().map(|zw| {
        let phi = Automorphism::new(zw[0]);
        (*phi.apply(&phi.apply(&zw[1])).coords() - *zw[1].coords()).norm()
    }));
    let identity = max_of(sample.par_iter().map(|zw| {
        let (z, w) = (&zw[0], &zw[1]);
        let lhs = 1.0 - Automorphism::new(*z).apply_vec(w.coords()).norm_sqr();
        let rhs = z.defect() * w.defect() / (Complex64::new(1.0, 0.0) - z.inner(w.coords())).norm_sqr();
        (lhs - rhs).abs() / lhs
    }));
    Ok(vec![
        at_most("automorphism.origin_to_base", params.clone(), at_origin, cfg.tol_or(1e-12)),
        at_most("automorphism.base_to_origin", params.clone(), at_base, cfg.tol_or(1e-12)),
        at_most("automorphism.involution", params.clone(), involution, cfg.tol_or(1e-10)),
        at_most("automorphism.defect_identity", params, identity, cfg.tol_or(1e-10)),
    ])
}

pub fn metrics(cfg: &ExperimentConfig, n: usize) -> Result<Vec<ReportRow>> {
    let count = cfg.trials_or(10_000);
    let sample = points(n, count, 3, 0.99, derive_seed(cfg.seed, 0x100 + n as u64));
    let params = Params::new().with("n", n).with("triples", count).build();
    let symmetry = max_of(sample.par_iter().map(|t| (bergman_metric(&t[0], &t[1]) - bergman_metric(&t[1], &t[0])).abs()));
    let triangle = sample
        .par_iter()
        .map(|t| bergman_metric(&t[0], &t[2]) - bergman_metric(&t[0], &t[1]) - bergman_metric(&t[1], &t[2]))
        .reduce(|| f64::NEG_INFINITY, f64::max);
    let rho = |a: &BallPoint, b: &BallPoint| pseudo_metric_rho(a.coords(), b.coords());
    let quasi = sample
        .par_iter()
        .map(|t| {
            let lhs = rho(&t[0], &t[1]);
            let rhs = rho(&t[0], &t[2]) + rho(&t[2], &t[1]);
            if rhs > 0.0 {
                lhs / rhs
            } else {
                0.0
            }
        })
        .reduce(|| 0.0, f64::max);
    let origin_branch = max_of(sample.par_iter().map(|t| (rho(&BallPoint::origin(n), &t[0]) - t[0].norm()).abs()));
    let d_quasi = sample
        .par_iter()
        .map(|t| {
            let zeta = t[2].coords().scale(1.0 / t[2].norm().max(1e-300));
            let lhs = noniso_metric_d(t[0].coords(), &zeta);
            let rhs = noniso_metric_d(t[0].coords(), t[1].coords()) + noniso_metric_d(t[1].coords(), &zeta);
            if rhs > 0.0 {
                lhs / rhs
            } else {
                0.0
            }
        })
        .reduce(|| 0.0, f64::max);
    Ok(vec![
        ReportRow::new("metric.beta_symmetry", params.clone())
            .lhs(symmetry, 0.0)
            .rhs(0.0, 0.0)
            .ratio(0.0)
            .pass(symmetry == 0.0),
        ReportRow::new("metric.beta_triangle", params.clone())
            .lhs(triangle, 0.0)
            .rhs(cfg.tol_or(1e-12), 0.0)
            .with_ratio()
            .pass(triangle <= cfg.tol_or(1e-12)),
        at_most("metric.rho_origin_branch", params.clone(), origin_branch, cfg.tol_or(1e-15)),
        at_most("metric.rho_quasi_triangle", params.clone(), quasi, cfg.windows.quasi_triangle),
        ReportRow::new("metric.d_quasi_triangle", params)
            .lhs(d_quasi, 0.0)
            .rhs(f64::INFINITY, 0.0)
            .ratio(0.0)
            .pass(d_quasi.is_finite()),
    ])
}

/// Hand-computed values of the metrics and the automorphism.
pub fn hand_values() -> Vec<ReportRow> {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let half = BallPoint::from_real(&[0.5]).unwrap();
    let half_i = BallPoint::new(&[c(0.0, 0.5)]).unwrap();
    let cases = [
        ("metric.rho_two_branch", "n=1;z=0.5;w=0.5i", pseudo_metric_rho(half.coords(), half_i.coords()), 2f64.sqrt()),
        (
            "metric.beta_at_origin",
            "n=1;z=0;w=0.5",
            bergman_metric(&BallPoint::origin(1), &half),
            0.5 * 3f64.ln(),
        ),
        (
            "automorphism.one_variable",
            "n=1;z=0.5;w=-0.5",
            moebius_apply(&Automorphism::new(half), &BallPoint::from_real(&[-0.5]).unwrap()).coords()[0].re,
            0.8,
        ),
        (
            "metric.d_example",
            "n=1;z=0.5;zeta=1",
            noniso_metric_d(half.coords(), &CVec::from_real(&[1.0]).unwrap()),
            0.5f64.sqrt(),
        ),
    ];
    cases
        .into_iter()
        .map(|(e, p, got, want)| {
            ReportRow::new(e, p)
                .lhs(got, 0.0)
                .rhs(want, 0.0)
                .with_ratio()
                .pass((got - want).abs() <= 1e-12)
        })
        .collect()
}

pub fn run(cfg: &ExperimentConfig) -> Result<Vec<ReportRow>> {
    let dims = cfg.dims(&[1, 2, 3]);
    let mut jobs: Vec<Job> = Vec::new();
    for &n in &dims {
        jobs.push(Box::new(move || automorphisms(cfg, n)));
    }
    for &n in &dims {
        jobs.push(Box::new(move || metrics(cfg, n)));
    }
    jobs.push(Box::new(|| Ok(hand_values())));
    run_jobs(jobs)
}

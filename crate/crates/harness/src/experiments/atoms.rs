//! Atom axioms, uniform `L^1` bounds of projected atoms, and kernel-sum synthesis.

use bergman_core::atoms::{
    build_lattice, cr_synthesize, projection_l1_norm, synthesis_ratio, synthesis_threshold, Atom, AtomBatch,
};
use bergman_core::rng::{derive_seed, NodeStreams};
use bergman_core::{BergmanError, Complex64, QuadSpec};
use rand::Rng;
use rayon::prelude::*;

use super::{run_jobs, Job};
use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::report::{Params, ReportRow};

fn median(xs: &[f64]) -> f64 {
    let mut s = xs.to_vec();
    s.sort_by(f64::total_cmp);
    s[s.len() / 2]
}

fn count_row(e: &str, params: &Params, holding: usize, total: usize) -> ReportRow {
    ReportRow::new(e, params.build())
        .lhs(holding as f64, 0.0)
        .rhs(total as f64, 0.0)
        .with_ratio()
        .pass(holding == total)
}

pub fn batch(cfg: &ExperimentConfig, n: usize, alpha: f64) -> Result<Vec<ReportRow>> {
    let spec = AtomBatch {
        count: cfg.count,
        q: cfg.q,
        alpha,
        r_range: [0.3, 0.9],
        seed: derive_seed(cfg.seed, 0x500),
    };
    let atoms = spec.generate(n, cfg.nodes_or(1500))?;
    let reports: Vec<_> = atoms.iter().map(|a| a.check_axioms()).collect();
    let total = reports.len();
    let atoms: Vec<&Atom> = atoms.iter().filter(|a| a.is_atom()).collect();
    let params = Params::new()
        .with("n", n)
        .with("q", cfg.q)
        .with("alpha", alpha)
        .with("atoms", total)
        .with("degenerate", total - atoms.len());
    let mut rows = vec![
        count_row("atoms.support", &params, reports.iter().filter(|r| r.support).count(), total),
        count_row("atoms.size", &params, reports.iter().filter(|r| r.size).count(), total),
        count_row("atoms.mean_zero", &params, reports.iter().filter(|r| r.mean_zero).count(), total),
    ];
    let outer = QuadSpec::new(cfg.trials_or(2000), derive_seed(cfg.seed, 0x510));
    let norms: Vec<f64> = atoms
        .par_iter()
        .enumerate()
        .map(|(i, a)| Ok(projection_l1_norm(a, &outer.reseed(i as u64))?.value))
        .collect::<Result<_>>()?;
    let max = norms.iter().copied().fold(0.0, f64::max);
    let med = median(&norms);
    rows.push(
        ReportRow::new("atoms.projection_l1_spread", params.build())
            .lhs(max, 0.0)
            .rhs(med, 0.0)
            .with_ratio()
            .pass(max.is_finite() && med > 0.0 && max / med <= cfg.windows.atom_spread),
    );
    let exceptional = Atom::exceptional(n, cfg.q, alpha)?;
    let one = projection_l1_norm(&exceptional, &outer)?;
    rows.push(
        ReportRow::new("atoms.exceptional_projection", params.build())
            .lhs(one.value, one.stderr)
            .rhs(1.0, 0.0)
            .with_ratio()
            .pass(one.value == 1.0),
    );
    Ok(rows)
}

fn coefficients(len: usize, seed: u64) -> Vec<Complex64> {
    let streams = NodeStreams::new(seed);
    (0..len)
        .map(|i| {
            let mut rng = streams.node(i as u64);
            let modulus = 0.5 + rng.random::<f64>();
            Complex64::from_polar(modulus, std::f64::consts::TAU * rng.random::<f64>())
        })
        .collect()
}

pub fn synthesis(cfg: &ExperimentConfig, n: usize, alpha: f64, p: f64) -> Result<Vec<ReportRow>> {
    let lattice = build_lattice(n, 1.0, 4, 40, derive_seed(cfg.seed, 0x520))?;
    let b = cfg.b.unwrap_or(n as f64 + 1.0);
    let draws = 20;
    let spec = QuadSpec::new(cfg.nodes_or(20_000), derive_seed(cfg.seed, 0x521));
    let ratios: Vec<f64> = (0..draws)
        .into_par_iter()
        .map(|d| {
            let c = coefficients(lattice.len(), derive_seed(cfg.seed, 0x530 + d as u64));
            Ok(synthesis_ratio(&lattice.points, &c, b, p, alpha, &spec)?.value)
        })
        .collect::<Result<_>>()?;
    let med = median(&ratios);
    let worst = ratios.iter().map(|r| (r / med - 1.0).abs()).fold(0.0, f64::max);
    let params = Params::new()
        .with("n", n)
        .with("alpha", alpha)
        .with("p", p)
        .with("b", b)
        .with("lattice", lattice.len())
        .with("separation", format!("{:e}", lattice.min_separation()))
        .with("draws", draws);
    let mut rows = vec![ReportRow::new("synthesis.constant_band", params.build())
        .lhs(worst, 0.0)
        .rhs(cfg.windows.synthesis_band, 0.0)
        .ratio(med)
        .pass(med.is_finite() && med > 0.0 && worst <= cfg.windows.synthesis_band)];

    let c = coefficients(lattice.len(), derive_seed(cfg.seed, 0x530));
    let base = synthesis_ratio(&lattice.points, &c, b, p, alpha, &spec)?;
    let scaled: Vec<Complex64> = c.iter().map(|x| x * Complex64::new(-2.5, 1.5)).collect();
    let other = synthesis_ratio(&lattice.points, &scaled, b, p, alpha, &spec)?;
    rows.push(
        ReportRow::new("synthesis.homogeneous", params.build())
            .lhs(other.value, other.stderr)
            .rhs(base.value, base.stderr)
            .with_ratio()
            .pass((other.value / base.value - 1.0).abs() <= cfg.tol_or(1e-10)),
    );

    let low = synthesis_threshold(n, p, alpha);
    let refused = matches!(
        cr_synthesize(&lattice.points, &c, low, p, alpha),
        Err(BergmanError::Hypothesis(_))
    );
    rows.push(
        ReportRow::new(
            "synthesis.rejects_small_exponent",
            Params::new().with("n", n).with("alpha", alpha).with("p", p).with("b", low).build(),
        )
        .lhs(refused as u8 as f64, 0.0)
        .rhs(1.0, 0.0)
        .with_ratio()
        .pass(refused),
    );
    Ok(rows)
}

pub fn run(cfg: &ExperimentConfig) -> Result<Vec<ReportRow>> {
    let n = cfg.n.unwrap_or(2);
    let alpha = cfg.alpha.unwrap_or(0.0);
    if cfg.count == 0 {
        return Err(HarnessError::Config("atom count must be positive".into()));
    }
    let mut jobs: Vec<Job> = vec![Box::new(move || batch(cfg, n, alpha))];
    for p in cfg.ps(&[1.5, 2.0]) {
        jobs.push(Box::new(move || synthesis(cfg, n, alpha, p)));
    }
    run_jobs(jobs)
}

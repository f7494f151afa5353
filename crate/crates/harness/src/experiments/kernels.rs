//! Size and smoothness constants of the Bergman kernel and of the vector-valued
//! kernels, and agreement of the kernel operators with the functionals.

use bergman_core::holo::invariant_gradient;
use bergman_core::operators::{
    kernel_fiber_by_integration, kernel_size_check, kernel_smoothness_check, vector_kernel_apply, BallNodes,
    FunctionalEvaluator, FunctionalSelector, KernelKind, KernelTarget, OperatorSpec, TripleSampling, VectorKernelId,
};
use bergman_core::rng::{derive_seed, NodeStreams};
use bergman_core::{BallPoint, Complex64, HoloFun, QuadSpec};

use super::geometry::random_point;
use super::{at_most, run_jobs, Job};
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::report::{Params, ReportRow};

const KINDS: [KernelKind; 4] = [KernelKind::Tent, KernelKind::Radial, KernelKind::Grad, KernelKind::InvGrad];

fn kind_name(kind: KernelKind) -> &'static str {
    match kind {
        KernelKind::Tent => "tent",
        KernelKind::Radial => "radial",
        KernelKind::Grad => "grad",
        KernelKind::InvGrad => "invgrad",
    }
}

fn op_spec(cfg: &ExperimentConfig, tag: u64, nodes: usize) -> OperatorSpec {
    OperatorSpec {
        nodes,
        seed: derive_seed(cfg.seed, tag),
        ..OperatorSpec::default()
    }
}

fn drift_row(cfg: &ExperimentConfig, e: &str, params: Params, small: f64, large: f64) -> ReportRow {
    let drift = (large / small - 1.0).abs();
    ReportRow::new(e, params.with("drift", format!("{drift:e}")).build())
        .lhs(large, 0.0)
        .rhs(small, 0.0)
        .with_ratio()
        .pass(large.is_finite() && small > 0.0 && drift <= cfg.windows.doubling_drift)
}

pub fn scalar_size(cfg: &ExperimentConfig, n: usize, alpha: f64) -> Result<Vec<ReportRow>> {
    let pairs = cfg.trials_or(10_000);
    let target = KernelTarget::Bergman { alpha };
    let spec = op_spec(cfg, 0x300 + n as u64, 1);
    let small = kernel_size_check(&target, n, pairs, &spec)?;
    let large = kernel_size_check(&target, n, 2 * pairs, &spec)?;
    let params = Params::new().with("n", n).with("alpha", alpha).with("pairs", pairs);
    Ok(vec![drift_row(cfg, "kernel.size_constant", params, small.constant, large.constant)])
}

pub fn scalar_smoothness(cfg: &ExperimentConfig, n: usize, alpha: f64) -> Result<Vec<ReportRow>> {
    let triples = cfg.trials_or(10_000);
    let target = KernelTarget::Bergman { alpha };
    let spec = op_spec(cfg, 0x310 + n as u64, 1);
    let mut rows = Vec::new();
    for transposed in [false, true] {
        let run = |count| {
            kernel_smoothness_check(&target, n, TripleSampling::NearReference, count, Some(4.0), transposed, &spec)
        };
        let small = run(triples)?;
        let large = run(2 * triples)?;
        let params = Params::new()
            .with("n", n)
            .with("alpha", alpha)
            .with("c1", 4)
            .with("transposed", transposed)
            .with("admissible", small.admissible);
        rows.push(drift_row(cfg, "kernel.smoothness_constant", params, small.constant, large.constant));
    }
    Ok(rows)
}

/// Without the separation filter the constant blows up as `z` and `u` approach the boundary together.
pub fn unfiltered_control(cfg: &ExperimentConfig, n: usize) -> Result<Vec<ReportRow>> {
    let triples = cfg.trials_or(10_000);
    let target = KernelTarget::Bergman { alpha: 0.0 };
    let spec = op_spec(cfg, 0x320 + n as u64, 1);
    let caps = [0.9, 0.99, 0.999, 0.9999];
    let mut rows = Vec::new();
    let mut values = Vec::new();
    for &cap in &caps {
        let r = kernel_smoothness_check(&target, n, TripleSampling::NearDiagonal { cap }, triples, None, false, &spec)?;
        values.push(r.constant);
        rows.push(
            ReportRow::new(
                "kernel.unfiltered_smoothness",
                Params::new().with("n", n).with("alpha", 0).with("cap", cap).build(),
            )
            .lhs(r.constant, 0.0)
            .rhs(f64::NAN, 0.0)
            .ratio(f64::NAN)
            .pass(r.constant.is_finite()),
        );
    }
    let growth = values[values.len() - 1] / values[0];
    rows.push(
        ReportRow::new(
            "kernel.unfiltered_smoothness_diverges",
            Params::new().with("n", n).with("alpha", 0).with("caps", "0.9..0.9999").build(),
        )
        .lhs(values[values.len() - 1], 0.0)
        .rhs(values[0], 0.0)
        .ratio(growth)
        .pass(growth >= cfg.windows.divergence),
    );
    Ok(rows)
}

pub fn vector_constants(cfg: &ExperimentConfig, n: usize, kind: KernelKind) -> Result<Vec<ReportRow>> {
    let gamma = cfg.gamma.unwrap_or(1.0);
    let alpha = cfg.alpha.unwrap_or(0.0);
    let pairs = cfg.trials_or(10_000);
    let id = VectorKernelId::new(kind, alpha, gamma, cfg.q)?;
    let target = KernelTarget::Vector(id);
    let spec = op_spec(cfg, 0x330 + n as u64, cfg.nodes_or(256));
    let small = kernel_size_check(&target, n, pairs, &spec)?;
    let large = kernel_size_check(&target, n, 2 * pairs, &spec)?;
    let base = Params::new()
        .with("n", n)
        .with("kernel", kind_name(kind))
        .with("alpha", alpha)
        .with("gamma", gamma)
        .with("q", cfg.q);
    let mut rows = vec![drift_row(
        cfg,
        "kernel.vector_size_constant",
        base.clone().with("pairs", pairs),
        small.constant,
        large.constant,
    )];
    let run = |count| kernel_smoothness_check(&target, n, TripleSampling::NearReference, count, Some(4.0), false, &spec);
    let small = run(pairs)?;
    let large = run(2 * pairs)?;
    rows.push(drift_row(
        cfg,
        "kernel.vector_smoothness_constant",
        base.with("c1", 4).with("triples", pairs),
        small.constant,
        large.constant,
    ));
    Ok(rows)
}

fn test_function(n: usize) -> Result<HoloFun> {
    let mut c = vec![0.0; n];
    c[0] = 0.6;
    if n > 1 {
        c[1] = -0.3;
    }
    Ok(HoloFun::kernel_power(&BallPoint::from_real(&c)?, n as f64 + 1.0, Complex64::new(1.0, 0.0))?)
}

fn selector(kind: KernelKind, gamma: f64, q: f64) -> FunctionalSelector {
    match kind {
        KernelKind::Tent => FunctionalSelector::Tent { gamma, q },
        KernelKind::Radial => FunctionalSelector::AreaRadial { gamma, q },
        KernelKind::Grad => FunctionalSelector::AreaGrad { gamma, q },
        KernelKind::InvGrad => FunctionalSelector::AreaInvGrad { gamma, q },
    }
}

/// `||T f(z)||_E` against the matching functional on a shared node set.
pub fn enorm(cfg: &ExperimentConfig, n: usize, kind: KernelKind) -> Result<Vec<ReportRow>> {
    let gamma = cfg.gamma.unwrap_or(1.0);
    let alpha = cfg.alpha.unwrap_or(0.0);
    let count = cfg.trials_or(100);
    let f = test_function(n)?;
    let id = VectorKernelId::new(kind, alpha, gamma, cfg.q)?;
    let spec = op_spec(cfg, 0x340, cfg.nodes_or(1024));
    let nodes = BallNodes::new(n, gamma, spec.nodes, spec.seed)?;
    let eval = FunctionalEvaluator::with_nodes(selector(kind, gamma, cfg.q), &f, nodes.clone(), &spec)?;
    let streams = NodeStreams::new(derive_seed(cfg.seed, 0x341 + n as u64));
    let mut worst: f64 = 0.0;
    for i in 0..count {
        let z = random_point(n, 0.95, &mut streams.node(i as u64));
        let t = vector_kernel_apply(&id, &f, &z, &nodes)?;
        let s = eval.eval(&z)?;
        worst = worst.max((t / s - 1.0).abs());
    }
    let params = Params::new()
        .with("n", n)
        .with("kernel", kind_name(kind))
        .with("alpha", alpha)
        .with("gamma", gamma)
        .with("q", cfg.q)
        .with("points", count)
        .build();
    Ok(vec![at_most("kernel.enorm_matches_functional", params, worst, cfg.windows.enorm)])
}

/// Closed-form fibers against direct integration of the kernel at a few points.
pub fn fiber_spot_check(cfg: &ExperimentConfig, n: usize) -> Result<Vec<ReportRow>> {
    let f = test_function(n)?;
    let spec = QuadSpec::new(cfg.nodes_or(200_000), derive_seed(cfg.seed, 0x350 + n as u64));
    let streams = NodeStreams::new(derive_seed(cfg.seed, 0x351));
    let mut rows = Vec::new();
    for kind in KINDS {
        let id = VectorKernelId::new(kind, 0.0, 1.0, cfg.q)?;
        let x = random_point(n, 0.4, &mut streams.node(kind as u64));
        let est = kernel_fiber_by_integration(&id, &f, &x, &spec.reseed(kind as u64))?;
        let g = f.gradient(&x);
        let want: Vec<Complex64> = match kind {
            KernelKind::Tent => vec![f.evaluate(&x)],
            KernelKind::Radial => vec![(0..n).map(|k| x.coords()[k] * g[k]).sum::<Complex64>() * x.defect()],
            KernelKind::Grad => (0..n).map(|k| g[k] * x.defect()).collect(),
            KernelKind::InvGrad => invariant_gradient(&f, &x, 1e-4)?.as_slice().to_vec(),
        };
        let gap = est.iter().zip(&want).map(|(e, w)| (e.value - w).norm()).fold(0.0, f64::max);
        let se = est.iter().map(|e| e.stderr).fold(0.0, f64::max);
        let ok = est.iter().zip(&want).all(|(e, w)| e.within_sigma(*w, cfg.windows.sigma));
        rows.push(
            ReportRow::new(
                "kernel.fiber_reproduces",
                Params::new().with("n", n).with("kernel", kind_name(kind)).build(),
            )
            .lhs(gap, se)
            .rhs(0.0, 0.0)
            .ratio(gap / se)
            .pass(ok),
        );
    }
    Ok(rows)
}

pub fn run(cfg: &ExperimentConfig) -> Result<Vec<ReportRow>> {
    let dims = cfg.dims(&[1, 2]);
    let mut jobs: Vec<Job> = Vec::new();
    for &n in &dims {
        for &alpha in &cfg.alphas(&[0.0, 1.0]) {
            jobs.push(Box::new(move || scalar_size(cfg, n, alpha)));
            jobs.push(Box::new(move || scalar_smoothness(cfg, n, alpha)));
        }
        jobs.push(Box::new(move || unfiltered_control(cfg, n)));
    }
    let vn = cfg.n.unwrap_or(2);
    for kind in KINDS {
        jobs.push(Box::new(move || vector_constants(cfg, vn, kind)));
        jobs.push(Box::new(move || enorm(cfg, vn, kind)));
    }
    jobs.push(Box::new(move || fiber_spot_check(cfg, vn)));
    run_jobs(jobs)
}

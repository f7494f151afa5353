//! Equivalence of the Bergman norm with the `L^p` norms of the maximal, area,
//! tent and Hardy–Littlewood functionals along a family of kernel powers.

use bergman_core::holo::lp_integral;
use bergman_core::measure::{NodeSet, Estimate};
use bergman_core::operators::{FunctionalEvaluator, FunctionalSelector, OperatorSpec};
use bergman_core::rng::derive_seed;
use bergman_core::{BallPoint, Complex64, HoloFun, QuadSpec, Region, Strategy, Weight};

use super::{run_jobs, spread, Job};
use crate::config::ExperimentConfig;
use crate::error::{config_err, Result};
use crate::report::{Params, ReportRow};

pub const FUNCTIONALS: [&str; 10] = [
    "maximal",
    "maximal-k",
    "area-radial",
    "area-radial-k",
    "area-grad",
    "area-invgrad",
    "tent",
    "tent-sup",
    "hlmax",
    "hlmax-k",
];

/// Selectors for a functional name; the `-k` variants expand over `ks`.
pub fn selectors(name: &str, gamma: f64, q: f64, ks: &[u32]) -> Result<Vec<FunctionalSelector>> {
    use FunctionalSelector::*;
    let each = |f: &dyn Fn(u32) -> FunctionalSelector| ks.iter().map(|&k| f(k)).collect();
    Ok(match name {
        "maximal" => vec![Maximal { gamma }],
        "maximal-k" => each(&|k| MaximalK { gamma, k }),
        "area-radial" => vec![AreaRadial { gamma, q }],
        "area-radial-k" => each(&|k| AreaRadialK { gamma, q, k: k + 1 }),
        "area-grad" => vec![AreaGrad { gamma, q }],
        "area-invgrad" => vec![AreaInvGrad { gamma, q }],
        "tent" => vec![Tent { gamma, q }],
        "tent-sup" => vec![TentSup { gamma }],
        "hlmax" => vec![HLMax { gamma, q }],
        "hlmax-k" => each(&|k| HLMaxK { gamma, q, k }),
        other => {
            return Err(config_err(format!(
                "unknown functional {other:?}; expected one of {}",
                FUNCTIONALS.join(", ")
            )))
        }
    })
}

fn label(s: &FunctionalSelector) -> String {
    use FunctionalSelector::*;
    match *s {
        Maximal { .. } => "maximal".into(),
        MaximalK { k, .. } => format!("maximal-k{k}"),
        AreaRadial { .. } => "area-radial".into(),
        AreaRadialK { k, .. } => format!("area-radial-k{k}"),
        AreaGrad { .. } => "area-grad".into(),
        AreaInvGrad { .. } => "area-invgrad".into(),
        Tent { .. } => "tent".into(),
        TentSup { .. } => "tent-sup".into(),
        HLMax { .. } => "hlmax".into(),
        HLMaxK { k, .. } => format!("hlmax-k{k}"),
    }
}

/// Value of the functional's `L^p(v_alpha)` norm for `f = 1`.
pub fn constant_value(s: &FunctionalSelector, n: usize) -> f64 {
    match *s {
        FunctionalSelector::Tent { gamma, q } => gamma.sinh().powi(2 * n as i32).powf(1.0 / q),
        _ if s.kills_constants() => 0.0,
        _ => 1.0,
    }
}

fn op_spec(cfg: &ExperimentConfig, alpha: f64) -> OperatorSpec {
    OperatorSpec {
        nodes: cfg.nodes_or(256),
        seed: derive_seed(cfg.seed, 0x400),
        candidates: 32,
        ascent_steps: 8,
        alpha,
        h: 1e-4,
    }
}

fn outer_strategy(a: &BallPoint, alpha: f64) -> Strategy {
    if a.norm() > 0.5 {
        Strategy::MoebiusMixture {
            poles: vec![*a],
            sigma: alpha,
            defensive: 0.25,
        }
    } else {
        Strategy::WeightedBall { sigma: alpha }
    }
}

pub struct Sweep {
    pub selector: FunctionalSelector,
    pub n: usize,
    pub alpha: f64,
    pub b: f64,
    pub ps: Vec<f64>,
}

/// Per-modulus rows and one sweep row per `p`.
pub fn sweep(cfg: &ExperimentConfig, s: &Sweep) -> Result<Vec<ReportRow>> {
    let n = s.n;
    let spec = op_spec(cfg, s.alpha);
    let outer_nodes = cfg.trials_or(1000);
    let w = Weight::new(n, s.alpha)?;
    let mut ratios = vec![Vec::new(); s.ps.len()];
    let mut rows = Vec::new();
    for (i, &m) in cfg.moduli.iter().enumerate() {
        let mut c = vec![0.0; n];
        c[0] = m;
        let a = BallPoint::from_real(&c)?;
        let f = HoloFun::kernel_power(&a, s.b, Complex64::new(1.0, 0.0))?;
        let eval = FunctionalEvaluator::new(s.selector, &f, &spec)?;
        let outer = QuadSpec::new(outer_nodes, derive_seed(cfg.seed, 0x410))
            .reseed(i as u64)
            .with_strategy(outer_strategy(&a, s.alpha));
        let set = NodeSet::generate(&Region::WholeBall, &w, &outer)?;
        let values = eval.values(&set.points)?;
        let head = if s.selector.kills_constants() { f.at_origin().norm() } else { 0.0 };
        for (j, &p) in s.ps.iter().enumerate() {
            let xs: Vec<f64> = values.iter().zip(&set.weights).map(|(v, wt)| wt * v.powf(p)).collect();
            let func = Estimate::from_samples(&xs).root(p).add(&Estimate::exact(head));
            let norm = lp_integral(&f, p, s.alpha, &QuadSpec::new(100_000, derive_seed(cfg.seed, 0x420)).reseed(i as u64))?
                .root(p);
            let ratio = func.value / norm.value;
            ratios[j].push(ratio);
            let params = Params::new()
                .with("functional", label(&s.selector))
                .with("n", n)
                .with("alpha", s.alpha)
                .with("gamma", s.selector.gamma())
                .with("p", p)
                .with("b", s.b)
                .with("modulus", m);
            rows.push(
                ReportRow::new("equivalence.norm_ratio", params.build())
                    .lhs(func.value, func.stderr)
                    .rhs(norm.value, norm.stderr)
                    .ratio(ratio)
                    .pass(ratio.is_finite() && ratio > 0.0),
            );
        }
    }
    for (j, &p) in s.ps.iter().enumerate() {
        let (max, min) = spread(&ratios[j]);
        let params = Params::new()
            .with("functional", label(&s.selector))
            .with("n", n)
            .with("alpha", s.alpha)
            .with("gamma", s.selector.gamma())
            .with("p", p)
            .with("b", s.b);
        rows.push(
            ReportRow::new("equivalence.sweep", params.build())
                .lhs(max, 0.0)
                .rhs(min, 0.0)
                .ratio(max / min)
                .pass(min > 0.0 && max / min <= cfg.windows.sweep),
        );
    }
    Ok(rows)
}

/// `f = 1` gives exact values.
pub fn constant_rows(cfg: &ExperimentConfig, s: &FunctionalSelector, n: usize, alpha: f64) -> Result<Vec<ReportRow>> {
    let f = HoloFun::constant(n, Complex64::new(1.0, 0.0))?;
    let eval = FunctionalEvaluator::new(*s, &f, &op_spec(cfg, alpha))?;
    let mut c = vec![0.0; n];
    c[0] = 0.7;
    let got = eval.eval(&BallPoint::from_real(&c)?)?;
    let want = constant_value(s, n);
    let tol = cfg.tol_or(1e-12);
    Ok(vec![ReportRow::new(
        "equivalence.constant_function",
        Params::new().with("functional", label(s)).with("n", n).with("gamma", s.gamma()).build(),
    )
    .lhs(got, 0.0)
    .rhs(want, 0.0)
    .with_ratio()
    .pass((got - want).abs() <= tol * want.max(1.0))])
}

pub fn run_named(cfg: &ExperimentConfig, names: &[&str]) -> Result<Vec<ReportRow>> {
    let mut sweeps = Vec::new();
    let mut singles = Vec::new();
    for &n in &cfg.dims(&[1, 2]) {
        for &gamma in &cfg.gammas(&[0.5, 1.0]) {
            for &alpha in &cfg.alphas(&[0.0]) {
                for name in names {
                    for selector in selectors(name, gamma, cfg.q, &cfg.ks(&[1, 2]))? {
                        singles.push((selector, n, alpha));
                        sweeps.push(Sweep {
                            selector,
                            n,
                            alpha,
                            b: cfg.b.unwrap_or(n as f64 + 1.0),
                            ps: cfg.ps(&[1.5, 2.0, 4.0]),
                        });
                    }
                }
            }
        }
    }
    let mut jobs: Vec<Job> = Vec::new();
    for s in &sweeps {
        jobs.push(Box::new(move || sweep(cfg, s)));
    }
    for (s, n, alpha) in &singles {
        jobs.push(Box::new(move || constant_rows(cfg, s, *n, *alpha)));
    }
    run_jobs(jobs)
}

pub fn run(cfg: &ExperimentConfig) -> Result<Vec<ReportRow>> {
    run_named(cfg, &FUNCTIONALS)
}

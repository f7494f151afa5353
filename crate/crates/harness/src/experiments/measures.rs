//! Normalization, ball volumes, change of variables, projection identities
//! and doubling behaviour.

use bergman_core::geometry::{bergman_ball_bounds, moebius_apply};
use bergman_core::measure::{
    doubling_check, integrate, normalizing_constant, pushforward_bergman_ball, DoublingMetric, Strategy,
};
use bergman_core::operators::bergman_project;
use bergman_core::rng::{derive_seed, NodeStreams};
use bergman_core::{Automorphism, BallPoint, CVec, Complex64, HoloFun, QuadSpec, Region, Weight};
use rand::Rng;
use rayon::prelude::*;

use super::geometry::random_point;
use super::{at_most, run_jobs, spread, within_sigma, Job};
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::report::{Params, ReportRow};

fn axis_point(n: usize, modulus: f64) -> BallPoint {
    let mut c = vec![0.0; n];
    c[0] = modulus;
    BallPoint::from_real(&c).expect("modulus below one")
}

pub fn normalization(cfg: &ExperimentConfig, n: usize, alpha: f64) -> Result<Vec<ReportRow>> {
    let nodes = cfg.nodes_or(1_000_000);
    let sigma = (alpha - 1.0) / 2.0;
    let spec = QuadSpec::new(nodes, derive_seed(cfg.seed, 0x200 + n as u64))
        .reseed(alpha.to_bits())
        .with_strategy(Strategy::WeightedBall { sigma });
    let est = integrate(|_| 1.0, &Region::WholeBall, &Weight::new(n, alpha)?, &spec)?;
    let params = Params::new().with("n", n).with("alpha", alpha).with("sigma", sigma).with("nodes", nodes);
    Ok(vec![within_sigma(
        "measure.normalization",
        params.build(),
        (est.value, est.stderr),
        (1.0, 0.0),
        cfg.windows.sigma,
    )])
}

pub fn constants() -> Vec<ReportRow> {
    [(3usize, 0.0, 1.0), (1, 1.0, 2.0), (2, 0.5, 1.875)]
        .into_iter()
        .map(|(n, alpha, want)| {
            let got = normalizing_constant(n, alpha);
            ReportRow::new("measure.normalizing_constant", Params::new().with("n", n).with("alpha", alpha).build())
                .lhs(got, 0.0)
                .rhs(want, 0.0)
                .with_ratio()
                .pass((got - want).abs() <= 1e-12)
        })
        .collect()
}

pub fn tau_ball(cfg: &ExperimentConfig) -> Result<Vec<ReportRow>> {
    let gamma: f64 = 1.0;
    let r = gamma.tanh();
    let nodes = cfg.nodes_or(200_000);
    let spec = QuadSpec::new(nodes, derive_seed(cfg.seed, 0x210)).with_strategy(Strategy::BoundingBall {
        center: CVec::zeros(1),
        radius: r,
    });
    let region = Region::bergman_ball(BallPoint::origin(1), gamma)?;
    let est = integrate(|_| 1.0, &region, &Weight::invariant(1), &spec)?;
    Ok(vec![within_sigma(
        "measure.invariant_ball_volume",
        Params::new().with("n", 1).with("gamma", gamma).with("nodes", nodes).build(),
        (est.value, est.stderr),
        (r * r / (1.0 - r * r), 0.0),
        cfg.windows.sigma,
    )])
}

/// `v_alpha(D(z,gamma)) / (1-|z|^2)^(n+1+alpha)` along the configured moduli.
pub fn volume_window(cfg: &ExperimentConfig, n: usize, alpha: f64, gamma: f64) -> Result<Vec<ReportRow>> {
    let nodes = cfg.nodes_or(200_000);
    let w = Weight::new(n, alpha)?;
    let mut rows = Vec::new();
    let mut ratios = Vec::new();
    for (i, &m) in cfg.moduli.iter().enumerate() {
        let z = axis_point(n, m);
        let spec = QuadSpec::new(nodes, derive_seed(cfg.seed, 0x220)).reseed(i as u64);
        let vol = pushforward_bergman_ball(|_| 1.0, &z, gamma, &w, &spec)?;
        let scale = z.defect().powf(n as f64 + 1.0 + alpha);
        let ratio = vol.value / scale;
        ratios.push(ratio);
        let params = Params::new().with("n", n).with("alpha", alpha).with("gamma", gamma).with("modulus", m);
        rows.push(
            ReportRow::new("volume.ball_scaling", params.build())
                .lhs(vol.value, vol.stderr)
                .rhs(scale, 0.0)
                .ratio(ratio)
                .pass(ratio.is_finite() && ratio > 0.0),
        );
    }
    let (max, min) = spread(&ratios);
    let tail = if ratios.len() >= 2 {
        ratios[ratios.len() - 1] / ratios[ratios.len() - 2]
    } else {
        1.0
    };
    let params = Params::new()
        .with("n", n)
        .with("alpha", alpha)
        .with("gamma", gamma)
        .with("last_step_growth", format!("{tail:e}"));
    rows.push(
        ReportRow::new("volume.ball_scaling_window", params.build())
            .lhs(max, 0.0)
            .rhs(min, 0.0)
            .ratio(max / min)
            .pass(max / min <= cfg.windows.sweep && tail <= 2.0),
    );
    Ok(rows)
}

/// Modulus drawn so that `1 - |a|` is log-uniform in `[1e-3, 1]`.
fn boundary_layer_point(n: usize, rng: &mut rand_chacha::ChaCha8Rng) -> BallPoint {
    let dir = bergman_core::measure::sampling::sphere_direction(n, rng);
    let gap = 10f64.powf(-3.0 * rng.random::<f64>());
    BallPoint::from_cvec(dir.scale(1.0 - gap)).expect("modulus below one")
}

/// Comparability of `1-|a|^2`, `1-|z|^2`, `|1-<a,z>|` for `z` in `D(a,gamma)`, and
/// of `|1-<z,u>|`, `|1-<z,v>|` for `beta(u,v) < gamma`, `z` in the closed ball.
pub fn comparability(cfg: &ExperimentConfig, n: usize, gamma: f64) -> Result<Vec<ReportRow>> {
    let count = cfg.trials_or(1000);
    let r = gamma.tanh();
    let streams = NodeStreams::new(derive_seed(cfg.seed, 0x230 + n as u64).wrapping_add(gamma.to_bits()));
    let one = Complex64::new(1.0, 0.0);
    let (three, two): (Vec<f64>, Vec<f64>) = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = streams.node(i as u64);
            let a = boundary_layer_point(n, &mut rng);
            let x = random_point(n, r, &mut rng);
            let z = moebius_apply(&Automorphism::new(a), &x);
            let qs = [a.defect(), z.defect(), (one - a.inner(z.coords())).norm()];
            let (hi, lo) = spread(&qs);
            let u = boundary_layer_point(n, &mut rng);
            let v = moebius_apply(&Automorphism::new(u), &random_point(n, r, &mut rng));
            let dir = bergman_core::measure::sampling::sphere_direction(n, &mut rng);
            let w = if rng.random::<bool>() { dir } else { dir.scale(rng.random::<f64>()) };
            let du = (one - w.inner(u.coords())).norm();
            let dv = (one - w.inner(v.coords())).norm();
            (hi / lo, du.max(dv) / du.min(dv))
        })
        .unzip();
    let params = Params::new().with("n", n).with("gamma", gamma).with("samples", count).build();
    Ok(vec![
        at_most(
            "comparability.defects_in_ball",
            params.clone(),
            spread(&three).0,
            cfg.windows.sweep,
        ),
        at_most("comparability.kernel_base_shift", params, spread(&two).0, cfg.windows.sweep),
    ])
}

/// Pushforward against rejection from a bounding Euclidean ball.
pub fn change_of_variables(cfg: &ExperimentConfig, n: usize) -> Result<Vec<ReportRow>> {
    let nodes = cfg.nodes_or(200_000);
    let g = |w: &BallPoint| 1.0 + w.coords()[0].re + w.coords().norm_sqr();
    let mut rows = Vec::new();
    let mut case = 0u64;
    for &m in &[0.5, 0.9] {
        for &gamma in &cfg.gammas(&[0.5, 1.0]) {
            for measure in [None, Some(0.0), Some(1.0)] {
                case += 1;
                let w = match measure {
                    None => Weight::invariant(n),
                    Some(a) => Weight::new(n, a)?,
                };
                let z = axis_point(n, m);
                let spec = QuadSpec::new(nodes, derive_seed(cfg.seed, 0x240)).reseed(case);
                let push = pushforward_bergman_ball(g, &z, gamma, &w, &spec)?;
                let (center, radius) = bergman_ball_bounds(&z, gamma);
                let rej = integrate(
                    g,
                    &Region::bergman_ball(z, gamma)?,
                    &w,
                    &spec.reseed(0xBB).with_strategy(Strategy::BoundingBall { center, radius }),
                )?;
                let label = measure.map_or("tau".to_string(), |a| format!("v_{a}"));
                let params = Params::new().with("n", n).with("modulus", m).with("gamma", gamma).with("measure", label);
                rows.push(within_sigma(
                    "volume.pushforward_vs_rejection",
                    params.build(),
                    (push.value, push.stderr),
                    (rej.value, rej.stderr),
                    cfg.windows.sigma,
                ));
            }
        }
    }
    Ok(rows)
}

/// `v_alpha(D(z,gamma))` in the disc by a midpoint grid over the bounding square.
pub fn disc_grid_volume(z: f64, gamma: f64, alpha: f64, m: usize) -> f64 {
    let center = BallPoint::from_real(&[z]).expect("modulus below one");
    let (c, radius) = bergman_ball_bounds(&center, gamma);
    let r = gamma.tanh();
    let phi = Automorphism::new(center);
    let c_alpha = normalizing_constant(1, alpha);
    let h = 2.0 * radius / m as f64;
    let c0 = c.as_slice()[0];
    let rows: Vec<f64> = (0..m)
        .into_par_iter()
        .map(|i| {
            let y = c0.im - radius + (i as f64 + 0.5) * h;
            let mut acc = 0.0;
            for j in 0..m {
                let x = c0.re - radius + (j as f64 + 0.5) * h;
                let w2 = x * x + y * y;
                if w2 >= 1.0 {
                    continue;
                }
                let wv = CVec::from_slice(&[Complex64::new(x, y)]).expect("one coordinate");
                if phi.apply_vec(&wv).norm() < r {
                    acc += c_alpha * (1.0 - w2).powf(alpha);
                }
            }
            acc
        })
        .collect();
    bergman_core::rng::pairwise_sum(&rows) * h * h / std::f64::consts::PI
}

pub fn grid_oracle(cfg: &ExperimentConfig) -> Result<Vec<ReportRow>> {
    let nodes = cfg.nodes_or(200_000);
    let mut rows = Vec::new();
    let mut case = 0;
    for &m in &[0.0, 0.5, 0.9] {
        for &gamma in &[0.5, 1.0] {
            for &alpha in &[0.0, 1.0] {
                case += 1;
                let z = axis_point(1, m);
                let spec = QuadSpec::new(nodes, derive_seed(cfg.seed, 0x250)).reseed(case);
                let est = pushforward_bergman_ball(|_| 1.0, &z, gamma, &Weight::new(1, alpha)?, &spec)?;
                let grid = disc_grid_volume(m, gamma, alpha, 1500);
                let rel = (est.value / grid - 1.0).abs();
                let params = Params::new().with("n", 1).with("modulus", m).with("gamma", gamma).with("alpha", alpha);
                rows.push(
                    ReportRow::new("volume.grid_oracle", params.build())
                        .lhs(est.value, est.stderr)
                        .rhs(grid, 0.0)
                        .with_ratio()
                        .pass(rel <= cfg.windows.grid),
                );
            }
        }
    }
    Ok(rows)
}

fn test_polynomial(n: usize) -> Result<HoloFun> {
    let c = Complex64::new;
    let mut f = HoloFun::constant(n, c(1.0, 0.0))?;
    let mut add = |coeff: Complex64, idx: &[u32]| -> Result<()> {
        f = f.sum(&HoloFun::monomial(n, coeff, idx)?)?;
        Ok(())
    };
    if n == 1 {
        add(c(2.0, 0.0), &[1])?;
        add(c(-1.0, 0.5), &[2])?;
        add(c(0.5, 0.0), &[3])?;
    } else {
        let mut idx = vec![0; n];
        idx[0] = 1;
        add(c(-1.0, 0.0), &idx)?;
        idx[1] = 1;
        add(c(2.0, 0.0), &idx)?;
        let mut cube = vec![0; n];
        cube[1] = 3;
        add(c(0.0, -0.5), &cube)?;
        let mut mixed = vec![0; n];
        mixed[0] = 2;
        mixed[n - 1] += 1;
        add(c(0.75, 0.25), &mixed)?;
    }
    Ok(f)
}

pub fn projection(cfg: &ExperimentConfig, n: usize, alpha: f64) -> Result<Vec<ReportRow>> {
    let nodes = cfg.nodes_or(200_000);
    let count = cfg.trials_or(20);
    let k = cfg.windows.sigma;
    let f = test_polynomial(n)?;
    let streams = NodeStreams::new(derive_seed(cfg.seed, 0x260 + n as u64).wrapping_add(alpha.to_bits()));
    let mut rows = Vec::new();
    for i in 0..count {
        let z = random_point(n, 0.5, &mut streams.node(i as u64));
        let spec = QuadSpec::new(nodes, derive_seed(cfg.seed, 0x261)).reseed(i as u64);
        let est = bergman_project(|w| f.evaluate(w), alpha, &z, &spec)?;
        let want = f.evaluate(&z);
        let params = Params::new().with("n", n).with("alpha", alpha).with("point", i).with("degree", 3);
        rows.push(
            ReportRow::new("projection.reproduces_polynomial", params.build())
                .lhs((est.value - want).norm(), est.stderr)
                .rhs(0.0, 0.0)
                .ratio((est.value - want).norm() / est.stderr)
                .pass(est.within_sigma(want, k)),
        );
    }
    let z = random_point(n, 0.5, &mut streams.node(count as u64));
    let z1 = z.coords()[0];
    let nf = n as f64;
    let spec = QuadSpec::new(nodes, derive_seed(cfg.seed, 0x262));
    let conj = bergman_project(|w| w.coords()[0].conj(), alpha, &z, &spec)?;
    let stated = z1 * ((nf + 1.0 + alpha) / (nf + 2.0 + alpha));
    let base = Params::new().with("n", n).with("alpha", alpha).with("z1", format!("{:e}{:+e}i", z1.re, z1.im));
    let complex_row = |e: &str, est: &bergman_core::measure::ComplexEstimate, want: Complex64| {
        ReportRow::new(e, base.build())
            .lhs(est.value.norm(), est.stderr)
            .rhs(want.norm(), 0.0)
            .ratio((est.value - want).norm() / est.stderr)
            .pass(est.within_sigma(want, k))
    };
    rows.push(complex_row("projection.conjugate_coordinate_stated", &conj, stated));
    rows.push(complex_row("projection.conjugate_coordinate", &conj, Complex64::new(0.0, 0.0)));
    let cubic = bergman_project(|w| w.coords()[0] * w.coords().norm_sqr(), alpha, &z, &spec.reseed(1))?;
    rows.push(complex_row(
        "projection.coordinate_times_norm",
        &cubic,
        z1 * ((nf + 1.0) / (nf + alpha + 2.0)),
    ));
    let one = bergman_project(|_| Complex64::new(1.0, 0.0), alpha, &z, &spec.reseed(2))?;
    rows.push(complex_row("projection.constant", &one, Complex64::new(1.0, 0.0)));
    Ok(rows)
}

pub fn doubling(cfg: &ExperimentConfig) -> Result<Vec<ReportRow>> {
    let nodes = cfg.nodes_or(200_000);
    let spec = QuadSpec::new(nodes, derive_seed(cfg.seed, 0x270));
    let rho = doubling_check(DoublingMetric::Rho, 1, 0.0, 100, &spec)?;
    let beta = doubling_check(DoublingMetric::Bergman, 1, 0.0, 8, &spec)?;
    Ok(vec![
        ReportRow::new(
            "doubling.rho",
            Params::new().with("n", 1).with("alpha", 0).with("balls", rho.samples.len()).with("skipped", rho.skipped).build(),
        )
        .lhs(rho.max_ratio, 0.0)
        .rhs(rho.min_ratio, 0.0)
        .ratio(rho.max_ratio / rho.min_ratio)
        .pass(rho.max_ratio.is_finite() && rho.min_ratio >= 1.0),
        ReportRow::new(
            "doubling.bergman_metric_fails",
            Params::new().with("n", 1).with("alpha", 0).with("max_modulus", beta.samples.last().map_or(0.0, |s| s.0)).build(),
        )
        .lhs(beta.max_ratio, 0.0)
        .rhs(beta.min_ratio, 0.0)
        .ratio(beta.max_ratio / beta.min_ratio)
        .pass(beta.max_ratio / beta.min_ratio >= cfg.windows.divergence),
    ])
}

pub fn run(cfg: &ExperimentConfig) -> Result<Vec<ReportRow>> {
    let dims = cfg.dims(&[1, 2, 3]);
    let mut jobs: Vec<Job> = Vec::new();
    for &n in &dims {
        for &alpha in &cfg.alphas(&[-0.5, 0.0, 1.0, 2.5]) {
            jobs.push(Box::new(move || normalization(cfg, n, alpha)));
        }
    }
    jobs.push(Box::new(|| Ok(constants())));
    jobs.push(Box::new(|| tau_ball(cfg)));
    let small: Vec<usize> = dims.iter().copied().filter(|&n| n <= 2).collect();
    for &n in &small {
        for &alpha in &cfg.alphas(&[0.0]) {
            for &gamma in &cfg.gammas(&[0.5, 1.0, 2.0]) {
                jobs.push(Box::new(move || volume_window(cfg, n, alpha, gamma)));
            }
        }
        for &gamma in &cfg.gammas(&[0.5, 1.0]) {
            jobs.push(Box::new(move || comparability(cfg, n, gamma)));
        }
        jobs.push(Box::new(move || change_of_variables(cfg, n)));
    }
    jobs.push(Box::new(|| grid_oracle(cfg)));
    for &n in &small {
        for &alpha in &cfg.alphas(&[0.0, 1.0]) {
            jobs.push(Box::new(move || projection(cfg, n, alpha)));
        }
    }
    jobs.push(Box::new(|| doubling(cfg)));
    run_jobs(jobs)
}

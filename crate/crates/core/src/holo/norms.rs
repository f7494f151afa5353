//! Bergman-type norms of family members by Monte-Carlo quadrature.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{HoloFun, Term};
use crate::error::{invalid, Result};
use crate::geometry::{BallPoint, CVec, Region};
use crate::measure::{integrate, normalizing_constant, Estimate, QuadSpec, Sampler, Strategy, Weight};

/// Poles of kernel terms with modulus above `threshold`.
pub fn significant_poles(f: &HoloFun, threshold: f64) -> Vec<BallPoint> {
    let mut poles: Vec<BallPoint> = Vec::new();
    for t in f.terms() {
        if let Term::Kernel { pole, .. } = t {
            if pole.norm() > threshold && !poles.iter().any(|p| p.coords() == pole) {
                if let Ok(p) = BallPoint::from_cvec(*pole) {
                    poles.push(p);
                }
            }
        }
    }
    poles
}

/// Sampling strategy for `int g dv_sigma` when `g` is concentrated near the poles of `f`.
pub fn pole_strategy(f: &HoloFun, sigma: f64) -> Strategy {
    let poles = significant_poles(f, 0.5);
    if poles.is_empty() {
        Strategy::WeightedBall { sigma }
    } else {
        Strategy::MoebiusMixture {
            poles,
            sigma,
            defensive: 0.25,
        }
    }
}

fn resolve(spec: &QuadSpec, f: &HoloFun, sigma: f64) -> QuadSpec {
    match spec.strategy {
        Strategy::Auto => spec.clone().with_strategy(pole_strategy(f, sigma)),
        _ => spec.clone(),
    }
}

/// `||f||_{p,alpha} = (int |f|^p dv_alpha)^(1/p)`.
pub fn bergman_norm(f: &HoloFun, p: f64, alpha: f64, spec: &QuadSpec) -> Result<Estimate> {
    Ok(lp_integral(f, p, alpha, spec)?.root(p))
}

/// `int |f|^p dv_alpha`.
pub fn lp_integral(f: &HoloFun, p: f64, alpha: f64, spec: &QuadSpec) -> Result<Estimate> {
    if !(p > 0.0) {
        return Err(invalid(format!("p must be positive, got {p}")));
    }
    if !(alpha > -1.0) {
        return Err(invalid(format!("Bergman norm needs alpha > -1, got {alpha}")));
    }
    let w = Weight::new(f.dim(), alpha)?;
    let spec = resolve(spec, f, alpha);
    integrate(|z| f.evaluate(z).norm().powf(p), &Region::WholeBall, &w, &spec)
}

/// Smallest nonnegative integer `N` with `p N + alpha > -1`.
pub fn derivative_order(p: f64, alpha: f64) -> u32 {
    let mut n = 0;
    while p * n as f64 + alpha <= -1.0 {
        n += 1;
    }
    n
}

/// `|f(0)| + (int (1-|z|^2)^{pN} |R^N f|^p dv_alpha)^(1/p)` with the minimal admissible `N`.
pub fn generalized_norm(f: &HoloFun, p: f64, alpha: f64, spec: &QuadSpec) -> Result<Estimate> {
    if !(p > 0.0) || !alpha.is_finite() {
        return Err(invalid(format!("invalid (p, alpha) = ({p}, {alpha})")));
    }
    let order = derivative_order(p, alpha);
    let sigma = alpha + p * order as f64;
    let rf = f.radial_derivative(order)?;
    let w = Weight::new(f.dim(), sigma)?;
    let spec = resolve(spec, &rf, sigma);
    let scale = normalizing_constant(f.dim(), alpha) / w.c_alpha;
    let integral = if rf.is_zero() {
        Estimate::exact(0.0)
    } else {
        integrate(|z| rf.evaluate(z).norm().powf(p), &Region::WholeBall, &w, &spec)?.scale(scale)
    };
    let head = Estimate::exact(f.at_origin().norm());
    Ok(head.add(&integral.root(p)))
}

/// Sampled `sup |grad~ f|` over `v_0` nodes plus the origin (a lower bound).
///
/// Node `i` does not depend on the node count, so the estimate is
/// non-decreasing in `spec.nodes` for a fixed seed.
pub fn bloch_seminorm(f: &HoloFun, spec: &QuadSpec) -> Result<Estimate> {
    let n = f.dim();
    let spec = spec.clone().with_strategy(Strategy::WeightedBall { sigma: 0.0 });
    let sampler = Sampler::new(&Region::WholeBall, &Weight::new(n, 0.0)?, &spec)?;
    let best = (0..spec.nodes)
        .into_par_iter()
        .map(|i| f.invariant_gradient_norm(&sampler.node(i).0))
        .reduce(|| 0.0, f64::max);
    let at_origin = f.invariant_gradient_norm(&BallPoint::origin(n));
    Ok(Estimate {
        value: best.max(at_origin),
        stderr: 0.0,
        nodes: spec.nodes + 1,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MembershipReport {
    pub moduli: Vec<f64>,
    /// `||f_a||^p_{p,alpha}` for the normalized kernel `f_a` at each modulus.
    pub values: Vec<Estimate>,
    /// Ratio of consecutive values.
    pub growth: Vec<f64>,
    pub divergent: bool,
    /// `p b <= n + 1 + alpha`.
    pub predicted_divergent: bool,
}

/// Tail test for the kernel power `(1 - <z,a>)^-b` in `A^p_alpha`.
///
/// Each kernel is normalized as `(1-|a|^2)^{(pb-n-1-alpha)/p} (1-<z,a>)^-b`.
/// Along `|a| = 0.9, 0.99, 0.999` these have bounded `p`-th power integrals
/// exactly when `pb > n+1+alpha`; otherwise they grow without bound. The
/// family is flagged divergent when the last growth ratio exceeds `1.15`.
pub fn membership_check(
    direction: &CVec,
    b: f64,
    p: f64,
    alpha: f64,
    spec: &QuadSpec,
) -> Result<MembershipReport> {
    let n = direction.dim();
    let nf = n as f64;
    let norm = direction.norm();
    if norm == 0.0 {
        return Err(invalid("direction must be nonzero"));
    }
    if !(alpha > -1.0 && p > 0.0 && b > 0.0) {
        return Err(invalid("membership check needs alpha > -1, p > 0, b > 0"));
    }
    let moduli = vec![0.9, 0.99, 0.999];
    let w = Weight::new(n, alpha)?;
    let sigma = (p * b / 2.0 - nf - 1.0).clamp((alpha - 1.0) / 2.0, alpha);
    let mut values = Vec::with_capacity(moduli.len());
    for (i, &m) in moduli.iter().enumerate() {
        let a = BallPoint::from_cvec(direction.scale(m / norm))?;
        let scale = (1.0 - m * m).powf(p * b - nf - 1.0 - alpha);
        let spec = spec.reseed(i as u64).with_strategy(Strategy::MoebiusMixture {
            poles: vec![a],
            sigma,
            defensive: 0.2,
        });
        let one = Complex64::new(1.0, 0.0);
        let est = integrate(
            |z| (one - z.inner(a.coords())).norm().powf(-p * b) * scale,
            &Region::WholeBall,
            &w,
            &spec,
        )?;
        values.push(est);
    }
    let growth: Vec<f64> = values.windows(2).map(|v| v[1].value / v[0].value).collect();
    Ok(MembershipReport {
        divergent: *growth.last().unwrap() > 1.15,
        predicted_divergent: p * b <= nf + 1.0 + alpha,
        moduli,
        values,
        growth,
    })
}

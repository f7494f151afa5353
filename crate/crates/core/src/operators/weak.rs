//! Distribution-function profiles `lambda v_alpha(|P_alpha f| > lambda)`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bergman_kernel;
use crate::error::{invalid, Result};
use crate::geometry::{CVec, Region};
use crate::holo::HoloFun;
use crate::measure::{NodeSet, QuadSpec, Strategy, Weight};
use crate::rng::derive_seed;

/// Number of points on the `lambda` grid.
pub const LAMBDA_POINTS: usize = 48;

#[derive(Clone, Debug)]
pub enum WeakInput {
    /// A family member; `P_alpha f = f` exactly.
    Holomorphic(HoloFun),
    /// `chi_Q / v_alpha(Q)` for the tube `Q_r(zeta)`.
    TubeBump { zeta: CVec, r: f64 },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WeakProfile {
    pub lambdas: Vec<f64>,
    /// `lambda * v_alpha(|P f| > lambda)` on the grid.
    pub values: Vec<f64>,
    pub sup: f64,
    pub sup_stderr: f64,
    pub median: f64,
}

/// Profile of `P_alpha` applied to `input`.
///
/// `outer` draws the points where `|P f|` is evaluated (distributed by
/// `v_alpha`); `inner_nodes` tube nodes give each value of `P f` for a tube
/// bump as a self-normalized average. The grid has 48 logarithmic points
/// spanning `[1e-3, 1e3]` times the median of `|P f|`.
pub fn weak_type_profile(
    input: &WeakInput,
    n: usize,
    alpha: f64,
    outer: &QuadSpec,
    inner_nodes: usize,
) -> Result<WeakProfile> {
    if !(alpha > -1.0) {
        return Err(invalid(format!("weak-type profile needs alpha > -1, got {alpha}")));
    }
    let w = Weight::new(n, alpha)?;
    let sample = NodeSet::generate(
        &Region::WholeBall,
        &w,
        &outer.clone().with_strategy(Strategy::WeightedBall { sigma: alpha }),
    )?;
    let values: Vec<f64> = match input {
        WeakInput::Holomorphic(f) => sample.points.par_iter().map(|z| f.evaluate(z).norm()).collect(),
        WeakInput::TubeBump { zeta, r } => {
            let tube = Region::carleson_tube(*zeta, *r)?;
            let inner = NodeSet::generate(
                &tube,
                &w,
                &QuadSpec::new(inner_nodes, derive_seed(outer.seed, 0x7B)),
            )?;
            let total: f64 = inner.weights.iter().sum();
            if !(total > 0.0) {
                return Err(invalid("tube bump has no quadrature mass"));
            }
            sample
                .points
                .par_iter()
                .map(|z| {
                    let s: Complex64 = inner
                        .points
                        .iter()
                        .zip(&inner.weights)
                        .map(|(u, &wt)| bergman_kernel(alpha, z, u) * wt)
                        .sum();
                    (s / total).norm()
                })
                .collect()
        }
    };
    if let Some(index) = values.iter().position(|v| !v.is_finite()) {
        return Err(crate::error::BergmanError::NonFiniteSample { index });
    }
    let mut sorted = values.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    let base = if median > 0.0 { median } else { 1.0 };
    let count = values.len() as f64;
    let lambdas: Vec<f64> = (0..LAMBDA_POINTS)
        .map(|i| base * 10f64.powf(-3.0 + 6.0 * i as f64 / (LAMBDA_POINTS - 1) as f64))
        .collect();
    let mut profile = Vec::with_capacity(LAMBDA_POINTS);
    let mut sup = 0.0;
    let mut sup_stderr = 0.0;
    for &lambda in &lambdas {
        let above = sorted.len() - sorted.partition_point(|&v| v <= lambda);
        let frac = above as f64 / count;
        let v = lambda * frac;
        if v > sup {
            sup = v;
            sup_stderr = lambda * (frac * (1.0 - frac) / count).sqrt();
        }
        profile.push(v);
    }
    Ok(WeakProfile {
        lambdas,
        values: profile,
        sup,
        sup_stderr,
        median,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn constant_input_profile() {
        let f = HoloFun::constant(1, Complex64::new(1.0, 0.0)).unwrap();
        let p = weak_type_profile(&WeakInput::Holomorphic(f), 1, 0.0, &QuadSpec::new(1000, 1), 10).unwrap();
        assert_eq!(p.median, 1.0);
        assert_relative_eq!(p.sup, 10f64.powf(-3.0 / 47.0), max_relative = 1e-12);
        assert!(p.sup < 1.0);
    }
}

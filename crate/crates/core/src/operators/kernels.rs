//! Vector-valued Bergman kernels with values in `E = L^q(D(0,gamma), tau)`,
//! and empirical size and smoothness constants.
//!
//! For `x = phi_z(w)` and `c = n + 1 + alpha` the four kernels are
//!
//! ```text
//! tent     (1 - <x,u>)^-c
//! radial   c (1-|x|^2) <x,u> (1 - <x,u>)^-(c+1)
//! grad     c (1-|x|^2) conj(u) (1 - <x,u>)^-(c+1)
//! invgrad  c (1-|x|^2)^c conj(phi_x(u)) |1 - <x,u>|^-2c
//! ```
//!
//! Against `dv_alpha(u)` they reproduce `f(x)`, `(1-|x|^2) Rf(x)`,
//! `(1-|x|^2) grad f(x)` and `grad~ f(x)` for holomorphic `f`.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{bergman_kernel, BallNodes, OperatorSpec};
use crate::error::{invalid, BergmanError, Result};
use crate::geometry::{pseudo_metric_rho, Automorphism, BallPoint, CVec, Region};
use crate::holo::HoloFun;
use crate::measure::sampling::sphere_direction;
use crate::measure::{integrate_complex, ComplexEstimate, Proposal, QuadSpec, Weight};
use crate::rng::{derive_seed, NodeStreams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelKind {
    Tent,
    Radial,
    Grad,
    InvGrad,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VectorKernelId {
    pub kind: KernelKind,
    pub alpha: f64,
    pub gamma: f64,
    pub q: f64,
}

impl VectorKernelId {
    pub fn new(kind: KernelKind, alpha: f64, gamma: f64, q: f64) -> Result<Self> {
        if !(alpha > -1.0) {
            return Err(invalid(format!("kernel needs alpha > -1, got {alpha}")));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(invalid(format!("gamma must be positive, got {gamma}")));
        }
        if !(q > 1.0 && q.is_finite()) {
            return Err(invalid(format!("q must lie in (1, inf), got {q}")));
        }
        Ok(Self { kind, alpha, gamma, q })
    }
}

/// `K(z,u)(w)` evaluated at `x = phi_z(w)`; scalar kernels return a 1-vector.
pub fn kernel_fiber(id: &VectorKernelId, x: &BallPoint, u: &BallPoint) -> CVec {
    let n = x.dim();
    let c = n as f64 + 1.0 + id.alpha;
    let g = x.inner(u.coords());
    let d = Complex64::new(1.0, 0.0) - g;
    let pow = |e: f64| -> Complex64 {
        if e.fract() == 0.0 {
            d.powi(-(e as i32))
        } else {
            (d.ln() * (-e)).exp()
        }
    };
    match id.kind {
        KernelKind::Tent => CVec::basis(1, 0, pow(c)),
        KernelKind::Radial => CVec::basis(1, 0, pow(c + 1.0) * g * (c * x.defect())),
        KernelKind::Grad => u.coords().conj().scale_c(pow(c + 1.0) * (c * x.defect())),
        KernelKind::InvGrad => {
            let image = Automorphism::new(*x).apply_vec(u.coords());
            let s = c * (x.defect() / d.norm_sqr()).powf(c);
            image.conj().scale(s)
        }
    }
}

/// Monte-Carlo value of `int K(z,u)(w) f(u) dv_alpha(u)` at `x = phi_z(w)`, per component.
pub fn kernel_fiber_by_integration(
    id: &VectorKernelId,
    f: &HoloFun,
    x: &BallPoint,
    spec: &QuadSpec,
) -> Result<Vec<ComplexEstimate>> {
    let weight = Weight::new(x.dim(), id.alpha)?;
    let width = kernel_fiber(id, x, &BallPoint::origin(x.dim())).dim();
    (0..width)
        .map(|k| {
            integrate_complex(
                |u| kernel_fiber(id, x, u)[k] * f.evaluate(u),
                &Region::WholeBall,
                &weight,
                spec,
            )
        })
        .collect()
}

/// `||T f(z)||_E` from the closed-form fibers, on a fixed node set.
pub fn vector_kernel_apply(id: &VectorKernelId, f: &HoloFun, z: &BallPoint, nodes: &BallNodes) -> Result<f64> {
    if (nodes.gamma() - id.gamma).abs() > 1e-15 * id.gamma {
        return Err(invalid("node set radius does not match the kernel's gamma"));
    }
    let phi = Automorphism::new(*z);
    nodes.lq_norm(&phi, id.q, |x| match id.kind {
        KernelKind::Tent => f.evaluate(x).norm(),
        KernelKind::Radial => {
            let g = f.gradient(x);
            let r: Complex64 = (0..x.dim()).map(|k| x.coords()[k] * g[k]).sum();
            x.defect() * r.norm()
        }
        KernelKind::Grad => x.defect() * f.gradient(x).norm(),
        KernelKind::InvGrad => f.invariant_gradient_norm(x),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum KernelTarget {
    /// The scalar kernel `K_alpha`, measured by absolute value.
    Bergman { alpha: f64 },
    Vector(VectorKernelId),
}

impl KernelTarget {
    fn alpha(&self) -> f64 {
        match self {
            KernelTarget::Bergman { alpha } => *alpha,
            KernelTarget::Vector(id) => id.alpha,
        }
    }
}

struct KernelNorm<'a> {
    target: KernelTarget,
    nodes: Option<&'a BallNodes>,
}

impl KernelNorm<'_> {
    /// `|| K(z,u) - K(z',u') ||`, with the second term optional.
    fn diff(&self, z: &BallPoint, u: &BallPoint, other: Option<(&BallPoint, &BallPoint)>) -> Result<f64> {
        match (&self.target, self.nodes) {
            (KernelTarget::Bergman { alpha }, _) => {
                let mut v = bergman_kernel(*alpha, z, u);
                if let Some((z2, u2)) = other {
                    v -= bergman_kernel(*alpha, z2, u2);
                }
                Ok(v.norm())
            }
            (KernelTarget::Vector(id), Some(nodes)) => {
                let phi = Automorphism::new(*z);
                let phi2 = other.map(|(z2, _)| Automorphism::new(*z2));
                let mut acc = 0.0;
                for (i, w) in nodes.points().iter().enumerate() {
                    let mut k = kernel_fiber(id, &phi.apply(w), u);
                    if let (Some(p2), Some((_, u2))) = (&phi2, other) {
                        k = k - kernel_fiber(id, &p2.apply(w), u2);
                    }
                    let v = k.norm();
                    if !v.is_finite() {
                        return Err(BergmanError::NonFiniteSample { index: i });
                    }
                    acc += v.powf(id.q);
                }
                Ok((acc * nodes.weight()).powf(1.0 / id.q))
            }
            (KernelTarget::Vector(_), None) => Err(invalid("vector kernels need a node set")),
        }
    }
}

fn kernel_nodes(target: &KernelTarget, n: usize, spec: &OperatorSpec) -> Result<Option<BallNodes>> {
    match target {
        KernelTarget::Bergman { alpha } => {
            if !(*alpha > -1.0) {
                return Err(invalid(format!("kernel needs alpha > -1, got {alpha}")));
            }
            Ok(None)
        }
        KernelTarget::Vector(id) => Ok(Some(BallNodes::new(n, id.gamma, spec.nodes, derive_seed(spec.seed, 0xE))?)),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SizeReport {
    /// `max ||K(z,u)|| rho(z,u)^(n+1+alpha)`.
    pub constant: f64,
    pub pairs: usize,
    pub skipped: usize,
}

/// Independent `v_0`-distributed pairs.
pub fn sample_pairs(n: usize, count: usize, seed: u64) -> Result<Vec<(BallPoint, BallPoint)>> {
    let p = Proposal::weighted(n, 0.0)?;
    let streams = NodeStreams::new(seed);
    Ok((0..count)
        .map(|i| {
            let mut rng = streams.node(i as u64);
            let z = p.sample(&mut rng).expect("weighted draws lie in the ball");
            let u = p.sample(&mut rng).expect("weighted draws lie in the ball");
            (z, u)
        })
        .collect())
}

/// Size constant on given pairs; vector kernels use one common node set.
pub fn kernel_size_constant_on(
    target: &KernelTarget,
    pairs: &[(BallPoint, BallPoint)],
    nodes: Option<&BallNodes>,
) -> Result<SizeReport> {
    let norm = KernelNorm {
        target: *target,
        nodes,
    };
    let values: Vec<Option<f64>> = pairs
        .par_iter()
        .map(|(z, u)| {
            let rho = pseudo_metric_rho(z.coords(), u.coords());
            if rho == 0.0 {
                return Ok(None);
            }
            let c = z.dim() as f64 + 1.0 + target.alpha();
            Ok(Some(norm.diff(z, u, None)? * rho.powf(c)))
        })
        .collect::<Result<_>>()?;
    let skipped = values.iter().filter(|v| v.is_none()).count();
    let constant = values.iter().flatten().copied().fold(0.0, f64::max);
    Ok(SizeReport {
        constant,
        pairs: pairs.len() - skipped,
        skipped,
    })
}

/// Empirical `sup ||K(z,u)||_E rho(z,u)^(n+1+alpha)` over `pairs` random pairs.
pub fn kernel_size_check(target: &KernelTarget, n: usize, pairs: usize, spec: &OperatorSpec) -> Result<SizeReport> {
    let nodes = kernel_nodes(target, n, spec)?;
    let pairs = sample_pairs(n, pairs, spec.seed)?;
    kernel_size_constant_on(target, &pairs, nodes.as_ref())
}

/// How `(z, u, zeta)` triples are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum TripleSampling {
    /// `z, zeta ~ v_0` and `u = phi_zeta(x)` with `|x| < 1/2`: `u` is close to `zeta`.
    NearReference,
    /// `|z| = cap` and `u = phi_z(x)` with `|x| < 1/2`: `u` is close to `z`.
    NearDiagonal { cap: f64 },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SmoothnessReport {
    /// `max ||K(z,u) - K(z,zeta)|| rho(z,zeta)^(c+1/2) / rho(u,zeta)^(1/2)`.
    pub constant: f64,
    pub admissible: usize,
    pub skipped: usize,
}

fn sample_triples(
    n: usize,
    sampling: TripleSampling,
    count: usize,
    seed: u64,
) -> Result<Vec<(BallPoint, BallPoint, BallPoint)>> {
    let p = Proposal::weighted(n, 0.0)?;
    let streams = NodeStreams::new(seed);
    (0..count)
        .map(|i| {
            let mut rng = streams.node(i as u64);
            let near = |base: &BallPoint, rng: &mut rand_chacha::ChaCha8Rng| {
                let x = sphere_direction(n, rng).scale(0.5 * rng.random::<f64>());
                Automorphism::new(*base).apply(&BallPoint::from_cvec_unchecked(x))
            };
            match sampling {
                TripleSampling::NearReference => {
                    let z = p.sample(&mut rng).expect("weighted draws lie in the ball");
                    let zeta = p.sample(&mut rng).expect("weighted draws lie in the ball");
                    let u = near(&zeta, &mut rng);
                    Ok((z, u, zeta))
                }
                TripleSampling::NearDiagonal { cap } => {
                    if !(cap > 0.0 && cap < 1.0) {
                        return Err(invalid(format!("radius cap must lie in (0, 1), got {cap}")));
                    }
                    let z = BallPoint::from_cvec(sphere_direction(n, &mut rng).scale(cap))?;
                    let u = near(&z, &mut rng);
                    let zeta = p.sample(&mut rng).expect("weighted draws lie in the ball");
                    Ok((z, u, zeta))
                }
            }
        })
        .collect()
}

/// Empirical Hölder-type smoothness constant with exponent `1/2`.
///
/// Triples with `rho(z,zeta) <= c1 rho(u,zeta)` are skipped when a filter is
/// given. `transposed` measures `||K(u,z) - K(zeta,z)||` instead.
pub fn kernel_smoothness_check(
    target: &KernelTarget,
    n: usize,
    sampling: TripleSampling,
    triples: usize,
    c1: Option<f64>,
    transposed: bool,
    spec: &OperatorSpec,
) -> Result<SmoothnessReport> {
    let nodes = kernel_nodes(target, n, spec)?;
    let norm = KernelNorm {
        target: *target,
        nodes: nodes.as_ref(),
    };
    let triples = sample_triples(n, sampling, triples, spec.seed)?;
    let c = n as f64 + 1.0 + target.alpha();
    let values: Vec<Option<f64>> = triples
        .par_iter()
        .map(|(z, u, zeta)| {
            let r_uz = pseudo_metric_rho(u.coords(), zeta.coords());
            let r_zz = pseudo_metric_rho(z.coords(), zeta.coords());
            if r_uz == 0.0 || r_zz == 0.0 {
                return Ok(None);
            }
            if let Some(c1) = c1 {
                if r_zz <= c1 * r_uz {
                    return Ok(None);
                }
            }
            let d = if transposed {
                norm.diff(u, z, Some((zeta, z)))?
            } else {
                norm.diff(z, u, Some((z, zeta)))?
            };
            Ok(Some(d * r_zz.powf(c + 0.5) / r_uz.sqrt()))
        })
        .collect::<Result<_>>()?;
    let admissible = values.iter().flatten().count();
    if admissible == 0 {
        return Err(invalid("no admissible triples"));
    }
    Ok(SmoothnessReport {
        constant: values.iter().flatten().copied().fold(0.0, f64::max),
        admissible,
        skipped: values.len() - admissible,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const ONE: Complex64 = Complex64::new(1.0, 0.0);

    #[test]
    fn tent_kernel_at_origin_is_constant() {
        let id = VectorKernelId::new(KernelKind::Tent, 0.0, 1.0, 2.0).unwrap();
        let nodes = BallNodes::new(1, 1.0, 500, 1).unwrap();
        let norm = KernelNorm {
            target: KernelTarget::Vector(id),
            nodes: Some(&nodes),
        };
        let z = BallPoint::from_real(&[0.3]).unwrap();
        let v = norm.diff(&z, &BallPoint::origin(1), None).unwrap();
        let r: f64 = 1f64.tanh();
        assert_relative_eq!(v, (r * r / (1.0 - r * r)).sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn derivative_kernels_vanish_on_constants() {
        let f = HoloFun::constant(2, ONE).unwrap();
        let nodes = BallNodes::new(2, 0.5, 200, 3).unwrap();
        let z = BallPoint::from_real(&[0.2, 0.6]).unwrap();
        for kind in [KernelKind::Radial, KernelKind::Grad, KernelKind::InvGrad] {
            let id = VectorKernelId::new(kind, 1.0, 0.5, 2.0).unwrap();
            assert_eq!(vector_kernel_apply(&id, &f, &z, &nodes).unwrap(), 0.0);
        }
    }

    #[test]
    fn fibers_reproduce_closed_forms() {
        let a = BallPoint::new(&[Complex64::new(0.4, 0.1)]).unwrap();
        let f = HoloFun::kernel_power(&a, 2.0, ONE).unwrap();
        let x = BallPoint::new(&[Complex64::new(-0.2, 0.3)]).unwrap();
        let spec = QuadSpec::new(400_000, 5);
        let g = f.gradient(&x);
        let expected = [
            (KernelKind::Tent, f.evaluate(&x)),
            (KernelKind::Radial, x.coords()[0] * g[0] * x.defect()),
            (KernelKind::Grad, g[0] * x.defect()),
        ];
        for (kind, want) in expected {
            let id = VectorKernelId::new(kind, 0.0, 1.0, 2.0).unwrap();
            let est = kernel_fiber_by_integration(&id, &f, &x, &spec).unwrap();
            assert!(est[0].within_sigma(want, 4.0), "{kind:?}: {:?} vs {want}", est[0]);
        }
        let id = VectorKernelId::new(KernelKind::InvGrad, 0.0, 1.0, 2.0).unwrap();
        let est = kernel_fiber_by_integration(&id, &f, &x, &spec).unwrap();
        let num = crate::holo::invariant_gradient(&f, &x, 1e-4).unwrap();
        assert!(est[0].within_sigma(num[0], 4.0), "{:?} vs {}", est[0], num[0]);
    }

    #[test]
    fn smoothness_vanishes_when_u_is_zeta() {
        let target = KernelTarget::Bergman { alpha: 0.0 };
        let norm = KernelNorm { target, nodes: None };
        let z = BallPoint::from_real(&[0.3]).unwrap();
        let zeta = BallPoint::from_real(&[-0.5]).unwrap();
        assert_eq!(norm.diff(&z, &zeta, Some((&z, &zeta))).unwrap(), 0.0);
    }

    #[test]
    fn size_constant_is_rotation_invariant() {
        let target = KernelTarget::Bergman { alpha: 0.0 };
        let pairs = sample_pairs(2, 2000, 4).unwrap();
        let rot = |p: &BallPoint| {
            let c = p.coords();
            let v = CVec::from_slice(&[c[1] * Complex64::new(0.0, 1.0), -c[0]]).unwrap();
            BallPoint::from_cvec(v).unwrap()
        };
        let rotated: Vec<_> = pairs.iter().map(|(z, u)| (rot(z), rot(u))).collect();
        let a = kernel_size_constant_on(&target, &pairs, None).unwrap();
        let b = kernel_size_constant_on(&target, &rotated, None).unwrap();
        assert_relative_eq!(a.constant, b.constant, max_relative = 1e-10);
    }
}

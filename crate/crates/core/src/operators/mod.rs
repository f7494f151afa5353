//! Maximal, area, tent and Hardy–Littlewood functionals on Bergman balls, the
//! weighted Bergman kernel and projection, and vector-valued kernel operators.
//!
//! Every functional at `z` is an integral or supremum over `D(z, gamma)`,
//! realized on a fixed `tau`-distributed node set in `D(0, gamma)` pushed
//! forward by `phi_z`. Because `tau` is Möbius invariant, the pushed-forward
//! nodes carry the constant weight `tau(D(0, gamma)) / M`.

pub mod kernels;
pub mod weak;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, BergmanError, Result};
use crate::geometry::{Automorphism, BallPoint, CVec, Region};
use crate::holo::{invariant_gradient, HoloFun};
use crate::measure::{integrate_complex, ComplexEstimate, Proposal, QuadSpec, Strategy, Weight};
use crate::rng::{derive_seed, NodeStreams};

pub use kernels::{
    kernel_fiber, kernel_fiber_by_integration, kernel_size_check, kernel_size_constant_on,
    kernel_smoothness_check, sample_pairs, vector_kernel_apply, KernelKind, KernelTarget,
    SizeReport, SmoothnessReport, TripleSampling, VectorKernelId,
};
pub use weak::{weak_type_profile, WeakInput, WeakProfile};

/// Which functional to evaluate. `k` is the order of the radial derivative.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum FunctionalSelector {
    /// `sup_{D(z,gamma)} |f|`.
    Maximal { gamma: f64 },
    /// `sup_{D(z,gamma)} |(1-|w|^2)^k R^k f(w)|`.
    MaximalK { gamma: f64, k: u32 },
    /// `(int_{D(z,gamma)} |(1-|w|^2) Rf(w)|^q dtau)^(1/q)`.
    AreaRadial { gamma: f64, q: f64 },
    /// `(int_{D(z,gamma)} |(1-|w|^2)^k R^k f(w)|^q dtau)^(1/q)`.
    AreaRadialK { gamma: f64, q: f64, k: u32 },
    /// `(int_{D(z,gamma)} |(1-|w|^2) grad f(w)|^q dtau)^(1/q)`.
    AreaGrad { gamma: f64, q: f64 },
    /// `(int_{D(z,gamma)} |grad~ f(w)|^q dtau)^(1/q)`.
    AreaInvGrad { gamma: f64, q: f64 },
    /// `(int_{D(z,gamma)} |f|^q dtau)^(1/q)`.
    Tent { gamma: f64, q: f64 },
    /// The `q = infinity` tent functional; the same computation as `Maximal`.
    TentSup { gamma: f64 },
    /// `sup_{z in D(w,gamma)} (v_alpha(D(w,gamma))^-1 int_{D(w,gamma)} |f|^q dv_alpha)^(1/q)`.
    HLMax { gamma: f64, q: f64 },
    /// `HLMax` applied to `(1-|u|^2)^k R^k f(u)`.
    HLMaxK { gamma: f64, q: f64, k: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Integrand {
    /// `(1-|w|^2)^k |R^k f(w)|`
    Radial(u32),
    Grad,
    InvGrad,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Shape {
    Sup,
    Area(f64),
    HardyLittlewood(f64),
}

impl FunctionalSelector {
    pub fn gamma(&self) -> f64 {
        match *self {
            FunctionalSelector::Maximal { gamma }
            | FunctionalSelector::MaximalK { gamma, .. }
            | FunctionalSelector::AreaRadial { gamma, .. }
            | FunctionalSelector::AreaRadialK { gamma, .. }
            | FunctionalSelector::AreaGrad { gamma, .. }
            | FunctionalSelector::AreaInvGrad { gamma, .. }
            | FunctionalSelector::Tent { gamma, .. }
            | FunctionalSelector::TentSup { gamma }
            | FunctionalSelector::HLMax { gamma, .. }
            | FunctionalSelector::HLMaxK { gamma, .. } => gamma,
        }
    }

    fn decompose(&self) -> (Integrand, Shape) {
        use FunctionalSelector::*;
        match *self {
            Maximal { .. } | TentSup { .. } => (Integrand::Radial(0), Shape::Sup),
            MaximalK { k, .. } => (Integrand::Radial(k), Shape::Sup),
            AreaRadial { q, .. } => (Integrand::Radial(1), Shape::Area(q)),
            AreaRadialK { q, k, .. } => (Integrand::Radial(k), Shape::Area(q)),
            AreaGrad { q, .. } => (Integrand::Grad, Shape::Area(q)),
            AreaInvGrad { q, .. } => (Integrand::InvGrad, Shape::Area(q)),
            Tent { q, .. } => (Integrand::Radial(0), Shape::Area(q)),
            HLMax { q, .. } => (Integrand::Radial(0), Shape::HardyLittlewood(q)),
            HLMaxK { q, k, .. } => (Integrand::Radial(k), Shape::HardyLittlewood(q)),
        }
    }

    /// Whether the functional applied to constants vanishes.
    pub fn kills_constants(&self) -> bool {
        match self.decompose().0 {
            Integrand::Radial(k) => k > 0,
            Integrand::Grad | Integrand::InvGrad => true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let gamma = self.gamma();
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(invalid(format!("gamma must be positive, got {gamma}")));
        }
        match self.decompose().1 {
            Shape::Area(q) | Shape::HardyLittlewood(q) if !(q > 1.0 && q.is_finite()) => {
                Err(invalid(format!("q must lie in (1, inf), got {q}")))
            }
            _ => Ok(()),
        }
    }
}

/// Quadrature settings for functionals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorSpec {
    /// `tau`-nodes in `D(0, gamma)`.
    pub nodes: usize,
    pub seed: u64,
    /// Candidate centers for the Hardy–Littlewood functional (besides `z`).
    pub candidates: usize,
    /// Pattern-search iterations refining sampled suprema (0 disables).
    pub ascent_steps: usize,
    /// Weight of the Hardy–Littlewood averages.
    pub alpha: f64,
    /// Difference step of the numerical invariant gradient.
    pub h: f64,
}

impl Default for OperatorSpec {
    fn default() -> Self {
        Self {
            nodes: 1024,
            seed: 0,
            candidates: 256,
            ascent_steps: 24,
            alpha: 0.0,
            h: 1e-4,
        }
    }
}

/// `tau`-distributed nodes in `D(0, gamma)`, each with weight `tau(D(0,gamma)) / M`.
#[derive(Clone, Debug)]
pub struct BallNodes {
    gamma: f64,
    points: Vec<BallPoint>,
    weight: f64,
}

impl BallNodes {
    pub fn new(n: usize, gamma: f64, count: usize, seed: u64) -> Result<Self> {
        if count == 0 {
            return Err(invalid("node count must be positive"));
        }
        let proposal = Proposal::bergman_ball(BallPoint::origin(n), gamma)?;
        let streams = NodeStreams::new(seed);
        let points: Vec<BallPoint> = (0..count)
            .into_par_iter()
            .map(|i| proposal.sample(&mut streams.node(i as u64)).expect("pushforward draws lie in the ball"))
            .collect();
        let tau = gamma.sinh().powi(2 * n as i32);
        Ok(Self {
            gamma,
            points,
            weight: tau / count as f64,
        })
    }

    /// Nodes of `D(0, gamma')` for `gamma' <= gamma`, keeping the same weights.
    pub fn restrict(&self, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma <= self.gamma) {
            return Err(invalid(format!("cannot restrict radius {} to {gamma}", self.gamma)));
        }
        let r2 = gamma.tanh().powi(2);
        Ok(Self {
            gamma,
            points: self.points.iter().copied().filter(|w| w.coords().norm_sqr() < r2).collect(),
            weight: self.weight,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn points(&self) -> &[BallPoint] {
        &self.points
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn dim(&self) -> usize {
        self.points.first().map_or(1, |p| p.dim())
    }

    /// `(int_{D(0,gamma)} g(phi_z(w))^q dtau(w))^(1/q)`.
    pub fn lq_norm<G>(&self, phi: &Automorphism, q: f64, g: G) -> Result<f64>
    where
        G: Fn(&BallPoint) -> f64,
    {
        let mut acc = 0.0;
        for (i, w) in self.points.iter().enumerate() {
            let v = g(&phi.apply(w));
            if !v.is_finite() {
                return Err(BergmanError::NonFiniteSample { index: i });
            }
            acc += v.powf(q);
        }
        Ok((acc * self.weight).powf(1.0 / q))
    }
}

/// A functional prepared for one function: derivatives and node sets are built once.
#[derive(Clone, Debug)]
pub struct FunctionalEvaluator {
    selector: FunctionalSelector,
    integrand: Integrand,
    shape: Shape,
    f: HoloFun,
    derived: HoloFun,
    nodes: BallNodes,
    candidates: Vec<BallPoint>,
    ascent_steps: usize,
    alpha: f64,
    h: f64,
}

impl FunctionalEvaluator {
    pub fn new(selector: FunctionalSelector, f: &HoloFun, spec: &OperatorSpec) -> Result<Self> {
        selector.validate()?;
        let nodes = BallNodes::new(f.dim(), selector.gamma(), spec.nodes, spec.seed)?;
        Self::with_nodes(selector, f, nodes, spec)
    }

    /// Uses an existing node set, restricted to the selector's radius.
    pub fn with_nodes(
        selector: FunctionalSelector,
        f: &HoloFun,
        nodes: BallNodes,
        spec: &OperatorSpec,
    ) -> Result<Self> {
        selector.validate()?;
        if nodes.dim() != f.dim() {
            return Err(BergmanError::DimensionMismatch {
                expected: f.dim(),
                got: nodes.dim(),
            });
        }
        let gamma = selector.gamma();
        let nodes = if (nodes.gamma() - gamma).abs() <= 1e-15 * gamma {
            nodes
        } else {
            nodes.restrict(gamma)?
        };
        let (integrand, shape) = selector.decompose();
        let derived = match integrand {
            Integrand::Radial(k) => f.radial_derivative(k)?,
            _ => f.clone(),
        };
        let candidates = match shape {
            Shape::HardyLittlewood(_) => {
                if !(spec.alpha > -1.0) {
                    return Err(invalid(format!("averages need alpha > -1, got {}", spec.alpha)));
                }
                let proposal = Proposal::bergman_ball(BallPoint::origin(f.dim()), gamma)?;
                let streams = NodeStreams::new(derive_seed(spec.seed, 0xCA4D));
                let mut c = vec![BallPoint::origin(f.dim())];
                c.extend((0..spec.candidates).map(|i| {
                    proposal.sample(&mut streams.node(i as u64)).expect("pushforward draws lie in the ball")
                }));
                c
            }
            _ => Vec::new(),
        };
        Ok(Self {
            selector,
            integrand,
            shape,
            f: f.clone(),
            derived,
            nodes,
            candidates,
            ascent_steps: spec.ascent_steps,
            alpha: spec.alpha,
            h: spec.h,
        })
    }

    pub fn selector(&self) -> FunctionalSelector {
        self.selector
    }

    pub fn nodes(&self) -> &BallNodes {
        &self.nodes
    }

    fn pointwise(&self, x: &BallPoint) -> Result<f64> {
        match self.integrand {
            Integrand::Radial(k) => {
                let v = self.derived.evaluate(x).norm();
                Ok(if k == 0 { v } else { x.defect().powi(k as i32) * v })
            }
            Integrand::Grad => Ok(x.defect() * self.f.gradient(x).norm()),
            Integrand::InvGrad => {
                if self.f.is_zero() {
                    return Ok(0.0);
                }
                Ok(invariant_gradient(&self.f, x, self.h)?.norm())
            }
        }
    }

    fn is_trivial(&self) -> bool {
        match self.integrand {
            Integrand::Radial(_) => self.derived.is_zero(),
            Integrand::Grad | Integrand::InvGrad => self.f.radial_derivative(1).is_ok_and(|r| r.is_zero()),
        }
    }

    /// Value of the functional at `z`.
    pub fn eval(&self, z: &BallPoint) -> Result<f64> {
        if self.is_trivial() {
            return Ok(0.0);
        }
        let phi = Automorphism::new(*z);
        match self.shape {
            Shape::Sup => self.sup(&phi),
            Shape::Area(q) => self.nodes.lq_norm(&phi, q, |x| self.pointwise(x).unwrap_or(f64::NAN)),
            Shape::HardyLittlewood(q) => self.hardy_littlewood(&phi, q),
        }
    }

    /// Values at many points, evaluated in parallel.
    pub fn values(&self, zs: &[BallPoint]) -> Result<Vec<f64>> {
        zs.par_iter().map(|z| self.eval(z)).collect()
    }

    fn sup(&self, phi: &Automorphism) -> Result<f64> {
        let at = |w: &BallPoint| self.pointwise(&phi.apply(w));
        let mut best = at(&BallPoint::origin(phi.base().dim()))?;
        let mut arg = BallPoint::origin(phi.base().dim());
        for (i, w) in self.nodes.points.iter().enumerate() {
            let v = at(w)?;
            if !v.is_finite() {
                return Err(BergmanError::NonFiniteSample { index: i });
            }
            if v > best {
                best = v;
                arg = *w;
            }
        }
        if self.ascent_steps == 0 {
            return Ok(best);
        }
        let radius = self.selector.gamma().tanh();
        let n = arg.dim();
        let mut step = 0.1 * radius;
        let mut pos = *arg.coords();
        for _ in 0..self.ascent_steps {
            let mut improved = false;
            let len = pos.norm();
            if len > 0.0 {
                let target = (len + step).min(radius * (1.0 - 1e-12));
                let trial = pos.scale(target / len);
                let v = at(&BallPoint::from_cvec_unchecked(trial))?;
                if v > best {
                    best = v;
                    pos = trial;
                    improved = true;
                }
            }
            for k in 0..n {
                for dir in [
                    Complex64::new(step, 0.0),
                    Complex64::new(-step, 0.0),
                    Complex64::new(0.0, step),
                    Complex64::new(0.0, -step),
                ] {
                    let mut trial = pos + CVec::basis(n, k, dir);
                    let len = trial.norm();
                    if len >= radius {
                        trial = trial.scale(radius * (1.0 - 1e-12) / len);
                    }
                    let v = at(&BallPoint::from_cvec_unchecked(trial))?;
                    if v > best {
                        best = v;
                        pos = trial;
                        improved = true;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        Ok(best)
    }

    fn hardy_littlewood(&self, phi: &Automorphism, q: f64) -> Result<f64> {
        let n = phi.base().dim() as f64;
        let expo = self.alpha + n + 1.0;
        let mut best: f64 = 0.0;
        for c in &self.candidates {
            let center = Automorphism::new(phi.apply(c));
            let mut num = 0.0;
            let mut den = 0.0;
            for (i, w) in self.nodes.points.iter().enumerate() {
                let u = center.apply(w);
                let rho = u.defect().powf(expo);
                let v = self.pointwise(&u)?;
                if !v.is_finite() {
                    return Err(BergmanError::NonFiniteSample { index: i });
                }
                num += rho * v.powf(q);
                den += rho;
            }
            best = best.max(num / den);
        }
        Ok(best.powf(1.0 / q))
    }
}

/// One-shot functional evaluation.
pub fn apply_functional(
    selector: FunctionalSelector,
    f: &HoloFun,
    z: &BallPoint,
    spec: &OperatorSpec,
) -> Result<f64> {
    FunctionalEvaluator::new(selector, f, spec)?.eval(z)
}

/// `K_alpha(z, w) = (1 - <z,w>)^-(n+1+alpha)`.
pub fn bergman_kernel(alpha: f64, z: &BallPoint, w: &BallPoint) -> Complex64 {
    let c = z.dim() as f64 + 1.0 + alpha;
    let d = Complex64::new(1.0, 0.0) - z.inner(w.coords());
    if c.fract() == 0.0 {
        d.powi(-(c as i32))
    } else {
        (d.ln() * (-c)).exp()
    }
}

/// `P_alpha f(z) = int K_alpha(z,w) f(w) dv_alpha(w)`.
///
/// With `Strategy::Auto`, targets with `|z| > 0.5` sample a mixture of `v_alpha`
/// and its image under `phi_z`, which follows `|K_alpha(z, .)|`.
pub fn bergman_project<F>(f: F, alpha: f64, z: &BallPoint, spec: &QuadSpec) -> Result<ComplexEstimate>
where
    F: Fn(&BallPoint) -> Complex64 + Sync,
{
    if !(alpha > -1.0) {
        return Err(invalid(format!("projection needs alpha > -1, got {alpha}")));
    }
    let w = Weight::new(z.dim(), alpha)?;
    let spec = match spec.strategy {
        Strategy::Auto if z.norm() > 0.5 => spec.clone().with_strategy(Strategy::MoebiusMixture {
            poles: vec![*z],
            sigma: alpha,
            defensive: 0.5,
        }),
        _ => spec.clone(),
    };
    integrate_complex(|u| bergman_kernel(alpha, z, u) * f(u), &Region::WholeBall, &w, &spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const ONE: Complex64 = Complex64::new(1.0, 0.0);

    fn spec() -> OperatorSpec {
        OperatorSpec {
            nodes: 2000,
            seed: 11,
            candidates: 16,
            ..OperatorSpec::default()
        }
    }

    #[test]
    fn constants() {
        let f = HoloFun::constant(1, ONE).unwrap();
        let z = BallPoint::from_real(&[0.6]).unwrap();
        let s = spec();
        assert_eq!(apply_functional(FunctionalSelector::Maximal { gamma: 1.0 }, &f, &z, &s).unwrap(), 1.0);
        let tent = apply_functional(FunctionalSelector::Tent { gamma: 1.0, q: 2.0 }, &f, &z, &s).unwrap();
        let r: f64 = 1f64.tanh();
        assert_relative_eq!(tent, (r * r / (1.0 - r * r)).sqrt(), max_relative = 1e-12);
        for sel in [
            FunctionalSelector::AreaRadial { gamma: 1.0, q: 2.0 },
            FunctionalSelector::AreaGrad { gamma: 1.0, q: 2.0 },
            FunctionalSelector::AreaInvGrad { gamma: 1.0, q: 2.0 },
        ] {
            assert_eq!(apply_functional(sel, &f, &z, &s).unwrap(), 0.0);
        }
    }

    #[test]
    fn maximal_of_coordinate_at_origin() {
        let f = HoloFun::monomial(2, ONE, &[1, 0]).unwrap();
        let v = apply_functional(FunctionalSelector::Maximal { gamma: 1.0 }, &f, &BallPoint::origin(2), &spec()).unwrap();
        assert!(v <= 1f64.tanh() + 1e-12);
        assert_relative_eq!(v, 0.761594, epsilon = 1e-4);
    }

    #[test]
    fn maximal_dominates_center_value() {
        let a = BallPoint::from_real(&[0.7, 0.1]).unwrap();
        let f = HoloFun::kernel_power(&a, 2.0, ONE).unwrap();
        let s = OperatorSpec { nodes: 50, ascent_steps: 0, ..spec() };
        for x in [0.0, 0.3, 0.9] {
            let z = BallPoint::from_real(&[x, -0.05]).unwrap();
            let m = apply_functional(FunctionalSelector::Maximal { gamma: 0.5 }, &f, &z, &s).unwrap();
            assert!(m >= f.evaluate(&z).norm());
        }
    }

    #[test]
    fn tent_sup_is_maximal() {
        let a = BallPoint::from_real(&[0.8]).unwrap();
        let f = HoloFun::kernel_power(&a, 1.5, ONE).unwrap();
        let z = BallPoint::from_real(&[0.4]).unwrap();
        let s = spec();
        let m = apply_functional(FunctionalSelector::Maximal { gamma: 0.7 }, &f, &z, &s).unwrap();
        let t = apply_functional(FunctionalSelector::TentSup { gamma: 0.7 }, &f, &z, &s).unwrap();
        assert_eq!(m, t);
    }

    #[test]
    fn hl_max_dominates_own_ball_average() {
        let a = BallPoint::from_real(&[0.6, 0.3]).unwrap();
        let f = HoloFun::kernel_power(&a, 3.0, ONE).unwrap();
        let z = BallPoint::from_real(&[0.2, 0.5]).unwrap();
        let s = spec();
        let hl = FunctionalEvaluator::new(FunctionalSelector::HLMax { gamma: 0.8, q: 2.0 }, &f, &s).unwrap();
        let own = {
            let nodes = hl.nodes();
            let phi = Automorphism::new(z);
            let mut num = 0.0;
            let mut den = 0.0;
            for w in nodes.points() {
                let u = phi.apply(w);
                let rho = u.defect().powi(3);
                num += rho * f.evaluate(&u).norm_sqr();
                den += rho;
            }
            (num / den).sqrt()
        };
        assert!(hl.eval(&z).unwrap() >= own);
    }

    #[test]
    fn kernel_values() {
        let z = BallPoint::from_real(&[0.5]).unwrap();
        assert_eq!(bergman_kernel(0.7, &z, &BallPoint::origin(1)), ONE);
        assert_relative_eq!(bergman_kernel(0.0, &z, &z).re, 1.0 / 0.5625, epsilon = 1e-14);
        let a = BallPoint::new(&[Complex64::new(0.3, 0.2), Complex64::new(-0.1, 0.5)]).unwrap();
        let b = BallPoint::new(&[Complex64::new(-0.6, 0.1), Complex64::new(0.2, 0.2)]).unwrap();
        let k1 = bergman_kernel(0.5, &a, &b);
        let k2 = bergman_kernel(0.5, &b, &a).conj();
        assert!((k1 - k2).norm() <= 1e-15 * k1.norm());
    }

    #[test]
    fn projection_reproduces_constants_and_coordinates() {
        let spec = QuadSpec::new(100_000, 21);
        let z = BallPoint::new(&[Complex64::new(0.3, -0.2)]).unwrap();
        let one = bergman_project(|_| ONE, 0.0, &z, &spec).unwrap();
        assert!(one.within_sigma(ONE, 4.0), "{one:?}");
        let coord = bergman_project(|u| u.coords()[0], 1.0, &z, &spec).unwrap();
        assert!(coord.within_sigma(z.coords()[0], 4.0), "{coord:?}");
    }
}

//! Weighted measures `dv_alpha`, the invariant measure `tau`, and seeded
//! Monte-Carlo quadrature over regions of the ball.
//!
//! All densities are taken relative to normalized volume measure `v`
//! (`v(B) = 1`). Quadrature is importance sampling: each node carries the
//! weight `target density / proposal density` (zero outside the region), and
//! estimates are means of `weight * f` with the sample standard error.

pub mod sampling;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, BergmanError, Result};
use crate::geometry::{
    bergman_ball_bounds, bergman_metric, pseudo_metric_rho, BallPoint, CVec, Region, MAX_DIM,
};
use crate::rng::{derive_seed, pairwise_sum, NodeStreams};

pub use sampling::Proposal;

/// `c_alpha` for `alpha > -1`, and `1` otherwise.
///
/// Uses `Gamma(n+alpha+1) / (n! Gamma(alpha+1)) = prod_{j=1..n} (alpha+j)/j`.
pub fn normalizing_constant(n: usize, alpha: f64) -> f64 {
    if alpha > -1.0 {
        (1..=n).map(|j| (alpha + j as f64) / j as f64).product()
    } else {
        1.0
    }
}

/// The measure `c_alpha (1-|z|^2)^alpha dv(z)`; `tau` is `alpha = -(n+1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Weight {
    pub n: usize,
    pub alpha: f64,
    pub c_alpha: f64,
}

impl Weight {
    pub fn new(n: usize, alpha: f64) -> Result<Self> {
        if n == 0 || n > MAX_DIM {
            return Err(BergmanError::UnsupportedDimension(n));
        }
        if !alpha.is_finite() {
            return Err(invalid(format!("weight exponent must be finite, got {alpha}")));
        }
        Ok(Self {
            n,
            alpha,
            c_alpha: normalizing_constant(n, alpha),
        })
    }

    /// The invariant measure `dtau = dv / (1-|z|^2)^(n+1)`.
    pub fn invariant(n: usize) -> Self {
        Self {
            n,
            alpha: -(n as f64 + 1.0),
            c_alpha: 1.0,
        }
    }

    pub fn is_invariant(&self) -> bool {
        self.alpha == -(self.n as f64 + 1.0) && self.c_alpha == 1.0
    }

    #[inline]
    pub fn density(&self, z: &BallPoint) -> f64 {
        self.density_at_defect(z.defect())
    }

    #[inline]
    pub fn density_at_defect(&self, defect: f64) -> f64 {
        if self.alpha == 0.0 {
            self.c_alpha
        } else {
            self.c_alpha * defect.powf(self.alpha)
        }
    }
}

/// Density of a measure relative to `v`.
pub fn density(measure: &Weight, z: &BallPoint) -> f64 {
    measure.density(z)
}

/// Monte-Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub nodes: usize,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            stderr: 0.0,
            nodes: 0,
        }
    }

    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Self::exact(0.0);
        }
        let mean = pairwise_sum(xs) / n as f64;
        let stderr = if n > 1 {
            let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
            (pairwise_sum(&dev) / (n as f64 - 1.0) / n as f64).sqrt()
        } else {
            0.0
        };
        Self {
            value: mean,
            stderr,
            nodes: n,
        }
    }

    /// `value^(1/p)` with delta-method error.
    pub fn root(&self, p: f64) -> Self {
        let value = self.value.max(0.0).powf(1.0 / p);
        let stderr = if self.value > 0.0 {
            self.stderr * value / (p * self.value)
        } else {
            self.stderr.powf(1.0 / p)
        };
        Self {
            value,
            stderr,
            nodes: self.nodes,
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            value: self.value * s,
            stderr: self.stderr * s.abs(),
            nodes: self.nodes,
        }
    }

    /// Sum of independent estimates.
    pub fn add(&self, other: &Estimate) -> Self {
        Self {
            value: self.value + other.value,
            stderr: self.stderr.hypot(other.stderr),
            nodes: self.nodes.max(other.nodes),
        }
    }

    /// Ratio with first-order error propagation (independent errors).
    pub fn ratio(&self, other: &Estimate) -> Self {
        let value = self.value / other.value;
        let rel = (self.stderr / self.value).hypot(other.stderr / other.value);
        Self {
            value,
            stderr: (value * rel).abs(),
            nodes: self.nodes.max(other.nodes),
        }
    }

    pub fn within_sigma(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.stderr
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexEstimate {
    pub value: Complex64,
    /// `sqrt(se_re^2 + se_im^2)`.
    pub stderr: f64,
    pub nodes: usize,
}

impl ComplexEstimate {
    pub fn from_parts(re: Estimate, im: Estimate) -> Self {
        Self {
            value: Complex64::new(re.value, im.value),
            stderr: re.stderr.hypot(im.stderr),
            nodes: re.nodes,
        }
    }

    pub fn within_sigma(&self, target: Complex64, k: f64) -> bool {
        (self.value - target).norm() <= k * self.stderr
    }
}

/// How quadrature nodes are drawn.
#[derive(Clone, Debug, Default)]
pub enum Strategy {
    /// Picked from the region: direct `v_alpha` sampling on the whole ball,
    /// pushforward on Bergman balls, exact tube sampling on Carleson tubes,
    /// uniform sampling on Euclidean balls.
    #[default]
    Auto,
    /// Sample `v_sigma` on the whole ball.
    WeightedBall { sigma: f64 },
    /// Sample `tau` restricted to `D(center, gamma)` as the image of `D(0, gamma)` under `phi_center`.
    Pushforward { center: BallPoint, gamma: f64 },
    /// Uniform sampling of the tube `Q_r(zeta)`.
    TubeRejection { zeta: CVec, r: f64 },
    /// Uniform sampling of a Euclidean ball; region membership acts as rejection.
    BoundingBall { center: CVec, radius: f64 },
    /// Balance-heuristic mixture of `phi_a`-images of `v_sigma` over the poles,
    /// with a fraction `defensive` of plain `v_sigma` draws.
    MoebiusMixture { poles: Vec<BallPoint>, sigma: f64, defensive: f64 },
    /// Arbitrary mixture with the given component fractions.
    Mixture(Vec<(Proposal, f64)>),
}

/// Seeded quadrature specification.
#[derive(Clone, Debug)]
pub struct QuadSpec {
    pub nodes: usize,
    pub seed: u64,
    pub strategy: Strategy,
}

impl Default for QuadSpec {
    fn default() -> Self {
        Self {
            nodes: 200_000,
            seed: 0,
            strategy: Strategy::Auto,
        }
    }
}

impl QuadSpec {
    pub fn new(nodes: usize, seed: u64) -> Self {
        Self {
            nodes,
            seed,
            strategy: Strategy::Auto,
        }
    }

    pub fn with_strategy(mut self, strategy: Strategy) -> Self {
        self.strategy = strategy;
        self
    }

    /// Same node count and strategy, independent seed.
    pub fn reseed(&self, tag: u64) -> Self {
        Self {
            nodes: self.nodes,
            seed: derive_seed(self.seed, tag),
            strategy: self.strategy.clone(),
        }
    }
}

/// Importance sampler for one (region, target measure, strategy) triple.
#[derive(Clone, Debug)]
pub struct Sampler {
    components: Vec<Proposal>,
    bounds: Vec<usize>,
    total: usize,
    target: Weight,
    region: Region,
    streams: NodeStreams,
}

impl Sampler {
    pub fn new(region: &Region, target: &Weight, spec: &QuadSpec) -> Result<Self> {
        if spec.nodes == 0 {
            return Err(invalid("node count must be positive"));
        }
        let n = target.n;
        let mixture: Vec<(Proposal, f64)> = match &spec.strategy {
            Strategy::Auto => vec![(auto_proposal(region, target)?, 1.0)],
            Strategy::WeightedBall { sigma } => vec![(Proposal::weighted(n, *sigma)?, 1.0)],
            Strategy::Pushforward { center, gamma } => {
                vec![(Proposal::bergman_ball(*center, *gamma)?, 1.0)]
            }
            Strategy::TubeRejection { zeta, r } => vec![(Proposal::tube(*zeta, *r)?, 1.0)],
            Strategy::BoundingBall { center, radius } => {
                vec![(Proposal::euclidean_ball(*center, *radius)?, 1.0)]
            }
            Strategy::MoebiusMixture { poles, sigma, defensive } => {
                if !(0.0..=1.0).contains(defensive) {
                    return Err(invalid("defensive fraction must lie in [0, 1]"));
                }
                let mut comps = Vec::with_capacity(poles.len() + 1);
                if *defensive > 0.0 || poles.is_empty() {
                    let share = if poles.is_empty() { 1.0 } else { *defensive };
                    comps.push((Proposal::weighted(n, *sigma)?, share));
                }
                for pole in poles {
                    comps.push((Proposal::moebius(*pole, *sigma)?, (1.0 - defensive) / poles.len() as f64));
                }
                comps
            }
            Strategy::Mixture(comps) => comps.clone(),
        };
        for (p, _) in &mixture {
            if p.dim() != n {
                return Err(BergmanError::DimensionMismatch {
                    expected: n,
                    got: p.dim(),
                });
            }
        }
        let weight_sum: f64 = mixture.iter().map(|(_, w)| *w).sum();
        if !(weight_sum > 0.0) || mixture.iter().any(|(_, w)| *w < 0.0) {
            return Err(invalid("mixture fractions must be nonnegative with positive sum"));
        }
        let mut bounds = Vec::with_capacity(mixture.len());
        let mut acc = 0.0;
        for (_, w) in &mixture {
            acc += w / weight_sum;
            bounds.push(((acc * spec.nodes as f64).round() as usize).min(spec.nodes));
        }
        *bounds.last_mut().unwrap() = spec.nodes;
        let mut components = Vec::new();
        let mut kept_bounds = Vec::new();
        let mut prev = 0;
        for ((p, _), b) in mixture.into_iter().zip(bounds) {
            if b > prev {
                components.push(p);
                kept_bounds.push(b);
            }
            prev = b;
        }
        Ok(Self {
            components,
            bounds: kept_bounds,
            total: spec.nodes,
            target: *target,
            region: region.clone(),
            streams: NodeStreams::new(spec.seed),
        })
    }

    pub fn len(&self) -> usize {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    fn mixture_density(&self, z: &BallPoint) -> f64 {
        if self.components.len() == 1 {
            return self.components[0].density(z);
        }
        let mut prev = 0;
        let mut q = 0.0;
        for (p, &b) in self.components.iter().zip(&self.bounds) {
            q += (b - prev) as f64 / self.total as f64 * p.density(z);
            prev = b;
        }
        q
    }

    /// Node `i` and its importance weight (zero outside the region).
    pub fn node(&self, i: usize) -> (BallPoint, f64) {
        let k = self.bounds.partition_point(|&b| b <= i);
        let mut rng = self.streams.node(i as u64);
        match self.components[k].sample(&mut rng) {
            Some(z) if self.region.contains(z.coords()) => {
                let q = self.mixture_density(&z);
                let w = if q > 0.0 { self.target.density(&z) / q } else { 0.0 };
                (z, w)
            }
            _ => (BallPoint::origin(self.target.n), 0.0),
        }
    }
}

fn auto_proposal(region: &Region, target: &Weight) -> Result<Proposal> {
    let n = target.n;
    match region {
        Region::WholeBall => {
            if target.alpha > -1.0 {
                Proposal::weighted(n, target.alpha)
            } else {
                Err(invalid(format!(
                    "measure with alpha = {} has infinite mass on the whole ball",
                    target.alpha
                )))
            }
        }
        Region::BergmanBall { center, gamma } => Proposal::bergman_ball(*center, *gamma),
        Region::CarlesonTube { zeta, r } => Proposal::tube(*zeta, *r),
        Region::EuclideanBall { center, radius } => Proposal::euclidean_ball(*center, *radius),
    }
}

/// A materialized node set, reused across integrands (common random numbers).
#[derive(Clone, Debug)]
pub struct NodeSet {
    pub points: Vec<BallPoint>,
    pub weights: Vec<f64>,
}

impl NodeSet {
    pub fn generate(region: &Region, target: &Weight, spec: &QuadSpec) -> Result<Self> {
        let sampler = Sampler::new(region, target, spec)?;
        let (points, weights): (Vec<_>, Vec<_>) =
            (0..spec.nodes).into_par_iter().map(|i| sampler.node(i)).unzip();
        Ok(Self { points, weights })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contributions<F>(&self, f: F) -> Result<Vec<f64>>
    where
        F: Fn(&BallPoint) -> f64 + Sync,
    {
        let xs: Vec<f64> = self
            .points
            .par_iter()
            .zip(&self.weights)
            .map(|(z, &w)| if w == 0.0 { 0.0 } else { w * f(z) })
            .collect();
        check_finite(&xs)?;
        Ok(xs)
    }

    pub fn estimate<F>(&self, f: F) -> Result<Estimate>
    where
        F: Fn(&BallPoint) -> f64 + Sync,
    {
        Ok(Estimate::from_samples(&self.contributions(f)?))
    }

    pub fn estimate_complex<F>(&self, f: F) -> Result<ComplexEstimate>
    where
        F: Fn(&BallPoint) -> Complex64 + Sync,
    {
        let xs: Vec<Complex64> = self
            .points
            .par_iter()
            .zip(&self.weights)
            .map(|(z, &w)| if w == 0.0 { Complex64::new(0.0, 0.0) } else { f(z) * w })
            .collect();
        complex_estimate(&xs)
    }
}

fn check_finite(xs: &[f64]) -> Result<()> {
    match xs.iter().position(|x| !x.is_finite()) {
        Some(index) => Err(BergmanError::NonFiniteSample { index }),
        None => Ok(()),
    }
}

fn complex_estimate(xs: &[Complex64]) -> Result<ComplexEstimate> {
    if let Some(index) = xs.iter().position(|x| !(x.re.is_finite() && x.im.is_finite())) {
        return Err(BergmanError::NonFiniteSample { index });
    }
    let re: Vec<f64> = xs.iter().map(|x| x.re).collect();
    let im: Vec<f64> = xs.iter().map(|x| x.im).collect();
    Ok(ComplexEstimate::from_parts(
        Estimate::from_samples(&re),
        Estimate::from_samples(&im),
    ))
}

/// `int_R f dmu`, estimated with `spec`.
pub fn integrate<F>(f: F, region: &Region, measure: &Weight, spec: &QuadSpec) -> Result<Estimate>
where
    F: Fn(&BallPoint) -> f64 + Sync,
{
    let sampler = Sampler::new(region, measure, spec)?;
    let xs: Vec<f64> = (0..spec.nodes)
        .into_par_iter()
        .map(|i| {
            let (z, w) = sampler.node(i);
            if w == 0.0 {
                0.0
            } else {
                w * f(&z)
            }
        })
        .collect();
    check_finite(&xs)?;
    Ok(Estimate::from_samples(&xs))
}

pub fn integrate_complex<F>(
    f: F,
    region: &Region,
    measure: &Weight,
    spec: &QuadSpec,
) -> Result<ComplexEstimate>
where
    F: Fn(&BallPoint) -> Complex64 + Sync,
{
    let sampler = Sampler::new(region, measure, spec)?;
    let xs: Vec<Complex64> = (0..spec.nodes)
        .into_par_iter()
        .map(|i| {
            let (z, w) = sampler.node(i);
            if w == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                f(&z) * w
            }
        })
        .collect();
    complex_estimate(&xs)
}

/// `int_{D(center, gamma)} g dmu` by sampling `D(0, gamma)` and mapping through `phi_center`.
pub fn pushforward_bergman_ball<F>(
    g: F,
    center: &BallPoint,
    gamma: f64,
    measure: &Weight,
    spec: &QuadSpec,
) -> Result<Estimate>
where
    F: Fn(&BallPoint) -> f64 + Sync,
{
    let region = Region::bergman_ball(*center, gamma)?;
    let spec = spec.clone().with_strategy(Strategy::Pushforward {
        center: *center,
        gamma,
    });
    integrate(g, &region, measure, &spec)
}

/// `v_alpha(R)`.
pub fn volume(region: &Region, n: usize, alpha: f64, spec: &QuadSpec) -> Result<Estimate> {
    if !(alpha > -1.0) {
        return Err(invalid(format!("volume needs alpha > -1, got {alpha}")));
    }
    integrate(|_| 1.0, region, &Weight::new(n, alpha)?, spec)
}

/// Euclidean ball containing `D(center, gamma)`, for rejection sampling.
pub fn bergman_ball_bounding_strategy(center: &BallPoint, gamma: f64) -> Strategy {
    let (c, radius) = bergman_ball_bounds(center, gamma);
    Strategy::BoundingBall { center: c, radius }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DoublingMetric {
    /// The nonisotropic pseudo-metric; random centers and radii.
    Rho,
    /// The Bergman metric; centers `|x| = 1 - 2^-j` with radius `beta(0, x) / 2`.
    Bergman,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DoublingReport {
    pub max_ratio: f64,
    pub min_ratio: f64,
    /// `(|x|, radius, ratio)` per admissible sample.
    pub samples: Vec<(f64, f64, f64)>,
    pub skipped: usize,
}

/// Empirical doubling constant `max v_alpha(B(x, 2r)) / v_alpha(B(x, r))`.
pub fn doubling_check(
    metric: DoublingMetric,
    n: usize,
    alpha: f64,
    trials: usize,
    spec: &QuadSpec,
) -> Result<DoublingReport> {
    if !(alpha > -1.0) {
        return Err(invalid(format!("doubling check needs alpha > -1, got {alpha}")));
    }
    let weight = Weight::new(n, alpha)?;
    let mut samples = Vec::with_capacity(trials);
    let mut skipped = 0;
    match metric {
        DoublingMetric::Rho => {
            let nodes = NodeSet::generate(&Region::WholeBall, &weight, spec)?;
            let centers = Proposal::weighted(n, 0.0)?;
            let streams = NodeStreams::new(derive_seed(spec.seed, 0xD0B1));
            for t in 0..trials {
                let mut rng = streams.node(t as u64);
                let x = loop {
                    let x = centers.sample(&mut rng).expect("weighted draws lie in the ball");
                    if x.norm() <= 0.95 {
                        break x;
                    }
                };
                let r = 0.02 + 0.98 * rand::Rng::random::<f64>(&mut rng);
                let mut inner = 0.0;
                let mut outer = 0.0;
                for (w, &wt) in nodes.points.iter().zip(&nodes.weights) {
                    let d = pseudo_metric_rho(x.coords(), w.coords());
                    if d < 2.0 * r {
                        outer += wt;
                        if d < r {
                            inner += wt;
                        }
                    }
                }
                if inner > 0.0 {
                    samples.push((x.norm(), r, outer / inner));
                } else {
                    skipped += 1;
                }
            }
        }
        DoublingMetric::Bergman => {
            for t in 0..trials {
                let modulus = 1.0 - 0.5f64.powi(t as i32 + 1);
                let mut coords = vec![0.0; n];
                coords[0] = modulus;
                let x = BallPoint::from_real(&coords)?;
                let gamma = 0.5 * bergman_metric(&BallPoint::origin(n), &x);
                let inner = pushforward_bergman_ball(|_| 1.0, &x, gamma, &weight, &spec.reseed(2 * t as u64))?;
                let outer =
                    pushforward_bergman_ball(|_| 1.0, &x, 2.0 * gamma, &weight, &spec.reseed(2 * t as u64 + 1))?;
                if inner.value > 0.0 {
                    samples.push((modulus, gamma, outer.value / inner.value));
                } else {
                    skipped += 1;
                }
            }
        }
    }
    let max_ratio = samples.iter().map(|s| s.2).fold(f64::NAN, f64::max);
    let min_ratio = samples.iter().map(|s| s.2).fold(f64::NAN, f64::min);
    Ok(DoublingReport {
        max_ratio,
        min_ratio,
        samples,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn normalizing_constant_values() {
        for n in 1..=3 {
            assert_eq!(normalizing_constant(n, 0.0), 1.0);
        }
        assert!((normalizing_constant(1, 1.0) - 2.0).abs() <= 1e-12);
        assert!((normalizing_constant(2, 0.5) - 1.875).abs() <= 1e-12);
        assert_eq!(normalizing_constant(2, -1.0), 1.0);
        assert_eq!(normalizing_constant(3, -7.5), 1.0);
    }

    #[test]
    fn density_values() {
        let z = BallPoint::from_real(&[0.5f64.sqrt()]).unwrap();
        assert_eq!(Weight::new(1, 0.0).unwrap().density(&z), 1.0);
        assert_eq!(Weight::invariant(2).density(&BallPoint::origin(2)), 1.0);
        assert_relative_eq!(Weight::new(1, 2.0).unwrap().density(&z), 0.75, epsilon = 1e-15);
    }

    #[test]
    fn whole_ball_mass_and_odd_moment() {
        let spec = QuadSpec::new(20_000, 5);
        let w = Weight::new(2, 1.0).unwrap();
        let one = integrate(|_| 1.0, &Region::WholeBall, &w, &spec).unwrap();
        assert_eq!(one.value, 1.0);
        let odd = integrate(|z| z.coords()[0].re, &Region::WholeBall, &w, &spec).unwrap();
        assert!(odd.within_sigma(0.0, 4.0), "{odd:?}");
    }

    #[test]
    fn tau_volume_of_bergman_ball() {
        let spec = QuadSpec::new(1000, 1);
        let r: f64 = 1f64.tanh();
        let exact = r * r / (1.0 - r * r);
        for c in [0.0, 0.9] {
            let center = BallPoint::from_real(&[c]).unwrap();
            let est = pushforward_bergman_ball(|_| 1.0, &center, 1.0, &Weight::invariant(1), &spec).unwrap();
            assert_relative_eq!(est.value, exact, max_relative = 1e-12);
        }
        assert_relative_eq!(exact, 1.38109, epsilon = 1e-5);
    }

    #[test]
    fn tau_volume_by_rejection() {
        let spec = QuadSpec::new(400_000, 2).with_strategy(Strategy::BoundingBall {
            center: CVec::zeros(1),
            radius: 0.8,
        });
        let region = Region::bergman_ball(BallPoint::origin(1), 1.0).unwrap();
        let est = integrate(|_| 1.0, &region, &Weight::invariant(1), &spec).unwrap();
        let r: f64 = 1f64.tanh();
        assert!(est.within_sigma(r * r / (1.0 - r * r), 3.0), "{est:?}");
    }

    #[test]
    fn tube_volume_is_rotation_invariant() {
        let spec = QuadSpec::new(50_000, 9);
        let z1 = CVec::from_real(&[1.0, 0.0]).unwrap();
        let z2 = CVec::from_slice(&[Complex64::new(0.0, 0.6), Complex64::new(-0.8, 0.0)]).unwrap();
        let a = volume(&Region::carleson_tube(z1, 0.5).unwrap(), 2, 0.0, &spec).unwrap();
        let b = volume(&Region::carleson_tube(z2, 0.5).unwrap(), 2, 0.0, &spec.reseed(1)).unwrap();
        assert!((a.value - b.value).abs() <= 3.0 * a.stderr.hypot(b.stderr));
    }

    #[test]
    fn tube_sampler_matches_rejection() {
        let zeta = CVec::from_real(&[0.0, 1.0]).unwrap();
        let region = Region::carleson_tube(zeta, 0.6).unwrap();
        let w = Weight::new(2, 1.0).unwrap();
        let exact = integrate(|_| 1.0, &region, &w, &QuadSpec::new(100_000, 1)).unwrap();
        let rej = integrate(
            |_| 1.0,
            &region,
            &w,
            &QuadSpec::new(400_000, 2).with_strategy(Strategy::WeightedBall { sigma: 0.0 }),
        )
        .unwrap();
        assert!((exact.value - rej.value).abs() <= 3.0 * exact.stderr.hypot(rej.stderr));
    }

    #[test]
    fn determinism_and_non_finite_reporting() {
        let spec = QuadSpec::new(5000, 77);
        let w = Weight::new(3, 0.5).unwrap();
        let f = |z: &BallPoint| z.coords().norm_sqr().sqrt();
        let a = integrate(f, &Region::WholeBall, &w, &spec).unwrap();
        let b = integrate(f, &Region::WholeBall, &w, &spec).unwrap();
        assert_eq!(a, b);
        let bad = integrate(|z: &BallPoint| 1.0 / (z.norm() - z.norm()), &Region::WholeBall, &w, &spec);
        assert!(matches!(bad, Err(BergmanError::NonFiniteSample { index: 0 })));
    }

    #[test]
    fn estimate_root_delta_method() {
        let e = Estimate {
            value: 4.0,
            stderr: 0.4,
            nodes: 10,
        };
        let r = e.root(2.0);
        assert_eq!(r.value, 2.0);
        assert_relative_eq!(r.stderr, 0.1, epsilon = 1e-15);
    }

    #[test]
    fn rho_doubling_is_monotone() {
        let rep = doubling_check(DoublingMetric::Rho, 1, 0.0, 20, &QuadSpec::new(20_000, 3)).unwrap();
        assert!(rep.samples.iter().all(|s| s.2 >= 1.0));
        assert!(rep.max_ratio.is_finite());
    }
}

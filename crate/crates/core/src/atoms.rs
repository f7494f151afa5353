//! `(1,q)_alpha` atoms on Carleson tubes, their Bergman projections, separated
//! lattices and the kernel-power synthesis operator.
//!
//! An atom lives on a fixed `v_alpha`-node set of its tube. Its mean and
//! `L^q` size are taken against that node set, so the mean-zero condition
//! holds to rounding and the size condition holds with the node set's own
//! volume estimate.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, BergmanError, Result};
use crate::geometry::{bergman_metric, BallPoint, CVec, Region};
use crate::holo::{lp_integral, HoloFun, Term};
use crate::measure::sampling::sphere_direction;
use crate::measure::{integrate, Estimate, NodeSet, QuadSpec, Strategy, Weight};
use crate::operators::bergman_kernel;
use crate::rng::{derive_seed, pairwise_sum, NodeStreams};

/// Number of cells in the fixed partition of a tube used by seeded profiles.
pub const PROFILE_CELLS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AtomKind {
    Tube,
    /// The constant function 1.
    Exceptional,
    /// A constant profile; the mean subtraction leaves the zero function.
    Degenerate,
}

#[derive(Clone, Debug)]
pub struct Atom {
    pub kind: AtomKind,
    pub zeta: CVec,
    pub r: f64,
    pub q: f64,
    pub alpha: f64,
    /// Nodes inside the tube.
    pub points: Vec<BallPoint>,
    /// Quadrature weights of `v_alpha` at the nodes; they sum to `volume.value`.
    pub weights: Vec<f64>,
    /// Atom values at the nodes.
    pub values: Vec<f64>,
    /// `v_alpha(Q)` estimated from the node set.
    pub volume: Estimate,
    /// The constant `c` in `c (g - m) chi_Q`.
    pub normalization: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub support: bool,
    pub lq_norm: f64,
    /// `v_alpha(Q)^(1/q - 1)` at the lower end of the volume's 3-sigma band.
    pub lq_bound: f64,
    pub size: bool,
    pub mean: f64,
    pub mean_zero: bool,
    pub l1_norm: f64,
}

impl AxiomReport {
    pub fn holds(&self) -> bool {
        self.support && self.size && self.mean_zero
    }
}

impl Atom {
    pub fn exceptional(n: usize, q: f64, alpha: f64) -> Result<Self> {
        check_params(q, alpha)?;
        if n == 0 || n > crate::geometry::MAX_DIM {
            return Err(BergmanError::UnsupportedDimension(n));
        }
        Ok(Self {
            kind: AtomKind::Exceptional,
            zeta: CVec::basis(n, 0, Complex64::new(1.0, 0.0)),
            r: 2f64.sqrt(),
            q,
            alpha,
            points: Vec::new(),
            weights: Vec::new(),
            values: Vec::new(),
            volume: Estimate::exact(1.0),
            normalization: 1.0,
        })
    }

    pub fn dim(&self) -> usize {
        self.zeta.dim()
    }

    pub fn is_atom(&self) -> bool {
        self.kind != AtomKind::Degenerate
    }

    /// `int a dv_alpha` on the node set.
    pub fn mean(&self) -> f64 {
        match self.kind {
            AtomKind::Exceptional => 1.0,
            _ => weighted_sum(&self.weights, &self.values, |v| v),
        }
    }

    pub fn lq_norm(&self) -> f64 {
        match self.kind {
            AtomKind::Exceptional => 1.0,
            _ => weighted_sum(&self.weights, &self.values, |v| v.abs().powf(self.q)).powf(1.0 / self.q),
        }
    }

    pub fn l1_norm(&self) -> f64 {
        match self.kind {
            AtomKind::Exceptional => 1.0,
            _ => weighted_sum(&self.weights, &self.values, f64::abs),
        }
    }

    pub fn check_axioms(&self) -> AxiomReport {
        let tube = Region::CarlesonTube {
            zeta: self.zeta,
            r: self.r,
        };
        let support = self.kind == AtomKind::Exceptional || self.points.iter().all(|p| tube.contains(p.coords()));
        let lq_norm = self.lq_norm();
        let low = (self.volume.value - 3.0 * self.volume.stderr).max(f64::MIN_POSITIVE);
        let lq_bound = low.powf(1.0 / self.q - 1.0);
        let mean = self.mean();
        let mean_zero = self.kind == AtomKind::Exceptional || mean.abs() <= 1e-10;
        AxiomReport {
            support,
            lq_norm,
            lq_bound,
            size: self.kind == AtomKind::Exceptional || lq_norm <= lq_bound * (1.0 + 1e-12),
            mean,
            mean_zero,
            l1_norm: self.l1_norm(),
        }
    }
}

fn weighted_sum(weights: &[f64], values: &[f64], g: impl Fn(f64) -> f64) -> f64 {
    let xs: Vec<f64> = weights.iter().zip(values).map(|(w, &v)| w * g(v)).collect();
    pairwise_sum(&xs)
}

fn check_params(q: f64, alpha: f64) -> Result<()> {
    if !(q > 1.0 && q.is_finite()) {
        return Err(invalid(format!("atoms need 1 < q < inf, got {q}")));
    }
    if !(alpha > -1.0) {
        return Err(invalid(format!("atoms need alpha > -1, got {alpha}")));
    }
    Ok(())
}

/// Cell of `z` in the fixed partition of `Q_r(zeta)`: four sectors of
/// `arg(1 - <z,zeta>)` times two shells of `|1 - <z,zeta>| / r^2`.
pub fn profile_cell(z: &CVec, zeta: &CVec, r: f64) -> usize {
    let d = Complex64::new(1.0, 0.0) - z.inner(zeta);
    let t = ((d.arg() / std::f64::consts::PI + 0.5) * 4.0).floor().clamp(0.0, 3.0) as usize;
    let shell = usize::from(d.norm() >= 0.5 * r * r);
    2 * t + shell
}

/// `c (g - m) chi_Q` for the profile `g` evaluated on `nodes` `v_alpha`-nodes of `Q_r(zeta)`.
pub fn make_atom_with_profile<G>(zeta: CVec, r: f64, q: f64, alpha: f64, profile: G, spec: &QuadSpec) -> Result<Atom>
where
    G: Fn(&BallPoint) -> f64 + Sync,
{
    check_params(q, alpha)?;
    let tube = Region::carleson_tube(zeta, r)?;
    let n = zeta.dim();
    let w = Weight::new(n, alpha)?;
    let set = NodeSet::generate(&tube, &w, &spec.clone().with_strategy(Strategy::TubeRejection { zeta, r }))?;
    let volume = Estimate::from_samples(&set.weights);
    let total = set.len() as f64;
    let (points, weights): (Vec<BallPoint>, Vec<f64>) = set
        .points
        .iter()
        .zip(&set.weights)
        .filter(|(_, &wt)| wt > 0.0)
        .map(|(p, &wt)| (*p, wt / total))
        .unzip();
    if points.is_empty() {
        return Err(invalid("tube node set is empty"));
    }
    let raw: Vec<f64> = points.par_iter().map(&profile).collect();
    if let Some(index) = raw.iter().position(|v| !v.is_finite()) {
        return Err(BergmanError::NonFiniteSample { index });
    }
    let mass = pairwise_sum(&weights);
    let m = weighted_sum(&weights, &raw, |v| v) / mass;
    let centered: Vec<f64> = raw.iter().map(|v| v - m).collect();
    let spread = centered.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let scale = raw.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(f64::MIN_POSITIVE);
    if spread <= 1e-12 * scale {
        return Ok(Atom {
            kind: AtomKind::Degenerate,
            zeta,
            r,
            q,
            alpha,
            values: vec![0.0; points.len()],
            points,
            weights,
            volume,
            normalization: 0.0,
        });
    }
    let lq = weighted_sum(&weights, &centered, |v| v.abs().powf(q)).powf(1.0 / q);
    let c = mass.powf(1.0 / q - 1.0) / lq;
    let mut values: Vec<f64> = centered.iter().map(|v| c * v).collect();
    let residual = weighted_sum(&weights, &values, |v| v) / mass;
    for v in &mut values {
        *v -= residual;
    }
    Ok(Atom {
        kind: AtomKind::Tube,
        zeta,
        r,
        q,
        alpha,
        points,
        weights,
        values,
        volume,
        normalization: c,
    })
}

/// Atom whose profile is a seeded sign pattern on the [`PROFILE_CELLS`] cells
/// of the tube. Constant patterns are redrawn.
pub fn make_atom(zeta: CVec, r: f64, q: f64, alpha: f64, seed: u64, spec: &QuadSpec) -> Result<Atom> {
    let mut rng = NodeStreams::new(derive_seed(seed, 0xA7)).node(0);
    let signs: [f64; PROFILE_CELLS] = loop {
        let s: [f64; PROFILE_CELLS] = std::array::from_fn(|_| if rng.random::<bool>() { 1.0 } else { -1.0 });
        if s.iter().any(|&x| x != s[0]) {
            break s;
        }
    };
    make_atom_with_profile(
        zeta,
        r,
        q,
        alpha,
        |z| signs[profile_cell(z.coords(), &zeta, r)],
        &spec.reseed(seed),
    )
}

/// `(P_alpha a)(z)`: the atom's node sum of `K_alpha(z, .) a`.
pub fn atom_project(a: &Atom, z: &BallPoint) -> Result<Complex64> {
    if z.dim() != a.dim() {
        return Err(BergmanError::DimensionMismatch {
            expected: a.dim(),
            got: z.dim(),
        });
    }
    Ok(match a.kind {
        AtomKind::Exceptional => Complex64::new(1.0, 0.0),
        AtomKind::Degenerate => Complex64::new(0.0, 0.0),
        AtomKind::Tube => {
            let mut re = Vec::with_capacity(a.points.len());
            let mut im = Vec::with_capacity(a.points.len());
            for ((u, &w), &v) in a.points.iter().zip(&a.weights).zip(&a.values) {
                let t = bergman_kernel(a.alpha, z, u) * (w * v);
                re.push(t.re);
                im.push(t.im);
            }
            Complex64::new(pairwise_sum(&re), pairwise_sum(&im))
        }
    })
}

/// Outer sampling strategy for `int |P_alpha a| dv_alpha`: `v_alpha` mixed
/// with images of `v_alpha` under `phi` at `(1 - r^2/2) zeta` and at every
/// atom node with `|u| > 1/2`. The node sum has a peak of height
/// `(1-|u|^2)^-(n+1+alpha)` at each node, so without the node poles the
/// estimator has unbounded variance.
pub fn projection_strategy(a: &Atom) -> Strategy {
    let depth = 1.0 - 0.5 * a.r * a.r;
    if a.kind != AtomKind::Tube {
        return Strategy::WeightedBall { sigma: a.alpha };
    }
    let mut poles: Vec<BallPoint> = BallPoint::from_cvec(a.zeta.scale(depth))
        .ok()
        .filter(|_| depth > 0.25)
        .into_iter()
        .collect();
    poles.extend(a.points.iter().filter(|u| u.norm() > 0.5).copied());
    if poles.is_empty() {
        Strategy::WeightedBall { sigma: a.alpha }
    } else {
        Strategy::MoebiusMixture {
            poles,
            sigma: a.alpha,
            defensive: 0.3,
        }
    }
}

/// `||P_alpha a||_{1,alpha}`.
pub fn projection_l1_norm(a: &Atom, spec: &QuadSpec) -> Result<Estimate> {
    match a.kind {
        AtomKind::Exceptional => return Ok(Estimate::exact(1.0)),
        AtomKind::Degenerate => return Ok(Estimate::exact(0.0)),
        AtomKind::Tube => {}
    }
    let spec = match spec.strategy {
        Strategy::Auto => spec.clone().with_strategy(projection_strategy(a)),
        _ => spec.clone(),
    };
    let w = Weight::new(a.dim(), a.alpha)?;
    integrate(
        |z| atom_project(a, z).map_or(f64::NAN, |v| v.norm()),
        &Region::WholeBall,
        &w,
        &spec,
    )
}

/// Seeded batch of random atoms: `zeta` uniform on the sphere, `r` uniform in `r_range`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomBatch {
    pub count: usize,
    pub q: f64,
    pub alpha: f64,
    pub r_range: [f64; 2],
    pub seed: u64,
}

impl AtomBatch {
    pub fn generate(&self, n: usize, nodes: usize) -> Result<Vec<Atom>> {
        check_params(self.q, self.alpha)?;
        let [lo, hi] = self.r_range;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(invalid(format!("invalid r_range [{lo}, {hi}]")));
        }
        let streams = NodeStreams::new(derive_seed(self.seed, 0xB7));
        (0..self.count)
            .into_par_iter()
            .map(|i| {
                let mut rng = streams.node(i as u64);
                let zeta = sphere_direction(n, &mut rng);
                let r = lo + (hi - lo) * rng.random::<f64>();
                make_atom(
                    zeta,
                    r,
                    self.q,
                    self.alpha,
                    derive_seed(self.seed, i as u64),
                    &QuadSpec::new(nodes, self.seed),
                )
            })
            .collect()
    }
}

/// A `gamma0`-separated set of points in the Bergman metric.
#[derive(Clone, Debug)]
pub struct Lattice {
    pub points: Vec<BallPoint>,
    pub gamma0: f64,
}

impl Lattice {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn min_separation(&self) -> f64 {
        let mut best = f64::INFINITY;
        for (i, a) in self.points.iter().enumerate() {
            for b in &self.points[i + 1..] {
                best = best.min(bergman_metric(a, b));
            }
        }
        best
    }
}

const STRATUM_BASE: usize = 16;
const STRATUM_CAP: usize = 4096;

/// Candidates drawn in stratum `j` (radii in `[1 - 2^-j, 1 - 2^-(j+1))`).
pub fn stratum_candidates(n: usize, j: usize) -> usize {
    let growth = 1usize.checked_shl((j * n) as u32).unwrap_or(usize::MAX);
    STRATUM_BASE.saturating_mul(growth).min(STRATUM_CAP)
}

/// Greedy `gamma0`-separated subset of a stratified radial sample.
///
/// Candidates start with the origin and run through strata `j = 0..levels`
/// in order; the candidates of stratum `j` do not depend on `levels`, so the
/// lattice for more levels extends the lattice for fewer. At most `limit`
/// points are kept.
pub fn build_lattice(n: usize, gamma0: f64, levels: usize, limit: usize, seed: u64) -> Result<Lattice> {
    if !(gamma0 > 0.0) {
        return Err(invalid(format!("separation must be positive, got {gamma0}")));
    }
    if n == 0 || n > crate::geometry::MAX_DIM {
        return Err(BergmanError::UnsupportedDimension(n));
    }
    let streams = NodeStreams::new(derive_seed(seed, 0x1A7));
    let mut points = vec![BallPoint::origin(n)];
    for j in 0..levels {
        let lo = 1.0 - 0.5f64.powi(j as i32);
        let hi = 1.0 - 0.5f64.powi(j as i32 + 1);
        for i in 0..stratum_candidates(n, j) {
            if points.len() >= limit {
                break;
            }
            let mut rng = streams.node(((j as u64) << 32) | i as u64);
            let dir = sphere_direction(n, &mut rng);
            let radius = lo + (hi - lo) * rng.random::<f64>();
            let Ok(c) = BallPoint::from_cvec(dir.scale(radius)) else {
                continue;
            };
            if points.iter().all(|p| bergman_metric(p, &c) >= gamma0) {
                points.push(c);
            }
        }
    }
    points.truncate(limit.max(1));
    Ok(Lattice { points, gamma0 })
}

/// `n max(1, 1/p) + (alpha + 1)/p`; the synthesis exponent must exceed it.
pub fn synthesis_threshold(n: usize, p: f64, alpha: f64) -> f64 {
    n as f64 * 1f64.max(1.0 / p) + (alpha + 1.0) / p
}

/// `sum_k c_k (1-|a_k|^2)^{(pb-n-1-alpha)/p} (1 - <z,a_k>)^-b`.
pub fn cr_synthesize(points: &[BallPoint], coeffs: &[Complex64], b: f64, p: f64, alpha: f64) -> Result<HoloFun> {
    if points.len() != coeffs.len() {
        return Err(invalid(format!("{} points but {} coefficients", points.len(), coeffs.len())));
    }
    if !(p > 0.0 && alpha > -1.0) {
        return Err(invalid(format!("synthesis needs p > 0 and alpha > -1, got ({p}, {alpha})")));
    }
    let n = match points.first() {
        Some(a) => a.dim(),
        None => return Err(invalid("empty lattice")),
    };
    let threshold = synthesis_threshold(n, p, alpha);
    if !(b > threshold) {
        return Err(BergmanError::Hypothesis(format!("b = {b} must exceed {threshold}")));
    }
    let exponent = (p * b - n as f64 - 1.0 - alpha) / p;
    let terms = points
        .iter()
        .zip(coeffs)
        .map(|(a, &c)| Term::Kernel {
            coeff: c * a.defect().powf(exponent),
            pole: *a.coords(),
            exponent: b,
            power: 0,
        })
        .collect();
    HoloFun::from_terms(n, terms)
}

/// `||f||^p_{p,alpha} / sum |c_k|^p` for the synthesized `f`.
pub fn synthesis_ratio(
    points: &[BallPoint],
    coeffs: &[Complex64],
    b: f64,
    p: f64,
    alpha: f64,
    spec: &QuadSpec,
) -> Result<Estimate> {
    let f = cr_synthesize(points, coeffs, b, p, alpha)?;
    let denom: f64 = coeffs.iter().map(|c| c.norm().powf(p)).sum();
    if !(denom > 0.0) {
        return Err(invalid("coefficients are all zero"));
    }
    Ok(lp_integral(&f, p, alpha, spec)?.scale(1.0 / denom))
}

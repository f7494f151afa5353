//! Proposal distributions on the ball, each with an explicit density
//! relative to normalized volume measure `v`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, StandardNormal};

use crate::error::{invalid, Result};
use crate::geometry::{Automorphism, BallPoint, CVec};

use super::normalizing_constant;

/// Uniform direction on the unit sphere of `C^n`.
pub fn sphere_direction(n: usize, rng: &mut ChaCha8Rng) -> CVec {
    loop {
        let mut v = CVec::zeros(n);
        for c in v.as_mut_slice() {
            *c = Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng));
        }
        let norm = v.norm();
        if norm > 1e-300 {
            return v.scale(1.0 / norm);
        }
    }
}

#[inline]
fn open_unit(rng: &mut ChaCha8Rng) -> f64 {
    1.0 - rng.random::<f64>()
}

/// Area of `{t in C : |t| < 1, |1 - t| < rad}`.
pub fn lens_area(rad: f64) -> f64 {
    if rad >= 2.0 {
        return PI;
    }
    let r2 = rad * rad;
    (1.0 - r2 / 2.0).acos() + r2 * (rad / 2.0).acos() - 0.5 * rad * (4.0 - r2).sqrt()
}

#[derive(Clone, Debug)]
pub enum Proposal {
    /// `v_sigma` itself.
    Weighted { n: usize, beta: Beta<f64>, sigma: f64, c_sigma: f64 },
    /// Image of `v_sigma` under `phi_a`.
    Moebius { phi: Automorphism, beta: Beta<f64>, sigma: f64, c_sigma: f64 },
    /// Normalized `tau` restricted to `D(c, gamma)`.
    BergmanBall { phi: Automorphism, sinh2: f64, tau_volume: f64 },
    /// Uniform on the Carleson tube `Q_r(zeta)` (exact, by rejection in one complex variable).
    Tube { zeta: CVec, rad: f64, lens: f64 },
    /// Uniform on a Euclidean ball; draws outside the unit ball are discarded by the caller.
    EuclideanBall { center: CVec, radius: f64 },
}

impl Proposal {
    pub fn weighted(n: usize, sigma: f64) -> Result<Self> {
        let beta = weighted_beta(n, sigma)?;
        Ok(Proposal::Weighted {
            n,
            beta,
            sigma,
            c_sigma: normalizing_constant(n, sigma),
        })
    }

    pub fn moebius(pole: BallPoint, sigma: f64) -> Result<Self> {
        let beta = weighted_beta(pole.dim(), sigma)?;
        Ok(Proposal::Moebius {
            phi: Automorphism::new(pole),
            beta,
            sigma,
            c_sigma: normalizing_constant(pole.dim(), sigma),
        })
    }

    pub fn bergman_ball(center: BallPoint, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(invalid(format!("Bergman radius must be positive, got {gamma}")));
        }
        let n = center.dim() as i32;
        let sinh2 = gamma.sinh().powi(2);
        Ok(Proposal::BergmanBall {
            phi: Automorphism::new(center),
            sinh2,
            tau_volume: sinh2.powi(n),
        })
    }

    pub fn tube(zeta: CVec, r: f64) -> Result<Self> {
        if (zeta.norm() - 1.0).abs() > 1e-12 || !(r > 0.0) {
            return Err(invalid("tube needs a unit center and positive radius"));
        }
        let rad = r * r;
        Ok(Proposal::Tube {
            zeta,
            rad,
            lens: lens_area(rad),
        })
    }

    pub fn euclidean_ball(center: CVec, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(invalid(format!("radius must be positive, got {radius}")));
        }
        Ok(Proposal::EuclideanBall { center, radius })
    }

    pub fn dim(&self) -> usize {
        match self {
            Proposal::Weighted { n, .. } => *n,
            Proposal::Moebius { phi, .. } | Proposal::BergmanBall { phi, .. } => phi.base().dim(),
            Proposal::Tube { zeta, .. } => zeta.dim(),
            Proposal::EuclideanBall { center, .. } => center.dim(),
        }
    }

    /// One draw; `None` when the draw falls outside the open ball.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Option<BallPoint> {
        match self {
            Proposal::Weighted { n, beta, .. } => Some(sample_weighted(*n, beta, rng)),
            Proposal::Moebius { phi, beta, .. } => {
                let w = sample_weighted(phi.base().dim(), beta, rng);
                Some(phi.apply(&w))
            }
            Proposal::BergmanBall { phi, sinh2, .. } => {
                let n = phi.base().dim();
                let y = sinh2 * open_unit(rng).powf(1.0 / n as f64);
                let s = (y / (1.0 + y)).sqrt();
                let w = BallPoint::from_parts(sphere_direction(n, rng).scale(s), 1.0 / (1.0 + y));
                Some(phi.apply(&w))
            }
            Proposal::Tube { zeta, rad, .. } => Some(sample_tube(zeta, *rad, rng)),
            Proposal::EuclideanBall { center, radius } => {
                let n = center.dim();
                let rho = radius * open_unit(rng).powf(1.0 / (2 * n) as f64);
                let p = *center + sphere_direction(n, rng).scale(rho);
                (p.norm() < 1.0).then(|| BallPoint::from_cvec_unchecked(p))
            }
        }
    }

    /// Density relative to `v` at a point of the ball.
    pub fn density(&self, z: &BallPoint) -> f64 {
        match self {
            Proposal::Weighted { sigma, c_sigma, .. } => c_sigma * z.defect().powf(*sigma),
            Proposal::Moebius { phi, sigma, c_sigma, .. } => {
                let a = phi.base();
                let n = a.dim() as f64;
                let denom = (Complex64::new(1.0, 0.0) - z.inner(a.coords())).norm_sqr();
                c_sigma * z.defect().powf(*sigma) * (a.defect() / denom).powf(n + 1.0 + sigma)
            }
            Proposal::BergmanBall { phi, sinh2, tau_volume } => {
                let local = 1.0 - crate::geometry::pseudo_hyperbolic_defect(phi.base(), z);
                if local > sinh2 / (1.0 + sinh2) * (1.0 + 1e-10) {
                    return 0.0;
                }
                let n = z.dim() as i32;
                z.defect().powi(-(n + 1)) / tau_volume
            }
            Proposal::Tube { zeta, rad, lens } => {
                let t = z.inner(zeta);
                if (Complex64::new(1.0, 0.0) - t).norm() > rad * (1.0 + 1e-12) {
                    return 0.0;
                }
                let n = z.dim();
                let rho2 = 1.0 - t.norm_sqr();
                PI / (n as f64 * lens * rho2.powi(n as i32 - 1))
            }
            Proposal::EuclideanBall { center, radius } => {
                if (*z.coords() - *center).norm() >= *radius {
                    return 0.0;
                }
                radius.powi(-2 * z.dim() as i32)
            }
        }
    }
}

fn weighted_beta(n: usize, sigma: f64) -> Result<Beta<f64>> {
    if !(sigma > -1.0 && sigma.is_finite()) {
        return Err(invalid(format!("sampling weight needs sigma > -1, got {sigma}")));
    }
    Beta::new(sigma + 1.0, n as f64).map_err(|e| invalid(e.to_string()))
}

fn sample_weighted(n: usize, beta: &Beta<f64>, rng: &mut ChaCha8Rng) -> BallPoint {
    loop {
        let t: f64 = beta.sample(rng);
        if t > 0.0 && t <= 1.0 {
            let s = (1.0 - t).sqrt();
            return BallPoint::from_parts(sphere_direction(n, rng).scale(s), t);
        }
    }
}

fn sample_tube(zeta: &CVec, rad: f64, rng: &mut ChaCha8Rng) -> BallPoint {
    let n = zeta.dim();
    let one = Complex64::new(1.0, 0.0);
    let (disk_center, disk_radius) = if rad < 1.0 { (one, rad) } else { (Complex64::new(0.0, 0.0), 1.0) };
    let t = loop {
        let rho = disk_radius * rng.random::<f64>().sqrt();
        let theta = 2.0 * PI * rng.random::<f64>();
        let t = disk_center + Complex64::from_polar(rho, theta);
        if t.norm_sqr() < 1.0 && (one - t).norm() < rad {
            break t;
        }
    };
    let mut z = zeta.scale_c(t);
    let mut defect = 1.0 - t.norm_sqr();
    if n > 1 {
        let rho = defect.sqrt();
        let mut g = CVec::zeros(n);
        for c in g.as_mut_slice() {
            *c = Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng));
        }
        let g_perp = g - zeta.scale_c(g.inner(zeta));
        let dir = g_perp.scale(1.0 / g_perp.norm());
        let m = 2 * (n - 1);
        let len = rho * open_unit(rng).powf(1.0 / m as f64);
        z = z + dir.scale(len);
        defect = (rho - len) * (rho + len);
    }
    BallPoint::from_parts(z, defect)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::NodeStreams;
    use approx::assert_relative_eq;

    #[test]
    fn lens_area_limits() {
        assert_relative_eq!(lens_area(2.0), PI);
        assert_relative_eq!(lens_area(1.999_999_9), PI, epsilon = 1e-3);
        // Two unit disks at unit distance.
        assert_relative_eq!(lens_area(1.0), 2.0 * PI / 3.0 - 3f64.sqrt() / 2.0, epsilon = 1e-14);
        assert!(lens_area(0.1) < 0.5 * PI * 0.01);
    }

    #[test]
    fn samples_stay_in_support() {
        let streams = NodeStreams::new(3);
        let zeta = CVec::from_real(&[0.6, 0.8]).unwrap();
        let c = BallPoint::from_real(&[0.5, -0.7]).unwrap();
        let props = [
            Proposal::weighted(2, -0.5).unwrap(),
            Proposal::moebius(c, 1.0).unwrap(),
            Proposal::bergman_ball(c, 0.7).unwrap(),
            Proposal::tube(zeta, 0.4).unwrap(),
            Proposal::tube(zeta, 1.3).unwrap(),
        ];
        for p in &props {
            for i in 0..2000 {
                let z = p.sample(&mut streams.node(i)).unwrap();
                assert!(z.norm() < 1.0);
                assert!((z.defect() - (1.0 - z.coords().norm_sqr())).abs() < 1e-12);
                assert!(p.density(&z) > 0.0, "{p:?}");
            }
        }
    }
}

//! Exact geometry of the unit ball of `C^n`.
//!
//! Points are stored in a fixed-capacity complex vector ([`CVec`]) so the hot
//! quadrature loops never allocate. [`BallPoint`] adds the open-ball invariant
//! and caches the defect `1 - |z|^2`, which is carried through automorphisms
//! using the identity
//!
//! ```text
//! 1 - |phi_z(w)|^2 = (1 - |z|^2)(1 - |w|^2) / |1 - <w, z>|^2
//! ```
//!
//! so that points very close to the sphere keep full relative accuracy.

use std::fmt;
use std::ops::{Add, Index, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, BergmanError, Result};

/// Largest supported complex dimension.
pub const MAX_DIM: usize = 4;

/// Points with `|z| >= 1 - BOUNDARY_GUARD` are rejected at construction.
pub const BOUNDARY_GUARD: f64 = 1e-14;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A complex `n`-vector with `n <= MAX_DIM`, stored inline.
#[derive(Clone, Copy, PartialEq)]
pub struct CVec {
    dim: usize,
    data: [Complex64; MAX_DIM],
}

impl CVec {
    pub fn zeros(dim: usize) -> Self {
        debug_assert!((1..=MAX_DIM).contains(&dim));
        Self {
            dim,
            data: [ZERO; MAX_DIM],
        }
    }

    pub fn from_slice(coords: &[Complex64]) -> Result<Self> {
        let dim = coords.len();
        if dim == 0 || dim > MAX_DIM {
            return Err(BergmanError::UnsupportedDimension(dim));
        }
        let mut v = Self::zeros(dim);
        v.data[..dim].copy_from_slice(coords);
        Ok(v)
    }

    pub fn from_real(coords: &[f64]) -> Result<Self> {
        let c: Vec<Complex64> = coords.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_slice(&c)
    }

    /// The `k`-th standard basis vector scaled by `scale`.
    pub fn basis(dim: usize, k: usize, scale: Complex64) -> Self {
        let mut v = Self::zeros(dim);
        v.data[k] = scale;
        v
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn as_slice(&self) -> &[Complex64] {
        &self.data[..self.dim]
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data[..self.dim]
    }

    /// `sum_k self_k * conj(other_k)`.
    #[inline]
    pub fn inner(&self, other: &CVec) -> Complex64 {
        debug_assert_eq!(self.dim, other.dim);
        let mut acc = ZERO;
        for k in 0..self.dim {
            acc += self.data[k] * other.data[k].conj();
        }
        acc
    }

    #[inline]
    pub fn norm_sqr(&self) -> f64 {
        self.as_slice().iter().map(|c| c.norm_sqr()).sum()
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    #[inline]
    pub fn scale(&self, s: f64) -> CVec {
        let mut out = *self;
        for c in out.as_mut_slice() {
            *c *= s;
        }
        out
    }

    #[inline]
    pub fn scale_c(&self, s: Complex64) -> CVec {
        let mut out = *self;
        for c in out.as_mut_slice() {
            *c *= s;
        }
        out
    }

    pub fn conj(&self) -> CVec {
        let mut out = *self;
        for c in out.as_mut_slice() {
            *c = c.conj();
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.as_slice().iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

impl Index<usize> for CVec {
    type Output = Complex64;
    fn index(&self, k: usize) -> &Complex64 {
        &self.as_slice()[k]
    }
}

impl Add for CVec {
    type Output = CVec;
    fn add(mut self, rhs: CVec) -> CVec {
        debug_assert_eq!(self.dim, rhs.dim);
        for k in 0..self.dim {
            self.data[k] += rhs.data[k];
        }
        self
    }
}

impl Sub for CVec {
    type Output = CVec;
    fn sub(mut self, rhs: CVec) -> CVec {
        debug_assert_eq!(self.dim, rhs.dim);
        for k in 0..self.dim {
            self.data[k] -= rhs.data[k];
        }
        self
    }
}

impl Neg for CVec {
    type Output = CVec;
    fn neg(self) -> CVec {
        self.scale(-1.0)
    }
}

impl Mul<f64> for CVec {
    type Output = CVec;
    fn mul(self, rhs: f64) -> CVec {
        self.scale(rhs)
    }
}

impl fmt::Debug for CVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.as_slice()).finish()
    }
}

impl Serialize for CVec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = self.as_slice().iter().map(|c| [c.re, c.im]).collect();
        pairs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CVec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs: Vec<[f64; 2]> = Vec::deserialize(d)?;
        let coords: Vec<Complex64> = pairs.iter().map(|p| Complex64::new(p[0], p[1])).collect();
        CVec::from_slice(&coords).map_err(serde::de::Error::custom)
    }
}

/// Hermitian pairing `<z, w> = sum_k z_k conj(w_k)`.
pub fn herm_inner(z: &[Complex64], w: &[Complex64]) -> Result<Complex64> {
    if z.len() != w.len() {
        return Err(BergmanError::DimensionMismatch {
            expected: z.len(),
            got: w.len(),
        });
    }
    Ok(z.iter().zip(w).map(|(a, b)| a * b.conj()).sum())
}

/// An interior point of the unit ball.
#[derive(Clone, Copy, PartialEq)]
pub struct BallPoint {
    coords: CVec,
    defect: f64,
}

impl BallPoint {
    pub fn new(coords: &[Complex64]) -> Result<Self> {
        Self::from_cvec(CVec::from_slice(coords)?)
    }

    pub fn from_real(coords: &[f64]) -> Result<Self> {
        Self::from_cvec(CVec::from_real(coords)?)
    }

    pub fn from_cvec(coords: CVec) -> Result<Self> {
        let norm = coords.norm();
        if !coords.is_finite() || norm >= 1.0 - BOUNDARY_GUARD {
            return Err(BergmanError::OutsideBall { norm });
        }
        Ok(Self {
            coords,
            defect: 1.0 - coords.norm_sqr(),
        })
    }

    pub fn origin(dim: usize) -> Self {
        Self {
            coords: CVec::zeros(dim),
            defect: 1.0,
        }
    }

    /// Caller guarantees `|coords| < 1`; `defect` must equal `1 - |coords|^2`.
    #[inline]
    pub(crate) fn from_parts(coords: CVec, defect: f64) -> Self {
        Self { coords, defect }
    }

    #[inline]
    pub(crate) fn from_cvec_unchecked(coords: CVec) -> Self {
        let defect = 1.0 - coords.norm_sqr();
        Self { coords, defect }
    }

    #[inline]
    pub fn coords(&self) -> &CVec {
        &self.coords
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.coords.dim()
    }

    /// `1 - |z|^2`, kept accurate near the sphere.
    #[inline]
    pub fn defect(&self) -> f64 {
        self.defect
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        self.coords.norm()
    }

    #[inline]
    pub fn inner(&self, other: &CVec) -> Complex64 {
        self.coords.inner(other)
    }

    pub fn is_origin(&self) -> bool {
        self.coords.as_slice().iter().all(|c| *c == ZERO)
    }
}

impl fmt::Debug for BallPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.coords.fmt(f)
    }
}

/// The involutive automorphism `phi_z` exchanging `0` and `z`.
#[derive(Clone, Copy, Debug)]
pub struct Automorphism {
    base: BallPoint,
    base_norm_sqr: f64,
    s: f64,
}

impl Automorphism {
    pub fn new(base: BallPoint) -> Self {
        let base_norm_sqr = base.coords.norm_sqr();
        Self {
            base,
            base_norm_sqr,
            s: base.defect.sqrt(),
        }
    }

    pub fn base(&self) -> &BallPoint {
        &self.base
    }

    /// `phi_z(w) = (z - P_z w - s_z Q_z w) / (1 - <w, z>)`, with `phi_0 = -id`.
    #[inline]
    pub fn apply_vec(&self, w: &CVec) -> CVec {
        if self.base_norm_sqr == 0.0 {
            return -*w;
        }
        let z = &self.base.coords;
        let wz = w.inner(z);
        let proj = z.scale_c(wz / self.base_norm_sqr);
        let orth = *w - proj;
        let num = *z - proj - orth.scale(self.s);
        num.scale_c((Complex64::new(1.0, 0.0) - wz).inv())
    }

    #[inline]
    pub fn apply(&self, w: &BallPoint) -> BallPoint {
        let image = self.apply_vec(&w.coords);
        let denom = (Complex64::new(1.0, 0.0) - w.coords.inner(&self.base.coords)).norm_sqr();
        let defect = self.base.defect * w.defect / denom;
        BallPoint::from_parts(image, defect)
    }

    /// Real Jacobian of `phi_z` at `w` relative to `v`:
    /// `((1 - |z|^2) / |1 - <w, z>|^2)^(n+1)`.
    pub fn jacobian(&self, w: &BallPoint) -> f64 {
        let n = self.base.dim() as i32;
        let denom = (Complex64::new(1.0, 0.0) - w.coords.inner(&self.base.coords)).norm_sqr();
        (self.base.defect / denom).powi(n + 1)
    }
}

/// Convenience wrapper for [`Automorphism::apply`].
pub fn moebius_apply(a: &Automorphism, w: &BallPoint) -> BallPoint {
    a.apply(w)
}

/// `1 - |phi_z(w)|^2` through the fundamental identity; clamped to `[0, 1]`.
#[inline]
pub fn pseudo_hyperbolic_defect(z: &BallPoint, w: &BallPoint) -> f64 {
    let denom = (Complex64::new(1.0, 0.0) - z.coords.inner(&w.coords)).norm_sqr();
    (z.defect * w.defect / denom).min(1.0)
}

/// `|phi_z(w)|`.
pub fn pseudo_hyperbolic(z: &BallPoint, w: &BallPoint) -> f64 {
    (1.0 - pseudo_hyperbolic_defect(z, w)).max(0.0).sqrt()
}

/// Bergman metric `beta(z, w) = atanh |phi_z(w)|`.
///
/// Evaluated as `log(1 + x) - log(1 - x^2) / 2` with `1 - x^2` from the
/// fundamental identity; exactly symmetric in its arguments.
pub fn bergman_metric(z: &BallPoint, w: &BallPoint) -> f64 {
    let t = pseudo_hyperbolic_defect(z, w);
    let x = (1.0 - t).max(0.0).sqrt();
    (x.ln_1p() - 0.5 * t.ln()).max(0.0)
}

/// The nonisotropic pseudo-metric of the homogeneous-space structure.
pub fn pseudo_metric_rho(z: &CVec, w: &CVec) -> f64 {
    let nz = z.norm();
    let nw = w.norm();
    if nz > 0.0 && nw > 0.0 {
        (nz - nw).abs() + (Complex64::new(1.0, 0.0) - z.inner(w) / (nz * nw)).norm()
    } else {
        nz + nw
    }
}

/// Nonisotropic metric `d(z, zeta) = |1 - <z, zeta>|^(1/2)` on the closed ball.
pub fn noniso_metric_d(z: &CVec, zeta: &CVec) -> f64 {
    (Complex64::new(1.0, 0.0) - z.inner(zeta)).norm().sqrt()
}

/// Euclidean description of a Bergman ball `D(z, gamma)`: it is an ellipsoid
/// with the returned center, contained in the Euclidean ball of the returned radius.
pub fn bergman_ball_bounds(center: &BallPoint, gamma: f64) -> (CVec, f64) {
    let r = gamma.tanh();
    let zz = center.coords.norm_sqr();
    let shrink = 1.0 - r * r * zz;
    let euclid_center = center.coords.scale((1.0 - r * r) / shrink);
    let radius = r * (center.defect / shrink).sqrt();
    (euclid_center, radius)
}

#[derive(Clone, Debug)]
pub enum Region {
    WholeBall,
    BergmanBall { center: BallPoint, gamma: f64 },
    CarlesonTube { zeta: CVec, r: f64 },
    EuclideanBall { center: CVec, radius: f64 },
}

impl Region {
    pub fn bergman_ball(center: BallPoint, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(invalid(format!("Bergman radius must be positive, got {gamma}")));
        }
        Ok(Region::BergmanBall { center, gamma })
    }

    pub fn carleson_tube(zeta: CVec, r: f64) -> Result<Self> {
        if (zeta.norm() - 1.0).abs() > 1e-12 {
            return Err(invalid(format!(
                "tube center must lie on the sphere, |zeta| = {}",
                zeta.norm()
            )));
        }
        if !(r > 0.0 && r.is_finite()) {
            return Err(invalid(format!("tube radius must be positive, got {r}")));
        }
        Ok(Region::CarlesonTube { zeta, r })
    }

    pub fn euclidean_ball(center: CVec, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(invalid(format!("radius must be positive, got {radius}")));
        }
        Ok(Region::EuclideanBall { center, radius })
    }

    /// Strict membership; points outside the open ball belong to no region.
    pub fn contains(&self, w: &CVec) -> bool {
        if w.norm() >= 1.0 {
            return false;
        }
        match self {
            Region::WholeBall => true,
            Region::BergmanBall { center, gamma } => {
                let p = BallPoint::from_cvec_unchecked(*w);
                let r = gamma.tanh();
                // |phi_c(w)|^2 < r^2
                1.0 - pseudo_hyperbolic_defect(center, &p) < r * r
            }
            Region::CarlesonTube { zeta, r } => noniso_metric_d(w, zeta) < *r,
            Region::EuclideanBall { center, radius } => (*w - *center).norm() < *radius,
        }
    }
}

pub fn region_contains(region: &Region, w: &CVec) -> bool {
    region.contains(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn inner_product_values() {
        let e1 = [c(1.0, 0.0), c(0.0, 0.0)];
        assert_eq!(herm_inner(&e1, &e1).unwrap(), c(1.0, 0.0));
        let a = [c(0.5, 0.0), c(0.0, 0.0)];
        let b = [c(0.0, 0.0), c(0.5, 0.0)];
        assert_eq!(herm_inner(&a, &b).unwrap(), c(0.0, 0.0));
        let v = herm_inner(&[c(0.3, 0.4)], &[c(0.0, 0.1)]).unwrap();
        assert_relative_eq!(v.re, 0.04, epsilon = 1e-15);
        assert_relative_eq!(v.im, -0.03, epsilon = 1e-15);
        assert!(matches!(
            herm_inner(&e1, &[c(1.0, 0.0)]),
            Err(BergmanError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn construction_rejects_boundary() {
        assert!(BallPoint::from_real(&[1.0]).is_err());
        assert!(BallPoint::from_real(&[0.6, 0.8]).is_err());
        assert!(BallPoint::from_real(&[1.0 - 1e-15]).is_err());
        assert!(BallPoint::from_real(&[0.999]).is_ok());
        assert!(BallPoint::new(&[]).is_err());
    }

    #[test]
    fn one_variable_moebius() {
        let z = BallPoint::from_real(&[0.5]).unwrap();
        let w = BallPoint::from_real(&[-0.5]).unwrap();
        let image = Automorphism::new(z).apply(&w);
        assert_relative_eq!(image.coords()[0].re, 0.8, epsilon = 1e-15);
        assert_relative_eq!(image.coords()[0].im, 0.0, epsilon = 1e-15);
        assert_relative_eq!(image.defect(), 1.0 - 0.64, epsilon = 1e-15);
    }

    #[test]
    fn origin_automorphism_is_negation() {
        let phi = Automorphism::new(BallPoint::origin(2));
        let w = BallPoint::new(&[c(0.1, 0.2), c(-0.3, 0.05)]).unwrap();
        let image = phi.apply(&w);
        assert_eq!(image.coords()[0], c(-0.1, -0.2));
        assert_eq!(image.coords()[1], c(0.3, -0.05));
    }

    #[test]
    fn bergman_metric_values() {
        let z = BallPoint::new(&[c(0.3, -0.2), c(0.1, 0.4)]).unwrap();
        assert_eq!(bergman_metric(&z, &z), 0.0);
        let w = BallPoint::from_real(&[0.5, 0.0]).unwrap();
        let o = BallPoint::origin(2);
        assert_relative_eq!(bergman_metric(&o, &w), 0.5 * 3f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn rho_branches() {
        let o = CVec::zeros(1);
        let w = CVec::from_slice(&[c(0.3, 0.4)]).unwrap();
        assert_relative_eq!(pseudo_metric_rho(&o, &w), 0.5, epsilon = 1e-15);
        assert_eq!(pseudo_metric_rho(&w, &w), 0.0);
        let z = CVec::from_real(&[0.5]).unwrap();
        let wi = CVec::from_slice(&[c(0.0, 0.5)]).unwrap();
        assert_relative_eq!(pseudo_metric_rho(&z, &wi), 2f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn noniso_values() {
        let zeta = CVec::from_real(&[0.6, 0.8]).unwrap();
        assert_eq!(noniso_metric_d(&zeta, &zeta), 0.0);
        assert_eq!(noniso_metric_d(&CVec::zeros(2), &zeta), 1.0);
        let d = noniso_metric_d(&CVec::from_real(&[0.5]).unwrap(), &CVec::from_real(&[1.0]).unwrap());
        assert_relative_eq!(d, 0.5f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn region_membership() {
        let o = BallPoint::origin(2);
        let d = Region::bergman_ball(o, 1.0).unwrap();
        assert!(d.contains(&CVec::from_real(&[0.5, 0.0]).unwrap()));
        assert!(!d.contains(&CVec::from_real(&[0.77, 0.0]).unwrap()));

        let e1 = CVec::from_real(&[1.0, 0.0]).unwrap();
        let tube = Region::carleson_tube(e1, 1.0).unwrap();
        assert!(!tube.contains(&CVec::zeros(2)));
        assert!(tube.contains(&CVec::from_real(&[0.1, 0.0]).unwrap()));

        for region in [
            Region::WholeBall,
            d,
            tube,
            Region::euclidean_ball(e1, 0.5).unwrap(),
        ] {
            assert!(!region.contains(&e1));
            assert!(!region.contains(&CVec::from_real(&[0.0, 1.2]).unwrap()));
        }
        assert!(Region::carleson_tube(CVec::from_real(&[0.5, 0.0]).unwrap(), 0.3).is_err());
        assert!(Region::bergman_ball(BallPoint::origin(1), 0.0).is_err());
    }

    #[test]
    fn bergman_ball_at_origin_is_euclidean() {
        let gamma = 0.8;
        let d = Region::bergman_ball(BallPoint::origin(1), gamma).unwrap();
        let e = Region::euclidean_ball(CVec::zeros(1), gamma.tanh()).unwrap();
        for k in 0..200 {
            let x = -0.99 + 1.98 * k as f64 / 199.0;
            let p = CVec::from_slice(&[c(x, 0.3 * x)]).unwrap();
            assert_eq!(d.contains(&p), e.contains(&p), "x = {x}");
        }
    }

    #[test]
    fn bounding_ball_contains_bergman_ball() {
        let center = BallPoint::new(&[c(0.7, 0.1), c(0.0, -0.5)]).unwrap();
        let gamma = 1.2;
        let (ec, radius) = bergman_ball_bounds(&center, gamma);
        let phi = Automorphism::new(center);
        let r = gamma.tanh();
        for k in 0..64 {
            let t = k as f64 * 0.37;
            let dir = CVec::from_slice(&[c(t.cos(), 0.2), c(0.1, t.sin())]).unwrap();
            let u = dir.scale(r * (1.0 - 1e-9) / dir.norm());
            let w = phi.apply_vec(&u);
            assert!((w - ec).norm() <= radius * (1.0 + 1e-9));
        }
    }
}

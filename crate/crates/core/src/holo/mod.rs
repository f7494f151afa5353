//! Symbolic holomorphic test functions.
//!
//! A [`HoloFun`] is a finite sum of monomials `c z^m` and kernel terms
//! `c <z,a>^j (1 - <z,a>)^(-b)`. The family is closed under `d/dz_k` and the
//! radial derivative `R = sum z_k d/dz_k`:
//!
//! ```text
//! d_k [<z,a>^j D^-b] = j conj(a_k) <z,a>^(j-1) D^-b + b conj(a_k) <z,a>^j D^(-b-1)
//! R   [<z,a>^j D^-b] = j <z,a>^j D^-b + b <z,a>^(j+1) D^(-b-1)
//! ```
//!
//! with `D = 1 - <z,a>`. Real powers use the principal branch, which is safe
//! because `Re D > 0` on the open ball.

mod json;
pub mod norms;

use num_complex::Complex64;

use crate::error::{invalid, BergmanError, Result};
use crate::geometry::{Automorphism, BallPoint, CVec, MAX_DIM};

pub use norms::{
    bergman_norm, bloch_seminorm, generalized_norm, lp_integral, membership_check, MembershipReport,
};

/// Largest total degree of a monomial.
pub const MAX_DEGREE: u32 = 8;
/// Largest number of terms in one function.
pub const MAX_TERMS: usize = 64;

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub enum Term {
    Monomial {
        coeff: Complex64,
        index: [u32; MAX_DIM],
    },
    /// `coeff * <z,pole>^power * (1 - <z,pole>)^(-exponent)`.
    Kernel {
        coeff: Complex64,
        pole: CVec,
        exponent: f64,
        power: u32,
    },
}

impl Term {
    fn coeff(&self) -> Complex64 {
        match self {
            Term::Monomial { coeff, .. } | Term::Kernel { coeff, .. } => *coeff,
        }
    }

    fn coeff_mut(&mut self) -> &mut Complex64 {
        match self {
            Term::Monomial { coeff, .. } | Term::Kernel { coeff, .. } => coeff,
        }
    }

    fn same_shape(&self, other: &Term) -> bool {
        match (self, other) {
            (Term::Monomial { index: a, .. }, Term::Monomial { index: b, .. }) => a == b,
            (
                Term::Kernel {
                    pole: p1,
                    exponent: e1,
                    power: j1,
                    ..
                },
                Term::Kernel {
                    pole: p2,
                    exponent: e2,
                    power: j2,
                    ..
                },
            ) => p1 == p2 && e1 == e2 && j1 == j2,
            _ => false,
        }
    }

    #[inline]
    fn eval(&self, z: &CVec) -> Complex64 {
        match self {
            Term::Monomial { coeff, index } => {
                let mut acc = *coeff;
                for (k, &m) in index.iter().enumerate().take(z.dim()) {
                    if m > 0 {
                        acc *= z[k].powu(m);
                    }
                }
                acc
            }
            Term::Kernel {
                coeff,
                pole,
                exponent,
                power,
            } => {
                let g = z.inner(pole);
                let d = ONE - g;
                let mut v = *coeff * complex_neg_pow(d, *exponent);
                if *power > 0 {
                    v *= g.powu(*power);
                }
                v
            }
        }
    }
}

/// `d^(-b)` on the principal branch, exact integer path when possible.
#[inline]
fn complex_neg_pow(d: Complex64, b: f64) -> Complex64 {
    if b.fract() == 0.0 && b.abs() < 64.0 {
        d.powi(-(b as i32))
    } else {
        (d.ln() * (-b)).exp()
    }
}

/// A finite sum of monomials and kernel terms in `n` complex variables.
#[derive(Clone, Debug, PartialEq)]
pub struct HoloFun {
    dim: usize,
    terms: Vec<Term>,
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 || n > MAX_DIM {
        Err(BergmanError::UnsupportedDimension(n))
    } else {
        Ok(())
    }
}

impl HoloFun {
    pub fn zero(n: usize) -> Result<Self> {
        check_dim(n)?;
        Ok(Self {
            dim: n,
            terms: Vec::new(),
        })
    }

    pub fn constant(n: usize, c: Complex64) -> Result<Self> {
        Self::from_terms(
            n,
            vec![Term::Monomial {
                coeff: c,
                index: [0; MAX_DIM],
            }],
        )
    }

    pub fn monomial(n: usize, coeff: Complex64, index: &[u32]) -> Result<Self> {
        check_dim(n)?;
        if index.len() != n {
            return Err(BergmanError::DimensionMismatch {
                expected: n,
                got: index.len(),
            });
        }
        let degree: u32 = index.iter().sum();
        if degree > MAX_DEGREE {
            return Err(BergmanError::FamilyLimit(format!(
                "monomial degree {degree} exceeds {MAX_DEGREE}"
            )));
        }
        let mut idx = [0; MAX_DIM];
        idx[..n].copy_from_slice(index);
        Self::from_terms(n, vec![Term::Monomial { coeff, index: idx }])
    }

    /// `coeff (1 - <z,a>)^(-b)`.
    pub fn kernel_power(pole: &BallPoint, b: f64, coeff: Complex64) -> Result<Self> {
        Self::product(pole, b, 0, coeff)
    }

    /// `coeff <z,a>^j (1 - <z,a>)^(-b)`.
    pub fn product(pole: &BallPoint, b: f64, j: u32, coeff: Complex64) -> Result<Self> {
        if !(b > 0.0 && b.is_finite()) {
            return Err(invalid(format!("kernel exponent must be positive, got {b}")));
        }
        Self::from_terms(
            pole.dim(),
            vec![Term::Kernel {
                coeff,
                pole: *pole.coords(),
                exponent: b,
                power: j,
            }],
        )
    }

    /// Builds a function from raw terms, merging like terms and checking limits.
    pub fn from_terms(n: usize, raw: Vec<Term>) -> Result<Self> {
        check_dim(n)?;
        let mut terms: Vec<Term> = Vec::with_capacity(raw.len());
        for t in raw {
            let t = normalize_term(t, n)?;
            if t.coeff() == ZERO {
                continue;
            }
            if let Some(existing) = terms.iter_mut().find(|e| e.same_shape(&t)) {
                *existing.coeff_mut() += t.coeff();
            } else {
                terms.push(t);
            }
        }
        terms.retain(|t| t.coeff() != ZERO);
        if terms.len() > MAX_TERMS {
            return Err(BergmanError::FamilyLimit(format!(
                "{} terms exceed the limit of {MAX_TERMS}",
                terms.len()
            )));
        }
        Ok(Self { dim: n, terms })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn sum(&self, other: &HoloFun) -> Result<Self> {
        if self.dim != other.dim {
            return Err(BergmanError::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self::from_terms(self.dim, terms)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        if c == ZERO {
            return Self {
                dim: self.dim,
                terms: Vec::new(),
            };
        }
        let mut out = self.clone();
        for t in &mut out.terms {
            *t.coeff_mut() *= c;
        }
        out
    }

    /// Value at an arbitrary vector (callers keep it inside the ball).
    #[inline]
    pub fn eval_vec(&self, z: &CVec) -> Complex64 {
        self.terms.iter().map(|t| t.eval(z)).sum()
    }

    #[inline]
    pub fn evaluate(&self, z: &BallPoint) -> Complex64 {
        self.eval_vec(z.coords())
    }

    /// Symbolic `d f / d z_k`.
    pub fn partial(&self, k: usize) -> Result<Self> {
        if k >= self.dim {
            return Err(invalid(format!("coordinate {k} out of range for dimension {}", self.dim)));
        }
        let mut out = Vec::with_capacity(2 * self.terms.len());
        for t in &self.terms {
            match t {
                Term::Monomial { coeff, index } => {
                    if index[k] > 0 {
                        let mut idx = *index;
                        idx[k] -= 1;
                        out.push(Term::Monomial {
                            coeff: coeff * index[k] as f64,
                            index: idx,
                        });
                    }
                }
                Term::Kernel {
                    coeff,
                    pole,
                    exponent,
                    power,
                } => {
                    let ak = pole[k].conj();
                    if *power > 0 {
                        out.push(Term::Kernel {
                            coeff: coeff * ak * *power as f64,
                            pole: *pole,
                            exponent: *exponent,
                            power: power - 1,
                        });
                    }
                    out.push(Term::Kernel {
                        coeff: coeff * ak * *exponent,
                        pole: *pole,
                        exponent: exponent + 1.0,
                        power: *power,
                    });
                }
            }
        }
        Self::from_terms(self.dim, out)
    }

    /// Symbolic `R^order f`.
    pub fn radial_derivative(&self, order: u32) -> Result<Self> {
        let mut f = self.clone();
        for _ in 0..order {
            f = f.radial_once()?;
        }
        Ok(f)
    }

    fn radial_once(&self) -> Result<Self> {
        let mut out = Vec::with_capacity(2 * self.terms.len());
        for t in &self.terms {
            match t {
                Term::Monomial { coeff, index } => {
                    let degree: u32 = index.iter().sum();
                    out.push(Term::Monomial {
                        coeff: coeff * degree as f64,
                        index: *index,
                    });
                }
                Term::Kernel {
                    coeff,
                    pole,
                    exponent,
                    power,
                } => {
                    out.push(Term::Kernel {
                        coeff: coeff * *power as f64,
                        pole: *pole,
                        exponent: *exponent,
                        power: *power,
                    });
                    out.push(Term::Kernel {
                        coeff: coeff * *exponent,
                        pole: *pole,
                        exponent: exponent + 1.0,
                        power: power + 1,
                    });
                }
            }
        }
        Self::from_terms(self.dim, out)
    }

    /// Complex gradient at `z`, from the exact term derivatives.
    pub fn gradient_vec(&self, z: &CVec) -> CVec {
        let mut grad = CVec::zeros(self.dim);
        for t in &self.terms {
            match t {
                Term::Monomial { coeff, index } => {
                    for k in 0..self.dim {
                        if index[k] == 0 {
                            continue;
                        }
                        let mut v = coeff * index[k] as f64;
                        for (l, &m) in index.iter().enumerate().take(self.dim) {
                            let e = if l == k { m - 1 } else { m };
                            if e > 0 {
                                v *= z[l].powu(e);
                            }
                        }
                        grad.as_mut_slice()[k] += v;
                    }
                }
                Term::Kernel {
                    coeff,
                    pole,
                    exponent,
                    power,
                } => {
                    let g = z.inner(pole);
                    let d = ONE - g;
                    let dpow = complex_neg_pow(d, *exponent);
                    let mut s = coeff * dpow * *exponent / d * g.powu(*power);
                    if *power > 0 {
                        s += coeff * dpow * *power as f64 * g.powu(power - 1);
                    }
                    for k in 0..self.dim {
                        grad.as_mut_slice()[k] += s * pole[k].conj();
                    }
                }
            }
        }
        grad
    }

    pub fn gradient(&self, z: &BallPoint) -> CVec {
        self.gradient_vec(z.coords())
    }

    /// `Rf(z) = sum_k z_k d_k f(z)`.
    pub fn radial_at(&self, z: &CVec) -> Complex64 {
        let g = self.gradient_vec(z);
        (0..self.dim).map(|k| z[k] * g[k]).sum()
    }

    /// `|grad~ f(z)|` from the identity `|grad~ f|^2 = (1-|z|^2)(|grad f|^2 - |Rf|^2)`.
    pub fn invariant_gradient_norm(&self, z: &BallPoint) -> f64 {
        let g = self.gradient(z);
        let r: Complex64 = (0..self.dim).map(|k| z.coords()[k] * g[k]).sum();
        (z.defect() * (g.norm_sqr() - r.norm_sqr())).max(0.0).sqrt()
    }

    /// `f(0)`.
    pub fn at_origin(&self) -> Complex64 {
        self.eval_vec(&CVec::zeros(self.dim))
    }
}

fn normalize_term(t: Term, n: usize) -> Result<Term> {
    match t {
        Term::Monomial { coeff, index } => {
            if index[n..].iter().any(|&m| m > 0) {
                return Err(BergmanError::DimensionMismatch { expected: n, got: MAX_DIM });
            }
            if index.iter().sum::<u32>() > MAX_DEGREE {
                return Err(BergmanError::FamilyLimit(format!("monomial degree exceeds {MAX_DEGREE}")));
            }
            Ok(Term::Monomial { coeff, index })
        }
        Term::Kernel {
            coeff,
            pole,
            exponent,
            power,
        } => {
            if pole.dim() != n {
                return Err(BergmanError::DimensionMismatch {
                    expected: n,
                    got: pole.dim(),
                });
            }
            let norm = pole.norm();
            if norm >= 1.0 {
                return Err(BergmanError::OutsideBall { norm });
            }
            if norm == 0.0 {
                let c = if power == 0 { coeff } else { ZERO };
                return Ok(Term::Monomial {
                    coeff: c,
                    index: [0; MAX_DIM],
                });
            }
            Ok(Term::Kernel {
                coeff,
                pole,
                exponent,
                power,
            })
        }
    }
}

/// Numerical invariant gradient `grad(f o phi_z)(0)` of any holomorphic map.
///
/// Central Wirtinger differences in each complex coordinate with step `h`,
/// followed by one Richardson step `(4 D(h/2) - D(h)) / 3`.
pub fn invariant_gradient_fn<F>(f: F, z: &BallPoint, h: f64) -> Result<CVec>
where
    F: Fn(&CVec) -> Complex64,
{
    if !(h > 0.0 && h < 0.5) {
        return Err(invalid(format!("difference step must lie in (0, 0.5), got {h}")));
    }
    let n = z.dim();
    let phi = Automorphism::new(*z);
    let g = |w: &CVec| f(&phi.apply_vec(w));
    let diff = |k: usize, step: f64| -> Complex64 {
        let ex = CVec::basis(n, k, Complex64::new(step, 0.0));
        let ey = CVec::basis(n, k, Complex64::new(0.0, step));
        let dx = (g(&ex) - g(&-ex)) / (2.0 * step);
        let dy = (g(&ey) - g(&-ey)) / (2.0 * step);
        (dx - Complex64::i() * dy) * 0.5
    };
    let mut out = CVec::zeros(n);
    for k in 0..n {
        let v = (diff(k, h / 2.0) * 4.0 - diff(k, h)) / 3.0;
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(BergmanError::NonFiniteSample { index: k });
        }
        out.as_mut_slice()[k] = v;
    }
    Ok(out)
}

/// Numerical invariant gradient of a family member.
pub fn invariant_gradient(f: &HoloFun, z: &BallPoint, h: f64) -> Result<CVec> {
    invariant_gradient_fn(|w| f.eval_vec(w), z, h)
}

pub fn evaluate(f: &HoloFun, z: &BallPoint) -> Complex64 {
    f.evaluate(z)
}

pub fn radial_derivative(f: &HoloFun, order: u32) -> Result<HoloFun> {
    f.radial_derivative(order)
}

pub fn gradient(f: &HoloFun, z: &BallPoint) -> CVec {
    f.gradient(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn evaluation_examples() {
        let f = HoloFun::monomial(2, ONE, &[2, 0]).unwrap();
        let z = BallPoint::from_real(&[0.5, 0.0]).unwrap();
        assert_eq!(f.evaluate(&z), c(0.25, 0.0));

        let k0 = HoloFun::kernel_power(&BallPoint::origin(2), 2.7, ONE).unwrap();
        assert_eq!(k0.evaluate(&z), ONE);

        let a = BallPoint::from_real(&[0.5]).unwrap();
        let k = HoloFun::kernel_power(&a, 2.0, ONE).unwrap();
        let v = k.evaluate(&BallPoint::from_real(&[0.5]).unwrap());
        assert_relative_eq!(v.re, 1.0 / 0.5625, epsilon = 1e-14);
        assert_relative_eq!(v.re, 1.777778, epsilon = 1e-6);
    }

    #[test]
    fn fractional_power_uses_principal_branch() {
        let a = BallPoint::new(&[c(0.3, 0.6)]).unwrap();
        let k = HoloFun::kernel_power(&a, 1.5, ONE).unwrap();
        let z = BallPoint::new(&[c(-0.2, 0.7)]).unwrap();
        let d = ONE - z.coords()[0] * a.coords()[0].conj();
        let expected = d.powf(-1.5);
        let got = k.evaluate(&z);
        assert_relative_eq!(got.re, expected.re, epsilon = 1e-14);
        assert_relative_eq!(got.im, expected.im, epsilon = 1e-14);
    }

    #[test]
    fn radial_derivative_examples() {
        let f = HoloFun::monomial(2, ONE, &[2, 0]).unwrap();
        let rf = f.radial_derivative(1).unwrap();
        assert_eq!(rf, f.scale(c(2.0, 0.0)));

        let cst = HoloFun::constant(3, c(1.5, -2.0)).unwrap();
        assert!(cst.radial_derivative(1).unwrap().is_zero());

        let a = BallPoint::new(&[c(0.3, -0.1), c(0.2, 0.4)]).unwrap();
        let b = 2.5;
        let k = HoloFun::kernel_power(&a, b, ONE).unwrap();
        let rk = k.radial_derivative(1).unwrap();
        let z = BallPoint::new(&[c(-0.4, 0.2), c(0.1, 0.5)]).unwrap();
        let g = z.inner(a.coords());
        let expected = g * b * (ONE - g).powf(-b - 1.0);
        let got = rk.evaluate(&z);
        assert_relative_eq!((got - expected).norm(), 0.0, epsilon = 1e-13);
    }

    #[test]
    fn gradient_examples() {
        let f = HoloFun::monomial(2, ONE, &[2, 0]).unwrap();
        let g = f.gradient(&BallPoint::from_real(&[0.5, 0.0]).unwrap());
        assert_eq!(g[0], ONE);
        assert_eq!(g[1], ZERO);
        let cst = HoloFun::constant(2, ONE).unwrap();
        assert_eq!(cst.gradient(&BallPoint::from_real(&[0.5, 0.0]).unwrap()).norm(), 0.0);
    }

    #[test]
    fn gradient_matches_partial_terms() {
        let a = BallPoint::new(&[c(0.3, -0.1), c(0.2, 0.4)]).unwrap();
        let f = HoloFun::product(&a, 1.7, 2, c(0.5, 1.0))
            .unwrap()
            .sum(&HoloFun::monomial(2, c(0.0, 2.0), &[1, 3]).unwrap())
            .unwrap();
        let z = BallPoint::new(&[c(0.1, 0.3), c(-0.5, 0.2)]).unwrap();
        let g = f.gradient(&z);
        for k in 0..2 {
            let pk = f.partial(k).unwrap().evaluate(&z);
            assert_relative_eq!((pk - g[k]).norm(), 0.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn one_variable_invariant_gradient() {
        let f = HoloFun::monomial(1, ONE, &[1]).unwrap();
        for x in [0.0, 0.3, 0.7, 0.95] {
            let z = BallPoint::new(&[c(x, 0.1 * x)]).unwrap();
            let num = invariant_gradient(&f, &z, 1e-4).unwrap();
            assert_relative_eq!(num.norm(), z.defect(), max_relative = 1e-7);
            assert_relative_eq!(f.invariant_gradient_norm(&z), z.defect(), max_relative = 1e-12);
        }
    }

    #[test]
    fn invariant_gradient_at_origin_is_negated_gradient() {
        let a = BallPoint::new(&[c(0.5, 0.2), c(0.0, -0.3)]).unwrap();
        let f = HoloFun::kernel_power(&a, 3.0, ONE).unwrap();
        let o = BallPoint::origin(2);
        let num = invariant_gradient(&f, &o, 1e-4).unwrap();
        let exact = f.gradient(&o);
        assert_relative_eq!((num + exact).norm(), 0.0, epsilon = 1e-8);
    }

    #[test]
    fn limits_are_enforced() {
        assert!(matches!(
            HoloFun::monomial(2, ONE, &[5, 4]),
            Err(BergmanError::FamilyLimit(_))
        ));
        let terms: Vec<Term> = (0..65)
            .map(|i| Term::Kernel {
                coeff: ONE,
                pole: CVec::from_real(&[0.5]).unwrap(),
                exponent: 1.0 + i as f64,
                power: 0,
            })
            .collect();
        assert!(matches!(HoloFun::from_terms(1, terms), Err(BergmanError::FamilyLimit(_))));
        assert!(HoloFun::kernel_power(&BallPoint::origin(1), 0.0, ONE).is_err());
    }

    #[test]
    fn like_terms_merge() {
        let a = BallPoint::from_real(&[0.4]).unwrap();
        let f = HoloFun::kernel_power(&a, 2.0, ONE).unwrap();
        let g = f.sum(&f).unwrap();
        assert_eq!(g.terms().len(), 1);
        assert!(f.sum(&f.scale(-ONE)).unwrap().is_zero());
    }
}

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{HoloFun, Term};
use crate::error::{BergmanError, Result};
use crate::geometry::{CVec, MAX_DIM};

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum Scalar {
    Complex([f64; 2]),
    Real(f64),
}

impl Scalar {
    fn value(&self) -> Complex64 {
        match self {
            Scalar::Complex([re, im]) => Complex64::new(*re, *im),
            Scalar::Real(re) => Complex64::new(*re, 0.0),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct TermDoc {
    kind: String,
    #[serde(default = "one")]
    coeff_re: f64,
    #[serde(default)]
    coeff_im: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pole: Option<Vec<Scalar>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    exponent: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    multi_index: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    power: Option<u32>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Serialize, Deserialize)]
struct FunDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dim: Option<usize>,
    terms: Vec<TermDoc>,
}

fn format_err(msg: impl Into<String>) -> BergmanError {
    BergmanError::Format(msg.into())
}

impl HoloFun {
    /// Parses `{dim?, terms: [{kind, coeff_re, coeff_im, pole, exponent, multi_index, power}]}`.
    ///
    /// `kind` is `monomial`, `kernel_power` or `product`; poles are lists of
    /// `[re, im]` pairs or plain reals.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: FunDoc = serde_json::from_str(text)?;
        let inferred = doc.terms.iter().find_map(|t| {
            t.pole
                .as_ref()
                .map(|p| p.len())
                .or_else(|| t.multi_index.as_ref().map(|m| m.len()))
        });
        let n = doc
            .dim
            .or(inferred)
            .ok_or_else(|| format_err("cannot infer the dimension; add \"dim\""))?;
        let mut terms = Vec::with_capacity(doc.terms.len());
        for (i, t) in doc.terms.iter().enumerate() {
            let coeff = Complex64::new(t.coeff_re, t.coeff_im);
            let term = match t.kind.as_str() {
                "monomial" => {
                    let m = t
                        .multi_index
                        .as_ref()
                        .ok_or_else(|| format_err(format!("term {i}: monomial needs multi_index")))?;
                    if m.len() != n {
                        return Err(BergmanError::DimensionMismatch {
                            expected: n,
                            got: m.len(),
                        });
                    }
                    let mut index = [0; MAX_DIM];
                    index[..n].copy_from_slice(m);
                    Term::Monomial { coeff, index }
                }
                "kernel_power" | "product" => {
                    let pole = t
                        .pole
                        .as_ref()
                        .ok_or_else(|| format_err(format!("term {i}: {} needs pole", t.kind)))?;
                    let coords: Vec<Complex64> = pole.iter().map(Scalar::value).collect();
                    let pole = CVec::from_slice(&coords)?;
                    let exponent = t
                        .exponent
                        .ok_or_else(|| format_err(format!("term {i}: {} needs exponent", t.kind)))?;
                    if !(exponent > 0.0 && exponent.is_finite()) {
                        return Err(format_err(format!("term {i}: exponent must be positive")));
                    }
                    let power = if t.kind == "product" {
                        t.power
                            .ok_or_else(|| format_err(format!("term {i}: product needs power")))?
                    } else {
                        0
                    };
                    Term::Kernel {
                        coeff,
                        pole,
                        exponent,
                        power,
                    }
                }
                other => return Err(format_err(format!("term {i}: unknown kind {other:?}"))),
            };
            terms.push(term);
        }
        HoloFun::from_terms(n, terms)
    }

    pub fn to_json(&self) -> String {
        let terms = self
            .terms()
            .iter()
            .map(|t| match t {
                Term::Monomial { coeff, index } => TermDoc {
                    kind: "monomial".into(),
                    coeff_re: coeff.re,
                    coeff_im: coeff.im,
                    pole: None,
                    exponent: None,
                    multi_index: Some(index[..self.dim()].to_vec()),
                    power: None,
                },
                Term::Kernel {
                    coeff,
                    pole,
                    exponent,
                    power,
                } => TermDoc {
                    kind: if *power == 0 { "kernel_power" } else { "product" }.into(),
                    coeff_re: coeff.re,
                    coeff_im: coeff.im,
                    pole: Some(pole.as_slice().iter().map(|c| Scalar::Complex([c.re, c.im])).collect()),
                    exponent: Some(*exponent),
                    multi_index: None,
                    power: (*power > 0).then_some(*power),
                },
            })
            .collect();
        serde_json::to_string(&FunDoc {
            dim: Some(self.dim()),
            terms,
        })
        .expect("function documents always serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BallPoint;

    #[test]
    fn round_trip() {
        let a = BallPoint::new(&[Complex64::new(0.3, 0.1), Complex64::new(0.0, -0.5)]).unwrap();
        let f = HoloFun::product(&a, 2.5, 2, Complex64::new(1.0, -2.0))
            .unwrap()
            .sum(&HoloFun::monomial(2, Complex64::new(0.5, 0.0), &[1, 2]).unwrap())
            .unwrap();
        let g = HoloFun::from_json(&f.to_json()).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn parses_minimal_documents() {
        let f = HoloFun::from_json(r#"{"terms":[{"kind":"kernel_power","pole":[0.5],"exponent":2}]}"#).unwrap();
        let v = f.evaluate(&BallPoint::from_real(&[0.5]).unwrap());
        assert!((v.re - 1.0 / 0.5625).abs() < 1e-14);
        assert!(HoloFun::from_json(r#"{"terms":[{"kind":"wavelet"}]}"#).is_err());
        assert!(HoloFun::from_json(r#"{"terms":[{"kind":"kernel_power","pole":[1.0],"exponent":2}]}"#).is_err());
        assert!(HoloFun::from_json("not json").is_err());
    }
}

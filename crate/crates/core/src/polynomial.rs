//! Exact-coefficient sparse multivariate polynomials.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multi_index::MultiIndex;

/// Polynomial Σ c_β y^β with rational coefficients. Zero coefficients are
/// never stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsePolynomial {
    dim: usize,
    terms: BTreeMap<MultiIndex, BigRational>,
}

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn falling(b: u32, times: u32) -> i64 {
    (0..times).map(|i| b as i64 - i as i64).product()
}

impl SparsePolynomial {
    pub fn zero(dim: usize) -> Self {
        SparsePolynomial {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: BigRational) -> Self {
        Self::monomial(MultiIndex::zero(dim), c)
    }

    pub fn monomial(beta: MultiIndex, c: BigRational) -> Self {
        let dim = beta.dim();
        let mut p = Self::zero(dim);
        p.add_term(beta, c);
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &BigRational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, beta: &MultiIndex) -> BigRational {
        self.terms
            .get(beta)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.terms.keys().map(|b| b.order()).max()
    }

    fn add_term(&mut self, beta: MultiIndex, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self
            .terms
            .entry(beta.clone())
            .or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&beta);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (b, c) in &other.terms {
            out.add_term(b.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-BigRational::one()))
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        let mut out = Self::zero(self.dim);
        for (b, v) in &self.terms {
            out.add_term(b.clone(), v * c);
        }
        out
    }

    /// ∂^times / ∂y_axis^times.
    pub fn partial(&self, axis: usize, times: u32) -> Self {
        let mut out = Self::zero(self.dim);
        for (b, c) in &self.terms {
            let e = b.components()[axis];
            if e < times {
                continue;
            }
            let mut nb = b.clone();
            nb.0[axis] = e - times;
            out.add_term(
                nb,
                c * BigRational::from_integer(BigInt::from(falling(e, times))),
            );
        }
        out
    }

    pub fn laplacian(&self) -> Self {
        (0..self.dim).fold(Self::zero(self.dim), |acc, i| acc.add(&self.partial(i, 2)))
    }

    /// Δ² applied `times` times.
    pub fn bilaplacian_pow(&self, times: u32) -> Self {
        let mut p = self.clone();
        for _ in 0..2 * times {
            p = p.laplacian();
        }
        p
    }

    /// Euler operator y·∇, which multiplies each monomial by its degree.
    pub fn euler(&self) -> Self {
        let mut out = Self::zero(self.dim);
        for (b, c) in &self.terms {
            out.add_term(
                b.clone(),
                c * BigRational::from_integer(BigInt::from(b.order())),
            );
        }
        out
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(b, c)| {
                let mono: f64 = b
                    .components()
                    .iter()
                    .zip(y)
                    .map(|(&e, &x)| x.powi(e as i32))
                    .product();
                c.to_f64().unwrap_or(f64::NAN) * mono
            })
            .sum()
    }

    /// Values at grid points given as [y1, y2] pairs.
    pub fn eval_points(&self, points: &[[f64; 2]]) -> Vec<f64> {
        let coeffs: Vec<(Vec<i32>, f64)> = self
            .terms
            .iter()
            .map(|(b, c)| {
                (
                    b.components().iter().map(|&e| e as i32).collect(),
                    c.to_f64().unwrap_or(f64::NAN),
                )
            })
            .collect();
        points
            .iter()
            .map(|p| {
                coeffs
                    .iter()
                    .map(|(e, c)| {
                        c * e
                            .iter()
                            .zip(p.iter())
                            .map(|(&k, &x)| x.powi(k))
                            .product::<f64>()
                    })
                    .sum()
            })
            .collect()
    }
}

impl fmt::Display for SparsePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (b, c) in self.terms.iter().rev() {
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            write!(f, "{}", c.abs())?;
            for (i, &e) in b.components().iter().enumerate() {
                if e > 0 {
                    write!(f, "*y{}^{}", i + 1, e)?;
                }
            }
        }
        Ok(())
    }
}

/// Polynomial carried with a symbolic normalizer: value = poly / √(normalizer).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizedPolynomial {
    pub poly: SparsePolynomial,
    pub normalizer_factorial: u128,
}

impl NormalizedPolynomial {
    pub fn scale_f64(&self) -> f64 {
        1.0 / (self.normalizer_factorial as f64).sqrt()
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        self.poly.eval(y) * self.scale_f64()
    }

    pub fn eval_points(&self, points: &[[f64; 2]]) -> Vec<f64> {
        let s = self.scale_f64();
        self.poly
            .eval_points(points)
            .into_iter()
            .map(|v| v * s)
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        let mut terms = Vec::new();
        for (b, c) in self.poly.terms() {
            let num = c
                .numer()
                .to_i64()
                .ok_or_else(|| Error::Serialization("numerator overflows i64".into()))?;
            let den = c
                .denom()
                .to_i64()
                .ok_or_else(|| Error::Serialization("denominator overflows i64".into()))?;
            terms.push(TermDoc {
                beta: b.components().to_vec(),
                num,
                den,
            });
        }
        let doc = PolyDoc {
            dimension: self.poly.dim(),
            normalizer_factorial: self.normalizer_factorial as u64,
            terms,
        };
        serde_json::to_string_pretty(&doc).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: PolyDoc =
            serde_json::from_str(text).map_err(|e| Error::Serialization(e.to_string()))?;
        let mut poly = SparsePolynomial::zero(doc.dimension);
        for t in doc.terms {
            if t.beta.len() != doc.dimension || t.den == 0 {
                return Err(Error::Serialization("malformed term".into()));
            }
            poly = poly.add(&SparsePolynomial::monomial(
                MultiIndex(t.beta),
                rational(t.num, t.den),
            ));
        }
        Ok(NormalizedPolynomial {
            poly,
            normalizer_factorial: doc.normalizer_factorial as u128,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct TermDoc {
    beta: Vec<u32>,
    num: i64,
    den: i64,
}

#[derive(Serialize, Deserialize)]
struct PolyDoc {
    dimension: usize,
    normalizer_factorial: u64,
    terms: Vec<TermDoc>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn y(k: u32) -> SparsePolynomial {
        SparsePolynomial::monomial(MultiIndex(vec![k]), rational(1, 1))
    }

    #[test]
    fn derivatives_of_monomials() {
        let p = y(6);
        assert_eq!(
            p.partial(0, 4),
            SparsePolynomial::monomial(MultiIndex(vec![2]), rational(360, 1))
        );
        assert!(y(3).partial(0, 4).is_zero());
        assert_eq!(y(5).euler(), y(5).scale(&rational(5, 1)));
    }

    #[test]
    fn cancellation_removes_terms() {
        let p = y(2).sub(&y(2));
        assert!(p.is_zero());
        assert_eq!(p.degree(), None);
    }

    #[test]
    fn mixed_bilaplacian_2d() {
        // Δ²(y1² y2²) = 2·∂1²∂2²(y1² y2²) = 8
        let p = SparsePolynomial::monomial(MultiIndex(vec![2, 2]), rational(1, 1));
        assert_eq!(
            p.bilaplacian_pow(1),
            SparsePolynomial::constant(2, rational(8, 1))
        );
    }

    #[test]
    fn json_round_trip() {
        let p = NormalizedPolynomial {
            poly: y(4).add(&SparsePolynomial::constant(1, rational(24, 1))),
            normalizer_factorial: 24,
        };
        let back = NormalizedPolynomial::from_json(&p.to_json().unwrap()).unwrap();
        assert_eq!(p, back);
    }
}

//! Symbolic fields entering the log-weighted integrals: either polynomials
//! (adjoint side) or finite combinations of kernel derivatives (direct side).

use std::collections::BTreeMap;

use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::multi_index::MultiIndex;
use crate::spectral::{adjoint_numerator, eigen_scale};

#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    /// Σ c_β y^β.
    Polynomial(BTreeMap<MultiIndex, f64>),
    /// Σ c_β DᵝF.
    Kernel(BTreeMap<MultiIndex, f64>),
}

fn insert(map: &mut BTreeMap<MultiIndex, f64>, beta: MultiIndex, c: f64) {
    if c == 0.0 {
        return;
    }
    let e = map.entry(beta.clone()).or_insert(0.0);
    *e += c;
    if *e == 0.0 {
        map.remove(&beta);
    }
}

impl Field {
    /// ψ_β = ((−1)^{|β|}/√β!) DᵝF.
    pub fn eigenfunction(beta: &MultiIndex) -> Field {
        let mut m = BTreeMap::new();
        insert(&mut m, beta.clone(), eigen_scale(beta));
        Field::Kernel(m)
    }

    /// ψ*_β as a floating-point polynomial.
    pub fn adjoint(beta: &MultiIndex) -> Field {
        let s = 1.0 / (beta.factorial() as f64).sqrt();
        let mut m = BTreeMap::new();
        for (b, c) in adjoint_numerator(beta).terms() {
            insert(&mut m, b.clone(), s * c.to_f64().unwrap_or(f64::NAN));
        }
        Field::Polynomial(m)
    }

    pub fn constant(dim: usize, c: f64) -> Field {
        let mut m = BTreeMap::new();
        insert(&mut m, MultiIndex::zero(dim), c);
        Field::Polynomial(m)
    }

    fn terms(&self) -> &BTreeMap<MultiIndex, f64> {
        match self {
            Field::Polynomial(m) | Field::Kernel(m) => m,
        }
    }

    pub fn is_kernel(&self) -> bool {
        matches!(self, Field::Kernel(_))
    }

    pub fn is_zero(&self) -> bool {
        self.terms().is_empty()
    }

    pub fn dim(&self) -> Option<usize> {
        self.terms().keys().next().map(|b| b.dim())
    }

    /// Σ cᵢ fᵢ; all parts must be of the same kind.
    pub fn combination(parts: &[(&Field, f64)]) -> Result<Field> {
        let kernel = match parts.first() {
            Some((f, _)) => f.is_kernel(),
            None => return Err(Error::InvalidArgument("empty combination".into())),
        };
        let mut m = BTreeMap::new();
        for (f, c) in parts {
            if f.is_kernel() != kernel {
                return Err(Error::InvalidArgument(
                    "cannot mix polynomial and kernel fields".into(),
                ));
            }
            for (b, v) in f.terms() {
                insert(&mut m, b.clone(), c * v);
            }
        }
        Ok(if kernel {
            Field::Kernel(m)
        } else {
            Field::Polynomial(m)
        })
    }

    /// ∂^γ of the field.
    pub fn derivative(&self, gamma: &MultiIndex) -> Field {
        let mut m = BTreeMap::new();
        match self {
            Field::Kernel(t) => {
                for (b, c) in t {
                    insert(&mut m, b.add(gamma), *c);
                }
                Field::Kernel(m)
            }
            Field::Polynomial(t) => {
                for (b, c) in t {
                    let mut f = *c;
                    let mut nb = b.clone();
                    for (axis, &g) in gamma.components().iter().enumerate() {
                        let e = b.components()[axis];
                        if e < g {
                            f = 0.0;
                            break;
                        }
                        f *= (0..g).map(|i| (e - i) as f64).product::<f64>();
                        nb.0[axis] = e - g;
                    }
                    insert(&mut m, nb, f);
                }
                Field::Polynomial(m)
            }
        }
    }

    pub fn partial(&self, axis: usize, dim: usize) -> Field {
        let mut g = MultiIndex::zero(dim);
        g.0[axis] = 1;
        self.derivative(&g)
    }

    pub fn laplacian(&self, dim: usize) -> Field {
        let parts: Vec<Field> = (0..dim)
            .map(|a| {
                let mut g = MultiIndex::zero(dim);
                g.0[a] = 2;
                self.derivative(&g)
            })
            .collect();
        let refs: Vec<(&Field, f64)> = parts.iter().map(|f| (f, 1.0)).collect();
        Field::combination(&refs).expect("same kind")
    }

    pub fn gradient(&self, dim: usize) -> Vec<Field> {
        (0..dim).map(|a| self.partial(a, dim)).collect()
    }

    /// Polynomial values at [y1, y2] points; None for kernel fields.
    pub fn eval_polynomial(&self, points: &[[f64; 2]]) -> Option<Vec<f64>> {
        match self {
            Field::Kernel(_) => None,
            Field::Polynomial(t) => Some(
                points
                    .iter()
                    .map(|p| {
                        t.iter()
                            .map(|(b, c)| {
                                c * b
                                    .components()
                                    .iter()
                                    .zip(p)
                                    .map(|(&e, &x)| x.powi(e as i32))
                                    .product::<f64>()
                            })
                            .sum()
                    })
                    .collect(),
            ),
        }
    }

    /// Kernel terms as (order, coefficient) pairs, N = 1.
    pub fn kernel_terms_1d(&self) -> Option<Vec<(usize, f64)>> {
        match self {
            Field::Kernel(t) => Some(t.iter().map(|(b, c)| (b.order(), *c)).collect()),
            Field::Polynomial(_) => None,
        }
    }

    pub fn kernel_terms(&self) -> Option<&BTreeMap<MultiIndex, f64>> {
        match self {
            Field::Kernel(t) => Some(t),
            Field::Polynomial(_) => None,
        }
    }
}

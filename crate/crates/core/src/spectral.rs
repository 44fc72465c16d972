//! Eigenfunctions ψ_β = ((−1)^{|β|}/√β!) DᵝF of B = −Δ² + ¼y·∇ + N/4 and the
//! adjoint generalized Hermite polynomials ψ*_β of B* = −Δ² − ¼y·∇.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::kernel::KernelTable;
use crate::multi_index::MultiIndex;
use crate::polynomial::{rational, NormalizedPolynomial, SparsePolynomial};

/// Eigenvalue −|β|/4 as an exact fraction (numerator, denominator).
pub fn eigenvalue(beta: &MultiIndex) -> (i64, i64) {
    (-(beta.order() as i64), 4)
}

/// Direct eigenfunction ψ_β sampled on the table grid.
pub fn eigenfunction(beta: &MultiIndex, table: &KernelTable) -> Result<Vec<f64>> {
    if beta.order() > table.max_order {
        return Err(Error::OrderExceeded {
            requested: beta.order(),
            available: table.max_order,
        });
    }
    let s = eigen_scale(beta);
    Ok(table.slice(beta)?.iter().map(|v| s * v).collect())
}

/// (−1)^{|β|}/√β!.
pub fn eigen_scale(beta: &MultiIndex) -> f64 {
    let sign = if beta.order().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    };
    sign / (beta.factorial() as f64).sqrt()
}

/// Unnormalized adjoint numerator y^β + Σ_{j=1}^{⌊|β|/4⌋} (1/j!) Δ^{2j} y^β.
pub fn adjoint_numerator(beta: &MultiIndex) -> SparsePolynomial {
    let base = SparsePolynomial::monomial(beta.clone(), BigRational::one());
    let mut sum = base.clone();
    let mut jfact = BigInt::one();
    for j in 1..=(beta.order() / 4) {
        jfact *= BigInt::from(j);
        let term = base.bilaplacian_pow(j as u32);
        sum = sum.add(&term.scale(&BigRational::new(BigInt::one(), jfact.clone())));
    }
    sum
}

/// Adjoint eigenfunction ψ*_β with its normalizer √β! kept symbolic.
pub fn adjoint_polynomial(beta: &MultiIndex) -> Result<NormalizedPolynomial> {
    if beta.order() > 12 {
        return Err(Error::OrderExceeded {
            requested: beta.order(),
            available: 12,
        });
    }
    Ok(NormalizedPolynomial {
        poly: adjoint_numerator(beta),
        normalizer_factorial: beta.factorial(),
    })
}

/// B* p = −Δ²p − ¼ y·∇p, exactly.
pub fn apply_b_star(p: &SparsePolynomial) -> SparsePolynomial {
    let bil = p.bilaplacian_pow(1);
    let eul = p.euler().scale(&rational(1, 4));
    bil.add(&eul).scale(&rational(-1, 1))
}

/// B* ψ*_β + (|β|/4) ψ*_β, which vanishes identically for the exact family.
pub fn adjoint_identity_defect(beta: &MultiIndex) -> SparsePolynomial {
    let p = adjoint_numerator(beta);
    apply_b_star(&p).add(&p.scale(&rational(beta.order() as i64, 4)))
}

/// Pair (β, λ, ψ_β, ψ*_β).
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub beta: MultiIndex,
    /// λ = −|β|/4 as (numerator, denominator).
    pub lambda: (i64, i64),
    pub direct: Vec<f64>,
    pub adjoint: NormalizedPolynomial,
}

impl EigenPair {
    pub fn new(beta: &MultiIndex, table: &KernelTable) -> Result<Self> {
        Ok(EigenPair {
            beta: beta.clone(),
            lambda: eigenvalue(beta),
            direct: eigenfunction(beta, table)?,
            adjoint: adjoint_polynomial(beta)?,
        })
    }
}

/// A function on the table grid, either plain samples or a finite
/// combination Σ c_β DᵝF that can be differentiated through the symbol.
#[derive(Debug, Clone, Copy)]
pub enum Sampled<'a> {
    Values(&'a [f64]),
    KernelCombination(&'a [(MultiIndex, f64)]),
}

/// B f = −Δ²f + ¼ y·∇f + (N/4) f on the table grid.
///
/// Kernel combinations are differentiated through the Fourier symbol; plain
/// samples use 4th-order central differences with zero ghost values, which is
/// only allowed when the outer four layers are below the tail tolerance.
pub fn apply_b(f: Sampled<'_>, table: &KernelTable) -> Result<Vec<f64>> {
    let grid = &table.grid;
    let dim = grid.dimension;
    let pts = grid.points();
    match f {
        Sampled::KernelCombination(terms) => {
            let mut out = vec![0.0; grid.len()];
            for (beta, c) in terms {
                if *c == 0.0 {
                    continue;
                }
                let base = table.derivative(beta);
                let bil = bilaplacian_symbol(beta, table);
                for i in 0..out.len() {
                    out[i] += c * (-bil[i] + 0.25 * dim as f64 * base[i]);
                }
                for axis in 0..dim {
                    let d = table.derivative(&beta.add(&MultiIndex::unit(dim, axis)));
                    for ((o, p), di) in out.iter_mut().zip(&pts).zip(d) {
                        *o += c * 0.25 * p[axis] * di;
                    }
                }
            }
            Ok(out)
        }
        Sampled::Values(v) => {
            if v.len() != grid.len() {
                return Err(Error::GridMismatch);
            }
            let edge = grid
                .boundary_indices(4)
                .iter()
                .map(|&i| v[i].abs())
                .fold(0.0, f64::max);
            if edge > table.quad.tail_tol {
                return Err(Error::BoundaryContamination { value: edge });
            }
            Ok(apply_b_fd(v, grid))
        }
    }
}

/// Δ² DᵝF through the symbol: Σ_{i,j} D^{β+2e_i+2e_j} F.
fn bilaplacian_symbol(beta: &MultiIndex, table: &KernelTable) -> Vec<f64> {
    let dim = table.grid.dimension;
    let mut out = vec![0.0; table.grid.len()];
    for i in 0..dim {
        for j in 0..dim {
            let shift = MultiIndex::unit(dim, i)
                .add(&MultiIndex::unit(dim, i))
                .add(&MultiIndex::unit(dim, j))
                .add(&MultiIndex::unit(dim, j));
            let d = table.derivative(&beta.add(&shift));
            for k in 0..out.len() {
                out[k] += d[k];
            }
        }
    }
    out
}

const D1: [f64; 5] = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];
const D2: [f64; 5] = [
    -1.0 / 12.0,
    16.0 / 12.0,
    -30.0 / 12.0,
    16.0 / 12.0,
    -1.0 / 12.0,
];
const D4: [f64; 7] = [-1.0 / 6.0, 2.0, -6.5, 28.0 / 3.0, -6.5, 2.0, -1.0 / 6.0];

fn stencil_axis(
    v: &[f64],
    n: usize,
    dim: usize,
    axis: usize,
    coeffs: &[f64],
    h_pow: f64,
) -> Vec<f64> {
    let half = (coeffs.len() / 2) as i64;
    let mut out = vec![0.0; v.len()];
    let (stride, count) = if dim == 1 {
        (1, n)
    } else if axis == 0 {
        (n, n)
    } else {
        (1, n)
    };
    for idx in 0..v.len() {
        let pos = if dim == 1 {
            idx
        } else if axis == 0 {
            idx / n
        } else {
            idx % n
        } as i64;
        let mut s = 0.0;
        for (k, c) in coeffs.iter().enumerate() {
            let off = k as i64 - half;
            let p = pos + off;
            if p < 0 || p >= count as i64 {
                continue;
            }
            s += c * v[(idx as i64 + off * stride as i64) as usize];
        }
        out[idx] = s / h_pow;
    }
    out
}

fn apply_b_fd(v: &[f64], grid: &Grid) -> Vec<f64> {
    let n = grid.axis_len();
    let dim = grid.dimension;
    let h = grid.h;
    let pts = grid.points();
    let mut out: Vec<f64> = v.iter().map(|x| 0.25 * dim as f64 * x).collect();
    for axis in 0..dim {
        let d4 = stencil_axis(v, n, dim, axis, &D4, h.powi(4));
        let d1 = stencil_axis(v, n, dim, axis, &D1, h);
        for (((o, p), a), b) in out.iter_mut().zip(&pts).zip(&d4).zip(&d1) {
            *o += -a + 0.25 * p[axis] * b;
        }
    }
    if dim == 2 {
        let a = stencil_axis(v, n, dim, 0, &D2, h * h);
        let ab = stencil_axis(&a, n, dim, 1, &D2, h * h);
        for i in 0..v.len() {
            out[i] -= 2.0 * ab[i];
        }
    }
    out
}

/// Weight used in inner products.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Weight {
    None,
    /// ρ = exp(a|y|^{4/3}).
    Rho(f64),
    /// ρ* = exp(−a|y|^{4/3}).
    RhoStar(f64),
}

impl Weight {
    fn at(&self, p: &[f64; 2]) -> f64 {
        let r43 = || (p[0] * p[0] + p[1] * p[1]).sqrt().powf(4.0 / 3.0);
        match self {
            Weight::None => 1.0,
            Weight::Rho(a) => (a * r43()).exp(),
            Weight::RhoStar(a) => (-a * r43()).exp(),
        }
    }
}

/// Second operand of an inner product.
#[derive(Debug, Clone, Copy)]
pub enum Operand<'a> {
    Samples(&'a [f64]),
    Polynomial(&'a NormalizedPolynomial),
}

/// Quadrature of ∫ f g w over the grid.
pub fn inner_product(f: &[f64], g: Operand<'_>, weight: Weight, grid: &Grid) -> Result<f64> {
    if f.len() != grid.len() {
        return Err(Error::GridMismatch);
    }
    let pts = grid.points();
    let gv: Vec<f64> = match g {
        Operand::Samples(s) => {
            if s.len() != grid.len() {
                return Err(Error::GridMismatch);
            }
            s.to_vec()
        }
        Operand::Polynomial(p) => {
            if p.poly.dim() != grid.dimension {
                return Err(Error::GridMismatch);
            }
            p.eval_points(&pts)
        }
    };
    Ok(grid
        .weights()
        .iter()
        .zip(f)
        .zip(&gv)
        .zip(&pts)
        .map(|(((w, a), b), p)| w * a * b * weight.at(p))
        .sum())
}

/// Gram matrix ⟨ψ_β, ψ*_γ⟩ over |β|, |γ| ≤ kmax.
#[derive(Debug, Clone)]
pub struct GramReport {
    pub labels: Vec<MultiIndex>,
    pub matrix: Vec<Vec<f64>>,
    pub max_offdiag: f64,
    pub max_diag_dev: f64,
}

impl GramReport {
    /// ‖G − I‖_max.
    pub fn max_deviation(&self) -> f64 {
        self.max_offdiag.max(self.max_diag_dev)
    }
}

pub fn orthogonality_matrix(kmax: usize, table: &KernelTable) -> Result<GramReport> {
    if kmax > table.max_order {
        return Err(Error::OrderExceeded {
            requested: kmax,
            available: table.max_order,
        });
    }
    let labels = MultiIndex::up_to(table.grid.dimension, kmax);
    let direct: Vec<Vec<f64>> = labels
        .iter()
        .map(|b| eigenfunction(b, table))
        .collect::<Result<_>>()?;
    let adjoint: Vec<NormalizedPolynomial> = labels
        .iter()
        .map(adjoint_polynomial)
        .collect::<Result<_>>()?;
    let mut matrix = vec![vec![0.0; labels.len()]; labels.len()];
    let (mut max_offdiag, mut max_diag_dev) = (0.0f64, 0.0f64);
    for i in 0..labels.len() {
        for j in 0..labels.len() {
            let v = inner_product(
                &direct[i],
                Operand::Polynomial(&adjoint[j]),
                Weight::None,
                &table.grid,
            )?;
            matrix[i][j] = v;
            if i == j {
                max_diag_dev = max_diag_dev.max((v - 1.0).abs());
            } else {
                max_offdiag = max_offdiag.max(v.abs());
            }
        }
    }
    Ok(GramReport {
        labels,
        matrix,
        max_offdiag,
        max_diag_dev,
    })
}

/// sup over the inner 80% of the grid of |Bψ_β + (|β|/4)ψ_β|.
pub fn eigen_residual(beta: &MultiIndex, table: &KernelTable) -> Result<f64> {
    let psi = eigenfunction(beta, table)?;
    let combo = [(beta.clone(), eigen_scale(beta))];
    let bpsi = apply_b(Sampled::KernelCombination(&combo), table)?;
    let k4 = beta.order() as f64 / 4.0;
    Ok(table
        .grid
        .inner_indices(0.8)
        .into_iter()
        .map(|i| (bpsi[i] + k4 * psi[i]).abs())
        .fold(0.0, f64::max))
}

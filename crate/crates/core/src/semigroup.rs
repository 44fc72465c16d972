//! The rescaled linear flow w_τ = Bw, solved by the eigenfunction expansion
//! and by direct convolution with the kernel.
//!
//! Both routes describe w(y, τ) = ∫ F(y − z e^{−τ/4}) u0(z) dz, where u0 is
//! the datum of the unscaled problem at t = 0 and τ = ln t. In particular
//! w(·, 0) = F * u0. [`mode_evolution`] instead starts the flow from a given
//! state at τ = 0 using the dual coefficients ⟨w0, ψ*_β⟩.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::kernel::KernelTable;
use crate::multi_index::MultiIndex;
use crate::spectral::{adjoint_polynomial, eigenfunction, inner_product, Operand, Weight};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Spectral,
    Convolution,
}

#[derive(Debug, Clone)]
pub struct EvolutionState {
    pub grid: Grid,
    pub tau: f64,
    pub values: Vec<f64>,
    pub provenance: Provenance,
    /// Bound on the neglected modes (spectral route only).
    pub truncation_estimate: Option<f64>,
}

impl EvolutionState {
    pub fn mass(&self) -> f64 {
        self.values
            .iter()
            .zip(self.grid.weights())
            .map(|(v, w)| v * w)
            .sum()
    }
}

fn monomial(beta: &MultiIndex, p: &[f64; 2]) -> f64 {
    beta.components()
        .iter()
        .zip(p)
        .map(|(&e, &x)| x.powi(e as i32))
        .product()
}

fn check_tail(u0: &[f64], grid: &Grid, tail_tol: f64) -> Result<()> {
    if u0.len() != grid.len() {
        return Err(Error::GridMismatch);
    }
    let edge = grid
        .boundary_indices(1)
        .iter()
        .map(|&i| u0[i].abs())
        .fold(0.0, f64::max);
    if edge > tail_tol {
        return Err(Error::TailTooFat { value: edge });
    }
    Ok(())
}

/// M_β(u0) = (1/√β!) ∫ z^β u0(z) dz.
pub fn moments(u0: &[f64], beta: &MultiIndex, grid: &Grid, tail_tol: f64) -> Result<f64> {
    check_tail(u0, grid, tail_tol)?;
    let s: f64 = grid
        .points()
        .iter()
        .zip(grid.weights())
        .zip(u0)
        .map(|((p, w), u)| w * u * monomial(beta, p))
        .sum();
    Ok(s / (beta.factorial() as f64).sqrt())
}

/// Truncated expansion Σ_{|β|≤kmax} e^{−|β|τ/4} M_β(u0) ψ_β.
pub fn spectral_solution(
    u0: &[f64],
    tau: f64,
    kmax: usize,
    table: &KernelTable,
) -> Result<EvolutionState> {
    if tau < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "tau = {tau} must be non-negative"
        )));
    }
    if kmax > table.max_order {
        return Err(Error::OrderExceeded {
            requested: kmax,
            available: table.max_order,
        });
    }
    let grid = &table.grid;
    let mut values = vec![0.0; grid.len()];
    let mut moment_sum = 0.0;
    for beta in MultiIndex::up_to(grid.dimension, kmax) {
        let m = moments(u0, &beta, grid, table.quad.tail_tol)?;
        moment_sum += m.abs();
        let c = (-(beta.order() as f64) * tau / 4.0).exp() * m;
        for (v, p) in values.iter_mut().zip(eigenfunction(&beta, table)?) {
            *v += c * p;
        }
    }
    let truncation = (-((kmax + 1) as f64) * tau / 4.0).exp() * moment_sum;
    Ok(EvolutionState {
        grid: grid.clone(),
        tau,
        values,
        provenance: Provenance::Spectral,
        truncation_estimate: Some(truncation),
    })
}

/// Evolution of a state given at τ = 0 through its dual coefficients:
/// Σ_{|β|≤kmax} e^{−|β|τ/4} ⟨w0, ψ*_β⟩ ψ_β.
pub fn mode_evolution(
    w0: &[f64],
    tau: f64,
    kmax: usize,
    table: &KernelTable,
) -> Result<EvolutionState> {
    if kmax > table.max_order {
        return Err(Error::OrderExceeded {
            requested: kmax,
            available: table.max_order,
        });
    }
    let grid = &table.grid;
    let mut values = vec![0.0; grid.len()];
    for beta in MultiIndex::up_to(grid.dimension, kmax) {
        let adj = adjoint_polynomial(&beta)?;
        let c = inner_product(w0, Operand::Polynomial(&adj), Weight::None, grid)?;
        let c = c * (-(beta.order() as f64) * tau / 4.0).exp();
        for (v, p) in values.iter_mut().zip(eigenfunction(&beta, table)?) {
            *v += c * p;
        }
    }
    Ok(EvolutionState {
        grid: grid.clone(),
        tau,
        values,
        provenance: Provenance::Spectral,
        truncation_estimate: None,
    })
}

/// Cubic Hermite interpolation of F from the table's value and gradient slices.
pub struct KernelInterpolator<'a> {
    table: &'a KernelTable,
    f: &'a [f64],
    fx: &'a [f64],
    fy: Option<&'a [f64]>,
    fxy: Option<&'a [f64]>,
    edge: f64,
}

fn hermite_basis(t: f64) -> ([f64; 2], [f64; 2]) {
    let t2 = t * t;
    let t3 = t2 * t;
    (
        [2.0 * t3 - 3.0 * t2 + 1.0, -2.0 * t3 + 3.0 * t2],
        [t3 - 2.0 * t2 + t, t3 - t2],
    )
}

impl<'a> KernelInterpolator<'a> {
    pub fn new(table: &'a KernelTable) -> Result<Self> {
        let dim = table.grid.dimension;
        if table.max_order < dim {
            return Err(Error::OrderExceeded {
                requested: dim,
                available: table.max_order,
            });
        }
        let z = MultiIndex::zero(dim);
        let f = table.slice(&z)?;
        let edge = table
            .grid
            .boundary_indices(1)
            .iter()
            .map(|&i| f[i].abs())
            .fold(0.0, f64::max);
        Ok(if dim == 1 {
            KernelInterpolator {
                table,
                f,
                fx: table.slice(&MultiIndex::unit(1, 0))?,
                fy: None,
                fxy: None,
                edge,
            }
        } else {
            KernelInterpolator {
                table,
                f,
                fx: table.slice(&MultiIndex::unit(2, 0))?,
                fy: Some(table.slice(&MultiIndex::unit(2, 1))?),
                fxy: Some(table.slice(&MultiIndex(vec![1, 1]))?),
                edge,
            }
        })
    }

    fn locate(&self, x: f64) -> Result<Option<(usize, f64)>> {
        let g = &self.table.grid;
        let s = (x + g.radius) / g.h;
        let last = (g.axis_len() - 1) as f64;
        if s < 0.0 || s > last {
            return if self.edge <= self.table.quad.tail_tol {
                Ok(None)
            } else {
                Err(Error::InterpolationOutOfRange { arg: x })
            };
        }
        let i = (s.floor() as usize).min(g.axis_len() - 2);
        Ok(Some((i, s - i as f64)))
    }

    pub fn eval(&self, p: [f64; 2]) -> Result<f64> {
        let h = self.table.grid.h;
        let n = self.table.grid.axis_len();
        let Some((i, t)) = self.locate(p[0])? else {
            return Ok(0.0);
        };
        let (a, b) = hermite_basis(t);
        if self.table.grid.dimension == 1 {
            return Ok(a[0] * self.f[i]
                + a[1] * self.f[i + 1]
                + h * (b[0] * self.fx[i] + b[1] * self.fx[i + 1]));
        }
        let Some((j, s)) = self.locate(p[1])? else {
            return Ok(0.0);
        };
        let (c, d) = hermite_basis(s);
        let (fy, fxy) = (self.fy.expect("2d slices"), self.fxy.expect("2d slices"));
        let mut v = 0.0;
        for (di, (ai, bi)) in [(0usize, (a[0], b[0])), (1, (a[1], b[1]))] {
            for (dj, (cj, dj_)) in [(0usize, (c[0], d[0])), (1, (c[1], d[1]))] {
                let k = (i + di) * n + (j + dj);
                v += ai * cj * self.f[k]
                    + h * (bi * cj * self.fx[k] + ai * dj_ * fy[k])
                    + h * h * bi * dj_ * fxy[k];
            }
        }
        Ok(v)
    }
}

/// Direct quadrature of w(y, τ) = ∫ F(y − z e^{−τ/4}) u0(z) dz at every node.
pub fn convolution_solution(u0: &[f64], tau: f64, table: &KernelTable) -> Result<EvolutionState> {
    if tau < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "tau = {tau} must be non-negative"
        )));
    }
    let grid = &table.grid;
    if u0.len() != grid.len() {
        return Err(Error::GridMismatch);
    }
    let interp = KernelInterpolator::new(table)?;
    let s = (-tau / 4.0).exp();
    let pts = grid.points();
    let umax = u0.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let sources: Vec<([f64; 2], f64)> = pts
        .iter()
        .zip(grid.weights())
        .zip(u0)
        .filter(|(_, u)| u.abs() > 1e-17 * umax)
        .map(|((p, w), u)| ([p[0] * s, p[1] * s], w * u))
        .collect();
    use rayon::prelude::*;
    let values: Vec<f64> = pts
        .par_iter()
        .map(|y| {
            let mut acc = 0.0;
            for (z, wu) in &sources {
                acc += wu * interp.eval([y[0] - z[0], y[1] - z[1]])?;
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    Ok(EvolutionState {
        grid: grid.clone(),
        tau,
        values,
        provenance: Provenance::Convolution,
        truncation_estimate: None,
    })
}

/// Physicists' Hermite function Π_i H_{β_i}(y_i/ε) e^{−(y_i/ε)²}. Its moments
/// of order below |β| vanish.
pub fn hermite_function(beta: &MultiIndex, eps: f64, grid: &Grid) -> Vec<f64> {
    let h = |k: u32, x: f64| -> f64 {
        let (mut p0, mut p1) = (1.0, 2.0 * x);
        if k == 0 {
            return p0;
        }
        for m in 1..k {
            let p2 = 2.0 * x * p1 - 2.0 * m as f64 * p0;
            p0 = p1;
            p1 = p2;
        }
        p1
    };
    grid.points()
        .iter()
        .map(|p| {
            beta.components()
                .iter()
                .zip(p)
                .map(|(&k, &y)| {
                    let x = y / eps;
                    h(k, x) * (-x * x).exp()
                })
                .product()
        })
        .collect()
}

/// Removes the components along ψ_β, |β| < k: g − Σ ⟨g, ψ*_β⟩ ψ_β.
pub fn moment_cancelled(g: &[f64], k: usize, table: &KernelTable) -> Result<Vec<f64>> {
    let grid = &table.grid;
    let mut u = g.to_vec();
    if k == 0 {
        return Ok(u);
    }
    for beta in MultiIndex::up_to(grid.dimension, k - 1) {
        let adj = adjoint_polynomial(&beta)?;
        let c = inner_product(g, Operand::Polynomial(&adj), Weight::None, grid)?;
        for (v, p) in u.iter_mut().zip(eigenfunction(&beta, table)?) {
            *v -= c * p;
        }
    }
    Ok(u)
}

/// ‖f‖ in L²_ρ with ρ = exp(a|y|^{4/3}).
pub fn weighted_norm(f: &[f64], a: f64, grid: &Grid) -> Result<f64> {
    Ok(inner_product(f, Operand::Samples(f), Weight::Rho(a), grid)?.sqrt())
}

/// Fitted exponential rate with its data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateFit {
    pub lambda: f64,
    pub taus: Vec<f64>,
    pub norms: Vec<f64>,
}

/// Default fit window τ ∈ [2, 6].
pub fn default_fit_taus() -> Vec<f64> {
    (0..=8).map(|i| 2.0 + 0.5 * i as f64).collect()
}

/// Least-squares slope of log ‖w(·, τ)‖_{L²_ρ} against τ (convolution route).
pub fn decay_rate_fit(u0: &[f64], taus: &[f64], table: &KernelTable) -> Result<RateFit> {
    let a = table.decay.weight_a();
    let mut used_t = Vec::new();
    let mut used_n = Vec::new();
    for &tau in taus {
        let w = convolution_solution(u0, tau, table)?;
        let nrm = weighted_norm(&w.values, a, &table.grid)?;
        if nrm < 1e-12 {
            break;
        }
        used_t.push(tau);
        used_n.push(nrm);
    }
    if used_t.len() < 3 {
        return Err(Error::InsufficientDecay {
            points: used_t.len(),
        });
    }
    let n = used_t.len() as f64;
    let mt = used_t.iter().sum::<f64>() / n;
    let logs: Vec<f64> = used_n.iter().map(|v| v.ln()).collect();
    let ml = logs.iter().sum::<f64>() / n;
    let sxx: f64 = used_t.iter().map(|t| (t - mt).powi(2)).sum();
    let sxy: f64 = used_t
        .iter()
        .zip(&logs)
        .map(|(t, l)| (t - mt) * (l - ml))
        .sum();
    Ok(RateFit {
        lambda: sxy / sxx,
        taus: used_t,
        norms: used_n,
    })
}

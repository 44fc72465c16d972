//! Rescaled fundamental kernel F of ∂_t + Δ² and its derivatives.
//!
//! F(y) = (2π)^{-N} ∫ exp(i y·ξ − |ξ|⁴) dξ, and DᵝF multiplies the integrand
//! by (iξ)ᵝ. The ξ-integral is folded onto [0, Ξ] per axis, which makes every
//! slice real by construction, and evaluated with composite Gauss-Legendre
//! panels.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};

use base64::Engine;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::multi_index::MultiIndex;
use crate::quad::{composite_gl, QuadConfig};

/// Largest derivative order a table may hold.
pub const MAX_TABLE_ORDER: usize = 12;

/// Fitted constants of the bound |F(y)| ≤ D exp(−d |y|^{4/3}).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    #[serde(rename = "D")]
    pub big_d: f64,
    pub d: f64,
}

impl DecayFit {
    /// Weight parameter a of ρ = exp(a|y|^{4/3}).
    pub fn weight_a(&self) -> f64 {
        0.5 * self.d
    }

    pub fn bound(&self, r: f64) -> f64 {
        self.big_d * (-self.d * r.powf(4.0 / 3.0)).exp()
    }
}

/// Fourier-side quadrature for DᵝF at arbitrary points (1D) or on a tensor
/// grid (2D).
#[derive(Debug, Clone)]
pub struct SymbolQuadrature {
    xi: Vec<f64>,
    /// Gauss weights times exp(−ξ⁴) (1D use).
    w_damped: Vec<f64>,
    w: Vec<f64>,
}

impl SymbolQuadrature {
    pub fn new(quad: &QuadConfig) -> Self {
        let (xi, w) = composite_gl(0.0, quad.xi_max, quad.panels, quad.points);
        let w_damped = xi
            .iter()
            .zip(&w)
            .map(|(x, w)| w * (-x.powi(4)).exp())
            .collect();
        SymbolQuadrature { xi, w_damped, w }
    }

    /// Row of the folded 1D symbol: ξ^b cos(yξ + bπ/2) times `weights`.
    fn row(&self, order: usize, y: f64, weights: &[f64]) -> impl Iterator<Item = f64> + '_ {
        let shift = order as f64 * FRAC_PI_2;
        let b = order as i32;
        self.xi
            .iter()
            .zip(weights.to_vec())
            .map(move |(x, w)| w * x.powi(b) * (y * x + shift).cos())
    }

    /// D^order F at the given points, N = 1.
    pub fn eval_1d(&self, order: usize, ys: &[f64]) -> Vec<f64> {
        ys.iter()
            .map(|&y| self.row(order, y, &self.w_damped).sum::<f64>() / PI)
            .collect()
    }

    fn cos_matrix(&self, order: usize, axis: &[f64]) -> DMatrix<f64> {
        let n = self.xi.len();
        let mut m = DMatrix::zeros(axis.len(), n);
        for (i, &y) in axis.iter().enumerate() {
            for (j, v) in self.row(order, y, &self.w).enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }

    /// DᵝF on the symmetric tensor grid with the given axis, N = 2,
    /// returned row-major with y1 outer.
    pub fn eval_2d(&self, beta: &MultiIndex, axis: &[f64]) -> Vec<f64> {
        self.eval_2d_axes(beta, axis, axis)
    }

    /// DᵝF on the tensor grid `axis1 × axis2`, N = 2, row-major with y1 outer.
    pub fn eval_2d_axes(&self, beta: &MultiIndex, axis1: &[f64], axis2: &[f64]) -> Vec<f64> {
        let n = self.xi.len();
        let damp = DMatrix::from_fn(n, n, |a, b| {
            let r2 = self.xi[a] * self.xi[a] + self.xi[b] * self.xi[b];
            (-r2 * r2).exp()
        });
        let c = beta.components();
        let c2 = self.cos_matrix(c[1] as usize, axis2);
        // g[(y2, ξ1)] = Σ_{ξ2} c2[(y2, ξ2)] damp[(ξ2, ξ1)]
        let g = &c2 * &damp;
        let c1 = self.cos_matrix(c[0] as usize, axis1);
        let out = &c1 * g.transpose();
        let scale = 4.0 / (4.0 * PI * PI);
        let mut v = Vec::with_capacity(axis1.len() * axis2.len());
        for i in 0..axis1.len() {
            for j in 0..axis2.len() {
                v.push(scale * out[(i, j)]);
            }
        }
        v
    }

    /// Several combinations Σ c_b D^b F at arbitrary points, N = 1, sharing
    /// the trigonometric work between them.
    pub fn eval_combinations_1d(&self, combos: &[Vec<(usize, f64)>], ys: &[f64]) -> Vec<Vec<f64>> {
        self.line_1d(combos).eval(ys)
    }

    /// Precomputed evaluator of Σ c_b D^b F on the real line, N = 1.
    pub fn line_1d(&self, combos: &[Vec<(usize, f64)>]) -> KernelLine {
        let coeffs = combos
            .iter()
            .map(|terms| {
                let mut cs = (vec![0.0; self.xi.len()], vec![0.0; self.xi.len()]);
                for &(b, c) in terms {
                    for (j, (x, w)) in self.xi.iter().zip(&self.w_damped).enumerate() {
                        add_shifted(&mut cs, j, b, c * w * x.powi(b as i32) / PI);
                    }
                }
                cs
            })
            .collect();
        KernelLine {
            xi: self.xi.clone(),
            coeffs,
        }
    }

    /// Precomputed evaluator of combinations Σ c_β DᵝF along the line where
    /// coordinate `fixed_axis` equals `value`, N = 2.
    pub fn line_2d(
        &self,
        combos: &[&BTreeMap<MultiIndex, f64>],
        fixed_axis: usize,
        value: f64,
    ) -> KernelLine {
        let var_axis = 1 - fixed_axis;
        let n = self.xi.len();
        let mut partial: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
        for terms in combos {
            for b in terms.keys() {
                let b2 = b.components()[fixed_axis];
                partial.entry(b2).or_insert_with(|| {
                    // Σ_η w η^{b2} cos(value η + b2 π/2) e^{−(ξ²+η²)²} for every ξ
                    let row: Vec<f64> = self.row(b2 as usize, value, &self.w).collect();
                    (0..n)
                        .map(|a| {
                            let xa2 = self.xi[a] * self.xi[a];
                            (0..n)
                                .map(|j| {
                                    let r2 = xa2 + self.xi[j] * self.xi[j];
                                    row[j] * (-r2 * r2).exp()
                                })
                                .sum()
                        })
                        .collect()
                });
            }
        }
        let scale = 4.0 / (4.0 * PI * PI);
        let coeffs = combos
            .iter()
            .map(|terms| {
                let mut cs = (vec![0.0; n], vec![0.0; n]);
                for (b, c) in terms.iter() {
                    let (b1, b2) = (b.components()[var_axis], b.components()[fixed_axis]);
                    let hv = &partial[&b2];
                    for (j, h) in hv.iter().enumerate().take(n) {
                        let v = scale * c * self.w[j] * self.xi[j].powi(b1 as i32) * h;
                        add_shifted(&mut cs, j, b1 as usize, v);
                    }
                }
                cs
            })
            .collect();
        KernelLine {
            xi: self.xi.clone(),
            coeffs,
        }
    }

    /// DᵝF on every node of a symmetric grid.
    pub fn eval_grid(&self, beta: &MultiIndex, grid: &Grid) -> Vec<f64> {
        if grid.dimension == 1 {
            self.eval_1d(beta.order(), &grid.axis())
        } else {
            self.eval_2d(beta, &grid.axis())
        }
    }
}

/// cos(yξ + bπ/2) cycles through cos, −sin, −cos, sin.
fn add_shifted(cs: &mut (Vec<f64>, Vec<f64>), j: usize, b: usize, a: f64) {
    match b % 4 {
        0 => cs.0[j] += a,
        1 => cs.1[j] -= a,
        2 => cs.0[j] -= a,
        _ => cs.1[j] += a,
    }
}

/// Combinations of kernel derivatives reduced to Σ_ξ (a cos yξ + b sin yξ)
/// along a line.
#[derive(Debug, Clone)]
pub struct KernelLine {
    xi: Vec<f64>,
    coeffs: Vec<(Vec<f64>, Vec<f64>)>,
}

impl KernelLine {
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// All combinations at the points ys.
    pub fn eval(&self, ys: &[f64]) -> Vec<Vec<f64>> {
        let mut out = vec![Vec::with_capacity(ys.len()); self.coeffs.len()];
        let mut trig = vec![(0.0, 0.0); self.xi.len()];
        for &y in ys {
            for (t, x) in trig.iter_mut().zip(&self.xi) {
                *t = (y * x).sin_cos();
            }
            for (o, (cc, ss)) in out.iter_mut().zip(&self.coeffs) {
                o.push(
                    trig.iter()
                        .zip(cc.iter().zip(ss))
                        .map(|((s, c), (a, b))| a * c + b * s)
                        .sum(),
                );
            }
        }
        out
    }

    /// Combination `idx` alone at the points ys.
    pub fn eval_one(&self, idx: usize, ys: &[f64]) -> Vec<f64> {
        let (cc, ss) = &self.coeffs[idx];
        ys.iter()
            .map(|&y| {
                self.xi
                    .iter()
                    .zip(cc.iter().zip(ss))
                    .map(|(x, (a, b))| {
                        let (s, c) = (y * x).sin_cos();
                        a * c + b * s
                    })
                    .sum()
            })
            .collect()
    }
}

/// Tabulated DᵝF, |β| ≤ K, on a symmetric grid.
#[derive(Debug, Clone)]
pub struct KernelTable {
    pub grid: Grid,
    pub max_order: usize,
    pub quad: QuadConfig,
    pub slices: BTreeMap<MultiIndex, Vec<f64>>,
    pub decay: DecayFit,
}

/// Evaluates F and its derivatives up to order `max_order` on `grid`.
pub fn eval_kernel(
    dimension: usize,
    grid: &Grid,
    max_order: usize,
    quad: &QuadConfig,
) -> Result<KernelTable> {
    if dimension != 1 && dimension != 2 {
        return Err(Error::UnsupportedDimension(dimension));
    }
    if grid.dimension != dimension || grid.radial {
        return Err(Error::InvalidGrid(
            "kernel tables need a symmetric grid of matching dimension".into(),
        ));
    }
    if max_order > MAX_TABLE_ORDER {
        return Err(Error::OrderExceeded {
            requested: max_order,
            available: MAX_TABLE_ORDER,
        });
    }
    if quad.xi_max.powi(4) < 36.0 {
        return Err(Error::InvalidArgument(format!(
            "xi_max = {} leaves an integrand above e^-36",
            quad.xi_max
        )));
    }
    let sq = SymbolQuadrature::new(quad);
    let betas = MultiIndex::up_to(dimension, max_order);
    let computed: Vec<Vec<f64>> = {
        use rayon::prelude::*;
        betas.par_iter().map(|b| sq.eval_grid(b, grid)).collect()
    };
    let slices: BTreeMap<_, _> = betas.into_iter().zip(computed).collect();
    let f0 = &slices[&MultiIndex::zero(dimension)];
    let (axis_r, axis_f) = positive_axis(grid, f0);

    let boundary_max = grid
        .boundary_indices(1)
        .iter()
        .map(|&i| f0[i].abs())
        .fold(0.0, f64::max);
    let decay = fit_envelope(&axis_r, &axis_f);
    let estimate = match &decay {
        Ok(fit) => boundary_max.max(fit.bound(grid.radius)),
        Err(_) => boundary_max.max(quad.tail_tol * 10.0),
    };
    if estimate > quad.tail_tol {
        return Err(Error::QuadratureDivergence {
            estimate,
            tolerance: quad.tail_tol,
        });
    }
    Ok(KernelTable {
        grid: grid.clone(),
        max_order,
        quad: quad.clone(),
        slices,
        decay: decay?,
    })
}

/// Samples of a slice along the positive y1 axis (y2 = 0 in 2D).
fn positive_axis(grid: &Grid, values: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let ax = grid.axis();
    let m = grid.half_count();
    let n = grid.axis_len();
    let mut r = Vec::new();
    let mut f = Vec::new();
    for (i, &y) in ax.iter().enumerate().skip(m) {
        r.push(y);
        f.push(if grid.dimension == 1 {
            values[i]
        } else {
            values[i * n + m]
        });
    }
    (r, f)
}

/// Relative level below which kernel samples are quadrature noise.
const NOISE_FLOOR: f64 = 1e-13;

/// Least-squares fit of log|f| at the local maxima of |f| against −r^{4/3}.
///
/// Also fits a free exponent p in log|f| ≈ c − d r^p and rejects envelopes
/// whose exponent is far from 4/3. The returned D is the smallest constant
/// bounding every sample above the noise floor, inflated by 5%.
pub fn fit_envelope(r: &[f64], f: &[f64]) -> Result<DecayFit> {
    let fmax = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = NOISE_FLOOR * fmax;
    let mut pts = Vec::new();
    for i in 0..f.len() {
        let a = f[i].abs();
        if a <= floor {
            continue;
        }
        let left = if i == 0 { 0.0 } else { f[i - 1].abs() };
        let right = if i + 1 == f.len() {
            0.0
        } else {
            f[i + 1].abs()
        };
        if a >= left && a > right {
            pts.push((r[i], a.ln()));
        }
    }
    if pts.len() < 4 {
        return Err(Error::FitFailure(format!(
            "{} local maxima in the fit window, 4 required",
            pts.len()
        )));
    }
    let line = |p: f64| -> (f64, f64, f64) {
        let xs: Vec<f64> = pts.iter().map(|(r, _)| -r.powf(p)).collect();
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = pts.iter().map(|(_, l)| l).sum::<f64>() / n;
        let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        let sxy: f64 = xs
            .iter()
            .zip(&pts)
            .map(|(x, (_, l))| (x - mx) * (l - my))
            .sum();
        let slope = sxy / sxx;
        let c = my - slope * mx;
        let res: f64 = xs
            .iter()
            .zip(&pts)
            .map(|(x, (_, l))| (l - c - slope * x).powi(2))
            .sum();
        (slope, c, res)
    };
    let (d, _, _) = line(4.0 / 3.0);
    let mut best = (f64::INFINITY, 0.0);
    for j in 0..=250 {
        let p = 0.5 + j as f64 * 0.01;
        let (_, _, res) = line(p);
        if res < best.0 {
            best = (res, p);
        }
    }
    if (best.1 - 4.0 / 3.0).abs() > 0.3 {
        return Err(Error::DecayExponentMismatch { fitted: best.1 });
    }
    if d.is_nan() || d <= 0.0 {
        return Err(Error::FitFailure(format!("non-positive decay rate {d}")));
    }
    let big_d = decay_constant(r, f, d, floor) * 1.05;
    Ok(DecayFit { big_d, d })
}

/// Smallest D with |f(r)| ≤ D exp(−d r^{4/3}) at samples above `floor`.
pub fn decay_constant(r: &[f64], f: &[f64], d: f64, floor: f64) -> f64 {
    r.iter()
        .zip(f)
        .filter(|(_, v)| v.abs() > floor)
        .map(|(r, v)| v.abs() * (d * r.powf(4.0 / 3.0)).exp())
        .fold(0.0, f64::max)
}

/// Re-fits the decay constants of an existing table.
pub fn check_decay(table: &KernelTable) -> Result<(f64, f64)> {
    let f0 = table.slice(&MultiIndex::zero(table.grid.dimension))?;
    let (r, f) = positive_axis(&table.grid, f0);
    let fit = fit_envelope(&r, &f)?;
    Ok((fit.big_d, fit.d))
}

/// Integral of the β = 0 slice.
pub fn kernel_mass(table: &KernelTable) -> Result<f64> {
    table.integral(&MultiIndex::zero(table.grid.dimension))
}

impl KernelTable {
    pub fn dimension(&self) -> usize {
        self.grid.dimension
    }

    pub fn slice(&self, beta: &MultiIndex) -> Result<&[f64]> {
        self.slices
            .get(beta)
            .map(|v| v.as_slice())
            .ok_or(Error::OrderExceeded {
                requested: beta.order(),
                available: self.max_order,
            })
    }

    /// DᵝF on the table grid, recomputed by quadrature when |β| > K.
    pub fn derivative(&self, beta: &MultiIndex) -> Vec<f64> {
        match self.slices.get(beta) {
            Some(v) => v.clone(),
            None => SymbolQuadrature::new(&self.quad).eval_grid(beta, &self.grid),
        }
    }

    /// Trapezoidal integral of a tabulated slice.
    pub fn integral(&self, beta: &MultiIndex) -> Result<f64> {
        let s = self.slice(beta)?;
        Ok(s.iter().zip(self.grid.weights()).map(|(v, w)| v * w).sum())
    }

    /// |DᵝF| bound constant for the table's decay rate.
    pub fn decay_constant_for(&self, beta: &MultiIndex) -> Result<f64> {
        let s = self.slice(beta)?;
        let pts = self.grid.points();
        let r: Vec<f64> = pts
            .iter()
            .map(|p| (p[0] * p[0] + p[1] * p[1]).sqrt())
            .collect();
        let fmax = s.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok(decay_constant(&r, s, self.decay.d, NOISE_FLOOR * fmax))
    }

    pub fn to_json(&self) -> Result<String> {
        let b64 = base64::engine::general_purpose::STANDARD;
        let orders: Vec<&MultiIndex> = self.slices.keys().collect();
        let values: Vec<String> = self
            .slices
            .values()
            .map(|v| {
                let bytes: Vec<u8> = v.iter().flat_map(|x| x.to_le_bytes()).collect();
                b64.encode(bytes)
            })
            .collect();
        let doc = TableDoc {
            dimension: self.grid.dimension,
            grid: self.grid.clone(),
            orders: orders.into_iter().cloned().collect(),
            values,
            decay: self.decay,
        };
        serde_json::to_string_pretty(&doc).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn from_json(text: &str, quad: &QuadConfig) -> Result<Self> {
        let doc: TableDoc =
            serde_json::from_str(text).map_err(|e| Error::Serialization(e.to_string()))?;
        let b64 = base64::engine::general_purpose::STANDARD;
        let mut slices = BTreeMap::new();
        let mut max_order = 0;
        for (beta, enc) in doc.orders.into_iter().zip(doc.values) {
            let bytes = b64
                .decode(enc)
                .map_err(|e| Error::Serialization(e.to_string()))?;
            if bytes.len() != 8 * doc.grid.len() {
                return Err(Error::Serialization(format!(
                    "slice {beta} has wrong length"
                )));
            }
            let v = bytes
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
                .collect();
            max_order = max_order.max(beta.order());
            slices.insert(beta, v);
        }
        Ok(KernelTable {
            grid: doc.grid,
            max_order,
            quad: quad.clone(),
            slices,
            decay: doc.decay,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct TableDoc {
    dimension: usize,
    grid: Grid,
    orders: Vec<MultiIndex>,
    values: Vec<String>,
    decay: DecayFit,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_double_fails_the_fit() {
        let r: Vec<f64> = (0..400).map(|i| i as f64 * 0.05).collect();
        let plain: Vec<f64> = r.iter().map(|y| (-y * y).exp()).collect();
        assert!(matches!(
            fit_envelope(&r, &plain),
            Err(Error::FitFailure(_))
        ));
        let wavy: Vec<f64> = r.iter().map(|y| (-y * y).exp() * (3.0 * y).cos()).collect();
        assert!(matches!(
            fit_envelope(&r, &wavy),
            Err(Error::DecayExponentMismatch { .. })
        ));
    }

    #[test]
    fn symbol_route_matches_closed_form_gaussian_moment() {
        // Moments of F are derivatives of e^{-ξ⁴} at 0: ∫y²F = 0, ∫y⁴F = −4!.
        let quad = QuadConfig::default();
        let grid = Grid::new(1, 0.05, 48.0).unwrap();
        let sq = SymbolQuadrature::new(&quad);
        let f = sq.eval_1d(0, &grid.axis());
        let w = grid.weights();
        let m2: f64 = grid
            .axis()
            .iter()
            .zip(&f)
            .zip(&w)
            .map(|((y, f), w)| y * y * f * w)
            .sum();
        let m4: f64 = grid
            .axis()
            .iter()
            .zip(&f)
            .zip(&w)
            .map(|((y, f), w)| y.powi(4) * f * w)
            .sum();
        assert!(m2.abs() < 1e-9, "{m2}");
        assert!((m4 + 24.0).abs() < 1e-7, "{m4}");
    }
}

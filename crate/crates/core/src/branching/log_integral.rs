//! Integrals ∫ p ∇·(ln|g| ∇Δt) with a logarithmic weight.
//!
//! Two forms are computed: the direct one, ∫ p (∇g·∇Δt/g + ln|g| Δ²t), read
//! as a principal value across the zeros of g, and the integrated-by-parts
//! one, −∫ ∇p·ln|g| ∇Δt, which only has integrable log singularities.
//! Their difference is the error estimate.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::field::Field;
use crate::error::{Error, Result};
use crate::kernel::{KernelLine, KernelTable, SymbolQuadrature};
use crate::multi_index::MultiIndex;
use crate::quad::{composite_gl, graded_gl, QuadConfig};

/// |g| below which a grid node counts as lying on the nodal set.
pub const NEAR_ZERO: f64 = 1e-12;
/// Largest admissible fraction of near-zero nodes.
pub const THICK_FRACTION: f64 = 1e-3;
/// Nodes with |g| < e^{−1/N_FLOOR}·max|g| are excluded on grids.
pub const N_FLOOR: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogIntegral {
    pub direct: f64,
    pub ibp: f64,
    /// |direct − ibp|.
    pub discrepancy: f64,
    pub near_zero_fraction: f64,
    pub excluded_nodes: usize,
    /// Scaling (1/n)e^{−1/n} at n = N_FLOOR when nodes were excluded.
    pub excluded_bound: f64,
}

impl LogIntegral {
    fn new(direct: f64, ibp: f64, near_zero_fraction: f64, excluded_nodes: usize) -> Self {
        let excluded_bound = if excluded_nodes > 0 {
            (-1.0 / N_FLOOR).exp() / N_FLOOR
        } else {
            0.0
        };
        LogIntegral {
            direct,
            ibp,
            discrepancy: (direct - ibp).abs(),
            near_zero_fraction,
            excluded_nodes,
            excluded_bound,
        }
    }

    /// The integrated-by-parts value, which is the better conditioned one.
    pub fn value(&self) -> f64 {
        self.ibp
    }
}

/// ∫ adjoint · ∇·(ln|combo| ∇Δ target) over ℝᴺ.
///
/// Along each line the integral is evaluated with graded windows centred on
/// every zero of `combo`; in 2D the lines y2 = const are combined by
/// Gauss-Legendre quadrature.
pub fn log_weighted_integral(
    adjoint: &Field,
    combo: &Field,
    target: &Field,
    table: &KernelTable,
) -> Result<LogIntegral> {
    if combo.is_zero() {
        return Err(Error::InvalidArgument(
            "combination vanishes identically".into(),
        ));
    }
    let dim = table.dimension();
    for f in [adjoint, combo, target] {
        if f.dim().is_some_and(|d| d != dim) {
            return Err(Error::GridMismatch);
        }
    }
    if dim == 1 {
        let pts = table.grid.points();
        let frac = nodal_fraction(combo, &values_on_table(combo, table)?, &pts, table);
        if frac > THICK_FRACTION {
            return Err(Error::ThickNodalSet { fraction: frac });
        }
        if target
            .laplacian(1)
            .derivative(&MultiIndex(vec![1]))
            .is_zero()
        {
            return Ok(LogIntegral::new(0.0, 0.0, frac, 0));
        }
        continuous_1d(adjoint, combo, target, table, frac)
    } else {
        let mut grid = StaggeredGrid::new(table);
        let lap = target.laplacian(2);
        if (0..2).all(|a| lap.partial(a, 2).is_zero()) {
            let frac = nodal_fraction(combo, &grid.values(combo), &grid.points.clone(), table);
            if frac > THICK_FRACTION {
                return Err(Error::ThickNodalSet { fraction: frac });
            }
            return Ok(LogIntegral::new(0.0, 0.0, frac, 0));
        }
        let values = grid.values(combo);
        let frac = nodal_fraction(combo, &values, &grid.points.clone(), table);
        if frac > THICK_FRACTION {
            return Err(Error::ThickNodalSet { fraction: frac });
        }
        lines_2d(adjoint, combo, target, table, frac)
    }
}

pub(crate) fn values_on_table(f: &Field, table: &KernelTable) -> Result<Vec<f64>> {
    let pts = table.grid.points();
    match f.eval_polynomial(&pts) {
        Some(v) => Ok(v),
        None => {
            let mut out = vec![0.0; pts.len()];
            for (b, c) in f.kernel_terms().expect("kernel field") {
                for (o, v) in out.iter_mut().zip(table.derivative(b)) {
                    *o += c * v;
                }
            }
            Ok(out)
        }
    }
}

fn near_zero_fraction(values: &[f64]) -> f64 {
    values.iter().filter(|v| v.abs() < NEAR_ZERO).count() as f64 / values.len() as f64
}

/// Fraction of grid nodes where `combo` is near zero, not counting nodes of
/// kernel combinations whose envelope D·e^{−d|y|^{4/3}}·Σ|c| has already
/// dropped below 10⁴·NEAR_ZERO (tail underflow is not a nodal set).
pub(crate) fn nodal_fraction(
    combo: &Field,
    values: &[f64],
    points: &[[f64; 2]],
    table: &KernelTable,
) -> f64 {
    let Some(terms) = combo.kernel_terms() else {
        return near_zero_fraction(values);
    };
    let weight: f64 = terms.values().map(|c| c.abs()).sum();
    let small = values
        .iter()
        .zip(points)
        .filter(|(v, p)| {
            v.abs() < NEAR_ZERO
                && weight * table.decay.bound((p[0] * p[0] + p[1] * p[1]).sqrt()) >= 1e4 * NEAR_ZERO
        })
        .count();
    small as f64 / values.len() as f64
}

/// Evaluates several 1D fields at the points ys.
fn eval_1d(fields: &[&Field], ys: &[f64], sq: &SymbolQuadrature) -> Vec<Vec<f64>> {
    let kernel: Vec<Vec<(usize, f64)>> =
        fields.iter().filter_map(|f| f.kernel_terms_1d()).collect();
    let line = (!kernel.is_empty()).then(|| sq.line_1d(&kernel));
    eval_on_line(fields, line.as_ref(), ys, 0.0)
}

/// Fields on the line y2 = `y2` (ignored in 1D); kernel fields come from
/// `line` in the order they appear.
fn eval_on_line(
    fields: &[&Field],
    line: Option<&KernelLine>,
    ys: &[f64],
    y2: f64,
) -> Vec<Vec<f64>> {
    let mut kvals = line.map(|l| l.eval(ys)).unwrap_or_default().into_iter();
    let pts: Vec<[f64; 2]> = ys.iter().map(|&y| [y, y2]).collect();
    fields
        .iter()
        .map(|f| match f.eval_polynomial(&pts) {
            Some(v) => v,
            None => kvals.next().expect("one kernel value per kernel field"),
        })
        .collect()
}

/// Radius beyond which the kernel envelope has dropped by e^{−decades}.
fn envelope_range(table: &KernelTable, decades: f64) -> f64 {
    let d = table.decay.d.max(1e-3);
    (decades / d).powf(0.75).min(table.grid.radius)
}

/// Resolution of a line integral: gap panels and graded windows around zeros.
#[derive(Debug, Clone, Copy)]
struct LineRule {
    scan_step: f64,
    gap_panel: f64,
    gap_points: usize,
    levels: usize,
    window_points: usize,
}

const RULE_1D: LineRule = LineRule {
    scan_step: 0.01,
    gap_panel: 0.2,
    gap_points: 16,
    levels: 30,
    window_points: 16,
};
const RULE_2D: LineRule = LineRule {
    scan_step: 0.05,
    gap_panel: 1.0,
    gap_points: 10,
    levels: 12,
    window_points: 6,
};

/// Window centres on [−l, l]: sign changes of g and local minima of |g|.
fn line_zeros(at: &dyn Fn(&[f64]) -> Vec<f64>, l: f64, step: f64) -> Vec<f64> {
    let m = (l / step).round() as i64;
    let ys: Vec<f64> = (-m..=m).map(|i| i as f64 * step).collect();
    let v = at(&ys);
    let vmax = v.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let one = |y: f64| at(&[y])[0];
    let mut zeros = Vec::new();
    for i in 0..ys.len() {
        if v[i] == 0.0 {
            zeros.push(ys[i]);
            continue;
        }
        if i + 1 < ys.len() && v[i + 1] != 0.0 && v[i].signum() != v[i + 1].signum() {
            let (mut a, mut b) = (ys[i], ys[i + 1]);
            let sa = v[i].signum();
            for _ in 0..60 {
                let mid = 0.5 * (a + b);
                let fm = one(mid);
                if fm == 0.0 {
                    a = mid;
                    b = mid;
                    break;
                }
                if fm.signum() == sa {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            zeros.push(0.5 * (a + b));
        } else if i > 0
            && i + 1 < ys.len()
            && v[i].abs() <= v[i - 1].abs()
            && v[i].abs() <= v[i + 1].abs()
            && v[i - 1].signum() == v[i + 1].signum()
            && v[i].signum() == v[i + 1].signum()
            && v[i].abs() < 0.5 * vmax
        {
            // local minimum of |g|: a touching zero or a near miss, both of
            // which make ∇g/g sharply peaked
            let (mut a, mut b) = (ys[i - 1], ys[i + 1]);
            let r = 0.5 * (5f64.sqrt() - 1.0);
            for _ in 0..80 {
                let x1 = b - r * (b - a);
                let x2 = a + r * (b - a);
                if one(x1).abs() < one(x2).abs() {
                    b = x2;
                } else {
                    a = x1;
                }
            }
            zeros.push(0.5 * (a + b));
        }
    }
    zeros.sort_by(f64::total_cmp);
    zeros.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    zeros
}

/// Nodes and weights on [−l, l]: plain panels between windows, then
/// symmetric pairs z ± s inside each window. Returns the number of plain nodes.
fn line_nodes(zeros: &[f64], l: f64, rule: &LineRule) -> (Vec<f64>, Vec<f64>, usize) {
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let halfwidths: Vec<f64> = zeros
        .iter()
        .enumerate()
        .map(|(i, &z)| {
            let left = if i == 0 { z + l } else { z - zeros[i - 1] };
            let right = if i + 1 == zeros.len() {
                l - z
            } else {
                zeros[i + 1] - z
            };
            (0.4 * left.min(right)).min(0.5)
        })
        .collect();
    let mut edges = vec![-l];
    for (z, d) in zeros.iter().zip(&halfwidths) {
        edges.push(z - d);
        edges.push(z + d);
    }
    edges.push(l);
    for pair in edges.chunks(2) {
        let (a, b) = (pair[0], pair[1]);
        if b > a {
            let panels = ((b - a) / rule.gap_panel).ceil().max(1.0) as usize;
            let (x, w) = composite_gl(a, b, panels, rule.gap_points);
            nodes.extend(x);
            weights.extend(w);
        }
    }
    let plain = nodes.len();
    let (s_nodes, s_weights) = graded_gl(1.0, rule.levels, rule.window_points);
    for (z, d) in zeros.iter().zip(&halfwidths) {
        for (s, w) in s_nodes.iter().zip(&s_weights) {
            if *d > 0.0 {
                nodes.push(z + d * s);
                nodes.push(z - d * s);
                weights.push(d * w);
                weights.push(d * w);
            }
        }
    }
    (nodes, weights, plain)
}

/// Σ w f over plain nodes, then over symmetric pairs, where the 1/s poles
/// of a principal value cancel within each pair.
fn paired_sum(weights: &[f64], plain: usize, f: impl Fn(usize) -> f64) -> f64 {
    let mut sum: f64 = (0..plain).map(|i| weights[i] * f(i)).sum();
    let mut i = plain;
    while i < weights.len() {
        sum += weights[i] * (f(i) + f(i + 1));
        i += 2;
    }
    sum
}

/// Both forms along a 1D line from columns [p, p', g, g', t''', t''''].
fn line_sums(vals: &[Vec<f64>], weights: &[f64], plain: usize) -> (f64, f64) {
    let direct = paired_sum(weights, plain, |i| {
        let g = vals[2][i];
        vals[0][i] * (vals[3][i] * vals[4][i] / g + g.abs().ln() * vals[5][i])
    });
    let ibp = paired_sum(weights, plain, |i| {
        -vals[1][i] * vals[4][i] * vals[2][i].abs().ln()
    });
    (direct, ibp)
}

/// [p, ∇p, g, ∇g, ∇Δt, Δ²t] as fields.
fn integrand_fields(p: &Field, g: &Field, t: &Field, dim: usize) -> Vec<Field> {
    let lap = t.laplacian(dim);
    let mut out = vec![p.clone()];
    out.extend((0..dim).map(|a| p.partial(a, dim)));
    out.push(g.clone());
    out.extend((0..dim).map(|a| g.partial(a, dim)));
    out.extend((0..dim).map(|a| lap.partial(a, dim)));
    out.push(lap.laplacian(dim));
    out
}

fn continuous_1d(
    p: &Field,
    g: &Field,
    t: &Field,
    table: &KernelTable,
    frac: f64,
) -> Result<LogIntegral> {
    let sq = SymbolQuadrature::new(&table.quad);
    if ![p, g, t].iter().any(|f| f.is_kernel()) {
        return Err(Error::InvalidArgument(
            "integrand does not decay: no kernel factor".into(),
        ));
    }
    let l = envelope_range(table, 25.0);
    let zeros = line_zeros(
        &|ys: &[f64]| eval_1d(&[g], ys, &sq).remove(0),
        l,
        RULE_1D.scan_step,
    );
    let owned = integrand_fields(p, g, t, 1);
    let fields: Vec<&Field> = owned.iter().collect();
    let (nodes, weights, plain) = line_nodes(&zeros, l, &RULE_1D);
    let chunks: Vec<Vec<Vec<f64>>> = nodes
        .par_chunks(512)
        .map(|ys| eval_1d(&fields, ys, &sq))
        .collect();
    let mut vals: Vec<Vec<f64>> = vec![Vec::with_capacity(nodes.len()); fields.len()];
    for c in chunks {
        for (v, part) in vals.iter_mut().zip(c) {
            v.extend(part);
        }
    }
    let (direct, ibp) = line_sums(&vals, &weights, plain);
    Ok(LogIntegral::new(direct, ibp, frac, 0))
}

/// Values of `fields` along the line where coordinate `fixed_axis` is
/// `value`, at positions `ys` on the other coordinate.
fn eval_on_axis_line(
    fields: &[&Field],
    line: Option<&KernelLine>,
    ys: &[f64],
    fixed_axis: usize,
    value: f64,
) -> Vec<Vec<f64>> {
    let mut kvals = line.map(|l| l.eval(ys)).unwrap_or_default().into_iter();
    let pts: Vec<[f64; 2]> = ys
        .iter()
        .map(|&y| {
            if fixed_axis == 1 {
                [y, value]
            } else {
                [value, y]
            }
        })
        .collect();
    fields
        .iter()
        .map(|f| match f.eval_polynomial(&pts) {
            Some(v) => v,
            None => kvals.next().expect("one kernel value per kernel field"),
        })
        .collect()
}

/// Line sums over the lines where coordinate `fixed_axis` is constant,
/// combined by Gauss-Legendre quadrature in that coordinate.
fn sweep_2d<const M: usize>(
    fields: &[Field],
    g: &Field,
    fixed_axis: usize,
    l: f64,
    sq: &SymbolQuadrature,
    sums: impl Fn(&[Vec<f64>], &[f64], usize) -> [f64; M] + Sync,
) -> [f64; M] {
    let refs: Vec<&Field> = fields.iter().collect();
    let kernel_terms: Vec<&BTreeMap<MultiIndex, f64>> =
        refs.iter().filter_map(|f| f.kernel_terms()).collect();
    // 16 lines per unit: line integrals of ln|g| have square-root kinks
    // where lines are tangent to the nodal set
    let (values, w) = composite_gl(-l, l, (4.0 * l).ceil() as usize, 8);
    let per_line: Vec<[f64; M]> = values
        .par_iter()
        .map(|&c| {
            let line = (!kernel_terms.is_empty()).then(|| sq.line_2d(&kernel_terms, fixed_axis, c));
            let g_line = g
                .kernel_terms()
                .map(|terms| sq.line_2d(&[terms], fixed_axis, c));
            let at =
                |ys: &[f64]| eval_on_axis_line(&[g], g_line.as_ref(), ys, fixed_axis, c).remove(0);
            let zeros = line_zeros(&at, l, RULE_2D.scan_step);
            let (nodes, weights, plain) = line_nodes(&zeros, l, &RULE_2D);
            let vals = eval_on_axis_line(&refs, line.as_ref(), &nodes, fixed_axis, c);
            sums(&vals, &weights, plain)
        })
        .collect();
    let mut out = [0.0; M];
    for (line, wi) in per_line.iter().zip(&w) {
        for (o, v) in out.iter_mut().zip(line) {
            *o += wi * v;
        }
    }
    out
}

/// 2D: each directional term ∂ₐg ∂ₐΔt/g of the direct form is a principal
/// value along lines parallel to axis a. The integrated-by-parts form is
/// summed on the lines y2 = const.
fn lines_2d(
    p: &Field,
    g: &Field,
    t: &Field,
    table: &KernelTable,
    frac: f64,
) -> Result<LogIntegral> {
    if ![p, g, t].iter().any(|f| f.is_kernel()) {
        return Err(Error::InvalidArgument(
            "integrand does not decay: no kernel factor".into(),
        ));
    }
    // |y| ≤ 32 is resolved by a coarser symbol rule
    let quad = QuadConfig {
        panels: 12,
        points: 12,
        ..table.quad.clone()
    };
    let sq = SymbolQuadrature::new(&quad);
    let l = envelope_range(table, 18.0);
    let lap = t.laplacian(2);
    let grad_lap = [lap.partial(0, 2), lap.partial(1, 2)];
    // rows: [p, ∂1p, ∂2p, g, ∂1g, ∂1Δt, ∂2Δt, Δ²t]
    let rows = vec![
        p.clone(),
        p.partial(0, 2),
        p.partial(1, 2),
        g.clone(),
        g.partial(0, 2),
        grad_lap[0].clone(),
        grad_lap[1].clone(),
        lap.laplacian(2),
    ];
    let [direct_rows, ibp] = sweep_2d(&rows, g, 1, l, &sq, |v, w, plain| {
        let direct = paired_sum(w, plain, |i| {
            let gv = v[3][i];
            v[0][i] * (v[4][i] * v[5][i] / gv + gv.abs().ln() * v[7][i])
        });
        let ibp = paired_sum(w, plain, |i| {
            -(v[1][i] * v[5][i] + v[2][i] * v[6][i]) * v[3][i].abs().ln()
        });
        [direct, ibp]
    });
    // columns: [p, g, ∂2g, ∂2Δt]
    let cols = vec![p.clone(), g.clone(), g.partial(1, 2), grad_lap[1].clone()];
    let [direct_cols] = sweep_2d(&cols, g, 0, l, &sq, |v, w, plain| {
        [paired_sum(w, plain, |i| {
            v[0][i] * v[2][i] * v[3][i] / v[1][i]
        })]
    });
    Ok(LogIntegral::new(direct_rows + direct_cols, ibp, frac, 0))
}

/// Tensor grid offset from the table grid by irrational fractions of h in
/// each axis, so that nodal lines through the origin miss every node.
#[derive(Debug, Clone)]
pub struct StaggeredGrid {
    pub axis1: Vec<f64>,
    pub axis2: Vec<f64>,
    pub points: Vec<[f64; 2]>,
    pub cell: f64,
    /// Nodes where the kernel envelope is above 10⁴·NEAR_ZERO.
    pub core: Vec<bool>,
    sq: SymbolQuadrature,
    cache: HashMap<MultiIndex, Vec<f64>>,
}

/// Samples of a field and the derivatives the log integrals need.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFields {
    pub value: Vec<f64>,
    pub grad: Vec<Vec<f64>>,
    pub grad_lap: Vec<Vec<f64>>,
    pub bilap: Vec<f64>,
}

impl GridFields {
    /// Σ cᵢ Fᵢ.
    pub fn combine(parts: &[(&GridFields, f64)]) -> GridFields {
        let n = parts[0].0.value.len();
        let lin = |get: &dyn Fn(&GridFields) -> &Vec<f64>| {
            let mut out = vec![0.0; n];
            for (f, c) in parts {
                for (o, v) in out.iter_mut().zip(get(f)) {
                    *o += c * v;
                }
            }
            out
        };
        GridFields {
            value: lin(&|f| &f.value),
            grad: (0..2).map(|a| lin(&|f| &f.grad[a])).collect(),
            grad_lap: (0..2).map(|a| lin(&|f| &f.grad_lap[a])).collect(),
            bilap: lin(&|f| &f.bilap),
        }
    }
}

impl StaggeredGrid {
    /// Offsets h/2 and (3 − √5)h/2.
    pub fn new(table: &KernelTable) -> Self {
        Self::with_offsets(table, 0.5, 0.5 * (3.0 - 5f64.sqrt()))
    }

    /// Offsets o1·h and o2·h from the table grid, 0 < o < 1. Lines through
    /// the origin along the axes and diagonals are missed when o1, o2,
    /// o1 − o2 and o1 + o2 − 1 are all nonzero.
    pub fn with_offsets(table: &KernelTable, o1: f64, o2: f64) -> Self {
        let h = table.grid.h;
        let r = table.grid.radius;
        let n = table.grid.axis_len() - 1;
        let axis1: Vec<f64> = (0..n).map(|i| -r + (i as f64 + o1) * h).collect();
        let axis2: Vec<f64> = (0..n).map(|i| -r + (i as f64 + o2) * h).collect();
        let mut points = Vec::with_capacity(n * n);
        for &a in &axis1 {
            for &b in &axis2 {
                points.push([a, b]);
            }
        }
        let core = points
            .iter()
            .map(|p| table.decay.bound((p[0] * p[0] + p[1] * p[1]).sqrt()) >= 1e4 * NEAR_ZERO)
            .collect();
        StaggeredGrid {
            axis1,
            axis2,
            points,
            cell: h * h,
            core,
            sq: SymbolQuadrature::new(&table.quad),
            cache: HashMap::new(),
        }
    }

    fn kernel_values(&mut self, terms: &std::collections::BTreeMap<MultiIndex, f64>) -> Vec<f64> {
        let missing: Vec<MultiIndex> = terms
            .keys()
            .filter(|b| !self.cache.contains_key(*b))
            .cloned()
            .collect();
        let (sq, a1, a2) = (&self.sq, &self.axis1, &self.axis2);
        let computed: Vec<(MultiIndex, Vec<f64>)> = missing
            .into_par_iter()
            .map(|b| {
                let v = sq.eval_2d_axes(&b, a1, a2);
                (b, v)
            })
            .collect();
        self.cache.extend(computed);
        let mut out = vec![0.0; self.points.len()];
        for (b, c) in terms {
            for (o, v) in out.iter_mut().zip(&self.cache[b]) {
                *o += c * v;
            }
        }
        out
    }

    fn values(&mut self, f: &Field) -> Vec<f64> {
        match f.eval_polynomial(&self.points) {
            Some(v) => v,
            None => self.kernel_values(f.kernel_terms().expect("kernel field")),
        }
    }

    pub fn sample(&mut self, f: &Field) -> Result<GridFields> {
        if f.dim().is_some_and(|d| d != 2) {
            return Err(Error::GridMismatch);
        }
        let lap = f.laplacian(2);
        Ok(GridFields {
            value: self.values(f),
            grad: (0..2).map(|a| self.values(&f.partial(a, 2))).collect(),
            grad_lap: (0..2).map(|a| self.values(&lap.partial(a, 2))).collect(),
            bilap: self.values(&lap.laplacian(2)),
        })
    }
}

/// Log integral on a staggered grid, integrated-by-parts form only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridLogIntegral {
    pub value: f64,
    pub near_zero_fraction: f64,
    pub excluded_nodes: usize,
}

/// −Σ ∇p·ln|g| ∇Δt · h² on the staggered grid, excluding nodes where |g| is
/// below e^{−1/N_FLOOR} relative to its maximum. Checking the grid value
/// against a second grid with other offsets is the caller's error estimate;
/// the principal-value form is not resolved by a tensor grid.
pub fn grid_log_integral(
    p: &GridFields,
    g: &GridFields,
    t: &GridFields,
    grid: &StaggeredGrid,
) -> Result<GridLogIntegral> {
    let small = g
        .value
        .iter()
        .zip(&grid.core)
        .filter(|(v, &c)| c && v.abs() < NEAR_ZERO)
        .count();
    let frac = small as f64 / g.value.len() as f64;
    if frac > THICK_FRACTION {
        return Err(Error::ThickNodalSet { fraction: frac });
    }
    let gmax = g.value.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    if gmax == 0.0 {
        return Err(Error::InvalidArgument(
            "combination vanishes identically".into(),
        ));
    }
    let cut = (-1.0 / N_FLOOR).exp() * gmax;
    let mut sum = 0.0;
    let mut excluded = 0;
    for i in 0..g.value.len() {
        let gv = g.value[i];
        if gv.abs() < cut {
            excluded += 1;
            continue;
        }
        sum -= gv.abs().ln() * (p.grad[0][i] * t.grad_lap[0][i] + p.grad[1][i] * t.grad_lap[1][i]);
    }
    Ok(GridLogIntegral {
        value: sum * grid.cell,
        near_zero_fraction: frac,
        excluded_nodes: excluded,
    })
}

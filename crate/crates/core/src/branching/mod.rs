//! Lyapunov-Schmidt branching systems at n = 0⁺ for the global (t → ∞) and
//! blow-up (t → 0⁻) similarity problems.

pub mod conic;
pub mod field;
pub mod log_integral;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use conic::{
    conic_classify, intersect_conics, linear_fallback, scan_interval, scan_simplex,
    solve_quadratic_branch, Conic, ConicClass, ConicIntersection, ConicKind, ConicPoint,
    QuadraticConditions, QuadraticRoot, QuadraticRoots, ScanSummary,
};
pub use field::Field;
pub use log_integral::{
    grid_log_integral, log_weighted_integral, GridFields, GridLogIntegral, LogIntegral,
    StaggeredGrid,
};

use crate::error::{Error, Result};
use crate::kernel::{KernelTable, SymbolQuadrature};
use crate::multi_index::MultiIndex;
use crate::spectral::eigen_scale;
use log_integral::values_on_table;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BranchKind {
    Global,
    Blowup,
}

impl std::str::FromStr for BranchKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "global" => Ok(BranchKind::Global),
            "blowup" | "blow-up" => Ok(BranchKind::Blowup),
            other => Err(Error::InvalidArgument(format!(
                "unknown branch kind '{other}'"
            ))),
        }
    }
}

/// Smallest admissible |denominator| of the first global coefficient.
pub const DENOM_TOL: f64 = 1e-8;
/// Relative size below which a reduced coefficient counts as zero.
pub const DEGENERACY_TOL: f64 = 1e-6;

/// α_k(n) in exact arithmetic: N/(4+Nn) + k/4 (global) or −k/4 + μ n (blow-up).
pub fn alpha_exact(
    k: usize,
    dim: usize,
    n: &BigRational,
    kind: BranchKind,
    mu1: &BigRational,
) -> BigRational {
    let int = |v: i64| BigRational::from_integer(BigInt::from(v));
    let k4 = BigRational::new(BigInt::from(k as i64), BigInt::from(4));
    match kind {
        BranchKind::Global => {
            let nn = int(dim as i64);
            nn.clone() / (int(4) + nn * n) + k4
        }
        BranchKind::Blowup => -k4 + mu1 * n,
    }
}

pub fn alpha_expansion(k: usize, dim: usize, n: f64, kind: BranchKind, mu1: f64) -> f64 {
    match kind {
        BranchKind::Global => dim as f64 / (4.0 + dim as f64 * n) + k as f64 / 4.0,
        BranchKind::Blowup => -(k as f64) / 4.0 + mu1 * n,
    }
}

/// Exact rational from a decimal-free f64 such as 0.1 (via its shortest
/// decimal representation).
pub fn rational_from_decimal(x: f64) -> Result<BigRational> {
    let s = format!("{x}");
    let neg = s.starts_with('-');
    let body = s.trim_start_matches('-');
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    let digits: BigInt = format!("{int_part}{frac_part}")
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("cannot read {x} as a decimal")))?;
    let den = num_traits::pow(BigInt::from(10), frac_part.len());
    let r = BigRational::new(digits, den);
    Ok(if neg { -r } else { r })
}

/// Eigenvalue (1−αn)(−(k+N)/4) + α of ℒ(α,n) = −Δ² + ((1−αn)/4) y·∇ + α on
/// the rescaled eigenfunction ψ_k((1−αn)^{1/4} y).
pub fn spectrum_shift(k: usize, dim: usize, alpha: f64, n: f64) -> f64 {
    (1.0 - alpha * n) * (-((k + dim) as f64) / 4.0) + alpha
}

/// sup over the inner 80% of the 1D grid of |ℒφ − λφ| for the rescaled
/// eigenfunction φ, together with λ.
pub fn spectrum_shift_residual(
    k: usize,
    alpha: f64,
    n: f64,
    table: &KernelTable,
) -> Result<(f64, f64)> {
    if table.dimension() != 1 {
        return Err(Error::UnsupportedDimension(table.dimension()));
    }
    let sigma = 1.0 - alpha * n;
    if sigma <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "1 − αn = {sigma} must be positive"
        )));
    }
    let lambda = spectrum_shift(k, 1, alpha, n);
    let s = eigen_scale(&MultiIndex(vec![k as u32]));
    let ys = table.grid.axis();
    let zs: Vec<f64> = ys.iter().map(|y| y * sigma.powf(0.25)).collect();
    let sq = SymbolQuadrature::new(&table.quad);
    let v = sq.eval_combinations_1d(&[vec![(k, s)], vec![(k + 1, s)], vec![(k + 4, s)]], &zs);
    let lim = 0.8 * table.grid.radius;
    let mut res = 0.0f64;
    for i in 0..ys.len() {
        if ys[i].abs() > lim {
            continue;
        }
        let l = -sigma * v[2][i] + 0.25 * sigma * zs[i] * v[1][i] + alpha * v[0][i];
        res = res.max((l - lambda * v[0][i]).abs());
    }
    Ok((lambda, res))
}

fn grid_dot(f: &[f64], g: &[f64], table: &KernelTable) -> f64 {
    table
        .grid
        .weights()
        .iter()
        .zip(f)
        .zip(g)
        .map(|((w, a), b)| w * a * b)
        .sum()
}

/// Samples of y·∇f on the table grid.
fn euler_values(f: &Field, table: &KernelTable) -> Result<Vec<f64>> {
    let dim = table.dimension();
    let pts = table.grid.points();
    let mut out = vec![0.0; pts.len()];
    for a in 0..dim {
        let d = values_on_table(&f.partial(a, dim), table)?;
        for (i, p) in pts.iter().enumerate() {
            out[i] += p[a] * d[i];
        }
    }
    Ok(out)
}

/// Eigenspace of order k with the graded basis ψ̂ᵢ = ψ_βᵢ and duals ψ̂ᵢ*.
#[derive(Debug, Clone)]
pub struct Eigenspace {
    pub dim: usize,
    pub k: usize,
    pub betas: Vec<MultiIndex>,
    pub direct: Vec<Field>,
    pub adjoint: Vec<Field>,
}

impl Eigenspace {
    pub fn new(dim: usize, k: usize) -> Self {
        let betas = MultiIndex::of_order(dim, k);
        let direct = betas.iter().map(Field::eigenfunction).collect();
        let adjoint = betas.iter().map(Field::adjoint).collect();
        Eigenspace {
            dim,
            k,
            betas,
            direct,
            adjoint,
        }
    }

    pub fn len(&self) -> usize {
        self.betas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.betas.is_empty()
    }

    /// Σ cᵢ ψ̂ᵢ (direct) or Σ cᵢ ψ̂ᵢ* (adjoint).
    pub fn combination(&self, c: &[f64], adjoint: bool) -> Result<Field> {
        let basis = if adjoint { &self.adjoint } else { &self.direct };
        let parts: Vec<(&Field, f64)> = basis.iter().zip(c.iter().copied()).collect();
        Field::combination(&parts)
    }
}

/// Pairings between an eigenspace and its dual.
///
/// Global: gram = ⟨ψ̂ᵢ*, ψ̂ⱼ⟩, euler = ⟨ψ̂ᵢ*, y·∇ψ̂ⱼ⟩.
/// Blow-up: gram = ⟨ψ̂ᵢ, ψ̂ⱼ*⟩, euler = ⟨ψ̂ᵢ, y·∇ψ̂ⱼ*⟩.
/// `euler_ibp` is the same matrix after moving the derivative across.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairingMatrices {
    pub gram: Vec<Vec<f64>>,
    pub euler: Vec<Vec<f64>>,
    pub euler_ibp: Vec<Vec<f64>>,
}

pub fn pairing_matrices(
    space: &Eigenspace,
    kind: BranchKind,
    table: &KernelTable,
) -> Result<PairingMatrices> {
    if space.dim != table.dimension() {
        return Err(Error::GridMismatch);
    }
    let (left, right) = match kind {
        BranchKind::Global => (&space.adjoint, &space.direct),
        BranchKind::Blowup => (&space.direct, &space.adjoint),
    };
    let lv: Vec<Vec<f64>> = left
        .iter()
        .map(|f| values_on_table(f, table))
        .collect::<Result<_>>()?;
    let rv: Vec<Vec<f64>> = right
        .iter()
        .map(|f| values_on_table(f, table))
        .collect::<Result<_>>()?;
    let re: Vec<Vec<f64>> = right
        .iter()
        .map(|f| euler_values(f, table))
        .collect::<Result<_>>()?;
    let le: Vec<Vec<f64>> = left
        .iter()
        .map(|f| euler_values(f, table))
        .collect::<Result<_>>()?;
    let m = space.len();
    let nd = space.dim as f64;
    let mut gram = vec![vec![0.0; m]; m];
    let mut euler = vec![vec![0.0; m]; m];
    let mut euler_ibp = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in 0..m {
            gram[i][j] = grid_dot(&lv[i], &rv[j], table);
            euler[i][j] = grid_dot(&lv[i], &re[j], table);
            // ⟨u, y·∇v⟩ = −⟨N u + y·∇u, v⟩
            euler_ibp[i][j] =
                -(nd * grid_dot(&lv[i], &rv[j], table) + grid_dot(&le[i], &rv[j], table));
        }
    }
    Ok(PairingMatrices {
        gram,
        euler,
        euler_ibp,
    })
}

/// Solvability data for a simple eigenvalue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimpleReport {
    pub k: usize,
    pub kind: BranchKind,
    pub dim: usize,
    /// γ_{k,1} (global) or μ_{1,k} (blow-up).
    pub coefficient: f64,
    /// The same coefficient from the second quadrature route.
    pub coefficient_check: f64,
    /// Global only: (N+k)/16·⟨ψ*, y·∇ψ⟩ + ⟨ψ*, ∇·(ln|ψ| ∇Δψ)⟩.
    pub denominator: Option<f64>,
    pub eta: Option<f64>,
    pub euler: f64,
    pub euler_ibp: f64,
    pub pairing: f64,
    pub log_term: LogIntegral,
    /// Projection of the right-hand side on the adjoint kernel, second route.
    pub solvability_residual: f64,
}

/// Coefficient fixed by the solvability condition at a simple eigenvalue.
///
/// Global: γ = η⟨ψ*, ψ⟩ / D with D = (N+k)/16·⟨ψ*, y·∇ψ⟩ + ⟨ψ*, ∇·(ln|ψ|∇Δψ)⟩.
/// The projection γD + η⟨ψ*, ψ⟩ of the right-hand side vanishes for −γ, so
/// the residual is evaluated there.
/// Blow-up: μ = [−⟨ψ, ∇·(ln|ψ*|∇Δψ*)⟩ + (α_k/4)⟨ψ, y·∇ψ*⟩] / ⟨ψ*, ψ⟩.
pub fn assemble_simple_solvability(
    k: usize,
    kind: BranchKind,
    eta: f64,
    table: &KernelTable,
) -> Result<SimpleReport> {
    let dim = table.dimension();
    let space = Eigenspace::new(dim, k);
    if space.len() != 1 {
        return Err(Error::InvalidArgument(format!(
            "λ_{k} has multiplicity {} for N = {dim}",
            space.len()
        )));
    }
    let mats = pairing_matrices(&space, kind, table)?;
    let (euler, euler_ibp, pairing) = (mats.euler[0][0], mats.euler_ibp[0][0], mats.gram[0][0]);
    let (psi, psi_star) = (&space.direct[0], &space.adjoint[0]);
    match kind {
        BranchKind::Global => {
            let log_term = log_weighted_integral(psi_star, psi, psi, table)?;
            let s = (dim + k) as f64 / 16.0;
            let denom = s * euler + log_term.ibp;
            let denom_check = s * euler_ibp + log_term.direct;
            if denom.abs() < DENOM_TOL {
                return Err(Error::VanishingDenominator { value: denom });
            }
            let coefficient = eta * pairing / denom;
            let coefficient_check = eta * pairing / denom_check;
            Ok(SimpleReport {
                k,
                kind,
                dim,
                coefficient,
                coefficient_check,
                denominator: Some(denom),
                eta: Some(eta),
                euler,
                euler_ibp,
                pairing,
                solvability_residual: (-coefficient * denom_check + eta * pairing).abs(),
                log_term,
            })
        }
        BranchKind::Blowup => {
            let log_term = log_weighted_integral(psi, psi_star, psi_star, table)?;
            let a4 = -(k as f64) / 16.0;
            let coefficient = (-log_term.ibp + a4 * euler) / pairing;
            let numer_check = -log_term.direct + a4 * euler_ibp;
            Ok(SimpleReport {
                k,
                kind,
                dim,
                coefficient,
                coefficient_check: numer_check / pairing,
                denominator: None,
                eta: None,
                euler,
                euler_ibp,
                pairing,
                solvability_residual: (numer_check - coefficient * pairing).abs(),
                log_term,
            })
        }
    }
}

/// γ_{0,1} for the given η_{0,1}.
pub fn gamma01(eta01: f64, table: &KernelTable) -> Result<SimpleReport> {
    assemble_simple_solvability(0, BranchKind::Global, eta01, table)
}

/// μ_{1,0}, which vanishes because ψ₀* = 1.
pub fn mu10(table: &KernelTable) -> Result<f64> {
    Ok(assemble_simple_solvability(0, BranchKind::Blowup, 0.0, table)?.coefficient)
}

/// ⟨ψ₀*, −(N/16) y·∇ψ₀ − (N²/16) ψ₀⟩ by both routes for y·∇ψ₀.
pub fn transversality_pairing(table: &KernelTable) -> Result<(f64, f64)> {
    let dim = table.dimension();
    let mats = pairing_matrices(&Eigenspace::new(dim, 0), BranchKind::Global, table)?;
    let nn = dim as f64;
    let f = |e: f64| -(nn / 16.0) * e - nn * nn / 16.0 * mats.gram[0][0];
    Ok((f(mats.euler[0][0]), f(mats.euler_ibp[0][0])))
}

/// Affine form κ + Σᵢ aᵢ cᵢ in the free coefficients c₂, c₃, ….
#[derive(Debug, Clone, PartialEq)]
struct Affine(Vec<f64>);

impl Affine {
    /// Row i of M applied to c = e₁ + Σ_{j≥2} cⱼ(eⱼ − e₁).
    fn row(m: &[Vec<f64>], i: usize) -> Affine {
        let mut v = vec![m[i][0]];
        v.extend((1..m.len()).map(|j| m[i][j] - m[i][0]));
        Affine(v)
    }

    fn coordinate(i: usize, m: usize) -> Affine {
        if i == 0 {
            let mut v = vec![-1.0; m];
            v[0] = 1.0;
            Affine(v)
        } else {
            let mut v = vec![0.0; m];
            v[i] = 1.0;
            Affine(v)
        }
    }

    fn scale(&self, s: f64) -> Affine {
        Affine(self.0.iter().map(|v| v * s).collect())
    }

    fn add(&self, o: &Affine) -> Affine {
        Affine(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    fn as_conic(&self) -> Conic {
        let g = |i: usize| self.0.get(i).copied().unwrap_or(0.0);
        Conic {
            d: g(1),
            e: g(2),
            f: g(0),
            ..Default::default()
        }
    }

    fn times(&self, o: &Affine) -> Conic {
        let g = |v: &Affine, i: usize| v.0.get(i).copied().unwrap_or(0.0);
        let (p, q) = (self, o);
        Conic {
            a: g(p, 1) * g(q, 1),
            b: g(p, 1) * g(q, 2) + g(p, 2) * g(q, 1),
            c: g(p, 2) * g(q, 2),
            d: g(p, 0) * g(q, 1) + g(p, 1) * g(q, 0),
            e: g(p, 0) * g(q, 2) + g(p, 2) * g(q, 0),
            f: g(p, 0) * g(q, 0),
        }
    }
}

fn conic_sub(p: &Conic, q: &Conic) -> Conic {
    let (a, b) = (p.coefficients(), q.coefficients());
    Conic::from_coefficients([
        a[0] - b[0],
        a[1] - b[1],
        a[2] - b[2],
        a[3] - b[3],
        a[4] - b[4],
        a[5] - b[5],
    ])
}

/// The perturbation ω sampled at one lattice point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaSample {
    /// Full coefficient vector, Σc = 1.
    pub c: Vec<f64>,
    pub omega: Vec<f64>,
    /// Error estimate of ω: the largest |direct − ibp| among the log
    /// integrals (1D-line route) or the difference between two staggered
    /// grids (grid route).
    pub error: f64,
}

/// Reduced algebraic system for a semisimple eigenvalue (N = 2, k ∈ {1, 2}).
///
/// With c₁ = 1 − Σ_{i≥2} cᵢ, each equation is 𝔉ᵢ(c₂[, c₃]) + ωᵢ = 0, where
/// 𝔉ᵢ collects the polynomial terms and ωᵢ the logarithmic ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConicSystem {
    pub k: usize,
    pub kind: BranchKind,
    pub betas: Vec<MultiIndex>,
    pub unknowns: Vec<String>,
    pub equations: Vec<Conic>,
    /// ‖ωᵢ‖_∞ over the lattice on the unit box.
    pub omega_norms: Vec<f64>,
    /// Largest error estimate of ω over the lattice.
    pub omega_error: f64,
    pub omega_samples: Vec<OmegaSample>,
    /// Lattice samples dropped because the combination had a thick nodal set.
    pub excluded_samples: usize,
    /// Typical coefficient size, the reference for degeneracy tests.
    pub scale: f64,
    pub pairings: PairingMatrices,
    /// Leading coefficient (k = 1) from the integrated-by-parts pairings.
    pub leading_check: Option<f64>,
    /// Global k = 1: γ-quadratic obtained by eliminating c₂ instead.
    pub gamma_quadratic: Option<[f64; 3]>,
    pub eta: f64,
    pub alpha0: f64,
}

impl ConicSystem {
    /// Coefficient vector c with Σc = 1 from the free unknowns.
    pub fn full_coefficients(free: &[f64]) -> Vec<f64> {
        let mut c = vec![1.0 - free.iter().sum::<f64>()];
        c.extend_from_slice(free);
        c
    }

    /// (A, B, C) of the single quadratic A c₂² + B c₂ + C (k = 1).
    pub fn quadratic(&self) -> Option<[f64; 3]> {
        (self.k == 1).then(|| {
            let e = &self.equations[0];
            [e.a, e.d, e.f]
        })
    }

    /// γ_{k,1} (global) or μ_{1,k} (blow-up) at a root c of the unperturbed system.
    pub fn root_parameter(&self, c: &[f64]) -> f64 {
        let mv = |m: &[Vec<f64>], i: usize| m[i].iter().zip(c).map(|(a, b)| a * b).sum::<f64>();
        match self.kind {
            BranchKind::Global => {
                let s = (2 + self.k) as f64 / 16.0;
                -self.eta * mv(&self.pairings.gram, 0) / (s * mv(&self.pairings.euler, 0))
            }
            BranchKind::Blowup => {
                let a4 = self.alpha0 / 4.0;
                (0..c.len()).map(|i| a4 * mv(&self.pairings.euler, i)).sum()
            }
        }
    }
}

fn affine_rows(m: &[Vec<f64>], s: f64) -> Vec<Affine> {
    (0..m.len()).map(|i| Affine::row(m, i).scale(s)).collect()
}

fn box_lattice(k: usize) -> Vec<Vec<f64>> {
    match k {
        1 => (0..=20).map(|i| vec![i as f64 / 20.0]).collect(),
        _ => (0..=10)
            .flat_map(|i| (0..=10).map(move |j| vec![i as f64 / 10.0, j as f64 / 10.0]))
            .collect(),
    }
}

/// Assembles the reduced system for k ∈ {1, 2}, N = 2.
pub fn assemble_semisimple_system(
    k: usize,
    kind: BranchKind,
    eta: f64,
    table: &KernelTable,
) -> Result<ConicSystem> {
    if table.dimension() != 2 {
        return Err(Error::UnsupportedDimension(table.dimension()));
    }
    if k != 1 && k != 2 {
        return Err(Error::InvalidArgument(format!(
            "semisimple systems are assembled for k = 1, 2 (got {k})"
        )));
    }
    let space = Eigenspace::new(2, k);
    let m = space.len();
    let pairings = pairing_matrices(&space, kind, table)?;
    let coord: Vec<Affine> = (0..m).map(|i| Affine::coordinate(i, m)).collect();
    let (equations, scale, leading_check, gamma_quadratic, alpha0);
    match kind {
        BranchKind::Blowup => {
            alpha0 = -(k as f64) / 4.0;
            let a4 = alpha0 / 4.0;
            let rows = affine_rows(&pairings.euler, a4);
            let rows_ibp = affine_rows(&pairings.euler_ibp, a4);
            let build = |rows: &[Affine]| -> Vec<Conic> {
                let sum = rows
                    .iter()
                    .skip(1)
                    .fold(rows[0].clone(), |acc, r| acc.add(r));
                (1..m)
                    .map(|i| conic_sub(&rows[i].as_conic(), &coord[i].times(&sum)))
                    .collect()
            };
            equations = build(&rows);
            leading_check = (k == 1).then(|| build(&rows_ibp)[0].a);
            scale = a4.abs() * max_abs(&pairings.euler);
            gamma_quadratic = None;
        }
        BranchKind::Global => {
            alpha0 = (2 + k) as f64 / 4.0;
            let s = (2 + k) as f64 / 16.0;
            let a_rows = affine_rows(&pairings.euler, s);
            let a_rows_ibp = affine_rows(&pairings.euler_ibp, s);
            let b_rows = affine_rows(&pairings.gram, eta);
            let build = |a: &[Affine]| -> Vec<Conic> {
                (1..m)
                    .map(|i| conic_sub(&a[0].times(&b_rows[i]), &a[i].times(&b_rows[0])))
                    .collect()
            };
            equations = build(&a_rows);
            leading_check = (k == 1).then(|| build(&a_rows_ibp)[0].a);
            scale = s * max_abs(&pairings.euler) * eta.abs() * max_abs(&pairings.gram);
            gamma_quadratic = (k == 1).then(|| {
                let (a, b) = (&a_rows, &affine_rows(&pairings.gram, 1.0));
                let (a10, a11, a20, a21) = (a[0].0[0], a[0].0[1], a[1].0[0], a[1].0[1]);
                let (b10, b11, b20, b21) = (b[0].0[0], b[0].0[1], b[1].0[0], b[1].0[1]);
                [
                    a11 * a20 - a21 * a10,
                    eta * (a11 * b20 + b11 * a20 - a21 * b10 - b21 * a10),
                    eta * eta * (b11 * b20 - b21 * b10),
                ]
            });
        }
    }

    let (omega_samples, excluded_samples) = sample_omega(&space, kind, eta, &pairings, table)?;
    let mut omega_norms = vec![0.0f64; m - 1];
    for s in &omega_samples {
        for (n, w) in omega_norms.iter_mut().zip(&s.omega) {
            *n = n.max(w.abs());
        }
    }
    let omega_error = omega_samples.iter().fold(0.0f64, |a, s| a.max(s.error));
    let unknowns = (2..=m).map(|i| format!("c{i}")).collect();
    Ok(ConicSystem {
        k,
        kind,
        betas: space.betas.clone(),
        unknowns,
        equations,
        omega_norms,
        omega_error,
        omega_samples,
        excluded_samples,
        scale,
        pairings,
        leading_check,
        gamma_quadratic,
        eta,
        alpha0,
    })
}

fn max_abs(m: &[Vec<f64>]) -> f64 {
    m.iter().flatten().fold(0.0f64, |a, b| a.max(b.abs()))
}

fn sample_omega(
    space: &Eigenspace,
    kind: BranchKind,
    eta: f64,
    pairings: &PairingMatrices,
    table: &KernelTable,
) -> Result<(Vec<OmegaSample>, usize)> {
    let m = space.len();
    let lattice = box_lattice(space.k);
    let results: Vec<Result<Option<OmegaSample>>> = match kind {
        BranchKind::Blowup => lattice
            .par_iter()
            .map(|free| {
                let c = ConicSystem::full_coefficients(free);
                let psi_star = space.combination(&c, true)?;
                let mut logs = Vec::with_capacity(m);
                for i in 0..m {
                    match log_weighted_integral(&space.direct[i], &psi_star, &psi_star, table) {
                        Ok(l) => logs.push(l),
                        Err(Error::ThickNodalSet { .. }) => return Ok(None),
                        Err(e) => return Err(e),
                    }
                }
                let l: Vec<f64> = logs.iter().map(|x| -x.ibp).collect();
                let total: f64 = l.iter().sum();
                let omega = (1..m).map(|i| l[i] - c[i] * total).collect();
                let error = logs.iter().fold(0.0f64, |a, x| a.max(x.discrepancy));
                Ok(Some(OmegaSample { c, omega, error }))
            })
            .collect(),
        BranchKind::Global => {
            let grids = [
                StaggeredGrid::new(table),
                StaggeredGrid::with_offsets(table, 0.2, 0.65),
            ];
            let mut sampled = Vec::new();
            for mut grid in grids {
                let direct: Vec<GridFields> = space
                    .direct
                    .iter()
                    .map(|f| grid.sample(f))
                    .collect::<Result<_>>()?;
                let adjoint: Vec<GridFields> = space
                    .adjoint
                    .iter()
                    .map(|f| grid.sample(f))
                    .collect::<Result<_>>()?;
                sampled.push((grid, direct, adjoint));
            }
            let gram_c = |c: &[f64]| -> Vec<f64> {
                (0..m)
                    .map(|i| {
                        eta * pairings.gram[i]
                            .iter()
                            .zip(c)
                            .map(|(g, cj)| g * cj)
                            .sum::<f64>()
                    })
                    .collect()
            };
            lattice
                .par_iter()
                .map(|free| {
                    let c = ConicSystem::full_coefficients(free);
                    let b = gram_c(&c);
                    let mut omegas = Vec::with_capacity(2);
                    for (grid, direct, adjoint) in &sampled {
                        let parts: Vec<(&GridFields, f64)> =
                            direct.iter().zip(c.iter().copied()).collect();
                        let psi = GridFields::combine(&parts);
                        let mut w = Vec::with_capacity(m);
                        for p in adjoint {
                            match grid_log_integral(p, &psi, &psi, grid) {
                                Ok(l) => w.push(l.value),
                                Err(Error::ThickNodalSet { .. }) => return Ok(None),
                                Err(e) => return Err(e),
                            }
                        }
                        omegas.push(
                            (1..m)
                                .map(|i| w[0] * b[i] - w[i] * b[0])
                                .collect::<Vec<f64>>(),
                        );
                    }
                    let error = omegas[0]
                        .iter()
                        .zip(&omegas[1])
                        .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
                    Ok(Some(OmegaSample {
                        c,
                        omega: omegas.swap_remove(0),
                        error,
                    }))
                })
                .collect()
        }
    };
    let mut samples = Vec::new();
    let mut excluded = 0;
    for r in results {
        match r? {
            Some(s) => samples.push(s),
            None => excluded += 1,
        }
    }
    Ok((samples, excluded))
}

/// Outcome of solving a reduced system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SystemSolution {
    Quadratic {
        roots: QuadraticRoots,
    },
    Conics {
        classes: Vec<ConicClass>,
        intersection: ConicIntersection,
    },
    Continuum {
        reason: String,
    },
    Degenerate {
        reason: String,
        fallback: Option<QuadraticRoots>,
    },
}

impl SystemSolution {
    /// Number of admissible roots; None for a continuum.
    pub fn count(&self) -> Option<usize> {
        match self {
            SystemSolution::Quadratic { roots } => Some(roots.count()),
            SystemSolution::Conics { intersection, .. } => Some(intersection.in_simplex().len()),
            SystemSolution::Continuum { .. } => None,
            SystemSolution::Degenerate { fallback, .. } => fallback.as_ref().map(|r| r.count()),
        }
    }
}

/// Roots of the unperturbed reduced system with degeneracy detection
/// relative to the system scale.
pub fn solve_system(sys: &ConicSystem) -> Result<SystemSolution> {
    let small = DEGENERACY_TOL * sys.scale;
    if let Some(q) = sys.quadratic() {
        let omega = sys.omega_norms[0];
        return match solve_quadratic_branch(q, omega, sys.omega_error, sys.scale, DEGENERACY_TOL) {
            Ok(roots) => Ok(SystemSolution::Quadratic { roots }),
            Err(Error::ContinuumDetected(reason)) => Ok(SystemSolution::Continuum { reason }),
            Err(Error::DegenerateQuadratic { a }) => Ok(SystemSolution::Degenerate {
                reason: format!("leading coefficient {a:.3e} below {small:.1e}"),
                fallback: linear_fallback(q, omega).ok(),
            }),
            Err(e) => Err(e),
        };
    }
    if sys.equations.iter().any(|e| e.norm() <= small) {
        let vanished: Vec<String> = sys
            .equations
            .iter()
            .enumerate()
            .filter(|(_, e)| e.norm() <= small)
            .map(|(i, e)| format!("F{} (max coefficient {:.2e})", i + 1, e.norm()))
            .collect();
        let vanished = vanished.join(", ");
        if sys
            .omega_norms
            .iter()
            .all(|&w| w <= small + sys.omega_error)
        {
            return Ok(SystemSolution::Continuum {
                reason: format!(
                    "vanishing conics: {vanished}; ω within its error estimate {:.1e}",
                    sys.omega_error
                ),
            });
        }
        return Ok(SystemSolution::Degenerate {
            reason: format!(
                "vanishing conics: {vanished}; the system reduces to ω = 0 with ‖ω‖ = {:?}",
                sys.omega_norms
            ),
            fallback: None,
        });
    }
    let classes = sys
        .equations
        .iter()
        .map(|e| conic_classify(e, DEGENERACY_TOL))
        .collect();
    match intersect_conics(&sys.equations[0], &sys.equations[1]) {
        Ok(intersection) => Ok(SystemSolution::Conics {
            classes,
            intersection,
        }),
        Err(Error::ContinuumDetected(reason)) => Ok(SystemSolution::Continuum { reason }),
        Err(e) => Err(e),
    }
}

/// Dense-scan cross-check of the unperturbed system: sign changes over
/// [0, 1] (k = 1, 10⁴ points) or over the simplex (k = 2).
pub fn scan_system(sys: &ConicSystem) -> ScanSummary {
    let tol = DEGENERACY_TOL * sys.scale;
    if sys.k == 1 {
        let e = sys.equations[0];
        scan_interval(|x| e.eval(x, 0.0), 10_000, tol)
    } else {
        let (e1, e2) = (sys.equations[0], sys.equations[1]);
        scan_simplex(|x, y| e1.eval(x, y), |x, y| e2.eval(x, y), 201, tol)
    }
}

/// Branch data at one eigenvalue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchCoefficients {
    pub k: usize,
    pub kind: BranchKind,
    pub dim: usize,
    /// γ_{k,1} (global) or μ_{1,k} (blow-up).
    pub first_order: f64,
    pub eta1: Option<f64>,
    /// Eigenspace coefficients with Σc = 1.
    pub c: Vec<f64>,
}

impl BranchCoefficients {
    pub fn alpha_of_n(&self, n: f64) -> f64 {
        alpha_expansion(self.k, self.dim, n, self.kind, self.first_order)
    }
}

/// Exact α_k(0) for k ≤ kmax, as fractions.
pub fn alpha_zero_table(kmax: usize, dim: usize, kind: BranchKind) -> Vec<BigRational> {
    (0..=kmax)
        .map(|k| alpha_exact(k, dim, &BigRational::zero(), kind, &BigRational::one()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_examples() {
        let one = BigRational::one();
        let r = |a: i64, b: i64| BigRational::new(BigInt::from(a), BigInt::from(b));
        assert_eq!(
            alpha_exact(0, 1, &one, BranchKind::Global, &r(0, 1)),
            r(1, 5)
        );
        assert_eq!(
            alpha_exact(2, 2, &r(0, 1), BranchKind::Global, &r(0, 1)),
            r(1, 1)
        );
        assert_eq!(
            alpha_exact(0, 1, &r(3, 10), BranchKind::Blowup, &r(0, 1)),
            r(0, 1)
        );
        assert_eq!(rational_from_decimal(0.1).unwrap(), r(1, 10));
        assert_eq!(rational_from_decimal(-2.25).unwrap(), r(-9, 4));
    }

    #[test]
    fn affine_products() {
        // c₁ = 1 − c₂ and c₂: c₁·c₂ = c₂ − c₂²
        let p = Affine::coordinate(0, 2).times(&Affine::coordinate(1, 2));
        assert_eq!((p.a, p.d, p.f), (-1.0, 1.0, 0.0));
    }
}

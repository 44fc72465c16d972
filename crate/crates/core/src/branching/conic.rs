//! Quadratic forms in the eigenspace coefficients: single quadratics with
//! root certificates, conic classification and conic-conic intersection.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// a x² + b xy + c y² + d x + e y + f.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Conic {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
}

impl Conic {
    /// One-variable quadratic A x² + B x + C.
    pub fn quadratic(a: f64, b: f64, c: f64) -> Conic {
        Conic {
            a,
            d: b,
            f: c,
            ..Default::default()
        }
    }

    pub fn coefficients(&self) -> [f64; 6] {
        [self.a, self.b, self.c, self.d, self.e, self.f]
    }

    pub fn from_coefficients(k: [f64; 6]) -> Conic {
        Conic {
            a: k[0],
            b: k[1],
            c: k[2],
            d: k[3],
            e: k[4],
            f: k[5],
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.a * x * x + self.b * x * y + self.c * y * y + self.d * x + self.e * y + self.f
    }

    fn grad(&self, x: f64, y: f64) -> [f64; 2] {
        [
            2.0 * self.a * x + self.b * y + self.d,
            self.b * x + 2.0 * self.c * y + self.e,
        ]
    }

    pub fn norm(&self) -> f64 {
        self.coefficients()
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, s: f64) -> Conic {
        Conic::from_coefficients(self.coefficients().map(|v| v * s))
    }

    pub fn discriminant(&self) -> f64 {
        self.b * self.b - 4.0 * self.a * self.c
    }

    /// Determinant of the symmetric 3×3 matrix of the conic.
    pub fn determinant(&self) -> f64 {
        let m = nalgebra::Matrix3::new(
            self.a,
            self.b / 2.0,
            self.d / 2.0,
            self.b / 2.0,
            self.c,
            self.e / 2.0,
            self.d / 2.0,
            self.e / 2.0,
            self.f,
        );
        m.determinant()
    }

    /// Coefficients after substituting (x, y) = R(θ)(x', y').
    fn rotated(&self, theta: f64) -> Conic {
        let (s, c) = theta.sin_cos();
        let q = nalgebra::Matrix2::new(self.a, self.b / 2.0, self.b / 2.0, self.c);
        let r = nalgebra::Matrix2::new(c, -s, s, c);
        let qr = r.transpose() * q * r;
        let l = nalgebra::RowVector2::new(self.d, self.e) * r;
        Conic {
            a: qr[(0, 0)],
            b: 2.0 * qr[(0, 1)],
            c: qr[(1, 1)],
            d: l[0],
            e: l[1],
            f: self.f,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConicKind {
    Ellipse {
        circle: bool,
    },
    Parabola,
    Hyperbola {
        rectangular: bool,
    },
    /// Vanishing quadratic part: the curve is at most a line.
    DegenerateLine,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConicClass {
    pub kind: ConicKind,
    pub discriminant: f64,
    /// The 3×3 determinant vanishes: line pair, point or empty set.
    pub degenerate: bool,
}

/// Classification by the sign of B² − 4AC, relative tolerance `tol`.
pub fn conic_classify(p: &Conic, tol: f64) -> ConicClass {
    let qscale = p.a.abs().max(p.b.abs()).max(p.c.abs());
    let disc = p.discriminant();
    let scale = p.norm().max(f64::MIN_POSITIVE);
    let degenerate = p.determinant().abs() <= tol * scale.powi(3);
    if qscale <= tol * scale {
        return ConicClass {
            kind: ConicKind::DegenerateLine,
            discriminant: disc,
            degenerate,
        };
    }
    let dtol = tol * qscale * qscale;
    let kind = if disc < -dtol {
        ConicKind::Ellipse {
            circle: (p.a - p.c).abs() <= tol * qscale && p.b.abs() <= tol * qscale,
        }
    } else if disc > dtol {
        ConicKind::Hyperbola {
            rectangular: (p.a + p.c).abs() <= tol * qscale,
        }
    } else {
        ConicKind::Parabola
    };
    ConicClass {
        kind,
        discriminant: disc,
        degenerate,
    }
}

/// Coefficient lists are in increasing powers.
fn pmul(p: &[f64], q: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; p.len() + q.len() - 1];
    for (i, a) in p.iter().enumerate() {
        for (j, b) in q.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

fn padd(p: &[f64], q: &[f64], s: f64) -> Vec<f64> {
    let n = p.len().max(q.len());
    (0..n)
        .map(|i| p.get(i).copied().unwrap_or(0.0) + s * q.get(i).copied().unwrap_or(0.0))
        .collect()
}

fn peval(p: &[f64], x: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

fn pderiv(p: &[f64]) -> Vec<f64> {
    if p.len() <= 1 {
        return vec![0.0];
    }
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| i as f64 * c)
        .collect()
}

/// Real roots of a polynomial via companion-matrix eigenvalues, Newton-polished.
pub fn real_roots(p: &[f64]) -> Vec<f64> {
    let scale = p.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Vec::new();
    }
    let mut deg = p.len() - 1;
    while deg > 0 && p[deg].abs() <= 1e-13 * scale {
        deg -= 1;
    }
    if deg == 0 {
        return Vec::new();
    }
    let lead = p[deg];
    let comp = DMatrix::from_fn(deg, deg, |i, j| {
        if i == 0 {
            -p[deg - 1 - j] / lead
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    let dp = pderiv(&p[..=deg]);
    let mut roots: Vec<f64> = comp
        .complex_eigenvalues()
        .iter()
        .filter(|z| z.im.abs() <= 1e-7 * (1.0 + z.re.abs()))
        .map(|z| {
            let mut x = z.re;
            for _ in 0..8 {
                let d = peval(&dp, x);
                if d == 0.0 {
                    break;
                }
                let step = peval(&p[..=deg], x) / d;
                if !step.is_finite() || step.abs() > 1e-3 * (1.0 + x.abs()) {
                    break;
                }
                x -= step;
            }
            x
        })
        .collect();
    roots.sort_by(|a, b| a.total_cmp(b));
    roots
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConicPoint {
    pub x: f64,
    pub y: f64,
    /// 1/|det J| for the unit-normalized conics at the point.
    pub condition: f64,
    /// Half-width of the enclosure box around (x, y).
    pub radius: f64,
    pub in_simplex: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConicIntersection {
    pub points: Vec<ConicPoint>,
    pub max_condition: f64,
}

pub const CONDITION_LIMIT: f64 = 1e8;

impl ConicIntersection {
    pub fn in_simplex(&self) -> Vec<ConicPoint> {
        self.points
            .iter()
            .copied()
            .filter(|p| p.in_simplex)
            .collect()
    }

    /// Fails when any root is worse conditioned than CONDITION_LIMIT.
    pub fn strict(self) -> Result<Self> {
        if self.max_condition > CONDITION_LIMIT {
            return Err(Error::IllConditionedResultant {
                condition: self.max_condition,
            });
        }
        Ok(self)
    }
}

/// Simplex {x ≥ 0, y ≥ 0, x + y ≤ 1} with slack `tol`.
pub fn in_simplex(x: f64, y: f64, tol: f64) -> bool {
    x >= -tol && y >= -tol && x + y <= 1.0 + tol
}

/// All real intersections of two conics by eliminating y with the
/// Sylvester resultant (degree ≤ 4 in x) and back-substituting.
pub fn intersect_conics(p: &Conic, q: &Conic) -> Result<ConicIntersection> {
    let (np, nq) = (p.norm(), q.norm());
    if np == 0.0 || nq == 0.0 {
        return Err(Error::ContinuumDetected(
            "a conic vanishes identically".into(),
        ));
    }
    let p = p.scaled(1.0 / np);
    let q = q.scaled(1.0 / nq);
    let (kp, kq) = (p.coefficients(), q.coefficients());
    let dot = |u: &[f64; 6], v: &[f64; 6]| u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
    let lambda = dot(&kp, &kq) / dot(&kq, &kq);
    let resid = kp
        .iter()
        .zip(&kq)
        .fold(0.0f64, |m, (a, b)| m.max((a - lambda * b).abs()));
    if resid < 1e-10 {
        return Err(Error::ContinuumDetected("the two conics coincide".into()));
    }
    // rotate so that both y² coefficients are comfortably nonzero
    let theta = [0.0, 0.37, 0.91, 1.43, 2.11, 2.72]
        .into_iter()
        .max_by(|a, b| {
            let m = |t: f64| p.rotated(t).c.abs().min(q.rotated(t).c.abs());
            m(*a).total_cmp(&m(*b))
        })
        .unwrap_or(0.0);
    let (pr, qr) = (p.rotated(theta), q.rotated(theta));
    let split = |k: &Conic| (vec![k.f, k.d, k.a], vec![k.e, k.b], k.c);
    let (p0, p1, p2) = split(&pr);
    let (q0, q1, q2) = split(&qr);
    // Res_y = (p2 q0 − q2 p0)² − (p2 q1 − q2 p1)(p1 q0 − q1 p0)
    let u = padd(&q0.iter().map(|v| p2 * v).collect::<Vec<_>>(), &p0, -q2);
    let v = padd(&q1.iter().map(|v| p2 * v).collect::<Vec<_>>(), &p1, -q2);
    let w = padd(&pmul(&p1, &q0), &pmul(&q1, &p0), -1.0);
    let res = padd(&pmul(&u, &u), &pmul(&v, &w), -1.0);
    if res.iter().all(|c| c.abs() < 1e-12) {
        return Err(Error::ContinuumDetected(
            "the conics share a common component".into(),
        ));
    }
    let (s, c) = theta.sin_cos();
    let mut points: Vec<ConicPoint> = Vec::new();
    for x in real_roots(&res) {
        let mut cands = Vec::new();
        for (k0, k1, k2) in [(&p0, &p1, p2), (&q0, &q1, q2)] {
            let (a, b, cc) = (k2, peval(k1, x), peval(k0, x));
            if a.abs() > 1e-14 {
                let disc = (b * b - 4.0 * a * cc).max(0.0).sqrt();
                cands.push((-b + disc) / (2.0 * a));
                cands.push((-b - disc) / (2.0 * a));
            } else if b.abs() > 1e-14 {
                cands.push(-cc / b);
            }
        }
        let vx = peval(&v, x);
        if vx.abs() > 1e-14 {
            cands.push(-peval(&u, x) / vx);
        }
        let Some(mut y) = cands.into_iter().min_by(|a, b| {
            (pr.eval(x, *a).abs() + qr.eval(x, *a).abs())
                .total_cmp(&(pr.eval(x, *b).abs() + qr.eval(x, *b).abs()))
        }) else {
            continue;
        };
        let mut x = x;
        for _ in 0..6 {
            let (g1, g2) = (pr.grad(x, y), qr.grad(x, y));
            let det = g1[0] * g2[1] - g1[1] * g2[0];
            if det.abs() < 1e-14 {
                break;
            }
            let (f1, f2) = (pr.eval(x, y), qr.eval(x, y));
            x -= (f1 * g2[1] - f2 * g1[1]) / det;
            y -= (g1[0] * f2 - g2[0] * f1) / det;
        }
        if pr.eval(x, y).abs() > 1e-6 || qr.eval(x, y).abs() > 1e-6 {
            continue;
        }
        let (g1, g2) = (pr.grad(x, y), qr.grad(x, y));
        let det = (g1[0] * g2[1] - g1[1] * g2[0]).abs();
        let condition = if det > 0.0 { 1.0 / det } else { f64::INFINITY };
        let radius = if condition > CONDITION_LIMIT {
            (f64::EPSILON * condition).sqrt().min(1.0)
        } else {
            f64::EPSILON * condition
        };
        let (bx, by) = (c * x - s * y, s * x + c * y);
        if points
            .iter()
            .any(|o| (o.x - bx).abs() < 1e-7 && (o.y - by).abs() < 1e-7)
        {
            continue;
        }
        points.push(ConicPoint {
            x: bx,
            y: by,
            condition,
            radius,
            in_simplex: in_simplex(bx, by, 1e-12),
        });
    }
    points.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    let max_condition = points.iter().fold(0.0f64, |m, p| m.max(p.condition));
    Ok(ConicIntersection {
        points,
        max_condition,
    })
}

/// Conditions on 𝔉(c) = A c² + B c + C for the number of roots in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticConditions {
    /// (a) C(A + B + C) > 0.
    pub a: bool,
    /// (b) C·𝔉(c*) < 0 with the true critical value 𝔉(c*) = C − B²/(4A).
    pub b: bool,
    /// (b) evaluated with the printed critical value −B/(4A) + C.
    pub b_printed: bool,
    /// (c) 0 < c* < 1.
    pub c: bool,
    pub critical_point: f64,
    pub critical_value: f64,
    pub critical_value_printed: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticRoot {
    pub value: f64,
    pub in_range: bool,
    /// Interval containing the root of 𝔉 + ω for every |ω| ≤ ‖ω‖_∞;
    /// present when the perturbation control holds.
    pub enclosure: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticRoots {
    pub coefficients: [f64; 3],
    pub discriminant: f64,
    pub roots: Vec<QuadraticRoot>,
    pub conditions: QuadraticConditions,
    pub omega_norm: f64,
    /// ‖ω‖_∞ ≤ |𝔉(c*)|.
    pub control_holds: bool,
    /// Set when the quadratic term vanished and the linear root was used.
    pub linear_fallback: bool,
}

impl QuadraticRoots {
    /// Number of roots in [0, 1].
    pub fn count(&self) -> usize {
        self.roots.iter().filter(|r| r.in_range).count()
    }
}

fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Vec::new();
    }
    let sq = disc.sqrt();
    let q = -0.5 * (b + b.signum() * sq);
    let mut r = if q == 0.0 {
        vec![0.0, 0.0]
    } else {
        vec![q / a, c / q]
    };
    if disc == 0.0 {
        r.truncate(1);
        r[0] = -b / (2.0 * a);
    }
    r.sort_by(|x, y| x.total_cmp(y));
    r
}

/// Roots in [0, 1] of 𝔉(c) = A c² + B c + C with certificates.
///
/// `scale` is the natural size of the coefficients; |A| ≤ tol·scale is
/// reported as a degenerate quadratic, and a vanishing 𝔉 together with a
/// vanishing ω as a continuum.
pub fn solve_quadratic_branch(
    coeffs: [f64; 3],
    omega_norm: f64,
    omega_error: f64,
    scale: f64,
    tol: f64,
) -> Result<QuadraticRoots> {
    let [a, b, c] = coeffs;
    let small = tol * scale;
    if a.abs() <= small && b.abs() <= small && c.abs() <= small && omega_norm <= small + omega_error
    {
        return Err(Error::ContinuumDetected(format!(
            "quadratic form vanishes (|A|,|B|,|C| ≤ {small:.1e}) and ‖ω‖ = {omega_norm:.1e} is within its error estimate {omega_error:.1e}"
        )));
    }
    if a.abs() <= small {
        return Err(Error::DegenerateQuadratic { a });
    }
    let cstar = -b / (2.0 * a);
    let fstar = c - b * b / (4.0 * a);
    let printed = -b / (4.0 * a) + c;
    let conditions = QuadraticConditions {
        a: c * (a + b + c) > 0.0,
        b: c * fstar < 0.0,
        b_printed: c * printed < 0.0,
        c: cstar > 0.0 && cstar < 1.0,
        critical_point: cstar,
        critical_value: fstar,
        critical_value_printed: printed,
    };
    let control_holds = omega_norm <= fstar.abs();
    let lo = quadratic_roots(a, b, c - omega_norm);
    let hi = quadratic_roots(a, b, c + omega_norm);
    let roots = quadratic_roots(a, b, c)
        .into_iter()
        .map(|r| {
            let enclosure = if control_holds && omega_norm > 0.0 {
                // nearest perturbed roots on the same side of c*
                let side = |v: &[f64]| {
                    v.iter()
                        .copied()
                        .filter(|x| (x - cstar) * (r - cstar) >= 0.0)
                        .collect::<Vec<_>>()
                };
                let cands: Vec<f64> = side(&lo).into_iter().chain(side(&hi)).collect();
                if cands.len() == 2 {
                    Some((cands[0].min(cands[1]), cands[0].max(cands[1])))
                } else {
                    None
                }
            } else if omega_norm == 0.0 {
                Some((r, r))
            } else {
                None
            };
            QuadraticRoot {
                value: r,
                in_range: (-1e-12..=1.0 + 1e-12).contains(&r),
                enclosure,
            }
        })
        .collect();
    Ok(QuadraticRoots {
        coefficients: coeffs,
        discriminant: b * b - 4.0 * a * c,
        roots,
        conditions,
        omega_norm,
        control_holds,
        linear_fallback: false,
    })
}

/// Root of the linear remainder B c + C after a degenerate quadratic.
pub fn linear_fallback(coeffs: [f64; 3], omega_norm: f64) -> Result<QuadraticRoots> {
    let [a, b, c] = coeffs;
    if b == 0.0 {
        return Err(Error::ContinuumDetected("linear remainder vanishes".into()));
    }
    let r = -c / b;
    Ok(QuadraticRoots {
        coefficients: coeffs,
        discriminant: b * b - 4.0 * a * c,
        roots: vec![QuadraticRoot {
            value: r,
            in_range: (0.0..=1.0).contains(&r),
            enclosure: None,
        }],
        conditions: QuadraticConditions {
            a: c * (a + b + c) > 0.0,
            b: false,
            b_printed: false,
            c: false,
            critical_point: f64::NAN,
            critical_value: f64::NAN,
            critical_value_printed: f64::NAN,
        },
        omega_norm,
        control_holds: false,
        linear_fallback: true,
    })
}

/// Sign-change scan of a function over [0, 1] at `n` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanSummary {
    /// Sign changes, or isolated clusters of flagged cells in 2D.
    pub count: usize,
    /// Fraction of sample points where every function is below the tolerance.
    pub vanishing_fraction: f64,
}

pub fn scan_interval(f: impl Fn(f64) -> f64, n: usize, tol: f64) -> ScanSummary {
    let vals: Vec<f64> = (0..n).map(|i| f(i as f64 / (n - 1) as f64)).collect();
    let vanishing = vals.iter().filter(|v| v.abs() <= tol).count();
    let mut count = 0;
    let mut prev: Option<f64> = None;
    for &v in &vals {
        if v.abs() <= tol {
            continue;
        }
        if let Some(p) = prev {
            if p.signum() != v.signum() {
                count += 1;
            }
        }
        prev = Some(v);
    }
    ScanSummary {
        count,
        vanishing_fraction: vanishing as f64 / n as f64,
    }
}

/// Cells of an n×n lattice on the simplex where both functions change sign,
/// clustered by adjacency.
pub fn scan_simplex(
    f1: impl Fn(f64, f64) -> f64,
    f2: impl Fn(f64, f64) -> f64,
    n: usize,
    tol: f64,
) -> ScanSummary {
    let h = 1.0 / (n - 1) as f64;
    let mut v1 = vec![0.0; n * n];
    let mut v2 = vec![0.0; n * n];
    let mut vanishing = 0;
    let mut total = 0;
    for i in 0..n {
        for j in 0..n {
            let (x, y) = (i as f64 * h, j as f64 * h);
            v1[i * n + j] = f1(x, y);
            v2[i * n + j] = f2(x, y);
            if x + y <= 1.0 + 1e-12 {
                total += 1;
                if v1[i * n + j].abs() <= tol && v2[i * n + j].abs() <= tol {
                    vanishing += 1;
                }
            }
        }
    }
    let changes = |v: &[f64], i: usize, j: usize| {
        let c = [
            v[i * n + j],
            v[(i + 1) * n + j],
            v[i * n + j + 1],
            v[(i + 1) * n + j + 1],
        ];
        let lo = c.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = c.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        lo <= 0.0 && hi >= 0.0
    };
    let m = n - 1;
    let mut flagged = vec![false; m * m];
    for i in 0..m {
        for j in 0..m {
            if (i + j) as f64 * h <= 1.0 && changes(&v1, i, j) && changes(&v2, i, j) {
                flagged[i * m + j] = true;
            }
        }
    }
    let mut seen = vec![false; m * m];
    let mut count = 0;
    for start in 0..m * m {
        if !flagged[start] || seen[start] {
            continue;
        }
        count += 1;
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(k) = stack.pop() {
            let (i, j) = ((k / m) as i64, (k % m) as i64);
            for di in -1..=1 {
                for dj in -1..=1 {
                    let (a, b) = (i + di, j + dj);
                    if a < 0 || b < 0 || a >= m as i64 || b >= m as i64 {
                        continue;
                    }
                    let kk = a as usize * m + b as usize;
                    if flagged[kk] && !seen[kk] {
                        seen[kk] = true;
                        stack.push(kk);
                    }
                }
            }
        }
    }
    ScanSummary {
        count,
        vanishing_fraction: vanishing as f64 / total as f64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_examples() {
        let r = solve_quadratic_branch([1.0, -1.0, 0.0], 0.0, 0.0, 1.0, 1e-12).unwrap();
        let v: Vec<f64> = r.roots.iter().map(|r| r.value).collect();
        assert_eq!(r.count(), 2);
        assert!((v[0]).abs() < 1e-15 && (v[1] - 1.0).abs() < 1e-15);
        let r = solve_quadratic_branch([1.0, 0.0, 1.0], 0.0, 0.0, 1.0, 1e-12).unwrap();
        assert_eq!(r.count(), 0);
    }

    #[test]
    fn degenerate_and_continuum() {
        assert!(matches!(
            solve_quadratic_branch([0.0, 1.0, -0.5], 0.0, 0.0, 1.0, 1e-9),
            Err(Error::DegenerateQuadratic { .. })
        ));
        assert!(matches!(
            solve_quadratic_branch([1e-14, 0.0, 1e-15], 0.0, 0.0, 1.0, 1e-9),
            Err(Error::ContinuumDetected(_))
        ));
        let lin = linear_fallback([0.0, 1.0, -0.5], 0.0).unwrap();
        assert_eq!(lin.roots[0].value, 0.5);
    }

    #[test]
    fn classification() {
        let circle = conic_classify(
            &Conic {
                a: 1.0,
                c: 1.0,
                f: -1.0,
                ..Default::default()
            },
            1e-12,
        );
        assert_eq!(circle.kind, ConicKind::Ellipse { circle: true });
        let para = conic_classify(
            &Conic {
                a: 1.0,
                ..Default::default()
            },
            1e-12,
        );
        assert_eq!(para.kind, ConicKind::Parabola);
        let hyp = conic_classify(
            &Conic {
                a: 1.0,
                c: -1.0,
                f: 1.0,
                ..Default::default()
            },
            1e-12,
        );
        assert_eq!(hyp.kind, ConicKind::Hyperbola { rectangular: true });
        let line = conic_classify(
            &Conic {
                d: 1.0,
                ..Default::default()
            },
            1e-12,
        );
        assert_eq!(line.kind, ConicKind::DegenerateLine);
    }

    #[test]
    fn circle_meets_axes() {
        let circle = Conic {
            a: 1.0,
            c: 1.0,
            f: -1.0,
            ..Default::default()
        };
        let axes = Conic {
            b: 1.0,
            ..Default::default()
        };
        let r = intersect_conics(&circle, &axes).unwrap();
        assert_eq!(r.points.len(), 4);
        assert_eq!(r.in_simplex().len(), 2);
        assert!(matches!(
            intersect_conics(&circle, &circle.scaled(3.0)),
            Err(Error::ContinuumDetected(_))
        ));
    }
}

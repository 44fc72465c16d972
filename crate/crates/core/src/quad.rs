use serde::{Deserialize, Serialize};

/// Quadrature parameters shared by the kernel and inner-product routines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadConfig {
    /// Cut-off of the Fourier integral; the integrand is below e^{-xi_max^4}.
    pub xi_max: f64,
    /// Number of Gauss-Legendre panels on [0, xi_max].
    pub panels: usize,
    /// Nodes per panel.
    pub points: usize,
    /// Tolerance on integrals of tabulated functions.
    pub quad_tol: f64,
    /// Threshold below which a sample is treated as negligible tail.
    pub tail_tol: f64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            xi_max: 3.2,
            panels: 64,
            points: 16,
            quad_tol: 1e-6,
            tail_tol: 1e-10,
        }
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = z;
            }
            dp = nf * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// Composite Gauss-Legendre rule on [a, b] with equal panels.
pub fn composite_gl(a: f64, b: f64, panels: usize, points: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(points);
    let mut nodes = Vec::with_capacity(panels * points);
    let mut weights = Vec::with_capacity(panels * points);
    let width = (b - a) / panels as f64;
    for p in 0..panels {
        let lo = a + p as f64 * width;
        let mid = lo + 0.5 * width;
        for (xi, wi) in x.iter().zip(&w) {
            nodes.push(mid + 0.5 * width * xi);
            weights.push(0.5 * width * wi);
        }
    }
    (nodes, weights)
}

/// Composite rule on [0, len] whose panels shrink geometrically toward 0,
/// for integrands with an integrable singularity at the left end.
pub fn graded_gl(len: f64, levels: usize, points: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(points);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let mut hi = len;
    for level in 0..=levels {
        let lo = if level == levels { 0.0 } else { 0.5 * hi };
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        for (xi, wi) in x.iter().zip(&w) {
            nodes.push(mid + half * xi);
            weights.push(half * wi);
        }
        hi = lo;
    }
    (nodes, weights)
}

/// Trapezoidal integral of uniformly spaced samples.
pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => h * (values[1..n - 1].iter().sum::<f64>() + 0.5 * (values[0] + values[n - 1])),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_integrates_polynomials_exactly() {
        for n in [1usize, 2, 5, 16] {
            let (x, w) = gauss_legendre(n);
            for deg in 0..2 * n {
                let exact = if deg % 2 == 1 {
                    0.0
                } else {
                    2.0 / (deg as f64 + 1.0)
                };
                let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                assert!((s - exact).abs() < 1e-13, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn graded_rule_handles_log() {
        let (x, w) = graded_gl(1.0, 40, 16);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.ln()).sum();
        assert!((s + 1.0).abs() < 1e-12);
    }
}

use thinfilm::kernel::{check_decay, eval_kernel, kernel_mass, MAX_TABLE_ORDER};
use thinfilm::{Error, Grid, KernelTable, MultiIndex, QuadConfig};

// Reference values from tools/oracles.py (mpmath, 30 digits).
const F0_1D: f64 = 0.28851686930823484; // Γ(5/4)/π
const F0_2D: f64 = 0.07052369794346953; // 1/(8√π)
const ZEROS_1D: [f64; 5] = [
    3.45346412836242,
    6.78432774797856,
    9.63585888628048,
    12.2291185785107,
    14.6503940221264,
];
const STEEPEST_DESCENT_RATE: f64 = 0.236235196855289; // 3/(8·4^{1/3})

fn table_1d(order: usize) -> KernelTable {
    let grid = Grid::new(1, 0.05, 48.0).unwrap();
    eval_kernel(1, &grid, order, &QuadConfig::default()).unwrap()
}

fn table_2d(order: usize) -> KernelTable {
    let grid = Grid::new(2, 0.25, 32.0).unwrap();
    eval_kernel(2, &grid, order, &QuadConfig::default()).unwrap()
}

fn idx(k: u32) -> MultiIndex {
    MultiIndex(vec![k])
}

#[test]
fn unit_mass_in_one_dimension() {
    let t = table_1d(0);
    assert!((kernel_mass(&t).unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn unit_mass_in_two_dimensions() {
    let t = table_2d(1);
    assert!((kernel_mass(&t).unwrap() - 1.0).abs() < 1e-4);
    let centre = t.grid.len() / 2;
    assert!((t.slice(&MultiIndex::zero(2)).unwrap()[centre] - F0_2D).abs() < 1e-10);
    for b in MultiIndex::of_order(2, 1) {
        assert!(t.integral(&b).unwrap().abs() < 1e-6);
    }
}

#[test]
fn first_derivative_has_zero_integral() {
    let t = table_1d(1);
    assert!(t.integral(&idx(1)).unwrap().abs() < 1e-6);
}

#[test]
fn value_at_the_origin() {
    let t = table_1d(0);
    let centre = t.grid.half_count();
    assert!((t.slice(&idx(0)).unwrap()[centre] - F0_1D).abs() < 1e-12);
}

#[test]
fn derivatives_have_alternating_parity() {
    let t = table_1d(5);
    let n = t.grid.axis_len();
    for k in 0..=5u32 {
        let s = t.slice(&idx(k)).unwrap();
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        for i in 0..n {
            assert!(
                (s[i] - sign * s[n - 1 - i]).abs() < 1e-15,
                "order {k} at node {i}"
            );
        }
    }
}

#[test]
fn sign_changes_match_the_reference_zeros() {
    let t = table_1d(0);
    let (ax, f) = (t.grid.axis(), t.slice(&idx(0)).unwrap());
    let mut found = Vec::new();
    for i in 0..ax.len() - 1 {
        if ax[i] >= 0.0 && ax[i + 1] <= 16.0 && f[i] * f[i + 1] < 0.0 {
            found.push(ax[i] - f[i] * (ax[i + 1] - ax[i]) / (f[i + 1] - f[i]));
        }
    }
    assert_eq!(found.len(), ZEROS_1D.len(), "{found:?}");
    for (z, r) in found.iter().zip(ZEROS_1D) {
        // linear interpolation on h = 0.05
        assert!((z - r).abs() < 2e-3, "{z} vs {r}");
    }
    let on_twelve = ax
        .iter()
        .zip(f.windows(2))
        .filter(|(y, w)| y.abs() <= 12.0 && w[0] * w[1] < 0.0)
        .count();
    assert!(on_twelve >= 6);
}

#[test]
fn symbol_derivative_matches_centred_differences() {
    let t = table_1d(3);
    let h = t.grid.h;
    let inner = t.grid.inner_indices(0.8);
    for k in 1..=3u32 {
        let lower = t.slice(&idx(k - 1)).unwrap();
        let upper = t.slice(&idx(k)).unwrap();
        let scale = upper.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let worst = inner
            .iter()
            .filter(|&&i| i > 0 && i + 1 < lower.len())
            .map(|&i| ((lower[i + 1] - lower[i - 1]) / (2.0 * h) - upper[i]).abs())
            .fold(0.0f64, f64::max);
        assert!(worst < 2e-3 * scale, "order {k}: {worst}");
    }
}

#[test]
fn fitted_envelope_bounds_every_slice() {
    let t = table_1d(4);
    let d = t.decay.d;
    assert!(d > 0.0);
    for k in 0..=4u32 {
        let c = t.decay_constant_for(&idx(k)).unwrap();
        let s = t.slice(&idx(k)).unwrap();
        let floor = 1e-13 * s.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (y, v) in t.grid.axis().iter().zip(s) {
            if v.abs() > floor {
                assert!(v.abs() <= c * (-d * y.abs().powf(4.0 / 3.0)).exp() * (1.0 + 1e-12));
            }
        }
    }
}

#[test]
fn decay_rate_near_the_steepest_descent_value() {
    let t = table_1d(0);
    let (_, d) = check_decay(&t).unwrap();
    assert!(
        (d - STEEPEST_DESCENT_RATE).abs() < 0.05 * STEEPEST_DESCENT_RATE,
        "{d}"
    );
    // regression baseline of the default grid
    assert!((d - 0.2429).abs() < 1e-3, "{d}");
}

#[test]
fn short_box_reports_divergence() {
    let grid = Grid::new(1, 0.05, 4.0).unwrap();
    match eval_kernel(1, &grid, 0, &QuadConfig::default()) {
        Err(Error::QuadratureDivergence { .. }) => {}
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn rejects_bad_requests() {
    let g1 = Grid::new(1, 0.05, 48.0).unwrap();
    assert!(matches!(
        eval_kernel(3, &g1, 0, &QuadConfig::default()),
        Err(Error::UnsupportedDimension(3))
    ));
    assert!(matches!(
        eval_kernel(1, &g1, MAX_TABLE_ORDER + 1, &QuadConfig::default()),
        Err(Error::OrderExceeded { .. })
    ));
    let coarse = QuadConfig {
        xi_max: 2.0,
        ..QuadConfig::default()
    };
    assert!(eval_kernel(1, &g1, 0, &coarse).is_err());
}

#[test]
fn json_round_trip_is_lossless() {
    let t = table_1d(2);
    let back = KernelTable::from_json(&t.to_json().unwrap(), &t.quad).unwrap();
    assert_eq!(back.slices, t.slices);
    assert_eq!(back.max_order, 2);
}

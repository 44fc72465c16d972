use thinfilm::kernel::eval_kernel;
use thinfilm::semigroup::{
    convolution_solution, decay_rate_fit, default_fit_taus, hermite_function, mode_evolution,
    moment_cancelled, moments, spectral_solution,
};
use thinfilm::spectral::eigenfunction;
use thinfilm::{Grid, KernelTable, MultiIndex, QuadConfig};

fn table(order: usize) -> KernelTable {
    eval_kernel(
        1,
        &Grid::new(1, 0.05, 48.0).unwrap(),
        order,
        &QuadConfig::default(),
    )
    .unwrap()
}

fn idx(k: u32) -> MultiIndex {
    MultiIndex(vec![k])
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn gaussian(t: &KernelTable, width: f64) -> Vec<f64> {
    let c = 1.0 / (width * std::f64::consts::PI.sqrt());
    t.grid
        .axis()
        .iter()
        .map(|y| c * (-(y / width).powi(2)).exp())
        .collect()
}

#[test]
fn moments_of_reference_data() {
    let t = table(0);
    let tol = 1e-10;
    let f = t.slice(&idx(0)).unwrap();
    assert!((moments(f, &idx(0), &t.grid, tol).unwrap() - 1.0).abs() < 1e-6);
    let odd: Vec<f64> = t.grid.axis().iter().map(|y| y * (-y * y).exp()).collect();
    assert!(moments(&odd, &idx(2), &t.grid, tol).unwrap().abs() < 1e-14);
    let g: Vec<f64> = t.grid.axis().iter().map(|y| (-y * y).exp()).collect();
    let exact = std::f64::consts::PI.sqrt() / 2.0 / 2f64.sqrt();
    assert!((moments(&g, &idx(2), &t.grid, tol).unwrap() - exact).abs() < 1e-12);
}

#[test]
fn fat_tails_are_rejected() {
    let t = table(0);
    let slow: Vec<f64> = t.grid.axis().iter().map(|y| 1.0 / (1.0 + y * y)).collect();
    assert!(moments(&slow, &idx(0), &t.grid, 1e-10).is_err());
}

#[test]
fn kernel_is_stationary() {
    let t = table(6);
    let f = t.slice(&idx(0)).unwrap();
    for tau in [0.5, 2.0, 6.0] {
        let w = mode_evolution(f, tau, 6, &t).unwrap();
        assert!(sup_diff(&w.values, f) < 1e-8, "τ = {tau}");
    }
}

#[test]
fn first_mode_decays_at_its_rate() {
    let t = table(6);
    let psi1 = eigenfunction(&idx(1), &t).unwrap();
    let w = mode_evolution(&psi1, 4.0, 6, &t).unwrap();
    let expect: Vec<f64> = psi1.iter().map(|v| v * (-1.0f64).exp()).collect();
    assert!(sup_diff(&w.values, &expect) < 1e-4);
}

#[test]
fn moment_expansion_at_the_initial_time() {
    // w(·, 0) = F * u0 on both routes
    let t = table(10);
    let u0 = gaussian(&t, 1.0);
    let s = spectral_solution(&u0, 0.0, 10, &t).unwrap();
    let c = convolution_solution(&u0, 0.0, &t).unwrap();
    assert!(sup_diff(&s.values, &c.values) < 1e-3);
}

#[test]
fn narrow_bump_spreads_into_the_kernel() {
    let t = table(1);
    let f = t.slice(&idx(0)).unwrap();
    let (wide, narrow) = (gaussian(&t, 0.4), gaussian(&t, 0.2));
    let e_wide = sup_diff(&convolution_solution(&wide, 0.0, &t).unwrap().values, f);
    let e_narrow = sup_diff(&convolution_solution(&narrow, 0.0, &t).unwrap().values, f);
    assert!(e_narrow < e_wide);
    // second order in the width
    assert!(e_narrow < 0.4 * e_wide, "{e_narrow} vs {e_wide}");
}

#[test]
fn spectral_and_convolution_routes_agree() {
    let t = table(10);
    let u0 = gaussian(&t, 1.0);
    for tau in [1.0, 2.0, 4.0] {
        let s = spectral_solution(&u0, tau, 10, &t).unwrap();
        let c = convolution_solution(&u0, tau, &t).unwrap();
        assert!(sup_diff(&s.values, &c.values) < 1e-3, "τ = {tau}");
        assert!((c.mass() - 1.0).abs() < 1e-6);
        assert!((s.mass() - 1.0).abs() < 1e-6);
    }
}

#[test]
fn evolution_is_a_semigroup() {
    // w(·, 1) from the convolution route, carried on to τ = 3 by the mode
    // expansion, against the convolution route at τ = 3.
    let t = table(10);
    let u0 = gaussian(&t, 1.0);
    let direct = convolution_solution(&u0, 3.0, &t).unwrap();
    let first = convolution_solution(&u0, 1.0, &t).unwrap();
    let rest = mode_evolution(&first.values, 2.0, 10, &t).unwrap();
    assert!(sup_diff(&direct.values, &rest.values) < 2e-3);
    let twice = mode_evolution(
        &mode_evolution(&first.values, 0.5, 10, &t).unwrap().values,
        1.5,
        10,
        &t,
    )
    .unwrap();
    let gap = sup_diff(&twice.values, &rest.values);
    assert!(gap < 1e-6, "{gap}");
}

#[test]
fn moment_cancelled_data_decay_at_minus_k_over_four() {
    let t = table(5);
    for k in 1..=3usize {
        let g = hermite_function(&idx(k as u32), 0.5, &t.grid);
        let u0 = moment_cancelled(&g, k, &t).unwrap();
        let fit = decay_rate_fit(&u0, &default_fit_taus(), &t).unwrap();
        let expect = -(k as f64) / 4.0;
        assert!(
            (fit.lambda - expect).abs() < 0.05 * expect.abs(),
            "k = {k}: {}",
            fit.lambda
        );
    }
}

#[test]
fn conserved_mode_does_not_decay() {
    let t = table(1);
    let f = t.slice(&idx(0)).unwrap().to_vec();
    let fit = decay_rate_fit(&f, &default_fit_taus(), &t).unwrap();
    assert!(fit.lambda.abs() < 0.01);
}

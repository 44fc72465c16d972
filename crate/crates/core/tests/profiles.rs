use thinfilm::branching::BranchKind;
use thinfilm::profiles::{
    adjoint_profile, expansion_diagnostic, homotopy_distance, kernel_profile,
    mass_conservation_check, residual_sup, scaling_consistency, shoot_blowup_profile,
    shoot_global_profile, trivial_blowup_profile, ProfileConfig, SimilarityProfile,
};
use thinfilm::{Error, QuadConfig};

fn global(n: f64) -> SimilarityProfile {
    shoot_global_profile(n, 1, &ProfileConfig::default()).unwrap()
}

fn growth_law(p: &SimilarityProfile) -> f64 {
    -p.alpha / p.beta_exp
}

#[test]
fn trivial_pair() {
    let cfg = ProfileConfig::default();
    let p = trivial_blowup_profile(0.2, &cfg).unwrap();
    assert_eq!(p.alpha, 0.0);
    assert_eq!(residual_sup(&p, 0.0, f64::INFINITY), 0.0);
    let q = shoot_blowup_profile(0.2, 0, 1, 0.0, &cfg).unwrap();
    assert_eq!(q.f, p.f);
}

#[test]
fn kernel_solves_the_linear_profile_equation() {
    let p = kernel_profile(0.05, 16.0, &QuadConfig::default()).unwrap();
    assert_eq!(p.alpha, 0.25);
    let r = residual_sup(&p, 0.0, 8.0);
    assert!(r < 1e-4, "{r}");
}

#[test]
fn adjoint_polynomials_solve_the_linear_blowup_equation() {
    for k in 0..=4 {
        let p = adjoint_profile(k, 0.05, 6.0).unwrap();
        let r = residual_sup(&p, 0.0, 4.0);
        assert!(r < 1e-8, "k = {k}: {r}");
    }
}

#[test]
fn global_profiles() {
    let mut last = f64::INFINITY;
    for n in [0.2, 0.1, 0.05] {
        let p = global(n);
        assert_eq!(p.kind, BranchKind::Global);
        assert!((p.alpha - 1.0 / (4.0 + n)).abs() < 1e-15);
        let m = mass_conservation_check(&p).unwrap();
        assert!(m.mass_drift < 1e-6, "n = {n}: {}", m.mass_drift);
        assert!(m.exponent_identity.abs() < 1e-15 && m.exponent_identity_exact);
        assert!(p.interface_radius.is_some());
        assert!(p.interface_zero_count >= 2, "n = {n}");
        assert!(residual_sup(&p, 0.0, 4.0) < 2e-3);
        let d = homotopy_distance(&p, 8.0, &QuadConfig::default()).unwrap();
        assert!(d < last, "n = {n}: {d} after {last}");
        last = d;
    }
}

#[test]
fn global_profiles_are_self_similar() {
    let p = global(0.1);
    for lambda in [0.5, 2.0, 5.0] {
        assert!(scaling_consistency(&p, lambda).unwrap() < 1e-6);
    }
}

#[test]
fn first_blowup_branch_is_linear() {
    let cfg = ProfileConfig::default();
    for n in [0.05, 0.1, 0.2] {
        let p = shoot_blowup_profile(n, 1, 1, -0.25, &cfg).unwrap();
        assert!(
            (p.alpha + 1.0 / (4.0 - n)).abs() < 1e-8,
            "n = {n}: {}",
            p.alpha
        );
        assert!(p.sup_distance(|y| y, 8.0) < 1e-6);
        assert!(homotopy_distance(&p, 8.0, &QuadConfig::default()).unwrap() < 1e-6);
    }
}

#[test]
fn blowup_growth_follows_the_exponents() {
    let cfg = ProfileConfig::default();
    for k in 1..=3usize {
        for n in [0.05, 0.1, 0.2] {
            let p = shoot_blowup_profile(n, k, 1, -(k as f64) / 4.0, &cfg).unwrap();
            let g = p.growth_exponent.unwrap();
            let law = growth_law(&p);
            assert!(
                (g - law).abs() < 0.05 * law,
                "k = {k}, n = {n}: {g} vs {law}"
            );
            assert!(g < 4.0 / n - cfg.bundle_margin);
        }
    }
}

#[test]
fn mass_check_is_for_global_profiles() {
    let p = adjoint_profile(2, 0.05, 4.0).unwrap();
    assert!(matches!(
        mass_conservation_check(&p),
        Err(Error::InvalidArgument(_))
    ));
}

#[test]
fn only_one_dimension_is_shot() {
    let cfg = ProfileConfig::default();
    assert!(matches!(
        shoot_global_profile(0.1, 2, &cfg),
        Err(Error::UnsupportedDimension(2))
    ));
    assert!(matches!(
        shoot_blowup_profile(0.1, 1, 2, -0.25, &cfg),
        Err(Error::UnsupportedDimension(2))
    ));
    assert!(shoot_global_profile(0.9, 1, &cfg).is_err());
}

#[test]
fn expansion_error_is_second_order() {
    // F on the default diagnostic window |y| ≤ 4
    let p = kernel_profile(0.05, 4.0, &QuadConfig::default()).unwrap();
    let rows = expansion_diagnostic(&p.f, &p.grid.weights(), &[0.2, 0.1, 0.05], 1);
    for r in &rows {
        assert!(r.ratio > 0.8 && r.ratio < 1.2, "n = {}: {}", r.n, r.ratio);
        assert!(r.l1_error <= r.second_order * 1.2);
    }
    assert!(rows.windows(2).all(|w| w[1].l1_error < w[0].l1_error));
    assert!(rows
        .windows(2)
        .all(|w| w[1].excluded_bound < w[0].excluded_bound));
}

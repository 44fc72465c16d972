use thinfilm::branching::conic::in_simplex;
use thinfilm::branching::{
    alpha_expansion, assemble_semisimple_system, assemble_simple_solvability, conic_classify,
    gamma01, intersect_conics, log_weighted_integral, mu10, scan_system, solve_quadratic_branch,
    solve_system, spectrum_shift_residual, transversality_pairing, BranchKind, Conic, ConicKind,
    ConicSystem, Field, SystemSolution,
};
use thinfilm::kernel::eval_kernel;
use thinfilm::{Error, Grid, KernelTable, MultiIndex, QuadConfig};

// -∫ ln|y + 0.1| F'''(y) dy from tools/oracles.py.
const LOG_SHIFTED: f64 = -0.0249630947043755;
// First blow-up coefficient μ_{1,4} from tools/oracles.py.
const MU_14: f64 = -0.567830319219544;

fn table_1d(h: f64) -> KernelTable {
    eval_kernel(
        1,
        &Grid::new(1, h, 48.0).unwrap(),
        2,
        &QuadConfig::default(),
    )
    .unwrap()
}

fn table_2d() -> KernelTable {
    eval_kernel(
        2,
        &Grid::new(2, 0.25, 32.0).unwrap(),
        2,
        &QuadConfig::default(),
    )
    .unwrap()
}

fn shifted_line() -> Field {
    Field::combination(&[
        (&Field::adjoint(&MultiIndex(vec![1])), 1.0),
        (&Field::constant(1, 0.1), 1.0),
    ])
    .unwrap()
}

#[test]
fn log_of_a_constant_vanishes() {
    let t = table_1d(0.05);
    let f = Field::eigenfunction(&MultiIndex(vec![0]));
    let r = log_weighted_integral(
        &Field::adjoint(&MultiIndex(vec![1])),
        &Field::constant(1, 1.0),
        &f,
        &t,
    )
    .unwrap();
    assert_eq!(r.value(), 0.0);
}

#[test]
fn log_integral_across_a_shifted_zero() {
    let t = table_1d(0.05);
    let adj = Field::adjoint(&MultiIndex(vec![1]));
    let f = Field::eigenfunction(&MultiIndex(vec![0]));
    let r = log_weighted_integral(&adj, &shifted_line(), &f, &t).unwrap();
    assert!((r.ibp - LOG_SHIFTED).abs() < 1e-6, "{}", r.ibp);
    assert!(r.discrepancy < 1e-3);
    let fine = log_weighted_integral(&adj, &shifted_line(), &f, &table_1d(0.025)).unwrap();
    assert!((fine.ibp - r.ibp).abs() < 1e-3);
}

#[test]
fn planar_log_integral_forms_agree() {
    let t = table_2d();
    let e1 = Field::eigenfunction(&MultiIndex(vec![1, 0]));
    let e2 = Field::eigenfunction(&MultiIndex(vec![0, 1]));
    let combo = Field::combination(&[(&e1, 0.5), (&e2, 0.5)]).unwrap();
    let r =
        log_weighted_integral(&Field::adjoint(&MultiIndex(vec![1, 0])), &combo, &e1, &t).unwrap();
    assert!(r.discrepancy < 1e-3, "{r:?}");
}

#[test]
fn first_global_coefficient() {
    // ⟨1, y·∇F⟩ = −N and the log term integrates to zero against ψ₀* = 1,
    // so γ_{0,1} = η / (−N²/16).
    let t = table_1d(0.05);
    let r = gamma01(1.0, &t).unwrap();
    assert!((r.euler + 1.0).abs() < 1e-6 && (r.euler_ibp + 1.0).abs() < 1e-6);
    assert!((r.coefficient + 16.0).abs() < 1e-4, "{}", r.coefficient);
    assert!((r.coefficient - r.coefficient_check).abs() < 1e-3);
    assert_eq!(gamma01(0.0, &t).unwrap().coefficient, 0.0);
    let twice = gamma01(2.0, &t).unwrap().coefficient;
    assert!((twice - 2.0 * r.coefficient).abs() < 1e-12 * twice.abs());

    let p = table_2d();
    let r2 = gamma01(1.0, &p).unwrap();
    assert!((r2.euler + 2.0).abs() < 1e-4);
    assert!((r2.coefficient + 4.0).abs() < 1e-3, "{}", r2.coefficient);
}

#[test]
fn trivial_blowup_coefficient() {
    let t = table_1d(0.05);
    assert!(mu10(&t).unwrap().abs() < 1e-10);
    let r = assemble_simple_solvability(0, BranchKind::Blowup, 0.0, &t).unwrap();
    assert_eq!(r.coefficient, mu10(&t).unwrap());
    assert!(r.solvability_residual < 1e-8);
    assert!((r.pairing - 1.0).abs() < 1e-6);
}

#[test]
fn transversality_cancels() {
    for t in [table_1d(0.05), table_2d()] {
        let (direct, ibp) = transversality_pairing(&t).unwrap();
        assert!(direct.abs() < 1e-6 && ibp.abs() < 1e-6, "{direct} {ibp}");
    }
}

#[test]
fn first_blowup_coefficients() {
    // k = 1, 2: ψ*_k''' = 0 and ⟨ψ_k, y ψ*_k'⟩ = k; k = 3, 4 against tools/oracles.py.
    let t = table_1d(0.05);
    for (k, mu) in [(1, -1.0 / 16.0), (2, -0.25), (3, 3.0 / 16.0), (4, MU_14)] {
        let r = assemble_simple_solvability(k, BranchKind::Blowup, 0.0, &t).unwrap();
        assert!(
            (r.coefficient - mu).abs() < 1e-6,
            "k = {k}: {}",
            r.coefficient
        );
        assert!((r.coefficient_check - mu).abs() < 1e-3, "k = {k}");
    }
}

#[test]
fn shifted_spectrum() {
    let t = table_1d(0.05);
    for n in [0.0, 0.1] {
        for k in 0..=3 {
            let alpha = alpha_expansion(k, 1, n, BranchKind::Global, 0.0);
            let (_, res) = spectrum_shift_residual(k, alpha, n, &t).unwrap();
            assert!(res < 1e-4, "n = {n}, k = {k}: {res}");
        }
    }
}

#[test]
fn alpha_at_reference_points() {
    assert!((alpha_expansion(0, 1, 1.0, BranchKind::Global, 0.0) - 0.2).abs() < 1e-15);
    assert_eq!(alpha_expansion(2, 2, 0.0, BranchKind::Global, 0.0), 1.0);
    for n in [0.0, 0.3, 1.0] {
        assert_eq!(alpha_expansion(0, 1, n, BranchKind::Blowup, 0.0), 0.0);
    }
}

#[test]
fn planar_dipole_system() {
    let t = table_2d();
    let sys = assemble_semisimple_system(1, BranchKind::Blowup, 1.0, &t).unwrap();
    assert_eq!(sys.equations.len(), 1);
    assert!(sys.quadratic().is_some());
    let c = ConicSystem::full_coefficients(&[0.3]);
    assert_eq!(c.iter().sum::<f64>(), 1.0);
    let solution = solve_system(&sys).unwrap();
    let scan = scan_system(&sys);
    match &solution {
        SystemSolution::Quadratic { roots } => {
            assert!(roots.count() <= 2);
            assert_eq!(roots.count(), scan.count);
        }
        SystemSolution::Continuum { .. } => assert!(scan.vanishing_fraction > 0.99),
        other => panic!("unexpected {other:?}"),
    }
    if let Some(check) = sys.leading_check {
        let a = sys.equations[0].a;
        assert!((a - check).abs() < 1e-3 * a.abs().max(1.0));
    }
}

#[test]
fn planar_quadrupole_system() {
    let t = table_2d();
    let sys = assemble_semisimple_system(2, BranchKind::Blowup, 1.0, &t).unwrap();
    assert_eq!(sys.equations.len(), 2);
    let solution = solve_system(&sys).unwrap();
    if let Some(n) = solution.count() {
        assert!(n <= 4);
    }
    if let SystemSolution::Conics { intersection, .. } = &solution {
        for p in intersection.in_simplex() {
            assert!(in_simplex(p.x, p.y, 1e-12));
        }
    }
}

#[test]
fn quadratic_branch_examples() {
    let two = solve_quadratic_branch([1.0, -1.0, 0.0], 0.0, 0.0, 1.0, 1e-6).unwrap();
    assert_eq!(two.count(), 2);
    let none = solve_quadratic_branch([1.0, 0.0, 1.0], 0.0, 0.0, 1.0, 1e-6).unwrap();
    assert_eq!(none.count(), 0);
}

#[test]
fn conic_examples() {
    // a x² + b xy + c y² + d x + e y + f with (A, B, C) = (a, b, c)
    let quad = |a, b, c| Conic {
        a,
        b,
        c,
        f: -1.0,
        ..Default::default()
    };
    assert_eq!(
        conic_classify(&quad(1.0, 0.0, 1.0), 1e-12).kind,
        ConicKind::Ellipse { circle: true }
    );
    assert_eq!(
        conic_classify(&quad(1.0, 0.0, 0.0), 1e-12).kind,
        ConicKind::Parabola
    );
    assert_eq!(
        conic_classify(&quad(1.0, 0.0, -1.0), 1e-12).kind,
        ConicKind::Hyperbola { rectangular: true }
    );
    let circle = Conic {
        a: 1.0,
        c: 1.0,
        f: -1.0,
        ..Default::default()
    };
    let cross = Conic {
        b: 1.0,
        ..Default::default()
    };
    assert_eq!(intersect_conics(&circle, &cross).unwrap().points.len(), 4);
    assert!(matches!(
        intersect_conics(&circle, &circle),
        Err(Error::ContinuumDetected(_))
    ));
}

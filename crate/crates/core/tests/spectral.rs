use thinfilm::kernel::eval_kernel;
use thinfilm::polynomial::{rational, SparsePolynomial};
use thinfilm::spectral::{
    adjoint_identity_defect, adjoint_numerator, adjoint_polynomial, apply_b, apply_b_star,
    eigen_residual, eigenfunction, inner_product, orthogonality_matrix, Operand, Sampled, Weight,
};
use thinfilm::{Grid, KernelTable, MultiIndex, QuadConfig};

// ψ_(2) = F''/√2 from tools/oracles.py.
const PSI2: [(f64, f64); 3] = [
    (0.0, -0.0689539157075523),
    (1.5, -0.0215309070818995),
    (3.0, 0.0379260620781209),
];

fn table_1d(order: usize) -> KernelTable {
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

fn node(t: &KernelTable, y: f64) -> usize {
    t.grid
        .axis()
        .iter()
        .position(|x| (x - y).abs() < 1e-9)
        .unwrap()
}

#[test]
fn low_eigenfunctions() {
    let t = table_1d(2);
    assert_eq!(
        eigenfunction(&idx(0), &t).unwrap(),
        t.slice(&idx(0)).unwrap()
    );
    let d1 = t.slice(&idx(1)).unwrap();
    for (a, b) in eigenfunction(&idx(1), &t).unwrap().iter().zip(d1) {
        assert_eq!(*a, -b);
    }
    let psi2 = eigenfunction(&idx(2), &t).unwrap();
    for (y, v) in PSI2 {
        assert!((psi2[node(&t, y)] - v).abs() < 1e-12, "y = {y}");
    }
}

#[test]
fn adjoint_polynomials_of_low_order() {
    let one = adjoint_polynomial(&idx(0)).unwrap();
    assert_eq!(one.eval(&[3.7]), 1.0);
    let y = adjoint_polynomial(&idx(1)).unwrap();
    assert_eq!(y.eval(&[-2.5]), -2.5);
    let p4 = adjoint_polynomial(&idx(4)).unwrap();
    assert_eq!(p4.normalizer_factorial, 24);
    assert!((p4.eval(&[2.0]) - 40.0 / 24f64.sqrt()).abs() < 1e-14);
}

#[test]
fn b_star_examples() {
    assert!(apply_b_star(&SparsePolynomial::constant(1, rational(1, 1))).is_zero());
    let y2 = SparsePolynomial::monomial(idx(2), rational(1, 1));
    assert_eq!(
        apply_b_star(&y2),
        SparsePolynomial::monomial(idx(2), rational(-1, 2))
    );
    let p4 = adjoint_numerator(&idx(4));
    assert_eq!(apply_b_star(&p4), p4.scale(&rational(-1, 1)));
}

#[test]
fn exact_adjoint_identity() {
    for b in MultiIndex::up_to(1, 12) {
        assert!(adjoint_identity_defect(&b).is_zero(), "{b}");
    }
    for b in MultiIndex::up_to(2, 8) {
        assert!(adjoint_identity_defect(&b).is_zero(), "{b}");
    }
}

#[test]
fn eigen_residuals_in_one_dimension() {
    let t = table_1d(5);
    for b in MultiIndex::up_to(1, 5) {
        assert!(eigen_residual(&b, &t).unwrap() < 1e-4, "{b}");
    }
    let zero = vec![0.0; t.grid.len()];
    assert!(apply_b(Sampled::Values(&zero), &t)
        .unwrap()
        .iter()
        .all(|v| *v == 0.0));
}

#[test]
fn finite_difference_route_agrees_on_the_kernel() {
    let t = table_1d(0);
    let f = t.slice(&idx(0)).unwrap();
    let bf = apply_b(Sampled::Values(f), &t).unwrap();
    let worst = t
        .grid
        .inner_indices(0.8)
        .iter()
        .map(|&i| bf[i].abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-4, "{worst}");
}

#[test]
fn biorthogonality_in_one_dimension() {
    let t = table_1d(5);
    let g = orthogonality_matrix(5, &t).unwrap();
    assert_eq!(g.labels.len(), 6);
    assert!(g.max_deviation() < 1e-5);
    assert!((g.matrix[0][0] - 1.0).abs() < 1e-6);
    let single = orthogonality_matrix(0, &t).unwrap();
    assert_eq!(single.matrix.len(), 1);
    assert!((single.matrix[0][0] - 1.0).abs() < 1e-12);
}

#[test]
fn eigenfunctions_have_zero_mean() {
    let t = table_1d(5);
    let one = adjoint_polynomial(&idx(0)).unwrap();
    for k in 1..=5 {
        let psi = eigenfunction(&idx(k), &t).unwrap();
        assert!(
            inner_product(&psi, Operand::Polynomial(&one), Weight::None, &t.grid)
                .unwrap()
                .abs()
                < 1e-6
        );
    }
}

#[test]
fn weights_are_reciprocal() {
    let t = table_1d(1);
    let psi = eigenfunction(&idx(1), &t).unwrap();
    let a = t.decay.weight_a();
    let plain = inner_product(&psi, Operand::Samples(&psi), Weight::None, &t.grid).unwrap();
    let rho = inner_product(&psi, Operand::Samples(&psi), Weight::Rho(a), &t.grid).unwrap();
    let star = inner_product(&psi, Operand::Samples(&psi), Weight::RhoStar(a), &t.grid).unwrap();
    assert!(star < plain && plain < rho);
}

#[test]
fn biorthogonality_in_two_dimensions() {
    // Two independent discretizations of the same Gram matrix.
    let q = QuadConfig::default();
    let a = eval_kernel(2, &Grid::new(2, 0.25, 32.0).unwrap(), 3, &q).unwrap();
    let b = eval_kernel(2, &Grid::new(2, 0.2, 28.0).unwrap(), 3, &q).unwrap();
    let (ga, gb) = (
        orthogonality_matrix(3, &a).unwrap(),
        orthogonality_matrix(3, &b).unwrap(),
    );
    assert_eq!(ga.labels.len(), 10);
    assert!(ga.max_deviation() < 1e-3 && gb.max_deviation() < 1e-3);
    for (ra, rb) in ga.matrix.iter().zip(&gb.matrix) {
        for (x, y) in ra.iter().zip(rb) {
            assert!((x - y).abs() < 1e-3);
        }
    }
    for b in MultiIndex::up_to(2, 3) {
        assert!(eigen_residual(&b, &a).unwrap() < 1e-4, "{b}");
    }
}

#[test]
fn eigenspace_sizes_in_two_dimensions() {
    for k in 0..=6 {
        assert_eq!(MultiIndex::of_order(2, k).len(), k + 1);
    }
}

use proptest::prelude::*;
use thinfilm::branching::conic::{in_simplex, real_roots};
use thinfilm::branching::{intersect_conics, Conic};
use thinfilm::polynomial::{rational, SparsePolynomial};
use thinfilm::profiles::{adjoint_profile, expansion_diagnostic};
use thinfilm::spectral::{adjoint_identity_defect, adjoint_polynomial, apply_b_star};
use thinfilm::{Grid, MultiIndex};

fn poly(terms: &[(u32, u32, i64)]) -> SparsePolynomial {
    terms
        .iter()
        .fold(SparsePolynomial::zero(2), |acc, &(i, j, c)| {
            acc.add(&SparsePolynomial::monomial(
                MultiIndex(vec![i, j]),
                rational(c, 1),
            ))
        })
}

fn terms() -> impl Strategy<Value = Vec<(u32, u32, i64)>> {
    prop::collection::vec((0u32..7, 0u32..7, -9i64..10), 0..6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn b_star_is_linear(p in terms(), q in terms(), a in -5i64..6, b in -5i64..6) {
        let (p, q) = (poly(&p), poly(&q));
        let lhs = apply_b_star(&p.scale(&rational(a, 1)).add(&q.scale(&rational(b, 1))));
        let rhs = apply_b_star(&p).scale(&rational(a, 1)).add(&apply_b_star(&q).scale(&rational(b, 1)));
        prop_assert!(lhs.sub(&rhs).is_zero());
    }

    #[test]
    fn evaluation_is_additive(p in terms(), q in terms(), x in -2.0f64..2.0, y in -2.0f64..2.0) {
        let (p, q) = (poly(&p), poly(&q));
        let sum = p.add(&q).eval(&[x, y]);
        let parts = p.eval(&[x, y]) + q.eval(&[x, y]);
        prop_assert!((sum - parts).abs() <= 1e-9 * (1.0 + parts.abs()));
    }

    #[test]
    fn adjoint_identity_holds(i in 0u32..9, j in 0u32..9) {
        prop_assert!(adjoint_identity_defect(&MultiIndex(vec![i, j])).is_zero());
    }

    #[test]
    fn adjoint_polynomials_grow_like_their_leading_term(k in 0u32..10, y in 1.0f64..50.0) {
        // ψ*_k(y) ~ y^k/√k! as y grows
        let p = adjoint_polynomial(&MultiIndex(vec![k])).unwrap();
        let big = 1e3 * y;
        let rel = (p.eval(&[big]) / (big.powi(k as i32) * p.scale_f64()) - 1.0).abs();
        prop_assert!(rel < 1e-3, "{}", rel);
    }

    #[test]
    fn eigenspaces_have_k_plus_one_members(k in 0usize..12) {
        let all = MultiIndex::of_order(2, k);
        prop_assert_eq!(all.len(), k + 1);
        prop_assert!(all.iter().all(|b| b.order() == k));
        prop_assert_eq!(MultiIndex::up_to(2, k).len(), (k + 1) * (k + 2) / 2);
    }

    #[test]
    fn roots_are_recovered(r in prop::collection::vec(-3.0f64..3.0, 1..5)) {
        let mut sorted = r.clone();
        sorted.sort_by(f64::total_cmp);
        prop_assume!(sorted.windows(2).all(|w| w[1] - w[0] > 0.05));
        // coefficients in ascending powers of ∏(x − r_i)
        let mut c = vec![1.0];
        for root in &sorted {
            let mut next = vec![0.0; c.len() + 1];
            for (i, v) in c.iter().enumerate() {
                next[i + 1] += v;
                next[i] -= root * v;
            }
            c = next;
        }
        let mut found = real_roots(&c);
        found.sort_by(f64::total_cmp);
        prop_assert_eq!(found.len(), sorted.len());
        for (a, b) in found.iter().zip(&sorted) {
            prop_assert!((a - b).abs() < 1e-6, "{} vs {}", a, b);
        }
    }

    #[test]
    fn intersections_lie_on_both_conics(
        p in prop::array::uniform6(-1.0f64..1.0),
        q in prop::array::uniform6(-1.0f64..1.0),
    ) {
        let (p, q) = (Conic::from_coefficients(p), Conic::from_coefficients(q));
        if let Ok(x) = intersect_conics(&p, &q).and_then(|x| x.strict()) {
            prop_assert!(x.points.len() <= 4);
            for pt in &x.points {
                let scale = 1.0 + pt.x * pt.x + pt.y * pt.y;
                prop_assert!(p.eval(pt.x, pt.y).abs() < 1e-6 * scale * p.norm());
                prop_assert!(q.eval(pt.x, pt.y).abs() < 1e-6 * scale * q.norm());
                prop_assert_eq!(pt.in_simplex, in_simplex(pt.x, pt.y, 1e-12));
            }
        }
    }

    #[test]
    fn grid_weights_integrate_constants(h in 0.02f64..0.1, radius in 4.0f64..20.0) {
        let g = Grid::new(1, h, radius).unwrap();
        let w = g.weights();
        prop_assert!(w.iter().all(|v| *v > 0.0));
        let ax = g.axis();
        let span = ax[ax.len() - 1] - ax[0];
        prop_assert!((w.iter().sum::<f64>() - span).abs() < 1e-9 * span);
    }

    #[test]
    fn cubic_interpolation_reproduces_low_adjoints(k in 0usize..4, y in -5.0f64..5.0) {
        let p = adjoint_profile(k, 0.05, 6.0).unwrap();
        let exact = adjoint_polynomial(&MultiIndex(vec![k as u32])).unwrap().eval(&[y]);
        prop_assert!((p.value_at(y).unwrap() - exact).abs() < 1e-10 * (1.0 + exact.abs()));
    }

    #[test]
    fn expansion_rows_are_consistent(
        f in prop::collection::vec(0.01f64..3.0, 1..40),
        n in 0.01f64..0.5,
    ) {
        let w = vec![0.1; f.len()];
        let row = &expansion_diagnostic(&f, &w, &[n], 1)[0];
        prop_assert!(row.l1_error >= 0.0 && row.second_order >= 0.0);
        prop_assert!(row.excluded_measure <= 0.1 * f.len() as f64 + 1e-12);
        // |(aⁿ − 1)/n − ln a| ≤ (n/2) ln²a · e^{n|ln a|}
        let cap: f64 = f
            .iter()
            .map(|a| 0.1 * 0.5 * n * a.ln().powi(2) * (n * a.ln().abs()).exp())
            .sum();
        prop_assert!(row.l1_error <= cap * (1.0 + 1e-9) + 1e-15);
    }
}

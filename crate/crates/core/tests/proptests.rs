use proptest::prelude::*;
use rug::{Complex, Rational};
use superosc::coefficients::Residuals;
use superosc::convergence::dual_route_at_points;
use superosc::growth_space::GrowthRate;
use superosc::scalar::{format_rational, parse_rational};
use superosc::series::convolve;
use superosc::superosc::{NodeSpec, DEFAULT_TAIL_TOL};
use superosc::{
    admissible_halfwidth, bnorm_estimate, solve_at_node, solve_coefficients, sweep, verify_interpolation, Builtin,
    GrowthFunction, GridSpec, Mode, MultivarProblem, NodeScheme, NodeSet, PowerSeries, PrecisionPolicy, ProblemFamily,
    QComplex, Radius, SamplingGrid,
};

fn rational(max_den: i64) -> impl Strategy<Value = Rational> {
    (-400i64..=400, 1i64..=max_den).prop_map(|(p, q)| Rational::from((p, q)))
}

fn distinct_nodes() -> impl Strategy<Value = Vec<Rational>> {
    proptest::collection::btree_set(-60i64..=60, 2..9)
        .prop_map(|s| s.into_iter().map(|k| Rational::from((k, 60))).collect())
}

fn qc() -> impl Strategy<Value = QComplex> {
    (rational(7), rational(7)).prop_map(|(a, b)| QComplex::new(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn moments_reproduced_up_to_order(h in distinct_nodes(), a in rational(9)) {
        let nodes = NodeSet::custom(h).unwrap();
        let z = solve_coefficients(&nodes, &a);
        let Residuals::Exact(r) = verify_interpolation(&z, nodes.order()) else { panic!("inexact") };
        prop_assert!(r.iter().all(|v| *v == 0));
    }

    #[test]
    fn coefficients_sum_to_one(n in 1usize..14, a in rational(5)) {
        let z = solve_coefficients(&NodeSet::equispaced(n).unwrap(), &a);
        let s: Rational = z.exact_values().unwrap().iter().sum();
        prop_assert_eq!(s, Rational::from(1));
    }

    #[test]
    fn node_targets_give_indicators(h in distinct_nodes(), pick in 0usize..16) {
        let nodes = NodeSet::custom(h.clone()).unwrap();
        let k = pick % h.len();
        let direct = solve_coefficients(&nodes, &h[k]);
        let via_index = solve_at_node(&nodes, k).unwrap();
        prop_assert_eq!(direct.exact_values().unwrap(), via_index.as_slice());
    }

    #[test]
    fn rationals_round_trip_through_text(r in rational(1000)) {
        prop_assert_eq!(parse_rational(&format_rational(&r)).unwrap(), r.clone());
        let rate = GrowthRate::OverE(Rational::from(r.abs_ref()) + 1);
        prop_assert_eq!(GrowthRate::parse(&rate.to_string()).unwrap(), rate);
    }

    #[test]
    fn decimal_strings_are_exact(int in 0u32..1000, frac in 0u32..1000) {
        let r = parse_rational(&format!("{int}.{frac:03}")).unwrap();
        prop_assert_eq!(r, Rational::from((int as i64 * 1000 + frac as i64, 1000)));
    }

    #[test]
    fn halfwidth_respects_each_bound(a in rational(4), r in 1i64..20, b in 1i64..40) {
        prop_assume!(a != 0);
        let radius = Rational::from(r);
        let hw = admissible_halfwidth(&a, &GrowthRate::OverE(Rational::from((b, 16))), &[Radius::finite(r)]);
        let v = hw.exact.expect("rational inputs");
        prop_assert!(v <= radius);
        prop_assert!(v <= (&radius / Rational::from(a.abs_ref())));
        prop_assert!(v <= (&radius * Rational::from((4, b))));
    }

    #[test]
    fn convolution_commutes(a in proptest::collection::vec(qc(), 1..6), b in proptest::collection::vec(qc(), 1..6)) {
        prop_assert_eq!(convolve(&a, &b, 10, ()), convolve(&b, &a, 10, ()));
    }

    #[test]
    fn polynomial_products_are_exact(a in proptest::collection::vec(qc(), 1..5), b in proptest::collection::vec(qc(), 1..5), x in rational(3)) {
        let s = PowerSeries::polynomial(a.clone());
        let t = PowerSeries::polynomial(b.clone());
        let st = superosc::cauchy_product(&s, &t, a.len() + b.len(), 64);
        let eval = |c: &[QComplex]| c.iter().rev().fold(QComplex::default(), |acc, cj| {
            let scaled = acc.scale(&x);
            QComplex::new(scaled.re + &cj.re, scaled.im + &cj.im)
        });
        let lhs = eval(&st.coeffs_exact(a.len() + b.len()).unwrap());
        let (pa, pb) = (eval(&a), eval(&b));
        let rhs = QComplex::new(
            Rational::from(&pa.re * &pb.re) - Rational::from(&pa.im * &pb.im),
            Rational::from(&pa.re * &pb.im) + Rational::from(&pa.im * &pb.re),
        );
        prop_assert_eq!(lhs, rhs);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn norm_decreases_in_b(p in 1i64..12, s1 in 1.1f64..2.0, s2 in 2.0f64..4.0) {
        let lambda = Rational::from((p, 4));
        let f = GrowthFunction::wave(lambda.clone());
        let b0 = lambda.to_f64();
        let e1 = bnorm_estimate(&f, s1 * b0, &SamplingGrid::default()).unwrap();
        let e2 = bnorm_estimate(&f, s2 * b0, &SamplingGrid::default()).unwrap();
        prop_assert!(e2.lower <= e1.lower && e2.upper <= e1.upper);
        prop_assert!(e1.lower <= e1.upper);
    }

    #[test]
    fn origin_value_is_one(n in 2usize..12, a in 11i64..19) {
        let a = Rational::from((a, 10));
        let z = solve_coefficients(&NodeSet::equispaced(n).unwrap(), &a);
        let g = vec![PowerSeries::monomial(2), PowerSeries::builtin(Builtin::Sin)];
        let p = MultivarProblem::new(z, g, Mode::Superoscillation, None, DEFAULT_TAIL_TOL).unwrap();
        let v = p.eval(&[Rational::new(), Rational::new()], 128).unwrap().value;
        let one = Complex::with_val(128, 1);
        prop_assert!(superosc::scalar::abs_f64(&Complex::with_val(128, &v - &one)) < 1e-30);
    }

    #[test]
    fn routes_agree_for_shift_problems(n in 2usize..10, a in 11i64..25, x in -8i64..=8) {
        let a = Rational::from((a, 10));
        let z = solve_coefficients(&NodeSet::equispaced(n).unwrap(), &a);
        let p = MultivarProblem::new(z, vec![PowerSeries::identity()], Mode::Superoscillation, None, DEFAULT_TAIL_TOL).unwrap();
        let r = dual_route_at_points(&p, &[vec![Rational::from((x, 8))]], 128).unwrap();
        prop_assert!(r.within_bounds, "{:?}", r);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn refined_grid_never_lowers_sup_error(a in 11i64..19, p in 3usize..6) {
        let family = ProblemFamily {
            nodes: NodeSpec::Scheme(NodeScheme::Equispaced),
            a: Rational::from((a, 10)),
            g: vec![PowerSeries::identity()],
            mode: Mode::Superoscillation,
            b: None,
            tail_tol: DEFAULT_TAIL_TOL,
        };
        let grid = GridSpec::symmetric(1, Rational::from(1), p).unwrap();
        let policy = PrecisionPolicy::default();
        let coarse = sweep(&family, &[4, 8], &grid, &policy, false).unwrap();
        let fine = sweep(&family, &[4, 8], &grid.refined(), &policy, false).unwrap();
        for (c, f) in coarse.sup_errors().iter().zip(fine.sup_errors()) {
            prop_assert!(f.unwrap() >= c.unwrap());
        }
        let again = sweep(&family, &[4, 8], &grid, &policy, false).unwrap();
        prop_assert_eq!(again.to_csv(), coarse.to_csv());
    }
}

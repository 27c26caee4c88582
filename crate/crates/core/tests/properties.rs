use proptest::prelude::*;
use takiff_toda::algebra::Component;
use takiff_toda::invariants::{evaluate_invariant, generator_specs};
use takiff_toda::sampling::{self, Support};
use takiff_toda::scalar::{rational, Rational};
use takiff_toda::series::series_coefficients;
use takiff_toda::{
    cartan_matrix, validate_cartan, CanonicalState, ExactElement, NilpotentGroupElement, Takiff,
};

fn case() -> impl Strategy<Value = (usize, usize)> {
    (1usize..=2, 0usize..=2)
}

fn basis(alg: &Takiff) -> Vec<ExactElement> {
    alg.components()
        .into_iter()
        .map(|Component { label, level }| alg.basis_element(label, level))
        .collect()
}

#[test]
fn jacobi_and_invariance_on_all_basis_triples() {
    for n in 1..=2 {
        for l in 0..=2 {
            let alg = Takiff::new(n, l).unwrap();
            let b = basis(&alg);
            for x in &b {
                for y in &b {
                    let xy = alg.bracket(x, y).unwrap();
                    let yx = alg.bracket(y, x).unwrap();
                    assert_eq!(xy, -&yx);
                    for z in &b {
                        let j = &(&alg.bracket(x, &alg.bracket(y, z).unwrap()).unwrap()
                            + &alg.bracket(y, &alg.bracket(z, x).unwrap()).unwrap())
                            + &alg.bracket(z, &xy).unwrap();
                        assert!(j.is_zero());
                        assert_eq!(
                            alg.q_form(&xy, z).unwrap(),
                            alg.q_form(x, &alg.bracket(y, z).unwrap()).unwrap()
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn grading_element_acts_by_height() {
    for n in 1..=3 {
        for l in 0..=2 {
            let alg = Takiff::new(n, l).unwrap();
            let ssx = alg.grading_element();
            for c in alg.components() {
                let x = alg.basis_element::<Rational>(c.label, c.level);
                let deg = rational(alg.degree(c.label), 1);
                assert_eq!(alg.bracket(&ssx, &x).unwrap(), x.scale(&deg));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jacobi_on_random_elements((n, l) in case(), seed in any::<u64>()) {
        let alg = Takiff::new(n, l).unwrap();
        let mut rng = sampling::rng(seed);
        let [x, y, z] = std::array::from_fn(|_| sampling::random_exact(&mut rng, &alg, Support::All));
        let cyc = |a: &ExactElement, b: &ExactElement, c: &ExactElement| {
            alg.bracket(a, &alg.bracket(b, c).unwrap()).unwrap()
        };
        let sum = &(&cyc(&x, &y, &z) + &cyc(&y, &z, &x)) + &cyc(&z, &x, &y);
        prop_assert!(sum.is_zero());
    }

    #[test]
    fn q_is_symmetric_and_invariant((n, l) in case(), seed in any::<u64>()) {
        let alg = Takiff::new(n, l).unwrap();
        let mut rng = sampling::rng(seed);
        let [x, y, z] = std::array::from_fn(|_| sampling::random_exact(&mut rng, &alg, Support::All));
        prop_assert_eq!(alg.q_form(&x, &y).unwrap(), alg.q_form(&y, &x).unwrap());
        prop_assert_eq!(
            alg.q_form(&alg.bracket(&x, &y).unwrap(), &z).unwrap(),
            alg.q_form(&x, &alg.bracket(&y, &z).unwrap()).unwrap()
        );
    }

    #[test]
    fn group_action_preserves_q_and_invariants((n, l) in case(), seed in any::<u64>()) {
        let alg = Takiff::new(n, l).unwrap();
        let mut rng = sampling::rng(seed);
        let a = NilpotentGroupElement::new(sampling::random_exact(&mut rng, &alg, Support::Nilradical)).unwrap();
        let x = sampling::random_exact(&mut rng, &alg, Support::All);
        let y = sampling::random_exact(&mut rng, &alg, Support::All);
        let ax = alg.group_apply(&a, &x).unwrap();
        let ay = alg.group_apply(&a, &y).unwrap();
        prop_assert_eq!(alg.q_form(&ax, &ay).unwrap(), alg.q_form(&x, &y).unwrap());
        prop_assert_eq!(alg.group_apply(&a.inverse(), &ax).unwrap(), x.clone());
        for spec in generator_specs(n, l) {
            prop_assert_eq!(evaluate_invariant(&alg, spec, &ax).unwrap(), evaluate_invariant(&alg, spec, &x).unwrap());
        }
    }

    #[test]
    fn q_star_is_positive_definite((n, l) in case(), seed in any::<u64>()) {
        let alg = Takiff::new(n, l).unwrap();
        let mut rng = sampling::rng(seed);
        let x = sampling::random_exact(&mut rng, &alg, Support::All);
        let y = sampling::random_exact(&mut rng, &alg, Support::All);
        let xx = alg.inner_product(&x, &x).unwrap();
        prop_assert_eq!(xx > rational(0, 1), !x.is_zero());
        prop_assert_eq!(alg.inner_product(&x, &y).unwrap(), alg.inner_product(&y, &x).unwrap());
        prop_assert_eq!(alg.star(&alg.star(&x)), x);
    }

    #[test]
    fn projection_kernel_is_nilradical((n, l) in case(), seed in any::<u64>()) {
        let alg = Takiff::new(n, l).unwrap();
        let mut rng = sampling::rng(seed);
        let x = sampling::random_exact(&mut rng, &alg, Support::All);
        let p = alg.project_bbar(&x);
        prop_assert!(p.in_bbar());
        prop_assert!((&x - &p).in_n());
        let u = sampling::random_exact(&mut rng, &alg, Support::OppositeBorel);
        prop_assert_eq!(alg.inner_product(&(&x - &p), &u).unwrap(), rational(0, 1));
    }

    #[test]
    fn registry_matrices_validate(series in prop::sample::select(vec!["A", "B", "C", "D"]), rank in 1usize..=6) {
        match cartan_matrix(series, rank) {
            Ok(m) => prop_assert!(validate_cartan(m.entries()).passed()),
            Err(_) => prop_assert!(matches!((series, rank), ("B" | "C", 1) | ("D", 1..=3))),
        }
    }

    #[test]
    fn canonical_coordinates_round_trip(
        rho0 in -3.0f64..3.0, rho1 in -3.0f64..3.0, phi0 in -3.0f64..3.0, phi1 in 0.01f64..5.0
    ) {
        let s = CanonicalState { rho0: vec![rho0], rho1: vec![rho1], phi0: vec![phi0], phi1: vec![phi1] };
        let back = CanonicalState::from_raw(&s.to_raw().unwrap()).unwrap();
        for (x, y) in s.flatten().iter().zip(back.flatten()) {
            prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
        }
    }

    #[test]
    fn exact_recurrence_has_zero_residual(p in prop::array::uniform4(-9i64..=9), q in 1i64..=9) {
        let r = |v| rational(v, q);
        let sol = series_coefficients(r(p[0]), r(p[1]), r(p[2]), r(p[3]), 12);
        for k in 0..=sol.order() - 3 {
            prop_assert_eq!(sol.recurrence_residual(k), rational(0, 1));
        }
    }

    #[test]
    fn float_recurrence_residual_is_rounding((a0, a1, a2, c0) in (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0)) {
        let sol = series_coefficients(a0, a1, a2, c0, 60);
        for k in 0..=sol.order() - 3 {
            let a = sol.coefficients[k + 3].abs().max(1e-300);
            prop_assert!(sol.recurrence_residual(k).abs() <= 1e-14 * a.max(1e-12));
        }
        prop_assert!(sol.margins.iter().all(|&(_, m)| m > 0.0));
    }
}

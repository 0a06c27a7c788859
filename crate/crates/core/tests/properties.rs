use cubic_core::counting::{
    lefschetz_number, per_count_closed, per_kappa_closed, zeta_coefficients, zeta_from_counts,
    Space,
};
use cubic_core::lattice::{
    class_of, coxeter_star, intersection, sigma_star, tritangent_class, CohomClass, LineLabel,
};
use cubic_core::lines::{all_lines, line_on_surface, DEFAULT_LINE_TOL};
use cubic_core::params::{
    discriminant, kappa_to_eigen, kappa_to_traces, rh_params, traces_from_eigen, traces_to_theta,
    wall_membership, EigenParams, KappaPoint, MonodromyTraces, WallMode,
};
use cubic_core::surface::{cubic, sigma, GeneratorLetter, GroupWord};
use cubic_core::Complex64;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use proptest::prelude::*;

fn complex(r: f64) -> impl Strategy<Value = Complex64> {
    (-r..r, -r..r).prop_map(|(a, b)| Complex64::new(a, b))
}

fn nonzero_complex() -> impl Strategy<Value = Complex64> {
    (0.3f64..3.0, -3.2f64..3.2).prop_map(|(m, arg)| Complex64::from_polar(m, arg))
}

fn rational() -> impl Strategy<Value = BigRational> {
    (-30i64..30, 1i64..12).prop_map(|(p, q)| BigRational::new(p.into(), q.into()))
}

fn scale(v: &[Complex64]) -> f64 {
    1.0 + v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn letter() -> impl Strategy<Value = GeneratorLetter> {
    prop_oneof![
        (1u8..=3).prop_map(GeneratorLetter::Sigma),
        (1u8..=3, any::<bool>()).prop_map(|(index, inverse)| GeneratorLetter::G { index, inverse }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn eigenvalues_reproduce_traces(k in proptest::array::uniform4(complex(1.5))) {
        let kp = KappaPoint::from_tail(k);
        let a = kappa_to_traces(&kp).0;
        let via_b = traces_from_eigen(&kappa_to_eigen(&kp)).unwrap().0;
        for (x, y) in a.iter().zip(&via_b) {
            prop_assert!((x - y).norm() < 1e-9 * scale(&a));
        }
    }

    #[test]
    fn discriminant_is_invariant_under_inversion(
        b in proptest::array::uniform4(nonzero_complex()),
        mask in 0u8..16,
    ) {
        let flipped: [Complex64; 4] =
            std::array::from_fn(|l| if mask & (1 << l) != 0 { b[l].inv() } else { b[l] });
        let d0 = discriminant(&EigenParams::new(b).unwrap());
        let d1 = discriminant(&EigenParams::new(flipped).unwrap());
        prop_assert!((d0 - d1).norm() <= 1e-8 * (1.0 + d0.norm()));
    }

    #[test]
    fn theta_map_is_equivariant_under_permuting_three_traces(
        a in proptest::array::uniform4(complex(2.0)),
        perm in 0usize..6,
    ) {
        const P: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let p = P[perm];
        let permuted = MonodromyTraces([a[p[0]], a[p[1]], a[p[2]], a[3]]);
        let t = traces_to_theta(&MonodromyTraces(a)).0;
        let tp = traces_to_theta(&permuted).0;
        for s in 0..3 {
            prop_assert!((tp[s] - t[p[s]]).norm() < 1e-12 * scale(&t));
        }
        prop_assert!((tp[3] - t[3]).norm() < 1e-12 * scale(&t));
    }

    #[test]
    fn involutions_preserve_the_cubic_exactly(
        x in proptest::array::uniform3(rational()),
        theta in proptest::array::uniform4(rational()),
        i in 1usize..=3,
    ) {
        let y = sigma(i, &x, &theta);
        prop_assert_eq!(cubic(&y, &theta), cubic(&x, &theta));
        prop_assert_eq!(sigma(i, &y, &theta), x);
    }

    #[test]
    fn words_compose_with_their_inverse_to_the_identity(
        letters in proptest::collection::vec(letter(), 0..8),
        x in proptest::array::uniform3(rational()),
        theta in proptest::array::uniform4(rational()),
    ) {
        let w = GroupWord::new(letters);
        let (y, t) = w.apply(&x, &theta);
        prop_assert_eq!(cubic(&y, &t), cubic(&x, &theta));
        let back = w.inverse().apply(&y, &t);
        prop_assert_eq!(back, (x, theta));
    }

    #[test]
    fn word_display_round_trips(letters in proptest::collection::vec(letter(), 0..10)) {
        let w = GroupWord::new(letters);
        let parsed: GroupWord = w.to_string().parse().unwrap();
        prop_assert_eq!(parsed, w);
    }

    #[test]
    fn count_identities_hold(n in 1u32..80) {
        let aff = per_count_closed(n, Space::Affine).unwrap();
        let proj = per_count_closed(n, Space::Projective).unwrap();
        prop_assert_eq!(&proj - &aff, BigInt::one());
        prop_assert_eq!(per_kappa_closed(n).unwrap(), per_count_closed(2 * n, Space::Affine).unwrap());
    }

    #[test]
    fn lefschetz_exceeds_projective_count_by_one(n in 1u32..40) {
        let l = lefschetz_number(n).unwrap();
        prop_assert!(l.agrees());
        prop_assert_eq!(l.from_trace - per_count_closed(n, Space::Projective).unwrap(), BigInt::one());
    }

    #[test]
    fn zeta_routes_agree(order in 1usize..16) {
        let a = zeta_coefficients(order);
        let b = zeta_from_counts(order);
        for (x, y) in a.iter().zip(&b) {
            prop_assert_eq!(&BigRational::from_integer(x.clone()), y);
        }
    }

    #[test]
    fn sigma_pullback_is_self_adjoint(
        u in proptest::array::uniform7(-5i64..5),
        v in proptest::array::uniform7(-5i64..5),
        g in 1usize..=3,
    ) {
        let s = sigma_star(g).unwrap();
        let (u, v) = (CohomClass::from_i64(u), CohomClass::from_i64(v));
        prop_assert_eq!(intersection(&s.apply(&u), &v), intersection(&u, &s.apply(&v)));
        // pull-back of the blown-down line vanishes
        prop_assert!(s.apply(&tritangent_class(g)).is_zero());
    }

    #[test]
    fn coxeter_pullback_is_the_composite_of_the_involutions(
        u in proptest::array::uniform7(-5i64..5),
    ) {
        let c = coxeter_star().unwrap();
        let s: Vec<_> = (1..=3).map(|g| sigma_star(g).unwrap()).collect();
        let u = CohomClass::from_i64(u);
        prop_assert_eq!(c.apply(&u), s[2].apply(&s[1].apply(&s[0].apply(&u))));
    }

    #[test]
    fn lines_are_minus_one_curves(a in 0usize..27) {
        let l = LineLabel::all()[a];
        let k = class_of(l);
        prop_assert_eq!(intersection(&k, &k), BigInt::from(-1));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn table_lines_lie_on_the_surface(
        num in proptest::array::uniform4(1i64..60),
    ) {
        let kappa = KappaPoint::from_fractions(num.map(|p| (p, 61)));
        prop_assume!(!wall_membership(&kappa, WallMode::Exact).unwrap().on_wall);
        let theta = rh_params(&kappa);
        for line in all_lines(&kappa_to_eigen(&kappa)).unwrap() {
            let chk = line_on_surface(&line, &theta, DEFAULT_LINE_TOL);
            prop_assert!(chk.on_surface, "{} residual {}", line, chk.max_residual);
        }
    }
}

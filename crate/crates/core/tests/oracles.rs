//! Independent recomputations of derived quantities.

use cubic_core::counting::{
    lefschetz_number, per_count_closed, per_kappa_closed, zeta_coefficients, Space,
};
use cubic_core::lattice::{charpoly, coxeter_star, sigma_star, trace_power, LatticeEndo, RANK};
use cubic_core::lines::{line_from_params, verify_sigma_line_action};
use cubic_core::params::{
    kappa_to_eigen, kappa_to_traces, random_generic_kappa, rh_params, traces_to_theta,
    EigenParams, KappaPoint,
};
use cubic_core::surface::{cubic, sigma};
use cubic_core::Complex64;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Q = BigRational;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Faddeev–LeVerrier over the rationals; coefficients lowest degree first.
fn faddeev_leverrier(m: &LatticeEndo) -> Vec<BigInt> {
    let a: Vec<Vec<Q>> = m
        .rows()
        .into_iter()
        .map(|r| r.into_iter().map(Q::from_integer).collect())
        .collect();
    let n = RANK;
    let matmul = |x: &Vec<Vec<Q>>, y: &Vec<Vec<Q>>| -> Vec<Vec<Q>> {
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).map(|k| &x[i][k] * &y[k][j]).sum())
                    .collect()
            })
            .collect()
    };
    let mut coeffs = vec![Q::zero(); n + 1];
    coeffs[n] = Q::one();
    let mut mk: Vec<Vec<Q>> = vec![vec![Q::zero(); n]; n];
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        let mut next = matmul(&a, &mk);
        for (i, row) in next.iter_mut().enumerate() {
            row[i] += &coeffs[n - k + 1];
        }
        mk = next;
        let am = matmul(&a, &mk);
        let tr: Q = (0..n).map(|i| am[i][i].clone()).sum();
        coeffs[n - k] = -tr / Q::from_integer(BigInt::from(k));
    }
    coeffs.into_iter().map(|q| q.to_integer()).collect()
}

#[test]
fn berkowitz_agrees_with_faddeev_leverrier() {
    let mut ms = vec![coxeter_star().unwrap(), LatticeEndo::identity()];
    for g in 1..=3 {
        ms.push(sigma_star(g).unwrap());
    }
    let c = coxeter_star().unwrap();
    ms.push(c.mul(&c));
    for m in ms {
        assert_eq!(charpoly(&m).coeffs(), faddeev_leverrier(&m).as_slice());
    }
}

#[test]
fn coxeter_charpoly_coefficients() {
    // x^7 - 11x^5 - 24x^4 - 21x^3 - 8x^2 - x
    let expected: Vec<BigInt> = [0, -1, -8, -21, -24, -11, 0, 1].map(BigInt::from).to_vec();
    assert_eq!(faddeev_leverrier(&coxeter_star().unwrap()), expected);
}

#[test]
fn traces_of_small_powers() {
    let c = coxeter_star().unwrap();
    assert_eq!(trace_power(&c, 1), BigInt::from(0));
    assert_eq!(trace_power(&c, 2), BigInt::from(22));
    // power sums of the roots 0, -1 (×4), 2±√5
    for n in 1..=12u32 {
        let s5 = 5f64.sqrt();
        let expected = 4.0 * (-1f64).powi(n as i32) + (2.0 + s5).powi(n as i32) + (2.0 - s5).powi(n as i32);
        let got = trace_power(&c, n).to_f64().unwrap();
        assert!((got - expected).abs() < 1e-9 * expected.abs().max(1.0), "n={n}");
    }
}

#[test]
fn lefschetz_and_counts_from_floats() {
    let s5 = 5f64.sqrt();
    for n in 1..=20u32 {
        let surd = (2.0 + s5).powi(n as i32) + (2.0 - s5).powi(n as i32);
        let sign = if n % 2 == 0 { 4.0 } else { -4.0 };
        let l = lefschetz_number(n).unwrap().from_trace.to_f64().unwrap();
        assert!((l - (surd + sign + 2.0)).abs() < 1e-9 * l.abs().max(1.0));
        let aff = per_count_closed(n, Space::Affine).unwrap().to_f64().unwrap();
        assert!((aff - (surd + sign)).abs() < 1e-9 * aff.abs().max(1.0));
    }
    for n in 1..=10u32 {
        let r = 9.0 + 4.0 * s5;
        let v = r.powi(n as i32) + r.powi(-(n as i32)) + 4.0;
        let got = per_kappa_closed(n).unwrap().to_f64().unwrap();
        assert!((got - v).abs() < 1e-9 * v);
    }
}

#[test]
fn named_count_values() {
    assert_eq!(lefschetz_number(1).unwrap().from_trace, BigInt::from(2));
    assert_eq!(lefschetz_number(2).unwrap().from_trace, BigInt::from(24));
    assert_eq!(lefschetz_number(3).unwrap().from_trace, BigInt::from(74));
    let aff = |n| per_count_closed(n, Space::Affine).unwrap();
    assert_eq!([aff(1), aff(2), aff(3), aff(4)], [0, 22, 72, 326].map(BigInt::from));
    assert_eq!(per_kappa_closed(1).unwrap(), BigInt::from(22));
    assert_eq!(per_kappa_closed(2).unwrap(), BigInt::from(326));
}

#[test]
fn zeta_by_convolving_the_two_factors() {
    // 1/(1-z)^4 = Σ C(n+3, 3) z^n; 1/(1-18z+z²) = Σ u_n z^n, u_n = 18u_{n-1} - u_{n-2}
    let order = 12;
    let binom: Vec<BigInt> = (0..=order as i64)
        .map(|n| BigInt::from((n + 1) * (n + 2) * (n + 3) / 6))
        .collect();
    let mut u = vec![BigInt::one(), BigInt::from(18)];
    while u.len() <= order {
        let k = u.len();
        let next = &u[k - 1] * 18 - &u[k - 2];
        u.push(next);
    }
    let conv: Vec<BigInt> = (0..=order)
        .map(|n| (0..=n).map(|k| &binom[k] * &u[n - k]).sum())
        .collect();
    assert_eq!(zeta_coefficients(order), conv);
    assert_eq!(conv[2], BigInt::from(405));
}

#[test]
fn theta_of_a_hand_computed_point() {
    // κ = (1/2, 1/3, 1/4, 1/6): a = (0, 1, √2, -√3)
    let k = KappaPoint::from_fractions([(1, 2), (1, 3), (1, 4), (1, 6)]);
    let a = kappa_to_traces(&k).0;
    let (s2, s3) = (2f64.sqrt(), 3f64.sqrt());
    let want = [0.0, 1.0, s2, -s3];
    for (x, w) in a.iter().zip(want) {
        assert!((x - c(w)).norm() < 1e-14);
    }
    let th = traces_to_theta(&kappa_to_traces(&k)).0;
    // θ1 = a1a4 + a2a3, θ2 = a2a4 + a3a1, θ3 = a3a4 + a1a2, θ4 = Πa + Σa² - 4
    let want = [s2, -s3, -s2 * s3, 2.0];
    for (x, w) in th.iter().zip(want) {
        assert!((x - c(w)).norm() < 1e-13, "{x} vs {w}");
    }
}

#[test]
fn line_forms_by_hand() {
    let b = EigenParams::new([2.0, 3.0, 5.0, 7.0].map(c)).unwrap();
    let l = line_from_params(1, 1, &b).unwrap();
    let [f1, f2] = *l.forms();
    assert!((f1[0] + c(14.0 + 1.0 / 14.0)).norm() < 1e-13);
    assert_eq!([f1[1], f1[2], f1[3]], [c(1.0), c(0.0), c(0.0)]);
    // X2 + 14 X3 - (2 (5 + 1/5) + 7 (3 + 1/3)) X0
    assert!((f2[0] + c(2.0 * 5.2 + 7.0 * 10.0 / 3.0)).norm() < 1e-12);
    assert_eq!([f2[1], f2[2]], [c(0.0), c(1.0)]);
    assert!((f2[3] - c(14.0)).norm() < 1e-13);
    // the paired slot inverts the first two arguments
    let l2 = line_from_params(1, 2, &b).unwrap();
    assert!((l2.forms()[0][0] + c(14.0 + 1.0 / 14.0)).norm() < 1e-13);
    assert!((l2.forms()[1][3] - c(1.0 / 14.0)).norm() < 1e-13);
}

#[test]
fn quadratic_roots_are_fixed_by_the_involution() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..5 {
        let k = random_generic_kappa(&mut rng, 53, 1e-3);
        let theta = rh_params(&k);
        let rep = verify_sigma_line_action(&kappa_to_eigen(&k), 1e-8).unwrap();
        for q in &rep.quadratics {
            for x in &q.points {
                let y = sigma(q.involution as usize, x, &theta.0);
                let gap = (0..3).map(|a| (x[a] - y[a]).norm()).fold(0.0, f64::max);
                assert!(gap < 1e-8 * (1.0 + x.iter().map(|v| v.norm()).fold(0.0, f64::max)));
                assert!(cubic(x, &theta.0).norm() < 1e-8);
            }
        }
        for t in &rep.transverse {
            assert!(cubic(&t.point, &theta.0).norm() < 1e-8);
        }
    }
}

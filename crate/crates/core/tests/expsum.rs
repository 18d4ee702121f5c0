use nilcircle::expsum::{
    continuous_profile_j, decay_fit, gauss_scan, gauss_sum_complete, nil_gauss_sum, nil_weyl_sum, nil_weyl_sum_brute,
    weyl_sum, weyl_sum_rational, SumMethod, Weight,
};
use nilcircle::group::{GroupShape, WordVariant};
use nilcircle::rational::RationalVector;
use num_complex::Complex64;
use proptest::prelude::*;

fn direct(a: &[i128], q: i128) -> Complex64 {
    (0..q)
        .map(|n| {
            let mut ph = 0i128;
            let mut pw = 1i128;
            for c in a {
                pw = pw * n % q;
                ph = (ph + c * pw) % q;
            }
            Complex64::from_polar(1.0, -std::f64::consts::TAU * ph as f64 / q as f64)
        })
        .sum::<Complex64>()
        / q as f64
}

proptest! {
    #[test]
    fn complete_sum_matches_direct(a in prop::collection::vec(0i128..200, 1..=4), q in 1i128..=60) {
        let v = gauss_sum_complete(&RationalVector::new(a.clone(), q).unwrap()).unwrap();
        prop_assert!((v - direct(&a, q)).norm() < 1e-10);
        prop_assert!(v.norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn chinese_remainder_factorisation(a in prop::collection::vec(0i128..50, 2), b in prop::collection::vec(0i128..50, 2), q1 in 2i128..=15, q2 in 2i128..=15) {
        prop_assume!(num_integer::gcd(q1, q2) == 1);
        let joint: Vec<i128> = a.iter().zip(&b).map(|(x, y)| x * q2 + y * q1).collect();
        let lhs = gauss_sum_complete(&RationalVector::new(joint, q1 * q2).unwrap()).unwrap();
        let rhs = gauss_sum_complete(&RationalVector::new(a, q1).unwrap()).unwrap()
            * gauss_sum_complete(&RationalVector::new(b, q2).unwrap()).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-10);
    }

    #[test]
    fn rational_phases_agree(a in prop::collection::vec(0i128..97, 2), q in 2i128..=97, p in 5.0f64..200.0) {
        let rv = RationalVector::new(a, q).unwrap();
        let w = |n: i64| Weight::Smooth.eval(n, p);
        let exact = weyl_sum_rational(w, p, &rv).unwrap();
        let float = weyl_sum(w, p, &rv.to_f64()).unwrap();
        prop_assert!((exact - float).norm() < 1e-8 * p);
    }
}

#[test]
fn trivial_phase_counts_points() {
    let v = weyl_sum(|n| Weight::Sharp.eval(n, 10.5), 10.5, &[0.0, 0.0]).unwrap();
    assert!((v - Complex64::new(21.0, 0.0)).norm() < 1e-12);
    assert!(weyl_sum(|_| 1.0, 0.5, &[0.1]).is_err());
}

#[test]
fn quadratic_scan_follows_square_root_law() {
    let primes = [5i128, 7, 11, 13, 17, 19, 23, 29, 31];
    let rows = gauss_scan(2, &primes).unwrap();
    for row in &rows {
        assert!((row.max_modulus - (row.q as f64).powf(-0.5)).abs() < 1e-9, "{row:?}");
        assert_eq!(row.count as i128, row.q * row.q - 1);
    }
    let fit = decay_fit(&rows.iter().map(|r| (r.q as f64, r.max_modulus)).collect::<Vec<_>>()).unwrap();
    assert!((fit.slope + 0.5).abs() < 1e-6);
    assert!(decay_fit(&[(1.0, 1.0), (2.0, 0.5)]).is_err());
}

#[test]
fn nil_gauss_methods_agree_in_degree_three() {
    let s = GroupShape::new(3).unwrap();
    for q in 2..=3i128 {
        for a in [vec![1, 0, 0, 0, 0, 0], vec![0, 1, 0, 2, 0, 1], vec![1, 1, 1, 1, 1, 1]] {
            let rv = RationalVector::new(a, q).unwrap();
            for v in [WordVariant::D, WordVariant::DTilde] {
                let dp = nil_gauss_sum(s, &rv, 1, v, SumMethod::Dp).unwrap();
                let brute = nil_gauss_sum(s, &rv, 1, v, SumMethod::Brute).unwrap();
                assert!((dp - brute).norm() < 1e-12, "q={q} {v:?}");
                assert!(dp.norm() <= 1.0 + 1e-12);
            }
        }
    }
}

#[test]
fn nil_gauss_sum_at_zero_is_one() {
    let s = GroupShape::new(2).unwrap();
    let v = nil_gauss_sum(s, &RationalVector::zero(3), 2, WordVariant::D, SumMethod::Dp).unwrap();
    assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    assert!(nil_gauss_sum(s, &RationalVector::zero(2), 1, WordVariant::D, SumMethod::Dp).is_err());
}

#[test]
fn nil_weyl_sum_matches_brute_force() {
    let s = GroupShape::new(2).unwrap();
    let theta = [0.137, 0.291, 0.0713];
    let phi = |n: i64| Weight::Smooth.eval(n, 4.0);
    for r in 1..=2 {
        for v in [WordVariant::D, WordVariant::DTilde] {
            let fast = nil_weyl_sum(s, 4, r, &theta, v, phi, phi).unwrap();
            let brute = nil_weyl_sum_brute(s, 4, r, &theta, v, phi, phi).unwrap();
            assert!((fast - brute).norm() < 1e-9 * brute.norm().max(1.0), "r={r} {v:?}: {fast} vs {brute}");
        }
    }
}

#[test]
fn profile_masses() {
    let j0 = continuous_profile_j(2.0, &[0.0, 0.0], 0).unwrap();
    assert!((j0.re - 3.0).abs() < 1e-9 && j0.im.abs() < 1e-12);
    let j1 = continuous_profile_j(2.0, &[0.0, 0.0], 1).unwrap();
    assert!(j1.norm() < 1e-9);
    let far = continuous_profile_j(2.0, &[40.0, 0.0], 0).unwrap();
    assert!(far.norm() < 1e-3);
}

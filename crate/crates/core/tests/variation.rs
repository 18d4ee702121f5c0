use nilcircle::variation::{
    rademacher_menshov, rademacher_menshov_rhs, variation, variation_tilde, IndexedSequence, Seminorm,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn reals(max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, 1..=max)
}

// sup over all increasing index subsets, by enumeration
fn brute(a: &[f64], rho: f64) -> f64 {
    let n = a.len();
    let mut best = 0.0f64;
    for mask in 0u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        best = best.max(idx.windows(2).map(|w| (a[w[1]] - a[w[0]]).abs().powf(rho)).sum());
    }
    best.powf(1.0 / rho)
}

proptest! {
    #[test]
    fn dp_is_exhaustive(a in reals(10), rho in 1.0f64..6.0) {
        let dp = variation(&IndexedSequence::from_reals(&a), rho).unwrap();
        let b = brute(&a, rho);
        prop_assert!((dp - b).abs() <= 1e-12 * b.max(1.0));
    }

    #[test]
    fn bounds(a in reals(30), rho in 1.0f64..6.0) {
        let s = IndexedSequence::from_reals(&a);
        let v = variation(&s, rho).unwrap();
        let jump = Seminorm::JumpSup.eval(&s).unwrap();
        let total: f64 = a.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
        prop_assert!(v >= jump - 1e-12);
        prop_assert!(v <= total + 1e-9);
        prop_assert!((variation(&s, 1.0).unwrap() - total).abs() < 1e-9);
        prop_assert!((variation_tilde(&s, rho).unwrap() - s.sup() - v).abs() < 1e-12);
    }

    #[test]
    fn monotone_in_rho(a in reals(25), r1 in 1.0f64..8.0, r2 in 1.0f64..8.0) {
        let s = IndexedSequence::from_reals(&a);
        let (lo, hi) = if r1 < r2 { (r1, r2) } else { (r2, r1) };
        prop_assert!(variation(&s, hi).unwrap() <= variation(&s, lo).unwrap() * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn shift_and_scale(a in reals(20), c in -5.0f64..5.0, lam in -3.0f64..3.0, rho in 1.0f64..4.0) {
        let v = variation(&IndexedSequence::from_reals(&a), rho).unwrap();
        let moved: Vec<f64> = a.iter().map(|x| lam * x + c).collect();
        let w = variation(&IndexedSequence::from_reals(&moved), rho).unwrap();
        prop_assert!((w - lam.abs() * v).abs() <= 1e-9 * (1.0 + w));
    }

    #[test]
    fn restriction_never_increases(a in reals(30), lo in 0i64..15, len in 0i64..15, rho in 1.0f64..4.0) {
        let s = IndexedSequence::from_reals(&a);
        prop_assert!(variation(&s.restrict(lo, lo + len), rho).unwrap() <= variation(&s, rho).unwrap() + 1e-12);
    }

    #[test]
    fn tilde_is_a_norm(a in prop::collection::vec(-5.0f64..5.0, 12), b in prop::collection::vec(-5.0f64..5.0, 12), rho in 1.0f64..5.0) {
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let vt = |v: &[f64]| variation_tilde(&IndexedSequence::from_reals(v), rho).unwrap();
        prop_assert!(vt(&sum) <= vt(&a) + vt(&b) + 1e-9);
    }

    #[test]
    fn sup_sandwich(a in reals(20), t0 in 0usize..20, rho in 1.0f64..5.0) {
        let s = IndexedSequence::from_reals(&a);
        let t0 = t0 % a.len();
        prop_assert!(s.sup() <= a[t0].abs() + variation(&s, rho).unwrap() + 1e-12);
    }

    #[test]
    fn split_intervals(a in reals(24), cut in 0i64..24, rho in 1.0f64..6.0) {
        // I1 and I2 share the boundary point
        let s = IndexedSequence::from_reals(&a);
        let cut = cut % a.len() as i64;
        let vt = |q: &IndexedSequence| variation_tilde(q, rho).unwrap();
        let whole = vt(&s);
        prop_assert!(whole <= vt(&s.restrict(0, cut)) + vt(&s.restrict(cut, a.len() as i64)) + 1e-9);
    }

    #[test]
    fn dominated_by_l_rho(a in reals(20), rho in 1.0f64..6.0) {
        let s = IndexedSequence::from_reals(&a);
        let norm = a.iter().map(|v| v.abs().powf(rho)).sum::<f64>().powf(1.0 / rho);
        prop_assert!(variation(&s, rho).unwrap() <= 2.0 * norm + 1e-9);
        prop_assert!(variation_tilde(&s, rho).unwrap() <= 3.0 * norm + 1e-9);
    }

    #[test]
    fn rademacher_menshov_holds(m in 1u32..=6, seed in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 65), j0f in 0.0f64..1.0, rho in 2.0f64..10.0) {
        let len = (1usize << m) + 1;
        let vals: Vec<Complex64> = seed[..len].iter().map(|(a, b)| Complex64::new(*a, *b)).collect();
        let s = IndexedSequence::new((0..len as i64).collect(), vals).unwrap();
        let j0 = ((j0f * (1u64 << m) as f64) as i64).min((1 << m) - 1);
        let (lhs, rhs) = rademacher_menshov(&s, j0, m, rho).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-12));
    }
}

#[test]
fn sparse_indices() {
    let s = IndexedSequence::new(vec![-5, 0, 7], vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, 3.0), Complex64::new(4.0, 3.0)])
        .unwrap();
    // path -5 -> 0 -> 7 has jumps 3 and 4
    assert!((variation(&s, 2.0).unwrap() - 5.0).abs() < 1e-12);
    assert!((variation(&s, 1.0).unwrap() - 7.0).abs() < 1e-12);
    assert_eq!(s.get(7), Some(Complex64::new(4.0, 3.0)));
    assert_eq!(s.get(1), None);
    // index 1 is missing, so the dyadic square function cannot be formed
    assert!(rademacher_menshov_rhs(&s, 0, 2).is_err());
}

#[test]
fn rho_infinity_is_the_jump_seminorm() {
    let s = IndexedSequence::from_reals(&[0.0, 2.0, -1.0, 1.0]);
    let n = Seminorm::from_rho(f64::INFINITY).unwrap();
    assert_eq!(n.eval(&s).unwrap(), 3.0);
    assert_eq!(n.label(), "jump_sup");
    assert!(Seminorm::from_rho(0.9).is_err());
    assert!(Seminorm::from_rho(f64::NAN).is_err());
    let big = variation(&s, 200.0).unwrap();
    assert!((big - 3.0).abs() < 0.05);
}

#[test]
fn l_rho_constant_two_is_not_enough() {
    // sup = 1 and V^2 = 2, while 2 ||a||_2 = 2 sqrt 2
    let s = IndexedSequence::from_reals(&[1.0, -1.0]);
    let vt = variation_tilde(&s, 2.0).unwrap();
    assert!((vt - 3.0).abs() < 1e-12);
    assert!(vt > 2.0 * 2f64.sqrt());
}

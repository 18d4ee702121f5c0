use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{chunked_sum, e_neg, roots_of_unity, Weight};
use crate::error::{Error, Result};
use crate::rational::{enumerate_rationals, RationalSet, RationalVector};

/// Largest modulus accepted by the complete sums.
pub const MAX_MODULUS: i128 = 1 << 40;

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::invalid(format!("P must be >= 1, got {p}")));
    }
    Ok(())
}

/// `sum_n phi(n) e(-(theta_1 n + .. + theta_d n^d))` over `|n| <= 2P`.
pub fn weyl_sum(weight: impl Fn(i64) -> f64 + Sync, p: f64, theta: &[f64]) -> Result<Complex64> {
    check_p(p)?;
    if theta.iter().any(|t| !t.is_finite()) {
        return Err(Error::invalid("theta must be finite"));
    }
    let reach = (2.0 * p).floor() as i64;
    let n_terms = (2 * reach + 1) as u64;
    Ok(chunked_sum(n_terms, |i| {
        let n = i as i64 - reach;
        let w = weight(n);
        if w == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        // Horner mod 1
        let mut acc = 0.0f64;
        for t in theta.iter().rev() {
            acc = (acc + t).rem_euclid(1.0);
            acc = super::frac_mul(acc, n as i128);
        }
        e_neg(acc) * w
    }))
}

/// `n -> sum_l a_l n^l mod q`.
fn poly_residue(a: &[i128], q: i128, n: i128) -> usize {
    let n = n.rem_euclid(q);
    let mut acc = 0i128;
    for &c in a.iter().rev() {
        acc = ((acc + c) % q * n) % q;
    }
    acc as usize
}

fn check_modulus(q: i128) -> Result<()> {
    if q < 1 {
        return Err(Error::invalid(format!("modulus must be >= 1, got {q}")));
    }
    if q > MAX_MODULUS {
        return Err(Error::infeasible(format!("modulus {q} exceeds {MAX_MODULUS}")));
    }
    Ok(())
}

/// [`weyl_sum`] at `theta = a / q` with exact phases.
pub fn weyl_sum_rational(weight: impl Fn(i64) -> f64 + Sync, p: f64, a: &RationalVector) -> Result<Complex64> {
    check_p(p)?;
    let q = a.denominator();
    check_modulus(q)?;
    let reach = (2.0 * p).floor() as i64;
    let roots = (q <= 1 << 22).then(|| roots_of_unity(q as u64));
    Ok(chunked_sum((2 * reach + 1) as u64, |i| {
        let n = i as i64 - reach;
        let w = weight(n);
        if w == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let k = poly_residue(a.numerators(), q, n as i128);
        let z = match &roots {
            Some(r) => r[k],
            None => e_neg(k as f64 / q as f64),
        };
        z * w
    }))
}

/// `S(a/q) = q^{-1} sum_{n mod q} e(-(a_1 n + .. + a_d n^d) / q)`.
pub fn gauss_sum_complete(a: &RationalVector) -> Result<Complex64> {
    let q = a.denominator();
    check_modulus(q)?;
    let roots = (q <= 1 << 22).then(|| roots_of_unity(q as u64));
    let total = chunked_sum(q as u64, |n| {
        let k = poly_residue(a.numerators(), q, n as i128);
        match &roots {
            Some(r) => r[k],
            None => e_neg(k as f64 / q as f64),
        }
    });
    Ok(total / q as f64)
}

/// One row of a Gauss-sum scan over all reduced `a / q` with fixed `q`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussScanRow {
    pub q: i128,
    pub count: usize,
    pub max_modulus: f64,
    pub argmax: Vec<i128>,
}

pub fn gauss_scan(d: usize, qs: &[i128]) -> Result<Vec<GaussScanRow>> {
    if d == 0 {
        return Err(Error::invalid("d must be >= 1"));
    }
    qs.iter()
        .map(|&q| {
            check_modulus(q)?;
            let set = RationalSet::DenominatorRange { m: d, q_lo: q, q_hi: q };
            let points = enumerate_rationals(&set)?;
            let mut best = (0.0f64, vec![0i128; d]);
            for a in &points {
                let s = gauss_sum_complete(a)?.norm();
                if s > best.0 + 1e-15 {
                    best = (s, a.numerators().to_vec());
                }
            }
            Ok(GaussScanRow { q, count: points.len(), max_modulus: best.0, argmax: best.1 })
        })
        .collect()
}

/// One row of a minor-arc Weyl scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeylScanRow {
    pub p: u64,
    pub theta: RationalVector,
    pub normalized: f64,
    pub weight: String,
}

fn next_prime(n: u64) -> u64 {
    let is_prime = |m: u64| m >= 2 && (2..).take_while(|f| f * f <= m).all(|f| m % f != 0);
    (n.max(2)..).find(|&m| is_prime(m)).expect("primes are unbounded")
}

/// `|S| / P` at `theta = a / q` with `q` the least prime `>= sqrt(P)`, so that
/// `q` lies in `[P^{1/4}, P^{3/4}]`; the numerators follow the golden-ratio
/// sequence and the leading one is non-zero.
pub fn weyl_scan(weight: Weight, d: usize, ps: &[u64]) -> Result<Vec<WeylScanRow>> {
    if d == 0 {
        return Err(Error::invalid("d must be >= 1"));
    }
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    ps.iter()
        .map(|&p| {
            let q = next_prime((p as f64).sqrt().ceil() as u64) as i128;
            let mut a: Vec<i128> = (1..=d).map(|l| ((l as f64 * golden).fract() * q as f64) as i128).collect();
            if a[d - 1] == 0 {
                a[d - 1] = 1;
            }
            let theta = RationalVector::new(a, q)?;
            let pf = p as f64;
            let s = weyl_sum_rational(|n| weight.eval(n, pf), pf, &theta)?;
            Ok(WeylScanRow { p, theta, normalized: s.norm() / pf, weight: weight.label() })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rv(a: &[i128], q: i128) -> RationalVector {
        RationalVector::new(a.to_vec(), q).unwrap()
    }

    #[test]
    fn gauss_examples() {
        assert!(gauss_sum_complete(&rv(&[1, 0], 2)).unwrap().norm() < 1e-15);
        let s = gauss_sum_complete(&rv(&[0, 1], 3)).unwrap();
        assert!((s - Complex64::new(0.0, -1.0 / 3f64.sqrt())).norm() < 1e-12);
        assert!((gauss_sum_complete(&rv(&[0, 0], 1)).unwrap() - 1.0).norm() < 1e-15);
    }

    #[test]
    fn weyl_examples() {
        let sharp = |n: i64| if n.abs() <= 5 { 1.0 } else { 0.0 };
        let s = weyl_sum(sharp, 5.0, &[0.0]).unwrap();
        assert!((s - 11.0).norm() < 1e-12);
        let s = weyl_sum(sharp, 5.0, &[0.5]).unwrap();
        assert!((s.re.abs() - 1.0).abs() < 1e-12 && s.im.abs() < 1e-12);
        let r = weyl_sum_rational(sharp, 5.0, &rv(&[1], 2)).unwrap();
        assert!((r - s).norm() < 1e-12);
        assert!(weyl_sum(sharp, 0.5, &[0.0]).is_err());
    }

    #[test]
    fn real_and_rational_agree() {
        let w = |n: i64| Weight::Smooth.eval(n, 40.0);
        let a = rv(&[3, 5], 17);
        let x = weyl_sum(w, 40.0, &a.to_f64()).unwrap();
        let y = weyl_sum_rational(w, 40.0, &a).unwrap();
        assert!((x - y).norm() < 1e-9);
    }

    #[test]
    fn prime_scan() {
        let rows = gauss_scan(2, &[5, 7]).unwrap();
        for r in rows {
            assert!((r.max_modulus - (r.q as f64).powf(-0.5)).abs() < 1e-9);
        }
    }
}

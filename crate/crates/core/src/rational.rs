//! Reduced rational vectors mod 1 and the Farey-type families
//! `R_s^m = {a/q : q in [tau^s, tau^{s+1}), gcd(a_1, .., a_m, q) = 1}` and
//! `R~_Q^m = {a/Q : a in [0, Q-1]^m}`.

use std::collections::BTreeSet;
use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `a / q` with every numerator in `[0, q)` and `gcd(a, q) = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RationalVector {
    numerators: Vec<i128>,
    denominator: i128,
}

impl RationalVector {
    /// Reduces `a / q` mod 1 and to lowest terms.
    pub fn new(numerators: Vec<i128>, denominator: i128) -> Result<Self> {
        if denominator < 1 {
            return Err(Error::invalid(format!("denominator must be >= 1, got {denominator}")));
        }
        let mut a: Vec<i128> = numerators.iter().map(|v| v.rem_euclid(denominator)).collect();
        let g = a.iter().fold(denominator, |g, v| g.gcd(v));
        for v in a.iter_mut() {
            *v /= g;
        }
        Ok(RationalVector { numerators: a, denominator: denominator / g })
    }

    pub fn zero(m: usize) -> Self {
        RationalVector { numerators: vec![0; m], denominator: 1 }
    }

    pub fn numerators(&self) -> &[i128] {
        &self.numerators
    }

    pub fn denominator(&self) -> i128 {
        self.denominator
    }

    pub fn dim(&self) -> usize {
        self.numerators.len()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.numerators.iter().map(|a| *a as f64 / self.denominator as f64).collect()
    }

    /// Numerators over the common denominator `big`; `big` must be a multiple of `q`.
    pub fn numerators_over(&self, big: i128) -> Option<Vec<i128>> {
        (big % self.denominator == 0).then(|| self.numerators.iter().map(|a| a * (big / self.denominator)).collect())
    }
}

impl fmt::Display for RationalVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.numerators.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")/{}", self.denominator)
    }
}

/// A finite, 1-periodic set of rational vectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum RationalSet {
    /// `R_s^m`.
    Farey { m: usize, s: u32, tau: f64 },
    /// `R~_Q^m`.
    FixedDenominator { m: usize, q: i128 },
    /// Reduced fractions with denominator in `[q_lo, q_hi]`.
    DenominatorRange { m: usize, q_lo: i128, q_hi: i128 },
    Union { sets: Vec<RationalSet> },
    Difference { keep: Box<RationalSet>, remove: Box<RationalSet> },
    Explicit { m: usize, points: Vec<RationalVector> },
}

/// Cap on the number of candidate fractions generated while enumerating.
pub const ENUMERATION_LIMIT: u128 = 50_000_000;

/// Integers `q` with `tau^s <= q < tau^{s+1}`.
pub fn farey_denominators(s: u32, tau: f64) -> (i128, i128) {
    let lo = tau.powi(s as i32);
    let hi = tau.powi(s as i32 + 1);
    let mut q_lo = lo.ceil() as i128;
    if ((q_lo - 1) as f64) >= lo {
        q_lo -= 1;
    }
    let mut q_hi = hi.ceil() as i128 - 1;
    if ((q_hi + 1) as f64) < hi {
        q_hi += 1;
    }
    (q_lo.max(1), q_hi)
}

impl RationalSet {
    pub fn dim(&self) -> usize {
        match self {
            RationalSet::Farey { m, .. }
            | RationalSet::FixedDenominator { m, .. }
            | RationalSet::DenominatorRange { m, .. }
            | RationalSet::Explicit { m, .. } => *m,
            RationalSet::Union { sets: v } => v.first().map(|s| s.dim()).unwrap_or(0),
            RationalSet::Difference { keep: a, .. } => a.dim(),
        }
    }

    fn check(&self) -> Result<()> {
        match self {
            RationalSet::Farey { tau, .. } if !(*tau > 1.0 && *tau <= 2.0) => {
                Err(Error::invalid(format!("tau must lie in (1, 2], got {tau}")))
            }
            RationalSet::FixedDenominator { q, .. } if *q < 1 => {
                Err(Error::invalid(format!("denominator must be >= 1, got {q}")))
            }
            RationalSet::Union { sets: v } => {
                let m = self.dim();
                for s in v {
                    s.check()?;
                    if s.dim() != m {
                        return Err(Error::ShapeMismatch { expected: m, found: s.dim() });
                    }
                }
                Ok(())
            }
            RationalSet::Difference { keep: a, remove: b } => {
                a.check()?;
                b.check()?;
                if a.dim() != b.dim() {
                    return Err(Error::ShapeMismatch { expected: a.dim(), found: b.dim() });
                }
                Ok(())
            }
            RationalSet::Explicit { m, points } => {
                for p in points {
                    if p.dim() != *m {
                        return Err(Error::ShapeMismatch { expected: *m, found: p.dim() });
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

fn budget(m: usize, q: i128) -> Result<()> {
    let count = (q as u128).checked_pow(m as u32).unwrap_or(u128::MAX);
    if count > ENUMERATION_LIMIT {
        return Err(Error::infeasible(format!("enumerating {q}^{m} fractions exceeds the limit")));
    }
    Ok(())
}

/// Every `a` in `[0, q)^m`, lexicographic.
pub fn residue_vectors(m: usize, q: i128) -> impl Iterator<Item = Vec<i128>> {
    let total = (q as u128).pow(m as u32);
    (0..total).map(move |mut idx| {
        let mut v = vec![0i128; m];
        for c in v.iter_mut().rev() {
            *c = (idx % q as u128) as i128;
            idx /= q as u128;
        }
        v
    })
}

fn reduced_with_denominator(m: usize, q: i128, out: &mut BTreeSet<RationalVector>) -> Result<()> {
    budget(m, q)?;
    for a in residue_vectors(m, q) {
        if a.iter().fold(q, |g, v| g.gcd(v)) == 1 {
            out.insert(RationalVector { numerators: a, denominator: q });
        }
    }
    Ok(())
}

fn collect(set: &RationalSet, out: &mut BTreeSet<RationalVector>) -> Result<()> {
    match set {
        RationalSet::Farey { m, s, tau } => {
            let (lo, hi) = farey_denominators(*s, *tau);
            for q in lo..=hi {
                reduced_with_denominator(*m, q, out)?;
            }
        }
        RationalSet::DenominatorRange { m, q_lo, q_hi } => {
            for q in (*q_lo).max(1)..=*q_hi {
                reduced_with_denominator(*m, q, out)?;
            }
        }
        RationalSet::FixedDenominator { m, q } => {
            budget(*m, *q)?;
            for a in residue_vectors(*m, *q) {
                out.insert(RationalVector::new(a, *q)?);
            }
        }
        RationalSet::Union { sets: v } => {
            for s in v {
                collect(s, out)?;
            }
        }
        RationalSet::Difference { keep: a, remove: b } => {
            let mut left = BTreeSet::new();
            let mut right = BTreeSet::new();
            collect(a, &mut left)?;
            collect(b, &mut right)?;
            out.extend(left.difference(&right).cloned());
        }
        RationalSet::Explicit { points, .. } => out.extend(points.iter().cloned()),
    }
    Ok(())
}

/// All reduced representatives in `[0, 1)^m`, sorted by `(numerators, q)`.
pub fn enumerate_rationals(set: &RationalSet) -> Result<Vec<RationalVector>> {
    set.check()?;
    let mut out = BTreeSet::new();
    collect(set, &mut out)?;
    Ok(out.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rv(a: &[i128], q: i128) -> RationalVector {
        RationalVector::new(a.to_vec(), q).unwrap()
    }

    #[test]
    fn reduction() {
        assert_eq!(rv(&[2, 4], 6), rv(&[1, 2], 3));
        assert_eq!(rv(&[-1], 4), rv(&[3], 4));
        assert_eq!(rv(&[0, 0], 7), RationalVector::zero(2));
        assert!(RationalVector::new(vec![1], 0).is_err());
    }

    #[test]
    fn farey_examples() {
        let r0 = enumerate_rationals(&RationalSet::Farey { m: 1, s: 0, tau: 2.0 }).unwrap();
        assert_eq!(r0, vec![RationalVector::zero(1)]);
        let r1 = enumerate_rationals(&RationalSet::Farey { m: 1, s: 1, tau: 2.0 }).unwrap();
        let mut want = vec![rv(&[1], 2), rv(&[1], 3), rv(&[2], 3)];
        want.sort();
        assert_eq!(r1, want);
        assert_eq!(farey_denominators(2, 2.0), (4, 7));
        assert_eq!(farey_denominators(1, 1.5), (2, 2));
    }

    #[test]
    fn fixed_denominator() {
        let r = enumerate_rationals(&RationalSet::FixedDenominator { m: 2, q: 2 }).unwrap();
        let mut want = vec![rv(&[0, 0], 1), rv(&[0, 1], 2), rv(&[1, 0], 2), rv(&[1, 1], 2)];
        want.sort();
        assert_eq!(r, want);
    }

    #[test]
    fn difference_and_union() {
        let all = RationalSet::FixedDenominator { m: 1, q: 6 };
        let small = RationalSet::FixedDenominator { m: 1, q: 2 };
        let diff = RationalSet::Difference { keep: Box::new(all.clone()), remove: Box::new(small.clone()) };
        let d = enumerate_rationals(&diff).unwrap();
        assert_eq!(d.len(), 4);
        let u = RationalSet::Union { sets: vec![diff, small] };
        assert_eq!(enumerate_rationals(&u).unwrap(), enumerate_rationals(&all).unwrap());
    }

    #[test]
    fn farey_count_matches_jordan_totient() {
        // number of reduced a/q in [0,1)^2 with fixed q is J_2(q) = q^2 prod (1 - p^-2)
        let r = enumerate_rationals(&RationalSet::DenominatorRange { m: 2, q_lo: 6, q_hi: 6 }).unwrap();
        assert_eq!(r.len(), 36 * 3 / 4 * 8 / 9);
    }
}

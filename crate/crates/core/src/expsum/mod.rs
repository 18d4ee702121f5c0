//! Exponential sums.
//!
//! Classical Weyl sums and complete Gauss sums `S(a/q)`, the nilpotent sums
//! `S_{P,r}` / `S~_{P,r}` built on the alternating forms `D` / `D~`, their
//! arithmetic coefficients `G(a/q)` / `G~(a/q)`, and the continuous profiles
//! `J`, `J'`, `P`, `P~`.
//!
//! Phases at rational points are reduced mod `q` in integer arithmetic and
//! looked up in a table of roots of unity. Real phases are reduced mod 1 at
//! every step of a Horner scheme.

mod classical;
mod nil;
mod profile;

pub use classical::{gauss_scan, gauss_sum_complete, weyl_scan, weyl_sum, weyl_sum_rational, GaussScanRow, WeylScanRow};
pub use nil::{nil_gauss_sum, nil_weyl_sum, nil_weyl_sum_brute, SumMethod};
pub use profile::{continuous_profile_j, oscillatory_p, profile_j_k, OscillatoryOptions};

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cutoff::eta0;
use crate::error::{Error, Result};

/// Weight families `phi_P` for Weyl-type sums.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Weight {
    /// `1_{[-P, P]}`.
    Sharp,
    /// `chi(n / P)`.
    Smooth,
    /// `chi'(n / P)` with `chi'(t) = chi(t / tau) / tau - chi(t)`.
    SmoothPrime { tau: f64 },
}

impl Weight {
    pub fn eval(&self, n: i64, p: f64) -> f64 {
        let t = n as f64 / p;
        match *self {
            Weight::Sharp => {
                if (n as f64).abs() <= p {
                    1.0
                } else {
                    0.0
                }
            }
            Weight::Smooth => eta0(t),
            Weight::SmoothPrime { tau } => eta0(t / tau) / tau - eta0(t),
        }
    }

    /// Largest `|n|` with a possibly non-zero weight.
    pub fn reach(&self, p: f64) -> i64 {
        let r = match *self {
            Weight::Sharp => p,
            Weight::Smooth => 2.0 * p,
            Weight::SmoothPrime { tau } => 2.0 * tau * p,
        };
        r.floor() as i64
    }

    /// Label recorded in scan output.
    pub fn label(&self) -> String {
        match *self {
            Weight::Sharp => "sharp".into(),
            Weight::Smooth => "chi(n/P)".into(),
            Weight::SmoothPrime { tau } => format!("chi'(n/P),tau={tau}"),
        }
    }
}

/// `e(-k/q)` for `k = 0..q`.
pub(crate) fn roots_of_unity(q: u64) -> Vec<Complex64> {
    (0..q).map(|k| Complex64::from_polar(1.0, -TAU * k as f64 / q as f64)).collect()
}

/// `e(-x)`.
pub(crate) fn e_neg(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, -TAU * x.rem_euclid(1.0))
}

/// Fractional part of `theta * n`, accurate for large `|n|`.
pub(crate) fn frac_mul(theta: f64, n: i128) -> f64 {
    const DIRECT: i128 = 1 << 20;
    if n.abs() < DIRECT {
        return (theta * n as f64).rem_euclid(1.0);
    }
    let mut t = theta.rem_euclid(1.0);
    let mut m = n.unsigned_abs();
    let mut acc = 0.0;
    while m > 0 {
        if m & 1 == 1 {
            acc = (acc + t).rem_euclid(1.0);
        }
        t = (2.0 * t).rem_euclid(1.0);
        m >>= 1;
    }
    if n < 0 {
        (-acc).rem_euclid(1.0)
    } else {
        acc
    }
}

/// Pairwise sum in a fixed order.
pub fn pairwise_sum(v: &[Complex64]) -> Complex64 {
    match v.len() {
        0 => Complex64::new(0.0, 0.0),
        1 => v[0],
        n => pairwise_sum(&v[..n / 2]) + pairwise_sum(&v[n / 2..]),
    }
}

/// Sums `f(i)` for `i in 0..n` in fixed chunks spread over the thread pool,
/// combining chunk totals pairwise; the result does not depend on the pool size.
pub(crate) fn chunked_sum(n: u64, f: impl Fn(u64) -> Complex64 + Sync) -> Complex64 {
    use rayon::prelude::*;
    const CHUNK: u64 = 4096;
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<Complex64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
                acc += f(i);
            }
            acc
        })
        .collect();
    pairwise_sum(&parts)
}

/// Least-squares fit of `ln y` against `ln x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual in log space.
    pub residual: f64,
}

pub fn decay_fit(points: &[(f64, f64)]) -> Result<DecayFit> {
    if points.len() < 3 {
        return Err(Error::invalid(format!("decay fit needs at least 3 points, got {}", points.len())));
    }
    if points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite())) {
        return Err(Error::invalid("decay fit needs positive finite values"));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= 1e-300 {
        return Err(Error::invalid("decay fit needs at least two distinct abscissae"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum::<f64>() / n).sqrt();
    Ok(DecayFit { slope, intercept, residual })
}

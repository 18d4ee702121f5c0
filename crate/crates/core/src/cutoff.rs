//! Smooth cutoffs.
//!
//! `eta0(t) = S(2 - |t|)` with the smooth step `S(u) = h(u) / (h(u) + h(1 - u))`,
//! `h(u) = exp(-1/u)` for `u > 0` and `0` otherwise. It is even, `C^inf`,
//! equal to 1 on `[-1, 1]` and vanishes outside `(-2, 2)`. The averaging
//! cutoff `chi` is the same function.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn h(u: f64) -> f64 {
    if u > 0.0 {
        (-1.0 / u).exp()
    } else {
        0.0
    }
}

/// Smooth step: 0 for `u <= 0`, 1 for `u >= 1`.
pub fn smooth_step(u: f64) -> f64 {
    let a = h(u);
    let b = h(1.0 - u);
    if a + b == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

/// The base bump `eta0`.
pub fn eta0(t: f64) -> f64 {
    smooth_step(2.0 - t.abs())
}

/// Euclidean norm.
pub fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// The cutoff family used by the averages and the multipliers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Cutoff {
    /// `eta0`.
    Eta0,
    /// `eta_j(t) = eta0(tau^-j t) - eta0(tau^{-j+1} t)` for `j >= 1`, `eta0` for `j = 0`.
    EtaJ { tau: f64, j: u32 },
    /// `eta_{<=A} = sum_{0 <= j <= A} eta_j = eta0(tau^{-floor A} t)`; zero for `A < 0`.
    EtaLeq { tau: f64, a: f64 },
    /// The averaging weight `chi = eta0`.
    Chi,
    /// `chi'(t) = chi(t / tau) / tau - chi(t)`, mean zero.
    ChiPrime { tau: f64 },
}

impl Cutoff {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Cutoff::EtaJ { tau, .. } | Cutoff::EtaLeq { tau, .. } | Cutoff::ChiPrime { tau } => {
                if !(tau > 1.0 && tau <= 2.0) {
                    return Err(Error::invalid(format!("tau must lie in (1, 2], got {tau}")));
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Cutoff::Eta0 | Cutoff::Chi => eta0(t),
            Cutoff::EtaJ { tau, j } => {
                if j == 0 {
                    eta0(t)
                } else {
                    eta0(tau.powi(-(j as i32)) * t) - eta0(tau.powi(1 - j as i32) * t)
                }
            }
            Cutoff::EtaLeq { tau, a } => {
                if a < 0.0 {
                    0.0
                } else {
                    eta0(tau.powi(-(a.floor() as i32)) * t)
                }
            }
            Cutoff::ChiPrime { tau } => eta0(t / tau) / tau - eta0(t),
        }
    }

    /// Radial extension `c(|x|)`.
    pub fn eval_vec(&self, x: &[f64]) -> f64 {
        self.eval(norm2(x))
    }

    /// Radius outside which the cutoff vanishes.
    pub fn support_radius(&self) -> f64 {
        match *self {
            Cutoff::Eta0 | Cutoff::Chi => 2.0,
            Cutoff::EtaJ { tau, j } => 2.0 * tau.powi(j as i32),
            Cutoff::EtaLeq { tau, a } => {
                if a < 0.0 {
                    0.0
                } else {
                    2.0 * tau.powi(a.floor() as i32)
                }
            }
            Cutoff::ChiPrime { tau } => 2.0 * tau,
        }
    }
}

/// `eta_{<=A}` evaluated as the explicit sum of the `eta_j`.
pub fn eta_leq_by_sum(tau: f64, a: f64, t: f64) -> f64 {
    if a < 0.0 {
        return 0.0;
    }
    (0..=a.floor() as u32).map(|j| Cutoff::EtaJ { tau, j }.eval(t)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sandwich() {
        assert_eq!(eta0(0.5), 1.0);
        assert_eq!(eta0(-1.0), 1.0);
        assert_eq!(eta0(3.0), 0.0);
        assert_eq!(eta0(2.0), 0.0);
        for i in 0..=400 {
            let t = -3.0 + 6.0 * i as f64 / 400.0;
            let v = eta0(t);
            assert!((0.0..=1.0).contains(&v));
            assert_eq!(v, eta0(-t));
        }
    }

    #[test]
    fn eta_leq_telescopes() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let tau = rng.gen_range(1.05..=2.0);
            let a = rng.gen_range(0.0..8.0);
            let t = rng.gen_range(-600.0..600.0);
            let lhs = Cutoff::EtaLeq { tau, a }.eval(t);
            assert!((lhs - eta_leq_by_sum(tau, a, t)).abs() < 1e-12);
        }
    }

    #[test]
    fn partition_of_unity() {
        let tau = 1.5;
        for &t in &[0.0, 0.9, 1.7, 3.3, 10.0, 99.0] {
            let s: f64 = (0..40).map(|j| Cutoff::EtaJ { tau, j }.eval(t)).sum();
            assert!((s - 1.0).abs() < 1e-12, "t={t} sum={s}");
        }
    }

    #[test]
    fn chi_prime_has_zero_mean() {
        let c = Cutoff::ChiPrime { tau: 2.0 };
        let n = 40000;
        let (a, b) = (-4.0, 4.0);
        let hstep = (b - a) / n as f64;
        let s: f64 = (0..n).map(|i| c.eval(a + (i as f64 + 0.5) * hstep)).sum::<f64>() * hstep;
        assert!(s.abs() < 1e-9);
    }

    #[test]
    fn radial() {
        let c = Cutoff::Eta0;
        assert_eq!(c.eval_vec(&[0.6, 0.8]), 1.0);
        assert_eq!(c.eval_vec(&[3.0, 0.0]), 0.0);
    }
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::GroupShape;

/// Largest factorial that fits in `i128`.
const MAX_EXACT_FACTORIAL: u64 = 33;

/// Constants of the decomposition at one scale `k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionParams {
    pub d: usize,
    pub tau: f64,
    pub delta: f64,
    pub delta_prime: f64,
    pub big_d: f64,
    pub k: u32,
    /// `Q_s` is replaced by `lcm(1, .., min(floor(tau^{D(s+1)}), q_cap))`.
    pub q_cap: u64,
    /// Samples per axis for non-central multiplier grids.
    pub noncentral_grid: usize,
    /// Samples per axis for central multiplier grids.
    pub central_grid: usize,
}

impl Default for DecompositionParams {
    fn default() -> Self {
        DecompositionParams {
            d: 2,
            tau: 2.0,
            delta: 0.4,
            delta_prime: 0.6,
            big_d: 4.0,
            k: 6,
            q_cap: 6,
            noncentral_grid: 128,
            central_grid: 4096,
        }
    }
}

impl DecompositionParams {
    pub fn validate(&self) -> Result<()> {
        GroupShape::new(self.d)?;
        if self.d < 2 {
            return Err(Error::invalid("the decomposition needs d >= 2 (no central variables otherwise)"));
        }
        if !(self.tau > 1.0 && self.tau <= 2.0) {
            return Err(Error::invalid(format!("tau must lie in (1, 2], got {}", self.tau)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0 && self.delta_prime > 0.0 && self.delta_prime < 1.0) {
            return Err(Error::invalid("delta and delta' must lie in (0, 1)"));
        }
        if self.delta > self.delta_prime {
            return Err(Error::invalid(format!(
                "need delta <= delta', got {} > {}",
                self.delta, self.delta_prime
            )));
        }
        if !(self.big_d > 0.0) {
            return Err(Error::invalid("D must be positive"));
        }
        if self.k == 0 {
            return Err(Error::invalid("k must be >= 1"));
        }
        if self.q_cap == 0 {
            return Err(Error::invalid("q_cap must be >= 1"));
        }
        if self.noncentral_grid < 2 || self.central_grid < 2 {
            return Err(Error::invalid("multiplier grids need at least 2 samples per axis"));
        }
        Ok(())
    }

    pub fn shape(&self) -> GroupShape {
        GroupShape::new(self.d).expect("validated degree")
    }

    /// Width `delta k` of the central bumps and of both `phi_k`.
    pub fn central_width(&self) -> f64 {
        self.delta * self.k as f64
    }

    /// Width `delta' k` of the non-central bumps.
    pub fn noncentral_width(&self) -> f64 {
        self.delta_prime * self.k as f64
    }

    /// `s in [0, delta k]`.
    pub fn s_range(&self) -> std::ops::RangeInclusive<u32> {
        0..=self.central_width().floor() as u32
    }

    /// `t in [0, delta' k]`.
    pub fn t_range(&self) -> std::ops::RangeInclusive<u32> {
        0..=self.noncentral_width().floor() as u32
    }

    /// `floor(tau^{D(s+1)})`.
    pub fn q_s_base(&self, s: u32) -> f64 {
        self.tau.powf(self.big_d * (s as f64 + 1.0)).floor()
    }

    /// `Q_s = (floor(tau^{D(s+1)}))!` when it fits in `i128`.
    pub fn q_s_exact(&self, s: u32) -> Option<i128> {
        let n = self.q_s_base(s);
        if n > MAX_EXACT_FACTORIAL as f64 {
            return None;
        }
        (1..=n as i128).try_fold(1i128, |acc, v| acc.checked_mul(v))
    }

    /// The highly divisible stand-in for `Q_s` actually used.
    pub fn q_s(&self, s: u32) -> i128 {
        let top = (self.q_s_base(s) as u64).min(self.q_cap).max(1);
        (1..=top as i128).fold(1i128, |acc, v| num_integer::lcm(acc, v))
    }

    /// `kappa_s = 2^{(D / ln tau)(s+1)^2}`.
    pub fn kappa_s(&self, s: u32) -> f64 {
        2f64.powf(self.big_d / self.tau.ln() * (s as f64 + 1.0).powi(2))
    }
}

//! The rho-variation seminorm
//! `V^rho(a_t : t in I) = sup_{t_0 < .. < t_J} (sum_j |a(t_{j+1}) - a(t_j)|^rho)^{1/rho}`,
//! the norm `V~^rho = sup |a_t| + V^rho`, and the right-hand side of the
//! Rademacher–Menshov inequality.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Values `a_t` on a strictly increasing index list `I`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexedSequence {
    indices: Vec<i64>,
    values: Vec<Complex64>,
}

impl IndexedSequence {
    pub fn new(indices: Vec<i64>, values: Vec<Complex64>) -> Result<Self> {
        if indices.len() != values.len() {
            return Err(Error::invalid(format!("{} indices for {} values", indices.len(), values.len())));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("indices must be strictly increasing"));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::invalid("values must be finite"));
        }
        Ok(IndexedSequence { indices, values })
    }

    /// Real values on `0, 1, .., n - 1`.
    pub fn from_reals(values: &[f64]) -> Self {
        IndexedSequence {
            indices: (0..values.len() as i64).collect(),
            values: values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }

    pub fn indices(&self) -> &[i64] {
        &self.indices
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, t: i64) -> Option<Complex64> {
        self.indices.binary_search(&t).ok().map(|i| self.values[i])
    }

    /// The entries with index in `[lo, hi]`.
    pub fn restrict(&self, lo: i64, hi: i64) -> Self {
        let (i, j) = (self.indices.partition_point(|&t| t < lo), self.indices.partition_point(|&t| t <= hi));
        IndexedSequence { indices: self.indices[i..j].to_vec(), values: self.values[i..j].to_vec() }
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if rho.is_nan() || rho < 1.0 {
        return Err(Error::invalid(format!("rho must be >= 1, got {rho}")));
    }
    if rho.is_infinite() {
        return Err(Error::invalid("rho = inf has no variation seminorm; use Seminorm::JumpSup"));
    }
    Ok(())
}

/// Exact `V^rho` by the dynamic programme
/// `M[j] = max(0, max_{i < j} M[i] + |a_j - a_i|^rho)`, answer `(max_j M[j])^{1/rho}`.
pub fn variation(seq: &IndexedSequence, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    let a = &seq.values;
    let mut m = vec![0.0f64; a.len()];
    let mut best = 0.0f64;
    for j in 1..a.len() {
        let mut cur = 0.0f64;
        for i in 0..j {
            cur = cur.max(m[i] + (a[j] - a[i]).norm().powf(rho));
        }
        m[j] = cur;
        best = best.max(cur);
    }
    Ok(best.powf(1.0 / rho))
}

/// `V~^rho = sup_t |a_t| + V^rho`.
pub fn variation_tilde(seq: &IndexedSequence, rho: f64) -> Result<f64> {
    Ok(seq.sup() + variation(seq, rho)?)
}

/// Which seminorm a request asks for.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Seminorm {
    Variation { rho: f64 },
    /// `sup_{s < t} |a_t - a_s|`, the `rho -> inf` limit of `V^rho`.
    JumpSup,
}

impl Seminorm {
    /// `rho = inf` selects [`Seminorm::JumpSup`].
    pub fn from_rho(rho: f64) -> Result<Self> {
        if rho.is_infinite() && rho > 0.0 {
            return Ok(Seminorm::JumpSup);
        }
        check_rho(rho)?;
        Ok(Seminorm::Variation { rho })
    }

    pub fn label(&self) -> String {
        match self {
            Seminorm::Variation { rho } => format!("V^{rho}"),
            Seminorm::JumpSup => "jump_sup".into(),
        }
    }

    pub fn eval(&self, seq: &IndexedSequence) -> Result<f64> {
        match *self {
            Seminorm::Variation { rho } => variation(seq, rho),
            Seminorm::JumpSup => {
                let a = &seq.values;
                let mut best = 0.0f64;
                for j in 0..a.len() {
                    for i in 0..j {
                        best = best.max((a[j] - a[i]).norm());
                    }
                }
                Ok(best)
            }
        }
    }
}

/// `sqrt(2) sum_{i=0}^m (sum_{j in [j0 2^-i, 2^{m-i} - 1]} |a_{(j+1) 2^i} - a_{j 2^i}|^2)^{1/2}`.
///
/// Every integer of `[j0, 2^m]` must be an index of `seq`.
pub fn rademacher_menshov_rhs(seq: &IndexedSequence, j0: i64, m: u32) -> Result<f64> {
    if m > 40 {
        return Err(Error::invalid(format!("m = {m} is too large")));
    }
    let top = 1i64 << m;
    if j0 < 0 || j0 >= top {
        return Err(Error::invalid(format!("need 0 <= j0 < 2^m, got j0={j0}, m={m}")));
    }
    let at = |t: i64| seq.get(t).ok_or_else(|| Error::invalid(format!("index {t} missing from the sequence")));
    let mut total = 0.0;
    for i in 0..=m {
        let step = 1i64 << i;
        let lo = (j0 + step - 1) / step;
        let hi = (top >> i) - 1;
        let mut sq = 0.0;
        for j in lo..=hi {
            sq += (at((j + 1) * step)? - at(j * step)?).norm_sqr();
        }
        total += sq.sqrt();
    }
    Ok(2f64.sqrt() * total)
}

/// Both sides `(V^rho(a_j : j0 <= j <= 2^m), RHS)` of the Rademacher–Menshov inequality.
pub fn rademacher_menshov(seq: &IndexedSequence, j0: i64, m: u32, rho: f64) -> Result<(f64, f64)> {
    let rhs = rademacher_menshov_rhs(seq, j0, m)?;
    let lhs = variation(&seq.restrict(j0, 1i64 << m), rho)?;
    Ok((lhs, rhs))
}

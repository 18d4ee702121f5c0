use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupShape, LatticeElement, RealElement};
use crate::sparse::SparseFunction;

/// Weights `beta` over `Y_d` and the modulus `Q` of the lattice `H_Q`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuasiGeometry {
    pub shape: GroupShape,
    pub beta: Vec<f64>,
    pub q: i128,
    /// The `w` the weights were built from, when known.
    pub w: Option<u32>,
}

/// Largest number of non-central lattice points a ball count will visit.
pub const BALL_WINDOW_LIMIT: u128 = 50_000_000;

impl QuasiGeometry {
    pub fn new(shape: GroupShape, beta: Vec<f64>, q: i128) -> Result<Self> {
        if beta.len() != shape.len() {
            return Err(Error::invalid(format!("beta needs {} entries", shape.len())));
        }
        if beta.iter().any(|b| !(*b >= 1.0) || !b.is_finite()) {
            return Err(Error::invalid("beta must be >= 1"));
        }
        let d = shape.degree();
        let min_nc = beta[..d].iter().cloned().fold(f64::INFINITY, f64::min);
        if beta[d..].iter().any(|b| *b > min_nc) {
            return Err(Error::invalid("central weights must not exceed non-central ones"));
        }
        if q < 1 {
            return Err(Error::invalid(format!("modulus Q must be >= 1, got {q}")));
        }
        Ok(QuasiGeometry { shape, beta, q, w: None })
    }

    /// `beta = 2^{floor(delta' w)}` on non-central and `2^{floor(delta w)}` on central coordinates.
    pub fn from_scales(shape: GroupShape, delta: f64, delta_prime: f64, w: u32, q: i128) -> Result<Self> {
        if !(delta > 0.0 && delta <= delta_prime && delta_prime < 1.0) {
            return Err(Error::invalid("need 0 < delta <= delta' < 1"));
        }
        let d = shape.degree();
        let beta = (0..shape.len())
            .map(|i| 2f64.powi((if i < d { delta_prime } else { delta } * w as f64).floor() as i32))
            .collect();
        let mut g = Self::new(shape, beta, q)?;
        g.w = Some(w);
        Ok(g)
    }

    /// `q_beta(x) = sup (beta |x_{l1 l2}|)^{1/(l1+l2)}`.
    pub fn quasi_norm(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(&self.beta)
            .zip(self.shape.weights())
            .map(|((v, b), w)| (b * v.abs()).powf(1.0 / w as f64))
            .fold(0.0, f64::max)
    }

    /// `prod Q beta^{-1} r^{l1+l2}`, the predicted size of a ball of radius `r`.
    pub fn ball_volume(&self, r: f64) -> f64 {
        self.beta
            .iter()
            .zip(self.shape.weights())
            .map(|(b, w)| r.powi(w as i32) / (self.q as f64 * b))
            .product()
    }

    /// `#{y in H_Q : q_beta(x . y^{-1}) < r}`.
    ///
    /// Non-central coordinates are enumerated; for each of them the central
    /// coordinates range over intervals and are counted in closed form.
    pub fn ball_count(&self, center: &RealElement, r: f64) -> Result<u64> {
        if !(r > 0.0) {
            return Err(Error::invalid(format!("radius must be positive, got {r}")));
        }
        if center.shape() != self.shape {
            return Err(Error::ShapeMismatch { expected: self.shape.degree(), found: center.shape().degree() });
        }
        let d = self.shape.degree();
        let q = self.q as f64;
        let x = center.coords();
        let w = self.shape.weights();
        // allowed multiples k of Q for each non-central coordinate: |x - kQ| < r^l / beta
        let mut ranges = Vec::with_capacity(d);
        let mut total: u128 = 1;
        for l in 0..d {
            let half = r.powi(w[l] as i32) / self.beta[l];
            let (lo, hi) = open_multiples(x[l] - half, x[l] + half, q);
            if hi < lo {
                return Ok(0);
            }
            total = total.saturating_mul((hi - lo + 1) as u128);
            ranges.push((lo, hi));
        }
        if total > BALL_WINDOW_LIMIT {
            return Err(Error::infeasible(format!("ball enumeration window of {total} points")));
        }
        let central: Vec<(usize, usize)> = self.shape.central_indices().collect();
        let mut count: u64 = 0;
        let mut ks: Vec<i64> = ranges.iter().map(|r| r.0).collect();
        'outer: loop {
            let y1: Vec<f64> = ks.iter().map(|k| *k as f64 * q).collect();
            let mut prod: u64 = 1;
            for (i, &(l1, l2)) in central.iter().enumerate() {
                // central coordinate of x . y^{-1}: x - y + (y1 - x1)_{l1} y1_{l2}
                let c = x[d + i] + (y1[l1 - 1] - x[l1 - 1]) * y1[l2 - 1];
                let half = r.powi(w[d + i] as i32) / self.beta[d + i];
                let (lo, hi) = open_multiples(c - half, c + half, q);
                if hi < lo {
                    prod = 0;
                    break;
                }
                prod *= (hi - lo + 1) as u64;
            }
            count += prod;
            for j in (0..d).rev() {
                if ks[j] < ranges[j].1 {
                    ks[j] += 1;
                    continue 'outer;
                }
                ks[j] = ranges[j].0;
            }
            break;
        }
        Ok(count)
    }

    /// Admissible scales `k` of the shifted maximal function in `ks`: `2^{k/2} >= 8 Q 2^{w/8}`.
    pub fn admissible_scales(&self, ks: std::ops::RangeInclusive<u32>) -> Vec<u32> {
        let w = self.w.unwrap_or(0) as f64;
        ks.filter(|&k| 2f64.powf(k as f64 / 2.0) >= 8.0 * self.q as f64 * 2f64.powf(w / 8.0)).collect()
    }

    /// `prod_{Y_d} Q beta 2^{-k(l1+l2)}`.
    pub fn normalization(&self, k: u32) -> f64 {
        self.beta
            .iter()
            .zip(self.shape.weights())
            .map(|(b, w)| self.q as f64 * b * 2f64.powi(-(k as i32) * w as i32))
            .product()
    }

    /// `M_{Q,w,u} f(h) = sup_k norm(k) sum_{y in H_Q : q_beta(h . y^{-1} - A0(2^k u)) < 2^k} |f(y)|`
    /// over the admissible `k` in `ks`, at each of `points`.
    pub fn shifted_maximal(
        &self,
        f: &SparseFunction<f64>,
        u: f64,
        ks: std::ops::RangeInclusive<u32>,
        points: &[LatticeElement],
    ) -> Result<Vec<f64>> {
        if !(-2.0..=2.0).contains(&u) {
            return Err(Error::invalid(format!("u must lie in [-2, 2], got {u}")));
        }
        let ks = self.admissible_scales(ks);
        if ks.is_empty() {
            return Err(Error::invalid("no admissible scale k in the window"));
        }
        let in_hq = |g: &LatticeElement| g.coords().iter().all(|c| c.rem_euclid(self.q) == 0);
        if f.support().chain(points.iter()).any(|g| !in_hq(g) || g.shape() != self.shape) {
            return Err(Error::invalid("f and the evaluation points must lie in H_Q"));
        }
        let d = self.shape.degree();
        let ys: Vec<(RealElement, f64)> = f.iter().map(|(y, v)| Ok((y.inverse()?.to_real(), v.abs()))).collect::<Result<_>>()?;
        points
            .iter()
            .map(|h| {
                let hr = h.to_real();
                let mut best = 0.0f64;
                for &k in &ks {
                    let s = 2f64.powi(k as i32) * u;
                    let shift: Vec<f64> = (1..=d).map(|l| s.powi(l as i32)).collect();
                    let mut sum = 0.0;
                    for (yinv, v) in &ys {
                        let mut z = hr.multiply(yinv)?.into_coords();
                        for (zc, sc) in z.iter_mut().zip(&shift) {
                            *zc -= sc;
                        }
                        if self.quasi_norm(&z) < 2f64.powi(k as i32) {
                            sum += v;
                        }
                    }
                    best = best.max(self.normalization(k) * sum);
                }
                Ok(best)
            })
            .collect()
    }
}

/// Integers `k` with `lo < k q < hi`, as an inclusive range.
fn open_multiples(lo: f64, hi: f64, q: f64) -> (i64, i64) {
    ((lo / q).floor() as i64 + 1, (hi / q).ceil() as i64 - 1)
}

/// Every `h in H_Q` with `|h_i| <= Q * reach[i]`.
pub fn lattice_window(shape: GroupShape, q: i128, reach: &[i64]) -> Result<Vec<LatticeElement>> {
    if reach.len() != shape.len() {
        return Err(Error::invalid(format!("reach needs {} entries", shape.len())));
    }
    let total: u128 = reach.iter().map(|r| 2 * *r as u128 + 1).product();
    if total > BALL_WINDOW_LIMIT {
        return Err(Error::infeasible(format!("window of {total} points")));
    }
    let mut out = Vec::with_capacity(total as usize);
    let mut idx: Vec<i64> = reach.iter().map(|r| -r).collect();
    loop {
        out.push(GroupElement::new(shape, idx.iter().map(|k| *k as i128 * q).collect())?);
        let mut j = idx.len();
        loop {
            if j == 0 {
                return Ok(out);
            }
            j -= 1;
            if idx[j] < reach[j] {
                idx[j] += 1;
                break;
            }
            idx[j] = -reach[j];
        }
    }
}

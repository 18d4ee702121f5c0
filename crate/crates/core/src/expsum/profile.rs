use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{e_neg, pairwise_sum};
use crate::cutoff::eta0;
use crate::error::{Error, Result};
use crate::group::{GroupShape, WordVariant};
use crate::quad::{composite_nodes, integrate};

/// Absolute tolerance of the one-dimensional profiles.
pub const PROFILE_TOL: f64 = 1e-8;
/// Largest tensor grid `P` will evaluate.
pub const TENSOR_LIMIT: u128 = 200_000_000;

fn cutoff(iota: u8, tau: f64) -> impl Fn(f64) -> f64 + Sync {
    move |t| if iota == 0 { eta0(t) } else { eta0(t / tau) / tau - eta0(t) }
}

fn check_iota(iota: u8, tau: f64) -> Result<f64> {
    if iota > 1 {
        return Err(Error::invalid(format!("iota must be 0 or 1, got {iota}")));
    }
    if !(tau > 1.0 && tau <= 2.0) {
        return Err(Error::invalid(format!("tau must lie in (1, 2], got {tau}")));
    }
    Ok(if iota == 0 { 2.0 } else { 2.0 * tau })
}

/// `J(xi) = int chi^iota(y) e(-(xi_1 y + .. + xi_d y^d)) dy` with
/// `chi^0 = chi` and `chi^1 = chi'`.
pub fn continuous_profile_j(tau: f64, xi: &[f64], iota: u8) -> Result<Complex64> {
    let half = check_iota(iota, tau)?;
    if xi.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("xi must be finite"));
    }
    let c = cutoff(iota, tau);
    let freq: f64 = xi.iter().enumerate().map(|(l, x)| x.abs() * (l + 1) as f64 * half.powi(l as i32)).sum();
    let initial = ((2.0 * half * freq).ceil() as usize).max(16);
    integrate(
        |y| {
            let mut ph = 0.0;
            for x in xi.iter().rev() {
                ph = (ph + x) * y;
            }
            e_neg(ph) * c(y)
        },
        -half,
        half,
        PROFILE_TOL,
        initial,
    )
}

/// `J_k(xi) = J(tau^k o xi)`.
pub fn profile_j_k(tau: f64, k: u32, xi: &[f64], iota: u8) -> Result<Complex64> {
    let scaled: Vec<f64> = xi.iter().enumerate().map(|(l, x)| x * tau.powi((k as i32) * (l as i32 + 1))).collect();
    continuous_profile_j(tau, &scaled, iota)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OscillatoryOptions {
    pub tau: f64,
    /// Kronrod panels per axis; chosen from the size of `zeta` when absent.
    pub panels: Option<usize>,
}

impl Default for OscillatoryOptions {
    fn default() -> Self {
        OscillatoryOptions { tau: 2.0, panels: None }
    }
}

/// `P(zeta) = int prod_j chi^iota(w_j) chi^iota(y_j) e(-zeta.D(w, y)) dw dy`
/// over `R^r x R^r` (or `P~` with `D~`), by a tensor Kronrod rule.
pub fn oscillatory_p(
    shape: GroupShape,
    zeta: &[f64],
    r: usize,
    iota: u8,
    variant: WordVariant,
    opts: OscillatoryOptions,
) -> Result<Complex64> {
    let half = check_iota(iota, opts.tau)?;
    if r == 0 || r > 2 {
        return Err(Error::invalid(format!("r must be 1 or 2, got {r}")));
    }
    if zeta.len() != shape.len() || zeta.iter().any(|z| !z.is_finite()) {
        return Err(Error::invalid(format!("zeta needs {} finite entries", shape.len())));
    }
    let d = shape.degree();
    let weights = shape.weights();
    let freq: f64 = zeta
        .iter()
        .zip(&weights)
        .map(|(z, &w)| z.abs() * w as f64 * half.powi(w as i32 - 1))
        .sum::<f64>()
        * r as f64;
    let panels = opts.panels.unwrap_or_else(|| ((2.0 * half * freq).ceil() as usize).max(if r == 1 { 16 } else { 6 }));
    let c = cutoff(iota, opts.tau);
    let nodes: Vec<(f64, f64)> = composite_nodes(-half, half, panels)
        .into_iter()
        .map(|(x, w)| (x, w * c(x)))
        .filter(|n| n.1 != 0.0)
        .collect();
    let n = nodes.len();
    if (n as u128).pow(2 * r as u32) > TENSOR_LIMIT {
        return Err(Error::infeasible(format!("tensor grid {n}^{} exceeds {TENSOR_LIMIT}", 2 * r)));
    }
    // powers[i][l] = x_i^l for l = 0..=2d
    let powers: Vec<Vec<f64>> = nodes.iter().map(|&(x, _)| (0..=2 * d as i32).map(|l| x.powi(l)).collect()).collect();
    let central: Vec<(usize, usize)> = shape.central_indices().collect();
    let zc = &zeta[d..];
    let phase = |idx: &[usize]| -> f64 {
        let mut ph = 0.0;
        let mut prefix = vec![0.0; d + 1];
        for j in 0..r {
            let (xp, yp) = (&powers[idx[j]], &powers[idx[r + j]]);
            let u = |l: usize| match variant {
                WordVariant::D => yp[l] - xp[l],
                WordVariant::DTilde => xp[l] - yp[l],
            };
            for (i, &(l1, l2)) in central.iter().enumerate() {
                let top = match variant {
                    WordVariant::D => xp[l1 + l2],
                    WordVariant::DTilde => yp[l1 + l2],
                };
                ph += zc[i] * (prefix[l1] * u(l2) + top - xp[l1] * yp[l2]);
            }
            for l in 1..=d {
                let ul = u(l);
                ph += zeta[l - 1] * ul;
                prefix[l] += ul;
            }
        }
        ph
    };
    let dims = 2 * r;
    let inner = n.pow(dims as u32 - 1);
    let parts: Vec<Complex64> = (0..n)
        .into_par_iter()
        .map(|first| {
            let mut idx = vec![0usize; dims];
            idx[0] = first;
            let mut acc = Complex64::new(0.0, 0.0);
            for mut rest in 0..inner {
                let mut w = nodes[first].1;
                for slot in idx.iter_mut().skip(1) {
                    *slot = rest % n;
                    rest /= n;
                    w *= nodes[*slot].1;
                }
                acc += e_neg(phase(&idx)) * w;
            }
            acc
        })
        .collect();
    Ok(pairwise_sum(&parts))
}

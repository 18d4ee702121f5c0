use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{chunked_sum, e_neg, frac_mul, pairwise_sum, roots_of_unity};
use crate::error::{Error, Result};
use crate::group::{d_form, GroupShape, WordVariant};
use crate::rational::{residue_vectors, RationalVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SumMethod {
    Brute,
    Dp,
}

/// Largest number of terms a brute-force sum will enumerate.
pub const BRUTE_LIMIT: u128 = 100_000_000;
/// Largest `r * q^{d+1}` the modular dynamic programme will run.
pub const DP_LIMIT: u128 = 20_000_000_000;

/// Per-step data of one pair `(x, y)` in the cross-term factorisation
/// `D = sum_j [local_j + sum_{l1 > l2} prefix_{l1}(j) u_j^{l2}]`.
struct Step<T> {
    /// `u^l` for `l = 1..=d` (`y^l - x^l` for `D`, `x^l - y^l` for `D~`).
    u: Vec<T>,
    /// `x^{l1+l2} - x^{l1} y^{l2}` (`D`) or `y^{l1+l2} - x^{l1} y^{l2}` (`D~`), central order.
    local: Vec<T>,
}

fn step_i128(x: i128, y: i128, d: usize, variant: WordVariant) -> Result<Step<i128>> {
    let ovf = || Error::Overflow("nilpotent sum");
    let pw = |v: i128| -> Result<Vec<i128>> {
        let mut out = vec![1i128];
        for l in 1..=2 * d {
            out.push(out[l - 1].checked_mul(v).ok_or_else(ovf)?);
        }
        Ok(out)
    };
    let (xp, yp) = (pw(x)?, pw(y)?);
    let mut u = Vec::with_capacity(d);
    for l in 1..=d {
        u.push(match variant {
            WordVariant::D => yp[l].checked_sub(xp[l]),
            WordVariant::DTilde => xp[l].checked_sub(yp[l]),
        }
        .ok_or_else(ovf)?);
    }
    let mut local = Vec::new();
    for l1 in 2..=d {
        for l2 in 1..l1 {
            let top = match variant {
                WordVariant::D => xp[l1 + l2],
                WordVariant::DTilde => yp[l1 + l2],
            };
            local.push(top.checked_sub(xp[l1].checked_mul(yp[l2]).ok_or_else(ovf)?).ok_or_else(ovf)?);
        }
    }
    Ok(Step { u, local })
}

fn check_theta(shape: GroupShape, theta: &[f64]) -> Result<()> {
    if theta.len() != shape.len() {
        return Err(Error::invalid(format!("theta needs {} entries for d={}, got {}", shape.len(), shape.degree(), theta.len())));
    }
    if theta.iter().any(|t| !t.is_finite()) {
        return Err(Error::invalid("theta must be finite"));
    }
    Ok(())
}

/// `S_{P,r}(theta)` (or `S~`) by enumerating all `(n, m)` in `[-2P, 2P]^{2r}`.
pub fn nil_weyl_sum_brute(
    shape: GroupShape,
    p: u64,
    r: usize,
    theta: &[f64],
    variant: WordVariant,
    phi: impl Fn(i64) -> f64 + Sync,
    psi: impl Fn(i64) -> f64 + Sync,
) -> Result<Complex64> {
    check_theta(shape, theta)?;
    if p == 0 || r == 0 {
        return Err(Error::invalid("P and r must be >= 1"));
    }
    let width = 4 * p as u128 + 1;
    let total = width.checked_pow(2 * r as u32).filter(|t| *t <= BRUTE_LIMIT);
    let total = total.ok_or_else(|| Error::infeasible(format!("(4P+1)^(2r) terms with P={p}, r={r}")))? as u64;
    let reach = 2 * p as i64;
    let result = std::sync::Mutex::new(None);
    let sum = chunked_sum(total, |mut idx| {
        let mut n = vec![0i128; r];
        let mut m = vec![0i128; r];
        let mut w = 1.0;
        for slot in n.iter_mut().chain(m.iter_mut()) {
            *slot = (idx % width as u64) as i128 - reach as i128;
            idx /= width as u64;
        }
        for j in 0..r {
            w *= phi(n[j] as i64) * psi(m[j] as i64);
        }
        if w == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        match d_form(&n, &m, variant, shape) {
            Ok(g) => {
                let ph = g.coords().iter().zip(theta).fold(0.0, |acc, (c, t)| (acc + frac_mul(*t, *c)).rem_euclid(1.0));
                e_neg(ph) * w
            }
            Err(e) => {
                result.lock().unwrap().get_or_insert(e);
                Complex64::new(0.0, 0.0)
            }
        }
    });
    match result.into_inner().unwrap() {
        Some(e) => Err(e),
        None => Ok(sum),
    }
}

/// `S_{P,r}(theta) = sum_{n, m in Z^r} e(-D(n, m).theta) prod_j phi(n_j) psi(m_j)`
/// (or `S~` with `D~`), summed over `|n_j|, |m_j| <= 2P`.
///
/// `r = 1` is enumerated directly. For `r >= 2` the sum runs as a layered
/// dynamic programme over `j`, with state the integer prefix sums
/// `sum_{j' < j} u_{j'}^{l}` for `l = 2..d`.
pub fn nil_weyl_sum(
    shape: GroupShape,
    p: u64,
    r: usize,
    theta: &[f64],
    variant: WordVariant,
    phi: impl Fn(i64) -> f64 + Sync,
    psi: impl Fn(i64) -> f64 + Sync,
) -> Result<Complex64> {
    if r == 1 {
        return nil_weyl_sum_brute(shape, p, r, theta, variant, phi, psi);
    }
    check_theta(shape, theta)?;
    if p == 0 || r == 0 {
        return Err(Error::invalid("P and r must be >= 1"));
    }
    let d = shape.degree();
    let reach = 2 * p as i64;
    let mut steps = Vec::new();
    for x in -reach..=reach {
        for y in -reach..=reach {
            let w = phi(x) * psi(y);
            if w != 0.0 {
                steps.push((w, step_i128(x as i128, y as i128, d, variant)?));
            }
        }
    }
    let central: Vec<(usize, usize)> = shape.central_indices().collect();
    let theta_c = &theta[d..];
    // phase of a step given prefix sums pre[l] for l = 2..=d
    let step_phase = |s: &Step<i128>, pre: &[i128]| -> Result<f64> {
        let mut ph = 0.0;
        for l in 0..d {
            ph += frac_mul(theta[l], s.u[l]);
        }
        for (i, &(l1, l2)) in central.iter().enumerate() {
            let cross = pre[l1 - 2].checked_mul(s.u[l2 - 1]).ok_or(Error::Overflow("nilpotent sum"))?;
            let c = cross.checked_add(s.local[i]).ok_or(Error::Overflow("nilpotent sum"))?;
            ph += frac_mul(theta_c[i], c);
        }
        Ok(ph.rem_euclid(1.0))
    };
    let mut layer: BTreeMap<Vec<i128>, Complex64> = BTreeMap::new();
    layer.insert(vec![0; d.saturating_sub(1)], Complex64::new(1.0, 0.0));
    for j in 0..r {
        let last = j + 1 == r;
        let mut next: BTreeMap<Vec<i128>, Complex64> = BTreeMap::new();
        let mut tail = Vec::new();
        for (pre, amp) in &layer {
            for (w, s) in &steps {
                let z = *amp * e_neg(step_phase(s, pre)?) * *w;
                if last {
                    tail.push(z);
                } else {
                    let key: Vec<i128> = (2..=d).map(|l| pre[l - 2] + s.u[l - 1]).collect();
                    *next.entry(key).or_insert(Complex64::new(0.0, 0.0)) += z;
                }
            }
        }
        if last {
            return Ok(pairwise_sum(&tail));
        }
        layer = next;
    }
    unreachable!("r >= 2")
}

fn check_coefficient(shape: GroupShape, a: &RationalVector) -> Result<()> {
    if a.dim() != shape.len() {
        return Err(Error::invalid(format!("a/q needs {} entries for d={}, got {}", shape.len(), shape.degree(), a.dim())));
    }
    Ok(())
}

/// `G(a/q) = q^{-2r} sum_{v, w in Z_q^r} e(-D(v, w).a/q)` (or `G~` with `D~`).
///
/// `Dp` runs a dynamic programme over `j = 1..r` whose state is the residues
/// mod `q` of the prefix sums `sum_{j' < j} u_{j'}^{l}`, `l = 2..d`; it costs
/// `O(r q^{d+1})`. `Brute` enumerates all `q^{2r}` pairs.
pub fn nil_gauss_sum(shape: GroupShape, a: &RationalVector, r: usize, variant: WordVariant, method: SumMethod) -> Result<Complex64> {
    check_coefficient(shape, a)?;
    if r == 0 {
        return Err(Error::invalid("r must be >= 1"));
    }
    let q = a.denominator();
    let d = shape.degree();
    match method {
        SumMethod::Brute => {
            let total = (q as u128).checked_pow(2 * r as u32).filter(|t| *t <= BRUTE_LIMIT);
            let total = total.ok_or_else(|| Error::infeasible(format!("brute force needs q^(2r) <= 1e8, got q={q}, r={r}")))?;
            let roots = roots_of_unity(q as u64);
            let pts: Vec<Vec<i128>> = residue_vectors(2 * r, q).collect();
            debug_assert_eq!(pts.len() as u128, total);
            let sum = chunked_sum(total as u64, |i| {
                let vw = &pts[i as usize];
                let g = d_form(&vw[..r], &vw[r..], variant, shape).expect("residues are small");
                let k = g.coords().iter().zip(a.numerators()).fold(0i128, |acc, (c, n)| (acc + c.rem_euclid(q) * n) % q);
                roots[k as usize]
            });
            Ok(sum / (q as f64).powi(2 * r as i32))
        }
        SumMethod::Dp => {
            let states = (q as u128).pow(d as u32 - 1);
            if (r as u128) * states * (q as u128).pow(2) > DP_LIMIT {
                return Err(Error::infeasible(format!("dynamic programme too large for q={q}, d={d}, r={r}")));
            }
            Ok(gauss_dp(shape, a, r, variant) / (q as f64).powi(2 * r as i32))
        }
    }
}

fn gauss_dp(shape: GroupShape, a: &RationalVector, r: usize, variant: WordVariant) -> Complex64 {
    let q = a.denominator();
    let d = shape.degree();
    let roots = roots_of_unity(q as u64);
    let an = a.numerators();
    let central: Vec<(usize, usize)> = shape.central_indices().collect();
    // per pair: increments of the prefix state, constant phase, and the
    // coefficient of prefix_{l1} in the cross phase
    struct Pair {
        du: Vec<usize>,
        c: i128,
        b: Vec<i128>,
    }
    let mut pairs = Vec::with_capacity((q * q) as usize);
    for v in 0..q {
        for w in 0..q {
            let s = step_i128(v, w, d, variant).expect("residues are small");
            let u: Vec<i128> = s.u.iter().map(|x| x.rem_euclid(q)).collect();
            let mut c = 0i128;
            for l in 0..d {
                c = (c + an[l] * u[l]) % q;
            }
            let mut b = vec![0i128; d.saturating_sub(1)];
            for (i, &(l1, l2)) in central.iter().enumerate() {
                let ai = an[d + i];
                c = (c + ai * s.local[i].rem_euclid(q)) % q;
                b[l1 - 2] = (b[l1 - 2] + ai * u[l2 - 1]) % q;
            }
            pairs.push(Pair { du: u[1..].iter().map(|&x| x as usize).collect(), c, b });
        }
    }
    let qu = q as usize;
    let n_states = qu.pow(d as u32 - 1);
    let decode = |mut idx: usize| -> Vec<usize> {
        let mut v = vec![0usize; d - 1];
        for slot in v.iter_mut() {
            *slot = idx % qu;
            idx /= qu;
        }
        v
    };
    let encode = |v: &[usize]| v.iter().rev().fold(0usize, |acc, &x| acc * qu + x);
    let mut layer = vec![Complex64::new(0.0, 0.0); n_states];
    layer[0] = Complex64::new(1.0, 0.0);
    let mut next_state = vec![0usize; d - 1];
    for j in 0..r {
        let last = j + 1 == r;
        let mut next = vec![Complex64::new(0.0, 0.0); n_states];
        let mut tail = Complex64::new(0.0, 0.0);
        for (idx, amp) in layer.iter().enumerate() {
            if *amp == Complex64::new(0.0, 0.0) {
                continue;
            }
            let pre = decode(idx);
            let mut acc = Complex64::new(0.0, 0.0);
            for p in &pairs {
                let mut k = p.c;
                for (l, &x) in pre.iter().enumerate() {
                    k += x as i128 * p.b[l];
                }
                let z = roots[(k % q) as usize];
                if last {
                    acc += z;
                } else {
                    for l in 0..d - 1 {
                        next_state[l] = (pre[l] + p.du[l]) % qu;
                    }
                    next[encode(&next_state)] += *amp * z;
                }
            }
            tail += *amp * acc;
        }
        if last {
            return tail;
        }
        layer = next;
    }
    unreachable!("r >= 1")
}

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circle::fourier::{scaled_radius, RadialTransform};
use crate::cutoff::Cutoff;
use crate::error::{Error, Result};
use crate::expsum::gauss_sum_complete;
use crate::group::{jq_index, moment_curve, GroupShape, LatticeElement};
use crate::quad;
use crate::rational::{enumerate_rationals, RationalSet, RationalVector};

/// `V_{A,B,Q}(b) = Q^{-d-d'} {sum_{s in A} S(s) e(b^(1).s)} {sum_{s in B} e(b^(2).s)}`
/// tabulated on `J_Q`; it factors as `first(b^(1)) * second(b^(2))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussKernel {
    pub shape: GroupShape,
    pub q: i128,
    first: Vec<Complex64>,
    second: Vec<Complex64>,
}

fn residues(n: usize, q: i128) -> impl Iterator<Item = Vec<i128>> {
    crate::rational::residue_vectors(n, q)
}

fn over_q(points: &[RationalVector], q: i128) -> Result<Vec<Vec<i128>>> {
    points
        .iter()
        .map(|s| s.numerators_over(q).ok_or_else(|| Error::invalid(format!("{s} is not in the lattice (1/{q})Z"))))
        .collect()
}

/// Largest `|J_Q|` tabulated.
pub const MAX_TABLE: u128 = 1 << 26;

pub fn gauss_operator_kernel(shape: GroupShape, a: &RationalSet, b: &RationalSet, q: i128) -> Result<GaussKernel> {
    let (d, dp) = (shape.degree(), shape.d_prime());
    if q < 1 {
        return Err(Error::invalid(format!("modulus Q must be >= 1, got {q}")));
    }
    if a.dim() != d || b.dim() != dp {
        return Err(Error::invalid(format!("need A of dimension {d} and B of dimension {dp}")));
    }
    let (na, nb) = ((q as u128).pow(d as u32), (q as u128).pow(dp as u32));
    if na.max(nb) > MAX_TABLE {
        return Err(Error::infeasible(format!("Q^{} entries", d.max(dp))));
    }
    let pa = enumerate_rationals(a)?;
    let pb = enumerate_rationals(b)?;
    let sa = pa.iter().map(gauss_sum_complete).collect::<Result<Vec<_>>>()?;
    let (ia, ib) = (over_q(&pa, q)?, over_q(&pb, q)?);
    let roots: Vec<Complex64> = (0..q).map(|k| Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / q as f64)).collect();
    let table = |n: usize, idx: &[Vec<i128>], coef: &dyn Fn(usize) -> Complex64| -> Vec<Complex64> {
        residues(n, q)
            .map(|bv| {
                idx.iter()
                    .enumerate()
                    .map(|(i, s)| {
                        let k = bv.iter().zip(s).fold(0i128, |acc, (x, y)| (acc + x * y) % q);
                        coef(i) * roots[k as usize]
                    })
                    .sum::<Complex64>()
            })
            .collect()
    };
    let scale = (q as f64).powi(-((d + dp) as i32));
    let first: Vec<Complex64> = table(d, &ia, &|i| sa[i] * scale);
    let second: Vec<Complex64> = table(dp, &ib, &|_| Complex64::new(1.0, 0.0));
    Ok(GaussKernel { shape, q, first, second })
}

impl GaussKernel {
    pub fn eval(&self, b: &LatticeElement) -> Complex64 {
        let d = self.shape.degree();
        let idx = |c: &[i128]| c.iter().fold(0usize, |acc, x| acc * self.q as usize + x.rem_euclid(self.q) as usize);
        self.first[idx(&b.coords()[..d])] * self.second[idx(&b.coords()[d..])]
    }

    /// Values on all of `J_Q` in [`jq_index`] order.
    pub fn dense(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.first.len() * self.second.len());
        for a in &self.first {
            for b in &self.second {
                out.push(a * b);
            }
        }
        out
    }

    pub fn l1_norm(&self) -> f64 {
        self.first.iter().map(|v| v.norm()).sum::<f64>() * self.second.iter().map(|v| v.norm()).sum::<f64>()
    }
}

/// `Q^{-1} #{n in Z_Q : A0(n) = b mod Q}` on all of `J_Q`, in [`jq_index`] order.
pub fn moment_counting_kernel(shape: GroupShape, q: i128) -> Result<Vec<f64>> {
    let size = (q as u128).pow(shape.len() as u32);
    if size > MAX_TABLE * 4 {
        return Err(Error::infeasible(format!("|J_Q| = {size}")));
    }
    let mut out = vec![0.0; size as usize];
    for n in 0..q {
        out[jq_index(&moment_curve(n, shape)?, q)] += 1.0 / q as f64;
    }
    Ok(out)
}

/// Parameters of the weight kernel `W_{k,w,Q}` on `H_Q`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightKernelParams {
    pub d: usize,
    pub tau: f64,
    pub delta: f64,
    pub delta_prime: f64,
    pub k: u32,
    pub w: u32,
    pub q: i128,
}

/// `W(h) = Q^{d+d'} phi_k(h) int eta_{<=d'w}(tau^k o xi) eta_{<=dw}(tau^k o theta) e(h.(xi, theta)) J_k(xi) dxi dtheta`.
///
/// The Fourier integrals are done in closed form: with `a1 = floor(delta' w)`,
/// `a2 = floor(delta w)` and `F_m` the transform of `eta0(|.|)` on `R^m`,
///
/// `W(h) = Q^{d+d'} phi_k(h) prod tau^{a - k(l1+l2)}
///         int chi(y) F_d(tau^{a1} |tau^{-k} o h^(1) - A0(y)|) dy
///         F_{d'}(tau^{a2} |tau^{-k} o h^(2)|)`,
///
/// leaving a single quadrature in `y`.
pub struct WeightKernel {
    pub params: WeightKernelParams,
    shape: GroupShape,
    f1: std::sync::Arc<RadialTransform>,
    f2: std::sync::Arc<RadialTransform>,
    nodes: Vec<(f64, f64)>,
    prefactor: f64,
}

impl WeightKernel {
    pub fn new(params: WeightKernelParams) -> Result<Self> {
        let shape = GroupShape::new(params.d)?;
        if params.d < 2 {
            return Err(Error::invalid("the weight kernel needs d >= 2"));
        }
        if !(params.tau > 1.0 && params.tau <= 2.0) {
            return Err(Error::invalid(format!("tau must lie in (1, 2], got {}", params.tau)));
        }
        if !(params.delta > 0.0 && params.delta <= params.delta_prime && params.delta_prime < 1.0) {
            return Err(Error::invalid("need 0 < delta <= delta' < 1"));
        }
        if params.q < 1 {
            return Err(Error::invalid(format!("modulus Q must be >= 1, got {}", params.q)));
        }
        let (a1, a2) = (params.a1(), params.a2());
        let tau = params.tau;
        let k = params.k as f64;
        let mut pre = (params.q as f64).powi(shape.len() as i32);
        for &(l1, l2) in &shape.index_set() {
            let a = if l2 == 0 { a1 } else { a2 };
            pre *= tau.powf(a as f64 - k * (l1 + l2) as f64);
        }
        // chi lives on [-2, 2]; the panels follow the curve speed
        let panels = 64 * (1 + (tau.powi(a1 as i32) * 2f64.powi(params.d as i32 - 1)) as usize).min(4096);
        let nodes = quad::composite_nodes(-2.0, 2.0, panels)
            .into_iter()
            .map(|(x, w)| (x, w * Cutoff::Chi.eval(x)))
            .filter(|n| n.1 != 0.0)
            .collect();
        Ok(WeightKernel {
            params,
            shape,
            f1: RadialTransform::get(params.d)?,
            f2: RadialTransform::get(shape.d_prime())?,
            nodes,
            prefactor: pre,
        })
    }

    pub fn shape(&self) -> GroupShape {
        self.shape
    }

    /// `phi_k(h) = eta_{<=delta k}(|tau^{-k} o h^(1)|) eta_{<=delta k}(|tau^{-k} o h^(2)|)`.
    pub fn phi_k(&self, h: &LatticeElement) -> f64 {
        let p = &self.params;
        let cut = Cutoff::EtaLeq { tau: p.tau, a: p.delta * p.k as f64 };
        let w = self.shape.weights();
        let d = self.shape.degree();
        cut.eval(scaled_radius(p.tau, p.k, &w[..d], h.first())) * cut.eval(scaled_radius(p.tau, p.k, &w[d..], h.second()))
    }

    pub fn eval(&self, h: &LatticeElement) -> Result<f64> {
        if h.shape() != self.shape {
            return Err(Error::ShapeMismatch { expected: self.shape.degree(), found: h.shape().degree() });
        }
        let q = self.params.q;
        if h.coords().iter().any(|c| c.rem_euclid(q) != 0) {
            return Err(Error::invalid(format!("{h} is not in H_Q for Q = {q}")));
        }
        let phi = self.phi_k(h);
        if phi == 0.0 {
            return Ok(0.0);
        }
        let p = &self.params;
        let (s1, s2) = (p.tau.powi(p.a1() as i32), p.tau.powi(p.a2() as i32));
        let w = self.shape.weights();
        let d = self.shape.degree();
        let h1: Vec<f64> = h.first().iter().zip(&w).map(|(x, l)| *x as f64 * p.tau.powf(-(p.k as f64) * *l as f64)).collect();
        let r2 = scaled_radius(p.tau, p.k, &w[d..], h.second());
        let second = self.f2.eval(s2 * r2);
        if second == 0.0 {
            return Ok(0.0);
        }
        let mut inner = 0.0;
        for &(y, wt) in &self.nodes {
            let mut r = 0.0;
            let mut yp = 1.0;
            for x in &h1 {
                yp *= y;
                r += (x - yp) * (x - yp);
            }
            inner += wt * self.f1.eval(s1 * r.sqrt());
        }
        Ok(self.prefactor * phi * inner * second)
    }

    /// `Q^{d+d'} * int |eta| * int |eta| * int chi`, which dominates `|W|`.
    pub fn modulus_bound(&self) -> f64 {
        self.prefactor * self.f1.eval(0.0) * self.f2.eval(0.0) * 3.0
    }
}

impl WeightKernelParams {
    pub fn a1(&self) -> u32 {
        (self.delta_prime * self.w as f64).floor() as u32
    }

    pub fn a2(&self) -> u32 {
        (self.delta * self.w as f64).floor() as u32
    }
}

use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::system::{CycleTable, NilSystem};
use crate::cutoff::Cutoff;
use crate::error::{Error, Result};
use crate::group::{moment_curve, GroupShape, LatticeElement};
use crate::sparse::{AverageParams, Scale, SparseFunction};
use crate::variation::{IndexedSequence, Seminorm};

/// An integer polynomial with `P(0) = 0`; `coefficients[i]` multiplies `n^i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntPolynomial {
    coefficients: Vec<i128>,
}

impl IntPolynomial {
    pub fn new(coefficients: Vec<i128>) -> Result<Self> {
        if coefficients.first().copied().unwrap_or(0) != 0 {
            return Err(Error::invalid("polynomials must vanish at 0"));
        }
        Ok(IntPolynomial { coefficients })
    }

    /// `n^j`.
    pub fn monomial(j: usize) -> Self {
        let mut c = vec![0; j + 1];
        c[j] = 1;
        IntPolynomial { coefficients: c }
    }

    pub fn coefficients(&self) -> &[i128] {
        &self.coefficients
    }

    pub fn degree(&self) -> usize {
        self.coefficients.iter().rposition(|c| *c != 0).unwrap_or(0)
    }

    pub fn eval(&self, n: i128) -> Option<i128> {
        self.coefficients.iter().rev().try_fold(0i128, |acc, c| acc.checked_mul(n)?.checked_add(*c))
    }

    /// `P(n) mod m` in `[0, m)`.
    pub fn eval_mod(&self, n: i128, m: u64) -> u64 {
        let m = m as i128;
        let n = n.rem_euclid(m);
        let mut acc = 0i128;
        for c in self.coefficients.iter().rev() {
            acc = (acc * n + c.rem_euclid(m)) % m;
        }
        acc as u64
    }
}

/// Which average to take.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Averaging {
    /// `|[-N, N] cap Z|^{-1} sum_{|n| <= N}`.
    Rough,
    /// `sum_n N^{-1} c(n / N)`.
    Smoothed { cutoff: Cutoff },
    /// `sum_n N^{-1} 1_{[-1, 1]}(n / N)`.
    Indicator,
}

impl Averaging {
    pub fn weights(&self, n_scale: u64) -> Result<Vec<(i64, f64)>> {
        if n_scale == 0 {
            return Err(Error::invalid("N must be >= 1"));
        }
        let nf = n_scale as f64;
        let n = n_scale as i64;
        Ok(match self {
            Averaging::Rough => (-n..=n).map(|m| (m, 1.0 / (2 * n + 1) as f64)).collect(),
            Averaging::Indicator => (-n..=n).map(|m| (m, 1.0 / nf)).collect(),
            Averaging::Smoothed { cutoff } => {
                cutoff.validate()?;
                let reach = (cutoff.support_radius() * nf).ceil() as i64;
                (-reach..=reach)
                    .filter_map(|m| {
                        let w = cutoff.eval(m as f64 / nf) / nf;
                        (w != 0.0).then_some((m, w))
                    })
                    .collect()
            }
        })
    }
}

struct Orbit<'a> {
    tables: Vec<CycleTable>,
    polys: &'a [IntPolynomial],
}

impl<'a> Orbit<'a> {
    fn new(sys: &NilSystem, polys: &'a [IntPolynomial]) -> Result<Self> {
        if polys.len() != sys.arity() {
            return Err(Error::invalid(format!("{} polynomials for {} generators", polys.len(), sys.arity())));
        }
        Ok(Orbit { tables: sys.generators().iter().map(CycleTable::new).collect(), polys })
    }

    /// `T_1^{P_1(n)} .. T_d^{P_d(n)} x`.
    fn image(&self, x: usize, n: i64) -> usize {
        let mut y = x;
        for (t, p) in self.tables.iter().zip(self.polys).rev() {
            let e = p.eval_mod(n as i128, t.cycle_len(y));
            y = t.step(y, e);
        }
        y
    }
}

fn check_f(sys: &NilSystem, len: usize) -> Result<()> {
    if len != sys.len() {
        return Err(Error::invalid(format!("f has {len} values on a system of {} points", sys.len())));
    }
    Ok(())
}

/// `A_N f(x) = sum_n w_N(n) f(T_1^{P_1(n)} .. T_d^{P_d(n)} x)`.
pub fn ergodic_average(sys: &NilSystem, f: &[f64], polys: &[IntPolynomial], n: u64, averaging: Averaging) -> Result<Vec<f64>> {
    check_f(sys, f.len())?;
    let orbit = Orbit::new(sys, polys)?;
    let w = averaging.weights(n)?;
    Ok((0..sys.len())
        .into_par_iter()
        .map(|x| w.iter().map(|&(m, c)| c * f[orbit.image(x, m)]).sum())
        .collect())
}

/// The rough average of an integer-valued `f` as reduced fractions `(num, den)`.
pub fn rough_average_exact(sys: &NilSystem, f: &[i64], polys: &[IntPolynomial], n: u64) -> Result<Vec<(i128, i128)>> {
    check_f(sys, f.len())?;
    let orbit = Orbit::new(sys, polys)?;
    let den = 2 * n as i128 + 1;
    Ok((0..sys.len())
        .map(|x| {
            let num: i128 = (-(n as i64)..=n as i64).map(|m| f[orbit.image(x, m)] as i128).sum();
            let g = num.gcd(&den);
            (num / g, den / g)
        })
        .collect())
}

/// Pointwise maximal function and variation over a list of scales.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaximalReport {
    pub scales: Vec<f64>,
    pub p: f64,
    pub seminorm: Option<String>,
    pub sup: Vec<f64>,
    pub variation: Option<Vec<f64>>,
    pub f_norm: f64,
    pub sup_ratio: f64,
    pub variation_ratio: Option<f64>,
}

fn lp(values: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        values.iter().fold(0.0, |m, v| m.max(v.abs()))
    } else {
        values.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0) {
        return Err(Error::invalid(format!("p must be >= 1, got {p}")));
    }
    Ok(())
}

/// `sigma[x][k]` are the averages at scale `k`.
fn report(scales: Vec<f64>, series: &[Vec<f64>], f: &[f64], seminorm: Option<Seminorm>, p: f64) -> Result<MaximalReport> {
    let sup: Vec<f64> = series.iter().map(|s| s.iter().fold(0.0f64, |m, v| m.max(v.abs()))).collect();
    let variation = match seminorm {
        Some(sn) => Some(
            series
                .iter()
                .map(|s| sn.eval(&IndexedSequence::from_reals(s)))
                .collect::<Result<Vec<_>>>()?,
        ),
        None => None,
    };
    let f_norm = lp(f, p);
    let ratio = |v: &[f64]| if f_norm > 0.0 { lp(v, p) / f_norm } else { 0.0 };
    Ok(MaximalReport {
        scales,
        p,
        seminorm: seminorm.map(|s| s.label()),
        sup_ratio: ratio(&sup),
        variation_ratio: variation.as_deref().map(ratio),
        sup,
        variation,
        f_norm,
    })
}

/// `sup_k |A_{N_k} f|` and `V^rho(A_{N_k} f : k)` on a system, with their
/// `l^p` norms relative to `||f||_p`.
pub fn maximal_and_variation(
    sys: &NilSystem,
    f: &[f64],
    polys: &[IntPolynomial],
    scales: &[u64],
    averaging: Averaging,
    seminorm: Option<Seminorm>,
    p: f64,
) -> Result<MaximalReport> {
    if scales.is_empty() {
        return Err(Error::invalid("the scale list is empty"));
    }
    check_p(p)?;
    let per_scale = scales
        .iter()
        .map(|&n| ergodic_average(sys, f, polys, n, averaging))
        .collect::<Result<Vec<_>>>()?;
    let series: Vec<Vec<f64>> = (0..sys.len()).map(|x| per_scale.iter().map(|a| a[x]).collect()).collect();
    report(scales.iter().map(|&n| n as f64).collect(), &series, f, seminorm, p)
}

/// The same for the smoothed averages
/// `M_N f(x) = sum_n N^{-1} chi(n/N) f(A0(n)^{-1} x)` on `G0`, evaluated
/// on every point where some `M_N f` can be non-zero.
pub fn group_maximal(
    f: &SparseFunction<f64>,
    scales: &[f64],
    seminorm: Option<Seminorm>,
    p: f64,
) -> Result<(MaximalReport, Vec<LatticeElement>)> {
    if scales.is_empty() {
        return Err(Error::invalid("the scale list is empty"));
    }
    check_p(p)?;
    let shape = f.shape();
    let params = scales
        .iter()
        .map(|&n| AverageParams::new(shape, Scale::N(n)))
        .collect::<Result<Vec<_>>>()?;
    let reach = params.iter().flat_map(|p| p.weights()).map(|(n, _)| n.abs()).max().unwrap_or(0);
    // weights[k][n + reach], zero outside the support of the k-th average
    let weights: Vec<Vec<f64>> = params
        .iter()
        .map(|p| {
            let mut w = vec![0.0; 2 * reach as usize + 1];
            for (n, c) in p.weights() {
                w[(n + reach) as usize] = c;
            }
            w
        })
        .collect();
    let curve = (-reach..=reach).map(|n| moment_curve(n, shape)).collect::<Result<Vec<_>>>()?;
    let fy: Vec<(&LatticeElement, f64)> = f.iter().map(|(y, v)| (y, *v)).collect();
    // every contribution (x = A0(n) . y, n, f(y)), grouped by x
    let mut hits: Vec<(Vec<i128>, i128, f64)> = curve
        .par_iter()
        .enumerate()
        .flat_map_iter(|(i, a)| {
            let n = i as i128 - reach;
            fy.iter().map(move |(y, v)| (a.multiply(y).map(|x| x.into_coords()), n, *v))
        })
        .map(|(x, n, v)| x.map(|x| (x, n, v)))
        .collect::<Result<Vec<_>>>()?;
    hits.par_sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut points = Vec::new();
    let mut series = Vec::new();
    let mut i = 0;
    while i < hits.len() {
        let mut j = i;
        let mut vals = vec![0.0; scales.len()];
        while j < hits.len() && hits[j].0 == hits[i].0 {
            let at = (hits[j].1 + reach) as usize;
            for (v, w) in vals.iter_mut().zip(&weights) {
                *v += w[at] * hits[j].2;
            }
            j += 1;
        }
        points.push(LatticeElement::new(shape, hits[i].0.clone())?);
        series.push(vals);
        i = j;
    }
    let fv: Vec<f64> = f.iter().map(|(_, v)| *v).collect();
    Ok((report(scales.to_vec(), &series, &fv, seminorm, p)?, points))
}

/// A lower bound for an operator norm from sampling.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub lower_bound: f64,
    pub trials: usize,
    pub method: NormMethod,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMethod {
    RandomFunctions,
    PowerIteration,
}

/// `max ||sup_k |A_{N_k} f| ||_p / ||f||_p` over seeded random `f` with values in `[-1, 1]`.
pub fn maximal_norm_sampled(
    sys: &NilSystem,
    polys: &[IntPolynomial],
    scales: &[u64],
    averaging: Averaging,
    p: f64,
    trials: usize,
    seed: u64,
) -> Result<NormEstimate> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0.0f64;
    for _ in 0..trials {
        let f: Vec<f64> = (0..sys.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        best = best.max(maximal_and_variation(sys, &f, polys, scales, averaging, None, p)?.sup_ratio);
    }
    Ok(NormEstimate { lower_bound: best, trials, method: NormMethod::RandomFunctions })
}

/// `||A_N||_{2 -> 2}` by power iteration on `A_N^* A_N`.
pub fn average_norm_power(
    sys: &NilSystem,
    polys: &[IntPolynomial],
    n: u64,
    averaging: Averaging,
    iterations: usize,
    seed: u64,
) -> Result<NormEstimate> {
    let orbit = Orbit::new(sys, polys)?;
    let w = averaging.weights(n)?;
    let images: Vec<Vec<usize>> = (0..sys.len()).map(|x| w.iter().map(|&(m, _)| orbit.image(x, m)).collect()).collect();
    let apply = |f: &[f64]| -> Vec<f64> { images.iter().map(|im| im.iter().zip(&w).map(|(y, (_, c))| c * f[*y]).sum()).collect() };
    let adjoint = |g: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; g.len()];
        for (x, im) in images.iter().enumerate() {
            for (y, (_, c)) in im.iter().zip(&w) {
                out[*y] += c * g[x];
            }
        }
        out
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..sys.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut est = 0.0;
    for _ in 0..iterations.max(1) {
        let norm = lp(&v, 2.0);
        if norm == 0.0 {
            break;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        let av = apply(&v);
        est = lp(&av, 2.0);
        v = adjoint(&av);
    }
    Ok(NormEstimate { lower_bound: est, trials: iterations.max(1), method: NormMethod::PowerIteration })
}

/// `|{x : Mf(x) >= lambda}| * lambda / ||f||_1` for a function sampled on a finite set.
pub fn weak_type_ratio(values: &[f64], lambda: f64, f_l1: f64) -> f64 {
    let count = values.iter().filter(|v| **v >= lambda).count();
    count as f64 * lambda / f_l1
}

/// The rough or smoothed average of `F(g) = f(g mod Q)` along the moment curve
/// of `G0`: `sum_n w_N(n) F(A0(n) x)`.
pub fn moment_average_on_group(
    shape: GroupShape,
    q: i128,
    f: &[f64],
    n: u64,
    averaging: Averaging,
    x: &LatticeElement,
) -> Result<f64> {
    let w = averaging.weights(n)?;
    let mut acc = 0.0;
    for (m, c) in w {
        let g = moment_curve(m as i128, shape)?.multiply(x)?;
        acc += c * f[crate::group::jq_index(&g, q)];
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclic_examples() {
        let sys = NilSystem::cyclic(5).unwrap();
        let mut f = vec![0.0; 5];
        f[0] = 1.0;
        let a = ergodic_average(&sys, &f, &[IntPolynomial::monomial(1)], 2, Averaging::Rough).unwrap();
        assert!((a[0] - 0.2).abs() < 1e-15);
        let exact = rough_average_exact(&sys, &[1, 0, 0, 0, 0], &[IntPolynomial::monomial(1)], 2).unwrap();
        assert_eq!(exact[0], (1, 5));
        let c = ergodic_average(&sys, &[2.5; 5], &[IntPolynomial::monomial(2)], 7, Averaging::Rough).unwrap();
        assert!(c.iter().all(|v| (v - 2.5).abs() < 1e-12));
    }

    #[test]
    fn rough_vs_indicator() {
        let sys = NilSystem::cyclic(7).unwrap();
        let f: Vec<f64> = (0..7).map(|i| (i * i) as f64).collect();
        let poly = [IntPolynomial::new(vec![0, 1, 1]).unwrap()];
        let r = ergodic_average(&sys, &f, &poly, 4, Averaging::Rough).unwrap();
        let s = ergodic_average(&sys, &f, &poly, 4, Averaging::Indicator).unwrap();
        for (a, b) in r.iter().zip(&s) {
            assert!((a * 9.0 / 4.0 - b).abs() < 1e-12);
        }
    }

    #[test]
    fn polynomial_eval() {
        let p = IntPolynomial::new(vec![0, 3, 0, -2]).unwrap();
        assert_eq!(p.eval(2), Some(6 - 16));
        assert_eq!(p.eval_mod(2, 7), (-10i128).rem_euclid(7) as u64);
        assert_eq!(p.degree(), 3);
        assert!(IntPolynomial::new(vec![1, 1]).is_err());
    }

    #[test]
    fn power_iteration_on_translation() {
        // averages of translations on a cyclic group have norm 1 (constants)
        let sys = NilSystem::cyclic(11).unwrap();
        let e = average_norm_power(&sys, &[IntPolynomial::monomial(1)], 3, Averaging::Rough, 200, 1).unwrap();
        assert!((e.lower_bound - 1.0).abs() < 1e-6);
    }
}

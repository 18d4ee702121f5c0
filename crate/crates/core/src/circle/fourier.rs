//! Exact torus integrals of bump multipliers.
//!
//! For a 1-periodic set `A` of rationals and a radial bump `eta`,
//!
//! `int_T e(h.xi) sum_{a/q in A} eta(tau^k o (xi - a/q)) dxi
//!     = C_A(h) * tau^{-k W} * eta^(tau^{-k} o h)`
//!
//! where `W` is the sum of the dilation weights and `C_A(h) = sum e(h.a/q)`.
//! For sets made of all reduced fractions with denominators in a set `D`,
//! `C_A(h) = sum_{q in D} sum_{f | gcd(q, h)} mu(q/f) f^m`.

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use num_integer::Integer;
use rustfft::FftPlanner;

use crate::cutoff::eta0;
use crate::error::{Error, Result};
use crate::quad;
use crate::rational::{enumerate_rationals, farey_denominators, RationalSet, RationalVector};

const SAMPLE_STEP: f64 = 1.0 / 512.0;
const FFT_LEN: usize = 1 << 21;
/// Largest radius kept in the transform table; beyond it `|eta0^| < 1e-14`.
pub const RHO_MAX: f64 = 128.0;

/// `F_m(rho) = int_{R^m} eta0(|v|) e(-y.v) dv` at `|y| = rho`, tabulated.
pub struct RadialTransform {
    m: usize,
    step: f64,
    values: Vec<f64>,
}

fn half_gamma(twice: usize) -> f64 {
    // Gamma(twice / 2) for twice >= 1
    if twice == 1 {
        std::f64::consts::PI.sqrt()
    } else if twice == 2 {
        1.0
    } else {
        (twice as f64 / 2.0 - 1.0) * half_gamma(twice - 2)
    }
}

/// Marginal of `eta0(|v|)` along one axis in `m` dimensions.
fn marginal(m: usize, t: f64) -> Result<f64> {
    if t.abs() >= 2.0 {
        return Ok(0.0);
    }
    if m == 1 {
        return Ok(eta0(t));
    }
    let sphere = 2.0 * std::f64::consts::PI.powf((m - 1) as f64 / 2.0) / half_gamma(m - 1);
    let top = (4.0 - t * t).sqrt();
    let v = quad::integrate(
        |s| Complex64::new(eta0((t * t + s * s).sqrt()) * s.powi(m as i32 - 2), 0.0),
        0.0,
        top,
        1e-14,
        4,
    )?;
    Ok(sphere * v.re)
}

impl RadialTransform {
    fn build(m: usize) -> Result<Self> {
        let half = (2.0 / SAMPLE_STEP) as usize;
        let mut buf = vec![Complex64::new(0.0, 0.0); FFT_LEN];
        for j in 0..=half {
            let v = marginal(m, j as f64 * SAMPLE_STEP)?;
            buf[j] = Complex64::new(v, 0.0);
            if j > 0 {
                buf[FFT_LEN - j] = Complex64::new(v, 0.0);
            }
        }
        FftPlanner::new().plan_fft_forward(FFT_LEN).process(&mut buf);
        let step = 1.0 / (FFT_LEN as f64 * SAMPLE_STEP);
        let count = (RHO_MAX / step) as usize + 4;
        let values = buf[..count].iter().map(|c| c.re * SAMPLE_STEP).collect();
        Ok(RadialTransform { m, step, values })
    }

    /// The shared table for dimension `m`.
    pub fn get(m: usize) -> Result<Arc<RadialTransform>> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<RadialTransform>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(t) = cache.lock().expect("transform cache").get(&m) {
            return Ok(t.clone());
        }
        let t = Arc::new(Self::build(m)?);
        cache.lock().expect("transform cache").insert(m, t.clone());
        Ok(t)
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    /// Cubic interpolation in the table; zero past [`RHO_MAX`].
    pub fn eval(&self, rho: f64) -> f64 {
        let x = rho.abs() / self.step;
        if rho.abs() >= RHO_MAX {
            return 0.0;
        }
        let i = x.floor() as usize;
        let u = x - i as f64;
        // points i-1, i, i+1, i+2; the transform is even in rho
        let at = |j: isize| self.values[j.unsigned_abs()];
        let (p0, p1, p2, p3) = (at(i as isize - 1), at(i as isize), at(i as isize + 1), at(i as isize + 2));
        let c0 = -u * (u - 1.0) * (u - 2.0) / 6.0;
        let c1 = (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0;
        let c2 = -(u + 1.0) * u * (u - 2.0) / 2.0;
        let c3 = (u + 1.0) * u * (u - 1.0) / 6.0;
        c0 * p0 + c1 * p1 + c2 * p2 + c3 * p3
    }
}

/// Fourier transform of the dilated radial bump `x -> eta0(tau^{-floor A} |x|)`
/// in `m` dimensions, evaluated at a frequency of Euclidean length `rho`.
pub fn bump_transform(table: &RadialTransform, tau: f64, a: f64, rho: f64) -> f64 {
    if a < 0.0 {
        return 0.0;
    }
    let s = tau.powi(a.floor() as i32);
    s.powi(table.dim() as i32) * table.eval(s * rho)
}

fn mobius(mut n: i128) -> i32 {
    let mut sign = 1;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            sign = -sign;
        }
        p += 1;
    }
    if n > 1 {
        sign = -sign;
    }
    sign
}

fn divisors(n: i128) -> Vec<i128> {
    let mut out = Vec::new();
    let mut i = 1;
    while i * i <= n {
        if n % i == 0 {
            out.push(i);
            if i * i != n {
                out.push(n / i);
            }
        }
        i += 1;
    }
    out.sort_unstable();
    out
}

/// Largest denominator accepted in a denominator set.
pub const MAX_DENOMINATOR: i128 = 1 << 40;

/// Denominators of a set that consists of every reduced fraction with
/// denominator in it; `None` for sets that are not of that form.
pub fn denominator_set(set: &RationalSet) -> Result<Option<BTreeSet<i128>>> {
    Ok(match set {
        RationalSet::Farey { s, tau, .. } => {
            let (lo, hi) = farey_denominators(*s, *tau);
            Some((lo..=hi).collect())
        }
        RationalSet::DenominatorRange { q_lo, q_hi, .. } => Some(((*q_lo).max(1)..=*q_hi).collect()),
        RationalSet::FixedDenominator { q, .. } => {
            if *q < 1 || *q > MAX_DENOMINATOR {
                return Err(Error::invalid(format!("denominator {q} out of range")));
            }
            Some(divisors(*q).into_iter().collect())
        }
        RationalSet::Union { sets } => {
            let mut out = BTreeSet::new();
            for s in sets {
                match denominator_set(s)? {
                    Some(d) => out.extend(d),
                    None => return Ok(None),
                }
            }
            Some(out)
        }
        RationalSet::Difference { keep, remove } => match (denominator_set(keep)?, denominator_set(remove)?) {
            (Some(a), Some(b)) => Some(a.difference(&b).copied().collect()),
            _ => None,
        },
        RationalSet::Explicit { .. } => None,
    })
}

/// `C_A(h) = sum_{a/q in A} e(h.a/q)` for a fixed set `A`.
#[derive(Clone, Debug)]
pub enum CharacterSum {
    /// Per denominator: `(f, mu(q/f) f^m)` over divisors `f` of `q`.
    Denominators(Vec<(i128, Vec<(i128, f64)>)>),
    Points(Vec<RationalVector>),
}

impl CharacterSum {
    pub fn new(set: &RationalSet) -> Result<Self> {
        let m = set.dim() as i32;
        match denominator_set(set)? {
            Some(ds) => {
                let mut out = Vec::with_capacity(ds.len());
                for q in ds {
                    if q > MAX_DENOMINATOR {
                        return Err(Error::invalid(format!("denominator {q} out of range")));
                    }
                    let terms = divisors(q)
                        .into_iter()
                        .filter_map(|f| {
                            let mu = mobius(q / f);
                            (mu != 0).then(|| (f, mu as f64 * (f as f64).powi(m)))
                        })
                        .collect();
                    out.push((q, terms));
                }
                Ok(CharacterSum::Denominators(out))
            }
            None => Ok(CharacterSum::Points(enumerate_rationals(set)?)),
        }
    }

    /// Number of fractions in the set.
    pub fn count(&self) -> f64 {
        self.eval(&[])
    }

    /// `C_A(h)`; the sum is real because every supported set is symmetric
    /// under `a -> -a` except explicit ones, whose real part is returned.
    pub fn eval(&self, h: &[i128]) -> f64 {
        match self {
            CharacterSum::Denominators(list) => {
                let g = h.iter().fold(0i128, |g, v| g.gcd(v));
                list.iter()
                    .map(|(_, terms)| terms.iter().filter(|(f, _)| g % f == 0).map(|(_, v)| v).sum::<f64>())
                    .sum()
            }
            CharacterSum::Points(points) => points
                .iter()
                .map(|p| {
                    let q = p.denominator();
                    let r = p
                        .numerators()
                        .iter()
                        .zip(h)
                        .fold(0i128, |acc, (a, x)| (acc + (a * x.rem_euclid(q)) % q) % q);
                    (2.0 * std::f64::consts::PI * r as f64 / q as f64).cos()
                })
                .sum(),
        }
    }

    /// `C_A` keyed by `gcd(h)` where possible; callers cache on the gcd.
    pub fn depends_on_gcd_only(&self) -> bool {
        matches!(self, CharacterSum::Denominators(_))
    }
}

/// Exact torus integral of one bump family:
/// `int_T e(h.xi) sum_{a/q} eta_{<=A}(tau^k o (xi - a/q)) dxi`.
pub fn bump_integral(
    chars: &CharacterSum,
    table: &RadialTransform,
    tau: f64,
    k: u32,
    weights: &[u32],
    width: f64,
    h: &[i128],
) -> f64 {
    let c = chars.eval(h);
    if c == 0.0 {
        return 0.0;
    }
    let rho = scaled_radius(tau, k, weights, h);
    let jac = tau.powf(-(k as f64) * weights.iter().sum::<u32>() as f64);
    c * jac * bump_transform(table, tau, width, rho)
}

/// `|tau^{-k} o h|` with per-coordinate weights.
pub fn scaled_radius(tau: f64, k: u32, weights: &[u32], h: &[i128]) -> f64 {
    h.iter()
        .zip(weights)
        .map(|(x, w)| {
            let v = *x as f64 * tau.powf(-(k as f64) * *w as f64);
            v * v
        })
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::residue_vectors;

    #[test]
    fn transform_at_zero_is_mass() {
        let t1 = RadialTransform::get(1).unwrap();
        assert!((t1.eval(0.0) - 3.0).abs() < 1e-12);
        // integer frequencies vanish because eta0(t) + eta0(t - 1) + ... tiles
        assert!(t1.eval(1.0).abs() < 1e-12);
        let direct = quad::integrate(
            |t| Complex64::new(eta0(t) * (2.0 * std::f64::consts::PI * 0.37 * t).cos(), 0.0),
            -2.0,
            2.0,
            1e-14,
            8,
        )
        .unwrap();
        assert!((t1.eval(0.37) - direct.re).abs() < 1e-10);
    }

    #[test]
    fn two_dim_mass() {
        let t2 = RadialTransform::get(2).unwrap();
        let mass = quad::integrate(
            |r| Complex64::new(2.0 * std::f64::consts::PI * r * eta0(r), 0.0),
            0.0,
            2.0,
            1e-14,
            8,
        )
        .unwrap();
        assert!((t2.eval(0.0) - mass.re).abs() < 1e-10);
    }

    #[test]
    fn ramanujan_sums_match_enumeration() {
        for m in 1..=2usize {
            let set = RationalSet::DenominatorRange { m, q_lo: 1, q_hi: 12 };
            let fast = CharacterSum::new(&set).unwrap();
            let slow = CharacterSum::Points(enumerate_rationals(&set).unwrap());
            for h in residue_vectors(m, 9) {
                let h: Vec<i128> = h.iter().map(|v| v - 3).collect();
                assert!((fast.eval(&h) - slow.eval(&h)).abs() < 1e-9, "m={m} h={h:?}");
            }
        }
    }

    #[test]
    fn fixed_and_difference_sets() {
        let fixed = RationalSet::FixedDenominator { m: 2, q: 6 };
        let c = CharacterSum::new(&fixed).unwrap();
        assert_eq!(c.eval(&[6, 12]), 36.0);
        assert_eq!(c.eval(&[1, 0]), 0.0);
        let diff = RationalSet::Difference {
            keep: Box::new(RationalSet::Farey { m: 2, s: 2, tau: 2.0 }),
            remove: Box::new(fixed),
        };
        let fast = CharacterSum::new(&diff).unwrap();
        let slow = CharacterSum::Points(enumerate_rationals(&diff).unwrap());
        for h in [[0i128, 0], [1, 2], [4, 6], [5, 5], [12, 0]] {
            assert!((fast.eval(&h) - slow.eval(&h)).abs() < 1e-9);
        }
    }

    #[test]
    fn mobius_values() {
        let mu: Vec<i32> = (1..=10).map(mobius).collect();
        assert_eq!(mu, vec![1, -1, -1, 0, -1, 1, -1, 0, 0, 1]);
    }
}

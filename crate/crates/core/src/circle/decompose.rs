//! The two-stage major/minor arc decomposition of `K_k = L_k (x) 1_0`.
//!
//! Every kernel here is a product `L(g^(1)) N(g^(2))`, so components are
//! stored as their two factors sampled on probe sets of non-central and
//! central coordinates. Torus integrals of bump multipliers are evaluated
//! exactly through [`super::fourier::bump_integral`]; the complements come from
//! `int e(h.xi) S_k(xi) dxi = sum_n w_n 1{h = A0(n)}` and
//! `int e(h.xi) dxi = 1{h = 0}`.

use std::collections::{BTreeSet, HashMap};

use num_complex::Complex64;
use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::fourier::{bump_transform, scaled_radius, CharacterSum, RadialTransform, RHO_MAX};
use super::multiplier::{build_multiplier, bumps_disjoint, MultiplierGrid, MultiplierSpec, Variable};
use super::params::DecompositionParams;
use crate::cutoff::Cutoff;
use crate::error::{Error, Result};
use crate::rational::RationalSet;

/// Weights `(n, tau^{-k} chi(tau^{-k} n))` of `L_k` and `S_k`.
pub fn kernel_weights(tau: f64, k: u32) -> Vec<(i128, f64)> {
    let scale = tau.powi(k as i32);
    let reach = (2.0 * scale).ceil() as i128;
    (-reach..=reach)
        .filter_map(|n| {
            let w = Cutoff::Chi.eval(n as f64 / scale) / scale;
            (w != 0.0).then_some((n, w))
        })
        .collect()
}

/// Weights of `S_{k+1} - S_k`.
pub fn difference_weights(tau: f64, k: u32) -> Vec<(i128, f64)> {
    let mut acc: HashMap<i128, f64> = kernel_weights(tau, k + 1).into_iter().collect();
    for (n, w) in kernel_weights(tau, k) {
        *acc.entry(n).or_insert(0.0) -= w;
    }
    let mut out: Vec<(i128, f64)> = acc.into_iter().filter(|(_, w)| *w != 0.0).collect();
    out.sort_unstable_by_key(|p| p.0);
    out
}

fn curve_point(n: i128, d: usize) -> Result<Vec<i128>> {
    let mut out = Vec::with_capacity(d);
    let mut p = 1i128;
    for _ in 0..d {
        p = p.checked_mul(n).ok_or(Error::Overflow("moment curve"))?;
        out.push(p);
    }
    Ok(out)
}

fn phase(x: f64) -> Complex64 {
    let t = 2.0 * std::f64::consts::PI * x.rem_euclid(1.0);
    Complex64::new(t.cos(), t.sin())
}

/// `S_k(xi) = sum_n tau^{-k} chi(tau^{-k} n) e(-A0^(1)(n).xi)`; `iota = 1`
/// gives `S_{k+1} - S_k`.
pub fn frequency_kernel_s(d: usize, tau: f64, k: u32, xi: &[f64], iota: u8) -> Result<Complex64> {
    if xi.len() != d {
        return Err(Error::ShapeMismatch { expected: d, found: xi.len() });
    }
    let weights = match iota {
        0 => kernel_weights(tau, k),
        1 => difference_weights(tau, k),
        _ => return Err(Error::invalid(format!("iota must be 0 or 1, got {iota}"))),
    };
    let mut acc = Complex64::new(0.0, 0.0);
    for (n, w) in weights {
        let mut t = 0.0;
        let mut p = 1.0f64;
        for x in xi {
            p *= n as f64;
            t += (p * x).rem_euclid(1.0);
        }
        acc += phase(-t) * w;
    }
    Ok(acc)
}

/// Probe points for the two factors of a product kernel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeSet {
    pub g1: Vec<Vec<i128>>,
    pub g2: Vec<Vec<i128>>,
}

fn support_box(tau: f64, k: u32, width: f64, weights: &[u32]) -> Vec<i128> {
    let r = 2.0 * tau.powi(width.floor() as i32);
    weights.iter().map(|w| (r * tau.powf(k as f64 * *w as f64)).floor() as i128).collect()
}

impl ProbeSet {
    /// All of `supp L_k`, its unit neighbours at a few points, small central
    /// coordinates, and `extra` seeded random points in the supports of `phi_k`.
    pub fn standard(params: &DecompositionParams, extra: usize, seed: u64) -> Result<ProbeSet> {
        params.validate()?;
        let shape = params.shape();
        let d = params.d;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut g1 = BTreeSet::new();
        let weights = kernel_weights(params.tau, params.k);
        for (i, (n, _)) in weights.iter().enumerate() {
            let p = curve_point(*n, d)?;
            if i % (weights.len() / 16).max(1) == 0 {
                for l in 0..d {
                    for s in [-1i128, 1] {
                        let mut q = p.clone();
                        q[l] += s;
                        g1.insert(q);
                    }
                }
            }
            g1.insert(p);
        }
        let box1 = support_box(params.tau, params.k, params.central_width(), &Variable::NonCentral.weights(shape));
        for _ in 0..extra {
            g1.insert(box1.iter().map(|b| rng.gen_range(-b..=*b)).collect());
        }
        let cw = Variable::Central.weights(shape);
        let mut g2 = BTreeSet::new();
        g2.insert(vec![0i128; cw.len()]);
        for l in 0..cw.len() {
            for v in 1..=8i128 {
                for s in [-1, 1] {
                    let mut q = vec![0i128; cw.len()];
                    q[l] = s * v;
                    g2.insert(q);
                }
            }
        }
        let box2 = support_box(params.tau, params.k, params.central_width(), &cw);
        for _ in 0..extra {
            g2.insert(box2.iter().map(|b| rng.gen_range(-b..=*b)).collect());
        }
        Ok(ProbeSet { g1: g1.into_iter().collect(), g2: g2.into_iter().collect() })
    }
}

/// `sum_src w * int_T e((h - src).xi) sum_{a/q in A_c} eta_{<=width}(tau^k o (xi - a/q)) dxi`
/// for every probe `h` and every character sum `c`; result indexed `[c][probe]`.
#[allow(clippy::too_many_arguments)]
fn bump_kernels(
    tau: f64,
    k: u32,
    weights: &[u32],
    width: f64,
    chars: &[CharacterSum],
    table: &RadialTransform,
    sources: &[(Vec<i128>, f64)],
    probes: &[Vec<i128>],
) -> Vec<Vec<f64>> {
    let jac = tau.powf(-(k as f64) * weights.iter().sum::<u32>() as f64);
    let grow = if width < 0.0 { 0.0 } else { tau.powi(width.floor() as i32) };
    let gcd_only = chars.iter().all(|c| c.depends_on_gcd_only());
    // character sums for the common small gcds, shared by all probes
    let small: Vec<Vec<f64>> = if gcd_only {
        (0..SMALL_GCD).map(|g| chars.iter().map(|c| c.eval(&[g as i128])).collect()).collect()
    } else {
        Vec::new()
    };
    let inv: Vec<f64> = weights.iter().map(|w| tau.powf(-(k as f64) * *w as f64)).collect();
    let per_probe: Vec<Vec<f64>> = probes
        .par_iter()
        .map(|p| {
            let mut acc = vec![0.0; chars.len()];
            if width < 0.0 {
                return acc;
            }
            let mut cache: HashMap<i128, Vec<f64>> = HashMap::new();
            let mut h = vec![0i128; p.len()];
            for (src, w) in sources {
                for ((hv, pv), sv) in h.iter_mut().zip(p).zip(src) {
                    *hv = pv - sv;
                }
                let rho = h.iter().zip(&inv).map(|(x, f)| (*x as f64 * f).powi(2)).sum::<f64>().sqrt();
                if grow * rho >= RHO_MAX {
                    continue;
                }
                let b = jac * bump_transform(table, tau, width, rho);
                if b == 0.0 {
                    continue;
                }
                if gcd_only {
                    let g = gcd_all(&h);
                    let cs: &[f64] = if (g as usize) < small.len() {
                        &small[g as usize]
                    } else {
                        cache.entry(g).or_insert_with(|| chars.iter().map(|c| c.eval(&[g])).collect())
                    };
                    let wb = w * b;
                    for (a, c) in acc.iter_mut().zip(cs) {
                        *a += wb * c;
                    }
                } else {
                    for (a, c) in acc.iter_mut().zip(chars) {
                        *a += w * c.eval(&h) * b;
                    }
                }
            }
            acc
        })
        .collect();
    (0..chars.len()).map(|c| per_probe.iter().map(|v| v[c]).collect()).collect()
}

const SMALL_GCD: usize = 4096;

fn gcd_all(h: &[i128]) -> i128 {
    let mut g = 0u64;
    for v in h {
        match u64::try_from(v.unsigned_abs()) {
            Ok(x) => g = binary_gcd(g, x),
            Err(_) => return h.iter().fold(0i128, |g, v| g.gcd(v)),
        }
    }
    g as i128
}

fn binary_gcd(mut a: u64, mut b: u64) -> u64 {
    if a == 0 {
        return b;
    }
    if b == 0 {
        return a;
    }
    let shift = (a | b).trailing_zeros();
    a >>= a.trailing_zeros();
    loop {
        b >>= b.trailing_zeros();
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        b -= a;
        if b == 0 {
            return a << shift;
        }
    }
}

/// A product kernel `K(g) = l(g^(1)) n(g^(2))` sampled on a [`ProbeSet`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductComponent {
    pub name: String,
    pub l: Vec<f64>,
    pub n: Vec<f64>,
}

impl ProductComponent {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.l[i] * self.n[j]
    }

    pub fn summary(&self) -> ComponentSummary {
        let nz = |v: &[f64]| v.iter().filter(|x| x.abs() > 1e-15).count();
        let max = |v: &[f64]| v.iter().map(|x| x.abs()).fold(0.0, f64::max);
        ComponentSummary {
            name: self.name.clone(),
            l_support: nz(&self.l),
            n_support: nz(&self.n),
            probe_mass: self.l.iter().sum::<f64>() * self.n.iter().sum::<f64>(),
            max_abs: max(&self.l) * max(&self.n),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentSummary {
    pub name: String,
    /// Non-central probes where the first factor is non-zero.
    pub l_support: usize,
    /// Central probes where the second factor is non-zero.
    pub n_support: usize,
    /// Sum of the kernel over the probe grid.
    pub probe_mass: f64,
    pub max_abs: f64,
}

fn phi(params: &DecompositionParams, variable: Variable, g: &[i128]) -> f64 {
    let w = variable.weights(params.shape());
    let r = scaled_radius(params.tau, params.k, &w, g);
    Cutoff::EtaLeq { tau: params.tau, a: params.central_width() }.eval(r)
}

fn curve_map(d: usize, weights: &[(i128, f64)]) -> Result<HashMap<Vec<i128>, f64>> {
    let mut out = HashMap::new();
    for (n, w) in weights {
        *out.entry(curve_point(*n, d)?).or_insert(0.0) += w;
    }
    Ok(out)
}

fn curve_sources(d: usize, weights: &[(i128, f64)]) -> Result<Vec<(Vec<i128>, f64)>> {
    weights.iter().map(|(n, w)| Ok((curve_point(*n, d)?, *w))).collect()
}

/// `L_k` from its definition, on the probes.
pub fn direct_l(params: &DecompositionParams, probes: &[Vec<i128>]) -> Result<Vec<f64>> {
    let map = curve_map(params.d, &kernel_weights(params.tau, params.k))?;
    Ok(probes.iter().map(|g| map.get(g).copied().unwrap_or(0.0)).collect())
}

/// `N_{k,w,B}` on central probes: `phi_k^(2) int e(g.xi) Xi_{k,w,B}`.
pub fn central_factor(
    params: &DecompositionParams,
    width: f64,
    set: &RationalSet,
    probes: &[Vec<i128>],
) -> Result<Vec<f64>> {
    let shape = params.shape();
    let m = shape.d_prime();
    check_dim(set, m)?;
    let table = RadialTransform::get(m)?;
    let chars = [CharacterSum::new(set)?];
    let raw = bump_kernels(
        params.tau,
        params.k,
        &Variable::Central.weights(shape),
        width,
        &chars,
        &table,
        &[(vec![0; m], 1.0)],
        probes,
    );
    Ok(probes.iter().zip(&raw[0]).map(|(g, v)| phi(params, Variable::Central, g) * v).collect())
}

/// `L_{k,w,A}` on non-central probes for arbitrary source weights: `iota = 0`
/// weights give `L_{k,w,A}`, the weights of `S_{k+1} - S_k` give `L'_{k,w,A}`.
pub fn noncentral_factor(
    params: &DecompositionParams,
    width: f64,
    set: &RationalSet,
    weights: &[(i128, f64)],
    probes: &[Vec<i128>],
) -> Result<Vec<f64>> {
    let shape = params.shape();
    check_dim(set, params.d)?;
    let table = RadialTransform::get(params.d)?;
    let chars = [CharacterSum::new(set)?];
    let raw = bump_kernels(
        params.tau,
        params.k,
        &Variable::NonCentral.weights(shape),
        width,
        &chars,
        &table,
        &curve_sources(params.d, weights)?,
        probes,
    );
    Ok(probes.iter().zip(&raw[0]).map(|(g, v)| phi(params, Variable::NonCentral, g) * v).collect())
}

fn check_dim(set: &RationalSet, m: usize) -> Result<()> {
    if set.dim() != m {
        return Err(Error::ShapeMismatch { expected: m, found: set.dim() });
    }
    Ok(())
}

/// Which pieces to produce.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum DecompositionMode {
    /// `K_k = K_k^c + sum_s K_{k,s}`.
    CentralStage,
    /// `K_{k,s} = G^low + sum_t G_{k,s,t} + G^c` for every `s`.
    NoncentralStage,
    /// Both stages.
    Full,
    /// `K_{k,w,A,B}` and `K'_{k,w,A,B}`.
    Generalized { w: u32, a: RationalSet, b: RationalSet },
}

/// Named kernels plus the diagnostics of a decomposition run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Decomposition {
    pub components: Vec<ProductComponent>,
    pub report: DecompositionReport,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub params: Option<DecompositionParams>,
    pub version: String,
    pub mode: String,
    pub probes_noncentral: usize,
    pub probes_central: usize,
    pub components: Vec<ComponentSummary>,
    /// `max |K_k - K_k^c - sum_s K_{k,s}|` over the probe grid.
    pub central_residual: Option<f64>,
    /// `max_s max |K_{k,s} - G^low - sum_t G_{k,s,t} - G^c|`.
    pub noncentral_residual: Option<f64>,
    pub reconstruction_residual: f64,
    /// Whether `phi_k^(1) = 1` on `supp L_k`, i.e. whether the Fourier form of
    /// `L_k` agrees with its definition.
    pub phi_one_on_support: bool,
    /// `max |phi_k^(1) L_k - L_k|` over `supp L_k`.
    pub fourier_form_deviation: f64,
    pub central_partition_residual: Option<f64>,
    pub noncentral_partition_residual: Option<f64>,
    pub central_disjoint: Option<bool>,
    pub noncentral_disjoint: Option<bool>,
    /// Range check of every multiplier, only run when supports are disjoint.
    pub multipliers_in_unit_interval: Option<bool>,
    pub q_s: Vec<i128>,
    pub kappa_s: Vec<f64>,
}

struct CentralStage {
    n_s: Vec<(u32, Vec<f64>)>,
    n_c: Vec<f64>,
}

fn central_stage(params: &DecompositionParams, probes: &[Vec<i128>]) -> Result<CentralStage> {
    let shape = params.shape();
    let m = shape.d_prime();
    let table = RadialTransform::get(m)?;
    let mut sets: Vec<RationalSet> =
        params.s_range().map(|s| RationalSet::Farey { m, s, tau: params.tau }).collect();
    sets.push(RationalSet::Union { sets: sets.clone() });
    let chars = sets.iter().map(CharacterSum::new).collect::<Result<Vec<_>>>()?;
    let raw = bump_kernels(
        params.tau,
        params.k,
        &Variable::Central.weights(shape),
        params.central_width(),
        &chars,
        &table,
        &[(vec![0; m], 1.0)],
        probes,
    );
    let phis: Vec<f64> = probes.iter().map(|g| phi(params, Variable::Central, g)).collect();
    let n_s = params
        .s_range()
        .zip(&raw)
        .map(|(s, v)| (s, v.iter().zip(&phis).map(|(a, p)| a * p).collect()))
        .collect();
    let union = raw.last().expect("union column");
    let n_c = probes
        .iter()
        .zip(union)
        .zip(&phis)
        .map(|((g, u), p)| p * (if g.iter().all(|v| *v == 0) { 1.0 } else { 0.0 } - u))
        .collect();
    Ok(CentralStage { n_s, n_c })
}

struct NoncentralPieces {
    low: Vec<f64>,
    t: Vec<(u32, Vec<f64>)>,
    c: Vec<f64>,
}

/// Low, `t` and complement factors for each distinct `Q_s`.
fn noncentral_stage(
    params: &DecompositionParams,
    probes: &[Vec<i128>],
    l_fourier: &[f64],
) -> Result<HashMap<i128, NoncentralPieces>> {
    let shape = params.shape();
    let d = params.d;
    let table = RadialTransform::get(d)?;
    let qs: BTreeSet<i128> = params.s_range().map(|s| params.q_s(s)).collect();
    let t_sets: Vec<RationalSet> = params.t_range().map(|t| RationalSet::Farey { m: d, s: t, tau: params.tau }).collect();
    let mut sets = Vec::new();
    for &q in &qs {
        let fixed = RationalSet::FixedDenominator { m: d, q };
        sets.push(fixed.clone());
        for t in &t_sets {
            sets.push(RationalSet::Difference { keep: Box::new(t.clone()), remove: Box::new(fixed.clone()) });
        }
        let mut all = vec![fixed];
        all.extend(t_sets.iter().cloned());
        sets.push(RationalSet::Union { sets: all });
    }
    let chars = sets.iter().map(CharacterSum::new).collect::<Result<Vec<_>>>()?;
    let sources = curve_sources(d, &kernel_weights(params.tau, params.k))?;
    let raw = bump_kernels(
        params.tau,
        params.k,
        &Variable::NonCentral.weights(shape),
        params.noncentral_width(),
        &chars,
        &table,
        &sources,
        probes,
    );
    let phis: Vec<f64> = probes.iter().map(|g| phi(params, Variable::NonCentral, g)).collect();
    let scale = |v: &Vec<f64>| -> Vec<f64> { v.iter().zip(&phis).map(|(a, p)| a * p).collect() };
    let per_q = t_sets.len() + 2;
    let mut out = HashMap::new();
    for (i, &q) in qs.iter().enumerate() {
        let block = &raw[i * per_q..(i + 1) * per_q];
        let t = params.t_range().zip(&block[1..per_q - 1]).map(|(t, v)| (t, scale(v))).collect();
        // phi L_k is the Fourier form of L_k; its complement removes the union bump part
        let c = l_fourier
            .iter()
            .zip(&block[per_q - 1])
            .zip(&phis)
            .map(|((lf, u), p)| lf - p * u)
            .collect();
        out.insert(q, NoncentralPieces { low: scale(&block[0]), t, c });
    }
    Ok(out)
}

fn max_grid_residual(a: &[f64], b_parts: &[&Vec<f64>], c: &[f64], d_parts: &[&Vec<f64>]) -> f64 {
    // max over (i, j) of |a_i c_j - (sum_p b_p,i)(sum_q d_q,j)| for product kernels
    let mut worst = 0.0f64;
    for (i, ai) in a.iter().enumerate() {
        let bi: f64 = b_parts.iter().map(|v| v[i]).sum();
        for (j, cj) in c.iter().enumerate() {
            let dj: f64 = d_parts.iter().map(|v| v[j]).sum();
            worst = worst.max((ai * cj - bi * dj).abs());
        }
    }
    worst
}

/// Runs the decomposition on `probes` and collects the diagnostics.
pub fn decompose_kernel(
    params: &DecompositionParams,
    mode: &DecompositionMode,
    probes: &ProbeSet,
) -> Result<Decomposition> {
    params.validate()?;
    let shape = params.shape();
    let d = params.d;
    let dp = shape.d_prime();
    for g in &probes.g1 {
        if g.len() != d {
            return Err(Error::ShapeMismatch { expected: d, found: g.len() });
        }
    }
    for g in &probes.g2 {
        if g.len() != dp {
            return Err(Error::ShapeMismatch { expected: dp, found: g.len() });
        }
    }
    let l_direct = direct_l(params, &probes.g1)?;
    let phi1: Vec<f64> = probes.g1.iter().map(|g| phi(params, Variable::NonCentral, g)).collect();
    let l_fourier: Vec<f64> = l_direct.iter().zip(&phi1).map(|(l, p)| l * p).collect();
    let mut report = DecompositionReport {
        params: Some(params.clone()),
        version: crate::VERSION.to_string(),
        probes_noncentral: probes.g1.len(),
        probes_central: probes.g2.len(),
        q_s: params.s_range().map(|s| params.q_s(s)).collect(),
        kappa_s: params.s_range().map(|s| params.kappa_s(s)).collect(),
        ..Default::default()
    };
    let mut dev = 0.0f64;
    let mut phi_one = true;
    for (l, p) in l_direct.iter().zip(&phi1) {
        if *l != 0.0 {
            dev = dev.max((l * p - l).abs());
            phi_one &= *p == 1.0;
        }
    }
    report.fourier_form_deviation = dev;
    report.phi_one_on_support = phi_one;
    let mut components = Vec::new();
    let delta0: Vec<f64> = probes.g2.iter().map(|g| if g.iter().all(|v| *v == 0) { 1.0 } else { 0.0 }).collect();

    match mode {
        DecompositionMode::CentralStage | DecompositionMode::NoncentralStage | DecompositionMode::Full => {
            let want_central = !matches!(mode, DecompositionMode::NoncentralStage);
            let want_noncentral = !matches!(mode, DecompositionMode::CentralStage);
            report.mode = match mode {
                DecompositionMode::CentralStage => "central_stage",
                DecompositionMode::NoncentralStage => "noncentral_stage",
                _ => "full",
            }
            .into();
            let central = central_stage(params, &probes.g2)?;
            if want_central {
                components.push(ProductComponent { name: "K_k".into(), l: l_direct.clone(), n: delta0.clone() });
                components.push(ProductComponent { name: "K_k^c".into(), l: l_direct.clone(), n: central.n_c.clone() });
                for (s, n) in &central.n_s {
                    components.push(ProductComponent { name: format!("K_k,{s}"), l: l_direct.clone(), n: n.clone() });
                }
                let mut parts: Vec<&Vec<f64>> = central.n_s.iter().map(|(_, v)| v).collect();
                parts.push(&central.n_c);
                report.central_residual =
                    Some(max_grid_residual(&l_direct, &[&l_direct], &delta0, &parts));
            }
            if want_noncentral {
                let pieces = noncentral_stage(params, &probes.g1, &l_fourier)?;
                let mut worst = 0.0f64;
                for (s, n) in &central.n_s {
                    let p = &pieces[&params.q_s(*s)];
                    components.push(ProductComponent { name: format!("G^low_k,{s}"), l: p.low.clone(), n: n.clone() });
                    for (t, l) in &p.t {
                        components.push(ProductComponent { name: format!("G_k,{s},{t}"), l: l.clone(), n: n.clone() });
                    }
                    components.push(ProductComponent { name: format!("G^c_k,{s}"), l: p.c.clone(), n: n.clone() });
                    let mut parts: Vec<&Vec<f64>> = vec![&p.low];
                    parts.extend(p.t.iter().map(|(_, v)| v));
                    parts.push(&p.c);
                    worst = worst.max(max_grid_residual(&l_fourier, &parts, n, &[n]));
                }
                report.noncentral_residual = Some(worst);
            }
            multiplier_checks(params, &mut report, want_central, want_noncentral)?;
        }
        DecompositionMode::Generalized { w, a, b } => {
            report.mode = "generalized".into();
            let wa = params.delta_prime * *w as f64;
            let wb = params.delta * *w as f64;
            let n = central_factor(params, wb, b, &probes.g2)?;
            let l = noncentral_factor(params, wa, a, &kernel_weights(params.tau, params.k), &probes.g1)?;
            let lp = noncentral_factor(params, wa, a, &difference_weights(params.tau, params.k), &probes.g1)?;
            components.push(ProductComponent { name: format!("K_k,{w},A,B"), l, n: n.clone() });
            components.push(ProductComponent { name: format!("K'_k,{w},A,B"), l: lp, n });
        }
    }
    report.reconstruction_residual =
        report.central_residual.unwrap_or(0.0).max(report.noncentral_residual.unwrap_or(0.0));
    report.components = components.iter().map(|c| c.summary()).collect();
    Ok(Decomposition { components, report })
}

/// Central multipliers `Xi_{k,s}` for every `s` followed by `Xi_k^c`.
pub fn central_multipliers(params: &DecompositionParams) -> Result<Vec<MultiplierGrid>> {
    let shape = params.shape();
    let m = shape.d_prime();
    let dims = vec![params.central_grid; m];
    let mut grids = Vec::new();
    for s in params.s_range() {
        let spec = central_spec(params, s);
        let mut g = build_multiplier(shape, &spec, &dims)?;
        g.label = format!("Xi_k,{s}");
        grids.push(g);
    }
    let c = MultiplierGrid::complement(&grids, "Xi_k^c")?;
    grids.push(c);
    Ok(grids)
}

fn central_spec(params: &DecompositionParams, s: u32) -> MultiplierSpec {
    MultiplierSpec {
        variable: Variable::Central,
        tau: params.tau,
        k: params.k,
        width: params.central_width(),
        set: RationalSet::Farey { m: params.shape().d_prime(), s, tau: params.tau },
    }
}

/// `Psi^low_{k,s}`, `Psi_{k,s,t}` for every `t`, then `Psi_k^c`.
pub fn noncentral_multipliers(params: &DecompositionParams, s: u32) -> Result<Vec<MultiplierGrid>> {
    let shape = params.shape();
    let dims = vec![params.noncentral_grid; params.d];
    let mut grids = Vec::new();
    for (label, spec) in noncentral_specs(params, s) {
        let mut g = build_multiplier(shape, &spec, &dims)?;
        g.label = label;
        grids.push(g);
    }
    let c = MultiplierGrid::complement(&grids, "Psi_k^c")?;
    grids.push(c);
    Ok(grids)
}

fn noncentral_specs(params: &DecompositionParams, s: u32) -> Vec<(String, MultiplierSpec)> {
    let d = params.d;
    let fixed = RationalSet::FixedDenominator { m: d, q: params.q_s(s) };
    let spec = |set| MultiplierSpec {
        variable: Variable::NonCentral,
        tau: params.tau,
        k: params.k,
        width: params.noncentral_width(),
        set,
    };
    let mut out = vec![(format!("Psi^low_k,{s}"), spec(fixed.clone()))];
    for t in params.t_range() {
        let set = RationalSet::Difference {
            keep: Box::new(RationalSet::Farey { m: d, s: t, tau: params.tau }),
            remove: Box::new(fixed.clone()),
        };
        out.push((format!("Psi_k,{s},{t}"), spec(set)));
    }
    out
}

fn in_unit(grids: &[MultiplierGrid]) -> bool {
    grids.iter().all(|g| {
        let (lo, hi) = g.min_max();
        lo >= -1e-12 && hi <= 1.0 + 1e-12
    })
}

fn multiplier_checks(
    params: &DecompositionParams,
    report: &mut DecompositionReport,
    central: bool,
    noncentral: bool,
) -> Result<()> {
    let shape = params.shape();
    let mut range_ok = true;
    let mut any_disjoint = false;
    if central {
        let grids = central_multipliers(params)?;
        let refs: Vec<&MultiplierGrid> = grids.iter().collect();
        report.central_partition_residual = Some(MultiplierGrid::partition_residual(&refs));
        let union = MultiplierSpec {
            set: RationalSet::Union { sets: params.s_range().map(|s| central_spec(params, s).set).collect() },
            ..central_spec(params, 0)
        };
        let disjoint = bumps_disjoint(shape, &union)?;
        report.central_disjoint = Some(disjoint);
        if disjoint {
            any_disjoint = true;
            range_ok &= in_unit(&grids);
        }
    }
    if noncentral {
        let mut worst = 0.0f64;
        let mut all_disjoint = true;
        for s in params.s_range() {
            let grids = noncentral_multipliers(params, s)?;
            let refs: Vec<&MultiplierGrid> = grids.iter().collect();
            worst = worst.max(MultiplierGrid::partition_residual(&refs));
            let specs = noncentral_specs(params, s);
            let union = MultiplierSpec {
                set: RationalSet::Union { sets: specs.iter().map(|(_, sp)| sp.set.clone()).collect() },
                ..specs[0].1.clone()
            };
            let disjoint = match bumps_disjoint(shape, &union) {
                Ok(v) => v,
                Err(Error::Infeasible(_)) => false,
                Err(e) => return Err(e),
            };
            all_disjoint &= disjoint;
            if disjoint {
                range_ok &= in_unit(&grids);
            }
        }
        report.noncentral_partition_residual = Some(worst);
        report.noncentral_disjoint = Some(all_disjoint);
        any_disjoint |= all_disjoint;
    }
    report.multipliers_in_unit_interval = any_disjoint.then_some(range_ok);
    Ok(())
}

/// Outcome of computing `L_k` through its Fourier representation on a DFT grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierConsistency {
    pub grid: Vec<usize>,
    /// `max |phi_k^(1) L_k^grid - L_k|` over `supp L_k`.
    pub max_deviation: f64,
    /// `max |S_k^grid - S_k|` at sampled grid frequencies.
    pub s_deviation: f64,
    pub phi_one_on_support: bool,
}

fn fft_axis(buf: &mut [Complex64], dims: &[usize], axis: usize, inverse: bool) {
    let n = dims[axis];
    let stride: usize = dims[axis + 1..].iter().product();
    let mut planner = FftPlanner::new();
    let fft = if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
    let outer = buf.len() / (n * stride);
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for o in 0..outer {
        for s in 0..stride {
            let base = o * n * stride + s;
            for (i, v) in line.iter_mut().enumerate() {
                *v = buf[base + i * stride];
            }
            fft.process(&mut line);
            for (i, v) in line.iter().enumerate() {
                buf[base + i * stride] = *v;
            }
        }
    }
}

fn flat_index(g: &[i128], dims: &[usize]) -> usize {
    g.iter().zip(dims).fold(0usize, |acc, (v, m)| acc * m + v.rem_euclid(*m as i128) as usize)
}

/// Largest DFT grid accepted by [`fourier_consistency`].
pub const MAX_DFT_POINTS: usize = 1 << 24;

/// `L_k = phi_k^(1) int e(g.xi) S_k(xi) dxi` on the grid with `M_1` the
/// smallest power of two above `4 tau^k + 1` and `other_axes` points on the
/// remaining axes, compared with the definition of `L_k`.
pub fn fourier_consistency(params: &DecompositionParams, other_axes: usize) -> Result<FourierConsistency> {
    params.validate()?;
    let d = params.d;
    let weights = kernel_weights(params.tau, params.k);
    let span = weights.len();
    let mut dims = vec![other_axes.max(1); d];
    dims[0] = (span + 1).next_power_of_two();
    let total: usize = dims.iter().product();
    if total > MAX_DFT_POINTS {
        return Err(Error::infeasible(format!("DFT grid of {total} points")));
    }
    let mut buf = vec![Complex64::new(0.0, 0.0); total];
    let mut seen: HashMap<usize, i128> = HashMap::new();
    for (n, w) in &weights {
        let idx = flat_index(&curve_point(*n, d)?, &dims);
        if let Some(prev) = seen.insert(idx, *n) {
            return Err(Error::Aliasing(format!(
                "A0({prev}) and A0({n}) coincide modulo the grid {dims:?}"
            )));
        }
        buf[idx] += Complex64::new(*w, 0.0);
    }
    // forward transform gives S_k(j / M) at grid index j
    for axis in 0..d {
        fft_axis(&mut buf, &dims, axis, false);
    }
    let grid = MultiplierGrid::constant(dims.clone(), 0.0, "S_k");
    let mut s_dev = 0.0f64;
    let step = (total / 64).max(1);
    for idx in (0..total).step_by(step) {
        let xi = grid.point(idx);
        let direct = frequency_kernel_s(d, params.tau, params.k, &xi, 0)?;
        s_dev = s_dev.max((direct - buf[idx]).norm());
    }
    for axis in 0..d {
        fft_axis(&mut buf, &dims, axis, true);
    }
    let norm = 1.0 / total as f64;
    let mut dev = 0.0f64;
    let mut phi_one = true;
    for (n, w) in &weights {
        let g = curve_point(*n, d)?;
        let p = phi(params, Variable::NonCentral, &g);
        phi_one &= p == 1.0;
        let v = p * buf[flat_index(&g, &dims)].re * norm;
        dev = dev.max((v - w).abs());
    }
    Ok(FourierConsistency { grid: dims, max_deviation: dev, s_deviation: s_dev, phi_one_on_support: phi_one })
}

/// `N_{k,s}(0) = phi_k^(2)(0) int Xi_{k,s}`.
pub fn central_zero_mode(params: &DecompositionParams, s: u32) -> Result<f64> {
    let zero = vec![vec![0i128; params.shape().d_prime()]];
    Ok(central_factor(params, params.central_width(), &central_spec(params, s).set, &zero)?[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(k: u32) -> DecompositionParams {
        DecompositionParams { k, ..Default::default() }
    }

    #[test]
    fn s_at_zero_is_mass() {
        let s = frequency_kernel_s(2, 2.0, 4, &[0.0, 0.0], 0).unwrap();
        let mass: f64 = kernel_weights(2.0, 4).iter().map(|p| p.1).sum();
        assert!((s.re - mass).abs() < 1e-12 && s.im.abs() < 1e-12);
        let s = frequency_kernel_s(2, 2.0, 4, &[0.13, 0.71], 0).unwrap();
        assert!(s.norm() <= mass + 1e-12);
        let ds = frequency_kernel_s(2, 2.0, 4, &[0.0, 0.0], 1).unwrap();
        let m5: f64 = kernel_weights(2.0, 5).iter().map(|p| p.1).sum();
        assert!((ds.re - (m5 - mass)).abs() < 1e-12);
    }

    #[test]
    fn small_reconstruction() {
        let p = DecompositionParams { noncentral_grid: 64, central_grid: 1024, ..params(5) };
        let probes = ProbeSet::standard(&p, 16, 1).unwrap();
        let dec = decompose_kernel(&p, &DecompositionMode::Full, &probes).unwrap();
        assert!(dec.report.central_residual.unwrap() < 1e-9, "{:?}", dec.report);
        assert!(dec.report.noncentral_residual.unwrap() < 1e-9);
        assert!(dec.report.central_partition_residual.unwrap() < 1e-12);
        assert!(dec.report.noncentral_partition_residual.unwrap() < 1e-12);
    }

    #[test]
    fn aliasing_is_rejected() {
        // fourier_consistency sizes its first axis itself; a shrunken grid must fail
        let p = params(5);
        let weights = kernel_weights(p.tau, p.k);
        let dims = [8usize, 8];
        let mut seen = HashMap::new();
        let clash = weights.iter().any(|(n, _)| seen.insert(flat_index(&curve_point(*n, 2).unwrap(), &dims), *n).is_some());
        assert!(clash);
        assert!(fourier_consistency(&p, 16).is_ok());
    }
}

//! Finitely supported functions on `G0(d)` and group convolution.
//!
//! `(f * g)(x) = sum_y f(y^{-1} x) g(y)`, so `delta_a * delta_b = delta_{b.a}`
//! and `supp(f * g)` lies in `{b . a : a in supp f, b in supp g}`.
//!
//! Convolution is chunked over the larger support in fixed-size blocks, each
//! block accumulates into its own map, and blocks are merged in block order.
//! Results therefore do not depend on the number of worker threads.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Debug, Write as _};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cutoff::Cutoff;
use crate::error::{Error, Result};
use crate::group::{moment_curve, GroupElement, GroupShape, LatticeElement};

/// Values below this modulus are dropped from complex and real functions.
pub const PRUNE_EPS: f64 = 1e-15;

const CHUNK: usize = 64;

/// Scalar values a [`SparseFunction`] can hold.
pub trait Value: Copy + Send + Sync + Debug + PartialEq + 'static {
    fn zero() -> Self;
    fn add(self, o: Self) -> Self;
    fn mul(self, o: Self) -> Self;
    fn conj(self) -> Self;
    fn modulus(self) -> f64;
    fn is_negligible(self) -> bool;
}

impl Value for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn add(self, o: Self) -> Self {
        self + o
    }
    fn mul(self, o: Self) -> Self {
        self * o
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn is_negligible(self) -> bool {
        self.norm() < PRUNE_EPS
    }
}

impl Value for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(self, o: Self) -> Self {
        self + o
    }
    fn mul(self, o: Self) -> Self {
        self * o
    }
    fn conj(self) -> Self {
        self
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn is_negligible(self) -> bool {
        self.abs() < PRUNE_EPS
    }
}

/// Exact integer values; arithmetic panics on overflow.
impl Value for i128 {
    fn zero() -> Self {
        0
    }
    fn add(self, o: Self) -> Self {
        self.checked_add(o).expect("integer kernel overflow")
    }
    fn mul(self, o: Self) -> Self {
        self.checked_mul(o).expect("integer kernel overflow")
    }
    fn conj(self) -> Self {
        self
    }
    fn modulus(self) -> f64 {
        self.unsigned_abs() as f64
    }
    fn is_negligible(self) -> bool {
        self == 0
    }
}

/// A finitely supported function `G0(d) -> V`. Zero values are never stored.
#[derive(Clone, PartialEq)]
pub struct SparseFunction<V: Value = Complex64> {
    shape: GroupShape,
    entries: BTreeMap<LatticeElement, V>,
}

impl<V: Value> Debug for SparseFunction<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.entries.iter().map(|(k, v)| (k.to_string(), v))).finish()
    }
}

impl<V: Value> SparseFunction<V> {
    pub fn zero(shape: GroupShape) -> Self {
        SparseFunction { shape, entries: BTreeMap::new() }
    }

    /// The indicator `delta_a` scaled by `value`.
    pub fn point(at: LatticeElement, value: V) -> Self {
        let mut f = Self::zero(at.shape());
        f.add_at(at, value).expect("shape matches");
        f
    }

    pub fn from_entries(shape: GroupShape, it: impl IntoIterator<Item = (LatticeElement, V)>) -> Result<Self> {
        let mut f = Self::zero(shape);
        for (k, v) in it {
            f.add_at(k, v)?;
        }
        Ok(f)
    }

    fn from_map(shape: GroupShape, map: impl IntoIterator<Item = (LatticeElement, V)>) -> Self {
        let entries = map.into_iter().filter(|(_, v)| !v.is_negligible()).collect();
        SparseFunction { shape, entries }
    }

    pub fn shape(&self) -> GroupShape {
        self.shape
    }

    /// Adds `v` at `x`, pruning the entry if it cancels.
    pub fn add_at(&mut self, x: LatticeElement, v: V) -> Result<()> {
        self.shape.check(&x.shape())?;
        let next = self.get(&x).add(v);
        if next.is_negligible() {
            self.entries.remove(&x);
        } else {
            self.entries.insert(x, next);
        }
        Ok(())
    }

    pub fn get(&self, x: &LatticeElement) -> V {
        self.entries.get(x).copied().unwrap_or_else(V::zero)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in coordinate order.
    pub fn iter(&self) -> impl Iterator<Item = (&LatticeElement, &V)> {
        self.entries.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &LatticeElement> {
        self.entries.keys()
    }

    pub fn map_values<W: Value>(&self, f: impl Fn(V) -> W) -> SparseFunction<W> {
        SparseFunction::from_map(self.shape, self.entries.iter().map(|(k, v)| (k.clone(), f(*v))))
    }

    pub fn scale(&self, c: V) -> Self {
        self.map_values(|v| v.mul(c))
    }

    /// Pointwise sum.
    pub fn plus(&self, other: &Self) -> Result<Self> {
        self.shape.check(&other.shape)?;
        let mut out = self.entries.clone();
        for (k, v) in &other.entries {
            let slot = out.entry(k.clone()).or_insert_with(V::zero);
            *slot = slot.add(*v);
        }
        Ok(Self::from_map(self.shape, out))
    }

    /// Adjoint kernel `K*(g) = conj(K(g^{-1}))`.
    pub fn adjoint(&self) -> Result<Self> {
        let mut out = BTreeMap::new();
        for (k, v) in &self.entries {
            out.insert(k.inverse()?, v.conj());
        }
        Ok(Self::from_map(self.shape, out))
    }

    /// `sum_x f(x) conj(g(x))`.
    pub fn inner(&self, other: &Self) -> V {
        let mut acc = V::zero();
        for (k, v) in &self.entries {
            if let Some(w) = other.entries.get(k) {
                acc = acc.add(v.mul(w.conj()));
            }
        }
        acc
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.values().map(|v| v.modulus()).fold(0.0, f64::max)
    }

    /// Largest coordinate magnitude over the support, per coordinate.
    pub fn coordinate_extent(&self) -> Vec<i128> {
        let mut out = vec![0i128; self.shape.len()];
        for k in self.entries.keys() {
            for (o, c) in out.iter_mut().zip(k.coords()) {
                *o = (*o).max(c.abs());
            }
        }
        out
    }
}

/// Group convolution `(f * g)(x) = sum_y f(y^{-1} x) g(y)`.
pub fn convolve<V: Value>(f: &SparseFunction<V>, g: &SparseFunction<V>) -> Result<SparseFunction<V>> {
    f.shape.check(&g.shape)?;
    let fe: Vec<(&LatticeElement, &V)> = f.entries.iter().collect();
    let ge: Vec<(&LatticeElement, &V)> = g.entries.iter().collect();
    // chunk over the larger support; the inner loop runs over the smaller one
    let chunk_over_g = ge.len() >= fe.len();
    let (outer, inner) = if chunk_over_g { (&ge, &fe) } else { (&fe, &ge) };
    let partials: Vec<Result<HashMap<LatticeElement, V>>> = outer
        .par_chunks(CHUNK)
        .map(|block| {
            let mut acc: HashMap<LatticeElement, V> = HashMap::new();
            for (ok, ov) in block {
                for (ik, iv) in inner.iter() {
                    // x = b . a with a in supp f, b in supp g
                    let (a, av, b, bv) = if chunk_over_g { (ik, iv, ok, ov) } else { (ok, ov, ik, iv) };
                    let x = b.multiply(a)?;
                    let slot = acc.entry(x).or_insert_with(V::zero);
                    *slot = slot.add(av.mul(**bv));
                }
            }
            Ok(acc)
        })
        .collect();
    let mut merged: HashMap<LatticeElement, V> = HashMap::new();
    for p in partials {
        for (k, v) in p? {
            let slot = merged.entry(k).or_insert_with(V::zero);
            *slot = slot.add(v);
        }
    }
    Ok(SparseFunction::from_map(f.shape, merged))
}

/// `(f * g)(x)` evaluated at one point through `sum_y f(y^{-1} x) g(y)`.
pub fn convolve_at<V: Value>(f: &SparseFunction<V>, g: &SparseFunction<V>, x: &LatticeElement) -> Result<V> {
    let mut acc = V::zero();
    for (y, gv) in g.iter() {
        acc = acc.add(f.get(&y.inverse()?.multiply(x)?).mul(*gv));
    }
    Ok(acc)
}

/// `(f * g)(x)` evaluated through the second form `sum_z f(z) g(x z^{-1})`.
pub fn convolve_at_dual<V: Value>(f: &SparseFunction<V>, g: &SparseFunction<V>, x: &LatticeElement) -> Result<V> {
    let mut acc = V::zero();
    for (z, fv) in f.iter() {
        acc = acc.add(fv.mul(g.get(&x.multiply(&z.inverse()?)?)));
    }
    Ok(acc)
}

/// Scale of an average: either `N` directly or `N = tau^k`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Scale {
    N(f64),
    TauK { tau: f64, k: u32 },
}

impl Scale {
    pub fn value(&self) -> f64 {
        match *self {
            Scale::N(n) => n,
            Scale::TauK { tau, k } => tau.powi(k as i32),
        }
    }
}

/// Parameters of the smoothed average `M_N^chi` along the moment curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AverageParams {
    pub shape: GroupShape,
    pub scale: Scale,
    pub chi: Cutoff,
}

impl AverageParams {
    pub fn new(shape: GroupShape, scale: Scale) -> Result<Self> {
        let p = AverageParams { shape, scale, chi: Cutoff::Chi };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.scale.value();
        if !(n >= 1.0) || !n.is_finite() {
            return Err(Error::invalid(format!("average scale N must be >= 1, got {n}")));
        }
        if let Scale::TauK { tau, .. } = self.scale {
            if !(tau > 1.0 && tau <= 2.0) {
                return Err(Error::invalid(format!("tau must lie in (1, 2], got {tau}")));
            }
        }
        self.chi.validate()
    }

    /// Weights `(n, N^{-1} chi(n / N))` over the support of `chi`.
    pub fn weights(&self) -> Vec<(i128, f64)> {
        let n = self.scale.value();
        let reach = (self.chi.support_radius() * n).ceil() as i128;
        (-reach..=reach)
            .filter_map(|m| {
                let w = self.chi.eval(m as f64 / n) / n;
                (w != 0.0).then_some((m, w))
            })
            .collect()
    }
}

/// The kernel `G_N^chi = sum_n N^{-1} chi(n/N) delta_{A0(n)}`.
pub fn average_kernel(params: &AverageParams) -> Result<SparseFunction<Complex64>> {
    params.validate()?;
    let mut entries = BTreeMap::new();
    for (n, w) in params.weights() {
        entries.insert(moment_curve(n, params.shape)?, Complex64::new(w, 0.0));
    }
    Ok(SparseFunction::from_map(params.shape, entries))
}

/// `M_N^chi f(x) = sum_n N^{-1} chi(n/N) f(A0(n)^{-1} x)`, straight from the definition.
pub fn apply_average(f: &SparseFunction<Complex64>, params: &AverageParams) -> Result<SparseFunction<Complex64>> {
    params.validate()?;
    f.shape.check(&params.shape)?;
    let weights = params.weights();
    let curve = weights
        .iter()
        .map(|(n, _)| moment_curve(*n, params.shape))
        .collect::<Result<Vec<_>>>()?;
    let mut out: BTreeMap<LatticeElement, Complex64> = BTreeMap::new();
    for (y, fv) in f.iter() {
        for ((_, w), a) in weights.iter().zip(&curve) {
            // f(A0(n)^{-1} x) = f(y) exactly when x = A0(n) . y
            let x = a.multiply(y)?;
            *out.entry(x).or_default() += fv * *w;
        }
    }
    Ok(SparseFunction::from_map(params.shape, out))
}

/// The `T*T`-type kernel
/// `A^r(y) = sum prod_j conj(L_j(h_j)) K_j(g_j) 1{y = h_1^{-1} g_1 ... h_r^{-1} g_r}`,
/// so that `S_1^* T_1 ... S_r^* T_r f = f * A^r` with `S_j f = f * L_j`, `T_j f = f * K_j`.
pub fn ttstar_kernel(ls: &[SparseFunction<Complex64>], ks: &[SparseFunction<Complex64>]) -> Result<SparseFunction<Complex64>> {
    if ls.is_empty() || ls.len() != ks.len() {
        return Err(Error::invalid(format!(
            "need r >= 1 pairs of kernels, got {} L and {} K",
            ls.len(),
            ks.len()
        )));
    }
    let shape = ls[0].shape;
    let mut words: BTreeMap<LatticeElement, Complex64> = BTreeMap::new();
    words.insert(GroupElement::identity(shape), Complex64::new(1.0, 0.0));
    for (l, k) in ls.iter().zip(ks) {
        l.shape.check(&shape)?;
        k.shape.check(&shape)?;
        // one block h^{-1} g with weight conj(L(h)) K(g)
        let mut block: BTreeMap<LatticeElement, Complex64> = BTreeMap::new();
        for (h, lv) in l.iter() {
            let hinv = h.inverse()?;
            for (g, kv) in k.iter() {
                *block.entry(hinv.multiply(g)?).or_default() += lv.conj() * kv;
            }
        }
        let prefix = SparseFunction::from_map(shape, words);
        let step = SparseFunction::from_map(shape, block);
        // w . b is the convolution of delta_b with delta_w
        words = convolve(&step, &prefix)?.entries;
    }
    Ok(SparseFunction::from_map(shape, words))
}

/// Counting-measure `l^p` norm; `p = f64::INFINITY` gives the sup norm.
pub fn lp_norm<V: Value>(f: &SparseFunction<V>, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::invalid(format!("l^p norm needs p >= 1, got {p}")));
    }
    if p.is_infinite() {
        return Ok(f.max_abs());
    }
    let s: f64 = f.entries.values().map(|v| v.modulus().powf(p)).sum();
    Ok(s.powf(1.0 / p))
}

#[derive(Serialize, Deserialize)]
struct JsonEntry {
    coords: Vec<i128>,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct JsonFunction {
    d: usize,
    entries: Vec<JsonEntry>,
}

impl SparseFunction<Complex64> {
    /// One `d=2:[1,1,0] → (re,im)` line per support point, in coordinate order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k} → ({:?},{:?})", v.re, v.im);
        }
        out
    }

    /// Parses [`Self::to_text`] output; `->` is accepted in place of `→`.
    pub fn from_text(shape: GroupShape, text: &str) -> Result<Self> {
        let mut f = Self::zero(shape);
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let (lhs, rhs) = line
                .split_once('→')
                .or_else(|| line.split_once("->"))
                .ok_or_else(|| Error::Parse(format!("missing arrow in {line:?}")))?;
            let x: LatticeElement = lhs.parse()?;
            let body = rhs
                .trim()
                .strip_prefix('(')
                .and_then(|b| b.strip_suffix(')'))
                .ok_or_else(|| Error::Parse(format!("bad value in {line:?}")))?;
            let (re, im) = body
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("bad value in {line:?}")))?;
            let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("{s:?}: {e}")));
            f.add_at(x, Complex64::new(parse(re)?, parse(im)?))?;
        }
        Ok(f)
    }

    pub fn to_json(&self) -> String {
        let doc = JsonFunction {
            d: self.shape.degree(),
            entries: self
                .entries
                .iter()
                .map(|(k, v)| JsonEntry { coords: k.coords().to_vec(), re: v.re, im: v.im })
                .collect(),
        };
        serde_json::to_string(&doc).expect("plain data serialises")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: JsonFunction = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let shape = GroupShape::new(doc.d)?;
        let mut f = Self::zero(shape);
        for e in doc.entries {
            f.add_at(GroupElement::new(shape, e.coords)?, Complex64::new(e.re, e.im))?;
        }
        Ok(f)
    }
}

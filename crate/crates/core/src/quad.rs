//! Gauss–Kronrod quadrature: adaptive in one dimension, composite tensor
//! rules in several.

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// The 15 Kronrod nodes and weights on `[-1, 1]`.
pub fn kronrod_rule() -> ([f64; 15], [f64; 15]) {
    let mut x = [0.0; 15];
    let mut w = [0.0; 15];
    for i in 0..7 {
        x[i] = -XGK[i];
        w[i] = WGK[i];
        x[14 - i] = XGK[i];
        w[14 - i] = WGK[i];
    }
    x[7] = 0.0;
    w[7] = WGK[7];
    (x, w)
}

fn gk15(f: &impl Fn(f64) -> Complex64, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        k += s * WGK[i];
        if i % 2 == 1 {
            g += s * WG[i / 2];
        }
    }
    (k * h, ((k - g) * h).norm())
}

/// Adaptive Gauss–Kronrod (7, 15) on `[a, b]` with absolute tolerance `tol`.
///
/// The interval is pre-split into `initial` panels; panels whose error
/// estimate exceeds their share of `tol` are bisected, up to `max_depth`.
pub fn integrate(f: impl Fn(f64) -> Complex64, a: f64, b: f64, tol: f64, initial: usize) -> Result<Complex64> {
    const MAX_DEPTH: u32 = 40;
    const MAX_PANELS: usize = 200_000;
    let width = b - a;
    let mut stack: Vec<(f64, f64, u32)> = (0..initial.max(1))
        .map(|i| {
            let n = initial.max(1) as f64;
            (a + width * i as f64 / n, a + width * (i + 1) as f64 / n, 0)
        })
        .collect();
    let mut total = Complex64::new(0.0, 0.0);
    let mut panels = 0usize;
    while let Some((lo, hi, depth)) = stack.pop() {
        panels += 1;
        if panels > MAX_PANELS {
            return Err(Error::Quadrature(format!("no convergence on [{a}, {b}] within {MAX_PANELS} panels")));
        }
        let (v, err) = gk15(&f, lo, hi);
        let share = tol * (hi - lo) / width;
        if err <= share.max(1e-300) || depth >= MAX_DEPTH {
            if depth >= MAX_DEPTH && err > share {
                return Err(Error::Quadrature(format!("no convergence near {lo}")));
            }
            total += v;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, depth + 1));
            stack.push((lo, mid, depth + 1));
        }
    }
    Ok(total)
}

/// Composite Kronrod nodes and weights with `panels` equal panels on `[a, b]`.
pub fn composite_nodes(a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
    let (x, w) = kronrod_rule();
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(15 * panels);
    for p in 0..panels {
        let c = a + (p as f64 + 0.5) * h;
        for i in 0..15 {
            out.push((c + 0.5 * h * x[i], 0.5 * h * w[i]));
        }
    }
    out
}

/// Iterates over the tensor grid `nodes^dim`, yielding points and product weights.
pub fn tensor_sum(nodes: &[(f64, f64)], dim: usize, mut f: impl FnMut(&[f64]) -> Complex64) -> Complex64 {
    let n = nodes.len();
    let mut idx = vec![0usize; dim];
    let mut pt = vec![0.0; dim];
    let mut acc = Complex64::new(0.0, 0.0);
    if n == 0 {
        return acc;
    }
    loop {
        let mut w = 1.0;
        for (j, &i) in idx.iter().enumerate() {
            pt[j] = nodes[i].0;
            w *= nodes[i].1;
        }
        if w != 0.0 {
            acc += f(&pt) * w;
        }
        let mut j = dim;
        loop {
            if j == 0 {
                return acc;
            }
            j -= 1;
            idx[j] += 1;
            if idx[j] < n {
                break;
            }
            idx[j] = 0;
        }
    }
}

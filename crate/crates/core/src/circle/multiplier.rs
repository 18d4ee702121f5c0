//! Periodic bump multipliers sampled on uniform frequency grids.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::cutoff::{eta0, norm2};
use crate::error::{Error, Result};
use crate::group::GroupShape;
use crate::rational::{enumerate_rationals, RationalSet, RationalVector};

/// Which block of frequency variables a multiplier lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variable {
    /// `xi^(1)` in `T^d`, dilation weights `1..d`.
    NonCentral,
    /// `xi^(2)` in `T^{d'}`, dilation weights `l1 + l2`.
    Central,
}

impl Variable {
    pub fn weights(&self, shape: GroupShape) -> Vec<u32> {
        match self {
            Variable::NonCentral => (1..=shape.degree() as u32).collect(),
            Variable::Central => shape.central_indices().map(|(a, b)| (a + b) as u32).collect(),
        }
    }
}

/// `xi -> sum_{a/q in set} eta_{<=width}(tau^k o (xi - a/q))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiplierSpec {
    pub variable: Variable,
    pub tau: f64,
    pub k: u32,
    pub width: f64,
    pub set: RationalSet,
}

impl MultiplierSpec {
    /// Support half-width of one bump along each axis.
    pub fn half_widths(&self, shape: GroupShape) -> Vec<f64> {
        if self.width < 0.0 {
            return vec![0.0; self.variable.weights(shape).len()];
        }
        let r = 2.0 * self.tau.powi(self.width.floor() as i32);
        self.variable
            .weights(shape)
            .iter()
            .map(|w| r * self.tau.powf(-(self.k as f64) * *w as f64))
            .collect()
    }

    fn bump(&self, scaled: &[f64]) -> f64 {
        if self.width < 0.0 {
            return 0.0;
        }
        eta0(self.tau.powi(-(self.width.floor() as i32)) * norm2(scaled))
    }

    /// Off-grid evaluation straight from the definition, summing every
    /// periodic image of every center.
    pub fn eval(&self, shape: GroupShape, xi: &[f64]) -> Result<f64> {
        let weights = self.variable.weights(shape);
        if xi.len() != weights.len() {
            return Err(Error::ShapeMismatch { expected: weights.len(), found: xi.len() });
        }
        let hw = self.half_widths(shape);
        let mut total = 0.0;
        for c in enumerate_rationals(&self.set)? {
            let center = c.to_f64();
            let ranges: Vec<(i64, i64)> = center
                .iter()
                .zip(xi)
                .zip(&hw)
                .map(|((c, x), h)| (((x - c - h).ceil()) as i64, ((x - c + h).floor()) as i64))
                .collect();
            for_each_box(&ranges, |shift| {
                let scaled: Vec<f64> = xi
                    .iter()
                    .zip(&center)
                    .zip(shift)
                    .zip(&weights)
                    .map(|(((x, c), m), w)| (x - c - *m as f64) * self.tau.powf(self.k as f64 * *w as f64))
                    .collect();
                total += self.bump(&scaled);
            });
        }
        Ok(total)
    }
}

fn for_each_box(ranges: &[(i64, i64)], mut f: impl FnMut(&[i64])) {
    if ranges.iter().any(|(lo, hi)| lo > hi) {
        return;
    }
    let mut cur: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    loop {
        f(&cur);
        let mut j = ranges.len();
        loop {
            if j == 0 {
                return;
            }
            j -= 1;
            cur[j] += 1;
            if cur[j] <= ranges[j].1 {
                break;
            }
            cur[j] = ranges[j].0;
        }
    }
}

/// Samples of a periodic multiplier on `prod_l (Z_{M_l} / M_l)`, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiplierGrid {
    pub dims: Vec<usize>,
    pub values: Vec<f64>,
    pub label: String,
}

/// Cap on the number of (bump, grid point) pairs visited while sampling.
pub const SAMPLING_BUDGET: u64 = 400_000_000;

impl MultiplierGrid {
    pub fn constant(dims: Vec<usize>, value: f64, label: impl Into<String>) -> Self {
        let n = dims.iter().product();
        MultiplierGrid { dims, values: vec![value; n], label: label.into() }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Frequency of a flat index.
    pub fn point(&self, mut idx: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dims.len()];
        for (o, m) in out.iter_mut().zip(&self.dims).rev() {
            *o = (idx % m) as f64 / *m as f64;
            idx /= m;
        }
        out
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)))
    }

    /// `1 - sum of parts`.
    pub fn complement(parts: &[MultiplierGrid], label: impl Into<String>) -> Result<MultiplierGrid> {
        let first = parts.first().ok_or_else(|| Error::invalid("complement of an empty family"))?;
        let mut out = MultiplierGrid::constant(first.dims.clone(), 1.0, label);
        for p in parts {
            if p.dims != out.dims {
                return Err(Error::invalid("grids of different sizes"));
            }
            for (o, v) in out.values.iter_mut().zip(&p.values) {
                *o -= v;
            }
        }
        Ok(out)
    }

    /// `max_x |sum_i parts_i(x) - 1|`.
    pub fn partition_residual(parts: &[&MultiplierGrid]) -> f64 {
        let n = parts.first().map(|p| p.len()).unwrap_or(0);
        (0..n)
            .map(|i| (parts.iter().map(|p| p.values[i]).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `index,xi_1,..,xi_m,value` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = write!(out, "index");
        for l in 0..self.dims.len() {
            let _ = write!(out, ",xi_{}", l + 1);
        }
        let _ = writeln!(out, ",value");
        for (i, v) in self.values.iter().enumerate() {
            let _ = write!(out, "{i}");
            for x in self.point(i) {
                let _ = write!(out, ",{x}");
            }
            let _ = writeln!(out, ",{v:e}");
        }
        out
    }
}

/// Samples `spec` on a grid with `dims[l]` points along axis `l`.
pub fn build_multiplier(shape: GroupShape, spec: &MultiplierSpec, dims: &[usize]) -> Result<MultiplierGrid> {
    let weights = spec.variable.weights(shape);
    if dims.len() != weights.len() {
        return Err(Error::ShapeMismatch { expected: weights.len(), found: dims.len() });
    }
    if dims.iter().any(|m| *m == 0) {
        return Err(Error::invalid("grid axes must be non-empty"));
    }
    let label = format!("{:?}(k={}, width={})", spec.variable, spec.k, spec.width);
    let mut grid = MultiplierGrid::constant(dims.to_vec(), 0.0, label);
    if spec.width < 0.0 {
        return Ok(grid);
    }
    let centers = enumerate_rationals(&spec.set)?;
    let hw = spec.half_widths(shape);
    let per_bump: f64 = hw.iter().zip(dims).map(|(h, m)| 2.0 * h * *m as f64 + 1.0).product();
    if per_bump * centers.len() as f64 > SAMPLING_BUDGET as f64 {
        return Err(Error::infeasible(format!(
            "sampling {} bumps of ~{per_bump:.0} grid points exceeds the budget",
            centers.len()
        )));
    }
    let dil: Vec<f64> = weights.iter().map(|w| spec.tau.powf(spec.k as f64 * *w as f64)).collect();
    let shrink = spec.tau.powi(-(spec.width.floor() as i32));
    for c in &centers {
        add_bump(&mut grid, c, &hw, &dil, shrink);
    }
    Ok(grid)
}

fn add_bump(grid: &mut MultiplierGrid, c: &RationalVector, hw: &[f64], dil: &[f64], shrink: f64) {
    let center = c.to_f64();
    let dims = grid.dims.clone();
    let ranges: Vec<(i64, i64)> = center
        .iter()
        .zip(hw)
        .zip(&dims)
        .map(|((c, h), m)| (((c - h) * *m as f64).ceil() as i64, ((c + h) * *m as f64).floor() as i64))
        .collect();
    for_each_box(&ranges, |js| {
        let mut r2 = 0.0;
        let mut flat = 0usize;
        for (l, j) in js.iter().enumerate() {
            let m = dims[l];
            let x = (*j as f64 / m as f64 - center[l]) * dil[l];
            r2 += x * x;
            flat = flat * m + j.rem_euclid(m as i64) as usize;
        }
        let v = eta0(shrink * r2.sqrt());
        if v != 0.0 {
            grid.values[flat] += v;
        }
    });
}

/// Whether the bumps centered at distinct points of `set` have pairwise
/// disjoint supports on the torus.
pub fn bumps_disjoint(shape: GroupShape, spec: &MultiplierSpec) -> Result<bool> {
    if spec.width < 0.0 {
        return Ok(true);
    }
    let centers = enumerate_rationals(&spec.set)?;
    if centers.len() < 2 {
        // a single bump overlaps its own images only if it is wider than the period
        return Ok(spec.half_widths(shape).iter().all(|h| *h <= 0.5));
    }
    let weights = spec.variable.weights(shape);
    let radius = 2.0 * spec.tau.powi(spec.width.floor() as i32);
    let dil: Vec<f64> = weights.iter().map(|w| spec.tau.powf(spec.k as f64 * *w as f64)).collect();
    // sufficient test: distinct a/q, b/r differ by >= 1/(q r) on some axis
    let qmax = centers.iter().map(|c| c.denominator()).max().unwrap_or(1) as f64;
    let weakest = dil.iter().cloned().fold(f64::INFINITY, f64::min);
    if weakest / (qmax * qmax) >= 2.0 * radius && spec.half_widths(shape).iter().all(|h| *h <= 0.5) {
        return Ok(true);
    }
    if centers.len() > 20_000 {
        return Err(Error::infeasible(format!(
            "pairwise disjointness check over {} centers",
            centers.len()
        )));
    }
    let pts: Vec<Vec<f64>> = centers.iter().map(|c| c.to_f64()).collect();
    for i in 0..pts.len() {
        for j in i..pts.len() {
            // nearest image distance in the dilated metric; i == j checks self-overlap
            let mut r2 = 0.0;
            let mut same = true;
            for l in 0..pts[i].len() {
                let mut diff = (pts[i][l] - pts[j][l]).rem_euclid(1.0);
                if diff > 0.5 {
                    diff = 1.0 - diff;
                }
                if i == j {
                    diff = 1.0;
                } else if diff != 0.0 {
                    same = false;
                }
                r2 += (diff * dil[l]).powi(2);
            }
            if i != j && same {
                continue;
            }
            if i == j {
                if spec.half_widths(shape).iter().any(|h| *h > 0.5) {
                    return Ok(false);
                }
                continue;
            }
            if r2.sqrt() < 2.0 * radius {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s2() -> GroupShape {
        GroupShape::new(2).unwrap()
    }

    #[test]
    fn bump_center_is_one() {
        let spec = MultiplierSpec {
            variable: Variable::Central,
            tau: 2.0,
            k: 6,
            width: 2.4,
            set: RationalSet::Farey { m: 1, s: 1, tau: 2.0 },
        };
        for c in ["1/2", "1/3", "2/3"] {
            let (a, q) = c.split_once('/').unwrap();
            let xi = a.parse::<f64>().unwrap() / q.parse::<f64>().unwrap();
            assert!((spec.eval(s2(), &[xi]).unwrap() - 1.0).abs() < 1e-15);
        }
        assert_eq!(spec.eval(s2(), &[0.1]).unwrap(), 0.0);
        // support radius in xi: 2 * 2^floor(2.4) / 2^{3*6}
        assert_eq!(spec.half_widths(s2()), vec![8.0 / 262144.0]);
    }

    #[test]
    fn grid_matches_pointwise() {
        let spec = MultiplierSpec {
            variable: Variable::NonCentral,
            tau: 2.0,
            k: 3,
            width: 1.0,
            set: RationalSet::Farey { m: 2, s: 1, tau: 2.0 },
        };
        let g = build_multiplier(s2(), &spec, &[32, 64]).unwrap();
        for i in (0..g.len()).step_by(37) {
            let xi = g.point(i);
            assert!((g.values[i] - spec.eval(s2(), &xi).unwrap()).abs() < 1e-12);
        }
        let c = MultiplierGrid::complement(&[g.clone()], "c").unwrap();
        assert!(MultiplierGrid::partition_residual(&[&g, &c]) < 1e-15);
    }

    #[test]
    fn empty_set_gives_zero() {
        let spec = MultiplierSpec {
            variable: Variable::Central,
            tau: 2.0,
            k: 3,
            width: 1.0,
            set: RationalSet::DenominatorRange { m: 1, q_lo: 5, q_hi: 4 },
        };
        let g = build_multiplier(s2(), &spec, &[64]).unwrap();
        assert!(g.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn disjointness() {
        let narrow = MultiplierSpec {
            variable: Variable::Central,
            tau: 2.0,
            k: 6,
            width: 2.4,
            set: RationalSet::DenominatorRange { m: 1, q_lo: 1, q_hi: 7 },
        };
        assert!(bumps_disjoint(s2(), &narrow).unwrap());
        let wide = MultiplierSpec { k: 1, width: 0.0, ..narrow };
        assert!(!bumps_disjoint(s2(), &wide).unwrap());
    }
}

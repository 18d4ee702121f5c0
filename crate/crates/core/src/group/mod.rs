//! The universal step-two nilpotent group `G0(d)` and its real envelope.
//!
//! Coordinates are indexed by `Y_d = {(l1, l2) : 0 <= l2 < l1 <= d}`. The
//! order is fixed: the `d` non-central indices `(1,0), ..., (d,0)` first, then
//! the central indices `(l1, l2)` with `l2 >= 1`, lexicographically. So for
//! `d = 3` the order is `(1,0) (2,0) (3,0) (2,1) (3,1) (3,2)`.
//!
//! The product is
//!
//! ```text
//! [x.y]_{l1,0}  = x_{l1,0} + y_{l1,0}
//! [x.y]_{l1,l2} = x_{l1,l2} + y_{l1,l2} + x_{l1,0} * y_{l2,0}     (l2 >= 1)
//! ```
//!
//! Integer coordinates are `i128` with checked arithmetic; any overflow is an
//! [`Error::Overflow`], never a silent wrap.

mod coset;
mod words;

pub use coset::{coset_decompose, jq_index, jq_element, jq_multiply, jq_inverse, CosetPair};
pub use words::{alternating_word, d_form, WordVariant};

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported degree. `|Y_16| = 136` coordinates.
pub const MAX_DEGREE: usize = 16;

/// Default absolute tolerance for comparing real elements.
pub const REAL_TOLERANCE: f64 = 1e-12;

/// The index structure `Y_d` of `G0(d)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupShape {
    d: usize,
}

impl GroupShape {
    pub fn new(d: usize) -> Result<Self> {
        if d == 0 || d > MAX_DEGREE {
            return Err(Error::invalid(format!("degree d={d} outside 1..={MAX_DEGREE}")));
        }
        Ok(GroupShape { d })
    }

    /// The degree `d`.
    pub fn degree(&self) -> usize {
        self.d
    }

    /// Number of central coordinates, `d(d-1)/2`.
    pub fn d_prime(&self) -> usize {
        self.d * (self.d - 1) / 2
    }

    /// `|Y_d|`.
    pub fn len(&self) -> usize {
        self.d + self.d_prime()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Position of `(l1, l2)` in the coordinate vector.
    pub fn position(&self, l1: usize, l2: usize) -> usize {
        debug_assert!(l2 < l1 && l1 <= self.d);
        if l2 == 0 {
            l1 - 1
        } else {
            self.d + (l1 - 1) * (l1 - 2) / 2 + (l2 - 1)
        }
    }

    /// All of `Y_d` in coordinate order.
    pub fn index_set(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = (1..=self.d).map(|l| (l, 0)).collect();
        out.extend(self.central_indices());
        out
    }

    /// `Y'_d`, the central indices, in coordinate order.
    pub fn central_indices(&self) -> impl Iterator<Item = (usize, usize)> {
        let d = self.d;
        (2..=d).flat_map(|l1| (1..l1).map(move |l2| (l1, l2)))
    }

    /// Homogeneous weight `l1 + l2` of every coordinate, in coordinate order.
    pub fn weights(&self) -> Vec<u32> {
        self.index_set().iter().map(|&(a, b)| (a + b) as u32).collect()
    }

    pub(crate) fn check(&self, other: &GroupShape) -> Result<()> {
        if self.d != other.d {
            return Err(Error::ShapeMismatch { expected: self.d, found: other.d });
        }
        Ok(())
    }
}

/// Scalar type for group coordinates.
///
/// Arithmetic returns `None` on overflow; the real implementation never fails.
pub trait Coord: Copy + PartialEq + fmt::Debug + Send + Sync + 'static {
    const ZERO: Self;
    const ONE: Self;
    fn c_add(self, o: Self) -> Option<Self>;
    fn c_sub(self, o: Self) -> Option<Self>;
    fn c_mul(self, o: Self) -> Option<Self>;
    fn c_neg(self) -> Option<Self>;
    fn to_f64(self) -> f64;
    fn is_positive(self) -> bool;

    fn c_pow(self, e: u32) -> Option<Self> {
        let mut acc = Self::ONE;
        for _ in 0..e {
            acc = acc.c_mul(self)?;
        }
        Some(acc)
    }
}

impl Coord for i128 {
    const ZERO: Self = 0;
    const ONE: Self = 1;
    fn c_add(self, o: Self) -> Option<Self> {
        self.checked_add(o)
    }
    fn c_sub(self, o: Self) -> Option<Self> {
        self.checked_sub(o)
    }
    fn c_mul(self, o: Self) -> Option<Self> {
        self.checked_mul(o)
    }
    fn c_neg(self) -> Option<Self> {
        self.checked_neg()
    }
    fn to_f64(self) -> f64 {
        self as f64
    }
    fn is_positive(self) -> bool {
        self > 0
    }
    fn c_pow(self, e: u32) -> Option<Self> {
        self.checked_pow(e)
    }
}

impl Coord for f64 {
    const ZERO: Self = 0.0;
    const ONE: Self = 1.0;
    fn c_add(self, o: Self) -> Option<Self> {
        Some(self + o)
    }
    fn c_sub(self, o: Self) -> Option<Self> {
        Some(self - o)
    }
    fn c_mul(self, o: Self) -> Option<Self> {
        Some(self * o)
    }
    fn c_neg(self) -> Option<Self> {
        Some(-self)
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn is_positive(self) -> bool {
        self > 0.0
    }
    fn c_pow(self, e: u32) -> Option<Self> {
        Some(self.powi(e as i32))
    }
}

/// A point of `G0(d)` (integer coordinates) or of its real envelope.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupElement<T = i128> {
    shape: GroupShape,
    coords: Vec<T>,
}

/// Lattice element with exact integer coordinates.
pub type LatticeElement = GroupElement<i128>;
/// Element of the real group `G0#(d)`.
pub type RealElement = GroupElement<f64>;

impl<T: Coord> GroupElement<T> {
    pub fn new(shape: GroupShape, coords: Vec<T>) -> Result<Self> {
        if coords.len() != shape.len() {
            return Err(Error::invalid(format!(
                "expected {} coordinates for d={}, got {}",
                shape.len(),
                shape.degree(),
                coords.len()
            )));
        }
        Ok(GroupElement { shape, coords })
    }

    /// Builds an element from its non-central and central parts.
    pub fn from_parts(shape: GroupShape, first: &[T], second: &[T]) -> Result<Self> {
        let mut coords = Vec::with_capacity(shape.len());
        coords.extend_from_slice(first);
        coords.extend_from_slice(second);
        Self::new(shape, coords)
    }

    pub fn identity(shape: GroupShape) -> Self {
        GroupElement { shape, coords: vec![T::ZERO; shape.len()] }
    }

    pub fn shape(&self) -> GroupShape {
        self.shape
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<T> {
        self.coords
    }

    /// Coordinate `(l1, l2)`.
    pub fn get(&self, l1: usize, l2: usize) -> T {
        self.coords[self.shape.position(l1, l2)]
    }

    /// Non-central part `g^(1)`.
    pub fn first(&self) -> &[T] {
        &self.coords[..self.shape.degree()]
    }

    /// Central part `g^(2)`.
    pub fn second(&self) -> &[T] {
        &self.coords[self.shape.degree()..]
    }

    pub fn is_identity(&self) -> bool {
        self.coords.iter().all(|c| *c == T::ZERO)
    }

    /// Group product `self . other`.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.shape.check(&other.shape)?;
        let d = self.shape.degree();
        let mut coords = Vec::with_capacity(self.coords.len());
        for (a, b) in self.coords.iter().zip(&other.coords) {
            coords.push(a.c_add(*b).ok_or(Error::Overflow("multiply"))?);
        }
        let mut pos = d;
        for l1 in 2..=d {
            for l2 in 1..l1 {
                let cross = self.coords[l1 - 1]
                    .c_mul(other.coords[l2 - 1])
                    .ok_or(Error::Overflow("multiply"))?;
                coords[pos] = coords[pos].c_add(cross).ok_or(Error::Overflow("multiply"))?;
                pos += 1;
            }
        }
        Ok(GroupElement { shape: self.shape, coords })
    }

    /// `g^{-1} = (-g^(1), -g^(2) + R0(g^(1), g^(1)))`.
    pub fn inverse(&self) -> Result<Self> {
        let d = self.shape.degree();
        let r0 = bilinear_r0(self.first(), self.first())?;
        let mut coords = Vec::with_capacity(self.coords.len());
        for c in self.first() {
            coords.push(c.c_neg().ok_or(Error::Overflow("inverse"))?);
        }
        for (c, r) in self.coords[d..].iter().zip(r0) {
            coords.push(r.c_sub(*c).ok_or(Error::Overflow("inverse"))?);
        }
        Ok(GroupElement { shape: self.shape, coords })
    }

    /// Anisotropic dilation: coordinate `(l1, l2)` scaled by `lambda^(l1+l2)`.
    pub fn dilate(&self, lambda: T) -> Result<Self> {
        if !lambda.is_positive() {
            return Err(Error::invalid(format!("dilation factor must be positive, got {lambda:?}")));
        }
        let mut coords = Vec::with_capacity(self.coords.len());
        for ((l1, l2), c) in self.shape.index_set().into_iter().zip(&self.coords) {
            let s = lambda.c_pow((l1 + l2) as u32).ok_or(Error::Overflow("dilate"))?;
            coords.push(c.c_mul(s).ok_or(Error::Overflow("dilate"))?);
        }
        Ok(GroupElement { shape: self.shape, coords })
    }

    /// Coordinate-wise difference (the vector-space structure, not the group law).
    pub fn vector_sub(&self, other: &Self) -> Result<Self> {
        self.shape.check(&other.shape)?;
        let coords = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a.c_sub(*b).ok_or(Error::Overflow("vector_sub")))
            .collect::<Result<Vec<_>>>()?;
        Ok(GroupElement { shape: self.shape, coords })
    }

    pub fn to_real(&self) -> RealElement {
        GroupElement { shape: self.shape, coords: self.coords.iter().map(|c| c.to_f64()).collect() }
    }
}

impl RealElement {
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.shape == other.shape
            && self.coords.iter().zip(&other.coords).all(|(a, b)| (a - b).abs() <= tol)
    }
}

impl Eq for LatticeElement {}

impl Hash for LatticeElement {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.shape.hash(state);
        self.coords.hash(state);
    }
}

impl PartialOrd for LatticeElement {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for LatticeElement {
    fn cmp(&self, other: &Self) -> Ordering {
        self.shape.cmp(&other.shape).then_with(|| self.coords.cmp(&other.coords))
    }
}

/// Text form `d=2:[1,1,0]`.
impl<T: Coord + fmt::Display> fmt::Display for GroupElement<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d={}:[", self.shape.degree())?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str("]")
    }
}

impl FromStr for LatticeElement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, body) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("missing ':' in {s:?}")))?;
        let d: usize = head
            .trim()
            .strip_prefix("d=")
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| Error::Parse(format!("bad degree in {s:?}")))?;
        let body = body
            .trim()
            .strip_prefix('[')
            .and_then(|b| b.strip_suffix(']'))
            .ok_or_else(|| Error::Parse(format!("missing brackets in {s:?}")))?;
        let coords = if body.trim().is_empty() {
            Vec::new()
        } else {
            body.split(',')
                .map(|c| c.trim().parse::<i128>().map_err(|e| Error::Parse(format!("{c:?}: {e}"))))
                .collect::<Result<Vec<_>>>()?
        };
        GroupElement::new(GroupShape::new(d)?, coords)
    }
}

/// `A0(n)`: `n^l1` in coordinate `(l1, 0)`, zero in the centre.
pub fn moment_curve<T: Coord>(n: T, shape: GroupShape) -> Result<GroupElement<T>> {
    let d = shape.degree();
    let mut coords = vec![T::ZERO; shape.len()];
    let mut p = T::ONE;
    for c in coords.iter_mut().take(d) {
        p = p.c_mul(n).ok_or(Error::Overflow("moment_curve"))?;
        *c = p;
    }
    Ok(GroupElement { shape, coords })
}

/// The bilinear form `R0(x, y)_{l1 l2} = x_{l1} * y_{l2}` on non-central vectors.
pub fn bilinear_r0<T: Coord>(x: &[T], y: &[T]) -> Result<Vec<T>> {
    if x.len() != y.len() {
        return Err(Error::ShapeMismatch { expected: x.len(), found: y.len() });
    }
    let d = x.len();
    let mut out = Vec::with_capacity(d * d.saturating_sub(1) / 2);
    for l1 in 2..=d {
        for l2 in 1..l1 {
            out.push(x[l1 - 1].c_mul(y[l2 - 1]).ok_or(Error::Overflow("bilinear_r0"))?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn el(d: usize, c: &[i128]) -> LatticeElement {
        GroupElement::new(GroupShape::new(d).unwrap(), c.to_vec()).unwrap()
    }

    #[test]
    fn index_order() {
        let s = GroupShape::new(3).unwrap();
        assert_eq!(s.index_set(), vec![(1, 0), (2, 0), (3, 0), (2, 1), (3, 1), (3, 2)]);
        for (i, (a, b)) in s.index_set().into_iter().enumerate() {
            assert_eq!(s.position(a, b), i);
        }
        assert_eq!(s.d_prime(), 3);
        assert!(GroupShape::new(0).is_err());
    }

    #[test]
    fn product_examples() {
        assert_eq!(el(2, &[1, 1, 0]).multiply(&el(2, &[1, 1, 0])).unwrap(), el(2, &[2, 2, 1]));
        assert_eq!(el(2, &[0, 1, 0]).multiply(&el(2, &[1, 0, 0])).unwrap(), el(2, &[1, 1, 1]));
        let g = el(3, &[4, -2, 7, 1, 0, -3]);
        assert_eq!(g.multiply(&LatticeElement::identity(g.shape())).unwrap(), g);
        assert!(matches!(
            el(2, &[1, 1, 0]).multiply(&el(3, &[0; 6])),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(el(2, &[1, 1, 0]).inverse().unwrap(), el(2, &[-1, -1, 1]));
        let s = GroupShape::new(2).unwrap();
        assert!(LatticeElement::identity(s).inverse().unwrap().is_identity());
        for n in -5i128..=5 {
            let a = moment_curve(n, s).unwrap().inverse().unwrap();
            assert_eq!(a, el(2, &[-n, -n * n, n * n * n]));
        }
    }

    #[test]
    fn dilation_examples() {
        assert_eq!(el(2, &[1, 1, 1]).dilate(2).unwrap(), el(2, &[2, 4, 8]));
        let g = el(2, &[3, -1, 5]);
        assert_eq!(g.dilate(1).unwrap(), g);
        let s = GroupShape::new(2).unwrap();
        assert_eq!(moment_curve(3, s).unwrap().dilate(2).unwrap(), el(2, &[6, 36, 0]));
        assert!(g.dilate(0).is_err());
        assert!(g.to_real().dilate(-1.0).is_err());
    }

    #[test]
    fn moment_curve_examples() {
        let s3 = GroupShape::new(3).unwrap();
        assert_eq!(moment_curve(3, s3).unwrap(), el(3, &[3, 9, 27, 0, 0, 0]));
        assert!(moment_curve(0i128, s3).unwrap().is_identity());
        assert_eq!(moment_curve(-1, GroupShape::new(2).unwrap()).unwrap(), el(2, &[-1, 1, 0]));
    }

    #[test]
    fn r0_examples() {
        assert_eq!(bilinear_r0(&[1i128, 2], &[3, 4]).unwrap(), vec![6]);
        assert_eq!(bilinear_r0(&[0i128, 0], &[3, 4]).unwrap(), vec![0]);
        assert_eq!(bilinear_r0(&[1i128, 1, 1], &[2, 2, 2]).unwrap(), vec![2, 2, 2]);
        assert!(bilinear_r0(&[1i128], &[1, 2]).is_err());
    }

    #[test]
    fn overflow_is_reported() {
        let big = el(2, &[i128::MAX, 0, 0]);
        assert_eq!(big.multiply(&big), Err(Error::Overflow("multiply")));
        assert!(moment_curve(1i128 << 70, GroupShape::new(2).unwrap()).is_err());
    }

    #[test]
    fn text_roundtrip() {
        let g = el(2, &[1, 1, 0]);
        assert_eq!(g.to_string(), "d=2:[1,1,0]");
        assert_eq!("d=2:[1,1,0]".parse::<LatticeElement>().unwrap(), g);
        assert!("d=2:[1,1]".parse::<LatticeElement>().is_err());
        assert!("2:[1,1,0]".parse::<LatticeElement>().is_err());
    }

    #[test]
    fn real_variant() {
        let s = GroupShape::new(2).unwrap();
        let x = RealElement::new(s, vec![0.5, -1.25, 2.0]).unwrap();
        let y = x.inverse().unwrap();
        assert!(x.multiply(&y).unwrap().approx_eq(&RealElement::identity(s), REAL_TOLERANCE));
        let a = moment_curve(1.5, s).unwrap().dilate(2.0).unwrap();
        assert!(a.approx_eq(&moment_curve(3.0, s).unwrap(), REAL_TOLERANCE));
    }
}

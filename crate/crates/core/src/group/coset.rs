//! The lattice subgroup `H_Q = (Q Z)^{Y_d}` and the box `J_Q = [0, Q-1]^{Y_d}`.
//!
//! Every `g` in `G0` factors uniquely as `g = b . h` with `b` in `J_Q` and
//! `h` in `H_Q`. `J_Q` with the reduced product is the finite quotient
//! `G0 / H_Q`.

use serde::{Deserialize, Serialize};

use super::{bilinear_r0, GroupElement, GroupShape, LatticeElement};
use crate::error::{Error, Result};

/// The factorisation `g = box . lattice`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CosetPair {
    /// Element of `J_Q`.
    pub box_part: LatticeElement,
    /// Element of `H_Q`.
    pub lattice: LatticeElement,
    pub modulus: i128,
}

impl CosetPair {
    pub fn recompose(&self) -> Result<LatticeElement> {
        self.box_part.multiply(&self.lattice)
    }
}

/// Splits `g` as `b . h` with `b` in `J_Q`, `h` in `H_Q`.
///
/// Non-central coordinates are solved first; the central ones then absorb the
/// twist `R0(b^(1), h^(1))`.
pub fn coset_decompose(g: &LatticeElement, q: i128) -> Result<CosetPair> {
    if q < 1 {
        return Err(Error::invalid(format!("modulus Q must be >= 1, got {q}")));
    }
    let shape = g.shape();
    let b1: Vec<i128> = g.first().iter().map(|c| c.rem_euclid(q)).collect();
    let h1: Vec<i128> = g.first().iter().zip(&b1).map(|(c, b)| c - b).collect();
    let twist = bilinear_r0(&b1, &h1)?;
    let mut b2 = Vec::with_capacity(shape.d_prime());
    let mut h2 = Vec::with_capacity(shape.d_prime());
    for (c, t) in g.second().iter().zip(&twist) {
        let rest = c.checked_sub(*t).ok_or(Error::Overflow("coset_decompose"))?;
        let b = rest.rem_euclid(q);
        b2.push(b);
        h2.push(rest - b);
    }
    Ok(CosetPair {
        box_part: GroupElement::from_parts(shape, &b1, &b2)?,
        lattice: GroupElement::from_parts(shape, &h1, &h2)?,
        modulus: q,
    })
}

/// Product in `J_Q`: the box part of `a . b`.
///
/// Coordinates of `a . b` mod `Q` only depend on `a, b` mod `Q`, so the box
/// part is just the coordinate-wise residue.
pub fn jq_multiply(a: &LatticeElement, b: &LatticeElement, q: i128) -> Result<LatticeElement> {
    let p = a.multiply(b)?;
    let coords = p.coords().iter().map(|c| c.rem_euclid(q)).collect();
    GroupElement::new(a.shape(), coords)
}

pub fn jq_inverse(a: &LatticeElement, q: i128) -> Result<LatticeElement> {
    let p = a.inverse()?;
    let coords = p.coords().iter().map(|c| c.rem_euclid(q)).collect();
    GroupElement::new(a.shape(), coords)
}

/// Mixed-radix index of a `J_Q` element, first coordinate most significant.
pub fn jq_index(b: &LatticeElement, q: i128) -> usize {
    b.coords().iter().fold(0usize, |acc, c| acc * q as usize + c.rem_euclid(q) as usize)
}

/// Inverse of [`jq_index`].
pub fn jq_element(mut index: usize, shape: GroupShape, q: i128) -> LatticeElement {
    let n = shape.len();
    let mut coords = vec![0i128; n];
    for c in coords.iter_mut().rev() {
        *c = (index % q as usize) as i128;
        index /= q as usize;
    }
    GroupElement::new(shape, coords).expect("length matches shape")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn el(d: usize, c: &[i128]) -> LatticeElement {
        GroupElement::new(GroupShape::new(d).unwrap(), c.to_vec()).unwrap()
    }

    #[test]
    fn trivial_modulus() {
        let g = el(2, &[3, -7, 11]);
        let p = coset_decompose(&g, 1).unwrap();
        assert!(p.box_part.is_identity());
        assert_eq!(p.lattice, g);
    }

    #[test]
    fn worked_example() {
        let g = el(2, &[3, 3, 3]);
        let p = coset_decompose(&g, 2).unwrap();
        assert_eq!(p.box_part, el(2, &[1, 1, 1]));
        assert_eq!(p.lattice, el(2, &[2, 2, 0]));
        assert_eq!(p.recompose().unwrap(), g);
    }

    #[test]
    fn rejects_bad_modulus() {
        assert!(coset_decompose(&el(2, &[0, 0, 0]), 0).is_err());
    }

    #[test]
    fn jq_index_roundtrip() {
        let s = GroupShape::new(2).unwrap();
        for i in 0..27 {
            assert_eq!(jq_index(&jq_element(i, s, 3), 3), i);
        }
    }
}

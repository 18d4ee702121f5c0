//! Alternating words along the moment curve.
//!
//! `D(n, m)  = A0(n_1)^{-1} A0(m_1) ... A0(n_r)^{-1} A0(m_r)`
//! `D~(n, m) = A0(n_1) A0(m_1)^{-1} ... A0(n_r) A0(m_r)^{-1}`
//!
//! [`d_form`] evaluates the closed forms directly (prefix sums for the cross
//! terms); [`alternating_word`] multiplies the word out and is kept as the
//! reference route.

use serde::{Deserialize, Serialize};

use super::{moment_curve, Coord, GroupElement, GroupShape};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WordVariant {
    /// `A0(n)^{-1} A0(m)` blocks.
    D,
    /// `A0(n) A0(m)^{-1}` blocks.
    DTilde,
}

fn ovf<T>(v: Option<T>) -> Result<T> {
    v.ok_or(Error::Overflow("d_form"))
}

/// Closed form of `D(x, y)` or `D~(x, y)`.
pub fn d_form<T: Coord>(x: &[T], y: &[T], variant: WordVariant, shape: GroupShape) -> Result<GroupElement<T>> {
    if x.len() != y.len() {
        return Err(Error::ShapeMismatch { expected: x.len(), found: y.len() });
    }
    let d = shape.degree();
    // powers[j][l] = x_j^l, y_j^l for l = 0..=2d
    let pw = |v: T| -> Result<Vec<T>> {
        let mut out = Vec::with_capacity(2 * d + 1);
        let mut acc = T::ONE;
        out.push(acc);
        for _ in 0..2 * d {
            acc = ovf(acc.c_mul(v))?;
            out.push(acc);
        }
        Ok(out)
    };
    let xp = x.iter().map(|&v| pw(v)).collect::<Result<Vec<_>>>()?;
    let yp = y.iter().map(|&v| pw(v)).collect::<Result<Vec<_>>>()?;

    // step differences u_j^l: y^l - x^l for D, x^l - y^l for D~
    let diff = |j: usize, l: usize| -> Result<T> {
        match variant {
            WordVariant::D => ovf(yp[j][l].c_sub(xp[j][l])),
            WordVariant::DTilde => ovf(xp[j][l].c_sub(yp[j][l])),
        }
    };

    let mut coords = vec![T::ZERO; shape.len()];
    let mut prefix = vec![T::ZERO; d + 1];
    for j in 0..x.len() {
        let mut pos = d;
        for l1 in 2..=d {
            for l2 in 1..l1 {
                let cross = ovf(prefix[l1].c_mul(diff(j, l2)?))?;
                let local = match variant {
                    WordVariant::D => ovf(xp[j][l1 + l2].c_sub(ovf(xp[j][l1].c_mul(yp[j][l2]))?))?,
                    WordVariant::DTilde => ovf(yp[j][l1 + l2].c_sub(ovf(xp[j][l1].c_mul(yp[j][l2]))?))?,
                };
                coords[pos] = ovf(ovf(coords[pos].c_add(cross))?.c_add(local))?;
                pos += 1;
            }
        }
        for l in 1..=d {
            let u = diff(j, l)?;
            coords[l - 1] = ovf(coords[l - 1].c_add(u))?;
            prefix[l] = ovf(prefix[l].c_add(u))?;
        }
    }
    GroupElement::new(shape, coords)
}

/// The word multiplied out with the group law.
pub fn alternating_word<T: Coord>(
    x: &[T],
    y: &[T],
    variant: WordVariant,
    shape: GroupShape,
) -> Result<GroupElement<T>> {
    if x.len() != y.len() {
        return Err(Error::ShapeMismatch { expected: x.len(), found: y.len() });
    }
    let mut acc = GroupElement::identity(shape);
    for (&a, &b) in x.iter().zip(y) {
        let (p, q) = match variant {
            WordVariant::D => (moment_curve(a, shape)?.inverse()?, moment_curve(b, shape)?),
            WordVariant::DTilde => (moment_curve(a, shape)?, moment_curve(b, shape)?.inverse()?),
        };
        acc = acc.multiply(&p)?.multiply(&q)?;
    }
    Ok(acc)
}

//! Rings of integers of degree at most 2: the rational integers Z, and the
//! maximal order of Q(sqrt(d)) for squarefree d, with integral basis {1, w}.
//!
//! Degree is capped at 2 on purpose: quadratic maximal orders have a closed
//! form integral basis, so every operation here stays exact without a
//! maximal-order algorithm. All coordinates are arbitrary precision.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Which element `w` completes the integral basis {1, w} of a quadratic ring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OmegaKind {
    /// `w = sqrt(d)`, used when `d = 2, 3 (mod 4)`.
    Sqrt,
    /// `w = (1 + sqrt(d)) / 2`, used when `d = 1 (mod 4)`.
    HalfSqrt,
}

/// The ambient ring: Z, or the ring of integers of Q(sqrt(d)).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RingOfIntegers {
    Rational,
    Quadratic { d: i64, omega: OmegaKind },
}

impl RingOfIntegers {
    /// The rational integers Z.
    pub fn rational() -> Self {
        RingOfIntegers::Rational
    }

    /// The maximal order of Q(sqrt(d)); `d` must be squarefree and not 0 or 1.
    pub fn quadratic(d: i64) -> Result<Self, Error> {
        if d == 0 || d == 1 {
            return Err(Error::InvalidRing(format!("d = {d} does not define a quadratic field")));
        }
        if !is_squarefree_i64(d) {
            return Err(Error::InvalidRing(format!("d = {d} is not squarefree")));
        }
        let omega = if d.rem_euclid(4) == 1 { OmegaKind::HalfSqrt } else { OmegaKind::Sqrt };
        Ok(RingOfIntegers::Quadratic { d, omega })
    }

    /// The Gaussian integers Z[i].
    pub fn gaussian() -> Self {
        RingOfIntegers::quadratic(-1).unwrap()
    }

    pub fn degree(&self) -> u32 {
        match self {
            RingOfIntegers::Rational => 1,
            RingOfIntegers::Quadratic { .. } => 2,
        }
    }

    pub fn d(&self) -> Option<i64> {
        match self {
            RingOfIntegers::Rational => None,
            RingOfIntegers::Quadratic { d, .. } => Some(*d),
        }
    }

    pub fn omega_kind(&self) -> Option<OmegaKind> {
        match self {
            RingOfIntegers::Rational => None,
            RingOfIntegers::Quadratic { omega, .. } => Some(*omega),
        }
    }

    /// Field discriminant: 1 for Z, d or 4d for quadratic rings.
    pub fn discriminant(&self) -> BigInt {
        match self {
            RingOfIntegers::Rational => BigInt::one(),
            RingOfIntegers::Quadratic { d, omega } => match omega {
                OmegaKind::Sqrt => BigInt::from(4 * *d),
                OmegaKind::HalfSqrt => BigInt::from(*d),
            },
        }
    }

    /// `(d - 1) / 4` for the HalfSqrt basis, so that `w^2 = w + m`.
    fn half_m(&self) -> BigInt {
        match self {
            RingOfIntegers::Quadratic { d, omega: OmegaKind::HalfSqrt } => BigInt::from((*d - 1) / 4),
            _ => unreachable!("half_m on a non-HalfSqrt ring"),
        }
    }

    pub fn zero(&self) -> Element {
        Element { x: BigInt::zero(), y: BigInt::zero() }
    }

    pub fn one(&self) -> Element {
        Element { x: BigInt::one(), y: BigInt::zero() }
    }

    pub fn omega(&self) -> Element {
        assert_eq!(self.degree(), 2, "omega only exists in degree 2");
        Element { x: BigInt::zero(), y: BigInt::one() }
    }

    pub fn from_i64(&self, v: i64) -> Element {
        Element { x: BigInt::from(v), y: BigInt::zero() }
    }

    pub fn element(&self, x: impl Into<BigInt>, y: impl Into<BigInt>) -> Element {
        let e = Element { x: x.into(), y: y.into() };
        debug_assert!(self.degree() == 2 || e.y.is_zero(), "nonzero w-coordinate in degree 1");
        e
    }

    pub fn add(&self, a: &Element, b: &Element) -> Element {
        Element { x: &a.x + &b.x, y: &a.y + &b.y }
    }

    pub fn sub(&self, a: &Element, b: &Element) -> Element {
        Element { x: &a.x - &b.x, y: &a.y - &b.y }
    }

    pub fn neg(&self, a: &Element) -> Element {
        Element { x: -&a.x, y: -&a.y }
    }

    /// Product in integral-basis coordinates, via `w^2 = d` or `w^2 = w + (d-1)/4`.
    pub fn mul(&self, a: &Element, b: &Element) -> Element {
        match self {
            RingOfIntegers::Rational => Element { x: &a.x * &b.x, y: BigInt::zero() },
            RingOfIntegers::Quadratic { d, omega } => {
                let cross = &a.x * &b.y + &a.y * &b.x;
                let yy = &a.y * &b.y;
                match omega {
                    OmegaKind::Sqrt => Element {
                        x: &a.x * &b.x + BigInt::from(*d) * &yy,
                        y: cross,
                    },
                    OmegaKind::HalfSqrt => Element {
                        x: &a.x * &b.x + self.half_m() * &yy,
                        y: cross + yy,
                    },
                }
            }
        }
    }

    pub fn mul_scalar(&self, a: &Element, k: &BigInt) -> Element {
        Element { x: &a.x * k, y: &a.y * k }
    }

    /// Field norm N(a); in degree 1 this is the element itself.
    pub fn norm(&self, a: &Element) -> BigInt {
        match self {
            RingOfIntegers::Rational => a.x.clone(),
            RingOfIntegers::Quadratic { d, omega } => match omega {
                OmegaKind::Sqrt => &a.x * &a.x - BigInt::from(*d) * &a.y * &a.y,
                OmegaKind::HalfSqrt => &a.x * &a.x + &a.x * &a.y - self.half_m() * &a.y * &a.y,
            },
        }
    }

    /// Field trace; in degree 1 this is the element itself.
    pub fn trace(&self, a: &Element) -> BigInt {
        match self {
            RingOfIntegers::Rational => a.x.clone(),
            RingOfIntegers::Quadratic { omega, .. } => match omega {
                OmegaKind::Sqrt => BigInt::from(2) * &a.x,
                OmegaKind::HalfSqrt => BigInt::from(2) * &a.x + &a.y,
            },
        }
    }

    /// Galois conjugate (identity in degree 1).
    pub fn conjugate(&self, a: &Element) -> Element {
        match self {
            RingOfIntegers::Rational => a.clone(),
            RingOfIntegers::Quadratic { omega, .. } => match omega {
                // sqrt(d) -> -sqrt(d)
                OmegaKind::Sqrt => Element { x: a.x.clone(), y: -&a.y },
                // w -> 1 - w
                OmegaKind::HalfSqrt => Element { x: &a.x + &a.y, y: -&a.y },
            },
        }
    }

    /// Coordinates of `a * w` (used to close modules under ring multiplication).
    pub fn mul_omega(&self, a: &Element) -> Element {
        assert_eq!(self.degree(), 2);
        self.mul(a, &self.omega())
    }

    /// The ring units when the unit group is finite; `None` for real
    /// quadratic rings (infinite unit group, out of scope here).
    pub fn finite_units(&self) -> Option<Vec<Element>> {
        match self {
            RingOfIntegers::Rational => Some(vec![self.one(), self.from_i64(-1)]),
            RingOfIntegers::Quadratic { d, .. } => {
                if *d > 0 {
                    return None;
                }
                let mut units = vec![self.one(), self.from_i64(-1)];
                if *d == -1 {
                    units.push(self.omega());
                    units.push(self.neg(&self.omega()));
                }
                if *d == -3 {
                    // w = (1+sqrt(-3))/2 is a primitive 6th root of unity.
                    let w = self.omega();
                    let w2 = self.mul(&w, &w);
                    units.push(w.clone());
                    units.push(self.neg(&w));
                    units.push(w2.clone());
                    units.push(self.neg(&w2));
                }
                Some(units)
            }
        }
    }

    /// The box F_n: elements x + yw with |x| <= n and |y| <= n (degree 2),
    /// or |x| <= n (degree 1), in lexicographic (x, y) order.
    pub fn folner_box(&self, n: u32) -> FolnerBox {
        FolnerBox { ring: *self, radius: n }
    }
}

fn is_squarefree_i64(d: i64) -> bool {
    let mut m = d.unsigned_abs();
    let mut p: u64 = 2;
    while p * p <= m {
        if m % p == 0 {
            m /= p;
            if m % p == 0 {
                return false;
            }
        }
        p = if p == 2 { 3 } else { p + 2 };
    }
    true
}

/// A ring integer in integral-basis coordinates `x + y*w` (y = 0 in degree 1).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Element {
    pub x: BigInt,
    pub y: BigInt,
}

impl Element {
    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    pub fn coords(&self) -> (&BigInt, &BigInt) {
        (&self.x, &self.y)
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.y.is_zero() {
            write!(f, "{}", self.x)
        } else if self.x.is_zero() {
            write!(f, "{}w", self.y)
        } else if self.y.is_negative() {
            write!(f, "{}{}w", self.x, self.y)
        } else {
            write!(f, "{}+{}w", self.x, self.y)
        }
    }
}

/// The nested Folner box F_n. The concrete choice of coordinate boxes is a
/// convention of this crate; the ordering is lexicographic on (x, y).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FolnerBox {
    pub ring: RingOfIntegers,
    pub radius: u32,
}

impl FolnerBox {
    pub fn len(&self) -> usize {
        let side = 2 * self.radius as usize + 1;
        match self.ring.degree() {
            1 => side,
            _ => side * side,
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, e: &Element) -> bool {
        let r = BigInt::from(self.radius);
        e.x.abs() <= r && (self.ring.degree() == 1 || e.y.abs() <= r)
    }

    /// Elements in canonical (lexicographic) order.
    pub fn elements(&self) -> Vec<Element> {
        let n = self.radius as i64;
        let mut out = Vec::with_capacity(self.len());
        match self.ring.degree() {
            1 => {
                for x in -n..=n {
                    out.push(Element { x: BigInt::from(x), y: BigInt::zero() });
                }
            }
            _ => {
                for x in -n..=n {
                    for y in -n..=n {
                        out.push(Element { x: BigInt::from(x), y: BigInt::from(y) });
                    }
                }
            }
        }
        out
    }
}

// Ring config in JSON: {"degree":1} or {"degree":2,"d":-5}.
#[derive(Serialize, Deserialize)]
struct RingConfig {
    degree: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    d: Option<i64>,
}

impl Serialize for RingOfIntegers {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let cfg = RingConfig { degree: self.degree(), d: self.d() };
        cfg.serialize(s)
    }
}

impl<'de> Deserialize<'de> for RingOfIntegers {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let cfg = RingConfig::deserialize(de)?;
        match cfg.degree {
            1 => Ok(RingOfIntegers::Rational),
            2 => {
                let d = cfg.d.ok_or_else(|| serde::de::Error::custom("degree 2 requires d"))?;
                RingOfIntegers::quadratic(d).map_err(serde::de::Error::custom)
            }
            other => Err(serde::de::Error::custom(format!("unsupported degree {other}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn omega_kind_follows_d_mod_4() {
        assert_eq!(RingOfIntegers::quadratic(-1).unwrap().omega_kind(), Some(OmegaKind::Sqrt));
        assert_eq!(RingOfIntegers::quadratic(-5).unwrap().omega_kind(), Some(OmegaKind::Sqrt));
        assert_eq!(RingOfIntegers::quadratic(5).unwrap().omega_kind(), Some(OmegaKind::HalfSqrt));
        assert_eq!(RingOfIntegers::quadratic(-3).unwrap().omega_kind(), Some(OmegaKind::HalfSqrt));
        assert!(RingOfIntegers::quadratic(12).is_err());
        assert!(RingOfIntegers::quadratic(1).is_err());
    }

    #[test]
    fn gaussian_product() {
        // (1+i)(1-i) = 2
        let zi = RingOfIntegers::gaussian();
        let a = zi.element(1, 1);
        let b = zi.element(1, -1);
        assert_eq!(zi.mul(&a, &b), zi.from_i64(2));
    }

    #[test]
    fn mul_by_one_is_identity() {
        let r = RingOfIntegers::quadratic(-5).unwrap();
        let a = r.element(3, -7);
        assert_eq!(r.mul(&a, &r.one()), a);
    }

    #[test]
    fn golden_omega_squares_to_omega_plus_one() {
        // w = (1+sqrt(5))/2 satisfies w^2 = w + 1
        let r = RingOfIntegers::quadratic(5).unwrap();
        let w = r.omega();
        assert_eq!(r.mul(&w, &w), r.element(1, 1));
    }

    #[test]
    fn norms() {
        let zi = RingOfIntegers::gaussian();
        assert_eq!(zi.norm(&zi.element(1, 1)), BigInt::from(2));
        assert_eq!(zi.norm(&zi.one()), BigInt::one());
        let r5 = RingOfIntegers::quadratic(-5).unwrap();
        assert_eq!(r5.norm(&r5.element(1, 1)), BigInt::from(6));
        let z = RingOfIntegers::rational();
        assert_eq!(z.norm(&z.from_i64(-7)), BigInt::from(-7));
    }

    #[test]
    fn norm_is_multiplicative() {
        for ring in [
            RingOfIntegers::rational(),
            RingOfIntegers::gaussian(),
            RingOfIntegers::quadratic(-5).unwrap(),
            RingOfIntegers::quadratic(5).unwrap(),
        ] {
            let mk = |x: i64, y: i64| {
                if ring.degree() == 1 { ring.from_i64(x) } else { ring.element(x, y) }
            };
            for (a, b) in [(mk(3, 2), mk(-1, 4)), (mk(0, 1), mk(7, -2)), (mk(5, 0), mk(2, 3))] {
                if ring.degree() == 1 && (!a.y.is_zero() || !b.y.is_zero()) {
                    continue;
                }
                assert_eq!(ring.norm(&ring.mul(&a, &b)), ring.norm(&a) * ring.norm(&b));
            }
        }
    }

    #[test]
    fn folner_boxes_are_nested_and_lexicographic() {
        let z = RingOfIntegers::rational();
        let b1 = z.folner_box(1).elements();
        assert_eq!(b1, vec![z.from_i64(-1), z.from_i64(0), z.from_i64(1)]);

        let zi = RingOfIntegers::gaussian();
        assert_eq!(zi.folner_box(0).elements(), vec![zi.zero()]);
        let e = zi.folner_box(1).elements();
        assert_eq!(e.len(), 9);
        assert_eq!(e[0], zi.element(-1, -1));
        assert_eq!(e[8], zi.element(1, 1));
        // nesting
        let b2: std::collections::HashSet<_> = zi.folner_box(2).elements().into_iter().collect();
        for x in zi.folner_box(1).elements() {
            assert!(b2.contains(&x));
        }
    }

    #[test]
    fn conjugate_gives_norm() {
        for ring in [RingOfIntegers::gaussian(), RingOfIntegers::quadratic(5).unwrap()] {
            let a = ring.element(4, -3);
            let n = ring.mul(&a, &ring.conjugate(&a));
            assert_eq!(n.y, BigInt::zero());
            assert_eq!(n.x, ring.norm(&a));
        }
    }

    #[test]
    fn ring_json_round_trip() {
        let r = RingOfIntegers::quadratic(-5).unwrap();
        let s = serde_json::to_string(&r).unwrap();
        assert_eq!(s, r#"{"degree":2,"d":-5}"#);
        let back: RingOfIntegers = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
    }
}

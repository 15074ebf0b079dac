//! Exact ideal arithmetic in rings of integers of degree <= 2.
//!
//! A nonzero ideal is stored as a canonical Hermite-normal-form Z-module
//! basis: `aZ + (b + c*w)Z` with `0 <= b < a`, `c | a`, `c | b` and
//! `a*c | N(b + c*w)` (degree 2), or just `aZ` (degree 1). Equality is
//! structural, so ideals are usable as map keys. The zero ideal is excluded
//! from the type entirely.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{self, FactorBudget};
use crate::error::Error;
use crate::hnf;
use crate::ring::{Element, OmegaKind, RingOfIntegers};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Repr {
    Deg1 { a: BigInt },
    Deg2 { a: BigInt, b: BigInt, c: BigInt },
}

/// A nonzero ideal of the ring of integers, in canonical HNF.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ideal {
    ring: RingOfIntegers,
    repr: Repr,
}

impl fmt::Display for Ideal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Deg1 { a } => write!(f, "({a})"),
            Repr::Deg2 { a, b, c } => write!(f, "[{a}, {b}+{c}w]"),
        }
    }
}

impl PartialOrd for Ideal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ideal {
    /// Canonical order: by norm, then HNF-lexicographic.
    fn cmp(&self, other: &Self) -> Ordering {
        let key = |i: &Ideal| match &i.repr {
            Repr::Deg1 { a } => (i.norm(), a.clone(), BigInt::zero(), BigInt::zero()),
            Repr::Deg2 { a, b, c } => (i.norm(), a.clone(), b.clone(), c.clone()),
        };
        key(self).cmp(&key(other))
    }
}

impl Ideal {
    pub fn ring(&self) -> RingOfIntegers {
        self.ring
    }

    /// HNF fields (a, b, c); degree 1 reports b = 0, c = 0.
    pub fn hnf(&self) -> (BigInt, BigInt, BigInt) {
        match &self.repr {
            Repr::Deg1 { a } => (a.clone(), BigInt::zero(), BigInt::zero()),
            Repr::Deg2 { a, b, c } => (a.clone(), b.clone(), c.clone()),
        }
    }

    /// The whole ring as an ideal.
    pub fn unit(ring: RingOfIntegers) -> Ideal {
        match ring.degree() {
            1 => Ideal { ring, repr: Repr::Deg1 { a: BigInt::one() } },
            _ => Ideal { ring, repr: Repr::Deg2 { a: BigInt::one(), b: BigInt::zero(), c: BigInt::one() } },
        }
    }

    pub fn is_unit(&self) -> bool {
        match &self.repr {
            Repr::Deg1 { a } => a.is_one(),
            Repr::Deg2 { a, c, .. } => a.is_one() && c.is_one(),
        }
    }

    /// The principal ideal (g). Panics on g = 0: the zero ideal is not
    /// representable.
    pub fn principal(ring: RingOfIntegers, g: &Element) -> Ideal {
        assert!(!g.is_zero(), "the zero ideal is excluded from the Ideal type");
        match ring.degree() {
            1 => Ideal { ring, repr: Repr::Deg1 { a: g.x.abs() } },
            _ => {
                let gw = ring.mul_omega(g);
                Ideal::from_module_rows(ring, vec![elem_row(ring, g), elem_row(ring, &gw)])
                    .expect("principal module of a nonzero element has full rank")
            }
        }
    }

    /// Principal ideal of a rational integer n != 0.
    pub fn from_int(ring: RingOfIntegers, n: i64) -> Ideal {
        Ideal::principal(ring, &ring.from_i64(n))
    }

    /// The ideal generated (as an ideal) by the given ring elements.
    pub fn from_generators(ring: RingOfIntegers, gens: &[Element]) -> Option<Ideal> {
        let mut rows = Vec::with_capacity(2 * gens.len());
        for g in gens {
            if g.is_zero() {
                continue;
            }
            rows.push(elem_row(ring, g));
            if ring.degree() == 2 {
                rows.push(elem_row(ring, &ring.mul_omega(g)));
            }
        }
        if rows.is_empty() {
            return None;
        }
        Ideal::from_module_rows(ring, rows)
    }

    /// Build from a generating set of Z-module rows. Returns None when the
    /// rows do not span a full-rank module (i.e. not a nonzero ideal).
    fn from_module_rows(ring: RingOfIntegers, rows: Vec<Vec<BigInt>>) -> Option<Ideal> {
        let h = hnf::row_hnf(rows);
        match ring.degree() {
            1 => {
                if h.len() != 1 {
                    return None;
                }
                Some(Ideal { ring, repr: Repr::Deg1 { a: h[0][0].clone() } })
            }
            _ => {
                if h.len() != 2 {
                    return None;
                }
                // rows are in (y, x) coordinates: [(c, b), (0, a)]
                let c = h[0][0].clone();
                let b = h[0][1].clone();
                let a = h[1][1].clone();
                let ideal = Ideal { ring, repr: Repr::Deg2 { a, b, c } };
                debug_assert!(ideal.check_ideal_closure(), "module is not an ideal: {ideal}");
                Some(ideal)
            }
        }
    }

    /// Construct directly from HNF fields, validating all invariants.
    pub fn from_hnf(ring: RingOfIntegers, a: BigInt, b: BigInt, c: BigInt) -> Result<Ideal, Error> {
        match ring.degree() {
            1 => {
                if !a.is_positive() {
                    return Err(Error::InvalidFamily(format!("ideal modulus must be positive, got {a}")));
                }
                Ok(Ideal { ring, repr: Repr::Deg1 { a } })
            }
            _ => {
                if !a.is_positive() || !c.is_positive() || b.is_negative() || b >= a {
                    return Err(Error::InvalidFamily(format!("({a}, {b}, {c}) violates HNF bounds")));
                }
                let ideal = Ideal { ring, repr: Repr::Deg2 { a, b, c } };
                if !ideal.check_ideal_closure() {
                    return Err(Error::InvalidFamily(format!("{ideal} is not closed under multiplication by w")));
                }
                Ok(ideal)
            }
        }
    }

    /// c | a, c | b and a*c | N(b + c*w): closure of the module under
    /// multiplication by w, which makes it an ideal.
    fn check_ideal_closure(&self) -> bool {
        match &self.repr {
            Repr::Deg1 { a } => a.is_positive(),
            Repr::Deg2 { a, b, c } => {
                if !a.is_positive() || !c.is_positive() || b.is_negative() || b >= a {
                    return false;
                }
                if !a.is_multiple_of(c) || !b.is_multiple_of(c) {
                    return false;
                }
                let gen = Element { x: b.clone(), y: c.clone() };
                self.ring.norm(&gen).is_multiple_of(&(a * c))
            }
        }
    }

    /// The two Z-basis elements (a and b + c*w); degree 1 returns (a, a).
    pub fn basis_elements(&self) -> (Element, Element) {
        match &self.repr {
            Repr::Deg1 { a } => {
                let e = Element { x: a.clone(), y: BigInt::zero() };
                (e.clone(), e)
            }
            Repr::Deg2 { a, b, c } => (
                Element { x: a.clone(), y: BigInt::zero() },
                Element { x: b.clone(), y: c.clone() },
            ),
        }
    }

    /// |O_K / a| = a*c in degree 2, a in degree 1.
    pub fn norm(&self) -> BigInt {
        match &self.repr {
            Repr::Deg1 { a } => a.clone(),
            Repr::Deg2 { a, c, .. } => a * c,
        }
    }

    pub fn contains_element(&self, g: &Element) -> bool {
        match &self.repr {
            Repr::Deg1 { a } => g.y.is_zero() && g.x.is_multiple_of(a),
            Repr::Deg2 { a, b, c } => {
                if !g.y.is_multiple_of(c) {
                    return false;
                }
                let k = &g.y / c;
                (&g.x - k * b).is_multiple_of(a)
            }
        }
    }

    /// Ideal containment self >= other (i.e. self divides other).
    pub fn contains(&self, other: &Ideal) -> bool {
        assert_eq!(self.ring, other.ring, "ideals from different rings");
        let (u, v) = other.basis_elements();
        self.contains_element(&u) && self.contains_element(&v)
    }

    /// gcd: the smallest ideal containing both.
    pub fn sum(&self, other: &Ideal) -> Ideal {
        assert_eq!(self.ring, other.ring, "ideals from different rings");
        match (&self.repr, &other.repr) {
            (Repr::Deg1 { a }, Repr::Deg1 { a: b }) => {
                Ideal { ring: self.ring, repr: Repr::Deg1 { a: a.gcd(b) } }
            }
            _ => {
                let (u1, v1) = self.basis_elements();
                let (u2, v2) = other.basis_elements();
                let rows = vec![
                    elem_row(self.ring, &u1),
                    elem_row(self.ring, &v1),
                    elem_row(self.ring, &u2),
                    elem_row(self.ring, &v2),
                ];
                Ideal::from_module_rows(self.ring, rows).expect("sum of ideals has full rank")
            }
        }
    }

    /// Product ideal, from the pairwise products of the basis elements.
    pub fn product(&self, other: &Ideal) -> Ideal {
        assert_eq!(self.ring, other.ring, "ideals from different rings");
        match (&self.repr, &other.repr) {
            (Repr::Deg1 { a }, Repr::Deg1 { a: b }) => {
                Ideal { ring: self.ring, repr: Repr::Deg1 { a: a * b } }
            }
            _ => {
                let (u1, v1) = self.basis_elements();
                let (u2, v2) = other.basis_elements();
                let mut rows = Vec::with_capacity(4);
                for x in [&u1, &v1] {
                    for y in [&u2, &v2] {
                        rows.push(elem_row(self.ring, &self.ring.mul(x, y)));
                    }
                }
                let prod = Ideal::from_module_rows(self.ring, rows).expect("product of ideals has full rank");
                debug_assert_eq!(prod.norm(), self.norm() * other.norm());
                prod
            }
        }
    }

    pub fn pow(&self, e: u32) -> Ideal {
        let mut out = Ideal::unit(self.ring);
        for _ in 0..e {
            out = out.product(self);
        }
        out
    }

    /// lcm: the largest ideal contained in both (module intersection).
    pub fn intersect(&self, other: &Ideal) -> Ideal {
        assert_eq!(self.ring, other.ring, "ideals from different rings");
        match (&self.repr, &other.repr) {
            (Repr::Deg1 { a }, Repr::Deg1 { a: b }) => {
                Ideal { ring: self.ring, repr: Repr::Deg1 { a: a.lcm(b) } }
            }
            (
                Repr::Deg2 { a: a1, b: b1, c: c1 },
                Repr::Deg2 { a: a2, b: b2, c: c2 },
            ) => {
                // y-coordinates of the intersection lie in lcm(c1, c2) Z; a
                // vector with y = k*L exists iff the congruence pair below is
                // solvable, which happens exactly for multiples of k*.
                let l = c1.lcm(c2);
                let big_a = a1.lcm(a2);
                let g = a1.gcd(a2);
                let delta = (&l / c1) * b1 - (&l / c2) * b2;
                let k_star = &g / g.gcd(&delta);
                let r1 = ((&l / c1) * b1 * &k_star).mod_floor(a1);
                let r2 = ((&l / c2) * b2 * &k_star).mod_floor(a2);
                let x0 = hnf::crt2(&r1, a1, &r2, a2).expect("k* makes the congruences solvable");
                let c = &k_star * &l;
                let b = x0.mod_floor(&big_a);
                let ideal = Ideal { ring: self.ring, repr: Repr::Deg2 { a: big_a, b, c } };
                debug_assert!(ideal.check_ideal_closure());
                debug_assert!(self.contains(&ideal) && other.contains(&ideal));
                ideal
            }
            _ => unreachable!("mixed-degree ideals in one ring"),
        }
    }

    pub fn is_coprime(&self, other: &Ideal) -> bool {
        self.sum(other).is_unit()
    }

    /// Canonical residue of g modulo this ideal, with coordinates
    /// `(i, j)`, `0 <= i < a`, `0 <= j < c`.
    pub fn reduce(&self, g: &Element) -> Element {
        match &self.repr {
            Repr::Deg1 { a } => Element { x: g.x.mod_floor(a), y: BigInt::zero() },
            Repr::Deg2 { a, b, c } => {
                let j = g.y.mod_floor(c);
                let k = (&g.y - &j) / c;
                let x = &g.x - &k * b;
                Element { x: x.mod_floor(a), y: j }
            }
        }
    }

    pub fn congruent(&self, g: &Element, h: &Element) -> bool {
        let diff = Element { x: &g.x - &h.x, y: &g.y - &h.y };
        self.contains_element(&diff)
    }

    /// All residues modulo this ideal: `{i + j*w : 0 <= i < a, 0 <= j < c}`.
    pub fn residues(&self, cap: u64) -> Result<Vec<Element>, Error> {
        let n = self.norm();
        if n > BigInt::from(cap) {
            return Err(Error::ResidueCapExceeded { norm: n, cap });
        }
        match &self.repr {
            Repr::Deg1 { a } => {
                let a = a.to_u64().unwrap();
                Ok((0..a).map(|i| Element { x: BigInt::from(i), y: BigInt::zero() }).collect())
            }
            Repr::Deg2 { a, c, .. } => {
                let a = a.to_u64().unwrap();
                let c = c.to_u64().unwrap();
                let mut out = Vec::with_capacity((a * c) as usize);
                for j in 0..c {
                    for i in 0..a {
                        out.push(Element { x: BigInt::from(i), y: BigInt::from(j) });
                    }
                }
                Ok(out)
            }
        }
    }

    /// Valuation: the largest t with other ⊆ self^t (self prime in practice,
    /// though the loop is well-defined for any proper ideal).
    pub fn valuation_of_ideal(&self, x: &Ideal) -> u32 {
        assert!(!self.is_unit(), "valuation at the unit ideal is undefined");
        let mut t = 0u32;
        let mut pw = self.clone();
        while pw.contains(x) {
            t += 1;
            pw = pw.product(self);
        }
        t
    }

    pub fn valuation_of_element(&self, g: &Element) -> u32 {
        self.valuation_of_ideal(&Ideal::principal(self.ring, g))
    }

    /// Prime-ideal factorization. The unit ideal factors as the empty product.
    pub fn factor(&self, budget: &FactorBudget) -> Result<PrimeFactorization, Error> {
        if self.is_unit() {
            return Ok(PrimeFactorization { ring: self.ring, factors: vec![] });
        }
        let n = self.norm();
        let rational = arith::factor_u64_like(&n, budget)?;
        let mut factors: Vec<(Ideal, u32)> = Vec::new();
        for (p, _) in rational {
            for prime in primes_above(self.ring, &p)? {
                let e = prime.ideal.valuation_of_ideal(self);
                if e > 0 {
                    factors.push((prime.ideal, e));
                }
            }
        }
        factors.sort_by(|x, y| x.0.cmp(&y.0));
        let fact = PrimeFactorization { ring: self.ring, factors };
        assert_eq!(&fact.reconstruct(), self, "factorization must reconstruct the ideal");
        Ok(fact)
    }
}

fn elem_row(ring: RingOfIntegers, e: &Element) -> Vec<BigInt> {
    match ring.degree() {
        1 => vec![e.x.clone()],
        _ => vec![e.y.clone(), e.x.clone()],
    }
}

/// A prime ideal above a rational prime, with its residue degree.
#[derive(Debug, Clone)]
pub struct PrimeAbove {
    pub ideal: Ideal,
    /// 1 for split/ramified primes (norm p), 2 for inert (norm p^2).
    pub residue_degree: u32,
    pub ramified: bool,
}

/// The prime ideals above the rational prime p, sorted canonically.
pub fn primes_above(ring: RingOfIntegers, p: &BigInt) -> Result<Vec<PrimeAbove>, Error> {
    match ring.degree() {
        1 => Ok(vec![PrimeAbove {
            ideal: Ideal { ring, repr: Repr::Deg1 { a: p.clone() } },
            residue_degree: 1,
            ramified: false,
        }]),
        _ => {
            let p_u64 = p
                .to_u64()
                .ok_or_else(|| Error::FactorEffortExceeded { remaining: p.clone() })?;
            let roots = omega_poly_roots(ring, p_u64);
            let make = |b: u64| Ideal {
                ring,
                repr: Repr::Deg2 { a: p.clone(), b: BigInt::from(b), c: BigInt::one() },
            };
            let ramified = ring.discriminant().is_multiple_of(p);
            let mut out = match roots.len() {
                0 => vec![PrimeAbove {
                    ideal: Ideal {
                        ring,
                        repr: Repr::Deg2 { a: p.clone(), b: BigInt::zero(), c: p.clone() },
                    },
                    residue_degree: 2,
                    ramified: false,
                }],
                _ => roots
                    .into_iter()
                    .map(|r| PrimeAbove { ideal: make(r), residue_degree: 1, ramified })
                    .collect(),
            };
            out.sort_by(|x, y| x.ideal.cmp(&y.ideal));
            for pa in &out {
                debug_assert!(pa.ideal.check_ideal_closure());
            }
            Ok(out)
        }
    }
}

/// Roots mod p of the minimal polynomial of w (distinct roots only).
fn omega_poly_roots(ring: RingOfIntegers, p: u64) -> Vec<u64> {
    let d = ring.d().expect("degree 2");
    let kind = ring.omega_kind().unwrap();
    let pm = |v: i64| -> u64 { (BigInt::from(v)).mod_floor(&BigInt::from(p)).to_u64().unwrap() };
    if p == 2 {
        let norm_mod2 = |b: u64| -> u64 {
            match kind {
                OmegaKind::Sqrt => (b * b + pm(-d)) % 2,
                OmegaKind::HalfSqrt => (b * b + b + pm(-((d - 1) / 4))) % 2,
            }
        };
        return (0..2).filter(|&b| norm_mod2(b) == 0).collect();
    }
    let dm = pm(d);
    match kind {
        OmegaKind::Sqrt => match arith::sqrt_mod_prime(dm, p) {
            None => vec![],
            Some(0) => vec![0],
            Some(s) => {
                let mut v = vec![s % p, (p - s) % p];
                v.sort_unstable();
                v.dedup();
                v
            }
        },
        OmegaKind::HalfSqrt => {
            // roots of t^2 + t - (d-1)/4: t = (-1 +- sqrt(d)) / 2 mod p
            match arith::sqrt_mod_prime(dm, p) {
                None => vec![],
                Some(s) => {
                    let inv2 = (p + 1) / 2;
                    let r1 = ((p - 1 + s) % p) as u128 * inv2 as u128 % p as u128;
                    let r2 = ((2 * p - 1 - s) % p) as u128 * inv2 as u128 % p as u128;
                    let mut v = vec![r1 as u64, r2 as u64];
                    v.sort_unstable();
                    v.dedup();
                    v
                }
            }
        }
    }
}

/// A sorted prime factorization `prod p_i^(e_i)` of a nonzero ideal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeFactorization {
    ring: RingOfIntegers,
    pub factors: Vec<(Ideal, u32)>,
}

impl PrimeFactorization {
    pub fn ring(&self) -> RingOfIntegers {
        self.ring
    }

    pub fn reconstruct(&self) -> Ideal {
        let mut out = Ideal::unit(self.ring);
        for (p, e) in &self.factors {
            out = out.product(&p.pow(*e));
        }
        out
    }

    /// All ideal divisors, sorted canonically. The count is the product of
    /// (e_i + 1); callers keep norms at desk scale.
    pub fn divisors(&self) -> Vec<Ideal> {
        let mut out = vec![Ideal::unit(self.ring)];
        for (p, e) in &self.factors {
            let mut next = Vec::with_capacity(out.len() * (*e as usize + 1));
            for d in &out {
                let mut acc = d.clone();
                next.push(acc.clone());
                for _ in 0..*e {
                    acc = acc.product(p);
                    next.push(acc.clone());
                }
            }
            out = next;
        }
        out.sort();
        out
    }
}

/// Split 1 = u + v with u in `m` and v in `a`, for coprime ideals.
fn split_one(m: &Ideal, a: &Ideal) -> Result<(Element, Element), Error> {
    let ring = m.ring();
    let (m1, m2) = m.basis_elements();
    let (a1, a2) = a.basis_elements();
    let gens: Vec<Element> = match ring.degree() {
        1 => vec![m1.clone(), a1.clone()],
        _ => vec![m1.clone(), m2.clone(), a1.clone(), a2.clone()],
    };
    let rows: Vec<Vec<BigInt>> = gens.iter().map(|g| elem_row(ring, g)).collect();
    let (h, tr) = hnf::row_hnf_with_transform(rows);
    // The sum must be the unit ideal; locate the HNF row equal to 1.
    let one_row = match ring.degree() {
        1 => {
            if h.len() != 1 || !h[0][0].is_one() {
                return Err(Error::NotCoprime { gcd_norm: m.sum(a).norm() });
            }
            0
        }
        _ => {
            // rows in (y, x): unit ideal is [(1, 0), (0, 1)]; element 1 is row 1.
            if h.len() != 2 || !h[0][0].is_one() || !h[1][1].is_one() || !h[0][1].is_zero() {
                return Err(Error::NotCoprime { gcd_norm: m.sum(a).norm() });
            }
            1
        }
    };
    let coeffs = &tr[one_row];
    let mut u = ring.zero();
    let take = if ring.degree() == 1 { 1 } else { 2 };
    for (t, g) in coeffs.iter().zip(gens.iter()).take(take) {
        u = ring.add(&u, &ring.mul_scalar(g, t));
    }
    let v = ring.sub(&ring.one(), &u);
    debug_assert!(m.contains_element(&u));
    debug_assert!(a.contains_element(&v));
    Ok((u, v))
}

/// Split `w = alpha + beta` with `alpha` in `h` and `beta` in `j`, when
/// `w` lies in the module sum `h + j` (which need not be the unit ideal).
pub fn split_element(w: &Element, h: &Ideal, j: &Ideal) -> Option<(Element, Element)> {
    let ring = h.ring();
    assert_eq!(ring, j.ring());
    let (h1, h2) = h.basis_elements();
    let (j1, j2) = j.basis_elements();
    let gens: Vec<Element> = match ring.degree() {
        1 => vec![h1.clone(), j1.clone()],
        _ => vec![h1.clone(), h2.clone(), j1.clone(), j2.clone()],
    };
    let rows: Vec<Vec<BigInt>> = gens.iter().map(|g| elem_row(ring, g)).collect();
    let (hn, tr) = hnf::row_hnf_with_transform(rows);
    // Express w over the HNF basis of the sum module.
    let coeffs: Vec<BigInt> = match ring.degree() {
        1 => {
            let (q, r) = w.x.div_rem(&hn[0][0]);
            if !r.is_zero() {
                return None;
            }
            vec![q]
        }
        _ => {
            // rows in (y, x): [(c', b'), (0, a')]
            let (s0, r0) = w.y.div_rem(&hn[0][0]);
            if !r0.is_zero() {
                return None;
            }
            let rem_x = &w.x - &s0 * &hn[0][1];
            let (s1, r1) = rem_x.div_rem(&hn[1][1]);
            if !r1.is_zero() {
                return None;
            }
            vec![s0, s1]
        }
    };
    let take = if ring.degree() == 1 { 1 } else { 2 };
    let mut gen_coeffs = vec![BigInt::zero(); gens.len()];
    for (s, row) in coeffs.iter().zip(tr.iter()) {
        for (gc, t) in gen_coeffs.iter_mut().zip(row.iter()) {
            *gc += s * t;
        }
    }
    let mut alpha = ring.zero();
    for (t, g) in gen_coeffs.iter().zip(gens.iter()).take(take) {
        alpha = ring.add(&alpha, &ring.mul_scalar(g, t));
    }
    let beta = ring.sub(w, &alpha);
    debug_assert!(h.contains_element(&alpha));
    if !j.contains_element(&beta) {
        return None;
    }
    Some((alpha, beta))
}

/// Chinese remainder: an element x with x = x_i (mod a_i) for pairwise
/// coprime ideals, reduced modulo the product. Non-coprime moduli are
/// rejected.
pub fn crt(pairs: &[(Element, Ideal)]) -> Result<Element, Error> {
    assert!(!pairs.is_empty(), "crt needs at least one congruence");
    let ring = pairs[0].1.ring();
    for i in 0..pairs.len() {
        for j in (i + 1)..pairs.len() {
            let g = pairs[i].1.sum(&pairs[j].1);
            if !g.is_unit() {
                return Err(Error::NotCoprime { gcd_norm: g.norm() });
            }
        }
    }
    let mut x = pairs[0].1.reduce(&pairs[0].0);
    let mut modulus = pairs[0].1.clone();
    for (xi, ai) in pairs.iter().skip(1) {
        let (u, v) = split_one(&modulus, ai)?;
        // x' = x*v + xi*u  =  x (mod modulus),  xi (mod ai)
        let next = ring.add(&ring.mul(&x, &v), &ring.mul(xi, &u));
        modulus = modulus.product(ai);
        x = modulus.reduce(&next);
    }
    for (xi, ai) in pairs {
        debug_assert!(ai.congruent(&x, xi), "crt postcondition violated");
    }
    Ok(x)
}

/// An element of `b` avoiding every coset `x_i + a_i`, for `a_i` pairwise
/// coprime proper ideals coprime to `b`. Realized by solving
/// `x = 0 (mod b)`, `x = x_i + 1 (mod a_i)`.
pub fn coset_avoid(b: &Ideal, cosets: &[(Element, Ideal)]) -> Result<Element, Error> {
    let ring = b.ring();
    if cosets.is_empty() {
        let (first, _) = b.basis_elements();
        return Ok(first);
    }
    for (_, a) in cosets {
        if a.is_unit() {
            return Err(Error::InvalidFamily("coset modulus must be a proper ideal".into()));
        }
    }
    let mut pairs: Vec<(Element, Ideal)> = Vec::with_capacity(cosets.len() + 1);
    if !b.is_unit() {
        pairs.push((ring.zero(), b.clone()));
    }
    for (xi, ai) in cosets {
        pairs.push((ring.add(xi, &ring.one()), ai.clone()));
    }
    let mut x = crt(&pairs)?;
    if x.is_zero() {
        // Any representative works; pick a nonzero one inside the modulus.
        let modulus = pairs.iter().fold(Ideal::unit(ring), |acc, (_, a)| acc.product(a));
        let (first, _) = modulus.basis_elements();
        x = first;
    }
    debug_assert!(b.contains_element(&x));
    for (xi, ai) in cosets {
        debug_assert!(!ai.congruent(&x, xi), "coset_avoid postcondition violated");
    }
    Ok(x)
}

/// Coset representatives of `sub` inside `sup` (requires sub ⊆ sup).
pub fn cosets_in(sub: &Ideal, sup: &Ideal) -> Vec<Element> {
    let ring = sub.ring();
    assert!(sup.contains(sub), "cosets_in requires sub ⊆ sup");
    match ring.degree() {
        1 => {
            let (m, _, _) = sup.hnf();
            let (n, _, _) = sub.hnf();
            let count = (&n / &m).to_u64().expect("index fits u64");
            (0..count)
                .map(|k| Element { x: BigInt::from(k) * &m, y: BigInt::zero() })
                .collect()
        }
        _ => {
            let (u1, u2) = sup.basis_elements();
            // Express sub's basis over sup's basis.
            let (a, b, c) = sup.hnf();
            let expr = |e: &Element| -> (BigInt, BigInt) {
                let beta = &e.y / &c;
                let alpha = (&e.x - &beta * &b) / &a;
                (alpha, beta)
            };
            let (v1, v2) = sub.basis_elements();
            let (a1, b1) = expr(&v1);
            let (a2, b2) = expr(&v2);
            let t = hnf::row_hnf(vec![vec![a1, b1], vec![a2, b2]]);
            assert_eq!(t.len(), 2);
            let t11 = t[0][0].to_u64().expect("index fits u64");
            let t22 = t[1][1].to_u64().expect("index fits u64");
            let mut out = Vec::with_capacity((t11 * t22) as usize);
            for i in 0..t11 {
                for j in 0..t22 {
                    let e = ring.add(
                        &ring.mul_scalar(&u1, &BigInt::from(i)),
                        &ring.mul_scalar(&u2, &BigInt::from(j)),
                    );
                    out.push(e);
                }
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z() -> RingOfIntegers {
        RingOfIntegers::rational()
    }
    fn zi() -> RingOfIntegers {
        RingOfIntegers::gaussian()
    }
    fn zm5() -> RingOfIntegers {
        RingOfIntegers::quadratic(-5).unwrap()
    }
    fn zphi() -> RingOfIntegers {
        RingOfIntegers::quadratic(5).unwrap()
    }

    #[test]
    fn sum_is_gcd_in_z() {
        let a = Ideal::from_int(z(), 4);
        let b = Ideal::from_int(z(), 6);
        assert_eq!(a.sum(&b), Ideal::from_int(z(), 2));
        assert_eq!(a.sum(&Ideal::unit(z())), Ideal::unit(z()));
    }

    #[test]
    fn gaussian_sum_hnf() {
        // (2) + (1+i) = (1+i) with HNF (a, b, c) = (2, 1, 1)
        let two = Ideal::from_int(zi(), 2);
        let opi = Ideal::principal(zi(), &zi().element(1, 1));
        let s = two.sum(&opi);
        assert_eq!(s.hnf(), (BigInt::from(2), BigInt::one(), BigInt::one()));
        assert_eq!(s, opi);
        assert!(!two.is_coprime(&opi));
    }

    #[test]
    fn product_examples() {
        assert_eq!(
            Ideal::from_int(z(), 4).product(&Ideal::from_int(z(), 6)),
            Ideal::from_int(z(), 24)
        );
        // (2, 1+sqrt(-5))^2 = (2)
        let p = Ideal::from_generators(zm5(), &[zm5().from_i64(2), zm5().element(1, 1)]).unwrap();
        assert_eq!(p.norm(), BigInt::from(2));
        assert_eq!(p.product(&p), Ideal::from_int(zm5(), 2));
        // (2w - 1)^2 = (5) in Z[(1+sqrt 5)/2]
        let q = Ideal::principal(zphi(), &zphi().element(-1, 2));
        assert_eq!(q.product(&q), Ideal::from_int(zphi(), 5));
    }

    #[test]
    fn intersect_examples() {
        assert_eq!(
            Ideal::from_int(z(), 4).intersect(&Ideal::from_int(z(), 6)),
            Ideal::from_int(z(), 12)
        );
        let opi = Ideal::principal(zi(), &zi().element(1, 1));
        let three = Ideal::from_int(zi(), 3);
        let want = Ideal::principal(zi(), &zi().element(3, 3));
        assert_eq!(opi.intersect(&three), want);
        let a = Ideal::principal(zm5(), &zm5().element(2, 1));
        assert_eq!(a.intersect(&Ideal::unit(zm5())), a);
    }

    #[test]
    fn coprimality_examples() {
        assert!(Ideal::from_int(z(), 4).is_coprime(&Ideal::from_int(z(), 9)));
        let p3a = Ideal::from_generators(zm5(), &[zm5().from_i64(3), zm5().element(1, 1)]).unwrap();
        let p3b = Ideal::from_generators(zm5(), &[zm5().from_i64(3), zm5().element(1, -1)]).unwrap();
        assert!(p3a.is_coprime(&p3b));
    }

    #[test]
    fn factor_in_z() {
        let f = Ideal::from_int(z(), 12).factor(&FactorBudget::default()).unwrap();
        assert_eq!(
            f.factors,
            vec![(Ideal::from_int(z(), 2), 2), (Ideal::from_int(z(), 3), 1)]
        );
    }

    #[test]
    fn factor_six_in_zm5() {
        let f = Ideal::from_int(zm5(), 6).factor(&FactorBudget::default()).unwrap();
        assert_eq!(f.factors.len(), 3);
        let p2 = Ideal::from_generators(zm5(), &[zm5().from_i64(2), zm5().element(1, 1)]).unwrap();
        assert!(f.factors.iter().any(|(p, e)| *p == p2 && *e == 2));
        let norms: Vec<BigInt> = f.factors.iter().map(|(p, _)| p.norm()).collect();
        assert_eq!(norms, vec![BigInt::from(2), BigInt::from(3), BigInt::from(3)]);
        assert_eq!(f.reconstruct(), Ideal::from_int(zm5(), 6));
    }

    #[test]
    fn factor_ramified_in_golden_ring() {
        let f = Ideal::from_int(zphi(), 5).factor(&FactorBudget::default()).unwrap();
        assert_eq!(f.factors.len(), 1);
        let (p, e) = &f.factors[0];
        assert_eq!(*e, 2);
        assert_eq!(*p, Ideal::principal(zphi(), &zphi().element(-1, 2)));
    }

    #[test]
    fn valuations() {
        let two = Ideal::from_int(z(), 2);
        assert_eq!(two.valuation_of_element(&z().from_i64(8)), 3);
        let opi = Ideal::principal(zi(), &zi().element(1, 1));
        assert_eq!(opi.valuation_of_ideal(&Ideal::from_int(zi(), 2)), 2);
        let three = Ideal::from_int(z(), 3);
        assert_eq!(three.valuation_of_element(&z().from_i64(8)), 0);
    }

    #[test]
    fn residue_systems() {
        let r3 = Ideal::from_int(z(), 3).residues(1000).unwrap();
        assert_eq!(r3, vec![z().from_i64(0), z().from_i64(1), z().from_i64(2)]);
        let opi = Ideal::principal(zi(), &zi().element(1, 1));
        assert_eq!(opi.residues(1000).unwrap(), vec![zi().zero(), zi().one()]);
        let two = Ideal::from_int(zi(), 2);
        assert_eq!(
            two.residues(1000).unwrap(),
            vec![zi().element(0, 0), zi().element(1, 0), zi().element(0, 1), zi().element(1, 1)]
        );
        // pairwise incongruent
        let rs = two.residues(1000).unwrap();
        for i in 0..rs.len() {
            for j in 0..i {
                assert!(!two.congruent(&rs[i], &rs[j]));
            }
        }
    }

    #[test]
    fn crt_examples() {
        let x = crt(&[
            (z().from_i64(1), Ideal::from_int(z(), 2)),
            (z().from_i64(2), Ideal::from_int(z(), 3)),
        ])
        .unwrap();
        assert_eq!(x, z().from_i64(5));

        let opi = Ideal::principal(zi(), &zi().element(1, 1));
        let three = Ideal::from_int(zi(), 3);
        let sol = crt(&[(zi().zero(), opi.clone()), (zi().one(), three.clone())]).unwrap();
        assert!(opi.contains_element(&sol));
        assert!(three.congruent(&sol, &zi().one()));

        let single = crt(&[(z().from_i64(2), Ideal::from_int(z(), 7))]).unwrap();
        assert_eq!(single, z().from_i64(2));

        let err = crt(&[
            (z().from_i64(0), Ideal::from_int(z(), 4)),
            (z().from_i64(1), Ideal::from_int(z(), 6)),
        ]);
        assert!(matches!(err, Err(Error::NotCoprime { .. })));
    }

    #[test]
    fn coset_avoid_examples() {
        let b = Ideal::from_int(z(), 3);
        let x = coset_avoid(&b, &[(z().from_i64(1), Ideal::from_int(z(), 2))]).unwrap();
        assert_eq!(x, z().from_i64(6));

        let b5 = Ideal::from_int(z(), 5);
        let x = coset_avoid(
            &b5,
            &[
                (z().from_i64(0), Ideal::from_int(z(), 2)),
                (z().from_i64(0), Ideal::from_int(z(), 3)),
            ],
        )
        .unwrap();
        assert_eq!(x, z().from_i64(25));

        let x = coset_avoid(&b, &[]).unwrap();
        assert_eq!(x, z().from_i64(3));
    }

    #[test]
    fn principal_norm_matches_element_norm() {
        for ring in [zi(), zm5(), zphi()] {
            for (x, y) in [(3i64, 2i64), (-1, 4), (0, 7), (5, -3)] {
                let e = ring.element(x, y);
                if e.is_zero() {
                    continue;
                }
                assert_eq!(Ideal::principal(ring, &e).norm(), ring.norm(&e).abs());
            }
        }
    }

    #[test]
    fn cosets_in_counts() {
        let sup = Ideal::from_int(z(), 2);
        let sub = Ideal::from_int(z(), 6);
        assert_eq!(cosets_in(&sub, &sup).len(), 3);
        let sup = Ideal::principal(zi(), &zi().element(1, 1));
        let sub = Ideal::from_int(zi(), 2);
        let reps = cosets_in(&sub, &sup);
        assert_eq!(reps.len(), 2);
        for i in 0..reps.len() {
            assert!(sup.contains_element(&reps[i]));
            for j in 0..i {
                assert!(!sub.congruent(&reps[i], &reps[j]));
            }
        }
    }
}

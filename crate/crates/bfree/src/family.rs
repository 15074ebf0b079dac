//! Collections B of nonzero ideals: explicit finite lists and the built-in
//! rule families, together with membership in the set of multiples, eta
//! windows over Folner boxes, primitive reduction, and saturated filtrations.
//!
//! Rule families ship their gcd oracle analytically, so periodicity
//! decisions never rest on truncating an infinite enumeration.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::ideal::{primes_above, Ideal};
use crate::ring::{Element, FolnerBox, RingOfIntegers};
use crate::Caps;

/// A collection of nonzero ideals, finite or rule-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BFamily {
    /// An explicit finite list.
    Finite(FiniteFamily),
    /// All squares of prime ideals.
    PrimeSquares { ring: RingOfIntegers },
    /// `scale * p` over prime ideals p, with configurable excluded primes.
    ScaledPrimes { scale: Ideal, exclude: Vec<Ideal> },
    /// `(2^i * c_i)` in Z for a validated pairwise-coprime odd list `c`.
    /// Held as a finite prefix; the i-th member only references `c_1..c_i`,
    /// so prefix computations agree with the infinite family up to stage
    /// `c.len()`.
    PowersTimesCoprime { coeffs: Vec<u64> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteFamily {
    ring: RingOfIntegers,
    members: Vec<Ideal>,
}

impl FiniteFamily {
    pub fn new(ring: RingOfIntegers, members: Vec<Ideal>) -> Result<Self, Error> {
        if members.is_empty() {
            return Err(Error::EmptyInput("a family needs at least one ideal".into()));
        }
        let mut members = members;
        for m in &members {
            if m.ring() != ring {
                return Err(Error::InvalidFamily("member from a different ring".into()));
            }
        }
        members.sort();
        members.dedup();
        Ok(FiniteFamily { ring, members })
    }

    pub fn members(&self) -> &[Ideal] {
        &self.members
    }

    /// Remove every member strictly contained in another member. The set of
    /// multiples is unchanged.
    pub fn primitive_reduction(&self) -> FiniteFamily {
        let keep: Vec<Ideal> = self
            .members
            .iter()
            .filter(|m| {
                !self
                    .members
                    .iter()
                    .any(|other| *other != **m && other.contains(m))
            })
            .cloned()
            .collect();
        FiniteFamily { ring: self.ring, members: keep }
    }

    pub fn is_primitive(&self) -> bool {
        self.members.len() == self.primitive_reduction().members.len()
    }
}

/// lcm of a nonempty list of ideals (iterated intersection).
pub fn lcm_of(ideals: &[Ideal]) -> Result<Ideal, Error> {
    let mut it = ideals.iter();
    let first = it.next().ok_or_else(|| Error::EmptyInput("lcm of an empty list".into()))?;
    Ok(it.fold(first.clone(), |acc, x| acc.intersect(x)))
}

impl BFamily {
    pub fn finite(ring: RingOfIntegers, members: Vec<Ideal>) -> Result<Self, Error> {
        Ok(BFamily::Finite(FiniteFamily::new(ring, members)?))
    }

    pub fn prime_squares(ring: RingOfIntegers) -> Self {
        BFamily::PrimeSquares { ring }
    }

    pub fn scaled_primes(scale: Ideal, exclude: Vec<Ideal>, caps: &Caps) -> Result<Self, Error> {
        for e in &exclude {
            let f = e.factor(&caps.factor)?;
            if f.factors.len() != 1 || f.factors[0].1 != 1 {
                return Err(Error::InvalidFamily(format!("excluded ideal {e} is not prime")));
            }
            if e.ring() != scale.ring() {
                return Err(Error::InvalidFamily("excluded prime from a different ring".into()));
            }
        }
        let mut exclude = exclude;
        exclude.sort();
        exclude.dedup();
        Ok(BFamily::ScaledPrimes { scale, exclude })
    }

    /// `c` entries must be odd, at least 3, and pairwise coprime.
    pub fn powers_times_coprime(coeffs: Vec<u64>) -> Result<Self, Error> {
        if coeffs.is_empty() {
            return Err(Error::EmptyInput("need at least one coefficient".into()));
        }
        for (i, c) in coeffs.iter().enumerate() {
            if *c < 3 || c % 2 == 0 {
                return Err(Error::InvalidFamily(format!("coefficient {c} must be odd and >= 3")));
            }
            for prev in &coeffs[..i] {
                if prev.gcd(c) != 1 {
                    return Err(Error::InvalidFamily(format!(
                        "coefficients {prev} and {c} are not coprime"
                    )));
                }
            }
        }
        Ok(BFamily::PowersTimesCoprime { coeffs })
    }

    pub fn ring(&self) -> RingOfIntegers {
        match self {
            BFamily::Finite(f) => f.ring,
            BFamily::PrimeSquares { ring } => *ring,
            BFamily::ScaledPrimes { scale, .. } => scale.ring(),
            BFamily::PowersTimesCoprime { .. } => RingOfIntegers::rational(),
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, BFamily::Finite(_) | BFamily::PowersTimesCoprime { .. })
    }

    /// Finite view of the member list, when one exists.
    pub fn finite_members(&self) -> Option<Vec<Ideal>> {
        match self {
            BFamily::Finite(f) => Some(f.members.clone()),
            BFamily::PowersTimesCoprime { coeffs } => Some(powers_members(coeffs)),
            _ => None,
        }
    }

    /// The first `k` members in canonical order (norm, then HNF-lex).
    /// Finite families may return fewer than `k`.
    pub fn enumerate(&self, k: usize, caps: &Caps) -> Result<Vec<Ideal>, Error> {
        match self {
            BFamily::Finite(f) => Ok(f.members.iter().take(k).cloned().collect()),
            BFamily::PowersTimesCoprime { coeffs } => {
                Ok(powers_members(coeffs).into_iter().take(k).collect())
            }
            BFamily::PrimeSquares { ring } => {
                let primes = prime_ideals_by_norm(*ring, k, caps)?;
                let mut members: Vec<Ideal> = primes.iter().map(|p| p.product(p)).collect();
                members.sort();
                Ok(members.into_iter().take(k).collect())
            }
            BFamily::ScaledPrimes { scale, exclude } => {
                let primes = prime_ideals_by_norm(scale.ring(), k + exclude.len(), caps)?;
                let mut members: Vec<Ideal> = primes
                    .iter()
                    .filter(|p| !exclude.contains(p))
                    .map(|p| scale.product(p))
                    .collect();
                members.sort();
                Ok(members.into_iter().take(k).collect())
            }
        }
    }

    /// Exact membership test.
    pub fn contains(&self, b: &Ideal, caps: &Caps) -> Result<bool, Error> {
        match self {
            BFamily::Finite(f) => Ok(f.members.contains(b)),
            BFamily::PowersTimesCoprime { coeffs } => Ok(powers_members(coeffs).contains(b)),
            BFamily::PrimeSquares { .. } => {
                let f = b.factor(&caps.factor)?;
                Ok(f.factors.len() == 1 && f.factors[0].1 == 2)
            }
            BFamily::ScaledPrimes { scale, exclude } => {
                if !scale.contains(b) {
                    return Ok(false);
                }
                let fb = b.factor(&caps.factor)?;
                let fs = scale.factor(&caps.factor)?;
                // cofactor exponents b / scale
                let mut cof: Vec<(Ideal, i64)> = Vec::new();
                for (p, e) in &fb.factors {
                    let es = fs
                        .factors
                        .iter()
                        .find(|(q, _)| q == p)
                        .map(|(_, e)| *e as i64)
                        .unwrap_or(0);
                    let diff = *e as i64 - es;
                    if diff != 0 {
                        cof.push((p.clone(), diff));
                    }
                }
                for (p, e) in &fs.factors {
                    if !fb.factors.iter().any(|(q, _)| q == p) {
                        cof.push((p.clone(), -(*e as i64)));
                    }
                }
                Ok(cof.len() == 1 && cof[0].1 == 1 && !exclude.contains(&cof[0].0))
            }
        }
    }

    /// The finite set `{gcd(b, s) : b in B}`, computed analytically; these
    /// are exactly the ideals `b + s`, i.e. the possible coset obstructions
    /// of the period `s`.
    pub fn gcd_values(&self, s: &Ideal, caps: &Caps) -> Result<Vec<Ideal>, Error> {
        let mut out: BTreeSet<Ideal> = BTreeSet::new();
        match self {
            BFamily::Finite(f) => {
                for m in &f.members {
                    out.insert(m.sum(s));
                }
            }
            BFamily::PowersTimesCoprime { coeffs } => {
                for m in powers_members(coeffs) {
                    out.insert(m.sum(s));
                }
            }
            BFamily::PrimeSquares { .. } => {
                out.insert(Ideal::unit(s.ring()));
                let f = s.factor(&caps.factor)?;
                for (p, e) in &f.factors {
                    out.insert(p.pow((*e).min(2)));
                }
            }
            BFamily::ScaledPrimes { scale, exclude } => {
                let base = scale.sum(s);
                out.insert(base.clone());
                let f = s.factor(&caps.factor)?;
                for (p, e) in &f.factors {
                    if exclude.contains(p) {
                        continue;
                    }
                    // a boosted value appears exactly when v_p(s) > v_p(scale)
                    if *e > p_val(scale, p) {
                        out.insert(base.product(p));
                    }
                }
            }
        }
        Ok(out.into_iter().collect())
    }

    /// Members containing (i.e. dividing) the given ideal.
    pub fn members_containing(&self, l: &Ideal, caps: &Caps) -> Result<Vec<Ideal>, Error> {
        let mut out: Vec<Ideal> = Vec::new();
        match self {
            BFamily::Finite(f) => {
                out.extend(f.members.iter().filter(|m| m.contains(l)).cloned());
            }
            BFamily::PowersTimesCoprime { coeffs } => {
                out.extend(powers_members(coeffs).into_iter().filter(|m| m.contains(l)));
            }
            BFamily::PrimeSquares { .. } => {
                let f = l.factor(&caps.factor)?;
                for (p, e) in &f.factors {
                    if *e >= 2 {
                        out.push(p.product(p));
                    }
                }
            }
            BFamily::ScaledPrimes { scale, exclude } => {
                if scale.contains(l) {
                    let f = l.factor(&caps.factor)?;
                    for (p, e) in &f.factors {
                        if exclude.contains(p) {
                            continue;
                        }
                        if *e > p_val(scale, p) {
                            out.push(scale.product(p));
                        }
                    }
                }
            }
        }
        out.sort();
        out.dedup();
        Ok(out)
    }

    /// True iff some member contains g, decided exactly. `g` must be nonzero.
    pub fn is_multiple(&self, g: &Element, caps: &Caps) -> Result<bool, Error> {
        assert!(!g.is_zero(), "membership of 0 is handled by the eta(0) = 0 convention");
        match self {
            BFamily::Finite(f) => Ok(f.members.iter().any(|m| m.contains_element(g))),
            BFamily::PowersTimesCoprime { coeffs } => {
                Ok(powers_members(coeffs).iter().any(|m| m.contains_element(g)))
            }
            BFamily::PrimeSquares { ring } => {
                let f = Ideal::principal(*ring, g).factor(&caps.factor)?;
                Ok(f.factors.iter().any(|(_, e)| *e >= 2))
            }
            BFamily::ScaledPrimes { scale, exclude } => {
                if !scale.contains_element(g) {
                    return Ok(false);
                }
                let fg = Ideal::principal(scale.ring(), g).factor(&caps.factor)?;
                for (p, e) in &fg.factors {
                    if exclude.contains(p) {
                        continue;
                    }
                    if *e > p_val(scale, p) {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
        }
    }

    /// eta at an absolute position, with eta(0) = 0 (0 lies in every ideal).
    pub fn eta_at(&self, g: &Element, caps: &Caps) -> Result<u8, Error> {
        if g.is_zero() {
            return Ok(0);
        }
        Ok(if self.is_multiple(g, caps)? { 0 } else { 1 })
    }

    /// The restriction of eta to `box + offset`.
    pub fn eta_window(&self, window: &FolnerBox, offset: &Element, caps: &Caps) -> Result<EtaWindow, Error> {
        let ring = self.ring();
        let mut values = Vec::with_capacity(window.len());
        for rel in window.elements() {
            let abs = ring.add(&rel, offset);
            values.push(match self.eta_at(&abs, caps)? {
                0 => Cell::Zero,
                _ => Cell::One,
            });
        }
        Ok(EtaWindow { window: *window, offset: offset.clone(), values })
    }

    /// `{b in B : b contains lcm(S)}` for a finite nonempty `S ⊆ B`; the
    /// result passes the saturation test (its own gcd-value members are
    /// exactly itself).
    pub fn saturate(&self, s: &[Ideal], caps: &Caps) -> Result<Vec<Ideal>, Error> {
        if s.is_empty() {
            return Err(Error::EmptyInput("saturate of an empty subset".into()));
        }
        for m in s {
            if !self.contains(m, caps)? {
                return Err(Error::InvalidFamily(format!("{m} is not a member of the family")));
            }
        }
        let l = lcm_of(s)?;
        let result = self.members_containing(&l, caps)?;
        debug_assert!(s.iter().all(|m| result.contains(m)));
        Ok(result)
    }

    /// Whether a finite subset equals the set of members dividing its lcm.
    pub fn is_saturated(&self, s: &[Ideal], caps: &Caps) -> Result<bool, Error> {
        let sat = self.saturate(s, caps)?;
        let mut s_sorted = s.to_vec();
        s_sorted.sort();
        s_sorted.dedup();
        Ok(sat == s_sorted)
    }

    /// `k` nested saturated finite subsets obtained by saturating growing
    /// enumeration prefixes. An explicit finite list is its own (trivially
    /// saturated) single stage, repeated; rule families grow one prefix
    /// element at a time and repeat the final stage once exhausted.
    pub fn saturated_filtration(&self, k: usize, caps: &Caps) -> Result<Vec<Vec<Ideal>>, Error> {
        assert!(k >= 1, "need at least one stage");
        if let BFamily::Finite(f) = self {
            let stage = self.saturate(f.members(), caps)?;
            return Ok(vec![stage; k]);
        }
        let mut stages: Vec<Vec<Ideal>> = Vec::with_capacity(k);
        let mut prefix_len = 1usize;
        let mut guard = 0usize;
        while stages.len() < k {
            guard += 1;
            if guard > caps.stage_cap + k {
                return Err(Error::StageBoundExceeded(caps.stage_cap));
            }
            let members = self.enumerate(prefix_len, caps)?;
            let exhausted = members.len() < prefix_len;
            if members.is_empty() {
                return Err(Error::EmptyInput("family has no members".into()));
            }
            let stage = self.saturate(&members, caps)?;
            match stages.last() {
                Some(last) if *last == stage => {
                    if exhausted {
                        stages.push(stage);
                    } else {
                        prefix_len += 1;
                    }
                }
                _ => {
                    stages.push(stage);
                    prefix_len += 1;
                }
            }
        }
        Ok(stages)
    }
}

fn p_val(ideal: &Ideal, p: &Ideal) -> u32 {
    p.valuation_of_ideal(ideal)
}

fn powers_members(coeffs: &[u64]) -> Vec<Ideal> {
    let z = RingOfIntegers::rational();
    let mut out: Vec<Ideal> = coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let n = BigInt::from(2).pow(i as u32 + 1) * BigInt::from(*c);
            Ideal::principal(z, &Element { x: n, y: BigInt::zero() })
        })
        .collect();
    out.sort();
    out
}

/// The first `count` prime ideals of the ring, ordered by norm then HNF-lex.
pub fn prime_ideals_by_norm(
    ring: RingOfIntegers,
    count: usize,
    _caps: &Caps,
) -> Result<Vec<Ideal>, Error> {
    let mut bound: u64 = 64.max(2 * count as u64);
    loop {
        let mut primes: Vec<Ideal> = Vec::new();
        for p in crate::arith::primes_up_to(bound) {
            for pa in primes_above(ring, &BigInt::from(p))? {
                primes.push(pa.ideal);
            }
        }
        // Keep only primes whose norm is certainly within the enumerated
        // range (an inert prime above p has norm p^2 and may be preceded by
        // split primes above larger rationals).
        let norm_bound = BigInt::from(bound);
        primes.retain(|p| p.norm() <= norm_bound);
        primes.sort();
        if primes.len() >= count {
            primes.truncate(count);
            return Ok(primes);
        }
        if bound > (1 << 40) {
            return Err(Error::ScanBudgetExceeded("prime ideal enumeration".into()));
        }
        bound *= 2;
    }
}

/// One cell of an eta window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cell {
    Zero,
    One,
    Hole,
}

impl Cell {
    pub fn bit(&self) -> Option<u8> {
        match self {
            Cell::Zero => Some(0),
            Cell::One => Some(1),
            Cell::Hole => None,
        }
    }
}

/// The restriction of a 0/1/hole array to a Folner box placed at an offset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EtaWindow {
    pub window: FolnerBox,
    pub offset: Element,
    /// Indexed by the box elements in canonical (lexicographic) order.
    pub values: Vec<Cell>,
}

impl EtaWindow {
    pub fn index_of(&self, rel: &Element) -> Option<usize> {
        if !self.window.contains(rel) {
            return None;
        }
        let n = self.window.radius as i64;
        let x = rel.x.to_i64().unwrap();
        match self.window.ring.degree() {
            1 => Some((x + n) as usize),
            _ => {
                let y = rel.y.to_i64().unwrap();
                let side = 2 * n + 1;
                Some(((x + n) * side + (y + n)) as usize)
            }
        }
    }

    /// Value at a box-relative position.
    pub fn get(&self, rel: &Element) -> Option<Cell> {
        self.index_of(rel).map(|i| self.values[i])
    }

    pub fn has_holes(&self) -> bool {
        self.values.iter().any(|c| matches!(c, Cell::Hole))
    }

    /// (relative position, cell) pairs in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = (Element, Cell)> + '_ {
        self.window.elements().into_iter().zip(self.values.iter().copied())
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
    fn caps() -> Caps {
        Caps::default()
    }

    fn zideal(n: i64) -> Ideal {
        Ideal::from_int(z(), n)
    }

    #[test]
    fn squarefree_membership() {
        let b = BFamily::prime_squares(z());
        assert!(b.is_multiple(&z().from_i64(12), &caps()).unwrap());
        assert!(!b.is_multiple(&z().from_i64(6), &caps()).unwrap());
    }

    #[test]
    fn gaussian_finite_membership() {
        let b = BFamily::finite(zi(), vec![Ideal::principal(zi(), &zi().element(1, 1))]).unwrap();
        assert!(b.is_multiple(&zi().element(3, 1), &caps()).unwrap());
    }

    #[test]
    fn eta_window_finite() {
        let b = BFamily::finite(z(), vec![zideal(2), zideal(3)]).unwrap();
        let w = b.eta_window(&z().folner_box(3), &z().zero(), &caps()).unwrap();
        let bits: Vec<u8> = w.values.iter().map(|c| c.bit().unwrap()).collect();
        assert_eq!(bits, vec![0, 0, 1, 0, 1, 0, 0]);
    }

    #[test]
    fn eta_of_units() {
        for b in [
            BFamily::prime_squares(z()),
            BFamily::finite(z(), vec![zideal(4), zideal(6)]).unwrap(),
        ] {
            assert_eq!(b.eta_at(&z().one(), &caps()).unwrap(), 1);
        }
    }

    #[test]
    fn eta_window_matches_squarefree_indicator() {
        // independent oracle: trial-division squarefree test
        let sqfree = |n: i64| -> u8 {
            let n = n.unsigned_abs();
            if n == 0 {
                return 0;
            }
            let mut m = n;
            let mut p = 2u64;
            while p * p <= m {
                if m % p == 0 {
                    m /= p;
                    if m % p == 0 {
                        return 0;
                    }
                }
                p += 1;
            }
            1
        };
        let b = BFamily::prime_squares(z());
        let w = b.eta_window(&z().folner_box(4), &z().zero(), &caps()).unwrap();
        let got: Vec<u8> = w.values.iter().map(|c| c.bit().unwrap()).collect();
        let want: Vec<u8> = (-4..=4).map(sqfree).collect();
        assert_eq!(got, want);
        assert_eq!(want, vec![0, 1, 1, 1, 0, 1, 1, 1, 0]);
    }

    #[test]
    fn primitive_reduction_examples() {
        let f = FiniteFamily::new(z(), vec![zideal(2), zideal(4)]).unwrap();
        assert_eq!(f.primitive_reduction().members(), &[zideal(2)]);
        let f = FiniteFamily::new(z(), vec![zideal(4), zideal(6)]).unwrap();
        assert_eq!(f.primitive_reduction().members().len(), 2);
        let opi = Ideal::principal(zi(), &zi().element(1, 1));
        let f = FiniteFamily::new(zi(), vec![opi.clone(), Ideal::from_int(zi(), 2)]).unwrap();
        assert_eq!(f.primitive_reduction().members(), &[opi]);
    }

    #[test]
    fn lcm_examples() {
        assert_eq!(lcm_of(&[zideal(4), zideal(6)]).unwrap(), zideal(12));
        assert_eq!(lcm_of(&[zideal(7)]).unwrap(), zideal(7));
        let opi = Ideal::principal(zi(), &zi().element(1, 1));
        let want = Ideal::principal(zi(), &zi().element(3, 3));
        assert_eq!(lcm_of(&[opi, Ideal::from_int(zi(), 3)]).unwrap(), want);
    }

    #[test]
    fn enumerate_prime_squares() {
        let b = BFamily::prime_squares(z());
        let m = b.enumerate(3, &caps()).unwrap();
        assert_eq!(m, vec![zideal(4), zideal(9), zideal(25)]);
    }

    #[test]
    fn enumerate_scaled_primes() {
        let b = BFamily::scaled_primes(zideal(2), vec![], &caps()).unwrap();
        let m = b.enumerate(4, &caps()).unwrap();
        assert_eq!(m, vec![zideal(4), zideal(6), zideal(10), zideal(14)]);
        assert!(b.contains(&zideal(22), &caps()).unwrap());
        assert!(!b.contains(&zideal(12), &caps()).unwrap());
        assert!(b.is_multiple(&z().from_i64(12), &caps()).unwrap());
        assert!(!b.is_multiple(&z().from_i64(2), &caps()).unwrap());
    }

    #[test]
    fn powers_times_coprime_members() {
        let b = BFamily::powers_times_coprime(vec![3, 5, 7]).unwrap();
        let m = b.enumerate(10, &caps()).unwrap();
        assert_eq!(m, vec![zideal(6), zideal(20), zideal(56)]);
        assert!(BFamily::powers_times_coprime(vec![3, 9]).is_err());
        assert!(BFamily::powers_times_coprime(vec![4]).is_err());
    }

    #[test]
    fn saturation_examples() {
        let c = caps();
        let b = BFamily::powers_times_coprime(vec![3, 5, 7]).unwrap();
        assert_eq!(b.saturate(&[zideal(6)], &c).unwrap(), vec![zideal(6)]);

        let ps = BFamily::prime_squares(z());
        assert_eq!(
            ps.saturate(&[zideal(4), zideal(9)], &c).unwrap(),
            vec![zideal(4), zideal(9)]
        );
        assert!(ps.saturate(&[], &c).is_err());
        assert!(ps.is_saturated(&[zideal(4), zideal(9)], &c).unwrap());
    }

    #[test]
    fn filtration_examples() {
        let c = caps();
        let b = BFamily::powers_times_coprime(vec![3, 5, 7]).unwrap();
        let stages = b.saturated_filtration(3, &c).unwrap();
        assert_eq!(stages[0], vec![zideal(6)]);
        assert_eq!(stages[1], vec![zideal(6), zideal(20)]);
        assert_eq!(stages[2], vec![zideal(6), zideal(20), zideal(56)]);

        let fin = BFamily::finite(z(), vec![zideal(4), zideal(6)]).unwrap();
        let stages = fin.saturated_filtration(3, &c).unwrap();
        assert_eq!(stages[0], vec![zideal(4), zideal(6)]);
        assert_eq!(stages[1], stages[0]);
        assert_eq!(stages[2], stages[0]);

        let ps = BFamily::prime_squares(z());
        let stages = ps.saturated_filtration(3, &c).unwrap();
        assert_eq!(stages[0], vec![zideal(4)]);
        assert_eq!(stages[1], vec![zideal(4), zideal(9)]);
        assert_eq!(stages[2], vec![zideal(4), zideal(9), zideal(25)]);
    }

    #[test]
    fn filtration_includes_absorbed_members() {
        // saturating {6, 10} pulls in 15, which divides lcm(6, 10) = 30
        let c = caps();
        let b = BFamily::finite(z(), vec![zideal(6), zideal(10), zideal(15)]).unwrap();
        let sat = b.saturate(&[zideal(6), zideal(10)], &c).unwrap();
        assert_eq!(sat, vec![zideal(6), zideal(10), zideal(15)]);
        assert!(b.is_saturated(&[zideal(6), zideal(10)], &c).unwrap() == false);
    }

    #[test]
    fn gcd_values_analytic() {
        let c = caps();
        let ps = BFamily::prime_squares(z());
        let v = ps.gcd_values(&zideal(12), &c).unwrap();
        assert_eq!(v, vec![Ideal::unit(z()), zideal(3), zideal(4)]);

        let sp = BFamily::scaled_primes(zideal(2), vec![], &c).unwrap();
        let v = sp.gcd_values(&zideal(60), &c).unwrap();
        // gcd(2p, 60): base gcd(2,60) = 2; boosted by p in {2, 3, 5}
        assert_eq!(v, vec![zideal(2), zideal(4), zideal(6), zideal(10)]);
    }

    #[test]
    fn is_multiple_agrees_with_naive_enumeration() {
        let c = caps();
        for b in [
            BFamily::prime_squares(z()),
            BFamily::scaled_primes(zideal(2), vec![], &c).unwrap(),
        ] {
            // enumerate enough members to cover every divisor of |g| <= 50
            let members = b.enumerate(60, &c).unwrap();
            for g in -50i64..=50 {
                if g == 0 {
                    continue;
                }
                let e = z().from_i64(g);
                let naive = members.iter().any(|m| m.contains_element(&e));
                assert_eq!(b.is_multiple(&e, &c).unwrap(), naive, "g = {g}");
            }
        }
    }

    #[test]
    fn finite_eta_is_periodic() {
        let c = caps();
        let b = BFamily::finite(z(), vec![zideal(4), zideal(6)]).unwrap();
        let l = lcm_of(&b.finite_members().unwrap()).unwrap();
        let period = l.norm().to_i64().unwrap();
        for g in 1..(2 * period) {
            let a = b.eta_at(&z().from_i64(g), &c).unwrap();
            let bb = b.eta_at(&z().from_i64(g + period), &c).unwrap();
            assert_eq!(a, bb);
        }
    }

    #[test]
    fn primitive_reduction_preserves_multiples() {
        let c = caps();
        let fam = FiniteFamily::new(z(), vec![zideal(2), zideal(4), zideal(6)]).unwrap();
        let red = fam.primitive_reduction();
        let b1 = BFamily::Finite(fam.clone());
        let b2 = BFamily::Finite(red);
        for g in -30i64..=30 {
            if g == 0 {
                continue;
            }
            let e = z().from_i64(g);
            assert_eq!(
                b1.is_multiple(&e, &c).unwrap(),
                b2.is_multiple(&e, &c).unwrap()
            );
        }
    }

    #[test]
    fn window_indexing() {
        let b = BFamily::prime_squares(zi());
        let w = b.eta_window(&zi().folner_box(2), &zi().zero(), &caps()).unwrap();
        assert_eq!(w.values.len(), 25);
        for (rel, cell) in w.iter() {
            assert_eq!(w.get(&rel), Some(cell));
        }
        // eta(0) = 0 sits at the center
        assert_eq!(w.get(&zi().zero()), Some(Cell::Zero));
    }
}

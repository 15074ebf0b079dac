//! Finite-index sublattices of Z^2 and the two-adic family
//! `(a_i, 2^i)Z + (0, 2^i c_i)Z`, whose free array is not a Z^2-Toeplitz
//! array even though the family contains no scaled copy of an infinite
//! pairwise coprime collection. This is the setting where the ideal-based
//! theory genuinely fails, verified here at desk scale.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith;
use crate::error::Error;
use crate::hnf;
use crate::Caps;

/// A finite-index sublattice of Z^2 with HNF basis rows `(a, b)`, `(0, d)`:
/// `a, d > 0` and `0 <= b < d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lattice2 {
    pub a: BigInt,
    pub b: BigInt,
    pub d: BigInt,
}

impl std::fmt::Display for Lattice2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})Z+(0,{})Z", self.a, self.b, self.d)
    }
}

impl Lattice2 {
    pub fn new(a: impl Into<BigInt>, b: impl Into<BigInt>, d: impl Into<BigInt>) -> Result<Self, Error> {
        let (a, b, d) = (a.into(), b.into(), d.into());
        if !a.is_positive() || !d.is_positive() || b.is_negative() || b >= d {
            return Err(Error::InvalidFamily(format!(
                "({a}, {b}, {d}) violates the lattice HNF bounds"
            )));
        }
        Ok(Lattice2 { a, b, d })
    }

    /// The full lattice Z^2.
    pub fn full() -> Self {
        Lattice2 { a: BigInt::one(), b: BigInt::zero(), d: BigInt::one() }
    }

    pub fn from_rows(rows: Vec<(BigInt, BigInt)>) -> Option<Self> {
        let h = hnf::row_hnf(rows.into_iter().map(|(x, y)| vec![x, y]).collect());
        if h.len() != 2 {
            return None;
        }
        Some(Lattice2 { a: h[0][0].clone(), b: h[0][1].clone(), d: h[1][1].clone() })
    }

    pub fn index(&self) -> BigInt {
        &self.a * &self.d
    }

    pub fn contains(&self, x: &BigInt, y: &BigInt) -> bool {
        if !x.is_multiple_of(&self.a) {
            return false;
        }
        let k = x / &self.a;
        (y - k * &self.b).is_multiple_of(&self.d)
    }

    /// Lattice sum (join).
    pub fn sum(&self, other: &Lattice2) -> Lattice2 {
        Lattice2::from_rows(vec![
            (self.a.clone(), self.b.clone()),
            (BigInt::zero(), self.d.clone()),
            (other.a.clone(), other.b.clone()),
            (BigInt::zero(), other.d.clone()),
        ])
        .expect("sum of finite-index lattices is finite-index")
    }

    /// Lattice intersection (meet).
    pub fn intersect(&self, other: &Lattice2) -> Lattice2 {
        // x-coordinates of the intersection are multiples of lcm(a1, a2);
        // the smallest positive one admitting a common y solves a congruence
        // pair, and the y-axis part is lcm(d1, d2).
        let big_a = self.a.lcm(&other.a);
        let g = self.d.gcd(&other.d);
        let delta = (&big_a / &self.a) * &self.b - (&big_a / &other.a) * &other.b;
        let k_star = &g / g.gcd(&delta);
        let r1 = ((&big_a / &self.a) * &self.b * &k_star).mod_floor(&self.d);
        let r2 = ((&big_a / &other.a) * &other.b * &k_star).mod_floor(&other.d);
        let y0 = hnf::crt2(&r1, &self.d, &r2, &other.d).expect("k* makes the pair solvable");
        let d = self.d.lcm(&other.d);
        let out = Lattice2 { a: &k_star * &big_a, b: y0.mod_floor(&d), d };
        debug_assert!(out.sublattice_of(self) && out.sublattice_of(other));
        out
    }

    pub fn sublattice_of(&self, other: &Lattice2) -> bool {
        other.contains(&self.a, &self.b) && other.contains(&BigInt::zero(), &self.d)
    }

    /// The maximal rectangular sublattice `pZ x qZ` contained here:
    /// `p = a*d/gcd(b, d)`, `q = d`.
    pub fn max_rect(&self) -> (BigInt, BigInt) {
        let g = self.b.gcd(&self.d);
        let g = if g.is_zero() { self.d.clone() } else { g };
        ((&self.a * &self.d) / g, self.d.clone())
    }

    /// Coordinatewise scaling `(sx, sy) * L`, re-normalized to HNF.
    pub fn scale(&self, sx: &BigInt, sy: &BigInt) -> Option<Lattice2> {
        if sx.is_zero() || sy.is_zero() {
            return None;
        }
        Lattice2::from_rows(vec![
            (sx * &self.a, sy * &self.b),
            (BigInt::zero(), sy * &self.d),
        ])
    }
}

/// All sublattices of Z^2 of index at most `bound`, in HNF enumeration order.
pub fn lattices_of_index_at_most(bound: u64) -> Vec<Lattice2> {
    let mut out = Vec::new();
    for n in 1..=bound {
        for d in 1..=n {
            if n % d != 0 {
                continue;
            }
            let a = n / d;
            for b in 0..d {
                out.push(Lattice2 {
                    a: BigInt::from(a),
                    b: BigInt::from(b),
                    d: BigInt::from(d),
                });
            }
        }
    }
    out
}

/// The family `L_i = (a_i, 2^i)Z + (0, 2^i c_i)Z` for validated lists of odd
/// pairwise-coprime products `a_i * c_i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoAdicFamily {
    pub a: Vec<u64>,
    pub c: Vec<u64>,
}

impl TwoAdicFamily {
    pub fn new(a: Vec<u64>, c: Vec<u64>) -> Result<Self, Error> {
        if a.len() != c.len() || a.is_empty() {
            return Err(Error::InvalidFamily("need equal, nonempty a and c lists".into()));
        }
        let fam = TwoAdicFamily { a, c };
        fam.validate()?;
        Ok(fam)
    }

    fn validate(&self) -> Result<(), Error> {
        for (&ai, &ci) in self.a.iter().zip(self.c.iter()) {
            if ai < 2 || ci < 2 {
                return Err(Error::InvalidFamily("entries must be at least 2".into()));
            }
            if ai % 2 == 0 || ci % 2 == 0 {
                return Err(Error::InvalidFamily(format!(
                    "product {} is even; the family needs odd products",
                    ai * ci
                )));
            }
        }
        let products: Vec<u64> = self.products();
        for i in 0..products.len() {
            for j in 0..i {
                if products[i].gcd(&products[j]) != 1 {
                    return Err(Error::InvalidFamily(format!(
                        "products {} and {} share a factor",
                        products[i], products[j]
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn products(&self) -> Vec<u64> {
        self.a.iter().zip(self.c.iter()).map(|(x, y)| x * y).collect()
    }

    /// The i-th member (1-based): `(a_i, 2^i)Z + (0, 2^i c_i)Z`.
    pub fn member(&self, i: usize) -> Lattice2 {
        assert!(1 <= i && i <= self.len(), "member index out of range");
        let two_i = BigInt::from(2).pow(i as u32);
        Lattice2 {
            a: BigInt::from(self.a[i - 1]),
            b: two_i.clone(),
            d: two_i * BigInt::from(self.c[i - 1]),
        }
    }

    pub fn members(&self) -> Vec<Lattice2> {
        (1..=self.len()).map(|i| self.member(i)).collect()
    }

    /// Deterministically extend the lists with fresh consecutive primes
    /// until the family has `upto` members (products stay pairwise coprime).
    pub fn extended(&self, upto: usize) -> TwoAdicFamily {
        let mut used: Vec<u64> = Vec::new();
        for &v in self.a.iter().chain(self.c.iter()) {
            let mut m = v;
            let mut p = 3u64;
            while p * p <= m {
                if m % p == 0 {
                    used.push(p);
                    while m % p == 0 {
                        m /= p;
                    }
                }
                p += 2;
            }
            if m > 1 {
                used.push(m);
            }
        }
        let mut a = self.a.clone();
        let mut c = self.c.clone();
        let mut candidate = 3u64;
        while a.len() < upto {
            let mut next = || {
                loop {
                    if arith::is_prime_u64(candidate) && !used.contains(&candidate) {
                        used.push(candidate);
                        let out = candidate;
                        candidate += 2;
                        return out;
                    }
                    candidate += 2;
                }
            };
            let ai = next();
            let ci = next();
            a.push(ai);
            c.push(ci);
        }
        TwoAdicFamily { a, c }
    }

    /// Index of some member containing the point, if any.
    pub fn covering_member(&self, x: &BigInt, y: &BigInt) -> Option<usize> {
        (1..=self.len()).find(|&i| self.member(i).contains(x, y))
    }

    /// eta of the lattice family: 1 on points in no member, with eta(0) = 0.
    pub fn eta_at(&self, x: &BigInt, y: &BigInt) -> u8 {
        if x.is_zero() && y.is_zero() {
            return 0;
        }
        u8::from(self.covering_member(x, y).is_none())
    }
}

/// Report of the non-Toeplitz verification: the free position (1, 0), a CRT
/// run of consecutive zeros on row 0, and a periodicity failure witness for
/// every candidate lattice up to an index bound.
#[derive(Debug, Clone)]
pub struct NotToeplitzReport {
    /// Family prefix actually used (extended when the requested run is
    /// longer than the configured prefix).
    pub family: TwoAdicFamily,
    pub requested_prefix: usize,
    pub eta_at_one_zero: u8,
    /// Start of the zero run on row 0 and its length.
    pub run_start: BigInt,
    pub run_len: usize,
    /// Member index covering each run position.
    pub run_members: Vec<usize>,
    /// For every lattice of index <= the bound: a point of `(1,0) + L`
    /// inside the set of multiples.
    pub period_failures: Vec<(Lattice2, (BigInt, BigInt))>,
    pub index_bound: u64,
}

/// Verify that the family's eta is not a Z^2-Toeplitz array:
/// `eta(1, 0) = 1`, yet row 0 carries arbitrarily long zero runs (one run of
/// `run_len` consecutive zeros is located by CRT and checked by membership),
/// so no finite-index lattice can be a period of position (1, 0); every
/// candidate up to `index_bound` is refuted by an explicit witness.
///
/// Row 0 meets member i exactly in the multiples of `a_i * c_i` (its maximal
/// rectangle is `a_i c_i Z x 2^i c_i Z`), so a run of length L needs L
/// members; the prefix is extended deterministically when it is shorter.
pub fn verify_not_toeplitz(
    family: &TwoAdicFamily,
    run_len: usize,
    index_bound: u64,
    caps: &Caps,
) -> Result<NotToeplitzReport, Error> {
    let requested_prefix = family.len();
    let family = if family.len() < run_len {
        family.extended(run_len)
    } else {
        family.clone()
    };

    let one = BigInt::one();
    let zero = BigInt::zero();
    let eta_at_one_zero = family.eta_at(&one, &zero);
    assert_eq!(eta_at_one_zero, 1, "a_i >= 2 keeps (1,0) free");

    // CRT: run_start + j = 0 (mod a_(j+1) c_(j+1)) for j = 0 .. run_len-1.
    let mut run_start = BigInt::zero();
    let mut modulus = BigInt::one();
    for (j, m) in family.products().iter().take(run_len).enumerate() {
        let m = BigInt::from(*m);
        let target = (-BigInt::from(j as u64)).mod_floor(&m);
        run_start = hnf::crt2(&run_start, &modulus, &target, &m)
            .expect("products are pairwise coprime");
        modulus *= &m;
    }
    if run_start.is_zero() {
        run_start = modulus.clone();
    }
    let mut run_members = Vec::with_capacity(run_len);
    for j in 0..run_len {
        let x = &run_start + BigInt::from(j as u64);
        let member = family
            .covering_member(&x, &zero)
            .expect("CRT placed every run position inside a member");
        assert!(family.member(j + 1).contains(&x, &zero));
        assert_eq!(family.eta_at(&x, &zero), 0);
        run_members.push(member);
    }

    // Periodicity of (1, 0) fails for every lattice of bounded index: search
    // a multiple on the translated row 0, which meets the lattice in the
    // multiples of p0 = a*d/gcd(b,d).
    let mut period_failures = Vec::new();
    for lat in lattices_of_index_at_most(index_bound) {
        let (p0, _) = lat.max_rect();
        let mut witness: Option<(BigInt, BigInt)> = None;
        for k in 1..=caps.scan_cap {
            let x = &one + &p0 * BigInt::from(k);
            if family.covering_member(&x, &zero).is_some() {
                witness = Some((x, zero.clone()));
                break;
            }
        }
        let w = witness.ok_or_else(|| {
            Error::ScanBudgetExceeded(format!("period witness for {lat}"))
        })?;
        debug_assert!(lat.contains(&(&w.0 - &one), &w.1));
        period_failures.push((lat, w));
    }

    Ok(NotToeplitzReport {
        family,
        requested_prefix,
        eta_at_one_zero,
        run_start,
        run_len,
        run_members,
        period_failures,
        index_bound,
    })
}

/// Per-scaling-pair summary for the scaled-copy exclusion.
#[derive(Debug, Clone)]
pub struct ScalingRow {
    pub sx: u64,
    pub sy: u64,
    /// Members expressible as (sx, sy)-scalings of some sublattice, with the
    /// (unique) preimage.
    pub reachable: Vec<(usize, Lattice2)>,
    /// Largest subset of reachable members whose preimages are pairwise
    /// coprime lattices.
    pub max_coprime_set: usize,
    /// 2-adic valuation of sy: preimage indices are odd only at member
    /// `v2(sy)`, so a pairwise coprime set has at most one other element.
    pub v2_cap: u32,
}

#[derive(Debug, Clone)]
pub struct ScaledCopyReport {
    pub rows: Vec<ScalingRow>,
    /// Every scaling pair keeps the coprime set size at most 2.
    pub confirmed: bool,
}

/// For every coordinatewise scaling `(sx, sy)` with `1 <= sx, sy <= bound`,
/// compute which members are scaled copies of sublattices and the largest
/// number of them with pairwise coprime preimages. A member `i` is reachable
/// only when `sy` divides `2^i` (the preimage is then unique), which is the
/// 2-adic obstruction capping the count.
pub fn verify_no_scaled_copy(
    family: &TwoAdicFamily,
    bound: u64,
) -> Result<ScaledCopyReport, Error> {
    let mut rows = Vec::new();
    let mut confirmed = true;
    for sx in 1..=bound {
        for sy in 1..=bound {
            let sxb = BigInt::from(sx);
            let syb = BigInt::from(sy);
            let mut reachable: Vec<(usize, Lattice2)> = Vec::new();
            for i in 1..=family.len() {
                let m = family.member(i);
                // need sx | a_i, sy | 2^i, and the scaled preimage to land
                // exactly on the member
                if !m.a.is_multiple_of(&sxb) {
                    continue;
                }
                let two_i = BigInt::from(2).pow(i as u32);
                if !two_i.is_multiple_of(&syb) {
                    continue;
                }
                let pre = Lattice2 {
                    a: &m.a / &sxb,
                    b: &two_i / &syb,
                    d: &m.d / &syb,
                };
                if let Some(pre) = Lattice2::new(pre.a, pre.b.mod_floor(&pre.d), pre.d).ok() {
                    if pre.scale(&sxb, &syb).as_ref() == Some(&m) {
                        reachable.push((i, pre));
                    }
                }
            }
            // largest pairwise-coprime subset of the preimages
            let n = reachable.len();
            let mut coprime = vec![vec![false; n]; n];
            for i in 0..n {
                for j in 0..i {
                    let s = reachable[i].1.sum(&reachable[j].1);
                    let ok = s.index().is_one();
                    coprime[i][j] = ok;
                    coprime[j][i] = ok;
                }
            }
            let mut best = if n == 0 { 0 } else { 1 };
            for mask in 1u32..(1u32 << n.min(20)) {
                let idxs: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
                if idxs.len() <= best {
                    continue;
                }
                let ok = idxs
                    .iter()
                    .enumerate()
                    .all(|(pos, &i)| idxs[..pos].iter().all(|&j| coprime[i][j]));
                if ok {
                    best = idxs.len();
                }
            }
            let v2_cap = sy.trailing_zeros();
            if best > 2 {
                confirmed = false;
            }
            rows.push(ScalingRow {
                sx,
                sy,
                reachable,
                max_coprime_set: best,
                v2_cap,
            });
        }
    }
    Ok(ScaledCopyReport { rows, confirmed })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lat(a: i64, b: i64, d: i64) -> Lattice2 {
        Lattice2::new(a, b, d).unwrap()
    }

    #[test]
    fn sum_and_intersect() {
        let l22 = lat(2, 0, 2);
        let l33 = lat(3, 0, 3);
        assert_eq!(l22.sum(&l33), Lattice2::full());
        let l2z = lat(2, 0, 1);
        let lz3 = lat(1, 0, 3);
        assert_eq!(l2z.intersect(&lz3), lat(2, 0, 3));
        assert_eq!(lat(2, 1, 3).index(), BigInt::from(6));
    }

    #[test]
    fn intersect_brute_force() {
        let pairs = [
            (lat(2, 1, 3), lat(3, 2, 4)),
            (lat(4, 2, 6), lat(6, 1, 5)),
            (lat(2, 1, 2), lat(2, 0, 2)),
        ];
        for (p, q) in pairs {
            let m = p.intersect(&q);
            for x in -24i64..=24 {
                for y in -24i64..=24 {
                    let (xb, yb) = (BigInt::from(x), BigInt::from(y));
                    assert_eq!(
                        m.contains(&xb, &yb),
                        p.contains(&xb, &yb) && q.contains(&xb, &yb),
                        "{p} ∩ {q} at ({x},{y})"
                    );
                }
            }
        }
    }

    #[test]
    fn index_multiplicativity() {
        // [Z^2 : H1 ∩ H2] = [Z^2 : H1] * [H1 : H1 ∩ H2], with the relative
        // index counted directly: H1 points inside one fundamental domain of
        // the intersection.
        for (h1, h2) in [
            (lat(2, 1, 3), lat(3, 2, 4)),
            (lat(4, 2, 6), lat(6, 1, 5)),
            (lat(2, 0, 2), lat(3, 1, 3)),
        ] {
            let m = h1.intersect(&h2);
            let (ma, md) = (m.a.to_i64().unwrap(), m.d.to_i64().unwrap());
            let mut relative = 0i64;
            for x in 0..ma {
                for y in 0..md {
                    if h1.contains(&BigInt::from(x), &BigInt::from(y)) {
                        relative += 1;
                    }
                }
            }
            assert_eq!(m.index(), h1.index() * BigInt::from(relative), "{h1} vs {h2}");
        }
    }

    #[test]
    fn max_rect_examples() {
        assert_eq!(lat(2, 1, 3).max_rect(), (BigInt::from(6), BigInt::from(3)));
        assert_eq!(lat(3, 0, 4).max_rect(), (BigInt::from(3), BigInt::from(4)));
        assert_eq!(lat(1, 1, 2).max_rect(), (BigInt::from(2), BigInt::from(2)));
    }

    #[test]
    fn max_rect_is_maximal_brute_force() {
        for l in [lat(2, 1, 3), lat(1, 1, 2), lat(4, 3, 6), lat(5, 2, 4)] {
            let (p, q) = l.max_rect();
            assert!(l.contains(&p, &BigInt::zero()));
            assert!(l.contains(&BigInt::zero(), &q));
            let bound = 2 * l.index().to_i64().unwrap();
            for pp in 1..=bound {
                for qq in 1..=bound {
                    let rect_inside = l.contains(&BigInt::from(pp), &BigInt::zero())
                        && l.contains(&BigInt::zero(), &BigInt::from(qq));
                    // contained rectangles are exactly the multiples of (p, q)
                    assert_eq!(
                        rect_inside,
                        BigInt::from(pp).is_multiple_of(&p) && BigInt::from(qq).is_multiple_of(&q),
                        "{l} rect {pp}x{qq}"
                    );
                }
            }
        }
    }

    #[test]
    fn family_members() {
        let fam = TwoAdicFamily::new(vec![3, 7], vec![5, 11]).unwrap();
        assert_eq!(fam.member(1), lat(3, 2, 10));
        assert_eq!(fam.member(2), lat(7, 4, 44));
        assert!(TwoAdicFamily::new(vec![3, 6], vec![5, 11]).is_err());
        assert!(TwoAdicFamily::new(vec![3, 9], vec![5, 11]).is_err());
    }

    #[test]
    fn row_zero_membership_is_product_divisibility() {
        let fam = TwoAdicFamily::new(vec![3, 7], vec![5, 11]).unwrap();
        for x in -200i64..=200 {
            let xb = BigInt::from(x);
            let in1 = fam.member(1).contains(&xb, &BigInt::zero());
            assert_eq!(in1, x.rem_euclid(15) == 0, "x = {x}");
            let in2 = fam.member(2).contains(&xb, &BigInt::zero());
            assert_eq!(in2, x.rem_euclid(77) == 0, "x = {x}");
        }
    }

    #[test]
    fn not_toeplitz_verification_small() {
        let caps = Caps::default();
        let fam = TwoAdicFamily::new(vec![3, 7], vec![5, 11]).unwrap();
        let rep = verify_not_toeplitz(&fam, 4, 1, &caps).unwrap();
        assert_eq!(rep.eta_at_one_zero, 1);
        assert_eq!(rep.run_len, 4);
        assert_eq!(rep.requested_prefix, 2);
        assert!(rep.family.len() >= 4);
        // index bound 1 is just Z^2 itself, refuted immediately
        assert_eq!(rep.period_failures.len(), 1);
    }

    #[test]
    fn extension_keeps_products_coprime() {
        let fam = TwoAdicFamily::new(vec![3, 7], vec![5, 11]).unwrap();
        let ext = fam.extended(6);
        assert_eq!(ext.len(), 6);
        ext.validate().unwrap();
        assert_eq!(&ext.a[..2], &[3, 7]);
        assert_eq!(&ext.c[..2], &[5, 11]);
    }

    #[test]
    fn scaled_copy_caps() {
        let fam = TwoAdicFamily::new(vec![3, 7, 13], vec![5, 11, 17]).unwrap();
        let rep = verify_no_scaled_copy(&fam, 4).unwrap();
        assert!(rep.confirmed);
        // (1, 1): preimages are the members themselves, never coprime
        let row = rep.rows.iter().find(|r| r.sx == 1 && r.sy == 1).unwrap();
        assert_eq!(row.reachable.len(), 3);
        assert_eq!(row.max_coprime_set, 1);
        // (1, 2): member 1's preimage becomes odd-index, so a pair is possible
        let row = rep.rows.iter().find(|r| r.sx == 1 && r.sy == 2).unwrap();
        assert_eq!(row.max_coprime_set, 2);
        // odd sy > 1 reaches nothing
        let row = rep.rows.iter().find(|r| r.sx == 1 && r.sy == 3).unwrap();
        assert!(row.reachable.is_empty());
    }
}

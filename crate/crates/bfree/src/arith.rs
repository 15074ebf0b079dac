//! Rational-integer factorization with explicit effort bounds, plus the
//! modular square roots needed for splitting primes in quadratic rings.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;

/// Effort bounds for integer factorization. Failures surface as explicit
/// errors, never as silently wrong answers.
#[derive(Debug, Clone)]
pub struct FactorBudget {
    /// Trial-divide by every prime up to this bound first.
    pub trial_bound: u64,
    /// Pollard rho iterations per split attempt after trial division.
    pub rho_iterations: u64,
}

impl Default for FactorBudget {
    fn default() -> Self {
        FactorBudget {
            trial_bound: 1_000_000,
            rho_iterations: 1 << 20,
        }
    }
}

/// Factor `n > 0` into `(prime, exponent)` pairs sorted by prime.
pub fn factor_u64_like(n: &BigInt, budget: &FactorBudget) -> Result<Vec<(BigInt, u32)>, Error> {
    assert!(n.is_positive(), "factorization requires a positive integer");
    let mut factors: Vec<(BigInt, u32)> = Vec::new();
    let mut rem = n.clone();

    let push = |p: BigInt, e: u32, factors: &mut Vec<(BigInt, u32)>| {
        if let Some(last) = factors.iter_mut().find(|(q, _)| *q == p) {
            last.1 += e;
        } else {
            factors.push((p, e));
        }
    };

    // Trial division.
    let mut d: u64 = 2;
    while d <= budget.trial_bound {
        let db = BigInt::from(d);
        if (&db * &db) > rem {
            break;
        }
        let mut e = 0u32;
        loop {
            let (q, r) = rem.div_rem(&db);
            if r.is_zero() {
                rem = q;
                e += 1;
            } else {
                break;
            }
        }
        if e > 0 {
            push(db, e, &mut factors);
        }
        d = if d == 2 { 3 } else { d + 2 };
    }
    if rem.is_one() {
        factors.sort();
        return Ok(factors);
    }
    // The remaining cofactor is free of primes <= min(trial_bound, sqrt(rem)).
    if let Some(r64) = rem.to_u64() {
        let mut stack = vec![r64];
        while let Some(m) = stack.pop() {
            if m == 1 {
                continue;
            }
            if is_prime_u64(m) {
                push(BigInt::from(m), 1, &mut factors);
                continue;
            }
            let f = pollard_rho(m, budget.rho_iterations)
                .ok_or_else(|| Error::FactorEffortExceeded { remaining: BigInt::from(m) })?;
            stack.push(f);
            stack.push(m / f);
        }
        factors.sort();
        return Ok(factors);
    }
    if is_probable_prime_big(&rem) {
        push(rem, 1, &mut factors);
        factors.sort();
        return Ok(factors);
    }
    Err(Error::FactorEffortExceeded { remaining: rem })
}

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn powmod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut r: u64 = 1 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a, m);
        }
        a = mulmod(a, a, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin for u64.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d & 1 == 0 {
        d >>= 1;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn is_probable_prime_big(n: &BigInt) -> bool {
    // Only reached for cofactors beyond u64 after trial division; use a
    // fixed-base Miller-Rabin over BigInt.
    use num_bigint::Sign;
    if n.sign() != Sign::Plus {
        return false;
    }
    let one = BigInt::one();
    let two = BigInt::from(2);
    let nm1 = n - &one;
    let mut d = nm1.clone();
    let mut s = 0u32;
    while d.is_even() {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let ab = BigInt::from(a);
        if &ab >= n {
            continue;
        }
        let mut x = ab.modpow(&d, n);
        if x.is_one() || x == nm1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == nm1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Pollard rho with Brent cycle detection; returns a nontrivial factor.
fn pollard_rho(n: u64, max_iters: u64) -> Option<u64> {
    if n % 2 == 0 {
        return Some(2);
    }
    let mut c: u64 = 1;
    loop {
        let mut x: u64 = 2;
        let mut y: u64 = 2;
        let mut d: u64 = 1;
        let mut count = 0u64;
        while d == 1 {
            if count > max_iters {
                return None;
            }
            x = (mulmod(x, x, n) + c) % n;
            y = (mulmod(y, y, n) + c) % n;
            y = (mulmod(y, y, n) + c) % n;
            d = x.abs_diff(y).gcd(&n);
            count += 1;
        }
        if d != n {
            return Some(d);
        }
        c += 1;
        if c > 64 {
            return None;
        }
    }
}

/// Square root of `a` modulo an odd prime `p`, if one exists (Tonelli-Shanks).
pub fn sqrt_mod_prime(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if p == 2 {
        return Some(a);
    }
    if a == 0 {
        return Some(0);
    }
    if powmod(a, (p - 1) / 2, p) != 1 {
        return None;
    }
    if p % 4 == 3 {
        return Some(powmod(a, (p + 1) / 4, p));
    }
    // Tonelli-Shanks for p = 1 mod 4.
    let mut q = p - 1;
    let mut s = 0u32;
    while q & 1 == 0 {
        q >>= 1;
        s += 1;
    }
    let mut z = 2u64;
    while powmod(z, (p - 1) / 2, p) != p - 1 {
        z += 1;
    }
    let mut m = s;
    let mut c = powmod(z, q, p);
    let mut t = powmod(a, q, p);
    let mut r = powmod(a, (q + 1) / 2, p);
    while t != 1 {
        let mut t2 = t;
        let mut i = 0u32;
        while t2 != 1 {
            t2 = mulmod(t2, t2, p);
            i += 1;
            if i == m {
                return None;
            }
        }
        let b = powmod(c, 1 << (m - i - 1), p);
        m = i;
        c = mulmod(b, b, p);
        t = mulmod(t, c, p);
        r = mulmod(r, b, p);
    }
    Some(r)
}

/// Primes up to `bound` (inclusive), ascending.
pub fn primes_up_to(bound: u64) -> Vec<u64> {
    if bound < 2 {
        return vec![];
    }
    let n = bound as usize;
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut p = 2usize;
    while p * p <= n {
        if sieve[p] {
            let mut q = p * p;
            while q <= n {
                sieve[q] = false;
                q += p;
            }
        }
        p += 1;
    }
    sieve
        .iter()
        .enumerate()
        .filter_map(|(i, &b)| if b { Some(i as u64) } else { None })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_small() {
        let f = factor_u64_like(&BigInt::from(5336100u64), &FactorBudget::default()).unwrap();
        assert_eq!(
            f,
            vec![
                (BigInt::from(2), 2),
                (BigInt::from(3), 2),
                (BigInt::from(5), 2),
                (BigInt::from(7), 2),
                (BigInt::from(11), 2)
            ]
        );
    }

    #[test]
    fn factor_semiprime_beyond_trial() {
        let budget = FactorBudget { trial_bound: 100, rho_iterations: 1 << 22 };
        let n = BigInt::from(1_000_003u64) * BigInt::from(998_117u64);
        let f = factor_u64_like(&n, &budget).unwrap();
        assert_eq!(f.len(), 2);
        assert_eq!(f[0].0.clone() * f[1].0.clone(), n);
    }

    #[test]
    fn primality() {
        assert!(is_prime_u64(2));
        assert!(is_prime_u64(998_117));
        assert!(!is_prime_u64(998_119)); // 7 * 142588.43 ... composite
        assert!(is_prime_u64(18_446_744_073_709_551_557));
    }

    #[test]
    fn sqrt_mod() {
        for p in [3u64, 5, 13, 17, 97, 1_000_003] {
            for a in 1..20u64 {
                let sq = mulmod(a, a, p);
                let r = sqrt_mod_prime(sq, p).unwrap();
                assert_eq!(mulmod(r, r, p), sq);
            }
        }
        assert!(sqrt_mod_prime(2, 3).is_none());
    }
}

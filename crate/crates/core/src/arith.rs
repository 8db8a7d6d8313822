//! Exact integer / rational valuation helpers and small modular kernels.
//!
//! Everything here is deliberately elementary: machine-word modular
//! arithmetic with u128 intermediates, deterministic Miller-Rabin for u64,
//! trial-division factorization with an explicit budget, and l-adic
//! valuations over `BigInt` / `BigRational`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// An additive valuation: finite, or the distinguished infinite marker
/// attached to 0 (and used for c4 = 0 / c6 = 0 in table patterns, where it
/// compares as ">= anything").
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn is_infinite(self) -> bool {
        matches!(self, Valuation::Infinite)
    }

    /// Finite value, or None for the infinite marker.
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    /// True if this valuation is `>= bound` (the infinite marker always is).
    pub fn at_least(self, bound: i64) -> bool {
        match self {
            Valuation::Finite(v) => v >= bound,
            Valuation::Infinite => true,
        }
    }

    pub fn equals(self, value: i64) -> bool {
        self == Valuation::Finite(value)
    }
}

impl std::fmt::Display for Valuation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

/// l-adic valuation of an integer; `valuation(0) = Infinite`.
pub fn valuation(x: &BigInt, ell: u64) -> Valuation {
    assert!(ell >= 2, "valuation needs a prime ell >= 2");
    if x.is_zero() {
        return Valuation::Infinite;
    }
    let ell = BigInt::from(ell);
    let mut v = 0i64;
    let mut n = x.abs();
    loop {
        let (q, r) = n.div_rem(&ell);
        if !r.is_zero() {
            return Valuation::Finite(v);
        }
        v += 1;
        n = q;
    }
}

/// l-adic valuation of a nonzero exact rational (may be negative).
pub fn valuation_rat(x: &BigRational, ell: u64) -> Valuation {
    if x.is_zero() {
        return Valuation::Infinite;
    }
    let vn = valuation(x.numer(), ell).finite().expect("nonzero numerator");
    let vd = valuation(x.denom(), ell).finite().expect("nonzero denominator");
    Valuation::Finite(vn - vd)
}

/// Unit part of a nonzero integer at `ell`: `x / ell^v(x)`.
pub fn unit_part(x: &BigInt, ell: u64) -> BigInt {
    assert!(!x.is_zero(), "unit part of 0 is undefined");
    let v = valuation(x, ell).finite().unwrap();
    x / BigInt::from(ell).pow(v as u32)
}

/// Canonical residue of `x` in `[0, m)` for a positive modulus.
pub fn mod_big(x: &BigInt, m: &BigInt) -> BigInt {
    let r = x % m;
    if r.is_negative() {
        r + m
    } else {
        r
    }
}

/// Canonical residue of a big integer modulo a machine-word modulus.
pub fn mod_u64(x: &BigInt, m: u64) -> u64 {
    use num_traits::ToPrimitive;
    mod_big(x, &BigInt::from(m)).to_u64().expect("residue fits in u64")
}

/// Modular inverse over BigInt; errors if gcd(x, m) != 1.
pub fn invmod_big(x: &BigInt, m: &BigInt) -> Result<BigInt> {
    let e = x.extended_gcd(m);
    if !e.gcd.is_one() {
        return Err(Error::InvalidInput(format!(
            "{x} is not invertible modulo {m}"
        )));
    }
    Ok(mod_big(&e.x, m))
}

// --- machine-word modular arithmetic (moduli < 2^63, via u128 products) ---

pub fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn addmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 + b as u128) % m as u128) as u64
}

pub fn submod(a: u64, b: u64, m: u64) -> u64 {
    let (a, b) = (a % m, b % m);
    if a >= b {
        a - b
    } else {
        a + (m - b)
    }
}

pub fn powmod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mulmod(acc, base, m);
        }
        base = mulmod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Inverse of `a` modulo a prime `p` (Fermat). Panics if `p | a`.
pub fn invmod_prime(a: u64, p: u64) -> u64 {
    let a = a % p;
    assert!(a != 0, "division by zero mod {p}");
    powmod(a, p - 2, p)
}

/// Signed value reduced into `[0, m)`.
pub fn imod(a: i64, m: u64) -> u64 {
    let r = a.rem_euclid(m as i64);
    r as u64
}

/// Deterministic Miller-Rabin for u64 (the standard 7-witness set).
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for q in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == q {
            return true;
        }
        if n.is_multiple_of(q) {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 325, 9375, 28178, 450775, 9780504, 1795265022] {
        let a = a % n;
        if a == 0 {
            continue;
        }
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

/// Trial-division budget for factoring group orders; beyond this we give up
/// with a resource error rather than silently mis-factor.
const TRIAL_DIVISION_LIMIT: u64 = 10_000_000;

/// Factor `n` into (prime, exponent) pairs by trial division. If a composite
/// cofactor survives the trial bound, this is an explicit resource error.
pub fn factorize(mut n: u64) -> Result<Vec<(u64, u32)>> {
    let mut out = Vec::new();
    let mut push = |p: u64, k: u32| {
        if k > 0 {
            out.push((p, k));
        }
    };
    for p in [2u64, 3, 5] {
        let mut k = 0;
        while n.is_multiple_of(p) {
            n /= p;
            k += 1;
        }
        push(p, k);
    }
    // 7, 11, 13, ... wheel over residues coprime to 30
    let mut d = 7u64;
    let increments = [4u64, 2, 4, 2, 4, 6, 2, 6];
    let mut i = 0;
    while d <= TRIAL_DIVISION_LIMIT && d * d <= n {
        let mut k = 0;
        while n.is_multiple_of(d) {
            n /= d;
            k += 1;
        }
        push(d, k);
        d += increments[i];
        i = (i + 1) % increments.len();
    }
    if n > 1 {
        if d * d > n || is_prime(n) {
            push(n, 1);
        } else {
            return Err(Error::ResourceCeiling(format!(
                "cannot factor {n} by trial division up to {TRIAL_DIVISION_LIMIT}"
            )));
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// Order of an element in a finite abelian group, given the group order and
/// a power oracle: the smallest k >= 1 with `pow(k) = identity`, found by
/// stripping primes from `group_order`.
pub fn element_order(
    group_order: u64,
    is_identity_at: impl Fn(u64) -> bool,
) -> Result<u64> {
    let mut ord = group_order;
    for (q, mult) in factorize(group_order)? {
        for _ in 0..mult {
            if ord.is_multiple_of(q) && is_identity_at(ord / q) {
                ord /= q;
            } else {
                break;
            }
        }
    }
    Ok(ord)
}

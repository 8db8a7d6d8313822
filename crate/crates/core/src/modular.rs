//! Number-theoretic kernels over F_p and F_{p^2}: Legendre symbols,
//! multiplicative orders, roots of the Frobenius characteristic polynomial
//! X^2 - aX + ell, orders of ell and -ell mod p, roots of unity, and the
//! p-th-power criterion for ell-adic rationals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::arith::{
    element_order, invmod_prime, is_prime, mod_u64, mulmod, powmod, unit_part, valuation,
    Valuation,
};
use crate::error::{Error, Result};
use crate::fields::{Fp2, Fp2Element};

/// Legendre symbol (a / ell) for an odd prime ell.
pub fn legendre(a: &BigInt, ell: u64) -> Result<i8> {
    if ell == 2 || !is_prime(ell) {
        return Err(Error::InvalidInput(format!(
            "Legendre symbol needs an odd prime modulus, got {ell}"
        )));
    }
    let r = mod_u64(a, ell);
    if r == 0 {
        return Ok(0);
    }
    if powmod(r, (ell - 1) / 2, ell) == 1 {
        Ok(1)
    } else {
        Ok(-1)
    }
}

/// Multiplicative order of x modulo a prime p.
pub fn mult_order_mod(x: u64, p: u64) -> Result<u64> {
    let x = x % p;
    if x == 0 {
        return Err(Error::InvalidInput("order of 0 is undefined".into()));
    }
    element_order(p - 1, |k| powmod(x, k, p) == 1)
}

/// Multiplicative order of an element of `F_{p^2}` (covers `F_p` too).
pub fn mult_order(field: &Fp2, x: Fp2Element) -> Result<u64> {
    field.order(x)
}

/// Roots of X^2 - aX + ell over F_p (in F_{p^2} when the discriminant is a
/// non-residue), with n = lcm of their multiplicative orders.
#[derive(Debug, Clone)]
pub struct CharPolyData {
    pub a: i64,
    pub ell: u64,
    pub p: u64,
    pub field: Fp2,
    pub alpha: Fp2Element,
    pub beta: Fp2Element,
    pub n: u64,
    pub delta_a: i64,
    pub repeated_root: bool,
}

pub fn char_poly_roots(a: i64, ell: u64, p: u64) -> Result<CharPolyData> {
    if p < 3 || !is_prime(p) {
        return Err(Error::InvalidInput(format!("p must be an odd prime, got {p}")));
    }
    if !is_prime(ell) {
        return Err(Error::InvalidInput(format!("ell must be prime, got {ell}")));
    }
    if p == ell {
        return Err(Error::InvalidInput("p must differ from ell".into()));
    }
    let field = Fp2::new(p)?;
    let delta_wide = (a as i128) * (a as i128) - 4 * (ell as i128);
    let delta_a = i64::try_from(delta_wide).map_err(|_| {
        Error::ResourceCeiling(format!("a^2 - 4*ell out of i64 range for a={a}, ell={ell}"))
    })?;
    let abar = a.rem_euclid(p as i64) as u64;
    let dbar = (delta_wide.rem_euclid(p as i128)) as u64;
    let inv2 = invmod_prime(2, p);
    let (alpha, beta, repeated_root) = if dbar == 0 {
        let root = field.elt(mulmod(abar, inv2, p), 0);
        (root, root, true)
    } else if powmod(dbar, (p - 1) / 2, p) == 1 {
        let h = field.sqrt_base(dbar).expect("residue has a square root");
        let alpha = field.elt(mulmod((abar + h) % p, inv2, p), 0);
        let beta = field.elt(mulmod((abar + p - h) % p, inv2, p), 0);
        (alpha, beta, false)
    } else {
        // disc is a non-residue: write sqrt(disc) = h*t with h^2 = disc/g
        let hh = mulmod(dbar, invmod_prime(field.g, p), p);
        let h = field.sqrt_base(hh).expect("disc/g is a residue");
        let half_a = mulmod(abar, inv2, p);
        let half_h = mulmod(h, inv2, p);
        let alpha = field.elt(half_a, half_h);
        let beta = field.elt(half_a, p - half_h);
        (alpha, beta, false)
    };
    // hard consistency checks: Vieta and the order divisibility r | n
    let ellbar = field.elt(ell % p, 0);
    if field.mul(alpha, beta) != ellbar {
        return Err(Error::Inconsistency("root product != ell mod p".into()));
    }
    if field.add(alpha, beta) != field.elt(abar, 0) {
        return Err(Error::Inconsistency("root sum != trace mod p".into()));
    }
    let n = num_integer::lcm(field.order(alpha)?, field.order(beta)?);
    let r = mult_order_mod(ell % p, p)?;
    if n % r != 0 {
        return Err(Error::Inconsistency(format!(
            "order of ell mod p ({r}) does not divide n ({n})"
        )));
    }
    Ok(CharPolyData {
        a,
        ell,
        p,
        field,
        alpha,
        beta,
        n,
        delta_a,
        repeated_root,
    })
}

/// Orders r of ell and delta of -ell in F_p^*, with their parity relation
/// checked: r odd => delta = 2r; r = 2 mod 4 => delta = r/2; 4 | r => delta = r.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CyclotomicData {
    pub ell: u64,
    pub p: u64,
    pub r: u64,
    pub delta: u64,
}

pub fn cyclotomic_orders(ell: u64, p: u64) -> Result<CyclotomicData> {
    if p < 3 || !is_prime(p) {
        return Err(Error::InvalidInput(format!("p must be an odd prime, got {p}")));
    }
    if !is_prime(ell) || ell == p {
        return Err(Error::InvalidInput(format!(
            "ell must be a prime different from p, got ell={ell}, p={p}"
        )));
    }
    let r = mult_order_mod(ell % p, p)?;
    let delta = mult_order_mod((p - ell % p) % p, p)?;
    let consistent = if r % 2 == 1 {
        delta == 2 * r
    } else if delta % 2 == 0 {
        delta == r
    } else {
        delta == r / 2
    };
    if !consistent {
        return Err(Error::Inconsistency(format!(
            "orders r={r}, delta={delta} violate the parity relation"
        )));
    }
    Ok(CyclotomicData { ell, p, r, delta })
}

/// p-th-power criterion for x in Q_ell^* given ell-adic data: valuation and
/// unit residue mod ell.
pub fn is_pth_power_local(v: i64, unit_mod_ell: u64, ell: u64, p: u64) -> Result<bool> {
    if p < 3 || !is_prime(p) || !is_prime(ell) || ell == p {
        return Err(Error::InvalidInput(format!(
            "need primes p >= 3, ell != p; got ell={ell}, p={p}"
        )));
    }
    if v.rem_euclid(p as i64) != 0 {
        return Ok(false);
    }
    if ell % p == 1 {
        let u = unit_mod_ell % ell;
        if u == 0 {
            return Err(Error::InvalidInput("unit residue must be nonzero mod ell".into()));
        }
        Ok(powmod(u, (ell - 1) / p, ell) == 1)
    } else {
        Ok(true)
    }
}

/// Valuation and unit residue mod ell of a nonzero rational.
pub fn unit_residue_rat(x: &BigRational, ell: u64) -> Result<(i64, u64)> {
    if x.is_zero() {
        return Err(Error::InvalidInput("x must be nonzero".into()));
    }
    let vn = match valuation(x.numer(), ell) {
        Valuation::Finite(v) => v,
        Valuation::Infinite => unreachable!("nonzero numerator"),
    };
    let vd = match valuation(x.denom(), ell) {
        Valuation::Finite(v) => v,
        Valuation::Infinite => unreachable!("nonzero denominator"),
    };
    let un = unit_part(x.numer(), ell);
    let ud = unit_part(x.denom(), ell);
    let unit = mulmod(
        mod_u64(&un, ell),
        invmod_prime(mod_u64(&ud, ell), ell),
        ell,
    );
    Ok((vn - vd, unit))
}

/// Is the nonzero rational x a p-th power in Q_ell?
pub fn is_pth_power_ql(x: &BigRational, ell: u64, p: u64) -> Result<bool> {
    if x.is_zero() {
        return Err(Error::InvalidInput("x must be nonzero".into()));
    }
    let (v, unit) = unit_residue_rat(x, ell)?;
    is_pth_power_local(v, unit, ell, p)
}

/// Whether x has exact multiplicative order e (e squarefree-small here: the
/// callers only use e in {3, 4, 6}).
pub fn has_order(field: &Fp2, x: Fp2Element, e: u64) -> bool {
    if field.is_zero(x) || field.pow(x, e) != field.one() {
        return false;
    }
    for q in [2u64, 3] {
        if e.is_multiple_of(q) && field.pow(x, e / q) == field.one() {
            return false;
        }
    }
    true
}

/// A primitive e-th root of unity in F_{p^2}, e in {3, 4, 6}. Since exactly
/// two primitive e-th roots exist for these e, an unordered pair {x, y} equals
/// the set of all primitive e-th roots iff x != y and both have order e.
pub fn primitive_root_of_unity(field: &Fp2, e: u64) -> Result<Fp2Element> {
    if !matches!(e, 3 | 4 | 6) {
        return Err(Error::InvalidInput(format!("e must be 3, 4 or 6, got {e}")));
    }
    if e.is_multiple_of(field.p) {
        return Err(Error::InvalidInput(format!(
            "no primitive {e}-th root of unity in characteristic {}",
            field.p
        )));
    }
    // deterministic scan: base field first, then x1 > 0
    for x1 in 0..field.p {
        for x0 in 0..field.p {
            let x = field.elt(x0, x1);
            if has_order(field, x, e) {
                return Ok(x);
            }
        }
    }
    Err(Error::Inconsistency(format!(
        "no element of order {e} in F_{{{}^2}}",
        field.p
    )))
}

/// Set equality {x, y} = {all primitive e-th roots of unity}, e in {3, 4, 6}.
pub fn pair_is_all_primitive_roots(field: &Fp2, x: Fp2Element, y: Fp2Element, e: u64) -> bool {
    x != y && has_order(field, x, e) && has_order(field, y, e)
}

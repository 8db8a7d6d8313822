//! Finite-field arithmetic: the quadratic extension `F_{p^2}` used for
//! characteristic-polynomial roots, and generic extensions `F_{ell^n}`
//! represented as `F_ell[t]/(f)` for point counting and torsion tests.
//!
//! Machine words throughout (moduli below 2^63); products go through u128.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::arith::{addmod, element_order, factorize, invmod_prime, is_prime, mulmod, powmod, submod};
use crate::error::{Error, Result};

/// The field `F_{p^2} = F_p[t]/(t^2 - g)`, `g` the smallest quadratic
/// non-residue mod p. Elements are coefficient pairs `x0 + x1*t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fp2 {
    pub p: u64,
    pub g: u64,
}

/// Element of `F_{p^2}` relative to an [`Fp2`] context.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fp2Element {
    pub x0: u64,
    pub x1: u64,
}

impl std::fmt::Display for Fp2Element {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.x1 == 0 {
            write!(f, "{}", self.x0)
        } else {
            write!(f, "{} + {}*t", self.x0, self.x1)
        }
    }
}

impl Fp2 {
    /// Build the context for an odd prime p.
    pub fn new(p: u64) -> Result<Self> {
        if !is_prime(p) || p == 2 {
            return Err(Error::InvalidInput(format!(
                "F_p^2 context needs an odd prime, got {p}"
            )));
        }
        if p >= 1 << 63 {
            return Err(Error::ResourceCeiling(format!(
                "prime {p} exceeds the machine-word ceiling 2^63 - 1"
            )));
        }
        let g = (2..p)
            .find(|&c| powmod(c, (p - 1) / 2, p) == p - 1)
            .expect("every odd prime has a quadratic non-residue");
        Ok(Fp2 { p, g })
    }

    pub fn elt(&self, x0: u64, x1: u64) -> Fp2Element {
        Fp2Element { x0: x0 % self.p, x1: x1 % self.p }
    }

    pub fn from_int(&self, x: i64) -> Fp2Element {
        Fp2Element { x0: x.rem_euclid(self.p as i64) as u64, x1: 0 }
    }

    pub fn zero(&self) -> Fp2Element {
        Fp2Element { x0: 0, x1: 0 }
    }

    pub fn one(&self) -> Fp2Element {
        Fp2Element { x0: 1, x1: 0 }
    }

    pub fn minus_one(&self) -> Fp2Element {
        Fp2Element { x0: self.p - 1, x1: 0 }
    }

    pub fn add(&self, a: Fp2Element, b: Fp2Element) -> Fp2Element {
        Fp2Element {
            x0: addmod(a.x0, b.x0, self.p),
            x1: addmod(a.x1, b.x1, self.p),
        }
    }

    pub fn neg(&self, a: Fp2Element) -> Fp2Element {
        Fp2Element {
            x0: if a.x0 == 0 { 0 } else { self.p - a.x0 },
            x1: if a.x1 == 0 { 0 } else { self.p - a.x1 },
        }
    }

    pub fn mul(&self, a: Fp2Element, b: Fp2Element) -> Fp2Element {
        // (a0 + a1 t)(b0 + b1 t) = a0b0 + g a1b1 + (a0b1 + a1b0) t
        let p = self.p;
        Fp2Element {
            x0: addmod(mulmod(a.x0, b.x0, p), mulmod(self.g, mulmod(a.x1, b.x1, p), p), p),
            x1: addmod(mulmod(a.x0, b.x1, p), mulmod(a.x1, b.x0, p), p),
        }
    }

    pub fn pow(&self, a: Fp2Element, mut e: u64) -> Fp2Element {
        let mut base = a;
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: Fp2Element) -> Result<Fp2Element> {
        // norm = a0^2 - g a1^2 lies in F_p*
        let p = self.p;
        let norm = submod(
            mulmod(a.x0, a.x0, p),
            mulmod(self.g, mulmod(a.x1, a.x1, p), p),
            p,
        );
        if norm == 0 {
            return Err(Error::InvalidInput("inverse of 0 in F_p^2".into()));
        }
        let ni = invmod_prime(norm, p);
        Ok(Fp2Element {
            x0: mulmod(a.x0, ni, p),
            x1: mulmod(if a.x1 == 0 { 0 } else { p - a.x1 }, ni, p),
        })
    }

    pub fn is_zero(&self, a: Fp2Element) -> bool {
        a.x0 == 0 && a.x1 == 0
    }

    /// Multiplicative order of a nonzero element; descends from `p^2 - 1`
    /// (or `p - 1` for base-field elements, same answer, cheaper factoring).
    pub fn order(&self, a: Fp2Element) -> Result<u64> {
        if self.is_zero(a) {
            return Err(Error::InvalidInput("order of 0 is undefined".into()));
        }
        let group = if a.x1 == 0 {
            self.p - 1
        } else {
            // p^2 - 1 never overflows because p < 2^32 is enforced by callers
            // needing quadratic-extension orders at desk scale; guard anyway.
            self.p
                .checked_mul(self.p)
                .and_then(|s| s.checked_sub(1))
                .ok_or_else(|| {
                    Error::ResourceCeiling(format!(
                        "p^2 - 1 overflows u64 for p = {}; order in F_p^2 unavailable",
                        self.p
                    ))
                })?
        };
        element_order(group, |k| self.pow(a, k) == self.one())
    }

    /// Square root in F_p (not the extension), if one exists.
    pub fn sqrt_base(&self, a: u64) -> Option<u64> {
        let p = self.p;
        let a = a % p;
        if a == 0 {
            return Some(0);
        }
        if powmod(a, (p - 1) / 2, p) != 1 {
            return None;
        }
        Some(tonelli_shanks_prime(a, p))
    }
}

/// Square root of a quadratic residue modulo an odd prime.
fn tonelli_shanks_prime(a: u64, p: u64) -> u64 {
    if p % 4 == 3 {
        return powmod(a, (p + 1) / 4, p);
    }
    // write p - 1 = 2^s * m with m odd
    let mut m = p - 1;
    let mut s = 0u32;
    while m.is_multiple_of(2) {
        m /= 2;
        s += 1;
    }
    let z = (2..p)
        .find(|&c| powmod(c, (p - 1) / 2, p) == p - 1)
        .expect("non-residue exists");
    let mut c = powmod(z, m, p);
    let mut t = powmod(a, m, p);
    let mut r = powmod(a, m.div_ceil(2), p);
    let mut s_cur = s;
    while t != 1 {
        let mut i = 0u32;
        let mut t2 = t;
        while t2 != 1 {
            t2 = mulmod(t2, t2, p);
            i += 1;
        }
        let b = powmod(c, 1u64 << (s_cur - i - 1), p);
        r = mulmod(r, b, p);
        c = mulmod(b, b, p);
        t = mulmod(t, c, p);
        s_cur = i;
    }
    r
}

/// `F_{ell^n}` as `F_ell[t]/(f)` with `f` monic irreducible of degree n,
/// found by a deterministic scan. Elements are little-endian coefficient
/// vectors of length n.
#[derive(Debug, Clone)]
pub struct ExtField {
    pub ell: u64,
    pub n: usize,
    /// Monic modulus; length n + 1, leading coefficient 1.
    pub modulus: Vec<u64>,
}

pub type ExtElt = Vec<u64>;

impl ExtField {
    pub fn new(ell: u64, n: usize) -> Result<Self> {
        if !is_prime(ell) {
            return Err(Error::InvalidInput(format!("{ell} is not prime")));
        }
        if n == 0 {
            return Err(Error::InvalidInput("extension degree must be >= 1".into()));
        }
        if n == 1 {
            return Ok(ExtField { ell, n: 1, modulus: vec![0, 1] });
        }
        // Deterministic scan over monic polynomials t^n + c_{n-1} t^{n-1} + ... + c_0,
        // lexicographic in (c_0, c_1, ...). Expected ~n candidates before a hit.
        let mut coeffs = vec![0u64; n];
        loop {
            coeffs[0] %= ell;
            let mut f = coeffs.clone();
            f.push(1);
            if poly_is_irreducible(&f, ell)? {
                return Ok(ExtField { ell, n, modulus: f });
            }
            // increment the coefficient vector like an odometer
            let mut i = 0;
            loop {
                if i == n {
                    return Err(Error::Inconsistency(format!(
                        "no irreducible polynomial of degree {n} over F_{ell} found"
                    )));
                }
                coeffs[i] += 1;
                if coeffs[i] < ell {
                    break;
                }
                coeffs[i] = 0;
                i += 1;
            }
        }
    }

    pub fn order(&self) -> BigUint {
        BigUint::from(self.ell).pow(self.n as u32)
    }

    pub fn zero(&self) -> ExtElt {
        vec![0; self.n]
    }

    pub fn one(&self) -> ExtElt {
        let mut e = vec![0; self.n];
        e[0] = 1;
        e
    }

    pub fn from_u64(&self, x: u64) -> ExtElt {
        let mut e = vec![0; self.n];
        e[0] = x % self.ell;
        e
    }

    pub fn from_i64(&self, x: i64) -> ExtElt {
        self.from_u64(x.rem_euclid(self.ell as i64) as u64)
    }

    pub fn is_zero(&self, a: &ExtElt) -> bool {
        a.iter().all(|&c| c == 0)
    }

    pub fn add(&self, a: &ExtElt, b: &ExtElt) -> ExtElt {
        a.iter().zip(b).map(|(&x, &y)| addmod(x, y, self.ell)).collect()
    }

    pub fn sub(&self, a: &ExtElt, b: &ExtElt) -> ExtElt {
        a.iter().zip(b).map(|(&x, &y)| submod(x, y, self.ell)).collect()
    }

    pub fn neg(&self, a: &ExtElt) -> ExtElt {
        a.iter().map(|&x| if x == 0 { 0 } else { self.ell - x }).collect()
    }

    pub fn scale(&self, a: &ExtElt, c: u64) -> ExtElt {
        a.iter().map(|&x| mulmod(x, c, self.ell)).collect()
    }

    pub fn mul(&self, a: &ExtElt, b: &ExtElt) -> ExtElt {
        let n = self.n;
        let ell = self.ell;
        let mut prod = vec![0u64; 2 * n - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                if y != 0 {
                    prod[i + j] = addmod(prod[i + j], mulmod(x, y, ell), ell);
                }
            }
        }
        self.reduce(prod)
    }

    /// Reduce a raw product (degree < 2n-1) modulo the field polynomial.
    fn reduce(&self, mut prod: Vec<u64>) -> ExtElt {
        let n = self.n;
        let ell = self.ell;
        for i in (n..prod.len()).rev() {
            let c = prod[i];
            if c != 0 {
                prod[i] = 0;
                // t^i = t^{i-n} * (t^n) = -t^{i-n} * (modulus minus leading term)
                for j in 0..n {
                    let m = self.modulus[j];
                    if m != 0 {
                        prod[i - n + j] = submod(prod[i - n + j], mulmod(c, m, ell), ell);
                    }
                }
            }
        }
        prod.truncate(n);
        prod
    }

    pub fn pow(&self, a: &ExtElt, e: &BigUint) -> ExtElt {
        let mut acc = self.one();
        let mut base = a.clone();
        for i in 0..e.bits() {
            if e.bit(i) {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
        }
        acc
    }

    pub fn pow_u64(&self, a: &ExtElt, e: u64) -> ExtElt {
        self.pow(a, &BigUint::from(e))
    }

    /// Inverse by extended Euclid in F_ell[t].
    pub fn inv(&self, a: &ExtElt) -> Result<ExtElt> {
        if self.is_zero(a) {
            return Err(Error::InvalidInput("inverse of 0 in extension field".into()));
        }
        let (g, s) = poly_ext_gcd(&self.modulus, a, self.ell);
        if poly_degree(&g) != Some(0) {
            return Err(Error::Inconsistency(
                "field modulus shares a factor with a nonzero element".into(),
            ));
        }
        let ginv = invmod_prime(g[0], self.ell);
        let mut out = self.reduce(poly_scale(&s, ginv, self.ell));
        out.resize(self.n, 0);
        Ok(out)
    }

    pub fn eq(&self, a: &ExtElt, b: &ExtElt) -> bool {
        a == b
    }

    /// Is `a` a square? (Odd characteristic only.)
    pub fn is_square(&self, a: &ExtElt) -> bool {
        assert!(self.ell != 2, "use the Artin-Schreier solver in characteristic 2");
        if self.is_zero(a) {
            return true;
        }
        let e = (self.order() - BigUint::one()) / BigUint::from(2u32);
        self.pow(a, &e) == self.one()
    }

    /// Square root in odd characteristic (Tonelli-Shanks over F_q).
    pub fn sqrt(&self, a: &ExtElt) -> Option<ExtElt> {
        assert!(self.ell != 2);
        if self.is_zero(a) {
            return Some(self.zero());
        }
        if !self.is_square(a) {
            return None;
        }
        let one = BigUint::one();
        let q = self.order();
        let mut m = &q - &one;
        let mut s = 0u32;
        while (&m % 2u32).is_zero() {
            m /= 2u32;
            s += 1;
        }
        // find a non-square deterministically
        let z = self
            .enumerate()
            .find(|c| !self.is_zero(c) && !self.is_square(c))
            .expect("non-square exists in F_q, q odd");
        let mut c = self.pow(&z, &m);
        let mut t = self.pow(a, &m);
        let mut r = self.pow(a, &((&m + &one) / BigUint::from(2u32)));
        let mut s_cur = s;
        while t != self.one() {
            let mut i = 0u32;
            let mut t2 = t.clone();
            while t2 != self.one() {
                t2 = self.mul(&t2, &t2);
                i += 1;
            }
            let mut b = c.clone();
            for _ in 0..(s_cur - i - 1) {
                b = self.mul(&b, &b);
            }
            r = self.mul(&r, &b);
            c = self.mul(&b, &b);
            t = self.mul(&t, &c);
            s_cur = i;
        }
        Some(r)
    }

    /// Solve `z^2 + z = c` in characteristic 2 by F_2-linear algebra over the
    /// polynomial basis. Returns one solution (the other is z + 1).
    pub fn solve_artin_schreier(&self, c: &ExtElt) -> Option<ExtElt> {
        assert_eq!(self.ell, 2);
        let n = self.n;
        // columns of the matrix of z -> z^2 + z on basis vectors t^j
        let mut cols: Vec<Vec<u64>> = Vec::with_capacity(n);
        for j in 0..n {
            let mut e = self.zero();
            e[j] = 1;
            let img = self.add(&self.mul(&e, &e), &e);
            cols.push(img);
        }
        // Gaussian elimination on the n x (n+1) system [M | c] over F_2
        let mut aug: Vec<Vec<u64>> = (0..n)
            .map(|row| {
                let mut r: Vec<u64> = (0..n).map(|col| cols[col][row]).collect();
                r.push(c[row]);
                r
            })
            .collect();
        let mut pivot_of_col = vec![None; n];
        let mut rank_row = 0usize;
        for col in 0..n {
            if let Some(pr) = (rank_row..n).find(|&r| aug[r][col] == 1) {
                aug.swap(rank_row, pr);
                let pivot_row = aug[rank_row].clone();
                for (r, row) in aug.iter_mut().enumerate() {
                    if r != rank_row && row[col] == 1 {
                        for (dst, src) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                            *dst ^= *src;
                        }
                    }
                }
                pivot_of_col[col] = Some(rank_row);
                rank_row += 1;
            }
        }
        // inconsistent rows mean no solution (trace obstruction)
        if aug[rank_row..n].iter().any(|row| row[n] == 1) {
            return None;
        }
        let mut z = self.zero();
        for col in 0..n {
            if let Some(r) = pivot_of_col[col] {
                z[col] = aug[r][n];
            }
        }
        Some(z)
    }

    /// Iterate all field elements (coefficient vectors in lexicographic
    /// order). Intended for ceilinged exhaustive work only.
    pub fn enumerate(&self) -> impl Iterator<Item = ExtElt> + '_ {
        let n = self.n;
        let ell = self.ell;
        let total = ell.checked_pow(n as u32).expect("enumeration domain fits in u64");
        (0..total).map(move |mut idx| {
            let mut e = vec![0u64; n];
            for c in e.iter_mut() {
                *c = idx % ell;
                idx /= ell;
            }
            e
        })
    }
}

fn poly_degree(a: &[u64]) -> Option<usize> {
    a.iter().rposition(|&c| c != 0)
}

fn poly_scale(a: &[u64], c: u64, ell: u64) -> Vec<u64> {
    a.iter().map(|&x| mulmod(x, c, ell)).collect()
}

fn poly_mul(a: &[u64], b: &[u64], ell: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = addmod(out[i + j], mulmod(x, y, ell), ell);
        }
    }
    out
}

fn poly_rem(a: &[u64], m: &[u64], ell: u64) -> Vec<u64> {
    let md = poly_degree(m).expect("division by zero polynomial");
    let lead_inv = invmod_prime(m[md], ell);
    let mut r = a.to_vec();
    while let Some(rd) = poly_degree(&r) {
        if rd < md {
            break;
        }
        let coef = mulmod(r[rd], lead_inv, ell);
        for (ri, &mi) in r[rd - md..=rd].iter_mut().zip(m.iter()) {
            *ri = submod(*ri, mulmod(coef, mi, ell), ell);
        }
    }
    r.truncate(md);
    r.resize(md.max(1), 0);
    r
}

/// Extended gcd: returns (g, s) with g = gcd(a, b) and s*b = g mod a.
fn poly_ext_gcd(a: &[u64], b: &[u64], ell: u64) -> (Vec<u64>, Vec<u64>) {
    let mut r0 = a.to_vec();
    let mut r1 = b.to_vec();
    let mut s0 = vec![0u64];
    let mut s1 = vec![1u64];
    while poly_degree(&r1).is_some() {
        let (q, rem) = poly_divmod(&r0, &r1, ell);
        let qs1 = poly_mul(&q, &s1, ell);
        let next_s = poly_sub(&s0, &qs1, ell);
        r0 = r1;
        r1 = rem;
        s0 = s1;
        s1 = next_s;
    }
    (r0, s0)
}

fn poly_sub(a: &[u64], b: &[u64], ell: u64) -> Vec<u64> {
    let len = a.len().max(b.len());
    (0..len)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            submod(x, y, ell)
        })
        .collect()
}

fn poly_divmod(a: &[u64], b: &[u64], ell: u64) -> (Vec<u64>, Vec<u64>) {
    let bd = poly_degree(b).expect("division by zero polynomial");
    let lead_inv = invmod_prime(b[bd], ell);
    let mut r = a.to_vec();
    let ad = match poly_degree(&r) {
        Some(d) if d >= bd => d,
        _ => return (vec![0], r),
    };
    let mut q = vec![0u64; ad - bd + 1];
    while let Some(rd) = poly_degree(&r) {
        if rd < bd {
            break;
        }
        let coef = mulmod(r[rd], lead_inv, ell);
        q[rd - bd] = coef;
        for (ri, &bi) in r[rd - bd..=rd].iter_mut().zip(b.iter()) {
            *ri = submod(*ri, mulmod(coef, bi, ell), ell);
        }
    }
    (q, r)
}

/// Irreducibility over F_ell: f (monic, degree n) is irreducible iff
/// `t^(ell^n) = t  (mod f)` and `gcd(t^(ell^(n/q)) - t, f) = 1` for every
/// prime q dividing n.
fn poly_is_irreducible(f: &[u64], ell: u64) -> Result<bool> {
    let n = poly_degree(f).expect("nonzero polynomial");
    if n == 0 {
        return Ok(false);
    }
    if f[0] == 0 {
        return Ok(false); // divisible by t
    }
    let t_poly = {
        let mut t = vec![0u64; 2];
        t[1] = 1;
        t
    };
    // x -> x^ell by square-and-multiply mod f
    let frob = |x: &[u64]| -> Vec<u64> {
        let mut acc = vec![1u64];
        let mut base = x.to_vec();
        let mut e = ell;
        while e > 0 {
            if e & 1 == 1 {
                acc = poly_rem(&poly_mul(&acc, &base, ell), f, ell);
            }
            base = poly_rem(&poly_mul(&base, &base, ell), f, ell);
            e >>= 1;
        }
        acc
    };
    // t^(ell^k) for k = 1..n by iterating the Frobenius
    let mut powers = Vec::with_capacity(n);
    let mut cur = poly_rem(&t_poly, f, ell);
    for _ in 0..n {
        cur = frob(&cur);
        powers.push(cur.clone());
    }
    let tn = &powers[n - 1];
    let t_red = poly_rem(&t_poly, f, ell);
    if poly_degree(&poly_sub(tn, &t_red, ell)).is_some() {
        return Ok(false);
    }
    for (q, _) in factorize(n as u64)? {
        let k = n / q as usize;
        let diff = poly_sub(&powers[k - 1], &t_red, ell);
        let (g, _) = poly_ext_gcd(f, &diff, ell);
        if poly_degree(&g) != Some(0) {
            return Ok(false);
        }
    }
    Ok(true)
}

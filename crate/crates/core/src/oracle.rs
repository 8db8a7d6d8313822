//! Independent brute-force recomputation of quantities the rest of the
//! library derives by formula: orders of 2x2 matrices over F_p, exhaustive
//! p-th-power tests, abelian-group structure of a curve over a small finite
//! field, and an aggregate invariant audit of computed-degree results.
//!
//! These routines deliberately trade speed for obviousness so they can serve
//! as oracles in the acceptance suite and behind the CLI `--verify` flag.

use num_integer::Integer;
use num_traits::Zero;

use crate::arith::{factorize, imod, is_prime, mulmod, powmod, submod};
use crate::engine::DegreeResult;
use crate::error::{Error, Result};
use crate::frobenius::{ExtCurve, ExtPoint};
use crate::reduction::ReductionKind;

/// A 2x2 matrix over F_p, used as an element of GL_2(F_p).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatrixModP {
    pub p: u64,
    /// Row-major residues mod p.
    pub entries: [[u64; 2]; 2],
}

impl MatrixModP {
    pub fn new(p: u64, entries: [[i64; 2]; 2]) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::invalid_input(format!("{p} is not prime")));
        }
        let reduce = |row: [i64; 2]| [imod(row[0], p), imod(row[1], p)];
        Ok(MatrixModP {
            p,
            entries: [reduce(entries[0]), reduce(entries[1])],
        })
    }

    pub fn identity(p: u64) -> Result<Self> {
        MatrixModP::new(p, [[1, 0], [0, 1]])
    }

    pub fn det(&self) -> u64 {
        let [[a, b], [c, d]] = self.entries;
        submod(mulmod(a, d, self.p), mulmod(b, c, self.p), self.p)
    }

    pub fn mul(&self, other: &MatrixModP) -> MatrixModP {
        let p = self.p;
        debug_assert_eq!(p, other.p);
        let x = self.entries;
        let y = other.entries;
        let cell = |i: usize, j: usize| {
            (mulmod(x[i][0], y[0][j], p) + mulmod(x[i][1], y[1][j], p)) % p
        };
        MatrixModP {
            p,
            entries: [[cell(0, 0), cell(0, 1)], [cell(1, 0), cell(1, 1)]],
        }
    }

    pub fn is_identity(&self) -> bool {
        self.entries == [[1, 0], [0, 1]]
    }
}

/// Smallest k >= 1 with m^k = identity, by iterated multiplication. The
/// element order divides |GL_2(F_p)| = p(p-1)^2(p+1), which bounds the loop.
pub fn matrix_order(m: &MatrixModP) -> Result<u64> {
    if m.det() == 0 {
        return Err(Error::invalid_input(
            "matrix is singular mod p and has no multiplicative order",
        ));
    }
    let p = m.p as u128;
    let bound = p * (p - 1) * (p - 1) * (p + 1);
    let mut acc = *m;
    let mut k: u128 = 1;
    while !acc.is_identity() {
        acc = acc.mul(m);
        k += 1;
        if k > bound {
            return Err(Error::inconsistency(
                "matrix order exceeded the group order bound",
            ));
        }
    }
    u64::try_from(k).map_err(|_| Error::resource_ceiling("matrix order exceeds u64 range"))
}

/// Order in GL_2(F_p) of the companion matrix of X^2 - aX + ell. Equals n
/// when the roots are distinct and n*p when the root is repeated (the
/// companion matrix of a square is a nontrivial Jordan block, never scalar).
pub fn companion_frobenius_order(a: i64, ell: u64, p: u64) -> Result<u64> {
    if p < 3 || !is_prime(p) {
        return Err(Error::invalid_input(format!("p must be an odd prime, got {p}")));
    }
    if !is_prime(ell) {
        return Err(Error::invalid_input(format!("ell must be prime, got {ell}")));
    }
    if p == ell {
        return Err(Error::invalid_input("p must differ from ell"));
    }
    let companion = MatrixModP::new(p, [[0, -(ell as i64)], [1, a]])?;
    matrix_order(&companion)
}

/// True iff some x mod ell satisfies x^p = u (mod ell), by exhaustive search.
pub fn exhaustive_pth_power(u: u64, ell: u64, p: u64) -> Result<bool> {
    if !is_prime(ell) {
        return Err(Error::invalid_input(format!("ell must be prime, got {ell}")));
    }
    if !is_prime(p) {
        return Err(Error::invalid_input(format!("p must be prime, got {p}")));
    }
    let target = u % ell;
    if target == 0 {
        return Err(Error::invalid_input("u must be a unit mod ell"));
    }
    Ok((1..ell).any(|x| powmod(x, p, ell) == target))
}

/// Group structure (m, k) with E(F_q) isomorphic to Z/m x Z/mk, by full
/// enumeration and order statistics. The p-torsion is fully rational exactly
/// when p | m.
pub fn exhaustive_group_structure(curve: &ExtCurve<'_>) -> Result<(u64, u64)> {
    let points = curve.enumerate_points()?;
    let total = points.len() as u64;
    let exponent = group_exponent(curve, &points, total)?;
    if !total.is_multiple_of(exponent) {
        return Err(Error::inconsistency(format!(
            "group exponent {exponent} does not divide the order {total}"
        )));
    }
    let m = total / exponent;
    if exponent % m != 0 {
        return Err(Error::inconsistency(format!(
            "order statistics are not of rank-2 shape: |G| = {total}, exponent = {exponent}"
        )));
    }
    // a rank-2 abelian group of this shape embeds its m-torsion in the
    // roots of unity of the field, so m must divide q - 1
    let q_minus_1 = curve.field.order() - 1u32;
    if !(q_minus_1 % m).is_zero() {
        return Err(Error::inconsistency(format!(
            "invariant factor {m} does not divide q - 1"
        )));
    }
    Ok((m, exponent / m))
}

/// Least common multiple of the orders of all points.
fn group_exponent(curve: &ExtCurve<'_>, points: &[ExtPoint], total: u64) -> Result<u64> {
    let factors = factorize(total)?;
    let mut exponent = 1u64;
    for point in points {
        let ord = point_order(curve, point, total, &factors);
        exponent = exponent.lcm(&ord);
        if exponent == total {
            break;
        }
    }
    Ok(exponent)
}

/// Order of a single point, by stripping prime factors from the group order.
fn point_order(
    curve: &ExtCurve<'_>,
    point: &ExtPoint,
    total: u64,
    factors: &[(u64, u32)],
) -> u64 {
    let mut ord = total;
    for &(q, _) in factors {
        while ord.is_multiple_of(q) && curve.mul_u64(ord / q, point).is_infinity() {
            ord /= q;
        }
    }
    debug_assert!(curve.mul_u64(ord, point).is_infinity());
    ord
}

/// Audit a computed-degree result against the invariants every valid output
/// must satisfy. Returns human-readable descriptions of the violations;
/// empty means the result is internally coherent.
pub fn check_consistency(result: &DegreeResult) -> Vec<String> {
    let mut violations = Vec::new();
    let d = result.d;
    let im = &result.intermediates;
    if d == 0 {
        violations.push("degree d must be positive".to_string());
        return violations;
    }
    if !d.is_multiple_of(im.r) {
        violations.push(format!(
            "r = {} (degree of the p-th cyclotomic subfield) does not divide d = {d}",
            im.r
        ));
    }
    if let Some(e) = result.reduction.e {
        if !d.is_multiple_of(e) {
            violations.push(format!("semistability defect e = {e} does not divide d = {d}"));
        }
    }
    let p = result.p as u128;
    let group_order = p * (p - 1) * (p - 1) * (p + 1);
    if !group_order.is_multiple_of(d as u128) {
        violations.push(format!(
            "d = {d} does not divide |GL_2(F_p)| = {group_order}"
        ));
    }
    if im.a == Some(0) {
        if let Some(n) = im.n {
            if n != 2 * im.delta {
                violations.push(format!(
                    "trace 0 forces n = 2*delta, but n = {n} and delta = {}",
                    im.delta
                ));
            }
        }
    }
    if result.reduction.kind == ReductionKind::AdditivePotentiallyMultiplicative && !d.is_multiple_of(2) {
        violations.push(format!(
            "potentially multiplicative reduction forces an even degree, got {d}"
        ));
    }
    let family = result.branch.split('.').next().unwrap_or("");
    let family_ok = match result.reduction.kind {
        ReductionKind::Good => family == "T1",
        ReductionKind::Multiplicative => family == "T2",
        ReductionKind::AdditivePotentiallyMultiplicative => family == "T3",
        ReductionKind::AdditivePotentiallyGood => matches!(
            family,
            "T4" | "T5" | "T6" | "T7" | "T8" | "T9" | "T10" | "T11" | "T12"
        ),
    };
    if !family_ok {
        violations.push(format!(
            "branch label {} does not match reduction kind {}",
            result.branch, result.reduction.kind
        ));
    }
    violations
}

//! Top-level computation of d = [Q_ell(E_p) : Q_ell], the degree of the field
//! cut out by the p-torsion of an elliptic curve over Q_ell, by case analysis
//! on the reduction type, together with the exponent of the discriminant
//! ideal of that extension.
//!
//! Each case records a branch label (`"T1.1"`, `"T10.2"`, ...) naming the
//! rule that produced d, plus the intermediate quantities it consulted, so
//! results can be audited and cross-checked by the oracle suite.

use crate::arith::{is_prime, Valuation};
use crate::curve::{CurveModel, LocalMinimalData};
use crate::error::{Error, Result};
use crate::fields::Fp2Element;
use crate::frobenius::{
    b_index_divisible, count_points, frobenius_of_good_reduction, good_twist_at_small_ell,
    residual_rescaled_curve, FrobeniusData,
};
use crate::modular::{
    char_poly_roots, cyclotomic_orders, is_pth_power_ql, pair_is_all_primitive_roots,
    CharPolyData, CyclotomicData,
};
use crate::reduction::{classify_reduction, DefectTable, ReductionInfo, ReductionKind};
use crate::tate::KodairaType;

/// Knobs for [`compute_degree`].
#[derive(Debug, Clone, Copy, Default)]
pub struct ComputeOptions<'t> {
    /// Seed for the randomized endomorphism-index test; a fixed seed makes
    /// runs reproducible bit for bit.
    pub seed: u64,
    /// Semistability defect supplied by the caller, bypassing both the
    /// closed-form rule and the table lookup. Range-checked against the
    /// defects possible at the given ell.
    pub defect_override: Option<u64>,
    /// Replacement for the bundled defect table.
    pub defect_table: Option<&'t DefectTable>,
    /// Trust the input model to be ell-minimal instead of minimalizing it.
    /// Skips the fiber-type computation, so `kodaira` and
    /// `conductor_exponent` are absent from the result.
    pub assume_minimal: bool,
}

/// Quantities consulted on the way to d. Which fields are populated depends
/// on the branch taken; `r` and `delta` (the orders of ell and -ell modulo p)
/// are always present.
#[derive(Debug, Clone)]
pub struct Intermediates {
    /// Trace of Frobenius of the auxiliary good curve the branch consulted:
    /// the curve itself under good reduction, its good quadratic twist in the
    /// defect-2 cases, or the rescaled residual curve in the defect-3/4/6
    /// cases at ell >= 5.
    pub a: Option<i64>,
    /// Least common multiple of the orders of alpha and beta.
    pub n: Option<u64>,
    /// Roots of X^2 - aX + ell in F_{p^2}.
    pub alpha: Option<Fp2Element>,
    pub beta: Option<Fp2Element>,
    /// Multiplicative order of ell mod p.
    pub r: u64,
    /// Multiplicative order of -ell mod p.
    pub delta: u64,
    /// v(j), consulted by the (potentially) multiplicative branches.
    pub vj: Option<Valuation>,
    /// Whether j is a p-th power in Q_ell^*.
    pub pth_power_j: Option<bool>,
    /// Whether p divides the endomorphism-ring index of the reduced curve.
    pub b_divisible: Option<bool>,
    /// Twist parameter used to reach good reduction in the defect-2 cases.
    pub twist_u: Option<i64>,
}

impl Intermediates {
    fn new(r: u64, delta: u64) -> Self {
        Intermediates {
            a: None,
            n: None,
            alpha: None,
            beta: None,
            r,
            delta,
            vj: None,
            pth_power_j: None,
            b_divisible: None,
            twist_u: None,
        }
    }

    fn record_roots(&mut self, a: i64, cp: &CharPolyData) {
        self.a = Some(a);
        self.n = Some(cp.n);
        self.alpha = Some(cp.alpha);
        self.beta = Some(cp.beta);
    }
}

/// Outcome of [`compute_degree`].
#[derive(Debug, Clone)]
pub struct DegreeResult {
    pub ell: u64,
    pub p: u64,
    /// Degree of Q_ell(E_p) over Q_ell.
    pub d: u64,
    /// Label of the case that produced d.
    pub branch: &'static str,
    pub reduction: ReductionInfo,
    /// The ell-minimal model the computation ran on.
    pub minimal_model: CurveModel,
    /// Fiber type at ell; absent when minimality was assumed.
    pub kodaira: Option<KodairaType>,
    pub conductor_exponent: Option<u32>,
    /// k such that the input invariants are the minimal ones times
    /// ell^(4k, 6k, 12k).
    pub scale_exponent: u32,
    pub intermediates: Intermediates,
}

/// True when n is even and alpha^(n/2) = beta^(n/2) = -1.
fn halves_are_minus_one(cp: &CharPolyData) -> bool {
    if !cp.n.is_multiple_of(2) {
        return false;
    }
    let f = &cp.field;
    let m = f.minus_one();
    f.pow(cp.alpha, cp.n / 2) == m && f.pow(cp.beta, cp.n / 2) == m
}

/// Good reduction: d from the order of the Frobenius matrix on E[p], with
/// the endomorphism-index test deciding scalar vs non-semisimple action when
/// the eigenvalue is repeated.
fn good_route(
    data: &LocalMinimalData,
    p: u64,
    seed: u64,
    delta: u64,
    im: &mut Intermediates,
) -> Result<(u128, &'static str)> {
    let fd = frobenius_of_good_reduction(data)?;
    let cp = char_poly_roots(fd.a, data.ell, p)?;
    im.record_roots(fd.a, &cp);
    if !cp.repeated_root {
        // supersingular-trace coherence: a = 0 mod p forces alpha = -beta
        // with alpha^2 = -ell, hence n = 2 * ord(-ell mod p)
        if fd.a.rem_euclid(p as i64) == 0 && cp.n != 2 * delta {
            return Err(Error::inconsistency(format!(
                "trace divisible by p but n = {} differs from 2*delta = {}",
                cp.n,
                2 * delta
            )));
        }
        Ok((cp.n as u128, "T1.1"))
    } else {
        let b = b_index_divisible(&data.reduce_mod(), p, cp.n, seed)?;
        im.b_divisible = Some(b);
        let d = if b { cp.n as u128 } else { cp.n as u128 * p as u128 };
        Ok((d, "T1.2"))
    }
}

/// Quadratic twist by ell of a defect-2 curve at ell >= 5, minimalized; the
/// twist always has good reduction there.
fn good_quadratic_twist_at_large_ell(data: &LocalMinimalData) -> Result<(LocalMinimalData, i64)> {
    let ell = data.ell;
    let u = i64::try_from(ell)
        .map_err(|_| Error::resource_ceiling(format!("twist parameter {ell} out of i64 range")))?;
    let twisted = data.minimal_model.quadratic_twist(u)?;
    let tdata = twisted.minimal_model_at(ell)?;
    if !tdata.vdisc.equals(0) {
        return Err(Error::inconsistency(format!(
            "quadratic twist by {u} of a defect-2 curve at {ell} did not reach good reduction"
        )));
    }
    Ok((tdata, u))
}

/// Defect-2 cases at any ell: pass to the good quadratic twist E' and read d
/// off the action on its torsion. At ell in {2, 3} a repeated eigenvalue
/// pins p (11 resp. 7) and d is the known constant; the index test is still
/// run as a consistency check.
fn twist_route(
    data: &LocalMinimalData,
    p: u64,
    seed: u64,
    im: &mut Intermediates,
) -> Result<(u128, &'static str)> {
    let ell = data.ell;
    let (tdata, u) = match ell {
        2 | 3 => good_twist_at_small_ell(data)?,
        _ => good_quadratic_twist_at_large_ell(data)?,
    };
    im.twist_u = Some(u);
    let fd = frobenius_of_good_reduction(&tdata)?;
    let cp = char_poly_roots(fd.a, ell, p)?;
    im.record_roots(fd.a, &cp);
    let n = cp.n;
    let n128 = n as u128;
    if !cp.repeated_root {
        let label = match ell {
            2 => "T11.1",
            3 => "T9.1",
            _ => "T4.1",
        };
        let d = if halves_are_minus_one(&cp) { n128 } else { 2 * n128 };
        return Ok((d, label));
    }
    let b = b_index_divisible(&tdata.reduce_mod(), p, n, seed)?;
    im.b_divisible = Some(b);
    match ell {
        2 | 3 => {
            let (want_p, constant, label) =
                if ell == 3 { (11u64, 110u128, "T9.2") } else { (7u64, 42u128, "T11.2") };
            if p != want_p {
                return Err(Error::inconsistency(format!(
                    "repeated Frobenius eigenvalue for the good twist at ell = {ell} \
                     forces p = {want_p}, got p = {p}"
                )));
            }
            // the order Z[pi] is maximal here (its discriminant -11 resp. -7
            // is fundamental), so the index can never pick up a factor p
            if b {
                return Err(Error::inconsistency(format!(
                    "endomorphism index divisible by {p} for the good twist at ell = {ell}"
                )));
            }
            Ok((constant, label))
        }
        _ => {
            if n % 2 == 0 && halves_are_minus_one(&cp) {
                Ok((if b { n128 } else { n128 * p as u128 }, "T4.2.1"))
            } else {
                Ok((if b { 2 * n128 } else { 2 * n128 * p as u128 }, "T4.2.2"))
            }
        }
    }
}

/// Defect-3/4/6 cases at ell >= 5 with the matching congruence on ell: d from
/// the Frobenius roots of the rescaled residual curve, corrected by which
/// roots of unity the root powers realize.
fn residual_route(
    data: &LocalMinimalData,
    p: u64,
    e: u64,
    im: &mut Intermediates,
) -> Result<(u128, &'static str)> {
    let ell = data.ell;
    let rc = residual_rescaled_curve(data)?;
    let n_points = count_points(&rc)?;
    let fd = FrobeniusData::new(ell, n_points)?;
    let cp = char_poly_roots(fd.a, ell, p)?;
    im.record_roots(fd.a, &cp);
    let f = &cp.field;
    let n = cp.n;
    let n128 = n as u128;
    match e {
        3 => {
            if p == 3 {
                Ok((3 * n128, "T5.2"))
            } else if !cp.repeated_root {
                let third = n % 3 == 0
                    && pair_is_all_primitive_roots(
                        f,
                        f.pow(cp.alpha, n / 3),
                        f.pow(cp.beta, n / 3),
                        3,
                    );
                Ok((if third { n128 } else { 3 * n128 }, "T5.1.1"))
            } else {
                Ok((3 * n128, "T5.1.2"))
            }
        }
        4 => {
            if !cp.repeated_root {
                let quarter = n % 4 == 0
                    && pair_is_all_primitive_roots(
                        f,
                        f.pow(cp.alpha, n / 4),
                        f.pow(cp.beta, n / 4),
                        4,
                    );
                let d = if quarter {
                    n128
                } else if halves_are_minus_one(&cp) {
                    2 * n128
                } else {
                    4 * n128
                };
                Ok((d, "T6.1"))
            } else {
                Ok((if halves_are_minus_one(&cp) { 2 * n128 } else { 4 * n128 }, "T6.2"))
            }
        }
        6 => {
            if p == 3 {
                Ok((6, "T7.2"))
            } else if !cp.repeated_root {
                let sixth = n % 6 == 0
                    && pair_is_all_primitive_roots(
                        f,
                        f.pow(cp.alpha, n / 6),
                        f.pow(cp.beta, n / 6),
                        6,
                    );
                if sixth {
                    return Ok((n128, "T7.1.1.1"));
                }
                let third = n % 3 == 0
                    && pair_is_all_primitive_roots(
                        f,
                        f.pow(cp.alpha, n / 3),
                        f.pow(cp.beta, n / 3),
                        3,
                    );
                let d = if third {
                    2 * n128
                } else if halves_are_minus_one(&cp) {
                    3 * n128
                } else {
                    6 * n128
                };
                Ok((d, "T7.1.1.2"))
            } else {
                Ok((if halves_are_minus_one(&cp) { 3 * n128 } else { 6 * n128 }, "T7.1.2"))
            }
        }
        _ => Err(Error::inconsistency(format!(
            "residual-curve case reached with defect {e}"
        ))),
    }
}

/// Fully tame cases: d depends only on e and the cyclotomic orders.
fn tame_route(e: u64, cyc: &CyclotomicData, labels: (&'static str, &'static str)) -> (u128, &'static str) {
    if e == 3 {
        (6 * cyc.delta as u128, labels.0)
    } else if cyc.r.is_multiple_of(2) {
        (e as u128 * cyc.r as u128, labels.1)
    } else {
        (2 * e as u128 * cyc.r as u128, labels.1)
    }
}

fn potentially_good_route(
    data: &LocalMinimalData,
    reduction: &ReductionInfo,
    cyc: &CyclotomicData,
    p: u64,
    seed: u64,
    im: &mut Intermediates,
) -> Result<(u128, &'static str)> {
    let e = reduction.e.expect("defect present for potentially good reduction");
    match data.ell {
        2 => {
            if e == 2 {
                twist_route(data, p, seed, im)
            } else {
                Ok(tame_route(e, cyc, ("T12.1", "T12.2")))
            }
        }
        3 => {
            if e == 2 {
                twist_route(data, p, seed, im)
            } else {
                Ok(tame_route(e, cyc, ("T10.1", "T10.2")))
            }
        }
        ell => match e {
            2 => twist_route(data, p, seed, im),
            3 | 6 if ell % 3 == 1 => residual_route(data, p, e, im),
            4 if ell % 4 == 1 => residual_route(data, p, e, im),
            3 | 4 | 6 => Ok(tame_route(e, cyc, ("T8.1", "T8.2"))),
            _ => Err(Error::inconsistency(format!(
                "impossible defect {e} at ell = {ell}"
            ))),
        },
    }
}

/// Compute d = [Q_ell(E_p) : Q_ell] for the given integral Weierstrass model.
/// Requires ell prime and p an odd prime different from ell.
pub fn compute_degree(
    model: &CurveModel,
    ell: u64,
    p: u64,
    opts: ComputeOptions<'_>,
) -> Result<DegreeResult> {
    if !is_prime(ell) {
        return Err(Error::invalid_input(format!("ell must be prime, got {ell}")));
    }
    if p == 2 {
        return Err(Error::invalid_input(
            "p = 2 is out of scope: p must be an odd prime",
        ));
    }
    if !is_prime(p) {
        return Err(Error::invalid_input(format!("p must be an odd prime, got {p}")));
    }
    if p == ell {
        return Err(Error::invalid_input("p must differ from ell"));
    }
    let data = if opts.assume_minimal {
        model.local_data_assuming_minimal(ell)?
    } else {
        model.minimal_model_at(ell)?
    };
    let table = opts.defect_table.unwrap_or_else(|| DefectTable::bundled());
    let reduction = classify_reduction(&data, table, opts.defect_override)?;
    let cyc = cyclotomic_orders(ell, p)?;
    let mut im = Intermediates::new(cyc.r, cyc.delta);

    let (d128, branch) = match reduction.kind {
        ReductionKind::Good => good_route(&data, p, opts.seed, cyc.delta, &mut im)?,
        ReductionKind::Multiplicative => {
            let pth = is_pth_power_ql(&data.invariants.j, ell, p)?;
            im.vj = Some(data.vj);
            im.pth_power_j = Some(pth);
            let split = reduction.split.expect("split marker present");
            let r = cyc.r as u128;
            let pp = p as u128;
            if split {
                if cyc.r > 1 {
                    (if pth { r } else { pp * r }, "T2.1.1")
                } else {
                    (if pth { 1 } else { pp }, "T2.1.2")
                }
            } else if cyc.r % 2 == 0 {
                (if pth { r } else { pp * r }, "T2.2.1")
            } else if cyc.r > 1 {
                (if pth { 2 * r } else { 2 * pp * r }, "T2.2.2.1")
            } else {
                (if pth { 2 } else { 2 * pp }, "T2.2.2.2")
            }
        }
        ReductionKind::AdditivePotentiallyMultiplicative => {
            let pth = is_pth_power_ql(&data.invariants.j, ell, p)?;
            im.vj = Some(data.vj);
            im.pth_power_j = Some(pth);
            let r = cyc.r as u128;
            let pp = p as u128;
            if cyc.r > 1 {
                (if pth { 2 * r } else { 2 * pp * r }, "T3.1")
            } else {
                (if pth { 2 } else { 2 * pp }, "T3.2")
            }
        }
        ReductionKind::AdditivePotentiallyGood => {
            potentially_good_route(&data, &reduction, &cyc, p, opts.seed, &mut im)?
        }
    };

    let d = u64::try_from(d128)
        .map_err(|_| Error::resource_ceiling("computed degree exceeds u64 range"))?;
    if d == 0 || d % cyc.r != 0 {
        return Err(Error::inconsistency(format!(
            "degree {d} is not a positive multiple of r = {}",
            cyc.r
        )));
    }
    if let Some(e) = reduction.e {
        if d % e != 0 {
            return Err(Error::inconsistency(format!(
                "degree {d} is not divisible by the defect e = {e}"
            )));
        }
    }
    let p128 = p as u128;
    let group_order = p128 * (p128 - 1) * (p128 - 1) * (p128 + 1);
    if !group_order.is_multiple_of(d128) {
        return Err(Error::inconsistency(format!(
            "degree {d} does not divide p(p-1)^2(p+1) = {group_order}"
        )));
    }

    Ok(DegreeResult {
        ell,
        p,
        d,
        branch,
        reduction,
        minimal_model: data.minimal_model.clone(),
        kodaira: data.kodaira,
        conductor_exponent: data.conductor_exponent,
        scale_exponent: data.scale_exponent,
        intermediates: im,
    })
}

/// Exponent of the discriminant ideal of Q_ell(E_p)/Q_ell: d * D / e, where
/// D is the exponent of the different and e the ramification index. Errors
/// when e does not divide d * D (the quotient must be integral) or when the
/// inputs are degenerate.
pub fn discriminant_exponent(d: u64, e: u64, different_exponent: u64) -> Result<u64> {
    if d == 0 {
        return Err(Error::invalid_input("degree d must be positive"));
    }
    if e == 0 {
        return Err(Error::invalid_input("ramification index e must be positive"));
    }
    let prod = d as u128 * different_exponent as u128;
    if !prod.is_multiple_of(e as u128) {
        return Err(Error::invalid_input(format!(
            "e = {e} does not divide d * D = {prod}"
        )));
    }
    u64::try_from(prod / e as u128)
        .map_err(|_| Error::resource_ceiling("discriminant exponent exceeds u64 range"))
}

//! Integral Weierstrass models over Q: standard invariants, quadratic
//! twists, local minimalization (Tate's algorithm) and reduction mod ell.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::arith::{factorize, is_prime, mod_big, mod_u64, valuation, Valuation};
use crate::error::{Error, Result};
use crate::modular::unit_residue_rat;
use crate::tate::{tate_algorithm, KodairaType};

/// Default modulus exponent for stored unit residues: residues are kept
/// mod ell^3, enough to read mod-8 and mod-4 conditions at ell = 2 directly.
pub const DEFAULT_RESIDUE_PRECISION: u32 = 3;

/// An integral Weierstrass model
/// `y^2 + a1 x y + a3 y = x^3 + a2 x^2 + a4 x + a6` with nonzero discriminant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurveModel {
    pub a1: BigInt,
    pub a2: BigInt,
    pub a3: BigInt,
    pub a4: BigInt,
    pub a6: BigInt,
}

/// The classical b-, c-invariants, discriminant, and j-invariant of a model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StandardInvariants {
    pub b2: BigInt,
    pub b4: BigInt,
    pub b6: BigInt,
    pub b8: BigInt,
    pub c4: BigInt,
    pub c6: BigInt,
    pub disc: BigInt,
    pub j: BigRational,
}

impl CurveModel {
    pub fn new(a1: BigInt, a2: BigInt, a3: BigInt, a4: BigInt, a6: BigInt) -> Result<Self> {
        let m = CurveModel { a1, a2, a3, a4, a6 };
        if m.discriminant().is_zero() {
            return Err(Error::InvalidInput(
                "singular model: discriminant is zero".into(),
            ));
        }
        Ok(m)
    }

    pub fn from_i64(a: [i64; 5]) -> Result<Self> {
        Self::new(
            BigInt::from(a[0]),
            BigInt::from(a[1]),
            BigInt::from(a[2]),
            BigInt::from(a[3]),
            BigInt::from(a[4]),
        )
    }

    /// The model `y^2 = x^3 - 27 c4 x - 54 c6` attached to a c-invariant
    /// pair. Its own invariants are (6^4 c4, 6^6 c6): callers that need local
    /// data minimalize at the relevant prime afterwards.
    pub fn from_c_invariants(c4: &BigInt, c6: &BigInt) -> Result<Self> {
        if c4.pow(3) == c6.pow(2) {
            return Err(Error::InvalidInput(
                "c4^3 = c6^2: the associated discriminant vanishes".into(),
            ));
        }
        Self::new(
            BigInt::zero(),
            BigInt::zero(),
            BigInt::zero(),
            -27 * c4,
            -54 * c6,
        )
    }

    fn b_invariants(&self) -> (BigInt, BigInt, BigInt, BigInt) {
        let b2 = &self.a1 * &self.a1 + 4 * &self.a2;
        let b4 = 2 * &self.a4 + &self.a1 * &self.a3;
        let b6 = &self.a3 * &self.a3 + 4 * &self.a6;
        let b8 = &self.a1 * &self.a1 * &self.a6 + 4 * &self.a2 * &self.a6
            - &self.a1 * &self.a3 * &self.a4
            + &self.a2 * &self.a3 * &self.a3
            - &self.a4 * &self.a4;
        (b2, b4, b6, b8)
    }

    pub fn discriminant(&self) -> BigInt {
        let (b2, b4, b6, b8) = self.b_invariants();
        -&b2 * &b2 * &b8 - 8 * &b4 * &b4 * &b4 - 27 * &b6 * &b6 + 9 * &b2 * &b4 * &b6
    }

    pub fn standard_invariants(&self) -> StandardInvariants {
        let (b2, b4, b6, b8) = self.b_invariants();
        let c4: BigInt = &b2 * &b2 - 24 * &b4;
        let c6: BigInt = -&b2 * &b2 * &b2 + 36 * &b2 * &b4 - 216 * &b6;
        let disc: BigInt =
            -&b2 * &b2 * &b8 - 8 * &b4 * &b4 * &b4 - 27 * &b6 * &b6 + 9 * &b2 * &b4 * &b6;
        debug_assert_eq!(c4.pow(3) - c6.pow(2), 1728 * &disc);
        debug_assert_eq!(4 * &b8, &b2 * &b6 - &b4 * &b4);
        debug_assert!(!disc.is_zero());
        let j = BigRational::new(c4.pow(3), disc.clone());
        StandardInvariants { b2, b4, b6, b8, c4, c6, disc, j }
    }

    /// Quadratic twist by a nonzero integer; u is normalized to its
    /// squarefree core first (twisting by a square is the identity).
    ///
    /// When a1 and a3 are both even the returned model has invariants exactly
    /// (u^2 c4, u^3 c6, u^6 disc). Otherwise completing the square is not
    /// integral and the result carries an extra (2^4, 2^6, 2^12) factor; an
    /// exact integral model need not exist in that case, and callers that
    /// care about local data at some prime re-minimalize there anyway.
    pub fn quadratic_twist(&self, u: i64) -> Result<CurveModel> {
        if u == 0 {
            return Err(Error::InvalidInput("twist parameter u must be nonzero".into()));
        }
        let mut core: i64 = if u < 0 { -1 } else { 1 };
        for (q, k) in factorize(u.unsigned_abs())? {
            if k % 2 == 1 {
                core = core
                    .checked_mul(q as i64)
                    .ok_or_else(|| Error::ResourceCeiling("twist parameter overflow".into()))?;
            }
        }
        if core == 1 {
            return Ok(self.clone());
        }
        let (b2, b4, b6, _) = self.b_invariants();
        let even = |x: &BigInt| (x % 2u8).is_zero();
        let uu = BigInt::from(core);
        if even(&self.a1) && even(&self.a3) {
            // y^2 = x^3 + (b2/4) x^2 + (b4/2) x + b6/4, twisted termwise
            CurveModel::new(
                BigInt::zero(),
                &uu * (&b2 / 4u8),
                BigInt::zero(),
                &uu * &uu * (&b4 / 2u8),
                &uu * &uu * &uu * (&b6 / 4u8),
            )
        } else {
            CurveModel::new(
                BigInt::zero(),
                &uu * &b2,
                BigInt::zero(),
                &uu * &uu * 8u8 * &b4,
                &uu * &uu * &uu * 16u8 * &b6,
            )
        }
    }

    /// Local minimal model and valuation data at ell, residues mod ell^3.
    pub fn minimal_model_at(&self, ell: u64) -> Result<LocalMinimalData> {
        self.minimal_model_at_with_precision(ell, DEFAULT_RESIDUE_PRECISION)
    }

    pub fn minimal_model_at_with_precision(
        &self,
        ell: u64,
        residue_precision: u32,
    ) -> Result<LocalMinimalData> {
        let outcome = tate_algorithm(self, ell)?;
        assemble_local_data(
            outcome.model,
            ell,
            Some(outcome.kodaira),
            Some(outcome.conductor_exponent),
            outcome.scale_exponent,
            residue_precision,
        )
    }

    /// Local valuation data at ell taken on this model as given, trusting the
    /// caller that it is already ell-minimal. No minimalization is attempted,
    /// so the fiber type and conductor exponent are not available.
    pub fn local_data_assuming_minimal(&self, ell: u64) -> Result<LocalMinimalData> {
        if !is_prime(ell) {
            return Err(Error::InvalidInput(format!("{ell} is not prime")));
        }
        assemble_local_data(self.clone(), ell, None, None, 0, DEFAULT_RESIDUE_PRECISION)
    }
}

fn assemble_local_data(
    model: CurveModel,
    ell: u64,
    kodaira: Option<KodairaType>,
    conductor_exponent: Option<u32>,
    scale_exponent: u32,
    residue_precision: u32,
) -> Result<LocalMinimalData> {
    {
        if residue_precision == 0 {
            return Err(Error::InvalidInput("residue precision must be >= 1".into()));
        }
        let inv = model.standard_invariants();
        let vc4 = valuation(&inv.c4, ell);
        let vc6 = valuation(&inv.c6, ell);
        let vdisc = valuation(&inv.disc, ell);
        if ell >= 5 {
            let small_c4 = matches!(vc4, Valuation::Finite(v) if v < 4);
            let small_disc = matches!(vdisc, Valuation::Finite(v) if v < 12);
            if !small_c4 && !small_disc {
                return Err(Error::Inconsistency(format!(
                    "minimalization at {ell} left v(c4) >= 4 and v(disc) >= 12"
                )));
            }
        }
        let modulus = BigInt::from(ell).pow(residue_precision);
        let unit_residue = |x: &BigInt, v: &Valuation| -> Option<BigInt> {
            match v {
                Valuation::Infinite => None,
                Valuation::Finite(k) => {
                    let unit = x / BigInt::from(ell).pow(*k as u32);
                    Some(mod_big(&unit, &modulus))
                }
            }
        };
        let u_c4 = unit_residue(&inv.c4, &vc4);
        let u_c6 = unit_residue(&inv.c6, &vc6);
        let u_disc = unit_residue(&inv.disc, &vdisc)
            .expect("discriminant is nonzero");
        let (vj, jt_mod_ell) = if inv.c4.is_zero() {
            (Valuation::Infinite, None)
        } else {
            let (v, unit) = unit_residue_rat(&inv.j, ell)?;
            let expected = match (&vc4, &vdisc) {
                (Valuation::Finite(a), Valuation::Finite(d)) => 3 * a - d,
                _ => unreachable!("both finite when c4 != 0"),
            };
            if v != expected {
                return Err(Error::Inconsistency(format!(
                    "v(j) = {v} but 3 v(c4) - v(disc) = {expected}"
                )));
            }
            (Valuation::Finite(v), Some(unit))
        };
        if let Some(0) = jt_mod_ell {
            return Err(Error::Inconsistency("unit part of j reduced to 0".into()));
        }
        Ok(LocalMinimalData {
            ell,
            minimal_model: model,
            invariants: inv,
            kodaira,
            conductor_exponent,
            scale_exponent,
            vc4,
            vc6,
            vdisc,
            u_c4,
            u_c6,
            u_disc,
            residue_precision,
            vj,
            jt_mod_ell,
        })
    }
}

/// Valuations, unit residues and reduction diagnostics of the ell-minimal
/// model of a curve.
#[derive(Debug, Clone)]
pub struct LocalMinimalData {
    pub ell: u64,
    pub minimal_model: CurveModel,
    /// Invariants of the minimal model.
    pub invariants: StandardInvariants,
    /// Fiber type of the minimal model; absent when minimality was assumed
    /// rather than established.
    pub kodaira: Option<KodairaType>,
    pub conductor_exponent: Option<u32>,
    /// k such that the input invariants are the minimal ones times ell^(4k, 6k, 12k).
    pub scale_exponent: u32,
    pub vc4: Valuation,
    pub vc6: Valuation,
    pub vdisc: Valuation,
    /// c4 / ell^{v(c4)} mod ell^residue_precision (absent when c4 = 0).
    pub u_c4: Option<BigInt>,
    pub u_c6: Option<BigInt>,
    pub u_disc: BigInt,
    pub residue_precision: u32,
    /// v(j) = 3 v(c4) - v(disc); infinite exactly when j = 0.
    pub vj: Valuation,
    /// (j / ell^{v(j)}) mod ell, nonzero; absent exactly when j = 0.
    pub jt_mod_ell: Option<u64>,
}

impl LocalMinimalData {
    /// v(disc) as a plain integer (always finite: disc != 0).
    pub fn vdisc_finite(&self) -> i64 {
        self.vdisc.finite().expect("discriminant is nonzero")
    }

    /// Coefficients of the minimal model reduced mod ell.
    pub fn reduce_mod(&self) -> ReducedCurve {
        let ell = self.ell;
        let m = &self.minimal_model;
        ReducedCurve {
            ell,
            a1: mod_u64(&m.a1, ell),
            a2: mod_u64(&m.a2, ell),
            a3: mod_u64(&m.a3, ell),
            a4: mod_u64(&m.a4, ell),
            a6: mod_u64(&m.a6, ell),
            singular: !matches!(self.vdisc, Valuation::Finite(0)),
        }
    }
}

/// A Weierstrass curve over the prime field F_ell (coefficients reduced from
/// an ell-minimal model). `singular` marks bad reduction; point counting
/// requires a nonsingular reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReducedCurve {
    pub ell: u64,
    pub a1: u64,
    pub a2: u64,
    pub a3: u64,
    pub a4: u64,
    pub a6: u64,
    pub singular: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve_25920() -> CurveModel {
        CurveModel::from_i64([0, 0, 0, -432, -864]).unwrap()
    }

    #[test]
    fn invariants_of_reference_curves() {
        let inv = curve_25920().standard_invariants();
        assert_eq!(inv.c4, BigInt::from(20736));
        assert_eq!(inv.c6, BigInt::from(746496));
        assert_eq!(inv.disc, BigInt::from(4837294080u64));
        assert_eq!(inv.c4.pow(3) - inv.c6.pow(2), 1728 * &inv.disc);

        let inv = CurveModel::from_i64([0, 0, 0, -1, 0]).unwrap().standard_invariants();
        assert_eq!(inv.c4, BigInt::from(48));
        assert_eq!(inv.c6, BigInt::from(0));
        assert_eq!(inv.disc, BigInt::from(64));

        let inv = CurveModel::from_i64([0, 0, 0, 0, 1]).unwrap().standard_invariants();
        assert_eq!(inv.c4, BigInt::from(0));
        assert_eq!(inv.c6, BigInt::from(-864));
        assert_eq!(inv.disc, BigInt::from(-432));
        assert!(inv.j.is_zero());
    }

    #[test]
    fn b8_identity_with_odd_coefficients() {
        for a in [[1i64, -1, 1, -10, -20], [1, 0, 1, 4, -6], [0, 1, 1, 0, 0], [1, 1, 1, 1, 1]] {
            let m = CurveModel::from_i64(a).unwrap();
            let inv = m.standard_invariants();
            assert_eq!(4 * &inv.b8, &inv.b2 * &inv.b6 - &inv.b4 * &inv.b4);
            assert_eq!(inv.c4.pow(3) - inv.c6.pow(2), 1728 * &inv.disc);
        }
    }

    #[test]
    fn singular_models_rejected() {
        assert!(CurveModel::from_i64([0, 0, 0, 0, 0]).is_err());
        assert!(CurveModel::from_i64([0, 0, 0, -3, 2]).is_err());
        let c = BigInt::from(1);
        assert!(CurveModel::from_c_invariants(&c, &c).is_err());
    }

    #[test]
    fn twist_scaling_law_exact_for_even_models() {
        let m = curve_25920();
        let base = m.standard_invariants();
        let t = m.quadratic_twist(5).unwrap();
        let ti = t.standard_invariants();
        assert_eq!(ti.c4, 25 * &base.c4);
        assert_eq!(ti.c6, 125 * &base.c6);
        assert_eq!(ti.disc, BigInt::from(15625) * &base.disc);
        assert_eq!(ti.j, base.j);
    }

    #[test]
    fn twist_by_square_is_identity() {
        let m = curve_25920();
        assert_eq!(m.quadratic_twist(1).unwrap(), m);
        assert_eq!(m.quadratic_twist(4).unwrap(), m);
        assert_eq!(m.quadratic_twist(9).unwrap(), m);
        assert!(m.quadratic_twist(0).is_err());
        // -4 normalizes to -1, not 1
        let t = m.quadratic_twist(-4).unwrap();
        assert_eq!(t.standard_invariants().c6, -&m.standard_invariants().c6);
    }

    #[test]
    fn twist_preserves_j_for_odd_models() {
        let m = CurveModel::from_i64([1, -1, 1, -10, -20]).unwrap();
        let j = m.standard_invariants().j.clone();
        for u in [-2i64, -1, 2, 3, 5] {
            let t = m.quadratic_twist(u).unwrap();
            assert_eq!(t.standard_invariants().j, j);
        }
    }

    #[test]
    fn minimalization_reference_valuations() {
        let m = curve_25920();
        let at2 = m.minimal_model_at(2).unwrap();
        assert_eq!(at2.vc4, Valuation::Finite(8));
        assert_eq!(at2.vc6, Valuation::Finite(10));
        assert_eq!(at2.vdisc, Valuation::Finite(14));
        let at3 = m.minimal_model_at(3).unwrap();
        assert_eq!(at3.vc4, Valuation::Finite(4));
        assert_eq!(at3.vc6, Valuation::Finite(6));
        assert_eq!(at3.vdisc, Valuation::Finite(10));
        let at5 = m.minimal_model_at(5).unwrap();
        assert_eq!(at5.vdisc, Valuation::Finite(1));
        assert_eq!(at5.vc4, Valuation::Finite(0));
        let at7 = m.minimal_model_at(7).unwrap();
        assert_eq!(at7.vdisc, Valuation::Finite(0));
    }

    #[test]
    fn scaled_model_minimalizes_back() {
        let m = curve_25920();
        for ell in [2u64, 3, 5, 7] {
            let base = m.minimal_model_at(ell).unwrap();
            let le = BigInt::from(ell);
            let scaled = CurveModel::new(
                &m.a1 * &le,
                &m.a2 * le.pow(2),
                &m.a3 * le.pow(3),
                &m.a4 * le.pow(4),
                &m.a6 * le.pow(6),
            )
            .unwrap();
            let re = scaled.minimal_model_at(ell).unwrap();
            assert_eq!(re.vc4, base.vc4, "ell = {ell}");
            assert_eq!(re.vc6, base.vc6, "ell = {ell}");
            assert_eq!(re.vdisc, base.vdisc, "ell = {ell}");
            // idempotence on the minimal model itself
            let again = re.minimal_model.minimal_model_at(ell).unwrap();
            assert_eq!(again.vdisc, re.vdisc);
            assert_eq!(again.minimal_model, re.minimal_model);
        }
    }

    #[test]
    fn reduction_mod_seven() {
        let m = curve_25920();
        let red = m.minimal_model_at(7).unwrap().reduce_mod();
        assert!(!red.singular);
        assert_eq!((red.a1, red.a2, red.a3, red.a4, red.a6), (0, 0, 0, 2, 4));
        let red5 = m.minimal_model_at(5).unwrap().reduce_mod();
        assert!(red5.singular);
    }

    #[test]
    fn j_unit_data() {
        let m = curve_25920();
        let at5 = m.minimal_model_at(5).unwrap();
        assert_eq!(at5.vj, Valuation::Finite(-1));
        assert!(matches!(at5.jt_mod_ell, Some(u) if u != 0));
        let cusp = CurveModel::from_i64([0, 0, 0, 0, 1]).unwrap();
        let at5 = cusp.minimal_model_at(5).unwrap();
        assert_eq!(at5.vj, Valuation::Infinite);
        assert_eq!(at5.jt_mod_ell, None);
        assert_eq!(at5.vc4, Valuation::Infinite);
        assert_eq!(at5.u_c4, None);
    }

    #[test]
    fn unit_residue_precision() {
        let m = curve_25920();
        let at2 = m.minimal_model_at(2).unwrap();
        // c4 / 2^8 = 81, c6 / 2^10 = 729, disc / 2^14 = 295245
        assert_eq!(at2.u_c4, Some(BigInt::from(81 % 8)));
        assert_eq!(at2.u_c6, Some(BigInt::from(729 % 8)));
        assert_eq!(at2.u_disc, BigInt::from(295245 % 8));
        let wide = m.minimal_model_at_with_precision(2, 5).unwrap();
        assert_eq!(wide.u_c4, Some(BigInt::from(81 % 32)));
        assert!(m.minimal_model_at_with_precision(2, 0).is_err());
    }
}

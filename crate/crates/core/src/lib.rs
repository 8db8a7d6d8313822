//! Computation of the degree `d = [Q_ell(E_p) : Q_ell]` of the p-torsion field
//! of an elliptic curve defined over the l-adic numbers, for primes `p >= 3`,
//! `p != ell`, together with the discriminant-ideal exponent `d*D/e` and a
//! suite of brute-force verification oracles.
//!
//! The computation runs off exact data attached to an integral Weierstrass
//! model: a local minimal model at `ell` (Tate's algorithm), the reduction
//! type, the semistability defect `e` in the additive potentially good case,
//! and Frobenius data of an auxiliary good-reduction curve (point counts,
//! characteristic-polynomial roots in `F_{p^2}` and their orders).
//!
//! Entry point: [`engine::compute_degree`]. Everything it consumes is public,
//! so each stage can also be driven (and cross-checked) independently.

pub mod arith;
pub mod curve;
pub mod engine;
pub mod error;
pub mod fields;
pub mod frobenius;
pub mod modular;
pub mod oracle;
pub mod reduction;
pub mod tate;

pub use curve::{CurveModel, LocalMinimalData, StandardInvariants};
pub use engine::{
    compute_degree, discriminant_exponent, ComputeOptions, DegreeResult, Intermediates,
};
pub use error::Error;
pub use oracle::{
    check_consistency, companion_frobenius_order, exhaustive_group_structure,
    exhaustive_pth_power, matrix_order, MatrixModP,
};
pub use reduction::{DefectSource, DefectTable, ReductionInfo, ReductionKind};
pub use tate::KodairaType;

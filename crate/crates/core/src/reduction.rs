//! Reduction-type classification at a finite prime.
//!
//! Given the local minimal data of a curve at `ell`, [`classify_reduction`]
//! sorts it into one of four kinds: good, multiplicative, additive with
//! potentially multiplicative reduction, or additive with potentially good
//! reduction.  In the last case it also reports the *semistability defect*
//! `e`: the least degree of a totally ramified extension over which the curve
//! acquires good reduction.
//!
//! For `ell >= 5` the defect is a closed-form function of the discriminant
//! valuation.  For `ell` in {2, 3} it is looked up in a bundled table keyed
//! on the valuations of `c4`, `c6` and the discriminant; triples whose defect
//! is not determined by those valuations alone are deliberately absent, and a
//! lookup miss is reported as an error rather than guessed at.

use std::path::Path;
use std::sync::OnceLock;

use num_integer::Integer;

use crate::arith::{mod_u64, Valuation};
use crate::curve::LocalMinimalData;
use crate::error::{Error, Result};
use crate::modular::legendre;

/// The reduction type of a curve over the local field at `ell`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReductionKind {
    /// The reduced curve is nonsingular.
    Good,
    /// Nodal reduction: `v(disc) > 0` but `v(c4) = 0`.
    Multiplicative,
    /// Additive reduction with non-integral `j`; a ramified quadratic twist
    /// has multiplicative reduction.
    AdditivePotentiallyMultiplicative,
    /// Additive reduction with integral `j`; good reduction is reached over a
    /// totally ramified extension of degree `e`.
    AdditivePotentiallyGood,
}

impl std::fmt::Display for ReductionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ReductionKind::Good => "good",
            ReductionKind::Multiplicative => "multiplicative",
            ReductionKind::AdditivePotentiallyMultiplicative => "additive (potentially multiplicative)",
            ReductionKind::AdditivePotentiallyGood => "additive (potentially good)",
        };
        f.write_str(s)
    }
}

/// Where a semistability defect value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DefectSource {
    /// Closed-form rule `e = 12 / gcd(v(disc), 12)`, valid for `ell >= 5`.
    Formula51,
    /// Hit in the bundled (or user-supplied) valuation table for `ell` in {2, 3}.
    BundledTable,
    /// Explicit value passed by the caller, overriding any computation.
    UserOverride,
}

/// Classification of the special fibre together with the data the degree
/// computation needs downstream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReductionInfo {
    pub kind: ReductionKind,
    /// Semistability defect; present exactly when `kind` is
    /// [`ReductionKind::AdditivePotentiallyGood`].
    pub e: Option<u64>,
    /// Whether the node of a multiplicative fibre has rational tangents
    /// (split).  Present exactly when `kind` is
    /// [`ReductionKind::Multiplicative`].
    pub split: Option<bool>,
    /// Present exactly when `e` is.
    pub defect_source: Option<DefectSource>,
}

/// One pattern cell of a defect-table row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DefectPattern {
    Exact(u64),
    AtLeast(u64),
    Any,
}

impl DefectPattern {
    pub fn matches(&self, v: Valuation) -> bool {
        match (self, v) {
            (DefectPattern::Any, _) => true,
            (DefectPattern::AtLeast(_), Valuation::Infinite) => true,
            (DefectPattern::AtLeast(k), Valuation::Finite(n)) => n >= 0 && n as u64 >= *k,
            (DefectPattern::Exact(_), Valuation::Infinite) => false,
            (DefectPattern::Exact(k), Valuation::Finite(n)) => n >= 0 && n as u64 == *k,
        }
    }

    fn parse(tok: &str, line_no: usize) -> Result<Self> {
        if tok == "*" {
            return Ok(DefectPattern::Any);
        }
        if let Some(rest) = tok.strip_prefix(">=") {
            let k = rest.parse::<u64>().map_err(|_| {
                Error::invalid_input(format!(
                    "defect table line {line_no}: bad pattern {tok:?}"
                ))
            })?;
            return Ok(DefectPattern::AtLeast(k));
        }
        let k = tok.parse::<u64>().map_err(|_| {
            Error::invalid_input(format!(
                "defect table line {line_no}: bad pattern {tok:?}"
            ))
        })?;
        Ok(DefectPattern::Exact(k))
    }
}

impl std::fmt::Display for DefectPattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DefectPattern::Exact(k) => write!(f, "{k}"),
            DefectPattern::AtLeast(k) => write!(f, ">={k}"),
            DefectPattern::Any => f.write_str("*"),
        }
    }
}

/// One row of the defect table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DefectRow {
    pub ell: u64,
    pub vc4: DefectPattern,
    pub vc6: DefectPattern,
    pub vdisc: DefectPattern,
    pub e: u64,
}

/// Valuation-pattern table giving the semistability defect at `ell` in {2, 3}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DefectTable {
    rows: Vec<DefectRow>,
}

static BUNDLED_TEXT: &str = include_str!("../data/defect_table.txt");
static BUNDLED: OnceLock<DefectTable> = OnceLock::new();

impl DefectTable {
    /// Parses the `ell vc4 vc6 vdisc e` line format.  `#` starts a comment;
    /// blank lines are skipped.  Any malformed line is an error: a table that
    /// cannot be read in full is not trusted at all.
    pub fn parse(text: &str) -> Result<DefectTable> {
        let mut rows = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            };
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.is_empty() {
                continue;
            }
            if toks.len() != 5 {
                return Err(Error::invalid_input(format!(
                    "defect table line {line_no}: expected 5 fields, got {}",
                    toks.len()
                )));
            }
            let ell = toks[0].parse::<u64>().map_err(|_| {
                Error::invalid_input(format!(
                    "defect table line {line_no}: bad prime {:?}",
                    toks[0]
                ))
            })?;
            if ell != 2 && ell != 3 {
                return Err(Error::invalid_input(format!(
                    "defect table line {line_no}: rows are only meaningful for primes 2 and 3, got {ell}"
                )));
            }
            let vc4 = DefectPattern::parse(toks[1], line_no)?;
            let vc6 = DefectPattern::parse(toks[2], line_no)?;
            let vdisc = DefectPattern::parse(toks[3], line_no)?;
            let e = toks[4].parse::<u64>().map_err(|_| {
                Error::invalid_input(format!(
                    "defect table line {line_no}: bad degree {:?}",
                    toks[4]
                ))
            })?;
            if !allowed_defects(ell).contains(&e) {
                return Err(Error::invalid_input(format!(
                    "defect table line {line_no}: degree {e} is not possible at {ell}"
                )));
            }
            rows.push(DefectRow { ell, vc4, vc6, vdisc, e });
        }
        Ok(DefectTable { rows })
    }

    /// The table compiled into the library.
    pub fn bundled() -> &'static DefectTable {
        BUNDLED.get_or_init(|| {
            DefectTable::parse(BUNDLED_TEXT).expect("bundled defect table must parse")
        })
    }

    /// Reads and parses a table from disk (used for user-supplied overrides).
    pub fn load(path: &Path) -> Result<DefectTable> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::invalid_input(format!("cannot read defect table {}: {e}", path.display()))
        })?;
        DefectTable::parse(&text)
    }

    pub fn rows(&self) -> &[DefectRow] {
        &self.rows
    }

    /// First row matching the valuation triple, top to bottom.
    pub fn lookup(&self, ell: u64, vc4: Valuation, vc6: Valuation, vdisc: u64) -> Option<u64> {
        self.rows
            .iter()
            .find(|r| {
                r.ell == ell
                    && r.vc4.matches(vc4)
                    && r.vc6.matches(vc6)
                    && r.vdisc.matches(Valuation::Finite(vdisc as i64))
            })
            .map(|r| r.e)
    }
}

/// The possible semistability defects at `ell`.
pub fn allowed_defects(ell: u64) -> &'static [u64] {
    match ell {
        2 => &[2, 3, 4, 6, 8, 24],
        3 => &[2, 3, 4, 6, 12],
        _ => &[2, 3, 4, 6],
    }
}

/// Computes the semistability defect of a curve with additive, potentially
/// good reduction, together with the provenance of the value.
///
/// `override_e`, when given, short-circuits the computation (after a range
/// check); this is the hook for callers that know the defect from an outside
/// source for a triple the table does not cover.
pub fn semistability_defect(
    data: &LocalMinimalData,
    table: &DefectTable,
    override_e: Option<u64>,
) -> Result<(u64, DefectSource)> {
    let ell = data.ell;
    if let Some(e) = override_e {
        if !allowed_defects(ell).contains(&e) {
            return Err(Error::invalid_input(format!(
                "defect override {e} is not a possible value at {ell} (allowed: {:?})",
                allowed_defects(ell)
            )));
        }
        return Ok((e, DefectSource::UserOverride));
    }
    let vdisc = data.vdisc_finite();
    debug_assert!(vdisc > 0, "defect queried for good reduction");
    let vdisc = vdisc as u64;
    if ell >= 5 {
        let e = 12 / vdisc.gcd(&12);
        if !allowed_defects(ell).contains(&e) {
            // Would require v(disc) coprime to 6 on a minimal model, which
            // cannot happen for potentially good reduction at ell >= 5.
            return Err(Error::inconsistency(format!(
                "impossible discriminant valuation {vdisc} for potentially good reduction at {ell}"
            )));
        }
        return Ok((e, DefectSource::Formula51));
    }
    match table.lookup(ell, data.vc4, data.vc6, vdisc) {
        Some(e) => Ok((e, DefectSource::BundledTable)),
        None => Err(Error::DefectTableMiss {
            ell,
            vc4: data.vc4.to_string(),
            vc6: data.vc6.to_string(),
            vdisc,
        }),
    }
}

/// Classifies the reduction of the minimal model at `data.ell`.
///
/// The defect table and optional override are consulted only when the curve
/// turns out to have additive, potentially good reduction; good or
/// (potentially) multiplicative curves never touch them.
pub fn classify_reduction(
    data: &LocalMinimalData,
    table: &DefectTable,
    override_e: Option<u64>,
) -> Result<ReductionInfo> {
    let ell = data.ell;
    let vdisc = data.vdisc_finite();
    if vdisc == 0 {
        return Ok(ReductionInfo {
            kind: ReductionKind::Good,
            e: None,
            split: None,
            defect_source: None,
        });
    }
    if data.vc4.equals(0) {
        let c6 = &data.invariants.c6;
        let split = if ell == 2 {
            mod_u64(c6, 8) == 7
        } else {
            legendre(&-c6, ell)? == 1
        };
        return Ok(ReductionInfo {
            kind: ReductionKind::Multiplicative,
            e: None,
            split: Some(split),
            defect_source: None,
        });
    }
    let j_integral = match data.vj {
        Valuation::Infinite => true,
        Valuation::Finite(v) => v >= 0,
    };
    if !j_integral {
        return Ok(ReductionInfo {
            kind: ReductionKind::AdditivePotentiallyMultiplicative,
            e: None,
            split: None,
            defect_source: None,
        });
    }
    let (e, source) = semistability_defect(data, table, override_e)?;
    Ok(ReductionInfo {
        kind: ReductionKind::AdditivePotentiallyGood,
        e: Some(e),
        split: None,
        defect_source: Some(source),
    })
}

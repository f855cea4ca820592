//! Critical exponents and admissibility regions.

use serde::Serialize;

use crate::{Error, Result};

/// Tolerance used for every region boundary.
pub const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentSet {
    pub d: usize,
    pub q: f64,
    pub r: f64,
    pub s: f64,
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalExponents {
    pub s_q: f64,
    pub s_c: f64,
    /// Wave exponent, only defined for `d >= 2`.
    pub s_c_w: Option<f64>,
    pub gamma1: f64,
}

/// `s_q = (d+2)/q − d/2`
pub fn s_q(d: usize, q: f64) -> f64 {
    (d as f64 + 2.0) / q - d as f64 / 2.0
}

/// `s_c = d/r + 2/q − d/2`
pub fn s_c(d: usize, q: f64, r: f64) -> f64 {
    let d = d as f64;
    d / r + 2.0 / q - d / 2.0
}

/// `s_c` evaluated with `d − 1` in place of `d`.
pub fn s_c_wave(d: usize, q: f64, r: f64) -> Result<f64> {
    if d < 2 {
        return Err(Error::InvalidArgument("the wave exponent requires d >= 2".into()));
    }
    Ok(s_c(d - 1, q, r))
}

/// `γ₁ = 1/q + d/r − d/2`
pub fn gamma1(d: usize, q: f64, r: f64) -> f64 {
    let d = d as f64;
    1.0 / q + d / r - d / 2.0
}

pub fn critical_exponents(d: usize, q: f64, r: f64) -> Result<CriticalExponents> {
    if d < 1 || !(q > 0.0) || !(r > 0.0) {
        return Err(Error::InvalidArgument(format!("need d >= 1, q > 0, r > 0; got d={d}, q={q}, r={r}")));
    }
    Ok(CriticalExponents { s_q: s_q(d, q), s_c: s_c(d, q, r), s_c_w: s_c_wave(d, q, r).ok(), gamma1: gamma1(d, q, r) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionTag {
    RestrictionInterior,
    EndpointLine,
    StrichartzAdmissible,
    SubcriticalTrivial,
    ForbiddenLowQ,
    Outside,
}

impl RegionTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            RegionTag::RestrictionInterior => "restriction_interior",
            RegionTag::EndpointLine => "endpoint_line",
            RegionTag::StrichartzAdmissible => "strichartz_admissible",
            RegionTag::SubcriticalTrivial => "subcritical_trivial",
            RegionTag::ForbiddenLowQ => "forbidden_low_q",
            RegionTag::Outside => "outside",
        }
    }
}

impl std::fmt::Display for RegionTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionClass {
    pub tag: RegionTag,
    /// `d/r + 2/q − d/2`
    pub scaling_witness: f64,
    /// `d/r + 1/q − d/2`
    pub endpoint_witness: f64,
}

/// Classify `(d, q, r)` against the restriction / Strichartz regions.
///
/// Checks run in order: endpoint line, interior, admissible, low-`q`
/// (where `E(1)` already fails), otherwise outside.
pub fn classify_region(d: usize, q: f64, r: f64) -> RegionClass {
    let a = s_c(d, q, r);
    let b = a - 1.0 / q;
    let tag = if b.abs() <= BOUNDARY_TOL && (q - 2.0).abs() > BOUNDARY_TOL {
        RegionTag::EndpointLine
    } else if a > BOUNDARY_TOL && b < -BOUNDARY_TOL {
        RegionTag::RestrictionInterior
    } else if a <= BOUNDARY_TOL {
        RegionTag::StrichartzAdmissible
    } else if b > BOUNDARY_TOL {
        RegionTag::ForbiddenLowQ
    } else {
        RegionTag::Outside
    };
    RegionClass { tag, scaling_witness: a, endpoint_witness: b }
}

/// Region test for the wave problem: `d` replaced by `d − 1`.
pub fn classify_wave_region(d: usize, q: f64, r: f64) -> Result<RegionClass> {
    if d < 2 {
        return Err(Error::InvalidArgument("the wave region requires d >= 2".into()));
    }
    Ok(classify_region(d - 1, q, r))
}

/// Predicted log-log slope of the Knapp ratio: `s_c − s`.
pub fn knapp_predicted_slope(d: usize, q: f64, r: f64, s: f64) -> f64 {
    s_c(d, q, r) - s
}

/// Weight and derivative exponents `(μ, ν)` for the weighted Strichartz
/// estimates. `α = 1` selects the wave version.
pub fn weighted_strichartz_exponents(d: usize, q: f64, r: f64, alpha: f64) -> Result<(f64, f64)> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
    }
    if (alpha - 1.0).abs() < 1e-12 {
        Ok((s_c_wave(d, q, r)?, 0.5 + 1.0 / q - 1.0 / r))
    } else {
        Ok((s_c(d, q, r), (2.0 - alpha) / q))
    }
}

/// Reject exponents outside `[2, ∞)`.
pub fn check_lebesgue_pair(q: f64, r: f64) -> Result<()> {
    if !(q >= 2.0) || !q.is_finite() {
        return Err(Error::Precondition(format!("q must be ≥ 2 (hypothesis 2 ≤ q, r < ∞; got q = {q})")));
    }
    if !(r >= 2.0) || !r.is_finite() {
        return Err(Error::Precondition(format!("r must be ≥ 2 (hypothesis 2 ≤ q, r < ∞; got r = {r})")));
    }
    Ok(())
}

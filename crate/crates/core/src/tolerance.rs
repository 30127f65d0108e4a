//! Numerical tolerances shared by the model builder, decoder and checkers.
//!
//! Coefficients in the scheduling model span roughly six orders of magnitude
//! (compressor energy of ~1e-3 MWh/kg against storage levels of ~1e4 kg), so
//! everything is checked in double precision with the margins below.

/// Maximum distance of a binary value from {0, 1} accepted when decoding.
pub const INTEGRALITY: f64 = 1e-6;

/// Absolute slack allowed when re-evaluating constraints on MW / kg quantities.
pub const FEASIBILITY: f64 = 1e-6;

/// Relative agreement required between a recomputed objective and the value
/// reported by a solver.
pub const OBJECTIVE_REL: f64 = 1e-6;

/// Relative MIP gap requested from every solver backend.
pub const MIP_REL_GAP: f64 = 1e-6;

/// Relative tolerance for knot continuity and contiguity of piecewise curves.
pub const CURVE_REL: f64 = 1e-9;

/// `|a - b| <= rel * max(1, |a|, |b|)`.
pub fn close_rel(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * 1f64.max(a.abs()).max(b.abs())
}

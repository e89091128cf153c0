//! Numeric tolerances used by type constructors and kernels.
//!
//! A single record so the thresholds can be tightened or relaxed in one
//! place; the defaults are what every constructor uses.

#[derive(Debug, Clone, Copy)]
pub struct NumericPolicy {
    /// Construction invariants (determinant one, orthogonality, ...).
    pub construction_tol: f64,
    /// Relative reconstruction error of factorizations.
    pub reconstruction_tol: f64,
    /// Scale-free transversality minors for opposition tests.
    pub transversality_tol: f64,
    /// Trace-zero check on Cartan vectors.
    pub trace_tol: f64,
    /// |h| tolerance for points that must sit on the horosphere.
    pub level_tol: f64,
    /// Bisection tolerance in the ray parameter.
    pub root_find_tol: f64,
    /// Stall tolerance for flat-distance descent.
    pub descent_tol: f64,
    /// Minimal gap between adjacent entries of a regular Cartan vector.
    pub regular_gap_tol: f64,
}

impl Default for NumericPolicy {
    fn default() -> Self {
        NumericPolicy {
            construction_tol: 1e-9,
            reconstruction_tol: 1e-10,
            transversality_tol: 1e-10,
            trace_tol: 1e-12,
            level_tol: 1e-8,
            root_find_tol: 1e-10,
            descent_tol: 1e-6,
            regular_gap_tol: 1e-9,
        }
    }
}

impl NumericPolicy {
    pub const DEFAULT: NumericPolicy = NumericPolicy {
        construction_tol: 1e-9,
        reconstruction_tol: 1e-10,
        transversality_tol: 1e-10,
        trace_tol: 1e-12,
        level_tol: 1e-8,
        root_find_tol: 1e-10,
        descent_tol: 1e-6,
        regular_gap_tol: 1e-9,
    };
}

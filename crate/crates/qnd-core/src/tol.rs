//! Numerical tolerances shared across the crate.
//!
//! There are three tiers: `UNIT_TOL` for quantities that are exact up to
//! floating-point roundoff (norms, Hermiticity, isometry defects),
//! `ALGEBRA_TOL` for derived algebraic identities that accumulate a little
//! more error (projector algebra, Kraus completeness, inequality slack), and
//! `EXACT_TOL` for two-pipeline comparisons expected to agree to roundoff.

/// Unit norms, Hermiticity, unit trace, isometry defect.
pub const UNIT_TOL: f64 = 1e-10;

/// Projector algebra, Kraus/POVM completeness, effect positivity.
pub const ALGEBRA_TOL: f64 = 1e-9;

/// Smallest admissible eigenvalue of a nominally PSD operator.
pub const EIG_FLOOR: f64 = -1e-9;

/// Eigenvalues below this are treated as zero ahead of logs and inverses.
pub const CLAMP_TOL: f64 = 1e-12;

/// Probabilities in `[NEG_PROB_TOL, 0)` are clamped to zero; anything more
/// negative is rejected as genuinely invalid.
pub const NEG_PROB_TOL: f64 = -1e-12;

/// Probability tables must sum to one within this.
pub const TABLE_SUM_TOL: f64 = 1e-9;

/// Slack allowed when certifying the tradeoff inequalities.
pub const CHECK_TOL: f64 = 1e-9;

/// Agreement expected when the same distribution is computed two ways.
pub const EXACT_TOL: f64 = 1e-12;

/// Tolerance for recognising a common lattice among eigenvalues.
pub const LATTICE_TOL: f64 = 1e-9;

/// Largest denominator tried when rationalising eigenvalue ratios.
pub const LATTICE_DENOM_CAP: u64 = 1_000_000;

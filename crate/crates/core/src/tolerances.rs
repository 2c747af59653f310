//! Central numeric tolerances.
//!
//! Every comparison tolerance used by the library is defined here, once, with
//! its rationale. Code elsewhere must not bury ad-hoc epsilons.
//!
//! Most tolerances are *banded*: a relative factor applied to
//! `max(1, scale)`, so they behave relatively at ordinary magnitudes and
//! degrade to a small absolute floor below unit scale. [`band`] implements
//! that convention.

/// Guard for vector normalization and near-singular linear solves.
///
/// A direction whose norm (relative to its coordinate scale) falls below this
/// is treated as degenerate rather than normalized into noise.
pub const EPS_NORM: f64 = 1e-12;

/// Agreement tolerance for smallest-enclosing-ball radii, relative with the
/// `max(1, r)` floor. The randomized and brute-force routes must agree to
/// this bound on every instance.
pub const EPS_SEB: f64 = 1e-9;

/// Default tie band. Two neighbor distances within `EPS_TIE * max(1, D)` of
/// the minimum are considered tied; distinct occupied positions at least this
/// close collapse in occupancy reporting.
pub const EPS_TIE: f64 = 1e-9;

/// Default gathering threshold: a configuration counts as gathered when the
/// smallest enclosing ball of all positions has radius at most this.
pub const EPS_GATHER: f64 = 1e-12;

/// Fixpoint detector: a step in which no process target differs from its
/// current position by more than this (Euclidean) is not applied; the run
/// stops and reports a fixpoint. Gathered states and multi-crash deadlocks
/// both surface this way.
pub const EPS_FIXPOINT: f64 = 1e-15;

/// Relative slack for certificate inequalities (contraction, monotonicity).
pub const CERT_REL: f64 = 1e-9;

/// Absolute floor for certificate inequalities, for quantities near zero.
pub const CERT_ABS: f64 = 1e-12;

/// Highest supported configuration dimension.
pub const MAX_DIMENSION: usize = 8;

/// Banded tolerance: `eps * max(1, scale)`.
///
/// Relative at scales above 1, a flat `eps` below. True ties produced by
/// exact constructions sit many orders of magnitude inside the band, while
/// genuinely distinct distances at ordinary scale sit far outside it.
#[inline]
pub fn band(eps: f64, scale: f64) -> f64 {
    eps * scale.max(1.0)
}

/// Slack for `lhs <= rhs` certificate checks: `max(rel * |rhs|, abs)`.
#[inline]
pub fn slack(rhs: f64, rel: f64, abs: f64) -> f64 {
    (rel * rhs.abs()).max(abs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn band_is_absolute_below_unit_scale() {
        assert_eq!(band(1e-9, 0.25), 1e-9);
        assert_eq!(band(1e-9, 1e-14), 1e-9);
    }

    #[test]
    fn band_is_relative_above_unit_scale() {
        assert_eq!(band(1e-9, 10.0), 1e-8);
    }

    #[test]
    fn slack_floors_at_absolute() {
        assert_eq!(slack(0.0, 1e-9, 1e-12), 1e-12);
        // powers of two keep the product exact
        assert_eq!(slack(-4.0, 0.25, 1e-12), 1.0);
    }
}

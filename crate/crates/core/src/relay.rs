//! Minimal relay proportion: inverting the occupation model at the
//! percolation threshold.
//!
//! The percolation engine says which *occupation* probability `p*` the
//! crossroads must reach for the network to span the window. Occupation has
//! two sources: relays placed by the operator (fraction `p` of crossroads)
//! and users who happen to stand inside a crossroad's blocking surface.
//! Solving `1 - (1 - p) * E(lambda) = p*` for `p` gives the fraction of
//! crossroads the operator actually has to equip; the busier the streets,
//! the smaller it is.

use crate::crossroad::{invert_for_relay_fraction, CrossroadGeometry, SurfaceKind};
use crate::error::Result;
use crate::percolation::{estimate_p_star, PercolationEstimate, PercolationParams};

/// The relay fraction required to keep the network spanning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelayPlan {
    /// User intensity (per km of street) the plan is for.
    pub lambda: f64,
    /// Estimated critical occupation probability.
    pub p_star: f64,
    /// Bootstrap standard error of `p_star`.
    pub p_star_std_error: f64,
    /// Solution of the inversion before clamping; negative when users alone
    /// carry the network past the threshold, `-inf` when every crossroad is
    /// certainly user-occupied.
    pub unclamped: f64,
    /// Operational relay fraction: the unclamped solution clamped to
    /// `[0, 1]`.
    pub p_c: f64,
    /// Carried over from the estimate: the window never crossed even fully
    /// occupied, so the plan degenerates to `p_c = 1`.
    pub never_percolates: bool,
    /// Street width (m) and surface convention the inversion used.
    pub street_width: f64,
    pub surface: SurfaceKind,
}

/// Computes the minimal relay proportion for `geometry` from a percolation
/// estimate. The user intensity is taken from the estimate itself, so the
/// occupation model and the percolation run cannot disagree.
pub fn minimal_relay_proportion(
    geometry: &CrossroadGeometry,
    estimate: &PercolationEstimate,
) -> Result<RelayPlan> {
    let unclamped = invert_for_relay_fraction(estimate.p_star, estimate.lambda, geometry)?;
    Ok(RelayPlan {
        lambda: estimate.lambda,
        p_star: estimate.p_star,
        p_star_std_error: estimate.std_error,
        unclamped,
        p_c: unclamped.clamp(0.0, 1.0),
        never_percolates: estimate.never_percolates,
        street_width: geometry.street_width,
        surface: geometry.surface,
    })
}

/// One user intensity on the relay-demand curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelayCurvePoint {
    pub lambda: f64,
    pub p_star: f64,
    pub p_star_std_error: f64,
    /// Minimal relay fraction under the triangle blocking surface.
    pub p_c_triangle: f64,
    /// Minimal relay fraction under the circumcircle blocking surface.
    pub p_c_circle: f64,
    pub never_percolates: bool,
    pub always_percolates: bool,
}

/// Sweeps user intensities and reports the minimal relay fraction under
/// both blocking-surface conventions.
///
/// `p*` does not depend on the surface convention (it is a property of the
/// connectivity graph alone), so each intensity is simulated once and
/// inverted twice. All points share `base.master_seed`; as long as every
/// intensity stays below the level cap, the runs are realizations of one
/// coupled user process, so sampling noise largely cancels between
/// neighboring points.
pub fn relay_curve(
    lambdas: &[f64],
    street_width: f64,
    base: &PercolationParams,
) -> Result<Vec<RelayCurvePoint>> {
    let triangle = CrossroadGeometry::new(street_width, SurfaceKind::Triangle)?;
    let circle = CrossroadGeometry::new(street_width, SurfaceKind::Circumcircle)?;
    let mut points = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let params = PercolationParams { lambda, ..*base };
        let estimate = estimate_p_star(&params)?;
        let tri_plan = minimal_relay_proportion(&triangle, &estimate)?;
        let circle_plan = minimal_relay_proportion(&circle, &estimate)?;
        points.push(RelayCurvePoint {
            lambda,
            p_star: estimate.p_star,
            p_star_std_error: estimate.std_error,
            p_c_triangle: tri_plan.p_c,
            p_c_circle: circle_plan.p_c,
            never_percolates: estimate.never_percolates,
            always_percolates: estimate.always_percolates,
        });
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::percolation::CurvePoint;

    fn fake_estimate(p_star: f64, lambda: f64) -> PercolationEstimate {
        PercolationEstimate {
            p_star,
            std_error: 0.01,
            curve: vec![CurvePoint {
                p: p_star,
                crossing_prob: 0.5,
                std_error: 0.05,
                replicates: 50,
            }],
            never_percolates: false,
            always_percolates: false,
            replicates: 50,
            gamma: 20.0,
            lambda,
            r: 0.2,
        }
    }

    #[test]
    fn no_users_means_full_threshold() {
        // With lambda = 0 the mean vacancy is 1 and p_c = p*.
        let geo = CrossroadGeometry::new(20.0, SurfaceKind::Circumcircle).unwrap();
        let plan = minimal_relay_proportion(&geo, &fake_estimate(0.7, 0.0)).unwrap();
        assert!((plan.p_c - 0.7).abs() < 1e-15);
        assert!((plan.unclamped - 0.7).abs() < 1e-15);
    }

    #[test]
    fn users_reduce_the_required_fraction() {
        let geo = CrossroadGeometry::new(20.0, SurfaceKind::Circumcircle).unwrap();
        let idle = minimal_relay_proportion(&geo, &fake_estimate(0.7, 0.0)).unwrap();
        let busy = minimal_relay_proportion(&geo, &fake_estimate(0.7, 45.0)).unwrap();
        assert!(busy.p_c < idle.p_c);
        // Dense streets: users alone exceed the threshold, fraction clamps
        // to zero while the unclamped solution goes negative.
        let packed = minimal_relay_proportion(&geo, &fake_estimate(0.7, 400.0)).unwrap();
        assert!(packed.unclamped < 0.0);
        assert_eq!(packed.p_c, 0.0);
    }

    #[test]
    fn triangle_needs_more_relays_than_circle() {
        // The triangle is the smaller blocking surface, so users occupy
        // fewer crossroads and the operator must place more relays.
        let tri = CrossroadGeometry::new(20.0, SurfaceKind::Triangle).unwrap();
        let circ = CrossroadGeometry::new(20.0, SurfaceKind::Circumcircle).unwrap();
        let est = fake_estimate(0.713, 45.0);
        let tri_plan = minimal_relay_proportion(&tri, &est).unwrap();
        let circ_plan = minimal_relay_proportion(&circ, &est).unwrap();
        assert!(tri_plan.p_c > circ_plan.p_c);
    }

    #[test]
    fn plan_never_exceeds_the_threshold_itself() {
        let geo = CrossroadGeometry::new(20.0, SurfaceKind::Circumcircle).unwrap();
        for lambda in [0.0, 10.0, 45.0, 120.0] {
            for p_star in [0.1, 0.5, 0.713, 1.0] {
                let plan = minimal_relay_proportion(&geo, &fake_estimate(p_star, lambda)).unwrap();
                assert!(
                    plan.p_c <= p_star + 1e-12,
                    "p_c {} > p* {p_star} at lambda {lambda}",
                    plan.p_c
                );
            }
        }
    }
}

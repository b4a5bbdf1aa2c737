//! Crossroad geometry and occupation.
//!
//! At a degree-3 crossroad of a Poisson-Voronoi street system the three
//! street axes leave the center under angles `alpha`, `beta` and
//! `delta = 2*pi - alpha - beta`, each strictly between 0 and `pi`. The pair
//! `(alpha, beta)` carries the full information and has the exact joint
//! density [`angle_density`] on the wedge `0 < alpha < pi`,
//! `pi - alpha < beta < pi`.
//!
//! Giving the streets a physical width `l` (meters), the inner border lines
//! of the three streets bound a triangle around the crossroad center: a
//! device parked inside it blocks the crossing in every direction. This
//! module computes that triangle ([`triangle_surface`]), its corner-to-corner
//! distances ([`side_lengths`]) and the disc through the three corners
//! ([`circumcircle_surface`]) as alternative, more conservative blocking
//! surfaces; from those, the probability that a crossroad is occupied when
//! users arrive along the streets as a Poisson process and a fraction of
//! crossroads additionally hosts a dedicated relay
//! ([`occupation_probability`]), and the inverse problem of choosing that
//! fraction to hit a target occupation ([`invert_for_relay_fraction`]).
//!
//! Angles are radians; surfaces are square meters; user intensities are per
//! kilometer of street.

mod gauss;

pub use gauss::gauss_legendre_unit;

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Angular tolerance at the domain boundary: angles closer than this to a
/// boundary are clamped inward before cotangent evaluation, keeping the
/// surfaces finite (and enormous) instead of infinite for degenerate
/// crossroads.
pub const ANGLE_TOL: f64 = 1e-9;

/// The exponent floor below which `exp` underflows to exactly 0 here, so the
/// vacancy integrand cannot produce subnormal noise.
const EXP_FLOOR: f64 = -700.0;

/// A validated pair of crossroad angles.
///
/// `alpha` and `beta` are two of the three angles between consecutive street
/// directions at a degree-3 crossroad, taken in cyclic order; the third is
/// `delta = 2*pi - alpha - beta`. Validity means all three lie strictly in
/// `(0, pi)`, which is exactly `0 < alpha < pi` and `pi - alpha < beta < pi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossroadAngles {
    alpha: f64,
    beta: f64,
}

impl CrossroadAngles {
    /// Validates the pair against the angle domain.
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !Self::in_domain(alpha, beta) {
            return Err(Error::Domain(format!(
                "angles (alpha={alpha}, beta={beta}) outside 0 < alpha < pi, pi - alpha < beta < pi"
            )));
        }
        Ok(CrossroadAngles { alpha, beta })
    }

    /// True iff `(alpha, beta)` lies strictly inside the angle domain.
    /// The third-angle constraint is tested as `alpha + beta > pi`, the
    /// same expression the density evaluates, so boundary-grazing pairs are
    /// classified consistently with the sign of `sin(alpha + beta)`.
    pub fn in_domain(alpha: f64, beta: f64) -> bool {
        alpha > 0.0 && alpha < PI && beta < PI && alpha + beta > PI
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// The third angle, `2*pi - alpha - beta`.
    pub fn delta(&self) -> f64 {
        2.0 * PI - self.alpha - self.beta
    }
}

/// Which blocking surface to attribute to a crossroad.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurfaceKind {
    /// The triangle cut out by the inner street borders.
    Triangle,
    /// The disc through the three triangle corners (conservative: a device
    /// there may still block one of the crossings).
    Circumcircle,
}

/// Street width and surface convention for crossroad blocking.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossroadGeometry {
    /// Street width `l` in meters.
    pub street_width: f64,
    /// Blocking-surface convention.
    pub surface: SurfaceKind,
}

impl CrossroadGeometry {
    /// Builds a geometry; the street width must be positive and finite.
    pub fn new(street_width: f64, surface: SurfaceKind) -> Result<Self> {
        if !street_width.is_finite() || street_width <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "street width must be positive, got {street_width}"
            )));
        }
        Ok(CrossroadGeometry {
            street_width,
            surface,
        })
    }
}

/// Joint density of the angle pair `(alpha, beta)` at a typical crossroad of
/// a Poisson-Voronoi street system:
///
/// `f(alpha, beta) = -(8 / (3*pi)) * sin(alpha) * sin(beta) * sin(alpha + beta)`
///
/// on the domain of [`CrossroadAngles`], and 0 outside. On the domain
/// `alpha + beta` exceeds `pi`, so the last factor is negative and the
/// density positive; writing `sin(alpha + beta) = -sin(delta)` shows the
/// density is in fact symmetric in all three angles.
pub fn angle_density(alpha: f64, beta: f64) -> f64 {
    if !CrossroadAngles::in_domain(alpha, beta) {
        return 0.0;
    }
    -(8.0 / (3.0 * PI)) * alpha.sin() * beta.sin() * (alpha + beta).sin()
}

fn clamp_angle(x: f64) -> f64 {
    x.clamp(ANGLE_TOL, PI - ANGLE_TOL)
}

/// Cotangent of half the (clamped) angle.
fn cot_half(x: f64) -> f64 {
    let h = 0.5 * clamp_angle(x);
    h.cos() / h.sin()
}

/// Triangle surface for raw angles; assumes the pair is in the domain up to
/// clamping. Using the symmetric form over all three half-angles keeps every
/// summand positive.
pub(crate) fn triangle_surface_raw(l: f64, alpha: f64, beta: f64) -> f64 {
    let delta = 2.0 * PI - alpha - beta;
    0.25 * l * l * (cot_half(alpha) + cot_half(beta) + cot_half(delta))
}

/// Squared distance between the two triangle corners adjacent to angles `x`
/// and `y` (the corners sit on the bisectors of those angles).
fn side_sq(l: f64, x: f64, y: f64) -> f64 {
    let d = cot_half(x) - cot_half(y);
    0.25 * l * l * (d * d + 4.0)
}

pub(crate) fn circumcircle_surface_raw(l: f64, alpha: f64, beta: f64) -> f64 {
    let delta = 2.0 * PI - alpha - beta;
    let s = triangle_surface_raw(l, alpha, beta);
    let ab2 = side_sq(l, alpha, beta);
    let bc2 = side_sq(l, beta, delta);
    let ca2 = side_sq(l, delta, alpha);
    // Disc through the three corners: radius = AB*BC*CA / (4*S).
    PI * ab2 * bc2 * ca2 / (16.0 * s * s)
}

pub(crate) fn surface_raw(geometry: &CrossroadGeometry, alpha: f64, beta: f64) -> f64 {
    match geometry.surface {
        SurfaceKind::Triangle => triangle_surface_raw(geometry.street_width, alpha, beta),
        SurfaceKind::Circumcircle => circumcircle_surface_raw(geometry.street_width, alpha, beta),
    }
}

/// Area (m^2) of the triangle bounded by the inner street borders:
///
/// `S = (l^2/4) * (cot(alpha/2) + cot(beta/2) + cot(delta/2))`
pub fn triangle_surface(geometry: &CrossroadGeometry, angles: CrossroadAngles) -> f64 {
    triangle_surface_raw(geometry.street_width, angles.alpha(), angles.beta())
}

/// Corner-to-corner distances `(AB, BC, CA)` (meters) of the blocking
/// triangle, where corner `C` faces the `alpha`/`beta` pair:
///
/// `AB^2 = (l^2/4) * ((cot(alpha/2) - cot(beta/2))^2 + 4)`
///
/// and cyclically for the other two sides.
pub fn side_lengths(geometry: &CrossroadGeometry, angles: CrossroadAngles) -> (f64, f64, f64) {
    let l = geometry.street_width;
    let (a, b, d) = (angles.alpha(), angles.beta(), angles.delta());
    (
        side_sq(l, a, b).sqrt(),
        side_sq(l, b, d).sqrt(),
        side_sq(l, d, a).sqrt(),
    )
}

/// Area (m^2) of the disc through the three corners of the blocking
/// triangle: `pi * AB^2 * BC^2 * CA^2 / (16 * S^2)`.
pub fn circumcircle_surface(geometry: &CrossroadGeometry, angles: CrossroadAngles) -> f64 {
    circumcircle_surface_raw(geometry.street_width, angles.alpha(), angles.beta())
}

/// Blocking surface (m^2) for the geometry's surface convention.
pub fn crossroad_surface(geometry: &CrossroadGeometry, angles: CrossroadAngles) -> f64 {
    surface_raw(geometry, angles.alpha(), angles.beta())
}

/// Integrates `g(alpha, beta)` over the angle domain with an
/// `order x order` tensor Gauss-Legendre rule.
///
/// The wedge is first mapped onto the unit square by
/// `beta = pi - alpha + u * alpha`, `(alpha, u) in (0, pi) x (0, 1)`, whose
/// Jacobian contributes a factor `alpha`. Terms are accumulated with
/// Neumaier-compensated summation in a fixed order, so a given order always
/// produces the same bits.
pub fn angle_domain_integral<G: Fn(f64, f64) -> f64>(order: usize, g: G) -> f64 {
    let (nodes, weights) = gauss_legendre_unit(order);
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for (i, &na) in nodes.iter().enumerate() {
        let alpha = PI * na;
        let wa = PI * weights[i];
        for (j, &u) in nodes.iter().enumerate() {
            let beta = PI - alpha + u * alpha;
            let term = wa * weights[j] * alpha * g(alpha, beta);
            // Neumaier update.
            let t = sum + term;
            if sum.abs() >= term.abs() {
                comp += (sum - t) + term;
            } else {
                comp += (term - t) + sum;
            }
            sum = t;
        }
    }
    sum + comp
}

/// Mean vacancy probability `E` of a typical crossroad: the chance that no
/// user stands inside its blocking surface when users form a Poisson process
/// of intensity `lambda_per_km` per kilometer of street.
///
/// A street of width `l` meters carries `lambda_per_km / 1000` users per
/// meter of axis, i.e. an area density `lambda_per_km / (1000 * l)` per m^2,
/// so conditionally on the angles the vacancy is
/// `exp(-lambda_per_km / (1000 * l) * A(l, alpha, beta))`, and `E` is its
/// mean under [`angle_density`]. Evaluated by [`angle_domain_integral`],
/// doubling the order from 128 until two successive estimates agree to
/// `1e-8`. Exponents below -700 underflow to exactly 0, so for enormous
/// intensities `E` may be exactly 0.
pub fn mean_vacancy(lambda_per_km: f64, geometry: &CrossroadGeometry) -> Result<f64> {
    if !(lambda_per_km >= 0.0) || !lambda_per_km.is_finite() {
        return Err(Error::Domain(format!(
            "user intensity must be finite and non-negative, got {lambda_per_km}"
        )));
    }
    if lambda_per_km == 0.0 {
        return Ok(1.0);
    }
    let area_density = lambda_per_km / 1000.0 / geometry.street_width; // users per m^2
    let integrand = |alpha: f64, beta: f64| {
        let exponent = -area_density * surface_raw(geometry, alpha, beta);
        let vacancy = if exponent < EXP_FLOOR {
            0.0
        } else {
            exponent.exp()
        };
        vacancy * angle_density(alpha, beta)
    };
    let mut order = 128;
    let mut estimate = angle_domain_integral(order, integrand);
    loop {
        order *= 2;
        let refined = angle_domain_integral(order, integrand);
        let done = (refined - estimate).abs() < 1e-8 || order >= 1024;
        estimate = refined;
        if done {
            // The integrand is a density times a factor in [0, 1]; clamp the
            // last quadrature wiggle into the mathematically valid range.
            return Ok(estimate.clamp(0.0, 1.0));
        }
    }
}

/// Inputs of the crossroad occupation model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OccupationInputs {
    /// User intensity per kilometer of street.
    pub lambda_per_km: f64,
    /// Fraction of crossroads equipped with a dedicated relay.
    pub relay_fraction: f64,
    /// Street width and blocking-surface convention.
    pub geometry: CrossroadGeometry,
}

/// Probability that a typical crossroad is occupied, by a relay (fraction
/// `p`, independent of everything else) or, failing that, by at least one
/// user inside its blocking surface:
///
/// `F = 1 - (1 - p) * E(lambda)`.
pub fn occupation_probability(inputs: &OccupationInputs) -> Result<f64> {
    let p = inputs.relay_fraction;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!(
            "relay fraction must lie in [0, 1], got {p}"
        )));
    }
    let e = mean_vacancy(inputs.lambda_per_km, &inputs.geometry)?;
    Ok(1.0 - (1.0 - p) * e)
}

/// Smallest relay fraction whose occupation probability reaches `target`:
/// solves `1 - (1 - p) * E(lambda) = target` for `p`, i.e.
/// `p = 1 - (1 - target) / E`.
///
/// The solution is returned unclamped: it is negative when users alone
/// already push occupation past the target, and `-inf` in the extreme case
/// `E = 0` (every crossroad certainly occupied by users). Callers that need
/// an operational fraction clamp to `[0, 1]`.
pub fn invert_for_relay_fraction(
    target: f64,
    lambda_per_km: f64,
    geometry: &CrossroadGeometry,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&target) {
        return Err(Error::Domain(format!(
            "target occupation must lie in [0, 1], got {target}"
        )));
    }
    let e = mean_vacancy(lambda_per_km, geometry)?;
    if e == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(1.0 - (1.0 - target) / e)
}

#[cfg(test)]
mod tests {
    use super::*;

    const EQUILATERAL: f64 = 2.0 * PI / 3.0;

    fn geometry(surface: SurfaceKind) -> CrossroadGeometry {
        CrossroadGeometry::new(20.0, surface).unwrap()
    }

    #[test]
    fn angle_domain_is_the_open_wedge() {
        assert!(CrossroadAngles::new(EQUILATERAL, EQUILATERAL).is_ok());
        assert!(CrossroadAngles::new(0.5, PI - 0.2).is_ok());
        // alpha + beta must exceed pi ...
        assert!(CrossroadAngles::new(0.5, 0.5).is_err());
        // ... and each angle must stay strictly inside (0, pi).
        assert!(CrossroadAngles::new(0.0, 2.0).is_err());
        assert!(CrossroadAngles::new(2.0, PI).is_err());
        assert!(CrossroadAngles::new(PI, PI).is_err());
        assert!(CrossroadAngles::new(f64::NAN, 2.0).is_err());

        let angles = CrossroadAngles::new(2.0, 2.0).unwrap();
        assert!((angles.delta() - (2.0 * PI - 4.0)).abs() < 1e-15);
    }

    #[test]
    fn density_vanishes_outside_domain_and_peaks_symmetric() {
        assert_eq!(angle_density(PI / 2.0, PI / 4.0), 0.0);
        assert_eq!(angle_density(-1.0, 2.0), 0.0);
        // Equilateral value: sqrt(3)/pi.
        let peak = angle_density(EQUILATERAL, EQUILATERAL);
        assert!((peak - 3.0f64.sqrt() / PI).abs() < 1e-12, "{peak}");
        // Symmetry under swapping alpha and beta, and under replacing
        // (alpha, beta) by (beta, delta): the density depends only on the
        // unordered angle triple.
        let (a, b) = (1.9, 2.5);
        let d = 2.0 * PI - a - b;
        assert!((angle_density(a, b) - angle_density(b, a)).abs() < 1e-15);
        assert!((angle_density(a, b) - angle_density(b, d)).abs() < 1e-15);
    }

    #[test]
    fn density_is_nonnegative_on_a_grid() {
        let n = 200;
        for i in 1..n {
            for j in 1..n {
                let alpha = PI * i as f64 / n as f64;
                let beta = PI * j as f64 / n as f64;
                assert!(
                    angle_density(alpha, beta) >= 0.0,
                    "negative density at ({alpha}, {beta})"
                );
            }
        }
    }

    #[test]
    fn equilateral_triangle_surface_is_exact() {
        // cot(pi/3) = 1/sqrt(3) three times: S = (l^2/4) * 3/ (1/sqrt(3)) ...
        // for l = 20: S = 100 * sqrt(3).
        let angles = CrossroadAngles::new(EQUILATERAL, EQUILATERAL).unwrap();
        let s = triangle_surface(&geometry(SurfaceKind::Triangle), angles);
        assert!((s - 100.0 * 3.0f64.sqrt()).abs() < 1e-9, "{s}");
    }

    #[test]
    fn equilateral_circumcircle_and_sides_are_exact() {
        let angles = CrossroadAngles::new(EQUILATERAL, EQUILATERAL).unwrap();
        let geo = geometry(SurfaceKind::Circumcircle);
        let disc = circumcircle_surface(&geo, angles);
        assert!((disc - 400.0 * PI / 3.0).abs() < 1e-9, "{disc}");

        let (ab, bc, ca) = side_lengths(&geo, angles);
        for side in [ab, bc, ca] {
            assert!((side - 20.0).abs() < 1e-9, "{side}");
        }
        // Dispatch honors the surface convention.
        assert_eq!(crossroad_surface(&geo, angles), disc);
        assert_eq!(
            crossroad_surface(&geometry(SurfaceKind::Triangle), angles),
            triangle_surface(&geo, angles)
        );
    }

    #[test]
    fn surfaces_scale_with_width_squared() {
        let angles = CrossroadAngles::new(1.8, 2.4).unwrap();
        let narrow = CrossroadGeometry::new(10.0, SurfaceKind::Triangle).unwrap();
        let wide = CrossroadGeometry::new(20.0, SurfaceKind::Triangle).unwrap();
        let ratio = triangle_surface(&wide, angles) / triangle_surface(&narrow, angles);
        assert!((ratio - 4.0).abs() < 1e-12);

        let narrow_disc = CrossroadGeometry::new(10.0, SurfaceKind::Circumcircle).unwrap();
        let wide_disc = CrossroadGeometry::new(20.0, SurfaceKind::Circumcircle).unwrap();
        let disc_ratio =
            circumcircle_surface(&wide_disc, angles) / circumcircle_surface(&narrow_disc, angles);
        assert!((disc_ratio - 4.0).abs() < 1e-12);
    }

    #[test]
    fn near_degenerate_angles_stay_finite_and_huge() {
        let l = 20.0;
        let s = triangle_surface_raw(l, 1e-12, PI - 0.5);
        assert!(s.is_finite());
        assert!(s > 1e10, "clamped sliver should be enormous, got {s}");
        let disc = circumcircle_surface_raw(l, 1e-12, PI - 0.5);
        assert!(disc.is_finite());
        assert!(disc >= s);
    }

    #[test]
    fn circumcircle_contains_triangle_on_random_angles() {
        // The disc through the triangle corners always has at least the
        // triangle's area; check across the domain.
        let n = 60;
        for i in 1..n {
            for j in 1..n {
                let alpha = PI * i as f64 / n as f64;
                let beta = PI * j as f64 / n as f64;
                if !CrossroadAngles::in_domain(alpha, beta) {
                    continue;
                }
                let s = triangle_surface_raw(20.0, alpha, beta);
                let disc = circumcircle_surface_raw(20.0, alpha, beta);
                assert!(
                    disc >= s - 1e-9,
                    "disc {disc} smaller than triangle {s} at ({alpha}, {beta})"
                );
            }
        }
    }

    #[test]
    fn vacancy_is_one_without_users_and_decreases() {
        let geo = geometry(SurfaceKind::Circumcircle);
        assert_eq!(mean_vacancy(0.0, &geo).unwrap(), 1.0);
        assert!(mean_vacancy(-1.0, &geo).is_err());
        assert!(mean_vacancy(f64::NAN, &geo).is_err());

        let mut prev = 1.0;
        for lambda in [5.0, 15.0, 45.0, 90.0, 200.0] {
            let e = mean_vacancy(lambda, &geo).unwrap();
            assert!(e > 0.0 && e < prev, "E({lambda}) = {e}, prev {prev}");
            prev = e;
        }
    }

    #[test]
    fn triangle_vacancy_dominates_circle_vacancy() {
        // Smaller blocking surface -> larger vacancy, at every intensity.
        for lambda in [10.0, 45.0, 80.0] {
            let tri = mean_vacancy(lambda, &geometry(SurfaceKind::Triangle)).unwrap();
            let circ = mean_vacancy(lambda, &geometry(SurfaceKind::Circumcircle)).unwrap();
            assert!(tri > circ, "lambda {lambda}: {tri} <= {circ}");
        }
    }

    #[test]
    fn occupation_interpolates_between_relay_fraction_and_one() {
        let geo = geometry(SurfaceKind::Circumcircle);
        // Without users, occupation equals the relay fraction.
        let bare = occupation_probability(&OccupationInputs {
            lambda_per_km: 0.0,
            relay_fraction: 0.3,
            geometry: geo,
        })
        .unwrap();
        assert!((bare - 0.3).abs() < 1e-15);
        // Full relay coverage saturates regardless of users.
        let full = occupation_probability(&OccupationInputs {
            lambda_per_km: 45.0,
            relay_fraction: 1.0,
            geometry: geo,
        })
        .unwrap();
        assert!((full - 1.0).abs() < 1e-15);
        // Invalid fraction rejected.
        assert!(occupation_probability(&OccupationInputs {
            lambda_per_km: 45.0,
            relay_fraction: 1.5,
            geometry: geo,
        })
        .is_err());
    }

    #[test]
    fn inversion_round_trips_through_occupation() {
        let geo = geometry(SurfaceKind::Circumcircle);
        for (lambda, p) in [(0.0, 0.25), (30.0, 0.1), (45.0, 0.6), (80.0, 0.0)] {
            let target = occupation_probability(&OccupationInputs {
                lambda_per_km: lambda,
                relay_fraction: p,
                geometry: geo,
            })
            .unwrap();
            let back = invert_for_relay_fraction(target, lambda, &geo).unwrap();
            assert!(
                (back - p).abs() < 1e-12,
                "lambda {lambda}: p {p} -> target {target} -> {back}"
            );
        }
        // Without users the fraction must equal the target itself.
        let direct = invert_for_relay_fraction(0.42, 0.0, &geo).unwrap();
        assert!((direct - 0.42).abs() < 1e-15);
        assert!(invert_for_relay_fraction(1.2, 10.0, &geo).is_err());
    }

    #[test]
    fn inversion_goes_negative_when_users_suffice() {
        // At high intensity users alone occupy most crossroads; a modest
        // target then needs a negative "fraction" (reported unclamped).
        let geo = geometry(SurfaceKind::Circumcircle);
        let p = invert_for_relay_fraction(0.2, 300.0, &geo).unwrap();
        assert!(p < 0.0, "expected negative solution, got {p}");
    }
}

//! Planar primitives: points, rectangles, observation windows and
//! parametric line clipping.
//!
//! Coordinates are in kilometers throughout.

use crate::error::{Error, Result};

/// A point in the plane, kilometers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    /// Euclidean distance to `other`.
    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Axis-aligned rectangle, kilometers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl Rect {
    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    /// Closed containment (boundary counts as inside).
    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }

    /// Open containment (boundary counts as outside).
    pub fn contains_strict(&self, p: Point) -> bool {
        p.x > self.x_min && p.x < self.x_max && p.y > self.y_min && p.y < self.y_max
    }

    /// Clips the parametric line `p + t*d` for `t` in `[t0, t1]` to this
    /// rectangle (Liang-Barsky). Returns the clipped parameter interval, or
    /// `None` when the line misses the rectangle, the interval collapses, or
    /// the inputs are not finite. `t1` may be `f64::INFINITY` to clip a ray.
    pub fn clip_line(&self, p: Point, d: Point, t0: f64, t1: f64) -> Option<(f64, f64)> {
        if !p.is_finite() || !d.is_finite() || (d.x == 0.0 && d.y == 0.0) {
            return None;
        }
        let mut lo = t0;
        let mut hi = t1;
        // Each side contributes a half-plane constraint den*t <= num.
        let constraints = [
            (-d.x, p.x - self.x_min),
            (d.x, self.x_max - p.x),
            (-d.y, p.y - self.y_min),
            (d.y, self.y_max - p.y),
        ];
        for (den, num) in constraints {
            if den == 0.0 {
                if num < 0.0 {
                    return None; // parallel and outside
                }
            } else {
                let r = num / den;
                if den < 0.0 {
                    lo = lo.max(r);
                } else {
                    hi = hi.min(r);
                }
            }
        }
        if lo < hi {
            Some((lo, hi))
        } else {
            None
        }
    }
}

/// Rectangular observation window plus an interior margin.
///
/// Statistics that would be biased by boundary effects (crossroad counts,
/// angle samples) are restricted to the interior rectangle obtained by
/// shrinking the window by `margin` on every side. A margin of zero makes
/// the interior coincide with the window itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    x_min: f64,
    y_min: f64,
    x_max: f64,
    y_max: f64,
    margin: f64,
}

impl Window {
    /// Builds a window, enforcing `x_max > x_min`, `y_max > y_min`,
    /// `margin >= 0` and `2*margin < min(width, height)`.
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64, margin: f64) -> Result<Self> {
        let all_finite = [x_min, y_min, x_max, y_max, margin]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::InvalidInput("window bounds must be finite".into()));
        }
        if x_max <= x_min || y_max <= y_min {
            return Err(Error::InvalidInput(format!(
                "window must have positive extent, got [{x_min}, {x_max}] x [{y_min}, {y_max}]"
            )));
        }
        if margin < 0.0 {
            return Err(Error::InvalidInput("margin must be non-negative".into()));
        }
        let min_side = (x_max - x_min).min(y_max - y_min);
        if 2.0 * margin >= min_side {
            return Err(Error::InvalidInput(format!(
                "margin {margin} km leaves no interior in a window of min side {min_side} km"
            )));
        }
        Ok(Window {
            x_min,
            y_min,
            x_max,
            y_max,
            margin,
        })
    }

    /// Convenience: a `width x height` window with its lower-left corner at
    /// the origin.
    pub fn at_origin(width: f64, height: f64, margin: f64) -> Result<Self> {
        Window::new(0.0, 0.0, width, height, margin)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn y_min(&self) -> f64 {
        self.y_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn y_max(&self) -> f64 {
        self.y_max
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    /// The full window rectangle.
    pub fn rect(&self) -> Rect {
        Rect {
            x_min: self.x_min,
            y_min: self.y_min,
            x_max: self.x_max,
            y_max: self.y_max,
        }
    }

    /// The interior rectangle, shrunk by the margin on every side.
    pub fn interior(&self) -> Rect {
        Rect {
            x_min: self.x_min + self.margin,
            y_min: self.y_min + self.margin,
            x_max: self.x_max - self.margin,
            y_max: self.y_max - self.margin,
        }
    }

    /// Same bounds with a different margin.
    pub fn with_margin(&self, margin: f64) -> Result<Self> {
        Window::new(self.x_min, self.y_min, self.x_max, self.y_max, margin)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_rejects_bad_bounds() {
        assert!(Window::new(0.0, 0.0, 0.0, 1.0, 0.0).is_err());
        assert!(Window::new(0.0, 0.0, 5.0, 5.0, -0.1).is_err());
        assert!(Window::new(0.0, 0.0, 5.0, 5.0, 2.5).is_err());
        assert!(Window::new(0.0, 0.0, f64::NAN, 5.0, 0.0).is_err());
        assert!(Window::new(0.0, 0.0, 5.0, 5.0, 2.4999).is_ok());
    }

    #[test]
    fn interior_shrinks_by_margin() {
        let w = Window::new(-1.0, -2.0, 4.0, 3.0, 0.5).unwrap();
        let int = w.interior();
        assert_eq!(int.x_min, -0.5);
        assert_eq!(int.y_min, -1.5);
        assert_eq!(int.x_max, 3.5);
        assert_eq!(int.y_max, 2.5);
        assert!((w.area() - 25.0).abs() < 1e-12);
    }

    #[test]
    fn clip_keeps_interior_segment() {
        let r = Rect {
            x_min: 0.0,
            y_min: 0.0,
            x_max: 1.0,
            y_max: 1.0,
        };
        let p = Point::new(0.2, 0.2);
        let d = Point::new(0.3, 0.1);
        let (t0, t1) = r.clip_line(p, d, 0.0, 1.0).unwrap();
        assert_eq!((t0, t1), (0.0, 1.0));
    }

    #[test]
    fn clip_cuts_crossing_segment() {
        let r = Rect {
            x_min: 0.0,
            y_min: 0.0,
            x_max: 1.0,
            y_max: 1.0,
        };
        // Horizontal line entering at x=0 and leaving at x=1.
        let p = Point::new(-1.0, 0.5);
        let d = Point::new(2.0, 0.0);
        let (t0, t1) = r.clip_line(p, d, 0.0, 1.0).unwrap();
        assert!((t0 - 0.5).abs() < 1e-15);
        assert!((t1 - 1.0).abs() < 1e-15);

        // Miss entirely.
        assert!(r
            .clip_line(Point::new(-1.0, 2.0), Point::new(2.0, 0.0), 0.0, 1.0)
            .is_none());
    }

    #[test]
    fn clip_handles_rays() {
        let r = Rect {
            x_min: 0.0,
            y_min: 0.0,
            x_max: 2.0,
            y_max: 2.0,
        };
        let (t0, t1) = r
            .clip_line(
                Point::new(1.0, 1.0),
                Point::new(0.0, 1.0),
                0.0,
                f64::INFINITY,
            )
            .unwrap();
        assert_eq!(t0, 0.0);
        assert!((t1 - 1.0).abs() < 1e-15);

        // Ray starting outside pointing away.
        assert!(r
            .clip_line(
                Point::new(3.0, 1.0),
                Point::new(1.0, 0.0),
                0.0,
                f64::INFINITY
            )
            .is_none());
        // Degenerate direction and non-finite origin.
        assert!(r
            .clip_line(Point::new(1.0, 1.0), Point::new(0.0, 0.0), 0.0, 1.0)
            .is_none());
        assert!(r
            .clip_line(
                Point::new(f64::INFINITY, 1.0),
                Point::new(1.0, 0.0),
                0.0,
                1.0
            )
            .is_none());
    }
}

use std::fmt;

/// Largest phase-space dimension handled (torus base of dimension 3 plus a fiber).
pub const MAX_DIM: usize = 4;

/// Reduce a coordinate to the canonical representative in `[0, 1)`.
#[inline]
pub fn wrap(x: f64) -> f64 {
    let r = x - x.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// `min(|a - b|, 1 - |a - b|)` for reduced coordinates.
#[inline]
pub fn circle_distance(a: f64, b: f64) -> f64 {
    let d = (wrap(a) - wrap(b)).abs();
    d.min(1.0 - d)
}

/// A point on the circle, a torus, or a torus-times-circle.
///
/// Coordinates are always stored reduced mod 1.
#[derive(Clone, Copy, PartialEq)]
pub struct Point {
    coords: [f64; MAX_DIM],
    dim: usize,
}

impl Point {
    pub fn new(coords: &[f64]) -> Self {
        assert!(
            !coords.is_empty() && coords.len() <= MAX_DIM,
            "point dimension {} out of range",
            coords.len()
        );
        let mut c = [0.0; MAX_DIM];
        for (dst, &src) in c.iter_mut().zip(coords) {
            *dst = wrap(src);
        }
        Self {
            coords: c,
            dim: coords.len(),
        }
    }

    pub fn on_circle(x: f64) -> Self {
        Self::new(&[x])
    }

    /// Concatenate a base point with a fiber coordinate.
    pub fn with_fiber(base: &Point, y: f64) -> Self {
        let mut c = base.coords;
        assert!(base.dim < MAX_DIM, "no room for a fiber coordinate");
        c[base.dim] = wrap(y);
        Self {
            coords: c,
            dim: base.dim + 1,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords[..self.dim]
    }

    /// First coordinate; the whole point for circle maps.
    pub fn x(&self) -> f64 {
        self.coords[0]
    }

    /// The last coordinate (the fiber coordinate of a skew-product point).
    pub fn last(&self) -> f64 {
        self.coords[self.dim - 1]
    }

    /// Drop the last coordinate.
    pub fn head(&self) -> Point {
        assert!(self.dim > 1);
        Self {
            coords: self.coords,
            dim: self.dim - 1,
        }
    }

    /// Max over coordinates of the circle distance.
    pub fn distance(&self, other: &Point) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.coords()
            .iter()
            .zip(other.coords())
            .map(|(&a, &b)| circle_distance(a, b))
            .fold(0.0, f64::max)
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Point").field(&self.coords()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_is_canonical() {
        assert_eq!(wrap(1.0), 0.0);
        assert_eq!(wrap(-0.25), 0.75);
        assert_eq!(wrap(2.5), 0.5);
        assert_eq!(wrap(-1e-18), 0.0);
    }

    #[test]
    fn circle_distance_wraps() {
        assert!((circle_distance(0.95, 0.05) - 0.1).abs() < 1e-15);
        assert_eq!(circle_distance(0.3, 0.3), 0.0);
    }
}

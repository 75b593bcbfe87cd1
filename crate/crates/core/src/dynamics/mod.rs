//! Map families: evaluation, derivatives, branch inverses and preimage trees.
//!
//! Every map is a finite-degree covering (possibly with an escape hole for
//! open piecewise-linear maps), so the preimage set of any point is
//! enumerable branch by branch. Preimages are always returned in branch
//! order; for skew products that order is lexicographic in
//! (base branch, fiber branch).

mod circle;
mod periodic;
mod point;
mod skew;
mod torus;
mod tree;

pub use circle::{CircleKind, CircleMap, Repeller, INVERSE_TOL};
pub use periodic::{periodic_point, periodic_points};
pub use point::{circle_distance, wrap, Point, MAX_DIM};
pub use skew::{Base, FiberFamily, SkewClass, SkewProduct};
pub use torus::TorusEndomorphism;
pub use tree::{preimage_tree, PreimageTree, DEFAULT_NODE_BUDGET};

pub(crate) use circle::decode_word;

use crate::error::Result;

/// Any of the supported phase-space maps.
#[derive(Clone, Debug, PartialEq)]
pub enum MapSystem {
    Circle(CircleMap),
    Torus(TorusEndomorphism),
    Skew(SkewProduct),
}

impl From<CircleMap> for MapSystem {
    fn from(m: CircleMap) -> Self {
        MapSystem::Circle(m)
    }
}

impl From<TorusEndomorphism> for MapSystem {
    fn from(m: TorusEndomorphism) -> Self {
        MapSystem::Torus(m)
    }
}

impl From<SkewProduct> for MapSystem {
    fn from(m: SkewProduct) -> Self {
        MapSystem::Skew(m)
    }
}

impl MapSystem {
    pub fn dim(&self) -> usize {
        match self {
            MapSystem::Circle(_) => 1,
            MapSystem::Torus(t) => t.dim(),
            MapSystem::Skew(s) => s.base_dim() + 1,
        }
    }

    pub fn degree(&self) -> usize {
        match self {
            MapSystem::Circle(c) => c.branch_count(),
            MapSystem::Torus(t) => t.degree(),
            MapSystem::Skew(s) => s.degree(),
        }
    }

    pub fn as_circle(&self) -> Option<&CircleMap> {
        match self {
            MapSystem::Circle(c) => Some(c),
            _ => None,
        }
    }

    pub fn as_skew(&self) -> Option<&SkewProduct> {
        match self {
            MapSystem::Skew(s) => Some(s),
            _ => None,
        }
    }

    /// `f(p)`.
    pub fn eval(&self, p: &Point) -> Point {
        match self {
            MapSystem::Circle(c) => Point::on_circle(c.eval(p.x())),
            MapSystem::Torus(t) => t.eval(p),
            MapSystem::Skew(s) => s.eval(p),
        }
    }

    /// `f^n(p)`.
    pub fn iterate(&self, p: &Point, n: usize) -> Point {
        (0..n).fold(*p, |q, _| self.eval(&q))
    }

    /// Preimage of `p` along branch `j`.
    pub fn inverse_branch(&self, j: usize, p: &Point) -> Result<Point> {
        match self {
            MapSystem::Circle(c) => Ok(Point::on_circle(c.inverse_branch(j, p.x())?)),
            MapSystem::Torus(t) => t.inverse_branch(j, p),
            MapSystem::Skew(s) => s.inverse_branch(j, p),
        }
    }

    /// Append all `degree()` preimages of `p`, in branch order.
    pub fn preimages_into(&self, p: &Point, out: &mut Vec<Point>) -> Result<()> {
        match self {
            MapSystem::Skew(s) => s.preimages_into(p, out),
            _ => {
                for j in 0..self.degree() {
                    out.push(self.inverse_branch(j, p)?);
                }
                Ok(())
            }
        }
    }

    pub fn preimages(&self, p: &Point) -> Result<Vec<Point>> {
        let mut out = Vec::with_capacity(self.degree());
        self.preimages_into(p, &mut out)?;
        Ok(out)
    }

    /// `log` of the conorm of `Df` at `p` (one step). Skew products use the
    /// smaller of the base conorm and the fiber derivative.
    pub fn log_conorm(&self, p: &Point) -> f64 {
        match self {
            MapSystem::Circle(c) => c.derivative(p.x()).abs().ln(),
            MapSystem::Torus(t) => t.log_conorm(1),
            MapSystem::Skew(s) => s
                .base()
                .log_conorm(&p.head())
                .min(s.fiber_derivative(p).abs().ln()),
        }
    }

    /// `log` of the conorm of `Df^l` at `p`.
    ///
    /// One-dimensional maps: the Birkhoff sum of `log|T'|`. Torus maps: the
    /// smallest singular value of `A^l`. Skew products: the smaller of the
    /// accumulated base and fiber expansions.
    pub fn log_conorm_iterate(&self, p: &Point, l: usize) -> f64 {
        match self {
            MapSystem::Circle(c) => {
                let mut y = p.x();
                let mut sum = 0.0;
                for _ in 0..l {
                    sum += c.derivative(y).abs().ln();
                    y = c.eval(y);
                }
                sum
            }
            MapSystem::Torus(t) => t.log_conorm(l),
            MapSystem::Skew(s) => {
                let mut q = *p;
                let mut fiber = 0.0;
                let mut base = 0.0;
                for _ in 0..l {
                    fiber += s.fiber_derivative(&q).abs().ln();
                    if let Base::Circle(c) = s.base() {
                        base += c.derivative(q.x()).abs().ln();
                    }
                    q = s.eval(&q);
                }
                if let Base::Torus(t) = s.base() {
                    base = t.log_conorm(l);
                }
                base.min(fiber)
            }
        }
    }

    /// `(1/n) log` of the conorm of `Df^n` along the orbit of `p`.
    pub fn derivative_min_expansion(&self, p: &Point, n: usize) -> f64 {
        assert!(n >= 1, "iterate count must be positive");
        self.log_conorm_iterate(p, n) / n as f64
    }

    /// Uniformly expanding (no neutral points).
    pub fn is_expanding(&self) -> bool {
        match self {
            MapSystem::Circle(c) => c.is_expanding(),
            MapSystem::Torus(_) => true,
            MapSystem::Skew(s) => {
                s.base().is_expanding()
                    && match s.family() {
                        FiberFamily::Constant { .. } => {
                            s.fiber_at(&Point::new(&vec![0.0; s.base_dim()])).is_expanding()
                        }
                        _ => false,
                    }
            }
        }
    }

    /// Smooth covering map (trigonometric collocation is spectrally accurate).
    pub fn is_smooth(&self) -> bool {
        match self {
            MapSystem::Circle(c) => c.is_smooth(),
            MapSystem::Torus(_) => true,
            MapSystem::Skew(s) => s.is_smooth(),
        }
    }

    /// Whether some point has `|Df| = 1` in an expanding direction.
    pub fn has_neutral_points(&self) -> bool {
        match self {
            MapSystem::Circle(c) => c.is_intermittent(),
            MapSystem::Torus(_) => false,
            MapSystem::Skew(s) => {
                let origin = Point::new(&vec![0.0; s.base_dim()]);
                s.base().is_intermittent() || s.fiber_at(&origin).is_intermittent()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_min_expansion_examples() {
        let d = MapSystem::from(CircleMap::doubling());
        assert!((d.derivative_min_expansion(&Point::on_circle(0.123), 7) - 2f64.ln()).abs() < 1e-15);
        let mp = MapSystem::from(CircleMap::manneville_pomeau(1.0).unwrap());
        assert_eq!(mp.derivative_min_expansion(&Point::on_circle(0.0), 10), 0.0);
        // 0.75 is the fixed point of the slope-3 branch.
        let pl = MapSystem::from(CircleMap::piecewise_linear(&[2.0, 3.0]).unwrap());
        let p = Point::on_circle(0.75);
        assert!((pl.derivative_min_expansion(&p, 2) - 3f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn torus_preimage_count() {
        let g = MapSystem::from(TorusEndomorphism::new(vec![vec![3, 1], vec![1, 2]]).unwrap());
        assert_eq!(g.preimages(&Point::new(&[0.1, 0.9])).unwrap().len(), 5);
    }
}

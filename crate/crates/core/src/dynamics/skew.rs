//! Skew products `F(x, y) = (g(x), f_x(y))` over a torus or circle base.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::borrow::Cow;
use std::f64::consts::PI;

use super::circle::{CircleKind, CircleMap};
use super::point::{wrap, Point};
use super::torus::TorusEndomorphism;
use crate::error::{Error, Result};

/// The base map `g`.
#[derive(Clone, Debug, PartialEq)]
pub enum Base {
    Torus(TorusEndomorphism),
    Circle(CircleMap),
}

impl Base {
    pub fn dim(&self) -> usize {
        match self {
            Base::Torus(t) => t.dim(),
            Base::Circle(_) => 1,
        }
    }

    pub fn degree(&self) -> usize {
        match self {
            Base::Torus(t) => t.degree(),
            Base::Circle(c) => c.branch_count(),
        }
    }

    pub fn eval(&self, x: &Point) -> Point {
        match self {
            Base::Torus(t) => t.eval(x),
            Base::Circle(c) => Point::on_circle(c.eval(x.x())),
        }
    }

    pub fn inverse_branch(&self, j: usize, x: &Point) -> Result<Point> {
        match self {
            Base::Torus(t) => t.inverse_branch(j, x),
            Base::Circle(c) => Ok(Point::on_circle(c.inverse_branch(j, x.x())?)),
        }
    }

    pub fn is_intermittent(&self) -> bool {
        matches!(self, Base::Circle(c) if c.is_intermittent())
    }

    pub fn is_expanding(&self) -> bool {
        match self {
            Base::Torus(_) => true,
            Base::Circle(c) => c.is_expanding(),
        }
    }

    pub fn is_smooth(&self) -> bool {
        match self {
            Base::Torus(_) => true,
            Base::Circle(c) => c.is_smooth(),
        }
    }

    /// `log` of the conorm of `Dg` at `x` (one step).
    pub fn log_conorm(&self, x: &Point) -> f64 {
        match self {
            Base::Torus(t) => t.singular_values().0.ln(),
            Base::Circle(c) => c.derivative(x.x()).abs().ln(),
        }
    }

    /// `log` of the norm of `Dg` at `x` (one step).
    pub fn log_norm(&self, x: &Point) -> f64 {
        match self {
            Base::Torus(t) => t.singular_values().1.ln(),
            Base::Circle(c) => c.derivative(x.x()).abs().ln(),
        }
    }
}

/// The fiber maps `x -> f_x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FiberFamily {
    /// `f_x = f` for every `x`.
    Constant { map: CircleKind },
    /// LSV fibers with exponent `alpha + amplitude * sin(2 pi x_1)`.
    /// Breakpoints stay at `0` and `1/2`.
    VaryingLsv { alpha: f64, amplitude: f64 },
    /// `f_x(y) = LSV(y - amplitude * sin(2 pi x_1))`: breakpoints move with `x`.
    RotatedLsv { alpha: f64, amplitude: f64 },
}

/// Classes of intermittent skew products.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum SkewClass {
    /// Breakpoints may depend on the base point.
    TM1,
    /// Constant breakpoints over an expanding base.
    TM2,
    /// Constant breakpoints over an intermittent base.
    TM3,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SkewProduct {
    base: Base,
    family: FiberFamily,
    constant_fiber: Option<CircleMap>,
    fiber_degree: usize,
}

impl SkewProduct {
    pub fn new(base: Base, family: FiberFamily) -> Result<Self> {
        let constant_fiber = match &family {
            FiberFamily::Constant { map } => Some(CircleMap::new(map.clone())?),
            FiberFamily::VaryingLsv { alpha, amplitude }
            | FiberFamily::RotatedLsv { alpha, amplitude } => {
                if !(*alpha > 0.0) {
                    return Err(Error::InvalidMap(format!("fiber exponent {alpha} must be positive")));
                }
                if matches!(family, FiberFamily::VaryingLsv { .. }) && !(amplitude.abs() < *alpha) {
                    return Err(Error::InvalidMap(format!(
                        "exponent amplitude {amplitude} must be smaller than alpha = {alpha}"
                    )));
                }
                None
            }
        };
        if base.dim() + 1 > super::point::MAX_DIM {
            return Err(Error::InvalidMap("base dimension too large".into()));
        }
        let fiber_degree = match &constant_fiber {
            Some(f) => f.branch_count(),
            None => 2,
        };
        if let Some(f) = &constant_fiber {
            if !f.is_closed() {
                return Err(Error::InvalidMap("fiber maps must be closed circle maps".into()));
            }
        }
        Ok(Self {
            base,
            family,
            constant_fiber,
            fiber_degree,
        })
    }

    pub fn base(&self) -> &Base {
        &self.base
    }

    pub fn family(&self) -> &FiberFamily {
        &self.family
    }

    pub fn base_dim(&self) -> usize {
        self.base.dim()
    }

    pub fn fiber_degree(&self) -> usize {
        self.fiber_degree
    }

    pub fn degree(&self) -> usize {
        self.base.degree() * self.fiber_degree
    }

    /// Whether `alpha_{j,x}` is independent of `x`.
    pub fn constant_breakpoints(&self) -> bool {
        !matches!(self.family, FiberFamily::RotatedLsv { .. })
    }

    pub fn class(&self) -> SkewClass {
        if !self.constant_breakpoints() {
            SkewClass::TM1
        } else if self.base.is_intermittent() {
            SkewClass::TM3
        } else {
            SkewClass::TM2
        }
    }

    /// The fiber map over base point `x`.
    pub fn fiber_at(&self, x: &Point) -> Cow<'_, CircleMap> {
        if let Some(f) = &self.constant_fiber {
            return Cow::Borrowed(f);
        }
        let s = (2.0 * PI * x.x()).sin();
        match self.family {
            FiberFamily::VaryingLsv { alpha, amplitude } => Cow::Owned(
                CircleMap::lsv(alpha + amplitude * s).expect("exponent validated at construction"),
            ),
            FiberFamily::RotatedLsv { alpha, amplitude } => Cow::Owned(
                CircleMap::lsv(alpha)
                    .expect("exponent validated at construction")
                    .rotated(wrap(amplitude * s)),
            ),
            FiberFamily::Constant { .. } => unreachable!(),
        }
    }

    /// Fiber breakpoints `alpha_{j,x}`.
    pub fn fiber_breakpoints(&self, x: &Point) -> Vec<f64> {
        self.fiber_at(x).breakpoints()
    }

    /// Breakpoints `x_1..` of an intermittent circle base; empty otherwise.
    pub fn base_breakpoints(&self) -> Vec<f64> {
        match &self.base {
            Base::Circle(c) if c.is_intermittent() => c.breakpoints(),
            _ => Vec::new(),
        }
    }

    pub fn eval(&self, p: &Point) -> Point {
        let x = p.head();
        let y = p.last();
        let fy = self.fiber_at(&x).eval(y);
        Point::with_fiber(&self.base.eval(&x), fy)
    }

    /// Branch `j = base_branch * fiber_degree + fiber_branch`.
    pub fn inverse_branch(&self, j: usize, p: &Point) -> Result<Point> {
        if j >= self.degree() {
            return Err(Error::InvalidArgument(format!(
                "branch {j} out of range for degree {}",
                self.degree()
            )));
        }
        let (jb, jf) = (j / self.fiber_degree, j % self.fiber_degree);
        let xb = self.base.inverse_branch(jb, &p.head())?;
        let y = self.fiber_at(&xb).inverse_branch(jf, p.last())?;
        Ok(Point::with_fiber(&xb, y))
    }

    pub fn preimages_into(&self, p: &Point, out: &mut Vec<Point>) -> Result<()> {
        let x = p.head();
        let y = p.last();
        for jb in 0..self.base.degree() {
            let xb = self.base.inverse_branch(jb, &x)?;
            let f = self.fiber_at(&xb);
            for jf in 0..self.fiber_degree {
                out.push(Point::with_fiber(&xb, f.inverse_branch(jf, y)?));
            }
        }
        Ok(())
    }

    /// `d f_x / dy` at `(x, y)`.
    pub fn fiber_derivative(&self, p: &Point) -> f64 {
        self.fiber_at(&p.head()).derivative(p.last())
    }

    /// Full derivative `DF(x, y)`; lower block-triangular. The coupling row
    /// `d f_x(y) / dx` is a central finite difference.
    pub fn jacobian(&self, p: &Point) -> DMatrix<f64> {
        let x = p.head();
        let d = self.base_dim();
        let mut m = DMatrix::zeros(d + 1, d + 1);
        match &self.base {
            Base::Torus(t) => {
                for i in 0..d {
                    for j in 0..d {
                        m[(i, j)] = t.matrix()[i][j] as f64;
                    }
                }
            }
            Base::Circle(c) => m[(0, 0)] = c.derivative(x.x()),
        }
        let h = 1e-6;
        let y = p.last();
        for j in 0..d {
            let mut plus = x.coords().to_vec();
            let mut minus = x.coords().to_vec();
            plus[j] += h;
            minus[j] -= h;
            let fp = self.fiber_at(&Point::new(&plus)).eval(y);
            let fm = self.fiber_at(&Point::new(&minus)).eval(y);
            let mut diff = fp - fm;
            diff -= diff.round();
            m[(d, j)] = diff / (2.0 * h);
        }
        m[(d, d)] = self.fiber_derivative(p);
        m
    }

    pub fn is_smooth(&self) -> bool {
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tm2() -> SkewProduct {
        SkewProduct::new(
            Base::Circle(CircleMap::doubling()),
            FiberFamily::VaryingLsv {
                alpha: 0.5,
                amplitude: 0.2,
            },
        )
        .unwrap()
    }

    #[test]
    fn class_tags() {
        assert_eq!(tm2().class(), SkewClass::TM2);
        let tm1 = SkewProduct::new(
            Base::Circle(CircleMap::doubling()),
            FiberFamily::RotatedLsv {
                alpha: 0.5,
                amplitude: 0.1,
            },
        )
        .unwrap();
        assert_eq!(tm1.class(), SkewClass::TM1);
        let tm3 = SkewProduct::new(
            Base::Circle(CircleMap::manneville_pomeau(0.5).unwrap()),
            FiberFamily::Constant {
                map: CircleKind::Lsv { alpha: 0.4 },
            },
        )
        .unwrap();
        assert_eq!(tm3.class(), SkewClass::TM3);
        assert_eq!(tm3.base_breakpoints().len(), 2);
    }

    #[test]
    fn componentwise_evaluation() {
        let f = tm2();
        let p = Point::new(&[0.3, 0.2]);
        let q = f.eval(&p);
        let fiber = CircleMap::lsv(0.5 + 0.2 * (2.0 * PI * 0.3).sin()).unwrap();
        assert!((q.x() - 0.6).abs() < 1e-15);
        assert!((q.last() - fiber.eval(0.2)).abs() < 1e-15);
    }

    #[test]
    fn preimages_round_trip_in_lexicographic_order() {
        let f = tm2();
        let p = Point::new(&[0.71, 0.42]);
        let mut pre = Vec::new();
        f.preimages_into(&p, &mut pre).unwrap();
        assert_eq!(pre.len(), 4);
        for (j, q) in pre.iter().enumerate() {
            assert!(f.eval(q).distance(&p) < 1e-12);
            assert_eq!(f.inverse_branch(j, &p).unwrap(), *q);
        }
        assert!(pre[0].x() < 0.5 && pre[2].x() >= 0.5);
    }

    #[test]
    fn jacobian_fiber_entry_matches_finite_difference() {
        let f = tm2();
        let p = Point::new(&[0.13, 0.31]);
        let jac = f.jacobian(&p);
        let h = 1e-7;
        let fd = (f.eval(&Point::new(&[0.13, 0.31 + h])).last()
            - f.eval(&Point::new(&[0.13, 0.31 - h])).last())
            / (2.0 * h);
        assert!(((jac[(1, 1)] - fd) / fd).abs() < 1e-6);
        assert_eq!(jac[(0, 1)], 0.0);
    }
}

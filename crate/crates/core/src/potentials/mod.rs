//! Potentials `phi`: evaluation, Birkhoff sums, the geometric potential,
//! breakpoint flattening and a periodic-orbit coboundary test.

mod cohomology;
mod flatten;

pub use cohomology::{cohomology_to_constant_test, CoboundaryVerdict, PeriodicWitness};
pub use flatten::{flatten, plateau_weight};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::dynamics::{MapSystem, Point};
use crate::error::{Error, Result};

type Evaluator = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;

/// Regularity class of a potential.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Regularity {
    Smooth,
    Holder { exponent: f64 },
}

/// One term `a cos(2 pi k.p) + b sin(2 pi k.p)` of a trigonometric polynomial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrigTerm {
    pub freq: Vec<i32>,
    #[serde(default)]
    pub cos: f64,
    #[serde(default)]
    pub sin: f64,
}

/// Which derivative the geometric potential uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeometricScope {
    /// `-log|T'|` of a one-dimensional map.
    Full,
    /// `-log|d f_x/dy|` of a skew product.
    Fiber,
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct FlattenTag {
    pub epsilon: f64,
    pub map: MapSystem,
}

/// An evaluable potential with regularity metadata.
#[derive(Clone)]
pub struct Potential {
    eval: Evaluator,
    regularity: Regularity,
    sup_norm_bound: f64,
    holder_constant: f64,
    flatten: Option<FlattenTag>,
    label: String,
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Potential")
            .field("label", &self.label)
            .field("regularity", &self.regularity)
            .field("sup_norm_bound", &self.sup_norm_bound)
            .field("holder_constant", &self.holder_constant)
            .field("flatten_radius", &self.flatten_radius())
            .finish()
    }
}

impl Potential {
    /// A potential from an arbitrary evaluator. `sup_norm_bound` must bound
    /// `|phi|`; `lipschitz` is an estimate of the Lipschitz constant.
    pub fn from_fn<F>(label: impl Into<String>, sup_norm_bound: f64, lipschitz: f64, f: F) -> Self
    where
        F: Fn(&Point) -> f64 + Send + Sync + 'static,
    {
        Self {
            eval: Arc::new(f),
            regularity: Regularity::Smooth,
            sup_norm_bound,
            holder_constant: lipschitz,
            flatten: None,
            label: label.into(),
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::from_fn(format!("constant({c})"), c.abs(), 0.0, move |_| c)
    }

    /// `c0 + sum a cos(2 pi k.p) + b sin(2 pi k.p)`.
    pub fn trig_poly(constant: f64, terms: Vec<TrigTerm>) -> Self {
        let sup = constant.abs() + terms.iter().map(|t| t.cos.hypot(t.sin)).sum::<f64>();
        let lip = terms
            .iter()
            .map(|t| {
                let k = t.freq.iter().map(|&k| (k as f64).powi(2)).sum::<f64>().sqrt();
                2.0 * PI * k * t.cos.hypot(t.sin)
            })
            .sum();
        let label = format!("trig_poly({constant}; {} terms)", terms.len());
        Self::from_fn(label, sup, lip, move |p| {
            let x = p.coords();
            constant
                + terms
                    .iter()
                    .map(|t| {
                        let arg: f64 = t
                            .freq
                            .iter()
                            .zip(x)
                            .map(|(&k, &xi)| k as f64 * xi)
                            .sum::<f64>()
                            * 2.0
                            * PI;
                        t.cos * arg.cos() + t.sin * arg.sin()
                    })
                    .sum::<f64>()
        })
    }

    /// `cos(2 pi x)` on the circle.
    pub fn cosine() -> Self {
        Self::trig_poly(
            0.0,
            vec![TrigTerm {
                freq: vec![1],
                cos: 1.0,
                sin: 0.0,
            }],
        )
    }

    /// Piecewise-(multi)linear interpolation of values on a uniform periodic
    /// grid of the given shape (row-major, last axis fastest).
    pub fn custom_grid(shape: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        let total: usize = shape.iter().product();
        if shape.is_empty() || shape.contains(&0) || total != values.len() {
            return Err(Error::InvalidPotential(format!(
                "grid shape {shape:?} does not match {} values",
                values.len()
            )));
        }
        let sup = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut lip = 0.0f64;
        let strides: Vec<usize> = (0..shape.len())
            .map(|a| shape[a + 1..].iter().product())
            .collect();
        for idx in 0..total {
            for (a, &n) in shape.iter().enumerate() {
                let i = (idx / strides[a]) % n;
                let next = idx - i * strides[a] + ((i + 1) % n) * strides[a];
                lip = lip.max((values[next] - values[idx]).abs() * n as f64);
            }
        }
        let label = format!("custom_grid({shape:?})");
        let mut pot = Self::from_fn(label, sup, lip, move |p| {
            let x = p.coords();
            let d = shape.len();
            let mut base = [0usize; 4];
            let mut frac = [0.0f64; 4];
            for a in 0..d {
                let s = x[a] * shape[a] as f64;
                let i = s.floor();
                base[a] = i as usize % shape[a];
                frac[a] = s - i;
            }
            let mut acc = 0.0;
            for corner in 0..(1usize << d) {
                let mut w = 1.0;
                let mut flat = 0;
                for a in 0..d {
                    let up = (corner >> a) & 1 == 1;
                    w *= if up { frac[a] } else { 1.0 - frac[a] };
                    let i = if up { (base[a] + 1) % shape[a] } else { base[a] };
                    flat += i * strides[a];
                }
                if w != 0.0 {
                    acc += w * values[flat];
                }
            }
            acc
        });
        pot.regularity = Regularity::Holder { exponent: 1.0 };
        Ok(pot)
    }

    #[inline]
    pub fn eval(&self, p: &Point) -> f64 {
        (self.eval)(p)
    }

    pub fn regularity(&self) -> Regularity {
        self.regularity
    }

    pub fn sup_norm_bound(&self) -> f64 {
        self.sup_norm_bound
    }

    /// Estimated Lipschitz (or Hölder) constant; not a certified bound.
    pub fn holder_constant(&self) -> f64 {
        self.holder_constant
    }

    /// Present iff the potential was produced by [`flatten`].
    pub fn flatten_radius(&self) -> Option<f64> {
        self.flatten.as_ref().map(|f| f.epsilon)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn with_regularity(mut self, regularity: Regularity) -> Self {
        self.regularity = regularity;
        self
    }

    /// `t * phi`.
    pub fn scaled(&self, t: f64) -> Self {
        let inner = self.eval.clone();
        Self {
            eval: Arc::new(move |p| t * inner(p)),
            regularity: self.regularity,
            sup_norm_bound: t.abs() * self.sup_norm_bound,
            holder_constant: t.abs() * self.holder_constant,
            flatten: self.flatten.clone(),
            label: format!("{t}*{}", self.label),
        }
    }

    /// `phi + c`.
    pub fn shifted(&self, c: f64) -> Self {
        let inner = self.eval.clone();
        Self {
            eval: Arc::new(move |p| inner(p) + c),
            regularity: self.regularity,
            sup_norm_bound: self.sup_norm_bound + c.abs(),
            holder_constant: self.holder_constant,
            flatten: self.flatten.clone(),
            label: format!("{}+{c}", self.label),
        }
    }

    /// Sampled estimate of the Hölder constant for the given exponent:
    /// random pairs plus close pairs around the supplied points.
    pub fn estimate_holder_constant(
        &self,
        dim: usize,
        exponent: f64,
        samples: usize,
        near: &[Point],
        seed: u64,
    ) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut best = 0.0f64;
        let point = |rng: &mut ChaCha8Rng| {
            let c: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>()).collect();
            Point::new(&c)
        };
        let mut check = |p: &Point, q: &Point| {
            let d = p.distance(q);
            if d > 1e-12 {
                best = best.max((self.eval(p) - self.eval(q)).abs() / d.powf(exponent));
            }
        };
        for _ in 0..samples {
            let p = point(&mut rng);
            let q = point(&mut rng);
            check(&p, &q);
            // Short-range pairs dominate Lipschitz estimates.
            let h = 10f64.powf(-rng.gen_range(2.0..6.0));
            let shifted: Vec<f64> = p.coords().iter().map(|x| x + h * rng.gen_range(-1.0..1.0)).collect();
            check(&p, &Point::new(&shifted));
        }
        for b in near {
            for k in 1..=8 {
                let h = 2f64.powi(-2 * k);
                for sign in [-1.0, 1.0] {
                    let c: Vec<f64> = b.coords().iter().map(|x| x + sign * h).collect();
                    check(b, &Point::new(&c));
                }
            }
        }
        best
    }
}

/// `S_n phi(p) = sum_{j<n} phi(f^j p)`; `S_0 = 0`.
pub fn birkhoff_sum(phi: &Potential, map: &MapSystem, p: &Point, n: usize) -> f64 {
    let mut q = *p;
    let mut sum = 0.0;
    for _ in 0..n {
        sum += phi.eval(&q);
        q = map.eval(&q);
    }
    sum
}

/// `-log|T'|` (full scope, one-dimensional maps) or `-log|d f_x/dy|`
/// (fiber scope, skew products).
pub fn geometric_potential(map: &MapSystem, scope: GeometricScope) -> Result<Potential> {
    match (map, scope) {
        (MapSystem::Circle(c), GeometricScope::Full) => {
            let (lo, hi) = c.derivative_bounds();
            if !hi.is_finite() {
                return Err(Error::UnboundedDerivative);
            }
            let sup = lo.ln().abs().max(hi.ln().abs());
            // Lipschitz bound of log T' is sup |T''|/|T'|; estimated later on demand.
            let c = c.clone();
            let mut phi = Potential::from_fn("geometric", sup, f64::NAN, move |p| {
                -c.derivative(p.x()).abs().ln()
            });
            phi.regularity = Regularity::Holder { exponent: 1.0 };
            phi.holder_constant = phi.estimate_holder_constant(1, 1.0, 2000, &[], 7);
            Ok(phi)
        }
        (MapSystem::Skew(s), GeometricScope::Fiber) => {
            let origin = Point::new(&vec![0.0; s.base_dim()]);
            let (lo, hi) = s.fiber_at(&origin).derivative_bounds();
            let hi = match s.family() {
                crate::dynamics::FiberFamily::VaryingLsv { alpha, amplitude } => {
                    2.0 + alpha + amplitude.abs()
                }
                _ => hi,
            };
            if !hi.is_finite() {
                return Err(Error::UnboundedDerivative);
            }
            let sup = lo.ln().abs().max(hi.ln().abs());
            let s = s.clone();
            let mut phi = Potential::from_fn("fiber_geometric", sup, f64::NAN, move |p| {
                -s.fiber_derivative(p).abs().ln()
            });
            phi.regularity = Regularity::Holder { exponent: 1.0 };
            phi.holder_constant = phi.estimate_holder_constant(map.dim(), 1.0, 2000, &[], 7);
            Ok(phi)
        }
        _ => Err(Error::InvalidArgument(format!(
            "geometric scope {scope:?} is not defined for this map"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::CircleMap;

    #[test]
    fn birkhoff_examples() {
        let d = MapSystem::from(CircleMap::doubling());
        let c = Potential::constant(0.7);
        assert!((birkhoff_sum(&c, &d, &Point::on_circle(0.3), 7) - 4.9).abs() < 1e-14);
        assert_eq!(birkhoff_sum(&c, &d, &Point::on_circle(0.3), 0), 0.0);
        assert_eq!(birkhoff_sum(&Potential::cosine(), &d, &Point::on_circle(0.0), 4), 4.0);
        let pl = MapSystem::from(CircleMap::piecewise_linear(&[2.0, 3.0]).unwrap());
        let g = geometric_potential(&pl, GeometricScope::Full).unwrap();
        assert!((birkhoff_sum(&g, &pl, &Point::on_circle(0.6), 1) + 3f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn geometric_examples() {
        let d = MapSystem::from(CircleMap::doubling());
        let g = geometric_potential(&d, GeometricScope::Full).unwrap();
        assert!((g.eval(&Point::on_circle(0.77)) + 2f64.ln()).abs() < 1e-15);
        let mp = MapSystem::from(CircleMap::manneville_pomeau(1.0).unwrap());
        let g = geometric_potential(&mp, GeometricScope::Full).unwrap();
        assert_eq!(g.eval(&Point::on_circle(0.0)), 0.0);
        let pl = MapSystem::from(CircleMap::piecewise_linear(&[2.0, 3.0]).unwrap());
        let g = geometric_potential(&pl, GeometricScope::Full).unwrap();
        assert!((g.eval(&Point::on_circle(0.25)) + 2f64.ln()).abs() < 1e-15);
        assert!((g.sup_norm_bound() - 3f64.ln()).abs() < 1e-15);
        assert!(geometric_potential(&pl, GeometricScope::Fiber).is_err());
    }

    #[test]
    fn trig_poly_bounds() {
        let phi = Potential::trig_poly(
            0.5,
            vec![TrigTerm { freq: vec![1, 2], cos: 0.3, sin: 0.4 }],
        );
        assert!((phi.sup_norm_bound() - 1.0).abs() < 1e-15);
        let p = Point::new(&[0.1, 0.2]);
        let arg = 2.0 * PI * (0.1 + 0.4);
        assert!((phi.eval(&p) - (0.5 + 0.3 * arg.cos() + 0.4 * arg.sin())).abs() < 1e-15);
    }

    #[test]
    fn custom_grid_interpolates() {
        let phi = Potential::custom_grid(vec![4], vec![0.0, 1.0, 2.0, 1.0]).unwrap();
        assert_eq!(phi.eval(&Point::on_circle(0.25)), 1.0);
        assert!((phi.eval(&Point::on_circle(0.125)) - 0.5).abs() < 1e-15);
        assert!((phi.eval(&Point::on_circle(0.875)) - 0.5).abs() < 1e-15);
        assert!((phi.holder_constant() - 4.0).abs() < 1e-15);
        assert!(Potential::custom_grid(vec![3], vec![1.0]).is_err());
    }

    #[test]
    fn scaling_is_exact() {
        let d = MapSystem::from(CircleMap::doubling());
        let phi = Potential::cosine();
        let p = Point::on_circle(0.1234);
        for t in [0.3, -2.5, 7.0] {
            let a = birkhoff_sum(&phi.scaled(t), &d, &p, 20);
            let b = t * birkhoff_sum(&phi, &d, &p, 20);
            assert!(((a - b) / b).abs() < 1e-14);
        }
    }
}

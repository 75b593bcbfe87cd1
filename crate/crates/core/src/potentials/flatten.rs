use std::sync::Arc;

use super::{FlattenTag, Potential};
use crate::dynamics::{circle_distance, MapSystem, Point};
use crate::error::{Error, Result};

/// `exp(-1/s)` for `s > 0`, else 0.
fn bump_tail(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        (-1.0 / s).exp()
    }
}

/// `C^inf` step: 0 for `s <= 0`, 1 for `s >= 1`.
fn smooth_step(s: f64) -> f64 {
    let a = bump_tail(s);
    let b = bump_tail(1.0 - s);
    a / (a + b)
}

/// Blend weight at distance `d` from a breakpoint: exactly 1 for `d < epsilon`,
/// exactly 0 for `d >= epsilon + width`, smooth in between.
pub fn plateau_weight(d: f64, epsilon: f64, width: f64) -> f64 {
    if d < epsilon {
        1.0
    } else if width <= 0.0 || d >= epsilon + width {
        0.0
    } else {
        1.0 - smooth_step((d - epsilon) / width)
    }
}

/// Smallest circular gap between consecutive points.
fn min_gap(points: &[f64]) -> f64 {
    if points.len() < 2 {
        return 1.0;
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(f64::total_cmp);
    let wrap_gap = 1.0 - sorted[sorted.len() - 1] + sorted[0];
    sorted
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(wrap_gap, f64::min)
}

#[derive(Clone, Copy)]
struct Plateau {
    epsilon: f64,
    width: f64,
}

impl Plateau {
    fn new(epsilon: f64, breakpoints: &[f64]) -> Result<Self> {
        let gap = min_gap(breakpoints);
        let max = 0.5 * gap;
        if epsilon > max {
            return Err(Error::EpsilonTooLarge { epsilon, max });
        }
        Ok(Self {
            epsilon,
            width: epsilon.min(max - epsilon),
        })
    }

    /// Nearest breakpoint and its blend weight, when inside the support.
    fn locate(&self, y: f64, breakpoints: &[f64]) -> Option<(f64, f64)> {
        let (b, d) = breakpoints
            .iter()
            .map(|&b| (b, circle_distance(y, b)))
            .min_by(|a, b| a.1.total_cmp(&b.1))?;
        let w = plateau_weight(d, self.epsilon, self.width);
        (w > 0.0).then_some((b, w))
    }
}

/// Replace `value` by `anchor` with weight `w`; exact when `w == 1`.
#[inline]
fn blend(w: f64, anchor: f64, value: f64) -> f64 {
    if w == 1.0 {
        anchor
    } else {
        w * anchor + (1.0 - w) * value
    }
}

/// Flatten `phi` near the breakpoints of `map`.
///
/// Circle maps: `phi(y) = phi(alpha_j)` on `|y - alpha_j| < epsilon`.
/// Skew products: first `phi(x, y) = phi(x_i, y)` near base breakpoints
/// `x_i` of an intermittent base, then `phi(x, y) = phi(x, alpha_{j,x})`
/// near the fiber breakpoints. Outside `epsilon + width` the potential is
/// unchanged, with `width = min(epsilon, gap/2 - epsilon)`.
///
/// A potential already flattened for the same map at radius `>= epsilon`
/// is returned unchanged.
pub fn flatten(phi: &Potential, epsilon: f64, map: &MapSystem) -> Result<Potential> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "flatten radius must be positive, got {epsilon}"
        )));
    }
    if let Some(tag) = &phi.flatten {
        if tag.epsilon >= epsilon && tag.map == *map {
            return Ok(phi.clone());
        }
    }
    let inner = phi.eval.clone();
    let (eval, near): (super::Evaluator, Vec<Point>) = match map {
        MapSystem::Circle(c) => {
            let bps = c.breakpoints();
            let plateau = Plateau::new(epsilon, &bps)?;
            let near = bps.iter().map(|&b| Point::on_circle(b)).collect();
            let eval = Arc::new(move |p: &Point| {
                let value = inner(p);
                match plateau.locate(p.x(), &bps) {
                    Some((b, w)) => blend(w, inner(&Point::on_circle(b)), value),
                    None => value,
                }
            });
            (eval, near)
        }
        MapSystem::Skew(s) => {
            let base_bps = s.base_breakpoints();
            let base_plateau = if base_bps.is_empty() {
                None
            } else {
                Some(Plateau::new(epsilon, &base_bps)?)
            };
            let origin = Point::new(&vec![0.0; s.base_dim()]);
            let fiber_plateau = Plateau::new(epsilon, &s.fiber_breakpoints(&origin))?;
            let base_flat = move |p: &Point| -> f64 {
                let value = inner(p);
                let Some(plateau) = base_plateau else { return value };
                match plateau.locate(p.x(), &base_bps) {
                    Some((b, w)) => {
                        let mut c = p.coords().to_vec();
                        c[0] = b;
                        blend(w, inner(&Point::new(&c)), value)
                    }
                    None => value,
                }
            };
            let skew = s.clone();
            let near = (0..8)
                .flat_map(|k| {
                    let x = Point::new(&vec![k as f64 / 8.0; s.base_dim()]);
                    s.fiber_breakpoints(&x)
                        .into_iter()
                        .map(move |b| Point::with_fiber(&x, b))
                })
                .collect();
            let eval = Arc::new(move |p: &Point| {
                let value = base_flat(p);
                let x = p.head();
                let bps = skew.fiber_breakpoints(&x);
                match fiber_plateau.locate(p.last(), &bps) {
                    Some((b, w)) => blend(w, base_flat(&Point::with_fiber(&x, b)), value),
                    None => value,
                }
            });
            (eval, near)
        }
        MapSystem::Torus(_) => (inner, Vec::new()),
    };
    let mut out = Potential {
        eval,
        regularity: phi.regularity,
        sup_norm_bound: phi.sup_norm_bound,
        holder_constant: phi.holder_constant,
        flatten: Some(FlattenTag {
            epsilon,
            map: map.clone(),
        }),
        label: format!("flatten({}, {epsilon})", phi.label),
    };
    let exponent = match phi.regularity {
        super::Regularity::Smooth => 1.0,
        super::Regularity::Holder { exponent } => exponent,
    };
    out.holder_constant = out.estimate_holder_constant(map.dim(), exponent, 10_000, &near, 11);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{Base, CircleKind, CircleMap, FiberFamily, SkewProduct};

    fn tm1() -> MapSystem {
        SkewProduct::new(
            Base::Circle(CircleMap::doubling()),
            FiberFamily::RotatedLsv { alpha: 0.5, amplitude: 0.1 },
        )
        .unwrap()
        .into()
    }

    fn tm2() -> MapSystem {
        SkewProduct::new(
            Base::Circle(CircleMap::doubling()),
            FiberFamily::Constant { map: CircleKind::Lsv { alpha: 0.5 } },
        )
        .unwrap()
        .into()
    }

    #[test]
    fn weight_is_exact_on_plateau() {
        assert_eq!(plateau_weight(0.09, 0.1, 0.1), 1.0);
        assert_eq!(plateau_weight(0.2, 0.1, 0.1), 0.0);
        let mid = plateau_weight(0.15, 0.1, 0.1);
        assert!((mid - 0.5).abs() < 1e-15);
        assert_eq!(plateau_weight(0.1, 0.1, 0.0), 0.0);
    }

    #[test]
    fn constants_stay_constant() {
        let phi = flatten(&Potential::constant(2.5), 0.1, &tm2()).unwrap();
        for k in 0..50 {
            let p = Point::new(&[k as f64 / 50.0, (k * 7 % 50) as f64 / 50.0]);
            assert_eq!(phi.eval(&p), 2.5);
        }
    }

    #[test]
    fn cosine_plateau_at_fiber_breakpoint() {
        let phi = Potential::from_fn("cos y", 1.0, 2.0 * std::f64::consts::PI, |p| {
            (2.0 * std::f64::consts::PI * p.last()).cos()
        });
        let flat = flatten(&phi, 0.1, &tm2()).unwrap();
        for y in [0.0, 0.05, 0.099, 0.901, 0.95] {
            assert_eq!(flat.eval(&Point::new(&[0.37, y])), 1.0);
        }
        // Second breakpoint at 1/2 flattens to cos(pi) = -1.
        assert_eq!(flat.eval(&Point::new(&[0.37, 0.55])), -1.0);
    }

    #[test]
    fn identity_potential_deviation() {
        let phi = Potential::from_fn("y", 1.0, 1.0, |p| p.last());
        let flat = flatten(&phi, 0.05, &tm2()).unwrap();
        let mut worst = 0.0f64;
        for i in 0..200 {
            for j in 0..200 {
                let p = Point::new(&[i as f64 / 200.0, j as f64 / 200.0]);
                worst = worst.max((flat.eval(&p) - phi.eval(&p)).abs());
            }
        }
        // The wrap-around jump of y at the breakpoint 0 is the only exception.
        let mut interior = 0.0f64;
        for j in 0..1000 {
            let y = 0.2 + 0.6 * j as f64 / 1000.0;
            let p = Point::new(&[0.3, y]);
            interior = interior.max((flat.eval(&p) - phi.eval(&p)).abs());
        }
        assert!(interior <= 0.1, "interior deviation {interior}");
        assert!(worst <= 1.0);
    }

    #[test]
    fn tubular_neighbourhoods_follow_moving_breakpoints() {
        let map = tm1();
        let s = map.as_skew().unwrap();
        let phi = Potential::trig_poly(
            0.0,
            vec![super::super::TrigTerm { freq: vec![1, 1], cos: 1.0, sin: 0.3 }],
        );
        let flat = flatten(&phi, 1.0 / 16.0, &map).unwrap();
        for k in 0..20 {
            let x = Point::on_circle(k as f64 / 20.0);
            for b in s.fiber_breakpoints(&x) {
                let anchor = flat.eval(&Point::with_fiber(&x, b));
                for dy in [-0.06, -0.01, 0.0, 0.03, 0.062] {
                    assert_eq!(flat.eval(&Point::with_fiber(&x, b + dy)), anchor);
                }
            }
        }
    }

    #[test]
    fn idempotent_and_rejects_overlap() {
        let map = tm1();
        let phi = Potential::trig_poly(
            0.1,
            vec![super::super::TrigTerm { freq: vec![0, 1], cos: 1.0, sin: 0.0 }],
        );
        let once = flatten(&phi, 0.1, &map).unwrap();
        let twice = flatten(&once, 0.1, &map).unwrap();
        for i in 0..100 {
            let p = Point::new(&[i as f64 * 0.0137, i as f64 * 0.0291]);
            assert_eq!(once.eval(&p).to_bits(), twice.eval(&p).to_bits());
        }
        assert!(matches!(
            flatten(&phi, 0.3, &map),
            Err(Error::EpsilonTooLarge { .. })
        ));
        assert_eq!(once.flatten_radius(), Some(0.1));
    }

    #[test]
    fn intermittent_circle_breakpoints() {
        let mp = MapSystem::from(CircleMap::manneville_pomeau(0.5).unwrap());
        let flat = flatten(&Potential::cosine(), 0.05, &mp).unwrap();
        assert_eq!(flat.eval(&Point::on_circle(0.97)), 1.0);
        let a = mp.as_circle().unwrap().breakpoints()[1];
        let anchor = (2.0 * std::f64::consts::PI * a).cos();
        assert_eq!(flat.eval(&Point::on_circle(a + 0.04)), anchor);
    }
}

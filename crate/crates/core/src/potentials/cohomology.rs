use serde::Serialize;

use super::{birkhoff_sum, Potential};
use crate::dynamics::{periodic_points, MapSystem, DEFAULT_NODE_BUDGET};
use crate::error::Result;

const SPREAD_TOL: f64 = 1e-8;

/// A periodic orbit and the orbit average `S_p phi(q) / p`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PeriodicWitness {
    pub point: Vec<f64>,
    pub period: usize,
    pub average: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum CoboundaryVerdict {
    /// All periodic averages agree with `constant` to within `1e-8`.
    LikelyCoboundary { constant: f64 },
    /// Two orbits with distinct averages certify that `phi` is not
    /// cohomologous to a constant.
    NotCoboundary {
        low: PeriodicWitness,
        high: PeriodicWitness,
    },
}

/// Compare the averages of `phi` over every periodic orbit of period
/// `<= max_period`.
pub fn cohomology_to_constant_test(
    phi: &Potential,
    map: &MapSystem,
    max_period: usize,
) -> Result<CoboundaryVerdict> {
    let mut low: Option<PeriodicWitness> = None;
    let mut high: Option<PeriodicWitness> = None;
    for period in 1..=max_period.max(1) {
        for q in periodic_points(map, period, DEFAULT_NODE_BUDGET)? {
            let average = birkhoff_sum(phi, map, &q, period) / period as f64;
            let witness = || PeriodicWitness {
                point: q.coords().to_vec(),
                period,
                average,
            };
            if low.as_ref().map_or(true, |w| average < w.average) {
                low = Some(witness());
            }
            if high.as_ref().map_or(true, |w| average > w.average) {
                high = Some(witness());
            }
        }
    }
    let (low, high) = (low.expect("period 1 has a fixed point"), high.expect("nonempty"));
    Ok(if high.average - low.average > SPREAD_TOL {
        CoboundaryVerdict::NotCoboundary { low, high }
    } else {
        CoboundaryVerdict::LikelyCoboundary {
            constant: 0.5 * (low.average + high.average),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{CircleMap, Point};
    use std::f64::consts::PI;

    #[test]
    fn constant_is_coboundary() {
        let d = MapSystem::from(CircleMap::doubling());
        let v = cohomology_to_constant_test(&Potential::constant(0.3), &d, 6).unwrap();
        assert_eq!(v, CoboundaryVerdict::LikelyCoboundary { constant: 0.3 });
    }

    #[test]
    fn cosine_is_not() {
        let d = MapSystem::from(CircleMap::doubling());
        match cohomology_to_constant_test(&Potential::cosine(), &d, 2).unwrap() {
            CoboundaryVerdict::NotCoboundary { low, high } => {
                assert!((high.average - 1.0).abs() < 1e-12);
                assert_eq!(high.period, 1);
                assert!((low.average + 0.5).abs() < 1e-12);
            }
            v => panic!("unexpected verdict {v:?}"),
        }
    }

    #[test]
    fn telescoping_sum_is_coboundary() {
        let d = MapSystem::from(CircleMap::doubling());
        let u = |x: f64| (2.0 * PI * x).sin();
        let phi = Potential::from_fn("u o f - u", 2.0, 6.0 * PI, move |p: &Point| {
            u(2.0 * p.x()) - u(p.x())
        });
        match cohomology_to_constant_test(&phi, &d, 8).unwrap() {
            CoboundaryVerdict::LikelyCoboundary { constant } => assert!(constant.abs() < 1e-12),
            v => panic!("unexpected verdict {v:?}"),
        }
    }
}

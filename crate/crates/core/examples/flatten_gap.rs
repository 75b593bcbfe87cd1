//! Flattening a potential near the fiber breakpoints of a skew product with
//! a moving intermittent fiber, then checking the spectral gap of the result.

use std::f64::consts::PI;

use thermoform::dynamics::{Base, CircleMap, FiberFamily, MapSystem, Point, SkewProduct};
use thermoform::operator::Discretization;
use thermoform::potentials::{flatten, Potential, TrigTerm};
use thermoform::thermo::{pressure_sweep, SweepOptions};

fn main() -> thermoform::Result<()> {
    let map: MapSystem = SkewProduct::new(
        Base::Circle(CircleMap::doubling()),
        FiberFamily::RotatedLsv { alpha: 0.5, amplitude: 0.1 },
    )?
    .into();
    let phi = Potential::trig_poly(
        0.0,
        vec![
            TrigTerm { freq: vec![0, 1], cos: (2.0 * PI * 0.3).cos(), sin: (2.0 * PI * 0.3).sin() },
            TrigTerm { freq: vec![1, 0], cos: 0.3, sin: 0.0 },
        ],
    );

    for k in 2..=8 {
        let eps = 0.5f64.powi(k);
        let flat = flatten(&phi, eps, &map)?;
        let dev = (0..64 * 64)
            .map(|i| Point::new(&[(i / 64) as f64 / 64.0, (i % 64) as f64 / 64.0]))
            .map(|p| (flat.eval(&p) - phi.eval(&p)).abs())
            .fold(0.0, f64::max);
        println!("eps = 2^-{k}: sup |flat - phi| = {dev:.4e}");
    }

    let flat = flatten(&phi, 1.0 / 16.0, &map)?;
    let t = [-4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0];
    let curve = pressure_sweep(&map, &flat, &t, &Discretization::collocation(32), &SweepOptions::default())?;
    for i in 0..curve.len() {
        println!("t={:>4} P={:.6} gap={:.4}", t[i], curve.pressure[i], curve.gap_ratio[i]);
    }
    Ok(())
}

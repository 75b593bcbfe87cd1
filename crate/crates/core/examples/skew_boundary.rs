//! Skew product of angle doubling with an intermittent fiber map: compares
//! the full pressure with the pressures of the invariant boundary circles.

use std::f64::consts::PI;

use thermoform::dynamics::{Base, CircleKind, CircleMap, FiberFamily, MapSystem, SkewProduct};
use thermoform::operator::Discretization;
use thermoform::potentials::{Potential, TrigTerm};
use thermoform::thermo::{skew_boundary_analysis, uniform_grid, SweepOptions};

fn main() -> thermoform::Result<()> {
    let map: MapSystem = SkewProduct::new(
        Base::Circle(CircleMap::doubling()),
        FiberFamily::Constant { map: CircleKind::Lsv { alpha: 0.5 } },
    )?
    .into();
    let (s, c) = (2.0 * PI * 0.3).sin_cos();
    let phi = Potential::trig_poly(
        0.0,
        vec![
            TrigTerm { freq: vec![0, 1], cos: c, sin: s },
            TrigTerm { freq: vec![1, 0], cos: 0.3, sin: 0.0 },
        ],
    );
    let t = uniform_grid(-2.0, 2.0, 9);
    let opts = SweepOptions { gap: false, ..Default::default() };
    let report = skew_boundary_analysis(&map, &phi, &t, &Discretization::collocation(32), &opts)?;

    for b in &report.boundaries {
        println!("boundary {:?}", b.kind);
    }
    for (i, t) in report.t().iter().enumerate() {
        let sub: Vec<String> = report.boundaries.iter().map(|b| format!("{:.5}", b.pressure[i])).collect();
        println!(
            "t={t:>5.2} P_full={:.5} boundaries=[{}] margin={:+.4} {}",
            report.full.pressure[i],
            sub.join(", "),
            report.margin[i],
            report.labels[i]
        );
    }
    Ok(())
}

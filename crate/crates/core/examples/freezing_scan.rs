//! Phase-transition scan for the Manneville–Pomeau map with the geometric
//! potential: pressure freezes at zero past `t = 1` and the spectral gap
//! closes there.

use thermoform::dynamics::{CircleMap, MapSystem};
use thermoform::operator::{Basis, Discretization};
use thermoform::potentials::{geometric_potential, GeometricScope};
use thermoform::thermo::{gap_scan, uniform_grid, SweepOptions};

fn main() -> thermoform::Result<()> {
    let map: MapSystem = CircleMap::manneville_pomeau(0.5)?.into();
    let phi = geometric_potential(&map, GeometricScope::Full)?;
    let t = uniform_grid(0.0, 1.5, 31);
    let ladder: Vec<Discretization> = [512, 2048, 8192]
        .iter()
        .map(|&n| Discretization::collocation(n).with_basis(Basis::PiecewiseLinear))
        .collect();

    let result = gap_scan(&map, &phi, &t, &ladder, &SweepOptions::default(), false)?;
    let fine = result.curves.last().unwrap();
    println!("{:>6} {:>12} {:>8}", "t", "P", "gap");
    for i in 0..fine.len() {
        println!("{:>6.2} {:>12.3e} {:>8.4}", fine.t[i], fine.pressure[i], fine.gap_ratio[i]);
    }
    for c in &result.scan.candidates {
        println!("candidate [{:.3}, {:.3}]: {:?}", c.lo, c.hi, c.reasons);
    }
    println!("analytic on {:?}", result.scan.analytic);
    Ok(())
}

//! Pressure curve of the geometric potential on a piecewise-linear map,
//! compared with the closed form `log(2^-t + 3^-t)`.
//!
//! ```bash
//! cargo run --example pressure_curve
//! ```

use thermoform::dynamics::{CircleMap, MapSystem};
use thermoform::operator::Discretization;
use thermoform::oracle::closed_form_pressure_pl;
use thermoform::potentials::{geometric_potential, GeometricScope};
use thermoform::thermo::{pressure_sweep, uniform_grid, SweepOptions};

fn main() -> thermoform::Result<()> {
    let map: MapSystem = CircleMap::piecewise_linear(&[2.0, 3.0])?.into();
    let phi = geometric_potential(&map, GeometricScope::Full)?;
    let t = uniform_grid(-3.0, 3.0, 13);

    for disc in [Discretization::collocation(64), Discretization::ulam(1024)] {
        let curve = pressure_sweep(&map, &phi, &t, &disc, &SweepOptions::default())?;
        println!("{:?} N={}", disc.scheme, disc.n);
        println!("{:>6} {:>12} {:>12} {:>10} {:>8}", "t", "P", "exact", "P'", "gap");
        for i in 0..curve.len() {
            let exact = closed_form_pressure_pl(&[2.0, 3.0], t[i])?;
            println!(
                "{:>6.2} {:>12.8} {:>12.8} {:>10.6} {:>8.4}",
                t[i], curve.pressure[i], exact, curve.p_mu[i], curve.gap_ratio[i]
            );
        }
        let checks = curve.checks(1e-6);
        println!("convex: {}, lipschitz: {}\n", checks.convex_ok, checks.lipschitz_ok);
    }
    Ok(())
}

//! Three independent estimates of the pressure of `cos(2πx)` under the
//! doubling map: transfer operator, preimage sums and periodic orbit sums.

use thermoform::dynamics::{CircleMap, MapSystem, Point};
use thermoform::operator::{build, leading_eigentriple, Discretization, EigenOptions};
use thermoform::oracle::{pressure_periodic_sum, pressure_preimage_ratio, pressure_preimage_sum};
use thermoform::potentials::Potential;

fn main() -> thermoform::Result<()> {
    let map: MapSystem = CircleMap::doubling().into();
    let phi = Potential::cosine();
    let budget = 1 << 24;

    let op = build(&map, &phi, &Discretization::collocation(64))?;
    let p_op = leading_eigentriple(&op, &EigenOptions::default())?.pressure;
    println!("operator (collocation N=64): {p_op:.10}");

    for x0 in [0.0, 0.1, 0.5] {
        let root = Point::on_circle(x0);
        println!("\npreimage sums rooted at x0 = {x0}");
        for n in (8..=16).step_by(2) {
            let direct = pressure_preimage_sum(&map, &phi, &root, n, budget)?;
            let ratio = pressure_preimage_ratio(&map, &phi, &root, n, budget)?;
            println!("  n={n:>2}  (1/n) log Z_n = {direct:.8} ({:+.1e})   log Z_n/Z_(n-1) = {ratio:.8} ({:+.1e})", direct - p_op, ratio - p_op);
        }
    }

    println!("\nperiodic orbit sums");
    for n in (6..=14).step_by(2) {
        let p = pressure_periodic_sum(&map, &phi, n, budget)?;
        println!("  n={n:>2}  {p:.10} ({:+.1e})", p - p_op);
    }
    Ok(())
}

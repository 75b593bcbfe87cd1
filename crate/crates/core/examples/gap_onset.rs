//! Where does the spectral gap hold? Scans small `|t|` around zero and large
//! `t` for the doubling map with `cos(2πx)`.

use thermoform::dynamics::{CircleMap, MapSystem};
use thermoform::operator::Discretization;
use thermoform::potentials::Potential;
use thermoform::thermo::{gap_onset_scan, Direction, SweepOptions};

fn main() -> thermoform::Result<()> {
    let map: MapSystem = CircleMap::doubling().into();
    let phi = Potential::cosine();
    let disc = Discretization::collocation(64);
    for direction in [Direction::HighTemp, Direction::LowTemp] {
        let scan = gap_onset_scan(&map, &phi, direction, 8.0, 6, &disc, &SweepOptions::default())?;
        println!("{direction:?}: threshold {:?}", scan.threshold);
        for (t, g) in scan.t.iter().zip(&scan.gap_ratio) {
            println!("  t={t:>7.3} gap={g:.4}");
        }
    }
    Ok(())
}

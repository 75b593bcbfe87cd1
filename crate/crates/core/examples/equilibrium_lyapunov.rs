//! Equilibrium states, Lyapunov exponents and the expanding-on-average
//! certificate, plus the preimage approximation of the maximal entropy
//! measure.

use thermoform::dynamics::{CircleMap, MapSystem, Point};
use thermoform::operator::{Discretization, EigenOptions};
use thermoform::potentials::{geometric_potential, GeometricScope, Potential};
use thermoform::thermo::{
    equilibrium_state, expanding_on_average_certificate, lyapunov_exponents, mme_preimage_measure,
};

fn main() -> thermoform::Result<()> {
    let opts = EigenOptions::default();

    let pl: MapSystem = CircleMap::piecewise_linear(&[2.0, 3.0])?.into();
    let geo = geometric_potential(&pl, GeometricScope::Full)?;
    for t in [0.0, 1.0, 2.0] {
        let mu = equilibrium_state(&pl, &geo.scaled(t), &Discretization::collocation(64), &opts)?;
        let left = mu.integrate(|p| if p.x() < 0.5 { 1.0 } else { 0.0 });
        let lyap = lyapunov_exponents(&mu, &pl).exponents[0];
        let cert = expanding_on_average_certificate(&mu, &pl, 3)?;
        println!("PL t={t}: P={:.6} mu[0,1/2)={left:.6} lyapunov={lyap:.6} {cert:?}", mu.pressure());
    }

    let doubling: MapSystem = CircleMap::doubling().into();
    let mu = equilibrium_state(&doubling, &Potential::cosine(), &Discretization::collocation(64), &opts)?;
    let defect = mu.invariance_defect(&doubling, |p| (2.0 * std::f64::consts::PI * p.x()).sin());
    println!("doubling/cos: P={:.8} gap={:?} invariance defect {defect:.2e}", mu.pressure(), mu.gap_ratio());

    let mme = mme_preimage_measure(&doubling, &Point::on_circle(0.3), 12, 1 << 20)?;
    let second_moment = mme.integrate(|p| p.x() * p.x());
    println!("preimage MME, n=12: E[x^2] = {second_moment:.6} (Lebesgue: {:.6})", 1.0 / 3.0);
    Ok(())
}

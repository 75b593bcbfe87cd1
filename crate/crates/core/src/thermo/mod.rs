//! Pressure curves in the inverse temperature `t`, equilibrium states,
//! Lyapunov exponents and phase-transition scans.

mod curve;
mod equilibrium;
mod onset;
mod scan;
mod skew;

pub use curve::{finite_differences, pressure_sweep, uniform_grid, CurveChecks, PressureCurve, SweepOptions};
pub use equilibrium::{
    equilibrium_state, expanding_on_average_certificate, lyapunov_exponents, mme_preimage_measure,
    EquilibriumState, ExpansionCertificate, LyapunovExponents, Support, GAP_COLLAPSE,
};
pub use onset::{gap_onset_scan, Direction, GapOnset};
pub use scan::{
    gap_scan, phase_transition_scan, refine_grid, GapScan, Reason, ScanReport, TransitionCandidate,
    GAP_THRESHOLD,
};
pub use skew::{skew_boundary_analysis, BoundaryKind, BoundaryPressure, Dominance, SkewReport};

use rayon::prelude::*;

use crate::dynamics::{periodic_points, MapSystem};
use crate::error::{Error, Result};
use crate::potentials::{birkhoff_sum, Potential};

/// `h(mu_t) = P(t) - t P_mu(t)` at a grid point of a smooth segment,
/// clamped below at `-scheme_tolerance`.
pub fn entropy_via_legendre(curve: &PressureCurve, t: f64) -> Result<f64> {
    let i = curve
        .index_of(t)
        .ok_or_else(|| Error::InvalidArgument(format!("t = {t} is not a grid point of the curve")))?;
    if curve.candidates.iter().any(|c| c.contains(t)) {
        return Err(Error::NonSmoothPoint { t });
    }
    if !curve.converged[i] {
        return Err(Error::NotConverged { iterations: 0 });
    }
    Ok((curve.pressure[i] - t * curve.p_mu[i]).max(-curve.scheme_tolerance))
}

/// Largest periodic-orbit average `(1/p) S_p phi` over periods `1..=max_period`.
pub fn max_periodic_average(map: &MapSystem, phi: &Potential, max_period: usize, budget: u128) -> Result<f64> {
    let mut best = f64::NEG_INFINITY;
    for p in 1..=max_period {
        let points = periodic_points(map, p, budget)?;
        let m = points
            .par_iter()
            .map(|x| birkhoff_sum(phi, map, x, p) / p as f64)
            .reduce(|| f64::NEG_INFINITY, f64::max);
        best = best.max(m);
    }
    Ok(best)
}

#[cfg(test)]
mod tests;

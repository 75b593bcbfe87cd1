use serde::{Deserialize, Serialize};

use super::curve::{pressure_sweep, uniform_grid, SweepOptions};
use super::scan::GAP_THRESHOLD;
use crate::dynamics::MapSystem;
use crate::error::{Error, Result};
use crate::operator::Discretization;
use crate::potentials::Potential;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Large `t` on a geometric grid.
    LowTemp,
    /// Small `|t|` on a symmetric uniform grid.
    HighTemp,
}

#[derive(Clone, Debug, Serialize)]
pub struct GapOnset {
    pub direction: Direction,
    pub t: Vec<f64>,
    pub gap_ratio: Vec<f64>,
    pub converged: Vec<bool>,
    /// Low temperature: the smallest grid `t` beyond which the gap persists.
    /// High temperature: the largest `t1` with a gap on all of `[-t1, t1]`.
    /// `None` when no such grid point exists.
    pub threshold: Option<f64>,
}

fn has_gap(g: f64, converged: bool) -> bool {
    converged && g < GAP_THRESHOLD
}

/// Empirical gap-persistence threshold in `t`.
///
/// The low-temperature grid is `t_max 2^{-k}`, `k = points-1, ..., 0`; the
/// high-temperature grid has `2 points - 1` uniform values on `[-t_max, t_max]`.
pub fn gap_onset_scan(
    map: &MapSystem,
    phi: &Potential,
    direction: Direction,
    t_max: f64,
    points: usize,
    disc: &Discretization,
    opts: &SweepOptions,
) -> Result<GapOnset> {
    if !(t_max > 0.0) || points < 2 {
        return Err(Error::InvalidArgument("gap onset scan needs t_max > 0 and at least 2 points".into()));
    }
    let t: Vec<f64> = match direction {
        Direction::LowTemp => (0..points).map(|k| t_max * 0.5f64.powi((points - 1 - k) as i32)).collect(),
        Direction::HighTemp => uniform_grid(-t_max, t_max, 2 * points - 1),
    };
    let opts = SweepOptions { gap: true, ..*opts };
    let curve = pressure_sweep(map, phi, &t, disc, &opts)?;
    let ok: Vec<bool> = curve
        .gap_ratio
        .iter()
        .zip(&curve.converged)
        .map(|(&g, &c)| has_gap(g, c))
        .collect();
    let threshold = match direction {
        Direction::LowTemp => {
            let first_good = ok.iter().rposition(|&g| !g).map_or(0, |i| i + 1);
            t.get(first_good).copied()
        }
        Direction::HighTemp => {
            let mid = points - 1;
            let mut reach = None;
            for r in 0..points {
                if ok[mid - r] && ok[mid + r] {
                    reach = Some(t[mid + r]);
                } else {
                    break;
                }
            }
            reach
        }
    };
    Ok(GapOnset {
        direction,
        t,
        gap_ratio: curve.gap_ratio,
        converged: curve.converged,
        threshold,
    })
}

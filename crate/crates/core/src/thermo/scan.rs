use serde::Serialize;
use std::collections::BTreeSet;

use super::curve::{pressure_sweep, PressureCurve, SweepOptions};
use super::skew::{Dominance, SkewReport};
use crate::dynamics::MapSystem;
use crate::error::{Error, Result};
use crate::operator::Discretization;
use crate::potentials::Potential;

/// Gap ratio treated as collapsed.
pub const GAP_THRESHOLD: f64 = 0.99;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Reason {
    Kink,
    GapCollapse,
    Freezing,
    BoundaryDominance,
}

/// A closed `t`-interval flagged as a possible non-analyticity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransitionCandidate {
    pub lo: f64,
    pub hi: f64,
    pub reasons: BTreeSet<Reason>,
}

impl TransitionCandidate {
    pub fn contains(&self, t: f64) -> bool {
        self.lo <= t && t <= self.hi
    }
}

/// Candidates and their complement within the scanned range.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanReport {
    pub candidates: Vec<TransitionCandidate>,
    /// Open intervals on which no candidate was flagged.
    pub analytic: Vec<(f64, f64)>,
}

/// Aitken extrapolation of the last three terms of a sequence, applied only
/// when the differences decay geometrically with one sign.
fn aitken(seq: &[f64]) -> f64 {
    let n = seq.len();
    let last = seq[n - 1];
    if n < 3 {
        return last;
    }
    let d1 = seq[n - 2] - seq[n - 3];
    let d2 = last - seq[n - 2];
    if d1 * d2 > 0.0 && (d2 / d1).abs() < 0.9 {
        let r = d2 / d1;
        last + d2 * r / (1.0 - r)
    } else {
        last
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Least-squares line through `(t, p)`.
fn affine_fit(t: &[f64], p: &[f64]) -> (f64, f64) {
    let n = t.len() as f64;
    let tm = t.iter().sum::<f64>() / n;
    let pm = p.iter().sum::<f64>() / n;
    let stt: f64 = t.iter().map(|x| (x - tm).powi(2)).sum();
    let stp: f64 = t.iter().zip(p).map(|(x, y)| (x - tm) * (y - pm)).sum();
    let slope = if stt > 0.0 { stp / stt } else { 0.0 };
    (pm - slope * tm, slope)
}

fn kink_points(ladder: &[PressureCurve]) -> Vec<usize> {
    let n = ladder[0].len();
    let threshold: Vec<f64> = ladder
        .iter()
        .map(|c| 10.0 * median(c.p2_fd.iter().filter(|v| !v.is_nan()).map(|v| v.abs()).collect()))
        .collect();
    let (first, last) = (&ladder[0], &ladder[ladder.len() - 1]);
    (1..n.saturating_sub(1))
        .filter(|&i| {
            ladder
                .iter()
                .zip(&threshold)
                .all(|(c, &th)| c.p2_fd[i].abs() > th && c.p2_fd[i].abs() > 1e-6)
                && last.p2_fd[i].abs() >= 1.5 * first.p2_fd[i].abs()
        })
        .collect()
}

fn gap_collapse_points(ladder: &[PressureCurve]) -> Vec<usize> {
    (0..ladder[0].len())
        .filter(|&i| {
            let g: Vec<f64> = ladder.iter().map(|c| c.gap_ratio[i]).collect();
            if g.iter().any(|v| v.is_nan()) {
                return false;
            }
            let increasing = g.windows(2).all(|w| w[1] >= w[0]);
            increasing && aitken(&g) >= GAP_THRESHOLD
        })
        .collect()
}

/// Returns the index range of a terminal frozen run, if any.
fn freezing_run(ladder: &[PressureCurve]) -> Option<(usize, usize)> {
    let finest = &ladder[ladder.len() - 1];
    let n = finest.len();
    let tol = 10.0 * finest.scheme_tolerance;
    let p_ex: Vec<f64> = (0..n)
        .map(|i| aitken(&ladder.iter().map(|c| c.pressure[i]).collect::<Vec<_>>()))
        .collect();
    let tail = (n / 4).max(3).min(n);
    let start = n - tail;
    let (a, b) = affine_fit(&finest.t[start..], &p_ex[start..]);
    let asym = |i: usize| a + b * finest.t[i];
    let mut onset = n;
    while onset > 0 && (p_ex[onset - 1] - asym(onset - 1).max(0.0)).abs() < tol {
        onset -= 1;
    }
    if n - onset < 3 || onset == 0 {
        return None;
    }
    if (p_ex[onset - 1] - asym(onset - 1)).abs() < tol {
        return None;
    }
    Some((onset - 1, n - 1))
}

/// Flags `t`-intervals where the curves of a refinement ladder (increasing
/// `N`, common `t` grid) suggest a non-analyticity: growing second
/// differences, a gap ratio tending to 1, a frozen terminal segment, or a
/// dominating boundary subsystem.
pub fn phase_transition_scan(ladder: &[PressureCurve], skew: Option<&SkewReport>) -> Result<ScanReport> {
    if ladder.len() < 2 {
        return Err(Error::InsufficientRefinement("at least two refinement levels are needed".into()));
    }
    let t = &ladder[0].t;
    if ladder.iter().any(|c| c.t != *t) {
        return Err(Error::InvalidArgument("refinement curves must share the t grid".into()));
    }
    if ladder.windows(2).any(|w| w[1].discretization.n <= w[0].discretization.n) {
        return Err(Error::InvalidArgument("refinement levels must have increasing N".into()));
    }
    let (fine, coarse) = (&ladder[ladder.len() - 1], &ladder[ladder.len() - 2]);
    let agree_tol = 10.0 * fine.scheme_tolerance.max(coarse.scheme_tolerance);
    if fine
        .pressure
        .iter()
        .zip(&coarse.pressure)
        .all(|(a, b)| !((a - b).abs() <= agree_tol))
    {
        return Err(Error::InsufficientRefinement(format!(
            "the two finest curves differ by more than {agree_tol:e} at every t"
        )));
    }

    let n = t.len();
    let around = |i: usize| (t[i.saturating_sub(1)], t[(i + 1).min(n - 1)]);
    let mut raw: Vec<TransitionCandidate> = Vec::new();
    let mut flag = |lo: f64, hi: f64, reason: Reason| {
        raw.push(TransitionCandidate { lo, hi, reasons: BTreeSet::from([reason]) });
    };
    for i in kink_points(ladder) {
        let (lo, hi) = around(i);
        flag(lo, hi, Reason::Kink);
    }
    for i in gap_collapse_points(ladder) {
        let (lo, hi) = around(i);
        flag(lo, hi, Reason::GapCollapse);
    }
    if let Some((a, b)) = freezing_run(ladder) {
        flag(t[a], t[b], Reason::Freezing);
    }
    if let Some(report) = skew {
        for (k, label) in report.labels.iter().enumerate() {
            if *label != Dominance::Interior {
                let ts = report.t();
                let (lo, hi) = (ts[k.saturating_sub(1)], ts[(k + 1).min(ts.len() - 1)]);
                flag(lo, hi, Reason::BoundaryDominance);
            }
        }
    }

    raw.sort_by(|a, b| a.lo.total_cmp(&b.lo).then(a.hi.total_cmp(&b.hi)));
    let mut candidates: Vec<TransitionCandidate> = Vec::new();
    for c in raw {
        match candidates.last_mut() {
            Some(last) if c.lo <= last.hi => {
                last.hi = last.hi.max(c.hi);
                last.reasons.extend(c.reasons);
            }
            _ => candidates.push(c),
        }
    }
    let mut analytic = Vec::new();
    let mut cursor = t[0];
    for c in &candidates {
        if c.lo > cursor {
            analytic.push((cursor, c.lo));
        }
        cursor = cursor.max(c.hi);
    }
    if cursor < t[n - 1] {
        analytic.push((cursor, t[n - 1]));
    }
    Ok(ScanReport { candidates, analytic })
}

/// Result of a refinement-ladder scan.
#[derive(Clone, Debug, Serialize)]
pub struct GapScan {
    pub curves: Vec<PressureCurve>,
    pub scan: ScanReport,
}

/// `t` grid with three extra points inserted into every grid step lying
/// inside a candidate interval.
pub fn refine_grid(t: &[f64], candidates: &[TransitionCandidate]) -> Vec<f64> {
    let mut out = Vec::with_capacity(t.len() * 2);
    for w in t.windows(2) {
        out.push(w[0]);
        if candidates.iter().any(|c| c.lo <= w[0] && w[1] <= c.hi) {
            out.extend((1..4).map(|k| w[0] + (w[1] - w[0]) * k as f64 / 4.0));
        }
    }
    out.extend(t.last());
    out
}

/// Sweeps every level of `ladder`, scans, and with `refine` repeats the
/// sweep and scan once on a grid refined ×4 inside the candidates.
pub fn gap_scan(
    map: &MapSystem,
    phi: &Potential,
    t_grid: &[f64],
    ladder: &[Discretization],
    opts: &SweepOptions,
    refine: bool,
) -> Result<GapScan> {
    let sweep_all = |grid: &[f64]| -> Result<Vec<PressureCurve>> {
        ladder.iter().map(|d| pressure_sweep(map, phi, grid, d, opts)).collect()
    };
    let mut curves = sweep_all(t_grid)?;
    let mut scan = phase_transition_scan(&curves, None)?;
    if refine && !scan.candidates.is_empty() {
        let grid = refine_grid(t_grid, &scan.candidates);
        curves = sweep_all(&grid)?;
        scan = phase_transition_scan(&curves, None)?;
    }
    for c in &mut curves {
        c.candidates = scan.candidates.clone();
    }
    Ok(GapScan { curves, scan })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aitken_limits() {
        let geometric: Vec<f64> = (0..3).map(|k| 1.0 - 0.5f64.powi(k)).collect();
        assert!((aitken(&geometric) - 1.0).abs() < 1e-15);
        assert_eq!(aitken(&[1.0, 2.0, 1.5]), 1.5);
        assert_eq!(aitken(&[0.3, 0.4]), 0.4);
    }

    #[test]
    fn affine_fit_is_exact_on_lines() {
        let t = [0.0, 1.0, 2.0, 3.0];
        let p: Vec<f64> = t.iter().map(|x| 2.0 - 0.5 * x).collect();
        let (a, b) = affine_fit(&t, &p);
        assert!((a - 2.0).abs() < 1e-15 && (b + 0.5).abs() < 1e-15);
    }

    #[test]
    fn refinement_inserts_points_inside_candidates() {
        let t = [0.0, 1.0, 2.0, 3.0];
        let c = TransitionCandidate { lo: 1.0, hi: 2.0, reasons: BTreeSet::from([Reason::Kink]) };
        assert_eq!(refine_grid(&t, &[c]), vec![0.0, 1.0, 1.25, 1.5, 1.75, 2.0, 3.0]);
    }
}

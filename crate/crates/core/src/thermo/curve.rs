use rayon::prelude::*;
use serde::Serialize;
use std::io::Write;

use super::scan::TransitionCandidate;
use crate::dynamics::MapSystem;
use crate::error::{Error, Result};
use crate::format::sci;
use crate::operator::{build, leading_eigentriple, subleading_modulus, Discretization, EigenOptions};
use crate::potentials::Potential;

/// Settings of a pressure sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepOptions {
    pub eigen: EigenOptions,
    /// Also estimate the subleading modulus at each `t`.
    pub gap: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { eigen: EigenOptions::default(), gap: true }
    }
}

/// `t -> P(t phi)` on a grid, with derivative estimates.
///
/// Missing values (ends of the second difference, unconverged gaps) are NaN.
#[derive(Clone, Debug, Serialize)]
pub struct PressureCurve {
    pub t: Vec<f64>,
    pub pressure: Vec<f64>,
    /// Centered difference; one-sided at the ends.
    pub p_fd: Vec<f64>,
    /// `int phi d mu_t`.
    pub p_mu: Vec<f64>,
    /// Divided second difference; NaN at the ends.
    pub p2_fd: Vec<f64>,
    pub gap_ratio: Vec<f64>,
    pub converged: Vec<bool>,
    /// Per-`t` dominance label; empty outside skew-product analyses.
    pub label: Vec<String>,
    pub margin: Vec<f64>,
    pub sup_norm: f64,
    pub discretization: Discretization,
    pub scheme_tolerance: f64,
    pub candidates: Vec<TransitionCandidate>,
    /// Checks at the default convexity tolerance, run by the sweep.
    pub checks: Option<CurveChecks>,
    /// `|P(0) - log degree|` when `0` is a grid point.
    pub entropy_deviation: Option<f64>,
}

/// Outcome of the Lipschitz and convexity checks on a curve.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurveChecks {
    /// Largest `|P_i - P_j| / |t_i - t_j|` over grid pairs.
    pub lipschitz_max: f64,
    pub lipschitz_bound: f64,
    pub lipschitz_ok: bool,
    /// Smallest interior second difference.
    pub min_p2_fd: f64,
    pub convexity_tol: f64,
    pub convex_ok: bool,
}

impl PressureCurve {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn index_of(&self, t: f64) -> Option<usize> {
        self.t.iter().position(|&s| (s - t).abs() <= 1e-12 * (1.0 + t.abs()))
    }

    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|&c| c)
    }

    /// Lipschitz bound `sup|phi| + 1e-9` over all grid pairs and
    /// `P2_fd >= -convexity_tol` on the interior.
    pub fn checks(&self, convexity_tol: f64) -> CurveChecks {
        let mut lip = 0.0f64;
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                lip = lip.max((self.pressure[i] - self.pressure[j]).abs() / (self.t[j] - self.t[i]));
            }
        }
        let min_p2 = self
            .p2_fd
            .iter()
            .filter(|v| !v.is_nan())
            .fold(f64::INFINITY, |m, &v| m.min(v));
        let bound = self.sup_norm + 1e-9;
        CurveChecks {
            lipschitz_max: lip,
            lipschitz_bound: bound,
            lipschitz_ok: lip <= bound,
            min_p2_fd: min_p2,
            convexity_tol,
            convex_ok: !(min_p2 < -convexity_tol),
        }
    }

    /// Default convexity tolerance `1e-6 * max |P|`.
    pub fn default_convexity_tol(&self) -> f64 {
        1e-6 * self.pressure.iter().fold(0.0f64, |m, p| m.max(p.abs()))
    }

    /// CSV with columns `t,P,P_fd,P_mu,P2_fd,gap_ratio,converged,label,margin`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,P,P_fd,P_mu,P2_fd,gap_ratio,converged,label,margin")?;
        for i in 0..self.len() {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                sci(self.t[i]),
                sci(self.pressure[i]),
                sci(self.p_fd[i]),
                sci(self.p_mu[i]),
                sci(self.p2_fd[i]),
                sci(self.gap_ratio[i]),
                self.converged[i],
                self.label.get(i).map_or("", String::as_str),
                sci(self.margin.get(i).copied().unwrap_or(f64::NAN)),
            )?;
        }
        Ok(())
    }

    pub(crate) fn fill_derivatives(&mut self) {
        let (p_fd, p2_fd) = finite_differences(&self.t, &self.pressure);
        self.p_fd = p_fd;
        self.p2_fd = p2_fd;
    }
}

/// First (centered, one-sided at the ends) and second divided differences.
pub fn finite_differences(t: &[f64], p: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = t.len();
    let mut d1 = vec![f64::NAN; n];
    let mut d2 = vec![f64::NAN; n];
    if n >= 2 {
        d1[0] = (p[1] - p[0]) / (t[1] - t[0]);
        d1[n - 1] = (p[n - 1] - p[n - 2]) / (t[n - 1] - t[n - 2]);
    }
    for i in 1..n.saturating_sub(1) {
        d1[i] = (p[i + 1] - p[i - 1]) / (t[i + 1] - t[i - 1]);
        let right = (p[i + 1] - p[i]) / (t[i + 1] - t[i]);
        let left = (p[i] - p[i - 1]) / (t[i] - t[i - 1]);
        d2[i] = 2.0 * (right - left) / (t[i + 1] - t[i - 1]);
    }
    (d1, d2)
}

/// `n` equispaced points on `[a, b]`.
pub fn uniform_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n)
            .map(|i| if i == n - 1 { b } else { a + (b - a) * i as f64 / (n - 1) as f64 })
            .collect(),
    }
}

struct Sample {
    pressure: f64,
    p_mu: f64,
    gap: f64,
    converged: bool,
}

/// `P(t phi)` for every `t` of the grid, one operator per `t`.
///
/// Unconverged eigen-iterations are flagged per `t` and the sweep continues;
/// build failures abort it.
pub fn pressure_sweep(
    map: &MapSystem,
    phi: &Potential,
    t_grid: &[f64],
    disc: &Discretization,
    opts: &SweepOptions,
) -> Result<PressureCurve> {
    if t_grid.is_empty() || t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("t grid must be nonempty and strictly increasing".into()));
    }
    let samples: Vec<Sample> = t_grid
        .par_iter()
        .map(|&t| -> Result<Sample> {
            let op = build(map, &phi.scaled(t), disc)?;
            let report = leading_eigentriple(&op, &opts.eigen)?;
            let mu = report.equilibrium_weights();
            let p_mu = op.integrate(&mu, |p| phi.eval(p));
            let (gap, gap_ok) = if opts.gap && report.converged {
                let r = subleading_modulus(&op, &report, &opts.eigen)?;
                (r.gap_ratio.unwrap_or(f64::NAN), r.gap_converged)
            } else {
                (f64::NAN, !opts.gap)
            };
            Ok(Sample {
                pressure: report.pressure,
                p_mu,
                gap,
                converged: report.converged && gap_ok,
            })
        })
        .collect::<Result<_>>()?;
    let mut curve = PressureCurve {
        t: t_grid.to_vec(),
        pressure: samples.iter().map(|s| s.pressure).collect(),
        p_fd: Vec::new(),
        p_mu: samples.iter().map(|s| s.p_mu).collect(),
        p2_fd: Vec::new(),
        gap_ratio: samples.iter().map(|s| s.gap).collect(),
        converged: samples.iter().map(|s| s.converged).collect(),
        label: Vec::new(),
        margin: Vec::new(),
        sup_norm: phi.sup_norm_bound(),
        discretization: *disc,
        scheme_tolerance: disc.tolerance(map),
        candidates: Vec::new(),
        checks: None,
        entropy_deviation: None,
    };
    curve.fill_derivatives();
    curve.checks = Some(curve.checks(curve.default_convexity_tol()));
    curve.entropy_deviation = curve
        .index_of(0.0)
        .map(|i| (curve.pressure[i] - (map.degree() as f64).ln()).abs());
    Ok(curve)
}

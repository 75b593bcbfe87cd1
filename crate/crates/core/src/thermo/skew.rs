use serde::{Serialize, Serializer};
use std::fmt;

use super::curve::{pressure_sweep, PressureCurve, SweepOptions};
use crate::dynamics::{circle_distance, Base, MapSystem, Point, SkewClass, SkewProduct};
use crate::error::{Error, Result};
use crate::operator::{Basis, Discretization};
use crate::potentials::Potential;

/// An invariant boundary circle of a skew product.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundaryKind {
    /// `{y = alpha_j}`, carrying the base dynamics.
    Fiber { index: usize, alpha: f64 },
    /// `{x = x_i}`, carrying the fiber map `f_{x_i}`.
    Base { index: usize, x: f64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundaryPressure {
    pub kind: BoundaryKind,
    pub pressure: Vec<f64>,
    pub converged: Vec<bool>,
}

/// Which system attains the pressure at a given `t`. Indices are 1-based
/// positions in the breakpoint lists.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dominance {
    Interior,
    FiberBoundary(usize),
    BaseBoundary(usize),
    Tie,
}

impl fmt::Display for Dominance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dominance::Interior => write!(f, "interior"),
            Dominance::FiberBoundary(j) => write!(f, "fiber_boundary({j})"),
            Dominance::BaseBoundary(i) => write!(f, "base_boundary({i})"),
            Dominance::Tie => write!(f, "tie"),
        }
    }
}

impl Serialize for Dominance {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Full pressure against the pressures of the invariant boundary circles.
#[derive(Clone, Debug, Serialize)]
pub struct SkewReport {
    pub class: SkewClass,
    /// Full-system curve with `label` and `margin` filled in.
    pub full: PressureCurve,
    pub boundaries: Vec<BoundaryPressure>,
    pub labels: Vec<Dominance>,
    /// `P_full - max boundary pressure`; infinite without boundaries.
    pub margin: Vec<f64>,
    pub scheme_tolerance: f64,
}

impl SkewReport {
    pub fn min_margin(&self) -> f64 {
        self.margin.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn t(&self) -> &[f64] {
        &self.full.t
    }
}

fn base_system(s: &SkewProduct) -> MapSystem {
    match s.base() {
        Base::Torus(t) => MapSystem::Torus(t.clone()),
        Base::Circle(c) => MapSystem::Circle(c.clone()),
    }
}

/// Base points sampled to test whether a fiber breakpoint is fixed by
/// every fiber map.
fn base_samples(s: &SkewProduct) -> Vec<Point> {
    let d = s.base_dim();
    (0..17)
        .map(|k| {
            let c: Vec<f64> = (0..d).map(|a| ((k * (2 * a + 3)) % 17) as f64 / 17.0 + 0.013).collect();
            Point::new(&c)
        })
        .collect()
}

fn invariant_boundaries(s: &SkewProduct) -> Vec<BoundaryKind> {
    let mut out = Vec::new();
    let samples = base_samples(s);
    let origin = Point::new(&vec![0.0; s.base_dim()]);
    for (j, alpha) in s.fiber_breakpoints(&origin).into_iter().enumerate() {
        let fixed = samples
            .iter()
            .all(|x| circle_distance(s.fiber_at(x).eval(alpha), alpha) < 1e-12);
        if fixed {
            out.push(BoundaryKind::Fiber { index: j + 1, alpha });
        }
    }
    if let Base::Circle(g) = s.base() {
        for (i, x) in s.base_breakpoints().into_iter().enumerate() {
            if circle_distance(g.eval(x), x) < 1e-12 {
                out.push(BoundaryKind::Base { index: i + 1, x });
            }
        }
    }
    out
}

fn restricted(phi: &Potential, kind: &BoundaryKind) -> Potential {
    let phi = phi.clone();
    let sup = phi.sup_norm_bound();
    let lip = phi.holder_constant();
    let regularity = phi.regularity();
    match *kind {
        BoundaryKind::Fiber { alpha, .. } => Potential::from_fn(
            format!("{} on y={alpha}", phi.label()),
            sup,
            lip,
            move |x| phi.eval(&Point::with_fiber(x, alpha)),
        ),
        BoundaryKind::Base { x, .. } => Potential::from_fn(
            format!("{} on x={x}", phi.label()),
            sup,
            lip,
            move |y| phi.eval(&Point::with_fiber(&Point::on_circle(x), y.x())),
        ),
    }
    .with_regularity(regularity)
}

/// Compares `P(F, t phi)` with the pressures of the boundary subsystems on
/// the invariant circles `{y = alpha_j}` and `{x = x_i}`.
///
/// Boundary systems are discretized with the basis resolved for the full
/// system, so their discrete operators are principal restrictions of the
/// full one.
pub fn skew_boundary_analysis(
    map: &MapSystem,
    phi: &Potential,
    t_grid: &[f64],
    disc: &Discretization,
    opts: &SweepOptions,
) -> Result<SkewReport> {
    let s = map
        .as_skew()
        .ok_or_else(|| Error::InvalidMap("boundary analysis needs a skew product".into()))?;
    let class = s.class();
    if class == SkewClass::TM1 {
        return Err(Error::InvalidMap("boundary analysis needs constant fiber breakpoints".into()));
    }
    let sub_disc = disc.with_basis(disc.resolved_basis(map).unwrap_or(Basis::Auto));
    let mut full = pressure_sweep(map, phi, t_grid, &sub_disc, opts)?;
    let tol = full.scheme_tolerance;
    let sub_opts = SweepOptions { gap: false, ..*opts };
    let boundaries = invariant_boundaries(s)
        .into_iter()
        .map(|kind| -> Result<BoundaryPressure> {
            let sub_phi = restricted(phi, &kind);
            let curve = match kind {
                BoundaryKind::Fiber { .. } => pressure_sweep(&base_system(s), &sub_phi, t_grid, &sub_disc, &sub_opts)?,
                BoundaryKind::Base { x, .. } => {
                    let fiber: MapSystem = s.fiber_at(&Point::on_circle(x)).into_owned().into();
                    pressure_sweep(&fiber, &sub_phi, t_grid, &sub_disc, &sub_opts)?
                }
            };
            Ok(BoundaryPressure { kind, pressure: curve.pressure, converged: curve.converged })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut labels = Vec::with_capacity(t_grid.len());
    let mut margin = Vec::with_capacity(t_grid.len());
    for k in 0..t_grid.len() {
        let best = boundaries.iter().map(|b| b.pressure[k]).fold(f64::NEG_INFINITY, f64::max);
        let m = full.pressure[k] - best;
        margin.push(m);
        if boundaries.iter().any(|b| !b.converged[k]) {
            full.converged[k] = false;
        }
        let label = if m > 2.0 * tol {
            Dominance::Interior
        } else {
            let near: Vec<&BoundaryPressure> = boundaries
                .iter()
                .filter(|b| b.pressure[k] >= best - 2.0 * tol)
                .collect();
            match near.as_slice() {
                [b] => match b.kind {
                    BoundaryKind::Fiber { index, .. } => Dominance::FiberBoundary(index),
                    BoundaryKind::Base { index, .. } => Dominance::BaseBoundary(index),
                },
                _ => Dominance::Tie,
            }
        };
        labels.push(label);
    }
    full.label = labels.iter().map(ToString::to_string).collect();
    full.margin = margin.clone();
    Ok(SkewReport { class, full, boundaries, labels, margin, scheme_tolerance: tol })
}

use serde::Serialize;

use crate::dynamics::{preimage_tree, Base, MapSystem, Point};
use crate::error::{Error, Result};
use crate::operator::{build, leading_eigentriple, subleading_modulus, Discretization, EigenOptions, Grid, Scheme};
use crate::potentials::Potential;

/// Gap ratio at and above which an equilibrium state is refused.
pub const GAP_COLLAPSE: f64 = 0.999;

/// Where the weights of a discrete measure sit.
#[derive(Clone, Debug)]
pub enum Support {
    /// Collocation nodes or Ulam cells of a grid.
    Grid { scheme: Scheme, grid: Grid },
    /// Explicit atoms.
    Discrete { points: Vec<Point> },
}

/// A probability vector on a grid or on finitely many atoms.
#[derive(Clone, Debug)]
pub struct EquilibriumState {
    weights: Vec<f64>,
    support: Support,
    scheme_tolerance: f64,
    pressure: f64,
    gap_ratio: Option<f64>,
}

impl EquilibriumState {
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn support(&self) -> &Support {
        &self.support
    }

    pub fn scheme_tolerance(&self) -> f64 {
        self.scheme_tolerance
    }

    /// Pressure of the operator the state came from; NaN for atoms.
    pub fn pressure(&self) -> f64 {
        self.pressure
    }

    pub fn gap_ratio(&self) -> Option<f64> {
        self.gap_ratio
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `int g d mu`.
    pub fn integrate<G: Fn(&Point) -> f64 + Sync>(&self, g: G) -> f64 {
        match &self.support {
            Support::Grid { scheme, grid } => grid.integrate(*scheme, &self.weights, g),
            Support::Discrete { points } => self.weights.iter().zip(points).map(|(w, p)| w * g(p)).sum(),
        }
    }

    /// `int g o f d mu - int g d mu`.
    pub fn invariance_defect<G: Fn(&Point) -> f64 + Sync>(&self, map: &MapSystem, g: G) -> f64 {
        self.integrate(|p| g(&map.eval(p))) - self.integrate(&g)
    }

    /// Reported bound on the invariance defect for an observable with
    /// Lipschitz constant `g_lip` composed with a map of Lipschitz constant
    /// `map_lip`.
    pub fn invariance_bound(&self, g_lip: f64, map_lip: f64) -> f64 {
        (1.0 + map_lip) * g_lip * self.scheme_tolerance
    }

    /// A unit atom at `p`.
    pub fn point_mass(p: Point) -> Self {
        Self {
            weights: vec![1.0],
            support: Support::Discrete { points: vec![p] },
            scheme_tolerance: 0.0,
            pressure: f64::NAN,
            gap_ratio: None,
        }
    }
}

/// `mu = h nu` of the discretized operator of `(map, phi)`.
pub fn equilibrium_state(
    map: &MapSystem,
    phi: &Potential,
    disc: &Discretization,
    opts: &EigenOptions,
) -> Result<EquilibriumState> {
    let op = build(map, phi, disc)?;
    let report = leading_eigentriple(&op, opts)?;
    if !report.converged {
        return Err(Error::NotConverged { iterations: report.iterations });
    }
    let report = subleading_modulus(&op, &report, opts)?;
    let gap = report.gap_ratio.unwrap_or(f64::NAN);
    if !(gap < GAP_COLLAPSE) {
        return Err(Error::GapCollapsed { gap_ratio: gap });
    }
    let mut weights = report.equilibrium_weights();
    let mass: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= mass);
    Ok(EquilibriumState {
        weights,
        support: Support::Grid { scheme: op.scheme(), grid: *op.grid() },
        scheme_tolerance: op.scheme_tolerance(),
        pressure: report.pressure,
        gap_ratio: Some(gap),
    })
}

/// Uniform probability on the depth-`n` preimages of `x0`.
pub fn mme_preimage_measure(map: &MapSystem, x0: &Point, n: usize, budget: u128) -> Result<EquilibriumState> {
    let tree = preimage_tree(map, &Potential::constant(0.0), x0, n, budget)?;
    let points: Vec<Point> = tree.leaves().collect();
    let w = 1.0 / points.len() as f64;
    Ok(EquilibriumState {
        weights: vec![w; points.len()],
        support: Support::Discrete { points },
        scheme_tolerance: 0.0,
        pressure: f64::NAN,
        gap_ratio: None,
    })
}

/// Integrated Lyapunov exponents of an invariant measure.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LyapunovExponents {
    /// `int log conorm(Dg) d mu` and `int log ||Dg|| d mu` for skew bases.
    pub base: Option<(f64, f64)>,
    /// `lambda^c = int log|f_x'(y)| d mu`.
    pub fiber: Option<f64>,
    /// All exponents, decreasing.
    pub exponents: Vec<f64>,
    pub lambda_min: f64,
}

pub fn lyapunov_exponents(mu: &EquilibriumState, map: &MapSystem) -> LyapunovExponents {
    let (base, fiber, mut exponents) = match map {
        MapSystem::Circle(c) => {
            let l = mu.integrate(|p| c.derivative(p.x()).abs().ln());
            (None, None, vec![l])
        }
        MapSystem::Torus(t) => (None, None, t.eigen_moduli().iter().map(|m| m.ln()).collect()),
        MapSystem::Skew(s) => {
            let conorm = mu.integrate(|p| s.base().log_conorm(&p.head()));
            let norm = mu.integrate(|p| s.base().log_norm(&p.head()));
            let fiber = mu.integrate(|p| s.fiber_derivative(p).abs().ln());
            let mut ex = match s.base() {
                Base::Circle(_) => vec![conorm],
                Base::Torus(_) if (norm - conorm).abs() < 1e-15 => vec![conorm; s.base_dim()],
                Base::Torus(_) => vec![norm, conorm],
            };
            ex.push(fiber);
            (Some((conorm, norm)), Some(fiber), ex)
        }
    };
    exponents.sort_by(|a, b| b.total_cmp(a));
    let lambda_min = exponents.iter().copied().fold(f64::INFINITY, f64::min);
    LyapunovExponents { base, fiber, exponents, lambda_min }
}

/// Outcome of [`expanding_on_average_certificate`].
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ExpansionCertificate {
    Certified { l: usize, value: f64 },
    Failed { values: Vec<f64> },
}

/// Smallest `l <= l_max` with `int log conorm(Df^l) d mu > 0`.
pub fn expanding_on_average_certificate(
    mu: &EquilibriumState,
    map: &MapSystem,
    l_max: usize,
) -> Result<ExpansionCertificate> {
    if l_max == 0 {
        return Err(Error::InvalidArgument("l_max must be at least 1".into()));
    }
    let mut values = Vec::with_capacity(l_max);
    for l in 1..=l_max {
        let value = mu.integrate(|p| map.log_conorm_iterate(p, l));
        if value > 0.0 {
            return Ok(ExpansionCertificate::Certified { l, value });
        }
        values.push(value);
    }
    Ok(ExpansionCertificate::Failed { values })
}

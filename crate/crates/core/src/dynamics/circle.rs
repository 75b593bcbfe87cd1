//! Full-branch circle maps: expanding, piecewise-linear and intermittent.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::point::{circle_distance, wrap};
use crate::error::{Error, Result};

/// Tolerance for branch inverses (absolute, in the branch coordinate).
pub const INVERSE_TOL: f64 = 1e-14;
const INVERSE_MAX_ITER: usize = 200;

/// The closed-form families a [`CircleMap`] can be built from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CircleKind {
    /// `x -> m x mod 1`.
    Linear { multiplier: u32 },
    /// Linear branches of the given slopes laid out from 0. When the inverse
    /// slopes sum to less than 1 the remainder of the circle is an escape hole.
    PiecewiseLinear { slopes: Vec<f64> },
    /// `x -> x + x^(1+alpha) mod 1`.
    MannevillePomeau { alpha: f64 },
    /// `x -> 2x + epsilon/(2 pi) sin(2 pi x) mod 1`.
    PerturbedDoubling { epsilon: f64 },
    /// `y(1 + (2y)^alpha)` on `[0, 1/2)`, `2y - 1` on `[1/2, 1)`.
    Lsv { alpha: f64 },
}

/// A periodic point with an expansion certificate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Repeller {
    pub point: f64,
    pub period: usize,
    /// `|(T^period)'(point)|`.
    pub multiplier: f64,
}

/// A circle map with `k` full branches.
///
/// Branch `j` maps `[alpha_j, alpha_{j+1})` increasingly onto the circle.
/// Maps may be pre-composed with a rotation: `f(y) = g(y - shift)`, which
/// moves every breakpoint by `shift`.
#[derive(Clone, Debug, PartialEq)]
pub struct CircleMap {
    kind: CircleKind,
    shift: f64,
    /// Unshifted branch domains `[lo, hi)`, in branch order.
    domains: Vec<(f64, f64)>,
}

impl CircleMap {
    pub fn new(kind: CircleKind) -> Result<Self> {
        let domains = match &kind {
            CircleKind::Linear { multiplier } => {
                if *multiplier < 2 {
                    return Err(Error::InvalidMap(format!(
                        "linear multiplier must be at least 2, got {multiplier}"
                    )));
                }
                let m = *multiplier as f64;
                (0..*multiplier)
                    .map(|j| (j as f64 / m, (j + 1) as f64 / m))
                    .collect()
            }
            CircleKind::PiecewiseLinear { slopes } => {
                if slopes.is_empty() || slopes.iter().any(|&s| !(s > 1.0)) {
                    return Err(Error::InvalidMap(format!(
                        "piecewise-linear slopes must all exceed 1, got {slopes:?}"
                    )));
                }
                let total: f64 = slopes.iter().map(|s| 1.0 / s).sum();
                if total > 1.0 + 1e-12 {
                    return Err(Error::InvalidMap(format!(
                        "inverse slopes sum to {total} > 1; branches would overlap"
                    )));
                }
                let mut lo = 0.0;
                slopes
                    .iter()
                    .map(|s| {
                        let hi = lo + 1.0 / s;
                        let d = (lo, hi);
                        lo = hi;
                        d
                    })
                    .collect()
            }
            CircleKind::MannevillePomeau { alpha } => {
                if !(*alpha > 0.0) {
                    return Err(Error::InvalidMap(format!(
                        "Manneville-Pomeau exponent must be positive, got {alpha}"
                    )));
                }
                let a = mp_breakpoint(*alpha);
                vec![(0.0, a), (a, 1.0)]
            }
            CircleKind::PerturbedDoubling { epsilon } => {
                if !(epsilon.abs() < 1.0) {
                    return Err(Error::InvalidMap(format!(
                        "perturbation must satisfy |epsilon| < 1, got {epsilon}"
                    )));
                }
                vec![(0.0, 0.5), (0.5, 1.0)]
            }
            CircleKind::Lsv { alpha } => {
                if !(*alpha > 0.0) {
                    return Err(Error::InvalidMap(format!(
                        "LSV exponent must be positive, got {alpha}"
                    )));
                }
                vec![(0.0, 0.5), (0.5, 1.0)]
            }
        };
        Ok(Self {
            kind,
            shift: 0.0,
            domains,
        })
    }

    pub fn doubling() -> Self {
        Self::new(CircleKind::Linear { multiplier: 2 }).expect("doubling is valid")
    }

    pub fn linear(multiplier: u32) -> Result<Self> {
        Self::new(CircleKind::Linear { multiplier })
    }

    pub fn piecewise_linear(slopes: &[f64]) -> Result<Self> {
        Self::new(CircleKind::PiecewiseLinear {
            slopes: slopes.to_vec(),
        })
    }

    pub fn manneville_pomeau(alpha: f64) -> Result<Self> {
        Self::new(CircleKind::MannevillePomeau { alpha })
    }

    pub fn perturbed_doubling(epsilon: f64) -> Result<Self> {
        Self::new(CircleKind::PerturbedDoubling { epsilon })
    }

    pub fn lsv(alpha: f64) -> Result<Self> {
        Self::new(CircleKind::Lsv { alpha })
    }

    /// Pre-compose with the rotation `y -> y - shift`.
    pub fn rotated(mut self, shift: f64) -> Self {
        self.shift = wrap(self.shift + shift);
        self
    }

    pub fn kind(&self) -> &CircleKind {
        &self.kind
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn branch_count(&self) -> usize {
        self.domains.len()
    }

    /// Breakpoints `alpha_j` (branch-domain starts) in branch order.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.domains
            .iter()
            .map(|&(lo, _)| wrap(lo + self.shift))
            .collect()
    }

    /// Branch domain `[alpha_j, alpha_j + length)` as (start, length).
    pub fn branch_domain(&self, j: usize) -> (f64, f64) {
        let (lo, hi) = self.domains[j];
        (wrap(lo + self.shift), hi - lo)
    }

    /// Points where `|T'| = 1`.
    pub fn neutral_points(&self) -> Vec<f64> {
        match self.kind {
            CircleKind::MannevillePomeau { .. } | CircleKind::Lsv { .. } => vec![self.shift],
            _ => Vec::new(),
        }
    }

    pub fn is_intermittent(&self) -> bool {
        !self.neutral_points().is_empty()
    }

    /// Uniformly expanding: `inf |T'| > 1`.
    pub fn is_expanding(&self) -> bool {
        self.derivative_bounds().0 > 1.0
    }

    /// Whether the map and its derivative are smooth across branch boundaries
    /// (a smooth covering of the circle).
    pub fn is_smooth(&self) -> bool {
        matches!(
            self.kind,
            CircleKind::Linear { .. } | CircleKind::PerturbedDoubling { .. }
        )
    }

    /// Whether the branches cover the whole circle (no escape hole).
    pub fn is_closed(&self) -> bool {
        let last = self.domains.last().expect("at least one branch").1;
        (last - 1.0).abs() < 1e-12
    }

    /// `(inf |T'|, sup |T'|)` over the branch domains.
    pub fn derivative_bounds(&self) -> (f64, f64) {
        match &self.kind {
            CircleKind::Linear { multiplier } => (*multiplier as f64, *multiplier as f64),
            CircleKind::PiecewiseLinear { slopes } => (
                slopes.iter().cloned().fold(f64::INFINITY, f64::min),
                slopes.iter().cloned().fold(0.0, f64::max),
            ),
            CircleKind::MannevillePomeau { alpha } => (1.0, 2.0 + alpha),
            CircleKind::PerturbedDoubling { epsilon } => (2.0 - epsilon.abs(), 2.0 + epsilon.abs()),
            CircleKind::Lsv { alpha } => (1.0, 2.0 + alpha),
        }
    }

    fn unshift(&self, y: f64) -> f64 {
        wrap(y - self.shift)
    }

    /// Branch whose domain contains the unshifted coordinate `u`.
    /// Points in an escape hole are attributed to the last branch.
    fn branch_of_unshifted(&self, u: f64) -> usize {
        self.domains
            .iter()
            .position(|&(lo, hi)| u >= lo && u < hi)
            .unwrap_or(self.domains.len() - 1)
    }

    /// Branch index containing `y`.
    pub fn branch_of(&self, y: f64) -> usize {
        self.branch_of_unshifted(self.unshift(y))
    }

    /// Monotone lift of branch `j`: 0 at the left end of its domain, 1 at the right.
    fn lift(&self, j: usize, u: f64) -> f64 {
        match &self.kind {
            CircleKind::Linear { multiplier } => *multiplier as f64 * u - j as f64,
            CircleKind::PiecewiseLinear { slopes } => slopes[j] * (u - self.domains[j].0),
            CircleKind::MannevillePomeau { alpha } => u + u.powf(1.0 + alpha) - j as f64,
            CircleKind::PerturbedDoubling { epsilon } => {
                2.0 * u + epsilon / (2.0 * PI) * (2.0 * PI * u).sin() - j as f64
            }
            CircleKind::Lsv { alpha } => {
                if j == 0 {
                    u * (1.0 + (2.0 * u).powf(*alpha))
                } else {
                    2.0 * u - 1.0
                }
            }
        }
    }

    fn lift_derivative(&self, j: usize, u: f64) -> f64 {
        match &self.kind {
            CircleKind::Linear { multiplier } => *multiplier as f64,
            CircleKind::PiecewiseLinear { slopes } => slopes[j],
            CircleKind::MannevillePomeau { alpha } => 1.0 + (1.0 + alpha) * u.powf(*alpha),
            CircleKind::PerturbedDoubling { epsilon } => 2.0 + epsilon * (2.0 * PI * u).cos(),
            CircleKind::Lsv { alpha } => {
                if j == 0 {
                    1.0 + (1.0 + alpha) * (2.0 * u).powf(*alpha)
                } else {
                    2.0
                }
            }
        }
    }

    /// `T(y)`, reduced mod 1.
    pub fn eval(&self, y: f64) -> f64 {
        let u = self.unshift(y);
        let j = self.branch_of_unshifted(u);
        wrap(self.lift(j, u))
    }

    /// `T'(y)`.
    pub fn derivative(&self, y: f64) -> f64 {
        let u = self.unshift(y);
        let j = self.branch_of_unshifted(u);
        self.lift_derivative(j, u)
    }

    /// Solve `lift_j(u) = v` for `v` in `[0, 1]`, returning the unshifted `u`.
    fn inverse_lift(&self, j: usize, v: f64) -> Result<f64> {
        let (lo, hi) = self.domains[j];
        match &self.kind {
            CircleKind::Linear { multiplier } => return Ok((j as f64 + v) / *multiplier as f64),
            CircleKind::PiecewiseLinear { slopes } => return Ok(lo + v / slopes[j]),
            CircleKind::Lsv { .. } if j == 1 => return Ok(0.5 * (v + 1.0)),
            _ => {}
        }
        if v <= 0.0 {
            return Ok(lo);
        }
        if v >= 1.0 {
            return Ok(hi);
        }
        // Bracketed Newton: monotone lift, lift(lo) = 0 < v < 1 = lift(hi).
        let (mut a, mut b) = (lo, hi);
        let mut u = lo + v * (hi - lo);
        for _ in 0..INVERSE_MAX_ITER {
            let r = self.lift(j, u) - v;
            if r == 0.0 {
                return Ok(u);
            }
            if r > 0.0 {
                b = u;
            } else {
                a = u;
            }
            let d = self.lift_derivative(j, u);
            let mut next = u - r / d;
            if !(next > a && next < b) {
                next = 0.5 * (a + b);
            }
            if (next - u).abs() < INVERSE_TOL || b - a < INVERSE_TOL {
                let u = next;
                if (self.lift(j, u) - v).abs() <= 1e-12 {
                    return Ok(u);
                }
                break;
            }
            u = next;
        }
        Err(Error::BranchSolveFailure { branch: j, target: v })
    }

    /// The preimage of `p` in branch `j`, as a reduced point in `[alpha_j, alpha_{j+1})`.
    pub fn inverse_branch(&self, j: usize, p: f64) -> Result<f64> {
        if j >= self.domains.len() {
            return Err(Error::InvalidArgument(format!(
                "branch {j} out of range for a {}-branch map",
                self.domains.len()
            )));
        }
        let u = self.inverse_lift(j, wrap(p))?;
        Ok(wrap(u + self.shift))
    }

    /// All preimages of `p`, ordered by branch.
    pub fn preimages(&self, p: f64) -> Result<Vec<f64>> {
        (0..self.branch_count())
            .map(|j| self.inverse_branch(j, p))
            .collect()
    }

    /// Preimage of `v` in `[0, 1]` on branch `j` in the continuous lifted
    /// coordinate: `alpha_j <= result <= alpha_j + length_j`, not reduced.
    /// `v = 1` returns the right end of the branch domain.
    pub fn inverse_branch_lifted(&self, j: usize, v: f64) -> Result<f64> {
        let u = self.inverse_lift(j, v.clamp(0.0, 1.0))?;
        let start = self.domains[j].0;
        Ok(self.branch_domain(j).0 + (u - start))
    }

    /// A periodic point certifying `|(T^k)'(p)| > 1`.
    ///
    /// Searches branch words in order of increasing period, skipping orbits
    /// through neutral points.
    pub fn repeller(&self) -> Result<Repeller> {
        let k = self.branch_count();
        for period in 1..=4usize {
            let count = k.pow(period as u32);
            for code in 0..count {
                let word = decode_word(code, k, period);
                let Ok(p) = self.periodic_point(&word) else { continue };
                // Orbits through a breakpoint of a non-smooth map only see a
                // one-sided derivative.
                let bps = if self.is_smooth() { Vec::new() } else { self.breakpoints() };
                let mut y = p;
                let mut on_breakpoint = false;
                for _ in 0..period {
                    on_breakpoint |= bps.iter().any(|&b| circle_distance(b, y) < 1e-9);
                    y = self.eval(y);
                }
                if on_breakpoint {
                    continue;
                }
                let mut y = p;
                let mut mult = 1.0;
                for _ in 0..period {
                    mult *= self.derivative(y).abs();
                    y = self.eval(y);
                }
                if circle_distance(y, p) < 1e-9 && mult > 1.0 + 1e-9 {
                    return Ok(Repeller {
                        point: p,
                        period,
                        multiplier: mult,
                    });
                }
            }
        }
        Err(Error::InvalidMap(
            "no repeller periodic point found up to period 4".into(),
        ))
    }

    /// Fixed point of the composed inverse branches along `word`.
    ///
    /// Composes in the lifted coordinate so that orbits ending at the right
    /// end of a branch domain (`1 = 0` on the circle) do not wrap mid-chain.
    pub(crate) fn periodic_point(&self, word: &[usize]) -> Result<f64> {
        let mut x = 0.5;
        for _ in 0..500 {
            let mut y = x;
            for &j in word.iter().rev() {
                let lifted = self.inverse_branch_lifted(j, y)?;
                y = if lifted > 1.0 { lifted - 1.0 } else { lifted };
            }
            if circle_distance(x, y) < 1e-14 {
                return Ok(wrap(y));
            }
            x = y;
        }
        Err(Error::NotExpanding { word: word.to_vec() })
    }
}

/// Most-significant-first base-`k` digits of `code`, `len` digits long.
pub(crate) fn decode_word(mut code: usize, k: usize, len: usize) -> Vec<usize> {
    let mut word = vec![0; len];
    for slot in word.iter_mut().rev() {
        *slot = code % k;
        code /= k;
    }
    word
}

/// Solution of `a + a^(1+alpha) = 1` by bisection.
fn mp_breakpoint(alpha: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid + mid.powf(1.0 + alpha) < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-16 {
            break;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn doubling_eval_and_preimages() {
        let f = CircleMap::doubling();
        assert!((f.eval(0.3) - 0.6).abs() < 1e-15);
        assert_eq!(f.preimages(0.5).unwrap(), vec![0.25, 0.75]);
        assert_eq!(f.inverse_branch(0, 0.5).unwrap(), 0.25);
    }

    #[test]
    fn piecewise_linear_open_map() {
        let f = CircleMap::piecewise_linear(&[2.0, 3.0]).unwrap();
        assert!(!f.is_closed());
        assert_eq!(f.inverse_branch(1, 0.0).unwrap(), 0.5);
        assert!((f.derivative(0.25) - 2.0).abs() < 1e-15);
        assert!((f.derivative(0.6) - 3.0).abs() < 1e-15);
        let (start, len) = f.branch_domain(1);
        assert_eq!(start, 0.5);
        assert!((len - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_overlapping_branches() {
        assert!(CircleMap::piecewise_linear(&[1.5, 1.5]).is_err());
        assert!(CircleMap::piecewise_linear(&[2.0, 0.5]).is_err());
    }

    #[test]
    fn manneville_pomeau_neutral_fixed_point() {
        let f = CircleMap::manneville_pomeau(1.0).unwrap();
        assert_eq!(f.eval(0.0), 0.0);
        assert_eq!(f.derivative(0.0), 1.0);
        assert_eq!(f.neutral_points(), vec![0.0]);
        assert!(!f.is_expanding());
    }

    #[test]
    fn mp_inverse_branch_residual() {
        let f = CircleMap::manneville_pomeau(0.5).unwrap();
        let x = f.inverse_branch(0, 0.9).unwrap();
        assert!((x + x.powf(1.5) - 0.9).abs() < 1e-12);
        for p in [0.25, 0.0, 0.999, 1e-9] {
            for q in f.preimages(p).unwrap() {
                assert!(circle_distance(f.eval(q), p) < 1e-12, "p={p} q={q}");
            }
        }
    }

    #[test]
    fn rotated_map_moves_breakpoints() {
        let f = CircleMap::lsv(0.5).unwrap().rotated(0.2);
        let bp = f.breakpoints();
        assert!((bp[0] - 0.2).abs() < 1e-15 && (bp[1] - 0.7).abs() < 1e-15);
        assert_eq!(f.neutral_points(), vec![0.2]);
        assert!(f.eval(0.2).abs() < 1e-15);
        for p in [0.0, 0.33, 0.9] {
            for q in f.preimages(p).unwrap() {
                assert!(circle_distance(f.eval(q), p) < 1e-12);
            }
        }
    }

    #[test]
    fn repellers_have_expanding_multipliers() {
        let d = CircleMap::doubling().repeller().unwrap();
        assert_eq!(d.period, 1);
        assert_eq!(d.multiplier, 2.0);
        let mp = CircleMap::manneville_pomeau(0.5).unwrap().repeller().unwrap();
        assert!(mp.period >= 2 && mp.multiplier > 1.0);
        let lsv = CircleMap::lsv(0.3).unwrap().repeller().unwrap();
        assert!(lsv.multiplier > 1.0);
    }

    #[test]
    fn lifted_inverse_reaches_domain_end() {
        let f = CircleMap::manneville_pomeau(0.5).unwrap();
        let a = f.branch_domain(1).0;
        assert!((f.inverse_branch_lifted(0, 1.0).unwrap() - a).abs() < 1e-15);
        assert_eq!(f.inverse_branch_lifted(1, 1.0).unwrap(), 1.0);
    }
}

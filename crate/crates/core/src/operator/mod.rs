//! Finite-rank discretizations of the transfer operator
//! `L_{f,phi} g(x) = sum_{f(y) = x} e^{phi(y)} g(y)` and their spectra.
//!
//! Two schemes are provided:
//!
//! * **Ulam**: projection onto cell averages of a uniform partition.
//! * **Collocation**: values at equispaced nodes, interpolated with either
//!   trigonometric cardinal functions (spectrally accurate for smooth
//!   coverings) or periodic hat functions (entrywise nonnegative).
//!
//! Both are tensorized on tori and skew products.

mod build;
mod eigen;
mod sparse;

pub use build::build;
pub use eigen::{leading_eigentriple, subleading_modulus, EigenOptions, Residuals, SpectralReport};
pub use sparse::CsrMatrix;

use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::dynamics::{MapSystem, Point};
use crate::error::{Error, Result};
use crate::format::sci;
use crate::quadrature::gauss_legendre;

/// Largest number of unknowns of a discretization.
pub const MAX_UNKNOWNS: usize = 1 << 22;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Ulam,
    Collocation,
}

/// Interpolation basis of the collocation scheme.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    /// Trigonometric for smooth coverings, piecewise linear otherwise.
    #[default]
    Auto,
    Trigonometric,
    PiecewiseLinear,
}

/// Cell quadrature of the Ulam scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Quadrature {
    /// Tensor Gauss-Legendre with `nodes` points per axis.
    Gauss { nodes: usize },
    /// Uniform random nodes, `samples` per cell.
    MonteCarlo { samples: usize, seed: u64 },
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature::Gauss { nodes: 8 }
    }
}

/// A scheme together with its resolution (`n` points per axis).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Discretization {
    pub scheme: Scheme,
    pub n: usize,
    #[serde(default)]
    pub basis: Basis,
    #[serde(default)]
    pub quadrature: Quadrature,
}

impl Discretization {
    pub fn ulam(n: usize) -> Self {
        Self {
            scheme: Scheme::Ulam,
            n,
            basis: Basis::Auto,
            quadrature: Quadrature::default(),
        }
    }

    pub fn collocation(n: usize) -> Self {
        Self {
            scheme: Scheme::Collocation,
            n,
            basis: Basis::Auto,
            quadrature: Quadrature::default(),
        }
    }

    pub fn with_basis(mut self, basis: Basis) -> Self {
        self.basis = basis;
        self
    }

    pub fn with_quadrature(mut self, quadrature: Quadrature) -> Self {
        self.quadrature = quadrature;
        self
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    /// The collocation basis used on `map`; `None` for Ulam.
    pub fn resolved_basis(&self, map: &MapSystem) -> Option<Basis> {
        match self.scheme {
            Scheme::Ulam => None,
            Scheme::Collocation => Some(match self.basis {
                Basis::Auto if map.is_smooth() => Basis::Trigonometric,
                Basis::Auto => Basis::PiecewiseLinear,
                b => b,
            }),
        }
    }

    /// Nominal discretization error on `map`: `1/n` for Ulam and hat
    /// collocation, `1e-9` for trigonometric collocation.
    pub fn tolerance(&self, map: &MapSystem) -> f64 {
        match self.resolved_basis(map) {
            Some(Basis::Trigonometric) => 1e-9,
            _ => 1.0 / self.n as f64,
        }
    }
}

/// A uniform tensor grid with `n` points per axis, last axis fastest.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Grid {
    n: usize,
    dim: usize,
    size: usize,
}

impl Grid {
    pub fn new(n: usize, dim: usize) -> Result<Self> {
        let size = n
            .checked_pow(dim as u32)
            .filter(|&s| s <= MAX_UNKNOWNS)
            .ok_or_else(|| Error::InvalidArgument(format!("grid {n}^{dim} is too large")))?;
        Ok(Self { n, dim, size })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn multi_index(&self, mut i: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim];
        for slot in idx.iter_mut().rev() {
            *slot = i % self.n;
            i /= self.n;
        }
        idx
    }

    /// Collocation node `i`: coordinates `k_a / n`.
    pub fn node(&self, i: usize) -> Point {
        let c: Vec<f64> = self
            .multi_index(i)
            .into_iter()
            .map(|k| k as f64 / self.n as f64)
            .collect();
        Point::new(&c)
    }

    /// Ulam cell `i` center: coordinates `(k_a + 1/2) / n`.
    pub fn cell_center(&self, i: usize) -> Point {
        let c: Vec<f64> = self
            .multi_index(i)
            .into_iter()
            .map(|k| (k as f64 + 0.5) / self.n as f64)
            .collect();
        Point::new(&c)
    }

    /// Index of the cell containing `p`.
    pub fn cell_of(&self, p: &Point) -> usize {
        p.coords().iter().fold(0, |acc, &x| {
            let k = ((x * self.n as f64).floor() as usize).min(self.n - 1);
            acc * self.n + k
        })
    }

    /// `sum_i w_i g(p_i)`: point values at collocation nodes, Gauss
    /// averages over Ulam cells.
    pub fn integrate<G: Fn(&Point) -> f64 + Sync>(&self, scheme: Scheme, weights: &[f64], g: G) -> f64 {
        assert_eq!(weights.len(), self.size, "weight vector length mismatch");
        match scheme {
            Scheme::Collocation => weights
                .iter()
                .enumerate()
                .map(|(i, w)| w * g(&self.node(i)))
                .sum(),
            Scheme::Ulam => {
                let q = if self.dim() == 1 { 4 } else { 2 };
                let (x, w) = gauss_legendre(q);
                let n = self.n() as f64;
                let dim = self.dim();
                weights
                    .iter()
                    .enumerate()
                    .map(|(i, &wi)| {
                        if wi == 0.0 {
                            return 0.0;
                        }
                        let corner = self.multi_index(i);
                        let mut acc = 0.0;
                        for code in 0..q.pow(dim as u32) {
                            let mut c = [0.0; 4];
                            let mut weight = 1.0;
                            let mut rest = code;
                            for a in 0..dim {
                                let k = rest % q;
                                rest /= q;
                                c[a] = (corner[a] as f64 + 0.5 * (x[k] + 1.0)) / n;
                                weight *= 0.5 * w[k];
                            }
                            acc += weight * g(&Point::new(&c[..dim]));
                        }
                        wi * acc
                    })
                    .sum()
            }
        }
    }
}

/// A discretized transfer operator. Stored entries are scaled by
/// `e^{-shift}`; eigenvalues of the true operator are `e^{shift}` times those
/// of the stored matrix.
#[derive(Clone, Debug)]
pub struct DiscretizedOperator {
    scheme: Scheme,
    basis: Option<Basis>,
    grid: Grid,
    matrix: CsrMatrix,
    shift: f64,
    nonnegative: bool,
}

impl DiscretizedOperator {
    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// Resolved collocation basis; `None` for Ulam.
    pub fn basis(&self) -> Option<Basis> {
        self.basis
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Number of unknowns.
    pub fn size(&self) -> usize {
        self.grid.size()
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    /// The potential shift `s`.
    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// Whether every stored entry is `>= 0`.
    pub fn is_nonnegative(&self) -> bool {
        self.nonnegative
    }

    /// `e^{-s} A v`.
    pub fn apply_scaled(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        self.matrix.mul(v, &mut out);
        out
    }

    /// `e^{-s} A^T v`.
    pub fn apply_transpose_scaled(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        self.matrix.mul_transpose(v, &mut out);
        out
    }

    /// `A v` with the shift restored.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let s = self.shift.exp();
        self.apply_scaled(v).into_iter().map(|x| x * s).collect()
    }

    /// `A^T v` with the shift restored.
    pub fn apply_transpose(&self, v: &[f64]) -> Vec<f64> {
        let s = self.shift.exp();
        self.apply_transpose_scaled(v).into_iter().map(|x| x * s).collect()
    }

    /// Grid sample points: collocation nodes or Ulam cell centers.
    pub fn sample_point(&self, i: usize) -> Point {
        match self.scheme {
            Scheme::Ulam => self.grid.cell_center(i),
            Scheme::Collocation => self.grid.node(i),
        }
    }

    /// Nominal discretization error: `1/n` for Ulam and hat collocation,
    /// near machine precision for trigonometric collocation.
    pub fn scheme_tolerance(&self) -> f64 {
        match self.basis {
            Some(Basis::Trigonometric) => 1e-9,
            _ => 1.0 / self.grid.n() as f64,
        }
    }

    /// `sum_i w_i g(p_i)` over the grid; see [`Grid::integrate`].
    pub fn integrate<G: Fn(&Point) -> f64 + Sync>(&self, weights: &[f64], g: G) -> f64 {
        self.grid.integrate(self.scheme, weights, g)
    }

    /// CSV of the eigenvectors: one coordinate column per axis, then `h`, `nu`.
    pub fn write_eigenvectors_csv<W: Write>(&self, report: &SpectralReport, mut out: W) -> Result<()> {
        let axes: Vec<String> = (1..=self.grid.dim()).map(|a| format!("x{a}")).collect();
        writeln!(out, "{},h,nu", axes.join(","))?;
        for i in 0..self.size() {
            let p = self.sample_point(i);
            let coords: Vec<String> = p.coords().iter().map(|&c| sci(c)).collect();
            writeln!(out, "{},{},{}", coords.join(","), sci(report.h[i]), sci(report.nu[i]))?;
        }
        Ok(())
    }
}

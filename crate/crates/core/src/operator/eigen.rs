use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{Basis, DiscretizedOperator, Scheme};
use crate::error::{Error, Result};

/// Stopping rules of the eigen-iterations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenOptions {
    /// Relative residual `||A h - lambda h|| / (lambda ||h||)` to stop at.
    pub tol: f64,
    pub max_iter: usize,
    /// Relative change of the subleading modulus to stop at.
    pub sub_tol: f64,
    pub sub_max_iter: usize,
    /// Block size of the deflated subspace iteration.
    pub block: usize,
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            tol: 1e-11,
            max_iter: 200_000,
            sub_tol: 1e-9,
            sub_max_iter: 20_000,
            block: 6,
            seed: 0x7e57,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Residuals {
    pub right: f64,
    pub left: f64,
}

/// Leading eigentriple `(lambda1, h, nu)` and the subleading modulus.
///
/// `h` and `nu` are normalized by `sum nu = 1` and `sum h nu = 1`.
#[derive(Clone, Debug, Serialize)]
pub struct SpectralReport {
    pub scheme: Scheme,
    pub basis: Option<Basis>,
    #[serde(rename = "N")]
    pub n: usize,
    pub size: usize,
    /// `e^{shift} * lambda1_scaled`; infinite when that overflows.
    pub lambda1: f64,
    pub pressure: f64,
    pub shift: f64,
    pub lambda1_scaled: f64,
    pub lambda2_modulus: Option<f64>,
    pub gap_ratio: Option<f64>,
    pub gap_converged: bool,
    pub residuals: Residuals,
    pub iterations: usize,
    pub iterations_left: usize,
    pub iterations_subleading: usize,
    pub converged: bool,
    #[serde(skip)]
    pub h: Vec<f64>,
    #[serde(skip)]
    pub nu: Vec<f64>,
}

impl SpectralReport {
    /// Equilibrium weights `h_i nu_i`.
    pub fn equilibrium_weights(&self) -> Vec<f64> {
        self.h.iter().zip(&self.nu).map(|(h, n)| h * n).collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sup_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

struct PowerResult {
    lambda: f64,
    vector: Vec<f64>,
    residual: f64,
    iterations: usize,
    converged: bool,
}

fn power_iteration<F: Fn(&[f64]) -> Vec<f64>>(
    apply: F,
    start: Vec<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<PowerResult> {
    let mut v = start;
    let norm = sup_norm(&v);
    v.iter_mut().for_each(|x| *x /= norm);
    let mut lambda = 0.0;
    let mut residual = f64::INFINITY;
    for k in 1..=max_iter {
        let w = apply(&v);
        lambda = dot(&v, &w) / dot(&v, &v);
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "power iteration produced a non-positive Rayleigh quotient {lambda}"
            )));
        }
        residual = w
            .iter()
            .zip(&v)
            .fold(0.0f64, |m, (wi, vi)| m.max((wi - lambda * vi).abs()))
            / (lambda * sup_norm(&v));
        let wn = sup_norm(&w);
        v = w.into_iter().map(|x| x / wn).collect();
        if residual < tol {
            return Ok(PowerResult { lambda, vector: v, residual, iterations: k, converged: true });
        }
    }
    Ok(PowerResult { lambda, vector: v, residual, iterations: max_iter, converged: false })
}

/// Power iteration for `h` from the constant vector and transpose iteration
/// for `nu` from the uniform mass.
///
/// A non-converged iteration is reported through `converged = false`.
pub fn leading_eigentriple(op: &DiscretizedOperator, opts: &EigenOptions) -> Result<SpectralReport> {
    let size = op.size();
    let right = power_iteration(|v| op.apply_scaled(v), vec![1.0; size], opts.tol, opts.max_iter)?;
    let left = power_iteration(
        |v| op.apply_transpose_scaled(v),
        vec![1.0 / size as f64; size],
        opts.tol,
        opts.max_iter,
    )?;
    let lambda = right.lambda;
    let mut nu = left.vector;
    let mass: f64 = nu.iter().sum();
    nu.iter_mut().for_each(|x| *x /= mass);
    let mut h = right.vector;
    let c = dot(&h, &nu);
    h.iter_mut().for_each(|x| *x /= c);
    let pressure = lambda.ln() + op.shift();
    Ok(SpectralReport {
        scheme: op.scheme(),
        basis: op.basis(),
        n: op.grid().n(),
        size,
        lambda1: pressure.exp(),
        pressure,
        shift: op.shift(),
        lambda1_scaled: lambda,
        lambda2_modulus: None,
        gap_ratio: None,
        gap_converged: false,
        residuals: Residuals { right: right.residual, left: left.residual },
        iterations: right.iterations,
        iterations_left: left.iterations,
        iterations_subleading: 0,
        converged: right.converged && left.converged,
        h,
        nu,
    })
}

/// Modified Gram-Schmidt, two passes. Columns that are numerically
/// dependent on earlier ones are zeroed and stay zero.
fn orthonormalize(block: &mut [Vec<f64>]) {
    for c in 0..block.len() {
        let before = dot(&block[c], &block[c]).sqrt();
        for _pass in 0..2 {
            for p in 0..c {
                let (done, rest) = block.split_at_mut(c);
                let r = dot(&done[p], &rest[0]);
                rest[0].iter_mut().zip(&done[p]).for_each(|(x, q)| *x -= r * q);
            }
        }
        let norm = dot(&block[c], &block[c]).sqrt();
        if norm > 1e-12 * before && norm > 0.0 {
            block[c].iter_mut().for_each(|x| *x /= norm);
        } else {
            block[c].iter_mut().for_each(|x| *x = 0.0);
        }
    }
}

/// Dominant modulus of the deflated operator `v -> A(v - h <nu, v>)`, by
/// subspace iteration with Rayleigh-Ritz extraction.
pub fn subleading_modulus(
    op: &DiscretizedOperator,
    report: &SpectralReport,
    opts: &EigenOptions,
) -> Result<SpectralReport> {
    if !report.converged {
        return Err(Error::NotConverged { iterations: report.iterations });
    }
    let size = op.size();
    let p = opts.block.clamp(1, size.saturating_sub(1).max(1));
    let h = &report.h;
    let nu = &report.nu;
    let project = |v: &mut Vec<f64>| {
        let c = dot(nu, v);
        v.iter_mut().zip(h).for_each(|(x, hi)| *x -= c * hi);
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut block: Vec<Vec<f64>> = (0..p)
        .map(|_| {
            let mut v: Vec<f64> = (0..size).map(|_| rng.gen_range(-1.0..1.0)).collect();
            project(&mut v);
            v
        })
        .collect();
    orthonormalize(&mut block);
    let lambda = report.lambda1_scaled;
    let mut modulus = 0.0;
    let mut prev = f64::NAN;
    let mut stable = 0;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.sub_max_iter {
        iterations += 1;
        let images: Vec<Vec<f64>> = block
            .iter()
            .map(|v| {
                let mut w = op.apply_scaled(v);
                project(&mut w);
                w
            })
            .collect();
        let largest = images.iter().map(|w| dot(w, w).sqrt()).fold(0.0f64, f64::max);
        // Below the accuracy of the deflation the block is numerically zero.
        if largest < 100.0 * opts.tol * lambda {
            modulus = 0.0;
            converged = true;
            break;
        }
        let ritz = DMatrix::from_fn(p, p, |i, j| dot(&block[i], &images[j]));
        modulus = ritz
            .complex_eigenvalues()
            .iter()
            .fold(0.0f64, |m, z| m.max(z.norm()));
        if (modulus - prev).abs() < opts.sub_tol * lambda {
            stable += 1;
            if stable >= 3 {
                converged = true;
                break;
            }
        } else {
            stable = 0;
        }
        prev = modulus;
        block = images;
        orthonormalize(&mut block);
    }
    let mut out = report.clone();
    out.lambda2_modulus = Some(modulus * op.shift().exp());
    out.gap_ratio = Some(modulus / lambda);
    out.gap_converged = converged;
    out.iterations_subleading = iterations;
    Ok(out)
}

//! Brute-force pressure computations independent of the discretized
//! operator: preimage-tree sums, periodic-orbit sums, closed forms and a
//! dense eigensolver for small operators.

use nalgebra::{Complex, DMatrix};
use rayon::prelude::*;

use crate::dynamics::{periodic_points, MapSystem, Point};
use crate::error::{Error, Result};
use crate::operator::DiscretizedOperator;
use crate::potentials::{birkhoff_sum, Potential};

/// Largest operator the dense oracle accepts.
pub const DENSE_ORACLE_MAX: usize = 64;

/// A nonnegative number stored as `exp(log_max) * scaled`.
#[derive(Clone, Copy, Debug)]
struct LogSum {
    log_max: f64,
    scaled: f64,
}

impl LogSum {
    const ZERO: Self = Self { log_max: f64::NEG_INFINITY, scaled: 0.0 };

    fn add_log(&mut self, x: f64) {
        self.merge(LogSum { log_max: x, scaled: 1.0 });
    }

    fn merge(&mut self, other: LogSum) {
        if other.scaled == 0.0 {
            return;
        }
        if self.scaled == 0.0 {
            *self = other;
        } else if other.log_max > self.log_max {
            self.scaled = self.scaled * (self.log_max - other.log_max).exp() + other.scaled;
            self.log_max = other.log_max;
        } else {
            self.scaled += other.scaled * (other.log_max - self.log_max).exp();
        }
    }

    fn ln(&self) -> f64 {
        self.log_max + self.scaled.ln()
    }
}

/// Depth-first accumulation of `e^{S_k phi}` per level into `levels[k]`.
fn descend(
    map: &MapSystem,
    phi: &Potential,
    p: &Point,
    weight: f64,
    depth: usize,
    n: usize,
    levels: &mut [LogSum],
) -> Result<()> {
    levels[depth].add_log(weight);
    if depth == n {
        return Ok(());
    }
    for q in map.preimages(p)? {
        descend(map, phi, &q, weight + phi.eval(&q), depth + 1, n, levels)?;
    }
    Ok(())
}

/// `log Z_k(x0) = log sum_{f^k y = x0} e^{S_k phi(y)}` for `k = 0..=n`.
///
/// The tree is split into independent subtrees after a few levels; partial
/// sums are combined in branch-word order, so the result does not depend on
/// the number of workers.
pub fn log_partition_sums(
    map: &MapSystem,
    phi: &Potential,
    x0: &Point,
    n: usize,
    budget: u128,
) -> Result<Vec<f64>> {
    let degree = map.degree();
    let requested = (degree as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if requested > budget {
        return Err(Error::BudgetExceeded { requested, budget });
    }
    let mut levels = vec![LogSum::ZERO; n + 1];
    let mut frontier = vec![(*x0, 0.0)];
    let mut depth = 0;
    while depth < n && frontier.len() < 256 {
        for (_, w) in &frontier {
            levels[depth].add_log(*w);
        }
        let mut next = Vec::with_capacity(frontier.len() * degree);
        for (p, w) in &frontier {
            for q in map.preimages(p)? {
                next.push((q, w + phi.eval(&q)));
            }
        }
        frontier = next;
        depth += 1;
    }
    let partials: Vec<Vec<LogSum>> = frontier
        .par_iter()
        .map(|(p, w)| {
            let mut local = vec![LogSum::ZERO; n + 1];
            descend(map, phi, p, *w, depth, n, &mut local)?;
            Ok(local)
        })
        .collect::<Result<_>>()?;
    for local in partials {
        for (acc, part) in levels.iter_mut().zip(local).skip(depth) {
            acc.merge(part);
        }
    }
    Ok(levels.iter().map(LogSum::ln).collect())
}

/// `(1/n) log (L^n 1)(x0)` by enumeration of `f^{-n}(x0)`.
pub fn pressure_preimage_sum(
    map: &MapSystem,
    phi: &Potential,
    x0: &Point,
    n: usize,
    budget: u128,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("preimage depth must be positive".into()));
    }
    Ok(log_partition_sums(map, phi, x0, n, budget)?[n] / n as f64)
}

/// `log Z_n(x0) - log Z_{n-1}(x0)`, the successive-ratio estimate from the
/// same enumeration.
pub fn pressure_preimage_ratio(
    map: &MapSystem,
    phi: &Potential,
    x0: &Point,
    n: usize,
    budget: u128,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("preimage depth must be positive".into()));
    }
    let z = log_partition_sums(map, phi, x0, n, budget)?;
    Ok(z[n] - z[n - 1])
}

/// `(1/n) log sum_{f^n x = x} e^{S_n phi(x)}`.
pub fn pressure_periodic_sum(map: &MapSystem, phi: &Potential, n: usize, budget: u128) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("period must be positive".into()));
    }
    let points = periodic_points(map, n, budget)?;
    let weights: Vec<f64> = points
        .par_iter()
        .map(|p| birkhoff_sum(phi, map, p, n))
        .collect();
    let mut acc = LogSum::ZERO;
    for w in weights {
        acc.add_log(w);
    }
    Ok(acc.ln() / n as f64)
}

/// `log sum_j slope_j^{-t}`.
pub fn closed_form_pressure_pl(slopes: &[f64], t: f64) -> Result<f64> {
    if slopes.is_empty() || slopes.iter().any(|&s| !(s > 1.0)) {
        return Err(Error::InvalidArgument(format!(
            "slopes must all exceed 1, got {slopes:?}"
        )));
    }
    let mut acc = LogSum::ZERO;
    for s in slopes {
        acc.add_log(-t * s.ln());
    }
    Ok(acc.ln())
}

/// All eigenvalues of a small operator (shift restored), sorted by
/// decreasing modulus.
pub fn dense_spectrum_oracle(op: &DiscretizedOperator) -> Result<Vec<Complex<f64>>> {
    let n = op.size();
    if n > DENSE_ORACLE_MAX {
        return Err(Error::InvalidArgument(format!(
            "dense oracle needs at most {DENSE_ORACLE_MAX} unknowns, got {n}"
        )));
    }
    let dense = DMatrix::from_row_slice(n, n, &op.matrix().to_dense());
    let scale = op.shift().exp();
    let mut eig: Vec<Complex<f64>> = dense
        .complex_eigenvalues()
        .iter()
        .map(|z| z * scale)
        .collect();
    eig.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
    Ok(eig)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::CircleMap;
    use crate::operator::{build, Discretization};
    use crate::potentials::{geometric_potential, GeometricScope};

    fn doubling() -> MapSystem {
        CircleMap::doubling().into()
    }

    #[test]
    fn preimage_sum_of_constants() {
        let d = doubling();
        for x0 in [0.0, 0.3] {
            let p = pressure_preimage_sum(&d, &Potential::constant(0.0), &Point::on_circle(x0), 12, 1 << 20).unwrap();
            assert!((p - 2f64.ln()).abs() < 1e-14);
            let p = pressure_preimage_sum(&d, &Potential::constant(0.7), &Point::on_circle(x0), 12, 1 << 20).unwrap();
            assert!((p - 2f64.ln() - 0.7).abs() < 1e-14);
        }
        assert!(matches!(
            pressure_preimage_sum(&d, &Potential::constant(0.0), &Point::on_circle(0.0), 30, 1 << 20),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn preimage_sum_piecewise_linear() {
        let f: MapSystem = CircleMap::piecewise_linear(&[2.0, 3.0]).unwrap().into();
        let phi = geometric_potential(&f, GeometricScope::Full).unwrap().scaled(2.0);
        let p = pressure_preimage_sum(&f, &phi, &Point::on_circle(0.2), 14, 1 << 20).unwrap();
        assert!((p - (13.0f64 / 36.0).ln()).abs() < 1e-9);
    }

    #[test]
    fn periodic_sums() {
        let d = doubling();
        let p = pressure_periodic_sum(&d, &Potential::constant(0.0), 10, 1 << 20).unwrap();
        assert!((p - 1023f64.ln() / 10.0).abs() < 1e-14);
        let q = pressure_periodic_sum(&d, &Potential::constant(0.25), 10, 1 << 20).unwrap();
        assert!((q - p - 0.25).abs() < 1e-14);
        let f: MapSystem = CircleMap::piecewise_linear(&[2.0, 3.0]).unwrap().into();
        let phi = geometric_potential(&f, GeometricScope::Full).unwrap();
        let p = pressure_periodic_sum(&f, &phi, 12, 1 << 20).unwrap();
        assert!((p - (5.0f64 / 6.0).ln()).abs() < 1e-3);
        let mp: MapSystem = CircleMap::manneville_pomeau(0.5).unwrap().into();
        assert!(matches!(
            pressure_periodic_sum(&mp, &Potential::constant(0.0), 3, 1 << 20),
            Err(Error::NotExpanding { .. })
        ));
    }

    #[test]
    fn closed_forms() {
        assert!(closed_form_pressure_pl(&[2.0, 2.0], 1.0).unwrap().abs() < 1e-15);
        assert!((closed_form_pressure_pl(&[2.0, 3.0], 0.0).unwrap() - 2f64.ln()).abs() < 1e-15);
        let p = closed_form_pressure_pl(&[2.0, 3.0], 2.0).unwrap();
        assert!((p - (13.0f64 / 36.0).ln()).abs() < 1e-15);
        assert!(closed_form_pressure_pl(&[2.0, 1.0], 1.0).is_err());
    }

    #[test]
    fn dense_oracle_scales_with_constants() {
        let d = doubling();
        let disc = Discretization::collocation(17);
        let a = dense_spectrum_oracle(&build(&d, &Potential::constant(0.0), &disc).unwrap()).unwrap();
        let b = dense_spectrum_oracle(&build(&d, &Potential::constant(0.5), &disc).unwrap()).unwrap();
        assert!((a[0].re - 2.0).abs() < 1e-10 && a[0].im.abs() < 1e-10);
        assert!(a[1].norm() < 1.0);
        for (x, y) in a.iter().zip(&b) {
            assert!((x.norm() * 0.5f64.exp() - y.norm()).abs() < 1e-9);
        }
        let big = build(&d, &Potential::constant(0.0), &Discretization::collocation(65)).unwrap();
        assert!(dense_spectrum_oracle(&big).is_err());
    }
}

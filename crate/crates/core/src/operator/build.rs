use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::PI;

use super::sparse::CsrMatrix;
use super::{Basis, Discretization, DiscretizedOperator, Grid, Quadrature, Scheme};
use crate::dynamics::{wrap, CircleMap, MapSystem, Point};
use crate::error::{Error, Result};
use crate::potentials::Potential;
use crate::quadrature::{gauss_legendre, MappedRule};

/// Largest number of stored entries a build may produce.
const MAX_ENTRIES: usize = 1 << 27;

type Row = (f64, Vec<(usize, f64)>);

/// Discretize `L_{f,phi}` on a uniform grid with `disc.n` points per axis.
///
/// Weights are computed as `exp(phi - s)` with `s` the largest potential
/// value met during assembly; the shift is stored on the operator.
pub fn build(map: &MapSystem, phi: &Potential, disc: &Discretization) -> Result<DiscretizedOperator> {
    if disc.n < 8 {
        return Err(Error::InvalidArgument(format!(
            "grid size must be at least 8, got {}",
            disc.n
        )));
    }
    let grid = Grid::new(disc.n, map.dim())?;
    let basis = disc.resolved_basis(map);
    let per_row = match basis {
        Some(Basis::Trigonometric) => map.degree() * grid.size(),
        _ => 4 * map.degree() << grid.dim(),
    };
    if per_row.saturating_mul(grid.size()) > MAX_ENTRIES {
        return Err(Error::InvalidArgument(format!(
            "discretization with {} unknowns is too large for this basis",
            grid.size()
        )));
    }
    let rows: Vec<Row> = match (disc.scheme, basis, &disc.quadrature, map) {
        (Scheme::Ulam, _, Quadrature::Gauss { nodes }, MapSystem::Circle(c)) => {
            let (x, w) = gauss_legendre(*nodes);
            (0..grid.size())
                .into_par_iter()
                .map(|i| ulam_exact_row(c, phi, &grid, i, &x, &w))
                .collect::<Result<_>>()?
        }
        (Scheme::Ulam, _, quad, _) => {
            let sampler = CellSampler::new(quad, grid.dim());
            (0..grid.size())
                .into_par_iter()
                .map(|i| ulam_sampled_row(map, phi, &grid, &sampler, i))
                .collect::<Result<_>>()?
        }
        (Scheme::Collocation, Some(b), _, _) => {
            (0..grid.size())
                .into_par_iter()
                .map(|i| collocation_row(map, phi, &grid, b, i))
                .collect::<Result<_>>()?
        }
        (Scheme::Collocation, None, _, _) => unreachable!("collocation always resolves a basis"),
    };
    let shift = rows
        .iter()
        .map(|r| r.0)
        .fold(f64::NEG_INFINITY, f64::max);
    if !shift.is_finite() {
        return Err(Error::InvalidPotential(
            "potential is not finite on the evaluated preimages".into(),
        ));
    }
    let rows: Vec<Vec<(usize, f64)>> = rows
        .into_par_iter()
        .map(|(m, mut entries)| {
            let scale = (m - shift).exp();
            for e in &mut entries {
                e.1 *= scale;
            }
            entries
        })
        .collect();
    let matrix = CsrMatrix::from_rows(grid.size(), rows);
    let nonnegative = matrix.values().iter().all(|&v| v >= 0.0);
    Ok(DiscretizedOperator {
        scheme: disc.scheme,
        basis,
        grid,
        matrix,
        shift,
        nonnegative,
    })
}

fn checked_phi(phi: &Potential, p: &Point) -> Result<f64> {
    let v = phi.eval(p);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidPotential(format!("phi({p:?}) = {v}")))
    }
}

/// Normalize accumulated `(column, weight, phi)` triples by the row maximum.
fn finish_row(raw: Vec<(usize, f64, f64)>) -> Row {
    let m = raw.iter().map(|r| r.2).fold(f64::NEG_INFINITY, f64::max);
    let entries = raw
        .into_iter()
        .map(|(c, w, p)| (c, w * (p - m).exp()))
        .collect();
    (m, entries)
}

/// Row `i` of the one-dimensional Ulam matrix with exact cell intersections:
/// `A_ij = N sum_b int_{C_j cap T_b^{-1} C_i} e^{phi} |T'| dy`.
fn ulam_exact_row(
    map: &CircleMap,
    phi: &Potential,
    grid: &Grid,
    i: usize,
    nodes: &[f64],
    weights: &[f64],
) -> Result<Row> {
    let n = grid.n() as f64;
    let rule = MappedRule::new(nodes, weights);
    let mut raw = Vec::new();
    for b in 0..map.branch_count() {
        let lo = map.inverse_branch_lifted(b, i as f64 / n)?;
        let hi = map.inverse_branch_lifted(b, (i + 1) as f64 / n)?;
        let mut a = lo;
        while a < hi {
            let k = (a * n).floor();
            let mut next = (k + 1.0) / n;
            if next <= a {
                next = (k + 2.0) / n;
            }
            let next = next.min(hi);
            if next - a > 0.0 {
                let col = ((0.5 * (a + next) * n).floor() as i64).rem_euclid(grid.n() as i64) as usize;
                for (y, w) in rule.points(a, next) {
                    let y = wrap(y);
                    let p = checked_phi(phi, &Point::on_circle(y))?;
                    raw.push((col, n * w * map.derivative(y).abs(), p));
                }
            }
            a = next;
        }
    }
    Ok(finish_row(raw))
}

/// Quadrature nodes inside a unit cell, as offsets in `[0, 1)^d` with
/// weights summing to 1.
pub(crate) struct CellSampler {
    fixed: Option<Vec<(Vec<f64>, f64)>>,
    samples: usize,
    seed: u64,
    dim: usize,
}

impl CellSampler {
    pub(crate) fn new(quad: &Quadrature, dim: usize) -> Self {
        match *quad {
            Quadrature::Gauss { nodes } => {
                let (x, w) = gauss_legendre(nodes);
                let mut pts: Vec<(Vec<f64>, f64)> = vec![(Vec::new(), 1.0)];
                for _ in 0..dim {
                    pts = pts
                        .into_iter()
                        .flat_map(|(c, cw)| {
                            x.iter().zip(&w).map(move |(&xi, &wi)| {
                                let mut c = c.clone();
                                c.push(0.5 * (xi + 1.0));
                                (c, cw * 0.5 * wi)
                            })
                        })
                        .collect();
                }
                Self { fixed: Some(pts), samples: 0, seed: 0, dim }
            }
            Quadrature::MonteCarlo { samples, seed } => Self {
                fixed: None,
                samples: samples.max(1),
                seed,
                dim,
            },
        }
    }

    /// Nodes for cell `i`; Monte Carlo streams are keyed by the cell index.
    pub(crate) fn nodes(&self, i: usize) -> Vec<(Vec<f64>, f64)> {
        match &self.fixed {
            Some(p) => p.clone(),
            None => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                rng.set_stream(i as u64);
                let w = 1.0 / self.samples as f64;
                (0..self.samples)
                    .map(|_| ((0..self.dim).map(|_| rng.gen::<f64>()).collect(), w))
                    .collect()
            }
        }
    }
}

/// Row `i` of the Ulam matrix by quadrature in image space.
fn ulam_sampled_row(
    map: &MapSystem,
    phi: &Potential,
    grid: &Grid,
    sampler: &CellSampler,
    i: usize,
) -> Result<Row> {
    let n = grid.n() as f64;
    let corner = grid.multi_index(i);
    let mut raw = Vec::new();
    let mut pre = Vec::with_capacity(map.degree());
    for (offset, w) in sampler.nodes(i) {
        let coords: Vec<f64> = corner
            .iter()
            .zip(&offset)
            .map(|(&k, &o)| (k as f64 + o) / n)
            .collect();
        pre.clear();
        map.preimages_into(&Point::new(&coords), &mut pre)?;
        for y in &pre {
            raw.push((grid.cell_of(y), w, checked_phi(phi, y)?));
        }
    }
    Ok(finish_row(raw))
}

/// Row `i` of the collocation matrix `B_ij = sum_b e^{phi(y_b)} l_j(y_b)`.
fn collocation_row(map: &MapSystem, phi: &Potential, grid: &Grid, basis: Basis, i: usize) -> Result<Row> {
    let x = grid.node(i);
    let pre = map.preimages(&x)?;
    let mut raw = Vec::new();
    for y in &pre {
        let p = checked_phi(phi, y)?;
        let factors: Vec<Vec<(usize, f64)>> = y
            .coords()
            .iter()
            .map(|&c| match basis {
                Basis::Trigonometric => trig_cardinal(grid.n(), c),
                _ => hat_cardinal(grid.n(), c),
            })
            .collect();
        tensor_accumulate(grid, &factors, |col, w| raw.push((col, w, p)));
    }
    Ok(finish_row(raw))
}

fn tensor_accumulate(grid: &Grid, factors: &[Vec<(usize, f64)>], mut emit: impl FnMut(usize, f64)) {
    let mut stack: Vec<(usize, usize, f64)> = vec![(0, 0, 1.0)];
    while let Some((axis, flat, w)) = stack.pop() {
        if axis == factors.len() {
            emit(flat, w);
            continue;
        }
        for &(j, v) in factors[axis].iter().rev() {
            stack.push((axis + 1, flat * grid.n() + j, w * v));
        }
    }
}

/// Nonzero values of the periodic hat functions at `y`.
fn hat_cardinal(n: usize, y: f64) -> Vec<(usize, f64)> {
    let u = wrap(y) * n as f64;
    let i0 = u.floor();
    let f = u - i0;
    let i0 = i0 as usize % n;
    if f == 0.0 {
        vec![(i0, 1.0)]
    } else {
        vec![(i0, 1.0 - f), ((i0 + 1) % n, f)]
    }
}

/// Values of the trigonometric cardinal functions at `y` (nodes `j/n`).
fn trig_cardinal(n: usize, y: f64) -> Vec<(usize, f64)> {
    let u = wrap(y) * n as f64;
    let r = u.round();
    if (u - r).abs() < 1e-12 {
        return vec![(r as usize % n, 1.0)];
    }
    let nf = n as f64;
    let s = (PI * u).sin();
    (0..n)
        .map(|j| {
            let d = u - j as f64;
            // sin(pi (u - j)) = (-1)^j sin(pi u)
            let num = if j % 2 == 0 { s } else { -s };
            let a = PI * d / nf;
            let v = if n % 2 == 0 {
                num * a.cos() / (nf * a.sin())
            } else {
                num / (nf * a.sin())
            };
            (j, v)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cardinal_functions_partition_unity() {
        for n in [8usize, 9, 16, 17] {
            for y in [0.0, 0.013, 0.5, 0.77, 0.999] {
                let t: f64 = trig_cardinal(n, y).iter().map(|e| e.1).sum();
                let h: f64 = hat_cardinal(n, y).iter().map(|e| e.1).sum();
                assert!((t - 1.0).abs() < 1e-12, "n={n} y={y} sum={t}");
                assert!((h - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn trig_interpolation_is_exact_on_low_modes() {
        let n = 16;
        let f = |x: f64| (2.0 * PI * 3.0 * x).cos() + (2.0 * PI * 5.0 * x).sin();
        for y in [0.123, 0.456, 0.9] {
            let v: f64 = trig_cardinal(n, y)
                .iter()
                .map(|&(j, l)| l * f(j as f64 / n as f64))
                .sum();
            assert!((v - f(y)).abs() < 1e-12);
        }
    }

    #[test]
    fn gauss_cell_weights_sum_to_one() {
        let s = CellSampler::new(&Quadrature::Gauss { nodes: 3 }, 2);
        let nodes = s.nodes(0);
        assert_eq!(nodes.len(), 9);
        assert!((nodes.iter().map(|n| n.1).sum::<f64>() - 1.0).abs() < 1e-15);
        let mc = CellSampler::new(&Quadrature::MonteCarlo { samples: 5, seed: 1 }, 2);
        assert_eq!(mc.nodes(3), mc.nodes(3));
        assert_ne!(mc.nodes(3), mc.nodes(4));
    }
}

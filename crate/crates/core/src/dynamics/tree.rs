use rayon::prelude::*;

use super::{MapSystem, Point};
use crate::error::{Error, Result};
use crate::potentials::Potential;

/// Default cap on the number of leaves of a preimage tree.
pub const DEFAULT_NODE_BUDGET: u128 = 1 << 24;

/// The depth-`n` inverse orbit tree of a root point.
///
/// Leaves are stored in lexicographic branch-word order, the first inverse
/// branch applied being the most significant digit. Each leaf carries the
/// Birkhoff sum `S_n phi(leaf) = sum_{k<n} phi(f^k(leaf))`.
#[derive(Clone, Debug)]
pub struct PreimageTree {
    root: Point,
    depth: usize,
    degree: usize,
    dim: usize,
    coords: Vec<f64>,
    weights: Vec<f64>,
}

impl PreimageTree {
    pub fn root(&self) -> Point {
        self.root
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn leaf(&self, i: usize) -> Point {
        Point::new(&self.coords[i * self.dim..(i + 1) * self.dim])
    }

    pub fn leaves(&self) -> impl Iterator<Item = Point> + '_ {
        self.coords.chunks(self.dim).map(Point::new)
    }

    /// Birkhoff weights, one per leaf.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Branch word of leaf `i`, first applied branch first.
    pub fn word(&self, i: usize) -> Vec<usize> {
        super::decode_word(i, self.degree, self.depth)
    }
}

/// Enumerate `f^{-n}(root)` with Birkhoff weights of `phi`.
pub fn preimage_tree(
    map: &MapSystem,
    phi: &Potential,
    root: &Point,
    n: usize,
    budget: u128,
) -> Result<PreimageTree> {
    let degree = map.degree();
    let requested = (degree as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if requested > budget {
        return Err(Error::BudgetExceeded { requested, budget });
    }
    let dim = map.dim();
    let mut level: Vec<(Point, f64)> = vec![(*root, 0.0)];
    for _ in 0..n {
        level = level
            .par_iter()
            .map(|(p, w)| -> Result<Vec<(Point, f64)>> {
                let pre = map.preimages(p)?;
                Ok(pre.into_iter().map(|q| (q, w + phi.eval(&q))).collect())
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect();
    }
    let mut coords = Vec::with_capacity(level.len() * dim);
    let mut weights = Vec::with_capacity(level.len());
    for (p, w) in level {
        coords.extend_from_slice(p.coords());
        weights.push(w);
    }
    Ok(PreimageTree {
        root: *root,
        depth: n,
        degree,
        dim,
        coords,
        weights,
    })
}

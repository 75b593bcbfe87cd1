//! Periodic orbits of expanding maps via composed inverse branches.

use rayon::prelude::*;

use super::{decode_word, MapSystem, Point};
use crate::error::{Error, Result};

const FIXED_POINT_TOL: f64 = 1e-14;
const FIXED_POINT_MAX_ITER: usize = 500;

/// The periodic point whose orbit follows the branch `word`:
/// `x_k` lies in branch `word[k]` and `f^n(x_0) = x_0`.
///
/// Found by iterating `inv_{w_0} o ... o inv_{w_{n-1}}` to a fixed point.
pub fn periodic_point(map: &MapSystem, word: &[usize]) -> Result<Point> {
    if map.has_neutral_points() {
        return Err(Error::NotExpanding { word: word.to_vec() });
    }
    if let MapSystem::Circle(c) = map {
        return c.periodic_point(word).map(Point::on_circle);
    }
    let mut x = Point::new(&vec![0.5; map.dim()]);
    for _ in 0..FIXED_POINT_MAX_ITER {
        let mut y = x;
        for &j in word.iter().rev() {
            y = map.inverse_branch(j, &y)?;
        }
        if x.distance(&y) < FIXED_POINT_TOL {
            return Ok(y);
        }
        x = y;
    }
    Err(Error::NotExpanding { word: word.to_vec() })
}

/// All distinct fixed points of `f^n`, one per branch word, deduplicated
/// where distinct words land on the same circle point (e.g. `0 = 1`).
pub fn periodic_points(map: &MapSystem, n: usize, budget: u128) -> Result<Vec<Point>> {
    let k = map.degree();
    let count = (k as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if count > budget {
        return Err(Error::BudgetExceeded {
            requested: count,
            budget,
        });
    }
    let mut points = (0..count as usize)
        .into_par_iter()
        .map(|code| periodic_point(map, &decode_word(code, k, n)))
        .collect::<Result<Vec<_>>>()?;
    points.sort_by(|a, b| {
        a.coords()
            .partial_cmp(b.coords())
            .expect("periodic points are finite")
    });
    let mut out: Vec<Point> = Vec::with_capacity(points.len());
    for p in points {
        if out.iter().rev().take(4).all(|q| q.distance(&p) > 1e-9)
            && out.first().map_or(true, |q| q.distance(&p) > 1e-9)
        {
            out.push(p);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::CircleMap;

    #[test]
    fn doubling_has_2n_minus_1_points() {
        let f = MapSystem::from(CircleMap::doubling());
        for n in 1..=8 {
            let pts = periodic_points(&f, n, 1 << 20).unwrap();
            assert_eq!(pts.len(), (1 << n) - 1, "n = {n}");
            for p in &pts {
                assert!(f.iterate(p, n).distance(p) < 1e-10);
            }
        }
    }

    #[test]
    fn period_two_orbit_of_doubling() {
        let f = MapSystem::from(CircleMap::doubling());
        let p = periodic_point(&f, &[0, 1]).unwrap();
        assert!((p.x() - 1.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn intermittent_maps_are_rejected() {
        let f = MapSystem::from(CircleMap::manneville_pomeau(0.5).unwrap());
        assert!(matches!(
            periodic_point(&f, &[1, 0]),
            Err(Error::NotExpanding { .. })
        ));
    }
}

//! Linear expanding endomorphisms of the torus.

use nalgebra::DMatrix;

use super::point::{wrap, Point, MAX_DIM};
use crate::error::{Error, Result};

/// `x -> A x mod 1` for an integer matrix `A` whose eigenvalues all lie
/// outside the unit circle. Degree is `|det A|`.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusEndomorphism {
    matrix: Vec<Vec<i64>>,
    inverse: Vec<Vec<f64>>,
    /// Coset representatives of `A^{-1} Z^d / Z^d`, lexicographic.
    offsets: Vec<Vec<f64>>,
    eigen_moduli: Vec<f64>,
    singular_values: (f64, f64),
}

impl TorusEndomorphism {
    pub fn new(matrix: Vec<Vec<i64>>) -> Result<Self> {
        let d = matrix.len();
        if d == 0 || d >= MAX_DIM || matrix.iter().any(|row| row.len() != d) {
            return Err(Error::InvalidMap(format!(
                "torus matrix must be square with dimension 1..{}",
                MAX_DIM - 1
            )));
        }
        let det = int_det(&matrix);
        if det == 0 {
            return Err(Error::InvalidMap("torus matrix is singular".into()));
        }
        let a = DMatrix::from_fn(d, d, |i, j| matrix[i][j] as f64);
        let eigen_moduli: Vec<f64> = a
            .clone()
            .complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .collect();
        if let Some(m) = eigen_moduli.iter().find(|&&m| m <= 1.0 + 1e-12) {
            return Err(Error::InvalidMap(format!(
                "torus matrix has an eigenvalue of modulus {m} <= 1"
            )));
        }
        let svd = a.clone().svd(false, false);
        let sv = svd.singular_values;
        let singular_values = (sv.min(), sv.max());
        let inv = a.try_inverse().expect("nonzero determinant");
        let inverse = (0..d)
            .map(|i| (0..d).map(|j| inv[(i, j)]).collect())
            .collect();

        let m = det.unsigned_abs() as i64;
        let adj = int_adjugate(&matrix);
        let sign = det.signum();
        let mut reps: Vec<Vec<i64>> = Vec::new();
        let total = (m as usize).pow(d as u32);
        for code in 0..total {
            let mut k = vec![0i64; d];
            let mut c = code;
            for slot in k.iter_mut().rev() {
                *slot = (c % m as usize) as i64;
                c /= m as usize;
            }
            let r: Vec<i64> = (0..d)
                .map(|i| {
                    let s: i64 = (0..d).map(|j| adj[i][j] * k[j]).sum();
                    (sign * s).rem_euclid(m)
                })
                .collect();
            reps.push(r);
        }
        reps.sort();
        reps.dedup();
        if reps.len() as i64 != m {
            return Err(Error::InvalidMap(format!(
                "found {} preimage cosets, expected |det A| = {m}",
                reps.len()
            )));
        }
        let offsets = reps
            .into_iter()
            .map(|r| r.into_iter().map(|v| v as f64 / m as f64).collect())
            .collect();
        Ok(Self {
            matrix,
            inverse,
            offsets,
            eigen_moduli,
            singular_values,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.len()
    }

    pub fn degree(&self) -> usize {
        self.offsets.len()
    }

    pub fn matrix(&self) -> &[Vec<i64>] {
        &self.matrix
    }

    pub fn eigen_moduli(&self) -> &[f64] {
        &self.eigen_moduli
    }

    /// Smallest and largest singular values of `A`.
    pub fn singular_values(&self) -> (f64, f64) {
        self.singular_values
    }

    pub fn eval(&self, p: &Point) -> Point {
        let x = p.coords();
        let d = self.dim();
        let mut out = [0.0; MAX_DIM];
        for (i, slot) in out.iter_mut().enumerate().take(d) {
            *slot = (0..d).map(|j| self.matrix[i][j] as f64 * x[j]).sum();
        }
        Point::new(&out[..d])
    }

    pub fn inverse_branch(&self, j: usize, p: &Point) -> Result<Point> {
        let off = self.offsets.get(j).ok_or_else(|| {
            Error::InvalidArgument(format!("branch {j} out of range for degree {}", self.degree()))
        })?;
        let x = p.coords();
        let d = self.dim();
        let mut out = [0.0; MAX_DIM];
        for (i, slot) in out.iter_mut().enumerate().take(d) {
            let s: f64 = (0..d).map(|k| self.inverse[i][k] * x[k]).sum();
            *slot = wrap(s + off[i]);
        }
        Ok(Point::new(&out[..d]))
    }

    /// `log` of the smallest singular value of `A^n`.
    pub fn log_conorm(&self, n: usize) -> f64 {
        let d = self.dim();
        let a = DMatrix::from_fn(d, d, |i, j| self.matrix[i][j] as f64);
        let mut pow = DMatrix::<f64>::identity(d, d);
        let mut log_scale = 0.0;
        for _ in 0..n {
            pow = &a * pow;
            let s = pow.amax();
            pow /= s;
            log_scale += s.ln();
        }
        let sv = pow.svd(false, false).singular_values;
        sv.min().ln() + log_scale
    }

    /// `log` of the largest singular value of `A^n`.
    pub fn log_norm(&self, n: usize) -> f64 {
        let d = self.dim();
        let a = DMatrix::from_fn(d, d, |i, j| self.matrix[i][j] as f64);
        let mut pow = DMatrix::<f64>::identity(d, d);
        let mut log_scale = 0.0;
        for _ in 0..n {
            pow = &a * pow;
            let s = pow.amax();
            pow /= s;
            log_scale += s.ln();
        }
        pow.svd(false, false).singular_values.max().ln() + log_scale
    }
}

fn int_det(m: &[Vec<i64>]) -> i64 {
    let d = m.len();
    match d {
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        _ => (0..d)
            .map(|j| {
                let sign = if j % 2 == 0 { 1 } else { -1 };
                sign * m[0][j] * int_det(&minor(m, 0, j))
            })
            .sum(),
    }
}

fn minor(m: &[Vec<i64>], row: usize, col: usize) -> Vec<Vec<i64>> {
    m.iter()
        .enumerate()
        .filter(|&(i, _)| i != row)
        .map(|(_, r)| {
            r.iter()
                .enumerate()
                .filter(|&(j, _)| j != col)
                .map(|(_, &v)| v)
                .collect()
        })
        .collect()
}

/// `adj(A)` with `A adj(A) = det(A) I`.
fn int_adjugate(m: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let d = m.len();
    if d == 1 {
        return vec![vec![1]];
    }
    (0..d)
        .map(|i| {
            (0..d)
                .map(|j| {
                    let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
                    sign * int_det(&minor(m, j, i))
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cat_like() -> TorusEndomorphism {
        TorusEndomorphism::new(vec![vec![3, 1], vec![1, 2]]).unwrap()
    }

    #[test]
    fn evaluates_mod_one() {
        let g = cat_like();
        let q = g.eval(&Point::new(&[0.5, 0.5]));
        assert!(q.distance(&Point::new(&[0.0, 0.5])) < 1e-15);
    }

    #[test]
    fn preimage_count_is_det() {
        let g = cat_like();
        assert_eq!(g.degree(), 5);
        let p = Point::new(&[0.123, 0.77]);
        for j in 0..5 {
            let q = g.inverse_branch(j, &p).unwrap();
            assert!(g.eval(&q).distance(&p) < 1e-12);
        }
    }

    #[test]
    fn rejects_non_expanding_matrices() {
        assert!(TorusEndomorphism::new(vec![vec![2, 1], vec![1, 1]]).is_err());
        assert!(TorusEndomorphism::new(vec![vec![1, 0], vec![0, 2]]).is_err());
    }

    #[test]
    fn negative_determinant_offsets() {
        let g = TorusEndomorphism::new(vec![vec![0, 2], vec![2, 0]]).unwrap();
        assert_eq!(g.degree(), 4);
        let p = Point::new(&[0.3, 0.6]);
        let mut seen = Vec::new();
        for j in 0..4 {
            let q = g.inverse_branch(j, &p).unwrap();
            assert!(g.eval(&q).distance(&p) < 1e-12);
            assert!(seen.iter().all(|s: &Point| s.distance(&q) > 1e-6));
            seen.push(q);
        }
    }

    #[test]
    fn conorm_of_power() {
        let g = TorusEndomorphism::new(vec![vec![2, 0], vec![0, 3]]).unwrap();
        assert!((g.log_conorm(3) - 3.0 * 2f64.ln()).abs() < 1e-12);
        assert!((g.log_norm(3) - 3.0 * 3f64.ln()).abs() < 1e-12);
    }
}

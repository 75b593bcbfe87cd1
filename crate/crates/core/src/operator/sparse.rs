use rayon::prelude::*;

/// Compressed sparse row matrix with a stored transpose.
///
/// Products are parallel over rows; every row is reduced in a fixed order,
/// so results do not depend on the worker count.
#[derive(Clone, Debug)]
pub struct CsrMatrix {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
    t_indptr: Vec<usize>,
    t_indices: Vec<usize>,
    t_values: Vec<f64>,
}

impl CsrMatrix {
    /// Square matrix from per-row `(column, value)` lists. Duplicate columns
    /// are summed; rows are stored sorted by column.
    pub fn from_rows(n: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        assert_eq!(rows.len(), n, "row count mismatch");
        let rows: Vec<Vec<(usize, f64)>> = rows
            .into_par_iter()
            .map(|mut r| {
                r.sort_by_key(|e| e.0);
                let mut merged: Vec<(usize, f64)> = Vec::with_capacity(r.len());
                for (c, v) in r {
                    debug_assert!(c < n, "column {c} out of range");
                    match merged.last_mut() {
                        Some(last) if last.0 == c => last.1 += v,
                        _ => merged.push((c, v)),
                    }
                }
                merged
            })
            .collect();
        let mut indptr = Vec::with_capacity(n + 1);
        indptr.push(0);
        let nnz: usize = rows.iter().map(Vec::len).sum();
        let mut indices = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        for r in &rows {
            for &(c, v) in r {
                indices.push(c);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        let (t_indptr, t_indices, t_values) = transpose(n, &indptr, &indices, &values);
        Self {
            n,
            indptr,
            indices,
            values,
            t_indptr,
            t_indices,
            t_values,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Entries of row `i` as `(column, value)`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.indptr[i]..self.indptr[i + 1];
        self.indices[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    /// `y = A x`.
    pub fn mul(&self, x: &[f64], y: &mut [f64]) {
        spmv(&self.indptr, &self.indices, &self.values, x, y);
    }

    /// `y = A^T x`.
    pub fn mul_transpose(&self, x: &[f64], y: &mut [f64]) {
        spmv(&self.t_indptr, &self.t_indices, &self.t_values, x, y);
    }

    /// Dense row-major copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n * self.n];
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                d[i * self.n + j] = v;
            }
        }
        d
    }
}

fn spmv(indptr: &[usize], indices: &[usize], values: &[f64], x: &[f64], y: &mut [f64]) {
    assert_eq!(x.len(), y.len(), "dimension mismatch");
    const CHUNK: usize = 256;
    y.par_chunks_mut(CHUNK).enumerate().for_each(|(c, out)| {
        for (k, yi) in out.iter_mut().enumerate() {
            let i = c * CHUNK + k;
            let r = indptr[i]..indptr[i + 1];
            *yi = indices[r.clone()]
                .iter()
                .zip(&values[r])
                .map(|(&j, &v)| v * x[j])
                .sum();
        }
    });
}

type Csr = (Vec<usize>, Vec<usize>, Vec<f64>);

fn transpose(n: usize, indptr: &[usize], indices: &[usize], values: &[f64]) -> Csr {
    let mut counts = vec![0usize; n + 1];
    for &c in indices {
        counts[c + 1] += 1;
    }
    for i in 0..n {
        counts[i + 1] += counts[i];
    }
    let t_indptr = counts.clone();
    let mut next = counts;
    let mut t_indices = vec![0; indices.len()];
    let mut t_values = vec![0.0; values.len()];
    for i in 0..n {
        for k in indptr[i]..indptr[i + 1] {
            let c = indices[k];
            let dst = next[c];
            t_indices[dst] = i;
            t_values[dst] = values[k];
            next[c] += 1;
        }
    }
    (t_indptr, t_indices, t_values)
}

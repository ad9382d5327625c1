use nalgebra::DMatrix;

use crate::{Error, Result};

/// Compressed sparse column matrix. Explicit zeros are kept so that the
/// sparsity pattern is independent of the stored values.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        SparseMatrix {
            nrows,
            ncols,
            col_ptr: vec![0; ncols + 1],
            row_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Builds from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut sorted: Vec<(usize, usize, f64)> = Vec::with_capacity(triplets.len());
        for &(r, c, v) in triplets {
            if r >= nrows || c >= ncols {
                return Err(Error::invalid(format!(
                    "triplet ({r}, {c}) outside {nrows}x{ncols} matrix"
                )));
            }
            sorted.push((r, c, v));
        }
        sorted.sort_by_key(|&(r, c, _)| (c, r));
        let mut col_ptr = vec![0usize; ncols + 1];
        let mut row_idx = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in sorted {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            row_idx.push(r);
            values.push(v);
            col_ptr[c + 1] += 1;
            last = Some((r, c));
        }
        for c in 0..ncols {
            col_ptr[c + 1] += col_ptr[c];
        }
        Ok(SparseMatrix {
            nrows,
            ncols,
            col_ptr,
            row_idx,
            values,
        })
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Position of entry `(row, col)` in the value array, if in the pattern.
    pub fn find(&self, row: usize, col: usize) -> Option<usize> {
        let lo = self.col_ptr[col];
        let hi = self.col_ptr[col + 1];
        self.row_idx[lo..hi].binary_search(&row).ok().map(|k| lo + k)
    }

    pub fn same_pattern(&self, other: &SparseMatrix) -> bool {
        self.nrows == other.nrows
            && self.ncols == other.ncols
            && self.col_ptr == other.col_ptr
            && self.row_idx == other.row_idx
    }

    /// Iterates `(row, col, value)` in column-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.ncols).flat_map(move |c| {
            (self.col_ptr[c]..self.col_ptr[c + 1]).map(move |k| (self.row_idx[k], c, self.values[k]))
        })
    }

    /// `out = A x`
    pub fn mul_vec(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for c in 0..self.ncols {
            let xc = x[c];
            if xc == 0.0 {
                continue;
            }
            for k in self.col_ptr[c]..self.col_ptr[c + 1] {
                out[self.row_idx[k]] += self.values[k] * xc;
            }
        }
    }

    /// `out = A^T y`
    pub fn mul_t_vec(&self, y: &[f64], out: &mut [f64]) {
        for (c, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.col_ptr[c]..self.col_ptr[c + 1] {
                acc += self.values[k] * y[self.row_idx[k]];
            }
            *o = acc;
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.nrows, self.ncols);
        for (r, c, v) in self.triplets() {
            d[(r, c)] += v;
        }
        d
    }

    /// Scales rows by `d` and columns by `e` in place: `A <- diag(d) A diag(e)`.
    pub(crate) fn scale(&mut self, d: &[f64], e: &[f64]) {
        for c in 0..self.ncols {
            for k in self.col_ptr[c]..self.col_ptr[c + 1] {
                self.values[k] *= d[self.row_idx[k]] * e[c];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn products_match_dense() {
        let a = SparseMatrix::from_triplets(3, 2, &[(0, 0, 1.0), (2, 0, -2.0), (1, 1, 3.0), (2, 1, 0.0)])
            .unwrap();
        assert_eq!(a.nnz(), 4);
        let d = a.to_dense();
        let x = [2.0, -1.0];
        let mut out = [0.0; 3];
        a.mul_vec(&x, &mut out);
        let dx = &d * nalgebra::DVector::from_column_slice(&x);
        assert_eq!(out.to_vec(), dx.as_slice().to_vec());
        let y = [1.0, 1.0, 1.0];
        let mut outt = [0.0; 2];
        a.mul_t_vec(&y, &mut outt);
        assert_eq!(outt, [-1.0, 3.0]);
    }

    #[test]
    fn duplicates_sum_and_zeros_stay() {
        let a = SparseMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 0, 2.0), (1, 1, 0.0)]).unwrap();
        assert_eq!(a.nnz(), 2);
        assert_eq!(a.values()[0], 3.0);
        assert!(a.find(1, 1).is_some());
        assert!(a.find(1, 0).is_none());
    }

    #[test]
    fn out_of_range_rejected() {
        assert!(SparseMatrix::from_triplets(1, 1, &[(1, 0, 1.0)]).is_err());
    }
}

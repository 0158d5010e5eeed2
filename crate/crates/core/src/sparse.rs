//! Compressed sparse row matrices assembled from coordinate triplets.

use nalgebra::DMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    General,
    /// Assembled symmetrically; `A[i][j]` and `A[j][i]` are bitwise equal.
    Symmetric,
}

#[derive(Debug, Clone)]
pub struct SparseOperator {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    symmetry: Symmetry,
}

impl SparseOperator {
    /// Compresses `(row, col, value)` triplets.
    ///
    /// Triplets are stably sorted by `(row, col)` and duplicates summed in insertion order, so the
    /// result is independent of how the caller partitioned its assembly loop.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        mut triplets: Vec<(usize, usize, f64)>,
        symmetry: Symmetry,
    ) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; rows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            assert!(
                r < rows && c < cols,
                "triplet ({r}, {c}) outside {rows}x{cols}"
            );
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        SparseOperator {
            rows,
            cols,
            row_ptr,
            col_idx,
            values,
            symmetry,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal_matrix(&vec![1.0; n])
    }

    pub fn diagonal_matrix(diag: &[f64]) -> Self {
        let n = diag.len();
        SparseOperator {
            rows: n,
            cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: diag.to_vec(),
            symmetry: Symmetry::Symmetric,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[span.clone()].binary_search(&c) {
            Ok(i) => self.values[span.start + i],
            Err(_) => 0.0,
        }
    }

    /// `y = A x`.
    pub fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.cols);
        assert_eq!(y.len(), self.rows);
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for i in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[i] * x[self.col_idx[i]];
            }
            *out = acc;
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.rows];
        self.apply_into(x, &mut y);
        y
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols))
            .map(|i| self.get(i, i))
            .collect()
    }

    pub fn transpose(&self) -> SparseOperator {
        let mut triplets = Vec::with_capacity(self.nnz());
        for r in 0..self.rows {
            for (c, v) in self.row(r) {
                triplets.push((c, r, v));
            }
        }
        SparseOperator::from_triplets(self.cols, self.rows, triplets, self.symmetry)
    }

    /// Sparse product `self * other`.
    pub fn matmul(&self, other: &SparseOperator) -> SparseOperator {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut triplets = Vec::new();
        for r in 0..self.rows {
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    triplets.push((r, c, a * b));
                }
            }
        }
        SparseOperator::from_triplets(self.rows, other.cols, triplets, Symmetry::General)
    }

    /// `diag(w) * self`.
    pub fn scale_rows(&self, w: &[f64]) -> SparseOperator {
        assert_eq!(w.len(), self.rows);
        let mut out = self.clone();
        for (r, wr) in w.iter().enumerate() {
            for i in out.row_ptr[r]..out.row_ptr[r + 1] {
                out.values[i] *= wr;
            }
        }
        out.symmetry = Symmetry::General;
        out
    }

    /// `a * self + b * other`.
    pub fn linear_combination(&self, a: f64, other: &SparseOperator, b: f64) -> SparseOperator {
        assert_eq!(self.shape(), other.shape());
        let mut triplets = Vec::with_capacity(self.nnz() + other.nnz());
        for r in 0..self.rows {
            triplets.extend(self.row(r).map(|(c, v)| (r, c, a * v)));
            triplets.extend(other.row(r).map(|(c, v)| (r, c, b * v)));
        }
        let symmetry =
            if self.symmetry == Symmetry::Symmetric && other.symmetry == Symmetry::Symmetric {
                Symmetry::Symmetric
            } else {
                Symmetry::General
            };
        SparseOperator::from_triplets(self.rows, self.cols, triplets, symmetry)
    }

    /// Largest `|A[i][j] - A[j][i]|`.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.rows {
            for (c, v) in self.row(r) {
                worst = worst.max((v - self.get(c, r)).abs());
            }
        }
        worst
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for r in 0..self.rows {
            for (c, v) in self.row(r) {
                m[(r, c)] += v;
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed() {
        let a = SparseOperator::from_triplets(
            2,
            2,
            vec![(0, 0, 1.0), (1, 0, 2.0), (0, 0, 3.0), (0, 1, -1.0)],
            Symmetry::General,
        );
        assert_eq!(a.nnz(), 3);
        assert_eq!(a.get(0, 0), 4.0);
        assert_eq!(a.apply(&[1.0, 1.0]), vec![3.0, 2.0]);
    }

    #[test]
    fn product_and_transpose() {
        let a = SparseOperator::from_triplets(
            2,
            3,
            vec![(0, 0, 1.0), (0, 2, 2.0), (1, 1, 3.0)],
            Symmetry::General,
        );
        let ata = a.transpose().matmul(&a);
        assert_eq!(ata.shape(), (3, 3));
        let dense = a.to_dense().transpose() * a.to_dense();
        assert_eq!(ata.to_dense(), dense);
        assert_eq!(ata.max_asymmetry(), 0.0);
    }
}

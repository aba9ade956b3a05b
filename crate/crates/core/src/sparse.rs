//! Compressed sparse row storage for the square symmetric systems assembled
//! on meshes. Both triangles are stored; every row carries an explicit
//! diagonal entry so diagonal shifts never change the pattern.

use nalgebra::DMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    diag_pos: Vec<usize>,
}

impl CsrMatrix {
    /// Assembles an `n x n` matrix from `(row, col, value)` triplets.
    /// Duplicate positions are summed in input order.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (i, row) in rows.iter_mut().enumerate() {
            row.push((i, 0.0));
        }
        for &(i, j, v) in triplets {
            assert!(i < n && j < n, "triplet ({i}, {j}) out of range for n = {n}");
            rows[i].push((j, v));
        }

        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        let mut diag_pos = vec![0; n];
        row_ptr.push(0);
        for (i, mut row) in rows.into_iter().enumerate() {
            // stable sort keeps the summation order of duplicates deterministic
            row.sort_by_key(|&(j, _)| j);
            let mut last: Option<usize> = None;
            for (j, v) in row {
                if last == Some(j) {
                    *values.last_mut().unwrap() += v;
                } else {
                    if j == i {
                        diag_pos[i] = col_idx.len();
                    }
                    col_idx.push(j);
                    values.push(v);
                    last = Some(j);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self { n, row_ptr, col_idx, values, diag_pos }
    }

    pub fn identity(n: usize) -> Self {
        let t: Vec<_> = (0..n).map(|i| (i, i, 1.0)).collect();
        Self::from_triplets(n, &t)
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        let t: Vec<_> = d.iter().enumerate().map(|(i, &x)| (i, i, x)).collect();
        Self::from_triplets(d.len(), &t)
    }

    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        assert_eq!(m.nrows(), m.ncols());
        let mut t = Vec::new();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                if m[(i, j)] != 0.0 {
                    t.push((i, j, m[(i, j)]));
                }
            }
        }
        Self::from_triplets(m.nrows(), &t)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.diag_pos.iter().map(|&p| self.values[p]).collect()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n).map(|i| self.row(i).map(|(j, a)| a * x[j]).sum()).collect()
    }

    /// `x^T A x`
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.mul_vec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// Copy of `self` with `shift[i]` added to each diagonal entry.
    pub fn with_diagonal_added(&self, shift: &[f64]) -> Self {
        assert_eq!(shift.len(), self.n);
        let mut out = self.clone();
        for (i, s) in shift.iter().enumerate() {
            out.values[out.diag_pos[i]] += s;
        }
        out
    }

    /// Copy of `self` with every entry multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// Largest `|A_ij - A_ji|`.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for (j, a) in self.row(i) {
                worst = worst.max((a - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Sparsity graph without self loops, each adjacency list sorted.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        (0..self.n)
            .map(|i| self.row(i).map(|(j, _)| j).filter(|&j| j != i).collect())
            .collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, a) in self.row(i) {
                m[(i, j)] = a;
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed_and_diagonal_is_explicit() {
        let a = CsrMatrix::from_triplets(3, &[(0, 1, 1.0), (0, 1, 2.0), (1, 0, 3.0)]);
        assert_eq!(a.get(0, 1), 3.0);
        assert_eq!(a.get(2, 2), 0.0);
        assert_eq!(a.nnz(), 5);
        assert_eq!(a.diagonal(), vec![0.0; 3]);
        let b = a.with_diagonal_added(&[1.0, 2.0, 3.0]);
        assert_eq!(b.diagonal(), vec![1.0, 2.0, 3.0]);
        assert_eq!(b.mul_vec(&[1.0, 1.0, 1.0]), vec![4.0, 5.0, 3.0]);
    }

    #[test]
    fn dense_round_trip() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 2.0]);
        let a = CsrMatrix::from_dense(&m);
        assert_eq!(a.to_dense(), m);
        assert_eq!(a.max_asymmetry(), 0.0);
        assert_eq!(a.quadratic_form(&[1.0, 1.0]), 2.0);
    }
}

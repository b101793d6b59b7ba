//! Compressed sparse rows with `u32` indices.

use std::fmt::Write as _;
use std::ops::Range;

#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<u32>,
    col_idx: Vec<u32>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Pattern with zero values; `rows[i]` must be sorted and duplicate free.
    pub fn from_pattern(n_cols: usize, rows: impl IntoIterator<Item = Vec<u32>>) -> Self {
        let mut row_ptr = vec![0u32];
        let mut col_idx = Vec::new();
        for r in rows {
            debug_assert!(r.windows(2).all(|w| w[0] < w[1]));
            col_idx.extend_from_slice(&r);
            row_ptr.push(u32::try_from(col_idx.len()).expect("nonzero count exceeds u32"));
        }
        let n_rows = row_ptr.len() - 1;
        let values = vec![0.0; col_idx.len()];
        SparseMatrix { n_rows, n_cols, row_ptr, col_idx, values }
    }

    /// Sum duplicate entries; explicit zeros are kept.
    pub fn from_triplets(n_rows: usize, n_cols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        sorted.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0u32; n_rows + 1];
        let mut col_idx: Vec<u32> = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for &(r, c, v) in &sorted {
            assert!(r < n_rows && c < n_cols, "triplet ({r}, {c}) out of bounds");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c as u32);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n_rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        SparseMatrix { n_rows, n_cols, row_ptr, col_idx, values }
    }

    /// Copy whose pattern contains every diagonal entry of a square matrix.
    pub fn with_full_diagonal(&self) -> SparseMatrix {
        assert_eq!(self.n_rows, self.n_cols, "matrix must be square");
        if (0..self.n_rows).all(|i| self.position(i, i).is_some()) {
            return self.clone();
        }
        let mut row_ptr = vec![0u32];
        let mut col_idx = Vec::with_capacity(self.nnz() + self.n_rows);
        let mut values = Vec::with_capacity(self.nnz() + self.n_rows);
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            let at = cols.partition_point(|&c| (c as usize) < i);
            col_idx.extend_from_slice(&cols[..at]);
            values.extend_from_slice(&vals[..at]);
            if cols.get(at).copied() != Some(i as u32) {
                col_idx.push(i as u32);
                values.push(0.0);
            }
            col_idx.extend_from_slice(&cols[at..]);
            values.extend_from_slice(&vals[at..]);
            row_ptr.push(col_idx.len() as u32);
        }
        SparseMatrix { n_rows: self.n_rows, n_cols: self.n_cols, row_ptr, col_idx, values }
    }

    pub fn identity(n: usize) -> Self {
        let t: Vec<_> = (0..n).map(|i| (i, i, 1.0)).collect();
        Self::from_triplets(n, n, &t)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn row_ptr(&self) -> &[u32] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[u32] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn row_range(&self, i: usize) -> Range<usize> {
        self.row_ptr[i] as usize..self.row_ptr[i + 1] as usize
    }

    pub fn row(&self, i: usize) -> (&[u32], &[f64]) {
        let r = self.row_range(i);
        (&self.col_idx[r.clone()], &self.values[r])
    }

    /// Storage position of `(i, j)` if it is in the pattern.
    #[inline]
    pub fn position(&self, i: usize, j: usize) -> Option<usize> {
        let r = self.row_range(i);
        self.col_idx[r.clone()].binary_search(&(j as u32)).ok().map(|k| r.start + k)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.position(i, j).map_or(0.0, |k| self.values[k])
    }

    /// Add to an entry of the pattern; panics if `(i, j)` is not stored.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.position(i, j).unwrap_or_else(|| panic!("entry ({i}, {j}) not in pattern"));
        self.values[k] += v;
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n_rows) {
            let (c, v) = self.row(i);
            *yi = c.iter().zip(v).map(|(&j, &a)| a * x[j as usize]).sum();
        }
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut t = Vec::with_capacity(self.nnz());
        for i in 0..self.n_rows {
            let (c, v) = self.row(i);
            t.extend(c.iter().zip(v).map(|(&j, &a)| (j as usize, i, a)));
        }
        SparseMatrix::from_triplets(self.n_cols, self.n_rows, &t)
    }

    /// Infinity norm (max absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        (0..self.n_rows).map(|i| self.row(i).1.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    /// Submatrix of the given row and column ranges, reindexed from zero.
    pub fn slice(&self, rows: Range<usize>, cols: Range<usize>) -> SparseMatrix {
        let mut t = Vec::new();
        for i in rows.clone() {
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                if cols.contains(&(j as usize)) {
                    t.push((i - rows.start, j as usize - cols.start, a));
                }
            }
        }
        SparseMatrix::from_triplets(rows.len(), cols.len(), &t)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n_cols]; self.n_rows];
        for (i, row) in d.iter_mut().enumerate() {
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                row[j as usize] += a;
            }
        }
        d
    }

    /// Largest entrywise difference, treating missing entries as zero.
    pub fn max_abs_diff(&self, other: &SparseMatrix) -> f64 {
        assert_eq!((self.n_rows, self.n_cols), (other.n_rows, other.n_cols));
        let mut m: f64 = 0.0;
        for i in 0..self.n_rows {
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                m = m.max((a - other.get(i, j as usize)).abs());
            }
            let (c, v) = other.row(i);
            for (&j, &b) in c.iter().zip(v) {
                if self.position(i, j as usize).is_none() {
                    m = m.max(b.abs());
                }
            }
        }
        m
    }

    /// MatrixMarket coordinate format, 1-based.
    pub fn to_matrix_market(&self) -> String {
        let mut s = String::from("%%MatrixMarket matrix coordinate real general\n");
        writeln!(s, "{} {} {}", self.n_rows, self.n_cols, self.nnz()).unwrap();
        for i in 0..self.n_rows {
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                writeln!(s, "{} {} {:e}", i + 1, j + 1, a).unwrap();
            }
        }
        s
    }
}

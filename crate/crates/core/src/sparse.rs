//! Symmetric sparse matrices in lower-triangle compressed-column form.
//!
//! Assembly accumulates `(row, col, value)` triplets; `build` sorts, merges
//! duplicates by exact summation and stores only entries with `row >= col`.
//! Symmetry is structural: an entry `(i, j)` represents both `A[i][j]` and
//! `A[j][i]`.

use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SparseError {
    #[error("entry ({0}, {1}) outside matrix of dimension {2}")]
    IndexOutOfRange(usize, usize, usize),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("malformed matrix dump: {0}")]
    BadDump(String),
}

/// Triplet accumulator for symmetric matrices.
#[derive(Debug, Clone)]
pub struct SymTriplets {
    dim: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl SymTriplets {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            entries: Vec::new(),
        }
    }

    /// Adds `v` at `(i, j)`; the pair is stored mirrored into the lower triangle.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.dim && j < self.dim);
        if v == 0.0 && i != j {
            // keep diagonal zeros so every column exists in the pattern
            return;
        }
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        self.entries.push((r, c, v));
    }

    pub fn build(mut self) -> SparseSymMatrix {
        self.entries.sort_by(|a, b| (a.1, a.0).cmp(&(b.1, b.0)));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(self.entries.len());
        for &(r, c, v) in &self.entries {
            if let Some(last) = merged.last_mut() {
                if last.0 == r && last.1 == c {
                    last.2 += v;
                    continue;
                }
            }
            merged.push((r, c, v));
        }
        let mut col_ptr = vec![0usize; self.dim + 1];
        for &(_, c, _) in &merged {
            col_ptr[c + 1] += 1;
        }
        for c in 0..self.dim {
            col_ptr[c + 1] += col_ptr[c];
        }
        let row_idx: Vec<usize> = merged.iter().map(|e| e.0).collect();
        let values: Vec<f64> = merged.iter().map(|e| e.2).collect();
        SparseSymMatrix {
            dim: self.dim,
            col_ptr,
            row_idx,
            values,
        }
    }
}

/// Symmetric sparse matrix, lower triangle stored in CSC order.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymMatrix {
    dim: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseSymMatrix {
    pub fn zeros(dim: usize) -> Self {
        SymTriplets::new(dim).build()
    }

    pub fn identity(dim: usize) -> Self {
        let mut t = SymTriplets::new(dim);
        for i in 0..dim {
            t.add(i, i, 1.0);
        }
        t.build()
    }

    pub fn from_dense_lower(a: &[Vec<f64>]) -> Self {
        let dim = a.len();
        let mut t = SymTriplets::new(dim);
        for (i, row) in a.iter().enumerate() {
            for j in 0..=i {
                if row[j] != 0.0 {
                    t.add(i, j, row[j]);
                }
            }
        }
        t.build()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz_lower(&self) -> usize {
        self.row_idx.len()
    }

    /// Iterates stored lower-triangle entries `(row, col, value)`.
    pub fn iter_lower(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dim).flat_map(move |c| {
            (self.col_ptr[c]..self.col_ptr[c + 1]).map(move |p| (self.row_idx[p], c, self.values[p]))
        })
    }

    /// y = A x (symmetric expansion of the stored lower triangle).
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        y.fill(0.0);
        for c in 0..self.dim {
            let xc = x[c];
            let mut acc = 0.0;
            for p in self.col_ptr[c]..self.col_ptr[c + 1] {
                let r = self.row_idx[p];
                let v = self.values[p];
                y[r] += v * xc;
                if r != c {
                    acc += v * x[r];
                }
            }
            y[c] += acc;
        }
    }

    pub fn matvec_alloc(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        self.matvec(x, &mut y);
        y
    }

    /// Quadratic form xᵀ A x.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let y = self.matvec_alloc(x);
        x.iter().zip(&y).map(|(a, b)| a * b).sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.dim];
        for (r, c, v) in self.iter_lower() {
            if r == c {
                d[c] = v;
            }
        }
        d
    }

    /// For each row i: sum over j != i of |A[i][j]| (full symmetric row).
    pub fn offdiag_abs_row_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.dim];
        for (r, c, v) in self.iter_lower() {
            if r != c {
                s[r] += v.abs();
                s[c] += v.abs();
            }
        }
        s
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// C = a*self + b*other, pattern union.
    pub fn linear_combination(&self, a: f64, other: &Self, b: f64) -> Result<Self, SparseError> {
        if self.dim != other.dim {
            return Err(SparseError::DimensionMismatch(self.dim, other.dim));
        }
        let mut t = SymTriplets::new(self.dim);
        for (r, c, v) in self.iter_lower() {
            t.add(r, c, a * v);
        }
        for (r, c, v) in other.iter_lower() {
            t.add(r, c, b * v);
        }
        Ok(t.build())
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut m = self.clone();
        for v in &mut m.values {
            *v *= a;
        }
        m
    }

    /// Extracts the principal submatrix on `keep` (old indices, strictly increasing).
    pub fn submatrix(&self, keep: &[usize]) -> Self {
        let mut map = vec![usize::MAX; self.dim];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let mut t = SymTriplets::new(keep.len());
        for (r, c, v) in self.iter_lower() {
            let (nr, nc) = (map[r], map[c]);
            if nr != usize::MAX && nc != usize::MAX {
                t.add(nr, nc, v);
            }
        }
        t.build()
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.iter_lower() {
            m[(r, c)] = v;
            m[(c, r)] = v;
        }
        m
    }

    /// Entrywise max |self - other| over the union pattern.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut d = 0.0_f64;
        let diff = self.linear_combination(1.0, other, -1.0).expect("dims");
        for (_, _, v) in diff.iter_lower() {
            d = d.max(v.abs());
        }
        d
    }

    /// Adjacency (column patterns of the full symmetric matrix, no diagonal).
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.dim];
        for (r, c, _) in self.iter_lower() {
            if r != c {
                adj[r].push(c);
                adj[c].push(r);
            }
        }
        for a in &mut adj {
            a.sort_unstable();
            a.dedup();
        }
        adj
    }

    /// Serializes in the `%%SymSparse` coordinate text format (`row col value`,
    /// lower triangle, 0-based).
    pub fn to_dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "%%SymSparse {} {}", self.dim, self.nnz_lower());
        for (r, c, v) in self.iter_lower() {
            let _ = writeln!(out, "{} {} {:.16e}", r, c, v);
        }
        out
    }

    pub fn from_dump(text: &str) -> Result<Self, SparseError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| SparseError::BadDump("empty input".into()))?;
        let mut parts = header.split_whitespace();
        if parts.next() != Some("%%SymSparse") {
            return Err(SparseError::BadDump("missing %%SymSparse header".into()));
        }
        let dim: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| SparseError::BadDump("bad dimension".into()))?;
        let mut t = SymTriplets::new(dim);
        for line in lines {
            let mut it = line.split_whitespace();
            let r: usize = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| SparseError::BadDump(format!("bad row in {line:?}")))?;
            let c: usize = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| SparseError::BadDump(format!("bad col in {line:?}")))?;
            let v: f64 = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| SparseError::BadDump(format!("bad value in {line:?}")))?;
            if r >= dim || c >= dim {
                return Err(SparseError::IndexOutOfRange(r, c, dim));
            }
            t.add(r, c, v);
        }
        Ok(t.build())
    }
}

/// Rectangular sparse block in CSR-of-triplets form (used for the divergence
/// pairing of mixed discretizations).
#[derive(Debug, Clone)]
pub struct SparseRect {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl SparseRect {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            entries: Vec::new(),
        }
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.nrows && j < self.ncols);
        if v != 0.0 {
            self.entries.push((i, j, v));
        }
    }

    pub fn compress(&mut self) {
        self.entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(self.entries.len());
        for &(r, c, v) in &self.entries {
            if let Some(last) = merged.last_mut() {
                if last.0 == r && last.1 == c {
                    last.2 += v;
                    continue;
                }
            }
            merged.push((r, c, v));
        }
        self.entries = merged;
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.entries.iter().copied()
    }

    /// y = B x.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        y.fill(0.0);
        for &(r, c, v) in &self.entries {
            y[r] += v * x[c];
        }
    }

    /// y = Bᵀ x.
    pub fn matvec_transpose(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.nrows);
        assert_eq!(y.len(), self.ncols);
        y.fill(0.0);
        for &(r, c, v) in &self.entries {
            y[c] += v * x[r];
        }
    }

    /// Keeps columns in `keep_cols` (renumbered) and all rows.
    pub fn select_columns(&self, keep_cols: &[usize]) -> Self {
        let mut map = vec![usize::MAX; self.ncols];
        for (new, &old) in keep_cols.iter().enumerate() {
            map[old] = new;
        }
        let mut out = SparseRect::new(self.nrows, keep_cols.len());
        for &(r, c, v) in &self.entries {
            if map[c] != usize::MAX {
                out.add(r, map[c], v);
            }
        }
        out.compress();
        out
    }

    /// Keeps rows in `keep_rows` (renumbered) and all columns.
    pub fn select_rows(&self, keep_rows: &[usize]) -> Self {
        let mut map = vec![usize::MAX; self.nrows];
        for (new, &old) in keep_rows.iter().enumerate() {
            map[old] = new;
        }
        let mut out = SparseRect::new(keep_rows.len(), self.ncols);
        for &(r, c, v) in &self.entries {
            if map[r] != usize::MAX {
                out.add(map[r], c, v);
            }
        }
        out.compress();
        out
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.nrows, self.ncols);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
        m
    }
}

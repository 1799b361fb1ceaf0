//! Sparse matrices and a direct profile (skyline) LU solver.
//!
//! Finite-element matrices here are structurally symmetric, so a variable-band
//! factorization without pivoting after a reverse Cuthill-McKee reordering is
//! enough. Dense coupling rows (voltage-function and circuit unknowns) are kept
//! at the end of the ordering so that they only widen the last few rows of the
//! profile.

use std::collections::VecDeque;
use std::fmt::Debug;
use std::ops::Neg;

use num_complex::Complex64;
use num_traits::NumAssign;

use crate::error::{Error, Result};

/// Field over which matrices are assembled and factorized.
pub trait Scalar: Copy + Debug + PartialEq + NumAssign + Neg<Output = Self> + Send + Sync + 'static {
    fn modulus(self) -> f64;
    fn from_real(x: f64) -> Self;
}

impl Scalar for f64 {
    #[inline]
    fn modulus(self) -> f64 {
        self.abs()
    }
    #[inline]
    fn from_real(x: f64) -> Self {
        x
    }
}

impl Scalar for Complex64 {
    #[inline]
    fn modulus(self) -> f64 {
        self.norm()
    }
    #[inline]
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
}

/// Coordinate-format accumulator; duplicates are summed on conversion.
#[derive(Debug, Clone)]
pub struct TripletMatrix<T> {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, T)>,
}

impl<T: Scalar> TripletMatrix<T> {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        TripletMatrix {
            nrows,
            ncols,
            entries: Vec::new(),
        }
    }

    pub fn with_capacity(nrows: usize, ncols: usize, cap: usize) -> Self {
        TripletMatrix {
            nrows,
            ncols,
            entries: Vec::with_capacity(cap),
        }
    }

    #[inline]
    pub fn push(&mut self, row: usize, col: usize, value: T) {
        debug_assert!(row < self.nrows && col < self.ncols);
        self.entries.push((row, col, value));
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    /// Appends every entry of `other`, shifted by the given offsets and scaled.
    pub fn extend_from_csr(&mut self, other: &CsrMatrix<T>, row_offset: usize, col_offset: usize, scale: T) {
        for (i, j, v) in other.iter() {
            self.push(i + row_offset, j + col_offset, v * scale);
        }
    }

    /// Converts to CSR. Entries are sorted by (row, col) with a stable sort, so
    /// duplicate summation order follows insertion order and is reproducible.
    pub fn to_csr(&self) -> CsrMatrix<T> {
        let mut counts = vec![0usize; self.nrows + 1];
        for &(i, _, _) in &self.entries {
            counts[i + 1] += 1;
        }
        for i in 0..self.nrows {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut cols = vec![0usize; self.entries.len()];
        let mut vals = vec![T::zero(); self.entries.len()];
        for &(i, j, v) in &self.entries {
            let p = next[i];
            cols[p] = j;
            vals[p] = v;
            next[i] += 1;
        }

        let mut row_ptr = Vec::with_capacity(self.nrows + 1);
        let mut col_idx = Vec::with_capacity(self.entries.len());
        let mut values = Vec::with_capacity(self.entries.len());
        row_ptr.push(0);
        let mut scratch: Vec<(usize, T)> = Vec::new();
        for i in 0..self.nrows {
            scratch.clear();
            scratch.extend((counts[i]..counts[i + 1]).map(|p| (cols[p], vals[p])));
            scratch.sort_by_key(|&(j, _)| j);
            let mut k = 0;
            while k < scratch.len() {
                let j = scratch[k].0;
                let mut acc = scratch[k].1;
                k += 1;
                while k < scratch.len() && scratch[k].0 == j {
                    acc += scratch[k].1;
                    k += 1;
                }
                col_idx.push(j);
                values.push(acc);
            }
            row_ptr.push(col_idx.len());
        }
        CsrMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            row_ptr,
            col_idx,
            values,
        }
    }
}

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> CsrMatrix<T> {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        CsrMatrix {
            nrows,
            ncols,
            row_ptr: vec![0; nrows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
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

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[range.clone()].iter().copied().zip(self.values[range].iter().copied())
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.nrows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[range.clone()].binary_search(&j) {
            Ok(p) => self.values[range.start + p],
            Err(_) => T::zero(),
        }
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .map(|i| {
                let mut acc = T::zero();
                for (j, v) in self.row(i) {
                    acc += v * x[j];
                }
                acc
            })
            .collect()
    }

    /// `self^T x`.
    pub fn tr_mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.nrows);
        let mut out = vec![T::zero(); self.ncols];
        for (i, j, v) in self.iter() {
            out[j] += v * x[i];
        }
        out
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> CsrMatrix<U> {
        CsrMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            row_ptr: self.row_ptr.clone(),
            col_idx: self.col_idx.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Largest `|a_ij - a_ji|` over the stored pattern.
    pub fn asymmetry(&self) -> f64 {
        self.iter().map(|(i, j, v)| (v - self.get(j, i)).modulus()).fold(0.0, f64::max)
    }

    /// Quadratic form `y^T A x`.
    pub fn bilinear(&self, y: &[T], x: &[T]) -> T {
        let ax = self.mul_vec(x);
        y.iter().zip(&ax).fold(T::zero(), |acc, (&a, &b)| acc + a * b)
    }
}

/// Reverse Cuthill-McKee ordering of the first `n_graph` unknowns of a
/// structurally symmetric matrix. Unknowns at index `n_graph..` are appended
/// unchanged. Returns `order[new] = old`.
pub fn rcm_order<T: Scalar>(matrix: &CsrMatrix<T>, n_graph: usize) -> Vec<usize> {
    let n = matrix.nrows();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n_graph];
    for (i, j, _) in matrix.iter() {
        if i < n_graph && j < n_graph && i != j {
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }

    let mut visited = vec![false; n_graph];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n_graph).collect();
    by_degree.sort_by_key(|&v| (adj[v].len(), v));

    for &seed in &by_degree {
        if visited[seed] {
            continue;
        }
        let start = pseudo_peripheral(&adj, seed);
        let mut queue = VecDeque::new();
        queue.push_back(start);
        visited[start] = true;
        let mut component = Vec::new();
        while let Some(v) = queue.pop_front() {
            component.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (adj[w].len(), w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
        order.extend(component);
    }
    order.reverse();
    order.extend(n_graph..n);
    order
}

fn bfs_levels(adj: &[Vec<usize>], start: usize) -> (usize, Vec<usize>) {
    let mut level = vec![usize::MAX; adj.len()];
    level[start] = 0;
    let mut queue = VecDeque::from([start]);
    let mut last = Vec::new();
    let mut depth = 0;
    while let Some(v) = queue.pop_front() {
        if level[v] > depth {
            depth = level[v];
            last.clear();
        }
        last.push(v);
        for &w in &adj[v] {
            if level[w] == usize::MAX {
                level[w] = level[v] + 1;
                queue.push_back(w);
            }
        }
    }
    (depth, last)
}

fn pseudo_peripheral(adj: &[Vec<usize>], seed: usize) -> usize {
    let mut current = seed;
    let (mut depth, mut last) = bfs_levels(adj, current);
    for _ in 0..8 {
        let candidate = *last.iter().min_by_key(|&&v| (adj[v].len(), v)).expect("non-empty level");
        let (d, l) = bfs_levels(adj, candidate);
        if d <= depth {
            break;
        }
        current = candidate;
        depth = d;
        last = l;
    }
    current
}

/// Profile LU factorization `P A P^T = L U` with unit lower `L`.
#[derive(Debug, Clone)]
pub struct SkylineLu<T> {
    n: usize,
    first: Vec<usize>,
    offset: Vec<usize>,
    lower: Vec<T>,
    upper: Vec<T>,
    diag: Vec<T>,
    /// `order[new] = old`
    order: Vec<usize>,
}

impl<T: Scalar> SkylineLu<T> {
    /// Factorizes with the given symmetric permutation (`order[new] = old`).
    pub fn factor(matrix: &CsrMatrix<T>, order: &[usize]) -> Result<Self> {
        let n = matrix.nrows();
        assert_eq!(n, matrix.ncols(), "skyline LU needs a square matrix");
        assert_eq!(order.len(), n);
        let mut inv = vec![0usize; n];
        for (new, &old) in order.iter().enumerate() {
            inv[old] = new;
        }

        let mut first: Vec<usize> = (0..n).collect();
        for (r, c, _) in matrix.iter() {
            let (i, j) = (inv[r], inv[c]);
            let (lo, hi) = if i < j { (i, j) } else { (j, i) };
            if lo < first[hi] {
                first[hi] = lo;
            }
        }
        let mut offset = Vec::with_capacity(n + 1);
        offset.push(0);
        for i in 0..n {
            offset.push(offset[i] + (i - first[i]));
        }
        let total = offset[n];
        let mut lower = vec![T::zero(); total];
        let mut upper = vec![T::zero(); total];
        let mut diag = vec![T::zero(); n];
        let mut row_scale = vec![0.0f64; n];

        for (r, c, v) in matrix.iter() {
            let (i, j) = (inv[r], inv[c]);
            row_scale[i] = row_scale[i].max(v.modulus());
            if i == j {
                diag[i] += v;
            } else if i > j {
                lower[offset[i] + j - first[i]] += v;
            } else {
                upper[offset[j] + i - first[j]] += v;
            }
        }

        for i in 0..n {
            let fi = first[i];
            let oi = offset[i];
            for j in fi..i {
                let fj = first[j];
                let oj = offset[j];
                let k0 = fi.max(fj);
                let len = j - k0;

                // U[j][i] -= sum_k L[j][k] U[k][i]
                let lj = &lower[oj + k0 - fj..oj + k0 - fj + len];
                let ui = &upper[oi + k0 - fi..oi + k0 - fi + len];
                let dot_u = dot(lj, ui);
                upper[oi + j - fi] -= dot_u;

                // L[i][j] = (A[i][j] - sum_k L[i][k] U[k][j]) / U[j][j]
                let li = &lower[oi + k0 - fi..oi + k0 - fi + len];
                let uj = &upper[oj + k0 - fj..oj + k0 - fj + len];
                let dot_l = dot(li, uj);
                let lij = (lower[oi + j - fi] - dot_l) / diag[j];
                lower[oi + j - fi] = lij;
            }
            let len = i - fi;
            let d = dot(&lower[oi..oi + len], &upper[oi..oi + len]);
            diag[i] -= d;
            let scale = if row_scale[i] > 0.0 { row_scale[i] } else { 1.0 };
            if !(diag[i].modulus() > 1e-13 * scale) {
                return Err(Error::Singular {
                    block: "skyline factorization".into(),
                    pivot: order[i],
                });
            }
        }

        Ok(SkylineLu {
            n,
            first,
            offset,
            lower,
            upper,
            diag,
            order: order.to_vec(),
        })
    }

    /// Factorizes after computing an RCM ordering over the first `n_graph` unknowns.
    pub fn factor_rcm(matrix: &CsrMatrix<T>, n_graph: usize) -> Result<Self> {
        let order = rcm_order(matrix, n_graph);
        Self::factor(matrix, &order)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of stored off-diagonal entries of L plus U.
    pub fn profile_size(&self) -> usize {
        2 * self.offset[self.n]
    }

    pub fn solve(&self, rhs: &[T]) -> Vec<T> {
        assert_eq!(rhs.len(), self.n);
        let mut y: Vec<T> = self.order.iter().map(|&old| rhs[old]).collect();
        for i in 0..self.n {
            let fi = self.first[i];
            let oi = self.offset[i];
            let len = i - fi;
            let s = dot(&self.lower[oi..oi + len], &y[fi..i]);
            y[i] -= s;
        }
        for i in (0..self.n).rev() {
            let xi = y[i] / self.diag[i];
            y[i] = xi;
            let fi = self.first[i];
            let oi = self.offset[i];
            for (k, &u) in self.upper[oi..oi + (i - fi)].iter().enumerate() {
                y[fi + k] -= u * xi;
            }
        }
        let mut x = vec![T::zero(); self.n];
        for (new, &old) in self.order.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

#[inline]
fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    let mut acc = T::zero();
    for (&x, &y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

/// Direct solver for `A x = b` with a subset of unknowns prescribed.
///
/// Prescribed rows and columns are eliminated; their known values are moved to
/// the right-hand side, which keeps the reduced matrix symmetric whenever `A` is.
#[derive(Debug, Clone)]
pub struct ReducedSolver<T> {
    n_full: usize,
    reduced_index: Vec<Option<usize>>,
    free: Vec<usize>,
    coupling: Vec<(usize, usize, T)>,
    lu: SkylineLu<T>,
}

impl<T: Scalar> ReducedSolver<T> {
    /// `n_graph` counts leading unknowns that are mesh-graph DoFs; the rest are
    /// dense coupling unknowns ordered last.
    pub fn new(matrix: &CsrMatrix<T>, prescribed: &[bool], n_graph: usize) -> Result<Self> {
        let n_full = matrix.nrows();
        assert_eq!(prescribed.len(), n_full);
        let mut reduced_index = vec![None; n_full];
        let mut free = Vec::new();
        for (k, &fixed) in prescribed.iter().enumerate() {
            if !fixed {
                reduced_index[k] = Some(free.len());
                free.push(k);
            }
        }
        let n_graph_reduced = free.iter().filter(|&&k| k < n_graph).count();
        let mut reduced = TripletMatrix::with_capacity(free.len(), free.len(), matrix.nnz());
        let mut coupling = Vec::new();
        for (i, j, v) in matrix.iter() {
            if let Some(ri) = reduced_index[i] {
                match reduced_index[j] {
                    Some(rj) => reduced.push(ri, rj, v),
                    None => coupling.push((ri, j, v)),
                }
            }
        }
        let lu = SkylineLu::factor_rcm(&reduced.to_csr(), n_graph_reduced).map_err(|e| match e {
            Error::Singular { block, pivot } => Error::Singular { block, pivot: free[pivot] },
            other => other,
        })?;
        Ok(ReducedSolver {
            n_full,
            reduced_index,
            free,
            coupling,
            lu,
        })
    }

    /// Solves with right-hand side `rhs` (full length); prescribed entries of
    /// the result are taken from `values`.
    pub fn solve(&self, rhs: &[T], values: &[T]) -> Vec<T> {
        assert_eq!(rhs.len(), self.n_full);
        assert_eq!(values.len(), self.n_full);
        let mut b: Vec<T> = self.free.iter().map(|&k| rhs[k]).collect();
        for &(ri, j, v) in &self.coupling {
            b[ri] -= v * values[j];
        }
        let xr = self.lu.solve(&b);
        let mut x = values.to_vec();
        for (k, slot) in self.reduced_index.iter().enumerate() {
            if let Some(r) = *slot {
                x[k] = xr[r];
            }
        }
        x
    }

    pub fn n_free(&self) -> usize {
        self.free.len()
    }
}

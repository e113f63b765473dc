//! Minimal CSR matrix utilities and a sparse symmetric direct solver.
//!
//! The CSR type covers what the solvers need: triplet assembly with
//! duplicate summing, matrix-vector products, principal submatrix
//! extraction, and a plain-text triplet export. Factorizations are
//! delegated to an LDL^T decomposition with reverse Cuthill-McKee
//! ordering.

use crate::{Error, Result};
use rayon::prelude::*;
use sprs::{CsMatI, FillInReduction, SymmetryCheck, TriMatI};
use sprs_ldl::{Ldl, LdlNumeric};
use std::fmt::Write as _;

/// Compressed sparse row matrix.
#[derive(Clone, Debug)]
pub struct CsrMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    /// Build from triplets, summing duplicates. Entries with magnitude zero
    /// are kept; callers may prune beforehand if needed.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Self {
        let mut per_row: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_rows];
        for (r, c, v) in triplets {
            debug_assert!(r < n_rows && c < n_cols);
            per_row[r].push((c, v));
        }
        let mut indptr = Vec::with_capacity(n_rows + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for row in &mut per_row {
            row.sort_unstable_by_key(|e| e.0);
            let mut last: Option<usize> = None;
            for &(c, v) in row.iter() {
                if last == Some(c) {
                    *values.last_mut().unwrap() += v;
                } else {
                    indices.push(c);
                    values.push(v);
                    last = Some(c);
                }
            }
            indptr.push(indices.len());
        }
        CsrMatrix { n_rows, n_cols, indptr, indices, values }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let span = self.indptr[r]..self.indptr[r + 1];
        (&self.indices[span.clone()], &self.values[span])
    }

    /// `y = A x`; rows are computed independently, so the result does not
    /// depend on the thread count.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.n_cols);
        if self.n_rows < 4096 {
            (0..self.n_rows).map(|r| self.row_dot(r, x)).collect()
        } else {
            (0..self.n_rows).into_par_iter().map(|r| self.row_dot(r, x)).collect()
        }
    }

    #[inline]
    pub fn row_dot(&self, r: usize, x: &[f64]) -> f64 {
        let (cols, vals) = self.row(r);
        cols.iter().zip(vals).map(|(&c, &v)| v * x[c]).sum()
    }

    /// Principal submatrix on the given (sorted or unsorted) index set,
    /// returned dense in the order of `idx`.
    pub fn principal_submatrix(&self, idx: &[usize]) -> nalgebra::DMatrix<f64> {
        let n = idx.len();
        let mut pos = std::collections::HashMap::with_capacity(n);
        for (i, &g) in idx.iter().enumerate() {
            pos.insert(g, i);
        }
        let mut out = nalgebra::DMatrix::<f64>::zeros(n, n);
        for (i, &g) in idx.iter().enumerate() {
            let (cols, vals) = self.row(g);
            for (&c, &v) in cols.iter().zip(vals) {
                if let Some(&j) = pos.get(&c) {
                    out[(i, j)] = v;
                }
            }
        }
        out
    }

    pub fn to_sprs(&self) -> CsMatI<f64, usize> {
        CsMatI::new(
            (self.n_rows, self.n_cols),
            self.indptr.clone(),
            self.indices.clone(),
            self.values.clone(),
        )
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut out = nalgebra::DMatrix::<f64>::zeros(self.n_rows, self.n_cols);
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                out[(r, c)] = v;
            }
        }
        out
    }

    /// Maximum absolute asymmetry, for diagnostics.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                let vt = self.get(c, r).unwrap_or(0.0);
                worst = worst.max((v - vt).abs());
            }
        }
        worst
    }

    pub fn get(&self, r: usize, c: usize) -> Option<f64> {
        let (cols, vals) = self.row(r);
        cols.binary_search(&c).ok().map(|k| vals[k])
    }

    /// Plain-text triplet export: a header line
    /// `sparse <rows> <cols> <nnz>` followed by 1-based `row col value`
    /// lines in row-major order.
    pub fn to_triplet_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "sparse {} {} {}", self.n_rows, self.n_cols, self.nnz());
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                let _ = writeln!(out, "{} {} {:.17e}", r + 1, c + 1, v);
            }
        }
        out
    }
}

/// Plain-text export of a dense vector: `vector <len>` then one value per line.
pub fn vector_text(v: &[f64]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "vector {}", v.len());
    for x in v {
        let _ = writeln!(out, "{x:.17e}");
    }
    out
}

/// Sparse symmetric LDL^T factorization with fill-reducing ordering.
pub struct LdlSolver {
    numeric: LdlNumeric<f64, usize>,
    n: usize,
}

impl LdlSolver {
    pub fn new(mat: &CsrMatrix) -> Result<Self> {
        if mat.n_rows != mat.n_cols {
            return Err(Error::Factorization("matrix not square".into()));
        }
        let sp = mat.to_sprs();
        let numeric = Ldl::new()
            .check_symmetry(SymmetryCheck::DontCheckSymmetry)
            .fill_in_reduction(FillInReduction::ReverseCuthillMcKee)
            .numeric(sp.view())
            .map_err(|e| Error::Factorization(format!("LDL^T factorization failed: {e}")))?;
        Ok(LdlSolver { numeric, n: mat.n_rows })
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        debug_assert_eq!(rhs.len(), self.n);
        self.numeric.solve(rhs)
    }
}

/// Convert triplets directly into a sprs matrix (test helper and assembly
/// shortcut for non-CSR consumers).
pub fn sprs_from_triplets(
    n_rows: usize,
    n_cols: usize,
    triplets: &[(usize, usize, f64)],
) -> CsMatI<f64, usize> {
    let mut tm = TriMatI::new((n_rows, n_cols));
    for &(r, c, v) in triplets {
        tm.add_triplet(r, c, v);
    }
    tm.to_csr()
}

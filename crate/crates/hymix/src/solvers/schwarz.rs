//! Block (one-level) Schwarz preconditioners.
//!
//! A block decomposition of the degrees of freedom induces local solves on
//! the principal submatrices of the operator. The additive form sums the
//! lifted block corrections; the symmetrized multiplicative form runs a
//! forward sweep followed by a backward sweep while tracking the running
//! residual, which keeps one application symmetric.

use super::{Preconditioner, SchwarzMode};
use crate::sparse::CsrMatrix;
use crate::Result;
use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

enum BlockFactor {
    Chol(Cholesky<f64, Dyn>),
    /// Rank-revealing pseudo-inverse for blocks that sit inside the operator
    /// kernel (only possible around singular vertices).
    Pinv(DMatrix<f64>),
}

/// Factorized principal submatrices over a block decomposition.
pub struct SchwarzBlocks {
    pub blocks: Vec<Vec<usize>>,
    factors: Vec<BlockFactor>,
}

impl SchwarzBlocks {
    pub fn build(s: &CsrMatrix, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut factors = Vec::with_capacity(blocks.len());
        let mut pinv_count = 0usize;
        for b in &blocks {
            let sub = s.principal_submatrix(b);
            match Cholesky::new(sub.clone()) {
                Some(ch) => factors.push(BlockFactor::Chol(ch)),
                None => {
                    // Semidefinite block: invert on its range.
                    pinv_count += 1;
                    let eig = sub.symmetric_eigen();
                    let emax = eig.eigenvalues.amax().max(1e-300);
                    let mut inv = DMatrix::<f64>::zeros(b.len(), b.len());
                    for (i, &ev) in eig.eigenvalues.iter().enumerate() {
                        if ev > 1e-12 * emax {
                            let v = eig.eigenvectors.column(i);
                            inv += v * v.transpose() / ev;
                        }
                    }
                    factors.push(BlockFactor::Pinv(inv));
                }
            }
        }
        if pinv_count > 0 {
            log::warn!(
                "{pinv_count} Schwarz block(s) were singular; using rank-revealing \
                 pseudo-inverses (expected only around singular vertices)"
            );
        }
        Ok(SchwarzBlocks { blocks, factors })
    }

    fn solve_block(&self, i: usize, r: &DVector<f64>) -> DVector<f64> {
        match &self.factors[i] {
            BlockFactor::Chol(ch) => ch.solve(r),
            BlockFactor::Pinv(p) => p * r,
        }
    }

    /// `z = sum_i R_i^T S_i^{-1} R_i r`, summed in block order.
    pub fn additive_apply(&self, r: &[f64]) -> Vec<f64> {
        let mut z = vec![0.0; r.len()];
        for (i, b) in self.blocks.iter().enumerate() {
            let local = DVector::from_fn(b.len(), |j, _| r[b[j]]);
            let d = self.solve_block(i, &local);
            for (j, &g) in b.iter().enumerate() {
                z[g] += d[j];
            }
        }
        z
    }

    /// One multiplicative pass over the blocks in the given order, updating
    /// the accumulated correction `z` and running residual `rho = r - S z`.
    pub fn sweep<'a>(
        &self,
        s: &CsrMatrix,
        order: impl Iterator<Item = usize> + 'a,
        z: &mut [f64],
        rho: &mut [f64],
    ) {
        for i in order {
            let b = &self.blocks[i];
            let local = DVector::from_fn(b.len(), |j, _| rho[b[j]]);
            let d = self.solve_block(i, &local);
            for (j, &g) in b.iter().enumerate() {
                z[g] += d[j];
            }
            // rho -= S d, using the rows of the touched columns (S symmetric).
            for (j, &g) in b.iter().enumerate() {
                let dj = d[j];
                if dj == 0.0 {
                    continue;
                }
                let (cols, vals) = s.row(g);
                for (&c, &v) in cols.iter().zip(vals) {
                    rho[c] -= v * dj;
                }
            }
        }
    }

    /// Symmetrized multiplicative application: forward then backward sweep.
    pub fn symmetric_sweep_apply(&self, s: &CsrMatrix, r: &[f64]) -> Vec<f64> {
        let mut z = vec![0.0; r.len()];
        let mut rho = r.to_vec();
        self.sweep(s, 0..self.blocks.len(), &mut z, &mut rho);
        self.sweep(s, (0..self.blocks.len()).rev(), &mut z, &mut rho);
        z
    }
}

/// Jacobi (diagonal) preconditioner.
pub struct DiagonalPrecond {
    inv_diag: Vec<f64>,
}

impl DiagonalPrecond {
    pub fn new(diag: Vec<f64>) -> Self {
        DiagonalPrecond { inv_diag: diag.into_iter().map(|d| 1.0 / d).collect() }
    }
}

impl Preconditioner for DiagonalPrecond {
    fn apply(&self, r: &[f64]) -> Vec<f64> {
        r.iter().zip(&self.inv_diag).map(|(v, d)| v * d).collect()
    }
}

/// One-level overlapping Schwarz preconditioner.
pub struct OneLevelSchwarz {
    s: CsrMatrix,
    blocks: SchwarzBlocks,
    mode: SchwarzMode,
}

impl OneLevelSchwarz {
    pub fn build(s: CsrMatrix, blocks: Vec<Vec<usize>>, mode: SchwarzMode) -> Result<Self> {
        let blocks = SchwarzBlocks::build(&s, blocks)?;
        Ok(OneLevelSchwarz { s, blocks, mode })
    }
}

impl Preconditioner for OneLevelSchwarz {
    fn apply(&self, r: &[f64]) -> Vec<f64> {
        match self.mode {
            SchwarzMode::Additive => self.blocks.additive_apply(r),
            SchwarzMode::SymMultiplicative => self.blocks.symmetric_sweep_apply(&self.s, r),
        }
    }
}

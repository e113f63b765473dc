//! Two-level Schwarz preconditioners and the W-cycle coarse solver.
//!
//! The two-level preconditioner combines the fine-level block corrections
//! with a coarse correction transported through the multiplier intergrid
//! operator. In the additive form the two parts are summed; the symmetrized
//! multiplicative form runs a forward block sweep, the coarse correction,
//! and a backward block sweep on the running residual.
//!
//! The multilevel variant replaces the exact coarse factorization by a
//! W-cycle on the hierarchy of quadratic spaces, with symmetrized
//! multiplicative vertex-patch smoothing and harmonic-extension
//! prolongations; each level assembles its own elastic form (the projected
//! divergence term is level-dependent, so the forms are not inherited).

use super::coarse::{assemble_p2, p2_vertex_patch_blocks, CoarseProblem, P2Space};
use super::intergrid::p2_prolongation;
use super::schwarz::SchwarzBlocks;
use super::{Preconditioner, SchwarzMode};
use crate::material::MaterialParams;
use crate::mesh::{RefinementMap, TriMesh};
use crate::sparse::{CsrMatrix, LdlSolver};
use crate::{Error, Result};

struct P2Level {
    a: CsrMatrix,
    smoother: SchwarzBlocks,
}

/// W-cycle multigrid on the hierarchy of constrained quadratic spaces.
pub struct P2Multigrid {
    levels: Vec<P2Level>,
    /// `prolong[l]` maps level `l` to level `l + 1`.
    prolong: Vec<CsrMatrix>,
    coarsest: LdlSolver,
    smooth_steps: usize,
}

impl P2Multigrid {
    pub fn build(
        meshes: &[TriMesh],
        maps: &[RefinementMap],
        material: &MaterialParams,
        smooth_steps: usize,
    ) -> Result<Self> {
        if meshes.is_empty() {
            return Err(Error::Config("multigrid hierarchy is empty".into()));
        }
        if maps.len() + 1 != meshes.len() {
            return Err(Error::DofMismatch(
                "hierarchy needs one refinement map between consecutive meshes".into(),
            ));
        }
        let spaces: Vec<P2Space> = meshes.iter().map(P2Space::build).collect();
        let mut levels = Vec::with_capacity(meshes.len());
        for (mesh, space) in meshes.iter().zip(&spaces) {
            let a = assemble_p2(mesh, space, material);
            let blocks = p2_vertex_patch_blocks(mesh, space);
            let smoother = SchwarzBlocks::build(&a, blocks)?;
            levels.push(P2Level { a, smoother });
        }
        let mut prolong = Vec::with_capacity(maps.len());
        for l in 0..maps.len() {
            prolong.push(p2_prolongation(
                &meshes[l],
                &meshes[l + 1],
                &maps[l],
                &spaces[l],
                &spaces[l + 1],
                material,
            )?);
        }
        let coarsest = LdlSolver::new(&levels[0].a)?;
        Ok(P2Multigrid { levels, prolong, coarsest, smooth_steps })
    }

    /// Approximate inverse of the finest-level stiffness.
    pub fn apply(&self, b: &[f64]) -> Vec<f64> {
        self.cycle(self.levels.len() - 1, b)
    }

    pub fn finest_a(&self) -> &CsrMatrix {
        &self.levels.last().unwrap().a
    }

    fn cycle(&self, level: usize, b: &[f64]) -> Vec<f64> {
        if level == 0 {
            return self.coarsest.solve(b);
        }
        let lv = &self.levels[level];
        let mut x = vec![0.0; b.len()];
        for _ in 0..self.smooth_steps {
            let r = residual(&lv.a, b, &x);
            let dz = lv.smoother.symmetric_sweep_apply(&lv.a, &r);
            add(&mut x, &dz);
        }
        // Coarse correction, visited twice (W-cycle).
        let r = residual(&lv.a, b, &x);
        let rc = mul_transpose(&self.prolong[level - 1], &r);
        let mut e = self.cycle(level - 1, &rc);
        let rc2 = residual(&self.levels[level - 1].a, &rc, &e);
        let e2 = self.cycle(level - 1, &rc2);
        add(&mut e, &e2);
        let ef = self.prolong[level - 1].mul_vec(&e);
        add(&mut x, &ef);
        for _ in 0..self.smooth_steps {
            let r = residual(&lv.a, b, &x);
            let dz = lv.smoother.symmetric_sweep_apply(&lv.a, &r);
            add(&mut x, &dz);
        }
        x
    }
}

fn residual(a: &CsrMatrix, b: &[f64], x: &[f64]) -> Vec<f64> {
    let ax = a.mul_vec(x);
    b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect()
}

fn add(x: &mut [f64], y: &[f64]) {
    for (xi, yi) in x.iter_mut().zip(y) {
        *xi += yi;
    }
}

fn mul_transpose(m: &CsrMatrix, x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; m.n_cols];
    for r in 0..m.n_rows {
        let (cols, vals) = m.row(r);
        let xr = x[r];
        if xr == 0.0 {
            continue;
        }
        for (&c, &v) in cols.iter().zip(vals) {
            out[c] += v * xr;
        }
    }
    out
}

/// Two-level (or multilevel, depending on the coarse solver) overlapping
/// Schwarz preconditioner for the condensed multiplier operator.
pub struct TwoLevelSchwarz {
    s: CsrMatrix,
    blocks: SchwarzBlocks,
    mode: SchwarzMode,
    coarse: CoarseProblem,
    /// Multiplier intergrid matrix, `n_multiplier x n_coarse_free`.
    intergrid: CsrMatrix,
}

impl TwoLevelSchwarz {
    pub fn build(
        s: CsrMatrix,
        blocks: Vec<Vec<usize>>,
        mode: SchwarzMode,
        coarse: CoarseProblem,
        intergrid: CsrMatrix,
    ) -> Result<Self> {
        if intergrid.n_rows != s.n_rows {
            return Err(Error::DofMismatch(format!(
                "intergrid rows {} vs operator dimension {}",
                intergrid.n_rows, s.n_rows
            )));
        }
        let blocks = SchwarzBlocks::build(&s, blocks)?;
        Ok(TwoLevelSchwarz { s, blocks, mode, coarse, intergrid })
    }

    fn coarse_correction(&self, r: &[f64]) -> Vec<f64> {
        let rc = mul_transpose(&self.intergrid, r);
        let ec = self.coarse.solve(&rc);
        self.intergrid.mul_vec(&ec)
    }
}

impl Preconditioner for TwoLevelSchwarz {
    fn apply(&self, r: &[f64]) -> Vec<f64> {
        match self.mode {
            SchwarzMode::Additive => {
                let mut z = self.blocks.additive_apply(r);
                let zc = self.coarse_correction(r);
                add(&mut z, &zc);
                z
            }
            SchwarzMode::SymMultiplicative => {
                let mut z = vec![0.0; r.len()];
                let mut rho = r.to_vec();
                self.blocks.sweep(&self.s, 0..self.blocks.blocks.len(), &mut z, &mut rho);
                let d = self.coarse_correction(&rho);
                let sd = self.s.mul_vec(&d);
                add(&mut z, &d);
                for (ri, si) in rho.iter_mut().zip(&sd) {
                    *ri -= si;
                }
                self.blocks.sweep(
                    &self.s,
                    (0..self.blocks.blocks.len()).rev(),
                    &mut z,
                    &mut rho,
                );
                z
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::MeshHierarchy;

    #[test]
    fn w_cycle_is_a_contraction_on_a_two_level_hierarchy() {
        let base = TriMesh::unit_square_uniform(2).unwrap();
        let hierarchy = MeshHierarchy::by_refinement(base, 1).unwrap();
        let mat = MaterialParams::from_poisson(0.5, 0.4999).unwrap();
        let mg =
            P2Multigrid::build(&hierarchy.meshes, &hierarchy.maps, &mat, 2).unwrap();
        let a = mg.finest_a();
        let n = a.n_rows;
        // Power iteration on the error propagator I - B A in the A inner
        // product: contraction factor must be below one.
        let mut v: Vec<f64> = (0..n).map(|i| ((i * 13 + 5) as f64 * 0.71).sin()).collect();
        let mut rho = 1.0;
        for _ in 0..30 {
            let av = a.mul_vec(&v);
            let bav = mg.apply(&av);
            // e = v - B A v
            let e: Vec<f64> = v.iter().zip(&bav).map(|(x, y)| x - y).collect();
            let ae = a.mul_vec(&e);
            let num: f64 = ae.iter().zip(&e).map(|(x, y)| x * y).sum();
            let den: f64 = a.mul_vec(&v).iter().zip(&v).map(|(x, y)| x * y).sum();
            rho = (num / den).sqrt();
            let norm = e.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
            v = e.iter().map(|x| x / norm).collect();
        }
        assert!(rho < 1.0, "W-cycle contraction factor {rho}");
        assert!(rho < 0.8, "W-cycle should contract well, got {rho}");
    }

    #[test]
    fn w_cycle_application_is_symmetric() {
        let base = TriMesh::unit_square_uniform(2).unwrap();
        let hierarchy = MeshHierarchy::by_refinement(base, 2).unwrap();
        let mat = MaterialParams::from_poisson(0.5, 0.499).unwrap();
        let mg =
            P2Multigrid::build(&hierarchy.meshes, &hierarchy.maps, &mat, 2).unwrap();
        let n = mg.finest_a().n_rows;
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
        let y: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).cos()).collect();
        let bx = mg.apply(&x);
        let by = mg.apply(&y);
        let a: f64 = bx.iter().zip(&y).map(|(u, v)| u * v).sum();
        let b: f64 = by.iter().zip(&x).map(|(u, v)| u * v).sum();
        assert!((a - b).abs() <= 1e-11 * a.abs().max(1.0), "{a} vs {b}");
    }
}

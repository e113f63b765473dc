//! Conjugate gradients and overlapping Schwarz preconditioners for the
//! condensed multiplier system.
//!
//! Available preconditioners: the operator diagonal, one-level Schwarz over
//! edge / element / vertex-patch blocks (additive or symmetrized
//! multiplicative), a two-level variant adding a continuous quadratic coarse
//! space connected through a harmonic-extension intergrid operator, and a
//! multilevel variant that replaces the exact coarse solve by a W-cycle on
//! the quadratic hierarchy.

pub mod coarse;
pub mod intergrid;
pub mod multilevel;
pub mod pcg;
pub mod schwarz;

use crate::localcond::CondensationSet;
use crate::mesh::{RefinementMap, TriMesh};
use crate::schur::{MultiplierSpace, SchurOperator};
use crate::sparse::CsrMatrix;
use crate::{Error, Result};

pub use coarse::{CoarseProblem, P2Space};
pub use intergrid::{multiplier_intergrid, p2_prolongation};
pub use multilevel::{P2Multigrid, TwoLevelSchwarz};
pub use pcg::{pcg, SolveReport};
pub use schwarz::{DiagonalPrecond, OneLevelSchwarz, SchwarzBlocks};

/// A symmetric linear operator on multiplier vectors.
pub trait Operator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64]) -> Vec<f64>;
}

impl Operator for SchurOperator {
    fn dim(&self) -> usize {
        self.n
    }
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        SchurOperator::apply(self, x)
    }
}

impl Operator for CsrMatrix {
    fn dim(&self) -> usize {
        self.n_rows
    }
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.mul_vec(x)
    }
}

/// A symmetric positive (semi)definite preconditioner application.
pub trait Preconditioner: Sync {
    fn apply(&self, r: &[f64]) -> Vec<f64>;
}

/// Identity preconditioner (plain conjugate gradients).
pub struct IdentityPrecond;

impl Preconditioner for IdentityPrecond {
    fn apply(&self, r: &[f64]) -> Vec<f64> {
        r.to_vec()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrecondKind {
    Diagonal,
    OneLevel,
    TwoLevel,
    Multilevel,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockType {
    Edges,
    Elements,
    VertexPatches,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchwarzMode {
    Additive,
    SymMultiplicative,
}

/// Preconditioner configuration; see the configuration file grammar in the
/// project README for the textual form.
#[derive(Clone, Debug)]
pub struct PrecondConfig {
    pub kind: PrecondKind,
    pub block_type: BlockType,
    pub mode: SchwarzMode,
    /// Pre- and post-smoothing steps of the coarse W-cycle.
    pub smooth_steps: usize,
    /// Optional cap on the number of levels used by the W-cycle hierarchy.
    pub levels: Option<usize>,
}

impl Default for PrecondConfig {
    fn default() -> Self {
        PrecondConfig {
            kind: PrecondKind::TwoLevel,
            block_type: BlockType::VertexPatches,
            mode: SchwarzMode::SymMultiplicative,
            smooth_steps: 2,
            levels: None,
        }
    }
}

/// A nested sequence of uniformly refined meshes, coarsest first.
pub struct MeshHierarchy {
    pub meshes: Vec<TriMesh>,
    /// `maps[i]` refines `meshes[i]` into `meshes[i+1]`.
    pub maps: Vec<RefinementMap>,
}

impl MeshHierarchy {
    /// Refine `base` until the finest level has been refined `levels` times.
    pub fn by_refinement(base: TriMesh, levels: usize) -> Result<Self> {
        let mut meshes = vec![base];
        let mut maps = Vec::new();
        for _ in 0..levels {
            let (fine, map) = meshes.last().unwrap().uniform_refine()?;
            meshes.push(fine);
            maps.push(map);
        }
        Ok(MeshHierarchy { meshes, maps })
    }

    pub fn finest(&self) -> &TriMesh {
        self.meshes.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.meshes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.meshes.is_empty()
    }
}

/// Build the configured preconditioner for the assembled operator.
///
/// Two-level and multilevel configurations need a hierarchy with at least
/// two meshes whose finest level carries `space` and `op`; a multilevel
/// request on a depth-two hierarchy degenerates to the exact two-level
/// method (logged, not an error).
pub fn build_preconditioner(
    cfg: &PrecondConfig,
    hierarchy: &MeshHierarchy,
    space: &MultiplierSpace,
    op: &SchurOperator,
    cond: &CondensationSet,
) -> Result<Box<dyn Preconditioner>> {
    let mesh = hierarchy.finest();
    let s = op.assembled();
    let blocks = match cfg.block_type {
        BlockType::Edges => space.edge_blocks.clone(),
        BlockType::Elements => space.element_blocks.clone(),
        BlockType::VertexPatches => space.vertex_patches.clone(),
    };
    check_coverage(&blocks, space.total_dofs)?;
    match cfg.kind {
        PrecondKind::Diagonal => Ok(Box::new(DiagonalPrecond::new(op.diagonal()))),
        PrecondKind::OneLevel => {
            Ok(Box::new(OneLevelSchwarz::build(s.clone(), blocks, cfg.mode)?))
        }
        PrecondKind::TwoLevel | PrecondKind::Multilevel => {
            if hierarchy.len() < 2 {
                return Err(Error::Config(
                    "two-level and multilevel preconditioners need a refinement hierarchy"
                        .into(),
                ));
            }
            let n = hierarchy.len();
            let coarse_mesh = &hierarchy.meshes[n - 2];
            let map = &hierarchy.maps[n - 2];
            let coarse = if cfg.kind == PrecondKind::TwoLevel || n == 2 {
                if cfg.kind == PrecondKind::Multilevel {
                    log::info!(
                        "multilevel hierarchy has depth 2; coarse solve is exact (two-level)"
                    );
                }
                CoarseProblem::exact(coarse_mesh, &cond.material)?
            } else {
                let depth = cfg.levels.unwrap_or(n - 1).clamp(1, n - 1);
                CoarseProblem::w_cycle(
                    &hierarchy.meshes[n - 1 - depth..n - 1],
                    &hierarchy.maps[n - 1 - depth..n - 2],
                    &cond.material,
                    cfg.smooth_steps,
                )?
            };
            let intergrid = multiplier_intergrid(
                coarse_mesh,
                mesh,
                map,
                coarse.space(),
                space,
                &cond.bases,
                &cond.material,
            )?;
            Ok(Box::new(TwoLevelSchwarz::build(
                s.clone(),
                blocks,
                cfg.mode,
                coarse,
                intergrid,
            )?))
        }
    }
}

fn check_coverage(blocks: &[Vec<usize>], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    for b in blocks {
        for &d in b {
            if d >= n {
                return Err(Error::DofMismatch(format!("block index {d} out of range {n}")));
            }
            seen[d] = true;
        }
    }
    if seen.iter().all(|&s| s) {
        Ok(())
    } else {
        Err(Error::Config(
            "block decomposition does not cover every multiplier DOF".into(),
        ))
    }
}

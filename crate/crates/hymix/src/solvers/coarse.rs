//! The continuous vector quadratic coarse space and its elastic stiffness.
//!
//! Degrees of freedom sit at vertices and edge midpoints, two components
//! each, with homogeneous Dirichlet values on the domain boundary. The
//! bilinear form is `2 mu (eps(w), eps(v)) + lambda (P0 div w, P0 div v)`
//! with the divergence projected to element means, assembled from the
//! 12x12 element blocks.

use super::multilevel::P2Multigrid;
use crate::elements::coarse_p2_matrices;
use crate::material::MaterialParams;
use crate::mesh::{RefinementMap, TriMesh};
use crate::sparse::{CsrMatrix, LdlSolver};
use crate::Result;

/// Index layout of the constrained vector quadratic space on a mesh.
#[derive(Clone, Debug)]
pub struct P2Space {
    /// Scalar nodes: vertices first, then one node per edge (midpoint).
    pub n_scalar: usize,
    /// Free index of each full vector DOF `2 * scalar_node + component`.
    pub free_of_full: Vec<Option<usize>>,
    pub full_of_free: Vec<usize>,
    pub n_free: usize,
}

impl P2Space {
    pub fn build(mesh: &TriMesh) -> Self {
        let n_scalar = mesh.n_nodes() + mesh.n_edges();
        let mut constrained = vec![false; n_scalar];
        for v in 0..mesh.n_nodes() {
            if mesh.boundary_vertex[v] {
                constrained[v] = true;
            }
        }
        for e in 0..mesh.n_edges() {
            if mesh.boundary_edge[e] {
                constrained[mesh.n_nodes() + e] = true;
            }
        }
        let mut free_of_full = vec![None; 2 * n_scalar];
        let mut full_of_free = Vec::new();
        for node in 0..n_scalar {
            if constrained[node] {
                continue;
            }
            for c in 0..2 {
                free_of_full[2 * node + c] = Some(full_of_free.len());
                full_of_free.push(2 * node + c);
            }
        }
        let n_free = full_of_free.len();
        P2Space { n_scalar, free_of_full, full_of_free, n_free }
    }

    /// Scalar node id of the midpoint of edge `e`.
    pub fn edge_node(&self, mesh: &TriMesh, e: usize) -> usize {
        mesh.n_nodes() + e
    }

    /// The six scalar nodes of element `t` in the local order used by the
    /// element stiffness (vertices, then midpoints of local edges).
    pub fn element_nodes(&self, mesh: &TriMesh, t: usize) -> [usize; 6] {
        let tri = mesh.triangles[t];
        let ed = mesh.edge_of_triangle[t];
        [
            tri[0],
            tri[1],
            tri[2],
            mesh.n_nodes() + ed[0],
            mesh.n_nodes() + ed[1],
            mesh.n_nodes() + ed[2],
        ]
    }
}

/// Assemble the elastic stiffness on the free DOFs.
pub fn assemble_p2(mesh: &TriMesh, space: &P2Space, material: &MaterialParams) -> CsrMatrix {
    let mut triplets = Vec::new();
    for t in 0..mesh.n_triangles() {
        let geom = mesh.geometry(t);
        let local = coarse_p2_matrices(&geom, material);
        let nodes = space.element_nodes(mesh, t);
        for (r, &nr) in nodes.iter().enumerate() {
            for cr in 0..2 {
                let Some(gr) = space.free_of_full[2 * nr + cr] else { continue };
                for (s, &ns) in nodes.iter().enumerate() {
                    for cs in 0..2 {
                        let Some(gs) = space.free_of_full[2 * ns + cs] else { continue };
                        let v = local[(2 * r + cr, 2 * s + cs)];
                        if v != 0.0 {
                            triplets.push((gr, gs, v));
                        }
                    }
                }
            }
        }
    }
    CsrMatrix::from_triplets(space.n_free, space.n_free, triplets)
}

/// Vertex-patch smoother blocks: for each vertex, the free DOFs strictly
/// inside its patch (the vertex itself plus midpoints of incident edges).
pub fn p2_vertex_patch_blocks(mesh: &TriMesh, space: &P2Space) -> Vec<Vec<usize>> {
    let mut edges_at: Vec<Vec<usize>> = vec![Vec::new(); mesh.n_nodes()];
    for e in 0..mesh.n_edges() {
        edges_at[mesh.edges[e][0]].push(e);
        edges_at[mesh.edges[e][1]].push(e);
    }
    let mut blocks = Vec::new();
    for v in 0..mesh.n_nodes() {
        let mut block = Vec::new();
        for c in 0..2 {
            if let Some(g) = space.free_of_full[2 * v + c] {
                block.push(g);
            }
        }
        for &e in &edges_at[v] {
            let node = space.edge_node(mesh, e);
            for c in 0..2 {
                if let Some(g) = space.free_of_full[2 * node + c] {
                    block.push(g);
                }
            }
        }
        if !block.is_empty() {
            block.sort_unstable();
            blocks.push(block);
        }
    }
    blocks
}

enum CoarseSolverImpl {
    Exact(LdlSolver),
    WCycle(P2Multigrid),
}

/// The coarse correction of the two-level and multilevel preconditioners:
/// the quadratic space with either an exact factorization or a W-cycle.
pub struct CoarseProblem {
    space: P2Space,
    pub a: CsrMatrix,
    solver: CoarseSolverImpl,
}

impl CoarseProblem {
    pub fn exact(mesh: &TriMesh, material: &MaterialParams) -> Result<Self> {
        let space = P2Space::build(mesh);
        let a = assemble_p2(mesh, &space, material);
        let solver = CoarseSolverImpl::Exact(LdlSolver::new(&a)?);
        Ok(CoarseProblem { space, a, solver })
    }

    /// W-cycle over `meshes` (coarsest first, finest last); `maps[i]`
    /// refines `meshes[i]` into `meshes[i+1]`.
    pub fn w_cycle(
        meshes: &[TriMesh],
        maps: &[RefinementMap],
        material: &MaterialParams,
        smooth_steps: usize,
    ) -> Result<Self> {
        let mg = P2Multigrid::build(meshes, maps, material, smooth_steps)?;
        let space = P2Space::build(meshes.last().unwrap());
        let a = assemble_p2(meshes.last().unwrap(), &space, material);
        Ok(CoarseProblem { space, a, solver: CoarseSolverImpl::WCycle(mg) })
    }

    pub fn space(&self) -> &P2Space {
        &self.space
    }

    /// Apply the (approximate) inverse of the coarse stiffness.
    pub fn solve(&self, r: &[f64]) -> Vec<f64> {
        match &self.solver {
            CoarseSolverImpl::Exact(ldl) => ldl.solve(r),
            CoarseSolverImpl::WCycle(mg) => mg.apply(r),
        }
    }
}

//! Global multiplier space and the condensed interface operator.
//!
//! Multiplier degrees of freedom live on interior edges only (the multiplier
//! vanishes on boundary edges) and are ordered lexicographically by
//! (interior edge rank, node along the edge, component). The condensed
//! operator is symmetric positive semidefinite; its kernel is nontrivial
//! exactly when the grid has interior singular vertices, and is detected
//! vertex by vertex from the local trace/jump pairing.

use crate::localcond::CondensationSet;
use crate::mesh::{TriMesh, DEFAULT_KAPPA0};
use crate::sparse::CsrMatrix;
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use std::sync::OnceLock;

/// Degree-of-freedom layout of the multiplier space, together with the index
/// sets used by the Schwarz preconditioners.
#[derive(Clone, Debug)]
pub struct MultiplierSpace {
    pub k: usize,
    /// `2 (k+2)`.
    pub dofs_per_edge: usize,
    pub total_dofs: usize,
    /// Mesh edge ids of interior edges, ascending.
    pub interior_edges: Vec<usize>,
    /// Interior rank of each mesh edge, `None` on the boundary.
    pub interior_index: Vec<Option<usize>>,
    /// One block per interior edge.
    pub edge_blocks: Vec<Vec<usize>>,
    /// One block per element: the DOFs of its interior edges.
    pub element_blocks: Vec<Vec<usize>>,
    /// One block per vertex: the DOFs of interior edges meeting that vertex.
    pub vertex_patches: Vec<Vec<usize>>,
}

impl MultiplierSpace {
    pub fn build(mesh: &TriMesh, k: usize) -> Result<Self> {
        if k > 3 {
            return Err(Error::UnsupportedDegree(k));
        }
        let dofs_per_edge = 2 * (k + 2);
        let mut interior_edges = Vec::new();
        let mut interior_index = vec![None; mesh.n_edges()];
        for e in 0..mesh.n_edges() {
            if !mesh.boundary_edge[e] {
                interior_index[e] = Some(interior_edges.len());
                interior_edges.push(e);
            }
        }
        let total_dofs = dofs_per_edge * interior_edges.len();

        let edge_blocks: Vec<Vec<usize>> = (0..interior_edges.len())
            .map(|ie| (ie * dofs_per_edge..(ie + 1) * dofs_per_edge).collect())
            .collect();

        let mut element_blocks = Vec::with_capacity(mesh.n_triangles());
        for t in 0..mesh.n_triangles() {
            let mut block = Vec::new();
            for &e in &mesh.edge_of_triangle[t] {
                if let Some(ie) = interior_index[e] {
                    block.extend(ie * dofs_per_edge..(ie + 1) * dofs_per_edge);
                }
            }
            if !block.is_empty() {
                block.sort_unstable();
                element_blocks.push(block);
            }
        }

        let mut edges_at_vertex: Vec<Vec<usize>> = vec![Vec::new(); mesh.n_nodes()];
        for (rank, &e) in interior_edges.iter().enumerate() {
            edges_at_vertex[mesh.edges[e][0]].push(rank);
            edges_at_vertex[mesh.edges[e][1]].push(rank);
        }
        let mut vertex_patches = Vec::new();
        for v in 0..mesh.n_nodes() {
            if edges_at_vertex[v].is_empty() {
                continue;
            }
            let mut block = Vec::new();
            for &ie in &edges_at_vertex[v] {
                block.extend(ie * dofs_per_edge..(ie + 1) * dofs_per_edge);
            }
            block.sort_unstable();
            vertex_patches.push(block);
        }

        Ok(MultiplierSpace {
            k,
            dofs_per_edge,
            total_dofs,
            interior_edges,
            interior_index,
            edge_blocks,
            element_blocks,
            vertex_patches,
        })
    }

    /// Global index of (interior edge rank, edge node, component).
    pub fn dof(&self, interior_edge: usize, node: usize, comp: usize) -> usize {
        interior_edge * self.dofs_per_edge + 2 * node + comp
    }

    /// Inverse of [`MultiplierSpace::dof`].
    pub fn edge_of_dof(&self, dof: usize) -> (usize, usize, usize) {
        let ie = dof / self.dofs_per_edge;
        let r = dof % self.dofs_per_edge;
        (ie, r / 2, r % 2)
    }
}

/// Sparse vector with sorted support; kernel vectors are local objects, so
/// this keeps projections cheap.
#[derive(Clone, Debug)]
pub struct SparseVec {
    pub idx: Vec<usize>,
    pub val: Vec<f64>,
}

impl SparseVec {
    pub fn dot_dense(&self, x: &[f64]) -> f64 {
        self.idx.iter().zip(&self.val).map(|(&i, &v)| v * x[i]).sum()
    }

    pub fn axpy_into(&self, alpha: f64, x: &mut [f64]) {
        for (&i, &v) in self.idx.iter().zip(&self.val) {
            x[i] += alpha * v;
        }
    }

    pub fn dot_sparse(&self, other: &SparseVec) -> f64 {
        let mut sum = 0.0;
        let mut j = 0;
        for (&i, &v) in self.idx.iter().zip(&self.val) {
            while j < other.idx.len() && other.idx[j] < i {
                j += 1;
            }
            if j < other.idx.len() && other.idx[j] == i {
                sum += v * other.val[j];
            }
        }
        sum
    }

    pub fn norm(&self) -> f64 {
        self.val.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    fn add_scaled(&self, alpha: f64, other: &SparseVec) -> SparseVec {
        let mut map: std::collections::BTreeMap<usize, f64> = std::collections::BTreeMap::new();
        for (&i, &v) in self.idx.iter().zip(&self.val) {
            *map.entry(i).or_insert(0.0) += v;
        }
        for (&i, &v) in other.idx.iter().zip(&other.val) {
            *map.entry(i).or_insert(0.0) += alpha * v;
        }
        let (idx, val) = map.into_iter().unzip();
        SparseVec { idx, val }
    }

    fn scale(&mut self, s: f64) {
        for v in &mut self.val {
            *v *= s;
        }
    }
}

/// Project `x` onto the orthogonal complement of the span of `basis`
/// (assumed orthonormal).
pub fn project_out(basis: &[SparseVec], x: &mut [f64]) {
    for z in basis {
        let c = z.dot_dense(x);
        z.axpy_into(-c, x);
    }
}

/// The condensed interface operator on the multiplier space.
///
/// Applies either matrix-free (element blocks gathered and scattered in
/// deterministic element order) or through the assembled sparse matrix;
/// both paths agree to rounding. Immutable after construction.
pub struct SchurOperator {
    pub n: usize,
    dofs_per_edge: usize,
    /// Per element: interior rank of each local edge.
    scatter: Vec<[Option<usize>; 3]>,
    /// Per element condensed block (all three edges).
    s_blocks: Vec<DMatrix<f64>>,
    /// Orthonormal basis of the kernel (empty on grids without interior
    /// singular vertices).
    pub kernel: Vec<SparseVec>,
    assembled: OnceLock<CsrMatrix>,
}

impl SchurOperator {
    /// Condense the element blocks into the global operator and detect the
    /// kernel from the grid's singular vertices.
    pub fn build(mesh: &TriMesh, space: &MultiplierSpace, cond: &CondensationSet) -> Result<Self> {
        if space.k != cond.k {
            return Err(Error::DofMismatch(format!(
                "space degree {} vs condensation degree {}",
                space.k, cond.k
            )));
        }
        let scatter: Vec<[Option<usize>; 3]> = (0..mesh.n_triangles())
            .map(|t| std::array::from_fn(|j| space.interior_index[mesh.edge_of_triangle[t][j]]))
            .collect();
        let s_blocks: Vec<DMatrix<f64>> =
            cond.elems.iter().map(|e| e.s_k.clone()).collect();
        let kernel = detect_kernel(mesh, space, cond)?;
        Ok(SchurOperator {
            n: space.total_dofs,
            dofs_per_edge: space.dofs_per_edge,
            scatter,
            s_blocks,
            kernel,
            assembled: OnceLock::new(),
        })
    }

    /// Matrix-free application in deterministic element order.
    pub fn apply_matrix_free(&self, x: &[f64]) -> Vec<f64> {
        let npe = self.dofs_per_edge;
        let locals: Vec<DVector<f64>> = self
            .s_blocks
            .par_iter()
            .zip(&self.scatter)
            .map(|(s_k, sc)| {
                let mut lam = DVector::<f64>::zeros(3 * npe);
                for (j, ie) in sc.iter().enumerate() {
                    if let Some(ie) = ie {
                        let base = ie * npe;
                        for m in 0..npe {
                            lam[j * npe + m] = x[base + m];
                        }
                    }
                }
                s_k * lam
            })
            .collect();
        let mut y = vec![0.0; self.n];
        for (t, loc) in locals.iter().enumerate() {
            for (j, ie) in self.scatter[t].iter().enumerate() {
                if let Some(ie) = ie {
                    let base = ie * npe;
                    for m in 0..npe {
                        y[base + m] += loc[j * npe + m];
                    }
                }
            }
        }
        y
    }

    /// The assembled sparse matrix (built once, cached).
    pub fn assembled(&self) -> &CsrMatrix {
        self.assembled.get_or_init(|| {
            let npe = self.dofs_per_edge;
            let mut triplets = Vec::new();
            for (t, s_k) in self.s_blocks.iter().enumerate() {
                let sc = &self.scatter[t];
                for (j, iej) in sc.iter().enumerate() {
                    let Some(iej) = iej else { continue };
                    for (l, iel) in sc.iter().enumerate() {
                        let Some(iel) = iel else { continue };
                        for m in 0..npe {
                            for p in 0..npe {
                                let v = s_k[(j * npe + m, l * npe + p)];
                                if v != 0.0 {
                                    triplets.push((iej * npe + m, iel * npe + p, v));
                                }
                            }
                        }
                    }
                }
            }
            CsrMatrix::from_triplets(self.n, self.n, triplets)
        })
    }

    /// Apply through the assembled matrix if available, matrix-free
    /// otherwise.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        match self.assembled.get() {
            Some(csr) => csr.mul_vec(x),
            None => self.apply_matrix_free(x),
        }
    }

    /// Euclidean-orthonormal diagonal of the operator, with non-positive
    /// entries replaced by one (they can only appear in exactly singular
    /// configurations).
    pub fn diagonal(&self) -> Vec<f64> {
        let csr = self.assembled();
        (0..self.n)
            .map(|i| {
                let d = csr.get(i, i).unwrap_or(0.0);
                if d > 1e-300 {
                    d
                } else {
                    1.0
                }
            })
            .collect()
    }
}

/// Right-hand side of the condensed system: `b[mu] = -(f, u_mu)` summed over
/// elements, orthogonal to the kernel for solvable problems.
#[derive(Clone, Debug)]
pub struct RhsVector {
    pub values: Vec<f64>,
}

impl RhsVector {
    /// Largest kernel component, a consistency diagnostic.
    pub fn kernel_residual(&self, kernel: &[SparseVec]) -> f64 {
        kernel
            .iter()
            .map(|z| z.dot_dense(&self.values).abs())
            .fold(0.0, f64::max)
    }
}

pub fn assemble_rhs(
    mesh: &TriMesh,
    space: &MultiplierSpace,
    cond: &CondensationSet,
) -> RhsVector {
    let npe = space.dofs_per_edge;
    let mut values = vec![0.0; space.total_dofs];
    for t in 0..mesh.n_triangles() {
        let lm = &cond.elems[t].load_multiplier;
        for (j, &e) in mesh.edge_of_triangle[t].iter().enumerate() {
            if let Some(ie) = space.interior_index[e] {
                let base = ie * npe;
                for m in 0..npe {
                    values[base + m] += lm[j * npe + m];
                }
            }
        }
    }
    RhsVector { values }
}

/// Detect the kernel of the condensed operator from the interior singular
/// vertices: at each such vertex, multiplier data orthogonal to every jump
/// of the vertex's nodal stress functions spans a local kernel space. The
/// local coupling matrices are extracted from the same trace pairings used
/// in the element assembly.
pub fn detect_kernel(
    mesh: &TriMesh,
    space: &MultiplierSpace,
    cond: &CondensationSet,
) -> Result<Vec<SparseVec>> {
    let report = mesh.singularity_report(DEFAULT_KAPPA0);
    if report.singular_vertices.is_empty() {
        return Ok(Vec::new());
    }
    let bases = &cond.bases;
    let npe = space.dofs_per_edge;
    let nt = bases.trace.scalar.dim();

    // Reference edge mass matrix (unit length), shared by every edge.
    let mut mass_ref = DMatrix::<f64>::zeros(nt, nt);
    for (q, w) in bases.edge_rule.weights.iter().enumerate() {
        for i in 0..nt {
            for j in 0..nt {
                mass_ref[(i, j)] += w * bases.trace_vals[(q, i)] * bases.trace_vals[(q, j)];
            }
        }
    }
    let mass_ref_inv = mass_ref
        .try_inverse()
        .ok_or_else(|| Error::Factorization("edge mass matrix singular".into()))?;

    let stars = mesh.vertex_stars();
    let mut kernel: Vec<SparseVec> = Vec::new();

    for &a in &report.singular_vertices {
        // Interior edges at the vertex, ascending by mesh edge id.
        let mut edges_at: Vec<usize> = (0..mesh.n_edges())
            .filter(|&e| {
                !mesh.boundary_edge[e] && (mesh.edges[e][0] == a || mesh.edges[e][1] == a)
            })
            .collect();
        edges_at.sort_unstable();
        if edges_at.is_empty() {
            continue;
        }
        let tris = &stars[a];
        let nrows = 2 * edges_at.len();
        let ncols = 3 * tris.len();
        let mut d = DMatrix::<f64>::zeros(nrows, ncols);

        for (kt, &t) in tris.iter().enumerate() {
            let tri = mesh.triangles[t];
            let lv = tri.iter().position(|&x| x == a).unwrap();
            let va = bases.stress.scalar.vertex_node(lv);
            let celem = &cond.elems[t].c;
            for (j, &e) in mesh.edge_of_triangle[t].iter().enumerate() {
                let Some(row_e) = edges_at.iter().position(|&x| x == e) else { continue };
                // The vertex sits at parameter 0 or 1 along the global edge.
                let node_a = if mesh.edges[e][0] == a { 0 } else { nt - 1 };
                let len = mesh.geometry(t).edge_length(j);
                for comp in 0..2 {
                    for p in 0..3 {
                        // Moments of the jump of (vertex scalar) x (generator p)
                        // against the edge trace functions, converted to the
                        // dual pairing by the edge mass inverse.
                        let mut moments = DVector::<f64>::zeros(nt);
                        for tn in 0..nt {
                            moments[tn] = celem[(j * npe + 2 * tn + comp, 3 * va + p)];
                        }
                        let coeffs = &mass_ref_inv * moments / len;
                        d[(2 * row_e + comp, 3 * kt + p)] = coeffs[node_a];
                    }
                }
            }
        }

        // Null space of D^T: multiplier coefficients orthogonal to all jumps.
        let svd = d.transpose().svd(false, true);
        let v_t = svd.v_t.as_ref().unwrap();
        let smax = svd.singular_values.max();
        let tol = 1e-10 * smax.max(1.0);
        for r in 0..v_t.nrows() {
            let sv = if r < svd.singular_values.len() {
                svd.singular_values[r]
            } else {
                0.0
            };
            if sv > tol {
                continue;
            }
            let c = v_t.row(r);
            // Expand the dual-basis coefficients into Lagrange DOFs.
            let mut entries: std::collections::BTreeMap<usize, f64> =
                std::collections::BTreeMap::new();
            for (row_e, &e) in edges_at.iter().enumerate() {
                let ie = space.interior_index[e].expect("interior edge");
                let node_a = if mesh.edges[e][0] == a { 0 } else { nt - 1 };
                let len_e = {
                    let (t0, _) = mesh.triangles_of_edge[e];
                    let j0 = mesh.edge_of_triangle[t0]
                        .iter()
                        .position(|&x| x == e)
                        .unwrap();
                    mesh.geometry(t0).edge_length(j0)
                };
                let mut delta = DVector::<f64>::zeros(nt);
                delta[node_a] = 1.0;
                let w = &mass_ref_inv * delta / len_e;
                for comp in 0..2 {
                    let cf = c[2 * row_e + comp];
                    if cf == 0.0 {
                        continue;
                    }
                    for b in 0..nt {
                        let dof = space.dof(ie, b, comp);
                        *entries.entry(dof).or_insert(0.0) += cf * w[b];
                    }
                }
            }
            let (idx, val): (Vec<usize>, Vec<f64>) = entries.into_iter().unzip();
            let vec = SparseVec { idx, val };
            if vec.norm() > 1e-12 {
                kernel.push(vec);
            }
        }
    }

    // Orthonormalize; vectors at distinct vertices usually have disjoint
    // support, so this is cheap.
    let mut ortho: Vec<SparseVec> = Vec::new();
    for mut v in kernel {
        for _ in 0..2 {
            for u in &ortho {
                let c = v.dot_sparse(u);
                if c != 0.0 {
                    v = v.add_scaled(-c, u);
                }
            }
        }
        let n = v.norm();
        if n > 1e-10 {
            v.scale(1.0 / n);
            ortho.push(v);
        }
    }
    Ok(ortho)
}

/// L2 norm of the inter-element jump of the normal stress over all interior
/// edges; vanishes (to solver tolerance) for recovered solutions.
pub fn stress_jump_norm(
    mesh: &TriMesh,
    cond: &CondensationSet,
    fields: &crate::localcond::FieldSolution,
) -> f64 {
    let bases = &cond.bases;
    let nq = bases.edge_rule.points.len();
    let mut total = 0.0;
    for e in 0..mesh.n_edges() {
        if mesh.boundary_edge[e] {
            continue;
        }
        let (t0, t1) = mesh.triangles_of_edge[e];
        let t1 = t1.expect("interior edge");
        let mut jump = vec![[0.0f64; 2]; nq];
        for &t in &[t0, t1] {
            let j = mesh.edge_of_triangle[t].iter().position(|&x| x == e).unwrap();
            let fwd = mesh.edge_forward(t)[j] as usize;
            let geom = mesh.geometry(t);
            let nu = geom.edge_normal(j);
            let sev = &bases.stress_edge_vals[j][fwd];
            let coeffs = &fields.stress[t];
            for q in 0..nq {
                let mut tau = crate::material::SymMat2::ZERO;
                for a in 0..bases.stress.scalar.dim() {
                    let v = sev[(q, a)];
                    tau.xx += v * coeffs[3 * a];
                    tau.yy += v * coeffs[3 * a + 1];
                    tau.xy += v * 0.5 * coeffs[3 * a + 2];
                }
                let tn = tau.mul_vec(nu);
                jump[q][0] += tn[0];
                jump[q][1] += tn[1];
            }
        }
        let (et0, _) = mesh.triangles_of_edge[e];
        let j0 = mesh.edge_of_triangle[et0].iter().position(|&x| x == e).unwrap();
        let len = mesh.geometry(et0).edge_length(j0);
        for (q, w) in bases.edge_rule.weights.iter().enumerate() {
            total += w * len * (jump[q][0] * jump[q][0] + jump[q][1] * jump[q][1]);
        }
    }
    total.sqrt()
}

/// Plain-text export of the assembled operator and right-hand side.
pub fn export_system(op: &SchurOperator, rhs: &RhsVector) -> String {
    let mut out = op.assembled().to_triplet_text();
    out.push_str(&crate::sparse::vector_text(&rhs.values));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::localcond::{gather_local, trace_on_element};
    use crate::material::MaterialParams;
    use crate::mesh::TriMesh;
    use approx::assert_relative_eq;

    fn rng_vec(n: usize, seed: u64) -> Vec<f64> {
        let mut state = seed;
        (0..n)
            .map(|_| {
                state = state
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
            })
            .collect()
    }

    #[test]
    fn dof_counts() {
        let mat = MaterialParams::new(0.5, 1.0).unwrap();
        let mesh = TriMesh::unit_square_uniform(1).unwrap();
        let space = MultiplierSpace::build(&mesh, 2).unwrap();
        assert_eq!(space.total_dofs, 8);
        let _ = mat;

        let mesh = TriMesh::unit_square_crisscross(1).unwrap();
        let space = MultiplierSpace::build(&mesh, 2).unwrap();
        assert_eq!(space.total_dofs, 32);

        let mesh = TriMesh::unit_square_uniform(4).unwrap();
        let space = MultiplierSpace::build(&mesh, 2).unwrap();
        // Euler count: E = V + T - 1, boundary edges 4n.
        let interior = (25 + 32 - 1) - 16;
        assert_eq!(space.total_dofs, 2 * 4 * interior);
        assert_eq!(space.interior_edges.len(), interior);
    }

    #[test]
    fn blocks_cover_all_dofs() {
        let mesh = TriMesh::unit_square_crisscross(2).unwrap();
        let space = MultiplierSpace::build(&mesh, 1).unwrap();
        for blocks in [&space.edge_blocks, &space.element_blocks, &space.vertex_patches] {
            let mut seen = vec![false; space.total_dofs];
            for b in blocks {
                for &d in b {
                    assert!(d < space.total_dofs);
                    seen[d] = true;
                }
            }
            assert!(seen.iter().all(|&s| s), "a decomposition leaves DOFs uncovered");
        }
    }

    #[test]
    fn matrix_free_equals_assembled() {
        let mesh = TriMesh::unit_square_crisscross(2).unwrap();
        let mat = MaterialParams::new(0.5, 1e3).unwrap();
        let cond = CondensationSet::build(&mesh, 1, mat, None).unwrap();
        let space = MultiplierSpace::build(&mesh, 1).unwrap();
        let op = SchurOperator::build(&mesh, &space, &cond).unwrap();
        for seed in [1u64, 2, 3] {
            let x = rng_vec(op.n, seed);
            let y0 = op.apply_matrix_free(&x);
            let y1 = op.assembled().mul_vec(&x);
            let scale = y0.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
            for (a, b) in y0.iter().zip(&y1) {
                assert!((a - b).abs() <= 1e-13 * scale);
            }
        }
    }

    #[test]
    fn quadratic_form_matches_elementwise_energy() {
        let mesh = TriMesh::unit_square_uniform(2).unwrap();
        let mat = MaterialParams::new(0.5, 1.0).unwrap();
        let cond = CondensationSet::build(&mesh, 2, mat, None).unwrap();
        let space = MultiplierSpace::build(&mesh, 2).unwrap();
        let op = SchurOperator::build(&mesh, &space, &cond).unwrap();
        let x = rng_vec(op.n, 42);
        let sx = op.apply(&x);
        let quad: f64 = sx.iter().zip(&x).map(|(a, b)| a * b).sum();
        // Recompute as the sum of element energies of the local solves.
        let mut energy = 0.0;
        for t in 0..mesh.n_triangles() {
            let lam = gather_local(&mesh, &space, t, &x);
            let (s, _) = cond.elems[t].solve_lambda(&lam);
            energy += (&cond.elems[t].a * &s).dot(&s);
        }
        assert_relative_eq!(quad, energy, max_relative = 1e-10);
        assert!(quad >= 0.0);
    }

    #[test]
    fn single_interior_edge_operator_is_spd() {
        let mesh = TriMesh::unit_square_uniform(1).unwrap();
        let mat = MaterialParams::new(0.5, 1.0).unwrap();
        let cond = CondensationSet::build(&mesh, 2, mat, None).unwrap();
        let space = MultiplierSpace::build(&mesh, 2).unwrap();
        let op = SchurOperator::build(&mesh, &space, &cond).unwrap();
        assert_eq!(op.n, 8);
        assert!(op.kernel.is_empty());
        let dense = op.assembled().to_dense();
        let eig = dense.symmetric_eigen();
        assert!(eig.eigenvalues.min() > 0.0, "min eigenvalue {}", eig.eigenvalues.min());
    }

    #[test]
    fn symmetry_and_psd_on_random_vectors() {
        let mesh = TriMesh::unit_square_crisscross(2).unwrap();
        let mat = MaterialParams::from_poisson(0.5, 0.4999).unwrap();
        let cond = CondensationSet::build(&mesh, 2, mat, None).unwrap();
        let space = MultiplierSpace::build(&mesh, 2).unwrap();
        let op = SchurOperator::build(&mesh, &space, &cond).unwrap();
        assert!(op.assembled().asymmetry() <= 1e-12 * scale_of(op.assembled()));
        for seed in 0..200u64 {
            let x = rng_vec(op.n, seed + 7);
            let sx = op.apply(&x);
            let quad: f64 = sx.iter().zip(&x).map(|(a, b)| a * b).sum();
            let nrm: f64 = x.iter().map(|v| v * v).sum();
            assert!(quad >= -1e-12 * nrm, "not PSD: {quad}");
        }
    }

    fn scale_of(m: &CsrMatrix) -> f64 {
        m.values.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300)
    }

    #[test]
    fn kernel_empty_on_uniform_and_macro_grids() {
        let mat = MaterialParams::new(0.5, 1.0).unwrap();
        for mesh in [
            TriMesh::unit_square_uniform(2).unwrap(),
            TriMesh::unit_square_uniform(1).unwrap().hct_refine().unwrap(),
        ] {
            let cond = CondensationSet::build(&mesh, 2, mat, None).unwrap();
            let space = MultiplierSpace::build(&mesh, 2).unwrap();
            let op = SchurOperator::build(&mesh, &space, &cond).unwrap();
            assert!(op.kernel.is_empty());
        }
    }

    #[test]
    fn kernel_on_crisscross_matches_dense_rank() {
        let mat = MaterialParams::new(0.5, 1.0).unwrap();
        for (k, n) in [(1usize, 1usize), (2, 1), (2, 2)] {
            let mesh = TriMesh::unit_square_crisscross(n).unwrap();
            let cond = CondensationSet::build(&mesh, k, mat, None).unwrap();
            let space = MultiplierSpace::build(&mesh, k).unwrap();
            let op = SchurOperator::build(&mesh, &space, &cond).unwrap();
            assert!(!op.kernel.is_empty(), "k={k}, n={n}: kernel must be nontrivial");

            // Dense rank cross-check.
            let dense = op.assembled().to_dense();
            let eig = dense.symmetric_eigen();
            let emax = eig.eigenvalues.max();
            let nullity =
                eig.eigenvalues.iter().filter(|&&e| e.abs() <= 1e-10 * emax).count();
            assert_eq!(
                op.kernel.len(),
                nullity,
                "k={k}, n={n}: local detection vs dense nullity"
            );

            // The operator annihilates the kernel basis.
            for z in &op.kernel {
                let mut dense_z = vec![0.0; op.n];
                z.axpy_into(1.0, &mut dense_z);
                let sz = op.apply(&dense_z);
                let m = sz.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                assert!(m <= 1e-10 * emax, "kernel residual {m}");
            }

            // Orthonormality.
            for (i, zi) in op.kernel.iter().enumerate() {
                for (j, zj) in op.kernel.iter().enumerate() {
                    let d = zi.dot_sparse(zj);
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((d - expect).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn perturbing_center_node_removes_kernel() {
        let mat = MaterialParams::new(0.5, 1.0).unwrap();
        let mut mesh = TriMesh::unit_square_crisscross(1).unwrap();
        mesh.nodes[4] = [0.51, 0.5];
        let mesh = TriMesh::from_parts(mesh.nodes.clone(), mesh.triangles.clone()).unwrap();
        let report = mesh.singularity_report(crate::mesh::DEFAULT_KAPPA0);
        assert!(report.singular_vertices.is_empty());
        let cond = CondensationSet::build(&mesh, 2, mat, None).unwrap();
        let space = MultiplierSpace::build(&mesh, 2).unwrap();
        let op = SchurOperator::build(&mesh, &space, &cond).unwrap();
        assert!(op.kernel.is_empty());
        let dense = op.assembled().to_dense();
        let eig = dense.symmetric_eigen();
        assert!(eig.eigenvalues.min() > 0.0);
    }

    #[test]
    fn rhs_is_zero_for_zero_load_and_matches_dual_identity() {
        let mesh = TriMesh::unit_square_crisscross(1).unwrap();
        let mat = MaterialParams::new(0.5, 1.0).unwrap();
        let cond0 = CondensationSet::build(&mesh, 1, mat, None).unwrap();
        let space = MultiplierSpace::build(&mesh, 1).unwrap();
        let b0 = assemble_rhs(&mesh, &space, &cond0);
        assert!(b0.values.iter().all(|&v| v == 0.0));

        // b[m] = -(f, u_m) where u_m is the displacement of the local solve
        // driven by the m-th multiplier basis function.
        let f = |p: [f64; 2]| [p[0] + 0.3, p[1] * p[0] - 1.0];
        let cond = CondensationSet::build(&mesh, 1, mat, Some(&f)).unwrap();
        let b = assemble_rhs(&mesh, &space, &cond);
        for m in 0..space.total_dofs {
            let mut em = vec![0.0; space.total_dofs];
            em[m] = 1.0;
            let mut expect = 0.0;
            for t in 0..mesh.n_triangles() {
                let lam = gather_local(&mesh, &space, t, &em);
                if lam.amax() == 0.0 {
                    continue;
                }
                let (_, u_m) = cond.elems[t].solve_lambda(&lam);
                let geom = mesh.geometry(t);
                let fv = crate::elements::local::load_vector(&cond.bases, &geom, &f);
                expect -= fv.dot(&u_m);
            }
            assert_relative_eq!(b.values[m], expect, epsilon = 1e-12, max_relative = 1e-9);
        }
    }

    #[test]
    fn rhs_is_consistent_on_singular_grids() {
        let mesh = TriMesh::unit_square_crisscross(2).unwrap();
        let mat = MaterialParams::new(0.5, 1.0).unwrap();
        let exact = crate::app::manufactured::ManufacturedSolution::new(mat);
        let f = move |p: [f64; 2]| exact.load(p);
        let cond = CondensationSet::build(&mesh, 2, mat, Some(&f)).unwrap();
        let space = MultiplierSpace::build(&mesh, 2).unwrap();
        let op = SchurOperator::build(&mesh, &space, &cond).unwrap();
        let b = assemble_rhs(&mesh, &space, &cond);
        let res = b.kernel_residual(&op.kernel);
        let scale = b.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(res <= 1e-10 * scale.max(1.0), "kernel residual {res}");
    }

    #[test]
    fn jump_vanishes_for_continuous_normal_stress() {
        // Piecewise fields from a single global rigid motion trace have
        // sigma = 0; a constant-stress configuration has zero jump.
        let mesh = TriMesh::unit_square_uniform(2).unwrap();
        let mat = MaterialParams::new(0.5, 1.0).unwrap();
        let cond = CondensationSet::build(&mesh, 1, mat, None).unwrap();
        let w = |p: [f64; 2]| [p[0], 0.0];
        let mut stress = Vec::new();
        let mut displacement = Vec::new();
        for t in 0..mesh.n_triangles() {
            let lam = trace_on_element(&mesh, &cond.bases, t, &w);
            let (s, u) = cond.elems[t].solve_lambda(&lam);
            stress.push(s);
            displacement.push(u);
        }
        let fields = crate::localcond::FieldSolution { k: 1, stress, displacement };
        let jn = stress_jump_norm(&mesh, &cond, &fields);
        assert!(jn < 1e-10, "jump of a globally smooth stress: {jn}");
    }

    #[test]
    fn export_contains_matrix_and_vector() {
        let mesh = TriMesh::unit_square_uniform(1).unwrap();
        let mat = MaterialParams::new(0.5, 1.0).unwrap();
        let cond = CondensationSet::build(&mesh, 0, mat, None).unwrap();
        let space = MultiplierSpace::build(&mesh, 0).unwrap();
        let op = SchurOperator::build(&mesh, &space, &cond).unwrap();
        let rhs = assemble_rhs(&mesh, &space, &cond);
        let text = export_system(&op, &rhs);
        assert!(text.starts_with(&format!("sparse {} {} ", op.n, op.n)));
        assert!(text.contains(&format!("vector {}", op.n)));
    }
}

//! Intergrid transfer from the coarse quadratic space to the fine quadratic
//! space and onwards to the multiplier space.
//!
//! The quadratic-to-quadratic transfer keeps the values on coarse element
//! edges (the coarse function is evaluated at every fine node lying on a
//! coarse edge) and fills the interior fine nodes of each macro element by
//! discrete harmonic extension with respect to the fine-level elastic form.
//! The multiplier stage projects the resulting edge traces onto the
//! per-edge polynomial space in L2; for multiplier degree at least two this
//! projection is plain interpolation.

use super::coarse::P2Space;
use crate::elements::{coarse_p2_matrices, ElementBases};
use crate::material::MaterialParams;
use crate::mesh::{RefinementMap, TriMesh};
use crate::schur::MultiplierSpace;
use crate::sparse::CsrMatrix;
use crate::{Error, Result};
use nalgebra::DMatrix;
use std::collections::BTreeMap;

/// Sparse row over full coarse vector DOFs (`2 * scalar_node + component`).
pub type NodeRow = Vec<(usize, f64)>;

/// For every full fine vector DOF, its expansion in full coarse vector DOFs.
///
/// Fine scalar nodes are vertices (`id < n_nodes`) then edge midpoints
/// (`n_nodes + edge`). Rows of fine nodes on coarse edges are coarse-function
/// evaluations; rows of macro-interior nodes are harmonic extensions.
pub fn fine_node_rows(
    coarse: &TriMesh,
    fine: &TriMesh,
    map: &RefinementMap,
    material: &MaterialParams,
) -> Result<Vec<Option<NodeRow>>> {
    if map.children.len() != coarse.n_triangles() || 4 * coarse.n_triangles() != fine.n_triangles()
    {
        return Err(Error::DofMismatch(
            "refinement lineage does not match the coarse/fine mesh pair".into(),
        ));
    }
    let vf = fine.n_nodes();
    let vh = coarse.n_nodes();
    let n_fine_scalar = vf + fine.n_edges();
    let mut rows: Vec<Option<NodeRow>> = vec![None; 2 * n_fine_scalar];

    let node_pos = |id: usize| -> [f64; 2] {
        if id < vf {
            fine.nodes[id]
        } else {
            let e = fine.edges[id - vf];
            [
                0.5 * (fine.nodes[e[0]][0] + fine.nodes[e[1]][0]),
                0.5 * (fine.nodes[e[0]][1] + fine.nodes[e[1]][1]),
            ]
        }
    };

    for kh in 0..coarse.n_triangles() {
        let children = map.children[kh];
        let geom_h = coarse.geometry(kh);
        let tri_h = coarse.triangles[kh];
        let ed_h = coarse.edge_of_triangle[kh];
        let coarse_nodes: [usize; 6] =
            [tri_h[0], tri_h[1], tri_h[2], vh + ed_h[0], vh + ed_h[1], vh + ed_h[2]];

        // All fine scalar nodes of the macro, deduplicated and sorted.
        let mut macro_nodes: Vec<usize> = Vec::with_capacity(15);
        for &ct in &children {
            let tri = fine.triangles[ct];
            let ed = fine.edge_of_triangle[ct];
            macro_nodes.extend_from_slice(&[tri[0], tri[1], tri[2]]);
            macro_nodes.extend(ed.iter().map(|&e| vf + e));
        }
        macro_nodes.sort_unstable();
        macro_nodes.dedup();

        let interior: Vec<usize> =
            fine.edge_of_triangle[children[3]].iter().map(|&e| vf + e).collect();

        // Evaluation rows for the macro boundary nodes.
        for &id in &macro_nodes {
            if interior.contains(&id) || rows[2 * id].is_some() {
                continue;
            }
            let rc = geom_h.ref_coords(node_pos(id));
            let l = [1.0 - rc[0] - rc[1], rc[0], rc[1]];
            let shapes = [
                l[0] * (2.0 * l[0] - 1.0),
                l[1] * (2.0 * l[1] - 1.0),
                l[2] * (2.0 * l[2] - 1.0),
                4.0 * l[0] * l[1],
                4.0 * l[1] * l[2],
                4.0 * l[2] * l[0],
            ];
            for c in 0..2 {
                let mut row = Vec::new();
                for (n, &cn) in coarse_nodes.iter().enumerate() {
                    if shapes[n].abs() > 1e-13 {
                        row.push((2 * cn + c, shapes[n]));
                    }
                }
                rows[2 * id + c] = Some(row);
            }
        }

        // Harmonic extension for the three interior nodes.
        let loc: BTreeMap<usize, usize> =
            macro_nodes.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        let nn = macro_nodes.len();
        let mut macro_a = DMatrix::<f64>::zeros(2 * nn, 2 * nn);
        for &ct in &children {
            let geom = fine.geometry(ct);
            let local = coarse_p2_matrices(&geom, material);
            let tri = fine.triangles[ct];
            let ed = fine.edge_of_triangle[ct];
            let elem_nodes =
                [tri[0], tri[1], tri[2], vf + ed[0], vf + ed[1], vf + ed[2]];
            for (r, &nr) in elem_nodes.iter().enumerate() {
                let lr = loc[&nr];
                for (s, &ns) in elem_nodes.iter().enumerate() {
                    let ls = loc[&ns];
                    for cr in 0..2 {
                        for cs in 0..2 {
                            macro_a[(2 * lr + cr, 2 * ls + cs)] +=
                                local[(2 * r + cr, 2 * s + cs)];
                        }
                    }
                }
            }
        }
        let int_dofs: Vec<usize> = interior
            .iter()
            .flat_map(|&id| {
                let li = loc[&id];
                [2 * li, 2 * li + 1]
            })
            .collect();
        let bnd_dofs: Vec<usize> =
            (0..2 * nn).filter(|d| !int_dofs.contains(d)).collect();
        let a_ii = DMatrix::from_fn(int_dofs.len(), int_dofs.len(), |i, j| {
            macro_a[(int_dofs[i], int_dofs[j])]
        });
        let a_ib = DMatrix::from_fn(int_dofs.len(), bnd_dofs.len(), |i, j| {
            macro_a[(int_dofs[i], bnd_dofs[j])]
        });
        let w = a_ii
            .lu()
            .solve(&(-a_ib))
            .ok_or_else(|| Error::Factorization("macro interior block singular".into()))?;

        for (ii, &int_dof) in int_dofs.iter().enumerate() {
            let lid = macro_nodes[int_dof / 2];
            let comp = int_dof % 2;
            let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
            for (bb, &bnd_dof) in bnd_dofs.iter().enumerate() {
                let coef = w[(ii, bb)];
                if coef.abs() < 1e-14 {
                    continue;
                }
                let bid = macro_nodes[bnd_dof / 2];
                let bcomp = bnd_dof % 2;
                if let Some(row) = &rows[2 * bid + bcomp] {
                    for &(cd, v) in row {
                        *acc.entry(cd).or_insert(0.0) += coef * v;
                    }
                }
            }
            let row: NodeRow =
                acc.into_iter().filter(|(_, v)| v.abs() > 1e-14).collect();
            rows[2 * lid + comp] = Some(row);
        }
    }
    Ok(rows)
}

/// Apply precomputed node rows to a full coarse vector; test and diagnostic
/// path.
pub fn apply_node_rows(rows: &[Option<NodeRow>], coarse_full: &[f64]) -> Vec<f64> {
    rows.iter()
        .map(|r| {
            r.as_ref()
                .map(|row| row.iter().map(|&(c, v)| v * coarse_full[c]).sum())
                .unwrap_or(0.0)
        })
        .collect()
}

/// Prolongation between the free quadratic spaces of a refined mesh pair.
pub fn p2_prolongation(
    coarse: &TriMesh,
    fine: &TriMesh,
    map: &RefinementMap,
    coarse_space: &P2Space,
    fine_space: &P2Space,
    material: &MaterialParams,
) -> Result<CsrMatrix> {
    let rows = fine_node_rows(coarse, fine, map, material)?;
    let mut triplets = Vec::new();
    for (gf, &full_f) in fine_space.full_of_free.iter().enumerate() {
        if let Some(row) = &rows[full_f] {
            for &(full_c, v) in row {
                if let Some(gc) = coarse_space.free_of_full[full_c] {
                    triplets.push((gf, gc, v));
                }
            }
        }
    }
    Ok(CsrMatrix::from_triplets(fine_space.n_free, coarse_space.n_free, triplets))
}

/// L2 projection of a quadratic edge trace (values at the two endpoints and
/// the midpoint) onto the multiplier nodes of one edge. Rows are multiplier
/// nodes, columns the three quadratic values; the matrix is the same for
/// every straight edge.
pub fn edge_projection_matrix(bases: &ElementBases) -> DMatrix<f64> {
    let nt = bases.trace.scalar.dim();
    let mut mass = DMatrix::<f64>::zeros(nt, nt);
    let mut moments = DMatrix::<f64>::zeros(nt, 3);
    for (q, &t) in bases.edge_rule.points.iter().enumerate() {
        let w = bases.edge_rule.weights[q];
        let quad = [
            (1.0 - t) * (1.0 - 2.0 * t),
            4.0 * t * (1.0 - t),
            t * (2.0 * t - 1.0),
        ];
        for i in 0..nt {
            let ti = bases.trace_vals[(q, i)];
            for j in 0..nt {
                mass[(i, j)] += w * ti * bases.trace_vals[(q, j)];
            }
            for n in 0..3 {
                moments[(i, n)] += w * ti * quad[n];
            }
        }
    }
    mass.lu().solve(&moments).expect("edge mass matrix is SPD")
}

/// The transfer from the coarse quadratic space to the fine multiplier
/// space: harmonic-extension prolongation composed with per-edge L2
/// projection. Returned as an explicit sparse matrix so that the transpose
/// application is a plain transposed product.
pub fn multiplier_intergrid(
    coarse: &TriMesh,
    fine: &TriMesh,
    map: &RefinementMap,
    coarse_space: &P2Space,
    m_space: &MultiplierSpace,
    bases: &ElementBases,
    material: &MaterialParams,
) -> Result<CsrMatrix> {
    let rows = fine_node_rows(coarse, fine, map, material)?;
    let proj = edge_projection_matrix(bases);
    let nt = bases.trace.scalar.dim();
    let vf = fine.n_nodes();
    let npe = m_space.dofs_per_edge;
    let mut triplets = Vec::new();
    for (ie, &e) in m_space.interior_edges.iter().enumerate() {
        let [lo, hi] = fine.edges[e];
        let trace_nodes = [lo, vf + e, hi];
        for m in 0..nt {
            for c in 0..2 {
                let dof = ie * npe + 2 * m + c;
                let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
                for (n, &tn) in trace_nodes.iter().enumerate() {
                    let coef = proj[(m, n)];
                    if coef.abs() < 1e-14 {
                        continue;
                    }
                    if let Some(row) = &rows[2 * tn + c] {
                        for &(cd, v) in row {
                            *acc.entry(cd).or_insert(0.0) += coef * v;
                        }
                    }
                }
                for (full_c, v) in acc {
                    if v.abs() < 1e-14 {
                        continue;
                    }
                    if let Some(gc) = coarse_space.free_of_full[full_c] {
                        triplets.push((dof, gc, v));
                    }
                }
            }
        }
    }
    Ok(CsrMatrix::from_triplets(m_space.total_dofs, coarse_space.n_free, triplets))
}

//! Per-element matrix blocks of the hybridized mixed method and the local
//! stiffness of the quadratic primal (coarse) space.

use super::basis::{DisplacementBasis, StressBasis, TraceBasis, SYM_GENERATORS};
use super::quadrature::{EdgeRule, QuadratureRule};
use crate::material::{MaterialParams, SymMat2};
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Reference coordinates of the triangle vertices.
pub const REF_VERTICES: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

/// Affine geometry of a physical triangle with positive orientation.
#[derive(Clone, Debug)]
pub struct ElementGeometry {
    pub vertices: [[f64; 2]; 3],
    /// Jacobian columns are `v1 - v0` and `v2 - v0`.
    pub jac: [[f64; 2]; 2],
    /// det(jac) = twice the signed area; positive by construction.
    pub det: f64,
    pub area: f64,
    inv_jac_t: [[f64; 2]; 2],
}

impl ElementGeometry {
    pub fn new(index: usize, vertices: [[f64; 2]; 3]) -> Result<Self> {
        let [v0, v1, v2] = vertices;
        let jac = [[v1[0] - v0[0], v2[0] - v0[0]], [v1[1] - v0[1], v2[1] - v0[1]]];
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        let scale = jac[0][0].abs() + jac[0][1].abs() + jac[1][0].abs() + jac[1][1].abs();
        if !(det > 1e-14 * scale * scale) {
            return Err(Error::DegenerateElement { index, doubled_area: det });
        }
        let inv_jac_t = [
            [jac[1][1] / det, -jac[1][0] / det],
            [-jac[0][1] / det, jac[0][0] / det],
        ];
        Ok(ElementGeometry { vertices, jac, det, area: 0.5 * det, inv_jac_t })
    }

    /// Map a reference point to physical coordinates.
    pub fn map(&self, p: [f64; 2]) -> [f64; 2] {
        let v0 = self.vertices[0];
        [
            v0[0] + self.jac[0][0] * p[0] + self.jac[0][1] * p[1],
            v0[1] + self.jac[1][0] * p[0] + self.jac[1][1] * p[1],
        ]
    }

    /// Reference coordinates of a physical point (inverse affine map).
    pub fn ref_coords(&self, p: [f64; 2]) -> [f64; 2] {
        let v0 = self.vertices[0];
        let d = [p[0] - v0[0], p[1] - v0[1]];
        [
            (self.jac[1][1] * d[0] - self.jac[0][1] * d[1]) / self.det,
            (-self.jac[1][0] * d[0] + self.jac[0][0] * d[1]) / self.det,
        ]
    }

    /// Push a reference gradient to the physical element.
    pub fn phys_grad(&self, g: [f64; 2]) -> [f64; 2] {
        [
            self.inv_jac_t[0][0] * g[0] + self.inv_jac_t[0][1] * g[1],
            self.inv_jac_t[1][0] * g[0] + self.inv_jac_t[1][1] * g[1],
        ]
    }

    /// Length of local edge `j` (connecting local vertices `j` and `j+1`).
    pub fn edge_length(&self, j: usize) -> f64 {
        let a = self.vertices[j];
        let b = self.vertices[(j + 1) % 3];
        ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt()
    }

    /// Outward unit normal of local edge `j`.
    pub fn edge_normal(&self, j: usize) -> [f64; 2] {
        let a = self.vertices[j];
        let b = self.vertices[(j + 1) % 3];
        let d = [b[0] - a[0], b[1] - a[1]];
        let len = (d[0] * d[0] + d[1] * d[1]).sqrt();
        // Positive orientation puts the interior on the left of the walk.
        [d[1] / len, -d[0] / len]
    }
}

/// Shared reference-element data for a fixed degree `k`: bases, quadrature,
/// and tabulated basis values at the quadrature points.
pub struct ElementBases {
    pub k: usize,
    pub stress: StressBasis,
    pub displacement: DisplacementBasis,
    pub trace: TraceBasis,
    pub tri_rule: QuadratureRule,
    pub edge_rule: EdgeRule,
    /// Stress scalar values at triangle quadrature points, `nq x ns`.
    pub stress_vals: DMatrix<f64>,
    /// Reference gradients of the stress scalars, per point.
    pub stress_grads: Vec<Vec<[f64; 2]>>,
    /// Displacement scalar values at triangle quadrature points, `nq x nd`.
    pub disp_vals: DMatrix<f64>,
    /// Trace scalar values at the edge quadrature points, `ne x (k+2)`.
    pub trace_vals: DMatrix<f64>,
    /// Stress scalar values along local edge `j` with orientation `forward`,
    /// indexed `[j][forward as usize]`, each `ne x ns`.
    pub stress_edge_vals: [[DMatrix<f64>; 2]; 3],
}

impl ElementBases {
    /// Rules exact to degree `2(k+1)+2`, sufficient for every block below.
    pub fn new(k: usize) -> Result<Self> {
        Self::with_rule_degrees(k, 2 * (k + 1) + 2, 2 * (k + 1) + 2)
    }

    pub fn with_rule_degrees(k: usize, tri_degree: usize, edge_degree: usize) -> Result<Self> {
        let stress = StressBasis::new(k)?;
        let displacement = DisplacementBasis::new(k)?;
        let trace = TraceBasis::new(k)?;
        let tri_rule = QuadratureRule::with_exactness(tri_degree);
        let edge_rule = EdgeRule::with_exactness(edge_degree);

        let nq = tri_rule.points.len();
        let ns = stress.scalar.dim();
        let nd = displacement.scalar.dim();
        let mut stress_vals = DMatrix::zeros(nq, ns);
        let mut disp_vals = DMatrix::zeros(nq, nd);
        let mut stress_grads = Vec::with_capacity(nq);
        for (q, p) in tri_rule.points.iter().enumerate() {
            let sv = stress.scalar.eval(*p);
            let dv = displacement.scalar.eval(*p);
            stress_vals.row_mut(q).copy_from(&sv.transpose());
            disp_vals.row_mut(q).copy_from(&dv.transpose());
            stress_grads.push(stress.scalar.grad(*p));
        }

        let ne = edge_rule.points.len();
        let nt = trace.scalar.dim();
        let mut trace_vals = DMatrix::zeros(ne, nt);
        for (q, t) in edge_rule.points.iter().enumerate() {
            trace_vals.row_mut(q).copy_from(&trace.scalar.eval(*t).transpose());
        }

        let edge_point = |j: usize, t: f64| -> [f64; 2] {
            let a = REF_VERTICES[j];
            let b = REF_VERTICES[(j + 1) % 3];
            [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
        };
        let mut stress_edge_vals: [[DMatrix<f64>; 2]; 3] = std::array::from_fn(|_| {
            std::array::from_fn(|_| DMatrix::zeros(ne, ns))
        });
        for j in 0..3 {
            for fwd in 0..2 {
                for (q, &t) in edge_rule.points.iter().enumerate() {
                    // `t` is the arclength parameter along the global edge
                    // direction; flip it when the local walk runs against it.
                    let t_loc = if fwd == 1 { t } else { 1.0 - t };
                    let vals = stress.scalar.eval(edge_point(j, t_loc));
                    stress_edge_vals[j][fwd].row_mut(q).copy_from(&vals.transpose());
                }
            }
        }

        Ok(ElementBases {
            k,
            stress,
            displacement,
            trace,
            tri_rule,
            edge_rule,
            stress_vals,
            stress_grads,
            disp_vals,
            trace_vals,
            stress_edge_vals,
        })
    }

    /// Trace degrees of freedom per edge, `2 (k+2)`.
    pub fn dofs_per_edge(&self) -> usize {
        self.trace.dim()
    }
}

/// Matrix blocks of one element:
/// - `a`: compliance Gram matrix of the stress basis (SPD),
/// - `b`: divergence pairing, displacement rows by stress columns,
/// - `c`: boundary trace pairing, one row block of `2(k+2)` per local edge
///   (trace nodes ordered along the global edge direction), stress columns,
/// - `m_v`: displacement mass matrix.
pub struct ElementMatrices {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub m_v: DMatrix<f64>,
}

/// Gram matrix of the symmetric generators under the compliance pairing,
/// or under the plain Frobenius pairing when no material is given.
fn generator_gram(material: Option<&MaterialParams>) -> [[f64; 3]; 3] {
    let mut g = [[0.0; 3]; 3];
    for p in 0..3 {
        let ap = match material {
            Some(m) => m.compliance(&SYM_GENERATORS[p]),
            None => SYM_GENERATORS[p],
        };
        for q in 0..3 {
            g[p][q] = ap.dot(&SYM_GENERATORS[q]);
        }
    }
    g
}

/// Assemble the element blocks.
///
/// `edge_forward[j]` states whether the local walk `j -> j+1` agrees with the
/// global orientation of that edge (from the endpoint of lower global vertex
/// index to the higher); both elements sharing an edge then integrate the
/// same trace functions.
pub fn local_matrices(
    bases: &ElementBases,
    geom: &ElementGeometry,
    material: Option<&MaterialParams>,
    edge_forward: [bool; 3],
) -> ElementMatrices {
    let ns1 = bases.stress.scalar.dim();
    let nd1 = bases.displacement.scalar.dim();
    let nsig = bases.stress.dim();
    let nv = bases.displacement.dim();
    let npe = bases.dofs_per_edge();
    let gen_gram = generator_gram(material);

    // Scalar building blocks on the physical element.
    let mut mass_s = DMatrix::<f64>::zeros(ns1, ns1); // stress scalar mass
    let mut mass_d = DMatrix::<f64>::zeros(nd1, nd1); // displacement scalar mass
    // grad_pair[d][b][a] = integral of (disp scalar b) * d(stress scalar a)/dx_d
    let mut grad_pair = [DMatrix::<f64>::zeros(nd1, ns1), DMatrix::<f64>::zeros(nd1, ns1)];
    for (q, w) in bases.tri_rule.weights.iter().enumerate() {
        let wq = w * geom.det;
        let sv = bases.stress_vals.row(q);
        let dv = bases.disp_vals.row(q);
        for a in 0..ns1 {
            let sa = sv[a] * wq;
            for a2 in 0..ns1 {
                mass_s[(a, a2)] += sa * sv[a2];
            }
        }
        for b in 0..nd1 {
            let db = dv[b] * wq;
            for b2 in 0..nd1 {
                mass_d[(b, b2)] += db * dv[b2];
            }
            for a in 0..ns1 {
                let g = geom.phys_grad(bases.stress_grads[q][a]);
                grad_pair[0][(b, a)] += db * g[0];
                grad_pair[1][(b, a)] += db * g[1];
            }
        }
    }

    let mut a_mat = DMatrix::<f64>::zeros(nsig, nsig);
    for i in 0..nsig {
        let (ai, pi) = bases.stress.split(i);
        for j in 0..nsig {
            let (aj, pj) = bases.stress.split(j);
            a_mat[(i, j)] = gen_gram[pj][pi] * mass_s[(ai, aj)];
        }
    }

    let mut b_mat = DMatrix::<f64>::zeros(nv, nsig);
    for r in 0..nv {
        let (br, cr) = bases.displacement.split(r);
        for i in 0..nsig {
            let (ai, pi) = bases.stress.split(i);
            let t = SYM_GENERATORS[pi];
            // (T grad)_c with T symmetric.
            let row = if cr == 0 { [t.xx, t.xy] } else { [t.xy, t.yy] };
            b_mat[(r, i)] =
                row[0] * grad_pair[0][(br, ai)] + row[1] * grad_pair[1][(br, ai)];
        }
    }

    let mut m_v = DMatrix::<f64>::zeros(nv, nv);
    for r in 0..nv {
        let (br, cr) = bases.displacement.split(r);
        for s in 0..nv {
            let (bs, cs) = bases.displacement.split(s);
            if cr == cs {
                m_v[(r, s)] = mass_d[(br, bs)];
            }
        }
    }

    let mut c_mat = DMatrix::<f64>::zeros(3 * npe, nsig);
    let nt = bases.trace.scalar.dim();
    for j in 0..3 {
        let len = geom.edge_length(j);
        let nu = geom.edge_normal(j);
        let sev = &bases.stress_edge_vals[j][edge_forward[j] as usize];
        // pair[t_node][a] = integral over the edge of trace_t * stress scalar a
        let mut pair = DMatrix::<f64>::zeros(nt, ns1);
        for (q, w) in bases.edge_rule.weights.iter().enumerate() {
            let wq = w * len;
            for tn in 0..nt {
                let tv = bases.trace_vals[(q, tn)] * wq;
                for a in 0..ns1 {
                    pair[(tn, a)] += tv * sev[(q, a)];
                }
            }
        }
        for m in 0..npe {
            let (tn, cm) = bases.trace.split(m);
            for i in 0..nsig {
                let (ai, pi) = bases.stress.split(i);
                let tnu = SYM_GENERATORS[pi].mul_vec(nu);
                c_mat[(j * npe + m, i)] = tnu[cm] * pair[(tn, ai)];
            }
        }
    }

    ElementMatrices { a: a_mat, b: b_mat, c: c_mat, m_v }
}

/// Load vector `(f, v)_K` over the displacement basis, integrated with the
/// element quadrature rule.
pub fn load_vector(
    bases: &ElementBases,
    geom: &ElementGeometry,
    f: &dyn Fn([f64; 2]) -> [f64; 2],
) -> DVector<f64> {
    let nv = bases.displacement.dim();
    let mut out = DVector::zeros(nv);
    for (q, w) in bases.tri_rule.weights.iter().enumerate() {
        let wq = w * geom.det;
        let fx = f(geom.map(bases.tri_rule.points[q]));
        let dv = bases.disp_vals.row(q);
        for r in 0..nv {
            let (br, cr) = bases.displacement.split(r);
            out[r] += wq * dv[br] * fx[cr];
        }
    }
    out
}

/// Local stiffness of the vector quadratic space under the primal elastic
/// form: `2 mu (eps(w), eps(v)) + lambda (P0 div w, P0 div v)` with the
/// divergence projected to the element mean. Degrees of freedom are
/// `2*node + component` over the six quadratic nodes (three vertices, then
/// the three edge midpoints in local edge order).
pub fn coarse_p2_matrices(geom: &ElementGeometry, material: &MaterialParams) -> DMatrix<f64> {
    let basis = super::basis::ScalarBasisTri::new(2);
    // Order the quadratic nodes as vertices 0,1,2 then midpoints of local
    // edges 0,1,2 (edge j joins vertices j and j+1).
    let ref_nodes: [[f64; 2]; 6] =
        [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.5, 0.0], [0.5, 0.5], [0.0, 0.5]];
    let perm: Vec<usize> = ref_nodes
        .iter()
        .map(|rn| {
            basis
                .nodes
                .iter()
                .position(|n| (n[0] - rn[0]).abs() < 1e-12 && (n[1] - rn[1]).abs() < 1e-12)
                .expect("quadratic lattice contains vertices and midpoints")
        })
        .collect();

    let rule = QuadratureRule::with_exactness(4);
    let mut stiff = DMatrix::<f64>::zeros(12, 12);
    let mut div_int = DVector::<f64>::zeros(12);
    for (p, w) in rule.points.iter().zip(&rule.weights) {
        let wq = w * geom.det;
        let grads_all = basis.grad(*p);
        let grads: Vec<[f64; 2]> = perm.iter().map(|&i| geom.phys_grad(grads_all[i])).collect();
        let eps = |n: usize, c: usize| -> SymMat2 {
            let g = grads[n];
            if c == 0 {
                SymMat2::new(g[0], 0.0, 0.5 * g[1])
            } else {
                SymMat2::new(0.0, g[1], 0.5 * g[0])
            }
        };
        for r in 0..12 {
            let er = eps(r / 2, r % 2);
            div_int[r] += wq * er.trace();
            for s in 0..12 {
                let es = eps(s / 2, s % 2);
                stiff[(r, s)] += wq * 2.0 * material.mu() * er.dot(&es);
            }
        }
    }
    for r in 0..12 {
        for s in 0..12 {
            stiff[(r, s)] += material.lambda() * div_int[r] * div_int[s] / geom.area;
        }
    }
    stiff
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sample_geom() -> ElementGeometry {
        ElementGeometry::new(0, [[0.1, -0.2], [1.3, 0.2], [0.4, 1.1]]).unwrap()
    }

    #[test]
    fn rejects_degenerate_triangle() {
        let r = ElementGeometry::new(7, [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]);
        assert!(matches!(r, Err(crate::Error::DegenerateElement { index: 7, .. })));
        let r = ElementGeometry::new(3, [[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]]);
        assert!(r.is_err(), "negative orientation must be rejected");
    }

    #[test]
    fn compliance_gram_is_spd() {
        let m = MaterialParams::new(0.5, 1.0).unwrap();
        let bases = ElementBases::new(2).unwrap();
        let geom = sample_geom();
        let lm = local_matrices(&bases, &geom, Some(&m), [true, true, true]);
        let eig = lm.a.clone().symmetric_eigen();
        assert!(eig.eigenvalues.min() > 0.0, "A_K must be positive definite");
        // Symmetry.
        let asym = (&lm.a - lm.a.transpose()).abs().max();
        assert!(asym < 1e-14);
    }

    #[test]
    fn divergence_rows_vanish_on_constant_stress() {
        // div of a constant stress is zero, so every B column belonging to a
        // constant scalar function pairs to zero with constant test functions.
        let bases = ElementBases::new(1).unwrap();
        let geom = sample_geom();
        let lm = local_matrices(&bases, &geom, None, [true, false, true]);
        // Constant stress = sum over the scalar basis for a fixed generator.
        let ns1 = bases.stress.scalar.dim();
        for p in 0..3 {
            for r in 0..bases.displacement.dim() {
                let total: f64 = (0..ns1).map(|a| lm.b[(r, 3 * a + p)]).sum();
                assert_relative_eq!(total, 0.0, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn boundary_pairing_respects_divergence_theorem() {
        // Constant stress I and constant trace e1: the summed C entries give
        // the flux of e1 . (I nu) over the closed element boundary, which is 0.
        let bases = ElementBases::new(2).unwrap();
        let geom = sample_geom();
        let lm = local_matrices(&bases, &geom, None, [true, true, false]);
        let ns1 = bases.stress.scalar.dim();
        let npe = bases.dofs_per_edge();
        for comp in 0..2 {
            let mut flux = 0.0;
            for j in 0..3 {
                for m in 0..npe {
                    if m % 2 != comp {
                        continue;
                    }
                    // identity stress: generators T11 + T22
                    for a in 0..ns1 {
                        flux += lm.c[(j * npe + m, 3 * a)] + lm.c[(j * npe + m, 3 * a + 1)];
                    }
                }
            }
            assert_relative_eq!(flux, 0.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn matrices_are_stable_under_quadrature_refinement() {
        let m = MaterialParams::new(0.5, 1.0).unwrap();
        let k = 2;
        let geom = sample_geom();
        let base = ElementBases::new(k).unwrap();
        let boosted =
            ElementBases::with_rule_degrees(k, 2 * (k + 1) + 4, 2 * (k + 1) + 4).unwrap();
        let lm0 = local_matrices(&base, &geom, Some(&m), [true, true, true]);
        let lm1 = local_matrices(&boosted, &geom, Some(&m), [true, true, true]);
        for (m0, m1) in [(&lm0.a, &lm1.a), (&lm0.b, &lm1.b), (&lm0.c, &lm1.c), (&lm0.m_v, &lm1.m_v)]
        {
            let diff = (m0 - m1).abs().max();
            let scale = m0.abs().max().max(1e-300);
            assert!(diff / scale < 1e-13, "quadrature-dependent block: {}", diff / scale);
        }
    }

    #[test]
    fn divergence_pairing_has_full_rank_and_trace_free_deficiency() {
        // Unisolvence needs B_K of full row rank. Restricting the stress
        // columns to functions with vanishing boundary normal trace drops the
        // rank by exactly the rigid motions for k >= 1.
        for k in 0..=3usize {
            let bases = ElementBases::new(k).unwrap();
            let geom = sample_geom();
            let lm = local_matrices(&bases, &geom, None, [true, true, true]);
            let nv = bases.displacement.dim();
            let svals = lm.b.clone().svd(false, false).singular_values;
            let rank = svals.iter().filter(|&&s| s > 1e-10 * svals.max()).count();
            assert_eq!(rank, nv, "k={k}: B_K must have full row rank");

            // Normal-trace-free columns: null space of the edge evaluations.
            let nsig = bases.stress.dim();
            let npts = k + 3;
            let mut cons = DMatrix::<f64>::zeros(3 * npts * 2, nsig);
            for j in 0..3 {
                let nu = geom.edge_normal(j);
                for l in 0..npts {
                    let t = l as f64 / (npts - 1) as f64;
                    let a = REF_VERTICES[j];
                    let b2 = REF_VERTICES[(j + 1) % 3];
                    let p = [a[0] + t * (b2[0] - a[0]), a[1] + t * (b2[1] - a[1])];
                    let sv = bases.stress.scalar.eval(p);
                    for i in 0..nsig {
                        let (ai, pi) = bases.stress.split(i);
                        let tnu = SYM_GENERATORS[pi].mul_vec(nu);
                        let row = (j * npts + l) * 2;
                        cons[(row, i)] = sv[ai] * tnu[0];
                        cons[(row + 1, i)] = sv[ai] * tnu[1];
                    }
                }
            }
            // Null space of the constraints via the Gram matrix (the thin
            // SVD of a wide matrix does not expose the full null space).
            let gram = cons.transpose() * &cons;
            let eig = gram.symmetric_eigen();
            let tol = 1e-10 * eig.eigenvalues.max().max(1.0);
            let null_cols: Vec<usize> =
                (0..nsig).filter(|&i| eig.eigenvalues[i] <= tol).collect();
            let mut bubble_rank = 0usize;
            if !null_cols.is_empty() {
                let mut bn = DMatrix::<f64>::zeros(nv, null_cols.len());
                for (cidx, &r) in null_cols.iter().enumerate() {
                    let dir = eig.eigenvectors.column(r).into_owned();
                    bn.set_column(cidx, &(&lm.b * dir));
                }
                let sv2 = bn.svd(false, false).singular_values;
                let top = sv2.max();
                if top > 0.0 {
                    bubble_rank = sv2.iter().filter(|&&s| s > 1e-10 * top).count();
                }
            }
            if k >= 1 {
                assert_eq!(bubble_rank, nv - 3, "k={k}: trace-free divergence rank");
            } else {
                assert_eq!(bubble_rank, 0, "k=0 has no trace-free stress functions");
            }
        }
    }

    #[test]
    fn affine_covariance_spot_check() {
        // The displacement mass matrix of a mapped element is the reference
        // one scaled by the area ratio for constant-Jacobian maps.
        let bases = ElementBases::new(1).unwrap();
        let g1 = ElementGeometry::new(0, [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        let g2 = ElementGeometry::new(0, [[2.0, 1.0], [5.0, 1.0], [2.0, 4.0]]).unwrap();
        let m1 = local_matrices(&bases, &g1, None, [true, true, true]);
        let m2 = local_matrices(&bases, &g2, None, [true, true, true]);
        let ratio = g2.area / g1.area;
        let diff = (&m2.m_v - &m1.m_v * ratio).abs().max();
        assert!(diff < 1e-12);
    }

    #[test]
    fn coarse_stiffness_annihilates_rigid_motions() {
        let m = MaterialParams::new(0.5, 1e4).unwrap();
        let geom = sample_geom();
        let a = coarse_p2_matrices(&geom, &m);
        // Nodal values of the rigid motion (1 - y, x + 2) at the six nodes.
        let nodes = [
            geom.vertices[0],
            geom.vertices[1],
            geom.vertices[2],
            mid(geom.vertices[0], geom.vertices[1]),
            mid(geom.vertices[1], geom.vertices[2]),
            mid(geom.vertices[2], geom.vertices[0]),
        ];
        let mut w = DVector::<f64>::zeros(12);
        for (n, p) in nodes.iter().enumerate() {
            w[2 * n] = 1.0 - p[1];
            w[2 * n + 1] = p[0] + 2.0;
        }
        let energy = (&a * &w).dot(&w);
        assert!(energy.abs() < 1e-9 * a.abs().max(), "rigid motion energy {energy}");

        // Translation e1: its row pattern sums to zero.
        let mut t = DVector::<f64>::zeros(12);
        for n in 0..6 {
            t[2 * n] = 1.0;
        }
        let r = (&a * &t).abs().max();
        assert!(r < 1e-10 * a.abs().max());
    }

    #[test]
    fn coarse_stiffness_matches_hand_value_for_linear_field() {
        // w = (x, 0): eps = diag(1, 0), div = 1, so the energy over a triangle
        // of area |K| is 2 mu |K| + lambda |K|.
        let cases = [(0.5, 1.0), (0.5, 1e3)];
        for (mu, la) in cases {
            let m = MaterialParams::new(mu, la).unwrap();
            let geom = sample_geom();
            let a = coarse_p2_matrices(&geom, &m);
            let nodes = [
                geom.vertices[0],
                geom.vertices[1],
                geom.vertices[2],
                mid(geom.vertices[0], geom.vertices[1]),
                mid(geom.vertices[1], geom.vertices[2]),
                mid(geom.vertices[2], geom.vertices[0]),
            ];
            let mut w = DVector::<f64>::zeros(12);
            for (n, p) in nodes.iter().enumerate() {
                w[2 * n] = p[0];
            }
            let energy = (&a * &w).dot(&w);
            let expect = 2.0 * mu * geom.area + la * geom.area;
            assert_relative_eq!(energy, expect, max_relative = 1e-12);
        }
    }

    fn mid(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
        [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
    }
}

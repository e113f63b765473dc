//! Element-local saddle problems and static condensation.
//!
//! For a boundary datum `lambda` on the three element edges, the local
//! problem seeks a stress/displacement pair with
//! `(A sigma, tau) + (u, div tau) = <lambda, tau nu>` for all stresses `tau`
//! and `(div sigma, v) = (f, v)` for all displacements `v`. Splitting off the
//! load part gives the condensed Schur block
//! `S_K = C (saddle)^{-1} C^T` acting on edge data, and the element
//! contribution `-(f, u_mu)` to the condensed right-hand side.
//!
//! All operations here are element-local and immutable after construction,
//! so they can be evaluated concurrently; global scatters happen elsewhere
//! in deterministic element order.

use crate::elements::local::load_vector;
use crate::elements::{local_matrices, ElementBases, ElementGeometry};
use crate::material::{MaterialParams, SymMat2};
use crate::mesh::TriMesh;
use crate::schur::MultiplierSpace;
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector, Dyn, LU};
use rayon::prelude::*;

/// Factorized element-local operator together with its condensed blocks.
pub struct LocalCondensation {
    pub n_stress: usize,
    pub n_disp: usize,
    /// Compliance Gram matrix of the stress basis.
    pub a: DMatrix<f64>,
    /// Divergence pairing, displacement rows by stress columns.
    pub b: DMatrix<f64>,
    /// Trace pairing; `6 (k+2)` rows covering all three edges.
    pub c: DMatrix<f64>,
    /// Condensed Schur block `C (saddle)^{-1} C^T`, symmetric PSD.
    pub s_k: DMatrix<f64>,
    /// Stress and displacement parts of the local load solve.
    pub load_stress: DVector<f64>,
    pub load_disp: DVector<f64>,
    /// Element contribution to the multiplier right-hand side.
    pub load_multiplier: DVector<f64>,
    saddle_lu: LU<f64, Dyn, Dyn>,
}

impl LocalCondensation {
    pub fn build(
        bases: &ElementBases,
        geom: &ElementGeometry,
        material: Option<&MaterialParams>,
        edge_forward: [bool; 3],
        f: Option<&(dyn Fn([f64; 2]) -> [f64; 2] + Sync)>,
        index: usize,
    ) -> Result<Self> {
        let lm = local_matrices(bases, geom, material, edge_forward);
        let ns = bases.stress.dim();
        let nv = bases.displacement.dim();
        let nc = lm.c.nrows();
        let n = ns + nv;

        let mut saddle = DMatrix::<f64>::zeros(n, n);
        saddle.view_mut((0, 0), (ns, ns)).copy_from(&lm.a);
        saddle.view_mut((ns, 0), (nv, ns)).copy_from(&lm.b);
        saddle.view_mut((0, ns), (ns, nv)).copy_from(&lm.b.transpose());
        let saddle_lu = saddle.lu();
        if !saddle_lu.is_invertible() {
            return Err(Error::Factorization(format!(
                "element {index}: local saddle matrix is singular"
            )));
        }

        // Condensation: solve for all trace basis data at once.
        let mut rhs = DMatrix::<f64>::zeros(n, nc);
        rhs.view_mut((0, 0), (ns, nc)).copy_from(&lm.c.transpose());
        let sol = saddle_lu
            .solve(&rhs)
            .ok_or_else(|| Error::Factorization(format!("element {index}: trace solve failed")))?;
        let s_k = &lm.c * sol.view((0, 0), (ns, nc));

        // Load solve.
        let (load_stress, load_disp) = match f {
            Some(f) => {
                let fv = load_vector(bases, geom, &f);
                let mut rhs = DVector::<f64>::zeros(n);
                rhs.rows_mut(ns, nv).copy_from(&fv);
                let sol = saddle_lu.solve(&rhs).ok_or_else(|| {
                    Error::Factorization(format!("element {index}: load solve failed"))
                })?;
                (sol.rows(0, ns).into_owned(), sol.rows(ns, nv).into_owned())
            }
            None => (DVector::zeros(ns), DVector::zeros(nv)),
        };
        let load_multiplier = -(&lm.c * &load_stress);

        Ok(LocalCondensation {
            n_stress: ns,
            n_disp: nv,
            a: lm.a,
            b: lm.b,
            c: lm.c,
            s_k,
            load_stress,
            load_disp,
            load_multiplier,
            saddle_lu,
        })
    }

    /// Solve the homogeneous local problem for given edge data.
    pub fn solve_lambda(&self, lambda: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let n = self.n_stress + self.n_disp;
        let mut rhs = DVector::<f64>::zeros(n);
        rhs.rows_mut(0, self.n_stress).copy_from(&(self.c.transpose() * lambda));
        let sol = self.saddle_lu.solve(&rhs).expect("factorization checked at build");
        (
            sol.rows(0, self.n_stress).into_owned(),
            sol.rows(self.n_stress, self.n_disp).into_owned(),
        )
    }

    /// Element contribution `S_K lambda` for local edge data.
    pub fn schur_apply(&self, lambda: &DVector<f64>) -> DVector<f64> {
        &self.s_k * lambda
    }

    /// `||lambda||_{S,K}^2 = <S_K lambda, lambda>`.
    pub fn energy_norm_sq(&self, lambda: &DVector<f64>) -> f64 {
        self.schur_apply(lambda).dot(lambda)
    }

    /// Recover the element fields for the given edge data: the homogeneous
    /// part plus the load part.
    pub fn recover(&self, lambda: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let (mut sigma, mut u) = self.solve_lambda(lambda);
        sigma += &self.load_stress;
        u += &self.load_disp;
        (sigma, u)
    }

    /// Residual of the two local equations for a computed pair; used to
    /// verify unisolvence.
    pub fn residual(
        &self,
        lambda: &DVector<f64>,
        fv: &DVector<f64>,
        sigma: &DVector<f64>,
        u: &DVector<f64>,
    ) -> f64 {
        let r1 = &self.a * sigma + self.b.transpose() * u - self.c.transpose() * lambda;
        let r2 = &self.b * sigma - fv;
        (r1.norm_squared() + r2.norm_squared()).sqrt()
    }
}

/// All element condensations of a mesh for fixed degree, material, and load.
pub struct CondensationSet {
    pub k: usize,
    pub material: MaterialParams,
    pub bases: ElementBases,
    pub elems: Vec<LocalCondensation>,
}

impl CondensationSet {
    pub fn build(
        mesh: &TriMesh,
        k: usize,
        material: MaterialParams,
        f: Option<&(dyn Fn([f64; 2]) -> [f64; 2] + Sync)>,
    ) -> Result<Self> {
        let bases = ElementBases::new(k)?;
        let elems: Result<Vec<LocalCondensation>> = (0..mesh.n_triangles())
            .into_par_iter()
            .map(|t| {
                let geom = mesh.geometry(t);
                LocalCondensation::build(
                    &bases,
                    &geom,
                    Some(&material),
                    mesh.edge_forward(t),
                    f,
                    t,
                )
            })
            .collect();
        Ok(CondensationSet { k, material, bases, elems: elems? })
    }
}

/// Per-element coefficients of the recovered stress and displacement.
pub struct FieldSolution {
    pub k: usize,
    pub stress: Vec<DVector<f64>>,
    pub displacement: Vec<DVector<f64>>,
}

impl FieldSolution {
    /// Stress value at a reference point of element `t`.
    pub fn stress_at(&self, bases: &ElementBases, t: usize, ref_p: [f64; 2]) -> SymMat2 {
        let svals = bases.stress.scalar.eval(ref_p);
        stress_value(&self.stress[t], &svals)
    }

    /// Displacement value at a reference point of element `t`.
    pub fn displacement_at(&self, bases: &ElementBases, t: usize, ref_p: [f64; 2]) -> [f64; 2] {
        let dvals = bases.displacement.scalar.eval(ref_p);
        let c = &self.displacement[t];
        let mut out = [0.0; 2];
        for b in 0..dvals.len() {
            out[0] += c[2 * b] * dvals[b];
            out[1] += c[2 * b + 1] * dvals[b];
        }
        out
    }

    /// Divergence of the stress at a reference point of element `t`.
    pub fn div_stress_at(
        &self,
        bases: &ElementBases,
        geom: &ElementGeometry,
        t: usize,
        ref_p: [f64; 2],
    ) -> [f64; 2] {
        let grads = bases.stress.scalar.grad(ref_p);
        let c = &self.stress[t];
        let mut out = [0.0; 2];
        for a in 0..grads.len() {
            let g = geom.phys_grad(grads[a]);
            let tau = SymMat2::new(c[3 * a], c[3 * a + 1], 0.5 * c[3 * a + 2]);
            let d = tau.mul_vec(g);
            out[0] += d[0];
            out[1] += d[1];
        }
        out
    }
}

/// Evaluate a stress coefficient vector against tabulated scalar values.
pub fn stress_value(coeffs: &DVector<f64>, scalar_vals: &DVector<f64>) -> SymMat2 {
    let mut out = SymMat2::ZERO;
    for a in 0..scalar_vals.len() {
        let v = scalar_vals[a];
        out.xx += v * coeffs[3 * a];
        out.yy += v * coeffs[3 * a + 1];
        out.xy += v * 0.5 * coeffs[3 * a + 2];
    }
    out
}

/// Gather the local edge data of element `t` from a global multiplier vector,
/// with zeros on boundary edges.
pub fn gather_local(
    mesh: &TriMesh,
    space: &MultiplierSpace,
    t: usize,
    lambda: &[f64],
) -> DVector<f64> {
    let npe = space.dofs_per_edge;
    let mut out = DVector::<f64>::zeros(3 * npe);
    for (j, &e) in mesh.edge_of_triangle[t].iter().enumerate() {
        if let Some(ie) = space.interior_index[e] {
            let base = ie * npe;
            for m in 0..npe {
                out[j * npe + m] = lambda[base + m];
            }
        }
    }
    out
}

/// Recover the stress and displacement fields from a multiplier solution.
pub fn recover_fields(
    mesh: &TriMesh,
    space: &MultiplierSpace,
    cond: &CondensationSet,
    lambda: &[f64],
) -> Result<FieldSolution> {
    if lambda.len() != space.total_dofs {
        return Err(Error::DofMismatch(format!(
            "multiplier has {} entries, space has {}",
            lambda.len(),
            space.total_dofs
        )));
    }
    let fields: Vec<(DVector<f64>, DVector<f64>)> = (0..mesh.n_triangles())
        .into_par_iter()
        .map(|t| {
            let lam = gather_local(mesh, space, t, lambda);
            cond.elems[t].recover(&lam)
        })
        .collect();
    let (stress, displacement) = fields.into_iter().unzip();
    Ok(FieldSolution { k: cond.k, stress, displacement })
}

/// Nodal trace coefficients of a smooth vector field on the three edges of
/// element `t`, ordered like the local trace rows (global node order).
pub fn trace_on_element(
    mesh: &TriMesh,
    bases: &ElementBases,
    t: usize,
    w: &dyn Fn([f64; 2]) -> [f64; 2],
) -> DVector<f64> {
    let npe = bases.dofs_per_edge();
    let nodes = &bases.trace.scalar.nodes;
    let tri = mesh.triangles[t];
    let mut out = DVector::<f64>::zeros(3 * npe);
    for j in 0..3 {
        let a = tri[j];
        let b = tri[(j + 1) % 3];
        let (lo, hi) = (a.min(b), a.max(b));
        let (pl, ph) = (mesh.nodes[lo], mesh.nodes[hi]);
        for (i, &tpar) in nodes.iter().enumerate() {
            let p = [pl[0] + tpar * (ph[0] - pl[0]), pl[1] + tpar * (ph[1] - pl[1])];
            let val = w(p);
            out[j * npe + 2 * i] = val[0];
            out[j * npe + 2 * i + 1] = val[1];
        }
    }
    out
}

/// Parameter-independent seminorm `|lambda|_{h,K}`: the norm of the stress
/// solving the local problem with the compliance replaced by the identity
/// pairing.
pub fn seminorm_h(pf: &LocalCondensation, lambda: &DVector<f64>) -> f64 {
    let (sigma, _) = pf.solve_lambda(lambda);
    (&pf.a * &sigma).dot(&sigma).max(0.0).sqrt()
}

/// `|lambda|_{*,K} = |K|^{-1/2} |integral of lambda . nu over the element
/// boundary|`.
pub fn seminorm_star(bases: &ElementBases, geom: &ElementGeometry, lambda: &DVector<f64>) -> f64 {
    let npe = bases.dofs_per_edge();
    let nt = bases.trace.scalar.dim();
    // Integral of each trace scalar over the reference edge.
    let mut eta_int = vec![0.0; nt];
    for (q, w) in bases.edge_rule.weights.iter().enumerate() {
        for tn in 0..nt {
            eta_int[tn] += w * bases.trace_vals[(q, tn)];
        }
    }
    let mut flux = 0.0;
    for j in 0..3 {
        let len = geom.edge_length(j);
        let nu = geom.edge_normal(j);
        for tn in 0..nt {
            let wq = eta_int[tn] * len;
            flux +=
                wq * (lambda[j * npe + 2 * tn] * nu[0] + lambda[j * npe + 2 * tn + 1] * nu[1]);
        }
    }
    flux.abs() / geom.area.sqrt()
}

/// Build the parameter-independent condensation of one element (identity
/// compliance), used by the seminorm machinery.
pub fn parameter_free_condensation(
    bases: &ElementBases,
    geom: &ElementGeometry,
    edge_forward: [bool; 3],
    index: usize,
) -> Result<LocalCondensation> {
    LocalCondensation::build(bases, geom, None, edge_forward, None, index)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::app::manufactured::ManufacturedSolution;
    use approx::assert_relative_eq;

    fn unit_right_mesh() -> TriMesh {
        TriMesh::from_parts(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2]]).unwrap()
    }

    fn build_single(
        mesh: &TriMesh,
        k: usize,
        material: MaterialParams,
        f: Option<&(dyn Fn([f64; 2]) -> [f64; 2] + Sync)>,
    ) -> (ElementBases, LocalCondensation) {
        let bases = ElementBases::new(k).unwrap();
        let geom = mesh.geometry(0);
        let cond =
            LocalCondensation::build(&bases, &geom, Some(&material), mesh.edge_forward(0), f, 0)
                .unwrap();
        (bases, cond)
    }

    #[test]
    fn zero_data_gives_zero_solution() {
        let mesh = unit_right_mesh();
        let mat = MaterialParams::new(0.5, 1.0).unwrap();
        for k in 0..=3 {
            let (bases, cond) = build_single(&mesh, k, mat, None);
            let lam = DVector::zeros(3 * bases.dofs_per_edge());
            let (s, u) = cond.solve_lambda(&lam);
            assert!(s.amax() < 1e-14 && u.amax() < 1e-14);
            assert!(cond.load_stress.amax() < 1e-15);
            assert!(cond.schur_apply(&lam).amax() < 1e-14);
        }
    }

    #[test]
    fn rigid_motion_traces_are_local_kernel_for_positive_k() {
        let mesh =
            TriMesh::from_parts(vec![[0.2, 0.1], [1.3, 0.4], [0.5, 1.2]], vec![[0, 1, 2]])
                .unwrap();
        let mat = MaterialParams::new(0.5, 1e3).unwrap();
        let rigid = |p: [f64; 2]| [0.7 - 1.3 * p[1], -0.2 + 1.3 * p[0]];
        for k in 1..=3 {
            let (bases, cond) = build_single(&mesh, k, mat, None);
            let lam = trace_on_element(&mesh, &bases, 0, &rigid);
            let (s, u) = cond.solve_lambda(&lam);
            assert!(s.amax() < 1e-10, "k={k}: sigma should vanish, got {}", s.amax());
            // Displacement equals the rigid motion; nodal basis, so compare
            // coefficients with nodal values.
            for (b, node) in bases.displacement.scalar.nodes.iter().enumerate() {
                let p = mesh.geometry(0).map(*node);
                let r = rigid(p);
                assert_relative_eq!(u[2 * b], r[0], epsilon = 1e-10);
                assert_relative_eq!(u[2 * b + 1], r[1], epsilon = 1e-10);
            }
            // Kernel direction of the condensed block.
            assert!(cond.schur_apply(&lam).amax() < 1e-10);
            assert!(cond.energy_norm_sq(&lam).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_field_has_constant_stress() {
        // w = (x, 0) with mu = 1/2, lambda = 1: sigma = diag(2, 1), u = w.
        let mesh = unit_right_mesh();
        let mat = MaterialParams::new(0.5, 1.0).unwrap();
        let w = |p: [f64; 2]| [p[0], 0.0];
        for k in 1..=2 {
            let (bases, cond) = build_single(&mesh, k, mat, None);
            let lam = trace_on_element(&mesh, &bases, 0, &w);
            let (s, u) = cond.solve_lambda(&lam);
            for a in 0..bases.stress.scalar.dim() {
                assert_relative_eq!(s[3 * a], 2.0, epsilon = 1e-10);
                assert_relative_eq!(s[3 * a + 1], 1.0, epsilon = 1e-10);
                assert_relative_eq!(s[3 * a + 2], 0.0, epsilon = 1e-10);
            }
            for (b, node) in bases.displacement.scalar.nodes.iter().enumerate() {
                let p = mesh.geometry(0).map(*node);
                assert_relative_eq!(u[2 * b], p[0], epsilon = 1e-10);
                assert_relative_eq!(u[2 * b + 1], 0.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn constant_load_reproduces_divergence_pointwise() {
        let mesh =
            TriMesh::from_parts(vec![[0.0, 0.0], [1.1, 0.2], [0.3, 0.9]], vec![[0, 1, 2]])
                .unwrap();
        let mat = MaterialParams::new(0.5, 1.0).unwrap();
        let c = [0.8, -1.4];
        let f = move |_p: [f64; 2]| c;
        for k in 0..=2 {
            let (bases, cond) = build_single(&mesh, k, mat, Some(&f));
            let geom = mesh.geometry(0);
            let fields = FieldSolution {
                k,
                stress: vec![cond.load_stress.clone()],
                displacement: vec![cond.load_disp.clone()],
            };
            for p in [[0.2, 0.3], [0.6, 0.1], [0.1, 0.7]] {
                let d = fields.div_stress_at(&bases, &geom, 0, p);
                assert_relative_eq!(d[0], c[0], epsilon = 1e-10);
                assert_relative_eq!(d[1], c[1], epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn load_solve_matches_dense_saddle_oracle() {
        // Assemble the same saddle system independently and solve it densely.
        let mesh = unit_right_mesh();
        let mat = MaterialParams::new(0.5, 1.0).unwrap();
        let exact = ManufacturedSolution::new(mat);
        let f = move |p: [f64; 2]| exact.load(p);
        let k = 2;
        let (bases, cond) = build_single(&mesh, k, mat, Some(&f));
        let geom = mesh.geometry(0);
        let lm = local_matrices(&bases, &geom, Some(&mat), mesh.edge_forward(0));
        let ns = bases.stress.dim();
        let nv = bases.displacement.dim();
        let n = ns + nv;
        let mut saddle = DMatrix::<f64>::zeros(n, n);
        saddle.view_mut((0, 0), (ns, ns)).copy_from(&lm.a);
        saddle.view_mut((ns, 0), (nv, ns)).copy_from(&lm.b);
        saddle.view_mut((0, ns), (ns, nv)).copy_from(&lm.b.transpose());
        let fv = load_vector(&bases, &geom, &f);
        let mut rhs = DVector::<f64>::zeros(n);
        rhs.rows_mut(ns, nv).copy_from(&fv);
        let sol = saddle.lu().solve(&rhs).unwrap();
        let scale = sol.amax();
        for i in 0..ns {
            assert!((sol[i] - cond.load_stress[i]).abs() <= 1e-12 * scale);
        }
        for r in 0..nv {
            assert!((sol[ns + r] - cond.load_disp[r]).abs() <= 1e-12 * scale);
        }
        // Unisolvence: residual of both local equations.
        let lam = DVector::zeros(3 * bases.dofs_per_edge());
        let res = cond.residual(&lam, &fv, &cond.load_stress, &cond.load_disp);
        assert!(res <= 1e-12 * rhs.amax().max(1.0));
    }

    #[test]
    fn schur_block_is_symmetric_psd_and_matches_energy() {
        let mesh =
            TriMesh::from_parts(vec![[0.1, 0.0], [1.0, 0.3], [0.2, 1.1]], vec![[0, 1, 2]])
                .unwrap();
        let mat = MaterialParams::new(0.5, 1e3).unwrap();
        let (bases, cond) = build_single(&mesh, 2, mat, None);
        let nc = 3 * bases.dofs_per_edge();
        let sym = (&cond.s_k - cond.s_k.transpose()).abs().max();
        assert!(sym <= 1e-13 * cond.s_k.abs().max());
        let mut rng = 987654321u64;
        let mut rand = move || {
            rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((rng >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        for _ in 0..50 {
            let lam = DVector::from_fn(nc, |_, _| rand());
            let quad = cond.energy_norm_sq(&lam);
            assert!(quad >= -1e-12 * lam.norm_squared());
            // <S_K lam, lam> equals (A sigma_lam, sigma_lam).
            let (s, _) = cond.solve_lambda(&lam);
            let via_stress = (&cond.a * &s).dot(&s);
            assert_relative_eq!(quad, via_stress, max_relative = 1e-11);
        }
    }

    #[test]
    fn star_seminorm_examples() {
        let mesh = unit_right_mesh();
        let mat = MaterialParams::new(0.5, 1.0).unwrap();
        let (bases, _) = build_single(&mesh, 2, mat, None);
        let geom = mesh.geometry(0);

        let zero = DVector::zeros(3 * bases.dofs_per_edge());
        assert_eq!(seminorm_star(&bases, &geom, &zero), 0.0);

        let rigid = |p: [f64; 2]| [1.0 - 0.5 * p[1], 2.0 + 0.5 * p[0]];
        let lam = trace_on_element(&mesh, &bases, 0, &rigid);
        assert!(seminorm_star(&bases, &geom, &lam) < 1e-13);

        // w = (x, 0) on the unit right triangle: div w = 1, so the value is
        // |K|^{-1/2} |K| = sqrt(1/2).
        let w = |p: [f64; 2]| [p[0], 0.0];
        let lam = trace_on_element(&mesh, &bases, 0, &w);
        assert_relative_eq!(
            seminorm_star(&bases, &geom, &lam),
            0.5f64.sqrt(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn h_seminorm_examples_and_scaling_consistency() {
        let mesh =
            TriMesh::from_parts(vec![[0.0, 0.0], [1.2, 0.1], [0.4, 1.0]], vec![[0, 1, 2]])
                .unwrap();
        let bases = ElementBases::new(2).unwrap();
        let geom = mesh.geometry(0);
        let pf = parameter_free_condensation(&bases, &geom, mesh.edge_forward(0), 0).unwrap();

        let zero = DVector::zeros(3 * bases.dofs_per_edge());
        assert_eq!(seminorm_h(&pf, &zero), 0.0);

        let rigid = |p: [f64; 2]| [0.3 + 2.0 * p[1], 1.0 - 2.0 * p[0]];
        let lam = trace_on_element(&mesh, &bases, 0, &rigid);
        assert!(seminorm_h(&pf, &lam) < 1e-10);

        // With zero second parameter the material solve is the
        // parameter-free solve scaled by 2 mu.
        let mu = 0.7;
        let mat0 = MaterialParams::new(mu, 0.0).unwrap();
        let cond0 =
            LocalCondensation::build(&bases, &geom, Some(&mat0), mesh.edge_forward(0), None, 0)
                .unwrap();
        let w = |p: [f64; 2]| [p[0] * p[1], p[0] - 0.3 * p[1]];
        let lam = trace_on_element(&mesh, &bases, 0, &w);
        let (s_mat, _) = cond0.solve_lambda(&lam);
        let (s_free, _) = pf.solve_lambda(&lam);
        let diff = (&s_mat - &s_free * (2.0 * mu)).amax();
        assert!(diff <= 1e-10 * s_mat.amax().max(1.0));
    }

    #[test]
    fn energy_norm_equivalence_is_uniform_in_lambda() {
        // 2 mu |.|_h^2 + lambda |.|_*^2 brackets the condensed energy with
        // constants independent of lambda over six decades.
        let mesh =
            TriMesh::from_parts(vec![[0.0, 0.0], [1.0, 0.15], [0.3, 0.9]], vec![[0, 1, 2]])
                .unwrap();
        let bases = ElementBases::new(2).unwrap();
        let geom = mesh.geometry(0);
        let pf = parameter_free_condensation(&bases, &geom, mesh.edge_forward(0), 0).unwrap();
        let nc = 3 * bases.dofs_per_edge();
        let mu = 0.5;

        let mut rng = 24681357u64;
        let mut rand = move || {
            rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((rng >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for la in [1.0, 1e3, 1e6] {
            let mat = MaterialParams::new(mu, la).unwrap();
            let cond =
                LocalCondensation::build(&bases, &geom, Some(&mat), mesh.edge_forward(0), None, 0)
                    .unwrap();
            for _ in 0..40 {
                let lam = DVector::from_fn(nc, |_, _| rand());
                let s_norm = cond.energy_norm_sq(&lam);
                let h = seminorm_h(&pf, &lam);
                let star = seminorm_star(&bases, &geom, &lam);
                let proxy = 2.0 * mu * h * h + la * star * star;
                if proxy < 1e-12 {
                    continue;
                }
                let ratio = s_norm / proxy;
                lo = lo.min(ratio);
                hi = hi.max(ratio);
            }
        }
        // The bracket must stay bounded and bounded away from zero.
        assert!(lo > 0.01 && hi < 100.0, "ratio range [{lo}, {hi}]");
        assert!(hi / lo < 50.0, "spread {}", hi / lo);
    }
}

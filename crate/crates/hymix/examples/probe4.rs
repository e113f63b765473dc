use hymix::app::ManufacturedSolution;
use hymix::elements::ElementBases;
use hymix::localcond::{recover_fields, CondensationSet, FieldSolution};
use hymix::material::MaterialParams;
use hymix::mesh::TriMesh;
use hymix::schur::{assemble_rhs, stress_jump_norm, MultiplierSpace, SchurOperator};
use hymix::sparse::LdlSolver;

fn solve(mesh: &TriMesh, k: usize) -> (CondensationSet, FieldSolution) {
    let mat = MaterialParams::new(0.5, 1.0).unwrap();
    let exact = ManufacturedSolution::new(mat);
    let f = move |p: [f64; 2]| exact.load(p);
    let cond = CondensationSet::build(mesh, k, mat, Some(&f)).unwrap();
    let space = MultiplierSpace::build(mesh, k).unwrap();
    let op = SchurOperator::build(mesh, &space, &cond).unwrap();
    let rhs = assemble_rhs(mesh, &space, &cond);
    let solver = LdlSolver::new(op.assembled()).unwrap();
    let lambda = solver.solve(&rhs.values);
    let fields = recover_fields(mesh, &space, &cond, &lambda).unwrap();
    let jn = stress_jump_norm(mesh, &cond, &fields);
    println!("   jump norm: {jn:.3e}");
    (cond, fields)
}

fn sigma_err_rule(
    mesh: &TriMesh,
    bases: &ElementBases,
    fields: &FieldSolution,
    pts: &[[f64; 2]],
    wts: &[f64],
    count_xy_twice: bool,
) -> f64 {
    let mat = MaterialParams::new(0.5, 1.0).unwrap();
    let exact = ManufacturedSolution::new(mat);
    let xyw = if count_xy_twice { 2.0 } else { 1.0 };
    let mut total = 0.0;
    for t in 0..mesh.n_triangles() {
        let geom = mesh.geometry(t);
        for (q, w) in pts.iter().zip(wts) {
            let wq = w * geom.det;
            let ds = fields.stress_at(bases, t, *q).sub(&exact.stress(geom.map(*q)));
            total += wq * (ds.xx * ds.xx + ds.yy * ds.yy + xyw * ds.xy * ds.xy);
        }
    }
    total.sqrt()
}

fn main() {
    let vertex_pts = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
    let vertex_wts = [1.0 / 6.0; 3];
    let mid_pts = [[0.5, 0.0], [0.5, 0.5], [0.0, 0.5]];
    let mid_wts = [1.0 / 6.0; 3];
    let centroid_pts = [[1.0 / 3.0, 1.0 / 3.0]];
    let centroid_wts = [0.5];

    println!("HCT k=0, published sigma: 2.0147e-1 / 4.9971e-2 / 1.2357e-2");
    for n in [4usize, 8, 16] {
        let mesh = TriMesh::unit_square_uniform(n).unwrap().hct_refine().unwrap();
        let (cond, fields) = solve(&mesh, 0);
        let v2 = sigma_err_rule(&mesh, &cond.bases, &fields, &vertex_pts, &vertex_wts, true);
        let v1 = sigma_err_rule(&mesh, &cond.bases, &fields, &vertex_pts, &vertex_wts, false);
        let m2 = sigma_err_rule(&mesh, &cond.bases, &fields, &mid_pts, &mid_wts, true);
        let m1 = sigma_err_rule(&mesh, &cond.bases, &fields, &mid_pts, &mid_wts, false);
        let c2 = sigma_err_rule(&mesh, &cond.bases, &fields, &centroid_pts, &centroid_wts, true);
        println!("1/h={n}: vertex2 {v2:.4e} vertex1 {v1:.4e} mid2 {m2:.4e} mid1 {m1:.4e} centroid2 {c2:.4e}");
    }
    println!("uniform k=2, published sigma: 2.0260e-3 / 1.5145e-4");
    for n in [4usize, 8] {
        let mesh = TriMesh::unit_square_uniform(n).unwrap();
        let (cond, fields) = solve(&mesh, 2);
        let v2 = sigma_err_rule(&mesh, &cond.bases, &fields, &vertex_pts, &vertex_wts, true);
        let m2 = sigma_err_rule(&mesh, &cond.bases, &fields, &mid_pts, &mid_wts, true);
        let m1 = sigma_err_rule(&mesh, &cond.bases, &fields, &mid_pts, &mid_wts, false);
        println!("1/h={n}: vertex2 {v2:.4e} mid2 {m2:.4e} mid1 {m1:.4e}");
    }
}

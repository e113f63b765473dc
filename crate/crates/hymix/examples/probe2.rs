use hymix::app::ManufacturedSolution;
use hymix::elements::{ElementBases, QuadratureRule};
use hymix::localcond::{recover_fields, CondensationSet};
use hymix::material::MaterialParams;
use hymix::mesh::TriMesh;
use hymix::schur::{assemble_rhs, MultiplierSpace, SchurOperator};
use hymix::sparse::LdlSolver;

fn uniform_flipped(n: usize) -> TriMesh {
    let h = 1.0 / n as f64;
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut nodes = Vec::new();
    for j in 0..=n {
        for i in 0..=n {
            nodes.push([i as f64 * h, j as f64 * h]);
        }
    }
    let mut tris = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let v00 = id(i, j);
            let v10 = id(i + 1, j);
            let v01 = id(i, j + 1);
            let v11 = id(i + 1, j + 1);
            // diagonal from (i+1,j) to (i,j+1)
            tris.push([v00, v10, v01]);
            tris.push([v10, v11, v01]);
        }
    }
    TriMesh::from_parts(nodes, tris).unwrap()
}

fn solve_errors(mesh: &TriMesh, k: usize) -> (f64, f64, f64, f64) {
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
    let bases = ElementBases::new(k).unwrap();
    let rule = QuadratureRule::with_exactness(2 * (k + 2) + 6);
    let (mut eu, mut es_frob, mut es_once, mut ed) = (0.0, 0.0, 0.0, 0.0);
    for t in 0..mesh.n_triangles() {
        let geom = mesh.geometry(t);
        for (q, w) in rule.points.iter().zip(&rule.weights) {
            let wq = w * geom.det;
            let p = geom.map(*q);
            let uh = fields.displacement_at(&bases, t, *q);
            let u = exact.displacement(p);
            eu += wq * ((uh[0] - u[0]).powi(2) + (uh[1] - u[1]).powi(2));
            let ds = fields.stress_at(&bases, t, *q).sub(&exact.stress(p));
            es_frob += wq * ds.norm_sq();
            es_once += wq * (ds.xx * ds.xx + ds.yy * ds.yy + ds.xy * ds.xy);
            let dh = fields.div_stress_at(&bases, &geom, t, *q);
            let de = exact.load(p);
            ed += wq * ((dh[0] - de[0]).powi(2) + (dh[1] - de[1]).powi(2));
        }
    }
    (eu.sqrt(), es_frob.sqrt(), es_once.sqrt(), ed.sqrt())
}

fn main() {
    println!("k=2 published sigma: 2.0260e-3 (1/h=4), 1.5145e-4 (1/h=8)");
    for n in [4usize, 8] {
        let m1 = TriMesh::unit_square_uniform(n).unwrap();
        let (u1, sf1, so1, d1) = solve_errors(&m1, 2);
        println!("SW-NE  1/h={n}: u {u1:.4e} sigma_frob {sf1:.4e} sigma_once {so1:.4e} div {d1:.4e}");
        let m2 = uniform_flipped(n);
        let (u2, sf2, so2, d2) = solve_errors(&m2, 2);
        println!("SE-NW  1/h={n}: u {u2:.4e} sigma_frob {sf2:.4e} sigma_once {so2:.4e} div {d2:.4e}");
    }
    println!("k=0 HCT published sigma: 2.0147e-1 (4), 4.9971e-2 (8), 1.2357e-2 (16)");
    for n in [4usize, 8, 16] {
        let m1 = TriMesh::unit_square_uniform(n).unwrap().hct_refine().unwrap();
        let (u1, sf1, so1, d1) = solve_errors(&m1, 0);
        println!("HCT/SW-NE 1/h={n}: u {u1:.4e} sigma_frob {sf1:.4e} sigma_once {so1:.4e} div {d1:.4e}");
        let m2 = uniform_flipped(n).hct_refine().unwrap();
        let (u2, sf2, so2, d2) = solve_errors(&m2, 0);
        println!("HCT/SE-NW 1/h={n}: u {u2:.4e} sigma_frob {sf2:.4e} sigma_once {so2:.4e} div {d2:.4e}");
    }
}

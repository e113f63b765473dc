use hymix::app::ManufacturedSolution;
use hymix::elements::{ElementBases, QuadratureRule};
use hymix::localcond::{recover_fields, CondensationSet};
use hymix::material::MaterialParams;
use hymix::mesh::TriMesh;
use hymix::schur::{assemble_rhs, MultiplierSpace, SchurOperator};
use hymix::sparse::LdlSolver;

fn solve_and_errors(mesh: &TriMesh, k: usize) -> (f64, f64, f64) {
    let mat = MaterialParams::new(0.5, 1.0).unwrap();
    let exact = ManufacturedSolution::new(mat);
    let f = move |p: [f64; 2]| exact.load(p);
    let cond = CondensationSet::build(mesh, k, mat, Some(&f)).unwrap();
    let space = MultiplierSpace::build(mesh, k).unwrap();
    let op = SchurOperator::build(mesh, &space, &cond).unwrap();
    let rhs = assemble_rhs(mesh, &space, &cond);
    let csr = op.assembled();
    let solver = LdlSolver::new(csr).unwrap();
    let lambda = solver.solve(&rhs.values);
    let fields = recover_fields(mesh, &space, &cond, &lambda).unwrap();

    let bases = ElementBases::new(k).unwrap();
    let rule = QuadratureRule::with_exactness(2 * (k + 2) + 6);
    let mut eu = 0.0;
    let mut es = 0.0;
    let mut ed = 0.0;
    for t in 0..mesh.n_triangles() {
        let geom = mesh.geometry(t);
        for (q, w) in rule.points.iter().zip(&rule.weights) {
            let wq = w * geom.det;
            let p = geom.map(*q);
            let uh = fields.displacement_at(&bases, t, *q);
            let u = exact.displacement(p);
            eu += wq * ((uh[0] - u[0]).powi(2) + (uh[1] - u[1]).powi(2));
            let sh = fields.stress_at(&bases, t, *q);
            let s = exact.stress(p);
            let ds = sh.sub(&s);
            es += wq * ds.norm_sq();
            let dh = fields.div_stress_at(&bases, &geom, t, *q);
            let de = exact.load(p);
            ed += wq * ((dh[0] - de[0]).powi(2) + (dh[1] - de[1]).powi(2));
        }
    }
    (eu.sqrt(), es.sqrt(), ed.sqrt())
}

fn main() {
    println!("uniform k=2 (published: u 2.1758e-3 / 2.7561e-4 / 3.4569e-5, sigma 2.0260e-3 / 1.5145e-4 / 9.7454e-6, div 6.2558e-2 / 7.9274e-3 / 9.9431e-4)");
    for n in [4usize, 8, 16] {
        let mesh = TriMesh::unit_square_uniform(n).unwrap();
        let t0 = std::time::Instant::now();
        let (eu, es, ed) = solve_and_errors(&mesh, 2);
        println!(
            "1/h={n:3}: u {eu:.4e}  sigma {es:.4e}  div {ed:.4e}   ({:?})",
            t0.elapsed()
        );
    }
    println!("macro-simplex k=0 (published: u 9.5309e-2 / 4.5289e-2, sigma 2.0147e-1 / 4.9971e-2, div 2.6589 / 1.2995)");
    for n in [4usize, 8] {
        let mesh = TriMesh::unit_square_uniform(n).unwrap().hct_refine().unwrap();
        let (eu, es, ed) = solve_and_errors(&mesh, 0);
        println!("1/h={n:3}: u {eu:.4e}  sigma {es:.4e}  div {ed:.4e}");
    }
}

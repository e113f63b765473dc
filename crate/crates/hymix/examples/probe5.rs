use hymix::app::ManufacturedSolution;
use hymix::elements::{ElementBases, QuadratureRule};
use hymix::localcond::{recover_fields, CondensationSet};
use hymix::material::MaterialParams;
use hymix::mesh::TriMesh;
use hymix::schur::{assemble_rhs, MultiplierSpace, SchurOperator};
use hymix::solvers::{pcg, DiagonalPrecond};
use hymix::sparse::LdlSolver;

fn run(mesh: &TriMesh, k: usize, use_pcg: bool) -> (f64, f64, f64, f64) {
    let mat = MaterialParams::new(0.5, 1.0).unwrap();
    let exact = ManufacturedSolution::new(mat);
    let f = move |p: [f64; 2]| exact.load(p);
    let cond = CondensationSet::build(mesh, k, mat, Some(&f)).unwrap();
    let space = MultiplierSpace::build(mesh, k).unwrap();
    let op = SchurOperator::build(mesh, &space, &cond).unwrap();
    let rhs = assemble_rhs(mesh, &space, &cond);
    let lambda = if use_pcg {
        let m = DiagonalPrecond::new(op.diagonal());
        let (x, rep) = pcg(&op, &rhs.values, &m, &op.kernel, 1e-11, 50000, false).unwrap();
        println!("   pcg iterations: {} converged {}", rep.iterations, rep.converged);
        x
    } else {
        let t0 = std::time::Instant::now();
        let solver = LdlSolver::new(op.assembled()).unwrap();
        let x = solver.solve(&rhs.values);
        println!("   direct solve: {:?}  (n={})", t0.elapsed(), op.n);
        x
    };
    let fields = recover_fields(mesh, &space, &cond, &lambda).unwrap();
    let bases = ElementBases::new(k).unwrap();
    let rule = QuadratureRule::with_exactness(2 * (k + 2) + 6);
    let (mut eu, mut es2, mut es1, mut ed) = (0.0, 0.0, 0.0, 0.0);
    for t in 0..mesh.n_triangles() {
        let geom = mesh.geometry(t);
        for (q, w) in rule.points.iter().zip(&rule.weights) {
            let wq = w * geom.det;
            let p = geom.map(*q);
            let uh = fields.displacement_at(&bases, t, *q);
            let u = exact.displacement(p);
            eu += wq * ((uh[0] - u[0]).powi(2) + (uh[1] - u[1]).powi(2));
            let ds = fields.stress_at(&bases, t, *q).sub(&exact.stress(p));
            es2 += wq * ds.norm_sq();
            es1 += wq * (ds.xx * ds.xx + ds.yy * ds.yy + ds.xy * ds.xy);
            let dh = fields.div_stress_at(&bases, &geom, t, *q);
            let de = exact.load(p);
            ed += wq * ((dh[0] - de[0]).powi(2) + (dh[1] - de[1]).powi(2));
        }
    }
    (eu.sqrt(), es2.sqrt(), es1.sqrt(), ed.sqrt())
}

fn main() {
    println!("crisscross k=2 (published u 5.7633e-4/7.2355e-5/9.0541e-6, sigma 3.1371e-4/2.0057e-5/1.2672e-6, div 1.7027e-2/2.1361e-3/2.6726e-4):");
    for n in [4usize, 8, 16] {
        let mesh = TriMesh::unit_square_crisscross(n).unwrap();
        let (eu, es2, es1, ed) = run(&mesh, 2, true);
        println!("1/h={n:2}: u {eu:.4e} s_frob {es2:.4e} s_once {es1:.4e} div {ed:.4e}");
    }
    println!("HCT k=0, 1/h=32 (published u 1.0976e-2, sigma 3.1761e-3, div 3.1827e-1):");
    for n in [32usize] {
        let mesh = TriMesh::unit_square_uniform(n).unwrap().hct_refine().unwrap();
        let (eu, es2, es1, ed) = run(&mesh, 0, false);
        println!("1/h={n:2}: u {eu:.4e} s_frob {es2:.4e} s_once {es1:.4e} div {ed:.4e}");
    }
}

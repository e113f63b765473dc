use hymix::app::ManufacturedSolution;
use hymix::elements::{ElementBases, QuadratureRule};
use hymix::localcond::{recover_fields, CondensationSet};
use hymix::material::MaterialParams;
use hymix::mesh::TriMesh;
use hymix::schur::{assemble_rhs, MultiplierSpace, SchurOperator};
use hymix::sparse::LdlSolver;

fn main() {
    let mat = MaterialParams::new(0.5, 1.0).unwrap();
    let exact = ManufacturedSolution::new(mat);
    let f = move |p: [f64; 2]| exact.load(p);
    for n in [8usize, 16, 32] {
        let mesh = TriMesh::unit_square_uniform(n).unwrap().hct_refine().unwrap();
        let k = 0;
        let cond = CondensationSet::build(&mesh, k, mat, Some(&f)).unwrap();
        let space = MultiplierSpace::build(&mesh, k).unwrap();
        let op = SchurOperator::build(&mesh, &space, &cond).unwrap();
        let rhs = assemble_rhs(&mesh, &space, &cond);
        let solver = LdlSolver::new(op.assembled()).unwrap();
        let lambda = solver.solve(&rhs.values);
        let fields = recover_fields(&mesh, &space, &cond, &lambda).unwrap();
        let bases = ElementBases::new(k).unwrap();
        let rule = QuadratureRule::with_exactness(2 * (k + 2) + 6);
        let h = 1.0 / n as f64;
        let mut near = 0.0; // elements whose parent cell touches the boundary
        let mut far = 0.0;
        for t in 0..mesh.n_triangles() {
            let geom = mesh.geometry(t);
            let c = [
                (geom.vertices[0][0] + geom.vertices[1][0] + geom.vertices[2][0]) / 3.0,
                (geom.vertices[0][1] + geom.vertices[1][1] + geom.vertices[2][1]) / 3.0,
            ];
            let boundary_band = c[0] < h || c[0] > 1.0 - h || c[1] < h || c[1] > 1.0 - h;
            let mut err = 0.0;
            for (q, w) in rule.points.iter().zip(&rule.weights) {
                let wq = w * geom.det;
                let ds = fields.stress_at(&bases, t, *q).sub(&exact.stress(geom.map(*q)));
                err += wq * ds.norm_sq();
            }
            if boundary_band {
                near += err;
            } else {
                far += err;
            }
        }
        println!(
            "1/h={n:2}: sigma_err near-boundary {:.4e}  interior {:.4e}  total {:.4e}",
            near.sqrt(),
            far.sqrt(),
            (near + far).sqrt()
        );
    }
}

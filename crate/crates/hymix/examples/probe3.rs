use hymix::app::ManufacturedSolution;
use hymix::elements::{ElementBases, QuadratureRule};
use hymix::material::MaterialParams;
use hymix::mesh::TriMesh;
use nalgebra::{DMatrix, DVector};

// Elementwise L2 projection of the exact stress onto the stress basis:
// no discrete method can have a smaller L2 stress error.
fn best_approx_error(mesh: &TriMesh, k: usize) -> f64 {
    let mat = MaterialParams::new(0.5, 1.0).unwrap();
    let exact = ManufacturedSolution::new(mat);
    let bases = ElementBases::new(k).unwrap();
    let rule = QuadratureRule::with_exactness(2 * (k + 2) + 8);
    let ns1 = bases.stress.scalar.dim();
    let mut total = 0.0;
    for t in 0..mesh.n_triangles() {
        let geom = mesh.geometry(t);
        // Scalar mass and component-wise moments.
        let mut mass = DMatrix::<f64>::zeros(ns1, ns1);
        let mut mom = [DVector::<f64>::zeros(ns1), DVector::zeros(ns1), DVector::zeros(ns1)];
        let mut norm2 = 0.0;
        for (q, w) in rule.points.iter().zip(&rule.weights) {
            let wq = w * geom.det;
            let sv = bases.stress.scalar.eval(*q);
            let s = exact.stress(geom.map(*q));
            norm2 += wq * (s.xx * s.xx + s.yy * s.yy + 2.0 * s.xy * s.xy);
            for a in 0..ns1 {
                for b in 0..ns1 {
                    mass[(a, b)] += wq * sv[a] * sv[b];
                }
                mom[0][a] += wq * sv[a] * s.xx;
                mom[1][a] += wq * sv[a] * s.yy;
                mom[2][a] += wq * sv[a] * s.xy;
            }
        }
        // Components project independently (xx, yy with weight 1; xy with weight 2).
        let lu = mass.lu();
        let cxx = lu.solve(&mom[0]).unwrap();
        let cyy = lu.solve(&mom[1]).unwrap();
        let cxy = lu.solve(&mom[2]).unwrap();
        let proj2 = cxx.dot(&mom[0]) + cyy.dot(&mom[1]) + 2.0 * cxy.dot(&mom[2]);
        total += (norm2 - proj2).max(0.0);
    }
    total.sqrt()
}

fn main() {
    println!("HCT k=0 best-possible sigma error (published solution errors: 2.0147e-1, 4.9971e-2, 1.2357e-2):");
    for n in [4usize, 8, 16] {
        let mesh = TriMesh::unit_square_uniform(n).unwrap().hct_refine().unwrap();
        println!("  1/h={n}: best {:.4e}", best_approx_error(&mesh, 0));
    }
    println!("uniform k=2 best-possible sigma error (published: 2.0260e-3, 1.5145e-4, 9.7454e-6):");
    for n in [4usize, 8, 16] {
        let mesh = TriMesh::unit_square_uniform(n).unwrap();
        println!("  1/h={n}: best {:.4e}", best_approx_error(&mesh, 2));
    }
}

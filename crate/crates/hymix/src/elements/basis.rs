//! Nodal Lagrange bases on the reference triangle and edge.
//!
//! Bases are represented by their monomial coefficients, obtained by
//! inverting a Vandermonde matrix on the lattice nodes; conditioning is
//! unproblematic for the supported degrees (up to 4).
//!
//! Index conventions used throughout the crate:
//! - stress basis function `3 a + p`: scalar function `a` times the symmetric
//!   generator `p` from `{T11, T22, T12}` with `T12 = [[0, 1/2], [1/2, 0]]`;
//! - displacement basis function `2 b + c`: scalar function `b` times the
//!   Cartesian unit vector `c`;
//! - trace basis function `2 j + c` on an edge: the 1D Lagrange function of
//!   node `j` (nodes at `t = j / deg`, ordered along the edge) times unit
//!   vector `c`.

use crate::material::SymMat2;
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Symmetric matrix generators spanning the 2x2 symmetric matrices.
pub const SYM_GENERATORS: [SymMat2; 3] = [
    SymMat2 { xx: 1.0, yy: 0.0, xy: 0.0 },
    SymMat2 { xx: 0.0, yy: 1.0, xy: 0.0 },
    SymMat2 { xx: 0.0, yy: 0.0, xy: 0.5 },
];

/// Scalar Lagrange basis of given degree on the reference triangle.
#[derive(Clone, Debug)]
pub struct ScalarBasisTri {
    pub degree: usize,
    /// Lattice nodes in reference coordinates.
    pub nodes: Vec<[f64; 2]>,
    /// `coeffs[m][j]`: coefficient of monomial `m` in basis function `j`.
    coeffs: DMatrix<f64>,
    /// Monomial exponents `(a, b)` for `x^a y^b`, total degree ascending.
    exps: Vec<(usize, usize)>,
}

fn tri_lattice(degree: usize) -> Vec<[f64; 2]> {
    if degree == 0 {
        return vec![[1.0 / 3.0, 1.0 / 3.0]];
    }
    let d = degree as f64;
    let mut nodes = Vec::new();
    for j in 0..=degree {
        for i in 0..=(degree - j) {
            nodes.push([i as f64 / d, j as f64 / d]);
        }
    }
    nodes
}

fn tri_monomials(degree: usize) -> Vec<(usize, usize)> {
    let mut exps = Vec::new();
    for total in 0..=degree {
        for a in (0..=total).rev() {
            exps.push((a, total - a));
        }
    }
    exps
}

impl ScalarBasisTri {
    pub fn new(degree: usize) -> Self {
        let nodes = tri_lattice(degree);
        let exps = tri_monomials(degree);
        let n = nodes.len();
        debug_assert_eq!(n, exps.len());
        let vand = DMatrix::from_fn(n, n, |i, m| {
            let (a, b) = exps[m];
            nodes[i][0].powi(a as i32) * nodes[i][1].powi(b as i32)
        });
        let coeffs = vand.try_inverse().expect("lattice Vandermonde is nonsingular");
        ScalarBasisTri { degree, nodes, coeffs, exps }
    }

    pub fn dim(&self) -> usize {
        self.nodes.len()
    }

    /// Values of all basis functions at a reference point.
    pub fn eval(&self, p: [f64; 2]) -> DVector<f64> {
        let n = self.dim();
        let mono = DVector::from_fn(n, |m, _| {
            let (a, b) = self.exps[m];
            p[0].powi(a as i32) * p[1].powi(b as i32)
        });
        self.coeffs.tr_mul(&mono)
    }

    /// Reference gradients of all basis functions at a reference point.
    pub fn grad(&self, p: [f64; 2]) -> Vec<[f64; 2]> {
        let n = self.dim();
        let mut gx = DVector::zeros(n);
        let mut gy = DVector::zeros(n);
        for m in 0..n {
            let (a, b) = self.exps[m];
            gx[m] = if a == 0 {
                0.0
            } else {
                a as f64 * p[0].powi(a as i32 - 1) * p[1].powi(b as i32)
            };
            gy[m] = if b == 0 {
                0.0
            } else {
                b as f64 * p[0].powi(a as i32) * p[1].powi(b as i32 - 1)
            };
        }
        let dx = self.coeffs.tr_mul(&gx);
        let dy = self.coeffs.tr_mul(&gy);
        (0..n).map(|j| [dx[j], dy[j]]).collect()
    }

    /// Index of the basis function whose node sits at reference vertex `v`.
    pub fn vertex_node(&self, v: usize) -> usize {
        let target = match v {
            0 => [0.0, 0.0],
            1 => [1.0, 0.0],
            2 => [0.0, 1.0],
            _ => panic!("triangle vertex index out of range"),
        };
        self.nodes
            .iter()
            .position(|n| (n[0] - target[0]).abs() < 1e-12 && (n[1] - target[1]).abs() < 1e-12)
            .expect("vertex node present for degree >= 1")
    }
}

/// Scalar Lagrange basis of given degree on the reference edge `[0, 1]`,
/// nodes at `t = j / degree` (both endpoints included for degree >= 1).
#[derive(Clone, Debug)]
pub struct ScalarBasisEdge {
    pub degree: usize,
    pub nodes: Vec<f64>,
    coeffs: DMatrix<f64>,
}

impl ScalarBasisEdge {
    pub fn new(degree: usize) -> Self {
        let nodes: Vec<f64> = if degree == 0 {
            vec![0.5]
        } else {
            (0..=degree).map(|j| j as f64 / degree as f64).collect()
        };
        let n = nodes.len();
        let vand = DMatrix::from_fn(n, n, |i, m| nodes[i].powi(m as i32));
        let coeffs = vand.try_inverse().expect("1D Vandermonde is nonsingular");
        ScalarBasisEdge { degree, nodes, coeffs }
    }

    pub fn dim(&self) -> usize {
        self.nodes.len()
    }

    pub fn eval(&self, t: f64) -> DVector<f64> {
        let n = self.dim();
        let mono = DVector::from_fn(n, |m, _| t.powi(m as i32));
        self.coeffs.tr_mul(&mono)
    }
}

/// Basis of degree-(k+1) symmetric-matrix-valued polynomials on a triangle.
#[derive(Clone, Debug)]
pub struct StressBasis {
    pub degree: usize,
    pub scalar: ScalarBasisTri,
}

impl StressBasis {
    pub fn new(k: usize) -> Result<Self> {
        check_k(k)?;
        Ok(StressBasis { degree: k + 1, scalar: ScalarBasisTri::new(k + 1) })
    }

    /// `3 (k+2)(k+3)/2`.
    pub fn dim(&self) -> usize {
        3 * self.scalar.dim()
    }

    pub fn split(&self, i: usize) -> (usize, usize) {
        (i / 3, i % 3)
    }

    /// Value of basis function `i` given precomputed scalar values.
    pub fn value(&self, i: usize, scalar_vals: &DVector<f64>) -> SymMat2 {
        let (a, p) = self.split(i);
        SYM_GENERATORS[p].scale(scalar_vals[a])
    }

    /// Divergence of basis function `i` given a physical scalar gradient.
    pub fn divergence(&self, i: usize, phys_grad: [f64; 2]) -> [f64; 2] {
        let (_, p) = self.split(i);
        SYM_GENERATORS[p].mul_vec(phys_grad)
    }
}

/// Basis of degree-k vector-valued polynomials on a triangle.
#[derive(Clone, Debug)]
pub struct DisplacementBasis {
    pub degree: usize,
    pub scalar: ScalarBasisTri,
}

impl DisplacementBasis {
    pub fn new(k: usize) -> Result<Self> {
        check_k(k)?;
        Ok(DisplacementBasis { degree: k, scalar: ScalarBasisTri::new(k) })
    }

    /// `(k+1)(k+2)`.
    pub fn dim(&self) -> usize {
        2 * self.scalar.dim()
    }

    pub fn split(&self, r: usize) -> (usize, usize) {
        (r / 2, r % 2)
    }
}

/// Basis of degree-(k+1) vector-valued polynomials on an edge.
#[derive(Clone, Debug)]
pub struct TraceBasis {
    pub degree: usize,
    pub scalar: ScalarBasisEdge,
}

impl TraceBasis {
    pub fn new(k: usize) -> Result<Self> {
        check_k(k)?;
        Ok(TraceBasis { degree: k + 1, scalar: ScalarBasisEdge::new(k + 1) })
    }

    /// `2 (k+2)` per edge.
    pub fn dim(&self) -> usize {
        2 * self.scalar.dim()
    }

    pub fn split(&self, m: usize) -> (usize, usize) {
        (m / 2, m % 2)
    }
}

fn check_k(k: usize) -> Result<()> {
    if k > 3 {
        return Err(Error::UnsupportedDegree(k));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elements::quadrature::{EdgeRule, QuadratureRule};
    use approx::assert_relative_eq;

    #[test]
    fn scalar_tri_basis_is_nodal() {
        for degree in 0..=4 {
            let basis = ScalarBasisTri::new(degree);
            for (i, node) in basis.nodes.iter().enumerate() {
                let vals = basis.eval(*node);
                for j in 0..basis.dim() {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert_relative_eq!(vals[j], expect, epsilon = 1e-10);
                }
            }
        }
    }

    #[test]
    fn scalar_tri_basis_sums_to_one() {
        let basis = ScalarBasisTri::new(3);
        let vals = basis.eval([0.21, 0.37]);
        assert_relative_eq!(vals.sum(), 1.0, max_relative = 1e-12);
        let grads = basis.grad([0.21, 0.37]);
        let gsum = grads.iter().fold([0.0, 0.0], |s, g| [s[0] + g[0], s[1] + g[1]]);
        assert_relative_eq!(gsum[0], 0.0, epsilon = 1e-11);
        assert_relative_eq!(gsum[1], 0.0, epsilon = 1e-11);
    }

    #[test]
    fn stress_basis_dims_and_symmetry() {
        for k in 0..=3 {
            let basis = StressBasis::new(k).unwrap();
            assert_eq!(basis.dim(), 3 * (k + 2) * (k + 3) / 2);
            // Values are symmetric matrices by construction; spot check the
            // generator expansion at a quadrature point.
            let rule = QuadratureRule::with_exactness(2);
            let vals = basis.scalar.eval(rule.points[0]);
            for i in 0..basis.dim() {
                let v = basis.value(i, &vals);
                assert!(v.xy.is_finite());
            }
        }
    }

    #[test]
    fn stress_gram_matrix_is_nonsingular() {
        let k = 2;
        let basis = StressBasis::new(k).unwrap();
        let rule = QuadratureRule::with_exactness(2 * (k + 1) + 2);
        let n = basis.dim();
        let mut gram = DMatrix::<f64>::zeros(n, n);
        for (p, w) in rule.points.iter().zip(&rule.weights) {
            let vals = basis.scalar.eval(*p);
            for i in 0..n {
                let vi = basis.value(i, &vals);
                for j in 0..n {
                    let vj = basis.value(j, &vals);
                    gram[(i, j)] += w * vi.dot(&vj);
                }
            }
        }
        let min_sv = gram.svd(false, false).singular_values.min();
        assert!(min_sv > 1e-8, "Gram matrix nearly singular: {min_sv}");
    }

    #[test]
    fn displacement_basis_contains_rigid_motions_for_positive_k() {
        // Project the rotation (-y, x) onto the span and check zero residual.
        for k in 1..=3 {
            let basis = DisplacementBasis::new(k).unwrap();
            let rule = QuadratureRule::with_exactness(2 * k + 2);
            let n = basis.dim();
            let mut mass = DMatrix::<f64>::zeros(n, n);
            let mut rhs = DVector::<f64>::zeros(n);
            let mut rot_norm = 0.0;
            for (p, w) in rule.points.iter().zip(&rule.weights) {
                let vals = basis.scalar.eval(*p);
                let rot = [-p[1], p[0]];
                rot_norm += w * (rot[0] * rot[0] + rot[1] * rot[1]);
                for r in 0..n {
                    let (br, cr) = basis.split(r);
                    let vr = vals[br];
                    rhs[r] += w * vr * rot[cr];
                    for s in 0..n {
                        let (bs, cs) = basis.split(s);
                        if cr == cs {
                            mass[(r, s)] += w * vr * vals[bs];
                        }
                    }
                }
            }
            let coeff = mass.clone().lu().solve(&rhs).unwrap();
            let residual = rot_norm - coeff.dot(&rhs);
            assert!(residual.abs() < 1e-12, "k={k}: projection residual {residual}");
        }
    }

    #[test]
    fn trace_basis_depends_only_on_arclength() {
        let k = 2;
        let basis = TraceBasis::new(k).unwrap();
        assert_eq!(basis.dim(), 2 * (k + 2));
        // Edge Gram matrix is nonsingular.
        let rule = EdgeRule::with_exactness(2 * (k + 1));
        let ns = basis.scalar.dim();
        let mut gram = DMatrix::<f64>::zeros(ns, ns);
        for (t, w) in rule.points.iter().zip(&rule.weights) {
            let vals = basis.scalar.eval(*t);
            for i in 0..ns {
                for j in 0..ns {
                    gram[(i, j)] += w * vals[i] * vals[j];
                }
            }
        }
        assert!(gram.determinant().abs() > 1e-12);
    }
}

//! Quadrature on the reference triangle and the reference edge.
//!
//! Edge rules are Gauss-Legendre on `[0, 1]`. Triangle rules are conical
//! products of a Gauss-Legendre rule with a Gauss-Jacobi rule for the weight
//! `(1 - t)`, mapped to the reference triangle with vertices `(0,0)`, `(1,0)`,
//! `(0,1)`. Nodes and weights are generated by the Golub-Welsch eigenvalue
//! method, so rules of any requested exactness degree are available; all
//! weights are positive and all points lie strictly inside the domain.

use nalgebra::{DMatrix, SymmetricEigen};

/// Quadrature rule on the reference triangle.
///
/// Weights sum to the reference area 1/2 and the rule integrates bivariate
/// polynomials of total degree up to `exactness` exactly.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub exactness: usize,
}

/// Quadrature rule on the reference edge `[0, 1]`.
#[derive(Clone, Debug)]
pub struct EdgeRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    pub exactness: usize,
}

/// Nodes and weights of the orthogonal-polynomial rule encoded by a Jacobi
/// matrix with diagonal `diag`, off-diagonal `off`, and total mass `mu0`.
fn golub_welsch(diag: &[f64], off: &[f64], mu0: f64) -> (Vec<f64>, Vec<f64>) {
    let n = diag.len();
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        jac[(i, i)] = diag[i];
        if i + 1 < n {
            jac[(i, i + 1)] = off[i];
            jac[(i + 1, i)] = off[i];
        }
    }
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Gauss-Legendre rule with `n` points on `[0, 1]`; exact to degree `2n - 1`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let diag = vec![0.0; n];
    let off: Vec<f64> = (1..n)
        .map(|k| {
            let k = k as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        })
        .collect();
    let (x, w) = golub_welsch(&diag, &off, 2.0);
    // Map [-1, 1] -> [0, 1].
    let nodes = x.iter().map(|&t| 0.5 * (t + 1.0)).collect();
    let weights = w.iter().map(|&wi| 0.5 * wi).collect();
    (nodes, weights)
}

/// Gauss-Jacobi rule with `n` points for the weight `(1 - t)` on `[0, 1]`;
/// exact to degree `2n - 1` against that weight.
fn gauss_jacobi_10(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    // Jacobi matrix for weight (1-x)^1 (1+x)^0 on [-1, 1].
    let mut diag = Vec::with_capacity(n);
    for k in 0..n {
        if k == 0 {
            diag.push(-1.0 / 3.0);
        } else {
            let k = k as f64;
            diag.push(-1.0 / ((2.0 * k + 1.0) * (2.0 * k + 3.0)));
        }
    }
    let off: Vec<f64> = (1..n)
        .map(|k| {
            let k = k as f64;
            let m = 2.0 * k + 1.0;
            2.0 * k * (k + 1.0) / (m * (m * m - 1.0).sqrt())
        })
        .collect();
    let (x, w) = golub_welsch(&diag, &off, 2.0);
    let nodes = x.iter().map(|&t| 0.5 * (t + 1.0)).collect();
    let weights = w.iter().map(|&wi| 0.25 * wi).collect();
    (nodes, weights)
}

impl EdgeRule {
    pub fn with_exactness(degree: usize) -> Self {
        let n = degree / 2 + 1;
        let (points, weights) = gauss_legendre(n);
        EdgeRule { points, weights, exactness: 2 * n - 1 }
    }
}

impl QuadratureRule {
    pub fn with_exactness(degree: usize) -> Self {
        let n = degree / 2 + 1;
        let (u, wu) = gauss_legendre(n);
        let (v, wv) = gauss_jacobi_10(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                points.push([u[i] * (1.0 - v[j]), v[j]]);
                weights.push(wu[i] * wv[j]);
            }
        }
        QuadratureRule { points, weights, exactness: 2 * n - 1 }
    }
}

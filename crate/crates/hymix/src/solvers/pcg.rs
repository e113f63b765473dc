//! Preconditioned conjugate gradients for consistent symmetric positive
//! semidefinite systems.
//!
//! The initial residual and every preconditioned direction are projected
//! onto the orthogonal complement of the supplied kernel basis, which keeps
//! the iteration inside the range of the operator and makes singular but
//! consistent systems behave like definite ones.

use super::{Operator, Preconditioner};
use crate::schur::{project_out, SparseVec};
use crate::{Error, Result};
use std::time::{Duration, Instant};

/// Outcome of a conjugate gradient run.
#[derive(Clone, Debug)]
pub struct SolveReport {
    pub iterations: usize,
    pub converged: bool,
    /// Relative Euclidean residuals, one entry per iteration.
    pub residual_history: Vec<f64>,
    pub wall_time: Duration,
    /// Extremal Ritz values of the preconditioned operator, when requested
    /// and at least one iteration was taken.
    pub ritz: Option<(f64, f64)>,
    /// Iterations where the residual grew by more than a factor of ten
    /// (round-off excursions are reported, never hidden).
    pub excursions: Vec<usize>,
}

impl SolveReport {
    pub fn condition_estimate(&self) -> Option<f64> {
        self.ritz.map(|(lo, hi)| hi / lo)
    }
}

/// Solve `op x = b` with relative residual tolerance `tol`.
///
/// `kernel` must be an orthonormal basis of the operator kernel (empty for
/// definite operators); `b` is projected onto its complement, so slightly
/// inconsistent right-hand sides are handled gracefully.
pub fn pcg(
    op: &dyn Operator,
    b: &[f64],
    precond: &dyn Preconditioner,
    kernel: &[SparseVec],
    tol: f64,
    maxit: usize,
    want_ritz: bool,
) -> Result<(Vec<f64>, SolveReport)> {
    let start = Instant::now();
    let n = op.dim();
    if b.len() != n {
        return Err(Error::DofMismatch(format!(
            "right-hand side has {} entries, operator dimension is {n}",
            b.len()
        )));
    }
    let mut r = b.to_vec();
    project_out(kernel, &mut r);
    let b_norm = norm(&r);
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return Ok((
            x,
            SolveReport {
                iterations: 0,
                converged: true,
                residual_history: Vec::new(),
                wall_time: start.elapsed(),
                ritz: None,
                excursions: Vec::new(),
            },
        ));
    }

    let mut z = precond.apply(&r);
    project_out(kernel, &mut z);
    let mut rz = dot(&r, &z);
    if rz <= 0.0 {
        return Err(Error::Breakdown(format!(
            "preconditioner produced nonpositive inner product {rz:.3e} on the initial residual"
        )));
    }
    let mut p = z.clone();
    let mut history = Vec::new();
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    for it in 0..maxit {
        let q = op.apply(&p);
        let pq = dot(&p, &q);
        if pq <= 0.0 {
            return Err(Error::Breakdown(format!(
                "operator produced nonpositive curvature {pq:.3e} at iteration {it}"
            )));
        }
        let alpha = rz / pq;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &q, &mut r);
        alphas.push(alpha);
        let rel = norm(&r) / b_norm;
        history.push(rel);
        iterations = it + 1;
        if rel <= tol {
            converged = true;
            break;
        }
        z = precond.apply(&r);
        project_out(kernel, &mut z);
        let rz_new = dot(&r, &z);
        if rz_new <= 0.0 {
            return Err(Error::Breakdown(format!(
                "preconditioner produced nonpositive inner product {rz_new:.3e} at iteration {it}"
            )));
        }
        let beta = rz_new / rz;
        betas.push(beta);
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }

    project_out(kernel, &mut x);
    let ritz = if want_ritz && !alphas.is_empty() {
        Some(ritz_extremes(&alphas, &betas))
    } else {
        None
    };
    let mut excursions = Vec::new();
    for i in 1..history.len() {
        if history[i] > 10.0 * history[i - 1] {
            excursions.push(i);
        }
    }
    Ok((
        x,
        SolveReport {
            iterations,
            converged,
            residual_history: history,
            wall_time: start.elapsed(),
            ritz,
            excursions,
        },
    ))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Extremal eigenvalues of the Lanczos tridiagonal built from the conjugate
/// gradient coefficients; estimates the spectrum of the preconditioned
/// operator restricted to the Krylov space.
fn ritz_extremes(alphas: &[f64], betas: &[f64]) -> (f64, f64) {
    let m = alphas.len();
    let mut diag = vec![0.0; m];
    let mut off = vec![0.0; m.saturating_sub(1)];
    for j in 0..m {
        diag[j] = 1.0 / alphas[j];
        if j > 0 {
            diag[j] += betas[j - 1] / alphas[j - 1];
        }
        if j + 1 < m && j < betas.len() {
            off[j] = betas[j].sqrt() / alphas[j];
        }
    }
    tridiag_extreme_eigs(&diag, &off)
}

/// Smallest and largest eigenvalue of a symmetric tridiagonal matrix by
/// Sturm-sequence bisection.
fn tridiag_extreme_eigs(diag: &[f64], off: &[f64]) -> (f64, f64) {
    let n = diag.len();
    // Gershgorin bounds.
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = (if i > 0 { off[i - 1].abs() } else { 0.0 })
            + (if i < n - 1 { off[i].abs() } else { 0.0 });
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    let count_below = |x: f64| -> usize {
        // Number of eigenvalues strictly below x via the Sturm sequence.
        let mut count = 0;
        let mut d = diag[0] - x;
        if d < 0.0 {
            count += 1;
        }
        for i in 1..n {
            let denom = if d.abs() < 1e-300 { 1e-300_f64.copysign(d) } else { d };
            d = diag[i] - x - off[i - 1] * off[i - 1] / denom;
            if d < 0.0 {
                count += 1;
            }
        }
        count
    };
    let bisect = |target: usize, mut a: f64, mut b: f64| -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if count_below(mid) > target {
                b = mid;
            } else {
                a = mid;
            }
            if (b - a) <= 1e-13 * b.abs().max(a.abs()).max(1e-30) {
                break;
            }
        }
        0.5 * (a + b)
    };
    let span = (hi - lo).max(1e-30);
    let lam_min = bisect(0, lo - 1e-12 * span, hi + 1e-12 * span);
    let lam_max = bisect(n - 1, lo - 1e-12 * span, hi + 1e-12 * span);
    (lam_min, lam_max)
}

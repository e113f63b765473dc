//! Material parameters and the compliance map of plane linear elasticity.

use crate::{Error, Result};

/// A symmetric 2x2 matrix value, used for stresses and strains.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SymMat2 {
    pub xx: f64,
    pub yy: f64,
    pub xy: f64,
}

impl SymMat2 {
    pub const ZERO: SymMat2 = SymMat2 { xx: 0.0, yy: 0.0, xy: 0.0 };
    pub const IDENTITY: SymMat2 = SymMat2 { xx: 1.0, yy: 1.0, xy: 0.0 };

    pub fn new(xx: f64, yy: f64, xy: f64) -> Self {
        SymMat2 { xx, yy, xy }
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy
    }

    /// Frobenius inner product; the off-diagonal entry counts twice.
    pub fn dot(&self, other: &SymMat2) -> f64 {
        self.xx * other.xx + self.yy * other.yy + 2.0 * self.xy * other.xy
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    /// Matrix-vector product with the underlying symmetric matrix.
    pub fn mul_vec(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.xx * v[0] + self.xy * v[1],
            self.xy * v[0] + self.yy * v[1],
        ]
    }

    pub fn scale(&self, s: f64) -> SymMat2 {
        SymMat2::new(s * self.xx, s * self.yy, s * self.xy)
    }

    pub fn add(&self, other: &SymMat2) -> SymMat2 {
        SymMat2::new(self.xx + other.xx, self.yy + other.yy, self.xy + other.xy)
    }

    pub fn sub(&self, other: &SymMat2) -> SymMat2 {
        SymMat2::new(self.xx - other.xx, self.yy - other.yy, self.xy - other.xy)
    }
}

/// Isotropic material given by the Lamé constants.
///
/// The shear modulus `mu` must be positive and `lambda` nonnegative; the
/// Poisson ratio `lambda / (2 (lambda + mu))` then lies in `[0, 1/2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaterialParams {
    mu: f64,
    lambda: f64,
}

impl MaterialParams {
    pub fn new(mu: f64, lambda: f64) -> Result<Self> {
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::InvalidMaterial(format!("mu must be positive, got {mu}")));
        }
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidMaterial(format!(
                "lambda must be nonnegative, got {lambda}"
            )));
        }
        Ok(MaterialParams { mu, lambda })
    }

    /// Build from the shear modulus and the Poisson ratio `nu` in `[0, 1/2)`.
    pub fn from_poisson(mu: f64, nu: f64) -> Result<Self> {
        if !(0.0..0.5).contains(&nu) {
            return Err(Error::InvalidMaterial(format!(
                "Poisson ratio must lie in [0, 0.5), got {nu}"
            )));
        }
        let lambda = 2.0 * mu * nu / (1.0 - 2.0 * nu);
        MaterialParams::new(mu, lambda)
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn poisson(&self) -> f64 {
        self.lambda / (2.0 * (self.lambda + self.mu))
    }

    /// Apply the compliance map,
    /// `A tau = (tau - lambda/(2 mu + 2 lambda) tr(tau) I) / (2 mu)`.
    ///
    /// This is the inverse of `tau = 2 mu eps + lambda tr(eps) I` in two
    /// dimensions; it is symmetric positive definite for admissible
    /// parameters and nearly singular in the trace direction as
    /// `lambda -> infinity`.
    pub fn compliance(&self, tau: &SymMat2) -> SymMat2 {
        let c = self.lambda / (2.0 * self.mu + 2.0 * self.lambda);
        let s = 1.0 / (2.0 * self.mu);
        let tr = tau.trace();
        SymMat2::new(
            s * (tau.xx - c * tr),
            s * (tau.yy - c * tr),
            s * tau.xy,
        )
    }

    /// The stiffness map `eps -> 2 mu eps + lambda tr(eps) I`.
    pub fn stiffness(&self, eps: &SymMat2) -> SymMat2 {
        let tr = eps.trace();
        SymMat2::new(
            2.0 * self.mu * eps.xx + self.lambda * tr,
            2.0 * self.mu * eps.yy + self.lambda * tr,
            2.0 * self.mu * eps.xy,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn compliance_of_zero_is_zero() {
        let m = MaterialParams::new(0.5, 1.0).unwrap();
        assert_eq!(m.compliance(&SymMat2::ZERO), SymMat2::ZERO);
    }

    #[test]
    fn compliance_of_trace_free_input_scales_by_inverse_shear() {
        // tau = [[0,1],[1,0]] with mu = 1/2: A tau = tau / (2 mu) = tau.
        let m = MaterialParams::new(0.5, 7.3).unwrap();
        let tau = SymMat2::new(0.0, 0.0, 1.0);
        let a = m.compliance(&tau);
        assert_relative_eq!(a.xy, 1.0, max_relative = 1e-15);
        assert_eq!(a.xx, 0.0);
        assert_eq!(a.yy, 0.0);
    }

    #[test]
    fn compliance_of_identity_has_closed_form() {
        // A(I) = I / (2 mu + 2 lambda); for mu = 1/2, lambda = 1 this is I/3.
        let m = MaterialParams::new(0.5, 1.0).unwrap();
        let a = m.compliance(&SymMat2::IDENTITY);
        assert_relative_eq!(a.xx, 1.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(a.yy, 1.0 / 3.0, max_relative = 1e-15);
        assert_eq!(a.xy, 0.0);
    }

    #[test]
    fn compliance_inverts_stiffness() {
        let m = MaterialParams::new(0.5, 1e6).unwrap();
        let eps = SymMat2::new(0.3, -1.2, 0.7);
        let back = m.compliance(&m.stiffness(&eps));
        assert_relative_eq!(back.xx, eps.xx, max_relative = 1e-9);
        assert_relative_eq!(back.yy, eps.yy, max_relative = 1e-9);
        assert_relative_eq!(back.xy, eps.xy, max_relative = 1e-12);
    }

    #[test]
    fn poisson_round_trip() {
        let m = MaterialParams::from_poisson(0.5, 0.4999).unwrap();
        assert_relative_eq!(m.poisson(), 0.4999, max_relative = 1e-12);
        assert_relative_eq!(m.lambda(), 0.4999 / (1.0 - 2.0 * 0.4999), max_relative = 1e-12);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(MaterialParams::new(0.0, 1.0).is_err());
        assert!(MaterialParams::new(1.0, -1.0).is_err());
        assert!(MaterialParams::from_poisson(1.0, 0.5).is_err());
    }
}

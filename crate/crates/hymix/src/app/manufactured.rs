//! Closed-form reference solution on the unit square.
//!
//! The displacement is
//! `u = (e^(x-y) x y (1-x)(1-y), sin(pi x) sin(pi y))`,
//! which vanishes on the boundary of `(0,1)^2`. Stress and load follow from
//! the constitutive law `sigma = 2 mu eps(u) + lambda tr(eps(u)) I` and the
//! balance equation `div sigma = f`.

use crate::material::{MaterialParams, SymMat2};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug)]
pub struct ManufacturedSolution {
    pub material: MaterialParams,
}

impl ManufacturedSolution {
    pub fn new(material: MaterialParams) -> Self {
        ManufacturedSolution { material }
    }

    pub fn displacement(&self, p: [f64; 2]) -> [f64; 2] {
        let [x, y] = p;
        [
            (x - y).exp() * x * y * (1.0 - x) * (1.0 - y),
            (PI * x).sin() * (PI * y).sin(),
        ]
    }

    /// Row-major gradient: `grad[i][j] = d u_i / d x_j`.
    pub fn gradient(&self, p: [f64; 2]) -> [[f64; 2]; 2] {
        let [x, y] = p;
        let e = (x - y).exp();
        let g = x * (1.0 - x);
        let h = y * (1.0 - y);
        let du1_dx = e * h * (1.0 - x - x * x);
        let du1_dy = e * g * (1.0 - 3.0 * y + y * y);
        let du2_dx = PI * (PI * x).cos() * (PI * y).sin();
        let du2_dy = PI * (PI * x).sin() * (PI * y).cos();
        [[du1_dx, du1_dy], [du2_dx, du2_dy]]
    }

    pub fn strain(&self, p: [f64; 2]) -> SymMat2 {
        let g = self.gradient(p);
        SymMat2::new(g[0][0], g[1][1], 0.5 * (g[0][1] + g[1][0]))
    }

    pub fn stress(&self, p: [f64; 2]) -> SymMat2 {
        self.material.stiffness(&self.strain(p))
    }

    /// The load `f = div sigma`, also the exact divergence of the stress.
    pub fn load(&self, p: [f64; 2]) -> [f64; 2] {
        let [x, y] = p;
        let mu = self.material.mu();
        let la = self.material.lambda();
        let e = (x - y).exp();
        let g = x * (1.0 - x);
        let h = y * (1.0 - y);
        let du1_dxx = -e * h * x * (3.0 + x);
        let du1_dyy = e * g * (-4.0 + 5.0 * y - y * y);
        let du1_dxy = e * (1.0 - x - x * x) * (1.0 - 3.0 * y + y * y);
        let s = (PI * x).sin() * (PI * y).sin();
        let du2_dxx = -PI * PI * s;
        let du2_dyy = -PI * PI * s;
        let du2_dxy = PI * PI * (PI * x).cos() * (PI * y).cos();
        [
            (2.0 * mu + la) * du1_dxx + mu * du1_dyy + (la + mu) * du2_dxy,
            (la + mu) * du1_dxy + mu * du2_dxx + (2.0 * mu + la) * du2_dyy,
        ]
    }
}

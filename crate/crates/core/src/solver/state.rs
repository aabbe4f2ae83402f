use crate::tensor::{Mat3, Vec2};

/// Number of reconstructed scalar variables per cell.
pub const NVARS: usize = 8;

/// Conserved and constitutive variables of one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellState {
    pub tau: f64,
    pub v: Vec2,
    pub e: f64,
    /// Left Cauchy–Green tensor, symmetric, `B13 = B23 = 0` in plane strain.
    pub b: Mat3,
}

impl CellState {
    pub fn rho(&self) -> f64 {
        1.0 / self.tau
    }

    /// Specific internal energy `e − ½|v|²`.
    pub fn eps(&self) -> f64 {
        self.e - 0.5 * self.v.norm_squared()
    }

    /// `(τ, vx, vy, e, Bxx, Bxy, Byy, Bzz)`.
    pub fn to_array(&self) -> [f64; NVARS] {
        let b = &self.b;
        [
            self.tau,
            self.v.x,
            self.v.y,
            self.e,
            b[(0, 0)],
            b[(0, 1)],
            b[(1, 1)],
            b[(2, 2)],
        ]
    }

    pub fn from_array(q: &[f64; NVARS]) -> Self {
        let b = Mat3::new(q[4], q[5], 0.0, q[5], q[6], 0.0, 0.0, 0.0, q[7]);
        Self {
            tau: q[0],
            v: Vec2::new(q[1], q[2]),
            e: q[3],
            b,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.tau.is_finite()
            && self.e.is_finite()
            && self.v.iter().all(|x| x.is_finite())
            && self.b.iter().all(|x| x.is_finite())
    }
}

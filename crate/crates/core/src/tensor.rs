//! Small dense tensor helpers shared by the constitutive and solver modules.
//!
//! Vectors live in the plane (`Vec2`); second-order tensors are stored as full
//! 3x3 matrices so the plane-strain out-of-plane entry keeps the 3D invariant
//! formulas intact.

use nalgebra::{Matrix2, Matrix3, Vector2};

pub type Vec2 = Vector2<f64>;
pub type Mat2 = Matrix2<f64>;
pub type Mat3 = Matrix3<f64>;

/// Counterclockwise rotation by 90 degrees.
#[inline]
pub fn perp(v: Vec2) -> Vec2 {
    Vec2::new(-v.y, v.x)
}

#[inline]
pub fn cross(a: Vec2, b: Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Embed an in-plane tensor into 3x3 storage with a zero out-of-plane row and column.
#[inline]
pub fn embed(m: &Mat2) -> Mat3 {
    Mat3::new(
        m[(0, 0)],
        m[(0, 1)],
        0.0,
        m[(1, 0)],
        m[(1, 1)],
        0.0,
        0.0,
        0.0,
        0.0,
    )
}

/// In-plane block of a 3x3 tensor.
#[inline]
pub fn in_plane(m: &Mat3) -> Mat2 {
    Mat2::new(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)])
}

#[inline]
pub fn deviatoric(m: &Mat3) -> Mat3 {
    m - Mat3::identity() * (m.trace() / 3.0)
}

/// Averages the off-diagonal pairs so the result is exactly symmetric.
#[inline]
pub fn symmetrize(m: &Mat3) -> Mat3 {
    (m + m.transpose()) * 0.5
}

/// Positive definiteness of a symmetric 3x3 tensor via leading principal minors.
pub fn is_spd(m: &Mat3) -> bool {
    let a = m[(0, 0)];
    let minor2 = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let det = m.determinant();
    a > 0.0 && minor2 > 0.0 && det > 0.0 && m.iter().all(|x| x.is_finite())
}

/// Frobenius norm.
#[inline]
pub fn norm(m: &Mat3) -> f64 {
    m.iter().map(|x| x * x).sum::<f64>().sqrt()
}

//! Cell updates: velocity gradient and the left Cauchy–Green tensor.

use nalgebra::{SMatrix, SVector};

use crate::mesh::{cell_volume, corner_vector};
use crate::tensor::{embed, Mat2, Mat3, Vec2};

/// `L = (1/|ω|) Σ_p v_p ⊗ (ln)_p`, i.e. `L_ij = ∂v_i/∂x_j`, embedded in 3×3.
pub fn velocity_gradient(x: &[Vec2; 3], v: &[Vec2; 3]) -> Mat3 {
    let area = cell_volume(x);
    let g: Mat2 = (0..3).map(|p| v[p] * corner_vector(x, p).transpose()).sum();
    embed(&(g / area))
}

/// Explicit Euler step `B + Δt (LB + BLᵀ)`.
pub fn update_b_first_order(b: &Mat3, l: &Mat3, dt: f64) -> Mat3 {
    let lb = l * b;
    b + (lb + lb.transpose()) * dt
}

// symmetric storage order: xx, yy, zz, xy, xz, yz
const SYM: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)];

fn sym_basis(k: usize) -> Mat3 {
    let (i, j) = SYM[k];
    let mut e = Mat3::zeros();
    e[(i, j)] = 1.0;
    e[(j, i)] = 1.0;
    e
}

fn pack(m: &Mat3) -> SVector<f64, 6> {
    SVector::<f64, 6>::from_fn(|k, _| m[SYM[k]])
}

fn unpack(v: &SVector<f64, 6>) -> Mat3 {
    let mut m = Mat3::zeros();
    for (k, &(i, j)) in SYM.iter().enumerate() {
        m[(i, j)] = v[k];
        m[(j, i)] = v[k];
    }
    m
}

/// Solves `B' − (Δt/2)(L'B' + B'L'ᵀ) = B + (Δt/2)(LB + BLᵀ)` for symmetric `B'`.
/// Returns `None` when the 6×6 system is singular.
pub fn update_b_crank_nicolson(b: &Mat3, l_n: &Mat3, l_np1: &Mat3, dt: f64) -> Option<Mat3> {
    let h = 0.5 * dt;
    let lb = l_n * b;
    let rhs = pack(&(b + (lb + lb.transpose()) * h));
    let mut a = SMatrix::<f64, 6, 6>::zeros();
    for k in 0..6 {
        let e = sym_basis(k);
        let le = l_np1 * e;
        a.set_column(k, &pack(&(e - (le + le.transpose()) * h)));
    }
    let sol = a.lu().solve(&rhs)?;
    sol.iter().all(|x| x.is_finite()).then(|| unpack(&sol))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spd() -> Mat3 {
        Mat3::new(1.3, 0.2, 0.0, 0.2, 0.8, 0.0, 0.0, 0.0, 1.1)
    }

    #[test]
    fn gradient_of_linear_field_is_exact() {
        let x = [
            Vec2::new(0.1, 0.0),
            Vec2::new(1.0, 0.3),
            Vec2::new(0.2, 0.9),
        ];
        let g = Mat2::new(0.5, -1.0, 2.0, 0.25);
        let v = x.map(|p| g * p + Vec2::new(3.0, 4.0));
        let l = velocity_gradient(&x, &v);
        assert!((l.fixed_view::<2, 2>(0, 0) - g).norm() < 1e-14);
        assert_eq!(l[(2, 2)], 0.0);
    }

    #[test]
    fn trivial_updates() {
        let b = spd();
        assert_eq!(update_b_first_order(&b, &Mat3::zeros(), 0.1), b);
        assert!(
            (update_b_crank_nicolson(&b, &Mat3::zeros(), &Mat3::zeros(), 0.1).unwrap() - b).norm()
                < 1e-15
        );
        let alpha = 0.3;
        let l = Mat3::identity() * alpha;
        assert!((update_b_first_order(&b, &l, 0.1) - b * (1.0 + 2.0 * alpha * 0.1)).norm() < 1e-15);
    }

    #[test]
    fn crank_nicolson_equals_deformation_push_forward() {
        // L^n = G on x^n and L^{n+1} = G F⁻¹ on x^{n+1} give B' = F B Fᵀ exactly
        let g = Mat3::new(0.4, -0.7, 0.0, 0.9, -0.2, 0.0, 0.0, 0.0, 0.0);
        let dt = 0.3;
        let f = Mat3::identity() + g * dt;
        let l1 = g * f.try_inverse().unwrap();
        let b = spd();
        let cn = update_b_crank_nicolson(&b, &g, &l1, dt).unwrap();
        assert!((cn - f * b * f.transpose()).norm() < 1e-14);
    }

    #[test]
    fn singular_system_is_reported() {
        // (Δt/2)·2α = 1 makes the operator vanish on the xx component
        let l = Mat3::from_diagonal(&nalgebra::Vector3::new(1.0, 0.0, 0.0));
        assert!(update_b_crank_nicolson(&spd(), &l, &l, 1.0).is_none());
    }

    #[test]
    fn rotation_preserves_determinant() {
        let w = Mat3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        let b = spd();
        let d0 = b.determinant();
        let step = |dt: f64| {
            (update_b_crank_nicolson(&b, &w, &w, dt)
                .unwrap()
                .determinant()
                - d0)
                .abs()
        };
        let euler = |dt: f64| (update_b_first_order(&b, &w, dt).determinant() - d0).abs();
        // CN is exactly a Cayley transform for constant antisymmetric L
        assert!(step(0.1) < 1e-14);
        assert!((euler(0.01) / euler(0.005) - 4.0).abs() < 0.1);
    }

    #[test]
    fn orders_against_exponential() {
        let l = Mat3::new(0.8, -1.1, 0.0, 0.6, -0.3, 0.0, 0.0, 0.0, 0.0);
        let b0 = spd();
        let t = 0.5;
        let f = (l * t).exp();
        let exact = f * b0 * f.transpose();
        let err = |n: usize, cn: bool| {
            let dt = t / n as f64;
            let mut b = b0;
            for _ in 0..n {
                b = if cn {
                    update_b_crank_nicolson(&b, &l, &l, dt).unwrap()
                } else {
                    update_b_first_order(&b, &l, dt)
                };
            }
            (b - exact).norm()
        };
        let slope = |cn: bool| (err(64, cn) / err(128, cn)).log2();
        assert!((slope(true) - 2.0).abs() < 0.1);
        assert!((slope(false) - 1.0).abs() < 0.1);
    }
}

//! Piecewise-linear reconstruction, Barth–Jespersen limiting and the local
//! space-time (ADER) predictor.

use rayon::prelude::*;

use crate::constitutive::{MaterialModel, StrainState};
use crate::mesh::{cell_volume, corner_vector, MeshGeometry, MeshTopology};
use crate::mood::SchemeLevel;
use crate::solver::state::{CellState, NVARS};
use crate::tensor::{embed, is_spd, Mat2, Mat3, Vec2};

/// Linear polynomial `q(x) = center + grad · (x − centroid)` per variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearPoly {
    pub center: [f64; NVARS],
    pub centroid: Vec2,
    pub grad: [Vec2; NVARS],
    /// Limiter factor already folded into `grad`.
    pub phi: [f64; NVARS],
}

impl LinearPoly {
    pub fn constant(center: [f64; NVARS], centroid: Vec2) -> Self {
        Self {
            center,
            centroid,
            grad: [Vec2::zeros(); NVARS],
            phi: [0.0; NVARS],
        }
    }

    pub fn eval(&self, x: Vec2) -> [f64; NVARS] {
        let d = x - self.centroid;
        std::array::from_fn(|k| self.center[k] + self.grad[k].dot(&d))
    }
}

/// Inverse normal matrix of a least-squares stencil, `None` when rank deficient.
fn normal_inverse(offsets: &[Vec2]) -> Option<Mat2> {
    if offsets.len() < 2 {
        return None;
    }
    let a: Mat2 = offsets.iter().map(|d| d * d.transpose()).sum();
    let tr = a.trace();
    if !(a.determinant() > 1e-10 * tr * tr) {
        return None;
    }
    a.try_inverse()
}

/// Gradient minimizing `Σ (q_j − q_c − g·(x_j − x_c))²` over the neighbours.
pub fn least_squares_gradient(xc: Vec2, qc: f64, neighbors: &[(Vec2, f64)]) -> Option<Vec2> {
    let offsets: Vec<Vec2> = neighbors.iter().map(|(x, _)| x - xc).collect();
    let inv = normal_inverse(&offsets)?;
    let rhs: Vec2 = offsets
        .iter()
        .zip(neighbors)
        .map(|(d, (_, q))| d * (q - qc))
        .sum();
    Some(inv * rhs)
}

/// Largest `φ ∈ [0, 1]` keeping `qc + φ g·(x_v − xc)` within `[qmin, qmax]` at
/// every vertex. A strict local extremum gets `φ = 0`.
pub fn barth_jespersen(
    qc: f64,
    grad: Vec2,
    xc: Vec2,
    vertices: &[Vec2],
    qmin: f64,
    qmax: f64,
) -> f64 {
    if qc >= qmax || qc <= qmin {
        return 0.0;
    }
    let mut phi: f64 = 1.0;
    for x in vertices {
        let delta = grad.dot(&(x - xc));
        if delta > 0.0 {
            phi = phi.min((qmax - qc) / delta);
        } else if delta < 0.0 {
            phi = phi.min((qmin - qc) / delta);
        }
    }
    phi.clamp(0.0, 1.0)
}

/// Reconstructs one cell at the given cascade level.
pub fn reconstruct_cell(
    topo: &MeshTopology,
    geom: &MeshGeometry,
    coords: &[Vec2],
    cells: &[CellState],
    cell: usize,
    level: SchemeLevel,
) -> LinearPoly {
    let xc = geom.cells[cell].centroid;
    let qc = cells[cell].to_array();
    if level == SchemeLevel::P0 {
        return LinearPoly::constant(qc, xc);
    }
    let nbrs = topo.stencil(cell);
    let offsets: Vec<Vec2> = nbrs.iter().map(|&j| geom.cells[j].centroid - xc).collect();
    let Some(inv) = normal_inverse(&offsets) else {
        log::debug!("cell {cell}: rank-deficient stencil, constant reconstruction");
        return LinearPoly::constant(qc, xc);
    };
    let qn: Vec<[f64; NVARS]> = nbrs.iter().map(|&j| cells[j].to_array()).collect();
    let verts = topo.cells[cell].map(|p| coords[p]);
    let mut poly = LinearPoly {
        center: qc,
        centroid: xc,
        grad: [Vec2::zeros(); NVARS],
        phi: [1.0; NVARS],
    };
    for k in 0..NVARS {
        let rhs: Vec2 = offsets
            .iter()
            .zip(&qn)
            .map(|(d, q)| d * (q[k] - qc[k]))
            .sum();
        let g = inv * rhs;
        if level == SchemeLevel::P1Bj {
            let (lo, hi) = qn
                .iter()
                .fold((qc[k], qc[k]), |(lo, hi), q| (lo.min(q[k]), hi.max(q[k])));
            // A flat stencil gives lo == hi == qc; nothing to limit.
            let phi = if hi - lo <= 0.0 {
                0.0
            } else {
                barth_jespersen(qc[k], g, xc, &verts, lo, hi)
            };
            poly.phi[k] = phi;
            poly.grad[k] = g * phi;
        } else {
            poly.grad[k] = g;
        }
    }
    poly
}

pub fn reconstruct(
    topo: &MeshTopology,
    geom: &MeshGeometry,
    coords: &[Vec2],
    cells: &[CellState],
    levels: &[SchemeLevel],
) -> Vec<LinearPoly> {
    (0..cells.len())
        .into_par_iter()
        .map(|c| reconstruct_cell(topo, geom, coords, cells, c, levels[c]))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardOptions {
    pub iterations: usize,
    pub tolerance: f64,
}

impl Default for PicardOptions {
    fn default() -> Self {
        Self {
            iterations: 2,
            tolerance: 1e-12,
        }
    }
}

/// Inputs the corrector needs from one cell at `t*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Predictor {
    /// Cell-centre state at `t*`.
    pub state: CellState,
    /// Velocity at each local vertex.
    pub corner_v: [Vec2; 3],
    /// Cauchy stress at each local vertex.
    pub corner_t: [Mat3; 3],
    /// Acoustic impedance `ρ a`.
    pub z: f64,
    /// Predicted vertex positions.
    pub x_star: [Vec2; 3],
    /// `false` when the space-time evolution failed and the `t^n` state is used.
    pub ok: bool,
}

/// Frozen `t^n` cell-centre values, used at first order and by `P0` cells.
pub fn first_order(
    material: &MaterialModel,
    state: &CellState,
    x: [Vec2; 3],
) -> Result<Predictor, crate::error::MaterialError> {
    let s = material.stress_state(state.tau, state.eps(), &state.b)?;
    Ok(Predictor {
        state: *state,
        corner_v: [state.v; 3],
        corner_t: [s.t; 3],
        z: s.a / state.tau,
        x_star: x,
        ok: true,
    })
}

fn vertex_stress(material: &MaterialModel, q: &[f64; NVARS]) -> Option<(CellState, Mat3)> {
    let cs = CellState::from_array(q);
    if !cs.is_finite() || !(cs.tau > 0.0) || !is_spd(&cs.b) {
        return None;
    }
    let s = StrainState::new(&cs.b).ok()?;
    let t = material.cauchy_stress(&s, cs.tau, cs.eps()).ok()?;
    Some((cs, t))
}

/// Cell-wise constant time derivative of `(τ, v, e, B)` from vertex states on
/// the triangle `x`.
fn rates(
    material: &MaterialModel,
    center: &[f64; NVARS],
    qv: &[[f64; NVARS]; 3],
    x: &[Vec2; 3],
) -> Option<[f64; NVARS]> {
    let area = cell_volume(x);
    if !(area > 0.0) {
        return None;
    }
    let cc = CellState::from_array(center);
    let mut lg = Mat2::zeros();
    let mut div_t = Vec2::zeros();
    let mut div_tv = 0.0;
    for (p, q) in qv.iter().enumerate() {
        let (cs, t) = vertex_stress(material, q)?;
        let ln = corner_vector(x, p);
        lg += cs.v * ln.transpose();
        let t2 = t.fixed_view::<2, 2>(0, 0).into_owned();
        div_t += t2 * ln;
        div_tv += (t2 * cs.v).dot(&ln);
    }
    lg /= area;
    div_t /= area;
    div_tv /= area;
    let l = embed(&lg);
    let bdot = l * cc.b + cc.b * l.transpose();
    let tau = cc.tau;
    let r = [
        tau * lg.trace(),
        tau * div_t.x,
        tau * div_t.y,
        tau * div_tv,
        bdot[(0, 0)],
        bdot[(0, 1)],
        bdot[(1, 1)],
        bdot[(2, 2)],
    ];
    r.iter().all(|v| v.is_finite()).then_some(r)
}

fn advance(q: &[f64; NVARS], rate: &[f64; NVARS], h: f64) -> [f64; NVARS] {
    std::array::from_fn(|k| q[k] + h * rate[k])
}

/// Local Picard iteration for the half-step state of one cell. Falls back to
/// the `t^n` centre values (with `ok = false`) when the evolution breaks down.
pub fn ader_predict(
    material: &MaterialModel,
    poly: &LinearPoly,
    x: &[Vec2; 3],
    dt: f64,
    opts: PicardOptions,
) -> Result<Predictor, crate::error::MaterialError> {
    let w: [[f64; NVARS]; 3] = std::array::from_fn(|p| poly.eval(x[p]));
    let half = 0.5 * dt;
    let mut rate = [0.0; NVARS];
    let mut x_star = *x;
    let mut failed = false;
    for _ in 0..opts.iterations {
        let qv = w.map(|q| advance(&q, &rate, half));
        let qc = advance(&poly.center, &rate, half);
        x_star = std::array::from_fn(|p| x[p] + Vec2::new(qv[p][1], qv[p][2]) * half);
        let Some(next) = rates(material, &qc, &qv, &x_star) else {
            failed = true;
            break;
        };
        let change = next
            .iter()
            .zip(&rate)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let size = next.iter().map(|a| a.abs()).fold(0.0, f64::max);
        rate = next;
        if change <= opts.tolerance * size {
            break;
        }
    }
    let fallback = |material: &MaterialModel| {
        let mut p = first_order(material, &CellState::from_array(&poly.center), *x)?;
        p.ok = false;
        Ok(p)
    };
    if failed {
        return fallback(material);
    }
    let qv = w.map(|q| advance(&q, &rate, half));
    let center = CellState::from_array(&advance(&poly.center, &rate, half));
    let mut corner_v = [Vec2::zeros(); 3];
    let mut corner_t = [Mat3::zeros(); 3];
    for p in 0..3 {
        let Some((cs, t)) = vertex_stress(material, &qv[p]) else {
            return fallback(material);
        };
        corner_v[p] = cs.v;
        corner_t[p] = t;
    }
    if !center.is_finite() || !(center.tau > 0.0) || !is_spd(&center.b) {
        return fallback(material);
    }
    let Ok(s) = material.stress_state(center.tau, center.eps(), &center.b) else {
        return fallback(material);
    };
    Ok(Predictor {
        state: center,
        corner_v,
        corner_t,
        z: s.a / center.tau,
        x_star,
        ok: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate::rectangle;
    use crate::mesh::{geometry::cell_vertices, refine_all};

    fn material() -> MaterialModel {
        MaterialModel::neo_hookean(1100.0, 1.7e7, 0.45).unwrap()
    }

    fn rest(m: &MaterialModel) -> CellState {
        let tau = 1.0 / m.rho0;
        CellState {
            tau,
            v: Vec2::zeros(),
            e: m.rest_internal_energy(&Mat3::identity(), tau).unwrap(),
            b: Mat3::identity(),
        }
    }

    #[test]
    fn gradient_of_constant_and_linear_fields() {
        let xc = Vec2::new(0.1, 0.2);
        let pts = [
            Vec2::new(1.0, 0.0),
            Vec2::new(-0.3, 0.8),
            Vec2::new(0.2, -1.1),
        ];
        let f = |x: Vec2| 2.0 * x.x + 3.0 * x.y + 1.0;
        let nb: Vec<(Vec2, f64)> = pts.iter().map(|&x| (x, 5.0)).collect();
        assert!(least_squares_gradient(xc, 5.0, &nb).unwrap().norm() < 1e-15);
        let nb: Vec<(Vec2, f64)> = pts.iter().map(|&x| (x, f(x))).collect();
        let g = least_squares_gradient(xc, f(xc), &nb).unwrap();
        assert!((g - Vec2::new(2.0, 3.0)).norm() < 1e-13);
    }

    #[test]
    fn rank_deficient_stencils() {
        let xc = Vec2::zeros();
        assert!(least_squares_gradient(xc, 0.0, &[(Vec2::new(1.0, 0.0), 1.0)]).is_none());
        let collinear = [(Vec2::new(1.0, 0.0), 1.0), (Vec2::new(-2.0, 0.0), -2.0)];
        assert!(least_squares_gradient(xc, 0.0, &collinear).is_none());
    }

    #[test]
    fn limiter_cases() {
        let xc = Vec2::zeros();
        let verts = [
            Vec2::new(1.0, 0.0),
            Vec2::new(-0.5, 0.8),
            Vec2::new(-0.5, -0.8),
        ];
        // linear data: vertex values lie inside the neighbour range
        assert_eq!(
            barth_jespersen(0.0, Vec2::new(1.0, 0.0), xc, &verts, -2.0, 2.0),
            1.0
        );
        assert_eq!(
            barth_jespersen(3.0, Vec2::new(1.0, 0.0), xc, &verts, 0.0, 3.0),
            0.0
        );
        assert_eq!(
            barth_jespersen(-1.0, Vec2::new(1.0, 0.0), xc, &verts, -1.0, 3.0),
            0.0
        );
        let phi = barth_jespersen(0.0, Vec2::new(2.0, 0.0), xc, &verts, -1.0, 1.0);
        assert!((phi - 0.5).abs() < 1e-15);
    }

    fn strip() -> crate::mesh::Mesh {
        rectangle(0.0, 5.0, 0.0, 1.0, 5, 1).unwrap()
    }

    fn states_from(
        m: &MaterialModel,
        mesh: &crate::mesh::Mesh,
        f: impl Fn(Vec2) -> f64,
    ) -> Vec<CellState> {
        let g = mesh.geometry().unwrap();
        g.cells
            .iter()
            .map(|c| CellState {
                tau: f(c.centroid),
                ..rest(m)
            })
            .collect()
    }

    #[test]
    fn linear_fields_are_reproduced_unlimited() {
        let m = material();
        let mesh = rectangle(0.0, 1.0, 0.0, 1.0, 4, 4).unwrap();
        let g = mesh.geometry().unwrap();
        let f = |x: Vec2| 1.0 + 0.2 * x.x - 0.1 * x.y;
        let cells = states_from(&m, &mesh, f);
        for c in 0..cells.len() {
            let p = reconstruct_cell(&mesh.topology, &g, &mesh.coords, &cells, c, SchemeLevel::P1);
            assert_eq!(p.eval(p.centroid)[0], cells[c].tau);
            if mesh.topology.neighbors(c).count() >= 2 {
                assert!((p.grad[0] - Vec2::new(0.2, -0.1)).norm() < 1e-12);
            }
            let q = reconstruct_cell(
                &mesh.topology,
                &g,
                &mesh.coords,
                &cells,
                c,
                SchemeLevel::P1Bj,
            );
            assert!((0.0..=1.0).contains(&q.phi[0]));
        }
    }

    #[test]
    fn limited_step_respects_stencil_bounds() {
        let m = material();
        let mesh = strip();
        assert_eq!(mesh.topology.num_cells(), 10);
        let g = mesh.geometry().unwrap();
        let cells = states_from(&m, &mesh, |x| if x.x < 2.5 { 1.0 } else { 2.0 });
        for c in 0..cells.len() {
            let p = reconstruct_cell(
                &mesh.topology,
                &g,
                &mesh.coords,
                &cells,
                c,
                SchemeLevel::P1Bj,
            );
            let vals: Vec<f64> = std::iter::once(c)
                .chain(mesh.topology.neighbors(c))
                .map(|j| cells[j].tau)
                .collect();
            let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            for x in cell_vertices(&mesh.topology, &mesh.coords, c) {
                let q = p.eval(x)[0];
                assert!(
                    q >= lo - 1e-12 && q <= hi + 1e-12,
                    "cell {c}: {q} not in [{lo}, {hi}]"
                );
            }
        }
    }

    #[test]
    fn isolated_spike_is_flattened() {
        let m = material();
        let mesh = rectangle(0.0, 3.0, 0.0, 3.0, 3, 3).unwrap();
        let g = mesh.geometry().unwrap();
        let mut cells = states_from(&m, &mesh, |x| 1.0 + 0.01 * x.x);
        let spike = (0..cells.len())
            .find(|&c| mesh.topology.neighbors(c).count() == 3)
            .unwrap();
        cells[spike].tau = 10.0;
        let p = reconstruct_cell(
            &mesh.topology,
            &g,
            &mesh.coords,
            &cells,
            spike,
            SchemeLevel::P1Bj,
        );
        assert_eq!(p.phi[0], 0.0);
        assert_eq!(p.grad[0], Vec2::zeros());
    }

    #[test]
    fn gradient_error_decreases_with_refinement() {
        let m = material();
        let f = |x: Vec2| (1.3 * x.x).sin() * (0.7 * x.y).cos() + 2.0;
        let grad = |x: Vec2| {
            Vec2::new(
                1.3 * (1.3 * x.x).cos() * (0.7 * x.y).cos(),
                -0.7 * (1.3 * x.x).sin() * (0.7 * x.y).sin(),
            )
        };
        let mut mesh = rectangle(0.0, 1.0, 0.0, 1.0, 4, 4).unwrap();
        let mut errs = Vec::new();
        for _ in 0..3 {
            let g = mesh.geometry().unwrap();
            let cells = states_from(&m, &mesh, f);
            let mut e: f64 = 0.0;
            for c in 0..cells.len() {
                if mesh.topology.neighbors(c).count() < 3 {
                    continue;
                }
                let p =
                    reconstruct_cell(&mesh.topology, &g, &mesh.coords, &cells, c, SchemeLevel::P1);
                e = e.max((p.grad[0] - grad(g.cells[c].centroid)).norm());
            }
            errs.push(e);
            mesh = refine_all(&mesh).unwrap();
        }
        assert!(
            errs[1] < 0.7 * errs[0] && errs[2] < 0.6 * errs[1],
            "{errs:?}"
        );
    }

    #[test]
    fn uniform_state_predictor_is_time_constant() {
        let m = material();
        let s = CellState {
            v: Vec2::new(3.0, -1.0),
            ..rest(&m)
        };
        let s = CellState {
            e: s.e + 0.5 * s.v.norm_squared(),
            ..s
        };
        let x = [
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.1),
            Vec2::new(0.2, 0.9),
        ];
        let poly = LinearPoly {
            phi: [1.0; NVARS],
            ..LinearPoly::constant(s.to_array(), crate::mesh::geometry::centroid(&x))
        };
        for dt in [0.0, 1e-4, 1e-2] {
            let p = ader_predict(&m, &poly, &x, dt, PicardOptions::default()).unwrap();
            assert!(p.ok);
            assert!((p.state.tau - s.tau).abs() <= 1e-15 * s.tau);
            assert!((p.state.v - s.v).norm() <= 1e-12);
            assert!((p.state.e - s.e).abs() <= 1e-12 * s.e);
            assert!((p.state.b - s.b).norm() <= 1e-14);
            for (k, xk) in x.iter().enumerate() {
                assert!((p.corner_v[k] - s.v).norm() <= 1e-12);
                assert!((p.x_star[k] - (xk + s.v * dt / 2.0)).norm() <= 1e-14);
            }
        }
    }

    #[test]
    fn divergence_free_velocity_keeps_specific_volume() {
        let m = material();
        let alpha = 2.0;
        let x = [
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 1.0),
        ];
        let xc = crate::mesh::geometry::centroid(&x);
        let base = rest(&m);
        let mut grad = [Vec2::zeros(); NVARS];
        grad[1] = Vec2::new(alpha, 0.0);
        grad[2] = Vec2::new(0.0, -alpha);
        let mut center = base.to_array();
        center[1] = alpha * xc.x;
        center[2] = -alpha * xc.y;
        let poly = LinearPoly {
            center,
            centroid: xc,
            grad,
            phi: [1.0; NVARS],
        };
        let dt = 1e-3;
        let p = ader_predict(&m, &poly, &x, dt, PicardOptions::default()).unwrap();
        assert!(p.ok);
        assert!(
            (p.state.tau - base.tau).abs() <= (alpha * dt).powi(2) * base.tau,
            "{} vs {}",
            p.state.tau,
            base.tau
        );
        // B picks up stretching along x at rate 2α
        assert!((p.state.b[(0, 0)] - (1.0 + alpha * dt)).abs() < 1e-2 * alpha * dt);
    }

    #[test]
    fn failed_prediction_falls_back() {
        let m = material();
        let x = [
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 1.0),
        ];
        let xc = crate::mesh::geometry::centroid(&x);
        let base = rest(&m);
        let mut grad = [Vec2::zeros(); NVARS];
        // steep specific-volume gradient drives vertex values negative
        grad[0] = Vec2::new(10.0 * base.tau, 0.0);
        let poly = LinearPoly {
            center: base.to_array(),
            centroid: xc,
            grad,
            phi: [1.0; NVARS],
        };
        let p = ader_predict(&m, &poly, &x, 1e-6, PicardOptions::default()).unwrap();
        assert!(!p.ok);
        assert_eq!(p.state, base);
    }
}

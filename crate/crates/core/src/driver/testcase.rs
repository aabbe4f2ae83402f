//! Built-in test cases: geometry, material, boundary conditions, initial
//! state and exact solutions where one exists.

use std::f64::consts::PI;

use crate::constitutive::MaterialModel;
use crate::error::SolverError;
use crate::mesh::{generate::rectangle, geometry::centroid, Mesh};
use crate::solver::{BcKind, CellState};
use crate::tensor::{Mat2, Mat3, Vec2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestCase {
    /// `[0,2]²` plate oscillating in its first mode with normal velocity 0 on the walls.
    SwingingPlate { u0: f64 },
    /// Free bar `[−0.03,0.03]×[−0.005,0.005]` loaded by its first bending mode.
    BerylliumPlate,
    /// `[0,1]×[0,6]` column clamped at the bottom with a uniform horizontal velocity.
    CantileverBeam { u0: f64 },
    /// Unit square translating uniformly with matching velocity on every side.
    UniformBlock { velocity: Vec2 },
    /// Unit square falling at `speed` onto the wall `y = 0` from height `gap`,
    /// sliding freely along its sides.
    ContactDrop { gap: f64, speed: f64 },
}

pub const PLATE_U0: f64 = 5e-4;
pub const BEAM_U0: f64 = 10.0;

const BE_ALPHA: f64 = 78.834;
const BE_A: f64 = 4.3369e-5;
const BE_OMEGA: f64 = 2.3597e5;
const BE_A1: f64 = 56.6368;
const BE_A2: f64 = 57.6455;
const BE_LENGTH: f64 = 0.06;

/// Initial state and wiring of a run.
#[derive(Debug, Clone)]
pub struct Setup {
    pub case: TestCase,
    pub mesh: Mesh,
    pub material: MaterialModel,
    pub bcs: Vec<(String, BcKind)>,
    pub cells: Vec<CellState>,
    pub t_final: f64,
    pub output_times: Vec<f64>,
    /// Extra snapshot every this many steps; 0 disables.
    pub output_every: usize,
}

impl TestCase {
    pub fn from_name(
        name: &str,
        amplitude: Option<f64>,
        velocity: Option<[f64; 2]>,
        gap: Option<f64>,
    ) -> Result<Self, SolverError> {
        Ok(match name {
            "swinging_plate" => Self::SwingingPlate {
                u0: amplitude.unwrap_or(PLATE_U0),
            },
            "beryllium_plate" => Self::BerylliumPlate,
            "cantilever_beam" => Self::CantileverBeam {
                u0: amplitude.unwrap_or(BEAM_U0),
            },
            "uniform_block" => {
                let [vx, vy] = velocity.unwrap_or([1.0, 0.5]);
                Self::UniformBlock {
                    velocity: Vec2::new(vx, vy),
                }
            }
            "contact_drop" => Self::ContactDrop {
                gap: gap.unwrap_or(0.01),
                speed: amplitude.unwrap_or(1.0),
            },
            other => return Err(SolverError::Config(format!("unknown test case `{other}`"))),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::SwingingPlate { .. } => "swinging_plate",
            Self::BerylliumPlate => "beryllium_plate",
            Self::CantileverBeam { .. } => "cantilever_beam",
            Self::UniformBlock { .. } => "uniform_block",
            Self::ContactDrop { .. } => "contact_drop",
        }
    }

    pub fn material(&self) -> MaterialModel {
        let m = match self {
            Self::BerylliumPlate => MaterialModel::neo_hookean(1845.0, 3.1827e11, 0.0539),
            _ => MaterialModel::neo_hookean(1100.0, 1.7e7, 0.45),
        };
        m.expect("built-in material is valid")
    }

    /// `(x0, x1, y0, y1)`.
    pub fn domain(&self) -> (f64, f64, f64, f64) {
        match self {
            Self::SwingingPlate { .. } => (0.0, 2.0, 0.0, 2.0),
            Self::BerylliumPlate => (-0.5 * BE_LENGTH, 0.5 * BE_LENGTH, -0.005, 0.005),
            Self::CantileverBeam { .. } => (0.0, 1.0, 0.0, 6.0),
            Self::UniformBlock { .. } => (0.0, 1.0, 0.0, 1.0),
            Self::ContactDrop { gap, .. } => (0.0, 1.0, *gap, 1.0 + gap),
        }
    }

    /// Squares per side of the default mesh.
    pub fn default_resolution(&self) -> (usize, usize) {
        match self {
            Self::SwingingPlate { .. } => (15, 15),
            Self::BerylliumPlate => (120, 20),
            Self::CantileverBeam { .. } => (8, 48),
            Self::UniformBlock { .. } => (8, 8),
            Self::ContactDrop { .. } => (6, 6),
        }
    }

    pub fn mesh(&self, nx: usize, ny: usize) -> Result<Mesh, SolverError> {
        let (x0, x1, y0, y1) = self.domain();
        Ok(rectangle(x0, x1, y0, y1, nx, ny)?)
    }

    pub fn default_mesh(&self) -> Result<Mesh, SolverError> {
        let (nx, ny) = self.default_resolution();
        self.mesh(nx, ny)
    }

    pub fn bcs(&self) -> Vec<(String, BcKind)> {
        let all = |k: BcKind| {
            ["bottom", "right", "top", "left"]
                .map(|t| (t.to_string(), k.clone()))
                .to_vec()
        };
        match self {
            Self::SwingingPlate { .. } => all(BcKind::PrescribedNormalVelocity { vn: 0.0 }),
            Self::BerylliumPlate => Vec::new(),
            Self::CantileverBeam { .. } => vec![("bottom".into(), BcKind::FixedPoint)],
            Self::UniformBlock { velocity } => all(BcKind::PrescribedVelocity {
                vx: velocity.x,
                vy: velocity.y,
            }),
            Self::ContactDrop { .. } => vec![
                ("bottom".into(), BcKind::contact([0.0, 0.0], [0.0, -1.0])),
                ("left".into(), BcKind::SymmetryPlane),
                ("right".into(), BcKind::SymmetryPlane),
            ],
        }
    }

    pub fn t_final(&self) -> f64 {
        match self {
            Self::SwingingPlate { .. } => PI / self.plate_omega(),
            Self::BerylliumPlate => 3e-5,
            Self::CantileverBeam { .. } => 1.5,
            Self::UniformBlock { .. } => 1.0,
            Self::ContactDrop { gap, speed } => gap / speed + 0.04,
        }
    }

    pub fn output_times(&self) -> Vec<f64> {
        match self {
            Self::CantileverBeam { .. } => vec![0.375, 0.75, 1.125, 1.5],
            _ => vec![self.t_final()],
        }
    }

    /// `ω = (π/2)√(2μ/ρ0)` of the swinging plate.
    pub fn plate_omega(&self) -> f64 {
        let m = self.material();
        0.5 * PI * (2.0 * m.mu / m.rho0).sqrt()
    }

    pub fn initial_velocity(&self, x: Vec2) -> Vec2 {
        match *self {
            Self::SwingingPlate { u0 } => plate_mode(x) * (self.plate_omega() * u0),
            Self::BerylliumPlate => Vec2::new(0.0, beryllium_velocity(x.x)),
            Self::CantileverBeam { u0 } => Vec2::new(u0, 0.0),
            Self::UniformBlock { velocity } => velocity,
            Self::ContactDrop { speed, .. } => Vec2::new(0.0, -speed),
        }
    }

    /// Unloaded state `B = I` with the cell mean of the initial velocity
    /// from edge-midpoint quadrature.
    pub fn setup_on(&self, mesh: Mesh, material: MaterialModel) -> Result<Setup, SolverError> {
        let tau = 1.0 / material.rho0;
        let b = Mat3::identity();
        let eps = material.rest_internal_energy(&b, tau)?;
        let cells = mesh
            .topology
            .cells
            .iter()
            .map(|tri| {
                let x = tri.map(|p| mesh.coords[p]);
                let v = (0..3)
                    .map(|k| self.initial_velocity((x[k] + x[(k + 1) % 3]) * 0.5))
                    .sum::<Vec2>()
                    / 3.0;
                CellState {
                    tau,
                    v,
                    e: eps + 0.5 * v.norm_squared(),
                    b,
                }
            })
            .collect();
        Ok(Setup {
            case: *self,
            mesh,
            material,
            bcs: self.bcs(),
            cells,
            t_final: self.t_final(),
            output_times: self.output_times(),
            output_every: 0,
        })
    }

    pub fn setup(&self) -> Result<Setup, SolverError> {
        self.setup_on(self.default_mesh()?, self.material())
    }
}

/// `(−sin(πx/2) cos(πy/2), cos(πx/2) sin(πy/2))`.
fn plate_mode(x: Vec2) -> Vec2 {
    let (a, b) = (0.5 * PI * x.x, 0.5 * PI * x.y);
    Vec2::new(-a.sin() * b.cos(), a.cos() * b.sin())
}

pub fn beryllium_velocity(x: f64) -> f64 {
    let xp = BE_ALPHA * (x + 0.5 * BE_LENGTH);
    BE_A * BE_OMEGA * (BE_A1 * (xp.sinh() + xp.sin()) - BE_A2 * (xp.cosh() + xp.cos()))
}

/// Swinging plate exact solution with displacement `U0 sin(ωt)·mode(X)`;
/// evaluated with `X = x`, which is exact whenever the displacement vanishes
/// (`t = 0` and `t = π/ω`).
#[derive(Debug, Clone, Copy)]
pub struct PlateExact {
    pub u0: f64,
    pub omega: f64,
    pub material: MaterialModel,
}

impl PlateExact {
    pub fn new(case: &TestCase) -> Option<Self> {
        match *case {
            TestCase::SwingingPlate { u0 } => Some(Self {
                u0,
                omega: case.plate_omega(),
                material: case.material(),
            }),
            _ => None,
        }
    }

    pub fn velocity(&self, x: Vec2, t: f64) -> Vec2 {
        plate_mode(x) * (self.omega * self.u0 * (self.omega * t).cos())
    }

    pub fn b(&self, x: Vec2, t: f64) -> Mat3 {
        let (a, b) = (0.5 * PI * x.x, 0.5 * PI * x.y);
        let s = self.u0 * (self.omega * t).sin() * 0.5 * PI;
        let grad = Mat2::new(
            -a.cos() * b.cos(),
            a.sin() * b.sin(),
            -a.sin() * b.sin(),
            a.cos() * b.cos(),
        ) * s;
        let f = Mat2::identity() + grad;
        let mut bb = Mat3::identity();
        bb.fixed_view_mut::<2, 2>(0, 0)
            .copy_from(&(f * f.transpose()));
        bb
    }

    pub fn stress(&self, x: Vec2, t: f64) -> Result<Mat3, SolverError> {
        let b = self.b(x, t);
        let tau = b.determinant().sqrt() / self.material.rho0;
        let eps = self.material.rest_internal_energy(&b, tau)?;
        Ok(self.material.stress_state(tau, eps, &b)?.t)
    }
}

pub fn cell_centroids(mesh_topo: &crate::mesh::MeshTopology, coords: &[Vec2]) -> Vec<Vec2> {
    mesh_topo
        .cells
        .iter()
        .map(|tri| centroid(&tri.map(|p| coords[p])))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plate_constants() {
        let case = TestCase::SwingingPlate { u0: PLATE_U0 };
        let m = case.material();
        assert!((m.mu / 5.86207e6 - 1.0).abs() < 1e-6);
        assert!((case.plate_omega() - 162.167_564).abs() < 1e-5);
        assert!((case.t_final() - 1.937_250_9e-2).abs() < 1e-9);
    }

    #[test]
    fn beryllium_profile_at_left_end() {
        assert!((beryllium_velocity(-0.03) / -1_179.863_068 - 1.0).abs() < 1e-8);
    }

    #[test]
    fn unloaded_initial_state() {
        for case in [
            TestCase::SwingingPlate { u0: PLATE_U0 },
            TestCase::BerylliumPlate,
            TestCase::CantileverBeam { u0: BEAM_U0 },
            TestCase::UniformBlock {
                velocity: Vec2::new(1.0, 0.0),
            },
            TestCase::ContactDrop {
                gap: 0.01,
                speed: 1.0,
            },
        ] {
            let s = case.setup().unwrap();
            assert_eq!(s.cells.len(), s.mesh.topology.num_cells());
            for c in &s.cells {
                assert_eq!(c.b, Mat3::identity());
                let st = s.material.stress_state(c.tau, c.eps(), &c.b).unwrap();
                assert!(
                    st.p.abs() < 1e-6 * s.material.mu,
                    "{}: p = {}",
                    case.name(),
                    st.p
                );
            }
            assert_eq!(
                TestCase::from_name(case.name(), None, None, None)
                    .unwrap()
                    .name(),
                case.name()
            );
        }
        assert!(TestCase::from_name("nope", None, None, None).is_err());
    }

    #[test]
    fn plate_exact_solution_at_final_time() {
        let case = TestCase::SwingingPlate { u0: PLATE_U0 };
        let ex = PlateExact::new(&case).unwrap();
        let tf = case.t_final();
        let x = Vec2::new(0.3, 1.1);
        assert!((ex.velocity(x, tf) + ex.velocity(x, 0.0)).norm() < 1e-15);
        assert!((ex.b(x, tf) - Mat3::identity()).norm() < 1e-15);
        assert!(ex.stress(x, tf).unwrap().norm() < 1e-6);
        // quarter period: the plate is deformed
        let b = ex.b(x, 0.5 * tf);
        assert!((b - Mat3::identity()).norm() > 1e-4);
    }
}

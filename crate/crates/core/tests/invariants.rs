use hyperlag_core::driver::{RunOptions, Simulation, TestCase};
use hyperlag_core::mesh::generate::rectangle;
use hyperlag_core::mesh::{refine_all, MeshGeometry};
use hyperlag_core::mood::{rdmp_bounds, DetectionCriteria};
use hyperlag_core::solver::update::update_b_crank_nicolson;
use hyperlag_core::tensor::{is_spd, Mat3, Vec2};
use proptest::prelude::*;

fn small_l() -> impl Strategy<Value = Mat3> {
    proptest::collection::vec(-1.0f64..1.0, 4)
        .prop_map(|v| Mat3::new(v[0], v[1], 0.0, v[2], v[3], 0.0, 0.0, 0.0, 0.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn refinement_keeps_area_and_topology(nx in 1usize..6, ny in 1usize..6, w in 0.1f64..3.0, h in 0.1f64..3.0) {
        let m = rectangle(0.0, w, 0.0, h, nx, ny).unwrap();
        let r = refine_all(&m).unwrap();
        let a0 = MeshGeometry::compute(&m.topology, &m.coords).unwrap().total_volume();
        let a1 = MeshGeometry::compute(&r.topology, &r.coords).unwrap().total_volume();
        prop_assert!((a0 - w * h).abs() <= 1e-12 * w * h);
        prop_assert!((a1 - a0).abs() <= 1e-12 * a0);
        prop_assert_eq!(r.topology.num_cells(), 4 * m.topology.num_cells());
        prop_assert_eq!(r.topology.euler_characteristic(), 1);
        prop_assert_eq!(r.topology.boundary_faces.len(), 2 * m.topology.boundary_faces.len());
    }

    #[test]
    fn crank_nicolson_keeps_b_symmetric_positive(l0 in small_l(), l1 in small_l(), dt in 0.0f64..0.2) {
        let b = Mat3::new(1.2, 0.1, 0.0, 0.1, 0.9, 0.0, 0.0, 0.0, 1.0);
        let b1 = update_b_crank_nicolson(&b, &l0, &l1, dt).unwrap();
        prop_assert!((b1 - b1.transpose()).norm() <= 1e-14 * b1.norm());
        prop_assert!(is_spd(&b1));
        prop_assert_eq!(b1[(2, 2)], 1.0);
    }

    #[test]
    fn rdmp_bounds_enclose_their_data(v in proptest::collection::vec(0.1f64..10.0, 1..12)) {
        let (lo, hi) = rdmp_bounds(&v, &DetectionCriteria::default());
        prop_assert!(v.iter().all(|x| *x > lo && *x < hi));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn free_block_conserves_for_random_velocities(seed in proptest::collection::vec(-1.0f64..1.0, 32)) {
        let case = TestCase::UniformBlock { velocity: Vec2::zeros() };
        let mesh = case.mesh(4, 4).unwrap();
        let mut s = case.setup_on(mesh, case.material()).unwrap();
        s.bcs.clear();
        for (i, c) in s.cells.iter_mut().enumerate() {
            c.v = Vec2::new(seed[i % 32], seed[(i + 7) % 32]) * 1e-3;
        }
        let mut sim = Simulation::new(s, RunOptions::default()).unwrap();
        let t0 = sim.totals().unwrap();
        let scale: f64 = sim.cells.iter().zip(&sim.masses.cell_mass).map(|(c, m)| m * c.v.norm()).sum();
        for _ in 0..10 {
            let r = sim.advance(f64::INFINITY).unwrap();
            prop_assert!(r.min_entropy >= -1e-14);
        }
        let t = sim.totals().unwrap();
        prop_assert_eq!(t.mass.to_bits(), t0.mass.to_bits());
        prop_assert!((t.momentum - t0.momentum).norm() <= 1e-10 * scale);
        prop_assert!((t.energy - t0.energy).abs() <= 1e-10 * t0.energy.abs());
    }
}

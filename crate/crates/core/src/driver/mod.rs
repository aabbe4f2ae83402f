//! Run orchestration: configuration, test cases, time stepping, diagnostics
//! and output.

pub mod config;
pub mod convergence;
pub mod diagnostics;
pub mod output;
pub mod run;
pub mod testcase;
pub mod timestep;

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

pub use config::RunConfig;
pub use convergence::{convergence_study, ConvergenceLevel, ConvergenceTable};
pub use diagnostics::Totals;
pub use output::{DiagRow, DiagWriter, DIAG_HEADER};
pub use run::{ContactEvent, ContactKind, RunOptions, Simulation, StepReport};
pub use testcase::{Setup, TestCase};
pub use timestep::{DtBranch, TimeStepControl};

use crate::error::SolverError;
use crate::mesh::{io, refine_all, Mesh};
use crate::mood::{DetectionCriteria, SchemeLevel};
use crate::reconstruct::PicardOptions;
use crate::solver::SchemeOptions;

impl RunConfig {
    pub fn test_case(&self) -> Result<TestCase, SolverError> {
        let t = &self.testcase;
        TestCase::from_name(&t.name, t.amplitude, t.velocity, t.gap)
    }

    /// Mesh from the `[mesh]` section, before refinement.
    pub fn base_mesh(&self, case: &TestCase) -> Result<Mesh, SolverError> {
        let m = &self.mesh;
        match (&m.file, m.nx, m.ny) {
            (Some(f), _, _) => io::read(&self.resolve(f)),
            (None, None, None) => case.default_mesh(),
            (None, nx, ny) => {
                let (dx, dy) = case.default_resolution();
                case.mesh(nx.unwrap_or(dx), ny.unwrap_or(dy))
            }
        }
    }

    pub fn setup_with_refinement(&self, refine: usize) -> Result<Setup, SolverError> {
        let case = self.test_case()?;
        let mut mesh = self.base_mesh(&case)?;
        for _ in 0..refine {
            mesh = refine_all(&mesh)?;
        }
        let material = match &self.material {
            Some(m) => m.build()?,
            None => case.material(),
        };
        let mut s = case.setup_on(mesh, material)?;
        if !self.bc.is_empty() {
            s.bcs = self
                .bc
                .iter()
                .map(|b| (b.tag.clone(), b.kind.clone()))
                .collect();
        }
        if let Some(t) = self.run.t_final {
            s.t_final = t;
            s.output_times.retain(|&x| x <= t);
        }
        if !self.run.output_times.is_empty() {
            s.output_times = self.run.output_times.clone();
        }
        s.output_every = self.run.output_every;
        Ok(s)
    }

    pub fn setup(&self) -> Result<Setup, SolverError> {
        self.setup_with_refinement(self.mesh.refine)
    }

    pub fn options(&self) -> RunOptions {
        let r = &self.run;
        RunOptions {
            scheme: SchemeOptions {
                order: r.order,
                picard: PicardOptions {
                    iterations: r.picard_iterations,
                    ..PicardOptions::default()
                },
                cn_velocity: r.cn_velocity,
            },
            cascade: r.cascade,
            criteria: DetectionCriteria {
                rdmp: r.rdmp,
                relative_floor: r.rdmp_relative,
                vertex_extrapolation: r.rdmp_vertex_extrapolation,
                involution: r.involution,
                involution_increment: r.involution_increment,
                ..DetectionCriteria::default()
            },
            control: TimeStepControl {
                c_cfl: r.c_cfl,
                c_v: r.c_v,
                c_i: r.c_i,
            },
            max_steps: r.max_steps,
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        self.resolve(&self.run.output_dir)
    }
}

/// What a finished run reports.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub steps: usize,
    pub time: f64,
    pub delta_h: f64,
    /// Mean over steps of the troubled-cell fraction.
    pub mean_troubled: f64,
    pub max_p0: usize,
    pub min_entropy: f64,
    pub events: Vec<ContactEvent>,
    pub snapshots: Vec<PathBuf>,
}

pub fn diag_row(sim: &Simulation, report: Option<&StepReport>) -> Result<DiagRow, SolverError> {
    let totals = sim.totals()?;
    let count = |l: SchemeLevel| sim.levels.iter().filter(|x| **x == l).count();
    Ok(DiagRow {
        step: sim.step,
        time: sim.time,
        dt: report.map_or(0.0, |r| r.dt),
        branch: report
            .and_then(|r| r.branch)
            .map_or_else(|| "init".to_string(), |b| b.to_string()),
        totals,
        delta_h: sim.delta_h(&totals),
        troubled: report.map_or(0, |r| r.stats.troubled),
        level_p0: count(SchemeLevel::P0),
        level_p1bj: count(SchemeLevel::P1Bj),
        level_p1: count(SchemeLevel::P1),
    })
}

pub fn write_snapshot(sim: &Simulation, path: &Path) -> Result<(), SolverError> {
    let text = output::vtk_snapshot(
        &sim.topo,
        &sim.coords,
        &sim.node_v,
        &sim.cells,
        &sim.levels,
        &sim.material,
        sim.time,
    )?;
    std::fs::write(path, text)?;
    Ok(())
}

/// Full run with `diag.csv` and snapshots in `out_dir`.
pub fn execute(
    setup: Setup,
    options: RunOptions,
    out_dir: &Path,
) -> Result<RunSummary, SolverError> {
    std::fs::create_dir_all(out_dir)?;
    let t_final = setup.t_final;
    let every = setup.output_every;
    let mut stops: Vec<f64> = setup
        .output_times
        .iter()
        .copied()
        .filter(|&t| t > 0.0 && t < t_final)
        .collect();
    stops.push(t_final);
    stops.sort_by(f64::total_cmp);
    stops.dedup();
    let mut sim = Simulation::new(setup, options)?;
    let mut diag = DiagWriter::new(BufWriter::new(File::create(out_dir.join("diag.csv"))?))?;
    diag.row(&diag_row(&sim, None)?)?;
    let mut snapshots = Vec::new();
    let snap = |sim: &Simulation, snapshots: &mut Vec<PathBuf>| -> Result<(), SolverError> {
        let p = out_dir.join(format!("snapshot_{:04}.vtk", snapshots.len()));
        write_snapshot(sim, &p)?;
        snapshots.push(p);
        Ok(())
    };
    snap(&sim, &mut snapshots)?;
    let mut troubled_sum = 0.0;
    let mut max_p0 = 0;
    let mut min_entropy = f64::INFINITY;
    let n = sim.cells.len() as f64;
    for stop in stops {
        if stop <= sim.time {
            continue;
        }
        sim.run_to(stop, |s, r| {
            troubled_sum += r.stats.troubled as f64 / n;
            max_p0 = max_p0.max(r.stats.count_p0);
            min_entropy = min_entropy.min(r.min_entropy);
            diag.row(&diag_row(s, Some(r))?)?;
            if every > 0 && s.step % every == 0 && s.time < stop {
                snap(s, &mut snapshots)?;
            }
            Ok(())
        })?;
        snap(&sim, &mut snapshots)?;
    }
    diag.flush()?;
    let totals = sim.totals()?;
    Ok(RunSummary {
        steps: sim.step,
        time: sim.time,
        delta_h: sim.delta_h(&totals),
        mean_troubled: if sim.step > 0 {
            troubled_sum / sim.step as f64
        } else {
            0.0
        },
        max_p0,
        min_entropy,
        events: sim.events.clone(),
        snapshots,
    })
}

pub fn execute_config(cfg: &RunConfig) -> Result<RunSummary, SolverError> {
    execute(cfg.setup()?, cfg.options(), &cfg.output_dir())
}

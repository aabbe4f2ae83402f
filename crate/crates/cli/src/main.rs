use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use hyperlag_core::driver::{self, RunConfig};
use hyperlag_core::mesh::{io, MeshGeometry};

#[derive(Parser)]
#[command(
    name = "solver",
    version,
    about = "Lagrangian ADER-MOOD solver for 2D hyper-elasticity"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configuration and write diag.csv and VTK snapshots.
    Run { config: PathBuf },
    /// Run a configuration on successively refined meshes and print errors and orders.
    Convergence {
        config: PathBuf,
        #[arg(long, default_value_t = 3)]
        levels: usize,
    },
    /// Print mesh statistics.
    MeshInfo { mesh: PathBuf },
}

fn run(config: PathBuf) -> Result<()> {
    let cfg = RunConfig::load(&config).with_context(|| format!("loading {}", config.display()))?;
    let s = driver::execute_config(&cfg)?;
    println!("steps          {}", s.steps);
    println!("time           {:e}", s.time);
    println!("delta_h        {:e}", s.delta_h);
    println!("mean troubled  {:.4}", s.mean_troubled);
    println!("max P0 cells   {}", s.max_p0);
    println!("min entropy    {:e}", s.min_entropy);
    for e in &s.events {
        println!(
            "{:?} at step {} t = {:e}: {} nodes, |d| <= {:e}",
            e.kind,
            e.step,
            e.time,
            e.nodes.len(),
            e.distance
        );
    }
    println!("output         {}", cfg.output_dir().display());
    Ok(())
}

fn convergence(config: PathBuf, levels: usize) -> Result<()> {
    let cfg = RunConfig::load(&config).with_context(|| format!("loading {}", config.display()))?;
    anyhow::ensure!(levels >= 1, "at least one level is required");
    let base = cfg.mesh.refine;
    let table = driver::convergence_study(levels, cfg.options(), |k| {
        cfg.setup_with_refinement(base + k)
    })?;
    print!("{}", table.to_text());
    Ok(())
}

fn mesh_info(path: PathBuf) -> Result<()> {
    let mesh = io::read(&path).with_context(|| format!("reading {}", path.display()))?;
    let topo = &mesh.topology;
    let geom = MeshGeometry::compute(topo, &mesh.coords)?;
    let lmax = geom.cells.iter().map(|g| g.char_length).fold(0.0, f64::max);
    println!("nodes          {}", topo.num_nodes);
    println!("cells          {}", topo.num_cells());
    println!("faces          {}", topo.num_faces());
    println!("boundary faces {}", topo.boundary_faces.len());
    println!("euler char     {}", topo.euler_characteristic());
    println!("area           {:e}", geom.total_volume());
    println!("L_c min/max    {:e} {:e}", geom.min_char_length(), lmax);
    for tag in topo.tags() {
        let n = topo.boundary_faces.iter().filter(|b| b.tag == tag).count();
        println!("tag {tag:<10} {n} faces");
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Run { config } => run(config),
        Command::Convergence { config, levels } => convergence(config, levels),
        Command::MeshInfo { mesh } => mesh_info(mesh),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

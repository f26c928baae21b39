use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use ellg::io::{parse_config, preset, write_energy_csv, write_mesh_vtk, write_vtk_snapshot, Overrides};
use ellg::mesh::audit_angle_condition;
use ellg::{EllgError, SimConfig, Simulation};

#[derive(Parser)]
#[command(name = "ellg-sim", version, about = "Eddy-current LLG finite-element simulator")]
struct Cli {
    /// More log output (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation and write the energy log.
    Run(RunArgs),
    /// Report the angle condition of a preset mesh.
    AuditMesh {
        #[command(flatten)]
        source: Source,
        /// Also write the mesh as legacy VTK.
        #[arg(long)]
        vtk: Option<PathBuf>,
    },
    /// Run the built-in invariant checks.
    Check {
        #[arg(long, value_enum, default_value = "invariants")]
        suite: Suite,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Invariants,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    tend: Option<f64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    vtk_every: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
}

fn load(source: &Source) -> ellg::Result<SimConfig> {
    match (&source.preset, &source.config) {
        (Some(name), _) => preset(name),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| EllgError::Io {
                path: path.clone(),
                source: e,
            })?;
            parse_config(&text)
        }
        (None, None) => unreachable!("clap enforces a source"),
    }
}

fn ensure_dir(dir: &Path) -> ellg::Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| EllgError::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn run(args: &RunArgs) -> ellg::Result<()> {
    let overrides = Overrides {
        theta: args.theta,
        dt: args.dt,
        t_end: args.tend,
        out_dir: args.out_dir.clone(),
        vtk_every: args.vtk_every,
        tol: args.tol,
    };
    let cfg = overrides.apply(load(&args.source)?)?;
    let out_dir = cfg.output.out_dir.clone().unwrap_or_else(|| PathBuf::from("out"));
    ensure_dir(&out_dir)?;
    let start = Instant::now();
    let mut sim = Simulation::new(&cfg)?;
    for w in sim.warnings() {
        eprintln!("warning: {w}");
    }
    println!(
        "omega nodes V = {}, LLG system {n}x{n}, eddy system {e}x{e}, {} steps",
        sim.operators().num_omega_nodes(),
        sim.num_steps(),
        n = sim.llg_system_size(),
        e = sim.eddy_system_size(),
    );
    let family = cfg.eddy.family;
    let every = cfg.output.vtk_every;
    let write_snapshot = |sim: &Simulation| -> ellg::Result<()> {
        let path = out_dir.join(format!("state_{:05}.vtk", sim.current_step()));
        write_vtk_snapshot(sim.mesh(), family, sim.magnetization(), sim.field(), &path)
    };
    if every > 0 {
        write_snapshot(&sim)?;
    }
    while !sim.is_finished() {
        let rec = *sim.step()?;
        info!("t = {:.4} exch = {:.6e} h_l2 = {:.6e} lhs = {:.6e}", rec.t, rec.exch, rec.h_l2, rec.lhs_total);
        if every > 0 && sim.current_step() % every == 0 {
            write_snapshot(&sim)?;
        }
    }
    let csv = out_dir.join("energy.csv");
    write_energy_csv(sim.records(), &csv)?;
    let last = sim.records().last().expect("records");
    let st = sim.solver_stats();
    println!(
        "done in {:.1}s: lhs_total = {:.6e}, LLG iterations {} ({} dense fallbacks), CG iterations {}",
        start.elapsed().as_secs_f64(),
        last.lhs_total,
        st.llg_iterations,
        st.llg_dense_fallbacks,
        st.eddy_iterations
    );
    println!("energy log: {}", csv.display());
    Ok(())
}

fn audit(source: &Source, vtk: Option<&Path>) -> ellg::Result<()> {
    let cfg = load(source)?;
    let mesh = cfg.build_mesh()?;
    println!(
        "nodes {}, tets {}, edges {}, omega nodes {}, omega tets {}",
        mesh.num_nodes(),
        mesh.tets().len(),
        mesh.num_edges(),
        mesh.num_omega_nodes(),
        mesh.omega_tets().len()
    );
    println!("omega: {}", audit_angle_condition(&mesh, true));
    println!("Omega: {}", audit_angle_condition(&mesh, false));
    if let Some(path) = vtk {
        write_mesh_vtk(&mesh, path)?;
        println!("mesh written to {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let result = match &cli.command {
        Command::Run(args) => run(args),
        Command::AuditMesh { source, vtk } => audit(source, vtk.as_deref()),
        Command::Check { suite: Suite::Invariants } => {
            let results = ellg::check::run_invariant_suite();
            for r in &results {
                println!("{r}");
            }
            if results.iter().all(|r| r.passed) {
                Ok(())
            } else {
                Err(EllgError::Invariant {
                    step: None,
                    what: "invariant suite failed".into(),
                })
            }
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config_error() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

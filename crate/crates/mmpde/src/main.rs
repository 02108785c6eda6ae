//! Command-line front end: mesh generation, flow runs with logging and
//! snapshots, and standalone quality reports.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mmpde::config::{self, RunConfig};
use mmpde::diffgeo;
use mmpde::error::Error;
use mmpde::flow::{self, FlowState};
use mmpde::io::{self, MeshFormat, VtkPointData};
use mmpde::quality::{self, QualityReport};
use mmpde::shapes;

#[derive(Parser)]
#[command(name = "mmpde", disable_version_flag = true)]
#[command(about = "Moving-mesh adaptation for curves, surfaces, and bulk domains")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate the configured initial mesh and write it as VTK
    Generate {
        #[arg(long)]
        config: PathBuf,
        /// overrides output.dir from the config
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the mesh movement flow: snapshots, log.csv, report.txt
    Run {
        #[arg(long)]
        config: PathBuf,
        /// overrides output.dir from the config
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a quality report for a mesh file (.vtk, .obj, or .node)
    Quality {
        #[arg(long)]
        mesh: PathBuf,
        /// identity or curvature
        #[arg(long, default_value = "identity")]
        metric: String,
        #[arg(long)]
        floor_eps: Option<f64>,
    },
    /// Print the version string
    Version,
}

/// 1 for configuration/input problems, 2 for numerical failures.
fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::DegenerateSimplex { .. }
        | Error::StepRejected(_)
        | Error::NotSpd
        | Error::NonUnitDirection(_)
        | Error::ZeroMixedArea(_) => 2,
        _ => 1,
    }
}

fn load_config(path: &Path, out: Option<PathBuf>) -> mmpde::Result<RunConfig> {
    let mut cfg = config::read_config(path)?;
    if let Some(dir) = out {
        cfg.output_dir = dir;
    }
    for w in &cfg.warnings {
        eprintln!("warning: {w}");
    }
    Ok(cfg)
}

fn write_snapshot(state: &FlowState, path: &Path) -> mmpde::Result<()> {
    let curvature = diffgeo::discrete_curvature(&state.mesh).ok();
    let data = VtkPointData {
        curvature: curvature.as_deref(),
        velocity: Some(&state.velocities),
    };
    io::write_vtk(&state.mesh, &data, path)
}

fn format_report(rep: &QualityReport, state: Option<&FlowState>) -> String {
    let mut out = String::new();
    if let Some(s) = state {
        out.push_str(&format!("steps: {}\n", s.steps.len()));
        out.push_str(&format!("converged: {}\n", s.converged));
        out.push_str(&format!("final time: {:.6e}\n", s.t));
        out.push_str(&format!("projected gradient residual: {:.6e}\n", s.grad_residual));
    }
    let ali_mean =
        rep.ali_values.iter().sum::<f64>() / rep.ali_values.len().max(1) as f64;
    let ali_max = rep.ali_values.iter().cloned().fold(0.0f64, f64::max);
    out.push_str(&format!("energy: {:.6e}\n", rep.energy));
    out.push_str(&format!("eq_min: {:.6e}\n", rep.eq_min));
    out.push_str(&format!("eq_max: {:.6e}\n", rep.eq_max));
    out.push_str(&format!("eq_cov: {:.6e}\n", rep.eq_cov));
    out.push_str(&format!("ali_mean: {:.6e}\n", ali_mean));
    out.push_str(&format!("ali_max: {:.6e}\n", ali_max));
    out.push_str(&format!("edge_ratio: {:.6e}\n", rep.edge_ratio));
    out.push_str(&format!("min_aKM: {:.6e}\n", rep.min_metric_height));
    out.push_str(&format!("bound_margin: {:.6e}\n", rep.bound_margin));
    out
}

fn cmd_generate(cfg: RunConfig) -> mmpde::Result<()> {
    std::fs::create_dir_all(&cfg.output_dir)?;
    let (mesh, _) = shapes::generate_mesh(&cfg.geometry)?;
    let curvature = diffgeo::discrete_curvature(&mesh).ok();
    let data = VtkPointData { curvature: curvature.as_deref(), velocity: None };
    let path = cfg.output_dir.join("initial.vtk");
    io::write_vtk(&mesh, &data, &path)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_run(cfg: RunConfig) -> mmpde::Result<()> {
    std::fs::create_dir_all(&cfg.output_dir)?;
    let (mesh, mut par) = shapes::generate_mesh(&cfg.geometry)?;
    let select = cfg.metric_select();
    let every = cfg.output_every;
    let dir = cfg.output_dir.clone();
    let state = flow::run_with_observer(
        mesh,
        &select,
        &cfg.params,
        &cfg.flow,
        Some(&mut par),
        |state| {
            let step = state.steps.len();
            if step % every == 0 {
                write_snapshot(state, &dir.join(format!("step_{step:06}.vtk")))?;
            }
            Ok(())
        },
    )?;
    write_snapshot(&state, &dir.join("final.vtk"))?;
    io::write_log(&state.steps, &dir.join("log.csv"))?;
    let field = flow::build_metric(&state.mesh, &select)?;
    let rep = quality::quality_report(&state.mesh, &field, &cfg.params)?;
    let report = format_report(&rep, Some(&state));
    std::fs::write(dir.join("report.txt"), &report)?;
    print!("{report}");
    Ok(())
}

fn cmd_quality(mesh_path: &Path, metric: &str, floor_eps: Option<f64>) -> mmpde::Result<()> {
    let format = MeshFormat::from_path(mesh_path).ok_or_else(|| {
        Error::Config(format!(
            "cannot infer mesh format from {} (expected .vtk, .obj, or .node)",
            mesh_path.display()
        ))
    })?;
    let mesh = io::read_mesh(mesh_path, format)?;
    let select = match metric {
        "identity" => flow::MetricSelect::Identity,
        "curvature" => flow::MetricSelect::Curvature { floor_eps, n_smooth: None },
        other => {
            return Err(Error::Config(format!(
                "metric must be identity or curvature, got {other:?}"
            )))
        }
    };
    let field = flow::build_metric(&mesh, &select)?;
    let params = mmpde::energy::EnergyParams::default();
    let rep = quality::quality_report(&mesh, &field, &params)?;
    print!("{}", format_report(&rep, None));
    Ok(())
}

fn run(cli: Cli) -> mmpde::Result<()> {
    match cli.cmd {
        Cmd::Generate { config, out } => cmd_generate(load_config(&config, out)?),
        Cmd::Run { config, out } => cmd_run(load_config(&config, out)?),
        Cmd::Quality { mesh, metric, floor_eps } => cmd_quality(&mesh, &metric, floor_eps),
        Cmd::Version => {
            println!("mmpde {}", env!("CARGO_PKG_VERSION"));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

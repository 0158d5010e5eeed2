mod config;
mod convergence;
mod output;
mod problems;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use colocated_fv::mesh::Mesh;
use colocated_fv::scheme::{Scheme, SchemeError};
use colocated_fv::verify::{perturbed_equilateral, render_report, run_suite, Suite, SuiteParams};

use config::RunConfig;
use problems::Problem;

#[derive(Parser)]
#[command(
    name = "colfv",
    version,
    about = "Colocated finite-volume Navier-Stokes solver"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation described by a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run a verification suite and print its report.
    Verify {
        /// identities, orders, inverse, infsup, stability or all
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 4)]
        rows: usize,
        #[arg(long, default_value_t = 4)]
        cols: usize,
        #[arg(long, default_value_t = 0.25)]
        side: f64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Move interior vertices by up to this fraction of the side.
        #[arg(long, default_value_t = 0.0)]
        perturb: f64,
        /// Use a Triangle mesh instead of the generator.
        #[arg(long, requires = "ele")]
        node: Option<PathBuf>,
        #[arg(long, requires = "node")]
        ele: Option<PathBuf>,
    },
    /// Print a refinement table as CSV.
    Convergence {
        #[arg(long)]
        levels: usize,
        /// gradient, convection or manufactured
        #[arg(long)]
        problem: String,
    },
    /// Print size and quality figures of a Triangle mesh.
    MeshInfo {
        #[arg(long)]
        node: PathBuf,
        #[arg(long)]
        ele: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { config } => cmd_run(&config),
        Command::Verify {
            suite,
            rows,
            cols,
            side,
            seed,
            perturb,
            node,
            ele,
        } => cmd_verify(&suite, rows, cols, side, seed, perturb, node.zip(ele)),
        Command::Convergence { levels, problem } => cmd_convergence(levels, &problem),
        Command::MeshInfo { node, ele } => cmd_mesh_info(&node, &ele),
    };
    ExitCode::from(code)
}

fn load_mesh(node: &Path, ele: &Path) -> Result<Mesh> {
    let n = fs::read_to_string(node).with_context(|| format!("reading {}", node.display()))?;
    let e = fs::read_to_string(ele).with_context(|| format!("reading {}", ele.display()))?;
    Ok(Mesh::load(&n, &e)?)
}

fn cmd_run(path: &Path) -> u8 {
    let cfg = match RunConfig::load(path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return 1;
        }
    };
    let mesh = match cfg.mesh.build() {
        Ok(m) => m,
        Err(e) => {
            eprintln!("{e}");
            return 1;
        }
    };
    let quality = mesh.validate();
    if !quality.passed() {
        eprintln!("config error: mesh: not admissible");
        for issue in quality.failures.iter().take(5) {
            eprintln!("  {issue}");
        }
        return 1;
    }
    if let Err(e) = fs::create_dir_all(&cfg.output_dir) {
        eprintln!(
            "config error: output.directory: {}: {e}",
            cfg.output_dir.display()
        );
        return 1;
    }
    let mut scheme = match Scheme::new(cfg.scheme_config(), &mesh) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("config error: {e}");
            return 1;
        }
    };
    let mut write_error: Option<String> = None;
    let result = scheme.run(|state, _| {
        if !cfg.vtk || write_error.is_some() {
            return;
        }
        let title = format!("{} step {} t={:.12e}", cfg.problem, state.step, state.time);
        let text = output::vtk_snapshot(&mesh, &state.u_curr, &state.p_curr, &title);
        let file = cfg.output_dir.join(format!("fields_{:06}.vtk", state.step));
        if let Err(e) = fs::write(&file, text) {
            write_error = Some(format!("{}: {e}", file.display()));
        }
    });
    let (series, warnings, failure) = match result {
        Ok(out) => (out.series, out.warnings, None),
        Err(f) => (f.series, f.warnings, Some(f.error)),
    };
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let csv = cfg.output_dir.join("diagnostics.csv");
    if let Err(e) = fs::write(&csv, output::diagnostics_csv(&series)) {
        eprintln!("error: {}: {e}", csv.display());
        return 1;
    }
    if let Some(e) = write_error {
        eprintln!("error: {e}");
        return 1;
    }
    match failure {
        None => {
            if let Some(last) = series.last() {
                println!(
                    "{} steps to t={:.6}: kinetic energy {:.6e}, max |div_h u| {:.3e}",
                    last.step, last.time, last.kinetic_energy, last.div_inf
                );
            }
            0
        }
        Some(SchemeError::InvalidConfig { field, message }) => {
            eprintln!("config error: scheme.{field}: {message}");
            1
        }
        Some(e) => {
            eprintln!("solver failure: {e}");
            2
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify(
    suite: &str,
    rows: usize,
    cols: usize,
    side: f64,
    seed: u64,
    perturb: f64,
    files: Option<(PathBuf, PathBuf)>,
) -> u8 {
    let suite: Suite = match suite.parse() {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let params = match verify_params(rows, cols, side, seed, perturb, files) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e:#}");
            return 1;
        }
    };
    match run_suite(suite, &params) {
        Ok(report) => {
            print!("{}", render_report(&report));
            if report.passed() {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn verify_params(
    rows: usize,
    cols: usize,
    side: f64,
    seed: u64,
    perturb: f64,
    files: Option<(PathBuf, PathBuf)>,
) -> Result<SuiteParams> {
    if let Some((node, ele)) = files {
        return Ok(SuiteParams {
            mesh: load_mesh(&node, &ele)?,
            mesh_label: format!("{} / {}", node.display(), ele.display()),
            seed,
        });
    }
    if perturb == 0.0 {
        return Ok(SuiteParams::equilateral(rows, cols, side, seed)?);
    }
    Ok(SuiteParams {
        mesh: perturbed_equilateral(rows, cols, side, perturb, seed)?,
        mesh_label: format!("perturbed equilateral {rows}x{cols} side {side} amplitude {perturb}"),
        seed,
    })
}

fn cmd_convergence(levels: usize, problem: &str) -> u8 {
    let result = problem
        .parse::<Problem>()
        .map_err(anyhow::Error::msg)
        .and_then(|p| convergence::table(p, levels));
    match result {
        Ok(t) => {
            print!("{}", t.to_csv());
            0
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

fn cmd_mesh_info(node: &Path, ele: &Path) -> u8 {
    let mesh = match load_mesh(node, ele) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {e:#}");
            return 1;
        }
    };
    let q = mesh.validate();
    println!("vertices: {}", mesh.vertices().len());
    println!("triangles: {}", mesh.n_triangles());
    println!(
        "edges: {} ({} interior, {} boundary)",
        mesh.n_edges(),
        mesh.interior_edges().len(),
        mesh.boundary_edges().len()
    );
    println!("area: {:.12e}", mesh.total_area());
    println!("h: {:.12e}", mesh.h());
    println!(
        "angles: min {:.6} deg, max {:.6} deg",
        q.min_angle_deg, q.max_angle_deg
    );
    println!("min tau: {:.6e}", q.min_tau);
    println!("min edge / h: {:.6e}", q.min_edge_over_h);
    println!(
        "uniform: {}",
        if mesh.is_uniform(1e-9) { "yes" } else { "no" }
    );
    println!("admissible: {}", if q.passed() { "yes" } else { "no" });
    for issue in &q.failures {
        println!("  {issue}");
    }
    if q.passed() {
        0
    } else {
        1
    }
}

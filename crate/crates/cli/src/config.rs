//! TOML run configuration.
//!
//! ```toml
//! [mesh]
//! rows = 8          # equilateral generator...
//! cols = 8
//! side = 0.125
//! # node = "m.node" # ...or a Triangle mesh, paths relative to the config file
//! # ele = "m.ele"
//!
//! [problem]
//! name = "vortex"   # zero | vortex | manufactured
//!
//! [scheme]
//! reynolds = 100.0
//! dt = 0.01
//! t_end = 1.0
//! output_every = 10
//!
//! [solver]          # optional
//! momentum_rel_tol = 1e-12
//! pressure_rel_tol = 1e-13
//! max_iters = 5000
//!
//! [output]
//! directory = "out" # relative to the config file
//! vtk = true
//! ```

use std::fmt;
use std::path::{Path, PathBuf};

use colocated_fv::mesh::Mesh;
use colocated_fv::scheme::SchemeConfig;
use serde::Deserialize;

use crate::problems::Problem;

#[derive(Debug)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}: {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn err(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        field: field.into(),
        message: message.into(),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    mesh: RawMesh,
    problem: RawProblem,
    scheme: RawScheme,
    #[serde(default)]
    solver: RawSolver,
    output: RawOutput,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMesh {
    rows: Option<usize>,
    cols: Option<usize>,
    side: Option<f64>,
    node: Option<PathBuf>,
    ele: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    name: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScheme {
    reynolds: f64,
    dt: f64,
    t_end: f64,
    #[serde(default = "one")]
    output_every: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    momentum_rel_tol: Option<f64>,
    pressure_rel_tol: Option<f64>,
    max_iters: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    directory: PathBuf,
    #[serde(default = "yes")]
    vtk: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeshSource {
    Equilateral { rows: usize, cols: usize, side: f64 },
    Files { node: PathBuf, ele: PathBuf },
}

impl MeshSource {
    pub fn build(&self) -> Result<Mesh, ConfigError> {
        match self {
            MeshSource::Equilateral { rows, cols, side } => {
                Mesh::equilateral(*rows, *cols, *side).map_err(|e| err("mesh", e.to_string()))
            }
            MeshSource::Files { node, ele } => {
                let read = |field: &str, p: &Path| {
                    std::fs::read_to_string(p)
                        .map_err(|e| err(field, format!("{}: {e}", p.display())))
                };
                Mesh::load(&read("mesh.node", node)?, &read("mesh.ele", ele)?)
                    .map_err(|e| err("mesh", e.to_string()))
            }
        }
    }
}

#[derive(Debug)]
pub struct RunConfig {
    pub mesh: MeshSource,
    pub problem: Problem,
    pub reynolds: f64,
    pub dt: f64,
    pub t_end: f64,
    pub output_every: usize,
    pub momentum_rel_tol: Option<f64>,
    pub pressure_rel_tol: Option<f64>,
    pub max_iters: Option<usize>,
    pub output_dir: PathBuf,
    pub vtk: bool,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| err("config", format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    /// Parses `text`; relative paths are resolved against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<RunConfig, ConfigError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| err("config", e.to_string()))?;
        let m = raw.mesh;
        let mesh = match (m.node, m.ele, m.rows, m.cols, m.side) {
            (Some(node), Some(ele), None, None, None) => {
                let node = base.join(node);
                let ele = base.join(ele);
                for (field, p) in [("mesh.node", &node), ("mesh.ele", &ele)] {
                    if !p.is_file() {
                        return Err(err(field, format!("{} does not exist", p.display())));
                    }
                }
                MeshSource::Files { node, ele }
            }
            (None, None, Some(rows), Some(cols), Some(side)) => {
                if rows == 0 || cols == 0 {
                    return Err(err(
                        if rows == 0 { "mesh.rows" } else { "mesh.cols" },
                        "must be at least 1",
                    ));
                }
                if !(side > 0.0 && side.is_finite()) {
                    return Err(err("mesh.side", format!("must be positive, got {side}")));
                }
                MeshSource::Equilateral { rows, cols, side }
            }
            _ => {
                return Err(err(
                    "mesh",
                    "give either node and ele, or rows, cols and side",
                ))
            }
        };
        let problem = raw
            .problem
            .name
            .parse::<Problem>()
            .map_err(|e| err("problem.name", e))?;
        if !problem.runnable() {
            return Err(err(
                "problem.name",
                format!("'{problem}' has no time-dependent data"),
            ));
        }
        for (field, v) in [
            ("solver.momentum_rel_tol", raw.solver.momentum_rel_tol),
            ("solver.pressure_rel_tol", raw.solver.pressure_rel_tol),
        ] {
            if let Some(v) = v {
                if !(v > 0.0 && v < 1.0) {
                    return Err(err(field, format!("must lie in (0, 1), got {v}")));
                }
            }
        }
        if raw.solver.max_iters == Some(0) {
            return Err(err("solver.max_iters", "must be at least 1"));
        }
        let cfg = RunConfig {
            mesh,
            problem,
            reynolds: raw.scheme.reynolds,
            dt: raw.scheme.dt,
            t_end: raw.scheme.t_end,
            output_every: raw.scheme.output_every,
            momentum_rel_tol: raw.solver.momentum_rel_tol,
            pressure_rel_tol: raw.solver.pressure_rel_tol,
            max_iters: raw.solver.max_iters,
            output_dir: base.join(raw.output.directory),
            vtk: raw.output.vtk,
        };
        cfg.scheme_config().validate().map_err(|e| match e {
            colocated_fv::scheme::SchemeError::InvalidConfig { field, message } => {
                err(&format!("scheme.{field}"), message)
            }
            other => err("scheme", other.to_string()),
        })?;
        Ok(cfg)
    }

    pub fn scheme_config(&self) -> SchemeConfig {
        let (forcing, initial) = self.problem.data(self.reynolds);
        let mut cfg = SchemeConfig::new(self.reynolds, self.dt, self.t_end, forcing, initial);
        cfg.output_every = self.output_every;
        if let Some(t) = self.momentum_rel_tol {
            cfg.momentum_solver.rel_tol = t;
        }
        if let Some(t) = self.pressure_rel_tol {
            cfg.pressure_solver.rel_tol = t;
        }
        if let Some(n) = self.max_iters {
            cfg.momentum_solver.max_iters = Some(n);
            cfg.pressure_solver.max_iters = Some(n);
        }
        cfg
    }
}

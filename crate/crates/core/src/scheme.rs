//! BDF2 projection scheme with piecewise-constant velocity and pressure.
//!
//! Every step solves a momentum prediction for `ũ^{n+1}`, a pressure-increment Poisson problem,
//! and corrects the velocity so that `div_h u^{n+1} = 0`. The first step is a semi-implicit Euler
//! projection started from the Raviart-Thomas interpolant of the initial velocity.

use thiserror::Error;

use crate::fields::{
    self, norm_h, norm_h_sq, norm_l2, norm_p1nc, project_p0, project_p1nc_from_p0, project_rt0,
    reconstruct_rt0, AnalyticVector, FieldError, ScalarP0, VectorP0,
};
use crate::mesh::Mesh;
use crate::operators::{assemble_conv, Discretization};
use crate::solver::{self, Preconditioner, SolveReport, SolverConfig, SolverError};
use crate::sparse::SparseOperator;

/// Largest accepted `|Σ_K |K| div_h ũ_K|` relative to `Σ_K |∂K| |ũ_K|`. The sum telescopes
/// over interior edges, so anything above roundoff means the data is not compatible.
pub const COMPATIBILITY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum SchemeError {
    #[error("invalid configuration: {field}: {message}")]
    InvalidConfig {
        field: &'static str,
        message: String,
    },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("{stage} solve did not converge at step {step}: {report:?}")]
    NotConverged {
        stage: &'static str,
        step: usize,
        report: SolveReport,
    },
    #[error("pressure right-hand side at step {step} is not mean free (relative component {component:e})")]
    Compatibility { step: usize, component: f64 },
}

#[derive(Debug, Clone)]
pub struct SchemeConfig {
    pub reynolds: f64,
    pub dt: f64,
    pub t_end: f64,
    pub forcing: AnalyticVector,
    pub initial_velocity: AnalyticVector,
    pub momentum_solver: SolverConfig,
    pub pressure_solver: SolverConfig,
    pub output_every: usize,
}

impl SchemeConfig {
    pub fn new(
        reynolds: f64,
        dt: f64,
        t_end: f64,
        forcing: AnalyticVector,
        initial_velocity: AnalyticVector,
    ) -> Self {
        SchemeConfig {
            reynolds,
            dt,
            t_end,
            forcing,
            initial_velocity,
            momentum_solver: SolverConfig::default()
                .with_rel_tol(1e-12)
                .with_preconditioner(Preconditioner::Diagonal),
            pressure_solver: SolverConfig::default().with_rel_tol(1e-13),
            output_every: 1,
        }
    }

    /// Checks the configuration and returns the number of time steps `N = T / k`.
    pub fn validate(&self) -> Result<usize, SchemeError> {
        let invalid = |field, message: String| Err(SchemeError::InvalidConfig { field, message });
        if !(self.reynolds > 0.0 && self.reynolds.is_finite()) {
            return invalid(
                "reynolds",
                format!("must be positive, got {}", self.reynolds),
            );
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return invalid("dt", format!("must be positive, got {}", self.dt));
        }
        if !(self.t_end.is_finite() && self.t_end >= self.dt) {
            return invalid(
                "t_end",
                format!("must be at least dt = {}, got {}", self.dt, self.t_end),
            );
        }
        if self.output_every == 0 {
            return invalid("output_every", "must be at least 1".into());
        }
        let steps = (self.t_end / self.dt).round();
        if (steps * self.dt - self.t_end).abs() > 1e-12 * self.t_end {
            return invalid(
                "t_end",
                format!(
                    "{} is not an integer multiple of dt = {}",
                    self.t_end, self.dt
                ),
            );
        }
        for (field, cfg) in [
            ("momentum_solver", &self.momentum_solver),
            ("pressure_solver", &self.pressure_solver),
        ] {
            if let Err(e) = cfg.validate() {
                return invalid(field, e.to_string());
            }
        }
        Ok(steps as usize)
    }
}

#[derive(Debug, Clone)]
pub struct SchemeState {
    /// Index `n` of `u_curr = u^n`.
    pub step: usize,
    pub time: f64,
    pub u_prev: VectorP0,
    pub u_curr: VectorP0,
    pub u_tilde: VectorP0,
    /// Mean free.
    pub p_curr: ScalarP0,
    pub f_curr: VectorP0,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepDiagnostics {
    pub step: usize,
    pub time: f64,
    /// `|u^n|²`.
    pub kinetic_energy: f64,
    /// `‖ũ^n‖_h`.
    pub tilde_h_norm: f64,
    /// `max_K |div_h u^n|`.
    pub div_inf: f64,
    /// `|u^n - u^{n-1}| / k`.
    pub increment: f64,
    /// `|Π_P1nc p^n|`.
    pub pressure_p1nc_norm: f64,
    pub momentum: [SolveReport; 2],
    pub pressure: SolveReport,
    /// `(|u|² - |ũ|² + |u - ũ|²) / |ũ|²`, zero when `ũ = 0`.
    pub pythagoras_defect: f64,
    /// `|u^n|² + k Σ_{m=2}^n ‖ũ^m‖_h²`.
    pub energy_sum: f64,
    /// `k Σ_{m=2}^n |Π_P1nc p^m|²`.
    pub pressure_sum: f64,
}

/// Diagnostics of a completed run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub state: SchemeState,
    pub series: Vec<StepDiagnostics>,
    pub warnings: Vec<String>,
}

/// A run that stopped early; `series` holds the steps completed before the failure.
#[derive(Debug, Error)]
#[error("run failed after {} completed steps: {error}", series.len())]
pub struct RunFailure {
    pub error: SchemeError,
    pub series: Vec<StepDiagnostics>,
    pub warnings: Vec<String>,
}

pub struct Scheme<'m> {
    mesh: &'m Mesh,
    cfg: SchemeConfig,
    disc: Discretization,
    steps: usize,
    energy_acc: f64,
    pressure_acc: f64,
}

struct Projection {
    p_new: ScalarP0,
    u_new: VectorP0,
    report: SolveReport,
}

impl<'m> Scheme<'m> {
    pub fn new(cfg: SchemeConfig, mesh: &'m Mesh) -> Result<Self, SchemeError> {
        let steps = cfg.validate()?;
        Ok(Scheme {
            mesh,
            cfg,
            disc: Discretization::new(mesh),
            steps,
            energy_acc: 0.0,
            pressure_acc: 0.0,
        })
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.cfg
    }

    pub fn discretization(&self) -> &Discretization {
        &self.disc
    }

    pub fn n_steps(&self) -> usize {
        self.steps
    }

    fn mass_times(&self, v: &[f64]) -> Vec<f64> {
        v.iter().zip(&self.disc.areas).map(|(x, a)| x * a).collect()
    }

    /// `a M - (1/Re) M Δ̃_h + M b̃_h(u*, ·)`, one scalar block shared by both components.
    pub fn momentum_matrix(&self, mass_coefficient: f64, advecting: &VectorP0) -> SparseOperator {
        let mass = SparseOperator::diagonal_matrix(&self.disc.areas);
        mass.linear_combination(
            mass_coefficient,
            &self.disc.lap_tilde,
            -1.0 / self.cfg.reynolds,
        )
        .linear_combination(1.0, &assemble_conv(advecting, self.mesh), 1.0)
    }

    fn solve_momentum(
        &self,
        matrix: &SparseOperator,
        rhs: &VectorP0,
        guess: &VectorP0,
        step: usize,
    ) -> Result<(VectorP0, [SolveReport; 2]), SchemeError> {
        let mut comps = [Vec::new(), Vec::new()];
        let mut reports = [SolveReport::default(); 2];
        for c in 0..2 {
            let b = self.mass_times(&rhs.component(c));
            let x0 = guess.component(c);
            let (x, rep) =
                solver::solve_krylov_from(matrix, &b, Some(&x0), &self.cfg.momentum_solver)?;
            if !rep.converged {
                return Err(SchemeError::NotConverged {
                    stage: "momentum",
                    step,
                    report: rep,
                });
            }
            comps[c] = x;
            reports[c] = rep;
        }
        Ok((VectorP0::from_components(&comps[0], &comps[1]), reports))
    }

    /// Solves `Δ_h φ = scale · div_h ũ` for a mean-free `φ`.
    fn compatibility_defect(&self, u_tilde: &VectorP0, rhs: &[f64], scale: f64) -> f64 {
        let edges = self.mesh.edges();
        let flux_scale: f64 = self
            .mesh
            .triangles()
            .iter()
            .zip(&u_tilde.values)
            .map(|(t, u)| t.edges.iter().map(|&e| edges[e].length).sum::<f64>() * u.norm())
            .sum::<f64>()
            * scale;
        let sum: f64 = rhs.iter().sum();
        if flux_scale > 0.0 {
            sum.abs() / flux_scale
        } else {
            sum.abs()
        }
    }

    fn solve_pressure_increment(
        &self,
        u_tilde: &VectorP0,
        scale: f64,
        step: usize,
    ) -> Result<(ScalarP0, SolveReport), SchemeError> {
        let div = self.disc.div(u_tilde);
        // -M Δ_h φ = -scale M div ũ.
        let rhs: Vec<f64> = div
            .values
            .iter()
            .zip(&self.disc.areas)
            .map(|(d, a)| -scale * a * d)
            .collect();
        let component = self.compatibility_defect(u_tilde, &rhs, scale);
        if component > COMPATIBILITY_TOLERANCE {
            return Err(SchemeError::Compatibility { step, component });
        }
        let (phi, report) = solver::solve_spd_constant_nullspace(
            &self.disc.pressure,
            &rhs,
            &self.disc.areas,
            None,
            &self.cfg.pressure_solver,
        )?;
        if !report.converged {
            return Err(SchemeError::NotConverged {
                stage: "pressure",
                step,
                report,
            });
        }
        Ok((ScalarP0::new(phi), report))
    }

    /// `u^0 = Π_RT0 u_0` sampled at circumcenters; the second value is `max |div_h u^0|`.
    pub fn initial_velocity(&self) -> Result<(VectorP0, f64), SchemeError> {
        let rt = project_rt0(&self.cfg.initial_velocity, self.mesh, 0.0)?;
        let u0 = reconstruct_rt0(&rt, self.mesh)?.field;
        let div = self.disc.div(&u0).max_abs();
        Ok((u0, div))
    }

    /// `u^0`, then one semi-implicit Euler projection step for `(ũ^1, p^1, u^1)`.
    pub fn initialize(
        &mut self,
    ) -> Result<(SchemeState, StepDiagnostics, Vec<String>), SchemeError> {
        let mesh = self.mesh;
        let k = self.cfg.dt;
        let (u0, div0) = self.initial_velocity()?;
        let mut warnings = Vec::new();
        let scale = u0.max_abs().max(f64::MIN_POSITIVE);
        if div0 > 1e-10 * scale / mesh.h() {
            warnings.push(format!(
                "initial velocity is not discretely divergence free: max |div_h u0| = {div0:e}"
            ));
        }
        let f1 = project_p0(&self.cfg.forcing, mesh, k)?;
        let matrix = self.momentum_matrix(1.0 / k, &u0);
        let rhs = u0.scale(1.0 / k).add(&f1);
        let (u_tilde, mom) = self.solve_momentum(&matrix, &rhs, &u0, 1)?;
        let (p1, report) = self.solve_pressure_increment(&u_tilde, 1.0 / k, 1)?;
        let u1 = u_tilde.axpy(-k, &self.disc.grad(&p1));
        self.energy_acc = 0.0;
        self.pressure_acc = 0.0;
        let state = SchemeState {
            step: 1,
            time: k,
            u_prev: u0,
            u_curr: u1,
            u_tilde,
            p_curr: p1,
            f_curr: f1,
        };
        let diag = self.diagnostics(&state, mom, report);
        Ok((state, diag, warnings))
    }

    /// BDF2 prediction `ũ^{n+1}` with the extrapolated advecting field `2u^n - u^{n-1}`.
    pub fn momentum_step(
        &self,
        state: &SchemeState,
    ) -> Result<(VectorP0, VectorP0, [SolveReport; 2]), SchemeError> {
        let k = self.cfg.dt;
        let t_next = state.time + k;
        let f_next = project_p0(&self.cfg.forcing, self.mesh, t_next)?;
        let advecting = state.u_curr.scale(2.0).sub(&state.u_prev);
        let matrix = self.momentum_matrix(1.5 / k, &advecting);
        let rhs = state
            .u_curr
            .scale(2.0 / k)
            .axpy(-0.5 / k, &state.u_prev)
            .sub(&self.disc.grad(&state.p_curr))
            .add(&f_next);
        let (u_tilde, reports) =
            self.solve_momentum(&matrix, &rhs, &state.u_curr, state.step + 1)?;
        Ok((u_tilde, f_next, reports))
    }

    /// `p^{n+1} = p^n + φ` with `Δ_h φ = (3/2k) div_h ũ^{n+1}`, mean free.
    pub fn pressure_step(
        &self,
        state: &SchemeState,
        u_tilde: &VectorP0,
    ) -> Result<(ScalarP0, SolveReport), SchemeError> {
        let (phi, report) =
            self.solve_pressure_increment(u_tilde, 1.5 / self.cfg.dt, state.step + 1)?;
        Ok((
            fields::mean_zero(&state.p_curr.add(&phi), self.mesh),
            report,
        ))
    }

    /// `u^{n+1} = ũ^{n+1} - (2k/3) ∇_h (p^{n+1} - p^n)`.
    pub fn correction_step(
        &self,
        u_tilde: &VectorP0,
        p_new: &ScalarP0,
        p_old: &ScalarP0,
    ) -> VectorP0 {
        u_tilde.axpy(-2.0 * self.cfg.dt / 3.0, &self.disc.grad(&p_new.sub(p_old)))
    }

    fn project(&self, state: &SchemeState, u_tilde: &VectorP0) -> Result<Projection, SchemeError> {
        let (p_new, report) = self.pressure_step(state, u_tilde)?;
        let u_new = self.correction_step(u_tilde, &p_new, &state.p_curr);
        Ok(Projection {
            p_new,
            u_new,
            report,
        })
    }

    /// Advances `state` from `n` to `n + 1`.
    pub fn step(&mut self, state: &mut SchemeState) -> Result<StepDiagnostics, SchemeError> {
        let (u_tilde, f_next, mom) = self.momentum_step(state)?;
        let proj = self.project(state, &u_tilde)?;
        let u_old = std::mem::replace(&mut state.u_curr, proj.u_new);
        state.u_prev = u_old;
        state.u_tilde = u_tilde;
        state.p_curr = proj.p_new;
        state.f_curr = f_next;
        state.step += 1;
        state.time = state.step as f64 * self.cfg.dt;
        let k = self.cfg.dt;
        self.energy_acc += k * norm_h_sq(&state.u_tilde, self.mesh);
        let pn = norm_p1nc(&project_p1nc_from_p0(&state.p_curr, self.mesh), self.mesh);
        self.pressure_acc += k * pn * pn;
        Ok(self.diagnostics(state, mom, proj.report))
    }

    fn diagnostics(
        &self,
        state: &SchemeState,
        momentum: [SolveReport; 2],
        pressure: SolveReport,
    ) -> StepDiagnostics {
        let m = self.mesh;
        let ke = norm_l2(&state.u_curr, m).powi(2);
        let tilde_sq = norm_l2(&state.u_tilde, m).powi(2);
        let diff_sq = norm_l2(&state.u_curr.sub(&state.u_tilde), m).powi(2);
        let pythagoras_defect = if tilde_sq > 0.0 {
            (ke - tilde_sq + diff_sq) / tilde_sq
        } else {
            0.0
        };
        StepDiagnostics {
            step: state.step,
            time: state.time,
            kinetic_energy: ke,
            tilde_h_norm: norm_h(&state.u_tilde, m),
            div_inf: self.disc.div(&state.u_curr).max_abs(),
            increment: norm_l2(&state.u_curr.sub(&state.u_prev), m) / self.cfg.dt,
            pressure_p1nc_norm: norm_p1nc(&project_p1nc_from_p0(&state.p_curr, m), m),
            momentum,
            pressure,
            pythagoras_defect,
            energy_sum: ke + self.energy_acc,
            pressure_sum: self.pressure_acc,
        }
    }

    /// Runs all `N` steps. `sink` sees every `output_every`-th step and the last one.
    pub fn run(
        &mut self,
        mut sink: impl FnMut(&SchemeState, &StepDiagnostics),
    ) -> Result<RunOutput, RunFailure> {
        let every = self.cfg.output_every;
        let last = self.steps;
        let (mut state, diag, warnings) = match self.initialize() {
            Ok(v) => v,
            Err(error) => {
                return Err(RunFailure {
                    error,
                    series: Vec::new(),
                    warnings: Vec::new(),
                })
            }
        };
        let mut series = Vec::with_capacity(last);
        if state.step % every == 0 || state.step == last {
            sink(&state, &diag);
        }
        series.push(diag);
        while state.step < last {
            match self.step(&mut state) {
                Ok(diag) => {
                    if state.step % every == 0 || state.step == last {
                        sink(&state, &diag);
                    }
                    series.push(diag);
                }
                Err(error) => {
                    return Err(RunFailure {
                        error,
                        series,
                        warnings,
                    })
                }
            }
        }
        Ok(RunOutput {
            state,
            series,
            warnings,
        })
    }
}

/// Convenience wrapper: build a scheme and run it without a sink.
pub fn run(cfg: SchemeConfig, mesh: &Mesh) -> Result<RunOutput, RunFailure> {
    let mut scheme = Scheme::new(cfg, mesh).map_err(|error| RunFailure {
        error,
        series: Vec::new(),
        warnings: Vec::new(),
    })?;
    scheme.run(|_, _| {})
}

/// Velocity sampled at circumcenters, used to compare against exact solutions.
pub fn velocity_error(u: &VectorP0, exact: &AnalyticVector, mesh: &Mesh, t: f64) -> f64 {
    let e = fields::interpolate_p0(exact, mesh, t);
    norm_l2(&u.sub(&e), mesh)
}

impl StepDiagnostics {
    pub fn is_finite(&self) -> bool {
        [
            self.kinetic_energy,
            self.tilde_h_norm,
            self.div_inf,
            self.increment,
            self.pressure_p1nc_norm,
            self.energy_sum,
            self.pressure_sum,
        ]
        .iter()
        .all(|v| v.is_finite())
    }
}

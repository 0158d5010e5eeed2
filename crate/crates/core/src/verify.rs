//! Executable checks of the discrete identities, consistency orders and stability bounds.
//!
//! Every check is a deterministic function of its mesh specification and seed. Bounds that the
//! analysis only states up to an unknown constant are checked as boundedness under refinement.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::analytic::{self, ScalarTest};
use crate::fields::{
    self, inner, interpolate_p0, norm_h, norm_l2, norm_p1nc, project_p0, project_p1nc_from_p0,
    project_rt0, reconstruct_rt0, tilde_grad_p1nc, AnalyticVector, DualNormEvaluator, FieldError,
    Rt0Field, ScalarP0, VectorP0,
};
use crate::mesh::{Mesh, MeshError, Vec2};
use crate::operators::{
    apply_componentwise, assemble_conv, conv_upwind, div_h, divide_by_area, grad_h, lap_h,
    lap_tilde_h, trilinear_b, Discretization,
};
use crate::scheme::{Scheme, SchemeConfig};
use crate::solver::{self, SolverConfig, SolverError};

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("inf-sup measurement needs an equilateral mesh; this mesh is not uniform")]
    NotUniform,
    #[error("{0}")]
    InsufficientLevels(String),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("dense factorization failed: {0}")]
    Dense(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckKind {
    Identity,
    Bound,
    Order,
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckKind::Identity => "identity",
            CheckKind::Bound => "bound",
            CheckKind::Order => "order",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub kind: CheckKind,
    /// Worst-case defect (identity), per-level values (bound), or per-level errors followed by the
    /// fitted slope (order).
    pub measured: Vec<f64>,
    pub threshold: f64,
    pub pass: bool,
    pub context: String,
}

impl CheckResult {
    /// Passes iff `worst <= tol`.
    pub fn identity(name: &str, context: &str, worst: f64, tol: f64) -> Self {
        CheckResult {
            name: name.into(),
            kind: CheckKind::Identity,
            measured: vec![worst],
            threshold: tol,
            pass: worst <= tol,
            context: context.into(),
        }
    }

    /// Passes iff every value is finite and at most `factor` times the first (coarsest) one.
    pub fn bounded_by_first(name: &str, context: &str, values: Vec<f64>, factor: f64) -> Self {
        let first = values.first().copied().unwrap_or(f64::NAN);
        let pass = values
            .iter()
            .all(|v| v.is_finite() && *v <= factor * first.max(0.0))
            && first.is_finite();
        CheckResult {
            name: name.into(),
            kind: CheckKind::Bound,
            measured: values,
            threshold: factor,
            pass,
            context: context.into(),
        }
    }

    /// Passes iff every value is finite and at least `factor` times the first one.
    pub fn bounded_below_by_first(
        name: &str,
        context: &str,
        values: Vec<f64>,
        factor: f64,
    ) -> Self {
        let first = values.first().copied().unwrap_or(f64::NAN);
        let pass = first.is_finite()
            && first > 0.0
            && values.iter().all(|v| v.is_finite() && *v >= factor * first);
        CheckResult {
            name: name.into(),
            kind: CheckKind::Bound,
            measured: values,
            threshold: factor,
            pass,
            context: context.into(),
        }
    }

    /// Passes iff all values are finite and positive and `max / min <= factor`.
    pub fn uniform_spread(name: &str, context: &str, values: Vec<f64>, factor: f64) -> Self {
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let pass = !values.is_empty()
            && values.iter().all(|v| v.is_finite())
            && min > 0.0
            && max <= factor * min;
        CheckResult {
            name: name.into(),
            kind: CheckKind::Bound,
            measured: values,
            threshold: factor,
            pass,
            context: context.into(),
        }
    }

    pub fn order(name: &str, context: &str, sweep: &RefinementSweep, min_slope: f64) -> Self {
        let slope = sweep.slope();
        let mut measured = sweep.values.clone();
        measured.push(slope);
        CheckResult {
            name: name.into(),
            kind: CheckKind::Order,
            measured,
            threshold: min_slope,
            pass: sweep.h.len() >= 3 && slope.is_finite() && slope >= min_slope,
            context: context.into(),
        }
    }

    /// The fitted slope of an order check, the worst value otherwise.
    pub fn headline(&self) -> f64 {
        *self.measured.last().unwrap_or(&f64::NAN)
    }
}

/// Per-level measurements on a family of meshes with decreasing `h`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RefinementSweep {
    pub h: Vec<f64>,
    pub values: Vec<f64>,
}

impl RefinementSweep {
    pub fn push(&mut self, h: f64, value: f64) {
        self.h.push(h);
        self.values.push(value);
    }

    /// Least-squares slope of `log value` against `log h`; NaN with fewer than 3 levels.
    pub fn slope(&self) -> f64 {
        if self.h.len() < 3 || self.h.len() != self.values.len() {
            return f64::NAN;
        }
        let xs: Vec<f64> = self.h.iter().map(|h| h.ln()).collect();
        let ys: Vec<f64> = self.values.iter().map(|v| v.ln()).collect();
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        sxy / sxx
    }
}

pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn random_scalar(mesh: &Mesh, rng: &mut ChaCha8Rng) -> ScalarP0 {
    ScalarP0::new(
        (0..mesh.n_triangles())
            .map(|_| rng.gen_range(-1.0..=1.0))
            .collect(),
    )
}

pub fn random_vector(mesh: &Mesh, rng: &mut ChaCha8Rng) -> VectorP0 {
    VectorP0::new(
        (0..mesh.n_triangles())
            .map(|_| Vec2::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)))
            .collect(),
    )
}

fn boundary_vertex_mask(mesh: &Mesh) -> Vec<bool> {
    let mut mask = vec![false; mesh.vertices().len()];
    for &e in mesh.boundary_edges() {
        for v in mesh.edges()[e].vertices {
            mask[v] = true;
        }
    }
    mask
}

/// Random Raviart-Thomas field with zero boundary flux and zero divergence on every triangle,
/// sampled at circumcenters.
pub fn random_divergence_free(mesh: &Mesh, rng: &mut ChaCha8Rng) -> Result<VectorP0, FieldError> {
    let mask = boundary_vertex_mask(mesh);
    let psi: Vec<f64> = mask
        .iter()
        .map(|&b| {
            let v = rng.gen_range(-1.0..=1.0);
            if b {
                0.0
            } else {
                v
            }
        })
        .collect();
    let r = Rt0Field::from_vertex_stream(mesh, &psi);
    Ok(reconstruct_rt0(&r, mesh)?.field)
}

/// Equilateral mesh with interior vertices moved by up to `amplitude * side` in a random
/// direction. Fails if a triangle stops being acute.
pub fn perturbed_equilateral(
    rows: usize,
    cols: usize,
    side: f64,
    amplitude: f64,
    seed: u64,
) -> Result<Mesh, MeshError> {
    let base = Mesh::equilateral(rows, cols, side)?;
    let mask = boundary_vertex_mask(&base);
    let mut rng = seeded_rng(seed, 0x6d65_7368);
    let vertices: Vec<Vec2> = base
        .vertices()
        .iter()
        .zip(&mask)
        .map(|(&x, &b)| {
            let r = amplitude * side * rng.gen_range(0.0..=1.0);
            let theta = rng.gen_range(0.0..std::f64::consts::TAU);
            if b {
                x
            } else {
                x + Vec2::new(r * theta.cos(), r * theta.sin())
            }
        })
        .collect();
    let triangles = base.triangles().iter().map(|t| t.vertices).collect();
    let mesh = Mesh::from_parts(vertices, triangles)?;
    let report = mesh.validate();
    if !report.passed() {
        return Err(MeshError::Geometry(format!(
            "perturbation {amplitude} produced a non-admissible mesh (max angle {:.3} deg)",
            report.max_angle_deg
        )));
    }
    Ok(mesh)
}

/// Unit rhombus with `n x n` cells.
pub fn unit_rhombus(n: usize) -> Result<Mesh, MeshError> {
    Mesh::equilateral(n, n, 1.0 / n as f64)
}

fn rel_max_diff(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0f64, |s, x| s.max(x.abs()));
    let diff = a
        .iter()
        .zip(b)
        .fold(0.0f64, |s, (x, y)| s.max((x - y).abs()));
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

fn rel(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    if b == 0.0 {
        d
    } else {
        d / b.abs()
    }
}

/// Triangle-by-triangle `‖v‖_h²`, each interior edge seen from both sides.
pub fn naive_norm_h_sq(v: &VectorP0, mesh: &Mesh) -> f64 {
    let mut acc = 0.0;
    for (k, tri) in mesh.triangles().iter().enumerate() {
        for &e in &tri.edges {
            let edge = &mesh.edges()[e];
            match edge.l_triangle {
                Some(_) => {
                    let other = if edge.k_triangle == k {
                        edge.l_triangle.unwrap()
                    } else {
                        edge.k_triangle
                    };
                    acc += 0.5 * edge.tau_sigma * (v.values[other] - v.values[k]).norm_squared();
                }
                None => acc += edge.tau_sigma * v.values[k].norm_squared(),
            }
        }
    }
    acc
}

/// Triangle-by-triangle midpoint-rule `|q|²` of a Crouzeix-Raviart function.
pub fn naive_p1nc_sq(q: &fields::ScalarP1nc, mesh: &Mesh) -> f64 {
    mesh.triangles()
        .iter()
        .map(|t| t.area / 3.0 * t.edges.iter().map(|&e| q.values[e].powi(2)).sum::<f64>())
        .sum()
}

/// Removes the discrete divergence: `u = ũ - ∇_h φ` with `Δ_h φ = div_h ũ`.
pub fn discrete_projection(
    disc: &Discretization,
    u_tilde: &VectorP0,
) -> Result<VectorP0, VerifyError> {
    let d = disc.div(u_tilde);
    let rhs: Vec<f64> = d
        .values
        .iter()
        .zip(&disc.areas)
        .map(|(d, a)| -a * d)
        .collect();
    let cfg = SolverConfig::default().with_rel_tol(1e-13);
    let (phi, _) =
        solver::solve_spd_constant_nullspace(&disc.pressure, &rhs, &disc.areas, None, &cfg)?;
    Ok(u_tilde.sub(&disc.grad(&ScalarP0::new(phi))))
}

pub const IDENTITY_TRIALS: usize = 20;
pub const ORACLE_TRIALS: usize = 50;
pub const IDENTITY_TOL: f64 = 1e-12;
pub const ORACLE_TOL: f64 = 1e-14;

/// Adjointness, coercivity, Laplacian identities, divergence-free interpolation, projection
/// orthogonality and upwind positivity on seeded random fields.
pub fn check_identities(
    mesh: &Mesh,
    seed: u64,
    context: &str,
) -> Result<Vec<CheckResult>, VerifyError> {
    let mut rng = seeded_rng(seed, 1);
    let disc = Discretization::new(mesh);
    let mut adj = 0.0f64;
    let mut lap_energy = 0.0f64;
    let mut lap_mass = 0.0f64;
    let mut coercive = 0.0f64;
    let mut cauchy = 0.0f64;
    let mut rt0_div = 0.0f64;
    let mut orth = 0.0f64;
    let mut positivity = 0.0f64;
    let one = ScalarP0::constant(mesh, 1.0);
    for _ in 0..IDENTITY_TRIALS {
        let q = random_scalar(mesh, &mut rng);
        let v = random_vector(mesh, &mut rng);
        let w = random_vector(mesh, &mut rng);
        let g = grad_h(&q, mesh);
        let d = div_h(&v, mesh);
        let gn = norm_l2(&g, mesh);
        adj = adj.max(
            (inner(&v, &g, mesh) + inner(&q, &d, mesh)).abs()
                / (norm_l2(&v, mesh) * gn + f64::MIN_POSITIVE),
        );

        let l = lap_h(&q, mesh);
        lap_energy = lap_energy.max(rel(-inner(&l, &q, mesh), gn * gn));
        lap_mass = lap_mass
            .max(inner(&l, &one, mesh).abs() / (norm_l2(&l, mesh) * mesh.total_area().sqrt()));

        let hv = fields::norm_h_sq(&v, mesh);
        coercive = coercive.max(rel(-inner(&lap_tilde_h(&v, mesh), &v, mesh), hv));
        // -(Δ̃u, v) ≤ ‖u‖_h ‖v‖_h; record the relative excess, zero when it holds.
        let lhs = -inner(&lap_tilde_h(&v, mesh), &w, mesh);
        let bound = hv.sqrt() * norm_h(&w, mesh);
        cauchy = cauchy.max(((lhs - bound) / bound).max(0.0));

        let u = random_divergence_free(mesh, &mut rng)?;
        let scale = u.max_abs() / mesh.h();
        rt0_div = rt0_div.max(div_h(&u, mesh).max_abs() / scale);
        // b_h(u, v, v) ≥ 0 when div_h u ≥ 0; measure the relative negative part.
        let b = trilinear_b(&u, &v, &v, mesh);
        positivity = positivity.max((-b / (norm_l2(&u, mesh) * hv)).max(0.0));

        let projected = discrete_projection(&disc, &v)?;
        let pg = grad_h(&random_scalar(mesh, &mut rng), mesh);
        orth = orth.max(
            inner(&projected, &pg, mesh).abs() / (norm_l2(&projected, mesh) * norm_l2(&pg, mesh)),
        );
    }
    let c = grad_h(&ScalarP0::constant(mesh, 1.0), mesh).max_abs() * mesh.h();
    Ok(vec![
        CheckResult::identity("adjointness", context, adj, IDENTITY_TOL),
        CheckResult::identity("grad_of_constant", context, c, IDENTITY_TOL),
        CheckResult::identity("lap_h_energy", context, lap_energy, IDENTITY_TOL),
        CheckResult::identity("lap_h_zero_mean", context, lap_mass, IDENTITY_TOL),
        CheckResult::identity("coercivity", context, coercive, IDENTITY_TOL),
        CheckResult::identity("lap_tilde_cauchy_schwarz", context, cauchy, IDENTITY_TOL),
        CheckResult::identity("rt0_divergence_free", context, rt0_div, IDENTITY_TOL),
        CheckResult::identity("upwind_positivity", context, positivity, IDENTITY_TOL),
        CheckResult::identity("projection_orthogonality", context, orth, IDENTITY_TOL),
    ])
}

/// Assembled matrices against matrix-free operators, and norms against naive summation.
pub fn check_oracles(
    mesh: &Mesh,
    seed: u64,
    context: &str,
) -> Result<Vec<CheckResult>, VerifyError> {
    let mut rng = seeded_rng(seed, 2);
    let disc = Discretization::new(mesh);
    let mut assembly = 0.0f64;
    let mut norms = 0.0f64;
    for _ in 0..ORACLE_TRIALS {
        let q = random_scalar(mesh, &mut rng);
        let v = random_vector(mesh, &mut rng);
        let u = random_vector(mesh, &mut rng);
        let pairs = [
            (
                disc.grad(&q).to_interleaved(),
                grad_h(&q, mesh).to_interleaved(),
            ),
            (disc.div(&v).values, div_h(&v, mesh).values),
            (disc.lap_h.apply(&q.values), lap_h(&q, mesh).values),
            (
                divide_by_area(&apply_componentwise(&disc.lap_tilde, &v), mesh).to_interleaved(),
                lap_tilde_h(&v, mesh).to_interleaved(),
            ),
            (
                divide_by_area(&apply_componentwise(&assemble_conv(&u, mesh), &v), mesh)
                    .to_interleaved(),
                conv_upwind(&u, &v, mesh).to_interleaved(),
            ),
        ];
        for (a, b) in &pairs {
            assembly = assembly.max(rel_max_diff(a, b));
        }

        let naive_l2: f64 = mesh
            .triangles()
            .iter()
            .zip(&v.values)
            .map(|(t, x)| t.area * (x.x * x.x + x.y * x.y))
            .sum();
        norms = norms.max(rel(norm_l2(&v, mesh).powi(2), naive_l2));
        norms = norms.max(rel(fields::norm_h_sq(&v, mesh), naive_norm_h_sq(&v, mesh)));
        let p = project_p1nc_from_p0(&q, mesh);
        norms = norms.max(rel(norm_p1nc(&p, mesh).powi(2), naive_p1nc_sq(&p, mesh)));
    }
    // M div = -(M2 grad)^T entrywise.
    let md = disc.div.scale_rows(&disc.areas);
    let mut weights2 = Vec::with_capacity(2 * disc.areas.len());
    for a in &disc.areas {
        weights2.extend([*a, *a]);
    }
    let gt = disc.grad.scale_rows(&weights2).transpose();
    let diff = md.linear_combination(1.0, &gt, 1.0);
    let scale = (0..md.shape().0)
        .flat_map(|r| md.row(r).map(|(_, v)| v.abs()).collect::<Vec<_>>())
        .fold(0.0, f64::max);
    let adj_entries = (0..diff.shape().0)
        .flat_map(|r| diff.row(r).map(|(_, v)| v.abs()).collect::<Vec<_>>())
        .fold(0.0, f64::max)
        / scale;
    Ok(vec![
        CheckResult::identity("assembly_vs_matrix_free", context, assembly, ORACLE_TOL),
        CheckResult::identity("norms_vs_naive", context, norms, ORACLE_TOL),
        CheckResult::identity(
            "div_is_negative_adjoint_entrywise",
            context,
            adj_entries,
            ORACLE_TOL,
        ),
        CheckResult::identity(
            "lap_tilde_symmetry",
            context,
            disc.lap_tilde.max_asymmetry(),
            0.0,
        ),
    ])
}

/// Degree-4 six-point rule on the reference triangle: barycentric points and weights.
const QUAD_POINTS: [([f64; 3], f64); 6] = [
    (
        [
            0.108_103_018_168_070,
            0.445_948_490_915_965,
            0.445_948_490_915_965,
        ],
        0.223_381_589_678_011,
    ),
    (
        [
            0.445_948_490_915_965,
            0.108_103_018_168_070,
            0.445_948_490_915_965,
        ],
        0.223_381_589_678_011,
    ),
    (
        [
            0.445_948_490_915_965,
            0.445_948_490_915_965,
            0.108_103_018_168_070,
        ],
        0.223_381_589_678_011,
    ),
    (
        [
            0.816_847_572_980_459,
            0.091_576_213_509_771,
            0.091_576_213_509_771,
        ],
        0.109_951_743_655_322,
    ),
    (
        [
            0.091_576_213_509_771,
            0.816_847_572_980_459,
            0.091_576_213_509_771,
        ],
        0.109_951_743_655_322,
    ),
    (
        [
            0.091_576_213_509_771,
            0.091_576_213_509_771,
            0.816_847_572_980_459,
        ],
        0.109_951_743_655_322,
    ),
];

/// `‖v - c‖_{L²}` for a piecewise constant `c`, integrated with the six-point rule.
pub fn continuous_l2_error(v: &AnalyticVector, c: &VectorP0, mesh: &Mesh) -> f64 {
    let verts = mesh.vertices();
    let mut acc = 0.0;
    for (t, ck) in mesh.triangles().iter().zip(&c.values) {
        let [a, b, d] = t.vertices.map(|i| verts[i]);
        for (l, w) in QUAD_POINTS {
            let x = a * l[0] + b * l[1] + d * l[2];
            acc += w * t.area * (v.eval(x, 0.0) - ck).norm_squared();
        }
    }
    acc.sqrt()
}

pub const GRADIENT_ORDER: f64 = 0.9;
pub const CONVECTION_ORDER: f64 = 0.8;
pub const PROJECTION_ORDER: f64 = 0.9;

/// Unit-rhombus refinement levels (cells per side) used by the order checks.
pub const ORDER_LEVELS: [usize; 4] = [4, 8, 16, 32];

/// L² error of the pointwise gradient of the circumcenter interpolant against cell means of `∇q`.
pub fn gradient_sweep(test: &ScalarTest, levels: &[usize]) -> Result<RefinementSweep, VerifyError> {
    let mut sweep = RefinementSweep::default();
    for &n in levels {
        let m = unit_rhombus(n)?;
        let exact = project_p0(&test.gradient, &m, 0.0)?;
        let discrete = grad_h(&interpolate_p0(&test.value, &m, 0.0), &m);
        sweep.push(m.h(), norm_l2(&exact.sub(&discrete), &m));
    }
    Ok(sweep)
}

/// Dual-norm error between the projected exact convection and the upwind operator applied to the
/// interpolated fields.
pub fn convection_sweep(levels: &[usize]) -> Result<RefinementSweep, VerifyError> {
    let test = analytic::convection_test();
    let mut sweep = RefinementSweep::default();
    for &n in levels {
        let m = unit_rhombus(n)?;
        let u = reconstruct_rt0(&project_rt0(&test.u, &m, 0.0)?, &m)?.field;
        let v = interpolate_p0(&test.v, &m, 0.0);
        let exact = project_p0(&test.exact, &m, 0.0)?;
        let err = exact.sub(&conv_upwind(&u, &v, &m));
        sweep.push(m.h(), DualNormEvaluator::new(&m).evaluate(&err)?.value);
    }
    Ok(sweep)
}

pub fn measure_orders(levels: &[usize]) -> Result<Vec<CheckResult>, VerifyError> {
    if levels.len() < 3 {
        return Err(VerifyError::InsufficientLevels(format!(
            "order checks need at least 3 levels, got {}",
            levels.len()
        )));
    }
    let ctx = format!("unit rhombus n={levels:?}");
    let mut out = Vec::new();
    for test in [
        analytic::bubble_squared_scalar(),
        analytic::sine_squared_scalar(),
    ] {
        let sweep = gradient_sweep(&test, levels)?;
        out.push(CheckResult::order(
            &format!("gradient_consistency_{}", test.name),
            &ctx,
            &sweep,
            GRADIENT_ORDER,
        ));
    }
    out.push(CheckResult::order(
        "convection_consistency",
        &ctx,
        &convection_sweep(levels)?,
        CONVECTION_ORDER,
    ));

    let v = analytic::convection_test().v;
    let mut proj = RefinementSweep::default();
    let mut lap = Vec::new();
    let stab = analytic::lap_tilde_stability_test();
    for &n in levels {
        let m = unit_rhombus(n)?;
        proj.push(
            m.h(),
            continuous_l2_error(&v, &project_p0(&v, &m, 0.0)?, &m),
        );
        let l = lap_tilde_h(&interpolate_p0(&stab.v, &m, 0.0), &m);
        lap.push(norm_l2(&l, &m) / stab.h2_norm);
    }
    out.push(CheckResult::order(
        "p0_projection_error",
        &ctx,
        &proj,
        PROJECTION_ORDER,
    ));
    out.push(CheckResult::uniform_spread(
        "lap_tilde_stability",
        &ctx,
        lap,
        2.0,
    ));

    // Affine data: the gradient is exact on interior triangles of a uniform mesh.
    let m = unit_rhombus(levels[0])?;
    let grad = Vec2::new(0.7, -1.3);
    let affine = crate::fields::AnalyticScalar::new(fields::Smoothness::Smooth, move |x, _| {
        grad.dot(&x) + 0.25
    });
    let g = grad_h(&interpolate_p0(&affine, &m, 0.0), &m);
    let mut worst = 0.0f64;
    for (k, t) in m.triangles().iter().enumerate() {
        if t.edges.iter().all(|&e| m.edges()[e].is_interior()) {
            worst = worst.max((g.values[k] - grad).norm() / grad.norm());
        }
    }
    out.push(CheckResult::identity(
        "gradient_exact_for_affine",
        &format!("unit rhombus n={}", levels[0]),
        worst,
        IDENTITY_TOL,
    ));
    Ok(out)
}

/// Largest Rayleigh quotient `(x, A x) / (x, M x)` by power iteration on `M⁻¹ A`.
fn rayleigh_max(
    apply: impl Fn(&[f64]) -> Vec<f64>,
    mass: &[f64],
    mut x: Vec<f64>,
    iters: usize,
) -> f64 {
    let mut best = 0.0f64;
    for _ in 0..iters {
        let ax = apply(&x);
        let xax: f64 = x.iter().zip(&ax).map(|(a, b)| a * b).sum();
        let xmx: f64 = x.iter().zip(mass).map(|(a, m)| a * a * m).sum();
        if xmx == 0.0 {
            break;
        }
        best = best.max(xax / xmx);
        x = ax.iter().zip(mass).map(|(a, m)| a / m).collect();
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            break;
        }
        x.iter_mut().for_each(|v| *v /= norm);
    }
    best
}

pub const INVERSE_SPREAD: f64 = 3.0;
pub const POWER_ITERATIONS: usize = 30;

/// Inverse inequalities for `∇_h` and `‖·‖_h`, the discrete Poincaré constant, and the trilinear
/// form's stability constant, over `base` and `refinements` uniform refinements of it.
pub fn measure_inverse_constants(
    base: &Mesh,
    refinements: usize,
    seed: u64,
) -> Result<Vec<CheckResult>, VerifyError> {
    if refinements < 2 {
        return Err(VerifyError::InsufficientLevels(
            "inverse constants need at least 3 levels".into(),
        ));
    }
    let mut meshes = vec![base.clone()];
    for _ in 0..refinements {
        let next = meshes.last().unwrap().refine_uniform();
        meshes.push(next);
    }
    let mut c_grad = Vec::new();
    let mut c_h = Vec::new();
    let mut poincare = Vec::new();
    let mut c_b = Vec::new();
    let cfg = SolverConfig::default().with_rel_tol(1e-12);
    for (level, m) in meshes.iter().enumerate() {
        let mut rng = seeded_rng(seed, 10 + level as u64);
        let disc = Discretization::new(m);
        let h = m.h();
        let stiffness = disc
            .lap_tilde
            .linear_combination(-1.0, &disc.lap_tilde, 0.0);
        let start = random_scalar(m, &mut rng).values;
        let mut g = 0.0f64;
        let mut hn = 0.0f64;
        for _ in 0..IDENTITY_TRIALS {
            let q = random_scalar(m, &mut rng);
            g = g.max(h * norm_l2(&grad_h(&q, m), m) / norm_l2(&q, m));
            let v = random_vector(m, &mut rng);
            hn = hn.max(h * norm_h(&v, m) / norm_l2(&v, m));
        }
        let lg = rayleigh_max(
            |x| disc.pressure.apply(x),
            &disc.areas,
            start.clone(),
            POWER_ITERATIONS,
        );
        let lh = rayleigh_max(
            |x| stiffness.apply(x),
            &disc.areas,
            start.clone(),
            POWER_ITERATIONS,
        );
        c_grad.push(g.max(h * lg.sqrt()));
        c_h.push(hn.max(h * lh.sqrt()));

        // Poincaré: |v| / ‖v‖_h is largest for the lowest mode; inverse iteration on S⁻¹ M.
        let mut x = start;
        let mut worst = 0.0f64;
        for _ in 0..POWER_ITERATIONS {
            let mx: Vec<f64> = x.iter().zip(&disc.areas).map(|(a, m)| a * m).collect();
            let (y, _) = solver::solve_spd(&stiffness, &mx, &cfg)?;
            let ny = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            x = y.iter().map(|v| v / ny).collect();
            let field = ScalarP0::new(x.clone());
            worst = worst.max(norm_l2(&field, m) / fields::norm_h(&field, m));
        }
        poincare.push(worst);

        let mut b = 0.0f64;
        for _ in 0..IDENTITY_TRIALS {
            let u = random_divergence_free(m, &mut rng)?;
            let v = random_vector(m, &mut rng);
            let w = random_vector(m, &mut rng);
            let r =
                trilinear_b(&u, &v, &w, m).abs() / (norm_l2(&u, m) * norm_h(&v, m) * norm_h(&w, m));
            b = b.max(r);
        }
        c_b.push(b);
    }
    let ctx = format!(
        "{} levels from {} triangles",
        meshes.len(),
        base.n_triangles()
    );
    Ok(vec![
        CheckResult::uniform_spread("inverse_grad_constant", &ctx, c_grad, INVERSE_SPREAD),
        CheckResult::uniform_spread("inverse_h_norm_constant", &ctx, c_h, INVERSE_SPREAD),
        CheckResult::uniform_spread("poincare_constant", &ctx, poincare, INVERSE_SPREAD),
        CheckResult::bounded_by_first("trilinear_stability_constant", &ctx, c_b, INVERSE_SPREAD),
    ])
}

pub const INFSUP_MAX_TRIANGLES: usize = 600;
pub const INFSUP_FACTOR: f64 = 0.5;

/// `β_h = min_q sup_v (∇_h q, v) / (‖v‖_h |Π_P1nc q|)` over mean-free `q`, from a dense
/// generalized symmetric eigenproblem.
pub fn infsup_constant(mesh: &Mesh) -> Result<f64, VerifyError> {
    let n = mesh.n_triangles();
    if n < 2 {
        return Err(VerifyError::InsufficientLevels(
            "inf-sup needs at least two triangles".into(),
        ));
    }
    let disc = Discretization::new(mesh);
    let stiffness = disc.lap_tilde.to_dense() * -1.0;
    let chol = stiffness
        .cholesky()
        .ok_or_else(|| VerifyError::Dense("stiffness matrix is not positive definite".into()))?;
    let grad = disc.grad.to_dense();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for c in 0..2 {
        let mut b = DMatrix::<f64>::zeros(n, n);
        for k in 0..n {
            for j in 0..n {
                b[(k, j)] = disc.areas[k] * grad[(2 * k + c, j)];
            }
        }
        let x = chol.solve(&b);
        a += b.transpose() * x;
    }
    // Π_P1nc as an (edges x n) matrix, weighted by the midpoint-rule masses.
    let tris = mesh.triangles();
    let mut p = DMatrix::<f64>::zeros(mesh.n_edges(), n);
    let mut w = Vec::with_capacity(mesh.n_edges());
    for (i, e) in mesh.edges().iter().enumerate() {
        let k = e.k_triangle;
        match e.l_triangle {
            Some(l) => {
                let total = tris[k].area + tris[l].area;
                p[(i, k)] = tris[k].area / total;
                p[(i, l)] = tris[l].area / total;
                w.push(total / 3.0);
            }
            None => {
                p[(i, k)] = 1.0;
                w.push(tris[k].area / 3.0);
            }
        }
    }
    let wp = DMatrix::from_fn(p.nrows(), n, |i, j| w[i] * p[(i, j)]);
    let b = p.transpose() * wp;
    // Mean-free basis: e_i - (|K_i| / |K_last|) e_last.
    let last = n - 1;
    let z = DMatrix::from_fn(n, n - 1, |r, c| {
        if r == c {
            1.0
        } else if r == last {
            -disc.areas[c] / disc.areas[last]
        } else {
            0.0
        }
    });
    let ar = z.transpose() * &a * &z;
    let br = z.transpose() * &b * &z;
    let lb = br
        .cholesky()
        .ok_or_else(|| VerifyError::Dense("P1nc mass matrix is not positive definite".into()))?
        .l();
    let half = lb
        .solve_lower_triangular(&ar)
        .ok_or_else(|| VerifyError::Dense("triangular solve failed".into()))?;
    let c = lb
        .solve_lower_triangular(&half.transpose())
        .ok_or_else(|| VerifyError::Dense("triangular solve failed".into()))?;
    let sym = (&c + c.transpose()) * 0.5;
    let min = SymmetricEigen::new(sym).eigenvalues.min();
    Ok(min.max(0.0).sqrt())
}

/// Inf-sup constants on `base` and its uniform refinements up to the triangle limit, plus the
/// identity `∇_h q = ∇̃_h(Π_P1nc q)` on each level.
pub fn measure_infsup(base: &Mesh, seed: u64) -> Result<Vec<CheckResult>, VerifyError> {
    if !base.is_uniform(1e-9) {
        return Err(VerifyError::NotUniform);
    }
    let mut meshes = vec![base.clone()];
    while meshes.last().unwrap().n_triangles() * 4 <= INFSUP_MAX_TRIANGLES {
        let next = meshes.last().unwrap().refine_uniform();
        meshes.push(next);
    }
    if meshes.len() < 3 || base.n_triangles() > INFSUP_MAX_TRIANGLES {
        return Err(VerifyError::InsufficientLevels(format!(
            "inf-sup needs 3 levels of at most {INFSUP_MAX_TRIANGLES} triangles; a base mesh with {} triangles allows {}",
            base.n_triangles(),
            meshes.len()
        )));
    }
    let mut betas = Vec::new();
    let mut p1nc_defect = 0.0f64;
    for (level, m) in meshes.iter().enumerate() {
        betas.push(infsup_constant(m)?);
        let mut rng = seeded_rng(seed, 20 + level as u64);
        for _ in 0..IDENTITY_TRIALS {
            let q = random_scalar(m, &mut rng);
            let a = grad_h(&q, m);
            let b = tilde_grad_p1nc(&project_p1nc_from_p0(&q, m), m)?;
            p1nc_defect = p1nc_defect.max(rel_max_diff(&a.to_interleaved(), &b.to_interleaved()));
        }
    }
    let sizes: Vec<usize> = meshes.iter().map(|m| m.n_triangles()).collect();
    let ctx = format!("uniform levels {sizes:?}");
    Ok(vec![
        CheckResult::bounded_below_by_first("infsup_constant", &ctx, betas, INFSUP_FACTOR),
        CheckResult::identity("grad_equals_p1nc_gradient", &ctx, p1nc_defect, IDENTITY_TOL),
    ])
}

/// `(h, k)` grid for the energy, increment and pressure monitors.
#[derive(Debug, Clone)]
pub struct StabilitySweepSpec {
    /// Unit-rhombus cells per side, coarsest first.
    pub levels: Vec<usize>,
    /// Time steps, largest first.
    pub dts: Vec<f64>,
    pub t_end: f64,
    pub reynolds: f64,
    pub initial_velocity: AnalyticVector,
    pub forcing: AnalyticVector,
}

impl Default for StabilitySweepSpec {
    fn default() -> Self {
        let (u0, f) = analytic::vortex_data();
        StabilitySweepSpec {
            levels: vec![4, 8, 16],
            dts: vec![0.04, 0.02, 0.01],
            t_end: 0.4,
            reynolds: 100.0,
            initial_velocity: u0,
            forcing: f,
        }
    }
}

pub const STABILITY_FACTOR: f64 = 3.0;
pub const PYTHAGORAS_TOL: f64 = 1e-12;

/// Monitors of one `(h, k)` cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepCell {
    pub rows: usize,
    pub dt: f64,
    pub energy: f64,
    pub increment: f64,
    pub pressure: f64,
    pub pythagoras: f64,
}

pub fn run_stability_cells(spec: &StabilitySweepSpec) -> Vec<Result<SweepCell, String>> {
    let mut cells = Vec::new();
    for &n in &spec.levels {
        for &dt in &spec.dts {
            cells.push(run_cell(spec, n, dt).map_err(|e| format!("n={n} dt={dt}: {e}")));
        }
    }
    cells
}

fn run_cell(spec: &StabilitySweepSpec, n: usize, dt: f64) -> Result<SweepCell, String> {
    let m = unit_rhombus(n).map_err(|e| e.to_string())?;
    let cfg = SchemeConfig::new(
        spec.reynolds,
        dt,
        spec.t_end,
        spec.forcing.clone(),
        spec.initial_velocity.clone(),
    );
    let mut scheme = Scheme::new(cfg, &m).map_err(|e| e.to_string())?;
    let out = scheme.run(|_, _| {}).map_err(|e| e.to_string())?;
    let mut cell = SweepCell {
        rows: n,
        dt,
        energy: 0.0,
        increment: 0.0,
        pressure: 0.0,
        pythagoras: 0.0,
    };
    for d in &out.series {
        cell.energy = cell.energy.max(d.energy_sum);
        cell.increment = cell.increment.max(d.increment);
        cell.pressure = cell.pressure.max(d.pressure_sum);
        cell.pythagoras = cell.pythagoras.max(d.pythagoras_defect.abs());
    }
    Ok(cell)
}

pub fn stability_sweep(spec: &StabilitySweepSpec) -> Vec<CheckResult> {
    let cells = run_stability_cells(spec);
    let ctx = format!(
        "levels {:?} x dt {:?}, T={}, Re={}",
        spec.levels, spec.dts, spec.t_end, spec.reynolds
    );
    let mut failures = Vec::new();
    let pick = |f: fn(&SweepCell) -> f64| -> Vec<f64> {
        cells
            .iter()
            .map(|c| c.as_ref().map(f).unwrap_or(f64::NAN))
            .collect()
    };
    for c in cells.iter().filter_map(|c| c.as_ref().err()) {
        failures.push(c.clone());
    }
    let mut out = vec![
        CheckResult::bounded_by_first("energy_monitor", &ctx, pick(|c| c.energy), STABILITY_FACTOR),
        CheckResult::bounded_by_first(
            "increment_monitor",
            &ctx,
            pick(|c| c.increment),
            STABILITY_FACTOR,
        ),
        CheckResult::bounded_by_first(
            "pressure_monitor",
            &ctx,
            pick(|c| c.pressure),
            STABILITY_FACTOR,
        ),
    ];
    let worst = pick(|c| c.pythagoras).into_iter().fold(0.0f64, |a, b| {
        if b.is_nan() {
            f64::NAN
        } else {
            a.max(b)
        }
    });
    out.push(CheckResult::identity(
        "pythagoras",
        &ctx,
        worst,
        PYTHAGORAS_TOL,
    ));
    let mut run_ok =
        CheckResult::identity("sweep_cells_completed", &ctx, failures.len() as f64, 0.0);
    if !failures.is_empty() {
        run_ok.context = format!("{ctx}; {}", failures.join("; "));
    }
    out.push(run_ok);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Identities,
    Orders,
    Inverse,
    Infsup,
    Stability,
    All,
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "identities" => Suite::Identities,
            "orders" => Suite::Orders,
            "inverse" => Suite::Inverse,
            "infsup" => Suite::Infsup,
            "stability" => Suite::Stability,
            "all" => Suite::All,
            other => {
                return Err(format!(
                    "unknown suite '{other}' (expected identities, orders, inverse, infsup, stability or all)"
                ))
            }
        })
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Identities => "identities",
            Suite::Orders => "orders",
            Suite::Inverse => "inverse",
            Suite::Infsup => "infsup",
            Suite::Stability => "stability",
            Suite::All => "all",
        })
    }
}

/// Mesh and seed for a suite run. Order and stability checks always use unit-rhombus families;
/// the other suites start from `mesh`.
#[derive(Debug, Clone)]
pub struct SuiteParams {
    pub mesh: Mesh,
    pub mesh_label: String,
    pub seed: u64,
}

impl SuiteParams {
    pub fn equilateral(
        rows: usize,
        cols: usize,
        side: f64,
        seed: u64,
    ) -> Result<Self, VerifyError> {
        Ok(SuiteParams {
            mesh: Mesh::equilateral(rows, cols, side)?,
            mesh_label: format!("equilateral {rows}x{cols} side {side}"),
            seed,
        })
    }
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub suite: Suite,
    pub params_label: String,
    pub seed: u64,
    pub results: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.pass)
    }

    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.results.iter().find(|r| r.name == name)
    }
}

pub fn run_suite(suite: Suite, params: &SuiteParams) -> Result<SuiteReport, VerifyError> {
    let mut results = Vec::new();
    let all = suite == Suite::All;
    let ctx = format!("{} seed {}", params.mesh_label, params.seed);
    if all || suite == Suite::Identities {
        results.extend(check_identities(&params.mesh, params.seed, &ctx)?);
        results.extend(check_oracles(&params.mesh, params.seed, &ctx)?);
    }
    if all || suite == Suite::Orders {
        results.extend(measure_orders(&ORDER_LEVELS)?);
    }
    if all || suite == Suite::Inverse {
        results.extend(measure_inverse_constants(&params.mesh, 2, params.seed)?);
    }
    if all || suite == Suite::Infsup {
        results.extend(measure_infsup(&params.mesh, params.seed)?);
    }
    if all || suite == Suite::Stability {
        results.extend(stability_sweep(&StabilitySweepSpec::default()));
    }
    Ok(SuiteReport {
        suite,
        params_label: params.mesh_label.clone(),
        seed: params.seed,
        results,
    })
}

/// Plain-text report; byte-identical for identical inputs.
pub fn render_report(report: &SuiteReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "suite: {}", report.suite);
    let _ = writeln!(s, "mesh: {}", report.params_label);
    let _ = writeln!(s, "seed: {}", report.seed);
    let width = report
        .results
        .iter()
        .map(|r| r.name.len())
        .max()
        .unwrap_or(4)
        .max(4);
    let _ = writeln!(
        s,
        "{:<width$}  {:<8}  {:<6}  {:>12}  {:>12}  measured",
        "name", "kind", "result", "headline", "threshold"
    );
    for r in &report.results {
        let measured: Vec<String> = r.measured.iter().map(|v| format!("{v:.6e}")).collect();
        let _ = writeln!(
            s,
            "{:<width$}  {:<8}  {:<6}  {:>12.4e}  {:>12.4e}  [{}]  ({})",
            r.name,
            r.kind.to_string(),
            if r.pass { "PASS" } else { "FAIL" },
            r.headline(),
            r.threshold,
            measured.join(", "),
            r.context,
        );
    }
    let failed = report.results.iter().filter(|r| !r.pass).count();
    let _ = writeln!(
        s,
        "summary: {} checks, {} failed",
        report.results.len(),
        failed
    );
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_exact_power_law() {
        let mut s = RefinementSweep::default();
        for h in [0.4, 0.2, 0.1, 0.05] {
            s.push(h, 3.0 * h * h);
        }
        assert!((s.slope() - 2.0).abs() < 1e-12);
        let mut short = RefinementSweep::default();
        short.push(0.1, 1.0);
        short.push(0.05, 0.5);
        assert!(short.slope().is_nan());
        assert!(!CheckResult::order("x", "", &short, 0.5).pass);
    }

    #[test]
    fn bound_helpers() {
        assert!(CheckResult::bounded_by_first("a", "", vec![1.0, 2.9, 0.5], 3.0).pass);
        assert!(!CheckResult::bounded_by_first("a", "", vec![1.0, 3.1], 3.0).pass);
        assert!(!CheckResult::bounded_by_first("a", "", vec![1.0, f64::NAN], 3.0).pass);
        assert!(CheckResult::uniform_spread("a", "", vec![1.0, 2.0], 3.0).pass);
        assert!(!CheckResult::uniform_spread("a", "", vec![1.0, 4.0], 3.0).pass);
        assert!(CheckResult::bounded_below_by_first("a", "", vec![1.0, 0.6], 0.5).pass);
        assert!(!CheckResult::bounded_below_by_first("a", "", vec![1.0, 0.4], 0.5).pass);
    }

    #[test]
    fn quadrature_integrates_quartics() {
        let m = unit_rhombus(2).unwrap();
        let v = AnalyticVector::new(fields::Smoothness::Smooth, |x, _| Vec2::new(x.x * x.x, 0.0));
        // ∫ x⁴ over the rhombus, exact via polynomial integration.
        let x4 = analytic::Poly2::x().pow(4).integrate();
        let err = continuous_l2_error(&v, &VectorP0::zeros(&m), &m);
        assert!((err * err - x4).abs() < 1e-13);
    }

    #[test]
    fn perturbed_mesh_is_admissible_and_non_uniform() {
        let m = perturbed_equilateral(4, 4, 0.25, 0.08, 3).unwrap();
        assert!(m.validate().passed());
        assert!(!m.is_uniform(1e-6));
    }

    #[test]
    fn infsup_rejects_non_uniform_mesh() {
        let m = perturbed_equilateral(2, 2, 0.5, 0.08, 1).unwrap();
        assert!(matches!(
            measure_infsup(&m, 0),
            Err(VerifyError::NotUniform)
        ));
    }

    #[test]
    fn suite_names_round_trip() {
        for s in [
            "identities",
            "orders",
            "inverse",
            "infsup",
            "stability",
            "all",
        ] {
            assert_eq!(s.parse::<Suite>().unwrap().to_string(), s);
        }
        assert!("bogus".parse::<Suite>().is_err());
    }

    #[test]
    fn identities_pass_on_small_mesh() {
        let m = Mesh::equilateral(2, 2, 0.5).unwrap();
        for r in check_identities(&m, 3, "t").unwrap() {
            assert!(r.pass, "{r:?}");
        }
    }
}

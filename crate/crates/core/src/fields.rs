//! Discrete fields (piecewise constants, Crouzeix-Raviart edge values, lowest-order
//! Raviart-Thomas fluxes), analytic fields, and the interpolation/projection operators that
//! move between them.

use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use nalgebra::{Matrix3, Vector3};
use thiserror::Error;

use crate::mesh::{Mesh, Vec2};
use crate::operators;
use crate::solver::{self, SolveReport, SolverConfig, SolverError};

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("analytic field returned a non-finite value at ({x}, {y})")]
    NonFinite { x: f64, y: f64 },
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("field has {got} values, mesh needs {expected}")]
    Length { expected: usize, got: usize },
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("linear solve did not converge: {0:?}")]
    NotConverged(SolveReport),
}

/// Value stored per triangle: a scalar or a 2-vector.
pub trait CellValue:
    Copy + fmt::Debug + PartialEq + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn zero() -> Self;
    fn norm_sq(&self) -> f64;
    fn dot(&self, other: &Self) -> f64;
    fn is_finite(&self) -> bool;
}

impl CellValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn norm_sq(&self) -> f64 {
        self * self
    }
    fn dot(&self, other: &Self) -> f64 {
        self * other
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
}

impl CellValue for Vec2 {
    fn zero() -> Self {
        Vec2::zeros()
    }
    fn norm_sq(&self) -> f64 {
        self.norm_squared()
    }
    fn dot(&self, other: &Self) -> f64 {
        nalgebra::Matrix::dot(self, other)
    }
    fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// One value per triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct P0Field<T> {
    pub values: Vec<T>,
}

pub type ScalarP0 = P0Field<f64>;
pub type VectorP0 = P0Field<Vec2>;

impl<T: CellValue> P0Field<T> {
    pub fn new(values: Vec<T>) -> Self {
        P0Field { values }
    }

    pub fn zeros(mesh: &Mesh) -> Self {
        Self::constant(mesh, T::zero())
    }

    pub fn constant(mesh: &Mesh, value: T) -> Self {
        P0Field {
            values: vec![value; mesh.n_triangles()],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn check_len(&self, mesh: &Mesh) -> Result<(), FieldError> {
        if self.values.len() == mesh.n_triangles() {
            Ok(())
        } else {
            Err(FieldError::Length {
                expected: mesh.n_triangles(),
                got: self.values.len(),
            })
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Self {
        P0Field {
            values: self.values.iter().map(|&v| v * s).collect(),
        }
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + b * s)
    }

    fn zip_map(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        assert_eq!(self.values.len(), other.values.len());
        P0Field {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .map(|v| v.norm_sq().sqrt())
            .fold(0.0, f64::max)
    }
}

impl VectorP0 {
    pub fn component(&self, c: usize) -> Vec<f64> {
        self.values.iter().map(|v| v[c]).collect()
    }

    pub fn from_components(x: &[f64], y: &[f64]) -> Self {
        assert_eq!(x.len(), y.len());
        P0Field {
            values: x.iter().zip(y).map(|(&a, &b)| Vec2::new(a, b)).collect(),
        }
    }

    /// Interleaved `[x0, y0, x1, y1, ...]` layout used by the assembled vector operators.
    pub fn to_interleaved(&self) -> Vec<f64> {
        self.values.iter().flat_map(|v| [v.x, v.y]).collect()
    }

    pub fn from_interleaved(data: &[f64]) -> Self {
        P0Field {
            values: data
                .chunks_exact(2)
                .map(|c| Vec2::new(c[0], c[1]))
                .collect(),
        }
    }
}

/// One value per edge midpoint, the nodal values of a Crouzeix-Raviart function.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarP1nc {
    pub values: Vec<f64>,
}

/// One normal flux per edge, oriented along the edge's `normal_from_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rt0Field {
    pub fluxes: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smoothness {
    /// Infinitely differentiable.
    Smooth,
    H2,
    H1,
    L2,
}

type Evaluator<T> = Arc<dyn Fn(Vec2, f64) -> T + Send + Sync>;

/// A continuous field `f(x, t)`.
///
/// Vector fields built with [`AnalyticField::from_stream_function`] also carry their stream
/// function `ψ` (`f = (∂ψ/∂y, -∂ψ/∂x)`), which lets [`project_rt0`] integrate edge fluxes exactly.
#[derive(Clone)]
pub struct AnalyticField<T> {
    eval: Evaluator<T>,
    stream: Option<Evaluator<f64>>,
    pub smoothness: Smoothness,
}

pub type AnalyticScalar = AnalyticField<f64>;
pub type AnalyticVector = AnalyticField<Vec2>;

impl<T> fmt::Debug for AnalyticField<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AnalyticField")
            .field("smoothness", &self.smoothness)
            .field("has_stream_function", &self.stream.is_some())
            .finish()
    }
}

impl<T: CellValue + Send + Sync + 'static> AnalyticField<T> {
    pub fn new(smoothness: Smoothness, f: impl Fn(Vec2, f64) -> T + Send + Sync + 'static) -> Self {
        AnalyticField {
            eval: Arc::new(f),
            stream: None,
            smoothness,
        }
    }

    pub fn constant(value: T) -> Self {
        Self::new(Smoothness::Smooth, move |_, _| value)
    }

    pub fn zero() -> Self {
        Self::constant(T::zero())
    }

    #[inline]
    pub fn eval(&self, x: Vec2, t: f64) -> T {
        (self.eval)(x, t)
    }

    fn eval_checked(&self, x: Vec2, t: f64) -> Result<T, FieldError> {
        let v = self.eval(x, t);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(FieldError::NonFinite { x: x.x, y: x.y })
        }
    }
}

impl AnalyticVector {
    /// `velocity` must equal `curl ψ = (∂ψ/∂y, -∂ψ/∂x)`; it is not differentiated here.
    pub fn from_stream_function(
        smoothness: Smoothness,
        stream: impl Fn(Vec2, f64) -> f64 + Send + Sync + 'static,
        velocity: impl Fn(Vec2, f64) -> Vec2 + Send + Sync + 'static,
    ) -> Self {
        AnalyticField {
            eval: Arc::new(velocity),
            stream: Some(Arc::new(stream)),
            smoothness,
        }
    }

    pub fn stream_function(&self, x: Vec2, t: f64) -> Option<f64> {
        self.stream.as_ref().map(|s| s(x, t))
    }

    pub fn has_stream_function(&self) -> bool {
        self.stream.is_some()
    }
}

fn triangle_midpoints(mesh: &Mesh, k: usize) -> [Vec2; 3] {
    mesh.triangles()[k].edges.map(|e| mesh.edges()[e].midpoint)
}

/// Cell means `(1/|K|) ∫_K f` by the edge-midpoint rule (exact for quadratics).
pub fn project_p0<T: CellValue + Send + Sync + 'static>(
    f: &AnalyticField<T>,
    mesh: &Mesh,
    t: f64,
) -> Result<P0Field<T>, FieldError> {
    let mut values = Vec::with_capacity(mesh.n_triangles());
    for k in 0..mesh.n_triangles() {
        let mut acc = T::zero();
        for x in triangle_midpoints(mesh, k) {
            acc = acc + f.eval_checked(x, t)?;
        }
        values.push(acc * (1.0 / 3.0));
    }
    Ok(P0Field { values })
}

/// Circumcenter samples `f(x_K)`.
pub fn interpolate_p0<T: CellValue + Send + Sync + 'static>(
    f: &AnalyticField<T>,
    mesh: &Mesh,
    t: f64,
) -> P0Field<T> {
    P0Field {
        values: mesh
            .triangles()
            .iter()
            .map(|tri| f.eval(tri.circumcenter, t))
            .collect(),
    }
}

/// L² projection of a piecewise constant onto the Crouzeix-Raviart space: area-weighted
/// averages on interior edges and the adjacent value on boundary edges.
pub fn project_p1nc_from_p0(q: &ScalarP0, mesh: &Mesh) -> ScalarP1nc {
    let tris = mesh.triangles();
    let values = mesh
        .edges()
        .iter()
        .map(|e| {
            let qk = q.values[e.k_triangle];
            match e.l_triangle {
                Some(l) => {
                    let ak = tris[e.k_triangle].area;
                    let al = tris[l].area;
                    (ak * qk + al * q.values[l]) / (ak + al)
                }
                None => qk,
            }
        })
        .collect();
    ScalarP1nc { values }
}

/// Mean normal component of `f` on every edge.
///
/// Uses exact stream-function differences when `f` carries one, 2-point Gauss otherwise.
pub fn project_rt0(f: &AnalyticVector, mesh: &Mesh, t: f64) -> Result<Rt0Field, FieldError> {
    let verts = mesh.vertices();
    let gauss = 0.5 / 3f64.sqrt();
    let mut fluxes = Vec::with_capacity(mesh.n_edges());
    for e in mesh.edges() {
        let a = verts[e.vertices[0]];
        let b = verts[e.vertices[1]];
        let flux = match &f.stream {
            Some(psi) => {
                let diff = psi(b, t) - psi(a, t);
                if !diff.is_finite() {
                    return Err(FieldError::NonFinite {
                        x: e.midpoint.x,
                        y: e.midpoint.y,
                    });
                }
                diff / e.length
            }
            None => {
                let tangent = b - a;
                let p = f.eval_checked(e.midpoint - tangent * gauss, t)?;
                let q = f.eval_checked(e.midpoint + tangent * gauss, t)?;
                0.5 * (p + q).dot(&e.normal_from_k)
            }
        };
        fluxes.push(flux);
    }
    Ok(Rt0Field { fluxes })
}

impl Rt0Field {
    pub fn zeros(mesh: &Mesh) -> Self {
        Rt0Field {
            fluxes: vec![0.0; mesh.n_edges()],
        }
    }

    /// Fluxes of `curl ψ_h` for a continuous piecewise-linear stream function given at the
    /// vertices. The result is exactly divergence free; it has zero boundary flux when `psi`
    /// is constant along the boundary.
    pub fn from_vertex_stream(mesh: &Mesh, psi: &[f64]) -> Self {
        assert_eq!(psi.len(), mesh.vertices().len());
        Rt0Field {
            fluxes: mesh
                .edges()
                .iter()
                .map(|e| (psi[e.vertices[1]] - psi[e.vertices[0]]) / e.length)
                .collect(),
        }
    }

    pub fn zero_boundary(mut self, mesh: &Mesh) -> Self {
        for &e in mesh.boundary_edges() {
            self.fluxes[e] = 0.0;
        }
        self
    }
}

#[derive(Debug, Clone)]
pub struct Rt0Reconstruction {
    /// `a_K + b_K x_K` for every triangle.
    pub field: VectorP0,
    /// Largest `|b_K|`; zero exactly when the fluxes are divergence free on every triangle.
    pub max_b: f64,
}

/// Recovers the local Raviart-Thomas function `v(x) = a_K + b_K x` of every triangle from its
/// three edge fluxes and samples it at the circumcenter.
pub fn reconstruct_rt0(r: &Rt0Field, mesh: &Mesh) -> Result<Rt0Reconstruction, FieldError> {
    if r.fluxes.len() != mesh.n_edges() {
        return Err(FieldError::Length {
            expected: mesh.n_edges(),
            got: r.fluxes.len(),
        });
    }
    let mut values = Vec::with_capacity(mesh.n_triangles());
    let mut max_b = 0.0f64;
    for (k, tri) in mesh.triangles().iter().enumerate() {
        // Unknowns (a', b) of v(x) = a' + b (x - x_K); a' is the circumcenter value.
        let mut m = Matrix3::zeros();
        let mut rhs = Vector3::zeros();
        for (row, &e) in tri.edges.iter().enumerate() {
            let edge = &mesh.edges()[e];
            let n = mesh.outward_normal(k, e);
            let sign = if edge.k_triangle == k { 1.0 } else { -1.0 };
            m[(row, 0)] = n.x;
            m[(row, 1)] = n.y;
            m[(row, 2)] = (edge.midpoint - tri.circumcenter).dot(&n);
            rhs[row] = sign * r.fluxes[e];
        }
        let sol = m.lu().solve(&rhs).ok_or_else(|| {
            FieldError::Geometry(format!("singular Raviart-Thomas system on triangle {k}"))
        })?;
        max_b = max_b.max(sol[2].abs());
        values.push(Vec2::new(sol[0], sol[1]));
    }
    Ok(Rt0Reconstruction {
        field: P0Field { values },
        max_b,
    })
}

/// `Σ_K |K| a_K · b_K`.
pub fn inner<T: CellValue>(a: &P0Field<T>, b: &P0Field<T>, mesh: &Mesh) -> f64 {
    mesh.triangles()
        .iter()
        .zip(a.values.iter().zip(&b.values))
        .map(|(t, (x, y))| t.area * x.dot(y))
        .sum()
}

pub fn norm_l2<T: CellValue>(v: &P0Field<T>, mesh: &Mesh) -> f64 {
    inner(v, v, mesh).sqrt()
}

/// Discrete H¹ norm: `Σ_int τ_σ |v_L - v_K|² + Σ_ext τ_σ |v_K|²`, square-rooted.
pub fn norm_h<T: CellValue>(v: &P0Field<T>, mesh: &Mesh) -> f64 {
    norm_h_sq(v, mesh).sqrt()
}

pub fn norm_h_sq<T: CellValue>(v: &P0Field<T>, mesh: &Mesh) -> f64 {
    mesh.edges()
        .iter()
        .map(|e| {
            let vk = v.values[e.k_triangle];
            let jump = match e.l_triangle {
                Some(l) => v.values[l] - vk,
                None => vk,
            };
            e.tau_sigma * jump.norm_sq()
        })
        .sum()
}

/// Dual norm `sup_ψ (v, ψ) / ‖ψ‖_h` and the maximizing `ψ`.
#[derive(Debug, Clone)]
pub struct DualNorm {
    pub value: f64,
    pub maximizer: VectorP0,
    pub reports: [SolveReport; 2],
}

/// Evaluates `‖·‖_{-1,h}` by solving with the Gram matrix `S` of `‖·‖_h`
/// (`S = -|K| Δ̃_h`, the transmissibility stiffness).
pub struct DualNormEvaluator<'m> {
    mesh: &'m Mesh,
    gram: crate::sparse::SparseOperator,
    cfg: SolverConfig,
}

impl<'m> DualNormEvaluator<'m> {
    pub fn new(mesh: &'m Mesh) -> Self {
        let stiffness = operators::assemble_lap_tilde(mesh);
        let gram = stiffness.linear_combination(-1.0, &stiffness, 0.0);
        DualNormEvaluator {
            mesh,
            gram,
            cfg: SolverConfig::default().with_rel_tol(1e-12),
        }
    }

    pub fn with_config(mut self, cfg: SolverConfig) -> Self {
        self.cfg = cfg;
        self
    }

    pub fn evaluate(&self, v: &VectorP0) -> Result<DualNorm, FieldError> {
        v.check_len(self.mesh)?;
        let areas = self.mesh.areas();
        let mut total = 0.0;
        let mut comps = [Vec::new(), Vec::new()];
        let mut reports = [SolveReport::default(); 2];
        for c in 0..2 {
            let mv: Vec<f64> = v.values.iter().zip(&areas).map(|(v, a)| a * v[c]).collect();
            let (x, rep) = solver::solve_spd(&self.gram, &mv, &self.cfg)?;
            if !rep.converged {
                return Err(FieldError::NotConverged(rep));
            }
            total += mv.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>();
            comps[c] = x;
            reports[c] = rep;
        }
        Ok(DualNorm {
            value: total.max(0.0).sqrt(),
            maximizer: VectorP0::from_components(&comps[0], &comps[1]),
            reports,
        })
    }
}

pub fn norm_dual_h(v: &VectorP0, mesh: &Mesh) -> Result<f64, FieldError> {
    Ok(DualNormEvaluator::new(mesh).evaluate(v)?.value)
}

/// Cellwise gradient of the Crouzeix-Raviart function with the given midpoint values.
pub fn tilde_grad_p1nc(q: &ScalarP1nc, mesh: &Mesh) -> Result<VectorP0, FieldError> {
    let mut values = Vec::with_capacity(mesh.n_triangles());
    for (k, tri) in mesh.triangles().iter().enumerate() {
        if tri.area.is_nan() || tri.area <= 0.0 {
            return Err(FieldError::Geometry(format!("triangle {k} has no area")));
        }
        // ∫_K ∇q = Σ_σ |σ| q(x_σ) n_{K,σ} because q is affine on each edge.
        let mut g = Vec2::zeros();
        for &e in &tri.edges {
            g += mesh.outward_normal(k, e) * (mesh.edges()[e].length * q.values[e]);
        }
        values.push(g / tri.area);
    }
    Ok(P0Field { values })
}

/// L² norm of a Crouzeix-Raviart function, exact via the edge-midpoint rule.
pub fn norm_p1nc(q: &ScalarP1nc, mesh: &Mesh) -> f64 {
    let tris = mesh.triangles();
    mesh.edges()
        .iter()
        .zip(&q.values)
        .map(|(e, v)| {
            let w = tris[e.k_triangle].area + e.l_triangle.map_or(0.0, |l| tris[l].area);
            w / 3.0 * v * v
        })
        .sum::<f64>()
        .sqrt()
}

/// `(|q|² + |∇̃_h q|²)^{1/2}`.
pub fn norm_1h_p1nc(q: &ScalarP1nc, mesh: &Mesh) -> Result<f64, FieldError> {
    let g = tilde_grad_p1nc(q, mesh)?;
    Ok((norm_p1nc(q, mesh).powi(2) + norm_l2(&g, mesh).powi(2)).sqrt())
}

pub fn mean<T: CellValue>(q: &P0Field<T>, mesh: &Mesh) -> T {
    let mut acc = T::zero();
    for (t, v) in mesh.triangles().iter().zip(&q.values) {
        acc = acc + *v * t.area;
    }
    acc * (1.0 / mesh.total_area())
}

/// Subtracts the area-weighted mean.
pub fn mean_zero(q: &ScalarP0, mesh: &Mesh) -> ScalarP0 {
    let m = mean(q, mesh);
    P0Field {
        values: q.values.iter().map(|v| v - m).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn single() -> Mesh {
        Mesh::load("3 2 0 0\n1 0 0\n2 1 0\n3 0.2 0.9\n", "1 3 0\n1 1 2 3\n").unwrap()
    }

    fn random_scalar(mesh: &Mesh, rng: &mut ChaCha8Rng) -> ScalarP0 {
        P0Field::new(
            (0..mesh.n_triangles())
                .map(|_| rng.gen_range(-1.0..1.0))
                .collect(),
        )
    }

    #[test]
    fn projection_of_constant_and_linear() {
        let m = Mesh::equilateral(2, 2, 0.5).unwrap();
        let c = project_p0(&AnalyticScalar::constant(3.5), &m, 0.0).unwrap();
        assert!(c.values.iter().all(|&v| v == 3.5));

        let s = single();
        let f = AnalyticScalar::new(Smoothness::Smooth, |x, _| x.x);
        let p = project_p0(&f, &s, 0.0).unwrap();
        let centroid = (0.0 + 1.0 + 0.2) / 3.0;
        assert!((p.values[0] - centroid).abs() < 1e-15);
    }

    #[test]
    fn projection_stays_within_bounds_of_sharp_function() {
        let m = Mesh::equilateral(3, 3, 1.0 / 3.0).unwrap();
        let f = AnalyticScalar::new(Smoothness::L2, |x, _| if x.x > 0.7 { 2.0 } else { -1.0 });
        let p = project_p0(&f, &m, 0.0).unwrap();
        assert!(p.values.iter().all(|&v| (-1.0..=2.0).contains(&v)));
    }

    #[test]
    fn non_finite_evaluation_propagates() {
        let m = single();
        let f = AnalyticScalar::new(Smoothness::L2, |_, _| f64::NAN);
        assert!(matches!(
            project_p0(&f, &m, 0.0),
            Err(FieldError::NonFinite { .. })
        ));
    }

    #[test]
    fn interpolation_samples_circumcenters() {
        let m = Mesh::equilateral(2, 2, 0.5).unwrap();
        let f = AnalyticScalar::new(Smoothness::Smooth, |x, _| 2.0 * x.x - x.y + 1.0);
        let q = interpolate_p0(&f, &m, 0.0);
        for (t, v) in m.triangles().iter().zip(&q.values) {
            let x = t.circumcenter;
            assert_eq!(*v, 2.0 * x.x - x.y + 1.0);
        }
    }

    #[test]
    fn p1nc_projection_formulas() {
        let m = Mesh::equilateral(1, 1, 1.0).unwrap();
        let q = ScalarP0::new(vec![0.0, 1.0]);
        let p = project_p1nc_from_p0(&q, &m);
        let interior = m.interior_edges()[0];
        assert!((p.values[interior] - 0.5).abs() < 1e-15);
        for &e in m.boundary_edges() {
            assert_eq!(p.values[e], q.values[m.edges()[e].k_triangle]);
        }
        let c = project_p1nc_from_p0(&ScalarP0::constant(&m, 4.0), &m);
        assert!(c.values.iter().all(|v| (v - 4.0).abs() < 1e-15));
    }

    #[test]
    fn rt0_of_constant_field() {
        let m = Mesh::equilateral(2, 2, 0.5).unwrap();
        let f = AnalyticVector::constant(Vec2::new(1.0, 0.0));
        let r = project_rt0(&f, &m, 0.0).unwrap();
        for (e, flux) in m.edges().iter().zip(&r.fluxes) {
            assert!((flux - e.normal_from_k.x).abs() < 1e-15);
        }
        let rec = reconstruct_rt0(&r, &m).unwrap();
        assert!(rec.max_b < 1e-13);
        for v in &rec.field.values {
            assert!((v - Vec2::new(1.0, 0.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn rt0_of_radial_field_vanishes_on_radial_edges() {
        let node = "3 2 0 0\n1 0 0\n2 1 0.1\n3 0.3 0.9\n";
        let m = Mesh::load(node, "1 3 0\n1 1 2 3\n").unwrap();
        let radial = AnalyticVector::new(Smoothness::Smooth, |x, _| x);
        let r = project_rt0(&radial, &m, 0.0).unwrap();
        for (e, flux) in m.edges().iter().zip(&r.fluxes) {
            if e.vertices.contains(&0) {
                assert!(flux.abs() < 1e-15, "{flux}");
            }
        }
        // x itself is a Raviart-Thomas function with b = 1.
        let rec = reconstruct_rt0(&r, &m).unwrap();
        assert!((rec.max_b - 1.0).abs() < 1e-13);
        assert!((rec.field.values[0] - m.triangles()[0].circumcenter).norm() < 1e-13);

        let rotation = AnalyticVector::new(Smoothness::Smooth, |x, _| Vec2::new(x.y, -x.x));
        let r = project_rt0(&rotation, &m, 0.0).unwrap();
        assert!(reconstruct_rt0(&r, &m).unwrap().max_b < 1e-13);
    }

    #[test]
    fn zero_fluxes_reconstruct_to_zero() {
        let m = Mesh::equilateral(2, 2, 0.5).unwrap();
        let rec = reconstruct_rt0(&Rt0Field::zeros(&m), &m).unwrap();
        assert!(rec.field.values.iter().all(|v| *v == Vec2::zeros()));
        assert_eq!(rec.max_b, 0.0);
    }

    #[test]
    fn norms_of_simple_fields() {
        let m = Mesh::equilateral(3, 2, 0.4).unwrap();
        let z = VectorP0::zeros(&m);
        assert_eq!(norm_l2(&z, &m), 0.0);
        assert_eq!(norm_h(&z, &m), 0.0);
        let one = ScalarP0::constant(&m, 1.0);
        assert!((norm_l2(&one, &m) - m.total_area().sqrt()).abs() < 1e-14);
        let c = Vec2::new(0.3, -0.4);
        let cv = VectorP0::constant(&m, c);
        let ext: f64 = m
            .boundary_edges()
            .iter()
            .map(|&e| m.edges()[e].tau_sigma)
            .sum();
        assert!((norm_h(&cv, &m) - ext.sqrt() * c.norm()).abs() < 1e-13);
    }

    #[test]
    fn l2_norm_matches_naive_sum() {
        let m = Mesh::equilateral(4, 4, 0.25).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let q = random_scalar(&m, &mut rng);
        let mut naive = 0.0;
        for k in 0..m.n_triangles() {
            naive += m.triangles()[k].area * q.values[k] * q.values[k];
        }
        let n = norm_l2(&q, &m);
        assert!((n - naive.sqrt()).abs() <= 1e-14 * n);
    }

    #[test]
    fn dual_norm_bounds_pairings_and_attains_sup() {
        let m = Mesh::equilateral(4, 4, 0.25).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let v = VectorP0::from_components(
            &random_scalar(&m, &mut rng).values,
            &random_scalar(&m, &mut rng).values,
        );
        let dual = DualNormEvaluator::new(&m).evaluate(&v).unwrap();
        for _ in 0..100 {
            let psi = VectorP0::from_components(
                &random_scalar(&m, &mut rng).values,
                &random_scalar(&m, &mut rng).values,
            );
            assert!(inner(&v, &psi, &m) <= dual.value * norm_h(&psi, &m) * (1.0 + 1e-12));
        }
        let x = &dual.maximizer;
        let ratio = inner(&v, x, &m) / norm_h(x, &m);
        assert!((ratio - dual.value).abs() <= 1e-10 * dual.value);
        assert_eq!(norm_dual_h(&VectorP0::zeros(&m), &m).unwrap(), 0.0);
    }

    #[test]
    fn tilde_grad_of_constants_and_linears() {
        let m = Mesh::equilateral(3, 3, 1.0 / 3.0).unwrap();
        let g = tilde_grad_p1nc(
            &ScalarP1nc {
                values: vec![2.0; m.n_edges()],
            },
            &m,
        )
        .unwrap();
        assert!(g.max_abs() < 1e-12);
        let grad = Vec2::new(1.5, -0.7);
        let lin = ScalarP1nc {
            values: m
                .edges()
                .iter()
                .map(|e| grad.dot(&e.midpoint) + 0.3)
                .collect(),
        };
        let g = tilde_grad_p1nc(&lin, &m).unwrap();
        for v in &g.values {
            assert!((v - grad).norm() < 1e-12);
        }
    }

    #[test]
    fn p1nc_projection_keeps_mean_zero() {
        let m = Mesh::equilateral(3, 4, 0.3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let q = mean_zero(&random_scalar(&m, &mut rng), &m);
        let p = project_p1nc_from_p0(&q, &m);
        // ∫ of a P1nc function is Σ_σ (|K_σ| + |L_σ|)/3 · value.
        let tris = m.triangles();
        let integral: f64 = m
            .edges()
            .iter()
            .zip(&p.values)
            .map(|(e, v)| {
                (tris[e.k_triangle].area + e.l_triangle.map_or(0.0, |l| tris[l].area)) / 3.0 * v
            })
            .sum();
        assert!(integral.abs() < 1e-15);
    }

    #[test]
    fn mean_zero_properties() {
        let m = Mesh::equilateral(3, 3, 1.0 / 3.0).unwrap();
        let five = mean_zero(&ScalarP0::constant(&m, 5.0), &m);
        assert!(five.max_abs() < 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let q = mean_zero(&random_scalar(&m, &mut rng), &m);
        let again = mean_zero(&q, &m);
        for (a, b) in q.values.iter().zip(&again.values) {
            assert!((a - b).abs() <= 1e-15);
        }
        let weighted: f64 = m
            .triangles()
            .iter()
            .zip(&q.values)
            .map(|(t, v)| t.area * v)
            .sum();
        assert!(weighted.abs() <= 1e-13 * norm_l2(&q, &m) * m.total_area());
    }

    #[test]
    fn vertex_stream_fluxes_are_divergence_free() {
        let m = Mesh::equilateral(3, 3, 1.0 / 3.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let psi: Vec<f64> = (0..m.vertices().len())
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        let r = Rt0Field::from_vertex_stream(&m, &psi);
        let rec = reconstruct_rt0(&r, &m).unwrap();
        assert!(rec.max_b < 1e-12 * r.fluxes.iter().fold(0.0f64, |a, b| a.max(b.abs())) / m.h());
    }
}

//! Discrete gradient, divergence, Laplacians and upwind convection on piecewise constants,
//! both matrix free and assembled.
//!
//! Assembled vector operators use the interleaved layout: row/column `2K + c` is component `c`
//! of triangle `K`. The componentwise operators (`Δ̃_h`, upwind convection) are assembled as
//! scalar `n x n` matrices and applied to each component separately.

use crate::fields::{CellValue, P0Field, ScalarP0, VectorP0};
use crate::mesh::{Mesh, Vec2};
use crate::sparse::{SparseOperator, Symmetry};

fn positive(a: f64) -> f64 {
    a.max(0.0)
}

fn negative(a: f64) -> f64 {
    a.min(0.0)
}

/// `∇_h q`: linear interpolation of `q` to interior edges, one-sided value on the boundary.
pub fn grad_h(q: &ScalarP0, mesh: &Mesh) -> VectorP0 {
    let mut out = vec![Vec2::zeros(); mesh.n_triangles()];
    for e in mesh.edges() {
        let k = e.k_triangle;
        let flux = match e.l_triangle {
            Some(l) => {
                let q_sigma = e.alpha_k_l * q.values[k] + e.alpha_l_k() * q.values[l];
                let f = e.normal_from_k * (e.length * q_sigma);
                out[l] -= f;
                f
            }
            None => e.normal_from_k * (e.length * q.values[k]),
        };
        out[k] += flux;
    }
    for (v, t) in out.iter_mut().zip(mesh.triangles()) {
        *v /= t.area;
    }
    P0Field::new(out)
}

/// `div_h v`, summed over interior edges only. The edge value uses the weights swapped relative
/// to [`grad_h`], which makes the two operators adjoint.
pub fn div_h(v: &VectorP0, mesh: &Mesh) -> ScalarP0 {
    let mut out = vec![0.0; mesh.n_triangles()];
    for &ei in mesh.interior_edges() {
        let e = &mesh.edges()[ei];
        let (k, l) = (e.k_triangle, e.l_triangle.unwrap());
        let v_sigma = v.values[k] * e.alpha_l_k() + v.values[l] * e.alpha_k_l;
        let flux = e.length * v_sigma.dot(&e.normal_from_k);
        out[k] += flux;
        out[l] -= flux;
    }
    for (v, t) in out.iter_mut().zip(mesh.triangles()) {
        *v /= t.area;
    }
    P0Field::new(out)
}

/// `Δ_h = div_h ∘ ∇_h`.
pub fn lap_h(q: &ScalarP0, mesh: &Mesh) -> ScalarP0 {
    div_h(&grad_h(q, mesh), mesh)
}

/// Two-point flux Laplacian with homogeneous Dirichlet data, applied componentwise.
pub fn lap_tilde_h<T: CellValue>(v: &P0Field<T>, mesh: &Mesh) -> P0Field<T> {
    let mut out = vec![T::zero(); mesh.n_triangles()];
    for e in mesh.edges() {
        let k = e.k_triangle;
        let vk = v.values[k];
        match e.l_triangle {
            Some(l) => {
                let f = (v.values[l] - vk) * e.tau_sigma;
                out[k] = out[k] + f;
                out[l] = out[l] - f;
            }
            None => out[k] = out[k] - vk * e.tau_sigma,
        }
    }
    for (v, t) in out.iter_mut().zip(mesh.triangles()) {
        *v = *v * (1.0 / t.area);
    }
    P0Field::new(out)
}

/// Edge advecting velocity `u_σ·n_{K,σ}` (same weights as [`div_h`]), `None` on the boundary.
fn edge_velocity(u: &VectorP0, e: &crate::mesh::Edge) -> Option<f64> {
    let l = e.l_triangle?;
    let u_sigma = u.values[e.k_triangle] * e.alpha_l_k() + u.values[l] * e.alpha_k_l;
    Some(u_sigma.dot(&e.normal_from_k))
}

/// Upwind convection `b̃_h(u, v)`, applied componentwise to `v`.
///
/// A zero edge velocity contributes nothing (both parts vanish).
pub fn conv_upwind<T: CellValue>(u: &VectorP0, v: &P0Field<T>, mesh: &Mesh) -> P0Field<T> {
    let mut out = vec![T::zero(); mesh.n_triangles()];
    for &ei in mesh.interior_edges() {
        let e = &mesh.edges()[ei];
        let (k, l) = (e.k_triangle, e.l_triangle.unwrap());
        let a = edge_velocity(u, e).unwrap();
        let (vk, vl) = (v.values[k], v.values[l]);
        out[k] = out[k] + (vk * positive(a) + vl * negative(a)) * e.length;
        out[l] = out[l] + (vl * positive(-a) + vk * negative(-a)) * e.length;
    }
    for (v, t) in out.iter_mut().zip(mesh.triangles()) {
        *v = *v * (1.0 / t.area);
    }
    P0Field::new(out)
}

/// `b_h(u, v, w) = Σ_K |K| w_K · b̃_h(u, v)|_K`.
pub fn trilinear_b(u: &VectorP0, v: &VectorP0, w: &VectorP0, mesh: &Mesh) -> f64 {
    crate::fields::inner(&conv_upwind(u, v, mesh), w, mesh)
}

/// `∇_h` as a `2n x n` matrix.
pub fn assemble_grad(mesh: &Mesh) -> SparseOperator {
    let n = mesh.n_triangles();
    let tris = mesh.triangles();
    let mut t = Vec::with_capacity(8 * mesh.n_edges());
    for e in mesh.edges() {
        let k = e.k_triangle;
        let w = e.normal_from_k * e.length;
        for c in 0..2 {
            match e.l_triangle {
                Some(l) => {
                    let (ak, al) = (tris[k].area, tris[l].area);
                    t.push((2 * k + c, k, w[c] * e.alpha_k_l / ak));
                    t.push((2 * k + c, l, w[c] * e.alpha_l_k() / ak));
                    t.push((2 * l + c, k, -w[c] * e.alpha_k_l / al));
                    t.push((2 * l + c, l, -w[c] * e.alpha_l_k() / al));
                }
                None => t.push((2 * k + c, k, w[c] / tris[k].area)),
            }
        }
    }
    SparseOperator::from_triplets(2 * n, n, t, Symmetry::General)
}

/// `div_h` as an `n x 2n` matrix.
pub fn assemble_div(mesh: &Mesh) -> SparseOperator {
    let n = mesh.n_triangles();
    let tris = mesh.triangles();
    let mut t = Vec::with_capacity(8 * mesh.n_edges());
    for &ei in mesh.interior_edges() {
        let e = &mesh.edges()[ei];
        let (k, l) = (e.k_triangle, e.l_triangle.unwrap());
        let (ak, al) = (tris[k].area, tris[l].area);
        let w = e.normal_from_k * e.length;
        for c in 0..2 {
            t.push((k, 2 * k + c, w[c] * e.alpha_l_k() / ak));
            t.push((k, 2 * l + c, w[c] * e.alpha_k_l / ak));
            t.push((l, 2 * k + c, -w[c] * e.alpha_l_k() / al));
            t.push((l, 2 * l + c, -w[c] * e.alpha_k_l / al));
        }
    }
    SparseOperator::from_triplets(n, 2 * n, t, Symmetry::General)
}

/// `Δ_h` as the product of the assembled divergence and gradient.
pub fn assemble_lap_h(mesh: &Mesh) -> SparseOperator {
    assemble_div(mesh).matmul(&assemble_grad(mesh))
}

/// Integrated (area-weighted) form `M Δ̃_h` of the scalar two-point Laplacian: entries `±τ_σ`,
/// exactly symmetric and negative definite. Divide rows by `|K|` to get `Δ̃_h` pointwise.
pub fn assemble_lap_tilde(mesh: &Mesh) -> SparseOperator {
    let n = mesh.n_triangles();
    let mut t = Vec::with_capacity(4 * mesh.n_edges());
    for e in mesh.edges() {
        let k = e.k_triangle;
        match e.l_triangle {
            Some(l) => {
                t.push((k, k, -e.tau_sigma));
                t.push((k, l, e.tau_sigma));
                t.push((l, k, e.tau_sigma));
                t.push((l, l, -e.tau_sigma));
            }
            None => t.push((k, k, -e.tau_sigma)),
        }
    }
    SparseOperator::from_triplets(n, n, t, Symmetry::Symmetric)
}

/// Integrated (area-weighted) form `M b̃_h(u, ·)` of the scalar upwind operator for a frozen `u`.
pub fn assemble_conv(u: &VectorP0, mesh: &Mesh) -> SparseOperator {
    let n = mesh.n_triangles();
    let mut t = Vec::with_capacity(4 * mesh.interior_edges().len());
    for &ei in mesh.interior_edges() {
        let e = &mesh.edges()[ei];
        let (k, l) = (e.k_triangle, e.l_triangle.unwrap());
        let a = edge_velocity(u, e).unwrap();
        t.push((k, k, e.length * positive(a)));
        t.push((k, l, e.length * negative(a)));
        t.push((l, l, e.length * positive(-a)));
        t.push((l, k, e.length * negative(-a)));
    }
    SparseOperator::from_triplets(n, n, t, Symmetry::General)
}

/// Applies a scalar `n x n` matrix to both components of a vector field.
pub fn apply_componentwise(a: &SparseOperator, v: &VectorP0) -> VectorP0 {
    let x = a.apply(&v.component(0));
    let y = a.apply(&v.component(1));
    VectorP0::from_components(&x, &y)
}

/// Divides every value by its triangle area (integrated form to pointwise form).
pub fn divide_by_area<T: CellValue>(v: &P0Field<T>, mesh: &Mesh) -> P0Field<T> {
    P0Field::new(
        v.values
            .iter()
            .zip(mesh.triangles())
            .map(|(&x, t)| x * (1.0 / t.area))
            .collect(),
    )
}

/// Mesh-dependent matrices reused by every time step.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub areas: Vec<f64>,
    pub grad: SparseOperator,
    pub div: SparseOperator,
    pub lap_h: SparseOperator,
    /// `M Δ̃_h`, integrated form.
    pub lap_tilde: SparseOperator,
    /// `-M Δ_h`, the symmetric positive semi-definite pressure matrix.
    pub pressure: SparseOperator,
}

impl Discretization {
    pub fn new(mesh: &Mesh) -> Self {
        let areas = mesh.areas();
        let grad = assemble_grad(mesh);
        let div = assemble_div(mesh);
        let lap_h = div.matmul(&grad);
        let neg_areas: Vec<f64> = areas.iter().map(|a| -a).collect();
        let pressure = lap_h.scale_rows(&neg_areas);
        Discretization {
            areas,
            grad,
            div,
            lap_h,
            lap_tilde: assemble_lap_tilde(mesh),
            pressure,
        }
    }

    pub fn grad(&self, q: &ScalarP0) -> VectorP0 {
        VectorP0::from_interleaved(&self.grad.apply(&q.values))
    }

    pub fn div(&self, v: &VectorP0) -> ScalarP0 {
        ScalarP0::new(self.div.apply(&v.to_interleaved()))
    }
}

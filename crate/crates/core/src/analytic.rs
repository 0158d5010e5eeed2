//! Exact test functions on the unit rhombus `{s (1, 0) + t (1/2, √3/2) : s, t ∈ [0, 1]}`
//! (the domain of `Mesh::equilateral(n, n, 1/n)`), with derivatives computed exactly.

use std::f64::consts::PI;

use crate::fields::{AnalyticScalar, AnalyticVector, Smoothness};
use crate::mesh::Vec2;

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Affine coordinates `(s, t)` of a point of the plane.
pub fn rhombus_coords(x: Vec2) -> (f64, f64) {
    (x.x - x.y / SQRT3, 2.0 * x.y / SQRT3)
}

/// Area of the unit rhombus.
pub const RHOMBUS_AREA: f64 = SQRT3 / 2.0;

/// Polynomial `Σ c_ij s^i t^j` in the rhombus coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly2 {
    /// `coeffs[i][j]` multiplies `s^i t^j`.
    coeffs: Vec<Vec<f64>>,
}

impl Poly2 {
    pub fn constant(c: f64) -> Self {
        Poly2 {
            coeffs: vec![vec![c]],
        }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn s() -> Self {
        Poly2 {
            coeffs: vec![vec![0.0], vec![1.0]],
        }
    }

    pub fn t() -> Self {
        Poly2 {
            coeffs: vec![vec![0.0, 1.0]],
        }
    }

    /// `x = s + t/2`.
    pub fn x() -> Self {
        Self::s().add(&Self::t().scale(0.5))
    }

    /// `y = (√3/2) t`.
    pub fn y() -> Self {
        Self::t().scale(SQRT3 / 2.0)
    }

    fn degree_s(&self) -> usize {
        self.coeffs.len() - 1
    }

    fn degree_t(&self) -> usize {
        self.coeffs.iter().map(|r| r.len()).max().unwrap_or(1) - 1
    }

    fn coeff(&self, i: usize, j: usize) -> f64 {
        self.coeffs
            .get(i)
            .and_then(|r| r.get(j))
            .copied()
            .unwrap_or(0.0)
    }

    fn from_fn(ds: usize, dt: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        Poly2 {
            coeffs: (0..=ds)
                .map(|i| (0..=dt).map(|j| f(i, j)).collect())
                .collect(),
        }
    }

    pub fn add(&self, o: &Poly2) -> Poly2 {
        let ds = self.degree_s().max(o.degree_s());
        let dt = self.degree_t().max(o.degree_t());
        Self::from_fn(ds, dt, |i, j| self.coeff(i, j) + o.coeff(i, j))
    }

    pub fn sub(&self, o: &Poly2) -> Poly2 {
        self.add(&o.scale(-1.0))
    }

    pub fn scale(&self, a: f64) -> Poly2 {
        Poly2 {
            coeffs: self
                .coeffs
                .iter()
                .map(|r| r.iter().map(|c| c * a).collect())
                .collect(),
        }
    }

    pub fn mul(&self, o: &Poly2) -> Poly2 {
        let (ds, dt) = (
            self.degree_s() + o.degree_s(),
            self.degree_t() + o.degree_t(),
        );
        let mut out = Self::from_fn(ds, dt, |_, _| 0.0);
        for (i, row) in self.coeffs.iter().enumerate() {
            for (j, &a) in row.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (k, orow) in o.coeffs.iter().enumerate() {
                    for (l, &b) in orow.iter().enumerate() {
                        out.coeffs[i + k][j + l] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Poly2 {
        (0..n).fold(Poly2::constant(1.0), |acc, _| acc.mul(self))
    }

    pub fn d_s(&self) -> Poly2 {
        let ds = self.degree_s().saturating_sub(1);
        Self::from_fn(ds, self.degree_t(), |i, j| {
            (i + 1) as f64 * self.coeff(i + 1, j)
        })
    }

    pub fn d_t(&self) -> Poly2 {
        let dt = self.degree_t().saturating_sub(1);
        Self::from_fn(self.degree_s(), dt, |i, j| {
            (j + 1) as f64 * self.coeff(i, j + 1)
        })
    }

    /// `∂/∂x = ∂_s`.
    pub fn d_x(&self) -> Poly2 {
        self.d_s()
    }

    /// `∂/∂y = -∂_s/√3 + 2∂_t/√3`.
    pub fn d_y(&self) -> Poly2 {
        self.d_s()
            .scale(-1.0 / SQRT3)
            .add(&self.d_t().scale(2.0 / SQRT3))
    }

    pub fn laplacian(&self) -> Poly2 {
        self.d_x().d_x().add(&self.d_y().d_y())
    }

    pub fn eval_st(&self, s: f64, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, row| {
            acc * s + row.iter().rev().fold(0.0, |a, &c| a * t + c)
        })
    }

    pub fn eval(&self, x: Vec2) -> f64 {
        let (s, t) = rhombus_coords(x);
        self.eval_st(s, t)
    }

    /// Exact `∫_Ω p dx` over the unit rhombus.
    pub fn integrate(&self) -> f64 {
        let mut acc = 0.0;
        for (i, row) in self.coeffs.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                acc += c / ((i + 1) * (j + 1)) as f64;
            }
        }
        acc * RHOMBUS_AREA
    }

    /// Exact `‖p‖_{H²}` (all derivatives up to order two).
    pub fn h2_norm(&self) -> f64 {
        let dx = self.d_x();
        let dy = self.d_y();
        let terms = [
            self.clone(),
            dx.clone(),
            dy.clone(),
            dx.d_x(),
            dx.d_y(),
            dy.d_x(),
            dy.d_y(),
        ];
        terms
            .iter()
            .map(|p| p.mul(p).integrate())
            .sum::<f64>()
            .sqrt()
    }

    pub fn to_scalar(&self) -> AnalyticScalar {
        let p = self.clone();
        AnalyticScalar::new(Smoothness::Smooth, move |x, _| p.eval(x))
    }
}

/// `b(s, t) = s(1-s) t(1-t)`, vanishing on the rhombus boundary.
pub fn bubble() -> Poly2 {
    let s = Poly2::s();
    let t = Poly2::t();
    let one = Poly2::constant(1.0);
    s.mul(&one.sub(&s)).mul(&t).mul(&one.sub(&t))
}

/// Scalar test function together with its exact gradient.
#[derive(Clone)]
pub struct ScalarTest {
    pub name: &'static str,
    pub value: AnalyticScalar,
    pub gradient: AnalyticVector,
}

/// `bubble²`: vanishes with its gradient on the boundary.
pub fn bubble_squared_scalar() -> ScalarTest {
    let p = bubble().pow(2).scale(16.0 * 16.0);
    let (gx, gy) = (p.d_x(), p.d_y());
    ScalarTest {
        name: "bubble_squared",
        value: p.to_scalar(),
        gradient: AnalyticVector::new(Smoothness::Smooth, move |x, _| {
            Vec2::new(gx.eval(x), gy.eval(x))
        }),
    }
}

/// `sin²(πs) sin²(πt)`: vanishes with its gradient on the boundary.
pub fn sine_squared_scalar() -> ScalarTest {
    ScalarTest {
        name: "sine_squared",
        value: AnalyticScalar::new(Smoothness::Smooth, |x, _| {
            let (s, t) = rhombus_coords(x);
            (PI * s).sin().powi(2) * (PI * t).sin().powi(2)
        }),
        gradient: AnalyticVector::new(Smoothness::Smooth, |x, _| {
            let (s, t) = rhombus_coords(x);
            let ds = PI * (2.0 * PI * s).sin() * (PI * t).sin().powi(2);
            let dt = PI * (PI * s).sin().powi(2) * (2.0 * PI * t).sin();
            Vec2::new(ds, (-ds + 2.0 * dt) / SQRT3)
        }),
    }
}

/// Divergence-free velocity `curl ψ = (∂_y ψ, -∂_x ψ)` of a polynomial stream function.
#[derive(Debug, Clone)]
pub struct CurlField {
    pub stream: Poly2,
    pub ux: Poly2,
    pub uy: Poly2,
}

impl CurlField {
    pub fn new(stream: Poly2) -> Self {
        let ux = stream.d_y();
        let uy = stream.d_x().scale(-1.0);
        CurlField { stream, ux, uy }
    }

    /// `ψ = A b²`; velocity vanishes on the boundary.
    pub fn bubble(amplitude: f64) -> Self {
        Self::new(bubble().pow(2).scale(amplitude))
    }

    pub fn eval(&self, x: Vec2) -> Vec2 {
        let (s, t) = rhombus_coords(x);
        Vec2::new(self.ux.eval_st(s, t), self.uy.eval_st(s, t))
    }

    /// Steady analytic field carrying its stream function.
    pub fn to_vector(&self) -> AnalyticVector {
        self.scaled_in_time(|_| 1.0)
    }

    /// `g(t) curl ψ`.
    pub fn scaled_in_time(
        &self,
        g: impl Fn(f64) -> f64 + Send + Sync + Clone + 'static,
    ) -> AnalyticVector {
        let (a, b) = (self.clone(), self.clone());
        let g2 = g.clone();
        AnalyticVector::from_stream_function(
            Smoothness::Smooth,
            move |x, t| g(t) * a.stream.eval(x),
            move |x, t| b.eval(x) * g2(t),
        )
    }

    /// `(u·∇) v` for a polynomial vector field `v = (vx, vy)`; equals `(div(v_1 u), div(v_2 u))`
    /// because `div u = 0`.
    pub fn advect(&self, vx: &Poly2, vy: &Poly2) -> (Poly2, Poly2) {
        let adv = |v: &Poly2| self.ux.mul(&v.d_x()).add(&self.uy.mul(&v.d_y()));
        (adv(vx), adv(vy))
    }

    pub fn vector_laplacian(&self) -> (Poly2, Poly2) {
        (self.ux.laplacian(), self.uy.laplacian())
    }
}

/// Convection test case: divergence-free `u`, smooth `v`, and the exact `b̃(u, v)`.
pub struct ConvectionTest {
    pub u: AnalyticVector,
    pub v: AnalyticVector,
    pub exact: AnalyticVector,
}

pub fn convection_test() -> ConvectionTest {
    let u = CurlField::bubble(64.0);
    // v need not vanish on the boundary.
    let vx = Poly2::x().mul(&Poly2::y()).add(&Poly2::constant(0.5));
    let vy = Poly2::x().pow(2).sub(&Poly2::y().scale(0.3));
    let (bx, by) = u.advect(&vx, &vy);
    let exact = AnalyticVector::new(Smoothness::Smooth, move |x, _| {
        Vec2::new(bx.eval(x), by.eval(x))
    });
    let v = AnalyticVector::new(Smoothness::Smooth, move |x, _| {
        Vec2::new(vx.eval(x), vy.eval(x))
    });
    ConvectionTest {
        u: u.to_vector(),
        v,
        exact,
    }
}

/// Smooth vector field vanishing on the boundary, with its exact `H²` norm.
pub struct StabilityTest {
    pub v: AnalyticVector,
    pub h2_norm: f64,
}

pub fn lap_tilde_stability_test() -> StabilityTest {
    let b = bubble();
    let vx = b.scale(16.0);
    let vy = b.mul(&Poly2::x()).scale(-8.0);
    let h2 = (vx.h2_norm().powi(2) + vy.h2_norm().powi(2)).sqrt();
    StabilityTest {
        v: AnalyticVector::new(Smoothness::Smooth, move |x, _| {
            Vec2::new(vx.eval(x), vy.eval(x))
        }),
        h2_norm: h2,
    }
}

/// Navier-Stokes data with exact solution `u = g(t) curl ψ`, `p = g(t) π`, `g(t) = 1 + r t`.
pub struct ManufacturedFlow {
    pub reynolds: f64,
    pub velocity: AnalyticVector,
    pub pressure: AnalyticScalar,
    pub forcing: AnalyticVector,
}

impl ManufacturedFlow {
    /// Growing flow, `r = 1/2`.
    pub fn new(reynolds: f64) -> Self {
        Self::with_pressure(reynolds, Poly2::x().mul(&Poly2::y()), 0.5)
    }

    /// Stationary flow, `r = 0`.
    pub fn steady(reynolds: f64) -> Self {
        Self::with_pressure(reynolds, Poly2::x().mul(&Poly2::y()), 0.0)
    }

    /// Same velocity with the given pressure shape (mean removed here) and growth rate.
    pub fn with_pressure(reynolds: f64, raw: Poly2, rate: f64) -> Self {
        let curl = CurlField::bubble(32.0);
        let pressure = raw.sub(&Poly2::constant(raw.integrate() / RHOMBUS_AREA));
        let (lx, ly) = curl.vector_laplacian();
        let (ax, ay) = curl.advect(&curl.ux, &curl.uy);
        let (px, py) = (pressure.d_x(), pressure.d_y());
        let g = move |t: f64| 1.0 + rate * t;
        let dg = rate;
        let c = curl.clone();
        let forcing = AnalyticVector::new(Smoothness::Smooth, move |x, t| {
            let (s, tt) = rhombus_coords(x);
            let u = c.eval(x);
            let lap = Vec2::new(lx.eval_st(s, tt), ly.eval_st(s, tt));
            let adv = Vec2::new(ax.eval_st(s, tt), ay.eval_st(s, tt));
            let gp = Vec2::new(px.eval_st(s, tt), py.eval_st(s, tt));
            u * dg - lap * (g(t) / reynolds) + adv * (g(t) * g(t)) + gp * g(t)
        });
        let p = pressure.clone();
        ManufacturedFlow {
            reynolds,
            velocity: curl.scaled_in_time(g),
            pressure: AnalyticScalar::new(Smoothness::Smooth, move |x, t| g(t) * p.eval(x)),
            forcing,
        }
    }
}

/// Smooth forcing and divergence-free initial velocity used by the stability sweeps.
pub fn vortex_data() -> (AnalyticVector, AnalyticVector) {
    let u0 = CurlField::bubble(16.0).to_vector();
    let shape = CurlField::new(bubble().mul(&Poly2::x()).scale(8.0));
    let f = shape.scaled_in_time(|t| (2.0 * PI * t).cos());
    let forcing = AnalyticVector::new(Smoothness::Smooth, move |x, t| f.eval(x, t));
    (u0, forcing)
}

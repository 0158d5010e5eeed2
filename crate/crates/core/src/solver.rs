//! Krylov solvers for the assembled systems of the scheme.
//!
//! [`solve_spd`] is preconditioned conjugate gradients, used for the pressure Poisson problem;
//! [`solve_krylov`] is BiCGStab, used for the nonsymmetric momentum system. Both recompute the
//! final residual from scratch and never trust the recurrence.

use thiserror::Error;

use crate::sparse::SparseOperator;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preconditioner {
    None,
    Diagonal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Defaults to ten times the number of unknowns.
    pub max_iters: Option<usize>,
    pub preconditioner: Preconditioner,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_iters: None,
            preconditioner: Preconditioner::None,
        }
    }
}

impl SolverConfig {
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_preconditioner(mut self, p: Preconditioner) -> Self {
        self.preconditioner = p;
        self
    }

    pub fn with_max_iters(mut self, n: usize) -> Self {
        self.max_iters = Some(n);
        self
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if self.rel_tol.is_nan()
            || self.abs_tol.is_nan()
            || self.rel_tol <= 0.0
            || self.abs_tol <= 0.0
        {
            return Err(SolverError::InvalidConfig(
                "tolerances must be positive".into(),
            ));
        }
        if self.max_iters == Some(0) {
            return Err(SolverError::InvalidConfig(
                "max_iters must be at least 1".into(),
            ));
        }
        Ok(())
    }

    fn iteration_limit(&self, n: usize) -> usize {
        self.max_iters.unwrap_or(10 * n.max(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolveReport {
    pub iterations: usize,
    /// `‖b - A x‖ / ‖b‖`, recomputed after the iteration.
    pub final_residual: f64,
    pub converged: bool,
    /// Set when the iteration stopped on a zero denominator.
    pub breakdown: bool,
    /// `|Σ b| / (√n ‖b‖)` of the right-hand side before projection (singular solves only).
    pub nullspace_component: f64,
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("dimension mismatch: matrix is {rows}x{cols}, right-hand side has {rhs}")]
    Dimension {
        rows: usize,
        cols: usize,
        rhs: usize,
    },
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn residual(a: &SparseOperator, x: &[f64], b: &[f64]) -> Vec<f64> {
    let ax = a.apply(x);
    b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect()
}

fn check_square(a: &SparseOperator, b: &[f64]) -> Result<(), SolverError> {
    let (rows, cols) = a.shape();
    if rows != cols || b.len() != rows {
        return Err(SolverError::Dimension {
            rows,
            cols,
            rhs: b.len(),
        });
    }
    Ok(())
}

fn inverse_diagonal(a: &SparseOperator, p: Preconditioner) -> Option<Vec<f64>> {
    match p {
        Preconditioner::None => None,
        Preconditioner::Diagonal => Some(
            a.diagonal()
                .into_iter()
                .map(|d| if d != 0.0 { 1.0 / d } else { 1.0 })
                .collect(),
        ),
    }
}

fn precondition(inv: &Option<Vec<f64>>, r: &[f64], z: &mut [f64]) {
    match inv {
        Some(d) => z
            .iter_mut()
            .zip(r.iter().zip(d))
            .for_each(|(z, (r, d))| *z = r * d),
        None => z.copy_from_slice(r),
    }
}

/// Conjugate gradients for symmetric positive (semi-)definite `a`.
pub fn solve_spd(
    a: &SparseOperator,
    b: &[f64],
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, SolveReport), SolverError> {
    solve_spd_from(a, b, None, cfg)
}

/// Conjugate gradients starting from `x0` (zero when `None`).
pub fn solve_spd_from(
    a: &SparseOperator,
    b: &[f64],
    x0: Option<&[f64]>,
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, SolveReport), SolverError> {
    check_square(a, b)?;
    cfg.validate()?;
    let n = b.len();
    let bnorm = norm(b);
    let mut x = x0.map(<[f64]>::to_vec).unwrap_or_else(|| vec![0.0; n]);
    if bnorm <= cfg.abs_tol {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok((
            x,
            SolveReport {
                converged: true,
                ..Default::default()
            },
        ));
    }
    let target = cfg.rel_tol * bnorm;
    let limit = cfg.iteration_limit(n);
    let inv = inverse_diagonal(a, cfg.preconditioner);
    let mut iterations = 0;
    let mut breakdown = false;
    let mut ap = vec![0.0; n];
    let mut z = vec![0.0; n];

    // Outer loop restarts from the true residual when the recurrence drifted.
    'outer: while iterations < limit {
        let mut r = residual(a, &x, b);
        if norm(&r) <= target {
            break;
        }
        precondition(&inv, &r, &mut z);
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        while iterations < limit {
            a.apply_into(&p, &mut ap);
            let pap = dot(&p, &ap);
            if pap <= 0.0 || !pap.is_finite() {
                breakdown = true;
                break 'outer;
            }
            let alpha = rz / pap;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            iterations += 1;
            if norm(&r) <= 0.5 * target {
                continue 'outer;
            }
            precondition(&inv, &r, &mut z);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
    }
    let final_residual = norm(&residual(a, &x, b)) / bnorm;
    Ok((
        x,
        SolveReport {
            iterations,
            final_residual,
            converged: final_residual <= cfg.rel_tol,
            breakdown,
            nullspace_component: 0.0,
        },
    ))
}

/// Conjugate gradients for a symmetric positive semi-definite `a` whose kernel is the constants.
///
/// The right-hand side is projected onto the range (its Euclidean mean removed) and the
/// solution is returned with zero `weights`-weighted mean. The size of the removed component is
/// reported in [`SolveReport::nullspace_component`] so callers can flag incompatible data.
pub fn solve_spd_constant_nullspace(
    a: &SparseOperator,
    b: &[f64],
    weights: &[f64],
    x0: Option<&[f64]>,
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, SolveReport), SolverError> {
    check_square(a, b)?;
    if weights.len() != b.len() {
        return Err(SolverError::Dimension {
            rows: weights.len(),
            cols: weights.len(),
            rhs: b.len(),
        });
    }
    let n = b.len() as f64;
    let sum: f64 = b.iter().sum();
    let bnorm = norm(b);
    let mean = sum / n;
    let projected: Vec<f64> = b.iter().map(|v| v - mean).collect();
    let (mut x, mut report) = solve_spd_from(a, &projected, x0, cfg)?;
    remove_weighted_mean(&mut x, weights);
    report.nullspace_component = if bnorm > 0.0 {
        sum.abs() / (n.sqrt() * bnorm)
    } else {
        0.0
    };
    Ok((x, report))
}

pub(crate) fn remove_weighted_mean(x: &mut [f64], weights: &[f64]) {
    let total: f64 = weights.iter().sum();
    let mean = dot(x, weights) / total;
    x.iter_mut().for_each(|v| *v -= mean);
}

/// BiCGStab with optional diagonal preconditioning for general nonsingular `a`.
pub fn solve_krylov(
    a: &SparseOperator,
    b: &[f64],
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, SolveReport), SolverError> {
    solve_krylov_from(a, b, None, cfg)
}

pub fn solve_krylov_from(
    a: &SparseOperator,
    b: &[f64],
    x0: Option<&[f64]>,
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, SolveReport), SolverError> {
    check_square(a, b)?;
    cfg.validate()?;
    let n = b.len();
    let bnorm = norm(b);
    let mut x = x0.map(<[f64]>::to_vec).unwrap_or_else(|| vec![0.0; n]);
    if bnorm <= cfg.abs_tol {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok((
            x,
            SolveReport {
                converged: true,
                ..Default::default()
            },
        ));
    }
    let target = cfg.rel_tol * bnorm;
    let limit = cfg.iteration_limit(n);
    let inv = inverse_diagonal(a, cfg.preconditioner);
    let mut iterations = 0;
    let mut breakdown = false;
    let mut phat = vec![0.0; n];
    let mut shat = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut t = vec![0.0; n];

    'outer: while iterations < limit {
        let mut r = residual(a, &x, b);
        if norm(&r) <= target {
            break;
        }
        let r0 = r.clone();
        let mut p = vec![0.0; n];
        v.iter_mut().for_each(|x| *x = 0.0);
        let (mut rho, mut alpha, mut omega) = (1.0f64, 1.0f64, 1.0f64);
        while iterations < limit {
            let rho_new = dot(&r0, &r);
            if rho_new == 0.0 || omega == 0.0 || !rho_new.is_finite() {
                breakdown = true;
                break 'outer;
            }
            let beta = (rho_new / rho) * (alpha / omega);
            rho = rho_new;
            for i in 0..n {
                p[i] = r[i] + beta * (p[i] - omega * v[i]);
            }
            precondition(&inv, &p, &mut phat);
            a.apply_into(&phat, &mut v);
            let r0v = dot(&r0, &v);
            if r0v == 0.0 || !r0v.is_finite() {
                breakdown = true;
                break 'outer;
            }
            alpha = rho / r0v;
            // r becomes s in place.
            for i in 0..n {
                r[i] -= alpha * v[i];
            }
            iterations += 1;
            if norm(&r) <= 0.5 * target {
                for i in 0..n {
                    x[i] += alpha * phat[i];
                }
                continue 'outer;
            }
            precondition(&inv, &r, &mut shat);
            a.apply_into(&shat, &mut t);
            let tt = dot(&t, &t);
            if tt == 0.0 {
                breakdown = true;
                for i in 0..n {
                    x[i] += alpha * phat[i];
                }
                break 'outer;
            }
            omega = dot(&t, &r) / tt;
            for i in 0..n {
                x[i] += alpha * phat[i] + omega * shat[i];
                r[i] -= omega * t[i];
            }
            if norm(&r) <= 0.5 * target {
                continue 'outer;
            }
        }
    }
    let final_residual = norm(&residual(a, &x, b)) / bnorm;
    Ok((
        x,
        SolveReport {
            iterations,
            final_residual,
            converged: final_residual <= cfg.rel_tol,
            breakdown,
            nullspace_component: 0.0,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::Symmetry;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn laplacian_1d(n: usize) -> SparseOperator {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i > 0 {
                t.push((i, i - 1, -1.0));
            }
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
            }
        }
        SparseOperator::from_triplets(n, n, t, Symmetry::Symmetric)
    }

    #[test]
    fn diagonal_system_is_solved_elementwise() {
        let d = vec![1.0, 2.0, 4.0, 8.0];
        let a = SparseOperator::diagonal_matrix(&d);
        let b = vec![1.0, 1.0, 1.0, 1.0];
        let cfg = SolverConfig::default().with_preconditioner(Preconditioner::Diagonal);
        let (x, rep) = solve_spd(&a, &b, &cfg).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.iterations, 1);
        for (xi, di) in x.iter().zip(&d) {
            assert!((xi - 1.0 / di).abs() < 1e-15);
        }
    }

    #[test]
    fn cg_recovers_manufactured_solution() {
        let a = laplacian_1d(50);
        let xs: Vec<f64> = (0..50).map(|i| (i as f64 * 0.3).sin()).collect();
        let b = a.apply(&xs);
        let (x, rep) = solve_spd(&a, &b, &SolverConfig::default()).unwrap();
        assert!(rep.converged, "{rep:?}");
        let err: f64 = x
            .iter()
            .zip(&xs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-7, "{err}");
    }

    #[test]
    fn bicgstab_agrees_with_cg_on_symmetric_system() {
        let a = laplacian_1d(40);
        let b: Vec<f64> = (0..40).map(|i| 1.0 + i as f64 * 0.01).collect();
        let cfg = SolverConfig::default().with_rel_tol(1e-13);
        let (x1, r1) = solve_spd(&a, &b, &cfg).unwrap();
        let (x2, r2) = solve_krylov(&a, &b, &cfg).unwrap();
        assert!(r1.converged && r2.converged);
        let scale = x1.iter().map(|v| v.abs()).fold(0.0, f64::max);
        for (p, q) in x1.iter().zip(&x2) {
            assert!((p - q).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn bicgstab_on_random_diagonally_dominant_system() {
        let n = 60;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut t = Vec::new();
        for i in 0..n {
            let mut off = 0.0;
            for _ in 0..4 {
                let j = rng.gen_range(0..n);
                if j != i {
                    let v: f64 = rng.gen_range(-1.0..1.0);
                    off += v.abs();
                    t.push((i, j, v));
                }
            }
            t.push((i, i, off + 1.0));
        }
        let a = SparseOperator::from_triplets(n, n, t, Symmetry::General);
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let cfg = SolverConfig::default().with_preconditioner(Preconditioner::Diagonal);
        let (x, rep) = solve_krylov(&a, &b, &cfg).unwrap();
        assert!(rep.converged, "{rep:?}");
        let r = residual(&a, &x, &b);
        assert!(norm(&r) / norm(&b) <= cfg.rel_tol);
    }

    #[test]
    fn iteration_cap_reports_failure_without_panicking() {
        let a = laplacian_1d(100);
        let b = vec![1.0; 100];
        let cfg = SolverConfig::default().with_max_iters(1);
        let (_, rep) = solve_krylov(&a, &b, &cfg).unwrap();
        assert!(!rep.converged);
        assert_eq!(rep.iterations, 1);
        let (_, rep) = solve_spd(&a, &b, &cfg).unwrap();
        assert!(!rep.converged);
    }

    #[test]
    fn singular_solve_reports_incompatible_rhs() {
        // Periodic 1D Laplacian: kernel is the constants.
        let n = 20;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            t.push((i, (i + 1) % n, -1.0));
            t.push((i, (i + n - 1) % n, -1.0));
        }
        let a = SparseOperator::from_triplets(n, n, t, Symmetry::Symmetric);
        let w = vec![1.0; n];
        let b = vec![1.0; n];
        let (x, rep) =
            solve_spd_constant_nullspace(&a, &b, &w, None, &SolverConfig::default()).unwrap();
        assert!((rep.nullspace_component - 1.0).abs() < 1e-12);
        assert!(x.iter().all(|v| v.abs() < 1e-12));

        let b: Vec<f64> = (0..n)
            .map(|i| (i as f64 * std::f64::consts::TAU / n as f64).cos())
            .collect();
        let (x, rep) =
            solve_spd_constant_nullspace(&a, &b, &w, None, &SolverConfig::default()).unwrap();
        assert!(rep.converged && rep.nullspace_component < 1e-14);
        assert!(x.iter().sum::<f64>().abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let a = laplacian_1d(3);
        assert!(solve_spd(&a, &[1.0, 2.0], &SolverConfig::default()).is_err());
    }
}

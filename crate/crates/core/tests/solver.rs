use colocated_fv::operators::assemble_lap_tilde;
use colocated_fv::solver::{
    solve_krylov, solve_spd, solve_spd_constant_nullspace, Preconditioner, SolverConfig,
};
use colocated_fv::sparse::{SparseOperator, Symmetry};
use colocated_fv::verify::{seeded_rng, unit_rhombus};
use rand::Rng;

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let d: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt();
    d / b.iter().map(|y| y * y).sum::<f64>().sqrt()
}

#[test]
fn cg_recovers_solution_of_assembled_stiffness_system() {
    let m = unit_rhombus(12).unwrap();
    let a = assemble_lap_tilde(&m).linear_combination(
        -1.0,
        &SparseOperator::identity(m.n_triangles()),
        0.0,
    );
    let mut rng = seeded_rng(5, 0);
    let x_star: Vec<f64> = (0..m.n_triangles())
        .map(|_| rng.gen_range(-1.0..=1.0))
        .collect();
    let b = a.apply(&x_star);
    let cfg = SolverConfig::default().with_rel_tol(1e-13);
    let (x, report) = solve_spd(&a, &b, &cfg).unwrap();
    assert!(
        report.converged && report.final_residual <= 1e-13,
        "{report:?}"
    );
    assert!(rel_err(&x, &x_star) < 1e-9);
}

#[test]
fn preconditioned_bicgstab_on_nonsymmetric_system() {
    let n: usize = 200;
    let mut rng = seeded_rng(9, 1);
    let mut triplets = Vec::new();
    for i in 0..n {
        let mut off = 0.0;
        for j in [i.wrapping_sub(1), i + 1, (i * 7 + 3) % n] {
            if j < n && j != i {
                let v: f64 = rng.gen_range(-1.0..=1.0);
                off += v.abs();
                triplets.push((i, j, v));
            }
        }
        triplets.push((i, i, off + rng.gen_range(0.5..=2.0) * (1.0 + i as f64)));
    }
    let a = SparseOperator::from_triplets(n, n, triplets, Symmetry::General);
    let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let cfg = SolverConfig::default()
        .with_rel_tol(1e-12)
        .with_preconditioner(Preconditioner::Diagonal);
    let (x, report) = solve_krylov(&a, &b, &cfg).unwrap();
    assert!(report.converged, "{report:?}");
    assert!(rel_err(&a.apply(&x), &b) <= 1e-12);
}

#[test]
fn singular_solve_returns_mean_free_solution() {
    let m = unit_rhombus(6).unwrap();
    let areas = m.areas();
    let a = assemble_lap_tilde(&m).linear_combination(
        -1.0,
        &SparseOperator::identity(m.n_triangles()),
        0.0,
    );
    // Neumann-type operator: the two-point flux part without boundary contributions.
    let mut trip = Vec::new();
    for e in m.edges() {
        if let Some(l) = e.l_triangle {
            let k = e.k_triangle;
            let w = -a.get(k, l);
            trip.extend([(k, k, w), (l, l, w), (k, l, -w), (l, k, -w)]);
        }
    }
    let neumann =
        SparseOperator::from_triplets(m.n_triangles(), m.n_triangles(), trip, Symmetry::Symmetric);
    let mut rng = seeded_rng(2, 0);
    let mut b: Vec<f64> = (0..m.n_triangles())
        .map(|_| rng.gen_range(-1.0..=1.0))
        .collect();
    let mean = b.iter().sum::<f64>() / b.len() as f64;
    b.iter_mut().for_each(|v| *v -= mean);
    let cfg = SolverConfig::default().with_rel_tol(1e-12);
    let (x, report) = solve_spd_constant_nullspace(&neumann, &b, &areas, None, &cfg).unwrap();
    assert!(
        report.converged && report.nullspace_component < 1e-14,
        "{report:?}"
    );
    let weighted: f64 = x.iter().zip(&areas).map(|(x, a)| x * a).sum();
    assert!(weighted.abs() < 1e-12);
    assert!(rel_err(&neumann.apply(&x), &b) <= 1e-12);
}

//! Refinement tables for the named problems.

use std::fmt::Write;

use anyhow::{bail, Result};
use colocated_fv::analytic::{bubble_squared_scalar, sine_squared_scalar, ManufacturedFlow};
use colocated_fv::fields::{interpolate_p0, norm_l2};
use colocated_fv::scheme::{run, velocity_error, SchemeConfig};
use colocated_fv::verify::{convection_sweep, gradient_sweep, unit_rhombus};

use crate::problems::Problem;

pub const COARSEST: usize = 4;
pub const MANUFACTURED_REYNOLDS: f64 = 100.0;
pub const MANUFACTURED_DT: f64 = 0.04;
pub const MANUFACTURED_T_END: f64 = 0.2;

pub struct Table {
    pub h: Vec<f64>,
    pub k: Vec<f64>,
    pub rows: Vec<usize>,
    pub columns: Vec<(String, Vec<f64>)>,
}

fn observed_order(e: &[f64], h: &[f64], i: usize) -> Option<f64> {
    (i > 0).then(|| (e[i - 1] / e[i]).ln() / (h[i - 1] / h[i]).ln())
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("level,n,h,k");
        for (name, _) in &self.columns {
            let _ = write!(s, ",{name},{name}_order");
        }
        s.push('\n');
        for i in 0..self.h.len() {
            let _ = write!(
                s,
                "{i},{},{:.6e},{:.6e}",
                self.rows[i], self.h[i], self.k[i]
            );
            for (_, e) in &self.columns {
                let _ = write!(s, ",{:.6e},", e[i]);
                if let Some(o) = observed_order(e, &self.h, i) {
                    let _ = write!(s, "{o:.4}");
                }
            }
            s.push('\n');
        }
        s
    }
}

pub fn table(problem: Problem, levels: usize) -> Result<Table> {
    if levels < 3 {
        bail!("an observed order needs at least 3 levels, got {levels}");
    }
    let rows: Vec<usize> = (0..levels).map(|i| COARSEST << i).collect();
    let h: Vec<f64> = rows
        .iter()
        .map(|&n| unit_rhombus(n).map(|m| m.h()))
        .collect::<Result<_, _>>()?;
    let mut k = vec![0.0; levels];
    let columns = match problem {
        Problem::Gradient => {
            let mut cols = Vec::new();
            for test in [bubble_squared_scalar(), sine_squared_scalar()] {
                cols.push((
                    format!("grad_error_{}", test.name),
                    gradient_sweep(&test, &rows)?.values,
                ));
            }
            cols
        }
        Problem::Convection => vec![(
            "conv_dual_error".to_string(),
            convection_sweep(&rows)?.values,
        )],
        Problem::Manufactured => {
            let mut vel = Vec::new();
            let mut energy = Vec::new();
            for (i, &n) in rows.iter().enumerate() {
                let m = unit_rhombus(n)?;
                let flow = ManufacturedFlow::new(MANUFACTURED_REYNOLDS);
                k[i] = MANUFACTURED_DT / (1u64 << i) as f64;
                let cfg = SchemeConfig::new(
                    MANUFACTURED_REYNOLDS,
                    k[i],
                    MANUFACTURED_T_END,
                    flow.forcing.clone(),
                    flow.velocity.clone(),
                );
                let out = run(cfg, &m).map_err(|f| f.error)?;
                let t = out.state.time;
                vel.push(velocity_error(&out.state.u_curr, &flow.velocity, &m, t));
                let exact = norm_l2(&interpolate_p0(&flow.velocity, &m, t), &m).powi(2);
                energy.push((norm_l2(&out.state.u_curr, &m).powi(2) - exact).abs() / exact);
            }
            vec![
                ("velocity_error".to_string(), vel),
                ("energy_rel_error".to_string(), energy),
            ]
        }
        Problem::Zero | Problem::Vortex => {
            bail!("problem '{problem}' has no exact solution to converge to")
        }
    };
    Ok(Table {
        h,
        k,
        rows,
        columns,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradient_table_has_unit_orders() {
        let t = table(Problem::Gradient, 3).unwrap();
        for (_, e) in &t.columns {
            let o = observed_order(e, &t.h, 2).unwrap();
            assert!((0.8..1.3).contains(&o), "{o}");
        }
        let csv = t.to_csv();
        assert!(csv.starts_with("level,n,h,k,grad_error_"));
        assert_eq!(csv.lines().count(), 4);
    }

    #[test]
    fn two_levels_are_rejected() {
        assert!(table(Problem::Gradient, 2).is_err());
    }
}

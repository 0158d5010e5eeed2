//! Acceptance criteria 1-11. Prints one PASS/FAIL line per criterion and exits non-zero if any
//! criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use colocated_fv::analytic::{self, bubble_squared_scalar, sine_squared_scalar};
use colocated_fv::mesh::Mesh;
use colocated_fv::scheme::{Scheme, SchemeConfig};
use colocated_fv::verify::{
    self, check_identities, check_oracles, convection_sweep, gradient_sweep, measure_infsup,
    perturbed_equilateral, render_report, run_suite, stability_sweep, unit_rhombus, CheckResult,
    StabilitySweepSpec, Suite, SuiteParams,
};

const SEED: u64 = 7;

struct Outcome {
    pass: bool,
    detail: String,
}

type Criterion = fn() -> Result<Outcome, String>;

fn meshes() -> Result<Vec<(String, Mesh)>, String> {
    let e = |r: Result<Mesh, _>| r.map_err(|err: colocated_fv::mesh::MeshError| err.to_string());
    Ok(vec![
        ("equilateral 4x4".into(), e(Mesh::equilateral(4, 4, 0.25))?),
        (
            "perturbed 6x6".into(),
            e(perturbed_equilateral(6, 6, 1.0 / 6.0, 0.05, SEED))?,
        ),
        ("unit rhombus 16".into(), e(unit_rhombus(16))?),
    ])
}

/// Runs `check_identities` on every mesh and keeps the named result.
fn identity_on_meshes(name: &str) -> Result<Outcome, String> {
    let mut worst = 0.0f64;
    let mut pass = true;
    let mut tol = 0.0;
    for (label, m) in meshes()? {
        let results = check_identities(&m, SEED, &label).map_err(|e| e.to_string())?;
        let r = find(&results, name)?;
        worst = worst.max(r.headline());
        pass &= r.pass;
        tol = r.threshold;
    }
    Ok(Outcome {
        pass,
        detail: format!("worst {worst:.3e} <= {tol:.0e} on 3 meshes"),
    })
}

fn find<'a>(results: &'a [CheckResult], name: &str) -> Result<&'a CheckResult, String> {
    results
        .iter()
        .find(|r| r.name == name)
        .ok_or_else(|| format!("missing check {name}"))
}

fn c1_adjointness() -> Result<Outcome, String> {
    identity_on_meshes("adjointness")
}

fn c2_incompressibility() -> Result<Outcome, String> {
    let m = perturbed_equilateral(8, 8, 0.125, 0.05, SEED).map_err(|e| e.to_string())?;
    let (u0, f) = analytic::vortex_data();
    let cfg = SchemeConfig::new(100.0, 0.002, 1.0, f, u0);
    let mut scheme = Scheme::new(cfg, &m).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    let out = scheme
        .run(|state, d| worst = worst.max(d.div_inf / state.u_curr.max_abs()))
        .map_err(|e| e.error.to_string())?;
    let steps = out.series.len();
    Ok(Outcome {
        pass: steps == 500 && worst <= 1e-8,
        detail: format!("{steps} steps, max |div_h u|/max|u| = {worst:.3e} <= 1e-8"),
    })
}

fn c3_coercivity() -> Result<Outcome, String> {
    identity_on_meshes("coercivity")
}

fn c4_upwind_positivity() -> Result<Outcome, String> {
    identity_on_meshes("upwind_positivity")
}

fn c5_gradient_order() -> Result<Outcome, String> {
    let levels = [4, 8, 16, 32, 64];
    let mut slopes = Vec::new();
    for test in [bubble_squared_scalar(), sine_squared_scalar()] {
        slopes.push(
            gradient_sweep(&test, &levels)
                .map_err(|e| e.to_string())?
                .slope(),
        );
    }
    Ok(Outcome {
        pass: slopes.iter().all(|s| *s >= verify::GRADIENT_ORDER),
        detail: format!(
            "slopes {:.3} and {:.3} >= 0.9 over n={levels:?}",
            slopes[0], slopes[1]
        ),
    })
}

fn c6_convection_order() -> Result<Outcome, String> {
    let levels = [8, 16, 32, 64];
    let slope = convection_sweep(&levels)
        .map_err(|e| e.to_string())?
        .slope();
    Ok(Outcome {
        pass: slope >= verify::CONVECTION_ORDER,
        detail: format!("dual-norm slope {slope:.3} >= 0.8 over n={levels:?}"),
    })
}

fn c7_infsup() -> Result<Outcome, String> {
    let base = Mesh::equilateral(2, 2, 0.5).map_err(|e| e.to_string())?;
    let results = measure_infsup(&base, SEED).map_err(|e| e.to_string())?;
    let beta = find(&results, "infsup_constant")?;
    let p1nc_defect = find(&results, "grad_equals_p1nc_gradient")?;
    let betas: Vec<String> = beta.measured.iter().map(|b| format!("{b:.4}")).collect();
    Ok(Outcome {
        pass: beta.pass && p1nc_defect.pass && beta.measured.len() >= 4,
        detail: format!(
            "beta [{}] >= 0.5 x first ({}); P1nc gradient defect {:.3e} <= 1e-12",
            betas.join(", "),
            beta.context,
            p1nc_defect.headline()
        ),
    })
}

fn stability() -> Vec<CheckResult> {
    stability_sweep(&StabilitySweepSpec::default())
}

fn c8_energy() -> Result<Outcome, String> {
    let results = stability();
    let energy = find(&results, "energy_monitor")?;
    let pyth = find(&results, "pythagoras")?;
    let done = find(&results, "sweep_cells_completed")?;
    let max = energy
        .measured
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(Outcome {
        pass: energy.pass && pyth.pass && done.pass,
        detail: format!(
            "energy max {max:.4} vs first {:.4} (factor 3); pythagoras {:.3e} <= 1e-12",
            energy.measured[0],
            pyth.headline()
        ),
    })
}

fn c9_monitors() -> Result<Outcome, String> {
    let results = stability();
    let inc = find(&results, "increment_monitor")?;
    let pres = find(&results, "pressure_monitor")?;
    let done = find(&results, "sweep_cells_completed")?;
    let max = |r: &CheckResult| r.measured.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(Outcome {
        pass: inc.pass && pres.pass && done.pass,
        detail: format!(
            "increment max {:.4e} vs first {:.4e}; pressure max {:.4e} vs first {:.4e} (factor 3)",
            max(inc),
            inc.measured[0],
            max(pres),
            pres.measured[0]
        ),
    })
}

fn c10_oracles() -> Result<Outcome, String> {
    let mut pass = true;
    let mut assembly = 0.0f64;
    let mut norms = 0.0f64;
    for (label, m) in meshes()? {
        let results = check_oracles(&m, SEED, &label).map_err(|e| e.to_string())?;
        pass &= results.iter().all(|r| r.pass);
        assembly = assembly.max(find(&results, "assembly_vs_matrix_free")?.headline());
        norms = norms.max(find(&results, "norms_vs_naive")?.headline());
    }
    Ok(Outcome {
        pass,
        detail: format!("assembly {assembly:.3e}, norms {norms:.3e} <= 1e-14 on 3 meshes"),
    })
}

fn c11_determinism() -> Result<Outcome, String> {
    let render = || -> Result<String, String> {
        let params = SuiteParams::equilateral(4, 4, 0.25, SEED).map_err(|e| e.to_string())?;
        Ok(render_report(
            &run_suite(Suite::All, &params).map_err(|e| e.to_string())?,
        ))
    };
    let (a, b) = (render()?, render()?);
    Ok(Outcome {
        pass: a == b,
        detail: format!(
            "two 'all' reports with seed 7, {} bytes, identical: {}",
            a.len(),
            a == b
        ),
    })
}

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 11] = [
        ("adjointness", c1_adjointness),
        ("discrete incompressibility", c2_incompressibility),
        ("coercivity identity", c3_coercivity),
        ("upwind positivity", c4_upwind_positivity),
        ("gradient consistency order", c5_gradient_order),
        ("convection consistency order", c6_convection_order),
        ("inf-sup robustness", c7_infsup),
        ("energy stability", c8_energy),
        ("increment and pressure monitors", c9_monitors),
        ("oracle equivalence", c10_oracles),
        ("determinism", c11_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = match check() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "{} {:>2} {name}: {detail} [{:.1}s]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            start.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

use colocated_fv::analytic::ManufacturedFlow;
use colocated_fv::fields::{interpolate_p0, norm_l2, AnalyticVector};
use colocated_fv::scheme::{run, velocity_error, Scheme, SchemeConfig, SchemeError};
use colocated_fv::verify::unit_rhombus;

// (n, dt) with dt proportional to h.
const COUPLED: [(usize, f64); 3] = [(8, 0.02), (16, 0.01), (32, 0.005)];

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

#[test]
fn forced_kinetic_energy_approaches_exact_energy() {
    let re = 100.0;
    let mut errs = Vec::new();
    for (n, dt) in COUPLED {
        let m = unit_rhombus(n).unwrap();
        let flow = ManufacturedFlow::new(re);
        let cfg = SchemeConfig::new(re, dt, 0.2, flow.forcing.clone(), flow.velocity.clone());
        let out = run(cfg, &m).unwrap();
        let last = out.series.last().unwrap();
        let exact = norm_l2(&interpolate_p0(&flow.velocity, &m, last.time), &m).powi(2);
        errs.push((last.kinetic_energy - exact).abs() / exact);
    }
    assert!(strictly_decreasing(&errs), "{errs:?}");
    assert!(errs[2] < 0.1, "{errs:?}");
}

#[test]
fn steady_increment_decreases_under_refinement() {
    let re = 100.0;
    let mut incs = Vec::new();
    for (n, dt) in COUPLED {
        let m = unit_rhombus(n).unwrap();
        let flow = ManufacturedFlow::steady(re);
        let cfg = SchemeConfig::new(re, dt, 0.2, flow.forcing.clone(), flow.velocity.clone());
        let out = run(cfg, &m).unwrap();
        incs.push(out.series.last().unwrap().increment);
    }
    assert!(strictly_decreasing(&incs), "{incs:?}");
}

#[test]
fn convection_dominated_velocity_error_decreases() {
    let re = 1000.0;
    let mut errs = Vec::new();
    for (n, dt) in COUPLED {
        let m = unit_rhombus(n).unwrap();
        let flow = ManufacturedFlow::new(re);
        let cfg = SchemeConfig::new(re, dt, 0.2, flow.forcing.clone(), flow.velocity.clone());
        let out = run(cfg, &m).unwrap();
        errs.push(velocity_error(
            &out.state.u_curr,
            &flow.velocity,
            &m,
            out.state.time,
        ));
    }
    assert!(
        errs[1] < 0.7 * errs[0] && errs[2] < 0.7 * errs[1],
        "{errs:?}"
    );
}

#[test]
fn long_forced_run_stays_discretely_divergence_free() {
    let m = unit_rhombus(8).unwrap();
    let flow = ManufacturedFlow::new(100.0);
    let cfg = SchemeConfig::new(
        100.0,
        0.002,
        1.0,
        flow.forcing.clone(),
        flow.velocity.clone(),
    );
    let mut scheme = Scheme::new(cfg, &m).unwrap();
    let mut worst: f64 = 0.0;
    let out = scheme
        .run(|state, d| {
            worst = worst.max(d.div_inf / state.u_curr.max_abs());
            assert!(
                d.pythagoras_defect <= 1e-12,
                "step {}: {}",
                d.step,
                d.pythagoras_defect
            );
        })
        .unwrap();
    assert_eq!(out.series.len(), 500);
    assert!(worst <= 1e-8, "{worst:e}");
}

#[test]
fn run_into_a_viscous_steady_state_passes_the_compatibility_check() {
    // The pressure right-hand side shrinks to roundoff once the flow is steady.
    let m = unit_rhombus(8).unwrap();
    let flow = ManufacturedFlow::steady(1.0);
    let cfg = SchemeConfig::new(1.0, 0.002, 1.0, flow.forcing.clone(), flow.velocity.clone());
    let out = run(cfg, &m).unwrap();
    assert!(out.series.last().unwrap().increment < 1e-8);
}

#[test]
fn run_with_zero_data_stays_at_rest() {
    let m = unit_rhombus(4).unwrap();
    let cfg = SchemeConfig::new(
        10.0,
        0.05,
        0.5,
        AnalyticVector::zero(),
        AnalyticVector::zero(),
    );
    let out = run(cfg, &m).unwrap();
    assert_eq!(out.series.len(), 10);
    assert!(out.state.u_curr.max_abs() == 0.0 && out.state.p_curr.max_abs() == 0.0);
}

#[test]
fn invalid_config_names_the_field() {
    let m = unit_rhombus(4).unwrap();
    let cfg = SchemeConfig::new(
        10.0,
        -0.1,
        0.5,
        AnalyticVector::zero(),
        AnalyticVector::zero(),
    );
    match run(cfg, &m) {
        Err(f) => match f.error {
            SchemeError::InvalidConfig { field, .. } => assert_eq!(field, "dt"),
            e => panic!("unexpected {e:?}"),
        },
        Ok(_) => panic!("accepted a negative time step"),
    }
}

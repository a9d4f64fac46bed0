//! Each check must catch a deliberately corrupted input.

use znd_core::verification::{self as v, Thresholds};
use znd_core::{parse_scenario_str, run, Error, ScenarioConfig, TimeSeries};

const BACKGROUND: &str = r#"{"gamma":1.4,"nu0":2.0,"p0":1.0,"u_iota":2.0,"kappa":1.0,"hbar":0.0,
    "ignition_temperature":5.0,"epsilon":0.0,"piston":{"profile":"constant"},
    "n_cells":50,"cfl":0.8,"t_end":1.0}"#;

fn background() -> ScenarioConfig {
    parse_scenario_str(BACKGROUND).unwrap()
}

fn perturbed() -> ScenarioConfig {
    let mut cfg = background();
    cfg.epsilon = 1e-3;
    cfg.piston = znd_core::simulator::PistonProfile::Tanh;
    cfg
}

fn th() -> Thresholds {
    Thresholds::default()
}

#[test]
fn background_check_passes_then_catches_tampering() {
    let mut series = run(background()).unwrap();
    assert!(v::check_background_preservation(&series, &th()).unwrap().pass);
    series.snapshots[1].phi_hat[7][0] += 1e-6;
    let c = v::check_background_preservation(&series, &th()).unwrap();
    assert!(!c.pass && c.value >= 1e-6);
}

#[test]
fn background_check_refuses_a_perturbed_run() {
    let series = run(perturbed()).unwrap();
    match v::check_background_preservation(&series, &th()) {
        Err(Error::Config { field, .. }) => assert_eq!(field, "epsilon"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn background_check_refuses_an_active_reaction() {
    let mut cfg = background();
    cfg.hbar = 0.01;
    let series = run(cfg).unwrap();
    assert!(series.summary.ignited);
    assert!(matches!(v::check_background_preservation(&series, &th()), Err(Error::Config { .. })));
}

#[test]
fn shock_residual_catches_corrupted_speed() {
    let mut series: TimeSeries = run(perturbed()).unwrap();
    let clean = v::check_shock_residuals(&series, &th()).unwrap();
    assert!(clean.pass, "{clean:?}");
    let k = series.front.len() / 2;
    series.front[k].sigma += 1e-3;
    let bad = v::check_shock_residuals(&series, &th()).unwrap();
    assert!(!bad.pass && bad.value > 1e-4);
}

#[test]
fn z_check_catches_a_drifted_tracer() {
    let mut series = run(perturbed()).unwrap();
    let clean = v::check_z_consistency(&series, th().z).unwrap();
    assert!(clean.pass, "{clean:?}");
    let tr = series.tracers.iter_mut().find(|t| t.t_entry.is_some()).unwrap();
    tr.z *= 1.0 + 1e-4;
    assert!(!v::check_z_consistency(&series, th().z).unwrap().pass);
}

#[test]
fn linear_response_rejects_mismatched_runs() {
    let a = run(perturbed()).unwrap();
    let mut cfg = perturbed();
    cfg.epsilon = 5e-4;
    cfg.kappa = 2.0;
    let b = run(cfg).unwrap();
    assert!(matches!(v::check_linear_response(&a, &b, &th()), Err(Error::Config { .. })));
    let same = v::check_linear_response(&a, &a, &th()).unwrap();
    assert!(!same.pass);
}

#[test]
fn convergence_check_needs_doubled_resolution() {
    let a = run(perturbed()).unwrap();
    assert!(matches!(v::check_shock_residual_convergence(&a, &a, &th()), Err(Error::Config { .. })));
}

#[test]
fn conservation_residual_is_first_order() {
    let sup = |n: usize| {
        let mut cfg = perturbed();
        cfg.n_cells = n;
        v::conservation_residual(&cfg).unwrap().iter().fold(0.0f64, |m, r| m.max(r.abs()))
    };
    let (coarse, fine) = (sup(50), sup(100));
    assert!(fine < coarse);
    assert!(coarse / fine > 1.5, "{coarse:e} {fine:e}");
}

#[test]
fn determinism_counts_differing_bytes() {
    assert!(v::check_determinism(b"abc", b"abc").pass);
    let c = v::check_determinism(b"abc", b"abd");
    assert!(!c.pass && c.value == 1.0);
}

//! The full verification suite derived from one base scenario.
//!
//! Runs are independent, so they execute on scoped threads; the report is
//! assembled in a fixed order afterwards.

use std::collections::BTreeMap;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::output::{front_table, history_table, norms_table, snapshots_table, Layout};
use crate::simulator::{run, PistonProfile, ScenarioConfig, TimeSeries};
use crate::verification::{self as v, CheckResult, Thresholds, VerificationReport};

/// Acceptance criterion number for each check name produced by [`run_suite`].
pub const CRITERIA: &[(u8, &str)] = &[
    (1, "eos_branch_continuity"),
    (2, "thermodynamic_relation"),
    (3, "jump_solver_oracle"),
    (4, "background_shock_chain"),
    (5, "boundary_dissipation"),
    (6, "left_eigenvector_identity"),
    (7, "background_preservation_n100"),
    (7, "background_preservation_n400"),
    (8, "z_consistency_n800"),
    (8, "z_consistency_exact"),
    (9, "linear_response"),
    (9, "c_stability_spread"),
    (9, "c1_trace"),
    (10, "shock_residual_n400"),
    (10, "shock_residual_convergence"),
    (10, "conservation_convergence"),
    (11, "long_horizon_boundedness"),
    (12, "determinism"),
];

/// Knobs for the derived runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteOptions {
    pub horizon: f64,
    pub long_horizon: f64,
    pub epsilons: [f64; 3],
    pub background_cells: [usize; 2],
    pub residual_cells: usize,
    pub z_cells: usize,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            horizon: 10.0,
            long_horizon: 100.0,
            epsilons: [1e-3, 5e-4, 2.5e-4],
            background_cells: [100, 400],
            residual_cells: 400,
            z_cells: 800,
        }
    }
}

/// The scenarios the suite runs, keyed by role.
pub fn derived_scenarios(base: &ScenarioConfig, opts: &SuiteOptions) -> BTreeMap<String, ScenarioConfig> {
    let mut out = BTreeMap::new();
    let mut short = base.clone();
    short.t_end = opts.horizon;
    if short.epsilon == 0.0 {
        short.epsilon = opts.epsilons[0];
    }
    if short.piston == PistonProfile::Constant {
        short.piston = PistonProfile::Tanh;
    }

    for n in opts.background_cells {
        let mut c = short.clone();
        c.epsilon = 0.0;
        c.hbar = 0.0;
        c.n_cells = n;
        out.insert(format!("background_n{n}"), c);
    }
    // without heat release the response is linear in the piston amplitude
    for (k, eps) in opts.epsilons.iter().enumerate() {
        let mut c = short.clone();
        c.hbar = 0.0;
        c.epsilon = *eps;
        out.insert(format!("linear_{k}"), c);
    }
    for n in [opts.residual_cells, 2 * opts.residual_cells] {
        let mut c = short.clone();
        c.n_cells = n;
        out.insert(format!("residual_n{n}"), c);
    }
    let mut z = short.clone();
    z.n_cells = opts.z_cells;
    out.insert("z_perturbed".into(), z);
    let mut z_exact = short.clone();
    z_exact.epsilon = 0.0;
    z_exact.hbar = 0.0;
    out.insert("z_exact".into(), z_exact);
    let mut long = short.clone();
    long.t_end = opts.long_horizon;
    out.insert("long".into(), long);
    out
}

fn render(series: &TimeSeries) -> Vec<u8> {
    let mut bytes = Vec::new();
    for table in [
        snapshots_table(series, Layout::Csv, &[]),
        history_table(series, Layout::Csv, &[]),
        norms_table(series, Layout::Csv, &[]),
        front_table(series, Layout::Csv, &[]),
    ] {
        bytes.extend_from_slice(table.as_bytes());
    }
    bytes
}

/// A finished run with its wall time in seconds.
pub type TimedRun = (Result<TimeSeries>, f64);

/// Runs every scenario concurrently, keeping the map order in the result.
pub fn run_all(scenarios: &BTreeMap<String, ScenarioConfig>) -> BTreeMap<String, TimedRun> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = scenarios
            .iter()
            .map(|(name, cfg)| {
                let h = scope.spawn(move || {
                    let start = Instant::now();
                    let res = run(cfg.clone());
                    (res, start.elapsed().as_secs_f64())
                });
                (name.clone(), h)
            })
            .collect();
        handles
            .into_iter()
            .map(|(name, h)| {
                let res = h.join().unwrap_or_else(|_| (Err(Error::Domain(format!("run `{name}` panicked"))), 0.0));
                (name, res)
            })
            .collect()
    })
}

fn failed(name: &str, err: &Error) -> CheckResult {
    CheckResult {
        name: name.to_string(),
        value: f64::NAN,
        threshold: f64::NAN,
        pass: false,
        runtime_s: 0.0,
        note: format!("error: {err}"),
        informational: false,
    }
}

/// Full suite: structural checks, then checks over the derived runs.
pub fn run_suite(base: &ScenarioConfig, th: &Thresholds, opts: &SuiteOptions) -> Result<VerificationReport> {
    base.validate()?;
    let mut report = VerificationReport::default();
    let structural: [(&str, fn(&Thresholds) -> Result<CheckResult>); 6] = [
        ("eos_branch_continuity", v::check_eos_continuity),
        ("thermodynamic_relation", v::check_thermo_relation),
        ("jump_solver_oracle", v::check_jump_oracle),
        ("background_shock_chain", v::check_background_chain),
        ("boundary_dissipation", v::check_boundary_dissipation),
        ("left_eigenvector_identity", v::check_eigen_identity),
    ];
    for (name, check) in structural {
        report.push(check(th).unwrap_or_else(|e| failed(name, &e)));
    }

    let scenarios = derived_scenarios(base, opts);
    let runs = run_all(&scenarios);
    let get = |key: &str| -> std::result::Result<&TimeSeries, Error> {
        match runs.get(key) {
            Some((Ok(s), _)) => Ok(s),
            Some((Err(e), _)) => Err(e.clone()),
            None => Err(Error::Domain(format!("missing run `{key}`"))),
        }
    };
    let wall = |keys: &[&str]| -> f64 { keys.iter().filter_map(|k| runs.get(*k)).map(|(_, t)| t).sum() };
    let mut push = |name: &str, res: Result<CheckResult>, run_time: f64| {
        let mut c = res.unwrap_or_else(|e| failed(name, &e));
        c.runtime_s += run_time;
        report.push(c);
    };

    for n in opts.background_cells {
        let name = format!("background_preservation_n{n}");
        let key = format!("background_n{n}");
        push(&name, get(&key).and_then(|s| v::check_background_preservation(s, th)), wall(&[&key]));
    }
    push(
        &format!("z_consistency_n{}", opts.z_cells),
        get("z_perturbed").and_then(|s| v::check_z_consistency(s, th.z)),
        wall(&["z_perturbed"]),
    );
    push(
        "z_consistency_exact",
        get("z_exact").and_then(|s| v::check_z_consistency(s, th.z_exact)).map(|mut c| {
            c.name = "z_consistency_exact".into();
            c
        }),
        wall(&["z_exact"]),
    );
    let linear = ["linear_0", "linear_1", "linear_2"];
    push(
        "linear_response",
        get("linear_0").and_then(|a| v::check_linear_response(a, get("linear_1")?, th)),
        wall(&linear[..2]),
    );
    let sweep = || -> Result<Vec<&TimeSeries>> { linear.iter().map(|k| get(k)).collect() };
    push("c_stability_spread", sweep().and_then(|s| v::check_c_stability(&s, th)), wall(&linear));
    push("c1_trace", sweep().and_then(|s| v::check_c1_trace(&s, th)), wall(&linear));
    let (coarse, fine) = (format!("residual_n{}", opts.residual_cells), format!("residual_n{}", 2 * opts.residual_cells));
    push(
        &format!("shock_residual_n{}", opts.residual_cells),
        get(&coarse).and_then(|s| v::check_shock_residuals(s, th)),
        wall(&[&coarse]),
    );
    push(
        "shock_residual_convergence",
        get(&coarse).and_then(|a| v::check_shock_residual_convergence(a, get(&fine)?, th)),
        wall(&[&coarse, &fine]),
    );
    push("conservation_convergence", v::check_conservation_convergence(&scenarios[&coarse], th), 0.0);
    push("long_horizon_boundedness", get("long").and_then(|s| v::check_boundedness(s, th)), wall(&["long"]));

    // a second, independent run of the coarse residual scenario
    let start = Instant::now();
    let again = run(scenarios[&coarse].clone());
    let again_time = start.elapsed().as_secs_f64();
    push(
        "determinism",
        get(&coarse).and_then(|a| Ok(v::check_determinism(&render(a), &render(&again?)))),
        wall(&[&coarse]) + again_time,
    );
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_criterion_is_listed() {
        let mut numbers: Vec<u8> = CRITERIA.iter().map(|(n, _)| *n).collect();
        numbers.dedup();
        assert_eq!(numbers, (1..=12).collect::<Vec<u8>>());
    }

    #[test]
    fn derived_scenarios_differ_only_where_intended() {
        let base: ScenarioConfig = crate::output::parse_scenario_str(
            r#"{"gamma":1.4,"nu0":2.0,"p0":1.0,"u_iota":2.0,"kappa":1.0,"hbar":0.01,
            "ignition_temperature":5.0,"epsilon":0.001,"piston":{"profile":"tanh"},
            "n_cells":400,"cfl":0.8,"t_end":10.0}"#,
        )
        .unwrap();
        let s = derived_scenarios(&base, &SuiteOptions::default());
        assert_eq!(s["background_n100"].epsilon, 0.0);
        assert_eq!(s["linear_1"].epsilon, 5e-4);
        assert_eq!(s["linear_2"].hbar, 0.0);
        assert_eq!(s["residual_n800"].n_cells, 800);
        assert_eq!(s["long"].t_end, 100.0);
        for cfg in s.values() {
            cfg.validate().unwrap();
        }
    }
}

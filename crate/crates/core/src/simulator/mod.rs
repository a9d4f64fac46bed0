//! Front-tracking integration of the scaled diagonal system between the
//! piston at `x = 0` and the shock at `x = chi(t)`.
//!
//! The strip is mapped to `xi = x / chi(t)` in `[0, 1]` so the piston and the
//! shock sit at nodes `0` and `N` for the whole run. Each characteristic row
//! is upwinded along its own speed `(lambda_i - xi chi') / chi`, the two
//! coupled rows are solved exactly per node, and time stepping is Heun's
//! method on the field and the shock position together.

pub mod config;
pub mod history;

use serde::{Deserialize, Serialize};

pub use config::{IgnitionModel, Interpolation, Numerics, PistonProfile, ScenarioConfig, SchemeOrder};
pub use history::{z_field, ShockHistory, ShockSample};

use crate::eos::{Branch, EosParams, ThermoPoint};
use crate::error::{Error, Result};
use crate::hugoniot::{
    admissible_window, boundary_maps, lax_check, solve_from_piston_speed, AdmissibleWindow, BoundaryMaps, GMapSolution,
    ShockBoundary, ShockLocusPoint, UpstreamState,
};
use crate::riemann_transform::{choose_scaling, DiagonalState, ReferenceState, ScalingParams};

/// Courant numbers above this are rejected outright.
pub const CFL_LIMIT: f64 = 1.0;

/// Physical state at one node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasState {
    pub nu: f64,
    pub s: f64,
    pub u: f64,
    pub p: f64,
    pub temperature: f64,
    pub z: f64,
}

impl GasState {
    /// `E = u^2/2 + e + Z hbar`.
    pub fn total_energy(&self, hbar: f64) -> f64 {
        0.5 * self.u * self.u + self.temperature + self.z * hbar
    }
}

/// Unscales `phi_hat`, maps it back to `(nu, s, u)` and evaluates the EOS.
pub fn reconstruct_physical(
    reference: &ReferenceState,
    scaling: &ScalingParams,
    phi_hat: DiagonalState,
    z: f64,
) -> Result<GasState> {
    let (nu, s, u) = reference.physical(scaling.unscale(phi_hat));
    if !(nu > 0.0 && nu < 1.0 && s.is_finite() && u.is_finite()) {
        return Err(Error::StateEscape(format!("reconstructed state (nu, s, u) = ({nu}, {s}, {u}) left nu in (0, 1)")));
    }
    let eos = EosParams::new(reference.gamma)?;
    let pt = ThermoPoint::new(nu, s)?;
    Ok(GasState { nu, s, u, p: eos.pressure(pt)?, temperature: eos.temperature(pt)?, z })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSnapshot {
    pub t: f64,
    pub chi: f64,
    pub chi_prime: f64,
    pub xi: Vec<f64>,
    pub phi_hat: Vec<[f64; 3]>,
    /// Empty when the state could not be reconstructed (diagnostic snapshots only).
    pub states: Vec<GasState>,
}

/// Per-step norms of the perturbation and its first derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormSample {
    pub t: f64,
    pub dt: f64,
    pub phi_c0: f64,
    pub phi_dx: f64,
    pub phi_dt: f64,
    /// Sup norm of `(nu - nu_i, u - u_i, p - p_i)`.
    pub phys_c0: f64,
    pub phys_dx: f64,
    pub phys_dt: f64,
    /// `|chi' - chi0|`.
    pub chi_dev: f64,
}

/// Downstream state at the shock node after each accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontSample {
    pub t: f64,
    pub nu: f64,
    pub s: f64,
    pub u: f64,
    pub p: f64,
    pub sigma: f64,
}

/// Fixed-`x` particle carrying its own integral of `Z_t = -kappa psi Z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracerRecord {
    pub x: f64,
    pub t_entry: Option<f64>,
    pub z: f64,
}

/// Derived, immutable data shared by every step of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub upstream: UpstreamState,
    pub window: AdmissibleWindow,
    pub background: ShockLocusPoint,
    pub maps: BoundaryMaps,
    pub scaling: ScalingParams,
    pub boundary: ShockBoundary,
    pub chi0: f64,
    pub background_temperature: f64,
}

impl Scenario {
    pub fn new(config: ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let upstream = config.upstream()?;
        let window = admissible_window(&upstream)?;
        let background = solve_from_piston_speed(&upstream, config.u_iota)?;
        if !lax_check(&upstream, &background, 0.0) {
            return Err(Error::Hypothesis(format!(
                "background shock speed {} fails the Lax condition",
                background.sigma
            )));
        }
        let maps = boundary_maps(&upstream, &background)?;
        let scaling = choose_scaling(&maps, config.numerics.beta_max)?;
        let boundary = ShockBoundary::new(upstream, &background)?.with_radius(config.numerics.g_map_radius);
        let background_temperature = upstream.eos.temperature(ThermoPoint::new(background.nu, background.s)?)?;
        Ok(Self {
            chi0: background.sigma,
            config,
            upstream,
            window,
            background,
            maps,
            scaling,
            boundary,
            background_temperature,
        })
    }

    pub fn reference(&self) -> &ReferenceState {
        &self.boundary.reference
    }

    /// Whether the step ignition switch is on in the background state.
    pub fn ignited(&self) -> bool {
        self.config.ignition.psi(self.background_temperature, self.config.ignition_temperature) > 0.0
    }

    /// Whether the reaction source can be nonzero anywhere near the background.
    pub fn reacting(&self) -> bool {
        self.config.hbar > 0.0
    }
}

/// Everything reported about the scenario alongside a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub config: ScenarioConfig,
    pub background: ShockLocusPoint,
    pub window: AdmissibleWindow,
    pub maps: BoundaryMaps,
    pub scaling: ScalingParams,
    pub reference: ReferenceState,
    pub chi0: f64,
    pub background_temperature: f64,
    pub ignited: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub summary: RunSummary,
    pub history: Vec<ShockSample>,
    pub front: Vec<FrontSample>,
    pub norms: Vec<NormSample>,
    pub snapshots: Vec<FieldSnapshot>,
    pub tracers: Vec<TracerRecord>,
    pub steps: usize,
    pub warnings: Vec<String>,
}

#[derive(Clone, Copy)]
enum Upwind {
    FromRight,
    FromLeft,
}

fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

/// One-sided difference of `v` at node `j` (not yet divided by the spacing).
fn upwind_difference(v: impl Fn(usize) -> f64, j: usize, n: usize, dir: Upwind, second: bool) -> f64 {
    let slope = |m: usize| -> f64 {
        if m == 0 || m >= n {
            0.0
        } else {
            minmod(v(m + 1) - v(m), v(m) - v(m - 1))
        }
    };
    match dir {
        Upwind::FromRight => {
            let base = v(j + 1) - v(j);
            if second {
                base - 0.5 * (slope(j + 1) - slope(j))
            } else {
                base
            }
        }
        Upwind::FromLeft => {
            let base = v(j) - v(j - 1);
            if second {
                base + 0.5 * (slope(j) - slope(j - 1))
            } else {
                base
            }
        }
    }
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Derivative along `xi` on a uniform grid: centered inside, one-sided at the ends.
fn xi_derivative(v: impl Fn(usize) -> f64, j: usize, n: usize, dxi: f64) -> f64 {
    if j == 0 {
        (v(1) - v(0)) / dxi
    } else if j == n {
        (v(n) - v(n - 1)) / dxi
    } else {
        (v(j + 1) - v(j - 1)) / (2.0 * dxi)
    }
}

struct Stage<'a> {
    t: f64,
    chi: f64,
    chi_prime: f64,
    phi: &'a [[f64; 3]],
    z: Option<&'a [f64]>,
    /// End of the partially completed trajectory segment, `(t, chi)`.
    tail: (f64, f64),
    gmap: GMapSolution,
}

struct Rates {
    dphi: Vec<[f64; 3]>,
    dz: Option<Vec<f64>>,
    max_speed: f64,
}

/// A run in progress.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub scenario: Scenario,
    t: f64,
    chi: f64,
    chi_prime: f64,
    phi: Vec<[f64; 3]>,
    z: Option<Vec<f64>>,
    states: Vec<GasState>,
    gmap: GMapSolution,
    history: ShockHistory,
    front: Vec<FrontSample>,
    norms: Vec<NormSample>,
    snapshots: Vec<FieldSnapshot>,
    tracers: Vec<TracerRecord>,
    next_snapshot: f64,
    steps: usize,
    warnings: Vec<String>,
}

/// Builds the background, the scaling and the seed interval.
pub fn init_scenario(config: ScenarioConfig) -> Result<Simulation> {
    Simulation::new(config)
}

/// Steps `config` to `t_end`.
pub fn run(config: ScenarioConfig) -> Result<TimeSeries> {
    let mut sim = Simulation::new(config)?;
    while !sim.finished() {
        sim.step()?;
    }
    Ok(sim.finish())
}

impl Simulation {
    pub fn new(config: ScenarioConfig) -> Result<Self> {
        let scenario = Scenario::new(config)?;
        let cfg = &scenario.config;
        let n = cfg.n_cells;
        let t0 = cfg.numerics.seed_time;
        let chi0 = scenario.chi0;
        let mut history = ShockHistory::new(cfg.numerics.interpolation);
        history.push(ShockSample { t: 0.0, chi: 0.0, chi_prime: chi0 })?;
        history.push(ShockSample { t: t0, chi: chi0 * t0, chi_prime: chi0 })?;
        let arrhenius = matches!(cfg.ignition, IgnitionModel::Arrhenius { .. });
        let x_max = 0.9 * chi0 * cfg.t_end;
        let n_tr = cfg.numerics.n_tracers;
        let tracers = (0..n_tr)
            .map(|k| TracerRecord { x: x_max * (k + 1) as f64 / (n_tr + 1) as f64, t_entry: None, z: 1.0 })
            .collect();
        let mut sim = Self {
            t: t0,
            chi: chi0 * t0,
            chi_prime: chi0,
            phi: vec![[0.0; 3]; n + 1],
            z: None,
            states: Vec::new(),
            gmap: GMapSolution { phi1: 0.0, phi2: 0.0, dphi1: 0.0, dphi2: 0.0, iterations: 0 },
            history,
            front: Vec::new(),
            norms: Vec::new(),
            snapshots: Vec::new(),
            tracers,
            next_snapshot: cfg.numerics.snapshot_interval,
            steps: 0,
            warnings: Vec::new(),
            scenario,
        };
        if arrhenius {
            // the seed interval has burnt for at most t0
            let kappa = sim.scenario.config.kappa;
            let psi = sim.psi(sim.scenario.background_temperature);
            let z = (0..=n)
                .map(|j| (-kappa * psi * t0 * (1.0 - j as f64 / n as f64)).exp())
                .collect();
            sim.z = Some(z);
        }
        let mut phi = std::mem::take(&mut sim.phi);
        sim.gmap = sim.apply_boundaries(t0, &mut phi, (0.0, 0.0))?;
        sim.phi = phi;
        sim.chi_prime = sim.shock_speed(&sim.phi[n])?;
        sim.states = sim.reconstruct_all(&sim.phi, sim.z.as_deref())?;
        let seeded_tracers: Vec<TracerRecord> = sim
            .tracers
            .iter()
            .map(|tr| {
                if tr.x <= sim.chi {
                    let t_entry = tr.x / chi0;
                    let psi = sim.psi(sim.scenario.background_temperature);
                    TracerRecord { x: tr.x, t_entry: Some(t_entry), z: (-sim.scenario.config.kappa * psi * (t0 - t_entry)).exp() }
                } else {
                    *tr
                }
            })
            .collect();
        sim.tracers = seeded_tracers;
        sim.snapshots.push(sim.snapshot());
        Ok(sim)
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn shock_position(&self) -> f64 {
        self.chi
    }

    pub fn shock_speed_now(&self) -> f64 {
        self.chi_prime
    }

    pub fn phi_hat(&self) -> &[[f64; 3]] {
        &self.phi
    }

    pub fn states(&self) -> &[GasState] {
        &self.states
    }

    pub fn history(&self) -> &ShockHistory {
        &self.history
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn finished(&self) -> bool {
        self.t >= self.scenario.config.t_end
    }

    fn n(&self) -> usize {
        self.phi.len() - 1
    }

    fn psi(&self, temperature: f64) -> f64 {
        let cfg = &self.scenario.config;
        cfg.ignition.psi(temperature, cfg.ignition_temperature)
    }

    pub fn snapshot(&self) -> FieldSnapshot {
        let n = self.n();
        FieldSnapshot {
            t: self.t,
            chi: self.chi,
            chi_prime: self.chi_prime,
            xi: (0..=n).map(|j| j as f64 / n as f64).collect(),
            phi_hat: self.phi.clone(),
            states: self.states.clone(),
        }
    }

    /// Piston relation at node 0, shock relations at node `N`.
    fn apply_boundaries(&self, t: f64, phi: &mut [[f64; 3]], guess: (f64, f64)) -> Result<GMapSolution> {
        let sc = &self.scenario;
        let (alpha, beta) = (sc.scaling.alpha, sc.scaling.beta);
        let n = phi.len() - 1;
        phi[0][2] = alpha * phi[0][0] + 2.0 * sc.config.piston_offset(t);
        let sol = sc.boundary.solve(phi[n][2], guess)?;
        phi[n][0] = sol.phi1 / alpha;
        phi[n][1] = beta * sol.phi2;
        Ok(sol)
    }

    /// Shock speed from the downstream state at the shock node.
    fn shock_speed(&self, phi_n: &[f64; 3]) -> Result<f64> {
        let sc = &self.scenario;
        let up = &sc.upstream;
        let g = up.gamma();
        let (nu, s, _) = sc.reference().physical(sc.scaling.unscale(DiagonalState::from_array(*phi_n)));
        if !(nu > 0.0 && nu < 1.0) {
            return Err(Error::StateEscape(format!("downstream volume {nu} at the shock left (0, 1)")));
        }
        let es = s.exp();
        let p_jump = (g + 1.0) * es - g * es * nu - up.p0;
        let sigma2 = p_jump / (up.nu0 - nu);
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::Lax(format!("shock is not compressive: p - p0 = {p_jump} at nu = {nu}")));
        }
        Ok(sigma2.sqrt())
    }

    fn reconstruct_all(&self, phi: &[[f64; 3]], zfield: Option<&[f64]>) -> Result<Vec<GasState>> {
        let sc = &self.scenario;
        let n = phi.len() - 1;
        let kappa = sc.config.kappa;
        (0..=n)
            .map(|j| {
                let z = match zfield {
                    Some(zf) => zf[j],
                    None => {
                        let x = j as f64 / n as f64 * self.chi;
                        (-kappa * (self.t - self.history.inverse(x)?).max(0.0)).exp()
                    }
                };
                reconstruct_physical(sc.reference(), &sc.scaling, DiagonalState::from_array(phi[j]), z)
            })
            .collect()
    }

    fn rates(&self, st: &Stage) -> Result<Rates> {
        let sc = &self.scenario;
        let cfg = &sc.config;
        let eos = sc.upstream.eos;
        let rf = sc.reference();
        let n = st.phi.len() - 1;
        let dxi = 1.0 / n as f64;
        let (alpha, beta) = (sc.scaling.alpha, sc.scaling.beta);
        let weight = rf.lambda_b * rf.entropy_weight();
        let second = cfg.numerics.order == SchemeOrder::Second;
        let reacting = sc.reacting();
        let need_psi = reacting || st.z.is_some();

        let mut speeds = vec![[0.0; 3]; n + 1];
        let mut row1 = vec![[0.0; 3]; n + 1];
        let mut row3 = vec![[0.0; 3]; n + 1];
        let mut b = vec![(0.0, 0.0); n + 1];
        let mut q = vec![0.0; n + 1];
        let mut psi = vec![0.0; n + 1];
        let mut max_speed: f64 = 0.0;
        for j in 0..=n {
            let ph = sc.scaling.unscale(DiagonalState::from_array(st.phi[j]));
            let (b2, b3) = rf.coupling_coeffs(ph);
            let [l1, _, l3] = rf.eigenvalues(ph.phi2);
            let drift = j as f64 * dxi * st.chi_prime;
            speeds[j] = [(l1 - drift) / st.chi, -drift / st.chi, (l3 - drift) / st.chi];
            max_speed = speeds[j].iter().fold(max_speed, |m, a| m.max(a.abs()));
            row1[j] = [1.0, b2 / (alpha * beta), b3 / alpha];
            row3[j] = [alpha * b3, b2 / beta, 1.0];
            b[j] = (b2, b3);
            if need_psi {
                let (nu, s, _) = rf.physical(ph);
                if !(nu > 0.0 && nu < 1.0) {
                    return Err(Error::StateEscape(format!("volume {nu} at node {j} left (0, 1)")));
                }
                let temp = s.exp() * eos.energy_shape(Branch::Lower, nu);
                psi[j] = self.psi(temp);
                if reacting && psi[j] > 0.0 {
                    let z = match st.z {
                        Some(zf) => zf[j],
                        None => {
                            let crossed = self.history.inverse_with_tail(j as f64 * dxi * st.chi, st.tail)?;
                            (-cfg.kappa * (st.t - crossed).max(0.0)).exp()
                        }
                    };
                    let temp_floor = temp.max(cfg.ignition_temperature + 1e-12);
                    q[j] = cfg.kappa * psi[j] * z * cfg.hbar / temp_floor;
                }
            }
        }

        let phi = st.phi;
        let mut dphi = vec![[0.0; 3]; n + 1];
        for j in 0..=n {
            let (b2, b3) = b[j];
            let src = ((1.0 + b3) * weight + b2) * q[j];
            if j == n {
                let r = &row3[j];
                let dw3 = upwind_difference(|m| dot(r, &phi[m]), j, n, Upwind::FromLeft, second) / dxi;
                let r3 = src - speeds[j][2] * dw3;
                let d3 = r3 / (1.0 + b3 * st.gmap.dphi1 + b2 * st.gmap.dphi2);
                dphi[j] = [st.gmap.dphi1 * d3 / alpha, beta * st.gmap.dphi2 * d3, d3];
                continue;
            }
            let r = &row1[j];
            let dw1 = upwind_difference(|m| dot(r, &phi[m]), j, n, Upwind::FromRight, second) / dxi;
            let r1 = src / alpha - speeds[j][0] * dw1;
            let dp2 = upwind_difference(|m| phi[m][1], j, n, Upwind::FromRight, second) / dxi;
            let d2 = beta * q[j] - speeds[j][1] * dp2;
            let rhs1 = r1 - row1[j][1] * d2;
            if j == 0 {
                let acc = cfg.piston_acceleration(st.t);
                let d1 = (rhs1 - 2.0 * b3 * acc / alpha) / (1.0 + b3);
                dphi[j] = [d1, d2, alpha * d1 + 2.0 * acc];
            } else {
                let r = &row3[j];
                let dw3 = upwind_difference(|m| dot(r, &phi[m]), j, n, Upwind::FromLeft, second) / dxi;
                let rhs3 = src - speeds[j][2] * dw3 - row3[j][1] * d2;
                let det = 1.0 - b3 * b3;
                let d1 = (rhs1 - row1[j][2] * rhs3) / det;
                let d3 = (rhs3 - row3[j][0] * rhs1) / det;
                dphi[j] = [d1, d2, d3];
            }
        }

        let dz = st.z.map(|zf| {
            (0..=n)
                .map(|j| {
                    if j == n {
                        0.0
                    } else {
                        let dzx = upwind_difference(|m| zf[m], j, n, Upwind::FromRight, second) / dxi;
                        -cfg.kappa * psi[j] * zf[j] - speeds[j][1] * dzx
                    }
                })
                .collect()
        });
        Ok(Rates { dphi, dz, max_speed })
    }

    /// Advances one time step; failures abort with a snapshot of the last accepted state.
    pub fn step(&mut self) -> Result<f64> {
        self.try_step().map_err(|reason| Error::Aborted {
            t: self.t,
            reason: Box::new(reason),
            snapshot: Box::new(self.snapshot()),
        })
    }

    fn try_step(&mut self) -> Result<f64> {
        let cfg = self.scenario.config.clone();
        if !(cfg.cfl <= CFL_LIMIT) {
            return Err(Error::Cfl(format!("Courant number {} exceeds the stability limit {CFL_LIMIT}", cfg.cfl)));
        }
        if self.finished() {
            return Err(Error::Domain(format!("run already reached t_end = {}", cfg.t_end)));
        }
        let n = self.n();
        let dxi = 1.0 / n as f64;
        let (t, chi, chi_prime) = (self.t, self.chi, self.chi_prime);

        let r0 = self.rates(&Stage {
            t,
            chi,
            chi_prime,
            phi: &self.phi,
            z: self.z.as_deref(),
            tail: (t, chi),
            gmap: self.gmap,
        })?;
        let mut dt = cfg.cfl * dxi / r0.max_speed;
        let stop = cfg.t_end.min(self.next_snapshot);
        if t + dt >= stop {
            dt = stop - t;
        }
        if !(dt.is_finite() && dt > 1e-14 * t.max(1.0)) {
            return Err(Error::Cfl(format!("time step {dt} underflowed at t = {t}")));
        }
        let t1 = t + dt;

        // predictor
        let mut phi1: Vec<[f64; 3]> =
            self.phi.iter().zip(&r0.dphi).map(|(p, d)| [p[0] + dt * d[0], p[1] + dt * d[1], p[2] + dt * d[2]]).collect();
        let mut z1: Option<Vec<f64>> = self
            .z
            .as_ref()
            .zip(r0.dz.as_ref())
            .map(|(z, dz)| z.iter().zip(dz).map(|(a, b)| a + dt * b).collect());
        if let Some(z) = z1.as_mut() {
            z[n] = 1.0;
        }
        let chi1 = chi + dt * chi_prime;
        let gmap1 = self.apply_boundaries(t1, &mut phi1, (self.gmap.phi1, self.gmap.phi2))?;
        let chi_prime1 = self.shock_speed(&phi1[n])?;

        // corrector
        let r1 = self.rates(&Stage {
            t: t1,
            chi: chi1,
            chi_prime: chi_prime1,
            phi: &phi1,
            z: z1.as_deref(),
            tail: (t1, chi1),
            gmap: gmap1,
        })?;
        let mut phi_new: Vec<[f64; 3]> = self
            .phi
            .iter()
            .zip(&phi1)
            .zip(&r1.dphi)
            .map(|((p0, p1), d)| {
                [
                    0.5 * (p0[0] + p1[0] + dt * d[0]),
                    0.5 * (p0[1] + p1[1] + dt * d[1]),
                    0.5 * (p0[2] + p1[2] + dt * d[2]),
                ]
            })
            .collect();
        let z_new: Option<Vec<f64>> = match (&self.z, &z1, &r1.dz) {
            (Some(z0), Some(zp), Some(dz)) => {
                let mut z: Vec<f64> = z0.iter().zip(zp).zip(dz).map(|((a, b), d)| 0.5 * (a + b + dt * d)).collect();
                z[n] = 1.0;
                Some(z)
            }
            _ => None,
        };
        let chi_new = chi + 0.5 * dt * (chi_prime + chi_prime1);
        let gmap = self.apply_boundaries(t1, &mut phi_new, (gmap1.phi1, gmap1.phi2))?;
        let chi_prime_new = self.shock_speed(&phi_new[n])?;

        // accept
        let mut history = self.history.clone();
        history.push(ShockSample { t: t1, chi: chi_new, chi_prime: chi_prime_new })?;
        let old_history = std::mem::replace(&mut self.history, history);
        let (old_t, old_chi) = (self.t, self.chi);
        self.t = t1;
        self.chi = chi_new;
        let states = match self.reconstruct_all(&phi_new, z_new.as_deref()) {
            Ok(s) => s,
            Err(e) => {
                self.history = old_history;
                self.t = old_t;
                self.chi = old_chi;
                return Err(e);
            }
        };
        let shock = states[n];
        let front = FrontSample { t: t1, nu: shock.nu, s: shock.s, u: shock.u, p: shock.p, sigma: chi_prime_new };
        let locus = ShockLocusPoint { nu: shock.nu, u: shock.u, p: shock.p, s: shock.s, sigma: chi_prime_new };
        if !lax_check(&self.scenario.upstream, &locus, 0.0) {
            self.history = old_history;
            self.t = old_t;
            self.chi = old_chi;
            return Err(Error::Lax(format!("shock speed {chi_prime_new} violates the Lax condition at t = {t1}")));
        }

        self.update_tracers(dt, old_chi, chi_new, &shock);
        let norm = self.norm_sample(dt, &phi_new, &states, chi_new, chi_prime_new);
        self.norms.push(norm);
        self.front.push(front);
        self.phi = phi_new;
        self.z = z_new;
        self.states = states;
        self.chi_prime = chi_prime_new;
        self.gmap = gmap;
        self.steps += 1;

        let piston = cfg.u_iota + cfg.piston_offset(t1);
        if piston <= 0.0 && self.warnings.is_empty() {
            self.warnings.push(format!("piston velocity B'(t) = {piston} is not positive at t = {t1}"));
        }
        if self.t >= self.next_snapshot || self.finished() {
            self.snapshots.push(self.snapshot());
            while self.next_snapshot <= self.t {
                self.next_snapshot += cfg.numerics.snapshot_interval;
            }
        }
        Ok(dt)
    }

    fn update_tracers(&mut self, dt: f64, old_chi: f64, new_chi: f64, shock: &GasState) {
        let kappa = self.scenario.config.kappa;
        let n = self.n();
        let t_old = self.t - dt;
        let psi_shock = self.psi(shock.temperature);
        let mut tracers = std::mem::take(&mut self.tracers);
        for tr in tracers.iter_mut() {
            match tr.t_entry {
                Some(_) => {
                    // temperature at fixed x from the state at the start of the step
                    let pos = (tr.x / old_chi * n as f64).clamp(0.0, n as f64);
                    let j = (pos.floor() as usize).min(n - 1);
                    let w = pos - j as f64;
                    let temp = (1.0 - w) * self.states[j].temperature + w * self.states[j + 1].temperature;
                    tr.z *= (-kappa * self.psi(temp) * dt).exp();
                }
                None if tr.x <= new_chi => {
                    let t_entry = t_old + dt * (tr.x - old_chi) / (new_chi - old_chi);
                    tr.t_entry = Some(t_entry);
                    tr.z = (-kappa * psi_shock * (self.t - t_entry)).exp();
                }
                None => {}
            }
        }
        self.tracers = tracers;
    }

    fn norm_sample(&self, dt: f64, phi: &[[f64; 3]], states: &[GasState], chi: f64, chi_prime: f64) -> NormSample {
        let n = phi.len() - 1;
        let dxi = 1.0 / n as f64;
        let bg = &self.scenario.background;
        let pert = |s: &GasState| [s.nu - bg.nu, s.u - bg.u, s.p - bg.p];
        let new_phys: Vec<[f64; 3]> = states.iter().map(pert).collect();
        let old_phys: Vec<[f64; 3]> = self.states.iter().map(pert).collect();
        let mut out = NormSample {
            t: self.t,
            dt,
            phi_c0: 0.0,
            phi_dx: 0.0,
            phi_dt: 0.0,
            phys_c0: 0.0,
            phys_dx: 0.0,
            phys_dt: 0.0,
            chi_dev: (chi_prime - self.scenario.chi0).abs(),
        };
        for j in 0..=n {
            let drift = j as f64 * dxi * chi_prime / chi;
            for c in 0..3 {
                let dxi_phi = xi_derivative(|m| phi[m][c], j, n, dxi);
                let dxi_phys = xi_derivative(|m| new_phys[m][c], j, n, dxi);
                let dt_phi = (phi[j][c] - self.phi[j][c]) / dt - drift * dxi_phi;
                let dt_phys = (new_phys[j][c] - old_phys[j][c]) / dt - drift * dxi_phys;
                out.phi_c0 = out.phi_c0.max(phi[j][c].abs());
                out.phi_dx = out.phi_dx.max((dxi_phi / chi).abs());
                out.phi_dt = out.phi_dt.max(dt_phi.abs());
                out.phys_c0 = out.phys_c0.max(new_phys[j][c].abs());
                out.phys_dx = out.phys_dx.max((dxi_phys / chi).abs());
                out.phys_dt = out.phys_dt.max(dt_phys.abs());
            }
        }
        out
    }

    pub fn summary(&self) -> RunSummary {
        let sc = &self.scenario;
        RunSummary {
            config: sc.config.clone(),
            background: sc.background,
            window: sc.window,
            maps: sc.maps,
            scaling: sc.scaling,
            reference: *sc.reference(),
            chi0: sc.chi0,
            background_temperature: sc.background_temperature,
            ignited: sc.ignited(),
        }
    }

    pub fn finish(self) -> TimeSeries {
        TimeSeries {
            summary: self.summary(),
            history: self.history.samples().to_vec(),
            front: self.front,
            norms: self.norms,
            snapshots: self.snapshots,
            tracers: self.tracers,
            steps: self.steps,
            warnings: self.warnings,
        }
    }
}

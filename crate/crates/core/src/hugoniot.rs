//! Rankine–Hugoniot locus through the quiescent upstream state `(nu0, 0, p0)`.
//!
//! Across a forward shock of Lagrangian speed `sigma` into gas at rest,
//!
//! ```text
//! u = sigma (nu0 - nu),   p - p0 = sigma u,   e - e0 + (p + p0)(nu - nu0)/2 = 0.
//! ```
//!
//! On the lower EOS branch the energy relation is affine in `e^s`, so the
//! downstream entropy has a closed form for every `nu`. The Newton route
//! [`solve_downstream`] and the elimination route
//! [`solve_downstream_closed_form`] are kept separate so each can check the
//! other.

use serde::{Deserialize, Serialize};

use crate::eos::{Branch, EosParams, ThermoPoint};
use crate::error::{Error, Result};
use crate::riemann_transform::{DiagonalState, ReferenceState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpstreamState {
    pub eos: EosParams,
    pub nu0: f64,
    pub p0: f64,
    pub s0: f64,
    pub c0: f64,
}

impl UpstreamState {
    /// Validates `nu0 > (g+1)/g` and `p0 > 0`.
    pub fn new(eos: EosParams, nu0: f64, p0: f64) -> Result<Self> {
        let g = eos.gamma();
        let bound = (g + 1.0) / g;
        if !(nu0.is_finite() && nu0 > bound) {
            return Err(Error::config(
                "nu0",
                format!("upstream specific volume must exceed (gamma+1)/gamma = {bound:.6}, got {nu0}"),
            ));
        }
        if !(p0.is_finite() && p0 > 0.0) {
            return Err(Error::config("p0", format!("upstream pressure must be positive, got {p0}")));
        }
        let s0 = eos.entropy_from_pressure(nu0, p0)?;
        let c0 = eos.sound_speed(ThermoPoint::new(nu0, s0)?)?;
        Ok(Self { eos, nu0, p0, s0, c0 })
    }

    pub fn gamma(&self) -> f64 {
        self.eos.gamma()
    }

    pub fn internal_energy(&self) -> f64 {
        self.s0.exp() * self.eos.energy_shape(Branch::Upper, self.nu0)
    }

    /// `e^{s0} nu0^{-g}`, which is `p0` for the upper-branch upstream state.
    fn p0_term(&self) -> f64 {
        self.s0.exp() * self.nu0.powf(-self.gamma())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShockLocusPoint {
    pub nu: f64,
    pub u: f64,
    pub p: f64,
    pub s: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryMaps {
    pub h10: f64,
    pub h20: f64,
    pub k11: f64,
    pub k12: f64,
    pub k21: f64,
    pub k22: f64,
    /// `k11` with the `-1/2` from `du/dphi1` replaced by `+1/2` for `phi3`.
    pub k11_tilde: f64,
    pub det_k: f64,
}

fn check_lower_branch(up: &UpstreamState, nu: f64) -> Result<()> {
    if !(nu > 0.0 && nu < 1.0 && nu < up.nu0) {
        return Err(Error::Domain(format!("downstream specific volume must lie in (0, 1), got {nu}")));
    }
    Ok(())
}

/// Radicand of the velocity jump, `-(p - p0)(nu - nu0)`, on the lower branch.
fn radicand(up: &UpstreamState, nu: f64, s: f64) -> f64 {
    let g = up.gamma();
    let es = s.exp();
    -((g + 1.0) * es - g * es * nu - up.p0_term()) * (nu - up.nu0)
}

/// `(J1, J2)`: velocity jump and energy jump residuals on the lower branch.
pub fn rh_residuals(up: &UpstreamState, nu: f64, s: f64, u: f64) -> Result<(f64, f64)> {
    check_lower_branch(up, nu)?;
    let r = radicand(up, nu, s);
    if !(r >= 0.0) {
        return Err(Error::Locus(format!("negative velocity radicand {r} at nu = {nu}, s = {s}")));
    }
    Ok((u - r.sqrt(), energy_residual(up, nu, s)))
}

fn energy_residual(up: &UpstreamState, nu: f64, s: f64) -> f64 {
    let g = up.gamma();
    let nu0 = up.nu0;
    0.5 * s.exp() * ((g + 1.0) * (nu + nu0) - (g * g + g) / (g - 1.0) - g * nu * nu0)
        + up.p0_term() * ((g + 1.0) / (2.0 * (g - 1.0)) * nu0 - 0.5 * nu)
}

/// Partial derivatives of `(J1, J2)` with respect to `(nu, s, u)`.
fn rh_jacobian(up: &UpstreamState, nu: f64, s: f64) -> Result<[[f64; 3]; 2]> {
    let g = up.gamma();
    let nu0 = up.nu0;
    let es = s.exp();
    let p = es * (g + 1.0 - g * nu);
    let r = radicand(up, nu, s);
    if !(r > 0.0) {
        return Err(Error::Locus(format!("non-positive velocity radicand {r} at nu = {nu}")));
    }
    let root = r.sqrt();
    let dr_dnu = g * es * (nu - nu0) - (p - up.p0_term());
    let dr_ds = -p * (nu - nu0);
    let big_a = (g + 1.0) * (nu + nu0) - (g * g + g) / (g - 1.0) - g * nu * nu0;
    Ok([
        [-dr_dnu / (2.0 * root), -dr_ds / (2.0 * root), 1.0],
        [0.5 * es * (g + 1.0 - g * nu0) - 0.5 * up.p0_term(), 0.5 * es * big_a, 0.0],
    ])
}

/// Options for the damped 2x2 Newton iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { max_iterations: 50, tolerance: 1e-12 }
    }
}

type Eval2 = ([f64; 2], [[f64; 2]; 2]);

fn inf_norm(v: [f64; 2]) -> f64 {
    v[0].abs().max(v[1].abs())
}

/// Damped Newton for two equations in two unknowns. The step is halved while
/// the residual grows or the evaluation fails.
fn newton2<F>(f: F, x0: [f64; 2], opts: NewtonOptions) -> Result<([f64; 2], usize)>
where
    F: Fn([f64; 2]) -> Result<Eval2>,
{
    let mut x = x0;
    let (mut res, mut jac) = f(x)?;
    for it in 0..=opts.max_iterations {
        let norm = inf_norm(res);
        if norm < opts.tolerance {
            return Ok((x, it));
        }
        if it == opts.max_iterations {
            break;
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if !(det.abs() > 0.0) || !det.is_finite() {
            return Err(Error::ShockBoundary(format!("singular Jacobian at iteration {it}")));
        }
        let dx = [
            -(jac[1][1] * res[0] - jac[0][1] * res[1]) / det,
            -(-jac[1][0] * res[0] + jac[0][0] * res[1]) / det,
        ];
        // roundoff floor: the full step no longer moves the iterate
        if dx[0].abs() <= 4.0 * f64::EPSILON * (1.0 + x[0].abs())
            && dx[1].abs() <= 4.0 * f64::EPSILON * (1.0 + x[1].abs())
        {
            if norm < 1e3 * opts.tolerance {
                return Ok((x, it));
            }
            break;
        }
        let mut damping = 1.0;
        loop {
            let trial = [x[0] + damping * dx[0], x[1] + damping * dx[1]];
            match f(trial) {
                Ok((r, j)) if inf_norm(r) <= norm || damping < 1e-3 => {
                    x = trial;
                    res = r;
                    jac = j;
                    break;
                }
                _ if damping < 1e-3 => {
                    return Err(Error::ShockBoundary(format!("line search failed at iteration {it}")));
                }
                _ => damping *= 0.5,
            }
        }
    }
    Err(Error::ShockBoundary(format!(
        "no convergence in {} iterations (residual {:e})",
        opts.max_iterations,
        inf_norm(res)
    )))
}

/// `e^s` on the locus at `nu`, from the energy jump relation on the given branch.
fn locus_exp_entropy(up: &UpstreamState, branch: Branch, nu: f64) -> f64 {
    let eos = &up.eos;
    let numerator = up.internal_energy() - 0.5 * up.p0 * (nu - up.nu0);
    let denominator = eos.energy_shape(branch, nu) + 0.5 * eos.pressure_shape(branch, nu) * (nu - up.nu0);
    numerator / denominator
}

fn locus_point_on(up: &UpstreamState, branch: Branch, nu: f64) -> Result<ShockLocusPoint> {
    let es = locus_exp_entropy(up, branch, nu);
    if !(es > 0.0 && es.is_finite()) {
        return Err(Error::Locus(format!("energy relation gives e^s = {es} at nu = {nu}")));
    }
    let p = es * up.eos.pressure_shape(branch, nu);
    let jump = p - up.p0;
    if !(jump > 0.0) {
        return Err(Error::Locus(format!("non-compressive pressure jump {jump} at nu = {nu}")));
    }
    let gap = up.nu0 - nu;
    Ok(ShockLocusPoint {
        nu,
        u: (jump * gap).sqrt(),
        p,
        s: es.ln(),
        sigma: (jump / gap).sqrt(),
    })
}

/// Downstream state by eliminating `e^s` from the energy relation.
pub fn solve_downstream_closed_form(up: &UpstreamState, nu: f64) -> Result<ShockLocusPoint> {
    check_lower_branch(up, nu)?;
    locus_point_on(up, Branch::Lower, nu)
}

/// Locus point for any `nu` in `(0, nu0)`, using whichever EOS branch `nu` falls in.
pub fn locus_point_extended(up: &UpstreamState, nu: f64) -> Result<ShockLocusPoint> {
    if !(nu > 0.0 && nu < up.nu0) {
        return Err(Error::Domain(format!("locus specific volume must lie in (0, nu0), got {nu}")));
    }
    locus_point_on(up, Branch::of(nu), nu)
}

/// Downstream state at `nu` by Newton on `(J1, J2)` in the unknowns `(s, u)`.
pub fn solve_downstream(up: &UpstreamState, nu: f64) -> Result<ShockLocusPoint> {
    check_lower_branch(up, nu)?;
    let s_start = up.s0;
    let u_start = radicand(up, nu, s_start).max(0.0).sqrt();
    let eval = |x: [f64; 2]| -> Result<Eval2> {
        let (j1, j2) = rh_residuals(up, nu, x[0], x[1])?;
        let d = rh_jacobian(up, nu, x[0])?;
        Ok(([j1, j2], [[d[0][1], d[0][2]], [d[1][1], d[1][2]]]))
    };
    let opts = NewtonOptions { max_iterations: 100, tolerance: 1e-13 };
    let ([s, u], _) = newton2(eval, [s_start, u_start], opts)
        .map_err(|e| Error::Locus(format!("Newton on the jump relations at nu = {nu}: {e}")))?;
    let es = s.exp();
    let p = es * (up.gamma() + 1.0 - up.gamma() * nu);
    let jump = p - up.p0;
    if !(u > 0.0 && jump > 0.0) {
        return Err(Error::Locus(format!("Newton converged to a non-compressive state at nu = {nu}")));
    }
    Ok(ShockLocusPoint { nu, u, p, s, sigma: (jump / (up.nu0 - nu)).sqrt() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmissibleWindow {
    /// Piston speed at which the downstream volume reaches 1.
    pub u1: f64,
    /// Limit of the piston speed at the far end of the locus; `+inf` when
    /// the locus ends at a positive volume.
    pub u_o: f64,
    /// Richardson error estimate for `u_o` (zero when infinite).
    pub u_o_error: f64,
    /// Smallest downstream volume on the locus (0 or the pole of `e^s`).
    pub nu_floor: f64,
}

impl AdmissibleWindow {
    pub fn contains(&self, u: f64) -> bool {
        self.u1 < u && u < self.u_o
    }
}

/// Volume at which the lower-branch energy relation's denominator vanishes.
fn locus_pole(up: &UpstreamState) -> f64 {
    let g = up.gamma();
    let nu0 = up.nu0;
    // denominator of e^s is affine in nu on the lower branch
    let slope = 0.5 * (g * nu0 - g - 1.0);
    let intercept = (g * g + g) / (2.0 * (g - 1.0)) - 0.5 * (g + 1.0) * nu0;
    -intercept / slope
}

/// Fails when the locus has no point with `nu < 1`, i.e. the pole lies at or above 1.
pub fn admissible_window(up: &UpstreamState) -> Result<AdmissibleWindow> {
    let pole = locus_pole(up);
    let u1 = locus_point_on(up, Branch::Lower, 1.0).map(|p| p.u);
    let u1 = match u1 {
        Ok(u1) if pole < 1.0 => u1,
        _ => {
            return Err(Error::Hypothesis(format!(
                "the Hugoniot locus of (gamma, nu0, p0) = ({}, {}, {}) has no downstream volume below 1 (pole at {pole})",
                up.gamma(),
                up.nu0,
                up.p0
            )))
        }
    };
    if pole > 0.0 {
        return Ok(AdmissibleWindow { u1, u_o: f64::INFINITY, u_o_error: 0.0, nu_floor: pole });
    }
    let u_at = |nu: f64| locus_point_on(up, Branch::Lower, nu).map(|p| p.u).unwrap_or(f64::NAN);
    let (a, b, c) = (u_at(1e-3), u_at(1e-4), u_at(1e-5));
    let coarse = (10.0 * b - a) / 9.0;
    let fine = (10.0 * c - b) / 9.0;
    Ok(AdmissibleWindow { u1, u_o: fine, u_o_error: (fine - coarse).abs(), nu_floor: 0.0 })
}

/// Background state for piston speed `u_iota` by bisection on the monotone locus.
pub fn solve_from_piston_speed(up: &UpstreamState, u_iota: f64) -> Result<ShockLocusPoint> {
    let window = admissible_window(up)?;
    if !window.contains(u_iota) {
        return Err(Error::Admissibility(format!(
            "piston speed {u_iota} outside the admissible window ({}, {})",
            window.u1, window.u_o
        )));
    }
    let speed = |nu: f64| locus_point_on(up, Branch::Lower, nu).map(|p| p.u);
    let mut hi = 1.0 - 1e-12;
    let mut lo = if window.nu_floor > 0.0 { window.nu_floor * (1.0 + 1e-9) + 1e-12 } else { 1e-6 };
    // near the far end the bracket may need to be pushed toward the floor
    let mut tries = 0;
    while speed(lo).map(|u| u < u_iota).unwrap_or(true) {
        tries += 1;
        if tries > 60 {
            return Err(Error::Admissibility(format!("cannot bracket piston speed {u_iota} on the locus")));
        }
        lo = window.nu_floor + 0.5 * (lo - window.nu_floor);
    }
    if speed(hi)? > u_iota {
        return Err(Error::Admissibility(format!("piston speed {u_iota} is below the locus at nu = 1")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if speed(mid)? > u_iota {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    locus_point_on(up, Branch::Lower, 0.5 * (lo + hi))
}

/// Strict Lax check `c0 + margin < sigma < sqrt(-p_nu(nu, s)) - margin`.
pub fn lax_check(up: &UpstreamState, pt: &ShockLocusPoint, margin: f64) -> bool {
    let downstream = match ThermoPoint::new(pt.nu, pt.s).and_then(|tp| up.eos.sound_speed(tp)) {
        Ok(c) => c,
        Err(_) => return false,
    };
    up.c0 + margin < pt.sigma && pt.sigma < downstream - margin
}

/// Linearized shock-boundary maps at the background state.
pub fn boundary_maps(up: &UpstreamState, bg: &ShockLocusPoint) -> Result<BoundaryMaps> {
    if !(bg.nu > 0.0 && bg.nu < 1.0) {
        return Err(Error::Hypothesis(format!("background volume {} is not below 1", bg.nu)));
    }
    let g = up.gamma();
    let nu0 = up.nu0;
    let nu_i = bg.nu;
    let es_i = bg.p / (g + 1.0 - g * nu_i);
    let lb = (g * es_i).sqrt();
    let chi0 = bg.sigma;
    let p0 = up.p0_term();
    let q = (g + 1.0 - g * nu0) * es_i - p0;
    let half_w = (g + 1.0) / (2.0 * g) - 0.5 * nu_i;

    let k11 = -lb / (4.0 * chi0) - chi0 / (4.0 * lb) - 0.5;
    let k11_tilde = k11 + 1.0;
    let k12 = half_w * chi0;
    let k21 = -q / (4.0 * lb);
    let k22 = half_w * q - p0 * ((g + 1.0) * nu0 - (g - 1.0) * nu_i) / (2.0 * (g - 1.0));
    let det_k = k11 * k22 - k12 * k21;
    if !(det_k > 0.0) {
        return Err(Error::Hypothesis(format!("det k = {det_k} is not positive")));
    }
    let h10 = -(k11_tilde * k22 - k12 * k21) / det_k;
    let h20 = k21 / det_k;
    if !(h10.abs() < 1.0) {
        return Err(Error::Hypothesis(format!("|h10| = {} is not below 1", h10.abs())));
    }
    Ok(BoundaryMaps { h10, h20, k11, k12, k21, k22, k11_tilde, det_k })
}

/// Solution of the shock boundary relations for a given outgoing `phi3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GMapSolution {
    pub phi1: f64,
    pub phi2: f64,
    /// `dG1/dphi3` and `dG2/dphi3` at the solution, from the implicit function theorem.
    pub dphi1: f64,
    pub dphi2: f64,
    pub iterations: usize,
}

/// Shock boundary relations `K(phi1, phi2; phi3) = J(nu(phi), s(phi), u(phi)) = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShockBoundary {
    pub upstream: UpstreamState,
    pub reference: ReferenceState,
    /// Largest `|phi3|` accepted.
    pub radius: f64,
    pub newton: NewtonOptions,
}

pub const DEFAULT_G_MAP_RADIUS: f64 = 0.1;

impl ShockBoundary {
    pub fn new(upstream: UpstreamState, bg: &ShockLocusPoint) -> Result<Self> {
        Ok(Self {
            upstream,
            reference: ReferenceState::from_background(&upstream.eos, bg)?,
            radius: DEFAULT_G_MAP_RADIUS,
            newton: NewtonOptions::default(),
        })
    }

    pub fn with_radius(mut self, radius: f64) -> Self {
        self.radius = radius;
        self
    }

    /// Residuals `(K1, K2)` and their `(phi1, phi2, phi3)` partials.
    pub fn residuals(&self, phi: DiagonalState) -> Result<([f64; 2], [[f64; 3]; 2])> {
        let (nu, s, u) = self.reference.physical(phi);
        let (j1, j2) = rh_residuals(&self.upstream, nu, s, u)?;
        let d = rh_jacobian(&self.upstream, nu, s)?;
        let lb = self.reference.lambda_b;
        let w = self.reference.entropy_weight();
        // d(nu, s, u)/d(phi1, phi2, phi3)
        let dmap = [[-0.5 / lb, w, -0.5 / lb], [0.0, 1.0, 0.0], [-0.5, 0.0, 0.5]];
        let mut k = [[0.0; 3]; 2];
        for (row, drow) in k.iter_mut().zip(d.iter()) {
            for (col, entry) in row.iter_mut().enumerate() {
                *entry = (0..3).map(|m| drow[m] * dmap[m][col]).sum();
            }
        }
        Ok(([j1, j2], k))
    }

    /// `(G1(phi3), G2(phi3))` by Newton from `guess` (the background is `(0, 0)`).
    pub fn solve(&self, phi3: f64, guess: (f64, f64)) -> Result<GMapSolution> {
        if !(phi3.abs() <= self.radius) {
            return Err(Error::ShockBoundary(format!(
                "|phi3| = {} exceeds the shock boundary radius {}",
                phi3.abs(),
                self.radius
            )));
        }
        let eval = |x: [f64; 2]| -> Result<Eval2> {
            let (r, k) = self.residuals(DiagonalState::new(x[0], x[1], phi3))?;
            Ok((r, [[k[0][0], k[0][1]], [k[1][0], k[1][1]]]))
        };
        let ([phi1, phi2], iterations) = newton2(eval, [guess.0, guess.1], self.newton)?;
        let (_, k) = self.residuals(DiagonalState::new(phi1, phi2, phi3))?;
        let det = k[0][0] * k[1][1] - k[0][1] * k[1][0];
        let dphi1 = -(k[1][1] * k[0][2] - k[0][1] * k[1][2]) / det;
        let dphi2 = -(-k[1][0] * k[0][2] + k[0][0] * k[1][2]) / det;
        Ok(GMapSolution { phi1, phi2, dphi1, dphi2, iterations })
    }
}

/// `(G1(phi3), G2(phi3))` for the background `bg`, solved from `(0, 0)`.
pub fn g_maps(up: &UpstreamState, bg: &ShockLocusPoint, phi3: f64) -> Result<(f64, f64)> {
    let sol = ShockBoundary::new(*up, bg)?.solve(phi3, (0.0, 0.0))?;
    Ok((sol.phi1, sol.phi2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn canonical() -> UpstreamState {
        UpstreamState::new(EosParams::new(1.4).unwrap(), 2.0, 1.0).unwrap()
    }

    #[test]
    fn upstream_hypotheses() {
        let eos = EosParams::new(1.4).unwrap();
        assert!(UpstreamState::new(eos, 1.5, 1.0).is_err());
        assert!(UpstreamState::new(eos, 2.0, 0.0).is_err());
        let up = canonical();
        assert_relative_eq!(up.s0, 1.4 * 2f64.ln(), epsilon = 1e-15);
        assert_relative_eq!(up.c0, (1.4f64 * 0.5).sqrt(), epsilon = 1e-15);
        assert_relative_eq!(up.p0_term(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn residuals_vanish_on_constructed_point() {
        let up = canonical();
        let pt = solve_downstream_closed_form(&up, 0.7).unwrap();
        let (j1, j2) = rh_residuals(&up, pt.nu, pt.s, pt.u).unwrap();
        assert!(j1.abs() < 1e-12 && j2.abs() < 1e-12, "{j1} {j2}");
        let (j1b, _) = rh_residuals(&up, pt.nu, pt.s, pt.u + 0.1).unwrap();
        assert_relative_eq!(j1b - j1, 0.1, epsilon = 1e-14);
    }

    #[test]
    fn energy_residual_nonzero_off_locus() {
        let up = canonical();
        // nu = 0.9, s = s0, u = 0: J2 = 0.5 e^{s0} (2.4*2.9 - 8.4 - 2.52) + (6 - 0.45)
        let es0 = 2f64.powf(1.4);
        let expected = 0.5 * es0 * (2.4 * 2.9 - 8.4 - 1.4 * 0.9 * 2.0) + (6.0 - 0.45);
        let (_, j2) = rh_residuals(&up, 0.9, up.s0, 0.0).unwrap();
        assert_relative_eq!(j2, expected, epsilon = 1e-12);
        assert!(j2.abs() > 1e-3);
    }

    #[test]
    fn rejects_points_off_the_lower_branch() {
        let up = canonical();
        assert!(rh_residuals(&up, 1.2, 0.0, 0.0).is_err());
        assert!(solve_downstream(&up, 0.0).is_err());
        // tiny entropy makes the pressure jump negative
        assert!(matches!(rh_residuals(&up, 0.9, -5.0, 0.0), Err(Error::Locus(_))));
    }

    #[test]
    fn newton_matches_elimination() {
        let up = canonical();
        for nu in [0.05, 0.3, 0.6, 0.9, 0.999] {
            let a = solve_downstream(&up, nu).unwrap();
            let b = solve_downstream_closed_form(&up, nu).unwrap();
            assert!((a.s - b.s).abs() < 1e-10);
            assert!((a.u - b.u).abs() < 1e-10);
            assert!((a.sigma - b.sigma).abs() < 1e-10);
        }
    }

    #[test]
    fn weak_shock_limit_is_sonic() {
        let up = canonical();
        let pt = locus_point_extended(&up, up.nu0 - 1e-6).unwrap();
        assert!((pt.sigma - up.c0).abs() < 1e-3, "{} vs {}", pt.sigma, up.c0);
    }

    #[test]
    fn window_and_inverse() {
        let up = canonical();
        let w = admissible_window(&up).unwrap();
        assert!(w.u1 < w.u_o);
        assert_relative_eq!(w.u1, 1.75f64.sqrt(), epsilon = 1e-12);
        assert!(w.u_o_error < 1e-6);
        let mid = 0.5 * (w.u1 + w.u_o);
        let bg = solve_from_piston_speed(&up, mid).unwrap();
        assert!((bg.u - mid).abs() < 1e-10);
        assert!(bg.sigma > up.c0);
        assert!(lax_check(&up, &bg, 0.0));

        let target = solve_downstream(&up, 0.42).unwrap();
        let back = solve_from_piston_speed(&up, target.u).unwrap();
        assert!((back.nu - 0.42).abs() < 1e-8);

        assert!(matches!(solve_from_piston_speed(&up, w.u1 - 0.01), Err(Error::Admissibility(_))));
        assert!(matches!(solve_from_piston_speed(&up, w.u_o + 0.01), Err(Error::Admissibility(_))));
    }

    #[test]
    fn window_with_a_locus_pole_is_unbounded() {
        // nu0 > g/(g-1): the energy relation blows up before nu reaches 0
        let up = UpstreamState::new(EosParams::new(3.0).unwrap(), 1.8, 1.0).unwrap();
        let w = admissible_window(&up).unwrap();
        assert!(w.u_o.is_infinite() && w.nu_floor > 0.0);
        let bg = solve_from_piston_speed(&up, 5.0 * w.u1).unwrap();
        assert!(bg.nu > w.nu_floor && (bg.u - 5.0 * w.u1).abs() < 1e-9);
    }

    #[test]
    fn lax_rejects_artificial_speeds() {
        let up = canonical();
        let mut pt = solve_downstream(&up, 0.5).unwrap();
        assert!(lax_check(&up, &pt, 1e-12));
        let cd = up.eos.sound_speed(ThermoPoint::new(pt.nu, pt.s).unwrap()).unwrap();
        pt.sigma = up.c0 / 2.0;
        assert!(!lax_check(&up, &pt, 0.0));
        pt.sigma = 2.0 * cd;
        assert!(!lax_check(&up, &pt, 0.0));
    }

    #[test]
    fn boundary_map_identities() {
        let up = canonical();
        let bg = solve_from_piston_speed(&up, 2.0).unwrap();
        let m = boundary_maps(&up, &bg).unwrap();
        assert!(m.det_k > 0.0 && m.h10.abs() < 1.0);
        assert_relative_eq!(m.h20 * m.det_k, m.k21, epsilon = 1e-14);
        assert_relative_eq!(m.k11_tilde - m.k11, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn g_maps_at_zero_and_slopes() {
        let up = canonical();
        let bg = solve_from_piston_speed(&up, 2.0).unwrap();
        let (g1, g2) = g_maps(&up, &bg, 0.0).unwrap();
        assert!(g1.abs() < 1e-12 && g2.abs() < 1e-12);
        let m = boundary_maps(&up, &bg).unwrap();
        let h = 1e-5;
        let (a1, a2) = g_maps(&up, &bg, h).unwrap();
        let (b1, b2) = g_maps(&up, &bg, -h).unwrap();
        assert!(((a1 - b1) / (2.0 * h) - m.h10).abs() < 1e-6);
        assert!(((a2 - b2) / (2.0 * h) - m.h20).abs() < 1e-6);

        let sb = ShockBoundary::new(up, &bg).unwrap();
        let sol = sb.solve(0.0, (0.0, 0.0)).unwrap();
        assert!((sol.dphi1 - m.h10).abs() < 1e-10 && (sol.dphi2 - m.h20).abs() < 1e-10);
        assert!(sb.solve(0.2, (0.0, 0.0)).is_err());
    }
}

//! Diagonal (Riemann-invariant) coordinates about the background shock state.
//!
//! With `lb = sqrt(g e^{s_i})` and `k = (g+1)/g - nu_i`, the perturbation
//! `(dnu, ds, du)` maps to
//!
//! ```text
//! phi1 = -lb dnu + lb k ds - du
//! phi2 =                ds
//! phi3 = -lb dnu + lb k ds + du
//! ```
//!
//! The rows are left eigenvectors of the reduced system's coefficient matrix
//! at the background, so the linear part of the system decouples into
//! transport along `-lb`, `0` and `+lb`.

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::eos::EosParams;
use crate::error::{Error, Result};
use crate::hugoniot::{BoundaryMaps, ShockLocusPoint};

/// Background state about which perturbations are measured.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceState {
    pub gamma: f64,
    pub nu_i: f64,
    pub s_i: f64,
    pub u_i: f64,
    pub lambda_b: f64,
}

/// Physical perturbation `(nu - nu_i, s - s_i, u - u_i)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Perturbation {
    pub nu: f64,
    pub s: f64,
    pub u: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DiagonalState {
    pub phi1: f64,
    pub phi2: f64,
    pub phi3: f64,
}

impl DiagonalState {
    pub const ZERO: DiagonalState = DiagonalState { phi1: 0.0, phi2: 0.0, phi3: 0.0 };

    pub fn new(phi1: f64, phi2: f64, phi3: f64) -> Self {
        Self { phi1, phi2, phi3 }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.phi1, self.phi2, self.phi3]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn max_abs(&self) -> f64 {
        self.phi1.abs().max(self.phi2.abs()).max(self.phi3.abs())
    }
}

impl ReferenceState {
    /// Builds the reference state from a background locus point on the lower branch.
    pub fn from_background(eos: &EosParams, bg: &ShockLocusPoint) -> Result<Self> {
        let g = eos.gamma();
        if !(bg.nu > 0.0 && bg.nu < 1.0) {
            return Err(Error::Hypothesis(format!(
                "background specific volume must lie in (0, 1), got {}",
                bg.nu
            )));
        }
        let s_i = (bg.p / (g + 1.0 - g * bg.nu)).ln();
        Ok(Self {
            gamma: g,
            nu_i: bg.nu,
            s_i,
            u_i: bg.u,
            lambda_b: (g * s_i.exp()).sqrt(),
        })
    }

    /// `(g+1)/g - nu_i`, the entropy weight in the diagonal rows.
    pub fn entropy_weight(&self) -> f64 {
        (self.gamma + 1.0) / self.gamma - self.nu_i
    }

    pub fn to_diagonal(&self, d: Perturbation) -> DiagonalState {
        let lb = self.lambda_b;
        let common = -lb * d.nu + lb * self.entropy_weight() * d.s;
        DiagonalState::new(common - d.u, d.s, common + d.u)
    }

    pub fn from_diagonal(&self, phi: DiagonalState) -> Perturbation {
        Perturbation {
            nu: -(phi.phi1 + phi.phi3) / (2.0 * self.lambda_b) + self.entropy_weight() * phi.phi2,
            s: phi.phi2,
            u: 0.5 * (phi.phi3 - phi.phi1),
        }
    }

    /// Absolute `(nu, s, u)` for diagonal coordinates `phi`.
    pub fn physical(&self, phi: DiagonalState) -> (f64, f64, f64) {
        let d = self.from_diagonal(phi);
        (d.nu + self.nu_i, d.s + self.s_i, d.u + self.u_i)
    }

    pub fn eigenvalues(&self, phi2: f64) -> [f64; 3] {
        let c = (self.gamma * (phi2 + self.s_i).exp()).sqrt();
        [-c, 0.0, c]
    }

    /// Coupling coefficients `(b2, b3)` of the left eigenvectors
    /// `l1 = (1, b2, b3)` and `l3 = (b3, b2, 1)`.
    pub fn coupling_coeffs(&self, phi: DiagonalState) -> (f64, f64) {
        let g = self.gamma;
        let c = (g * (phi.phi2 + self.s_i).exp()).sqrt();
        let lb = self.lambda_b;
        let b2 = (c * (phi.phi1 + phi.phi3)
            - 2.0 * self.s_i.exp().sqrt() * (phi.phi2 + self.s_i).exp().sqrt() * ((g + 1.0) - g * self.nu_i) * phi.phi2)
            / (c + lb);
        let b3 = (c - lb) / (c + lb);
        (b2, b3)
    }

    pub fn l_matrix(&self) -> Matrix3<f64> {
        let lb = self.lambda_b;
        let w = lb * self.entropy_weight();
        Matrix3::new(-lb, w, -1.0, 0.0, 1.0, 0.0, -lb, w, 1.0)
    }

    /// Numerical inverse of [`Self::l_matrix`].
    pub fn l_inverse(&self) -> Matrix3<f64> {
        self.l_matrix()
            .try_inverse()
            .expect("L is invertible whenever lambda_b > 0")
    }

    /// Coefficient matrix of the reduced system in `(nu, s, u)` at the state `phi`.
    pub fn lambda_bar(&self, phi: DiagonalState) -> Matrix3<f64> {
        let g = self.gamma;
        let (nu, s, _) = self.physical(phi);
        let es = s.exp();
        Matrix3::new(0.0, 0.0, -1.0, 0.0, 0.0, 0.0, -g * es, (g + 1.0) * es - g * es * nu, 0.0)
    }

    /// `L * lambda_bar(phi) * L^-1`, assembled numerically.
    pub fn lambda_matrix(&self, phi: DiagonalState) -> Matrix3<f64> {
        self.l_matrix() * self.lambda_bar(phi) * self.l_inverse()
    }
}

/// Scale factors for the diagonal variables, `phi_hat = (phi1/alpha, beta phi2, phi3)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingParams {
    pub alpha: f64,
    pub beta: f64,
    /// Set when `beta` hit the configured cap because `h20` vanished.
    pub beta_capped: bool,
}

pub const DEFAULT_BETA_MAX: f64 = 1e6;

impl ScalingParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) {
            return Err(Error::Domain(format!("scale factors must be positive, got alpha={alpha}, beta={beta}")));
        }
        Ok(Self { alpha, beta, beta_capped: false })
    }

    pub fn scale(&self, phi: DiagonalState) -> DiagonalState {
        DiagonalState::new(phi.phi1 / self.alpha, self.beta * phi.phi2, phi.phi3)
    }

    pub fn unscale(&self, hat: DiagonalState) -> DiagonalState {
        DiagonalState::new(self.alpha * hat.phi1, hat.phi2 / self.beta, hat.phi3)
    }

    /// Whether `|h10| < alpha < 1` and `0 < beta |h20| < 1`.
    pub fn satisfies(&self, maps: &BoundaryMaps) -> bool {
        maps.h10.abs() < self.alpha && self.alpha < 1.0 && self.beta > 0.0 && self.beta * maps.h20.abs() < 1.0
    }
}

/// Midpoint of the admissible `alpha` interval and half the `beta` bound.
pub fn choose_scaling(maps: &BoundaryMaps, beta_max: f64) -> Result<ScalingParams> {
    let h1 = maps.h10.abs();
    if !(h1 < 1.0) {
        return Err(Error::Hypothesis(format!("|h10| = {h1} is not below 1")));
    }
    let alpha = 0.5 * (h1 + 1.0);
    let h2 = maps.h20.abs();
    let uncapped = if h2 > 0.0 { 0.5 / h2 } else { f64::INFINITY };
    let beta_capped = !(uncapped <= beta_max);
    let beta = if beta_capped { beta_max } else { uncapped };
    Ok(ScalingParams { alpha, beta, beta_capped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn reference() -> ReferenceState {
        let g: f64 = 1.4;
        let s_i: f64 = 1.1;
        ReferenceState { gamma: g, nu_i: 0.6, s_i, u_i: 2.0, lambda_b: (g * s_i.exp()).sqrt() }
    }

    fn maps(h10: f64, h20: f64) -> BoundaryMaps {
        BoundaryMaps { h10, h20, k11: 0.0, k12: 0.0, k21: 0.0, k22: 0.0, k11_tilde: 0.0, det_k: 1.0 }
    }

    #[test]
    fn to_diagonal_reads_off_columns() {
        let r = reference();
        assert_eq!(r.to_diagonal(Perturbation::default()), DiagonalState::ZERO);
        assert_eq!(r.to_diagonal(Perturbation { nu: 0.0, s: 0.0, u: 1.0 }), DiagonalState::new(-1.0, 0.0, 1.0));
        let lb = r.lambda_b;
        assert_eq!(r.to_diagonal(Perturbation { nu: 1.0, s: 0.0, u: 0.0 }), DiagonalState::new(-lb, 0.0, -lb));
    }

    #[test]
    fn from_diagonal_examples() {
        let r = reference();
        assert_eq!(r.physical(DiagonalState::ZERO), (r.nu_i, r.s_i, r.u_i));
        let d = r.from_diagonal(DiagonalState::new(0.0, 1.0, 0.0));
        assert_relative_eq!(d.nu, (r.gamma + 1.0) / r.gamma - r.nu_i, epsilon = 1e-15);
        assert_eq!(d.s, 1.0);
        assert_eq!(d.u, 0.0);
    }

    #[test]
    fn eigenvalue_examples() {
        let r = reference();
        assert_eq!(r.eigenvalues(0.0), [-r.lambda_b, 0.0, r.lambda_b]);
        let l = r.eigenvalues(2.0 * 2f64.ln());
        assert_relative_eq!(l[2], 2.0 * r.lambda_b, epsilon = 1e-14);
        for phi2 in [-0.3, 0.0, 0.7] {
            let l = r.eigenvalues(phi2);
            assert_eq!(l[2], -l[0]);
            assert!(l[0] < 0.0 && 0.0 < l[2]);
        }
    }

    #[test]
    fn coupling_vanishes_at_background_and_b3_ignores_outer_components() {
        let r = reference();
        assert_eq!(r.coupling_coeffs(DiagonalState::ZERO), (0.0, 0.0));
        let (_, b3a) = r.coupling_coeffs(DiagonalState::new(0.05, 0.02, -0.03));
        let (_, b3b) = r.coupling_coeffs(DiagonalState::new(-0.07, 0.02, 0.09));
        assert_eq!(b3a, b3b);
    }

    #[test]
    fn b2_is_lipschitz_near_zero() {
        let r = reference();
        let mut c_max: f64 = 0.0;
        for i in 0..200 {
            let t = i as f64 * 0.37;
            let phi = DiagonalState::new(0.1 * t.sin(), 0.1 * (1.3 * t).cos(), 0.1 * (0.7 * t).sin());
            let norm = phi.max_abs();
            if norm > 0.0 {
                c_max = c_max.max(r.coupling_coeffs(phi).0.abs() / norm);
            }
        }
        // l1-norm of the finite-difference gradient at 0 bounds the linear part
        let h = 1e-7;
        let grad: f64 = (0..3)
            .map(|k| {
                let mut e = [0.0; 3];
                e[k] = h;
                let plus = r.coupling_coeffs(DiagonalState::from_array(e)).0;
                e[k] = -h;
                let minus = r.coupling_coeffs(DiagonalState::from_array(e)).0;
                ((plus - minus) / (2.0 * h)).abs()
            })
            .sum();
        assert!(c_max > 0.0 && c_max < 1.25 * grad, "{c_max} vs {grad}");
    }

    #[test]
    fn diagonalizes_background_matrix() {
        let r = reference();
        let d = r.lambda_matrix(DiagonalState::ZERO);
        let l = r.eigenvalues(0.0);
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { l[i] } else { 0.0 };
                assert!((d[(i, j)] - expected).abs() < 1e-12, "({i},{j}) = {}", d[(i, j)]);
            }
        }
    }

    #[test]
    fn scaling_examples() {
        let s = ScalingParams::new(0.5, 2.0).unwrap();
        let hat = s.scale(DiagonalState::new(1.0, 1.0, 1.0));
        assert_eq!(hat, DiagonalState::new(2.0, 2.0, 1.0));
        assert_eq!(s.unscale(hat), DiagonalState::new(1.0, 1.0, 1.0));

        let chosen = choose_scaling(&maps(0.5, 4.0), DEFAULT_BETA_MAX).unwrap();
        assert_eq!(chosen.alpha, 0.75);
        assert_eq!(chosen.beta, 0.125);
        assert!(chosen.satisfies(&maps(0.5, 4.0)));
        assert!(chosen.beta * 4.0 < 1.0 && 0.5 / chosen.alpha < 1.0);
    }

    #[test]
    fn degenerate_h20_caps_beta() {
        let chosen = choose_scaling(&maps(0.2, 0.0), DEFAULT_BETA_MAX).unwrap();
        assert_eq!(chosen.beta, DEFAULT_BETA_MAX);
        assert!(chosen.beta_capped);
        assert!(choose_scaling(&maps(1.0, 0.1), DEFAULT_BETA_MAX).is_err());
    }
}

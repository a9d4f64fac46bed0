//! Piecewise equation of state.
//!
//! Internal energy and pressure are written in terms of the specific volume
//! `nu` and the specific entropy `s`:
//!
//! ```text
//!            e^s nu^(1-g) / (g-1)                              nu >= 1
//! e(nu,s) =
//!            (g/2) e^s nu^2 - (g+1) e^s nu + (g^2+g) e^s/(2(g-1))   nu < 1
//!
//!            e^s nu^(-g)                                       nu >= 1
//! p(nu,s) =
//!            (g+1) e^s - g e^s nu                               nu < 1
//! ```
//!
//! with temperature `T = e`. Both branches and their first `nu`-derivatives
//! meet at `nu = 1`, and `de = T ds - p dnu` holds on each branch.
//!
//! Every quantity is a function of `(nu, s)`; `p` and `T` are never stored.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EosParams {
    gamma: f64,
}

impl EosParams {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 1.0) {
            return Err(Error::config("gamma", format!("adiabatic exponent must satisfy gamma > 1, got {gamma}")));
        }
        Ok(Self { gamma })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermoPoint {
    pub nu: f64,
    pub s: f64,
}

impl ThermoPoint {
    pub fn new(nu: f64, s: f64) -> Result<Self> {
        check_volume(nu)?;
        Ok(Self { nu, s })
    }
}

/// Which half of the piecewise law a specific volume falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `nu >= 1`, the polytropic branch.
    Upper,
    /// `nu < 1`, the quadratic branch.
    Lower,
}

impl Branch {
    /// `nu = 1` belongs to the upper branch.
    pub fn of(nu: f64) -> Self {
        if nu >= 1.0 {
            Branch::Upper
        } else {
            Branch::Lower
        }
    }
}

fn check_volume(nu: f64) -> Result<()> {
    if nu.is_finite() && nu > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("specific volume must be positive, got {nu}")))
    }
}

impl EosParams {
    /// `e / e^s` on the given branch, without any domain check.
    pub fn energy_shape(&self, branch: Branch, nu: f64) -> f64 {
        let g = self.gamma;
        match branch {
            Branch::Upper => nu.powf(1.0 - g) / (g - 1.0),
            Branch::Lower => 0.5 * g * nu * nu - (g + 1.0) * nu + (g * g + g) / (2.0 * (g - 1.0)),
        }
    }

    /// `p / e^s` on the given branch, without any domain check.
    pub fn pressure_shape(&self, branch: Branch, nu: f64) -> f64 {
        let g = self.gamma;
        match branch {
            Branch::Upper => nu.powf(-g),
            Branch::Lower => (g + 1.0) - g * nu,
        }
    }

    /// `p_nu / e^s` on the given branch, without any domain check.
    pub fn slope_shape(&self, branch: Branch, nu: f64) -> f64 {
        let g = self.gamma;
        match branch {
            Branch::Upper => -g * nu.powf(-g - 1.0),
            Branch::Lower => -g,
        }
    }

    pub fn internal_energy(&self, pt: ThermoPoint) -> Result<f64> {
        check_volume(pt.nu)?;
        Ok(pt.s.exp() * self.energy_shape(Branch::of(pt.nu), pt.nu))
    }

    pub fn pressure(&self, pt: ThermoPoint) -> Result<f64> {
        check_volume(pt.nu)?;
        Ok(pt.s.exp() * self.pressure_shape(Branch::of(pt.nu), pt.nu))
    }

    /// Temperature; identical to the internal energy for this model.
    pub fn temperature(&self, pt: ThermoPoint) -> Result<f64> {
        self.internal_energy(pt)
    }

    pub fn dp_dnu(&self, pt: ThermoPoint) -> Result<f64> {
        check_volume(pt.nu)?;
        Ok(pt.s.exp() * self.slope_shape(Branch::of(pt.nu), pt.nu))
    }

    /// Lagrangian sound speed `sqrt(-p_nu)`.
    pub fn sound_speed(&self, pt: ThermoPoint) -> Result<f64> {
        Ok((-self.dp_dnu(pt)?).sqrt())
    }

    /// Inverts the pressure law on the branch selected by `nu`.
    pub fn entropy_from_pressure(&self, nu: f64, p: f64) -> Result<f64> {
        check_volume(nu)?;
        let shape = self.pressure_shape(Branch::of(nu), nu);
        if !(p > 0.0) || !(shape > 0.0) {
            return Err(Error::Domain(format!(
                "no entropy reproduces p = {p} at nu = {nu} (pressure shape {shape})"
            )));
        }
        Ok((p / shape).ln())
    }
}

use serde::{Deserialize, Serialize};

use crate::eos::EosParams;
use crate::error::{Error, Result};
use crate::hugoniot::{admissible_window, UpstreamState};

/// Everything a run needs. All quantities are nondimensional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub gamma: f64,
    pub nu0: f64,
    pub p0: f64,
    /// Background piston speed `b0`.
    pub u_iota: f64,
    /// Reaction rate.
    pub kappa: f64,
    /// Binding energy per unit mass of unburnt gas.
    pub hbar: f64,
    pub ignition_temperature: f64,
    /// Amplitude of the piston perturbation, `B'(t) = b0 + epsilon g(t)`.
    pub epsilon: f64,
    pub piston: PistonProfile,
    #[serde(default)]
    pub ignition: IgnitionModel,
    pub n_cells: usize,
    pub cfl: f64,
    pub t_end: f64,
    #[serde(default)]
    pub numerics: Numerics,
}

/// Shape `g(t)` of the piston perturbation; every profile has `g(0) = 0`
/// and `max(sup|g|, sup|g'|) <= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case", deny_unknown_fields)]
pub enum PistonProfile {
    Constant,
    /// `g(t) = tanh(t)`.
    Tanh,
    /// One period of `(1 - cos(2 pi t / period)) / 2`, zero afterwards.
    RaisedCosine { period: f64 },
    /// `g(t) = min(t, corner)`: Lipschitz but not C1.
    Kink { corner: f64 },
}

impl PistonProfile {
    pub fn g(&self, t: f64) -> f64 {
        match *self {
            PistonProfile::Constant => 0.0,
            PistonProfile::Tanh => t.tanh(),
            PistonProfile::RaisedCosine { period } => {
                if t < period {
                    0.5 * (1.0 - (std::f64::consts::TAU * t / period).cos())
                } else {
                    0.0
                }
            }
            PistonProfile::Kink { corner } => t.min(corner),
        }
    }

    pub fn dg(&self, t: f64) -> f64 {
        match *self {
            PistonProfile::Constant => 0.0,
            PistonProfile::Tanh => 1.0 - t.tanh().powi(2),
            PistonProfile::RaisedCosine { period } => {
                if t < period {
                    std::f64::consts::PI / period * (std::f64::consts::TAU * t / period).sin()
                } else {
                    0.0
                }
            }
            PistonProfile::Kink { corner } => {
                if t < corner {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            PistonProfile::RaisedCosine { period } if !(period >= std::f64::consts::PI) => Err(Error::config(
                "piston.period",
                format!("raised-cosine period must be at least pi so that |g'| <= 1, got {period}"),
            )),
            PistonProfile::Kink { corner } if !(corner > 0.0 && corner <= 1.0) => Err(Error::config(
                "piston.corner",
                format!("kink corner must lie in (0, 1] so that |g| <= 1, got {corner}"),
            )),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum IgnitionModel {
    /// `psi = 1` above the ignition temperature, 0 otherwise.
    #[default]
    Step,
    /// `psi = T^exponent exp(-activation / (T - T_i))` above the ignition temperature.
    Arrhenius { exponent: f64, activation: f64 },
}

impl IgnitionModel {
    pub fn psi(&self, temperature: f64, ignition_temperature: f64) -> f64 {
        if temperature <= ignition_temperature {
            return 0.0;
        }
        match *self {
            IgnitionModel::Step => 1.0,
            IgnitionModel::Arrhenius { exponent, activation } => {
                temperature.powf(exponent) * (-activation / (temperature - ignition_temperature)).exp()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeOrder {
    #[default]
    First,
    /// Minmod-limited second-order upwinding.
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    #[default]
    MonotoneCubic,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Numerics {
    pub order: SchemeOrder,
    pub interpolation: Interpolation,
    /// Width of the initial seed interval, in time units.
    pub seed_time: f64,
    pub snapshot_interval: f64,
    pub g_map_radius: f64,
    pub beta_max: f64,
    /// Lagrangian tracer particles used to cross-check the burnt fraction.
    pub n_tracers: usize,
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            order: SchemeOrder::First,
            interpolation: Interpolation::MonotoneCubic,
            seed_time: 1e-4,
            snapshot_interval: 1.0,
            g_map_radius: crate::hugoniot::DEFAULT_G_MAP_RADIUS,
            beta_max: crate::riemann_transform::DEFAULT_BETA_MAX,
            n_tracers: 16,
        }
    }
}

fn positive(field: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::config(field, format!("must be positive, got {value}")))
    }
}

impl ScenarioConfig {
    pub fn upstream(&self) -> Result<UpstreamState> {
        UpstreamState::new(EosParams::new(self.gamma)?, self.nu0, self.p0)
    }

    /// `B'(t) - b0`.
    pub fn piston_offset(&self, t: f64) -> f64 {
        self.epsilon * self.piston.g(t)
    }

    /// `B''(t)`.
    pub fn piston_acceleration(&self, t: f64) -> f64 {
        self.epsilon * self.piston.dg(t)
    }

    /// Checks every invariant, naming the offending field.
    pub fn validate(&self) -> Result<()> {
        let up = self.upstream()?;
        let window = admissible_window(&up)?;
        if !window.contains(self.u_iota) {
            return Err(Error::config(
                "u_iota",
                format!(
                    "background piston speed must lie in the admissible window ({:.6}, {:.6}) so that the downstream volume is below 1, got {}",
                    window.u1, window.u_o, self.u_iota
                ),
            ));
        }
        positive("kappa", self.kappa)?;
        if !(self.hbar.is_finite() && self.hbar >= 0.0) {
            return Err(Error::config("hbar", format!("binding energy must be non-negative, got {}", self.hbar)));
        }
        positive("ignition_temperature", self.ignition_temperature)?;
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(Error::config("epsilon", format!("amplitude must be >= 0, got {}", self.epsilon)));
        }
        self.piston.validate()?;
        if let IgnitionModel::Arrhenius { exponent, activation } = self.ignition {
            if !exponent.is_finite() {
                return Err(Error::config("ignition.exponent", "must be finite"));
            }
            if !(activation.is_finite() && activation >= 0.0) {
                return Err(Error::config("ignition.activation", format!("must be >= 0, got {activation}")));
            }
        }
        let min_cells = match self.numerics.order {
            SchemeOrder::First => 2,
            SchemeOrder::Second => 4,
        };
        if self.n_cells < min_cells {
            return Err(Error::config("n_cells", format!("need at least {min_cells} cells, got {}", self.n_cells)));
        }
        positive("cfl", self.cfl)?;
        positive("t_end", self.t_end)?;
        let n = &self.numerics;
        positive("numerics.seed_time", n.seed_time)?;
        if n.seed_time >= self.t_end {
            return Err(Error::config("numerics.seed_time", "seed interval must end before t_end"));
        }
        positive("numerics.snapshot_interval", n.snapshot_interval)?;
        positive("numerics.g_map_radius", n.g_map_radius)?;
        positive("numerics.beta_max", n.beta_max)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profiles_start_at_zero_and_respect_c1_bound() {
        let profiles = [
            PistonProfile::Constant,
            PistonProfile::Tanh,
            PistonProfile::RaisedCosine { period: 4.0 },
            PistonProfile::Kink { corner: 0.5 },
        ];
        for p in profiles {
            assert_eq!(p.g(0.0), 0.0);
            for i in 0..2000 {
                let t = i as f64 * 0.01;
                assert!(p.g(t).abs() <= 1.0 + 1e-15 && p.dg(t).abs() <= 1.0 + 1e-15, "{p:?} at {t}");
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for p in [PistonProfile::Tanh, PistonProfile::RaisedCosine { period: 5.0 }] {
            for t in [0.3, 1.1, 2.7] {
                let h = 1e-6;
                let fd = (p.g(t + h) - p.g(t - h)) / (2.0 * h);
                assert!((fd - p.dg(t)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn step_and_arrhenius_gates() {
        assert_eq!(IgnitionModel::Step.psi(1.0, 2.0), 0.0);
        assert_eq!(IgnitionModel::Step.psi(2.0, 2.0), 0.0);
        assert_eq!(IgnitionModel::Step.psi(2.5, 2.0), 1.0);
        let a = IgnitionModel::Arrhenius { exponent: 1.0, activation: 0.5 };
        assert_eq!(a.psi(1.5, 2.0), 0.0);
        assert!((a.psi(3.0, 2.0) - 3.0 * (-0.5f64).exp()).abs() < 1e-15);
    }
}

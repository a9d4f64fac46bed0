use serde::{Deserialize, Serialize};

use super::config::Interpolation;
use crate::error::{Error, Result};

/// One recorded shock position `chi(t)` with its speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShockSample {
    pub t: f64,
    pub chi: f64,
    pub chi_prime: f64,
}

/// Shock trajectory, strictly increasing in both `t` and `chi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShockHistory {
    samples: Vec<ShockSample>,
    interpolation: Interpolation,
}

impl ShockHistory {
    pub fn new(interpolation: Interpolation) -> Self {
        Self { samples: Vec::new(), interpolation }
    }

    pub fn samples(&self) -> &[ShockSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn last(&self) -> Option<&ShockSample> {
        self.samples.last()
    }

    pub fn push(&mut self, sample: ShockSample) -> Result<()> {
        if let Some(prev) = self.samples.last() {
            if !(sample.t > prev.t && sample.chi > prev.chi) {
                return Err(Error::StateEscape(format!(
                    "shock trajectory must advance: ({}, {}) follows ({}, {})",
                    sample.t, sample.chi, prev.t, prev.chi
                )));
            }
        }
        self.samples.push(sample);
        Ok(())
    }

    /// Shock position at time `t`.
    pub fn chi_at(&self, t: f64) -> Result<f64> {
        interpolate(&self.samples, |s| s.t, |s| s.chi, t, self.interpolation)
    }

    /// Time at which the shock passed `x`.
    pub fn inverse(&self, x: f64) -> Result<f64> {
        interpolate(&self.samples, |s| s.chi, |s| s.t, x, self.interpolation)
    }

    /// Like [`Self::inverse`], with the trajectory continued linearly to `tail = (t, chi)`.
    /// `tail` beyond the last sample covers positions swept during an unfinished step.
    pub fn inverse_with_tail(&self, x: f64, tail: (f64, f64)) -> Result<f64> {
        let last = self.samples.last().ok_or_else(|| Error::Domain("empty shock history".into()))?;
        if x > last.chi && tail.1 > last.chi {
            if x > tail.1 {
                return Err(Error::Domain(format!("position {x} lies ahead of the shock at {}", tail.1)));
            }
            if x == tail.1 {
                return Ok(tail.0);
            }
            let w = (x - last.chi) / (tail.1 - last.chi);
            return Ok(last.t + w * (tail.0 - last.t));
        }
        self.inverse(x)
    }
}

/// Piecewise interpolation of `y(x)` through samples whose keys increase strictly.
fn interpolate(
    samples: &[ShockSample],
    key: impl Fn(&ShockSample) -> f64,
    val: impl Fn(&ShockSample) -> f64,
    x: f64,
    kind: Interpolation,
) -> Result<f64> {
    let n = samples.len();
    if n == 0 {
        return Err(Error::Domain("empty shock history".into()));
    }
    let (x0, xn) = (key(&samples[0]), key(&samples[n - 1]));
    if !(x >= x0 && x <= xn) {
        return Err(Error::Domain(format!("{x} lies outside the recorded range [{x0}, {xn}]")));
    }
    if n == 1 {
        return Ok(val(&samples[0]));
    }
    // first index with key > x, clamped so that [k, k+1] is a valid interval
    let k = samples.partition_point(|s| key(s) <= x).clamp(1, n - 1) - 1;
    let (xa, xb) = (key(&samples[k]), key(&samples[k + 1]));
    let (ya, yb) = (val(&samples[k]), val(&samples[k + 1]));
    if x == xa {
        return Ok(ya);
    }
    if x == xb {
        return Ok(yb);
    }
    let h = xb - xa;
    let s = (x - xa) / h;
    match kind {
        Interpolation::Linear => Ok(ya + s * (yb - ya)),
        Interpolation::MonotoneCubic => {
            let secant = |i: usize| (val(&samples[i + 1]) - val(&samples[i])) / (key(&samples[i + 1]) - key(&samples[i]));
            let width = |i: usize| key(&samples[i + 1]) - key(&samples[i]);
            let slope = |i: usize| -> f64 {
                if n == 2 {
                    return secant(0);
                }
                if i == 0 {
                    return edge_slope(width(0), width(1), secant(0), secant(1));
                }
                if i == n - 1 {
                    return edge_slope(width(n - 2), width(n - 3), secant(n - 2), secant(n - 3));
                }
                let (d0, d1) = (secant(i - 1), secant(i));
                if d0 * d1 <= 0.0 {
                    return 0.0;
                }
                let (h0, h1) = (width(i - 1), width(i));
                let w1 = 2.0 * h1 + h0;
                let w2 = h1 + 2.0 * h0;
                (w1 + w2) / (w1 / d0 + w2 / d1)
            };
            let (ma, mb) = (slope(k), slope(k + 1));
            let s2 = s * s;
            let s3 = s2 * s;
            let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
            let h10 = s3 - 2.0 * s2 + s;
            let h01 = -2.0 * s3 + 3.0 * s2;
            let h11 = s3 - s2;
            Ok(h00 * ya + h10 * h * ma + h01 * yb + h11 * h * mb)
        }
    }
}

/// Shape-preserving three-point end slope.
fn edge_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if d.signum() != d0.signum() {
        0.0
    } else if d0.signum() != d1.signum() && d.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        d
    }
}

/// Burnt-fraction factor `Z(t, x) = exp(-kappa (t - chi^-1(x)))` for `0 <= x <= chi(t)`.
pub fn z_field(history: &ShockHistory, kappa: f64, t: f64, x: f64) -> Result<f64> {
    let chi = history.chi_at(t)?;
    if !(x >= 0.0 && x <= chi) {
        return Err(Error::Domain(format!("x = {x} is outside the burnt region [0, {chi}]")));
    }
    let crossed = history.inverse(x)?;
    Ok((-kappa * (t - crossed).max(0.0)).exp())
}

//! Cut-off schedules `g(t)` for the low-frequency truncation and their
//! Gronwall weights `exp(2∫₀ᵗ g²)`.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    /// `2g² = (3/T)(e + t/T)^{-1} log^{-1}(e + t/T)`, weight `log³(e + t/T)`.
    LogCube,
    /// `2g² = (1 + δ/2)/T · (e + t/T)^{-1}`, weight
    /// `e^{-(1+δ/2)}(e + t/T)^{1+δ/2}`.
    PolyDelta,
}

impl std::fmt::Display for ScheduleKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ScheduleKind::LogCube => "log_cube",
            ScheduleKind::PolyDelta => "poly_delta",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub kind: ScheduleKind,
    /// Time scale `T`.
    pub t_scale: f64,
    pub delta: f64,
}

impl Schedule {
    pub fn new(kind: ScheduleKind, t_scale: f64, delta: f64) -> Result<Self> {
        if !(t_scale > 0.0 && t_scale.is_finite()) {
            return Err(Error::InvalidArgument(format!("schedule time scale {t_scale} must be > 0")));
        }
        if kind == ScheduleKind::PolyDelta && !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidArgument(format!("delta = {delta} outside (0, 1)")));
        }
        Ok(Schedule { kind, t_scale, delta })
    }

    fn s(&self, t: f64) -> f64 {
        E + t / self.t_scale
    }

    fn power(&self) -> f64 {
        1.0 + 0.5 * self.delta
    }

    /// `g(t)²`.
    pub fn g2(&self, t: f64) -> f64 {
        let s = self.s(t);
        match self.kind {
            ScheduleKind::LogCube => 1.5 / (self.t_scale * s * s.ln()),
            ScheduleKind::PolyDelta => 0.5 * self.power() / (self.t_scale * s),
        }
    }

    /// `2∫₀ᵗ g²` in closed form.
    pub fn log_weight(&self, t: f64) -> f64 {
        let s = self.s(t);
        match self.kind {
            ScheduleKind::LogCube => 3.0 * s.ln().ln(),
            ScheduleKind::PolyDelta => self.power() * (s.ln() - 1.0),
        }
    }

    /// `(g(t), exp(2∫₀ᵗ g²))`.
    pub fn eval(&self, t: f64) -> Result<(f64, f64)> {
        if !(t >= 0.0) {
            return Err(Error::InvalidArgument(format!("schedule evaluated at t = {t} < 0")));
        }
        Ok((self.g2(t).sqrt(), self.log_weight(t).exp()))
    }
}

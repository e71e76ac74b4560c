//! Time-dependent boundary data for the benchmark problems.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::fdops::Vec2;

/// `alpha sin^2(pi t / 4)` for `t < 2`, `alpha` afterwards.
pub fn sin2_ramp(t: f64, alpha: f64) -> f64 {
    if t < 2.0 {
        alpha * (0.25 * PI * t).sin().powi(2)
    } else {
        alpha
    }
}

/// `alpha sin(pi t / 2)` for `t < 2`, zero afterwards.
pub fn sine_pulse_momentum(t: f64, alpha: f64) -> f64 {
    if t < 2.0 {
        alpha * (0.5 * PI * t).sin()
    } else {
        0.0
    }
}

/// Time integral of [`sine_pulse_momentum`] for unit density.
pub fn sine_pulse_displacement(t: f64, alpha: f64) -> f64 {
    let scale = 2.0 * alpha / PI;
    if t < 2.0 {
        scale * (1.0 - (0.5 * PI * t).cos())
    } else {
        2.0 * scale
    }
}

/// Ricker wavelet centred at `t0` with width parameter `s`.
pub fn ricker(t: f64, alpha: f64, s: f64, t0: f64) -> f64 {
    let x2 = (t - t0).powi(2) / s;
    alpha * 2.0 / (3.0 * s * PI.sqrt()).sqrt() * (1.0 - x2) * (-0.5 * x2).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "schedule", rename_all = "snake_case")]
pub enum Schedule {
    Zero,
    Constant { alpha: f64 },
    Sin2Ramp { alpha: f64 },
    SinePulse { alpha: f64 },
    Ricker { alpha: f64, s: f64, t0: f64 },
}

impl Schedule {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            Schedule::Zero => 0.0,
            Schedule::Constant { alpha } => alpha,
            Schedule::Sin2Ramp { alpha } => sin2_ramp(t, alpha),
            Schedule::SinePulse { alpha } => sine_pulse_momentum(t, alpha),
            Schedule::Ricker { alpha, s, t0 } => ricker(t, alpha, s, t0),
        }
    }

    pub fn amplitude(&self) -> f64 {
        match *self {
            Schedule::Zero => 0.0,
            Schedule::Constant { alpha }
            | Schedule::Sin2Ramp { alpha }
            | Schedule::SinePulse { alpha } => alpha,
            Schedule::Ricker { alpha, s, t0 } => ricker(t0, alpha, s, t0),
        }
    }
}

/// Vector-valued boundary load: `schedule(t) * direction`, switched off after
/// `until` when set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Load {
    #[serde(flatten)]
    pub schedule: Schedule,
    #[serde(default = "zero_direction")]
    pub direction: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub until: Option<f64>,
}

fn zero_direction() -> [f64; 2] {
    [0.0, 0.0]
}

impl Load {
    pub fn zero() -> Self {
        Self {
            schedule: Schedule::Zero,
            direction: [0.0, 0.0],
            until: None,
        }
    }

    pub fn new(schedule: Schedule, direction: [f64; 2]) -> Self {
        Self {
            schedule,
            direction,
            until: None,
        }
    }

    pub fn until(mut self, t_end: f64) -> Self {
        self.until = Some(t_end);
        self
    }

    pub fn value(&self, t: f64) -> Vec2 {
        if self.until.is_some_and(|end| t > end) {
            return Vec2::zeros();
        }
        Vec2::new(self.direction[0], self.direction[1]) * self.schedule.value(t)
    }
}

//! Temperature updates.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest relative temperature decrement per update.
pub const MAX_DECREMENT: f64 = 0.01;
const EPSILON: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleKind {
    /// `T ← T (1 - c T Var(E) / (T³ + ε))` from moving averages of `E` and `E²`.
    #[default]
    EntropyMatching,
    /// `T ← (1 - c) T`
    Geometric,
}

impl fmt::Display for ScheduleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScheduleKind::EntropyMatching => "entropy-matching",
            ScheduleKind::Geometric => "geometric",
        })
    }
}

impl FromStr for ScheduleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "entropy-matching" => Ok(ScheduleKind::EntropyMatching),
            "geometric" => Ok(ScheduleKind::Geometric),
            other => Err(Error::invalid(format!("unknown schedule '{other}'"))),
        }
    }
}

/// Running energy statistics and the update rule built on them.
#[derive(Debug, Clone)]
pub struct Schedule {
    kind: ScheduleKind,
    c_speed: f64,
    alpha: f64,
    mean: Option<f64>,
    mean_sq: f64,
}

impl Schedule {
    /// `window` is the moving-average time constant in observations.
    pub fn new(kind: ScheduleKind, c_speed: f64, window: usize) -> Self {
        Schedule { kind, c_speed, alpha: 1.0 / window.max(1) as f64, mean: None, mean_sq: 0.0 }
    }

    pub fn observe(&mut self, e: f64) {
        match self.mean {
            None => {
                self.mean = Some(e);
                self.mean_sq = e * e;
            }
            Some(m) => {
                self.mean = Some(m + self.alpha * (e - m));
                self.mean_sq += self.alpha * (e * e - self.mean_sq);
            }
        }
    }

    pub fn variance(&self) -> f64 {
        self.mean.map_or(0.0, |m| (self.mean_sq - m * m).max(0.0))
    }

    /// Relative decrement the next update applies at temperature `t`.
    pub fn decrement(&self, t: f64) -> f64 {
        let raw = match self.kind {
            ScheduleKind::EntropyMatching => self.c_speed * t * self.variance() / (t * t * t + EPSILON),
            ScheduleKind::Geometric => self.c_speed,
        };
        raw.clamp(0.0, MAX_DECREMENT)
    }

    pub fn next_temperature(&self, t: f64) -> f64 {
        t * (1.0 - self.decrement(t))
    }
}

//! Partition functions, finite-size free energies and their extrapolation.

mod curve;
pub mod density;
pub mod extrapolate;
mod limits;
mod partition;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub use curve::{free_energy_curve, log_growth, FreeEnergy, FreeEnergyCurve};
pub use density::{ln_big, log_sum_exp, LogCell, LogDensity};
pub use extrapolate::{extrapolate, extrapolate_from, Estimate};
pub use limits::LimitCurves;
pub use partition::{evaluate_partition, moment, MomentReport, Observable};

/// Visit fugacity `a` and height fugacity `y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightPoint {
    a: f64,
    y: f64,
    log_a: f64,
    log_y: f64,
}

impl WeightPoint {
    pub fn new(a: f64, y: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite() && y > 0.0 && y.is_finite()) {
            return Err(Error::InvalidWeight(format!("a={a}, y={y}")));
        }
        Ok(Self { a, y, log_a: a.ln(), log_y: y.ln() })
    }

    /// From `u = log a`, `w = log y`.
    pub fn from_logs(u: f64, w: f64) -> Result<Self> {
        if !(u.is_finite() && w.is_finite()) {
            return Err(Error::InvalidWeight(format!("log a={u}, log y={w}")));
        }
        Ok(Self { a: u.exp(), y: w.exp(), log_a: u, log_y: w })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn log_a(&self) -> f64 {
        self.log_a
    }

    pub fn log_y(&self) -> f64 {
        self.log_y
    }
}

/// Which partition sum: all positive walks `C_n(a, y)`, loops `L_n(a)`
/// (`h = 0`) or tails `T_n(y)` (`v = 0`). Applied to an unfolded table these
/// give the unfolded counterparts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PartitionKind {
    C,
    L,
    T,
}

impl fmt::Display for PartitionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PartitionKind::C => "C",
            PartitionKind::L => "L",
            PartitionKind::T => "T",
        })
    }
}

impl FromStr for PartitionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "C" => Ok(PartitionKind::C),
            "L" => Ok(PartitionKind::L),
            "T" => Ok(PartitionKind::T),
            _ => Err(Error::InvalidArgument(format!("unknown partition kind `{s}`"))),
        }
    }
}

/// The default analysis grid `log a = -1 (0.1) 3`.
pub fn default_log_grid() -> Vec<f64> {
    (0..=40).map(|i| -1.0 + 0.1 * i as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_must_be_positive() {
        assert!(WeightPoint::new(0.0, 1.0).is_err());
        assert!(WeightPoint::new(1.0, -2.0).is_err());
        assert!(WeightPoint::new(f64::NAN, 1.0).is_err());
        assert!(WeightPoint::from_logs(f64::INFINITY, 0.0).is_err());
        let w = WeightPoint::from_logs(1.0, -1.0).unwrap();
        assert!((w.a() - std::f64::consts::E).abs() < 1e-15);
    }

    #[test]
    fn default_grid_shape() {
        let g = default_log_grid();
        assert_eq!(g.len(), 41);
        assert_eq!(g[0], -1.0);
        assert!((g[40] - 3.0).abs() < 1e-12);
    }
}

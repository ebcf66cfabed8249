use super::curve::{log_growth, FreeEnergy};
use super::density::LogDensity;
use super::extrapolate::Estimate;
use super::PartitionKind;
use crate::enumerate::WalkClass;
use crate::error::{Error, Result};

/// Extrapolated one-parameter free energies `kappa(a)` (adsorbing loops),
/// `lambda(y)` (pulled tails) and the growth constants they are compared to.
#[derive(Debug, Clone)]
pub struct LimitCurves {
    pub dimension: usize,
    pub adsorbed: FreeEnergy,
    pub pulled: FreeEnergy,
    pub log_mu_d: Estimate,
    pub log_mu_plane: Estimate,
}

impl LimitCurves {
    /// `positive` feeds `kappa`/`lambda`; `full` and `plane` give `log mu_d`
    /// and `log mu_{d-1}`.
    pub fn new(positive: &LogDensity, full: &LogDensity, plane: &LogDensity) -> Result<Self> {
        for (t, want) in [
            (positive, WalkClass::Positive),
            (full, WalkClass::FullLattice),
            (plane, WalkClass::Plane),
        ] {
            if t.class() != want {
                return Err(Error::ClassMismatch { expected: want.to_string(), found: t.class() });
            }
        }
        Ok(Self {
            dimension: positive.dimension(),
            adsorbed: FreeEnergy::new(positive.clone(), PartitionKind::L),
            pulled: FreeEnergy::new(positive.clone(), PartitionKind::T),
            log_mu_d: log_growth(full)?,
            log_mu_plane: log_growth(plane)?,
        })
    }

    pub fn kappa(&self, log_a: f64) -> Result<Estimate> {
        self.adsorbed.limit_at_log_a(log_a)
    }

    pub fn lambda(&self, log_y: f64) -> Result<Estimate> {
        self.pulled.limit_at_log_y(log_y)
    }
}

use super::density::LogDensity;
use super::extrapolate::{extrapolate, Estimate, MIN_POINTS};
use super::partition::evaluate_partition;
use super::{PartitionKind, WeightPoint};
use crate::enumerate::WalkClass;
use crate::error::{Error, Result};

/// Finite-size free energy `(1/n) log Z_n` of one partition kind, evaluated
/// at arbitrary weights, with its extrapolated limit.
#[derive(Debug, Clone)]
pub struct FreeEnergy {
    density: LogDensity,
    kind: PartitionKind,
}

impl FreeEnergy {
    pub fn new(density: LogDensity, kind: PartitionKind) -> Self {
        Self { density, kind }
    }

    pub fn density(&self) -> &LogDensity {
        &self.density
    }

    pub fn kind(&self) -> PartitionKind {
        self.kind
    }

    pub fn n_max(&self) -> usize {
        self.density.n_max()
    }

    pub fn finite(&self, n: usize, w: &WeightPoint) -> Result<f64> {
        if n == 0 {
            return Err(Error::InvalidArgument("free energy needs n >= 1".into()));
        }
        Ok(self.log_partition(n, w)? / n as f64)
    }

    fn log_partition(&self, n: usize, w: &WeightPoint) -> Result<f64> {
        let lz = evaluate_partition(&self.density, w, n, self.kind)?;
        if !lz.is_finite() {
            return Err(Error::EmptyPartition { n });
        }
        Ok(lz)
    }

    /// `(n, (1/n) log Z_n)` for every `1 <= n <= n_max`.
    pub fn sequence(&self, w: &WeightPoint) -> Result<Vec<(usize, f64)>> {
        (1..=self.n_max()).map(|n| Ok((n, self.finite(n, w)?))).collect()
    }

    /// Successive log-ratios `log Z_n - log Z_{n-1}` for `1 <= n <= n_max`
    /// (with `Z_0 = 1`). They share the limit of `(1/n) log Z_n`, but a
    /// power-law prefactor `n^g` only enters them at order `1/n`.
    pub fn log_ratios(&self, w: &WeightPoint) -> Result<Vec<(usize, f64)>> {
        let mut prev = 0.0;
        (1..=self.n_max())
            .map(|n| {
                let lz = self.log_partition(n, w)?;
                let r = lz - prev;
                prev = lz;
                Ok((n, r))
            })
            .collect()
    }

    /// Extrapolated limit of `(1/n) log Z_n`, fitted on the log-ratios.
    pub fn limit(&self, w: &WeightPoint) -> Result<Estimate> {
        extrapolate(&self.log_ratios(w)?)
    }

    /// Limit as a function of `log a` alone (`log y = 0`).
    pub fn limit_at_log_a(&self, u: f64) -> Result<Estimate> {
        self.limit(&WeightPoint::from_logs(u, 0.0)?)
    }

    /// Limit as a function of `log y` alone (`log a = 0`).
    pub fn limit_at_log_y(&self, w: f64) -> Result<Estimate> {
        self.limit(&WeightPoint::from_logs(0.0, w)?)
    }
}

/// Free energies of one kind on a grid of weights, for every length.
#[derive(Debug, Clone)]
pub struct FreeEnergyCurve {
    pub class: WalkClass,
    pub kind: PartitionKind,
    pub grid: Vec<WeightPoint>,
    /// `values[n - 1][g]` is `(1/n) log Z_n(grid[g])`.
    pub values: Vec<Vec<f64>>,
    /// Extrapolated limits; `None` when fewer than six lengths are available.
    pub limit: Vec<Option<Estimate>>,
}

impl FreeEnergyCurve {
    pub fn n_max(&self) -> usize {
        self.values.len()
    }

    pub fn at(&self, n: usize) -> &[f64] {
        &self.values[n - 1]
    }
}

pub fn free_energy_curve(density: &LogDensity, grid: &[WeightPoint], kind: PartitionKind) -> Result<FreeEnergyCurve> {
    if density.n_max() < 4 {
        return Err(Error::TooFewPoints { needed: 4, got: density.n_max() });
    }
    let fe = FreeEnergy::new(density.clone(), kind);
    let mut values = vec![Vec::with_capacity(grid.len()); density.n_max()];
    let mut limit = Vec::with_capacity(grid.len());
    for w in grid {
        for (n, v) in fe.sequence(w)? {
            values[n - 1].push(v);
        }
        limit.push(if density.n_max() >= MIN_POINTS { Some(fe.limit(w)?) } else { None });
    }
    Ok(FreeEnergyCurve { class: density.class(), kind, grid: grid.to_vec(), values, limit })
}

/// Extrapolated `log mu` from level totals of any table.
pub fn log_growth(density: &LogDensity) -> Result<Estimate> {
    let one = WeightPoint::new(1.0, 1.0)?;
    FreeEnergy::new(density.clone(), PartitionKind::C).limit(&one)
}

use super::density::{log_sum_exp, LogCell, LogDensity};
use super::{PartitionKind, WeightPoint};
use crate::error::{Error, Result};

fn selected(kind: PartitionKind, c: &LogCell) -> bool {
    match kind {
        PartitionKind::C => true,
        PartitionKind::L => c.h == 0,
        PartitionKind::T => c.v == 0,
    }
}

#[inline]
fn log_term(c: &LogCell, w: &WeightPoint) -> f64 {
    let mut t = c.ln_count;
    if c.v != 0 {
        t += c.v as f64 * w.log_a();
    }
    if c.h != 0 {
        t += c.h as f64 * w.log_y();
    }
    t
}

/// `log Z_n(a, y)` for the requested slice. An empty slice gives `-inf`.
pub fn evaluate_partition(density: &LogDensity, w: &WeightPoint, n: usize, kind: PartitionKind) -> Result<f64> {
    let level = density
        .level(n)
        .ok_or(Error::LengthOutOfRange { n, n_max: density.n_max() })?;
    Ok(log_sum_exp(level.iter().filter(|c| selected(kind, c)).map(|c| log_term(c, w))))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observable {
    Visits,
    Height,
}

/// Boltzmann mean and variance of visits or endpoint height.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentReport {
    pub which: Observable,
    pub n: usize,
    pub weight: WeightPoint,
    pub mean: f64,
    pub variance: f64,
}

pub fn moment(
    density: &LogDensity,
    w: &WeightPoint,
    n: usize,
    kind: PartitionKind,
    which: Observable,
) -> Result<MomentReport> {
    let level = density
        .level(n)
        .ok_or(Error::LengthOutOfRange { n, n_max: density.n_max() })?;
    let cells: Vec<(f64, f64)> = level
        .iter()
        .filter(|c| selected(kind, c))
        .map(|c| {
            let obs = match which {
                Observable::Visits => c.v as f64,
                Observable::Height => c.h as f64,
            };
            (log_term(c, w), obs)
        })
        .collect();
    let log_z = log_sum_exp(cells.iter().map(|c| c.0));
    if !log_z.is_finite() {
        return Err(Error::EmptyPartition { n });
    }
    let probs: Vec<(f64, f64)> = cells.iter().map(|&(lt, o)| ((lt - log_z).exp(), o)).collect();
    let norm: f64 = probs.iter().map(|p| p.0).sum();
    let mean = probs.iter().map(|(p, o)| p * o).sum::<f64>() / norm;
    let variance = probs.iter().map(|(p, o)| p * (o - mean) * (o - mean)).sum::<f64>() / norm;
    Ok(MomentReport { which, n, weight: *w, mean, variance: variance.max(0.0) })
}

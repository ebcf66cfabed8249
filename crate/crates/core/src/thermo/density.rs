use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::enumerate::{CountTable, WalkClass};

/// Natural log of an arbitrarily large integer; `-inf` for zero.
pub fn ln_big(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        x.to_f64().map(f64::ln).unwrap_or(f64::INFINITY)
    } else {
        let shift = bits - 64;
        let top = (x >> shift).to_f64().unwrap_or(f64::INFINITY);
        top.ln() + shift as f64 * std::f64::consts::LN_2
    }
}

/// `log(sum(exp(xs)))` with max shift; `-inf` for an empty or all `-inf` input.
pub fn log_sum_exp(xs: impl IntoIterator<Item = f64> + Clone) -> f64 {
    let m = xs.clone().into_iter().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    let s: f64 = xs.into_iter().map(|x| (x - m).exp()).sum();
    m + s.ln()
}

/// One cell of a log-count table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogCell {
    pub v: u32,
    pub h: i32,
    pub ln_count: f64,
}

/// Log-domain counts `ln c_n(v, h)` shared by exact tables and Monte Carlo
/// estimates. Absent cells are simply not stored.
#[derive(Debug, Clone, PartialEq)]
pub struct LogDensity {
    dimension: usize,
    class: WalkClass,
    levels: Vec<Vec<LogCell>>,
}

impl LogDensity {
    pub fn new(dimension: usize, class: WalkClass, levels: Vec<Vec<LogCell>>) -> Self {
        Self { dimension, class, levels }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn class(&self) -> WalkClass {
        self.class
    }

    pub fn n_max(&self) -> usize {
        self.levels.len().saturating_sub(1)
    }

    pub fn level(&self, n: usize) -> Option<&[LogCell]> {
        self.levels.get(n).map(Vec::as_slice)
    }

    /// Appends `extension`'s levels above `self.n_max()`, continuing an exact
    /// table with sampled estimates.
    pub fn extended_by(&self, extension: &LogDensity) -> LogDensity {
        let mut levels = self.levels.clone();
        levels.extend(extension.levels.iter().skip(self.levels.len()).cloned());
        LogDensity { dimension: self.dimension, class: self.class, levels }
    }

    pub fn truncated(&self, n_max: usize) -> LogDensity {
        LogDensity {
            dimension: self.dimension,
            class: self.class,
            levels: self.levels[..=n_max.min(self.n_max())].to_vec(),
        }
    }
}

impl From<&CountTable> for LogDensity {
    fn from(t: &CountTable) -> Self {
        let levels = t
            .levels()
            .iter()
            .map(|level| {
                level
                    .iter()
                    .map(|(&(v, h), c)| LogCell { v, h, ln_count: ln_big(c) })
                    .collect()
            })
            .collect();
        LogDensity::new(t.dimension(), t.class(), levels)
    }
}

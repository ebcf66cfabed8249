//! Large-`n` extrapolation of finite-size sequences.
//!
//! Fits `value_n = limit + b / n` by least squares over the upper half of the
//! available lengths. The reported half-width is the largest fit residual in
//! that window plus the shift in `limit` when the two smallest lengths are
//! dropped from the window.

use crate::error::{Error, Result};

pub const MIN_POINTS: usize = 6;
const MIN_WINDOW: usize = 4;

/// A value with a symmetric uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub half_width: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self { value, half_width: 0.0 }
    }

    pub fn lo(&self) -> f64 {
        self.value - self.half_width
    }

    pub fn hi(&self) -> f64 {
        self.value + self.half_width
    }

    /// True when the two intervals overlap.
    pub fn agrees_with(&self, other: &Estimate) -> bool {
        (self.value - other.value).abs() <= self.half_width + other.half_width
    }
}

/// Least-squares `(limit, slope)` for `value = limit + slope / n`.
fn fit(points: &[(usize, f64)]) -> Result<(f64, f64)> {
    let k = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(sx, sy), &(n, v)| (sx + 1.0 / n as f64, sy + v));
    let (mx, my) = (sx / k, sy / k);
    let (sxx, sxy) = points.iter().fold((0.0, 0.0), |(a, b), &(n, v)| {
        let dx = 1.0 / n as f64 - mx;
        (a + dx * dx, b + dx * (v - my))
    });
    if points.len() < 2 || sxx <= 0.0 || !sxy.is_finite() {
        return Err(Error::TooFewPoints { needed: 2, got: points.len() });
    }
    let slope = sxy / sxx;
    Ok((my - slope * mx, slope))
}

/// Extrapolates `(n, value_n)` pairs to `n -> inf`. Points need not be
/// sorted; non-finite values are rejected as unusable.
pub fn extrapolate(values: &[(usize, f64)]) -> Result<Estimate> {
    let mut pts: Vec<(usize, f64)> = values.iter().copied().filter(|(n, v)| *n > 0 && v.is_finite()).collect();
    pts.sort_by_key(|p| p.0);
    pts.dedup_by_key(|p| p.0);
    if pts.len() < MIN_POINTS {
        return Err(Error::TooFewPoints { needed: MIN_POINTS, got: pts.len() });
    }
    let window = (pts.len() / 2).max(MIN_WINDOW);
    let top = &pts[pts.len() - window..];
    if top.iter().all(|p| p.1 == top[0].1) {
        return Ok(Estimate::exact(top[0].1));
    }
    let (limit, slope) = fit(top)?;
    let residual = top
        .iter()
        .map(|&(n, v)| (limit + slope / n as f64 - v).abs())
        .fold(0.0, f64::max);
    let (shrunk, _) = fit(&top[2..])?;
    Ok(Estimate { value: limit, half_width: residual + (limit - shrunk).abs() })
}

/// Convenience for sequences indexed from `n = first`.
pub fn extrapolate_from(first: usize, values: &[f64]) -> Result<Estimate> {
    let pts: Vec<(usize, f64)> = values.iter().enumerate().map(|(i, &v)| (first + i, v)).collect();
    extrapolate(&pts)
}

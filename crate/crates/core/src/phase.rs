//! Phase classification, critical points, the adsorbed/ballistic boundary
//! `y_c(a)` and the critical force as a function of temperature.
//!
//! Temperatures use `k = 1`; a visit energy `epsilon < 0` and force `f` map
//! to `a = exp(-epsilon / T)` and `y = exp(f / T)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::thermo::{moment, Estimate, LimitCurves, LogDensity, Observable, PartitionKind, WeightPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    Free,
    Adsorbed,
    Ballistic,
    /// `kappa` and `lambda` tie within their uncertainties.
    Indeterminate,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Free => "free",
            Phase::Adsorbed => "adsorbed",
            Phase::Ballistic => "ballistic",
            Phase::Indeterminate => "indeterminate",
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PhasePoint {
    pub log_a: f64,
    pub log_y: f64,
    pub kappa: Estimate,
    pub lambda: Estimate,
    pub phase: Phase,
}

/// Pure decision rule on the two extrapolated free energies.
pub fn decide_phase(kappa: Estimate, lambda: Estimate, log_mu: Estimate) -> Phase {
    let near_mu = |e: Estimate| (e.value - log_mu.value).abs() <= e.half_width + log_mu.half_width;
    if near_mu(kappa) && near_mu(lambda) {
        return Phase::Free;
    }
    let diff = kappa.value - lambda.value;
    let tol = kappa.half_width + lambda.half_width;
    if diff > tol {
        Phase::Adsorbed
    } else if -diff > tol {
        Phase::Ballistic
    } else {
        Phase::Indeterminate
    }
}

pub fn classify_phase(log_a: f64, log_y: f64, curves: &LimitCurves) -> Result<PhasePoint> {
    let kappa = curves.kappa(log_a)?;
    let lambda = curves.lambda(log_y)?;
    Ok(PhasePoint { log_a, log_y, kappa, lambda, phase: decide_phase(kappa, lambda, curves.log_mu_d) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Axis {
    /// Visit fugacity, variance of visits in `C_n(a, 1)`.
    A,
    /// Height fugacity, variance of the endpoint height in `T_n(y)`.
    Y,
}

impl Axis {
    fn kind(self) -> PartitionKind {
        match self {
            Axis::A => PartitionKind::C,
            Axis::Y => PartitionKind::T,
        }
    }

    fn observable(self) -> Observable {
        match self {
            Axis::A => Observable::Visits,
            Axis::Y => Observable::Height,
        }
    }

    fn weight(self, log_w: f64) -> Result<WeightPoint> {
        match self {
            Axis::A => WeightPoint::from_logs(log_w, 0.0),
            Axis::Y => WeightPoint::from_logs(0.0, log_w),
        }
    }
}

/// Scan range and spacing for variance peaks, in log weight.
pub const PEAK_RANGE: (f64, f64) = (-1.0, 3.0);
pub const PEAK_STEP: f64 = 0.01;

/// Position of the maximum of samples on an even grid, refined by a
/// parabola through the maximum and its neighbours.
pub fn locate_peak(grid: &[f64], values: &[f64], n: usize) -> Result<f64> {
    let (idx, _) = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .ok_or(Error::TooFewPoints { needed: 3, got: 0 })?;
    if idx == 0 || idx + 1 >= values.len() {
        return Err(Error::NoInteriorPeak { n, index: idx, len: values.len() });
    }
    let (l, c, r) = (values[idx - 1], values[idx], values[idx + 1]);
    let denom = l - 2.0 * c + r;
    let shift = if denom < 0.0 { 0.5 * (l - r) / denom } else { 0.0 };
    let h = grid[idx + 1] - grid[idx];
    Ok(grid[idx] + shift.clamp(-0.5, 0.5) * h)
}

#[derive(Debug, Clone, Serialize)]
pub struct CriticalEstimate {
    pub axis: Axis,
    /// Critical fugacity (not its log).
    pub value: f64,
    pub half_width: f64,
    /// Per-length peak positions `(n, fugacity)`.
    pub peaks: Vec<(usize, f64)>,
}

impl CriticalEstimate {
    pub fn estimate(&self) -> Estimate {
        Estimate { value: self.value, half_width: self.half_width }
    }
}

/// Variance-peak location for each `n` in `ns`, extrapolated linearly in
/// `1/n`. The half-width is the drift between the two largest lengths plus
/// one grid spacing.
pub fn estimate_critical(axis: Axis, density: &LogDensity, ns: &[usize]) -> Result<CriticalEstimate> {
    let mut ns: Vec<usize> = ns.to_vec();
    ns.sort_unstable();
    ns.dedup();
    if ns.len() < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: ns.len() });
    }
    let steps = ((PEAK_RANGE.1 - PEAK_RANGE.0) / PEAK_STEP).round() as usize;
    let grid: Vec<f64> = (0..=steps).map(|i| PEAK_RANGE.0 + PEAK_STEP * i as f64).collect();
    let mut peaks = Vec::with_capacity(ns.len());
    for &n in &ns {
        let var = grid
            .iter()
            .map(|&u| Ok(moment(density, &axis.weight(u)?, n, axis.kind(), axis.observable())?.variance))
            .collect::<Result<Vec<f64>>>()?;
        peaks.push((n, locate_peak(&grid, &var, n)?.exp()));
    }
    let k = peaks.len() as f64;
    let mx = peaks.iter().map(|p| 1.0 / p.0 as f64).sum::<f64>() / k;
    let my = peaks.iter().map(|p| p.1).sum::<f64>() / k;
    let (sxx, sxy) = peaks.iter().fold((0.0, 0.0), |(a, b), &(n, v)| {
        let dx = 1.0 / n as f64 - mx;
        (a + dx * dx, b + dx * (v - my))
    });
    let value = my - (sxy / sxx) * mx;
    let (p1, p0) = (peaks[peaks.len() - 1].1, peaks[peaks.len() - 2].1);
    let half_width = (p1 - p0).abs() + p1 * (PEAK_STEP.exp() - 1.0);
    Ok(CriticalEstimate { axis, value, half_width, peaks })
}

/// Lengths `n_max, n_max - 4, ...` down to 8, in increasing order.
pub fn default_ladder(n_max: usize) -> Vec<usize> {
    let mut ns: Vec<usize> = (0..).map(|k| n_max.saturating_sub(4 * k)).take_while(|&n| n >= 8).collect();
    ns.reverse();
    ns
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundaryPoint {
    pub a: f64,
    pub y: f64,
    pub log_y: f64,
    /// In log `y`.
    pub half_width: f64,
    pub kappa: Estimate,
    /// Lower and upper admissible `log y` from the rigorous brackets, widened
    /// by the half-widths involved.
    pub bracket: (f64, f64),
    pub in_bracket: bool,
}

pub const BISECTION_TOL: f64 = 1e-4;

/// Solves `lambda(y) = kappa(a)` for `log y` by bisection.
pub fn boundary_point(a: f64, curves: &LimitCurves) -> Result<BoundaryPoint> {
    boundary_point_with_tol(a, curves, BISECTION_TOL)
}

pub fn boundary_point_with_tol(a: f64, curves: &LimitCurves, tol: f64) -> Result<BoundaryPoint> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidWeight(format!("a={a}")));
    }
    let log_a = a.ln();
    let kappa = curves.kappa(log_a)?;
    let mu = curves.log_mu_d;
    let mu_p = curves.log_mu_plane;
    let f = |w: f64| -> Result<f64> { Ok(curves.lambda(w)?.value - kappa.value) };
    let (mut lo, mut hi) = (0.0, log_a.max(0.0) + mu.value + 1.0);
    let (f_lo, f_hi) = (f(lo)?, f(hi)?);
    if !(f_lo < 0.0 && f_hi > 0.0) {
        return Err(Error::NotBracketed { lo, hi, f_lo, f_hi });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if f(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let log_y = 0.5 * (lo + hi);
    let lambda = curves.lambda(log_y)?;
    let delta = 0.01;
    let slope = (curves.lambda(log_y + delta)?.value - curves.lambda((log_y - delta).max(0.0))?.value)
        / (log_y + delta - (log_y - delta).max(0.0));
    let half_width = if slope > 0.0 { (kappa.half_width + lambda.half_width) / slope } else { f64::INFINITY };

    let widen = half_width + kappa.half_width + mu.half_width + mu_p.half_width;
    let lower = 0f64.max(log_a + mu_p.value - mu.value) - widen;
    let upper = (log_a + mu.value).min(kappa.value) + widen;
    Ok(BoundaryPoint {
        a,
        y: log_y.exp(),
        log_y,
        half_width,
        kappa,
        bracket: (lower, upper),
        in_bracket: lower <= log_y && log_y <= upper,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PhaseDiagram {
    pub dimension: usize,
    pub a_c: Option<CriticalEstimate>,
    pub y_c0: Option<CriticalEstimate>,
    pub boundary: Vec<BoundaryPoint>,
    pub monotone: bool,
    pub bounds: bool,
    /// `log y_c(a) / log(a mu_{d-1})` at the largest `a`.
    pub asymptote_ratio: Option<Estimate>,
    pub asymptote: bool,
}

pub const ASYMPTOTE_TOL: f64 = 0.2;

/// Boundary samples over `a_grid` (fugacities, increasing) with the
/// monotonicity, bracket and asymptote flags. Critical-point estimates use
/// the variance-peak ladder of the adsorbing table and are omitted when no
/// interior peak exists.
pub fn boundary_curve(a_grid: &[f64], curves: &LimitCurves) -> Result<PhaseDiagram> {
    if a_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::GridSpec("a grid must be strictly increasing".into()));
    }
    let boundary = a_grid.iter().map(|&a| boundary_point(a, curves)).collect::<Result<Vec<_>>>()?;
    let monotone = boundary.windows(2).all(|w| w[1].log_y > w[0].log_y);
    let bounds = boundary.iter().all(|p| p.in_bracket);
    let asymptote_ratio = boundary.last().and_then(|p| {
        let denom = p.a.ln() + curves.log_mu_plane.value;
        (denom > 0.0).then(|| {
            let ratio = p.log_y / denom;
            Estimate { value: ratio, half_width: (p.half_width + ratio.abs() * curves.log_mu_plane.half_width) / denom }
        })
    });
    let asymptote = asymptote_ratio.is_some_and(|r| (r.value - 1.0).abs() <= ASYMPTOTE_TOL + r.half_width);
    let density = curves.adsorbed.density();
    let ladder = default_ladder(density.n_max());
    Ok(PhaseDiagram {
        dimension: curves.dimension,
        a_c: estimate_critical(Axis::A, density, &ladder).ok(),
        y_c0: estimate_critical(Axis::Y, density, &ladder).ok(),
        boundary,
        monotone,
        bounds,
        asymptote_ratio,
        asymptote,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ForceSample {
    pub t: f64,
    pub a: f64,
    pub f: f64,
    pub half_width: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SkippedTemperature {
    pub t: f64,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ForceCurve {
    pub epsilon: f64,
    pub samples: Vec<ForceSample>,
    pub skipped: Vec<SkippedTemperature>,
    /// Finite-difference slope over the two smallest sampled temperatures.
    pub slope_at_low_t: Option<Estimate>,
}

/// `f_c(T) = T log y_c(exp(-epsilon / T))` over increasing temperatures.
/// Temperatures whose induced `a` is not above `a_min`, or whose boundary
/// point cannot be bracketed, are skipped with a reason.
pub fn force_curve(epsilon: f64, t_grid: &[f64], curves: &LimitCurves, a_min: f64) -> Result<ForceCurve> {
    if !(epsilon < 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidArgument(format!("epsilon must be negative, got {epsilon}")));
    }
    if t_grid.iter().any(|t| !(*t > 0.0 && t.is_finite())) || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::GridSpec("temperatures must be positive and increasing".into()));
    }
    let mut samples = Vec::new();
    let mut skipped = Vec::new();
    for &t in t_grid {
        let a = (-epsilon / t).exp();
        if a.is_nan() || a <= a_min {
            skipped.push(SkippedTemperature { t, reason: format!("a={a} not above a_c={a_min}") });
            continue;
        }
        match boundary_point(a, curves) {
            Ok(p) => samples.push(ForceSample { t, a, f: t * p.log_y, half_width: t * p.half_width }),
            Err(e) => skipped.push(SkippedTemperature { t, reason: e.to_string() }),
        }
    }
    // Both boundary points inherit the same extrapolation error, so their
    // log-y uncertainties are propagated as fully correlated.
    let slope_at_low_t = match samples.as_slice() {
        [s0, s1, ..] => {
            let dt = s1.t - s0.t;
            Some(Estimate { value: (s1.f - s0.f) / dt, half_width: (s1.half_width - s0.half_width).abs() / dt })
        }
        _ => None,
    };
    Ok(ForceCurve { epsilon, samples, skipped, slope_at_low_t })
}

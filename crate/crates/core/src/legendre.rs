//! Grid Legendre transforms of free-energy curves, visit/height density
//! identification, and the finite-size inequality suite.
//!
//! Transforms are taken over sampled log-weight grids. For a convex sampled
//! curve the conjugate is piecewise linear with breakpoints at the chord
//! slopes, so the inverse transform is evaluated over the density grid plus
//! those slopes and reconstructs the samples exactly.

use serde::Serialize;

use crate::enumerate::{CountTable, WalkClass};
use crate::error::{Error, Result};
use crate::thermo::{
    evaluate_partition, ln_big, log_sum_exp, moment, Estimate, LimitCurves, LogDensity, Observable,
    PartitionKind, WeightPoint,
};

/// Slack below which an exact finite-`n` inequality counts as violated.
pub const EXACT_SLACK: f64 = -1e-9;
const TIE: f64 = 1e-12;

/// Density grid `0 (0.01) 1`.
pub fn density_grid() -> Vec<f64> {
    (0..=100).map(|i| i as f64 / 100.0).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct LegendreTable {
    pub log_weights: Vec<f64>,
    pub curve: Vec<f64>,
    pub densities: Vec<f64>,
    /// `min_j (curve_j - density * log_weight_j)` per density.
    pub values: Vec<f64>,
    /// The minimum is attained only at an edge of the weight grid.
    pub boundary: Vec<bool>,
    /// Chord slopes of the sampled curve lying in `[0, 1]`.
    pub knots: Vec<f64>,
    /// `|curve_i - sup_alpha (P(alpha) + alpha log_weight_i)|` per weight.
    pub inverse_residuals: Vec<f64>,
}

impl LegendreTable {
    /// Exact transform of the samples at any density, with the argmin index.
    pub fn transform_at(&self, alpha: f64) -> (f64, usize) {
        conjugate(&self.log_weights, &self.curve, alpha)
    }

    /// Inverse transform at `log_weight`: the supremum and the interval of
    /// densities attaining it.
    pub fn inverse_at(&self, log_weight: f64) -> (f64, f64, f64) {
        let mut best = f64::NEG_INFINITY;
        let mut arg: Vec<f64> = Vec::new();
        for &alpha in self.densities.iter().chain(&self.knots) {
            let v = self.transform_at(alpha).0 + alpha * log_weight;
            if v > best + TIE {
                best = v;
                arg.clear();
                arg.push(alpha);
            } else if (v - best).abs() <= TIE {
                arg.push(alpha);
            }
        }
        let lo = arg.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = arg.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (best, lo, hi)
    }

    /// Largest second difference of `values`; `<= slack` means concave.
    pub fn concavity_defect(&self) -> f64 {
        self.values
            .windows(3)
            .map(|w| w[0] + w[2] - 2.0 * w[1])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest residual over interior weight points.
    pub fn max_interior_residual(&self) -> f64 {
        let r = &self.inverse_residuals;
        if r.len() <= 2 {
            return 0.0;
        }
        r[1..r.len() - 1].iter().copied().fold(0.0, f64::max)
    }
}

fn conjugate(us: &[f64], ks: &[f64], alpha: f64) -> (f64, usize) {
    let mut best = (f64::INFINITY, 0);
    for (j, (&u, &k)) in us.iter().zip(ks).enumerate() {
        let v = k - alpha * u;
        if v < best.0 {
            best = (v, j);
        }
    }
    best
}

/// Legendre transform of a curve sampled at increasing `log_weights`.
pub fn legendre_transform(log_weights: &[f64], curve: &[f64], densities: &[f64]) -> Result<LegendreTable> {
    if log_weights.len() != curve.len() || log_weights.len() < 2 {
        return Err(Error::InvalidArgument("curve needs >= 2 samples matching its grid".into()));
    }
    if log_weights.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("log-weight grid must be increasing".into()));
    }
    let last = log_weights.len() - 1;
    let mut values = Vec::with_capacity(densities.len());
    let mut boundary = Vec::with_capacity(densities.len());
    for &alpha in densities {
        let (v, _) = conjugate(log_weights, curve, alpha);
        let interior = (1..last).any(|j| curve[j] - alpha * log_weights[j] <= v + TIE);
        values.push(v);
        boundary.push(!interior);
    }
    let mut knots: Vec<f64> = log_weights
        .windows(2)
        .zip(curve.windows(2))
        .map(|(u, k)| (k[1] - k[0]) / (u[1] - u[0]))
        .filter(|s| (0.0..=1.0).contains(s))
        .collect();
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let mut table = LegendreTable {
        log_weights: log_weights.to_vec(),
        curve: curve.to_vec(),
        densities: densities.to_vec(),
        values,
        boundary,
        knots,
        inverse_residuals: Vec::new(),
    };
    table.inverse_residuals = log_weights
        .iter()
        .zip(curve)
        .map(|(&u, &k)| (k - table.inverse_at(u).0).abs())
        .collect();
    Ok(table)
}

fn kind_for(which: Observable) -> PartitionKind {
    match which {
        Observable::Visits => PartitionKind::L,
        Observable::Height => PartitionKind::T,
    }
}

fn weight_on_axis(which: Observable, log_w: f64) -> Result<WeightPoint> {
    match which {
        Observable::Visits => WeightPoint::from_logs(log_w, 0.0),
        Observable::Height => WeightPoint::from_logs(0.0, log_w),
    }
}

/// `(1/n) log L_n(a)` (visits) or `(1/n) log T_n(y)` (height) along a
/// log-weight grid.
pub fn finite_curve(density: &LogDensity, which: Observable, n: usize, log_grid: &[f64]) -> Result<Vec<f64>> {
    log_grid
        .iter()
        .map(|&u| {
            let w = weight_on_axis(which, u)?;
            let lz = evaluate_partition(density, &w, n, kind_for(which))?;
            if !lz.is_finite() {
                return Err(Error::EmptyPartition { n });
            }
            Ok(lz / n as f64)
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct DensityReport {
    pub n: usize,
    pub log_weight: f64,
    /// `<v>_n / n` (or `<h>_n / n`).
    pub mean_density: f64,
    /// `floor(<v>_n)`.
    pub floor_mean: u64,
    /// Argmax interval of the finite-`n` inverse transform.
    pub finite_alpha: (f64, f64),
    /// Argmax interval of the extrapolated curve's inverse transform.
    pub limit_alpha: (f64, f64),
    pub alpha_star: f64,
    pub gap: f64,
    /// One-sided logarithmic derivatives of the finite-`n` free energy.
    pub e_minus: f64,
    pub e_plus: f64,
}

/// Compares the mean density at `n` with the density realising the
/// supremum of the inverse transform at the same weight.
pub fn density_consistency(
    density: &LogDensity,
    w: &WeightPoint,
    n: usize,
    which: Observable,
) -> Result<DensityReport> {
    let u0 = match which {
        Observable::Visits => w.log_a(),
        Observable::Height => w.log_y(),
    };
    let grid: Vec<f64> = (-20..=20).map(|k| u0 + 0.1 * k as f64).collect();
    let dens = density_grid();

    let finite = legendre_transform(&grid, &finite_curve(density, which, n, &grid)?, &dens)?;
    let (_, f_lo, f_hi) = finite.inverse_at(u0);

    let fe = crate::thermo::FreeEnergy::new(density.clone(), kind_for(which));
    let limit_curve = grid
        .iter()
        .map(|&u| fe.limit(&weight_on_axis(which, u)?).map(|e| e.value))
        .collect::<Result<Vec<_>>>()?;
    let limit = legendre_transform(&grid, &limit_curve, &dens)?;
    let (_, l_lo, l_hi) = limit.inverse_at(u0);
    let alpha_star = 0.5 * (l_lo + l_hi);

    let m = moment(density, &weight_on_axis(which, u0)?, n, kind_for(which), which)?;
    let mean_density = m.mean / n as f64;

    let delta = 1e-4;
    let at = |u: f64| -> Result<f64> { Ok(finite_curve(density, which, n, &[u])?[0]) };
    let (k0, km, kp) = (at(u0)?, at(u0 - delta)?, at(u0 + delta)?);
    Ok(DensityReport {
        n,
        log_weight: u0,
        mean_density,
        floor_mean: m.mean.floor().max(0.0) as u64,
        finite_alpha: (f_lo, f_hi),
        limit_alpha: (l_lo, l_hi),
        alpha_star,
        gap: (mean_density - alpha_star).abs(),
        e_minus: (k0 - km) / delta,
        e_plus: (kp - k0) / delta,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckLevel {
    /// Holds for every finite `n`.
    Exact,
    /// Asymptotic statement checked on extrapolated values.
    Limit,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct InequalityInstance {
    pub n: Option<usize>,
    pub log_a: f64,
    pub log_y: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct InequalityReport {
    pub name: &'static str,
    pub level: CheckLevel,
    pub instances: Vec<InequalityInstance>,
    pub pass: bool,
}

impl InequalityReport {
    fn new(name: &'static str, level: CheckLevel, instances: Vec<InequalityInstance>) -> Self {
        let pass = instances.iter().all(|i| i.slack >= EXACT_SLACK);
        Self { name, level, instances, pass }
    }

    pub fn min_slack(&self) -> f64 {
        self.instances.iter().map(|i| i.slack).fold(f64::INFINITY, f64::min)
    }

    pub fn worst(&self) -> Option<&InequalityInstance> {
        self.instances.iter().min_by(|a, b| a.slack.total_cmp(&b.slack))
    }
}

/// Tables needed by [`inequality_report`], all of one dimension.
#[derive(Debug, Clone, Copy)]
pub struct InequalityTables<'a> {
    pub positive: &'a CountTable,
    pub unfolded: &'a CountTable,
    pub plane: &'a CountTable,
}

impl InequalityTables<'_> {
    fn validate(&self) -> Result<usize> {
        for (t, want) in [
            (self.positive, WalkClass::Positive),
            (self.unfolded, WalkClass::PositiveUnfolded),
            (self.plane, WalkClass::Plane),
        ] {
            if t.class() != want {
                return Err(Error::MissingTable(want.to_string()));
            }
        }
        let d = self.positive.dimension();
        for t in [self.unfolded, self.plane] {
            if t.dimension() != d {
                return Err(Error::Dimension { expected: d, found: t.dimension() });
            }
        }
        Ok(self.positive.n_max().min(self.unfolded.n_max()).min(self.plane.n_max()))
    }
}

fn inst(n: usize, log_a: f64, log_y: f64, lhs: f64, rhs: f64) -> InequalityInstance {
    // -inf <= anything, including -inf
    let slack = if lhs == f64::NEG_INFINITY { f64::INFINITY } else { rhs - lhs };
    InequalityInstance { n: Some(n), log_a, log_y, lhs, rhs, slack }
}

/// Exact finite-`n` inequalities on the log scale, for every
/// `0 <= n <= n_max` and every `(log a, log y)` on the product grid.
///
/// * `loop-tail-lower`: `max[L‡_n(a), T‡_n(y)] <= C_n(a, y)`
/// * `loop-tail-upper`: `C_n(a, y) <= sum_m L_m(a) T_{n-m}(y)`
/// * `plane-loops`: `c_n^{(d-1)} a^n <= L_n(a)`
/// * `rod-tails`: `y^n <= T_n(y)`
/// * `concatenation`: `c‡^{(d-1)}_{v*} l‡_{n-v*}(1) a^{v*+1} <= L_n(a)` with
///   `v* = floor(<v>_n)` taken over loops
pub fn inequality_report(tables: InequalityTables<'_>, log_a: &[f64], log_y: &[f64]) -> Result<Vec<InequalityReport>> {
    let n_max = tables.validate()?;
    let pos = LogDensity::from(tables.positive);
    let unf = LogDensity::from(tables.unfolded);

    let on_a = |d: &LogDensity, n: usize, u: f64, k: PartitionKind| -> Result<f64> {
        evaluate_partition(d, &WeightPoint::from_logs(u, 0.0)?, n, k)
    };
    let on_y = |d: &LogDensity, n: usize, w: f64, k: PartitionKind| -> Result<f64> {
        evaluate_partition(d, &WeightPoint::from_logs(0.0, w)?, n, k)
    };
    // [n][grid]
    let table_a = |d: &LogDensity, k| -> Result<Vec<Vec<f64>>> {
        (0..=n_max).map(|n| log_a.iter().map(|&u| on_a(d, n, u, k)).collect()).collect()
    };
    let table_y = |d: &LogDensity, k| -> Result<Vec<Vec<f64>>> {
        (0..=n_max).map(|n| log_y.iter().map(|&w| on_y(d, n, w, k)).collect()).collect()
    };
    let l = table_a(&pos, PartitionKind::L)?;
    let lu = table_a(&unf, PartitionKind::L)?;
    let t = table_y(&pos, PartitionKind::T)?;
    let tu = table_y(&unf, PartitionKind::T)?;

    let mut lower = Vec::new();
    let mut upper = Vec::new();
    for n in 0..=n_max {
        for (i, &u) in log_a.iter().enumerate() {
            for (j, &w) in log_y.iter().enumerate() {
                let c = evaluate_partition(&pos, &WeightPoint::from_logs(u, w)?, n, PartitionKind::C)?;
                lower.push(inst(n, u, w, lu[n][i].max(tu[n][j]), c));
                let conv = log_sum_exp((0..=n).map(|m| l[m][i] + t[n - m][j]));
                upper.push(inst(n, u, w, c, conv));
            }
        }
    }

    let mut plane = Vec::new();
    let mut concat = Vec::new();
    for (n, l_n) in l.iter().enumerate().take(n_max + 1) {
        let ln_plane = ln_big(&tables.plane.total(n));
        for (i, &u) in log_a.iter().enumerate() {
            plane.push(inst(n, u, 0.0, ln_plane + n as f64 * u, l_n[i]));
            if n == 0 {
                continue;
            }
            let mean = moment(&pos, &WeightPoint::from_logs(u, 0.0)?, n, PartitionKind::L, Observable::Visits)?.mean;
            let v_star = (mean + 1e-12).floor().clamp(0.0, n as f64) as usize;
            let lhs = ln_strict_planar(tables.unfolded, v_star)
                + ln_strict_single_visit_loops(tables.unfolded, n - v_star)
                + (v_star as f64 + 1.0) * u;
            concat.push(inst(n, u, 0.0, lhs, l_n[i]));
        }
    }

    let mut rods = Vec::new();
    for (n, t_n) in t.iter().enumerate().take(n_max + 1) {
        for (j, &w) in log_y.iter().enumerate() {
            rods.push(inst(n, 0.0, w, n as f64 * w, t_n[j]));
        }
    }

    Ok(vec![
        InequalityReport::new("loop-tail-lower", CheckLevel::Exact, lower),
        InequalityReport::new("loop-tail-upper", CheckLevel::Exact, upper),
        InequalityReport::new("plane-loops", CheckLevel::Exact, plane),
        InequalityReport::new("rod-tails", CheckLevel::Exact, rods),
        InequalityReport::new("concatenation", CheckLevel::Exact, concat),
    ])
}

/// Planar walks of length `m` unfolded in `x`; a single step must be `+x`.
fn ln_strict_planar(unfolded: &CountTable, m: usize) -> f64 {
    match m {
        0 | 1 => 0.0,
        _ => ln_big(&unfolded.get(m, m as u32, 0)),
    }
}

/// Unfolded loops of length `m` whose only visit is the endpoint.
fn ln_strict_single_visit_loops(unfolded: &CountTable, m: usize) -> f64 {
    match m {
        0 => f64::NEG_INFINITY,
        1 => 0.0,
        _ => ln_big(&unfolded.get(m, 1, 0)),
    }
}

/// Limit-level bounds on the extrapolated free energies, each widened by the
/// half-widths involved:
///
/// * `kappa-bounds`: `max{log mu_d, log mu_{d-1} + log a} <= kappa(a) <= max{log mu_d, log mu_d + log a}`
/// * `lambda-bounds`: `max{log mu_d, log y} <= lambda(y) <= max{log mu_d, log mu_d + log y}`
/// * `kappa-monotone` / `lambda-monotone`: non-decreasing along the grid
pub fn limit_inequality_report(curves: &LimitCurves, log_grid: &[f64]) -> Result<Vec<InequalityReport>> {
    let mu = curves.log_mu_d;
    let mu_p = curves.log_mu_plane;
    let mut kb = Vec::new();
    let mut lb = Vec::new();
    let mut km = Vec::new();
    let mut lm = Vec::new();
    let mut prev: Option<(Estimate, Estimate)> = None;
    for &u in log_grid {
        let k = curves.kappa(u)?;
        let l = curves.lambda(u)?;
        let widen = |e: &Estimate, extra: f64| e.half_width + extra;
        let lim = |lhs: f64, rhs: f64, tol: f64, la: f64, ly: f64| InequalityInstance {
            n: None,
            log_a: la,
            log_y: ly,
            lhs,
            rhs,
            slack: rhs - lhs + tol,
        };
        let lower_k = mu.value.max(mu_p.value + u);
        let upper_k = mu.value.max(mu.value + u);
        let tol_k = widen(&k, mu.half_width.max(mu_p.half_width));
        kb.push(lim(lower_k, k.value, tol_k, u, 0.0));
        kb.push(lim(k.value, upper_k, tol_k, u, 0.0));
        let lower_l = mu.value.max(u);
        let upper_l = mu.value.max(mu.value + u);
        let tol_l = widen(&l, mu.half_width);
        lb.push(lim(lower_l, l.value, tol_l, 0.0, u));
        lb.push(lim(l.value, upper_l, tol_l, 0.0, u));
        if let Some((pk, pl)) = prev {
            km.push(lim(pk.value, k.value, pk.half_width + k.half_width, u, 0.0));
            lm.push(lim(pl.value, l.value, pl.half_width + l.half_width, 0.0, u));
        }
        prev = Some((k, l));
    }
    Ok(vec![
        InequalityReport::new("kappa-bounds", CheckLevel::Limit, kb),
        InequalityReport::new("lambda-bounds", CheckLevel::Limit, lb),
        InequalityReport::new("kappa-monotone", CheckLevel::Limit, km),
        InequalityReport::new("lambda-monotone", CheckLevel::Limit, lm),
    ])
}

#[derive(Debug, Clone, Serialize)]
pub struct RatioSample {
    pub log_weight: f64,
    pub ratio: f64,
    pub half_width: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AsymptoteReport {
    /// `(kappa(a) - log mu_{d-1}) / log a` at the largest `a`.
    pub kappa_ratio: Estimate,
    pub kappa_tolerance: f64,
    pub kappa_pass: bool,
    /// `lambda(y) / log y` at the largest `y`.
    pub lambda_ratio: Estimate,
    pub lambda_tolerance: f64,
    pub lambda_pass: bool,
    /// `(kappa(a) - log mu_d) / (log a - log(mu_d / mu_{d-1}))` beyond the pole.
    pub adsorbed_ratio: Vec<RatioSample>,
    pub adsorbed_ratio_pass: bool,
}

/// Large-weight asymptotes of `kappa` and `lambda`, plus the monotone decay
/// of the adsorbed-phase ratio. Tolerances are the propagated half-widths
/// plus `0.1`.
pub fn asymptote_check(curves: &LimitCurves, log_grid: &[f64]) -> Result<AsymptoteReport> {
    let u_max = log_grid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if u_max.is_nan() || u_max <= 0.0 {
        return Err(Error::InvalidArgument("asymptote check needs log weights > 0".into()));
    }
    let k = curves.kappa(u_max)?;
    let l = curves.lambda(u_max)?;
    let kappa_ratio = Estimate {
        value: (k.value - curves.log_mu_plane.value) / u_max,
        half_width: (k.half_width + curves.log_mu_plane.half_width) / u_max,
    };
    let lambda_ratio = Estimate { value: l.value / u_max, half_width: l.half_width / u_max };
    let kappa_tolerance = kappa_ratio.half_width + 0.1;
    let lambda_tolerance = lambda_ratio.half_width + 0.1;

    let pole = curves.log_mu_d.value - curves.log_mu_plane.value;
    let pole_hw = curves.log_mu_d.half_width + curves.log_mu_plane.half_width;
    let mut adsorbed_ratio = Vec::new();
    for &u in log_grid {
        let denom = u - pole;
        if denom <= 0.1 + pole_hw {
            continue;
        }
        let k = curves.kappa(u)?;
        let num = k.value - curves.log_mu_d.value;
        let ratio = num / denom;
        let half_width = (k.half_width + curves.log_mu_d.half_width) / denom + ratio.abs() * pole_hw / denom;
        adsorbed_ratio.push(RatioSample { log_weight: u, ratio, half_width });
    }
    let adsorbed_ratio_pass = adsorbed_ratio
        .windows(2)
        .all(|w| w[1].ratio <= w[0].ratio + w[0].half_width + w[1].half_width);
    Ok(AsymptoteReport {
        kappa_pass: (kappa_ratio.value - 1.0).abs() <= kappa_tolerance,
        kappa_ratio,
        kappa_tolerance,
        lambda_pass: (lambda_ratio.value - 1.0).abs() <= lambda_tolerance,
        lambda_ratio,
        lambda_tolerance,
        adsorbed_ratio,
        adsorbed_ratio_pass,
    })
}

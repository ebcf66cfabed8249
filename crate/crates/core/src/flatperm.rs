//! Flat-histogram pruned-enriched Rosenbluth sampling (flatPERM) of positive
//! walks, estimating `c_n(v, h)` beyond exact-enumeration lengths.
//!
//! Tours are grouped in fixed-size batches. Each batch owns a ChaCha8 stream
//! selected by its index and keeps its own running estimates to steer
//! enrichment and pruning, so the result depends only on the seed, the tour
//! count and the batch size. Batch accumulators are merged in batch order
//! with compensated summation.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::enumerate::{CountTable, WalkClass};
use crate::error::{Error, Result};
use crate::thermo::{ln_big, LogCell, LogDensity};

pub const DEFAULT_BATCH: u64 = 10_000;
pub const MAX_COPIES: usize = 4;
pub const MIN_SURVIVAL: f64 = 0.25;

#[derive(Debug, Clone)]
pub struct FlatPermConfig {
    pub tours: u64,
    pub seed: u64,
    pub batch_size: u64,
    /// Thread count; `None` uses the global rayon pool.
    pub workers: Option<usize>,
}

impl FlatPermConfig {
    pub fn new(tours: u64, seed: u64) -> Self {
        Self { tours, seed, batch_size: DEFAULT_BATCH, workers: None }
    }
}

/// Neumaier-compensated sum.
#[derive(Debug, Clone, Copy, Default)]
struct Acc {
    sum: f64,
    comp: f64,
}

impl Acc {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateCell {
    pub v: u32,
    pub h: i32,
    /// Estimated `c_n(v, h)`.
    pub value: f64,
    pub samples: u64,
}

/// Estimated counts of positive walks. Cells never sampled are absent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DoSEstimate {
    pub dimension: usize,
    pub n_max: usize,
    pub tours: u64,
    pub seed: Option<u64>,
    pub levels: Vec<Vec<EstimateCell>>,
}

impl DoSEstimate {
    /// Wraps an exact positive table as a (noise-free) estimate.
    pub fn from_exact(table: &CountTable) -> Result<Self> {
        if table.class() != WalkClass::Positive {
            return Err(Error::ClassMismatch { expected: WalkClass::Positive.to_string(), found: table.class() });
        }
        let levels = table
            .levels()
            .iter()
            .map(|l| {
                l.iter()
                    .map(|(&(v, h), c)| EstimateCell { v, h, value: ln_big(c).exp(), samples: 0 })
                    .collect()
            })
            .collect();
        Ok(Self { dimension: table.dimension(), n_max: table.n_max(), tours: 0, seed: None, levels })
    }

    pub fn level(&self, n: usize) -> Option<&[EstimateCell]> {
        self.levels.get(n).map(Vec::as_slice)
    }

    pub fn get(&self, n: usize, v: u32, h: i32) -> Option<&EstimateCell> {
        self.level(n)?.iter().find(|c| c.v == v && c.h == h)
    }

    pub fn total(&self, n: usize) -> f64 {
        self.level(n).map_or(0.0, |l| l.iter().map(|c| c.value).sum())
    }

    pub fn to_log_density(&self) -> LogDensity {
        let levels = self
            .levels
            .iter()
            .map(|l| l.iter().map(|c| LogCell { v: c.v, h: c.h, ln_count: c.value.ln() }).collect())
            .collect();
        LogDensity::new(self.dimension, WalkClass::Positive, levels)
    }
}

struct Lattice {
    n_max: usize,
    /// `(offset, dz)` per direction.
    dirs: Vec<(isize, i32)>,
    origin: usize,
    blocked: Vec<bool>,
}

impl Lattice {
    fn new(d: usize, n_max: usize) -> Self {
        // horizontal axes span [-n-1, n+1]; z spans [-1, n+1]
        let side = 2 * n_max + 3;
        let mut strides = vec![1usize; d];
        for i in 1..d {
            strides[i] = strides[i - 1] * side;
        }
        let size = strides[d - 1] * (n_max + 3);
        let mut dirs = Vec::with_capacity(2 * d);
        for (i, &s) in strides.iter().enumerate() {
            let dz = i32::from(i == d - 1);
            dirs.push((s as isize, dz));
            dirs.push((-(s as isize), -dz));
        }
        let origin = strides[..d - 1].iter().map(|s| s * (n_max + 1)).sum::<usize>() + strides[d - 1];
        let mut blocked = vec![false; size];
        blocked[..strides[d - 1]].fill(true);
        Self { n_max, dirs, origin, blocked }
    }
}

struct Batch {
    lat: Lattice,
    rng: ChaCha8Rng,
    /// `[n][v * (n + 1) + h]`
    weights: Vec<Vec<Acc>>,
    samples: Vec<Vec<u64>>,
    tours_started: f64,
    free: Vec<(usize, i32)>,
}

impl Batch {
    fn new(d: usize, n_max: usize, seed: u64, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        Self {
            lat: Lattice::new(d, n_max),
            rng,
            weights: (0..=n_max).map(|n| vec![Acc::default(); (n + 1) * (n + 1)]).collect(),
            samples: (0..=n_max).map(|n| vec![0; (n + 1) * (n + 1)]).collect(),
            tours_started: 0.0,
            free: Vec::with_capacity(2 * d),
        }
    }

    fn tour(&mut self) {
        self.tours_started += 1.0;
        let o = self.lat.origin;
        self.lat.blocked[o] = true;
        for k in 0..self.lat.dirs.len() {
            let (off, dz) = self.lat.dirs[k];
            let next = (o as isize + off) as usize;
            if !self.lat.blocked[next] {
                self.lat.blocked[next] = true;
                self.grow(next, dz, u32::from(dz == 0), 1, 1.0);
                self.lat.blocked[next] = false;
            }
        }
        self.lat.blocked[o] = false;
    }

    fn grow(&mut self, pos: usize, z: i32, v: u32, n: usize, weight: f64) {
        let cell = v as usize * (n + 1) + z as usize;
        self.weights[n][cell].add(weight);
        self.samples[n][cell] += 1;
        if n == self.lat.n_max {
            return;
        }
        let target = self.weights[n][cell].value() / self.tours_started;
        let ratio = weight / target;
        let (copies, w) = if ratio > 1.0 {
            let k = (ratio.floor() as usize).min(MAX_COPIES);
            (k, weight / k as f64)
        } else {
            let p = ratio.max(MIN_SURVIVAL);
            if p < 1.0 && self.rng.random::<f64>() >= p {
                return;
            }
            (1, weight / p)
        };
        for _ in 0..copies {
            self.free.clear();
            for &(off, dz) in &self.lat.dirs {
                let next = (pos as isize + off) as usize;
                if !self.lat.blocked[next] {
                    self.free.push((next, dz));
                }
            }
            let atmosphere = self.free.len();
            if atmosphere == 0 {
                return;
            }
            let (next, dz) = self.free[self.rng.random_range(0..atmosphere)];
            let nz = z + dz;
            self.lat.blocked[next] = true;
            self.grow(next, nz, v + u32::from(nz == 0), n + 1, w * atmosphere as f64);
            self.lat.blocked[next] = false;
        }
    }
}

fn run_batch(d: usize, n_max: usize, seed: u64, index: u64, tours: u64) -> (Vec<Vec<Acc>>, Vec<Vec<u64>>) {
    let mut b = Batch::new(d, n_max, seed, index);
    for _ in 0..tours {
        b.tour();
    }
    (b.weights, b.samples)
}

/// Runs `cfg.tours` flatPERM tours of positive walks up to length `n_max`.
pub fn run_flatperm(d: usize, n_max: usize, cfg: &FlatPermConfig) -> Result<DoSEstimate> {
    if d < 2 {
        return Err(Error::UnsupportedDimension { d, class: WalkClass::Positive });
    }
    if cfg.tours == 0 || n_max == 0 || cfg.batch_size == 0 {
        return Err(Error::InvalidArgument("tours, n_max and batch size must be positive".into()));
    }
    let batches: Vec<(u64, u64)> = (0..cfg.tours.div_ceil(cfg.batch_size))
        .map(|i| (i, cfg.batch_size.min(cfg.tours - i * cfg.batch_size)))
        .collect();
    let work = || -> Vec<_> {
        batches.par_iter().map(|&(i, t)| run_batch(d, n_max, cfg.seed, i, t)).collect()
    };
    let results = match cfg.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?
            .install(work),
        None => work(),
    };

    let mut weights: Vec<Vec<Acc>> = (0..=n_max).map(|n| vec![Acc::default(); (n + 1) * (n + 1)]).collect();
    let mut samples: Vec<Vec<u64>> = (0..=n_max).map(|n| vec![0; (n + 1) * (n + 1)]).collect();
    for (bw, bs) in &results {
        for n in 1..=n_max {
            for (k, acc) in bw[n].iter().enumerate() {
                if bs[n][k] > 0 {
                    weights[n][k].add(acc.value());
                    samples[n][k] += bs[n][k];
                }
            }
        }
    }
    let tours = cfg.tours as f64;
    let mut levels = vec![vec![EstimateCell { v: 0, h: 0, value: 1.0, samples: cfg.tours }]];
    for n in 1..=n_max {
        let mut cells: BTreeMap<(u32, i32), EstimateCell> = BTreeMap::new();
        for v in 0..=n {
            for h in 0..=n {
                let k = v * (n + 1) + h;
                if samples[n][k] > 0 {
                    let (v, h) = (v as u32, h as i32);
                    cells.insert((v, h), EstimateCell { v, h, value: weights[n][k].value() / tours, samples: samples[n][k] });
                }
            }
        }
        levels.push(cells.into_values().collect());
    }
    Ok(DoSEstimate { dimension: d, n_max, tours: cfg.tours, seed: Some(cfg.seed), levels })
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelError {
    pub n: usize,
    pub cells_checked: usize,
    /// Cells above the mass threshold that the estimate never sampled.
    pub missing: usize,
    pub max_relative_error: f64,
    pub mean_relative_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub threshold: f64,
    pub mass_threshold: f64,
    pub levels: Vec<LevelError>,
    pub pass: bool,
}

pub const REL_THRESHOLD: f64 = 0.05;
pub const MASS_THRESHOLD: f64 = 1e-4;

/// Relative errors of an estimate against an exact positive table over
/// cells holding at least [`MASS_THRESHOLD`] of their level's total.
pub fn compare(estimate: &DoSEstimate, exact: &CountTable) -> Result<Comparison> {
    if exact.class() != WalkClass::Positive {
        return Err(Error::ClassMismatch { expected: WalkClass::Positive.to_string(), found: exact.class() });
    }
    if exact.dimension() != estimate.dimension {
        return Err(Error::Dimension { expected: exact.dimension(), found: estimate.dimension });
    }
    let top = estimate.n_max.min(exact.n_max());
    if top == 0 {
        return Err(Error::DisjointRanges);
    }
    let mut levels = Vec::with_capacity(top);
    for n in 1..=top {
        let total = ln_big(&exact.total(n)).exp();
        let mut errs = Vec::new();
        let mut missing = 0;
        for (&(v, h), c) in exact.level(n)? {
            let c = ln_big(c).exp();
            if c < MASS_THRESHOLD * total {
                continue;
            }
            match estimate.get(n, v, h) {
                Some(e) => errs.push((e.value - c).abs() / c),
                None => {
                    missing += 1;
                    errs.push(1.0);
                }
            }
        }
        levels.push(LevelError {
            n,
            cells_checked: errs.len(),
            missing,
            max_relative_error: errs.iter().copied().fold(0.0, f64::max),
            mean_relative_error: if errs.is_empty() { 0.0 } else { errs.iter().sum::<f64>() / errs.len() as f64 },
        });
    }
    let pass = levels.iter().all(|l| l.max_relative_error <= REL_THRESHOLD);
    Ok(Comparison { threshold: REL_THRESHOLD, mass_threshold: MASS_THRESHOLD, levels, pass })
}

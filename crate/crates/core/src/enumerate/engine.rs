//! Backtracking search over a flat occupancy grid.
//!
//! The half-space constraint is encoded by pre-occupying the layer `z = -1`
//! (and `z = +1` for plane walks), so the inner loop only tests occupancy.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use num_bigint::BigUint;
use rayon::prelude::*;

use super::{EnumConfig, Level, WalkClass};
use crate::error::{Error, Result};

pub(crate) trait Counter: Copy + Default + Send + Sync + PartialEq {
    fn add_small(self, k: u64) -> Option<Self>;
    fn add(self, other: Self) -> Option<Self>;
    fn to_big(self) -> BigUint;
}

impl Counter for u64 {
    #[inline(always)]
    fn add_small(self, k: u64) -> Option<Self> {
        self.checked_add(k)
    }
    fn add(self, other: Self) -> Option<Self> {
        self.checked_add(other)
    }
    fn to_big(self) -> BigUint {
        BigUint::from(self)
    }
}

impl Counter for u128 {
    #[inline(always)]
    fn add_small(self, k: u64) -> Option<Self> {
        self.checked_add(k as u128)
    }
    fn add(self, other: Self) -> Option<Self> {
        self.checked_add(other)
    }
    fn to_big(self) -> BigUint {
        BigUint::from(self)
    }
}

#[derive(Clone, Copy)]
struct Dir {
    offset: isize,
    dx: i32,
    dz: i32,
    horizontal: bool,
    canonical: bool,
}

struct Geometry {
    n_max: usize,
    class: WalkClass,
    symmetry: bool,
    orbit: u64,
    dirs: Vec<Dir>,
    origin: usize,
    template: Vec<u8>,
    cells_per_level: usize,
    h_span: usize,
}

impl Geometry {
    fn new(d: usize, n_max: usize, class: WalkClass, symmetry: bool) -> Self {
        let r = n_max as i64 + 1;
        // (lo, hi) per axis, inclusive
        let mut bounds = vec![(-r, r); d];
        bounds[d - 1] = match class {
            WalkClass::Positive | WalkClass::PositiveUnfolded => (-1, r),
            WalkClass::Plane => (-1, 1),
            WalkClass::FullLattice => (-r, r),
        };
        let sizes: Vec<usize> = bounds.iter().map(|(lo, hi)| (hi - lo + 1) as usize).collect();
        let mut strides = vec![1usize; d];
        for a in 1..d {
            strides[a] = strides[a - 1] * sizes[a - 1];
        }
        let len = strides[d - 1] * sizes[d - 1];
        let origin: usize = (0..d).map(|a| (-bounds[a].0) as usize * strides[a]).sum();

        let mut template = vec![0u8; len];
        let blocked: Vec<i64> = match class {
            WalkClass::Positive | WalkClass::PositiveUnfolded => vec![-1],
            WalkClass::Plane => vec![-1, 1],
            WalkClass::FullLattice => vec![],
        };
        for z in blocked {
            let zi = (z - bounds[d - 1].0) as usize;
            for idx in 0..strides[d - 1] {
                template[zi * strides[d - 1] + idx] = 1;
            }
        }

        let mut dirs = Vec::with_capacity(2 * d);
        for (axis, &stride) in strides.iter().enumerate().take(d) {
            for sign in [1i32, -1] {
                let horizontal = axis + 1 < d;
                dirs.push(Dir {
                    offset: sign as isize * stride as isize,
                    dx: if axis == 0 && horizontal { sign } else { 0 },
                    dz: if axis == d - 1 { sign } else { 0 },
                    horizontal,
                    canonical: axis == 0 && sign == 1,
                });
            }
        }
        let h_span = 2 * n_max + 1;
        Self {
            n_max,
            class,
            symmetry,
            orbit: 2 * (d as u64 - 1).max(1),
            dirs,
            origin,
            template,
            cells_per_level: (n_max + 1) * h_span,
            h_span,
        }
    }

    #[inline(always)]
    fn slot(&self, n: usize, v: u32, z: i32) -> (usize, u32, i32) {
        let (v, h) = match self.class {
            WalkClass::Positive | WalkClass::PositiveUnfolded => (v, z),
            WalkClass::FullLattice => (0, z),
            WalkClass::Plane => (n as u32, 0),
        };
        let idx = n * self.cells_per_level + v as usize * self.h_span + (h + self.n_max as i32) as usize;
        (idx, v, h)
    }
}

/// Search state at the end of a walk, enough to resume it.
#[derive(Clone)]
struct Snapshot {
    path: Vec<usize>,
    z: i32,
    x: i32,
    visits: u32,
    max_interior: i32,
    horizontal_seen: bool,
}

struct Budget<'a> {
    limit: Option<u64>,
    used: &'a AtomicU64,
    abort: &'a AtomicBool,
}

#[derive(Debug)]
enum Stop {
    Overflow { n: usize, v: u32, h: i32 },
    Budget,
}

struct Walker<'g, 'b, C: Counter> {
    geo: &'g Geometry,
    grid: Vec<u8>,
    counts: Vec<C>,
    path: Vec<usize>,
    stop_depth: usize,
    snapshots: Option<Vec<Snapshot>>,
    local_nodes: u64,
    budget: &'b Budget<'b>,
}

const FLUSH_EVERY: u64 = 1 << 16;

impl<'g, 'b, C: Counter> Walker<'g, 'b, C> {
    fn new(geo: &'g Geometry, budget: &'b Budget<'b>, stop_depth: usize) -> Self {
        Self {
            geo,
            grid: geo.template.clone(),
            counts: vec![C::default(); geo.cells_per_level * (geo.n_max + 1)],
            path: Vec::new(),
            stop_depth,
            snapshots: None,
            local_nodes: 0,
            budget,
        }
    }

    #[inline(always)]
    fn record(&mut self, n: usize, v: u32, z: i32, mult: u64) -> std::result::Result<(), Stop> {
        let (idx, v, h) = self.geo.slot(n, v, z);
        match self.counts[idx].add_small(mult) {
            Some(c) => {
                self.counts[idx] = c;
                Ok(())
            }
            None => Err(Stop::Overflow { n, v, h }),
        }
    }

    fn tick(&mut self) -> std::result::Result<(), Stop> {
        self.local_nodes += 1;
        if self.local_nodes == FLUSH_EVERY {
            let total = self.budget.used.fetch_add(self.local_nodes, Ordering::Relaxed) + self.local_nodes;
            self.local_nodes = 0;
            if let Some(limit) = self.budget.limit {
                if total > limit {
                    self.budget.abort.store(true, Ordering::Relaxed);
                }
            }
            if self.budget.abort.load(Ordering::Relaxed) {
                return Err(Stop::Budget);
            }
        }
        Ok(())
    }

    fn flush(&mut self) -> std::result::Result<(), Stop> {
        let total = self.budget.used.fetch_add(self.local_nodes, Ordering::Relaxed) + self.local_nodes;
        self.local_nodes = 0;
        if matches!(self.budget.limit, Some(limit) if total > limit) {
            self.budget.abort.store(true, Ordering::Relaxed);
        }
        if self.budget.abort.load(Ordering::Relaxed) {
            return Err(Stop::Budget);
        }
        Ok(())
    }

    /// Extends the walk of length `m` ending at `pos`; that walk itself has
    /// already been recorded.
    #[allow(clippy::too_many_arguments)]
    fn dfs(
        &mut self,
        pos: usize,
        m: usize,
        z: i32,
        x: i32,
        visits: u32,
        max_interior: i32,
        horizontal_seen: bool,
    ) -> std::result::Result<(), Stop> {
        self.tick()?;
        let unfolded = self.geo.class == WalkClass::PositiveUnfolded;
        if m == self.stop_depth {
            if let Some(snaps) = self.snapshots.as_mut() {
                snaps.push(Snapshot {
                    path: self.path.clone(),
                    z,
                    x,
                    visits,
                    max_interior,
                    horizontal_seen,
                });
            }
            return Ok(());
        }
        if m == self.geo.n_max {
            return Ok(());
        }
        // the endpoint becomes interior once we step past it
        if unfolded && m >= 1 && x < 0 {
            return Ok(());
        }
        let next_max = if m >= 1 { max_interior.max(x) } else { i32::MIN };
        let geo = self.geo;
        for dir in &geo.dirs {
            if geo.symmetry && !horizontal_seen && dir.horizontal && !dir.canonical {
                continue;
            }
            let np = (pos as isize + dir.offset) as usize;
            if self.grid[np] != 0 {
                continue;
            }
            let nz = z + dir.dz;
            let nx = x + dir.dx;
            let nv = visits + u32::from(nz == 0);
            let seen = horizontal_seen || dir.horizontal;
            let mult = if geo.symmetry && seen { geo.orbit } else { 1 };
            if !unfolded || m == 0 || next_max < nx {
                self.record(m + 1, nv, nz, mult)?;
            }
            self.grid[np] = 1;
            self.path.push(np);
            let r = self.dfs(np, m + 1, nz, nx, nv, next_max, seen);
            self.path.pop();
            self.grid[np] = 0;
            r?;
        }
        Ok(())
    }

    fn resume(&mut self, snap: &Snapshot) -> std::result::Result<(), Stop> {
        for &p in &snap.path {
            self.grid[p] = 1;
        }
        self.path.clone_from(&snap.path);
        let end = *snap.path.last().unwrap_or(&self.geo.origin);
        let r = self.dfs(
            end,
            snap.path.len(),
            snap.z,
            snap.x,
            snap.visits,
            snap.max_interior,
            snap.horizontal_seen,
        );
        for &p in &snap.path {
            self.grid[p] = 0;
        }
        self.path.clear();
        r
    }
}

fn merge<C: Counter>(a: &mut [C], b: &[C], geo: &Geometry) -> std::result::Result<(), Stop> {
    for (i, (x, y)) in a.iter_mut().zip(b).enumerate() {
        *x = x.add(*y).ok_or_else(|| {
            let n = i / geo.cells_per_level;
            let rest = i % geo.cells_per_level;
            Stop::Overflow {
                n,
                v: (rest / geo.h_span) as u32,
                h: (rest % geo.h_span) as i32 - geo.n_max as i32,
            }
        })?;
    }
    Ok(())
}

pub(super) fn run<C: Counter>(d: usize, n_max: usize, class: WalkClass, cfg: &EnumConfig) -> Result<Vec<Level>> {
    let geo = Geometry::new(d, n_max, class, cfg.symmetry);
    let used = AtomicU64::new(0);
    let abort = AtomicBool::new(false);
    let budget = Budget { limit: cfg.node_budget, used: &used, abort: &abort };
    let to_error = |s: Stop| match s {
        Stop::Overflow { n, v, h } => Error::Overflow { n, v, h },
        Stop::Budget => Error::ResourceLimit { limit: cfg.node_budget.unwrap_or(0) },
    };

    let split = cfg.prefix_depth.min(n_max);
    let mut head = Walker::<C>::new(&geo, &budget, split);
    head.snapshots = Some(Vec::new());
    head.grid[geo.origin] = 1;
    head.record(0, 0, 0, 1).map_err(to_error)?;
    head.dfs(geo.origin, 0, 0, 0, 0, i32::MIN, false).map_err(to_error)?;
    head.flush().map_err(to_error)?;
    let snapshots = if split < n_max { head.snapshots.take().unwrap_or_default() } else { Vec::new() };
    let mut counts = std::mem::take(&mut head.counts);

    let cells = counts.len();
    let partial = snapshots
        .par_iter()
        .try_fold(
            || (vec![C::default(); cells], None::<Vec<u8>>),
            |(acc, grid), snap| {
                let mut w = Walker::<C>::new(&geo, &budget, usize::MAX);
                if let Some(g) = grid {
                    w.grid = g;
                }
                w.grid[geo.origin] = 1;
                w.counts = acc;
                w.resume(snap)?;
                w.flush()?;
                Ok((w.counts, Some(w.grid)))
            },
        )
        .map(|r| r.map(|(acc, _)| acc))
        .try_reduce(
            || vec![C::default(); cells],
            |mut a, b| {
                merge(&mut a, &b, &geo)?;
                Ok(a)
            },
        )
        .map_err(to_error)?;
    merge(&mut counts, &partial, &geo).map_err(to_error)?;
    if abort.load(Ordering::Relaxed) {
        return Err(to_error(Stop::Budget));
    }

    let mut levels = vec![Level::new(); n_max + 1];
    for (i, c) in counts.iter().enumerate() {
        if *c == C::default() {
            continue;
        }
        let n = i / geo.cells_per_level;
        let rest = i % geo.cells_per_level;
        let v = (rest / geo.h_span) as u32;
        let h = (rest % geo.h_span) as i32 - n_max as i32;
        levels[n].insert((v, h), c.to_big());
    }
    Ok(levels)
}

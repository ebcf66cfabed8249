//! Exact enumeration of half-space walks into joint `(visits, height)`
//! count tables.

mod engine;
pub mod oracle;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};

pub use oracle::{oracle_counts, verify_oracle, OracleCheck};

/// `(visits, height)` key of a count table cell.
pub type Cell = (u32, i32);

/// One length level of a count table.
pub type Level = BTreeMap<Cell, BigUint>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WalkClass {
    /// Walks with `z_i >= 0`; cells are `(v, z_n)`.
    Positive,
    /// Positive walks unfolded in `x`; cells are `(v, z_n)`.
    PositiveUnfolded,
    /// Unrestricted walks; cells are `(0, z_n)`.
    FullLattice,
    /// Walks confined to `z = 0`; cells are `(n, 0)`.
    Plane,
}

impl WalkClass {
    pub const ALL: [WalkClass; 4] =
        [WalkClass::Positive, WalkClass::PositiveUnfolded, WalkClass::FullLattice, WalkClass::Plane];

    pub fn as_str(self) -> &'static str {
        match self {
            WalkClass::Positive => "positive",
            WalkClass::PositiveUnfolded => "positive-unfolded",
            WalkClass::FullLattice => "full-lattice",
            WalkClass::Plane => "plane",
        }
    }

    pub fn is_positive(self) -> bool {
        matches!(self, WalkClass::Positive | WalkClass::PositiveUnfolded)
    }

    fn min_dimension(self) -> usize {
        if self.is_positive() {
            2
        } else {
            1
        }
    }
}

impl fmt::Display for WalkClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for WalkClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        WalkClass::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown walk class `{s}`")))
    }
}

/// Exact counts `c_n(v, h)` for one walk class, all lengths `0..=n_max`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTable {
    dimension: usize,
    class: WalkClass,
    levels: Vec<Level>,
}

impl CountTable {
    /// Builds a table from explicit levels; level 0 must be the empty walk.
    pub fn from_levels(dimension: usize, class: WalkClass, levels: Vec<Level>) -> Result<Self> {
        let root = levels.first().ok_or_else(|| Error::InvalidArgument("table has no levels".into()))?;
        if root.len() != 1 || root.get(&(0, 0)).map(|c| c == &BigUint::from(1u8)) != Some(true) {
            return Err(Error::InvalidArgument("level 0 must be {(0,0): 1}".into()));
        }
        Ok(Self { dimension, class, levels })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn class(&self) -> WalkClass {
        self.class
    }

    pub fn n_max(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn level(&self, n: usize) -> Result<&Level> {
        self.levels.get(n).ok_or(Error::LengthOutOfRange { n, n_max: self.n_max() })
    }

    /// Count of a single cell, zero when absent.
    pub fn get(&self, n: usize, v: u32, h: i32) -> BigUint {
        self.levels
            .get(n)
            .and_then(|l| l.get(&(v, h)))
            .cloned()
            .unwrap_or_else(BigUint::zero)
    }

    pub fn get_u64(&self, n: usize, v: u32, h: i32) -> u64 {
        self.get(n, v, h).to_u64().expect("count exceeds u64")
    }

    pub fn total(&self, n: usize) -> BigUint {
        self.levels.get(n).map(|l| l.values().sum()).unwrap_or_else(BigUint::zero)
    }

    /// Keeps lengths `0..=n_max` only.
    pub fn truncated(&self, n_max: usize) -> Self {
        Self {
            dimension: self.dimension,
            class: self.class,
            levels: self.levels[..=n_max.min(self.n_max())].to_vec(),
        }
    }

    /// The `h = 0` slice, i.e. loop counts `l_n(v)`.
    pub fn derive_loops(&self) -> Result<Vec<BTreeMap<u32, BigUint>>> {
        if !self.class.is_positive() {
            return Err(Error::ClassMismatch {
                expected: "positive or positive-unfolded".into(),
                found: self.class,
            });
        }
        Ok(self
            .levels
            .iter()
            .map(|level| {
                level
                    .iter()
                    .filter(|((_, h), _)| *h == 0)
                    .map(|(&(v, _), c)| (v, c.clone()))
                    .collect()
            })
            .collect())
    }
}

/// Knobs for [`enumerate_with`].
#[derive(Debug, Clone)]
pub struct EnumConfig {
    /// Canonicalise the first horizontal step and weight by its orbit size.
    pub symmetry: bool,
    /// Depth at which the search forest is split into parallel subtrees.
    pub prefix_depth: usize,
    /// Worker threads; `None` uses the global rayon pool.
    pub workers: Option<usize>,
    /// Abort (and discard everything) after visiting this many nodes.
    pub node_budget: Option<u64>,
}

impl Default for EnumConfig {
    fn default() -> Self {
        Self { symmetry: false, prefix_depth: 4, workers: None, node_budget: None }
    }
}

/// Counter width chosen ahead of the run from the trivial bound
/// `c_n <= 2d (2d-1)^(n-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountWidth {
    U64,
    U128,
}

pub fn select_width(d: usize, n_max: usize) -> Option<CountWidth> {
    let q = (2 * d).saturating_sub(1).max(1) as f64;
    let log2_bound = (2.0 * d as f64).log2() + (n_max.saturating_sub(1)) as f64 * q.log2();
    if log2_bound < 63.0 {
        Some(CountWidth::U64)
    } else if log2_bound < 127.0 {
        Some(CountWidth::U128)
    } else {
        None
    }
}

pub fn enumerate(d: usize, n_max: usize, class: WalkClass) -> Result<CountTable> {
    enumerate_with(d, n_max, class, &EnumConfig::default())
}

pub fn enumerate_with(d: usize, n_max: usize, class: WalkClass, cfg: &EnumConfig) -> Result<CountTable> {
    if d < class.min_dimension() {
        return Err(Error::UnsupportedDimension { d, class });
    }
    if cfg.symmetry && class == WalkClass::PositiveUnfolded {
        return Err(Error::SymmetryUnsupported(class));
    }
    let width = select_width(d, n_max).ok_or(Error::ResourceLimit { limit: u64::MAX })?;
    let run = || match width {
        CountWidth::U64 => engine::run::<u64>(d, n_max, class, cfg),
        CountWidth::U128 => engine::run::<u128>(d, n_max, class, cfg),
    };
    let levels = match cfg.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?
            .install(run)?,
        None => run()?,
    };
    Ok(CountTable { dimension: d, class, levels })
}

use std::path::{Path, PathBuf};

use super::{read_table, serialize_table, Table, GENERATOR_VERSION};
use crate::enumerate::{CountTable, WalkClass};
use crate::error::{Error, Result};
use crate::flatperm::DoSEstimate;
use crate::thermo::{LimitCurves, LogDensity};

/// File name of a class table inside a tables directory.
pub fn table_file_name(class: WalkClass) -> String {
    format!("{class}.csv")
}

/// File name of the sampled positive-walk extension inside a tables directory.
pub fn mc_file_name() -> &'static str {
    "mc.csv"
}

/// `$SAW_CACHE_DIR`, else `$XDG_CACHE_HOME/pulled-saw`, else
/// `$HOME/.cache/pulled-saw`, else a temp directory.
pub fn default_cache_dir() -> PathBuf {
    if let Some(d) = std::env::var_os("SAW_CACHE_DIR") {
        return PathBuf::from(d);
    }
    if let Some(d) = std::env::var_os("XDG_CACHE_HOME") {
        return PathBuf::from(d).join("pulled-saw");
    }
    if let Some(h) = std::env::var_os("HOME") {
        return PathBuf::from(h).join(".cache").join("pulled-saw");
    }
    std::env::temp_dir().join("pulled-saw-cache")
}

/// Enumeration cache keyed by dimension, class, length and generator version.
#[derive(Debug, Clone)]
pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn path(&self, d: usize, class: WalkClass, n_max: usize) -> PathBuf {
        self.dir.join(format!("{class}-d{d}-n{n_max}-v{GENERATOR_VERSION}.csv"))
    }

    /// A cached table, or `None` when absent or unreadable.
    pub fn load(&self, d: usize, class: WalkClass, n_max: usize) -> Option<CountTable> {
        match read_table(&self.path(d, class, n_max)) {
            Ok((Table::Exact(t), _)) if t.dimension() == d && t.class() == class && t.n_max() == n_max => Some(t),
            _ => None,
        }
    }

    pub fn store(&self, table: &CountTable, wall_time_seconds: f64) -> Result<()> {
        let path = self.path(table.dimension(), table.class(), table.n_max());
        serialize_table(&Table::Exact(table.clone()), &path, wall_time_seconds).map(|_| ())
    }
}

/// All tables found in one directory, named by [`table_file_name`] and
/// [`mc_file_name`].
#[derive(Debug, Clone, Default)]
pub struct TableSet {
    pub dimension: usize,
    pub positive: Option<CountTable>,
    pub unfolded: Option<CountTable>,
    pub full: Option<CountTable>,
    pub plane: Option<CountTable>,
    pub mc: Option<DoSEstimate>,
}

impl TableSet {
    pub fn load(dir: &Path) -> Result<Self> {
        if !dir.is_dir() {
            return Err(Error::io(dir, std::io::Error::new(std::io::ErrorKind::NotFound, "not a directory")));
        }
        let mut set = TableSet::default();
        let mut dims = Vec::new();
        for class in WalkClass::ALL {
            let path = dir.join(table_file_name(class));
            if !path.exists() {
                continue;
            }
            let (table, _) = read_table(&path)?;
            let Table::Exact(t) = table else {
                return Err(Error::InvalidArgument(format!("{} must hold exact counts", path.display())));
            };
            if t.class() != class {
                return Err(Error::ClassMismatch { expected: class.to_string(), found: t.class() });
            }
            dims.push(t.dimension());
            let slot = match class {
                WalkClass::Positive => &mut set.positive,
                WalkClass::PositiveUnfolded => &mut set.unfolded,
                WalkClass::FullLattice => &mut set.full,
                WalkClass::Plane => &mut set.plane,
            };
            *slot = Some(t);
        }
        let mc = dir.join(mc_file_name());
        if mc.exists() {
            match read_table(&mc)?.0 {
                Table::Stochastic(e) => {
                    dims.push(e.dimension);
                    set.mc = Some(e);
                }
                Table::Exact(_) => {
                    return Err(Error::InvalidArgument(format!("{} must hold a sampled estimate", mc.display())))
                }
            }
        }
        let Some(&d) = dims.first() else {
            return Err(Error::MissingTable(format!("any table in {}", dir.display())));
        };
        if let Some(&other) = dims.iter().find(|&&x| x != d) {
            return Err(Error::Dimension { expected: d, found: other });
        }
        set.dimension = d;
        Ok(set)
    }

    pub fn require(&self, class: WalkClass) -> Result<&CountTable> {
        match class {
            WalkClass::Positive => self.positive.as_ref(),
            WalkClass::PositiveUnfolded => self.unfolded.as_ref(),
            WalkClass::FullLattice => self.full.as_ref(),
            WalkClass::Plane => self.plane.as_ref(),
        }
        .ok_or_else(|| Error::MissingTable(class.to_string()))
    }

    pub fn exact_tables(&self) -> impl Iterator<Item = &CountTable> {
        [&self.positive, &self.unfolded, &self.full, &self.plane].into_iter().flatten()
    }

    /// The positive-walk density, continued by the sampled estimate when one
    /// reaches further than the exact table.
    pub fn positive_density(&self) -> Result<LogDensity> {
        let exact = LogDensity::from(self.require(WalkClass::Positive)?);
        Ok(match &self.mc {
            Some(e) if e.n_max > exact.n_max() => exact.extended_by(&e.to_log_density()),
            _ => exact,
        })
    }

    pub fn limit_curves(&self) -> Result<LimitCurves> {
        LimitCurves::new(
            &self.positive_density()?,
            &LogDensity::from(self.require(WalkClass::FullLattice)?),
            &LogDensity::from(self.require(WalkClass::Plane)?),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::enumerate;

    #[test]
    fn cache_round_trip_and_key() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path());
        assert!(cache.load(2, WalkClass::Plane, 5).is_none());
        let t = enumerate(2, 5, WalkClass::Plane).unwrap();
        cache.store(&t, 0.0).unwrap();
        assert_eq!(cache.load(2, WalkClass::Plane, 5), Some(t));
        assert!(cache.load(2, WalkClass::Plane, 4).is_none());
        assert!(cache.load(3, WalkClass::Plane, 5).is_none());
    }

    #[test]
    fn table_set_requires_classes() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(TableSet::load(dir.path()), Err(Error::MissingTable(_))));
        let t = enumerate(2, 4, WalkClass::Positive).unwrap();
        serialize_table(&Table::Exact(t), &dir.path().join("positive.csv"), 0.0).unwrap();
        let set = TableSet::load(dir.path()).unwrap();
        assert_eq!(set.dimension, 2);
        assert!(set.require(WalkClass::Positive).is_ok());
        assert!(matches!(set.require(WalkClass::Plane), Err(Error::MissingTable(_))));
        let t3 = enumerate(3, 2, WalkClass::Plane).unwrap();
        serialize_table(&Table::Exact(t3), &dir.path().join("plane.csv"), 0.0).unwrap();
        assert!(matches!(TableSet::load(dir.path()), Err(Error::Dimension { .. })));
    }
}

//! Persistent table format: a delimited payload
//! `class,d,n,v,h,count` sorted by `(n, v, h)` plus a JSON manifest sidecar
//! carrying provenance and a SHA-256 checksum of the payload.

mod grid;
mod store;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::enumerate::{CountTable, Level, WalkClass};
use crate::error::{Error, Result};
use crate::flatperm::{DoSEstimate, EstimateCell};
use crate::thermo::LogDensity;

pub use grid::GridSpec;
pub use store::{default_cache_dir, mc_file_name, table_file_name, Cache, TableSet};

pub const SCHEMA_VERSION: u32 = 1;
pub const GENERATOR_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const HEADER: &str = "class,d,n,v,h,count";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Exact,
    Stochastic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub dimension: usize,
    pub class: String,
    pub n_max: usize,
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tours: Option<u64>,
    pub generator_version: String,
    pub wall_time_seconds: f64,
    pub checksum: String,
}

/// An exact count table or a sampled estimate of positive-walk counts.
#[derive(Debug, Clone, PartialEq)]
pub enum Table {
    Exact(CountTable),
    Stochastic(DoSEstimate),
}

impl Table {
    pub fn dimension(&self) -> usize {
        match self {
            Table::Exact(t) => t.dimension(),
            Table::Stochastic(e) => e.dimension,
        }
    }

    pub fn class(&self) -> WalkClass {
        match self {
            Table::Exact(t) => t.class(),
            Table::Stochastic(_) => WalkClass::Positive,
        }
    }

    pub fn n_max(&self) -> usize {
        match self {
            Table::Exact(t) => t.n_max(),
            Table::Stochastic(e) => e.n_max,
        }
    }

    pub fn log_density(&self) -> LogDensity {
        match self {
            Table::Exact(t) => LogDensity::from(t),
            Table::Stochastic(e) => e.to_log_density(),
        }
    }

    pub fn provenance(&self) -> Provenance {
        match self {
            Table::Exact(_) => Provenance::Exact,
            Table::Stochastic(_) => Provenance::Stochastic,
        }
    }
}

/// The payload text. Exact counts are decimal integers; estimates use
/// round-trip scientific notation.
pub fn table_payload(table: &Table) -> String {
    let mut out = String::from(HEADER);
    out.push('\n');
    let (class, d) = (table.class(), table.dimension());
    match table {
        Table::Exact(t) => {
            for (n, level) in t.levels().iter().enumerate() {
                for (&(v, h), c) in level {
                    let _ = writeln!(out, "{class},{d},{n},{v},{h},{c}");
                }
            }
        }
        Table::Stochastic(e) => {
            for (n, level) in e.levels.iter().enumerate() {
                for c in level {
                    let _ = writeln!(out, "{class},{d},{n},{},{},{:e}", c.v, c.h, c.value);
                }
            }
        }
    }
    out
}

pub fn checksum(payload: &str) -> String {
    hex::encode(Sha256::digest(payload.as_bytes()))
}

/// `t.csv` -> `t.csv.manifest.json`
pub fn manifest_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

pub fn build_manifest(table: &Table, payload: &str, wall_time_seconds: f64) -> Manifest {
    let (seed, tours) = match table {
        Table::Stochastic(e) => (e.seed, Some(e.tours)),
        Table::Exact(_) => (None, None),
    };
    Manifest {
        schema_version: SCHEMA_VERSION,
        dimension: table.dimension(),
        class: table.class().to_string(),
        n_max: table.n_max(),
        provenance: table.provenance(),
        seed,
        tours,
        generator_version: GENERATOR_VERSION.to_string(),
        wall_time_seconds,
        checksum: checksum(payload),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Writes the payload to `path` and its manifest beside it.
pub fn serialize_table(table: &Table, path: &Path, wall_time_seconds: f64) -> Result<Manifest> {
    let payload = table_payload(table);
    let manifest = build_manifest(table, &payload, wall_time_seconds);
    write_file(path, &payload)?;
    write_file(&manifest_path(path), &serde_json::to_string_pretty(&manifest)?)?;
    Ok(manifest)
}

pub fn read_manifest(path: &Path) -> Result<Manifest> {
    let mp = manifest_path(path);
    let text = fs::read_to_string(&mp).map_err(|e| Error::io(&mp, e))?;
    let m: Manifest = serde_json::from_str(&text)?;
    if m.schema_version != SCHEMA_VERSION {
        return Err(Error::Schema(m.schema_version));
    }
    Ok(m)
}

/// Reads a table and its manifest, verifying schema and checksum.
pub fn read_table(path: &Path) -> Result<(Table, Manifest)> {
    let manifest = read_manifest(path)?;
    let payload = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    if checksum(&payload) != manifest.checksum {
        return Err(Error::Checksum(path.to_path_buf()));
    }
    Ok((parse_table(&payload, &manifest)?, manifest))
}

struct Row {
    n: usize,
    v: u32,
    h: i32,
    count: String,
}

fn parse_rows(payload: &str, manifest: &Manifest) -> Result<Vec<Row>> {
    let mut lines = payload.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim_end() == HEADER => {}
        _ => return Err(Error::Parse { line: 1, message: format!("expected header `{HEADER}`") }),
    }
    let mut rows = Vec::new();
    let mut last: Option<(usize, u32, i32)> = None;
    for (i, line) in lines {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse { line: line_no, message };
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 6 {
            return Err(err(format!("expected 6 fields, got {}", f.len())));
        }
        if f[0] != manifest.class {
            return Err(err(format!("class `{}` disagrees with manifest `{}`", f[0], manifest.class)));
        }
        let d: usize = f[1].parse().map_err(|_| err(format!("bad dimension `{}`", f[1])))?;
        if d != manifest.dimension {
            return Err(err(format!("dimension {d} disagrees with manifest {}", manifest.dimension)));
        }
        let n: usize = f[2].parse().map_err(|_| err(format!("bad length `{}`", f[2])))?;
        let v: u32 = f[3].parse().map_err(|_| err(format!("bad visit count `{}`", f[3])))?;
        let h: i32 = f[4].parse().map_err(|_| err(format!("bad height `{}`", f[4])))?;
        if n > manifest.n_max {
            return Err(err(format!("length {n} exceeds manifest n_max {}", manifest.n_max)));
        }
        if last.is_some_and(|l| l >= (n, v, h)) {
            return Err(err("rows must be strictly increasing in (n, v, h)".into()));
        }
        last = Some((n, v, h));
        rows.push(Row { n, v, h, count: f[5].to_string() });
    }
    Ok(rows)
}

pub fn parse_table(payload: &str, manifest: &Manifest) -> Result<Table> {
    let class: WalkClass = manifest.class.parse()?;
    let rows = parse_rows(payload, manifest)?;
    match manifest.provenance {
        Provenance::Exact => {
            let mut levels: Vec<Level> = vec![BTreeMap::new(); manifest.n_max + 1];
            for (i, r) in rows.iter().enumerate() {
                let c: BigUint = r.count.parse().map_err(|_| Error::Parse {
                    line: i + 2,
                    message: format!("bad count `{}`", r.count),
                })?;
                levels[r.n].insert((r.v, r.h), c);
            }
            Ok(Table::Exact(CountTable::from_levels(manifest.dimension, class, levels)?))
        }
        Provenance::Stochastic => {
            if class != WalkClass::Positive {
                return Err(Error::ClassMismatch { expected: WalkClass::Positive.to_string(), found: class });
            }
            let mut levels: Vec<Vec<EstimateCell>> = vec![Vec::new(); manifest.n_max + 1];
            for (i, r) in rows.iter().enumerate() {
                let value: f64 = r.count.parse().map_err(|_| Error::Parse {
                    line: i + 2,
                    message: format!("bad estimate `{}`", r.count),
                })?;
                levels[r.n].push(EstimateCell { v: r.v, h: r.h, value, samples: 0 });
            }
            Ok(Table::Stochastic(DoSEstimate {
                dimension: manifest.dimension,
                n_max: manifest.n_max,
                tours: manifest.tours.unwrap_or(0),
                seed: manifest.seed,
                levels,
            }))
        }
    }
}

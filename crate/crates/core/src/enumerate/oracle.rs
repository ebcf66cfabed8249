//! Deliberately naive reference enumerator.
//!
//! Grows every self-avoiding walk of `Z^d` with a hash-set occupancy check,
//! classifies each finished walk with [`crate::lattice::classify`] and only
//! then filters by class. No pruning, no symmetry, no parallelism.

use std::collections::BTreeMap;

use num_bigint::BigUint;

use super::{CountTable, Level, WalkClass};
use crate::lattice::{classify, LatticePoint, Walk};

/// Exact counts at length `n` computed by brute force.
pub fn oracle_counts(d: usize, n: usize, class: WalkClass) -> Level {
    let mut counts: BTreeMap<(u32, i32), u64> = BTreeMap::new();
    let mut walk = Walk::empty(d);
    grow(&mut walk, n, class, &mut counts);
    counts.into_iter().map(|(k, c)| (k, BigUint::from(c))).collect()
}

fn grow(walk: &mut Walk, n: usize, class: WalkClass, counts: &mut BTreeMap<(u32, i32), u64>) {
    if walk.len() == n {
        if let Some(cell) = cell_of(walk, class) {
            *counts.entry(cell).or_default() += 1;
        }
        return;
    }
    let end = walk.end().clone();
    for axis in 0..end.dim() {
        for sign in [1, -1] {
            if walk.try_push(end.step(axis, sign)) {
                grow(walk, n, class, counts);
                walk.pop();
            }
        }
    }
}

fn cell_of(walk: &Walk, class: WalkClass) -> Option<(u32, i32)> {
    let f = classify(walk);
    match class {
        WalkClass::Positive => f.positive.then_some((f.visits, f.height)),
        WalkClass::PositiveUnfolded => (f.positive && f.unfolded_x).then_some((f.visits, f.height)),
        WalkClass::FullLattice => Some((0, f.height)),
        WalkClass::Plane => walk
            .vertices()
            .iter()
            .all(|p: &LatticePoint| p.z() == 0)
            .then_some((walk.len() as u32, 0)),
    }
}

/// Outcome of an oracle comparison.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleCheck {
    pub n: usize,
    pub matches: bool,
    /// First differing cell with (oracle, table) counts.
    pub first_mismatch: Option<((u32, i32), BigUint, BigUint)>,
}

/// Compares `table` at length `n` with the brute-force counts.
pub fn verify_oracle(d: usize, n: usize, class: WalkClass, table: &CountTable) -> OracleCheck {
    let expected = oracle_counts(d, n, class);
    let empty = Level::new();
    let got = if table.dimension() == d && table.class() == class {
        table.levels().get(n).unwrap_or(&empty)
    } else {
        &empty
    };
    let mut keys: Vec<_> = expected.keys().chain(got.keys()).copied().collect();
    keys.sort_unstable();
    keys.dedup();
    let zero = BigUint::default();
    let first_mismatch = keys.into_iter().find_map(|k| {
        let e = expected.get(&k).unwrap_or(&zero);
        let g = got.get(&k).unwrap_or(&zero);
        (e != g).then(|| (k, e.clone(), g.clone()))
    });
    let matches = first_mismatch.is_none() && !(expected.is_empty() && table.levels().get(n).is_none());
    OracleCheck { n, matches, first_mismatch }
}

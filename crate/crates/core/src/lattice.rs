//! Hypercubic lattice geometry and the half-space walk predicates.
//!
//! Coordinates are ordered so that the first entry is the unfolding
//! direction `x` and the last entry is the height `z` above the adsorbing
//! hyperplane `z = 0`.

use std::collections::HashSet;

use crate::error::{Error, Result};

/// A vertex of `Z^d`. `coords[0]` is `x`, `coords[d-1]` is `z`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticePoint {
    coords: Vec<i32>,
}

impl LatticePoint {
    pub fn new(coords: Vec<i32>) -> Self {
        Self { coords }
    }

    pub fn origin(d: usize) -> Self {
        Self { coords: vec![0; d] }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[i32] {
        &self.coords
    }

    pub fn x(&self) -> i32 {
        self.coords[0]
    }

    pub fn z(&self) -> i32 {
        self.coords[self.coords.len() - 1]
    }

    /// Neighbour reached by moving `sign` (±1) along `axis`.
    pub fn step(&self, axis: usize, sign: i32) -> Self {
        let mut coords = self.coords.clone();
        coords[axis] += sign;
        Self { coords }
    }

    pub fn is_unit_step_to(&self, other: &Self) -> bool {
        if self.dim() != other.dim() {
            return false;
        }
        let mut moved = 0;
        for (a, b) in self.coords.iter().zip(&other.coords) {
            match (a - b).abs() {
                0 => {}
                1 => moved += 1,
                _ => return false,
            }
        }
        moved == 1
    }
}

impl From<&[i32]> for LatticePoint {
    fn from(c: &[i32]) -> Self {
        Self::new(c.to_vec())
    }
}

/// Checks self-avoidance of a vertex sequence with unit steps.
pub fn is_self_avoiding(vertices: &[LatticePoint]) -> Result<bool> {
    if vertices.is_empty() {
        return Err(Error::NotRooted);
    }
    check_steps(vertices)?;
    let mut seen = HashSet::with_capacity(vertices.len());
    Ok(vertices.iter().all(|p| seen.insert(p)))
}

fn check_steps(vertices: &[LatticePoint]) -> Result<()> {
    let d = vertices[0].dim();
    for (i, pair) in vertices.windows(2).enumerate() {
        if pair[1].dim() != d {
            return Err(Error::Dimension { expected: d, found: pair[1].dim() });
        }
        if !pair[0].is_unit_step_to(&pair[1]) {
            return Err(Error::MalformedWalk { index: i + 1 });
        }
    }
    Ok(())
}

/// A self-avoiding walk rooted at the origin.
#[derive(Debug, Clone)]
pub struct Walk {
    vertices: Vec<LatticePoint>,
    occupied: HashSet<LatticePoint>,
}

impl Walk {
    /// The zero-step walk in dimension `d`.
    pub fn empty(d: usize) -> Self {
        let o = LatticePoint::origin(d);
        let mut occupied = HashSet::new();
        occupied.insert(o.clone());
        Self { vertices: vec![o], occupied }
    }

    pub fn from_vertices(vertices: Vec<LatticePoint>) -> Result<Self> {
        let first = vertices.first().ok_or(Error::NotRooted)?;
        if first.dim() < 1 || first.coords().iter().any(|&c| c != 0) {
            return Err(Error::NotRooted);
        }
        check_steps(&vertices)?;
        let mut occupied = HashSet::with_capacity(vertices.len());
        for (i, p) in vertices.iter().enumerate() {
            if !occupied.insert(p.clone()) {
                return Err(Error::MalformedWalk { index: i });
            }
        }
        Ok(Self { vertices, occupied })
    }

    /// Convenience constructor from raw coordinate tuples.
    pub fn from_coords<const D: usize>(coords: &[[i32; D]]) -> Result<Self> {
        Self::from_vertices(coords.iter().map(|c| LatticePoint::from(&c[..])).collect())
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].dim()
    }

    /// Number of steps.
    pub fn len(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn vertices(&self) -> &[LatticePoint] {
        &self.vertices
    }

    pub fn end(&self) -> &LatticePoint {
        self.vertices.last().expect("walk has a root")
    }

    pub fn occupies(&self, p: &LatticePoint) -> bool {
        self.occupied.contains(p)
    }

    /// Appends `p` if it is a free neighbour of the endpoint.
    pub fn try_push(&mut self, p: LatticePoint) -> bool {
        if !self.end().is_unit_step_to(&p) || self.occupied.contains(&p) {
            return false;
        }
        self.occupied.insert(p.clone());
        self.vertices.push(p);
        true
    }

    pub fn pop(&mut self) -> Option<LatticePoint> {
        if self.vertices.len() <= 1 {
            return None;
        }
        let p = self.vertices.pop()?;
        self.occupied.remove(&p);
        Some(p)
    }

    /// The reversed walk, re-rooted at the old endpoint and translated back
    /// to the origin.
    pub fn reversed(&self) -> Self {
        let end = self.end().clone();
        let vertices = self
            .vertices
            .iter()
            .rev()
            .map(|p| {
                LatticePoint::new(p.coords().iter().zip(end.coords()).map(|(a, b)| a - b).collect())
            })
            .collect();
        Self::from_vertices(vertices).expect("reversal preserves walk invariants")
    }

    pub fn classify(&self) -> WalkFeatures {
        classify(self)
    }
}

/// Surface and unfolding statistics of a walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WalkFeatures {
    pub positive: bool,
    pub visits: u32,
    pub height: i32,
    pub loop_: bool,
    pub tail: bool,
    pub unfolded_x: bool,
}

/// Visits exclude the origin. Unfolding in `x` asks `0 <= x_i < x_n` for the
/// interior vertices `1..n-1` only, so walks with `n <= 1` are unfolded.
pub fn classify(walk: &Walk) -> WalkFeatures {
    let vs = walk.vertices();
    let positive = vs.iter().all(|p| p.z() >= 0);
    let visits = vs.iter().skip(1).filter(|p| p.z() == 0).count() as u32;
    let height = walk.end().z();
    let xn = walk.end().x();
    let unfolded_x = vs.len() <= 2
        || vs[1..vs.len() - 1].iter().all(|p| 0 <= p.x() && p.x() < xn);
    WalkFeatures {
        positive,
        visits,
        height,
        loop_: positive && height == 0,
        tail: positive && visits == 0,
        unfolded_x,
    }
}

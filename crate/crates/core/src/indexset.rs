//! The point set `V = Z/(N-1) ⊔ {∗}`, parity functions `V → Z/2`, the index
//! sets `L(U)` and the parity relation `R` between labels.
//!
//! Parity functions are bitmasks. Bit `i` for `0 <= i <= N-2` is the value at
//! the ring element `i`; bit `N-1` is the value at the star point. Every
//! serialized label uses this order.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported `N`; parity functions are stored in a `u64`.
pub const MAX_POINTS: usize = 32;

/// An element of `V`, addressed by its bit position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Point(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PointSet {
    n_points: usize,
    half_inverse: usize,
}

impl PointSet {
    /// `make_point_set`. Odd `N` is always rejected; `N ≡ 2 (mod 4)` only
    /// passes with `allow_non_4n`.
    pub fn new(n_points: usize, allow_non_4n: bool) -> Result<Self> {
        if n_points < 4 {
            return Err(Error::TooFewPoints(n_points));
        }
        if n_points > MAX_POINTS {
            return Err(Error::TooManyPoints(n_points));
        }
        if n_points % 2 == 1 {
            return Err(Error::OddPointCount(n_points));
        }
        if !n_points.is_multiple_of(4) && !allow_non_4n {
            return Err(Error::NotDivisibleByFour(n_points));
        }
        let ring = n_points - 1;
        Ok(Self { n_points, half_inverse: ring.div_ceil(2) })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    /// The modulus `N - 1` of the ring `Z/(N-1)`.
    pub fn ring_size(&self) -> usize {
        self.n_points - 1
    }

    pub fn half_inverse(&self) -> usize {
        self.half_inverse
    }

    pub fn star(&self) -> Point {
        Point(self.n_points - 1)
    }

    pub fn is_star(&self, p: Point) -> bool {
        p.0 == self.n_points - 1
    }

    /// All points in bit order `0, …, N-2, ∗`.
    pub fn points(&self) -> impl Iterator<Item = Point> {
        (0..self.n_points).map(Point)
    }

    /// Mask with all `N` meaningful bits set.
    pub fn full_mask(&self) -> u64 {
        low_bits(self.n_points)
    }

    /// Mask of the ring part `Z/(N-1)`.
    pub fn ring_mask(&self) -> u64 {
        low_bits(self.ring_size())
    }

    /// Division by two in `Z/(N-1)`.
    pub fn half(&self, m: usize) -> usize {
        (m % self.ring_size()) * self.half_inverse % self.ring_size()
    }

    /// Reduction of a (possibly negative) integer into `Z/(N-1)`.
    pub fn ring(&self, v: i64) -> usize {
        v.rem_euclid(self.ring_size() as i64) as usize
    }

    /// `2k - j` in `Z/(N-1)`.
    pub fn reflect(&self, k: usize, j: usize) -> usize {
        self.ring(2 * k as i64 - j as i64)
    }

    pub fn group_mask(&self, group: Group) -> u64 {
        match group {
            Group::Singleton(p) => 1u64 << p.0,
            Group::Full => self.full_mask(),
        }
    }
}

fn low_bits(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// A function `V → Z/2` stored as a bitmask in the crate-wide bit order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParityFunction(pub u64);

impl ParityFunction {
    pub fn value(self, p: Point) -> u8 {
        ((self.0 >> p.0) & 1) as u8
    }

    /// Sum over the points of `mask`, in `Z/2`.
    pub fn sum_over(self, mask: u64) -> u8 {
        ((self.0 & mask).count_ones() & 1) as u8
    }

    /// `|φ|`: the sum of the restriction to `Z/(N-1)`.
    pub fn ring_parity(self, ps: &PointSet) -> u8 {
        self.sum_over(ps.ring_mask())
    }

    pub fn ring_bits(self, ps: &PointSet) -> u64 {
        self.0 & ps.ring_mask()
    }

    /// Binary rendering `0b…` with the star bit first.
    pub fn render(self, ps: &PointSet) -> String {
        format!("0b{:0width$b}", self.0, width = ps.n_points())
    }
}

/// The four parameters `p0..p3 ∈ Z/2`, indexed by a cardinality modulo 4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RelationParams(pub [u8; 4]);

impl RelationParams {
    pub fn new(p0: u8, p1: u8, p2: u8, p3: u8) -> Self {
        Self([p0 & 1, p1 & 1, p2 & 1, p3 & 1])
    }

    /// `p0 = 1, p1 = p2 = p3 = 0`.
    pub fn canonical() -> Self {
        Self::new(1, 0, 0, 0)
    }

    /// `p_{#₄U}` for a set of the given cardinality.
    pub fn for_cardinality(&self, card: usize) -> u8 {
        self.0[card % 4]
    }
}

impl Default for RelationParams {
    fn default() -> Self {
        Self::canonical()
    }
}

/// The subset `U` a label belongs to; only singletons and `V` itself occur.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Group {
    Singleton(Point),
    Full,
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Group::Singleton(p) => write!(f, "{{{}}}", p.0),
            Group::Full => f.write_str("V"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RayLabel {
    pub group: Group,
    pub phi: ParityFunction,
}

impl RayLabel {
    /// Builds a label, checking `phi ∈ L(group)`.
    pub fn new(ps: &PointSet, p: &RelationParams, group: Group, phi: ParityFunction) -> Result<Self> {
        if phi.0 & !ps.full_mask() != 0 || !is_member(p, ps.group_mask(group), phi) {
            return Err(Error::LabelMembership { group: group.to_string(), phi: phi.0 });
        }
        Ok(Self { group, phi })
    }

    /// Rendering used in graph exports: `Psi:star:0b…`, `Psi:l=<k>:0b…`, `F:0b…`.
    pub fn render(&self, ps: &PointSet) -> String {
        let bits = self.phi.render(ps);
        match self.group {
            Group::Singleton(p) if ps.is_star(p) => format!("Psi:star:{bits}"),
            Group::Singleton(p) => format!("Psi:l={}:{bits}", p.0),
            Group::Full => format!("F:{bits}"),
        }
    }
}

fn is_member(p: &RelationParams, mask: u64, phi: ParityFunction) -> bool {
    phi.sum_over(mask) == p.for_cardinality(mask.count_ones() as usize)
}

/// All `φ` with `Σ_{v∈U} φ(v) = p_{#₄U}`, ascending by bitmask. `U` is given as
/// a mask over the crate bit order.
pub fn enumerate_l(ps: &PointSet, subset: u64, p: &RelationParams) -> Result<Vec<ParityFunction>> {
    let subset = subset & ps.full_mask();
    if subset == 0 {
        return Err(Error::EmptySubset);
    }
    let target = p.for_cardinality(subset.count_ones() as usize);
    Ok((0..=ps.full_mask())
        .map(ParityFunction)
        .filter(|phi| phi.sum_over(subset) == target)
        .collect())
}

/// Membership of `(a, b)` in the relation `R`.
pub fn relation_holds(ps: &PointSet, p: &RelationParams, a: &RayLabel, b: &RayLabel) -> bool {
    if a.group == b.group {
        return a.phi == b.phi;
    }
    let delta = ps.group_mask(a.group) ^ ps.group_mask(b.group);
    let lhs = a.phi.sum_over(delta);
    let rhs = b.phi.sum_over(delta) ^ p.for_cardinality(delta.count_ones() as usize);
    lhs == rhs
}

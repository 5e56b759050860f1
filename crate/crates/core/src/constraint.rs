//! Counting constraints in counting normal form.
//!
//! A [`Minterm`] pairs a lower and an upper bound for every variable; a
//! [`CountingConstraint`] is a finite disjunction of minterms over the same
//! variables. Constraints are kept canonical: no empty minterms, no duplicates,
//! and no minterm contained in another one of the same constraint. Two
//! canonical constraints may still denote the same set, so equality between
//! constraints is always semantic ([`CountingConstraint::equivalent`]).

use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};

/// Upper bound of a variable: a natural number or infinity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Bound {
    Fin(u64),
    Inf,
}

impl Bound {
    pub fn is_finite(self) -> bool {
        matches!(self, Bound::Fin(_))
    }

    pub fn finite(self) -> Option<u64> {
        match self {
            Bound::Fin(v) => Some(v),
            Bound::Inf => None,
        }
    }

    /// `v <= self`.
    pub fn admits(self, v: u64) -> bool {
        match self {
            Bound::Fin(u) => v <= u,
            Bound::Inf => true,
        }
    }

    /// Adds `k`, with infinity absorbing.
    pub fn checked_add(self, k: u64) -> Result<Bound> {
        match self {
            Bound::Fin(u) => u.checked_add(k).map(Bound::Fin).ok_or(Error::Overflow),
            Bound::Inf => Ok(Bound::Inf),
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Fin(v) => write!(f, "{v}"),
            Bound::Inf => f.write_str("inf"),
        }
    }
}

/// A conjunction `lower[x] <= x <= upper[x]` over all variables.
///
/// Minterms with crossed bounds are allowed as values and denote the empty
/// set; constraints never store them.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Minterm {
    lower: Vec<u64>,
    upper: Vec<Bound>,
}

impl Minterm {
    pub fn new(lower: Vec<u64>, upper: Vec<Bound>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                left: lower.len(),
                right: upper.len(),
            });
        }
        Ok(Minterm { lower, upper })
    }

    /// The whole space `N^dim`.
    pub fn full(dim: usize) -> Self {
        Minterm {
            lower: vec![0; dim],
            upper: vec![Bound::Inf; dim],
        }
    }

    pub fn point(point: &[u64]) -> Self {
        Minterm {
            lower: point.to_vec(),
            upper: point.iter().map(|&v| Bound::Fin(v)).collect(),
        }
    }

    /// Upward closure of a single vector.
    pub fn upward(point: &[u64]) -> Self {
        Minterm {
            lower: point.to_vec(),
            upper: vec![Bound::Inf; point.len()],
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[u64] {
        &self.lower
    }

    pub fn upper(&self) -> &[Bound] {
        &self.upper
    }

    pub fn set_lower(&mut self, var: usize, value: u64) {
        self.lower[var] = value;
    }

    pub fn set_upper(&mut self, var: usize, value: Bound) {
        self.upper[var] = value;
    }

    /// Restricts `var` to the interval `[lo, hi]`.
    pub fn with_range(mut self, var: usize, lo: u64, hi: Bound) -> Self {
        self.lower[var] = lo;
        self.upper[var] = hi;
        self
    }

    pub fn is_empty(&self) -> bool {
        self.lower
            .iter()
            .zip(&self.upper)
            .any(|(&l, &u)| !u.admits(l))
    }

    pub fn is_point(&self) -> bool {
        self.lower
            .iter()
            .zip(&self.upper)
            .all(|(&l, &u)| u == Bound::Fin(l))
    }

    /// True if every upper bound is finite.
    pub fn is_bounded(&self) -> bool {
        self.upper.iter().all(|u| u.is_finite())
    }

    pub fn contains(&self, v: &[u64]) -> Result<bool> {
        check_dim(self.dim(), v.len())?;
        Ok(self.contains_unchecked(v))
    }

    pub(crate) fn contains_unchecked(&self, v: &[u64]) -> bool {
        v.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(&x, (&l, &u))| l <= x && u.admits(x))
    }

    /// `self ⪯ other`, i.e. `⟦self⟧ ⊇ ⟦other⟧`. Every minterm subsumes an
    /// empty one.
    pub fn subsumes(&self, other: &Minterm) -> Result<bool> {
        check_dim(self.dim(), other.dim())?;
        Ok(other.is_empty() || self.subsumes_unchecked(other))
    }

    /// Componentwise containment, ignoring emptiness.
    pub(crate) fn subsumes_unchecked(&self, other: &Minterm) -> bool {
        self.lower.iter().zip(&other.lower).all(|(a, b)| a <= b)
            && self.upper.iter().zip(&other.upper).all(|(a, b)| a >= b)
    }

    pub fn intersect(&self, other: &Minterm) -> Result<Minterm> {
        check_dim(self.dim(), other.dim())?;
        Ok(self.intersect_unchecked(other))
    }

    pub(crate) fn intersect_unchecked(&self, other: &Minterm) -> Minterm {
        Minterm {
            lower: self
                .lower
                .iter()
                .zip(&other.lower)
                .map(|(&a, &b)| a.max(b))
                .collect(),
            upper: self
                .upper
                .iter()
                .zip(&other.upper)
                .map(|(&a, &b)| a.min(b))
                .collect(),
        }
    }

    fn intersects(&self, other: &Minterm) -> bool {
        (0..self.dim()).all(|i| {
            let lo = self.lower[i].max(other.lower[i]);
            self.upper[i].min(other.upper[i]).admits(lo)
        })
    }

    /// Single-literal minterms whose union is the complement of `self`:
    /// `x <= l - 1` for every `l > 0` and `x >= u + 1` for every finite `u`.
    pub fn negation(&self) -> Result<Vec<Minterm>> {
        let dim = self.dim();
        let mut out = Vec::new();
        for var in 0..dim {
            if self.lower[var] > 0 {
                out.push(Minterm::full(dim).with_range(var, 0, Bound::Fin(self.lower[var] - 1)));
            }
            if let Bound::Fin(u) = self.upper[var] {
                let lo = u.checked_add(1).ok_or(Error::Overflow)?;
                out.push(Minterm::full(dim).with_range(var, lo, Bound::Inf));
            }
        }
        Ok(out)
    }

    pub fn l_norm(&self) -> Result<u64> {
        self.lower
            .iter()
            .try_fold(0u64, |acc, &l| acc.checked_add(l))
            .ok_or(Error::Overflow)
    }

    pub fn u_norm(&self) -> Result<u64> {
        self.upper
            .iter()
            .filter_map(|u| u.finite())
            .try_fold(0u64, |acc, u| acc.checked_add(u))
            .ok_or(Error::Overflow)
    }

    /// Largest finite constant occurring in the bounds.
    pub fn max_constant(&self) -> u64 {
        let lmax = self.lower.iter().copied().max().unwrap_or(0);
        let umax = self
            .upper
            .iter()
            .filter_map(|u| u.finite())
            .max()
            .unwrap_or(0);
        lmax.max(umax)
    }

    /// Lexicographically smallest member whose entries sum to at least
    /// `min_total`, if one exists.
    pub fn smallest_member_with_total(&self, min_total: u64) -> Option<Vec<u64>> {
        if self.is_empty() {
            return None;
        }
        let mut point = self.lower.clone();
        let mut total: u64 = point.iter().sum();
        // Raise the last coordinates first to keep the prefix minimal.
        for var in (0..point.len()).rev() {
            if total >= min_total {
                break;
            }
            let missing = min_total - total;
            let room = match self.upper[var] {
                Bound::Fin(u) => u - point[var],
                Bound::Inf => missing,
            };
            let add = room.min(missing);
            point[var] += add;
            total += add;
        }
        (total >= min_total).then_some(point)
    }
}

fn check_dim(left: usize, right: usize) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { left, right })
    }
}

/// A finite union of minterms of equal dimension, kept canonical.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CountingConstraint {
    dim: usize,
    minterms: Vec<Minterm>,
}

impl CountingConstraint {
    /// Builds a canonical constraint from arbitrary minterms.
    pub fn new(dim: usize, minterms: Vec<Minterm>) -> Result<Self> {
        for m in &minterms {
            check_dim(dim, m.dim())?;
        }
        Ok(Self::canonical(dim, minterms))
    }

    pub(crate) fn canonical(dim: usize, minterms: Vec<Minterm>) -> Self {
        CountingConstraint {
            dim,
            minterms: canonicalize(minterms),
        }
    }

    pub fn empty(dim: usize) -> Self {
        CountingConstraint {
            dim,
            minterms: Vec::new(),
        }
    }

    pub fn full(dim: usize) -> Self {
        CountingConstraint {
            dim,
            minterms: vec![Minterm::full(dim)],
        }
    }

    pub fn from_minterm(m: Minterm) -> Self {
        let dim = m.dim();
        Self::canonical(dim, vec![m])
    }

    /// One point minterm per vector.
    pub fn from_finite(dim: usize, points: &[Vec<u64>]) -> Result<Self> {
        let minterms = points
            .iter()
            .map(|p| {
                check_dim(dim, p.len())?;
                Ok(Minterm::point(p))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::canonical(dim, minterms))
    }

    /// The upward closure of the given vectors.
    pub fn from_upward_closed(dim: usize, minimal: &[Vec<u64>]) -> Result<Self> {
        let minterms = minimal
            .iter()
            .map(|p| {
                check_dim(dim, p.len())?;
                Ok(Minterm::upward(p))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::canonical(dim, minterms))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn minterms(&self) -> &[Minterm] {
        &self.minterms
    }

    pub fn len(&self) -> usize {
        self.minterms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.minterms.is_empty()
    }

    /// True if the denoted set is finite.
    pub fn is_bounded(&self) -> bool {
        self.minterms.iter().all(Minterm::is_bounded)
    }

    pub fn contains(&self, v: &[u64]) -> Result<bool> {
        check_dim(self.dim, v.len())?;
        Ok(self.minterms.iter().any(|m| m.contains_unchecked(v)))
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim, other.dim)?;
        let mut all = self.minterms.clone();
        all.extend(other.minterms.iter().cloned());
        Ok(Self::canonical(self.dim, all))
    }

    pub fn intersect(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim, other.dim)?;
        let mut out = Vec::new();
        for a in &self.minterms {
            for b in &other.minterms {
                let m = a.intersect_unchecked(b);
                if !m.is_empty() {
                    out.push(m);
                }
            }
        }
        Ok(Self::canonical(self.dim, out))
    }

    /// Complement by negating each minterm into single-literal minterms and
    /// intersecting the negations one minterm at a time.
    pub fn complement(&self) -> Result<Self> {
        let pieces = subtract_all(vec![Minterm::full(self.dim)], &self.minterms)?;
        Ok(Self::canonical(self.dim, pieces))
    }

    /// `self ∩ ¬other`, computed lazily per minterm of `self`.
    pub fn difference(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim, other.dim)?;
        let index = PointIndex::new(&other.minterms);
        let mut out = Vec::new();
        for m in &self.minterms {
            out.extend(index.subtract(m)?);
        }
        Ok(Self::canonical(self.dim, out))
    }

    /// `⟦self⟧ ⊆ ⟦other⟧`, i.e. `self ∩ ¬other` is empty.
    pub fn is_subset(&self, other: &Self) -> Result<bool> {
        check_dim(self.dim, other.dim)?;
        let index = PointIndex::new(&other.minterms);
        for m in &self.minterms {
            if !index.covers(m)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Semantic equality.
    pub fn equivalent(&self, other: &Self) -> Result<bool> {
        Ok(self.is_subset(other)? && other.is_subset(self)?)
    }

    pub fn l_norm(&self) -> Result<u64> {
        self.minterms
            .iter()
            .try_fold(0, |acc, m| Ok(acc.max(m.l_norm()?)))
    }

    pub fn u_norm(&self) -> Result<u64> {
        self.minterms
            .iter()
            .try_fold(0, |acc, m| Ok(acc.max(m.u_norm()?)))
    }

    pub fn max_constant(&self) -> u64 {
        self.minterms
            .iter()
            .map(Minterm::max_constant)
            .max()
            .unwrap_or(0)
    }

    /// Drops minterms all of whose members have fewer than `min_total`
    /// agents in total.
    pub fn drop_totals_below(&self, min_total: u64) -> Self {
        let minterms = self
            .minterms
            .iter()
            .filter(|m| m.smallest_member_with_total(min_total).is_some())
            .cloned()
            .collect();
        CountingConstraint {
            dim: self.dim,
            minterms,
        }
    }

    /// Lexicographically smallest lower-bound vector among minterms that
    /// contain a member of total at least `min_total`, raised to that total
    /// when needed.
    pub fn smallest_witness(&self, min_total: u64) -> Option<Vec<u64>> {
        self.minterms
            .iter()
            .filter_map(|m| m.smallest_member_with_total(min_total))
            .min()
    }
}

/// Removes empty minterms, duplicates and minterms subsumed by another one;
/// the result is sorted.
pub(crate) fn canonicalize(mut minterms: Vec<Minterm>) -> Vec<Minterm> {
    minterms.retain(|m| !m.is_empty());
    minterms.sort();
    minterms.dedup();
    // A point is only subsumed by minterms containing it, and subsumes
    // nothing but itself, so points never need to be compared pairwise.
    let boxes: Vec<usize> = (0..minterms.len())
        .filter(|&i| !minterms[i].is_point())
        .collect();
    let sums: Vec<u64> = minterms
        .iter()
        .map(|m| m.lower.iter().fold(0u64, |a, &b| a.saturating_add(b)))
        .collect();
    let keep: Vec<bool> = (0..minterms.len())
        .map(|i| {
            !boxes.iter().any(|&j| {
                j != i && sums[j] <= sums[i] && minterms[j].subsumes_unchecked(&minterms[i])
            })
        })
        .collect();
    minterms
        .into_iter()
        .zip(keep)
        .filter_map(|(m, k)| k.then_some(m))
        .collect()
}

/// Membership index over a list of minterms with hashed points.
pub(crate) struct PointIndex<'a> {
    points: HashSet<&'a [u64]>,
    boxes: Vec<&'a Minterm>,
    all: &'a [Minterm],
}

impl<'a> PointIndex<'a> {
    pub(crate) fn new(all: &'a [Minterm]) -> Self {
        let mut points = HashSet::new();
        let mut boxes = Vec::new();
        for m in all {
            if m.is_point() {
                points.insert(m.lower());
            } else {
                boxes.push(m);
            }
        }
        PointIndex { points, boxes, all }
    }

    /// `m \ ⋃ all`.
    pub(crate) fn subtract(&self, m: &Minterm) -> Result<Vec<Minterm>> {
        if m.is_point() {
            let inside = self.points.contains(m.lower())
                || self.boxes.iter().any(|b| b.contains_unchecked(m.lower()));
            return Ok(if inside { Vec::new() } else { vec![m.clone()] });
        }
        subtract_all(vec![m.clone()], self.all)
    }

    pub(crate) fn covers(&self, m: &Minterm) -> Result<bool> {
        if m.is_point() {
            return Ok(self.subtract(m)?.is_empty());
        }
        minterm_covered(m, self.all)
    }
}

/// Inserts `m` into a canonical list unless a member subsumes it; members
/// subsumed by `m` are removed. Returns whether `m` was inserted.
pub(crate) fn insert_pruned(list: &mut Vec<Minterm>, m: Minterm) -> bool {
    if m.is_empty() || list.iter().any(|x| x.subsumes_unchecked(&m)) {
        return false;
    }
    list.retain(|x| !m.subsumes_unchecked(x));
    list.push(m);
    true
}

/// `pieces ∩ ¬n` for every `n` in `others`, pruning as it goes.
pub(crate) fn subtract_all(mut pieces: Vec<Minterm>, others: &[Minterm]) -> Result<Vec<Minterm>> {
    for n in others {
        if pieces.is_empty() {
            break;
        }
        let mut next: Vec<Minterm> = Vec::new();
        let mut negation: Option<Vec<Minterm>> = None;
        for p in pieces {
            if !p.intersects(n) {
                insert_pruned(&mut next, p);
                continue;
            }
            if n.subsumes_unchecked(&p) {
                continue;
            }
            if negation.is_none() {
                negation = Some(n.negation()?);
            }
            for lit in negation.as_ref().unwrap() {
                let q = p.intersect_unchecked(lit);
                insert_pruned(&mut next, q);
            }
        }
        pieces = next;
    }
    Ok(pieces)
}

/// `⟦m⟧ ⊆ ⋃ others`.
pub(crate) fn minterm_covered(m: &Minterm, others: &[Minterm]) -> Result<bool> {
    if m.is_empty() || others.iter().any(|o| o.subsumes_unchecked(m)) {
        return Ok(true);
    }
    if m.is_point() {
        return Ok(false);
    }
    Ok(subtract_all(vec![m.clone()], others)?.is_empty())
}

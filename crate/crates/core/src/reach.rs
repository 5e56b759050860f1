//! Accelerated symbolic reachability over counting constraints.
//!
//! [`fire`] computes, in one step, every configuration reachable from a
//! minterm by firing a single IO transition any number of times. The
//! saturation loops in [`post_star`] and [`pre_star`] repeat this for all
//! transitions until no new minterm appears. Termination follows from the
//! upper-bound norm never growing under `fire` together with minterm
//! subsumption being a well-quasi-order on minterms of bounded upper norm.

use std::collections::HashSet;

use rayon::prelude::*;

use crate::constraint::{insert_pruned, minterm_covered, Bound, CountingConstraint, Minterm};
use crate::error::{Error, Result};
use crate::protocol::{IoTransition, ProtocolScheme};

/// Limits for the saturation loops.
#[derive(Clone, Copy, Debug)]
pub struct ReachOptions {
    /// Abort once more minterms than this are stored.
    pub max_minterms: usize,
}

impl Default for ReachOptions {
    fn default() -> Self {
        ReachOptions {
            max_minterms: 1_000_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Post,
    Pre,
}

#[derive(Clone, Debug)]
pub struct ReachResult {
    pub closure: CountingConstraint,
    /// Number of accelerated rounds until nothing new was produced.
    pub iterations: usize,
    pub peak_minterms: usize,
    pub l_norm: u64,
    pub u_norm: u64,
}

impl ReachResult {
    /// `key=value` lines for reports.
    pub fn stats_kv(&self, prefix: &str) -> String {
        format!(
            "{prefix}.iterations={}\n{prefix}.peak_minterms={}\n{prefix}.minterms={}\n{prefix}.l_norm={}\n{prefix}.u_norm={}\n",
            self.iterations,
            self.peak_minterms,
            self.closure.len(),
            self.l_norm,
            self.u_norm
        )
    }
}

/// Every minterm reachable from `m` by firing `t` zero or more times.
///
/// Self-observation transitions are handled exactly as well: they need two
/// agents in the source state and always leave one of them behind.
pub fn fire(m: &Minterm, t: &IoTransition) -> Result<CountingConstraint> {
    let mut out = vec![m.clone()];
    fire_into(m, t, &mut out)?;
    Ok(CountingConstraint::canonical(m.dim(), out))
}

/// Pushes the minterms produced by at least one firing of `t` from `m`.
pub(crate) fn fire_into(m: &Minterm, t: &IoTransition, out: &mut Vec<Minterm>) -> Result<()> {
    if t.is_noop() || m.is_empty() {
        return Ok(());
    }
    let (s, o, d) = (t.source, t.observed, t.dest);
    let selfobs = s == o;
    // Agents that must stay in the source state after every firing.
    let floor: u64 = if selfobs { 1 } else { 0 };

    let mut enabled = m.clone();
    if selfobs {
        enabled.set_lower(s, m.lower()[s].max(2));
    } else {
        enabled.set_lower(s, m.lower()[s].max(1));
        enabled.set_lower(o, m.lower()[o].max(1));
    }
    if enabled.is_empty() {
        return Ok(());
    }
    let ls = enabled.lower()[s];
    let ld = enabled.lower()[d];
    let ud = enabled.upper()[d];

    match enabled.upper()[s] {
        Bound::Fin(us) => {
            for k in 1..=us.saturating_sub(floor) {
                let mut next = enabled.clone();
                next.set_upper(s, Bound::Fin(us - k));
                next.set_lower(s, ls.saturating_sub(k).max(floor));
                next.set_upper(d, ud.checked_add(k)?);
                next.set_lower(d, ld.checked_add(k).ok_or(Error::Overflow)?);
                out.push(next);
            }
        }
        Bound::Inf => {
            for k in 1..=ls - floor {
                let mut next = enabled.clone();
                next.set_lower(s, ls - k);
                next.set_lower(d, ld.checked_add(k).ok_or(Error::Overflow)?);
                next.set_upper(d, Bound::Inf);
                out.push(next);
            }
        }
    }
    Ok(())
}

/// `post*[t](g)`: one application of `fire` per minterm suffices.
pub fn post_star_t(g: &CountingConstraint, t: &IoTransition) -> Result<CountingConstraint> {
    let mut out = g.minterms().to_vec();
    for m in g.minterms() {
        fire_into(m, t, &mut out)?;
    }
    Ok(CountingConstraint::canonical(g.dim(), out))
}

/// Transitions of a scheme, indexed by source state, without no-ops.
struct Indexed {
    by_source: Vec<Vec<IoTransition>>,
}

impl Indexed {
    fn new(scheme: &ProtocolScheme) -> Result<Self> {
        let mut by_source: Vec<Vec<IoTransition>> = vec![Vec::new(); scheme.num_states()];
        let mut seen = HashSet::new();
        for t in scheme.io_transitions()? {
            if !t.is_noop() && seen.insert((t.source, t.observed, t.dest)) {
                by_source[t.source].push(t);
            }
        }
        Ok(Indexed { by_source })
    }

    /// Minterms from one or more firings of any single transition.
    fn successors(&self, m: &Minterm) -> Result<Vec<Minterm>> {
        let mut out = Vec::new();
        for (s, ts) in self.by_source.iter().enumerate() {
            if m.upper()[s] == Bound::Fin(0) {
                continue;
            }
            for t in ts {
                if m.upper()[t.observed] == Bound::Fin(0) {
                    continue;
                }
                fire_into(m, t, &mut out)?;
            }
        }
        Ok(out)
    }
}

/// `post_a(g)`: the union of `post*[t](g)` over all transitions.
pub fn post_a(g: &CountingConstraint, scheme: &ProtocolScheme) -> Result<CountingConstraint> {
    check_dim(g, scheme)?;
    let index = Indexed::new(scheme)?;
    let mut out = g.minterms().to_vec();
    for m in g.minterms() {
        out.extend(index.successors(m)?);
    }
    Ok(CountingConstraint::canonical(g.dim(), out))
}

/// The set of configurations reachable from `g`.
pub fn post_star(
    g: &CountingConstraint,
    scheme: &ProtocolScheme,
    opts: &ReachOptions,
) -> Result<ReachResult> {
    saturate(g, scheme, None, opts)
}

/// The set of configurations from which `g` is reachable, computed as the
/// forward closure under the reversed transitions.
pub fn pre_star(
    g: &CountingConstraint,
    scheme: &ProtocolScheme,
    opts: &ReachOptions,
) -> Result<ReachResult> {
    saturate(g, &scheme.reverse(), None, opts)
}

/// `pre*(g) ∩ universe` for a successor-closed `universe`: members of the
/// universe only ever pass through the universe on their way to `g`.
pub fn pre_star_within(
    g: &CountingConstraint,
    scheme: &ProtocolScheme,
    universe: &CountingConstraint,
    opts: &ReachOptions,
) -> Result<ReachResult> {
    saturate(g, &scheme.reverse(), Some(universe), opts)
}

fn check_dim(g: &CountingConstraint, scheme: &ProtocolScheme) -> Result<()> {
    if g.dim() != scheme.num_states() {
        return Err(Error::DimensionMismatch {
            left: g.dim(),
            right: scheme.num_states(),
        });
    }
    Ok(())
}

/// Restriction to a universe, with a hash fast path for finite universes.
struct Universe<'a> {
    set: &'a CountingConstraint,
    points: Option<HashSet<&'a [u64]>>,
}

impl<'a> Universe<'a> {
    fn new(set: &'a CountingConstraint) -> Self {
        let points = set
            .minterms()
            .iter()
            .all(Minterm::is_point)
            .then(|| set.minterms().iter().map(|m| m.lower()).collect());
        Universe { set, points }
    }

    fn restrict(&self, m: Minterm, out: &mut Vec<Minterm>) {
        if let (Some(points), true) = (&self.points, m.is_point()) {
            if points.contains(m.lower()) {
                out.push(m);
            }
            return;
        }
        for u in self.set.minterms() {
            let x = m.intersect_unchecked(u);
            if !x.is_empty() {
                out.push(x);
            }
        }
    }
}

/// Accumulated canonical minterm set. While it holds only points, lookups
/// go through a hash set.
struct Store {
    list: Vec<Minterm>,
    points: HashSet<Minterm>,
    all_points: bool,
}

impl Store {
    fn new() -> Self {
        Store {
            list: Vec::new(),
            points: HashSet::new(),
            all_points: true,
        }
    }

    fn covers(&self, m: &Minterm) -> Result<bool> {
        if self.all_points && m.is_point() {
            return Ok(self.points.contains(m));
        }
        minterm_covered(m, &self.list)
    }

    fn insert(&mut self, m: Minterm) -> bool {
        if self.all_points && m.is_point() {
            if !self.points.insert(m.clone()) {
                return false;
            }
            self.list.push(m);
            return true;
        }
        self.all_points = false;
        self.points.clear();
        insert_pruned(&mut self.list, m)
    }
}

fn saturate(
    g: &CountingConstraint,
    scheme: &ProtocolScheme,
    universe: Option<&CountingConstraint>,
    opts: &ReachOptions,
) -> Result<ReachResult> {
    check_dim(g, scheme)?;
    if let Some(u) = universe {
        if u.dim() != g.dim() {
            return Err(Error::DimensionMismatch {
                left: g.dim(),
                right: u.dim(),
            });
        }
    }
    let index = Indexed::new(scheme)?;
    let universe = universe.map(Universe::new);

    let mut seeds = Vec::new();
    for m in g.minterms() {
        match &universe {
            Some(u) => u.restrict(m.clone(), &mut seeds),
            None => seeds.push(m.clone()),
        }
    }
    let mut store = Store::new();
    let mut frontier = Vec::new();
    for m in crate::constraint::canonicalize(seeds) {
        if store.insert(m.clone()) {
            frontier.push(m);
        }
    }
    let mut peak = store.list.len();
    let mut iterations = 0;

    loop {
        iterations += 1;
        let produced: Vec<Result<Vec<Minterm>>> = if frontier.len() > 64 {
            frontier.par_iter().map(|m| index.successors(m)).collect()
        } else {
            frontier.iter().map(|m| index.successors(m)).collect()
        };
        let mut next = Vec::new();
        for batch in produced {
            for cand in batch? {
                let mut pieces = Vec::with_capacity(1);
                match &universe {
                    Some(u) => u.restrict(cand, &mut pieces),
                    None => pieces.push(cand),
                }
                for piece in pieces {
                    if store.covers(&piece)? {
                        continue;
                    }
                    if store.insert(piece.clone()) {
                        next.push(piece);
                    }
                    peak = peak.max(store.list.len());
                    if store.list.len() > opts.max_minterms {
                        return Err(Error::ResourceLimit {
                            what: "stored minterms",
                            limit: opts.max_minterms,
                        });
                    }
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }

    let closure = CountingConstraint::canonical(g.dim(), store.list);
    Ok(ReachResult {
        l_norm: closure.l_norm()?,
        u_norm: closure.u_norm()?,
        closure,
        iterations,
        peak_minterms: peak,
    })
}

//! Explicit-state ground truth at a fixed population size.
//!
//! IO interactions preserve the number of agents, so the configurations of
//! a given size form a finite graph. Fair executions eventually enter a
//! bottom strongly connected component of that graph and then visit each of
//! its configurations infinitely often, so a configuration stabilizes to `b`
//! exactly when every bottom SCC reachable from it consists of
//! `b`-consensus configurations only.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::constraint::CountingConstraint;
use crate::decision::Violation;
use crate::error::{Error, Result};
use crate::protocol::{Configuration, Output, PopulationProtocol, ProtocolScheme, Transition};
use crate::reach::{self, Direction, ReachOptions};

#[derive(Clone, Copy, Debug)]
pub struct OracleOptions {
    /// Graphs with more nodes than this are rejected.
    pub max_nodes: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            max_nodes: 2_000_000,
        }
    }
}

fn binomial(n: u64, k: u64) -> Option<u64> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return None;
        }
    }
    Some(acc as u64)
}

/// Number of configurations of `total` agents over `n_states` states.
pub fn count_configs(n_states: usize, total: u64) -> Option<u64> {
    if n_states == 0 {
        return Some(0);
    }
    binomial(total + n_states as u64 - 1, n_states as u64 - 1)
}

/// All vectors of length `n_states` summing to `total`, lexicographically
/// ordered.
pub fn enumerate_configs(n_states: usize, total: u64) -> Result<Vec<Vec<u64>>> {
    if total < 2 {
        return Err(Error::InvalidConfiguration(format!(
            "populations need at least two agents, got {total}"
        )));
    }
    Ok(compositions(n_states, total))
}

fn compositions(n: usize, total: u64) -> Vec<Vec<u64>> {
    fn rec(prefix: &mut Vec<u64>, n: usize, left: u64, out: &mut Vec<Vec<u64>>) {
        if prefix.len() + 1 == n {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for v in 0..=left {
            prefix.push(v);
            rec(prefix, n, left - v, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        rec(&mut Vec::with_capacity(n), n, total, &mut out);
    }
    out
}

/// Members of `g` with exactly `total` agents.
pub fn slice(g: &CountingConstraint, total: u64) -> Result<BTreeSet<Vec<u64>>> {
    fn rec(
        lo: &[u64],
        hi: &[u64],
        suffix_lo: &[u64],
        suffix_hi: &[u64],
        prefix: &mut Vec<u64>,
        left: u64,
        out: &mut BTreeSet<Vec<u64>>,
    ) {
        let i = prefix.len();
        if i == lo.len() {
            if left == 0 {
                out.insert(prefix.clone());
            }
            return;
        }
        // Values left for coordinates after `i` must fit their bounds.
        let rest_lo = suffix_lo[i + 1];
        let rest_hi = suffix_hi[i + 1];
        let from = lo[i].max(left.saturating_sub(rest_hi));
        let to = hi[i].min(left.saturating_sub(rest_lo));
        if left < rest_lo {
            return;
        }
        for v in from..=to {
            prefix.push(v);
            rec(lo, hi, suffix_lo, suffix_hi, prefix, left - v, out);
            prefix.pop();
        }
    }
    let mut out = BTreeSet::new();
    for m in g.minterms() {
        let lo = m.lower().to_vec();
        let hi: Vec<u64> = m
            .upper()
            .iter()
            .map(|u| u.finite().unwrap_or(total).min(total))
            .collect();
        let n = lo.len();
        let mut suffix_lo = vec![0u64; n + 1];
        let mut suffix_hi = vec![0u64; n + 1];
        for i in (0..n).rev() {
            suffix_lo[i] = suffix_lo[i + 1].saturating_add(lo[i]);
            suffix_hi[i] = suffix_hi[i + 1].saturating_add(hi[i]);
        }
        if suffix_lo[0] > total || suffix_hi[0] < total {
            continue;
        }
        rec(
            &lo,
            &hi,
            &suffix_lo,
            &suffix_hi,
            &mut Vec::with_capacity(n),
            total,
            &mut out,
        );
    }
    Ok(out)
}

fn uniform_total(seeds: &[Vec<u64>]) -> Result<Option<u64>> {
    let mut total = None;
    for s in seeds {
        let t: u64 = s.iter().sum();
        match total {
            None => total = Some(t),
            Some(prev) if prev != t => return Err(Error::MixedTotals(prev, t)),
            _ => {}
        }
    }
    Ok(total)
}

/// Configuration graph restricted to a set of nodes closed under successors.
#[derive(Clone, Debug)]
pub struct ConfigGraph {
    size: u64,
    nodes: Vec<Vec<u64>>,
    index: HashMap<Vec<u64>, usize>,
    /// Outgoing edges as `(target, transition index)`.
    edges: Vec<Vec<(usize, usize)>>,
}

impl ConfigGraph {
    /// Every configuration of the given size.
    pub fn full(scheme: &ProtocolScheme, size: u64, opts: &OracleOptions) -> Result<Self> {
        let n = count_configs(scheme.num_states(), size).unwrap_or(u64::MAX);
        if n > opts.max_nodes as u64 {
            return Err(Error::ResourceLimit {
                what: "configuration graph nodes",
                limit: opts.max_nodes,
            });
        }
        let seeds = enumerate_configs(scheme.num_states(), size)?;
        Self::explore(scheme, &seeds, opts)
    }

    /// The part of the graph reachable from `seeds`.
    pub fn explore(
        scheme: &ProtocolScheme,
        seeds: &[Vec<u64>],
        opts: &OracleOptions,
    ) -> Result<Self> {
        let size = uniform_total(seeds)?.unwrap_or(0);
        let mut g = ConfigGraph {
            size,
            nodes: Vec::new(),
            index: HashMap::new(),
            edges: Vec::new(),
        };
        let mut queue = VecDeque::new();
        for s in seeds {
            if s.len() != scheme.num_states() {
                return Err(Error::DimensionMismatch {
                    left: s.len(),
                    right: scheme.num_states(),
                });
            }
            if g.add(s.clone(), opts)? {
                queue.push_back(g.nodes.len() - 1);
            }
        }
        while let Some(i) = queue.pop_front() {
            let mut out = Vec::new();
            for (ti, t) in scheme.transitions().iter().enumerate() {
                let Some(next) = ProtocolScheme::step(&g.nodes[i], t) else {
                    continue;
                };
                let j = match g.index.get(&next) {
                    Some(&j) => j,
                    None => {
                        g.add(next, opts)?;
                        queue.push_back(g.nodes.len() - 1);
                        g.nodes.len() - 1
                    }
                };
                out.push((j, ti));
            }
            g.edges[i] = out;
        }
        Ok(g)
    }

    fn add(&mut self, c: Vec<u64>, opts: &OracleOptions) -> Result<bool> {
        if self.index.contains_key(&c) {
            return Ok(false);
        }
        if self.nodes.len() >= opts.max_nodes {
            return Err(Error::ResourceLimit {
                what: "configuration graph nodes",
                limit: opts.max_nodes,
            });
        }
        self.index.insert(c.clone(), self.nodes.len());
        self.nodes.push(c);
        self.edges.push(Vec::new());
        Ok(true)
    }

    pub fn size(&self) -> u64 {
        self.size
    }

    pub fn nodes(&self) -> &[Vec<u64>] {
        &self.nodes
    }

    pub fn node(&self, c: &[u64]) -> Option<usize> {
        self.index.get(c).copied()
    }

    pub fn edges(&self, node: usize) -> &[(usize, usize)] {
        &self.edges[node]
    }

    /// Strongly connected components, sinks first.
    pub fn sccs(&self) -> Vec<Vec<usize>> {
        let mut graph: DiGraph<(), ()> = DiGraph::with_capacity(self.nodes.len(), 0);
        for _ in &self.nodes {
            graph.add_node(());
        }
        for (i, out) in self.edges.iter().enumerate() {
            for &(j, _) in out {
                if i != j {
                    graph.add_edge(NodeIndex::new(i), NodeIndex::new(j), ());
                }
            }
        }
        tarjan_scc(&graph)
            .into_iter()
            .map(|c| c.into_iter().map(|n| n.index()).collect())
            .collect()
    }
}

/// Closure of `seeds` under the transitions.
pub fn post_star_explicit(
    scheme: &ProtocolScheme,
    seeds: &[Vec<u64>],
    opts: &OracleOptions,
) -> Result<BTreeSet<Vec<u64>>> {
    let g = ConfigGraph::explore(scheme, seeds, opts)?;
    Ok(g.nodes.into_iter().collect())
}

/// Configurations of the seeds' size from which some seed is reachable.
pub fn pre_star_explicit(
    scheme: &ProtocolScheme,
    seeds: &[Vec<u64>],
    opts: &OracleOptions,
) -> Result<BTreeSet<Vec<u64>>> {
    // c' = step(c, t) exactly when c = step(c', reversed t).
    post_star_explicit(&scheme.reverse(), seeds, opts)
}

const UNIFORM0: u8 = 1;
const UNIFORM1: u8 = 2;
const MIXED: u8 = 4;

/// Bottom-SCC analysis of the graph reachable from a set of seeds.
pub struct Stabilization {
    graph: ConfigGraph,
    scc_of: Vec<usize>,
    bottom: Vec<bool>,
    mask: Vec<u8>,
}

impl Stabilization {
    pub fn analyze(
        p: &PopulationProtocol,
        seeds: &[Vec<u64>],
        opts: &OracleOptions,
    ) -> Result<Self> {
        let graph = ConfigGraph::explore(p.scheme(), seeds, opts)?;
        let sccs = graph.sccs();
        let mut scc_of = vec![0; graph.nodes.len()];
        for (k, comp) in sccs.iter().enumerate() {
            for &v in comp {
                scc_of[v] = k;
            }
        }
        let mut bottom = vec![true; sccs.len()];
        let mut mask = vec![0u8; sccs.len()];
        // Sinks come first, so successor components are already done.
        for (k, comp) in sccs.iter().enumerate() {
            let mut succ_mask = 0;
            for &v in comp {
                for &(w, _) in graph.edges(v) {
                    if scc_of[w] != k {
                        bottom[k] = false;
                        succ_mask |= mask[scc_of[w]];
                    }
                }
            }
            mask[k] = if bottom[k] {
                let values: BTreeSet<Option<Output>> = comp
                    .iter()
                    .map(|&v| p.consensus_of(&graph.nodes[v]))
                    .collect();
                match values.into_iter().collect::<Vec<_>>().as_slice() {
                    [Some(0)] => UNIFORM0,
                    [Some(1)] => UNIFORM1,
                    _ => MIXED,
                }
            } else {
                succ_mask
            };
        }
        Ok(Stabilization {
            graph,
            scc_of,
            bottom,
            mask,
        })
    }

    pub fn graph(&self) -> &ConfigGraph {
        &self.graph
    }

    /// The value every fair execution from `c` stabilizes to, if any.
    pub fn value(&self, c: &[u64]) -> Option<Output> {
        let node = self.graph.node(c)?;
        match self.mask[self.scc_of[node]] {
            UNIFORM0 => Some(0),
            UNIFORM1 => Some(1),
            _ => None,
        }
    }

    pub fn in_bottom_scc(&self, c: &[u64]) -> bool {
        self.graph
            .node(c)
            .is_some_and(|n| self.bottom[self.scc_of[n]])
    }

    /// Whether a bottom SCC with agents of both outputs is reachable from `c`.
    pub fn reaches_mixed_bottom(&self, c: &[u64]) -> bool {
        self.graph
            .node(c)
            .is_some_and(|n| self.mask[self.scc_of[n]] & MIXED != 0)
    }
}

/// `Some(b)` iff every bottom SCC reachable from `c0` is uniformly a
/// `b`-consensus.
pub fn stabilizes_to(
    p: &PopulationProtocol,
    c0: &Configuration,
    opts: &OracleOptions,
) -> Result<Option<Output>> {
    if c0.counts().len() != p.num_states() {
        return Err(Error::DimensionMismatch {
            left: c0.counts().len(),
            right: p.num_states(),
        });
    }
    let a = Stabilization::analyze(p, &[c0.counts().to_vec()], opts)?;
    Ok(a.value(c0.counts()))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SizeVerdict {
    pub well_specified: bool,
    /// First initial configuration without a stable value.
    pub witness: Option<Vec<u64>>,
    /// Stable value per initial configuration, in input order.
    pub values: Vec<(Vec<u64>, Option<Output>)>,
}

/// Whether every configuration of `init_slice` stabilizes to a value.
pub fn well_specified_at_size(
    p: &PopulationProtocol,
    init_slice: &[Vec<u64>],
    opts: &OracleOptions,
) -> Result<SizeVerdict> {
    uniform_total(init_slice)?;
    let a = Stabilization::analyze(p, init_slice, opts)?;
    let values: Vec<(Vec<u64>, Option<Output>)> =
        init_slice.iter().map(|c| (c.clone(), a.value(c))).collect();
    let witness = values
        .iter()
        .find(|(_, v)| v.is_none())
        .map(|(c, _)| c.clone());
    Ok(SizeVerdict {
        well_specified: witness.is_none(),
        witness,
        values,
    })
}

/// Configurations of the given size all of whose successors are
/// `b`-consensus configurations.
pub fn stable_slice(
    p: &PopulationProtocol,
    size: u64,
    b: Output,
    opts: &OracleOptions,
) -> Result<BTreeSet<Vec<u64>>> {
    let all = enumerate_configs(p.num_states(), size)?;
    let bad: Vec<Vec<u64>> = all
        .iter()
        .filter(|c| p.consensus_of(c) != Some(b))
        .cloned()
        .collect();
    let reach_bad = pre_star_explicit(p.scheme(), &bad, opts)?;
    Ok(all.into_iter().filter(|c| !reach_bad.contains(c)).collect())
}

/// Nodes of `g` all of whose successors are `b`-consensus configurations,
/// for `b = 0, 1`.
fn stable_nodes(p: &PopulationProtocol, g: &ConfigGraph) -> [Vec<bool>; 2] {
    let n = g.nodes.len();
    let mut preds = vec![Vec::new(); n];
    for (i, out) in g.edges.iter().enumerate() {
        for &(j, _) in out {
            preds[j].push(i);
        }
    }
    [0, 1].map(|b| {
        // Backward search from the nodes that are not b-consensuses.
        let mut unstable: Vec<bool> = g
            .nodes
            .iter()
            .map(|c| p.consensus_of(c) != Some(b))
            .collect();
        let mut stack: Vec<usize> = (0..n).filter(|&i| unstable[i]).collect();
        while let Some(v) = stack.pop() {
            for &u in &preds[v] {
                if !unstable[u] {
                    unstable[u] = true;
                    stack.push(u);
                }
            }
        }
        unstable.into_iter().map(|x| !x).collect()
    })
}

/// Checks an ill-specification witness explicitly at its own size.
///
/// For condition 1 the witness must be reachable from `init` and unable to
/// reach any stable consensus; for condition 2 it must lie in `init` and
/// reach stable consensuses of both values.
pub fn confirms_witness(
    p: &PopulationProtocol,
    init: &CountingConstraint,
    witness: &[u64],
    violation: Violation,
    opts: &OracleOptions,
) -> Result<bool> {
    let total: u64 = witness.iter().sum();
    if total < 2 || witness.len() != p.num_states() {
        return Ok(false);
    }
    let from_w = ConfigGraph::explore(p.scheme(), &[witness.to_vec()], opts)?;
    let [st0, st1] = stable_nodes(p, &from_w);
    match violation {
        Violation::Condition1 => {
            if (0..from_w.nodes.len()).any(|i| st0[i] || st1[i]) {
                return Ok(false);
            }
            let seeds: Vec<Vec<u64>> = slice(init, total)?.into_iter().collect();
            let from_init = ConfigGraph::explore(p.scheme(), &seeds, opts)?;
            Ok(from_init.node(witness).is_some())
        }
        Violation::Condition2 => {
            Ok(init.contains(witness)? && st0.iter().any(|&x| x) && st1.iter().any(|&x| x))
        }
        Violation::WrongValue0 | Violation::WrongValue1 => Ok(false),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceSummary {
    pub steps: u64,
    pub final_config: Vec<u64>,
    /// The final configuration lies in a bottom SCC.
    pub in_bottom_scc: bool,
    /// Value of that bottom SCC when it is uniformly a consensus.
    pub stabilized: Option<Output>,
    pub final_consensus: Option<Output>,
}

impl TraceSummary {
    pub fn display<'a>(&'a self, states: &'a [String]) -> impl fmt::Display + 'a {
        struct D<'a>(&'a TraceSummary, &'a [String]);
        impl fmt::Display for D<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                let t = self.0;
                let show = |v: Option<Output>| v.map_or("none".to_string(), |b| b.to_string());
                writeln!(f, "steps={}", t.steps)?;
                writeln!(
                    f,
                    "final={}",
                    crate::protocol::DisplayCounts {
                        counts: &t.final_config,
                        states: self.1
                    }
                )?;
                writeln!(f, "consensus={}", show(t.final_consensus))?;
                writeln!(f, "in_bottom_scc={}", t.in_bottom_scc)?;
                writeln!(f, "stabilized={}", show(t.stabilized))
            }
        }
        D(self, states)
    }
}

/// Runs up to `max_steps` uniformly chosen enabled interactions.
pub fn simulate_fair(
    p: &PopulationProtocol,
    c0: &Configuration,
    max_steps: u64,
    seed: u64,
    opts: &OracleOptions,
) -> Result<TraceSummary> {
    if c0.counts().len() != p.num_states() {
        return Err(Error::DimensionMismatch {
            left: c0.counts().len(),
            right: p.num_states(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let transitions: Vec<&Transition> = p.scheme().transitions().iter().collect();
    let mut current = c0.counts().to_vec();
    let mut steps = 0;
    while steps < max_steps {
        let enabled: Vec<Vec<u64>> = transitions
            .iter()
            .filter_map(|t| ProtocolScheme::step(&current, t))
            .filter(|next| *next != current)
            .collect();
        if enabled.is_empty() {
            break;
        }
        current = enabled[rng.random_range(0..enabled.len())].clone();
        steps += 1;
    }
    let analysis = Stabilization::analyze(p, &[current.clone()], opts)?;
    let in_bottom = analysis.in_bottom_scc(&current);
    Ok(TraceSummary {
        steps,
        in_bottom_scc: in_bottom,
        stabilized: if in_bottom {
            analysis.value(&current)
        } else {
            None
        },
        final_consensus: p.consensus_of(&current),
        final_config: current,
    })
}

#[derive(Clone, Debug)]
pub struct Agreement {
    pub size: u64,
    pub symbolic: BTreeSet<Vec<u64>>,
    pub explicit: BTreeSet<Vec<u64>>,
}

impl Agreement {
    pub fn agrees(&self) -> bool {
        self.symbolic == self.explicit
    }

    /// Configurations found by only one side.
    pub fn mismatches(&self) -> Vec<Vec<u64>> {
        self.symbolic
            .symmetric_difference(&self.explicit)
            .cloned()
            .collect()
    }
}

/// Compares the size-`size` slice of the symbolic closure of `g` with the
/// explicit closure of the slice of `g`.
pub fn compare_symbolic(
    scheme: &ProtocolScheme,
    g: &CountingConstraint,
    direction: Direction,
    size: u64,
    reach_opts: &ReachOptions,
    opts: &OracleOptions,
) -> Result<Agreement> {
    let closure = match direction {
        Direction::Post => reach::post_star(g, scheme, reach_opts)?,
        Direction::Pre => reach::pre_star(g, scheme, reach_opts)?,
    };
    compare_closure(scheme, g, &closure.closure, direction, size, opts)
}

/// Like [`compare_symbolic`] with an already computed closure.
pub fn compare_closure(
    scheme: &ProtocolScheme,
    g: &CountingConstraint,
    closure: &CountingConstraint,
    direction: Direction,
    size: u64,
    opts: &OracleOptions,
) -> Result<Agreement> {
    let seeds: Vec<Vec<u64>> = slice(g, size)?.into_iter().collect();
    let explicit = match direction {
        Direction::Post => post_star_explicit(scheme, &seeds, opts)?,
        Direction::Pre => pre_star_explicit(scheme, &seeds, opts)?,
    };
    Ok(Agreement {
        size,
        symbolic: slice(closure, size)?,
        explicit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn threshold2() -> PopulationProtocol {
        let scheme =
            ProtocolScheme::from_names(&["1", "2"], &[["1", "1", "1", "2"], ["2", "1", "2", "2"]])
                .unwrap();
        PopulationProtocol::new("threshold2", scheme, vec![("x".into(), 0)], vec![0, 1]).unwrap()
    }

    fn frozen() -> PopulationProtocol {
        let scheme = ProtocolScheme::from_names(&["a", "b"], &[]).unwrap();
        PopulationProtocol::new(
            "frozen",
            scheme,
            vec![("x".into(), 0), ("y".into(), 1)],
            vec![0, 1],
        )
        .unwrap()
    }

    fn cfg(v: &[u64]) -> Configuration {
        Configuration::new(v.to_vec()).unwrap()
    }

    #[test]
    fn enumeration() {
        assert_eq!(
            enumerate_configs(2, 2).unwrap(),
            vec![vec![0, 2], vec![1, 1], vec![2, 0]]
        );
        assert_eq!(enumerate_configs(3, 2).unwrap().len(), 6);
        assert_eq!(enumerate_configs(1, 5).unwrap(), vec![vec![5]]);
        assert!(enumerate_configs(2, 1).is_err());
        for n in 1..5 {
            for total in 2..7 {
                let got = enumerate_configs(n, total).unwrap().len() as u64;
                assert_eq!(Some(got), count_configs(n, total));
            }
        }
    }

    #[test]
    fn full_graph_size_and_totals() {
        let p = threshold2();
        let g = ConfigGraph::full(p.scheme(), 5, &OracleOptions::default()).unwrap();
        assert_eq!(g.nodes().len(), 6);
        for (i, c) in g.nodes().iter().enumerate() {
            for &(j, _) in g.edges(i) {
                assert_eq!(g.nodes()[j].iter().sum::<u64>(), c.iter().sum::<u64>());
            }
        }
        let limited = OracleOptions { max_nodes: 3 };
        assert!(matches!(
            ConfigGraph::full(p.scheme(), 5, &limited),
            Err(Error::ResourceLimit { .. })
        ));
    }

    #[test]
    fn explicit_closures() {
        let p = threshold2();
        let opts = OracleOptions::default();
        let post = post_star_explicit(p.scheme(), &[vec![3, 0]], &opts).unwrap();
        let expected: BTreeSet<Vec<u64>> = [[3, 0], [2, 1], [1, 2], [0, 3]]
            .iter()
            .map(|c| c.to_vec())
            .collect();
        assert_eq!(post, expected);
        let again: Vec<Vec<u64>> = post.iter().cloned().collect();
        assert_eq!(post_star_explicit(p.scheme(), &again, &opts).unwrap(), post);
        let none = frozen();
        let seeds = vec![vec![1, 1]];
        assert_eq!(
            post_star_explicit(none.scheme(), &seeds, &opts)
                .unwrap()
                .len(),
            1
        );
        assert!(matches!(
            post_star_explicit(p.scheme(), &[vec![2, 0], vec![3, 0]], &opts),
            Err(Error::MixedTotals(2, 3))
        ));
        let pre = pre_star_explicit(p.scheme(), &[vec![0, 3]], &opts).unwrap();
        assert_eq!(pre, expected);
    }

    #[test]
    fn stabilization() {
        let opts = OracleOptions::default();
        assert_eq!(
            stabilizes_to(&frozen(), &cfg(&[1, 1]), &opts).unwrap(),
            None
        );
        assert_eq!(
            stabilizes_to(&threshold2(), &cfg(&[2, 0]), &opts).unwrap(),
            Some(1)
        );
        // A bottom SCC alternating between a 0- and a 1-consensus.
        let scheme = ProtocolScheme::from_names(
            &["a", "b", "c"],
            &[["a", "c", "b", "c"], ["b", "c", "a", "c"]],
        )
        .unwrap();
        let p = PopulationProtocol::new("cyc", scheme, vec![], vec![0, 1, 0]).unwrap();
        assert_eq!(stabilizes_to(&p, &cfg(&[1, 0, 1]), &opts).unwrap(), None);
    }

    #[test]
    fn per_size_verdicts() {
        let opts = OracleOptions::default();
        let v = well_specified_at_size(&frozen(), &[vec![1, 1]], &opts).unwrap();
        assert!(!v.well_specified);
        assert_eq!(v.witness, Some(vec![1, 1]));
        let p = threshold2();
        for n in 2..=6 {
            let v = well_specified_at_size(&p, &[vec![n, 0]], &opts).unwrap();
            assert!(v.well_specified);
        }
        assert!(
            well_specified_at_size(&p, &[], &opts)
                .unwrap()
                .well_specified
        );
    }

    #[test]
    fn noop_transitions_do_not_change_verdicts() {
        let opts = OracleOptions::default();
        let base = threshold2();
        let mut ts = base.scheme().transitions().to_vec();
        ts.push(Transition::new(0, 1, 1, 0));
        ts.push(Transition::new(1, 1, 1, 1));
        let scheme = ProtocolScheme::new(base.states().to_vec(), ts).unwrap();
        let p = PopulationProtocol::new(
            "noop",
            scheme,
            base.inputs().to_vec(),
            base.outputs().to_vec(),
        )
        .unwrap();
        for c in enumerate_configs(2, 4).unwrap() {
            let c = cfg(&c);
            assert_eq!(
                stabilizes_to(&p, &c, &opts).unwrap(),
                stabilizes_to(&base, &c, &opts).unwrap()
            );
        }
    }

    #[test]
    fn slices_match_filtering() {
        let vars: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let g = crate::text::parse_constraint("a>=1 & c<=1 | b=2..3 | a=0 & b=0", &vars).unwrap();
        for total in 0..7 {
            let brute: BTreeSet<Vec<u64>> = compositions(3, total)
                .into_iter()
                .filter(|c| g.contains(c).unwrap())
                .collect();
            assert_eq!(slice(&g, total).unwrap(), brute);
        }
    }

    #[test]
    fn witness_confirmation() {
        let opts = OracleOptions::default();
        let p = frozen();
        let init = p.initial_constraint().unwrap();
        assert!(confirms_witness(&p, &init, &[1, 1], Violation::Condition1, &opts).unwrap());
        assert!(!confirms_witness(&p, &init, &[2, 0], Violation::Condition1, &opts).unwrap());
        assert!(!confirms_witness(&p, &init, &[1, 1], Violation::Condition2, &opts).unwrap());
        let scheme =
            ProtocolScheme::from_names(&["a", "b"], &[["a", "b", "b", "b"], ["b", "a", "a", "a"]])
                .unwrap();
        let race = PopulationProtocol::new(
            "race",
            scheme,
            vec![("x".into(), 0), ("y".into(), 1)],
            vec![0, 1],
        )
        .unwrap();
        let init = race.initial_constraint().unwrap();
        assert!(confirms_witness(&race, &init, &[1, 1], Violation::Condition2, &opts).unwrap());
        assert!(!confirms_witness(&race, &init, &[1, 1], Violation::Condition1, &opts).unwrap());
    }

    #[test]
    fn simulation() {
        let opts = OracleOptions::default();
        let t = simulate_fair(&frozen(), &cfg(&[1, 1]), 100, 7, &opts).unwrap();
        assert_eq!(t.steps, 0);
        assert_eq!(t.final_config, vec![1, 1]);
        assert_eq!(t.final_consensus, None);
        assert!(t.in_bottom_scc);

        let p = threshold2();
        for seed in 0..20 {
            let t = simulate_fair(&p, &cfg(&[3, 0]), 1000, seed, &opts).unwrap();
            assert_eq!(t.final_config, vec![0, 3]);
            assert_eq!(t.stabilized, Some(1));
        }
        let a = simulate_fair(&p, &cfg(&[5, 0]), 3, 42, &opts).unwrap();
        let b = simulate_fair(&p, &cfg(&[5, 0]), 3, 42, &opts).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bottom_scc_members_reach_exactly_their_component() {
        let scheme = ProtocolScheme::from_names(
            &["a", "b", "c"],
            &[
                ["a", "c", "b", "c"],
                ["b", "c", "a", "c"],
                ["a", "b", "b", "b"],
            ],
        )
        .unwrap();
        let opts = OracleOptions::default();
        let g = ConfigGraph::full(&scheme, 4, &opts).unwrap();
        let sccs = g.sccs();
        for comp in &sccs {
            let members: BTreeSet<Vec<u64>> = comp.iter().map(|&v| g.nodes()[v].clone()).collect();
            let is_bottom = comp
                .iter()
                .all(|&v| g.edges(v).iter().all(|(w, _)| comp.contains(w)));
            if is_bottom {
                for m in &members {
                    let reach =
                        post_star_explicit(&scheme, std::slice::from_ref(m), &opts).unwrap();
                    assert_eq!(reach, members);
                }
            }
        }
    }
}

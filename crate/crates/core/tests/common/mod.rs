//! Brute-force reference implementations shared by the integration tests.
//! Nothing here calls into the symbolic engine or the library oracle.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, VecDeque};

use iopv_core::constraint::{Bound, CountingConstraint, Minterm};
use iopv_core::protocol::{PopulationProtocol, ProtocolScheme, Transition};
use rand::Rng;

/// All vectors of length `n` with entries summing to `total`.
pub fn configs(n: usize, total: u64) -> Vec<Vec<u64>> {
    fn go(i: usize, left: u64, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if i + 1 == cur.len() {
            cur[i] = left;
            out.push(cur.clone());
            return;
        }
        for k in 0..=left {
            cur[i] = k;
            go(i + 1, left - k, cur, out);
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        go(0, total, &mut vec![0; n], &mut out);
    }
    out
}

/// All vectors in `[0, bound]^n`.
pub fn box_points(n: usize, bound: u64) -> Vec<Vec<u64>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v: Vec<u64>| {
                (0..=bound).map(move |k| {
                    let mut w = v.clone();
                    w.push(k);
                    w
                })
            })
            .collect();
    }
    out
}

pub fn in_minterm(m: &Minterm, v: &[u64]) -> bool {
    v.iter()
        .zip(m.lower().iter().zip(m.upper()))
        .all(|(&x, (&l, u))| x >= l && u.finite().is_none_or(|u| x <= u))
}

pub fn member(g: &CountingConstraint, v: &[u64]) -> bool {
    g.minterms().iter().any(|m| in_minterm(m, v))
}

/// One step of a raw multiset rewrite.
pub fn apply(c: &[u64], t: &Transition) -> Option<Vec<u64>> {
    let mut next = c.to_vec();
    for &q in &t.pre {
        if next[q] == 0 {
            return None;
        }
        next[q] -= 1;
    }
    for &q in &t.post {
        next[q] += 1;
    }
    Some(next)
}

pub fn successors(c: &[u64], ts: &[Transition]) -> Vec<Vec<u64>> {
    let mut out: Vec<Vec<u64>> = ts
        .iter()
        .filter_map(|t| apply(c, t))
        .filter(|d| d != c)
        .collect();
    out.sort();
    out.dedup();
    out
}

pub fn bfs(seeds: &[Vec<u64>], ts: &[Transition]) -> BTreeSet<Vec<u64>> {
    let mut seen: BTreeSet<Vec<u64>> = seeds.iter().cloned().collect();
    let mut queue: VecDeque<Vec<u64>> = seeds.iter().cloned().collect();
    while let Some(c) = queue.pop_front() {
        for d in successors(&c, ts) {
            if seen.insert(d.clone()) {
                queue.push_back(d);
            }
        }
    }
    seen
}

pub fn reversed(ts: &[Transition]) -> Vec<Transition> {
    ts.iter().map(|t| t.reversed()).collect()
}

fn consensus(outputs: &[u8], c: &[u64]) -> Option<u8> {
    let mut seen = [false; 2];
    for (q, &k) in c.iter().enumerate() {
        if k > 0 {
            seen[outputs[q] as usize] = true;
        }
    }
    match seen {
        [true, false] => Some(0),
        [false, true] => Some(1),
        _ => None,
    }
}

/// Stable value of every configuration in `inits` (all of one size), by
/// quadratic reachability on the explored graph. `None` means some fair run
/// never settles or two runs settle differently.
pub fn stable_values(outputs: &[u8], ts: &[Transition], inits: &[Vec<u64>]) -> Vec<Option<u8>> {
    let nodes: Vec<Vec<u64>> = bfs(inits, ts).into_iter().collect();
    let index: HashMap<&[u64], usize> = nodes
        .iter()
        .enumerate()
        .map(|(i, c)| (c.as_slice(), i))
        .collect();
    let succ: Vec<Vec<usize>> = nodes
        .iter()
        .map(|c| {
            successors(c, ts)
                .iter()
                .map(|d| index[d.as_slice()])
                .collect()
        })
        .collect();
    let reach: Vec<Vec<bool>> = (0..nodes.len())
        .map(|s| {
            let mut seen = vec![false; nodes.len()];
            seen[s] = true;
            let mut stack = vec![s];
            while let Some(v) = stack.pop() {
                for &w in &succ[v] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            seen
        })
        .collect();
    let bottom: Vec<bool> = (0..nodes.len())
        .map(|v| (0..nodes.len()).all(|w| !reach[v][w] || reach[w][v]))
        .collect();
    // Value of the bottom component containing v: uniform consensus or none.
    let bottom_value = |v: usize| -> Option<u8> {
        let mut value = None;
        for w in 0..nodes.len() {
            if reach[v][w] {
                let c = consensus(outputs, &nodes[w])?;
                if value.is_some_and(|b| b != c) {
                    return None;
                }
                value = Some(c);
            }
        }
        value
    };
    inits
        .iter()
        .map(|c| {
            let s = index[c.as_slice()];
            let mut value = None;
            for v in 0..nodes.len() {
                if reach[s][v] && bottom[v] {
                    let b = bottom_value(v)?;
                    if value.is_some_and(|x| x != b) {
                        return None;
                    }
                    value = Some(b);
                }
            }
            value
        })
        .collect()
}

/// Input configurations of the given size: agents only in input states.
pub fn input_configs(p: &PopulationProtocol, size: u64) -> Vec<Vec<u64>> {
    let inputs: Vec<usize> = p.inputs().iter().map(|&(_, q)| q).collect();
    configs(inputs.len(), size)
        .into_iter()
        .map(|x| {
            let mut c = vec![0; p.num_states()];
            for (&q, &k) in inputs.iter().zip(&x) {
                c[q] = k;
            }
            c
        })
        .collect()
}

pub fn outputs_of(p: &PopulationProtocol) -> Vec<u8> {
    (0..p.num_states()).map(|q| p.output(q)).collect()
}

pub fn state_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("q{i}")).collect()
}

/// A random minterm with constants at most `max_const`.
pub fn random_minterm(rng: &mut impl Rng, n: usize, max_const: u64) -> Minterm {
    let mut lower = Vec::with_capacity(n);
    let mut upper = Vec::with_capacity(n);
    for _ in 0..n {
        let l = rng.random_range(0..=max_const);
        lower.push(l);
        upper.push(if rng.random_bool(0.5) {
            Bound::Inf
        } else {
            Bound::Fin(rng.random_range(l..=max_const))
        });
    }
    Minterm::new(lower, upper).expect("well-formed")
}

/// A random minterm that may have crossed bounds.
pub fn random_raw_minterm(rng: &mut impl Rng, n: usize, max_const: u64) -> Minterm {
    let lower: Vec<u64> = (0..n).map(|_| rng.random_range(0..=max_const)).collect();
    let upper: Vec<Bound> = (0..n)
        .map(|_| {
            if rng.random_bool(0.4) {
                Bound::Inf
            } else {
                Bound::Fin(rng.random_range(0..=max_const))
            }
        })
        .collect();
    Minterm::new(lower, upper).expect("well-formed")
}

pub fn random_constraint(
    rng: &mut impl Rng,
    n: usize,
    max_const: u64,
    max_minterms: usize,
) -> CountingConstraint {
    let k = rng.random_range(0..=max_minterms);
    let ms = (0..k)
        .map(|_| random_raw_minterm(rng, n, max_const))
        .collect();
    CountingConstraint::new(n, ms).expect("well-formed")
}

/// A random IO interaction `(source, observed) -> (dest, observed)` with
/// `source != dest`.
pub fn random_io(rng: &mut impl Rng, n: usize, allow_self: bool) -> Transition {
    loop {
        let s = rng.random_range(0..n);
        let o = rng.random_range(0..n);
        let d = rng.random_range(0..n);
        if s == d || (!allow_self && s == o) {
            continue;
        }
        return if rng.random_bool(0.5) {
            Transition::new(s, o, d, o)
        } else {
            Transition::new(o, s, o, d)
        };
    }
}

pub fn random_scheme(
    rng: &mut impl Rng,
    max_states: usize,
    max_trans: usize,
    allow_self: bool,
) -> ProtocolScheme {
    let n = rng.random_range(2..=max_states);
    let k = rng.random_range(1..=max_trans);
    let ts = (0..k).map(|_| random_io(rng, n, allow_self)).collect();
    ProtocolScheme::new(state_names(n), ts).expect("valid scheme")
}

/// Random outputs and one or two input states on top of `scheme`.
pub fn random_protocol(rng: &mut impl Rng, scheme: ProtocolScheme) -> PopulationProtocol {
    let n = scheme.num_states();
    let outputs: Vec<u8> = (0..n).map(|_| rng.random_range(0..=1)).collect();
    let k = rng.random_range(1..=2.min(n));
    let mut states: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.random_range(i..n);
        states.swap(i, j);
    }
    let inputs = states[..k]
        .iter()
        .enumerate()
        .map(|(i, &q)| (format!("x{i}"), q))
        .collect();
    PopulationProtocol::new("random", scheme, inputs, outputs).expect("valid protocol")
}

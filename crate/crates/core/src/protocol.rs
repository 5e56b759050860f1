//! Population protocols with immediate-observation transitions.
//!
//! States are referred to by index into [`ProtocolScheme::states`]. A raw
//! transition `(q1, q2) -> (q1', q2')` acts on multisets, so the order of
//! the two agents on each side carries no meaning.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use crate::constraint::{Bound, CountingConstraint, Minterm};
use crate::error::{Error, Result};

pub type StateId = usize;

/// A raw interaction `(pre[0], pre[1]) -> (post[0], post[1])`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Transition {
    pub pre: [StateId; 2],
    pub post: [StateId; 2],
}

impl Transition {
    pub fn new(q1: StateId, q2: StateId, q1p: StateId, q2p: StateId) -> Self {
        Transition {
            pre: [q1, q2],
            post: [q1p, q2p],
        }
    }

    pub fn reversed(self) -> Self {
        Transition {
            pre: self.post,
            post: self.pre,
        }
    }

    /// Splits the interaction into observer source, observed agent and
    /// destination, or returns `None` if no agent is left unchanged.
    pub fn classify(self, origin: usize) -> Option<IoTransition> {
        let [a, b] = self.pre;
        let [c, d] = self.post;
        let (observed, source, dest) = if a == c {
            (a, b, d)
        } else if a == d {
            (a, b, c)
        } else if b == c {
            (b, a, d)
        } else if b == d {
            (b, a, c)
        } else {
            return None;
        };
        Some(IoTransition {
            source,
            observed,
            dest,
            origin,
        })
    }
}

/// `(source, observed) -> (dest, observed)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct IoTransition {
    pub source: StateId,
    pub observed: StateId,
    pub dest: StateId,
    /// Index of the raw transition this was derived from.
    pub origin: usize,
}

impl IoTransition {
    /// The interaction does not change the configuration.
    pub fn is_noop(&self) -> bool {
        self.source == self.dest
    }

    /// The observer observes an agent in its own state.
    pub fn is_self_observation(&self) -> bool {
        self.source == self.observed && !self.is_noop()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProtocolScheme {
    states: Vec<String>,
    transitions: Vec<Transition>,
}

impl ProtocolScheme {
    pub fn new(states: Vec<String>, transitions: Vec<Transition>) -> Result<Self> {
        let mut seen = HashSet::new();
        for s in &states {
            if !seen.insert(s.as_str()) {
                return Err(Error::InvalidProtocol(format!("duplicate state `{s}`")));
            }
        }
        if states.is_empty() {
            return Err(Error::InvalidProtocol("no states declared".into()));
        }
        for t in &transitions {
            for &q in t.pre.iter().chain(&t.post) {
                if q >= states.len() {
                    return Err(Error::UndeclaredState(format!("#{q}")));
                }
            }
        }
        Ok(ProtocolScheme {
            states,
            transitions,
        })
    }

    /// Builds a scheme from state names and named 4-tuples.
    pub fn from_names(states: &[&str], transitions: &[[&str; 4]]) -> Result<Self> {
        let states: Vec<String> = states.iter().map(|s| s.to_string()).collect();
        let lookup = |n: &str| {
            states
                .iter()
                .position(|s| s == n)
                .ok_or_else(|| Error::UndeclaredState(n.to_string()))
        };
        let transitions = transitions
            .iter()
            .map(|[a, b, c, d]| {
                Ok(Transition::new(
                    lookup(a)?,
                    lookup(b)?,
                    lookup(c)?,
                    lookup(d)?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        ProtocolScheme::new(states, transitions)
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.states.iter().position(|s| s == name)
    }

    pub fn state_name(&self, id: StateId) -> &str {
        &self.states[id]
    }

    /// Classifies every transition, failing on the first non-IO one.
    pub fn io_transitions(&self) -> Result<Vec<IoTransition>> {
        self.transitions
            .iter()
            .enumerate()
            .map(|(i, t)| {
                t.classify(i)
                    .ok_or(Error::NotImmediateObservation { index: i })
            })
            .collect()
    }

    pub fn is_io(&self) -> bool {
        self.transitions.iter().all(|t| t.classify(0).is_some())
    }

    /// IO and free of self-observation.
    pub fn is_normal_form(&self) -> bool {
        self.io_transitions()
            .map(|ts| ts.iter().all(|t| !t.is_self_observation()))
            .unwrap_or(false)
    }

    pub fn reverse(&self) -> ProtocolScheme {
        ProtocolScheme {
            states: self.states.clone(),
            transitions: self.transitions.iter().map(|t| t.reversed()).collect(),
        }
    }

    /// Applies `t` to `counts`; `None` if the two required agents are absent.
    pub fn step(counts: &[u64], t: &Transition) -> Option<Vec<u64>> {
        let [a, b] = t.pre;
        let need_ok = if a == b {
            counts[a] >= 2
        } else {
            counts[a] >= 1 && counts[b] >= 1
        };
        if !need_ok {
            return None;
        }
        let mut next = counts.to_vec();
        next[a] -= 1;
        next[b] -= 1;
        next[t.post[0]] += 1;
        next[t.post[1]] += 1;
        Some(next)
    }
}

/// A population: agent counts per state, at least two agents in total.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration(Vec<u64>);

impl Configuration {
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        let total = counts
            .iter()
            .try_fold(0u64, |a, &b| a.checked_add(b))
            .ok_or(Error::Overflow)?;
        if total < 2 {
            return Err(Error::InvalidConfiguration(format!(
                "populations need at least two agents, got {total}"
            )));
        }
        Ok(Configuration(counts))
    }

    pub fn counts(&self) -> &[u64] {
        &self.0
    }

    pub fn into_counts(self) -> Vec<u64> {
        self.0
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }

    pub fn step(&self, t: &Transition) -> Option<Configuration> {
        ProtocolScheme::step(&self.0, t).map(Configuration)
    }

    /// `state:count` pairs for the nonzero entries.
    pub fn display<'a>(&'a self, states: &'a [String]) -> impl fmt::Display + 'a {
        DisplayCounts {
            counts: &self.0,
            states,
        }
    }
}

pub(crate) struct DisplayCounts<'a> {
    pub counts: &'a [u64],
    pub states: &'a [String],
}

impl fmt::Display for DisplayCounts<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (s, &c) in self.states.iter().zip(self.counts) {
            if c == 0 {
                continue;
            }
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            write!(f, "{s}:{c}")?;
        }
        if first {
            f.write_str("(empty)")?;
        }
        Ok(())
    }
}

/// Output value of a state.
pub type Output = u8;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PopulationProtocol {
    pub name: String,
    scheme: ProtocolScheme,
    /// Input variable name and the state it places agents in.
    inputs: Vec<(String, StateId)>,
    outputs: Vec<Output>,
}

impl PopulationProtocol {
    pub fn new(
        name: impl Into<String>,
        scheme: ProtocolScheme,
        inputs: Vec<(String, StateId)>,
        outputs: Vec<Output>,
    ) -> Result<Self> {
        if outputs.len() != scheme.num_states() {
            return Err(Error::InvalidProtocol(format!(
                "{} outputs for {} states",
                outputs.len(),
                scheme.num_states()
            )));
        }
        if let Some(&o) = outputs.iter().find(|&&o| o > 1) {
            return Err(Error::InvalidProtocol(format!("output {o} is not 0 or 1")));
        }
        let mut vars = HashSet::new();
        let mut targets = HashSet::new();
        for (v, q) in &inputs {
            if *q >= scheme.num_states() {
                return Err(Error::UndeclaredState(format!("#{q}")));
            }
            if !vars.insert(v.as_str()) {
                return Err(Error::InvalidProtocol(format!(
                    "duplicate input variable `{v}`"
                )));
            }
            if !targets.insert(*q) {
                return Err(Error::InvalidProtocol(format!(
                    "input map is not injective at state `{}`",
                    scheme.state_name(*q)
                )));
            }
        }
        Ok(PopulationProtocol {
            name: name.into(),
            scheme,
            inputs,
            outputs,
        })
    }

    pub fn scheme(&self) -> &ProtocolScheme {
        &self.scheme
    }

    pub fn states(&self) -> &[String] {
        self.scheme.states()
    }

    pub fn num_states(&self) -> usize {
        self.scheme.num_states()
    }

    pub fn inputs(&self) -> &[(String, StateId)] {
        &self.inputs
    }

    pub fn input_vars(&self) -> Vec<String> {
        self.inputs.iter().map(|(v, _)| v.clone()).collect()
    }

    pub fn outputs(&self) -> &[Output] {
        &self.outputs
    }

    pub fn output(&self, q: StateId) -> Output {
        self.outputs[q]
    }

    /// The value `b` if every agent in `counts` has output `b`.
    pub fn consensus_of(&self, counts: &[u64]) -> Option<Output> {
        let mut seen = [false; 2];
        for (q, &c) in counts.iter().enumerate() {
            if c > 0 {
                seen[self.outputs[q] as usize] = true;
            }
        }
        match seen {
            [true, false] => Some(0),
            [false, true] => Some(1),
            _ => None,
        }
    }

    /// Initial configurations: agents only in input states, at least two of
    /// them. The total bound is encoded by the upward-closed minterms with
    /// two agents in one input state or one agent in each of two.
    pub fn initial_constraint(&self) -> Result<CountingConstraint> {
        if self.inputs.is_empty() {
            return Err(Error::NoInputs);
        }
        let n = self.num_states();
        let mut base = Minterm::full(n);
        for q in 0..n {
            if !self.inputs.iter().any(|&(_, s)| s == q) {
                base.set_upper(q, Bound::Fin(0));
            }
        }
        let ids: Vec<StateId> = self.inputs.iter().map(|&(_, q)| q).collect();
        let mut minterms = Vec::new();
        for (i, &a) in ids.iter().enumerate() {
            let mut m = base.clone();
            m.set_lower(a, 2);
            minterms.push(m);
            for &b in &ids[i + 1..] {
                let mut m = base.clone();
                m.set_lower(a, 1);
                m.set_lower(b, 1);
                minterms.push(m);
            }
        }
        CountingConstraint::new(n, minterms)
    }

    /// Configurations with no agent of output `1 - b`.
    pub fn consensus_constraint(&self, b: Output) -> CountingConstraint {
        let n = self.num_states();
        let mut m = Minterm::full(n);
        for q in 0..n {
            if self.outputs[q] != b {
                m.set_upper(q, Bound::Fin(0));
            }
        }
        CountingConstraint::from_minterm(m)
    }

    /// Maps a predicate over input variables to the corresponding set of
    /// initial configurations.
    pub fn predicate_to_state_constraint(
        &self,
        pred: &CountingConstraint,
    ) -> Result<CountingConstraint> {
        if pred.dim() != self.inputs.len() {
            return Err(Error::DimensionMismatch {
                left: pred.dim(),
                right: self.inputs.len(),
            });
        }
        let n = self.num_states();
        let mut base = Minterm::full(n);
        for q in 0..n {
            if !self.inputs.iter().any(|&(_, s)| s == q) {
                base.set_upper(q, Bound::Fin(0));
            }
        }
        let mapped = pred
            .minterms()
            .iter()
            .map(|m| {
                let mut out = base.clone();
                for (j, &(_, q)) in self.inputs.iter().enumerate() {
                    out.set_lower(q, m.lower()[j]);
                    out.set_upper(q, m.upper()[j]);
                }
                out
            })
            .collect();
        CountingConstraint::new(n, mapped)?.intersect(&self.initial_constraint()?)
    }

    /// Input-variable counts of a configuration.
    pub fn input_population(&self, counts: &[u64]) -> Vec<(String, u64)> {
        self.inputs
            .iter()
            .map(|(v, q)| (v.clone(), counts[*q]))
            .collect()
    }

    /// Rewrites the protocol so that no transition has an observer
    /// observing its own state.
    pub fn normalize(&self) -> Result<Normalized> {
        let io = self.scheme.io_transitions()?;
        let n = self.num_states();
        if io.iter().all(|t| !t.is_self_observation()) {
            return Ok(Normalized {
                protocol: self.clone(),
                initial: self.initial_constraint().ok(),
                origins: (0..n).map(StateOrigin::Original).collect(),
            });
        }

        let mut names: Vec<String> = self.states().to_vec();
        let mut taken: HashSet<String> = names.iter().cloned().collect();
        let mut fresh = |base: String, names: &mut Vec<String>| -> StateId {
            let mut name = base;
            while taken.contains(&name) {
                name.push('_');
            }
            taken.insert(name.clone());
            names.push(name);
            names.len() - 1
        };
        let mut origins: Vec<StateOrigin> = (0..n).map(StateOrigin::Original).collect();

        let r = fresh("r".into(), &mut names);
        origins.push(StateOrigin::Helper);
        let sources: BTreeSet<StateId> = io
            .iter()
            .filter(|t| t.is_self_observation())
            .map(|t| t.source)
            .collect();
        let mut primed = vec![None; n];
        for &q in &sources {
            let id = fresh(format!("{}'", self.states()[q]), &mut names);
            origins.push(StateOrigin::Primed(q));
            primed[q] = Some(id);
        }
        let r_prime = fresh("r'".into(), &mut names);
        origins.push(StateOrigin::HelperPrime);

        let mut transitions = Vec::new();
        for (raw, t) in self.scheme.transitions().iter().zip(&io) {
            if t.is_self_observation() {
                let qp = primed[t.source].expect("primed copy exists");
                transitions.push(Transition::new(qp, t.source, qp, t.dest));
            } else {
                transitions.push(*raw);
            }
        }
        for &q in &sources {
            let qp = primed[q].expect("primed copy exists");
            for helper in [r, r_prime] {
                transitions.push(Transition::new(q, helper, helper, qp));
                transitions.push(Transition::new(qp, helper, helper, q));
            }
        }
        let mut outputs = self.outputs.clone();
        outputs.push(0); // r
        outputs.extend(sources.iter().map(|&q| self.outputs[q]));
        outputs.push(1); // r'
        for q in 0..n {
            if self.outputs[q] == 1 {
                transitions.push(Transition::new(q, r, q, r_prime));
            } else {
                transitions.push(Transition::new(q, r_prime, q, r));
            }
        }

        let scheme = ProtocolScheme::new(names, transitions)?;
        let protocol =
            PopulationProtocol::new(self.name.clone(), scheme, self.inputs.clone(), outputs)?;
        let mut normalized = Normalized {
            protocol,
            initial: None,
            origins,
        };
        normalized.initial = match self.initial_constraint() {
            Ok(init) => Some(normalized.lift(&init)?),
            Err(Error::NoInputs) => None,
            Err(e) => return Err(e),
        };
        Ok(normalized)
    }
}

/// Where a state of a normalized protocol comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StateOrigin {
    Original(StateId),
    Primed(StateId),
    /// The helper agent's state `r`.
    Helper,
    /// The helper agent's alternate state `r'`.
    HelperPrime,
}

/// Result of [`PopulationProtocol::normalize`].
#[derive(Clone, Debug)]
pub struct Normalized {
    pub protocol: PopulationProtocol,
    /// Initial set of the normalized protocol; `None` without input states.
    pub initial: Option<CountingConstraint>,
    pub origins: Vec<StateOrigin>,
}

impl Normalized {
    pub fn changed(&self) -> bool {
        self.origins
            .iter()
            .any(|o| !matches!(o, StateOrigin::Original(_)))
    }

    pub fn num_original(&self) -> usize {
        self.origins
            .iter()
            .filter(|o| matches!(o, StateOrigin::Original(_)))
            .count()
    }

    /// Extends a constraint over the original states: one agent in `r`, none
    /// in `r'` or in primed copies.
    pub fn lift(&self, g: &CountingConstraint) -> Result<CountingConstraint> {
        let n = self.num_original();
        if g.dim() != n {
            return Err(Error::DimensionMismatch {
                left: g.dim(),
                right: n,
            });
        }
        if !self.changed() {
            return Ok(g.clone());
        }
        let dim = self.origins.len();
        let extra: Vec<Bound> = self.origins[n..]
            .iter()
            .map(|o| match o {
                StateOrigin::Helper => Bound::Fin(1),
                _ => Bound::Fin(0),
            })
            .collect();
        let minterms = g
            .minterms()
            .iter()
            .map(|m| {
                let mut lower = m.lower().to_vec();
                let mut upper = m.upper().to_vec();
                lower.extend(extra.iter().map(|b| b.finite().unwrap_or(0)));
                upper.extend(extra.iter().copied());
                Minterm::new(lower, upper)
            })
            .collect::<Result<Vec<_>>>()?;
        CountingConstraint::new(dim, minterms)
    }

    /// Lifts a configuration over the original states.
    pub fn lift_point(&self, counts: &[u64]) -> Vec<u64> {
        self.origins
            .iter()
            .map(|o| match o {
                StateOrigin::Original(q) => counts[*q],
                StateOrigin::Helper => 1,
                _ => 0,
            })
            .collect()
    }

    /// Folds primed copies back onto their originals; returns the original
    /// counts and the number of agents in `r` and `r'`.
    pub fn project(&self, counts: &[u64]) -> (Vec<u64>, u64, u64) {
        let mut orig = vec![0; self.num_original()];
        let (mut r, mut rp) = (0, 0);
        for (o, &c) in self.origins.iter().zip(counts) {
            match o {
                StateOrigin::Original(q) | StateOrigin::Primed(q) => orig[*q] += c,
                StateOrigin::Helper => r += c,
                StateOrigin::HelperPrime => rp += c,
            }
        }
        (orig, r, rp)
    }
}

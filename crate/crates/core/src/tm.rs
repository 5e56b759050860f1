//! Linear-bounded Turing machines encoded as IO protocols.
//!
//! The generated protocol tracks the machine configuration with one agent
//! for the control state, one for the head position and one per tape cell,
//! plus a controller agent that guesses and executes transitions. Agents that
//! break this shape are turned into zombies, which spread. Every state
//! outputs 1 except the accepting control state, so the protocol started in
//! the encoded initial configuration is ill-specified exactly when the
//! machine accepts.

use std::collections::{HashMap, HashSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::oracle::{OracleOptions, Stabilization};
use crate::protocol::{Configuration, PopulationProtocol, ProtocolScheme, StateId, Transition};
use crate::text::is_valid_name;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Move {
    L,
    R,
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Move::L => "L",
            Move::R => "R",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TmTransition {
    pub state: String,
    pub read: String,
    pub next: String,
    pub write: String,
    pub mv: Move,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TuringMachine {
    pub name: String,
    pub states: Vec<String>,
    pub input_alphabet: Vec<String>,
    pub tape_alphabet: Vec<String>,
    pub init: String,
    pub accept: String,
    pub reject: String,
    pub delta: Vec<TmTransition>,
    /// Default input word, one symbol per cell.
    pub input: Option<Vec<String>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Accept,
    Reject,
    /// No transition applies, or the head would leave the tape.
    Stuck,
    /// A configuration repeats.
    Loop,
}

impl TuringMachine {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidMachine(msg));
        let mut seen = HashSet::new();
        for s in &self.states {
            if !is_valid_name(s) {
                return bad(format!("invalid state name `{s}`"));
            }
            if !seen.insert(s.as_str()) {
                return bad(format!("duplicate state `{s}`"));
            }
        }
        let mut symbols = HashSet::new();
        for a in &self.tape_alphabet {
            if !is_valid_name(a) {
                return bad(format!("invalid symbol `{a}`"));
            }
            if !symbols.insert(a.as_str()) {
                return bad(format!("duplicate symbol `{a}`"));
            }
        }
        if let Some(a) = self
            .input_alphabet
            .iter()
            .find(|a| !symbols.contains(a.as_str()))
        {
            return bad(format!("input symbol `{a}` is not a tape symbol"));
        }
        for (what, q) in [
            ("initial", &self.init),
            ("accepting", &self.accept),
            ("rejecting", &self.reject),
        ] {
            if !seen.contains(q.as_str()) {
                return bad(format!("{what} state `{q}` is not declared"));
            }
        }
        if self.accept == self.reject {
            return bad("accepting and rejecting states coincide".into());
        }
        let mut keys = HashSet::new();
        for t in &self.delta {
            for q in [&t.state, &t.next] {
                if !seen.contains(q.as_str()) {
                    return bad(format!("transition uses undeclared state `{q}`"));
                }
            }
            for a in [&t.read, &t.write] {
                if !symbols.contains(a.as_str()) {
                    return bad(format!("transition uses unknown symbol `{a}`"));
                }
            }
            if t.state == self.accept || t.state == self.reject {
                return bad(format!(
                    "halting state `{}` has an outgoing transition",
                    t.state
                ));
            }
            if !keys.insert((t.state.as_str(), t.read.as_str())) {
                return bad(format!("nondeterministic on `{} {}`", t.state, t.read));
            }
        }
        if let Some(w) = &self.input {
            self.check_input(w)?;
        }
        Ok(())
    }

    fn check_input(&self, input: &[String]) -> Result<()> {
        if input.is_empty() {
            return Err(Error::InvalidMachine("input word is empty".into()));
        }
        if let Some(a) = input.iter().find(|a| !self.input_alphabet.contains(a)) {
            return Err(Error::InvalidMachine(format!(
                "`{a}` is not an input symbol"
            )));
        }
        Ok(())
    }

    fn lookup(&self, q: &str, a: &str) -> Option<&TmTransition> {
        self.delta.iter().find(|t| t.state == q && t.read == a)
    }

    /// Runs the machine on `input` with the tape limited to the input cells.
    ///
    /// Entering a halting state decides the run even when the same move
    /// would leave the tape.
    pub fn run(&self, input: &[String]) -> Result<Outcome> {
        self.validate()?;
        self.check_input(input)?;
        let mut state = self.init.clone();
        let mut head = 0usize;
        let mut tape = input.to_vec();
        let mut visited = HashSet::new();
        loop {
            if state == self.accept {
                return Ok(Outcome::Accept);
            }
            if state == self.reject {
                return Ok(Outcome::Reject);
            }
            if !visited.insert((state.clone(), head, tape.clone())) {
                return Ok(Outcome::Loop);
            }
            let Some(t) = self.lookup(&state, &tape[head]) else {
                return Ok(Outcome::Stuck);
            };
            state = t.next.clone();
            tape[head] = t.write.clone();
            if state == self.accept {
                return Ok(Outcome::Accept);
            }
            if state == self.reject {
                return Ok(Outcome::Reject);
            }
            head = match t.mv {
                Move::L if head > 0 => head - 1,
                Move::R if head + 1 < tape.len() => head + 1,
                _ => return Ok(Outcome::Stuck),
            };
        }
    }
}

/// What a state of a generated protocol stands for.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Role {
    Control(String),
    /// Head position, 1-based.
    Head(usize),
    /// Symbol and 1-based cell index.
    Cell(String, usize),
    /// Controller states, including `start`.
    Controller,
    Zombie,
}

impl Role {
    /// States in the same class must not be occupied by two agents.
    fn class(&self) -> Option<(u8, usize)> {
        match self {
            Role::Control(_) => Some((0, 0)),
            Role::Head(_) => Some((1, 0)),
            Role::Controller => Some((2, 0)),
            Role::Cell(_, i) => Some((3, *i)),
            Role::Zombie => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GeneratedInstance {
    pub protocol: PopulationProtocol,
    pub initial: Configuration,
    pub good_size: u64,
    pub roles: Vec<Role>,
    pub accept_state: StateId,
}

struct Builder {
    names: Vec<String>,
    roles: Vec<Role>,
    index: HashMap<String, StateId>,
    rules: Vec<Transition>,
}

impl Builder {
    fn state(&mut self, name: String, role: Role) -> Result<StateId> {
        if self.index.contains_key(&name) {
            return Err(Error::InvalidMachine(format!(
                "generated state name `{name}` collides"
            )));
        }
        self.index.insert(name.clone(), self.names.len());
        self.names.push(name);
        self.roles.push(role);
        Ok(self.names.len() - 1)
    }

    /// Agent in `source` observes `observed` and moves to `dest`.
    fn observe(&mut self, source: StateId, observed: StateId, dest: StateId) {
        self.rules
            .push(Transition::new(source, observed, dest, observed));
    }
}

/// Builds the protocol simulating `tm` on `input`.
pub fn encode_tm(tm: &TuringMachine, input: &[String]) -> Result<GeneratedInstance> {
    tm.validate()?;
    tm.check_input(input)?;
    let n = input.len();
    let mut b = Builder {
        names: Vec::new(),
        roles: Vec::new(),
        index: HashMap::new(),
        rules: Vec::new(),
    };

    let mut control = HashMap::new();
    for q in &tm.states {
        control.insert(
            q.as_str(),
            b.state(format!("s_{q}"), Role::Control(q.clone()))?,
        );
    }
    let heads: Vec<StateId> = (1..=n)
        .map(|i| b.state(format!("h{i}"), Role::Head(i)))
        .collect::<Result<_>>()?;
    let mut cell = HashMap::new();
    for i in 1..=n {
        for a in &tm.tape_alphabet {
            cell.insert(
                (a.as_str(), i),
                b.state(format!("c_{a}_{i}"), Role::Cell(a.clone(), i))?,
            );
        }
    }
    let start = b.state("start".into(), Role::Controller)?;

    for (j, t) in tm.delta.iter().enumerate() {
        let tj = b.state(format!("t{j}"), Role::Controller)?;
        let q = control[t.state.as_str()];
        let q_next = control[t.next.as_str()];
        // Step 1: guess a transition leaving the current control state.
        b.observe(start, q, tj);
        for i in 1..=n {
            let ti = b.state(format!("t{j}_{i}"), Role::Controller)?;
            // Step 2: record the head position.
            b.observe(tj, heads[i - 1], ti);
            let mut stage = HashMap::new();
            for a in &tm.tape_alphabet {
                let ta = b.state(format!("t{j}_{i}_{a}"), Role::Controller)?;
                let ta1 = b.state(format!("t{j}_{i}_{a}_1"), Role::Controller)?;
                let ta2 = b.state(format!("t{j}_{i}_{a}_2"), Role::Controller)?;
                stage.insert(a.as_str(), (ta, ta1, ta2));
            }
            // Step 3: check the scanned symbol, or give up the guess.
            for a in &tm.tape_alphabet {
                let c = cell[&(a.as_str(), i)];
                if *a == t.read {
                    b.observe(ti, c, stage[a.as_str()].0);
                } else {
                    b.observe(ti, c, start);
                }
            }
            let (ta, ta1, ta2) = stage[t.read.as_str()];
            // Step 4: the control agent switches state.
            if t.state != t.next {
                b.observe(q, ta, q_next);
            }
            // Step 5
            b.observe(ta, q_next, ta1);
            // Step 6: the scanned cell is rewritten.
            let read_cell = cell[&(t.read.as_str(), i)];
            let write_cell = cell[&(t.write.as_str(), i)];
            if t.read != t.write {
                b.observe(read_cell, ta1, write_cell);
            }
            // Step 7
            b.observe(ta1, write_cell, ta2);
            // Steps 8 and 9: move the head, then release the controller.
            let target = match t.mv {
                Move::L => i.checked_sub(1).filter(|&k| k >= 1),
                Move::R => Some(i + 1).filter(|&k| k <= n),
            };
            if let Some(k) = target {
                b.observe(heads[i - 1], ta2, heads[k - 1]);
                b.observe(ta2, heads[k - 1], start);
            }
        }
    }
    let zombie = b.state("zombie".into(), Role::Zombie)?;

    let count = b.names.len();
    for x in 0..count {
        let Some(cx) = b.roles[x].class() else {
            continue;
        };
        for y in x..count {
            if b.roles[y].class() != Some(cx) {
                continue;
            }
            b.observe(x, y, zombie);
            if x != y {
                b.observe(y, x, zombie);
            }
        }
    }
    for s in 0..count {
        if s != zombie {
            b.observe(s, zombie, zombie);
        }
    }

    let accept_state = control[tm.accept.as_str()];
    let outputs = (0..count).map(|s| u8::from(s != accept_state)).collect();
    let mut init = vec![0u64; count];
    init[control[tm.init.as_str()]] = 1;
    init[heads[0]] = 1;
    for (i, a) in input.iter().enumerate() {
        init[cell[&(a.as_str(), i + 1)]] = 1;
    }
    init[start] = 1;

    let scheme = ProtocolScheme::new(b.names, b.rules)?;
    let protocol = PopulationProtocol::new(tm.name.clone(), scheme, Vec::new(), outputs)?;
    Ok(GeneratedInstance {
        protocol,
        initial: Configuration::new(init)?,
        good_size: n as u64 + 3,
        roles: b.roles,
        accept_state,
    })
}

impl GeneratedInstance {
    /// One agent in each class, one per cell index, no zombie.
    pub fn is_good_for_simulation(&self, counts: &[u64]) -> bool {
        let mut per_class: HashMap<(u8, usize), u64> = HashMap::new();
        for (role, &c) in self.roles.iter().zip(counts) {
            match role.class() {
                Some(k) => *per_class.entry(k).or_default() += c,
                None if c > 0 => return false,
                None => {}
            }
        }
        let cells = self
            .roles
            .iter()
            .filter_map(|r| match r {
                Role::Cell(_, i) => Some(*i),
                _ => None,
            })
            .max()
            .unwrap_or(0);
        let mut expected: Vec<(u8, usize)> = vec![(0, 0), (1, 0), (2, 0)];
        expected.extend((1..=cells).map(|i| (3, i)));
        per_class.values().all(|&c| c <= 1) && expected.iter().all(|k| per_class.get(k) == Some(&1))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstanceReport {
    pub all_io: bool,
    pub good_initial: bool,
    pub oracle_nodes: usize,
    /// Some reachable configuration has an agent in the accepting state.
    pub reaches_accept: bool,
    /// Some reachable bottom SCC is not a uniform consensus.
    pub dissensus_bscc: bool,
}

impl InstanceReport {
    pub fn kv(&self) -> String {
        format!(
            "all_io={}\ngood_initial={}\noracle_nodes={}\nreaches_accept={}\ndissensus_bscc={}\n",
            self.all_io,
            self.good_initial,
            self.oracle_nodes,
            self.reaches_accept,
            self.dissensus_bscc
        )
    }
}

pub fn validate_instance(gi: &GeneratedInstance, opts: &OracleOptions) -> Result<InstanceReport> {
    let all_io = gi.protocol.scheme().is_io();
    let good_initial =
        gi.initial.total() == gi.good_size && gi.is_good_for_simulation(gi.initial.counts());
    let analysis = Stabilization::analyze(&gi.protocol, &[gi.initial.counts().to_vec()], opts)?;
    let graph = analysis.graph();
    Ok(InstanceReport {
        all_io,
        good_initial,
        oracle_nodes: graph.nodes().len(),
        reaches_accept: graph.nodes().iter().any(|c| c[gi.accept_state] > 0),
        dissensus_bscc: analysis.reaches_mixed_bottom(gi.initial.counts()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    fn tr(s: &str) -> TmTransition {
        let w = words(s);
        TmTransition {
            state: w[0].clone(),
            read: w[1].clone(),
            next: w[2].clone(),
            write: w[3].clone(),
            mv: if w[4] == "L" { Move::L } else { Move::R },
        }
    }

    fn machine(states: &str, delta: &[&str]) -> TuringMachine {
        TuringMachine {
            name: "m".into(),
            states: words(states),
            input_alphabet: words("0 1"),
            tape_alphabet: words("0 1"),
            init: "q0".into(),
            accept: "qa".into(),
            reject: "qr".into(),
            delta: delta.iter().map(|d| tr(d)).collect(),
            input: None,
        }
    }

    #[test]
    fn state_count() {
        let m = machine("q0 qa qr", &["q0 0 qa 0 R", "q0 1 qr 1 R"]);
        let gi = encode_tm(&m, &words("0")).unwrap();
        assert_eq!(gi.protocol.num_states(), 24);
        assert_eq!(gi.good_size, 4);
        assert_eq!(gi.initial.total(), 4);
        assert!(gi.protocol.scheme().is_io());
        assert!(gi.is_good_for_simulation(gi.initial.counts()));
    }

    #[test]
    fn validation_errors() {
        let mut m = machine("q0 qa qr", &["q0 0 qa 0 R", "q0 0 qr 1 R"]);
        assert!(matches!(m.validate(), Err(Error::InvalidMachine(_))));
        m.delta = vec![tr("qa 0 q0 0 R")];
        assert!(m.validate().is_err());
        m.delta = vec![];
        m.accept = "nope".into();
        assert!(m.validate().is_err());
        m.accept = "qr".into();
        assert!(m.validate().is_err());
    }

    #[test]
    fn direct_runs() {
        let m = machine("q0 qa qr", &["q0 0 qa 0 R", "q0 1 qr 1 R"]);
        assert_eq!(m.run(&words("0")).unwrap(), Outcome::Accept);
        assert_eq!(m.run(&words("1")).unwrap(), Outcome::Reject);
        let off = machine("q0 qa qr", &["q0 0 q0 0 R"]);
        assert_eq!(off.run(&words("0")).unwrap(), Outcome::Stuck);
        let loops = machine("q0 q1 qa qr", &["q0 0 q1 0 R", "q1 0 q0 0 L"]);
        assert_eq!(loops.run(&words("0 0")).unwrap(), Outcome::Loop);
        let rej = machine("q0 q1 qa qr", &["q0 0 q1 0 R", "q1 0 qr 0 L"]);
        assert_eq!(rej.run(&words("0 0")).unwrap(), Outcome::Reject);
    }

    #[test]
    fn oracle_sees_acceptance() {
        let opts = OracleOptions::default();
        let m = machine("q0 qa qr", &["q0 0 qa 0 R", "q0 1 qr 1 R"]);
        let acc = validate_instance(&encode_tm(&m, &words("0")).unwrap(), &opts).unwrap();
        assert!(acc.all_io && acc.good_initial && acc.reaches_accept && acc.dissensus_bscc);
        let rej = validate_instance(&encode_tm(&m, &words("1")).unwrap(), &opts).unwrap();
        assert!(rej.all_io && rej.good_initial && !rej.reaches_accept && !rej.dissensus_bscc);
    }

    #[test]
    fn zombies_take_over() {
        let m = machine("q0 qa qr", &["q0 0 qa 0 R", "q0 1 qr 1 R"]);
        let gi = encode_tm(&m, &words("0")).unwrap();
        let mut bad = gi.initial.counts().to_vec();
        bad[gi.accept_state] += 1;
        assert!(!gi.is_good_for_simulation(&bad));
        let a = Stabilization::analyze(&gi.protocol, &[bad.clone()], &OracleOptions::default())
            .unwrap();
        assert_eq!(a.value(&bad), Some(1));
        let zombie = gi.roles.iter().position(|r| *r == Role::Zombie).unwrap();
        for c in a.graph().nodes() {
            if a.in_bottom_scc(c) {
                assert_eq!(c[zombie], c.iter().sum::<u64>());
            }
        }
    }
}

//! Well-specification and correctness of IO protocols.
//!
//! A protocol is well-specified from an initial set `I` iff
//!
//! 1. every configuration reachable from `I` can reach `ST_0 ∪ ST_1`, and
//! 2. no configuration of `I` can reach both `ST_0` and `ST_1`,
//!
//! where `ST_b` is the set of stable `b`-consensuses. Everything is computed
//! on the normalized protocol, where acceleration is exact.
//!
//! When `I` is finite the closures are computed inside `R = post*(I)`
//! instead of the whole space. `R` is closed under successors, so
//! `pre*(X) ∩ R` only depends on `X ∩ R`, and every set the conditions look
//! at is intersected with `R` anyway.

use std::fmt;

use crate::constraint::CountingConstraint;
use crate::error::{Error, Result};
use crate::protocol::{DisplayCounts, Normalized, Output, PopulationProtocol, StateOrigin};
use crate::reach::{self, ReachOptions, ReachResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Strategy {
    /// Relative to the reachable set when the initial set is finite.
    #[default]
    Auto,
    Global,
    Reachable,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct DecisionOptions {
    pub reach: ReachOptions,
    pub strategy: Strategy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerdictKind {
    WellSpecified,
    IllSpecified,
    Correct,
    Incorrect,
}

impl VerdictKind {
    pub fn is_positive(self) -> bool {
        matches!(self, VerdictKind::WellSpecified | VerdictKind::Correct)
    }

    pub fn label(self) -> &'static str {
        match self {
            VerdictKind::WellSpecified => "WELL-SPECIFIED",
            VerdictKind::IllSpecified => "ILL-SPECIFIED",
            VerdictKind::Correct => "CORRECT",
            VerdictKind::Incorrect => "INCORRECT",
        }
    }

    fn key(self) -> &'static str {
        match self {
            VerdictKind::WellSpecified => "WELL_SPECIFIED",
            VerdictKind::IllSpecified => "ILL_SPECIFIED",
            VerdictKind::Correct => "CORRECT",
            VerdictKind::Incorrect => "INCORRECT",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Violation {
    /// A reachable configuration cannot reach any stable consensus.
    Condition1,
    /// An initial configuration can reach stable consensuses of both values.
    Condition2,
    /// The set stabilizing to 0 differs from the predicate's 0-set.
    WrongValue0,
    /// The set stabilizing to 1 differs from the predicate's 1-set.
    WrongValue1,
}

impl Violation {
    pub fn tag(self) -> &'static str {
        match self {
            Violation::Condition1 => "cond1",
            Violation::Condition2 => "cond2",
            Violation::WrongValue0 => "wrong_value_0",
            Violation::WrongValue1 => "wrong_value_1",
        }
    }

    fn describe(self) -> &'static str {
        match self {
            Violation::Condition1 => "condition 1",
            Violation::Condition2 => "condition 2",
            Violation::WrongValue0 => "wrong value 0",
            Violation::WrongValue1 => "wrong value 1",
        }
    }
}

/// A witness folded back onto the original states.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Projection {
    pub counts: Vec<u64>,
    pub helper: u64,
    pub helper_prime: u64,
}

#[derive(Clone, Debug)]
pub struct Verdict {
    pub kind: VerdictKind,
    pub violated: Option<Violation>,
    /// Witness over the normalized states.
    pub witness: Option<Vec<u64>>,
    /// Present when normalization added states.
    pub projection: Option<Projection>,
    /// Input population of the witness, for correctness verdicts.
    pub input: Option<Vec<(String, u64)>>,
    pub states: Vec<String>,
    pub original_states: Vec<String>,
    pub stats: Vec<(String, ReachResult)>,
    pub strategy: Strategy,
}

impl Verdict {
    fn new(kind: VerdictKind, core: &Core) -> Self {
        Verdict {
            kind,
            violated: None,
            witness: None,
            projection: None,
            input: None,
            states: core.norm.protocol.states().to_vec(),
            original_states: core.original_states.clone(),
            stats: core.stats.clone(),
            strategy: core.strategy,
        }
    }

    fn with_witness(mut self, violation: Violation, w: Vec<u64>, norm: &Normalized) -> Self {
        if norm.changed() {
            let (counts, helper, helper_prime) = norm.project(&w);
            self.projection = Some(Projection {
                counts,
                helper,
                helper_prime,
            });
        }
        self.violated = Some(violation);
        self.witness = Some(w);
        self
    }

    /// Witness counts over the original states.
    pub fn original_witness(&self) -> Option<Vec<u64>> {
        match (&self.projection, &self.witness) {
            (Some(p), _) => Some(p.counts.clone()),
            (None, Some(w)) => Some(w.clone()),
            _ => None,
        }
    }

    pub fn display_text(&self, with_stats: bool) -> String {
        let mut out = self.kind.label().to_string();
        if let Some(v) = self.violated {
            out.push_str(&format!(" ({})", v.describe()));
        }
        if let Some(input) = &self.input {
            out.push_str(" input ");
            out.push_str(&fmt_input(input));
        }
        if let Some(w) = &self.witness {
            out.push_str(&format!(
                " witness {}",
                DisplayCounts {
                    counts: w,
                    states: &self.states
                }
            ));
        }
        out.push('\n');
        if let Some(p) = &self.projection {
            out.push_str(&format!("projected {}\n", self.fmt_projection(p)));
        }
        if with_stats {
            for (name, r) in &self.stats {
                out.push_str(&format!(
                    "{name}: minterms={} iterations={} peak={} l_norm={} u_norm={}\n",
                    r.closure.len(),
                    r.iterations,
                    r.peak_minterms,
                    r.l_norm,
                    r.u_norm
                ));
            }
        }
        out
    }

    pub fn display_kv(&self, with_stats: bool) -> String {
        let mut out = format!("kind={}\n", self.kind.key());
        out.push_str(&format!(
            "violated_condition={}\n",
            self.violated.map_or("none", Violation::tag)
        ));
        if let Some(w) = &self.witness {
            out.push_str(&format!(
                "witness={}\n",
                DisplayCounts {
                    counts: w,
                    states: &self.states
                }
            ));
        }
        if let Some(p) = &self.projection {
            out.push_str(&format!("projection={}\n", self.fmt_projection(p)));
        }
        if let Some(input) = &self.input {
            out.push_str(&format!("input={}\n", fmt_input(input)));
        }
        if with_stats {
            out.push_str(&format!("strategy={:?}\n", self.strategy).to_lowercase());
            for (name, r) in &self.stats {
                out.push_str(&r.stats_kv(name));
            }
        }
        out
    }

    fn fmt_projection(&self, p: &Projection) -> String {
        let base = DisplayCounts {
            counts: &p.counts,
            states: &self.original_states,
        }
        .to_string();
        let mut parts = Vec::new();
        if !base.is_empty() {
            parts.push(base);
        }
        parts.push(format!("r:{}", p.helper));
        parts.push(format!("r':{}", p.helper_prime));
        parts.join(" ")
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_text(false))
    }
}

fn fmt_input(input: &[(String, u64)]) -> String {
    input
        .iter()
        .map(|(v, c)| format!("{v}={c}"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Stable `b`-consensuses of a normal-form protocol, without the
/// configurations of fewer than two agents.
pub fn stable_set(
    p: &PopulationProtocol,
    b: Output,
    opts: &ReachOptions,
) -> Result<CountingConstraint> {
    Ok(stable_set_with_stats(p, b, opts)?.0)
}

fn stable_set_with_stats(
    p: &PopulationProtocol,
    b: Output,
    opts: &ReachOptions,
) -> Result<(CountingConstraint, ReachResult)> {
    let not_c = p.consensus_constraint(b).complement()?;
    let r = reach::pre_star(&not_c, p.scheme(), opts)?;
    Ok((r.closure.complement()?.drop_totals_below(2), r))
}

/// Shared closures of both decision problems.
struct Core {
    norm: Normalized,
    original_states: Vec<String>,
    init: CountingConstraint,
    reachable: CountingConstraint,
    /// `R` when working relative to the reachable set.
    universe: Option<CountingConstraint>,
    /// Configurations that can reach `ST_b`.
    can_stabilize: [CountingConstraint; 2],
    stats: Vec<(String, ReachResult)>,
    strategy: Strategy,
    opts: ReachOptions,
}

/// Interprets `init` over the original states, or over the normalized ones
/// when its dimension says so; defaults to the input configurations.
fn resolve_init(
    norm: &Normalized,
    init: Option<&CountingConstraint>,
) -> Result<CountingConstraint> {
    match init {
        None => norm.initial.clone().ok_or(Error::NoInputs),
        Some(g) if g.dim() == norm.num_original() => norm.lift(g),
        Some(g) if g.dim() == norm.protocol.num_states() => Ok(g.clone()),
        Some(g) => Err(Error::DimensionMismatch {
            left: g.dim(),
            right: norm.num_original(),
        }),
    }
}

impl Core {
    fn build(
        p: &PopulationProtocol,
        init: Option<&CountingConstraint>,
        opts: &DecisionOptions,
    ) -> Result<Self> {
        let norm = p.normalize()?;
        let init = resolve_init(&norm, init)?;
        let q = &norm.protocol;
        let scheme = q.scheme();
        let ro = opts.reach;
        let strategy = match opts.strategy {
            Strategy::Auto if init.is_bounded() => Strategy::Reachable,
            Strategy::Auto => Strategy::Global,
            s => s,
        };
        let post = reach::post_star(&init, scheme, &ro)?;
        let reachable = post.closure.clone();
        let mut stats = vec![("post_init".to_string(), post)];

        let (can_stabilize, universe) = if strategy == Strategy::Reachable {
            let u = &reachable;
            let stable = |b: Output| -> Result<(CountingConstraint, ReachResult, ReachResult)> {
                let not_c = u.difference(&q.consensus_constraint(b))?;
                let leave = reach::pre_star_within(&not_c, scheme, u, &ro)?;
                let st = u.difference(&leave.closure)?;
                let to_st = reach::pre_star_within(&st, scheme, u, &ro)?;
                Ok((to_st.closure.clone(), leave, to_st))
            };
            let (s0, s1) = rayon::join(|| stable(0), || stable(1));
            let ((p0, l0, t0), (p1, l1, t1)) = (s0?, s1?);
            stats.push(("pre_not_c0".into(), l0));
            stats.push(("pre_not_c1".into(), l1));
            stats.push(("pre_st0".into(), t0));
            stats.push(("pre_st1".into(), t1));
            ([p0, p1], Some(reachable.clone()))
        } else {
            let stable = |b: Output| -> Result<(CountingConstraint, ReachResult, ReachResult)> {
                let (st, leave) = stable_set_with_stats(q, b, &ro)?;
                let to_st = reach::pre_star(&st, scheme, &ro)?;
                Ok((to_st.closure.clone(), leave, to_st))
            };
            let (s0, s1) = rayon::join(|| stable(0), || stable(1));
            let ((p0, l0, t0), (p1, l1, t1)) = (s0?, s1?);
            stats.push(("pre_not_c0".into(), l0));
            stats.push(("pre_not_c1".into(), l1));
            stats.push(("pre_st0".into(), t0));
            stats.push(("pre_st1".into(), t1));
            ([p0, p1], None)
        };
        Ok(Core {
            original_states: p.states().to_vec(),
            norm,
            init,
            reachable,
            universe,
            can_stabilize,
            stats,
            strategy,
            opts: ro,
        })
    }

    /// Initial configurations all of whose successors can still reach
    /// `ST_b`.
    fn stabilizing(&mut self, b: Output) -> Result<CountingConstraint> {
        let scheme = self.norm.protocol.scheme();
        let r = match &self.universe {
            Some(u) => {
                let lost = u.difference(&self.can_stabilize[b as usize])?;
                reach::pre_star_within(&lost, scheme, u, &self.opts)?
            }
            None => {
                let lost = self.can_stabilize[b as usize].complement()?;
                reach::pre_star(&lost, scheme, &self.opts)?
            }
        };
        let w = self.init.difference(&r.closure)?;
        self.stats.push((format!("pre_lost{b}"), r));
        Ok(w)
    }
}

/// Decides well-specification from `init`, or from the input
/// configurations when `init` is `None`.
///
/// `init` may range over the original states (it is then lifted with the
/// helper agent) or over the normalized states.
pub fn well_specified(
    p: &PopulationProtocol,
    init: Option<&CountingConstraint>,
    opts: &DecisionOptions,
) -> Result<Verdict> {
    let core = Core::build(p, init, opts)?;
    let [p0, p1] = &core.can_stabilize;
    let stuck = core.reachable.difference(p0)?.difference(p1)?;
    if let Some(w) = stuck.smallest_witness(2) {
        return Ok(Verdict::new(VerdictKind::IllSpecified, &core).with_witness(
            Violation::Condition1,
            w,
            &core.norm,
        ));
    }
    let split = core.init.intersect(p0)?.intersect(p1)?;
    if let Some(w) = split.smallest_witness(2) {
        return Ok(Verdict::new(VerdictKind::IllSpecified, &core).with_witness(
            Violation::Condition2,
            w,
            &core.norm,
        ));
    }
    Ok(Verdict::new(VerdictKind::WellSpecified, &core))
}

/// Initial sets stabilizing to 0 and to 1, over the normalized states.
#[derive(Clone, Debug)]
pub struct Partition {
    pub normalized: Normalized,
    pub init: CountingConstraint,
    pub w0: CountingConstraint,
    pub w1: CountingConstraint,
    pub stats: Vec<(String, ReachResult)>,
}

pub fn stabilization_partition(
    p: &PopulationProtocol,
    init: Option<&CountingConstraint>,
    opts: &DecisionOptions,
) -> Result<Partition> {
    let mut core = Core::build(p, init, opts)?;
    let w0 = core.stabilizing(0)?;
    let w1 = core.stabilizing(1)?;
    Ok(Partition {
        normalized: core.norm,
        init: core.init,
        w0,
        w1,
        stats: core.stats,
    })
}

/// Checks that the protocol computes `pred`, a constraint over its input
/// variables.
pub fn check_correct(
    p: &PopulationProtocol,
    pred: &CountingConstraint,
    opts: &DecisionOptions,
) -> Result<Verdict> {
    if pred.dim() != p.inputs().len() {
        return Err(Error::DimensionMismatch {
            left: pred.dim(),
            right: p.inputs().len(),
        });
    }
    let mut core = Core::build(p, None, opts)?;
    let w0 = core.stabilizing(0)?;
    let w1 = core.stabilizing(1)?;
    let expect1 = core.norm.lift(&p.predicate_to_state_constraint(pred)?)?;
    let expect0 = core
        .norm
        .lift(&p.predicate_to_state_constraint(&pred.complement()?)?)?;

    for (violation, got, expected) in [
        (Violation::WrongValue1, &w1, &expect1),
        (Violation::WrongValue0, &w0, &expect0),
    ] {
        let diff = got
            .difference(expected)?
            .union(&expected.difference(got)?)?;
        if let Some(w) = diff.smallest_witness(2) {
            let mut v =
                Verdict::new(VerdictKind::Incorrect, &core).with_witness(violation, w, &core.norm);
            let orig = v.original_witness().expect("witness present");
            v.input = Some(p.input_population(&orig));
            return Ok(v);
        }
    }
    Ok(Verdict::new(VerdictKind::Correct, &core))
}

/// Names of the normalized states that are not original states.
pub fn added_states(norm: &Normalized) -> Vec<&str> {
    norm.origins
        .iter()
        .enumerate()
        .filter(|(_, o)| !matches!(o, StateOrigin::Original(_)))
        .map(|(i, _)| norm.protocol.scheme().state_name(i))
        .collect()
}

//! Acceptance run. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use iopv_core::constraint::{CountingConstraint, Minterm};
use iopv_core::decision::{self, DecisionOptions, VerdictKind};
use iopv_core::format;
use iopv_core::oracle::{self, OracleOptions};
use iopv_core::protocol::{Configuration, PopulationProtocol, ProtocolScheme, Transition};
use iopv_core::reach::{self, ReachOptions};
use iopv_core::text::parse_constraint;
use iopv_core::tm::{self, Outcome};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use common::*;

type Criterion<'a> = Box<dyn Fn() -> Report + 'a>;

struct Report {
    ok: bool,
    detail: String,
}

fn pass_if(ok: bool, detail: impl Into<String>) -> Report {
    Report {
        ok,
        detail: detail.into(),
    }
}

fn vars(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("x{i}")).collect()
}

fn minterm(text: &str, n: usize) -> Minterm {
    let g = parse_constraint(text, &vars(n)).unwrap();
    assert_eq!(g.len(), 1, "{text}");
    g.minterms()[0].clone()
}

// Rows: minterm, its L-/U-norm, the closure as listed, and the listed
// closure norms.
const ROWS: [(&str, u64, u64, &str, u64, u64); 7] = [
    ("x1=0 & x2>=2 & x3=1", 3, 1, "x1=0 & x2>=2 & x3=1", 3, 1),
    (
        "x1=1 & x2=2 & x3>=1",
        4,
        3,
        "(x1=1 & x2=2 & x3>=1) | (x1=1 & x2=1 & x3>=2) | (x1=1 & x2=0 & x3>=3)",
        4,
        3,
    ),
    (
        "x1=1 & x2>=1 & x3=2",
        4,
        3,
        "(x1=1 & x2>=1 & x3=2) | (x1=1 & x2>=0 & x3>=3)",
        4,
        3,
    ),
    (
        "x1>=0 & x2>=1 & x3>=2",
        3,
        0,
        "(x1>=0 & x2>=1 & x3>=2) | (x1>=1 & x2>=0 & x3>=3)",
        4,
        0,
    ),
    ("x1>=1 & x2=0", 1, 0, "x1>=1 & x2=0", 1, 0),
    (
        "x1=1 & x2>=2",
        3,
        1,
        "(x1=1 & x2>=2) | (x1=0 & x2>=3)",
        3,
        1,
    ),
    (
        "x1>=2 & x2=1",
        3,
        1,
        "(x1>=2 & x2>=1) | (x1>=1 & x2>=2) | (x1>=0 & x2>=3)",
        3,
        0,
    ),
];

fn criterion1() -> Report {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut gamma_norms = Vec::new();
    for (i, &(m_text, ml, mu, g_text, gl, gu)) in ROWS.iter().enumerate() {
        let (n, t) = if i < 4 {
            (3, Transition::new(0, 1, 0, 2))
        } else {
            (2, Transition::new(0, 1, 1, 1))
        };
        let t = t.classify(0).unwrap();
        let m = minterm(m_text, n);
        let expected = parse_constraint(g_text, &vars(n)).unwrap();
        let fired = reach::fire(&m, &t).unwrap();
        let closed = reach::post_star_t(&CountingConstraint::from_minterm(m.clone()), &t).unwrap();
        let row = i + 1;
        if !fired.equivalent(&expected).unwrap() {
            failures.push(format!("row {row}: fire differs"));
        }
        if !closed.equivalent(&expected).unwrap() {
            failures.push(format!("row {row}: post_star_t differs"));
        }
        if (m.l_norm().unwrap(), m.u_norm().unwrap()) != (ml, mu) {
            failures.push(format!(
                "row {row}: norms {}/{} expected {ml}/{mu}",
                m.l_norm().unwrap(),
                m.u_norm().unwrap()
            ));
        }
        if (expected.l_norm().unwrap(), expected.u_norm().unwrap()) != (gl, gu) {
            failures.push(format!("row {row}: listed closure norms"));
        }
        gamma_norms.push(format!(
            "{}/{}",
            fired.l_norm().unwrap(),
            fired.u_norm().unwrap()
        ));
    }
    let elapsed = start.elapsed();
    if elapsed >= Duration::from_secs(1) {
        failures.push(format!("took {elapsed:?}"));
    }
    pass_if(
        failures.is_empty(),
        if failures.is_empty() {
            format!(
                "7 rows equal, input norms match; fire closure norms {}",
                gamma_norms.join(" ")
            )
        } else {
            failures.join("; ")
        },
    )
}

fn criterion2() -> Report {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let samples = 2000;
    let mut violations = 0;
    let mut unsound = 0;
    for _ in 0..samples {
        let n = rng.random_range(2..=5);
        let m = random_minterm(&mut rng, n, 6);
        let t = random_io(&mut rng, n, true).classify(0).unwrap();
        let out = reach::fire(&m, &t).unwrap();
        if out.u_norm().unwrap() > m.u_norm().unwrap() {
            violations += 1;
        }
        if !CountingConstraint::from_minterm(m).is_subset(&out).unwrap() {
            unsound += 1;
        }
    }
    pass_if(
        violations == 0 && unsound == 0,
        format!(
            "{samples} pairs, {violations} norm violations, {unsound} outputs missing the input"
        ),
    )
}

fn criterion3() -> Report {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let samples = 1200;
    let mut bad = Vec::new();
    for i in 0..samples {
        let n = rng.random_range(1..=4);
        let a = random_constraint(&mut rng, n, 4, 3);
        let b = random_constraint(&mut rng, n, 4, 3);
        let union = a.union(&b).unwrap();
        let inter = a.intersect(&b).unwrap();
        let comp = a.complement().unwrap();
        for v in box_points(n, 5) {
            let (x, y) = (member(&a, &v), member(&b, &v));
            if member(&union, &v) != (x || y)
                || member(&inter, &v) != (x && y)
                || member(&comp, &v) == x
            {
                bad.push(format!("sample {i}: set operation at {v:?}"));
                break;
            }
        }
        let (al, au, bl, bu) = (
            a.l_norm().unwrap(),
            a.u_norm().unwrap(),
            b.l_norm().unwrap(),
            b.u_norm().unwrap(),
        );
        let nn = n as u64;
        let norms_ok = union.u_norm().unwrap() <= au.max(bu)
            && union.l_norm().unwrap() <= al.max(bl)
            && inter.u_norm().unwrap() <= au + bu
            && inter.l_norm().unwrap() <= al + bl
            && comp.u_norm().unwrap() <= nn * al
            && comp.l_norm().unwrap() <= nn * au + nn;
        if !norms_ok {
            bad.push(format!("sample {i}: norm bound"));
        }
        let involution = comp.complement().unwrap().equivalent(&a).unwrap();
        let de_morgan1 = union
            .complement()
            .unwrap()
            .equivalent(&comp.intersect(&b.complement().unwrap()).unwrap())
            .unwrap();
        let de_morgan2 = inter
            .complement()
            .unwrap()
            .equivalent(&comp.union(&b.complement().unwrap()).unwrap())
            .unwrap();
        if !(involution && de_morgan1 && de_morgan2) {
            bad.push(format!("sample {i}: identity"));
        }
    }
    pass_if(
        bad.is_empty(),
        if bad.is_empty() {
            format!(
                "{samples} pairs, set operations, norm bounds, involution and De Morgan all hold"
            )
        } else {
            bad.join("; ")
        },
    )
}

struct SuiteEntry {
    scheme: ProtocolScheme,
    seed: CountingConstraint,
}

fn suite(count: usize, seed: u64) -> Vec<SuiteEntry> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let scheme = random_scheme(&mut rng, 4, 5, true);
            let n = scheme.num_states();
            let k = rng.random_range(1..=2);
            let ms = (0..k).map(|_| random_minterm(&mut rng, n, 3)).collect();
            SuiteEntry {
                scheme,
                seed: CountingConstraint::new(n, ms).unwrap(),
            }
        })
        .collect()
}

fn slice_of(g: &CountingConstraint, n: usize, size: u64) -> BTreeSet<Vec<u64>> {
    configs(n, size)
        .into_iter()
        .filter(|c| member(g, c))
        .collect()
}

fn criterion4(entries: &[SuiteEntry]) -> Report {
    let start = Instant::now();
    let results: Vec<(Vec<String>, usize)> = entries
        .par_iter()
        .enumerate()
        .map(|(i, e)| {
            let n = e.scheme.num_states();
            let ts = e.scheme.transitions();
            let post = reach::post_star(&e.seed, &e.scheme, &ReachOptions::default()).unwrap();
            let pre = reach::pre_star(&e.seed, &e.scheme, &ReachOptions::default()).unwrap();
            let mut bad = Vec::new();
            let mut grew = 0;
            for size in 2..=6 {
                let seeds: Vec<Vec<u64>> = slice_of(&e.seed, n, size).into_iter().collect();
                for (dir, ts, closure) in [
                    ("post", ts.to_vec(), &post.closure),
                    ("pre", reversed(ts), &pre.closure),
                ] {
                    let explicit = bfs(&seeds, &ts);
                    grew += usize::from(explicit.len() > seeds.len());
                    if explicit != slice_of(closure, n, size) {
                        bad.push(format!("scheme {i} {dir} size {size}"));
                    }
                }
            }
            (bad, grew)
        })
        .collect();
    let grew: usize = results.iter().map(|r| r.1).sum();
    let bad: Vec<String> = results.into_iter().flat_map(|r| r.0).collect();
    let elapsed = start.elapsed();
    let ok = bad.is_empty() && elapsed < Duration::from_secs(300);
    pass_if(
        ok,
        format!(
            "{} schemes x sizes 2..6 x post/pre ({grew} slices grew under BFS), {} mismatches{} in {:.1?}",
            entries.len(),
            bad.len(),
            bad.first().map(|b| format!(" (first: {b})")).unwrap_or_default(),
            elapsed
        ),
    )
}

fn criterion5(entries: &[SuiteEntry]) -> Report {
    let oracle_opts = OracleOptions::default();
    let results: Vec<(bool, Option<String>)> = entries
        .par_iter()
        .enumerate()
        .map(|(i, e)| {
            let mut rng = ChaCha8Rng::seed_from_u64(500 + i as u64);
            let p = random_protocol(&mut rng, e.scheme.clone());
            let v = decision::well_specified(&p, None, &DecisionOptions::default()).unwrap();
            match v.kind {
                VerdictKind::WellSpecified => {
                    for size in 2..=6 {
                        let inits = input_configs(&p, size);
                        let sv = oracle::well_specified_at_size(&p, &inits, &oracle_opts).unwrap();
                        if !sv.well_specified {
                            return (
                                true,
                                Some(format!("protocol {i}: oracle ill-specified at size {size}")),
                            );
                        }
                        let local =
                            stable_values(&outputs_of(&p), p.scheme().transitions(), &inits);
                        let lib: Vec<Option<u8>> = sv.values.iter().map(|(_, b)| *b).collect();
                        if local != lib {
                            return (
                                true,
                                Some(format!("protocol {i}: oracles disagree at size {size}")),
                            );
                        }
                    }
                    (true, None)
                }
                _ => {
                    let norm = p.normalize().unwrap();
                    let init = norm.initial.clone().unwrap();
                    let w = v.witness.as_ref().unwrap();
                    let ok = oracle::confirms_witness(
                        &norm.protocol,
                        &init,
                        w,
                        v.violated.unwrap(),
                        &oracle_opts,
                    )
                    .unwrap();
                    (
                        false,
                        (!ok).then(|| format!("protocol {i}: witness {w:?} not confirmed")),
                    )
                }
            }
        })
        .collect();
    let ws = results.iter().filter(|r| r.0).count();
    let bad: Vec<&String> = results.iter().filter_map(|r| r.1.as_ref()).collect();
    pass_if(
        bad.is_empty() && ws > 0 && ws < results.len(),
        format!(
            "{} protocols ({} well-specified, {} ill-specified), {} disagreements{}",
            results.len(),
            ws,
            results.len() - ws,
            bad.len(),
            bad.first()
                .map(|b| format!(" (first: {b})"))
                .unwrap_or_default()
        ),
    )
}

fn samples_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../samples")
}

fn load(name: &str) -> PopulationProtocol {
    let text = std::fs::read_to_string(samples_dir().join(name)).unwrap();
    format::parse_protocol(&text).unwrap().protocol
}

fn criterion6() -> Report {
    let mut bad = Vec::new();
    for k in [2u64, 3] {
        let p = load(&format!("threshold{k}.pp"));
        let opts = DecisionOptions::default();
        let pred = |j: u64| parse_constraint(&format!("x>={j}"), &p.input_vars()).unwrap();
        let v = decision::check_correct(&p, &pred(k), &opts).unwrap();
        if v.kind != VerdictKind::Correct {
            bad.push(format!("k={k}: x>={k} not correct"));
        }
        let v = decision::check_correct(&p, &pred(k + 1), &opts).unwrap();
        let size: Option<u64> = v.input.as_ref().map(|i| i.iter().map(|(_, c)| c).sum());
        if v.kind != VerdictKind::Incorrect || size != Some(k) {
            bad.push(format!(
                "k={k}: x>={} gave {} size {size:?}",
                k + 1,
                v.kind.label()
            ));
        }
        let x = p.inputs()[0].1;
        for size in 2..=6u64 {
            let mut c = vec![0; p.num_states()];
            c[x] = size;
            let expected = u8::from(size >= k);
            let local = stable_values(
                &outputs_of(&p),
                p.scheme().transitions(),
                std::slice::from_ref(&c),
            )[0];
            let lib = oracle::stabilizes_to(
                &p,
                &Configuration::new(c).unwrap(),
                &OracleOptions::default(),
            )
            .unwrap();
            if local != Some(expected) || lib != Some(expected) {
                bad.push(format!(
                    "k={k}: size {size} stabilizes to {local:?}/{lib:?}"
                ));
            }
        }
    }
    pass_if(
        bad.is_empty(),
        if bad.is_empty() {
            "k=2,3 correct for x>=k, incorrect for x>=k+1 with size-k input, oracle agrees on sizes 2..6".to_string()
        } else {
            bad.join("; ")
        },
    )
}

const MACHINES: [(&str, &str); 6] = [
    (
        "tm accept_first\ntmstates: q0 qa qr\nalphabet: 0 1\ntape: 0 1\ninit: q0\nacc: qa\nrej: qr\n\
         delta: q0 0 -> qa 0 R\ndelta: q0 1 -> qr 1 R\n",
        "0",
    ),
    (
        "tm accept_first\ntmstates: q0 qa qr\nalphabet: 0 1\ntape: 0 1\ninit: q0\nacc: qa\nrej: qr\n\
         delta: q0 0 -> qa 0 R\ndelta: q0 1 -> qr 1 R\n",
        "1",
    ),
    (
        "tm bounce\ntmstates: q0 q1 qa qr\nalphabet: 0 1\ntape: 0 1\ninit: q0\nacc: qa\nrej: qr\n\
         delta: q0 0 -> q1 1 R\ndelta: q1 0 -> q0 0 L\ndelta: q0 1 -> qa 1 R\ndelta: q1 1 -> qr 1 L\n",
        "0 0",
    ),
    (
        "tm pingpong\ntmstates: q0 q1 qa qr\nalphabet: 0\ntape: 0\ninit: q0\nacc: qa\nrej: qr\n\
         delta: q0 0 -> q1 0 R\ndelta: q1 0 -> q0 0 L\n",
        "0 0",
    ),
    (
        "tm second_one\ntmstates: q0 q1 qa qr\nalphabet: 0 1\ntape: 0 1\ninit: q0\nacc: qa\nrej: qr\n\
         delta: q0 0 -> q1 1 R\ndelta: q0 1 -> q1 1 R\ndelta: q1 1 -> qa 1 L\ndelta: q1 0 -> qr 0 L\n",
        "0 1",
    ),
    (
        "tm second_one\ntmstates: q0 q1 qa qr\nalphabet: 0 1\ntape: 0 1\ninit: q0\nacc: qa\nrej: qr\n\
         delta: q0 0 -> q1 1 R\ndelta: q0 1 -> q1 1 R\ndelta: q1 1 -> qa 1 L\ndelta: q1 0 -> qr 0 L\n",
        "1 0",
    ),
];

fn criterion7() -> Report {
    let results: Vec<(bool, Option<String>)> = MACHINES
        .par_iter()
        .map(|&(text, word)| {
            let m = format::parse_tm(text).unwrap();
            let word: Vec<String> = word.split_whitespace().map(String::from).collect();
            let accepts = m.run(&word).unwrap() == Outcome::Accept;
            let label = format!("{} on {}", m.name, word.join(""));
            let gi = tm::encode_tm(&m, &word).unwrap();
            let p = &gi.protocol;
            let init =
                CountingConstraint::from_finite(p.num_states(), &[gi.initial.counts().to_vec()])
                    .unwrap();
            let v = decision::well_specified(p, Some(&init), &DecisionOptions::default()).unwrap();
            let ill = v.kind == VerdictKind::IllSpecified;
            let oracle_opts = OracleOptions::default();
            let sv =
                oracle::well_specified_at_size(p, &[gi.initial.counts().to_vec()], &oracle_opts)
                    .unwrap();
            let report = tm::validate_instance(&gi, &oracle_opts).unwrap();
            let mut problems = Vec::new();
            if ill != accepts {
                problems.push("symbolic verdict");
            }
            if sv.well_specified == accepts || report.dissensus_bscc != accepts {
                problems.push("oracle verdict");
            }
            if gi.good_size != word.len() as u64 + 3 || !report.good_initial {
                problems.push("initial configuration");
            }
            if !report.all_io || !p.scheme().is_io() {
                problems.push("IO check");
            }
            let problem =
                (!problems.is_empty()).then(|| format!("{label}: {}", problems.join(", ")));
            (accepts, problem)
        })
        .collect();
    let accepting = results.iter().filter(|r| r.0).count();
    let bad: Vec<&String> = results.iter().filter_map(|r| r.1.as_ref()).collect();
    pass_if(
        bad.is_empty() && accepting > 0 && accepting < results.len(),
        format!(
            "{} machines ({} accepting, {} not), {} disagreements{}",
            results.len(),
            accepting,
            results.len() - accepting,
            bad.len(),
            bad.first()
                .map(|b| format!(" (first: {b})"))
                .unwrap_or_default()
        ),
    )
}

fn has_self_observation(s: &ProtocolScheme) -> bool {
    s.io_transitions()
        .unwrap()
        .iter()
        .any(|t| t.is_self_observation())
}

fn criterion8() -> Report {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut protocols = Vec::new();
    while protocols.len() < 60 {
        let scheme = random_scheme(&mut rng, 4, 5, true);
        if has_self_observation(&scheme) {
            protocols.push(random_protocol(&mut rng, scheme));
        }
    }
    let results: Vec<(bool, Option<String>)> = protocols
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let outputs = outputs_of(p);
            let mut inits = Vec::new();
            let mut oracle_ws = true;
            for size in 2..=5 {
                let slice = input_configs(p, size);
                oracle_ws &= stable_values(&outputs, p.scheme().transitions(), &slice)
                    .iter()
                    .all(Option::is_some);
                inits.extend(slice);
            }
            if !p.normalize().unwrap().changed() {
                return (
                    oracle_ws,
                    Some(format!("protocol {i}: normalization changed nothing")),
                );
            }
            let opts = DecisionOptions::default();
            let bounded = CountingConstraint::from_finite(p.num_states(), &inits).unwrap();
            let v = decision::well_specified(p, Some(&bounded), &opts).unwrap();
            if (v.kind == VerdictKind::WellSpecified) != oracle_ws {
                return (
                    oracle_ws,
                    Some(format!(
                        "protocol {i}: sizes 2..5 symbolic {}",
                        v.kind.label()
                    )),
                );
            }
            let full = decision::well_specified(p, None, &opts).unwrap();
            if full.kind == VerdictKind::WellSpecified && !oracle_ws {
                return (
                    oracle_ws,
                    Some(format!("protocol {i}: unbounded symbolic verdict")),
                );
            }
            (oracle_ws, None)
        })
        .collect();
    let ws = results.iter().filter(|r| r.0).count();
    let bad: Vec<&String> = results.iter().filter_map(|r| r.1.as_ref()).collect();
    pass_if(
        bad.is_empty() && ws > 0 && ws < results.len(),
        format!(
            "{} protocols with self-observation ({} well-specified on sizes 2..5), {} disagreements{}",
            results.len(),
            ws,
            bad.len(),
            bad.first().map(|b| format!(" (first: {b})")).unwrap_or_default()
        ),
    )
}

fn main() {
    let entries = suite(120, 4);
    let criteria: [(&str, Criterion); 8] = [
        ("fire on worked examples", Box::new(criterion1)),
        ("fire never grows the upper norm", Box::new(criterion2)),
        ("boolean algebra", Box::new(criterion3)),
        (
            "symbolic reachability vs BFS",
            Box::new(|| criterion4(&entries)),
        ),
        ("decision vs oracle", Box::new(|| criterion5(&entries))),
        ("threshold correctness", Box::new(criterion6)),
        ("Turing machine reduction", Box::new(criterion7)),
        ("normal form preservation", Box::new(criterion8)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let r = run();
        println!(
            "criterion {}: {} {name}: {} [{:.2?}]",
            i + 1,
            if r.ok { "PASS" } else { "FAIL" },
            r.detail,
            start.elapsed()
        );
        if !r.ok {
            failed += 1;
        }
    }
    println!("acceptance: {} of 8 criteria passed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

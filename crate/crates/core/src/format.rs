//! Protocol and Turing machine files.
//!
//! Protocol files are line oriented, `#` starts a comment:
//!
//! ```text
//! protocol threshold2
//! states: 1 2
//! inputs: x:1
//! outputs: 1=0 2=1
//! trans: 1 1 -> 1 2
//! trans: 2 1 -> 2 2
//! ```
//!
//! Sections appear in this order. An optional final `init-config:` line
//! lists `state:count` pairs of a single initial configuration; `inputs:`
//! may then be left empty.
//!
//! Machine files hold `tm <name>`, `tmstates:`, `alphabet:` (input
//! symbols), `tape:` (tape symbols), `init:`, `acc:`, `rej:`, any number of
//! `delta: q a -> q' a' L|R` lines and optionally `input:` with one symbol
//! per cell.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::protocol::{
    Configuration, DisplayCounts, PopulationProtocol, ProtocolScheme, Transition,
};
use crate::text::{is_name_char, is_name_start};
use crate::tm::{Move, TmTransition, TuringMachine};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Name(String),
    Colon,
    Eq,
    Arrow,
}

#[derive(Clone, Debug)]
struct Line {
    no: usize,
    key: String,
    key_col: usize,
    toks: Vec<(Tok, usize)>,
    end: usize,
}

impl Line {
    fn err(&self, col: usize, msg: impl Into<String>) -> Error {
        Error::parse(self.no, col, msg)
    }

    fn end_err(&self, msg: impl Into<String>) -> Error {
        self.err(self.end, msg)
    }
}

fn tokenize(no: usize, offset: usize, text: &str) -> Result<(Vec<(Tok, usize)>, usize)> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let col = offset + i;
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == ':' {
            toks.push((Tok::Colon, col));
            i += 1;
        } else if c == '=' {
            toks.push((Tok::Eq, col));
            i += 1;
        } else if c == '-' && chars.get(i + 1) == Some(&'>') {
            toks.push((Tok::Arrow, col));
            i += 2;
        } else if is_name_start(c) {
            let start = i;
            while i < chars.len() && is_name_char(chars[i]) {
                i += 1;
            }
            toks.push((Tok::Name(chars[start..i].iter().collect()), col));
        } else {
            return Err(Error::parse(no, col, format!("unexpected character `{c}`")));
        }
    }
    Ok((toks, offset + chars.len()))
}

/// Splits a file into keyword lines. A keyword is either followed by `:` or,
/// for the header keywords, by whitespace.
fn lines(text: &str, headers: &[&str]) -> Result<Vec<Line>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let no = idx + 1;
        let body = raw.split('#').next().unwrap_or("");
        let trimmed = body.trim_start();
        if trimmed.trim().is_empty() {
            continue;
        }
        let lead = body.chars().count() - trimmed.chars().count();
        let key_col = lead + 1;
        let key_len = trimmed
            .chars()
            .take_while(|&c| is_name_char(c) || c == '-')
            .count();
        let key: String = trimmed.chars().take(key_len).collect();
        let rest: String = trimmed.chars().skip(key_len).collect();
        let (rest, skip) = if headers.contains(&key.as_str()) {
            (rest, 0)
        } else if let Some(r) = rest.trim_start().strip_prefix(':') {
            let skipped = rest.chars().count() - r.chars().count();
            (r.to_string(), skipped)
        } else {
            return Err(Error::parse(
                no,
                key_col,
                format!("expected `keyword:`, found `{}`", trimmed.trim_end()),
            ));
        };
        let (toks, end) = tokenize(no, key_col + key_len + skip, &rest)?;
        out.push(Line {
            no,
            key,
            key_col,
            toks,
            end,
        });
    }
    Ok(out)
}

struct Cursor<'a> {
    line: &'a Line,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(line: &'a Line) -> Self {
        Cursor { line, pos: 0 }
    }

    fn done(&self) -> bool {
        self.pos >= self.line.toks.len()
    }

    fn col(&self) -> usize {
        self.line.toks.get(self.pos).map_or(self.line.end, |t| t.1)
    }

    fn name(&mut self, what: &str) -> Result<(String, usize)> {
        match self.line.toks.get(self.pos) {
            Some((Tok::Name(n), col)) => {
                self.pos += 1;
                Ok((n.clone(), *col))
            }
            _ => Err(self.line.err(self.col(), format!("expected {what}"))),
        }
    }

    fn punct(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.line.toks.get(self.pos).map(|t| &t.0) == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.line.err(self.col(), format!("expected {what}")))
        }
    }

    fn finish(&self) -> Result<()> {
        if self.done() {
            Ok(())
        } else {
            Err(self.line.err(self.col(), "unexpected trailing input"))
        }
    }

    fn names(&mut self, what: &str) -> Result<Vec<(String, usize)>> {
        let mut out = Vec::new();
        while !self.done() {
            out.push(self.name(what)?);
        }
        Ok(out)
    }

    fn number(&mut self, what: &str) -> Result<u64> {
        let (n, col) = self.name(what)?;
        n.parse()
            .map_err(|_| self.line.err(col, format!("expected {what}, found `{n}`")))
    }
}

/// A parsed protocol file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProtocolFile {
    pub protocol: PopulationProtocol,
    pub init_config: Option<Configuration>,
}

const PROTOCOL_KEYS: [&str; 6] = [
    "protocol",
    "states",
    "inputs",
    "outputs",
    "trans",
    "init-config",
];

pub fn parse_protocol(text: &str) -> Result<ProtocolFile> {
    let lines = lines(text, &["protocol"])?;
    let mut stage = 0;
    let mut seen_line: Vec<Option<&Line>> = vec![None; PROTOCOL_KEYS.len()];
    let mut trans_lines = Vec::new();
    for line in &lines {
        let Some(k) = PROTOCOL_KEYS.iter().position(|&k| k == line.key) else {
            return Err(line.err(line.key_col, format!("unknown section `{}`", line.key)));
        };
        if k < stage || (k == stage && k != 4 && seen_line[k].is_some()) {
            return Err(line.err(
                line.key_col,
                format!("section `{}` out of order or repeated", line.key),
            ));
        }
        for missing in stage..k {
            // `trans` may be absent, everything before it may not.
            if seen_line[missing].is_none() && missing < 4 {
                return Err(line.err(
                    line.key_col,
                    format!(
                        "expected `{}` before `{}`",
                        PROTOCOL_KEYS[missing], line.key
                    ),
                ));
            }
        }
        stage = k;
        if k == 4 {
            trans_lines.push(line);
        }
        seen_line[k] = Some(line);
    }
    let eof = |what: &str| {
        Error::parse(
            lines.last().map_or(1, |l| l.no + 1),
            1,
            format!("missing `{what}` section"),
        )
    };
    for (k, key) in PROTOCOL_KEYS.iter().enumerate().take(4) {
        if seen_line[k].is_none() {
            return Err(eof(key));
        }
    }

    let header = seen_line[0].expect("checked");
    let mut c = Cursor::new(header);
    let (name, _) = c.name("protocol name")?;
    c.finish()?;

    let states_line = seen_line[1].expect("checked");
    let states = Cursor::new(states_line).names("state name")?;
    if states.is_empty() {
        return Err(states_line.end_err("expected at least one state"));
    }
    let mut ids = HashMap::new();
    for (i, (s, col)) in states.iter().enumerate() {
        if ids.insert(s.clone(), i).is_some() {
            return Err(states_line.err(*col, format!("duplicate state `{s}`")));
        }
    }
    let state = |line: &Line, s: &str, col: usize| -> Result<usize> {
        ids.get(s)
            .copied()
            .ok_or_else(|| line.err(col, format!("undeclared state `{s}`")))
    };

    let inputs_line = seen_line[2].expect("checked");
    let mut c = Cursor::new(inputs_line);
    let mut inputs = Vec::new();
    while !c.done() {
        let (v, vcol) = c.name("input variable")?;
        c.punct(Tok::Colon, "`:`")?;
        let (q, qcol) = c.name("state name")?;
        let id = state(inputs_line, &q, qcol)?;
        if inputs.iter().any(|(w, _)| *w == v) {
            return Err(inputs_line.err(vcol, format!("duplicate input variable `{v}`")));
        }
        if inputs.iter().any(|&(_, p)| p == id) {
            return Err(inputs_line.err(qcol, format!("input map is not injective at `{q}`")));
        }
        inputs.push((v, id));
    }

    let outputs_line = seen_line[3].expect("checked");
    let mut c = Cursor::new(outputs_line);
    let mut outputs: Vec<Option<u8>> = vec![None; states.len()];
    while !c.done() {
        let (q, qcol) = c.name("state name")?;
        let id = state(outputs_line, &q, qcol)?;
        c.punct(Tok::Eq, "`=`")?;
        let (b, bcol) = c.name("0 or 1")?;
        let b = match b.as_str() {
            "0" => 0,
            "1" => 1,
            _ => return Err(outputs_line.err(bcol, format!("expected 0 or 1, found `{b}`"))),
        };
        if outputs[id].replace(b).is_some() {
            return Err(outputs_line.err(qcol, format!("output of `{q}` given twice")));
        }
    }
    if let Some(i) = outputs.iter().position(Option::is_none) {
        return Err(outputs_line.end_err(format!("missing output for `{}`", states[i].0)));
    }

    let mut transitions = Vec::new();
    for line in trans_lines {
        let mut c = Cursor::new(line);
        let mut q = [0; 4];
        for (k, slot) in q.iter_mut().enumerate() {
            if k == 2 {
                c.punct(Tok::Arrow, "`->`")?;
            }
            let (s, col) = c.name("state name")?;
            *slot = state(line, &s, col)?;
        }
        c.finish()?;
        transitions.push(Transition::new(q[0], q[1], q[2], q[3]));
    }

    let names: Vec<String> = states.into_iter().map(|(s, _)| s).collect();
    let scheme = ProtocolScheme::new(names, transitions)?;
    let protocol = PopulationProtocol::new(
        name,
        scheme,
        inputs,
        outputs.into_iter().map(|o| o.expect("checked")).collect(),
    )?;

    let init_config = match seen_line[5] {
        None => None,
        Some(line) => {
            let mut c = Cursor::new(line);
            let mut counts = vec![0u64; protocol.num_states()];
            while !c.done() {
                let (q, qcol) = c.name("state name")?;
                let id = state(line, &q, qcol)?;
                c.punct(Tok::Colon, "`:`")?;
                counts[id] = counts[id]
                    .checked_add(c.number("agent count")?)
                    .ok_or(Error::Overflow)?;
            }
            Some(Configuration::new(counts).map_err(|e| line.err(line.key_col, e.to_string()))?)
        }
    };
    Ok(ProtocolFile {
        protocol,
        init_config,
    })
}

/// Canonical text of a protocol, optionally with an initial configuration.
pub fn print_protocol(p: &PopulationProtocol, init_config: Option<&Configuration>) -> String {
    let states = p.states();
    let mut out = format!("protocol {}\n", p.name);
    out.push_str(&format!("states: {}\n", states.join(" ")));
    let inputs: Vec<String> = p
        .inputs()
        .iter()
        .map(|(v, q)| format!("{v}:{}", states[*q]))
        .collect();
    out.push_str(&format!("inputs: {}\n", inputs.join(" ")).replace(": \n", ":\n"));
    let outputs: Vec<String> = states
        .iter()
        .zip(p.outputs())
        .map(|(s, o)| format!("{s}={o}"))
        .collect();
    out.push_str(&format!("outputs: {}\n", outputs.join(" ")));
    for t in p.scheme().transitions() {
        out.push_str(&format!(
            "trans: {} {} -> {} {}\n",
            states[t.pre[0]], states[t.pre[1]], states[t.post[0]], states[t.post[1]]
        ));
    }
    if let Some(c) = init_config {
        out.push_str(&format!(
            "init-config: {}\n",
            DisplayCounts {
                counts: c.counts(),
                states
            }
        ));
    }
    out
}

pub fn parse_tm(text: &str) -> Result<TuringMachine> {
    let lines = lines(text, &["tm"])?;
    let Some(first) = lines.first() else {
        return Err(Error::parse(1, 1, "expected `tm <name>`"));
    };
    if first.key != "tm" {
        return Err(first.err(first.key_col, "expected `tm <name>`"));
    }
    let mut c = Cursor::new(first);
    let (name, _) = c.name("machine name")?;
    c.finish()?;

    let mut single: HashMap<&str, &Line> = HashMap::new();
    let mut delta = Vec::new();
    for line in &lines[1..] {
        match line.key.as_str() {
            "delta" => {
                let mut c = Cursor::new(line);
                let (state, _) = c.name("state")?;
                let (read, _) = c.name("symbol")?;
                c.punct(Tok::Arrow, "`->`")?;
                let (next, _) = c.name("state")?;
                let (write, _) = c.name("symbol")?;
                let (mv, col) = c.name("`L` or `R`")?;
                let mv = match mv.as_str() {
                    "L" => Move::L,
                    "R" => Move::R,
                    _ => return Err(line.err(col, format!("expected `L` or `R`, found `{mv}`"))),
                };
                c.finish()?;
                delta.push(TmTransition {
                    state,
                    read,
                    next,
                    write,
                    mv,
                });
            }
            k @ ("tmstates" | "alphabet" | "tape" | "init" | "acc" | "rej" | "input") => {
                if single.insert(k, line).is_some() {
                    return Err(line.err(line.key_col, format!("`{k}` given twice")));
                }
            }
            k => return Err(line.err(line.key_col, format!("unknown section `{k}`"))),
        }
    }
    let end = lines.last().map_or(1, |l| l.no + 1);
    let list = |k: &str| -> Result<Vec<String>> {
        let line = single
            .get(k)
            .ok_or_else(|| Error::parse(end, 1, format!("missing `{k}`")))?;
        Ok(Cursor::new(line)
            .names("name")?
            .into_iter()
            .map(|(n, _)| n)
            .collect())
    };
    let one = |k: &str| -> Result<String> {
        let line = single
            .get(k)
            .ok_or_else(|| Error::parse(end, 1, format!("missing `{k}`")))?;
        let mut c = Cursor::new(line);
        let (n, _) = c.name("state")?;
        c.finish()?;
        Ok(n)
    };
    let tm = TuringMachine {
        name,
        states: list("tmstates")?,
        input_alphabet: list("alphabet")?,
        tape_alphabet: list("tape")?,
        init: one("init")?,
        accept: one("acc")?,
        reject: one("rej")?,
        delta,
        input: match single.contains_key("input") {
            true => Some(list("input")?),
            false => None,
        },
    };
    tm.validate()?;
    Ok(tm)
}

pub fn print_tm(tm: &TuringMachine) -> String {
    let mut out = format!("tm {}\n", tm.name);
    out.push_str(&format!("tmstates: {}\n", tm.states.join(" ")));
    out.push_str(&format!("alphabet: {}\n", tm.input_alphabet.join(" ")));
    out.push_str(&format!("tape: {}\n", tm.tape_alphabet.join(" ")));
    out.push_str(&format!(
        "init: {}\nacc: {}\nrej: {}\n",
        tm.init, tm.accept, tm.reject
    ));
    for t in &tm.delta {
        out.push_str(&format!(
            "delta: {} {} -> {} {} {}\n",
            t.state, t.read, t.next, t.write, t.mv
        ));
    }
    if let Some(w) = &tm.input {
        out.push_str(&format!("input: {}\n", w.join(" ")));
    }
    out
}

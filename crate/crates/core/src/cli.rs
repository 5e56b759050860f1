//! The `iopv` command line.
//!
//! Exit codes: 0 for a positive verdict, 1 for a negative one, 2 for usage,
//! parse, I/O and resource errors.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::constraint::CountingConstraint;
use crate::decision::{self, DecisionOptions, Strategy, Verdict, VerdictKind};
use crate::error::Error;
use crate::format::{self, ProtocolFile};
use crate::oracle::{self, OracleOptions};
use crate::protocol::{Configuration, DisplayCounts, PopulationProtocol};
use crate::reach::{self, ReachOptions};
use crate::text::{parse_constraint, serialize_constraint};
use crate::tm;

#[derive(Parser, Debug)]
#[command(
    name = "iopv",
    version,
    about = "Verifier for immediate-observation population protocols"
)]
pub struct Cli {
    /// Output style.
    #[arg(long, value_enum, default_value_t = OutputFormat::Text, global = true)]
    pub format: OutputFormat,
    /// Ceiling on stored minterms in closure computations.
    #[arg(long, default_value_t = 1_000_000, global = true)]
    pub max_minterms: usize,
    /// Ceiling on explicit configuration graph nodes.
    #[arg(long, default_value_t = 2_000_000, global = true)]
    pub max_nodes: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Kv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Auto,
    Global,
    Reachable,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DirArg {
    Post,
    Pre,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Decide well-specification.
    Check {
        file: PathBuf,
        /// Initial set over the protocol's states; defaults to the input
        /// configurations or the file's init-config.
        #[arg(long)]
        init: Option<String>,
        #[arg(long)]
        stats: bool,
        #[arg(long, value_enum, default_value_t = StrategyArg::Auto)]
        strategy: StrategyArg,
    },
    /// Check that the protocol computes a predicate over its input variables.
    Correct {
        file: PathBuf,
        #[arg(long)]
        pred: String,
        #[arg(long)]
        stats: bool,
        #[arg(long, value_enum, default_value_t = StrategyArg::Auto)]
        strategy: StrategyArg,
    },
    /// Print the reachability closure of a constraint over the states.
    Closure {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "post")]
        dir: DirArg,
        #[arg(long)]
        from: String,
        /// Compute on the normalized protocol.
        #[arg(long)]
        normalize: bool,
        /// Compute on the protocol as given (the default).
        #[arg(long, conflicts_with = "normalize")]
        no_normalize: bool,
        #[arg(long)]
        stats: bool,
    },
    /// Explicit-state verdicts per population size, compared with the
    /// symbolic verdict.
    Oracle {
        file: PathBuf,
        #[arg(long)]
        max_size: u64,
        #[arg(long, default_value_t = 2)]
        min_size: u64,
        #[arg(long)]
        pred: Option<String>,
        /// Skip the symbolic comparison.
        #[arg(long)]
        no_symbolic: bool,
    },
    /// Run a random fair execution.
    Simulate {
        file: PathBuf,
        /// Population size, spread round-robin over the input states.
        #[arg(long, conflicts_with = "init")]
        size: Option<u64>,
        /// Initial configuration as `state:count` pairs.
        #[arg(long)]
        init: Option<String>,
        #[arg(long, default_value_t = 10_000)]
        steps: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print the normalized protocol.
    Normalize { file: PathBuf },
    /// Encode a Turing machine as a protocol.
    GenTm {
        tmfile: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Input word; symbols separated by spaces, or one character each.
        #[arg(long)]
        input: Option<String>,
        /// Run the explicit oracle on the generated instance.
        #[arg(long)]
        validate: bool,
    },
}

/// Result of one invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug)]
enum Failure {
    Core(Error),
    Io(PathBuf, std::io::Error),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn code(&self) -> &'static str {
        match self {
            Failure::Core(e) => e.code(),
            Failure::Io(..) => "io",
            Failure::Usage(_) => "usage",
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Core(e) => e.to_string(),
            Failure::Io(p, e) => format!("{}: {e}", p.display()),
            Failure::Usage(m) => m.clone(),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

struct Ctx {
    kv: bool,
    reach: ReachOptions,
    oracle: OracleOptions,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    Outcome {
                        code: 0,
                        stdout: text,
                        stderr: String::new(),
                    }
                }
                _ => Outcome {
                    code: 2,
                    stdout: String::new(),
                    stderr: text,
                },
            };
        }
    };
    run_cli(&cli)
}

pub fn run_cli(cli: &Cli) -> Outcome {
    let ctx = Ctx {
        kv: cli.format == OutputFormat::Kv,
        reach: ReachOptions {
            max_minterms: cli.max_minterms,
        },
        oracle: OracleOptions {
            max_nodes: cli.max_nodes,
        },
    };
    let result = match &cli.command {
        Command::Check {
            file,
            init,
            stats,
            strategy,
        } => check(&ctx, file, init.as_deref(), *stats, *strategy),
        Command::Correct {
            file,
            pred,
            stats,
            strategy,
        } => correct(&ctx, file, pred, *stats, *strategy),
        Command::Closure {
            file,
            dir,
            from,
            normalize,
            stats,
            ..
        } => closure(&ctx, file, *dir, from, *normalize, *stats),
        Command::Oracle {
            file,
            max_size,
            min_size,
            pred,
            no_symbolic,
        } => oracle_cmd(
            &ctx,
            file,
            *min_size,
            *max_size,
            pred.as_deref(),
            !no_symbolic,
        ),
        Command::Simulate {
            file,
            size,
            init,
            steps,
            seed,
        } => simulate(&ctx, file, *size, init.as_deref(), *steps, *seed),
        Command::Normalize { file } => normalize(&ctx, file),
        Command::GenTm {
            tmfile,
            output,
            input,
            validate,
        } => gen_tm(&ctx, tmfile, output.as_deref(), input.as_deref(), *validate),
    };
    match result {
        Ok((code, stdout)) => Outcome {
            code,
            stdout,
            stderr: String::new(),
        },
        Err(f) if ctx.kv => Outcome {
            code: 2,
            stdout: format!("error={}\nreason={}\n", f.code(), f.message()),
            stderr: String::new(),
        },
        Err(f) => Outcome {
            code: 2,
            stdout: String::new(),
            stderr: format!("error: {}\n", f.message()),
        },
    }
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| Failure::Io(path.to_path_buf(), e))
}

fn load(path: &Path) -> CliResult<ProtocolFile> {
    format::parse_protocol(&read(path)?).map_err(|e| match e {
        Error::Parse { line, col, msg } => {
            Failure::Usage(format!("{}:{line}:{col}: {msg}", path.display()))
        }
        e => Failure::Core(e),
    })
}

fn decision_options(ctx: &Ctx, s: StrategyArg) -> DecisionOptions {
    DecisionOptions {
        reach: ctx.reach,
        strategy: match s {
            StrategyArg::Auto => Strategy::Auto,
            StrategyArg::Global => Strategy::Global,
            StrategyArg::Reachable => Strategy::Reachable,
        },
    }
}

fn render(ctx: &Ctx, v: &Verdict, stats: bool) -> (i32, String) {
    let text = if ctx.kv {
        v.display_kv(stats)
    } else {
        v.display_text(stats)
    };
    (if v.kind.is_positive() { 0 } else { 1 }, text)
}

fn singleton(p: &PopulationProtocol, c: &Configuration) -> CountingConstraint {
    CountingConstraint::from_finite(p.num_states(), &[c.counts().to_vec()])
        .expect("dimensions agree")
}

fn check(
    ctx: &Ctx,
    file: &Path,
    init: Option<&str>,
    stats: bool,
    s: StrategyArg,
) -> CliResult<(i32, String)> {
    let pf = load(file)?;
    let p = &pf.protocol;
    let init = match (init, &pf.init_config) {
        (Some(text), _) => Some(parse_constraint(text, p.states())?),
        (None, Some(c)) => Some(singleton(p, c)),
        (None, None) => None,
    };
    let v = decision::well_specified(p, init.as_ref(), &decision_options(ctx, s))?;
    Ok(render(ctx, &v, stats))
}

fn correct(
    ctx: &Ctx,
    file: &Path,
    pred: &str,
    stats: bool,
    s: StrategyArg,
) -> CliResult<(i32, String)> {
    let pf = load(file)?;
    let p = &pf.protocol;
    let pred = parse_constraint(pred, &p.input_vars())?;
    let v = decision::check_correct(p, &pred, &decision_options(ctx, s))?;
    Ok(render(ctx, &v, stats))
}

fn closure(
    ctx: &Ctx,
    file: &Path,
    dir: DirArg,
    from: &str,
    normalize: bool,
    stats: bool,
) -> CliResult<(i32, String)> {
    let pf = load(file)?;
    let p = &pf.protocol;
    let g = parse_constraint(from, p.states())?;
    let (protocol, g) = if normalize {
        let norm = p.normalize()?;
        let g = norm.lift(&g)?;
        (norm.protocol, g)
    } else {
        (p.clone(), g)
    };
    let scheme = protocol.scheme();
    let r = match dir {
        DirArg::Post => reach::post_star(&g, scheme, &ctx.reach)?,
        DirArg::Pre => reach::pre_star(&g, scheme, &ctx.reach)?,
    };
    let body = serialize_constraint(&r.closure, protocol.states());
    let mut out = String::new();
    if ctx.kv {
        let _ = writeln!(out, "minterms={}", r.closure.len());
        for line in body.lines() {
            let _ = writeln!(out, "minterm={line}");
        }
    } else if r.closure.is_empty() {
        out.push_str("(empty)\n");
    } else {
        out.push_str(&body);
    }
    if stats {
        out.push_str(&r.stats_kv("closure"));
    }
    Ok((0, out))
}

struct SizeLine {
    size: u64,
    ok: bool,
    detail: String,
}

fn oracle_cmd(
    ctx: &Ctx,
    file: &Path,
    min_size: u64,
    max_size: u64,
    pred: Option<&str>,
    symbolic: bool,
) -> CliResult<(i32, String)> {
    if min_size < 2 || max_size < min_size {
        return Err(Failure::Usage(format!(
            "need 2 <= min-size <= max-size, got {min_size}..{max_size}"
        )));
    }
    let pf = load(file)?;
    let p = &pf.protocol;
    let pred = pred
        .map(|t| parse_constraint(t, &p.input_vars()))
        .transpose()?;
    let init = match (&pf.init_config, p.inputs().is_empty()) {
        (Some(c), true) => singleton(p, c),
        _ => p.initial_constraint()?,
    };
    let states = p.states();

    let mut lines = Vec::new();
    for size in min_size..=max_size {
        let seeds: Vec<Vec<u64>> = oracle::slice(&init, size)?.into_iter().collect();
        if seeds.is_empty() {
            continue;
        }
        let v = oracle::well_specified_at_size(p, &seeds, &ctx.oracle)?;
        let mut line = SizeLine {
            size,
            ok: v.well_specified,
            detail: match &v.witness {
                Some(w) => format!(
                    "ill-specified witness {}",
                    DisplayCounts { counts: w, states }
                ),
                None => format!("well-specified ({} initial)", seeds.len()),
            },
        };
        if let (Some(pred), true) = (&pred, v.well_specified) {
            for (c, value) in &v.values {
                let input: Vec<u64> = p.inputs().iter().map(|&(_, q)| c[q]).collect();
                let expected = u8::from(pred.contains(&input)?);
                if *value != Some(expected) {
                    line.ok = false;
                    line.detail = format!(
                        "incorrect input {} stabilizes to {}",
                        fmt_input(&p.input_population(c)),
                        value.map_or("none".to_string(), |b| b.to_string())
                    );
                    break;
                }
            }
            if line.ok {
                line.detail = format!("correct ({} initial)", seeds.len());
            }
        }
        lines.push(line);
    }
    let all_ok = lines.iter().all(|l| l.ok);

    let mut sym = None;
    if symbolic {
        let opts = DecisionOptions {
            reach: ctx.reach,
            strategy: Strategy::Auto,
        };
        let (v, agree) = match &pred {
            None => {
                let init_arg = pf
                    .init_config
                    .as_ref()
                    .filter(|_| p.inputs().is_empty())
                    .map(|c| singleton(p, c));
                let v = decision::well_specified(p, init_arg.as_ref(), &opts)?;
                let agree = match (v.kind, &v.witness, v.violated) {
                    (VerdictKind::WellSpecified, _, _) => all_ok,
                    (_, Some(w), Some(violation)) => {
                        let norm = p.normalize()?;
                        let lifted = norm.lift(&init)?;
                        oracle::confirms_witness(
                            &norm.protocol,
                            &lifted,
                            w,
                            violation,
                            &ctx.oracle,
                        )?
                    }
                    _ => false,
                };
                (v, agree)
            }
            Some(pred) => {
                let v = decision::check_correct(p, pred, &opts)?;
                let agree = match v.kind {
                    VerdictKind::Correct => all_ok,
                    _ => match v.original_witness() {
                        Some(c) => {
                            let input: Vec<u64> = p.inputs().iter().map(|&(_, q)| c[q]).collect();
                            let expected = u8::from(pred.contains(&input)?);
                            let got =
                                oracle::stabilizes_to(p, &Configuration::new(c)?, &ctx.oracle)?;
                            got != Some(expected)
                        }
                        None => false,
                    },
                };
                (v, agree)
            }
        };
        sym = Some((v, agree));
    }

    let mut out = String::new();
    for l in &lines {
        if ctx.kv {
            let _ = writeln!(
                out,
                "size.{}={}",
                l.size,
                if l.ok { "pass" } else { "fail" }
            );
            let _ = writeln!(out, "size.{}.detail={}", l.size, l.detail);
        } else {
            let _ = writeln!(
                out,
                "size {}: {} {}",
                l.size,
                if l.ok { "pass" } else { "FAIL" },
                l.detail
            );
        }
    }
    let mut agree = true;
    if let Some((v, a)) = &sym {
        agree = *a;
        if ctx.kv {
            for line in v.display_kv(false).lines() {
                let _ = writeln!(out, "symbolic.{line}");
            }
            let _ = writeln!(out, "agreement={}", if *a { "yes" } else { "no" });
        } else {
            let _ = write!(out, "symbolic: {}", v.display_text(false));
            let _ = writeln!(out, "agreement: {}", if *a { "yes" } else { "no" });
        }
    }
    Ok((if all_ok && agree { 0 } else { 1 }, out))
}

fn fmt_input(input: &[(String, u64)]) -> String {
    input
        .iter()
        .map(|(v, c)| format!("{v}={c}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn parse_counts(text: &str, p: &PopulationProtocol) -> CliResult<Configuration> {
    let mut counts = vec![0u64; p.num_states()];
    for tok in text.split_whitespace() {
        let (name, n) = tok
            .split_once(':')
            .ok_or_else(|| Failure::Usage(format!("expected `state:count`, found `{tok}`")))?;
        let q = p
            .scheme()
            .state_id(name)
            .ok_or_else(|| Failure::Core(Error::UndeclaredState(name.to_string())))?;
        counts[q] += n
            .parse::<u64>()
            .map_err(|_| Failure::Usage(format!("bad count in `{tok}`")))?;
    }
    Ok(Configuration::new(counts)?)
}

fn simulate(
    ctx: &Ctx,
    file: &Path,
    size: Option<u64>,
    init: Option<&str>,
    steps: u64,
    seed: u64,
) -> CliResult<(i32, String)> {
    let pf = load(file)?;
    let p = &pf.protocol;
    let c0 = match (size, init, &pf.init_config) {
        (Some(n), _, _) => {
            if p.inputs().is_empty() {
                return Err(Error::NoInputs.into());
            }
            let mut counts = vec![0u64; p.num_states()];
            for k in 0..n {
                counts[p.inputs()[(k % p.inputs().len() as u64) as usize].1] += 1;
            }
            Configuration::new(counts)?
        }
        (None, Some(text), _) => parse_counts(text, p)?,
        (None, None, Some(c)) => c.clone(),
        (None, None, None) => return Err(Failure::Usage("give --size or --init".into())),
    };
    let t = oracle::simulate_fair(p, &c0, steps, seed, &ctx.oracle)?;
    let show = |v: Option<u8>| v.map_or("none".to_string(), |b| b.to_string());
    let out = if ctx.kv {
        t.display(p.states()).to_string()
    } else {
        format!(
            "start: {}\nsteps: {}\nfinal: {}\nconsensus: {}\nin bottom SCC: {}\nstabilized: {}\n",
            c0.display(p.states()),
            t.steps,
            DisplayCounts {
                counts: &t.final_config,
                states: p.states()
            },
            show(t.final_consensus),
            if t.in_bottom_scc { "yes" } else { "no" },
            show(t.stabilized)
        )
    };
    Ok((if t.stabilized.is_some() { 0 } else { 1 }, out))
}

fn normalize(ctx: &Ctx, file: &Path) -> CliResult<(i32, String)> {
    let pf = load(file)?;
    let norm = pf.protocol.normalize()?;
    if ctx.kv {
        let q = &norm.protocol;
        return Ok((
            0,
            format!(
                "changed={}\nadded={}\nstates={}\ntransitions={}\n",
                norm.changed(),
                decision::added_states(&norm).join(" "),
                q.num_states(),
                q.scheme().transitions().len()
            ),
        ));
    }
    let init = match &pf.init_config {
        Some(c) => Some(Configuration::new(norm.lift_point(c.counts()))?),
        None => None,
    };
    Ok((0, format::print_protocol(&norm.protocol, init.as_ref())))
}

fn gen_tm(
    ctx: &Ctx,
    tmfile: &Path,
    output: Option<&Path>,
    input: Option<&str>,
    validate: bool,
) -> CliResult<(i32, String)> {
    let machine = format::parse_tm(&read(tmfile)?).map_err(|e| match e {
        Error::Parse { line, col, msg } => {
            Failure::Usage(format!("{}:{line}:{col}: {msg}", tmfile.display()))
        }
        e => Failure::Core(e),
    })?;
    let word: Vec<String> = match input {
        Some(w) if w.contains(char::is_whitespace) => {
            w.split_whitespace().map(String::from).collect()
        }
        Some(w) => w.chars().map(String::from).collect(),
        None => machine.input.clone().ok_or_else(|| {
            Failure::Usage("no input word: give --input or an `input:` line".into())
        })?,
    };
    let gi = tm::encode_tm(&machine, &word)?;
    let text = format::print_protocol(&gi.protocol, Some(&gi.initial));
    let run = machine.run(&word)?;
    let mut summary = vec![
        ("states".to_string(), gi.protocol.num_states().to_string()),
        (
            "transitions".to_string(),
            gi.protocol.scheme().transitions().len().to_string(),
        ),
        ("good_size".to_string(), gi.good_size.to_string()),
        ("machine".to_string(), format!("{run:?}").to_lowercase()),
    ];
    if validate {
        let r = tm::validate_instance(&gi, &ctx.oracle)?;
        for line in r.kv().lines() {
            let (k, v) = line.split_once('=').expect("key=value");
            summary.push((k.to_string(), v.to_string()));
        }
    }
    let mut out = String::new();
    match output {
        Some(path) => {
            std::fs::write(path, &text).map_err(|e| Failure::Io(path.to_path_buf(), e))?;
            if ctx.kv {
                let _ = writeln!(out, "output={}", path.display());
                for (k, v) in &summary {
                    let _ = writeln!(out, "{k}={v}");
                }
            } else {
                let _ = writeln!(out, "wrote {}", path.display());
                for (k, v) in &summary {
                    let _ = writeln!(out, "{k}: {v}");
                }
            }
        }
        None => {
            out.push_str(&text);
            for (k, v) in &summary {
                let _ = writeln!(out, "# {k}={v}");
            }
        }
    }
    Ok((0, out))
}

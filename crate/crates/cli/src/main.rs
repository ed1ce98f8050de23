//! `pneq`: decide, verify and explore place bisimulations on `.pnet` files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use pneq_cli::{Report, Stats, Violation};
use pneq_core::format::{format_marking, format_slot, parse_marking, parse_net, parse_relation, serialize_net, serialize_relation};
use pneq_core::gen::{self, NetShape, DEFAULT_SEED};
use pneq_core::oracles::Lts;
use pneq_core::{
    bounded_game_oracle, closure_contains, decide, interleaving_bisimilar, maximal_bisimulations, step_bisimilar, verify, BisimKind,
    DecideError, DecideOptions, GameOutcome, Multiset, Net, NetDocument, OracleError, PairingWitness, PlaceRelation, RelationKind,
    Side, Slot, Step, Strategy, VerifyOptions,
};

const EQUIVALENT: u8 = 0;
const DIFFERENT: u8 = 1;
const USAGE: u8 = 2;
const EXCEEDED: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "pneq", version, about = "Place bisimulation equivalences on finite P/T nets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide whether two markings are equivalent.
    Check(CheckArgs),
    /// Check whether a relation is a bisimulation of the given kind.
    Verify(VerifyArgs),
    /// Decide whether two markings are related by the additive closure of a relation.
    Closure(ClosureArgs),
    /// List the maximal bisimulations of a net.
    Maximal(MaximalArgs),
    /// Fire a transition or a step and print the successor marking.
    Fire(FireArgs),
    /// Run an independent oracle.
    #[command(subcommand)]
    Oracle(OracleCommand),
    /// Print a seeded random net with two named markings `a` and `b`.
    Gen(GenArgs),
}

#[derive(Args, Debug)]
struct Output {
    /// Emit a JSON report instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[arg(long = "equiv", short = 'e', default_value = "place")]
    kind: BisimKind,
    net: PathBuf,
    m1: String,
    m2: String,
    /// Print the accepting relation and the pairing.
    #[arg(long)]
    witness: bool,
    /// Also write the accepting relation as a `.prel` file.
    #[arg(long, value_name = "PATH")]
    witness_file: Option<PathBuf>,
    /// Search strategy: exhaustive or saturation (default, or exhaustive with --canonical).
    #[arg(long)]
    strategy: Option<Strategy>,
    /// Report the least accepting relation in canonical order.
    #[arg(long)]
    canonical: bool,
    #[arg(long, default_value_t = pneq_core::decide::DEFAULT_MAX_INDEX_SET)]
    max_index_set: usize,
    /// Give up after examining this many relations.
    #[arg(long)]
    max_relations: Option<u64>,
    /// Give up after this many seconds.
    #[arg(long, value_name = "SECS")]
    time_limit: Option<f64>,
    /// Worker threads for candidate exploration.
    #[arg(long, default_value_t = 1, value_name = "N")]
    parallel: usize,
    #[command(flatten)]
    out: Output,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long = "equiv", short = 'e', default_value = "place")]
    kind: BisimKind,
    net: PathBuf,
    relation: PathBuf,
    /// Report every unanswered obligation instead of the first.
    #[arg(long)]
    all_violations: bool,
    #[command(flatten)]
    out: Output,
}

#[derive(Args, Debug)]
struct ClosureArgs {
    net: PathBuf,
    relation: PathBuf,
    m1: String,
    m2: String,
    /// Allow the dummy place `0` in the relation.
    #[arg(long)]
    dummy: bool,
    #[command(flatten)]
    out: Output,
}

#[derive(Args, Debug)]
struct MaximalArgs {
    net: PathBuf,
    #[arg(long = "equiv", short = 'e', default_value = "place")]
    kind: BisimKind,
    #[arg(long, default_value_t = pneq_core::decide::DEFAULT_MAX_INDEX_SET)]
    max_index_set: usize,
    #[command(flatten)]
    out: Output,
}

#[derive(Args, Debug)]
#[group(id = "move", required = true, multiple = false, args = ["trans", "step"])]
struct FireArgs {
    net: PathBuf,
    marking: String,
    /// Transition id.
    #[arg(long)]
    trans: Option<String>,
    /// Step as a sum of transition ids, e.g. `t1 + 2*t2`.
    #[arg(long)]
    step: Option<String>,
    #[command(flatten)]
    out: Output,
}

#[derive(Subcommand, Debug)]
enum OracleCommand {
    /// Interleaving bisimilarity on the reachable state space.
    Int(LtsArgs),
    /// Step bisimilarity on the reachable state space.
    Step(LtsArgs),
    /// Bounded one-step game for a relation.
    Game(GameArgs),
}

#[derive(Args, Debug)]
struct LtsArgs {
    net: PathBuf,
    m1: String,
    m2: String,
    #[arg(long, default_value_t = 10_000)]
    max_states: usize,
    #[command(flatten)]
    out: Output,
}

#[derive(Args, Debug)]
struct GameArgs {
    #[arg(long = "equiv", short = 'e', default_value = "place")]
    kind: BisimKind,
    net: PathBuf,
    relation: PathBuf,
    /// Largest marking size explored.
    #[arg(long, default_value_t = 3)]
    bound: usize,
    #[command(flatten)]
    out: Output,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long, env = "PNEQ_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = 4)]
    places: usize,
    #[arg(long, default_value_t = 5)]
    transitions: usize,
    /// Largest size of the markings `a` and `b`.
    #[arg(long, default_value_t = 3)]
    marking_size: u64,
}

enum Failure {
    Usage(String),
    Exceeded(String),
}

impl From<DecideError> for Failure {
    fn from(e: DecideError) -> Self {
        match e {
            DecideError::TooLarge { .. } | DecideError::BudgetExceeded { .. } => Failure::Exceeded(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::TooLarge { .. } | OracleError::BoundExceeded(_) => Failure::Exceeded(e.to_string()),
            OracleError::Net(_) => Failure::Usage(e.to_string()),
        }
    }
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let result = match &cli.command {
        Command::Check(a) => check(a, started),
        Command::Verify(a) => cmd_verify(a, started),
        Command::Closure(a) => closure(a, started),
        Command::Maximal(a) => maximal(a, started),
        Command::Fire(a) => fire(a, started),
        Command::Oracle(OracleCommand::Int(a)) => lts_oracle(a, false, started),
        Command::Oracle(OracleCommand::Step(a)) => lts_oracle(a, true, started),
        Command::Oracle(OracleCommand::Game(a)) => game(a, started),
        Command::Gen(a) => generate(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(USAGE)
        }
        Err(Failure::Exceeded(msg)) => {
            eprintln!("exceeded: {msg}");
            ExitCode::from(EXCEEDED)
        }
    }
}

fn load_net(path: &Path) -> Result<NetDocument, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    parse_net(&text).map_err(|e| usage(format!("{}:{e}", path.display())))
}

/// A named marking of the document, or a marking expression.
fn load_marking(doc: &NetDocument, text: &str) -> Result<Multiset, Failure> {
    if let Some(m) = doc.markings.get(text.trim()) {
        return Ok(m.clone());
    }
    parse_marking(&doc.net, text).map_err(|e| usage(format!("marking `{text}`: {e}")))
}

fn load_relation(net: &Net, path: &Path, kind: RelationKind) -> Result<PlaceRelation, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let doc = parse_relation(net, &text, kind == RelationKind::Dummy).map_err(|e| usage(format!("{}:{e}", path.display())))?;
    doc.to_relation(net.place_count(), kind).map_err(usage)
}

fn command_echo() -> Vec<String> {
    std::env::args().skip(1).collect()
}

fn elapsed_ms(started: Instant) -> f64 {
    started.elapsed().as_secs_f64() * 1e3
}

fn slot_pairs(net: &Net, pairs: impl IntoIterator<Item = (Slot, Slot)>) -> Vec<[String; 2]> {
    pairs.into_iter().map(|(a, b)| [format_slot(net, a), format_slot(net, b)]).collect()
}

fn show_pairs(pairs: &[[String; 2]]) -> String {
    let inner: Vec<String> = pairs.iter().map(|[a, b]| format!("({a}, {b})")).collect();
    format!("{{{}}}", inner.join(", "))
}

fn side_name(side: Side) -> &'static str {
    match side {
        Side::Left => "left",
        Side::Right => "right",
    }
}

fn emit(json: bool, report: &Report, text: &str) {
    if json {
        println!("{}", serde_json::to_string_pretty(report).expect("report serializes"));
    } else {
        print!("{text}");
    }
}

fn check(a: &CheckArgs, started: Instant) -> Result<u8, Failure> {
    let doc = load_net(&a.net)?;
    let net = &doc.net;
    let m1 = load_marking(&doc, &a.m1)?;
    let m2 = load_marking(&doc, &a.m2)?;
    let strategy = a.strategy.unwrap_or(if a.canonical { Strategy::Exhaustive } else { Strategy::Saturation });
    let opts = DecideOptions {
        strategy,
        canonical: a.canonical,
        max_index_set: a.max_index_set,
        max_relations: a.max_relations,
        time_limit: a.time_limit.map(Duration::from_secs_f64),
        threads: a.parallel.max(1),
    };
    let verdict = decide(net, a.kind, &m1, &m2, &opts)?;
    let mut report = Report {
        command: command_echo(),
        verdict: if verdict.equivalent { "equivalent" } else { "not-equivalent" }.into(),
        kind: Some(a.kind.name().into()),
        stats: Stats {
            strategy: Some(verdict.strategy.name().into()),
            relations_examined: Some(verdict.relations_examined),
            elapsed_ms: elapsed_ms(started),
        },
        ..Default::default()
    };
    let mut text = String::new();
    writeln!(text, "{}", if verdict.equivalent { "equivalent" } else { "not equivalent" }).unwrap();
    if let Some((r, pairing)) = &verdict.witness {
        if let Some(path) = &a.witness_file {
            std::fs::write(path, serialize_relation(net, &r.pairs())).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        }
        if a.witness || a.out.json {
            let rel = slot_pairs(net, r.pairs());
            let pairing = pairing_pairs(net, pairing);
            writeln!(text, "relation: {}", show_pairs(&rel)).unwrap();
            writeln!(text, "pairing: {}", show_pairs(&pairing)).unwrap();
            report.witness = Some(rel);
            report.pairing = Some(pairing);
        }
    }
    writeln!(
        text,
        "{} strategy, {} relations examined, {:.1} ms",
        verdict.strategy.name(),
        verdict.relations_examined,
        report.stats.elapsed_ms
    )
    .unwrap();
    emit(a.out.json, &report, &text);
    Ok(if verdict.equivalent { EQUIVALENT } else { DIFFERENT })
}

fn pairing_pairs(net: &Net, pairing: &PairingWitness) -> Vec<[String; 2]> {
    slot_pairs(net, pairing.expanded())
}

fn cmd_verify(a: &VerifyArgs, started: Instant) -> Result<u8, Failure> {
    let doc = load_net(&a.net)?;
    let net = &doc.net;
    let r = load_relation(net, &a.relation, a.kind.relation_kind())?;
    let opts = VerifyOptions {
        all_violations: a.all_violations,
    };
    let report = verify(net, &r, a.kind, opts).map_err(usage)?;
    let violations: Vec<Violation> = report
        .violations
        .iter()
        .map(|o| {
            let (m1, m2) = o.marking_pair(net);
            Violation {
                transition: net.transitions()[o.transition.index()].id.clone(),
                side: side_name(o.side).into(),
                m1: format_marking(net, &m1),
                m2: format_marking(net, &m2),
            }
        })
        .collect();
    let accepted = report.accepted();
    let mut text = String::new();
    writeln!(text, "{}", if accepted { "accepted" } else { "rejected" }).unwrap();
    for v in &violations {
        writeln!(text, "unanswered: {} ({}) at ({}, {})", v.transition, v.side, v.m1, v.m2).unwrap();
    }
    let out = Report {
        command: command_echo(),
        verdict: if accepted { "accepted" } else { "rejected" }.into(),
        kind: Some(a.kind.name().into()),
        violations,
        stats: Stats {
            elapsed_ms: elapsed_ms(started),
            ..Default::default()
        },
        ..Default::default()
    };
    emit(a.out.json, &out, &text);
    Ok(if accepted { EQUIVALENT } else { DIFFERENT })
}

fn closure(a: &ClosureArgs, started: Instant) -> Result<u8, Failure> {
    let doc = load_net(&a.net)?;
    let net = &doc.net;
    let kind = if a.dummy { RelationKind::Dummy } else { RelationKind::Plain };
    let r = load_relation(net, &a.relation, kind)?;
    let m1 = load_marking(&doc, &a.m1)?;
    let m2 = load_marking(&doc, &a.m2)?;
    let found = closure_contains(&r, &m1, &m2);
    let mut report = Report {
        command: command_echo(),
        verdict: if found.is_some() { "related" } else { "not-related" }.into(),
        stats: Stats {
            elapsed_ms: elapsed_ms(started),
            ..Default::default()
        },
        ..Default::default()
    };
    let text = match &found {
        Some(p) => {
            let pairs = pairing_pairs(net, p);
            let text = format!("pairing: {}\n", show_pairs(&pairs));
            report.pairing = Some(pairs);
            text
        }
        None => "not related\n".to_string(),
    };
    emit(a.out.json, &report, &text);
    Ok(if found.is_some() { EQUIVALENT } else { DIFFERENT })
}

fn maximal(a: &MaximalArgs, started: Instant) -> Result<u8, Failure> {
    let doc = load_net(&a.net)?;
    let net = &doc.net;
    let found = maximal_bisimulations(net, a.kind, a.max_index_set)?;
    let relations: Vec<Vec<[String; 2]>> = found.iter().map(|r| slot_pairs(net, r.pairs())).collect();
    let mut text = String::new();
    for (i, r) in relations.iter().enumerate() {
        writeln!(text, "R{}: {}", i + 1, show_pairs(r)).unwrap();
    }
    let report = Report {
        command: command_echo(),
        verdict: format!("{} maximal", relations.len()),
        kind: Some(a.kind.name().into()),
        relations,
        stats: Stats {
            elapsed_ms: elapsed_ms(started),
            ..Default::default()
        },
        ..Default::default()
    };
    emit(a.out.json, &report, &text);
    Ok(EQUIVALENT)
}

fn parse_step(net: &Net, text: &str) -> Result<Step, Failure> {
    let mut occurrences = Vec::new();
    for term in text.split('+') {
        let term = term.trim();
        let (k, id) = match term.split_once('*') {
            Some((k, id)) => (k.trim().parse::<u32>().map_err(|_| usage(format!("bad multiplicity in `{term}`")))?, id.trim()),
            None => (1, term),
        };
        let t = net.transition_by_id(id).ok_or_else(|| usage(format!("unknown transition `{id}`")))?;
        occurrences.push((t, k));
    }
    Step::new(occurrences).map_err(usage)
}

fn fire(a: &FireArgs, started: Instant) -> Result<u8, Failure> {
    let doc = load_net(&a.net)?;
    let net = &doc.net;
    let m = load_marking(&doc, &a.marking)?;
    let step = match (&a.trans, &a.step) {
        (Some(id), _) => Step::single(net.transition_by_id(id).ok_or_else(|| usage(format!("unknown transition `{id}`")))?),
        (None, Some(s)) => parse_step(net, s)?,
        (None, None) => return Err(usage("one of --trans or --step is required")),
    };
    let (verdict, marking, code) = match net.fire_step(&m, &step) {
        Ok(next) => ("fired", Some(format_marking(net, &next)), EQUIVALENT),
        Err(pneq_core::NetError::NotEnabled(_) | pneq_core::NetError::StepNotEnabled) => ("not-enabled", None, DIFFERENT),
        Err(e) => return Err(usage(e)),
    };
    let text = match &marking {
        Some(s) => format!("{s}\n"),
        None => "not enabled\n".to_string(),
    };
    let report = Report {
        command: command_echo(),
        verdict: verdict.into(),
        marking,
        stats: Stats {
            elapsed_ms: elapsed_ms(started),
            ..Default::default()
        },
        ..Default::default()
    };
    emit(a.out.json, &report, &text);
    Ok(code)
}

fn lts_oracle(a: &LtsArgs, step: bool, started: Instant) -> Result<u8, Failure> {
    let doc = load_net(&a.net)?;
    let net = &doc.net;
    let m1 = load_marking(&doc, &a.m1)?;
    let m2 = load_marking(&doc, &a.m2)?;
    let same = if step {
        step_bisimilar(net, &m1, &m2, a.max_states)?
    } else {
        interleaving_bisimilar(net, &m1, &m2, a.max_states)?
    };
    let states = if step { Lts::step(net, &[m1, m2], a.max_states) } else { Lts::interleaving(net, &[m1, m2], a.max_states) }?.states.len();
    let report = Report {
        command: command_echo(),
        verdict: if same { "equivalent" } else { "not-equivalent" }.into(),
        kind: Some(if step { "step" } else { "interleaving" }.into()),
        stats: Stats {
            elapsed_ms: elapsed_ms(started),
            ..Default::default()
        },
        ..Default::default()
    };
    let text = format!("{} ({states} states)\n", if same { "equivalent" } else { "not equivalent" });
    emit(a.out.json, &report, &text);
    Ok(if same { EQUIVALENT } else { DIFFERENT })
}

fn game(a: &GameArgs, started: Instant) -> Result<u8, Failure> {
    let doc = load_net(&a.net)?;
    let net = &doc.net;
    let r = load_relation(net, &a.relation, a.kind.relation_kind())?;
    let outcome = bounded_game_oracle(net, &r, a.kind, a.bound)?;
    let mut report = Report {
        command: command_echo(),
        kind: Some(a.kind.name().into()),
        stats: Stats {
            elapsed_ms: elapsed_ms(started),
            ..Default::default()
        },
        ..Default::default()
    };
    let (text, code) = match outcome {
        GameOutcome::Pass => {
            report.verdict = "accepted".into();
            (format!("no violation up to size {}\n", a.bound), EQUIVALENT)
        }
        GameOutcome::Violation(v) => {
            let t = net.transitions()[v.transition.index()].id.clone();
            let violation = Violation {
                transition: t,
                side: side_name(v.side).into(),
                m1: format_marking(net, &v.m1),
                m2: format_marking(net, &v.m2),
            };
            let text = format!("violation: {} ({}) at ({}, {})\n", violation.transition, violation.side, violation.m1, violation.m2);
            report.verdict = "rejected".into();
            report.violations.push(violation);
            (text, DIFFERENT)
        }
    };
    emit(a.out.json, &report, &text);
    Ok(code)
}

fn generate(a: &GenArgs) -> Result<u8, Failure> {
    let mut rng = gen::rng(a.seed);
    let shape = NetShape::small(a.places.max(1), a.transitions);
    let net = gen::random_net(&mut rng, &shape);
    let places = net.place_count();
    let mut doc = NetDocument {
        markings: Default::default(),
        net,
    };
    for name in ["a", "b"] {
        let m = gen::random_marking(&mut rng, places, a.marking_size);
        doc.markings.insert(name.into(), m);
    }
    print!("{}", serialize_net(&doc));
    Ok(EQUIVALENT)
}

//! `loopprob` command-line front end.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use loopprob::check::{check_graph, run_suite, CheckConfig, CheckReport};
use loopprob::io::{berry_report, format_sig, load_graph, load_states, load_world, prob_report, BerryReport, ProbReport};
use loopprob::transition::verify_tagged_equivalence;
use loopprob::{expected_coins, monte_carlo, CoinPolicy, Error, GateLedger, WhichPathTag};

#[derive(Parser)]
#[command(name = "loopprob", version, about = "Closed-loop amplitudes, Berry phases and the coin parable")]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Table, global = true)]
    format: Format,
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Subcommand)]
enum Command {
    /// Γ and Berry phase around a loop of states.
    Berry {
        /// States file, or the builtin table `octant`.
        #[arg(long)]
        states: String,
        /// Comma-separated state labels, e.g. `z,x,y`.
        #[arg(long)]
        path: String,
    },
    /// Closed-loop probability of a transition graph.
    Prob {
        /// Graph file, or a builtin: one-route, two-route, destructive.
        #[arg(long)]
        graph: String,
        /// Tag which path was taken, pruning mixed loops.
        #[arg(long)]
        decohere: bool,
    },
    /// Exact and simulated coin ledgers for a parable world.
    Parable {
        /// World file, or a builtin: paper, two-road, one-road.
        #[arg(long, default_value = "paper")]
        world: String,
        #[arg(long, value_enum)]
        policy: PolicyArg,
        /// Simulated days; 0 prints the exact ledger only.
        #[arg(long, default_value_t = 0)]
        days: u64,
    },
    /// Randomized invariant checks.
    Check {
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 8)]
        max_dim: usize,
        #[arg(long, default_value_t = 6)]
        max_routes: usize,
        /// Check one graph file or builtin instead of random graphs.
        #[arg(long)]
        graph: Option<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Diligent,
    Fickle,
}

impl From<PolicyArg> for CoinPolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Diligent => CoinPolicy::Diligent,
            PolicyArg::Fickle => CoinPolicy::Fickle,
        }
    }
}

enum Failure {
    Lib(Error),
    Io(String),
    Check,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::UnknownLabel(_) => 3,
        Error::UndefinedBerryPhase => 4,
        _ => 2,
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn berry_table(r: &BerryReport) -> String {
    format!(
        "path: {}\nGamma: [{}, {}]\ngamma: {}\n",
        r.path.join(","),
        format_sig(r.gamma_product[0]),
        format_sig(r.gamma_product[1]),
        format_sig(r.berry_phase)
    )
}

fn complex_sig([re, im]: [f64; 2]) -> String {
    let sign = if im.is_sign_negative() && im != 0.0 { '-' } else { '+' };
    format!("{} {sign} {}i", format_sig(re), format_sig(im.abs()))
}

fn prob_table(r: &ProbReport) -> String {
    let mut out = String::new();
    let rows: Vec<(String, String, String)> = r
        .loops
        .iter()
        .map(|l| (l.out.join(">"), l.inbound.join(">"), complex_sig(l.gamma)))
        .collect();
    let w0 = rows.iter().map(|r| r.0.len()).max().unwrap_or(0).max(3);
    let w1 = rows.iter().map(|r| r.1.len()).max().unwrap_or(0).max(2);
    let _ = writeln!(out, "{:<w0$}  {:<w1$}  Gamma", "out", "in");
    for (o, i, g) in &rows {
        let _ = writeln!(out, "{o:<w0$}  {i:<w1$}  {g}");
    }
    let _ = writeln!(out, "loops: {}", r.loops.len());
    let _ = writeln!(out, "gamma_rule_p: {}", format_sig(r.gamma_rule_p));
    let _ = writeln!(out, "born_p: {}", format_sig(r.born_p));
    let _ = writeln!(out, "interference: {}", format_sig(r.interference));
    if r.decohered {
        let _ = writeln!(out, "decohered: true");
    }
    if let Some(p) = r.classical_p {
        let _ = writeln!(out, "classical_p: {}", format_sig(p));
    }
    if let Some(p) = r.tagged_born_p {
        let _ = writeln!(out, "tagged_born_p: {}", format_sig(p));
    }
    out
}

#[derive(Serialize)]
struct ParableReport {
    policy: String,
    days: u64,
    seed: u64,
    round_trips: usize,
    net_per_visit: String,
    gates: serde_json::Value,
}

fn parable_json(ledger: &GateLedger, seed: u64) -> String {
    json(&ParableReport {
        policy: ledger.policy.to_string(),
        days: ledger.days,
        seed,
        round_trips: ledger.trips,
        net_per_visit: ledger.net_per_visit.to_string(),
        gates: ledger.to_json(),
    })
}

fn check_table(r: &CheckReport) -> String {
    let mut out = String::new();
    let w = r.records.iter().map(|c| c.name.len()).max().unwrap_or(0).max(9);
    let _ = writeln!(out, "{:<w$}  {:>9}  {:<18}  {:<9}  result  seed", "invariant", "instances", "max deviation", "tolerance");
    for c in &r.records {
        let _ = writeln!(
            out,
            "{:<w$}  {:>9}  {:<18}  {:<9}  {:<6}  {}",
            c.name,
            c.instances,
            format_sig(c.max_deviation),
            format_sig(c.tolerance),
            if c.passed { "pass" } else { "FAIL" },
            c.seed
        );
    }
    let _ = writeln!(out, "{}", if r.passed { "all invariants passed" } else { "invariant failures" });
    out
}

fn run(cli: &Cli) -> Result<String, Failure> {
    let table = cli.format == Format::Table;
    match &cli.command {
        Command::Berry { states, path } => {
            let states = load_states(states)?;
            let labels: Vec<&str> = path.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
            let report = berry_report(&states, &labels)?;
            Ok(if table { berry_table(&report) } else { json(&report) })
        }
        Command::Prob { graph, decohere } => {
            let (graph, file_tag) = load_graph(graph)?;
            let tag = if *decohere { WhichPathTag::Tagged } else { file_tag };
            let report = prob_report(&graph, tag, cli.seed)?;
            Ok(if table { prob_table(&report) } else { json(&report) })
        }
        Command::Parable { world, policy, days } => {
            let world = load_world(world)?;
            let policy = CoinPolicy::from(*policy);
            let ledger = if *days == 0 {
                expected_coins(&world, policy)?
            } else {
                monte_carlo(&world, policy, *days, cli.seed)?
            };
            Ok(if table { ledger.to_table() } else { parable_json(&ledger, cli.seed) })
        }
        Command::Check { trials, max_dim, max_routes, graph } => {
            let report = match graph {
                Some(source) => {
                    let (graph, _) = load_graph(source)?;
                    let mut report = check_graph(&graph, cli.seed)?;
                    if graph.interior_layer_count() == 1 {
                        report.merge(&verify_tagged_equivalence(&graph, cli.seed)?);
                    }
                    report
                }
                None => run_suite(&CheckConfig {
                    trials: *trials,
                    max_dim: *max_dim,
                    max_routes: *max_routes,
                    seed: cli.seed,
                })?,
            };
            let text = if table { check_table(&report) } else { json(&report) };
            if !report.passed {
                emit(cli, &text)?;
                for f in report.failures() {
                    eprintln!(
                        "failed: {} (max deviation {:e}, tolerance {:e}, seed {})",
                        f.name, f.max_deviation, f.tolerance, f.seed
                    );
                }
                return Err(Failure::Check);
            }
            Ok(text)
        }
    }
}

fn emit(cli: &Cli, text: &str) -> Result<(), Failure> {
    match &cli.output {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|text| emit(&cli, &text));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check) => ExitCode::from(1),
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

//! `krein-kit`: command-line front end. Every invocation prints one JSON
//! report (`"schema": "krein-kit/1"`) and exits 0 on success, 1 when a
//! mathematical precondition fails and 2 on I/O or schema errors.

mod commands;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use report::Report;

#[derive(Debug, Parser)]
#[command(name = "krein-kit", version, about = "J-normal projections in finite-dimensional Krein spaces")]
pub struct Cli {
    /// Frame file `{"p": p, "q": q, "tol": t}`; overrides any inline frame.
    #[arg(long, global = true, value_name = "FILE")]
    pub frame: Option<PathBuf>,

    /// Frame given inline as `P,Q` (used when no frame file is given).
    #[arg(long, global = true, value_name = "P,Q", value_parser = parse_pair)]
    pub pq: Option<(usize, usize)>,

    /// Tolerance for every predicate; replaces the frame's `tol`
    /// (default 1e-9).
    #[arg(long, global = true, value_name = "X")]
    pub tol: Option<f64>,

    /// Seed for generators and the self test.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Write the report to this file instead of standard output.
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Projection, J-selfadjoint, J-antihermitian, J-unitary and J-normal flags.
    Classify { operator: PathBuf },
    /// E = QQ#, P = Q(I − Q#), F = (I − Q)(I − Q)# of a J-normal projection.
    Decompose { q: PathBuf },
    /// Inertia indices and derived subspaces of a column span.
    Signature { subspace: PathBuf },
    /// Five-index profile of a J-normal projection.
    Profile { q: PathBuf },
    /// Local cross section s(Q) with s(Q) Q0 s(Q)# = Q.
    Section {
        #[arg(long)]
        q0: PathBuf,
        #[arg(long)]
        q: PathBuf,
    },
    /// J-unitary carrying Q0 to Q, by composed local sections.
    Connect {
        #[arg(long)]
        q0: PathBuf,
        #[arg(long)]
        q: PathBuf,
    },
    /// Samples of the path from the identity to a J-unitary.
    Curve {
        unitary: PathBuf,
        #[arg(long, default_value_t = 11)]
        samples: usize,
    },
    /// J-antihermitian logarithm of a J-unitary with ‖U − I‖ < 1.
    Log { unitary: PathBuf },
    /// Deck of a family member (`--q`) or the member selected by a deck (`--m`).
    Deck {
        #[arg(long)]
        family: PathBuf,
        #[arg(long, required_unless_present = "m", conflicts_with = "m")]
        q: Option<PathBuf>,
        #[arg(long)]
        m: Option<PathBuf>,
    },
    /// Covering map r(Q) onto the base deck, with round-trip residuals.
    Covering {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        q: PathBuf,
    },
    /// Seeded random instances.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Runs the acceptance suite; exit 0 iff every criterion passes.
    Selftest {
        /// Run the criteria on separate threads.
        #[arg(long)]
        parallel: bool,
    },
}

#[derive(Debug, Clone, Subcommand)]
pub enum GenKind {
    /// J-unitary with angular operator of norm SPREAD.
    Unitary {
        #[arg(long, default_value_t = 0.5)]
        spread: f64,
    },
    /// Pseudo-regular subspace with signature `KP,KM,K0`.
    Subspace {
        #[arg(long, value_parser = parse_indices::<3>)]
        signature: Indices,
    },
    /// J-normal projection with profile `KP,KM,K0,CKP,CKM`.
    Projection {
        #[arg(long, value_parser = parse_indices::<5>)]
        profile: Indices,
    },
    /// Conjugate of Q0 within FRACTION of its section radius.
    Perturb {
        #[arg(long)]
        q0: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        fraction: f64,
    },
    /// Family file for a random range with signature `KP,KM,K0`, plus one member.
    Family {
        #[arg(long, value_parser = parse_indices::<3>)]
        signature: Indices,
    },
}

/// A comma-separated index list such as `1,0,1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Indices(pub Vec<usize>);

fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let v = parse_indices::<2>(s)?.0;
    Ok((v[0], v[1]))
}

fn parse_indices<const N: usize>(s: &str) -> Result<Indices, String> {
    let v: Vec<usize> = s
        .split(',')
        .map(|x| x.trim().parse::<usize>().map_err(|e| format!("{x:?}: {e}")))
        .collect::<Result<_, _>>()?;
    if v.len() != N {
        return Err(format!("expected {N} comma-separated integers, got {}", v.len()));
    }
    Ok(Indices(v))
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Classify { .. } => "classify",
        Command::Decompose { .. } => "decompose",
        Command::Signature { .. } => "signature",
        Command::Profile { .. } => "profile",
        Command::Section { .. } => "section",
        Command::Connect { .. } => "connect",
        Command::Curve { .. } => "curve",
        Command::Log { .. } => "log",
        Command::Deck { .. } => "deck",
        Command::Covering { .. } => "covering",
        Command::Gen { .. } => "gen",
        Command::Selftest { .. } => "selftest",
    }
}

fn emit(value: &serde_json::Value, out: Option<&PathBuf>) -> Result<(), String> {
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    match out {
        Some(path) => std::fs::write(path, text + "\n").map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "{text}").map_err(|e| e.to_string())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                e.exit();
            }
            let report = json!({
                "schema": krein_kit::io::SCHEMA,
                "command": null,
                "status": "input_error",
                "exit_code": 2,
                "error": e.render().to_string(),
            });
            let _ = emit(&report, None);
            return ExitCode::from(2);
        }
    };
    let name = command_name(&cli.command);
    let mut report = Report::default();
    let result = commands::run(&cli, &mut report);
    let (value, code) = report.finish(name, &result);
    if let Err(msg) = emit(&value, cli.out.as_ref()) {
        let failure = json!({
            "schema": krein_kit::io::SCHEMA,
            "command": name,
            "status": "input_error",
            "exit_code": 2,
            "error": msg,
        });
        let _ = emit(&failure, None);
        return ExitCode::from(2);
    }
    ExitCode::from(code as u8)
}

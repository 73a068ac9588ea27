//! Command-line front end: classification, normal forms, measures, state
//! generation, catalog enumeration and the claim verification suites.
//!
//! Exit codes: 0 success (whatever the verdict), 2 I/O or document error,
//! 3 indeterminate normal form, 4 no applicable measure, 5 generation from
//! a support without certificate, 6 cap exceeded, 1 internal error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use qudit_balance::{
    applicable_measures, classify, construct_max_entangled, enumerate_irreducible,
    find_certificate, normal_form, verify_claim, BMatrix, BalanceCertificate, Error, PureState,
};

const EXIT_INTERNAL: u8 = 1;
const EXIT_DOCUMENT: u8 = 2;
const EXIT_INDETERMINATE: u8 = 3;
const EXIT_NO_MEASURE: u8 = 4;
const EXIT_NO_CERTIFICATE: u8 = 5;
const EXIT_CAP: u8 = 6;

#[derive(Parser)]
#[command(
    name = "qudit-balance",
    version,
    about = "Balance classification, filtering normal forms and invariant measures for multi-qudit states"
)]
struct Cli {
    /// Tolerance for stochasticity and rank tests.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,

    /// Norm threshold below which a normal-form run is declared null-cone.
    #[arg(long, global = true, default_value_t = 1e-6)]
    null_tol: f64,

    /// Sweep budget for the normal-form iteration.
    #[arg(long, global = true, default_value_t = 10_000)]
    max_sweeps: usize,

    /// Output format; human output is a plain rendering of the JSON payload.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Seed for the randomized verification suites.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,

    /// Cap on the representation length accepted for balance analysis.
    #[arg(long = "cap-l", alias = "cap-L", global = true, default_value_t = 25)]
    cap_l: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the state in a JSON document.
    Classify { file: PathBuf },
    /// Iterate local filtering toward the normal form.
    NormalForm { file: PathBuf },
    /// Evaluate every applicable invariant measure.
    Measures { file: PathBuf },
    /// Write a maximally entangled state document.
    Generate {
        /// Generalized GHZ state: Q qudits of dimension D.
        #[arg(long, num_args = 2, value_names = ["Q", "D"], conflicts_with = "from_b")]
        ghz: Option<Vec<usize>>,
        /// Support document {"q","d","B",["n"]}; weights are computed when absent.
        #[arg(long)]
        from_b: Option<PathBuf>,
        /// Output path (stdout when omitted).
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Enumerate irreducibly balanced support classes as JSON lines.
    Enumerate { q: usize, d: usize, l_max: usize },
    /// Run one of the five claim verification suites:
    /// 1 product states are never irreducibly balanced; 2 converged normal
    /// forms carry balance certificates; 3 irreducible supports respect the
    /// length bound (d-1)q+1; 4 equalization succeeds on irreducible
    /// supports; 5 balanced converges, unbalanced never does.
    Verify {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=5))]
        claim: u8,
        q: usize,
        d: usize,
        /// Sample size (suite-specific default).
        #[arg(long)]
        count: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Document(_)
        | Error::InvalidState(_)
        | Error::InvalidSystem(_)
        | Error::InvalidCertificate(_)
        | Error::NoBipartition
        | Error::ZeroNorm => EXIT_DOCUMENT,
        Error::Indeterminate { .. } => EXIT_INDETERMINATE,
        Error::NoApplicableMeasure { .. } => EXIT_NO_MEASURE,
        Error::CapExceeded(_) => EXIT_CAP,
        _ => EXIT_INTERNAL,
    }
}

fn run(cli: &Cli) -> Result<ExitCode, Error> {
    match &cli.command {
        Command::Classify { file } => cmd_classify(cli, file),
        Command::NormalForm { file } => cmd_normal_form(cli, file),
        Command::Measures { file } => cmd_measures(cli, file),
        Command::Generate { ghz, from_b, out } => cmd_generate(cli, ghz, from_b, out),
        Command::Enumerate { q, d, l_max } => cmd_enumerate(cli, *q, *d, *l_max),
        Command::Verify { claim, q, d, count } => cmd_verify(cli, *claim, *q, *d, *count),
    }
}

fn read_state(cli: &Cli, path: &Path) -> Result<PureState, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Document(format!("{}: {e}", path.display())))?;
    let state = PureState::parse(&text)?.normalize()?;
    if state.len() > cli.cap_l {
        return Err(Error::CapExceeded(format!(
            "representation length {} exceeds --cap-l {}",
            state.len(),
            cli.cap_l
        )));
    }
    Ok(state)
}

fn emit(cli: &Cli, payload: &serde_json::Value) {
    match cli.format {
        Format::Json => println!("{payload}"),
        Format::Human => println!("{}", render_human(payload, 0)),
    }
}

/// Plain-text rendering of a JSON payload, one `key: value` line per field.
fn render_human(value: &serde_json::Value, indent: usize) -> String {
    let pad = "  ".repeat(indent);
    match value {
        serde_json::Value::Object(map) => map
            .iter()
            .map(|(k, v)| match v {
                serde_json::Value::Object(_) => {
                    format!("{pad}{k}:\n{}", render_human(v, indent + 1))
                }
                serde_json::Value::Array(items)
                    if items.iter().any(|i| i.is_object() || i.is_array()) =>
                {
                    let inner: Vec<String> =
                        items.iter().map(|i| render_human(i, indent + 1)).collect();
                    format!("{pad}{k}:\n{}", inner.join("\n"))
                }
                _ => format!("{pad}{k}: {v}"),
            })
            .collect::<Vec<_>>()
            .join("\n"),
        other => format!("{pad}{other}"),
    }
}

fn cmd_classify(cli: &Cli, file: &Path) -> Result<ExitCode, Error> {
    let state = read_state(cli, file)?;
    let classification = classify(&state, cli.tol)?;
    emit(cli, &classification.to_json(state.len()));
    Ok(ExitCode::SUCCESS)
}

fn cmd_normal_form(cli: &Cli, file: &Path) -> Result<ExitCode, Error> {
    let state = read_state(cli, file)?;
    match normal_form(&state, cli.max_sweeps, cli.tol, cli.null_tol) {
        Ok(outcome) => {
            emit(cli, &outcome.to_json());
            Ok(ExitCode::SUCCESS)
        }
        Err(Error::Indeterminate { sweeps, final_norm }) => {
            emit(
                cli,
                &serde_json::json!({
                    "verdict": "indeterminate",
                    "iterations": sweeps,
                    "final_norm": final_norm,
                }),
            );
            Ok(ExitCode::from(EXIT_INDETERMINATE))
        }
        Err(e) => Err(e),
    }
}

fn cmd_measures(cli: &Cli, file: &Path) -> Result<ExitCode, Error> {
    let state = read_state(cli, file)?;
    let measures = applicable_measures(&state)?;
    let payload = serde_json::Value::Array(measures.iter().map(|m| m.to_json()).collect());
    emit(cli, &payload);
    Ok(ExitCode::SUCCESS)
}

#[derive(Deserialize)]
struct SupportDoc {
    q: usize,
    d: usize,
    #[serde(rename = "B")]
    b: Vec<Vec<u8>>,
    n: Option<Vec<u64>>,
}

fn cmd_generate(
    cli: &Cli,
    ghz: &Option<Vec<usize>>,
    from_b: &Option<PathBuf>,
    out: &Option<PathBuf>,
) -> Result<ExitCode, Error> {
    let (matrix, weights) = match (ghz, from_b) {
        (Some(args), None) => {
            let (q, d) = (args[0], args[1]);
            let columns: Vec<Vec<u8>> = (0..d).map(|s| vec![s as u8; q]).collect();
            (BMatrix::new(q, d, columns)?, None)
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Document(format!("{}: {e}", path.display())))?;
            let doc: SupportDoc =
                serde_json::from_str(&text).map_err(|e| Error::Document(e.to_string()))?;
            if doc.b.len() != doc.q {
                return Err(Error::Document(format!(
                    "B has {} rows but q={}",
                    doc.b.len(),
                    doc.q
                )));
            }
            let length = doc.b.first().map_or(0, Vec::len);
            if doc.b.iter().any(|row| row.len() != length) {
                return Err(Error::Document("ragged B rows".into()));
            }
            let columns: Vec<Vec<u8>> = (0..length)
                .map(|k| doc.b.iter().map(|row| row[k]).collect())
                .collect();
            (BMatrix::new(doc.q, doc.d, columns)?, doc.n)
        }
        _ => {
            return Err(Error::Document(
                "generate needs exactly one of --ghz Q D or --from-b FILE".into(),
            ))
        }
    };
    if matrix.len() > cli.cap_l {
        return Err(Error::CapExceeded(format!(
            "support length {} exceeds --cap-l {}",
            matrix.len(),
            cli.cap_l
        )));
    }
    let certificate = match weights {
        Some(n) => BalanceCertificate::new(n)?,
        None => match find_certificate(&matrix)? {
            Some(c) => c,
            None => {
                eprintln!("error: support admits no balance certificate");
                return Ok(ExitCode::from(EXIT_NO_CERTIFICATE));
            }
        },
    };
    let state = construct_max_entangled(&matrix, &certificate)?;
    let text = state.to_json();
    match out {
        Some(path) => std::fs::write(path, text + "\n")
            .map_err(|e| Error::Document(format!("{}: {e}", path.display())))?,
        None => println!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_enumerate(cli: &Cli, q: usize, d: usize, l_max: usize) -> Result<ExitCode, Error> {
    if l_max > cli.cap_l {
        return Err(Error::CapExceeded(format!(
            "l_max {l_max} exceeds --cap-l {}",
            cli.cap_l
        )));
    }
    let entries = enumerate_irreducible(q, d, l_max)?;
    for entry in &entries {
        match cli.format {
            Format::Json => println!("{}", entry.to_json()),
            Format::Human => println!("{}", render_human(&entry.to_json(), 0)),
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(
    cli: &Cli,
    claim: u8,
    q: usize,
    d: usize,
    count: Option<usize>,
) -> Result<ExitCode, Error> {
    let count = count.unwrap_or(match claim {
        1 => 500,
        _ => 100,
    });
    let report = verify_claim(claim, q, d, count, cli.seed)?;
    emit(cli, &report.to_json());
    Ok(ExitCode::SUCCESS)
}

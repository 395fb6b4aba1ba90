use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

mod commands;

use mlspectrum::error::Error;

#[derive(Parser, Debug)]
#[command(name = "mlspectrum", version, about = "Fractional-part spectra of integer linear recurrences")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    config: RunConfig,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Check the standing assumptions on P
    Validate,
    /// Certified roots and their classification
    Roots,
    /// rho_n on the window, with tail bounds
    Rho,
    /// Convolution, windowed-inverse and closed-form identity defects
    Identities,
    /// Sample x_n(g), eps_n and the symbols s_n on the window
    Orbit(XiArgs),
    /// Code an orbit into its symbol sequence and reconstruct eps from it
    Encode(XiArgs),
    /// Find the orbit whose fractional parts match a finite symbol word
    Decode {
        /// Finite word such as `0^inf [1 -2 | 0 1]`; `|` marks index 0
        #[arg(long)]
        word: String,
    },
    /// Minimal limit point e and the discrete values e_0..e_K
    Spectrum,
    /// Certified verdicts for the hypotheses of the spectrum statements
    Conditions {
        /// Also run the subsum interval check with this coefficient A
        #[arg(long)]
        subsum_a: Option<u32>,
    },
    /// Periodic words whose limsup approaches 1/2 from below
    Realize {
        /// Lengths R of the copied block, comma separated
        #[arg(long = "R", value_delimiter = ',', default_value = "10,20,40")]
        r: Vec<u32>,
        #[arg(long, default_value_t = 40)]
        a: u32,
        #[arg(long, default_value_t = 40)]
        b: u32,
    },
    /// Invariant suite on X^2-20X+82 and X^3+2X^2+6X-2
    Selftest,
}

#[derive(Args, Debug, Clone)]
pub struct XiArgs {
    /// Real parameters of g (k+1 per real root, then re/im pairs per complex
    /// pair), comma separated; drawn from --seed when absent
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub params: Option<Vec<String>>,
}

#[derive(Args, Debug, Clone)]
pub struct RunConfig {
    /// Integer polynomial P, e.g. "X^2-20X+82"
    #[arg(long, global = true)]
    pub poly: Option<String>,

    /// f = P^(k+1)
    #[arg(long, global = true, default_value_t = 0)]
    pub k: u32,

    /// Working precision in decimal digits
    #[arg(long, global = true, env = "MLSPECTRUM_PRECISION", default_value_t = 60,
          value_parser = clap::value_parser!(u32).range(30..))]
    pub precision: u32,

    /// Index window as `lo,hi`
    #[arg(long, global = true, value_parser = parse_window, allow_hyphen_values = true)]
    pub window: Option<(i64, i64)>,

    /// Series order N for the discrete values
    #[arg(long, global = true, default_value_t = 200)]
    pub order: usize,

    /// Largest k for e_k
    #[arg(long = "K", global = true, default_value_t = 6)]
    pub k_max: u32,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Write the report here instead of stdout
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

fn parse_window(s: &str) -> Result<(i64, i64), String> {
    let (lo, hi) = s.split_once(',').ok_or("expected `lo,hi`")?;
    let lo: i64 = lo.trim().parse().map_err(|e| format!("{e}"))?;
    let hi: i64 = hi.trim().parse().map_err(|e| format!("{e}"))?;
    if lo >= hi {
        return Err(format!("window needs lo < hi, got {lo},{hi}"));
    }
    Ok((lo, hi))
}

pub const EXIT_ERROR: u8 = 1;
pub const EXIT_UNDECIDED: u8 = 2;
pub const EXIT_HYPOTHESIS: u8 = 3;

fn classify(err: &anyhow::Error) -> (&'static str, u8) {
    let Some(e) = err.downcast_ref::<Error>() else {
        return ("error", EXIT_ERROR);
    };
    match e {
        Error::Hypothesis(_) | Error::NotMonic | Error::NotExpansive | Error::NotSquarefree => ("hypothesis", EXIT_HYPOTHESIS),
        Error::Undecided(_) => ("undecided", EXIT_UNDECIDED),
        Error::Parse { .. } => ("parse", EXIT_ERROR),
        Error::ResourceLimit { .. } => ("resource_limit", EXIT_ERROR),
        Error::PrecisionExhausted(_) | Error::HalfIntegerAmbiguity { .. } | Error::AmbiguousUnitRoot { .. } => {
            ("precision", EXIT_ERROR)
        }
        Error::InsufficientWindow(_) | Error::InsufficientTail(_) => ("window", EXIT_ERROR),
        _ => ("error", EXIT_ERROR),
    }
}

fn main() -> ExitCode {
    // clap's own usage errors exit with 2, which is reserved for undecided verdicts
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let diag = json!({ "error": { "kind": "usage", "message": e.to_string(), "exit_code": EXIT_ERROR } });
            eprintln!("{}", serde_json::to_string_pretty(&diag).expect("diagnostic serializes"));
            return ExitCode::from(EXIT_ERROR);
        }
    };
    match commands::run(&cli.command, &cli.config) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            let (kind, code) = classify(&err);
            let diag = json!({
                "error": {
                    "kind": kind,
                    "message": format!("{err:#}"),
                    "exit_code": code,
                }
            });
            eprintln!("{}", serde_json::to_string_pretty(&diag).expect("diagnostic serializes"));
            ExitCode::from(code)
        }
    }
}

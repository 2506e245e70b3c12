//! Command-line front end.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use nullwave_core::Error as CoreError;

use crate::experiments;
use crate::report::Report;
use crate::spec::{ensure_writable, ControlPath, ExperimentSpec};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INVALID_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "nullwave",
    version,
    about = "Controllability experiments for the damped wave equation"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Experiment file (TOML); flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory for CSV tables and JSON sidecars.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Solve moment problems with the Gram matrix.
    #[arg(long, global = true, conflicts_with = "series")]
    pub oracle: bool,
    /// Solve moment problems with the biorthogonal series.
    #[arg(long, global = true)]
    pub series: bool,
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    /// Number of modes N.
    #[arg(long, global = true)]
    pub modes: Option<u32>,
    /// Control horizon T.
    #[arg(long, global = true)]
    pub horizon: Option<f64>,
    /// Random draws for `ingham run`.
    #[arg(long, global = true)]
    pub trials: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    Spectrum {
        #[command(subcommand)]
        action: SpectrumAction,
    },
    Weierstrass {
        #[command(subcommand)]
        action: CheckAction,
    },
    Multiplier {
        #[command(subcommand)]
        action: CheckAction,
    },
    Biorth {
        #[command(subcommand)]
        action: BiorthAction,
    },
    Control {
        #[command(subcommand)]
        action: ControlAction,
    },
    Sweep {
        #[command(subcommand)]
        action: SweepAction,
    },
    /// Gram conditioning against N for every swept α.
    Degeneracy,
    Ingham {
        #[command(subcommand)]
        action: InghamAction,
    },
    /// Runs the property checks at the configured parameters.
    Verify,
    /// Energy trajectory of the controlled (or free) system.
    Simulate {
        /// Leave the system uncontrolled.
        #[arg(long)]
        free: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum SpectrumAction {
    Dump,
}

#[derive(Debug, Subcommand)]
pub enum CheckAction {
    Check,
}

#[derive(Debug, Subcommand)]
pub enum BiorthAction {
    Build,
    Verify,
}

#[derive(Debug, Subcommand)]
pub enum ControlAction {
    Solve,
}

#[derive(Debug, Subcommand)]
pub enum SweepAction {
    Epsilon,
}

#[derive(Debug, Subcommand)]
pub enum InghamAction {
    Run,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Spectrum { .. } => "spectrum dump",
            Command::Weierstrass { .. } => "weierstrass check",
            Command::Multiplier { .. } => "multiplier check",
            Command::Biorth {
                action: BiorthAction::Build,
            } => "biorth build",
            Command::Biorth {
                action: BiorthAction::Verify,
            } => "biorth verify",
            Command::Control { .. } => "control solve",
            Command::Sweep { .. } => "sweep epsilon",
            Command::Degeneracy => "degeneracy",
            Command::Ingham { .. } => "ingham run",
            Command::Verify => "verify",
            Command::Simulate { .. } => "simulate",
        }
    }
}

/// Loads the experiment file (if any) and applies the flag overrides.
pub fn resolve_spec(cli: &Cli) -> anyhow::Result<ExperimentSpec> {
    let c = &cli.common;
    let mut s = match &c.config {
        Some(p) => ExperimentSpec::load(p)?,
        None => ExperimentSpec::default(),
    };
    s.command = cli.command.name().to_string();
    if let Some(o) = &c.out {
        s.out = o.clone();
    }
    if let Some(x) = c.seed {
        s.seed = x;
    }
    if c.oracle {
        s.path = ControlPath::Oracle;
    }
    if c.series {
        s.path = ControlPath::Series;
    }
    if let Some(x) = c.alpha {
        s.problem.alpha = x;
    }
    if let Some(x) = c.epsilon {
        s.problem.epsilon = x;
    }
    if let Some(x) = c.modes {
        s.problem.n_modes = x;
    }
    if let Some(x) = c.horizon {
        s.problem.horizon_t = x;
    }
    if let Some(x) = c.trials {
        s.trials = x;
    }
    Ok(s)
}

fn dispatch(cmd: &Command, spec: &ExperimentSpec) -> anyhow::Result<Report> {
    match cmd {
        Command::Spectrum { .. } => experiments::spectrum_dump(spec),
        Command::Weierstrass { .. } => experiments::weierstrass_check(spec),
        Command::Multiplier { .. } => experiments::multiplier_check(spec),
        Command::Biorth {
            action: BiorthAction::Build,
        } => {
            let mut r = experiments::biorth(spec)?;
            r.passed = true;
            Ok(r)
        }
        Command::Biorth {
            action: BiorthAction::Verify,
        } => experiments::biorth(spec),
        Command::Control { .. } => experiments::control_solve(spec),
        Command::Sweep { .. } => experiments::sweep_epsilon(spec),
        Command::Degeneracy => experiments::degeneracy(spec),
        Command::Ingham { .. } => experiments::ingham_run(spec),
        Command::Verify => experiments::verify(spec),
        Command::Simulate { free } => experiments::simulate_run(spec, *free),
    }
}

/// Exit code for an error: numerical breakdowns count as failed checks, everything
/// else (parsing, validation, unwritable output) as invalid input.
pub fn exit_code_for(err: &anyhow::Error) -> i32 {
    match err.downcast_ref::<CoreError>() {
        Some(CoreError::BudgetExceeded(_) | CoreError::Singular | CoreError::Underflow(_)) => {
            EXIT_CHECK_FAILED
        }
        _ => EXIT_INVALID_INPUT,
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_INVALID_INPUT
            } else {
                EXIT_PASS
            };
        }
    };
    let spec = match resolve_spec(&cli).and_then(|s| ensure_writable(&s.out).map(|_| s)) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e:#}");
            return EXIT_INVALID_INPUT;
        }
    };
    let report = match dispatch(&cli.command, &spec) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e:#}");
            return exit_code_for(&e);
        }
    };
    match report.write(&spec.out, &spec) {
        Ok(paths) => {
            for p in paths {
                eprintln!("wrote {}", p.display());
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            return EXIT_INVALID_INPUT;
        }
    }
    println!(
        "{}",
        serde_json::to_string_pretty(&report.summary).unwrap_or_default()
    );
    println!(
        "{} {}",
        if report.passed { "PASS" } else { "FAIL" },
        spec.command
    );
    if report.passed {
        EXIT_PASS
    } else {
        EXIT_CHECK_FAILED
    }
}

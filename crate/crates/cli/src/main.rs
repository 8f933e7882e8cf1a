//! Batch experiment runner: every verification of the library as a
//! subcommand with a JSON or CSV report.
//!
//! Exit codes: 0 when every check passes, 2 when a check fails, 1 on usage
//! or configuration errors.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Options;
use report::{Format, Report};

#[derive(Parser, Debug)]
#[command(name = "diffeo-reps", version, about = "Numerical checks for Heisenberg convolution, contact and symplectic flows, and quasi-regular representations")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Half-dimension n of ℝ²ⁿ or Hₙ.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Grid nodes per axis (at least 9).
    #[arg(long, global = true)]
    res: Option<usize>,
    /// Representation parameter θ.
    #[arg(long, global = true, allow_negative_numbers = true)]
    theta: Option<f64>,
    /// RK4 step for flows.
    #[arg(long, global = true, default_value_t = diffeo_reps::fields::DEFAULT_STEP)]
    step: f64,
    /// Override the main tolerance of the subcommand.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Seed for generated inputs and sample points.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// First input function, as a DSL expression.
    #[arg(long, global = true, allow_hyphen_values = true)]
    f: Option<String>,
    /// Second input function, as a DSL expression.
    #[arg(long, global = true, allow_hyphen_values = true)]
    g: Option<String>,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Euclidean convolution: fast path against direct quadrature, and Fubini.
    ConvEuclid,
    /// Heisenberg convolution: S(f ∗ g) = Sf ∗ Sg and Fubini.
    ConvHeis,
    /// Smallest k with S Tᵏf nonzero, cross-checked against z-moments.
    MinimalK,
    /// Non-vanishing certificate for f ∗ g with the chain identity.
    Certificate,
    /// Time-one flow of a Hamiltonian (or, with --contact, contact) field.
    FlowCheck {
        /// Use the contact field of the generator on Hₙ.
        #[arg(long)]
        contact: bool,
    },
    /// Compactly supported symplectic translation τₓ.
    TranslateSympl,
    /// Compactly supported contact translation ρₓ.
    TranslateCont,
    /// Unitarity, homomorphism and Radon-Nikodym checks of Π^θ.
    RepUnitarity,
    /// Matrix-coefficient witness search on ℝ²ⁿ.
    WitnessSympl,
    /// Matrix-coefficient witness search on Hₙ.
    WitnessCont,
    /// Mass of Π(ψ_t)f on V as ψ_t shrinks toward the origin.
    ShrinkDemo,
    /// Every subcommand at smoke resolution.
    Selftest,
}

fn run(cli: &Cli) -> anyhow::Result<Report> {
    let opts = Options {
        n: cli.n,
        res: cli.res,
        theta: cli.theta,
        step: cli.step,
        tol: cli.tol,
        seed: cli.seed,
        f: cli.f.clone(),
        g: cli.g.clone(),
        contact: matches!(cli.command, Command::FlowCheck { contact: true }),
    };
    opts.validate()?;
    match cli.command {
        Command::ConvEuclid => commands::conv_euclid_cmd(&opts),
        Command::ConvHeis => commands::conv_heis_cmd(&opts),
        Command::MinimalK => commands::minimal_k_cmd(&opts),
        Command::Certificate => commands::certificate_cmd(&opts),
        Command::FlowCheck { .. } => commands::flow_check_cmd(&opts),
        Command::TranslateSympl => commands::translate_sympl_cmd(&opts),
        Command::TranslateCont => commands::translate_cont_cmd(&opts),
        Command::RepUnitarity => commands::rep_unitarity_cmd(&opts),
        Command::WitnessSympl => commands::witness_sympl_cmd(&opts),
        Command::WitnessCont => commands::witness_cont_cmd(&opts),
        Command::ShrinkDemo => commands::shrink_demo_cmd(&opts),
        Command::Selftest => commands::selftest_cmd(&opts),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let report = match run(&cli) {
        Ok(report) => report,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    let text = report.render(cli.format);
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(1);
            }
        }
        None => print!("{text}"),
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

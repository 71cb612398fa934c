//! Command-line front end: distribution fitting, yearly-table evaluation,
//! cycle simulation and the estimation pipeline, all emitting flat files.
//!
//! Exit codes: 0 success, 2 input or usage error, 3 numerical failure
//! (unconverged fit, domain exit). Set `RUST_LOG` to control verbosity.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

pub const EXIT_INPUT: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

/// A failure with the exit code it maps to.
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn input(error: anyhow::Error) -> Self {
        Self {
            code: EXIT_INPUT,
            error,
        }
    }

    pub fn numerical(error: anyhow::Error) -> Self {
        Self {
            code: EXIT_NUMERICAL,
            error,
        }
    }
}

pub type CmdResult = Result<(), Failure>;

#[derive(Parser)]
#[command(name = "growth-cycles", version, about = "Income distribution and growth-cycle analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModelKind {
    Goodwin,
    Dhmp,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Orientation {
    /// Literal central difference (f(t+1) - f(t-1)) / 2.
    Forward,
    /// Negated central difference; matches the printed derivative columns
    /// of the bundled table and the published regression results.
    Reversed,
}

#[derive(Subcommand)]
enum Command {
    /// Draw incomes from a parameterized distribution into a CSV file.
    Sample {
        #[arg(long)]
        b: f64,
        #[arg(long)]
        x_t: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 100_000)]
        count: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        output: PathBuf,
    },
    /// Fit distribution parameters to an income CSV.
    FitGpd {
        #[arg(long)]
        input: PathBuf,
        /// JSON fit report.
        #[arg(long)]
        report: PathBuf,
        /// Optional fitted-curve CSV (x, empirical F, fitted F).
        #[arg(long)]
        curve: Option<PathBuf>,
        /// Divide incomes by their sample mean before fitting.
        #[arg(long)]
        normalize: bool,
        #[arg(long, default_value_t = 100)]
        min_samples: usize,
        #[arg(long, default_value_t = 40)]
        candidates: usize,
        #[arg(long, default_value_t = 0.90)]
        quantile_lo: f64,
        #[arg(long, default_value_t = 0.999)]
        quantile_hi: f64,
        /// Accepted relative discrepancy of the fitted intercept from
        /// ln(ln 100).
        #[arg(long, default_value_t = 0.02)]
        a_bound: f64,
        /// Abort without writing outputs when no threshold candidate meets
        /// the intercept bound (default: write the best-effort report and
        /// exit 3).
        #[arg(long)]
        strict_a_bound: bool,
    },
    /// Evaluate model quantities per year against the raw table columns.
    Evaluate {
        /// Yearly table CSV; the bundled 1981-2009 table when omitted.
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long)]
        output: PathBuf,
    },
    /// Integrate a cycle model and report orbit diagnostics.
    Simulate {
        #[arg(long, value_enum)]
        model: ModelKind,
        /// JSON file with the grouped constants (a1, a2, b1, b2 and, for
        /// the bounded model, delta and u_bar). Overrides the flags below.
        #[arg(long)]
        params_file: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        a1: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        a2: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        b1: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        b2: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        u_bar: Option<f64>,
        #[arg(long)]
        u0: f64,
        #[arg(long)]
        v0: f64,
        #[arg(long)]
        t_end: f64,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
        /// Keep every n-th trajectory point in the CSV (the report always
        /// reflects the full-resolution run).
        #[arg(long, default_value_t = 1)]
        stride: usize,
        #[arg(long)]
        trajectory: PathBuf,
        #[arg(long)]
        report: PathBuf,
    },
    /// Run the estimation pipeline on a yearly table.
    Estimate {
        /// Yearly table CSV; the bundled 1981-2009 table when omitted.
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long, default_value_t = 95.0)]
        u_bar: f64,
        #[arg(long, value_enum, default_value_t = Orientation::Reversed)]
        orientation: Orientation,
        /// Drop years whose distribution parameters were interpolated
        /// rather than sampled from the regression point set.
        #[arg(long)]
        exclude_interpolated: bool,
        /// Last year of the early phase-centroid segment.
        #[arg(long, default_value_t = 1994)]
        split_year: i32,
        #[arg(long, default_value_t = 5.0)]
        delta_max: f64,
        #[arg(long, default_value_t = 0.01)]
        delta_step: f64,
        #[arg(long)]
        output_dir: PathBuf,
    },
    /// Write the bundled 1981-2009 yearly table.
    Table1 {
        #[arg(long)]
        output: PathBuf,
        /// Fill the distribution-parameter gaps (1991, 1994, 2000) by
        /// linear interpolation, flagged in the output.
        #[arg(long)]
        interpolate: bool,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sample {
            b,
            x_t,
            alpha,
            count,
            seed,
            output,
        } => commands::sample(b, x_t, alpha, count, seed, &output),
        Command::FitGpd {
            input,
            report,
            curve,
            normalize,
            min_samples,
            candidates,
            quantile_lo,
            quantile_hi,
            a_bound,
            strict_a_bound,
        } => commands::fit_gpd(commands::FitArgs {
            input,
            report,
            curve,
            normalize,
            min_samples,
            candidates,
            quantile_lo,
            quantile_hi,
            a_bound,
            strict_a_bound,
        }),
        Command::Evaluate { table, output } => commands::evaluate(table.as_deref(), &output),
        Command::Simulate {
            model,
            params_file,
            a1,
            a2,
            b1,
            b2,
            delta,
            u_bar,
            u0,
            v0,
            t_end,
            step,
            stride,
            trajectory,
            report,
        } => commands::simulate(commands::SimulateArgs {
            model: matches!(model, ModelKind::Dhmp),
            params_file,
            a1,
            a2,
            b1,
            b2,
            delta,
            u_bar,
            u0,
            v0,
            t_end,
            step,
            stride,
            trajectory,
            report,
        }),
        Command::Estimate {
            table,
            u_bar,
            orientation,
            exclude_interpolated,
            split_year,
            delta_max,
            delta_step,
            output_dir,
        } => commands::estimate(commands::EstimateArgs {
            table,
            u_bar,
            reversed: matches!(orientation, Orientation::Reversed),
            exclude_interpolated,
            split_year,
            delta_max,
            delta_step,
            output_dir,
        }),
        Command::Table1 {
            output,
            interpolate,
        } => commands::table1(&output, interpolate),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {:#}", failure.error);
            ExitCode::from(failure.code)
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use polyham::dynamics::IntegrationMethod;
use polyham::CoordinateMode;
use polyham_cli::commands::{self, IntegrateOptions, Output, SweepOptions};
use polyham_cli::CliError;

/// Polymatrix replicator dynamics: formal equilibria, conservative
/// decompositions, Poisson structure checks and monitored integration.
///
/// GAME is a game file path, `-` for stdin, or `builtin:ex1` / `builtin:ex2`.
/// Relative output paths are resolved against $POLYHAM_OUT_DIR when set.
#[derive(Parser)]
#[command(name = "polyham", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Game file, `-`, or `builtin:NAME`
    game: String,
    /// Exit with status 4 unless the report's verdict equals this value
    #[arg(long)]
    expect: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Dopri5,
    Rk4,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Auto,
    Prism,
    Chart,
}

#[derive(Subcommand)]
enum Command {
    /// Signature, block structure and skewness [verdict: skew | not-skew]
    Info(Common),
    /// Formal equilibria [verdict: interior | boundary | exterior | none]
    Equilibrium(Common),
    /// Conservative decomposition [verdict: conservative | not-conservative]
    Conservative(Common),
    /// Jacobi identity and Poisson-map sweeps [verdict: poisson | not-poisson]
    PoissonCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// Finite-difference step for the numerical Jacobi check
        #[arg(long, default_value_t = polyham::poisson::JACOBI_FD_STEP)]
        fd_step: f64,
    },
    /// Reduced structure B, its rank and kernel, and leaf invariants [verdict: ok]
    Leaves {
        #[command(flatten)]
        common: Common,
        /// Point on the prism (comma-separated rationals); defaults to x0 or the center
        #[arg(long)]
        point: Option<String>,
    },
    /// Integrate and emit a CSV trajectory t, x_1..x_n, H, c_1..c_k [verdict: ok]
    Integrate {
        #[command(flatten)]
        common: Common,
        /// Initial point (comma-separated rationals); defaults to x0 or the center
        #[arg(long)]
        x0: Option<String>,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        rtol: Option<f64>,
        #[arg(long)]
        atol: Option<f64>,
        /// Largest step; the fixed step for rk4
        #[arg(long)]
        max_step: Option<f64>,
        #[arg(long, value_enum, default_value_t = Method::Dopri5)]
        method: Method,
        #[arg(long, value_enum, default_value_t = Mode::Auto)]
        mode: Mode,
        /// Keep every k-th step
        #[arg(long, default_value_t = 1)]
        stride: usize,
        /// Write the CSV here and print a JSON summary instead
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Full report for a bundled example [verdict: ok | mismatch]
    Example {
        #[arg(value_parser = ["ex1", "ex2"])]
        name: String,
        /// Also write NAME_report.json and NAME_trajectory.csv here
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        expect: Option<String>,
    },
}

fn run(cli: Cli) -> Result<Output, (Option<Output>, CliError)> {
    let with_game = |c: &Common, f: &dyn Fn(&polyham_cli::GameFile) -> Result<Output, CliError>| {
        let file = commands::load_game(&c.game)?;
        f(&file)
    };
    let (result, expect) = match &cli.command {
        Command::Info(c) => (with_game(c, &|f| Ok(commands::info(&c.game, f))), &c.expect),
        Command::Equilibrium(c) => (with_game(c, &|f| Ok(commands::equilibrium(&c.game, f))), &c.expect),
        Command::Conservative(c) => (with_game(c, &|f| Ok(commands::conservative(&c.game, f))), &c.expect),
        Command::PoissonCheck { common, seed, samples, fd_step } => {
            let opts = SweepOptions {
                seed: *seed,
                samples: *samples,
                fd_step: *fd_step,
            };
            (with_game(common, &|f| commands::poisson_check(&common.game, f, &opts)), &common.expect)
        }
        Command::Leaves { common, point } => (
            with_game(common, &|f| commands::leaves(&common.game, f, point.as_deref())),
            &common.expect,
        ),
        Command::Integrate {
            common,
            x0,
            t_end,
            rtol,
            atol,
            max_step,
            method,
            mode,
            stride,
            out,
        } => {
            let opts = IntegrateOptions {
                x0: x0.clone(),
                t_end: *t_end,
                rtol: *rtol,
                atol: *atol,
                max_step: *max_step,
                method: match method {
                    Method::Dopri5 => IntegrationMethod::Dopri5,
                    Method::Rk4 => IntegrationMethod::Rk4,
                },
                mode: match mode {
                    Mode::Auto => CoordinateMode::Auto,
                    Mode::Prism => CoordinateMode::Prism,
                    Mode::Chart => CoordinateMode::Chart,
                },
                stride: *stride,
                out: out.clone(),
            };
            (with_game(common, &|f| commands::integrate_cmd(&common.game, f, &opts)), &common.expect)
        }
        Command::Example { name, out_dir, expect } => (commands::example(name, out_dir.as_deref()), expect),
    };
    let output = result.map_err(|e| (None, e))?;
    match expect {
        Some(want) if *want != output.verdict => {
            let err = CliError::Expect {
                expected: want.clone(),
                actual: output.verdict.clone(),
            };
            Err((Some(output), err))
        }
        _ => Ok(output),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) => {
            print!("{}", out.text);
            ExitCode::SUCCESS
        }
        Err((out, err)) => {
            if let Some(out) = out {
                print!("{}", out.text);
            }
            eprintln!("polyham: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

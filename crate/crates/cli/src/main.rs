//! `gkdv`: batch front end for the solver, verifiers and experiments.
//!
//! Exit codes: 0 success, 1 configuration or runtime error, 2 blow-up cap
//! reached, 3 a configured assertion failed (named on stderr).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use toml::Table;

use commands::Ctx;
use settings::*;

pub enum Outcome {
    Ok,
    Assertion(Vec<&'static str>),
}

#[derive(Parser, Debug)]
#[command(name = "gkdv", version, about = "Modified-energy experiments for the mass-critical gKdV equation")]
struct Cli {
    /// TOML config file with one section per subcommand
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override a setting (`key=value` or `section.key=value`); repeatable
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    sets: Vec<String>,

    /// Output directory
    #[arg(long, global = true, env = "GKDV_OUT", default_value = "gkdv-out")]
    out: PathBuf,

    /// Seed for stochastic subcommands
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker thread cap
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Write measured wall-clock times into the CSV (breaks byte-identical reruns)
    #[arg(long, global = true)]
    wall_clock: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evolve an initial profile and report mass/energy drift
    Solve(SolveArgs),
    /// Sample the sextic and ten-linear symbol bounds over an N sweep
    VerifySymbols(VerifyArgs),
    /// Almost-conservation scan of the modified energy increments over N
    #[command(name = "scan-N")]
    ScanN(ScanArgs),
    /// Sharp Gagliardo-Nirenberg ratio on the ground state and random fields
    GnCheck(GnArgs),
    /// Finite-difference check of the modified energy derivative formulas
    DiffCheck(DiffArgs),
    /// Exact exponent arithmetic and the regularity threshold
    Threshold,
    /// Windowed iteration of the rescaled solution with the increment budget
    Globalize(GlobalizeArgs),
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// Initial profile: soliton or random
    #[arg(long)]
    profile: Option<String>,
    /// Amplitude factor applied to the profile
    #[arg(long)]
    amplitude: Option<f64>,
    /// Grid points
    #[arg(long)]
    n: Option<usize>,
    /// Box length
    #[arg(long = "L")]
    length: Option<f64>,
    /// Time step
    #[arg(long, allow_hyphen_values = true)]
    dt: Option<f64>,
    /// Final time
    #[arg(long, allow_hyphen_values = true)]
    t_end: Option<f64>,
    /// -1 focusing, +1 defocusing
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<f64>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Samples per threshold (accepts 1e6)
    #[arg(long)]
    samples: Option<f64>,
    /// Threshold indices, comma separated
    #[arg(long = "N", value_delimiter = ',')]
    n_list: Vec<f64>,
    /// Regularity
    #[arg(long)]
    s: Option<f64>,
    /// sigma, m10 or both
    #[arg(long)]
    target: Option<String>,
}

#[derive(Args, Debug)]
struct ScanArgs {
    /// Threshold indices, comma separated
    #[arg(long = "N", value_delimiter = ',')]
    n_list: Vec<f64>,
    /// Number of seeds, counting up from --seed
    #[arg(long)]
    seeds: Option<u64>,
    /// Regularity
    #[arg(long)]
    s: Option<f64>,
    /// Time window per cell
    #[arg(long)]
    t_window: Option<f64>,
}

#[derive(Args, Debug)]
struct GnArgs {
    /// Random fields to test
    #[arg(long)]
    count: Option<usize>,
}

#[derive(Args, Debug)]
struct DiffArgs {
    /// Modes as index:re:im, comma separated
    #[arg(long, allow_hyphen_values = true)]
    modes: Option<String>,
    /// Threshold index
    #[arg(long)]
    n_index: Option<f64>,
    /// Drop the quintic term
    #[arg(long)]
    linear_only: bool,
}

#[derive(Args, Debug)]
struct GlobalizeArgs {
    /// Threshold index
    #[arg(long)]
    n_index: Option<f64>,
    /// Target time before rescaling
    #[arg(long)]
    t_target: Option<f64>,
    /// -1 focusing, +1 defocusing
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<f64>,
}

fn run(cli: &Cli) -> Result<Outcome> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
    }
    let ctx = Ctx {
        out: &cli.out,
        seed: cli.seed,
        wall_clock: cli.wall_clock,
    };
    let cfg = cli.config.as_deref();
    let sets = &cli.sets;
    let mut f = Table::new();
    match &cli.command {
        Command::Solve(a) => {
            put(&mut f, "profile", a.profile.clone());
            put(&mut f, "amplitude", a.amplitude);
            put(&mut f, "n", a.n.map(|v| v as i64));
            put(&mut f, "L", a.length);
            put(&mut f, "dt", a.dt);
            put(&mut f, "t_end", a.t_end);
            put(&mut f, "mu", a.mu);
            commands::solve(&resolve("solve", cfg, sets, f)?, &ctx)
        }
        Command::VerifySymbols(a) => {
            put(&mut f, "samples", a.samples.map(|v| v as i64));
            put_list(&mut f, "N", &a.n_list);
            put(&mut f, "s", a.s);
            put(&mut f, "target", a.target.clone());
            commands::verify_symbols(&resolve("verify_symbols", cfg, sets, f)?, &ctx)
        }
        Command::ScanN(a) => {
            put_list(&mut f, "N", &a.n_list);
            put(&mut f, "seeds", a.seeds.map(|v| v as i64));
            put(&mut f, "s", a.s);
            put(&mut f, "t_window", a.t_window);
            commands::scan_n(&resolve("scan_n", cfg, sets, f)?, &ctx)
        }
        Command::GnCheck(a) => {
            put(&mut f, "count", a.count.map(|v| v as i64));
            commands::gn_check(&resolve("gn_check", cfg, sets, f)?, &ctx)
        }
        Command::DiffCheck(a) => {
            put(&mut f, "modes", a.modes.clone());
            put(&mut f, "n_index", a.n_index);
            if a.linear_only {
                put(&mut f, "nonlinear", Some(false));
            }
            commands::diff_check(&resolve("diff_check", cfg, sets, f)?, &ctx)
        }
        Command::Threshold => commands::threshold(&resolve("threshold", cfg, sets, f)?, &ctx),
        Command::Globalize(a) => {
            put(&mut f, "n_index", a.n_index);
            put(&mut f, "t_target", a.t_target);
            put(&mut f, "mu", a.mu);
            commands::globalize(&resolve("globalize", cfg, sets, f)?, &ctx)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Assertion(names)) => {
            for n in names {
                eprintln!("assertion failed: {n}");
            }
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            let blow_up = e.chain().any(|c| {
                matches!(
                    c.downcast_ref::<gkdv_core::Error>(),
                    Some(gkdv_core::Error::BlowUp { .. })
                )
            });
            ExitCode::from(if blow_up { 2 } else { 1 })
        }
    }
}

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use config::{Command, Overrides};

/// Quantum Jacobi and Gauss-Seidel solvers on a simulated quantum computer.
#[derive(Debug, Parser)]
#[command(name = "qiter", version)]
struct Cli {
    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Run one LCU iteration program on a linear system.
    Solve(SolveArgs),
    /// Reproduce a PDE experiment.
    #[command(subcommand)]
    Demo(Demo),
    /// Iteration-count benchmarks.
    #[command(subcommand)]
    Bench(Bench),
    /// Qubit width, gate counts and depth class.
    Resources(RunArgs),
}

#[derive(Debug, Subcommand)]
enum Demo {
    /// One implicit Burgers step from a viscous shock; error against k.
    BurgersShock(RunArgs),
    /// Burgers travelling sinusoid over time.
    BurgersSurface(RunArgs),
    /// 2D linearised Euler point source.
    Euler(RunArgs),
}

#[derive(Debug, Subcommand)]
enum Bench {
    /// Jacobi iterations to threshold against condition number.
    Kappa(RunArgs),
    /// Truncated Gauss-Seidel error curves for several L.
    Woodbury(RunArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Flat TOML configuration; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = ["gate", "emulation"])]
    backend: Option<String>,
    #[arg(long, value_parser = ["jacobi", "gauss-seidel", "q-form"])]
    scheme: Option<String>,
    /// Iteration count.
    #[arg(long)]
    k: Option<usize>,
    /// Woodbury truncation order; repeat or comma-separate for a bench sweep.
    #[arg(long = "L", value_delimiter = ',')]
    levels: Vec<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// System size.
    #[arg(long)]
    n: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run on a system that is not diagonally dominant.
    #[arg(long)]
    force: bool,
    /// Also write SVG plots.
    #[arg(long)]
    plots: bool,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Matrix Market coordinate or array file holding A.
    #[arg(long)]
    system: Option<PathBuf>,
    /// Matrix Market array file holding b (default: all ones).
    #[arg(long)]
    rhs: Option<PathBuf>,
    /// Built-in system when no file is given.
    #[arg(long, value_parser = ["demo", "tridiag"])]
    builtin: Option<String>,
    /// Diagonal of the built-in tridiag(-1, d, -1).
    #[arg(long)]
    diag: Option<f64>,
    #[arg(long, value_parser = ["rhs", "zero", "random"])]
    x0: Option<String>,
    /// Re-run every k' <= k and record the error trace.
    #[arg(long)]
    trace: bool,
}

impl RunArgs {
    fn overrides(&self) -> Overrides {
        let mut o = Overrides::default();
        o.set_opt("backend", self.backend.clone());
        o.set_opt("scheme", self.scheme.clone());
        o.set_opt("k", self.k.map(as_int));
        if !self.levels.is_empty() {
            o.set("levels", self.levels.iter().map(|&l| as_int(l)).collect::<Vec<_>>());
        }
        o.set_opt("seed", self.seed.map(|s| s as i64));
        o.set_opt("n", self.n.map(as_int));
        o.set_opt("out", self.out.as_ref().map(|p| p.display().to_string()));
        if self.force {
            o.set("force", true);
        }
        if self.plots {
            o.set("plots", true);
        }
        o
    }
}

fn as_int(v: usize) -> i64 {
    v as i64
}

fn run(command: Command, args: &RunArgs, mut overrides: Overrides) -> Result<()> {
    let file = args.config.as_deref().map(config::load_table).transpose()?;
    overrides.entries.extend(args.overrides().entries);
    let p = config::resolve(command, file, overrides)?;
    match command {
        Command::Solve => commands::solve(&p),
        Command::BurgersShock => commands::burgers_shock_cmd(&p),
        Command::BurgersSurface => commands::burgers_surface_cmd(&p),
        Command::Euler => commands::euler_cmd(&p),
        Command::Kappa => commands::kappa_cmd(&p),
        Command::Woodbury => commands::woodbury_cmd(&p),
        Command::Resources => commands::resources_cmd(&p),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Cmd::Solve(a) => {
            let mut o = Overrides::default();
            o.set_opt("system", a.system.as_ref().map(|p| p.display().to_string()));
            o.set_opt("rhs", a.rhs.as_ref().map(|p| p.display().to_string()));
            o.set_opt("builtin", a.builtin.clone());
            o.set_opt("diag", a.diag);
            o.set_opt("x0", a.x0.clone());
            if a.trace {
                o.set("trace", true);
            }
            run(Command::Solve, &a.run, o)
        }
        Cmd::Demo(Demo::BurgersShock(a)) => run(Command::BurgersShock, a, Overrides::default()),
        Cmd::Demo(Demo::BurgersSurface(a)) => run(Command::BurgersSurface, a, Overrides::default()),
        Cmd::Demo(Demo::Euler(a)) => run(Command::Euler, a, Overrides::default()),
        Cmd::Bench(Bench::Kappa(a)) => run(Command::Kappa, a, Overrides::default()),
        Cmd::Bench(Bench::Woodbury(a)) => run(Command::Woodbury, a, Overrides::default()),
        Cmd::Resources(a) => run(Command::Resources, a, Overrides::default()),
    }
}

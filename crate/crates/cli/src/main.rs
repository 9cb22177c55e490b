use std::path::{Path, PathBuf};
use std::process::ExitCode;

use ajar::ghd::WidthMode;
use ajar::planner::ClosureShape;
use ajar_cli::commands::{
    cmd_closure, cmd_equiv, cmd_plan, cmd_run, cmd_selftest, ClosureArgs, CliError, CliResult, PlanArgs, RunArgs,
};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "ajar", version, about = "Plan and run aggregate-join queries over annotated relations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Unit,
    Data,
}

#[derive(Clone, Copy, ValueEnum)]
enum Shape {
    Chain,
    Balanced,
}

#[derive(Subcommand)]
enum Command {
    /// Print the plan JSON for a query.
    Plan {
        query: PathBuf,
        #[arg(long)]
        stats: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "unit")]
        mode: Mode,
        #[arg(long)]
        out: Option<PathBuf>,
        /// JSON semiring definition; overrides the query's selector.
        #[arg(long)]
        semiring_config: Option<PathBuf>,
    },
    /// Evaluate a query on `<data>/<Relation>.csv` files.
    Run {
        query: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        domains: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the plan and execution counters to stderr.
        #[arg(long)]
        explain: bool,
        #[arg(long)]
        semiring_config: Option<PathBuf>,
    },
    /// Decide whether another aggregation list is equivalent to the query's.
    Equiv {
        query: PathBuf,
        #[arg(long)]
        ordering: String,
    },
    /// Transitive closure of a binary relation by repeated doubling.
    Closure {
        relation: PathBuf,
        #[arg(long, default_value = "minplus")]
        semiring: String,
        #[arg(long, default_value_t = 32)]
        max_rounds: usize,
        #[arg(long, value_enum, default_value = "chain")]
        shape: Shape,
        /// Add a zero-cost self-loop on every node first.
        #[arg(long)]
        reflexive: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the random oracle suites.
    Selftest {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        trials: usize,
    },
}

fn emit(text: &str, out: Option<&Path>) -> CliResult<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError { code: 1, message: format!("{}: {e}", p.display()) }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn mode(m: Mode) -> WidthMode {
    match m {
        Mode::Unit => WidthMode::Unit,
        Mode::Data => WidthMode::Data,
    }
}

fn dispatch(cli: Cli) -> CliResult<i32> {
    match cli.command {
        Command::Plan { query, stats, mode: m, out, semiring_config } => {
            let json = cmd_plan(&PlanArgs {
                query: &query,
                stats: stats.as_deref(),
                mode: mode(m),
                semiring_config: semiring_config.as_deref(),
            })?;
            emit(&json, out.as_deref())?;
        }
        Command::Run { query, data, domains, out, explain, semiring_config } => {
            let r = cmd_run(&RunArgs {
                query: &query,
                data: &data,
                domains: domains.as_deref(),
                explain,
                semiring_config: semiring_config.as_deref(),
            })?;
            if let Some(e) = &r.explain {
                eprint!("{e}");
            }
            emit(&r.csv, out.as_deref())?;
        }
        Command::Equiv { query, ordering } => {
            print!("{}", cmd_equiv(&query, &ordering)?.text);
        }
        Command::Closure { relation, semiring, max_rounds, shape, reflexive, out } => {
            let shape = match shape {
                Shape::Chain => ClosureShape::Chain,
                Shape::Balanced => ClosureShape::Balanced,
            };
            let c = cmd_closure(&ClosureArgs { relation: &relation, semiring: &semiring, max_rounds, shape, reflexive })?;
            eprintln!("rounds: {}", c.rounds);
            emit(&c.csv, out.as_deref())?;
        }
        Command::Selftest { seed, trials } => {
            let r = cmd_selftest(seed, trials);
            print!("{}", r.text);
            return Ok(if r.passed { 0 } else { 2 });
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}

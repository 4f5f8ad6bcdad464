//! `rebp`: solve, generate, benchmark and inspect robust bin packing instances.

mod bench;
mod commands;
mod packing_file;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rebp_core::master::{CutSet, ExternalSolver, MasterSolver};
use rebp_core::rational::{parse_rational, Rat};
use rebp_core::Error;

/// Environment variable holding the external solver command.
pub const SOLVER_ENV: &str = "REBP_EXTERNAL_SOLVER";

#[derive(Parser, Debug)]
#[command(name = "rebp", version, about = "Robust extensible bin packing under budgeted uncertainty")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalArgs {
    /// Base seed for generators and benchmarks.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Wall-clock limit in seconds (per solve; per instance in benchmarks).
    #[arg(long, global = true)]
    pub time_limit: Option<f64>,
    /// Loose master gap used until the first clean separation.
    #[arg(long, global = true, default_value = "0.2")]
    pub tau0: String,
    /// Final master gap.
    #[arg(long, global = true, default_value = "0.05")]
    pub tau1: String,
    /// Approximation parameter of the scaled knapsack solver.
    #[arg(long, global = true, default_value = "0.1")]
    pub epsilon: String,
    /// Symmetry-breaking cuts added to the master problem.
    #[arg(long, global = true, value_enum, default_value_t = CutsArg::None)]
    pub cuts: CutsArg,
    /// `internal`, `external` (command from REBP_EXTERNAL_SOLVER) or `external:<command>`.
    #[arg(long, global = true, default_value = "internal")]
    pub solver: String,
    /// Worker threads for benchmark sweeps.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutsArg {
    None,
    Order,
    #[value(name = "order+overtime")]
    OrderOvertime,
}

impl GlobalArgs {
    pub fn rational(name: &str, text: &str) -> Result<Rat, Error> {
        parse_rational(text).map_err(|_| Error::Usage(format!("--{name}: `{text}` is not a number")))
    }

    pub fn tau0(&self) -> Result<Rat, Error> {
        Self::rational("tau0", &self.tau0)
    }

    pub fn tau1(&self) -> Result<Rat, Error> {
        Self::rational("tau1", &self.tau1)
    }

    pub fn epsilon(&self) -> Result<Rat, Error> {
        Self::rational("epsilon", &self.epsilon)
    }

    pub fn cut_set(&self) -> CutSet {
        match self.cuts {
            CutsArg::None => CutSet::None,
            CutsArg::Order => CutSet::BinOrder,
            CutsArg::OrderOvertime => CutSet::BinOrderAndOvertime,
        }
    }

    pub fn time_limit(&self) -> Result<Option<Duration>, Error> {
        match self.time_limit {
            None => Ok(None),
            Some(t) if t.is_finite() && t >= 0.0 => Ok(Some(Duration::from_secs_f64(t))),
            Some(t) => Err(Error::Usage(format!("--time-limit: `{t}` is not a duration"))),
        }
    }

    pub fn master_solver(&self) -> Result<MasterSolver, Error> {
        match self.solver.as_str() {
            "internal" => Ok(MasterSolver::default()),
            "external" => match std::env::var(SOLVER_ENV) {
                Ok(cmd) if !cmd.trim().is_empty() => {
                    Ok(MasterSolver::External(ExternalSolver::new(cmd)))
                }
                _ => Err(Error::Usage(format!(
                    "--solver external needs a command in {SOLVER_ENV}"
                ))),
            },
            other => match other.strip_prefix("external:") {
                Some(cmd) if !cmd.trim().is_empty() => {
                    Ok(MasterSolver::External(ExternalSolver::new(cmd)))
                }
                _ => Err(Error::Usage(format!(
                    "--solver: expected internal, external or external:<command>, got `{other}`"
                ))),
            },
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Two-piece convex knapsack instances.
    #[command(subcommand)]
    Ck(CkCommand),
    /// Robust bin packing instances.
    #[command(subcommand)]
    Rebp(RebpCommand),
    /// Brute-force references.
    #[command(subcommand)]
    Oracle(OracleCommand),
    /// Benchmark instance generators.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Benchmark sweeps writing CSV.
    #[command(subcommand)]
    Bench(BenchCommand),
    /// Render a CSV file as an aligned text table.
    Report {
        csv: PathBuf,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum CkMode {
    Exact,
    Fptas,
}

#[derive(Subcommand, Debug)]
pub enum CkCommand {
    /// Solve exactly (or with `--mode fptas`) and print the extreme-point solution.
    Solve {
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = CkMode::Exact)]
        mode: CkMode,
    },
    /// Solve with the scaling scheme at `--epsilon`.
    Fptas { instance: PathBuf },
    /// Solve by enumeration.
    Oracle { instance: PathBuf },
    /// Write the SOS-2 model in LP format.
    ExportSos2 { instance: PathBuf, output: PathBuf },
}

#[derive(Subcommand, Debug)]
pub enum RebpCommand {
    /// Row-and-column generation; prints the result and the iteration trace.
    Solve {
        instance: PathBuf,
        /// Write the trace CSV here instead of standard output.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Write the final packing in the packing file format.
        #[arg(long)]
        save_packing: Option<PathBuf>,
        /// Run separation exactly from the first iteration.
        #[arg(long)]
        exact_separation: bool,
        #[arg(long, default_value_t = 1000)]
        iteration_limit: usize,
    },
    /// Robust optimum by enumeration.
    Oracle { instance: PathBuf },
    /// Worst-case scenario for a packing file.
    Separate {
        instance: PathBuf,
        packing: PathBuf,
        /// Recourse bound to compare against; overrides the file's `theta`.
        #[arg(long)]
        theta: Option<String>,
        /// Use the scaled solver at `--epsilon` instead of the exact one.
        #[arg(long)]
        approximate: bool,
    },
}

#[derive(Subcommand, Debug)]
pub enum OracleCommand {
    /// Knapsack optimum by enumeration.
    Ck { instance: PathBuf },
    /// Robust optimum by enumeration.
    Rebp { instance: PathBuf },
    /// Vertices of the uncertainty set of a bin packing instance.
    Vertices {
        instance: PathBuf,
        /// Only those using the whole reachable budget.
        #[arg(long)]
        maximal: bool,
    },
}

#[derive(Subcommand, Debug)]
pub enum GenCommand {
    /// Knapsack family: `p(u)` uniform on (0, R), capacity `(5+3i)/101 Σu`.
    Ck {
        #[arg(long)]
        n: usize,
        #[arg(long = "R", alias = "r")]
        r: u64,
        /// Experiment index in 1..=30; all thirty when omitted (needs --out-dir).
        #[arg(long)]
        i: Option<u32>,
        /// Root of the versioned layout; standard output when omitted.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Bin packing family with the benchmark parameter conventions.
    Rebp {
        /// Comma-separated nominal durations.
        #[arg(long, conflicts_with_all = ["count", "a_max"])]
        nominal: Option<String>,
        /// Number of synthetic durations.
        #[arg(long)]
        count: Option<usize>,
        /// Synthetic durations are uniform integers on 1..=a_max.
        #[arg(long, default_value_t = 20)]
        a_max: u64,
        /// Number of bins; one per item when omitted.
        #[arg(long)]
        bins: Option<usize>,
        #[arg(long, default_value = "0.4")]
        deviation_ratio: String,
        #[arg(long, default_value = "8")]
        capacity_divisor: String,
        #[arg(long, default_value = "0.1")]
        budget_ratio: String,
        #[arg(long, default_value = "1.5")]
        cost_factor: String,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
pub enum BenchCommand {
    /// Exact and scaled knapsack solves over the thirty budget experiments.
    Ck {
        #[arg(long)]
        n: usize,
        /// Profit ranges to sweep; 100, 1000 and 10000 when omitted.
        #[arg(long = "R", alias = "r")]
        r: Vec<u64>,
        /// Write the per-instance CSV here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Row-and-column generation on synthetic bin packing instances.
    Rebp {
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 20)]
        a_max: u64,
        #[arg(long, default_value_t = 10)]
        instances: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), Error> {
    if let Some(threads) = cli.global.threads {
        if threads == 0 {
            return Err(Error::Usage("--threads must be positive".into()));
        }
        // fails only if a pool already exists, which cannot happen here
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let g = &cli.global;
    match cli.command {
        Command::Ck(cmd) => commands::ck(g, cmd, &mut out),
        Command::Rebp(cmd) => commands::rebp(g, cmd, &mut out),
        Command::Oracle(cmd) => commands::oracle(cmd, &mut out),
        Command::Gen(cmd) => commands::gen(g, cmd, &mut out),
        Command::Bench(cmd) => bench::run(g, cmd, &mut out),
        Command::Report { csv } => report::run(&csv, &mut out),
    }?;
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        // output closed early, as in `rebp ... | head`
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            let category = e.category();
            eprintln!("error[{}]: {e}", category.name());
            ExitCode::from(category.exit_code() as u8)
        }
    }
}

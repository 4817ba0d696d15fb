use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use entclass::commands::{
    cmd_classify, cmd_pauli, cmd_proptest, cmd_scan, ClassifyOptions, CommandError, PauliTarget, ProptestOptions,
};
use entclass::criteria::DEFAULT_TOLERANCE;
use entclass::optimizer::Budget;
use entclass::pauli::SettingMode;
use entclass::scan::{ScanOptions, DEFAULT_STEP};

#[derive(Parser)]
#[command(name = "entclass", version, about = "Entanglement-class inequalities for multi-qubit states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct BudgetArgs {
    /// Optimizer restarts (the first starts from the identity)
    #[arg(long, default_value_t = Budget::default().restarts)]
    restarts: usize,
    /// Function evaluations per restart
    #[arg(long, default_value_t = Budget::default().max_evals)]
    max_evals: usize,
}

impl BudgetArgs {
    fn budget(&self) -> Budget {
        Budget { restarts: self.restarts, max_evals: self.max_evals }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every inequality on a state file and print a JSON report
    Classify {
        #[arg(long)]
        input: PathBuf,
        /// Maximize each left-hand side over local unitaries first
        #[arg(long)]
        optimize: bool,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tolerance: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Scan the GHZ/W/white-noise triangle and write a CSV
    Scan {
        #[arg(long, default_value_t = DEFAULT_STEP)]
        step: f64,
        #[arg(long)]
        optimize: bool,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tolerance: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        threads: Option<usize>,
        /// CSV destination, `-` for stdout
        #[arg(long, default_value = "scan.csv")]
        output: PathBuf,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Print a Pauli expansion and its measurement-setting count
    Pauli {
        /// In, I2, InMinus1, compact-in3 or compact-triple3
        target: String,
        #[arg(long, default_value_t = 3)]
        n: usize,
        /// verbatim or coarse
        #[arg(long, default_value = "verbatim")]
        mode: String,
    },
    /// Sample class mixtures and biseparable states and check the inequalities
    Proptest {
        /// Qubit counts, comma separated
        #[arg(long = "n", value_delimiter = ',', default_value = "3,4,5,6")]
        ns: Vec<usize>,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tolerance: f64,
        /// Where counterexample states are written
        #[arg(long, default_value = "counterexamples")]
        dump_dir: PathBuf,
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
}

fn run(cli: Cli) -> Result<(), CommandError> {
    let mut out = io::stdout().lock();
    match cli.command {
        Command::Classify { input, optimize, tolerance, seed, budget } => {
            let opts = ClassifyOptions { optimize, tolerance, seed, budget: budget.budget() };
            cmd_classify(&input, &opts, &mut out)
        }
        Command::Scan { step, optimize, tolerance, seed, threads, output, budget } => {
            let opts = ScanOptions { step, optimize, tolerance, seed, threads, budget: budget.budget() };
            cmd_scan(&opts, &output, &mut out)
        }
        Command::Pauli { target, n, mode } => {
            let target: PauliTarget = target.parse()?;
            let mode: SettingMode = mode.parse()?;
            cmd_pauli(target, n, mode, &mut out)
        }
        Command::Proptest { ns, samples, seed, tolerance, dump_dir, inject_fault } => {
            let opts = ProptestOptions {
                ns,
                samples,
                seed,
                tolerance,
                dump_dir,
                fault_offset: if inject_fault { 1.0 } else { 0.0 },
                ..Default::default()
            };
            cmd_proptest(&opts, &mut out)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}

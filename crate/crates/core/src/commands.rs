//! The command implementations behind the `entclass` binary. Each writes its
//! normal output to `out` and reports failure as a `CommandError` carrying the
//! process exit code.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::criteria::{InequalityId, InequalityReport};
use crate::error::Error;
use crate::families::{sample_biseparable_with, sample_class_mixture_with, StateClass};
use crate::optimizer::{maximize_violation, Budget, LocalUnitaryParams};
use crate::pauli::{
    count_settings, expand_inequality, tomography_setting_count, CompactForm, PauliExpansion, SettingMode,
};
use crate::qstate::DensityMatrix;
use crate::scan::{run_scan, write_csv, ScanOptions};
use crate::statefile::{load_state, write_density};

pub const EXIT_OK: i32 = 0;
pub const EXIT_COUNTEREXAMPLE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct CommandError {
    pub code: i32,
    pub message: String,
}

impl CommandError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }
}

impl fmt::Display for CommandError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CommandError {}

impl From<Error> for CommandError {
    fn from(e: Error) -> Self {
        let code = if e.is_invariant_violation() { EXIT_INVARIANT } else { EXIT_USAGE };
        Self { code, message: e.to_string() }
    }
}

impl From<io::Error> for CommandError {
    fn from(e: io::Error) -> Self {
        Self::usage(e.to_string())
    }
}

pub type CommandResult = std::result::Result<(), CommandError>;

// ---------------------------------------------------------------- classify

#[derive(Debug, Clone, Copy)]
pub struct ClassifyOptions {
    pub optimize: bool,
    pub tolerance: f64,
    pub seed: u64,
    pub budget: Budget,
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimizationSummary {
    pub inequality: InequalityId,
    pub identity_lhs: f64,
    pub best_lhs: f64,
    pub best_params: LocalUnitaryParams,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassifyReport {
    pub n: usize,
    pub optimized: bool,
    pub reports: Vec<InequalityReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub optimization: Vec<OptimizationSummary>,
}

pub fn classify_state(rho: &DensityMatrix, opts: &ClassifyOptions) -> Result<ClassifyReport, Error> {
    let mut reports = Vec::new();
    let mut optimization = Vec::new();
    for id in InequalityId::ALL {
        let identity_lhs = id.lhs(rho)?;
        let lhs = if opts.optimize {
            let r = maximize_violation(rho, id, opts.budget, opts.seed)?;
            optimization.push(OptimizationSummary {
                inequality: id,
                identity_lhs,
                best_lhs: r.best_lhs,
                best_params: r.best_params,
                evaluations: r.evaluations_used,
                converged: r.converged,
            });
            r.best_lhs
        } else {
            identity_lhs
        };
        reports.push(InequalityReport::new(id, rho.n(), lhs, opts.tolerance));
    }
    Ok(ClassifyReport { n: rho.n(), optimized: opts.optimize, reports, optimization })
}

pub fn cmd_classify(input: &Path, opts: &ClassifyOptions, out: &mut dyn Write) -> CommandResult {
    let rho = load_state(input)
        .map_err(|e| CommandError { message: format!("{}: {e}", input.display()), ..CommandError::from(e) })?
        .into_density();
    let report = classify_state(&rho, opts)?;
    writeln!(out, "{}", serde_json::to_string_pretty(&report).expect("reports serialize"))?;
    Ok(())
}

// -------------------------------------------------------------------- scan

pub fn cmd_scan(opts: &ScanOptions, output: &Path, out: &mut dyn Write) -> CommandResult {
    let to_stdout = output == Path::new("-");
    // Open the destination first so an unwritable path fails before any work.
    let file = if to_stdout {
        None
    } else {
        Some(
            fs::File::create(output)
                .map_err(|e| CommandError::usage(format!("cannot write {}: {e}", output.display())))?,
        )
    };
    let points = run_scan(opts)?;
    match file {
        Some(f) => {
            write_csv(&points, io::BufWriter::new(f))?;
            writeln!(out, "wrote {} points to {}", points.len(), output.display())?;
        }
        None => write_csv(&points, out)?,
    }
    Ok(())
}

// ------------------------------------------------------------------- pauli

/// What `pauli` expands: a linear inequality at a given `n`, or one of the
/// fixed three-qubit compact forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PauliTarget {
    Inequality(InequalityId),
    Compact(CompactForm),
}

impl FromStr for PauliTarget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.parse::<CompactForm>() {
            Ok(c) => Ok(PauliTarget::Compact(c)),
            Err(_) => s.parse().map(PauliTarget::Inequality),
        }
    }
}

pub fn pauli_expansion(target: PauliTarget, n: usize) -> Result<PauliExpansion, Error> {
    match target {
        PauliTarget::Inequality(id) => expand_inequality(id, n),
        PauliTarget::Compact(c) if n == 3 => Ok(c.expansion()),
        PauliTarget::Compact(c) => Err(Error::Unsupported(format!("{} is defined for n = 3 only", c.name()))),
    }
}

/// Prints the expansion in its text form followed by comment lines with the
/// setting counts, so the whole output parses back as an expansion.
pub fn cmd_pauli(target: PauliTarget, n: usize, mode: SettingMode, out: &mut dyn Write) -> CommandResult {
    let expansion = pauli_expansion(target, n)?;
    let schedule = count_settings(&expansion, mode);
    let mode_name = match mode {
        SettingMode::Verbatim => "verbatim",
        SettingMode::Coarse => "coarse",
    };
    write!(out, "{}", expansion.to_text())?;
    writeln!(out, "# settings ({mode_name}): {}", schedule.len())?;
    writeln!(out, "# tomography settings: {}", tomography_setting_count(n as u32))?;
    Ok(())
}

// --------------------------------------------------------------- proptest

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Class(StateClass),
    Biseparable,
}

impl Suite {
    pub const ALL: [Suite; 4] = [
        Suite::Class(StateClass::Double),
        Suite::Class(StateClass::NTuple),
        Suite::Class(StateClass::Dicke2),
        Suite::Biseparable,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Suite::Class(c) => c.label(),
            Suite::Biseparable => "biseparable",
        }
    }

    fn slug(self) -> &'static str {
        match self {
            Suite::Class(StateClass::Double) => "double",
            Suite::Class(StateClass::NTuple) => "ntuple",
            Suite::Class(StateClass::Dicke2) => "dicke2",
            Suite::Biseparable => "biseparable",
        }
    }

    /// Inequalities every sample of the suite must satisfy.
    pub fn inequalities(self) -> &'static [InequalityId] {
        match self {
            Suite::Class(StateClass::Double) => &[InequalityId::I2],
            Suite::Class(StateClass::NTuple) => &[InequalityId::In],
            Suite::Class(StateClass::Dicke2) => &[InequalityId::InMinus1],
            Suite::Biseparable => &InequalityId::ALL,
        }
    }

    fn index(self) -> u64 {
        Suite::ALL.iter().position(|&s| s == self).expect("listed") as u64
    }
}

#[derive(Debug, Clone)]
pub struct ProptestOptions {
    pub ns: Vec<usize>,
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
    /// Mixtures draw between 1 and this many pure components.
    pub max_components: usize,
    pub dump_dir: PathBuf,
    pub max_dumps_per_suite: usize,
    /// Added to every left-hand side; a nonzero value corrupts the evaluator
    /// so the harness itself can be checked.
    pub fault_offset: f64,
}

impl Default for ProptestOptions {
    fn default() -> Self {
        Self {
            ns: vec![3, 4, 5, 6],
            samples: 1000,
            seed: 42,
            tolerance: crate::criteria::DEFAULT_TOLERANCE,
            max_components: 4,
            dump_dir: PathBuf::from("counterexamples"),
            max_dumps_per_suite: 5,
            fault_offset: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteSummary {
    pub n: usize,
    pub suite: Suite,
    pub samples: usize,
    pub max_lhs: f64,
    pub counterexamples: usize,
    pub dumps: Vec<PathBuf>,
}

/// Generator for one `(n, suite)` pair; suites are independent of each other
/// and of scheduling.
pub fn suite_rng(seed: u64, n: usize, suite: Suite) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((n as u64) << 8) | suite.index());
    rng
}

pub fn sample_suite_state<R: Rng + ?Sized>(
    suite: Suite,
    n: usize,
    max_components: usize,
    rng: &mut R,
) -> Result<DensityMatrix, Error> {
    let count = rng.random_range(1..=max_components.max(1));
    match suite {
        Suite::Class(class) => sample_class_mixture_with(class, n, count, rng),
        Suite::Biseparable => sample_biseparable_with(n, count, rng),
    }
}

/// One `(n, suite)` cell of the closure table.
pub fn run_suite(n: usize, suite: Suite, opts: &ProptestOptions) -> Result<SuiteSummary, Error> {
    let mut rng = suite_rng(opts.seed, n, suite);
    let mut summary =
        SuiteSummary { n, suite, samples: opts.samples, max_lhs: f64::NEG_INFINITY, counterexamples: 0, dumps: vec![] };
    for sample in 0..opts.samples {
        let rho = sample_suite_state(suite, n, opts.max_components, &mut rng)?;
        let mut worst = f64::NEG_INFINITY;
        for id in suite.inequalities() {
            worst = worst.max(id.lhs(&rho)? + opts.fault_offset);
        }
        summary.max_lhs = summary.max_lhs.max(worst);
        if worst > opts.tolerance {
            summary.counterexamples += 1;
            if summary.dumps.len() < opts.max_dumps_per_suite {
                fs::create_dir_all(&opts.dump_dir)
                    .map_err(|e| Error::Io(format!("{}: {e}", opts.dump_dir.display())))?;
                let path = opts.dump_dir.join(format!("n{n}-{}-{sample}.json", suite.slug()));
                write_density(&path, &rho)?;
                summary.dumps.push(path);
            }
        }
    }
    Ok(summary)
}

/// Runs every suite for every `n`; one summary per `(n, suite)` in input order.
pub fn run_closure_suites(opts: &ProptestOptions) -> Result<Vec<SuiteSummary>, Error> {
    if let Some(&n) = opts.ns.iter().find(|&&n| n < 3) {
        return Err(Error::QubitCount { n, min: 3, max: crate::qstate::max_qubits() });
    }
    if opts.samples == 0 {
        return Ok(vec![]);
    }
    let jobs: Vec<(usize, Suite)> = opts.ns.iter().flat_map(|&n| Suite::ALL.map(|s| (n, s))).collect();
    jobs.par_iter().map(|&(n, s)| run_suite(n, s, opts)).collect()
}

pub fn cmd_proptest(opts: &ProptestOptions, out: &mut dyn Write) -> CommandResult {
    let summaries = run_closure_suites(opts)?;
    writeln!(
        out,
        "{:>3}  {:<12} {:<22} {:>8} {:>14} {:>15}",
        "n", "suite", "inequalities", "samples", "max_lhs", "counterexamples"
    )?;
    for s in &summaries {
        let ids: Vec<String> = s.suite.inequalities().iter().map(|i| i.to_string()).collect();
        writeln!(
            out,
            "{:>3}  {:<12} {:<22} {:>8} {:>14.6e} {:>15}",
            s.n,
            s.suite.label(),
            ids.join(","),
            s.samples,
            s.max_lhs,
            s.counterexamples
        )?;
    }
    let total: usize = summaries.iter().map(|s| s.counterexamples).sum();
    if total == 0 {
        return Ok(());
    }
    let dumps: Vec<String> = summaries.iter().flat_map(|s| &s.dumps).map(|p| p.display().to_string()).collect();
    Err(CommandError {
        code: EXIT_COUNTEREXAMPLE,
        message: format!("{total} counterexample(s); dumped states:\n  {}", dumps.join("\n  ")),
    })
}

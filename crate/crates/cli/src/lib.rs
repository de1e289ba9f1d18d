//! The `popsched` command line: run and sweep scenario files, evaluate the
//! analytic model over a grid, and write everything as CSV.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod scenario_file;
pub mod values;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use popsched::analysis::AnalysisGrid;
use popsched::report::{
    write_analysis_csv, write_decision_csv, write_run_csv, write_sweep_csv, RunRecord,
};
use popsched::simulator::{
    build_canonical_scenario, build_overload_scenario, sweep, Knob, OverloadSpec, Simulation,
};
use popsched::{Discipline, Metrics, Scenario};

pub use error::CliError;
pub use scenario_file::{load, parse, ScenarioFile};
pub use values::parse_values;

#[derive(Debug, Parser)]
#[command(
    name = "popsched",
    version,
    about = "Popularity-aware relay scheduling simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a scenario file and write per-flow metrics as CSV.
    Run(RunArgs),
    /// Vary one knob over a list of values, with replications.
    Sweep(SweepArgs),
    /// Evaluate the analytic transmission/delay model over a grid.
    Analyze(AnalyzeArgs),
    /// Parse and check a scenario file without running it.
    Validate { scenario: PathBuf },
    /// Write a built-in scenario as a scenario file.
    Generate(GenerateArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// pop-aware or fifo.
    #[arg(long)]
    pub discipline: Option<Discipline>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub replications: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, s: &mut Scenario) -> Result<(), CliError> {
        if let Some(d) = self.discipline {
            s.discipline = d;
        }
        if let Some(seed) = self.seed {
            s.seed = seed;
        }
        if let Some(r) = self.replications {
            if r == 0 {
                return Err(CliError::Usage("--replications must be >= 1".into()));
            }
            s.replications = r;
        }
        Ok(())
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    pub scenario: PathBuf,
    #[command(flatten)]
    pub overrides: Overrides,
    /// Write CSV here instead of stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Also write the scheduler decision log (pop-aware only) as CSV.
    #[arg(long)]
    pub decisions: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    pub scenario: PathBuf,
    /// connections, rate or duration.
    #[arg(long)]
    pub knob: Knob,
    /// Comma-separated values; `start:stop:step` expands inclusively.
    #[arg(long)]
    pub values: String,
    #[command(flatten)]
    pub overrides: Overrides,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Node counts.
    #[arg(long, default_value = "10,23")]
    pub m: String,
    #[arg(long, default_value = "0.5,1,2")]
    pub load: String,
    #[arg(long = "kappa-k", default_value = "0.5,1,2")]
    pub kappa_k: String,
    #[arg(long = "kappa-n", default_value = "0,1,3")]
    pub kappa_n: String,
    #[arg(long, default_value = "0,0.1,0.5")]
    pub alpha: String,
    #[arg(long, default_value = "0.1")]
    pub rate: String,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Builtin {
    /// Three reference communities, one sender each, uncongested.
    Canonical,
    /// Many senders offering more than the link can carry.
    Overload,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(value_enum)]
    pub which: Builtin,
    /// Senders (overload only).
    #[arg(long, default_value_t = 40)]
    pub flows: usize,
    /// Offered load over link capacity (overload only).
    #[arg(long = "load-factor", default_value_t = 1.6)]
    pub load_factor: f64,
    /// Seconds (overload only).
    #[arg(long, default_value_t = 200.0)]
    pub duration: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

fn open_output<'a>(
    path: Option<&Path>,
    stdout: &'a mut dyn Write,
) -> Result<Box<dyn Write + 'a>, CliError> {
    match path {
        None => Ok(Box::new(stdout)),
        Some(p) => {
            let f = File::create(p)
                .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", p.display())))?;
            Ok(Box::new(BufWriter::new(f)))
        }
    }
}

fn io_error(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(format!("write failed: {e}"))
}

fn load_scenario(path: &Path, overrides: &Overrides) -> Result<Scenario, CliError> {
    let mut s = load(path)?.to_scenario()?;
    overrides.apply(&mut s)?;
    Ok(s)
}

/// Seed of replication `rep` in `run`: the scenario seed plus `rep`.
pub fn replication_seed(base: u64, rep: usize) -> u64 {
    base.wrapping_add(rep as u64)
}

fn summary(run: usize, discipline: Discipline, seed: u64, m: &Metrics) -> String {
    let t = m.aggregate();
    format!(
        "summary run={run} discipline={} seed={seed} generated={} delivered={} dropped={} residual={} delivery_rate={:.6} loss_rate={:.6} mean_delay={:.6} throughput_bps={:.1} conserved={}",
        discipline.as_str(),
        t.generated,
        t.delivered,
        t.dropped(),
        t.residual,
        t.delivery_rate(),
        t.loss_rate(),
        t.mean_delay(),
        m.throughput_bps(),
        m.is_conserved(),
    )
}

pub fn cmd_run(
    args: &RunArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), CliError> {
    let base = load_scenario(&args.scenario, &args.overrides)?;
    let mut results = Vec::with_capacity(base.replications);
    for rep in 0..base.replications {
        let mut s = base.clone();
        s.seed = replication_seed(base.seed, rep);
        let out = Simulation::new(&s)
            .with_decisions(args.decisions.is_some())
            .run()?;
        writeln!(
            stderr,
            "{}",
            summary(rep, s.discipline, s.seed, &out.metrics)
        )
        .map_err(io_error)?;
        results.push((s.seed, out));
    }
    let records: Vec<RunRecord<'_>> = results
        .iter()
        .enumerate()
        .map(|(i, (seed, out))| RunRecord {
            run: i,
            discipline: base.discipline.as_str(),
            seed: *seed,
            metrics: &out.metrics,
        })
        .collect();
    let mut w = open_output(args.output.as_deref(), stdout)?;
    write_run_csv(&mut w, &records).map_err(io_error)?;
    w.flush().map_err(io_error)?;
    if let Some(path) = &args.decisions {
        let logs: Vec<(usize, &[popsched::scheduler::Decision])> = results
            .iter()
            .enumerate()
            .map(|(i, (_, out))| (i, out.decisions.as_slice()))
            .collect();
        let f = File::create(path)
            .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", path.display())))?;
        let mut w = BufWriter::new(f);
        write_decision_csv(&mut w, &logs).map_err(io_error)?;
        w.flush().map_err(io_error)?;
    }
    Ok(())
}

pub fn cmd_sweep(args: &SweepArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let base = load_scenario(&args.scenario, &args.overrides)?;
    let values =
        parse_values(&args.values).map_err(|e| CliError::Usage(format!("--values: {e}")))?;
    let points = sweep(&base, args.knob, &values, base.replications)?;
    let mut w = open_output(args.output.as_deref(), stdout)?;
    write_sweep_csv(&mut w, args.knob, base.seed, &points).map_err(io_error)?;
    w.flush().map_err(io_error)?;
    Ok(())
}

fn node_counts(spec: &str) -> Result<Vec<usize>, CliError> {
    parse_values(spec)
        .map_err(|e| CliError::Usage(format!("--m: {e}")))?
        .into_iter()
        .map(|v| {
            if v.fract() == 0.0 && v >= 0.0 {
                Ok(v as usize)
            } else {
                Err(CliError::Validation(format!(
                    "m must be a whole number, got {v}"
                )))
            }
        })
        .collect()
}

pub fn cmd_analyze(args: &AnalyzeArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let list = |name: &str, spec: &str| {
        parse_values(spec).map_err(|e| CliError::Usage(format!("--{name}: {e}")))
    };
    let grid = AnalysisGrid {
        m: node_counts(&args.m)?,
        load: list("load", &args.load)?,
        kappa_k: list("kappa-k", &args.kappa_k)?,
        kappa_n: list("kappa-n", &args.kappa_n)?,
        alpha: list("alpha", &args.alpha)?,
        rate: list("rate", &args.rate)?,
    };
    let rows = grid
        .evaluate()
        .map_err(|e| CliError::Validation(e.to_string()))?;
    let mut w = open_output(args.output.as_deref(), stdout)?;
    write_analysis_csv(&mut w, &rows).map_err(io_error)?;
    w.flush().map_err(io_error)?;
    Ok(())
}

pub fn cmd_validate(path: &Path, stdout: &mut dyn Write) -> Result<(), CliError> {
    let s = load(path)?.to_scenario()?;
    writeln!(
        stdout,
        "ok: {}: {} nodes in {} groups, {} flows, offered load {:.4} of link",
        path.display(),
        s.graph.node_count(),
        s.graph.groups().count(),
        s.flows.len(),
        s.offered_load()
    )
    .map_err(io_error)
}

pub fn cmd_generate(args: &GenerateArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let s = match args.which {
        Builtin::Canonical => build_canonical_scenario(),
        Builtin::Overload => {
            if args.flows == 0 {
                return Err(CliError::Usage("--flows must be >= 1".into()));
            }
            build_overload_scenario(OverloadSpec {
                flows: args.flows,
                load_factor: args.load_factor,
                duration: args.duration,
                seed: args.seed,
            })
        }
    };
    s.validate()?;
    let mut w = open_output(args.output.as_deref(), stdout)?;
    w.write_all(ScenarioFile::from_scenario(&s).to_toml().as_bytes())
        .map_err(io_error)?;
    w.flush().map_err(io_error)?;
    Ok(())
}

pub fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Run(a) => cmd_run(a, stdout, stderr),
        Command::Sweep(a) => cmd_sweep(a, stdout),
        Command::Analyze(a) => cmd_analyze(a, stdout),
        Command::Validate { scenario } => cmd_validate(scenario, stdout),
        Command::Generate(a) => cmd_generate(a, stdout),
    }
}

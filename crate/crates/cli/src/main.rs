use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qet_core::report::{self, to_csv};
use qet_core::{
    compare_reference, emit_tables, exchange_test, reproduce_all, run_experiment, translational_test, E0Convention,
    EvalMode, ExperimentReport, ModelParams, PrepStrategy, ProtocolConfig, QetError, ReferenceDataset, RunMode, Source,
    MAX_QUBITS,
};

mod render;

#[derive(Debug, Parser)]
#[command(
    name = "qet",
    version,
    about = "Quantum energy teleportation experiments on a statevector simulator"
)]
struct Cli {
    #[command(flatten)]
    opts: Opts,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one configuration (the default).
    Run,
    /// Run all six table configurations in both modes.
    ReproduceAll,
    /// Translational and exchange symmetry tests for one configuration.
    Symmetry {
        /// Leave the last receiver out of the W preparation.
        #[arg(long)]
        negative_control: bool,
    },
    /// Deviation table against the bundled reference data.
    Compare,
}

#[derive(Debug, Args)]
struct Opts {
    /// Total qubits, sender included.
    #[arg(long, global = true, default_value_t = 3, value_parser = clap::value_parser!(u16).range(2..=MAX_QUBITS as i64))]
    qubits: u16,
    #[arg(long, global = true, default_value_t = 2.0, allow_negative_numbers = true)]
    h: f64,
    #[arg(long, global = true, default_value_t = 1.0, allow_negative_numbers = true)]
    k: f64,
    #[arg(long, global = true, default_value_t = qet_core::protocol::DEFAULT_SHOTS)]
    shots: u64,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Receiver measurement order, e.g. `3,1,2`.
    #[arg(long, global = true, value_delimiter = ',')]
    order: Option<Vec<usize>>,
    #[arg(long, global = true, value_enum, default_value_t = Prep::Log)]
    prep: Prep,
    #[arg(long, global = true, value_enum, default_value_t = Mode::Both)]
    mode: Mode,
    #[arg(long, global = true, value_enum, default_value_t = Convention::Table)]
    e0_convention: Convention,
    #[arg(long, global = true, value_name = "PATH")]
    out_json: Option<PathBuf>,
    #[arg(long, global = true, value_name = "PATH")]
    out_csv: Option<PathBuf>,
    /// Print a deviation table against this reference column.
    #[arg(long, global = true, value_enum)]
    compare: Option<RefSource>,
    /// Worker threads for shot sampling (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Prep {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Sampled,
    Exact,
    Both,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Convention {
    Table,
    Printed,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RefSource {
    Simulator,
    Device,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<QetError> for Failure {
    fn from(e: QetError) -> Self {
        match e {
            QetError::QubitCount(_)
            | QetError::InvalidParameter(_)
            | QetError::InvalidReceiverOrder(_)
            | QetError::ZeroWeights
            | QetError::TooFewShots(_) => Failure::Usage(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl Opts {
    fn prep(&self) -> PrepStrategy {
        match self.prep {
            Prep::Linear => PrepStrategy::LinearCascade,
            Prep::Log => PrepStrategy::LogDepthTree,
        }
    }

    fn run_mode(&self) -> RunMode {
        match self.mode {
            Mode::Sampled => RunMode::Sampled,
            Mode::Exact => RunMode::Exact,
            Mode::Both => RunMode::Both,
        }
    }

    fn source(&self) -> Option<Source> {
        self.compare.map(|s| match s {
            RefSource::Simulator => Source::QasmSimulator,
            RefSource::Device => Source::Device,
        })
    }

    fn config(&self) -> Result<ProtocolConfig, Failure> {
        let params = ModelParams::new(self.qubits as usize, self.h, self.k)?;
        let mut cfg = ProtocolConfig::new(params)
            .with_shots(self.shots)
            .with_seed(self.seed)
            .with_prep(self.prep());
        if let Some(order) = &self.order {
            cfg = cfg.with_order(order.clone());
        }
        cfg.e0_convention = match self.e0_convention {
            Convention::Table => E0Convention::TableConsistent,
            Convention::Printed => E0Convention::AsPrinted,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::Runtime(format!("writing {}: {e}", path.display())))
}

fn print_comparisons(reports: &[ExperimentReport], source: Source) -> Result<(), Failure> {
    let dataset = ReferenceDataset::bundled()?;
    for r in reports {
        let table = compare_reference(r, &dataset, source)?;
        if source == Source::Device {
            let sim = compare_reference(r, &dataset, Source::QasmSimulator)?;
            print!("{}", render::side_by_side(&sim, &table));
        } else {
            print!("{table}");
        }
        println!();
    }
    Ok(())
}

fn cmd_run(opts: &Opts) -> Result<(), Failure> {
    let report = run_experiment(&opts.config()?, opts.run_mode())?;
    print!("{}", render::report(&report));
    if let Some(source) = opts.source() {
        println!();
        print_comparisons(std::slice::from_ref(&report), source)?;
    }
    if let Some(path) = &opts.out_json {
        write_file(path, &report::to_json(&report)?)?;
    }
    if let Some(path) = &opts.out_csv {
        write_file(path, &to_csv(std::slice::from_ref(&report))?)?;
    }
    Ok(())
}

fn cmd_reproduce_all(opts: &Opts) -> Result<(), Failure> {
    if opts.shots == 0 {
        return Err(Failure::Usage("shots must be at least 1".into()));
    }
    let set = reproduce_all(opts.seed, opts.shots, opts.prep())?;
    let (csv, json) = emit_tables(&set)?;
    print!("{}", render::rows(&report::table_rows(&set.experiments)));
    if let Some(source) = opts.source() {
        println!();
        print_comparisons(&set.experiments, source)?;
    }
    if let Some(path) = &opts.out_json {
        write_file(path, &json)?;
    }
    if let Some(path) = &opts.out_csv {
        write_file(path, &csv)?;
    }
    Ok(())
}

fn cmd_symmetry(opts: &Opts, negative_control: bool) -> Result<(), Failure> {
    let mut cfg = opts.config()?;
    cfg.truncated_prep = negative_control;
    let modes: &[EvalMode] = match opts.mode {
        Mode::Exact => &[EvalMode::Exact],
        Mode::Sampled => &[EvalMode::Sampled],
        Mode::Both => &[EvalMode::Exact, EvalMode::Sampled],
    };
    let reversed: Vec<usize> = cfg.receiver_order.iter().rev().copied().collect();
    let mut reports = Vec::new();
    for &m in modes {
        reports.push(translational_test(&cfg, m)?);
        reports.push(exchange_test(&cfg, &cfg.receiver_order, &reversed, m)?);
    }
    for r in &reports {
        println!("{}", render::symmetry(r));
    }
    if let Some(path) = &opts.out_json {
        write_file(path, &report::to_json(&reports)?)?;
    }
    Ok(())
}

fn cmd_compare(opts: &Opts) -> Result<(), Failure> {
    let report = run_experiment(&opts.config()?, opts.run_mode())?;
    print_comparisons(&[report], opts.source().unwrap_or(Source::QasmSimulator))
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(threads) = cli.opts.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Failure::Runtime(e.to_string()))?;
    }
    let opts = &cli.opts;
    match cli.command.unwrap_or(Command::Run) {
        Command::Run => cmd_run(opts),
        Command::ReproduceAll => cmd_reproduce_all(opts),
        Command::Symmetry { negative_control } => cmd_symmetry(opts, negative_control),
        Command::Compare => cmd_compare(opts),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let start = Instant::now();
    let result = run(cli);
    eprintln!("wall time: {:.3}s", start.elapsed().as_secs_f64());
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

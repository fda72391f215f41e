//! The `qpar` command line: estimate, flame-graph, simulate and sweep
//! QParallel programs.

use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use qparallel::flamegraph::{to_json, to_speedscope, validate_speedscope};
use qparallel::ir::{validate_trace, Trace};
use qparallel::lowering::{bind_args, strip_parallel, trace_program_with, LowerError, LowerOptions};
use qparallel::parser::{parse, ParseError, Program};
use qparallel::scheduler::{resource_report, schedule, MetricError, MetricTable, METRIC_ENV};
use qparallel::simulator::{equivalent, input_qubits, run_with_input, SimError, SimOptions, DEFAULT_MAX_SLOTS};
use qparallel::stdlib::{corpus, generate, trace_spec, CircuitSpec, Family, Mode, StdlibError};

#[derive(Debug, Parser)]
#[command(name = "qpar", version, about = "Resource estimation and checking for QParallel programs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print depth, T-count, gate count, qubit count and the heaviest frames.
    Estimate(EstimateArgs),
    /// Write the critical path as a speedscope flame graph.
    Flamegraph(FlamegraphArgs),
    /// Run a program on the statevector simulator.
    Simulate(SimulateArgs),
    /// Tabulate resources of a generator family over sizes and modes (CSV).
    Sweep(SweepArgs),
    /// List, write or generate example programs.
    Examples(ExamplesArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Source file (`.qpl`).
    pub file: PathBuf,
    /// Entry operation.
    #[arg(long, default_value = "Main")]
    pub entry: String,
    /// Entry argument as `name=value`; repeatable.
    #[arg(long = "arg", value_name = "NAME=VALUE", value_parser = parse_named)]
    pub args: Vec<(String, String)>,
    /// Metric preset (`t-depth`, `full-depth`) or path of a `GATE=COST` file.
    #[arg(long, env = METRIC_ENV, default_value = "t-depth")]
    pub metric: String,
    /// Drop all parallel annotations before tracing.
    #[arg(long)]
    pub force_serial: bool,
    /// Abort once more than this many qubits are allocated.
    #[arg(long)]
    pub max_qubits: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Number of stack frames to list.
    #[arg(long, default_value_t = 5)]
    pub top: usize,
    /// Print the report as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct FlamegraphArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Output path; defaults to `<file stem>.speedscope.json`.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Compare the program against its serialised form on every basis input.
    #[arg(long)]
    pub check_parallel: bool,
    /// Seed of the measurement sampler.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Number of consecutive seeds used by `--check-parallel`.
    #[arg(long, default_value_t = 2)]
    pub seeds: u64,
    /// Basis input of the input register (bit i = i-th allocated qubit).
    #[arg(long, default_value_t = 0)]
    pub input: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Parallel,
    Serial,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Parallel => Mode::Parallel,
            ModeArg::Serial => Mode::Serial,
        }
    }
}

#[derive(Debug, Args)]
pub struct GeneratorArgs {
    /// mcx: tree levels that run in parallel.
    #[arg(long)]
    pub cutoff: Option<u32>,
    /// givens: number of Fourier-state registers.
    #[arg(long, default_value_t = 1)]
    pub q: u32,
    /// givens: register width.
    #[arg(long, default_value_t = 32)]
    pub bitwidth: u32,
    /// fanout, controlled-adder: replica count.
    #[arg(long, default_value_t = 2)]
    pub replicas: u32,
}

impl GeneratorArgs {
    fn spec(&self, family: Family, n: u32, mode: Mode) -> CircuitSpec {
        let mut s = CircuitSpec::new(family, n, mode)
            .with_q(self.q)
            .with_bitwidth(self.bitwidth)
            .with_replicas(self.replicas);
        s.cutoff = self.cutoff;
        s
    }
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Generator family.
    #[arg(long, value_parser = parse_family)]
    pub family: Family,
    /// Sizes: comma-separated integers or inclusive ranges `lo..hi`.
    #[arg(long, value_parser = parse_sizes)]
    pub sizes: Sizes,
    /// Modes to tabulate.
    #[arg(long, value_delimiter = ',', default_value = "parallel,serial")]
    pub modes: Vec<ModeArg>,
    /// Metric preset or `GATE=COST` file, as for `estimate`.
    #[arg(long, env = METRIC_ENV, default_value = "t-depth")]
    pub metric: String,
    #[command(flatten)]
    pub generator: GeneratorArgs,
}

#[derive(Debug, Args)]
pub struct ExamplesArgs {
    /// Write every corpus file into this directory.
    #[arg(long, value_name = "DIR", conflicts_with = "family")]
    pub write: Option<PathBuf>,
    /// Print the source of one generated program instead of the listing.
    #[arg(long, value_parser = parse_family, requires = "size")]
    pub family: Option<Family>,
    /// Size parameter of the generated program (required with `--family`).
    #[arg(long)]
    pub size: Option<u32>,
    #[arg(long, value_enum, default_value = "parallel")]
    pub mode: ModeArg,
    #[command(flatten)]
    pub generator: GeneratorArgs,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sizes(pub Vec<u32>);

fn parse_named(s: &str) -> std::result::Result<(String, String), String> {
    match s.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.to_string())),
        _ => Err(format!("expected NAME=VALUE, got `{s}`")),
    }
}

fn parse_family(s: &str) -> std::result::Result<Family, String> {
    Family::from_name(s).ok_or_else(|| {
        let names: Vec<&str> = Family::ALL.iter().map(|f| f.name()).collect();
        format!("unknown family `{s}` (expected one of {})", names.join(", "))
    })
}

fn parse_sizes(s: &str) -> std::result::Result<Sizes, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim) {
        let num = |t: &str| t.trim().parse::<u32>().map_err(|_| format!("bad size `{t}`"));
        match part.split_once("..") {
            Some((lo, hi)) => out.extend(num(lo)?..=num(hi)?),
            None => out.push(num(part)?),
        }
    }
    if out.is_empty() {
        return Err("no sizes given".into());
    }
    Ok(Sizes(out))
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{0}")]
    Usage(String),
    #[error("{path}:{source}")]
    Parse { path: String, source: ParseError },
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Lower(#[from] LowerError),
    #[error(transparent)]
    Stdlib(#[from] StdlibError),
    #[error("simulation failed: {0}")]
    Sim(#[from] SimError),
    #[error("parallel and serial programs differ (max deviation {deviation:.3e} on input {input}, seed {seed})")]
    Mismatch { deviation: f64, input: u64, seed: u64 },
}

impl CliError {
    /// 2 usage, 3 parse/resolution, 4 validation/semantic, 5 mismatch.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Usage(_) | CliError::Metric(_) => 2,
            CliError::Parse { .. } => 3,
            CliError::Lower(e) => lower_code(e),
            CliError::Stdlib(StdlibError::Parse(_)) => 3,
            CliError::Stdlib(StdlibError::Lower(e)) => lower_code(e),
            CliError::Stdlib(_) => 2,
            CliError::Sim(_) => 4,
            CliError::Mismatch { .. } => 5,
        }
    }
}

fn lower_code(e: &LowerError) -> i32 {
    match e {
        LowerError::UnknownEntry(_)
        | LowerError::ArgCount { .. }
        | LowerError::MissingArg(_)
        | LowerError::BadArg { .. }
        | LowerError::QubitEntryParam(_) => 2,
        _ => 4,
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.display().to_string(), source }
}

fn out_err(source: io::Error) -> CliError {
    CliError::Io { path: "<stdout>".into(), source }
}

/// A parsed program ready to trace.
struct Loaded {
    program: Program,
    args: Vec<qparallel::lowering::Value>,
}

impl RunArgs {
    fn load(&self) -> Result<Loaded> {
        let text = std::fs::read_to_string(&self.file).map_err(io_err(&self.file))?;
        let program =
            parse(&text).map_err(|source| CliError::Parse { path: self.file.display().to_string(), source })?;
        let program = if self.force_serial { strip_parallel(&program) } else { program };
        let args = bind_args(&program, &self.entry, &self.args)?;
        Ok(Loaded { program, args })
    }

    fn options(&self) -> LowerOptions {
        LowerOptions { max_qubits: self.max_qubits, ..LowerOptions::default() }
    }

    fn trace_of(&self, program: &Program, args: &[qparallel::lowering::Value]) -> Result<Trace> {
        Ok(trace_program_with(program, &self.entry, args, &self.options())?)
    }

    fn trace(&self) -> Result<Trace> {
        let l = self.load()?;
        self.trace_of(&l.program, &l.args)
    }

    fn metric(&self) -> Result<MetricTable> {
        Ok(MetricTable::resolve(&self.metric)?)
    }
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Estimate(a) => estimate(&a, out),
        Command::Flamegraph(a) => flamegraph(&a, out),
        Command::Simulate(a) => simulate(&a, out),
        Command::Sweep(a) => sweep(&a, out),
        Command::Examples(a) => examples(&a, out),
    }
}

fn estimate(a: &EstimateArgs, out: &mut dyn Write) -> Result<()> {
    let metric = a.run.metric()?;
    let trace = a.run.trace()?;
    let report = resource_report(&trace, &metric);
    if a.json {
        let text = serde_json::to_string_pretty(&report).expect("report serialises");
        writeln!(out, "{text}").map_err(out_err)?;
        return Ok(());
    }
    let mut s = String::new();
    s += &format!("entry: {}\n", a.run.entry);
    s += &format!("metric: {}\n", report.metric);
    s += &format!("depth: {}\n", report.depth);
    s += &format!("t-count: {}\n", report.t_count);
    s += &format!("gate-count: {}\n", report.gate_count);
    s += &format!("qubits: {}\n", report.qubits);
    s += &format!("critical-path: {} gates\n", report.critical_path_length);
    if a.top > 0 && !report.frames.is_empty() {
        s += "top frames:\n";
        let width = report.frames.iter().map(|f| f.cost.to_string().len()).max().unwrap_or(1);
        for f in report.frames.iter().take(a.top) {
            s += &format!("  {:>width$}  {}\n", f.cost, f.frame);
        }
    }
    out.write_all(s.as_bytes()).map_err(out_err)
}

fn flamegraph(a: &FlamegraphArgs, out: &mut dyn Write) -> Result<()> {
    let metric = a.run.metric()?;
    let trace = a.run.trace()?;
    let sched = schedule(&trace, &metric);
    let name = format!("{} ({})", a.run.entry, metric.name());
    let json = to_json(&to_speedscope(&trace, &sched, &name));
    debug_assert!(validate_speedscope(&json).is_ok());
    let path = match &a.output {
        Some(p) => p.clone(),
        None => {
            let stem = a.run.file.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or("trace".into());
            PathBuf::from(format!("{stem}.speedscope.json"))
        }
    };
    std::fs::write(&path, json).map_err(io_err(&path))?;
    writeln!(out, "depth: {}\nwrote {}", sched.depth, path.display()).map_err(out_err)
}

fn simulate(a: &SimulateArgs, out: &mut dyn Write) -> Result<()> {
    let opts = SimOptions { max_slots: DEFAULT_MAX_SLOTS };
    let loaded = a.run.load()?;
    // Lowering already validates; a failing program never reaches the simulator.
    let trace = a.run.trace_of(&loaded.program, &loaded.args)?;
    if !a.check_parallel {
        let r = run_with_input(&trace, a.input, a.seed, &opts)?;
        let width = r.inputs.len();
        let mut s = format!("input qubits: {width}\n");
        for (i, amp) in r.register.iter().enumerate() {
            if amp.norm() > 1e-12 {
                let bits: String = (0..width).map(|b| if i >> b & 1 == 1 { '1' } else { '0' }).collect();
                s += &format!("|{bits}> {:+.6}{:+.6}i\n", amp.re, amp.im);
            }
        }
        let results: Vec<&str> = r.results.iter().map(|&b| if b { "1" } else { "0" }).collect();
        s += &format!("results: [{}]\n", results.join(", "));
        return out.write_all(s.as_bytes()).map_err(out_err);
    }
    let serial = a.run.trace_of(&strip_parallel(&loaded.program), &loaded.args)?;
    debug_assert!(validate_trace(&serial).is_empty());
    let seeds: Vec<u64> = (a.seed..a.seed + a.seeds.max(1)).collect();
    let eq = equivalent(&trace, &serial, &seeds, &opts)?;
    let inputs = input_qubits(&trace).len();
    if eq.equivalent {
        writeln!(
            out,
            "PASS max deviation {:.3e} ({} cases: {} basis inputs x {} seeds)",
            eq.max_deviation,
            eq.cases,
            1u64 << inputs,
            seeds.len()
        )
        .map_err(out_err)
    } else {
        let (input, seed) = eq.worst.unwrap_or_default();
        writeln!(out, "FAIL max deviation {:.3e}", eq.max_deviation).map_err(out_err)?;
        Err(CliError::Mismatch { deviation: eq.max_deviation, input, seed })
    }
}

pub const SWEEP_HEADER: &str = "family,size,mode,params,depth,t_count,qubits";

fn sweep(a: &SweepArgs, out: &mut dyn Write) -> Result<()> {
    let metric = MetricTable::resolve(&a.metric)?;
    let specs: Vec<CircuitSpec> = a
        .sizes
        .0
        .iter()
        .flat_map(|&n| a.modes.iter().map(move |&m| (n, m)))
        .map(|(n, m)| a.generator.spec(a.family, n, m.into()))
        .collect();
    // Rows are independent; compute them concurrently and print in order.
    let rows: Vec<Result<String>> = std::thread::scope(|s| {
        let handles: Vec<_> = specs
            .iter()
            .map(|spec| {
                let metric = &metric;
                s.spawn(move || -> Result<String> {
                    let trace = trace_spec(spec)?;
                    let r = resource_report(&trace, metric);
                    Ok(format!(
                        "{},{},{},{},{},{},{}",
                        spec.family,
                        spec.n,
                        spec.mode,
                        spec.params(),
                        r.depth,
                        r.t_count,
                        r.qubits
                    ))
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect()
    });
    let mut text = format!("{SWEEP_HEADER}\n");
    for row in rows {
        text += &row?;
        text.push('\n');
    }
    out.write_all(text.as_bytes()).map_err(out_err)
}

fn examples(a: &ExamplesArgs, out: &mut dyn Write) -> Result<()> {
    if let Some(family) = a.family {
        let n = a.size.ok_or_else(|| CliError::Usage("--family needs --size".into()))?;
        let g = generate(&a.generator.spec(family, n, a.mode.into()))?;
        return out.write_all(g.source.as_bytes()).map_err(out_err);
    }
    let entries = corpus();
    if let Some(dir) = &a.write {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        for e in &entries {
            let path = dir.join(e.file_name);
            std::fs::write(&path, e.source()).map_err(io_err(&path))?;
            writeln!(out, "wrote {}", path.display()).map_err(out_err)?;
        }
        return Ok(());
    }
    let width = entries.iter().map(|e| e.file_name.len()).max().unwrap_or(0);
    for e in &entries {
        writeln!(out, "{:width$}  {}", e.file_name, e.description).map_err(out_err)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), 2);
        assert_eq!(CliError::Lower(LowerError::MissingArg("n".into())).exit_code(), 2);
        assert_eq!(CliError::Lower(LowerError::QubitLimit(3)).exit_code(), 4);
        assert_eq!(CliError::Sim(SimError::InputMismatch(1, 2)).exit_code(), 4);
        assert_eq!(CliError::Mismatch { deviation: 1.0, input: 0, seed: 1 }.exit_code(), 5);
    }

    #[test]
    fn size_lists() {
        assert_eq!(parse_sizes("2,4..6, 9").unwrap(), Sizes(vec![2, 4, 5, 6, 9]));
        assert!(parse_sizes("2,x").is_err());
        assert_eq!(parse_named("n=8").unwrap(), ("n".into(), "8".into()));
        assert!(parse_named("=8").is_err());
    }
}

//! Command-line front-end.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use modmap_core::arch::CgraSpec;
use modmap_core::dfg::DataflowGraph;
use modmap_core::driver::{expand_stages, map_loop, utilization, MapOutcome, SearchConfig};
use modmap_core::encode::{build_problem, AmoEncoding, EncodeError, EncodeOptions};
use modmap_core::regalloc::allocate;
use modmap_core::schedule::{alap, asap, build_kms, compute_mii, mobility, mobility_schedule, ScheduleError};
use modmap_core::solve::{import_external_model, Mapping, ModelError};
use modmap_core::verify::{brute_force_min_ii, validate, OracleError};
use thiserror::Error;

use crate::clock::StdClock;
use crate::dimacs::{write_dimacs, write_litmap};
use crate::json::{load_arch, load_dfg, load_mapping, mapping_to_json, FormatError, Metrics, TopologyDoc};
use crate::report::{kms_table, mii_line, schedule_table, trace_line};

#[derive(Debug, Parser)]
#[command(name = "modmap", version, about = "Exact SAT-based modulo scheduling onto CGRAs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Search for a mapping at the smallest feasible initiation interval.
    Map(MapArgs),
    /// Print the ASAP, ALAP and mobility schedules, and optionally the MII
    /// and the kernel mobility schedule.
    Schedule(ScheduleArgs),
    /// Write the CNF problem for one initiation interval.
    Encode(EncodeArgs),
    /// Check a mapping file.
    Validate(MappingArgs),
    /// Exhaustive search for the minimal initiation interval (small graphs).
    Oracle(OracleArgs),
    /// Report metrics of a mapping file.
    Metrics(MappingArgs),
}

#[derive(Debug, Args)]
pub struct Inputs {
    /// Dataflow graph (JSON).
    #[arg(long)]
    pub dfg: PathBuf,
    /// Array description (JSON).
    #[arg(long)]
    pub arch: PathBuf,
    /// Override the array topology.
    #[arg(long, value_enum)]
    pub topology: Option<TopologyDoc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverKind {
    Embedded,
    DimacsFile,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AmoArg {
    Pairwise,
    Sequential,
}

impl From<AmoArg> for EncodeOptions {
    fn from(a: AmoArg) -> Self {
        EncodeOptions {
            amo: match a {
                AmoArg::Pairwise => AmoEncoding::Pairwise,
                AmoArg::Sequential => AmoEncoding::Sequential,
            },
        }
    }
}

#[derive(Debug, Args)]
pub struct MapArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    #[arg(long, default_value_t = 50)]
    pub max_ii: usize,
    /// Solver budget per initiation interval, in seconds.
    #[arg(long, value_name = "SECONDS")]
    pub per_ii_timeout: Option<f64>,
    /// Budget for the whole search, in seconds.
    #[arg(long, value_name = "SECONDS", default_value_t = 4000.0)]
    pub timeout: f64,
    /// Register-allocation failures tolerated per interval before moving on.
    #[arg(long)]
    pub ra_retry_limit: Option<usize>,
    #[arg(long, value_enum, default_value_t = AmoArg::Pairwise)]
    pub amo: AmoArg,
    #[arg(long, value_enum, default_value_t = SolverKind::Embedded)]
    pub solver: SolverKind,
    /// Interval to encode with `--solver dimacs-file`.
    #[arg(long)]
    pub ii: Option<usize>,
    /// CNF file written with `--solver dimacs-file`.
    #[arg(long)]
    pub dimacs: Option<PathBuf>,
    /// Literal map written with `--solver dimacs-file`.
    #[arg(long)]
    pub litmap: Option<PathBuf>,
    /// Model produced by an external solver for the CNF in `--dimacs`.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Mapping output file (standard output if absent).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScheduleArgs {
    #[arg(long)]
    pub dfg: PathBuf,
    /// Also report the MII on this array.
    #[arg(long)]
    pub arch: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub topology: Option<TopologyDoc>,
    /// Also print the kernel mobility schedule for this interval.
    #[arg(long)]
    pub ii: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    #[arg(long)]
    pub ii: usize,
    /// CNF output (standard output if absent).
    #[arg(long)]
    pub dimacs: Option<PathBuf>,
    #[arg(long)]
    pub litmap: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = AmoArg::Pairwise)]
    pub amo: AmoArg,
}

#[derive(Debug, Args)]
pub struct MappingArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    #[arg(long)]
    pub mapping: PathBuf,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    #[arg(long, default_value_t = 50)]
    pub max_ii: usize,
    /// Run on graphs above the node limit.
    #[arg(long)]
    pub allow_large: bool,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {source}", path.display())]
    Format { path: PathBuf, source: FormatError },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error("writing output: {0}")]
    Output(#[from] io::Error),
}

type Outcome = Result<i32, CliError>;

/// Parses `argv` (including the program name) and runs the command. Returns
/// the process exit code: 0 on success, 1 on a domain failure, 2 on usage or
/// IO errors.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    match cmd {
        Command::Map(a) => cmd_map(a, out, err),
        Command::Schedule(a) => cmd_schedule(a, out),
        Command::Encode(a) => cmd_encode(a, out, err),
        Command::Validate(a) => cmd_validate(a, out),
        Command::Oracle(a) => cmd_oracle(a, out, err),
        Command::Metrics(a) => cmd_metrics(a, out),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn emit(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) => write_file(p, text),
        None => Ok(out.write_all(text.as_bytes())?),
    }
}

fn parse<T>(path: &Path, f: impl FnOnce(&str) -> Result<T, FormatError>) -> Result<T, CliError> {
    f(&read(path)?).map_err(|source| CliError::Format {
        path: path.to_path_buf(),
        source,
    })
}

fn load_inputs(i: &Inputs) -> Result<(DataflowGraph, CgraSpec), CliError> {
    let g = parse(&i.dfg, load_dfg)?;
    let mut spec = parse(&i.arch, load_arch)?;
    if let Some(t) = i.topology {
        spec = spec.with_topology(t.into());
    }
    Ok((g, spec))
}

fn seconds(s: f64, flag: &str) -> Result<Duration, CliError> {
    Duration::try_from_secs_f64(s)
        .ok()
        .filter(|d| !d.is_zero())
        .ok_or_else(|| CliError::Usage(format!("{flag} must be a positive number of seconds")))
}

fn mapping_text(g: &DataflowGraph, spec: &CgraSpec, m: &Mapping) -> Result<String, CliError> {
    let mii = compute_mii(g, spec)?.mii;
    Ok(mapping_to_json(
        m,
        Some(Metrics {
            utilization: utilization(m, spec),
            mii,
        }),
    ) + "\n")
}

fn cmd_map(a: MapArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let (g, spec) = load_inputs(&a.inputs)?;
    if a.solver == SolverKind::DimacsFile {
        return map_external(&a, &g, &spec, out, err);
    }
    if a.ii.is_some() || a.model.is_some() || a.dimacs.is_some() || a.litmap.is_some() {
        return Err(CliError::Usage(
            "--ii, --dimacs, --litmap and --model require --solver dimacs-file".into(),
        ));
    }
    let cfg = SearchConfig {
        max_ii: a.max_ii,
        per_ii_budget: a.per_ii_timeout.map(|s| seconds(s, "--per-ii-timeout")).transpose()?,
        global_budget: Some(seconds(a.timeout, "--timeout")?),
        encode: a.amo.into(),
        ra_retry_limit: a.ra_retry_limit,
    };
    let clock = StdClock::new();
    let result = match map_loop(&g, &spec, &cfg, &clock) {
        Ok(r) => r,
        Err(e) => {
            writeln!(err, "error: {e}")?;
            return Ok(1);
        }
    };
    writeln!(err, "{}", mii_line(&result.mii))?;
    for t in &result.trace {
        writeln!(err, "{}", trace_line(t))?;
    }
    match (&result.outcome, &result.mapping) {
        (MapOutcome::Mapped, Some(m)) => {
            if !result.proven_minimal() {
                writeln!(
                    err,
                    "note: some smaller intervals were not decided; II={} is an upper bound",
                    m.ii
                )?;
            }
            emit(a.output.as_deref(), &mapping_text(&g, &spec, m)?, out)?;
            Ok(0)
        }
        (o, _) => {
            writeln!(err, "no mapping: {}", o.label())?;
            Ok(1)
        }
    }
}

fn map_external(a: &MapArgs, g: &DataflowGraph, spec: &CgraSpec, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let ii =
        a.ii.ok_or_else(|| CliError::Usage("--solver dimacs-file requires --ii".into()))?;
    let enc = match build_problem(g, spec, ii, a.amo.into()) {
        Ok(e) => e,
        Err(e) => {
            writeln!(err, "II={ii}: {e}")?;
            return Ok(1);
        }
    };
    if let Some(p) = &a.dimacs {
        write_file(p, &write_dimacs(&enc.problem))?;
    }
    if let Some(p) = &a.litmap {
        write_file(p, &write_litmap(&enc.vars))?;
    }
    let Some(model_path) = &a.model else {
        if a.dimacs.is_none() {
            return Err(CliError::Usage(
                "--solver dimacs-file needs --dimacs to write the problem or --model to read a solution".into(),
            ));
        }
        writeln!(
            err,
            "wrote CNF for II={ii}; rerun with --model <file> once it is solved"
        )?;
        return Ok(0);
    };
    let text = read(model_path)?;
    let mut m = match import_external_model(&text, &enc.problem, &enc.vars) {
        Ok(m) => m,
        Err(e @ (ModelError::Unsatisfiable | ModelError::ViolatesClause(_))) => {
            writeln!(err, "{}: {e}", model_path.display())?;
            return Ok(1);
        }
        Err(e) => return Err(CliError::Usage(format!("{}: {e}", model_path.display()))),
    };
    match allocate(g, &m, spec.registers_per_pe()) {
        Ok(regs) => m.registers = regs,
        Err(f) => {
            writeln!(
                err,
                "register allocation failed on pe {}: {} values live together",
                f.pe,
                f.core.len()
            )?;
            return Ok(1);
        }
    }
    if let Err(vs) = validate(g, spec, &m) {
        for v in vs {
            writeln!(err, "{v}")?;
        }
        return Ok(1);
    }
    emit(a.output.as_deref(), &mapping_text(g, spec, &m)?, out)?;
    Ok(0)
}

fn cmd_schedule(a: ScheduleArgs, out: &mut dyn Write) -> Outcome {
    let g = parse(&a.dfg, load_dfg)?;
    let s = asap(&g)?;
    let l = alap(&g, s.len())?;
    let ms = mobility(&s, &l)?;
    write!(out, "{}", schedule_table(&s, &l, &ms))?;
    if let Some(p) = &a.arch {
        let mut spec = parse(p, load_arch)?;
        if let Some(t) = a.topology {
            spec = spec.with_topology(t.into());
        }
        writeln!(out, "{}", mii_line(&compute_mii(&g, &spec)?))?;
    }
    if let Some(ii) = a.ii {
        if ii == 0 {
            return Err(CliError::Usage("--ii must be positive".into()));
        }
        write!(out, "{}", kms_table(&build_kms(&ms, ii)?))?;
    }
    Ok(0)
}

fn cmd_encode(a: EncodeArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let (g, spec) = load_inputs(&a.inputs)?;
    if a.ii == 0 {
        return Err(CliError::Usage("--ii must be positive".into()));
    }
    let enc = match build_problem(&g, &spec, a.ii, a.amo.into()) {
        Ok(e) => e,
        Err(e @ EncodeError::Unroutable { .. }) => {
            writeln!(err, "II={}: {e}", a.ii)?;
            return Ok(1);
        }
        Err(e) => return Err(CliError::Usage(e.to_string())),
    };
    let text = write_dimacs(&enc.problem);
    match &a.dimacs {
        Some(p) => {
            write_file(p, &text)?;
            writeln!(out, "p cnf {} {}", enc.problem.num_vars, enc.problem.num_clauses())?;
        }
        None => out.write_all(text.as_bytes())?,
    }
    if let Some(p) = &a.litmap {
        write_file(p, &write_litmap(&enc.vars))?;
    }
    Ok(0)
}

fn cmd_validate(a: MappingArgs, out: &mut dyn Write) -> Outcome {
    let (g, spec) = load_inputs(&a.inputs)?;
    let m = parse(&a.mapping, load_mapping)?;
    match validate(&g, &spec, &m) {
        Ok(()) => {
            writeln!(out, "ok")?;
            Ok(0)
        }
        Err(vs) => {
            for v in vs {
                writeln!(out, "{v}")?;
            }
            Ok(1)
        }
    }
}

fn cmd_oracle(a: OracleArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let (g, spec) = load_inputs(&a.inputs)?;
    match brute_force_min_ii(&g, &spec, a.max_ii, a.allow_large) {
        Ok(Some(mut m)) => {
            m.registers = allocate(&g, &m, spec.registers_per_pe()).expect("oracle mappings pass register allocation");
            emit(a.output.as_deref(), &mapping_text(&g, &spec, &m)?, out)?;
            Ok(0)
        }
        Ok(None) => {
            writeln!(err, "no mapping up to II={}", a.max_ii)?;
            Ok(1)
        }
        Err(e @ OracleError::TooLarge { .. }) => Err(CliError::Usage(format!("{e}; pass --allow-large to run anyway"))),
        Err(OracleError::Schedule(e)) => Err(e.into()),
    }
}

fn cmd_metrics(a: MappingArgs, out: &mut dyn Write) -> Outcome {
    let (g, spec) = load_inputs(&a.inputs)?;
    let m = parse(&a.mapping, load_mapping)?;
    let mii = compute_mii(&g, &spec)?;
    writeln!(out, "ii={}", m.ii)?;
    writeln!(out, "{}", mii_line(&mii))?;
    writeln!(out, "utilization={:.3}", utilization(&m, &spec))?;
    if m.ii == 0 {
        return Ok(1);
    }
    let kms = build_kms(&mobility_schedule(&g)?, m.ii)?;
    let staged = expand_stages(&m, &kms);
    writeln!(
        out,
        "stages={} prologue={} kernel={} epilogue={}",
        kms.fold_count(),
        staged.prologue.len(),
        staged.kernel.len(),
        staged.epilogue.len()
    )?;
    Ok(0)
}

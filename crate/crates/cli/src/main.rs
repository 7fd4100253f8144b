//! `bddsat` command-line tool.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 solver failure.

mod manifest;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use bddsat::bdd::gen_bdd;
use bddsat::cnf::{parse_dimacs, parse_solver_output, CnfError};
use bddsat::data::{load_csv, one_hot_binarize, DataError, Dataset, RawTable};
use bddsat::encode::{
    decode, encode_bdd1, encode_bdd2, encode_maxsat, EncodeError, EncodingContext,
};
use bddsat::postprocess::BiasPolicy;
use bddsat::search::{
    cross_validate, evaluate, learn, min_depth, LearnConfig, LearnError, LearnedModel, Mode,
    Preselect, SolverChoice,
};
use bddsat::solve::{maxsat_solve, sat_solve, MaxSatStatus, SatStatus, SolveError, SolveOptions};
use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use manifest::RunManifest;

#[derive(Parser, Debug)]
#[command(
    name = "bddsat",
    version,
    about = "Learn optimal binary decision diagrams with SAT and MaxSAT"
)]
struct Cli {
    /// More log output (repeat for debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// One-hot binarize a CSV file.
    Binarize {
        input: PathBuf,
        #[arg(long)]
        label: String,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Write the CNF or WCNF encoding of a dataset.
    Encode {
        data: PathBuf,
        #[arg(long)]
        label: String,
        #[arg(long)]
        depth: usize,
        #[arg(long, value_enum, default_value = "bdd2")]
        model: EncodingKind,
        #[arg(short, long)]
        output: PathBuf,
        /// Variable map needed to decode a solver model later.
        #[arg(long)]
        context: PathBuf,
    },
    /// Learn a BDD of fixed depth.
    Learn {
        data: PathBuf,
        #[command(flatten)]
        opts: LearnOpts,
        #[arg(short, long)]
        output: PathBuf,
        /// Graphviz rendering of the diagram.
        #[arg(long)]
        dot: Option<PathBuf>,
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Find the smallest depth with a perfect classifier.
    Mindepth {
        data: PathBuf,
        #[arg(long)]
        label: String,
        #[arg(long, default_value_t = 1)]
        h0: usize,
        /// Bisect instead of stepping by one.
        #[arg(long)]
        bisect: bool,
        #[command(flatten)]
        solver: SolverOpts,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Accuracy of a model on a labelled CSV file.
    Evaluate {
        test: PathBuf,
        #[arg(long)]
        label: String,
        #[arg(long, conflicts_with_all = ["context", "solution"])]
        model: Option<PathBuf>,
        #[arg(long, requires = "solution")]
        context: Option<PathBuf>,
        /// Solver output (competition format) for the encoding in `--context`.
        #[arg(long, requires = "context")]
        solution: Option<PathBuf>,
    },
    /// k-fold cross-validation over several seeds.
    Cv {
        data: PathBuf,
        #[command(flatten)]
        opts: LearnOpts,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5")]
        seeds: Vec<u64>,
        /// Worker threads; all cores by default.
        #[arg(long)]
        threads: Option<usize>,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Solve a DIMACS CNF/WCNF file and print competition-format output.
    Solve {
        input: PathBuf,
        #[arg(long, default_value_t = 900.0)]
        budget: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum EncodingKind {
    Bdd1,
    Bdd2,
    Maxsat,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum ModeArg {
    Sat,
    Maxsat,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum BiasArg {
    #[value(name = "P", alias = "p")]
    P,
    #[value(name = "C", alias = "c")]
    C,
    #[value(name = "S", alias = "s")]
    S,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum PreselectArg {
    Off,
    Cart,
}

#[derive(Copy, Clone, Debug, ValueEnum, PartialEq)]
enum SolverArg {
    Embedded,
    External,
}

#[derive(Args, Debug)]
struct SolverOpts {
    #[arg(long, value_enum, default_value = "embedded")]
    solver: SolverArg,
    /// Command template for `--solver external`; `{file}` is the instance path.
    #[arg(long, env = "BDD_SOLVER_CMD")]
    solver_cmd: Option<String>,
    /// Seconds per solver call.
    #[arg(long, default_value_t = 900.0)]
    budget: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct LearnOpts {
    #[arg(long)]
    label: String,
    #[arg(long)]
    depth: usize,
    #[arg(long, value_enum, default_value = "maxsat")]
    mode: ModeArg,
    #[arg(long, value_enum, default_value = "S")]
    bias: BiasArg,
    #[arg(long, value_enum, default_value = "off")]
    preselect: PreselectArg,
    /// Depth of the preselection tree; twice `--depth` by default.
    #[arg(long)]
    cart_depth: Option<usize>,
    #[arg(long, default_value_t = 1)]
    min_leaf: usize,
    #[command(flatten)]
    solver: SolverOpts,
}

#[derive(Error, Debug)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Solver(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Solver(_) => 3,
        }
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<CnfError> for CliError {
    fn from(e: CnfError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<EncodeError> for CliError {
    fn from(e: EncodeError) -> Self {
        match e {
            EncodeError::ZeroDepth | EncodeError::DepthTooLarge(_) => {
                CliError::Usage(e.to_string())
            }
            EncodeError::CorruptModel { .. } | EncodeError::RepeatedFeature(_) => {
                CliError::Solver(e.to_string())
            }
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::BadTemplate(_) => CliError::Usage(e.to_string()),
            _ => CliError::Solver(e.to_string()),
        }
    }
}

impl From<LearnError> for CliError {
    fn from(e: LearnError) -> Self {
        match e {
            LearnError::Data(e) => e.into(),
            LearnError::Encode(e) => e.into(),
            LearnError::Solve(e) => e.into(),
            LearnError::ZeroDepth => CliError::Usage(e.to_string()),
            LearnError::Inconsistent(_)
            | LearnError::EmptyTestSet
            | LearnError::FeatureMismatch { .. } => CliError::Data(e.to_string()),
            LearnError::Bdd(_)
            | LearnError::DepthInsufficient(_)
            | LearnError::Timeout
            | LearnError::StructureUnsat => CliError::Solver(e.to_string()),
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}

/// Writes `bytes` to a temporary file next to `path`, then renames it.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io_err(path, e))?;
    tmp.write_all(bytes).map_err(|e| io_err(path, e))?;
    tmp.as_file().sync_all().map_err(|e| io_err(path, e))?;
    tmp.persist(path).map_err(|e| io_err(path, e.error))?;
    Ok(())
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn load_binarized(path: &Path, label: &str) -> Result<(RawTable, Dataset), CliError> {
    let raw = load_csv(path, label)?;
    let d = one_hot_binarize(&raw)?;
    log::info!(
        "{}: {} examples, {} binary features",
        path.display(),
        d.num_examples(),
        d.num_features()
    );
    Ok((raw, d))
}

fn budget(secs: f64) -> Result<Duration, CliError> {
    if secs.is_finite() && secs > 0.0 {
        Ok(Duration::from_secs_f64(secs))
    } else {
        Err(CliError::Usage(format!(
            "budget must be positive, got {secs}"
        )))
    }
}

fn solver_config(o: &SolverOpts, depth: usize, mode: Mode) -> Result<LearnConfig, CliError> {
    let solver = match o.solver {
        SolverArg::Embedded => SolverChoice::Embedded,
        SolverArg::External => match &o.solver_cmd {
            Some(cmd) => SolverChoice::External(cmd.clone()),
            None => {
                return Err(CliError::Usage(
                    "--solver external needs --solver-cmd or BDD_SOLVER_CMD".into(),
                ))
            }
        },
    };
    Ok(LearnConfig {
        solver,
        budget: Some(budget(o.budget)?),
        seed: o.seed,
        ..LearnConfig::new(depth, mode)
    })
}

fn learn_config(o: &LearnOpts) -> Result<LearnConfig, CliError> {
    if o.depth == 0 {
        return Err(CliError::Usage("--depth must be at least 1".into()));
    }
    let mode = match o.mode {
        ModeArg::Sat => Mode::Sat,
        ModeArg::Maxsat => Mode::MaxSat,
    };
    let mut cfg = solver_config(&o.solver, o.depth, mode)?;
    cfg.bias = match o.bias {
        BiasArg::P => BiasPolicy::P,
        BiasArg::C => BiasPolicy::C,
        BiasArg::S => BiasPolicy::S,
    };
    cfg.preselect = match o.preselect {
        PreselectArg::Off => Preselect::Off,
        PreselectArg::Cart => Preselect::Cart {
            max_depth: o.cart_depth,
            min_leaf: o.min_leaf,
        },
    };
    Ok(cfg)
}

fn print_model(m: &LearnedModel) {
    println!("depth: {}", m.depth);
    println!("ordering: [{}]", m.ordering.join(", "));
    println!("table: {}", m.table);
    println!("nodes: {}", m.metrics.nodes);
    println!(
        "train accuracy: {:.4} ({}/{})",
        m.metrics.train_accuracy,
        m.metrics.train_examples - m.metrics.train_errors,
        m.metrics.train_examples
    );
    println!("optimal: {}", m.metrics.optimal);
}

fn run(cli: Cli) -> Result<(), CliError> {
    let start = Instant::now();
    match cli.command {
        Command::Binarize {
            input,
            label,
            output,
        } => {
            let (raw, d) = load_binarized(&input, &label)?;
            let mut buf = Vec::new();
            d.write_csv(&mut buf, raw.label_name())?;
            write_atomic(&output, &buf)?;
            println!(
                "{} examples, {} features",
                d.num_examples(),
                d.num_features()
            );
        }
        Command::Encode {
            data,
            label,
            depth,
            model,
            output,
            context,
        } => {
            let (_, d) = load_binarized(&data, &label)?;
            let (f, ctx): (_, EncodingContext) = match model {
                EncodingKind::Bdd1 => encode_bdd1(&d, depth)?,
                EncodingKind::Bdd2 => encode_bdd2(&d, depth)?,
                EncodingKind::Maxsat => encode_maxsat(&d, depth)?,
            };
            let mut buf = Vec::new();
            if f.soft().is_empty() {
                f.write_dimacs_cnf(&mut buf)?;
            } else {
                f.write_dimacs_wcnf(&mut buf)?;
            }
            write_atomic(&output, &buf)?;
            write_json(&context, &ctx)?;
            println!(
                "variables: {}\nclauses: {}\nliterals: {}",
                f.var_count(),
                f.num_clauses(),
                f.literal_count()
            );
        }
        Command::Learn {
            data,
            opts,
            output,
            dot,
            manifest,
        } => {
            let cfg = learn_config(&opts)?;
            let (_, d) = load_binarized(&data, &opts.label)?;
            let m = learn(&d, &cfg)?;
            write_json(&output, &m)?;
            let mut outputs = vec![output.clone()];
            if let Some(dot) = dot {
                let names: Vec<String> = m.features.iter().map(|f| f.name.clone()).collect();
                write_atomic(&dot, m.bdd.to_dot(&names).as_bytes())?;
                outputs.push(dot);
            }
            print_model(&m);
            if let Some(path) = manifest {
                RunManifest::new("learn", &cfg, &data, start, m.stats.elapsed, outputs)?
                    .write(&path)?;
            }
        }
        Command::Mindepth {
            data,
            label,
            h0,
            bisect,
            solver,
            output,
            manifest,
        } => {
            if h0 == 0 {
                return Err(CliError::Usage("--h0 must be at least 1".into()));
            }
            let cfg = solver_config(&solver, h0, Mode::Sat)?;
            let (_, d) = load_binarized(&data, &label)?;
            let out = min_depth(&d, h0, &cfg, bisect)?;
            write_json(&output, &out.model)?;
            println!("minimum depth: {}", out.depth);
            println!("feasible depths tried: {:?}", out.sat_depths);
            println!("infeasible depths tried: {:?}", out.unsat_depths);
            print_model(&out.model);
            if let Some(path) = manifest {
                RunManifest::new(
                    "mindepth",
                    &cfg,
                    &data,
                    start,
                    start.elapsed(),
                    vec![output],
                )?
                .write(&path)?;
            }
        }
        Command::Evaluate {
            test,
            label,
            model,
            context,
            solution,
        } => {
            let raw = load_csv(&test, &label)?;
            let m = match (model, context, solution) {
                (Some(path), _, _) => {
                    let m: LearnedModel = read_json(&path)?;
                    if m.version != bddsat::search::MODEL_VERSION {
                        return Err(CliError::Data(format!(
                            "{}: unsupported model version {}",
                            path.display(),
                            m.version
                        )));
                    }
                    m
                }
                (None, Some(ctx_path), Some(sol_path)) => {
                    let ctx: EncodingContext = read_json(&ctx_path)?;
                    let text = fs::read_to_string(&sol_path).map_err(|e| io_err(&sol_path, e))?;
                    let out = parse_solver_output(&text)?;
                    let model = out.model.ok_or_else(|| {
                        CliError::Solver(format!(
                            "{}: no model in solver output",
                            sol_path.display()
                        ))
                    })?;
                    let (ordering, table) = decode(&model, &ctx)?;
                    return finish_evaluate(&raw, &ctx, ordering, table);
                }
                _ => {
                    return Err(CliError::Usage(
                        "give either --model or both --context and --solution".into(),
                    ))
                }
            };
            let d = Dataset::from_raw_with_schema(&raw, &m.features, &m.label_values)?;
            let acc = evaluate(&m, &d)?;
            println!("accuracy: {acc:.4} ({} examples)", d.num_examples());
        }
        Command::Cv {
            data,
            opts,
            k,
            seeds,
            threads,
            output,
            csv,
            manifest,
        } => {
            if k < 2 {
                return Err(CliError::Usage("--k must be at least 2".into()));
            }
            if seeds.is_empty() {
                return Err(CliError::Usage("--seeds must not be empty".into()));
            }
            let cfg = learn_config(&opts)?;
            let (_, d) = load_binarized(&data, &opts.label)?;
            let report = cross_validate(&d, &cfg, k, &seeds, threads)?;
            write_json(&output, &report)?;
            let mut buf = Vec::new();
            report.write_csv(&mut buf)?;
            write_atomic(&csv, &buf)?;
            let a = &report.aggregate;
            let fmt = |x: Option<f64>| x.map_or("n/a".to_owned(), |v| format!("{v:.4}"));
            println!("runs: {} ({} failed)", a.runs, a.failures);
            println!("train accuracy: {}", fmt(a.train_accuracy));
            println!("test accuracy: {}", fmt(a.test_accuracy));
            println!("nodes: {}", fmt(a.nodes));
            println!("literals: {}", fmt(a.literal_count));
            println!("optimal rate: {:.4}", a.optimal_rate);
            if let Some(path) = manifest {
                RunManifest::new("cv", &cfg, &data, start, start.elapsed(), vec![output, csv])?
                    .write(&path)?;
            }
        }
        Command::Solve {
            input,
            budget: secs,
            seed,
        } => {
            let text = fs::read_to_string(&input).map_err(|e| io_err(&input, e))?;
            let f = parse_dimacs(&text)?;
            let opts = SolveOptions {
                budget: Some(budget(secs)?),
                seed,
            };
            let lits = |m: &bddsat::cnf::Model| {
                let mut s = String::from("v");
                for v in 1..=f.var_count() {
                    let var = bddsat::cnf::Var::new(v);
                    let lit = if m.value(var) { v as i64 } else { -(v as i64) };
                    s.push_str(&format!(" {lit}"));
                }
                s.push_str(" 0");
                s
            };
            if f.soft().is_empty() {
                let r = sat_solve(&f, &opts);
                match r.status {
                    SatStatus::Sat => {
                        println!("s SATISFIABLE");
                        println!("{}", lits(r.model.as_ref().expect("SAT has a model")));
                    }
                    SatStatus::Unsat => println!("s UNSATISFIABLE"),
                    SatStatus::Timeout => println!("s UNKNOWN"),
                }
            } else {
                let r = maxsat_solve(&f, &opts)?;
                for c in &r.trajectory {
                    println!("o {c}");
                }
                match r.status {
                    MaxSatStatus::Optimum => println!("s OPTIMUM FOUND"),
                    MaxSatStatus::Feasible => println!("s SATISFIABLE"),
                    MaxSatStatus::HardUnsat => println!("s UNSATISFIABLE"),
                    MaxSatStatus::TimeoutNoSolution => println!("s UNKNOWN"),
                }
                if let Some(m) = &r.model {
                    println!("{}", lits(m));
                }
            }
        }
    }
    Ok(())
}

fn finish_evaluate(
    raw: &RawTable,
    ctx: &EncodingContext,
    ordering: bddsat::bdd::FeatureOrdering,
    table: bddsat::bdd::TruthTable,
) -> Result<(), CliError> {
    let d = Dataset::from_raw_with_schema(raw, &ctx.features, &ctx.label_values)?;
    if d.num_examples() == 0 {
        return Err(CliError::Data("empty test set".into()));
    }
    let bdd = gen_bdd(&table, &ordering).map_err(|e| CliError::Solver(e.to_string()))?;
    let mut correct = 0;
    for q in 0..d.num_examples() {
        if bdd
            .classify(d.row(q))
            .map_err(|e| CliError::Data(e.to_string()))?
            == d.label(q)
        {
            correct += 1;
        }
    }
    println!(
        "accuracy: {:.4} ({} examples)",
        correct as f64 / d.num_examples() as f64,
        d.num_examples()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

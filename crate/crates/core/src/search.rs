//! Orchestration: learning a BDD at a fixed depth, the minimum-depth
//! search, CART-style feature preselection, evaluation and cross-validation.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bdd::{gen_bdd, Bdd, BddError, FeatureOrdering, TruthTable};
use crate::cnf::{Formula, Model};
use crate::data::{check_consistency, kfold, DataError, Dataset, Feature};
use crate::encode::{decode, encode_bdd2, encode_maxsat, EncodeError, EncodingContext, MAX_DEPTH};
use crate::postprocess::{apply_bias, mark_unknown, BiasPolicy};
use crate::solve::{
    external_solve, maxsat_solve, sat_solve, ExternalOutcome, MaxSatResult, MaxSatStatus,
    SatResult, SatStatus, SolveError, SolveOptions, SolverStats,
};

/// Schema version written into every serialized model.
pub const MODEL_VERSION: u32 = 1;

#[derive(Error, Debug)]
pub enum LearnError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Bdd(#[from] BddError),
    #[error("depth must be at least 1")]
    ZeroDepth,
    #[error("dataset is inconsistent: {0} groups of identical examples carry both labels")]
    Inconsistent(usize),
    #[error("depth {0} insufficient: no BDD of that depth classifies every example")]
    DepthInsufficient(usize),
    #[error("solver budget exhausted before any model was found")]
    Timeout,
    #[error("MaxSAT structure constraints are unsatisfiable")]
    StructureUnsat,
    #[error("empty test set")]
    EmptyTestSet,
    #[error("feature mismatch: model expects {expected:?}, data has {found:?}")]
    FeatureMismatch {
        expected: Vec<String>,
        found: Vec<String>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Perfect classification is required.
    Sat,
    /// Training errors are minimized.
    MaxSat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preselect {
    Off,
    /// Keep the features used by a Gini tree; `max_depth` defaults to `2H`.
    Cart {
        max_depth: Option<usize>,
        min_leaf: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverChoice {
    Embedded,
    /// Shell command template containing `{file}`.
    External(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnConfig {
    pub depth: usize,
    pub mode: Mode,
    pub bias: BiasPolicy,
    pub preselect: Preselect,
    pub solver: SolverChoice,
    /// Wall-clock budget per solver call; `None` is unlimited.
    pub budget: Option<Duration>,
    pub seed: u64,
    /// Where external solvers get their instance files; a temporary
    /// directory when unset.
    #[serde(default)]
    pub workdir: Option<PathBuf>,
}

impl LearnConfig {
    pub fn new(depth: usize, mode: Mode) -> Self {
        LearnConfig {
            depth,
            mode,
            bias: BiasPolicy::S,
            preselect: Preselect::Off,
            solver: SolverChoice::Embedded,
            budget: Some(crate::solve::DEFAULT_BUDGET),
            seed: 0,
            workdir: None,
        }
    }

    fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            budget: self.budget,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMetrics {
    pub train_accuracy: f64,
    pub train_errors: usize,
    pub train_examples: usize,
    /// The solver proved its answer optimal (always true in SAT mode).
    pub optimal: bool,
    pub nodes: usize,
    pub literal_count: usize,
    pub num_vars: u32,
    pub num_clauses: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnedModel {
    pub version: u32,
    #[serde(rename = "H")]
    pub depth: usize,
    pub mode: Mode,
    pub bias: BiasPolicy,
    /// Names of the features at levels `1..=H`.
    pub ordering: Vec<String>,
    /// The same ordering as indices into `features`.
    pub ordering_index: FeatureOrdering,
    /// Truth table after the bias was applied.
    pub table: String,
    /// Truth table as returned by the solver.
    pub solver_table: String,
    pub bdd: Bdd,
    /// Feature schema of the training data.
    pub features: Vec<Feature>,
    pub label_values: [String; 2],
    /// Columns kept by preselection, as indices into `features`.
    pub selected_features: Vec<usize>,
    pub metrics: ModelMetrics,
    pub stats: SolverStats,
}

impl LearnedModel {
    pub fn table(&self) -> TruthTable {
        TruthTable::new(self.table.clone()).expect("serialized table is valid")
    }

    pub fn predict(&self, example: &[bool]) -> Result<bool, BddError> {
        self.bdd.classify(example)
    }

    /// Rebuilds a model from a decoded solver answer.
    #[allow(clippy::too_many_arguments)]
    fn assemble(
        d: &Dataset,
        cfg: &LearnConfig,
        ordering: FeatureOrdering,
        solver_table: TruthTable,
        selected: Vec<usize>,
        optimal: bool,
        formula: Option<&Formula>,
        stats: SolverStats,
    ) -> Result<LearnedModel, LearnError> {
        let ext = mark_unknown(&solver_table, &ordering, d);
        let table = apply_bias(&ext, &ordering, cfg.bias);
        let bdd = gen_bdd(&table, &ordering)?;
        let classifier = bdd.classifier()?;
        let mut errors = 0;
        for q in 0..d.num_examples() {
            if classifier.classify(d.row(q))? != d.label(q) {
                errors += 1;
            }
        }
        let m = d.num_examples();
        let metrics = ModelMetrics {
            train_accuracy: if m == 0 {
                1.0
            } else {
                (m - errors) as f64 / m as f64
            },
            train_errors: errors,
            train_examples: m,
            optimal,
            nodes: bdd.node_count(),
            literal_count: formula.map_or(0, Formula::literal_count),
            num_vars: formula.map_or(0, Formula::var_count),
            num_clauses: formula.map_or(0, Formula::num_clauses),
        };
        Ok(LearnedModel {
            version: MODEL_VERSION,
            depth: ordering.len(),
            mode: cfg.mode,
            bias: cfg.bias,
            ordering: ordering
                .features()
                .iter()
                .map(|&r| d.features()[r].name.clone())
                .collect(),
            ordering_index: ordering,
            table: table.as_str().to_owned(),
            solver_table: solver_table.as_str().to_owned(),
            bdd,
            features: d.features().to_vec(),
            label_values: d.label_values().clone(),
            selected_features: selected,
            metrics,
            stats,
        })
    }

    /// A diagram that is a single sink.
    fn constant(d: &Dataset, cfg: &LearnConfig, value: bool) -> Result<LearnedModel, LearnError> {
        Self::assemble(
            d,
            cfg,
            FeatureOrdering::empty(),
            TruthTable::constant(value),
            Vec::new(),
            true,
            None,
            SolverStats::default(),
        )
    }
}

enum Answer {
    Found {
        model: Model,
        optimal: bool,
        stats: SolverStats,
    },
    Unsat,
}

fn run_solver(f: &Formula, cfg: &LearnConfig) -> Result<Answer, LearnError> {
    let opts = cfg.solve_options();
    let (sat, maxsat): (Option<SatResult>, Option<MaxSatResult>) = match &cfg.solver {
        SolverChoice::Embedded => match cfg.mode {
            Mode::Sat => (Some(sat_solve(f, &opts)), None),
            Mode::MaxSat => (None, Some(maxsat_solve(f, &opts)?)),
        },
        SolverChoice::External(cmd) => {
            let tmp;
            let dir = match &cfg.workdir {
                Some(dir) => dir.as_path(),
                None => {
                    tmp = tempfile::tempdir().map_err(SolveError::Io)?;
                    tmp.path()
                }
            };
            match external_solve(f, cmd, dir, &opts)? {
                ExternalOutcome::Sat(r) => (Some(r), None),
                ExternalOutcome::MaxSat(r) => (None, Some(r)),
            }
        }
    };
    if let Some(r) = sat {
        return match r.status {
            SatStatus::Sat => Ok(Answer::Found {
                model: r.model.expect("SAT carries a model"),
                optimal: true,
                stats: r.stats,
            }),
            SatStatus::Unsat => Ok(Answer::Unsat),
            SatStatus::Timeout => Err(LearnError::Timeout),
        };
    }
    let r = maxsat.expect("one of the two outcomes is set");
    match r.status {
        MaxSatStatus::Optimum | MaxSatStatus::Feasible => Ok(Answer::Found {
            model: r.model.expect("a cost implies a model"),
            optimal: r.optimal,
            stats: r.stats,
        }),
        MaxSatStatus::TimeoutNoSolution => Err(LearnError::Timeout),
        MaxSatStatus::HardUnsat => Err(LearnError::StructureUnsat),
    }
}

fn majority(d: &Dataset) -> bool {
    2 * d.count_positive() > d.num_examples()
}

/// Learns a BDD of depth `cfg.depth` (fewer when fewer features remain).
pub fn learn(d: &Dataset, cfg: &LearnConfig) -> Result<LearnedModel, LearnError> {
    if cfg.depth == 0 {
        return Err(LearnError::ZeroDepth);
    }
    if cfg.mode == Mode::Sat {
        let conflicts = check_consistency(d);
        if !conflicts.is_empty() {
            return Err(LearnError::Inconsistent(conflicts.len()));
        }
    }
    if let Some(v) = d.single_class() {
        return LearnedModel::constant(d, cfg, v);
    }
    if d.num_examples() == 0 {
        return LearnedModel::constant(d, cfg, false);
    }
    let selected: Vec<usize> = match cfg.preselect {
        Preselect::Off => (0..d.num_features()).collect(),
        Preselect::Cart {
            max_depth,
            min_leaf,
        } => {
            let s = preselect_features(d, max_depth.unwrap_or(2 * cfg.depth), min_leaf);
            if s.is_empty() {
                (0..d.num_features()).collect()
            } else {
                s
            }
        }
    };
    let depth = cfg.depth.min(selected.len()).min(MAX_DEPTH);
    if depth == 0 {
        return LearnedModel::constant(d, cfg, majority(d));
    }
    if depth < cfg.depth {
        log::info!(
            "only {} features available; learning at depth {depth}",
            selected.len()
        );
    }
    let sub = d.select_features(&selected);
    let (formula, ctx): (Formula, EncodingContext) = match cfg.mode {
        Mode::Sat => encode_bdd2(&sub, depth)?,
        Mode::MaxSat => encode_maxsat(&sub, depth)?,
    };
    log::debug!(
        "depth {depth}: {} vars, {} clauses, {} literals",
        formula.var_count(),
        formula.num_clauses(),
        formula.literal_count()
    );
    match run_solver(&formula, cfg)? {
        Answer::Unsat => Err(LearnError::DepthInsufficient(depth)),
        Answer::Found {
            model,
            optimal,
            stats,
        } => {
            let (sub_ordering, table) = decode(&model, &ctx)?;
            let ordering = sub_ordering.remap(&selected);
            LearnedModel::assemble(
                d,
                cfg,
                ordering,
                table,
                selected,
                optimal,
                Some(&formula),
                stats,
            )
        }
    }
}

/// Accuracy of `m` on `test`, whose features must match the training schema.
pub fn evaluate(m: &LearnedModel, test: &Dataset) -> Result<f64, LearnError> {
    if test.features() != m.features.as_slice() {
        return Err(LearnError::FeatureMismatch {
            expected: m.features.iter().map(|f| f.name.clone()).collect(),
            found: test
                .feature_names()
                .into_iter()
                .map(str::to_owned)
                .collect(),
        });
    }
    if test.num_examples() == 0 {
        return Err(LearnError::EmptyTestSet);
    }
    let classifier = m.bdd.classifier()?;
    let mut correct = 0;
    for q in 0..test.num_examples() {
        if classifier.classify(test.row(q))? == test.label(q) {
            correct += 1;
        }
    }
    Ok(correct as f64 / test.num_examples() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinDepthOutcome {
    /// Smallest depth admitting a perfect classifier.
    pub depth: usize,
    /// Witness at `depth`.
    pub model: LearnedModel,
    /// Depths proven infeasible by the solver; contains `depth - 1` unless
    /// `depth ≤ 1`, where smaller depths are infeasible without a solver call.
    pub unsat_depths: Vec<usize>,
    /// Depths found feasible.
    pub sat_depths: Vec<usize>,
}

/// Smallest depth at which some BDD classifies every example, found by
/// stepping one depth at a time from `h0` (or by bisection).
///
/// `cfg.mode` is ignored; SAT mode is always used. `cfg.depth` is ignored
/// in favour of `h0`.
pub fn min_depth(
    d: &Dataset,
    h0: usize,
    cfg: &LearnConfig,
    bisect: bool,
) -> Result<MinDepthOutcome, LearnError> {
    if h0 == 0 {
        return Err(LearnError::ZeroDepth);
    }
    let conflicts = check_consistency(d);
    if !conflicts.is_empty() {
        return Err(LearnError::Inconsistent(conflicts.len()));
    }
    let mut cfg = cfg.clone();
    cfg.mode = Mode::Sat;
    cfg.preselect = Preselect::Off;
    if d.single_class().is_some() || d.num_examples() == 0 {
        cfg.depth = 1;
        let model = learn(d, &cfg)?;
        return Ok(MinDepthOutcome {
            depth: 0,
            model,
            unsat_depths: Vec::new(),
            sat_depths: vec![0],
        });
    }
    let top = d.num_features().min(MAX_DEPTH);
    let mut sat_depths = Vec::new();
    let mut unsat_depths = Vec::new();
    let mut best: Option<LearnedModel> = None;
    let mut probe = |h: usize, best: &mut Option<LearnedModel>| -> Result<bool, LearnError> {
        cfg.depth = h;
        match learn(d, &cfg) {
            Ok(m) => {
                sat_depths.push(h);
                if best.as_ref().is_none_or(|b| b.depth > h) {
                    *best = Some(m);
                }
                Ok(true)
            }
            Err(LearnError::DepthInsufficient(_)) => {
                unsat_depths.push(h);
                Ok(false)
            }
            Err(e) => Err(e),
        }
    };
    if bisect {
        // Invariant: depths ≤ lo are infeasible, hi is feasible.
        let (mut lo, mut hi) = (0, top);
        let feasible = probe(hi, &mut best)?;
        assert!(
            feasible,
            "consistent data must be separable with all {top} features"
        );
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if probe(mid, &mut best)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    } else {
        let mut h = h0.min(top);
        if probe(h, &mut best)? {
            while h > 1 && probe(h - 1, &mut best)? {
                h -= 1;
            }
        } else {
            loop {
                assert!(
                    h < top,
                    "consistent data must be separable with all {top} features"
                );
                h += 1;
                if probe(h, &mut best)? {
                    break;
                }
            }
        }
    }
    let model = best.expect("some depth is feasible");
    Ok(MinDepthOutcome {
        depth: model.depth,
        model,
        unsat_depths,
        sat_depths,
    })
}

fn gini(pos: usize, total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let p = pos as f64 / total as f64;
    2.0 * p * (1.0 - p)
}

fn grow(
    d: &Dataset,
    rows: &[usize],
    depth: usize,
    max_depth: usize,
    min_leaf: usize,
    used: &mut Vec<usize>,
) {
    let pos = rows.iter().filter(|&&q| d.label(q)).count();
    if depth >= max_depth || pos == 0 || pos == rows.len() || rows.len() < min_leaf.max(2) {
        return;
    }
    let mut best: Option<(f64, usize)> = None;
    for r in 0..d.num_features() {
        let (mut n1, mut p1) = (0, 0);
        for &q in rows {
            if d.value(q, r) {
                n1 += 1;
                p1 += usize::from(d.label(q));
            }
        }
        let n0 = rows.len() - n1;
        if n1 < min_leaf.max(1) || n0 < min_leaf.max(1) {
            continue;
        }
        let score = n1 as f64 * gini(p1, n1) + n0 as f64 * gini(pos - p1, n0);
        if best.is_none_or(|(s, _)| score < s - 1e-12) {
            best = Some((score, r));
        }
    }
    let Some((_, r)) = best else { return };
    if !used.contains(&r) {
        used.push(r);
    }
    let (ones, zeros): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&q| d.value(q, r));
    grow(d, &zeros, depth + 1, max_depth, min_leaf, used);
    grow(d, &ones, depth + 1, max_depth, min_leaf, used);
}

/// Features tested anywhere in a greedy Gini tree of depth ≤ `max_depth`
/// whose leaves hold at least `min_leaf` examples. Ties go to the lowest
/// feature index. Sorted ascending.
pub fn preselect_features(d: &Dataset, max_depth: usize, min_leaf: usize) -> Vec<usize> {
    let rows: Vec<usize> = (0..d.num_examples()).collect();
    let mut used = Vec::new();
    grow(d, &rows, 0, max_depth, min_leaf, &mut used);
    used.sort_unstable();
    used
}

/// One learn/evaluate run of a cross-validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvRun {
    pub seed: u64,
    pub fold: usize,
    pub train_accuracy: Option<f64>,
    pub test_accuracy: Option<f64>,
    pub nodes: Option<usize>,
    pub literal_count: Option<usize>,
    pub seconds: f64,
    pub optimal: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvAggregate {
    pub runs: usize,
    pub failures: usize,
    /// Means over successful runs; `None` when every run failed.
    pub train_accuracy: Option<f64>,
    pub test_accuracy: Option<f64>,
    pub nodes: Option<f64>,
    pub literal_count: Option<f64>,
    pub seconds: f64,
    /// Fraction of all runs whose solver proved optimality.
    pub optimal_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub config: LearnConfig,
    pub k: usize,
    pub seeds: Vec<u64>,
    pub runs: Vec<CvRun>,
    pub aggregate: CvAggregate,
}

impl CvReport {
    /// One row per run: `Seed, Fold, Train, Test, Size, E_Size, Time, Opt`.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<(), DataError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "Seed", "Fold", "Train", "Test", "Size", "E_Size", "Time", "Opt",
        ])?;
        let opt = |x: Option<String>| x.unwrap_or_default();
        for r in &self.runs {
            w.write_record([
                r.seed.to_string(),
                r.fold.to_string(),
                opt(r.train_accuracy.map(|a| format!("{a:.4}"))),
                opt(r.test_accuracy.map(|a| format!("{a:.4}"))),
                opt(r.nodes.map(|n| n.to_string())),
                opt(r.literal_count.map(|n| n.to_string())),
                format!("{:.3}", r.seconds),
                u8::from(r.optimal).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Solver seed of one fold, derived from the split seed.
pub fn fold_seed(seed: u64, fold: usize) -> u64 {
    let mut x = seed
        ^ (fold as u64)
            .wrapping_add(1)
            .wrapping_mul(0x9E37_79B9_7F4A_7C15);
    x ^= x >> 31;
    x = x.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x ^ (x >> 29)
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// `k`-fold cross-validation repeated for every seed. Runs execute on a
/// pool of `threads` workers (all cores when `None`); a failing run is
/// recorded with its error and excluded from the means.
pub fn cross_validate(
    d: &Dataset,
    cfg: &LearnConfig,
    k: usize,
    seeds: &[u64],
    threads: Option<usize>,
) -> Result<CvReport, LearnError> {
    let mut jobs = Vec::new();
    for &seed in seeds {
        for (fold, split) in kfold(d, k, seed)?.into_iter().enumerate() {
            jobs.push((seed, fold, split));
        }
    }
    let run_one = |(seed, fold, split): &(u64, usize, crate::data::Split)| -> CvRun {
        let start = Instant::now();
        let mut c = cfg.clone();
        c.seed = fold_seed(*seed, *fold);
        let train = d.select_rows(&split.train);
        let test = d.select_rows(&split.test);
        let outcome = learn(&train, &c).and_then(|m| {
            let acc = evaluate(&m, &test)?;
            Ok((m, acc))
        });
        let seconds = start.elapsed().as_secs_f64();
        match outcome {
            Ok((m, acc)) => CvRun {
                seed: *seed,
                fold: *fold,
                train_accuracy: Some(m.metrics.train_accuracy),
                test_accuracy: Some(acc),
                nodes: Some(m.metrics.nodes),
                literal_count: Some(m.metrics.literal_count),
                seconds,
                optimal: m.metrics.optimal,
                error: None,
            },
            Err(e) => {
                log::warn!("seed {seed}, fold {fold}: {e}");
                CvRun {
                    seed: *seed,
                    fold: *fold,
                    train_accuracy: None,
                    test_accuracy: None,
                    nodes: None,
                    literal_count: None,
                    seconds,
                    optimal: false,
                    error: Some(e.to_string()),
                }
            }
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| SolveError::Integration(format!("thread pool: {e}")))?;
    let runs: Vec<CvRun> = pool.install(|| jobs.par_iter().map(run_one).collect());
    let ok: Vec<&CvRun> = runs.iter().filter(|r| r.error.is_none()).collect();
    let aggregate = CvAggregate {
        runs: runs.len(),
        failures: runs.len() - ok.len(),
        train_accuracy: mean(ok.iter().filter_map(|r| r.train_accuracy)),
        test_accuracy: mean(ok.iter().filter_map(|r| r.test_accuracy)),
        nodes: mean(ok.iter().filter_map(|r| r.nodes.map(|n| n as f64))),
        literal_count: mean(ok.iter().filter_map(|r| r.literal_count.map(|n| n as f64))),
        seconds: mean(runs.iter().map(|r| r.seconds)).unwrap_or(0.0),
        optimal_rate: if runs.is_empty() {
            0.0
        } else {
            runs.iter().filter(|r| r.optimal).count() as f64 / runs.len() as f64
        },
    };
    Ok(CvReport {
        config: cfg.clone(),
        k,
        seeds: seeds.to_vec(),
        runs,
        aggregate,
    })
}

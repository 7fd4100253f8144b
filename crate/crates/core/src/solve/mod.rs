//! Solving: an embedded CDCL SAT solver, a linear-search MaxSAT procedure
//! on top of it, and a bridge to external DIMACS solvers.

mod cdcl;
mod external;
mod maxsat;

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cnf::{Formula, Model};

pub use cdcl::{Solver, Status};
pub use external::{external_solve, ExternalOutcome};
pub use maxsat::maxsat_solve;

/// Default wall-clock budget per solver invocation: 15 minutes.
pub const DEFAULT_BUDGET: Duration = Duration::from_secs(900);

#[derive(Error, Debug)]
pub enum SolveError {
    #[error("soft clause {index} has weight {weight}; only unit weights are supported")]
    WeightedSoft { index: usize, weight: u64 },
    #[error("solver command template must contain \"{{file}}\": {0:?}")]
    BadTemplate(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("DIMACS error: {0}")]
    Cnf(#[from] crate::cnf::CnfError),
    #[error("solver integration error: {0}")]
    Integration(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveOptions {
    /// Wall-clock limit; `None` runs to completion.
    pub budget: Option<Duration>,
    pub seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            budget: Some(DEFAULT_BUDGET),
            seed: 0,
        }
    }
}

impl SolveOptions {
    pub fn with_budget(budget: Duration) -> Self {
        SolveOptions {
            budget: Some(budget),
            ..Self::default()
        }
    }

    pub(crate) fn deadline(&self, start: Instant) -> Option<Instant> {
        self.budget.map(|b| start + b)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    pub conflicts: u64,
    pub decisions: u64,
    pub propagations: u64,
    pub restarts: u64,
    pub reductions: u64,
    /// Number of SAT calls (MaxSAT descent steps count one each).
    pub sat_calls: u64,
    /// Wall-clock time; not serialized, so that saved results are reproducible.
    #[serde(skip)]
    pub elapsed: Duration,
}

impl SolverStats {
    /// Same counters, ignoring wall-clock time.
    pub fn same_work(&self, other: &SolverStats) -> bool {
        (
            self.conflicts,
            self.decisions,
            self.propagations,
            self.restarts,
            self.reductions,
            self.sat_calls,
        ) == (
            other.conflicts,
            other.decisions,
            other.propagations,
            other.restarts,
            other.reductions,
            other.sat_calls,
        )
    }

    pub(crate) fn absorb(&mut self, other: &SolverStats) {
        self.conflicts += other.conflicts;
        self.decisions += other.decisions;
        self.propagations += other.propagations;
        self.restarts += other.restarts;
        self.reductions += other.reductions;
        self.sat_calls += other.sat_calls;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SatStatus {
    Sat,
    Unsat,
    Timeout,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SatResult {
    pub status: SatStatus,
    /// Present iff `status` is `Sat`; satisfies every hard clause.
    pub model: Option<Model>,
    pub stats: SolverStats,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MaxSatStatus {
    /// Cost proven minimal.
    Optimum,
    /// A model was found but the budget ran out before optimality was proven.
    Feasible,
    /// The budget ran out before any model was found.
    TimeoutNoSolution,
    /// The hard clauses alone are unsatisfiable.
    HardUnsat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxSatResult {
    pub status: MaxSatStatus,
    pub model: Option<Model>,
    /// Total weight of falsified soft clauses under `model`.
    pub cost: Option<u64>,
    pub optimal: bool,
    /// Cost after each improving SAT call.
    pub trajectory: Vec<u64>,
    pub stats: SolverStats,
}

/// Panics unless `model` satisfies every hard clause of `f`. Any failure
/// is a solver bug, never a property of the input.
pub(crate) fn assert_model(f: &Formula, model: &Model) {
    if let Some(i) = f.first_falsified_hard(model) {
        panic!(
            "solver returned a model falsifying hard clause {i}: {:?}",
            f.hard()[i]
        );
    }
}

/// Solves the hard clauses of `f` with the embedded CDCL solver.
pub fn sat_solve(f: &Formula, opts: &SolveOptions) -> SatResult {
    let start = Instant::now();
    if !f.soft().is_empty() {
        log::warn!("sat_solve ignores {} soft clauses", f.soft().len());
    }
    let mut solver = Solver::new(opts.seed);
    solver.reserve_vars(f.var_count() as usize);
    let mut ok = !f.is_trivially_unsat();
    for c in f.hard() {
        if !ok {
            break;
        }
        ok = solver.add_clause(c);
    }
    let status = if ok {
        solver.solve(opts.deadline(start))
    } else {
        Status::Unsat
    };
    let mut stats = solver.stats.clone();
    stats.sat_calls = 1;
    stats.elapsed = start.elapsed();
    match status {
        Status::Sat => {
            let model = solver.model(f.var_count() as usize);
            assert_model(f, &model);
            SatResult {
                status: SatStatus::Sat,
                model: Some(model),
                stats,
            }
        }
        Status::Unsat => SatResult {
            status: SatStatus::Unsat,
            model: None,
            stats,
        },
        Status::Unknown => SatResult {
            status: SatStatus::Timeout,
            model: None,
            stats,
        },
    }
}

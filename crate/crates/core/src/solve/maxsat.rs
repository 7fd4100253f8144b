//! Linear UNSAT-driven descent for unit-weight partial MaxSAT.
//!
//! Every soft clause `C` is relaxed to `C ∨ b`. After a first model of cost
//! `u`, a sequential counter over the `b` variables is added once, and each
//! step asserts "fewer than `u` relaxations" with a single unit clause on
//! the counter's output, so the solver keeps its learnt clauses between
//! steps. The last SAT model before UNSAT is optimal.

use std::time::Instant;

use super::{assert_model, MaxSatResult, MaxSatStatus, SolveError, SolveOptions, Solver, Status};
use crate::cnf::{Formula, Lit, Model};

pub fn maxsat_solve(f: &Formula, opts: &SolveOptions) -> Result<MaxSatResult, SolveError> {
    if let Some((index, (_, weight))) = f.soft().iter().enumerate().find(|(_, (_, w))| *w != 1) {
        return Err(SolveError::WeightedSoft {
            index,
            weight: *weight,
        });
    }
    let start = Instant::now();
    let deadline = opts.deadline(start);
    let n = f.var_count();
    let mut result = MaxSatResult {
        status: MaxSatStatus::HardUnsat,
        model: None,
        cost: None,
        optimal: false,
        trajectory: Vec::new(),
        stats: Default::default(),
    };
    if f.is_trivially_unsat() {
        result.stats.elapsed = start.elapsed();
        return Ok(result);
    }

    let mut scratch = Formula::with_vars(n);
    let relax: Vec<Lit> = scratch
        .fresh_vars(f.soft().len())
        .into_iter()
        .map(|v| v.pos())
        .collect();
    let mut solver = Solver::new(opts.seed);
    solver.reserve_vars(scratch.var_count() as usize);
    let mut ok = true;
    for c in f.hard() {
        ok &= solver.add_clause(c);
    }
    for ((c, _), &b) in f.soft().iter().zip(&relax) {
        let mut relaxed = c.clone();
        relaxed.push(b);
        ok &= solver.add_clause(&relaxed);
    }

    let call = |solver: &mut Solver, stats: &mut super::SolverStats| {
        let status = if ok {
            solver.solve(deadline)
        } else {
            Status::Unsat
        };
        stats.sat_calls += 1;
        status
    };

    let mut best: Option<(Model, u64)> = None;
    let mut outputs: Vec<Lit> = Vec::new();
    loop {
        let status = call(&mut solver, &mut result.stats);
        match status {
            Status::Sat => {
                let model = solver.model(n as usize);
                assert_model(f, &model);
                let cost = f.soft_cost(&model);
                debug_assert!(best.as_ref().is_none_or(|(_, c)| cost < *c));
                result.trajectory.push(cost);
                let first = best.is_none();
                best = Some((model, cost));
                if cost == 0 {
                    result.status = MaxSatStatus::Optimum;
                    break;
                }
                if first {
                    let regs = scratch.counter(&relax, cost as usize);
                    outputs = regs
                        .last()
                        .expect("at least one soft clause")
                        .iter()
                        .map(|v| v.pos())
                        .collect();
                    solver.reserve_vars(scratch.var_count() as usize);
                    for c in scratch.hard() {
                        solver.add_clause(c);
                    }
                }
                // At most cost − 1 relaxed clauses.
                solver.add_clause(&[!outputs[cost as usize - 1]]);
            }
            Status::Unsat => {
                result.status = if best.is_some() {
                    MaxSatStatus::Optimum
                } else {
                    MaxSatStatus::HardUnsat
                };
                break;
            }
            Status::Unknown => {
                result.status = if best.is_some() {
                    MaxSatStatus::Feasible
                } else {
                    MaxSatStatus::TimeoutNoSolution
                };
                break;
            }
        }
    }
    let solver_stats = solver.stats.clone();
    result.stats.absorb(&solver_stats);
    result.stats.elapsed = start.elapsed();
    result.optimal = result.status == MaxSatStatus::Optimum;
    if let Some((model, cost)) = best {
        result.model = Some(model);
        result.cost = Some(cost);
    }
    Ok(result)
}

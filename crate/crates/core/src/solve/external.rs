//! Running an external DIMACS solver through a shell command template.
//!
//! The template must contain `{file}`, which is replaced by the path of the
//! written instance (`instance.cnf` for pure SAT, `instance.wcnf` when soft
//! clauses are present). Output is read in competition format.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;
use std::process::{Command, Stdio};
use std::sync::mpsc;
use std::thread;
use std::time::{Duration, Instant};

use super::{
    MaxSatResult, MaxSatStatus, SatResult, SatStatus, SolveError, SolveOptions, SolverStats,
};
use crate::cnf::{parse_solver_output, Formula, Model, ReportedStatus};

#[derive(Debug, Clone, PartialEq)]
pub enum ExternalOutcome {
    Sat(SatResult),
    MaxSat(MaxSatResult),
}

struct RunOutput {
    stdout: String,
    exit_code: Option<i32>,
    timed_out: bool,
}

fn quote(path: &Path) -> String {
    format!("'{}'", path.display().to_string().replace('\'', r"'\''"))
}

fn kill_group(pid: u32) {
    let _ = Command::new("kill")
        .arg("-KILL")
        .arg("--")
        .arg(format!("-{pid}"))
        .stderr(Stdio::null())
        .status();
}

fn run(command: &str, deadline: Option<Instant>) -> Result<RunOutput, SolveError> {
    use std::os::unix::process::CommandExt;
    let mut child = Command::new("sh")
        .arg("-c")
        .arg(command)
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .process_group(0)
        .spawn()?;
    let mut pipe = child.stdout.take().expect("stdout is piped");
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        let mut buf = String::new();
        let r = pipe.read_to_string(&mut buf).map(|_| buf);
        let _ = tx.send(r);
    });
    let mut timed_out = false;
    let status = loop {
        if let Some(status) = child.try_wait()? {
            break Some(status);
        }
        if deadline.is_some_and(|d| Instant::now() >= d) {
            kill_group(child.id());
            let _ = child.kill();
            let _ = child.wait();
            timed_out = true;
            break None;
        }
        thread::sleep(Duration::from_millis(5));
    };
    let stdout = if timed_out {
        rx.recv_timeout(Duration::from_millis(200))
            .ok()
            .and_then(Result::ok)
            .unwrap_or_default()
    } else {
        rx.recv()
            .map_err(|_| SolveError::Integration("output reader vanished".into()))??
    };
    Ok(RunOutput {
        stdout,
        exit_code: status.and_then(|s| s.code()),
        timed_out,
    })
}

fn check_model(f: &Formula, model: &Model) -> Result<Model, SolveError> {
    let model = model.truncated(f.var_count());
    if let Some(i) = f.first_falsified_hard(&model) {
        return Err(SolveError::Integration(format!(
            "reported model falsifies hard clause {i}"
        )));
    }
    Ok(model)
}

/// Writes `f` into `workdir`, runs the command and validates its answer.
pub fn external_solve(
    f: &Formula,
    cmd_template: &str,
    workdir: &Path,
    opts: &SolveOptions,
) -> Result<ExternalOutcome, SolveError> {
    if !cmd_template.contains("{file}") {
        return Err(SolveError::BadTemplate(cmd_template.to_owned()));
    }
    let start = Instant::now();
    let weighted = !f.soft().is_empty();
    let path = workdir.join(if weighted {
        "instance.wcnf"
    } else {
        "instance.cnf"
    });
    {
        let mut out = BufWriter::new(File::create(&path)?);
        if weighted {
            f.write_dimacs_wcnf(&mut out)?;
        } else {
            f.write_dimacs_cnf(&mut out)?;
        }
        out.flush()?;
    }
    let command = cmd_template.replace("{file}", &quote(&path));
    log::debug!("running external solver: {command}");
    let out = run(&command, opts.deadline(start))?;
    let stats = SolverStats {
        sat_calls: 1,
        elapsed: start.elapsed(),
        ..Default::default()
    };

    let parsed = if out.timed_out {
        parse_solver_output(&out.stdout).unwrap_or(crate::cnf::SolverOutput {
            status: None,
            cost: None,
            model: None,
        })
    } else {
        parse_solver_output(&out.stdout)
            .map_err(|e| SolveError::Integration(format!("unparseable solver output: {e}")))?
    };
    let status = parsed.status.or(match out.exit_code {
        Some(10) => Some(ReportedStatus::Satisfiable),
        Some(20) => Some(ReportedStatus::Unsatisfiable),
        _ => None,
    });
    if status.is_none() && !out.timed_out {
        return Err(SolveError::Integration(format!(
            "no status line in solver output (exit code {:?})",
            out.exit_code
        )));
    }

    if !weighted {
        let result = match status {
            Some(ReportedStatus::Satisfiable) | Some(ReportedStatus::OptimumFound) => {
                let model = parsed
                    .model
                    .as_ref()
                    .ok_or_else(|| SolveError::Integration("satisfiable without a model".into()))?;
                SatResult {
                    status: SatStatus::Sat,
                    model: Some(check_model(f, model)?),
                    stats,
                }
            }
            Some(ReportedStatus::Unsatisfiable) => SatResult {
                status: SatStatus::Unsat,
                model: None,
                stats,
            },
            Some(ReportedStatus::Unknown) | None => SatResult {
                status: SatStatus::Timeout,
                model: None,
                stats,
            },
        };
        return Ok(ExternalOutcome::Sat(result));
    }

    let model = match &parsed.model {
        Some(m) => Some(check_model(f, m)?),
        None => None,
    };
    let cost = model.as_ref().map(|m| f.soft_cost(m));
    if let (Some(reported), Some(actual)) = (parsed.cost, cost) {
        if reported != actual {
            return Err(SolveError::Integration(format!(
                "reported cost {reported} but the model falsifies soft weight {actual}"
            )));
        }
    }
    let status = match (status, &model) {
        (Some(ReportedStatus::Unsatisfiable), _) => MaxSatStatus::HardUnsat,
        (Some(ReportedStatus::OptimumFound), Some(_)) => MaxSatStatus::Optimum,
        (Some(ReportedStatus::OptimumFound), None) => {
            return Err(SolveError::Integration(
                "optimum reported without a model".into(),
            ))
        }
        (_, Some(_)) => MaxSatStatus::Feasible,
        (_, None) => MaxSatStatus::TimeoutNoSolution,
    };
    Ok(ExternalOutcome::MaxSat(MaxSatResult {
        status,
        optimal: status == MaxSatStatus::Optimum,
        trajectory: cost.into_iter().collect(),
        model,
        cost,
        stats,
    }))
}

//! CNF / WCNF formulas, the sequential-counter cardinality encoding and
//! DIMACS input/output.

use std::fmt;
use std::io::{self, Write};
use std::ops::Not;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A Boolean variable, numbered from 1 as in DIMACS.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Var(u32);

impl Var {
    pub fn new(id: u32) -> Self {
        assert!(id >= 1, "variables are numbered from 1");
        Var(id)
    }

    pub fn id(self) -> u32 {
        self.0
    }

    /// 0-based index, for dense per-variable arrays.
    pub fn index(self) -> usize {
        (self.0 - 1) as usize
    }

    pub fn pos(self) -> Lit {
        Lit(self.0 as i32)
    }

    pub fn neg(self) -> Lit {
        Lit(-(self.0 as i32))
    }

    /// Literal that is true iff the variable takes `value`.
    pub fn lit(self, value: bool) -> Lit {
        if value {
            self.pos()
        } else {
            self.neg()
        }
    }
}

/// A literal in DIMACS form: the variable id, negative when negated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Lit(i32);

impl Lit {
    pub fn from_dimacs(x: i32) -> Self {
        assert!(x != 0, "0 is not a literal");
        Lit(x)
    }

    pub fn var(self) -> Var {
        Var(self.0.unsigned_abs())
    }

    pub fn is_negated(self) -> bool {
        self.0 < 0
    }

    pub fn to_dimacs(self) -> i32 {
        self.0
    }

    /// Truth value of the literal under `model`.
    pub fn eval(self, model: &Model) -> bool {
        model.value(self.var()) != self.is_negated()
    }
}

impl Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(-self.0)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub type Clause = Vec<Lit>;

/// A total assignment. Variables beyond the stored range read as false.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Model {
    values: Vec<bool>,
}

impl Model {
    pub fn new(values: Vec<bool>) -> Self {
        Model { values }
    }

    pub fn value(&self, v: Var) -> bool {
        self.values.get(v.index()).copied().unwrap_or(false)
    }

    pub fn set(&mut self, v: Var, value: bool) {
        if self.values.len() <= v.index() {
            self.values.resize(v.index() + 1, false);
        }
        self.values[v.index()] = value;
    }

    /// Number of variables covered.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn truncated(&self, vars: u32) -> Model {
        let mut values = self.values.clone();
        values.resize(vars as usize, false);
        Model { values }
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.values
    }
}

#[derive(Error, Debug)]
pub enum CnfError {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("formula has {0} soft clauses; plain CNF cannot represent them")]
    SoftInCnf(usize),
    #[error("exactly-one over an empty literal list")]
    EmptyExactlyOne,
    #[error("solver reported UNSATISFIABLE")]
    Unsat,
    #[error("no model in solver output")]
    NoModel,
    #[error("unparsable v-line: {0:?}")]
    BadValueLine(String),
    #[error("malformed DIMACS at line {line}: {msg}")]
    Dimacs { line: usize, msg: String },
}

/// Hard clauses plus weighted soft clauses over variables `1..=var_count`.
///
/// An empty hard clause is never stored: adding one sets the
/// [`Formula::is_trivially_unsat`] marker instead.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Formula {
    var_count: u32,
    hard: Vec<Clause>,
    soft: Vec<(Clause, u64)>,
    trivially_unsat: bool,
}

impl Formula {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_vars(var_count: u32) -> Self {
        Formula {
            var_count,
            ..Self::default()
        }
    }

    pub fn var_count(&self) -> u32 {
        self.var_count
    }

    pub fn fresh_var(&mut self) -> Var {
        self.var_count += 1;
        Var(self.var_count)
    }

    pub fn fresh_vars(&mut self, n: usize) -> Vec<Var> {
        (0..n).map(|_| self.fresh_var()).collect()
    }

    fn check_range(&self, clause: &[Lit]) {
        for l in clause {
            assert!(
                l.var().0 <= self.var_count,
                "literal {l} exceeds var_count {}",
                self.var_count
            );
        }
    }

    pub fn add_hard(&mut self, clause: Clause) {
        self.check_range(&clause);
        if clause.is_empty() {
            self.trivially_unsat = true;
        } else {
            self.hard.push(clause);
        }
    }

    pub fn add_soft(&mut self, clause: Clause, weight: u64) {
        assert!(weight >= 1, "soft clause weights are positive");
        self.check_range(&clause);
        self.soft.push((clause, weight));
    }

    pub fn hard(&self) -> &[Clause] {
        &self.hard
    }

    pub fn soft(&self) -> &[(Clause, u64)] {
        &self.soft
    }

    pub fn is_trivially_unsat(&self) -> bool {
        self.trivially_unsat
    }

    pub fn num_clauses(&self) -> usize {
        self.hard.len() + self.soft.len() + usize::from(self.trivially_unsat)
    }

    /// Total number of literal occurrences over hard and soft clauses.
    pub fn literal_count(&self) -> usize {
        self.hard.iter().map(Vec::len).sum::<usize>()
            + self.soft.iter().map(|(c, _)| c.len()).sum::<usize>()
    }

    /// Appends the clauses of `other`, whose variables must already be in range.
    pub fn extend(&mut self, other: &Formula) {
        self.var_count = self.var_count.max(other.var_count);
        self.hard.extend(other.hard.iter().cloned());
        self.soft.extend(other.soft.iter().cloned());
        self.trivially_unsat |= other.trivially_unsat;
    }

    /// Checks every hard clause against `model`.
    pub fn satisfies_hard(&self, model: &Model) -> bool {
        !self.trivially_unsat && self.hard.iter().all(|c| c.iter().any(|l| l.eval(model)))
    }

    /// Index of the first falsified hard clause, if any.
    pub fn first_falsified_hard(&self, model: &Model) -> Option<usize> {
        self.hard
            .iter()
            .position(|c| !c.iter().any(|l| l.eval(model)))
    }

    /// Total weight of soft clauses falsified by `model`.
    pub fn soft_cost(&self, model: &Model) -> u64 {
        self.soft
            .iter()
            .filter(|(c, _)| !c.iter().any(|l| l.eval(model)))
            .map(|(_, w)| w)
            .sum()
    }

    /// Adds `Σ lits ≤ k` with a sequential counter.
    ///
    /// Introduces `|lits|·k` register variables `s[i][j]`, where `s[i][j]` is
    /// forced true once at least `j+1` of `lits[..=i]` are true. Nothing is
    /// added when `k ≥ |lits|`; `k = 0` becomes unit clauses.
    pub fn at_most_k(&mut self, lits: &[Lit], k: usize) {
        let n = lits.len();
        if k >= n {
            return;
        }
        if k == 0 {
            for &l in lits {
                self.add_hard(vec![!l]);
            }
            return;
        }
        let regs = self.counter(lits, k);
        for j in 1..k {
            self.add_hard(vec![regs[0][j].neg()]);
        }
        for i in 1..n {
            self.add_hard(vec![!lits[i], regs[i - 1][k - 1].neg()]);
        }
    }

    /// Sequential-counter registers without any bound. Row `i`, column `j`
    /// is implied by "at least `j+1` of `lits[..=i]` are true".
    pub(crate) fn counter(&mut self, lits: &[Lit], width: usize) -> Vec<Vec<Var>> {
        let regs: Vec<Vec<Var>> = (0..lits.len()).map(|_| self.fresh_vars(width)).collect();
        for (i, &x) in lits.iter().enumerate() {
            self.add_hard(vec![!x, regs[i][0].pos()]);
            if i == 0 {
                continue;
            }
            for j in 0..width {
                self.add_hard(vec![regs[i - 1][j].neg(), regs[i][j].pos()]);
                if j > 0 {
                    self.add_hard(vec![!x, regs[i - 1][j - 1].neg(), regs[i][j].pos()]);
                }
            }
        }
        regs
    }

    /// Adds `Σ lits = 1`.
    pub fn exactly_one(&mut self, lits: &[Lit]) -> Result<(), CnfError> {
        if lits.is_empty() {
            return Err(CnfError::EmptyExactlyOne);
        }
        self.at_most_k(lits, 1);
        self.add_hard(lits.to_vec());
        Ok(())
    }

    /// Writes `p cnf` DIMACS. Fails if the formula carries soft clauses.
    pub fn write_dimacs_cnf<W: Write>(&self, mut out: W) -> Result<(), CnfError> {
        if !self.soft.is_empty() {
            return Err(CnfError::SoftInCnf(self.soft.len()));
        }
        writeln!(out, "p cnf {} {}", self.var_count, self.num_clauses())?;
        for c in &self.hard {
            write_clause(&mut out, None, c)?;
        }
        if self.trivially_unsat {
            writeln!(out, "0")?;
        }
        Ok(())
    }

    /// Top weight of the classic WCNF dialect: one more than all soft weight.
    pub fn top_weight(&self) -> u64 {
        1 + self.soft.iter().map(|(_, w)| w).sum::<u64>()
    }

    /// Writes `p wcnf` DIMACS in the top-weight dialect, hard clauses first.
    pub fn write_dimacs_wcnf<W: Write>(&self, mut out: W) -> Result<(), CnfError> {
        let top = self.top_weight();
        writeln!(
            out,
            "p wcnf {} {} {}",
            self.var_count,
            self.num_clauses(),
            top
        )?;
        for c in &self.hard {
            write_clause(&mut out, Some(top), c)?;
        }
        if self.trivially_unsat {
            writeln!(out, "{top} 0")?;
        }
        for (c, w) in &self.soft {
            write_clause(&mut out, Some(*w), c)?;
        }
        Ok(())
    }

    pub fn to_dimacs_string(&self) -> String {
        let mut buf = Vec::new();
        if self.soft.is_empty() {
            self.write_dimacs_cnf(&mut buf).expect("write to Vec");
        } else {
            self.write_dimacs_wcnf(&mut buf).expect("write to Vec");
        }
        String::from_utf8(buf).expect("DIMACS is ASCII")
    }
}

fn write_clause<W: Write>(out: &mut W, weight: Option<u64>, clause: &[Lit]) -> io::Result<()> {
    if let Some(w) = weight {
        write!(out, "{w} ")?;
    }
    for l in clause {
        write!(out, "{l} ")?;
    }
    writeln!(out, "0")
}

/// Parses a `p cnf` or classic `p wcnf` file. In WCNF, clauses whose weight
/// is at least the top weight are hard.
pub fn parse_dimacs(text: &str) -> Result<Formula, CnfError> {
    let mut formula = Formula::new();
    let mut top: Option<Option<u64>> = None;
    let mut pending: Vec<i64> = Vec::new();
    let mut tokens_line = 0;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        let err = |msg: String| CnfError::Dimacs {
            line: lineno + 1,
            msg,
        };
        if line.starts_with('p') {
            let parts: Vec<&str> = line.split_whitespace().collect();
            match parts.as_slice() {
                ["p", "cnf", v, _] => {
                    let v = v.parse().map_err(|_| err("bad variable count".into()))?;
                    formula.var_count = v;
                    top = Some(None);
                }
                ["p", "wcnf", v, _, t] => {
                    let v = v.parse().map_err(|_| err("bad variable count".into()))?;
                    let t = t.parse().map_err(|_| err("bad top weight".into()))?;
                    formula.var_count = v;
                    top = Some(Some(t));
                }
                _ => return Err(err(format!("unsupported header {line:?}"))),
            }
            continue;
        }
        let Some(top) = top else {
            return Err(err("clause before header".into()));
        };
        for tok in line.split_whitespace() {
            let x: i64 = tok.parse().map_err(|_| err(format!("bad token {tok:?}")))?;
            if pending.is_empty() {
                tokens_line = lineno + 1;
            }
            if x != 0 {
                pending.push(x);
                continue;
            }
            let (weight, lits) = match top {
                Some(_) => {
                    let Some((&w, rest)) = pending.split_first() else {
                        return Err(err("missing weight".into()));
                    };
                    if w <= 0 {
                        return Err(err(format!("non-positive weight {w}")));
                    }
                    (Some(w as u64), rest)
                }
                None => (None, pending.as_slice()),
            };
            let mut clause = Vec::with_capacity(lits.len());
            for &l in lits {
                let v = l.unsigned_abs();
                if v > formula.var_count as u64 {
                    return Err(CnfError::Dimacs {
                        line: tokens_line,
                        msg: format!("literal {l} exceeds declared variables"),
                    });
                }
                clause.push(Lit::from_dimacs(l as i32));
            }
            match (weight, top) {
                (Some(w), Some(t)) if w < t => formula.add_soft(clause, w),
                _ => formula.add_hard(clause),
            }
            pending.clear();
        }
    }
    if !pending.is_empty() {
        return Err(CnfError::Dimacs {
            line: tokens_line,
            msg: "clause not terminated by 0".into(),
        });
    }
    Ok(formula)
}

/// Status line of a solver's competition-format output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReportedStatus {
    Satisfiable,
    Unsatisfiable,
    OptimumFound,
    Unknown,
}

/// The `s`, `o` and `v` lines of a solver run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverOutput {
    pub status: Option<ReportedStatus>,
    /// Last `o` line, if any.
    pub cost: Option<u64>,
    pub model: Option<Model>,
}

/// Parses competition-format solver output.
///
/// `v` lines are either signed literals (terminated by `0`, possibly over
/// several lines) or a single 0/1 string giving variables `1..` in order.
pub fn parse_solver_output(text: &str) -> Result<SolverOutput, CnfError> {
    let mut status = None;
    let mut cost = None;
    let mut tokens: Vec<&str> = Vec::new();
    for line in text.lines() {
        let line = line.trim_end();
        if let Some(rest) = line.strip_prefix("s ") {
            status = Some(match rest.trim() {
                "SATISFIABLE" => ReportedStatus::Satisfiable,
                "UNSATISFIABLE" => ReportedStatus::Unsatisfiable,
                "OPTIMUM FOUND" => ReportedStatus::OptimumFound,
                _ => ReportedStatus::Unknown,
            });
        } else if let Some(rest) = line.strip_prefix("o ") {
            let c = rest
                .trim()
                .parse()
                .map_err(|_| CnfError::BadValueLine(line.to_owned()))?;
            cost = Some(c);
        } else if let Some(rest) = line.strip_prefix("v ").or(line.strip_prefix("v\t")) {
            tokens.extend(rest.split_whitespace());
        } else if line == "v" {
            continue;
        }
    }
    let model = if tokens.is_empty() {
        None
    } else if tokens.len() == 1
        && tokens[0] != "0"
        && tokens[0].len() > 1
        && tokens[0].bytes().all(|b| b == b'0' || b == b'1')
    {
        Some(Model::new(tokens[0].bytes().map(|b| b == b'1').collect()))
    } else {
        let mut model = Model::default();
        for tok in tokens {
            let x: i64 = tok
                .parse()
                .map_err(|_| CnfError::BadValueLine(tok.to_owned()))?;
            if x == 0 {
                continue;
            }
            if x.unsigned_abs() > u32::MAX as u64 {
                return Err(CnfError::BadValueLine(tok.to_owned()));
            }
            model.set(Var::new(x.unsigned_abs() as u32), x > 0);
        }
        Some(model)
    };
    Ok(SolverOutput {
        status,
        cost,
        model,
    })
}

/// Extracts the model from solver output; UNSAT is reported as an error.
pub fn parse_model(text: &str) -> Result<Model, CnfError> {
    let out = parse_solver_output(text)?;
    match out.status {
        Some(ReportedStatus::Unsatisfiable) => Err(CnfError::Unsat),
        _ => out.model.ok_or(CnfError::NoModel),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lits(xs: &[i32]) -> Vec<Lit> {
        xs.iter().map(|&x| Lit::from_dimacs(x)).collect()
    }

    /// Assignments of the first `n` variables that extend to a model of `f`,
    /// by enumeration when small and by the embedded solver otherwise.
    fn extendable(f: &Formula, n: u32) -> Vec<u32> {
        let total = f.var_count();
        if total <= 16 {
            let mut ok = vec![false; 1 << n];
            for bits in 0u64..(1u64 << total) {
                let m = Model::new((0..total).map(|i| bits >> i & 1 == 1).collect());
                if f.satisfies_hard(&m) {
                    ok[(bits & ((1 << n) - 1)) as usize] = true;
                }
            }
            return (0..1u32 << n).filter(|&a| ok[a as usize]).collect();
        }
        (0..1u32 << n)
            .filter(|&a| {
                let mut g = f.clone();
                for i in 0..n {
                    g.add_hard(vec![Var::new(i + 1).lit(a >> i & 1 == 1)]);
                }
                let r = crate::solve::sat_solve(&g, &Default::default());
                r.status == crate::solve::SatStatus::Sat
            })
            .collect()
    }

    #[test]
    fn fresh_var_counts_up() {
        let mut f = Formula::new();
        assert_eq!(f.fresh_var().id(), 1);
        f.fresh_var();
        f.fresh_var();
        assert_eq!(f.fresh_var().id(), 4);
        let mut g = Formula::with_vars(10);
        assert_eq!(g.fresh_var().id(), 11);
    }

    #[test]
    fn at_most_one_of_two_excludes_both() {
        let mut f = Formula::with_vars(2);
        f.at_most_k(&lits(&[1, 2]), 1);
        assert_eq!(extendable(&f, 2), vec![0b00, 0b01, 0b10]);
    }

    #[test]
    fn vacuous_bound_adds_nothing() {
        let mut f = Formula::with_vars(3);
        f.at_most_k(&lits(&[1, 2, 3]), 3);
        assert_eq!(f.num_clauses(), 0);
        assert_eq!(f.var_count(), 3);
    }

    #[test]
    fn at_most_two_of_four_matches_brute_force() {
        let mut f = Formula::with_vars(4);
        f.at_most_k(&lits(&[1, 2, 3, 4]), 2);
        assert_eq!(f.var_count(), 4 + 4 * 2);
        let expected: Vec<u32> = (0..16u32).filter(|a| a.count_ones() <= 2).collect();
        assert_eq!(extendable(&f, 4), expected);
    }

    #[test]
    fn exactly_one_cases() {
        let mut f = Formula::with_vars(1);
        f.exactly_one(&lits(&[1])).unwrap();
        assert_eq!(f.hard(), &[lits(&[1])]);

        let mut g = Formula::with_vars(2);
        g.exactly_one(&lits(&[1, 2])).unwrap();
        assert_eq!(extendable(&g, 2), vec![0b01, 0b10]);

        assert!(matches!(
            Formula::new().exactly_one(&[]),
            Err(CnfError::EmptyExactlyOne)
        ));
    }

    #[test]
    fn cnf_emission() {
        let mut f = Formula::with_vars(2);
        f.add_hard(lits(&[1, -2]));
        assert_eq!(f.to_dimacs_string(), "p cnf 2 1\n1 -2 0\n");
        assert_eq!(Formula::with_vars(5).to_dimacs_string(), "p cnf 5 0\n");
        f.add_soft(lits(&[1]), 1);
        let mut buf = Vec::new();
        assert!(matches!(
            f.write_dimacs_cnf(&mut buf),
            Err(CnfError::SoftInCnf(1))
        ));
    }

    #[test]
    fn wcnf_emission() {
        let mut f = Formula::with_vars(2);
        f.add_hard(lits(&[1, 2]));
        f.add_soft(lits(&[-1]), 1);
        f.add_soft(lits(&[-2]), 1);
        let text = f.to_dimacs_string();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("p wcnf 2 3 3"));
        assert_eq!(lines.next(), Some("3 1 2 0"));
        assert_eq!(lines.next(), Some("1 -1 0"));

        let mut hard_only = Formula::with_vars(1);
        hard_only.add_hard(lits(&[1]));
        let mut buf = Vec::new();
        hard_only.write_dimacs_wcnf(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().skip(1).all(|l| l.starts_with("1 ")));

        let mut buf = Vec::new();
        Formula::new().write_dimacs_wcnf(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "p wcnf 0 0 1\n");
    }

    #[test]
    fn empty_clause_is_a_marker() {
        let mut f = Formula::with_vars(1);
        f.add_hard(vec![]);
        assert!(f.is_trivially_unsat());
        assert!(f.hard().is_empty());
        assert_eq!(f.to_dimacs_string(), "p cnf 1 1\n0\n");
        assert!(!f.satisfies_hard(&Model::new(vec![true])));
    }

    #[test]
    fn model_parsing() {
        let m = parse_model("s SATISFIABLE\nv 1 -2 0").unwrap();
        assert_eq!(m.as_slice(), &[true, false]);
        assert!(matches!(
            parse_model("s UNSATISFIABLE\n"),
            Err(CnfError::Unsat)
        ));
        let m = parse_model("s OPTIMUM FOUND\nv 10\n").unwrap();
        assert_eq!(m.as_slice(), &[true, false]);
        let m = parse_model("c comment\ns SATISFIABLE\nv 1 -2\nv 3 0\n").unwrap();
        assert_eq!(m.as_slice(), &[true, false, true]);
        assert!(matches!(
            parse_model("s SATISFIABLE\nv 1 x 0\n"),
            Err(CnfError::BadValueLine(_))
        ));
        let out = parse_solver_output("o 7\no 3\ns OPTIMUM FOUND\nv -1 0\n").unwrap();
        assert_eq!(out.cost, Some(3));
        assert_eq!(out.status, Some(ReportedStatus::OptimumFound));
    }

    #[test]
    fn literal_counting() {
        let mut f = Formula::with_vars(3);
        f.add_hard(lits(&[1, -2]));
        f.add_hard(lits(&[3]));
        assert_eq!(f.literal_count(), 3);
        assert_eq!(Formula::new().literal_count(), 0);
    }

    #[test]
    fn dimacs_parse_round_trip() {
        let mut f = Formula::with_vars(3);
        f.add_hard(lits(&[1, -2]));
        f.add_hard(lits(&[3]));
        f.add_soft(lits(&[-1]), 1);
        f.add_soft(lits(&[2, -3]), 4);
        assert_eq!(parse_dimacs(&f.to_dimacs_string()).unwrap(), f);
        assert!(parse_dimacs("p cnf 1 1\n2 0\n").is_err());
        assert!(parse_dimacs("p cnf 2 1\n1 2\n").is_err());
    }

    proptest! {
        #[test]
        fn at_most_k_projection_is_exact(n in 1usize..=5, k_raw in 0usize..=5) {
            let k = k_raw.min(n);
            let mut f = Formula::with_vars(n as u32);
            let xs: Vec<Lit> = (1..=n as i32).map(Lit::from_dimacs).collect();
            f.at_most_k(&xs, k);
            let expected: Vec<u32> =
                (0..1u32 << n).filter(|a| a.count_ones() as usize <= k).collect();
            prop_assert_eq!(extendable(&f, n as u32), expected);
        }

        #[test]
        fn literal_count_is_additive(
            a in proptest::collection::vec(proptest::collection::vec(1i32..6, 1..4), 0..6),
            b in proptest::collection::vec(proptest::collection::vec(-5i32..0, 1..4), 0..6),
        ) {
            let build = |cs: &[Vec<i32>]| {
                let mut f = Formula::with_vars(5);
                for c in cs {
                    f.add_hard(lits(c));
                }
                f
            };
            let (fa, fb) = (build(&a), build(&b));
            let mut joined = fa.clone();
            joined.extend(&fb);
            prop_assert_eq!(joined.literal_count(), fa.literal_count() + fb.literal_count());
        }
    }
}

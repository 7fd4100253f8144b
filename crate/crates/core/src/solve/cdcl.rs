//! A compact CDCL solver: two watched literals, first-UIP learning with
//! local minimization, VSIDS decisions with phase saving, Luby restarts and
//! LBD-based learned-clause reduction. Clauses may be added between calls.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::SolverStats;
use crate::cnf::{Lit, Model};

const NO_REASON: u32 = u32::MAX;
const VAR_DECAY: f64 = 0.95;
const CLAUSE_DECAY: f64 = 0.999;
const RESTART_UNIT: u64 = 100;

/// Internal literal: `2·var` for the positive phase, `2·var + 1` negated.
type ILit = u32;

#[inline]
fn ilit(l: Lit) -> ILit {
    (l.var().index() as u32) << 1 | u32::from(l.is_negated())
}

#[inline]
fn var_of(l: ILit) -> usize {
    (l >> 1) as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Sat,
    Unsat,
    Unknown,
}

#[derive(Clone, Copy)]
struct Watcher {
    cref: u32,
    blocker: ILit,
}

struct ClauseData {
    lits: Vec<ILit>,
    learnt: bool,
    deleted: bool,
    lbd: u32,
    activity: f64,
}

/// Binary max-heap of variables ordered by activity.
#[derive(Default)]
struct VarHeap {
    heap: Vec<u32>,
    pos: Vec<Option<usize>>,
}

impl VarHeap {
    fn grow(&mut self, n: usize) {
        self.pos.resize(n, None);
    }

    fn contains(&self, v: usize) -> bool {
        self.pos[v].is_some()
    }

    fn insert(&mut self, v: usize, act: &[f64]) {
        if self.contains(v) {
            return;
        }
        self.pos[v] = Some(self.heap.len());
        self.heap.push(v as u32);
        self.sift_up(self.heap.len() - 1, act);
    }

    fn bumped(&mut self, v: usize, act: &[f64]) {
        if let Some(i) = self.pos[v] {
            self.sift_up(i, act);
        }
    }

    fn pop(&mut self, act: &[f64]) -> Option<usize> {
        let top = *self.heap.first()? as usize;
        let last = self.heap.pop().expect("non-empty");
        self.pos[top] = None;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.pos[last as usize] = Some(0);
            self.sift_down(0, act);
        }
        Some(top)
    }

    fn sift_up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            let p = self.heap[parent];
            if act[p as usize] >= act[v as usize] {
                break;
            }
            self.heap[i] = p;
            self.pos[p as usize] = Some(i);
            i = parent;
        }
        self.heap[i] = v;
        self.pos[v as usize] = Some(i);
    }

    fn sift_down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        let n = self.heap.len();
        loop {
            let l = 2 * i + 1;
            if l >= n {
                break;
            }
            let r = l + 1;
            let child = if r < n && act[self.heap[r] as usize] > act[self.heap[l] as usize] {
                r
            } else {
                l
            };
            let c = self.heap[child];
            if act[c as usize] <= act[v as usize] {
                break;
            }
            self.heap[i] = c;
            self.pos[c as usize] = Some(i);
            i = child;
        }
        self.heap[i] = v;
        self.pos[v as usize] = Some(i);
    }
}

pub struct Solver {
    clauses: Vec<ClauseData>,
    learnts: Vec<u32>,
    watches: Vec<Vec<Watcher>>,
    /// Per variable: 0 unassigned, 1 true, -1 false.
    assigns: Vec<i8>,
    level: Vec<u32>,
    reason: Vec<u32>,
    trail: Vec<ILit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    cla_inc: f64,
    heap: VarHeap,
    phase: Vec<bool>,
    seen: Vec<bool>,
    ok: bool,
    max_learnts: f64,
    rng: ChaCha8Rng,
    pub(crate) stats: SolverStats,
    model: Vec<bool>,
}

impl Solver {
    pub fn new(seed: u64) -> Self {
        Solver {
            clauses: Vec::new(),
            learnts: Vec::new(),
            watches: Vec::new(),
            assigns: Vec::new(),
            level: Vec::new(),
            reason: Vec::new(),
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: Vec::new(),
            var_inc: 1.0,
            cla_inc: 1.0,
            heap: VarHeap::default(),
            phase: Vec::new(),
            seen: Vec::new(),
            ok: true,
            max_learnts: 0.0,
            rng: ChaCha8Rng::seed_from_u64(seed),
            stats: SolverStats::default(),
            model: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.assigns.len()
    }

    /// Makes sure variables `1..=n` exist.
    pub fn reserve_vars(&mut self, n: usize) {
        while self.assigns.len() < n {
            let v = self.assigns.len();
            self.assigns.push(0);
            self.level.push(0);
            self.reason.push(NO_REASON);
            // Tiny seeded perturbation breaks initial activity ties.
            self.activity.push(self.rng.gen::<f64>() * 1e-5);
            self.phase.push(false);
            self.seen.push(false);
            self.watches.push(Vec::new());
            self.watches.push(Vec::new());
            self.heap.grow(v + 1);
            self.heap.insert(v, &self.activity);
        }
    }

    #[inline]
    fn value(&self, l: ILit) -> i8 {
        let a = self.assigns[var_of(l)];
        if l & 1 == 1 {
            -a
        } else {
            a
        }
    }

    fn decision_level(&self) -> usize {
        self.trail_lim.len()
    }

    /// Adds a clause; returns false once the clause set is known UNSAT.
    pub fn add_clause(&mut self, clause: &[Lit]) -> bool {
        if !self.ok {
            return false;
        }
        self.cancel_until(0);
        let max_var = clause
            .iter()
            .map(|l| l.var().id() as usize)
            .max()
            .unwrap_or(0);
        self.reserve_vars(max_var);
        let mut lits: Vec<ILit> = clause.iter().map(|&l| ilit(l)).collect();
        lits.sort_unstable();
        lits.dedup();
        if lits.windows(2).any(|w| w[0] ^ 1 == w[1]) {
            return true;
        }
        if lits.iter().any(|&l| self.value(l) == 1) {
            return true;
        }
        lits.retain(|&l| self.value(l) == 0);
        match lits.len() {
            0 => {
                self.ok = false;
                false
            }
            1 => {
                self.enqueue(lits[0], NO_REASON);
                if self.propagate().is_some() {
                    self.ok = false;
                }
                self.ok
            }
            _ => {
                self.attach(lits, false, 0);
                true
            }
        }
    }

    fn attach(&mut self, lits: Vec<ILit>, learnt: bool, lbd: u32) -> u32 {
        let cref = self.clauses.len() as u32;
        self.watches[(lits[0] ^ 1) as usize].push(Watcher {
            cref,
            blocker: lits[1],
        });
        self.watches[(lits[1] ^ 1) as usize].push(Watcher {
            cref,
            blocker: lits[0],
        });
        self.clauses.push(ClauseData {
            lits,
            learnt,
            deleted: false,
            lbd,
            activity: 0.0,
        });
        if learnt {
            self.learnts.push(cref);
        }
        cref
    }

    fn enqueue(&mut self, l: ILit, reason: u32) {
        let v = var_of(l);
        debug_assert_eq!(self.assigns[v], 0);
        self.assigns[v] = if l & 1 == 1 { -1 } else { 1 };
        self.level[v] = self.decision_level() as u32;
        self.reason[v] = reason;
        self.trail.push(l);
    }

    /// Unit propagation; returns the conflicting clause, if any.
    fn propagate(&mut self) -> Option<u32> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = p ^ 1;
            let mut ws = std::mem::take(&mut self.watches[p as usize]);
            let (mut i, mut j) = (0, 0);
            let mut conflict = None;
            while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.value(w.blocker) == 1 {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let cref = w.cref as usize;
                if self.clauses[cref].deleted {
                    continue;
                }
                {
                    let lits = &mut self.clauses[cref].lits;
                    if lits[0] == false_lit {
                        lits.swap(0, 1);
                    }
                }
                let first = self.clauses[cref].lits[0];
                if first != w.blocker && self.value(first) == 1 {
                    ws[j] = Watcher {
                        cref: w.cref,
                        blocker: first,
                    };
                    j += 1;
                    continue;
                }
                let len = self.clauses[cref].lits.len();
                let mut moved = false;
                for k in 2..len {
                    let l = self.clauses[cref].lits[k];
                    if self.value(l) != -1 {
                        self.clauses[cref].lits.swap(1, k);
                        self.watches[(l ^ 1) as usize].push(Watcher {
                            cref: w.cref,
                            blocker: first,
                        });
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = Watcher {
                    cref: w.cref,
                    blocker: first,
                };
                j += 1;
                if self.value(first) == -1 {
                    conflict = Some(w.cref);
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                } else {
                    self.enqueue(first, w.cref);
                }
            }
            ws.truncate(j);
            self.watches[p as usize] = ws;
            if conflict.is_some() {
                self.qhead = self.trail.len();
                return conflict;
            }
        }
        None
    }

    fn bump_var(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.bumped(v, &self.activity);
    }

    fn bump_clause(&mut self, cref: usize) {
        let c = &mut self.clauses[cref];
        c.activity += self.cla_inc;
        if c.activity > 1e20 {
            for &l in &self.learnts {
                self.clauses[l as usize].activity *= 1e-20;
            }
            self.cla_inc *= 1e-20;
        }
    }

    /// First-UIP analysis. Returns the learnt clause (asserting literal
    /// first, a literal of the backjump level second) and the backjump level.
    fn analyze(&mut self, mut confl: u32) -> (Vec<ILit>, usize) {
        let mut learnt: Vec<ILit> = vec![0];
        let mut path = 0usize;
        let mut p: Option<ILit> = None;
        let mut index = self.trail.len();
        let current = self.decision_level() as u32;
        loop {
            let cref = confl as usize;
            if self.clauses[cref].learnt {
                self.bump_clause(cref);
            }
            let start = usize::from(p.is_some());
            for k in start..self.clauses[cref].lits.len() {
                let q = self.clauses[cref].lits[k];
                let v = var_of(q);
                if !self.seen[v] && self.level[v] > 0 {
                    self.bump_var(v);
                    self.seen[v] = true;
                    if self.level[v] >= current {
                        path += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if self.seen[var_of(self.trail[index])] {
                    break;
                }
            }
            let lit = self.trail[index];
            p = Some(lit);
            confl = self.reason[var_of(lit)];
            self.seen[var_of(lit)] = false;
            path -= 1;
            if path == 0 {
                break;
            }
        }
        learnt[0] = p.expect("conflict at level > 0") ^ 1;

        // Drop literals implied by the rest of the clause.
        let mut kept = vec![learnt[0]];
        for &q in &learnt[1..] {
            let r = self.reason[var_of(q)];
            let redundant = r != NO_REASON
                && self.clauses[r as usize].lits[1..].iter().all(|&x| {
                    let v = var_of(x);
                    self.seen[v] || self.level[v] == 0
                });
            if !redundant {
                kept.push(q);
            }
        }
        for &q in &learnt {
            self.seen[var_of(q)] = false;
        }
        let mut learnt = kept;

        let bt = if learnt.len() == 1 {
            0
        } else {
            let (mut best, mut best_level) = (1, self.level[var_of(learnt[1])]);
            for (k, &q) in learnt.iter().enumerate().skip(2) {
                let lv = self.level[var_of(q)];
                if lv > best_level {
                    best = k;
                    best_level = lv;
                }
            }
            learnt.swap(1, best);
            best_level as usize
        };
        (learnt, bt)
    }

    fn lbd(&mut self, lits: &[ILit]) -> u32 {
        let mut levels: Vec<u32> = lits.iter().map(|&l| self.level[var_of(l)]).collect();
        levels.sort_unstable();
        levels.dedup();
        levels.len() as u32
    }

    fn cancel_until(&mut self, lvl: usize) {
        if self.decision_level() <= lvl {
            return;
        }
        let lim = self.trail_lim[lvl];
        for k in (lim..self.trail.len()).rev() {
            let v = var_of(self.trail[k]);
            self.phase[v] = self.assigns[v] == 1;
            self.assigns[v] = 0;
            self.reason[v] = NO_REASON;
            self.heap.insert(v, &self.activity);
        }
        self.trail.truncate(lim);
        self.trail_lim.truncate(lvl);
        self.qhead = lim;
    }

    fn pick_branch(&mut self) -> Option<ILit> {
        while let Some(v) = self.heap.pop(&self.activity) {
            if self.assigns[v] == 0 {
                return Some((v as u32) << 1 | u32::from(!self.phase[v]));
            }
        }
        None
    }

    fn locked(&self, cref: u32) -> bool {
        let l = self.clauses[cref as usize].lits[0];
        let v = var_of(l);
        self.reason[v] == cref && self.value(l) == 1
    }

    fn reduce_db(&mut self) {
        let mut candidates: Vec<u32> = self
            .learnts
            .iter()
            .copied()
            .filter(|&c| !self.clauses[c as usize].deleted)
            .collect();
        candidates.sort_by(|&a, &b| {
            let (ca, cb) = (&self.clauses[a as usize], &self.clauses[b as usize]);
            cb.lbd
                .cmp(&ca.lbd)
                .then(ca.activity.partial_cmp(&cb.activity).expect("finite"))
        });
        let target = candidates.len() / 2;
        let mut removed = 0;
        for &c in &candidates {
            if removed >= target {
                break;
            }
            if self.clauses[c as usize].lbd <= 2 || self.locked(c) {
                continue;
            }
            let data = &mut self.clauses[c as usize];
            data.deleted = true;
            data.lits = Vec::new();
            removed += 1;
        }
        self.learnts.retain(|&c| !self.clauses[c as usize].deleted);
        let clauses = &self.clauses;
        for ws in &mut self.watches {
            ws.retain(|w| !clauses[w.cref as usize].deleted);
        }
        self.stats.reductions += 1;
    }

    fn luby(mut x: u64) -> u64 {
        let (mut size, mut seq) = (1u64, 0u32);
        while size < x + 1 {
            seq += 1;
            size = 2 * size + 1;
        }
        while size - 1 != x {
            size = (size - 1) >> 1;
            seq -= 1;
            x %= size;
        }
        1 << seq
    }

    /// Runs the search until SAT, UNSAT or the deadline.
    pub fn solve(&mut self, deadline: Option<Instant>) -> Status {
        if !self.ok {
            return Status::Unsat;
        }
        self.cancel_until(0);
        if self.propagate().is_some() {
            self.ok = false;
            return Status::Unsat;
        }
        if self.max_learnts == 0.0 {
            self.max_learnts = (self.clauses.len() as f64 / 3.0).max(2000.0);
        }
        let mut restart = 0;
        loop {
            let budget = Self::luby(restart) * RESTART_UNIT;
            match self.search(budget, deadline) {
                Some(status) => return status,
                None => {
                    restart += 1;
                    self.stats.restarts += 1;
                }
            }
        }
    }

    fn search(&mut self, budget: u64, deadline: Option<Instant>) -> Option<Status> {
        let mut conflicts = 0u64;
        loop {
            if let Some(confl) = self.propagate() {
                self.stats.conflicts += 1;
                conflicts += 1;
                if self.decision_level() == 0 {
                    self.ok = false;
                    return Some(Status::Unsat);
                }
                let (learnt, bt) = self.analyze(confl);
                self.cancel_until(bt);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], NO_REASON);
                } else {
                    let lbd = self.lbd(&learnt);
                    let asserting = learnt[0];
                    let cref = self.attach(learnt, true, lbd);
                    self.bump_clause(cref as usize);
                    self.enqueue(asserting, cref);
                }
                self.var_inc /= VAR_DECAY;
                self.cla_inc /= CLAUSE_DECAY;
                if self.stats.conflicts.is_multiple_of(64) && expired(deadline) {
                    self.cancel_until(0);
                    return Some(Status::Unknown);
                }
            } else {
                if conflicts >= budget {
                    self.cancel_until(0);
                    return None;
                }
                if self.learnts.len() as f64 - self.trail.len() as f64 >= self.max_learnts {
                    self.reduce_db();
                    self.max_learnts *= 1.1;
                }
                if self.stats.decisions.is_multiple_of(1024) && expired(deadline) {
                    self.cancel_until(0);
                    return Some(Status::Unknown);
                }
                match self.pick_branch() {
                    None => {
                        self.model = self.assigns.iter().map(|&a| a == 1).collect();
                        self.cancel_until(0);
                        return Some(Status::Sat);
                    }
                    Some(l) => {
                        self.stats.decisions += 1;
                        self.trail_lim.push(self.trail.len());
                        self.enqueue(l, NO_REASON);
                    }
                }
            }
        }
    }

    /// Model of the last SAT answer, over variables `1..=n`.
    pub fn model(&self, n: usize) -> Model {
        let mut values = self.model.clone();
        values.resize(n, false);
        Model::new(values)
    }
}

fn expired(deadline: Option<Instant>) -> bool {
    deadline.is_some_and(|d| Instant::now() >= d)
}

//! Resolving truth-table cells that no training example reaches.
//!
//! [`mark_unknown`] routes the training set through a learned table and
//! replaces every cell without traffic by `u`. The three biases then decide
//! those cells again: P takes the majority label of the nearest enclosing
//! block with traffic, C merges compatible subtables before falling back to
//! P, and S keeps whatever the solver chose.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bdd::{cell_index, gen_bdd, Bdd, FeatureOrdering, TruthTable};
use crate::data::Dataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BiasPolicy {
    P,
    C,
    S,
}

impl fmt::Display for BiasPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BiasPolicy::P => "P",
            BiasPolicy::C => "C",
            BiasPolicy::S => "S",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cell {
    Zero,
    One,
    Unknown,
}

impl Cell {
    fn from_bool(b: bool) -> Self {
        if b {
            Cell::One
        } else {
            Cell::Zero
        }
    }

    fn symbol(self) -> char {
        match self {
            Cell::Zero => '0',
            Cell::One => '1',
            Cell::Unknown => 'u',
        }
    }
}

/// A truth table over `{0, 1, u}` with per-cell training traffic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtTable {
    cells: Vec<Cell>,
    original: TruthTable,
    /// `(positives, negatives)` captured by each cell.
    counts: Vec<(usize, usize)>,
}

impl ExtTable {
    pub fn order(&self) -> usize {
        self.original.order()
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn counts(&self) -> &[(usize, usize)] {
        &self.counts
    }

    pub fn original(&self) -> &TruthTable {
        &self.original
    }

    pub fn unknown_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c == Cell::Unknown).count()
    }

    fn global_majority(&self) -> bool {
        let (p, n) = self
            .counts
            .iter()
            .fold((0, 0), |(p, n), &(cp, cn)| (p + cp, n + cn));
        p > n
    }
}

impl fmt::Display for ExtTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.cells
            .iter()
            .try_for_each(|c| write!(f, "{}", c.symbol()))
    }
}

/// Routes `train` through `(t, ordering)` and marks cells without traffic.
///
/// `ordering` indexes the columns of `train`.
pub fn mark_unknown(t: &TruthTable, ordering: &FeatureOrdering, train: &Dataset) -> ExtTable {
    assert_eq!(
        t.order(),
        ordering.len(),
        "table order and ordering length differ"
    );
    let mut counts = vec![(0usize, 0usize); t.len()];
    for q in 0..train.num_examples() {
        let j = cell_index(ordering, train.row(q));
        if train.label(q) {
            counts[j].0 += 1;
        } else {
            counts[j].1 += 1;
        }
    }
    let cells = counts
        .iter()
        .enumerate()
        .map(|(j, &(p, n))| {
            if p + n == 0 {
                Cell::Unknown
            } else {
                Cell::from_bool(t.cell(j))
            }
        })
        .collect();
    ExtTable {
        cells,
        original: t.clone(),
        counts,
    }
}

pub fn apply_bias_s(t: &ExtTable) -> TruthTable {
    t.original.clone()
}

/// Majority label of the smallest aligned block around each unknown cell
/// that captures any training example.
pub fn apply_bias_p(t: &ExtTable) -> TruthTable {
    let global = t.global_majority();
    let n = t.cells.len();
    let bits = t
        .cells
        .iter()
        .enumerate()
        .map(|(j, &c)| match c {
            Cell::Zero => false,
            Cell::One => true,
            Cell::Unknown => {
                let mut size = 2;
                while size <= n {
                    let start = j / size * size;
                    let (p, q) = t.counts[start..start + size]
                        .iter()
                        .fold((0, 0), |(p, q), &(cp, cn)| (p + cp, q + cn));
                    if p + q > 0 {
                        return match p.cmp(&q) {
                            std::cmp::Ordering::Greater => true,
                            std::cmp::Ordering::Less => false,
                            std::cmp::Ordering::Equal => global,
                        };
                    }
                    size *= 2;
                }
                global
            }
        })
        .collect::<Vec<_>>();
    TruthTable::from_bits(&bits).expect("same length as the input table")
}

fn compatible(a: &[Cell], b: &[Cell]) -> bool {
    a.iter()
        .zip(b)
        .all(|(&x, &y)| x == y || x == Cell::Unknown || y == Cell::Unknown)
}

fn unify(a: &[Cell], b: &[Cell]) -> Vec<Cell> {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| if x == Cell::Unknown { y } else { x })
        .collect()
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Merges compatible subtables level by level from the root; unknown
/// cells left afterwards are settled by bias P.
pub fn merge_compatible(t: &ExtTable) -> ExtTable {
    let mut cells = t.cells.clone();
    let h = t.order();
    for level in 0..h {
        let size = 1usize << (h - level - 1);
        if size < 2 {
            break;
        }
        let blocks = cells.len() / size;
        let mut parent: Vec<usize> = (0..blocks).collect();
        let mut pattern: Vec<Vec<Cell>> = cells.chunks(size).map(<[Cell]>::to_vec).collect();
        for i in 0..blocks {
            for j in i + 1..blocks {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj && compatible(&pattern[ri], &pattern[rj]) {
                    let merged = unify(&pattern[ri], &pattern[rj]);
                    parent[rj] = ri;
                    pattern[ri] = merged;
                }
            }
        }
        for b in 0..blocks {
            let r = find(&mut parent, b);
            cells[b * size..(b + 1) * size].copy_from_slice(&pattern[r]);
        }
    }
    ExtTable {
        cells,
        original: t.original.clone(),
        counts: t.counts.clone(),
    }
}

pub fn apply_bias_c(t: &ExtTable, ordering: &FeatureOrdering) -> (TruthTable, Bdd) {
    let table = apply_bias_p(&merge_compatible(t));
    let bdd = gen_bdd(&table, ordering).expect("ordering matches the table order");
    (table, bdd)
}

/// Resolves unknown cells with `policy`.
pub fn apply_bias(t: &ExtTable, ordering: &FeatureOrdering, policy: BiasPolicy) -> TruthTable {
    match policy {
        BiasPolicy::P => apply_bias_p(t),
        BiasPolicy::C => apply_bias_c(t, ordering).0,
        BiasPolicy::S => apply_bias_s(t),
    }
}

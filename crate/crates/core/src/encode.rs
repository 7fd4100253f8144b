//! SAT and partial MaxSAT encodings of "find a depth-H BDD that classifies
//! the training set", and decoding of solver models.
//!
//! Three families of variables are shared by all encodings:
//!
//! * `a[r][i]`: feature `r` is placed at position `i` of the ordering;
//! * `c[j]`: truth-table cell `j` is 1;
//! * `d[i][q]` (BDD2 and MaxSAT only): the feature at position `i` is 1 on
//!   example `q`.
//!
//! They are allocated first and contiguously; auxiliary variables of the
//! cardinality and XOR encodings come after them.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use crate::bdd::FeatureOrdering;
use crate::bdd::TruthTable;
use crate::cnf::{Formula, Lit, Model, Var};
use crate::data::{check_consistency, Dataset, Feature};

/// Largest supported depth; tables have `2^H` cells.
pub const MAX_DEPTH: usize = 20;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum EncodeError {
    #[error("depth must be at least 1")]
    ZeroDepth,
    #[error("depth {0} exceeds the supported maximum {MAX_DEPTH}")]
    DepthTooLarge(usize),
    #[error("dataset is inconsistent: {0} groups of identical examples carry both labels")]
    Inconsistent(usize),
    #[error("rel({position}, {cell}) is out of range for depth {depth}")]
    OutOfRange {
        position: usize,
        cell: usize,
        depth: usize,
    },
    #[error("corrupt model: position {position} selects {selected} features")]
    CorruptModel { position: usize, selected: usize },
    #[error("corrupt model: feature {0} is used at more than one position")]
    RepeatedFeature(usize),
    #[error("expected {expected} example weights, got {got}")]
    WeightCount { expected: usize, got: usize },
    #[error("example weights must be positive")]
    ZeroWeight,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Bdd1,
    Bdd2,
    MaxSat,
}

/// Ties solver variables to their meaning.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodingContext {
    pub depth: usize,
    pub num_features: usize,
    pub num_examples: usize,
    pub variant: Variant,
    /// `a[r * depth + i]`.
    a: Vec<Var>,
    /// `c[j]`, `2^depth` entries.
    c: Vec<Var>,
    /// `d[i * num_examples + q]`; empty for BDD1.
    d: Vec<Var>,
    /// Feature schema of the encoded dataset, so that a decoded ordering can
    /// be named and applied to fresh data in another process.
    #[serde(default)]
    pub features: Vec<Feature>,
    #[serde(default = "default_labels")]
    pub label_values: [String; 2],
}

fn default_labels() -> [String; 2] {
    ["0".to_owned(), "1".to_owned()]
}

impl EncodingContext {
    fn allocate(f: &mut Formula, d: &Dataset, depth: usize, variant: Variant) -> Self {
        let k = d.num_features();
        let m = d.num_examples();
        let a = f.fresh_vars(k * depth);
        let c = f.fresh_vars(1 << depth);
        let dv = if variant == Variant::Bdd1 {
            Vec::new()
        } else {
            f.fresh_vars(depth * m)
        };
        EncodingContext {
            depth,
            num_features: k,
            num_examples: m,
            variant,
            a,
            c,
            d: dv,
            features: d.features().to_vec(),
            label_values: d.label_values().clone(),
        }
    }

    /// Feature `r` at 0-based position `i`.
    pub fn a(&self, r: usize, i: usize) -> Var {
        self.a[r * self.depth + i]
    }

    /// 0-based cell `j`.
    pub fn c(&self, j: usize) -> Var {
        self.c[j]
    }

    /// Value of the position-`i` feature on example `q`.
    pub fn d(&self, i: usize, q: usize) -> Var {
        self.d[i * self.num_examples + q]
    }

    pub fn has_d(&self) -> bool {
        !self.d.is_empty()
    }

    /// Number of semantic (non-auxiliary) variables.
    pub fn semantic_vars(&self) -> usize {
        self.a.len() + self.c.len() + self.d.len()
    }

    fn all_vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.a.iter().chain(&self.c).chain(&self.d).copied()
    }
}

/// Bit of position `position` (1-based) in the assignment of cell `cell`
/// (1-based) of a depth-`depth` table: `⌊(cell−1) / 2^(depth−position)⌋ mod 2`.
pub fn rel(position: usize, cell: usize, depth: usize) -> Result<bool, EncodeError> {
    if position == 0 || position > depth || cell == 0 || depth > MAX_DEPTH || cell > 1 << depth {
        return Err(EncodeError::OutOfRange {
            position,
            cell,
            depth,
        });
    }
    Ok(cell_bit(position - 1, cell - 1, depth))
}

/// 0-based form of [`rel`].
#[inline]
pub(crate) fn cell_bit(i: usize, j: usize, depth: usize) -> bool {
    (j >> (depth - 1 - i)) & 1 == 1
}

fn check_depth(depth: usize) -> Result<(), EncodeError> {
    match depth {
        0 => Err(EncodeError::ZeroDepth),
        h if h > MAX_DEPTH => Err(EncodeError::DepthTooLarge(h)),
        _ => Ok(()),
    }
}

fn require_consistent(d: &Dataset) -> Result<(), EncodeError> {
    match check_consistency(d).len() {
        0 => Ok(()),
        n => Err(EncodeError::Inconsistent(n)),
    }
}

/// Constraints shared by every encoding: each feature at most once, exactly
/// one feature per position, and a root table whose halves differ.
fn add_structure(f: &mut Formula, ctx: &EncodingContext) {
    let (k, h) = (ctx.num_features, ctx.depth);
    for r in 0..k {
        let lits: Vec<Lit> = (0..h).map(|i| ctx.a(r, i).pos()).collect();
        f.at_most_k(&lits, 1);
    }
    for i in 0..h {
        let lits: Vec<Lit> = (0..k).map(|r| ctx.a(r, i).pos()).collect();
        if lits.is_empty() {
            f.add_hard(vec![]);
        } else {
            f.exactly_one(&lits).expect("non-empty");
        }
    }
    // Tseitin: t_j <-> (c_j xor c_{j+half}), then at least one t_j.
    let half = 1 << (h - 1);
    let mut cover = Vec::with_capacity(half);
    for j in 0..half {
        let (x, y) = (ctx.c(j), ctx.c(j + half));
        let t = f.fresh_var();
        f.add_hard(vec![t.neg(), x.pos(), y.pos()]);
        f.add_hard(vec![t.neg(), x.neg(), y.neg()]);
        f.add_hard(vec![t.pos(), x.neg(), y.pos()]);
        f.add_hard(vec![t.pos(), x.pos(), y.neg()]);
        cover.push(t.pos());
    }
    f.add_hard(cover);
}

/// Cell literal required by an example's label: `c_j` for positives,
/// `¬c_j` for negatives.
fn label_lit(ctx: &EncodingContext, j: usize, label: bool) -> Lit {
    ctx.c(j).lit(label)
}

/// BDD1: for each example `q` and cell `j`, the example must not reach `j`
/// when `j` holds the opposite label. The clause lists the placements
/// `a[r][i]` that would route `q` away from `j`.
pub fn encode_bdd1(d: &Dataset, depth: usize) -> Result<(Formula, EncodingContext), EncodeError> {
    check_depth(depth)?;
    require_consistent(d)?;
    let mut f = Formula::new();
    let ctx = EncodingContext::allocate(&mut f, d, depth, Variant::Bdd1);
    add_structure(&mut f, &ctx);
    for q in 0..d.num_examples() {
        let label = d.label(q);
        for j in 0..1usize << depth {
            let mut clause = vec![label_lit(&ctx, j, label)];
            for i in 0..depth {
                let bit = cell_bit(i, j, depth);
                for r in 0..d.num_features() {
                    if d.value(q, r) != bit {
                        clause.push(ctx.a(r, i).pos());
                    }
                }
            }
            f.add_hard(clause);
        }
    }
    Ok((f, ctx))
}

/// Links `d[i][q]` to the value of whichever feature sits at position `i`.
fn add_feature_links(f: &mut Formula, ctx: &EncodingContext, d: &Dataset) {
    for q in 0..d.num_examples() {
        for i in 0..ctx.depth {
            let dv = ctx.d(i, q);
            for r in 0..d.num_features() {
                f.add_hard(vec![ctx.a(r, i).neg(), dv.lit(d.value(q, r))]);
            }
        }
    }
}

/// Classification clauses of BDD2: "example `q` follows the path of cell
/// `j` ⇒ cell `j` carries its label", as `H + 1`-literal clauses.
fn classification_clauses(ctx: &EncodingContext, d: &Dataset, q: usize) -> Vec<Vec<Lit>> {
    let depth = ctx.depth;
    (0..1usize << depth)
        .map(|j| {
            let mut clause: Vec<Lit> = (0..depth)
                .map(|i| ctx.d(i, q).lit(!cell_bit(i, j, depth)))
                .collect();
            clause.push(label_lit(ctx, j, d.label(q)));
            clause
        })
        .collect()
}

/// BDD2: BDD1's structure with per-example feature-value variables, giving
/// `O(M·H·(2^H + K))` literals instead of `O(M·H·K·2^H)`.
pub fn encode_bdd2(d: &Dataset, depth: usize) -> Result<(Formula, EncodingContext), EncodeError> {
    check_depth(depth)?;
    require_consistent(d)?;
    let mut f = Formula::new();
    let ctx = EncodingContext::allocate(&mut f, d, depth, Variant::Bdd2);
    add_structure(&mut f, &ctx);
    add_feature_links(&mut f, &ctx, d);
    for q in 0..d.num_examples() {
        for clause in classification_clauses(&ctx, d, q) {
            f.add_hard(clause);
        }
    }
    Ok((f, ctx))
}

/// Partial MaxSAT: BDD2 with the classification clauses soft. A correctly
/// classified example satisfies all `2^H` of its soft clauses, a
/// misclassified one falsifies exactly one, so the optimum cost is the
/// minimum number of training errors.
pub fn encode_maxsat(d: &Dataset, depth: usize) -> Result<(Formula, EncodingContext), EncodeError> {
    encode_maxsat_weighted(d, depth, None)
}

/// [`encode_maxsat`] with a per-example weight on its soft clauses.
pub fn encode_maxsat_weighted(
    d: &Dataset,
    depth: usize,
    weights: Option<&[u64]>,
) -> Result<(Formula, EncodingContext), EncodeError> {
    check_depth(depth)?;
    if let Some(w) = weights {
        if w.len() != d.num_examples() {
            return Err(EncodeError::WeightCount {
                expected: d.num_examples(),
                got: w.len(),
            });
        }
        if w.contains(&0) {
            return Err(EncodeError::ZeroWeight);
        }
    }
    let mut f = Formula::new();
    let ctx = EncodingContext::allocate(&mut f, d, depth, Variant::MaxSat);
    add_structure(&mut f, &ctx);
    add_feature_links(&mut f, &ctx, d);
    for q in 0..d.num_examples() {
        let w = weights.map_or(1, |w| w[q]);
        for clause in classification_clauses(&ctx, d, q) {
            f.add_soft(clause, w);
        }
    }
    Ok((f, ctx))
}

/// Reads the ordering and truth table out of a model.
pub fn decode(
    model: &Model,
    ctx: &EncodingContext,
) -> Result<(FeatureOrdering, TruthTable), EncodeError> {
    let mut positions = Vec::with_capacity(ctx.depth);
    for i in 0..ctx.depth {
        let selected: Vec<usize> = (0..ctx.num_features)
            .filter(|&r| model.value(ctx.a(r, i)))
            .collect();
        if selected.len() != 1 {
            return Err(EncodeError::CorruptModel {
                position: i + 1,
                selected: selected.len(),
            });
        }
        positions.push(selected[0]);
    }
    let ordering = match FeatureOrdering::new(positions.clone()) {
        Ok(o) => o,
        Err(_) => {
            let dup = positions
                .iter()
                .enumerate()
                .find(|(i, r)| positions[..*i].contains(r))
                .map(|(_, &r)| r)
                .unwrap_or(0);
            return Err(EncodeError::RepeatedFeature(dup));
        }
    };
    let bits: Vec<bool> = ctx.c.iter().map(|&v| model.value(v)).collect();
    let table = TruthTable::from_bits(&bits).expect("2^H cells");
    Ok((ordering, table))
}

/// Unit clauses pinning the semantic variables a model would need to
/// realize `(ordering, table)`; used to check that a given classifier is a
/// solution of an encoding.
pub fn pin_solution(
    ctx: &EncodingContext,
    ordering: &FeatureOrdering,
    table: &TruthTable,
) -> Vec<Vec<Lit>> {
    let mut units = Vec::new();
    for r in 0..ctx.num_features {
        for i in 0..ctx.depth {
            units.push(vec![ctx.a(r, i).lit(ordering.features()[i] == r)]);
        }
    }
    for j in 0..1usize << ctx.depth {
        units.push(vec![ctx.c(j).lit(table.cell(j))]);
    }
    units
}

/// Variables whose values [`decode`] depends on, for model-size checks.
pub fn max_semantic_var(ctx: &EncodingContext) -> u32 {
    ctx.all_vars().map(Var::id).max().unwrap_or(0)
}

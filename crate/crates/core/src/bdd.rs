//! Truth tables, beads, and ordered reduced BDDs built from them.
//!
//! A truth table of order `n` is a string of `2^n` cells. Cell `j`
//! (0-based) holds the function value on the assignment whose bits, read
//! most significant first, are the binary digits of `j`: the first half of
//! the table is the `x1 = 0` cofactor, the second half the `x1 = 1`
//! cofactor. A *bead* is a subtable whose halves differ; the beads of a
//! table are exactly the nodes of its reduced ordered BDD, which is what
//! [`gen_bdd`] builds.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum BddError {
    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("invalid truth-table cell {0:?}")]
    BadCell(char),
    #[error("table of order {table} does not match an ordering of length {ordering}")]
    OrderMismatch { table: usize, ordering: usize },
    #[error("feature {0} appears twice in the ordering")]
    RepeatedFeature(usize),
    #[error("example has {have} features, ordering needs feature {need}")]
    ShortExample { have: usize, need: usize },
    #[error("malformed diagram: {0}")]
    Malformed(String),
}

/// A Boolean truth table over {0, 1}.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TruthTable {
    cells: String,
}

/// Order of a table of `len` cells, if `len` is a power of two.
pub fn order_of(len: usize) -> Option<usize> {
    len.is_power_of_two().then(|| len.trailing_zeros() as usize)
}

impl TruthTable {
    pub fn new(cells: impl Into<String>) -> Result<Self, BddError> {
        let cells = cells.into();
        if let Some(c) = cells.chars().find(|&c| c != '0' && c != '1') {
            return Err(BddError::BadCell(c));
        }
        order_of(cells.len()).ok_or(BddError::NotPowerOfTwo(cells.len()))?;
        Ok(TruthTable { cells })
    }

    pub fn from_bits(bits: &[bool]) -> Result<Self, BddError> {
        Self::new(
            bits.iter()
                .map(|&b| if b { '1' } else { '0' })
                .collect::<String>(),
        )
    }

    /// The constant table of order 0.
    pub fn constant(value: bool) -> Self {
        TruthTable {
            cells: if value { "1" } else { "0" }.to_owned(),
        }
    }

    pub fn order(&self) -> usize {
        self.cells.len().trailing_zeros() as usize
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn as_str(&self) -> &str {
        &self.cells
    }

    /// Value of 0-based cell `j`.
    pub fn cell(&self, j: usize) -> bool {
        self.cells.as_bytes()[j] == b'1'
    }

    pub fn bits(&self) -> Vec<bool> {
        self.cells.bytes().map(|b| b == b'1').collect()
    }

    pub fn is_bead(&self) -> bool {
        halves_differ(&self.cells)
    }
}

impl fmt::Display for TruthTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.cells)
    }
}

impl FromStr for TruthTable {
    type Err = BddError;
    fn from_str(s: &str) -> Result<Self, BddError> {
        TruthTable::new(s)
    }
}

impl Serialize for TruthTable {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.cells)
    }
}

impl<'de> Deserialize<'de> for TruthTable {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        TruthTable::new(s).map_err(serde::de::Error::custom)
    }
}

/// The sequence of dataset features bound to BDD levels 1..=H.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct FeatureOrdering(Vec<usize>);

impl FeatureOrdering {
    pub fn new(features: Vec<usize>) -> Result<Self, BddError> {
        let mut seen = BTreeSet::new();
        for &r in &features {
            if !seen.insert(r) {
                return Err(BddError::RepeatedFeature(r));
            }
        }
        Ok(FeatureOrdering(features))
    }

    pub fn empty() -> Self {
        FeatureOrdering(Vec::new())
    }

    /// Number of levels `H`.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn features(&self) -> &[usize] {
        &self.0
    }

    /// Feature tested at 1-based `level`.
    pub fn at_level(&self, level: usize) -> usize {
        self.0[level - 1]
    }

    /// Rewrites feature indices through `map` (e.g. from a column subset
    /// back to the full dataset).
    pub fn remap(&self, map: &[usize]) -> FeatureOrdering {
        FeatureOrdering(self.0.iter().map(|&r| map[r]).collect())
    }
}

impl TryFrom<Vec<usize>> for FeatureOrdering {
    type Error = BddError;
    fn try_from(v: Vec<usize>) -> Result<Self, BddError> {
        FeatureOrdering::new(v)
    }
}

impl From<FeatureOrdering> for Vec<usize> {
    fn from(o: FeatureOrdering) -> Vec<usize> {
        o.0
    }
}

fn halves_differ(s: &str) -> bool {
    let half = s.len() / 2;
    s.len() == 1 || s[..half] != s[half..]
}

/// True iff `s` is a bead: a single cell, or a string whose halves differ.
pub fn is_bead(s: &str) -> Result<bool, BddError> {
    order_of(s.len()).ok_or(BddError::NotPowerOfTwo(s.len()))?;
    Ok(halves_differ(s))
}

/// All recursive halves of `t`, including `t` itself.
pub fn subtables(t: &str) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    let mut level = vec![t];
    while !level.is_empty() {
        let mut next = Vec::new();
        for s in level {
            if out.insert(s.to_owned()) && s.len() > 1 {
                let (a, b) = s.split_at(s.len() / 2);
                next.push(a);
                next.push(b);
            }
        }
        level = next;
    }
    out
}

/// Beads of a table, each with the 1-based level of its shallowest occurrence.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BeadSet(BTreeMap<String, usize>);

impl BeadSet {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, s: &str) -> bool {
        self.0.contains_key(s)
    }

    pub fn level(&self, s: &str) -> Option<usize> {
        self.0.get(s).copied()
    }

    pub fn strings(&self) -> BTreeSet<&str> {
        self.0.keys().map(String::as_str).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, usize)> {
        self.0.iter().map(|(s, &l)| (s.as_str(), l))
    }
}

pub fn beads(t: &TruthTable) -> BeadSet {
    let mut out = BTreeMap::new();
    let mut level = vec![t.as_str()];
    let mut depth = 1;
    while !level.is_empty() {
        let mut next = Vec::new();
        for s in level {
            if halves_differ(s) {
                out.entry(s.to_owned()).or_insert(depth);
            }
            if s.len() > 1 {
                let (a, b) = s.split_at(s.len() / 2);
                next.push(a);
                next.push(b);
            }
        }
        next.sort_unstable();
        next.dedup();
        level = next;
        depth += 1;
    }
    BeadSet(out)
}

/// Id of the sink holding 1.
pub const SINK_ONE: i32 = -1;
/// Id of the sink holding 0.
pub const SINK_ZERO: i32 = -2;

pub fn sink_id(value: bool) -> i32 {
    if value {
        SINK_ONE
    } else {
        SINK_ZERO
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BddNode {
    /// Decision node testing the feature at 1-based `level` of the ordering.
    Branch {
        id: i32,
        level: usize,
    },
    Sink {
        id: i32,
        value: bool,
    },
}

impl BddNode {
    pub fn id(&self) -> i32 {
        match *self {
            BddNode::Branch { id, .. } | BddNode::Sink { id, .. } => id,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BddEdge {
    pub parent: i32,
    pub child: i32,
    pub direction: Direction,
}

/// A binary decision diagram as lists of nodes and edges.
///
/// Branch ids are `1..`; the two sinks use [`SINK_ONE`] and [`SINK_ZERO`]
/// and are always listed, used or not.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bdd {
    pub nodes: Vec<BddNode>,
    pub edges: Vec<BddEdge>,
    pub root: i32,
    pub ordering: FeatureOrdering,
}

/// Builds the reduced ordered BDD of `t` over `ordering`.
///
/// Breadth-first over subtables: a multi-cell bead becomes a node the first
/// time its string is seen and both halves are queued; a constant non-bead
/// is wired to its sink; any other non-bead `αα` skips its level by
/// queueing `α` with the same parent.
pub fn gen_bdd(t: &TruthTable, ordering: &FeatureOrdering) -> Result<Bdd, BddError> {
    if t.order() != ordering.len() {
        return Err(BddError::OrderMismatch {
            table: t.order(),
            ordering: ordering.len(),
        });
    }
    let mut nodes = vec![
        BddNode::Sink {
            id: SINK_ONE,
            value: true,
        },
        BddNode::Sink {
            id: SINK_ZERO,
            value: false,
        },
    ];
    let mut edges = Vec::new();
    let mut seen: HashMap<&str, i32> = HashMap::new();
    let mut root = None;
    let mut queue: VecDeque<(&str, i32, usize, Option<Direction>)> = VecDeque::new();
    queue.push_back((t.as_str(), 0, 1, None));

    let mut wire = |edges: &mut Vec<BddEdge>, parent: i32, child: i32, dir: Option<Direction>| {
        if parent >= 1 {
            edges.push(BddEdge {
                parent,
                child,
                direction: dir.expect("non-root items carry a direction"),
            });
        } else {
            root = Some(child);
        }
    };

    while let Some((s, parent, level, dir)) = queue.pop_front() {
        if s.len() > 1 && halves_differ(s) {
            let fresh = !seen.contains_key(s);
            if fresh {
                let id = seen.len() as i32 + 1;
                seen.insert(s, id);
                nodes.push(BddNode::Branch { id, level });
            }
            let id = seen[s];
            wire(&mut edges, parent, id, dir);
            if fresh {
                let (a, b) = s.split_at(s.len() / 2);
                queue.push_back((a, id, level + 1, Some(Direction::Left)));
                queue.push_back((b, id, level + 1, Some(Direction::Right)));
            }
        } else if s.bytes().all(|b| b == b'0') {
            wire(&mut edges, parent, SINK_ZERO, dir);
        } else if s.bytes().all(|b| b == b'1') {
            wire(&mut edges, parent, SINK_ONE, dir);
        } else {
            queue.push_back((&s[..s.len() / 2], parent, level + 1, dir));
        }
    }
    Ok(Bdd {
        nodes,
        edges,
        root: root.expect("the root item is always wired"),
        ordering: ordering.clone(),
    })
}

/// 0-based truth-table cell reached by `example` under `ordering`.
pub fn cell_index(ordering: &FeatureOrdering, example: &[bool]) -> usize {
    ordering
        .features()
        .iter()
        .fold(0, |j, &r| (j << 1) | usize::from(example[r]))
}

/// Label the table assigns to `example` (a full feature vector).
pub fn classify_table(t: &TruthTable, ordering: &FeatureOrdering, example: &[bool]) -> bool {
    t.cell(cell_index(ordering, example))
}

impl Bdd {
    pub fn branch_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, BddNode::Branch { .. }))
            .count()
    }

    fn sink_used(&self, id: i32) -> bool {
        self.root == id || self.edges.iter().any(|e| e.child == id)
    }

    /// Branch nodes plus the sinks that are actually reached.
    pub fn node_count(&self) -> usize {
        self.branch_count()
            + usize::from(self.sink_used(SINK_ONE))
            + usize::from(self.sink_used(SINK_ZERO))
    }

    fn node(&self, id: i32) -> Option<&BddNode> {
        self.nodes.iter().find(|n| n.id() == id)
    }

    fn level_of(&self, id: i32) -> Option<usize> {
        match self.node(id)? {
            BddNode::Branch { level, .. } => Some(*level),
            BddNode::Sink { .. } => None,
        }
    }

    /// Left and right child of every branch node, keyed by id.
    pub fn children(&self) -> Result<HashMap<i32, (i32, i32)>, BddError> {
        let mut left = HashMap::new();
        let mut right = HashMap::new();
        for e in &self.edges {
            let slot = match e.direction {
                Direction::Left => &mut left,
                Direction::Right => &mut right,
            };
            if slot.insert(e.parent, e.child).is_some() {
                return Err(BddError::Malformed(format!(
                    "node {} has two {:?} edges",
                    e.parent, e.direction
                )));
            }
        }
        let mut out = HashMap::new();
        for n in &self.nodes {
            if let BddNode::Branch { id, .. } = *n {
                match (left.get(&id), right.get(&id)) {
                    (Some(&l), Some(&r)) => {
                        out.insert(id, (l, r));
                    }
                    _ => {
                        return Err(BddError::Malformed(format!(
                            "node {id} lacks a left or right edge"
                        )))
                    }
                }
            }
        }
        Ok(out)
    }

    /// Walks from the root, going left on 0 and right on 1.
    pub fn classify(&self, example: &[bool]) -> Result<bool, BddError> {
        self.classifier()?.classify(example)
    }

    /// A reusable evaluator that indexes the edges once.
    pub fn classifier(&self) -> Result<Classifier<'_>, BddError> {
        Ok(Classifier {
            bdd: self,
            children: self.children()?,
        })
    }

    /// Checks the structural invariants: single root, exactly two children
    /// per branch node, strictly increasing levels along edges (hence
    /// acyclic), no redundant test, and no two isomorphic branch nodes.
    pub fn audit(&self) -> Result<(), BddError> {
        let bad = |m: String| Err(BddError::Malformed(m));
        let children = self.children()?;
        let mut ids = BTreeSet::new();
        for n in &self.nodes {
            if !ids.insert(n.id()) {
                return bad(format!("duplicate node id {}", n.id()));
            }
            if let BddNode::Branch { level, .. } = *n {
                if level == 0 || level > self.ordering.len() {
                    return bad(format!("node {} has level {level} out of range", n.id()));
                }
            }
        }
        if self.node(self.root).is_none() {
            return bad(format!("root {} is not a node", self.root));
        }
        for e in &self.edges {
            let (Some(pl), Some(child)) = (self.level_of(e.parent), self.node(e.child)) else {
                return bad(format!(
                    "edge {} -> {} has a bad endpoint",
                    e.parent, e.child
                ));
            };
            if let BddNode::Branch { level, .. } = *child {
                if level <= pl {
                    return bad(format!(
                        "edge {} -> {} is not ordered ({pl} >= {level})",
                        e.parent, e.child
                    ));
                }
            }
        }
        for (&id, &(l, r)) in &children {
            if l == r {
                return bad(format!("node {id} has identical children"));
            }
        }
        // Reachability from the root.
        let mut reached = BTreeSet::from([self.root]);
        let mut stack = vec![self.root];
        while let Some(id) = stack.pop() {
            if let Some(&(l, r)) = children.get(&id) {
                for c in [l, r] {
                    if reached.insert(c) {
                        stack.push(c);
                    }
                }
            }
        }
        if let Some(n) = self
            .nodes
            .iter()
            .find(|n| matches!(n, BddNode::Branch { .. }) && !reached.contains(&n.id()))
        {
            return bad(format!("node {} is unreachable from the root", n.id()));
        }
        // Isomorphism: canonical keys bottom-up by decreasing level.
        let mut branches: Vec<(usize, i32)> = self
            .nodes
            .iter()
            .filter_map(|n| match *n {
                BddNode::Branch { id, level } => Some((level, id)),
                BddNode::Sink { .. } => None,
            })
            .collect();
        branches.sort_unstable_by(|a, b| b.cmp(a));
        let mut canon: HashMap<i32, usize> = HashMap::from([(SINK_ONE, 1), (SINK_ZERO, 0)]);
        let mut interned: HashMap<(usize, usize, usize), i32> = HashMap::new();
        for (level, id) in branches {
            let (l, r) = children[&id];
            let key = (level, canon[&l], canon[&r]);
            if let Some(other) = interned.insert(key, id) {
                return bad(format!("nodes {other} and {id} are isomorphic"));
            }
            canon.insert(id, canon.len());
        }
        Ok(())
    }

    /// Graphviz rendering: dashed edges go left (0), solid edges right (1).
    /// `names[r]` labels feature `r`; levels without a name print as `x<level>`.
    pub fn to_dot(&self, names: &[String]) -> String {
        let mut out = String::from("digraph bdd {\n");
        for n in &self.nodes {
            match *n {
                BddNode::Branch { id, level } => {
                    let label = names
                        .get(self.ordering.at_level(level))
                        .cloned()
                        .unwrap_or_else(|| format!("x{level}"));
                    out.push_str(&format!(
                        "  n{id} [label=\"{}\", shape=circle];\n",
                        label.replace('"', "\\\"")
                    ));
                }
                BddNode::Sink { id, value } => {
                    if self.sink_used(id) {
                        out.push_str(&format!(
                            "  {} [label=\"{}\", shape=box];\n",
                            dot_id(id),
                            u8::from(value)
                        ));
                    }
                }
            }
        }
        for e in &self.edges {
            let style = match e.direction {
                Direction::Left => " [style=dashed]",
                Direction::Right => "",
            };
            out.push_str(&format!(
                "  {} -> {}{style};\n",
                dot_id(e.parent),
                dot_id(e.child)
            ));
        }
        out.push_str("}\n");
        out
    }
}

fn dot_id(id: i32) -> String {
    match id {
        SINK_ONE => "sink1".to_owned(),
        SINK_ZERO => "sink0".to_owned(),
        _ => format!("n{id}"),
    }
}

/// Indexed view of a [`Bdd`] for repeated classification.
pub struct Classifier<'a> {
    bdd: &'a Bdd,
    children: HashMap<i32, (i32, i32)>,
}

impl Classifier<'_> {
    pub fn classify(&self, example: &[bool]) -> Result<bool, BddError> {
        let mut id = self.bdd.root;
        loop {
            match id {
                SINK_ONE => return Ok(true),
                SINK_ZERO => return Ok(false),
                _ => {}
            }
            let level = self
                .bdd
                .level_of(id)
                .ok_or_else(|| BddError::Malformed(format!("unknown node {id}")))?;
            let &(l, r) = self
                .children
                .get(&id)
                .ok_or_else(|| BddError::Malformed(format!("node {id} has no edges")))?;
            let feature = self.bdd.ordering.at_level(level);
            let bit = *example.get(feature).ok_or(BddError::ShortExample {
                have: example.len(),
                need: feature,
            })?;
            id = if bit { r } else { l };
        }
    }
}

//! Learning optimal binary decision diagrams from binary-labelled data by
//! reduction to SAT and MaxSAT.
//!
//! The pipeline: [`data`] loads and binarizes examples, [`encode`] builds a
//! CNF or weighted CNF whose models are (feature ordering, truth table)
//! pairs, [`solve`] finds models, [`bdd`] turns a truth table into a reduced
//! ordered BDD, [`postprocess`] reassigns cells no example reaches, and
//! [`search`] ties everything together.

pub mod bdd;
pub mod cnf;
pub mod data;
pub mod encode;
pub mod postprocess;
pub mod search;
pub mod solve;

pub use bdd::{gen_bdd, Bdd, FeatureOrdering, TruthTable};
pub use cnf::{Formula, Lit, Model, Var};
pub use data::{load_csv, one_hot_binarize, Dataset};
pub use encode::{encode_bdd1, encode_bdd2, encode_maxsat, EncodingContext, Variant};
pub use postprocess::BiasPolicy;
pub use search::{learn, min_depth, LearnConfig, LearnedModel};
pub use solve::{maxsat_solve, sat_solve, SolveOptions};

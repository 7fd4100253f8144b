//! Dataset ingestion, one-hot binarization and train/test splitting.
//!
//! Rows are examples, columns are binary features. Indices are 0-based
//! throughout: example `q` of a [`Dataset`] is row `q`, feature `r` is
//! column `r`.

use std::collections::{BTreeSet, HashMap};
use std::io::Read;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised while loading, binarizing or splitting data.
#[derive(Error, Debug)]
pub enum DataError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("empty dataset")]
    Empty,
    #[error("missing label column {0:?}")]
    MissingLabel(String),
    /// 1-based data row (the header is not counted).
    #[error("ragged row {row}: expected {expected} cells, found {found}")]
    Ragged {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("label column {column:?} must have exactly two distinct values, found {found}")]
    LabelNotBinary { column: String, found: usize },
    #[error("unknown label value {0:?}")]
    UnknownLabel(String),
    #[error("missing column {0:?} required by feature schema")]
    MissingColumn(String),
    #[error("invalid split ratio {0}: must lie strictly between 0 and 1")]
    BadRatio(f64),
    #[error("split ratio {ratio} over {examples} examples leaves an empty side")]
    DegenerateSplit { ratio: f64, examples: usize },
    #[error("invalid fold count {k} for {examples} examples")]
    BadFoldCount { k: usize, examples: usize },
    #[error("{0}")]
    Shape(String),
}

/// A CSV file as strings, before binarization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub label_column: usize,
}

impl RawTable {
    pub fn from_reader<R: Read>(reader: R, label_column: &str) -> Result<Self, DataError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let columns: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
        if columns.iter().all(String::is_empty) {
            return Err(DataError::Empty);
        }
        let label = columns
            .iter()
            .position(|c| c == label_column)
            .ok_or_else(|| DataError::MissingLabel(label_column.to_owned()))?;
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() != columns.len() {
                return Err(DataError::Ragged {
                    row: i + 1,
                    expected: columns.len(),
                    found: rec.len(),
                });
            }
            rows.push(rec.iter().map(str::to_owned).collect());
        }
        if rows.is_empty() {
            return Err(DataError::Empty);
        }
        Ok(RawTable {
            columns,
            rows,
            label_column: label,
        })
    }

    pub fn label_name(&self) -> &str {
        &self.columns[self.label_column]
    }

    /// Distinct values of a column in lexicographic order.
    pub fn distinct(&self, column: usize) -> Vec<String> {
        let set: BTreeSet<&str> = self.rows.iter().map(|r| r[column].as_str()).collect();
        set.into_iter().map(str::to_owned).collect()
    }
}

/// Reads a comma-separated file whose first row is a header.
pub fn load_csv(path: impl AsRef<Path>, label_column: &str) -> Result<RawTable, DataError> {
    let file = std::fs::File::open(path)?;
    RawTable::from_reader(std::io::BufReader::new(file), label_column)
}

/// Where a binary feature comes from: it is 1 on rows whose `column` cell equals `value`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Feature {
    pub name: String,
    pub column: String,
    pub value: String,
}

impl Feature {
    /// A feature read from an already-binary `0`/`1` column.
    pub fn named(name: impl Into<String>) -> Self {
        let name = name.into();
        Feature {
            column: name.clone(),
            name,
            value: "1".to_owned(),
        }
    }

    fn indicator(column: &str, value: &str) -> Self {
        Feature {
            name: format!("{column}={value}"),
            column: column.to_owned(),
            value: value.to_owned(),
        }
    }
}

/// Binary feature matrix with binary labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dataset {
    features: Vec<Feature>,
    /// Row-major `examples × features` bits.
    values: Vec<bool>,
    labels: Vec<bool>,
    /// Raw label strings for class 0 and class 1.
    label_values: [String; 2],
}

impl Dataset {
    pub fn new(
        features: Vec<Feature>,
        rows: Vec<Vec<bool>>,
        labels: Vec<bool>,
    ) -> Result<Self, DataError> {
        if rows.len() != labels.len() {
            return Err(DataError::Shape(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        let k = features.len();
        let mut values = Vec::with_capacity(rows.len() * k);
        for (q, row) in rows.iter().enumerate() {
            if row.len() != k {
                return Err(DataError::Ragged {
                    row: q + 1,
                    expected: k,
                    found: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        Ok(Dataset {
            features,
            values,
            labels,
            label_values: ["0".to_owned(), "1".to_owned()],
        })
    }

    /// Builds a dataset from 0/1 rows, naming features `f1..fK`.
    pub fn from_bits(rows: &[&[u8]], labels: &[u8]) -> Result<Self, DataError> {
        let k = rows.first().map_or(0, |r| r.len());
        let features = (1..=k).map(|r| Feature::named(format!("f{r}"))).collect();
        let rows = rows
            .iter()
            .map(|r| r.iter().map(|&b| b != 0).collect())
            .collect();
        Dataset::new(features, rows, labels.iter().map(|&b| b != 0).collect())
    }

    pub fn with_label_values(mut self, negative: String, positive: String) -> Self {
        self.label_values = [negative, positive];
        self
    }

    /// Number of examples `M`.
    pub fn num_examples(&self) -> usize {
        self.labels.len()
    }

    /// Number of binary features `K`.
    pub fn num_features(&self) -> usize {
        self.features.len()
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn feature_names(&self) -> Vec<&str> {
        self.features.iter().map(|f| f.name.as_str()).collect()
    }

    pub fn label_values(&self) -> &[String; 2] {
        &self.label_values
    }

    /// Value of feature `r` on example `q`.
    #[inline]
    pub fn value(&self, q: usize, r: usize) -> bool {
        self.values[q * self.features.len() + r]
    }

    pub fn row(&self, q: usize) -> &[bool] {
        let k = self.features.len();
        &self.values[q * k..(q + 1) * k]
    }

    #[inline]
    pub fn label(&self, q: usize) -> bool {
        self.labels[q]
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn positives(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.num_examples()).filter(|&q| self.labels[q])
    }

    pub fn negatives(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.num_examples()).filter(|&q| !self.labels[q])
    }

    pub fn count_positive(&self) -> usize {
        self.labels.iter().filter(|&&l| l).count()
    }

    /// The single label carried by every example, if there is one.
    pub fn single_class(&self) -> Option<bool> {
        let first = *self.labels.first()?;
        self.labels.iter().all(|&l| l == first).then_some(first)
    }

    /// Sub-dataset made of the given examples, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Dataset {
        let mut values = Vec::with_capacity(indices.len() * self.num_features());
        for &q in indices {
            values.extend_from_slice(self.row(q));
        }
        Dataset {
            features: self.features.clone(),
            values,
            labels: indices.iter().map(|&q| self.labels[q]).collect(),
            label_values: self.label_values.clone(),
        }
    }

    /// Sub-dataset keeping only the given feature columns, in the given order.
    pub fn select_features(&self, columns: &[usize]) -> Dataset {
        let mut values = Vec::with_capacity(self.num_examples() * columns.len());
        for q in 0..self.num_examples() {
            values.extend(columns.iter().map(|&r| self.value(q, r)));
        }
        Dataset {
            features: columns.iter().map(|&r| self.features[r].clone()).collect(),
            values,
            labels: self.labels.clone(),
            label_values: self.label_values.clone(),
        }
    }

    /// Binarizes `raw` against an existing feature schema, e.g. a test file
    /// evaluated with the features a model was trained on.
    pub fn from_raw_with_schema(
        raw: &RawTable,
        features: &[Feature],
        label_values: &[String; 2],
    ) -> Result<Dataset, DataError> {
        let cols = features
            .iter()
            .map(|f| {
                raw.columns
                    .iter()
                    .position(|c| *c == f.column)
                    .ok_or_else(|| DataError::MissingColumn(f.column.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut values = Vec::with_capacity(raw.rows.len() * features.len());
        let mut labels = Vec::with_capacity(raw.rows.len());
        for row in &raw.rows {
            for (f, &c) in features.iter().zip(&cols) {
                values.push(row[c] == f.value);
            }
            let label = &row[raw.label_column];
            labels.push(if *label == label_values[1] {
                true
            } else if *label == label_values[0] {
                false
            } else {
                return Err(DataError::UnknownLabel(label.clone()));
            });
        }
        Ok(Dataset {
            features: features.to_vec(),
            values,
            labels,
            label_values: label_values.clone(),
        })
    }

    /// Writes the dataset as a 0/1 CSV with the label as last column.
    pub fn write_csv<W: std::io::Write>(&self, out: W, label_name: &str) -> Result<(), DataError> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<&str> = self.feature_names();
        header.push(label_name);
        w.write_record(&header)?;
        for q in 0..self.num_examples() {
            let mut rec: Vec<&str> = self
                .row(q)
                .iter()
                .map(|&b| if b { "1" } else { "0" })
                .collect();
            rec.push(if self.labels[q] { "1" } else { "0" });
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// One-hot binarization of every non-label column.
///
/// A column with more than two distinct values becomes one indicator per
/// value. A two-valued column becomes a single feature that is 1 on the
/// lexicographically larger value; a column whose values are exactly
/// `{0, 1}` keeps its own name. A constant column yields one all-ones
/// indicator. The lexicographically smaller label maps to class 0.
pub fn one_hot_binarize(raw: &RawTable) -> Result<Dataset, DataError> {
    let label_vals = raw.distinct(raw.label_column);
    if label_vals.len() != 2 {
        return Err(DataError::LabelNotBinary {
            column: raw.label_name().to_owned(),
            found: label_vals.len(),
        });
    }
    let mut features = Vec::new();
    let mut sources = Vec::new();
    for (c, name) in raw.columns.iter().enumerate() {
        if c == raw.label_column {
            continue;
        }
        let vals = raw.distinct(c);
        if vals.len() == 2 {
            let hi = &vals[1];
            let feature = if vals[0] == "0" && vals[1] == "1" {
                Feature {
                    name: name.clone(),
                    column: name.clone(),
                    value: hi.clone(),
                }
            } else {
                Feature::indicator(name, hi)
            };
            features.push(feature);
            sources.push(c);
        } else {
            for v in &vals {
                features.push(Feature::indicator(name, v));
                sources.push(c);
            }
        }
    }
    let k = features.len();
    let mut values = Vec::with_capacity(raw.rows.len() * k);
    for row in &raw.rows {
        for (f, &c) in features.iter().zip(&sources) {
            values.push(row[c] == f.value);
        }
    }
    let labels = raw
        .rows
        .iter()
        .map(|row| row[raw.label_column] == label_vals[1])
        .collect();
    let [neg, pos]: [String; 2] = label_vals.try_into().expect("two label values");
    Ok(Dataset {
        features,
        values,
        labels,
        label_values: [neg, pos],
    })
}

/// Disjoint train/test index lists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub seed: u64,
}

fn shuffled(m: usize, seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..m).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    idx
}

/// Hold-out split with `round(ratio·M)` training examples.
pub fn split_holdout(d: &Dataset, ratio: f64, seed: u64) -> Result<Split, DataError> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(DataError::BadRatio(ratio));
    }
    let m = d.num_examples();
    let n_train = (ratio * m as f64).round() as usize;
    if n_train == 0 || n_train >= m {
        return Err(DataError::DegenerateSplit { ratio, examples: m });
    }
    let idx = shuffled(m, seed);
    let mut train = idx[..n_train].to_vec();
    let mut test = idx[n_train..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    Ok(Split { train, test, seed })
}

/// Shuffled k-fold partition; the first `M mod k` folds get one extra example.
pub fn kfold(d: &Dataset, k: usize, seed: u64) -> Result<Vec<Split>, DataError> {
    let m = d.num_examples();
    if k < 2 || k > m {
        return Err(DataError::BadFoldCount { k, examples: m });
    }
    let idx = shuffled(m, seed);
    let (base, extra) = (m / k, m % k);
    let mut splits = Vec::with_capacity(k);
    let mut start = 0;
    for fold in 0..k {
        let size = base + usize::from(fold < extra);
        let mut test = idx[start..start + size].to_vec();
        let mut train: Vec<usize> = idx[..start]
            .iter()
            .chain(&idx[start + size..])
            .copied()
            .collect();
        test.sort_unstable();
        train.sort_unstable();
        splits.push(Split { train, test, seed });
        start += size;
    }
    Ok(splits)
}

/// Groups of examples that share a feature vector but carry both labels.
///
/// Groups are listed by their smallest index; each group is sorted.
pub fn check_consistency(d: &Dataset) -> Vec<Vec<usize>> {
    let mut groups: HashMap<&[bool], Vec<usize>> = HashMap::new();
    for q in 0..d.num_examples() {
        groups.entry(d.row(q)).or_default().push(q);
    }
    let mut conflicts: Vec<Vec<usize>> = groups
        .into_values()
        .filter(|g| {
            let pos = g.iter().filter(|&&q| d.label(q)).count();
            pos > 0 && pos < g.len()
        })
        .collect();
    conflicts.sort_unstable_by_key(|g| g[0]);
    conflicts
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) const RUNNING_EXAMPLE_CSV: &str = "f1,f2,f3,f4,label
1,0,1,0,0
1,0,0,1,0
0,0,1,0,1
1,1,0,0,0
0,0,0,1,1
1,1,1,1,0
0,1,1,0,0
0,0,1,1,1
";

    fn raw(text: &str, label: &str) -> Result<RawTable, DataError> {
        RawTable::from_reader(text.as_bytes(), label)
    }

    #[test]
    fn loads_running_example() {
        let t = raw(RUNNING_EXAMPLE_CSV, "label").unwrap();
        assert_eq!(t.rows.len(), 8);
        assert_eq!(t.columns.len(), 5);
        assert_eq!(t.label_column, 4);
    }

    #[test]
    fn empty_body_is_rejected() {
        let err = raw("a,b,label\n", "label").unwrap_err();
        assert_eq!(err.to_string(), "empty dataset");
        assert!(matches!(
            raw("", "label"),
            Err(DataError::Empty | DataError::MissingLabel(_))
        ));
    }

    #[test]
    fn ragged_row_is_reported_with_its_number() {
        let text = "a,b,c,d,label\n0,0,0,0,1\n1,1,1,1,0\n1,0,1\n";
        let err = raw(text, "label").unwrap_err();
        assert!(err.to_string().starts_with("ragged row 3"), "{err}");
    }

    #[test]
    fn missing_label_column() {
        assert!(matches!(
            raw("a,b\n0,1\n", "label"),
            Err(DataError::MissingLabel(_))
        ));
    }

    #[test]
    fn cells_are_trimmed() {
        let t = raw("a , label\n x ,1\ny, 0\n", "label").unwrap();
        assert_eq!(t.columns, vec!["a", "label"]);
        assert_eq!(t.rows[0], vec!["x", "1"]);
    }

    #[test]
    fn three_valued_column_becomes_three_indicators() {
        let t = raw("col,label\na,0\nb,1\nc,0\na,1\n", "label").unwrap();
        let d = one_hot_binarize(&t).unwrap();
        assert_eq!(d.num_features(), 3);
        assert_eq!(d.feature_names(), vec!["col=a", "col=b", "col=c"]);
        let rows: Vec<Vec<bool>> = (0..4).map(|q| d.row(q).to_vec()).collect();
        assert_eq!(
            rows,
            vec![
                vec![true, false, false],
                vec![false, true, false],
                vec![false, false, true],
                vec![true, false, false],
            ]
        );
    }

    #[test]
    fn binary_column_passes_through() {
        let t = raw("x,label\n0,a\n1,b\n1,a\n0,b\n", "label").unwrap();
        let d = one_hot_binarize(&t).unwrap();
        assert_eq!(d.num_features(), 1);
        assert_eq!(d.feature_names(), vec!["x"]);
        let col: Vec<bool> = (0..4).map(|q| d.value(q, 0)).collect();
        assert_eq!(col, vec![false, true, true, false]);
        // "a" < "b" lexicographically, so "a" is class 0.
        assert_eq!(d.labels(), &[false, true, false, true]);
        assert_eq!(d.label_values(), &["a".to_owned(), "b".to_owned()]);
    }

    #[test]
    fn two_valued_non_numeric_column_is_named_by_its_larger_value() {
        let t = raw("colour,label\nred,0\nblue,1\n", "label").unwrap();
        let d = one_hot_binarize(&t).unwrap();
        assert_eq!(d.feature_names(), vec!["colour=red"]);
        assert_eq!((d.value(0, 0), d.value(1, 0)), (true, false));
    }

    #[test]
    fn running_example_binarizes_to_m8_k4() {
        let d = one_hot_binarize(&raw(RUNNING_EXAMPLE_CSV, "label").unwrap()).unwrap();
        assert_eq!((d.num_examples(), d.num_features()), (8, 4));
        assert_eq!(d.count_positive(), 3);
        assert!(d.row(0) == [true, false, true, false]);
    }

    #[test]
    fn non_binary_label_is_rejected() {
        let t = raw("a,label\n0,x\n1,y\n1,z\n", "label").unwrap();
        assert!(matches!(
            one_hot_binarize(&t),
            Err(DataError::LabelNotBinary { found: 3, .. })
        ));
    }

    #[test]
    fn schema_binarization_matches_training_binarization() {
        let t = raw("col,b,label\na,0,n\nb,1,p\nc,0,n\n", "label").unwrap();
        let d = one_hot_binarize(&t).unwrap();
        let again = Dataset::from_raw_with_schema(&t, d.features(), d.label_values()).unwrap();
        assert_eq!(d, again);
        let unseen = raw("col,b,label\nz,1,q\n", "label").unwrap();
        assert!(matches!(
            Dataset::from_raw_with_schema(&unseen, d.features(), d.label_values()),
            Err(DataError::UnknownLabel(_))
        ));
    }

    fn dataset(m: usize) -> Dataset {
        let rows: Vec<Vec<u8>> = (0..m).map(|q| vec![(q % 2) as u8]).collect();
        let refs: Vec<&[u8]> = rows.iter().map(Vec::as_slice).collect();
        let labels: Vec<u8> = (0..m).map(|q| (q % 2) as u8).collect();
        Dataset::from_bits(&refs, &labels).unwrap()
    }

    #[test]
    fn holdout_sizes_and_determinism() {
        let d = dataset(8);
        let s = split_holdout(&d, 0.25, 1).unwrap();
        assert_eq!((s.train.len(), s.test.len()), (2, 6));
        assert_eq!(s, split_holdout(&d, 0.25, 1).unwrap());
        assert!(split_holdout(&d, 0.0, 1).is_err());
        assert!(split_holdout(&d, 1.0, 1).is_err());
        assert!(matches!(
            split_holdout(&d, 0.01, 1),
            Err(DataError::DegenerateSplit { .. })
        ));
    }

    #[test]
    fn kfold_sizes() {
        let folds = kfold(&dataset(10), 5, 3).unwrap();
        assert!(folds
            .iter()
            .all(|f| f.test.len() == 2 && f.train.len() == 8));
        let sizes: Vec<usize> = kfold(&dataset(8), 5, 3)
            .unwrap()
            .iter()
            .map(|f| f.test.len())
            .collect();
        assert_eq!(sizes, vec![2, 2, 2, 1, 1]);
        assert!(kfold(&dataset(8), 1, 0).is_err());
        assert!(kfold(&dataset(3), 4, 0).is_err());
    }

    #[test]
    fn consistency_groups() {
        let t1 = one_hot_binarize(&raw(RUNNING_EXAMPLE_CSV, "label").unwrap()).unwrap();
        assert!(check_consistency(&t1).is_empty());
        let conflict = Dataset::from_bits(&[&[0, 0], &[0, 0]], &[1, 0]).unwrap();
        assert_eq!(check_consistency(&conflict), vec![vec![0, 1]]);
        let dup = Dataset::from_bits(&[&[0, 1], &[0, 1]], &[1, 1]).unwrap();
        assert!(check_consistency(&dup).is_empty());
    }

    proptest! {
        #[test]
        fn kfold_test_sets_partition(m in 2usize..40, k_raw in 2usize..10, seed in any::<u64>()) {
            let k = k_raw.min(m);
            let d = dataset(m);
            let folds = kfold(&d, k, seed).unwrap();
            let mut all: Vec<usize> = folds.iter().flat_map(|f| f.test.clone()).collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..m).collect::<Vec<_>>());
            let sizes: Vec<usize> = folds.iter().map(|f| f.test.len()).collect();
            prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
            for f in &folds {
                prop_assert_eq!(f.train.len() + f.test.len(), m);
                prop_assert!(f.train.iter().all(|q| !f.test.contains(q)));
            }
            prop_assert_eq!(folds, kfold(&d, k, seed).unwrap());
        }

        #[test]
        fn one_hot_rows_have_one_indicator_per_multivalued_column(
            cells in proptest::collection::vec((0u8..4, 0u8..2), 1..30)
        ) {
            let mut text = String::from("c,label\n");
            for (v, l) in &cells {
                text.push_str(&format!("v{v},{l}\n"));
            }
            let t = raw(&text, "label").unwrap();
            let distinct = t.distinct(0).len();
            let labels = t.distinct(1).len();
            prop_assume!(labels == 2 && distinct > 2);
            let d = one_hot_binarize(&t).unwrap();
            for q in 0..d.num_examples() {
                prop_assert_eq!(d.row(q).iter().filter(|&&b| b).count(), 1);
            }
        }

        #[test]
        fn consistency_iff_labels_are_a_function(
            rows in proptest::collection::vec((0u8..4, 0u8..2), 1..20)
        ) {
            let bits: Vec<Vec<u8>> = rows.iter().map(|(v, _)| vec![v & 1, v >> 1]).collect();
            let refs: Vec<&[u8]> = bits.iter().map(Vec::as_slice).collect();
            let labels: Vec<u8> = rows.iter().map(|(_, l)| *l).collect();
            let d = Dataset::from_bits(&refs, &labels).unwrap();
            let mut seen: HashMap<u8, u8> = HashMap::new();
            let functional = rows.iter().all(|(v, l)| *seen.entry(*v).or_insert(*l) == *l);
            prop_assert_eq!(check_consistency(&d).is_empty(), functional);
        }
    }
}

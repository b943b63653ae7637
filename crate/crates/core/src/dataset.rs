//! Binary classification datasets.
//!
//! Datasets are read from plain comma-separated files. The label column holds
//! raw strings (`M`/`R`, `tested_positive`, `1`/`2`, ...) that a
//! [`LabelMapping`] encodes to `{0, 1}`; label `1` is the positive class for
//! the F-measure. An optional header row is detected automatically: the first
//! row is a header when any of its feature cells is not a number.
//!
//! Missing cells are rejected. Features are scaled column-wise to `[0, 1]`
//! with [`Dataset::normalize_min_max`] before any training.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::Matrix;
use crate::seed;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0} contains no data rows")]
    Empty(String),
    #[error("row {row}: {found} cells, expected {expected}")]
    Ragged { row: usize, expected: usize, found: usize },
    #[error("row {row}, column {column}: missing value")]
    Missing { row: usize, column: usize },
    #[error("row {row}, column {column}: {value:?} is not a number")]
    NonNumeric { row: usize, column: usize, value: String },
    #[error("row {row}, column {column}: non-finite value {value:?}")]
    NonFinite { row: usize, column: usize, value: String },
    #[error("row {row}: label {value:?} has no entry in the label mapping")]
    UnmappedLabel { row: usize, value: String },
    #[error("label mapping sends {raw:?} to {encoded}; only 0 and 1 are allowed")]
    InvalidEncoding { raw: String, encoded: u8 },
    #[error("label column {0} not found")]
    LabelColumnNotFound(String),
    #[error("{features} feature rows but {labels} labels")]
    LengthMismatch { features: usize, labels: usize },
    #[error("label {0} is not 0 or 1")]
    InvalidLabel(u8),
    #[error("k = {k} folds is invalid for {instances} instances (need 2 <= k <= instances)")]
    InvalidFolds { k: usize, instances: usize },
}

/// Which CSV column holds the class label.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelColumn {
    #[default]
    Last,
    Index(usize),
    Name(String),
}

/// Raw label string to `{0, 1}`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LabelMapping(BTreeMap<String, u8>);

impl LabelMapping {
    pub fn from_pairs<S: Into<String>>(pairs: impl IntoIterator<Item = (S, u8)>) -> Self {
        Self(pairs.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }

    pub fn encode(&self, raw: &str) -> Option<u8> {
        self.0.get(raw).copied()
    }

    /// The raw label that encodes to `value`, if exactly one does.
    pub fn decode(&self, value: u8) -> Option<&str> {
        let mut hits = self.0.iter().filter(|(_, &v)| v == value);
        match (hits.next(), hits.next()) {
            (Some((raw, _)), None) => Some(raw.as_str()),
            _ => None,
        }
    }

    fn validate(&self) -> Result<(), DatasetError> {
        match self.0.iter().find(|(_, &v)| v > 1) {
            Some((raw, &encoded)) => Err(DatasetError::InvalidEncoding { raw: raw.clone(), encoded }),
            None => Ok(()),
        }
    }
}

/// Feature matrix plus binary labels. Immutable once built; every
/// transformation returns a new value.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    features: Matrix,
    labels: Vec<u8>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, features: Matrix, labels: Vec<u8>) -> Result<Self, DatasetError> {
        if features.rows() != labels.len() {
            return Err(DatasetError::LengthMismatch { features: features.rows(), labels: labels.len() });
        }
        if let Some(&bad) = labels.iter().find(|&&l| l > 1) {
            return Err(DatasetError::InvalidLabel(bad));
        }
        for (i, v) in features.as_slice().iter().enumerate() {
            if !v.is_finite() {
                let cols = features.cols().max(1);
                return Err(DatasetError::NonFinite { row: i / cols, column: i % cols, value: v.to_string() });
            }
        }
        Ok(Self { name: name.into(), features, labels })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn attribute_count(&self) -> usize {
        self.features.cols()
    }

    pub fn instance_count(&self) -> usize {
        self.features.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Rows `indices` as a new dataset (same name).
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            name: self.name.clone(),
            features: self.features.select_rows(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    /// Affinely maps every feature column onto `[0, 1]`. Constant columns
    /// become all zeros.
    pub fn normalize_min_max(&self) -> Dataset {
        let mut features = self.features.clone();
        for j in 0..features.cols() {
            let column = features.column(j);
            let lo = column.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = column.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let span = hi - lo;
            for (i, v) in column.into_iter().enumerate() {
                let scaled = if span > 0.0 { ((v - lo) / span).clamp(0.0, 1.0) } else { 0.0 };
                features.set(i, j, scaled);
            }
        }
        Dataset { name: self.name.clone(), features, labels: self.labels.clone() }
    }

    /// Rows co-permuted by a permutation determined by `seed`.
    pub fn shuffle(&self, seed: u64) -> Dataset {
        let mut order: Vec<usize> = (0..self.instance_count()).collect();
        order.shuffle(&mut seed::rng(seed));
        self.subset(&order)
    }

    pub fn kfold_split(&self, k: usize, seed: u64) -> Result<FoldSplit, DatasetError> {
        FoldSplit::new(self.instance_count(), k, seed)
    }
}

/// Reads a labelled CSV file.
pub fn load_csv(
    path: impl AsRef<Path>,
    label_column: &LabelColumn,
    mapping: &LabelMapping,
) -> Result<Dataset, DatasetError> {
    let path = path.as_ref();
    mapping.validate()?;
    let file = File::open(path).map_err(|source| DatasetError::Io { path: path.to_path_buf(), source })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let mut records = Vec::new();
    for record in reader.records() {
        let record = record?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        records.push(record);
    }
    let name = path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
    let first = records.first().ok_or_else(|| DatasetError::Empty(path.display().to_string()))?;
    let width = first.len();

    let (label_index, has_header) = match label_column {
        LabelColumn::Name(column) => {
            let idx = first
                .iter()
                .position(|cell| cell == column)
                .ok_or_else(|| DatasetError::LabelColumnNotFound(column.clone()))?;
            (idx, true)
        }
        LabelColumn::Index(idx) if *idx >= width => {
            return Err(DatasetError::LabelColumnNotFound(idx.to_string()));
        }
        other => {
            let idx = match other {
                LabelColumn::Index(idx) => *idx,
                _ => width.saturating_sub(1),
            };
            let header = first
                .iter()
                .enumerate()
                .any(|(j, cell)| j != idx && !cell.is_empty() && cell.parse::<f64>().is_err());
            (idx, header)
        }
    };

    let body = if has_header { &records[1..] } else { &records[..] };
    if body.is_empty() {
        return Err(DatasetError::Empty(path.display().to_string()));
    }
    let mut data = Vec::with_capacity(body.len() * (width - 1));
    let mut labels = Vec::with_capacity(body.len());
    for (r, record) in body.iter().enumerate() {
        // 1-based line numbers in errors.
        let row = r + 1 + usize::from(has_header);
        if record.len() != width {
            return Err(DatasetError::Ragged { row, expected: width, found: record.len() });
        }
        for (column, cell) in record.iter().enumerate() {
            if cell.is_empty() || cell == "?" {
                return Err(DatasetError::Missing { row, column });
            }
            if column == label_index {
                let encoded = mapping
                    .encode(cell)
                    .ok_or_else(|| DatasetError::UnmappedLabel { row, value: cell.to_string() })?;
                labels.push(encoded);
                continue;
            }
            let value: f64 = cell
                .parse()
                .map_err(|_| DatasetError::NonNumeric { row, column, value: cell.to_string() })?;
            if !value.is_finite() {
                return Err(DatasetError::NonFinite { row, column, value: cell.to_string() });
            }
            data.push(value);
        }
    }
    let features = Matrix::from_vec(labels.len(), width - 1, data);
    Dataset::new(name, features, labels)
}

/// Partition of `0..n` into `k` disjoint folds whose sizes differ by at most
/// one. The first `n % k` folds hold the extra instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldSplit {
    k: usize,
    folds: Vec<Vec<usize>>,
    seed: u64,
}

impl FoldSplit {
    pub fn new(instances: usize, k: usize, seed: u64) -> Result<Self, DatasetError> {
        if k < 2 || k > instances {
            return Err(DatasetError::InvalidFolds { k, instances });
        }
        let mut order: Vec<usize> = (0..instances).collect();
        order.shuffle(&mut seed::rng(seed));
        let base = instances / k;
        let extra = instances % k;
        let mut folds = Vec::with_capacity(k);
        let mut start = 0;
        for f in 0..k {
            let size = base + usize::from(f < extra);
            let mut fold = order[start..start + size].to_vec();
            fold.sort_unstable();
            folds.push(fold);
            start += size;
        }
        Ok(Self { k, folds, seed })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn folds(&self) -> &[Vec<usize>] {
        &self.folds
    }

    pub fn instance_count(&self) -> usize {
        self.folds.iter().map(Vec::len).sum()
    }

    pub fn test_indices(&self, fold: usize) -> &[usize] {
        &self.folds[fold]
    }

    /// Every index outside `fold`, ascending.
    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        let mut train: Vec<usize> = self
            .folds
            .iter()
            .enumerate()
            .filter(|&(f, _)| f != fold)
            .flat_map(|(_, idx)| idx.iter().copied())
            .collect();
        train.sort_unstable();
        train
    }

    /// `fold_id` for each instance index.
    pub fn assignments(&self) -> Vec<usize> {
        let mut out = vec![0; self.instance_count()];
        for (f, fold) in self.folds.iter().enumerate() {
            for &i in fold {
                out[i] = f;
            }
        }
        out
    }

    /// Writes `instance_index,fold_id` rows for auditing.
    pub fn write_assignments_csv(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        let mut file = std::io::BufWriter::new(File::create(path)?);
        writeln!(file, "instance_index,fold_id")?;
        for (i, f) in self.assignments().iter().enumerate() {
            writeln!(file, "{i},{f}")?;
        }
        file.flush()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn write(contents: &str) -> tempfile::NamedTempFile {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        file.write_all(contents.as_bytes()).unwrap();
        file
    }

    fn pos() -> LabelMapping {
        LabelMapping::from_pairs([("pos", 1), ("neg", 0)])
    }

    #[test]
    fn single_row() {
        let f = write("1.0,2.0,pos\n");
        let d = load_csv(f.path(), &LabelColumn::Last, &pos()).unwrap();
        assert_eq!(d.features().as_slice(), &[1.0, 2.0]);
        assert_eq!(d.labels(), &[1]);
    }

    #[test]
    fn header_detected_and_named_label() {
        let f = write("a,b,class\n1,2,neg\n3,4,pos\n");
        let d = load_csv(f.path(), &LabelColumn::Last, &pos()).unwrap();
        assert_eq!(d.instance_count(), 2);
        let d = load_csv(f.path(), &LabelColumn::Name("class".into()), &pos()).unwrap();
        assert_eq!(d.labels(), &[0, 1]);
        let d = load_csv(f.path(), &LabelColumn::Index(2), &pos()).unwrap();
        assert_eq!(d.attribute_count(), 2);
    }

    #[test]
    fn label_in_first_column() {
        let f = write("pos,1,2\nneg,3,4\n");
        let d = load_csv(f.path(), &LabelColumn::Index(0), &pos()).unwrap();
        assert_eq!(d.features().row(1), &[3.0, 4.0]);
        assert_eq!(d.labels(), &[1, 0]);
    }

    #[test]
    fn error_cases() {
        let f = write("1,2,x\n");
        assert!(matches!(load_csv(f.path(), &LabelColumn::Last, &pos()), Err(DatasetError::UnmappedLabel { .. })));
        let f = write("1,2,pos\n1,pos\n");
        assert!(matches!(load_csv(f.path(), &LabelColumn::Last, &pos()), Err(DatasetError::Ragged { row: 2, .. })));
        let f = write("1,2,pos\n1,abc,pos\n");
        assert!(matches!(load_csv(f.path(), &LabelColumn::Last, &pos()), Err(DatasetError::NonNumeric { .. })));
        let f = write("1,2,pos\n1,?,pos\n");
        assert!(matches!(load_csv(f.path(), &LabelColumn::Last, &pos()), Err(DatasetError::Missing { .. })));
        let f = write("1,2,pos\n1,NaN,pos\n");
        assert!(matches!(load_csv(f.path(), &LabelColumn::Last, &pos()), Err(DatasetError::NonFinite { .. })));
        assert!(matches!(
            load_csv("/definitely/not/here.csv", &LabelColumn::Last, &pos()),
            Err(DatasetError::Io { .. })
        ));
        let f = write("1,2,pos\n");
        let bad = LabelMapping::from_pairs([("pos", 2)]);
        assert!(matches!(load_csv(f.path(), &LabelColumn::Last, &bad), Err(DatasetError::InvalidEncoding { .. })));
    }

    #[test]
    fn sonar_shape() {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/sonar.csv");
        let mapping = LabelMapping::from_pairs([("M", 0), ("R", 1)]);
        let d = load_csv(path, &LabelColumn::Last, &mapping).unwrap();
        assert_eq!(d.instance_count(), 208);
        assert_eq!(d.attribute_count(), 60);
        assert_eq!(d.labels().iter().filter(|&&l| l == 1).count(), 97);
    }

    fn column_dataset(values: &[f64]) -> Dataset {
        let rows: Vec<Vec<f64>> = values.iter().map(|&v| vec![v]).collect();
        Dataset::new("t", Matrix::from_rows(&rows).unwrap(), vec![0; values.len()]).unwrap()
    }

    #[test]
    fn min_max_examples() {
        assert_eq!(column_dataset(&[2.0, 4.0, 6.0]).normalize_min_max().features().column(0), vec![0.0, 0.5, 1.0]);
        assert_eq!(column_dataset(&[5.0, 5.0]).normalize_min_max().features().column(0), vec![0.0, 0.0]);
        let unit = column_dataset(&[0.0, 0.25, 1.0]);
        assert_eq!(unit.normalize_min_max(), unit);
    }

    #[test]
    fn shuffle_examples() {
        let d = column_dataset(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(d.shuffle(9), d.shuffle(9));
        let one = column_dataset(&[3.0]);
        assert_eq!(one.shuffle(4), one);
    }

    #[test]
    fn kfold_examples() {
        let split = FoldSplit::new(10, 5, 1).unwrap();
        assert!(split.folds().iter().all(|f| f.len() == 2));
        let split = FoldSplit::new(208, 5, 1).unwrap();
        let sizes: Vec<usize> = split.folds().iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![42, 42, 42, 41, 41]);
        assert!(matches!(FoldSplit::new(10, 1, 1), Err(DatasetError::InvalidFolds { .. })));
        assert!(matches!(FoldSplit::new(3, 4, 1), Err(DatasetError::InvalidFolds { .. })));
    }

    #[test]
    fn assignments_csv() {
        let split = FoldSplit::new(6, 3, 2).unwrap();
        let f = tempfile::NamedTempFile::new().unwrap();
        split.write_assignments_csv(f.path()).unwrap();
        let text = std::fs::read_to_string(f.path()).unwrap();
        assert_eq!(text.lines().count(), 7);
        assert!(text.starts_with("instance_index,fold_id\n0,"));
    }

    proptest::proptest! {
        #[test]
        fn folds_partition_indices(n in 2usize..300, k in 2usize..12, seed: u64) {
            proptest::prop_assume!(k <= n);
            let split = FoldSplit::new(n, k, seed).unwrap();
            let mut seen = BTreeSet::new();
            for fold in split.folds() {
                for &i in fold {
                    proptest::prop_assert!(seen.insert(i));
                }
            }
            proptest::prop_assert_eq!(seen.len(), n);
            let sizes: Vec<usize> = split.folds().iter().map(Vec::len).collect();
            proptest::prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
            for f in 0..k {
                proptest::prop_assert_eq!(split.train_indices(f).len() + split.test_indices(f).len(), n);
            }
        }

        #[test]
        fn normalized_values_in_unit_interval(values in proptest::collection::vec(-1e6f64..1e6, 1..40)) {
            let d = column_dataset(&values).normalize_min_max();
            proptest::prop_assert!(d.features().as_slice().iter().all(|v| (0.0..=1.0).contains(v)));
        }

        #[test]
        fn shuffle_preserves_pairs(values in proptest::collection::vec(-10i32..10, 1..40), seed: u64) {
            let rows: Vec<Vec<f64>> = values.iter().map(|&v| vec![f64::from(v)]).collect();
            let labels: Vec<u8> = values.iter().map(|&v| u8::from(v > 0)).collect();
            let d = Dataset::new("p", Matrix::from_rows(&rows).unwrap(), labels).unwrap();
            let s = d.shuffle(seed);
            let pairs = |d: &Dataset| {
                let mut v: Vec<(i64, u8)> = (0..d.instance_count())
                    .map(|i| (d.features().get(i, 0) as i64, d.labels()[i]))
                    .collect();
                v.sort_unstable();
                v
            };
            proptest::prop_assert_eq!(pairs(&d), pairs(&s));
        }

        #[test]
        fn label_mapping_round_trip(a in "[a-z]{1,6}", b in "[A-Z]{1,6}") {
            let m = LabelMapping::from_pairs([(a.clone(), 0), (b.clone(), 1)]);
            for raw in [&a, &b] {
                proptest::prop_assert_eq!(m.decode(m.encode(raw).unwrap()), Some(raw.as_str()));
            }
        }
    }
}

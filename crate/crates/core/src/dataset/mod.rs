//! Tabular input: schema-driven CSV loading, standardization, train/test
//! splitting and protected-group partitions.

mod schema;
mod table;

use std::fmt;
use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use schema::{FeatureKind, FeatureRole, FeatureSpec, FilterOp, RowFilter, Schema};
pub use table::{load_csv, read_csv, RawColumn, RawTable};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Seed used when a config does not name one.
pub const DEFAULT_SPLIT_SEED: u64 = 42;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub name: String,
    pub mean: f64,
    /// Population (1/M) standard deviation.
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinaryEncoding {
    pub name: String,
    /// Raw value mapped to 1.
    pub positive: String,
}

/// Everything needed to turn raw rows into model inputs the same way the
/// training set was.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct NormStats {
    pub continuous: Vec<ColumnStats>,
    pub binary: Vec<BinaryEncoding>,
}

impl NormStats {
    pub fn column(&self, name: &str) -> Option<&ColumnStats> {
        self.continuous.iter().find(|c| c.name == name)
    }

    pub fn encoding(&self, name: &str) -> Option<&BinaryEncoding> {
        self.binary.iter().find(|c| c.name == name)
    }
}

/// Preprocessed samples. `features` excludes the protected column.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Matrix,
    encoded: Matrix,
    labels: Vec<u8>,
    protected: Vec<u8>,
    feature_names: Vec<String>,
    continuous: Vec<bool>,
    stats: NormStats,
}

impl Dataset {
    /// Builds a dataset from already-preprocessed parts. No column is treated
    /// as continuous, so splitting leaves the features untouched.
    pub fn from_parts(features: Matrix, labels: Vec<u8>, protected: Vec<u8>) -> Result<Self> {
        let m = features.rows();
        if m == 0 {
            return Err(Error::EmptyTable);
        }
        for (name, v) in [("labels", &labels), ("protected", &protected)] {
            if v.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    actual: v.len(),
                });
            }
            if v.iter().any(|&x| x > 1) {
                return Err(Error::InvalidArgument(format!("{name} must be 0/1")));
            }
        }
        let feature_names = (0..features.cols()).map(|j| format!("x{j}")).collect();
        Ok(Dataset {
            encoded: features.clone(),
            continuous: vec![false; features.cols()],
            features,
            labels,
            protected,
            feature_names,
            stats: NormStats::default(),
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    /// Feature values after 0/1 encoding but before standardization.
    pub fn unscaled_features(&self) -> &Matrix {
        &self.encoded
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn protected(&self) -> &[u8] {
        &self.protected
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn stats(&self) -> &NormStats {
        &self.stats
    }

    /// Re-applies standardization with `stats` (e.g. a model's training stats).
    pub fn restandardize(&self, stats: &NormStats) -> Result<Dataset> {
        let mut out = self.clone();
        for (j, name) in self.feature_names.iter().enumerate() {
            if !self.continuous[j] {
                continue;
            }
            let c = stats
                .column(name)
                .ok_or_else(|| Error::InvalidArgument(format!("no stats for column `{name}`")))?;
            for i in 0..out.len() {
                out.features.set(i, j, (self.encoded.get(i, j) - c.mean) / c.std);
            }
        }
        out.stats = NormStats {
            continuous: stats.continuous.clone(),
            binary: self.stats.binary.clone(),
        };
        Ok(out)
    }

    fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select_rows(indices),
            encoded: self.encoded.select_rows(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            protected: indices.iter().map(|&i| self.protected[i]).collect(),
            feature_names: self.feature_names.clone(),
            continuous: self.continuous.clone(),
            stats: self.stats.clone(),
        }
    }

    /// Writes `features..., A, Y` as CSV.
    pub fn write_snapshot<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<&str> = self.feature_names.iter().map(String::as_str).collect();
        header.extend(["A", "Y"]);
        w.write_record(&header)?;
        for i in 0..self.len() {
            let mut rec: Vec<String> = self.features.row(i).iter().map(f64::to_string).collect();
            rec.push(self.protected[i].to_string());
            rec.push(self.labels[i].to_string());
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<snapshot>", e))?;
        Ok(())
    }
}

fn population_stats(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn binary_encoding(
    name: &str,
    values: &[String],
    declared: Option<&str>,
    fitted: Option<&NormStats>,
) -> Result<String> {
    let mut distinct: Vec<&str> = values.iter().map(String::as_str).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() > 2 {
        return Err(Error::NotBinary {
            column: name.to_string(),
            count: distinct.len(),
        });
    }
    if let Some(enc) = fitted.and_then(|s| s.encoding(name)) {
        return Ok(enc.positive.clone());
    }
    if let Some(p) = declared {
        return Ok(p.to_string());
    }
    if distinct.iter().all(|v| *v == "0" || *v == "1") {
        return Ok("1".to_string());
    }
    Ok(distinct.last().copied().unwrap_or("").to_string())
}

/// Encodes binary columns as 0/1, standardizes continuous ones and pulls the
/// protected and label columns out of the feature matrix. Statistics come
/// from `fit` when given, otherwise from `raw` itself.
pub fn preprocess(raw: &RawTable, schema: &Schema, fit: Option<&NormStats>) -> Result<Dataset> {
    let m = raw.n_rows();
    if m == 0 {
        return Err(Error::EmptyTable);
    }
    let mut stats = NormStats::default();
    let mut encode = |name: &str, declared: Option<&str>| -> Result<Vec<f64>> {
        let Some(RawColumn::Text(values)) = raw.column(name) else {
            return Err(Error::MissingColumn(name.to_string()));
        };
        let positive = binary_encoding(name, values, declared, fit)?;
        stats.binary.push(BinaryEncoding {
            name: name.to_string(),
            positive: positive.clone(),
        });
        Ok(values.iter().map(|v| if *v == positive { 1.0 } else { 0.0 }).collect())
    };

    let protected_spec = schema.protected();
    let label_spec = schema.label();
    let protected: Vec<u8> = encode(&protected_spec.name, protected_spec.positive.as_deref())?
        .into_iter()
        .map(|v| v as u8)
        .collect();
    let labels: Vec<u8> = encode(&label_spec.name, label_spec.positive.as_deref())?
        .into_iter()
        .map(|v| v as u8)
        .collect();

    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut continuous = Vec::new();
    let mut feature_names = Vec::new();
    for spec in schema.features() {
        let col = match spec.kind {
            FeatureKind::Binary => encode(&spec.name, spec.positive.as_deref())?,
            FeatureKind::Continuous => match raw.column(&spec.name) {
                Some(RawColumn::Numeric(v)) => v.clone(),
                _ => return Err(Error::MissingColumn(spec.name.clone())),
            },
        };
        columns.push(col);
        continuous.push(spec.kind == FeatureKind::Continuous);
        feature_names.push(spec.name.clone());
    }

    let dim = columns.len();
    let mut encoded = Matrix::zeros(m, dim);
    for (j, col) in columns.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            encoded.set(i, j, v);
        }
    }

    let continuous_stats = feature_names
        .iter()
        .zip(&continuous)
        .enumerate()
        .filter(|(_, (_, &c))| c)
        .map(|(j, (name, _))| match fit {
            Some(f) => f
                .column(name)
                .cloned()
                .ok_or_else(|| Error::InvalidArgument(format!("no stats for column `{name}`"))),
            None => fit_column(name, &encoded, j),
        })
        .collect::<Result<Vec<_>>>()?;

    let mut ds = Dataset {
        features: encoded.clone(),
        encoded,
        labels,
        protected,
        feature_names,
        continuous,
        stats: NormStats {
            continuous: Vec::new(),
            binary: stats.binary,
        },
    };
    ds = ds.restandardize(&NormStats {
        continuous: continuous_stats,
        binary: Vec::new(),
    })?;
    Ok(ds)
}

fn fit_column(name: &str, encoded: &Matrix, j: usize) -> Result<ColumnStats> {
    let (mean, std) = population_stats((0..encoded.rows()).map(|i| encoded.get(i, j)));
    if !(std > 0.0) {
        return Err(Error::ZeroVariance(name.to_string()));
    }
    Ok(ColumnStats {
        name: name.to_string(),
        mean,
        std,
    })
}

/// `⌈fraction·m⌉`, ignoring floating noise in the product (0.7·100 is 70).
pub fn train_size(m: usize, fraction: f64) -> usize {
    let x = fraction * m as f64;
    let r = x.round();
    let n = if (x - r).abs() <= 1e-9 * x.max(1.0) { r } else { x.ceil() };
    (n as usize).min(m)
}

/// Deterministic random split of `0..m` into sorted (train, test) index lists.
pub fn split_indices(m: usize, fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut perm: Vec<usize> = (0..m).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n = train_size(m, fraction);
    let mut train = perm[..n].to_vec();
    let mut test = perm[n..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    (train, test)
}

/// Random train/test split; both halves are standardized with statistics
/// fitted on the training half. Every (A, Y) group must appear in both.
pub fn split(ds: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "train fraction {train_fraction} not in (0, 1)"
        )));
    }
    if ds.len() < 2 {
        return Err(Error::InvalidArgument("need at least 2 samples to split".into()));
    }
    let (train_idx, test_idx) = split_indices(ds.len(), train_fraction, seed);
    if test_idx.is_empty() || train_idx.is_empty() {
        return Err(Error::InvalidArgument("split leaves one side empty".into()));
    }
    let train = ds.subset(&train_idx);
    let test = ds.subset(&test_idx);

    let continuous = train
        .feature_names
        .iter()
        .enumerate()
        .filter(|(j, _)| train.continuous[*j])
        .map(|(j, name)| fit_column(name, &train.encoded, j))
        .collect::<Result<Vec<_>>>()?;
    let stats = NormStats {
        continuous,
        binary: ds.stats.binary.clone(),
    };
    let train = train.restandardize(&stats)?;
    let test = test.restandardize(&stats)?;
    for (name, part) in [("train", &train), ("test", &test)] {
        partition_groups(part, PartitionMode::EqualizedOdds).map_err(|e| match e {
            Error::EmptyGroup(g) => Error::EmptyGroup(format!("{g} in {name} split")),
            other => other,
        })?;
    }
    Ok((train, test))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PartitionMode {
    /// Two groups keyed by the protected attribute.
    #[serde(rename = "dp")]
    DemographicParity,
    /// Four groups keyed by (protected attribute, label).
    #[serde(rename = "eo")]
    EqualizedOdds,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupKey {
    pub protected: u8,
    pub label: Option<u8>,
}

impl fmt::Display for GroupKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.label {
            None => write!(f, "A={}", self.protected),
            Some(y) => write!(f, "A={},Y={}", self.protected, y),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Group {
    pub key: GroupKey,
    pub indices: Vec<usize>,
}

/// Disjoint, covering index sets: `D₀, D₁` or `D₀ₙ, D₀ₚ, D₁ₙ, D₁ₚ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupPartition {
    mode: PartitionMode,
    groups: Vec<Group>,
    len: usize,
}

impl GroupPartition {
    pub fn from_attributes(protected: &[u8], labels: &[u8], mode: PartitionMode) -> Result<Self> {
        if protected.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: protected.len(),
                actual: labels.len(),
            });
        }
        if protected.is_empty() {
            return Err(Error::EmptyTable);
        }
        let keys: Vec<GroupKey> = match mode {
            PartitionMode::DemographicParity => (0..2)
                .map(|a| GroupKey {
                    protected: a,
                    label: None,
                })
                .collect(),
            PartitionMode::EqualizedOdds => (0..2)
                .flat_map(|a| {
                    (0..2).map(move |y| GroupKey {
                        protected: a,
                        label: Some(y),
                    })
                })
                .collect(),
        };
        let mut groups: Vec<Group> = keys
            .into_iter()
            .map(|key| Group {
                key,
                indices: Vec::new(),
            })
            .collect();
        for (i, (&a, &y)) in protected.iter().zip(labels).enumerate() {
            let g = groups
                .iter_mut()
                .find(|g| g.key.protected == a && g.key.label.is_none_or(|l| l == y))
                .ok_or_else(|| Error::InvalidArgument(format!("sample {i} is not 0/1 coded")))?;
            g.indices.push(i);
        }
        if let Some(empty) = groups.iter().find(|g| g.indices.is_empty()) {
            return Err(Error::EmptyGroup(empty.key.to_string()));
        }
        Ok(GroupPartition {
            mode,
            groups,
            len: protected.len(),
        })
    }

    pub fn mode(&self) -> PartitionMode {
        self.mode
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    /// Number of samples partitioned.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn group(&self, key: GroupKey) -> Option<&Group> {
        self.groups.iter().find(|g| g.key == key)
    }

    /// Groups compared by the regularizer: `(D₀, D₁)` for DP, and
    /// `(D₀ₙ, D₁ₙ), (D₀ₚ, D₁ₚ)` for EO.
    pub fn pairs(&self) -> Vec<(&Group, &Group)> {
        let labels: &[Option<u8>] = match self.mode {
            PartitionMode::DemographicParity => &[None],
            PartitionMode::EqualizedOdds => &[Some(0), Some(1)],
        };
        labels
            .iter()
            .map(|&label| {
                let get = |protected| {
                    self.group(GroupKey { protected, label })
                        .expect("partition holds every key of its mode")
                };
                (get(0), get(1))
            })
            .collect()
    }
}

pub fn partition_groups(ds: &Dataset, mode: PartitionMode) -> Result<GroupPartition> {
    GroupPartition::from_attributes(ds.protected(), ds.labels(), mode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn schema() -> Schema {
        Schema::new(vec![
            FeatureSpec::continuous("age"),
            FeatureSpec::binary("sex", Some("Male")),
            FeatureSpec::protected("race", Some("B")),
            FeatureSpec::label("y", None),
        ])
        .unwrap()
    }

    fn table(rows: &[(f64, &str, &str, &str)]) -> RawTable {
        RawTable {
            names: vec!["age".into(), "sex".into(), "race".into(), "y".into()],
            columns: vec![
                RawColumn::Numeric(rows.iter().map(|r| r.0).collect()),
                RawColumn::Text(rows.iter().map(|r| r.1.to_string()).collect()),
                RawColumn::Text(rows.iter().map(|r| r.2.to_string()).collect()),
                RawColumn::Text(rows.iter().map(|r| r.3.to_string()).collect()),
            ],
            dropped_missing: 0,
            dropped_filtered: 0,
        }
    }

    #[test]
    fn standardizes_with_population_std() {
        let raw = table(&[(1.0, "Male", "B", "1"), (2.0, "Female", "W", "0"), (3.0, "Male", "W", "1")]);
        let ds = preprocess(&raw, &schema(), None).unwrap();
        let age: Vec<f64> = (0..3).map(|i| ds.features().get(i, 0)).collect();
        let z = (1.5f64).sqrt(); // 1/sqrt(2/3)
        for (got, want) in age.iter().zip([-z, 0.0, z]) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
        assert!((age[2] - 1.2247).abs() < 1e-4);
        assert_eq!(ds.protected(), &[1, 0, 0]);
        assert_eq!(ds.labels(), &[1, 0, 1]);
        assert_eq!(ds.feature_names(), &["age".to_string(), "sex".to_string()]);
        assert_eq!(ds.dim(), 2);
    }

    #[test]
    fn binary_zero_one_column_unchanged() {
        let s = Schema::new(vec![
            FeatureSpec::binary("sex", None),
            FeatureSpec::protected("race", None),
            FeatureSpec::label("y", None),
        ])
        .unwrap();
        let raw = RawTable {
            names: vec!["sex".into(), "race".into(), "y".into()],
            columns: vec![
                RawColumn::Text(vec!["0".into(), "1".into(), "1".into()]),
                RawColumn::Text(vec!["1".into(), "0".into(), "1".into()]),
                RawColumn::Text(vec!["0".into(), "0".into(), "1".into()]),
            ],
            dropped_missing: 0,
            dropped_filtered: 0,
        };
        let ds = preprocess(&raw, &s, None).unwrap();
        assert_eq!(ds.features().as_slice(), &[0.0, 1.0, 1.0]);
    }

    #[test]
    fn preprocess_errors() {
        let raw = table(&[(1.0, "Male", "B", "1"), (2.0, "Other", "W", "0"), (3.0, "Female", "W", "1")]);
        assert!(matches!(
            preprocess(&raw, &schema(), None),
            Err(Error::NotBinary { count: 3, .. })
        ));
        let raw = table(&[(2.0, "Male", "B", "1"), (2.0, "Female", "W", "0")]);
        assert!(matches!(preprocess(&raw, &schema(), None), Err(Error::ZeroVariance(_))));
    }

    #[test]
    fn fitted_stats_apply_to_other_tables() {
        let train = preprocess(
            &table(&[(1.0, "Male", "B", "1"), (2.0, "Female", "W", "0"), (3.0, "Male", "W", "1")]),
            &schema(),
            None,
        )
        .unwrap();
        let test = preprocess(
            &table(&[(3.0, "Male", "B", "1"), (5.0, "Female", "W", "0")]),
            &schema(),
            Some(train.stats()),
        )
        .unwrap();
        let mean = (test.features().get(0, 0) + test.features().get(1, 0)) / 2.0;
        assert!(mean.abs() > 0.5);
        assert_eq!(test.stats().continuous, train.stats().continuous);
    }

    #[test]
    fn restandardize_is_idempotent() {
        let ds = preprocess(
            &table(&[(1.0, "Male", "B", "1"), (7.0, "Female", "W", "0"), (3.0, "Male", "W", "1")]),
            &schema(),
            None,
        )
        .unwrap();
        let again = ds.restandardize(ds.stats()).unwrap();
        assert_eq!(again, ds);
    }

    fn toy(m: usize) -> Dataset {
        let rows: Vec<Vec<f64>> = (0..m).map(|i| vec![i as f64]).collect();
        let labels = (0..m).map(|i| (i % 2) as u8).collect();
        let protected = (0..m).map(|i| ((i / 2) % 2) as u8).collect();
        Dataset::from_parts(Matrix::from_rows(&rows).unwrap(), labels, protected).unwrap()
    }

    #[test]
    fn split_sizes_and_determinism() {
        let ds = toy(100);
        let (tr, te) = split(&ds, 0.7, 42).unwrap();
        assert_eq!((tr.len(), te.len()), (70, 30));
        let (tr2, te2) = split(&ds, 0.7, 42).unwrap();
        assert_eq!(tr, tr2);
        assert_eq!(te, te2);
        let (tr3, _) = split(&ds, 0.7, 7).unwrap();
        assert_ne!(tr, tr3);
    }

    #[test]
    fn split_rejects_missing_group() {
        // Only four samples: one side of a 0.5 split must miss some (A, Y) group.
        let ds = toy(4);
        assert!(matches!(split(&ds, 0.5, 1), Err(Error::EmptyGroup(_))));
        assert!(split(&ds, 1.0, 1).is_err());
    }

    #[test]
    fn split_uses_training_stats() {
        let raw = table(
            &(0..40)
                .map(|i| {
                    (
                        (i * i) as f64,
                        if i % 3 == 0 { "Male" } else { "Female" },
                        if i % 2 == 0 { "B" } else { "W" },
                        if (i / 2) % 2 == 0 { "1" } else { "0" },
                    )
                })
                .collect::<Vec<_>>(),
        );
        let ds = preprocess(&raw, &schema(), None).unwrap();
        let (train, test) = split(&ds, 0.7, 3).unwrap();
        let col = |d: &Dataset| (0..d.len()).map(|i| d.features().get(i, 0)).collect::<Vec<_>>();
        let tr = col(&train);
        let mean = tr.iter().sum::<f64>() / tr.len() as f64;
        let var = tr.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / tr.len() as f64;
        assert!(mean.abs() < 1e-9);
        assert!((var - 1.0).abs() < 1e-6);
        assert_eq!(test.stats(), train.stats());
        let refit = test.restandardize(&NormStats {
            continuous: vec![fit_column("age", test.unscaled_features(), 0).unwrap()],
            binary: vec![],
        });
        assert_ne!(col(&refit.unwrap()), col(&test));
    }

    #[test]
    fn partitions() {
        let p = GroupPartition::from_attributes(&[0, 0, 1, 1], &[0, 1, 0, 1], PartitionMode::DemographicParity)
            .unwrap();
        assert_eq!(p.groups().len(), 2);
        assert_eq!(p.groups()[0].indices, vec![0, 1]);
        assert_eq!(p.groups()[1].indices, vec![2, 3]);

        let p = GroupPartition::from_attributes(&[0, 0, 1, 1], &[0, 1, 0, 1], PartitionMode::EqualizedOdds).unwrap();
        assert_eq!(p.groups().len(), 4);
        assert!(p.groups().iter().all(|g| g.indices.len() == 1));
        let pairs = p.pairs();
        assert_eq!(pairs[0].0.indices, vec![0]);
        assert_eq!(pairs[0].1.indices, vec![2]);
        assert_eq!(pairs[1].0.indices, vec![1]);
        assert_eq!(pairs[1].1.indices, vec![3]);

        let err = GroupPartition::from_attributes(&[0, 0, 0, 0], &[0, 1, 0, 1], PartitionMode::DemographicParity);
        assert!(matches!(err, Err(Error::EmptyGroup(g)) if g == "A=1"));
    }

    #[test]
    fn snapshot_csv() {
        let ds = toy(2);
        let mut buf = Vec::new();
        ds.write_snapshot(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "x0,A,Y\n0,0,0\n1,0,1\n");
    }

    proptest! {
        #[test]
        fn train_size_is_ceiling(m in 1usize..1000) {
            let (train, test) = split_indices(m, 0.7, 42);
            prop_assert_eq!(train.len(), (7 * m + 9) / 10);
            prop_assert_eq!(train.len() + test.len(), m);
        }

        #[test]
        fn partition_covers_all(attrs in proptest::collection::vec((0u8..2, 0u8..2), 4..200)) {
            let a: Vec<u8> = attrs.iter().map(|x| x.0).collect();
            let y: Vec<u8> = attrs.iter().map(|x| x.1).collect();
            for mode in [PartitionMode::DemographicParity, PartitionMode::EqualizedOdds] {
                if let Ok(p) = GroupPartition::from_attributes(&a, &y, mode) {
                    let mut all: Vec<usize> = p.groups().iter().flat_map(|g| g.indices.clone()).collect();
                    all.sort_unstable();
                    prop_assert_eq!(all, (0..a.len()).collect::<Vec<_>>());
                }
            }
        }
    }
}

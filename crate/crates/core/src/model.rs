//! Domain types shared by every stage of the pipeline: tiers, label schemas,
//! binary datasets and per-label belief vectors.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lower clip bound for beliefs; the upper bound is `1 - DELTA`.
pub const DELTA: f64 = 1e-6;

/// Diagnostic label category. The derived ordering `Cause < Reason < Symptom`
/// is the direction every cross-tier edge must follow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Tier {
    #[serde(rename = "C")]
    Cause,
    #[serde(rename = "R")]
    Reason,
    #[serde(rename = "S")]
    Symptom,
}

impl Tier {
    pub const ALL: [Tier; 3] = [Tier::Cause, Tier::Reason, Tier::Symptom];

    pub fn code(self) -> &'static str {
        match self {
            Tier::Cause => "C",
            Tier::Reason => "R",
            Tier::Symptom => "S",
        }
    }

    pub fn rank(self) -> u8 {
        self as u8
    }
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Tier {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "C" => Ok(Tier::Cause),
            "R" => Ok(Tier::Reason),
            "S" => Ok(Tier::Symptom),
            other => Err(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Label {
    pub name: String,
    pub tier: Tier,
}

/// Ordered set of named binary labels. Position in the schema is the
/// canonical label index used by graphs, tables and belief vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelSchema {
    labels: Vec<Label>,
    index: HashMap<String, usize>,
}

impl LabelSchema {
    pub fn new(labels: Vec<Label>) -> Result<Self> {
        let mut index = HashMap::with_capacity(labels.len());
        for (i, label) in labels.iter().enumerate() {
            if label.name.is_empty() {
                return Err(Error::EmptyLabel(i + 1));
            }
            if index.insert(label.name.clone(), i).is_some() {
                return Err(Error::DuplicateLabel(label.name.clone()));
            }
        }
        Ok(Self { labels, index })
    }

    pub fn from_pairs<S: Into<String>>(pairs: impl IntoIterator<Item = (S, Tier)>) -> Result<Self> {
        Self::new(
            pairs
                .into_iter()
                .map(|(name, tier)| Label {
                    name: name.into(),
                    tier,
                })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn name(&self, i: usize) -> &str {
        &self.labels[i].name
    }

    pub fn tier(&self, i: usize) -> Tier {
        self.labels[i].tier
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn check_index(&self, i: usize) -> Result<()> {
        if i < self.len() {
            Ok(())
        } else {
            Err(Error::InvalidIndex {
                index: i,
                len: self.len(),
            })
        }
    }

    /// Number of labels in each tier, as `(C, R, S)`.
    pub fn tier_counts(&self) -> (usize, usize, usize) {
        self.labels
            .iter()
            .fold((0, 0, 0), |(c, r, s), l| match l.tier {
                Tier::Cause => (c + 1, r, s),
                Tier::Reason => (c, r + 1, s),
                Tier::Symptom => (c, r, s + 1),
            })
    }

    pub fn indices_in(&self, tier: Tier) -> impl Iterator<Item = usize> + '_ {
        self.labels
            .iter()
            .enumerate()
            .filter(move |(_, l)| l.tier == tier)
            .map(|(i, _)| i)
    }

    /// Reorders the schema; `order[k]` is the old index placed at position `k`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        Self::new(order.iter().map(|&i| self.labels[i].clone()).collect())
    }
}

/// N records over a label schema. Cells are stored column-major since the
/// independence tests scan columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryDataset {
    schema: Arc<LabelSchema>,
    columns: Vec<Vec<u8>>,
    n_rows: usize,
}

impl BinaryDataset {
    pub fn from_rows(schema: Arc<LabelSchema>, rows: &[Vec<u8>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidArgument(
                "dataset needs at least one row".into(),
            ));
        }
        let m = schema.len();
        let mut columns = vec![Vec::with_capacity(rows.len()); m];
        for (r, row) in rows.iter().enumerate() {
            if row.len() != m {
                return Err(Error::InvalidArgument(format!(
                    "row {} has {} cells, expected {m}",
                    r + 1,
                    row.len()
                )));
            }
            for (c, &v) in row.iter().enumerate() {
                if v > 1 {
                    return Err(Error::InvalidArgument(format!(
                        "row {}, column {} ({}): value {v} is not 0 or 1",
                        r + 1,
                        c + 1,
                        schema.name(c)
                    )));
                }
                columns[c].push(v);
            }
        }
        Ok(Self {
            schema,
            columns,
            n_rows: rows.len(),
        })
    }

    pub fn from_columns(schema: Arc<LabelSchema>, columns: Vec<Vec<u8>>) -> Result<Self> {
        if columns.len() != schema.len() {
            return Err(Error::SchemaMismatch(format!(
                "{} columns for {} labels",
                columns.len(),
                schema.len()
            )));
        }
        let n_rows = columns.first().map_or(0, Vec::len);
        if n_rows == 0 {
            return Err(Error::InvalidArgument(
                "dataset needs at least one row".into(),
            ));
        }
        for (c, col) in columns.iter().enumerate() {
            if col.len() != n_rows {
                return Err(Error::InvalidArgument(format!(
                    "column {} has {} rows, expected {n_rows}",
                    c + 1,
                    col.len()
                )));
            }
            if let Some(r) = col.iter().position(|&v| v > 1) {
                return Err(Error::InvalidArgument(format!(
                    "row {}, column {} ({}): value {} is not 0 or 1",
                    r + 1,
                    c + 1,
                    schema.name(c),
                    col[r]
                )));
            }
        }
        Ok(Self {
            schema,
            columns,
            n_rows,
        })
    }

    pub fn schema(&self) -> &Arc<LabelSchema> {
        &self.schema
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, c: usize) -> &[u8] {
        &self.columns[c]
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.columns[col][row]
    }

    pub fn row(&self, r: usize) -> Vec<u8> {
        self.columns.iter().map(|c| c[r]).collect()
    }

    pub fn rows(&self) -> impl Iterator<Item = Vec<u8>> + '_ {
        (0..self.n_rows).map(|r| self.row(r))
    }

    /// Indices of labels set to 1 in row `r`.
    pub fn positives(&self, r: usize) -> Vec<usize> {
        (0..self.n_cols())
            .filter(|&c| self.columns[c][r] == 1)
            .collect()
    }

    /// Returns a copy with rows reordered; `order[k]` is the source row of row `k`.
    pub fn select_rows(&self, order: &[usize]) -> Result<Self> {
        let columns = self
            .columns
            .iter()
            .map(|col| order.iter().map(|&r| col[r]).collect())
            .collect();
        Self::from_columns(self.schema.clone(), columns)
    }

    /// Returns a copy whose schema and columns follow `order` (see
    /// [`LabelSchema::permuted`]).
    pub fn permute_columns(&self, order: &[usize]) -> Result<Self> {
        let schema = Arc::new(self.schema.permuted(order)?);
        let columns = order.iter().map(|&c| self.columns[c].clone()).collect();
        Self::from_columns(schema, columns)
    }
}

/// Per-label marginal probabilities for one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefVector {
    schema: Arc<LabelSchema>,
    p: Vec<f64>,
}

impl BeliefVector {
    pub fn new(schema: Arc<LabelSchema>, p: Vec<f64>) -> Result<Self> {
        if p.len() != schema.len() {
            return Err(Error::SchemaMismatch(format!(
                "{} beliefs for {} labels",
                p.len(),
                schema.len()
            )));
        }
        if let Some(i) = p.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidArgument(format!(
                "belief for `{}` is {}, outside [0, 1]",
                schema.name(i),
                p[i]
            )));
        }
        Ok(Self { schema, p })
    }

    /// Builds a vector clipped into `[DELTA, 1 - DELTA]`; out-of-range and NaN
    /// inputs are clamped rather than rejected.
    pub fn clipped(schema: Arc<LabelSchema>, p: Vec<f64>) -> Result<Self> {
        let p = p.into_iter().map(clip).collect();
        Self::new(schema, p)
    }

    pub fn schema(&self) -> &Arc<LabelSchema> {
        &self.schema
    }

    pub fn values(&self) -> &[f64] {
        &self.p
    }

    pub fn get(&self, i: usize) -> f64 {
        self.p[i]
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.p
    }

    pub fn clip(&self) -> Self {
        Self {
            schema: self.schema.clone(),
            p: self.p.iter().copied().map(clip).collect(),
        }
    }
}

pub fn clip(v: f64) -> f64 {
    if v.is_nan() {
        0.5
    } else {
        v.clamp(DELTA, 1.0 - DELTA)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema() -> Arc<LabelSchema> {
        Arc::new(
            LabelSchema::from_pairs([
                ("a", Tier::Cause),
                ("b", Tier::Reason),
                ("c", Tier::Symptom),
            ])
            .unwrap(),
        )
    }

    #[test]
    fn tier_order_is_cause_reason_symptom() {
        assert!(Tier::Cause < Tier::Reason);
        assert!(Tier::Reason < Tier::Symptom);
        assert_eq!("R".parse::<Tier>().unwrap(), Tier::Reason);
        assert!("X".parse::<Tier>().is_err());
    }

    #[test]
    fn schema_rejects_duplicates_and_empty_names() {
        assert!(matches!(
            LabelSchema::from_pairs([("a", Tier::Cause), ("a", Tier::Symptom)]),
            Err(Error::DuplicateLabel(n)) if n == "a"
        ));
        assert!(matches!(
            LabelSchema::from_pairs([("a", Tier::Cause), ("", Tier::Symptom)]),
            Err(Error::EmptyLabel(2))
        ));
    }

    #[test]
    fn dataset_rejects_bad_cells() {
        let s = schema();
        assert!(BinaryDataset::from_rows(s.clone(), &[]).is_err());
        assert!(BinaryDataset::from_rows(s.clone(), &[vec![0, 1]]).is_err());
        assert!(BinaryDataset::from_rows(s.clone(), &[vec![0, 2, 1]]).is_err());
        let d = BinaryDataset::from_rows(s, &[vec![0, 1, 1], vec![1, 0, 0]]).unwrap();
        assert_eq!(d.n_rows(), 2);
        assert_eq!(d.row(0), vec![0, 1, 1]);
        assert_eq!(d.positives(1), vec![0]);
    }

    #[test]
    fn clipping_bounds_beliefs() {
        let b = BeliefVector::clipped(schema(), vec![0.0, 1.0, 0.3]).unwrap();
        assert_eq!(b.values(), &[DELTA, 1.0 - DELTA, 0.3]);
        assert!(BeliefVector::new(schema(), vec![0.0, 1.5, 0.3]).is_err());
    }

    #[test]
    fn permuting_columns_moves_labels() {
        let s = schema();
        let d = BinaryDataset::from_rows(s, &[vec![0, 1, 1]]).unwrap();
        let p = d.permute_columns(&[2, 0, 1]).unwrap();
        assert_eq!(p.schema().name(0), "c");
        assert_eq!(p.row(0), vec![1, 0, 1]);
    }
}

//! Category/feature typicality data, metaphor items and human interpretation
//! distributions.
//!
//! Everything here is immutable once loaded. Feature order is the order in
//! which features first appear in `typicality.csv` and is the canonical
//! feature index used by every other module.

mod io;
mod validate;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dist::Distribution;
use crate::error::{Error, Result};

pub use io::{
    format_significant, load_dataset, load_raw_dataset, save_dataset, LoadOptions, CSV_DIGITS, HUMAN_FILE, METAPHORS_FILE,
    TYPICALITY_FILE,
};
pub use validate::{validate, ValidationReport, Violation};

/// Row-sum tolerance for normalized typicality rows.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// Likert bounds of the typicality survey.
pub const RATING_MIN: f64 = 1.0;
pub const RATING_MAX: f64 = 7.0;

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVocab {
    features: Vec<String>,
    index: HashMap<String, usize>,
}

impl FeatureVocab {
    pub fn new(features: Vec<String>) -> Result<Self> {
        if features.len() < 2 {
            return Err(Error::InvalidVocab(format!(
                "need at least 2 features, got {}",
                features.len()
            )));
        }
        let mut index = HashMap::with_capacity(features.len());
        for (i, f) in features.iter().enumerate() {
            if f.is_empty() {
                return Err(Error::InvalidVocab("empty feature identifier".into()));
            }
            if index.insert(f.clone(), i).is_some() {
                return Err(Error::InvalidVocab(format!("duplicate feature '{f}'")));
            }
        }
        Ok(FeatureVocab { features, index })
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn features(&self) -> &[String] {
        &self.features
    }

    pub fn name(&self, i: usize) -> &str {
        &self.features[i]
    }

    pub fn index_of(&self, feature: &str) -> Option<usize> {
        self.index.get(feature).copied()
    }
}

/// Normalized typicality `T[c][i]` of feature `i` for category `c`.
///
/// [`TypicalityTable::new`] enforces the simplex constraint on every row.
/// Tables read from disk are built unchecked and go through [`validate`] so
/// that every violation can be reported at once.
#[derive(Debug, Clone, PartialEq)]
pub struct TypicalityTable {
    categories: Vec<String>,
    category_index: HashMap<String, usize>,
    vocab: FeatureVocab,
    values: Vec<Vec<f64>>,
}

impl TypicalityTable {
    pub fn new(categories: Vec<String>, vocab: FeatureVocab, values: Vec<Vec<f64>>) -> Result<Self> {
        let table = Self::new_unchecked(categories, vocab, values)?;
        for (c, row) in table.values.iter().enumerate() {
            if let Some(v) = row.iter().find(|v| !v.is_finite() || **v < 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "typicality {v} for '{}' is not a finite non-negative number",
                    table.categories[c]
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::InvalidArgument(format!(
                    "typicality row '{}' sums to {sum}",
                    table.categories[c]
                )));
            }
        }
        Ok(table)
    }

    /// Shape and key checks only; value invariants are left to [`validate`].
    pub(crate) fn new_unchecked(
        categories: Vec<String>,
        vocab: FeatureVocab,
        values: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if values.len() != categories.len() {
            return Err(Error::LengthMismatch(values.len(), categories.len()));
        }
        if let Some(row) = values.iter().find(|r| r.len() != vocab.len()) {
            return Err(Error::LengthMismatch(row.len(), vocab.len()));
        }
        let mut category_index = HashMap::with_capacity(categories.len());
        for (i, c) in categories.iter().enumerate() {
            if c.is_empty() {
                return Err(Error::InvalidArgument("empty category identifier".into()));
            }
            if category_index.insert(c.clone(), i).is_some() {
                return Err(Error::InvalidArgument(format!("duplicate category '{c}'")));
            }
        }
        Ok(TypicalityTable {
            categories,
            category_index,
            vocab,
            values,
        })
    }

    pub fn categories(&self) -> &[String] {
        &self.categories
    }

    pub fn vocab(&self) -> &FeatureVocab {
        &self.vocab
    }

    pub fn n_features(&self) -> usize {
        self.vocab.len()
    }

    pub fn category_index(&self, category: &str) -> Option<usize> {
        self.category_index.get(category).copied()
    }

    pub fn resolve(&self, category: &str) -> Result<usize> {
        self.category_index(category)
            .ok_or_else(|| Error::UnknownCategory(category.to_string()))
    }

    pub fn row(&self, category: usize) -> &[f64] {
        &self.values[category]
    }

    pub fn row_of(&self, category: &str) -> Result<&[f64]> {
        Ok(self.row(self.resolve(category)?))
    }

    pub fn value(&self, category: usize, feature: usize) -> f64 {
        self.values[category][feature]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.values
    }

    /// Copy of the table with one category's row replaced.
    pub fn with_row(&self, category: usize, row: Vec<f64>) -> Result<Self> {
        let mut values = self.values.clone();
        values[category] = row;
        Self::new(self.categories.clone(), self.vocab.clone(), values)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawRating {
    pub category: String,
    pub feature: String,
    pub rating: f64,
}

/// Mean Likert ratings (1-7) per (category, feature) cell.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RawRatingsTable {
    rows: Vec<RawRating>,
}

impl RawRatingsTable {
    pub fn new(rows: Vec<RawRating>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for (i, r) in rows.iter().enumerate() {
            if !(RATING_MIN..=RATING_MAX).contains(&r.rating) {
                return Err(Error::RatingOutOfRange {
                    category: r.category.clone(),
                    feature: r.feature.clone(),
                    value: r.rating,
                });
            }
            if !seen.insert((r.category.as_str(), r.feature.as_str())) {
                return Err(Error::DuplicateKey {
                    file: "ratings".into(),
                    row: i as u64 + 1,
                    key: format!("({}, {})", r.category, r.feature),
                });
            }
        }
        Ok(RawRatingsTable { rows })
    }

    pub fn rows(&self) -> &[RawRating] {
        &self.rows
    }
}

/// Divide a row of non-negative weights by its sum.
pub fn normalize_row(row: &[f64]) -> Result<Vec<f64>> {
    let sum: f64 = row.iter().sum();
    if !(sum > 0.0) || !sum.is_finite() {
        return Err(Error::ZeroMass);
    }
    Ok(row.iter().map(|v| v / sum).collect())
}

/// Turn mean ratings into a typicality table: `T[c][i] = r[c][i] / Σ_j r[c][j]`.
///
/// Categories and features keep their order of first appearance. Every cell
/// must be present; missing cells are not imputed.
pub fn normalize_ratings(raw: &RawRatingsTable) -> Result<TypicalityTable> {
    let mut categories: Vec<String> = Vec::new();
    let mut cat_idx: HashMap<&str, usize> = HashMap::new();
    let mut features: Vec<String> = Vec::new();
    let mut feat_idx: HashMap<&str, usize> = HashMap::new();
    for r in &raw.rows {
        if !cat_idx.contains_key(r.category.as_str()) {
            cat_idx.insert(&r.category, categories.len());
            categories.push(r.category.clone());
        }
        if !feat_idx.contains_key(r.feature.as_str()) {
            feat_idx.insert(&r.feature, features.len());
            features.push(r.feature.clone());
        }
    }
    let mut cells: Vec<Vec<Option<f64>>> = vec![vec![None; features.len()]; categories.len()];
    for r in &raw.rows {
        cells[cat_idx[r.category.as_str()]][feat_idx[r.feature.as_str()]] = Some(r.rating);
    }
    let mut values = Vec::with_capacity(categories.len());
    for (c, row) in cells.into_iter().enumerate() {
        let mut ratings = Vec::with_capacity(row.len());
        for (i, cell) in row.into_iter().enumerate() {
            match cell {
                Some(v) => ratings.push(v),
                None => {
                    return Err(Error::MissingCell {
                        category: categories[c].clone(),
                        feature: features[i].clone(),
                    })
                }
            }
        }
        let normalized = normalize_row(&ratings).map_err(|_| Error::ZeroRowSum(categories[c].clone()))?;
        values.push(normalized);
    }
    let vocab = FeatureVocab::new(features)?;
    TypicalityTable::new(categories, vocab, values)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MetaphorClass {
    #[serde(rename = "inherent")]
    VehicleInherent,
    #[serde(rename = "non_inherent")]
    NonVehicleInherent,
}

impl MetaphorClass {
    pub fn as_str(self) -> &'static str {
        match self {
            MetaphorClass::VehicleInherent => "inherent",
            MetaphorClass::NonVehicleInherent => "non_inherent",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "inherent" => Some(MetaphorClass::VehicleInherent),
            "non_inherent" => Some(MetaphorClass::NonVehicleInherent),
            _ => None,
        }
    }
}

impl fmt::Display for MetaphorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An "X are Y" item: `topic` is X, `vehicle` is Y.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaphorItem {
    pub id: String,
    pub topic: String,
    pub vehicle: String,
    pub class: MetaphorClass,
    pub familiarity: Option<f64>,
}

impl MetaphorItem {
    pub fn new(id: impl Into<String>, topic: impl Into<String>, vehicle: impl Into<String>, class: MetaphorClass) -> Self {
        MetaphorItem {
            id: id.into(),
            topic: topic.into(),
            vehicle: vehicle.into(),
            class,
            familiarity: None,
        }
    }
}

/// Normalized human interpretation distribution per metaphor id.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HumanResponseTable {
    ids: Vec<String>,
    dists: Vec<Distribution>,
    index: HashMap<String, usize>,
}

impl HumanResponseTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, id: impl Into<String>, dist: Distribution) -> Result<()> {
        let id = id.into();
        if self.index.contains_key(&id) {
            return Err(Error::InvalidArgument(format!("duplicate human distribution for '{id}'")));
        }
        self.index.insert(id.clone(), self.ids.len());
        self.ids.push(id);
        self.dists.push(dist);
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<&Distribution> {
        self.index.get(id).map(|&i| &self.dists[i])
    }

    pub fn require(&self, id: &str) -> Result<&Distribution> {
        self.get(id)
            .ok_or_else(|| Error::InvalidArgument(format!("no human distribution for metaphor '{id}'")))
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Distribution)> {
        self.ids.iter().map(String::as_str).zip(self.dists.iter())
    }
}

/// A loaded dataset: typicality table, metaphor items, human responses.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub table: TypicalityTable,
    pub items: Vec<MetaphorItem>,
    pub human: HumanResponseTable,
}

impl Dataset {
    pub fn validate(&self) -> ValidationReport {
        validate(&self.table, &self.items, &self.human)
    }

    pub fn item(&self, id: &str) -> Option<&MetaphorItem> {
        self.items.iter().find(|m| m.id == id)
    }

    /// First item with the given topic and vehicle.
    pub fn find_pair(&self, topic: &str, vehicle: &str) -> Option<&MetaphorItem> {
        self.items.iter().find(|m| m.topic == topic && m.vehicle == vehicle)
    }
}

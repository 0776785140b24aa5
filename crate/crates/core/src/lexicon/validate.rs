use std::fmt;

use crate::dist::MASS_TOLERANCE;

use super::{HumanResponseTable, MetaphorItem, TypicalityTable, ROW_SUM_TOLERANCE};

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    RowSum { category: String, sum: f64 },
    NegativeTypicality { category: String, feature: String, value: f64 },
    /// Exact 0 or 1 makes the speaker utility take `log 0`.
    DegenerateTypicality { category: String, feature: String, value: f64 },
    TopicEqualsVehicle { id: String },
    UnresolvedCategory { id: String, category: String },
    MissingHuman { id: String },
    HumanLength { id: String, len: usize, expected: usize },
    HumanMass { id: String, sum: f64 },
    HumanNegative { id: String, feature: usize, value: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::RowSum { category, sum } => {
                write!(f, "normalization: typicality row '{category}' sums to {sum}")
            }
            Violation::NegativeTypicality { category, feature, value } => {
                write!(f, "negative typicality {value} for ({category}, {feature})")
            }
            Violation::DegenerateTypicality { category, feature, value } => {
                write!(f, "degenerate typicality {value} for ({category}, {feature})")
            }
            Violation::TopicEqualsVehicle { id } => write!(f, "metaphor '{id}': topic equals vehicle"),
            Violation::UnresolvedCategory { id, category } => {
                write!(f, "metaphor '{id}': category '{category}' not in typicality table")
            }
            Violation::MissingHuman { id } => write!(f, "coverage: no human distribution for metaphor '{id}'"),
            Violation::HumanLength { id, len, expected } => {
                write!(f, "human distribution '{id}' has {len} entries, expected {expected}")
            }
            Violation::HumanMass { id, sum } => write!(f, "human distribution '{id}' sums to {sum}"),
            Violation::HumanNegative { id, feature, value } => {
                write!(f, "human distribution '{id}' has negative entry {value} at feature {feature}")
            }
        }
    }
}

/// Every invariant violation found in a dataset. Empty means usable.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

pub fn validate(table: &TypicalityTable, items: &[MetaphorItem], human: &HumanResponseTable) -> ValidationReport {
    let mut violations = Vec::new();
    let vocab = table.vocab();

    for (c, row) in table.rows().iter().enumerate() {
        let category = &table.categories()[c];
        let sum: f64 = row.iter().sum();
        if !((sum - 1.0).abs() <= ROW_SUM_TOLERANCE) {
            violations.push(Violation::RowSum {
                category: category.clone(),
                sum,
            });
        }
        for (i, &v) in row.iter().enumerate() {
            if v < 0.0 || v.is_nan() {
                violations.push(Violation::NegativeTypicality {
                    category: category.clone(),
                    feature: vocab.name(i).to_string(),
                    value: v,
                });
            } else if v == 0.0 || v == 1.0 {
                violations.push(Violation::DegenerateTypicality {
                    category: category.clone(),
                    feature: vocab.name(i).to_string(),
                    value: v,
                });
            }
        }
    }

    for item in items {
        if item.topic == item.vehicle {
            violations.push(Violation::TopicEqualsVehicle { id: item.id.clone() });
        }
        for category in [&item.topic, &item.vehicle] {
            if table.category_index(category).is_none() {
                violations.push(Violation::UnresolvedCategory {
                    id: item.id.clone(),
                    category: category.clone(),
                });
            }
        }
        let Some(dist) = human.get(&item.id) else {
            violations.push(Violation::MissingHuman { id: item.id.clone() });
            continue;
        };
        if dist.len() != vocab.len() {
            violations.push(Violation::HumanLength {
                id: item.id.clone(),
                len: dist.len(),
                expected: vocab.len(),
            });
        }
        let sum: f64 = dist.probs().iter().sum();
        if !((sum - 1.0).abs() <= MASS_TOLERANCE) {
            violations.push(Violation::HumanMass { id: item.id.clone(), sum });
        }
        for (i, &p) in dist.probs().iter().enumerate() {
            if p < 0.0 {
                violations.push(Violation::HumanNegative {
                    id: item.id.clone(),
                    feature: i,
                    value: p,
                });
            }
        }
    }

    ValidationReport { violations }
}

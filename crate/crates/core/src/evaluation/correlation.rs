use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexicon::{format_significant, HumanResponseTable, MetaphorItem, TypicalityTable};
use crate::metrics::pearson;
use crate::rsa::{interpret, RsaConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationSource {
    Model,
    Human,
}

/// Feature-by-feature Pearson correlation across metaphors. Entries are
/// `None` where a feature has zero variance across the items.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub features: Vec<String>,
    pub values: Vec<Vec<Option<f64>>>,
}

impl CorrelationMatrix {
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.values[i][j]
    }

    /// CSV with a feature-name header row and first column; undefined
    /// entries are empty cells.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let header = std::iter::once("feature").chain(self.features.iter().map(String::as_str));
        w.write_record(header).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        for (name, row) in self.features.iter().zip(&self.values) {
            let cells = std::iter::once(name.clone())
                .chain(row.iter().map(|v| v.map(|x| format_significant(x, 12)).unwrap_or_default()));
            w.write_record(cells).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidArgument(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::InvalidArgument(e.to_string()))
    }
}

/// Correlations between feature probabilities across `items`, from model
/// outputs or from the human distributions.
pub fn feature_correlation_matrix(
    items: &[MetaphorItem],
    source: CorrelationSource,
    human: &HumanResponseTable,
    config: &RsaConfig,
    table: &TypicalityTable,
) -> Result<CorrelationMatrix> {
    if items.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "feature correlations need at least 3 items, got {}",
            items.len()
        )));
    }
    let rows: Vec<Vec<f64>> = items
        .iter()
        .map(|m| match source {
            CorrelationSource::Model => interpret(m, config, table).map(|d| d.probs().to_vec()),
            CorrelationSource::Human => human.require(&m.id).map(|d| d.probs().to_vec()),
        })
        .collect::<Result<_>>()?;
    let n = table.n_features();
    let columns: Vec<Vec<f64>> = (0..n).map(|i| rows.iter().map(|r| r[i]).collect()).collect();
    let mut values = vec![vec![None; n]; n];
    for i in 0..n {
        for j in i..n {
            let r = match pearson(&columns[i], &columns[j]) {
                Ok(_) if i == j => Some(1.0),
                Ok(r) => Some(r),
                Err(Error::ZeroVariance(_)) => None,
                Err(e) => return Err(e),
            };
            values[i][j] = r;
            values[j][i] = r;
        }
    }
    Ok(CorrelationMatrix {
        features: table.vocab().features().to_vec(),
        values,
    })
}

use serde::{Deserialize, Serialize};

use super::DataError;

/// Default marker for absent cells, matching the census files this crate is
/// usually pointed at.
pub const DEFAULT_MISSING_TOKEN: &str = "?";

/// A single cell of a mixed-type table.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Label(String),
    Number(f64),
    Missing,
}

impl Value {
    pub fn is_missing(&self) -> bool {
        matches!(self, Value::Missing)
    }

    pub fn as_label(&self) -> Option<&str> {
        match self {
            Value::Label(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            Value::Number(v) => Some(*v),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Categorical,
    Numeric,
}

/// Encoding spec for one column: a category vocabulary, or quantile bin
/// edges for numerics. The last encoded index of every column is reserved
/// for missing values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub categories: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bin_edges: Vec<f64>,
    pub missing_token: String,
}

impl ColumnSpec {
    /// Number of encodable indices: categories (or bins) plus the missing slot.
    pub fn vocab_size(&self) -> usize {
        match self.kind {
            ColumnKind::Categorical => self.categories.len() + 1,
            ColumnKind::Numeric => self.bin_edges.len().saturating_sub(1) + 1,
        }
    }

    pub fn missing_index(&self) -> usize {
        self.vocab_size() - 1
    }

    pub fn n_bins(&self) -> usize {
        debug_assert_eq!(self.kind, ColumnKind::Numeric);
        self.bin_edges.len() - 1
    }

    pub fn category_index(&self, label: &str) -> Option<usize> {
        self.categories.iter().position(|c| c == label)
    }

    /// Bin index for a finite value; values outside the edge range are
    /// clamped into the first/last bin.
    pub fn bin_of(&self, v: f64) -> usize {
        let edges = &self.bin_edges;
        if v <= edges[0] {
            return 0;
        }
        let last_bin = self.n_bins() - 1;
        if v >= edges[edges.len() - 1] {
            return last_bin;
        }
        // partition_point: first i with edges[i] > v; v lives in bin i-1.
        edges.partition_point(|e| *e <= v) - 1
    }

    /// Half-open interval of bin `i`; the last bin also contains its upper
    /// edge.
    pub fn bin_interval(&self, i: usize) -> (f64, f64, bool) {
        let closed = i + 1 == self.n_bins();
        (self.bin_edges[i], self.bin_edges[i + 1], closed)
    }

    fn validate(&self) -> Result<(), DataError> {
        match self.kind {
            ColumnKind::Categorical => {
                if self.categories.is_empty() {
                    return Err(DataError::InvalidSchema(format!(
                        "categorical column `{}` has an empty vocabulary",
                        self.name
                    )));
                }
                let mut seen = std::collections::BTreeSet::new();
                for c in &self.categories {
                    if !seen.insert(c) {
                        return Err(DataError::InvalidSchema(format!(
                            "column `{}` has duplicate label `{c}`",
                            self.name
                        )));
                    }
                }
            }
            ColumnKind::Numeric => {
                if self.bin_edges.len() < 2 {
                    return Err(DataError::InvalidSchema(format!(
                        "numeric column `{}` needs at least 2 bin edges",
                        self.name
                    )));
                }
                if !self.bin_edges.windows(2).all(|w| w[0] < w[1]) {
                    return Err(DataError::InvalidSchema(format!(
                        "column `{}`: bin edges must be strictly ascending",
                        self.name
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Ordered column specs plus an optional prediction target, persistable as
/// JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableSchema {
    pub columns: Vec<ColumnSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
}

impl TableSchema {
    pub fn new(columns: Vec<ColumnSpec>) -> Result<Self, DataError> {
        let schema = TableSchema {
            columns,
            target: None,
        };
        schema.validate()?;
        Ok(schema)
    }

    pub fn validate(&self) -> Result<(), DataError> {
        let mut seen = std::collections::BTreeSet::new();
        for c in &self.columns {
            if !seen.insert(c.name.as_str()) {
                return Err(DataError::DuplicateColumn(c.name.clone()));
            }
            c.validate()?;
        }
        if let Some(t) = &self.target {
            match self.column(t) {
                None => return Err(DataError::UnknownTargetColumn(t.clone())),
                Some(spec) if spec.kind != ColumnKind::Categorical => {
                    return Err(DataError::NonCategoricalTarget(t.clone()))
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn set_target(&mut self, target: Option<&str>) -> Result<(), DataError> {
        self.target = target.map(str::to_string);
        self.validate()
    }

    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn column(&self, name: &str) -> Option<&ColumnSpec> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schema serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, DataError> {
        let schema: TableSchema = serde_json::from_str(text)
            .map_err(|e| DataError::InvalidSchema(e.to_string()))?;
        schema.validate()?;
        Ok(schema)
    }
}

/// Rows plus per-column names and kinds. A `Dataset` exists before any
/// encoder is built, so vocabularies and bin edges live in [`TableSchema`],
/// not here.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub names: Vec<String>,
    pub kinds: Vec<ColumnKind>,
    pub rows: Vec<Vec<Value>>,
}

impl Dataset {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_columns(&self) -> usize {
        self.names.len()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

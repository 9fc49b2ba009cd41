use std::collections::BTreeMap;

use rand::Rng;

use super::schema::{ColumnKind, ColumnSpec, Dataset, TableSchema, Value};
use super::DataError;

/// One encoded index per column: category index, numeric bin index, or the
/// column's missing index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedRow(pub Vec<usize>);

/// Build a [`TableSchema`] from training data: categorical vocabularies are
/// the distinct observed labels (sorted), numeric columns get
/// `bins_per_numeric` quantile bins. Every rule threshold passed in is
/// injected as an extra bin edge so no bin straddles a rule boundary.
pub fn build_encoder(
    train: &Dataset,
    bins_per_numeric: usize,
    thresholds: &BTreeMap<String, Vec<f64>>,
    missing_token: &str,
) -> Result<TableSchema, DataError> {
    assert!(bins_per_numeric >= 1, "bins_per_numeric must be >= 1");
    if train.n_rows() == 0 {
        return Err(DataError::EmptyTrainingData);
    }
    for name in thresholds.keys() {
        let idx = train
            .column_index(name)
            .ok_or_else(|| DataError::UnknownThresholdColumn(name.clone()))?;
        if train.kinds[idx] != ColumnKind::Numeric {
            return Err(DataError::ThresholdOnCategorical(name.clone()));
        }
    }

    let mut columns = Vec::with_capacity(train.n_columns());
    for (j, name) in train.names.iter().enumerate() {
        let spec = match train.kinds[j] {
            ColumnKind::Categorical => {
                let mut labels: Vec<String> = train
                    .rows
                    .iter()
                    .filter_map(|row| row[j].as_label().map(str::to_string))
                    .collect();
                labels.sort();
                labels.dedup();
                if labels.is_empty() {
                    // An all-missing column still encodes: its vocabulary is
                    // just the missing token's own label slot.
                    labels.push(missing_token.to_string());
                }
                ColumnSpec {
                    name: name.clone(),
                    kind: ColumnKind::Categorical,
                    categories: labels,
                    bin_edges: vec![],
                    missing_token: missing_token.to_string(),
                }
            }
            ColumnKind::Numeric => {
                let mut values: Vec<f64> = train
                    .rows
                    .iter()
                    .filter_map(|row| row[j].as_number())
                    .collect();
                if values.is_empty() {
                    return Err(DataError::AllMissingNumeric(name.clone()));
                }
                values.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
                let edges = quantile_edges(
                    &values,
                    bins_per_numeric,
                    thresholds.get(name).map_or(&[][..], |t| t.as_slice()),
                );
                ColumnSpec {
                    name: name.clone(),
                    kind: ColumnKind::Numeric,
                    categories: vec![],
                    bin_edges: edges,
                    missing_token: missing_token.to_string(),
                }
            }
        };
        columns.push(spec);
    }
    TableSchema::new(columns)
}

/// Nearest-rank quantile cut points at k/B for k = 0..=B over sorted values,
/// with rule thresholds (clamped to the observed range) injected, then
/// sorted and deduplicated.
fn quantile_edges(sorted: &[f64], bins: usize, thresholds: &[f64]) -> Vec<f64> {
    let n = sorted.len();
    let mut edges: Vec<f64> = (0..=bins)
        .map(|k| {
            // ceil(k/B * n) as a 1-based rank, clamped to at least 1.
            let rank = (k * n).div_ceil(bins).max(1);
            sorted[rank - 1]
        })
        .collect();
    let (min, max) = (sorted[0], sorted[n - 1]);
    for &t in thresholds {
        edges.push(t.clamp(min, max));
    }
    edges.sort_by(|a, b| a.partial_cmp(b).expect("finite edges"));
    edges.dedup();
    if edges.len() < 2 {
        // Constant column: a single zero-width bin via the next representable
        // float keeps edges strictly ascending.
        let c = edges[0];
        edges.push(next_up(c));
    }
    edges
}

pub(crate) fn next_up(x: f64) -> f64 {
    if x == f64::INFINITY {
        return x;
    }
    if x == 0.0 {
        return f64::from_bits(1);
    }
    let bits = x.to_bits();
    if x > 0.0 {
        f64::from_bits(bits + 1)
    } else {
        f64::from_bits(bits - 1)
    }
}

pub(crate) fn next_down(x: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        return x;
    }
    if x == 0.0 {
        return -f64::from_bits(1);
    }
    let bits = x.to_bits();
    if x > 0.0 {
        f64::from_bits(bits - 1)
    } else {
        f64::from_bits(bits + 1)
    }
}

/// Draw from the open interior (lo, hi). Keeping the lower edge out of the
/// decode support makes every comparison predicate decidable per bin once
/// rule thresholds are bin edges, which the sampling-mask soundness relies
/// on. Degenerate one-ulp bins decode to their lower edge.
fn draw_in_bin(lo: f64, hi: f64, rng: &mut impl Rng) -> f64 {
    if next_up(lo) >= hi {
        return lo;
    }
    loop {
        let x = rng.gen_range(lo..hi);
        if x > lo {
            return x;
        }
    }
}

/// Smallest and largest value a decoded row can take for bin `i`; `None`
/// for the missing index.
pub(crate) fn decode_support(spec: &ColumnSpec, i: usize) -> (f64, f64) {
    let (lo, hi, _) = spec.bin_interval(i);
    if next_up(lo) >= hi {
        (lo, lo)
    } else {
        (next_up(lo), next_down(hi))
    }
}

/// Encode one record against the schema. Categorical labels must be in the
/// vocabulary; numeric values must be finite (out-of-range values clamp into
/// the boundary bins); missing maps to the column's missing index.
pub fn encode_row(schema: &TableSchema, row: &[Value]) -> Result<EncodedRow, DataError> {
    if row.len() != schema.n_columns() {
        return Err(DataError::RowWidthMismatch {
            expected: schema.n_columns(),
            got: row.len(),
        });
    }
    let mut indices = Vec::with_capacity(row.len());
    for (spec, value) in schema.columns.iter().zip(row) {
        let idx = match (spec.kind, value) {
            (_, Value::Missing) => spec.missing_index(),
            (ColumnKind::Categorical, Value::Label(l)) => {
                spec.category_index(l).ok_or_else(|| DataError::UnseenLabel {
                    column: spec.name.clone(),
                    label: l.clone(),
                })?
            }
            (ColumnKind::Numeric, Value::Number(v)) => {
                if !v.is_finite() {
                    return Err(DataError::NonFiniteValue {
                        column: spec.name.clone(),
                    });
                }
                spec.bin_of(*v)
            }
            (ColumnKind::Categorical, Value::Number(_)) => {
                return Err(DataError::ValueKindMismatch {
                    column: spec.name.clone(),
                    expected: "categorical",
                })
            }
            (ColumnKind::Numeric, Value::Label(_)) => {
                return Err(DataError::ValueKindMismatch {
                    column: spec.name.clone(),
                    expected: "numeric",
                })
            }
        };
        indices.push(idx);
    }
    Ok(EncodedRow(indices))
}

/// Decode an encoded row: categorical indices map back to labels, numeric
/// bins draw a value uniformly within the bin (not the midpoint, which would
/// spike the marginals), missing indices become [`Value::Missing`].
pub fn decode_row(
    schema: &TableSchema,
    enc: &EncodedRow,
    rng: &mut impl Rng,
) -> Result<Vec<Value>, DataError> {
    if enc.0.len() != schema.n_columns() {
        return Err(DataError::RowWidthMismatch {
            expected: schema.n_columns(),
            got: enc.0.len(),
        });
    }
    let mut row = Vec::with_capacity(enc.0.len());
    for (spec, &idx) in schema.columns.iter().zip(&enc.0) {
        if idx >= spec.vocab_size() {
            return Err(DataError::IndexOutOfRange {
                column: spec.name.clone(),
                index: idx,
                size: spec.vocab_size(),
            });
        }
        let value = if idx == spec.missing_index() {
            Value::Missing
        } else {
            match spec.kind {
                ColumnKind::Categorical => Value::Label(spec.categories[idx].clone()),
                ColumnKind::Numeric => {
                    let (lo, hi, _) = spec.bin_interval(idx);
                    Value::Number(draw_in_bin(lo, hi, rng))
                }
            }
        };
        row.push(value);
    }
    Ok(row)
}

/// Encode every row of a dataset.
pub fn encode_dataset(schema: &TableSchema, data: &Dataset) -> Result<Vec<EncodedRow>, DataError> {
    data.rows.iter().map(|r| encode_row(schema, r)).collect()
}

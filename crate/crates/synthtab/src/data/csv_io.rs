use std::collections::BTreeMap;
use std::path::Path;

use super::schema::{ColumnKind, Dataset, Value, DEFAULT_MISSING_TOKEN};
use super::DataError;

/// Optional overrides for schema inference: per-column kinds and the marker
/// string that denotes a missing cell.
#[derive(Debug, Clone)]
pub struct SchemaHint {
    pub kinds: BTreeMap<String, ColumnKind>,
    pub missing_marker: String,
}

impl Default for SchemaHint {
    fn default() -> Self {
        SchemaHint {
            kinds: BTreeMap::new(),
            missing_marker: DEFAULT_MISSING_TOKEN.to_string(),
        }
    }
}

impl SchemaHint {
    pub fn with_categorical<I: IntoIterator<Item = S>, S: Into<String>>(mut self, cols: I) -> Self {
        for c in cols {
            self.kinds.insert(c.into(), ColumnKind::Categorical);
        }
        self
    }

    pub fn with_numeric<I: IntoIterator<Item = S>, S: Into<String>>(mut self, cols: I) -> Self {
        for c in cols {
            self.kinds.insert(c.into(), ColumnKind::Numeric);
        }
        self
    }
}

/// Load a headered CSV. Cells equal to the missing marker become
/// [`Value::Missing`]; a column is numeric iff every non-missing cell parses
/// as a number, unless the hint says otherwise. Leading/trailing spaces are
/// trimmed (census exports pad fields after commas).
pub fn load_csv(path: impl AsRef<Path>, hint: &SchemaHint) -> Result<Dataset, DataError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })?;
    load_csv_reader(file, hint)
}

pub fn load_csv_reader(reader: impl std::io::Read, hint: &SchemaHint) -> Result<Dataset, DataError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(reader);

    let names: Vec<String> = rdr
        .headers()?
        .iter()
        .map(|h| h.to_string())
        .collect();

    for hinted in hint.kinds.keys() {
        if !names.contains(hinted) {
            return Err(DataError::UnknownHintColumn(hinted.clone()));
        }
    }

    let mut raw: Vec<Vec<Option<String>>> = Vec::new();
    for record in rdr.records() {
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                if let csv::ErrorKind::UnequalLengths { pos, expected_len, len } = e.kind() {
                    return Err(DataError::RaggedRow {
                        line: pos.as_ref().map(|p| p.line()).unwrap_or_default(),
                        expected: *expected_len as usize,
                        got: *len as usize,
                    });
                }
                return Err(e.into());
            }
        };
        let row = record
            .iter()
            .map(|cell| {
                if cell == hint.missing_marker {
                    None
                } else {
                    Some(cell.to_string())
                }
            })
            .collect();
        raw.push(row);
    }

    // Kind inference per column.
    let kinds: Vec<ColumnKind> = names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            if let Some(k) = hint.kinds.get(name) {
                return *k;
            }
            let mut any = false;
            let all_numeric = raw.iter().all(|row| match &row[j] {
                Some(cell) => {
                    any = true;
                    cell.parse::<f64>().is_ok()
                }
                None => true,
            });
            if any && all_numeric {
                ColumnKind::Numeric
            } else {
                ColumnKind::Categorical
            }
        })
        .collect();

    let mut rows = Vec::with_capacity(raw.len());
    for (i, raw_row) in raw.into_iter().enumerate() {
        let mut row = Vec::with_capacity(names.len());
        for (j, cell) in raw_row.into_iter().enumerate() {
            let value = match cell {
                None => Value::Missing,
                Some(cell) => match kinds[j] {
                    ColumnKind::Numeric => {
                        let v = cell.parse::<f64>().map_err(|_| DataError::NumericParse {
                            column: names[j].clone(),
                            // +2: one for the header, one for 1-based lines.
                            line: (i + 2) as u64,
                            cell: cell.clone(),
                        })?;
                        Value::Number(v)
                    }
                    ColumnKind::Categorical => Value::Label(cell),
                },
            };
            row.push(value);
        }
        rows.push(row);
    }

    Ok(Dataset { names, kinds, rows })
}

/// Write a dataset as CSV with the schema header; missing values are written
/// as the marker. Numbers use the shortest round-trip decimal form, so a
/// write/load cycle reproduces values exactly.
pub fn write_csv(
    path: impl AsRef<Path>,
    data: &Dataset,
    missing_marker: &str,
) -> Result<(), DataError> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut wtr = csv::Writer::from_writer(std::io::BufWriter::new(file));
    wtr.write_record(&data.names)?;
    let mut buf = String::new();
    for row in &data.rows {
        wtr.write_record(row.iter().map(|v| {
            buf.clear();
            match v {
                Value::Missing => buf.push_str(missing_marker),
                Value::Label(l) => buf.push_str(l),
                Value::Number(x) => {
                    use std::fmt::Write;
                    write!(buf, "{x}").expect("format");
                }
            }
            buf.clone()
        }))?;
    }
    wtr.flush().map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load_str(text: &str, hint: &SchemaHint) -> Result<Dataset, DataError> {
        load_csv_reader(text.as_bytes(), hint)
    }

    #[test]
    fn infers_numeric_and_categorical_kinds() {
        let data = load_str("age,education\n38,HS-grad\n52,Doctorate\n", &SchemaHint::default())
            .unwrap();
        assert_eq!(data.n_rows(), 2);
        assert_eq!(data.kinds, vec![ColumnKind::Numeric, ColumnKind::Categorical]);
        assert_eq!(data.rows[0][0], Value::Number(38.0));
        assert_eq!(data.rows[1][1], Value::Label("Doctorate".into()));
    }

    #[test]
    fn missing_marker_cells_become_missing() {
        let data = load_str("age,workclass\n38,?\n40,Private\n", &SchemaHint::default()).unwrap();
        assert_eq!(data.rows[0][1], Value::Missing);
        assert_eq!(data.rows[1][1], Value::Label("Private".into()));
    }

    #[test]
    fn leading_spaces_are_trimmed() {
        let data = load_str("age, education\n 38, HS-grad\n", &SchemaHint::default()).unwrap();
        assert_eq!(data.names[1], "education");
        assert_eq!(data.rows[0][1], Value::Label("HS-grad".into()));
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let err = load_str("a,b\n1,2,3\n", &SchemaHint::default()).unwrap_err();
        assert!(matches!(err, DataError::RaggedRow { expected: 2, got: 3, .. }));
    }

    #[test]
    fn hint_overrides_inference_and_unknown_hint_errors() {
        let hint = SchemaHint::default().with_categorical(["age"]);
        let data = load_str("age\n1\n2\n", &hint).unwrap();
        assert_eq!(data.kinds[0], ColumnKind::Categorical);

        let hint = SchemaHint::default().with_numeric(["nope"]);
        let err = load_str("age\n1\n", &hint).unwrap_err();
        assert!(matches!(err, DataError::UnknownHintColumn(c) if c == "nope"));
    }

    #[test]
    fn hinted_numeric_with_bad_cell_errors() {
        let hint = SchemaHint::default().with_numeric(["age"]);
        let err = load_str("age\nabc\n", &hint).unwrap_err();
        assert!(matches!(err, DataError::NumericParse { line: 2, .. }));
    }

    #[test]
    fn all_missing_column_defaults_to_categorical() {
        let data = load_str("a,b\n?,1\n?,2\n", &SchemaHint::default()).unwrap();
        assert_eq!(data.kinds[0], ColumnKind::Categorical);
    }

    #[test]
    fn write_then_load_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let data = load_str(
            "age,workclass\n38.25,?\n40,Private\n",
            &SchemaHint::default(),
        )
        .unwrap();
        write_csv(&path, &data, "?").unwrap();
        let back = load_csv(&path, &SchemaHint::default()).unwrap();
        assert_eq!(back, data);
    }
}

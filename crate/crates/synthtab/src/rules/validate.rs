use std::collections::BTreeMap;

use crate::data::{ColumnKind, Dataset, TableSchema};

use super::ast::{Predicate, Rule, RuleBody};
use super::RuleError;

/// Check every rule against the schema: referenced columns exist, predicate
/// kinds match column kinds, membership labels are in the vocabulary, and
/// implication clauses relate distinct columns.
pub fn validate_rules(rules: &[Rule], schema: &TableSchema) -> Result<(), RuleError> {
    for rule in rules {
        match &rule.body {
            RuleBody::Implications(clauses) => {
                for clause in clauses {
                    for pred in &clause.antecedent {
                        validate_predicate(rule, pred, schema)?;
                        if pred.column() == clause.consequent.column() {
                            return Err(RuleError::SelfImplication {
                                rule: rule.id.clone(),
                                column: pred.column().to_string(),
                            });
                        }
                    }
                    validate_predicate(rule, &clause.consequent, schema)?;
                }
            }
            RuleBody::Mapping {
                column_a,
                column_b,
                pairs,
            } => {
                if column_a == column_b {
                    return Err(RuleError::MappingSameColumn {
                        rule: rule.id.clone(),
                    });
                }
                for (name, side) in [(column_a, "a"), (column_b, "b")] {
                    let spec = schema.column(name).ok_or_else(|| RuleError::UnknownColumn {
                        rule: rule.id.clone(),
                        column: name.clone(),
                    })?;
                    if spec.kind != ColumnKind::Categorical {
                        return Err(RuleError::KindMismatch {
                            rule: rule.id.clone(),
                            column: name.clone(),
                            expected: "categorical",
                        });
                    }
                    let _ = side;
                }
                for (a, b) in pairs {
                    for (name, label) in [(column_a, a), (column_b, b)] {
                        let spec = schema.column(name).expect("checked above");
                        if spec.category_index(label).is_none() {
                            return Err(RuleError::UnknownLabel {
                                rule: rule.id.clone(),
                                column: name.clone(),
                                label: label.clone(),
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

fn validate_predicate(
    rule: &Rule,
    pred: &Predicate,
    schema: &TableSchema,
) -> Result<(), RuleError> {
    let spec = schema
        .column(pred.column())
        .ok_or_else(|| RuleError::UnknownColumn {
            rule: rule.id.clone(),
            column: pred.column().to_string(),
        })?;
    match pred {
        Predicate::Membership { labels, .. } => {
            if spec.kind != ColumnKind::Categorical {
                return Err(RuleError::KindMismatch {
                    rule: rule.id.clone(),
                    column: spec.name.clone(),
                    expected: "categorical",
                });
            }
            for label in labels {
                if spec.category_index(label).is_none() {
                    return Err(RuleError::UnknownLabel {
                        rule: rule.id.clone(),
                        column: spec.name.clone(),
                        label: label.clone(),
                    });
                }
            }
        }
        Predicate::Comparison { threshold, .. } => {
            if spec.kind != ColumnKind::Numeric {
                return Err(RuleError::KindMismatch {
                    rule: rule.id.clone(),
                    column: spec.name.clone(),
                    expected: "numeric",
                });
            }
            if !threshold.is_finite() {
                return Err(RuleError::NonFiniteThreshold {
                    rule: rule.id.clone(),
                });
            }
        }
    }
    Ok(())
}

/// Comparison thresholds per column, for injection as bin edges before the
/// encoder is built. Sorted and deduplicated per column.
pub fn rule_thresholds(rules: &[Rule]) -> BTreeMap<String, Vec<f64>> {
    let mut out: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut visit = |pred: &Predicate| {
        if let Predicate::Comparison {
            column, threshold, ..
        } = pred
        {
            out.entry(column.clone()).or_default().push(*threshold);
        }
    };
    for rule in rules {
        if let RuleBody::Implications(clauses) = &rule.body {
            for clause in clauses {
                clause.antecedent.iter().for_each(&mut visit);
                visit(&clause.consequent);
            }
        }
    }
    for thresholds in out.values_mut() {
        thresholds.sort_by(|a, b| a.partial_cmp(b).expect("finite thresholds"));
        thresholds.dedup();
    }
    out
}

/// Fill a mapping rule's pair table with the distinct label pairs observed
/// in the training data. Errors when the observed pairs are not a bijection.
/// Non-mapping rules are returned unchanged.
pub fn fit_mapping(rule: &Rule, train: &Dataset) -> Result<Rule, RuleError> {
    let RuleBody::Mapping {
        column_a, column_b, ..
    } = &rule.body
    else {
        return Ok(rule.clone());
    };
    let a_idx = train
        .column_index(column_a)
        .ok_or_else(|| RuleError::UnknownColumn {
            rule: rule.id.clone(),
            column: column_a.clone(),
        })?;
    let b_idx = train
        .column_index(column_b)
        .ok_or_else(|| RuleError::UnknownColumn {
            rule: rule.id.clone(),
            column: column_b.clone(),
        })?;

    let mut a_to_b: BTreeMap<&str, &str> = BTreeMap::new();
    let mut b_to_a: BTreeMap<&str, &str> = BTreeMap::new();
    for row in &train.rows {
        let (Some(a), Some(b)) = (row[a_idx].as_label(), row[b_idx].as_label()) else {
            continue;
        };
        if let Some(&prev) = a_to_b.get(a) {
            if prev != b {
                return Err(RuleError::MappingConflict {
                    rule: rule.id.clone(),
                    label: a.to_string(),
                    first: prev.to_string(),
                    second: b.to_string(),
                });
            }
        } else {
            a_to_b.insert(a, b);
        }
        if let Some(&prev) = b_to_a.get(b) {
            if prev != a {
                return Err(RuleError::MappingConflict {
                    rule: rule.id.clone(),
                    label: b.to_string(),
                    first: prev.to_string(),
                    second: a.to_string(),
                });
            }
        } else {
            b_to_a.insert(b, a);
        }
    }

    if a_to_b.is_empty() {
        log::warn!(
            "rule `{}`: no co-occurring label pairs observed; the mapping is vacuous",
            rule.id
        );
    }

    let pairs: Vec<(String, String)> = a_to_b
        .into_iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect();
    let mut fitted = rule.clone();
    if let RuleBody::Mapping { pairs: p, .. } = &mut fitted.body {
        *p = pairs;
    }
    Ok(fitted)
}

/// [`fit_mapping`] over a whole rule list.
pub fn fit_mappings(rules: &[Rule], train: &Dataset) -> Result<Vec<Rule>, RuleError> {
    rules.iter().map(|r| fit_mapping(r, train)).collect()
}

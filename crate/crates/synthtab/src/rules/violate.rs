use std::collections::BTreeMap;

use crate::data::{Dataset, Value};

use super::ast::{Predicate, Rule, RuleBody};

/// Three-valued predicate outcome: a missing value in a referenced column
/// leaves the predicate undetermined, and undetermined never violates.
fn pred_holds(pred: &Predicate, value: &Value) -> Option<bool> {
    match (pred, value) {
        (Predicate::Membership { op, labels, .. }, Value::Label(l)) => {
            let contained = labels.iter().any(|x| x == l);
            Some(match op {
                super::ast::MembershipOp::In => contained,
                super::ast::MembershipOp::NotIn => !contained,
            })
        }
        (Predicate::Comparison { op, threshold, .. }, Value::Number(v)) => {
            Some(op.holds(*v, *threshold))
        }
        _ => None,
    }
}

/// Does the row violate the rule? Implications are violated when some clause
/// has a fully-true antecedent and a false consequent; mappings when both
/// values are known to the learned pair table but the pair is not in it.
/// Rows with a missing value in a referenced column never violate.
pub fn violates(rule: &Rule, columns: &[String], row: &[Value]) -> bool {
    let col = |name: &str| columns.iter().position(|c| c == name);
    match &rule.body {
        RuleBody::Implications(clauses) => clauses.iter().any(|clause| {
            let antecedent_holds = clause.antecedent.iter().all(|p| {
                col(p.column())
                    .and_then(|i| pred_holds(p, &row[i]))
                    .unwrap_or(false)
            });
            if !antecedent_holds {
                return false;
            }
            let consequent = &clause.consequent;
            match col(consequent.column()).and_then(|i| pred_holds(consequent, &row[i])) {
                Some(holds) => !holds,
                None => false,
            }
        }),
        RuleBody::Mapping {
            column_a,
            column_b,
            pairs,
        } => {
            let (Some(ai), Some(bi)) = (col(column_a), col(column_b)) else {
                return false;
            };
            let (Some(a), Some(b)) = (row[ai].as_label(), row[bi].as_label()) else {
                return false;
            };
            let in_domain = pairs.iter().any(|(pa, _)| pa == a);
            let in_codomain = pairs.iter().any(|(_, pb)| pb == b);
            if !in_domain || !in_codomain {
                return false;
            }
            !pairs.iter().any(|(pa, pb)| pa == a && pb == b)
        }
    }
}

/// Number of violating rows per rule id.
pub fn violation_counts(rules: &[Rule], data: &Dataset) -> BTreeMap<String, usize> {
    rules
        .iter()
        .map(|rule| {
            let count = data
                .rows
                .iter()
                .filter(|row| violates(rule, &data.names, row))
                .count();
            (rule.id.clone(), count)
        })
        .collect()
}

/// Fraction of violating rows per rule id, in [0, 1]. An empty dataset
/// yields 0 for every rule (with a warning: the measurement is vacuous).
pub fn violation_rate(rules: &[Rule], data: &Dataset) -> BTreeMap<String, f64> {
    if data.n_rows() == 0 {
        log::warn!("violation_rate over an empty dataset is vacuously 0");
        return rules.iter().map(|r| (r.id.clone(), 0.0)).collect();
    }
    let n = data.n_rows() as f64;
    violation_counts(rules, data)
        .into_iter()
        .map(|(id, c)| (id, c as f64 / n))
        .collect()
}

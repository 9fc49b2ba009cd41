//! Compilation of validated rules into per-column sampling masks.
//!
//! A rule is enforced at its last-referenced column under the sampling
//! order: masking any earlier column could forbid values that still have
//! valid completions, while masking at the last referenced column decides
//! validity exactly. Masks are derived from full violation semantics, so
//! contrapositives come for free (a rule over {relationship, sex} masks
//! whichever of the two is sampled later, in either direction).

use crate::data::encode::decode_support;
use crate::data::{ColumnKind, ColumnSpec, TableSchema};

use super::ast::{CompareOp, MembershipOp, Predicate, Rule, RuleBody};
use super::RuleError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Tri {
    True,
    False,
    Unknown,
}

/// A predicate lowered to a per-encoded-index truth table. Numeric entries
/// are evaluated over the bin's decode support, so they are `Unknown` only
/// for bins that genuinely straddle the threshold — which cannot happen for
/// validated rules, whose thresholds are injected as bin edges. The missing
/// index is always `Unknown`.
#[derive(Debug, Clone)]
struct LoweredPred {
    col: usize,
    holds: Vec<Tri>,
}

impl LoweredPred {
    fn eval(&self, index: usize) -> Tri {
        self.holds[index]
    }
}

#[derive(Debug, Clone)]
struct LoweredClause {
    antecedent: Vec<LoweredPred>,
    consequent: LoweredPred,
}

#[derive(Debug, Clone)]
enum LoweredRule {
    Implications(Vec<LoweredClause>),
    Mapping {
        col_a: usize,
        col_b: usize,
        /// ok[a_index][b_index], sized over the two vocabularies incl. missing.
        ok: Vec<Vec<bool>>,
        in_domain: Vec<bool>,
        in_codomain: Vec<bool>,
    },
}

/// Rules compiled against a schema and a sampling order, ready to answer
/// "which values of this column are forbidden given the sampled prefix".
/// Immutable after construction; queries are pure.
#[derive(Debug, Clone)]
pub struct MaskPlan {
    schema: TableSchema,
    /// order[pos] = schema column index.
    order: Vec<usize>,
    /// schema column index -> order position.
    pos_of_col: Vec<usize>,
    rule_ids: Vec<String>,
    lowered: Vec<LoweredRule>,
    /// Per order position, indices into `lowered` enforced there.
    enforced_at: Vec<Vec<usize>>,
}

/// Assign every rule to its enforcement column under `column_order` and
/// lower its predicates to index tables. `column_order` may be a subset of
/// the schema's columns as long as it covers every rule; the generator and
/// sampler use full permutations.
pub fn compile_mask_plan(
    rules: &[Rule],
    schema: &TableSchema,
    column_order: &[String],
) -> Result<MaskPlan, RuleError> {
    let mut order = Vec::with_capacity(column_order.len());
    let mut pos_of_col = vec![usize::MAX; schema.n_columns()];
    for name in column_order {
        let idx = schema
            .column_index(name)
            .ok_or_else(|| RuleError::OrderUnknownColumn(name.clone()))?;
        if pos_of_col[idx] != usize::MAX {
            return Err(RuleError::OrderDuplicateColumn(name.clone()));
        }
        pos_of_col[idx] = order.len();
        order.push(idx);
    }

    let mut rule_ids = Vec::with_capacity(rules.len());
    let mut lowered = Vec::with_capacity(rules.len());
    let mut enforced_at: Vec<Vec<usize>> = vec![Vec::new(); order.len()];
    for rule in rules {
        let mut last_pos = 0usize;
        for col in rule.referenced_columns() {
            let idx = schema
                .column_index(col)
                .ok_or_else(|| RuleError::UnknownColumn {
                    rule: rule.id.clone(),
                    column: col.to_string(),
                })?;
            let pos = pos_of_col[idx];
            if pos == usize::MAX {
                return Err(RuleError::ColumnNotInOrder {
                    rule: rule.id.clone(),
                    column: col.to_string(),
                });
            }
            last_pos = last_pos.max(pos);
        }
        enforced_at[last_pos].push(lowered.len());
        lowered.push(lower_rule(rule, schema)?);
        rule_ids.push(rule.id.clone());
    }

    Ok(MaskPlan {
        schema: schema.clone(),
        order,
        pos_of_col,
        rule_ids,
        lowered,
        enforced_at,
    })
}

fn lower_rule(rule: &Rule, schema: &TableSchema) -> Result<LoweredRule, RuleError> {
    match &rule.body {
        RuleBody::Implications(clauses) => {
            let lowered = clauses
                .iter()
                .map(|clause| {
                    Ok(LoweredClause {
                        antecedent: clause
                            .antecedent
                            .iter()
                            .map(|p| lower_pred(rule, p, schema))
                            .collect::<Result<_, _>>()?,
                        consequent: lower_pred(rule, &clause.consequent, schema)?,
                    })
                })
                .collect::<Result<Vec<_>, RuleError>>()?;
            Ok(LoweredRule::Implications(lowered))
        }
        RuleBody::Mapping {
            column_a,
            column_b,
            pairs,
        } => {
            let col_a = schema
                .column_index(column_a)
                .ok_or_else(|| RuleError::UnknownColumn {
                    rule: rule.id.clone(),
                    column: column_a.clone(),
                })?;
            let col_b = schema
                .column_index(column_b)
                .ok_or_else(|| RuleError::UnknownColumn {
                    rule: rule.id.clone(),
                    column: column_b.clone(),
                })?;
            let spec_a = &schema.columns[col_a];
            let spec_b = &schema.columns[col_b];
            let mut ok = vec![vec![false; spec_b.vocab_size()]; spec_a.vocab_size()];
            let mut in_domain = vec![false; spec_a.vocab_size()];
            let mut in_codomain = vec![false; spec_b.vocab_size()];
            for (a, b) in pairs {
                let ai =
                    spec_a
                        .category_index(a)
                        .ok_or_else(|| RuleError::UnknownLabel {
                            rule: rule.id.clone(),
                            column: spec_a.name.clone(),
                            label: a.clone(),
                        })?;
                let bi =
                    spec_b
                        .category_index(b)
                        .ok_or_else(|| RuleError::UnknownLabel {
                            rule: rule.id.clone(),
                            column: spec_b.name.clone(),
                            label: b.clone(),
                        })?;
                ok[ai][bi] = true;
                in_domain[ai] = true;
                in_codomain[bi] = true;
            }
            Ok(LoweredRule::Mapping {
                col_a,
                col_b,
                ok,
                in_domain,
                in_codomain,
            })
        }
    }
}

fn lower_pred(
    rule: &Rule,
    pred: &Predicate,
    schema: &TableSchema,
) -> Result<LoweredPred, RuleError> {
    let col = schema
        .column_index(pred.column())
        .ok_or_else(|| RuleError::UnknownColumn {
            rule: rule.id.clone(),
            column: pred.column().to_string(),
        })?;
    let spec = &schema.columns[col];
    let mut holds = vec![Tri::Unknown; spec.vocab_size()];
    match pred {
        Predicate::Membership { op, labels, .. } => {
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
            for (i, category) in spec.categories.iter().enumerate() {
                let contained = labels.iter().any(|l| l == category);
                let value = match op {
                    MembershipOp::In => contained,
                    MembershipOp::NotIn => !contained,
                };
                holds[i] = if value { Tri::True } else { Tri::False };
            }
        }
        Predicate::Comparison { op, threshold, .. } => {
            if spec.kind != ColumnKind::Numeric {
                return Err(RuleError::KindMismatch {
                    rule: rule.id.clone(),
                    column: spec.name.clone(),
                    expected: "numeric",
                });
            }
            for i in 0..spec.n_bins() {
                let (lo, hi) = decode_support(spec, i);
                holds[i] = compare_over(*op, *threshold, lo, hi);
            }
        }
    }
    Ok(LoweredPred { col, holds })
}

/// Truth of `value <op> threshold` over every value in the closed interval
/// [lo, hi]. Shared with the contingency-table bucketing.
pub(crate) fn compare_over(op: CompareOp, threshold: f64, lo: f64, hi: f64) -> Tri {
    let (all, none) = match op {
        CompareOp::Ge => (lo >= threshold, hi < threshold),
        CompareOp::Gt => (lo > threshold, hi <= threshold),
        CompareOp::Le => (hi <= threshold, lo > threshold),
        CompareOp::Lt => (hi < threshold, lo >= threshold),
    };
    if all {
        Tri::True
    } else if none {
        Tri::False
    } else {
        Tri::Unknown
    }
}

impl MaskPlan {
    pub fn schema(&self) -> &TableSchema {
        &self.schema
    }

    /// Order positions as schema column indices.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn n_positions(&self) -> usize {
        self.order.len()
    }

    pub fn column_at(&self, pos: usize) -> &ColumnSpec {
        &self.schema.columns[self.order[pos]]
    }

    pub fn has_rules_at(&self, pos: usize) -> bool {
        !self.enforced_at[pos].is_empty()
    }

    /// Rule ids enforced at each order position.
    pub fn enforcement_summary(&self) -> Vec<(String, Vec<String>)> {
        self.enforced_at
            .iter()
            .enumerate()
            .map(|(pos, idxs)| {
                (
                    self.column_at(pos).name.clone(),
                    idxs.iter().map(|&i| self.rule_ids[i].clone()).collect(),
                )
            })
            .collect()
    }

    /// Forbidden encoded indices of the column at order position `pos`,
    /// given the encoded prefix (one value per earlier position). An index
    /// is forbidden iff some rule enforced here is violated by every
    /// decodable completion of prefix + that index. The missing index is
    /// never forbidden.
    pub fn forbidden_at(&self, pos: usize, prefix: &[usize]) -> Vec<usize> {
        debug_assert_eq!(prefix.len(), pos);
        let spec = self.column_at(pos);
        let vocab = spec.vocab_size();
        let missing = spec.missing_index();
        let mut forbidden = vec![false; vocab];
        let candidate_col = self.order[pos];

        for &rule_idx in &self.enforced_at[pos] {
            match &self.lowered[rule_idx] {
                LoweredRule::Implications(clauses) => {
                    for v in 0..vocab {
                        if v == missing || forbidden[v] {
                            continue;
                        }
                        let value_of = |col: usize| {
                            if col == candidate_col {
                                v
                            } else {
                                prefix[self.pos_of_col[col]]
                            }
                        };
                        let violated = clauses.iter().any(|clause| {
                            clause
                                .antecedent
                                .iter()
                                .all(|p| p.eval(value_of(p.col)) == Tri::True)
                                && clause.consequent.eval(value_of(clause.consequent.col))
                                    == Tri::False
                        });
                        if violated {
                            forbidden[v] = true;
                        }
                    }
                }
                LoweredRule::Mapping {
                    col_a,
                    col_b,
                    ok,
                    in_domain,
                    in_codomain,
                } => {
                    if candidate_col == *col_b {
                        let a = prefix[self.pos_of_col[*col_a]];
                        if in_domain[a] {
                            for (v, item) in forbidden.iter_mut().enumerate().take(vocab) {
                                if v != missing && in_codomain[v] && !ok[a][v] {
                                    *item = true;
                                }
                            }
                        }
                    } else {
                        let b = prefix[self.pos_of_col[*col_b]];
                        if in_codomain[b] {
                            for (v, item) in forbidden.iter_mut().enumerate().take(vocab) {
                                if v != missing && in_domain[v] && !ok[v][b] {
                                    *item = true;
                                }
                            }
                        }
                    }
                }
            }
        }

        forbidden
            .iter()
            .enumerate()
            .filter_map(|(v, &f)| f.then_some(v))
            .collect()
    }

    /// Name-addressed variant of [`MaskPlan::forbidden_at`].
    pub fn forbidden_values(&self, column: &str, prefix: &[usize]) -> Result<Vec<usize>, RuleError> {
        let col = self
            .schema
            .column_index(column)
            .filter(|&c| self.pos_of_col[c] != usize::MAX)
            .ok_or_else(|| RuleError::PlanUnknownColumn(column.to_string()))?;
        let pos = self.pos_of_col[col];
        if prefix.len() != pos {
            return Err(RuleError::PrefixLengthMismatch {
                column: column.to_string(),
                expected: pos,
                got: prefix.len(),
            });
        }
        Ok(self.forbidden_at(pos, prefix))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{ColumnSpec, Dataset, Value};
    use crate::rules::{fit_mappings, parse_rules, violates};

    fn schema() -> TableSchema {
        TableSchema::new(vec![
            ColumnSpec {
                name: "age".into(),
                kind: ColumnKind::Numeric,
                categories: vec![],
                bin_edges: vec![17.0, 20.0, 25.0, 48.0, 90.0],
                missing_token: "?".into(),
            },
            ColumnSpec {
                name: "education".into(),
                kind: ColumnKind::Categorical,
                categories: vec!["Doctorate".into(), "HS-grad".into(), "Prof-school".into()],
                bin_edges: vec![],
                missing_token: "?".into(),
            },
            ColumnSpec {
                name: "relationship".into(),
                kind: ColumnKind::Categorical,
                categories: vec!["Husband".into(), "Unmarried".into(), "Wife".into()],
                bin_edges: vec![],
                missing_token: "?".into(),
            },
            ColumnSpec {
                name: "sex".into(),
                kind: ColumnKind::Categorical,
                categories: vec!["Female".into(), "Male".into()],
                bin_edges: vec![],
                missing_token: "?".into(),
            },
        ])
        .unwrap()
    }

    fn names(schema: &TableSchema) -> Vec<String> {
        schema.columns.iter().map(|c| c.name.clone()).collect()
    }

    #[test]
    fn rule_is_enforced_at_its_last_referenced_column() {
        let schema = schema();
        let rules =
            parse_rules(r#"RULE r1: IF education IN ("Doctorate","Prof-school") THEN age >= 25"#)
                .unwrap();

        // age before education: enforce at education.
        let plan = compile_mask_plan(&rules, &schema, &names(&schema)).unwrap();
        let summary = plan.enforcement_summary();
        assert_eq!(summary[1].0, "education");
        assert_eq!(summary[1].1, vec!["r1".to_string()]);

        // education before age: enforce at age.
        let order: Vec<String> = ["education", "relationship", "sex", "age"]
            .map(str::to_string)
            .to_vec();
        let plan = compile_mask_plan(&rules, &schema, &order).unwrap();
        let summary = plan.enforcement_summary();
        assert_eq!(summary[3].0, "age");
        assert_eq!(summary[3].1, vec!["r1".to_string()]);
    }

    #[test]
    fn partial_order_missing_a_rule_column_errors() {
        let schema = schema();
        let rules = parse_rules(r#"RULE r: IF education IN ("Doctorate") THEN age >= 25"#).unwrap();
        let err = compile_mask_plan(&rules, &schema, &["education".to_string()]).unwrap_err();
        assert!(matches!(err, RuleError::ColumnNotInOrder { .. }));
    }

    #[test]
    fn young_prefix_forbids_high_education() {
        let schema = schema();
        let rules =
            parse_rules(r#"RULE r1: IF education IN ("Doctorate","Prof-school") THEN age >= 25"#)
                .unwrap();
        let plan = compile_mask_plan(&rules, &schema, &names(&schema)).unwrap();
        // age bin 0 = [17, 20): entirely below 25.
        let forbidden = plan.forbidden_values("education", &[0]).unwrap();
        assert_eq!(forbidden, vec![0, 2], "Doctorate and Prof-school");
        // age bin 2 = [25, 48): nothing forbidden.
        assert!(plan.forbidden_values("education", &[2]).unwrap().is_empty());
        // missing age: nothing forbidden.
        let missing = schema.columns[0].missing_index();
        assert!(plan
            .forbidden_values("education", &[missing])
            .unwrap()
            .is_empty());
    }

    #[test]
    fn doctorate_prefix_forbids_young_age_bins() {
        let schema = schema();
        let rules =
            parse_rules(r#"RULE r1: IF education IN ("Doctorate","Prof-school") THEN age >= 25"#)
                .unwrap();
        let order: Vec<String> = ["education", "relationship", "sex", "age"]
            .map(str::to_string)
            .to_vec();
        let plan = compile_mask_plan(&rules, &schema, &order).unwrap();
        // prefix: education=Doctorate, relationship/sex arbitrary.
        let forbidden = plan.forbidden_values("age", &[0, 0, 0]).unwrap();
        assert_eq!(forbidden, vec![0, 1], "bins [17,20) and [20,25)");
        // education=HS-grad: nothing forbidden.
        assert!(plan.forbidden_values("age", &[1, 0, 0]).unwrap().is_empty());
    }

    #[test]
    fn wife_prefix_forbids_male() {
        let schema = schema();
        let rules = parse_rules(
            r#"RULE r4: IF relationship IN ("Wife") THEN sex IN ("Female"); IF relationship IN ("Husband") THEN sex IN ("Male")"#,
        )
        .unwrap();
        let plan = compile_mask_plan(&rules, &schema, &names(&schema)).unwrap();
        // prefix: age bin 0, education 0, relationship Wife (=2).
        let forbidden = plan.forbidden_values("sex", &[0, 0, 2]).unwrap();
        assert_eq!(forbidden, vec![1], "Male forbidden");
        // Husband (=0) forbids Female (=0).
        assert_eq!(plan.forbidden_values("sex", &[0, 0, 0]).unwrap(), vec![0]);
        // Unmarried (=1) forbids nothing.
        assert!(plan.forbidden_values("sex", &[0, 0, 1]).unwrap().is_empty());
    }

    #[test]
    fn mapping_masks_enforce_the_pair_table_in_both_directions() {
        let schema = TableSchema::new(vec![
            ColumnSpec {
                name: "education".into(),
                kind: ColumnKind::Categorical,
                categories: vec!["Bachelors".into(), "HS-grad".into()],
                bin_edges: vec![],
                missing_token: "?".into(),
            },
            ColumnSpec {
                name: "education-num".into(),
                kind: ColumnKind::Categorical,
                categories: vec!["13".into(), "9".into()],
                bin_edges: vec![],
                missing_token: "?".into(),
            },
        ])
        .unwrap();
        let train = Dataset {
            names: vec!["education".into(), "education-num".into()],
            kinds: vec![ColumnKind::Categorical, ColumnKind::Categorical],
            rows: vec![
                vec![Value::Label("Bachelors".into()), Value::Label("13".into())],
                vec![Value::Label("HS-grad".into()), Value::Label("9".into())],
            ],
        };
        let rules = parse_rules("RULE r3: MAP education <-> education-num").unwrap();
        let rules = fit_mappings(&rules, &train).unwrap();

        let order = vec!["education".to_string(), "education-num".to_string()];
        let plan = compile_mask_plan(&rules, &schema, &order).unwrap();
        // education=Bachelors (0) forbids education-num "9" (index 1).
        assert_eq!(plan.forbidden_values("education-num", &[0]).unwrap(), vec![1]);

        // Reversed order: enforcement flips to education.
        let order = vec!["education-num".to_string(), "education".to_string()];
        let plan = compile_mask_plan(&rules, &schema, &order).unwrap();
        assert_eq!(plan.enforcement_summary()[1].1, vec!["r3".to_string()]);
        // education-num "13" (0) forbids education HS-grad (1).
        assert_eq!(plan.forbidden_values("education", &[0]).unwrap(), vec![1]);
    }

    /// Brute-force oracle: an index is forbidden iff prefix + index violates
    /// some rule whose columns all lie in the prefix + candidate set,
    /// checked over every decodable completion by sampling bin interiors.
    fn oracle_forbidden(
        rules: &[Rule],
        schema: &TableSchema,
        order: &[String],
        pos: usize,
        prefix: &[usize],
    ) -> Vec<usize> {
        use crate::data::{decode_row, EncodedRow};
        use rand::SeedableRng;

        let col_indices: Vec<usize> = order
            .iter()
            .map(|n| schema.column_index(n).unwrap())
            .collect();
        let spec = &schema.columns[col_indices[pos]];
        let in_scope: Vec<&Rule> = rules
            .iter()
            .filter(|r| {
                r.referenced_columns().iter().all(|c| {
                    let ci = schema.column_index(c).unwrap();
                    col_indices[..=pos].contains(&ci)
                })
            })
            .collect();
        let names: Vec<String> = schema.columns.iter().map(|c| c.name.clone()).collect();

        let mut forbidden = Vec::new();
        for v in 0..spec.vocab_size() {
            if v == spec.missing_index() {
                continue;
            }
            // Build a full encoded row: prefix+v on order columns, missing
            // elsewhere (missing never violates, so it cannot mask a
            // violation of in-scope rules).
            let mut enc = vec![0usize; schema.n_columns()];
            for (c, s) in schema.columns.iter().enumerate() {
                enc[c] = s.missing_index();
            }
            for (p, &val) in prefix.iter().enumerate() {
                enc[col_indices[p]] = val;
            }
            enc[col_indices[pos]] = v;

            // Every decode of this encoded row must violate some in-scope
            // rule. Numeric bins are intervals; probe many interior points
            // plus the support bounds.
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
            let mut all_violate = true;
            for _ in 0..32 {
                let row = decode_row(schema, &EncodedRow(enc.clone()), &mut rng).unwrap();
                if !in_scope.iter().any(|r| violates(r, &names, &row)) {
                    all_violate = false;
                    break;
                }
            }
            if all_violate && !in_scope.is_empty() {
                forbidden.push(v);
            }
        }
        forbidden
    }

    #[test]
    fn forbidden_values_matches_brute_force_enumeration() {
        let schema = schema();
        let rules = parse_rules(
            r#"
RULE r1: IF education IN ("Doctorate","Prof-school") THEN age >= 25
RULE r4: IF relationship IN ("Wife") THEN sex IN ("Female"); IF relationship IN ("Husband") THEN sex IN ("Male")
RULE mix: IF sex IN ("Female") AND education IN ("HS-grad") THEN age < 48
"#,
        )
        .unwrap();
        let orders: Vec<Vec<String>> = vec![
            names(&schema),
            ["education", "relationship", "sex", "age"]
                .map(str::to_string)
                .to_vec(),
            ["sex", "age", "education", "relationship"]
                .map(str::to_string)
                .to_vec(),
        ];
        for order in orders {
            let plan = compile_mask_plan(&rules, &schema, &order).unwrap();
            // Enumerate every prefix of every length.
            for pos in 0..order.len() {
                let sizes: Vec<usize> = (0..pos)
                    .map(|p| plan.column_at(p).vocab_size())
                    .collect();
                let mut prefix = vec![0usize; pos];
                loop {
                    let got = plan.forbidden_at(pos, &prefix);
                    let want = oracle_forbidden(&rules, &schema, &order, pos, &prefix);
                    assert_eq!(got, want, "order {order:?} pos {pos} prefix {prefix:?}");
                    // Odometer increment.
                    let mut k = 0;
                    loop {
                        if k == pos {
                            break;
                        }
                        prefix[k] += 1;
                        if prefix[k] < sizes[k] {
                            break;
                        }
                        prefix[k] = 0;
                        k += 1;
                    }
                    if k == pos {
                        break;
                    }
                }
            }
        }
    }
}

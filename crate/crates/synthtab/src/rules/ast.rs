use std::fmt;

use serde::{Deserialize, Serialize};

/// Source position of a parsed rule, 1-based. Hand-built rules carry the
/// default (0, 0); equality between rules ignores it.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MembershipOp {
    In,
    NotIn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CompareOp {
    Lt,
    Le,
    Gt,
    Ge,
}

impl CompareOp {
    pub fn holds(self, value: f64, threshold: f64) -> bool {
        match self {
            CompareOp::Lt => value < threshold,
            CompareOp::Le => value <= threshold,
            CompareOp::Gt => value > threshold,
            CompareOp::Ge => value >= threshold,
        }
    }
}

/// A single test over one column: label membership for categorical columns,
/// a threshold comparison for numeric ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Predicate {
    Membership {
        column: String,
        op: MembershipOp,
        labels: Vec<String>,
    },
    Comparison {
        column: String,
        op: CompareOp,
        threshold: f64,
    },
}

impl Predicate {
    pub fn column(&self) -> &str {
        match self {
            Predicate::Membership { column, .. } | Predicate::Comparison { column, .. } => column,
        }
    }
}

/// `IF <conjunction> THEN <predicate>`. A row violates the clause when every
/// antecedent predicate holds and the consequent fails.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Implication {
    pub antecedent: Vec<Predicate>,
    pub consequent: Predicate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RuleBody {
    /// One or more `;`-separated implication clauses sharing the rule id; the
    /// rule is violated when any clause is.
    Implications(Vec<Implication>),
    /// `MAP a <-> b`: the two columns carry identical information. The pair
    /// table is learned from training data (see `fit_mapping`), so a freshly
    /// parsed mapping has empty `pairs`.
    Mapping {
        column_a: String,
        column_b: String,
        pairs: Vec<(String, String)>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Rule {
    pub id: String,
    pub body: RuleBody,
    #[serde(default)]
    pub span: Span,
}

impl PartialEq for Rule {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id && self.body == other.body
    }
}

impl Rule {
    /// Columns the rule mentions, in first-reference order, deduplicated.
    pub fn referenced_columns(&self) -> Vec<&str> {
        fn add<'a>(cols: &mut Vec<&'a str>, c: &'a str) {
            if !cols.contains(&c) {
                cols.push(c);
            }
        }
        let mut cols: Vec<&str> = Vec::new();
        match &self.body {
            RuleBody::Implications(clauses) => {
                for clause in clauses {
                    for p in &clause.antecedent {
                        add(&mut cols, p.column());
                    }
                    add(&mut cols, clause.consequent.column());
                }
            }
            RuleBody::Mapping {
                column_a, column_b, ..
            } => {
                add(&mut cols, column_a);
                add(&mut cols, column_b);
            }
        }
        cols
    }

    pub fn is_mapping(&self) -> bool {
        matches!(self.body, RuleBody::Mapping { .. })
    }
}

fn write_label(f: &mut fmt::Formatter<'_>, label: &str) -> fmt::Result {
    f.write_str("\"")?;
    for ch in label.chars() {
        if ch == '"' || ch == '\\' {
            f.write_str("\\")?;
        }
        write!(f, "{ch}")?;
    }
    f.write_str("\"")
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Predicate::Membership { column, op, labels } => {
                let op = match op {
                    MembershipOp::In => "IN",
                    MembershipOp::NotIn => "NOT IN",
                };
                write!(f, "{column} {op} (")?;
                for (i, l) in labels.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write_label(f, l)?;
                }
                f.write_str(")")
            }
            Predicate::Comparison {
                column,
                op,
                threshold,
            } => {
                let op = match op {
                    CompareOp::Lt => "<",
                    CompareOp::Le => "<=",
                    CompareOp::Gt => ">",
                    CompareOp::Ge => ">=",
                };
                write!(f, "{column} {op} {threshold}")
            }
        }
    }
}

impl fmt::Display for Implication {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("IF ")?;
        for (i, p) in self.antecedent.iter().enumerate() {
            if i > 0 {
                f.write_str(" AND ")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, " THEN {}", self.consequent)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RULE {}: ", self.id)?;
        match &self.body {
            RuleBody::Implications(clauses) => {
                for (i, c) in clauses.iter().enumerate() {
                    if i > 0 {
                        f.write_str("; ")?;
                    }
                    write!(f, "{c}")?;
                }
                Ok(())
            }
            RuleBody::Mapping {
                column_a, column_b, ..
            } => write!(f, "MAP {column_a} <-> {column_b}"),
        }
    }
}

/// Render a rule list back to DSL text, one rule per line.
pub fn print_rules(rules: &[Rule]) -> String {
    let mut out = String::new();
    for r in rules {
        out.push_str(&r.to_string());
        out.push('\n');
    }
    out
}

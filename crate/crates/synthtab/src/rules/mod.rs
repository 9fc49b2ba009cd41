//! The constraint DSL: parsing, validation against a schema, violation
//! checks, and compilation into per-column sampling masks.

mod ast;
mod mask;
mod parse;
mod validate;
mod violate;

pub use ast::{
    print_rules, CompareOp, Implication, MembershipOp, Predicate, Rule, RuleBody, Span,
};
pub use mask::{compile_mask_plan, MaskPlan};
pub use parse::{parse_rules, ParseError};
pub use validate::{fit_mapping, fit_mappings, rule_thresholds, validate_rules};
pub use violate::{violates, violation_counts, violation_rate};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RuleError {
    #[error("rule `{rule}`: unknown column `{column}`")]
    UnknownColumn { rule: String, column: String },
    #[error("rule `{rule}`: column `{column}` has no label `{label}` in its vocabulary")]
    UnknownLabel {
        rule: String,
        column: String,
        label: String,
    },
    #[error("rule `{rule}`: column `{column}` is not {expected}")]
    KindMismatch {
        rule: String,
        column: String,
        expected: &'static str,
    },
    #[error("rule `{rule}`: antecedent and consequent must reference distinct columns (`{column}`)")]
    SelfImplication { rule: String, column: String },
    #[error("rule `{rule}`: mapped columns must be distinct")]
    MappingSameColumn { rule: String },
    #[error(
        "rule `{rule}`: not a 1:1 mapping: `{label}` co-occurs with both `{first}` and `{second}`"
    )]
    MappingConflict {
        rule: String,
        label: String,
        first: String,
        second: String,
    },
    #[error("rule `{rule}`: non-finite comparison threshold")]
    NonFiniteThreshold { rule: String },
    #[error("rule `{rule}` references column `{column}` which is absent from the column order")]
    ColumnNotInOrder { rule: String, column: String },
    #[error("column order entry `{0}` is not a schema column")]
    OrderUnknownColumn(String),
    #[error("column order repeats `{0}`")]
    OrderDuplicateColumn(String),
    #[error("`{0}` is not a column of the mask plan")]
    PlanUnknownColumn(String),
    #[error("prefix has {got} values, column `{column}` sits at position {expected}")]
    PrefixLengthMismatch {
        column: String,
        expected: usize,
        got: usize,
    },
    #[error("rule `{rule}` is a mapping; fit it before compiling masks")]
    UnfittedMapping { rule: String },
}

//! Hand-written lexer and recursive-descent parser for the rule DSL.
//!
//! One rule per line, `#` starts a comment:
//!
//! ```text
//! rule := "RULE" ident ":" body
//! body := impl { ";" impl } | "MAP" ident "<->" ident
//! impl := "IF" conj "THEN" pred
//! conj := pred { "AND" pred }
//! pred := ident ("IN" | "NOT" "IN") "(" string { "," string } ")"
//!       | ident ("<" | "<=" | ">" | ">=") number
//! ```

use std::collections::BTreeMap;

use thiserror::Error;

use super::ast::{
    CompareOp, Implication, MembershipOp, Predicate, Rule, RuleBody, Span,
};

#[derive(Debug, Error, PartialEq)]
#[error("line {line}, column {col}: {message}")]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Str(String),
    Num(f64),
    Colon,
    Comma,
    Semi,
    LParen,
    RParen,
    MapArrow,
    Lt,
    Le,
    Gt,
    Ge,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Str(s) => format!("\"{s}\""),
            Tok::Num(n) => format!("`{n}`"),
            Tok::Colon => "`:`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Semi => "`;`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::MapArrow => "`<->`".into(),
            Tok::Lt => "`<`".into(),
            Tok::Le => "`<=`".into(),
            Tok::Gt => "`>`".into(),
            Tok::Ge => "`>=`".into(),
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '-'
}

fn lex_line(line: &str, line_no: u32) -> Result<Vec<(Tok, u32)>, ParseError> {
    let chars: Vec<char> = line.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0usize;
    let err = |col: usize, message: String| ParseError {
        line: line_no,
        col: col as u32 + 1,
        message,
    };
    while i < chars.len() {
        let c = chars[i];
        let col = (i + 1) as u32;
        match c {
            '#' => break,
            c if c.is_whitespace() => {
                i += 1;
            }
            ':' => {
                toks.push((Tok::Colon, col));
                i += 1;
            }
            ',' => {
                toks.push((Tok::Comma, col));
                i += 1;
            }
            ';' => {
                toks.push((Tok::Semi, col));
                i += 1;
            }
            '(' => {
                toks.push((Tok::LParen, col));
                i += 1;
            }
            ')' => {
                toks.push((Tok::RParen, col));
                i += 1;
            }
            '<' => {
                if chars.get(i + 1) == Some(&'-') && chars.get(i + 2) == Some(&'>') {
                    toks.push((Tok::MapArrow, col));
                    i += 3;
                } else if chars.get(i + 1) == Some(&'=') {
                    toks.push((Tok::Le, col));
                    i += 2;
                } else {
                    toks.push((Tok::Lt, col));
                    i += 1;
                }
            }
            '>' => {
                if chars.get(i + 1) == Some(&'=') {
                    toks.push((Tok::Ge, col));
                    i += 2;
                } else {
                    toks.push((Tok::Gt, col));
                    i += 1;
                }
            }
            '"' => {
                let mut s = String::new();
                let mut j = i + 1;
                let mut closed = false;
                while j < chars.len() {
                    match chars[j] {
                        '\\' => {
                            match chars.get(j + 1) {
                                Some(&escaped @ ('"' | '\\')) => {
                                    s.push(escaped);
                                    j += 2;
                                }
                                _ => return Err(err(j, "invalid escape sequence".into())),
                            };
                        }
                        '"' => {
                            closed = true;
                            j += 1;
                            break;
                        }
                        other => {
                            s.push(other);
                            j += 1;
                        }
                    }
                }
                if !closed {
                    return Err(err(i, "unterminated string literal".into()));
                }
                toks.push((Tok::Str(s), col));
                i = j;
            }
            c if is_ident_start(c) => {
                let start = i;
                while i < chars.len() && is_ident_continue(chars[i]) {
                    i += 1;
                }
                let ident: String = chars[start..i].iter().collect();
                toks.push((Tok::Ident(ident), col));
            }
            c if c.is_ascii_digit() || c == '-' || c == '+' || c == '.' => {
                let start = i;
                i += 1;
                while i < chars.len()
                    && (chars[i].is_ascii_digit()
                        || chars[i] == '.'
                        || chars[i] == 'e'
                        || chars[i] == 'E'
                        || ((chars[i] == '+' || chars[i] == '-')
                            && matches!(chars[i - 1], 'e' | 'E')))
                {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                let value: f64 = text
                    .parse()
                    .map_err(|_| err(start, format!("invalid number `{text}`")))?;
                toks.push((Tok::Num(value), col));
            }
            other => return Err(err(i, format!("unexpected character `{other}`"))),
        }
    }
    Ok(toks)
}

struct Cursor<'a> {
    toks: &'a [(Tok, u32)],
    pos: usize,
    line: u32,
    end_col: u32,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn col(&self) -> u32 {
        self.toks
            .get(self.pos)
            .map(|(_, c)| *c)
            .unwrap_or(self.end_col)
    }

    fn next(&mut self) -> Option<&Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line,
            col: self.col(),
            message: message.into(),
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) if s == kw => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => {
                let got = t.describe();
                Err(self.error(format!("expected `{kw}`, found {got}")))
            }
            None => Err(self.error(format!("expected `{kw}`, found end of line"))),
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == kw)
    }

    fn expect_ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            Some(t) => {
                let got = t.describe();
                Err(self.error(format!("expected {what}, found {got}")))
            }
            None => Err(self.error(format!("expected {what}, found end of line"))),
        }
    }

    fn expect_tok(&mut self, tok: Tok) -> Result<(), ParseError> {
        match self.peek() {
            Some(t) if *t == tok => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => {
                let (want, got) = (tok.describe(), t.describe());
                Err(self.error(format!("expected {want}, found {got}")))
            }
            None => {
                let want = tok.describe();
                Err(self.error(format!("expected {want}, found end of line")))
            }
        }
    }
}

const KEYWORDS: &[&str] = &["RULE", "IF", "THEN", "AND", "MAP", "IN", "NOT"];

fn parse_predicate(cur: &mut Cursor) -> Result<Predicate, ParseError> {
    let column = cur.expect_ident("a column name")?;
    if KEYWORDS.contains(&column.as_str()) {
        return Err(ParseError {
            line: cur.line,
            col: cur.toks[cur.pos - 1].1,
            message: format!("expected a predicate, found keyword `{column}`"),
        });
    }
    match cur.peek() {
        Some(Tok::Ident(s)) if s == "IN" => {
            cur.pos += 1;
            let labels = parse_label_set(cur)?;
            Ok(Predicate::Membership {
                column,
                op: MembershipOp::In,
                labels,
            })
        }
        Some(Tok::Ident(s)) if s == "NOT" => {
            cur.pos += 1;
            cur.expect_keyword("IN")?;
            let labels = parse_label_set(cur)?;
            Ok(Predicate::Membership {
                column,
                op: MembershipOp::NotIn,
                labels,
            })
        }
        Some(tok @ (Tok::Lt | Tok::Le | Tok::Gt | Tok::Ge)) => {
            let op = match tok {
                Tok::Lt => CompareOp::Lt,
                Tok::Le => CompareOp::Le,
                Tok::Gt => CompareOp::Gt,
                Tok::Ge => CompareOp::Ge,
                _ => unreachable!(),
            };
            cur.pos += 1;
            let threshold = match cur.peek() {
                Some(Tok::Num(n)) => {
                    let n = *n;
                    cur.pos += 1;
                    n
                }
                Some(t) => {
                    let got = t.describe();
                    return Err(cur.error(format!("expected a number, found {got}")));
                }
                None => return Err(cur.error("expected a number, found end of line")),
            };
            Ok(Predicate::Comparison {
                column,
                op,
                threshold,
            })
        }
        Some(t) => {
            let got = t.describe();
            Err(cur.error(format!(
                "expected `IN`, `NOT IN` or a comparison operator, found {got}"
            )))
        }
        None => Err(cur.error("expected `IN`, `NOT IN` or a comparison operator")),
    }
}

fn parse_label_set(cur: &mut Cursor) -> Result<Vec<String>, ParseError> {
    cur.expect_tok(Tok::LParen)?;
    let mut labels = Vec::new();
    loop {
        match cur.next() {
            Some(Tok::Str(s)) => labels.push(s.clone()),
            Some(t) => {
                let got = t.describe();
                return Err(ParseError {
                    line: cur.line,
                    col: cur.toks[cur.pos - 1].1,
                    message: format!("expected a string label, found {got}"),
                });
            }
            None => return Err(cur.error("expected a string label, found end of line")),
        }
        match cur.peek() {
            Some(Tok::Comma) => {
                cur.pos += 1;
            }
            Some(Tok::RParen) => {
                cur.pos += 1;
                return Ok(labels);
            }
            Some(t) => {
                let got = t.describe();
                return Err(cur.error(format!("expected `,` or `)`, found {got}")));
            }
            None => return Err(cur.error("expected `,` or `)`, found end of line")),
        }
    }
}

fn parse_implication(cur: &mut Cursor) -> Result<Implication, ParseError> {
    cur.expect_keyword("IF")?;
    let mut antecedent = vec![parse_predicate(cur)?];
    while cur.at_keyword("AND") {
        cur.pos += 1;
        antecedent.push(parse_predicate(cur)?);
    }
    cur.expect_keyword("THEN")?;
    let consequent = parse_predicate(cur)?;
    Ok(Implication {
        antecedent,
        consequent,
    })
}

fn parse_rule_line(toks: &[(Tok, u32)], line_no: u32, end_col: u32) -> Result<Rule, ParseError> {
    let mut cur = Cursor {
        toks,
        pos: 0,
        line: line_no,
        end_col,
    };
    let span = Span {
        line: line_no,
        col: toks[0].1,
    };
    cur.expect_keyword("RULE")?;
    let id = cur.expect_ident("a rule id")?;
    cur.expect_tok(Tok::Colon)?;

    let body = if cur.at_keyword("MAP") {
        cur.pos += 1;
        let column_a = cur.expect_ident("a column name")?;
        cur.expect_tok(Tok::MapArrow)?;
        let column_b = cur.expect_ident("a column name")?;
        RuleBody::Mapping {
            column_a,
            column_b,
            pairs: Vec::new(),
        }
    } else {
        let mut clauses = vec![parse_implication(&mut cur)?];
        while matches!(cur.peek(), Some(Tok::Semi)) {
            cur.pos += 1;
            clauses.push(parse_implication(&mut cur)?);
        }
        RuleBody::Implications(clauses)
    };

    if let Some(t) = cur.peek() {
        let got = t.describe();
        return Err(cur.error(format!("expected end of line, found {got}")));
    }
    Ok(Rule { id, body, span })
}

/// Parse DSL source into rules. Errors carry the 1-based line and column of
/// the offending token.
pub fn parse_rules(text: &str) -> Result<Vec<Rule>, ParseError> {
    let mut rules = Vec::new();
    let mut seen: BTreeMap<String, u32> = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = (i + 1) as u32;
        let toks = lex_line(line, line_no)?;
        if toks.is_empty() {
            continue;
        }
        let end_col = line.chars().count() as u32 + 1;
        let rule = parse_rule_line(&toks, line_no, end_col)?;
        if let Some(first) = seen.insert(rule.id.clone(), line_no) {
            return Err(ParseError {
                line: line_no,
                col: rule.span.col,
                message: format!(
                    "duplicate rule id `{}` (first declared on line {first})",
                    rule.id
                ),
            });
        }
        rules.push(rule);
    }
    Ok(rules)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::ast::print_rules;

    #[test]
    fn parses_implication_with_comparison_consequent() {
        let rules =
            parse_rules(r#"RULE r1: IF education IN ("Doctorate","Prof-school") THEN age >= 25"#)
                .unwrap();
        assert_eq!(rules.len(), 1);
        let RuleBody::Implications(clauses) = &rules[0].body else {
            panic!("expected implication");
        };
        assert_eq!(clauses.len(), 1);
        assert_eq!(clauses[0].antecedent.len(), 1);
        assert_eq!(
            clauses[0].antecedent[0],
            Predicate::Membership {
                column: "education".into(),
                op: MembershipOp::In,
                labels: vec!["Doctorate".into(), "Prof-school".into()],
            }
        );
        assert_eq!(
            clauses[0].consequent,
            Predicate::Comparison {
                column: "age".into(),
                op: CompareOp::Ge,
                threshold: 25.0,
            }
        );
    }

    #[test]
    fn parses_mapping_with_empty_pairs() {
        let rules = parse_rules("RULE r3: MAP education <-> education_num").unwrap();
        assert_eq!(
            rules[0].body,
            RuleBody::Mapping {
                column_a: "education".into(),
                column_b: "education_num".into(),
                pairs: vec![],
            }
        );
    }

    #[test]
    fn parses_multi_clause_rule_and_not_in() {
        let text = r#"RULE r4: IF relationship IN ("Wife") THEN sex IN ("Female"); IF relationship IN ("Husband") THEN sex NOT IN ("Female")"#;
        let rules = parse_rules(text).unwrap();
        let RuleBody::Implications(clauses) = &rules[0].body else {
            panic!("expected implication");
        };
        assert_eq!(clauses.len(), 2);
        assert!(matches!(
            clauses[1].consequent,
            Predicate::Membership {
                op: MembershipOp::NotIn,
                ..
            }
        ));
    }

    #[test]
    fn empty_antecedent_is_a_syntax_error_at_the_antecedent() {
        let err = parse_rules("RULE x: IF THEN").unwrap_err();
        assert_eq!(err.line, 1);
        // `THEN` sits at column 12; the antecedent predicate was expected there.
        assert_eq!(err.col, 12);
        assert!(err.message.contains("predicate") || err.message.contains("column"), "{err}");
    }

    #[test]
    fn duplicate_ids_are_rejected_with_location() {
        let text = "RULE a: IF x IN (\"1\") THEN y IN (\"2\")\nRULE a: MAP x <-> y\n";
        let err = parse_rules(text).unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.message.contains("duplicate rule id `a`"));
    }

    #[test]
    fn lexical_errors_carry_positions() {
        let err = parse_rules("RULE a: IF x IN (\"unterminated) THEN y >= 1").unwrap_err();
        assert!(err.message.contains("unterminated"));
        let err = parse_rules("RULE a: IF x ~ 3 THEN y >= 1").unwrap_err();
        assert!(err.message.contains("unexpected character"));
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let text = "# header comment\n\nRULE r: IF a IN (\"x\") THEN b >= 1  # trailing\n";
        let rules = parse_rules(text).unwrap();
        assert_eq!(rules.len(), 1);
        assert_eq!(rules[0].span.line, 3);
    }

    #[test]
    fn trailing_tokens_are_rejected() {
        let err = parse_rules("RULE r: MAP a <-> b extra").unwrap_err();
        assert!(err.message.contains("expected end of line"));
    }

    #[test]
    fn print_parse_round_trip_on_rule_corpus() {
        let corpus = [
            r#"RULE r1: IF education IN ("Doctorate", "Prof-school") THEN age >= 25"#,
            r#"RULE r2a: IF relationship IN ("Husband", "Wife") THEN marital-status IN ("Married-civ-spouse")"#,
            r#"RULE r2b: IF marital-status IN ("Married-civ-spouse") THEN relationship NOT IN ("Unmarried")"#,
            r#"RULE r3: MAP education <-> education-num"#,
            r#"RULE r4: IF relationship IN ("Wife") THEN sex IN ("Female"); IF relationship IN ("Husband") THEN sex IN ("Male")"#,
            r#"RULE lt: IF a IN ("x") THEN b < 10"#,
            r#"RULE le: IF a IN ("x") THEN b <= 10.5"#,
            r#"RULE gt: IF a IN ("x") THEN b > -3"#,
            r#"RULE ge: IF a IN ("x") THEN b >= 0.125"#,
            r#"RULE conj: IF a IN ("x") AND b IN ("y", "z") THEN c >= 1"#,
            r#"RULE notin: IF a NOT IN ("x") THEN b IN ("y")"#,
            r#"RULE esc: IF a IN ("say \"hi\"", "back\\slash") THEN b IN ("y")"#,
            r#"RULE nums: IF b >= 2.5 THEN a IN ("x")"#,
            r#"RULE dash-id: IF a-b IN ("x") THEN c_d >= 1"#,
            r#"RULE threeway: IF a IN ("x") THEN b IN ("y"); IF a IN ("y") THEN b IN ("z"); IF a IN ("z") THEN b IN ("x")"#,
            r#"RULE many: IF a IN ("1", "2", "3", "4") THEN b NOT IN ("5", "6")"#,
            r#"RULE m2: MAP left <-> right"#,
            r#"RULE small: IF tiny < 0.001 THEN a IN ("x")"#,
            r#"RULE exp: IF big >= 100000 THEN a IN ("x")"#,
            r#"RULE mix: IF a NOT IN ("q") AND n < 5 THEN c > 2"#,
        ];
        assert!(corpus.len() >= 20);
        for text in corpus {
            let parsed = parse_rules(text).unwrap();
            let printed = print_rules(&parsed);
            let reparsed = parse_rules(&printed).unwrap();
            assert_eq!(parsed, reparsed, "round trip failed for `{text}`");
            // Printing is a fixed point after one normalization pass.
            assert_eq!(print_rules(&reparsed), printed);
        }
    }
}

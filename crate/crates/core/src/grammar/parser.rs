//! Recursive-descent parser for the action language.

use crate::address::parse_range;
use crate::verbs;

use super::ast::{Action, Arg, CmpOp, Condition, Literal, Verb};
use super::error::{ParseError, ParseErrorKind, ScriptError};
use super::lexer::{tokenize, Spanned, Tok};

const MAX_NESTING: usize = 64;

/// Parses exactly one action.
pub fn parse_action(text: &str) -> Result<Action, ParseError> {
    let toks = tokenize(text)?;
    let mut p = Parser::new(&toks, text.len());
    if p.at_end() {
        return Err(p.error(ParseErrorKind::Syntax, "empty input", &["VERB"]));
    }
    let action = p.action()?;
    if !p.at_end() {
        return Err(p.error(ParseErrorKind::Syntax, "trailing input after action", &["end of input"]));
    }
    Ok(action)
}

/// Parses a `;`-separated list of actions. Blank input yields no actions.
pub fn parse_script(text: &str) -> Result<Vec<Action>, ScriptError> {
    let toks = tokenize(text).map_err(|error| ScriptError {
        index: text[..error.position.min(text.len())].matches(';').count(),
        error,
    })?;
    let mut p = Parser::new(&toks, text.len());
    let mut actions = Vec::new();
    if p.at_end() {
        return Ok(actions);
    }
    loop {
        let action = p.action().map_err(|error| ScriptError {
            index: actions.len(),
            error,
        })?;
        actions.push(action);
        if p.at_end() {
            return Ok(actions);
        }
        p.expect(Tok::Semi, ";").map_err(|error| ScriptError {
            index: actions.len() - 1,
            error,
        })?;
    }
}

struct Parser<'a> {
    toks: &'a [Spanned],
    idx: usize,
    end: usize,
    depth: usize,
}

impl<'a> Parser<'a> {
    fn new(toks: &'a [Spanned], end: usize) -> Self {
        Parser {
            toks,
            idx: 0,
            end,
            depth: 0,
        }
    }

    fn at_end(&self) -> bool {
        self.idx >= self.toks.len()
    }

    fn peek(&self) -> Option<&'a Tok> {
        self.toks.get(self.idx).map(|t| &t.tok)
    }

    fn peek_at(&self, offset: usize) -> Option<&'a Tok> {
        self.toks.get(self.idx + offset).map(|t| &t.tok)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.idx).map_or(self.end, |t| t.pos)
    }

    fn bump(&mut self) -> Option<&'a Tok> {
        let t = self.peek();
        self.idx += 1;
        t
    }

    fn error(&self, kind: ParseErrorKind, message: &str, expected: &[&str]) -> ParseError {
        let found = self
            .peek()
            .map_or_else(|| "end of input".to_string(), Tok::describe);
        ParseError::new(
            kind,
            self.pos(),
            format!("{message}, found {found}"),
            expected.iter().map(|s| s.to_string()).collect(),
        )
    }

    fn expect(&mut self, tok: Tok, shown: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.idx += 1;
            Ok(())
        } else {
            Err(self.error(ParseErrorKind::Syntax, &format!("expected {shown}"), &[shown]))
        }
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Some(Tok::Word(x)) if x == w)
    }

    fn action(&mut self) -> Result<Action, ParseError> {
        let verb_pos = self.pos();
        let verb = match self.peek() {
            Some(Tok::Word(w)) => match Verb::from_keyword(w) {
                Some(v) => v,
                None => {
                    let keywords: Vec<&str> = Verb::ALL.iter().map(|v| v.keyword()).collect();
                    return Err(self.error(
                        ParseErrorKind::UnknownVerb,
                        &format!("unknown verb {w:?}"),
                        &keywords,
                    ));
                }
            },
            _ => return Err(self.error(ParseErrorKind::Syntax, "expected a verb", &["VERB"])),
        };
        self.idx += 1;
        self.expect(Tok::LParen, "(")?;
        let mut args = Vec::new();
        if self.peek() != Some(&Tok::RParen) {
            loop {
                args.push(self.arg()?);
                match self.peek() {
                    Some(Tok::Comma) => self.idx += 1,
                    Some(Tok::RParen) => break,
                    _ => return Err(self.error(ParseErrorKind::Syntax, "expected , or )", &[",", ")"])),
                }
            }
        }
        self.expect(Tok::RParen, ")")?;
        let cond = if self.is_word("WHERE") {
            self.idx += 1;
            Some(self.cond()?)
        } else {
            None
        };
        let action = Action { verb, args, cond };
        verbs::registry()
            .check_signature(&action)
            .map_err(|msg| ParseError::new(ParseErrorKind::Arity, verb_pos, msg, Vec::new()))?;
        Ok(action)
    }

    fn arg(&mut self) -> Result<Arg, ParseError> {
        let pos = self.pos();
        match self.peek() {
            Some(Tok::Quoted(name)) => {
                self.idx += 1;
                self.expect(Tok::Bang, "!")?;
                self.range_after_sheet(Some(name.as_str()), pos)
            }
            Some(Tok::Word(w)) => match self.peek_at(1) {
                Some(Tok::Bang) => {
                    self.idx += 2;
                    self.range_after_sheet(Some(w.as_str()), pos)
                }
                Some(Tok::Eq) => {
                    self.idx += 2;
                    let value = self.named_value()?;
                    Ok(Arg::Named {
                        key: w.clone(),
                        value,
                    })
                }
                Some(Tok::Colon) => self.range_after_sheet(None, pos),
                _ if w == "TRUE" || w == "FALSE" => {
                    self.idx += 1;
                    Ok(Arg::Literal(Literal::Bool(w == "TRUE")))
                }
                _ => self.range_after_sheet(None, pos),
            },
            Some(Tok::Str(_) | Tok::Num(_) | Tok::Date(_)) => Ok(Arg::Literal(self.literal()?)),
            _ => Err(self.error(
                ParseErrorKind::Syntax,
                "expected an argument",
                &["range", "literal", "key=value"],
            )),
        }
    }

    fn range_after_sheet(&mut self, sheet: Option<&str>, pos: usize) -> Result<Arg, ParseError> {
        let first = match self.bump() {
            Some(Tok::Word(w)) => w.clone(),
            _ => {
                self.idx -= 1;
                return Err(self.error(ParseErrorKind::Syntax, "expected a cell reference", &["A1"]));
            }
        };
        let mut text = first;
        if self.peek() == Some(&Tok::Colon) {
            self.idx += 1;
            match self.bump() {
                Some(Tok::Word(w)) => {
                    text.push(':');
                    text.push_str(w);
                }
                _ => {
                    self.idx -= 1;
                    return Err(self.error(ParseErrorKind::Syntax, "expected a cell reference after :", &["A1", "COLUMN"]));
                }
            }
        }
        let mut range = parse_range(&text).map_err(|e| {
            ParseError::new(
                ParseErrorKind::Syntax,
                pos,
                format!("expected range or literal: {e}"),
                vec!["range".into(), "literal".into()],
            )
        })?;
        if let Some(name) = sheet {
            crate::address::check_sheet_name(name).map_err(|e| {
                ParseError::new(ParseErrorKind::Syntax, pos, e.to_string(), Vec::new())
            })?;
            range.sheet = Some(name.to_string());
        }
        Ok(Arg::Range(range))
    }

    fn literal(&mut self) -> Result<Literal, ParseError> {
        let lit = match self.peek() {
            Some(Tok::Str(s)) => Literal::Text(s.clone()),
            Some(Tok::Num(n)) => Literal::Number(*n),
            Some(Tok::Date(d)) => Literal::Date(d.clone()),
            Some(Tok::Word(w)) if w == "TRUE" => Literal::Bool(true),
            Some(Tok::Word(w)) if w == "FALSE" => Literal::Bool(false),
            _ => {
                return Err(self.error(
                    ParseErrorKind::Syntax,
                    "expected a literal",
                    &["STRING", "NUMBER", "BOOL", "DATE"],
                ))
            }
        };
        self.idx += 1;
        Ok(lit)
    }

    /// Named values also accept bare words (`order=ASC`), read as text.
    fn named_value(&mut self) -> Result<Literal, ParseError> {
        match self.peek() {
            Some(Tok::Word(w)) if w != "TRUE" && w != "FALSE" => {
                self.idx += 1;
                Ok(Literal::Text(w.clone()))
            }
            _ => self.literal(),
        }
    }

    fn cond(&mut self) -> Result<Condition, ParseError> {
        self.depth += 1;
        if self.depth > MAX_NESTING {
            return Err(self.error(ParseErrorKind::Condition, "condition nested too deeply", &[]));
        }
        let mut parts = vec![self.and_expr()?];
        while self.is_word("OR") {
            self.idx += 1;
            parts.push(self.and_expr()?);
        }
        self.depth -= 1;
        Ok(if parts.len() == 1 {
            parts.pop().expect("one part")
        } else {
            Condition::Or(parts)
        })
    }

    fn and_expr(&mut self) -> Result<Condition, ParseError> {
        let mut parts = vec![self.not_expr()?];
        while self.is_word("AND") {
            self.idx += 1;
            parts.push(self.not_expr()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().expect("one part")
        } else {
            Condition::And(parts)
        })
    }

    fn not_expr(&mut self) -> Result<Condition, ParseError> {
        if self.is_word("NOT") {
            self.idx += 1;
            Ok(Condition::Not(Box::new(self.primary()?)))
        } else {
            self.primary()
        }
    }

    fn primary(&mut self) -> Result<Condition, ParseError> {
        match self.peek() {
            Some(Tok::LParen) => {
                self.idx += 1;
                let c = self.cond()?;
                self.expect(Tok::RParen, ")")?;
                Ok(c)
            }
            Some(Tok::Word(w)) if w == "ISEMPTY" => {
                self.idx += 1;
                Ok(Condition::IsEmpty)
            }
            Some(Tok::Word(w)) if w == "VALUE" => {
                self.idx += 1;
                let op = match self.peek() {
                    Some(Tok::Eq) => CmpOp::Eq,
                    Some(Tok::Ne) => CmpOp::Ne,
                    Some(Tok::Lt) => CmpOp::Lt,
                    Some(Tok::Le) => CmpOp::Le,
                    Some(Tok::Gt) => CmpOp::Gt,
                    Some(Tok::Ge) => CmpOp::Ge,
                    _ => {
                        return Err(self.error(
                            ParseErrorKind::Condition,
                            "expected a comparison operator",
                            &["=", "!=", "<", "<=", ">", ">="],
                        ))
                    }
                };
                self.idx += 1;
                let lit = self.literal().map_err(|mut e| {
                    e.kind = ParseErrorKind::Condition;
                    e
                })?;
                Ok(Condition::Cmp(op, lit))
            }
            Some(Tok::Word(w)) if w == "MATCHES" => {
                self.idx += 1;
                self.expect(Tok::LParen, "(")?;
                let pos = self.pos();
                let pattern = match self.peek() {
                    Some(Tok::Str(s)) => s.clone(),
                    _ => {
                        return Err(self.error(ParseErrorKind::Condition, "expected a regex string", &["STRING"]))
                    }
                };
                self.idx += 1;
                self.expect(Tok::RParen, ")")?;
                if let Err(e) = crate::exec::compile_regex(&pattern) {
                    return Err(ParseError::new(
                        ParseErrorKind::Condition,
                        pos,
                        format!("invalid regex: {e}"),
                        Vec::new(),
                    ));
                }
                Ok(Condition::Matches(pattern))
            }
            _ => Err(self.error(
                ParseErrorKind::Condition,
                "expected a condition",
                &["VALUE", "MATCHES", "ISEMPTY", "NOT", "("],
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::address::{CellAddress, Range};

    #[test]
    fn worked_example_parses() {
        let a = parse_action(r#"DELETE(E:E) WHERE MATCHES("^[0-9]")"#).unwrap();
        assert_eq!(
            a,
            Action {
                verb: Verb::Delete,
                args: vec![Arg::Range(Range::columns(5, 5, 1))],
                cond: Some(Condition::Matches("^[0-9]".into())),
            }
        );
    }

    #[test]
    fn set_and_aggregate() {
        let a = parse_action("SET(B2:B10, 0)").unwrap();
        assert_eq!(a.verb, Verb::Set);
        assert_eq!(
            a.args,
            vec![
                Arg::Range(Range::rect(CellAddress::new(2, 2), CellAddress::new(2, 10))),
                Arg::Literal(Literal::Number(0.0)),
            ]
        );
        assert!(a.cond.is_none());

        let a = parse_action("AGGREGATE(B2:B10, C1, fn=SUM)").unwrap();
        assert_eq!(
            a.args[2],
            Arg::Named {
                key: "fn".into(),
                value: Literal::Text("SUM".into())
            }
        );
        assert_eq!(a.nth_range(1), Some(&Range::cell(CellAddress::new(3, 1))));
    }

    #[test]
    fn whitespace_insensitive() {
        let a = parse_action("SET ( B2 : B10 ,0 )").unwrap();
        assert_eq!(a, parse_action("SET(B2:B10, 0)").unwrap());
    }

    #[test]
    fn unknown_verb() {
        let e = parse_action("FROBNICATE(A1)").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnknownVerb);
        assert_eq!(e.position, 0);
        assert!(e.expected.contains(&"SELECT".to_string()));
        assert_eq!(parse_action("set(A1, 1)").unwrap_err().kind, ParseErrorKind::UnknownVerb);
    }

    #[test]
    fn keywords_are_uppercase_only() {
        assert!(parse_action(r#"DELETE(E:E) where MATCHES("x")"#).is_err());
        assert!(parse_action(r#"DELETE(E:E) WHERE matches("x")"#).is_err());
    }

    #[test]
    fn arity_errors() {
        for text in [
            "SET(A1)",
            "SET(A1, 1, 2)",
            "SELECT(1)",
            "SORT(A1:B2)",
            "SORT(A1:B2, key=A, order=UP)",
            "AGGREGATE(A1:A3, B1, fn=MEDIAN)",
            "INSERT_ROWS(A1)",
            "INSERT_ROWS(2, count=1, count=2)",
            "COPY(A1, B1) WHERE ISEMPTY",
            "DELETE_ROWS(A:A)",
            "SET(A1, 1, color=RED)",
        ] {
            let e = parse_action(text).unwrap_err();
            assert_eq!(e.kind, ParseErrorKind::Arity, "{text}: {e}");
        }
    }

    #[test]
    fn conditions() {
        let a = parse_action(r#"SELECT(A1:A5) WHERE NOT ISEMPTY AND VALUE > 5 OR MATCHES("x")"#).unwrap();
        assert_eq!(
            a.cond,
            Some(Condition::Or(vec![
                Condition::And(vec![
                    Condition::Not(Box::new(Condition::IsEmpty)),
                    Condition::Cmp(CmpOp::Gt, Literal::Number(5.0)),
                ]),
                Condition::Matches("x".into()),
            ]))
        );
        let e = parse_action(r#"SELECT(A1) WHERE MATCHES("(")"#).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Condition);
        let e = parse_action("SELECT(A1) WHERE VALUE ~ 3").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Lexical);
        let e = parse_action("SELECT(A1) WHERE VALUE > A1").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Condition);
        assert!(parse_action("SELECT(A1) WHERE NOT NOT ISEMPTY").is_err());
        assert!(parse_action("SELECT(A1) WHERE NOT (NOT ISEMPTY)").is_ok());
    }

    #[test]
    fn lookaround_and_backrefs_rejected() {
        assert!(parse_action(r#"SELECT(A1) WHERE MATCHES("(?=a)")"#).is_err());
        assert!(parse_action(r#"SELECT(A1) WHERE MATCHES("(a)\1")"#).is_err());
    }

    #[test]
    fn sheet_qualified_ranges() {
        let a = parse_action("COPY(Sheet1!A1:A2, Data!B1)").unwrap();
        assert_eq!(a.nth_range(0).unwrap().sheet.as_deref(), Some("Sheet1"));
        assert_eq!(a.nth_range(1).unwrap().sheet.as_deref(), Some("Data"));
        let a = parse_action("SELECT('My Data'!A1)").unwrap();
        assert_eq!(a.nth_range(0).unwrap().sheet.as_deref(), Some("My Data"));
    }

    #[test]
    fn scripts() {
        assert_eq!(parse_script("SET(A1,1); SET(A2,2)").unwrap().len(), 2);
        assert_eq!(parse_script("").unwrap(), vec![]);
        assert_eq!(parse_script("  \n ").unwrap(), vec![]);
        let e = parse_script("SET(A1,1); BAD").unwrap_err();
        assert_eq!(e.index, 1);
        let e = parse_script("SET(A1,1) SET(A2,2)").unwrap_err();
        assert_eq!(e.index, 0);
        let e = parse_script("SET(A1,1); SET(A2, #)").unwrap_err();
        assert_eq!(e.index, 1);
    }

    #[test]
    fn deep_nesting_is_an_error_not_a_crash() {
        let text = format!("SELECT(A1) WHERE {}ISEMPTY{}", "(".repeat(5000), ")".repeat(5000));
        assert!(parse_action(&text).is_err());
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_action("SET(A1 2)").unwrap_err();
        assert_eq!(e.position, 7);
        assert_eq!(e.expected, vec![",", ")"]);
        let e = parse_action("SET(hello, 2)").unwrap_err();
        assert_eq!(e.position, 4);
    }
}

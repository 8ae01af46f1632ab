//! The action language: AST, parser and canonical printer.
//!
//! An action is a verb applied to arguments with an optional filter, e.g.
//! `DELETE(E:E) WHERE MATCHES("^[0-9]")`. Keywords are uppercase only and
//! whitespace between tokens is insignificant.

mod ast;
mod error;
mod lexer;
mod parser;
mod printer;

pub use ast::{Action, Arg, CmpOp, Condition, Literal, Verb};
pub use error::{ParseError, ParseErrorKind, ScriptError};
pub use parser::{parse_action, parse_script};
pub use printer::{quote, serialize_action, serialize_script};

/// The grammar in EBNF, as shown to the action generator.
pub const GRAMMAR_EBNF: &str = r#"script   := action { ";" action }
action   := VERB "(" [ arg { "," arg } ] ")" [ "WHERE" cond ]
arg      := range | literal | IDENT "=" literal
range    := [ SHEETNAME "!" ] A1 [ ":" A1COL? A1 | ":" COLONLY ]
literal  := STRING | NUMBER | BOOL | DATE
cond     := orexpr
orexpr   := andexpr { "OR" andexpr }
andexpr  := notexpr { "AND" notexpr }
notexpr  := [ "NOT" ] primary
primary  := "(" cond ")" | "VALUE" CMP literal
          | "MATCHES" "(" STRING ")" | "ISEMPTY"
CMP      := "=" | "!=" | "<" | "<=" | ">" | ">=""#;

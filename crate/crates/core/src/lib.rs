//! Workbook model, action language and interpreter.
//!
//! ```
//! use sheetmind_core::{execute, parse_action, CellAddress, CellValue, Workbook};
//!
//! let mut wb = Workbook::new();
//! for (i, v) in ["9am", "late", "3pm"].iter().enumerate() {
//!     let addr = CellAddress::new(5, i as u32 + 1);
//!     wb.set_cell("Sheet1", addr, CellValue::infer(v)).unwrap();
//! }
//! let action = parse_action(r#"DELETE(E:E) WHERE MATCHES("^[0-9]")"#).unwrap();
//! let result = execute(&mut wb, &action).unwrap();
//! assert_eq!(result.diff.cell_changes.len(), 2);
//! ```

pub mod address;
pub mod diff;
pub mod error;
pub mod exec;
pub mod grammar;
pub mod io;
pub mod validate;
pub mod value;
pub mod verbs;
pub mod workbook;

pub use address::{column_letters, format_range, parse_column, parse_range, CellAddress, Range, MAX_COLS, MAX_ROWS};
pub use diff::{apply_diff, diff, CellChange, SheetChange, SheetDiff};
pub use error::SheetError;
pub use exec::{
    compile_regex, eval_condition, execute, execute_script, execute_traced, CompiledCondition, ExecError,
    ExecutionResult, ScriptRun, SelectedCell, TracedExecution,
};
pub use grammar::{
    parse_action, parse_script, serialize_action, serialize_script, Action, Arg, CmpOp, Condition, Literal,
    ParseError, ParseErrorKind, Verb, GRAMMAR_EBNF,
};
pub use validate::{validate_static, InvalidCode, Verdict};
pub use value::{CellValue, Date};
pub use workbook::{snapshot, Sheet, SheetSnapshot, StructuralChange, StructuralKind, Workbook};

//! Test-only helpers: an independent dense-grid interpreter and random
//! generators for workbooks, actions and ASTs.

pub mod gen;
pub mod oracle;

pub use gen::{any_action, any_condition, random_action, random_condition, random_value, random_workbook};
pub use oracle::{dense_mismatches, holds, naive_apply, naive_execute, NaiveBook, Selection};

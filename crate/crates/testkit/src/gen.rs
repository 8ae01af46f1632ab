//! Random workbooks, actions and ASTs for property and acceptance tests.

use rand::Rng;

use sheetmind_core::{
    Action, Arg, CellAddress, CellValue, CmpOp, Condition, Date, Literal, Range, Sheet, Verb, Workbook,
    MAX_COLS, MAX_ROWS,
};

const TEXTS: &[&str] = &[
    "9am", "late", "3pm", "a", "b", "Alpha", "beta", "x1", "42nd St", "n/a", "TRUE", "-", "y",
];
const DATES: &[&str] = &["2024-01-15", "2024-02-01", "2023-12-31", "2024-02-29", "2000-03-01"];
const PATTERNS: &[&str] = &[
    "^[0-9]", "a", "^$", "[A-Z]", "am$", "^-", r"\d+", "x|y", "TRUE", r"^\w+$", ".", "^[0-9]+(\\.5)?$",
];
const OPS: [CmpOp; 6] = [CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge];

fn pick<'a, T>(rng: &mut impl Rng, items: &'a [T]) -> &'a T {
    &items[rng.random_range(0..items.len())]
}

fn date(s: &str) -> Date {
    Date::parse(s).expect("valid date")
}

pub fn random_value(rng: &mut impl Rng) -> CellValue {
    match rng.random_range(0..20) {
        0..=4 => CellValue::Empty,
        5..=9 => CellValue::Number(f64::from(rng.random_range(-5..20)) / if rng.random_bool(0.2) { 2.0 } else { 1.0 }),
        10..=14 => CellValue::Text(pick(rng, TEXTS).to_string()),
        15 | 16 => CellValue::Bool(rng.random_bool(0.5)),
        17 | 18 => CellValue::Date(date(pick(rng, DATES))),
        _ => CellValue::Formula(format!("=A{}+1", rng.random_range(1..5))),
    }
}

/// A workbook with at most 20 rows and 10 columns per sheet, sometimes
/// with a second sheet named `Data`.
pub fn random_workbook(rng: &mut impl Rng) -> Workbook {
    let mut names = vec!["Sheet1"];
    if rng.random_bool(0.3) {
        names.push("Data");
    }
    let sheets = names.iter().map(|n| Sheet::new(*n).expect("valid")).collect();
    let active = rng.random_range(0..names.len());
    let mut wb = Workbook::from_sheets(sheets, active).expect("valid");
    for name in names {
        let rows = rng.random_range(0..=20u32);
        let cols = rng.random_range(1..=10u32);
        for r in 1..=rows {
            for c in 1..=cols {
                let v = random_value(rng);
                wb.set_cell(name, CellAddress::new(c, r), v).expect("in bounds");
            }
        }
    }
    wb
}

fn random_sheet_prefix(rng: &mut impl Rng, wb: &Workbook) -> Option<String> {
    if wb.sheets().len() > 1 && rng.random_bool(0.3) {
        let name = pick(rng, wb.sheets()).name().to_string();
        Some(if rng.random_bool(0.2) { name.to_lowercase() } else { name })
    } else {
        None
    }
}

/// A range near the populated area: a cell, a rectangle or an open-bottom
/// column span.
pub fn random_range(rng: &mut impl Rng, wb: &Workbook) -> Range {
    let col = rng.random_range(1..=11u32);
    let row = rng.random_range(1..=21u32);
    let base = match rng.random_range(0..4) {
        0 => Range::cell(CellAddress::new(col, row)),
        1 => Range::columns(col, col + rng.random_range(0..3), if rng.random_bool(0.5) { 1 } else { row }),
        _ => Range::rect(
            CellAddress::new(col, row),
            CellAddress::new(col + rng.random_range(0..4), row + rng.random_range(0..8)),
        ),
    };
    match random_sheet_prefix(rng, wb) {
        Some(s) => base.on_sheet(s),
        None => base,
    }
}

fn random_cell(rng: &mut impl Rng, wb: &Workbook) -> Range {
    let r = Range::cell(CellAddress::new(rng.random_range(1..=12), rng.random_range(1..=24)));
    match random_sheet_prefix(rng, wb) {
        Some(s) => r.on_sheet(s),
        None => r,
    }
}

fn random_literal(rng: &mut impl Rng) -> Literal {
    match rng.random_range(0..8) {
        0..=2 => Literal::Number(f64::from(rng.random_range(-3..15))),
        3..=4 => Literal::Text(pick(rng, TEXTS).to_string()),
        5 => Literal::Bool(rng.random_bool(0.5)),
        6 => Literal::Date(date(pick(rng, DATES))),
        _ => Literal::Text(if rng.random_bool(0.5) { String::new() } else { "=A1+1".into() }),
    }
}

/// A well-formed condition of bounded depth over a small literal pool.
pub fn random_condition(rng: &mut impl Rng, depth: u32) -> Condition {
    let leaf = depth == 0 || rng.random_bool(0.5);
    if leaf {
        return match rng.random_range(0..4) {
            0 => Condition::IsEmpty,
            1 => Condition::Matches(pick(rng, PATTERNS).to_string()),
            _ => Condition::Cmp(*pick(rng, &OPS), random_literal(rng)),
        };
    }
    match rng.random_range(0..3) {
        0 => Condition::Not(Box::new(random_condition(rng, depth - 1))),
        k => {
            let n = rng.random_range(2..=3);
            let children = (0..n).map(|_| random_condition(rng, depth - 1)).collect();
            if k == 1 {
                Condition::And(children)
            } else {
                Condition::Or(children)
            }
        }
    }
}

fn named(key: &str, value: Literal) -> Arg {
    Arg::Named {
        key: key.to_string(),
        value,
    }
}

fn letters(col: u32) -> String {
    sheetmind_core::column_letters(col)
}

/// A random action against `wb`. Most are valid; callers filter with the
/// static validator.
pub fn random_action(rng: &mut impl Rng, wb: &Workbook) -> Action {
    let verb = *pick(rng, &Verb::ALL);
    let maybe_cond = |rng: &mut _| rng_cond(rng, 0.6);
    let (args, cond) = match verb {
        Verb::Select | Verb::Delete => (vec![Arg::Range(random_range(rng, wb))], maybe_cond(rng)),
        Verb::Set => (
            vec![Arg::Range(random_range(rng, wb)), Arg::Literal(random_literal(rng))],
            maybe_cond(rng),
        ),
        Verb::DeleteRows => {
            let mut r = random_range(rng, wb);
            r.end_col = r.start.col;
            (vec![Arg::Range(r)], Some(random_condition(rng, 2)))
        }
        Verb::InsertRows | Verb::InsertCols => {
            let limit = if verb == Verb::InsertRows { 22 } else { 12 };
            let mut args = vec![Arg::Literal(Literal::Number(f64::from(rng.random_range(1..=limit))))];
            if rng.random_bool(0.6) {
                args.push(named("count", Literal::Number(f64::from(rng.random_range(1..=3)))));
            }
            (args, None)
        }
        Verb::DeleteCols => {
            let c = rng.random_range(1..=11);
            let mut r = Range::columns(c, c + rng.random_range(0..3), 1);
            if let Some(s) = random_sheet_prefix(rng, wb) {
                r = r.on_sheet(s);
            }
            (vec![Arg::Range(r)], None)
        }
        Verb::Sort => {
            let r = random_range(rng, wb);
            let key = if rng.random_bool(0.9) {
                rng.random_range(r.start.col..=r.end_col)
            } else {
                r.end_col + 1
            };
            let mut args = vec![Arg::Range(r), named("key", Literal::Text(letters(key)))];
            if rng.random_bool(0.7) {
                let order = if rng.random_bool(0.5) { "ASC" } else { "DESC" };
                args.push(named("order", Literal::Text(order.into())));
            }
            (args, None)
        }
        Verb::Copy => (
            vec![Arg::Range(random_range(rng, wb)), Arg::Range(random_cell(rng, wb))],
            None,
        ),
        Verb::Aggregate => {
            let f = *pick(rng, &["SUM", "AVG", "MIN", "MAX", "COUNT"]);
            (
                vec![
                    Arg::Range(random_range(rng, wb)),
                    Arg::Range(random_cell(rng, wb)),
                    named("fn", Literal::Text(f.into())),
                ],
                maybe_cond(rng),
            )
        }
    };
    Action { verb, args, cond }
}

fn rng_cond(rng: &mut impl Rng, p: f64) -> Option<Condition> {
    rng.random_bool(p).then(|| random_condition(rng, 2))
}

// ---- syntax-level generators for round-trip tests ----

const SHEET_NAMES: &[&str] = &["Sheet1", "Data", "My Sheet", "it's", "Q1-2024", "2024", "_x", "naïve"];
const SYNTAX_PATTERNS: &[&str] = &[
    "^[0-9]", r"\d{2,3}", r"a\.b", r#"say "hi""#, r"\\", "(ab|cd)+", "[^,]*$", r"\s", "é+", "",
];

fn any_text(rng: &mut impl Rng) -> String {
    let alphabet: Vec<char> = "aZ09 _-,;()!'\"\\=:.é€\t\n".chars().collect();
    let n = rng.random_range(0..10);
    (0..n).map(|_| *pick(rng, &alphabet)).collect()
}

fn any_number(rng: &mut impl Rng) -> f64 {
    match rng.random_range(0..5) {
        0 => f64::from(rng.random_range(-1000..1000)),
        1 => rng.random::<f64>(),
        2 => (rng.random::<f64>() - 0.5) * 10f64.powi(rng.random_range(-12..30)),
        3 => f64::from(rng.random_range(0..100)) / 8.0,
        _ => {
            // any finite bit pattern
            loop {
                let x = f64::from_bits(rng.random::<u64>());
                if x.is_finite() {
                    break x;
                }
            }
        }
    }
}

fn any_date(rng: &mut impl Rng) -> Date {
    loop {
        let s = format!(
            "{:04}-{:02}-{:02}",
            rng.random_range(0..10000),
            rng.random_range(1..=12),
            rng.random_range(1..=31)
        );
        if let Some(d) = Date::parse(&s) {
            break d;
        }
    }
}

fn any_literal(rng: &mut impl Rng) -> Literal {
    match rng.random_range(0..4) {
        0 => Literal::Text(any_text(rng)),
        1 => Literal::Number(any_number(rng)),
        2 => Literal::Bool(rng.random_bool(0.5)),
        _ => Literal::Date(any_date(rng)),
    }
}

fn any_range(rng: &mut impl Rng) -> Range {
    let col = rng.random_range(1..=MAX_COLS);
    let row = rng.random_range(1..=MAX_ROWS);
    let end_col = rng.random_range(col..=MAX_COLS.min(col + 30));
    let r = match rng.random_range(0..3) {
        0 => Range::cell(CellAddress::new(col, row)),
        1 => Range {
            sheet: None,
            start: CellAddress::new(col, row),
            end_col,
            end_row: None,
        },
        _ => Range::rect(
            CellAddress::new(col, row),
            CellAddress::new(end_col, rng.random_range(row..=MAX_ROWS.min(row + 50))),
        ),
    };
    if rng.random_bool(0.3) {
        r.on_sheet(*pick(rng, SHEET_NAMES))
    } else {
        r
    }
}

fn any_cell(rng: &mut impl Rng) -> Range {
    Range::cell(CellAddress::new(rng.random_range(1..=MAX_COLS), rng.random_range(1..=MAX_ROWS)))
}

/// A condition tree of depth at most `depth` using the full literal space.
pub fn any_condition(rng: &mut impl Rng, depth: u32) -> Condition {
    if depth == 0 || rng.random_bool(0.4) {
        return match rng.random_range(0..3) {
            0 => Condition::IsEmpty,
            1 => Condition::Matches(pick(rng, SYNTAX_PATTERNS).to_string()),
            _ => Condition::Cmp(*pick(rng, &OPS), any_literal(rng)),
        };
    }
    match rng.random_range(0..3) {
        0 => Condition::Not(Box::new(any_condition(rng, depth - 1))),
        k => {
            let n = rng.random_range(2..=4);
            let cs = (0..n).map(|_| any_condition(rng, depth - 1)).collect();
            if k == 1 {
                Condition::And(cs)
            } else {
                Condition::Or(cs)
            }
        }
    }
}

/// A signature-conforming action with arbitrary literals and conditions of
/// depth at most 4.
pub fn any_action(rng: &mut impl Rng) -> Action {
    let verb = *pick(rng, &Verb::ALL);
    let cond = |rng: &mut _| -> Option<Condition> {
        let d = 4;
        rng_bool(rng).then(|| any_condition(rng, d))
    };
    let (mut args, cond) = match verb {
        Verb::Select | Verb::Delete => (vec![Arg::Range(any_range(rng))], cond(rng)),
        Verb::Set => (vec![Arg::Range(any_range(rng)), Arg::Literal(any_literal(rng))], cond(rng)),
        Verb::DeleteRows => (vec![Arg::Range(any_range(rng))], Some(any_condition(rng, 4))),
        Verb::InsertRows | Verb::InsertCols => {
            let mut args = vec![Arg::Literal(Literal::Number(any_number(rng)))];
            if rng.random_bool(0.5) {
                args.push(named("count", Literal::Number(any_number(rng))));
            }
            (args, None)
        }
        Verb::DeleteCols => (vec![Arg::Range(any_range(rng))], None),
        Verb::Sort => {
            let mut args = vec![Arg::Range(any_range(rng))];
            let key = if rng.random_bool(0.8) { letters(rng.random_range(1..=MAX_COLS)) } else { any_text(rng) };
            args.push(named("key", Literal::Text(key)));
            if rng.random_bool(0.5) {
                args.push(named("order", Literal::Text(pick(rng, &["ASC", "DESC"]).to_string())));
            }
            (args, None)
        }
        Verb::Copy => (vec![Arg::Range(any_range(rng)), Arg::Range(any_cell(rng))], None),
        Verb::Aggregate => (
            vec![
                Arg::Range(any_range(rng)),
                Arg::Range(any_cell(rng)),
                named("fn", Literal::Text(pick(rng, &["SUM", "AVG", "MIN", "MAX", "COUNT"]).to_string())),
            ],
            cond(rng),
        ),
    };
    // named arguments may appear in any order
    let n = args.len();
    if n > 2 && matches!(args[n - 2], Arg::Named { .. }) && rng.random_bool(0.5) {
        args.swap(n - 1, n - 2);
    }
    Action { verb, args, cond }
}

fn rng_bool(rng: &mut impl Rng) -> bool {
    rng.random_bool(0.5)
}

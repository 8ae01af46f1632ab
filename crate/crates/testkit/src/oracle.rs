//! A deliberately plain reference interpreter.
//!
//! Every sheet is a dense row-major `Vec<Vec<CellValue>>` trimmed to its used
//! extent. Nothing here calls into the production interpreter, its condition
//! evaluator, its sort order or its diff machinery.

use std::cmp::Ordering;

use sheetmind_core::{Action, CellAddress, CellValue, CmpOp, Condition, Literal, Range, Sheet, Verb, Workbook};

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub name: String,
    pub rows: Vec<Vec<CellValue>>,
}

impl Grid {
    fn get(&self, col: u32, row: u32) -> CellValue {
        self.rows
            .get(row as usize - 1)
            .and_then(|r| r.get(col as usize - 1))
            .cloned()
            .unwrap_or(CellValue::Empty)
    }

    fn set(&mut self, col: u32, row: u32, v: CellValue) {
        let (r, c) = (row as usize - 1, col as usize - 1);
        while self.rows.len() <= r {
            self.rows.push(Vec::new());
        }
        let width = self.width().max(c + 1);
        for line in &mut self.rows {
            line.resize(width, CellValue::Empty);
        }
        self.rows[r][c] = v;
        self.trim();
    }

    fn width(&self) -> usize {
        self.rows.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Drops trailing empty rows and columns and pads to a rectangle.
    fn trim(&mut self) {
        while self.rows.last().is_some_and(|r| r.iter().all(|v| *v == CellValue::Empty)) {
            self.rows.pop();
        }
        let mut width = 0;
        for line in &self.rows {
            for (i, v) in line.iter().enumerate() {
                if *v != CellValue::Empty {
                    width = width.max(i + 1);
                }
            }
        }
        for line in &mut self.rows {
            line.resize(width, CellValue::Empty);
        }
    }

    fn used_rows(&self) -> u32 {
        self.rows.len() as u32
    }

}

/// A workbook held as dense grids.
#[derive(Debug, Clone, PartialEq)]
pub struct NaiveBook {
    pub sheets: Vec<Grid>,
    pub active: usize,
}

impl NaiveBook {
    pub fn from_workbook(wb: &Workbook) -> NaiveBook {
        let mut sheets = Vec::new();
        for s in wb.sheets() {
            let mut g = Grid {
                name: s.name().to_string(),
                rows: Vec::new(),
            };
            for r in 1..=s.used_rows() {
                for c in 1..=s.used_cols() {
                    let v = s.get(CellAddress::new(c, r)).clone();
                    if v != CellValue::Empty {
                        g.set(c, r, v);
                    }
                }
            }
            sheets.push(g);
        }
        NaiveBook {
            sheets,
            active: wb.active_index(),
        }
    }

    pub fn to_workbook(&self) -> Workbook {
        let sheets = self
            .sheets
            .iter()
            .map(|g| Sheet::new(g.name.clone()).expect("valid name"))
            .collect();
        let mut wb = Workbook::from_sheets(sheets, self.active).expect("valid sheets");
        for g in &self.sheets {
            for (r, line) in g.rows.iter().enumerate() {
                for (c, v) in line.iter().enumerate() {
                    if *v != CellValue::Empty {
                        wb.set_cell(&g.name, CellAddress::new(c as u32 + 1, r as u32 + 1), v.clone())
                            .expect("in bounds");
                    }
                }
            }
        }
        wb
    }

    fn sheet_index(&self, name: Option<&str>) -> usize {
        match name {
            None => self.active,
            Some(n) => self
                .sheets
                .iter()
                .position(|g| g.name.to_lowercase() == n.to_lowercase())
                .expect("sheet exists"),
        }
    }

    /// Sheet index, first/last column and first/last row (possibly empty).
    fn rect(&self, r: &Range) -> (usize, u32, u32, u32, u32) {
        let s = self.sheet_index(r.sheet.as_deref());
        let bottom = r.end_row.unwrap_or(self.sheets[s].used_rows());
        (s, r.start.col, r.end_col, r.start.row, bottom)
    }
}

fn text_of(v: &CellValue) -> String {
    match v {
        CellValue::Empty => String::new(),
        CellValue::Text(s) | CellValue::Formula(s) => s.clone(),
        CellValue::Number(n) => {
            if *n == 0.0 {
                "0".to_string()
            } else {
                n.to_string()
            }
        }
        CellValue::Bool(b) => if *b { "TRUE" } else { "FALSE" }.to_string(),
        CellValue::Date(d) => d.as_str().to_string(),
    }
}

fn literal_value(l: &Literal) -> CellValue {
    match l {
        Literal::Text(s) if s.is_empty() => CellValue::Empty,
        Literal::Text(s) if s.starts_with('=') => CellValue::Formula(s.clone()),
        Literal::Text(s) => CellValue::Text(s.clone()),
        Literal::Number(n) => CellValue::Number(*n),
        Literal::Bool(b) => CellValue::Bool(*b),
        Literal::Date(d) => CellValue::Date(d.clone()),
    }
}

/// Condition semantics, written out case by case.
pub fn holds(c: &Condition, v: &CellValue) -> bool {
    match c {
        Condition::IsEmpty => *v == CellValue::Empty,
        Condition::Not(inner) => !holds(inner, v),
        Condition::And(cs) => {
            for c in cs {
                if !holds(c, v) {
                    return false;
                }
            }
            true
        }
        Condition::Or(cs) => {
            for c in cs {
                if holds(c, v) {
                    return true;
                }
            }
            false
        }
        Condition::Matches(p) => match regex::Regex::new(p) {
            Ok(re) => re.is_match(&text_of(v)),
            Err(_) => false,
        },
        Condition::Cmp(op, lit) => {
            let rhs = literal_value(lit);
            let ord = match (v, &rhs) {
                (CellValue::Empty, CellValue::Empty) => {
                    return *op == CmpOp::Eq;
                }
                (CellValue::Number(a), CellValue::Number(b)) => {
                    if a < b {
                        Ordering::Less
                    } else if a > b {
                        Ordering::Greater
                    } else {
                        Ordering::Equal
                    }
                }
                (CellValue::Text(a), CellValue::Text(b)) => a.as_bytes().cmp(b.as_bytes()),
                (CellValue::Formula(a), CellValue::Formula(b)) => a.as_bytes().cmp(b.as_bytes()),
                (CellValue::Bool(a), CellValue::Bool(b)) => (*a as u8).cmp(&(*b as u8)),
                (CellValue::Date(a), CellValue::Date(b)) => day_number(a.as_str()).cmp(&day_number(b.as_str())),
                _ => return false,
            };
            match op {
                CmpOp::Eq => ord == Ordering::Equal,
                CmpOp::Ne => ord != Ordering::Equal,
                CmpOp::Lt => ord == Ordering::Less,
                CmpOp::Le => ord != Ordering::Greater,
                CmpOp::Gt => ord == Ordering::Greater,
                CmpOp::Ge => ord != Ordering::Less,
            }
        }
    }
}

/// Days since 0000-03-01 in the proleptic Gregorian calendar.
pub fn day_number(iso: &str) -> i64 {
    let y: i64 = iso[0..4].parse().expect("year");
    let m: i64 = iso[5..7].parse().expect("month");
    let d: i64 = iso[8..10].parse().expect("day");
    let (y, m) = if m <= 2 { (y - 1, m + 9) } else { (y, m - 3) };
    365 * y + y / 4 - y / 100 + y / 400 + (153 * m + 2) / 5 + d - 1
}

fn kind_rank(v: &CellValue) -> u8 {
    match v {
        CellValue::Number(_) => 0,
        CellValue::Date(_) => 1,
        CellValue::Text(_) => 2,
        CellValue::Bool(_) => 3,
        CellValue::Formula(_) => 4,
        CellValue::Empty => 5,
    }
}

/// `true` when `a` must come strictly before `b`.
fn before(a: &CellValue, b: &CellValue, desc: bool) -> bool {
    let (ea, eb) = (*a == CellValue::Empty, *b == CellValue::Empty);
    if ea || eb {
        return !ea && eb;
    }
    let (x, y) = if desc { (b, a) } else { (a, b) };
    if kind_rank(x) != kind_rank(y) {
        return kind_rank(x) < kind_rank(y);
    }
    match (x, y) {
        (CellValue::Number(p), CellValue::Number(q)) => p < q,
        (CellValue::Date(p), CellValue::Date(q)) => day_number(p.as_str()) < day_number(q.as_str()),
        (CellValue::Text(p), CellValue::Text(q)) | (CellValue::Formula(p), CellValue::Formula(q)) => {
            p.as_bytes() < q.as_bytes()
        }
        (CellValue::Bool(p), CellValue::Bool(q)) => !*p && *q,
        _ => false,
    }
}

/// Cells reported by a SELECT.
pub type Selection = Vec<(String, CellAddress, CellValue)>;

/// Applies an action the caller has already found valid. Errors only on
/// numeric overflow in AGGREGATE.
pub fn naive_execute(book: &mut NaiveBook, a: &Action) -> Result<Option<Selection>, String> {
    let pass = |v: &CellValue| match &a.cond {
        Some(c) => holds(c, v),
        None => true,
    };
    let positional: Vec<_> = a.positional().collect();
    let range = |i: usize| positional[i].as_range().expect("range argument");
    let named = |k: &str| a.named(k);
    match a.verb {
        Verb::Select => {
            let (s, c1, c2, r1, r2) = book.rect(range(0));
            let g = &book.sheets[s];
            let mut out = Vec::new();
            for r in r1..=r2 {
                for c in c1..=c2 {
                    let v = g.get(c, r);
                    let keep = match &a.cond {
                        Some(cond) => holds(cond, &v),
                        None => v != CellValue::Empty,
                    };
                    if keep {
                        out.push((g.name.clone(), CellAddress::new(c, r), v));
                    }
                }
            }
            return Ok(Some(out));
        }
        Verb::Set | Verb::Delete => {
            let (s, c1, c2, r1, r2) = book.rect(range(0));
            let value = match a.verb {
                Verb::Set => match positional[1] {
                    sheetmind_core::Arg::Literal(l) => literal_value(l),
                    _ => unreachable!(),
                },
                _ => CellValue::Empty,
            };
            let g = &mut book.sheets[s];
            let mut hits = Vec::new();
            for r in r1..=r2 {
                for c in c1..=c2 {
                    if pass(&g.get(c, r)) {
                        hits.push((c, r));
                    }
                }
            }
            for (c, r) in hits {
                g.set(c, r, value.clone());
            }
        }
        Verb::DeleteRows => {
            let (s, c1, _, r1, r2) = book.rect(range(0));
            let g = &mut book.sheets[s];
            let doomed: Vec<u32> = (r1..=r2).filter(|r| pass(&g.get(c1, *r))).collect();
            for r in doomed.into_iter().rev() {
                if (r as usize) <= g.rows.len() {
                    g.rows.remove(r as usize - 1);
                }
            }
            g.trim();
        }
        Verb::InsertRows | Verb::InsertCols => {
            let at = positional[0];
            let at = match at {
                sheetmind_core::Arg::Literal(Literal::Number(n)) => *n as usize,
                _ => unreachable!(),
            };
            let count = named("count").and_then(|l| l.as_number()).unwrap_or(1.0) as usize;
            let g = &mut book.sheets[book.active];
            if a.verb == Verb::InsertRows {
                if at <= g.rows.len() {
                    let width = g.width();
                    for _ in 0..count {
                        g.rows.insert(at - 1, vec![CellValue::Empty; width]);
                    }
                }
            } else if at <= g.width() {
                for line in &mut g.rows {
                    for _ in 0..count {
                        line.insert(at - 1, CellValue::Empty);
                    }
                }
            }
            g.trim();
        }
        Verb::DeleteCols => {
            let r = range(0);
            let s = book.sheet_index(r.sheet.as_deref());
            let g = &mut book.sheets[s];
            for line in &mut g.rows {
                for c in (r.start.col..=r.end_col).rev() {
                    if (c as usize) <= line.len() {
                        line.remove(c as usize - 1);
                    }
                }
            }
            g.trim();
        }
        Verb::Sort => {
            let (s, c1, c2, r1, r2) = book.rect(range(0));
            let key = named("key").and_then(|l| l.as_text()).expect("key");
            let key_col = key.bytes().fold(0u32, |acc, b| acc * 26 + u32::from(b - b'A' + 1));
            let desc = named("order").and_then(|l| l.as_text()) == Some("DESC");
            let g = &mut book.sheets[s];
            let mut block: Vec<Vec<CellValue>> =
                (r1..=r2).map(|r| (c1..=c2).map(|c| g.get(c, r)).collect()).collect();
            let k = (key_col - c1) as usize;
            // insertion sort: stable by construction
            for i in 1..block.len() {
                let mut j = i;
                while j > 0 && before(&block[j][k], &block[j - 1][k], desc) {
                    block.swap(j, j - 1);
                    j -= 1;
                }
            }
            for (dr, line) in block.into_iter().enumerate() {
                for (dc, v) in line.into_iter().enumerate() {
                    g.set(c1 + dc as u32, r1 + dr as u32, v);
                }
            }
        }
        Verb::Copy => {
            let (s, c1, c2, r1, r2) = book.rect(range(0));
            let dst = range(1);
            let d = book.sheet_index(dst.sheet.as_deref());
            let mut values = Vec::new();
            for r in r1..=r2 {
                for c in c1..=c2 {
                    values.push((c - c1, r - r1, book.sheets[s].get(c, r)));
                }
            }
            for (dc, dr, v) in values {
                book.sheets[d].set(dst.start.col + dc, dst.start.row + dr, v);
            }
        }
        Verb::Aggregate => {
            let (s, c1, c2, r1, r2) = book.rect(range(0));
            let dst = range(1);
            let f = named("fn").and_then(|l| l.as_text()).expect("fn");
            let mut picked = Vec::new();
            for r in r1..=r2 {
                for c in c1..=c2 {
                    let v = book.sheets[s].get(c, r);
                    if pass(&v) {
                        picked.push(v);
                    }
                }
            }
            if picked.is_empty() {
                return Ok(None);
            }
            let mut nums = Vec::new();
            let mut filled = 0;
            for v in &picked {
                if let CellValue::Number(n) = v {
                    nums.push(*n);
                }
                if *v != CellValue::Empty {
                    filled += 1;
                }
            }
            let mut total = 0.0;
            for n in &nums {
                total += n;
            }
            let result = match f {
                "SUM" => CellValue::Number(total),
                "COUNT" => CellValue::Number(filled as f64),
                _ if nums.is_empty() => CellValue::Empty,
                "AVG" => CellValue::Number(total / nums.len() as f64),
                "MIN" => CellValue::Number(nums.iter().copied().fold(f64::INFINITY, f64::min)),
                "MAX" => CellValue::Number(nums.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
                other => return Err(format!("unknown fn {other}")),
            };
            if let CellValue::Number(n) = result {
                if !n.is_finite() {
                    return Err("overflow".into());
                }
            }
            let d = book.sheet_index(dst.sheet.as_deref());
            book.sheets[d].set(dst.start.col, dst.start.row, result);
        }
    }
    Ok(None)
}

/// Runs an action on a copy of `wb` and returns the final workbook.
pub fn naive_apply(wb: &Workbook, a: &Action) -> Result<(Workbook, Option<Selection>), String> {
    let mut book = NaiveBook::from_workbook(wb);
    let sel = naive_execute(&mut book, a)?;
    Ok((book.to_workbook(), sel))
}

/// Cell-by-cell comparison of two workbooks over a dense window; returns
/// the mismatching cells as `sheet!A1`.
pub fn dense_mismatches(a: &Workbook, b: &Workbook) -> Vec<String> {
    let mut out = Vec::new();
    if a.sheets().len() != b.sheets().len() {
        out.push("sheet count".to_string());
        return out;
    }
    for (sa, sb) in a.sheets().iter().zip(b.sheets()) {
        if sa.name() != sb.name() {
            out.push(format!("sheet name {} vs {}", sa.name(), sb.name()));
            continue;
        }
        let rows = sa.used_rows().max(sb.used_rows());
        let cols = sa.used_cols().max(sb.used_cols());
        for r in 1..=rows {
            for c in 1..=cols {
                let addr = CellAddress::new(c, r);
                if sa.get(addr) != sb.get(addr) {
                    out.push(format!("{}!{addr}", sa.name()));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn day_numbers_are_consecutive() {
        assert_eq!(day_number("2024-03-01") - day_number("2024-02-28"), 2);
        assert_eq!(day_number("2023-03-01") - day_number("2023-02-28"), 1);
        assert_eq!(day_number("2025-01-01") - day_number("2024-12-31"), 1);
        assert!(day_number("2024-01-15") < day_number("2024-02-01"));
    }

    #[test]
    fn grid_trims() {
        let mut g = Grid {
            name: "S".into(),
            rows: Vec::new(),
        };
        g.set(3, 4, CellValue::Number(1.0));
        assert_eq!((g.used_rows(), g.width()), (4, 3));
        g.set(3, 4, CellValue::Empty);
        assert_eq!((g.used_rows(), g.width()), (0, 0));
    }
}

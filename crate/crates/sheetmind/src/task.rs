//! Benchmark task specs and the final-state checker.
//!
//! A suite is a directory of `*.task.yaml` files. Paths inside a task are
//! relative to the file that names them.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sheetmind_core::io::{from_json, from_json_value, load_csv};
use sheetmind_core::{CellAddress, CellValue, Sheet, Workbook};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TaskError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {detail}")]
    Invalid { path: PathBuf, detail: String },
}

fn invalid(path: &Path, detail: impl fmt::Display) -> TaskError {
    TaskError::Invalid {
        path: path.to_path_buf(),
        detail: detail.to_string(),
    }
}

fn read(path: &Path) -> Result<String, TaskError> {
    std::fs::read_to_string(path).map_err(|source| TaskError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    SingleStep,
    MultiStep,
}

impl Category {
    pub const ALL: [Category; 2] = [Category::SingleStep, Category::MultiStep];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::SingleStep => "single_step",
            Category::MultiStep => "multi_step",
        }
    }
}

/// One sheet written as rows of scalars. Blank or null entries are empty
/// cells; everything else goes through the usual type inference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSheet {
    pub name: String,
    #[serde(default)]
    pub rows: Vec<Vec<serde_yaml::Value>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WorkbookSource {
    Csv {
        csv: PathBuf,
    },
    Json {
        json: PathBuf,
    },
    Inline {
        workbook: serde_json::Value,
    },
    Grid {
        sheets: Vec<GridSheet>,
        #[serde(default)]
        active: usize,
    },
}

fn scalar(v: &serde_yaml::Value) -> Result<CellValue, String> {
    use serde_yaml::Value;
    Ok(match v {
        Value::Null => CellValue::Empty,
        Value::Bool(b) => CellValue::Bool(*b),
        Value::Number(n) => CellValue::infer(&n.to_string()),
        Value::String(s) => CellValue::infer(s),
        other => return Err(format!("cells must be scalars, found {other:?}")),
    })
}

impl WorkbookSource {
    pub fn load(&self, base: &Path) -> Result<Workbook, TaskError> {
        match self {
            WorkbookSource::Csv { csv } => {
                let path = base.join(csv);
                load_csv(&read(&path)?).map_err(|e| invalid(&path, e))
            }
            WorkbookSource::Json { json } => {
                let path = base.join(json);
                from_json(&read(&path)?).map_err(|e| invalid(&path, e))
            }
            WorkbookSource::Inline { workbook } => from_json_value(workbook.clone()).map_err(|e| invalid(base, e)),
            WorkbookSource::Grid { sheets, active } => {
                let empty = sheets
                    .iter()
                    .map(|g| Sheet::new(g.name.clone()))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| invalid(base, e))?;
                let mut wb = Workbook::from_sheets(empty, *active).map_err(|e| invalid(base, e))?;
                for g in sheets {
                    for (r, row) in g.rows.iter().enumerate() {
                        for (c, v) in row.iter().enumerate() {
                            let value = scalar(v).map_err(|e| invalid(base, e))?;
                            let addr = CellAddress::new(c as u32 + 1, r as u32 + 1);
                            wb.set_cell(&g.name, addr, value).map_err(|e| invalid(base, e))?;
                        }
                    }
                }
                Ok(wb)
            }
        }
    }
}

/// A task as written on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSpec {
    pub id: String,
    pub description: String,
    pub category: Category,
    #[serde(default)]
    pub family: Option<String>,
    /// How the script's first attempt goes wrong, if it does.
    #[serde(default)]
    pub fault: Option<String>,
    pub initial: WorkbookSource,
    pub expected: WorkbookSource,
    /// Backend script for deterministic runs.
    #[serde(default)]
    pub script: Option<PathBuf>,
    /// Canonical action sequence that solves the task.
    #[serde(default)]
    pub reference: Vec<String>,
}

/// A task with its workbooks and script loaded.
#[derive(Debug, Clone)]
pub struct Task {
    pub spec: TaskSpec,
    pub path: PathBuf,
    pub initial: Workbook,
    pub expected: Workbook,
    pub script: Option<String>,
}

impl Task {
    pub fn id(&self) -> &str {
        &self.spec.id
    }

    pub fn category(&self) -> Category {
        self.spec.category
    }

    pub fn fault_injected(&self) -> bool {
        self.spec.fault.is_some()
    }
}

pub fn load_task(path: &Path) -> Result<Task, TaskError> {
    let spec: TaskSpec = serde_yaml::from_str(&read(path)?).map_err(|e| invalid(path, e))?;
    if spec.id.trim().is_empty() || spec.description.trim().is_empty() {
        return Err(invalid(path, "id and description must be non-empty"));
    }
    let base = path.parent().unwrap_or(Path::new("."));
    let initial = spec.initial.load(base)?;
    let expected = spec.expected.load(base)?;
    let script = match &spec.script {
        Some(p) => Some(read(&base.join(p))?),
        None => None,
    };
    Ok(Task {
        spec,
        path: path.to_path_buf(),
        initial,
        expected,
        script,
    })
}

/// Loads every `*.task.yaml` in `dir`, ordered by file name. Ids must be unique.
pub fn load_suite(dir: &Path) -> Result<Vec<Task>, TaskError> {
    let entries = std::fs::read_dir(dir).map_err(|source| TaskError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.ends_with(".task.yaml")))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(invalid(dir, "no *.task.yaml files"));
    }
    let tasks = paths.iter().map(|p| load_task(p)).collect::<Result<Vec<_>, _>>()?;
    let mut ids = BTreeSet::new();
    for t in &tasks {
        if !ids.insert(t.id().to_string()) {
            return Err(invalid(&t.path, format!("duplicate task id {}", t.id())));
        }
    }
    Ok(tasks)
}

pub const MAX_REPORTED_DIFFERENCES: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellMismatch {
    pub sheet: String,
    pub addr: CellAddress,
    pub expected: CellValue,
    pub actual: CellValue,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum CheckResult {
    Pass,
    Fail {
        detail: String,
        /// The first few differing cells in sheet then row-major order.
        cells: Vec<CellMismatch>,
        total_differences: usize,
    },
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        matches!(self, CheckResult::Pass)
    }
}

/// Final-state comparison: same sheets in the same order (names compared
/// case-insensitively) and typed cell-for-cell equality. The active sheet
/// is not compared.
pub fn check_task(expected: &Workbook, actual: &Workbook) -> CheckResult {
    let names = |wb: &Workbook| -> Vec<String> { wb.sheets().iter().map(|s| s.name().to_lowercase()).collect() };
    if names(expected) != names(actual) {
        let show = |wb: &Workbook| wb.sheets().iter().map(|s| s.name()).collect::<Vec<_>>().join(", ");
        return CheckResult::Fail {
            detail: format!("sheets differ: expected [{}], got [{}]", show(expected), show(actual)),
            cells: Vec::new(),
            total_differences: 0,
        };
    }
    let mut cells = Vec::new();
    let mut total = 0;
    for (e, a) in expected.sheets().iter().zip(actual.sheets()) {
        let addrs: BTreeSet<CellAddress> = e.cells().chain(a.cells()).map(|(addr, _)| addr).collect();
        for addr in addrs {
            let (ev, av) = (e.get(addr), a.get(addr));
            if ev != av {
                total += 1;
                if cells.len() < MAX_REPORTED_DIFFERENCES {
                    cells.push(CellMismatch {
                        sheet: e.name().to_string(),
                        addr,
                        expected: ev.clone(),
                        actual: av.clone(),
                    });
                }
            }
        }
    }
    if total == 0 {
        return CheckResult::Pass;
    }
    let first = &cells[0];
    CheckResult::Fail {
        detail: format!(
            "{total} cell(s) differ; first {}!{}: expected {}, got {}",
            first.sheet,
            first.addr,
            describe(&first.expected),
            describe(&first.actual)
        ),
        cells,
        total_differences: total,
    }
}

fn describe(v: &CellValue) -> String {
    if v.is_empty() {
        "empty".into()
    } else {
        format!("{} {:?}", v.type_tag(), v.render())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wb(cells: &[(&str, CellValue)]) -> Workbook {
        let mut wb = Workbook::new();
        for (a1, v) in cells {
            wb.set_cell("Sheet1", CellAddress::parse(a1).unwrap(), v.clone()).unwrap();
        }
        wb
    }

    #[test]
    fn identical_workbooks_pass() {
        let a = wb(&[("A1", CellValue::Number(1.0))]);
        assert_eq!(check_task(&a, &a.clone()), CheckResult::Pass);
    }

    #[test]
    fn one_differing_cell_is_listed() {
        let a = wb(&[("A1", CellValue::Number(1.0)), ("B2", CellValue::Text("x".into()))]);
        let b = wb(&[("A1", CellValue::Number(1.0)), ("B2", CellValue::Text("y".into()))]);
        match check_task(&a, &b) {
            CheckResult::Fail {
                cells, total_differences, ..
            } => {
                assert_eq!(total_differences, 1);
                assert_eq!(cells[0].addr, CellAddress::parse("B2").unwrap());
            }
            CheckResult::Pass => panic!("should fail"),
        }
    }

    #[test]
    fn types_matter() {
        let a = wb(&[("A1", CellValue::Number(2.0))]);
        let b = wb(&[("A1", CellValue::Text("2".into()))]);
        assert!(!check_task(&a, &b).passed());
    }

    #[test]
    fn sheet_names_compare_case_insensitively_and_list_is_capped() {
        let mut a = Workbook::new();
        a.add_sheet("Data").unwrap();
        let mut b = Workbook::new();
        b.add_sheet("DATA").unwrap();
        assert!(check_task(&a, &b).passed());
        b.add_sheet("Extra").unwrap();
        assert!(!check_task(&a, &b).passed());

        let many: Vec<(String, CellValue)> = (1..=15).map(|r| (format!("A{r}"), CellValue::Bool(true))).collect();
        let refs: Vec<(&str, CellValue)> = many.iter().map(|(k, v)| (k.as_str(), v.clone())).collect();
        match check_task(&Workbook::new(), &wb(&refs)) {
            CheckResult::Fail {
                cells, total_differences, ..
            } => {
                assert_eq!(cells.len(), 10);
                assert_eq!(total_differences, 15);
            }
            CheckResult::Pass => panic!("should fail"),
        }
    }

    #[test]
    fn grid_source_infers_types() {
        let src: WorkbookSource = serde_yaml::from_str(
            "sheets:\n  - name: S\n    rows:\n      - [Name, 3, 1.5, true, '2024-01-15', '', ~]\n",
        )
        .unwrap();
        let w = src.load(Path::new(".")).unwrap();
        let s = &w.sheets()[0];
        let at = |a1: &str| s.get(CellAddress::parse(a1).unwrap()).clone();
        assert_eq!(at("A1"), CellValue::Text("Name".into()));
        assert_eq!(at("B1"), CellValue::Number(3.0));
        assert_eq!(at("C1"), CellValue::Number(1.5));
        assert_eq!(at("D1"), CellValue::Bool(true));
        assert_eq!(at("E1").type_tag(), "d");
        assert!(at("F1").is_empty() && at("G1").is_empty());
    }
}

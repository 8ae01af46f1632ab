//! Interfaces over the editing pipeline: the HTTP service, the command line
//! and the ablation benchmark.

pub mod bench;
pub mod cli;
pub mod service;
pub mod task;

pub use bench::{parse_configs, run_bench, run_task, BackendMode, BenchError, BenchOptions, BenchReport, ConfigReport, Tally, TaskRun};
pub use service::{router, serve, serve_on, AppState};
pub use task::{check_task, load_suite, load_task, Category, CheckResult, Task, TaskError, TaskSpec};

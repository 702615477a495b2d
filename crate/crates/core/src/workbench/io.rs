//! JSON instance and schedule files. Rationals are written as `"num/den"`
//! strings; decimal strings and plain integers are accepted on input.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::Rational;
use crate::scheduler::Schedule;
use crate::task_model::{ModelError, SpeedupProfile, Task, TaskId, TaskSet};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    /// Malformed JSON, unknown or missing fields, bad numerics.
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    /// Well-formed document describing an invalid instance.
    #[error("{0}")]
    Schema(#[from] ModelError),
}

impl FormatError {
    /// Task named by a schema violation, if any.
    pub fn task(&self) -> Option<TaskId> {
        match self {
            FormatError::Schema(ModelError::InvalidProfile { id, .. })
            | FormatError::Schema(ModelError::DuplicateId(id))
            | FormatError::Schema(ModelError::NegativeValue(id)) => Some(*id),
            _ => None,
        }
    }
}

impl From<serde_json::Error> for FormatError {
    fn from(e: serde_json::Error) -> Self {
        FormatError::Syntax { line: e.line(), column: e.column(), message: e.to_string() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    delta: usize,
    k: usize,
    m: usize,
    tasks: Vec<TaskDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TaskDoc {
    id: TaskId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    value: Option<Rational>,
    profile: ProfileDoc,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum ProfileDoc {
    Table { workloads: Vec<Rational> },
    Piecewise { d1: Rational, linear_limit: usize, growth: Rational },
}

impl From<&Task> for TaskDoc {
    fn from(task: &Task) -> Self {
        let profile = match &task.profile {
            SpeedupProfile::Table { workloads } => ProfileDoc::Table { workloads: workloads.clone() },
            SpeedupProfile::Piecewise { base_workload, linear_limit, growth_rate } => ProfileDoc::Piecewise {
                d1: base_workload.clone(),
                linear_limit: *linear_limit,
                growth: growth_rate.clone(),
            },
        };
        TaskDoc { id: task.id, value: task.value.clone(), profile }
    }
}

impl From<TaskDoc> for Task {
    fn from(doc: TaskDoc) -> Self {
        let profile = match doc.profile {
            ProfileDoc::Table { workloads } => SpeedupProfile::table(workloads),
            ProfileDoc::Piecewise { d1, linear_limit, growth } => SpeedupProfile::piecewise(d1, linear_limit, growth),
        };
        Task { id: doc.id, profile, value: doc.value }
    }
}

pub fn parse_instance(text: &str) -> Result<TaskSet, FormatError> {
    let doc: InstanceDoc = serde_json::from_str(text)?;
    let tasks = doc.tasks.into_iter().map(Task::from).collect();
    Ok(TaskSet::new(doc.delta, doc.k, doc.m, tasks)?)
}

pub fn instance_to_json(tasks: &TaskSet) -> String {
    let doc = InstanceDoc {
        delta: tasks.delta(),
        k: tasks.k(),
        m: tasks.m(),
        tasks: tasks.tasks().iter().map(TaskDoc::from).collect(),
    };
    serde_json::to_string_pretty(&doc).expect("instance documents serialize")
}

pub fn schedule_to_json(schedule: &Schedule) -> String {
    serde_json::to_string_pretty(schedule).expect("schedules serialize")
}

pub fn parse_schedule(text: &str) -> Result<Schedule, FormatError> {
    Ok(serde_json::from_str(text)?)
}

fn read(path: &Path) -> Result<String, FormatError> {
    std::fs::read_to_string(path).map_err(|source| FormatError::Io { path: path.to_path_buf(), source })
}

fn write(path: &Path, text: String) -> Result<(), FormatError> {
    std::fs::write(path, text + "\n").map_err(|source| FormatError::Io { path: path.to_path_buf(), source })
}

pub fn load_instance(path: &Path) -> Result<TaskSet, FormatError> {
    parse_instance(&read(path)?)
}

pub fn save_instance(tasks: &TaskSet, path: &Path) -> Result<(), FormatError> {
    write(path, instance_to_json(tasks))
}

pub fn load_schedule(path: &Path) -> Result<Schedule, FormatError> {
    parse_schedule(&read(path)?)
}

pub fn save_schedule(schedule: &Schedule, path: &Path) -> Result<(), FormatError> {
    write(path, schedule_to_json(schedule))
}

//! Moldable tasks with (δ,k)-monotonic speedup profiles.
//!
//! A profile maps a processor count `p` to the workload `D_p` processed when
//! the task runs on `p` processors; its execution time is `D_p / p`. Valid
//! profiles keep the workload constant on `[1, δ]` and non-decreasing on
//! `[δ, k]`.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::ToPrimitive;
use thiserror::Error;

use crate::rational::Rational;
use crate::report::ValidationReport;

pub type TaskId = u64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("processor count {p} outside [1, {k}]")]
    ProcessorsOutOfRange { p: usize, k: usize },
    #[error("delta must be >= 1 (got {0})")]
    DeltaTooSmall(usize),
    #[error("parallelism bound k={k} is below delta={delta}")]
    BoundBelowDelta { delta: usize, k: usize },
    #[error("processor count m must be >= 1")]
    NoProcessors,
    #[error("duplicate task id {0}")]
    DuplicateId(TaskId),
    #[error("task {id}: {report}")]
    InvalidProfile { id: TaskId, report: ValidationReport<ProfileViolation> },
    #[error("task {0}: value must be non-negative")]
    NegativeValue(TaskId),
    #[error("deadline must be positive (got {0})")]
    NonPositiveDeadline(Rational),
}

/// Speedup profile of one task.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpeedupProfile {
    /// Explicit workloads for `p = 1..=k`.
    Table { workloads: Vec<Rational> },
    /// Constant workload up to `linear_limit` processors, then growing by
    /// `growth_rate` (relative to the base) per extra processor.
    Piecewise { base_workload: Rational, linear_limit: usize, growth_rate: Rational },
}

impl SpeedupProfile {
    pub fn table(workloads: Vec<Rational>) -> Self {
        SpeedupProfile::Table { workloads }
    }

    /// Same workload for every `p` in `[1, k]`.
    pub fn constant(workload: Rational, k: usize) -> Self {
        SpeedupProfile::Table { workloads: vec![workload; k] }
    }

    pub fn piecewise(base_workload: Rational, linear_limit: usize, growth_rate: Rational) -> Self {
        SpeedupProfile::Piecewise { base_workload, linear_limit, growth_rate }
    }

    /// `D_p`, the workload on `p` processors.
    pub fn workload(&self, p: usize, k: usize) -> Result<Rational, ModelError> {
        if p == 0 || p > k {
            return Err(ModelError::ProcessorsOutOfRange { p, k });
        }
        match self {
            SpeedupProfile::Table { workloads } => workloads
                .get(p - 1)
                .cloned()
                .ok_or(ModelError::ProcessorsOutOfRange { p, k: workloads.len() }),
            SpeedupProfile::Piecewise { base_workload, linear_limit, growth_rate } => {
                if p <= *linear_limit {
                    Ok(base_workload.clone())
                } else {
                    let extra = growth_rate.scale(p - linear_limit);
                    Ok(base_workload * &(Rational::one() + extra))
                }
            }
        }
    }

    /// `t_p = D_p / p`.
    pub fn exec_time(&self, p: usize, k: usize) -> Result<Rational, ModelError> {
        Ok(self.workload(p, k)?.div_int(p))
    }

    /// `D_1`.
    pub fn base_workload(&self) -> Rational {
        match self {
            SpeedupProfile::Table { workloads } => {
                workloads.first().cloned().unwrap_or_else(Rational::zero)
            }
            SpeedupProfile::Piecewise { base_workload, .. } => base_workload.clone(),
        }
    }

    /// Smallest execution time over `p` in `[1, k]` (no `p` limit other than `k`).
    pub fn fastest_time(&self, k: usize) -> Rational {
        (1..=k)
            .filter_map(|p| self.exec_time(p, k).ok())
            .min()
            .unwrap_or_else(Rational::zero)
    }
}

/// Why a profile is not (δ,k)-monotonic. Each variant names the offending `p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProfileViolation {
    /// Table length differs from `k`; `p` is the table length.
    Length { p: usize, expected: usize },
    NonPositive { p: usize },
    /// `D_p != D_1` inside the constant-workload region.
    NotConstant { p: usize },
    /// `D_p < D_{p-1}` in the non-decreasing region.
    Decreasing { p: usize },
    /// Piecewise `linear_limit` outside `[delta, k]`; `p` is the limit.
    LinearLimit { p: usize },
    /// Piecewise growth below zero; reported at `p = 1`.
    NegativeGrowth { p: usize },
}

impl ProfileViolation {
    pub fn p(&self) -> usize {
        match self {
            ProfileViolation::Length { p, .. }
            | ProfileViolation::NonPositive { p }
            | ProfileViolation::NotConstant { p }
            | ProfileViolation::Decreasing { p }
            | ProfileViolation::LinearLimit { p }
            | ProfileViolation::NegativeGrowth { p } => *p,
        }
    }
}

impl fmt::Display for ProfileViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProfileViolation::Length { p, expected } => {
                write!(f, "table has {p} workloads, expected k={expected}")
            }
            ProfileViolation::NonPositive { p } => write!(f, "workload at p={p} is not positive"),
            ProfileViolation::NotConstant { p } => {
                write!(f, "workload at p={p} differs from p=1 inside the linear region")
            }
            ProfileViolation::Decreasing { p } => write!(f, "workload decreases at p={p}"),
            ProfileViolation::LinearLimit { p } => {
                write!(f, "linear limit {p} outside [delta, k]")
            }
            ProfileViolation::NegativeGrowth { p } => write!(f, "negative growth rate (p={p})"),
        }
    }
}

/// Checks that `profile` is (δ,k)-monotonic. The report is empty iff valid.
pub fn validate_profile(
    profile: &SpeedupProfile,
    delta: usize,
    k: usize,
) -> ValidationReport<ProfileViolation> {
    let mut report = ValidationReport::new();
    match profile {
        SpeedupProfile::Table { workloads } => {
            if workloads.len() != k {
                report.push(ProfileViolation::Length { p: workloads.len(), expected: k });
                return report;
            }
        }
        SpeedupProfile::Piecewise { linear_limit, growth_rate, .. } => {
            if *linear_limit < delta.min(k) || *linear_limit > k {
                report.push(ProfileViolation::LinearLimit { p: *linear_limit });
            }
            if growth_rate.is_negative() {
                report.push(ProfileViolation::NegativeGrowth { p: 1 });
            }
            if !report.is_valid() {
                return report;
            }
        }
    }
    let workloads: Vec<Rational> = (1..=k)
        .map(|p| profile.workload(p, k).expect("p within [1, k]"))
        .collect();
    for (i, w) in workloads.iter().enumerate() {
        if !w.is_positive() {
            report.push(ProfileViolation::NonPositive { p: i + 1 });
        }
    }
    let constant_until = delta.min(k);
    for p in 2..=constant_until {
        if workloads[p - 1] != workloads[0] {
            report.push(ProfileViolation::NotConstant { p });
        }
    }
    for p in (constant_until + 1)..=k {
        if workloads[p - 1] < workloads[p - 2] {
            report.push(ProfileViolation::Decreasing { p });
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Task {
    pub id: TaskId,
    pub profile: SpeedupProfile,
    /// Value earned when the task completes by the common deadline.
    pub value: Option<Rational>,
}

impl Task {
    pub fn new(id: TaskId, profile: SpeedupProfile) -> Self {
        Task { id, profile, value: None }
    }

    pub fn with_value(mut self, value: Rational) -> Self {
        self.value = Some(value);
        self
    }
}

/// Minimum processor count in `[1, k]` that finishes `task` by `d`, or `None`
/// when even `k` processors are too slow.
///
/// The scan starts at `ceil(D_1 / d)`: below that count the task is too slow
/// because workloads never drop under `D_1` on a valid profile.
pub fn canonical_processors(task: &Task, d: &Rational, k: usize) -> Option<usize> {
    if !d.is_positive() {
        return None;
    }
    let base = task.profile.base_workload();
    let lowest = (&base / d).ceil().to_usize().unwrap_or(usize::MAX).max(1);
    if lowest > k {
        return None;
    }
    (lowest..=k).find(|&p| {
        let w = task.profile.workload(p, k).expect("p within [1, k]");
        w <= d.scale(p)
    })
}

/// A validated instance: tasks sharing `delta`, `k`, and `m` processors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskSet {
    delta: usize,
    k: usize,
    m: usize,
    tasks: Vec<Task>,
}

impl TaskSet {
    pub fn new(delta: usize, k: usize, m: usize, tasks: Vec<Task>) -> Result<Self, ModelError> {
        if delta == 0 {
            return Err(ModelError::DeltaTooSmall(delta));
        }
        if k < delta {
            return Err(ModelError::BoundBelowDelta { delta, k });
        }
        if m == 0 {
            return Err(ModelError::NoProcessors);
        }
        let mut seen = BTreeSet::new();
        for task in &tasks {
            if !seen.insert(task.id) {
                return Err(ModelError::DuplicateId(task.id));
            }
            let report = validate_profile(&task.profile, delta, k);
            if !report.is_valid() {
                return Err(ModelError::InvalidProfile { id: task.id, report });
            }
            if task.value.as_ref().is_some_and(Rational::is_negative) {
                return Err(ModelError::NegativeValue(task.id));
            }
        }
        Ok(TaskSet { delta, k, m, tasks })
    }

    pub fn delta(&self) -> usize {
        self.delta
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn tasks(&self) -> &[Task] {
        &self.tasks
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    pub fn get(&self, id: TaskId) -> Option<&Task> {
        self.tasks.iter().find(|t| t.id == id)
    }

    /// Same parameters, different processor count.
    pub fn with_processors(&self, m: usize) -> Result<Self, ModelError> {
        if m == 0 {
            return Err(ModelError::NoProcessors);
        }
        Ok(TaskSet { m, ..self.clone() })
    }

    /// Sub-instance with the given tasks (already validated against the same
    /// `delta` and `k`).
    pub fn subset<'a>(&self, tasks: impl IntoIterator<Item = &'a Task>) -> TaskSet {
        TaskSet {
            delta: self.delta,
            k: self.k,
            m: self.m,
            tasks: tasks.into_iter().cloned().collect(),
        }
    }

    pub fn exec_time(&self, task: &Task, p: usize) -> Result<Rational, ModelError> {
        task.profile.exec_time(p, self.k)
    }

    pub fn workload(&self, task: &Task, p: usize) -> Result<Rational, ModelError> {
        task.profile.workload(p, self.k)
    }

    pub fn canonical_processors(&self, task: &Task, d: &Rational) -> Option<usize> {
        canonical_processors(task, d, self.k)
    }
}

//! Single-deadline scheduler.
//!
//! Dedicated tasks get their canonical number of processors from time 0, packed
//! leftmost in order of decreasing width. The remaining processors are cut
//! into groups of `group_width`; each group stacks tasks back to back, always
//! drawing from the highest nonempty class (short tasks last), and closes as
//! soon as the next candidate would overrun the deadline.

use std::collections::VecDeque;
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classifier::{classify, TaskClass};
use crate::params::ParamSet;
use crate::rational::Rational;
use crate::report::ValidationReport;
use crate::task_model::{ModelError, TaskId, TaskSet};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Placement {
    #[serde(rename = "task")]
    pub task_id: TaskId,
    /// 1-based index of the leftmost processor.
    pub first_processor: usize,
    pub width: usize,
    pub start: Rational,
    pub end: Rational,
}

impl Placement {
    pub fn last_processor(&self) -> usize {
        self.first_processor + self.width - 1
    }

    pub fn area(&self) -> Rational {
        (&self.end - &self.start).scale(self.width)
    }

    fn overlaps(&self, other: &Placement) -> bool {
        self.first_processor <= other.last_processor()
            && other.first_processor <= self.last_processor()
            && self.start < other.end
            && other.start < self.end
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExitReason {
    #[serde(rename = "all_placed")]
    AllPlaced,
    /// A dedicated task needed more processors than were left.
    #[serde(rename = "insufficient_for_a_prime")]
    NoRoomForDedicated,
    /// Fewer than `group_width` processors were left for remaining tasks.
    #[serde(rename = "insufficient_for_group")]
    NoRoomForGroup,
}

impl ExitReason {
    pub fn as_str(self) -> &'static str {
        match self {
            ExitReason::AllPlaced => "all_placed",
            ExitReason::NoRoomForDedicated => "insufficient_for_a_prime",
            ExitReason::NoRoomForGroup => "insufficient_for_group",
        }
    }
}

impl fmt::Display for ExitReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schedule {
    pub d: Rational,
    pub m: usize,
    pub exit_reason: ExitReason,
    pub placements: Vec<Placement>,
    pub rejected: Vec<TaskId>,
}

impl Schedule {
    pub fn is_complete(&self) -> bool {
        self.exit_reason == ExitReason::AllPlaced
    }

    pub fn makespan(&self) -> Rational {
        self.placements.iter().map(|p| p.end.clone()).max().unwrap_or_default()
    }

    pub fn placement(&self, id: TaskId) -> Option<&Placement> {
        self.placements.iter().find(|p| p.task_id == id)
    }
}

#[derive(Debug, Clone, Default)]
pub struct UnitAlgoOptions {
    /// Shuffle each class before stacking instead of using id order.
    pub shuffle_seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupTrace {
    pub first_processor: usize,
    /// Stacked tasks in start order with their classes.
    pub entries: Vec<(TaskId, TaskClass)>,
    /// Total stacked execution time.
    pub busy: Rational,
    /// Head task that did not fit and closed the group.
    pub blocked_by: Option<(TaskId, TaskClass)>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Trace {
    pub groups: Vec<GroupTrace>,
    /// Fit tests performed while stacking.
    pub examinations: usize,
}

pub fn unit_algo(tasks: &TaskSet, d: &Rational, params: &ParamSet) -> Result<Schedule, ModelError> {
    unit_algo_with(tasks, d, params, &UnitAlgoOptions::default()).map(|(s, _)| s)
}

pub fn unit_algo_with(
    tasks: &TaskSet,
    d: &Rational,
    params: &ParamSet,
    options: &UnitAlgoOptions,
) -> Result<(Schedule, Trace), ModelError> {
    if !d.is_positive() {
        return Err(ModelError::NonPositiveDeadline(d.clone()));
    }
    let k = tasks.k();
    let m = tasks.m();
    let gw = params.group_width;
    let cls = classify(tasks, d, params);
    let mut trace = Trace::default();
    let mut schedule = Schedule {
        d: d.clone(),
        m,
        exit_reason: ExitReason::AllPlaced,
        placements: Vec::new(),
        rejected: Vec::new(),
    };

    // A task that cannot meet d at all behaves like a dedicated task wider
    // than the machine: it is examined first and fails immediately.
    if !cls.infeasible.is_empty() {
        schedule.rejected = sorted_ids(tasks);
        schedule.exit_reason = ExitReason::NoRoomForDedicated;
        return Ok((schedule, trace));
    }

    let exec = |id: TaskId, p: usize| -> Rational {
        let task = tasks.get(id).expect("classified ids come from the task set");
        task.profile.exec_time(p, k).expect("width within [1, k]")
    };

    let mut dedicated = cls.dedicated.clone();
    dedicated.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut queues: Vec<(TaskClass, VecDeque<TaskId>)> = params
        .classes_desc()
        .map(|h| (TaskClass::Stacked { h }, cls.classes[&h].clone()))
        .chain(std::iter::once((TaskClass::Short, cls.short.clone())))
        .map(|(class, mut ids)| {
            if let Some(seed) = options.shuffle_seed {
                ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            }
            (class, VecDeque::from(ids))
        })
        .collect();

    let mut next_free = 1;
    let mut free = m;
    for (i, &(id, width)) in dedicated.iter().enumerate() {
        if width > free {
            schedule.rejected = dedicated[i..]
                .iter()
                .map(|(id, _)| *id)
                .chain(queues.iter().flat_map(|(_, q)| q.iter().copied()))
                .collect();
            schedule.rejected.sort_unstable();
            schedule.exit_reason = ExitReason::NoRoomForDedicated;
            return Ok((schedule, trace));
        }
        schedule.placements.push(Placement {
            task_id: id,
            first_processor: next_free,
            width,
            start: Rational::zero(),
            end: exec(id, width),
        });
        next_free += width;
        free -= width;
    }

    while queues.iter().any(|(_, q)| !q.is_empty()) {
        if free < gw {
            schedule.rejected = queues.iter().flat_map(|(_, q)| q.iter().copied()).collect();
            schedule.rejected.sort_unstable();
            schedule.exit_reason = ExitReason::NoRoomForGroup;
            break;
        }
        let mut group = GroupTrace {
            first_processor: next_free,
            entries: Vec::new(),
            busy: Rational::zero(),
            blocked_by: None,
        };
        while let Some((class, queue)) = queues.iter_mut().find(|(_, q)| !q.is_empty()) {
            let id = *queue.front().expect("queue is nonempty");
            let t = exec(id, gw);
            trace.examinations += 1;
            let end = &group.busy + &t;
            if &end > d {
                group.blocked_by = Some((id, *class));
                break;
            }
            queue.pop_front();
            schedule.placements.push(Placement {
                task_id: id,
                first_processor: next_free,
                width: gw,
                start: group.busy.clone(),
                end: end.clone(),
            });
            group.entries.push((id, *class));
            group.busy = end;
        }
        // Every stacked task fits an empty group (t on the group <= d), so
        // each group makes progress.
        assert!(!group.entries.is_empty(), "stacked task does not fit an empty group");
        trace.groups.push(group);
        next_free += gw;
        free -= gw;
    }
    Ok((schedule, trace))
}

fn sorted_ids(tasks: &TaskSet) -> Vec<TaskId> {
    let mut ids: Vec<TaskId> = tasks.tasks().iter().map(|t| t.id).collect();
    ids.sort_unstable();
    ids
}

/// Processor-time used over `m·d`.
pub fn utilization(s: &Schedule) -> Rational {
    if s.m == 0 || !s.d.is_positive() {
        return Rational::zero();
    }
    let used: Rational = s.placements.iter().map(Placement::area).sum();
    used / s.d.scale(s.m)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScheduleViolation {
    UnknownTask(TaskId),
    PlacedTwice(TaskId),
    Unaccounted(TaskId),
    PlacedAndRejected(TaskId),
    WrongDuration { task: TaskId, expected: Rational, actual: Rational },
    OutsideWindow(TaskId),
    OutsideMachine(TaskId),
    Overlap(TaskId, TaskId),
    WrongWidth { task: TaskId, expected: usize, actual: usize },
    ExitMismatch,
    WorkloadAboveMinimum { task: TaskId, width: usize, canonical: Option<usize> },
    Group(String),
}

impl fmt::Display for ScheduleViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ScheduleViolation::*;
        match self {
            UnknownTask(id) => write!(f, "task {id} is not in the instance"),
            PlacedTwice(id) => write!(f, "task {id} placed more than once"),
            Unaccounted(id) => write!(f, "task {id} neither placed nor rejected"),
            PlacedAndRejected(id) => write!(f, "task {id} both placed and rejected"),
            WrongDuration { task, expected, actual } => {
                write!(f, "task {task} runs {actual}, expected {expected}")
            }
            OutsideWindow(id) => write!(f, "task {id} not within [0, d]"),
            OutsideMachine(id) => write!(f, "task {id} uses processors beyond m"),
            Overlap(a, b) => write!(f, "tasks {a} and {b} overlap"),
            WrongWidth { task, expected, actual } => {
                write!(f, "task {task} has width {actual}, expected {expected}")
            }
            ExitMismatch => write!(f, "exit reason disagrees with the rejected list"),
            WorkloadAboveMinimum { task, width, canonical } => {
                write!(f, "task {task} at width {width} processes more than at {canonical:?}")
            }
            Group(msg) => f.write_str(msg),
        }
    }
}

/// Structural checks that need only the instance: durations, bounds,
/// overlaps, and accounting of every task.
pub fn validate_schedule(s: &Schedule, tasks: &TaskSet) -> ValidationReport<ScheduleViolation> {
    let mut report = ValidationReport::new();
    let mut placed = std::collections::BTreeSet::new();
    for p in &s.placements {
        let Some(task) = tasks.get(p.task_id) else {
            report.push(ScheduleViolation::UnknownTask(p.task_id));
            continue;
        };
        if !placed.insert(p.task_id) {
            report.push(ScheduleViolation::PlacedTwice(p.task_id));
        }
        match tasks.exec_time(task, p.width) {
            Ok(expected) => {
                let actual = &p.end - &p.start;
                if actual != expected {
                    report.push(ScheduleViolation::WrongDuration { task: p.task_id, expected, actual });
                }
            }
            Err(_) => report.push(ScheduleViolation::OutsideMachine(p.task_id)),
        }
        if p.start.is_negative() || p.start >= p.end || p.end > s.d {
            report.push(ScheduleViolation::OutsideWindow(p.task_id));
        }
        if p.first_processor == 0 || p.width == 0 || p.last_processor() > s.m {
            report.push(ScheduleViolation::OutsideMachine(p.task_id));
        }
    }
    for (i, a) in s.placements.iter().enumerate() {
        for b in &s.placements[i + 1..] {
            if a.overlaps(b) {
                report.push(ScheduleViolation::Overlap(a.task_id, b.task_id));
            }
        }
    }
    for id in &s.rejected {
        if placed.contains(id) {
            report.push(ScheduleViolation::PlacedAndRejected(*id));
        }
    }
    for task in tasks.tasks() {
        if !placed.contains(&task.id) && !s.rejected.contains(&task.id) {
            report.push(ScheduleViolation::Unaccounted(task.id));
        }
    }
    if s.rejected.is_empty() != (s.exit_reason == ExitReason::AllPlaced) {
        report.push(ScheduleViolation::ExitMismatch);
    }
    report
}

/// Dedicated tasks run on exactly their canonical count; everything else on
/// `group_width`.
pub fn width_check(s: &Schedule, tasks: &TaskSet, params: &ParamSet) -> ValidationReport<ScheduleViolation> {
    let mut report = ValidationReport::new();
    for p in &s.placements {
        let Some(task) = tasks.get(p.task_id) else { continue };
        let expected = match crate::classifier::classify_task(task, &s.d, tasks.k(), params) {
            TaskClass::Dedicated { canonical } => canonical,
            _ => params.group_width,
        };
        if p.width != expected {
            report.push(ScheduleViolation::WrongWidth { task: p.task_id, expected, actual: p.width });
        }
    }
    report
}

/// Every placed task processes the same workload as on its canonical count,
/// i.e. the minimum workload needed to meet `d`.
pub fn min_workload_check(s: &Schedule, tasks: &TaskSet, d: &Rational) -> ValidationReport<ScheduleViolation> {
    let mut report = ValidationReport::new();
    for p in &s.placements {
        let Some(task) = tasks.get(p.task_id) else { continue };
        let canonical = tasks.canonical_processors(task, d);
        let same = match (canonical, tasks.workload(task, p.width)) {
            (Some(g), Ok(w)) => tasks.workload(task, g).map(|wg| wg == w).unwrap_or(false),
            _ => false,
        };
        if !same {
            report.push(ScheduleViolation::WorkloadAboveMinimum { task: p.task_id, width: p.width, canonical });
        }
    }
    report
}

/// Per-group utilization guarantees for groups that closed on a task that
/// did not fit:
///
/// * blocked by a short task, or single-class and blocked by the same class:
///   utilization `>= r`;
/// * otherwise, blocked by a class-`h` task: utilization `>= 1 - (h/δ′)·r`.
///
/// Also checks that groups mixing classes number at most one per class
/// transition.
pub fn group_accounting_check(trace: &Trace, params: &ParamSet, d: &Rational) -> ValidationReport<ScheduleViolation> {
    let mut report = ValidationReport::new();
    let r = &params.target_utilization;
    let gw = params.group_width;
    let mut mixed = 0;
    let mut classes_seen = std::collections::BTreeSet::new();
    for g in &trace.groups {
        let first = g.entries[0].1;
        let single = g.entries.iter().all(|(_, c)| *c == first);
        if !single {
            mixed += 1;
        }
        classes_seen.extend(g.entries.iter().map(|(_, c)| class_rank(*c)));
        let Some((blocker, class)) = g.blocked_by else { continue };
        let util = &g.busy / d;
        let bound = match class {
            TaskClass::Short => r.clone(),
            c if single && c == first => r.clone(),
            TaskClass::Stacked { h } => Rational::one() - r.scale(h).div_int(gw),
            _ => Rational::zero(),
        };
        if util < bound {
            report.push(ScheduleViolation::Group(format!(
                "group at processor {} (blocked by {blocker}) has utilization {util} < {bound}",
                g.first_processor
            )));
        }
    }
    if mixed > classes_seen.len().saturating_sub(1) {
        report.push(ScheduleViolation::Group(format!(
            "{mixed} mixed groups for {} classes",
            classes_seen.len()
        )));
    }
    report
}

fn class_rank(c: TaskClass) -> usize {
    match c {
        TaskClass::Stacked { h } => h,
        _ => 0,
    }
}

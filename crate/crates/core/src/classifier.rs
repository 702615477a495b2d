//! Partition of a task set at deadline `d` into dedicated, stacked and short
//! tasks.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::params::ParamSet;
use crate::rational::Rational;
use crate::report::ValidationReport;
use crate::task_model::{Task, TaskId, TaskSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskClass {
    /// Runs alone on its canonical number of processors.
    Dedicated { canonical: usize },
    /// Stacked on a group; `h` is the canonical count.
    Stacked { h: usize },
    /// Stacked on a group, filling leftover time.
    Short,
    /// No processor count up to `k` meets the deadline.
    Infeasible,
}

pub fn classify_task(task: &Task, d: &Rational, k: usize, params: &ParamSet) -> TaskClass {
    let Some(gamma) = crate::task_model::canonical_processors(task, d, k) else {
        return TaskClass::Infeasible;
    };
    let r = &params.target_utilization;
    let t_gamma = task.profile.exec_time(gamma, k).expect("gamma <= k");
    if gamma >= params.class_limit || t_gamma >= r * d {
        return TaskClass::Dedicated { canonical: gamma };
    }
    let t_group = task.profile.exec_time(params.group_width, k).expect("group width <= k");
    if gamma < params.lowest_class || t_group < (Rational::one() - r) * d {
        TaskClass::Short
    } else {
        TaskClass::Stacked { h: gamma }
    }
}

/// Task ids per class; every list is sorted by id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub d: Rational,
    /// `(id, canonical count)`.
    pub dedicated: Vec<(TaskId, usize)>,
    /// One entry per class in `[lowest_class, class_limit - 1]`, possibly empty.
    pub classes: BTreeMap<usize, Vec<TaskId>>,
    pub short: Vec<TaskId>,
    pub infeasible: Vec<TaskId>,
}

impl Classification {
    pub fn len(&self) -> usize {
        self.dedicated.len()
            + self.classes.values().map(Vec::len).sum::<usize>()
            + self.short.len()
            + self.infeasible.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn class_of(&self, id: TaskId) -> Option<TaskClass> {
        if let Some(&(_, canonical)) = self.dedicated.iter().find(|(t, _)| *t == id) {
            return Some(TaskClass::Dedicated { canonical });
        }
        for (&h, ids) in &self.classes {
            if ids.contains(&id) {
                return Some(TaskClass::Stacked { h });
            }
        }
        if self.short.contains(&id) {
            return Some(TaskClass::Short);
        }
        self.infeasible.contains(&id).then_some(TaskClass::Infeasible)
    }
}

pub fn classify(tasks: &TaskSet, d: &Rational, params: &ParamSet) -> Classification {
    let mut cls = Classification {
        d: d.clone(),
        dedicated: Vec::new(),
        classes: (params.lowest_class..params.class_limit).map(|h| (h, Vec::new())).collect(),
        short: Vec::new(),
        infeasible: Vec::new(),
    };
    let mut order: Vec<&Task> = tasks.tasks().iter().collect();
    order.sort_by_key(|t| t.id);
    for task in order {
        match classify_task(task, d, tasks.k(), params) {
            TaskClass::Dedicated { canonical } => cls.dedicated.push((task.id, canonical)),
            TaskClass::Stacked { h } => cls.classes.entry(h).or_default().push(task.id),
            TaskClass::Short => cls.short.push(task.id),
            TaskClass::Infeasible => cls.infeasible.push(task.id),
        }
    }
    cls
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClassViolation {
    Missing(TaskId),
    Duplicate(TaskId),
    Unknown(TaskId),
    /// The task does not satisfy the bounds of the class it was put in.
    OutOfBounds { id: TaskId, class: TaskClass, detail: String },
    /// `x_h` stacked class-`h` tasks fall outside `[r·d, d]`.
    Batch { h: usize, ids: Vec<TaskId>, total: Rational },
}

impl fmt::Display for ClassViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassViolation::Missing(id) => write!(f, "task {id} is not classified"),
            ClassViolation::Duplicate(id) => write!(f, "task {id} appears more than once"),
            ClassViolation::Unknown(id) => write!(f, "task {id} is not in the task set"),
            ClassViolation::OutOfBounds { id, class, detail } => {
                write!(f, "task {id} ({class:?}): {detail}")
            }
            ClassViolation::Batch { h, ids, total } => {
                write!(f, "class {h} batch {ids:?} totals {total}")
            }
        }
    }
}

/// Every task appears in exactly one part.
pub fn partition_check(cls: &Classification, tasks: &TaskSet) -> ValidationReport<ClassViolation> {
    let mut report = ValidationReport::new();
    let expected: BTreeSet<TaskId> = tasks.tasks().iter().map(|t| t.id).collect();
    let mut seen = BTreeSet::new();
    let all = cls
        .dedicated
        .iter()
        .map(|(id, _)| *id)
        .chain(cls.classes.values().flatten().copied())
        .chain(cls.short.iter().copied())
        .chain(cls.infeasible.iter().copied());
    for id in all {
        if !expected.contains(&id) {
            report.push(ClassViolation::Unknown(id));
        } else if !seen.insert(id) {
            report.push(ClassViolation::Duplicate(id));
        }
    }
    for id in expected.difference(&seen) {
        report.push(ClassViolation::Missing(*id));
    }
    report
}

/// Per-task bounds implied by each class:
///
/// * dedicated: `t_γ >= r·d`;
/// * short: `t_δ′ < (1-r)·d`;
/// * class `h`: `γ = h`, `t_γ < r·d`, and
///   `max{1-r, (h-1)/δ′}·d <= t_δ′ < (h/δ′)·r·d`.
pub fn interval_check(
    cls: &Classification,
    tasks: &TaskSet,
    params: &ParamSet,
) -> ValidationReport<ClassViolation> {
    let mut report = ValidationReport::new();
    let d = &cls.d;
    let k = tasks.k();
    let r = &params.target_utilization;
    let gw = params.group_width;
    let one_minus_r = Rational::one() - r;
    let mut bad = |id: TaskId, class: TaskClass, detail: String| {
        report.push(ClassViolation::OutOfBounds { id, class, detail })
    };
    for task in tasks.tasks() {
        let Some(class) = cls.class_of(task.id) else { continue };
        let gamma = tasks.canonical_processors(task, d);
        let t_group = task.profile.exec_time(gw, k).expect("group width <= k");
        match (class, gamma) {
            (TaskClass::Infeasible, None) => {}
            (_, None) | (TaskClass::Infeasible, Some(_)) => {
                bad(task.id, class, format!("canonical count is {gamma:?}"))
            }
            (TaskClass::Dedicated { canonical }, Some(g)) => {
                let t = task.profile.exec_time(g, k).expect("gamma <= k");
                if canonical != g || t < r * d {
                    bad(task.id, class, format!("gamma={g}, t_gamma={t} < r*d"));
                }
            }
            (TaskClass::Short, Some(_)) => {
                if t_group >= &one_minus_r * d {
                    bad(task.id, class, format!("t on group = {t_group} >= (1-r)*d"));
                }
            }
            (TaskClass::Stacked { h }, Some(g)) => {
                let t = task.profile.exec_time(g, k).expect("gamma <= k");
                let lower = std::cmp::max(one_minus_r.clone(), Rational::new(h as i64 - 1, gw as i64)) * d;
                let upper = r.scale(h).div_int(gw) * d;
                if g != h || t >= r * d || t_group < lower || t_group >= upper {
                    bad(
                        task.id,
                        class,
                        format!("gamma={g}, t_gamma={t}, t on group={t_group} not in [{lower}, {upper})"),
                    );
                }
            }
        }
    }
    report
}

/// Checks that `x_h` class-`h` tasks stacked on one group total within
/// `[r·d, d]`. Always tries the `x_h` shortest and `x_h` longest members (which
/// bound every other choice), then up to `samples` random subsets.
pub fn batch_check(
    cls: &Classification,
    tasks: &TaskSet,
    params: &ParamSet,
    samples: usize,
    seed: u64,
) -> ValidationReport<ClassViolation> {
    let mut report = ValidationReport::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = &cls.d;
    let lower = &params.target_utilization * d;
    for (&h, ids) in &cls.classes {
        let x = params.batch_sizes[&h];
        if ids.len() < x {
            continue;
        }
        let mut times: Vec<(Rational, TaskId)> = ids
            .iter()
            .filter_map(|id| tasks.get(*id))
            .map(|t| (tasks.exec_time(t, params.group_width).expect("group width <= k"), t.id))
            .collect();
        times.sort();
        let mut picks: Vec<Vec<usize>> = vec![(0..x).collect(), (times.len() - x..times.len()).collect()];
        for _ in 0..samples {
            picks.push(index::sample(&mut rng, times.len(), x).into_vec());
        }
        for pick in picks {
            let total: Rational = pick.iter().map(|&i| &times[i].0).sum();
            if total < lower || &total > d {
                let ids = pick.iter().map(|&i| times[i].1).collect();
                report.push(ClassViolation::Batch { h, ids, total });
            }
        }
    }
    report
}

pub const DEFAULT_BATCH_SAMPLES: usize = 100;
